//! Radial shooting for first Dirichlet eigenvalues on geodesic balls.
//!
//! The radial p-Laplacian `[|φ'|^(p-2) Θ φ']' + λ Θ |φ|^(p-2) φ = 0` is
//! integrated in momentum form
//!
//! ```text
//! φ' = sign(w) |w/Θ|^(1/(p-1)),   w' = -λ Θ |φ|^(p-2) φ,
//! ```
//!
//! with `w = |φ'|^(p-2) φ' Θ`. This stays well posed where `φ' = 0` for every
//! `p > 1`. Since `Θ(0) = 0` the integration starts at a small offset `ε`
//! using the leading-order behaviour of the profile with `φ(0) = 1`,
//! `w(ε) = -λ ε^N / N`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::eigen::{EigenResult, Exponents, Normalization};
use crate::error::{Error, Result};
use crate::geometry::{unit_sphere_area, RadialDomain};
use crate::ode::{integrate, StepControl};

/// Start offset away from the singular center.
pub fn start_offset(r0: f64) -> f64 {
    (1e-4 * r0).max(1e-6)
}

/// How far past `r0` trajectories are continued so that a first zero
/// slightly beyond the boundary is still located.
fn integration_limit(dom: &RadialDomain, factor: f64) -> f64 {
    let r0 = dom.r0;
    let r_max = dom.manifold.r_max();
    let limit = factor * r0;
    if r_max.is_finite() {
        limit.min(r0 + 0.5 * (r_max - r0))
    } else {
        limit
    }
}

/// `φ(0) - φ(ε)` to leading order when `φ' ≈ -(c t)^(1/(p-1))` near the center.
fn center_drop(p: f64, c: f64, eps: f64) -> f64 {
    (p - 1.0) / p * c.powf(1.0 / (p - 1.0)) * eps.powf(p / (p - 1.0))
}

fn signed_pow(x: f64, e: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().powf(e)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalarTrajectory {
    pub radii: Vec<f64>,
    pub phi: Vec<f64>,
    /// `w = |φ'|^(p-2) φ' Θ`.
    pub momentum: Vec<f64>,
    /// First zero of `φ`, if reached before the integration limit.
    pub first_zero: Option<f64>,
    /// `‖φ‖_p^p` over the integrated range.
    pub lp_integral: f64,
}

fn scalar_trajectory(
    p: f64,
    lambda: f64,
    dom: &RadialDomain,
    t_end: f64,
    control: &StepControl,
) -> Result<ScalarTrajectory> {
    let m = &dom.manifold;
    let n = dom.dim() as f64;
    let eps = start_offset(dom.r0);
    let inv = 1.0 / (p - 1.0);
    let lead = eps.powf(n) / n;
    let rhs = |t: f64, y: &[f64; 3]| {
        let theta = m.density_unchecked(t);
        let phi = y[0];
        [
            signed_pow(y[1] / theta, inv),
            -lambda * theta * signed_pow(phi, p - 1.0),
            theta * phi.abs().powf(p),
        ]
    };
    let phi0 = 1.0 - center_drop(p, lambda / n, eps);
    let sol = integrate(rhs, eps, [phi0, -lambda * lead, lead], t_end, control, 2, |y| y[0])?;
    let first_zero = sol.event.then(|| *sol.ts.last().unwrap());
    let lp_integral = unit_sphere_area(dom.dim() - 1) * sol.ys.last().unwrap()[2];
    Ok(ScalarTrajectory {
        phi: sol.ys.iter().map(|y| y[0]).collect(),
        momentum: sol.ys.iter().map(|y| y[1]).collect(),
        radii: sol.ts,
        first_zero,
        lp_integral,
    })
}

/// Integrates the scalar radial equation for a trial `λ` from the center
/// outwards, to the first zero of `φ` or slightly past `r0`.
pub fn integrate_radial_scalar(
    p: f64,
    lambda: f64,
    dom: &RadialDomain,
    control: &StepControl,
) -> Result<ScalarTrajectory> {
    if !(p > 1.0) {
        return Err(Error::InvalidParameter(format!("p must exceed 1, got {p}")));
    }
    if !(lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be >= 0, got {lambda}")));
    }
    scalar_trajectory(p, lambda, dom, integration_limit(dom, 1.5), control)
}

/// Scalar shooting result with the radial abscissae of the profile.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RadialEigen {
    pub result: EigenResult,
    pub radii: Vec<f64>,
    /// `v(ε)/u(ε)` at the solution (1 for scalar solves).
    pub slope_ratio: f64,
    /// Final `(λ_lo, λ_hi)` bracket when bisection was used.
    pub bracket: Option<(f64, f64)>,
}

const MAX_BRACKET_STEPS: usize = 200;
const MAX_BISECTIONS: usize = 200;

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 1e-12 && tol < 1e-2) {
        return Err(Error::InvalidParameter(format!("tol must lie in (1e-12, 1e-2), got {tol}")));
    }
    Ok(())
}

/// First Dirichlet eigenvalue of the p-Laplacian on a geodesic ball: the `λ`
/// whose radial trajectory first vanishes at `r0`.
///
/// The first zero `t*(λ)` decreases strictly with `λ`, so the eigenvalue is
/// bracketed by doubling (or halving) from `(π/(2 r0))^p` and then bisected.
pub fn first_eigenvalue_scalar(p: f64, dom: &RadialDomain, tol: f64) -> Result<RadialEigen> {
    if !(p > 1.0) {
        return Err(Error::InvalidParameter(format!("p must exceed 1, got {p}")));
    }
    check_tol(tol)?;
    let r0 = dom.r0;
    let control = StepControl::with_tolerance(tol / 100.0);
    let vanishes_before_r0 = |lambda: f64| -> Result<bool> {
        Ok(scalar_trajectory(p, lambda, dom, r0, &control)?.first_zero.is_some())
    };

    let start = (PI / (2.0 * r0)).powf(p);
    let (mut lo, mut hi);
    if vanishes_before_r0(start)? {
        hi = start;
        lo = 0.5 * start;
        let mut steps = 0;
        while vanishes_before_r0(lo)? {
            hi = lo;
            lo *= 0.5;
            steps += 1;
            if steps > MAX_BRACKET_STEPS {
                return Err(Error::NonConvergence {
                    iterations: steps,
                    detail: format!("no lower bracket, last bracket [{lo}, {hi}]"),
                });
            }
        }
    } else {
        lo = start;
        hi = 2.0 * start;
        let mut steps = 0;
        while !vanishes_before_r0(hi)? {
            lo = hi;
            hi *= 2.0;
            steps += 1;
            if steps > MAX_BRACKET_STEPS {
                return Err(Error::NonConvergence {
                    iterations: steps,
                    detail: format!("no upper bracket, last bracket [{lo}, {hi}]"),
                });
            }
        }
    }

    let width_tol = (1e-2 * tol).max(1e-14);
    let mut iterations = 0;
    while hi - lo > width_tol * hi {
        iterations += 1;
        if iterations > MAX_BISECTIONS {
            return Err(Error::NonConvergence {
                iterations,
                detail: format!("bisection stalled, last bracket [{lo}, {hi}]"),
            });
        }
        let mid = 0.5 * (lo + hi);
        if vanishes_before_r0(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let lambda = 0.5 * (lo + hi);
    let traj = integrate_radial_scalar(p, lambda, dom, &control)?;
    let t_star = traj.first_zero.ok_or_else(|| Error::NonConvergence {
        iterations,
        detail: format!("trajectory at lambda = {lambda} has no zero, last bracket [{lo}, {hi}]"),
    })?;
    let residual = (t_star - r0).abs() / r0;
    if residual > tol {
        return Err(Error::NonConvergence {
            iterations,
            detail: format!(
                "first zero {t_star} misses r0 = {r0} by {residual:e}, last bracket [{lo}, {hi}]"
            ),
        });
    }
    let norm_u = traj.lp_integral.powf(1.0 / p);
    Ok(RadialEigen {
        result: EigenResult {
            lambda,
            u: traj.phi,
            v: None,
            normalization: Normalization::PeakOne,
            residual,
            norm_u,
            norm_v: None,
            iterations,
            converged: true,
        },
        radii: traj.radii,
        slope_ratio: 1.0,
        bracket: Some((lo, hi)),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemTrajectory {
    pub radii: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub w_u: Vec<f64>,
    pub w_v: Vec<f64>,
    /// Whether `u` or `v` changed sign before the integration limit.
    pub event: bool,
    /// First zero of `u`: exact if `u` vanished first, otherwise a Newton
    /// extrapolation from the final state (infinite if `u` is not decreasing).
    pub zero_u: f64,
    pub zero_v: f64,
    /// `‖u‖_p^p`, `‖v‖_q^q` and `𝔹(u, v)` over the integrated range.
    pub integrals: [f64; 3],
}

fn system_trajectory(
    e: &Exponents,
    lambda: f64,
    s: f64,
    dom: &RadialDomain,
    t_end: f64,
    control: &StepControl,
) -> Result<SystemTrajectory> {
    let m = &dom.manifold;
    let n = dom.dim() as f64;
    let eps = start_offset(dom.r0);
    let (p, q, alpha, beta) = (e.p, e.q, e.alpha, e.beta);
    let (inv_p, inv_q) = (1.0 / (p - 1.0), 1.0 / (q - 1.0));
    let lead = eps.powf(n) / n;
    let rhs = |t: f64, y: &[f64; 7]| {
        let theta = m.density_unchecked(t);
        let (u, v) = (y[0], y[1]);
        let (au, av) = (u.abs(), v.abs());
        // |u|^(α-1) |v|^(β-1) v and its mirror, written to stay finite at u = 0 or v = 0
        // whenever the product itself vanishes.
        let cu = if av == 0.0 { 0.0 } else { v.signum() * au.powf(alpha - 1.0) * av.powf(beta) };
        let cv = if au == 0.0 { 0.0 } else { u.signum() * au.powf(alpha) * av.powf(beta - 1.0) };
        [
            signed_pow(y[2] / theta, inv_p),
            signed_pow(y[3] / theta, inv_q),
            -lambda * theta * cu,
            -lambda * theta * cv,
            theta * au.powf(p),
            theta * av.powf(q),
            theta * (u * v).signum() * au.powf(alpha) * av.powf(beta),
        ]
    };
    let y0 = [
        1.0 - center_drop(p, lambda * s.powf(beta) / n, eps),
        s - center_drop(q, lambda * s.powf(beta - 1.0) / n, eps),
        -lambda * s.powf(beta) * lead,
        -lambda * s.powf(beta - 1.0) * lead,
        lead,
        s.powf(q) * lead,
        s.powf(beta) * lead,
    ];
    let sol = integrate(rhs, eps, y0, t_end, control, 4, |y| y[0].min(y[1]))?;
    let t_last = *sol.ts.last().unwrap();
    let y_last = *sol.ys.last().unwrap();
    let theta = m.density_unchecked(t_last);
    let extrapolate = |value: f64, momentum: f64, inv: f64| {
        let slope = signed_pow(momentum / theta, inv);
        if slope < 0.0 {
            t_last + value / -slope
        } else {
            f64::INFINITY
        }
    };
    let (zero_u, zero_v) = if sol.event {
        if y_last[0] <= y_last[1] {
            (t_last, extrapolate(y_last[1], y_last[3], inv_q))
        } else {
            (extrapolate(y_last[0], y_last[2], inv_p), t_last)
        }
    } else {
        (
            extrapolate(y_last[0], y_last[2], inv_p),
            extrapolate(y_last[1], y_last[3], inv_q),
        )
    };
    let omega = unit_sphere_area(dom.dim() - 1);
    Ok(SystemTrajectory {
        u: sol.ys.iter().map(|y| y[0]).collect(),
        v: sol.ys.iter().map(|y| y[1]).collect(),
        w_u: sol.ys.iter().map(|y| y[2]).collect(),
        w_v: sol.ys.iter().map(|y| y[3]).collect(),
        radii: sol.ts,
        event: sol.event,
        zero_u,
        zero_v,
        integrals: [omega * y_last[4], omega * y_last[5], omega * y_last[6]],
    })
}

/// Integrates the coupled radial system from `u(ε) = 1`, `v(ε) = s`, up to
/// the first sign change of either profile or slightly past `r0`.
pub fn integrate_radial_system(
    e: &Exponents,
    lambda: f64,
    s: f64,
    dom: &RadialDomain,
    control: &StepControl,
) -> Result<SystemTrajectory> {
    e.validate()?;
    if !(lambda > 0.0 && s > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda and s must be positive (lambda = {lambda}, s = {s})"
        )));
    }
    system_trajectory(e, lambda, s, dom, integration_limit(dom, 1.5), control)
}

const NEWTON_MAX_ITER: usize = 60;
const NEWTON_HALVINGS: usize = 8;

struct SystemShooter<'a> {
    e: &'a Exponents,
    dom: &'a RadialDomain,
    control: StepControl,
    t_end: f64,
}

impl SystemShooter<'_> {
    fn trajectory(&self, lambda: f64, s: f64) -> Result<SystemTrajectory> {
        system_trajectory(self.e, lambda, s, self.dom, self.t_end, &self.control)
    }

    /// `((t_u - r0)/r0, (t_v - r0)/r0)` in log coordinates `(ln λ, ln s)`.
    fn residual(&self, x: [f64; 2]) -> Result<[f64; 2]> {
        let traj = self.trajectory(x[0].exp(), x[1].exp())?;
        let r0 = self.dom.r0;
        Ok([(traj.zero_u - r0) / r0, (traj.zero_v - r0) / r0])
    }

    fn newton(&self, x0: [f64; 2], tol: f64) -> Result<Option<([f64; 2], usize)>> {
        let norm = |f: &[f64; 2]| f[0].abs().max(f[1].abs());
        let mut x = x0;
        let mut f = self.residual(x)?;
        for iter in 0..NEWTON_MAX_ITER {
            if norm(&f) <= tol {
                return Ok(Some((x, iter)));
            }
            if !norm(&f).is_finite() {
                return Ok(None);
            }
            let h = 1e-7;
            let f0 = self.residual([x[0] + h, x[1]])?;
            let f1 = self.residual([x[0], x[1] + h])?;
            let j = [
                [(f0[0] - f[0]) / h, (f1[0] - f[0]) / h],
                [(f0[1] - f[1]) / h, (f1[1] - f[1]) / h],
            ];
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            if !(det.abs() > 0.0) || !det.is_finite() {
                return Ok(None);
            }
            let dx = [
                -(j[1][1] * f[0] - j[0][1] * f[1]) / det,
                -(-j[1][0] * f[0] + j[0][0] * f[1]) / det,
            ];
            let mut step = 1.0;
            let mut accepted = None;
            for _ in 0..=NEWTON_HALVINGS {
                let trial = [x[0] + step * dx[0], x[1] + step * dx[1]];
                let f_trial = self.residual(trial)?;
                if norm(&f_trial) < norm(&f) {
                    accepted = Some((trial, f_trial));
                    break;
                }
                step *= 0.5;
            }
            match accepted {
                Some((xn, fn_)) => {
                    x = xn;
                    f = fn_;
                }
                None => return Ok(None),
            }
        }
        Ok((norm(&f) <= tol).then_some((x, NEWTON_MAX_ITER)))
    }

    /// For fixed `λ`, the ratio `s` at which `u` and `v` vanish together, and
    /// that common zero. `t_u - t_v` decreases in `s`.
    fn match_zeros(&self, lambda: f64, s_start: f64, tol: f64) -> Result<(f64, f64)> {
        let gap = |s: f64| -> Result<(f64, f64)> {
            let traj = self.trajectory(lambda, s)?;
            Ok((traj.zero_u - traj.zero_v, 0.5 * (traj.zero_u + traj.zero_v)))
        };
        let (mut lo, mut hi) = (s_start.ln(), s_start.ln());
        let (g, t) = gap(s_start)?;
        if g == 0.0 {
            return Ok((s_start, t));
        }
        let mut steps = 0;
        if g > 0.0 {
            while gap(hi.exp())?.0 > 0.0 {
                lo = hi;
                hi += 1.0;
                steps += 1;
                if steps > 60 {
                    return Err(Error::NonConvergence { iterations: steps, detail: "cannot bracket s".into() });
                }
            }
        } else {
            while gap(lo.exp())?.0 < 0.0 {
                hi = lo;
                lo -= 1.0;
                steps += 1;
                if steps > 60 {
                    return Err(Error::NonConvergence { iterations: steps, detail: "cannot bracket s".into() });
                }
            }
        }
        let mut result = gap((0.5 * (lo + hi)).exp())?;
        for _ in 0..MAX_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            result = gap(mid.exp())?;
            if result.0.abs() <= 1e-2 * tol * self.dom.r0 || hi - lo < 1e-13 {
                return Ok((mid.exp(), result.1));
            }
            if result.0 > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok((0.5 * (lo + hi)).exp()).map(|s| (s, result.1))
    }

    fn nested_bisection(&self, lambda0: f64, tol: f64) -> Result<([f64; 2], usize)> {
        let r0 = self.dom.r0;
        let mut s = 1.0;
        let eval = |lambda: f64, s_prev: f64| self.match_zeros(lambda, s_prev, tol);
        let (s0, t0) = eval(lambda0, s)?;
        s = s0;
        let (mut lo, mut hi);
        let mut steps = 0;
        if t0 < r0 {
            hi = lambda0;
            lo = 0.5 * lambda0;
            loop {
                let (sl, tl) = eval(lo, s)?;
                s = sl;
                if tl >= r0 {
                    break;
                }
                hi = lo;
                lo *= 0.5;
                steps += 1;
                if steps > MAX_BRACKET_STEPS {
                    return Err(Error::NonConvergence { iterations: steps, detail: "no lower lambda bracket".into() });
                }
            }
        } else {
            lo = lambda0;
            hi = 2.0 * lambda0;
            loop {
                let (sh, th) = eval(hi, s)?;
                s = sh;
                if th < r0 {
                    break;
                }
                lo = hi;
                hi *= 2.0;
                steps += 1;
                if steps > MAX_BRACKET_STEPS {
                    return Err(Error::NonConvergence { iterations: steps, detail: "no upper lambda bracket".into() });
                }
            }
        }
        let mut iterations = 0;
        while hi - lo > (1e-2 * tol).max(1e-14) * hi {
            iterations += 1;
            if iterations > MAX_BISECTIONS {
                return Err(Error::NonConvergence {
                    iterations,
                    detail: format!("nested bisection stalled, last bracket [{lo}, {hi}]"),
                });
            }
            let mid = 0.5 * (lo + hi);
            let (sm, tm) = eval(mid, s)?;
            s = sm;
            if tm < r0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let lambda = 0.5 * (lo + hi);
        let (s, _) = eval(lambda, s)?;
        Ok(([lambda.ln(), s.ln()], iterations))
    }
}

/// First eigenvalue of the coupled `(p, q)` system on a geodesic ball by
/// two-parameter shooting in `(λ, s)`, `s = v(ε)/u(ε)`.
///
/// Damped Newton on the first-zero residuals, seeded from the scalar
/// eigenvalues, with nested bisection as the fallback. The returned pair is
/// rescaled to `𝔹(u, v) = 1`.
pub fn first_eigenpair_system(e: &Exponents, dom: &RadialDomain, tol: f64) -> Result<RadialEigen> {
    e.validate()?;
    check_tol(tol)?;
    let lambda_p = first_eigenvalue_scalar(e.p, dom, tol)?.result.lambda;
    let lambda_q = if e.q == e.p {
        lambda_p
    } else {
        first_eigenvalue_scalar(e.q, dom, tol)?.result.lambda
    };
    let seed = e.alpha / e.p * lambda_p + e.beta / e.q * lambda_q;
    let shooter = SystemShooter {
        e,
        dom,
        control: StepControl::with_tolerance(tol / 100.0),
        t_end: integration_limit(dom, 1.5),
    };
    let (x, iterations) = match shooter.newton([seed.ln(), 0.0], tol)? {
        Some(found) => found,
        None => {
            let wide = SystemShooter {
                t_end: integration_limit(dom, 4.0),
                ..shooter
            };
            let found = wide.nested_bisection(seed, tol)?;
            // Polish with Newton from the bisection point.
            shooter.newton(found.0, tol)?.unwrap_or(found)
        }
    };
    let (lambda, s) = (x[0].exp(), x[1].exp());
    let traj = shooter.trajectory(lambda, s)?;
    let r0 = dom.r0;
    let residual = ((traj.zero_u - r0).abs()).max((traj.zero_v - r0).abs()) / r0;
    if !(residual <= tol) {
        return Err(Error::NonConvergence {
            iterations,
            detail: format!("system shooting residual {residual:e} at lambda = {lambda}, s = {s}"),
        });
    }
    let [iu, iv, ib] = traj.integrals;
    let (a, b) = e.unit_coupling_scaling(ib);
    Ok(RadialEigen {
        result: EigenResult {
            lambda,
            u: traj.u.iter().map(|x| a * x).collect(),
            v: Some(traj.v.iter().map(|x| b * x).collect()),
            normalization: Normalization::BOne,
            residual,
            norm_u: a * iu.powf(1.0 / e.p),
            norm_v: Some(b * iv.powf(1.0 / e.q)),
            iterations,
            converged: true,
        },
        radii: traj.radii,
        slope_ratio: s,
        bracket: None,
    })
}

/// Residual norms `max |t_{u,v} - r0| / r0` on a 3×3 stencil of relative
/// offsets `(±rel)` around `(λ, s)`, row-major in `(λ, s)`. A unique,
/// transversal solution shows a single minimum at the center.
pub fn residual_landscape(
    e: &Exponents,
    dom: &RadialDomain,
    lambda: f64,
    s: f64,
    rel: f64,
    tol: f64,
) -> Result<[[f64; 3]; 3]> {
    let shooter = SystemShooter {
        e,
        dom,
        control: StepControl::with_tolerance(tol / 100.0),
        t_end: integration_limit(dom, 1.5),
    };
    let mut out = [[0.0; 3]; 3];
    for (i, di) in [-1.0, 0.0, 1.0].iter().enumerate() {
        for (j, dj) in [-1.0, 0.0, 1.0].iter().enumerate() {
            let f = shooter.residual([(lambda * (1.0 + di * rel)).ln(), (s * (1.0 + dj * rel)).ln()])?;
            out[i][j] = f[0].abs().max(f[1].abs());
        }
    }
    Ok(out)
}

/// Linear interpolation of a radial profile onto `targets`; zero beyond the
/// last radius.
pub fn sample_profile(radii: &[f64], values: &[f64], targets: &[f64]) -> Vec<f64> {
    targets
        .iter()
        .map(|&t| {
            if t <= radii[0] {
                return values[0];
            }
            match radii.partition_point(|&r| r < t) {
                i if i >= radii.len() => 0.0,
                i => {
                    let (r0, r1) = (radii[i - 1], radii[i]);
                    let w = (t - r0) / (r1 - r0);
                    values[i - 1] * (1.0 - w) + values[i] * w
                }
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RadialDomain;
    use approx::assert_relative_eq;

    fn interval_energy_oracle(p: f64, length: f64) -> f64 {
        // (p-1)|u'|^p + λ|u|^p = λ gives a quarter period of ((p-1)/λ)^(1/p) π/(p sin(π/p)).
        (p - 1.0) * (2.0 * PI / (p * (PI / p).sin()) / length).powf(p)
    }

    #[test]
    fn cosine_trajectory_in_one_dimension() {
        let dom = RadialDomain::model(1, 0.0, PI / 2.0).unwrap();
        let control = StepControl::with_tolerance(1e-12);
        let traj = integrate_radial_scalar(2.0, 1.0, &dom, &control).unwrap();
        let t_star = traj.first_zero.unwrap();
        assert!((t_star - PI / 2.0).abs() < 1e-8, "{t_star}");
        for (t, phi) in traj.radii.iter().zip(&traj.phi) {
            assert!((phi - t.cos()).abs() < 1e-8);
        }
    }

    #[test]
    fn sinc_trajectory_in_three_dimensions() {
        let dom = RadialDomain::model(3, 0.0, 1.0).unwrap();
        let control = StepControl::with_tolerance(1e-12);
        let traj = integrate_radial_scalar(2.0, PI * PI, &dom, &control).unwrap();
        assert!((traj.first_zero.unwrap() - 1.0).abs() < 1e-6);
        for (t, phi) in traj.radii.iter().zip(&traj.phi) {
            let exact = (PI * t).sin() / (PI * t);
            assert!((phi - exact).abs() < 1e-6, "t = {t}");
        }
    }

    #[test]
    fn hemisphere_trajectory_is_cosine() {
        let dom = RadialDomain::model(3, 1.0, PI / 2.0).unwrap();
        let control = StepControl::with_tolerance(1e-12);
        let traj = integrate_radial_scalar(2.0, 3.0, &dom, &control).unwrap();
        assert!((traj.first_zero.unwrap() - PI / 2.0).abs() < 1e-6);
        for (t, phi) in traj.radii.iter().zip(&traj.phi) {
            assert!((phi - t.cos()).abs() < 1e-6);
        }
    }

    #[test]
    fn scalar_eigenvalue_examples() {
        let flat1 = RadialDomain::model(1, 0.0, PI / 2.0).unwrap();
        let r = first_eigenvalue_scalar(2.0, &flat1, 1e-10).unwrap();
        assert!((r.result.lambda - 1.0).abs() < 1e-6);

        let disk = RadialDomain::model(2, 0.0, 1.0).unwrap();
        let r = first_eigenvalue_scalar(2.0, &disk, 1e-9).unwrap();
        assert!((r.result.lambda - 5.783185962946784).abs() < 1e-3);

        let interval = RadialDomain::model(1, 0.0, 1.0).unwrap();
        let r = first_eigenvalue_scalar(3.0, &interval, 1e-9).unwrap();
        assert_relative_eq!(r.result.lambda, interval_energy_oracle(3.0, 2.0), max_relative = 1e-6);

        let hemi = RadialDomain::model(2, 1.0, PI / 2.0).unwrap();
        let r = first_eigenvalue_scalar(2.0, &hemi, 1e-9).unwrap();
        assert!((r.result.lambda - 2.0).abs() < 1e-4);
    }

    #[test]
    fn interval_eigenvalues_follow_closed_form_across_p() {
        let interval = RadialDomain::model(1, 0.0, 1.0).unwrap();
        for &p in &[1.05, 1.2, 1.5, 2.5, 4.0] {
            let r = first_eigenvalue_scalar(p, &interval, 1e-8).unwrap();
            assert_relative_eq!(r.result.lambda, interval_energy_oracle(p, 2.0), max_relative = 1e-5);
        }
    }

    #[test]
    fn rejects_bad_tolerance() {
        let dom = RadialDomain::model(2, 0.0, 1.0).unwrap();
        assert!(first_eigenvalue_scalar(2.0, &dom, 0.1).is_err());
        assert!(first_eigenvalue_scalar(1.0, &dom, 1e-6).is_err());
    }

    #[test]
    fn momentum_is_nonpositive_while_profile_positive() {
        for &(p, dim, k) in &[(1.5, 2, -1.0), (2.0, 3, 1.0), (3.0, 1, 0.0), (1.2, 3, 0.0)] {
            let dom = RadialDomain::model(dim, k, 1.0).unwrap();
            let r = first_eigenvalue_scalar(p, &dom, 1e-8).unwrap();
            let traj = integrate_radial_scalar(p, r.result.lambda, &dom, &StepControl::with_tolerance(1e-10)).unwrap();
            for (phi, w) in traj.phi.iter().zip(&traj.momentum) {
                if *phi > 0.0 {
                    assert!(*w <= 0.0);
                }
            }
        }
    }

    #[test]
    fn first_zero_decreases_with_lambda() {
        let dom = RadialDomain::model(2, -1.0, 1.0).unwrap();
        let control = StepControl::with_tolerance(1e-10);
        for &p in &[1.5, 2.0, 3.0] {
            let zeros: Vec<f64> = [4.0, 6.0, 8.0, 12.0, 20.0, 40.0]
                .iter()
                .filter_map(|&l| integrate_radial_scalar(p, l, &dom, &control).unwrap().first_zero)
                .collect();
            assert!(zeros.len() >= 3);
            assert!(zeros.windows(2).all(|w| w[1] < w[0]));
        }
    }

    #[test]
    fn symmetric_system_keeps_profiles_equal() {
        let e = Exponents::new(2.0, 2.0, 1.0, 1.0).unwrap();
        let dom = RadialDomain::model(2, 0.5, 1.0).unwrap();
        let traj = integrate_radial_system(&e, 5.0, 1.0, &dom, &StepControl::with_tolerance(1e-10)).unwrap();
        for (u, v) in traj.u.iter().zip(&traj.v) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_system_reduces_to_scalar_trajectory() {
        let e = Exponents::new(3.0, 3.0, 2.0, 1.0).unwrap();
        let dom = RadialDomain::model(1, 0.0, 1.0).unwrap();
        let lambda = first_eigenvalue_scalar(3.0, &dom, 1e-9).unwrap().result.lambda;
        let control = StepControl::with_tolerance(1e-11);
        let sys = integrate_radial_system(&e, lambda, 1.0, &dom, &control).unwrap();
        let scalar = integrate_radial_scalar(3.0, lambda, &dom, &control).unwrap();
        let sampled = sample_profile(&scalar.radii, &scalar.phi, &sys.radii);
        for ((u, v), s) in sys.u.iter().zip(&sys.v).zip(&sampled) {
            assert!((u - v).abs() < 1e-12);
            assert!((u - s).abs() < 1e-6);
        }
    }

    #[test]
    fn asymmetric_system_profiles_decrease() {
        let e = Exponents::new(2.0, 3.0, 1.0, 1.5).unwrap();
        let dom = RadialDomain::model(2, 0.0, 1.0).unwrap();
        let traj = integrate_radial_system(&e, 6.0, 0.5, &dom, &StepControl::with_tolerance(1e-10)).unwrap();
        let n = traj.radii.len();
        for i in 1..n {
            if traj.u[i] > 0.0 {
                assert!(traj.u[i] < traj.u[i - 1]);
            }
            if traj.v[i] > 0.0 {
                assert!(traj.v[i] < traj.v[i - 1]);
            }
        }
        for i in 0..n {
            if traj.u[i] > 0.0 && traj.v[i] > 0.0 {
                assert!(traj.w_u[i] <= 0.0 && traj.w_v[i] <= 0.0);
            }
        }
    }

    #[test]
    fn system_examples() {
        let e = Exponents::new(2.0, 2.0, 1.0, 1.0).unwrap();
        let dom = RadialDomain::model(1, 0.0, PI / 2.0).unwrap();
        let r = first_eigenpair_system(&e, &dom, 1e-9).unwrap();
        assert!((r.result.lambda - 1.0).abs() < 1e-5);
        let v = r.result.v.as_ref().unwrap();
        for (u, v) in r.result.u.iter().zip(v) {
            assert!((u - v).abs() < 1e-9);
        }

        let e = Exponents::new(3.0, 3.0, 2.0, 1.0).unwrap();
        let dom = RadialDomain::model(1, 0.0, 1.0).unwrap();
        let scalar = first_eigenvalue_scalar(3.0, &dom, 1e-9).unwrap().result.lambda;
        let r = first_eigenpair_system(&e, &dom, 1e-9).unwrap();
        assert_relative_eq!(r.result.lambda, scalar, max_relative = 1e-4);
        assert!((r.slope_ratio - 1.0).abs() < 1e-6);
    }

    #[test]
    fn zero_gap_decreases_in_slope_ratio() {
        let e = Exponents::new(2.0, 3.0, 1.0, 1.5).unwrap();
        let dom = RadialDomain::model(2, 0.0, 1.0).unwrap();
        let shooter = SystemShooter {
            e: &e,
            dom: &dom,
            control: StepControl::with_tolerance(1e-10),
            t_end: 4.0,
        };
        let gaps: Vec<f64> = [0.25, 0.5, 1.0, 2.0, 4.0]
            .iter()
            .map(|&s| {
                let t = shooter.trajectory(8.0, s).unwrap();
                t.zero_u - t.zero_v
            })
            .collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    }

    #[test]
    fn nested_bisection_agrees_with_newton() {
        let e = Exponents::new(2.0, 3.0, 1.0, 1.5).unwrap();
        let dom = RadialDomain::model(2, 0.0, 1.0).unwrap();
        let newton = first_eigenpair_system(&e, &dom, 1e-8).unwrap();
        let shooter = SystemShooter {
            e: &e,
            dom: &dom,
            control: StepControl::with_tolerance(1e-10),
            t_end: integration_limit(&dom, 4.0),
        };
        let (x, _) = shooter.nested_bisection(newton.result.lambda * 1.3, 1e-8).unwrap();
        assert_relative_eq!(x[0].exp(), newton.result.lambda, max_relative = 1e-6);
        assert_relative_eq!(x[1].exp(), newton.slope_ratio, max_relative = 1e-4);
    }

    #[test]
    fn unit_coupling_rescaling() {
        let e = Exponents::new(2.0, 3.0, 1.0, 1.5).unwrap();
        let dom = RadialDomain::model(2, 0.0, 1.0).unwrap();
        let r = first_eigenpair_system(&e, &dom, 1e-8).unwrap();
        let traj = integrate_radial_system(
            &e,
            r.result.lambda,
            r.slope_ratio,
            &dom,
            &StepControl::with_tolerance(1e-10),
        )
        .unwrap();
        let (a, b) = e.unit_coupling_scaling(traj.integrals[2]);
        assert_relative_eq!(a.powf(e.alpha) * b.powf(e.beta) * traj.integrals[2], 1.0, max_relative = 1e-12);
        assert_relative_eq!(a.powf(e.p - e.alpha), b.powf(e.beta), max_relative = 1e-12);
    }

    #[test]
    fn landscape_has_minimum_at_solution() {
        let e = Exponents::new(2.0, 3.0, 1.0, 1.5).unwrap();
        let dom = RadialDomain::model(2, 0.0, 1.0).unwrap();
        let r = first_eigenpair_system(&e, &dom, 1e-8).unwrap();
        let land = residual_landscape(&e, &dom, r.result.lambda, r.slope_ratio, 1e-2, 1e-8).unwrap();
        let center = land[1][1];
        for (i, row) in land.iter().enumerate() {
            for (j, &val) in row.iter().enumerate() {
                if (i, j) != (1, 1) {
                    assert!(val > center);
                }
            }
        }
    }
}
