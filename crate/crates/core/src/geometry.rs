//! Rotationally symmetric model geometry.
//!
//! Everything here is expressed through a warp function `f(t)` along the
//! geodesic radius: the volume density in geodesic polar coordinates is
//! `Θ(t) = f(t)^(N-1)` and geodesic spheres have area `ω_{N-1} Θ(t)`. The
//! space forms use `f = sn_k`; other warped manifolds are supplied as
//! sampled tables.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The generalized sine `sn_k(t)`, the warp of the curvature-`k` space form.
pub fn sn(k: f64, t: f64) -> Result<f64> {
    check_model_radius(k, t)?;
    Ok(sn_unchecked(k, t))
}

/// Derivative of [`sn`] with respect to `t`.
pub fn cn(k: f64, t: f64) -> Result<f64> {
    check_model_radius(k, t)?;
    Ok(cn_unchecked(k, t))
}

pub(crate) fn sn_unchecked(k: f64, t: f64) -> f64 {
    if k > 0.0 {
        let s = k.sqrt();
        (s * t).sin() / s
    } else if k < 0.0 {
        let s = (-k).sqrt();
        (s * t).sinh() / s
    } else {
        t
    }
}

pub(crate) fn cn_unchecked(k: f64, t: f64) -> f64 {
    if k > 0.0 {
        (k.sqrt() * t).cos()
    } else if k < 0.0 {
        ((-k).sqrt() * t).cosh()
    } else {
        1.0
    }
}

fn check_model_radius(k: f64, t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::Domain(format!("radius must be finite and >= 0, got {t}")));
    }
    if k > 0.0 && t > PI / k.sqrt() {
        return Err(Error::Domain(format!(
            "radius {t} exceeds the injectivity bound pi/sqrt(k) = {} for k = {k}",
            PI / k.sqrt()
        )));
    }
    Ok(())
}

/// Area of the unit `n`-sphere in `R^(n+1)`; `ω_0 = 2` counts the two
/// endpoints of an interval.
pub fn unit_sphere_area(n: usize) -> f64 {
    match n {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (n as f64 - 1.0) * unit_sphere_area(n - 2),
    }
}

/// Simpson's rule with Richardson doubling, stopping once successive
/// extrapolated values agree to `rel_tol`.
pub(crate) fn integrate_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let simpson = |n: usize| {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    };
    let mut n = 8;
    let mut coarse = simpson(n);
    let mut prev = f64::NAN;
    loop {
        n *= 2;
        let fine = simpson(n);
        let extrapolated = fine + (fine - coarse) / 15.0;
        if (extrapolated - prev).abs() <= rel_tol * extrapolated.abs() || n >= 1 << 22 {
            return extrapolated;
        }
        prev = extrapolated;
        coarse = fine;
    }
}

/// Relative tolerance for volume quadratures.
pub const VOLUME_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceForm {
    pub dim: usize,
    pub curvature: f64,
}

impl SpaceForm {
    pub fn new(dim: usize, curvature: f64) -> Result<Self> {
        if dim < 1 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        if !curvature.is_finite() {
            return Err(Error::InvalidParameter("curvature must be finite".into()));
        }
        Ok(Self { dim, curvature })
    }

    /// Largest admissible geodesic radius (`π/√k` on spheres).
    pub fn max_radius(&self) -> f64 {
        if self.curvature > 0.0 {
            PI / self.curvature.sqrt()
        } else {
            f64::INFINITY
        }
    }
}

/// Volume of the geodesic ball of radius `r` in the space form `s`.
pub fn ball_volume(s: &SpaceForm, r: f64) -> Result<f64> {
    check_model_radius(s.curvature, r)?;
    let k = s.curvature;
    let n = s.dim;
    let integral = integrate_simpson(
        |t| sn_unchecked(k, t).powi(n as i32 - 1),
        0.0,
        r,
        VOLUME_REL_TOL,
    );
    Ok(unit_sphere_area(n - 1) * integral)
}

/// Natural cubic spline of `g(t) = f(t)/t` on a uniform table over `[0, r_max]`.
///
/// Interpolating the ratio instead of `f` keeps the relative accuracy of the
/// warp uniform down to `t → 0`, where `f(t) ~ t`.
#[derive(Debug, Clone)]
pub struct WarpTable {
    step: f64,
    values: Vec<f64>,
    second: Vec<f64>,
}

impl WarpTable {
    fn from_fn<F: Fn(f64) -> f64>(f: F, r_max: f64, samples: usize) -> Result<Self> {
        let n = samples.max(16);
        let step = r_max / (n - 1) as f64;
        let mut values = Vec::with_capacity(n);
        values.push(1.0);
        for i in 1..n {
            let t = i as f64 * step;
            let ft = f(t);
            if !(ft.is_finite() && (ft > 0.0 || i == n - 1 && ft >= 0.0)) {
                return Err(Error::InvalidParameter(format!(
                    "warp must be positive on (0, r_max); f({t}) = {ft}"
                )));
            }
            values.push(ft / t);
        }
        let small = 1e-6 * r_max;
        let ratio = f(small) / small;
        if (ratio - 1.0).abs() > 1e-3 {
            return Err(Error::InvalidParameter(format!(
                "warp must satisfy f(t)/t -> 1 as t -> 0; f(t)/t = {ratio} at t = {small}"
            )));
        }
        let second = natural_spline_second_derivatives(&values, step);
        Ok(Self { step, values, second })
    }

    /// Returns `(g, g')` at `t`.
    fn eval(&self, t: f64) -> (f64, f64) {
        let n = self.values.len();
        let h = self.step;
        let i = ((t / h).floor() as usize).min(n - 2);
        let a = (i as f64 + 1.0) * h - t;
        let b = t - i as f64 * h;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.second[i], self.second[i + 1]);
        let g = (m0 * a * a * a + m1 * b * b * b) / (6.0 * h)
            + (y0 / h - m0 * h / 6.0) * a
            + (y1 / h - m1 * h / 6.0) * b;
        let dg = (-m0 * a * a + m1 * b * b) / (2.0 * h) + (y1 - y0) / h - (m1 - m0) * h / 6.0;
        (g, dg)
    }
}

fn natural_spline_second_derivatives(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    // Tridiagonal system (h/6, 2h/3, h/6) m = second differences / h, Thomas algorithm.
    let mut c_prime = vec![0.0; n];
    let mut d_prime = vec![0.0; n];
    for i in 1..n - 1 {
        let rhs = (y[i + 1] - 2.0 * y[i] + y[i - 1]) / h;
        let (a, b, c) = (h / 6.0, 2.0 * h / 3.0, h / 6.0);
        let denom = b - a * c_prime[i - 1];
        c_prime[i] = c / denom;
        d_prime[i] = (rhs - a * d_prime[i - 1]) / denom;
    }
    for i in (1..n - 1).rev() {
        m[i] = d_prime[i] - c_prime[i] * m[i + 1];
    }
    m
}

#[derive(Debug, Clone)]
pub enum Warp {
    /// `sn_k` for the given curvature.
    Model(f64),
    Table(Arc<WarpTable>),
}

/// A rotationally symmetric manifold of dimension `dim`, valid for geodesic
/// radii in `(0, r_max]`.
#[derive(Debug, Clone)]
pub struct RadialManifold {
    dim: usize,
    warp: Warp,
    r_max: f64,
}

impl RadialManifold {
    pub fn space_form(s: SpaceForm) -> Self {
        Self {
            dim: s.dim,
            warp: Warp::Model(s.curvature),
            r_max: s.max_radius(),
        }
    }

    pub fn model(dim: usize, curvature: f64) -> Result<Self> {
        Ok(Self::space_form(SpaceForm::new(dim, curvature)?))
    }

    /// Samples a user warp onto a dense spline table over `[0, r_max]`.
    pub fn from_warp_fn<F: Fn(f64) -> f64>(dim: usize, f: F, r_max: f64, samples: usize) -> Result<Self> {
        if dim < 1 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(Error::InvalidParameter(format!("r_max must be finite and > 0, got {r_max}")));
        }
        let table = WarpTable::from_fn(f, r_max, samples)?;
        Ok(Self {
            dim,
            warp: Warp::Table(Arc::new(table)),
            r_max,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// Curvature when this is a space form.
    pub fn model_curvature(&self) -> Option<f64> {
        match self.warp {
            Warp::Model(k) => Some(k),
            Warp::Table(_) => None,
        }
    }

    fn check(&self, t: f64) -> Result<()> {
        if !(t > 0.0 && t <= self.r_max) {
            return Err(Error::Domain(format!(
                "radius {t} outside (0, {}]",
                self.r_max
            )));
        }
        Ok(())
    }

    pub fn warp(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.warp_unchecked(t))
    }

    pub fn warp_derivative(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.warp_and_derivative(t).1)
    }

    /// Full volume weight `Θ(t) = f(t)^(N-1)`.
    pub fn density(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.density_unchecked(t))
    }

    /// `Θ'(t)/Θ(t) = (N-1) f'(t)/f(t)`, the mean curvature of the geodesic sphere.
    pub fn mean_curvature_coeff(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        if self.dim == 1 {
            return Ok(0.0);
        }
        let (f, df) = self.warp_and_derivative(t);
        Ok((self.dim as f64 - 1.0) * df / f)
    }

    pub(crate) fn warp_unchecked(&self, t: f64) -> f64 {
        match &self.warp {
            Warp::Model(k) => sn_unchecked(*k, t),
            Warp::Table(table) => t * table.eval(t).0,
        }
    }

    fn warp_and_derivative(&self, t: f64) -> (f64, f64) {
        match &self.warp {
            Warp::Model(k) => (sn_unchecked(*k, t), cn_unchecked(*k, t)),
            Warp::Table(table) => {
                let (g, dg) = table.eval(t);
                (t * g, g + t * dg)
            }
        }
    }

    pub(crate) fn density_unchecked(&self, t: f64) -> f64 {
        match self.dim {
            1 => 1.0,
            2 => self.warp_unchecked(t),
            n => self.warp_unchecked(t).powi(n as i32 - 1),
        }
    }

    /// Volume of the shell `a <= t <= b`.
    pub fn shell_volume(&self, a: f64, b: f64) -> Result<f64> {
        if !(0.0 <= a && a <= b && b <= self.r_max) {
            return Err(Error::Domain(format!("invalid shell [{a}, {b}]")));
        }
        Ok(self.shell_volume_unchecked(a, b))
    }

    pub(crate) fn shell_volume_unchecked(&self, a: f64, b: f64) -> f64 {
        unit_sphere_area(self.dim - 1)
            * integrate_simpson(|t| self.density_unchecked(t), a, b, VOLUME_REL_TOL)
    }

    pub fn ball_volume(&self, r: f64) -> Result<f64> {
        self.shell_volume(0.0, r)
    }

    /// Area of the geodesic sphere of radius `r`.
    pub fn sphere_area(&self, r: f64) -> Result<f64> {
        Ok(unit_sphere_area(self.dim - 1) * self.density(r)?)
    }
}

/// A geodesic ball `B(x0, r0)` in a radial manifold.
#[derive(Debug, Clone)]
pub struct RadialDomain {
    pub manifold: RadialManifold,
    pub r0: f64,
}

impl RadialDomain {
    pub fn new(manifold: RadialManifold, r0: f64) -> Result<Self> {
        let r_max = manifold.r_max();
        let strict = manifold.model_curvature().map_or(false, |k| k > 0.0);
        let ok = r0 > 0.0 && if strict { r0 < r_max } else { r0 <= r_max };
        if !ok {
            return Err(Error::Domain(format!("ball radius {r0} invalid for r_max = {r_max}")));
        }
        Ok(Self { manifold, r0 })
    }

    pub fn model(dim: usize, curvature: f64, r0: f64) -> Result<Self> {
        Self::new(RadialManifold::model(dim, curvature)?, r0)
    }

    pub fn dim(&self) -> usize {
        self.manifold.dim()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BishopCheck {
    pub monotone: bool,
    pub first_violation: Option<f64>,
}

/// Tests whether `Θ(t)/Θ_k(t)` is nonincreasing on `radii`, the density
/// comparison implied by `Ric >= (N-1)k`.
///
/// An increase between neighbouring radii counts as a violation only when it
/// exceeds `10 Δt · D`, where `D = |second difference| / Δt` measures how fast
/// the local slope varies, plus a rounding floor.
pub fn bishop_ratio_monotone(m: &RadialManifold, k: f64, radii: &[f64]) -> Result<BishopCheck> {
    let model_range = if k > 0.0 { PI / k.sqrt() } else { f64::INFINITY };
    let limit = m.r_max().min(model_range);
    if radii.len() < 3 {
        return Err(Error::InvalidParameter("need at least 3 radii".into()));
    }
    for w in radii.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::InvalidParameter("radii must be strictly increasing".into()));
        }
    }
    if !(radii[0] > 0.0 && radii[radii.len() - 1] < limit) {
        return Err(Error::Domain(format!("radii must lie inside (0, {limit})")));
    }
    let exponent = m.dim() as i32 - 1;
    let ratio: Vec<f64> = radii
        .iter()
        .map(|&t| Ok((m.warp(t)? / sn(k, t)?).powi(exponent)))
        .collect::<Result<_>>()?;
    let scale = ratio.iter().fold(0.0_f64, |acc, r| acc.max(r.abs()));
    let floor = 64.0 * f64::EPSILON * scale;
    let n = ratio.len();
    let second_diff = |i: usize| {
        let i = i.clamp(1, n - 2);
        (ratio[i + 1] - 2.0 * ratio[i] + ratio[i - 1]).abs()
    };
    for i in 0..n - 1 {
        let rise = ratio[i + 1] - ratio[i];
        let local = second_diff(i).max(second_diff(i + 1));
        let slack = 10.0 * local + floor;
        if rise > slack {
            return Ok(BishopCheck {
                monotone: false,
                first_violation: Some(radii[i + 1]),
            });
        }
    }
    Ok(BishopCheck {
        monotone: true,
        first_violation: None,
    })
}

/// Uniform radii strictly inside `(0, limit)`.
pub fn interior_radii(limit: f64, count: usize) -> Vec<f64> {
    (1..=count)
        .map(|i| limit * i as f64 / (count + 1) as f64)
        .collect()
}
