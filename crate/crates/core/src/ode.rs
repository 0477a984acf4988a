//! Dormand–Prince 5(4) integrator for small fixed-size systems, with
//! terminal event location.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Fifth minus fourth order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl StepControl {
    pub fn with_tolerance(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            max_steps: 200_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Solution<const D: usize> {
    pub ts: Vec<f64>,
    pub ys: Vec<[f64; D]>,
    /// Set when the event function changed sign; the last entry of `ts`/`ys`
    /// is then the located crossing.
    pub event: bool,
}

fn axpy<const D: usize>(y: &[f64; D], h: f64, terms: &[(f64, &[f64; D])]) -> [f64; D] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..D {
            out[i] += h * c * k[i];
        }
    }
    out
}

struct Step<const D: usize> {
    y: [f64; D],
    err: [f64; D],
    k7: [f64; D],
}

fn dp_step<const D: usize, F>(f: &mut F, t: f64, y: &[f64; D], k1: &[f64; D], h: f64) -> Step<D>
where
    F: FnMut(f64, &[f64; D]) -> [f64; D],
{
    let k2 = f(t + C2 * h, &axpy(y, h, &[(A21, k1)]));
    let k3 = f(t + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = f(t + C4 * h, &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(
        t + C5 * h,
        &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    );
    let k6 = f(
        t + h,
        &axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
    );
    let y_new = axpy(y, h, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = f(t + h, &y_new);
    let mut err = [0.0; D];
    for i in 0..D {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    Step { y: y_new, err, k7 }
}

/// Integrates `y' = f(t, y)` from `t0` to `t_end`, stopping early at the first
/// point where `event(y)` becomes `<= 0` (assumed `> 0` at the start).
///
/// Only the components listed in `controlled` enter the error norm; the rest
/// are carried along (running quadratures, for instance).
pub fn integrate<const D: usize, F, E>(
    mut f: F,
    t0: f64,
    y0: [f64; D],
    t_end: f64,
    control: &StepControl,
    controlled: usize,
    event: E,
) -> Result<Solution<D>>
where
    F: FnMut(f64, &[f64; D]) -> [f64; D],
    E: Fn(&[f64; D]) -> f64,
{
    let span = t_end - t0;
    if !(span > 0.0) {
        return Err(Error::InvalidParameter(format!("empty interval [{t0}, {t_end}]")));
    }
    let mut ts = vec![t0];
    let mut ys = vec![y0];
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut h = (0.1 * t0).max(1e-6 * span).min(0.01 * span);
    let h_min = 1e-14 * t_end.abs().max(1.0);
    let mut steps = 0;
    while t < t_end {
        steps += 1;
        if steps > control.max_steps {
            return Err(Error::NonConvergence {
                iterations: steps,
                detail: format!("integrator exceeded step budget at t = {t}"),
            });
        }
        if t + h > t_end {
            h = t_end - t;
        }
        let step = dp_step(&mut f, t, &y, &k1, h);
        let mut norm = 0.0;
        for i in 0..controlled {
            let scale = control.atol + control.rtol * y[i].abs().max(step.y[i].abs());
            let e = step.err[i] / scale;
            norm += e * e;
        }
        let norm = (norm / controlled as f64).sqrt();
        if !norm.is_finite() {
            h *= 0.25;
            if h < h_min {
                return Err(Error::NonConvergence {
                    iterations: steps,
                    detail: format!("non-finite state near t = {t}"),
                });
            }
            continue;
        }
        if norm <= 1.0 {
            if event(&step.y) <= 0.0 {
                let (tc, yc) = locate_event(&mut f, t, &y, &k1, h, &event);
                ts.push(tc);
                ys.push(yc);
                return Ok(Solution { ts, ys, event: true });
            }
            t = if t + h >= t_end { t_end } else { t + h };
            y = step.y;
            k1 = step.k7;
            ts.push(t);
            ys.push(y);
            let factor = if norm == 0.0 { 5.0 } else { (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0) };
            h *= factor;
        } else {
            h *= (0.9 * norm.powf(-0.2)).clamp(0.1, 0.9);
            if h < h_min {
                return Err(Error::NonConvergence {
                    iterations: steps,
                    detail: format!("step size underflow near t = {t}"),
                });
            }
        }
    }
    Ok(Solution { ts, ys, event: false })
}

/// Finds the crossing inside an accepted step by re-stepping from its start
/// with shorter lengths (Illinois-modified regula falsi on the step length).
fn locate_event<const D: usize, F, E>(
    f: &mut F,
    t: f64,
    y: &[f64; D],
    k1: &[f64; D],
    h: f64,
    event: &E,
) -> (f64, [f64; D])
where
    F: FnMut(f64, &[f64; D]) -> [f64; D],
    E: Fn(&[f64; D]) -> f64,
{
    let mut lo = 0.0;
    let mut g_lo = event(y);
    let mut hi = h;
    let mut y_hi = dp_step(f, t, y, k1, h).y;
    let mut g_hi = event(&y_hi);
    let mut side = 0;
    for _ in 0..200 {
        if hi - lo <= 4.0 * f64::EPSILON * (t + hi).abs() {
            break;
        }
        let mut mid = (lo * g_hi - hi * g_lo) / (g_hi - g_lo);
        if !(mid > lo && mid < hi) {
            mid = 0.5 * (lo + hi);
        }
        let y_mid = dp_step(f, t, y, k1, mid).y;
        let g_mid = event(&y_mid);
        if g_mid <= 0.0 {
            hi = mid;
            y_hi = y_mid;
            g_hi = g_mid;
            if side == -1 {
                g_lo *= 0.5;
            }
            side = -1;
        } else {
            lo = mid;
            g_lo = g_mid;
            if side == 1 {
                g_hi *= 0.5;
            }
            side = 1;
        }
        if g_mid == 0.0 {
            break;
        }
    }
    (t + hi, y_hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_event_at_quarter_period() {
        let control = StepControl::with_tolerance(1e-11);
        let sol = integrate(
            |_t, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            [1.0, 0.0],
            10.0,
            &control,
            2,
            |y| y[0],
        )
        .unwrap();
        assert!(sol.event);
        let t = *sol.ts.last().unwrap();
        assert!((t - std::f64::consts::FRAC_PI_2).abs() < 1e-9, "{t}");
    }

    #[test]
    fn exponential_growth_reaches_end() {
        let control = StepControl::with_tolerance(1e-10);
        let sol = integrate(|_t, y: &[f64; 1]| [y[0]], 0.0, [1.0], 1.0, &control, 1, |_| 1.0).unwrap();
        assert!(!sol.event);
        let y = sol.ys.last().unwrap()[0];
        assert!((y - std::f64::consts::E).abs() < 1e-8);
    }
}
