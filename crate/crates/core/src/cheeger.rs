//! Cheeger constants of geodesic balls and planar grid domains, and the
//! eigenvalue lower bounds built from them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::Exponents;
use crate::error::{Error, Result};
use crate::geometry::{unit_sphere_area, RadialDomain};
use crate::grid::{Grid, GridKind};
use crate::variational::{minimize_scalar_from, dirichlet_seed, MinimizeOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheegerMethod {
    /// Minimum over concentric balls.
    RadialScan,
    /// Minimum over level sets of a near-1-Laplacian minimizer.
    LevelSets,
}

/// One rung of the `p = 1 + δ` ladder used by the level-set estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderPoint {
    pub delta: f64,
    pub h: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheegerEstimate {
    pub h: f64,
    pub method: CheegerMethod,
    /// Minimizing radius for radial scans, level for level sets.
    pub witness: f64,
    /// Volume of the minimizing set.
    pub witness_volume: f64,
    /// Resolution of the scan in the witness variable.
    pub tolerance: f64,
    /// False when only an upper bound on the constant is guaranteed.
    pub exact: bool,
    pub ladder: Vec<LadderPoint>,
}

const RADIAL_SCAN_POINTS: usize = 512;
const GOLDEN_ITERATIONS: usize = 100;

/// Boundary area over volume of the concentric ball of radius `r`.
fn ball_ratio(dom: &RadialDomain, r: f64) -> f64 {
    let m = &dom.manifold;
    unit_sphere_area(m.dim() - 1) * m.density_unchecked(r) / m.shell_volume_unchecked(0.0, r)
}

/// Cheeger constant of a geodesic ball restricted to concentric balls. On
/// space-form balls this is the true constant; otherwise it is labeled as an
/// upper bound.
pub fn cheeger_radial(dom: &RadialDomain) -> CheegerEstimate {
    let r0 = dom.r0;
    let step = r0 / RADIAL_SCAN_POINTS as f64;
    let mut best = (r0, ball_ratio(dom, r0));
    for i in 1..RADIAL_SCAN_POINTS {
        let r = i as f64 * step;
        let q = ball_ratio(dom, r);
        if q < best.1 {
            best = (r, q);
        }
    }
    // Golden-section refinement around the best scan point.
    let (mut a, mut b) = ((best.0 - step).max(1e-3 * step), (best.0 + step).min(r0));
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (ball_ratio(dom, c), ball_ratio(dom, d));
    for _ in 0..GOLDEN_ITERATIONS {
        if b - a <= 1e-12 * r0 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = ball_ratio(dom, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = ball_ratio(dom, d);
        }
    }
    for (r, q) in [(c, fc), (d, fd)] {
        if q < best.1 {
            best = (r, q);
        }
    }
    CheegerEstimate {
        h: best.1,
        method: CheegerMethod::RadialScan,
        witness: best.0,
        witness_volume: dom.manifold.shell_volume_unchecked(0.0, best.0),
        tolerance: step,
        exact: dom.manifold.model_curvature().is_some(),
        ladder: Vec::new(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheegerOptions {
    /// `p = 1 + δ` for the final estimate.
    pub delta: f64,
    /// Larger `δ` values solved first (each warm-starting the next) and reported.
    pub ladder: Vec<f64>,
    pub thresholds: usize,
    pub minimize: MinimizeOptions,
}

impl Default for CheegerOptions {
    fn default() -> Self {
        Self {
            delta: 0.05,
            ladder: vec![0.2, 0.1],
            thresholds: 256,
            minimize: MinimizeOptions::default(),
        }
    }
}

/// Area of `{u > t}` and length of `{u = t}` inside one triangle, treating
/// `u` as linear.
fn triangle_level(p: [(f64, f64); 3], v: [f64; 3], t: f64) -> (f64, f64) {
    let area = 0.5 * ((p[1].0 - p[0].0) * (p[2].1 - p[0].1) - (p[2].0 - p[0].0) * (p[1].1 - p[0].1)).abs();
    let above: Vec<usize> = (0..3).filter(|&i| v[i] > t).collect();
    let lone = match above.len() {
        0 => return (0.0, 0.0),
        3 => return (area, 0.0),
        1 => above[0],
        _ => (0..3).find(|i| !above.contains(i)).unwrap(),
    };
    let (j, k) = ((lone + 1) % 3, (lone + 2) % 3);
    let sj = (v[lone] - t) / (v[lone] - v[j]);
    let sk = (v[lone] - t) / (v[lone] - v[k]);
    let pj = (p[lone].0 + sj * (p[j].0 - p[lone].0), p[lone].1 + sj * (p[j].1 - p[lone].1));
    let pk = (p[lone].0 + sk * (p[k].0 - p[lone].0), p[lone].1 + sk * (p[k].1 - p[lone].1));
    let length = ((pj.0 - pk.0).powi(2) + (pj.1 - pk.1).powi(2)).sqrt();
    let corner = sj * sk * area;
    if above.len() == 1 {
        (corner, length)
    } else {
        (area - corner, length)
    }
}

/// Perimeter and area of `{u > t}`, with `u` linear on the four triangles
/// that split each cell through its center.
pub fn level_set_measure(g: &Grid, u: &[f64], t: f64) -> (f64, f64) {
    let (nx, ny) = g.shape();
    let (hx, hy) = g.spacing();
    let mut perimeter = 0.0;
    let mut area = 0.0;
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let ids = [g.index(i, j), g.index(i + 1, j), g.index(i + 1, j + 1), g.index(i, j + 1)];
            let vals = ids.map(|k| u[k]);
            if vals.iter().all(|v| *v <= t) {
                continue;
            }
            let pts = [(0.0, 0.0), (hx, 0.0), (hx, hy), (0.0, hy)];
            if vals.iter().all(|v| *v > t) {
                area += hx * hy;
                continue;
            }
            let center = (0.5 * hx, 0.5 * hy);
            let vc = 0.25 * vals.iter().sum::<f64>();
            for s in 0..4 {
                let n = (s + 1) % 4;
                let (a, l) = triangle_level([pts[s], pts[n], center], [vals[s], vals[n], vc], t);
                area += a;
                perimeter += l;
            }
        }
    }
    (perimeter, area)
}

/// Minimum of perimeter over area across `count` levels spanning `(0, max u)`.
fn scan_levels(g: &Grid, u: &[f64], count: usize) -> (f64, f64, f64) {
    let top = u.iter().fold(0.0f64, |m, v| m.max(*v));
    (1..=count)
        .into_par_iter()
        .map(|k| {
            let t = top * k as f64 / (count + 1) as f64;
            let (per, area) = level_set_measure(g, u, t);
            let ratio = if area > 0.0 { per / area } else { f64::INFINITY };
            (ratio, t, area)
        })
        .reduce(
            || (f64::INFINITY, 0.0, 0.0),
            |a, b| if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
        )
}

/// Level-set estimate of the Cheeger constant of a planar grid domain.
pub fn cheeger_grid_2d(g: &Grid, opts: &CheegerOptions) -> Result<CheegerEstimate> {
    if g.kind() != GridKind::Cartesian2d {
        return Err(Error::InvalidParameter("level-set estimation needs a planar grid".into()));
    }
    if !(opts.delta > 0.0) || opts.thresholds == 0 {
        return Err(Error::InvalidParameter("delta and threshold count must be positive".into()));
    }
    let mut deltas: Vec<f64> = opts.ladder.iter().copied().filter(|d| *d > opts.delta).collect();
    deltas.sort_by(|a, b| b.total_cmp(a));
    deltas.push(opts.delta);
    let mut u = dirichlet_seed(g);
    let mut ladder = Vec::with_capacity(deltas.len());
    let mut last = (f64::INFINITY, 0.0, 0.0);
    for delta in deltas {
        let r = minimize_scalar_from(1.0 + delta, g, u, &opts.minimize)?;
        u = r.u;
        last = scan_levels(g, &u, opts.thresholds);
        ladder.push(LadderPoint { delta, h: last.0, threshold: last.1 });
    }
    let top = u.iter().fold(0.0f64, |m, v| m.max(*v));
    Ok(CheegerEstimate {
        h: last.0,
        method: CheegerMethod::LevelSets,
        witness: last.1,
        witness_volume: last.2,
        tolerance: top / (opts.thresholds + 1) as f64,
        exact: false,
        ladder,
    })
}

/// `(h/p)^p`.
pub fn cheeger_bound_scalar(h: f64, p: f64) -> f64 {
    (h / p).powf(p)
}

/// `(α/p)(h/p)^p ‖u‖_p^p + (β/q)(h/q)^q ‖v‖_q^q`.
pub fn cheeger_bound_system(h: f64, e: &Exponents, norm_u: f64, norm_v: f64) -> f64 {
    e.alpha / e.p * cheeger_bound_scalar(h, e.p) * norm_u.powf(e.p)
        + e.beta / e.q * cheeger_bound_scalar(h, e.q) * norm_v.powf(e.q)
}
