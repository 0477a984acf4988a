//! Symmetric decreasing rearrangement of grid functions onto radial grids,
//! and numerical checks of the inequalities it satisfies.
//!
//! The rearranged profile is the inverse of the distribution function of the
//! piecewise-linear interpolant of the grid values: linear on radial edges,
//! and on the four triangles that split each planar cell through its center.
//! That distribution is computed exactly on a ladder of uniform levels and
//! node-value quantiles, then inverted by linear interpolation; the target
//! profile is read off at the ball volume of each target radius.
//!
//! Distributions built from lumped node weights alone are step functions
//! whose jumps follow lattice-point counts on level curves. Their inverse is
//! too rough to carry a convergent gradient energy, hence the interpolant.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::RadialManifold;
use crate::grid::{radial_grid, Grid, GridKind};

/// Relative mismatch allowed between source and target volumes.
pub const VOLUME_MATCH_TOL: f64 = 1e-3;

fn check_nonnegative(f: &[f64]) -> Result<()> {
    if let Some(i) = f.iter().position(|x| !(*x >= 0.0)) {
        return Err(Error::InvalidParameter(format!("profile must be nonnegative, node {i} holds {}", f[i])));
    }
    Ok(())
}

/// `Vol{f > t}`.
pub fn distribution_function(f: &[f64], g: &Grid, t: f64) -> Result<f64> {
    g.check_len(f)?;
    check_nonnegative(f)?;
    Ok(f.iter().zip(g.weights()).filter(|(x, _)| **x > t).map(|(_, w)| w).sum())
}

/// Distinct values of `f` in decreasing order with `Vol{f > t}` at each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelProfile {
    pub thresholds: Vec<f64>,
    pub volumes: Vec<f64>,
}

pub fn level_profile(f: &[f64], g: &Grid) -> Result<LevelProfile> {
    g.check_len(f)?;
    check_nonnegative(f)?;
    let order = sorted_order(f);
    let mut thresholds = Vec::new();
    let mut volumes = Vec::new();
    let mut acc = 0.0;
    let mut k = 0;
    while k < order.len() {
        let t = f[order[k]];
        thresholds.push(t);
        volumes.push(acc);
        while k < order.len() && f[order[k]] == t {
            acc += g.weights()[order[k]];
            k += 1;
        }
    }
    Ok(LevelProfile { thresholds, volumes })
}

fn sorted_order(f: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..f.len()).collect();
    order.sort_by(|&a, &b| f[b].total_cmp(&f[a]).then(a.cmp(&b)));
    order
}

/// Flat ball in the plane (or the radial manifold of a radial source) whose
/// volume equals the discrete volume of `g`, discretized with `resolution`
/// radial nodes.
pub fn matching_ball(g: &Grid, resolution: usize) -> Result<Grid> {
    let target_volume = g.weight_sum();
    match (g.kind(), g.manifold()) {
        (GridKind::Radial1d, Some(m)) => {
            let r = radius_for_volume(m, target_volume)?;
            radial_grid(m, 0.0, r, resolution)
        }
        _ => {
            let m = RadialManifold::model(2, 0.0)?;
            radial_grid(&m, 0.0, (target_volume / std::f64::consts::PI).sqrt(), resolution)
        }
    }
}

/// Radius of the ball of volume `volume` in `m`, by bisection.
pub fn radius_for_volume(m: &RadialManifold, volume: f64) -> Result<f64> {
    let mut hi = if m.r_max().is_finite() { m.r_max() } else { 1.0 };
    if m.r_max().is_infinite() {
        while m.ball_volume(hi)? < volume {
            hi *= 2.0;
        }
    } else if m.ball_volume(hi)? < volume {
        return Err(Error::Domain(format!("no ball of volume {volume} fits in the manifold")));
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if m.ball_volume(mid)? < volume {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Number of levels on which the interpolant's distribution is tabulated.
const LEVELS: usize = 4096;

/// A simplex of the piecewise-linear interpolant: its measure and the values
/// at its vertices (two for radial edges, three for triangles).
enum Piece {
    Segment(f64, [f64; 2]),
    Triangle(f64, [f64; 3]),
}

fn pieces(f: &[f64], g: &Grid) -> Vec<Piece> {
    match g.kind() {
        GridKind::Radial1d => g
            .elements()
            .iter()
            .map(|e| Piece::Segment(e.weight, [f[e.x.0], f[e.x.1]]))
            .collect(),
        GridKind::Cartesian2d => {
            let (nx, ny) = g.shape();
            let (hx, hy) = g.spacing();
            let quarter = 0.25 * hx * hy;
            let mut out = Vec::with_capacity(4 * nx * ny);
            for j in 0..ny - 1 {
                for i in 0..nx - 1 {
                    let v = [g.index(i, j), g.index(i + 1, j), g.index(i + 1, j + 1), g.index(i, j + 1)].map(|k| f[k]);
                    if v.iter().all(|x| *x == 0.0) {
                        continue;
                    }
                    let c = 0.25 * (v[0] + v[1] + v[2] + v[3]);
                    for s in 0..4 {
                        out.push(Piece::Triangle(quarter, [v[s], v[(s + 1) % 4], c]));
                    }
                }
            }
            out
        }
    }
}

/// Values on which some piece of the interpolant is constant.
fn plateau_values(f: &[f64], g: &Grid) -> Vec<f64> {
    let mut out: Vec<f64> = pieces(f, g)
        .into_iter()
        .filter_map(|p| match p {
            Piece::Segment(_, [a, b]) if a == b => Some(a),
            Piece::Triangle(_, [a, b, c]) if a == b && b == c => Some(a),
            _ => None,
        })
        .collect();
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// `Vol{f_I > t}` for each of the ascending `levels`, where `f_I` is the
/// piecewise-linear interpolant of `f` on `g`.
pub fn interpolant_distribution(f: &[f64], g: &Grid, levels: &[f64]) -> Result<Vec<f64>> {
    g.check_len(f)?;
    check_nonnegative(f)?;
    if levels.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::InvalidParameter("levels must ascend".into()));
    }
    let n = levels.len();
    let mut out = vec![0.0; n];
    // Pieces lying wholly above a level contribute through a running sum.
    let mut full = vec![0.0; n + 1];
    let first_at_least = |x: f64| levels.partition_point(|t| *t < x);
    for piece in pieces(f, g) {
        match piece {
            Piece::Segment(w, v) => {
                let (a, c) = (v[0].min(v[1]), v[0].max(v[1]));
                let ka = first_at_least(a);
                full[ka] += w;
                for k in ka..first_at_least(c) {
                    out[k] += w * (c - levels[k]) / (c - a);
                }
            }
            Piece::Triangle(area, mut v) => {
                v.sort_by(f64::total_cmp);
                let [a, b, c] = v;
                let ka = first_at_least(a);
                full[ka] += area;
                for k in ka..first_at_least(c) {
                    let t = levels[k];
                    out[k] += if t < b {
                        area - area * (t - a).powi(2) / ((b - a) * (c - a))
                    } else {
                        area * (c - t).powi(2) / ((c - a) * (c - b))
                    };
                }
            }
        }
    }
    // full[k] holds pieces whose minimum lies in (levels[k-1], levels[k]];
    // every level below that minimum sees the piece in full.
    let mut acc = 0.0;
    for k in (0..n).rev() {
        acc += full[k + 1];
        out[k] += acc;
    }
    Ok(out)
}

/// Rearranges `f` on `g` onto the radial ball grid `target`.
pub fn rearrange(f: &[f64], g: &Grid, target: &Grid) -> Result<Vec<f64>> {
    g.check_len(f)?;
    check_nonnegative(f)?;
    let manifold = match (target.kind(), target.manifold()) {
        (GridKind::Radial1d, Some(m)) if target.radii()[0] == 0.0 => m,
        _ => return Err(Error::InvalidParameter("target must be a radial ball grid".into())),
    };
    let source_volume = g.weight_sum();
    let target_volume = target.weight_sum();
    if (source_volume - target_volume).abs() > VOLUME_MATCH_TOL * source_volume {
        return Err(Error::InvalidParameter(format!(
            "target volume {target_volume} does not match source volume {source_volume}"
        )));
    }
    let top = f.iter().fold(0.0f64, |m, x| m.max(*x));
    if top == 0.0 {
        return Ok(vec![0.0; target.len()]);
    }
    let mut levels: Vec<f64> = (0..=LEVELS).map(|k| top * k as f64 / LEVELS as f64).collect();
    // Quantiles of the node values resolve levels crowded near zero, where
    // uniform levels alone would interpolate across most of the volume.
    let mut sorted: Vec<f64> = f.iter().copied().filter(|x| *x > 0.0).collect();
    sorted.sort_by(f64::total_cmp);
    let stride = sorted.len().div_ceil(LEVELS).max(1);
    levels.extend(sorted.iter().step_by(stride));
    // Plateaus of the interpolant make the distribution jump; bracketing each
    // plateau value keeps the inverse flat there.
    for c in plateau_values(f, g) {
        levels.push(c);
        levels.push((c - 1e-12 * top).max(0.0));
    }
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let dist = interpolant_distribution(f, g, &levels)?;
    let radii = target.radii();
    let mut out: Vec<f64> = radii
        .iter()
        .map(|&r| {
            let v = if r == 0.0 { 0.0 } else { manifold.shell_volume_unchecked(0.0, r) };
            // Target volumes are rescaled onto the source measure.
            invert(&levels, &dist, v * source_volume / target_volume)
        })
        .collect();
    target.apply_mask(&mut out);
    Ok(out)
}

/// The level at which the nonincreasing tabulated distribution reaches `v`.
fn invert(levels: &[f64], dist: &[f64], v: f64) -> f64 {
    if v >= dist[0] {
        return 0.0;
    }
    // First level whose distribution is at most v.
    let k = dist.partition_point(|d| *d > v);
    if k == 0 {
        return levels[0];
    }
    let (d0, d1) = (dist[k - 1], dist[k]);
    if d0 == d1 {
        return levels[k];
    }
    levels[k - 1] + (levels[k] - levels[k - 1]) * (d0 - v) / (d0 - d1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

impl InequalityCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.margin >= -tol
    }
}

/// `∫|df|^p` on the source against `∫|df*|^p` on the target;
/// `margin = lhs - rhs`.
pub fn check_polya_szego(f: &[f64], p: f64, g: &Grid, target: &Grid) -> Result<InequalityCheck> {
    let star = rearrange(f, g, target)?;
    let lhs = g.energy(f, p);
    let rhs = target.energy(&star, p);
    Ok(InequalityCheck { lhs, rhs, margin: lhs - rhs })
}

/// `∫ f h` on the source against `∫ f* h*` on the target;
/// `margin = rhs - lhs`.
pub fn check_hardy_littlewood(f: &[f64], h: &[f64], g: &Grid, target: &Grid) -> Result<InequalityCheck> {
    g.check_len(h)?;
    let fs = rearrange(f, g, target)?;
    let hs = rearrange(h, g, target)?;
    let lhs = f.iter().zip(h).zip(g.weights()).map(|((a, b), w)| a * b * w).sum();
    let rhs = fs.iter().zip(&hs).zip(target.weights()).map(|((a, b), w)| a * b * w).sum();
    Ok(InequalityCheck { lhs, rhs, margin: rhs - lhs })
}

/// Center and inradius of the free part of a planar grid.
fn free_box(g: &Grid) -> ((f64, f64), f64) {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for i in (0..g.len()).filter(|&i| !g.mask()[i]) {
        let (x, y) = g.coord(i);
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let (hx, hy) = g.spacing();
    let center = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
    let radius = (0.5 * (x1 - x0) + hx).min(0.5 * (y1 - y0) + hy);
    (center, radius)
}

/// The twenty radial nonincreasing calibration profiles, centered in the
/// free part of `g`.
pub fn calibration_profiles(g: &Grid) -> Vec<Vec<f64>> {
    let (c, inradius) = if g.kind() == GridKind::Radial1d {
        ((0.0, 0.0), g.radii()[g.len() - 1])
    } else {
        free_box(g)
    };
    let shapes: [fn(f64) -> f64; 5] = [
        |s| 1.0 - s * s,
        |s| (1.0 - s * s).powi(2),
        |s| (1.0 - s * s).powi(3),
        |s| (0.5 * std::f64::consts::PI * s).cos().powi(2),
        |s| ((-4.0 * s * s).exp() - (-4.0f64).exp()) / (1.0 - (-4.0f64).exp()),
    ];
    let mut out = Vec::with_capacity(20);
    for frac in [0.4, 0.6, 0.8, 1.0] {
        let radius = frac * inradius;
        for shape in shapes {
            out.push(g.sample(|x, y| {
                let r = if g.kind() == GridKind::Radial1d {
                    x
                } else {
                    ((x - c.0).powi(2) + (y - c.1).powi(2)).sqrt()
                };
                let s = r / radius;
                if s < 1.0 {
                    shape(s)
                } else {
                    0.0
                }
            }));
        }
    }
    out
}

/// Measured discretization scale of the Pólya–Szegő check: three times the
/// largest `|margin|` over radial profiles, whose exact margin is zero.
pub fn calibrate_polya_szego(g: &Grid, target: &Grid, p: f64) -> Result<f64> {
    let mut worst = 0.0f64;
    for f in calibration_profiles(g) {
        worst = worst.max(check_polya_szego(&f, p, g, target)?.margin.abs());
    }
    Ok(3.0 * worst)
}

/// As [`calibrate_polya_szego`] for the Hardy–Littlewood check, on
/// consecutive pairs of calibration profiles.
pub fn calibrate_hardy_littlewood(g: &Grid, target: &Grid) -> Result<f64> {
    let profiles = calibration_profiles(g);
    let mut worst = 0.0f64;
    for i in 0..profiles.len() {
        let j = (i + 1) % profiles.len();
        worst = worst.max(check_hardy_littlewood(&profiles[i], &profiles[j], g, target)?.margin.abs());
    }
    Ok(3.0 * worst)
}

/// Random positive combination of smooth bumps, vanishing on the edge of the
/// free bounding box of `g`.
pub fn random_bumps(g: &Grid, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let (c, radius) = free_box(g);
    let (x0, x1, y0, y1) = (c.0 - radius, c.0 + radius, c.1 - radius, c.1 + radius);
    let count = rng.gen_range(1..=4);
    let bumps: Vec<(f64, f64, f64, f64)> = (0..count)
        .map(|_| {
            (
                rng.gen_range(x0..x1),
                rng.gen_range(y0..y1),
                rng.gen_range(0.05..0.5) * radius,
                rng.gen_range(0.2..1.0),
            )
        })
        .collect();
    let mut f = g.sample(|x, y| {
        let cutoff = ((x - x0) * (x1 - x) * (y - y0) * (y1 - y)).max(0.0) / radius.powi(4);
        let sum: f64 = bumps
            .iter()
            .map(|(bx, by, w, a)| a * (-((x - bx).powi(2) + (y - by).powi(2)) / (w * w)).exp())
            .sum();
        cutoff * sum
    });
    f.iter_mut().for_each(|x| *x = x.max(0.0));
    f
}

/// Generator for trial `trial` of a campaign seeded with `seed`; each trial
/// owns its own ChaCha stream so trials are reproducible in any order.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub trial: u64,
    pub p: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

/// Pólya–Szegő checks on `trials` random profiles for each exponent.
pub fn polya_szego_campaign(g: &Grid, target: &Grid, exponents: &[f64], trials: u64, seed: u64) -> Result<Vec<TrialRecord>> {
    (0..trials)
        .into_par_iter()
        .map(|trial| {
            let f = random_bumps(g, &mut trial_rng(seed, trial));
            exponents
                .iter()
                .map(|&p| {
                    let c = check_polya_szego(&f, p, g, target)?;
                    Ok(TrialRecord { seed, trial, p, lhs: c.lhs, rhs: c.rhs, margin: c.margin })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()
        .map(|v| v.into_iter().flatten().collect())
}

/// Hardy–Littlewood checks on `trials` random pairs. `p` is recorded as 0.
pub fn hardy_littlewood_campaign(g: &Grid, target: &Grid, trials: u64, seed: u64) -> Result<Vec<TrialRecord>> {
    (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial);
            let f = random_bumps(g, &mut rng);
            let h = random_bumps(g, &mut rng);
            let c = check_hardy_littlewood(&f, &h, g, target)?;
            Ok(TrialRecord { seed, trial, p: 0.0, lhs: c.lhs, rhs: c.rhs, margin: c.margin })
        })
        .collect()
}

pub fn write_campaign_csv<W: Write>(out: W, records: &[TrialRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["seed", "trial", "p", "lhs", "rhs", "margin"])?;
    for r in records {
        w.write_record([
            r.seed.to_string(),
            r.trial.to_string(),
            format!("{}", r.p),
            format!("{:.12e}", r.lhs),
            format!("{:.12e}", r.rhs),
            format!("{:.12e}", r.margin),
        ])?;
    }
    w.flush()?;
    Ok(())
}
