//! Vertex-centered discretizations of radial balls, annuli and planar domains.
//!
//! Every grid carries a lumped quadrature weight per node, a Dirichlet mask,
//! and a list of gradient elements. An element holds the finite-difference
//! gradient `(dx, dy)` of one sub-cell together with its quadrature weight, so
//! the discrete energy is `Σ_e w_e |g_e|^p`, convex in the node values.
//!
//! * Radial grids integrate the volume density exactly over dual cells and
//!   edges, so weights sum to the shell volume.
//! * Rectangles use trapezoid weights; their boundary ring is masked.
//! * Disks and bitmap masks use `h²` per included node.
//!
//! In 2D each cell contributes its four corner gradients at a quarter of the
//! cell area each. For `p = 2` this reproduces the 5-point stencil energy.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{unit_sphere_area, RadialManifold};

pub const MIN_RESOLUTION: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DomainSpec {
    /// Geodesic ball of radius `radius` in the space form of curvature `curvature`.
    RadialBall { dim: usize, curvature: f64, radius: f64 },
    /// Shell `inner <= t <= outer` in a space form, Dirichlet on both spheres.
    RadialAnnulus { dim: usize, curvature: f64, inner: f64, outer: f64 },
    Rectangle { width: f64, height: f64 },
    Disk { radius: f64 },
    /// Bitmap domain on `[0, width] × [0, height]`. `rows[j]` describes the
    /// nodes at height `j`, bottom row first; `#` marks an interior node.
    Mask { width: f64, height: f64, rows: Vec<String> },
}

impl DomainSpec {
    /// Nominal area or volume of the continuous domain.
    pub fn volume(&self) -> Result<f64> {
        Ok(match self {
            DomainSpec::RadialBall { dim, curvature, radius } => {
                RadialManifold::model(*dim, *curvature)?.ball_volume(*radius)?
            }
            DomainSpec::RadialAnnulus { dim, curvature, inner, outer } => {
                RadialManifold::model(*dim, *curvature)?.shell_volume(*inner, *outer)?
            }
            DomainSpec::Rectangle { width, height } => width * height,
            DomainSpec::Disk { radius } => std::f64::consts::PI * radius * radius,
            DomainSpec::Mask { .. } => {
                let g = build_grid(self, MIN_RESOLUTION)?;
                g.weight_sum()
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    Radial1d,
    Cartesian2d,
}

/// One sub-cell gradient: `dx = (u[x.0] - u[x.1]) * x.2`, likewise `dy`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Element {
    pub weight: f64,
    pub x: (usize, usize, f64),
    pub y: (usize, usize, f64),
}

impl Element {
    #[inline]
    pub fn gradient(&self, u: &[f64]) -> (f64, f64) {
        (
            (u[self.x.0] - u[self.x.1]) * self.x.2,
            (u[self.y.0] - u[self.y.1]) * self.y.2,
        )
    }
}

#[derive(Debug, Clone)]
pub struct Grid {
    kind: GridKind,
    shape: (usize, usize),
    spacing: (f64, f64),
    origin: (f64, f64),
    weights: Vec<f64>,
    mask: Vec<bool>,
    elements: Vec<Element>,
    volume: f64,
    /// Manifold of a radial grid, used to convert radii to ball volumes.
    manifold: Option<RadialManifold>,
}

impl Grid {
    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `(nx, ny)`; radial grids have `ny = 1`.
    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn spacing(&self) -> (f64, f64) {
        self.spacing
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.shape.0 + i
    }

    pub fn coord(&self, idx: usize) -> (f64, f64) {
        let (i, j) = (idx % self.shape.0, idx / self.shape.0);
        (
            self.origin.0 + i as f64 * self.spacing.0,
            self.origin.1 + j as f64 * self.spacing.1,
        )
    }

    /// Radii of a radial grid's nodes (the x coordinates for planar grids).
    pub fn radii(&self) -> Vec<f64> {
        (0..self.shape.0).map(|i| self.coord(i).0).collect()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// True for nodes pinned to zero.
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    /// Nominal volume of the discretized domain.
    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn manifold(&self) -> Option<&RadialManifold> {
        self.manifold.as_ref()
    }

    pub fn free_nodes(&self) -> usize {
        self.mask.iter().filter(|m| !**m).count()
    }

    /// Zeroes masked entries.
    pub fn apply_mask(&self, u: &mut [f64]) {
        for (x, m) in u.iter_mut().zip(&self.mask) {
            if *m {
                *x = 0.0;
            }
        }
    }

    pub fn check_len(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.len() {
            return Err(Error::ShapeMismatch { expected: self.len(), actual: u.len() });
        }
        Ok(())
    }

    /// Evaluates `f(x, y)` at every node, zero on masked nodes.
    pub fn sample<F: Fn(f64, f64) -> f64>(&self, f: F) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                if self.mask[i] {
                    0.0
                } else {
                    let (x, y) = self.coord(i);
                    f(x, y)
                }
            })
            .collect()
    }

    /// `Σ w_i |u_i|^p`.
    pub fn lp_power(&self, u: &[f64], p: f64) -> f64 {
        self.weights.iter().zip(u).map(|(w, x)| w * x.abs().powf(p)).sum()
    }

    /// `Σ_e w_e |g_e|^p`.
    pub fn energy(&self, u: &[f64], p: f64) -> f64 {
        self.elements
            .iter()
            .map(|e| {
                let (dx, dy) = e.gradient(u);
                e.weight * (dx * dx + dy * dy).powf(0.5 * p)
            })
            .sum()
    }

    /// Writes one row per node: `x, y, weight, mask` followed by the named
    /// value columns.
    pub fn write_csv<W: Write>(&self, out: W, columns: &[(&str, &[f64])]) -> Result<()> {
        for (_, c) in columns {
            self.check_len(c)?;
        }
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["x", "y", "weight", "mask"];
        header.extend(columns.iter().map(|(name, _)| *name));
        w.write_record(&header)?;
        for i in 0..self.len() {
            let (x, y) = self.coord(i);
            let mut row = vec![
                format!("{x:.12e}"),
                format!("{y:.12e}"),
                format!("{:.12e}", self.weights[i]),
                (self.mask[i] as u8).to_string(),
            ];
            row.extend(columns.iter().map(|(_, c)| format!("{:.12e}", c[i])));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn check_resolution(resolution: usize) -> Result<()> {
    if resolution < MIN_RESOLUTION {
        return Err(Error::InvalidParameter(format!(
            "resolution must be at least {MIN_RESOLUTION}, got {resolution}"
        )));
    }
    Ok(())
}

fn positive(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {x}")));
    }
    Ok(())
}

pub fn build_grid(spec: &DomainSpec, resolution: usize) -> Result<Grid> {
    match spec {
        DomainSpec::RadialBall { dim, curvature, radius } => {
            let m = RadialManifold::model(*dim, *curvature)?;
            radial_grid(&m, 0.0, *radius, resolution)
        }
        DomainSpec::RadialAnnulus { dim, curvature, inner, outer } => {
            positive("inner radius", *inner)?;
            let m = RadialManifold::model(*dim, *curvature)?;
            radial_grid(&m, *inner, *outer, resolution)
        }
        DomainSpec::Rectangle { width, height } => rectangle_grid(*width, *height, resolution),
        DomainSpec::Disk { radius } => disk_grid(*radius, resolution),
        DomainSpec::Mask { width, height, rows } => mask_grid(*width, *height, rows),
    }
}

/// Radial grid on `inner <= t <= outer` with `resolution` uniform nodes.
/// With `inner = 0` the center is a free node and only the outer sphere is
/// Dirichlet; otherwise both ends are.
pub fn radial_grid(m: &RadialManifold, inner: f64, outer: f64, resolution: usize) -> Result<Grid> {
    check_resolution(resolution)?;
    if !(inner >= 0.0 && outer > inner && outer <= m.r_max()) {
        return Err(Error::InvalidParameter(format!(
            "radial range [{inner}, {outer}] invalid for r_max = {}",
            m.r_max()
        )));
    }
    let n = resolution;
    let h = (outer - inner) / (n - 1) as f64;
    let t = |i: usize| if i == n - 1 { outer } else { inner + i as f64 * h };
    let shell = |a: f64, b: f64| m.shell_volume_unchecked(a, b);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let a = if i == 0 { inner } else { 0.5 * (t(i - 1) + t(i)) };
        let b = if i == n - 1 { outer } else { 0.5 * (t(i) + t(i + 1)) };
        weights.push(shell(a, b));
    }
    let elements = (0..n - 1)
        .map(|i| Element {
            weight: shell(t(i), t(i + 1)),
            x: (i + 1, i, 1.0 / h),
            y: (0, 0, 0.0),
        })
        .collect();
    let mut mask = vec![false; n];
    mask[n - 1] = true;
    if inner > 0.0 {
        mask[0] = true;
    }
    let volume = if m.dim() == 1 && inner == 0.0 {
        unit_sphere_area(0) * outer
    } else {
        m.shell_volume(inner, outer)?
    };
    Ok(Grid {
        kind: GridKind::Radial1d,
        shape: (n, 1),
        spacing: (h, 0.0),
        origin: (inner, 0.0),
        weights,
        mask,
        elements,
        volume,
        manifold: Some(m.clone()),
    })
}

fn cell_elements(nx: usize, ny: usize, hx: f64, hy: f64, mask: &[bool]) -> Vec<Element> {
    let idx = |i: usize, j: usize| j * nx + i;
    let quarter = 0.25 * hx * hy;
    let mut out = Vec::with_capacity(4 * (nx - 1) * (ny - 1));
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let corners = [idx(i, j), idx(i + 1, j), idx(i, j + 1), idx(i + 1, j + 1)];
            if corners.iter().all(|&c| mask[c]) {
                continue;
            }
            // Each corner pairs the cell edge through it in x with the one in y.
            for (row, col) in [(j, i), (j, i + 1), (j + 1, i), (j + 1, i + 1)] {
                out.push(Element {
                    weight: quarter,
                    x: (idx(i + 1, row), idx(i, row), 1.0 / hx),
                    y: (idx(col, j + 1), idx(col, j), 1.0 / hy),
                });
            }
        }
    }
    out
}

fn rectangle_grid(width: f64, height: f64, resolution: usize) -> Result<Grid> {
    check_resolution(resolution)?;
    positive("width", width)?;
    positive("height", height)?;
    let short = width.min(height);
    let nodes = |len: f64| ((len / short) * (resolution - 1) as f64).round() as usize + 1;
    let (nx, ny) = (nodes(width), nodes(height));
    let (hx, hy) = (width / (nx - 1) as f64, height / (ny - 1) as f64);
    let mut weights = Vec::with_capacity(nx * ny);
    let mut mask = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let ex = i == 0 || i == nx - 1;
            let ey = j == 0 || j == ny - 1;
            let w = hx * hy * if ex { 0.5 } else { 1.0 } * if ey { 0.5 } else { 1.0 };
            weights.push(w);
            mask.push(ex || ey);
        }
    }
    let elements = cell_elements(nx, ny, hx, hy, &mask);
    Ok(Grid {
        kind: GridKind::Cartesian2d,
        shape: (nx, ny),
        spacing: (hx, hy),
        origin: (0.0, 0.0),
        weights,
        mask,
        elements,
        volume: width * height,
        manifold: None,
    })
}

fn disk_grid(radius: f64, resolution: usize) -> Result<Grid> {
    check_resolution(resolution)?;
    positive("radius", radius)?;
    let n = resolution;
    let h = 2.0 * radius / (n - 1) as f64;
    let mut weights = Vec::with_capacity(n * n);
    let mut mask = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let (x, y) = (-radius + i as f64 * h, -radius + j as f64 * h);
            let inside = x * x + y * y < radius * radius;
            weights.push(if inside { h * h } else { 0.0 });
            mask.push(!inside);
        }
    }
    let elements = cell_elements(n, n, h, h, &mask);
    Ok(Grid {
        kind: GridKind::Cartesian2d,
        shape: (n, n),
        spacing: (h, h),
        origin: (-radius, -radius),
        weights,
        mask,
        elements,
        volume: std::f64::consts::PI * radius * radius,
        manifold: None,
    })
}

fn mask_grid(width: f64, height: f64, rows: &[String]) -> Result<Grid> {
    positive("width", width)?;
    positive("height", height)?;
    let ny = rows.len();
    let nx = rows.first().map_or(0, |r| r.chars().count());
    check_resolution(nx.min(ny))?;
    if rows.iter().any(|r| r.chars().count() != nx) {
        return Err(Error::InvalidParameter("mask rows must have equal length".into()));
    }
    let (hx, hy) = (width / (nx - 1) as f64, height / (ny - 1) as f64);
    let mut weights = Vec::with_capacity(nx * ny);
    let mut mask = Vec::with_capacity(nx * ny);
    for (j, row) in rows.iter().enumerate() {
        for (i, c) in row.chars().enumerate() {
            let edge = i == 0 || j == 0 || i == nx - 1 || j == ny - 1;
            let inside = !edge && c == '#';
            weights.push(if inside { hx * hy } else { 0.0 });
            mask.push(!inside);
        }
    }
    if mask.iter().all(|m| *m) {
        return Err(Error::InvalidParameter("mask has no interior nodes".into()));
    }
    let elements = cell_elements(nx, ny, hx, hy, &mask);
    let volume = weights.iter().sum();
    Ok(Grid {
        kind: GridKind::Cartesian2d,
        shape: (nx, ny),
        spacing: (hx, hy),
        origin: (0.0, 0.0),
        weights,
        mask,
        elements,
        volume,
        manifold: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn interval_ball_has_folded_trapezoid_weights() {
        let g = build_grid(&DomainSpec::RadialBall { dim: 1, curvature: 0.0, radius: 1.0 }, 101).unwrap();
        assert_eq!(g.len(), 101);
        let h = 0.01;
        assert!((g.weights()[0] - h).abs() < 1e-12);
        assert!((g.weights()[50] - 2.0 * h).abs() < 1e-12);
        assert!((g.weights()[100] - h).abs() < 1e-12);
        assert!((g.weight_sum() - 2.0).abs() < 1e-12);
        assert!(g.mask()[100] && !g.mask()[0]);
    }

    #[test]
    fn radial_weights_sum_to_volume() {
        for &(dim, k) in &[(2, 0.0), (3, -1.0), (2, 1.0), (3, 0.5)] {
            let spec = DomainSpec::RadialBall { dim, curvature: k, radius: 1.2 };
            let g = build_grid(&spec, 64).unwrap();
            let vol = spec.volume().unwrap();
            assert!((g.weight_sum() - vol).abs() < 1e-6 * vol);
            assert!((g.volume() - vol).abs() < 1e-12 * vol);
        }
        let spec = DomainSpec::RadialAnnulus { dim: 2, curvature: 0.0, inner: 0.5, outer: 1.0 };
        let g = build_grid(&spec, 40).unwrap();
        assert!((g.weight_sum() - 0.75 * PI).abs() < 1e-6);
        assert!(g.mask()[0] && g.mask()[39]);
    }

    #[test]
    fn unit_square_weights() {
        let g = build_grid(&DomainSpec::Rectangle { width: 1.0, height: 1.0 }, 64).unwrap();
        assert_eq!(g.len(), 64 * 64);
        assert!((g.weight_sum() - 1.0).abs() < 1e-9);
        let wide = build_grid(&DomainSpec::Rectangle { width: 2.0, height: 1.0 }, 33).unwrap();
        assert_eq!(wide.shape(), (65, 33));
        assert!((wide.weight_sum() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn disk_weights_approach_area() {
        let coarse = build_grid(&DomainSpec::Disk { radius: 1.0 }, 128).unwrap();
        assert!((coarse.weight_sum() - PI).abs() < 2e-2);
        let fine = build_grid(&DomainSpec::Disk { radius: 1.0 }, 256).unwrap();
        assert!((fine.weight_sum() - PI).abs() < 5e-3);
    }

    #[test]
    fn rejects_small_resolution() {
        assert!(build_grid(&DomainSpec::Disk { radius: 1.0 }, 4).is_err());
        assert!(build_grid(&DomainSpec::RadialBall { dim: 2, curvature: 1.0, radius: 4.0 }, 32).is_err());
    }

    #[test]
    fn quadratic_energy_matches_five_point_stencil() {
        let g = build_grid(&DomainSpec::Rectangle { width: 1.0, height: 1.0 }, 12).unwrap();
        let u = g.sample(|x, y| (3.0 * x).sin() * y * y + x);
        let (n, _) = g.shape();
        let mut stencil = 0.0;
        for j in 0..n {
            for i in 0..n {
                if i + 1 < n {
                    stencil += (u[g.index(i + 1, j)] - u[g.index(i, j)]).powi(2);
                }
                if j + 1 < n {
                    stencil += (u[g.index(i, j + 1)] - u[g.index(i, j)]).powi(2);
                }
            }
        }
        // Boundary edges belong to one cell only.
        let mut boundary = 0.0;
        for i in 0..n - 1 {
            for j in [0, n - 1] {
                boundary += (u[g.index(i + 1, j)] - u[g.index(i, j)]).powi(2);
                boundary += (u[g.index(j, i + 1)] - u[g.index(j, i)]).powi(2);
            }
        }
        let expected = stencil - 0.5 * boundary;
        assert!((g.energy(&u, 2.0) - expected).abs() < 1e-10);
    }

    #[test]
    fn bitmap_mask_matches_rectangle_interior() {
        let rows: Vec<String> = (0..10).map(|_| "#".repeat(10)).collect();
        let g = build_grid(&DomainSpec::Mask { width: 1.0, height: 1.0, rows }, 10).unwrap();
        assert_eq!(g.free_nodes(), 64);
        let h = 1.0 / 9.0;
        assert!((g.weight_sum() - 64.0 * h * h).abs() < 1e-12);
    }

    #[test]
    fn csv_has_one_row_per_node() {
        let g = build_grid(&DomainSpec::RadialBall { dim: 2, curvature: 0.0, radius: 1.0 }, 9).unwrap();
        let u = vec![1.0; 9];
        let mut buf = Vec::new();
        g.write_csv(&mut buf, &[("u", &u)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 10);
        assert!(text.starts_with("x,y,weight,mask,u"));
    }
}
