//! Direct minimization of discrete Rayleigh quotients on a [`Grid`].
//!
//! The scalar problem minimizes `Σ w_e |g_e|^p / Σ w_i |u_i|^p` over
//! nonnegative profiles vanishing on masked nodes. The coupled problem
//! minimizes the scale-invariant form of the system quotient
//!
//! ```text
//! Λ(u, v) = A_u^(α/p) A_v^(β/q) / 𝔹(u, v),   A_u = Σ w_e |du|^p,  A_v = Σ w_e |dv|^q,
//! ```
//!
//! whose infimum equals `inf { 𝔸(u, v) : 𝔹(u, v) = 1 }`, by alternating
//! block steps on `u` and `v`.
//!
//! Each step is a projected, preconditioned gradient step: the search
//! direction solves `K(u) d = -G` approximately, where `K(u)` is the lagged
//! diffusivity matrix with `K(u) u = ∇A(u)`, followed by Armijo backtracking,
//! clamping to `u >= 0` and renormalization. For `p < 2` the energy is
//! regularized to `Σ w_e (|g_e|² + ε²)^(p/2)` and `ε` is annealed toward zero.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::eigen::{EigenResult, Exponents, Normalization};
use crate::error::{Error, Result};
use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalValue {
    /// `𝔸 = (α/p) Σ|du|^p + (β/q) Σ|dv|^q`.
    pub a: f64,
    /// `𝔹 = Σ w |u|^(α-1) |v|^(β-1) u v`.
    pub b: f64,
}

pub fn evaluate_functionals(u: &[f64], v: &[f64], e: &Exponents, g: &Grid) -> Result<FunctionalValue> {
    g.check_len(u)?;
    g.check_len(v)?;
    let a = e.alpha / e.p * g.energy(u, e.p) + e.beta / e.q * g.energy(v, e.q);
    let b = g
        .weights()
        .iter()
        .zip(u.iter().zip(v))
        .map(|(w, (x, y))| w * coupling(*x, *y, e.alpha, e.beta))
        .sum();
    Ok(FunctionalValue { a, b })
}

/// `|x|^(α-1) |y|^(β-1) x y`, zero when either factor vanishes.
fn coupling(x: f64, y: f64, alpha: f64, beta: f64) -> f64 {
    if x == 0.0 || y == 0.0 {
        0.0
    } else {
        (x * y).signum() * x.abs().powf(alpha) * y.abs().powf(beta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimizeOptions {
    /// Stop once a full step lowers the quotient by less than this fraction.
    pub rel_tol: f64,
    /// Bound on the relative Euler–Lagrange residual in the dual norm.
    pub kkt_tol: f64,
    pub max_iter: usize,
    /// Relative residual target of the inner preconditioned CG solve.
    pub cg_tol: f64,
    pub cg_max_iter: usize,
    /// Lower limit of the regularization `ε` used for `p < 2`.
    pub eps_floor: f64,
    /// Seed of the perturbation used when a system solve collapses.
    pub seed: u64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            kkt_tol: 1e-3,
            max_iter: 4000,
            cg_tol: 1e-3,
            cg_max_iter: 300,
            eps_floor: 1e-8,
            seed: 0,
        }
    }
}

const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 30;
const MAX_RESTARTS: usize = 3;
const SEED_ITERATIONS: usize = 50;

/// Grid gradients assembled onto unique node pairs, so that
/// `K = Σ κ_edge (e_a - e_b)(e_a - e_b)^T`.
struct Stiffness<'g> {
    grid: &'g Grid,
    edges: Vec<(usize, usize)>,
    /// Edge indices of each element's x and y differences (`usize::MAX` if absent).
    element_edges: Vec<(usize, usize)>,
}

impl<'g> Stiffness<'g> {
    fn new(grid: &'g Grid) -> Self {
        let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut index = |a: usize, b: usize, scale: f64| {
            if scale == 0.0 || a == b {
                return usize::MAX;
            }
            let key = (a.min(b), a.max(b));
            *lookup.entry(key).or_insert_with(|| {
                edges.push(key);
                edges.len() - 1
            })
        };
        let element_edges = grid
            .elements()
            .iter()
            .map(|e| (index(e.x.0, e.x.1, e.x.2), index(e.y.0, e.y.1, e.y.2)))
            .collect();
        Self { grid, edges, element_edges }
    }

    /// Regularized energy `Σ w (|g|² + ε²)^(p/2)` together with the exact
    /// edge coefficients (`K u = ∇A`) and the preconditioner coefficients.
    /// The latter take the energy's curvature along `g`, with `floor` in
    /// place of `ε`, which keeps steps of length one well scaled as `p → 1`.
    fn assemble(&self, u: &[f64], p: f64, eps: f64, floor: f64, exact: &mut [f64], pre: &mut [f64]) -> f64 {
        exact.iter_mut().for_each(|x| *x = 0.0);
        pre.iter_mut().for_each(|x| *x = 0.0);
        let half = 0.5 * (p - 2.0);
        let mut energy = 0.0;
        for (el, &(ex, ey)) in self.grid.elements().iter().zip(&self.element_edges) {
            let (dx, dy) = el.gradient(u);
            let s = dx * dx + dy * dy;
            let base = s + eps * eps;
            energy += el.weight * base.powf(0.5 * p);
            let c = el.weight * p * if p == 2.0 { 1.0 } else { base.powf(half) };
            let cp = el.weight * p * if p == 2.0 {
                1.0
            } else {
                let f2 = floor * floor;
                (s + f2).powf(half - 1.0) * ((p - 1.0) * s + f2)
            };
            if ex != usize::MAX {
                exact[ex] += c * el.x.2 * el.x.2;
                pre[ex] += cp * el.x.2 * el.x.2;
            }
            if ey != usize::MAX {
                exact[ey] += c * el.y.2 * el.y.2;
                pre[ey] += cp * el.y.2 * el.y.2;
            }
        }
        energy
    }

    fn max_gradient(&self, u: &[f64]) -> f64 {
        self.grid
            .elements()
            .iter()
            .map(|e| {
                let (dx, dy) = e.gradient(u);
                (dx * dx + dy * dy).sqrt()
            })
            .fold(0.0, f64::max)
    }

    fn apply(&self, kappa: &[f64], x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for (&(a, b), k) in self.edges.iter().zip(kappa) {
            let t = k * (x[a] - x[b]);
            y[a] += t;
            y[b] -= t;
        }
        self.grid.apply_mask(y);
    }

    fn diagonal(&self, kappa: &[f64]) -> Vec<f64> {
        let mut d = vec![0.0; self.grid.len()];
        for (&(a, b), k) in self.edges.iter().zip(kappa) {
            d[a] += k;
            d[b] += k;
        }
        for (x, m) in d.iter_mut().zip(self.grid.mask()) {
            if *m || !(*x > 0.0) {
                *x = 1.0;
            }
        }
        d
    }

    /// Jacobi-preconditioned CG for `K x = b` on the free nodes. `x` holds the
    /// starting guess. Returns the iteration count.
    fn solve(&self, kappa: &[f64], b: &[f64], x: &mut [f64], tol: f64, max_iter: usize) -> usize {
        let n = b.len();
        let diag = self.diagonal(kappa);
        let mut r = vec![0.0; n];
        let mut ap = vec![0.0; n];
        self.grid.apply_mask(x);
        self.apply(kappa, x, &mut ap);
        for i in 0..n {
            r[i] = b[i] - ap[i];
        }
        self.grid.apply_mask(&mut r);
        let b_norm = dot(b, b).sqrt();
        if b_norm == 0.0 {
            x.iter_mut().for_each(|v| *v = 0.0);
            return 0;
        }
        let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
        let mut dir = z.clone();
        let mut rz = dot(&r, &z);
        for it in 0..max_iter {
            if dot(&r, &r).sqrt() <= tol * b_norm {
                return it;
            }
            self.apply(kappa, &dir, &mut ap);
            let curv = dot(&dir, &ap);
            if !(curv > 0.0) {
                return it;
            }
            let step = rz / curv;
            for i in 0..n {
                x[i] += step * dir[i];
                r[i] -= step * ap[i];
            }
            for i in 0..n {
                z[i] = r[i] / diag[i];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                dir[i] = z[i] + beta * dir[i];
            }
        }
        max_iter
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Energy `Σ w_e (|g_e|² + ε²)^(p/2)` and its gradient in the node values.
pub fn regularized_energy_gradient(g: &Grid, u: &[f64], p: f64, eps: f64) -> Result<(f64, Vec<f64>)> {
    g.check_len(u)?;
    let k = Stiffness::new(g);
    let mut exact = vec![0.0; k.edges.len()];
    let mut pre = vec![0.0; k.edges.len()];
    let value = k.assemble(u, p, eps, eps, &mut exact, &mut pre);
    let mut grad = vec![0.0; g.len()];
    k.apply(&exact, u, &mut grad);
    Ok((value, grad))
}

/// Denominator of a block quotient: positive, homogeneous of degree `degree`.
trait Mass {
    fn degree(&self) -> f64;
    fn value(&self, u: &[f64]) -> f64;
    fn gradient(&self, u: &[f64], out: &mut [f64]);
}

/// `Σ w |u|^p`.
struct PowerMass<'a> {
    weights: &'a [f64],
    p: f64,
}

impl Mass for PowerMass<'_> {
    fn degree(&self) -> f64 {
        self.p
    }

    fn value(&self, u: &[f64]) -> f64 {
        self.weights.iter().zip(u).map(|(w, x)| w * x.abs().powf(self.p)).sum()
    }

    fn gradient(&self, u: &[f64], out: &mut [f64]) {
        for ((o, w), x) in out.iter_mut().zip(self.weights).zip(u) {
            *o = self.p * w * x.signum() * x.abs().powf(self.p - 1.0);
        }
    }
}

/// `(Σ w u^α v^β)^(degree/α)` for a frozen partner `v`.
struct CouplingMass<'a> {
    weights: &'a [f64],
    partner: &'a [f64],
    own: f64,
    other: f64,
    degree: f64,
}

impl CouplingMass<'_> {
    fn raw(&self, u: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(u.iter().zip(self.partner))
            .map(|(w, (x, y))| w * coupling(*x, *y, self.own, self.other))
            .sum()
    }
}

impl Mass for CouplingMass<'_> {
    fn degree(&self) -> f64 {
        self.degree
    }

    fn value(&self, u: &[f64]) -> f64 {
        let b = self.raw(u);
        if b > 0.0 {
            b.powf(self.degree / self.own)
        } else {
            0.0
        }
    }

    fn gradient(&self, u: &[f64], out: &mut [f64]) {
        let b = self.raw(u);
        let scale = self.degree * b.powf(self.degree / self.own - 1.0);
        for (i, o) in out.iter_mut().enumerate() {
            let (x, y) = (u[i], self.partner[i]);
            *o = if x > 0.0 && y > 0.0 {
                scale * self.weights[i] * x.powf(self.own - 1.0) * y.powf(self.other)
            } else {
                0.0
            };
        }
    }
}

/// One block of the minimization: a profile, its exponent and its current
/// regularization.
struct Block {
    p: f64,
    eps: f64,
    kkt: f64,
}

struct StepOutcome {
    accepted: bool,
    before: f64,
    after: f64,
}

fn normalize(u: &mut [f64], mass: &dyn Mass) -> bool {
    let m = mass.value(u);
    if !(m > 0.0 && m.is_finite()) {
        return false;
    }
    let s = m.powf(-1.0 / mass.degree());
    u.iter_mut().for_each(|x| *x *= s);
    true
}

/// Regularized energy of the normalized profile.
fn normalized_energy(k: &Stiffness, u: &[f64], mass: &dyn Mass, p: f64, eps: f64) -> f64 {
    let m = mass.value(u);
    if !(m > 0.0) {
        return f64::INFINITY;
    }
    let s = m.powf(-1.0 / mass.degree());
    let scaled: Vec<f64> = u.iter().map(|x| x * s).collect();
    let mut energy = 0.0;
    for el in k.grid.elements() {
        let (dx, dy) = el.gradient(&scaled);
        energy += el.weight * (dx * dx + dy * dy + eps * eps).powf(0.5 * p);
    }
    energy
}

/// One projected preconditioned descent step on the regularized energy of
/// the normalized profile `u` (normalized on entry and exit).
fn descent_step(k: &Stiffness, block: &mut Block, mass: &dyn Mass, u: &mut Vec<f64>, opts: &MinimizeOptions) -> StepOutcome {
    let n = u.len();
    let p = block.p;
    let floor = if p < 2.0 { block.eps } else { 1e-2 * k.max_gradient(u) };
    let mut exact = vec![0.0; k.edges.len()];
    let mut pre = vec![0.0; k.edges.len()];
    let energy = k.assemble(u, p, block.eps, floor, &mut exact, &mut pre);
    let mut grad_a = vec![0.0; n];
    k.apply(&exact, u, &mut grad_a);
    let mut grad_m = vec![0.0; n];
    mass.gradient(u, &mut grad_m);
    // Derivative of A(u / M(u)^(1/deg)) at M(u) = 1.
    let mu = dot(u, &grad_a) / mass.degree();
    let mut g: Vec<f64> = grad_a.iter().zip(&grad_m).map(|(a, m)| a - mu * m).collect();
    k.grid.apply_mask(&mut g);
    let rhs: Vec<f64> = g.iter().map(|x| -x).collect();
    let mut d = vec![0.0; n];
    k.solve(&pre, &rhs, &mut d, opts.cg_tol, opts.cg_max_iter);
    let slope = dot(&g, &d);
    block.kkt = (slope.abs() / (p * energy)).sqrt();
    if !(slope < 0.0) {
        return StepOutcome { accepted: false, before: energy, after: energy };
    }
    let mut tau = 1.0;
    let mut trial = vec![0.0; n];
    for _ in 0..=MAX_HALVINGS {
        for i in 0..n {
            trial[i] = (u[i] + tau * d[i]).max(0.0);
        }
        k.grid.apply_mask(&mut trial);
        let value = normalized_energy(k, &trial, mass, p, block.eps);
        if value <= energy + ARMIJO * tau * slope {
            if normalize(&mut trial, mass) {
                std::mem::swap(u, &mut trial);
                return StepOutcome { accepted: true, before: energy, after: value };
            }
        }
        tau *= 0.5;
    }
    StepOutcome { accepted: false, before: energy, after: energy }
}

/// Positive first Dirichlet eigenvector of the `p = 2` problem by inverse
/// power iteration, normalized to unit maximum.
pub fn dirichlet_seed(g: &Grid) -> Vec<f64> {
    let k = Stiffness::new(g);
    let kappa = {
        let mut exact = vec![0.0; k.edges.len()];
        let mut pre = vec![0.0; k.edges.len()];
        let ones = vec![0.0; g.len()];
        k.assemble(&ones, 2.0, 0.0, 0.0, &mut exact, &mut pre);
        exact
    };
    let mut u = g.sample(|_, _| 1.0);
    let mut x = vec![0.0; g.len()];
    let mut previous = f64::INFINITY;
    for _ in 0..SEED_ITERATIONS {
        let rhs: Vec<f64> = u.iter().zip(g.weights()).map(|(x, w)| x * w).collect();
        k.solve(&kappa, &rhs, &mut x, 1e-8, 4 * g.len().max(100));
        let norm = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !(norm > 0.0) {
            break;
        }
        u.iter_mut().zip(&x).for_each(|(u, x)| *u = x.abs() / norm);
        // Warm start the next solve from the rescaled solution.
        x.iter_mut().for_each(|v| *v /= norm);
        let quotient = g.energy(&u, 2.0) / g.lp_power(&u, 2.0);
        if (previous - quotient).abs() <= 1e-11 * quotient {
            break;
        }
        previous = quotient;
    }
    g.apply_mask(&mut u);
    u
}

fn check_exponent(p: f64) -> Result<()> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("p must exceed 1, got {p}")));
    }
    Ok(())
}

fn initial_eps(k: &Stiffness, u: &[f64], p: f64) -> f64 {
    if p < 2.0 {
        1e-2 * k.max_gradient(u)
    } else {
        0.0
    }
}

/// Anneals `ε` once the current stage has stalled. Returns true when the
/// regularization no longer matters at the present tolerance.
fn anneal(block: &mut Block, k: &Stiffness, u: &[f64], mass: &dyn Mass, opts: &MinimizeOptions) -> bool {
    if block.p >= 2.0 {
        return true;
    }
    let exact = normalized_energy(k, u, mass, block.p, 0.0);
    let reg = normalized_energy(k, u, mass, block.p, block.eps);
    if (reg - exact).abs() <= opts.rel_tol.max(1e-3 * opts.kkt_tol) * exact || block.eps <= opts.eps_floor {
        return true;
    }
    block.eps = (0.1 * block.eps).max(opts.eps_floor);
    false
}

/// Minimizes the discrete p-Rayleigh quotient. The result is normalized to
/// `‖u‖_p = 1`; `residual` is the relative Euler–Lagrange residual.
pub fn minimize_scalar(p: f64, g: &Grid, opts: &MinimizeOptions) -> Result<EigenResult> {
    let seed = dirichlet_seed(g);
    minimize_scalar_from(p, g, seed, opts)
}

/// As [`minimize_scalar`], starting from a given nonnegative profile.
pub fn minimize_scalar_from(p: f64, g: &Grid, seed: Vec<f64>, opts: &MinimizeOptions) -> Result<EigenResult> {
    minimize_scalar_traced(p, g, seed, opts, |_| {})
}

pub(crate) fn minimize_scalar_traced<F: FnMut(f64)>(
    p: f64,
    g: &Grid,
    seed: Vec<f64>,
    opts: &MinimizeOptions,
    mut trace: F,
) -> Result<EigenResult> {
    check_exponent(p)?;
    g.check_len(&seed)?;
    let k = Stiffness::new(g);
    let mass = PowerMass { weights: g.weights(), p };
    let mut u: Vec<f64> = seed.iter().map(|x| x.max(0.0)).collect();
    g.apply_mask(&mut u);
    if !normalize(&mut u, &mass) {
        return Err(Error::InvalidParameter("seed profile vanishes".into()));
    }
    let mut block = Block { p, eps: initial_eps(&k, &u, p), kkt: f64::INFINITY };
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        iterations += 1;
        let step = descent_step(&k, &mut block, &mass, &mut u, opts);
        if block.eps == 0.0 || block.p >= 2.0 {
            trace(g.energy(&u, p));
        }
        let small = !step.accepted || (step.before - step.after) <= opts.rel_tol * step.after.abs();
        if small || block.kkt <= opts.kkt_tol {
            if anneal(&mut block, &k, &u, &mass, opts) {
                if block.kkt <= opts.kkt_tol || small {
                    converged = block.kkt <= opts.kkt_tol;
                    break;
                }
            }
        }
    }
    let lambda = g.energy(&u, p);
    Ok(EigenResult {
        lambda,
        u,
        v: None,
        normalization: Normalization::LpOne,
        residual: block.kkt,
        norm_u: 1.0,
        norm_v: None,
        iterations,
        converged,
    })
}

/// `Λ(u, v)` and the amplitudes `(a, b)` that bring the pair to
/// `𝔹 = 1` with `a^p A_u = b^q A_v = Λ`.
fn system_quotient(g: &Grid, e: &Exponents, u: &[f64], v: &[f64]) -> Option<(f64, f64, f64)> {
    let au = g.energy(u, e.p);
    let av = g.energy(v, e.q);
    let b: f64 = g
        .weights()
        .iter()
        .zip(u.iter().zip(v))
        .map(|(w, (x, y))| w * coupling(*x, *y, e.alpha, e.beta))
        .sum();
    if !(au > 0.0 && av > 0.0 && b > 0.0) || !(au.is_finite() && av.is_finite() && b.is_finite()) {
        return None;
    }
    let lambda = au.powf(e.alpha / e.p) * av.powf(e.beta / e.q) / b;
    Some((lambda, (lambda / au).powf(1.0 / e.p), (lambda / av).powf(1.0 / e.q)))
}

/// Minimizes the system quotient by alternating block descent. The result
/// is normalized to `𝔹(u, v) = 1` with `λ = 𝔸(u, v)`.
pub fn minimize_system(e: &Exponents, g: &Grid, opts: &MinimizeOptions) -> Result<EigenResult> {
    e.validate()?;
    let seed = dirichlet_seed(g);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut last_err = None;
    for attempt in 0..=MAX_RESTARTS {
        let (mut u, mut v) = (seed.clone(), seed.clone());
        if attempt > 0 {
            for x in u.iter_mut().chain(v.iter_mut()) {
                *x *= 1.0 + 0.1 * rng.gen_range(-1.0..1.0);
            }
        }
        match system_descent(e, g, u, v, opts) {
            Ok(r) => return Ok(r),
            Err(err @ Error::NonConvergence { .. }) => last_err = Some(err),
            Err(err) => return Err(err),
        }
    }
    Err(last_err.unwrap())
}

const BLOCK_STEPS: usize = 2;

fn system_descent(e: &Exponents, g: &Grid, mut u: Vec<f64>, mut v: Vec<f64>, opts: &MinimizeOptions) -> Result<EigenResult> {
    let collapse = |iterations| Error::NonConvergence {
        iterations,
        detail: "profiles collapsed to zero coupling".into(),
    };
    let k = Stiffness::new(g);
    for x in u.iter_mut().chain(v.iter_mut()) {
        *x = x.max(0.0);
    }
    g.apply_mask(&mut u);
    g.apply_mask(&mut v);
    let (mut lambda, a, b) = system_quotient(g, e, &u, &v).ok_or_else(|| collapse(0))?;
    u.iter_mut().for_each(|x| *x *= a);
    v.iter_mut().for_each(|x| *x *= b);
    let mut bu = Block { p: e.p, eps: initial_eps(&k, &u, e.p), kkt: f64::INFINITY };
    let mut bv = Block { p: e.q, eps: initial_eps(&k, &v, e.q), kkt: f64::INFINITY };
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        iterations += 1;
        let mut any_accepted = false;
        {
            let mass = CouplingMass { weights: g.weights(), partner: &v, own: e.alpha, other: e.beta, degree: e.p };
            if !normalize(&mut u, &mass) {
                return Err(collapse(iterations));
            }
            for _ in 0..BLOCK_STEPS {
                any_accepted |= descent_step(&k, &mut bu, &mass, &mut u, opts).accepted;
            }
        }
        {
            let mass = CouplingMass { weights: g.weights(), partner: &u, own: e.beta, other: e.alpha, degree: e.q };
            if !normalize(&mut v, &mass) {
                return Err(collapse(iterations));
            }
            for _ in 0..BLOCK_STEPS {
                any_accepted |= descent_step(&k, &mut bv, &mass, &mut v, opts).accepted;
            }
        }
        let (next, a, b) = system_quotient(g, e, &u, &v).ok_or_else(|| collapse(iterations))?;
        u.iter_mut().for_each(|x| *x *= a);
        v.iter_mut().for_each(|x| *x *= b);
        let small = !any_accepted || (lambda - next) <= opts.rel_tol * next;
        lambda = next;
        let kkt = bu.kkt.max(bv.kkt);
        if small || kkt <= opts.kkt_tol {
            let mu = CouplingMass { weights: g.weights(), partner: &v, own: e.alpha, other: e.beta, degree: e.p };
            let mv = CouplingMass { weights: g.weights(), partner: &u, own: e.beta, other: e.alpha, degree: e.q };
            let done_u = anneal(&mut bu, &k, &u, &mu, opts);
            let done_v = anneal(&mut bv, &k, &v, &mv, opts);
            if done_u && done_v && (kkt <= opts.kkt_tol || small) {
                converged = kkt <= opts.kkt_tol;
                break;
            }
        }
    }
    let norm_u = g.lp_power(&u, e.p).powf(1.0 / e.p);
    let norm_v = g.lp_power(&v, e.q).powf(1.0 / e.q);
    Ok(EigenResult {
        lambda,
        u,
        v: Some(v),
        normalization: Normalization::BOne,
        residual: bu.kkt.max(bv.kkt),
        norm_u,
        norm_v: Some(norm_v),
        iterations,
        converged,
    })
}
