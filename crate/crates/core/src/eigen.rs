//! Types shared by the shooting and variational solvers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponents `(p, q, α, β)` of the coupled system, tied by `α/p + β/q = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub beta: f64,
}

const COUPLING_TOL: f64 = 1e-12;

impl Exponents {
    pub fn new(p: f64, q: f64, alpha: f64, beta: f64) -> Result<Self> {
        let e = Self { p, q, alpha, beta };
        e.validate()?;
        Ok(e)
    }

    /// Solves the coupling constraint for `β`.
    pub fn with_alpha(p: f64, q: f64, alpha: f64) -> Result<Self> {
        Self::new(p, q, alpha, q * (1.0 - alpha / p))
    }

    /// `p = q`, `α = β = p/2`: the system whose first eigenvalue equals the
    /// scalar `λ_{1,p}`.
    pub fn diagonal(p: f64) -> Result<Self> {
        Self::new(p, p, 0.5 * p, 0.5 * p)
    }

    /// `α = p/2`, `β = q/2`.
    pub fn balanced(p: f64, q: f64) -> Result<Self> {
        Self::new(p, q, 0.5 * p, 0.5 * q)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0 && self.q > 1.0 && self.p.is_finite() && self.q.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "exponents must satisfy 1 < p, q < inf (p = {}, q = {})",
                self.p, self.q
            )));
        }
        if !(self.alpha > 0.0 && self.beta > 0.0) {
            return Err(Error::InvalidParameter("alpha and beta must be positive".into()));
        }
        let defect = self.alpha / self.p + self.beta / self.q - 1.0;
        if defect.abs() > COUPLING_TOL {
            return Err(Error::InvalidParameter(format!(
                "alpha/p + beta/q must equal 1 (off by {defect:e})"
            )));
        }
        Ok(())
    }

    /// True when the system collapses onto the scalar problem (`p = q`, `α + β = p`).
    pub fn is_diagonal(&self) -> bool {
        self.p == self.q && (self.alpha + self.beta - self.p).abs() < 1e-12
    }

    /// Amplitudes `(a, b)` on the eigenpair family (`a^(p-α) = b^β`) that
    /// take a pair with coupling integral `b_raw` to coupling integral one.
    pub fn unit_coupling_scaling(&self, b_raw: f64) -> (f64, f64) {
        let a = b_raw.powf(-1.0 / self.p);
        let b = a.powf((self.p - self.alpha) / self.beta);
        (a, b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Profile value one at the center.
    PeakOne,
    /// Coupling integral `𝔹(u, v) = 1`.
    BOne,
    /// `‖u‖_p = 1`.
    LpOne,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    pub lambda: f64,
    pub u: Vec<f64>,
    pub v: Option<Vec<f64>>,
    pub normalization: Normalization,
    /// Achieved defect: relative boundary miss for shooting, relative
    /// Euler–Lagrange residual (dual norm) for the variational solver.
    pub residual: f64,
    /// `‖u‖_p` of the returned profile.
    pub norm_u: f64,
    /// `‖v‖_q` of the returned profile (systems only).
    pub norm_v: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
}
