//! Batch execution of verification cases and report output.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    run_case, ChengCase, CheegerCase, Corollary12Case, Expected, FaberKrahnCase, ManifoldSpec, Report, Verdict,
    VerifyCase,
};
use crate::eigen::Exponents;
use crate::error::{Error, Result};
use crate::grid::DomainSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    #[serde(default)]
    pub seed: u64,
    pub cases: Vec<VerifyCase>,
}

impl SuiteConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Every invalid case, by index.
    pub fn diagnostics(&self) -> Vec<String> {
        self.cases
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.validate().err().map(|e| format!("case {i} ({}): {e}", c.tag())))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutcome {
    pub exit_code: i32,
    pub reports: Vec<Report>,
    pub diagnostics: Vec<String>,
}

impl SuiteOutcome {
    fn config_error(diagnostics: Vec<String>) -> Self {
        Self { exit_code: 3, reports: Vec::new(), diagnostics }
    }
}

/// 0 when nothing failed, 1 on any failed inequality, 2 on any solver
/// failure (which takes precedence).
pub fn exit_code(reports: &[Report]) -> i32 {
    if reports.iter().any(|r| r.verdict == Verdict::SolverFailed) {
        2
    } else if reports.iter().any(|r| r.verdict == Verdict::Fail) {
        1
    } else {
        0
    }
}

/// Runs all cases on `workers` threads; reports keep the input order.
pub fn run_cases(config: &SuiteConfig, workers: usize) -> Result<Vec<Report>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let seed = config.seed;
    Ok(pool.install(|| {
        config
            .cases
            .par_iter()
            .map(|case| match run_case(case, seed) {
                Ok(r) => r,
                Err(e) => Report::new(case, seed, None, 0.0).solver_failed(e.to_string()),
            })
            .collect()
    }))
}

/// Loads a config, runs it and writes `report.json` and `summary.csv` into
/// `out_dir` when given.
pub fn run_suite(config_path: &Path, out_dir: Option<&Path>, workers: usize) -> SuiteOutcome {
    let text = match std::fs::read_to_string(config_path) {
        Ok(t) => t,
        Err(e) => return SuiteOutcome::config_error(vec![format!("{}: {e}", config_path.display())]),
    };
    match SuiteConfig::parse(&text) {
        Ok(c) => run_config(&c, out_dir, workers),
        Err(e) => SuiteOutcome::config_error(vec![e.to_string()]),
    }
}

/// Validates and runs a parsed config, writing outputs as [`run_suite`] does.
pub fn run_config(config: &SuiteConfig, out_dir: Option<&Path>, workers: usize) -> SuiteOutcome {
    let diagnostics = config.diagnostics();
    if !diagnostics.is_empty() {
        return SuiteOutcome::config_error(diagnostics);
    }
    let reports = match run_cases(config, workers) {
        Ok(r) => r,
        Err(e) => return SuiteOutcome::config_error(vec![e.to_string()]),
    };
    if let Some(dir) = out_dir {
        let written = std::fs::create_dir_all(dir)
            .map_err(Error::from)
            .and_then(|_| write_bundle(&mut std::fs::File::create(dir.join("report.json"))?, config.seed, &reports))
            .and_then(|_| write_summary(std::fs::File::create(dir.join("summary.csv"))?, &reports));
        if let Err(e) = written {
            return SuiteOutcome { exit_code: 3, reports, diagnostics: vec![e.to_string()] };
        }
    }
    SuiteOutcome { exit_code: exit_code(&reports), reports, diagnostics }
}

#[derive(Serialize)]
struct Bundle<'a> {
    version: &'a str,
    seed: u64,
    reports: &'a [Report],
}

pub fn write_bundle<W: Write>(out: &mut W, seed: u64, reports: &[Report]) -> Result<()> {
    let bundle = Bundle { version: env!("CARGO_PKG_VERSION"), seed, reports };
    serde_json::to_writer_pretty(&mut *out, &bundle)?;
    writeln!(out)?;
    Ok(())
}

fn num(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.12e}")).unwrap_or_default()
}

/// One row per case: index, theorem, parameters, compared eigenvalues,
/// Cheeger constant, margin, tolerance and verdict.
pub fn write_summary<W: Write>(out: W, reports: &[Report]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["index", "theorem", "params", "lambda_a", "lambda_b", "h", "margin", "tolerance", "verdict"])?;
    for (i, r) in reports.iter().enumerate() {
        w.write_record([
            i.to_string(),
            r.case.tag().to_string(),
            r.case.params(),
            num(r.lambda_a),
            num(r.lambda_b),
            num(r.h),
            num(r.margin),
            num(r.tolerance),
            r.verdict.as_str().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn sweep_exponents() -> Vec<Exponents> {
    vec![
        Exponents { p: 2.0, q: 2.0, alpha: 1.0, beta: 1.0 },
        Exponents { p: 1.5, q: 1.5, alpha: 0.75, beta: 0.75 },
        Exponents { p: 2.0, q: 3.0, alpha: 1.0, beta: 1.5 },
    ]
}

fn cheng(dim: usize, k: f64, manifold: ManifoldSpec, r0: f64, e: Exponents, equality: bool) -> VerifyCase {
    VerifyCase::Cheng(ChengCase {
        dim,
        model_curvature: k,
        manifold,
        r0,
        exponents: e,
        expect_equality: equality,
        cross_check_resolution: Some(401),
        solver_tol: 1e-8,
    })
}

fn cheeger_case(domain: DomainSpec, resolution: Option<usize>, expected_h: Option<Expected>) -> CheegerCase {
    CheegerCase {
        domain,
        ladder: vec![2.0, 1.5, 1.2, 1.1, 1.05],
        resolution,
        cheeger_resolution: None,
        limit_tol: 0.05,
        expected_h,
        solver_tol: 1e-8,
    }
}

/// The shipped sweep: strict and equality comparison cases on space forms,
/// a hypothesis-violating pair, a non-model warp, round spheres, equal-volume
/// domains against balls, and Cheeger bounds with the `p -> 1` limit.
pub fn default_suite() -> SuiteConfig {
    let mut cases = Vec::new();
    for k in [-1.0, -0.5, 0.0] {
        for shift in [0.5, 1.0] {
            for dim in [2, 3] {
                for r0 in [0.5, 1.0] {
                    for e in sweep_exponents() {
                        cases.push(cheng(dim, k, ManifoldSpec::SpaceForm { curvature: k + shift }, r0, e, false));
                    }
                }
            }
        }
    }
    for k in [-1.0, -0.5, 0.0] {
        for dim in [2, 3] {
            for r0 in [0.5, 1.0] {
                for e in sweep_exponents() {
                    cases.push(cheng(dim, k, ManifoldSpec::SpaceForm { curvature: k }, r0, e, true));
                }
            }
        }
    }
    let d = sweep_exponents()[0];
    cases.push(cheng(2, 0.0, ManifoldSpec::SpaceForm { curvature: -1.0 }, 1.0, d, false));
    let cubic = ManifoldSpec::Polynomial { coefficients: vec![0.0, 1.0, 0.0, -1.0 / 3.0], r_max: 1.5 };
    cases.push(cheng(2, 0.0, cubic, 1.0, d, false));

    for dim in [2, 3] {
        cases.push(VerifyCase::Corollary12(Corollary12Case {
            dim,
            curvature: 1.0,
            diameter: None,
            exponents: None,
            solver_tol: 1e-8,
        }));
    }
    cases.push(VerifyCase::Corollary12(Corollary12Case {
        dim: 2,
        curvature: 0.0,
        diameter: Some(2.0),
        exponents: None,
        solver_tol: 1e-8,
    }));

    let pi = std::f64::consts::PI;
    let gap = 2.0 * pi * pi - pi * 2.404_825_557_695_773f64.powi(2);
    let domains = [
        (DomainSpec::Rectangle { width: 1.0, height: 1.0 }, 128),
        (DomainSpec::Rectangle { width: 2.0, height: 0.5 }, 96),
        (DomainSpec::RadialAnnulus { dim: 2, curvature: 0.0, inner: 0.5, outer: 1.118 }, 801),
    ];
    for (domain, resolution) in domains {
        for (i, e) in sweep_exponents().into_iter().enumerate() {
            let square = matches!(domain, DomainSpec::Rectangle { width, height } if width == height);
            cases.push(VerifyCase::FaberKrahn(FaberKrahnCase {
                domain: domain.clone(),
                exponents: e,
                resolution,
                expected_margin: (square && i == 0).then_some(Expected { value: gap, tol: 5e-2 }),
                solver_tol: 1e-8,
            }));
        }
    }
    cases.push(VerifyCase::FaberKrahn(FaberKrahnCase {
        domain: DomainSpec::Disk { radius: 1.0 / pi.sqrt() },
        exponents: d,
        resolution: 128,
        expected_margin: None,
        solver_tol: 1e-8,
    }));

    let interval = DomainSpec::RadialBall { dim: 1, curvature: 0.0, radius: 1.0 };
    let disk = DomainSpec::RadialBall { dim: 2, curvature: 0.0, radius: 1.0 };
    let square = DomainSpec::Rectangle { width: 1.0, height: 1.0 };
    cases.push(VerifyCase::CheegerBound(cheeger_case(interval.clone(), None, None)));
    cases.push(VerifyCase::CheegerBound(cheeger_case(disk.clone(), None, None)));
    cases.push(VerifyCase::CheegerBound(cheeger_case(
        square,
        Some(128),
        Some(Expected { value: 2.0 + pi.sqrt(), tol: 8e-2 }),
    )));
    cases.push(VerifyCase::LimitP1(cheeger_case(interval, None, None)));
    cases.push(VerifyCase::LimitP1(cheeger_case(disk, None, None)));
    SuiteConfig { seed: 0, cases }
}
