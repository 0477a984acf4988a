use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use quasieig::cheeger::{cheeger_grid_2d, cheeger_radial, CheegerOptions};
use quasieig::grid::{build_grid, radial_grid, DomainSpec, Grid};
use quasieig::harness::{
    default_suite, exit_code, run_case, run_config, run_suite, write_summary, ChengCase, CheegerCase, Corollary12Case,
    FaberKrahnCase, ManifoldSpec, Report, VerifyCase,
};
use quasieig::rearrangement::{
    calibrate_hardy_littlewood, calibrate_polya_szego, hardy_littlewood_campaign, matching_ball,
    polya_szego_campaign, write_campaign_csv, TrialRecord,
};
use quasieig::shooting::{first_eigenpair_system, first_eigenvalue_scalar, RadialEigen};
use quasieig::variational::{minimize_scalar, minimize_system, MinimizeOptions};
use quasieig::{EigenResult, Exponents, RadialDomain, RadialManifold};

#[derive(Parser)]
#[command(name = "quasieig", version, about = "First eigenvalues of p-Laplacians and (p,q)-Laplacian systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Second exponent; defaults to `p`.
    #[arg(long)]
    q: Option<f64>,
    /// Coupling exponents; defaults to `alpha = p/2`, `beta` from the constraint.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    curvature: f64,
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    #[arg(long, default_value_t = 201)]
    resolution: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Planar or radial domain as JSON, e.g. '{"kind":"rectangle","width":1,"height":1}'.
    /// A leading `@` reads the JSON from a file.
    #[arg(long)]
    domain: Option<String>,
}

impl Common {
    fn exponents(&self) -> Result<Exponents> {
        let q = self.q.unwrap_or(self.p);
        let alpha = self.alpha.unwrap_or(0.5 * self.p);
        Ok(match self.beta {
            Some(beta) => Exponents::new(self.p, q, alpha, beta)?,
            None => Exponents::with_alpha(self.p, q, alpha)?,
        })
    }

    fn radial_domain(&self) -> Result<RadialDomain> {
        Ok(RadialDomain::model(self.dim, self.curvature, self.radius)?)
    }

    fn ball_spec(&self) -> DomainSpec {
        DomainSpec::RadialBall { dim: self.dim, curvature: self.curvature, radius: self.radius }
    }

    fn domain_spec(&self) -> Result<Option<DomainSpec>> {
        let Some(text) = &self.domain else { return Ok(None) };
        let json = match text.strip_prefix('@') {
            Some(path) => std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?,
            None => text.clone(),
        };
        Ok(Some(serde_json::from_str(&json).context("parsing --domain")?))
    }

    fn grid(&self) -> Result<Grid> {
        let spec = self.domain_spec()?.unwrap_or_else(|| self.ball_spec());
        Ok(match spec {
            DomainSpec::RadialBall { dim, curvature, radius } => {
                radial_grid(&RadialManifold::model(dim, curvature)?, 0.0, radius, self.resolution)?
            }
            DomainSpec::RadialAnnulus { dim, curvature, inner, outer } => {
                radial_grid(&RadialManifold::model(dim, curvature)?, inner, outer, self.resolution)?
            }
            spec => build_grid(&spec, self.resolution)?,
        })
    }

    fn minimize_options(&self) -> MinimizeOptions {
        MinimizeOptions { seed: self.seed, ..MinimizeOptions::default() }
    }

    fn sink(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => Box::new(File::create(path).with_context(|| format!("creating {}", path.display()))?),
            None => Box::new(std::io::stdout().lock()),
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Theorem {
    Cheng,
    Corollary12,
    FaberKrahn,
    CheegerBound,
    LimitP1,
}

#[derive(Subcommand)]
enum Command {
    /// Scalar first eigenvalue on a geodesic ball by shooting.
    EigRadial(Common),
    /// Scalar (or, with --q/--alpha/--beta, system) eigenvalue by the variational grid solver.
    EigGrid {
        #[command(flatten)]
        common: Common,
        /// Solve the coupled system even when it reduces to the scalar problem.
        #[arg(long)]
        system: bool,
    },
    /// First eigenpair of the coupled system on a geodesic ball by shooting.
    EigSystem(Common),
    /// Cheeger constant of a geodesic ball, or a level-set estimate on a planar domain.
    Cheeger(Common),
    /// Seeded Pólya–Szegő and Hardy–Littlewood trials against calibrated tolerances.
    RearrangeCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 200)]
        trials: u64,
    },
    /// Runs one theorem check built from the flags, or from a case file.
    Verify {
        #[arg(value_enum)]
        theorem: Theorem,
        #[command(flatten)]
        common: Common,
        /// Case body as JSON (without the `theorem` tag); overrides the flags.
        #[arg(long)]
        case: Option<PathBuf>,
        /// Manifold-side curvature for Cheng checks; defaults to --curvature.
        #[arg(long, allow_hyphen_values = true)]
        manifold_curvature: Option<f64>,
        /// Diameter for the flat closed-manifold bound.
        #[arg(long)]
        diameter: Option<f64>,
    },
    /// Runs a suite config and writes report.json and summary.csv into --out.
    RunSuite {
        /// Suite config; the built-in default suite when absent.
        config: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
        /// Print the built-in default suite config and exit.
        #[arg(long)]
        print_default: bool,
    },
}

fn eigen_json(r: &EigenResult) -> Value {
    json!({
        "lambda": r.lambda,
        "residual": r.residual,
        "norm_u": r.norm_u,
        "norm_v": r.norm_v,
        "iterations": r.iterations,
        "converged": r.converged,
        "normalization": r.normalization,
    })
}

fn write_json(out: &mut dyn Write, v: &Value) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, v)?;
    writeln!(out)?;
    Ok(())
}

fn write_profile(out: &mut dyn Write, r: &RadialEigen) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    match &r.result.v {
        Some(v) => {
            w.write_record(["r", "u", "v"])?;
            for ((t, a), b) in r.radii.iter().zip(&r.result.u).zip(v) {
                w.write_record([t.to_string(), a.to_string(), b.to_string()])?;
            }
        }
        None => {
            w.write_record(["r", "u"])?;
            for (t, a) in r.radii.iter().zip(&r.result.u) {
                w.write_record([t.to_string(), a.to_string()])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn radial_output(c: &Common, r: &RadialEigen) -> Result<()> {
    let mut out = c.sink()?;
    match c.format {
        Format::Json => {
            let mut v = eigen_json(&r.result);
            v["slope_ratio"] = json!(r.slope_ratio);
            v["bracket"] = json!(r.bracket);
            write_json(&mut *out, &v)
        }
        Format::Csv => write_profile(&mut *out, r),
    }
}

fn eig_grid(c: &Common, system: bool) -> Result<()> {
    let g = c.grid()?;
    let e = c.exponents()?;
    let opts = c.minimize_options();
    let r = if system || !(e.p == e.q && e.is_diagonal()) {
        minimize_system(&e, &g, &opts)?
    } else {
        minimize_scalar(e.p, &g, &opts)?
    };
    let mut out = c.sink()?;
    match c.format {
        Format::Json => write_json(&mut *out, &eigen_json(&r)),
        Format::Csv => {
            let mut cols: Vec<(&str, &[f64])> = vec![("u", &r.u)];
            if let Some(v) = &r.v {
                cols.push(("v", v));
            }
            g.write_csv(&mut out, &cols)?;
            Ok(())
        }
    }
}

fn cheeger(c: &Common) -> Result<()> {
    let est = match c.domain_spec()? {
        Some(DomainSpec::RadialBall { dim, curvature, radius }) => {
            cheeger_radial(&RadialDomain::model(dim, curvature, radius)?)
        }
        Some(spec) => {
            let g = build_grid(&spec, c.resolution)?;
            let opts = CheegerOptions { minimize: c.minimize_options(), ..CheegerOptions::default() };
            cheeger_grid_2d(&g, &opts)?
        }
        None => cheeger_radial(&c.radial_domain()?),
    };
    let mut out = c.sink()?;
    match c.format {
        Format::Json => write_json(&mut *out, &serde_json::to_value(&est)?),
        Format::Csv => {
            writeln!(out, "h,witness,witness_volume,tolerance,exact")?;
            writeln!(out, "{},{},{},{},{}", est.h, est.witness, est.witness_volume, est.tolerance, est.exact)?;
            Ok(())
        }
    }
}

fn worst(records: &[TrialRecord]) -> f64 {
    records.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min)
}

fn rearrange_check(c: &Common, trials: u64) -> Result<ExitCode> {
    let spec = c.domain_spec()?.unwrap_or(DomainSpec::Rectangle { width: 1.0, height: 1.0 });
    let g = build_grid(&spec, c.resolution)?;
    let target = matching_ball(&g, 4 * c.resolution)?;
    let tol_ps = calibrate_polya_szego(&g, &target, c.p)?;
    let tol_hl = calibrate_hardy_littlewood(&g, &target)?;
    let ps = polya_szego_campaign(&g, &target, &[c.p], trials, c.seed)?;
    let hl = hardy_littlewood_campaign(&g, &target, trials, c.seed)?;
    let ok = worst(&ps) >= -tol_ps && worst(&hl) >= -tol_hl;
    let mut out = c.sink()?;
    match c.format {
        Format::Json => write_json(
            &mut *out,
            &json!({
                "polya_szego": { "p": c.p, "tolerance": tol_ps, "worst_margin": worst(&ps), "trials": ps },
                "hardy_littlewood": { "tolerance": tol_hl, "worst_margin": worst(&hl), "trials": hl },
                "pass": ok,
            }),
        )?,
        Format::Csv => {
            let all: Vec<TrialRecord> = ps.into_iter().chain(hl).collect();
            write_campaign_csv(&mut out, &all)?;
        }
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn read_case(theorem: Theorem, path: &Path) -> Result<VerifyCase> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut body: Value = serde_json::from_str(&text)?;
    let tag = match theorem {
        Theorem::Cheng => "cheng",
        Theorem::Corollary12 => "corollary12",
        Theorem::FaberKrahn => "faber-krahn",
        Theorem::CheegerBound => "cheeger-bound",
        Theorem::LimitP1 => "limit-p1",
    };
    let Some(obj) = body.as_object_mut() else { bail!("case file must hold a JSON object") };
    obj.insert("theorem".into(), json!(tag));
    Ok(serde_json::from_value(body)?)
}

fn flag_case(theorem: Theorem, c: &Common, manifold_curvature: Option<f64>, diameter: Option<f64>) -> Result<VerifyCase> {
    let cheeger_case = || -> Result<CheegerCase> {
        let domain = c.domain_spec()?.unwrap_or_else(|| c.ball_spec());
        let planar = !matches!(domain, DomainSpec::RadialBall { .. });
        Ok(CheegerCase {
            domain,
            ladder: vec![2.0, 1.5, 1.2, 1.1, 1.05],
            resolution: planar.then_some(c.resolution),
            cheeger_resolution: None,
            limit_tol: 0.05,
            expected_h: None,
            solver_tol: c.tol,
        })
    };
    Ok(match theorem {
        Theorem::Cheng => VerifyCase::Cheng(ChengCase {
            dim: c.dim,
            model_curvature: c.curvature,
            manifold: ManifoldSpec::SpaceForm { curvature: manifold_curvature.unwrap_or(c.curvature) },
            r0: c.radius,
            exponents: c.exponents()?,
            expect_equality: false,
            cross_check_resolution: None,
            solver_tol: c.tol,
        }),
        Theorem::Corollary12 => VerifyCase::Corollary12(Corollary12Case {
            dim: c.dim,
            curvature: c.curvature,
            diameter,
            exponents: Some(c.exponents()?),
            solver_tol: c.tol,
        }),
        Theorem::FaberKrahn => VerifyCase::FaberKrahn(FaberKrahnCase {
            domain: c.domain_spec()?.unwrap_or(DomainSpec::Rectangle { width: 1.0, height: 1.0 }),
            exponents: c.exponents()?,
            resolution: c.resolution,
            expected_margin: None,
            solver_tol: c.tol,
        }),
        Theorem::CheegerBound => VerifyCase::CheegerBound(cheeger_case()?),
        Theorem::LimitP1 => VerifyCase::LimitP1(cheeger_case()?),
    })
}

fn write_reports(c: &Common, reports: &[Report]) -> Result<()> {
    let mut out = c.sink()?;
    match c.format {
        Format::Json => write_json(&mut *out, &serde_json::to_value(reports)?),
        Format::Csv => Ok(write_summary(&mut out, reports)?),
    }
}

fn verify(theorem: Theorem, c: &Common, case: Option<PathBuf>, kc: Option<f64>, d: Option<f64>) -> Result<ExitCode> {
    let case = match case {
        Some(path) => read_case(theorem, &path)?,
        None => flag_case(theorem, c, kc, d)?,
    };
    let report = match run_case(&case, c.seed) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("invalid case: {e}");
            return Ok(ExitCode::from(3));
        }
    };
    let code = exit_code(std::slice::from_ref(&report));
    write_reports(c, std::slice::from_ref(&report))?;
    Ok(ExitCode::from(code as u8))
}

fn suite(config: Option<PathBuf>, c: &Common, print_default: bool) -> Result<ExitCode> {
    if print_default {
        let mut out = c.sink()?;
        write_json(&mut *out, &serde_json::to_value(default_suite())?)?;
        return Ok(ExitCode::SUCCESS);
    }
    let outcome = match config {
        Some(path) => run_suite(&path, c.out.as_deref(), c.workers),
        None => {
            let mut config = default_suite();
            config.seed = c.seed;
            run_config(&config, c.out.as_deref(), c.workers)
        }
    };
    for d in &outcome.diagnostics {
        eprintln!("{d}");
    }
    if c.out.is_none() && outcome.exit_code != 3 {
        write_summary(std::io::stdout().lock(), &outcome.reports)?;
    }
    Ok(ExitCode::from(outcome.exit_code as u8))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::EigRadial(c) => c
            .radial_domain()
            .and_then(|d| Ok(first_eigenvalue_scalar(c.p, &d, c.tol)?))
            .and_then(|r| radial_output(&c, &r))
            .map(|_| ExitCode::SUCCESS),
        Command::EigGrid { common, system } => eig_grid(&common, system).map(|_| ExitCode::SUCCESS),
        Command::EigSystem(c) => c
            .exponents()
            .and_then(|e| Ok(first_eigenpair_system(&e, &c.radial_domain()?, c.tol)?))
            .and_then(|r| radial_output(&c, &r))
            .map(|_| ExitCode::SUCCESS),
        Command::Cheeger(c) => cheeger(&c).map(|_| ExitCode::SUCCESS),
        Command::RearrangeCheck { common, trials } => rearrange_check(&common, trials),
        Command::Verify { theorem, common, case, manifold_curvature, diameter } => {
            verify(theorem, &common, case, manifold_curvature, diameter)
        }
        Command::RunSuite { config, common, print_default } => suite(config, &common, print_default),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
