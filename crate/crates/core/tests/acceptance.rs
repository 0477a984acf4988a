//! Acceptance criteria, one line per check. Lines go straight to stdout so
//! the table shows up without `--nocapture`.

use std::f64::consts::PI;
use std::io::Write;

use quasieig::grid::{build_grid, radial_grid, DomainSpec, Grid};
use quasieig::harness::{default_suite, run_config, write_summary, ManifoldSpec, Report, Verdict, VerifyCase};
use quasieig::rearrangement::{
    calibrate_hardy_littlewood, calibrate_polya_szego, hardy_littlewood_campaign, matching_ball,
    polya_szego_campaign, random_bumps, rearrange, trial_rng,
};
use quasieig::shooting::{first_eigenpair_system, first_eigenvalue_scalar};
use quasieig::variational::{minimize_scalar, minimize_system, MinimizeOptions};
use quasieig::{Exponents, RadialDomain, RadialManifold};

/// Lines expected to fail. The tabulated value 7.0740 for the p = 3 interval
/// disagrees with the closed form `(p-1)(2π/(p sin(π/p))/L)^p = 3.536095`,
/// which both solvers reproduce.
const KNOWN_FAILURES: &[&str] = &["1d"];

struct Table {
    rows: Vec<(String, bool, String)>,
}

/// Bypasses the test harness's output capture.
fn emit(line: String) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

impl Table {
    fn check(&mut self, id: &str, what: &str, pass: bool, detail: String) {
        emit(format!("[{}] {id:<4} {what}: {detail}", if pass { "PASS" } else { "FAIL" }));
        self.rows.push((id.to_string(), pass, detail));
    }

    fn close(&mut self, id: &str, what: &str, got: f64, want: f64, tol: f64) {
        let err = (got - want).abs();
        self.check(id, what, err <= tol, format!("got {got:.9}, want {want:.9} +- {tol:.1e} (err {err:.2e})"));
    }
}

/// First zero of `J_0` from its power series, by bisection on [2, 3].
fn bessel_j0_zero() -> f64 {
    let j0 = |x: f64| {
        let (mut term, mut sum) = (1.0, 1.0);
        for k in 1..60 {
            term *= -(x * x / 4.0) / (k * k) as f64;
            sum += term;
        }
        sum
    };
    let (mut lo, mut hi) = (2.0, 3.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if j0(lo) * j0(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn scalar(p: f64, dim: usize, k: f64, r0: f64) -> f64 {
    first_eigenvalue_scalar(p, &RadialDomain::model(dim, k, r0).unwrap(), 1e-10).unwrap().result.lambda
}

fn system(e: &Exponents, dim: usize, r0: f64) -> f64 {
    first_eigenpair_system(e, &RadialDomain::model(dim, 0.0, r0).unwrap(), 1e-10).unwrap().result.lambda
}

fn radial(dim: usize, r0: f64, n: usize) -> Grid {
    radial_grid(&RadialManifold::model(dim, 0.0).unwrap(), 0.0, r0, n).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

fn solver_exactness(t: &mut Table) {
    t.close("1a", "p=2 interval of length pi, cosine oracle", scalar(2.0, 1, 0.0, PI / 2.0), 1.0, 1e-6);
    let j = bessel_j0_zero();
    t.close("1b", "p=2 unit disk, Bessel-zero oracle", scalar(2.0, 2, 0.0, 1.0), j * j, 1e-3);
    for dim in [2, 3] {
        let got = scalar(2.0, dim, 1.0, PI / 2.0);
        t.close(&format!("1c{dim}"), &format!("p=2 hemisphere N={dim}, cos t oracle"), got, dim as f64, 1e-4);
    }
    let l3 = scalar(3.0, 1, 0.0, 1.0);
    t.close("1d", "p=3 interval of length 2 against tabulated 7.0740", l3, 7.0740, 1e-3);
    let p: f64 = 3.0;
    let closed = (p - 1.0) * (2.0 * PI / (p * (PI / p).sin()) / 2.0).powf(p);
    t.close("1e", "p=3 interval of length 2, first-integral closed form", l3, closed, 1e-6);
}

fn diagonal_reduction(t: &mut Table) {
    let opts = MinimizeOptions::default();
    let disk = build_grid(&DomainSpec::Disk { radius: 1.0 }, 64).unwrap();
    for p in [1.5, 2.0, 3.0] {
        let e = Exponents::diagonal(p).unwrap();
        for (dim, name) in [(1, "interval"), (2, "disk")] {
            let (s, y) = (scalar(p, dim, 0.0, 1.0), system(&e, dim, 1.0));
            t.check(
                "2s",
                &format!("shooting system = scalar, {name} p={p}"),
                rel(s, y) <= 1e-4,
                format!("scalar {s:.8} system {y:.8} rel {:.2e} (tol 1e-4)", rel(s, y)),
            );
            let g = radial(dim, 1.0, 401);
            let (gs, gy) = (minimize_scalar(p, &g, &opts).unwrap().lambda, minimize_system(&e, &g, &opts).unwrap().lambda);
            t.check(
                "2g",
                &format!("radial grid system = scalar, {name} p={p}"),
                rel(gs, gy) <= 2e-2,
                format!("scalar {gs:.8} system {gy:.8} rel {:.2e} (tol 2e-2)", rel(gs, gy)),
            );
        }
        let (gs, gy) = (minimize_scalar(p, &disk, &opts).unwrap().lambda, minimize_system(&e, &disk, &opts).unwrap().lambda);
        t.check(
            "2g",
            &format!("planar grid system = scalar, disk p={p}"),
            rel(gs, gy) <= 2e-2,
            format!("scalar {gs:.8} system {gy:.8} rel {:.2e} (tol 2e-2)", rel(gs, gy)),
        );
    }
}

fn cross_solver(t: &mut Table, reports: &[Report]) {
    let cheng: Vec<&Report> = reports.iter().filter(|r| matches!(r.case, VerifyCase::Cheng(_))).collect();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    let mut all = true;
    for r in &cheng {
        if let Some(c) = r.checks.iter().find(|c| c.name == "cross_solver") {
            count += 1;
            all &= c.passed;
            let grid = r.quantities.iter().find(|q| q.name == "lambda_manifold_grid").unwrap().value;
            worst = worst.max(rel(r.lambda_a.unwrap(), grid));
        }
    }
    let hyp = cheng.iter().filter(|r| r.verdict == Verdict::HypothesisViolated).count();
    t.check(
        "3",
        "shooting vs radial grid on sweep geodesic balls",
        all && count + hyp == cheng.len(),
        format!("{count} cases, worst relative gap {worst:.2e} (tol 2e-2)"),
    );
    let opts = MinimizeOptions::default();
    let mut gap: f64 = 0.0;
    for (dim, r0) in [(1, 1.0), (2, 1.0)] {
        for p in [2.0, 1.5, 1.2, 1.1, 1.05] {
            let s = scalar(p, dim, 0.0, r0);
            let g = minimize_scalar(p, &radial(dim, r0, 401), &opts).unwrap().lambda;
            gap = gap.max(rel(s, g));
        }
    }
    t.check("3", "shooting vs radial grid on the Cheeger ladders", gap <= 2e-2, format!("worst relative gap {gap:.2e} (tol 2e-2)"));
}

fn cheng_checks(t: &mut Table, reports: &[Report]) {
    let strict: Vec<&Report> = reports
        .iter()
        .filter(|r| match &r.case {
            VerifyCase::Cheng(c) => {
                !c.expect_equality
                    && matches!(c.manifold, ManifoldSpec::SpaceForm { curvature } if curvature > c.model_curvature)
            }
            _ => false,
        })
        .collect();
    let comparison = |r: &Report| r.checks.iter().find(|c| c.name == "model_minus_manifold").map(|c| c.margin);
    let min_margin = strict.iter().filter_map(|r| comparison(r)).fold(f64::INFINITY, f64::min);
    let passed = strict
        .iter()
        .filter(|r| r.verdict == Verdict::Pass && comparison(r).map_or(false, |m| m >= 0.0))
        .count();
    t.check(
        "4a",
        "comparison margins on the strict sweep",
        strict.len() == 72 && passed == 72,
        format!("{passed}/{} nonnegative, smallest margin {min_margin:.4e}", strict.len()),
    );
    let eq: Vec<&Report> = reports
        .iter()
        .filter(|r| matches!(&r.case, VerifyCase::Cheng(c) if c.expect_equality))
        .collect();
    let worst = eq
        .iter()
        .map(|r| (r.lambda_b.unwrap() - r.lambda_a.unwrap()).abs() / (2.0 * 1e-8 * r.lambda_b.unwrap()))
        .fold(0.0f64, f64::max);
    t.check(
        "4b",
        "equality cases within twice the solver tolerance",
        !eq.is_empty() && eq.iter().all(|r| r.verdict == Verdict::Pass) && worst <= 1.0,
        format!("{} cases, worst |margin| / (2 tol scale) = {worst:.3}", eq.len()),
    );
    let violating: Vec<&Report> = reports
        .iter()
        .filter(|r| matches!(&r.case, VerifyCase::Cheng(c) if matches!(c.manifold, ManifoldSpec::SpaceForm { curvature } if curvature < c.model_curvature)))
        .collect();
    t.check(
        "4c",
        "hypothesis-violating density",
        !violating.is_empty() && violating.iter().all(|r| r.verdict == Verdict::HypothesisViolated),
        format!("verdicts {:?}", violating.iter().map(|r| r.verdict.as_str()).collect::<Vec<_>>()),
    );
}

fn faber_krahn(t: &mut Table, reports: &[Report]) {
    let fk: Vec<&Report> = reports.iter().filter(|r| matches!(r.case, VerifyCase::FaberKrahn(_))).collect();
    let square = fk
        .iter()
        .find(|r| matches!(&r.case, VerifyCase::FaberKrahn(c) if c.expected_margin.is_some()))
        .unwrap();
    let j = bessel_j0_zero();
    let (ls, lb) = (square.lambda_a.unwrap(), square.lambda_b.unwrap());
    t.close("5a", "square eigenvalue vs 2 pi^2 (1%)", ls, 2.0 * PI * PI, 0.01 * 2.0 * PI * PI);
    t.close("5b", "equal-area disk eigenvalue vs pi j^2 (1%)", lb, PI * j * j, 0.01 * PI * j * j);
    t.close("5c", "square minus disk gap", ls - lb, 2.0 * PI * PI - PI * j * j, 5e-2);
    let others: Vec<&&Report> = fk.iter().filter(|r| !std::ptr::eq(**r, *square)).collect();
    let ok = others.iter().all(|r| r.verdict == Verdict::Pass);
    let min = others.iter().filter_map(|r| r.margin.map(|m| m + r.tolerance.unwrap())).fold(f64::INFINITY, f64::min);
    t.check("5d", "other equal-volume margins", ok, format!("{} cases, smallest margin + tolerance {min:.4e}", others.len()));
}

fn cheeger(t: &mut Table, reports: &[Report]) {
    for r in reports.iter().filter(|r| matches!(r.case, VerifyCase::CheegerBound(_))) {
        let bounds: Vec<_> = r.checks.iter().filter(|c| c.name.contains("bound")).collect();
        let min = bounds.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min);
        t.check(
            "6a",
            &format!("Cheeger bounds along the ladder, {}", r.case.params()),
            r.verdict == Verdict::Pass && bounds.len() == 10 && min >= 0.0,
            format!("h {:.6}, smallest bound margin {min:.4e}", r.h.unwrap_or(f64::NAN)),
        );
        if let VerifyCase::CheegerBound(c) = &r.case {
            if let Some(x) = c.expected_h {
                t.close("6b", "level-set Cheeger estimate on the unit square", r.h.unwrap(), 2.0 + PI.sqrt(), x.tol);
            }
        }
    }
}

fn limits(t: &mut Table, reports: &[Report]) {
    for r in reports.iter().filter(|r| matches!(r.case, VerifyCase::LimitP1(_))) {
        let h = r.h.unwrap();
        let l = r.quantities.iter().find(|q| q.name == "extrapolated_limit").map_or(f64::NAN, |q| q.value);
        let monotone = r.checks.iter().any(|c| c.name == "monotone_ladder" && c.passed);
        t.check(
            "7",
            &format!("p -> 1 extrapolation, {}", r.case.params()),
            r.verdict == Verdict::Pass && monotone && (l - h).abs() <= 0.05 * h,
            format!("limit {l:.6} vs h {h:.6} (rel err {:.2e}, tol 5e-2)", (l - h).abs() / h),
        );
    }
}

fn rearrangement(t: &mut Table) {
    let square = |n| build_grid(&DomainSpec::Rectangle { width: 1.0, height: 1.0 }, n).unwrap();
    let g = square(64);
    let target = matching_ball(&g, 256).unwrap();
    let integral = |g: &Grid, f: &[f64]| g.weights().iter().zip(f).map(|(w, x)| w * x).sum::<f64>();
    let mut worst: f64 = 0.0;
    for trial in 0..50 {
        let f = random_bumps(&g, &mut trial_rng(11, trial));
        let star = rearrange(&f, &g, &target).unwrap();
        worst = worst.max(rel(integral(&g, &f), integral(&target, &star)));
    }
    t.check("8a", "equimeasurability (integrals of f and f*)", worst <= 1e-3, format!("worst relative gap {worst:.2e} over 50 trials"));

    let mut ps_tol = Vec::new();
    let mut hl_tol = Vec::new();
    for n in [32, 64, 128] {
        let g = square(n);
        let target = matching_ball(&g, 4 * n).unwrap();
        ps_tol.push(calibrate_polya_szego(&g, &target, 2.0).unwrap());
        hl_tol.push(calibrate_hardy_littlewood(&g, &target).unwrap());
    }
    for (name, tol) in [("Polya-Szego", &ps_tol), ("Hardy-Littlewood", &hl_tol)] {
        let ratios: Vec<f64> = tol.windows(2).map(|w| w[0] / w[1]).collect();
        t.check(
            "8b",
            &format!("{name} discretization tolerance shrinks under refinement"),
            ratios.iter().all(|r| *r >= 1.5),
            format!("tol at n=32,64,128: {:.3e} {:.3e} {:.3e}; ratios {:.2} {:.2}", tol[0], tol[1], tol[2], ratios[0], ratios[1]),
        );
    }

    let (tol_ps, tol_hl) = (ps_tol[1], hl_tol[1]);
    for p in [1.5, 2.0, 3.0] {
        let tol = if p == 2.0 { tol_ps } else { calibrate_polya_szego(&g, &target, p).unwrap() };
        let rows = polya_szego_campaign(&g, &target, &[p], 200, 2024).unwrap();
        let min = rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
        t.check(
            "8c",
            &format!("Polya-Szego over 200 seeded trials, p={p}"),
            rows.len() == 200 && min >= -tol,
            format!("smallest margin {min:.4e}, tol_disc {tol:.3e}"),
        );
    }
    let rows = hardy_littlewood_campaign(&g, &target, 200, 2024).unwrap();
    let min = rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    t.check(
        "8d",
        "Hardy-Littlewood over 200 seeded trials",
        rows.len() == 200 && min >= -tol_hl,
        format!("smallest margin {min:.4e}, tol_disc {tol_hl:.3e}"),
    );
}

fn summary_bytes(reports: &[Report]) -> Vec<u8> {
    let mut out = Vec::new();
    write_summary(&mut out, reports).unwrap();
    out
}

#[test]
fn acceptance_criteria() {
    emit(String::new());
    let mut t = Table { rows: Vec::new() };
    solver_exactness(&mut t);
    diagonal_reduction(&mut t);

    let config = default_suite();
    let first = run_config(&config, None, 1);
    t.check(
        "S",
        "default suite exit code",
        first.exit_code == 0,
        format!("exit {} over {} cases", first.exit_code, first.reports.len()),
    );
    cross_solver(&mut t, &first.reports);
    cheng_checks(&mut t, &first.reports);
    faber_krahn(&mut t, &first.reports);
    cheeger(&mut t, &first.reports);
    limits(&mut t, &first.reports);
    rearrangement(&mut t);

    let second = run_config(&config, None, 2);
    let (a, b) = (summary_bytes(&first.reports), summary_bytes(&second.reports));
    t.check("9", "repeated suite runs give identical CSV summaries", a == b, format!("{} bytes each", a.len()));

    let failed: Vec<&str> = t.rows.iter().filter(|r| !r.1).map(|r| r.0.as_str()).collect();
    emit(format!(
        "{} checks, {} passed, {} failed {:?} (expected failures {:?})",
        t.rows.len(),
        t.rows.len() - failed.len(),
        failed.len(),
        failed,
        KNOWN_FAILURES
    ));
    assert_eq!(failed, KNOWN_FAILURES, "acceptance failures differ from the expected set");
}
