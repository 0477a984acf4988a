use proptest::prelude::*;

use quasieig::cheeger::{cheeger_bound_scalar, cheeger_radial};
use quasieig::geometry::{cn, sn};
use quasieig::grid::{build_grid, radial_grid, DomainSpec, Grid};
use quasieig::ode::StepControl;
use quasieig::rearrangement::{
    distribution_function, interpolant_distribution, matching_ball, random_bumps, rearrange, trial_rng,
};
use quasieig::shooting::{first_eigenvalue_scalar, integrate_radial_scalar};
use quasieig::variational::{evaluate_functionals, minimize_scalar, minimize_scalar_from, regularized_energy_gradient, MinimizeOptions};
use quasieig::{Exponents, RadialDomain, RadialManifold};

fn square(n: usize) -> Grid {
    build_grid(&DomainSpec::Rectangle { width: 1.0, height: 1.0 }, n).unwrap()
}

fn radial(dim: usize, n: usize) -> Grid {
    radial_grid(&RadialManifold::model(dim, 0.0).unwrap(), 0.0, 1.0, n).unwrap()
}

fn bumps(g: &Grid, seed: u64) -> Vec<f64> {
    random_bumps(g, &mut trial_rng(seed, 0))
}

fn integral(g: &Grid, f: &[f64]) -> f64 {
    g.weights().iter().zip(f).map(|(w, x)| w * x).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn warp_pythagorean_identity(k in -2.0f64..2.0, s in 0.01f64..0.99) {
        let t = if k > 0.0 { s * std::f64::consts::PI / k.sqrt() } else { 3.0 * s };
        let (a, b) = (sn(k, t).unwrap(), cn(k, t).unwrap());
        prop_assert!((b * b + k * a * a - 1.0).abs() < 1e-10 * (1.0 + k.abs() * a * a));
    }

    #[test]
    fn ball_volume_grows(dim in 1usize..5, k in -1.0f64..1.0, r in 0.1f64..1.4) {
        let m = RadialManifold::model(dim, k).unwrap();
        prop_assert!(m.ball_volume(r).unwrap() < m.ball_volume(r + 0.05).unwrap());
    }

    #[test]
    fn unit_coupling_scaling_normalizes(p in 1.2f64..4.0, q in 1.2f64..4.0, s in 0.1f64..0.9, b_raw in 1e-3f64..1e3) {
        let e = Exponents::with_alpha(p, q, s * p).unwrap();
        let (a, b) = e.unit_coupling_scaling(b_raw);
        prop_assert!((a.powf(e.alpha) * b.powf(e.beta) * b_raw - 1.0).abs() < 1e-9);
    }

    #[test]
    fn first_zero_moves_inward_as_lambda_grows(p in 1.3f64..3.5, dim in 1usize..4, l in 1.0f64..20.0) {
        let dom = RadialDomain::model(dim, 0.0, 1.0).unwrap();
        let c = StepControl::with_tolerance(1e-10);
        let a = integrate_radial_scalar(p, l, &dom, &c).unwrap();
        let b = integrate_radial_scalar(p, 1.5 * l, &dom, &c).unwrap();
        if let (Some(za), Some(zb)) = (a.first_zero, b.first_zero) {
            prop_assert!(zb < za);
        } else {
            prop_assert!(a.first_zero.is_none());
        }
        prop_assert!(a.momentum.iter().skip(1).all(|w| *w < 0.0) || a.first_zero.is_some());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn quotients_are_scale_invariant(seed in 0u64..1000, s in 0.05f64..20.0, t in 0.05f64..20.0, q in 1.3f64..3.5) {
        let g = square(24);
        let (u, v) = (bumps(&g, seed), bumps(&g, seed + 7));
        let e = Exponents::balanced(2.0, q).unwrap();
        let quotient = |u: &[f64], v: &[f64]| {
            let b = evaluate_functionals(u, v, &e, &g).unwrap().b;
            g.energy(u, e.p).powf(e.alpha / e.p) * g.energy(v, e.q).powf(e.beta / e.q) / b
        };
        let su: Vec<f64> = u.iter().map(|x| s * x).collect();
        let tv: Vec<f64> = v.iter().map(|x| t * x).collect();
        let (l0, l1) = (quotient(&u, &v), quotient(&su, &tv));
        prop_assert!((l0 - l1).abs() <= 1e-10 * l0);
        let rayleigh = |u: &[f64]| g.energy(u, q) / g.lp_power(u, q);
        prop_assert!((rayleigh(&u) - rayleigh(&su)).abs() <= 1e-10 * rayleigh(&u));
    }

    #[test]
    fn energy_gradient_matches_central_differences(seed in 0u64..1000, p in 1.1f64..4.0) {
        let g = square(16);
        let u = bumps(&g, seed);
        let d = bumps(&g, seed + 1);
        let eps = 1e-2;
        let (_, grad) = regularized_energy_gradient(&g, &u, p, eps).unwrap();
        let h = 1e-6;
        let shifted = |sign: f64| {
            let w: Vec<f64> = u.iter().zip(&d).map(|(a, b)| a + sign * h * b).collect();
            regularized_energy_gradient(&g, &w, p, eps).unwrap().0
        };
        let fd = (shifted(1.0) - shifted(-1.0)) / (2.0 * h);
        let an: f64 = grad.iter().zip(&d).map(|(a, b)| a * b).sum();
        prop_assert!((fd - an).abs() <= 1e-6 * (1.0 + an.abs()), "{} {}", fd, an);
    }

    #[test]
    fn descent_never_raises_the_quotient(seed in 0u64..1000, p in 1.3f64..3.0) {
        let g = square(20);
        let u = bumps(&g, seed);
        let start = g.energy(&u, p) / g.lp_power(&u, p);
        let r = minimize_scalar_from(p, &g, u, &MinimizeOptions::default()).unwrap();
        prop_assert!(r.lambda <= start * (1.0 + 1e-12));
    }

    #[test]
    fn rearrangement_preserves_integral_and_levels(seed in 0u64..1000) {
        let g = square(32);
        let target = matching_ball(&g, 512).unwrap();
        let f = bumps(&g, seed);
        let star = rearrange(&f, &g, &target).unwrap();
        let (a, b) = (integral(&g, &f), integral(&target, &star));
        prop_assert!((a - b).abs() <= 1e-3 * a, "{} {}", a, b);
        let top = f.iter().cloned().fold(0.0, f64::max);
        let levels: Vec<f64> = (1..8).map(|k| top * k as f64 / 8.0).collect();
        let source = interpolant_distribution(&f, &g, &levels).unwrap();
        let cell = target.weights().iter().cloned().fold(0.0, f64::max);
        for (t, vs) in levels.iter().zip(source) {
            let vt = distribution_function(&star, &target, *t).unwrap();
            prop_assert!((vt - vs).abs() <= 2.0 * cell, "t {} {} {}", t, vt, vs);
        }
    }

    #[test]
    fn rearrangement_is_radial_nonincreasing_and_monotone(seed in 0u64..1000, lift in 0.0f64..0.5) {
        let g = square(32);
        let target = matching_ball(&g, 128).unwrap();
        let f = bumps(&g, seed);
        let h: Vec<f64> = f.iter().zip(bumps(&g, seed + 3)).map(|(a, b)| a + lift * b).collect();
        let (fs, hs) = (rearrange(&f, &g, &target).unwrap(), rearrange(&h, &g, &target).unwrap());
        prop_assert!(fs.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        let top = h.iter().cloned().fold(0.0, f64::max);
        prop_assert!(fs.iter().zip(&hs).all(|(a, b)| *a <= b + 1e-3 * top));
    }

    #[test]
    fn eigenvalues_dominate_the_cheeger_bound(p in 1.1f64..3.0, dim in 1usize..4, r0 in 0.5f64..2.0, k in -1.0f64..0.0) {
        let dom = RadialDomain::model(dim, k, r0).unwrap();
        let l = first_eigenvalue_scalar(p, &dom, 1e-8).unwrap().result.lambda;
        let h = cheeger_radial(&dom).h;
        prop_assert!(l >= cheeger_bound_scalar(h, p), "{} {}", l, h);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn grid_error_shrinks_under_refinement(p in 1.3f64..3.0, dim in 1usize..4) {
        let exact = first_eigenvalue_scalar(p, &RadialDomain::model(dim, 0.0, 1.0).unwrap(), 1e-10).unwrap().result.lambda;
        let err = |n: usize| (minimize_scalar(p, &radial(dim, n), &MinimizeOptions::default()).unwrap().lambda - exact).abs();
        let (coarse, fine) = (err(51), err(101));
        prop_assert!(fine < coarse, "{} {}", coarse, fine);
        prop_assert!(fine < 1e-2 * exact);
    }
}
