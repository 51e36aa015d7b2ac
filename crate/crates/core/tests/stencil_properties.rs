use drp_core::stencil::{
    conventional_stencil, optimal_parameters, optimize_family, spectral_error, taylor_constraint_family, Extent,
    GridKind, Stencil, DEFAULT_WINDOW,
};
use proptest::prelude::*;

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// Applies the stencil to `x^k` on a unit grid and compares with the exact
/// `d`-th derivative at the evaluation point `x = 0`.
fn assert_moments(s: &Stencil) {
    let d = s.derivative_order();
    for k in 0..d + s.accuracy_order() {
        let got = s.apply(|x| x.powi(k as i32));
        let exact = if k == d { factorial(d) } else { 0.0 };
        let scale: f64 = s
            .positions()
            .zip(s.coefficients())
            .map(|(p, a)| (a * p.powi(k as i32)).abs())
            .sum::<f64>()
            .max(1.0);
        assert!((got - exact).abs() <= 1e-9 * scale, "{} k={k}: {got} vs {exact}", s.label());
    }
}

fn kinds() -> impl Strategy<Value = (u32, GridKind)> {
    prop_oneof![
        Just((2, GridKind::Collocated)),
        Just((1, GridKind::Collocated)),
        Just((1, GridKind::StaggeredForward)),
        Just((1, GridKind::StaggeredBackward)),
    ]
}

fn extent_for(kind: GridKind, width: u32) -> Extent {
    match kind {
        GridKind::Collocated => Extent::symmetric(width),
        _ => Extent::staggered(kind, width),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn conventional_stencils_satisfy_moments((d, kind) in kinds(), width in 1u32..6) {
        let s = conventional_stencil(d, kind, extent_for(kind, width)).unwrap();
        assert_moments(&s);
    }

    #[test]
    fn family_members_satisfy_moments(
        (d, kind) in kinds(),
        width in 2u32..6,
        params in prop::collection::vec(-3.0f64..3.0, 4),
    ) {
        let extent = extent_for(kind, width);
        let family = taylor_constraint_family(d, kind, extent, 2).unwrap();
        let p = &params[..family.num_free().min(params.len())];
        prop_assume!(p.len() == family.num_free());
        let s = family.member("member", p).unwrap();
        assert_moments(&s);
        prop_assert!(spectral_error(&family, p, DEFAULT_WINDOW).unwrap() >= 0.0);
    }

    #[test]
    fn optimum_beats_random_members((d, kind) in kinds(), width in 2u32..5, seed in prop::collection::vec(-1.0f64..1.0, 3)) {
        let extent = extent_for(kind, width);
        let family = taylor_constraint_family(d, kind, extent, 2).unwrap();
        let best = optimal_parameters(&family, DEFAULT_WINDOW).unwrap();
        let e_best = spectral_error(&family, &best, DEFAULT_WINDOW).unwrap();
        let perturbed: Vec<f64> = best.iter().zip(seed.iter().cycle()).map(|(b, s)| b + 0.05 * s).collect();
        let e = spectral_error(&family, &perturbed, DEFAULT_WINDOW).unwrap();
        prop_assert!(e_best <= e * (1.0 + 1e-12));
    }

    // Narrower windows with more free parameters fit the exact symbol down
    // to rounding noise, where the quadrature stability check cannot pass.
    #[test]
    fn optimized_stencils_keep_their_symmetry((d, kind) in kinds(), width in 2u32..5, window in 1.0f64..2.5) {
        let family = taylor_constraint_family(d, kind, extent_for(kind, width), 2).unwrap();
        let s = optimize_family(&family, window).unwrap();
        let offsets = s.offsets();
        let axis = match kind {
            GridKind::Collocated => 0,
            GridKind::StaggeredForward => 1,
            GridKind::StaggeredBackward => -1,
        };
        let sign = if d == 2 { 1.0 } else { -1.0 };
        for (&j, &a) in offsets.iter().zip(s.coefficients()) {
            let partner = s.coefficient_at(axis - j).unwrap();
            prop_assert!((a - sign * partner).abs() <= 1e-12);
        }
        prop_assert!(s.coefficients().iter().sum::<f64>().abs() <= 1e-12);
    }
}

#[test]
fn optimized_beats_a_hundred_members_and_the_conventional_stencil() {
    for (d, kind, extent) in [
        (2, GridKind::Collocated, Extent::symmetric(3)),
        (1, GridKind::StaggeredForward, Extent::new(2, 3)),
        (1, GridKind::StaggeredBackward, Extent::new(3, 2)),
    ] {
        let family = taylor_constraint_family(d, kind, extent, 4).unwrap();
        let opt = optimize_family(&family, DEFAULT_WINDOW).unwrap();
        let e_opt = opt.spectral_error(DEFAULT_WINDOW).unwrap();
        let conv = conventional_stencil(d, kind, extent).unwrap();
        assert!(e_opt < conv.spectral_error(DEFAULT_WINDOW).unwrap());
        let a1 = optimal_parameters(&family, DEFAULT_WINDOW).unwrap()[0];
        // Deterministic spread of members around the optimum.
        for k in 0..100 {
            let p = a1 + 0.5 * ((k as f64 * 0.618_033_988_75).fract() - 0.5);
            assert!(e_opt <= spectral_error(&family, &[p], DEFAULT_WINDOW).unwrap());
        }
    }
}

#[test]
fn type_a_and_type_b_are_reversed_negations() {
    for order in [2, 4, 6, 8] {
        let a = conventional_stencil(1, GridKind::StaggeredForward, Extent::staggered(GridKind::StaggeredForward, order / 2)).unwrap();
        let b = conventional_stencil(1, GridKind::StaggeredBackward, Extent::staggered(GridKind::StaggeredBackward, order / 2)).unwrap();
        let reversed: Vec<f64> = b.coefficients().iter().rev().map(|c| -c).collect();
        for (x, y) in reversed.iter().zip(a.coefficients()) {
            assert!((x - y).abs() < 1e-14);
        }
    }
}
