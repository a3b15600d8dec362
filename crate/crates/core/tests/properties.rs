use gmapprox::approx::{centred_cubic_root, f2_analytic, f4_from_moments, MomentCurves, ROOT_TOL};
use gmapprox::bounds::{d2_closed, d2_generic};
use gmapprox::costs::estimate_cost;
use gmapprox::drift::{accumulated_moments_mc, Distribution, DriftModel, DriftPaths};
use gmapprox::sde::{apply_i, apply_i_inv};
use gmapprox::timebase::{Curve, TimeGrid};
use proptest::prelude::*;

fn model_strategy() -> impl Strategy<Value = DriftModel> {
    // rates kept away from θ = 1.5 and 2θ = 3
    let lambda = prop_oneof![0.3..1.2f64, 1.8..2.7f64, 3.3..5.0f64];
    (lambda, 0usize..5, 0.5..3.0f64).prop_map(|(lambda, kind, rate)| match kind {
        0 => DriftModel::SingleShot { lambda },
        1 => DriftModel::Poisson { lambda },
        2 => DriftModel::CompoundPoisson {
            lambda,
            jump: Distribution::Exponential { rate },
        },
        3 => DriftModel::BrownianDrift { lambda },
        _ => DriftModel::OuDrift {
            lambda,
            sigma_u: rate,
            u0: 1.0,
        },
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bound_is_nonnegative_and_forms_agree(m in model_strategy()) {
        let g = TimeGrid::new(3.0, 1e-3).unwrap();
        let a = d2_generic(&m, 1.5, &g).unwrap();
        let b = d2_closed(&m, 1.5, &g).unwrap();
        prop_assert_eq!(a.d2.first(), 0.0);
        prop_assert!(b.d2.values().iter().all(|&v| v >= 0.0));
        let scale = b.d2.values().iter().fold(1.0_f64, |s, v| s.max(v.abs()));
        prop_assert!(a.d2.sup_distance(&b.d2).unwrap() < 1e-5 * scale);
    }

    #[test]
    fn round_trip_through_the_accumulation_map(a in -2.0..2.0f64, w in 0.1..4.0f64, c in -1.0..1.0f64) {
        let g = TimeGrid::new(5.0, 1e-3).unwrap();
        let f = Curve::from_fn(g, |t| a * (w * t).sin() + c).unwrap();
        let back = apply_i_inv(&apply_i(&f, 1.5).unwrap(), 1.5).unwrap();
        prop_assert!(back.sup_distance(&f).unwrap() < 1e-4 * (1.0 + w * w));
    }

    #[test]
    fn centred_root_rises_with_skew(m1 in -3.0..3.0f64, c2 in 0.0..2.0f64, c3 in -2.0..2.0f64, dc in 1e-3..1.0f64) {
        let lo = centred_cubic_root(m1, c2, c3, ROOT_TOL).unwrap();
        let hi = centred_cubic_root(m1, c2, c3 + dc, ROOT_TOL).unwrap();
        prop_assert!(hi > lo);
        // c3 = 0 is the symmetric case
        prop_assert_eq!(centred_cubic_root(m1, c2, 0.0, ROOT_TOL).unwrap(), m1);
    }
}

#[test]
fn fitted_quartic_curve_beats_the_mean_on_its_own_cost() {
    // in-sample: F4 from the same ensemble minimizes J4 node by node
    let g = TimeGrid::new(5.0, 1e-2).unwrap();
    let m = DriftModel::SingleShot { lambda: 2.0 };
    let paths = DriftPaths::new(m.clone(), 1.5, g, 2_000, 11).unwrap();
    let f2 = MomentCurves::from_source(&paths).unwrap().m1;
    let f4 = f4_from_moments(&MomentCurves::from_source(&paths).unwrap(), 1.5, ROOT_TOL).unwrap();
    let (j4_f4, _) = estimate_cost(4, &paths, &f4.accumulated).unwrap();
    let (j4_f2, _) = estimate_cost(4, &paths, &f2).unwrap();
    let (j2_f4, _) = estimate_cost(2, &paths, &f4.accumulated).unwrap();
    let (j2_f2, _) = estimate_cost(2, &paths, &f2).unwrap();
    assert!(j4_f4 < j4_f2, "{j4_f4} vs {j4_f2}");
    assert!(j2_f2 < j2_f4, "{j2_f2} vs {j2_f4}");
}

#[test]
fn sample_mean_tracks_the_closed_form_mean() {
    let g = TimeGrid::new(5.0, 1e-2).unwrap();
    let m = DriftModel::CompoundPoisson {
        lambda: 2.0,
        jump: Distribution::Gamma { rate: 2.0, shape: 2.0 },
    };
    let mc = accumulated_moments_mc(&m, 1.5, &g, 4_000, 5).unwrap();
    let f2 = f2_analytic(&m, 1.5, &g).unwrap();
    for k in (0..g.len()).step_by(50) {
        let (a, b, se) = (mc.m1.values()[k], f2.accumulated.values()[k], mc.se1.values()[k]);
        assert!(
            (a - b).abs() <= 4.0 * se + 1e-3 * b.abs(),
            "node {k}: {a} vs {b} ± {se}"
        );
    }
}
