//! Property tests across modules. Closed forms used as oracles are computed
//! here from their definitions, not through the library.

use std::sync::Arc;

use approx::assert_relative_eq;
use gaugelab::completeness::{is_strongly_nested, LpBallFamily};
use gaugelab::derived::{bar_eval, luxemburg_eval, DerivedGauge};
use gaugelab::gauge::{
    delta_at, lattice_convexity_constant, p_combination, verify_modular_axioms, LatticeMode,
    LatticeOptions, ModularOptions, SamplePool,
};
use gaugelab::orlicz::{default_slice_grid, doubling_constant};
use gaugelab::solver::SolverParams;
use gaugelab::{
    Exponent, ExtReal, Gauge, MeasureSpace, MusielakOrliczFunction, MusielakOrliczGauge,
    OrliczFunction, PlusFunction, QuasiNormSpace,
};
use proptest::prelude::*;

fn weights(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, n).prop_map(|v| v.into_iter().map(f64::exp2).collect())
}

/// Nonnegative finite values with some exact zeros, spread over `2^±10`.
fn values(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(
        prop_oneof![1 => Just(0.0), 4 => (-10.0f64..10.0).prop_map(f64::exp2)],
        n,
    )
}

fn space_and_values() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..=6).prop_flat_map(|n| (weights(n), values(n)))
}

fn power_gauge(weights: &[f64], p: f64) -> MusielakOrliczGauge {
    MusielakOrliczGauge::new(
        MeasureSpace::new(weights.to_vec()).unwrap(),
        MusielakOrliczFunction::Shared(OrliczFunction::power(p)),
    )
    .unwrap()
}

fn plus(values: &[f64]) -> PlusFunction {
    PlusFunction::from_f64s(values).unwrap()
}

fn orlicz_function() -> impl Strategy<Value = OrliczFunction> {
    prop_oneof![
        (0.25f64..4.0).prop_map(OrliczFunction::power),
        (0.25f64..4.0, 0.5f64..4.0).prop_map(|(p, cap)| OrliczFunction::CappedPower { p, cap }),
        Just(OrliczFunction::BoundedRational),
        (0.5f64..3.0, 0.25f64..4.0).prop_map(|(split, p)| OrliczFunction::glue(
            split,
            // a hair below so rounding cannot make the glue jump down
            OrliczFunction::scaled(
                split.powf(p - 1.0) * (1.0 - 1e-12),
                OrliczFunction::power(1.0)
            ),
            OrliczFunction::power(p),
        )),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn luxemburg_of_a_power_modular_is_the_weighted_lp_norm(
        (w, f) in space_and_values(),
        p in 0.25f64..4.0,
    ) {
        let g = power_gauge(&w, p);
        let oracle = w.iter().zip(&f).map(|(w, x)| w * x.powf(p)).sum::<f64>().powf(1.0 / p);
        let value = luxemburg_eval(&g, &plus(&f), &SolverParams::default()).unwrap().to_f64();
        if oracle == 0.0 {
            prop_assert_eq!(value, 0.0);
        } else {
            prop_assert!((value - oracle).abs() <= 1e-9 * oracle, "{} vs {}", value, oracle);
        }
    }

    #[test]
    fn luxemburg_is_homogeneous(
        (w, f) in space_and_values(),
        function in orlicz_function(),
        lambda in (-6.0f64..6.0).prop_map(f64::exp2),
    ) {
        let g = MusielakOrliczGauge::new(
            MeasureSpace::new(w).unwrap(),
            MusielakOrliczFunction::Shared(function),
        ).unwrap();
        let solver = SolverParams::default();
        let f = plus(&f);
        let a = luxemburg_eval(&g, &f, &solver).unwrap().to_f64();
        let b = luxemburg_eval(&g, &f.scale(lambda), &solver).unwrap().to_f64();
        // bounded modulars saturate in floating point, so tiny values are zero
        let floor = 1e-12 * f.to_f64s().into_iter().fold(0.0, f64::max) * lambda.max(1.0);
        prop_assert!(
            (b - lambda * a).abs() <= 1e-9 * b.max(lambda * a) || (b <= floor && lambda * a <= floor),
            "{} vs {}", b, lambda * a
        );
    }

    #[test]
    fn bar_dominates_below_one((w, f) in space_and_values(), p in 0.25f64..4.0) {
        let g = power_gauge(&w, p);
        let solver = SolverParams::default();
        let f = plus(&f);
        let bar = bar_eval(&g, &f, &solver).unwrap();
        let lux = luxemburg_eval(&g, &f, &solver).unwrap();
        if bar < ExtReal::ONE {
            let bound = bar.to_f64() * (1.0 + 1e-9);
            prop_assert!(g.eval(&f).to_f64() <= bound && lux.to_f64() <= bound);
        }
    }

    #[test]
    fn doubling_bounds_the_homogeneity_function(
        function in orlicz_function(),
        w in weights(3),
        t in (0.1f64..8.0).prop_map(f64::exp2),
    ) {
        let m = MusielakOrliczFunction::Shared(function);
        let d = doubling_constant(&m, 3, &default_slice_grid());
        let space = MeasureSpace::new(w).unwrap();
        let g = MusielakOrliczGauge::new(space.clone(), m).unwrap();
        let pool = SamplePool::standard(&space, 1);
        if let (Some(d), Some(v)) = (d.constant, delta_at(&g, t, &pool).unwrap().value()) {
            let bound = d.powf(t.log2().ceil());
            prop_assert!(v <= ExtReal::of(bound * (1.0 + 1e-9)), "Δ({}) = {:?} > {}", t, v, bound);
        }
    }

    #[test]
    fn quasi_triangle_inequality_with_the_analytic_modulus(
        p in 0.2f64..1.0,
        x in prop::collection::vec(-100.0f64..100.0, 3),
        y in prop::collection::vec(-100.0f64..100.0, 3),
    ) {
        let q = QuasiNormSpace::lp(3, p).unwrap();
        let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let kappa = 2f64.powf(1.0 / p - 1.0);
        prop_assert!(q.norm(&sum) <= kappa * (q.norm(&x) + q.norm(&y)) * (1.0 + 1e-12));
    }

    #[test]
    fn strong_nesting_implies_monotone(
        p in prop_oneof![Just(1.0), Just(0.5), Just(0.25)],
        factors in prop::collection::vec(1.0f64..12.0, 2..8),
        seed in any::<u64>(),
    ) {
        let q = QuasiNormSpace::lp(2, p).unwrap();
        let fam = LpBallFamily::new(q);
        let mut radii = vec![1.0];
        for f in &factors {
            let last = *radii.last().unwrap();
            radii.push(last / f);
        }
        let report = is_strongly_nested(&fam, &radii, 50, seed).unwrap();
        if report.holds {
            prop_assert!(report.monotone);
        }
        // the schedule ratio 2κ is exactly the threshold
        let kappa = 2f64.powf(1.0 / p - 1.0);
        prop_assert_eq!(report.holds, factors.iter().all(|f| *f >= 2.0 * kappa));
    }
}

#[test]
fn variable_exponent_lattice_constants_are_one() {
    let space = MeasureSpace::new(vec![1.0, 0.25, 3.0, 0.5, 2.0]).unwrap();
    let exponents = [0.4, 0.9, 1.5, 2.5, 6.0];
    let g = MusielakOrliczGauge::new(
        space,
        MusielakOrliczFunction::VariableExponent(
            exponents.map(|p| Exponent::new(p).unwrap()).to_vec(),
        ),
    )
    .unwrap();
    for seed in 0..4 {
        let opts = LatticeOptions { trials: 300, seed };
        let convex = lattice_convexity_constant(&g, 0.4, LatticeMode::Convex, &opts).unwrap();
        let concave = lattice_convexity_constant(&g, 6.0, LatticeMode::Concave, &opts).unwrap();
        assert_relative_eq!(convex.constant, 1.0, max_relative = 1e-9);
        assert_relative_eq!(concave.constant, 1.0, max_relative = 1e-9);
    }
    // above p_min convexity fails: halves of two disjoint unit-modular bumps
    // on the atoms with exponents 0.4 and 0.9
    let bump = |i: usize, value: f64| {
        let mut v = [0.0; 5];
        v[i] = value;
        plus(&v)
    };
    let (a, b) = (bump(0, 1.0), bump(1, 4f64.powf(1.0 / 0.9)));
    assert_relative_eq!(g.eval(&a).to_f64(), 1.0, max_relative = 1e-12);
    assert_relative_eq!(g.eval(&b).to_f64(), 1.0, max_relative = 1e-12);
    let h = p_combination(1.0, &[(0.5, a), (0.5, b)]);
    let oracle = 0.5f64.powf(0.4) + 0.5f64.powf(0.9);
    assert_relative_eq!(g.eval(&h).to_f64(), oracle, max_relative = 1e-12);
    assert!(oracle > 1.2);
}

#[test]
fn derived_gauges_pass_the_modular_verifier() {
    let space = MeasureSpace::new(vec![1.0, 0.5, 2.0]).unwrap();
    let opts = ModularOptions {
        trials: 150,
        seed: 3,
        ..ModularOptions::default()
    };
    for p in [0.5, 2.0] {
        let base: Arc<dyn Gauge> = Arc::new(
            MusielakOrliczGauge::new(
                space.clone(),
                MusielakOrliczFunction::Shared(OrliczFunction::power(p)),
            )
            .unwrap(),
        );
        for derived in [
            DerivedGauge::luxemburg(base.clone()),
            DerivedGauge::bar(base.clone()),
        ] {
            let r = verify_modular_axioms(&derived, &opts);
            assert!(
                r.passed(),
                "{}: {:?}",
                derived.name(),
                r.report.failures().collect::<Vec<_>>()
            );
        }
    }
}
