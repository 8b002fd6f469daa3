use std::sync::Arc;

use illposed_core::{
    build_factors, fixed_point, iterate_closed_form, parabolic_forward, EllipticProblem, HyperbolicProblem,
    ParabolicProblem, ProblemSpec, SpectralVec, SpectrumModel,
};
use proptest::prelude::*;

fn model(ls: &[f64]) -> Arc<SpectrumModel<f64>> {
    SpectrumModel::custom(ls.to_vec()).unwrap()
}

fn instance() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>, f64)> {
    (1usize..16).prop_flat_map(|n| {
        (
            prop::collection::vec(0.3f64..4.0, n),
            prop::collection::vec(-1.0f64..1.0, n),
            prop::collection::vec(-1.0f64..1.0, n),
            0.2f64..1.0,
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn elliptic_iterates_reach_the_neumann_trace((ls, u0, v0, t) in instance()) {
        let m = model(&ls);
        // Cauchy data taken from the values of another solution at t = T
        let start = EllipticProblem::new(t, SpectralVec::new(&m, u0).unwrap(), SpectralVec::new(&m, v0).unwrap()).unwrap();
        let f = start.solution_at(t).unwrap();
        let g = start.dt_solution_at(t).unwrap();
        let p = EllipticProblem::new(t, f, g).unwrap();
        let spec = ProblemSpec::Elliptic(p);
        let fac = build_factors(&spec).unwrap();
        let bar = fixed_point(&fac).unwrap();
        let trace = spec.sought_trace().unwrap();
        prop_assert!(bar.sub(&trace).unwrap().l2_norm() <= 1e-9 * (1.0 + trace.l2_norm()));
        let far = iterate_closed_form(&fac, &SpectralVec::zeros(&m), 1_000_000_000).unwrap();
        let err0 = trace.l2_norm();
        prop_assert!(far.sub(&trace).unwrap().l2_norm() <= 1e-6 * (1.0 + err0) || fac.max_abs_factor() > 0.999_999_99);
    }

    #[test]
    fn hyperbolic_iterates_reach_the_velocity_trace((ls, f, g, t) in instance()) {
        let m = model(&ls);
        let Ok(p) = HyperbolicProblem::new(t, SpectralVec::new(&m, f).unwrap(), SpectralVec::new(&m, g).unwrap()) else {
            return Ok(());
        };
        let trace = p.velocity_trace().unwrap();
        let fac = build_factors(&ProblemSpec::Hyperbolic(p)).unwrap();
        let bar = fixed_point(&fac).unwrap();
        prop_assert!(bar.sub(&trace).unwrap().l2_norm() <= 1e-9 * (1.0 + trace.l2_norm()));
    }

    #[test]
    fn parabolic_iterates_reach_the_initial_state((ls, u0, _g, t) in instance(), gamma in 0.1f64..1.0) {
        let m = model(&ls);
        let u0 = SpectralVec::new(&m, u0).unwrap();
        let f = parabolic_forward(&u0, t).unwrap();
        let p = ParabolicProblem::new(t, gamma, f).unwrap();
        let fac = build_factors(&ProblemSpec::Parabolic(p)).unwrap();
        let it = iterate_closed_form(&fac, &SpectralVec::zeros(&m), 100_000).unwrap();
        let dev = it.sub(&u0).unwrap().l2_norm();
        let predicted: f64 = (0..m.len())
            .map(|j| (fac.factors()[j].abs().powf(100_000.0) * u0.coeffs()[j]).powi(2))
            .sum::<f64>()
            .sqrt();
        prop_assert!(dev <= predicted * (1.0 + 1e-6) + 1e-10 * (1.0 + u0.l2_norm()));
    }
}

#[test]
fn single_precision_runs_end_to_end() {
    let m = SpectrumModel::<f32>::sine_1d(4, 1.0).unwrap();
    let spec = ProblemSpec::Elliptic(
        EllipticProblem::new(1.0f32, SpectralVec::zeros(&m), SpectralVec::unit(&m, 1).unwrap()).unwrap(),
    );
    let fac = build_factors(&spec).unwrap();
    let bar = fixed_point(&fac).unwrap();
    assert!((bar.coeffs()[0] - std::f32::consts::PI.cosh()).abs() <= 1e-5 * 11.6);
    let it = iterate_closed_form(&fac, &SpectralVec::zeros(&m), 100).unwrap();
    let rel = (bar.coeffs()[0] - it.coeffs()[0]) / bar.coeffs()[0];
    assert!((rel - 0.473_796_2).abs() < 1e-4);
}
