//! End-to-end simulations of the full and reduced systems.

use lcmanifold_core::analysis::{estimate_mean_radius, predicted_radius, TransientCut};
use lcmanifold_core::dynamics::{
    integrate, reduced_rhs, to_polar, to_polar_projected, IntegratorConfig, PolarSeries, Trajectory,
};
use lcmanifold_core::manifold::solve_for_spec;
use lcmanifold_core::model::{full_rhs, State3, SystemSpec};

fn reduced_mean_radius(spec: &SystemSpec) -> f64 {
    let gamma = spec.gamma().unwrap();
    let m = solve_for_spec(spec).unwrap().generic;
    let tr = integrate(
        |p: &[f64; 2]| reduced_rhs(gamma, &m, *p),
        [0.5, 0.0],
        &IntegratorConfig::default(),
    )
    .unwrap();
    estimate_mean_radius(&to_polar(&tr), &TransientCut::default()).unwrap()
}

fn full_trajectory(spec: &SystemSpec) -> Trajectory<3> {
    integrate(
        |s: &[f64; 3]| full_rhs(spec, State3::from_array(*s)).map_or([f64::NAN; 3], State3::to_array),
        [0.5, 0.0, 0.0],
        &IntegratorConfig::default(),
    )
    .unwrap()
}

fn full_series(spec: &SystemSpec) -> PolarSeries {
    to_polar_projected(&full_trajectory(spec))
}

#[test]
fn full_system_tracks_reduced_system_at_larger_lambda() {
    for lambda in [2.0, 5.0] {
        let spec = SystemSpec::lambda_omega(4.0, lambda);
        let reduced = reduced_mean_radius(&spec);
        let predicted = predicted_radius(4.0, lambda).unwrap();
        assert!(
            (reduced / predicted - 1.0).abs() <= 0.02,
            "reduced {reduced} vs {predicted}"
        );
        let r_full = estimate_mean_radius(&full_series(&spec), &TransientCut::default()).unwrap();
        assert!(
            (r_full / reduced - 1.0).abs() <= 0.05,
            "full {r_full} vs reduced {reduced}"
        );
    }
}

// With λ = 1 the default couplings admit equilibria off the origin at
// R² sin 4θ = −4λ, and the orbit from (0.5, 0, 0) is captured by one of them.
#[test]
fn full_system_at_unit_lambda_settles_to_equilibrium() {
    let spec = SystemSpec::lambda_omega(4.0, 1.0);
    let tr = full_trajectory(&spec);
    let (_, s) = tr.last().unwrap();
    let v = full_rhs(&spec, State3::from_array(s)).unwrap().to_array();
    assert!(v.iter().all(|c| c.abs() < 1e-6), "not at rest: {v:?}");
    let r = s[0].hypot(s[1]);
    assert!((r - 2.7229).abs() < 1e-3, "R = {r}");
    assert!((s[2].abs() - 3.5576).abs() < 1e-3, "z = {}", s[2]);
    let theta = s[1].atan2(s[0]);
    assert!((r * r * (4.0 * theta).sin() + 4.0).abs() < 1e-6);
    assert!(estimate_mean_radius(&to_polar_projected(&tr), &TransientCut::default()).is_err());
}
