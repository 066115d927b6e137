use std::sync::Arc;

use syncnet_core::dynamics::{
    IntegrationSettings, LinearCoupling, Lorenz, Method, NetworkSystem, VectorField,
};
use syncnet_core::experiments::{classify_run, find_critical_coupling, sample_jacobians, Bracket, RunConfig};
use syncnet_core::linalg::RealMatrix;
use syncnet_core::network::{approx_diagonalizable, build_laplacian, WeightMatrix};
use syncnet_core::stability::{analyze, estimate_varrho, Constants, CouplingSpec};

#[test]
fn counterexample_fails_the_spectral_assumption() {
    let mut w = RealMatrix::zeros(3, 3);
    w[(0, 1)] = 2.0;
    w[(0, 2)] = 1.0;
    w[(1, 2)] = 2.0;
    w[(2, 0)] = 1.0;
    let bundle = build_laplacian(&WeightMatrix::new(w).unwrap()).unwrap();
    let approx = approx_diagonalizable(&bundle, None, 1e-3).unwrap();
    let coupling = CouplingSpec::new(RealMatrix::from_rows(&[[2.0, 1.0], [-17.0, 0.0]]).unwrap()).unwrap();
    let report = analyze(&bundle, &approx, &coupling, 0.1, 0.5, Constants::default()).unwrap();
    assert!((report.gamma + 1.0).abs() < 1e-9);
    assert!(!report.a3_satisfied);
    assert!(report.alpha_threshold.is_none());
    assert!(!report.certifies(100.0));
}

#[test]
fn empirical_threshold_stays_below_the_certificate() {
    let field = Lorenz::default();
    let settings = IntegrationSettings::new(1e-3, Method::Rk6);
    let jacobians = sample_jacobians(&field, &[1.0, 1.0, 1.0], 0.0, 40.0, &settings, 400).unwrap();
    let varrho = estimate_varrho(&jacobians).unwrap();

    let weights = WeightMatrix::ring(3, 1.0).unwrap();
    let bundle = build_laplacian(&weights).unwrap();
    let approx = approx_diagonalizable(&bundle, None, 1e-3).unwrap();
    let coupling = CouplingSpec::identity(3).unwrap();
    let report = analyze(&bundle, &approx, &coupling, varrho, 0.5, Constants::default()).unwrap();
    let threshold = report.alpha_threshold.unwrap();
    assert!((report.gamma - 3.0).abs() < 1e-9);

    let system = NetworkSystem::new(
        Arc::new(field),
        Arc::new(LinearCoupling::new(RealMatrix::identity(field.dim())).unwrap()),
        weights,
        0.0,
    )
    .unwrap();
    let cfg = RunConfig { dt: 1e-3, t_end: 60.0, record_stride: 10, ..RunConfig::chaotic() };
    let above = classify_run(&system.with_alpha(1.1 * threshold).unwrap(), &cfg).unwrap();
    assert!(above.synchronised);
    let critical = find_critical_coupling(&system, &cfg, Bracket::new(0.0, 1.0).unwrap(), 1e-2, 10).unwrap();
    assert!(critical.alpha_c <= threshold, "{} > {}", critical.alpha_c, threshold);
}
