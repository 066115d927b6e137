use alloc::vec;
use alloc::vec::Vec;

use proptest::prelude::*;

use super::*;
use crate::network::{approx_diagonalizable, build_laplacian, spectral_gap, WeightMatrix};

fn counterexample() -> (LaplacianBundle, CouplingSpec) {
    let mut w = RealMatrix::zeros(3, 3);
    w[(0, 1)] = 2.0;
    w[(0, 2)] = 1.0;
    w[(1, 2)] = 2.0;
    w[(2, 0)] = 1.0;
    let bundle = build_laplacian(&WeightMatrix::new(w).unwrap()).unwrap();
    let gamma = RealMatrix::from_rows(&[[2.0, 1.0], [-17.0, 0.0]]).unwrap();
    (bundle, CouplingSpec::new(gamma).unwrap())
}

/// Brute force over all products, dropping the eigenvalue nearest zero.
fn gamma_oracle(lambdas: &[Complex64], betas: &[Complex64]) -> f64 {
    let mut l: Vec<Complex64> = lambdas.to_vec();
    l.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    l[1..]
        .iter()
        .flat_map(|a| betas.iter().map(move |b| (a * b).re))
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn counterexample_gamma() {
    let (bundle, coupling) = counterexample();
    assert_eq!(coupling.structure(), CouplingStructure::Diagonalizable);
    let gamma = compute_gamma(&bundle, &coupling).unwrap();
    assert!((gamma + 1.0).abs() < 1e-9, "{gamma}");
    // (3 ± i)(1 ± 4i) has real parts 3 − 4 and 3 + 4.
    let exact = [Complex64::new(0.0, 0.0), Complex64::new(3.0, 1.0), Complex64::new(3.0, -1.0)];
    let betas = [Complex64::new(1.0, 4.0), Complex64::new(1.0, -4.0)];
    assert_eq!(gamma_oracle(&exact, &betas), -1.0);
}

#[test]
fn symmetric_gamma_is_beta_times_gap() {
    let bundle = build_laplacian(&WeightMatrix::ring(5, 1.0).unwrap()).unwrap();
    let gap = spectral_gap(&bundle).unwrap().lambda2;
    for beta in [0.5, 2.0, 7.0] {
        let c = CouplingSpec::scaled_identity(3, beta).unwrap();
        assert_eq!(c.structure(), CouplingStructure::Symmetric);
        let gamma = compute_gamma(&bundle, &c).unwrap();
        assert!((gamma - beta * gap).abs() < 1e-9);
    }
}

#[test]
fn path_gamma() {
    let bundle = build_laplacian(&WeightMatrix::path(2, 1.0).unwrap()).unwrap();
    let c = CouplingSpec::new(RealMatrix::diagonal(&[1.0, 3.0])).unwrap();
    assert!((compute_gamma(&bundle, &c).unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn disconnected_gamma_fails() {
    let bundle = build_laplacian(&WeightMatrix::new(RealMatrix::zeros(3, 3)).unwrap()).unwrap();
    let c = CouplingSpec::identity(2).unwrap();
    assert!(matches!(
        compute_gamma(&bundle, &c),
        Err(StabilityError::Disconnected { zero_multiplicity: 3 })
    ));
}

#[test]
fn jordan_coupling_is_detected() {
    let c = CouplingSpec::jordan_block(2, 0.3).unwrap();
    assert_eq!(c.structure(), CouplingStructure::Defective);
    assert!(!c.diagonalizable());
    assert_eq!(c.beta_min(), 0.3);
    assert_eq!(c.blocks().len(), 1);
    let repeated = RealMatrix::from_rows(&[[1.0, 2.0], [0.0, 1.0]]).unwrap();
    assert!(matches!(
        CouplingSpec::new(repeated),
        Err(StabilityError::RequiresJordanForm)
    ));
}

#[test]
fn jordan_form_factorisation() {
    // Γ = Q J Q⁻¹ with J a 2×2 block at β = 1.
    let q = RealMatrix::from_rows(&[[1.0, 1.0], [0.0, 2.0]]).unwrap().to_complex();
    let j = RealMatrix::from_rows(&[[1.0, 1.0], [0.0, 1.0]]).unwrap().to_complex();
    let gamma = q.matmul(&j).unwrap().matmul(&q.inverse().unwrap()).unwrap().re();
    let c = CouplingSpec::with_jordan_form(gamma.clone(), q.clone(), j.clone()).unwrap();
    assert_eq!(c.structure(), CouplingStructure::Defective);
    let mut wrong = j;
    wrong[(0, 0)] = Complex64::new(2.0, 0.0);
    wrong[(1, 1)] = Complex64::new(2.0, 0.0);
    assert!(CouplingSpec::with_jordan_form(gamma, q, wrong).is_err());
}

#[test]
fn rho_bound_symmetric_is_independent_of_beta() {
    for beta in [0.1, 1.0, 10.0] {
        let c = CouplingSpec::scaled_identity(3, beta).unwrap();
        let rho = rho_bound(2.0, &c, 0.5, 1.0).unwrap();
        assert_eq!(rho.value, 2.0);
    }
    let c = CouplingSpec::identity(2).unwrap();
    let rho = rho_bound(3.0, &c, 0.5, 1.5).unwrap();
    assert_eq!(rho.kappa_q, 1.0);
    assert_eq!(rho.value, 4.5);
}

#[test]
fn rho_bound_jordan_scales_inversely() {
    let rho = |beta: f64| {
        rho_bound(1.0, &CouplingSpec::jordan_block(2, beta).unwrap(), 0.5, 1.0)
            .unwrap()
            .value
    };
    // κ∞(R) = 2 (1 + 1/ε) with ε = β/2.
    for beta in [0.05, 0.2, 1.0] {
        assert!((rho(beta) - 2.0 * (1.0 + 2.0 / beta)).abs() < 1e-9);
    }
    let ratio = rho(0.005) / rho(0.01);
    assert!((ratio - 2.0).abs() < 0.01, "{ratio}");
    let negative = CouplingSpec::jordan_block(2, -0.1).unwrap();
    assert!(rho_bound(1.0, &negative, 0.5, 1.0).is_err());
    let positive = CouplingSpec::jordan_block(2, 0.1).unwrap();
    assert!(rho_bound(1.0, &positive, 1.5, 1.0).is_err());
    assert!(rho_bound(0.0, &positive, 0.5, 1.0).is_err());
}

fn inputs(gamma: f64, rho: f64) -> AnalysisInputs {
    AnalysisInputs {
        gamma,
        rho: RhoBound {
            value: rho,
            varrho: rho,
            c: 1.0,
            kappa_q: 1.0,
            kappa_jordan: 1.0,
            jordan_eps: None,
        },
        kappa_p: 1.0,
        constants: Constants::default(),
    }
}

#[test]
fn threshold_examples() {
    let a = alpha_threshold(&inputs(1.0, 0.0)).unwrap();
    assert_eq!(a.alpha_threshold, Some(0.0));
    assert_eq!(a.rate(3.0), 3.0);
    assert!(a.a3_satisfied);
    assert_eq!(a.c_estimate, 1.0);

    let (bundle, coupling) = counterexample();
    let approx = approx_diagonalizable(&bundle, None, 0.01).unwrap();
    let a = analyze(&bundle, &approx, &coupling, 0.1, 0.5, Constants::default()).unwrap();
    assert!(!a.a3_satisfied);
    assert_eq!(a.alpha_threshold, None);
    assert!(a.c_estimate >= 1.0);
    assert!(!a.certifies(100.0));

    let bundle = build_laplacian(&WeightMatrix::ring(4, 1.0).unwrap()).unwrap();
    let approx = approx_diagonalizable(&bundle, None, 0.01).unwrap();
    let beta = 0.5;
    let coupling = CouplingSpec::scaled_identity(3, beta).unwrap();
    let a = analyze(&bundle, &approx, &coupling, 6.0, 0.5, Constants::default()).unwrap();
    let gap = spectral_gap(&bundle).unwrap().lambda2;
    assert!((a.alpha_threshold.unwrap() - 6.0 / (beta * gap)).abs() < 1e-9);
    assert!((a.c_estimate - 1.0).abs() < 1e-9 || a.c_estimate > 1.0);
}

#[test]
fn threshold_rejects_bad_constants() {
    let mut i = inputs(1.0, 1.0);
    i.constants.k = 0.5;
    assert!(alpha_threshold(&i).is_err());
}

#[test]
fn dominance_examples() {
    let one = Complex64::new(1.0, 0.0);
    let zero = ComplexMatrix::zeros(2, 2);
    let mu = diagonal_dominance_margin(&[zero], 1.0, one, &[one, one]).unwrap();
    assert_eq!(mu, 1.0);
    let mu = diagonal_dominance_margin(
        &[ComplexMatrix::identity(2)],
        1.0,
        one,
        &[Complex64::new(3.0, 0.0); 2],
    )
    .unwrap();
    assert_eq!(mu, 2.0);
    assert!(diagonal_dominance_margin(&[], 1.0, one, &[one]).is_err());
    assert!(diagonal_dominance_margin(&[ComplexMatrix::zeros(3, 3)], 1.0, one, &[one]).is_err());
}

#[test]
fn roughness_examples() {
    assert_eq!(roughness_adjust(5.0, 2.0, 1.0), 3.0);
    assert_eq!(roughness_adjust(4.2, 7.0, 0.0), 4.2);
    // With δ = α·ε': μ − δK = αγ − (ρ + αKε').
    let (alpha, gamma, rho, k, eps) = (3.0, 2.0, 1.5, 1.25, 0.02);
    let mu_hat = roughness_adjust(alpha * gamma - rho, k, alpha * eps);
    let rho_bar = rho + alpha * k * eps;
    assert!((mu_hat - (alpha * gamma - rho_bar)).abs() < 1e-14);
}

#[test]
fn persistence_examples() {
    assert_eq!(persistence_bound(1.0, 0.0, 2.0, 1.0, 0.0).unwrap().asymptotic_error, 0.0);
    let b = persistence_bound(2.0, 0.1, 5.0, 1.0, 3.0).unwrap();
    assert!((b.asymptotic_error - 0.1).abs() < 1e-15);
    assert_eq!(persistence_bound(1.0, 1.0, 2.0, 1.0, 0.0).unwrap().asymptotic_error, 0.5);
    assert_eq!(persistence_bound(1.0, 1.0, 4.0, 1.0, 0.0).unwrap().asymptotic_error, 0.25);
    assert!(persistence_bound(1.0, 1.0, 1.0, 1.0, 1.0).is_err());
    assert!(persistence_bound(1.0, -1.0, 4.0, 1.0, 0.0).is_err());
}

#[test]
fn delta_estimate_formula() {
    assert_eq!(delta_estimate(8.0, 1.0, 2.0, 1.0).unwrap(), 1.0);
    assert!(delta_estimate(0.0, 1.0, 1.0, 1.0).is_err());
    assert!(delta_estimate(1.0, 0.0, 1.0, 1.0).is_err());
}

#[test]
fn varrho_is_largest_spectral_norm() {
    let samples = vec![
        RealMatrix::diagonal(&[1.0, -2.0]),
        RealMatrix::from_rows(&[[0.0, 3.0], [0.0, 0.0]]).unwrap(),
    ];
    assert!((estimate_varrho(&samples).unwrap() - 3.0).abs() < 1e-12);
    assert!(estimate_varrho(&[]).is_err());
}

fn positive_weights() -> impl Strategy<Value = (usize, Vec<f64>)> {
    (2usize..=6).prop_flat_map(|n| (Just(n), proptest::collection::vec(0.1f64..2.0, n * n)))
}

fn weights(n: usize, mut d: Vec<f64>) -> WeightMatrix {
    for i in 0..n {
        d[i * n + i] = 0.0;
    }
    WeightMatrix::new(RealMatrix::new(n, n, d).unwrap()).unwrap()
}

fn coupling_strategy() -> impl Strategy<Value = CouplingSpec> {
    proptest::collection::vec(-1.0f64..1.0, 4).prop_filter_map("distinct eigenvalues", |d| {
        CouplingSpec::new(RealMatrix::new(2, 2, d).ok()?).ok()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gamma_is_permutation_invariant(
        (n, d) in positive_weights(),
        coupling in coupling_strategy(),
        seed in any::<u64>(),
    ) {
        let w = weights(n, d);
        let mut perm: Vec<usize> = (0..n).collect();
        // Fisher–Yates driven by the seed.
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let g = compute_gamma(&build_laplacian(&w).unwrap(), &coupling).unwrap();
        let gp = compute_gamma(&build_laplacian(&w.permuted(&perm)).unwrap(), &coupling).unwrap();
        prop_assert!((g - gp).abs() < 1e-9 * g.abs().max(1.0), "{} vs {}", g, gp);
    }

    #[test]
    fn gamma_is_homogeneous(
        (n, d) in positive_weights(),
        coupling in coupling_strategy(),
        scale in 0.1f64..10.0,
    ) {
        let bundle = build_laplacian(&weights(n, d)).unwrap();
        let scaled = CouplingSpec::new(coupling.gamma().scale(scale)).unwrap();
        let g = compute_gamma(&bundle, &coupling).unwrap();
        let gs = compute_gamma(&bundle, &scaled).unwrap();
        prop_assert!((gs - scale * g).abs() < 1e-9 * (scale * g).abs().max(1.0));
    }

    #[test]
    fn symmetric_gamma_matches_gap(n in 2usize..=7, upper in proptest::collection::vec(0.1f64..2.0, 21), beta in 0.1f64..5.0) {
        let mut w = RealMatrix::zeros(n, n);
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                w[(i, j)] = upper[k];
                w[(j, i)] = upper[k];
                k += 1;
            }
        }
        let bundle = build_laplacian(&WeightMatrix::new(w).unwrap()).unwrap();
        let gap = spectral_gap(&bundle).unwrap().lambda2;
        let g = compute_gamma(&bundle, &CouplingSpec::scaled_identity(3, beta).unwrap()).unwrap();
        prop_assert!((g - beta * gap).abs() < 1e-9 * (beta * gap).max(1.0));
    }

    #[test]
    fn dominance_margin_grows_with_alpha(
        entries in proptest::collection::vec(-2.0f64..2.0, 9),
        betas in proptest::collection::vec(0.1f64..3.0, 3),
        alpha in 0.0f64..10.0,
        extra in 0.0f64..10.0,
    ) {
        let a = RealMatrix::new(3, 3, entries).unwrap().to_complex();
        let b: Vec<Complex64> = betas.iter().map(|&v| Complex64::new(v, 0.3)).collect();
        let lambda = Complex64::new(2.0, 0.0);
        let m1 = diagonal_dominance_margin(core::slice::from_ref(&a), alpha, lambda, &b).unwrap();
        let m2 = diagonal_dominance_margin(core::slice::from_ref(&a), alpha + extra, lambda, &b).unwrap();
        prop_assert!(m2 >= m1);
    }

    #[test]
    fn persistence_is_linear_and_decreasing(
        eps0 in 0.0f64..1.0,
        alpha in 1.1f64..10.0,
        bump in 0.01f64..5.0,
    ) {
        let b1 = persistence_bound(1.5, eps0, alpha, 1.0, 1.0).unwrap().asymptotic_error;
        let b2 = persistence_bound(1.5, 2.0 * eps0, alpha, 1.0, 1.0).unwrap().asymptotic_error;
        prop_assert!((b2 - 2.0 * b1).abs() <= 1e-12 * b2.max(1.0));
        let b3 = persistence_bound(1.5, eps0, alpha + bump, 1.0, 1.0).unwrap().asymptotic_error;
        if eps0 > 0.0 {
            prop_assert!(b3 < b1);
        }
    }
}
