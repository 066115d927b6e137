use proptest::prelude::*;
use syncnet_core::linalg::{eigenvalues, kronecker, RealMatrix};
use syncnet_core::Complex64;

fn square(max: usize) -> impl Strategy<Value = RealMatrix> {
    (1..=max).prop_flat_map(|n| {
        proptest::collection::vec(-3.0f64..3.0, n * n).prop_map(move |d| RealMatrix::new(n, n, d).unwrap())
    })
}

/// Greedy nearest matching; returns the largest matched distance.
fn multiset_distance(mut a: Vec<Complex64>, b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut worst: f64 = 0.0;
    for z in b {
        let (k, d) = a
            .iter()
            .enumerate()
            .map(|(k, w)| (k, (w - z).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        worst = worst.max(d);
        a.swap_remove(k);
    }
    worst
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn kronecker_eigenvalues_are_pairwise_products(a in square(4), b in square(3)) {
        let la = eigenvalues(&a).unwrap();
        let lb = eigenvalues(&b).unwrap();
        let products: Vec<Complex64> = la
            .values()
            .iter()
            .flat_map(|x| lb.values().iter().map(move |y| x * y))
            .collect();
        let spectrum = eigenvalues(&kronecker(&a, &b)).unwrap();
        let scale = 1.0 + a.max_abs() * b.max_abs();
        let err = multiset_distance(spectrum.values().to_vec(), &products);
        // Nearly defective draws lose accuracy like the square root of the
        // rounding error.
        prop_assert!(err <= 1e-5 * scale, "err {} scale {}", err, scale);
    }
}
