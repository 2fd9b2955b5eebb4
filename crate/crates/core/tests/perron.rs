mod common;

use common::*;
use diffrate::{is_irreducible, perron_eigenpair, Matrix, PerronOptions};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn oracle_sanity() {
    // λ² − 0.3λ − 0.10 = 0 has roots 0.5 and −0.2.
    let a = Matrix::from_rows(&[vec![0.2, 0.3], vec![0.4, 0.1]]).unwrap();
    assert!((dominant_root_oracle(&a) - 0.5).abs() < 1e-12);
}

#[test]
fn random_positive_four_by_four_matches_root_oracle() {
    let mut rng = rng(31);
    for _ in 0..10 {
        let a = Matrix::from_fn(4, |_, _| rng.gen_range(0.01..1.0));
        let r = perron_eigenpair(&a, &PerronOptions::default()).unwrap();
        assert!(r.positive && r.irreducible);
        assert!((r.rho - dominant_root_oracle(&a)).abs() < 1e-8);
    }
}

#[test]
fn eigen_residual_and_normalisation() {
    let mut rng = rng(32);
    for n in 1..=6 {
        let a = random_irreducible(&mut rng, n);
        let r = perron_eigenpair(&a, &PerronOptions::default()).unwrap();
        let resid = (&a.mul_vec(&r.perron_vector) - &r.perron_vector.scale(r.rho)).norm_inf();
        assert!(resid <= 1e-10 * r.rho, "n={n} resid {resid:e}");
        assert!((r.perron_vector.sum() - 1.0).abs() <= 1e-12);
        assert!(r.perron_vector.iter().all(|&x| x > 1e-14));
    }
}

#[test]
fn reducible_block_radius_is_max_of_blocks() {
    let mut rng = rng(33);
    for _ in 0..10 {
        let a11 = Matrix::from_fn(2, |_, _| rng.gen_range(0.1..1.0));
        let a22 = Matrix::from_fn(3, |_, _| rng.gen_range(0.1..1.0));
        let a = Matrix::from_fn(5, |i, j| match (i < 2, j < 2) {
            (true, true) => a11[(i, j)],
            (false, false) => a22[(i - 2, j - 2)],
            (true, false) => rng.gen_range(0.0..1.0),
            (false, true) => 0.0,
        });
        assert!(!is_irreducible(&a).unwrap());
        let opts = PerronOptions {
            allow_reducible: true,
            ..PerronOptions::default()
        };
        let r = perron_eigenpair(&a, &opts).unwrap();
        let expected = dominant_root_oracle(&a11).max(dominant_root_oracle(&a22));
        assert!((r.rho - expected).abs() < 1e-8);
        assert!((dominant_root_oracle(&a) - expected).abs() < 1e-8);
    }
}

fn irreducible_matrix() -> impl Strategy<Value = Matrix<f64>> {
    (1usize..=6, any::<u64>()).prop_map(|(n, seed)| random_irreducible(&mut rng(seed), n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn scale_equivariance(a in irreducible_matrix(), c in 0.01..100.0f64) {
        let opts = PerronOptions::default();
        let r = perron_eigenpair(&a, &opts).unwrap();
        let rc = perron_eigenpair(&a.scale(c), &opts).unwrap();
        prop_assert!((rc.rho - c * r.rho).abs() <= 1e-9 * c * r.rho);
        prop_assert!(rc.perron_vector.distance_inf(&r.perron_vector) <= 1e-10);
    }

    #[test]
    fn irreducibility_is_permutation_invariant(
        n in 1usize..=7,
        seed in any::<u64>(),
        density in 0.0..0.6f64,
    ) {
        let mut rng = rng(seed);
        let a = Matrix::from_fn(n, |_, _| if rng.gen_bool(density) { 1.0 } else { 0.0 });
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            perm.swap(i, j);
        }
        let permuted = Matrix::from_fn(n, |i, j| a[(perm[i], perm[j])]);
        prop_assert_eq!(is_irreducible(&a).unwrap(), is_irreducible(&permuted).unwrap());
    }

    #[test]
    fn irreducibility_agrees_with_reachability_power(
        n in 2usize..=6,
        seed in any::<u64>(),
        density in 0.0..0.6f64,
    ) {
        // (I + A)^{n−1} > 0 iff irreducible, computed on booleans.
        let mut rng = rng(seed);
        let a = Matrix::from_fn(n, |_, _| if rng.gen_bool(density) { 1.0 } else { 0.0 });
        let mut reach: Vec<Vec<bool>> = (0..n)
            .map(|i| (0..n).map(|j| i == j || a[(i, j)] > 0.0).collect())
            .collect();
        for _ in 0..n {
            let prev = reach.clone();
            for i in 0..n {
                for j in 0..n {
                    reach[i][j] = (0..n).any(|k| prev[i][k] && prev[k][j]);
                }
            }
        }
        let all = reach.iter().all(|row| row.iter().all(|&b| b));
        prop_assert_eq!(is_irreducible(&a).unwrap(), all);
    }
}
