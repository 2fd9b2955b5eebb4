//! Random problem generators and independent oracles shared by the
//! integration and acceptance suites.
#![allow(dead_code)]

use diffrate::{EconomyModel, Forcing, Matrix, PriceSystem, Vector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_vec(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vector<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

/// Strictly positive input matrix scaled to a max row sum in [0.3, 0.7].
pub fn positive_inputs(rng: &mut ChaCha8Rng, n: usize) -> Matrix<f64> {
    let raw = Matrix::from_fn(n, |_, _| rng.gen_range(0.05..1.0));
    let target = rng.gen_range(0.3..0.7);
    raw.scale(target / raw.norm_inf())
}

/// Wage–price economy with ρ((1+r)A) ≤ 0.91 and the wage left to the
/// normalisation.
pub fn wage_price_economy(rng: &mut ChaCha8Rng, n: usize, horizon: f64) -> EconomyModel<f64> {
    let a = positive_inputs(rng, n);
    let labor = uniform_vec(rng, n, 0.2, 1.5);
    let r = rng.gen_range(0.0..0.3);
    EconomyModel::wage_price(a, labor, r, None, horizon).unwrap()
}

/// Gravitation economy with a general output matrix.
pub fn gravitation_economy(rng: &mut ChaCha8Rng, n: usize, horizon: f64) -> EconomyModel<f64> {
    let a = positive_inputs(rng, n);
    let b = Matrix::from_fn(n, |i, j| {
        if i == j {
            rng.gen_range(0.5..1.5)
        } else {
            rng.gen_range(-0.2..0.2)
        }
    });
    let labor = uniform_vec(rng, n, 0.2, 1.5);
    let i = rng.gen_range(0.0..0.2);
    EconomyModel::gravitation(a, Some(b), labor, i, None, horizon).unwrap()
}

/// Gravitation economy whose `D M` is strictly row diagonally dominant with
/// a negative diagonal for any positive rates, hence stable.
pub fn stable_gravitation_economy(
    rng: &mut ChaCha8Rng,
    n: usize,
    horizon: f64,
) -> EconomyModel<f64> {
    let a = positive_inputs(rng, n);
    let b = Matrix::from_diagonal(&vec![-1.2; n]);
    let labor = uniform_vec(rng, n, 0.2, 1.5);
    EconomyModel::gravitation(a, Some(b), labor, 0.1, None, horizon).unwrap()
}

/// Central-difference Jacobian of `V ↦ P(T, V)` using price-only
/// integration.
pub fn fd_jacobian(
    system: &PriceSystem<f64>,
    rates: &[f64],
    p0: &[f64],
    steps: usize,
    eps: f64,
) -> Matrix<f64> {
    let n = rates.len();
    let mut jac = Matrix::zeros(n);
    for j in 0..n {
        let mut up = rates.to_vec();
        let mut down = rates.to_vec();
        up[j] += eps;
        down[j] -= eps;
        let pu = system.integrate_prices(&up, p0, steps).unwrap();
        let pd = system.integrate_prices(&down, p0, steps).unwrap();
        for i in 0..n {
            jac[(i, j)] = (pu[i] - pd[i]) / (2.0 * eps);
        }
    }
    jac
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn parity(p: &[usize]) -> f64 {
    let mut sign = 1.0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                sign = -sign;
            }
        }
    }
    sign
}

/// Leibniz-formula determinant (n ≤ 7).
pub fn leibniz_det(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    permutations(n)
        .iter()
        .map(|p| parity(p) * (0..n).map(|i| m[i][p[i]]).product::<f64>())
        .sum()
}

/// Largest real root of `det(λI − A)` for nonnegative `A`: the Perron root.
///
/// Scans down from the max row sum (an upper bound on ρ) for the first sign
/// change of the characteristic polynomial, then bisects.
pub fn dominant_root_oracle(a: &Matrix<f64>) -> f64 {
    let n = a.order();
    let rows = a.to_rows();
    let charpoly = |lambda: f64| {
        let shifted: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { lambda - rows[i][j] } else { -rows[i][j] })
                    .collect()
            })
            .collect();
        leibniz_det(&shifted)
    };
    let upper = a.norm_inf() * (1.0 + 1e-9) + 1e-12;
    let grid = 20_000;
    let mut hi = upper;
    let f_hi = charpoly(hi);
    assert!(f_hi > 0.0, "characteristic polynomial must be positive above rho");
    let mut lo = hi;
    for k in 1..=grid {
        lo = upper * (1.0 - k as f64 / grid as f64);
        if charpoly(lo) <= 0.0 {
            break;
        }
        hi = lo;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if charpoly(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Random irreducible nonnegative matrix: a random Hamiltonian cycle plus
/// sparse extra edges.
pub fn random_irreducible(rng: &mut ChaCha8Rng, n: usize) -> Matrix<f64> {
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    let mut a = Matrix::zeros(n);
    for k in 0..n {
        let (from, to) = (order[k], order[(k + 1) % n]);
        a[(from, to)] = rng.gen_range(0.1..2.0);
    }
    for i in 0..n {
        for j in 0..n {
            if rng.gen_bool(0.3) {
                a[(i, j)] = rng.gen_range(0.0..2.0);
            }
        }
    }
    if n == 1 && a[(0, 0)] == 0.0 {
        a[(0, 0)] = 0.5;
    }
    a
}

pub fn zero_forcing(n: usize) -> Forcing<f64> {
    Forcing::zero(n)
}
