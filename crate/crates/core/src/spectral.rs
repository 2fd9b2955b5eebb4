//! Perron–Frobenius analysis of nonnegative matrices.

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::scalar::Scalar;

pub const DEFAULT_TOL: f64 = 1e-12;

/// Dominant eigenpair of a nonnegative matrix together with the
/// structural flags that determine which Perron–Frobenius statements apply.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResult<T> {
    pub rho: T,
    /// Nonnegative, normalised to entry-sum 1.
    pub perron_vector: Vector<T>,
    pub irreducible: bool,
    /// Every entry of the matrix is strictly positive.
    pub positive: bool,
    pub iterations: usize,
    /// `1/rho − 1`; `None` when `rho` is zero.
    pub max_profit_rate: Option<T>,
}

/// Options for [`perron_eigenpair`].
#[derive(Debug, Clone, Copy)]
pub struct PerronOptions<T> {
    pub tol: T,
    /// `None` selects `100·n + 1000`.
    pub max_iter: Option<usize>,
    /// Compute the dominant pair of a reducible matrix instead of failing.
    pub allow_reducible: bool,
}

impl<T: Scalar> Default for PerronOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(DEFAULT_TOL),
            max_iter: None,
            allow_reducible: false,
        }
    }
}

fn check_nonnegative<T: Scalar>(a: &Matrix<T>) -> Result<()> {
    let n = a.order();
    if n == 0 {
        return Err(Error::Empty);
    }
    if !a.is_finite() {
        return Err(Error::NonFinite("matrix"));
    }
    for i in 0..n {
        for j in 0..n {
            if a[(i, j)] < T::zero() {
                return Err(Error::NegativeEntry { row: i, col: j });
            }
        }
    }
    Ok(())
}

fn reaches_all<T: Scalar>(a: &Matrix<T>, reverse: bool) -> bool {
    let n = a.order();
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for w in 0..n {
            let weight = if reverse { a[(w, u)] } else { a[(u, w)] };
            if weight > T::zero() && !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Whether `a` is irreducible: its digraph (edge i→j when `a_ij > 0`) is
/// strongly connected.
///
/// A 1×1 matrix counts as irreducible iff its entry is positive.
pub fn is_irreducible<T: Scalar>(a: &Matrix<T>) -> Result<bool> {
    check_nonnegative(a)?;
    if a.order() == 1 {
        return Ok(a[(0, 0)] > T::zero());
    }
    Ok(reaches_all(a, false) && reaches_all(a, true))
}

/// Spectral radius and Perron vector by shifted power iteration on
/// `(A + σI) x / ‖(A + σI) x‖₁`.
///
/// The shift `σ = max a_ij` keeps the eigenvector and moves the other
/// peripheral eigenvalues `ρ e^{2ikπ/m}` of a cyclic matrix strictly inside
/// the circle of radius `ρ + σ`, so the iteration converges without knowing
/// the cyclic index.
pub fn perron_eigenpair<T: Scalar>(
    a: &Matrix<T>,
    opts: &PerronOptions<T>,
) -> Result<SpectralResult<T>> {
    let irreducible = is_irreducible(a)?;
    if !irreducible && !opts.allow_reducible {
        return Err(Error::NotIrreducible);
    }
    let n = a.order();
    let max_iter = opts.max_iter.unwrap_or(100 * n + 1000);
    let positive = a.as_row_major().iter().all(|&x| x > T::zero());
    let shift = a.max_abs();

    if shift == T::zero() {
        // Zero matrix: every vector is an eigenvector for 0.
        return Ok(SpectralResult {
            rho: T::zero(),
            perron_vector: Vector::from_elem(n, T::one() / T::from_count(n)),
            irreducible,
            positive,
            iterations: 0,
            max_profit_rate: None,
        });
    }

    let mut x = Vector::from_elem(n, T::one() / T::from_count(n));
    let mut ax = vec![T::zero(); n];
    for iteration in 1..=max_iter {
        a.mul_vec_into(&x, &mut ax);
        let next: Vector<T> = ax.iter().zip(x.iter()).map(|(&y, &xi)| y + shift * xi).collect();
        let total = next.sum();
        let next = next.scale(T::one() / total);
        let change = next.distance_inf(&x);
        x = next;
        if change <= opts.tol {
            // Collatz–Wielandt ratio on the unshifted matrix: x sums to one.
            a.mul_vec_into(&x, &mut ax);
            let rho = ax.iter().fold(T::zero(), |acc, &y| acc + y);
            let max_profit_rate = (rho > T::zero()).then(|| T::one() / rho - T::one());
            return Ok(SpectralResult {
                rho,
                perron_vector: x,
                irreducible,
                positive,
                iterations: iteration,
                max_profit_rate,
            });
        }
    }
    Err(Error::NoConvergence { iterations: max_iter })
}

/// Maximum uniform profit rate `R = 1/ρ(A) − 1`.
pub fn max_profit_rate<T: Scalar>(a: &Matrix<T>) -> Result<T> {
    let result = perron_eigenpair(a, &PerronOptions::default())?;
    result.max_profit_rate.ok_or(Error::ZeroSpectralRadius)
}
