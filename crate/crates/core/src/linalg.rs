//! Small dense complex linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::{cabs, re, Real, C};

pub type CMatrix<T> = DMatrix<C<T>>;
pub type CVector<T> = DVector<C<T>>;

pub fn identity<T: Real>(n: usize) -> CMatrix<T> {
    CMatrix::identity(n, n)
}

/// The n×n matrix with every entry equal to one.
pub fn all_ones<T: Real>(n: usize) -> CMatrix<T> {
    CMatrix::from_element(n, n, re(T::one()))
}

/// Largest entry modulus.
pub fn max_entry_norm<T: Real>(m: &CMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| {
        let a = cabs(*z);
        if a > acc {
            a
        } else {
            acc
        }
    })
}

/// `max |(M M*)_ij - δ_ij|`.
pub fn unitarity_defect<T: Real>(m: &CMatrix<T>) -> T {
    let n = m.nrows();
    max_entry_norm(&(m * m.adjoint() - identity::<T>(n)))
}

/// `max |(M - M*)_ij|`.
pub fn hermiticity_defect<T: Real>(m: &CMatrix<T>) -> T {
    max_entry_norm(&(m - m.adjoint()))
}

pub fn singular_values<T: Real>(m: &CMatrix<T>) -> Vec<T> {
    let mut s: Vec<T> = m
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    s
}

/// 2-norm condition number; infinite when the smallest singular value is zero.
pub fn condition_number<T: Real>(m: &CMatrix<T>) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > T::zero() => (hi / lo).as_f64(),
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}

/// Numerical rank with threshold `rows · ε · σ_max`.
pub fn numerical_rank<T: Real>(m: &CMatrix<T>) -> usize {
    let s = singular_values(m);
    let Some(&hi) = s.first() else { return 0 };
    if hi <= T::zero() {
        return 0;
    }
    let thresh = T::from_count(m.nrows().max(1)) * T::default_epsilon() * hi;
    s.iter().filter(|&&v| v > thresh).count()
}

/// Inverse guarded by a condition-number limit.
pub fn checked_inverse<T: Real>(m: &CMatrix<T>, max_condition: f64) -> Result<CMatrix<T>> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "cannot invert {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    let condition = condition_number(m);
    if !(condition <= max_condition) {
        return Err(Error::Singular { condition });
    }
    m.clone().try_inverse().ok_or(Error::Singular { condition })
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_hermitian_eigenvalue<T: Real>(m: &CMatrix<T>) -> T {
    let sym = (m + m.adjoint()) * re(T::lit(0.5));
    sym.symmetric_eigenvalues().iter().copied().fold(
        T::max_value().unwrap_or_else(T::one),
        |a, b| if b < a { b } else { a },
    )
}

/// Orthonormal basis of the numerical null space (singular values below `tol`),
/// returned as the columns of a matrix.
pub fn null_space<T: Real>(m: &CMatrix<T>, tol: T) -> CMatrix<T> {
    let n = m.ncols();
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^*");
    let cols: Vec<CVector<T>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s < tol)
        .map(|(i, _)| v_t.row(i).adjoint())
        .collect();
    // a wide matrix has extra null directions that the thin SVD omits
    debug_assert!(m.nrows() >= n);
    if cols.is_empty() {
        CMatrix::zeros(n, 0)
    } else {
        CMatrix::from_columns(&cols)
    }
}

pub fn vector_norm<T: Real>(v: &CVector<T>) -> T {
    v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
}
