//! Vertex couplings of an n-edge vertex in the unitary parametrization.
//!
//! A coupling is stored as the n×n unitary `U`; the boundary condition on the
//! vector of boundary values `Ψ(0)` and outward derivatives `Ψ'(0)` reads
//!
//! ```text
//! (U - I) Ψ(0) + i (U + I) Ψ'(0) = 0
//! ```
//!
//! which is the `A Ψ(0) + B Ψ'(0) = 0` form with `A = U - I`, `B = i(U + I)`
//! at unit length scale.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{
    all_ones, checked_inverse, hermiticity_defect, identity, max_entry_norm,
    min_hermitian_eigenvalue, null_space, numerical_rank, unitarity_defect, vector_norm, CMatrix,
    CVector,
};
use crate::scalar::{im, re, ExtendedReal, Real, C};

/// Unitarity tolerance on `max |U U* - I|`.
pub const UNITARITY_TOL: f64 = 1e-12;
/// Eigenvalues closer than this to -1 belong to the Dirichlet part.
pub const EIGEN_CLUSTER_TOL: f64 = 1e-9;
/// `fromAB` rejects pairs whose `A + iB` has a larger condition number.
pub const MAX_PAIR_CONDITION: f64 = 1e12;

/// The permutation-symmetric coupling families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CouplingFamily {
    /// Continuous wave function, `Σ ψ'_j(0) = α ψ(0)`.
    Delta,
    /// Common derivative, `Σ ψ_j(0) = β ψ'(0)`.
    DeltaPrimeS,
    /// `Σ ψ_j(0) = 0`, `ψ'_j - ψ'_k = (α/n)(ψ_j - ψ_k)`.
    DeltaP,
    /// `Σ ψ'_j(0) = 0`, `ψ_j - ψ_k = (β/n)(ψ'_j - ψ'_k)`.
    DeltaPrime,
}

impl CouplingFamily {
    pub const ALL: [CouplingFamily; 4] = [
        CouplingFamily::Delta,
        CouplingFamily::DeltaPrimeS,
        CouplingFamily::DeltaP,
        CouplingFamily::DeltaPrime,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CouplingFamily::Delta => "delta",
            CouplingFamily::DeltaPrimeS => "delta-prime-s",
            CouplingFamily::DeltaP => "delta-p",
            CouplingFamily::DeltaPrime => "delta-prime",
        }
    }
}

impl fmt::Display for CouplingFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for CouplingFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CouplingFamily::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unsupported coupling family {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyTag<T> {
    pub family: CouplingFamily,
    pub param: ExtendedReal<T>,
}

/// An n-edge vertex coupling held as its unitary matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexCoupling<T: Real> {
    u: CMatrix<T>,
    family: Option<FamilyTag<T>>,
}

/// Boundary-condition pair `(A, B)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ABPair<T: Real> {
    pub a: CMatrix<T>,
    pub b: CMatrix<T>,
}

/// Boundary values `Ψ(0)` and outward derivatives `Ψ'(0)` at the vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryValues<T: Real> {
    pub psi: CVector<T>,
    pub dpsi: CVector<T>,
}

/// Admissibility report for an `(A, B)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ABDiagnostics<T> {
    pub n: usize,
    /// Numerical rank of the n×2n block `(A, B)`.
    pub rank: usize,
    /// `max |AB* - (AB*)*|`.
    pub hermiticity_defect: T,
    /// Smallest eigenvalue of `BB* + AA*`.
    pub min_eigenvalue: T,
}

impl<T: Real> ABDiagnostics<T> {
    pub fn admissible(&self) -> bool {
        self.rank == self.n
            && self.hermiticity_defect < T::tol(UNITARITY_TOL)
            && self.min_eigenvalue > T::zero()
    }
}

impl<T: Real> BoundaryValues<T> {
    pub fn new(psi: CVector<T>, dpsi: CVector<T>) -> Result<Self> {
        if psi.len() != dpsi.len() {
            return Err(Error::Dimension(format!(
                "Ψ has {} entries but Ψ' has {}",
                psi.len(),
                dpsi.len()
            )));
        }
        Ok(Self { psi, dpsi })
    }

    pub fn n(&self) -> usize {
        self.psi.len()
    }
}

impl<T: Real> VertexCoupling<T> {
    /// Closed-form unitary of one of the symmetric families.
    ///
    /// `param` is α for `Delta`/`DeltaP` and β for `DeltaPrimeS`/`DeltaPrime`;
    /// the infinite value yields `-I` (Dirichlet) for the α families and `I`
    /// (Neumann) for the β families.
    pub fn make(family: CouplingFamily, n: usize, param: ExtendedReal<T>) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidParameter(
                "edge count must be at least 1".into(),
            ));
        }
        let id = identity::<T>(n);
        let ones = all_ones::<T>(n);
        let nn = re(T::from_count(n));
        let two = re(T::lit(2.0));
        let u = match (family, param) {
            (CouplingFamily::Delta | CouplingFamily::DeltaP, ExtendedReal::Infinite) => -id,
            (CouplingFamily::DeltaPrimeS | CouplingFamily::DeltaPrime, ExtendedReal::Infinite) => {
                id
            }
            (CouplingFamily::Delta, ExtendedReal::Finite(alpha)) => {
                ones * (two / (nn + im(alpha))) - id
            }
            (CouplingFamily::DeltaPrimeS, ExtendedReal::Finite(beta)) => {
                id - ones * (two / (nn - im(beta)))
            }
            (CouplingFamily::DeltaP, ExtendedReal::Finite(alpha)) => {
                let den = nn + im(alpha);
                id * ((nn - im(alpha)) / den) - ones * (two / den)
            }
            (CouplingFamily::DeltaPrime, ExtendedReal::Finite(beta)) => {
                let den = nn - im(beta);
                ones * (two / den) - id * ((nn + im(beta)) / den)
            }
        };
        let c = Self {
            u,
            family: Some(FamilyTag { family, param }),
        };
        c.check_unitary()?;
        Ok(c)
    }

    /// Wraps an arbitrary unitary matrix.
    pub fn from_unitary(u: CMatrix<T>) -> Result<Self> {
        if !u.is_square() || u.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "U must be square and non-empty, got {}x{}",
                u.nrows(),
                u.ncols()
            )));
        }
        let c = Self { u, family: None };
        c.check_unitary()?;
        Ok(c)
    }

    /// Unitary realising the same boundary condition as an admissible `(A, B)`:
    /// `U = -(A + iB)^{-1} (A - iB)`.
    pub fn from_ab(ab: &ABPair<T>) -> Result<Self> {
        let diag = ab.validate();
        if !diag.admissible() {
            return Err(Error::InvalidPair(format!(
                "rank {} of {}, AB* defect {:e}, min eig(BB*+AA*) {:e}",
                diag.rank,
                diag.n,
                diag.hermiticity_defect.as_f64(),
                diag.min_eigenvalue.as_f64()
            )));
        }
        let i = C::<T>::i();
        let plus = &ab.a + &ab.b * i;
        let minus = &ab.a - &ab.b * i;
        let inv = checked_inverse(&plus, MAX_PAIR_CONDITION).map_err(|e| match e {
            Error::Singular { condition } => {
                Error::InvalidPair(format!("A + iB is singular (condition {condition:e})"))
            }
            other => other,
        })?;
        let u = -(inv * minus);
        Self::from_unitary(u)
    }

    fn check_unitary(&self) -> Result<()> {
        let defect = unitarity_defect(&self.u);
        if defect < T::tol(UNITARITY_TOL) {
            Ok(())
        } else {
            Err(Error::NotUnitary {
                defect: defect.as_f64(),
            })
        }
    }

    pub fn n(&self) -> usize {
        self.u.nrows()
    }

    pub fn unitary(&self) -> &CMatrix<T> {
        &self.u
    }

    pub fn family(&self) -> Option<FamilyTag<T>> {
        self.family
    }

    /// `A = U - I`, `B = i(U + I)`.
    pub fn to_ab(&self) -> ABPair<T> {
        let id = identity::<T>(self.n());
        ABPair {
            a: &self.u - &id,
            b: (&self.u + &id) * C::<T>::i(),
        }
    }

    /// Transforms the unitary from length scale `ell` to `ell_prime`.
    pub fn rescale_length(&self, ell: T, ell_prime: T) -> Result<Self> {
        if !(ell > T::zero() && ell_prime > T::zero()) {
            return Err(Error::InvalidParameter(
                "length scales must be positive".into(),
            ));
        }
        let id = identity::<T>(self.n());
        let sum = re(ell + ell_prime);
        let diff = re(ell - ell_prime);
        let num = &self.u * sum + &id * diff;
        let den = &self.u * diff + &id * sum;
        let inv = checked_inverse(&den, MAX_PAIR_CONDITION)?;
        let c = Self {
            u: num * inv,
            family: None,
        };
        c.check_unitary()?;
        Ok(c)
    }

    /// Whether `bv` satisfies the vertex condition up to the relative tolerance `tol`.
    pub fn satisfies_vertex_condition(&self, bv: &BoundaryValues<T>, tol: T) -> Result<bool> {
        if bv.n() != self.n() {
            return Err(Error::Dimension(format!(
                "boundary values have {} entries, coupling has {} edges",
                bv.n(),
                self.n()
            )));
        }
        let id = identity::<T>(self.n());
        let i = C::<T>::i();
        let residual = (&self.u - &id) * &bv.psi + (&self.u + &id) * &bv.dpsi * i;
        let scale = vector_norm(&bv.psi) + vector_norm(&bv.dpsi) + T::default_epsilon();
        if vector_norm(&residual) > tol * scale {
            return Ok(false);
        }
        // vanishing boundary form: |Ψ + iΨ'| = |Ψ - iΨ'|
        let plus = vector_norm(&(&bv.psi + &bv.dpsi * i));
        let minus = vector_norm(&(&bv.psi - &bv.dpsi * i));
        Ok((plus - minus).abs() <= tol * scale)
    }

    /// Orthogonal projection onto the eigenspace of `U` at eigenvalue -1.
    ///
    /// `U` is normal, so that eigenspace is the null space of `U + I`.
    pub fn decoupled_projection(&self) -> CMatrix<T> {
        let n = self.n();
        let basis = null_space(&(&self.u + identity::<T>(n)), T::tol(EIGEN_CLUSTER_TOL));
        if basis.ncols() == 0 {
            return CMatrix::zeros(n, n);
        }
        &basis * basis.adjoint()
    }
}

impl<T: Real> ABPair<T> {
    pub fn new(a: CMatrix<T>, b: CMatrix<T>) -> Result<Self> {
        if !a.is_square() || a.shape() != b.shape() {
            return Err(Error::Dimension(format!(
                "A is {:?}, B is {:?}; both must be n×n",
                a.shape(),
                b.shape()
            )));
        }
        Ok(Self { a, b })
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn validate(&self) -> ABDiagnostics<T> {
        let n = self.n();
        let block = CMatrix::from_fn(n, 2 * n, |r, c| {
            if c < n {
                self.a[(r, c)]
            } else {
                self.b[(r, c - n)]
            }
        });
        let ab_star = &self.a * self.b.adjoint();
        let gram = &self.b * self.b.adjoint() + &self.a * self.a.adjoint();
        ABDiagnostics {
            n,
            rank: numerical_rank(&block),
            hermiticity_defect: hermiticity_defect(&ab_star),
            min_eigenvalue: if n == 0 {
                T::zero()
            } else {
                min_hermitian_eigenvalue(&gram)
            },
        }
    }

    /// Largest entry of the pair, used to scale residual checks.
    pub fn scale(&self) -> T {
        let a = max_entry_norm(&self.a);
        let b = max_entry_norm(&self.b);
        if a > b {
            a
        } else {
            b
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn c(re: f64, im: f64) -> C<f64> {
        C::new(re, im)
    }

    fn close(a: &CMatrix<f64>, b: &CMatrix<f64>, tol: f64) -> bool {
        a.shape() == b.shape() && max_entry_norm(&(a - b)) <= tol
    }

    #[test]
    fn kirchhoff_is_the_swap() {
        let k = VertexCoupling::make(CouplingFamily::Delta, 2, 0.0.into()).unwrap();
        let swap = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
        assert!(close(k.unitary(), &swap, 1e-15));
    }

    #[test]
    fn infinite_parameters_decouple() {
        let d =
            VertexCoupling::<f64>::make(CouplingFamily::Delta, 3, ExtendedReal::Infinite).unwrap();
        assert!(close(d.unitary(), &(-identity::<f64>(3)), 0.0));
        let s = VertexCoupling::<f64>::make(CouplingFamily::DeltaPrimeS, 3, ExtendedReal::Infinite)
            .unwrap();
        assert!(close(s.unitary(), &identity(3), 0.0));
        let p =
            VertexCoupling::<f64>::make(CouplingFamily::DeltaP, 4, ExtendedReal::Infinite).unwrap();
        assert!(close(p.unitary(), &(-identity::<f64>(4)), 0.0));
        let q = VertexCoupling::<f64>::make(CouplingFamily::DeltaPrime, 4, ExtendedReal::Infinite)
            .unwrap();
        assert!(close(q.unitary(), &identity(4), 0.0));
    }

    #[test]
    fn large_finite_parameters_approach_the_limits() {
        let d = VertexCoupling::make(CouplingFamily::DeltaP, 3, 1e9.into()).unwrap();
        assert!(close(d.unitary(), &(-identity::<f64>(3)), 1e-8));
        let q = VertexCoupling::make(CouplingFamily::DeltaPrime, 3, 1e9.into()).unwrap();
        assert!(close(q.unitary(), &identity(3), 1e-8));
    }

    #[test]
    fn delta_prime_entries_by_hand() {
        // -(2+i)/(2-i) = -(3+4i)/5 ; 2/(2-i) = (4+2i)/5
        let u = VertexCoupling::make(CouplingFamily::DeltaPrime, 2, 1.0.into()).unwrap();
        let diag = c(-0.6, -0.8) + c(0.8, 0.4);
        let off = c(0.8, 0.4);
        let expected = CMatrix::from_row_slice(2, 2, &[diag, off, off, diag]);
        assert!(close(u.unitary(), &expected, 1e-15));
        assert!(unitarity_defect(u.unitary()) < 1e-15);
    }

    #[test]
    fn zero_edges_rejected() {
        assert!(matches!(
            VertexCoupling::<f64>::make(CouplingFamily::Delta, 0, 1.0.into()),
            Err(Error::InvalidParameter(_))
        ));
        assert!("delta-q".parse::<CouplingFamily>().is_err());
    }

    #[test]
    fn non_unitary_rejected() {
        let m = identity::<f64>(2) * c(1.1, 0.0);
        assert!(matches!(
            VertexCoupling::from_unitary(m),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn to_ab_identity_cases() {
        let n = VertexCoupling::from_unitary(identity::<f64>(3))
            .unwrap()
            .to_ab();
        assert!(close(&n.a, &CMatrix::zeros(3, 3), 0.0));
        assert!(close(&n.b, &(identity::<f64>(3) * c(0.0, 2.0)), 0.0));
        let d = VertexCoupling::from_unitary(-identity::<f64>(3))
            .unwrap()
            .to_ab();
        assert!(close(&d.a, &(identity::<f64>(3) * c(-2.0, 0.0)), 0.0));
        assert!(close(&d.b, &CMatrix::zeros(3, 3), 0.0));
    }

    #[test]
    fn to_ab_of_delta_is_admissible() {
        let ab = VertexCoupling::make(CouplingFamily::Delta, 2, 1.0.into())
            .unwrap()
            .to_ab();
        let d = ab.validate();
        assert!(d.hermiticity_defect < 1e-12);
        assert_eq!(d.rank, 2);
        assert!(d.admissible());
    }

    #[test]
    fn from_ab_canonical_pairs() {
        let id = identity::<f64>(3);
        let z = CMatrix::<f64>::zeros(3, 3);
        let neumann =
            VertexCoupling::from_ab(&ABPair::new(z.clone(), id.clone()).unwrap()).unwrap();
        assert!(close(neumann.unitary(), &id, 1e-15));
        let dirichlet = VertexCoupling::from_ab(&ABPair::new(id.clone(), z).unwrap()).unwrap();
        assert!(close(dirichlet.unitary(), &(-id), 1e-15));
    }

    #[test]
    fn degenerate_pair_fails_validation() {
        let z = CMatrix::<f64>::zeros(2, 2);
        let ab = ABPair::new(z.clone(), z).unwrap();
        let d = ab.validate();
        assert_eq!(d.rank, 0);
        assert!(!d.admissible());
        assert!(matches!(
            VertexCoupling::from_ab(&ab),
            Err(Error::InvalidPair(_))
        ));
    }

    #[test]
    fn mixed_dirichlet_neumann_pair() {
        let a = CMatrix::from_diagonal(&DVector::from_vec(vec![c(1., 0.), c(0., 0.)]));
        let b = CMatrix::from_diagonal(&DVector::from_vec(vec![c(0., 0.), c(1., 0.)]));
        let ab = ABPair::new(a, b).unwrap();
        let d = ab.validate();
        assert_eq!(d.rank, 2);
        assert_eq!(d.hermiticity_defect, 0.0);
        assert!(d.admissible());
        let u = VertexCoupling::from_ab(&ab).unwrap();
        let expected = CMatrix::from_diagonal(&DVector::from_vec(vec![c(-1., 0.), c(1., 0.)]));
        assert!(close(u.unitary(), &expected, 1e-15));
    }

    #[test]
    fn mismatched_pair_shapes() {
        assert!(ABPair::new(CMatrix::<f64>::zeros(2, 2), CMatrix::zeros(3, 3)).is_err());
        assert!(ABPair::new(CMatrix::<f64>::zeros(2, 3), CMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn rescale_trivial_cases() {
        let u = VertexCoupling::make(CouplingFamily::DeltaP, 3, 0.7.into()).unwrap();
        let same = u.rescale_length(2.0, 2.0).unwrap();
        assert!(close(same.unitary(), u.unitary(), 1e-15));
        let n = VertexCoupling::from_unitary(identity::<f64>(3)).unwrap();
        assert!(close(
            n.rescale_length(0.3, 5.0).unwrap().unitary(),
            &identity(3),
            1e-15
        ));
        assert!(u.rescale_length(0.0, 1.0).is_err());
    }

    #[test]
    fn vertex_condition_basic_cases() {
        let v = |xs: &[f64]| DVector::from_iterator(xs.len(), xs.iter().map(|&x| c(x, 0.)));
        let neumann = VertexCoupling::from_unitary(identity::<f64>(3)).unwrap();
        let bv = BoundaryValues::new(v(&[1., -2., 3.]), v(&[0., 0., 0.])).unwrap();
        assert!(neumann.satisfies_vertex_condition(&bv, 1e-12).unwrap());
        let dirichlet = VertexCoupling::from_unitary(-identity::<f64>(3)).unwrap();
        let bv = BoundaryValues::new(v(&[0., 0., 0.]), v(&[4., 1., -1.])).unwrap();
        assert!(dirichlet.satisfies_vertex_condition(&bv, 1e-12).unwrap());

        let delta = VertexCoupling::make(CouplingFamily::Delta, 3, 2.0.into()).unwrap();
        let good = BoundaryValues::new(v(&[1., 1., 1.]), v(&[0.5, 2.0, -0.5])).unwrap();
        assert!(delta.satisfies_vertex_condition(&good, 1e-12).unwrap());
        let bad = BoundaryValues::new(v(&[1., 1., 1.]), v(&[0.5, 1.0, -0.5])).unwrap();
        assert!(!delta.satisfies_vertex_condition(&bad, 1e-12).unwrap());

        let short = BoundaryValues::new(v(&[1., 1.]), v(&[0., 0.])).unwrap();
        assert!(delta.satisfies_vertex_condition(&short, 1e-12).is_err());
        assert!(BoundaryValues::new(v(&[1.]), v(&[0., 0.])).is_err());
    }

    #[test]
    fn projection_cases() {
        let d = VertexCoupling::from_unitary(-identity::<f64>(3)).unwrap();
        assert!(close(&d.decoupled_projection(), &identity(3), 1e-12));
        let n = VertexCoupling::from_unitary(identity::<f64>(3)).unwrap();
        assert!(close(&n.decoupled_projection(), &CMatrix::zeros(3, 3), 0.0));

        let delta = VertexCoupling::make(CouplingFamily::Delta, 3, 1.5.into()).unwrap();
        let p = delta.decoupled_projection();
        assert_eq!(numerical_rank(&p), 2);
        // range of P is ker J: P = I - J/n
        let expected = identity::<f64>(3) - all_ones::<f64>(3) * c(1.0 / 3.0, 0.0);
        assert!(close(&p, &expected, 1e-12));
    }

    #[test]
    fn single_precision_families_are_unitary() {
        for fam in CouplingFamily::ALL {
            let u = VertexCoupling::<f32>::make(fam, 4, 0.8f32.into()).unwrap();
            assert!(unitarity_defect(u.unitary()) < 1e-5);
        }
    }
}
