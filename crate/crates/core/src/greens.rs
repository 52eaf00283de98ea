//! Resolvent kernels of `-d²/dx²` at energy `-κ²`.
//!
//! Every half-line kernel with a self-adjoint condition at the origin has the
//! image-source form
//!
//! ```text
//! G(x, y) = ( e^{-κ|x-y|} + R(κ) e^{-κ(x+y)} ) / 2κ
//! ```
//!
//! with a reflection coefficient `R` fixed by the boundary condition. Point
//! interactions are added with Krein's rank-one formula, and symmetric star
//! graphs are reassembled from their one-dimensional sectors.

use nalgebra::DVector;

use crate::coupling::{CouplingFamily, VertexCoupling};
use crate::error::{Error, Result};
use crate::linalg::{checked_inverse, CMatrix};
use crate::scalar::{polar, re, ExtendedReal, Real, C};

/// `|b + κ|` or `|n + βκ|` below this is treated as a pole.
pub const BC_POLE_TOL: f64 = 1e-10;
/// `|-1/c - G(a,a)|` below this is treated as a pole.
pub const KREIN_POLE_TOL: f64 = 1e-12;

/// Condition at the origin of a half-line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HalflineBc<T> {
    Dirichlet,
    Neumann,
    /// `ψ'(0) = b ψ(0)`.
    Robin(T),
    /// `ψ(0) = (β/n) ψ'(0)`.
    RobinScaled {
        n: usize,
        beta: T,
    },
}

impl<T: Real> HalflineBc<T> {
    pub fn validate(&self) -> Result<()> {
        match *self {
            HalflineBc::RobinScaled { n: 0, .. } => {
                Err(Error::InvalidParameter("RobinScaled needs n >= 1".into()))
            }
            _ => Ok(()),
        }
    }

    /// Reflection coefficient of the image term.
    pub fn reflection(&self, kappa: T) -> Result<T> {
        self.validate()?;
        match *self {
            HalflineBc::Dirichlet => Ok(-T::one()),
            HalflineBc::Neumann => Ok(T::one()),
            HalflineBc::Robin(b) => {
                let den = b + kappa;
                if den.abs() < T::tol(BC_POLE_TOL) {
                    return Err(Error::NearPole {
                        what: "b + kappa",
                        magnitude: den.abs().as_f64(),
                    });
                }
                Ok((kappa - b) / den)
            }
            HalflineBc::RobinScaled { n, beta } => {
                let nn = T::from_count(n);
                let den = nn + beta * kappa;
                if den.abs() < T::tol(BC_POLE_TOL) {
                    return Err(Error::NearPole {
                        what: "n + beta*kappa",
                        magnitude: den.abs().as_f64(),
                    });
                }
                Ok((beta * kappa - nn) / den)
            }
        }
    }

    /// Scalar pair `(A, B)` with `A ψ(0) + B ψ'(0) = 0`.
    pub fn as_ab(&self) -> (T, T) {
        match *self {
            HalflineBc::Dirichlet => (T::one(), T::zero()),
            HalflineBc::Neumann => (T::zero(), T::one()),
            HalflineBc::Robin(b) => (-b, T::one()),
            HalflineBc::RobinScaled { n, beta } => (T::from_count(n), -beta),
        }
    }
}

/// A δ interaction of strength `c` at distance `a` from the vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointInteraction<T> {
    pub position: T,
    pub strength: ExtendedReal<T>,
}

impl<T: Real> PointInteraction<T> {
    pub fn new(position: T, strength: impl Into<ExtendedReal<T>>) -> Result<Self> {
        if !(position > T::zero() && position.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "point interaction position must be positive, got {:?}",
                position
            )));
        }
        Ok(Self {
            position,
            strength: strength.into(),
        })
    }

    /// `-1/c`, or `None` for `c = 0` (no interaction).
    fn inverse_weight(&self) -> Option<T> {
        match self.strength {
            ExtendedReal::Finite(c) if c == T::zero() => None,
            ExtendedReal::Finite(c) => Some(-T::one() / c),
            ExtendedReal::Infinite => Some(T::zero()),
        }
    }
}

fn check_args<T: Real>(kappa: T, x: T, y: T) -> Result<()> {
    if !(kappa > T::zero() && kappa.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "kappa must be positive, got {:?}",
            kappa
        )));
    }
    if !(x >= T::zero() && y >= T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "kernel arguments must be non-negative, got ({:?}, {:?})",
            x, y
        )));
    }
    Ok(())
}

/// Half-line kernel at energy `-κ²` for the given origin condition.
pub fn halfline_green<T: Real>(bc: &HalflineBc<T>, kappa: T, x: T, y: T) -> Result<C<T>> {
    check_args(kappa, x, y)?;
    let r = bc.reflection(kappa)?;
    Ok(re(image_kernel(r, kappa, x, y)))
}

#[inline]
fn image_kernel<T: Real>(r: T, kappa: T, x: T, y: T) -> T {
    ((-kappa * (x - y).abs()).exp() + r * (-kappa * (x + y)).exp()) / (T::lit(2.0) * kappa)
}

/// Krein insertion of a single point interaction into a half-line kernel:
/// `G^c(x,y) = G(x,y) + G(x,a) G(a,y) / (-1/c - G(a,a))`.
pub fn krein_insert<T: Real>(
    bc: &HalflineBc<T>,
    p: &PointInteraction<T>,
    kappa: T,
    x: T,
    y: T,
) -> Result<C<T>> {
    check_args(kappa, x, y)?;
    let r = bc.reflection(kappa)?;
    let g = |s: T, t: T| image_kernel(r, kappa, s, t);
    let base = g(x, y);
    let Some(w) = p.inverse_weight() else {
        return Ok(re(base));
    };
    let a = p.position;
    let den = w - g(a, a);
    if den.abs() < T::tol(KREIN_POLE_TOL) {
        return Err(Error::NearPole {
            what: "-1/c - G(a,a)",
            magnitude: den.abs().as_f64(),
        });
    }
    Ok(re(base + g(x, a) * g(a, y) / den))
}

/// Krein insertion of several point interactions at once,
/// `G + g_xᵀ Γ^{-1} g_y` with `Γ_ij = -δ_ij/c_i - G(a_i, a_j)`.
pub fn krein_insert_all<T: Real>(
    bc: &HalflineBc<T>,
    points: &[PointInteraction<T>],
    kappa: T,
    x: T,
    y: T,
) -> Result<C<T>> {
    check_args(kappa, x, y)?;
    let r = bc.reflection(kappa)?;
    let g = |s: T, t: T| image_kernel(r, kappa, s, t);
    let active: Vec<(T, T)> = points
        .iter()
        .filter_map(|p| p.inverse_weight().map(|w| (p.position, w)))
        .collect();
    let base = g(x, y);
    if active.is_empty() {
        return Ok(re(base));
    }
    let m = active.len();
    let gamma = CMatrix::from_fn(m, m, |i, j| {
        let diag = if i == j { active[i].1 } else { T::zero() };
        re(diag - g(active[i].0, active[j].0))
    });
    let inv = checked_inverse(&gamma, 1.0 / KREIN_POLE_TOL).map_err(|e| match e {
        Error::Singular { condition } => Error::NearPole {
            what: "Krein matrix",
            magnitude: 1.0 / condition,
        },
        other => other,
    })?;
    let gx = DVector::from_iterator(m, active.iter().map(|&(a, _)| re(g(x, a))));
    let gy = DVector::from_iterator(m, active.iter().map(|&(a, _)| re(g(a, y))));
    Ok(re(base) + (gx.transpose() * inv * gy)[(0, 0)])
}

/// A star graph of `n` half-lines: either one of the two singular target
/// couplings, or a δ-type approximant with one point interaction per edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StarModel<T> {
    /// δ'_s coupling with parameter β.
    DeltaPrimeS { n: usize, beta: T },
    /// δ' coupling with parameter β.
    DeltaPrime { n: usize, beta: T },
    /// Central δ coupling whose permutation-symmetric channel obeys
    /// `ψ'(0+) = b ψ(0)` (vertex strength `α = n b`), plus `point` on every edge.
    CentralDelta {
        n: usize,
        b: T,
        point: PointInteraction<T>,
    },
    /// Central δ_p coupling with `α = b`, plus `point` on every edge.
    CentralDeltaP {
        n: usize,
        b: T,
        point: PointInteraction<T>,
    },
}

impl<T: Real> StarModel<T> {
    pub fn n(&self) -> usize {
        match *self {
            StarModel::DeltaPrimeS { n, .. }
            | StarModel::DeltaPrime { n, .. }
            | StarModel::CentralDelta { n, .. }
            | StarModel::CentralDeltaP { n, .. } => n,
        }
    }

    pub fn point(&self) -> Option<PointInteraction<T>> {
        match *self {
            StarModel::CentralDelta { point, .. } | StarModel::CentralDeltaP { point, .. } => {
                Some(point)
            }
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n() < 1 {
            return Err(Error::InvalidParameter(
                "star needs at least one edge".into(),
            ));
        }
        if let Some(p) = self.point() {
            PointInteraction::new(p.position, p.strength)?;
        }
        Ok(())
    }

    /// The central vertex coupling.
    pub fn vertex_coupling(&self) -> Result<VertexCoupling<T>> {
        self.validate()?;
        match *self {
            StarModel::DeltaPrimeS { n, beta } => {
                VertexCoupling::make(CouplingFamily::DeltaPrimeS, n, beta.into())
            }
            StarModel::DeltaPrime { n, beta } => {
                VertexCoupling::make(CouplingFamily::DeltaPrime, n, beta.into())
            }
            StarModel::CentralDelta { n, b, .. } => {
                VertexCoupling::make(CouplingFamily::Delta, n, (T::from_count(n) * b).into())
            }
            StarModel::CentralDeltaP { n, b, .. } => {
                VertexCoupling::make(CouplingFamily::DeltaP, n, b.into())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectorRole {
    /// Permutation-symmetric functions.
    Symmetric,
    /// Orthogonal complement of the symmetric functions.
    Complement,
    /// The phase-twisted subspace `(ψ, ε^r ψ, …, ε^{r(n-1)} ψ)`.
    Index(usize),
}

/// One invariant one-dimensional channel of a symmetric star operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorSpec<T> {
    pub role: SectorRole,
    /// `ε^r` with `ε = e^{2πi/n}`; `1` for the symmetric sector and `ε` for the complement.
    pub phase: C<T>,
    pub bc: HalflineBc<T>,
    pub point: Option<PointInteraction<T>>,
    pub multiplicity: usize,
}

impl<T: Real> SectorSpec<T> {
    pub fn kernel(&self, kappa: T, x: T, y: T) -> Result<C<T>> {
        match &self.point {
            Some(p) => krein_insert(&self.bc, p, kappa, x, y),
            None => halfline_green(&self.bc, kappa, x, y),
        }
    }

    /// Weight of this sector's kernel in the edge-indexed kernel entry `(j, l)`.
    fn edge_weight(&self, n: usize, j: usize, l: usize) -> C<T> {
        let nn = T::from_count(n);
        match self.role {
            SectorRole::Symmetric => re(T::one() / nn),
            SectorRole::Complement => {
                let delta = if j == l { nn } else { T::zero() };
                re((delta - T::one()) / nn)
            }
            SectorRole::Index(r) => {
                let k = (r * ((j + n - l) % n)) % n;
                let ang = T::two_pi() * T::from_count(k) / nn;
                polar(T::one() / nn, ang)
            }
        }
    }
}

fn epsilon_power<T: Real>(n: usize, r: usize) -> C<T> {
    polar(
        T::one(),
        T::two_pi() * T::from_count(r % n) / T::from_count(n),
    )
}

/// Splits a symmetric star model into its invariant half-line channels.
pub fn sector_decompose<T: Real>(m: &StarModel<T>) -> Result<Vec<SectorSpec<T>>> {
    m.validate()?;
    let n = m.n();
    let two_way = |sym_bc: HalflineBc<T>, comp_bc: HalflineBc<T>, point| {
        let mut v = vec![SectorSpec {
            role: SectorRole::Symmetric,
            phase: re(T::one()),
            bc: sym_bc,
            point,
            multiplicity: 1,
        }];
        if n > 1 {
            v.push(SectorSpec {
                role: SectorRole::Complement,
                phase: epsilon_power(n, 1),
                bc: comp_bc,
                point,
                multiplicity: n - 1,
            });
        }
        v
    };
    let indexed = |zero_bc: HalflineBc<T>, rest_bc: HalflineBc<T>, point| {
        (0..n)
            .map(|r| SectorSpec {
                role: SectorRole::Index(r),
                phase: epsilon_power(n, r),
                bc: if r == 0 { zero_bc } else { rest_bc },
                point,
                multiplicity: 1,
            })
            .collect::<Vec<_>>()
    };
    Ok(match *m {
        StarModel::DeltaPrimeS { n, beta } => two_way(
            HalflineBc::RobinScaled { n, beta },
            HalflineBc::Neumann,
            None,
        ),
        StarModel::CentralDelta { b, point, .. } => {
            two_way(HalflineBc::Robin(b), HalflineBc::Dirichlet, Some(point))
        }
        StarModel::DeltaPrime { n, beta } => indexed(
            HalflineBc::Neumann,
            HalflineBc::RobinScaled { n, beta },
            None,
        ),
        StarModel::CentralDeltaP { n, b, point } => indexed(
            HalflineBc::Dirichlet,
            HalflineBc::Robin(b / T::from_count(n)),
            Some(point),
        ),
    })
}

/// Edge-indexed kernel `G_{jl}(x, y)` of the star (edges numbered from 0),
/// assembled from the sector kernels with the projector weights
/// `ε^{r(j-l)}/n`.
pub fn star_green<T: Real>(
    m: &StarModel<T>,
    kappa: T,
    edge_j: usize,
    x: T,
    edge_l: usize,
    y: T,
) -> Result<C<T>> {
    let n = m.n();
    if edge_j >= n || edge_l >= n {
        return Err(Error::Dimension(format!(
            "edge index ({edge_j}, {edge_l}) out of range for {n} edges"
        )));
    }
    let sectors = sector_decompose(m)?;
    let mut acc = re(T::zero());
    for s in &sectors {
        acc += s.edge_weight(n, edge_j, edge_l) * s.kernel(kappa, x, y)?;
    }
    Ok(acc)
}
