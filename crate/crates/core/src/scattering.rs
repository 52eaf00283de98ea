//! On-shell scattering matrix of a star graph of half-lines and its poles on
//! the positive imaginary momentum axis.

use crate::coupling::VertexCoupling;
use crate::error::{Error, Result};
use crate::linalg::{checked_inverse, identity, singular_values, CMatrix};
use crate::scalar::{cabs, carg, im, polar, re, Real, C};

/// Momentum on one of the two rays where the star-graph resolvent is studied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralParameter<T> {
    /// `k > 0`, energy `k²`.
    RealMomentum(T),
    /// `k = iκ`, `κ > 0`, energy `-κ²`.
    ImaginaryMomentum(T),
}

impl<T: Real> SpectralParameter<T> {
    pub fn new_real(k: T) -> Result<Self> {
        positive(k, "momentum").map(SpectralParameter::RealMomentum)
    }

    pub fn new_imaginary(kappa: T) -> Result<Self> {
        positive(kappa, "kappa").map(SpectralParameter::ImaginaryMomentum)
    }

    pub fn value(self) -> T {
        match self {
            SpectralParameter::RealMomentum(v) | SpectralParameter::ImaginaryMomentum(v) => v,
        }
    }

    pub fn momentum(self) -> C<T> {
        match self {
            SpectralParameter::RealMomentum(k) => re(k),
            SpectralParameter::ImaginaryMomentum(kappa) => im(kappa),
        }
    }

    pub fn energy(self) -> T {
        match self {
            SpectralParameter::RealMomentum(k) => k * k,
            SpectralParameter::ImaginaryMomentum(kappa) => -kappa * kappa,
        }
    }
}

fn positive<T: Real>(v: T, what: &str) -> Result<T> {
    if v > T::zero() && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!(
            "{what} must be positive, got {:?}",
            v
        )))
    }
}

const POLE_CONDITION: f64 = 1e12;

/// `S(k) = ((k-1)I + (k+1)U) ((k+1)I + (k-1)U)^{-1}`.
pub fn s_matrix<T: Real>(c: &VertexCoupling<T>, k: T) -> Result<CMatrix<T>> {
    let k = positive(k, "momentum")?;
    let u = c.unitary();
    let id = identity::<T>(c.n());
    let one = T::one();
    let num = &id * re(k - one) + u * re(k + one);
    let den = &id * re(k + one) + u * re(k - one);
    match checked_inverse(&den, POLE_CONDITION) {
        Ok(inv) => Ok(num * inv),
        Err(Error::Singular { .. }) => {
            // the offending eigenvalue is the one closest to -(k+1)/(k-1)
            let target = re(-(k + one) / (k - one));
            let eig = u.clone().schur().eigenvalues();
            let worst = eig
                .map(|e| {
                    e.iter()
                        .copied()
                        .min_by(|a, b| {
                            cabs(a - target)
                                .partial_cmp(&cabs(b - target))
                                .unwrap_or(std::cmp::Ordering::Equal)
                        })
                        .unwrap_or(target)
                })
                .unwrap_or(target);
            Err(Error::ScatteringPole {
                re: worst.re.as_f64(),
                im: worst.im.as_f64(),
            })
        }
        Err(e) => Err(e),
    }
}

/// A pole of the continued S-matrix at `k = iκ`, i.e. a bound state at energy `-κ²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundState<T> {
    pub kappa: T,
    pub multiplicity: usize,
}

impl<T: Real> BoundState<T> {
    pub fn energy(&self) -> T {
        -self.kappa * self.kappa
    }
}

const SCAN_POINTS: usize = 4000;
/// Lower end of the scan relative to `kappa_max`.
const SCAN_FLOOR: f64 = 1e-6;
/// Null-space threshold used for the multiplicity count.
const NULL_TOL: f64 = 1e-8;
/// A scan candidate is kept only if `wI - U` is this close to singular.
const CANDIDATE_TOL: f64 = 1e-4;

/// Bound states with `κ ∈ (0, kappa_max]`.
///
/// Zeros of `det((iκ+1)I + (iκ-1)U)` are located on a log-spaced κ grid:
/// sign changes of a phase-normalised real form of the determinant are
/// bisected and local minima of its magnitude (even-multiplicity zeros) are
/// golden-section searched. Each candidate is then polished with a Rayleigh
/// quotient of `U`, which is quadratically accurate for a normal matrix.
pub fn bound_states<T: Real>(c: &VertexCoupling<T>, kappa_max: T) -> Result<Vec<BoundState<T>>> {
    let kappa_max = positive(kappa_max, "kappa_max")?;
    let u = c.unitary();
    let n = c.n();

    let det_u = u.determinant();
    let phase0 = {
        // (det U)^{-1/2} i^{-n}: a κ-independent factor that makes the scan function real
        let half = polar(T::one(), -carg(det_u) / T::lit(2.0));
        let mut p = half;
        for _ in 0..n {
            p *= C::new(T::zero(), -T::one());
        }
        p
    };
    let scan_fn = |kappa: T| -> T {
        let phi = T::lit(2.0) * kappa.atan();
        let w = polar(T::one(), phi);
        let d = (identity::<T>(n) * w - u).determinant();
        let twist = polar(T::one(), -T::from_count(n) * phi / T::lit(2.0));
        (d * twist * phase0).re
    };

    let lo = (kappa_max * T::lit(SCAN_FLOOR)).ln();
    let hi = kappa_max.ln();
    let grid: Vec<T> = (0..SCAN_POINTS)
        .map(|i| {
            let t = T::from_count(i) / T::from_count(SCAN_POINTS - 1);
            (lo + (hi - lo) * t).exp()
        })
        .collect();
    let vals: Vec<T> = grid.iter().map(|&k| scan_fn(k)).collect();

    let mut candidates: Vec<T> = Vec::new();
    for i in 0..grid.len() {
        if vals[i] == T::zero() {
            candidates.push(grid[i]);
            continue;
        }
        if i + 1 < grid.len() && vals[i] * vals[i + 1] < T::zero() {
            candidates.push(bisect(&scan_fn, grid[i], grid[i + 1], vals[i]));
        }
        let left = if i > 0 {
            vals[i - 1].abs()
        } else {
            T::max_value().unwrap()
        };
        let right = if i + 1 < grid.len() {
            vals[i + 1].abs()
        } else {
            T::max_value().unwrap()
        };
        if vals[i].abs() <= left && vals[i].abs() <= right {
            let a = if i > 0 { grid[i - 1] } else { grid[i] };
            let b = if i + 1 < grid.len() {
                grid[i + 1]
            } else {
                grid[i]
            };
            candidates.push(golden_min(|k| scan_fn(k).abs(), a, b));
        }
    }

    let mut found: Vec<BoundState<T>> = Vec::new();
    for k0 in candidates {
        let Some(kappa) = polish(u, k0) else { continue };
        if !(kappa > T::zero() && kappa <= kappa_max * (T::one() + T::tol(1e-12))) {
            continue;
        }
        let dup = found
            .iter()
            .any(|b| (b.kappa - kappa).abs() <= T::tol(1e-9) * kappa.max(T::one()));
        if dup {
            continue;
        }
        let w = polar(T::one(), T::lit(2.0) * kappa.atan());
        let mult = singular_values(&(identity::<T>(n) * w - u))
            .into_iter()
            .filter(|&s| s < T::tol(NULL_TOL))
            .count();
        if mult > 0 {
            found.push(BoundState {
                kappa,
                multiplicity: mult,
            });
        }
    }
    found.sort_by(|a, b| a.kappa.partial_cmp(&b.kappa).unwrap());
    Ok(found)
}

fn bisect<T: Real>(f: &impl Fn(T) -> T, mut a: T, mut b: T, fa: T) -> T {
    let mut fa = fa;
    for _ in 0..200 {
        let m = (a + b) / T::lit(2.0);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == T::zero() {
            return m;
        }
        if fa * fm < T::zero() {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    (a + b) / T::lit(2.0)
}

fn golden_min<T: Real>(f: impl Fn(T) -> T, mut a: T, mut b: T) -> T {
    let g = T::lit(0.618_033_988_749_894_8);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if (b - a).abs() <= T::default_epsilon() * b.abs() {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    (a + b) / T::lit(2.0)
}

/// Refines an approximate zero via the Rayleigh quotient of the closest
/// eigenvector of `U` to `w(κ) = (1+iκ)/(1-iκ)`, then maps the eigenvalue
/// `e^{iθ}` back to `κ = tan(θ/2)`.
fn polish<T: Real>(u: &CMatrix<T>, kappa: T) -> Option<T> {
    let n = u.nrows();
    let w = polar(T::one(), T::lit(2.0) * kappa.atan());
    let m = identity::<T>(n) * w - u;
    let svd = m.svd(false, true);
    let (idx, smin) = svd
        .singular_values
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())?;
    if smin > T::lit(CANDIDATE_TOL) {
        return None;
    }
    let v = svd.v_t?.row(idx).adjoint();
    let lambda = (v.adjoint() * u * &v)[(0, 0)] / (v.adjoint() * &v)[(0, 0)];
    let theta = carg(lambda);
    if !(theta > T::zero() && theta < T::pi()) {
        return None;
    }
    Some((theta / T::lit(2.0)).tan())
}
