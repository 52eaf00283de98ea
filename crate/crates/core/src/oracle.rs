//! Brute-force finite-difference resolvents for cross-checking the closed
//! forms.
//!
//! Each edge `[0, L]` carries the nodes `x_i = i h`, `h = L/(N+1)`, with a
//! Dirichlet condition at `x = L`. The three-point Laplacian is used in the
//! interior; at the vertex a ghost node `x_{-1}` is eliminated through the
//! vertex condition `A Ψ(0) + B Ψ'(0) = 0` with the centred derivative. A δ
//! interaction of strength `c` adds `c/h` to the diagonal at the node nearest
//! to its position.
//!
//! For a fixed origin vector `t = Ψ(0)` the interior values on each edge are
//! `u + t_j w`, where `u` and `w` come from one shared tridiagonal
//! factorisation. The vertex condition then reduces to an n×n system for `t`.

use rayon::prelude::*;

use crate::coupling::ABPair;
use crate::error::{Error, Result};
use crate::greens::{HalflineBc, PointInteraction, StarModel};
use crate::linalg::{checked_inverse, CMatrix, CVector};
use crate::scalar::{cabs, re, ExtendedReal, Real, C};

/// Multiple of `h²` allowed between an analytic kernel and the oracle.
pub const BUDGET_FACTOR: f64 = 50.0;

/// Accepted max-abs deviation from the oracle at step `h`.
pub fn error_budget<T: Real>(h: T) -> T {
    T::lit(BUDGET_FACTOR) * h * h
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    /// Truncation length `L`.
    pub length: T,
    /// Interior node count `N`.
    pub interior: usize,
}

impl<T: Real> GridSpec<T> {
    pub fn new(length: T, interior: usize) -> Result<Self> {
        if !(length > T::zero() && length.is_finite()) {
            return Err(Error::InvalidParameter(
                "grid length must be positive".into(),
            ));
        }
        if interior < 16 {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 16 interior points, got {interior}"
            )));
        }
        Ok(Self { length, interior })
    }

    /// Grid whose step is as close as possible to `h`.
    pub fn from_step(length: T, h: T) -> Result<Self> {
        if !(h > T::zero()) {
            return Err(Error::InvalidParameter("grid step must be positive".into()));
        }
        let cells = (length / h).round().as_f64() as usize;
        Self::new(length, cells.saturating_sub(1))
    }

    pub fn step(&self) -> T {
        self.length / T::from_count(self.interior + 1)
    }

    pub fn node(&self, i: usize) -> T {
        T::from_count(i) * self.step()
    }

    pub fn nearest_node(&self, x: T) -> usize {
        let i = (x / self.step()).round().as_f64();
        if i <= 0.0 {
            0
        } else {
            i as usize
        }
    }

    /// Node index if `x` lies on a node (up to rounding).
    pub fn node_index(&self, x: T) -> Option<usize> {
        let i = self.nearest_node(x);
        let off = (x - self.node(i)).abs();
        (off <= T::tol(1e-9) * self.step() && i <= self.interior + 1).then_some(i)
    }
}

#[derive(Debug, Clone)]
struct Column<T: Real> {
    edge: usize,
    node: usize,
    /// `values[j * (N + 2) + i]` is the kernel at edge `j`, node `i`.
    values: Vec<C<T>>,
}

/// Resolvent kernel columns `G(·, y)` for a set of source points.
#[derive(Debug, Clone)]
pub struct SampledKernel<T: Real> {
    grid: GridSpec<T>,
    edges: usize,
    columns: Vec<Column<T>>,
}

impl<T: Real> SampledKernel<T> {
    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn edges(&self) -> usize {
        self.edges
    }

    /// Source points `(edge, y)` that were solved for.
    pub fn sources(&self) -> Vec<(usize, T)> {
        self.columns
            .iter()
            .map(|c| (c.edge, self.grid.node(c.node)))
            .collect()
    }

    /// Kernel value at node `i` on edge `j` for the `col`-th source.
    pub fn at_node(&self, col: usize, j: usize, i: usize) -> C<T> {
        self.columns[col].values[j * (self.grid.interior + 2) + i]
    }

    /// `G_{jl}(x, y)`; `y` must be one of the solved source nodes on edge `l`,
    /// `x` is linearly interpolated between nodes.
    pub fn evaluate(&self, j: usize, x: T, l: usize, y: T) -> Option<C<T>> {
        if j >= self.edges || x < T::zero() || x > self.grid.length {
            return None;
        }
        let k = self.grid.node_index(y)?;
        let col = self
            .columns
            .iter()
            .position(|c| c.edge == l && c.node == k)?;
        let h = self.grid.step();
        let pos = x / h;
        let i0 = (pos.floor().as_f64() as usize).min(self.grid.interior);
        let frac = pos - T::from_count(i0);
        let v0 = self.at_node(col, j, i0);
        let v1 = self.at_node(col, j, i0 + 1);
        Some(v0 + (v1 - v0) * re(frac))
    }
}

/// Shared tridiagonal factorisation of the interior operator
/// `-Δ_h + κ² + q` on nodes `1..=N`.
struct Interior<T> {
    /// Modified main diagonal after forward elimination.
    pivots: Vec<T>,
    off: T,
}

impl<T: Real> Interior<T> {
    fn new(diag: Vec<T>, off: T) -> Result<Self> {
        let mut pivots = diag;
        let scale = pivots.iter().fold(T::zero(), |a, &d| a.max(d.abs()));
        for i in 1..pivots.len() {
            if pivots[i - 1].abs() <= T::default_epsilon() * scale {
                return Err(Error::EnergyOnSpectrum);
            }
            pivots[i] = pivots[i] - off * off / pivots[i - 1];
        }
        if pivots
            .last()
            .is_none_or(|p| p.abs() <= T::default_epsilon() * scale)
        {
            return Err(Error::EnergyOnSpectrum);
        }
        Ok(Self { pivots, off })
    }

    /// Solves in place.
    fn solve(&self, rhs: &mut [T]) {
        let n = rhs.len();
        for i in 1..n {
            let carry = self.off / self.pivots[i - 1] * rhs[i - 1];
            rhs[i] -= carry;
        }
        rhs[n - 1] /= self.pivots[n - 1];
        for i in (0..n - 1).rev() {
            rhs[i] = (rhs[i] - self.off * rhs[i + 1]) / self.pivots[i];
        }
    }
}

fn solve_star<T: Real>(
    ab: &ABPair<T>,
    points: &[PointInteraction<T>],
    kappa: T,
    grid: &GridSpec<T>,
    sources: &[(usize, T)],
) -> Result<SampledKernel<T>> {
    if !(kappa > T::zero()) {
        return Err(Error::InvalidParameter("kappa must be positive".into()));
    }
    let n = ab.n();
    let nn = grid.interior;
    let h = grid.step();
    let h2 = h * h;
    let two = T::lit(2.0);

    let mut diag = vec![two / h2 + kappa * kappa; nn];
    for p in points {
        let c = match p.strength {
            ExtendedReal::Finite(c) => c,
            ExtendedReal::Infinite => {
                return Err(Error::InvalidParameter(
                    "infinite point strength has no finite-difference form".into(),
                ))
            }
        };
        let i = grid.nearest_node(p.position);
        if i == 0 || i > nn {
            return Err(Error::InvalidParameter(format!(
                "point interaction at {:?} is outside the grid interior",
                p.position
            )));
        }
        diag[i - 1] += c / h;
    }
    let interior = Interior::new(diag, -T::one() / h2)?;

    // response to a unit origin value
    let mut w = vec![T::zero(); nn];
    w[0] = T::one() / h2;
    interior.solve(&mut w);

    let d = (two * w[0] - two - h2 * kappa * kappa) / (two * h);
    let vertex = &ab.a + &ab.b * re(d);
    let vertex_inv = checked_inverse(&vertex, 1e12).map_err(|_| Error::EnergyOnSpectrum)?;

    for &(l, y) in sources {
        if l >= n {
            return Err(Error::Dimension(format!(
                "source edge {l} out of range for {n} edges"
            )));
        }
        if !(y >= T::zero()) || grid.nearest_node(y) > nn {
            return Err(Error::InvalidParameter(format!(
                "source point {:?} outside the grid",
                y
            )));
        }
    }

    let stride = nn + 2;
    let columns: Vec<Column<T>> = sources
        .par_iter()
        .map(|&(l, y)| {
            let k = grid.nearest_node(y);
            // unit source at node k, normalised by the quadrature weight
            let weight = if k == 0 { h / two } else { h };
            let mut u = vec![T::zero(); nn];
            let mut f0 = T::zero();
            if k == 0 {
                f0 = T::one() / weight;
            } else {
                u[k - 1] = T::one() / weight;
                interior.solve(&mut u);
            }
            let rhs = CVector::from_fn(n, |i, _| {
                -(ab.b[(i, l)] * re((two * u[0] + h2 * f0) / (two * h)))
            });
            let t = &vertex_inv * rhs;
            let mut values = vec![re(T::zero()); n * stride];
            for j in 0..n {
                values[j * stride] = t[j];
                for i in 0..nn {
                    let own = if j == l { u[i] } else { T::zero() };
                    values[j * stride + i + 1] = re(own) + t[j] * re(w[i]);
                }
            }
            Column {
                edge: l,
                node: k,
                values,
            }
        })
        .collect();

    Ok(SampledKernel {
        grid: *grid,
        edges: n,
        columns,
    })
}

/// Finite-difference kernel on one half-line with the given origin condition
/// and point interactions, for sources at the nodes nearest to `sources`.
pub fn fd_resolvent_halfline<T: Real>(
    bc: &HalflineBc<T>,
    points: &[PointInteraction<T>],
    kappa: T,
    grid: &GridSpec<T>,
    sources: &[T],
) -> Result<SampledKernel<T>> {
    bc.validate()?;
    let (a, b) = bc.as_ab();
    let ab = ABPair::new(
        CMatrix::from_element(1, 1, re(a)),
        CMatrix::from_element(1, 1, re(b)),
    )?;
    let src: Vec<(usize, T)> = sources.iter().map(|&y| (0, y)).collect();
    solve_star(&ab, points, kappa, grid, &src)
}

/// Finite-difference kernel of a star model; the vertex condition is the
/// `(A, B)` form of the model's central coupling.
pub fn fd_resolvent_star<T: Real>(
    m: &StarModel<T>,
    kappa: T,
    grid: &GridSpec<T>,
    sources: &[(usize, T)],
) -> Result<SampledKernel<T>> {
    let ab = m.vertex_coupling()?.to_ab();
    let points: Vec<_> = m.point().into_iter().collect();
    solve_star(&ab, &points, kappa, grid, sources)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorStats<T> {
    pub max_abs: T,
    pub rms: T,
    pub count: usize,
}

/// Error statistics of an analytic kernel against sampled values at
/// `(j, x, l, y)` sample points.
pub fn compare_kernels<T: Real, F>(
    analytic: F,
    sampled: &SampledKernel<T>,
    samples: &[(usize, T, usize, T)],
) -> Result<ErrorStats<T>>
where
    F: Fn(usize, T, usize, T) -> Result<C<T>>,
{
    let mut max_abs = T::zero();
    let mut sum_sq = T::zero();
    for &(j, x, l, y) in samples {
        let s = sampled.evaluate(j, x, l, y).ok_or_else(|| {
            Error::Dimension(format!(
                "sample ({j}, {:?}; {l}, {:?}) is not covered by the sampled kernel",
                x, y
            ))
        })?;
        let e = cabs(analytic(j, x, l, y)? - s);
        max_abs = max_abs.max(e);
        sum_sq += e * e;
    }
    let count = samples.len();
    let rms = if count == 0 {
        T::zero()
    } else {
        (sum_sq / T::from_count(count)).sqrt()
    };
    Ok(ErrorStats {
        max_abs,
        rms,
        count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greens::{halfline_green, krein_insert, star_green};

    fn grid(h: f64) -> GridSpec<f64> {
        GridSpec::from_step(12.0, h).unwrap()
    }

    fn samples_on(g: &GridSpec<f64>, xs: &[f64]) -> Vec<(usize, f64, usize, f64)> {
        let snap = |v: f64| g.node(g.nearest_node(v));
        let mut s = Vec::new();
        for &x in xs {
            for &y in xs {
                s.push((0, snap(x), 0, snap(y)));
            }
        }
        s
    }

    #[test]
    fn grid_spec_validation() {
        assert!(GridSpec::<f64>::new(12.0, 15).is_err());
        assert!(GridSpec::<f64>::new(0.0, 100).is_err());
        let g = GridSpec::<f64>::from_step(12.0, 3e-3).unwrap();
        assert_eq!(g.interior, 3999);
        assert!((g.step() - 3e-3).abs() < 1e-15);
        assert!(g.step() * g.interior as f64 <= g.length);
        assert_eq!(g.node_index(0.6), Some(200));
        assert_eq!(g.node_index(0.6001), None);
    }

    #[test]
    fn dirichlet_spot_value() {
        let g = GridSpec::new(12.0, 4000).unwrap();
        let k = fd_resolvent_halfline(&HalflineBc::Dirichlet, &[], 1.0, &g, &[2.0]).unwrap();
        let y = g.node(g.nearest_node(2.0));
        let v = k.evaluate(0, 1.0, 0, y).unwrap();
        assert!((v.re - 1f64.sinh() * (-2f64).exp()).abs() < 1e-3);
    }

    #[test]
    fn robin_zero_is_neumann() {
        let g = grid(3e-3);
        let ys = [0.0, 0.9, 2.4];
        let a = fd_resolvent_halfline(&HalflineBc::Robin(0.0), &[], 1.0, &g, &ys).unwrap();
        let b = fd_resolvent_halfline(&HalflineBc::Neumann, &[], 1.0, &g, &ys).unwrap();
        let s = samples_on(&g, &ys);
        let st = compare_kernels(|j, x, l, y| Ok(b.evaluate(j, x, l, y).unwrap()), &a, &s).unwrap();
        assert_eq!(st.max_abs, 0.0);
        let exact = compare_kernels(
            |_, x, _, y| halfline_green(&HalflineBc::Neumann, 1.0, x, y),
            &a,
            &s,
        )
        .unwrap();
        assert!(exact.max_abs < 50.0 * 9e-6);
    }

    #[test]
    fn identical_inputs_zero_error() {
        let g = grid(6e-3);
        let ys = [0.3, 1.2];
        let k = fd_resolvent_halfline(&HalflineBc::Robin(0.4), &[], 1.0, &g, &ys).unwrap();
        let s = samples_on(&g, &ys);
        let st = compare_kernels(|j, x, l, y| Ok(k.evaluate(j, x, l, y).unwrap()), &k, &s).unwrap();
        assert_eq!(st.max_abs, 0.0);
        assert_eq!(st.rms, 0.0);
        assert_eq!(st.count, 4);
    }

    #[test]
    fn second_order_convergence() {
        let xs = [0.3, 0.9, 1.5, 2.4];
        let mut errs = Vec::new();
        for n in [999usize, 1999, 3999] {
            let g = GridSpec::new(12.0, n).unwrap();
            let k = fd_resolvent_halfline(&HalflineBc::Dirichlet, &[], 1.0, &g, &xs).unwrap();
            let st = compare_kernels(
                |_, x, _, y| halfline_green(&HalflineBc::Dirichlet, 1.0, x, y),
                &k,
                &samples_on(&g, &xs),
            )
            .unwrap();
            errs.push(st.max_abs);
        }
        let r1 = errs[0] / errs[1];
        let r2 = errs[1] / errs[2];
        assert!((3.0..=5.0).contains(&r1), "{errs:?}");
        assert!((3.0..=5.0).contains(&r2), "{errs:?}");
        // N=1000 vs N=4000
        assert!((12.0..=20.0).contains(&(errs[0] / errs[2])));
    }

    #[test]
    fn mismatched_condition_is_obvious() {
        let g = grid(3e-3);
        let xs = [0.3, 0.9];
        let k = fd_resolvent_halfline(&HalflineBc::Dirichlet, &[], 1.0, &g, &xs).unwrap();
        let st = compare_kernels(
            |_, x, _, y| halfline_green(&HalflineBc::Neumann, 1.0, x, y),
            &k,
            &samples_on(&g, &xs),
        )
        .unwrap();
        // Dirichlet and Neumann differ by e^{-κ(x+y)}/κ
        let expected = (-0.6f64).exp();
        assert!((st.max_abs - expected).abs() < 1e-3, "{}", st.max_abs);
    }

    #[test]
    fn discrete_kernel_is_symmetric() {
        let g = grid(6e-3);
        let pts = [PointInteraction::new(0.6, -1.5).unwrap()];
        let xs = [0.0, 0.3, 0.6, 1.8];
        for bc in [
            HalflineBc::Dirichlet,
            HalflineBc::Robin(-0.3),
            HalflineBc::RobinScaled { n: 3, beta: 0.5 },
        ] {
            let k = fd_resolvent_halfline(&bc, &pts, 1.0, &g, &xs).unwrap();
            for &x in &xs {
                for &y in &xs {
                    let a = k.evaluate(0, x, 0, y).unwrap();
                    let b = k.evaluate(0, y, 0, x).unwrap();
                    assert!((a - b).norm() < 1e-10, "{bc:?} ({x},{y}): {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn strong_attractive_point_screens() {
        let g = grid(3e-3);
        let p = PointInteraction::new(0.999, -1e6).unwrap();
        let xs = [0.3, 0.999, 2.4];
        let k = fd_resolvent_halfline(&HalflineBc::Neumann, &[p], 1.0, &g, &xs).unwrap();
        let at = k.evaluate(0, 0.999, 0, 2.4).unwrap();
        let free = halfline_green(&HalflineBc::Neumann, 1.0, 0.999, 2.4).unwrap();
        assert!(at.norm() < 1e-4 * free.norm());
        let st = compare_kernels(
            |_, x, _, y| krein_insert(&HalflineBc::Neumann, &p, 1.0, x, y),
            &k,
            &samples_on(&g, &xs),
        )
        .unwrap();
        assert!(st.max_abs < 50.0 * 9e-6, "{}", st.max_abs);
    }

    #[test]
    fn single_edge_star_equals_halfline() {
        let g = grid(6e-3);
        let m = StarModel::DeltaPrimeS { n: 1, beta: 0.8 };
        let a = fd_resolvent_star(&m, 1.0, &g, &[(0, 0.6)]).unwrap();
        let b = fd_resolvent_halfline(
            &HalflineBc::RobinScaled { n: 1, beta: 0.8 },
            &[],
            1.0,
            &g,
            &[0.6],
        )
        .unwrap();
        for x in [0.0, 0.3, 1.2] {
            let d = (a.evaluate(0, x, 0, 0.6).unwrap() - b.evaluate(0, x, 0, 0.6).unwrap()).norm();
            assert!(d < 1e-12, "{d}");
        }
    }

    #[test]
    fn delta_prime_s_star_matches_assembly() {
        let g = GridSpec::new(12.0, 4000).unwrap();
        let m = StarModel::DeltaPrimeS { n: 2, beta: 1.0 };
        let snap = |v: f64| g.node(g.nearest_node(v));
        let ys = [snap(0.5), snap(1.5)];
        let k = fd_resolvent_star(&m, 1.0, &g, &[(0, ys[0]), (1, ys[1])]).unwrap();
        let mut s = Vec::new();
        for j in 0..2 {
            for x in [0.0, 0.5, 1.0, 2.5] {
                s.push((j, snap(x), 0, ys[0]));
                s.push((j, snap(x), 1, ys[1]));
            }
        }
        let st = compare_kernels(|j, x, l, y| star_green(&m, 1.0, j, x, l, y), &k, &s).unwrap();
        assert!(st.max_abs < 2e-3, "{}", st.max_abs);
    }

    #[test]
    fn kirchhoff_is_continuous_at_the_vertex() {
        let g = grid(3e-3);
        let p = PointInteraction::new(1.0, 0.0).unwrap();
        let m = StarModel::CentralDelta {
            n: 3,
            b: 0.0,
            point: p,
        };
        let k = fd_resolvent_star(&m, 1.0, &g, &[(1, 0.9)]).unwrap();
        let v: Vec<_> = (0..3)
            .map(|j| k.evaluate(j, 0.0, 1, 0.9).unwrap())
            .collect();
        assert!((v[0] - v[1]).norm() < 1e-6 && (v[0] - v[2]).norm() < 1e-6);
    }

    #[test]
    fn bad_inputs() {
        let g = grid(6e-3);
        let outside = PointInteraction::new(20.0, 1.0).unwrap();
        assert!(
            fd_resolvent_halfline(&HalflineBc::Dirichlet, &[outside], 1.0, &g, &[1.0]).is_err()
        );
        let inf = PointInteraction::new(1.0, ExtendedReal::Infinite).unwrap();
        assert!(fd_resolvent_halfline(&HalflineBc::Dirichlet, &[inf], 1.0, &g, &[1.0]).is_err());
        assert!(fd_resolvent_halfline(&HalflineBc::Dirichlet, &[], 1.0, &g, &[13.0]).is_err());
        assert!(fd_resolvent_halfline(&HalflineBc::Dirichlet, &[], 0.0, &g, &[1.0]).is_err());
        let k = fd_resolvent_halfline(&HalflineBc::Dirichlet, &[], 1.0, &g, &[1.2]).unwrap();
        assert!(k.evaluate(0, 0.5, 0, 1.0).is_none());
        assert!(compare_kernels(|_, _, _, _| Ok(re(0.0)), &k, &[(0, 0.5, 0, 1.0)]).is_err());
    }
}
