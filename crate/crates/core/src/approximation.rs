//! Scaled δ approximations of the δ'_s and δ' couplings.
//!
//! An approximant places a δ (or δ_p) coupling of strength `b(a)` at the
//! vertex and a δ interaction of strength `c(a) = -1/a` on every edge at
//! distance `a`. Both the approximant and the target split into the same
//! half-line sectors, so the distance between their resolvents is measured
//! sector by sector through the Hilbert–Schmidt norm of the kernel
//! difference on `[0, L]²`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::greens::{sector_decompose, HalflineBc, PointInteraction, SectorSpec, StarModel};
use crate::oracle::GridSpec;
use crate::scalar::{Real, C};

pub const DEFAULT_KAPPA: f64 = 1.0;
pub const DEFAULT_LENGTH: f64 = 12.0;
pub const DEFAULT_INTERIOR: usize = 400;
pub const DEFAULT_A_LIST: [f64; 5] = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3];

/// Pre-flight guard on `|n + βκ|`.
pub const TARGET_POLE_GUARD: f64 = 1e-6;
/// Pre-flight guard on the Krein denominator `|-1/c - G(a,a)|`.
pub const KREIN_POLE_GUARD: f64 = 1e-10;
/// Equal sub-intervals inserted on `[0, a]` where the kernels differ at O(1).
pub const STRIP_SUBDIVISIONS: usize = 16;
/// Number of smallest-`a` stages used in the log-log fit.
pub const FIT_POINTS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TargetFamily {
    DeltaPrimeS,
    DeltaPrime,
}

impl TargetFamily {
    pub fn name(self) -> &'static str {
        match self {
            TargetFamily::DeltaPrimeS => "delta-prime-s",
            TargetFamily::DeltaPrime => "delta-prime",
        }
    }
}

impl std::str::FromStr for TargetFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "delta-prime-s" => Ok(TargetFamily::DeltaPrimeS),
            "delta-prime" => Ok(TargetFamily::DeltaPrime),
            _ => Err(Error::InvalidParameter(format!(
                "unsupported target family {s:?}"
            ))),
        }
    }
}

/// Coupling constants of the approximant at distance `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproximationStage<T> {
    pub family: TargetFamily,
    pub a: T,
    /// Central strength.
    pub b: T,
    /// Strength of each edge interaction.
    pub c: T,
    /// Robin constant of the non-trivial sector at the origin, `ψ'(0+) = b ψ(0)`.
    pub per_channel_b: T,
}

/// `b(a)` and `c(a)` for the requested family:
/// δ'_s uses `b = -β/(n a²)`, δ' uses `b = -β/a²`; both use `c = -1/a`.
pub fn schedule<T: Real>(
    family: TargetFamily,
    beta: T,
    n: usize,
    a: T,
) -> Result<ApproximationStage<T>> {
    if !(a > T::zero() && a.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "a must be positive, got {:?}",
            a
        )));
    }
    if n < 1 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let nn = T::from_count(n);
    let c = -T::one() / a;
    let (b, per_channel_b) = match family {
        TargetFamily::DeltaPrimeS => {
            let b = -beta / (nn * a * a);
            (b, b)
        }
        TargetFamily::DeltaPrime => {
            let b = -beta / (a * a);
            (b, b / nn)
        }
    };
    Ok(ApproximationStage {
        family,
        a,
        b,
        c,
        per_channel_b,
    })
}

impl<T: Real> ApproximationStage<T> {
    pub fn point(&self) -> Result<PointInteraction<T>> {
        PointInteraction::new(self.a, self.c)
    }

    pub fn approximant(&self, n: usize) -> Result<StarModel<T>> {
        let point = self.point()?;
        Ok(match self.family {
            TargetFamily::DeltaPrimeS => StarModel::CentralDelta {
                n,
                b: self.b,
                point,
            },
            TargetFamily::DeltaPrime => StarModel::CentralDeltaP {
                n,
                b: self.b,
                point,
            },
        })
    }
}

pub fn target_model<T: Real>(family: TargetFamily, n: usize, beta: T) -> StarModel<T> {
    match family {
        TargetFamily::DeltaPrimeS => StarModel::DeltaPrimeS { n, beta },
        TargetFamily::DeltaPrime => StarModel::DeltaPrime { n, beta },
    }
}

/// Leading-order Robin constant seen just beyond the edge interaction,
/// `B(a) = c + b/(1 + ab)`.
pub fn effective_robin<T: Real>(b: T, c: T, a: T) -> Result<T> {
    if !(a > T::zero()) {
        return Err(Error::InvalidParameter("a must be positive".into()));
    }
    let den = T::one() + a * b;
    if den.abs() < T::tol(1e-14) {
        return Err(Error::DegenerateStage(format!(
            "1 + ab = {:e}",
            den.as_f64()
        )));
    }
    Ok(c + b / den)
}

/// Quadrature nodes on `[0, L]`: the uniform grid nodes, `a` itself, and a
/// uniform subdivision of `[0, a]`.
pub fn quadrature_nodes<T: Real>(grid: &GridSpec<T>, a: Option<T>) -> Vec<T> {
    let mut nodes: Vec<T> = (0..=grid.interior + 1).map(|i| grid.node(i)).collect();
    if let Some(a) = a.filter(|&a| a > T::zero() && a < grid.length) {
        nodes.extend(
            (0..=STRIP_SUBDIVISIONS)
                .map(|i| a * T::from_count(i) / T::from_count(STRIP_SUBDIVISIONS)),
        );
    }
    nodes.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let merge = T::tol(1e-13) * grid.length;
    nodes.dedup_by(|x, y| (*x - *y).abs() <= merge);
    nodes
}

fn trapezoid_weights<T: Real>(nodes: &[T]) -> Vec<T> {
    let mut w = vec![T::zero(); nodes.len()];
    let half = T::lit(0.5);
    for i in 0..nodes.len().saturating_sub(1) {
        let d = (nodes[i + 1] - nodes[i]) * half;
        w[i] += d;
        w[i + 1] += d;
    }
    w
}

/// Samples of a kernel on a tensor grid, row-major in `(x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceKernel<T: Real> {
    pub nodes: Vec<T>,
    pub values: Vec<C<T>>,
}

impl<T: Real> DifferenceKernel<T> {
    /// Tabulates `f` on `nodes × nodes`, rows in parallel.
    pub fn from_fn<F>(nodes: Vec<T>, f: F) -> Result<Self>
    where
        F: Fn(T, T) -> Result<C<T>> + Sync,
    {
        let rows: Vec<Vec<C<T>>> = nodes
            .par_iter()
            .map(|&x| nodes.iter().map(|&y| f(x, y)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            values: rows.into_iter().flatten().collect(),
            nodes,
        })
    }

    pub fn at(&self, i: usize, j: usize) -> C<T> {
        self.values[i * self.nodes.len() + j]
    }
}

/// Difference of the approximant and target sector kernels,
/// `G_approx(x, y) - G_target(x, y)`, on the quadrature grid for distance `a`.
pub fn sector_difference<T: Real>(
    target: &SectorSpec<T>,
    approx: &SectorSpec<T>,
    kappa: T,
    a: T,
    grid: &GridSpec<T>,
) -> Result<DifferenceKernel<T>> {
    if target.multiplicity != approx.multiplicity {
        return Err(Error::InvalidParameter(format!(
            "sector multiplicities differ ({} vs {})",
            target.multiplicity, approx.multiplicity
        )));
    }
    preflight(target, kappa)?;
    preflight(approx, kappa)?;
    DifferenceKernel::from_fn(quadrature_nodes(grid, Some(a)), |x, y| {
        Ok(approx.kernel(kappa, x, y)? - target.kernel(kappa, x, y)?)
    })
}

fn preflight<T: Real>(s: &SectorSpec<T>, kappa: T) -> Result<()> {
    if let HalflineBc::RobinScaled { n, beta } = s.bc {
        let d = (T::from_count(n) + beta * kappa).abs();
        if d <= T::lit(TARGET_POLE_GUARD) {
            return Err(Error::NearPole {
                what: "n + beta*kappa",
                magnitude: d.as_f64(),
            });
        }
    }
    if let Some(p) = &s.point {
        if let Some(c) = p.strength.finite().filter(|&c| c != T::zero()) {
            let gaa = crate::greens::halfline_green(&s.bc, kappa, p.position, p.position)?.re;
            let d = (-T::one() / c - gaa).abs();
            if d <= T::lit(KREIN_POLE_GUARD) {
                return Err(Error::NearPole {
                    what: "-1/c - G(a,a)",
                    magnitude: d.as_f64(),
                });
            }
        }
    }
    Ok(())
}

/// Hilbert–Schmidt norm by the 2-D trapezoidal rule.
pub fn hs_norm<T: Real>(k: &DifferenceKernel<T>) -> T {
    let w = trapezoid_weights(&k.nodes);
    let m = k.nodes.len();
    let mut total = T::zero();
    for i in 0..m {
        let mut row = T::zero();
        for (wj, v) in w.iter().zip(&k.values[i * m..(i + 1) * m]) {
            row += *wj * v.norm_sqr();
        }
        total += w[i] * row;
    }
    total.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorNorms<T> {
    /// Norm in the multiplicity-one sector (symmetric sector for δ'_s, `r = 0` for δ').
    pub sym: T,
    /// Norm in one of the `n - 1` equivalent remaining sectors; 0 when `n = 1`.
    pub comp: T,
    /// `sqrt(sym² + (n-1) comp²)`.
    pub total: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageRecord<T> {
    pub stage: ApproximationStage<T>,
    pub norms: Option<SectorNorms<T>>,
    /// Why the stage was rejected, when it was.
    pub error: Option<Error>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport<T> {
    pub family: TargetFamily,
    pub n: usize,
    pub beta: T,
    pub kappa: T,
    pub grid: GridSpec<T>,
    /// In the order of the requested (decreasing) `a` values.
    pub stages: Vec<StageRecord<T>>,
    pub fitted_slope: Option<T>,
    pub fitted_intercept: Option<T>,
}

impl<T: Real> ConvergenceReport<T> {
    pub fn all_valid(&self) -> bool {
        self.stages.iter().all(|s| s.norms.is_some())
    }

    /// `(a, total)` of the valid stages.
    pub fn totals(&self) -> Vec<(T, T)> {
        self.stages
            .iter()
            .filter_map(|s| s.norms.map(|nm| (s.stage.a, nm.total)))
            .collect()
    }
}

/// Sector norms of one stage.
pub fn stage_norms<T: Real>(
    stage: &ApproximationStage<T>,
    n: usize,
    beta: T,
    kappa: T,
    grid: &GridSpec<T>,
) -> Result<SectorNorms<T>> {
    let target = sector_decompose(&target_model(stage.family, n, beta))?;
    let approx = sector_decompose(&stage.approximant(n)?)?;
    // first entry is the multiplicity-one sector, second a representative of the rest
    let sym = hs_norm(&sector_difference(
        &target[0], &approx[0], kappa, stage.a, grid,
    )?);
    let comp = if n > 1 {
        hs_norm(&sector_difference(
            &target[1], &approx[1], kappa, stage.a, grid,
        )?)
    } else {
        T::zero()
    };
    let rest = T::from_count(n - 1);
    Ok(SectorNorms {
        sym,
        comp,
        total: (sym * sym + rest * comp * comp).sqrt(),
    })
}

/// Runs the approximation at every `a` in `a_list` and fits
/// `log(total) = slope · log(a) + intercept` over the smallest valid `a`.
pub fn convergence_sweep<T: Real>(
    family: TargetFamily,
    beta: T,
    n: usize,
    kappa: T,
    a_list: &[T],
    grid: &GridSpec<T>,
) -> Result<ConvergenceReport<T>> {
    if n < 1 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if !(kappa > T::zero()) {
        return Err(Error::InvalidParameter("kappa must be positive".into()));
    }
    if a_list.is_empty() {
        return Err(Error::InvalidParameter("a-list is empty".into()));
    }
    if a_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidParameter(
            "a-list must be strictly decreasing".into(),
        ));
    }
    let mut stages = Vec::with_capacity(a_list.len());
    for &a in a_list {
        let stage = schedule(family, beta, n, a)?;
        let rec = match stage_norms(&stage, n, beta, kappa, grid) {
            Ok(norms) => StageRecord {
                stage,
                norms: Some(norms),
                error: None,
            },
            Err(e) => StageRecord {
                stage,
                norms: None,
                error: Some(e),
            },
        };
        stages.push(rec);
    }
    let mut report = ConvergenceReport {
        family,
        n,
        beta,
        kappa,
        grid: *grid,
        stages,
        fitted_slope: None,
        fitted_intercept: None,
    };
    let totals = report.totals();
    let tail = &totals[totals.len().saturating_sub(FIT_POINTS)..];
    if let Some((s, i)) = fit_log_log(tail) {
        report.fitted_slope = Some(s);
        report.fitted_intercept = Some(i);
    }
    Ok(report)
}

/// Least-squares line through `(log x, log y)`; `None` with fewer than two
/// usable points.
pub fn fit_log_log<T: Real>(points: &[(T, T)]) -> Option<(T, T)> {
    let logs: Vec<(T, T)> = points
        .iter()
        .filter(|(x, y)| *x > T::zero() && *y > T::zero())
        .map(|&(x, y)| (x.ln(), y.ln()))
        .collect();
    if logs.len() < 2 {
        return None;
    }
    let m = T::from_count(logs.len());
    let mx = logs.iter().fold(T::zero(), |s, p| s + p.0) / m;
    let my = logs.iter().fold(T::zero(), |s, p| s + p.1) / m;
    let sxx = logs
        .iter()
        .fold(T::zero(), |s, p| s + (p.0 - mx) * (p.0 - mx));
    if sxx == T::zero() {
        return None;
    }
    let sxy = logs
        .iter()
        .fold(T::zero(), |s, p| s + (p.0 - mx) * (p.1 - my));
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}
