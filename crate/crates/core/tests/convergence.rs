//! Measured behaviour of the approximation sweep beyond the acceptance suite.

use qgraph::approximation::stage_norms;
use qgraph::*;

fn grid() -> GridSpecF64 {
    GridSpecF64::new(12.0, 400).unwrap()
}

#[test]
fn dirichlet_to_neumann_sector_decays_like_root_a() {
    // the approximant and target differ at O(1) on the strip x < a
    for family in [TargetFamily::DeltaPrimeS, TargetFamily::DeltaPrime] {
        let mut prev: Option<f64> = None;
        for a in [1e-2, 1e-3, 1e-4] {
            let s = schedule(family, 1.0, 3, a).unwrap();
            let norms = stage_norms(&s, 3, 1.0, 1.0, &grid()).unwrap();
            let strip = match family {
                TargetFamily::DeltaPrimeS => norms.comp,
                TargetFamily::DeltaPrime => norms.sym,
            };
            if a <= 1e-3 {
                assert!(
                    (strip / (a / 3.0).sqrt() - 1.0).abs() < 0.01,
                    "a={a}: {strip}"
                );
            }
            if let Some(p) = prev {
                let slope = (p / strip).log10();
                assert!((0.45..=0.55).contains(&slope), "slope {slope}");
            }
            prev = Some(strip);
        }
    }
}

#[test]
fn dirichlet_target_sector_decays_linearly() {
    let norm = |a: f64| {
        let s = schedule(TargetFamily::DeltaPrimeS, 0.0, 3, a).unwrap();
        stage_norms(&s, 3, 0.0, 1.0, &grid()).unwrap().sym
    };
    let slope = (norm(1e-2) / norm(1e-3)).log10();
    assert!((0.9..=1.1).contains(&slope), "slope {slope}");
}

#[test]
fn pointwise_difference_is_order_a() {
    let kappa = 1.0;
    let xs: Vec<f64> = (0..=9).map(|i| 0.5 + 0.5 * i as f64).collect();
    for family in [TargetFamily::DeltaPrimeS, TargetFamily::DeltaPrime] {
        for (n, beta) in [(2, 1.0), (3, -0.5), (5, 0.0)] {
            let target = approximation::target_model(family, n, beta);
            for a in [1e-2, 1e-3, 1e-4] {
                let approx = schedule(family, beta, n, a)
                    .unwrap()
                    .approximant(n)
                    .unwrap();
                for &x in &xs {
                    for &y in &xs {
                        for l in [0, 1] {
                            let d = star_green(&approx, kappa, 0, x, l, y).unwrap()
                                - star_green(&target, kappa, 0, x, l, y).unwrap();
                            let envelope = 10.0 * a * (-kappa * (x + y)).exp();
                            assert!(d.norm() <= envelope, "{family:?} n={n} a={a} x={x} y={y}");
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn hs_norm_grid_refinement_is_second_order() {
    let s = schedule(TargetFamily::DeltaPrimeS, 1.0, 2, 1e-2).unwrap();
    let total = |n: usize| {
        stage_norms(&s, 2, 1.0, 1.0, &GridSpecF64::new(12.0, n).unwrap())
            .unwrap()
            .total
    };
    let (t1, t2, t4) = (total(400), total(801), total(1603));
    assert!(((t1 - t2) / t2).abs() < 5e-4);
    let ratio = (t1 - t2) / (t2 - t4);
    assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn near_resonant_kernel_matches_oracle_relatively() {
    // κ = 1 sits close to a bound state here, so |G| is about 30
    let bc = HalflineBc::Neumann;
    let points = [
        PointInteraction::new(0.6, -1.0 / 0.6).unwrap(),
        PointInteraction::new(1.5, 0.8).unwrap(),
    ];
    let ys: Vec<f64> = (1..=10).map(|k| 0.3 * k as f64).collect();
    let rel = |h: f64| {
        let grid = GridSpecF64::from_step(12.0, h).unwrap();
        let sampled = fd_resolvent_halfline(&bc, &points, 1.0, &grid, &ys).unwrap();
        let samples: Vec<_> = ys
            .iter()
            .flat_map(|&x| ys.iter().map(move |&y| (0, x, 0, y)))
            .collect();
        let err = compare_kernels(
            |_, x, _, y| krein_insert_all(&bc, &points, 1.0, x, y),
            &sampled,
            &samples,
        )
        .unwrap()
        .max_abs;
        let scale = samples
            .iter()
            .map(|&(_, x, _, y)| krein_insert_all(&bc, &points, 1.0, x, y).unwrap().norm())
            .fold(0.0, f64::max);
        (err, err / scale)
    };
    let (e1, r1) = rel(3e-3);
    let (e2, _) = rel(1.5e-3);
    assert!(r1 < 1e-4, "relative error {r1}");
    assert!((3.0..=5.0).contains(&(e1 / e2)));
}
