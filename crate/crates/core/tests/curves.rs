//! Path integration against closed forms.

use std::f64::consts::{FRAC_PI_2, PI};

use dendrite::{arc_length, derive_path, integrate_path, resample, turn_angle, DerivativeCoords, Pose, SGrid};
use num_complex::Complex64;

/// End point of the left Riemann sum for constant rates, summed as a
/// geometric series in the complex plane: the heading is advanced before
/// each step, so step `k` points along `theta0 + omega * k * ds`.
fn riemann_arc_end(r: f64, omega: f64, theta0: f64, ds: f64, steps: usize) -> Complex64 {
    let z = Complex64::from_polar(1.0, omega * ds);
    let first = Complex64::from_polar(r * ds, theta0) * z;
    if (omega * ds).abs() < 1e-300 {
        return first * steps as f64;
    }
    first * (Complex64::new(1.0, 0.0) - z.powu(steps as u32)) / (Complex64::new(1.0, 0.0) - z)
}

fn circle(ds: f64) -> Vec<f64> {
    let grid = SGrid::new(0.0, 2.0, ds).unwrap();
    let coords = DerivativeCoords::constant(grid, 1.0, &[FRAC_PI_2]).unwrap();
    let line = integrate_path(&coords, &Pose::origin(2)).unwrap();
    line.points.last().unwrap().clone()
}

#[test]
fn circle_matches_geometric_sum_exactly() {
    for ds in [1e-2, 1e-3, 1e-4] {
        let end = circle(ds);
        let steps = (2.0 / ds).round() as usize;
        let oracle = riemann_arc_end(1.0, FRAC_PI_2, 0.0, ds, steps);
        assert!(
            (end[0] - oracle.re).abs() < 1e-10,
            "ds {ds}: x {} vs {}",
            end[0],
            oracle.re
        );
        assert!(
            (end[1] - oracle.im).abs() < 1e-10,
            "ds {ds}: y {} vs {}",
            end[1],
            oracle.im
        );
    }
}

#[test]
fn circle_converges_at_first_order() {
    let exact = [0.0, 4.0 / PI];
    let err = |ds: f64| {
        let e = circle(ds);
        (e[0] - exact[0]).hypot(e[1] - exact[1])
    };
    let (e1, e2) = (err(1e-4), err(5e-5));
    assert!(e1 < 1e-3, "error {e1}");
    assert!(e2 <= e1 / 2.0, "{e1} -> {e2}");
    // leading term of the series: the chord sum lags by ds / 2 of turn
    assert!((e1 / 1e-4 - 1.0).abs() < 0.05, "error constant {}", e1 / 1e-4);
}

#[test]
fn arc_length_and_turn_angle_are_riemann_sums() {
    let grid = SGrid::new(0.0, 3.0, 1e-3).unwrap();
    let coords = DerivativeCoords::new(
        grid,
        dendrite::ScalarFn::from_fn(&grid, |s| 1.0 + s),
        vec![dendrite::ScalarFn::from_fn(&grid, |s| s * s)],
    )
    .unwrap();
    let n = 3000;
    let ds = 1e-3;
    let want_len: f64 = (0..n).map(|k| (1.0 + k as f64 * ds) * ds).sum();
    let want_turn: f64 = (0..n).map(|k| (k as f64 * ds).powi(2) * ds).sum();
    assert!((arc_length(&coords, 0.0, 3.0).unwrap() - want_len).abs() < 1e-12);
    assert!((turn_angle(&coords, 0.0, 3.0).unwrap() - want_turn).abs() < 1e-12);
    // and close to the integrals 7.5 and 9
    assert!((want_len - 7.5).abs() < 2e-3);
    assert!((want_turn - 9.0).abs() < 1e-2);
    let line = integrate_path(&coords, &Pose::origin(2)).unwrap();
    assert!((line.cum_arc.last().unwrap() - want_len).abs() < 1e-12);
}

fn rms(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let sum: f64 = a
        .iter()
        .zip(b)
        .map(|(p, q)| p.iter().zip(q).map(|(x, y)| (x - y).powi(2)).sum::<f64>())
        .sum();
    (sum / a.len() as f64).sqrt()
}

fn round_trip(f: impl Fn(f64) -> Vec<f64>, s0: f64, s1: f64, dim: usize) -> f64 {
    let grid = SGrid::new(s0, s1, 1e-3).unwrap();
    let samples: Vec<Vec<f64>> = grid.samples().map(&f).collect();
    let (coords, start) = derive_path(&samples, &grid, dim).unwrap();
    let line = integrate_path(&coords, &start).unwrap();
    rms(&line.points, &samples)
}

#[test]
fn line_circle_parabola_round_trip() {
    assert!(round_trip(|s| vec![0.3 + 2.0 * s, -1.0 + s], 0.0, 1.0, 2) < 1e-9);
    assert!(round_trip(|s| vec![s.cos(), s.sin()], 0.0, 2.0 * PI, 2) < 1e-3);
    assert!(round_trip(|s| vec![s, s * s], -1.0, 1.0, 2) < 1e-3);
    assert!(round_trip(|s| vec![s.cos(), s.sin(), 0.5 * s], 0.0, 4.0, 3) < 1e-3);
}

#[test]
fn resampling_keeps_the_total_turn() {
    let grid = SGrid::new(0.0, 2.0, 1e-3).unwrap();
    let coords = DerivativeCoords::new(
        grid,
        dendrite::ScalarFn::Constant(1.0),
        vec![dendrite::ScalarFn::from_fn(&grid, |s| (3.0 * s).sin())],
    )
    .unwrap();
    let coarse = resample(&coords, 4e-3).unwrap();
    let a = turn_angle(&coords, 0.0, 2.0).unwrap();
    let b = turn_angle(&coarse, 0.0, 2.0).unwrap();
    assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    assert!((arc_length(&coarse, 0.0, 2.0).unwrap() - 2.0).abs() < 1e-9);
}
