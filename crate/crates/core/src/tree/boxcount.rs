//! Box-counting dimension of planar polylines.

use std::collections::HashSet;

use super::eval::EvaluatedTree;
use super::TreeError;

/// Number of `eps`-boxes touched by the polylines. Segments are walked in
/// steps of at most `eps / 4` so no crossed box is skipped in practice.
pub fn box_count(lines: &[&[Vec<f64>]], eps: f64) -> usize {
    let mut boxes: HashSet<(i64, i64)> = HashSet::new();
    let cell = |x: f64, y: f64| ((x / eps).floor() as i64, (y / eps).floor() as i64);
    for line in lines {
        if let Some(p) = line.first() {
            boxes.insert(cell(p[0], p[1]));
        }
        for w in line.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let len = (b[0] - a[0]).hypot(b[1] - a[1]);
            let steps = (len / (eps / 4.0)).ceil().max(1.0) as usize;
            for i in 1..=steps {
                let t = i as f64 / steps as f64;
                boxes.insert(cell(a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])));
            }
        }
    }
    boxes.len()
}

/// Least-squares slope of `ln N(eps)` against `ln(1/eps)`.
pub fn box_dimension(lines: &[&[Vec<f64>]], scales: &[f64]) -> Result<f64, TreeError> {
    let mut eps: Vec<f64> = scales.iter().copied().filter(|e| *e > 0.0 && e.is_finite()).collect();
    eps.sort_by(f64::total_cmp);
    eps.dedup();
    if eps.len() < 2 {
        return Err(TreeError::TooFewScales);
    }
    let pts: Vec<(f64, f64)> = eps
        .iter()
        .map(|e| ((1.0 / e).ln(), (box_count(lines, *e) as f64).ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Box-counting dimension estimate of a planar tree.
pub fn estimate_box_dimension(tree: &EvaluatedTree, scales: &[f64]) -> Result<f64, TreeError> {
    if tree.dim != 2 {
        return Err(TreeError::UnsupportedDimension(tree.dim));
    }
    let lines: Vec<&[Vec<f64>]> = tree.edges.iter().map(|e| e.polyline.points.as_slice()).collect();
    box_dimension(&lines, scales)
}

/// `n` geometric scales between the longest and the shortest chord of the
/// edges, the range where the tree's own structure is resolved.
pub fn default_box_scales(tree: &EvaluatedTree, n: usize) -> Vec<f64> {
    let chords: Vec<f64> = tree
        .edges
        .iter()
        .filter_map(|e| {
            let (a, b) = (e.polyline.points.first()?, e.polyline.points.last()?);
            let d = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            (d > 0.0).then_some(d)
        })
        .collect();
    let hi = chords.iter().copied().fold(0.0f64, f64::max);
    let lo = chords.iter().copied().fold(f64::INFINITY, f64::min);
    if chords.is_empty() || n < 2 {
        return Vec::new();
    }
    let (hi, lo) = (hi / 2.0, lo.min(hi) / 2.0);
    if hi <= lo {
        return vec![hi, hi / 4.0];
    }
    (0..n).map(|i| hi * (lo / hi).powf(i as f64 / (n - 1) as f64)).collect()
}
