//! Scale factor between trees and canopy comparison.

use serde::Serialize;

use super::eval::EvaluatedTree;
use super::TreeError;

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Distance between the first fork point and the first node after it.
fn first_span(tree: &EvaluatedTree) -> Result<f64, TreeError> {
    let fork = tree.first_fork().ok_or(TreeError::NotATree)?;
    let child = tree
        .nodes
        .iter()
        .find(|n| n.id.generation() == 1)
        .ok_or(TreeError::NotATree)?;
    Ok(dist(fork, &child.position))
}

/// Ratio of the distances between the first two corresponding branch nodes
/// of `a` and `b`.
pub fn canopy_scale(a: &EvaluatedTree, b: &EvaluatedTree) -> Result<f64, TreeError> {
    let (da, db) = (first_span(a)?, first_span(b)?);
    if da == 0.0 || db == 0.0 || !da.is_finite() || !db.is_finite() {
        return Err(TreeError::DegenerateDistance);
    }
    Ok(da / db)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub scale: f64,
    /// Per generation, the largest mismatch between corresponding branch
    /// vectors (node minus parent) after aligning `b` onto `a`.
    pub per_generation_distance: Vec<f64>,
    /// Per generation, the largest distance between corresponding nodes.
    pub per_generation_offset: Vec<f64>,
    pub fitted_rho: f64,
    pub converged: bool,
}

fn bisector(tree: &EvaluatedTree, fork: &[f64]) -> Result<[f64; 2], TreeError> {
    let mut sum = [0.0, 0.0];
    for n in tree.generation(1) {
        let d = dist(&n.position, fork);
        if d == 0.0 {
            return Err(TreeError::DegenerateDistance);
        }
        sum[0] += (n.position[0] - fork[0]) / d;
        sum[1] += (n.position[1] - fork[1]) / d;
    }
    let norm = sum[0].hypot(sum[1]);
    if norm < 1e-12 {
        return Err(TreeError::DegenerateDistance);
    }
    Ok([sum[0] / norm, sum[1] / norm])
}

/// Scales `b` onto `a`, rotates it so the first-generation bisectors
/// coincide and translates the fork points together, then measures how far
/// corresponding branches of each generation still differ.
///
/// Planar trees only. Both trees must share their branch topology for the
/// first `generations` generations.
pub fn compare_canopies(
    a: &EvaluatedTree,
    b: &EvaluatedTree,
    generations: usize,
) -> Result<EquivalenceReport, TreeError> {
    if a.dim != 2 || b.dim != 2 {
        return Err(TreeError::UnsupportedDimension(a.dim.max(b.dim)));
    }
    if generations == 0 {
        return Err(TreeError::NoGenerations);
    }
    let ids = |t: &EvaluatedTree| {
        t.nodes
            .iter()
            .filter(|n| (1..=generations).contains(&n.id.generation()))
            .map(|n| n.id.clone())
            .collect::<Vec<_>>()
    };
    let (ia, ib) = (ids(a), ids(b));
    if ia != ib {
        return Err(TreeError::TopologyMismatch(format!(
            "{} vs {} nodes in the first {generations} generations",
            ia.len(),
            ib.len()
        )));
    }
    if a.max_generation() < generations || b.max_generation() < generations {
        return Err(TreeError::TopologyMismatch(format!(
            "trees have fewer than {generations} generations"
        )));
    }

    let scale = canopy_scale(a, b)?;
    let fa = a.first_fork().ok_or(TreeError::NotATree)?.to_vec();
    let fb = b.first_fork().ok_or(TreeError::NotATree)?.to_vec();
    let (ua, ub) = (bisector(a, &fa)?, bisector(b, &fb)?);
    let theta = ua[1].atan2(ua[0]) - ub[1].atan2(ub[0]);
    let (sin, cos) = theta.sin_cos();
    let map = |p: &[f64]| {
        let (x, y) = (scale * (p[0] - fb[0]), scale * (p[1] - fb[1]));
        [fa[0] + cos * x - sin * y, fa[1] + sin * x + cos * y]
    };

    let mut d = vec![0.0f64; generations];
    let mut offset = vec![0.0f64; generations];
    let nb: std::collections::HashMap<_, _> = b.nodes.iter().enumerate().map(|(i, n)| (n.id.clone(), i)).collect();
    for (i, n) in a.nodes.iter().enumerate() {
        let g = n.id.generation();
        if g == 0 || g > generations {
            continue;
        }
        let j = nb[&n.id];
        let pa = &n.position;
        let qa = a.parent_position(i);
        let pb = map(&b.nodes[j].position);
        let qb = map(b.parent_position(j));
        let inc = ((pa[0] - qa[0]) - (pb[0] - qb[0])).hypot((pa[1] - qa[1]) - (pb[1] - qb[1]));
        d[g - 1] = d[g - 1].max(inc);
        offset[g - 1] = offset[g - 1].max((pa[0] - pb[0]).hypot(pa[1] - pb[1]));
    }

    let scale_ref = first_span(a)?;
    if d.iter().all(|v| *v <= 1e-12 * scale_ref) {
        return Ok(EquivalenceReport {
            scale,
            per_generation_distance: d,
            per_generation_offset: offset,
            fitted_rho: 0.0,
            converged: true,
        });
    }
    let fitted_rho = fit_ratio(&d);
    let decreasing = d.windows(2).all(|w| w[1] < w[0]);
    Ok(EquivalenceReport {
        scale,
        per_generation_distance: d,
        per_generation_offset: offset,
        fitted_rho,
        converged: decreasing && fitted_rho > 0.0 && fitted_rho < 1.0,
    })
}

/// `exp` of the least-squares slope of `ln d_i` against `i`.
fn fit_ratio(d: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = d
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.0)
        .map(|(i, v)| (i as f64, v.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxy / sxx).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fitted_ratio_of_geometric_sequence() {
        let d: Vec<f64> = (0..6).map(|i| 0.5 * 0.6f64.powi(i)).collect();
        assert!((fit_ratio(&d) - 0.6).abs() < 1e-12);
    }
}
