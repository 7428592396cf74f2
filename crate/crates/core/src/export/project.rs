use super::ExportError;
use crate::accessory::DecoratedTree;
use crate::curve::Pose;

/// Rows selecting the coordinate axes `axes` of a `dim`-dimensional space.
pub fn drop_axes_basis(dim: usize, axes: &[usize]) -> Vec<Vec<f64>> {
    axes.iter()
        .map(|&a| (0..dim).map(|j| if j == a { 1.0 } else { 0.0 }).collect())
        .collect()
}

fn apply(basis: &[Vec<f64>], p: &[f64]) -> Vec<f64> {
    basis
        .iter()
        .map(|row| row.iter().zip(p).map(|(a, b)| a * b).sum())
        .collect()
}

/// Heading of a unit direction in the target dimension (2 or 3).
fn heading_of(d: &[f64]) -> Vec<f64> {
    match d.len() {
        2 => vec![d[1].atan2(d[0])],
        _ => vec![d[1].atan2(d[0]), d[0].hypot(d[1]).atan2(d[2])],
    }
}

/// Orthographic projection onto the rows of `basis`: every point `p` maps
/// to `basis * p`. Channels, ids and topology are kept; headings are
/// recomputed from the projected polylines where they have a direction.
pub fn project(decorated: &DecoratedTree, target_dim: usize, basis: &[Vec<f64>]) -> Result<DecoratedTree, ExportError> {
    let dim = decorated.tree.dim;
    if !(2..=3).contains(&target_dim) {
        return Err(ExportError::BadBasis(format!(
            "target dimension must be 2 or 3, got {target_dim}"
        )));
    }
    if basis.len() != target_dim {
        return Err(ExportError::BadBasis(format!(
            "{} rows for a {target_dim}-dimensional target",
            basis.len()
        )));
    }
    if let Some(row) = basis.iter().find(|r| r.len() != dim) {
        return Err(ExportError::BadBasis(format!(
            "rows need {dim} columns, got {}",
            row.len()
        )));
    }
    for i in 0..target_dim {
        for j in i..target_dim {
            let g: f64 = basis[i].iter().zip(&basis[j]).map(|(a, b)| a * b).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            if (g - want).abs() > 1e-9 {
                return Err(ExportError::BadBasis(format!(
                    "rows are not orthonormal: <r{i}, r{j}> = {g}"
                )));
            }
        }
    }

    let mut out = decorated.clone();
    let tree = &mut out.tree;
    tree.dim = target_dim;
    let root_dir = {
        let mut d = vec![0.0; dim];
        crate::curve::direction(&decorated.tree.root.heading, &mut d);
        apply(basis, &d)
    };
    let root_heading = heading_of(&root_dir);
    tree.root = Pose::new(apply(basis, &decorated.tree.root.position), root_heading.clone());
    for edge in &mut tree.edges {
        let line = &mut edge.polyline;
        line.points = line.points.iter().map(|p| apply(basis, p)).collect();
        // headings: direction of travel of the projected polyline
        let n = line.points.len();
        let mut headings = Vec::with_capacity(n);
        let mut last = root_heading.clone();
        for i in 0..n {
            let j = if i + 1 < n { i } else { i.saturating_sub(1) };
            if j + 1 < n {
                let d: Vec<f64> = line.points[j + 1]
                    .iter()
                    .zip(&line.points[j])
                    .map(|(a, b)| a - b)
                    .collect();
                if d.iter().any(|v| *v != 0.0) {
                    last = heading_of(&d);
                }
            }
            headings.push(last.clone());
        }
        line.headings = headings;
    }
    for (i, node) in tree.nodes.iter_mut().enumerate() {
        node.position = apply(basis, &node.position);
        let heading = tree.edges[i]
            .polyline
            .headings
            .last()
            .cloned()
            .unwrap_or_else(|| root_heading.clone());
        node.pose = Pose::new(node.position.clone(), heading);
    }
    Ok(out)
}
