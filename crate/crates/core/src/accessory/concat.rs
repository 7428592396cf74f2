use std::collections::BTreeMap;

use super::{
    angular_name, evaluate_accessories, AccessoryError, AccessoryFn, AccessoryKind, AccessorySet, EnhancedTree,
    Junction,
};
use crate::curve::{DerivativeCoords, ScalarFn};
use crate::grid::SGrid;
use crate::tree::{BranchPointSet, TreeSpec};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ConcatOptions {
    /// Resample the second tree when the grid steps differ.
    pub allow_resample: bool,
}

/// Sequences `second` after `first`: the second domain is shifted to begin
/// where the first ends, and every function continues with the second
/// tree's values from there. See [`concatenate_with`].
pub fn concatenate(first: &EnhancedTree, second: &EnhancedTree) -> Result<EnhancedTree, AccessoryError> {
    concatenate_with(first, second, &ConcatOptions::default())
}

fn sequence(split: usize, shift: f64, a: ScalarFn, b: ScalarFn) -> ScalarFn {
    ScalarFn::Sequence {
        split,
        shift,
        first: Box::new(a),
        second: Box::new(b),
    }
}

fn interpolate(values: &[f64], old: &SGrid, new: &SGrid) -> Vec<f64> {
    new.samples()
        .map(|s| {
            let x = ((s - old.s_min()) / old.delta_s()).clamp(0.0, old.last_index() as f64);
            let k = (x.floor() as usize).min(old.last_index());
            let t = x - k as f64;
            if k + 1 < values.len() {
                values[k] * (1.0 - t) + values[k + 1] * t
            } else {
                values[k]
            }
        })
        .collect()
}

fn resample_accessories(set: &AccessorySet, old: &SGrid, new: &SGrid) -> Result<AccessorySet, AccessoryError> {
    fn fix(f: &ScalarFn, old: &SGrid, new: &SGrid) -> Result<ScalarFn, AccessoryError> {
        Ok(match f {
            ScalarFn::Sampled(v) => ScalarFn::Sampled(interpolate(v, old, new)),
            ScalarFn::Sequence { .. } => ScalarFn::Sampled(interpolate(&f.sample(old)?, old, new)),
            other => other.clone(),
        })
    }
    let mut out = AccessorySet::new();
    for a in set.iter() {
        let mut a = a.clone();
        a.components = a
            .components
            .iter()
            .map(|c| fix(c, old, new))
            .collect::<Result<_, _>>()?;
        out.insert(a)?;
    }
    Ok(out)
}

/// Primitive of every derivative channel at the end of the all-`+1` spine
/// of `tree`, starting from the tree's own continuity constants.
fn spine_end_values(tree: &EnhancedTree) -> Result<BTreeMap<String, f64>, AccessoryError> {
    let spine = EnhancedTree {
        spec: TreeSpec::path(tree.spec.coords().clone()),
        sensory: None,
        ..tree.clone()
    };
    let decorated = evaluate_accessories(&spine, &BTreeMap::new())?;
    let edge = &decorated.tree.edges[0];
    let line = &edge.polyline;
    let mut out = BTreeMap::new();
    out.insert("dr".to_string(), *line.cum_arc.last().unwrap_or(&0.0));
    if let Some(h) = line.headings.last() {
        for (axis, v) in h.iter().enumerate() {
            out.insert(angular_name(axis), *v);
        }
    }
    for (name, ch) in &decorated.channels {
        if ch.kind == AccessoryKind::Derivative && ch.arity == 1 {
            out.insert(name.clone(), *ch.per_edge[0].last().unwrap_or(&0.0));
        }
    }
    Ok(out)
}

/// Concatenates two enhanced trees.
///
/// * The combined grid keeps the first step; the first tree's closing sample
///   is replaced by the second tree's first sample.
/// * Branch points of the first tree past its last performed fork are
///   dropped, so the first part evaluates exactly as before; the second
///   tree's branch points are shifted along.
/// * Accessories are merged by name; a channel missing on one side is zero
///   there. Derivative channels keep accumulating across the junction, which
///   makes their primitives continuous; absolute channels switch value
///   without smoothing.
/// * The junction records, per derivative channel, the constant `h2` that
///   the second tree's primitive needs to meet the first one's end value.
pub fn concatenate_with(
    first: &EnhancedTree,
    second: &EnhancedTree,
    opts: &ConcatOptions,
) -> Result<EnhancedTree, AccessoryError> {
    if first.dim() != second.dim() {
        return Err(AccessoryError::DimensionMismatch(first.dim(), second.dim()));
    }
    let g1 = *first.spec.coords().grid();
    if second.spec.coords().grid().is_empty() {
        return Ok(first.clone());
    }
    if g1.is_empty() {
        return Ok(second.clone());
    }
    let ds = g1.delta_s();
    let mut second = second.clone();
    let g2_orig = *second.spec.coords().grid();
    if (g2_orig.delta_s() - ds).abs() > 1e-12 * ds {
        if !opts.allow_resample {
            return Err(AccessoryError::StepMismatch(ds, g2_orig.delta_s()));
        }
        second.spec = second.spec.resample(ds)?;
        let g2_new = *second.spec.coords().grid();
        second.accessories = resample_accessories(&second.accessories, &g2_orig, &g2_new)?;
    }
    let g2 = *second.spec.coords().grid();

    let split = g1.last_index();
    let shift = g1.s_max() - g2.s_min();
    let grid = SGrid::from_count(g1.s_min(), ds, split + g2.count())?;

    let (c1, c2) = (first.spec.coords(), second.spec.coords());
    let radial = sequence(
        split,
        shift,
        ScalarFn::Sampled(c1.radial_samples().to_vec()),
        ScalarFn::Sampled(c2.radial_samples().to_vec()),
    );
    let angular = (0..first.dim() - 1)
        .map(|a| {
            sequence(
                split,
                shift,
                ScalarFn::Sampled(c1.angular_samples(a).to_vec()),
                ScalarFn::Sampled(c2.angular_samples(a).to_vec()),
            )
        })
        .collect();
    let coords = DerivativeCoords::new(grid, radial, angular)?;

    let kept = first.spec.performed_forks();
    let cutoff = first.spec.events().get(kept).map_or(split, |e| e.index.min(split));
    let mut sets = Vec::with_capacity(first.dim() - 1);
    for (b1, b2) in first.spec.branch_sets().iter().zip(second.spec.branch_sets()) {
        let mut pts: Vec<f64> = b1
            .points()
            .iter()
            .copied()
            .filter(|s| g1.nearest_index(*s).is_some_and(|k| k < cutoff))
            .collect();
        pts.extend(b2.points().iter().map(|s| s + shift));
        sets.push(BranchPointSet::new(&pts, &grid)?);
    }
    let forks = first.spec.forks().followed_by(kept, second.spec.forks());
    let spec = TreeSpec::new(coords, sets, forks, kept + second.spec.max_generations())?;

    let mut accessories = AccessorySet::new();
    for a in first.accessories.iter() {
        let merged = match second.accessories.get(&a.name) {
            Some(b) => {
                if a.kind != b.kind {
                    return Err(AccessoryError::KindMismatch(a.name.clone()));
                }
                if a.arity() != b.arity() {
                    return Err(AccessoryError::ArityMismatch {
                        name: a.name.clone(),
                        a: a.arity(),
                        b: b.arity(),
                    });
                }
                a.components
                    .iter()
                    .zip(&b.components)
                    .map(|(x, y)| sequence(split, shift, x.clone(), y.clone()))
                    .collect()
            }
            None => a
                .components
                .iter()
                .map(|x| sequence(split, shift, x.clone(), ScalarFn::Constant(0.0)))
                .collect(),
        };
        accessories.insert(AccessoryFn {
            components: merged,
            ..a.clone()
        })?;
    }
    for b in second.accessories.iter() {
        if first.accessories.get(&b.name).is_none() {
            accessories.insert(AccessoryFn {
                components: b
                    .components
                    .iter()
                    .map(|y| sequence(split, shift, ScalarFn::Constant(0.0), y.clone()))
                    .collect(),
                ..b.clone()
            })?;
        }
    }

    let mut continuity_constants = second.continuity_constants.clone();
    continuity_constants.extend(first.continuity_constants.clone());

    // h2: the first tree's primitive at its end, its own h1 included, so the
    // second tree's primitive counted from zero picks up from there
    let constants = spine_end_values(first)?;
    let mut junctions = first.junctions.clone();
    junctions.push(Junction {
        index: split,
        s: g1.s_max(),
        constants,
    });
    junctions.extend(second.junctions.iter().map(|j| Junction {
        index: j.index + split,
        s: j.s + shift,
        constants: j.constants.clone(),
    }));

    Ok(EnhancedTree {
        spec,
        accessories,
        continuity_constants,
        start: first.start.clone(),
        junctions,
        sensory: first.sensory.clone().or(second.sensory.clone()),
    })
}
