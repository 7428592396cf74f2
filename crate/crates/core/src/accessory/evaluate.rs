use std::collections::{BTreeMap, HashMap};

use super::perimeter::{PerimeterSteer, PERIMETER_CHANNEL};
use super::{coordinate_names, AccessoryError, AccessoryKind, EnhancedTree};
use crate::expr::Scope;
use crate::tree::{bounding_radius, evaluate_tree_feedback, evaluate_tree_with, EvalOptions, EvaluatedTree};

/// Values of one channel along every edge. With arity > 1 the components of
/// each sample are stored consecutively.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub kind: AccessoryKind,
    pub arity: usize,
    pub units: String,
    pub per_edge: Vec<Vec<f64>>,
}

impl Channel {
    /// Component `c` of sample `j` on edge `e`.
    pub fn value(&self, e: usize, j: usize, c: usize) -> f64 {
        self.per_edge[e][j * self.arity + c]
    }

    /// Mean of component `c` over edge `e`.
    pub fn edge_mean(&self, e: usize, c: usize) -> f64 {
        let vals = &self.per_edge[e];
        let n = vals.len() / self.arity;
        if n == 0 {
            return 0.0;
        }
        (0..n).map(|j| vals[j * self.arity + c]).sum::<f64>() / n as f64
    }
}

/// An evaluated tree with its accessory channels sampled along each edge.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoratedTree {
    pub tree: EvaluatedTree,
    pub channels: BTreeMap<String, Channel>,
    /// Radius about the root that contains the tree.
    pub bound: f64,
}

impl DecoratedTree {
    /// Wraps a tree without channels; the bound is measured from the points.
    pub fn from_tree(tree: EvaluatedTree) -> Self {
        let root = tree.root.position.clone();
        let bound = tree
            .edges
            .iter()
            .flat_map(|e| &e.polyline.points)
            .map(|p| p.iter().zip(&root).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        Self {
            tree,
            channels: BTreeMap::new(),
            bound,
        }
    }
}

struct AccScope<'a> {
    s: f64,
    ds: f64,
    at_branch: bool,
    slots: &'a HashMap<String, usize>,
    values: &'a [f64],
}

impl Scope for AccScope<'_> {
    fn lookup(&self, name: &str) -> Option<f64> {
        match name {
            "s" => Some(self.s),
            "ds" => Some(self.ds),
            "pi" => Some(std::f64::consts::PI),
            _ => self.slots.get(name).map(|&i| self.values[i]),
        }
    }

    fn at_branch(&self) -> Option<bool> {
        Some(self.at_branch)
    }
}

/// Evaluates the tree and samples every accessory along each edge.
///
/// Derivative accessories start from `start_values[name] + h` at the root
/// and accumulate `f * ds` along every root-to-tip path; absolute ones are
/// evaluated pointwise. An accessory may refer to the coordinate rates
/// (`dr`, `dphi`, ...), to `arc` and `depth`, and to other scalar
/// accessories at the same sample.
pub fn evaluate_accessories(
    enhanced: &EnhancedTree,
    start_values: &BTreeMap<String, f64>,
) -> Result<DecoratedTree, AccessoryError> {
    evaluate_accessories_with(enhanced, start_values, &EvalOptions::default())
}

pub fn evaluate_accessories_with(
    enhanced: &EnhancedTree,
    start_values: &BTreeMap<String, f64>,
    opts: &EvalOptions,
) -> Result<DecoratedTree, AccessoryError> {
    let spec = &enhanced.spec;
    let dim = spec.dim();
    let tree = match &enhanced.sensory {
        Some(sensory) => {
            let steer = PerimeterSteer::new(sensory);
            evaluate_tree_feedback(spec, &enhanced.start, opts, &steer)?
        }
        None => evaluate_tree_with(spec, &enhanced.start, opts)?,
    };
    let order = enhanced.accessories.evaluation_order(dim)?;
    let accs: Vec<_> = enhanced.accessories.iter().collect();

    let coords = spec.coords();
    let grid = coords.grid();
    let ds = grid.delta_s();
    let mut is_branch = vec![false; grid.count()];
    for e in spec.events() {
        is_branch[e.index] = true;
    }

    // slot layout: coordinate rates, arc, depth, then scalar accessories
    let mut slots: HashMap<String, usize> = HashMap::new();
    let coord_names = coordinate_names(dim);
    for (i, n) in coord_names.iter().enumerate() {
        slots.insert(n.clone(), i);
    }
    let arc_slot = coord_names.len();
    let depth_slot = arc_slot + 1;
    slots.insert("arc".into(), arc_slot);
    slots.insert("depth".into(), depth_slot);
    let acc_slot: Vec<usize> = (0..accs.len()).map(|i| depth_slot + 1 + i).collect();
    for (i, a) in accs.iter().enumerate() {
        if a.arity() == 1 {
            slots.insert(a.name.clone(), acc_slot[i]);
        }
    }
    let mut values = vec![0.0; depth_slot + 1 + accs.len()];

    let mut per_edge: Vec<Vec<Vec<f64>>> = vec![Vec::with_capacity(tree.edges.len()); accs.len()];
    // running primitive of each derivative accessory at the end of each edge
    let mut ends: Vec<Vec<Vec<f64>>> = vec![Vec::with_capacity(tree.edges.len()); accs.len()];

    for (e, edge) in tree.edges.iter().enumerate() {
        let parent = tree.nodes[e].parent;
        let line = &edge.polyline;
        let n = line.len();
        let mut current: Vec<Vec<f64>> = accs
            .iter()
            .enumerate()
            .map(|(i, a)| match (a.kind, parent) {
                (AccessoryKind::Derivative, Some(p)) => ends[i][p].clone(),
                (AccessoryKind::Derivative, None) => {
                    let v0 = start_values.get(&a.name).copied().unwrap_or(0.0) + enhanced.constant(&a.name);
                    vec![v0; a.arity()]
                }
                (AccessoryKind::Absolute, _) => vec![0.0; a.arity()],
            })
            .collect();
        let mut out: Vec<Vec<f64>> = accs.iter().map(|a| Vec::with_capacity(n * a.arity())).collect();

        for j in 0..n {
            let k = edge.start_index + j;
            let s = grid.s_at(k);
            values[0] = coords.radial_samples()[k];
            for axis in 0..dim - 1 {
                values[1 + axis] = coords.angular_samples(axis)[k];
            }
            values[arc_slot] = line.cum_arc[j];
            values[depth_slot] = edge.child_id.generation() as f64;

            for (i, a) in accs.iter().enumerate() {
                if a.kind == AccessoryKind::Derivative && a.arity() == 1 {
                    values[acc_slot[i]] = current[i][0];
                }
            }
            for &i in &order {
                let a = accs[i];
                let mut results = Vec::with_capacity(a.arity());
                for f in &a.components {
                    let scope = AccScope {
                        s,
                        ds,
                        at_branch: is_branch[k],
                        slots: &slots,
                        values: &values,
                    };
                    let v = f.value_at(k, &scope).map_err(|err| AccessoryError::Eval {
                        name: a.name.clone(),
                        s,
                        message: err.to_string(),
                    })?;
                    if !v.is_finite() {
                        return Err(AccessoryError::Eval {
                            name: a.name.clone(),
                            s,
                            message: "non-finite value".into(),
                        });
                    }
                    results.push(v);
                }
                match a.kind {
                    AccessoryKind::Absolute => {
                        out[i].extend_from_slice(&results);
                        if a.arity() == 1 {
                            values[acc_slot[i]] = results[0];
                        }
                    }
                    AccessoryKind::Derivative => {
                        out[i].extend_from_slice(&current[i]);
                        if j + 1 < n {
                            for (c, r) in current[i].iter_mut().zip(&results) {
                                *c += r * ds;
                            }
                        }
                    }
                }
            }
        }
        for i in 0..accs.len() {
            ends[i].push(current[i].clone());
            per_edge[i].push(std::mem::take(&mut out[i]));
        }
    }

    let mut channels = BTreeMap::new();
    for (i, a) in accs.iter().enumerate() {
        channels.insert(
            a.name.clone(),
            Channel {
                kind: a.kind,
                arity: a.arity(),
                units: a.units.clone(),
                per_edge: std::mem::take(&mut per_edge[i]),
            },
        );
    }
    if let Some(sensory) = &enhanced.sensory {
        let steer = PerimeterSteer::new(sensory);
        channels.insert(
            PERIMETER_CHANNEL.to_string(),
            Channel {
                kind: AccessoryKind::Absolute,
                arity: 1,
                units: "length".into(),
                per_edge: tree
                    .edges
                    .iter()
                    .map(|e| e.polyline.points.iter().map(|p| steer.distance(p)).collect())
                    .collect(),
            },
        );
    }

    let bound = bounding_radius(spec).radius;
    Ok(DecoratedTree { tree, channels, bound })
}
