use serde::{Deserialize, Serialize};

use super::branch::fork_multipliers;
use super::spec::TreeSpec;
use super::TreeError;
use crate::curve::{integrate_span, DerivativeCoords, HeadingFeedback, PathPolyline, Pose};

/// Default limit on evaluated nodes.
pub const DEFAULT_MAX_NODES: usize = 1 << 20;
/// Default limit on grid samples stored across all edges (about a gigabyte
/// of polylines).
pub const DEFAULT_MAX_SAMPLES: usize = 1 << 23;

/// Address of a branch: one digit per fork taken, root = empty.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BranchId(pub Vec<usize>);

impl BranchId {
    pub fn root() -> Self {
        Self(Vec::new())
    }

    pub fn digits(&self) -> &[usize] {
        &self.0
    }

    pub fn generation(&self) -> usize {
        self.0.len()
    }

    pub fn child(&self, digit: usize) -> Self {
        let mut d = self.0.clone();
        d.push(digit);
        Self(d)
    }

    pub fn parent(&self) -> Option<Self> {
        let (_, head) = self.0.split_last()?;
        Some(Self(head.to_vec()))
    }
}

impl std::fmt::Display for BranchId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[")?;
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, "]")
    }
}

/// End point of an edge: a branch point or a tip.
#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: BranchId,
    pub position: Vec<f64>,
    pub pose: Pose,
    pub s: f64,
    /// Index of the parent node; `None` when the edge starts at the root.
    pub parent: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub child_id: BranchId,
    /// Grid index of the first polyline sample.
    pub start_index: usize,
    pub polyline: PathPolyline,
}

/// An evaluated tree. `nodes[i]` is the end point of `edges[i]`; both are in
/// lexicographic branch-id order. The root is not a node.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluatedTree {
    pub dim: usize,
    pub root: Pose,
    pub root_s: f64,
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
}

impl EvaluatedTree {
    pub fn generation(&self, g: usize) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(move |n| n.id.generation() == g)
    }

    pub fn max_generation(&self) -> usize {
        self.nodes.iter().map(|n| n.id.generation()).max().unwrap_or(0)
    }

    pub fn parent_position(&self, node: usize) -> &[f64] {
        match self.nodes[node].parent {
            Some(p) => &self.nodes[p].position,
            None => &self.root.position,
        }
    }

    /// Where the first fork happens: the root, or the end of the trunk.
    pub fn first_fork(&self) -> Option<&[f64]> {
        let first = self.nodes.first()?;
        if first.id.generation() == 0 {
            // trunk or plain path
            self.nodes
                .iter()
                .any(|n| n.id.generation() == 1)
                .then_some(first.position.as_slice())
        } else {
            Some(&self.root.position)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub max_nodes: usize,
    pub max_samples: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            max_nodes: DEFAULT_MAX_NODES,
            max_samples: DEFAULT_MAX_SAMPLES,
        }
    }
}

/// Integrates one edge: samples `from..to` with angular multipliers applied.
pub(crate) trait SegmentIntegrator {
    fn segment(
        &self,
        coords: &DerivativeCoords,
        from: usize,
        to: usize,
        multipliers: &[f64],
        start: &Pose,
        arc0: f64,
    ) -> Result<PathPolyline, TreeError>;
}

struct Accumulate<'a> {
    feedback: Option<&'a dyn HeadingFeedback>,
}

impl SegmentIntegrator for Accumulate<'_> {
    fn segment(
        &self,
        coords: &DerivativeCoords,
        from: usize,
        to: usize,
        multipliers: &[f64],
        start: &Pose,
        arc0: f64,
    ) -> Result<PathPolyline, TreeError> {
        Ok(integrate_span(
            coords,
            from,
            to,
            multipliers,
            start,
            arc0,
            self.feedback,
        )?)
    }
}

pub(crate) fn check_start(spec: &TreeSpec, start: &Pose) -> Result<(), TreeError> {
    if start.position.len() != spec.dim() || start.heading.len() + 1 != spec.dim() {
        return Err(TreeError::DimensionMismatch {
            expected: spec.dim(),
            got: start.position.len(),
        });
    }
    if start.position.iter().chain(&start.heading).any(|v| !v.is_finite()) {
        return Err(TreeError::NonFiniteStart);
    }
    Ok(())
}

pub(crate) fn evaluate_with(
    spec: &TreeSpec,
    start: &Pose,
    opts: &EvalOptions,
    integrator: &dyn SegmentIntegrator,
) -> Result<EvaluatedTree, TreeError> {
    check_start(spec, start)?;
    let count = spec.node_count();
    if count > opts.max_nodes as u128 {
        return Err(TreeError::TooManyNodes {
            count,
            cap: opts.max_nodes,
        });
    }
    let samples = spec.sample_count();
    if samples > opts.max_samples as u128 {
        return Err(TreeError::TooManySamples {
            count: samples,
            cap: opts.max_samples,
        });
    }
    let coords = spec.coords();
    let grid = coords.grid();
    let mut tree = EvaluatedTree {
        dim: spec.dim(),
        root: start.clone(),
        root_s: grid.s_min(),
        nodes: Vec::with_capacity(count as usize),
        edges: Vec::with_capacity(count as usize),
    };
    let ones = vec![1.0; spec.dim() - 1];
    let events = spec.events();

    if events.is_empty() || spec.has_trunk() {
        let to = events.first().map_or(grid.last_index(), |e| e.index);
        let line = integrator.segment(coords, 0, to, &ones, start, 0.0)?;
        let parent = push(&mut tree, BranchId::root(), None, 0, line);
        if !events.is_empty() {
            fork(spec, integrator, &mut tree, 0, Some(parent), &ones)?;
        }
    } else {
        fork(spec, integrator, &mut tree, 0, None, &ones)?;
    }
    Ok(tree)
}

fn push(
    tree: &mut EvaluatedTree,
    id: BranchId,
    parent: Option<usize>,
    start_index: usize,
    line: PathPolyline,
) -> usize {
    let pose = line.end_pose();
    tree.nodes.push(Node {
        id: id.clone(),
        position: pose.position.clone(),
        s: line.grid.s_max(),
        pose,
        parent,
    });
    tree.edges.push(Edge {
        child_id: id,
        start_index,
        polyline: line,
    });
    tree.nodes.len() - 1
}

/// Forks at event `j` from `parent` (or the root) and recurses depth first.
fn fork(
    spec: &TreeSpec,
    integrator: &dyn SegmentIntegrator,
    tree: &mut EvaluatedTree,
    j: usize,
    parent: Option<usize>,
    inherited: &[f64],
) -> Result<(), TreeError> {
    let events = spec.events();
    let coords = spec.coords();
    let event = &events[j];
    let to = events.get(j + 1).map_or(coords.grid().last_index(), |e| e.index);
    let (start, arc0, id) = match parent {
        Some(p) => {
            let n = &tree.nodes[p];
            let arc = *tree.edges[p].polyline.cum_arc.last().unwrap_or(&0.0);
            (n.pose.clone(), arc, n.id.clone())
        }
        None => (tree.root.clone(), 0.0, BranchId::root()),
    };
    let values = fork_multipliers(spec.forks().arity_at(j));
    for (digit, value) in values.iter().enumerate() {
        let mut mult = inherited.to_vec();
        for &axis in &event.axes {
            mult[axis] = *value;
        }
        let line = integrator.segment(coords, event.index, to, &mult, &start, arc0)?;
        let child = push(tree, id.child(digit), parent, event.index, line);
        if j + 1 < spec.performed_forks() && j + 1 < events.len() {
            fork(spec, integrator, tree, j + 1, Some(child), &mult)?;
        }
    }
    Ok(())
}

/// Evaluates the tree by derivative accumulation along every branch.
pub fn evaluate_tree(spec: &TreeSpec, start: &Pose) -> Result<EvaluatedTree, TreeError> {
    evaluate_tree_with(spec, start, &EvalOptions::default())
}

pub fn evaluate_tree_with(spec: &TreeSpec, start: &Pose, opts: &EvalOptions) -> Result<EvaluatedTree, TreeError> {
    evaluate_with(spec, start, opts, &Accumulate { feedback: None })
}

/// Evaluation with a heading feedback applied before every step.
pub(crate) fn evaluate_tree_feedback(
    spec: &TreeSpec,
    start: &Pose,
    opts: &EvalOptions,
    feedback: &dyn HeadingFeedback,
) -> Result<EvaluatedTree, TreeError> {
    evaluate_with(
        spec,
        start,
        opts,
        &Accumulate {
            feedback: Some(feedback),
        },
    )
}
