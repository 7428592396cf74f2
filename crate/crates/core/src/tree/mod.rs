//! Branching trees: branch point sets, recursive evaluation and analyzers.

mod analysis;
mod boxcount;
mod branch;
mod canopy;
mod eval;
mod spec;
mod stack;

use thiserror::Error;

use crate::curve::CurveError;

pub use analysis::{
    bounding_radius, classify_self_similarity, BoundingRadius, Classification, SimilarityReport, DEFAULT_TOLERANCE,
};
pub use boxcount::{box_count, box_dimension, default_box_scales, estimate_box_dimension};
pub use branch::{fork_multipliers, unit_function, BranchPointSet, ForkSchedule, UnitValue};
pub use canopy::{canopy_scale, compare_canopies, EquivalenceReport};
pub(crate) use eval::evaluate_tree_feedback;
pub use eval::{
    evaluate_tree, evaluate_tree_with, BranchId, Edge, EvalOptions, EvaluatedTree, Node, DEFAULT_MAX_NODES,
    DEFAULT_MAX_SAMPLES,
};
pub use spec::{ForkEvent, TreeSpec};
pub use stack::{evaluate_via_transform_stack, evaluate_via_transform_stack_with};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TreeError {
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error("branch point {s} lies outside the grid")]
    BranchOutOfDomain { s: f64 },
    #[error("branch points must be strictly increasing (at {s})")]
    BranchNotIncreasing { s: f64 },
    #[error("branch spacing must be positive, got {0}")]
    BadBranchStep(f64),
    #[error("{sets} branch sets given but a {dim}D tree has {} angular axes", dim - 1)]
    TooManyBranchSets { sets: usize, dim: usize },
    #[error("fork arity must be at least 2, got {0}")]
    BadArity(usize),
    #[error("fork schedule is empty")]
    EmptySchedule,
    #[error("fork repeat start {repeat_from} is past the schedule length {len}")]
    BadRepeat { repeat_from: usize, len: usize },
    #[error("max_generations must be at least 1")]
    NoGenerations,
    #[error("tree would have {count} nodes, over the cap of {cap}")]
    TooManyNodes { count: u128, cap: usize },
    #[error("tree would store {count} samples, over the cap of {cap}; coarsen the grid or cut generations")]
    TooManySamples { count: u128, cap: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("start pose is not finite")]
    NonFiniteStart,
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
    #[error("need at least 3 branch points to compare consecutive intervals, found {found}")]
    TooFewBranchPoints { found: usize },
    #[error("not a tree: no branch points")]
    NotATree,
    #[error("topology mismatch: {0}")]
    TopologyMismatch(String),
    #[error("zero distance between the first branch nodes")]
    DegenerateDistance,
    #[error("need at least two distinct box scales")]
    TooFewScales,
}

impl From<crate::grid::GridError> for TreeError {
    fn from(e: crate::grid::GridError) -> Self {
        TreeError::Curve(e.into())
    }
}
