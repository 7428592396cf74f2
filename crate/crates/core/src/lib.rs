//! Analytic tree fractals built from derivative coordinates.
//!
//! A path is given by its rates of change along a parameter `s`: a radial
//! rate `dr` and one angular rate per angle. Multiplying the angular rates by
//! a multivalued `+-1` function that forks at branch points turns the path
//! into a tree. This crate integrates such trees, analyzes them, attaches
//! accessory channels (width, color, ...), compiles them from a small
//! language and exports them as SVG, STL or JSON.

// `!(x > 0.0)` is how non-finite input gets rejected along with the rest.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod accessory;
pub mod csv_io;
pub mod curve;
pub mod dsl;
pub mod export;
pub mod expr;
pub mod grid;
pub mod presets;
pub mod tree;

pub use accessory::{
    concatenate, evaluate_accessories, perimeter_feedback, AccessoryError, AccessoryFn, AccessoryKind, AccessorySet,
    DecoratedTree, EnhancedTree,
};
pub use curve::{
    arc_length, derive_coords, derive_path, integrate_path, resample, turn_angle, CurveError, DerivativeCoords,
    PathPolyline, Pose, ScalarFn,
};
pub use grid::{GridError, SGrid};
pub use tree::{
    bounding_radius, canopy_scale, classify_self_similarity, compare_canopies, estimate_box_dimension, evaluate_tree,
    evaluate_via_transform_stack, BranchId, BranchPointSet, EvaluatedTree, ForkSchedule, TreeError, TreeSpec,
};
