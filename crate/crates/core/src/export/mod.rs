//! Writers for evaluated trees: SVG for planar trees, binary STL tube meshes
//! for spatial ones, JSON for everything, plus orthographic projection for
//! viewing higher dimensions.

mod json;
mod project;
mod simplify;
mod stl;
mod svg;

use thiserror::Error;

pub use json::{from_json, to_json, JSON_VERSION};
pub use project::{drop_axes_basis, project};
pub use simplify::simplify_indices;
pub use stl::{to_stl, RadiusSource, TubeParams, STL_HEADER};
pub use svg::{to_svg, to_svg_with, SvgOptions};

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("{format} export needs a {want}-dimensional tree, got {got} dimensions")]
    Dimension {
        format: &'static str,
        want: usize,
        got: usize,
    },
    #[error("no channel named `{0}`")]
    UnknownChannel(String),
    #[error("`{0}` is not a valid attribute name")]
    BadAttribute(String),
    #[error("edge {edge} has a zero-length step at sample {index}")]
    DegenerateStep { edge: usize, index: usize },
    #[error("tube radius must be positive, got {value} on edge {edge}")]
    NonPositiveRadius { edge: usize, value: f64 },
    #[error("a tube needs at least 3 radial segments, got {0}")]
    TooFewSegments(usize),
    #[error("projection basis: {0}")]
    BadBasis(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("json document: {0}")]
    Schema(String),
}
