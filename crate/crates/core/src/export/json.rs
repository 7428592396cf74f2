use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ExportError;
use crate::accessory::{AccessoryKind, Channel, DecoratedTree};
use crate::curve::{PathPolyline, Pose};
use crate::grid::SGrid;
use crate::tree::{BranchId, Edge, EvaluatedTree, Node};

pub const JSON_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Doc {
    version: u32,
    dim: usize,
    /// `null` when the tree is unbounded.
    bound: Option<f64>,
    root: RootDoc,
    nodes: Vec<NodeDoc>,
    edges: Vec<EdgeDoc>,
    accessories: BTreeMap<String, ChannelDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RootDoc {
    pos: Vec<f64>,
    heading: Vec<f64>,
    s: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeDoc {
    id: BranchId,
    pos: Vec<f64>,
    heading: Vec<f64>,
    s: f64,
    parent: Option<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    child: BranchId,
    start_index: usize,
    grid: SGrid,
    points: Vec<Vec<f64>>,
    headings: Vec<Vec<f64>>,
    arc: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelDoc {
    kind: AccessoryKind,
    arity: usize,
    units: String,
    per_edge: Vec<Vec<f64>>,
}

/// Serializes the tree and its channels. Keys come in a fixed order and
/// floats are written so that [`from_json`] reads back identical values.
///
/// ```text
/// {"version":1,"dim":2,"bound":3.0,"root":{"pos":[..],"heading":[..],"s":0.0},
///  "nodes":[{"id":[0],"pos":[..],"heading":[..],"s":1.0,"parent":null},..],
///  "edges":[{"child":[0],"start_index":0,"grid":{..},"points":[[..],..],
///            "headings":[[..],..],"arc":[..]},..],
///  "accessories":{"width":{"kind":"derivative","arity":1,"units":"","per_edge":[[..],..]}}}
/// ```
pub fn to_json(decorated: &DecoratedTree) -> String {
    let tree = &decorated.tree;
    let doc = Doc {
        version: JSON_VERSION,
        dim: tree.dim,
        bound: decorated.bound.is_finite().then_some(decorated.bound),
        root: RootDoc {
            pos: tree.root.position.clone(),
            heading: tree.root.heading.clone(),
            s: tree.root_s,
        },
        nodes: tree
            .nodes
            .iter()
            .map(|n| NodeDoc {
                id: n.id.clone(),
                pos: n.position.clone(),
                heading: n.pose.heading.clone(),
                s: n.s,
                parent: n.parent,
            })
            .collect(),
        edges: tree
            .edges
            .iter()
            .map(|e| EdgeDoc {
                child: e.child_id.clone(),
                start_index: e.start_index,
                grid: e.polyline.grid,
                points: e.polyline.points.clone(),
                headings: e.polyline.headings.clone(),
                arc: e.polyline.cum_arc.clone(),
            })
            .collect(),
        accessories: decorated
            .channels
            .iter()
            .map(|(name, c)| {
                (
                    name.clone(),
                    ChannelDoc {
                        kind: c.kind,
                        arity: c.arity,
                        units: c.units.clone(),
                        per_edge: c.per_edge.clone(),
                    },
                )
            })
            .collect(),
    };
    let mut out = serde_json::to_string(&doc).expect("tree documents are always serializable");
    out.push('\n');
    out
}

fn schema(msg: String) -> ExportError {
    ExportError::Schema(msg)
}

/// Reads a document written by [`to_json`].
pub fn from_json(text: &str) -> Result<DecoratedTree, ExportError> {
    let doc: Doc = serde_json::from_str(text)?;
    if doc.version != JSON_VERSION {
        return Err(schema(format!("unsupported version {}", doc.version)));
    }
    let dim = doc.dim;
    if dim < 2 {
        return Err(schema(format!("dimension {dim} is below 2")));
    }
    if doc.nodes.len() != doc.edges.len() {
        return Err(schema(format!(
            "{} nodes but {} edges",
            doc.nodes.len(),
            doc.edges.len()
        )));
    }
    let pose_ok = |pos: &[f64], heading: &[f64]| pos.len() == dim && heading.len() + 1 == dim;
    if !pose_ok(&doc.root.pos, &doc.root.heading) {
        return Err(schema("root pose has the wrong dimension".into()));
    }
    let mut nodes = Vec::with_capacity(doc.nodes.len());
    for (i, n) in doc.nodes.into_iter().enumerate() {
        if !pose_ok(&n.pos, &n.heading) {
            return Err(schema(format!("node {i} has the wrong dimension")));
        }
        if n.parent.is_some_and(|p| p >= i) {
            return Err(schema(format!("node {i} has a parent that does not precede it")));
        }
        nodes.push(Node {
            id: n.id,
            pose: Pose::new(n.pos.clone(), n.heading),
            position: n.pos,
            s: n.s,
            parent: n.parent,
        });
    }
    let mut edges = Vec::with_capacity(doc.edges.len());
    for (i, e) in doc.edges.into_iter().enumerate() {
        let len = e.points.len();
        if e.headings.len() != len || e.arc.len() != len {
            return Err(schema(format!("edge {i} has ragged sample arrays")));
        }
        if e.points.iter().any(|p| p.len() != dim) || e.headings.iter().any(|h| h.len() + 1 != dim) {
            return Err(schema(format!("edge {i} has the wrong dimension")));
        }
        edges.push(Edge {
            child_id: e.child,
            start_index: e.start_index,
            polyline: PathPolyline {
                points: e.points,
                headings: e.headings,
                cum_arc: e.arc,
                grid: e.grid,
            },
        });
    }
    let mut channels = BTreeMap::new();
    for (name, c) in doc.accessories {
        if c.arity == 0 || c.per_edge.len() != edges.len() {
            return Err(schema(format!("channel `{name}` does not match the edges")));
        }
        for (e, vals) in c.per_edge.iter().enumerate() {
            if vals.len() != edges[e].polyline.len() * c.arity {
                return Err(schema(format!("channel `{name}` has the wrong length on edge {e}")));
            }
        }
        channels.insert(
            name,
            Channel {
                kind: c.kind,
                arity: c.arity,
                units: c.units,
                per_edge: c.per_edge,
            },
        );
    }
    Ok(DecoratedTree {
        tree: EvaluatedTree {
            dim,
            root: Pose::new(doc.root.pos, doc.root.heading),
            root_s: doc.root.s,
            nodes,
            edges,
        },
        channels,
        bound: doc.bound.unwrap_or(f64::INFINITY),
    })
}
