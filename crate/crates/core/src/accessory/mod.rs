//! Accessory channels (width, color, opacity, sensory readings, ...) carried
//! along a tree, and concatenation of enhanced trees.

mod concat;
mod evaluate;
mod perimeter;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{CurveError, Pose, ScalarFn};
use crate::tree::{TreeError, TreeSpec};

pub use concat::{concatenate, concatenate_with, ConcatOptions};
pub use evaluate::{evaluate_accessories, evaluate_accessories_with, Channel, DecoratedTree};
pub use perimeter::{perimeter_feedback, Perimeter, Sensory, PERIMETER_CHANNEL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AccessoryError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("duplicate accessory `{0}`")]
    Duplicate(String),
    #[error("`{0}` is a reserved coordinate name")]
    Reserved(String),
    #[error("accessory `{name}` refers to undeclared `{missing}`")]
    Undeclared { name: String, missing: String },
    #[error("accessories depend on each other in a cycle: {}", .0.join(" -> "))]
    Cycle(Vec<String>),
    #[error("accessory `{name}` refers to vector channel `{vector}`")]
    VectorReference { name: String, vector: String },
    #[error("accessory `{0}` has no components")]
    Empty(String),
    #[error("accessory `{name}` at s = {s}: {message}")]
    Eval { name: String, s: f64, message: String },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("grid steps differ ({0} vs {1}); allow resampling to join them")]
    StepMismatch(f64, f64),
    #[error("accessory `{0}` is derivative in one tree and absolute in the other")]
    KindMismatch(String),
    #[error("accessory `{name}` has arity {a} in one tree and {b} in the other")]
    ArityMismatch { name: String, a: usize, b: usize },
    #[error("perimeter: {0}")]
    Perimeter(String),
}

impl From<crate::grid::GridError> for AccessoryError {
    fn from(e: crate::grid::GridError) -> Self {
        AccessoryError::Tree(e.into())
    }
}

impl From<CurveError> for AccessoryError {
    fn from(e: CurveError) -> Self {
        AccessoryError::Tree(e.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AccessoryKind {
    /// Integrated along `s`: the value is a running sum plus a constant.
    Derivative,
    /// Evaluated pointwise.
    Absolute,
}

impl AccessoryKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AccessoryKind::Derivative => "derivative",
            AccessoryKind::Absolute => "absolute",
        }
    }
}

/// A named channel: one function per component (three for an RGB color).
#[derive(Debug, Clone, PartialEq)]
pub struct AccessoryFn {
    pub name: String,
    pub kind: AccessoryKind,
    pub components: Vec<ScalarFn>,
    pub units: String,
}

impl AccessoryFn {
    pub fn scalar(name: &str, kind: AccessoryKind, f: ScalarFn) -> Self {
        Self {
            name: name.to_string(),
            kind,
            components: vec![f],
            units: String::new(),
        }
    }

    pub fn arity(&self) -> usize {
        self.components.len()
    }

    /// Names referenced by the component expressions, excluding built-ins.
    pub fn references(&self) -> Vec<String> {
        let mut out = Vec::new();
        for c in &self.components {
            collect_refs(c, &mut out);
        }
        out.sort();
        out.dedup();
        out
    }
}

fn collect_refs(f: &ScalarFn, out: &mut Vec<String>) {
    match f {
        ScalarFn::Expr(e) => out.extend(
            e.idents()
                .into_iter()
                .filter(|n| !crate::expr::BUILTIN_NAMES.contains(&n.as_str())),
        ),
        ScalarFn::Sequence { first, second, .. } => {
            collect_refs(first, out);
            collect_refs(second, out);
        }
        ScalarFn::Constant(_) | ScalarFn::Sampled(_) => {}
    }
}

/// Rate names of the coordinate functions: `dr`, `dphi`, `dpsi`, then
/// `dtheta3`, `dtheta4`, ... for higher dimensions.
pub fn coordinate_names(dim: usize) -> Vec<String> {
    let mut names = vec!["dr".to_string()];
    for axis in 0..dim.saturating_sub(1) {
        names.push(angular_name(axis));
    }
    names
}

pub fn angular_name(axis: usize) -> String {
    match axis {
        0 => "dphi".into(),
        1 => "dpsi".into(),
        a => format!("dtheta{}", a + 1),
    }
}

pub fn is_coordinate_name(name: &str) -> bool {
    name == "dr"
        || name == "dphi"
        || name == "dpsi"
        || name
            .strip_prefix("dtheta")
            .is_some_and(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
}

/// Extra names visible to accessory expressions besides accessories and
/// coordinate rates.
pub const CONTEXT_NAMES: &[&str] = &["arc", "depth"];

/// Accessories in declaration order. The coordinate rates are implicitly
/// part of every set and cannot be redeclared.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AccessorySet {
    entries: Vec<AccessoryFn>,
}

impl AccessorySet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, acc: AccessoryFn) -> Result<(), AccessoryError> {
        if is_coordinate_name(&acc.name)
            || CONTEXT_NAMES.contains(&acc.name.as_str())
            || crate::expr::BUILTIN_NAMES.contains(&acc.name.as_str())
        {
            return Err(AccessoryError::Reserved(acc.name));
        }
        if self.get(&acc.name).is_some() {
            return Err(AccessoryError::Duplicate(acc.name));
        }
        if acc.components.is_empty() {
            return Err(AccessoryError::Empty(acc.name));
        }
        self.entries.push(acc);
        Ok(())
    }

    pub fn with(mut self, acc: AccessoryFn) -> Result<Self, AccessoryError> {
        self.insert(acc)?;
        Ok(self)
    }

    pub fn get(&self, name: &str) -> Option<&AccessoryFn> {
        self.entries.iter().find(|a| a.name == name)
    }

    /// True for declared accessories and for the coordinate rates.
    pub fn contains(&self, name: &str) -> bool {
        is_coordinate_name(name) || self.get(name).is_some()
    }

    pub fn iter(&self) -> impl Iterator<Item = &AccessoryFn> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Evaluation order: declaration order, except that an accessory is
    /// always placed after the absolute accessories it refers to. A
    /// derivative accessory's value at a sample is its running sum, known
    /// before anything is evaluated there, so references to derivative
    /// accessories (itself included) impose no order.
    pub fn evaluation_order(&self, dim: usize) -> Result<Vec<usize>, AccessoryError> {
        let coords = coordinate_names(dim);
        let index = |n: &str| self.entries.iter().position(|a| a.name == n);
        let mut deps: Vec<Vec<usize>> = Vec::with_capacity(self.entries.len());
        for acc in &self.entries {
            let mut d = Vec::new();
            for r in acc.references() {
                if coords.contains(&r) || CONTEXT_NAMES.contains(&r.as_str()) {
                    continue;
                }
                let Some(j) = index(&r) else {
                    return Err(AccessoryError::Undeclared {
                        name: acc.name.clone(),
                        missing: r,
                    });
                };
                if self.entries[j].arity() != 1 {
                    return Err(AccessoryError::VectorReference {
                        name: acc.name.clone(),
                        vector: r,
                    });
                }
                if self.entries[j].kind == AccessoryKind::Absolute {
                    d.push(j);
                }
            }
            deps.push(d);
        }

        // depth-first topological sort, visiting in declaration order
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Active,
            Done,
        }
        fn visit(
            i: usize,
            deps: &[Vec<usize>],
            marks: &mut [Mark],
            stack: &mut Vec<usize>,
            order: &mut Vec<usize>,
            names: &[AccessoryFn],
        ) -> Result<(), AccessoryError> {
            match marks[i] {
                Mark::Done => return Ok(()),
                Mark::Active => {
                    let at = stack.iter().position(|&j| j == i).unwrap_or(0);
                    let mut cycle: Vec<String> = stack[at..].iter().map(|&j| names[j].name.clone()).collect();
                    cycle.push(names[i].name.clone());
                    return Err(AccessoryError::Cycle(cycle));
                }
                Mark::New => {}
            }
            marks[i] = Mark::Active;
            stack.push(i);
            for &j in &deps[i] {
                visit(j, deps, marks, stack, order, names)?;
            }
            stack.pop();
            marks[i] = Mark::Done;
            order.push(i);
            Ok(())
        }
        let mut marks = vec![Mark::New; self.entries.len()];
        let mut order = Vec::with_capacity(self.entries.len());
        for i in 0..self.entries.len() {
            visit(i, &deps, &mut marks, &mut Vec::new(), &mut order, &self.entries)?;
        }
        Ok(order)
    }
}

/// Continuity constants for one concatenation junction.
#[derive(Debug, Clone, PartialEq)]
pub struct Junction {
    /// Grid index where the second tree starts.
    pub index: usize,
    pub s: f64,
    /// Constant `h2` per derivative channel (coordinates included) that makes
    /// the primitive continuous along the all-`+1` spine.
    pub constants: BTreeMap<String, f64>,
}

/// A tree together with its accessory functions.
#[derive(Debug, Clone, PartialEq)]
pub struct EnhancedTree {
    pub spec: TreeSpec,
    pub accessories: AccessorySet,
    /// Offset `h` added to every derivative accessory's running sum.
    pub continuity_constants: BTreeMap<String, f64>,
    pub start: Pose,
    pub junctions: Vec<Junction>,
    pub sensory: Option<Sensory>,
}

impl EnhancedTree {
    pub fn new(spec: TreeSpec, accessories: AccessorySet, start: Pose) -> Self {
        Self {
            spec,
            accessories,
            continuity_constants: BTreeMap::new(),
            start,
            junctions: Vec::new(),
            sensory: None,
        }
    }

    pub fn bare(spec: TreeSpec, start: Pose) -> Self {
        Self::new(spec, AccessorySet::new(), start)
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    /// Constant `h` of a derivative channel; defaults to 0.
    pub fn constant(&self, name: &str) -> f64 {
        self.continuity_constants.get(name).copied().unwrap_or(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;

    fn expr_acc(name: &str, refs: &[&str]) -> AccessoryFn {
        let mut e = Expr::number(1.0);
        for r in refs {
            e = Expr::binary(crate::expr::BinaryOp::Add, e, Expr::ident(r));
        }
        AccessoryFn::scalar(name, AccessoryKind::Absolute, ScalarFn::Expr(e))
    }

    #[test]
    fn order_respects_dependencies() {
        let set = AccessorySet::new()
            .with(expr_acc("a", &["b"]))
            .unwrap()
            .with(expr_acc("b", &["dr"]))
            .unwrap()
            .with(expr_acc("c", &[]))
            .unwrap();
        assert_eq!(set.evaluation_order(2).unwrap(), vec![1, 0, 2]);
    }

    #[test]
    fn cycles_and_undeclared() {
        let set = AccessorySet::new()
            .with(expr_acc("a", &["b"]))
            .unwrap()
            .with(expr_acc("b", &["a"]))
            .unwrap();
        assert!(matches!(set.evaluation_order(2), Err(AccessoryError::Cycle(_))));
        let set = AccessorySet::new().with(expr_acc("a", &["zz"])).unwrap();
        assert!(matches!(
            set.evaluation_order(2),
            Err(AccessoryError::Undeclared { .. })
        ));
        // dpsi is not a coordinate of a planar tree
        let set = AccessorySet::new().with(expr_acc("a", &["dpsi"])).unwrap();
        assert!(set.evaluation_order(2).is_err());
        assert!(set.evaluation_order(3).is_ok());
    }

    #[test]
    fn derivative_references_impose_no_order() {
        let mut w = expr_acc("w", &["w", "v"]);
        w.kind = AccessoryKind::Derivative;
        let mut v = expr_acc("v", &["w"]);
        v.kind = AccessoryKind::Derivative;
        let set = AccessorySet::new().with(w).unwrap().with(v).unwrap();
        assert_eq!(set.evaluation_order(2).unwrap(), vec![0, 1]);
    }

    #[test]
    fn reserved_and_duplicate_names() {
        let mut set = AccessorySet::new();
        assert!(matches!(
            set.insert(expr_acc("dphi", &[])),
            Err(AccessoryError::Reserved(_))
        ));
        set.insert(expr_acc("w", &[])).unwrap();
        assert!(matches!(
            set.insert(expr_acc("w", &[])),
            Err(AccessoryError::Duplicate(_))
        ));
        assert!(set.contains("dr") && set.contains("w") && !set.contains("q"));
        assert_eq!(coordinate_names(4), vec!["dr", "dphi", "dpsi", "dtheta3"]);
    }
}
