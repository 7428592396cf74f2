//! Lowering of a resolved program to an [`EnhancedTree`].

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use super::ast::*;
use super::diagnostic::Diagnostic;
use crate::accessory::{
    angular_name, concatenate, AccessoryError, AccessoryFn, AccessoryKind, AccessorySet, EnhancedTree,
};
use crate::curve::{DerivativeCoords, Pose, ScalarFn};
use crate::expr::{Expr, SampleScope, Span};
use crate::grid::SGrid;
use crate::tree::{BranchPointSet, ForkSchedule, TreeError, TreeSpec};

/// Grid step used when neither the tree nor the options give one.
pub const DEFAULT_STEP: f64 = 1e-3;
/// Generations evaluated when a tree does not say.
pub const DEFAULT_GENERATIONS: usize = 8;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompileOptions {
    /// Overrides the `ds` of every tree in the program.
    pub delta_s: Option<f64>,
}

#[derive(Debug, Error)]
pub enum CompileError {
    #[error("the program defines no tree")]
    NoEntry,
    #[error("`{0}` is not a tree")]
    NotATree(String),
    #[error("in `{item}`: {message}")]
    Invalid { item: String, message: String, span: Span },
    #[error("in `{tree}`, `{field}` at s = {s}: {message}")]
    Eval {
        tree: String,
        field: String,
        s: f64,
        message: String,
        span: Span,
    },
    #[error("in `{tree}`: {source}")]
    Tree {
        tree: String,
        #[source]
        source: TreeError,
        span: Span,
    },
    #[error("in `{item}`: {source}")]
    Accessory {
        item: String,
        #[source]
        source: AccessoryError,
        span: Span,
    },
}

impl CompileError {
    pub fn span(&self) -> Option<Span> {
        match self {
            CompileError::NoEntry | CompileError::NotATree(_) => None,
            CompileError::Invalid { span, .. }
            | CompileError::Eval { span, .. }
            | CompileError::Tree { span, .. }
            | CompileError::Accessory { span, .. } => Some(*span),
        }
    }

    /// The error positioned in `src`, when it has a position.
    pub fn to_diagnostic(&self, src: &str) -> Option<Diagnostic> {
        self.span().map(|span| Diagnostic::error(src, span, self.to_string()))
    }
}

pub fn compile(program: &TreeProgram) -> Result<EnhancedTree, CompileError> {
    compile_with(program, &CompileOptions::default())
}

/// Compiles the entry tree of `program`: expressions are sampled onto each
/// tree's grid, references are inlined and `<<` becomes
/// [`concatenate`].
pub fn compile_with(program: &TreeProgram, opts: &CompileOptions) -> Result<EnhancedTree, CompileError> {
    let entry = program.entry().ok_or(CompileError::NoEntry)?;
    compile_named(program, entry, opts)
}

/// Compiles the tree called `name`.
pub fn compile_named(program: &TreeProgram, name: &str, opts: &CompileOptions) -> Result<EnhancedTree, CompileError> {
    let mut consts = BTreeMap::new();
    for item in &program.items {
        if let ItemBody::Constant(e) = &item.body {
            let v = constant(e, &consts, &item.name)?;
            consts.insert(item.name.clone(), v);
        }
    }
    let mut cx = Compiler {
        program,
        consts,
        opts: *opts,
        cache: HashMap::new(),
    };
    cx.build(name)
}

fn constant(e: &Expr, consts: &BTreeMap<String, f64>, item: &str) -> Result<f64, CompileError> {
    let scope = SampleScope {
        s: f64::NAN,
        ds: f64::NAN,
        at_branch: None,
        vars: Some(consts),
    };
    match e.eval(&scope) {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(v) => Err(CompileError::Invalid {
            item: item.to_string(),
            message: format!("`{e}` evaluates to {v}"),
            span: e.span,
        }),
        Err(err) => Err(CompileError::Invalid {
            item: item.to_string(),
            message: err.to_string(),
            span: e.span,
        }),
    }
}

struct Compiler<'p> {
    program: &'p TreeProgram,
    consts: BTreeMap<String, f64>,
    opts: CompileOptions,
    cache: HashMap<String, EnhancedTree>,
}

impl Compiler<'_> {
    fn build(&mut self, name: &str) -> Result<EnhancedTree, CompileError> {
        if let Some(t) = self.cache.get(name) {
            return Ok(t.clone());
        }
        let item = self
            .program
            .get(name)
            .ok_or_else(|| CompileError::NotATree(name.to_string()))?;
        let tree = match &item.body {
            ItemBody::Tree(block) => self.block(name, item.name_span, block)?,
            ItemBody::Alias(t) => self.tree_expr(name, t)?,
            ItemBody::Constant(_) => return Err(CompileError::NotATree(name.to_string())),
        };
        self.cache.insert(name.to_string(), tree.clone());
        Ok(tree)
    }

    fn tree_expr(&mut self, item: &str, t: &TreeExpr) -> Result<EnhancedTree, CompileError> {
        match t {
            TreeExpr::Ref { name, .. } => self.build(name),
            TreeExpr::Literal(block) => self.block(item, block.span, block),
            TreeExpr::Concat(a, b) => {
                let left = self.tree_expr(item, a)?;
                let right = self.tree_expr(item, b)?;
                concatenate(&left, &right).map_err(|source| CompileError::Accessory {
                    item: item.to_string(),
                    source,
                    span: t.span(),
                })
            }
        }
    }

    fn constant(&self, e: &Expr, tree: &str) -> Result<f64, CompileError> {
        constant(e, &self.consts, tree)
    }

    fn block(&self, name: &str, name_span: Span, block: &TreeBlock) -> Result<EnhancedTree, CompileError> {
        let dim = block.dim();
        let tree_err = |source: TreeError, span: Span| CompileError::Tree {
            tree: name.to_string(),
            source,
            span,
        };
        let span_of = |key: &str| {
            block
                .fields
                .iter()
                .find(|f| f.kind.key() == key)
                .map_or(name_span, |f| f.span)
        };

        let Some(FieldKind::Domain(a, b)) = block.field("domain") else {
            return Err(CompileError::Invalid {
                item: name.into(),
                message: "missing `domain`".into(),
                span: name_span,
            });
        };
        let (s0, s1) = (self.constant(a, name)?, self.constant(b, name)?);
        let ds = match (self.opts.delta_s, block.field("ds")) {
            (Some(ds), _) => ds,
            (None, Some(FieldKind::Step(e))) => self.constant(e, name)?,
            _ => DEFAULT_STEP,
        };
        let grid = SGrid::new(s0, s1, ds).map_err(|e| tree_err(e.into(), span_of("domain")))?;

        let generations = match block.field("generations") {
            Some(FieldKind::Generations(g)) => *g,
            _ => DEFAULT_GENERATIONS,
        };
        let mut start = Pose::origin(dim);
        if let Some(FieldKind::Heading(v)) = block.field("heading") {
            start.heading = v.iter().map(|e| self.constant(e, name)).collect::<Result<_, _>>()?;
        }
        if let Some(FieldKind::Origin(v)) = block.field("origin") {
            start.position = v.iter().map(|e| self.constant(e, name)).collect::<Result<_, _>>()?;
        }

        // branch points: the shared rule first, then per-axis overrides
        let axes = dim - 1;
        let mut sets = vec![BranchPointSet::empty(); axes];
        if let Some(FieldKind::Branches { rule, .. }) = block.field("branches") {
            let set = self.branch_set(name, rule, &grid, span_of("branches"))?;
            sets.iter_mut().for_each(|s| *s = set.clone());
        }
        for (axis, set) in sets.iter_mut().enumerate() {
            let key = format!("branches[{}]", angular_name(axis));
            if let Some(FieldKind::Branches { rule, .. }) = block.field(&key) {
                *set = self.branch_set(name, rule, &grid, span_of(&key))?;
            }
        }
        let mut at_branch = vec![false; grid.count()];
        for set in &sets {
            for k in set.indices(&grid) {
                at_branch[k] = true;
            }
        }

        let mut coords = Vec::with_capacity(dim);
        for (i, coord) in crate::accessory::coordinate_names(dim).into_iter().enumerate() {
            let samples = match block.field(&coord) {
                Some(FieldKind::Coord { value, .. }) => {
                    self.sample(name, &coord, value, &grid, &at_branch, span_of(&coord), i == 0)?
                }
                _ => vec![0.0; grid.count()],
            };
            coords.push(samples);
        }
        let radial = coords.remove(0);
        let coords = DerivativeCoords::from_samples(grid, radial, coords).map_err(|e| tree_err(e.into(), name_span))?;

        let forks = match block.field("forks") {
            Some(FieldKind::Forks { prefix, cycle }) => {
                let mut all = prefix.clone();
                all.extend(cycle);
                ForkSchedule::new(all, prefix.len()).map_err(|e| tree_err(e, span_of("forks")))?
            }
            _ => ForkSchedule::binary(),
        };
        let spec = TreeSpec::new(coords, sets, forks, generations).map_err(|e| tree_err(e, name_span))?;

        let mut accessories = AccessorySet::new();
        let mut constants = BTreeMap::new();
        for f in &block.fields {
            let FieldKind::Accessory(decl) = &f.kind else { continue };
            let kind = match decl.mode {
                AccessoryMode::Deriv => AccessoryKind::Derivative,
                AccessoryMode::Abs => AccessoryKind::Absolute,
            };
            let components = decl
                .components
                .iter()
                .map(|e| ScalarFn::Expr(e.substitute(&self.consts)))
                .collect();
            accessories
                .insert(AccessoryFn {
                    name: decl.name.clone(),
                    kind,
                    components,
                    units: decl.units.clone().unwrap_or_default(),
                })
                .map_err(|source| CompileError::Accessory {
                    item: name.to_string(),
                    source,
                    span: f.span,
                })?;
            if let Some(init) = &decl.init {
                constants.insert(decl.name.clone(), self.constant(init, name)?);
            }
        }
        accessories
            .evaluation_order(dim)
            .map_err(|source| CompileError::Accessory {
                item: name.to_string(),
                source,
                span: name_span,
            })?;
        let mut tree = EnhancedTree::new(spec, accessories, start);
        tree.continuity_constants = constants;
        Ok(tree)
    }

    fn branch_set(
        &self,
        tree: &str,
        rule: &BranchRule,
        grid: &SGrid,
        span: Span,
    ) -> Result<BranchPointSet, CompileError> {
        let err = |source: TreeError| CompileError::Tree {
            tree: tree.to_string(),
            source,
            span,
        };
        match rule {
            BranchRule::None => Ok(BranchPointSet::empty()),
            BranchRule::Every { step, start } => {
                let step = self.constant(step, tree)?;
                let start = match start {
                    Some(e) => self.constant(e, tree)?,
                    None => grid.s_min(),
                };
                BranchPointSet::every(grid, step, start).map_err(err)
            }
            BranchRule::At(pts) => {
                let pts: Vec<f64> = pts.iter().map(|e| self.constant(e, tree)).collect::<Result<_, _>>()?;
                BranchPointSet::new(&pts, grid).map_err(err)
            }
            BranchRule::Pattern {
                intervals,
                repeat,
                start,
            } => {
                let iv: Vec<f64> = intervals
                    .iter()
                    .map(|e| self.constant(e, tree))
                    .collect::<Result<_, _>>()?;
                let start = match start {
                    Some(e) => self.constant(e, tree)?,
                    None => grid.s_min(),
                };
                let repeats = match repeat {
                    Repeat::Forever => None,
                    Repeat::Times(n) => Some(*n),
                };
                BranchPointSet::pattern(grid, &iv, start, repeats).map_err(err)
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn sample(
        &self,
        tree: &str,
        field: &str,
        e: &Expr,
        grid: &SGrid,
        at_branch: &[bool],
        span: Span,
        radial: bool,
    ) -> Result<Vec<f64>, CompileError> {
        let fail = |s: f64, message: String| CompileError::Eval {
            tree: tree.to_string(),
            field: field.to_string(),
            s,
            message,
            span,
        };
        let mut out = Vec::with_capacity(grid.count());
        for (k, s) in grid.samples().enumerate() {
            let scope = SampleScope {
                s,
                ds: grid.delta_s(),
                at_branch: Some(at_branch[k]),
                vars: Some(&self.consts),
            };
            let v = e.eval(&scope).map_err(|err| fail(s, err.to_string()))?;
            if !v.is_finite() {
                return Err(fail(s, format!("value is {v}")));
            }
            if radial && v < 0.0 {
                return Err(fail(s, format!("radial rate must be non-negative, got {v}")));
            }
            out.push(v);
        }
        Ok(out)
    }
}
