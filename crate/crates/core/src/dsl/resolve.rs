//! Name resolution and static checks run after parsing.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use super::ast::*;
use super::diagnostic::Diagnostic;
use crate::accessory::{angular_name, coordinate_names, CONTEXT_NAMES};
use crate::expr::{function_arity, BinaryOp, Expr, ExprKind, Span, BUILTIN_NAMES};

struct Checker<'a> {
    src: &'a str,
    diags: &'a mut Vec<Diagnostic>,
}

impl Checker<'_> {
    fn error(&mut self, span: Span, msg: String) {
        self.diags.push(Diagnostic::error(self.src, span, msg));
    }
}

fn walk<'e>(e: &'e Expr, f: &mut dyn FnMut(&'e Expr)) {
    f(e);
    match &e.kind {
        ExprKind::Number(_) | ExprKind::Ident(_) => {}
        ExprKind::Unary(_, x) => walk(x, f),
        ExprKind::Binary(_, l, r) => {
            walk(l, f);
            walk(r, f);
        }
        ExprKind::Call(_, args) => args.iter().for_each(|a| walk(a, f)),
        ExprKind::Piecewise(arms) => {
            for (c, v) in arms {
                walk(c, f);
                walk(v, f);
            }
        }
    }
}

fn contains_concat(e: &Expr) -> bool {
    let mut found = false;
    walk(e, &mut |x| {
        if matches!(x.kind, ExprKind::Binary(BinaryOp::Concat, ..)) {
            found = true;
        }
    });
    found
}

fn to_tree_expr(e: &Expr) -> Result<TreeExpr, Span> {
    match &e.kind {
        ExprKind::Ident(n) => Ok(TreeExpr::Ref {
            name: n.clone(),
            span: e.span,
        }),
        ExprKind::Binary(BinaryOp::Concat, l, r) => {
            Ok(TreeExpr::Concat(Box::new(to_tree_expr(l)?), Box::new(to_tree_expr(r)?)))
        }
        _ => Err(e.span),
    }
}

/// What an expression may refer to.
struct Names<'a> {
    allowed: &'a BTreeSet<String>,
    trees: &'a HashSet<String>,
    impulse: bool,
    context: &'a str,
}

impl Checker<'_> {
    fn check_expr(&mut self, e: &Expr, names: &Names<'_>) {
        walk(e, &mut |x| match &x.kind {
            ExprKind::Ident(n) if !names.allowed.contains(n) => {
                let msg = if names.trees.contains(n) {
                    format!("`{n}` is a tree, not a number")
                } else if BUILTIN_NAMES.contains(&n.as_str()) {
                    format!("`{n}` is not available in {}", names.context)
                } else {
                    format!("unknown identifier `{n}`")
                };
                self.error(x.span, msg);
            }
            ExprKind::Call(name, args) => match function_arity(name) {
                None => self.error(x.span, format!("unknown function `{name}`")),
                Some(a) if a != args.len() => {
                    self.error(x.span, format!("`{name}` takes {a} argument(s), got {}", args.len()))
                }
                Some(_) if name == "impulse" && !names.impulse => {
                    self.error(x.span, format!("`impulse` is not available in {}", names.context))
                }
                _ => {}
            },
            ExprKind::Binary(BinaryOp::Concat, ..) => {
                self.error(x.span, "`<<` joins trees and cannot appear in a number".into())
            }
            _ => {}
        });
    }
}

/// Resolves bindings into constants and tree aliases and checks every
/// reference. Problems are appended to `diags`.
///
/// With `complete == false` (the syntax had errors) checks that a missing
/// piece would trigger are skipped: the piece may just have failed to parse.
pub(crate) fn resolve(program: &mut TreeProgram, src: &str, diags: &mut Vec<Diagnostic>, complete: bool) {
    let mut ck = Checker { src, diags };

    // duplicate names
    let mut seen = HashSet::new();
    for item in &program.items {
        if !seen.insert(item.name.clone()) {
            ck.error(item.name_span, format!("`{}` is defined more than once", item.name));
        }
    }

    // bindings that mention a tree or `<<` are trees themselves
    let mut trees: HashSet<String> = program
        .items
        .iter()
        .filter(|i| matches!(i.body, ItemBody::Tree(_)))
        .map(|i| i.name.clone())
        .collect();
    loop {
        let mut changed = false;
        for item in &program.items {
            if let ItemBody::Constant(e) = &item.body {
                if !trees.contains(&item.name) && (contains_concat(e) || e.idents().iter().any(|n| trees.contains(n))) {
                    trees.insert(item.name.clone());
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    for item in &mut program.items {
        if let ItemBody::Constant(e) = &item.body {
            if trees.contains(&item.name) {
                match to_tree_expr(e) {
                    Ok(t) => item.body = ItemBody::Alias(t),
                    Err(span) => {
                        ck.error(span, "expected a tree name or `A << B`".into());
                        item.body = ItemBody::Alias(TreeExpr::Ref {
                            name: String::new(),
                            span,
                        });
                    }
                }
            }
        }
    }

    // constants: `pi` and constants defined earlier
    let all_constants: BTreeSet<String> = program
        .items
        .iter()
        .filter(|i| matches!(i.body, ItemBody::Constant(_)))
        .map(|i| i.name.clone())
        .collect();
    let mut earlier: BTreeSet<String> = BTreeSet::from(["pi".to_string()]);
    for item in &program.items {
        if let ItemBody::Constant(e) = &item.body {
            for (n, span) in ident_spans(e) {
                if !earlier.contains(&n) && all_constants.contains(&n) {
                    ck.error(span, format!("`{n}` is used before its definition"));
                }
            }
            let shown: BTreeSet<String> = earlier.union(&all_constants).cloned().collect();
            let mut filtered = e.clone();
            // report use-before-definition once, not also as unknown
            strip_known(&mut filtered, &shown);
            ck.check_expr(
                &filtered,
                &Names {
                    allowed: &earlier,
                    trees: &trees,
                    impulse: false,
                    context: "a constant",
                },
            );
            earlier.insert(item.name.clone());
        }
    }

    // aliases
    for item in &program.items {
        if let ItemBody::Alias(t) = &item.body {
            for (name, span) in t.references() {
                if name.is_empty() {
                    continue;
                }
                if all_constants.contains(name) {
                    ck.error(span, format!("`{name}` is a number, not a tree"));
                } else if !trees.contains(name) {
                    ck.error(span, format!("unknown tree `{name}`"));
                }
            }
        }
    }
    check_cycles(program, &mut ck);

    let mut constants: BTreeSet<String> = all_constants;
    constants.insert("pi".into());
    for item in &program.items {
        if let ItemBody::Tree(block) = &item.body {
            check_block(&item.name, item.name_span, block, &constants, &trees, complete, &mut ck);
        }
    }

    if complete && program.entry().is_none() && ck.diags.is_empty() {
        let span = program.items.first().map_or(Span::new(0, 0), |i| i.name_span);
        ck.error(span, "the program defines no tree".into());
    }
}

fn ident_spans(e: &Expr) -> Vec<(String, Span)> {
    let mut out = Vec::new();
    e.for_each_ident(&mut |n, s| out.push((n.to_string(), s)));
    out
}

/// Replaces identifiers in `known` by zeros so that only the remaining ones
/// get reported.
fn strip_known(e: &mut Expr, known: &BTreeSet<String>) {
    match &mut e.kind {
        ExprKind::Ident(n) if known.contains(n.as_str()) => e.kind = ExprKind::Number(0.0),
        ExprKind::Number(_) | ExprKind::Ident(_) => {}
        ExprKind::Unary(_, x) => strip_known(x, known),
        ExprKind::Binary(_, l, r) => {
            strip_known(l, known);
            strip_known(r, known);
        }
        ExprKind::Call(_, args) => args.iter_mut().for_each(|a| strip_known(a, known)),
        ExprKind::Piecewise(arms) => {
            for (c, v) in arms {
                strip_known(c, known);
                strip_known(v, known);
            }
        }
    }
}

fn check_cycles(program: &TreeProgram, ck: &mut Checker<'_>) {
    let graph: BTreeMap<&str, Vec<&str>> = program
        .items
        .iter()
        .filter_map(|i| match &i.body {
            ItemBody::Alias(t) => Some((i.name.as_str(), t.references().into_iter().map(|(n, _)| n).collect())),
            _ => None,
        })
        .collect();
    fn reaches<'a>(
        graph: &BTreeMap<&'a str, Vec<&'a str>>,
        from: &'a str,
        target: &str,
        seen: &mut HashSet<&'a str>,
    ) -> bool {
        for &next in graph.get(from).into_iter().flatten() {
            if next == target {
                return true;
            }
            if seen.insert(next) && reaches(graph, next, target, seen) {
                return true;
            }
        }
        false
    }
    for item in &program.items {
        if graph.contains_key(item.name.as_str()) && reaches(&graph, &item.name, &item.name, &mut HashSet::new()) {
            ck.error(
                item.name_span,
                format!("definition of `{}` refers to itself", item.name),
            );
        }
    }
}

const RESERVED: &[&str] = &["s", "ds", "pi", "arc", "depth", "perimeter_distance"];

fn check_block(
    name: &str,
    name_span: Span,
    block: &TreeBlock,
    constants: &BTreeSet<String>,
    trees: &HashSet<String>,
    complete: bool,
    ck: &mut Checker<'_>,
) {
    let dim = block.dim();
    let mut keys = HashSet::new();
    for f in &block.fields {
        if !keys.insert(f.kind.key()) {
            ck.error(f.span, format!("`{}` is set more than once", f.kind.key()));
        }
    }
    for required in ["domain", "dr"] {
        if complete && block.field(required).is_none() {
            ck.error(name_span, format!("tree `{name}` needs a `{required}` field"));
        }
    }
    let coords = coordinate_names(dim);
    let angular: Vec<String> = (0..dim.saturating_sub(1)).map(angular_name).collect();

    let grid_names = constants.clone();
    let mut rate_names = constants.clone();
    rate_names.insert("s".into());
    rate_names.insert("ds".into());
    let mut acc_names = rate_names.clone();
    acc_names.extend(coords.iter().cloned());
    acc_names.extend(CONTEXT_NAMES.iter().map(|s| s.to_string()));
    acc_names.extend(
        block
            .accessories()
            .filter(|a| a.components.len() == 1 && !a.vector)
            .map(|a| a.name.clone()),
    );

    let grid = Names {
        allowed: &grid_names,
        trees,
        impulse: false,
        context: "this field; it must be a constant",
    };
    let rates = Names {
        allowed: &rate_names,
        trees,
        impulse: true,
        context: "a coordinate",
    };
    let accs = Names {
        allowed: &acc_names,
        trees,
        impulse: true,
        context: "an accessory",
    };

    for f in &block.fields {
        match &f.kind {
            FieldKind::Dim(d) => {
                if *d < 2 {
                    ck.error(f.span, format!("dimension must be at least 2, got {d}"));
                }
            }
            FieldKind::Generations(g) => {
                if *g == 0 {
                    ck.error(f.span, "generations must be at least 1".into());
                }
            }
            FieldKind::Domain(a, b) => {
                ck.check_expr(a, &grid);
                ck.check_expr(b, &grid);
            }
            FieldKind::Step(e) => ck.check_expr(e, &grid),
            FieldKind::Heading(v) | FieldKind::Origin(v) => {
                let (want, what) = match &f.kind {
                    FieldKind::Heading(_) => (dim - 1, "heading"),
                    _ => (dim, "origin"),
                };
                if dim >= 2 && v.len() != want {
                    ck.error(
                        f.span,
                        format!(
                            "{what} of a {dim}-dimensional tree needs {want} value(s), got {}",
                            v.len()
                        ),
                    );
                }
                v.iter().for_each(|e| ck.check_expr(e, &grid));
            }
            FieldKind::Coord { name: c, value } => {
                if dim >= 2 && !coords.contains(c) {
                    ck.error(f.span, format!("`{c}` is not a coordinate of a {dim}-dimensional tree"));
                }
                ck.check_expr(value, &rates);
            }
            FieldKind::Branches { axis, rule } => {
                if let Some(a) = axis {
                    if dim >= 2 && !angular.contains(a) {
                        ck.error(
                            f.span,
                            format!("`{a}` is not an angular coordinate of a {dim}-dimensional tree"),
                        );
                    }
                }
                match rule {
                    BranchRule::Every { step, start } => {
                        ck.check_expr(step, &grid);
                        start.iter().for_each(|e| ck.check_expr(e, &grid));
                    }
                    BranchRule::At(pts) => pts.iter().for_each(|e| ck.check_expr(e, &grid)),
                    BranchRule::Pattern { intervals, start, .. } => {
                        intervals.iter().for_each(|e| ck.check_expr(e, &grid));
                        start.iter().for_each(|e| ck.check_expr(e, &grid));
                    }
                    BranchRule::None => {}
                }
            }
            FieldKind::Forks { prefix, cycle } => {
                if let Some(a) = prefix.iter().chain(cycle).find(|a| **a < 2) {
                    ck.error(f.span, format!("a fork needs at least 2 branches, got {a}"));
                }
            }
            FieldKind::Accessory(a) => {
                if RESERVED.contains(&a.name.as_str()) || crate::accessory::is_coordinate_name(&a.name) {
                    ck.error(f.span, format!("`{}` is a reserved name", a.name));
                }
                if constants.contains(&a.name) {
                    ck.error(f.span, format!("accessory `{}` shadows a constant", a.name));
                }
                if a.init.is_some() && a.mode == AccessoryMode::Abs {
                    ck.error(
                        f.span,
                        format!("`init` only applies to derivative accessories (`{}` is abs)", a.name),
                    );
                }
                for c in &a.components {
                    ck.check_expr(c, &accs);
                }
                if let Some(init) = &a.init {
                    ck.check_expr(init, &grid);
                }
            }
        }
    }
}
