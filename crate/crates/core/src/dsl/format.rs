//! Canonical pretty-printer.

use std::fmt::Write;

use super::ast::*;
use crate::expr::Expr;

fn comments(out: &mut String, lines: &[String], indent: &str) {
    for c in lines {
        if c.is_empty() {
            let _ = writeln!(out, "{indent}#");
        } else {
            let _ = writeln!(out, "{indent}# {c}");
        }
    }
}

fn list(items: &[Expr]) -> String {
    let parts: Vec<String> = items.iter().map(|e| e.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

fn quote(s: &str) -> String {
    let mut out = String::from("\"");
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn ints(v: &[usize]) -> String {
    v.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(", ")
}

fn tree_expr(t: &TreeExpr, nested: bool) -> String {
    match t {
        TreeExpr::Ref { name, .. } => name.clone(),
        TreeExpr::Concat(a, b) => {
            let inner = format!("{} << {}", tree_expr(a, true), tree_expr(b, true));
            if nested {
                format!("({inner})")
            } else {
                inner
            }
        }
        TreeExpr::Literal(block) => {
            let mut s = String::from("{ ");
            for f in &block.fields {
                s.push_str(&field(&f.kind));
                s.push_str("; ");
            }
            s.push('}');
            s
        }
    }
}

fn field(kind: &FieldKind) -> String {
    match kind {
        FieldKind::Dim(d) => format!("dim: {d}"),
        FieldKind::Domain(a, b) => format!("domain: [{a}, {b}]"),
        FieldKind::Step(e) => format!("ds: {e}"),
        FieldKind::Generations(g) => format!("generations: {g}"),
        FieldKind::Heading(v) => format!("heading: {}", list(v)),
        FieldKind::Origin(v) => format!("origin: {}", list(v)),
        FieldKind::Coord { name, value } => format!("{name}: {value}"),
        FieldKind::Branches { axis, rule } => {
            let head = match axis {
                Some(a) => format!("branches[{a}]"),
                None => "branches".into(),
            };
            let body = match rule {
                BranchRule::Every { step, start: None } => format!("every({step})"),
                BranchRule::Every { step, start: Some(s) } => format!("every({step}, {s})"),
                BranchRule::At(pts) => {
                    let parts: Vec<String> = pts.iter().map(|e| e.to_string()).collect();
                    format!("at({})", parts.join(", "))
                }
                BranchRule::Pattern {
                    intervals,
                    repeat,
                    start,
                } => {
                    let rep = match repeat {
                        Repeat::Forever => "repeat".to_string(),
                        Repeat::Times(n) => n.to_string(),
                    };
                    match start {
                        Some(s) => format!("pattern({}, {rep}, {s})", list(intervals)),
                        None => format!("pattern({}, {rep})", list(intervals)),
                    }
                }
                BranchRule::None => "none".into(),
            };
            format!("{head}: {body}")
        }
        FieldKind::Forks { prefix, cycle } => {
            if prefix.is_empty() {
                format!("forks: [{}]", ints(cycle))
            } else {
                format!("forks: [{} | {}]", ints(prefix), ints(cycle))
            }
        }
        FieldKind::Accessory(a) => {
            let mode = match a.mode {
                AccessoryMode::Deriv => "deriv",
                AccessoryMode::Abs => "abs",
            };
            let value = if a.vector {
                list(&a.components)
            } else {
                a.components.first().map(|e| e.to_string()).unwrap_or_default()
            };
            let mut s = format!("accessory {} {mode}: {value}", a.name);
            if let Some(init) = &a.init {
                let _ = write!(s, ", init {init}");
            }
            if let Some(u) = &a.units {
                let _ = write!(s, ", units {}", quote(u));
            }
            s
        }
    }
}

/// Prints `program` in canonical layout: one field per line, four-space
/// indent, comments as `# ...` lines before what they annotate. Parsing the
/// result gives back an equal program.
pub fn format(program: &TreeProgram) -> String {
    let mut out = String::new();
    for (i, item) in program.items.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        comments(&mut out, &item.comments, "");
        match &item.body {
            ItemBody::Tree(block) => {
                let _ = writeln!(out, "tree {} {{", item.name);
                for f in &block.fields {
                    comments(&mut out, &f.comments, "    ");
                    let _ = writeln!(out, "    {};", field(&f.kind));
                }
                comments(&mut out, &block.trailing_comments, "    ");
                out.push_str("}\n");
            }
            ItemBody::Constant(e) => {
                let _ = writeln!(out, "{} = {e};", item.name);
            }
            ItemBody::Alias(t) => {
                let _ = writeln!(out, "{} = {};", item.name, tree_expr(t, false));
            }
        }
    }
    if !program.trailing_comments.is_empty() {
        if !program.items.is_empty() {
            out.push('\n');
        }
        comments(&mut out, &program.trailing_comments, "");
    }
    out
}
