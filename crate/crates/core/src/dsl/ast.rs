//! Syntax tree of a tree program. Spans compare equal, so two programs are
//! equal when their structure (comments included) is.

use crate::expr::{Expr, Span};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TreeProgram {
    pub items: Vec<Item>,
    /// Comments after the last item.
    pub trailing_comments: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Item {
    /// Comment lines directly before the item.
    pub comments: Vec<String>,
    pub name: String,
    pub name_span: Span,
    pub body: ItemBody,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ItemBody {
    /// `tree name { ... }`
    Tree(TreeBlock),
    /// `name = <scalar constant>;`
    Constant(Expr),
    /// `name = A << B;` or `name = A;`
    Alias(TreeExpr),
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeExpr {
    Literal(Box<TreeBlock>),
    Ref { name: String, span: Span },
    Concat(Box<TreeExpr>, Box<TreeExpr>),
}

impl TreeExpr {
    pub fn span(&self) -> Span {
        match self {
            TreeExpr::Literal(b) => b.span,
            TreeExpr::Ref { span, .. } => *span,
            TreeExpr::Concat(a, b) => a.span().join(b.span()),
        }
    }

    /// Names referenced, left to right.
    pub fn references(&self) -> Vec<(&str, Span)> {
        match self {
            TreeExpr::Literal(_) => Vec::new(),
            TreeExpr::Ref { name, span } => vec![(name.as_str(), *span)],
            TreeExpr::Concat(a, b) => {
                let mut v = a.references();
                v.extend(b.references());
                v
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeBlock {
    pub fields: Vec<Field>,
    /// Comments between the last field and the closing brace.
    pub trailing_comments: Vec<String>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub comments: Vec<String>,
    pub kind: FieldKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldKind {
    Dim(usize),
    Domain(Expr, Expr),
    Step(Expr),
    Generations(usize),
    Heading(Vec<Expr>),
    Origin(Vec<Expr>),
    /// `dr`, `dphi`, `dpsi`, `dtheta3`, ...
    Coord {
        name: String,
        value: Expr,
    },
    /// `branches: ...` (every angular axis) or `branches[dpsi]: ...`.
    Branches {
        axis: Option<String>,
        rule: BranchRule,
    },
    /// `forks: [4, 2 | 3]`: the arities after `|` repeat forever; without
    /// `|` the whole list repeats.
    Forks {
        prefix: Vec<usize>,
        cycle: Vec<usize>,
    },
    Accessory(AccessoryDecl),
}

impl FieldKind {
    /// Key used to detect duplicate fields.
    pub fn key(&self) -> String {
        match self {
            FieldKind::Dim(_) => "dim".into(),
            FieldKind::Domain(..) => "domain".into(),
            FieldKind::Step(_) => "ds".into(),
            FieldKind::Generations(_) => "generations".into(),
            FieldKind::Heading(_) => "heading".into(),
            FieldKind::Origin(_) => "origin".into(),
            FieldKind::Coord { name, .. } => name.clone(),
            FieldKind::Branches { axis: None, .. } => "branches".into(),
            FieldKind::Branches { axis: Some(a), .. } => format!("branches[{a}]"),
            FieldKind::Forks { .. } => "forks".into(),
            FieldKind::Accessory(a) => format!("accessory {}", a.name),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BranchRule {
    /// `every(step)` or `every(step, start)`
    Every {
        step: Expr,
        start: Option<Expr>,
    },
    /// `at(s1, s2, ...)`
    At(Vec<Expr>),
    /// `pattern([d1, d2, ...], repeat)` or `pattern([...], n)`; an optional
    /// third argument is the first branch point.
    Pattern {
        intervals: Vec<Expr>,
        repeat: Repeat,
        start: Option<Expr>,
    },
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Repeat {
    Forever,
    Times(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccessoryMode {
    Deriv,
    Abs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccessoryDecl {
    pub name: String,
    pub mode: AccessoryMode,
    /// One expression per component.
    pub components: Vec<Expr>,
    /// Written as a list even with one component.
    pub vector: bool,
    pub init: Option<Expr>,
    pub units: Option<String>,
}

impl TreeProgram {
    pub fn get(&self, name: &str) -> Option<&Item> {
        self.items.iter().find(|i| i.name == name)
    }

    /// Whether `name` denotes a tree (block or alias).
    pub fn is_tree(&self, name: &str) -> bool {
        self.get(name)
            .is_some_and(|i| matches!(i.body, ItemBody::Tree(_) | ItemBody::Alias(_)))
    }

    /// The tree the program denotes: `main` if defined, otherwise the last
    /// tree-valued item.
    pub fn entry(&self) -> Option<&str> {
        if self.is_tree("main") {
            return Some("main");
        }
        self.items
            .iter()
            .rev()
            .find(|i| matches!(i.body, ItemBody::Tree(_) | ItemBody::Alias(_)))
            .map(|i| i.name.as_str())
    }

    /// Tree-valued definitions by name.
    pub fn definitions(&self) -> std::collections::BTreeMap<&str, TreeExpr> {
        self.items
            .iter()
            .filter_map(|i| match &i.body {
                ItemBody::Tree(b) => Some((i.name.as_str(), TreeExpr::Literal(Box::new(b.clone())))),
                ItemBody::Alias(e) => Some((i.name.as_str(), e.clone())),
                ItemBody::Constant(_) => None,
            })
            .collect()
    }
}

impl TreeBlock {
    pub fn field(&self, key: &str) -> Option<&FieldKind> {
        self.fields.iter().map(|f| &f.kind).find(|k| k.key() == key)
    }

    pub fn dim(&self) -> usize {
        match self.field("dim") {
            Some(FieldKind::Dim(d)) => *d,
            _ => 2,
        }
    }

    pub fn accessories(&self) -> impl Iterator<Item = &AccessoryDecl> {
        self.fields.iter().filter_map(|f| match &f.kind {
            FieldKind::Accessory(a) => Some(a),
            _ => None,
        })
    }
}
