//! Recursive-descent parser with error recovery.

use super::ast::*;
use super::diagnostic::Diagnostic;
use super::lexer::{lex, Comment, Tok, Token};
use crate::expr::{BinaryOp, Expr, ExprKind, Span, UnaryOp};

pub(crate) struct Parsed {
    pub program: TreeProgram,
    pub diagnostics: Vec<Diagnostic>,
}

pub(crate) fn parse_syntax(src: &str) -> Parsed {
    let lexed = lex(src);
    let mut p = Parser {
        src,
        toks: lexed.tokens,
        pos: 0,
        comments: lexed.comments,
        next_comment: 0,
        diags: lexed.diagnostics,
    };
    let program = p.program();
    Parsed {
        program,
        diagnostics: p.diags,
    }
}

struct Parser<'s> {
    src: &'s str,
    toks: Vec<Token>,
    pos: usize,
    comments: Vec<Comment>,
    next_comment: usize,
    diags: Vec<Diagnostic>,
}

fn binary_op(sym: &str) -> Option<BinaryOp> {
    Some(match sym {
        "<<" => BinaryOp::Concat,
        "||" => BinaryOp::Or,
        "&&" => BinaryOp::And,
        "<" => BinaryOp::Lt,
        "<=" => BinaryOp::Le,
        ">" => BinaryOp::Gt,
        ">=" => BinaryOp::Ge,
        "==" => BinaryOp::Eq,
        "!=" => BinaryOp::Ne,
        "+" => BinaryOp::Add,
        "-" => BinaryOp::Sub,
        "*" => BinaryOp::Mul,
        "/" => BinaryOp::Div,
        _ => return None,
    })
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn prev_end(&self) -> usize {
        if self.pos == 0 {
            0
        } else {
            self.toks[self.pos - 1].span.end
        }
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_ident(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error(&mut self, span: Span, msg: String) {
        self.diags.push(Diagnostic::error(self.src, span, msg));
    }

    fn unexpected(&mut self, wanted: &str) {
        let msg = format!("expected {wanted}, found {}", self.peek().describe());
        let span = self.span();
        self.error(span, msg);
    }

    fn expect_sym(&mut self, s: &str) -> Option<Span> {
        if self.is_sym(s) {
            Some(self.bump().span)
        } else if s == ";" && self.pos > 0 {
            // a missing terminator belongs to the end of what came before
            let at = self.prev_end();
            let msg = format!("expected `;`, found {}", self.peek().describe());
            self.error(Span::new(at.saturating_sub(1), at), msg);
            None
        } else {
            self.unexpected(&format!("`{s}`"));
            None
        }
    }

    fn expect_ident(&mut self, what: &str) -> Option<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(n) => {
                let span = self.bump().span;
                Some((n, span))
            }
            _ => {
                self.unexpected(what);
                None
            }
        }
    }

    fn expect_int(&mut self, what: &str) -> Option<usize> {
        match *self.peek() {
            Tok::Num(v) if v >= 0.0 && v.fract() == 0.0 && v < 1e15 => {
                self.bump();
                Some(v as usize)
            }
            _ => {
                self.unexpected(what);
                None
            }
        }
    }

    /// Comments that start before the current token and were not claimed yet.
    fn take_comments(&mut self) -> Vec<String> {
        let limit = self.span().start;
        let mut out = Vec::new();
        while self.next_comment < self.comments.len() && self.comments[self.next_comment].span.start < limit {
            out.push(self.comments[self.next_comment].text.clone());
            self.next_comment += 1;
        }
        out
    }

    /// Skips to the end of the current item: past a `;` or a balanced `}`.
    fn sync_item(&mut self) {
        let mut depth = 0usize;
        loop {
            match self.peek() {
                Tok::Eof => return,
                Tok::Sym("{") => depth += 1,
                Tok::Sym("}") => {
                    if depth <= 1 {
                        self.bump();
                        return;
                    }
                    depth -= 1;
                }
                Tok::Sym(";") if depth == 0 => {
                    self.bump();
                    return;
                }
                _ => {}
            }
            self.bump();
        }
    }

    /// Skips to the end of the current field: past `;`, or up to `}`.
    fn sync_field(&mut self) {
        loop {
            match self.peek() {
                Tok::Eof | Tok::Sym("}") => return,
                Tok::Sym(";") => {
                    self.bump();
                    return;
                }
                _ => {
                    self.bump();
                }
            }
        }
    }

    fn program(&mut self) -> TreeProgram {
        let mut program = TreeProgram::default();
        loop {
            let comments = self.take_comments();
            match self.peek().clone() {
                Tok::Eof => {
                    program.trailing_comments = comments;
                    break;
                }
                Tok::Ident(kw) if kw == "tree" && matches!(self.peek_at(1), Tok::Ident(_)) => {
                    if let Some(item) = self.tree_item(comments) {
                        program.items.push(item);
                    }
                }
                Tok::Ident(_) => match self.binding(comments) {
                    Some(item) => program.items.push(item),
                    None => self.sync_item(),
                },
                _ => {
                    self.unexpected("`tree` or a definition `name = ...;`");
                    self.bump();
                    self.sync_item();
                }
            }
        }
        program
    }

    fn binding(&mut self, comments: Vec<String>) -> Option<Item> {
        let (name, name_span) = self.expect_ident("a name")?;
        self.expect_sym("=")?;
        let value = self.expr()?;
        let end = self.expect_sym(";")?;
        Some(Item {
            comments,
            name,
            name_span,
            body: ItemBody::Constant(value),
            span: name_span.join(end),
        })
    }

    fn tree_item(&mut self, comments: Vec<String>) -> Option<Item> {
        let start = self.bump().span;
        let Some((name, name_span)) = self.expect_ident("a tree name") else {
            self.sync_item();
            return None;
        };
        if self.expect_sym("{").is_none() {
            self.sync_item();
            return None;
        }
        let mut fields = Vec::new();
        let trailing_comments;
        loop {
            let comments = self.take_comments();
            if self.is_sym("}") {
                trailing_comments = comments;
                self.bump();
                break;
            }
            if matches!(self.peek(), Tok::Eof) {
                self.error(start, format!("tree `{name}` is missing its closing `}}`"));
                trailing_comments = comments;
                break;
            }
            let field_start = self.span();
            match self.field() {
                Some(kind) => fields.push(Field {
                    comments,
                    kind,
                    span: field_start.join(Span::new(self.prev_end(), self.prev_end())),
                }),
                None => self.sync_field(),
            }
        }
        let span = start.join(Span::new(self.prev_end(), self.prev_end()));
        Some(Item {
            comments,
            name,
            name_span,
            body: ItemBody::Tree(TreeBlock {
                fields,
                trailing_comments,
                span,
            }),
            span,
        })
    }

    fn field(&mut self) -> Option<FieldKind> {
        let (key, key_span) = self.expect_ident("a field name")?;
        let kind = match key.as_str() {
            "accessory" => {
                let (name, _) = self.expect_ident("an accessory name")?;
                let mode = match self.expect_ident("`deriv` or `abs`")? {
                    (m, _) if m == "deriv" => AccessoryMode::Deriv,
                    (m, _) if m == "abs" => AccessoryMode::Abs,
                    (m, span) => {
                        self.error(span, format!("expected `deriv` or `abs`, found `{m}`"));
                        return None;
                    }
                };
                self.expect_sym(":")?;
                let (components, vector) = if self.is_sym("[") {
                    (self.list()?, true)
                } else {
                    (vec![self.expr()?], false)
                };
                let mut decl = AccessoryDecl {
                    name,
                    mode,
                    components,
                    vector,
                    init: None,
                    units: None,
                };
                while self.eat_sym(",") {
                    match self.expect_ident("`init` or `units`")? {
                        (k, _) if k == "init" => decl.init = Some(self.expr()?),
                        (k, _) if k == "units" => match self.peek().clone() {
                            Tok::Str(u) => {
                                self.bump();
                                decl.units = Some(u);
                            }
                            _ => {
                                self.unexpected("a quoted unit name");
                                return None;
                            }
                        },
                        (k, span) => {
                            self.error(span, format!("expected `init` or `units`, found `{k}`"));
                            return None;
                        }
                    }
                }
                FieldKind::Accessory(decl)
            }
            "branches" => {
                let axis = if self.eat_sym("[") {
                    let (a, _) = self.expect_ident("an angular coordinate name")?;
                    self.expect_sym("]")?;
                    Some(a)
                } else {
                    None
                };
                self.expect_sym(":")?;
                FieldKind::Branches {
                    axis,
                    rule: self.branch_rule()?,
                }
            }
            _ => {
                self.expect_sym(":")?;
                match key.as_str() {
                    "dim" => FieldKind::Dim(self.expect_int("a dimension")?),
                    "generations" => FieldKind::Generations(self.expect_int("a generation count")?),
                    "domain" => {
                        self.expect_sym("[")?;
                        let a = self.expr()?;
                        self.expect_sym(",")?;
                        let b = self.expr()?;
                        self.expect_sym("]")?;
                        FieldKind::Domain(a, b)
                    }
                    "ds" => FieldKind::Step(self.expr()?),
                    "heading" => FieldKind::Heading(self.list()?),
                    "origin" => FieldKind::Origin(self.list()?),
                    "forks" => self.forks()?,
                    name if crate::accessory::is_coordinate_name(name) => FieldKind::Coord {
                        name: key.clone(),
                        value: self.expr()?,
                    },
                    _ => {
                        self.error(key_span, format!("unknown field `{key}`"));
                        return None;
                    }
                }
            }
        };
        self.expect_sym(";")?;
        Some(kind)
    }

    fn forks(&mut self) -> Option<FieldKind> {
        self.expect_sym("[")?;
        let mut first = vec![self.expect_int("a fork arity")?];
        while self.eat_sym(",") {
            first.push(self.expect_int("a fork arity")?);
        }
        let kind = if self.eat_sym("|") {
            let mut cycle = vec![self.expect_int("a fork arity")?];
            while self.eat_sym(",") {
                cycle.push(self.expect_int("a fork arity")?);
            }
            FieldKind::Forks { prefix: first, cycle }
        } else {
            FieldKind::Forks {
                prefix: Vec::new(),
                cycle: first,
            }
        };
        self.expect_sym("]")?;
        Some(kind)
    }

    fn branch_rule(&mut self) -> Option<BranchRule> {
        let (rule, span) = self.expect_ident("`every`, `at`, `pattern` or `none`")?;
        if rule == "none" {
            return Some(BranchRule::None);
        }
        if !matches!(rule.as_str(), "every" | "at" | "pattern") {
            self.error(span, format!("unknown branch rule `{rule}`"));
            return None;
        }
        self.expect_sym("(")?;
        let out = match rule.as_str() {
            "every" => {
                let step = self.expr()?;
                let start = if self.eat_sym(",") { Some(self.expr()?) } else { None };
                BranchRule::Every { step, start }
            }
            "at" => {
                let mut pts = vec![self.expr()?];
                while self.eat_sym(",") {
                    pts.push(self.expr()?);
                }
                BranchRule::At(pts)
            }
            _ => {
                let intervals = self.list()?;
                let mut repeat = Repeat::Forever;
                let mut start = None;
                if self.eat_sym(",") {
                    if self.is_ident("repeat") {
                        self.bump();
                    } else {
                        repeat = Repeat::Times(self.expect_int("`repeat` or a repeat count")?);
                    }
                    if self.eat_sym(",") {
                        start = Some(self.expr()?);
                    }
                }
                BranchRule::Pattern {
                    intervals,
                    repeat,
                    start,
                }
            }
        };
        self.expect_sym(")")?;
        Some(out)
    }

    fn list(&mut self) -> Option<Vec<Expr>> {
        self.expect_sym("[")?;
        let mut out = vec![self.expr()?];
        while self.eat_sym(",") {
            out.push(self.expr()?);
        }
        self.expect_sym("]")?;
        Some(out)
    }

    fn expr(&mut self) -> Option<Expr> {
        self.binary(1)
    }

    fn binary(&mut self, min: u8) -> Option<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Sym(s) => binary_op(s),
                _ => None,
            };
            let Some(op) = op else { break };
            if op.precedence() < min {
                break;
            }
            self.bump();
            let rhs = self.binary(op.precedence() + 1)?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Some(lhs)
    }

    fn unary(&mut self) -> Option<Expr> {
        if self.is_sym("-") {
            let start = self.bump().span;
            let inner = self.unary()?;
            let span = start.join(inner.span);
            // a negated literal is a negative literal
            let kind = match inner.kind {
                ExprKind::Number(v) => ExprKind::Number(-v),
                other => ExprKind::Unary(
                    UnaryOp::Neg,
                    Box::new(Expr {
                        kind: other,
                        span: inner.span,
                    }),
                ),
            };
            return Some(Expr::new(kind, span));
        }
        let base = self.atom()?;
        if self.eat_sym("^") {
            let exp = self.unary()?;
            return Some(Expr::binary(BinaryOp::Pow, base, exp));
        }
        Some(base)
    }

    fn atom(&mut self) -> Option<Expr> {
        match self.peek().clone() {
            Tok::Num(v) => {
                let span = self.bump().span;
                Some(Expr::new(ExprKind::Number(v), span))
            }
            Tok::Ident(name) => {
                let span = self.bump().span;
                if !self.is_sym("(") {
                    return Some(Expr::new(ExprKind::Ident(name), span));
                }
                self.bump();
                if name == "piecewise" {
                    let mut arms = vec![self.arm()?];
                    while self.eat_sym(",") {
                        arms.push(self.arm()?);
                    }
                    let end = self.expect_sym(")")?;
                    return Some(Expr::new(ExprKind::Piecewise(arms), span.join(end)));
                }
                let mut args = Vec::new();
                if !self.is_sym(")") {
                    args.push(self.expr()?);
                    while self.eat_sym(",") {
                        args.push(self.expr()?);
                    }
                }
                let end = self.expect_sym(")")?;
                Some(Expr::new(ExprKind::Call(name, args), span.join(end)))
            }
            Tok::Sym("(") => {
                self.bump();
                let inner = self.expr()?;
                self.expect_sym(")")?;
                Some(inner)
            }
            _ => {
                self.unexpected("an expression");
                None
            }
        }
    }

    fn arm(&mut self) -> Option<(Expr, Expr)> {
        self.expect_sym("(")?;
        let cond = self.expr()?;
        self.expect_sym(",")?;
        let value = self.expr()?;
        self.expect_sym(")")?;
        Some((cond, value))
    }
}
