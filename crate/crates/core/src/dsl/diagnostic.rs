use std::fmt;

use serde::Serialize;

use crate::expr::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// A positioned message about the source text. `line` and `column` are
/// 1-based; the column counts characters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
    pub line: usize,
    pub column: usize,
    /// The full source line the span starts on.
    pub excerpt: String,
    #[serde(skip)]
    pub span: Span,
}

impl Diagnostic {
    pub fn error(src: &str, span: Span, message: String) -> Self {
        Self::new(src, span, Severity::Error, message)
    }

    pub fn new(src: &str, span: Span, severity: Severity, message: String) -> Self {
        // keep the span inside the text; an end-of-input span points at the
        // last character
        let mut start = span.start.min(src.len());
        if start == src.len() && start > 0 {
            start = src[..start].char_indices().last().map_or(0, |(i, _)| i);
        }
        while !src.is_char_boundary(start) {
            start -= 1;
        }
        let end = span.end.clamp(start, src.len()).max(start);
        let line_start = src[..start].rfind('\n').map_or(0, |i| i + 1);
        let line_end = src[start..].find('\n').map_or(src.len(), |i| start + i);
        Self {
            severity,
            message,
            line: src[..start].matches('\n').count() + 1,
            column: src[line_start..start].chars().count() + 1,
            excerpt: src[line_start..line_end].to_string(),
            span: Span::new(start, end),
        }
    }
}

impl Diagnostic {
    /// Multi-line report naming `origin` (usually a file path) in the
    /// location line.
    pub fn render(&self, origin: &str) -> String {
        let text = self.to_string();
        let at = format!("  --> {}:{}", self.line, self.column);
        let with = if origin.is_empty() {
            at.clone()
        } else {
            format!("  --> {origin}:{}:{}", self.line, self.column)
        };
        text.replacen(&at, &with, 1)
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        let width = (self.span.end - self.span.start).max(1);
        let marker_len = self
            .excerpt
            .chars()
            .count()
            .saturating_sub(self.column - 1)
            .clamp(1, width);
        writeln!(f, "{sev}: {}", self.message)?;
        writeln!(f, "  --> {}:{}", self.line, self.column)?;
        writeln!(f, "   | {}", self.excerpt)?;
        write!(f, "   | {}{}", " ".repeat(self.column - 1), "^".repeat(marker_len))
    }
}

/// Every diagnostic collected while reading a program.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics(pub Vec<Diagnostic>);

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl std::error::Error for Diagnostics {}
