use std::collections::BTreeMap;
use std::fmt::Write;

use super::simplify::simplify_indices;
use super::ExportError;
use crate::accessory::{Channel, DecoratedTree};

#[derive(Debug, Clone, PartialEq)]
pub struct SvgOptions {
    /// Maximum deviation allowed when thinning polylines; `None` uses
    /// `bound * 1e-4`, `Some(0.0)` keeps every sample.
    pub tolerance: Option<f64>,
    pub stroke: String,
    /// Default stroke width; `None` uses `bound / 150`.
    pub stroke_width: Option<f64>,
    /// Extra room around the bounding circle, as a fraction of its radius.
    pub margin: f64,
    /// Pixel size of the square canvas.
    pub size: u32,
}

impl Default for SvgOptions {
    fn default() -> Self {
        Self {
            tolerance: None,
            stroke: "#24472b".into(),
            stroke_width: None,
            margin: 0.05,
            size: 800,
        }
    }
}

/// Number with at most four decimals and no trailing zeros.
fn num(v: f64) -> String {
    let r = (v * 1e4).round() / 1e4;
    if r == 0.0 {
        return "0".into();
    }
    let s = format!("{r:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

fn color(ch: &Channel, e: usize) -> String {
    let byte = |c: usize| (ch.edge_mean(e, c).clamp(0.0, 1.0) * 255.0).round() as u8;
    if ch.arity >= 3 {
        format!("rgb({},{},{})", byte(0), byte(1), byte(2))
    } else {
        let g = byte(0);
        format!("rgb({g},{g},{g})")
    }
}

fn valid_attribute(a: &str) -> bool {
    !a.is_empty() && a.bytes().all(|b| b.is_ascii_lowercase() || b == b'-') && !matches!(a, "d" | "id")
}

pub fn to_svg(decorated: &DecoratedTree, style_map: &BTreeMap<String, String>) -> Result<String, ExportError> {
    to_svg_with(decorated, style_map, &SvgOptions::default())
}

/// One `<path>` per edge, in branch-id order, y pointing up. `style_map`
/// binds channels to attributes (`width -> stroke-width`, `color -> stroke`,
/// ...); each edge gets the channel's mean over its samples. Colour
/// attributes (`stroke`, `fill`) read three components as RGB in `[0, 1]`.
pub fn to_svg_with(
    decorated: &DecoratedTree,
    style_map: &BTreeMap<String, String>,
    opts: &SvgOptions,
) -> Result<String, ExportError> {
    let tree = &decorated.tree;
    if tree.dim != 2 {
        return Err(ExportError::Dimension {
            format: "SVG",
            want: 2,
            got: tree.dim,
        });
    }
    let mut bindings = Vec::new();
    for (name, attr) in style_map {
        let ch = decorated
            .channels
            .get(name)
            .ok_or_else(|| ExportError::UnknownChannel(name.clone()))?;
        if !valid_attribute(attr) {
            return Err(ExportError::BadAttribute(attr.clone()));
        }
        bindings.push((attr.as_str(), ch));
    }

    let root = &tree.root.position;
    let reach = tree
        .edges
        .iter()
        .flat_map(|e| &e.polyline.points)
        .map(|p| (p[0] - root[0]).hypot(p[1] - root[1]))
        .fold(0.0, f64::max);
    let mut radius = if decorated.bound.is_finite() {
        decorated.bound.max(reach)
    } else {
        reach
    };
    if radius <= 0.0 {
        radius = 1.0;
    }
    let half = radius * (1.0 + opts.margin);
    let tolerance = opts.tolerance.unwrap_or(radius * 1e-4);
    let width = opts.stroke_width.unwrap_or(radius / 150.0);

    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{size}\" height=\"{size}\" viewBox=\"{} {} {} {}\">",
        num(root[0] - half),
        num(-root[1] - half),
        num(2.0 * half),
        num(2.0 * half),
        size = opts.size,
    );
    let _ = writeln!(
        out,
        "<g fill=\"none\" stroke=\"{}\" stroke-width=\"{}\" stroke-linecap=\"round\" stroke-linejoin=\"round\">",
        opts.stroke,
        num(width)
    );
    for (e, edge) in tree.edges.iter().enumerate() {
        let pts = &edge.polyline.points;
        let mut d = String::new();
        for (n, &i) in simplify_indices(pts, tolerance).iter().enumerate() {
            let cmd = if n == 0 { "M" } else { " L" };
            let _ = write!(d, "{cmd} {} {}", num(pts[i][0]), num(-pts[i][1]));
        }
        let mut id = String::from("b");
        for digit in edge.child_id.digits() {
            let _ = write!(id, "-{digit}");
        }
        let _ = write!(out, "<path id=\"{id}\" d=\"{d}\"");
        for (attr, ch) in &bindings {
            let value = if matches!(*attr, "stroke" | "fill") {
                color(ch, e)
            } else {
                num(ch.edge_mean(e, 0))
            };
            let _ = write!(out, " {attr}=\"{value}\"");
        }
        out.push_str("/>\n");
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}
