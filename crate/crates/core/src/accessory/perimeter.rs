//! Sensory feedback: branches bend away from (or towards) a closed perimeter.

use super::{AccessoryError, EnhancedTree};
use crate::curve::{direction, HeadingFeedback};

/// Name of the channel recording the distance to the perimeter.
pub const PERIMETER_CHANNEL: &str = "perimeter_distance";

/// A simple closed polygon; the last vertex connects back to the first.
#[derive(Debug, Clone, PartialEq)]
pub struct Perimeter {
    vertices: Vec<[f64; 2]>,
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn segments_intersect(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> bool {
    let d1 = cross(sub(p2, p1), sub(q1, p1));
    let d2 = cross(sub(p2, p1), sub(q2, p1));
    let d3 = cross(sub(q2, q1), sub(p1, q1));
    let d4 = cross(sub(q2, q1), sub(p2, q1));
    d1 * d2 <= 0.0 && d3 * d4 <= 0.0
}

impl Perimeter {
    pub fn new(mut vertices: Vec<[f64; 2]>) -> Result<Self, AccessoryError> {
        if vertices.len() > 1 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        let n = vertices.len();
        if n < 3 {
            return Err(AccessoryError::Perimeter(format!("need at least 3 vertices, got {n}")));
        }
        if vertices.iter().flatten().any(|v| !v.is_finite()) {
            return Err(AccessoryError::Perimeter("non-finite vertex".into()));
        }
        let area: f64 = (0..n).map(|i| cross(vertices[i], vertices[(i + 1) % n])).sum::<f64>() / 2.0;
        if area.abs() < 1e-12 {
            return Err(AccessoryError::Perimeter("zero enclosed area".into()));
        }
        for i in 0..n {
            for j in i + 1..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    continue;
                }
                if segments_intersect(vertices[i], vertices[(i + 1) % n], vertices[j], vertices[(j + 1) % n]) {
                    return Err(AccessoryError::Perimeter(format!(
                        "edges {i} and {j} intersect; the perimeter must be simple"
                    )));
                }
            }
        }
        Ok(Self { vertices })
    }

    /// Regular polygon approximating a circle.
    pub fn circle(center: [f64; 2], radius: f64, segments: usize) -> Result<Self, AccessoryError> {
        Self::new(
            (0..segments)
                .map(|i| {
                    let t = 2.0 * std::f64::consts::PI * i as f64 / segments as f64;
                    [center[0] + radius * t.cos(), center[1] + radius * t.sin()]
                })
                .collect(),
        )
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    /// Nearest point on the boundary and its distance.
    pub fn nearest(&self, p: [f64; 2]) -> ([f64; 2], f64) {
        let n = self.vertices.len();
        let mut best = (self.vertices[0], f64::INFINITY);
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let ab = sub(b, a);
            let len2 = ab[0] * ab[0] + ab[1] * ab[1];
            let t = (((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0);
            let q = [a[0] + t * ab[0], a[1] + t * ab[1]];
            let d = (p[0] - q[0]).hypot(p[1] - q[1]);
            if d < best.1 {
                best = (q, d);
            }
        }
        best
    }

    /// Even-odd point-in-polygon test.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        let n = self.vertices.len();
        let mut inside = false;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            if (a[1] > p[1]) != (b[1] > p[1]) {
                let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
                if p[0] < x {
                    inside = !inside;
                }
            }
        }
        inside
    }
}

/// Perimeter feedback parameters attached to an enhanced tree.
#[derive(Debug, Clone, PartialEq)]
pub struct Sensory {
    pub perimeter: Perimeter,
    pub gain: f64,
    pub falloff: f64,
}

pub(crate) struct PerimeterSteer<'a> {
    sensory: &'a Sensory,
}

impl<'a> PerimeterSteer<'a> {
    pub(crate) fn new(sensory: &'a Sensory) -> Self {
        Self { sensory }
    }

    pub(crate) fn distance(&self, p: &[f64]) -> f64 {
        self.sensory.perimeter.nearest([p[0], p[1]]).1
    }
}

impl HeadingFeedback for PerimeterSteer<'_> {
    /// `-gain * exp(-d / falloff) * side`, where `side` is +1 when the
    /// nearest perimeter point lies to the left of the heading (or straight
    /// ahead) and -1 when it lies to the right. Positive gain turns away.
    fn azimuth_adjustment(&self, position: &[f64], heading: &[f64]) -> f64 {
        let Sensory {
            gain,
            falloff,
            perimeter,
        } = self.sensory;
        if *gain == 0.0 {
            return 0.0;
        }
        let p = [position[0], position[1]];
        let (q, d) = perimeter.nearest(p);
        let mut dir = [0.0; 2];
        direction(heading, &mut dir);
        let side = if cross(dir, sub(q, p)) >= 0.0 { 1.0 } else { -1.0 };
        -gain * (-d / falloff).exp() * side
    }
}

/// Returns a copy of `enhanced` whose evaluation steers every branch by the
/// distance to `perimeter` and records that distance as an absolute channel.
pub fn perimeter_feedback(
    enhanced: &EnhancedTree,
    perimeter: Perimeter,
    gain: f64,
    falloff: f64,
) -> Result<EnhancedTree, AccessoryError> {
    if enhanced.dim() != 2 {
        return Err(AccessoryError::DimensionMismatch(enhanced.dim(), 2));
    }
    if !(falloff > 0.0) || !falloff.is_finite() || !gain.is_finite() {
        return Err(AccessoryError::Perimeter(format!(
            "falloff must be positive and gain finite (gain {gain}, falloff {falloff})"
        )));
    }
    if enhanced.accessories.get(PERIMETER_CHANNEL).is_some() {
        return Err(AccessoryError::Duplicate(PERIMETER_CHANNEL.into()));
    }
    let mut out = enhanced.clone();
    out.sensory = Some(Sensory {
        perimeter,
        gain,
        falloff,
    });
    Ok(out)
}
