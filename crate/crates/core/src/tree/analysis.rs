//! Bounding radius and self-similarity classification.

use serde::Serialize;

use super::spec::TreeSpec;
use super::TreeError;

/// Radius of a circle about the root containing the whole tree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundingRadius {
    pub radius: f64,
    /// Plain sum of `dr * ds` over the sampled domain.
    pub truncated_sum: f64,
    /// True when the branch lengths form a geometric sequence and the
    /// radius includes the infinite tail.
    pub extrapolated: bool,
}

fn interval_sum(v: &[f64], from: usize, to: usize, ds: f64) -> f64 {
    v[from..to].iter().sum::<f64>() * ds
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs())
}

/// Length of the straightest path: the tree lies inside this circle.
///
/// When consecutive branches shrink by a constant ratio `0 < rho < 1`, the
/// sum continues past the sampled domain as a geometric series.
pub fn bounding_radius(spec: &TreeSpec) -> BoundingRadius {
    let coords = spec.coords();
    let grid = coords.grid();
    let ds = grid.delta_s();
    let dr = coords.radial_samples();
    let truncated_sum = interval_sum(dr, 0, grid.last_index(), ds);
    let plain = BoundingRadius {
        radius: truncated_sum,
        truncated_sum,
        extrapolated: false,
    };

    let idx: Vec<usize> = spec.events().iter().map(|e| e.index).collect();
    if idx.len() < 3 {
        return plain;
    }
    let lengths: Vec<f64> = idx.windows(2).map(|w| interval_sum(dr, w[0], w[1], ds)).collect();
    if lengths.iter().any(|l| *l <= 0.0) {
        return plain;
    }
    let rho = lengths[1] / lengths[0];
    let geometric = rho > 0.0 && rho < 1.0 && lengths.windows(2).all(|w| close(w[1] / w[0], rho, 1e-9));
    if !geometric {
        return plain;
    }
    let prefix = interval_sum(dr, 0, idx[0], ds);
    let full: f64 = lengths.iter().sum();
    let tail = lengths[lengths.len() - 1] * rho / (1.0 - rho);
    BoundingRadius {
        radius: prefix + full + tail,
        truncated_sum,
        extrapolated: true,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    ExactFractal,
    QuasiFractal,
    NonFractal,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::ExactFractal => "exact_fractal",
            Classification::QuasiFractal => "quasi_fractal",
            Classification::NonFractal => "non_fractal",
        }
    }
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityReport {
    pub classification: Classification,
    /// Common scaling ratio between consecutive units, when there is one.
    pub rho: Option<f64>,
    pub rho_condition_met: bool,
    pub phi_condition_met: bool,
    pub equidistant_met: bool,
    /// Number of branch intervals in one repeating unit (1 when the branch
    /// points are equidistant); `None` when the intervals never repeat.
    pub period: Option<usize>,
    pub tolerance_used: f64,
}

pub const DEFAULT_TOLERANCE: f64 = 1e-6;

/// Smallest period of the interval-length sequence that repeats at least
/// twice.
fn find_period(lengths: &[usize]) -> Option<usize> {
    (1..=lengths.len() / 2).find(|&p| (p..lengths.len()).all(|j| lengths[j] == lengths[j - p]))
}

fn scale_of(a: &[f64], b: &[f64]) -> f64 {
    a.iter().chain(b).fold(0.0f64, |m, v| m.max(v.abs()))
}

fn padded(v: &[f64], k: usize) -> f64 {
    v.get(k).copied().unwrap_or(0.0)
}

/// Pointwise equality of two units, aligned at their starts; the excess of
/// the longer unit must vanish.
fn units_equal(a: &[f64], b: &[f64], tol: f64) -> bool {
    let scale = scale_of(a, b);
    let n = a.len().max(b.len());
    (0..n).all(|k| (padded(a, k) - padded(b, k)).abs() <= tol * scale)
}

/// Least-squares ratio `b ~ rho * a`, if the fit is exact within `tol`.
fn units_ratio(a: &[f64], b: &[f64], tol: f64) -> Option<f64> {
    let n = a.len().max(b.len());
    let aa: f64 = (0..n).map(|k| padded(a, k).powi(2)).sum();
    if aa == 0.0 {
        return None;
    }
    let ab: f64 = (0..n).map(|k| padded(a, k) * padded(b, k)).sum();
    let rho = ab / aa;
    let scale = scale_of(a, b);
    (0..n)
        .all(|k| (padded(b, k) - rho * padded(a, k)).abs() <= tol * scale)
        .then_some(rho)
}

/// Tests the exact self-similarity conditions (constant scaling of `dr`,
/// repeated angular rates, equidistant or periodically repeating branch
/// intervals) across the branch intervals of `spec`.
///
/// Units are compared pointwise from their first sample; with repeating
/// but unequal intervals a unit spans one full period of intervals.
pub fn classify_self_similarity(spec: &TreeSpec, tolerance: f64) -> Result<SimilarityReport, TreeError> {
    let idx: Vec<usize> = spec.events().iter().map(|e| e.index).collect();
    if idx.len() < 3 {
        return Err(TreeError::TooFewBranchPoints { found: idx.len() });
    }
    let lengths: Vec<usize> = idx.windows(2).map(|w| w[1] - w[0]).collect();
    let period = find_period(&lengths);
    let p = period.unwrap_or(1);
    let units: Vec<(usize, usize)> = (0..lengths.len() / p).map(|u| (idx[u * p], idx[(u + 1) * p])).collect();

    let coords = spec.coords();
    let dr = coords.radial_samples();
    let mut ratios = Vec::new();
    let mut rho_ok = true;
    for w in units.windows(2) {
        let (a, b) = (&dr[w[0].0..w[0].1], &dr[w[1].0..w[1].1]);
        match units_ratio(a, b, tolerance) {
            Some(r) if r > 0.0 && r < 1.0 => ratios.push(r),
            _ => rho_ok = false,
        }
    }
    let rho = if rho_ok && !ratios.is_empty() {
        let first = ratios[0];
        ratios
            .iter()
            .all(|r| (r - first).abs() <= tolerance * first)
            .then(|| ratios.iter().sum::<f64>() / ratios.len() as f64)
    } else {
        None
    };

    let phi_ok = coords.all_angular_samples().iter().all(|ang| {
        units
            .windows(2)
            .all(|w| units_equal(&ang[w[0].0..w[0].1], &ang[w[1].0..w[1].1], tolerance))
    });

    let equidistant = period.is_some();
    let classification = if rho_ok && phi_ok && equidistant && rho.is_some() {
        Classification::ExactFractal
    } else if rho_ok != phi_ok {
        Classification::QuasiFractal
    } else {
        Classification::NonFractal
    };
    Ok(SimilarityReport {
        classification,
        rho,
        rho_condition_met: rho_ok,
        phi_condition_met: phi_ok,
        equidistant_met: equidistant,
        period,
        tolerance_used: tolerance,
    })
}
