//! Uniform sampling grids over the path parameter `s`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid step must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("grid bounds must satisfy s_min < s_max, got [{0}, {1}]")]
    BadBounds(f64, f64),
    #[error("grid must have at least 2 samples, got {0}")]
    TooFewSamples(usize),
}

/// A uniform grid `s_k = s_min + k * delta_s` for `k in 0..count`.
///
/// The integrators use left-endpoint Riemann sums, so a grid with `count`
/// samples has `count - 1` cells `[s_k, s_k + delta_s)`. The sample at
/// `s_max` closes the last cell and never contributes to a sum.
///
/// A single-sample grid has zero cells and is the identity element of
/// concatenation; it can only be built with [`SGrid::degenerate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SGrid {
    s_min: f64,
    s_max: f64,
    delta_s: f64,
    count: usize,
}

impl SGrid {
    /// Builds a grid over `[s_min, s_max]`. When the span is not an integer
    /// multiple of the step, `s_max` is snapped to the last sample.
    pub fn new(s_min: f64, s_max: f64, delta_s: f64) -> Result<Self, GridError> {
        if !(delta_s > 0.0) || !delta_s.is_finite() {
            return Err(GridError::BadStep(delta_s));
        }
        if !(s_max > s_min) || !s_min.is_finite() || !s_max.is_finite() {
            return Err(GridError::BadBounds(s_min, s_max));
        }
        let count = ((s_max - s_min) / delta_s).round() as usize + 1;
        Self::from_count(s_min, delta_s, count)
    }

    pub fn from_count(s_min: f64, delta_s: f64, count: usize) -> Result<Self, GridError> {
        if !(delta_s > 0.0) || !delta_s.is_finite() {
            return Err(GridError::BadStep(delta_s));
        }
        if count < 2 {
            return Err(GridError::TooFewSamples(count));
        }
        Ok(Self {
            s_min,
            s_max: s_min + (count - 1) as f64 * delta_s,
            delta_s,
            count,
        })
    }

    /// A zero-length grid holding the single sample `s`.
    pub fn degenerate(s: f64, delta_s: f64) -> Self {
        Self {
            s_min: s,
            s_max: s,
            delta_s,
            count: 1,
        }
    }

    pub fn s_min(&self) -> f64 {
        self.s_min
    }

    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    pub fn delta_s(&self) -> f64 {
        self.delta_s
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Number of Riemann cells.
    pub fn cells(&self) -> usize {
        self.count.saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.count < 2
    }

    pub fn last_index(&self) -> usize {
        self.count - 1
    }

    pub fn s_at(&self, k: usize) -> f64 {
        self.s_min + k as f64 * self.delta_s
    }

    /// Index of the sample nearest to `s`, if `s` lies inside the domain
    /// (with half a step of slack at either end).
    pub fn nearest_index(&self, s: f64) -> Option<usize> {
        if !s.is_finite() {
            return None;
        }
        let k = ((s - self.s_min) / self.delta_s).round();
        if k < 0.0 || k > (self.count - 1) as f64 {
            return None;
        }
        Some(k as usize)
    }

    /// Like [`nearest_index`](Self::nearest_index) but only accepts `s` that
    /// lies on a sample to within `1e-9` steps.
    pub fn exact_index(&self, s: f64) -> Option<usize> {
        let k = self.nearest_index(s)?;
        let off = (s - self.s_at(k)).abs() / self.delta_s;
        (off <= 1e-9).then_some(k)
    }

    pub fn contains(&self, s: f64) -> bool {
        let slack = 1e-9 * self.delta_s;
        s >= self.s_min - slack && s <= self.s_max + slack
    }

    /// Sub-grid covering samples `from..=to`.
    pub fn slice(&self, from: usize, to: usize) -> SGrid {
        debug_assert!(from <= to && to < self.count);
        if from == to {
            return SGrid::degenerate(self.s_at(from), self.delta_s);
        }
        SGrid {
            s_min: self.s_at(from),
            s_max: self.s_at(to),
            delta_s: self.delta_s,
            count: to - from + 1,
        }
    }

    pub fn samples(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |k| self.s_at(k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn count_matches_span() {
        let g = SGrid::new(0.0, 2.0, 1e-3).unwrap();
        assert_eq!(g.count(), 2001);
        assert_eq!(g.cells(), 2000);
        assert!((g.s_max() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn snaps_s_max() {
        let g = SGrid::new(0.0, 1.05, 0.1).unwrap();
        assert_eq!(g.count(), 12);
        assert!((g.s_max() - 1.1).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(SGrid::new(0.0, 1.0, 0.0), Err(GridError::BadStep(0.0)));
        assert_eq!(SGrid::new(1.0, 1.0, 0.1), Err(GridError::BadBounds(1.0, 1.0)));
        assert!(SGrid::new(0.0, 1.0, -0.1).is_err());
        assert_eq!(SGrid::from_count(0.0, 0.1, 1), Err(GridError::TooFewSamples(1)));
    }

    #[test]
    fn index_lookup() {
        let g = SGrid::new(-1.0, 1.0, 0.25).unwrap();
        assert_eq!(g.nearest_index(-1.0), Some(0));
        assert_eq!(g.nearest_index(0.1), Some(4));
        assert_eq!(g.exact_index(0.1), None);
        assert_eq!(g.exact_index(0.5), Some(6));
        assert_eq!(g.nearest_index(1.2), None);
    }
}
