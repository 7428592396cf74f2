//! Branch point sets, the multivalued unit function and fork schedules.

use log::warn;

use super::TreeError;
use crate::grid::SGrid;

/// Strictly increasing branch points, each snapped onto a grid sample.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BranchPointSet {
    points: Vec<f64>,
}

impl BranchPointSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Snaps every point to its nearest grid sample. Points off the grid by
    /// more than round-off are moved with a warning.
    pub fn new(points: &[f64], grid: &SGrid) -> Result<Self, TreeError> {
        let mut snapped: Vec<f64> = Vec::with_capacity(points.len());
        for &s in points {
            if !grid.contains(s) {
                return Err(TreeError::BranchOutOfDomain { s });
            }
            let k = grid.nearest_index(s).ok_or(TreeError::BranchOutOfDomain { s })?;
            let at = grid.s_at(k);
            if grid.exact_index(s).is_none() {
                warn!("branch point {s} moved to grid sample {at}");
            }
            if let Some(&prev) = snapped.last() {
                if at <= prev {
                    return Err(TreeError::BranchNotIncreasing { s });
                }
            }
            snapped.push(at);
        }
        Ok(Self { points: snapped })
    }

    /// Equidistant points `start, start + step, ...` inside the grid.
    pub fn every(grid: &SGrid, step: f64, start: f64) -> Result<Self, TreeError> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(TreeError::BadBranchStep(step));
        }
        let mut pts = Vec::new();
        let mut j = 0usize;
        loop {
            let s = start + j as f64 * step;
            if !grid.contains(s) {
                break;
            }
            pts.push(s);
            j += 1;
        }
        Self::new(&pts, grid)
    }

    /// Points following a repeated list of interval lengths.
    pub fn pattern(grid: &SGrid, intervals: &[f64], start: f64, repeats: Option<usize>) -> Result<Self, TreeError> {
        if intervals.is_empty() || intervals.iter().any(|d| !(*d > 0.0) || !d.is_finite()) {
            return Err(TreeError::BadBranchStep(intervals.first().copied().unwrap_or(0.0)));
        }
        let mut pts = vec![start];
        let mut s = start;
        let total = repeats.map(|r| r * intervals.len());
        for (n, d) in intervals.iter().cycle().enumerate() {
            if total.is_some_and(|t| n >= t) {
                break;
            }
            s += d;
            if !grid.contains(s) {
                break;
            }
            pts.push(s);
        }
        if !grid.contains(start) {
            return Err(TreeError::BranchOutOfDomain { s: start });
        }
        Self::new(&pts, grid)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn indices(&self, grid: &SGrid) -> Vec<usize> {
        self.points.iter().filter_map(|s| grid.nearest_index(*s)).collect()
    }

    /// Same points moved by `offset`.
    pub fn shifted(&self, offset: f64) -> Self {
        Self {
            points: self.points.iter().map(|s| s + offset).collect(),
        }
    }
}

/// Value of the multivalued unit function at one `s`.
#[derive(Debug, Clone, PartialEq)]
pub enum UnitValue {
    /// Single-valued zero on a branch point.
    Node,
    Values(Vec<f64>),
}

/// Evenly spaced multipliers in `[-1, 1]`; binary gives `{+1, -1}`.
pub fn fork_multipliers(arity: usize) -> Vec<f64> {
    match arity {
        0 | 1 => vec![1.0],
        2 => vec![1.0, -1.0],
        m => (0..m).map(|j| -1.0 + 2.0 * j as f64 / (m - 1) as f64).collect(),
    }
}

pub fn unit_function(set: &BranchPointSet, grid: &SGrid, s: f64, arity: usize) -> Result<UnitValue, TreeError> {
    if !grid.contains(s) {
        return Err(TreeError::BranchOutOfDomain { s });
    }
    let tol = 1e-9 * grid.delta_s();
    if set.points().iter().any(|b| (b - s).abs() <= tol) {
        return Ok(UnitValue::Node);
    }
    Ok(UnitValue::Values(fork_multipliers(arity)))
}

/// Fork arity per fork event. Events past the end of `arities` cycle
/// through `arities[repeat_from..]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ForkSchedule {
    arities: Vec<usize>,
    repeat_from: usize,
}

impl Default for ForkSchedule {
    fn default() -> Self {
        Self::binary()
    }
}

impl ForkSchedule {
    pub fn binary() -> Self {
        Self {
            arities: vec![2],
            repeat_from: 0,
        }
    }

    /// Cycles the whole list.
    pub fn cycle(arities: Vec<usize>) -> Result<Self, TreeError> {
        Self::new(arities, 0)
    }

    pub fn new(arities: Vec<usize>, repeat_from: usize) -> Result<Self, TreeError> {
        if arities.is_empty() {
            return Err(TreeError::EmptySchedule);
        }
        if let Some(&a) = arities.iter().find(|a| **a < 2) {
            return Err(TreeError::BadArity(a));
        }
        if repeat_from >= arities.len() {
            return Err(TreeError::BadRepeat {
                repeat_from,
                len: arities.len(),
            });
        }
        Ok(Self { arities, repeat_from })
    }

    pub fn arities(&self) -> &[usize] {
        &self.arities
    }

    pub fn repeat_from(&self) -> usize {
        self.repeat_from
    }

    pub fn arity_at(&self, event: usize) -> usize {
        if event < self.arities.len() {
            return self.arities[event];
        }
        let period = self.arities.len() - self.repeat_from;
        self.arities[self.repeat_from + (event - self.repeat_from) % period]
    }

    /// Schedule for the events after the first `skip` ones.
    pub fn skip(&self, skip: usize) -> Self {
        if skip <= self.repeat_from {
            Self {
                arities: self.arities[skip..].to_vec(),
                repeat_from: self.repeat_from - skip,
            }
        } else if skip < self.arities.len() {
            let mut arities = self.arities[skip..].to_vec();
            let repeat_from = arities.len();
            arities.extend_from_slice(&self.arities[self.repeat_from..]);
            Self { arities, repeat_from }
        } else {
            let period = self.arities.len() - self.repeat_from;
            let phase = (skip - self.repeat_from) % period;
            let mut cyc = self.arities[self.repeat_from..].to_vec();
            cyc.rotate_left(phase);
            Self {
                arities: cyc,
                repeat_from: 0,
            }
        }
    }

    /// `n` materialized arities followed by `tail`.
    pub fn followed_by(&self, n: usize, tail: &ForkSchedule) -> Self {
        let mut arities: Vec<usize> = (0..n).map(|j| self.arity_at(j)).collect();
        let repeat_from = n + tail.repeat_from;
        arities.extend_from_slice(&tail.arities);
        Self { arities, repeat_from }
    }
}
