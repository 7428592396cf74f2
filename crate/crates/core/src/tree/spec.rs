use super::branch::{BranchPointSet, ForkSchedule};
use super::TreeError;
use crate::curve::{resample_with_breaks, DerivativeCoords};

/// A fork event: a grid index where at least one angular axis branches.
#[derive(Debug, Clone, PartialEq)]
pub struct ForkEvent {
    pub index: usize,
    /// Angular axes whose branch set contains this sample.
    pub axes: Vec<usize>,
}

/// Derivative coordinates plus branching data: the evaluable tree.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeSpec {
    coords: DerivativeCoords,
    branch_sets: Vec<BranchPointSet>,
    forks: ForkSchedule,
    max_generations: usize,
    events: Vec<ForkEvent>,
}

impl TreeSpec {
    /// `branch_sets[d]` holds the branch points of angular axis `d`; missing
    /// trailing axes never branch.
    pub fn new(
        coords: DerivativeCoords,
        branch_sets: Vec<BranchPointSet>,
        forks: ForkSchedule,
        max_generations: usize,
    ) -> Result<Self, TreeError> {
        let axes = coords.dim() - 1;
        if branch_sets.len() > axes {
            return Err(TreeError::TooManyBranchSets {
                sets: branch_sets.len(),
                dim: coords.dim(),
            });
        }
        if max_generations == 0 {
            return Err(TreeError::NoGenerations);
        }
        let mut branch_sets = branch_sets;
        branch_sets.resize(axes, BranchPointSet::empty());
        let grid = coords.grid();
        for set in &branch_sets {
            for &s in set.points() {
                if grid.nearest_index(s).is_none() || !grid.contains(s) {
                    return Err(TreeError::BranchOutOfDomain { s });
                }
            }
        }

        // a fork on the closing sample would spawn empty edges
        let last = grid.last_index();
        let mut idx: Vec<usize> = branch_sets
            .iter()
            .flat_map(|b| b.indices(grid))
            .filter(|k| *k < last)
            .collect();
        idx.sort_unstable();
        idx.dedup();
        let events = idx
            .into_iter()
            .map(|index| ForkEvent {
                index,
                axes: branch_sets
                    .iter()
                    .enumerate()
                    .filter(|(_, b)| b.indices(grid).contains(&index))
                    .map(|(d, _)| d)
                    .collect(),
            })
            .collect();

        Ok(Self {
            coords,
            branch_sets,
            forks,
            max_generations,
            events,
        })
    }

    /// A spec without branch points: evaluates to the plain path.
    pub fn path(coords: DerivativeCoords) -> Self {
        let axes = coords.dim() - 1;
        Self {
            coords,
            branch_sets: vec![BranchPointSet::empty(); axes],
            forks: ForkSchedule::binary(),
            max_generations: 1,
            events: Vec::new(),
        }
    }

    pub fn coords(&self) -> &DerivativeCoords {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.dim()
    }

    pub fn branch_sets(&self) -> &[BranchPointSet] {
        &self.branch_sets
    }

    pub fn forks(&self) -> &ForkSchedule {
        &self.forks
    }

    pub fn max_generations(&self) -> usize {
        self.max_generations
    }

    pub fn events(&self) -> &[ForkEvent] {
        &self.events
    }

    pub fn is_tree(&self) -> bool {
        !self.events.is_empty()
    }

    /// True when the path runs unforked from `s_min` to the first event.
    pub fn has_trunk(&self) -> bool {
        self.events.first().is_some_and(|e| e.index > 0)
    }

    /// All branch points of every axis, sorted and deduplicated.
    pub fn all_branch_points(&self) -> Vec<f64> {
        let grid = self.coords.grid();
        self.events.iter().map(|e| grid.s_at(e.index)).collect()
    }

    pub fn with_max_generations(&self, max_generations: usize) -> Result<Self, TreeError> {
        Self::new(
            self.coords.clone(),
            self.branch_sets.clone(),
            self.forks.clone(),
            max_generations,
        )
    }

    pub fn with_coords(&self, coords: DerivativeCoords) -> Result<Self, TreeError> {
        Self::new(
            coords,
            self.branch_sets.clone(),
            self.forks.clone(),
            self.max_generations,
        )
    }

    /// Resamples onto a new step, keeping the integrals of every rate over
    /// each interval between branch points.
    pub fn resample(&self, new_delta_s: f64) -> Result<Self, TreeError> {
        let coords = resample_with_breaks(&self.coords, new_delta_s, &self.all_branch_points())?;
        let grid = *coords.grid();
        let sets = self
            .branch_sets
            .iter()
            .map(|b| BranchPointSet::new(b.points(), &grid))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(coords, sets, self.forks.clone(), self.max_generations)
    }

    /// Number of fork events the evaluator performs.
    pub fn performed_forks(&self) -> usize {
        self.events.len().min(self.max_generations)
    }

    /// Nodes (one per edge) an evaluation produces.
    pub fn node_count(&self) -> u128 {
        let mut total: u128 = u128::from(self.has_trunk() || !self.is_tree());
        let mut width: u128 = 1;
        for j in 0..self.performed_forks() {
            width = width.saturating_mul(self.forks.arity_at(j) as u128);
            total = total.saturating_add(width);
        }
        total
    }

    /// Grid samples stored over all edges of an evaluation.
    pub fn sample_count(&self) -> u128 {
        let last = self.coords.grid().last_index();
        let span = |from: usize, to: usize| (to - from + 1) as u128;
        let mut total: u128 = 0;
        if self.events.is_empty() || self.has_trunk() {
            total = span(0, self.events.first().map_or(last, |e| e.index));
        }
        let mut width: u128 = 1;
        for j in 0..self.performed_forks() {
            width = width.saturating_mul(self.forks.arity_at(j) as u128);
            let to = self.events.get(j + 1).map_or(last, |e| e.index);
            total = total.saturating_add(width.saturating_mul(span(self.events[j].index, to)));
        }
        total
    }
}
