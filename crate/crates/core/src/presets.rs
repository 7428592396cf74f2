//! Ready-made trees: the smooth and straight-line `pi/3`, `2/3` fractals.
//!
//! Both have unit branch intervals in `s`, a first branch of length 1 and
//! each later branch `2/3` as long, a total turn of `pi/3` per branch and a
//! root pointing up.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};

use crate::curve::{DerivativeCoords, Pose};
use crate::grid::SGrid;
use crate::tree::{BranchPointSet, ForkSchedule, TreeError, TreeSpec};

pub const RATIO: f64 = 2.0 / 3.0;
pub const TURN: f64 = FRAC_PI_3;

/// Start pose used by the presets: origin, heading straight up.
pub fn upright() -> Pose {
    Pose::new(vec![0.0, 0.0], vec![FRAC_PI_2])
}

fn grid_and_branches(ds: f64, generations: usize) -> Result<(SGrid, BranchPointSet, usize), TreeError> {
    let grid = SGrid::new(0.0, generations as f64, ds)?;
    let per = (1.0 / ds).round() as usize;
    let branches = BranchPointSet::every(&grid, 1.0, 0.0)?;
    Ok((grid, branches, per))
}

/// Smooth branches: constant turn rate and `dr = c (2/3)^s`, with `c`
/// chosen so the first branch sums to exactly 1.
pub fn smooth(ds: f64, generations: usize) -> Result<TreeSpec, TreeError> {
    let (grid, branches, per) = grid_and_branches(ds, generations)?;
    let first: f64 = (0..per).map(|k| RATIO.powf(grid.s_at(k))).sum::<f64>() * ds;
    let dr: Vec<f64> = grid.samples().map(|s| RATIO.powf(s) / first).collect();
    let dphi = vec![TURN; grid.count()];
    let coords = DerivativeCoords::from_samples(grid, dr, vec![dphi])?;
    TreeSpec::new(coords, vec![branches], ForkSchedule::binary(), generations)
}

/// Straight branches: the whole turn is an impulse on the branch sample and
/// `dr` is constant within each branch.
pub fn straight(ds: f64, generations: usize) -> Result<TreeSpec, TreeError> {
    let (grid, branches, per) = grid_and_branches(ds, generations)?;
    let cell = per as f64 * ds;
    let dr: Vec<f64> = (0..grid.count()).map(|k| RATIO.powi((k / per) as i32) / cell).collect();
    let dphi: Vec<f64> = (0..grid.count())
        .map(|k| if k % per == 0 { TURN / ds } else { 0.0 })
        .collect();
    let coords = DerivativeCoords::from_samples(grid, dr, vec![dphi])?;
    TreeSpec::new(coords, vec![branches], ForkSchedule::binary(), generations)
}
