//! Derivative coordinates and their integration into paths.
//!
//! A path is described by a radial rate `dr(s) >= 0` and one angular rate per
//! angle of the (hyper)spherical chain. Integration is a left-endpoint Riemann
//! sum: on every cell the heading is advanced first, then the position moves
//! `dr * ds` along the new heading. The scheme is first order in `ds`.

use std::f64::consts::PI;

use thiserror::Error;

use crate::expr::{EvalError, Expr, SampleScope, Scope};
use crate::grid::{GridError, SGrid};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurveError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("derivative coordinates need at least one angular function")]
    NoAngular,
    #[error("expected {expected} samples, got {got}")]
    SampleCount { expected: usize, got: usize },
    #[error("non-finite value at sample {index} (s = {s})")]
    NonFinite { index: usize, s: f64 },
    #[error("radial derivative must be non-negative, got {value} at s = {s}")]
    NegativeRadial { index: usize, s: f64, value: f64 },
    #[error("evaluating expression at s = {s}: {source}")]
    Eval { s: f64, source: EvalError },
    #[error("zero-velocity step between samples {index} and {}", index + 1)]
    DegenerateStep { index: usize },
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
    #[error("range [{s1}, {s2}] is outside the grid or reversed")]
    OutOfRange { s1: f64, s2: f64 },
    #[error("csv: {0}")]
    Csv(String),
}

/// A scalar function of `s` attached to a grid.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarFn {
    Constant(f64),
    /// One value per grid sample.
    Sampled(Vec<f64>),
    /// Closed form in `s`; evaluated on demand.
    Expr(Expr),
    /// Two functions laid end to end. Grid indices at or past `split` are
    /// forwarded to `second` with the index and `s` shifted back into its
    /// own domain.
    Sequence {
        split: usize,
        shift: f64,
        first: Box<ScalarFn>,
        second: Box<ScalarFn>,
    },
}

struct ShiftedScope<'a> {
    inner: &'a dyn Scope,
    s: f64,
}

impl Scope for ShiftedScope<'_> {
    fn lookup(&self, name: &str) -> Option<f64> {
        if name == "s" {
            Some(self.s)
        } else {
            self.inner.lookup(name)
        }
    }

    fn at_branch(&self) -> Option<bool> {
        self.inner.at_branch()
    }
}

impl ScalarFn {
    /// Samples a closure on every grid point.
    pub fn from_fn(grid: &SGrid, f: impl Fn(f64) -> f64) -> Self {
        ScalarFn::Sampled(grid.samples().map(f).collect())
    }

    /// Value at grid index `k`. `scope` must resolve `s` to `s_k`.
    pub fn value_at(&self, k: usize, scope: &dyn Scope) -> Result<f64, EvalError> {
        match self {
            ScalarFn::Constant(v) => Ok(*v),
            ScalarFn::Sampled(v) => Ok(v.get(k).copied().unwrap_or(f64::NAN)),
            ScalarFn::Expr(e) => e.eval(scope),
            ScalarFn::Sequence {
                split,
                shift,
                first,
                second,
            } => {
                if k < *split {
                    first.value_at(k, scope)
                } else {
                    let s = scope.lookup("s").unwrap_or(f64::NAN) - shift;
                    second.value_at(k - split, &ShiftedScope { inner: scope, s })
                }
            }
        }
    }

    /// True when the function needs names beyond `s`, `ds` and `pi`.
    pub fn has_free_names(&self) -> bool {
        match self {
            ScalarFn::Constant(_) | ScalarFn::Sampled(_) => false,
            ScalarFn::Expr(e) => e
                .idents()
                .iter()
                .any(|n| !crate::expr::BUILTIN_NAMES.contains(&n.as_str())),
            ScalarFn::Sequence { first, second, .. } => first.has_free_names() || second.has_free_names(),
        }
    }

    /// Materializes the function on `grid`.
    pub fn sample(&self, grid: &SGrid) -> Result<Vec<f64>, CurveError> {
        if let ScalarFn::Sampled(v) = self {
            if v.len() != grid.count() {
                return Err(CurveError::SampleCount {
                    expected: grid.count(),
                    got: v.len(),
                });
            }
        }
        let mut out = Vec::with_capacity(grid.count());
        for k in 0..grid.count() {
            let s = grid.s_at(k);
            let scope = SampleScope {
                s,
                ds: grid.delta_s(),
                at_branch: None,
                vars: None,
            };
            let v = self
                .value_at(k, &scope)
                .map_err(|source| CurveError::Eval { s, source })?;
            if !v.is_finite() {
                return Err(CurveError::NonFinite { index: k, s });
            }
            out.push(v);
        }
        Ok(out)
    }
}

/// Radial and angular rates on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeCoords {
    grid: SGrid,
    radial: ScalarFn,
    angular: Vec<ScalarFn>,
    radial_samples: Vec<f64>,
    angular_samples: Vec<Vec<f64>>,
}

impl DerivativeCoords {
    pub fn new(grid: SGrid, radial: ScalarFn, angular: Vec<ScalarFn>) -> Result<Self, CurveError> {
        if angular.is_empty() {
            return Err(CurveError::NoAngular);
        }
        let radial_samples = radial.sample(&grid)?;
        if let Some((index, &value)) = radial_samples.iter().enumerate().find(|(_, v)| **v < 0.0) {
            return Err(CurveError::NegativeRadial {
                index,
                s: grid.s_at(index),
                value,
            });
        }
        let angular_samples = angular.iter().map(|f| f.sample(&grid)).collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            grid,
            radial,
            angular,
            radial_samples,
            angular_samples,
        })
    }

    pub fn from_samples(grid: SGrid, radial: Vec<f64>, angular: Vec<Vec<f64>>) -> Result<Self, CurveError> {
        Self::new(
            grid,
            ScalarFn::Sampled(radial),
            angular.into_iter().map(ScalarFn::Sampled).collect(),
        )
    }

    /// Constant rates, mostly for tests and fixtures.
    pub fn constant(grid: SGrid, radial: f64, angular: &[f64]) -> Result<Self, CurveError> {
        Self::new(
            grid,
            ScalarFn::Constant(radial),
            angular.iter().map(|a| ScalarFn::Constant(*a)).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.angular.len() + 1
    }

    pub fn grid(&self) -> &SGrid {
        &self.grid
    }

    pub fn radial(&self) -> &ScalarFn {
        &self.radial
    }

    pub fn angular(&self) -> &[ScalarFn] {
        &self.angular
    }

    pub fn radial_samples(&self) -> &[f64] {
        &self.radial_samples
    }

    pub fn angular_samples(&self, axis: usize) -> &[f64] {
        &self.angular_samples[axis]
    }

    pub fn all_angular_samples(&self) -> &[Vec<f64>] {
        &self.angular_samples
    }

    /// Copy with every angular rate replaced by its sampled values and the
    /// radial rate multiplied by `scale`.
    pub fn scaled_radial(&self, scale: f64) -> Result<Self, CurveError> {
        Self::from_samples(
            self.grid,
            self.radial_samples.iter().map(|v| v * scale).collect(),
            self.angular_samples.clone(),
        )
    }
}

/// Position plus accumulated heading angles.
#[derive(Debug, Clone, PartialEq)]
pub struct Pose {
    pub position: Vec<f64>,
    /// Azimuth first, then the polar angles of the hyperspherical chain.
    pub heading: Vec<f64>,
}

impl Pose {
    pub fn new(position: Vec<f64>, heading: Vec<f64>) -> Self {
        debug_assert_eq!(position.len(), heading.len() + 1);
        Self { position, heading }
    }

    /// Origin, with polar angles at `pi/2` so that 3D and higher start in the
    /// x-y plane.
    pub fn origin(dim: usize) -> Self {
        let mut heading = vec![PI / 2.0; dim - 1];
        heading[0] = 0.0;
        Self {
            position: vec![0.0; dim],
            heading,
        }
    }

    pub fn dim(&self) -> usize {
        self.position.len()
    }

    fn is_finite(&self) -> bool {
        self.position.iter().chain(&self.heading).all(|v| v.is_finite())
    }
}

/// Sampled path produced by integration.
#[derive(Debug, Clone, PartialEq)]
pub struct PathPolyline {
    pub points: Vec<Vec<f64>>,
    pub headings: Vec<Vec<f64>>,
    /// Running arc length; carries on from the start value passed in.
    pub cum_arc: Vec<f64>,
    pub grid: SGrid,
}

impl PathPolyline {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn end_pose(&self) -> Pose {
        Pose {
            position: self.points.last().cloned().unwrap_or_default(),
            heading: self.headings.last().cloned().unwrap_or_default(),
        }
    }
}

/// Unit direction for a heading: `(cos a, sin a)` in 2D, the spherical form
/// `(cos a sin p, sin a sin p, cos p)` in 3D, and the product-of-sines chain
/// beyond.
pub fn direction(heading: &[f64], out: &mut [f64]) {
    let n = heading.len() + 1;
    debug_assert_eq!(out.len(), n);
    let mut scale = 1.0;
    for k in (1..n - 1).rev() {
        let (sin, cos) = heading[k].sin_cos();
        out[k + 1] = scale * cos;
        scale *= sin;
    }
    let (sin, cos) = heading[0].sin_cos();
    out[0] = scale * cos;
    out[1] = scale * sin;
}

/// Heading feedback evaluated before every step; the return value is added
/// to the azimuthal rate.
pub trait HeadingFeedback {
    fn azimuth_adjustment(&self, position: &[f64], heading: &[f64]) -> f64;
}

/// Integrates samples `from..to` (cells) of `coords`, producing points for
/// samples `from..=to`. `multipliers` scales each angular rate.
pub(crate) fn integrate_span(
    coords: &DerivativeCoords,
    from: usize,
    to: usize,
    multipliers: &[f64],
    start: &Pose,
    arc0: f64,
    feedback: Option<&dyn HeadingFeedback>,
) -> Result<PathPolyline, CurveError> {
    let dim = coords.dim();
    let grid = coords.grid();
    let ds = grid.delta_s();
    let radial = coords.radial_samples();
    let angular = coords.all_angular_samples();

    let n = to - from + 1;
    let mut points = Vec::with_capacity(n);
    let mut headings = Vec::with_capacity(n);
    let mut cum_arc = Vec::with_capacity(n);

    let mut pos = start.position.clone();
    let mut heading = start.heading.clone();
    let mut arc = arc0;
    let mut dir = vec![0.0; dim];
    points.push(pos.clone());
    headings.push(heading.clone());
    cum_arc.push(arc);

    for k in from..to {
        let adjust = feedback.map_or(0.0, |f| f.azimuth_adjustment(&pos, &heading));
        for (a, h) in heading.iter_mut().enumerate() {
            *h += multipliers[a] * angular[a][k] * ds;
        }
        heading[0] += adjust * ds;
        direction(&heading, &mut dir);
        let step = radial[k] * ds;
        for (p, d) in pos.iter_mut().zip(&dir) {
            *p += step * d;
        }
        arc += step;
        if !arc.is_finite() || pos.iter().chain(&heading).any(|v| !v.is_finite()) {
            return Err(CurveError::NonFinite {
                index: k,
                s: grid.s_at(k),
            });
        }
        points.push(pos.clone());
        headings.push(heading.clone());
        cum_arc.push(arc);
    }

    Ok(PathPolyline {
        points,
        headings,
        cum_arc,
        grid: grid.slice(from, to),
    })
}

fn check_start(coords: &DerivativeCoords, start: &Pose) -> Result<(), CurveError> {
    if start.dim() != coords.dim() || start.heading.len() != coords.dim() - 1 {
        return Err(CurveError::DimensionMismatch {
            expected: coords.dim(),
            got: start.dim(),
        });
    }
    if !start.is_finite() {
        return Err(CurveError::NonFinite {
            index: 0,
            s: coords.grid().s_min(),
        });
    }
    Ok(())
}

/// Integrates derivative coordinates into a polyline starting at `start`.
pub fn integrate_path(coords: &DerivativeCoords, start: &Pose) -> Result<PathPolyline, CurveError> {
    check_start(coords, start)?;
    let ones = vec![1.0; coords.dim() - 1];
    integrate_span(coords, 0, coords.grid().last_index(), &ones, start, 0.0, None)
}

fn wrap_pi(a: f64) -> f64 {
    let mut a = (a + PI).rem_euclid(2.0 * PI) - PI;
    if a == -PI {
        a = PI;
    }
    a
}

/// Recovers derivative coordinates from Cartesian samples, together with the
/// start pose under which [`integrate_path`] reproduces the samples.
///
/// Rates are taken from forward differences; the tangent azimuth is unwrapped
/// so neighbouring samples never differ by a full turn.
pub fn derive_path(samples: &[Vec<f64>], grid: &SGrid, dim: usize) -> Result<(DerivativeCoords, Pose), CurveError> {
    if dim != 2 && dim != 3 {
        return Err(CurveError::UnsupportedDimension(dim));
    }
    if samples.len() != grid.count() {
        return Err(CurveError::SampleCount {
            expected: grid.count(),
            got: samples.len(),
        });
    }
    if let Some(p) = samples.iter().find(|p| p.len() != dim) {
        return Err(CurveError::DimensionMismatch {
            expected: dim,
            got: p.len(),
        });
    }
    let n = grid.count();
    let ds = grid.delta_s();
    let steps = n - 1;
    let mut radial = Vec::with_capacity(n);
    let mut angles: Vec<Vec<f64>> = vec![Vec::with_capacity(steps); dim - 1];

    for k in 0..steps {
        let d: Vec<f64> = samples[k + 1]
            .iter()
            .zip(&samples[k])
            .map(|(b, a)| (b - a) / ds)
            .collect();
        if d.iter().any(|v| !v.is_finite()) {
            return Err(CurveError::NonFinite {
                index: k,
                s: grid.s_at(k),
            });
        }
        let speed = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        if speed == 0.0 {
            return Err(CurveError::DegenerateStep { index: k });
        }
        radial.push(speed);

        let planar = d[0].hypot(d[1]);
        let raw_azimuth = if planar > 0.0 { d[1].atan2(d[0]) } else { f64::NAN };
        let azimuth = match angles[0].last() {
            // undefined azimuth at a pole keeps the previous value
            Some(&prev) if raw_azimuth.is_nan() => prev,
            Some(&prev) => prev + wrap_pi(raw_azimuth - prev),
            None if raw_azimuth.is_nan() => 0.0,
            None => raw_azimuth,
        };
        angles[0].push(azimuth);
        if dim == 3 {
            angles[1].push((d[2] / speed).clamp(-1.0, 1.0).acos());
        }
    }

    let mut angular = Vec::with_capacity(dim - 1);
    let mut heading0 = Vec::with_capacity(dim - 1);
    for theta in &angles {
        let mut rate = vec![0.0; n];
        for k in 1..steps {
            rate[k] = (theta[k] - theta[k - 1]) / ds;
        }
        if steps > 1 {
            rate[0] = rate[1];
        }
        rate[n - 1] = rate[n - 2];
        heading0.push(theta[0] - rate[0] * ds);
        angular.push(rate);
    }
    radial.push(radial[steps - 1]);

    let coords = DerivativeCoords::from_samples(*grid, radial, angular)?;
    Ok((coords, Pose::new(samples[0].clone(), heading0)))
}

/// Recovers derivative coordinates from Cartesian samples (2D or 3D).
pub fn derive_coords(samples: &[Vec<f64>], grid: &SGrid, dim: usize) -> Result<DerivativeCoords, CurveError> {
    derive_path(samples, grid, dim).map(|(c, _)| c)
}

fn index_range(grid: &SGrid, s1: f64, s2: f64) -> Result<(usize, usize), CurveError> {
    let out = CurveError::OutOfRange { s1, s2 };
    if !(s1 <= s2) || !grid.contains(s1) || !grid.contains(s2) {
        return Err(out);
    }
    let i1 = grid.nearest_index(s1).ok_or(out.clone())?;
    let i2 = grid.nearest_index(s2).ok_or(out)?;
    Ok((i1, i2))
}

/// Length of the path between `s1` and `s2`: the Riemann sum of `dr`.
pub fn arc_length(coords: &DerivativeCoords, s1: f64, s2: f64) -> Result<f64, CurveError> {
    let (i1, i2) = index_range(coords.grid(), s1, s2)?;
    let ds = coords.grid().delta_s();
    Ok(coords.radial_samples()[i1..i2].iter().map(|v| v * ds).sum())
}

/// Riemann sum of one angular rate between `s1` and `s2`.
pub fn angular_integral(coords: &DerivativeCoords, axis: usize, s1: f64, s2: f64) -> Result<f64, CurveError> {
    if axis >= coords.dim() - 1 {
        return Err(CurveError::DimensionMismatch {
            expected: coords.dim() - 1,
            got: axis + 1,
        });
    }
    let (i1, i2) = index_range(coords.grid(), s1, s2)?;
    let ds = coords.grid().delta_s();
    Ok(coords.angular_samples(axis)[i1..i2].iter().map(|v| v * ds).sum())
}

/// Angle between the tangents at `s1` and `s2` of a planar path.
pub fn turn_angle(coords: &DerivativeCoords, s1: f64, s2: f64) -> Result<f64, CurveError> {
    if coords.dim() != 2 {
        return Err(CurveError::UnsupportedDimension(coords.dim()));
    }
    angular_integral(coords, 0, s1, s2)
}

/// Resamples onto a grid with step `new_delta_s`, keeping the integral of
/// every rate over the whole domain.
pub fn resample(coords: &DerivativeCoords, new_delta_s: f64) -> Result<DerivativeCoords, CurveError> {
    resample_with_breaks(coords, new_delta_s, &[])
}

/// Resamples onto a new step, keeping the integral of every rate over each
/// interval delimited by `breaks` (typically the branch points).
///
/// Isolated single-sample values are treated as impulses: their mass moves to
/// the nearest new sample instead of being interpolated away.
pub fn resample_with_breaks(
    coords: &DerivativeCoords,
    new_delta_s: f64,
    breaks: &[f64],
) -> Result<DerivativeCoords, CurveError> {
    let old = *coords.grid();
    let new = SGrid::new(old.s_min(), old.s_max(), new_delta_s)?;

    let mut bounds_old = vec![0usize];
    let mut bounds_new = vec![0usize];
    for &b in breaks {
        let (Some(io), Some(jn)) = (old.nearest_index(b), new.nearest_index(b)) else {
            return Err(CurveError::OutOfRange { s1: b, s2: b });
        };
        if io > *bounds_old.last().unwrap() && io < old.last_index() && jn > *bounds_new.last().unwrap() {
            bounds_old.push(io);
            bounds_new.push(jn);
        }
    }
    bounds_old.push(old.last_index());
    bounds_new.push(new.last_index());

    let radial = resample_values(coords.radial_samples(), &old, &new, &bounds_old, &bounds_new);
    let angular = coords
        .all_angular_samples()
        .iter()
        .map(|v| resample_values(v, &old, &new, &bounds_old, &bounds_new))
        .collect();
    DerivativeCoords::from_samples(new, radial, angular)
}

fn resample_values(values: &[f64], old: &SGrid, new: &SGrid, bounds_old: &[usize], bounds_new: &[usize]) -> Vec<f64> {
    let n_old = values.len();
    let is_impulse =
        |k: usize| values[k] != 0.0 && (k == 0 || values[k - 1] == 0.0) && (k + 1 == n_old || values[k + 1] == 0.0);
    let smooth: Vec<f64> = (0..n_old)
        .map(|k| if is_impulse(k) { 0.0 } else { values[k] })
        .collect();

    let mut out = vec![0.0; new.count()];
    for w in 0..bounds_old.len() - 1 {
        let (oa, ob) = (bounds_old[w], bounds_old[w + 1]);
        let (na, nb) = (bounds_new[w], bounds_new[w + 1]);
        if ob == oa || nb == na {
            continue;
        }
        // interpolate inside the interval's own cells only
        let last_cell = ob - 1;
        for (j, slot) in out.iter_mut().enumerate().take(nb).skip(na) {
            let x = (new.s_at(j) - old.s_min()) / old.delta_s();
            let x = x.clamp(oa as f64, last_cell as f64);
            let k = (x.floor() as usize).min(last_cell);
            let t = x - k as f64;
            *slot = if k < last_cell {
                smooth[k] * (1.0 - t) + smooth[k + 1] * t
            } else {
                smooth[k]
            };
        }
        let old_int: f64 = smooth[oa..ob].iter().sum::<f64>() * old.delta_s();
        let new_int: f64 = out[na..nb].iter().sum::<f64>() * new.delta_s();
        let cells = &mut out[na..nb];
        let same_sign = cells.iter().all(|v| *v >= 0.0) || cells.iter().all(|v| *v <= 0.0);
        let magnitude: f64 = cells.iter().map(|v| v.abs()).sum::<f64>() * new.delta_s();
        if same_sign && new_int.abs() > 1e-12 * magnitude.max(f64::MIN_POSITIVE) && new_int != 0.0 {
            let ratio = old_int / new_int;
            cells.iter_mut().for_each(|v| *v *= ratio);
        } else {
            let fix = (old_int - new_int) / ((nb - na) as f64 * new.delta_s());
            cells.iter_mut().for_each(|v| *v += fix);
        }
    }
    // closing sample carries no cell; repeat its neighbour for continuity
    let last = new.last_index();
    out[last] = out[last - 1];

    for k in (0..n_old).filter(|&k| is_impulse(k)) {
        if k == n_old - 1 {
            // the closing sample never contributes to a sum
            continue;
        }
        let mass = values[k] * old.delta_s();
        let j = new.nearest_index(old.s_at(k)).unwrap_or(0).min(new.last_index() - 1);
        out[j] += mass / new.delta_s();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(s_max: f64, ds: f64) -> SGrid {
        SGrid::new(0.0, s_max, ds).unwrap()
    }

    #[test]
    fn direction_chain_is_unit_and_matches_spherical_form() {
        let mut d2 = [0.0; 2];
        direction(&[0.3], &mut d2);
        assert!((d2[0] - 0.3f64.cos()).abs() < 1e-15 && (d2[1] - 0.3f64.sin()).abs() < 1e-15);

        let (phi, psi) = (0.7, 1.1);
        let mut d3 = [0.0; 3];
        direction(&[phi, psi], &mut d3);
        let expect = [phi.cos() * psi.sin(), phi.sin() * psi.sin(), psi.cos()];
        for (a, b) in d3.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }

        let mut d5 = [0.0; 5];
        direction(&[0.2, 0.9, 1.7, 2.4], &mut d5);
        let norm: f64 = d5.iter().map(|v| v * v).sum();
        assert!((norm - 1.0).abs() < 1e-14);
    }

    #[test]
    fn straight_line() {
        let c = DerivativeCoords::constant(grid(2.0, 1e-4), 1.0, &[0.0]).unwrap();
        let p = integrate_path(&c, &Pose::origin(2)).unwrap();
        let end = p.points.last().unwrap();
        assert!((end[0] - 2.0).abs() < 1e-9 && end[1].abs() < 1e-12);
        assert!((p.cum_arc.last().unwrap() - 2.0).abs() < 1e-9);
        assert_eq!(p.points.len(), p.grid.count());
    }

    #[test]
    fn circle_3d_reduces_to_planar() {
        let g = grid(2.0, 1e-3);
        let c2 = DerivativeCoords::constant(g, 1.0, &[PI / 2.0]).unwrap();
        let c3 = DerivativeCoords::constant(g, 1.0, &[PI / 2.0, 0.0]).unwrap();
        let p2 = integrate_path(&c2, &Pose::origin(2)).unwrap();
        let p3 = integrate_path(&c3, &Pose::new(vec![0.0; 3], vec![0.0, PI / 2.0])).unwrap();
        for (a, b) in p2.points.iter().zip(&p3.points) {
            assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
            assert!(b[2].abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch() {
        let c = DerivativeCoords::constant(grid(1.0, 0.1), 1.0, &[0.0]).unwrap();
        assert!(matches!(
            integrate_path(&c, &Pose::origin(3)),
            Err(CurveError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn non_finite_sample_reports_index() {
        let g = grid(1.0, 0.25);
        let err = DerivativeCoords::from_samples(g, vec![1.0, 1.0, f64::NAN, 1.0, 1.0], vec![vec![0.0; 5]]);
        assert_eq!(err.unwrap_err(), CurveError::NonFinite { index: 2, s: 0.5 });
    }

    #[test]
    fn negative_radial_rejected() {
        let err = DerivativeCoords::constant(grid(1.0, 0.5), -1.0, &[0.0]).unwrap_err();
        assert!(matches!(err, CurveError::NegativeRadial { index: 0, .. }));
    }

    #[test]
    fn derive_straight_line_and_circle() {
        let g = grid(1.0, 1e-3);
        let line: Vec<Vec<f64>> = g.samples().map(|s| vec![s, 0.0]).collect();
        let c = derive_coords(&line, &g, 2).unwrap();
        assert!(c.radial_samples().iter().all(|v| (v - 1.0).abs() < 1e-9));
        assert!(c.angular_samples(0).iter().all(|v| v.abs() < 1e-9));

        let circle: Vec<Vec<f64>> = g.samples().map(|s| vec![s.cos(), s.sin()]).collect();
        let c = derive_coords(&circle, &g, 2).unwrap();
        assert!(c.radial_samples().iter().all(|v| (v - 1.0).abs() < 1e-6));
        assert!(c.angular_samples(0).iter().all(|v| (v - 1.0).abs() < 1e-6));
    }

    #[test]
    fn derive_unwraps_angles() {
        // several laps of a circle: the azimuth keeps increasing
        let g = grid(20.0, 1e-2);
        let circle: Vec<Vec<f64>> = g.samples().map(|s| vec![s.cos(), s.sin()]).collect();
        let c = derive_coords(&circle, &g, 2).unwrap();
        assert!(c.angular_samples(0).iter().all(|v| (v - 1.0).abs() < 1e-4));
    }

    #[test]
    fn derive_rejects_zero_velocity() {
        let g = grid(0.3, 0.1);
        let pts = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0]];
        assert_eq!(
            derive_coords(&pts, &g, 2).unwrap_err(),
            CurveError::DegenerateStep { index: 1 }
        );
        assert_eq!(
            derive_coords(&pts, &g, 4).unwrap_err(),
            CurveError::UnsupportedDimension(4)
        );
    }

    #[test]
    fn arc_length_and_turn_angle() {
        let c = DerivativeCoords::constant(grid(2.0, 1e-3), 1.0, &[PI / 2.0]).unwrap();
        assert!((arc_length(&c, 0.0, 2.0).unwrap() - 2.0).abs() < 1e-9);
        assert_eq!(arc_length(&c, 0.7, 0.7).unwrap(), 0.0);
        assert!((turn_angle(&c, 0.0, 2.0).unwrap() - PI).abs() < 1e-9);
        assert_eq!(turn_angle(&c, 1.0, 1.0).unwrap(), 0.0);
        assert!(arc_length(&c, 1.5, 1.0).is_err());
        assert!(arc_length(&c, 0.0, 2.5).is_err());
    }

    #[test]
    fn resample_constant_and_impulse() {
        let g = grid(2.0, 0.1);
        let c = DerivativeCoords::constant(g, 1.0, &[0.5]).unwrap();
        let r = resample(&c, 0.05).unwrap();
        assert_eq!(r.grid().count(), 41);
        assert!(r.angular_samples(0).iter().all(|v| (v - 0.5).abs() < 1e-12));
        let before = angular_integral(&c, 0, 0.0, 2.0).unwrap();
        let after = angular_integral(&r, 0, 0.0, 2.0).unwrap();
        assert!((before - after).abs() < 1e-12);

        let phi = PI / 3.0;
        let mut ang = vec![0.0; g.count()];
        ang[10] = phi / 0.1;
        let c = DerivativeCoords::from_samples(g, vec![1.0; g.count()], vec![ang]).unwrap();
        let r = resample(&c, 0.05).unwrap();
        let a = r.angular_samples(0);
        assert!((a[20] - 2.0 * phi / 0.1).abs() < 1e-9);
        assert_eq!(a.iter().filter(|v| **v != 0.0).count(), 1);
        assert!((angular_integral(&r, 0, 0.0, 2.0).unwrap() - phi).abs() < 1e-12);
    }

    #[test]
    fn resample_needs_two_points() {
        let c = DerivativeCoords::constant(grid(1.0, 0.1), 1.0, &[0.0]).unwrap();
        assert!(matches!(resample(&c, 5.0), Err(CurveError::Grid(_))));
    }
}
