//! Classical transform-stack evaluation: every step composes homogeneous
//! translate/rotate matrices instead of accumulating angles. Used as an
//! independent check on [`evaluate_tree`](super::evaluate_tree) and as the
//! benchmark baseline.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Matrix4, Rotation2, Rotation3, Translation2, Translation3, Vector3};

use super::eval::{check_start, evaluate_with, EvalOptions, EvaluatedTree, SegmentIntegrator};
use super::spec::TreeSpec;
use super::TreeError;
use crate::curve::{DerivativeCoords, PathPolyline, Pose};

fn unwrap_to(prev: f64, raw: f64) -> f64 {
    let d = (raw - prev + PI).rem_euclid(2.0 * PI) - PI;
    prev + d
}

struct TransformStack;

impl TransformStack {
    fn planar(coords: &DerivativeCoords, from: usize, to: usize, mult: f64, start: &Pose, arc0: f64) -> PathPolyline {
        let ds = coords.grid().delta_s();
        let radial = coords.radial_samples();
        let angular = coords.angular_samples(0);
        let (x, y) = (start.position[0], start.position[1]);
        let mut m: Matrix3<f64> =
            Translation2::new(x, y).to_homogeneous() * Rotation2::new(start.heading[0]).to_homogeneous();
        let mut heading = start.heading[0];
        let mut line = begin(start, arc0, coords, from, to);
        let mut arc = arc0;
        for k in from..to {
            let p = m.fixed_view::<2, 1>(0, 2).into_owned();
            let turn = Translation2::new(p.x, p.y).to_homogeneous()
                * Rotation2::new(mult * angular[k] * ds).to_homogeneous()
                * Translation2::new(-p.x, -p.y).to_homogeneous();
            let step = radial[k] * ds;
            m = turn * m * Translation2::new(step, 0.0).to_homogeneous();
            heading = unwrap_to(heading, m[(1, 0)].atan2(m[(0, 0)]));
            arc += step;
            line.points.push(vec![m[(0, 2)], m[(1, 2)]]);
            line.headings.push(vec![heading]);
            line.cum_arc.push(arc);
        }
        line
    }

    fn spatial(
        coords: &DerivativeCoords,
        from: usize,
        to: usize,
        mult: &[f64],
        start: &Pose,
        arc0: f64,
    ) -> PathPolyline {
        let ds = coords.grid().delta_s();
        let radial = coords.radial_samples();
        let (dphi, dpsi) = (coords.angular_samples(0), coords.angular_samples(1));
        let p0 = &start.position;
        // M = T(p) Rz(azimuth) Ry(polar); the local z axis is the tangent
        let mut m: Matrix4<f64> = Translation3::new(p0[0], p0[1], p0[2]).to_homogeneous()
            * Rotation3::from_axis_angle(&Vector3::z_axis(), start.heading[0]).to_homogeneous()
            * Rotation3::from_axis_angle(&Vector3::y_axis(), start.heading[1]).to_homogeneous();
        let (mut phi, mut psi) = (start.heading[0], start.heading[1]);
        let mut line = begin(start, arc0, coords, from, to);
        let mut arc = arc0;
        for k in from..to {
            let p = m.fixed_view::<3, 1>(0, 3).into_owned();
            let to_origin = Translation3::new(-p.x, -p.y, -p.z).to_homogeneous();
            let back = Translation3::new(p.x, p.y, p.z).to_homogeneous();
            let yaw = Rotation3::from_axis_angle(&Vector3::z_axis(), mult[0] * dphi[k] * ds).to_homogeneous();
            let pitch = Rotation3::from_axis_angle(&Vector3::y_axis(), mult[1] * dpsi[k] * ds).to_homogeneous();
            let step = radial[k] * ds;
            m = back * yaw * to_origin * m * pitch * Translation3::new(0.0, 0.0, step).to_homogeneous();

            let raw_phi = (-m[(0, 1)]).atan2(m[(1, 1)]);
            let (s, c) = raw_phi.sin_cos();
            let raw_psi = (c * m[(0, 2)] + s * m[(1, 2)]).atan2(m[(2, 2)]);
            phi = unwrap_to(phi, raw_phi);
            psi = unwrap_to(psi, raw_psi);
            arc += step;
            line.points.push(vec![m[(0, 3)], m[(1, 3)], m[(2, 3)]]);
            line.headings.push(vec![phi, psi]);
            line.cum_arc.push(arc);
        }
        line
    }
}

fn begin(start: &Pose, arc0: f64, coords: &DerivativeCoords, from: usize, to: usize) -> PathPolyline {
    let n = to - from + 1;
    let mut points = Vec::with_capacity(n);
    let mut headings = Vec::with_capacity(n);
    let mut cum_arc = Vec::with_capacity(n);
    points.push(start.position.clone());
    headings.push(start.heading.clone());
    cum_arc.push(arc0);
    PathPolyline {
        points,
        headings,
        cum_arc,
        grid: coords.grid().slice(from, to),
    }
}

impl SegmentIntegrator for TransformStack {
    fn segment(
        &self,
        coords: &DerivativeCoords,
        from: usize,
        to: usize,
        multipliers: &[f64],
        start: &Pose,
        arc0: f64,
    ) -> Result<PathPolyline, TreeError> {
        let line = match coords.dim() {
            2 => Self::planar(coords, from, to, multipliers[0], start, arc0),
            3 => Self::spatial(coords, from, to, multipliers, start, arc0),
            d => return Err(TreeError::UnsupportedDimension(d)),
        };
        if let Some(k) = line.points.iter().position(|p| p.iter().any(|v| !v.is_finite())) {
            let index = from + k.saturating_sub(1);
            return Err(crate::curve::CurveError::NonFinite {
                index,
                s: coords.grid().s_at(index),
            }
            .into());
        }
        Ok(line)
    }
}

/// Evaluates the tree by composing translate/rotate matrices per step.
/// Supports 2D and 3D.
pub fn evaluate_via_transform_stack(spec: &TreeSpec, start: &Pose) -> Result<EvaluatedTree, TreeError> {
    evaluate_via_transform_stack_with(spec, start, &EvalOptions::default())
}

pub fn evaluate_via_transform_stack_with(
    spec: &TreeSpec,
    start: &Pose,
    opts: &EvalOptions,
) -> Result<EvaluatedTree, TreeError> {
    if !(2..=3).contains(&spec.dim()) {
        return Err(TreeError::UnsupportedDimension(spec.dim()));
    }
    check_start(spec, start)?;
    evaluate_with(spec, start, opts, &TransformStack)
}
