//! Piecewise quintic trajectories in the plane built from knot states.

use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point2;

/// Position, velocity and acceleration at a knot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KnotState {
    pub position: Point2,
    pub velocity: Point2,
    pub acceleration: Point2,
}

impl KnotState {
    pub fn new(position: Point2, velocity: Point2, acceleration: Point2) -> Self {
        KnotState { position, velocity, acceleration }
    }

    /// Flattened as `[px, py, vx, vy, ax, ay]`.
    pub fn to_array(&self) -> [f64; 6] {
        let (p, v, a) = (self.position, self.velocity, self.acceleration);
        [p.x, p.y, v.x, v.y, a.x, a.y]
    }

    pub fn from_slice(s: &[f64]) -> Self {
        KnotState {
            position: Point2::new(s[0], s[1]),
            velocity: Point2::new(s[2], s[3]),
            acceleration: Point2::new(s[4], s[5]),
        }
    }

    fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

/// One polynomial piece, coefficients in ascending powers of local time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuinticSegment {
    pub duration: f64,
    pub coeffs_x: [f64; 6],
    pub coeffs_y: [f64; 6],
}

/// Sampled state of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryState {
    pub position: Point2,
    pub velocity: Point2,
    pub acceleration: Point2,
    pub jerk: Point2,
}

/// Local-time monomials and their first three derivatives.
pub(crate) fn monomials(tau: f64) -> [[f64; 6]; 4] {
    let mut out = [[0.0; 6]; 4];
    let mut pw = [1.0; 6];
    for i in 1..6 {
        pw[i] = pw[i - 1] * tau;
    }
    for i in 0..6 {
        out[0][i] = pw[i];
        if i >= 1 {
            out[1][i] = i as f64 * pw[i - 1];
        }
        if i >= 2 {
            out[2][i] = (i * (i - 1)) as f64 * pw[i - 2];
        }
        if i >= 3 {
            out[3][i] = (i * (i - 1) * (i - 2)) as f64 * pw[i - 3];
        }
    }
    out
}

fn dot6(a: &[f64; 6], b: &[f64; 6]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl QuinticSegment {
    pub fn eval(&self, tau: f64) -> TrajectoryState {
        let m = monomials(tau);
        let at = |k: usize| Point2::new(dot6(&m[k], &self.coeffs_x), dot6(&m[k], &self.coeffs_y));
        TrajectoryState { position: at(0), velocity: at(1), acceleration: at(2), jerk: at(3) }
    }

    /// `∫₀ᵀ ‖jerk‖² dτ`.
    pub fn jerk_integral(&self) -> f64 {
        let q = jerk_gram(self.duration);
        let cx = SVector::<f64, 6>::from(self.coeffs_x);
        let cy = SVector::<f64, 6>::from(self.coeffs_y);
        (cx.transpose() * q * cx)[0] + (cy.transpose() * q * cy)[0]
    }
}

/// Matrix `Q` with `cᵀ Q c = ∫₀ᵀ (p'''(τ))² dτ` for ascending coefficients `c`.
pub(crate) fn jerk_gram(t: f64) -> SMatrix<f64, 6, 6> {
    let (t2, t3) = (t * t, t * t * t);
    let (t4, t5) = (t3 * t, t3 * t2);
    let mut q = SMatrix::<f64, 6, 6>::zeros();
    q[(3, 3)] = 36.0 * t;
    q[(3, 4)] = 72.0 * t2;
    q[(3, 5)] = 120.0 * t3;
    q[(4, 4)] = 192.0 * t3;
    q[(4, 5)] = 360.0 * t4;
    q[(5, 5)] = 720.0 * t5;
    for i in 3..6 {
        for j in 3..i {
            q[(i, j)] = q[(j, i)];
        }
    }
    q
}

/// Map from one axis' boundary data `[p0, v0, a0, p1, v1, a1]` to the quintic coefficients.
pub(crate) fn hermite_matrix(t: f64) -> SMatrix<f64, 6, 6> {
    let (t2, t3) = (t * t, t * t * t);
    let (t4, t5) = (t3 * t, t3 * t2);
    #[rustfmt::skip]
    let h = SMatrix::<f64, 6, 6>::from_row_slice(&[
        1.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        0.0, 1.0, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.5, 0.0, 0.0, 0.0,
        -10.0 / t3, -6.0 / t2, -1.5 / t, 10.0 / t3, -4.0 / t2, 0.5 / t,
        15.0 / t4, 8.0 / t3, 1.5 / t2, -15.0 / t4, 7.0 / t3, -1.0 / t2,
        -6.0 / t5, -3.0 / t4, -0.5 / t3, 6.0 / t5, -3.0 / t4, 0.5 / t3,
    ]);
    h
}

impl QuinticSegment {
    /// The unique quintic matching both knot states over `duration`.
    pub fn hermite(from: &KnotState, to: &KnotState, duration: f64) -> Result<Self> {
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(Error::invalid(format!("segment duration must be positive, got {duration}")));
        }
        if !from.is_finite() || !to.is_finite() {
            return Err(Error::invalid("knot state is not finite"));
        }
        let h = hermite_matrix(duration);
        let axis = |k: usize| {
            let b = SVector::<f64, 6>::from([
                from.position[k],
                from.velocity[k],
                from.acceleration[k],
                to.position[k],
                to.velocity[k],
                to.acceleration[k],
            ]);
            let c = h * b;
            [c[0], c[1], c[2], c[3], c[4], c[5]]
        };
        Ok(QuinticSegment { duration, coeffs_x: axis(0), coeffs_y: axis(1) })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseTrajectory {
    pub segments: Vec<QuinticSegment>,
}

impl PiecewiseTrajectory {
    pub fn from_knots(knots: &[KnotState], durations: &[f64]) -> Result<Self> {
        if knots.len() != durations.len() + 1 || durations.is_empty() {
            return Err(Error::invalid("need one more knot than segments"));
        }
        let segments = durations
            .iter()
            .enumerate()
            .map(|(i, &d)| QuinticSegment::hermite(&knots[i], &knots[i + 1], d))
            .collect::<Result<_>>()?;
        Ok(PiecewiseTrajectory { segments })
    }

    pub fn durations(&self) -> Vec<f64> {
        self.segments.iter().map(|s| s.duration).collect()
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// Largest jump in position, velocity or acceleration across the junctions.
    pub fn continuity_error(&self) -> f64 {
        self.segments
            .windows(2)
            .map(|w| {
                let l = w[0].eval(w[0].duration);
                let r = w[1].eval(0.0);
                (l.position - r.position)
                    .amax()
                    .max((l.velocity - r.velocity).amax())
                    .max((l.acceleration - r.acceleration).amax())
            })
            .fold(0.0, f64::max)
    }

    pub fn jerk_integral(&self) -> f64 {
        self.segments.iter().map(QuinticSegment::jerk_integral).sum()
    }
}

/// State at global time `tau`; a knot time belongs to the later segment.
pub fn eval_trajectory(traj: &PiecewiseTrajectory, tau: f64) -> Result<TrajectoryState> {
    let total = traj.total_duration();
    if !(tau >= 0.0 && tau <= total * (1.0 + 1e-12)) || traj.segments.is_empty() {
        return Err(Error::invalid(format!("time {tau} outside [0, {total}]")));
    }
    let mut start = 0.0;
    for (i, seg) in traj.segments.iter().enumerate() {
        if tau < start + seg.duration || i + 1 == traj.segments.len() {
            return Ok(seg.eval((tau - start).min(seg.duration)));
        }
        start += seg.duration;
    }
    unreachable!("loop returns on the last segment")
}

/// Heading along the velocity and its derivative, with `‖v‖²` regularized to `‖v‖² + ε²`.
pub fn heading_from_velocity(v: &Point2, eps: f64) -> Result<(f64, Point2)> {
    if !(eps > 0.0) {
        return Err(Error::invalid("heading regularization must be positive"));
    }
    let denom = v.norm_squared() + eps * eps;
    Ok((v.y.atan2(v.x), Point2::new(-v.y, v.x) / denom))
}
