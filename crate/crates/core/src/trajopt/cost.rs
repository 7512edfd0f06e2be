//! Smoothness, safety and feasibility costs over the free knot states.

use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};

use super::spline::{hermite_matrix, jerk_gram, monomials, KnotState, PiecewiseTrajectory};
use crate::error::{Error, Result};
use crate::geometry::{Point2, Pose2};
use crate::gradient::scale_with_gradient_se2;
use crate::scale::ConvexSetV;
use crate::trajopt::spline::heading_from_velocity;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub v_max: f64,
    pub a_max: f64,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { v_max: 8.0, a_max: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MovingObstacle {
    pub shape: ConvexSetV<2>,
    pub velocity: Point2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub body: ConvexSetV<2>,
    pub static_obstacles: Vec<ConvexSetV<2>>,
    pub moving_obstacles: Vec<MovingObstacle>,
    pub bounds: Bounds,
    pub beta_min: f64,
}

pub const DEFAULT_BETA_MIN: f64 = 1.1;

impl Scenario {
    pub fn new(
        body: ConvexSetV<2>,
        static_obstacles: Vec<ConvexSetV<2>>,
        moving_obstacles: Vec<MovingObstacle>,
        bounds: Bounds,
        beta_min: f64,
    ) -> Result<Self> {
        if !(beta_min >= 1.0 && beta_min.is_finite()) {
            return Err(Error::invalid(format!("beta_min must be at least 1, got {beta_min}")));
        }
        if !(bounds.v_max > 0.0 && bounds.a_max > 0.0 && bounds.v_max.is_finite() && bounds.a_max.is_finite()) {
            return Err(Error::invalid("v_max and a_max must be positive"));
        }
        if moving_obstacles.iter().any(|m| !m.velocity.iter().all(|v| v.is_finite())) {
            return Err(Error::invalid("obstacle velocity is not finite"));
        }
        Ok(Scenario { body, static_obstacles, moving_obstacles, bounds, beta_min })
    }

    pub fn obstacle_count(&self) -> usize {
        self.static_obstacles.len() + self.moving_obstacles.len()
    }

    /// World-frame obstacle points at global time `t`.
    pub fn obstacles_at(&self, t: f64) -> Vec<Vec<Point2>> {
        let mut out: Vec<Vec<Point2>> = self.static_obstacles.iter().map(|o| o.points.clone()).collect();
        out.extend(self.moving_obstacles.iter().map(|m| m.shape.points.iter().map(|p| p + m.velocity * t).collect()));
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostConfig {
    pub smoothness_weight: f64,
    pub safety_weight: f64,
    pub feasibility_weight: f64,
    pub samples_per_segment: usize,
    /// Heading regularization, m/s.
    pub heading_eps: f64,
    /// The safety hinge targets `beta_min + beta_margin`.
    pub beta_margin: f64,
    /// The speed hinge targets `v_max − speed_margin`.
    pub speed_margin: f64,
    /// The acceleration hinge targets `a_max − accel_margin`.
    pub accel_margin: f64,
}

impl Default for CostConfig {
    fn default() -> Self {
        CostConfig {
            smoothness_weight: 1.0,
            safety_weight: 1e3,
            feasibility_weight: 1e2,
            samples_per_segment: 16,
            heading_eps: 1e-3,
            beta_margin: 0.02,
            speed_margin: 0.05,
            accel_margin: 0.02,
        }
    }
}

impl CostConfig {
    pub fn validate(&self) -> Result<()> {
        let w = [self.smoothness_weight, self.safety_weight, self.feasibility_weight];
        if w.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::invalid("cost weights must be finite and nonnegative"));
        }
        if self.samples_per_segment < 2 {
            return Err(Error::invalid("need at least 2 samples per segment"));
        }
        if !(self.heading_eps > 0.0) {
            return Err(Error::invalid("heading regularization must be positive"));
        }
        if [self.beta_margin, self.speed_margin, self.accel_margin].iter().any(|m| !(*m >= 0.0)) {
            return Err(Error::invalid("margins must be nonnegative"));
        }
        Ok(())
    }
}

/// Fixed start and end states and segment durations; the decision vector holds the
/// interior knots as consecutive `[px, py, vx, vy, ax, ay]` blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotParametrization {
    pub start: KnotState,
    pub end: KnotState,
    pub durations: Vec<f64>,
}

impl KnotParametrization {
    pub fn new(start: KnotState, end: KnotState, durations: Vec<f64>) -> Result<Self> {
        if durations.is_empty() || durations.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
            return Err(Error::invalid("segment durations must be positive"));
        }
        Ok(KnotParametrization { start, end, durations })
    }

    pub fn segments(&self) -> usize {
        self.durations.len()
    }

    pub fn num_vars(&self) -> usize {
        6 * (self.segments() - 1)
    }

    pub fn knots(&self, x: &[f64]) -> Result<Vec<KnotState>> {
        if x.len() != self.num_vars() {
            return Err(Error::invalid(format!("expected {} decision variables, got {}", self.num_vars(), x.len())));
        }
        let mut knots = Vec::with_capacity(self.segments() + 1);
        knots.push(self.start);
        knots.extend(x.chunks(6).map(KnotState::from_slice));
        knots.push(self.end);
        Ok(knots)
    }

    pub fn trajectory(&self, x: &[f64]) -> Result<PiecewiseTrajectory> {
        PiecewiseTrajectory::from_knots(&self.knots(x)?, &self.durations)
    }

    /// Decision vector sampled from an arbitrary state function at the interior knot times.
    pub fn sample_vars(&self, state: impl Fn(f64) -> KnotState) -> Vec<f64> {
        let mut t = 0.0;
        let mut x = Vec::with_capacity(self.num_vars());
        for d in &self.durations[..self.segments() - 1] {
            t += d;
            x.extend(state(t).to_array());
        }
        x
    }

    /// Adds `local` (per-axis `[p0, v0, a0, p1, v1, a1]` sensitivities) of segment `seg`
    /// to the gradient of the decision vector.
    fn scatter(&self, grad: &mut [f64], seg: usize, axis: usize, local: &SVector<f64, 6>) {
        for (side, knot) in [(0, seg), (1, seg + 1)] {
            if knot == 0 || knot == self.segments() {
                continue;
            }
            let base = 6 * (knot - 1);
            for kind in 0..3 {
                grad[base + 2 * kind + axis] += local[3 * side + kind];
            }
        }
    }
}

/// `max(0, v)³` and its slope.
pub fn cubic_hinge(v: f64) -> (f64, f64) {
    if v > 0.0 {
        (v * v * v, 3.0 * v * v)
    } else {
        (0.0, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    /// `+∞` without obstacles.
    pub min_beta: f64,
    pub max_speed: f64,
    pub max_accel: f64,
    /// Samples whose scale had no gradient or only a subgradient.
    pub degenerate_samples: usize,
    pub samples: usize,
}

impl Default for SampleStats {
    fn default() -> Self {
        SampleStats { min_beta: f64::INFINITY, max_speed: 0.0, max_accel: 0.0, degenerate_samples: 0, samples: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostEvaluation {
    pub cost: f64,
    pub gradient: Vec<f64>,
    pub smoothness: f64,
    pub safety: f64,
    pub feasibility: f64,
    pub stats: SampleStats,
}

/// One quadrature sample with the linear maps from segment boundary data to its state.
struct Sample {
    seg: usize,
    time: f64,
    weight: f64,
    /// Rows of `Hᵀ m_k`: sensitivities of position, velocity and acceleration.
    maps: [SVector<f64, 6>; 3],
    position: Point2,
    velocity: Point2,
    acceleration: Point2,
}

fn samples(param: &KnotParametrization, traj: &PiecewiseTrajectory, per_segment: usize) -> Vec<Sample> {
    let mut out = Vec::with_capacity(param.segments() * (per_segment + 1));
    let mut start = 0.0;
    for (seg, s) in traj.segments.iter().enumerate() {
        let h: SMatrix<f64, 6, 6> = hermite_matrix(s.duration);
        let dt = s.duration / per_segment as f64;
        for k in 0..=per_segment {
            let tau = k as f64 * dt;
            let m = monomials(tau);
            let map = |i: usize| h.transpose() * SVector::<f64, 6>::from(m[i]);
            let st = s.eval(tau);
            let weight = if k == 0 || k == per_segment { 0.5 * dt } else { dt };
            out.push(Sample {
                seg,
                time: start + tau,
                weight,
                maps: [map(0), map(1), map(2)],
                position: st.position,
                velocity: st.velocity,
                acceleration: st.acceleration,
            });
        }
        start += s.duration;
    }
    out
}

/// Gradient contribution of `dC/dp`, `dC/dv`, `dC/da` at one sample.
fn push_state_gradient(param: &KnotParametrization, grad: &mut [f64], s: &Sample, dp: Point2, dv: Point2, da: Point2) {
    for axis in 0..2 {
        let local = s.maps[0] * dp[axis] + s.maps[1] * dv[axis] + s.maps[2] * da[axis];
        param.scatter(grad, s.seg, axis, &local);
    }
}

fn smoothness(param: &KnotParametrization, traj: &PiecewiseTrajectory, grad: &mut [f64]) -> f64 {
    let mut total = 0.0;
    for (seg, s) in traj.segments.iter().enumerate() {
        let q = jerk_gram(s.duration);
        let h = hermite_matrix(s.duration);
        for (axis, c) in [s.coeffs_x, s.coeffs_y].iter().enumerate() {
            let c = SVector::<f64, 6>::from(*c);
            let qc = q * c;
            total += c.dot(&qc);
            param.scatter(grad, seg, axis, &(h.transpose() * qc * 2.0));
        }
    }
    total
}

fn safety_terms(
    param: &KnotParametrization,
    sampled: &[Sample],
    scenario: &Scenario,
    config: &CostConfig,
    grad: &mut [f64],
    stats: &mut SampleStats,
) -> Result<f64> {
    let target = scenario.beta_min + config.beta_margin;
    let mut total = 0.0;
    for s in sampled {
        let (theta, dtheta_dv) = heading_from_velocity(&s.velocity, config.heading_eps)?;
        let pose = Pose2::new(theta, s.position)?;
        for obstacle in scenario.obstacles_at(s.time) {
            let (result, g) = scale_with_gradient_se2(&scenario.body, &obstacle, &pose)?;
            stats.min_beta = stats.min_beta.min(result.beta);
            if g.is_none() || g.is_some_and(|g| g.subgradient) {
                stats.degenerate_samples += 1;
            }
            let (h, slope) = cubic_hinge(target - result.beta);
            if h == 0.0 {
                continue;
            }
            let w = config.safety_weight * s.weight;
            total += w * h;
            if let Some(g) = g {
                // dC/dβ = −w·slope; β depends on position through t and on velocity through θ.
                let dc = -w * slope;
                let dp = Point2::from(g.d_beta_d_t) * dc;
                let dv = dtheta_dv * (g.d_beta_d_theta * dc);
                push_state_gradient(param, grad, s, dp, dv, Point2::zeros());
            }
        }
    }
    Ok(total)
}

fn feasibility_terms(
    param: &KnotParametrization,
    sampled: &[Sample],
    scenario: &Scenario,
    config: &CostConfig,
    grad: &mut [f64],
    stats: &mut SampleStats,
) -> f64 {
    let v_lim = (scenario.bounds.v_max - config.speed_margin).max(0.0);
    let a_lim = (scenario.bounds.a_max - config.accel_margin).max(0.0);
    let mut total = 0.0;
    for s in sampled {
        stats.max_speed = stats.max_speed.max(s.velocity.norm());
        stats.max_accel = stats.max_accel.max(s.acceleration.norm());
        let w = config.feasibility_weight * s.weight;
        let (hv, sv) = cubic_hinge(s.velocity.norm_squared() - v_lim * v_lim);
        let (ha, sa) = cubic_hinge(s.acceleration.norm_squared() - a_lim * a_lim);
        if hv + ha == 0.0 {
            continue;
        }
        total += w * (hv + ha);
        push_state_gradient(param, grad, s, Point2::zeros(), s.velocity * (2.0 * w * sv), s.acceleration * (2.0 * w * sa));
    }
    total
}

/// Safety penalty `Σ w_k·W·max(0, β_target − β)³` over all samples and obstacles.
pub fn safety_penalty(
    param: &KnotParametrization,
    x: &[f64],
    scenario: &Scenario,
    config: &CostConfig,
) -> Result<(f64, Vec<f64>, SampleStats)> {
    config.validate()?;
    let traj = param.trajectory(x)?;
    let sampled = samples(param, &traj, config.samples_per_segment);
    let mut grad = vec![0.0; x.len()];
    let mut stats = SampleStats { samples: sampled.len(), ..SampleStats::default() };
    let cost = safety_terms(param, &sampled, scenario, config, &mut grad, &mut stats)?;
    Ok((cost, grad, stats))
}

/// Smoothness, safety and feasibility together, with the gradient over the decision vector.
pub fn total_cost(param: &KnotParametrization, x: &[f64], scenario: &Scenario, config: &CostConfig) -> Result<CostEvaluation> {
    config.validate()?;
    let traj = param.trajectory(x)?;
    let sampled = samples(param, &traj, config.samples_per_segment);
    let mut stats = SampleStats { samples: sampled.len(), ..SampleStats::default() };

    let mut g_smooth = vec![0.0; x.len()];
    let smooth = smoothness(param, &traj, &mut g_smooth);
    let mut g_safe = vec![0.0; x.len()];
    let safety = safety_terms(param, &sampled, scenario, config, &mut g_safe, &mut stats)?;
    let mut g_feas = vec![0.0; x.len()];
    let feasibility = feasibility_terms(param, &sampled, scenario, config, &mut g_feas, &mut stats);

    let gradient = (0..x.len()).map(|i| config.smoothness_weight * g_smooth[i] + g_safe[i] + g_feas[i]).collect();
    Ok(CostEvaluation {
        cost: config.smoothness_weight * smooth + safety + feasibility,
        gradient,
        smoothness: smooth,
        safety,
        feasibility,
        stats,
    })
}
