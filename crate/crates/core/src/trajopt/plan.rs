//! Planning loop: mass-point initialization, then penalty continuation with L-BFGS.

use std::time::Instant;

use serde::{Serialize, Serializer};

use super::cost::{total_cost, CostConfig, KnotParametrization, SampleStats, Scenario};
use super::lbfgs::{lbfgs_minimize, LbfgsParams, OptimizerStatus};
use super::spline::{KnotState, PiecewiseTrajectory, QuinticSegment};
use crate::error::{Error, Result};

/// Constraint slack accepted when declaring a plan feasible.
pub const FEASIBILITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanOptions {
    pub segments: usize,
    /// Total duration in seconds, split evenly across segments.
    pub duration: f64,
    pub lbfgs: LbfgsParams,
    /// Penalty rounds; safety and feasibility weights grow by `weight_growth` per round.
    pub max_rounds: usize,
    pub weight_growth: f64,
}

impl Default for PlanOptions {
    fn default() -> Self {
        PlanOptions { segments: 6, duration: 10.0, lbfgs: LbfgsParams::default(), max_rounds: 8, weight_growth: 10.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanStatus {
    /// Every sample satisfies the scale, speed and acceleration bounds.
    Converged,
    ConstraintsViolated,
}

fn serialize_beta<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() && *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationReport {
    pub status: PlanStatus,
    pub optimizer_status: OptimizerStatus,
    /// Accepted L-BFGS steps over all rounds.
    pub iterations: usize,
    pub rounds: usize,
    pub final_cost: f64,
    /// `"inf"` when the scene has no obstacles.
    #[serde(serialize_with = "serialize_beta")]
    pub min_beta: f64,
    pub beta_min: f64,
    pub max_speed: f64,
    pub max_accel: f64,
    pub degenerate_samples: usize,
    pub continuity_error: f64,
    pub wall_time_s: f64,
    /// Cost after each accepted step, one list per penalty round.
    #[serde(skip)]
    pub cost_history: Vec<Vec<f64>>,
}

fn feasible(stats: &SampleStats, scenario: &Scenario) -> bool {
    stats.min_beta >= scenario.beta_min - FEASIBILITY_TOL
        && stats.max_speed <= scenario.bounds.v_max + FEASIBILITY_TOL
        && stats.max_accel <= scenario.bounds.a_max + FEASIBILITY_TOL
}

/// The single quintic from `start` to `end`: the minimum-jerk path that ignores the body.
pub fn mass_point_guess(param: &KnotParametrization) -> Result<Vec<f64>> {
    let total: f64 = param.durations.iter().sum();
    let seg = QuinticSegment::hermite(&param.start, &param.end, total)?;
    Ok(param.sample_vars(|t| {
        let s = seg.eval(t);
        KnotState::new(s.position, s.velocity, s.acceleration)
    }))
}

pub fn plan(
    scenario: &Scenario,
    start: KnotState,
    end: KnotState,
    options: &PlanOptions,
    config: &CostConfig,
) -> Result<(PiecewiseTrajectory, OptimizationReport)> {
    let clock = Instant::now();
    config.validate()?;
    if options.segments == 0 || !(options.duration > 0.0 && options.duration.is_finite()) {
        return Err(Error::invalid("need at least one segment and a positive duration"));
    }
    if options.max_rounds == 0 || !(options.weight_growth >= 1.0) {
        return Err(Error::invalid("need at least one round and a weight growth of at least 1"));
    }
    let param = KnotParametrization::new(start, end, vec![options.duration / options.segments as f64; options.segments])?;
    let mut x = mass_point_guess(&param)?;

    let mut round_config = *config;
    let mut iterations = 0;
    let mut history = Vec::new();
    let mut optimizer_status = OptimizerStatus::GradientTolerance;
    let mut eval = total_cost(&param, &x, scenario, &round_config)?;
    let mut rounds = 0;
    while rounds < options.max_rounds {
        rounds += 1;
        if x.is_empty() {
            break;
        }
        let r = lbfgs_minimize(
            |v| {
                let e = total_cost(&param, v, scenario, &round_config)?;
                Ok((e.cost, e.gradient))
            },
            &x,
            &options.lbfgs,
        )?;
        iterations += r.iterations;
        optimizer_status = r.status;
        history.push(r.cost_history);
        x = r.x;
        eval = total_cost(&param, &x, scenario, &round_config)?;
        if feasible(&eval.stats, scenario) {
            break;
        }
        round_config.safety_weight *= options.weight_growth;
        round_config.feasibility_weight *= options.weight_growth;
    }

    let traj = param.trajectory(&x)?;
    let status = if feasible(&eval.stats, scenario) { PlanStatus::Converged } else { PlanStatus::ConstraintsViolated };
    let report = OptimizationReport {
        status,
        optimizer_status,
        iterations,
        rounds,
        final_cost: eval.cost,
        min_beta: eval.stats.min_beta,
        beta_min: scenario.beta_min,
        max_speed: eval.stats.max_speed,
        max_accel: eval.stats.max_accel,
        degenerate_samples: eval.stats.degenerate_samples,
        continuity_error: traj.continuity_error(),
        wall_time_s: clock.elapsed().as_secs_f64(),
        cost_history: history,
    };
    Ok((traj, report))
}
