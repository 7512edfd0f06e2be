//! Whole-body trajectory optimization in the plane.
//!
//! A trajectory is a chain of quintic pieces with fixed durations; the interior knot states
//! are the decision variables, so C² continuity holds by construction. The body's heading
//! follows its velocity. The cost adds the jerk integral, a cubic hinge on the minimum
//! scale against every obstacle at sampled times, and cubic hinges on speed and
//! acceleration; [`lbfgs`] minimizes it while [`plan`](plan::plan) raises the penalty
//! weights until the sampled constraints hold.

pub mod cost;
pub mod lbfgs;
pub mod plan;
pub mod spline;

pub use cost::{
    cubic_hinge, safety_penalty, total_cost, Bounds, CostConfig, CostEvaluation, KnotParametrization, MovingObstacle,
    SampleStats, Scenario, DEFAULT_BETA_MIN,
};
pub use lbfgs::{lbfgs_minimize, LbfgsParams, LbfgsResult, OptimizerStatus};
pub use plan::{mass_point_guess, plan, OptimizationReport, PlanOptions, PlanStatus};
pub use spline::{eval_trajectory, heading_from_velocity, KnotState, PiecewiseTrajectory, QuinticSegment, TrajectoryState};
