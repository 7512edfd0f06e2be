//! Limited-memory BFGS with the Lewis–Overton weak-Wolfe line search, which keeps working
//! on nonsmooth objectives where a strong-Wolfe search would stall at kinks.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbfgsParams {
    pub memory: usize,
    /// Armijo constant.
    pub c1: f64,
    /// Curvature constant.
    pub c2: f64,
    /// Stop when `‖g‖ ≤ grad_tol · max(1, ‖x‖)`.
    pub grad_tol: f64,
    /// Stop when an accepted step lowers the cost by at most this fraction.
    pub rel_decrease_tol: f64,
    pub max_iterations: usize,
    pub max_bisections: usize,
}

impl Default for LbfgsParams {
    fn default() -> Self {
        LbfgsParams {
            memory: 8,
            c1: 1e-4,
            c2: 0.9,
            grad_tol: 1e-6,
            rel_decrease_tol: 1e-10,
            max_iterations: 5000,
            max_bisections: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerStatus {
    GradientTolerance,
    RelativeDecrease,
    MaxIterations,
    LineSearchFailed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LbfgsResult {
    pub x: Vec<f64>,
    pub cost: f64,
    pub gradient: Vec<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub status: OptimizerStatus,
    /// Cost at the start and after every accepted step.
    pub cost_history: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Two-loop recursion: `-H g` for the stored pairs.
fn direction(g: &[f64], pairs: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q: Vec<f64> = g.to_vec();
    let mut alphas = Vec::with_capacity(pairs.len());
    for (s, y, rho) in pairs.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = pairs.back() {
        let gamma = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|v| *v *= gamma);
    }
    for ((s, y, rho), a) in pairs.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}

/// Minimizes `objective`, which returns the cost and its gradient at a point.
pub fn lbfgs_minimize<F>(mut objective: F, x0: &[f64], params: &LbfgsParams) -> Result<LbfgsResult>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    if params.memory == 0 || !(0.0 < params.c1 && params.c1 < params.c2 && params.c2 < 1.0) {
        return Err(Error::invalid("line-search constants must satisfy 0 < c1 < c2 < 1 with memory ≥ 1"));
    }
    let mut x = x0.to_vec();
    let (mut f, mut g) = objective(&x)?;
    if !f.is_finite() || g.len() != x.len() {
        return Err(Error::invalid("objective is not finite at the starting point"));
    }
    let mut evaluations = 1;
    let mut pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(params.memory);
    let mut history = vec![f];
    let mut status = OptimizerStatus::MaxIterations;
    let mut iterations = 0;

    while iterations < params.max_iterations {
        if norm(&g) <= params.grad_tol * norm(&x).max(1.0) {
            status = OptimizerStatus::GradientTolerance;
            break;
        }
        let mut d = direction(&g, &pairs);
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            // Curvature information went stale; restart from steepest descent.
            pairs.clear();
            d = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        let mut t = if pairs.is_empty() { 1.0f64.min(1.0 / norm(&g)) } else { 1.0 };

        // Bracketing: `lo` satisfies Armijo, `hi` violates it.
        let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
        let mut bisections = 0;
        let mut expansions = 0;
        let accepted = loop {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + t * di).collect();
            let (ft, gt) = objective(&trial)?;
            evaluations += 1;
            if !ft.is_finite() || ft > f + params.c1 * t * slope {
                hi = t;
            } else if dot(&gt, &d) < params.c2 * slope {
                lo = t;
            } else {
                break Some((trial, ft, gt));
            }
            if hi.is_finite() {
                bisections += 1;
                if bisections > params.max_bisections {
                    break None;
                }
                t = 0.5 * (lo + hi);
            } else {
                expansions += 1;
                if expansions > params.max_bisections {
                    break None;
                }
                t *= 2.0;
            }
        };
        let Some((x_new, f_new, g_new)) = accepted else {
            status = OptimizerStatus::LineSearchFailed;
            break;
        };
        iterations += 1;

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-16 * norm(&s) * norm(&y) && sy > 0.0 {
            if pairs.len() == params.memory {
                pairs.pop_front();
            }
            pairs.push_back((s, y, 1.0 / sy));
        }
        let decrease = f - f_new;
        x = x_new;
        g = g_new;
        let f_old = f;
        f = f_new;
        history.push(f);
        if decrease <= params.rel_decrease_tol * f_old.abs() {
            status = OptimizerStatus::RelativeDecrease;
            break;
        }
    }

    Ok(LbfgsResult { x, cost: f, gradient: g, iterations, evaluations, status, cost_history: history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn quadratic_bowl() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let target: Vec<f64> = (0..10).map(|_| rng.random_range(-5.0..5.0)).collect();
        let x0: Vec<f64> = (0..10).map(|_| rng.random_range(-5.0..5.0)).collect();
        let r = lbfgs_minimize(
            |x| {
                let diff: Vec<f64> = x.iter().zip(&target).map(|(a, b)| a - b).collect();
                Ok((dot(&diff, &diff), diff.iter().map(|d| 2.0 * d).collect()))
            },
            &x0,
            &LbfgsParams::default(),
        )
        .unwrap();
        assert!(r.iterations <= 50);
        for (a, b) in r.x.iter().zip(&target) {
            assert!((a - b).abs() <= 1e-6);
        }
    }

    #[test]
    fn absolute_value_kink() {
        let r = lbfgs_minimize(|x| Ok((x[0].abs(), vec![if x[0] >= 0.0 { 1.0 } else { -1.0 }])), &[1.0], &LbfgsParams::default()).unwrap();
        assert!(r.x[0].abs() <= 1e-5, "{r:?}");
    }

    #[test]
    fn rosenbrock() {
        let r = lbfgs_minimize(
            |x| {
                let (a, b) = (x[0], x[1]);
                let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
                Ok((f, vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)]))
            },
            &[-1.2, 1.0],
            &LbfgsParams::default(),
        )
        .unwrap();
        assert!((r.x[0] - 1.0).abs() <= 1e-5 && (r.x[1] - 1.0).abs() <= 1e-5, "{r:?}");
        assert!(r.cost_history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn rejects_bad_constants() {
        let p = LbfgsParams { c1: 0.95, ..LbfgsParams::default() };
        assert!(lbfgs_minimize(|x| Ok((x[0], vec![1.0])), &[0.0], &p).is_err());
    }
}
