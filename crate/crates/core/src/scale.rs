//! Minimum collision scale between a body and an obstacle.
//!
//! With points (V-representation) the body is dilated about its seed `s`; the program is
//!
//! ```text
//! maximize β  over (α, β)
//!   α·(p_b − s) ≤ 1      for every body point
//!   α·(p_o − s) ≥ β      for every obstacle point
//!   β ≥ 0
//! ```
//!
//! and `α/β` is the normal of a halfspace that holds the dilated body and excludes the
//! obstacle. With halfspaces `α·(x − p) ≤ 1` (H-representation) the program looks for the
//! smallest `β` at which the body dilated about its interior point shares a point `x` with
//! the obstacle. Redundant points and halfspaces are accepted as is.

use nalgebra::{DMatrix, SVector};

use crate::error::{Error, Result};
use crate::geometry::{centroid, check_finite, Point, RigidPose};
use crate::oracle;
use crate::sdlp::{self, LowDimLP, LpStatus, SolverParams};

/// Tightness threshold used when deciding whether more than `n + 1` constraints are active.
const DEGENERACY_EPS: f64 = 1e-9;
const RANK_EPS: f64 = 1e-9;

fn check_dim<const N: usize>() -> Result<()> {
    if N == 2 || N == 3 {
        Ok(())
    } else {
        Err(Error::invalid(format!("only 2D and 3D sets are supported, got {N}D")))
    }
}

/// A convex set given by a (possibly redundant) point cloud and a scale seed.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexSetV<const N: usize> {
    pub points: Vec<Point<N>>,
    pub seed: Point<N>,
}

impl<const N: usize> ConvexSetV<N> {
    /// Seeded at the centroid of `points`.
    pub fn new(points: Vec<Point<N>>) -> Result<Self> {
        let seed = centroid(&points)?;
        Self::with_seed(points, seed)
    }

    pub fn with_seed(points: Vec<Point<N>>, seed: Point<N>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("point set is empty"));
        }
        for (i, p) in points.iter().enumerate() {
            check_finite(p, &format!("point {i}"))?;
        }
        check_finite(&seed, "seed")?;
        Ok(ConvexSetV { points, seed })
    }

    /// Whether the seed lies strictly inside the hull (brute-force check).
    pub fn seed_is_interior(&self) -> Result<bool> {
        oracle::point_strictly_inside(&self.points, &self.seed)
    }

    /// The same shape with every point moved `k` times further from the seed.
    pub fn dilated(&self, k: f64) -> Self {
        let points = self.points.iter().map(|p| self.seed + (p - self.seed) * k).collect();
        ConvexSetV { points, seed: self.seed }
    }
}

/// A convex set `{x | α_i·(x − p) ≤ 1}` around an interior point `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexSetH<const N: usize> {
    pub normals: Vec<SVector<f64, N>>,
    pub interior_point: Point<N>,
}

impl<const N: usize> ConvexSetH<N> {
    pub fn new(normals: Vec<SVector<f64, N>>, interior_point: Point<N>) -> Result<Self> {
        if normals.is_empty() {
            return Err(Error::invalid("halfspace set is empty"));
        }
        for (i, a) in normals.iter().enumerate() {
            check_finite(a, &format!("normal {i}"))?;
            if a.iter().all(|v| *v == 0.0) {
                return Err(Error::invalid(format!("normal {i} is zero")));
            }
        }
        check_finite(&interior_point, "interior point")?;
        Ok(ConvexSetH { normals, interior_point })
    }

    /// Converts `a_i·x ≤ b_i` into the `α_i·(x − p) ≤ 1` form; `p` must be strictly inside
    /// every halfspace (`b_i − a_i·p > 1e-12`).
    pub fn from_inequalities(a: &[SVector<f64, N>], b: &[f64], interior_point: Point<N>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::invalid("normal and offset counts differ"));
        }
        let normals = a
            .iter()
            .zip(b)
            .enumerate()
            .map(|(i, (ai, bi))| {
                let margin = bi - ai.dot(&interior_point);
                if !(margin > 1e-12) {
                    return Err(Error::invalid(format!("point is not strictly inside halfspace {i} (margin {margin})")));
                }
                Ok(ai / margin)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(normals, interior_point)
    }

    /// Bounded iff the normals positively span the space.
    pub fn is_bounded(&self) -> Result<bool> {
        oracle::point_strictly_inside(&self.normals, &SVector::zeros())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaleResult<const N: usize> {
    pub beta: f64,
    /// V-rep: the combined normal `α = β·α_o`. H-rep: the witness point `x`.
    pub certificate: SVector<f64, N>,
    /// Basis constraints on the body side, as indices into the body's points or halfspaces.
    /// At degenerate optima the solver's basis is extended by tight constraints up to `n + 1`.
    pub active_body: Vec<usize>,
    /// Basis constraints on the obstacle side.
    pub active_obstacle: Vec<usize>,
    /// More than `n + 1` constraints are tight, or the basis does not split into `n + 1`
    /// body and obstacle constraints (the `β ≥ 0` bound is active). Gradients there are
    /// subgradients at best.
    pub degenerate: bool,
    /// World-frame obstacle points matching `active_obstacle`, filled by [`min_scale_vrep`].
    pub active_obstacle_world: Vec<Point<N>>,
}

fn rank(rows: &[&[f64]]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let m = DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]);
    let sv = m.singular_values();
    let tol = RANK_EPS * sv.max().max(1.0);
    sv.iter().filter(|v| **v > tol).count()
}

fn finish<const N: usize>(
    lp: &LowDimLP,
    params: &SolverParams,
    sol: &sdlp::LpSolution,
    beta: f64,
    certificate: SVector<f64, N>,
    n_body: usize,
    n_obstacle: usize,
) -> Result<ScaleResult<N>> {
    let tight = sdlp::active_set(lp, sol, &SolverParams { act_eps: DEGENERACY_EPS, ..*params })?;
    let bound_row = n_body + n_obstacle;
    let mut basis = sol.active_basis.clone();
    // The solver's basis only has to pin the optimal value. When it is shorter than n + 1,
    // extend it with tight rows that keep it independent, so the point is pinned too.
    if basis.len() < N + 1 && !basis.contains(&bound_row) {
        for &i in &tight {
            if basis.len() == N + 1 {
                break;
            }
            if i == bound_row || basis.contains(&i) {
                continue;
            }
            let mut rows: Vec<&[f64]> = basis.iter().map(|&k| lp.constraint(k).0).collect();
            rows.push(lp.constraint(i).0);
            if rank(&rows) == rows.len() {
                basis.push(i);
            }
        }
        basis.sort_unstable();
    }
    let active_body: Vec<usize> = basis.iter().copied().filter(|&i| i < n_body).collect();
    let active_obstacle: Vec<usize> =
        basis.iter().copied().filter(|&i| i >= n_body && i < bound_row).map(|i| i - n_body).collect();
    let full_split = active_body.len() + active_obstacle.len() == N + 1;
    Ok(ScaleResult {
        beta,
        certificate,
        degenerate: tight.len() > N + 1 || !full_split,
        active_body,
        active_obstacle,
        active_obstacle_world: Vec::new(),
    })
}

/// Minimum scale with the obstacle already expressed in the body frame.
pub fn min_scale_vrep_bodyframe<const N: usize>(body: &ConvexSetV<N>, obstacle: &[Point<N>]) -> Result<ScaleResult<N>> {
    check_dim::<N>()?;
    if obstacle.is_empty() {
        return Err(Error::invalid("obstacle point set is empty"));
    }
    let d = N + 1;
    let mut objective = vec![0.0; d];
    objective[N] = 1.0;
    let mut lp = LowDimLP::with_capacity(d, &objective, body.points.len() + obstacle.len() + 1)?;
    let mut row = vec![0.0; d];
    for p in &body.points {
        let rel = p - body.seed;
        row[..N].copy_from_slice(rel.as_slice());
        row[N] = 0.0;
        lp.add_constraint(&row, 1.0)?;
    }
    for (j, p) in obstacle.iter().enumerate() {
        check_finite(p, &format!("obstacle point {j}"))?;
        let rel = p - body.seed;
        for k in 0..N {
            row[k] = -rel[k];
        }
        row[N] = 1.0;
        lp.add_constraint(&row, 0.0)?;
    }
    row.fill(0.0);
    row[N] = -1.0;
    lp.add_constraint(&row, 0.0)?;

    let params = SolverParams::default();
    let sol = sdlp::solve(&lp, &params)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Unbounded => {
            return Err(Error::DegenerateBody("scale is unbounded; the body hull does not surround its seed".into()))
        }
        LpStatus::Infeasible => return Err(Error::Internal("scale program lost its trivial feasible point".into())),
    }
    let certificate = SVector::<f64, N>::from_column_slice(&sol.z_star[..N]);
    let beta = sol.z_star[N].max(0.0);
    finish(&lp, &params, &sol, beta, certificate, body.points.len(), obstacle.len())
}

/// Minimum scale with a world-frame obstacle and the body at `pose`.
pub fn min_scale_vrep<const N: usize, P: RigidPose<N>>(body: &ConvexSetV<N>, obstacle_world: &[Point<N>], pose: &P) -> Result<ScaleResult<N>> {
    let in_body: Vec<Point<N>> = obstacle_world.iter().map(|p| pose.world_to_body(p)).collect();
    let mut result = min_scale_vrep_bodyframe(body, &in_body)?;
    result.active_obstacle_world = result.active_obstacle.iter().map(|&j| obstacle_world[j]).collect();
    Ok(result)
}

/// Minimum scale between two halfspace-described sets, both in the world frame.
pub fn min_scale_hrep<const N: usize>(body: &ConvexSetH<N>, obstacle: &ConvexSetH<N>) -> Result<ScaleResult<N>> {
    check_dim::<N>()?;
    let d = N + 1;
    let mut objective = vec![0.0; d];
    objective[N] = -1.0;
    let mut lp = LowDimLP::with_capacity(d, &objective, body.normals.len() + obstacle.normals.len() + 1)?;
    let mut row = vec![0.0; d];
    for a in &body.normals {
        row[..N].copy_from_slice(a.as_slice());
        row[N] = -1.0;
        lp.add_constraint(&row, a.dot(&body.interior_point))?;
    }
    for a in &obstacle.normals {
        row[..N].copy_from_slice(a.as_slice());
        row[N] = 0.0;
        lp.add_constraint(&row, 1.0 + a.dot(&obstacle.interior_point))?;
    }
    row.fill(0.0);
    row[N] = -1.0;
    lp.add_constraint(&row, 0.0)?;

    let params = SolverParams::default();
    let sol = sdlp::solve(&lp, &params)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(Error::Internal("scale program lost its feasible point at the obstacle center".into())),
        LpStatus::Unbounded => return Err(Error::DegenerateBody("scale is unbounded; the body is not bounded".into())),
    }
    let witness = SVector::<f64, N>::from_column_slice(&sol.z_star[..N]);
    let beta = sol.z_star[N].max(0.0);
    finish(&lp, &params, &sol, beta, witness, body.normals.len(), obstacle.normals.len())
}

/// `β < threshold`; the usual threshold is 1, planners keep a margin above it.
pub fn is_colliding<const N: usize>(result: &ScaleResult<N>, threshold: f64) -> bool {
    result.beta < threshold
}
