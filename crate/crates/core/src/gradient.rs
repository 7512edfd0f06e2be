//! Derivatives of the minimum scale with respect to the body's rigid motion.
//!
//! At a nondegenerate optimum exactly `n + 1` constraints of the V-rep program are tight:
//! body rows `(p_b − s)·α = 1` and obstacle rows `(p_o − s)·α = β`, with the obstacle points
//! expressed in the body frame. Only the obstacle points move with the pose, so `β` is
//! differentiated through them. The split of the basis decides which closed form applies:
//!
//! * [`ActiveCase::BodyHeavy`] (`n` body, 1 obstacle): `α = A⁻¹E` is pose independent and
//!   `β = (p_o − s)·α`.
//! * [`ActiveCase::Mixed`] (3D only, 2 body, 2 obstacle): the two obstacle rows are
//!   subtracted, giving `A = [b₁ − s; b₂ − s; p_o¹ − p_o²]`.
//! * [`ActiveCase::ObstacleHeavy`] (1 body, `n` obstacle): `A α + B β = 0` with
//!   `B = −𝟙` and `C α = 1`, so `β = −1 / (C A⁻¹ B)`.
//!
//! Rotation enters as `G_k = (∂Rᵀ/∂k)·R` per rotation parameter, taken from
//! [`RigidPose::rotation_sensitivities`].

use nalgebra::{DMatrix, DVector, SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, Point2, Point3, Pose2, Pose3, RigidPose};
use crate::scale::{min_scale_vrep, ConvexSetV, ScaleResult};

/// Largest accepted condition number of the `A` block.
pub const MAX_CONDITION: f64 = 1e10;
/// Largest accepted residual of the assembled system against the LP solution.
pub const RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ActiveCase {
    BodyHeavy,
    Mixed,
    ObstacleHeavy,
}

/// The tight constraints of a scale optimum, in block form `[A B; C D] (α, β) = (E, F)`.
///
/// Block contents depend on [`ActiveCase`]; see the module docs. `D` and `F` are the scalar
/// blocks of the last row: `D = −1, F = 0` when `β = C α` (body-heavy and mixed), `D = 0,
/// F = 1` for the obstacle-heavy case.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveConstraintSystem<const N: usize> {
    pub case: ActiveCase,
    pub body_points: Vec<Point<N>>,
    pub obstacle_points_body: Vec<Point<N>>,
    pub obstacle_points_world: Vec<Point<N>>,
    pub seed: Point<N>,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: DVector<f64>,
    pub d: f64,
    pub e: DVector<f64>,
    pub f: f64,
    pub alpha: SVector<f64, N>,
    pub beta: f64,
    /// The optimum had more tight constraints than the basis; derivatives are one element
    /// of the subdifferential.
    pub subgradient: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleGradient3 {
    pub d_beta_d_t: [f64; 3],
    /// Per raw quaternion component `(w, x, y, z)`.
    pub d_beta_d_q: [f64; 4],
    pub subgradient: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleGradient2 {
    pub d_beta_d_t: [f64; 2],
    pub d_beta_d_theta: f64,
    pub subgradient: bool,
}

fn to_dvector<const N: usize>(v: &SVector<f64, N>) -> DVector<f64> {
    DVector::from_column_slice(v.as_slice())
}

fn condition_number(a: &DMatrix<f64>) -> f64 {
    let sv = a.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Builds the active system with strict checks: a degenerate optimum is an error.
pub fn assemble_active_system<const N: usize, P: RigidPose<N>>(
    body: &ConvexSetV<N>,
    result: &ScaleResult<N>,
    pose: &P,
) -> Result<ActiveConstraintSystem<N>> {
    if result.degenerate {
        return Err(Error::SubgradientOnly(format!(
            "{} body and {} obstacle constraints in the basis at beta = {}",
            result.active_body.len(),
            result.active_obstacle.len(),
            result.beta
        )));
    }
    assemble_active_system_lenient(body, result, pose)
}

/// Like [`assemble_active_system`], but a degenerate optimum with a usable basis is accepted
/// and flagged as a subgradient. A basis that holds the `β ≥ 0` bound is still rejected.
pub fn assemble_active_system_lenient<const N: usize, P: RigidPose<N>>(
    body: &ConvexSetV<N>,
    result: &ScaleResult<N>,
    pose: &P,
) -> Result<ActiveConstraintSystem<N>> {
    let nb = result.active_body.len();
    let no = result.active_obstacle.len();
    if nb + no != N + 1 || nb == 0 || no == 0 {
        return Err(Error::SubgradientOnly(format!(
            "basis split ({nb}, {no}) does not determine the scale (beta = {})",
            result.beta
        )));
    }
    if result.active_obstacle_world.len() != no {
        return Err(Error::invalid("scale result carries no world-frame obstacle points"));
    }
    let body_points: Vec<Point<N>> = result
        .active_body
        .iter()
        .map(|&i| body.points.get(i).copied().ok_or_else(|| Error::invalid(format!("active body index {i} out of range"))))
        .collect::<Result<_>>()?;
    let obstacle_points_world = result.active_obstacle_world.clone();
    let obstacle_points_body: Vec<Point<N>> = obstacle_points_world.iter().map(|p| pose.world_to_body(p)).collect();
    let s = body.seed;

    let case = match (nb, no) {
        (b, 1) if b == N => ActiveCase::BodyHeavy,
        (1, o) if o == N => ActiveCase::ObstacleHeavy,
        (2, 2) if N == 3 => ActiveCase::Mixed,
        _ => return Err(Error::Internal(format!("unexpected active split ({nb}, {no}) in {N}D"))),
    };

    let row = |p: &Point<N>| DVector::from_column_slice((p - s).as_slice()).transpose();
    let (a, b, c, d, e, f) = match case {
        ActiveCase::BodyHeavy => {
            let rows: Vec<_> = body_points.iter().map(row).collect();
            (
                DMatrix::from_rows(&rows),
                DVector::zeros(N),
                to_dvector(&(obstacle_points_body[0] - s)),
                -1.0,
                DVector::from_element(N, 1.0),
                0.0,
            )
        }
        ActiveCase::Mixed => {
            let delta = obstacle_points_body[0] - obstacle_points_body[1];
            let rows = vec![row(&body_points[0]), row(&body_points[1]), DVector::from_column_slice(delta.as_slice()).transpose()];
            let mut e = DVector::from_element(N, 1.0);
            e[2] = 0.0;
            (DMatrix::from_rows(&rows), DVector::zeros(N), to_dvector(&(obstacle_points_body[0] - s)), -1.0, e, 0.0)
        }
        ActiveCase::ObstacleHeavy => {
            let rows: Vec<_> = obstacle_points_body.iter().map(row).collect();
            (
                DMatrix::from_rows(&rows),
                DVector::from_element(N, -1.0),
                to_dvector(&(body_points[0] - s)),
                0.0,
                DVector::zeros(N),
                1.0,
            )
        }
    };

    let cond = condition_number(&a);
    if !(cond <= MAX_CONDITION) {
        return Err(Error::DegenerateActiveSet(format!("A block condition number {cond:e}")));
    }

    // Full tight system in (α, β): body rows, then obstacle rows.
    let mut m = DMatrix::zeros(N + 1, N + 1);
    let mut rhs = DVector::zeros(N + 1);
    for (i, p) in body_points.iter().enumerate() {
        m.view_mut((i, 0), (1, N)).copy_from(&row(p));
        rhs[i] = 1.0;
    }
    for (j, p) in obstacle_points_body.iter().enumerate() {
        m.view_mut((nb + j, 0), (1, N)).copy_from(&(-row(p)));
        m[(nb + j, N)] = 1.0;
    }
    let z = m
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::DegenerateActiveSet("tight system is singular".into()))?;
    let alpha = SVector::<f64, N>::from_iterator(z.iter().take(N).copied());
    let beta = z[N];
    let scale = 1.0 + result.beta.abs() + result.certificate.norm();
    let residual = (beta - result.beta).abs().max((alpha - result.certificate).amax());
    if !(residual <= RESIDUAL_TOL * scale) {
        return Err(Error::DegenerateActiveSet(format!(
            "tight system disagrees with the LP solution by {residual:e}"
        )));
    }

    Ok(ActiveConstraintSystem {
        case,
        body_points,
        obstacle_points_body,
        obstacle_points_world,
        seed: s,
        a,
        b,
        c,
        d,
        e,
        f,
        alpha,
        beta,
        subgradient: result.degenerate,
    })
}

fn solve_a(sys_a: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    sys_a
        .clone()
        .lu()
        .solve(rhs)
        .ok_or_else(|| Error::DegenerateActiveSet("A block is singular".into()))
}

/// Case formulas shared by both dimensions. `r_inv_t` maps body-frame translation
/// sensitivities to the world frame (`R` for an orthonormal rotation).
fn case_gradient<const N: usize>(
    sys: &ActiveConstraintSystem<N>,
    r_inv_t: &SMatrix<f64, N, N>,
    sensitivities: &[SMatrix<f64, N, N>],
) -> Result<(SVector<f64, N>, Vec<f64>)> {
    let to_d = |m: &SMatrix<f64, N, N>| DMatrix::from_column_slice(N, N, m.as_slice());
    let r = to_d(r_inv_t);
    let beta = sys.beta;
    let (dt, dk): (DVector<f64>, Vec<f64>) = match sys.case {
        ActiveCase::BodyHeavy => {
            let alpha = solve_a(&sys.a, &sys.e)?;
            let p_o = to_dvector(&sys.obstacle_points_body[0]);
            let dk = sensitivities.iter().map(|g| -(p_o.transpose() * to_d(g) * &alpha)[0]).collect();
            (-(&r * &alpha), dk)
        }
        ActiveCase::Mixed => {
            let alpha = solve_a(&sys.a, &sys.e)?;
            let p_o1 = to_dvector(&sys.obstacle_points_body[0]);
            let delta = to_dvector(&(sys.obstacle_points_body[0] - sys.obstacle_points_body[1]));
            let c_ainv = solve_a(&sys.a.transpose(), &sys.c)?;
            let dk = sensitivities
                .iter()
                .map(|g| {
                    let g = to_d(g);
                    let mut da = DMatrix::zeros(N, N);
                    da.row_mut(2).copy_from(&(delta.transpose() * &g));
                    -(p_o1.transpose() * &g * &alpha)[0] + (c_ainv.transpose() * da * &alpha)[0]
                })
                .collect();
            (-(&r * &alpha), dk)
        }
        ActiveCase::ObstacleHeavy => {
            let u = solve_a(&sys.a, &sys.b)?;
            let c_ainv = solve_a(&sys.a.transpose(), &sys.c)?;
            let p_rows = DMatrix::from_rows(
                &sys.obstacle_points_body.iter().map(|p| DVector::from_column_slice(p.as_slice()).transpose()).collect::<Vec<_>>(),
            );
            let dk = sensitivities
                .iter()
                .map(|g| {
                    let da = -(&p_rows * to_d(g));
                    -beta * beta * (c_ainv.transpose() * da * &u)[0]
                })
                .collect();
            ((&r * &u) * beta, dk)
        }
    };
    Ok((SVector::<f64, N>::from_iterator(dt.iter().copied()), dk))
}

fn check_system<const N: usize>(sys: &ActiveConstraintSystem<N>) -> Result<()> {
    if sys.body_points.len() + sys.obstacle_points_body.len() != N + 1 {
        return Err(Error::invalid("active system does not hold n + 1 constraints"));
    }
    Ok(())
}

fn r_inv_t<const N: usize, P: RigidPose<N>>(pose: &P) -> Result<SMatrix<f64, N, N>> {
    let r = pose.rotation_matrix();
    let d = DMatrix::from_column_slice(N, N, r.as_slice());
    let inv = d.try_inverse().ok_or_else(|| Error::invalid("rotation matrix is singular"))?;
    Ok(SMatrix::<f64, N, N>::from_column_slice(inv.transpose().as_slice()))
}

pub fn grad_scale_se3(sys: &ActiveConstraintSystem<3>, pose: &Pose3) -> Result<ScaleGradient3> {
    check_system(sys)?;
    let (dt, dq) = case_gradient(sys, &r_inv_t(pose)?, &pose.rotation_sensitivities())?;
    Ok(ScaleGradient3 {
        d_beta_d_t: [dt[0], dt[1], dt[2]],
        d_beta_d_q: [dq[0], dq[1], dq[2], dq[3]],
        subgradient: sys.subgradient,
    })
}

pub fn grad_scale_se2(sys: &ActiveConstraintSystem<2>, pose: &Pose2) -> Result<ScaleGradient2> {
    check_system(sys)?;
    if sys.case == ActiveCase::Mixed {
        return Err(Error::Internal("mixed split cannot occur in 2D".into()));
    }
    let (dt, dth) = case_gradient(sys, &r_inv_t(pose)?, &pose.rotation_sensitivities())?;
    Ok(ScaleGradient2 { d_beta_d_t: [dt[0], dt[1]], d_beta_d_theta: dth[0], subgradient: sys.subgradient })
}

/// Time derivatives of a pose, paired with the matching gradient type.
pub trait TimeGradient {
    type Rates;
    fn time_derivative(&self, rates: &Self::Rates) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Se3Rates {
    pub t_dot: Point3,
    pub q_dot: [f64; 4],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Se2Rates {
    pub t_dot: Point2,
    pub theta_dot: f64,
}

impl TimeGradient for ScaleGradient3 {
    type Rates = Se3Rates;
    fn time_derivative(&self, rates: &Se3Rates) -> f64 {
        let dt: f64 = (0..3).map(|i| self.d_beta_d_t[i] * rates.t_dot[i]).sum();
        dt + (0..4).map(|i| self.d_beta_d_q[i] * rates.q_dot[i]).sum::<f64>()
    }
}

impl TimeGradient for ScaleGradient2 {
    type Rates = Se2Rates;
    fn time_derivative(&self, rates: &Se2Rates) -> f64 {
        self.d_beta_d_t[0] * rates.t_dot.x + self.d_beta_d_t[1] * rates.t_dot.y + self.d_beta_d_theta * rates.theta_dot
    }
}

/// `dβ/dτ` by the chain rule. For an obstacle moving at `v_o`, pass the relative
/// translation rate `ṫ − v_o`.
pub fn grad_scale_time<G: TimeGradient>(grad: &G, rates: &G::Rates) -> f64 {
    grad.time_derivative(rates)
}

/// Scale and, where defined, its SE(2) gradient. `None` means the scale is pinned at zero
/// (seed inside the obstacle) or the active set is too degenerate to differentiate.
pub fn scale_with_gradient_se2(
    body: &ConvexSetV<2>,
    obstacle_world: &[Point2],
    pose: &Pose2,
) -> Result<(ScaleResult<2>, Option<ScaleGradient2>)> {
    let result = min_scale_vrep(body, obstacle_world, pose)?;
    let grad = match assemble_active_system_lenient(body, &result, pose) {
        Ok(sys) => Some(grad_scale_se2(&sys, pose)?),
        Err(Error::SubgradientOnly(_) | Error::DegenerateActiveSet(_)) => None,
        Err(e) => return Err(e),
    };
    Ok((result, grad))
}

/// 3D counterpart of [`scale_with_gradient_se2`].
pub fn scale_with_gradient_se3(
    body: &ConvexSetV<3>,
    obstacle_world: &[Point3],
    pose: &Pose3,
) -> Result<(ScaleResult<3>, Option<ScaleGradient3>)> {
    let result = min_scale_vrep(body, obstacle_world, pose)?;
    let grad = match assemble_active_system_lenient(body, &result, pose) {
        Ok(sys) => Some(grad_scale_se3(&sys, pose)?),
        Err(Error::SubgradientOnly(_) | Error::DegenerateActiveSet(_)) => None,
        Err(e) => return Err(e),
    };
    Ok((result, grad))
}
