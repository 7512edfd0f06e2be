//! Command implementations behind the `linscale` binary. Each command returns its stdout
//! text so it can be driven from tests without spawning a process.

pub mod bench;
pub mod scene;
pub mod svg;

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use linscale::geometry::{Point2, Point3, Pose2, Pose3, Quaternion, RigidPose};
use linscale::gradient::{scale_with_gradient_se2, scale_with_gradient_se3};
use linscale::oracle::{self, finite_diff, FdParams};
use linscale::scale::{min_scale_vrep, ConvexSetV, ScaleResult};
use linscale::trajopt::{plan, CostConfig, KnotState, PlanOptions};

pub use scene::SceneFile;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<linscale::Error> for CliError {
    fn from(e: linscale::Error) -> Self {
        match e {
            linscale::Error::InvalidArgument(m) => CliError::Validation(m),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Pose flags as given on the command line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PoseArgs {
    pub t: Option<Vec<f64>>,
    pub q: Option<Vec<f64>>,
    pub theta: Option<f64>,
}

impl PoseArgs {
    fn translation(&self, dim: usize) -> CliResult<Vec<f64>> {
        match &self.t {
            None => Ok(vec![0.0; dim]),
            Some(t) if t.len() == dim => Ok(t.clone()),
            Some(t) => Err(CliError::Validation(format!("--t: expected {dim} values, got {}", t.len()))),
        }
    }

    pub fn pose2(&self) -> CliResult<Pose2> {
        if self.q.is_some() {
            return Err(CliError::Validation("--q: 2D scenes take --theta".into()));
        }
        let t = self.translation(2)?;
        Ok(Pose2::new(self.theta.unwrap_or(0.0), Point2::new(t[0], t[1]))?)
    }

    pub fn pose3(&self) -> CliResult<Pose3> {
        if self.theta.is_some() {
            return Err(CliError::Validation("--theta: 3D scenes take --q".into()));
        }
        let t = self.translation(3)?;
        let q = match &self.q {
            None => Quaternion::IDENTITY,
            Some(q) if q.len() == 4 => Quaternion::new(q[0], q[1], q[2], q[3]),
            Some(q) => return Err(CliError::Validation(format!("--q: expected 4 values, got {}", q.len()))),
        };
        Ok(Pose3::new(q, Point3::new(t[0], t[1], t[2]))?)
    }
}

fn join(idx: &[usize]) -> String {
    idx.iter().map(usize::to_string).collect::<Vec<_>>().join(";")
}

fn eval_rows<const N: usize, P: RigidPose<N>>(
    body: &ConvexSetV<N>,
    obstacles: &[Vec<linscale::geometry::Point<N>>],
    pose: &P,
    check_oracle: bool,
    out: &mut String,
) -> CliResult<()> {
    for (i, obstacle) in obstacles.iter().enumerate() {
        let clock = Instant::now();
        let r: ScaleResult<N> = min_scale_vrep(body, obstacle, pose)?;
        let ns = clock.elapsed().as_nanos();
        write!(out, "{i},{},{},{},{},{ns}", r.beta, join(&r.active_body), join(&r.active_obstacle), u8::from(r.degenerate)).unwrap();
        if check_oracle {
            let in_body: Vec<_> = obstacle.iter().map(|p| pose.world_to_body(p)).collect();
            let b = oracle::min_scale_bisection(body, &in_body)?;
            write!(out, ",{b},{}", (b - r.beta).abs()).unwrap();
        }
        out.push('\n');
    }
    Ok(())
}

/// `eval`: one CSV row per obstacle with the scale and its active sets.
pub fn cmd_eval(scene: &SceneFile, pose: &PoseArgs, check_oracle: bool) -> CliResult<String> {
    let mut out = String::from("obstacle,beta,active_body,active_obstacle,degenerate,time_ns");
    if check_oracle {
        out.push_str(",beta_oracle,abs_diff");
    }
    out.push('\n');
    match scene.dim {
        2 => eval_rows(&scene.body::<2>()?, &scene.obstacles_at::<2>(0.0)?, &pose.pose2()?, check_oracle, &mut out)?,
        _ => eval_rows(&scene.body::<3>()?, &scene.obstacles_at::<3>(0.0)?, &pose.pose3()?, check_oracle, &mut out)?,
    }
    Ok(out)
}

fn fmt_row(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

fn max_rel_err(analytic: &[f64], fd: &[f64]) -> f64 {
    let scale = fd.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let err = analytic.iter().zip(fd).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    if scale > 0.0 {
        err / scale
    } else {
        err
    }
}

/// `grad`: analytic gradients per obstacle, with an optional central-difference check.
pub fn cmd_grad(scene: &SceneFile, pose: &PoseArgs, fd_check: bool) -> CliResult<String> {
    let names: &[&str] = if scene.dim == 2 {
        &["d_beta_d_tx", "d_beta_d_ty", "d_beta_d_theta"]
    } else {
        &["d_beta_d_tx", "d_beta_d_ty", "d_beta_d_tz", "d_beta_d_qw", "d_beta_d_qx", "d_beta_d_qy", "d_beta_d_qz"]
    };
    let mut out = format!("obstacle,beta,{},subgradient", names.join(","));
    if fd_check {
        for n in names {
            write!(out, ",fd_{}", n.trim_start_matches("d_beta_d_")).unwrap();
        }
        out.push_str(",max_rel_err");
    }
    out.push('\n');
    let fd_params = FdParams::default();

    if scene.dim == 2 {
        let body = scene.body::<2>()?;
        let p = pose.pose2()?;
        for (i, obstacle) in scene.obstacles_at::<2>(0.0)?.iter().enumerate() {
            let (r, g) = scale_with_gradient_se2(&body, obstacle, &p)?;
            let (values, flag) = match g {
                Some(g) => (vec![g.d_beta_d_t[0], g.d_beta_d_t[1], g.d_beta_d_theta], g.subgradient),
                None => (vec![0.0; 3], true),
            };
            write!(out, "{i},{},{},{}", r.beta, fmt_row(&values), u8::from(flag)).unwrap();
            if fd_check {
                let fd = finite_diff(
                    |x| Pose2::new(x[2], Point2::new(x[0], x[1])).and_then(|q| min_scale_vrep(&body, obstacle, &q)).map_or(f64::NAN, |r| r.beta),
                    &[p.translation.x, p.translation.y, p.heading],
                    &fd_params,
                )?;
                write!(out, ",{},{}", fmt_row(&fd), max_rel_err(&values, &fd)).unwrap();
            }
            out.push('\n');
        }
    } else {
        let body = scene.body::<3>()?;
        let p = pose.pose3()?;
        for (i, obstacle) in scene.obstacles_at::<3>(0.0)?.iter().enumerate() {
            let (r, g) = scale_with_gradient_se3(&body, obstacle, &p)?;
            let (values, flag) = match g {
                Some(g) => (g.d_beta_d_t.iter().chain(&g.d_beta_d_q).copied().collect(), g.subgradient),
                None => (vec![0.0; 7], true),
            };
            write!(out, "{i},{},{},{}", r.beta, fmt_row(&values), u8::from(flag)).unwrap();
            if fd_check {
                let (t, q) = (p.translation, p.rotation);
                let fd = finite_diff(
                    |x| {
                        Pose3::from_raw(Quaternion::new(x[3], x[4], x[5], x[6]), Point3::new(x[0], x[1], x[2]), p.rotation_center)
                            .and_then(|q| min_scale_vrep(&body, obstacle, &q))
                            .map_or(f64::NAN, |r| r.beta)
                    },
                    &[t.x, t.y, t.z, q.w, q.x, q.y, q.z],
                    &fd_params,
                )?;
                write!(out, ",{},{}", fmt_row(&fd), max_rel_err(&values, &fd)).unwrap();
            }
            out.push('\n');
        }
    }
    Ok(out)
}

/// Planning request: start and goal as `x,y` or `x,y,vx,vy`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanArgs {
    pub start: Vec<f64>,
    pub goal: Vec<f64>,
    pub segments: usize,
    pub duration: f64,
}

fn knot(flag: &str, v: &[f64], fallback_velocity: Point2) -> CliResult<KnotState> {
    match v.len() {
        2 => Ok(KnotState::new(Point2::new(v[0], v[1]), fallback_velocity, Point2::zeros())),
        4 => Ok(KnotState::new(Point2::new(v[0], v[1]), Point2::new(v[2], v[3]), Point2::zeros())),
        n => Err(CliError::Validation(format!("{flag}: expected x,y or x,y,vx,vy, got {n} values"))),
    }
}

/// `plan`: optimizes a trajectory and returns the report as JSON. The trajectory and SVG
/// are written when paths are given.
pub fn cmd_plan(scene: &SceneFile, args: &PlanArgs, out: Option<&Path>, svg: Option<&Path>) -> CliResult<String> {
    let scenario = scene.scenario()?;
    if args.start.len() < 2 || args.goal.len() < 2 {
        return Err(CliError::Validation("--start/--goal: expected x,y or x,y,vx,vy".into()));
    }
    if !(args.duration > 0.0 && args.duration.is_finite()) {
        return Err(CliError::Validation("--duration: must be positive".into()));
    }
    let cruise = (Point2::new(args.goal[0], args.goal[1]) - Point2::new(args.start[0], args.start[1])) / args.duration;
    let start = knot("--start", &args.start, cruise)?;
    let goal = knot("--goal", &args.goal, cruise)?;
    let options = PlanOptions { segments: args.segments, duration: args.duration, ..PlanOptions::default() };
    let (traj, report) = plan(&scenario, start, goal, &options, &CostConfig::default())?;
    if let Some(path) = out {
        let text = serde_json::to_string_pretty(&traj).expect("trajectory serializes") + "\n";
        std::fs::write(path, text).map_err(|e| CliError::Validation(format!("--out {}: {e}", path.display())))?;
    }
    if let Some(path) = svg {
        let text = svg::render(scene, &scenario, &traj)?;
        std::fs::write(path, text).map_err(|e| CliError::Validation(format!("--svg {}: {e}", path.display())))?;
    }
    Ok(serde_json::to_string_pretty(&report).expect("report serializes") + "\n")
}
