//! End-to-end acceptance checks. Runs without the libtest harness so every criterion prints
//! its PASS/FAIL line, sequentially, with its own wall time.

use std::collections::HashMap;
use std::path::PathBuf;
use std::time::Instant;

use linscale::geometry::{Point, Point2, Point3, Pose2, Pose3, Quaternion, RigidPose};
use linscale::gradient::{assemble_active_system, grad_scale_se2, grad_scale_se3, ActiveCase};
use linscale::oracle::{finite_diff, hulls_intersect, min_scale_bisection, solve_lp_enumeration, FdParams};
use linscale::scale::{min_scale_hrep, min_scale_vrep, min_scale_vrep_bodyframe, ConvexSetH, ConvexSetV, ScaleResult};
use linscale::sdlp::{self, LowDimLP, LpStatus, SolverParams};
use linscale::trajopt::{
    lbfgs_minimize, mass_point_guess, plan, total_cost, CostConfig, KnotParametrization, KnotState, LbfgsParams, PlanOptions,
    PlanStatus,
};
use linscale_cli::bench;
use linscale_cli::SceneFile;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn scene_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenes").join(name)
}

fn cloud<const N: usize>(rng: &mut ChaCha8Rng, n: usize, center: Point<N>, radius: f64) -> Vec<Point<N>> {
    (0..n).map(|_| center + Point::<N>::from_fn(|_, _| rng.random_range(-1.0..1.0)) * radius).collect()
}

fn direction<const N: usize>(rng: &mut ChaCha8Rng) -> Point<N> {
    loop {
        let v = Point::<N>::from_fn(|_, _| rng.random_range(-1.0..1.0));
        if v.norm() > 0.1 {
            return v.normalize();
        }
    }
}

fn random_unit_quaternion(rng: &mut ChaCha8Rng) -> Quaternion {
    loop {
        let q = Quaternion::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        if q.norm() > 0.2 {
            return q.normalized().unwrap();
        }
    }
}

// 1. Randomized solver against vertex enumeration.

fn random_lp(rng: &mut ChaCha8Rng, d: usize) -> LowDimLP {
    let objective: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut lp = LowDimLP::new(d, &objective).unwrap();
    let m = rng.random_range(d..=20);
    for _ in 0..m {
        let a: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        lp.add_constraint(&a, rng.random_range(-0.3..1.0)).unwrap();
    }
    lp
}

fn lp_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut counts: HashMap<&str, usize> = HashMap::new();
    let mut mismatches = Vec::new();
    for d in 2..=4 {
        for i in 0..1000 {
            let lp = random_lp(&mut rng, d);
            let fast = sdlp::solve(&lp, &SolverParams { rng_seed: i, ..SolverParams::default() }).unwrap();
            let slow = solve_lp_enumeration(&lp).unwrap();
            let name = match slow.status {
                LpStatus::Optimal => "optimal",
                LpStatus::Infeasible => "infeasible",
                LpStatus::Unbounded => "unbounded",
            };
            *counts.entry(name).or_default() += 1;
            let agree = fast.status == slow.status
                && (slow.status != LpStatus::Optimal || (fast.value - slow.value).abs() <= 1e-8 * slow.value.abs().max(1.0));
            if !agree {
                mismatches.push(format!("d={d} #{i}: {:?} {} vs {:?} {}", fast.status, fast.value, slow.status, slow.value));
            }
        }
    }
    outcome(mismatches.is_empty(), format!("3000 programs {counts:?}, {} mismatches {:?}", mismatches.len(), mismatches.first()))
}

// 2. Scale against bisection on the dilated hull.

fn scale_pairs<const N: usize, P: RigidPose<N>>(rng: &mut ChaCha8Rng, pose: impl Fn(&mut ChaCha8Rng) -> P) -> f64 {
    let mut worst = 0.0_f64;
    for _ in 0..200 {
        let (nb, no) = (rng.random_range(N + 1..12), rng.random_range(1..12));
        let center = direction::<N>(rng) * rng.random_range(0.0..5.0);
        let radius = rng.random_range(0.1..1.5);
        let body = ConvexSetV::new(cloud::<N>(rng, nb, Point::<N>::zeros(), 1.0)).unwrap();
        let obstacle = cloud::<N>(rng, no, center, radius);
        let p = pose(rng);
        let lp = min_scale_vrep(&body, &obstacle, &p).unwrap().beta;
        let in_body: Vec<Point<N>> = obstacle.iter().map(|o| p.world_to_body(o)).collect();
        worst = worst.max((lp - min_scale_bisection(&body, &in_body).unwrap()).abs());
    }
    worst
}

fn scale_vs_bisection() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let worst2 = scale_pairs::<2, _>(&mut rng, |r| {
        Pose2::new(r.random_range(-3.0..3.0), Point2::new(r.random_range(-0.5..0.5), r.random_range(-0.5..0.5))).unwrap()
    });
    let worst3 = scale_pairs::<3, _>(&mut rng, |r| Pose3::new(random_unit_quaternion(r), Point3::from_fn(|_, _| r.random_range(-0.5..0.5))).unwrap());
    let square = ConvexSetV::new(vec![Point2::new(1.0, 1.0), Point2::new(-1.0, 1.0), Point2::new(-1.0, -1.0), Point2::new(1.0, -1.0)]).unwrap();
    let beta = |o: &[Point2]| min_scale_vrep_bodyframe(&square, o).unwrap().beta;
    let trivial = [
        beta(&[Point2::new(3.0, 0.0)]) - 3.0,
        beta(&[Point2::new(0.5, 0.0)]) - 0.5,
        beta(&[Point2::new(-1.0, -1.0), Point2::new(2.0, -1.0), Point2::new(0.0, 2.0)]),
    ];
    let trivial_ok = trivial.iter().all(|e| e.abs() <= 1e-12);
    outcome(
        worst2 <= 1e-7 && worst3 <= 1e-7 && trivial_ok,
        format!("max |Δβ| 2D {worst2:.2e}, 3D {worst3:.2e}; trivial cases errors {trivial:?}"),
    )
}

// 3. The same boxes and simplices in vertex and halfspace form.

fn box_shape<const N: usize>(rng: &mut ChaCha8Rng, center: Point<N>) -> (Vec<Point<N>>, ConvexSetH<N>) {
    let half = Point::<N>::from_fn(|_, _| rng.random_range(0.2..1.5));
    let corners = (0..1usize << N).map(|mask| center + Point::<N>::from_fn(|k, _| if mask >> k & 1 == 1 { half[k] } else { -half[k] })).collect();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for k in 0..N {
        for sign in [1.0, -1.0] {
            let n = Point::<N>::from_fn(|i, _| if i == k { sign } else { 0.0 });
            b.push(n.dot(&center) + half[k]);
            a.push(n);
        }
    }
    (corners, ConvexSetH::from_inequalities(&a, &b, center).unwrap())
}

/// A random nondegenerate simplex and its facet inequalities from barycentric coordinates.
fn simplex_shape<const N: usize>(rng: &mut ChaCha8Rng, center: Point<N>) -> (Vec<Point<N>>, ConvexSetH<N>) {
    loop {
        let verts = cloud::<N>(rng, N + 1, center, 1.5);
        let edges = DMatrix::from_fn(N, N, |r, c| verts[c + 1][r] - verts[0][r]);
        if edges.determinant().abs() < 0.3 {
            continue;
        }
        let inv = edges.try_inverse().unwrap();
        let mut a = Vec::new();
        let mut b = Vec::new();
        let mut sum = Point::<N>::zeros();
        for i in 0..N {
            let r = Point::<N>::from_fn(|k, _| inv[(i, k)]);
            a.push(-r);
            b.push(-r.dot(&verts[0]));
            sum += r;
        }
        a.push(sum);
        b.push(1.0 + sum.dot(&verts[0]));
        let centroid = verts.iter().fold(Point::<N>::zeros(), |s, v| s + v) / (N + 1) as f64;
        return (verts, ConvexSetH::from_inequalities(&a, &b, centroid).unwrap());
    }
}

fn cross_pair<const N: usize>(rng: &mut ChaCha8Rng, body_is_box: bool) -> f64 {
    let far = direction::<N>(rng) * rng.random_range(0.0..6.0);
    let (bv, bh) = if body_is_box { box_shape::<N>(rng, Point::<N>::zeros()) } else { simplex_shape::<N>(rng, Point::<N>::zeros()) };
    let (ov, oh) = if body_is_box { simplex_shape::<N>(rng, far) } else { box_shape::<N>(rng, far) };
    let body = ConvexSetV::with_seed(bv, bh.interior_point).unwrap();
    let v = min_scale_vrep_bodyframe(&body, &ov).unwrap().beta;
    let h = min_scale_hrep(&bh, &oh).unwrap().beta;
    (v - h).abs()
}

fn cross_representation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0_f64;
    for i in 0..50 {
        worst = worst.max(cross_pair::<2>(&mut rng, i % 2 == 0));
        worst = worst.max(cross_pair::<3>(&mut rng, i % 2 == 0));
    }
    outcome(worst <= 1e-8, format!("100 pairs, max |β_V − β_H| {worst:.2e}"))
}

// 4. Collision predicate against hull intersection.

fn predicate_pairs<const N: usize, P: RigidPose<N>>(rng: &mut ChaCha8Rng, pose: impl Fn(&mut ChaCha8Rng) -> P) -> (usize, usize, usize) {
    let (mut wrong, mut banded, mut hits) = (0, 0, 0);
    for _ in 0..500 {
        let (nb, no) = (rng.random_range(N + 1..10), rng.random_range(1..10));
        let center = direction::<N>(rng) * rng.random_range(0.5..3.5);
        let radius = rng.random_range(0.1..1.2);
        let body = ConvexSetV::new(cloud::<N>(rng, nb, Point::<N>::zeros(), 1.0)).unwrap();
        let obstacle = cloud::<N>(rng, no, center, radius);
        let p = pose(rng);
        let beta = min_scale_vrep(&body, &obstacle, &p).unwrap().beta;
        let world: Vec<Point<N>> = body.points.iter().map(|b| p.body_to_world(b)).collect();
        let touching = hulls_intersect(&world, &obstacle).unwrap();
        hits += usize::from(touching);
        if (beta - 1.0).abs() <= 1e-9 {
            banded += 1;
        } else if (beta < 1.0 - 1e-9) != touching {
            wrong += 1;
        }
    }
    (wrong, banded, hits)
}

fn collision_predicate() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (w2, b2, h2) = predicate_pairs::<2, _>(&mut rng, |r| {
        Pose2::new(r.random_range(-3.0..3.0), Point2::new(r.random_range(-0.5..0.5), r.random_range(-0.5..0.5))).unwrap()
    });
    let (w3, b3, h3) = predicate_pairs::<3, _>(&mut rng, |r| Pose3::new(random_unit_quaternion(r), Point3::from_fn(|_, _| r.random_range(-0.5..0.5))).unwrap());
    outcome(
        w2 + w3 == 0,
        format!("1000 pairs, {} intersecting, {} disagreements, {} inside the ±1e-9 band", h2 + h3, w2 + w3, b2 + b3),
    )
}

// 5. Analytic gradients against central differences.

fn close(analytic: &[f64], fd: &[f64]) -> bool {
    let scale = fd.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let err = analytic.iter().zip(fd).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    err <= (1e-4 * scale).max(1e-7)
}

fn same_basis<const N: usize>(a: &ScaleResult<N>, b: &ScaleResult<N>) -> bool {
    !b.degenerate && a.active_body == b.active_body && a.active_obstacle == b.active_obstacle
}

/// `None` for degenerate samples and for samples whose basis changes within the FD stencil.
fn fd_check3(body: &ConvexSetV<3>, obstacle: &[Point3], q: Quaternion, t: Point3) -> Option<(ActiveCase, bool)> {
    let pose = Pose3::new(q, t).unwrap();
    let base = min_scale_vrep(body, obstacle, &pose).ok()?;
    if base.degenerate || base.beta <= 0.0 {
        return None;
    }
    let sys = assemble_active_system(body, &base, &pose).ok()?;
    let grad = grad_scale_se3(&sys, &pose).ok()?;
    let mut stable = true;
    let fd = finite_diff(
        |x| {
            let p = Pose3::from_raw(Quaternion::new(x[3], x[4], x[5], x[6]), Point3::new(x[0], x[1], x[2]), Point3::zeros()).unwrap();
            let r = min_scale_vrep(body, obstacle, &p).unwrap();
            stable &= same_basis(&base, &r);
            r.beta
        },
        &[t.x, t.y, t.z, q.w, q.x, q.y, q.z],
        &FdParams::default(),
    )
    .ok()?;
    let analytic: Vec<f64> = grad.d_beta_d_t.iter().chain(&grad.d_beta_d_q).copied().collect();
    stable.then(|| (sys.case, close(&analytic, &fd)))
}

fn fd_check2(body: &ConvexSetV<2>, obstacle: &[Point2], theta: f64, t: Point2) -> Option<(ActiveCase, bool)> {
    let pose = Pose2::new(theta, t).unwrap();
    let base = min_scale_vrep(body, obstacle, &pose).ok()?;
    if base.degenerate || base.beta <= 0.0 {
        return None;
    }
    let sys = assemble_active_system(body, &base, &pose).ok()?;
    let grad = grad_scale_se2(&sys, &pose).ok()?;
    let mut stable = true;
    let fd = finite_diff(
        |x| {
            let r = min_scale_vrep(body, obstacle, &Pose2::new(x[2], Point2::new(x[0], x[1])).unwrap()).unwrap();
            stable &= same_basis(&base, &r);
            r.beta
        },
        &[t.x, t.y, theta],
        &FdParams::default(),
    )
    .ok()?;
    stable.then(|| (sys.case, close(&[grad.d_beta_d_t[0], grad.d_beta_d_t[1], grad.d_beta_d_theta], &fd)))
}

fn gradient_fidelity() -> Outcome {
    const PER_CASE: usize = 500;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut passed3: HashMap<ActiveCase, usize> = HashMap::new();
    let mut failed3: HashMap<ActiveCase, usize> = HashMap::new();
    let cases3 = [ActiveCase::BodyHeavy, ActiveCase::Mixed, ActiveCase::ObstacleHeavy];
    let mut attempts = 0;
    while attempts < 200_000 && cases3.iter().any(|c| passed3.get(c).copied().unwrap_or(0) < PER_CASE) {
        attempts += 1;
        let (nb, no) = match attempts % 3 {
            0 => (rng.random_range(12..30), rng.random_range(1..4)),
            1 => (rng.random_range(4..6), rng.random_range(12..30)),
            _ => (rng.random_range(5..12), rng.random_range(5..12)),
        };
        let body = ConvexSetV::new(cloud::<3>(&mut rng, nb, Point3::zeros(), 1.0)).unwrap();
        let center = direction::<3>(&mut rng) * rng.random_range(3.0..6.0);
        let radius = rng.random_range(0.3..1.5);
        let obstacle = cloud::<3>(&mut rng, no, center, radius);
        let t = Point3::from_fn(|_, _| rng.random_range(-0.5..0.5));
        let q = random_unit_quaternion(&mut rng);
        if let Some((case, ok)) = fd_check3(&body, &obstacle, q, t) {
            *if ok { passed3.entry(case) } else { failed3.entry(case) }.or_default() += 1;
        }
    }

    let mut passed2: HashMap<ActiveCase, usize> = HashMap::new();
    let mut failed2: HashMap<ActiveCase, usize> = HashMap::new();
    let cases2 = [ActiveCase::BodyHeavy, ActiveCase::ObstacleHeavy];
    attempts = 0;
    while attempts < 100_000 && cases2.iter().any(|c| passed2.get(c).copied().unwrap_or(0) < PER_CASE) {
        attempts += 1;
        let (nb, no) = if attempts % 2 == 0 { (rng.random_range(6..20), rng.random_range(1..8)) } else { (rng.random_range(3..6), rng.random_range(6..20)) };
        let body = ConvexSetV::new(cloud::<2>(&mut rng, nb, Point2::zeros(), 1.0)).unwrap();
        let center = direction::<2>(&mut rng) * rng.random_range(3.0..6.0);
        let radius = rng.random_range(0.3..1.5);
        let obstacle = cloud::<2>(&mut rng, no, center, radius);
        let t = Point2::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
        if let Some((case, ok)) = fd_check2(&body, &obstacle, rng.random_range(-3.0..3.0), t) {
            *if ok { passed2.entry(case) } else { failed2.entry(case) }.or_default() += 1;
        }
    }
    let covered = cases3.iter().all(|c| passed3.get(c).copied().unwrap_or(0) >= PER_CASE)
        && cases2.iter().all(|c| passed2.get(c).copied().unwrap_or(0) >= PER_CASE);
    outcome(
        covered && failed3.is_empty() && failed2.is_empty(),
        format!("SE(3) agree {passed3:?} fail {failed3:?}; SE(2) agree {passed2:?} fail {failed2:?}"),
    )
}

// 6. Redundant points and halfspaces leave the scale unchanged.

fn interior_points<const N: usize>(rng: &mut ChaCha8Rng, hull: &[Point<N>], count: usize) -> Vec<Point<N>> {
    (0..count)
        .map(|_| {
            let w: Vec<f64> = hull.iter().map(|_| rng.random_range(0.01..1.0)).collect();
            let total: f64 = w.iter().sum();
            hull.iter().zip(&w).fold(Point::<N>::zeros(), |s, (p, wi)| s + p * (wi / total))
        })
        .collect()
}

/// Adds `count` halfspaces that contain every vertex with some slack.
fn loosened<const N: usize>(rng: &mut ChaCha8Rng, set: &ConvexSetH<N>, verts: &[Point<N>], count: usize) -> ConvexSetH<N> {
    let p = set.interior_point;
    let mut normals = set.normals.clone();
    for _ in 0..count {
        let u = direction::<N>(rng);
        let support = verts.iter().map(|v| u.dot(&(v - p))).fold(f64::NEG_INFINITY, f64::max);
        normals.push(u / (support + rng.random_range(0.01..1.0)));
    }
    let k = normals.len();
    for i in (1..k).rev() {
        normals.swap(i, rng.random_range(0..=i));
    }
    ConvexSetH::new(normals, p).unwrap()
}

fn redundancy_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_v = 0.0_f64;
    let mut worst_h = 0.0_f64;
    for i in 0..50 {
        let body_pts = cloud::<3>(&mut rng, 10, Point3::zeros(), 1.0);
        let center = direction::<3>(&mut rng) * rng.random_range(1.0..5.0);
        let obstacle = cloud::<3>(&mut rng, 8, center, 1.0);
        let body = ConvexSetV::new(body_pts.clone()).unwrap();
        let pose = Pose3::new(random_unit_quaternion(&mut rng), Point3::zeros()).unwrap();
        let base = min_scale_vrep(&body, &obstacle, &pose).unwrap().beta;
        let mut padded_body = body_pts.clone();
        padded_body.extend(interior_points(&mut rng, &body_pts, 50));
        let mut padded_obstacle = obstacle.clone();
        padded_obstacle.extend(interior_points(&mut rng, &obstacle, 50));
        let padded = ConvexSetV::with_seed(padded_body, body.seed).unwrap();
        worst_v = worst_v.max((min_scale_vrep(&padded, &padded_obstacle, &pose).unwrap().beta - base).abs());

        let far = direction::<3>(&mut rng) * rng.random_range(1.0..5.0);
        let (bv, bh) = if i % 2 == 0 { box_shape::<3>(&mut rng, Point3::zeros()) } else { simplex_shape::<3>(&mut rng, Point3::zeros()) };
        let (ov, oh) = simplex_shape::<3>(&mut rng, far);
        let base = min_scale_hrep(&bh, &oh).unwrap().beta;
        let bh2 = loosened(&mut rng, &bh, &bv, 50);
        let oh2 = loosened(&mut rng, &oh, &ov, 50);
        worst_h = worst_h.max((min_scale_hrep(&bh2, &oh2).unwrap().beta - base).abs());
    }
    outcome(worst_v < 1e-10 && worst_h < 1e-10, format!("50 scenes, max |Δβ| V-rep {worst_v:.2e}, H-rep {worst_h:.2e}"))
}

// 7. Linear scaling of the solver.

fn linear_scaling() -> Outcome {
    let rows = bench::measure(4, &[100, 1_000, 10_000, 100_000], 30, 0).unwrap();
    let slope = bench::log_log_slope(&rows);
    let medians: Vec<String> = rows.iter().map(|(m, t, _)| format!("m={m}: {:.1} µs", *t as f64 / 1e3)).collect();
    outcome((0.8..=1.3).contains(&slope), format!("slope {slope:.3} ({})", medians.join(", ")))
}

// 8–10. Planning.

fn cruise(x: f64) -> KnotState {
    KnotState::new(Point2::new(x, 0.0), Point2::new(6.0, 0.0), Point2::zeros())
}

fn planning(name: &str, limit_s: f64, check_bounds: bool) -> Outcome {
    let scenario = SceneFile::load(&scene_path(name)).unwrap().scenario().unwrap();
    let options = PlanOptions::default();
    let config = CostConfig::default();
    let param = KnotParametrization::new(cruise(0.0), cruise(60.0), vec![options.duration / options.segments as f64; options.segments]).unwrap();
    let initial = total_cost(&param, &mass_point_guess(&param).unwrap(), &scenario, &config).unwrap().stats.min_beta;
    let clock = Instant::now();
    let (_, report) = plan(&scenario, cruise(0.0), cruise(60.0), &options, &config).unwrap();
    let wall = clock.elapsed().as_secs_f64();
    let b = scenario.bounds;
    let within = !check_bounds || (report.max_speed <= b.v_max + 1e-6 && report.max_accel <= b.a_max + 1e-6);
    outcome(
        report.status == PlanStatus::Converged && report.min_beta >= scenario.beta_min - 1e-6 && within && wall < limit_s,
        format!(
            "{:?} after {} rounds, min β {:.4} (initial guess {initial:.3}), max |v| {:.3}, max |a| {:.3}, {wall:.2} s",
            report.status, report.rounds, report.min_beta, report.max_speed, report.max_accel
        ),
    )
}

fn static_planning() -> Outcome {
    planning("blocking_box.json", 10.0, true)
}

fn dynamic_planning() -> Outcome {
    planning("dynamic_traffic.json", 30.0, true)
}

fn optimizer_sanity() -> Outcome {
    let abs = lbfgs_minimize(|x| Ok((x[0].abs(), vec![if x[0] >= 0.0 { 1.0 } else { -1.0 }])), &[1.0], &LbfgsParams::default()).unwrap();
    let rosen = lbfgs_minimize(
        |x| {
            let (a, b) = (x[0], x[1]);
            Ok(((1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2), vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)]))
        },
        &[-1.2, 1.0],
        &LbfgsParams::default(),
    )
    .unwrap();
    let rosen_err = (rosen.x[0] - 1.0).abs().max((rosen.x[1] - 1.0).abs());
    let scenario = SceneFile::load(&scene_path("blocking_box.json")).unwrap().scenario().unwrap();
    let (_, report) = plan(&scenario, cruise(0.0), cruise(60.0), &PlanOptions::default(), &CostConfig::default()).unwrap();
    let monotone = report.cost_history.iter().all(|round| round.windows(2).all(|w| w[1] <= w[0]));
    let accepted: usize = report.cost_history.iter().map(Vec::len).sum();
    outcome(
        abs.x[0].abs() <= 1e-5 && rosen_err <= 1e-5 && monotone,
        format!(
            "|x| → {:.1e}, Rosenbrock error {rosen_err:.1e}, planner cost non-increasing over {accepted} iterates in {} rounds: {monotone}",
            abs.x[0],
            report.cost_history.len()
        ),
    )
}

/// Name, check, and wall-time limit in seconds.
type Criterion = (&'static str, fn() -> Outcome, f64);

fn main() {
    let criteria: [Criterion; 10] = [
        ("lp solver matches enumeration", lp_oracle, 60.0),
        ("scale matches bisection", scale_vs_bisection, 120.0),
        ("vertex and halfspace forms agree", cross_representation, f64::INFINITY),
        ("collision predicate matches hull intersection", collision_predicate, f64::INFINITY),
        ("gradients match central differences", gradient_fidelity, f64::INFINITY),
        ("redundant points and halfspaces are ignored", redundancy_invariance, f64::INFINITY),
        ("solver time grows linearly", linear_scaling, 300.0),
        ("static planning", static_planning, f64::INFINITY),
        ("dynamic planning", dynamic_planning, f64::INFINITY),
        ("nonsmooth optimizer sanity", optimizer_sanity, f64::INFINITY),
    ];
    let mut failures = 0;
    for (i, (name, check, limit)) in criteria.iter().enumerate() {
        let clock = Instant::now();
        let result = check();
        let secs = clock.elapsed().as_secs_f64();
        let pass = result.pass && secs < *limit;
        failures += usize::from(!pass);
        let budget = if limit.is_finite() { format!(" (limit {limit:.0} s)") } else { String::new() };
        println!("{} {:>2} {name}: {} [{secs:.2} s{budget}]", if pass { "PASS" } else { "FAIL" }, i + 1, result.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
