//! SVG rendering of planned trajectories.

use std::fmt::Write as _;

use linscale::geometry::{Point2, Pose2, RigidPose};
use linscale::scale::min_scale_vrep;
use linscale::trajopt::{eval_trajectory, heading_from_velocity, PiecewiseTrajectory, Scenario};

use crate::scene::SceneFile;
use crate::CliResult;

const PX_PER_M: f64 = 12.0;
const MARGIN_M: f64 = 3.0;
const OK_COLOR: &str = "#2a9d8f";
const BAD_COLOR: &str = "#e63946";
const HEADING_EPS: f64 = 1e-3;

fn cross(o: &Point2, a: &Point2, b: &Point2) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Counter-clockwise hull (monotone chain); only used for drawing.
pub fn convex_hull(points: &[Point2]) -> Vec<Point2> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Point2> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point2>> = if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for p in iter {
            while hull.len() >= start + 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(*p);
        }
        hull.pop();
    }
    hull
}

struct Canvas {
    min: Point2,
    max: Point2,
}

impl Canvas {
    fn width(&self) -> f64 {
        (self.max.x - self.min.x) * PX_PER_M
    }

    fn height(&self) -> f64 {
        (self.max.y - self.min.y) * PX_PER_M
    }

    fn map(&self, p: &Point2) -> (f64, f64) {
        ((p.x - self.min.x) * PX_PER_M, (self.max.y - p.y) * PX_PER_M)
    }

    fn polygon(&self, out: &mut String, pts: &[Point2], style: &str) {
        let coords: Vec<String> = convex_hull(pts)
            .iter()
            .map(|p| {
                let (x, y) = self.map(p);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        writeln!(out, r#"  <polygon points="{}" {style}/>"#, coords.join(" ")).unwrap();
    }
}

fn body_at(scenario: &Scenario, traj: &PiecewiseTrajectory, t: f64) -> CliResult<(Vec<Point2>, f64)> {
    let s = eval_trajectory(traj, t)?;
    let (theta, _) = heading_from_velocity(&s.velocity, HEADING_EPS)?;
    let pose = Pose2::new(theta, s.position)?;
    let footprint = scenario.body.points.iter().map(|p| pose.body_to_world(p)).collect();
    let mut beta = f64::INFINITY;
    for obstacle in scenario.obstacles_at(t) {
        beta = beta.min(min_scale_vrep(&scenario.body, &obstacle, &pose)?.beta);
    }
    Ok((footprint, beta))
}

/// Obstacles, the path, and body footprints colored by whether they keep `β ≥ β_min`.
/// Scenes with moving obstacles get three panels at consecutive times.
pub fn render(scene: &SceneFile, scenario: &Scenario, traj: &PiecewiseTrajectory) -> CliResult<String> {
    let total = traj.total_duration();
    let moving = !scenario.moving_obstacles.is_empty();
    let times: Vec<f64> = if moving { vec![0.3 * total, 0.5 * total, 0.7 * total] } else { vec![0.0] };

    let path: Vec<Point2> = (0..=200).map(|k| eval_trajectory(traj, total * k as f64 / 200.0).map(|s| s.position)).collect::<Result<_, _>>()?;
    let samples = traj.segments.len() * 4;
    let body_times: Vec<f64> = (0..=samples).map(|k| total * k as f64 / samples as f64).collect();

    let mut all: Vec<Point2> = path.clone();
    for t in &times {
        all.extend(scenario.obstacles_at(*t).into_iter().flatten());
    }
    let reach = scenario.body.points.iter().map(|p| (p - scenario.body.seed).norm()).fold(0.0, f64::max);
    let pad = Point2::new(MARGIN_M + reach, MARGIN_M + reach);
    let min = all.iter().fold(Point2::repeat(f64::INFINITY), |m, p| m.inf(p)) - pad;
    let max = all.iter().fold(Point2::repeat(f64::NEG_INFINITY), |m, p| m.sup(p)) + pad;
    let canvas = Canvas { min, max };
    let (w, h) = (canvas.width(), canvas.height());

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{:.0}" viewBox="0 0 {w:.2} {:.2}">"#,
        h * times.len() as f64,
        h * times.len() as f64
    )
    .unwrap();
    writeln!(out, r#"  <desc>beta_min = {}</desc>"#, scene.beta_min()).unwrap();
    for (panel, &t) in times.iter().enumerate() {
        writeln!(out, r#"<g class="snapshot" data-time="{t:.3}" transform="translate(0,{:.2})">"#, h * panel as f64).unwrap();
        writeln!(out, r##"  <rect width="{w:.2}" height="{h:.2}" fill="#ffffff" stroke="#cccccc"/>"##).unwrap();
        for obstacle in scenario.obstacles_at(t) {
            canvas.polygon(&mut out, &obstacle, r##"fill="#6c757d" fill-opacity="0.8""##);
        }
        let line: Vec<String> = path
            .iter()
            .map(|p| {
                let (x, y) = canvas.map(p);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        writeln!(out, r##"  <polyline class="trajectory" points="{}" fill="none" stroke="#1d3557" stroke-width="2"/>"##, line.join(" ")).unwrap();
        let shown: Vec<f64> = if moving { vec![t] } else { body_times.clone() };
        for bt in shown {
            let (footprint, beta) = body_at(scenario, traj, bt)?;
            let color = if beta >= scenario.beta_min { OK_COLOR } else { BAD_COLOR };
            canvas.polygon(&mut out, &footprint, &format!(r#"class="body" fill="{color}" fill-opacity="0.35" stroke="{color}""#));
        }
        if moving {
            writeln!(out, r##"  <text x="8" y="18" font-family="sans-serif" font-size="14" fill="#1d3557">t = {t:.2} s</text>"##).unwrap();
        }
        writeln!(out, "</g>").unwrap();
    }
    writeln!(out, "</svg>").unwrap();
    Ok(out)
}
