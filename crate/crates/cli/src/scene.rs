//! Scene files: JSON with a body, obstacles and optional planning bounds.

use std::path::Path;

use linscale::geometry::{Point, Point2};
use linscale::scale::ConvexSetV;
use linscale::trajopt::{Bounds, MovingObstacle, Scenario, DEFAULT_BETA_MIN};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub dim: usize,
    pub body: BodySpec,
    pub obstacles: Vec<ObstacleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_min: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodySpec {
    pub points: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleSpec {
    pub points: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSpec {
    pub v_max: f64,
    pub a_max: f64,
}

fn check_coords(path: &str, v: &[f64], dim: usize) -> Result<(), CliError> {
    if v.len() != dim {
        return Err(CliError::Validation(format!("{path}: expected {dim} coordinates, got {}", v.len())));
    }
    if v.iter().any(|c| !c.is_finite()) {
        return Err(CliError::Validation(format!("{path}: coordinates must be finite")));
    }
    Ok(())
}

fn check_points(path: &str, points: &[Vec<f64>], dim: usize) -> Result<(), CliError> {
    if points.is_empty() {
        return Err(CliError::Validation(format!("{path}: at least one point is required")));
    }
    points.iter().enumerate().try_for_each(|(i, p)| check_coords(&format!("{path}[{i}]"), p, dim))
}

impl SceneFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let scene: SceneFile = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Validation(format!("{path}: {}", e.into_inner()))
        })?;
        scene.validate()?;
        Ok(scene)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Pretty JSON with a trailing newline; parsing and re-emitting it gives the same bytes.
    pub fn to_canonical_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scene serializes");
        s.push('\n');
        s
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let dim = self.dim;
        if dim != 2 && dim != 3 {
            return Err(CliError::Validation(format!("dim: must be 2 or 3, got {dim}")));
        }
        check_points("body.points", &self.body.points, dim)?;
        if let Some(seed) = &self.body.seed {
            check_coords("body.seed", seed, dim)?;
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            check_points(&format!("obstacles[{i}].points"), &o.points, dim)?;
            if let Some(v) = &o.velocity {
                if dim != 2 {
                    return Err(CliError::Validation(format!("obstacles[{i}].velocity: only 2D scenes may move")));
                }
                check_coords(&format!("obstacles[{i}].velocity"), v, dim)?;
            }
        }
        if let Some(b) = &self.bounds {
            if !(b.v_max > 0.0 && b.v_max.is_finite()) {
                return Err(CliError::Validation("bounds.v_max: must be positive".into()));
            }
            if !(b.a_max > 0.0 && b.a_max.is_finite()) {
                return Err(CliError::Validation("bounds.a_max: must be positive".into()));
            }
        }
        if let Some(beta) = self.beta_min {
            if !(beta >= 1.0 && beta.is_finite()) {
                return Err(CliError::Validation(format!("beta_min: must be at least 1, got {beta}")));
            }
        }
        Ok(())
    }

    fn points<const N: usize>(raw: &[Vec<f64>]) -> Vec<Point<N>> {
        raw.iter().map(|p| Point::<N>::from_column_slice(p)).collect()
    }

    pub fn body<const N: usize>(&self) -> Result<ConvexSetV<N>, CliError> {
        self.expect_dim(N)?;
        let points = Self::points::<N>(&self.body.points);
        let set = match &self.body.seed {
            Some(s) => ConvexSetV::with_seed(points, Point::<N>::from_column_slice(s)),
            None => ConvexSetV::new(points),
        };
        set.map_err(|e| CliError::Validation(format!("body: {e}")))
    }

    /// Obstacle points at time `t` (moving obstacles shifted by `t·velocity`).
    pub fn obstacles_at<const N: usize>(&self, t: f64) -> Result<Vec<Vec<Point<N>>>, CliError> {
        self.expect_dim(N)?;
        Ok(self
            .obstacles
            .iter()
            .map(|o| {
                let v = o.velocity.as_ref().map(|v| Point::<N>::from_column_slice(v)).unwrap_or_else(Point::<N>::zeros);
                Self::points::<N>(&o.points).into_iter().map(|p| p + v * t).collect()
            })
            .collect())
    }

    pub fn beta_min(&self) -> f64 {
        self.beta_min.unwrap_or(DEFAULT_BETA_MIN)
    }

    pub fn scenario(&self) -> Result<Scenario, CliError> {
        self.expect_dim(2)?;
        let body = self.body::<2>()?;
        let mut fixed = Vec::new();
        let mut moving = Vec::new();
        for (i, o) in self.obstacles.iter().enumerate() {
            let shape = ConvexSetV::new(Self::points::<2>(&o.points))
                .map_err(|e| CliError::Validation(format!("obstacles[{i}]: {e}")))?;
            match &o.velocity {
                Some(v) => moving.push(MovingObstacle { shape, velocity: Point2::new(v[0], v[1]) }),
                None => fixed.push(shape),
            }
        }
        let bounds = self.bounds.map(|b| Bounds { v_max: b.v_max, a_max: b.a_max }).unwrap_or_default();
        Scenario::new(body, fixed, moving, bounds, self.beta_min()).map_err(|e| CliError::Validation(e.to_string()))
    }

    fn expect_dim(&self, n: usize) -> Result<(), CliError> {
        if self.dim == n {
            Ok(())
        } else {
            Err(CliError::Validation(format!("dim: this command needs a {n}D scene, got {}", self.dim)))
        }
    }
}
