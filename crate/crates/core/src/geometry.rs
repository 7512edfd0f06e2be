//! Points, rigid poses and quaternion rotations.
//!
//! Rotations built from a [`Quaternion`] use the homogeneous algebraic form
//! (diagonal entries like `w² + x² − y² − z²`), so `R(λq) = λ²·R(q)`. Partials
//! are taken of that expression as written, without renormalizing `q`.

use nalgebra::{Matrix2, Matrix3, SVector, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point<const N: usize> = SVector<f64, N>;
pub type Point2 = Vector2<f64>;
pub type Point3 = Vector3<f64>;

/// Tolerance on `|q| − 1` accepted by [`Pose3::new`].
pub const UNIT_NORM_TOL: f64 = 1e-9;

pub(crate) fn check_finite<const N: usize>(p: &Point<N>, what: &str) -> Result<()> {
    if p.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::invalid(format!("{what} has non-finite coordinates")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const IDENTITY: Quaternion = Quaternion { w: 1.0, x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quaternion { w, x, y, z }
    }

    /// Unit quaternion for a rotation of `angle` radians about `axis`.
    pub fn from_axis_angle(axis: &Vector3<f64>, angle: f64) -> Result<Self> {
        let n = axis.norm();
        if !(n.is_finite() && n > 0.0 && angle.is_finite()) {
            return Err(Error::invalid("axis must be finite and nonzero"));
        }
        let (s, c) = (0.5 * angle).sin_cos();
        let a = axis / n;
        Ok(Quaternion { w: c, x: s * a.x, y: s * a.y, z: s * a.z })
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn from_array(q: [f64; 4]) -> Self {
        Quaternion { w: q[0], x: q[1], y: q[2], z: q[3] }
    }

    pub fn norm_squared(&self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::invalid("cannot normalize a zero or non-finite quaternion"));
        }
        Ok(Quaternion { w: self.w / n, x: self.x / n, y: self.y / n, z: self.z / n })
    }

    fn is_finite(&self) -> bool {
        self.as_array().iter().all(|v| v.is_finite())
    }
}

/// Rotation matrix of the homogeneous quaternion formula.
pub fn rotation_from_quaternion(q: &Quaternion) -> Result<Matrix3<f64>> {
    if !q.is_finite() {
        return Err(Error::invalid("quaternion has non-finite components"));
    }
    Ok(rotation_unchecked(q))
}

fn rotation_unchecked(q: &Quaternion) -> Matrix3<f64> {
    let Quaternion { w, x, y, z } = *q;
    Matrix3::new(
        w * w + x * x - y * y - z * z,
        2.0 * (x * y - w * z),
        2.0 * (x * z + w * y),
        2.0 * (x * y + w * z),
        w * w - x * x + y * y - z * z,
        2.0 * (y * z - w * x),
        2.0 * (x * z - w * y),
        2.0 * (y * z + w * x),
        w * w - x * x - y * y + z * z,
    )
}

/// `[∂R/∂w, ∂R/∂x, ∂R/∂y, ∂R/∂z]` of the homogeneous formula.
pub fn rotation_partials(q: &Quaternion) -> Result<[Matrix3<f64>; 4]> {
    if !q.is_finite() {
        return Err(Error::invalid("quaternion has non-finite components"));
    }
    let Quaternion { w, x, y, z } = *q;
    let t = 2.0;
    let dw = Matrix3::new(w, -z, y, z, w, -x, -y, x, w) * t;
    let dx = Matrix3::new(x, y, z, y, -x, -w, z, w, -x) * t;
    let dy = Matrix3::new(-y, x, w, x, y, z, -w, z, -y) * t;
    let dz = Matrix3::new(-z, -w, x, w, -z, y, x, y, z) * t;
    Ok([dw, dx, dy, dz])
}

/// 2D rotation by `theta` and its derivative.
pub fn rotation2(theta: f64) -> (Matrix2<f64>, Matrix2<f64>) {
    let (s, c) = theta.sin_cos();
    (Matrix2::new(c, -s, s, c), Matrix2::new(-s, -c, c, -s))
}

/// A rigid motion of an `N`-dimensional body, mapping world points into the body frame.
pub trait RigidPose<const N: usize> {
    /// Number of rotation parameters (4 quaternion components in 3D, heading in 2D).
    const ROTATION_PARAMS: usize;

    fn translation(&self) -> Point<N>;

    fn rotation_matrix(&self) -> nalgebra::SMatrix<f64, N, N>;

    /// `p_body = R⁻¹ (p_world − t − p_cen)`.
    fn world_to_body(&self, p_world: &Point<N>) -> Point<N>;

    fn body_to_world(&self, p_body: &Point<N>) -> Point<N>;

    /// For each rotation parameter `k`, the matrix `(∂Rᵀ/∂k)·R`.
    ///
    /// For a body-frame point `p_b` the derivative of `R⁻¹ (p_w − t − p_cen)` with
    /// respect to `k` at an orthonormal `R` equals `−Rᵀ (∂R/∂k) p_b = (∂Rᵀ/∂k) R p_b`.
    fn rotation_sensitivities(&self) -> Vec<nalgebra::SMatrix<f64, N, N>>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose3 {
    pub rotation: Quaternion,
    pub translation: Point3,
    /// Center of rotation, body frame.
    pub rotation_center: Point3,
}

impl Pose3 {
    /// Pose with a unit quaternion (within [`UNIT_NORM_TOL`]) and zero rotation center.
    pub fn new(rotation: Quaternion, translation: Point3) -> Result<Self> {
        Self::with_center(rotation, translation, Point3::zeros())
    }

    pub fn with_center(rotation: Quaternion, translation: Point3, rotation_center: Point3) -> Result<Self> {
        let pose = Self::from_raw(rotation, translation, rotation_center)?;
        if (rotation.norm() - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::invalid(format!(
                "rotation quaternion must be unit norm, got |q| = {}",
                rotation.norm()
            )));
        }
        Ok(pose)
    }

    /// Pose with an arbitrary nonzero quaternion. The transform is the exact inverse of the
    /// homogeneous `R(q)`; used for derivative checks over raw quaternion components.
    pub fn from_raw(rotation: Quaternion, translation: Point3, rotation_center: Point3) -> Result<Self> {
        if !rotation.is_finite() || rotation.norm_squared() == 0.0 {
            return Err(Error::invalid("rotation quaternion must be finite and nonzero"));
        }
        check_finite(&translation, "translation")?;
        check_finite(&rotation_center, "rotation center")?;
        Ok(Pose3 { rotation, translation, rotation_center })
    }

    pub fn identity() -> Self {
        Pose3 { rotation: Quaternion::IDENTITY, translation: Point3::zeros(), rotation_center: Point3::zeros() }
    }

    fn inverse_rotation(&self) -> Matrix3<f64> {
        // R(q)ᵀ R(q) = |q|⁴ I for the homogeneous formula.
        let n2 = self.rotation.norm_squared();
        rotation_unchecked(&self.rotation).transpose() / (n2 * n2)
    }
}

impl RigidPose<3> for Pose3 {
    const ROTATION_PARAMS: usize = 4;

    fn translation(&self) -> Point3 {
        self.translation
    }

    fn rotation_matrix(&self) -> Matrix3<f64> {
        rotation_unchecked(&self.rotation)
    }

    fn world_to_body(&self, p_world: &Point3) -> Point3 {
        self.inverse_rotation() * (p_world - self.translation - self.rotation_center)
    }

    fn body_to_world(&self, p_body: &Point3) -> Point3 {
        rotation_unchecked(&self.rotation) * p_body + self.translation + self.rotation_center
    }

    fn rotation_sensitivities(&self) -> Vec<Matrix3<f64>> {
        let r = rotation_unchecked(&self.rotation);
        // Finite by construction.
        let partials = rotation_partials(&self.rotation).expect("finite quaternion");
        partials.iter().map(|d| d.transpose() * r).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose2 {
    /// Radians, not wrapped.
    pub heading: f64,
    pub translation: Point2,
}

impl Pose2 {
    pub fn new(heading: f64, translation: Point2) -> Result<Self> {
        if !heading.is_finite() {
            return Err(Error::invalid("heading must be finite"));
        }
        check_finite(&translation, "translation")?;
        Ok(Pose2 { heading, translation })
    }

    pub fn identity() -> Self {
        Pose2 { heading: 0.0, translation: Point2::zeros() }
    }
}

impl RigidPose<2> for Pose2 {
    const ROTATION_PARAMS: usize = 1;

    fn translation(&self) -> Point2 {
        self.translation
    }

    fn rotation_matrix(&self) -> Matrix2<f64> {
        rotation2(self.heading).0
    }

    fn world_to_body(&self, p_world: &Point2) -> Point2 {
        rotation2(self.heading).0.transpose() * (p_world - self.translation)
    }

    fn body_to_world(&self, p_body: &Point2) -> Point2 {
        rotation2(self.heading).0 * p_body + self.translation
    }

    fn rotation_sensitivities(&self) -> Vec<Matrix2<f64>> {
        let (r, dr) = rotation2(self.heading);
        vec![dr.transpose() * r]
    }
}

/// Arithmetic mean of a nonempty point list.
pub fn centroid<const N: usize>(points: &[Point<N>]) -> Result<Point<N>> {
    if points.is_empty() {
        return Err(Error::invalid("centroid of an empty point list"));
    }
    let sum = points.iter().fold(Point::<N>::zeros(), |acc, p| acc + p);
    Ok(sum / points.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_quaternion(rng: &mut ChaCha8Rng, unit: bool) -> Quaternion {
        let q = Quaternion::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        if unit {
            q.normalized().unwrap()
        } else {
            q
        }
    }

    #[test]
    fn identity_quaternion_gives_identity() {
        let r = rotation_from_quaternion(&Quaternion::IDENTITY).unwrap();
        assert_eq!(r, Matrix3::identity());
    }

    #[test]
    fn quarter_turn_about_z() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let r = rotation_from_quaternion(&Quaternion::new(h, 0.0, 0.0, h)).unwrap();
        let expected = Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        assert_abs_diff_eq!(r, expected, epsilon = 1e-15);
    }

    #[test]
    fn non_finite_quaternion_rejected() {
        let q = Quaternion::new(f64::NAN, 0.0, 0.0, 0.0);
        assert!(matches!(rotation_from_quaternion(&q), Err(Error::InvalidArgument(_))));
        assert!(matches!(rotation_partials(&q), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn random_unit_rotations_are_proper() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let r = rotation_from_quaternion(&random_quaternion(&mut rng, true)).unwrap();
            assert_abs_diff_eq!(r.transpose() * r, Matrix3::identity(), epsilon = 1e-12);
            assert_abs_diff_eq!(r.determinant(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn partials_at_identity() {
        let [dw, ..] = rotation_partials(&Quaternion::IDENTITY).unwrap();
        assert_eq!(dw, Matrix3::identity() * 2.0);
    }

    #[test]
    fn partial_w_at_pure_z_quaternion() {
        // R01 = 2(xy − wz), R10 = 2(xy + wz): ∂/∂w = ∓2z.
        let [dw, ..] = rotation_partials(&Quaternion::new(0.0, 0.0, 0.0, 1.0)).unwrap();
        let expected = Matrix3::new(0.0, -2.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        assert_eq!(dw, expected);
    }

    #[test]
    fn partials_match_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = 1e-6;
        for i in 0..1000 {
            let q = random_quaternion(&mut rng, i % 2 == 0);
            let partials = rotation_partials(&q).unwrap();
            for (k, analytic) in partials.iter().enumerate() {
                let mut plus = q.as_array();
                let mut minus = q.as_array();
                plus[k] += h;
                minus[k] -= h;
                let fd = (rotation_unchecked(&Quaternion::from_array(plus))
                    - rotation_unchecked(&Quaternion::from_array(minus)))
                    / (2.0 * h);
                assert_abs_diff_eq!(fd, *analytic, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn world_to_body_examples() {
        let p = Point3::new(0.3, -1.2, 4.0);
        assert_eq!(Pose3::identity().world_to_body(&p), p);

        let shifted = Pose3::new(Quaternion::IDENTITY, Point3::new(1.0, 0.0, 0.0)).unwrap();
        assert_eq!(shifted.world_to_body(&Point3::new(3.0, 0.0, 0.0)), Point3::new(2.0, 0.0, 0.0));

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let turned = Pose3::new(Quaternion::new(h, 0.0, 0.0, h), Point3::zeros()).unwrap();
        assert_abs_diff_eq!(
            turned.world_to_body(&Point3::new(1.0, 0.0, 0.0)),
            Point3::new(0.0, -1.0, 0.0),
            epsilon = 1e-15
        );
    }

    #[test]
    fn world_body_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let q = random_quaternion(&mut rng, true);
            let t = Point3::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
            let c = Point3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), 0.0);
            let pose = Pose3::with_center(q, t, c).unwrap();
            let p = Point3::new(rng.random_range(-9.0..9.0), rng.random_range(-9.0..9.0), rng.random_range(-9.0..9.0));
            assert_abs_diff_eq!(pose.body_to_world(&pose.world_to_body(&p)), p, epsilon = 1e-12);

            let pose2 = Pose2::new(rng.random_range(-7.0..7.0), Point2::new(t.x, t.y)).unwrap();
            let p2 = Point2::new(p.x, p.y);
            assert_abs_diff_eq!(pose2.body_to_world(&pose2.world_to_body(&p2)), p2, epsilon = 1e-12);
        }
    }

    #[test]
    fn raw_pose_inverts_scaled_rotation() {
        let q = Quaternion::new(0.9, 0.2, -0.4, 0.3);
        let pose = Pose3::from_raw(q, Point3::new(1.0, 2.0, 3.0), Point3::zeros()).unwrap();
        let p = Point3::new(-0.5, 0.25, 2.0);
        assert_abs_diff_eq!(pose.body_to_world(&pose.world_to_body(&p)), p, epsilon = 1e-12);
        assert!(Pose3::new(q, Point3::zeros()).is_err());
    }

    #[test]
    fn centroid_examples() {
        let square = [Point2::new(0.0, 0.0), Point2::new(2.0, 0.0), Point2::new(0.0, 2.0), Point2::new(2.0, 2.0)];
        assert_eq!(centroid(&square).unwrap(), Point2::new(1.0, 1.0));
        let single = [Point2::new(-3.5, 8.0)];
        assert_eq!(centroid(&single).unwrap(), single[0]);
        let pair = [Point3::new(1.0, 1.0, 1.0), Point3::new(3.0, 3.0, 3.0)];
        assert_eq!(centroid(&pair).unwrap(), Point3::new(2.0, 2.0, 2.0));
        assert!(centroid::<2>(&[]).is_err());
    }
}
