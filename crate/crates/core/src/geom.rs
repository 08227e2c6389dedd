//! Shared geometric primitives.
//!
//! Everything lives in one right-handed, z-up base frame. Angles cross the
//! public API in degrees and are converted to radians once, here.

use std::ops::Mul;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point (meters) or a direction (unitless) in the base frame.
pub type Vec3 = Vector3<f64>;

const ORTHO_TOL: f64 = 1e-9;
const UNIT_TOL: f64 = 1e-6;

/// Proper rotation. Columns are the rotated frame's x, y, z axes expressed in
/// the base frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rotation3(Matrix3<f64>);

impl Rotation3 {
    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    /// Wraps a matrix after checking `RᵀR = I` and `det R = +1`.
    pub fn from_matrix(m: Matrix3<f64>) -> Result<Self> {
        let err = (m.transpose() * m - Matrix3::identity()).abs().max();
        let det = m.determinant();
        if !err.is_finite() || err > ORTHO_TOL || (det - 1.0).abs() > ORTHO_TOL {
            return Err(Error::ContractViolation(format!(
                "matrix is not a proper rotation (orthogonality error {err:.3e}, det {det:.12})"
            )));
        }
        Ok(Self(m))
    }

    pub(crate) fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        Self(m)
    }

    pub fn from_columns(x: Vec3, y: Vec3, z: Vec3) -> Result<Self> {
        Self::from_matrix(Matrix3::from_columns(&[x, y, z]))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn x_axis(&self) -> Vec3 {
        self.0.column(0).into_owned()
    }

    pub fn y_axis(&self) -> Vec3 {
        self.0.column(1).into_owned()
    }

    pub fn z_axis(&self) -> Vec3 {
        self.0.column(2).into_owned()
    }

    pub fn inverse(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn apply(&self, v: &Vec3) -> Vec3 {
        self.0 * v
    }

    /// Largest deviation of `RᵀR` from identity.
    pub fn orthonormality_error(&self) -> f64 {
        (self.0.transpose() * self.0 - Matrix3::identity()).abs().max()
    }
}

impl Mul for Rotation3 {
    type Output = Rotation3;

    fn mul(self, rhs: Rotation3) -> Rotation3 {
        Rotation3(self.0 * rhs.0)
    }
}

impl Mul<Vec3> for Rotation3 {
    type Output = Vec3;

    fn mul(self, rhs: Vec3) -> Vec3 {
        self.0 * rhs
    }
}

/// Rigid transform: `p_base = rotation · p_local + translation`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub rotation: Rotation3,
    pub translation: Vec3,
}

impl Pose {
    pub fn new(rotation: Rotation3, translation: Vec3) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn identity() -> Self {
        Self::new(Rotation3::identity(), Vec3::zeros())
    }

    pub fn transform_point(&self, p: &Vec3) -> Vec3 {
        self.rotation.apply(p) + self.translation
    }

    pub fn inverse(&self) -> Self {
        let r = self.rotation.inverse();
        Self::new(r, -r.apply(&self.translation))
    }

    /// Row-major rotation followed by translation; the layout of trace logs.
    pub fn to_array12(&self) -> [f64; 12] {
        let m = self.rotation.matrix();
        let t = self.translation;
        [
            m[(0, 0)],
            m[(0, 1)],
            m[(0, 2)],
            m[(1, 0)],
            m[(1, 1)],
            m[(1, 2)],
            m[(2, 0)],
            m[(2, 1)],
            m[(2, 2)],
            t.x,
            t.y,
            t.z,
        ]
    }
}

/// Rodrigues rotation of `angle_deg` degrees about the unit `axis`.
pub fn rotation_about_axis(axis: &Vec3, angle_deg: f64) -> Result<Rotation3> {
    let n = axis.norm();
    if !n.is_finite() || (n - 1.0).abs() > UNIT_TOL {
        return Err(Error::ContractViolation(format!(
            "rotation axis must be unit-norm, got norm {n}"
        )));
    }
    let k = axis / n;
    let (s, c) = angle_deg.to_radians().sin_cos();
    let skew = Matrix3::new(0.0, -k.z, k.y, k.z, 0.0, -k.x, -k.y, k.x, 0.0);
    let m = Matrix3::identity() * c + skew * s + (k * k.transpose()) * (1.0 - c);
    Ok(Rotation3(m))
}

/// Frame whose z column is `z_dir` and whose y column is `y_dir` with its
/// z component removed. The z input is kept as given; y is corrected.
pub fn frame_from_y_z(y_dir: &Vec3, z_dir: &Vec3) -> Result<Rotation3> {
    let yn = y_dir.norm();
    let zn = z_dir.norm();
    if !(yn > 0.0 && zn > 0.0 && yn.is_finite() && zn.is_finite()) {
        return Err(Error::DegenerateFrame("zero or non-finite input direction".into()));
    }
    let z = z_dir / zn;
    let y_raw = y_dir / yn;
    let sin_angle = y_raw.cross(&z).norm();
    if sin_angle <= 1f64.to_radians().sin() {
        return Err(Error::DegenerateFrame(format!(
            "y and z directions are within 1 degree of parallel (sin = {sin_angle:.3e})"
        )));
    }
    let y = (y_raw - z * y_raw.dot(&z)).normalize();
    let x = y.cross(&z);
    Ok(Rotation3(Matrix3::from_columns(&[x, y, z])))
}

/// Orthonormal in-plane basis `(e1, e2)` with `e1 × e2 = normal`.
///
/// `e1` is the base x axis projected onto the plane, falling back to the base
/// y axis when the normal is close to x.
pub fn plane_basis(normal: &Vec3) -> (Vec3, Vec3) {
    let n = normal.normalize();
    let seed = if n.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let e1 = (seed - n * seed.dot(&n)).normalize();
    let e2 = n.cross(&e1);
    (e1, e2)
}

/// Lexicographic comparison of coordinates; the tie-break used throughout.
pub fn lex_cmp(a: &Vec3, b: &Vec3) -> std::cmp::Ordering {
    a.x.total_cmp(&b.x)
        .then(a.y.total_cmp(&b.y))
        .then(a.z.total_cmp(&b.z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: &Vec3, b: &Vec3, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn zero_angle_is_identity() {
        let r = rotation_about_axis(&Vec3::z(), 0.0).unwrap();
        assert!((r.matrix() - Matrix3::identity()).abs().max() < 1e-15);
    }

    #[test]
    fn quarter_turn_maps_x_to_y() {
        let r = rotation_about_axis(&Vec3::z(), 90.0).unwrap();
        assert!(close(&(r * Vec3::x()), &Vec3::y(), 1e-12));
    }

    #[test]
    fn fifteen_degrees_composed_24_times_is_identity() {
        let step = rotation_about_axis(&Vec3::z(), 15.0).unwrap();
        let mut acc = Rotation3::identity();
        for _ in 0..24 {
            acc = acc * step;
        }
        assert!((acc.matrix() - Matrix3::identity()).abs().max() < 1e-9);
    }

    #[test]
    fn non_unit_axis_is_rejected() {
        let err = rotation_about_axis(&Vec3::new(0.0, 0.0, 2.0), 10.0).unwrap_err();
        assert!(matches!(err, Error::ContractViolation(_)));
    }

    #[test]
    fn axis_aligned_frame() {
        let r = frame_from_y_z(&Vec3::y(), &Vec3::z()).unwrap();
        assert!(close(&r.x_axis(), &Vec3::x(), 1e-15));
        assert!(close(&r.y_axis(), &Vec3::y(), 1e-15));
        assert!(close(&r.z_axis(), &Vec3::z(), 1e-15));
    }

    #[test]
    fn y_component_along_z_is_removed() {
        let r = frame_from_y_z(&Vec3::new(0.0, 1.0, 0.5), &Vec3::z()).unwrap();
        assert!(close(&r.y_axis(), &Vec3::y(), 1e-15));
    }

    #[test]
    fn diagonal_y_gives_hand_computed_x() {
        let y = Vec3::new(1.0, 1.0, 0.0) / 2f64.sqrt();
        let r = frame_from_y_z(&y, &Vec3::z()).unwrap();
        // (1,1,0)/√2 × (0,0,1) = (1,-1,0)/√2
        let expected = Vec3::new(1.0, -1.0, 0.0) / 2f64.sqrt();
        assert!(close(&r.x_axis(), &expected, 1e-15));
    }

    #[test]
    fn near_parallel_inputs_are_degenerate() {
        let y = Vec3::new(0.01, 0.0, 1.0);
        let err = frame_from_y_z(&y, &Vec3::z()).unwrap_err();
        assert!(matches!(err, Error::DegenerateFrame(_)));
    }

    #[test]
    fn pose_inverse_round_trips() {
        let r = rotation_about_axis(&Vec3::new(1.0, 2.0, 3.0).normalize(), 33.0).unwrap();
        let pose = Pose::new(r, Vec3::new(0.1, -0.2, 0.3));
        let p = Vec3::new(0.5, 0.25, -1.0);
        let back = pose.inverse().transform_point(&pose.transform_point(&p));
        assert!(close(&back, &p, 1e-14));
    }

    fn unit_vec() -> impl Strategy<Value = Vec3> {
        (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
            .prop_filter("nonzero", |(x, y, z)| x * x + y * y + z * z > 1e-3)
            .prop_map(|(x, y, z)| Vec3::new(x, y, z).normalize())
    }

    proptest! {
        #[test]
        fn rodrigues_is_proper(axis in unit_vec(), angle in -720.0f64..720.0) {
            let r = rotation_about_axis(&axis, angle).unwrap();
            prop_assert!(r.orthonormality_error() < 1e-9);
            prop_assert!((r.matrix().determinant() - 1.0).abs() < 1e-9);
        }

        #[test]
        fn frames_are_proper_and_scale_invariant(
            y in unit_vec(),
            z in unit_vec(),
            sy in 1e-3f64..1e3,
            sz in 1e-3f64..1e3,
        ) {
            prop_assume!(y.cross(&z).norm() > 0.05);
            let r = frame_from_y_z(&y, &z).unwrap();
            prop_assert!(r.orthonormality_error() < 1e-9);
            prop_assert!((r.matrix().determinant() - 1.0).abs() < 1e-9);
            let scaled = frame_from_y_z(&(y * sy), &(z * sz)).unwrap();
            prop_assert!((scaled.matrix() - r.matrix()).abs().max() < 1e-12);
        }
    }
}
