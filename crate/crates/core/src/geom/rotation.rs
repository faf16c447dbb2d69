use std::ops::Mul;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

/// Drift from orthonormality tolerated before a product is re-projected onto SO(3).
pub const ORTHONORMAL_DRIFT: f64 = 1e-9;

/// Coordinate axis of a right-handed frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn from_index(i: usize) -> Axis {
        match i {
            0 => Axis::X,
            1 => Axis::Y,
            2 => Axis::Z,
            _ => panic!("axis index out of range: {i}"),
        }
    }

    pub fn unit(self) -> Vector3<f64> {
        let mut v = Vector3::zeros();
        v[self.index()] = 1.0;
        v
    }

    pub fn label(self) -> char {
        match self {
            Axis::X => 'X',
            Axis::Y => 'Y',
            Axis::Z => 'Z',
        }
    }
}

/// A proper rotation stored as a 3×3 orthonormal matrix with determinant +1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Rotation(Matrix3<f64>);

impl Rotation {
    pub fn identity() -> Self {
        Rotation(Matrix3::identity())
    }

    /// Wraps a matrix the caller guarantees to be a rotation.
    ///
    /// Products that drift past [`ORTHONORMAL_DRIFT`] are re-projected.
    pub fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        Rotation(m).renormalized_if_drifting()
    }

    /// Nearest rotation to an arbitrary matrix (orthogonal polar factor, det forced to +1).
    pub fn nearest(m: &Matrix3<f64>) -> Self {
        let svd = m.svd(true, true);
        let u = svd.u.expect("svd u");
        let v_t = svd.v_t.expect("svd v_t");
        let mut d = Matrix3::identity();
        if (u * v_t).determinant() < 0.0 {
            d[(2, 2)] = -1.0;
        }
        Rotation(u * d * v_t)
    }

    /// Builds a rotation from orthonormal column axes.
    pub fn from_axes(x: Vector3<f64>, y: Vector3<f64>, z: Vector3<f64>) -> Self {
        Rotation(Matrix3::from_columns(&[x, y, z])).renormalized_if_drifting()
    }

    /// Right-handed rotation by `angle` radians about a coordinate axis.
    pub fn about_axis(axis: Axis, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let m = match axis {
            Axis::X => Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c),
            Axis::Y => Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c),
            Axis::Z => Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0),
        };
        Rotation(m)
    }

    /// Rotation from a rotation vector (axis × angle), Rodrigues' formula.
    pub fn from_rotation_vector(v: &Vector3<f64>) -> Self {
        let angle = v.norm();
        if angle < 1e-300 {
            return Self::identity();
        }
        let k = v / angle;
        let kx = skew(&k);
        let m = Matrix3::identity() + kx * angle.sin() + kx * kx * (1.0 - angle.cos());
        Rotation(m)
    }

    /// Rotation vector (axis × angle) with angle in [0, π].
    pub fn to_rotation_vector(&self) -> Vector3<f64> {
        let m = &self.0;
        let w = Vector3::new(m[(2, 1)] - m[(1, 2)], m[(0, 2)] - m[(2, 0)], m[(1, 0)] - m[(0, 1)]);
        let sin2 = w.norm();
        let cos2 = m.trace() - 1.0;
        let angle = sin2.atan2(cos2);
        if angle < 1e-12 {
            return w * 0.5;
        }
        if std::f64::consts::PI - angle < 1e-6 {
            // Near π the antisymmetric part vanishes; recover the axis from the symmetric part.
            let b = (m + m.transpose()) * 0.5 - Matrix3::identity() * cos2.mul_add(0.5, 0.0);
            let (mut best, mut col) = (0.0, 0);
            for j in 0..3 {
                let n = b.column(j).norm();
                if n > best {
                    best = n;
                    col = j;
                }
            }
            let mut axis = b.column(col).normalize();
            if axis.dot(&w) < 0.0 {
                axis = -axis;
            }
            return axis * angle;
        }
        w * (angle / sin2)
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        Rotation(self.0.transpose())
    }

    pub fn inverse(&self) -> Self {
        self.transpose()
    }

    pub fn apply(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.0 * v
    }

    pub fn column(&self, i: usize) -> Vector3<f64> {
        self.0.column(i).into_owned()
    }

    /// Rotation angle of `self⁻¹ · other`, radians.
    pub fn angle_to(&self, other: &Rotation) -> f64 {
        (self.transpose() * *other).to_rotation_vector().norm()
    }

    /// Largest entry of |RᵀR − I|.
    pub fn orthonormality_error(&self) -> f64 {
        (self.0.transpose() * self.0 - Matrix3::identity()).amax()
    }

    pub fn determinant(&self) -> f64 {
        self.0.determinant()
    }

    fn renormalized_if_drifting(self) -> Self {
        if self.orthonormality_error() > ORTHONORMAL_DRIFT
            || (self.determinant() - 1.0).abs() > ORTHONORMAL_DRIFT
        {
            Self::nearest(&self.0)
        } else {
            self
        }
    }
}

impl Default for Rotation {
    fn default() -> Self {
        Self::identity()
    }
}

impl Mul for Rotation {
    type Output = Rotation;

    fn mul(self, rhs: Rotation) -> Rotation {
        Rotation(self.0 * rhs.0).renormalized_if_drifting()
    }
}

impl Mul<Vector3<f64>> for Rotation {
    type Output = Vector3<f64>;

    fn mul(self, rhs: Vector3<f64>) -> Vector3<f64> {
        self.0 * rhs
    }
}

/// Rigid transform of a segment: global = rotation · local + translation (mm).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub rotation: Rotation,
    pub translation: Vector3<f64>,
}

impl Pose {
    pub fn new(rotation: Rotation, translation: Vector3<f64>) -> Self {
        Pose {
            rotation,
            translation,
        }
    }

    pub fn identity() -> Self {
        Pose::default()
    }

    pub fn transform_point(&self, local: &Vector3<f64>) -> Vector3<f64> {
        self.rotation.apply(local) + self.translation
    }

    pub fn inverse_transform_point(&self, global: &Vector3<f64>) -> Vector3<f64> {
        self.rotation.transpose().apply(&(global - self.translation))
    }

    pub fn inverse(&self) -> Pose {
        let rt = self.rotation.transpose();
        Pose::new(rt, -rt.apply(&self.translation))
    }

    /// `self ∘ rhs`: apply `rhs` first, then `self`.
    pub fn compose(&self, rhs: &Pose) -> Pose {
        Pose::new(
            self.rotation * rhs.rotation,
            self.rotation.apply(&rhs.translation) + self.translation,
        )
    }
}

/// Cross-product matrix `[v]×`.
pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}
