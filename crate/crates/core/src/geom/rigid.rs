//! Least-squares rigid registration of corresponding point sets.
//!
//! Centroid subtraction, cross-covariance, SVD, and a sign-corrected rotation
//! (the reflection case is folded back by flipping the singular vector of the
//! smallest singular value).

use nalgebra::{Matrix3, Vector3};

use super::rotation::{Pose, Rotation};
use crate::error::{Error, Result};

/// Reference clouds whose second singular value is below this fraction of the
/// first are treated as collinear.
pub const COLLINEARITY_RATIO: f64 = 1e-8;

/// Finds the pose minimising `Σ ‖R·xᵢ + d − yᵢ‖²`.
///
/// Returns the pose and the rms residual `sqrt(cost / n)` in the input units.
pub fn fit_rigid_transform(
    reference: &[Vector3<f64>],
    current: &[Vector3<f64>],
) -> Result<(Pose, f64)> {
    if reference.len() != current.len() {
        return Err(Error::MismatchedLength {
            reference: reference.len(),
            current: current.len(),
        });
    }
    let n = reference.len();
    if n < 3 {
        return Err(Error::DegenerateCluster(format!(
            "{n} points given, at least 3 required"
        )));
    }

    let ref_centroid = centroid(reference);
    let cur_centroid = centroid(current);

    let mut spread = Matrix3::zeros();
    let mut cross = Matrix3::zeros();
    for (x, y) in reference.iter().zip(current) {
        let xc = x - ref_centroid;
        let yc = y - cur_centroid;
        spread += xc * xc.transpose();
        cross += yc * xc.transpose();
    }

    let sv = spread.symmetric_eigenvalues();
    let mut sv: Vec<f64> = sv.iter().map(|v| v.max(0.0)).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    // Eigenvalues of the scatter matrix are squared singular values of the centred cloud.
    if sv[0] <= 0.0 || sv[1].sqrt() < COLLINEARITY_RATIO * sv[0].sqrt() {
        return Err(Error::DegenerateCluster(
            "reference points are collinear or coincident".into(),
        ));
    }

    let svd = cross.svd(true, true);
    let mut u = svd.u.expect("svd u");
    let v_t = svd.v_t.expect("svd v_t");
    if (u * v_t).determinant() < 0.0 {
        // nalgebra orders singular values descending; flip the smallest one's vector.
        let (min_idx, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("three singular values");
        let col = -u.column(min_idx);
        u.set_column(min_idx, &col);
    }
    let rotation = Rotation::from_matrix_unchecked(u * v_t);
    let translation = cur_centroid - rotation.apply(&ref_centroid);
    let pose = Pose::new(rotation, translation);

    let cost: f64 = reference
        .iter()
        .zip(current)
        .map(|(x, y)| (pose.transform_point(x) - y).norm_squared())
        .sum();
    Ok((pose, (cost / n as f64).sqrt()))
}

pub(crate) fn centroid(points: &[Vector3<f64>]) -> Vector3<f64> {
    points.iter().sum::<Vector3<f64>>() / points.len() as f64
}
