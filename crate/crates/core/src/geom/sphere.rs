//! Geometric sphere fitting: linear algebraic seed, Gauss-Newton refinement.

use nalgebra::{DMatrix, DVector, Matrix4, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest/largest singular value ratio of the algebraic design matrix below
/// which the centre is considered unobservable.
pub const SPHERE_CONDITIONING: f64 = 1e-8;

const MAX_REFINE_ITERATIONS: usize = 100;
const COST_CHANGE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereFit {
    pub center: Vector3<f64>,
    pub radius: f64,
    /// Root mean square of `‖pᵢ − c‖ − r`.
    pub rms_residual: f64,
}

/// Minimises `Σ (‖pᵢ − c‖ − r)²` over centre and radius.
pub fn fit_sphere(points: &[Vector3<f64>]) -> Result<SphereFit> {
    let n = points.len();
    if n < 4 {
        return Err(Error::DegenerateSphere(format!(
            "{n} points given, at least 4 required"
        )));
    }
    let mean = points.iter().sum::<Vector3<f64>>() / n as f64;
    let scale = points
        .iter()
        .map(|p| (p - mean).norm())
        .fold(0.0, f64::max);
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::DegenerateSphere("points coincide".into()));
    }

    // Algebraic seed on centred, scaled coordinates: |q|² = 2 c·q + k.
    let mut a = DMatrix::zeros(n, 4);
    let mut b = DVector::zeros(n);
    for (row, p) in points.iter().enumerate() {
        let q = (p - mean) / scale;
        a[(row, 0)] = 2.0 * q.x;
        a[(row, 1)] = 2.0 * q.y;
        a[(row, 2)] = 2.0 * q.z;
        a[(row, 3)] = 1.0;
        b[row] = q.norm_squared();
    }
    let svd = a.clone().svd(true, true);
    let max_sv = svd.singular_values.max();
    let min_sv = svd.singular_values.min();
    if min_sv < SPHERE_CONDITIONING * max_sv {
        return Err(Error::DegenerateSphere(
            "points are coplanar; centre unobservable along the plane normal".into(),
        ));
    }
    let sol = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::DegenerateSphere(e.to_string()))?;
    let c0 = Vector3::new(sol[0], sol[1], sol[2]);
    let r0 = (sol[3] + c0.norm_squared()).max(0.0).sqrt();

    let mut center = c0 * scale + mean;
    let mut radius = r0 * scale;
    let mut cost = geometric_cost(points, &center, radius);

    for _ in 0..MAX_REFINE_ITERATIONS {
        let mut jtj = Matrix4::zeros();
        let mut jtr = Vector4::zeros();
        for p in points {
            let d = p - center;
            let dist = d.norm();
            if dist == 0.0 {
                continue;
            }
            let row = Vector4::new(-d.x / dist, -d.y / dist, -d.z / dist, -1.0);
            let res = dist - radius;
            jtj += row * row.transpose();
            jtr += row * res;
        }
        let Some(step) = jtj.cholesky().map(|c| c.solve(&(-jtr))) else {
            break;
        };
        // Backtrack so the geometric cost never increases.
        let mut alpha = 1.0;
        let mut accepted = None;
        while alpha > 1e-6 {
            let c = center + Vector3::new(step[0], step[1], step[2]) * alpha;
            let r = radius + step[3] * alpha;
            let new_cost = geometric_cost(points, &c, r);
            if new_cost <= cost {
                accepted = Some((c, r, new_cost));
                break;
            }
            alpha *= 0.5;
        }
        let Some((c, r, new_cost)) = accepted else {
            break;
        };
        let change = cost - new_cost;
        center = c;
        radius = r;
        cost = new_cost;
        if change < COST_CHANGE_TOLERANCE {
            break;
        }
    }

    if radius <= 0.0 || !radius.is_finite() {
        return Err(Error::DegenerateSphere(format!(
            "refinement produced radius {radius}"
        )));
    }
    Ok(SphereFit {
        center,
        radius,
        rms_residual: (cost / n as f64).sqrt(),
    })
}

/// `Σ (‖pᵢ − c‖ − r)²`.
pub fn geometric_cost(points: &[Vector3<f64>], center: &Vector3<f64>, radius: f64) -> f64 {
    points
        .iter()
        .map(|p| {
            let e = (p - center).norm() - radius;
            e * e
        })
        .sum()
}
