//! Rotation algebra, rigid registration, Euler decomposition and sphere fitting.
//!
//! Everything here is pure and stateless.

mod euler;
mod rigid;
mod rotation;
mod sphere;

pub use euler::{euler_angles, EulerAngles, EulerKind, EulerSequence, GIMBAL_LOCK_THRESHOLD};
pub use rigid::{fit_rigid_transform, COLLINEARITY_RATIO};
pub use rotation::{skew, Axis, Pose, Rotation, ORTHONORMAL_DRIFT};
pub use sphere::{fit_sphere, geometric_cost, SphereFit, SPHERE_CONDITIONING};

/// Wraps an angle to (−π, π].
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut w = a % TAU;
    if w <= -PI {
        w += TAU;
    } else if w > PI {
        w -= TAU;
    }
    w
}

/// `sin(π·x)` that is exactly zero at integer `x` and exactly ±1 at half-integers.
pub fn sin_pi(x: f64) -> f64 {
    let r = x - x.round();
    if r == 0.0 {
        return 0.0;
    }
    let s = if r.abs() == 0.5 {
        r.signum()
    } else {
        (std::f64::consts::PI * r).sin()
    };
    // sin(π(n + r)) = (−1)ⁿ sin(πr)
    if (x.round() as i64).rem_euclid(2) == 0 {
        s
    } else {
        -s
    }
}
