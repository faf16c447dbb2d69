//! Brute-force grid-refinement oracles and the randomized instances they are
//! checked on. Nothing here calls the fitting code under test.

#![allow(dead_code)]

use limbgo_core::model::{JointName, KinematicModel, Segment};
use limbgo_core::solver::{GeneralizedCoordinates, WeightingScheme};
use limbgo_core::MarkerFrame;
use nalgebra::{Matrix3, Rotation3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::f64::consts::PI;

/// Keeps the `keep` lowest-cost grid points, then refines each by repeatedly
/// evaluating a 5-point-per-axis stencil around the incumbent and halving the
/// stencil. Returns the best point found.
fn refine<const D: usize>(
    coarse: Vec<[f64; D]>,
    initial_half_width: [f64; D],
    keep: usize,
    levels: usize,
    clamp: impl Fn(&mut [f64; D]),
    cost: impl Fn(&[f64; D]) -> f64,
) -> ([f64; D], f64) {
    let mut scored: Vec<(f64, [f64; D])> = coarse.into_iter().map(|p| (cost(&p), p)).collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let stencil = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let mut best = (f64::INFINITY, [0.0; D]);
    for &(f0, p0) in scored.iter().take(keep) {
        let (mut f, mut p) = (f0, p0);
        let mut h = initial_half_width;
        for _ in 0..levels {
            if (0..D).all(|k| h[k] < 1e-13 * (1.0 + p[k].abs())) {
                break;
            }
            let mut idx = [0usize; D];
            let (mut nf, mut np) = (f, p);
            'grid: loop {
                let mut q = p;
                for k in 0..D {
                    q[k] += stencil[idx[k]] * h[k];
                }
                clamp(&mut q);
                let fq = cost(&q);
                if fq < nf {
                    nf = fq;
                    np = q;
                }
                for k in 0..D {
                    idx[k] += 1;
                    if idx[k] < stencil.len() {
                        continue 'grid;
                    }
                    idx[k] = 0;
                }
                break;
            }
            if np == p {
                h.iter_mut().for_each(|x| *x *= 0.5);
            }
            f = nf;
            p = np;
        }
        if f < best.0 {
            best = (f, p);
        }
    }
    (best.1, best.0)
}

fn grid<const D: usize>(lo: [f64; D], hi: [f64; D], n: usize) -> Vec<[f64; D]> {
    let mut out = Vec::new();
    let mut idx = [0usize; D];
    'outer: loop {
        let mut p = [0.0; D];
        for k in 0..D {
            p[k] = lo[k] + (hi[k] - lo[k]) * idx[k] as f64 / (n - 1) as f64;
        }
        out.push(p);
        for k in 0..D {
            idx[k] += 1;
            if idx[k] < n {
                continue 'outer;
            }
            idx[k] = 0;
        }
        return out;
    }
}

pub struct RigidInstance {
    pub reference: Vec<Vector3<f64>>,
    pub current: Vec<Vector3<f64>>,
}

pub struct RigidOracle {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
    pub rms: f64,
}

/// Small noisy rigid-registration problem: 4 to 6 points in a 120 mm cube,
/// an arbitrary rigid motion, Gaussian noise of σ = 0.5 mm per coordinate.
pub fn rigid_instance(seed: u64) -> RigidInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(4..=6);
    let reference: Vec<Vector3<f64>> = (0..n)
        .map(|_| Vector3::from_fn(|_, _| rng.random_range(-60.0..60.0)))
        .collect();
    let axis = Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0)).normalize();
    let rot = Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axis), rng.random_range(0.0..PI));
    let d = Vector3::from_fn(|_, _| rng.random_range(-500.0..500.0));
    let noise = Normal::new(0.0, 0.5).unwrap();
    let current = reference
        .iter()
        .map(|x| rot * x + d + Vector3::from_fn(|_, _| noise.sample(&mut rng)))
        .collect();
    RigidInstance { reference, current }
}

/// Minimises `Σ ‖R(ω)·x + d − y‖²` by grid refinement over the rotation
/// vector ω; for fixed R the optimal d is the centroid difference.
pub fn rigid_oracle(inst: &RigidInstance) -> RigidOracle {
    let n = inst.reference.len() as f64;
    let cx = inst.reference.iter().sum::<Vector3<f64>>() / n;
    let cy = inst.current.iter().sum::<Vector3<f64>>() / n;
    let rot = |w: &[f64; 3]| Rotation3::new(Vector3::new(w[0], w[1], w[2])).into_inner();
    let cost = |w: &[f64; 3]| {
        let r = rot(w);
        inst.reference
            .iter()
            .zip(&inst.current)
            .map(|(x, y)| (r * (x - cx) - (y - cy)).norm_squared())
            .sum::<f64>()
    };
    let coarse: Vec<[f64; 3]> = grid([-PI; 3], [PI; 3], 25)
        .into_iter()
        .filter(|w| Vector3::new(w[0], w[1], w[2]).norm() <= PI * 1.05)
        .collect();
    let step = 2.0 * PI / 24.0;
    let (w, f) = refine(coarse, [step; 3], 4, 400, |_| {}, cost);
    let r = rot(&w);
    RigidOracle {
        rotation: r,
        translation: cy - r * cx,
        rms: (f / n).sqrt(),
    }
}

pub struct SphereInstance {
    pub points: Vec<Vector3<f64>>,
}

pub struct SphereOracle {
    pub center: Vector3<f64>,
    pub radius: f64,
    pub rms: f64,
}

/// Noisy samples (σ = 0.615 mm) on a spherical cap of half-angle 60° to 90°,
/// radius 50 to 200 mm.
pub fn sphere_instance(seed: u64) -> SphereInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(10..=30);
    let center = Vector3::from_fn(|_, _| rng.random_range(-200.0..200.0));
    let radius = rng.random_range(50.0..200.0);
    let pole = Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0)).normalize();
    let cap = rng.random_range(60.0f64..90.0).to_radians();
    let noise = Normal::new(0.0, 0.615).unwrap();
    let mut points = Vec::with_capacity(n);
    while points.len() < n {
        let u = Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0));
        if u.norm() > 1.0 || u.norm() < 1e-3 {
            continue;
        }
        let u = u.normalize();
        if u.dot(&pole) < cap.cos() {
            continue;
        }
        points.push(center + u * radius + Vector3::from_fn(|_, _| noise.sample(&mut rng)));
    }
    SphereInstance { points }
}

/// Minimises `Σ (‖p − c‖ − r)²` by grid refinement over c; for fixed c the
/// optimal r is the mean distance.
pub fn sphere_oracle(inst: &SphereInstance) -> SphereOracle {
    let pts = &inst.points;
    let n = pts.len() as f64;
    let centroid = pts.iter().sum::<Vector3<f64>>() / n;
    let spread = pts.iter().map(|p| (p - centroid).norm()).fold(0.0, f64::max);
    let eval = |c: &[f64; 3]| {
        let c = Vector3::new(c[0], c[1], c[2]);
        let d: Vec<f64> = pts.iter().map(|p| (p - c).norm()).collect();
        let r = d.iter().sum::<f64>() / n;
        (d.iter().map(|x| (x - r).powi(2)).sum::<f64>(), r)
    };
    let half = 3.0 * spread;
    let lo = [centroid.x - half, centroid.y - half, centroid.z - half];
    let hi = [centroid.x + half, centroid.y + half, centroid.z + half];
    let cells = 25;
    let step = 2.0 * half / (cells - 1) as f64;
    let (c, f) = refine(grid(lo, hi, cells), [step; 3], 4, 400, |_| {}, |c| eval(c).0);
    SphereOracle {
        center: Vector3::new(c[0], c[1], c[2]),
        radius: eval(&c).1,
        rms: (f / n).sqrt(),
    }
}

/// Weighted GO cost written out from the marker predictions.
pub fn weighted_cost(
    model: &KinematicModel,
    frame: &MarkerFrame,
    weights: &WeightingScheme,
    q: &GeneralizedCoordinates,
) -> f64 {
    let predicted = model.predict_markers(q);
    let w = weights.weights();
    Segment::ALL
        .iter()
        .map(|&seg| {
            model
                .segment(seg)
                .markers
                .iter()
                .filter_map(|m| Some((predicted.get(m)? - frame.get(m)?).norm_squared()))
                .sum::<f64>()
                * w[seg.index()]
        })
        .sum()
}

/// Minimises the GO cost over elbow flexion-extension and abduction-adduction
/// only, every other coordinate held at `base`. Abduction-adduction is kept
/// inside `[lo, hi]`. Returns `(flexion, abduction)`.
pub fn go_slice_oracle(
    model: &KinematicModel,
    frame: &MarkerFrame,
    weights: &WeightingScheme,
    base: &GeneralizedCoordinates,
    abduction_bounds: (f64, f64),
) -> [f64; 2] {
    let elbow = JointName::Elbow.index();
    let (lo, hi) = abduction_bounds;
    let flex0 = base.joints[elbow].angles[0];
    let span = 0.4;
    let at = |p: &[f64; 2]| {
        let mut q = *base;
        q.joints[elbow].angles[0] = p[0];
        q.joints[elbow].angles[1] = p[1];
        weighted_cost(model, frame, weights, &q)
    };
    let cells = 41;
    let coarse = grid([flex0 - span, lo], [flex0 + span, hi], cells);
    let steps = [2.0 * span / (cells - 1) as f64, (hi - lo) / (cells - 1) as f64];
    let (p, _) = refine(coarse, steps, 4, 400, |p| p[1] = p[1].clamp(lo, hi), at);
    p
}
