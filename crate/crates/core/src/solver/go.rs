use nalgebra::{DMatrix, DVector, Vector3};
use serde::{Deserialize, Serialize};

use super::constraint::JointConstraint;
use super::coords::{joint_offset, project, CoordVector, GeneralizedCoordinates, DOF};
use super::weights::WeightingScheme;
use crate::error::{Error, Result};
use crate::model::{KinematicModel, MarkerFrame, Segment};

/// Coordinates held at their initial value during a solve (`true` = fixed).
pub type FixedMask = [bool; DOF];

/// Every coordinate free.
pub const FREE: FixedMask = [false; DOF];

/// The six trunk coordinates fixed, everything else free.
pub fn trunk_fixed_mask() -> FixedMask {
    let mut m = FREE;
    m[..6].fill(true);
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightUpdate {
    /// Weights from each frame's own segmental residuals.
    PerFrame,
    /// One set of weights from the trial-wide RMS segmental residuals.
    TrialConstant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrunkHandling {
    /// Trunk pose optimised jointly with the rest of the chain.
    Optimized,
    /// Trunk pose taken from its own segmental fit and held fixed.
    FixedFromSegmental,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Relative KKT tolerance: stop when the projected gradient norm is at most
    /// `kkt_tolerance · (1 + cost)`.
    pub kkt_tolerance: f64,
    pub weighting: WeightUpdate,
    pub trunk: TrunkHandling,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iterations: 200,
            kkt_tolerance: 1e-8,
            weighting: WeightUpdate::PerFrame,
            trunk: TrunkHandling::Optimized,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be ≥ 1".into()));
        }
        if !(self.kkt_tolerance.is_finite() && self.kkt_tolerance > 0.0) {
            return Err(Error::InvalidConfig("kkt_tolerance must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveDiagnostics {
    /// Accepted steps.
    pub iterations: usize,
    /// Weighted squared marker error at the returned point (mm², weighted).
    pub final_cost: f64,
    /// Largest normalised constraint violation at the returned point.
    pub max_violation: f64,
    /// Norm of the gradient projected onto the tangent cone.
    pub kkt_norm: f64,
    pub converged: bool,
    /// Whether `q_init` had to be projected onto the feasible set.
    pub projected_start: bool,
    /// Cost at the start and after every accepted step.
    pub cost_history: Vec<f64>,
    /// Largest evaluation-error bound on the cost over the iterates; successive
    /// costs never rise by more than this.
    pub cost_tolerance: f64,
}

/// GO solve with default options and every coordinate free.
pub fn go_solve(
    model: &KinematicModel,
    frame: &MarkerFrame,
    weights: &WeightingScheme,
    q_init: &GeneralizedCoordinates,
) -> Result<(GeneralizedCoordinates, SolveDiagnostics)> {
    go_solve_with(model, frame, weights, q_init, &SolverOptions::default(), &FREE)
}

/// Minimises `Σ_s w_s Σ_{m∈s} ‖predict(q)_m − observed_m‖²` over the feasible
/// set by active-set projected Gauss-Newton with an Armijo search along the
/// projection arc, falling back to projected gradient when the Gauss-Newton
/// direction fails.
pub fn go_solve_with(
    model: &KinematicModel,
    frame: &MarkerFrame,
    weights: &WeightingScheme,
    q_init: &GeneralizedCoordinates,
    options: &SolverOptions,
    fixed: &FixedMask,
) -> Result<(GeneralizedCoordinates, SolveDiagnostics)> {
    options.validate()?;
    let problem = Problem::new(model, frame, weights, fixed)?;
    let mut v = q_init.to_vector();
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InfeasibleStart("initial coordinates are not finite".into()));
    }
    let start = v;
    project(&mut v, &problem.constraints);
    let projected_start = v != start;

    let (mut f, mut r, mut jac, mut noise) = problem.linearise(&v);
    let mut history = vec![f];
    let mut cost_tolerance = noise;
    let mut iterations = 0;
    let mut kkt;
    loop {
        let jt_r = jac.tr_mul(&r);
        let g = CoordVector::from_iterator(jt_r.iter().map(|x| 2.0 * x));
        kkt = problem.kkt_norm(&v, &g);
        if kkt <= options.kkt_tolerance * (1.0 + f) || iterations >= options.max_iterations {
            break;
        }
        let jtj = jac.tr_mul(&jac);
        let gn = problem.gauss_newton_direction(&v, &g, &jtj);

        let next = if -g.dot(&gn) <= noise {
            // The model decrease is below what the cost can resolve, so Armijo
            // would only chase rounding. Take the full step when the gradient
            // confirms it.
            let mut next = v + gn;
            project(&mut next, &problem.constraints);
            let lin = problem.linearise(&next);
            let g_next = CoordVector::from_iterator(lin.2.tr_mul(&lin.1).iter().map(|x| 2.0 * x));
            (lin.0 <= f + noise.max(lin.3) && problem.kkt_norm(&next, &g_next) <= 0.5 * kkt)
                .then_some((next, lin))
        } else {
            problem
                .arc_search(&v, f, &g, &gn, 40)
                .or_else(|| {
                    let s = problem.free_part(&CoordVector::from_iterator(jt_r.iter().copied()));
                    let js = &jac * DVector::from_iterator(DOF, s.iter().copied());
                    let denom = js.norm_squared();
                    if denom == 0.0 {
                        return None;
                    }
                    let d = -s * (s.norm_squared() / denom);
                    problem.arc_search(&v, f, &g, &d, 80)
                })
                .map(|next| (next, problem.linearise(&next)))
        };
        let Some((next, lin)) = next else { break };
        v = next;
        iterations += 1;
        (f, r, jac, noise) = lin;
        cost_tolerance = cost_tolerance.max(noise);
        history.push(f);
    }

    let q = GeneralizedCoordinates::from_vector(&v);
    let max_violation = q.max_violation(&problem.constraints);
    let converged = kkt <= options.kkt_tolerance * (1.0 + f) && max_violation <= 1e-9;
    Ok((
        q,
        SolveDiagnostics {
            iterations,
            final_cost: f,
            max_violation,
            kkt_norm: kkt,
            converged,
            projected_start,
            cost_history: history,
            cost_tolerance,
        },
    ))
}

/// Weighted GO cost at `q`.
pub fn go_cost(
    model: &KinematicModel,
    frame: &MarkerFrame,
    weights: &WeightingScheme,
    q: &GeneralizedCoordinates,
) -> Result<f64> {
    let problem = Problem::new(model, frame, weights, &FREE)?;
    Ok(problem.cost(&q.to_vector()))
}

/// Rounding factor in the cost evaluation-error bound.
const COST_ROUNDING: f64 = 16.0 * f64::EPSILON;

/// Relative slack used to decide that a coordinate sits on its bound.
const ON_BOUND: f64 = 1e-10;

struct Problem<'a> {
    model: &'a KinematicModel,
    observed: Vec<Vector3<f64>>,
    /// √weight per tracked marker, 0 where absent.
    sqrt_w: Vec<f64>,
    constraints: [JointConstraint; 3],
    fixed: FixedMask,
}

/// What the active set does to one constrained joint.
#[derive(Clone, Copy, Default)]
struct JointActivity {
    box_active: bool,
    ball_active: bool,
}

impl<'a> Problem<'a> {
    fn new(
        model: &'a KinematicModel,
        frame: &MarkerFrame,
        weights: &WeightingScheme,
        fixed: &FixedMask,
    ) -> Result<Self> {
        let w = weights.weights();
        let mut observed = Vec::with_capacity(model.marker_count());
        let mut sqrt_w = Vec::with_capacity(model.marker_count());
        for seg in Segment::ALL {
            let def = model.segment(seg);
            let obs = def.observed(frame);
            let present = obs.iter().flatten().count();
            if present < 3 {
                return Err(Error::DegenerateCluster(format!(
                    "{seg} cluster has {present} of {} markers present at t = {}",
                    def.markers.len(),
                    frame.time
                )));
            }
            for o in obs {
                observed.push(o.unwrap_or_else(Vector3::zeros));
                sqrt_w.push(if o.is_some() { w[seg.index()].sqrt() } else { 0.0 });
            }
        }
        Ok(Problem {
            model,
            observed,
            sqrt_w,
            constraints: model.constraints(),
            fixed: *fixed,
        })
    }

    fn cost(&self, v: &CoordVector) -> f64 {
        let q = GeneralizedCoordinates::from_vector(v);
        self.model
            .predict_positions(&q)
            .iter()
            .zip(&self.observed)
            .zip(&self.sqrt_w)
            .map(|((p, o), s)| s * s * (p - o).norm_squared())
            .sum()
    }

    /// Cost, weighted residual vector, weighted Jacobian (fixed columns zeroed)
    /// and a bound on the cost's evaluation error.
    fn linearise(&self, v: &CoordVector) -> (f64, DVector<f64>, DMatrix<f64>, f64) {
        let q = GeneralizedCoordinates::from_vector(v);
        let (pred, mut jac) = self.model.predict_with_jacobian(&q);
        let mut r = DVector::zeros(3 * pred.len());
        let mut noise = 0.0;
        for (m, ((p, o), s)) in pred.iter().zip(&self.observed).zip(&self.sqrt_w).enumerate() {
            let e = (p - o) * *s;
            noise += 2.0 * s * e.norm() * (p.norm() + o.norm());
            for k in 0..3 {
                r[3 * m + k] = e[k];
                jac.row_mut(3 * m + k).scale_mut(*s);
            }
        }
        for (c, &fx) in self.fixed.iter().enumerate() {
            if fx {
                jac.column_mut(c).fill(0.0);
            }
        }
        let f = r.norm_squared();
        (f, r, jac, COST_ROUNDING * (noise + f))
    }

    fn free_part(&self, x: &CoordVector) -> CoordVector {
        let mut y = *x;
        for (c, &fx) in self.fixed.iter().enumerate() {
            if fx {
                y[c] = 0.0;
            }
        }
        y
    }

    /// Bounded angle index, its interval, and the ball radius of joint `j`, if constrained.
    fn bounds(&self, j: usize) -> Option<(usize, f64, f64, f64)> {
        match self.constraints[j] {
            JointConstraint::Unconstrained => None,
            JointConstraint::Cardanic {
                bounded_angle,
                min_rad,
                max_rad,
                max_dislocation_mm,
            } => Some((joint_offset(j) + bounded_angle, min_rad, max_rad, max_dislocation_mm)),
        }
    }

    /// +1 at the upper bound, −1 at the lower, 0 strictly inside.
    fn box_side(v: &CoordVector, i: usize, lo: f64, hi: f64) -> f64 {
        let slack = ON_BOUND * (1.0 + hi.abs().max(lo.abs()));
        if v[i] >= hi - slack {
            1.0
        } else if v[i] <= lo + slack {
            -1.0
        } else {
            0.0
        }
    }

    fn translation(v: &CoordVector, j: usize) -> Vector3<f64> {
        let o = joint_offset(j) + 3;
        Vector3::new(v[o], v[o + 1], v[o + 2])
    }

    /// Outward unit normal if the translation sits on its ball boundary.
    fn ball_normal(v: &CoordVector, j: usize, radius: f64) -> Option<Vector3<f64>> {
        let t = Self::translation(v, j);
        let n = t.norm();
        (n > 0.0 && n >= radius * (1.0 - ON_BOUND)).then(|| t / n)
    }

    fn gauss_newton_direction(
        &self,
        v: &CoordVector,
        g: &CoordVector,
        jtj: &DMatrix<f64>,
    ) -> CoordVector {
        let mut activity = [JointActivity::default(); 3];
        for (j, act) in activity.iter_mut().enumerate() {
            if let Some((i, lo, hi, radius)) = self.bounds(j) {
                // Active when the descent direction −g leaves the feasible set.
                act.box_active = Self::box_side(v, i, lo, hi) * -g[i] > 0.0;
                if let Some(n) = Self::ball_normal(v, j, radius) {
                    let o = joint_offset(j) + 3;
                    let gt = Vector3::new(g[o], g[o + 1], g[o + 2]);
                    act.ball_active = -gt.dot(&n) > 0.0;
                }
            }
        }
        let mut d = CoordVector::zeros();
        for _ in 0..8 {
            d = self.reduced_step(v, g, jtj, &activity);
            let mut changed = false;
            for (j, act) in activity.iter_mut().enumerate() {
                if let Some((i, lo, hi, radius)) = self.bounds(j) {
                    if !act.box_active && Self::box_side(v, i, lo, hi) * d[i] > 0.0 {
                        act.box_active = true;
                        changed = true;
                    }
                    if !act.ball_active {
                        if let Some(n) = Self::ball_normal(v, j, radius) {
                            let o = joint_offset(j) + 3;
                            if Vector3::new(d[o], d[o + 1], d[o + 2]).dot(&n) > 0.0 {
                                act.ball_active = true;
                                changed = true;
                            }
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        d
    }

    /// Gauss-Newton step restricted to the subspace left free by the active set.
    fn reduced_step(
        &self,
        v: &CoordVector,
        g: &CoordVector,
        jtj: &DMatrix<f64>,
        activity: &[JointActivity; 3],
    ) -> CoordVector {
        let mut excluded = self.fixed;
        let mut columns: Vec<CoordVector> = Vec::new();
        let mut curvature: Vec<(usize, f64)> = Vec::new();
        for (j, act) in activity.iter().enumerate() {
            if let Some((i, _, _, radius)) = self.bounds(j) {
                if act.box_active {
                    excluded[i] = true;
                }
                if act.ball_active {
                    let o = joint_offset(j) + 3;
                    excluded[o..o + 3].fill(true);
                    let n = Self::ball_normal(v, j, radius).unwrap_or_else(Vector3::x);
                    let a = if n.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
                    let t1 = n.cross(&a).normalize();
                    let t2 = n.cross(&t1);
                    // Multiplier of ‖t‖² ≤ R² (half-scaled like JᵀJ); its curvature
                    // term keeps the tangent model second-order on the sphere.
                    let gt = Vector3::new(g[o], g[o + 1], g[o + 2]);
                    let mu = (-gt.dot(&n) / (2.0 * radius)).max(0.0);
                    if !self.fixed[o..o + 3].iter().any(|&f| f) {
                        for t in [t1, t2] {
                            let mut c = CoordVector::zeros();
                            c.fixed_rows_mut::<3>(o).copy_from(&t);
                            curvature.push((columns.len(), mu));
                            columns.push(c);
                        }
                    }
                }
            }
        }
        for (c, &ex) in excluded.iter().enumerate() {
            if !ex {
                columns.push(CoordVector::ith(c, 1.0));
            }
        }
        if columns.is_empty() {
            return CoordVector::zeros();
        }
        let k = columns.len();
        let z = DMatrix::from_fn(DOF, k, |r, c| columns[c][r]);
        let mut h = z.tr_mul(jtj) * &z;
        for (c, mu) in curvature {
            h[(c, c)] += mu;
        }
        let b = -(z.tr_mul(&DVector::from_iterator(DOF, g.iter().copied()))) * 0.5;
        let scale = h.diagonal().max().max(f64::MIN_POSITIVE);
        let mut damping = 0.0;
        for _ in 0..12 {
            let mut hd = h.clone();
            for i in 0..k {
                hd[(i, i)] += damping;
            }
            if let Some(ch) = hd.cholesky() {
                let dz = ch.solve(&b);
                let d = z * dz;
                return CoordVector::from_iterator(d.iter().copied());
            }
            damping = if damping == 0.0 { scale * 1e-12 } else { damping * 100.0 };
        }
        CoordVector::zeros()
    }

    /// Armijo backtracking on `α ↦ P(v + α·d)`; returns the accepted point.
    fn arc_search(
        &self,
        v: &CoordVector,
        f: f64,
        g: &CoordVector,
        d: &CoordVector,
        max_halvings: usize,
    ) -> Option<CoordVector> {
        if d.iter().all(|x| *x == 0.0) || d.iter().any(|x| !x.is_finite()) {
            return None;
        }
        let mut alpha = 1.0;
        for _ in 0..max_halvings {
            let mut trial = v + d * alpha;
            project(&mut trial, &self.constraints);
            let predicted = g.dot(&(trial - v));
            if predicted < 0.0 {
                let f_trial = self.cost(&trial);
                if f_trial <= f + 1e-4 * predicted {
                    return Some(trial);
                }
            }
            alpha *= 0.5;
        }
        None
    }

    /// Norm of the projection of `−g` onto the tangent cone of the feasible set at `v`.
    fn kkt_norm(&self, v: &CoordVector, g: &CoordVector) -> f64 {
        let mut p = -self.free_part(g);
        for j in 0..3 {
            if let Some((i, lo, hi, radius)) = self.bounds(j) {
                let side = Self::box_side(v, i, lo, hi);
                if side * p[i] > 0.0 {
                    p[i] = 0.0;
                }
                if let Some(n) = Self::ball_normal(v, j, radius) {
                    let o = joint_offset(j) + 3;
                    let pt = Vector3::new(p[o], p[o + 1], p[o + 2]);
                    let out = pt.dot(&n);
                    if out > 0.0 {
                        p.fixed_rows_mut::<3>(o).copy_from(&(pt - n * out));
                    }
                }
            }
        }
        p.norm()
    }
}
