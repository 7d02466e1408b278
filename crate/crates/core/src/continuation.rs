//! Pillar-point continuation of the solution curves.
//!
//! From a pillar point the curve is followed by `k` normalised Euler steps
//! along the tangent field (the cross product of the two residual
//! gradients); every intermediate point must keep the residual below `eps2`.
//! The last predicted point is then corrected back to the curve (`eps1`)
//! and becomes the next pillar. A segment that fails is retried with half
//! the step length.

use crate::boundary::{
    evaluate, newton_correct, BranchKind, CorrectorOptions, CurvePoint, Evaluation,
};
use crate::dynamics::INITIAL_RADIUS;
use crate::error::{Error, Result};
use crate::integrator::IntegratorConfig;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceConfig {
    /// Residual bound for pillar points.
    pub eps1: f64,
    /// Residual bound for predicted intermediate points.
    pub eps2: f64,
    /// Largest allowed distance between the last prediction and its pillar.
    pub eps3: f64,
    /// Predictor step length.
    pub h: f64,
    /// Predictor steps per segment.
    pub k: usize,
    /// `+1` starts toward increasing `b`, `-1` toward decreasing `b`.
    pub orientation: i8,
    /// Below this step length the segment length `k` is halved instead.
    pub h_min: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            eps1: 1e-6,
            eps2: 5e-5,
            eps3: 5e-5,
            h: 1e-3,
            k: 200,
            orientation: 1,
            h_min: 1e-6,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.eps1 > 0.0
            && self.eps1 < self.eps2
            && self.eps3 > 0.0
            && self.h > 0.0
            && self.k >= 1
            && (self.orientation == 1 || self.orientation == -1)
            && self.h_min > 0.0
            && self.h_min <= self.h;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("bad tolerance config {self:?}")))
        }
    }
}

/// Closed box in `(τ, a, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamBox {
    pub tau: (f64, f64),
    pub a: (f64, f64),
    pub b: (f64, f64),
}

impl Default for ParamBox {
    fn default() -> Self {
        Self {
            tau: (1e-3, 50.0),
            a: (0.0, 10.0),
            b: (0.0, 10.0),
        }
    }
}

impl ParamBox {
    pub fn contains(&self, pt: [f64; 3]) -> bool {
        let inside = |v: f64, (lo, hi): (f64, f64)| v >= lo && v <= hi;
        inside(pt[0], self.tau) && inside(pt[1], self.a) && inside(pt[2], self.b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopPolicy {
    /// Stop once `min R` over `[0, τ]` falls below this.
    pub collision_guard: f64,
    /// Stop once `|X| / (|row1| |row2|)` falls below this.
    pub zero_tangent: f64,
    pub max_pillars: usize,
    pub bounds: ParamBox,
}

impl Default for StopPolicy {
    fn default() -> Self {
        Self {
            collision_guard: 3e-4 * INITIAL_RADIUS,
            zero_tangent: 1e-8,
            max_pillars: 2000,
            bounds: ParamBox::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    ZeroTangent { relative_norm: f64 },
    CollisionProximity { min_r: f64 },
    CorrectorFailure { message: String },
    MaxPillars,
    LeftBox { point: [f64; 3] },
}

impl Termination {
    pub fn keyword(&self) -> &'static str {
        match self {
            Termination::ZeroTangent { .. } => "zero-tangent",
            Termination::CollisionProximity { .. } => "collision-proximity",
            Termination::CorrectorFailure { .. } => "corrector-failure",
            Termination::MaxPillars => "max-pillars",
            Termination::LeftBox { .. } => "left-box",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StopDecision {
    Continue,
    Stop(Termination),
}

/// An ordered run of curve points from one seed in one orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub kind: BranchKind,
    pub points: Vec<CurvePoint>,
    pub config: ToleranceConfig,
    pub termination: Termination,
}

impl Branch {
    pub fn pillars(&self) -> impl Iterator<Item = &CurvePoint> {
        self.points.iter().filter(|p| p.is_pillar)
    }

    pub fn pillar_count(&self) -> usize {
        self.pillars().count()
    }

    /// Cumulative Euclidean arc length at every point.
    pub fn arc_lengths(&self) -> Vec<f64> {
        let mut s = Vec::with_capacity(self.points.len());
        let mut acc = 0.0;
        for (i, p) in self.points.iter().enumerate() {
            if i > 0 {
                acc += dist(&self.points[i - 1].coords(), &p.coords());
            }
            s.push(acc);
        }
        s
    }

    /// Joins a branch traced in the opposite orientation from the same seed,
    /// giving one polyline running from `other`'s end through the seed to
    /// this branch's end.
    pub fn joined_with(&self, other: &Branch) -> Branch {
        let mut points: Vec<CurvePoint> = other.points.iter().rev().copied().collect();
        let skip = usize::from(
            matches!((points.last(), self.points.first()), (Some(a), Some(b)) if a.coords() == b.coords()),
        );
        points.extend(self.points.iter().skip(skip).copied());
        Branch {
            kind: self.kind,
            points,
            config: self.config,
            termination: self.termination.clone(),
        }
    }
}

pub(crate) fn dist(u: &[f64; 3], v: &[f64; 3]) -> f64 {
    ((u[0] - v[0]).powi(2) + (u[1] - v[1]).powi(2) + (u[2] - v[2]).powi(2)).sqrt()
}

fn dot(u: &[f64; 3], v: &[f64; 3]) -> f64 {
    u[0] * v[0] + u[1] * v[1] + u[2] * v[2]
}

fn norm(u: &[f64; 3]) -> f64 {
    dot(u, u).sqrt()
}

pub(crate) fn cross(u: &[f64; 3], v: &[f64; 3]) -> [f64; 3] {
    [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ]
}

/// Tangent field from an evaluation, plus its norm relative to the rows.
pub fn tangent_from_evaluation(eval: &Evaluation) -> ([f64; 3], f64) {
    let [r0, r1] = eval.jacobian;
    let x = cross(&r0, &r1);
    let scale = norm(&r0) * norm(&r1);
    let rel = if scale > 0.0 { norm(&x) / scale } else { 0.0 };
    (x, rel)
}

/// `X = ∇F' × ∇R'` for odd/even points, `Z = ∇F × ∇R'` for odd points.
pub fn tangent_field(pt: [f64; 3], kind: BranchKind, cfg: &IntegratorConfig) -> Result<[f64; 3]> {
    Ok(tangent_from_evaluation(&evaluate(pt, kind, cfg)?).0)
}

/// Sign convention for the first step: `+1` means increasing `b`
/// (or increasing `a` if the tangent has no `b` component).
pub fn initial_direction(tangent: [f64; 3], orientation: i8) -> [f64; 3] {
    let n = norm(&tangent);
    let lead = if tangent[2] != 0.0 { tangent[2] } else { tangent[1] };
    let s = if lead < 0.0 { -1.0 } else { 1.0 } * f64::from(orientation) / n;
    [tangent[0] * s, tangent[1] * s, tangent[2] * s]
}

fn aligned(tangent: [f64; 3], previous: &[f64; 3]) -> [f64; 3] {
    let n = norm(&tangent);
    let s = if dot(&tangent, previous) < 0.0 { -1.0 / n } else { 1.0 / n };
    [tangent[0] * s, tangent[1] * s, tangent[2] * s]
}

#[derive(Debug, Clone, Copy)]
pub struct Prediction {
    pub point: [f64; 3],
    /// Unit tangent used for the step.
    pub direction: [f64; 3],
}

/// One normalised Euler step of length `h` from `pt`. With `previous` the
/// step keeps a positive dot product with it; otherwise `orientation`
/// decides.
pub fn predictor_step(
    pt: [f64; 3],
    kind: BranchKind,
    h: f64,
    previous: Option<[f64; 3]>,
    orientation: i8,
    zero_tangent: f64,
    cfg: &IntegratorConfig,
) -> Result<Prediction> {
    let eval = evaluate(pt, kind, cfg)?;
    predict_from(&pt, &eval, h, previous, orientation, zero_tangent)
}

fn predict_from(
    pt: &[f64; 3],
    eval: &Evaluation,
    h: f64,
    previous: Option<[f64; 3]>,
    orientation: i8,
    zero_tangent: f64,
) -> Result<Prediction> {
    let (x, rel) = tangent_from_evaluation(eval);
    if !(rel >= zero_tangent) {
        return Err(Error::ZeroTangent { relative_norm: rel });
    }
    let direction = match previous {
        Some(prev) => aligned(x, &prev),
        None => initial_direction(x, orientation),
    };
    Ok(Prediction {
        point: [
            pt[0] + h * direction[0],
            pt[1] + h * direction[1],
            pt[2] + h * direction[2],
        ],
        direction,
    })
}

pub fn stop_policy_evaluate(
    pt: &CurvePoint,
    eval: &Evaluation,
    pillar_count: usize,
    policy: &StopPolicy,
) -> StopDecision {
    if !policy.bounds.contains(pt.coords()) {
        return StopDecision::Stop(Termination::LeftBox { point: pt.coords() });
    }
    if eval.min_r < policy.collision_guard {
        return StopDecision::Stop(Termination::CollisionProximity { min_r: eval.min_r });
    }
    let (_, rel) = tangent_from_evaluation(eval);
    if !(rel >= policy.zero_tangent) {
        return StopDecision::Stop(Termination::ZeroTangent { relative_norm: rel });
    }
    if pillar_count >= policy.max_pillars {
        return StopDecision::Stop(Termination::MaxPillars);
    }
    StopDecision::Continue
}

enum SegmentOutcome {
    Done {
        intermediates: Vec<CurvePoint>,
        pillar: CurvePoint,
        pillar_eval: Evaluation,
        direction: [f64; 3],
    },
    Retry(Error),
    Stop {
        intermediates: Vec<CurvePoint>,
        reason: Termination,
    },
}

struct Tracer<'a> {
    kind: BranchKind,
    tol: &'a ToleranceConfig,
    stop: &'a StopPolicy,
    cfg: &'a IntegratorConfig,
}

impl Tracer<'_> {
    fn segment(
        &self,
        start: [f64; 3],
        start_eval: &Evaluation,
        start_dir: [f64; 3],
        h: f64,
        k: usize,
        pillar_count: usize,
    ) -> SegmentOutcome {
        let mut y = start;
        let mut eval = *start_eval;
        let mut dir = start_dir;
        let mut intermediates = Vec::with_capacity(k);
        for _ in 0..k {
            let pred = match predict_from(&y, &eval, h, Some(dir), 1, self.stop.zero_tangent) {
                Ok(p) => p,
                Err(Error::ZeroTangent { relative_norm }) => {
                    return SegmentOutcome::Stop {
                        intermediates,
                        reason: Termination::ZeroTangent { relative_norm },
                    }
                }
                Err(e) => return SegmentOutcome::Retry(e),
            };
            y = pred.point;
            dir = pred.direction;
            if !self.stop.bounds.contains(y) {
                return SegmentOutcome::Stop {
                    intermediates,
                    reason: Termination::LeftBox { point: y },
                };
            }
            eval = match evaluate(y, self.kind, self.cfg) {
                Ok(e) => e,
                Err(e) => return SegmentOutcome::Retry(e),
            };
            let q = CurvePoint {
                tau: y[0],
                a: y[1],
                b: y[2],
                kind: self.kind,
                residual: eval.residual,
                is_pillar: false,
            };
            if !(q.residual_norm() < self.tol.eps2) {
                return SegmentOutcome::Retry(Error::NoConvergence {
                    iterations: 0,
                    residual: q.residual_norm(),
                    cause: Some("predicted point above eps2".into()),
                });
            }
            if let StopDecision::Stop(reason) = stop_policy_evaluate(&q, &eval, pillar_count, &StopPolicy {
                max_pillars: usize::MAX,
                ..*self.stop
            }) {
                return SegmentOutcome::Stop { intermediates, reason };
            }
            intermediates.push(q);
        }

        let (x, _) = tangent_from_evaluation(&eval);
        let corrector_dir = aligned(x, &dir);
        let opts = CorrectorOptions {
            eps: self.tol.eps1,
            max_iter: 20,
            max_distance: Some(self.tol.eps3),
            condition_limit: 1e12,
        };
        match newton_correct(y, self.kind, corrector_dir, &opts, self.cfg) {
            Ok(c) => {
                let (x, _) = tangent_from_evaluation(&c.evaluation);
                SegmentOutcome::Done {
                    intermediates,
                    pillar: c.point,
                    pillar_eval: c.evaluation,
                    direction: aligned(x, &corrector_dir),
                }
            }
            Err(e) => SegmentOutcome::Retry(e),
        }
    }
}

/// Follows the curve through `seed` until the stop policy fires.
pub fn trace_branch(
    seed: &CurvePoint,
    kind: BranchKind,
    tol: &ToleranceConfig,
    stop: &StopPolicy,
    cfg: &IntegratorConfig,
) -> Result<Branch> {
    tol.validate()?;
    cfg.validate()?;
    let seed_eval = evaluate(seed.coords(), kind, cfg)?;
    if !(crate::boundary::inf_norm(&seed_eval.residual) < tol.eps1) {
        return Err(Error::InvalidInput(format!(
            "seed residual {:e} is not below eps1 = {:e}",
            crate::boundary::inf_norm(&seed_eval.residual),
            tol.eps1
        )));
    }
    let seed_point = CurvePoint {
        kind,
        residual: seed_eval.residual,
        is_pillar: true,
        ..*seed
    };
    let mut points = vec![seed_point];
    let finish = |points: Vec<CurvePoint>, termination| Branch {
        kind,
        points,
        config: *tol,
        termination,
    };

    if let StopDecision::Stop(reason) = stop_policy_evaluate(&seed_point, &seed_eval, 1, stop) {
        return Ok(finish(points, reason));
    }
    let (x, _) = tangent_from_evaluation(&seed_eval);
    let mut dir = initial_direction(x, tol.orientation);
    let mut current = seed_point.coords();
    let mut current_eval = seed_eval;
    let mut h = tol.h;
    let mut k = tol.k;
    let mut pillar_count = 1;
    let tracer = Tracer {
        kind,
        tol,
        stop,
        cfg,
    };

    loop {
        match tracer.segment(current, &current_eval, dir, h, k, pillar_count) {
            SegmentOutcome::Done {
                intermediates,
                pillar,
                pillar_eval,
                direction,
            } => {
                points.extend(intermediates);
                points.push(pillar);
                pillar_count += 1;
                current = pillar.coords();
                current_eval = pillar_eval;
                dir = direction;
                if h < tol.h {
                    h = (2.0 * h).min(tol.h);
                } else if k < tol.k {
                    k = (2 * k).min(tol.k);
                }
                if let StopDecision::Stop(reason) =
                    stop_policy_evaluate(&pillar, &pillar_eval, pillar_count, stop)
                {
                    return Ok(finish(points, reason));
                }
            }
            SegmentOutcome::Stop {
                intermediates,
                reason,
            } => {
                points.extend(intermediates);
                return Ok(finish(points, reason));
            }
            SegmentOutcome::Retry(err) => {
                if h / 2.0 >= tol.h_min {
                    h /= 2.0;
                } else if k > 1 {
                    k /= 2;
                } else {
                    let reason = match err {
                        Error::Collision { r, .. } => Termination::CollisionProximity { min_r: r },
                        other => Termination::CorrectorFailure {
                            message: other.to_string(),
                        },
                    };
                    return Ok(finish(points, reason));
                }
            }
        }
    }
}
