//! Adaptive Taylor-series propagation of reduced and extended states, with
//! dense output, plus an independent Runge–Kutta reference path.

mod reference;
mod taylor;

pub use reference::reference_integrate;
pub use taylor::{TaylorTable, TaylorWorkspace};

use crate::dynamics::{
    rhs_extended_with_floor, rhs_original_with_floor, ExtendedState, Parameters, ReducedState,
    DEFAULT_COLLISION_FLOOR,
};
use crate::error::{Error, Result};

const SAFETY: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub taylor_order: usize,
    pub max_step: f64,
    pub min_step: f64,
    pub collision_floor: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            taylor_order: 20,
            max_step: 1.0,
            min_step: 1e-12,
            collision_floor: DEFAULT_COLLISION_FLOOR,
        }
    }
}

impl IntegratorConfig {
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.abs_tol = tol;
        self.rel_tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.abs_tol > 0.0
            && self.rel_tol > 0.0
            && (4..=40).contains(&self.taylor_order)
            && self.min_step > 0.0
            && self.min_step <= self.max_step
            && self.collision_floor >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("bad integrator config {self:?}")))
        }
    }
}

/// A state vector the integrators know how to advance.
pub trait OdeState: Copy + std::fmt::Debug + Send + Sync {
    const DIM: usize;

    fn time(&self) -> f64;
    fn values(&self) -> &[f64];
    fn from_values(t: f64, values: &[f64]) -> Self;
    fn rhs(&self, p: Parameters, collision_floor: f64) -> Result<Vec<f64>>;
    /// Components whose derivative flips sign under `t -> -t`.
    fn odd_slots() -> &'static [usize];

    /// Image under time reversal: `t -> -t`, velocities and `Θ` negated.
    fn reflected(&self) -> Self {
        let mut v = self.values().to_vec();
        for &i in Self::odd_slots() {
            v[i] = -v[i];
        }
        Self::from_values(-self.time(), &v)
    }
}

impl OdeState for ReducedState {
    const DIM: usize = 5;

    fn time(&self) -> f64 {
        self.t
    }
    fn values(&self) -> &[f64] {
        &self.x
    }
    fn from_values(t: f64, values: &[f64]) -> Self {
        let mut x = [0.0; 5];
        x.copy_from_slice(values);
        ReducedState { t, x }
    }
    fn rhs(&self, p: Parameters, floor: f64) -> Result<Vec<f64>> {
        rhs_original_with_floor(self, p, floor).map(|d| d.to_vec())
    }
    fn odd_slots() -> &'static [usize] {
        &[2, 3, 4]
    }
}

impl OdeState for ExtendedState {
    const DIM: usize = 15;

    fn time(&self) -> f64 {
        self.t
    }
    fn values(&self) -> &[f64] {
        &self.x
    }
    fn from_values(t: f64, values: &[f64]) -> Self {
        let mut x = [0.0; 15];
        x.copy_from_slice(values);
        ExtendedState { t, x }
    }
    fn rhs(&self, p: Parameters, floor: f64) -> Result<Vec<f64>> {
        rhs_extended_with_floor(self, p, floor).map(|d| d.to_vec())
    }
    fn odd_slots() -> &'static [usize] {
        &[2, 3, 4, 7, 8, 9, 12, 13, 14]
    }
}

/// Taylor coefficients of the solution through `s` up to `order`.
pub fn taylor_coefficients<S: OdeState>(s: &S, p: Parameters, order: usize) -> Result<TaylorTable> {
    if order < 1 {
        return Err(Error::InvalidInput("Taylor order must be at least 1".into()));
    }
    TaylorWorkspace::new().compute(s.time(), s.values(), p, order, DEFAULT_COLLISION_FLOOR)
}

#[derive(Debug, Clone)]
pub struct StepReport<S> {
    pub state: S,
    pub step: f64,
    pub error_estimate: f64,
}

/// Step control only looks at the five reduced components, so an extended
/// integration takes exactly the steps of the matching reduced one.
const CONTROL_DIM: usize = 5;

struct Stepper {
    ws: TaylorWorkspace,
    buf: Vec<f64>,
}

impl Stepper {
    fn new() -> Self {
        Self {
            ws: TaylorWorkspace::new(),
            buf: Vec::new(),
        }
    }

    /// Advances `s` by at most `remaining`. Returns the new state, the step,
    /// the local error estimate and the coefficient table used.
    fn advance<S: OdeState>(
        &mut self,
        s: &S,
        p: Parameters,
        cfg: &IntegratorConfig,
        remaining: f64,
    ) -> Result<(S, f64, f64, TaylorTable)> {
        let order = cfg.taylor_order;
        let table = self.ws.compute(s.time(), s.values(), p, order, cfg.collision_floor)?;
        let scale = table.order_norm(0, CONTROL_DIM);
        let eps = cfg.abs_tol.max(cfg.rel_tol * scale);

        let mut h = f64::INFINITY;
        for k in [order - 1, order] {
            let c = table.order_norm(k, CONTROL_DIM);
            if c > 0.0 {
                h = h.min((eps / c).powf(1.0 / k as f64));
            }
        }
        h = (SAFETY * h).min(cfg.max_step);
        if !h.is_finite() || h <= 0.0 {
            return Err(Error::StepSizeUnderflow {
                t: s.time(),
                step: h,
                min_step: cfg.min_step,
            });
        }
        let last = h >= remaining;
        if last {
            h = remaining;
        } else if h < cfg.min_step {
            return Err(Error::StepSizeUnderflow {
                t: s.time(),
                step: h,
                min_step: cfg.min_step,
            });
        }

        let err = (table.order_norm(order - 1, CONTROL_DIM) * h.powi(order as i32 - 1))
            .max(table.order_norm(order, CONTROL_DIM) * h.powi(order as i32));

        self.buf.resize(S::DIM, 0.0);
        table.eval_into(h, &mut self.buf);
        let t_next = if last { s.time() + remaining } else { s.time() + h };
        let next = S::from_values(t_next, &self.buf);
        if !next.values().iter().all(|v| v.is_finite()) {
            return Err(Error::StepSizeUnderflow {
                t: s.time(),
                step: h,
                min_step: cfg.min_step,
            });
        }
        Ok((next, h, err, table))
    }
}

/// One adaptive Taylor step forward in time.
pub fn step<S: OdeState>(s: &S, p: Parameters, cfg: &IntegratorConfig) -> Result<StepReport<S>> {
    let (state, step, error_estimate, _) = Stepper::new().advance(s, p, cfg, f64::INFINITY)?;
    Ok(StepReport {
        state,
        step,
        error_estimate,
    })
}

/// One accepted Taylor step kept for dense evaluation.
#[derive(Debug, Clone)]
pub struct DenseSegment {
    /// Start time in the integration variable (reflected time for backward runs).
    pub start: f64,
    pub step: f64,
    pub error_estimate: f64,
    pub table: TaylorTable,
}

/// Piecewise Taylor polynomials covering an integration span.
#[derive(Debug, Clone)]
pub struct DenseOutput<S> {
    reflected: bool,
    segments: Vec<DenseSegment>,
    _marker: std::marker::PhantomData<S>,
}

impl<S: OdeState> DenseOutput<S> {
    /// Covered span as `(t_min, t_max)`.
    pub fn span(&self) -> (f64, f64) {
        let (first, last) = match (self.segments.first(), self.segments.last()) {
            (Some(f), Some(l)) => (f.start, l.start + l.step),
            _ => return (f64::NAN, f64::NAN),
        };
        if self.reflected {
            (-last, -first)
        } else {
            (first, last)
        }
    }

    pub fn segments(&self) -> &[DenseSegment] {
        &self.segments
    }

    pub fn is_reflected(&self) -> bool {
        self.reflected
    }

    /// Evaluates the solution at `t`; `None` outside the covered span
    /// (widened by a few ulps so that rounded endpoints are accepted).
    pub fn evaluate(&self, t: f64) -> Option<S> {
        let s = if self.reflected { -t } else { t };
        let first = self.segments.first()?;
        let last = self.segments.last()?;
        let end = last.start + last.step;
        let slack = 1e-13 * first.start.abs().max(end.abs()).max(1.0);
        if s < first.start - slack || s > end + slack {
            return None;
        }
        let idx = self
            .segments
            .partition_point(|seg| seg.start + seg.step < s)
            .min(self.segments.len() - 1);
        let seg = &self.segments[idx];
        let mut buf = vec![0.0; S::DIM];
        seg.table.eval_into(s - seg.start, &mut buf);
        let y = S::from_values(s, &buf);
        Some(if self.reflected { y.reflected() } else { y })
    }

    /// States at every step boundary, in increasing time order.
    pub fn samples(&self) -> Vec<S> {
        let mut out = Vec::with_capacity(self.segments.len() + 1);
        let mut buf = vec![0.0; S::DIM];
        for (i, seg) in self.segments.iter().enumerate() {
            seg.table.eval_into(0.0, &mut buf);
            out.push(S::from_values(seg.start, &buf));
            if i + 1 == self.segments.len() {
                seg.table.eval_into(seg.step, &mut buf);
                out.push(S::from_values(seg.start + seg.step, &buf));
            }
        }
        if self.reflected {
            out.reverse();
            out.iter_mut().for_each(|y| *y = y.reflected());
        }
        out
    }
}

/// Integrates to exactly `t_end`. Backward spans run the time-reflected system.
pub fn integrate_to<S: OdeState>(
    s0: &S,
    p: Parameters,
    t_end: f64,
    cfg: &IntegratorConfig,
    want_dense: bool,
) -> Result<(S, Option<DenseOutput<S>>)> {
    integrate_observed(s0, p, t_end, cfg, want_dense, |_| {})
}

/// Like [`integrate_to`], calling `observe` on every accepted step endpoint
/// (in the original time direction).
pub fn integrate_observed<S: OdeState, F: FnMut(&S)>(
    s0: &S,
    p: Parameters,
    t_end: f64,
    cfg: &IntegratorConfig,
    want_dense: bool,
    mut observe: F,
) -> Result<(S, Option<DenseOutput<S>>)> {
    if !t_end.is_finite() || !s0.values().iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidInput("non-finite initial data or end time".into()));
    }
    let reflected = t_end < s0.time();
    let mut y = if reflected { s0.reflected() } else { *s0 };
    let target = if reflected { -t_end } else { t_end };
    let mut segments = Vec::new();
    let mut stepper = Stepper::new();
    observe(s0);
    while y.time() < target {
        let remaining = target - y.time();
        let (mut next, h, err, table) = stepper.advance(&y, p, cfg, remaining)?;
        if h == remaining {
            next = S::from_values(target, next.values());
        }
        if want_dense {
            segments.push(DenseSegment {
                start: y.time(),
                step: next.time() - y.time(),
                error_estimate: err,
                table,
            });
        }
        y = next;
        if reflected {
            observe(&y.reflected());
        } else {
            observe(&y);
        }
    }
    let end = if reflected { y.reflected() } else { y };
    let dense = want_dense.then(|| DenseOutput {
        reflected,
        segments,
        _marker: std::marker::PhantomData,
    });
    Ok((end, dense))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::energy;

    fn p0() -> Parameters {
        Parameters::new(4.3170475352787, 1.490359743)
    }

    #[test]
    fn equilibrium_step_is_stationary() {
        let p = Parameters::circular();
        let s = ReducedState::initial(p);
        let rep = step(&s, p, &IntegratorConfig::default()).unwrap();
        assert!(rep.step > 0.0 && rep.step <= 1.0);
        assert_eq!(rep.state.x[0], 0.0);
        assert!((rep.state.x[1] - 10.0).abs() < 1e-13);
        assert!(rep.state.x[3].abs() < 1e-13);
    }

    #[test]
    fn equilibrium_to_twenty() {
        let p = Parameters::circular();
        let (end, _) =
            integrate_to(&ReducedState::initial(p), p, 20.0, &IntegratorConfig::default(), false)
                .unwrap();
        assert_eq!(end.t, 20.0);
        assert!((end.x[1] - 10.0).abs() < 1e-9);
        assert_eq!(end.x[0], 0.0);
        assert!((end.x[4] - 2.0 * p.a).abs() < 1e-9);
    }

    #[test]
    fn endpoint_is_exact() {
        let p = p0();
        for &t_end in &[0.1, 2.6733789255846, 7.77777, 10.0] {
            let (end, _) =
                integrate_to(&ReducedState::initial(p), p, t_end, &IntegratorConfig::default(), false)
                    .unwrap();
            assert_eq!(end.t, t_end);
        }
        let (end, _) =
            integrate_to(&ReducedState::initial(p), p, -1.3, &IntegratorConfig::default(), false)
                .unwrap();
        assert_eq!(end.t, -1.3);
    }

    #[test]
    fn energy_drift_per_step_is_bounded() {
        let p = p0();
        let cfg = IntegratorConfig::default();
        let mut s = ReducedState::initial(p);
        for _ in 0..50 {
            let rep = step(&s, p, &cfg).unwrap();
            let de = (energy(&rep.state, p).unwrap() - energy(&s, p).unwrap()).abs();
            let tol = cfg.abs_tol.max(cfg.rel_tol * s.x.iter().fold(0.0f64, |m, v| m.max(v.abs())));
            // energy gradient is O(10^3) in these units
            assert!(de <= 10.0 * tol * 1e3, "drift {de}");
            s = rep.state;
        }
    }

    #[test]
    fn tighter_tolerance_gives_smaller_error_estimates() {
        let p = p0();
        let mut cfg = IntegratorConfig::default().with_tolerance(1e-8);
        cfg.max_step = 100.0;
        let s = ReducedState::initial(p);
        let mut prev = f64::INFINITY;
        for _ in 0..4 {
            let rep = step(&s, p, &cfg).unwrap();
            assert!(rep.error_estimate < prev);
            assert!(rep.error_estimate <= cfg.abs_tol.max(cfg.rel_tol * 10.0));
            prev = rep.error_estimate;
            cfg.abs_tol *= 0.5;
            cfg.rel_tol *= 0.5;
        }
    }

    #[test]
    fn extended_head_is_bitwise_reduced() {
        let p = p0();
        let cfg = IntegratorConfig::default();
        let (r, _) = integrate_to(&ReducedState::initial(p), p, 10.0, &cfg, false).unwrap();
        let (e, _) = integrate_to(&ExtendedState::initial(p), p, 10.0, &cfg, false).unwrap();
        for i in 0..5 {
            assert!((r.x[i] - e.x[i]).abs() <= 1e-12, "{i}");
        }
    }

    #[test]
    fn dense_output_matches_direct_integration() {
        let p = p0();
        let cfg = IntegratorConfig::default();
        let (_, dense) = integrate_to(&ReducedState::initial(p), p, 6.0, &cfg, true).unwrap();
        let dense = dense.unwrap();
        assert_eq!(dense.span(), (0.0, 6.0));
        for &t in &[0.0, 0.37, 2.0, 4.41, 6.0] {
            let (direct, _) = integrate_to(&ReducedState::initial(p), p, t, &cfg, false).unwrap();
            let d = dense.evaluate(t).unwrap();
            for i in 0..5 {
                assert!((d.x[i] - direct.x[i]).abs() < 1e-10, "t={t} i={i}");
            }
        }
        assert!(dense.evaluate(6.5).is_none());
        let samples = dense.samples();
        assert!(samples.windows(2).all(|w| w[0].t < w[1].t));
    }

    #[test]
    fn backward_dense_and_reversibility() {
        let p = p0();
        let cfg = IntegratorConfig::default();
        let (back, dense) = integrate_to(&ReducedState::initial(p), p, -3.0, &cfg, true).unwrap();
        let dense = dense.unwrap();
        assert_eq!(dense.span(), (-3.0, 0.0));
        let (fwd, _) = integrate_to(&ReducedState::initial(p), p, 3.0, &cfg, false).unwrap();
        // F odd, R even, Θ odd about t = 0
        assert!((back.x[0] + fwd.x[0]).abs() < 1e-10);
        assert!((back.x[1] - fwd.x[1]).abs() < 1e-10);
        assert!((back.x[4] + fwd.x[4]).abs() < 1e-10);
        let mid = dense.evaluate(-1.5).unwrap();
        assert_eq!(mid.t, -1.5);
        let samples = dense.samples();
        assert!(samples.windows(2).all(|w| w[0].t < w[1].t));
        assert_eq!(samples.first().unwrap().t, -3.0);
    }

    #[test]
    fn collision_reports_time() {
        // a = b = 0: radial free fall into the axis body
        let p = Parameters::new(0.0, 0.0);
        let err = integrate_to(&ReducedState::initial(p), p, 5.0, &IntegratorConfig::default(), false)
            .unwrap_err();
        let t = err.time_reached().expect("time reached");
        assert!(t > 2.0 && t < 2.4, "{err}");
    }

    #[test]
    fn config_validation() {
        assert!(IntegratorConfig::default().validate().is_ok());
        let mut cfg = IntegratorConfig::default();
        cfg.taylor_order = 3;
        assert!(cfg.validate().is_err());
        let mut cfg = IntegratorConfig::default();
        cfg.min_step = 2.0;
        assert!(cfg.validate().is_err());
    }
}
