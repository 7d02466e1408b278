//! Symmetry residuals, their Jacobians, and the Newton corrector.
//!
//! A point `(τ, a, b)` is a boundary-time coordinate: for odd/even orbits
//! `F'(τ) = R'(τ) = 0` and the reduced period is `4τ`; for odd orbits
//! `F(τ) = R'(τ) = 0` and the reduced period is `2τ`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, Vector3};

use crate::dynamics::{rhs_original_with_floor, ExtendedState, Parameters, ReducedState};
use crate::error::{Error, Result};
use crate::integrator::{integrate_observed, integrate_to, IntegratorConfig};

/// Which symmetry system a point solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BranchKind {
    /// `F'(τ) = R'(τ) = 0`; the curve S₁.
    OddEven,
    /// `F(τ) = R'(τ) = 0`; the curve S₂.
    Odd,
}

impl BranchKind {
    pub fn period_multiplier(self) -> f64 {
        match self {
            BranchKind::OddEven => 4.0,
            BranchKind::Odd => 2.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BranchKind::OddEven => "odd-even",
            BranchKind::Odd => "odd",
        }
    }
}

impl fmt::Display for BranchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BranchKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "odd-even" | "oddeven" | "s1" | "S1" => Ok(BranchKind::OddEven),
            "odd" | "s2" | "S2" => Ok(BranchKind::Odd),
            other => Err(Error::InvalidInput(format!("unknown branch kind '{other}'"))),
        }
    }
}

/// A point in boundary-time coordinates together with its residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub tau: f64,
    pub a: f64,
    pub b: f64,
    pub kind: BranchKind,
    pub residual: [f64; 2],
    pub is_pillar: bool,
}

impl CurvePoint {
    pub fn coords(&self) -> [f64; 3] {
        [self.tau, self.a, self.b]
    }

    pub fn params(&self) -> Parameters {
        Parameters::new(self.a, self.b)
    }

    /// Full reduced period.
    pub fn period(&self) -> f64 {
        self.kind.period_multiplier() * self.tau
    }

    pub fn residual_norm(&self) -> f64 {
        inf_norm(&self.residual)
    }
}

pub(crate) fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn check_point(pt: [f64; 3]) -> Result<()> {
    if !pt.iter().all(|v| v.is_finite()) || pt[0] <= 0.0 {
        return Err(Error::InvalidInput(format!("bad boundary point {pt:?}")));
    }
    Ok(())
}

fn pick(kind: BranchKind, x: &[f64]) -> [f64; 2] {
    match kind {
        BranchKind::OddEven => [x[2], x[3]],
        BranchKind::Odd => [x[0], x[3]],
    }
}

/// The two symmetry conditions at `τ`, from one reduced integration.
pub fn residual(pt: [f64; 3], kind: BranchKind, cfg: &IntegratorConfig) -> Result<[f64; 2]> {
    check_point(pt)?;
    let p = Parameters::new(pt[1], pt[2]);
    let (end, _) = integrate_to(&ReducedState::initial(p), p, pt[0], cfg, false)?;
    Ok(pick(kind, &end.x))
}

/// Residual, Jacobian and trajectory diagnostics from one extended run.
#[derive(Debug, Clone, Copy)]
pub struct Evaluation {
    pub residual: [f64; 2],
    /// Rows are gradients over `(τ, a, b)` of the two residual components.
    pub jacobian: [[f64; 3]; 2],
    /// Smallest `R` over the accepted steps on `[0, τ]`.
    pub min_r: f64,
    pub state: ExtendedState,
}

/// Jacobian rows of both systems from one extended state. The `R'` row is
/// shared.
pub fn jacobian_from_state(
    s: &ExtendedState,
    p: Parameters,
    kind: BranchKind,
    cfg: &IntegratorConfig,
) -> Result<[[f64; 3]; 2]> {
    let d = rhs_original_with_floor(&s.reduced(), p, cfg.collision_floor)?;
    let x = &s.x;
    let r_dot_row = [d[3], x[8], x[13]];
    let first = match kind {
        BranchKind::OddEven => [d[2], x[7], x[12]],
        BranchKind::Odd => [x[2], x[5], x[10]],
    };
    Ok([first, r_dot_row])
}

pub fn evaluate(pt: [f64; 3], kind: BranchKind, cfg: &IntegratorConfig) -> Result<Evaluation> {
    check_point(pt)?;
    let p = Parameters::new(pt[1], pt[2]);
    let mut min_r = f64::INFINITY;
    let (end, _) = integrate_observed(&ExtendedState::initial(p), p, pt[0], cfg, false, |s| {
        min_r = min_r.min(s.x[1])
    })?;
    Ok(Evaluation {
        residual: pick(kind, &end.x),
        jacobian: jacobian_from_state(&end, p, kind, cfg)?,
        min_r,
        state: end,
    })
}

pub fn residual_jacobian(
    pt: [f64; 3],
    kind: BranchKind,
    cfg: &IntegratorConfig,
) -> Result<[[f64; 3]; 2]> {
    Ok(evaluate(pt, kind, cfg)?.jacobian)
}

#[derive(Debug, Clone, Copy)]
pub struct CorrectorOptions {
    /// Target `‖residual‖∞`.
    pub eps: f64,
    pub max_iter: usize,
    /// Reject the result if it lands farther than this from the guess.
    pub max_distance: Option<f64>,
    /// Largest acceptable condition number of the augmented system.
    pub condition_limit: f64,
}

impl Default for CorrectorOptions {
    fn default() -> Self {
        Self {
            eps: 1e-6,
            max_iter: 20,
            max_distance: None,
            condition_limit: 1e12,
        }
    }
}

impl CorrectorOptions {
    pub fn with_eps(eps: f64) -> Self {
        Self {
            eps,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Correction {
    pub point: CurvePoint,
    pub iterations: usize,
    /// Euclidean distance from the guess.
    pub distance: f64,
    /// `point - guess`; orthogonal to the supplied direction.
    pub displacement: [f64; 3],
    pub evaluation: Evaluation,
}

fn condition_number(m: &Matrix3<f64>) -> f64 {
    let sv = m.singular_values();
    let (lo, hi) = (sv.min(), sv.max());
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Newton on the residual, restricted to the plane through `guess`
/// orthogonal to `direction`.
pub fn newton_correct(
    guess: [f64; 3],
    kind: BranchKind,
    direction: [f64; 3],
    opts: &CorrectorOptions,
    cfg: &IntegratorConfig,
) -> Result<Correction> {
    let dir = Vector3::from(direction);
    let dir_norm = dir.norm();
    if !(dir_norm > 0.0) || !dir_norm.is_finite() {
        return Err(Error::InvalidInput("corrector direction must be non-zero".into()));
    }
    let dir = dir / dir_norm;
    let start = Vector3::from(guess);
    let mut current = start;
    let mut iterations = 0;
    let mut last_residual = f64::NAN;

    let fail = |iterations: usize, residual: f64, e: Error| match e {
        Error::SingularJacobian { .. } | Error::InvalidInput(_) => e,
        other => Error::NoConvergence {
            iterations,
            residual,
            cause: Some(other.to_string()),
        },
    };

    loop {
        let pt = [current[0], current[1], current[2]];
        let eval = evaluate(pt, kind, cfg).map_err(|e| fail(iterations, last_residual, e))?;
        let norm = inf_norm(&eval.residual);
        last_residual = norm;
        if !norm.is_finite() {
            return Err(fail(iterations, norm, Error::InvalidInput("non-finite residual".into())));
        }
        if norm < opts.eps {
            let disp = current - start;
            let distance = disp.norm();
            if let Some(limit) = opts.max_distance {
                if distance > limit {
                    return Err(Error::CorrectorDrift { distance, limit });
                }
            }
            return Ok(Correction {
                point: CurvePoint {
                    tau: pt[0],
                    a: pt[1],
                    b: pt[2],
                    kind,
                    residual: eval.residual,
                    is_pillar: true,
                },
                iterations,
                distance,
                displacement: [disp[0], disp[1], disp[2]],
                evaluation: eval,
            });
        }
        if iterations >= opts.max_iter {
            return Err(Error::NoConvergence {
                iterations,
                residual: norm,
                cause: None,
            });
        }
        let j = eval.jacobian;
        let m = Matrix3::new(
            j[0][0], j[0][1], j[0][2], //
            j[1][0], j[1][1], j[1][2], //
            dir[0], dir[1], dir[2],
        );
        let condition = condition_number(&m);
        if !(condition <= opts.condition_limit) {
            return Err(Error::SingularJacobian { condition });
        }
        let rhs = Vector3::new(-eval.residual[0], -eval.residual[1], 0.0);
        let delta = m
            .lu()
            .solve(&rhs)
            .ok_or(Error::SingularJacobian { condition })?;
        // keep the accumulated correction exactly in the transverse plane
        let mut next = current + delta;
        let drift = (next - start).dot(&dir);
        next -= dir * drift;
        current = next;
        iterations += 1;
    }
}

/// Fixes `(a, b)` and solves one residual component for `τ` near
/// `tau_guess`, picking the component whose `τ`-derivative is larger. The
/// root is bracketed on the dense output of one integration and refined by
/// bisection, which stays robust where the component turns sharply near a
/// close approach.
pub fn solve_tau(
    a: f64,
    b: f64,
    kind: BranchKind,
    tau_guess: f64,
    cfg: &IntegratorConfig,
) -> Result<CurvePoint> {
    check_point([tau_guess, a, b])?;
    let p = Parameters::new(a, b);
    let (lo, hi) = (0.7 * tau_guess, 1.3 * tau_guess);
    let (_, dense) = integrate_to(&ReducedState::initial(p), p, hi, cfg, true)?;
    let dense = dense.expect("dense output requested");
    let at = |t: f64| dense.evaluate(t).expect("inside the dense span");

    let guess_state = at(tau_guess);
    let d = rhs_original_with_floor(&guess_state, p, cfg.collision_floor)?;
    let rate = match kind {
        BranchKind::OddEven => [d[2], d[3]],
        BranchKind::Odd => [d[0], d[3]],
    };
    let comp = if rate[0].abs() >= rate[1].abs() { 0 } else { 1 };
    let g = |t: f64| pick(kind, &at(t).x)[comp];

    const SAMPLES: usize = 600;
    let mut best: Option<(f64, f64)> = None;
    let mut prev_t = lo;
    let mut prev_g = g(lo);
    for i in 1..=SAMPLES {
        let t = lo + (hi - lo) * i as f64 / SAMPLES as f64;
        let gt = g(t);
        if prev_g == 0.0 || prev_g.signum() != gt.signum() {
            let closer = match best {
                None => true,
                Some((l, r)) => {
                    (0.5 * (prev_t + t) - tau_guess).abs() < (0.5 * (l + r) - tau_guess).abs()
                }
            };
            if closer {
                best = Some((prev_t, t));
            }
        }
        prev_t = t;
        prev_g = gt;
    }
    let (mut l, mut r) = best.ok_or_else(|| Error::NoConvergence {
        iterations: 0,
        residual: f64::NAN,
        cause: Some(format!("no sign change of the residual near tau = {tau_guess}")),
    })?;
    let mut gl = g(l);
    for _ in 0..200 {
        let m = 0.5 * (l + r);
        if m <= l || m >= r {
            break;
        }
        let gm = g(m);
        if gm == 0.0 {
            l = m;
            r = m;
            break;
        }
        if gm.signum() == gl.signum() {
            l = m;
            gl = gm;
        } else {
            r = m;
        }
    }
    let tau = 0.5 * (l + r);
    Ok(CurvePoint {
        tau,
        a,
        b,
        kind,
        residual: residual([tau, a, b], kind, cfg)?,
        is_pillar: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const P0: [f64; 3] = [2.6733789255846, 4.3170475352787, 1.490359743];

    fn cfg() -> IntegratorConfig {
        IntegratorConfig::default()
    }

    #[test]
    fn kind_parsing_and_multipliers() {
        assert_eq!("odd-even".parse::<BranchKind>().unwrap(), BranchKind::OddEven);
        assert_eq!("odd".parse::<BranchKind>().unwrap(), BranchKind::Odd);
        assert!("even".parse::<BranchKind>().is_err());
        assert_eq!(BranchKind::OddEven.period_multiplier(), 4.0);
        assert_eq!(BranchKind::Odd.period_multiplier(), 2.0);
    }

    #[test]
    fn equilibrium_residual_vanishes() {
        let a = Parameters::circular().a;
        for tau in [0.5, 3.0, 11.0] {
            let r = residual([tau, a, 0.0], BranchKind::OddEven, &cfg()).unwrap();
            assert!(inf_norm(&r) < 1e-12, "{r:?}");
        }
    }

    #[test]
    fn residual_rejects_bad_time() {
        assert!(residual([0.0, 1.0, 1.0], BranchKind::Odd, &cfg()).is_err());
        assert!(residual([f64::NAN, 1.0, 1.0], BranchKind::Odd, &cfg()).is_err());
    }

    #[test]
    fn jacobian_time_column_is_the_field() {
        let e = evaluate(P0, BranchKind::OddEven, &cfg()).unwrap();
        let p = Parameters::new(P0[1], P0[2]);
        let d = rhs_original_with_floor(&e.state.reduced(), p, 1e-8).unwrap();
        assert_eq!(e.jacobian[0][0], d[2]);
        assert_eq!(e.jacobian[1][0], d[3]);
        let odd = evaluate(P0, BranchKind::Odd, &cfg()).unwrap();
        assert_eq!(odd.jacobian[0][0], d[0]);
        // shared R' row
        assert_eq!(odd.jacobian[1], e.jacobian[1]);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let delta = 1e-6;
        for kind in [BranchKind::OddEven, BranchKind::Odd] {
            let jac = residual_jacobian(P0, kind, &cfg()).unwrap();
            for col in 0..3 {
                let mut plus = P0;
                let mut minus = P0;
                plus[col] += delta;
                minus[col] -= delta;
                let rp = residual(plus, kind, &cfg()).unwrap();
                let rm = residual(minus, kind, &cfg()).unwrap();
                for row in 0..2 {
                    let fd = (rp[row] - rm[row]) / (2.0 * delta);
                    let rel = (fd - jac[row][col]).abs() / fd.abs().max(1e-3);
                    assert!(rel < 1e-4, "{kind} [{row}][{col}]: fd {fd} vs {}", jac[row][col]);
                }
            }
        }
    }

    #[test]
    fn equilibrium_gradient_of_f_dot() {
        let a = Parameters::circular().a;
        let j = residual_jacobian([2.0, a, 0.0], BranchKind::OddEven, &cfg()).unwrap();
        assert_eq!(j[0][0], 0.0);
        assert_eq!(j[0][1], 0.0);
        assert!(j[0][2].abs() > 1e-3);
    }

    #[test]
    fn refines_p0() {
        let jac = residual_jacobian(P0, BranchKind::OddEven, &cfg()).unwrap();
        let x = cross(jac[0], jac[1]);
        let c = newton_correct(P0, BranchKind::OddEven, x, &CorrectorOptions::with_eps(1e-9), &cfg())
            .unwrap();
        assert!(c.iterations <= 10 && c.iterations >= 1);
        assert!(c.point.residual_norm() < 1e-9);
        assert!(c.distance < 1e-3);
        let n = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let along: f64 = (0..3).map(|i| c.displacement[i] * x[i] / n).sum();
        assert!(along.abs() < 1e-12, "{along}");

        // already converged: zero iterations, unchanged
        let again = newton_correct(
            c.point.coords(),
            BranchKind::OddEven,
            x,
            &CorrectorOptions::with_eps(1e-9),
            &cfg(),
        )
        .unwrap();
        assert_eq!(again.iterations, 0);
        assert_eq!(again.point.coords(), c.point.coords());
    }

    #[test]
    fn drift_limit_is_enforced() {
        let jac = residual_jacobian(P0, BranchKind::OddEven, &cfg()).unwrap();
        let x = cross(jac[0], jac[1]);
        let opts = CorrectorOptions {
            eps: 1e-12,
            max_distance: Some(1e-12),
            ..CorrectorOptions::default()
        };
        let err = newton_correct(P0, BranchKind::OddEven, x, &opts, &cfg()).unwrap_err();
        assert_eq!(err.kind(), "corrector-drift");
    }

    #[test]
    fn garbage_seed_fails() {
        let err = newton_correct(
            [2.6733789255846, 0.0, 0.0],
            BranchKind::OddEven,
            [1.0, 0.0, 0.0],
            &CorrectorOptions::with_eps(1e-9),
            &cfg(),
        )
        .unwrap_err();
        assert_eq!(err.kind(), "no-convergence");
    }

    #[test]
    fn max_iter_zero_reports_no_convergence() {
        let opts = CorrectorOptions {
            eps: 1e-14,
            max_iter: 0,
            ..CorrectorOptions::default()
        };
        let err = newton_correct(P0, BranchKind::OddEven, [1.0, 0.0, 0.0], &opts, &cfg()).unwrap_err();
        assert!(matches!(err, Error::NoConvergence { iterations: 0, .. }));
    }

    #[test]
    fn restricted_time_solve() {
        let pt = solve_tau(P0[1], P0[2], BranchKind::OddEven, P0[0], &cfg()).unwrap();
        assert!((pt.tau - P0[0]).abs() < 1e-5);
        assert!(pt.residual_norm() < 1e-6);
    }

    fn cross(u: [f64; 3], v: [f64; 3]) -> [f64; 3] {
        [
            u[1] * v[2] - u[2] * v[1],
            u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0],
        ]
    }
}
