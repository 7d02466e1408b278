//! The crossing of the odd/even curve with the odd curve.
//!
//! Every odd/even solution with quarter period `τ` is also an odd solution
//! at `2τ`, so the odd tangent field `Z` evaluated at `(2τ, a, b)` is
//! parallel to the odd/even curve. Where a second odd curve crosses, the odd
//! Jacobian drops rank and `Z` vanishes; the crossing is located as the
//! minimiser of `‖Z‖` along the traced curve.

use rayon::prelude::*;

use crate::boundary::{evaluate, newton_correct, residual, BranchKind, CorrectorOptions, CurvePoint};
use crate::continuation::{cross, dist, tangent_from_evaluation, Branch};
use crate::error::{Error, Result};
use crate::integrator::IntegratorConfig;

/// Arc-length bracket below which the refinement stops.
pub const REFINE_TOLERANCE: f64 = 1e-6;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

fn norm(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// `Z = ∇F × ∇R'` of the odd system at `(2τ, a, b)` for an odd/even point.
pub fn z_field(pt: &CurvePoint, cfg: &IntegratorConfig) -> Result<[f64; 3]> {
    let eval = evaluate([2.0 * pt.tau, pt.a, pt.b], BranchKind::Odd, cfg)?;
    Ok(tangent_from_evaluation(&eval).0)
}

/// Angle between `Z` and the odd/even tangent mapped to `(2τ, a, b)`
/// coordinates, i.e. `(2X₀, X₁, X₂)`.
pub fn parallelism_angle(pt: &CurvePoint, cfg: &IntegratorConfig) -> Result<f64> {
    let z = z_field(pt, cfg)?;
    let x = tangent_from_evaluation(&evaluate(pt.coords(), BranchKind::OddEven, cfg)?).0;
    let mapped = [2.0 * x[0], x[1], x[2]];
    let sine = norm(&cross(&z, &mapped)) / (norm(&z) * norm(&mapped));
    Ok(sine.clamp(0.0, 1.0).asin())
}

/// `(arc length, ‖Z‖)` at every stored point of an odd/even branch.
pub fn z_profile(branch: &Branch, cfg: &IntegratorConfig) -> Result<Vec<(f64, f64)>> {
    if branch.kind != BranchKind::OddEven {
        return Err(Error::InvalidInput("the Z profile needs an odd/even branch".into()));
    }
    let s = branch.arc_lengths();
    branch
        .points
        .par_iter()
        .zip(s.par_iter())
        .map(|(p, &s)| Ok((s, norm(&z_field(p, cfg)?))))
        .collect()
}

/// Index of the smallest `‖Z‖`, which must not sit at either end.
pub fn interior_argmin(profile: &[(f64, f64)]) -> Result<usize> {
    let (idx, _) = profile
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .ok_or(Error::NoInteriorMinimum { index: 0, len: 0 })?;
    if idx == 0 || idx + 1 == profile.len() {
        return Err(Error::NoInteriorMinimum {
            index: idx,
            len: profile.len(),
        });
    }
    Ok(idx)
}

/// Golden-section minimisation of `f` on `[lo, hi]`. Returns the best
/// abscissa, its value, and the best value after every iteration.
pub fn golden_section<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<(f64, f64, Vec<f64>)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    let mut best = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    let mut history = vec![best.1];
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
            if f1 < best.1 {
                best = (x1, f1);
            }
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
            if f2 < best.1 {
                best = (x2, f2);
            }
        }
        history.push(best.1);
    }
    Ok((best.0, best.1, history))
}

#[derive(Debug, Clone)]
pub struct BifurcationReport {
    /// Refined point in quarter-period coordinates.
    pub point: CurvePoint,
    /// `(T, a, b)` with `T = 4τ`.
    pub period_coords: [f64; 3],
    pub z_norm: f64,
    /// Smallest `‖Z‖` over the stored branch points.
    pub coarse_min: f64,
    /// Neighbouring branch points around the discrete minimum.
    pub bracket: (CurvePoint, CurvePoint),
    /// Best `‖Z‖` after each refinement iteration; never increases.
    pub history: Vec<f64>,
    /// Odd residual at `(2τ, a, b)`.
    pub odd_residual: [f64; 2],
}

/// Locates the minimum of `‖Z‖` along an odd/even branch and refines it.
pub fn find_bifurcation(branch: &Branch, cfg: &IntegratorConfig) -> Result<BifurcationReport> {
    if branch.points.len() < 3 {
        return Err(Error::InvalidInput("a branch needs at least three points".into()));
    }
    let profile = z_profile(branch, cfg)?;
    find_bifurcation_with_profile(branch, &profile, cfg)
}

/// As [`find_bifurcation`] with a profile computed earlier.
pub fn find_bifurcation_with_profile(
    branch: &Branch,
    profile: &[(f64, f64)],
    cfg: &IntegratorConfig,
) -> Result<BifurcationReport> {
    let i = interior_argmin(profile)?;
    let coarse_min = profile[i].1;
    let pts = &branch.points;
    let (lo, hi) = (profile[i - 1].0, profile[i + 1].0);

    let on_polyline = |s: f64| -> ([f64; 3], [f64; 3]) {
        let j = if s <= profile[i].0 { i - 1 } else { i };
        let (p, q) = (pts[j].coords(), pts[j + 1].coords());
        let len = dist(&p, &q);
        let w = if len > 0.0 { ((s - profile[j].0) / len).clamp(0.0, 1.0) } else { 0.0 };
        let dir = [q[0] - p[0], q[1] - p[1], q[2] - p[2]];
        ([p[0] + w * dir[0], p[1] + w * dir[1], p[2] + w * dir[2]], dir)
    };
    let opts = CorrectorOptions::with_eps(1e-11);
    let project = |s: f64| -> Result<CurvePoint> {
        let (guess, dir) = on_polyline(s);
        Ok(newton_correct(guess, BranchKind::OddEven, dir, &opts, cfg)?.point)
    };

    let (s_best, z_best, mut history) =
        golden_section(|s| Ok(norm(&z_field(&project(s)?, cfg)?)), lo, hi, REFINE_TOLERANCE)?;
    let (point, z_norm) = if z_best <= coarse_min {
        (project(s_best)?, z_best)
    } else {
        history.push(coarse_min);
        (pts[i], coarse_min)
    };
    let odd_residual = residual([2.0 * point.tau, point.a, point.b], BranchKind::Odd, cfg)?;
    Ok(BifurcationReport {
        point,
        period_coords: [4.0 * point.tau, point.a, point.b],
        z_norm,
        coarse_min,
        bracket: (pts[i - 1], pts[i + 1]),
        history,
        odd_residual,
    })
}
