//! Reduced equations of motion for the symmetric three-body family.
//!
//! Body 1 (mass 200) moves on the z axis at height `F`; bodies 2 and 3
//! (mass 100 each) sit at `(±R cos Θ, ±R sin Θ, -F)`. Together with
//! `R² Θ' = 10a` this gives the five-variable reduced system. The
//! fifteen-variable extended system appends the sensitivities of the
//! reduced state with respect to `a` and `b`.

use crate::error::{Error, Result};

/// Default lower bound on `R` and `S` below which the right-hand side refuses
/// to evaluate.
pub const DEFAULT_COLLISION_FLOOR: f64 = 1e-8;

/// Initial distance of the orbiting pair from the z axis.
pub const INITIAL_RADIUS: f64 = 10.0;

/// Family parameters: `a` scales the angular momentum, `b` is `F'(0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Parameters {
    pub a: f64,
    pub b: f64,
}

impl Parameters {
    pub fn new(a: f64, b: f64) -> Self {
        Self { a, b }
    }

    /// `a² = 45/2` with `b = 0` keeps the pair on the circle `R = 10`.
    pub fn circular() -> Self {
        Self {
            a: (45.0f64 / 2.0).sqrt(),
            b: 0.0,
        }
    }
}

/// `(F, R, F', R', Θ)` at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedState {
    pub t: f64,
    pub x: [f64; 5],
}

impl ReducedState {
    pub fn new(t: f64, x: [f64; 5]) -> Self {
        Self { t, x }
    }

    /// `F(0) = 0, R(0) = 10, F'(0) = b, R'(0) = 0, Θ(0) = 0`.
    pub fn initial(p: Parameters) -> Self {
        Self {
            t: 0.0,
            x: [0.0, INITIAL_RADIUS, p.b, 0.0, 0.0],
        }
    }

    pub fn f(&self) -> f64 {
        self.x[0]
    }
    pub fn r(&self) -> f64 {
        self.x[1]
    }
    pub fn f_dot(&self) -> f64 {
        self.x[2]
    }
    pub fn r_dot(&self) -> f64 {
        self.x[3]
    }
    pub fn theta(&self) -> f64 {
        self.x[4]
    }

    /// Distance from the axis body to either orbiting body.
    pub fn s(&self) -> f64 {
        (self.x[1] * self.x[1] + 4.0 * self.x[0] * self.x[0]).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.x.iter().all(|v| v.is_finite())
    }
}

/// Reduced state plus `∂/∂a` (slots 5..10) and `∂/∂b` (slots 10..15).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtendedState {
    pub t: f64,
    pub x: [f64; 15],
}

impl ExtendedState {
    pub fn new(t: f64, x: [f64; 15]) -> Self {
        Self { t, x }
    }

    /// Reduced initial data with `∂F'/∂b (0) = 1` and every other sensitivity zero.
    pub fn initial(p: Parameters) -> Self {
        let mut x = [0.0; 15];
        x[1] = INITIAL_RADIUS;
        x[2] = p.b;
        x[12] = 1.0;
        Self { t: 0.0, x }
    }

    pub fn reduced(&self) -> ReducedState {
        let mut x = [0.0; 5];
        x.copy_from_slice(&self.x[..5]);
        ReducedState { t: self.t, x }
    }

    /// `(∂F, ∂R, ∂F', ∂R', ∂Θ)` with respect to `a`.
    pub fn d_da(&self) -> [f64; 5] {
        let mut x = [0.0; 5];
        x.copy_from_slice(&self.x[5..10]);
        x
    }

    /// `(∂F, ∂R, ∂F', ∂R', ∂Θ)` with respect to `b`.
    pub fn d_db(&self) -> [f64; 5] {
        let mut x = [0.0; 5];
        x.copy_from_slice(&self.x[10..15]);
        x
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.x.iter().all(|v| v.is_finite())
    }
}

/// Cartesian positions of the three bodies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyPositions {
    pub body1: [f64; 3],
    pub body2: [f64; 3],
    pub body3: [f64; 3],
}

impl BodyPositions {
    pub fn center_of_mass(&self) -> [f64; 3] {
        let mut c = [0.0; 3];
        for i in 0..3 {
            c[i] = (200.0 * self.body1[i] + 100.0 * self.body2[i] + 100.0 * self.body3[i]) / 400.0;
        }
        c
    }
}

pub(crate) fn check_collision(t: f64, f: f64, r: f64, floor: f64) -> Result<f64> {
    let s2 = 4.0 * f * f + r * r;
    let s = s2.sqrt();
    if !(r > floor) || !(s > floor) {
        return Err(Error::Collision { t, r, s, floor });
    }
    Ok(s2)
}

/// Right-hand side of the reduced system.
pub fn rhs_original(s: &ReducedState, p: Parameters) -> Result<[f64; 5]> {
    rhs_original_with_floor(s, p, DEFAULT_COLLISION_FLOOR)
}

pub fn rhs_original_with_floor(s: &ReducedState, p: Parameters, floor: f64) -> Result<[f64; 5]> {
    let [x1, x2, x3, x4, _] = s.x;
    let s2 = check_collision(s.t, x1, x2, floor)?;
    let inv_s3 = 1.0 / (s2 * s2.sqrt());
    let a = p.a;
    Ok([
        x3,
        x4,
        -400.0 * x1 * inv_s3,
        100.0 * a * a / (x2 * x2 * x2) - 25.0 / (x2 * x2) - 200.0 * x2 * inv_s3,
        10.0 * a / (x2 * x2),
    ])
}

/// Right-hand side of the fifteen-variable system; the sensitivity rows are
/// the chain-rule derivative of the reduced field with respect to `a` and `b`.
pub fn rhs_extended(s: &ExtendedState, p: Parameters) -> Result<[f64; 15]> {
    rhs_extended_with_floor(s, p, DEFAULT_COLLISION_FLOOR)
}

pub fn rhs_extended_with_floor(s: &ExtendedState, p: Parameters, floor: f64) -> Result<[f64; 15]> {
    let head = rhs_original_with_floor(&s.reduced(), p, floor)?;
    let x = &s.x;
    let (x1, x2) = (x[0], x[1]);
    let a = p.a;
    let s2 = 4.0 * x1 * x1 + x2 * x2;
    let inv_s3 = 1.0 / (s2 * s2.sqrt());
    let inv_s5 = inv_s3 / s2;
    let inv_r2 = 1.0 / (x2 * x2);
    let inv_r3 = inv_r2 / x2;
    let inv_r4 = inv_r2 * inv_r2;

    let mut out = [0.0; 15];
    out[..5].copy_from_slice(&head);
    // Offsets 5 (wrt a) and 10 (wrt b) share the same linearisation; only the
    // explicit a-dependence of R'' and Θ' differs.
    for (base, explicit) in [(5usize, true), (10usize, false)] {
        let (df, dr, dfd, drd) = (x[base], x[base + 1], x[base + 2], x[base + 3]);
        let g = 4.0 * x1 * df + x2 * dr;
        out[base] = dfd;
        out[base + 1] = drd;
        out[base + 2] = -400.0 * df * inv_s3 + 1200.0 * x1 * inv_s5 * g;
        let mut rdd = -300.0 * a * a * dr * inv_r4 + 50.0 * dr * inv_r3 - 200.0 * dr * inv_s3
            + 600.0 * x2 * inv_s5 * g;
        let mut thd = -20.0 * a * dr * inv_r3;
        if explicit {
            rdd += 200.0 * a * inv_r3;
            thd += 10.0 * inv_r2;
        }
        out[base + 3] = rdd;
        out[base + 4] = thd;
    }
    Ok(out)
}

/// Total energy (kinetic plus potential, G = 1, masses 200/100/100).
pub fn energy(s: &ReducedState, p: Parameters) -> Result<f64> {
    let [x1, x2, x3, x4, _] = s.x;
    let s2 = check_collision(s.t, x1, x2, DEFAULT_COLLISION_FLOOR)?;
    let a = p.a;
    Ok(200.0 * x3 * x3 + 100.0 * x4 * x4 + 10000.0 * a * a / (x2 * x2)
        - 40000.0 / s2.sqrt()
        - 5000.0 / x2)
}

pub fn embed_positions(s: &ReducedState) -> BodyPositions {
    let [f, r, _, _, theta] = s.x;
    let (sin, cos) = theta.sin_cos();
    BodyPositions {
        body1: [0.0, 0.0, f],
        body2: [r * cos, r * sin, -f],
        body3: [-r * cos, -r * sin, -f],
    }
}

/// Cartesian velocities, laid out like [`BodyPositions`].
pub fn embed_velocities(s: &ReducedState, p: Parameters) -> BodyPositions {
    let [_, r, fd, rd, theta] = s.x;
    let (sin, cos) = theta.sin_cos();
    let omega = 10.0 * p.a / (r * r);
    let vx = rd * cos - r * omega * sin;
    let vy = rd * sin + r * omega * cos;
    BodyPositions {
        body1: [0.0, 0.0, fd],
        body2: [vx, vy, -fd],
        body3: [-vx, -vy, -fd],
    }
}

/// `(|body2 - body3|, |body1 - body2|)`.
pub fn pair_distances(s: &ReducedState) -> (f64, f64) {
    let pos = embed_positions(s);
    (distance(&pos.body2, &pos.body3), distance(&pos.body1, &pos.body2))
}

pub(crate) fn distance(u: &[f64; 3], v: &[f64; 3]) -> f64 {
    let d = [u[0] - v[0], u[1] - v[1], u[2] - v[2]];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn circular_equilibrium_is_stationary_in_r() {
        let p = Parameters::circular();
        let d = rhs_original(&ReducedState::new(0.0, [0.0, 10.0, 0.0, 0.0, 0.0]), p).unwrap();
        assert_eq!(d[0], 0.0);
        assert_eq!(d[1], 0.0);
        assert_eq!(d[2], 0.0);
        assert!(d[3].abs() < 1e-15);
        assert_relative_eq!(d[4], (22.5f64).sqrt() / 10.0, max_relative = 1e-15);
    }

    #[test]
    fn direct_substitution() {
        let d = rhs_original(
            &ReducedState::new(0.0, [0.0, 10.0, 1.0, 0.0, 0.0]),
            Parameters::new(2.0, 1.0),
        )
        .unwrap();
        assert_eq!(d[0], 1.0);
        assert_eq!(d[1], 0.0);
        assert_eq!(d[2], 0.0);
        assert_relative_eq!(d[3], -1.85, max_relative = 1e-14);
        assert_relative_eq!(d[4], 0.2, max_relative = 1e-15);
    }

    #[test]
    fn off_axis_state() {
        let d = rhs_original(
            &ReducedState::new(0.3, [3.0, 4.0, 0.0, 0.0, 0.0]),
            Parameters::new(1.0, 0.0),
        )
        .unwrap();
        let s3 = 52f64.powf(1.5);
        assert_relative_eq!(d[2], -1200.0 / s3, max_relative = 1e-14);
        assert_relative_eq!(d[3], 100.0 / 64.0 - 25.0 / 16.0 - 800.0 / s3, max_relative = 1e-13);
        assert_relative_eq!(d[4], 0.625, max_relative = 1e-15);
    }

    #[test]
    fn collision_is_rejected() {
        let p = Parameters::new(1.0, 1.0);
        let err = rhs_original(&ReducedState::new(1.5, [0.0, 1e-9, 0.0, 0.0, 0.0]), p).unwrap_err();
        assert_eq!(err.kind(), "collision");
        assert_eq!(err.time_reached(), Some(1.5));
        assert!(rhs_original(&ReducedState::new(0.0, [0.0, -1.0, 0.0, 0.0, 0.0]), p).is_err());
        assert!(energy(&ReducedState::new(0.0, [0.0, 0.0, 0.0, 0.0, 0.0]), p).is_err());
        let e = ExtendedState::new(0.0, [0.0; 15]);
        assert!(rhs_extended(&e, p).is_err());
    }

    #[test]
    fn extended_initial_derivative() {
        for &(a, b) in &[(4.3, 1.49), (1.0, 0.0), (0.2, 3.0)] {
            let p = Parameters::new(a, b);
            let d = rhs_extended(&ExtendedState::initial(p), p).unwrap();
            let mut expect = [0.0; 15];
            expect[0] = b;
            expect[3] = 0.1 * a * a - 2.25;
            expect[4] = a / 10.0;
            expect[8] = 0.2 * a;
            expect[9] = 0.1;
            expect[10] = 1.0;
            for i in 0..15 {
                assert!((d[i] - expect[i]).abs() < 1e-14, "slot {i}: {} vs {}", d[i], expect[i]);
            }
        }
    }

    fn random_extended(rng: &mut ChaCha8Rng) -> (ExtendedState, Parameters) {
        let mut x = [0.0; 15];
        for v in x.iter_mut() {
            *v = rng.gen_range(-5.0..5.0);
        }
        x[1] = rng.gen_range(0.1..15.0);
        (
            ExtendedState::new(rng.gen_range(0.0..10.0), x),
            Parameters::new(rng.gen_range(0.0..5.0), rng.gen_range(0.0..4.0)),
        )
    }

    #[test]
    fn extended_head_matches_original() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let (s, p) = random_extended(&mut rng);
            let full = rhs_extended(&s, p).unwrap();
            let head = rhs_original(&s.reduced(), p).unwrap();
            assert_eq!(&full[..5], &head[..]);
        }
    }

    #[test]
    fn x8_matches_chain_rule_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let (s, p) = random_extended(&mut rng);
            let d = rhs_extended(&s, p).unwrap();
            let x = &s.x;
            let (x1, x2, x6, x7) = (x[0], x[1], x[5], x[6]);
            let u = 4.0 * x1 * x1 + x2 * x2;
            let u52 = u.powf(2.5);
            let expanded = 3200.0 * x6 * x1 * x1 / u52 + 1200.0 * x2 * x7 * x1 / u52
                - 400.0 * x2 * x2 * x6 / u52;
            let scale = (3200.0 * x6 * x1 * x1 / u52).abs()
                + (1200.0 * x2 * x7 * x1 / u52).abs()
                + (400.0 * x2 * x2 * x6 / u52).abs();
            assert!((d[7] - expanded).abs() <= 1e-14 * scale.max(1e-300), "{} vs {}", d[7], expanded);
        }
    }

    /// Every sensitivity row is the derivative of the reduced field, so a
    /// directional finite difference of `rhs_original` must reproduce it.
    #[test]
    fn sensitivity_rows_are_linearisation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let (s, p) = random_extended(&mut rng);
            let d = rhs_extended(&s, p).unwrap();
            let h = 1e-6;
            for (base, da) in [(5usize, 1.0), (10usize, 0.0)] {
                let shift = |sign: f64| {
                    let mut y = [0.0; 5];
                    for i in 0..5 {
                        y[i] = s.x[i] + sign * h * s.x[base + i];
                    }
                    rhs_original(
                        &ReducedState::new(s.t, y),
                        Parameters::new(p.a + sign * h * da, p.b),
                    )
                    .unwrap()
                };
                let (fp, fm) = (shift(1.0), shift(-1.0));
                for i in 0..5 {
                    let fd = (fp[i] - fm[i]) / (2.0 * h);
                    assert!(
                        (fd - d[base + i]).abs() <= 1e-5 * (1.0 + fd.abs()),
                        "slot {}: fd {fd} vs {}",
                        base + i,
                        d[base + i]
                    );
                }
            }
        }
    }

    #[test]
    fn energy_values() {
        for &(a, b) in &[(4.3, 1.49), (1.0, 0.5)] {
            let p = Parameters::new(a, b);
            let e = energy(&ReducedState::initial(p), p).unwrap();
            assert_relative_eq!(e, 200.0 * b * b + 100.0 * a * a - 4500.0, max_relative = 1e-14);
        }
        let p = Parameters::circular();
        assert_relative_eq!(energy(&ReducedState::initial(p), p).unwrap(), -2250.0, max_relative = 1e-14);
    }

    #[test]
    fn embedding_examples() {
        let pos = embed_positions(&ReducedState::new(0.0, [0.0, 10.0, 0.0, 0.0, 0.0]));
        assert_eq!(pos.body1, [0.0, 0.0, 0.0]);
        assert_eq!(pos.body2, [10.0, 0.0, 0.0]);
        assert_eq!(pos.body3, [-10.0, 0.0, 0.0]);
        let pos = embed_positions(&ReducedState::new(
            0.0,
            [1.0, 10.0, 0.0, 0.0, std::f64::consts::FRAC_PI_2],
        ));
        assert!(pos.body2[0].abs() < 1e-14);
        assert_eq!(pos.body2[1], 10.0);
        assert_eq!(pos.body2[2], -1.0);
    }

    #[test]
    fn distances_examples() {
        assert_eq!(pair_distances(&ReducedState::new(0.0, [0.0, 10.0, 1.0, 2.0, 0.3])), (20.0, 10.0));
        let (outer, axis) = pair_distances(&ReducedState::new(0.0, [3.0, 4.0, 0.0, 0.0, 1.1]));
        assert_relative_eq!(outer, 8.0, max_relative = 1e-15);
        assert_relative_eq!(axis, 52f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn embedding_geometry_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let x = [
                rng.gen_range(-8.0..8.0),
                rng.gen_range(0.01..15.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-20.0..20.0),
            ];
            let s = ReducedState::new(0.0, x);
            let pos = embed_positions(&s);
            // Raw 3-vector distance, independent of `pair_distances`.
            let raw = ((pos.body1[0] - pos.body2[0]).powi(2)
                + (pos.body1[1] - pos.body2[1]).powi(2)
                + (pos.body1[2] - pos.body2[2]).powi(2))
            .sqrt();
            assert_relative_eq!(raw, s.s(), max_relative = 1e-14);
            assert_relative_eq!(pair_distances(&s).0, 2.0 * x[1], max_relative = 1e-14);
            let com = pos.center_of_mass();
            assert!(com.iter().all(|c| c.abs() < 1e-13), "{com:?}");
            // body3 mirrors body2 through the point (0, 0, -F)
            for i in 0..2 {
                assert_eq!(pos.body3[i], -pos.body2[i]);
            }
            assert_eq!(pos.body3[2], pos.body2[2]);
        }
    }
}
