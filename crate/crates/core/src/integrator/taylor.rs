//! Taylor coefficients of the reduced and extended fields by automatic
//! differentiation of the right-hand side.
//!
//! Every intermediate quantity of the vector field is carried as a truncated
//! power series. Coefficient `k` of each intermediate only needs coefficients
//! `0..=k` of the state, so the state series is built one order at a time
//! with `x[k + 1] = f[k] / (k + 1)`.

use crate::dynamics::{check_collision, Parameters};
use crate::error::Result;

/// Coefficients `c[k][i]` of `x_i(t0 + h) = Σ c[k][i] h^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorTable {
    dim: usize,
    order: usize,
    coeffs: Vec<f64>,
}

impl TaylorTable {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeff(&self, k: usize, i: usize) -> f64 {
        self.coeffs[k * self.dim + i]
    }

    /// Max-norm of order-`k` coefficients over the first `m` variables.
    pub fn order_norm(&self, k: usize, m: usize) -> f64 {
        self.coeffs[k * self.dim..k * self.dim + m]
            .iter()
            .fold(0.0f64, |acc, c| acc.max(c.abs()))
    }

    /// Horner evaluation of every component at offset `h`.
    pub fn eval_into(&self, h: f64, out: &mut [f64]) {
        let d = self.dim;
        out[..d].copy_from_slice(&self.coeffs[self.order * d..(self.order + 1) * d]);
        for k in (0..self.order).rev() {
            let row = &self.coeffs[k * d..(k + 1) * d];
            for i in 0..d {
                out[i] = out[i] * h + row[i];
            }
        }
    }
}

#[inline]
fn cauchy(a: &[f64], b: &[f64], k: usize) -> f64 {
    let mut acc = 0.0;
    for j in 0..=k {
        acc += a[j] * b[k - j];
    }
    acc
}

/// `w = u^alpha`, coefficient `k`.
#[inline]
fn power(u: &[f64], w: &[f64], alpha: f64, k: usize) -> f64 {
    if k == 0 {
        return u[0].powf(alpha);
    }
    let mut acc = 0.0;
    for j in 0..k {
        acc += (alpha * (k - j) as f64 - j as f64) * u[k - j] * w[j];
    }
    acc / (k as f64 * u[0])
}

/// `p = 1 / d`, coefficient `k`.
#[inline]
fn reciprocal(d: &[f64], p: &[f64], k: usize) -> f64 {
    if k == 0 {
        return 1.0 / d[0];
    }
    let mut acc = 0.0;
    for j in 1..=k {
        acc += d[j] * p[k - j];
    }
    -acc / d[0]
}

/// Scratch series reused across steps.
#[derive(Debug, Default)]
pub struct TaylorWorkspace {
    x: Vec<Vec<f64>>,
    x1sq: Vec<f64>,
    x2sq: Vec<f64>,
    u: Vec<f64>,
    w: Vec<f64>,
    v: Vec<f64>,
    p: Vec<f64>,
    p2: Vec<f64>,
    p3: Vec<f64>,
    p4: Vec<f64>,
    g: [Vec<f64>; 2],
    vg: [Vec<f64>; 2],
}

fn reset(buf: &mut Vec<f64>, n: usize) {
    buf.clear();
    buf.resize(n, 0.0);
}

impl TaylorWorkspace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Coefficients up to `order` about the state `x0` (5 or 15 components).
    pub fn compute(
        &mut self,
        t: f64,
        x0: &[f64],
        p: Parameters,
        order: usize,
        collision_floor: f64,
    ) -> Result<TaylorTable> {
        let dim = x0.len();
        debug_assert!(dim == 5 || dim == 15);
        let extended = dim == 15;
        check_collision(t, x0[0], x0[1], collision_floor)?;

        let n = order + 1;
        self.x.resize_with(dim, Vec::new);
        for (i, xi) in self.x.iter_mut().enumerate() {
            reset(xi, n);
            xi[0] = x0[i];
        }
        for buf in [
            &mut self.x1sq,
            &mut self.x2sq,
            &mut self.u,
            &mut self.w,
            &mut self.v,
            &mut self.p,
            &mut self.p2,
            &mut self.p3,
            &mut self.p4,
        ] {
            reset(buf, n);
        }
        for buf in self.g.iter_mut().chain(self.vg.iter_mut()) {
            reset(buf, n);
        }

        let a = p.a;
        let a2 = a * a;
        let mut f = [0.0; 15];
        for k in 0..order {
            let x = &self.x;
            self.x1sq[k] = cauchy(&x[0], &x[0], k);
            self.x2sq[k] = cauchy(&x[1], &x[1], k);
            self.u[k] = 4.0 * self.x1sq[k] + self.x2sq[k];
            self.w[k] = power(&self.u, &self.w, -1.5, k);
            self.p[k] = reciprocal(&x[1], &self.p, k);
            self.p2[k] = cauchy(&self.p, &self.p, k);
            self.p3[k] = cauchy(&self.p2, &self.p, k);

            f[0] = x[2][k];
            f[1] = x[3][k];
            f[2] = -400.0 * cauchy(&x[0], &self.w, k);
            f[3] = 100.0 * a2 * self.p3[k] - 25.0 * self.p2[k] - 200.0 * cauchy(&x[1], &self.w, k);
            f[4] = 10.0 * a * self.p2[k];

            if extended {
                self.v[k] = power(&self.u, &self.v, -2.5, k);
                self.p4[k] = cauchy(&self.p2, &self.p2, k);
                for (slot, base) in [5usize, 10].into_iter().enumerate() {
                    let (df, dr) = (&x[base], &x[base + 1]);
                    self.g[slot][k] = 4.0 * cauchy(&x[0], df, k) + cauchy(&x[1], dr, k);
                    self.vg[slot][k] = cauchy(&self.v, &self.g[slot], k);
                    let vg = &self.vg[slot];
                    f[base] = x[base + 2][k];
                    f[base + 1] = x[base + 3][k];
                    f[base + 2] = -400.0 * cauchy(df, &self.w, k) + 1200.0 * cauchy(&x[0], vg, k);
                    let dr_p3 = cauchy(dr, &self.p3, k);
                    f[base + 3] = -300.0 * a2 * cauchy(dr, &self.p4, k) + 50.0 * dr_p3
                        - 200.0 * cauchy(dr, &self.w, k)
                        + 600.0 * cauchy(&x[1], vg, k);
                    f[base + 4] = -20.0 * a * dr_p3;
                    if base == 5 {
                        f[base + 3] += 200.0 * a * self.p3[k];
                        f[base + 4] += 10.0 * self.p2[k];
                    }
                }
            }

            let scale = 1.0 / (k + 1) as f64;
            for i in 0..dim {
                self.x[i][k + 1] = f[i] * scale;
            }
        }

        let mut coeffs = vec![0.0; n * dim];
        for (i, xi) in self.x.iter().enumerate() {
            for k in 0..n {
                coeffs[k * dim + i] = xi[k];
            }
        }
        Ok(TaylorTable { dim, order, coeffs })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{rhs_extended, rhs_original, ExtendedState, ReducedState};

    #[test]
    fn first_order_is_the_vector_field() {
        let p = Parameters::new(1.7, 2.1);
        let x = [0.7, 6.5, -0.3, 1.2, 0.4];
        let mut ws = TaylorWorkspace::new();
        let table = ws.compute(0.0, &x, p, 6, 1e-8).unwrap();
        let f = rhs_original(&ReducedState::new(0.0, x), p).unwrap();
        for i in 0..5 {
            assert_eq!(table.coeff(0, i), x[i]);
            assert!((table.coeff(1, i) - f[i]).abs() <= 1e-15 * f[i].abs().max(1.0));
        }

        let mut xe = [0.0; 15];
        xe[..5].copy_from_slice(&x);
        for (i, v) in xe.iter_mut().enumerate().skip(5) {
            *v = 0.1 * i as f64 - 0.8;
        }
        let table = ws.compute(0.0, &xe, p, 6, 1e-8).unwrap();
        let f = rhs_extended(&ExtendedState::new(0.0, xe), p).unwrap();
        for i in 0..15 {
            assert!(
                (table.coeff(1, i) - f[i]).abs() <= 1e-13 * f[i].abs().max(1.0),
                "slot {i}: {} vs {}",
                table.coeff(1, i),
                f[i]
            );
        }
    }

    #[test]
    fn equilibrium_radius_has_no_higher_terms() {
        let p = Parameters::circular();
        let mut ws = TaylorWorkspace::new();
        let table = ws.compute(0.0, &[0.0, 10.0, 0.0, 0.0, 0.0], p, 20, 1e-8).unwrap();
        for k in 1..=20 {
            assert!(table.coeff(k, 1).abs() < 1e-15, "order {k}: {}", table.coeff(k, 1));
            assert_eq!(table.coeff(k, 0), 0.0);
        }
    }

    /// The second coefficient of x1 against a central difference of x3'
    /// along a short trajectory, and the general second-order structure
    /// `c2 = f'(x) f(x) / 2` against a difference of the field.
    #[test]
    fn second_order_matches_finite_differences() {
        let p = Parameters::new(4.3, 1.49);
        let x = [0.9, 8.0, 1.1, -0.6, 0.2];
        let mut ws = TaylorWorkspace::new();
        let table = ws.compute(0.0, &x, p, 4, 1e-8).unwrap();
        let f0 = rhs_original(&ReducedState::new(0.0, x), p).unwrap();
        assert!((table.coeff(2, 0) - 0.5 * f0[2]).abs() < 1e-15);

        let h = 1e-6;
        let shifted = |sign: f64| {
            let mut y = x;
            for i in 0..5 {
                y[i] += sign * h * f0[i];
            }
            rhs_original(&ReducedState::new(0.0, y), p).unwrap()
        };
        let (fp, fm) = (shifted(1.0), shifted(-1.0));
        for i in 0..5 {
            let second = 0.5 * (fp[i] - fm[i]) / (2.0 * h);
            assert!(
                (table.coeff(2, i) - second).abs() < 1e-7 * second.abs().max(1.0),
                "slot {i}: {} vs {second}",
                table.coeff(2, i)
            );
        }
    }

    #[test]
    fn collision_floor_is_checked() {
        let mut ws = TaylorWorkspace::new();
        let err = ws
            .compute(2.0, &[0.0, 1e-9, 0.0, 0.0, 0.0], Parameters::new(1.0, 0.0), 10, 1e-8)
            .unwrap_err();
        assert_eq!(err.kind(), "collision");
    }

    #[test]
    fn horner_evaluation() {
        let p = Parameters::new(2.0, 1.0);
        let mut ws = TaylorWorkspace::new();
        let table = ws.compute(0.0, &[0.0, 10.0, 1.0, 0.0, 0.0], p, 3, 1e-8).unwrap();
        let mut out = [0.0; 5];
        table.eval_into(0.5, &mut out);
        for i in 0..5 {
            let direct: f64 = (0..=3).map(|k| table.coeff(k, i) * 0.5f64.powi(k as i32)).sum();
            assert!((out[i] - direct).abs() < 1e-14);
        }
    }
}
