//! Second-order forward-mode automatic differentiation.
//!
//! A [`Jet2`] carries a value, the full gradient over the `1 + 2N` inputs
//! `(t, x₁..x_N, v₁..v_N)`, and the full symmetric Hessian. Propagation rules
//! are exact, so polynomials of degree ≤ 2 differentiate without rounding
//! beyond ordinary f64 arithmetic, and inputs that an expression never
//! mentions keep exactly-zero derivative entries.
//!
//! The Hessian is stored dense. At desk scale (N ≤ 8, dim ≤ 17) the dense
//! representation is both the fastest and the simplest choice.

use std::fmt;

/// Input slot layout: `t` first, then coordinates, then velocities.
pub fn slot_t() -> usize {
    0
}

pub fn slot_x(k: usize) -> usize {
    1 + k
}

pub fn slot_v(k: usize, n: usize) -> usize {
    1 + n + k
}

/// Value, gradient, and Hessian of a scalar at one dynamic state.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    pub val: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
    dim: usize,
}

/// Evaluation left the domain of a primitive (division by zero, square root
/// of a non-positive argument, logarithm of a non-positive argument, ...).
#[derive(Debug, Clone, PartialEq)]
pub struct DomainError {
    pub op: &'static str,
    pub detail: String,
}

impl fmt::Display for DomainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "domain error in {}: {}", self.op, self.detail)
    }
}

impl std::error::Error for DomainError {}

/// Square roots are rejected below this argument so that constraint frames
/// built from speed-like quantities fail loudly at kinks instead of feeding
/// near-infinite derivatives into the solvers (the guard corresponds to a
/// speed of 1e-9).
const SQRT_ARG_GUARD: f64 = 1e-18;

impl Jet2 {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constant(val: f64, dim: usize) -> Self {
        Self { val, grad: vec![0.0; dim], hess: vec![0.0; dim * dim], dim }
    }

    /// Seed for input slot `slot`.
    pub fn variable(val: f64, slot: usize, dim: usize) -> Self {
        let mut j = Self::constant(val, dim);
        j.grad[slot] = 1.0;
        j
    }

    pub fn hess_at(&self, i: usize, j: usize) -> f64 {
        self.hess[i * self.dim + j]
    }

    pub fn add(&self, rhs: &Jet2) -> Jet2 {
        let mut out = self.clone();
        out.val += rhs.val;
        for i in 0..self.dim {
            out.grad[i] += rhs.grad[i];
        }
        for i in 0..self.dim * self.dim {
            out.hess[i] += rhs.hess[i];
        }
        out
    }

    pub fn sub(&self, rhs: &Jet2) -> Jet2 {
        let mut out = self.clone();
        out.val -= rhs.val;
        for i in 0..self.dim {
            out.grad[i] -= rhs.grad[i];
        }
        for i in 0..self.dim * self.dim {
            out.hess[i] -= rhs.hess[i];
        }
        out
    }

    pub fn neg(&self) -> Jet2 {
        let mut out = self.clone();
        out.val = -out.val;
        for g in out.grad.iter_mut() {
            *g = -*g;
        }
        for h in out.hess.iter_mut() {
            *h = -*h;
        }
        out
    }

    pub fn scale(&self, c: f64) -> Jet2 {
        let mut out = self.clone();
        out.val *= c;
        for g in out.grad.iter_mut() {
            *g *= c;
        }
        for h in out.hess.iter_mut() {
            *h *= c;
        }
        out
    }

    pub fn mul(&self, rhs: &Jet2) -> Jet2 {
        let d = self.dim;
        let mut out = Jet2::constant(self.val * rhs.val, d);
        for i in 0..d {
            out.grad[i] = self.grad[i] * rhs.val + self.val * rhs.grad[i];
        }
        for i in 0..d {
            let fi = self.grad[i];
            let gi = rhs.grad[i];
            for j in 0..d {
                out.hess[i * d + j] = self.hess[i * d + j] * rhs.val
                    + self.val * rhs.hess[i * d + j]
                    + fi * rhs.grad[j]
                    + gi * self.grad[j];
            }
        }
        out
    }

    pub fn div(&self, rhs: &Jet2) -> Result<Jet2, DomainError> {
        if rhs.val == 0.0 {
            return Err(DomainError { op: "division", detail: "denominator is zero".into() });
        }
        let d = self.dim;
        let g = rhs.val;
        let inv = 1.0 / g;
        let hf = inv; // ∂(f/g)/∂f
        let hg = -self.val * inv * inv; // ∂(f/g)/∂g
        let hfg = -inv * inv;
        let hgg = 2.0 * self.val * inv * inv * inv;
        let mut out = Jet2::constant(self.val * inv, d);
        for i in 0..d {
            out.grad[i] = hf * self.grad[i] + hg * rhs.grad[i];
        }
        for i in 0..d {
            let fi = self.grad[i];
            let gi = rhs.grad[i];
            for j in 0..d {
                out.hess[i * d + j] = hf * self.hess[i * d + j]
                    + hg * rhs.hess[i * d + j]
                    + hfg * (fi * rhs.grad[j] + gi * self.grad[j])
                    + hgg * gi * rhs.grad[j];
            }
        }
        Ok(out)
    }

    /// u(f) with u' and u'' supplied.
    fn chain(&self, val: f64, d1: f64, d2: f64) -> Jet2 {
        let d = self.dim;
        let mut out = Jet2::constant(val, d);
        for i in 0..d {
            out.grad[i] = d1 * self.grad[i];
        }
        for i in 0..d {
            let fi = self.grad[i];
            for j in 0..d {
                out.hess[i * d + j] = d1 * self.hess[i * d + j] + d2 * fi * self.grad[j];
            }
        }
        out
    }

    pub fn sin(&self) -> Jet2 {
        let (s, c) = self.val.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(&self) -> Jet2 {
        let (s, c) = self.val.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn tan(&self) -> Jet2 {
        let t = self.val.tan();
        let sec2 = 1.0 + t * t;
        self.chain(t, sec2, 2.0 * t * sec2)
    }

    pub fn atan(&self) -> Jet2 {
        let den = 1.0 + self.val * self.val;
        self.chain(self.val.atan(), 1.0 / den, -2.0 * self.val / (den * den))
    }

    pub fn sqrt(&self) -> Result<Jet2, DomainError> {
        if self.val < SQRT_ARG_GUARD {
            return Err(DomainError {
                op: "sqrt",
                detail: format!("argument {} is below the kink guard", self.val),
            });
        }
        let r = self.val.sqrt();
        Ok(self.chain(r, 0.5 / r, -0.25 / (r * self.val)))
    }

    pub fn exp(&self) -> Jet2 {
        let e = self.val.exp();
        self.chain(e, e, e)
    }

    pub fn ln(&self) -> Result<Jet2, DomainError> {
        if self.val <= 0.0 {
            return Err(DomainError {
                op: "ln",
                detail: format!("argument {} is not positive", self.val),
            });
        }
        let inv = 1.0 / self.val;
        Ok(self.chain(self.val.ln(), inv, -inv * inv))
    }

    /// |f| with sign(0) := 0, so the derivative at the kink is zero.
    pub fn abs(&self) -> Jet2 {
        let s = if self.val > 0.0 {
            1.0
        } else if self.val < 0.0 {
            -1.0
        } else {
            0.0
        };
        self.chain(self.val.abs(), s, 0.0)
    }

    /// atan2(self, x): angle of the point (x, self).
    pub fn atan2(&self, x: &Jet2) -> Result<Jet2, DomainError> {
        let y = self;
        let r2 = y.val * y.val + x.val * x.val;
        if r2 == 0.0 {
            return Err(DomainError { op: "atan2", detail: "both arguments are zero".into() });
        }
        let d = self.dim;
        let hy = x.val / r2;
        let hx = -y.val / r2;
        let r4 = r2 * r2;
        let hyy = -2.0 * x.val * y.val / r4;
        let hyx = (y.val * y.val - x.val * x.val) / r4;
        let hxx = 2.0 * x.val * y.val / r4;
        let mut out = Jet2::constant(y.val.atan2(x.val), d);
        for i in 0..d {
            out.grad[i] = hy * y.grad[i] + hx * x.grad[i];
        }
        for i in 0..d {
            let yi = y.grad[i];
            let xi = x.grad[i];
            for j in 0..d {
                out.hess[i * d + j] = hy * y.hess[i * d + j]
                    + hx * x.hess[i * d + j]
                    + hyy * yi * y.grad[j]
                    + hyx * (yi * x.grad[j] + xi * y.grad[j])
                    + hxx * xi * x.grad[j];
            }
        }
        Ok(out)
    }

    fn is_const(&self) -> bool {
        self.grad.iter().all(|&g| g == 0.0) && self.hess.iter().all(|&h| h == 0.0)
    }

    /// f^g. A constant integer exponent uses repeated multiplication (any
    /// base sign); otherwise the base must be positive.
    pub fn pow(&self, exponent: &Jet2) -> Result<Jet2, DomainError> {
        if exponent.is_const() {
            let c = exponent.val;
            if c.fract() == 0.0 && c.abs() <= 64.0 {
                return self.powi(c as i64);
            }
            if self.val <= 0.0 {
                return Err(DomainError {
                    op: "pow",
                    detail: format!("base {} is not positive for real exponent {}", self.val, c),
                });
            }
            let v = self.val.powf(c);
            return Ok(self.chain(
                v,
                c * self.val.powf(c - 1.0),
                c * (c - 1.0) * self.val.powf(c - 2.0),
            ));
        }
        if self.val <= 0.0 {
            return Err(DomainError {
                op: "pow",
                detail: format!("base {} is not positive for varying exponent", self.val),
            });
        }
        // exp(g · ln f), composed from exact primitive rules
        Ok(exponent.mul(&self.ln()?).exp())
    }

    fn powi(&self, k: i64) -> Result<Jet2, DomainError> {
        if k == 0 {
            return Ok(Jet2::constant(1.0, self.dim));
        }
        let mut acc = self.clone();
        for _ in 1..k.unsigned_abs() {
            acc = acc.mul(self);
        }
        if k < 0 {
            Jet2::constant(1.0, self.dim).div(&acc)
        } else {
            Ok(acc)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DIM: usize = 5; // (t, x1, x2, v1, v2)

    fn var(val: f64, slot: usize) -> Jet2 {
        Jet2::variable(val, slot, DIM)
    }

    #[test]
    fn constant_has_zero_derivatives() {
        let c = Jet2::constant(3.5, DIM);
        assert_eq!(c.val, 3.5);
        assert!(c.grad.iter().all(|&g| g == 0.0));
        assert!(c.hess.iter().all(|&h| h == 0.0));
    }

    #[test]
    fn monomial_v1_squared() {
        let n = 2;
        let v1 = var(2.0, slot_v(0, n));
        let f = v1.mul(&v1);
        assert_eq!(f.val, 4.0);
        assert_eq!(f.grad[slot_v(0, n)], 4.0);
        assert_eq!(f.hess_at(slot_v(0, n), slot_v(0, n)), 2.0);
        // everything else exactly zero
        for i in 0..DIM {
            if i != slot_v(0, n) {
                assert_eq!(f.grad[i], 0.0);
            }
            for j in 0..DIM {
                if i != slot_v(0, n) || j != slot_v(0, n) {
                    assert_eq!(f.hess_at(i, j), 0.0);
                }
            }
        }
    }

    #[test]
    fn mixed_partial_sin_x1_times_v2() {
        let n = 2;
        let x1 = var(0.5, slot_x(0));
        let v2 = var(2.0, slot_v(1, n));
        let f = x1.sin().mul(&v2);
        let expect = 0.5_f64.cos();
        assert!((f.hess_at(slot_x(0), slot_v(1, n)) - expect).abs() < 1e-15);
        assert!((f.hess_at(slot_v(1, n), slot_x(0)) - expect).abs() < 1e-15);
    }

    #[test]
    fn hessian_is_symmetric_for_compositions() {
        let x = var(0.7, 1);
        let y = var(-0.3, 2);
        let f = x.sin().mul(&y.exp()).add(&x.mul(&y).mul(&x)).div(&y.cos()).unwrap();
        for i in 0..DIM {
            for j in 0..DIM {
                assert_eq!(f.hess_at(i, j), f.hess_at(j, i));
            }
        }
    }

    #[test]
    fn division_chain_matches_analytic() {
        // f = x / (1 + y^2); check against hand partials at (x, y) = (2, 0.5)
        let x = var(2.0, 1);
        let y = var(0.5, 2);
        let one = Jet2::constant(1.0, DIM);
        let f = x.div(&one.add(&y.mul(&y))).unwrap();
        let den = 1.25_f64;
        assert!((f.val - 2.0 / den).abs() < 1e-15);
        assert!((f.grad[1] - 1.0 / den).abs() < 1e-15);
        // ∂f/∂y = -2xy/(1+y²)²
        assert!((f.grad[2] - (-2.0 * 2.0 * 0.5) / (den * den)).abs() < 1e-14);
        // ∂²f/∂x∂y = -2y/(1+y²)²
        assert!((f.hess_at(1, 2) - (-1.0) / (den * den)).abs() < 1e-14);
    }

    #[test]
    fn linearity_of_jets() {
        let x = var(0.9, 1);
        let y = var(1.7, 3);
        let e1 = x.sin().mul(&y);
        let e2 = y.exp();
        let a = 2.5;
        let lhs = e1.scale(a).add(&e2);
        // rebuild a·e1 + e2 via an algebraically different route
        let rhs = e1.add(&e1).add(&e1.scale(0.5)).add(&e2);
        assert!((lhs.val - rhs.val).abs() < 1e-14);
        for i in 0..DIM {
            assert!((lhs.grad[i] - rhs.grad[i]).abs() < 1e-14);
            for j in 0..DIM {
                assert!((lhs.hess_at(i, j) - rhs.hess_at(i, j)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn sqrt_guard_rejects_kink() {
        let z = Jet2::constant(0.0, DIM);
        assert!(z.sqrt().is_err());
        let tiny = Jet2::constant(1e-20, DIM);
        assert!(tiny.sqrt().is_err());
        let ok = Jet2::constant(4.0, DIM);
        assert_eq!(ok.sqrt().unwrap().val, 2.0);
    }

    #[test]
    fn division_by_zero_is_a_domain_error() {
        let x = var(1.0, 1);
        let z = Jet2::constant(0.0, DIM);
        assert!(x.div(&z).is_err());
    }

    #[test]
    fn abs_sign_convention_at_zero() {
        let z = var(0.0, 1);
        let f = z.abs();
        assert_eq!(f.val, 0.0);
        assert_eq!(f.grad[1], 0.0);
    }

    #[test]
    fn atan2_matches_atan_ratio() {
        let y = var(0.8, 3);
        let x = var(1.3, 1);
        let a = y.atan2(&x).unwrap();
        let b = y.div(&x).unwrap().atan();
        assert!((a.val - b.val).abs() < 1e-14);
        for i in 0..DIM {
            assert!((a.grad[i] - b.grad[i]).abs() < 1e-13);
            for j in 0..DIM {
                assert!((a.hess_at(i, j) - b.hess_at(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pow_negative_integer_exponent() {
        let x = var(-2.0, 1);
        let e = Jet2::constant(-2.0, DIM);
        let f = x.pow(&e).unwrap(); // x^-2 = 0.25 at x = -2
        assert!((f.val - 0.25).abs() < 1e-15);
        // d/dx x^-2 = -2 x^-3 = 0.25 at x = -2
        assert!((f.grad[1] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn pow_real_exponent_requires_positive_base() {
        let x = var(-1.0, 1);
        let e = Jet2::constant(0.5, DIM);
        assert!(x.pow(&e).is_err());
        let p = var(3.0, 1);
        let f = p.pow(&e).unwrap();
        assert!((f.val - 3.0_f64.sqrt()).abs() < 1e-15);
    }
}
