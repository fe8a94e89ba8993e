//! Double-double accumulation for quadratic forms.
//!
//! The matrices `F` produced by synthesis are Hilbert-like and their
//! quadratic forms cancel heavily; evaluating `(F y, y)` with error-free
//! products and sums keeps the result accurate to working precision even
//! when the plain floating-point sum would lose most of its digits.

use std::ops::{Add, Mul};

use num_traits::Zero;

use crate::exact::{self, Rational};

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    /// Rounds an exact rational to the nearest double-double.
    pub fn from_rational(value: &Rational) -> Self {
        let hi = exact::to_f64(value);
        if !hi.is_finite() || value.is_zero() {
            return Dd { hi, lo: 0.0 };
        }
        let hi_exact = Rational::from_float(hi).expect("finite double");
        Dd {
            hi,
            lo: exact::to_f64(&(value - hi_exact)),
        }
    }

    #[inline]
    pub fn from_product(a: f64, b: f64) -> Dd {
        let (hi, lo) = two_prod(a, b);
        Dd { hi, lo }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

impl Add for Dd {
    type Output = Dd;

    #[inline]
    fn add(self, other: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, other.hi);
        let e = e + self.lo + other.lo;
        let (hi, lo) = two_sum(s, e);
        Dd { hi, lo }
    }
}

impl Mul for Dd {
    type Output = Dd;

    #[inline]
    fn mul(self, other: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, other.hi);
        let e = e + (self.hi * other.lo + self.lo * other.hi);
        let (hi, lo) = two_sum(p, e);
        Dd { hi, lo }
    }
}

/// `(M y, y)` for a row-major square `m`.
pub fn quadratic_form(m: &[Dd], y: &[f64]) -> f64 {
    let n = y.len();
    debug_assert_eq!(m.len(), n * n);
    let mut acc = Dd::ZERO;
    for i in 0..n {
        for j in 0..n {
            let yy = Dd::from_product(y[i], y[j]);
            acc = acc + m[i * n + j] * yy;
        }
    }
    acc.to_f64()
}
