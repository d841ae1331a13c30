//! Exact rationals, real quadratic fields and arbitrary-precision floats.
//!
//! Precision is always an explicit argument. Nothing here reads global state,
//! so every value can be shared freely across threads.

mod bigfloat;
mod complex;
mod lsq;
mod quadratic;

pub use bigfloat::{BigFloat, MIN_PRECISION};
pub use complex::Complex;
pub use lsq::{least_squares, LeastSquares};
pub use quadratic::{fib_pair, golden_pow, phi, QuadraticNumber};


use num_bigint::BigInt;
use num_traits::One;

use crate::error::{Error, Result};

/// Exact rational number in lowest terms with a positive denominator.
pub type Rational = num_rational::BigRational;

/// Binomial coefficient `C(n, k)`; zero outside `0 <= k <= n`.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::from(0);
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Bernoulli numbers `B_0..=B_n` (with `B_1 = -1/2`), exact.
pub fn bernoulli_table(n: usize) -> Vec<Rational> {
    let mut b: Vec<Rational> = Vec::with_capacity(n + 1);
    for m in 0..=n {
        if m == 0 {
            b.push(Rational::one());
            continue;
        }
        // sum_{k=0}^{m} C(m+1, k) B_k = 0
        let mut s = Rational::from_integer(BigInt::from(0));
        for (k, bk) in b.iter().enumerate() {
            s += Rational::from_integer(binomial(m as u64 + 1, k as u64)) * bk;
        }
        b.push(-s / Rational::from_integer(BigInt::from(m + 1)));
    }
    b
}

/// Exact sign-aware comparison of two quadratic numbers.
pub fn quad_compare(x: &QuadraticNumber, y: &QuadraticNumber) -> Result<std::cmp::Ordering> {
    x.try_cmp(y)
}

/// `x` rounded to `prec` bits (within 1 ulp).
pub fn quad_to_float(x: &QuadraticNumber, prec: u32) -> Result<BigFloat> {
    if prec < MIN_PRECISION {
        return Err(Error::Domain(format!(
            "precision {prec} below minimum {MIN_PRECISION}"
        )));
    }
    Ok(x.to_float(prec))
}

/// Table of `phi^-k`, k = 0..=count, rounded at `prec` bits.
pub fn golden_inverse_powers(count: usize, prec: u32) -> Vec<BigFloat> {
    let work = prec + 32;
    let step = golden_pow(-1).to_float(work);
    let mut out = Vec::with_capacity(count + 1);
    let mut cur = BigFloat::one(work);
    for _ in 0..=count {
        out.push(cur.with_prec(prec));
        cur = cur.mul_prec(&step, work);
    }
    out
}

impl serde::Serialize for BigFloat {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}
