//! Exact Jacobi polynomial values at rational points.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::numerics::Rational;

/// `P_m^{(alpha,beta)}(x)` together with its arguments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JacobiValue {
    pub m: u64,
    pub alpha: i64,
    pub beta: i64,
    pub x: Rational,
    pub value: Rational,
}

/// Generalized binomial `C(e, k)` for any integer `e` and `k >= 0`.
fn gen_binomial(e: i64, k: u64) -> BigRational {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k as i64 {
        num *= BigInt::from(e - i);
        den *= BigInt::from(i + 1);
    }
    BigRational::new(num, den)
}

fn rpow(x: &Rational, k: u64) -> Rational {
    num_traits::pow(x.clone(), k as usize)
}

/// Exact `P_m^{(alpha,beta)}(x)`.
///
/// Nonnegative parameters use the three-term recurrence. Otherwise the value
/// is the coefficient extraction
/// `sum_s C(m+alpha, m-s) C(m+beta, s) ((x-1)/2)^s ((x+1)/2)^(m-s)`,
/// a polynomial identity in the parameters, so negative `alpha` is fine.
pub fn jacobi_eval(m: u64, alpha: i64, beta: i64, x: &Rational) -> Rational {
    if alpha >= 0 && beta >= 0 {
        jacobi_recurrence(m, alpha, beta, x)
    } else {
        jacobi_extraction(m, alpha, beta, x)
    }
}

pub fn jacobi_value(m: u64, alpha: i64, beta: i64, x: &Rational) -> JacobiValue {
    JacobiValue {
        m,
        alpha,
        beta,
        x: x.clone(),
        value: jacobi_eval(m, alpha, beta, x),
    }
}

pub(crate) fn jacobi_recurrence(m: u64, alpha: i64, beta: i64, x: &Rational) -> Rational {
    let r = |v: i64| Rational::from_integer(BigInt::from(v));
    let p0 = Rational::one();
    if m == 0 {
        return p0;
    }
    let p1 = r(alpha + 1) + r(alpha + beta + 2) * (x - Rational::one()) / r(2);
    let (mut prev, mut cur) = (p0, p1);
    for n in 2..=m as i64 {
        let s = 2 * n + alpha + beta;
        let c0 = r(2 * n * (n + alpha + beta) * (s - 2));
        let c1 = r(s - 1) * (r(s * (s - 2)) * x + r(alpha * alpha - beta * beta));
        let c2 = r(2 * (n + alpha - 1) * (n + beta - 1) * s);
        let next = (c1 * &cur - c2 * &prev) / c0;
        prev = std::mem::replace(&mut cur, next);
    }
    cur
}

pub(crate) fn jacobi_extraction(m: u64, alpha: i64, beta: i64, x: &Rational) -> Rational {
    let two = Rational::from_integer(2.into());
    let lo = (x - Rational::one()) / &two;
    let hi = (x + Rational::one()) / &two;
    let mut acc = Rational::zero();
    for s in 0..=m {
        let term = gen_binomial(m as i64 + alpha, m - s)
            * gen_binomial(m as i64 + beta, s)
            * rpow(&lo, s)
            * rpow(&hi, m - s);
        acc += term;
    }
    acc
}
