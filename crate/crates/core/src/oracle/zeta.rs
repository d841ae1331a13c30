//! Hurwitz zeta at integer arguments by Euler-Maclaurin summation.

use std::sync::OnceLock;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::numerics::{bernoulli_table, BigFloat, Rational};

/// Correction terms `B_2 .. B_{2 * EM_TERMS}`.
const EM_TERMS: usize = 10;

fn bernoulli_even() -> &'static [Rational] {
    static TABLE: OnceLock<Vec<Rational>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let b = bernoulli_table(2 * EM_TERMS);
        (1..=EM_TERMS).map(|k| b[2 * k].clone()).collect()
    })
}

/// Smallest cutoff `M` with the Euler-Maclaurin remainder for `zeta(s, a)`
/// below `2^(-prec-4) a^-s`. The remainder after `B_20` is at most
/// `2 (2 pi)^-22 s (s+1) ... (s+20) (a+M)^(-s-21)`.
fn cutoff(s: u32, a: f64, prec: u32) -> u64 {
    let q = 2 * EM_TERMS as u32 + 1;
    let mut log2c = 1.0 - 22.0 * (2.0 * std::f64::consts::PI).log2();
    for i in 0..q {
        log2c += (s as f64 + i as f64).log2();
    }
    let need = (log2c + prec as f64 + 4.0 + s as f64 * a.log2()) / (s + q) as f64;
    let m = (need.exp2() - a).ceil();
    m.max(1.0) as u64
}

/// Euler-Maclaurin tail `sum_{k >= 0} (x + k)^-s - (direct part)`, i.e.
/// the integral, the half term and the `B_2 .. B_20` corrections at `x`.
fn em_tail(s: u32, x: &BigFloat, w: u32) -> BigFloat {
    let xs = x.powi(-(s as i64));
    let inv2 = x.powi(-2);
    let s = s as i64;
    let mut acc = xs
        .mul_prec(x, w)
        .div_i64(s - 1)
        .add_prec(&xs.mul_pow2(-1), w);
    // B_2k / (2k)! * s (s+1) ... (s+2k-2) * x^(-s-2k+1)
    let mut rising = BigInt::from(s);
    let mut fact = BigInt::from(2);
    let mut pw = xs.div_prec(x, w);
    for (k, b) in bernoulli_even().iter().enumerate() {
        let k = k as i64 + 1;
        if k > 1 {
            rising *= BigInt::from((s + 2 * k - 3) * (s + 2 * k - 2));
            fact *= BigInt::from((2 * k - 1) * (2 * k));
            pw = pw.mul_prec(&inv2, w);
        }
        let t = BigFloat::from_rational(b, w)
            .mul_prec(&BigFloat::from_ratio(&rising, &fact, w), w)
            .mul_prec(&pw, w);
        acc = acc.add_prec(&t, w);
    }
    acc
}

fn check_args(s: u32, a: &BigFloat) -> Result<()> {
    if s < 2 {
        return Err(Error::Domain(format!("Hurwitz zeta needs s >= 2, got {s}")));
    }
    if !a.is_positive() {
        return Err(Error::Domain(format!("Hurwitz zeta needs a > 0, got {a}")));
    }
    Ok(())
}

/// `zeta(s, a) = sum_{k >= 0} (a + k)^-s` for every `s` in `2..=s_max`.
///
/// The direct parts share one pass over `k`; each `s` stops at its own
/// cutoff (which shrinks quickly with `s`).
pub fn hurwitz_zeta_many(s_max: u32, a: &BigFloat, prec: u32) -> Result<Vec<BigFloat>> {
    check_args(s_max, a)?;
    let w = prec + 32;
    let a = a.with_prec(w);
    let af = a.to_f64();
    let cut: Vec<u64> = (2..=s_max).map(|s| cutoff(s, af, w)).collect();
    // cutoffs fall with s only for small a, so stop on the largest remaining
    let mut reach = cut.clone();
    for i in (0..reach.len().saturating_sub(1)).rev() {
        reach[i] = reach[i].max(reach[i + 1]);
    }
    let mut acc = vec![BigFloat::zero(w); cut.len()];
    for k in 0..reach[0] {
        let inv = a.add_prec(&BigFloat::from_u64(k, w), w).recip();
        let mut p = inv.mul_prec(&inv, w);
        for i in 0..cut.len() {
            if k >= reach[i] {
                break;
            }
            if k < cut[i] {
                acc[i] = acc[i].add_prec(&p, w);
            }
            p = p.mul_prec(&inv, w);
        }
    }
    Ok(acc
        .into_iter()
        .zip(cut)
        .enumerate()
        .map(|(i, (direct, m))| {
            let x = a.add_prec(&BigFloat::from_u64(m, w), w);
            direct.add_prec(&em_tail(i as u32 + 2, &x, w), w).with_prec(prec)
        })
        .collect())
}

/// `zeta(s, a)` for integer `s >= 2` and real `a > 0`.
pub fn hurwitz_zeta(s: u32, a: &BigFloat, prec: u32) -> Result<BigFloat> {
    check_args(s, a)?;
    let w = prec + 32;
    let a = a.with_prec(w);
    let m = cutoff(s, a.to_f64(), w);
    let mut acc = BigFloat::zero(w);
    for k in 0..m {
        let x = a.add_prec(&BigFloat::from_u64(k, w), w);
        acc = acc.add_prec(&x.powi(-(s as i64)), w);
    }
    let x = a.add_prec(&BigFloat::from_u64(m, w), w);
    Ok(acc.add_prec(&em_tail(s, &x, w), w).with_prec(prec))
}

/// Riemann `zeta(s)`, `s >= 2`.
pub fn zeta(s: u32, prec: u32) -> Result<BigFloat> {
    hurwitz_zeta(s, &BigFloat::one(prec), prec)
}
