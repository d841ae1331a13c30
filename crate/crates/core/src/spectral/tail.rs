//! Tail model for slowly decaying layer sequences.
//!
//! The layers behave like `W_l ~ sum_p sum_{q <= p-2} c_pq (ln l)^q / l^p`
//! (the `omega = 1` endpoint is a logarithmic branch point of the
//! `omega`-series). We fit this basis by least squares over the second half
//! of the computed layers and sum the fitted model beyond `V` analytically.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::Result;
use crate::numerics::{bernoulli_table, least_squares, BigFloat};

/// Largest model order used; order `k` has `k(k+1)/2` basis functions.
pub const MAX_ORDER: usize = 4;

/// `(p, q)` pairs for `(ln l)^q / l^p`, `p = 2..=order+1`, `q <= p-2`.
pub fn basis(order: usize) -> Vec<(u32, u32)> {
    let mut b = Vec::new();
    for p in 2..(2 + order as u32) {
        for q in 0..(p - 1) {
            b.push((p, q));
        }
    }
    b
}

/// Result of fitting the tail of one sequence.
#[derive(Clone, Debug)]
pub struct TailFit {
    /// Model order actually used (0 when too few layers for any fit).
    pub order: usize,
    /// Estimated `sum_{l > V} seq_l`.
    pub tail: BigFloat,
    /// `|tail(order) - tail(order - 1)|`.
    pub heuristic: BigFloat,
    /// `C / V` with `C = max_{V/2 <= l <= V} |seq_l| l^2`.
    pub conservative: BigFloat,
    /// The fitted `C` above.
    pub c_fit: BigFloat,
    coeffs: Vec<BigFloat>,
}

/// Function `sum_i c_i (ln x)^i x^-s`.
#[derive(Clone)]
struct LogPoly {
    s: u32,
    c: Vec<BigInt>,
}

impl LogPoly {
    fn monomial(p: u32, q: u32) -> Self {
        let mut c = vec![BigInt::zero(); q as usize + 1];
        c[q as usize] = BigInt::from(1);
        LogPoly { s: p, c }
    }

    fn derivative(&self) -> Self {
        let s = BigInt::from(self.s);
        let mut c = vec![BigInt::zero(); self.c.len()];
        for i in 0..self.c.len() {
            let mut v = -(&s * &self.c[i]);
            if i + 1 < self.c.len() {
                v += &self.c[i + 1] * BigInt::from(i + 1);
            }
            c[i] = v;
        }
        LogPoly { s: self.s + 1, c }
    }

    fn eval(&self, lnx: &BigFloat, x: &BigFloat, w: u32) -> BigFloat {
        let mut acc = BigFloat::zero(w);
        for c in self.c.iter().rev() {
            acc = acc.mul_prec(lnx, w).add_prec(&BigFloat::from_bigint(c, w), w);
        }
        acc.mul_prec(&x.powi(-(self.s as i64)).with_prec(w), w)
    }
}

type Memo<K> = OnceLock<Mutex<HashMap<K, BigFloat>>>;

fn memoized<K: std::hash::Hash + Eq>(
    memo: &'static Memo<K>,
    key: K,
    f: impl FnOnce() -> BigFloat,
) -> BigFloat {
    let map = memo.get_or_init(Default::default);
    if let Some(v) = map.lock().expect("memo lock").get(&key) {
        return v.clone();
    }
    let v = f();
    map.lock().expect("memo lock").insert(key, v.clone());
    v
}

/// `ln l` at `prec` bits, memoized.
fn ln_int(l: u64, prec: u32) -> BigFloat {
    static MEMO: Memo<(u64, u32)> = OnceLock::new();
    if l > 4096 {
        return BigFloat::from_u64(l, prec).ln().expect("l > 0");
    }
    memoized(&MEMO, (l, prec), || {
        BigFloat::from_u64(l, prec).ln().expect("l > 0")
    })
}

/// `sum_{l > v} (ln l)^q / l^p` by direct summation to 64 and
/// Euler-Maclaurin beyond.
pub fn log_power_tail(p: u32, q: u32, v: u64, prec: u32) -> BigFloat {
    assert!(p >= 2, "tail sum diverges for p < 2");
    static MEMO: Memo<(u32, u32, u64, u32)> = OnceLock::new();
    memoized(&MEMO, (p, q, v, prec), || log_power_tail_uncached(p, q, v, prec))
}

fn log_power_tail_uncached(p: u32, q: u32, v: u64, prec: u32) -> BigFloat {
    let w = prec + 32;
    let m = v.max(63) + 1;
    let mut acc = BigFloat::zero(w);
    let f = LogPoly::monomial(p, q);
    for l in (v + 1)..m {
        let x = BigFloat::from_u64(l, w);
        acc = acc.add_prec(&f.eval(&ln_int(l, w), &x, w), w);
    }
    let x = BigFloat::from_u64(m, w);
    let lnm = ln_int(m, w);
    // integral_m^inf (ln x)^q x^-p dx = sum_i q!/(q-i)! (ln m)^(q-i) m^(1-p) / (p-1)^(i+1)
    let mut integral = BigFloat::zero(w);
    let mut falling = BigInt::from(1);
    let pm1 = BigInt::from(p - 1);
    let mut pm1_pow = pm1.clone();
    let m1p = x.powi(1 - p as i64).with_prec(w);
    for i in 0..=q {
        let t = BigFloat::from_bigint(&falling, w)
            .mul_prec(&lnm.powi((q - i) as i64), w)
            .mul_prec(&m1p, w)
            .div_prec(&BigFloat::from_bigint(&pm1_pow, w), w);
        integral = integral.add_prec(&t, w);
        falling *= BigInt::from(q - i);
        pm1_pow *= &pm1;
    }
    acc = acc.add_prec(&integral, w);
    acc = acc.add_prec(&f.eval(&lnm, &x, w).mul_pow2(-1), w);
    let bern = bernoulli_table(20);
    let mut d = f.derivative();
    let mut fact = BigInt::from(2);
    for k in 1..=10usize {
        // - B_2k/(2k)! f^(2k-1)(m)
        let b = &bern[2 * k];
        let coef = BigFloat::from_ratio(b.numer(), &(b.denom() * &fact), w);
        acc = acc.sub_prec(&coef.mul_prec(&d.eval(&lnm, &x, w), w), w);
        d = d.derivative().derivative();
        fact *= BigInt::from((2 * k + 1) * (2 * k + 2));
    }
    acc.with_prec(prec)
}

fn model_order(points: usize) -> usize {
    (1..=MAX_ORDER)
        .rev()
        .find(|&k| (k * (k + 1) / 2) as f64 <= 0.6 * points as f64)
        .unwrap_or(0)
}

/// First index of the fitting range for a sequence ending at `v`.
pub fn fit_start(v: usize) -> usize {
    (v / 2).max(2)
}

fn fit_order(seq: &[BigFloat], order: usize, prec: u32) -> Result<Vec<BigFloat>> {
    let v = seq.len() - 1;
    let lo = fit_start(v);
    let w = prec + 32;
    let b = basis(order);
    let mut rows = Vec::with_capacity(v - lo + 1);
    let mut ys = Vec::with_capacity(v - lo + 1);
    for (l, y) in seq.iter().enumerate().skip(lo) {
        let x = BigFloat::from_u64(l as u64, w);
        let lnx = ln_int(l as u64, w);
        rows.push(
            b.iter()
                .map(|&(p, q)| lnx.powi(q as i64).mul_prec(&x.powi(-(p as i64)), w))
                .collect(),
        );
        ys.push(y.with_prec(w));
    }
    Ok(least_squares(&rows, &ys, w)?.coeffs)
}

fn model_tail(coeffs: &[BigFloat], order: usize, v: u64, prec: u32) -> BigFloat {
    let w = prec + 16;
    let mut acc = BigFloat::zero(w);
    for (c, (p, q)) in coeffs.iter().zip(basis(order)) {
        acc = acc.add_prec(&c.mul_prec(&log_power_tail(p, q, v, w), w), w);
    }
    acc.with_prec(prec)
}

/// Fits the tail of `seq` (indexed from `l = 0`) and sums it.
pub fn fit_tail(seq: &[BigFloat], prec: u32) -> Result<TailFit> {
    let v = seq.len().saturating_sub(1);
    let lo = fit_start(v);
    let mut c = BigFloat::zero(prec);
    for (l, y) in seq.iter().enumerate().skip((v / 2).max(1)) {
        let t = y.abs().mul_prec(&BigFloat::from_u64((l * l) as u64, prec), prec);
        if t > c {
            c = t;
        }
    }
    let conservative = if v == 0 {
        BigFloat::zero(prec)
    } else {
        c.div_prec(&BigFloat::from_u64(v as u64, prec), prec)
    };
    let points = (v + 1).saturating_sub(lo);
    let order = if v >= 4 { model_order(points) } else { 0 };
    if order == 0 {
        return Ok(TailFit {
            order,
            tail: BigFloat::zero(prec),
            heuristic: conservative.clone(),
            conservative,
            c_fit: c,
            coeffs: Vec::new(),
        });
    }
    let coeffs = fit_order(seq, order, prec)?;
    let tail = model_tail(&coeffs, order, v as u64, prec);
    let heuristic = if order >= 2 {
        let lower = fit_order(seq, order - 1, prec)?;
        (&tail - &model_tail(&lower, order - 1, v as u64, prec)).abs()
    } else {
        tail.abs()
    };
    Ok(TailFit {
        order,
        tail,
        heuristic,
        conservative,
        c_fit: c,
        coeffs,
    })
}

/// `sum seq + tail` with the highest affordable model order only; the cheap
/// path for extrapolating many sequences at once.
pub fn extrapolated_sum(seq: &[BigFloat], prec: u32) -> Result<BigFloat> {
    let v = seq.len().saturating_sub(1);
    let partial = BigFloat::sum(seq, prec);
    let order = if v >= 4 {
        model_order((v + 1).saturating_sub(fit_start(v)))
    } else {
        0
    };
    if order == 0 || seq[fit_start(v)..].iter().all(BigFloat::is_zero) {
        return Ok(partial);
    }
    let coeffs = fit_order(seq, order, prec)?;
    Ok(partial.add_prec(&model_tail(&coeffs, order, v as u64, prec), prec))
}

impl TailFit {
    /// Fitted model value at index `l`.
    pub fn model_at(&self, l: u64, prec: u32) -> BigFloat {
        let w = prec + 16;
        let x = BigFloat::from_u64(l, w);
        let lnx = ln_int(l, w);
        let mut acc = BigFloat::zero(w);
        for (c, (p, q)) in self.coeffs.iter().zip(basis(self.order)) {
            let f = lnx.powi(q as i64).mul_prec(&x.powi(-(p as i64)), w);
            acc = acc.add_prec(&c.mul_prec(&f, w), w);
        }
        acc.with_prec(prec)
    }

    /// `sum_{l > v} omega^l model(l)` for `|omega| < 1`, summed directly.
    pub fn weighted_tail(&self, omega: &BigFloat, v: u64, prec: u32) -> BigFloat {
        if self.order == 0 || omega.is_zero() {
            return BigFloat::zero(prec);
        }
        let w = prec + 16;
        let om = omega.with_prec(w);
        let mut pw = om.powi(v as i64 + 1);
        let mut acc = BigFloat::zero(w);
        let cutoff = -(w as i64) - 8;
        let mut l = v + 1;
        // at most a few million terms even for |omega| within 1e-3 of 1
        while l < v + 4_000_000 {
            let t = pw.mul_prec(&self.model_at(l, w), w);
            acc = acc.add_prec(&t, w);
            if pw.exponent().map_or(true, |e| e < cutoff) {
                break;
            }
            pw = pw.mul_prec(&om, w);
            l += 1;
        }
        acc.with_prec(prec)
    }
}

/// Limit of the alternating series `sum (-1)^l seq_l` from its last partial
/// sums by repeated averaging; returns the estimate and the change made by
/// the final averaging level.
pub fn alternating_limit(seq: &[BigFloat], prec: u32) -> (BigFloat, BigFloat) {
    let w = prec + 16;
    let mut partial = Vec::with_capacity(seq.len());
    let mut acc = BigFloat::zero(w);
    for (l, y) in seq.iter().enumerate() {
        if l % 2 == 0 {
            acc = acc.add_prec(y, w);
        } else {
            acc = acc.sub_prec(y, w);
        }
        partial.push(acc.clone());
    }
    let depth = 10.min(partial.len().saturating_sub(1));
    let mut level: Vec<BigFloat> = partial[partial.len() - depth - 1..].to_vec();
    let mut last_change = BigFloat::zero(w);
    while level.len() > 1 {
        let next: Vec<BigFloat> = level
            .windows(2)
            .map(|p| p[0].add_prec(&p[1], w).mul_pow2(-1))
            .collect();
        last_change = (&next[next.len() - 1] - &level[level.len() - 1]).abs();
        level = next;
    }
    (level[0].with_prec(prec), last_change.with_prec(prec))
}

/// Number of basis functions at a given order.
pub fn basis_len(order: usize) -> usize {
    order * (order + 1) / 2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_tail() {
        // sum_{l > 10} 1/l^2 = pi^2/6 - H_10^(2)
        let t = log_power_tail(2, 0, 10, 128).to_f64();
        let h: f64 = (1..=10).map(|l| 1.0 / (l * l) as f64).sum();
        assert!((t - (std::f64::consts::PI.powi(2) / 6.0 - h)).abs() < 1e-15);
    }

    #[test]
    fn log_tail_against_direct_sum() {
        // direct sum to 2e5 plus integral remainder
        let (p, q, v) = (3u32, 1u32, 20u64);
        let mut s = 0f64;
        let n = 200_000u64;
        for l in (v + 1)..=n {
            let x = l as f64;
            s += x.ln() / x.powi(3);
        }
        let x = n as f64 + 0.5;
        s += (x.ln() / 2.0 + 0.25) / (x * x);
        let t = log_power_tail(p, q, v, 128).to_f64();
        assert!((t - s).abs() < 1e-13, "{t} vs {s}");
    }

    #[test]
    fn exact_model_is_recovered() {
        let prec = 128;
        let seq: Vec<BigFloat> = (0..=40u64)
            .map(|l| {
                if l == 0 {
                    return BigFloat::one(prec);
                }
                let x = BigFloat::from_u64(l, prec);
                let lnx = x.ln().unwrap();
                let a = x.powi(-2).mul_i64(3);
                let b = lnx.mul_prec(&x.powi(-3), prec).mul_i64(-2);
                a + b
            })
            .collect();
        let fit = fit_tail(&seq, prec).unwrap();
        let exact = log_power_tail(2, 0, 40, prec).mul_i64(3) - log_power_tail(3, 1, 40, prec).mul_i64(2);
        assert!((&fit.tail - &exact).abs().to_f64() < 1e-25);
        assert!(fit.heuristic.to_f64() < 1e-6);
        assert!(fit.conservative > fit.heuristic);
    }

    #[test]
    fn alternating_average() {
        // sum (-1)^l / (l+1) = ln 2
        let seq: Vec<BigFloat> = (0..40u64)
            .map(|l| BigFloat::from_ratio(&1.into(), &BigInt::from(l + 1), 128))
            .collect();
        let (v, _) = alternating_limit(&seq, 128);
        assert!((v.to_f64() - std::f64::consts::LN_2).abs() < 1e-9);
    }

    #[test]
    fn orders() {
        assert_eq!(basis(4).len(), 10);
        assert_eq!(basis_len(3), 6);
        assert_eq!(model_order(17), 4);
        assert_eq!(model_order(5), 2);
        assert_eq!(model_order(1), 0);
    }
}
