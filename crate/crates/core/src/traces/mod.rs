//! Trace formulas and the column/pair decomposition of the layer series.
//!
//! `Tr L = sum_l 1/(xi_l^-2 + 1)` and `Tr L^2 = sum_{i,j} 1/((xi_{i,j} xi_{j,i})^-2 - 1)`.
//! Grouping the layer series by layer index splits these sums column by
//! column:
//!
//! ```text
//! sum_n (-1)^(n+1) phi^(-2n) W_{l-1}(n)                     = 1/(xi_l^-2 + 1)
//! sum_{i+j=l} sum_n phi^(-4n) W_{i-1}(n) W_{j-1}(n)         = sum_{i+j=l} 1/((xi_{i,j} xi_{j,i})^-2 - 1)
//! ```

mod fixed;

use std::io::Write;

use num_bigint::BigInt;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{binomial, golden_pow, BigFloat};
use crate::oracle::{hurwitz_zeta_many, zeta};
use crate::spectral::{solve, SpectralOptions};

pub use fixed::{
    column_target, pair_target, pair_term, xi_pair, xi_pair_product, xi_single, FixedKind,
    FixedPoint,
};

/// Agreement demanded between the two evaluations of `Tr L`.
pub const TRACE_CROSS_TOL: f64 = 1e-10;

/// A trace value with the evaluation that produced it.
#[derive(Clone, Debug, Serialize)]
pub struct TraceReport {
    pub power: u32,
    pub value: BigFloat,
    pub method: String,
    /// Terms summed directly before the tail expansion.
    pub terms: usize,
    pub tail_bound: BigFloat,
    pub cross_method: String,
    pub cross_value: BigFloat,
    /// Bound the two methods must agree within.
    pub cross_allowed: BigFloat,
}

/// `sum_l xi_l / sqrt(l^2 + 4)` summed to `L`, then
/// `sum_{l > L} = -1/2 sum_{k>=1} (-1)^k C(2k,k) zeta(2k, L+1)`.
pub fn trace1_xi_sum(terms: usize, prec: u32) -> Result<(BigFloat, BigFloat)> {
    let l_max = terms.max(4) as u64;
    let w = prec + 32;
    let mut direct = Vec::with_capacity(l_max as usize);
    for l in 1..=l_max {
        let r = BigFloat::from_u64(l * l + 4, w).sqrt()?;
        // xi = 2 / (l + r) avoids the cancellation in (r - l) / 2
        let xi = BigFloat::from_u64(2, w).div_prec(&(&BigFloat::from_u64(l, w) + &r), w);
        direct.push(xi.div_prec(&r, w));
    }
    let mut acc = BigFloat::sum(&direct, w);
    // each k gains about 2 log2((L+1)/2) bits
    let per = 2.0 * ((l_max as f64 + 1.0) / 2.0).log2();
    let kmax = ((w as f64 + 8.0) / per).ceil() as u64 + 1;
    let z = hurwitz_zeta_many(2 * kmax as u32 + 2, &BigFloat::from_u64(l_max + 1, w), w)?;
    let mut bound = BigFloat::zero(w);
    for k in 1..=kmax + 1 {
        let t = z[2 * k as usize - 2].mul_bigint(&binomial(2 * k, k)).mul_pow2(-1);
        if k == kmax + 1 {
            bound = t;
            break;
        }
        acc = if k % 2 == 1 { &acc + &t } else { &acc - &t };
    }
    Ok((acc.with_prec(prec), bound.with_prec(prec)))
}

/// `1/2 - 1/(2 sqrt5) + 1/2 sum_{k>=1} (-1)^(k-1) C(2k,k) (zeta(2k) - 1)`,
/// Euler-transformed over `count` terms. Returns the value and the size of
/// the last transformed term.
pub fn trace1_zeta_series(count: usize, prec: u32) -> Result<(BigFloat, BigFloat)> {
    let count = count.max(8);
    // forward differences of order n lose about n bits
    let w = prec + count as u32 + 64;
    let two = BigFloat::from_u64(2, w);
    let z = hurwitz_zeta_many(2 * count as u32, &two, w)?;
    let mut diff: Vec<BigFloat> = (1..=count as u64)
        .map(|k| z[2 * k as usize - 2].mul_bigint(&binomial(2 * k, k)))
        .collect();
    let mut acc = BigFloat::zero(w);
    let mut last = BigFloat::zero(w);
    for n in 0..count {
        let t = diff[0].mul_pow2(-(n as i64) - 1);
        acc = if n % 2 == 0 { &acc + &t } else { &acc - &t };
        last = t.abs();
        diff = diff.windows(2).map(|p| &p[1] - &p[0]).collect();
    }
    let root5 = BigFloat::from_u64(5, w).sqrt()?;
    let head = BigFloat::one(w).sub_prec(&root5.recip(), w).mul_pow2(-1);
    Ok((head.add_prec(&acc.mul_pow2(-1), w).with_prec(prec), last.with_prec(prec)))
}

/// Coefficients `c_k` of `g(m) = sum_k c_k m^-k`, where
/// `g(m) = ((1 + 2u) / sqrt(1 + 4u) - 1) / 2`, `u = 1/m`.
fn pair_series_coeffs(count: usize) -> Vec<BigInt> {
    // (1 + 4u)^-1/2 = sum (-1)^k C(2k,k) u^k
    let b = |k: u64| -> BigInt {
        let c = binomial(2 * k, k);
        if k % 2 == 0 {
            c
        } else {
            -c
        }
    };
    (0..count as u64)
        .map(|k| {
            if k == 0 {
                return BigInt::from(0);
            }
            // [(1+2u) * series]_k - [k == 0], then halved (always even)
            (b(k) + BigInt::from(2) * b(k - 1)) / BigInt::from(2)
        })
        .collect()
}

/// `1/((xi_{i,j} xi_{j,i})^-2 - 1)` as a function of `m = ij`:
/// `P / sqrt(m(m+4))` with `P = 2 / (m + 2 + sqrt(m(m+4)))`.
fn pair_value(m: u64, w: u32) -> Result<BigFloat> {
    let r = BigFloat::from_u64(m * (m + 4), w).sqrt()?;
    let p = BigFloat::from_u64(2, w).div_prec(&r.add_prec(&BigFloat::from_u64(m + 2, w), w), w);
    Ok(p.div_prec(&r, w))
}

/// `Tr L^2 = sum_m tau(m) g(m)`: direct to `M`, beyond that
/// `sum_k c_k (zeta(k)^2 - sum_{m <= M} tau(m) m^-k)`.
pub fn trace2_divisor_sum(terms: usize, prec: u32) -> Result<(BigFloat, BigFloat)> {
    let m_max = terms.max(16) as u64;
    let per = (m_max as f64 / 4.0).log2();
    let kmax = ((prec as f64 + 16.0 + 1.5 * (m_max as f64).log2()) / per).ceil() as usize + 2;
    // only absolute accuracy matters in c_k (zeta(k)^2 - partial), |c_k| < 4^k
    let w = prec + 2 * kmax as u32 + 32;
    let mut tau = vec![0u64; m_max as usize + 1];
    for d in 1..=m_max {
        for mult in (d..=m_max).step_by(d as usize) {
            tau[mult as usize] += 1;
        }
    }
    let mut direct = BigFloat::zero(w);
    let mut dsum = vec![BigFloat::zero(w); kmax + 1];
    for m in 1..=m_max {
        let t = tau[m as usize] as i64;
        direct = direct.add_prec(&pair_value(m, w)?.mul_i64(t), w);
        let inv = BigFloat::from_u64(m, w).recip();
        let mut p = inv.mul_prec(&inv, w);
        for slot in dsum.iter_mut().skip(2) {
            *slot = slot.add_prec(&p.mul_i64(t), w);
            p = p.mul_prec(&inv, w);
        }
    }
    let c = pair_series_coeffs(kmax + 1);
    let mut acc = direct;
    let zetas = hurwitz_zeta_many(kmax as u32, &BigFloat::one(w), w)?;
    for k in 2..=kmax {
        let z = &zetas[k - 2];
        let tail = z.mul_prec(z, w).sub_prec(&dsum[k], w);
        acc = acc.add_prec(&tail.mul_bigint(&c[k]), w);
    }
    // sum_{k > K} 4^k * 2 M^(3/2 - k) / (k - 3/2), geometric in 4/M
    let log2_bound = 1.0 + 1.5 * (m_max as f64).log2() + (kmax as f64 + 1.0) * (4.0 / m_max as f64).log2()
        - (1.0 - 4.0 / m_max as f64).log2();
    let bound = BigFloat::one(prec).mul_pow2(log2_bound.ceil() as i64);
    Ok((acc.with_prec(prec), bound))
}

/// `sum_{i+j <= L} 1/((xi_{i,j} xi_{j,i})^-2 - 1)` with the envelope
/// `sum_{i+j > L} (ij)^-2 <= 2 zeta(2) / floor(L/2)` as tail bound.
pub fn trace2_pair_sum(l_max: usize, prec: u32) -> Result<(BigFloat, BigFloat)> {
    let l_max = l_max.max(4) as u64;
    let w = prec + 16;
    let top = (l_max / 2) * (l_max - l_max / 2);
    let mut count = vec![0i64; top as usize + 1];
    for i in 1..l_max {
        for j in 1..=(l_max - i) {
            count[(i * j) as usize] += 1;
        }
    }
    let mut acc = BigFloat::zero(w);
    for (m, &c) in count.iter().enumerate().skip(1) {
        if c > 0 {
            acc = acc.add_prec(&pair_value(m as u64, w)?.mul_i64(c), w);
        }
    }
    let z2 = zeta(2, w)?;
    let bound = z2.mul_i64(2).div_i64((l_max / 2) as i64);
    Ok((acc.with_prec(prec), bound.with_prec(prec)))
}

/// `Tr L^k` for `k = 1, 2`, each by two independent series.
///
/// `terms` is the direct-summation length of the primary method. A
/// disagreement beyond the combined error budget is reported as a
/// consistency error.
pub fn trace_power(k: u32, terms: usize, prec: u32) -> Result<TraceReport> {
    match k {
        1 => {
            let (value, tail) = trace1_xi_sum(terms, prec)?;
            let (cross, last) = trace1_zeta_series(120, prec)?;
            let allowed = BigFloat::from_f64(TRACE_CROSS_TOL, prec)?.add_prec(&last, prec).add_prec(&tail, prec);
            let diff = (&value - &cross).abs();
            if diff > allowed {
                return Err(Error::Consistency {
                    what: "Tr L: xi-sum vs zeta-series".into(),
                    diff: diff.to_f64(),
                    allowed: allowed.to_f64(),
                });
            }
            Ok(TraceReport {
                power: 1,
                value,
                method: "xi-sum + zeta tail".into(),
                terms,
                tail_bound: tail,
                cross_method: "Euler-transformed zeta series".into(),
                cross_value: cross,
                cross_allowed: allowed,
            })
        }
        2 => {
            let (value, tail) = trace2_divisor_sum(terms, prec)?;
            let (cross, envelope) = trace2_pair_sum(400, prec)?;
            let allowed = envelope.add_prec(&tail, prec);
            let diff = &value - &cross;
            // the truncated pair sum is a lower bound
            if diff.is_negative() && diff.abs() > tail || diff > allowed {
                return Err(Error::Consistency {
                    what: "Tr L^2: divisor sum vs truncated pair sum".into(),
                    diff: diff.to_f64(),
                    allowed: allowed.to_f64(),
                });
            }
            Ok(TraceReport {
                power: 2,
                value,
                method: "divisor sum + zeta^2 tail".into(),
                terms,
                tail_bound: tail,
                cross_method: "pair sum i+j<=400".into(),
                cross_value: cross,
                cross_allowed: allowed,
            })
        }
        _ => Err(Error::Domain(format!("trace of power {k} is not implemented (1 or 2)"))),
    }
}

/// Partial sums of one decomposition identity against its closed form.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub ell: usize,
    pub n_max: usize,
    pub lhs: BigFloat,
    pub rhs: BigFloat,
    pub residual: BigFloat,
    /// Partial sums of the left side after `n = 1..=n_max`.
    pub partials: Vec<BigFloat>,
}

/// `W_0(n) ..= W_{v}(n)` at working precision.
fn low_layers(n: usize, v: usize, opts: &SpectralOptions) -> Result<Vec<BigFloat>> {
    if v == 0 {
        return Ok(vec![BigFloat::one(opts.prec + 32)]);
    }
    let o = SpectralOptions {
        v_max: v,
        ..opts.clone()
    };
    Ok(solve(n, &o)?.state.layers().to_vec())
}

fn report(ell: usize, terms: Vec<BigFloat>, rhs: BigFloat, prec: u32) -> IdentityReport {
    let w = prec + 32;
    let mut partials = Vec::with_capacity(terms.len());
    let mut acc = BigFloat::zero(w);
    for t in &terms {
        acc = acc.add_prec(t, w);
        partials.push(acc.with_prec(prec));
    }
    let residual = (&acc - &rhs).abs().with_prec(prec);
    IdentityReport {
        ell,
        n_max: terms.len(),
        lhs: acc.with_prec(prec),
        rhs: rhs.with_prec(prec),
        residual,
        partials,
    }
}

/// `sum_{n <= n_max} (-1)^(n+1) phi^(-2n) W_{l-1}(n)` against `1/(xi_l^-2 + 1)`.
pub fn column_identity(ell: usize, n_max: usize, opts: &SpectralOptions) -> Result<IdentityReport> {
    if ell == 0 || n_max == 0 {
        return Err(Error::Config("column identity needs l >= 1 and n_max >= 1".into()));
    }
    let w = opts.prec + 32;
    let mut terms = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let layers = low_layers(n, ell - 1, opts)?;
        let mut t = golden_pow(-2 * n as i64).to_float(w).mul_prec(&layers[ell - 1], w);
        if n % 2 == 0 {
            t = -t;
        }
        terms.push(t);
    }
    Ok(report(ell, terms, column_target(ell as u64).to_float(w), opts.prec))
}

/// `sum_{i+j=l} sum_n phi^(-4n) W_{i-1}(n) W_{j-1}(n)` against the pair
/// closed forms, `l >= 2`.
pub fn pair_identity(ell: usize, n_max: usize, opts: &SpectralOptions) -> Result<IdentityReport> {
    if ell < 2 || n_max == 0 {
        return Err(Error::Config("pair identity needs l >= 2 and n_max >= 1".into()));
    }
    let w = opts.prec + 32;
    let mut terms = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let layers = low_layers(n, ell - 2, opts)?;
        let mut s = BigFloat::zero(w);
        for i in 1..ell {
            s = s.add_prec(&layers[i - 1].mul_prec(&layers[ell - i - 1], w), w);
        }
        terms.push(golden_pow(-4 * n as i64).to_float(w).mul_prec(&s, w));
    }
    Ok(report(ell, terms, pair_target(ell as u64, w), opts.prec))
}

/// Coefficient of `omega^(l-1)` in `sum_n lambda_n(omega)^power` against
/// the matching coefficient of `Tr L_omega^power`; the column identity for
/// `power = 1` and the pair identity for `power = 2`.
pub fn omega_trace_identity(
    power: u32,
    ell: usize,
    n_max: usize,
    opts: &SpectralOptions,
) -> Result<IdentityReport> {
    match power {
        1 => column_identity(ell, n_max, opts),
        2 => pair_identity(ell, n_max, opts),
        _ => Err(Error::Domain(format!("omega trace identity for power {power}"))),
    }
}

/// The matrix `(-1)^(n+1) phi^(-2n) W_{l-1}(n)`: rows sum to the partial
/// eigenvalues, columns to `1/(xi_l^-2 + 1)`.
#[derive(Clone, Debug, Serialize)]
pub struct Decomposition {
    pub n_max: usize,
    pub l_max: usize,
    /// `entries[n-1][l-1]`.
    pub entries: Vec<Vec<BigFloat>>,
    pub row_sums: Vec<BigFloat>,
    pub column_sums: Vec<BigFloat>,
    pub column_targets: Vec<BigFloat>,
}

pub fn decomposition(n_max: usize, l_max: usize, opts: &SpectralOptions) -> Result<Decomposition> {
    if n_max == 0 || l_max == 0 {
        return Err(Error::Config("decomposition needs n_max, l_max >= 1".into()));
    }
    let p = opts.prec;
    let w = p + 32;
    let mut entries = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let layers = low_layers(n, l_max - 1, opts)?;
        let mut scale = golden_pow(-2 * n as i64).to_float(w);
        if n % 2 == 0 {
            scale = -scale;
        }
        entries.push(layers.iter().map(|x| x.mul_prec(&scale, w)).collect::<Vec<_>>());
    }
    let row_sums = entries.iter().map(|r| BigFloat::sum(r, p)).collect();
    let column_sums = (0..l_max)
        .map(|l| BigFloat::sum(&entries.iter().map(|r| r[l].clone()).collect::<Vec<_>>(), p))
        .collect();
    let column_targets = (1..=l_max as u64).map(|l| column_target(l).to_float(p)).collect();
    let entries = entries
        .into_iter()
        .map(|r| r.into_iter().map(|x| x.with_prec(p)).collect())
        .collect();
    Ok(Decomposition {
        n_max,
        l_max,
        entries,
        row_sums,
        column_sums,
        column_targets,
    })
}

impl Decomposition {
    /// Wide CSV: `n,l1..lL,row_sum`, then a `sum` row and a `closed_form` row.
    pub fn write_csv<W: Write>(&self, out: &mut W, digits: usize) -> std::io::Result<()> {
        let cols: Vec<String> = (1..=self.l_max).map(|l| format!("l{l}")).collect();
        writeln!(out, "n,{},row_sum", cols.join(","))?;
        let f = |x: &BigFloat| x.to_sci_string(digits);
        for (n, row) in self.entries.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(f).collect();
            writeln!(out, "{},{},{}", n + 1, cells.join(","), f(&self.row_sums[n]))?;
        }
        let total = BigFloat::sum(&self.column_sums, self.column_sums[0].prec());
        let cells: Vec<String> = self.column_sums.iter().map(f).collect();
        writeln!(out, "sum,{},{}", cells.join(","), f(&total))?;
        let cells: Vec<String> = self.column_targets.iter().map(f).collect();
        writeln!(out, "closed_form,{},", cells.join(","))
    }
}

/// `sum_{n > n0} phi^(-2n) (1 + c_max / sqrt n)`: envelope for the
/// eigenvalues beyond `n0` from the bracket `c(n) < c_max`.
pub fn eigenvalue_tail_envelope(n0: usize, c_max: f64) -> f64 {
    let q = golden_pow(-2).to_float(64).to_f64();
    let mut s = 0.0;
    let mut p = q.powi(n0 as i32);
    for n in n0 + 1..n0 + 400 {
        p *= q;
        s += p * (1.0 + c_max / (n as f64).sqrt());
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const TR1: &str = "0.77112552365565890931";
    const TR2: &str = "1.1038396536176132500752";

    fn parse(s: &str) -> BigFloat {
        BigFloat::parse_decimal(s, 128).unwrap()
    }

    #[test]
    fn trace_one_two_methods() {
        let (a, tail) = trace1_xi_sum(64, 128).unwrap();
        assert!((&a - &parse(TR1)).abs().to_f64() < 1e-20);
        assert!(tail.to_f64() < 1e-36);
        let (b, last) = trace1_zeta_series(120, 128).unwrap();
        assert!((&a - &b).abs().to_f64() < 1e-10, "{a} vs {b}");
        assert!(last.to_f64() < 1e-10);
        let r = trace_power(1, 64, 128).unwrap();
        assert_eq!(r.value, a);
    }

    #[test]
    fn trace_one_leading_term() {
        let (one, _) = trace1_xi_sum(4, 128).unwrap();
        let (two, _) = trace1_xi_sum(8, 128).unwrap();
        assert!((&one - &two).abs().to_f64() < 1e-30);
        let t1 = column_target(1).to_float(128).to_f64();
        assert!((t1 - 0.276_393_202_250_021).abs() < 1e-15);
    }

    #[test]
    fn trace_two() {
        let r = trace_power(2, 1024, 128).unwrap();
        assert!((&r.value - &parse(TR2)).abs().to_f64() < 1e-21, "{}", r.value);
        assert!(r.tail_bound.to_f64() < 1e-30);
        let (small, _) = trace2_divisor_sum(256, 128).unwrap();
        assert!((&small - &r.value).abs().to_f64() < 1e-30);
        assert!(trace_power(3, 10, 64).is_err());
    }

    #[test]
    fn pair_series_coefficients() {
        let c = pair_series_coeffs(6);
        let want: Vec<BigInt> = [0, 0, 1, -4, 15, -56].iter().map(|&v| BigInt::from(v)).collect();
        assert_eq!(c, want);
        // g(1) = 1/(phi^4 - 1)
        let g1 = pair_value(1, 128).unwrap().to_f64();
        assert!((g1 - 0.17082039324993691).abs() < 1e-16);
    }

    #[test]
    fn first_column_is_geometric() {
        let r = column_identity(1, 60, &SpectralOptions::default()).unwrap();
        assert!(r.residual.to_f64() < 1e-20);
    }

    #[test]
    fn second_column_brackets_target() {
        let r = column_identity(2, 40, &SpectralOptions::default()).unwrap();
        let target = 1.0 / (2.0 * 2f64.sqrt() + 4.0);
        assert!((r.rhs.to_f64() - target).abs() < 1e-15);
        let p2 = r.partials[1].to_f64();
        let p4 = r.partials[3].to_f64();
        assert!((p2 - 0.13581).abs() < 5e-6, "{p2}");
        assert!((p4 - 0.14529).abs() < 5e-6, "{p4}");
        // alternating signs: odd partial sums above, even ones below
        for (i, p) in r.partials.iter().take(8).enumerate() {
            assert_eq!(p.to_f64() > target, i % 2 == 0, "n_max={}", i + 1);
        }
        assert!(r.residual.to_f64() < 1e-6);
    }

    #[test]
    fn pair_identities() {
        let opts = SpectralOptions::default();
        let r2 = pair_identity(2, 60, &opts).unwrap();
        assert!(r2.residual.to_f64() < 1e-20);
        assert!((r2.rhs.to_f64() - 0.17082039324993691).abs() < 1e-15);
        let r3 = pair_identity(3, 40, &opts).unwrap();
        assert!((r3.rhs.to_f64() - 2.0 / (6.0 + 4.0 * 3f64.sqrt())).abs() < 1e-15);
        assert!(r3.residual.to_f64() < 1e-6);
        let o = omega_trace_identity(2, 3, 40, &opts).unwrap();
        assert_eq!(o.residual, r3.residual);
        assert!(pair_identity(1, 5, &opts).is_err());
    }

    #[test]
    fn decomposition_marginals() {
        let d = decomposition(20, 3, &SpectralOptions::default()).unwrap();
        for l in 0..3 {
            let diff = (&d.column_sums[l] - &d.column_targets[l]).abs().to_f64();
            assert!(diff < 1e-6, "l={} diff={diff}", l + 1);
        }
        let mut buf = Vec::new();
        d.write_csv(&mut buf, 10).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n,l1,l2,l3,row_sum\n1,"));
        assert_eq!(text.lines().count(), 20 + 3);
    }
}
