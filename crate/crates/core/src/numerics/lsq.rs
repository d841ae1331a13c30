//! Dense least squares by Householder QR.

use super::bigfloat::BigFloat;
use crate::error::{Error, Result};

/// Solution of `min |A c - y|`.
#[derive(Clone, Debug)]
pub struct LeastSquares {
    pub coeffs: Vec<BigFloat>,
    /// Euclidean norm of the residual vector.
    pub residual: BigFloat,
    /// `max |R_ii| / min |R_ii|` after unit column scaling; a cheap lower
    /// bound on the 2-norm condition number.
    pub condition: f64,
}

/// Solves the over-determined system `rows * c = y` at `prec` bits.
///
/// Columns are scaled to unit max-norm first so the condition estimate is
/// not polluted by scale alone.
pub fn least_squares(rows: &[Vec<BigFloat>], y: &[BigFloat], prec: u32) -> Result<LeastSquares> {
    let m = rows.len();
    let n = rows.first().map_or(0, Vec::len);
    if n == 0 || m < n || y.len() != m {
        return Err(Error::Domain(format!(
            "least squares needs rows >= columns > 0 (got {m} x {n})"
        )));
    }
    let w = prec + 32;
    let mut scale = vec![BigFloat::zero(w); n];
    for (k, s) in scale.iter_mut().enumerate() {
        *s = BigFloat::max_abs(rows.iter().map(|r| &r[k])).expect("m > 0");
        if s.is_zero() {
            return Err(Error::Domain(format!("least squares column {k} is zero")));
        }
    }
    // column-major working copy
    let mut a: Vec<Vec<BigFloat>> = (0..n)
        .map(|k| rows.iter().map(|r| r[k].div_prec(&scale[k], w)).collect())
        .collect();
    let mut b: Vec<BigFloat> = y.iter().map(|v| v.with_prec(w)).collect();
    let mut diag = Vec::with_capacity(n);
    for k in 0..n {
        let norm = BigFloat::dot(&a[k][k..], &a[k][k..], w).sqrt()?;
        if norm.is_zero() {
            return Err(Error::Domain("least squares design is rank deficient".into()));
        }
        let alpha = if a[k][k].is_negative() { norm } else { -norm };
        let mut v: Vec<BigFloat> = a[k][k..].to_vec();
        v[0] = v[0].sub_prec(&alpha, w);
        let vnorm2 = BigFloat::dot(&v, &v, w);
        if !vnorm2.is_zero() {
            for col in a.iter_mut().skip(k) {
                let f = BigFloat::dot(&v, &col[k..], w).mul_pow2(1).div_prec(&vnorm2, w);
                for (ci, vi) in col[k..].iter_mut().zip(&v) {
                    *ci = ci.sub_prec(&f.mul_prec(vi, w), w);
                }
            }
            let f = BigFloat::dot(&v, &b[k..], w).mul_pow2(1).div_prec(&vnorm2, w);
            for (bi, vi) in b[k..].iter_mut().zip(&v) {
                *bi = bi.sub_prec(&f.mul_prec(vi, w), w);
            }
        }
        diag.push(a[k][k].abs());
    }
    let mut c = vec![BigFloat::zero(w); n];
    for k in (0..n).rev() {
        let mut s = b[k].clone();
        for j in k + 1..n {
            s = s.sub_prec(&a[j][k].mul_prec(&c[j], w), w);
        }
        c[k] = s.div_prec(&a[k][k], w);
    }
    let residual = BigFloat::dot(&b[n..], &b[n..], w).sqrt()?.with_prec(prec);
    let dmax = diag.iter().max().expect("n > 0").to_f64();
    let dmin = diag.iter().min().expect("n > 0").to_f64();
    let coeffs = c
        .iter()
        .zip(&scale)
        .map(|(ck, sk)| ck.div_prec(sk, w).with_prec(prec))
        .collect();
    Ok(LeastSquares {
        coeffs,
        residual,
        condition: if dmin > 0.0 { dmax / dmin } else { f64::INFINITY },
    })
}
