//! Independent eigenvalues from a truncated Taylor-basis matrix.
//!
//! On monomials `(t - c)^k` the operator acts as
//!
//! ```text
//! L[(t-c)^k](z) = sum_b C(k,b) (-c)^(k-b) sum_m (z+m)^(-b-2)
//! ```
//!
//! and expanding around `z = c` gives the matrix
//! `M[a][k] = sum_b C(k,b) (-c)^(k-b) (-1)^a C(a+b+1, a) zeta(a+b+2, c+1)`.

mod qr;
mod zeta;

use std::io::Write;

use num_bigint::BigInt;
use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::numerics::{binomial, BigFloat, Rational};

pub use qr::{balance, eigenvalues, hessenberg, hqr};
pub use zeta::{hurwitz_zeta, hurwitz_zeta_many, zeta};

/// `N x N` Taylor-basis truncation of the operator around `centre`.
#[derive(Clone, Debug)]
pub struct TruncatedOperator {
    pub dim: usize,
    pub centre: Rational,
    pub prec: u32,
    /// `entries[a][k]`.
    pub entries: Vec<Vec<BigFloat>>,
}

impl TruncatedOperator {
    /// `sum_a M[a][a]`.
    pub fn trace(&self) -> BigFloat {
        let diag: Vec<BigFloat> = (0..self.dim).map(|i| self.entries[i][i].clone()).collect();
        BigFloat::sum(&diag, self.prec)
    }
}

/// Bits lost to cancellation in the alternating binomial sums, plus slack.
fn entry_guard(dim: usize) -> u32 {
    3 * dim as u32 + 32
}

/// The matrix around `z = 1`.
pub fn build_matrix(dim: usize, prec: u32) -> Result<TruncatedOperator> {
    build_matrix_at(dim, &Rational::one(), prec)
}

/// The matrix around `z = centre`, `centre > 0`.
pub fn build_matrix_at(dim: usize, centre: &Rational, prec: u32) -> Result<TruncatedOperator> {
    if dim < 1 {
        return Err(Error::Config("oracle dimension must be >= 1".into()));
    }
    if !centre.is_positive() {
        return Err(Error::Domain(format!("expansion centre {centre} must be positive")));
    }
    let w = prec + entry_guard(dim);
    let shift = BigFloat::from_rational(&(centre + Rational::one()), w);
    // zeta(s, c+1) for s = 2..=2 dim
    let z = hurwitz_zeta_many(2 * dim as u32, &shift, w)?;
    let zeta_at = |s: usize| &z[s - 2];
    // (-c)^e as exact rationals
    let neg_c = -centre.clone();
    let mut cpow = vec![Rational::one()];
    for e in 1..dim {
        let next = &cpow[e - 1] * &neg_c;
        cpow.push(next);
    }
    let cpow: Vec<BigFloat> = cpow.iter().map(|r| BigFloat::from_rational(r, w)).collect();
    let mut entries = vec![vec![BigFloat::zero(prec); dim]; dim];
    for (a, row) in entries.iter_mut().enumerate() {
        for (k, slot) in row.iter_mut().enumerate() {
            let mut acc = BigFloat::zero(w);
            for b in 0..=k {
                let coef: BigInt = binomial(k as u64, b as u64) * binomial((a + b + 1) as u64, a as u64);
                let t = cpow[k - b]
                    .mul_bigint(&coef)
                    .mul_prec(zeta_at(a + b + 2), w);
                acc = acc.add_prec(&t, w);
            }
            if a % 2 == 1 {
                acc = -acc;
            }
            *slot = acc.with_prec(prec);
        }
    }
    Ok(TruncatedOperator {
        dim,
        centre: centre.clone(),
        prec,
        entries,
    })
}

/// Leading eigenvalues of one truncation.
#[derive(Clone, Debug)]
pub struct OracleSpectrum {
    pub dim: usize,
    pub prec: u32,
    /// Real parts, by decreasing modulus.
    pub values: Vec<BigFloat>,
    /// Imaginary parts (zero for the real eigenvalues expected here).
    pub imag: Vec<BigFloat>,
}

/// Working bits for the QR iteration beyond the requested precision.
const QR_GUARD: u32 = 64;

/// The `count` largest-modulus eigenvalues of the `dim`-dimensional
/// truncation around `z = 1`.
pub fn oracle_spectrum(dim: usize, count: usize, prec: u32) -> Result<OracleSpectrum> {
    oracle_spectrum_at(dim, count, &Rational::one(), prec)
}

pub fn oracle_spectrum_at(
    dim: usize,
    count: usize,
    centre: &Rational,
    prec: u32,
) -> Result<OracleSpectrum> {
    if count > dim {
        return Err(Error::Config(format!(
            "requested {count} eigenvalues from a {dim}-dimensional truncation"
        )));
    }
    let w = prec + QR_GUARD;
    let m = build_matrix_at(dim, centre, w)?;
    let ev = eigenvalues(m.entries, w)?;
    let (values, imag) = ev
        .into_iter()
        .take(count)
        .map(|(re, im)| (re.with_prec(prec), im.with_prec(prec)))
        .unzip();
    Ok(OracleSpectrum {
        dim,
        prec,
        values,
        imag,
    })
}

/// The `count` leading eigenvalues (real parts) at dimension `dim`.
pub fn oracle_eigenvalues(dim: usize, count: usize, prec: u32) -> Result<Vec<BigFloat>> {
    Ok(oracle_spectrum(dim, count, prec)?.values)
}

/// Eigenvalues at `dim` and `dim + 10` with their per-index differences.
#[derive(Clone, Debug)]
pub struct OracleCheck {
    pub coarse: OracleSpectrum,
    pub fine: OracleSpectrum,
    pub diffs: Vec<f64>,
}

impl OracleCheck {
    pub fn max_diff(&self) -> f64 {
        self.diffs.iter().cloned().fold(0.0, f64::max)
    }
}

/// Runs the truncation at `dim` and `dim + 10`.
pub fn oracle_check(dim: usize, count: usize, prec: u32) -> Result<OracleCheck> {
    let coarse = oracle_spectrum(dim, count, prec)?;
    let fine = oracle_spectrum(dim + 10, count, prec)?;
    let diffs = coarse
        .values
        .iter()
        .zip(&fine.values)
        .map(|(a, b)| (a - b).abs().to_f64())
        .collect();
    Ok(OracleCheck { coarse, fine, diffs })
}

/// CSV with columns `N,index,eigenvalue`.
pub fn write_spectrum_csv<W: Write>(out: &mut W, spectra: &[OracleSpectrum], digits: usize) -> std::io::Result<()> {
    writeln!(out, "N,index,eigenvalue")?;
    for s in spectra {
        for (i, v) in s.values.iter().enumerate() {
            writeln!(out, "{},{},{}", s.dim, i + 1, v.to_sci_string(digits))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_column_entries() {
        let m = build_matrix(6, 128).unwrap();
        let two = BigFloat::from_u64(2, 128);
        let z22 = hurwitz_zeta(2, &two, 128).unwrap();
        assert!((&m.entries[0][0] - &z22).abs().to_f64() < 1e-36);
        assert!((m.entries[0][0].to_f64() - 0.6449340668482264).abs() < 1e-15);
        for a in 0..6 {
            let mut want = hurwitz_zeta(a as u32 + 2, &two, 128).unwrap().mul_i64(a as i64 + 1);
            if a % 2 == 1 {
                want = -want;
            }
            assert!((&m.entries[a][0] - &want).abs().to_f64() < 1e-36, "a={a}");
        }
    }

    #[test]
    fn constant_function_column_by_brute_force() {
        // L[1](z) = sum_m (z+m)^-2; its Taylor coefficients at z = 1 by finite
        // summation of the series derivatives
        let m = build_matrix(4, 96).unwrap();
        let f = |z: f64| (1..200_000).map(|k| (z + k as f64).powi(-2)).sum::<f64>() + 1.0 / (z + 200_000.0);
        let h = 1e-3;
        let d1 = (f(1.0 + h) - f(1.0 - h)) / (2.0 * h);
        assert!((m.entries[1][0].to_f64() - d1).abs() < 1e-6);
    }

    #[test]
    fn dominant_eigenvalue_converges() {
        let one = oracle_eigenvalues(1, 1, 96).unwrap();
        assert!((one[0].to_f64() - 0.6449).abs() < 1e-4);
        let ev = oracle_eigenvalues(20, 3, 128).unwrap();
        assert!((ev[0].to_f64() - 1.0).abs() < 1e-6);
        assert!((ev[1].to_f64() + 0.3036630029).abs() < 1e-6);
    }

    #[test]
    fn leading_spectrum_at_forty() {
        let chk = oracle_check(40, 6, 128).unwrap();
        let v = &chk.coarse.values;
        assert!((v[0].to_f64() - 1.0).abs() < 1e-10);
        assert!((v[1].to_f64().abs() - 0.303_663_002_9).abs() < 1e-8);
        for i in 0..6 {
            assert_eq!(v[i].is_positive(), i % 2 == 0, "sign of lambda_{}", i + 1);
            assert!(chk.coarse.imag[i].abs().to_f64() < 1e-20);
        }
        assert!(chk.diffs[1] < 1e-8);
    }

    #[test]
    fn csv_and_errors() {
        let s = oracle_spectrum(8, 2, 64).unwrap();
        let mut buf = Vec::new();
        write_spectrum_csv(&mut buf, &[s], 12).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("N,index,eigenvalue\n8,1,"));
        assert_eq!(text.lines().count(), 3);
        assert!(oracle_eigenvalues(3, 4, 64).is_err());
        assert!(build_matrix_at(4, &Rational::from_integer(0.into()), 64).is_err());
    }
}
