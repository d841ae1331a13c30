//! Asymptotics of the eigenvalues: `c(n)`, successive ratios and empirical
//! fits of the expansion coefficients.
//!
//! With `(-1)^(n+1) lambda_n = phi^(-2n) (1 + c(n)/sqrt n)` the quantity
//! `c(n)` is read off a computed eigenvalue. Fits of
//!
//! ```text
//! c(n) ~ d(1) + d(2) n^(-1/2) + d(3) n^(-1) + ...
//! ```
//!
//! are plain least squares and reported as estimates only.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{golden_pow, least_squares, BigFloat};
use crate::spectral::EigenvalueResult;

/// Largest `p_max` before a fit is flagged as ill-conditioned.
pub const WELL_CONDITIONED_P_MAX: usize = 3;

/// Condition estimates above this are flagged regardless of `p_max`.
pub const CONDITION_LIMIT: f64 = 1e4;

/// Lower and upper bounds on `c(n)` for every `n`.
pub const C_BRACKET: (f64, f64) = (0.4, 1.7);

/// Bracket checks are only meaningful once the error on `c(n)` is below this.
pub const BRACKET_ERROR_LIMIT: f64 = 0.05;

/// `c(n)` with its propagated error.
#[derive(Clone, Debug, Serialize)]
pub struct CEstimate {
    pub value: BigFloat,
    pub error: BigFloat,
}

/// `c(n) = ((-1)^(n+1) lambda phi^(2n) - 1) sqrt n`, with the error on
/// `lambda` scaled by the same factor.
///
/// Fails with a precision error when the propagated error is at least as
/// large as `|c(n)|`, i.e. when nothing is left to extract.
pub fn asympt_c(n: usize, lambda: &BigFloat, lambda_error: &BigFloat) -> Result<CEstimate> {
    if n == 0 {
        return Err(Error::Domain("eigenvalue index starts at 1".into()));
    }
    let prec = lambda.prec().max(64);
    let scale = golden_pow(2 * n as i64).to_float(prec);
    let root = BigFloat::from_u64(n as u64, prec).sqrt()?;
    let mut lam = lambda.with_prec(prec);
    if n % 2 == 0 {
        lam = -lam;
    }
    let value = lam
        .mul_prec(&scale, prec)
        .sub_prec(&BigFloat::one(prec), prec)
        .mul_prec(&root, prec);
    let error = lambda_error
        .abs()
        .with_prec(prec)
        .mul_prec(&scale, prec)
        .mul_prec(&root, prec);
    if !error.is_zero() && error >= value.abs() {
        return Err(Error::Precision(format!(
            "c({n}): error {:e} swamps the value {:e}",
            error.to_f64(),
            value.to_f64()
        )));
    }
    Ok(CEstimate { value, error })
}

/// One eigenvalue with everything derived from it.
#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticsRow {
    pub n: usize,
    pub lambda: BigFloat,
    pub lambda_error: BigFloat,
    pub c_n: BigFloat,
    pub c_error: BigFloat,
    /// `lambda_n / lambda_(n+1)` when the next row is consecutive.
    pub ratio_to_next: Option<BigFloat>,
}

impl AsymptoticsRow {
    pub fn new(n: usize, lambda: &BigFloat, lambda_error: &BigFloat) -> Result<Self> {
        let c = asympt_c(n, lambda, lambda_error)?;
        Ok(Self {
            n,
            lambda: lambda.clone(),
            lambda_error: lambda_error.abs(),
            c_n: c.value,
            c_error: c.error,
            ratio_to_next: None,
        })
    }

    pub fn from_result(res: &EigenvalueResult) -> Result<Self> {
        Self::new(res.n, &res.lambda, &res.lambda_error())
    }

    /// Whether `c(n)` sits inside the bracket, or `None` if the error is too
    /// large to tell.
    pub fn within_bracket(&self) -> Option<bool> {
        if self.c_error.to_f64() >= BRACKET_ERROR_LIMIT {
            return None;
        }
        let c = self.c_n.to_f64();
        Some(c > C_BRACKET.0 && c < C_BRACKET.1)
    }
}

/// Builds rows in order of `n` and fills `ratio_to_next` between
/// consecutive indices.
pub fn rows_from(points: &[(usize, BigFloat, BigFloat)]) -> Result<Vec<AsymptoticsRow>> {
    let mut rows = points
        .iter()
        .map(|(n, l, e)| AsymptoticsRow::new(*n, l, e))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|r| r.n);
    for i in 0..rows.len().saturating_sub(1) {
        if rows[i + 1].n == rows[i].n + 1 && !rows[i + 1].lambda.is_zero() {
            let r = &rows[i].lambda / &rows[i + 1].lambda;
            rows[i].ratio_to_next = Some(r);
        }
    }
    Ok(rows)
}

/// `lambda_n / lambda_(n+1)` with a first-order error bar.
#[derive(Clone, Debug, Serialize)]
pub struct Ratio {
    pub n: usize,
    pub value: BigFloat,
    pub error: BigFloat,
    /// `|ratio + phi^2|`.
    pub distance_to_limit: BigFloat,
}

/// Successive ratios of `lambdas[i] = (lambda_(i+1), error)`.
pub fn ratio_test(lambdas: &[(BigFloat, BigFloat)]) -> Result<Vec<Ratio>> {
    if lambdas.len() < 2 {
        return Err(Error::Domain("ratio test needs at least two eigenvalues".into()));
    }
    let prec = lambdas.iter().map(|(l, _)| l.prec()).max().unwrap_or(64);
    let limit = golden_pow(2).to_float(prec);
    lambdas
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            let (a, ea) = &w[0];
            let (b, eb) = &w[1];
            let value = a.checked_div(b)?;
            let rel = &ea.abs().div_prec(&a.abs(), prec) + &eb.abs().div_prec(&b.abs(), prec);
            let error = value.abs().mul_prec(&rel, prec);
            let distance_to_limit = value.add_prec(&limit, prec).abs();
            Ok(Ratio {
                n: i + 1,
                value,
                error,
                distance_to_limit,
            })
        })
        .collect()
}

/// Least-squares estimates of `d(1..=p_max+1)`.
#[derive(Clone, Debug, Serialize)]
pub struct DFit {
    pub p_max: usize,
    /// `d[0]` is `d(1)`, the limit of `c(n)`.
    pub d: Vec<f64>,
    pub residual: f64,
    pub condition: f64,
    pub ill_conditioned: bool,
}

/// Fits `c(n)` against `n^(-p/2)`, `p = 0..=p_max`.
pub fn fit_d(points: &[(usize, f64)], p_max: usize) -> Result<DFit> {
    if points.len() < p_max + 2 {
        return Err(Error::Domain(format!(
            "fit with p_max={p_max} needs at least {} rows, got {}",
            p_max + 2,
            points.len()
        )));
    }
    let prec = 128;
    let mut design = Vec::with_capacity(points.len());
    let mut y = Vec::with_capacity(points.len());
    for &(n, c) in points {
        if n == 0 {
            return Err(Error::Domain("eigenvalue index starts at 1".into()));
        }
        let s = BigFloat::from_u64(n as u64, prec).sqrt()?.recip();
        let mut row = Vec::with_capacity(p_max + 1);
        let mut t = BigFloat::one(prec);
        for _ in 0..=p_max {
            row.push(t.clone());
            t = t.mul_prec(&s, prec);
        }
        design.push(row);
        y.push(BigFloat::from_f64(c, prec)?);
    }
    let fit = least_squares(&design, &y, prec)?;
    Ok(DFit {
        p_max,
        d: fit.coeffs.iter().map(BigFloat::to_f64).collect(),
        residual: fit.residual.to_f64(),
        condition: fit.condition,
        ill_conditioned: p_max > WELL_CONDITIONED_P_MAX || fit.condition > CONDITION_LIMIT,
    })
}

/// Same as [`fit_d`] on computed rows.
pub fn fit_rows(rows: &[AsymptoticsRow], p_max: usize) -> Result<DFit> {
    let pts: Vec<(usize, f64)> = rows.iter().map(|r| (r.n, r.c_n.to_f64())).collect();
    fit_d(&pts, p_max)
}

/// CSV with columns `n,lambda,c_n,ratio,err_lambda`; `ratio` is empty where
/// the next eigenvalue is missing.
pub fn write_csv<W: Write>(out: &mut W, rows: &[AsymptoticsRow], digits: usize) -> std::io::Result<()> {
    writeln!(out, "n,lambda,c_n,ratio,err_lambda")?;
    for r in rows {
        let ratio = r
            .ratio_to_next
            .as_ref()
            .map(|x| x.to_sci_string(digits))
            .unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{}",
            r.n,
            r.lambda.to_sci_string(digits),
            r.c_n.to_sci_string(digits),
            ratio,
            r.lambda_error.to_sci_string(3)
        )?;
    }
    Ok(())
}
