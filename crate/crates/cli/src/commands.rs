use std::io::Write;

use clap::ValueEnum;
use gkw_core::analysis::{self, AsymptoticsRow};
use gkw_core::kernel::check_identities;
use gkw_core::numerics::BigFloat;
use gkw_core::oracle::{oracle_spectrum, write_spectrum_csv};
use gkw_core::spectral::{eigenvalue, EigenvalueResult};
use gkw_core::traces::{column_identity, decomposition, omega_trace_identity, pair_identity, trace_power, IdentityReport};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{Checks, Payload};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Identity {
    Column,
    Pair,
    Omega,
    Kernel,
    Trace,
}

/// Maps `f` over `ns` on at most `jobs` threads (0 = all cores), keeping
/// the input order.
fn par_map<T: Send>(
    jobs: usize,
    ns: &[usize],
    f: impl Fn(usize) -> gkw_core::Result<T> + Sync,
) -> Result<Vec<T>, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    let out: Vec<gkw_core::Result<T>> = pool.install(|| ns.par_iter().map(|&n| f(n)).collect());
    out.into_iter().collect::<Result<_, _>>().map_err(CliError::from)
}

fn sci(x: &BigFloat) -> String {
    x.to_sci_string(6)
}

pub fn eigen(cfg: &RunConfig) -> Result<Payload, CliError> {
    let ns = cfg.indices()?;
    let opts = cfg.spectral();
    let results = par_map(cfg.jobs, &ns, |n| eigenvalue(n, &opts))?;
    let d = cfg.digits();
    let mut csv = Vec::new();
    writeln!(csv, "n,lambda,err_lambda,err_conservative,c_n,window_hi,v_max,window_change").unwrap();
    let mut records = Vec::new();
    for r in &results {
        let c = c_of(r);
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{:e}",
            r.n,
            r.lambda.to_sci_string(d),
            sci(&r.lambda_error()),
            sci(&r.lambda_error_conservative()),
            c.as_ref().map(|c| c.to_sci_string(12)).unwrap_or_default(),
            r.window.1,
            r.v_max,
            r.window_change
        )
        .unwrap();
        let mut v = r.to_json();
        v["lambda_error"] = json!(sci(&r.lambda_error()));
        v["c_n"] = json!(c.map(|c| c.to_sci_string(12)));
        records.push(v);
    }
    Ok(Payload {
        csv,
        json: Value::Array(records),
    })
}

fn c_of(r: &EigenvalueResult) -> Option<BigFloat> {
    analysis::asympt_c(r.n, &r.lambda, &r.lambda_error())
        .ok()
        .map(|c| c.value)
}

fn identity_checks(checks: &mut Checks, r: &IdentityReport, tol: f64) {
    checks.info("ell", r.ell);
    checks.info("n_max", r.n_max);
    checks.info("lhs", &r.lhs);
    checks.info("rhs", &r.rhs);
    let res = r.residual.to_f64();
    checks.check("residual", sci(&r.residual), format!("{tol:e}"), res < tol);
}

pub fn validate(cfg: &RunConfig, what: Identity) -> Result<Checks, CliError> {
    let opts = cfg.spectral();
    let mut checks = Checks::default();
    match what {
        Identity::Column => {
            let r = column_identity(cfg.ell, cfg.n_max, &opts)?;
            identity_checks(&mut checks, &r, cfg.tol);
        }
        Identity::Pair => {
            let r = pair_identity(cfg.ell, cfg.n_max, &opts)?;
            identity_checks(&mut checks, &r, cfg.tol);
        }
        Identity::Omega => {
            checks.info("power", cfg.power);
            let r = omega_trace_identity(cfg.power, cfg.ell, cfg.n_max, &opts)?;
            identity_checks(&mut checks, &r, cfg.tol);
        }
        Identity::Kernel => {
            let k = check_identities(cfg.l_max as u64, cfg.mass_target, cfg.j_cap.map(|c| c as u64))?;
            checks.check("asymmetric_pairs", k.asymmetric.len(), 0, k.asymmetric.is_empty());
            for (ell, j_hi, d) in &k.deficits {
                checks.check(
                    format!("column_deficit_l{ell}_J{j_hi}"),
                    format!("{d:e}"),
                    format!("{:e}", cfg.mass_target),
                    *d < cfg.mass_target,
                );
            }
        }
        Identity::Trace => {
            let t = trace_power(cfg.power, cfg.terms, cfg.precision_bits)?;
            checks.info("power", t.power);
            checks.info(format!("value_{}", t.method), t.value.to_sci_string(cfg.digits()));
            checks.info(
                format!("value_{}", t.cross_method),
                t.cross_value.to_sci_string(cfg.digits()),
            );
            let diff = (&t.value - &t.cross_value).abs();
            checks.check("method_difference", sci(&diff), sci(&t.cross_allowed), diff <= t.cross_allowed);
        }
    }
    Ok(checks)
}

pub fn oracle(cfg: &RunConfig) -> Result<Payload, CliError> {
    let s = oracle_spectrum(cfg.dim, cfg.count, cfg.precision_bits)?;
    let d = cfg.digits();
    let mut csv = Vec::new();
    write_spectrum_csv(&mut csv, std::slice::from_ref(&s), d).unwrap();
    let values: Vec<String> = s.values.iter().map(|v| v.to_sci_string(d)).collect();
    Ok(Payload {
        csv,
        json: json!({ "dim": s.dim, "eigenvalues": values }),
    })
}

pub fn asympt(cfg: &RunConfig) -> Result<Payload, CliError> {
    if cfg.n_max == 0 {
        return Err(CliError::Usage("--nmax must be positive".into()));
    }
    let ns: Vec<usize> = (1..=cfg.n_max).collect();
    let opts = cfg.spectral();
    let results = par_map(cfg.jobs, &ns, |n| eigenvalue(n, &opts))?;
    let points: Vec<_> = results
        .iter()
        .map(|r| (r.n, r.lambda.clone(), r.lambda_error()))
        .collect();
    let rows: Vec<AsymptoticsRow> = analysis::rows_from(&points)?;
    let mut csv = Vec::new();
    analysis::write_csv(&mut csv, &rows, cfg.digits()).unwrap();
    let fit = (rows.len() >= 4)
        .then(|| analysis::fit_rows(&rows, 2))
        .transpose()?;
    Ok(Payload {
        csv,
        json: json!({ "rows": rows, "fit_p2": fit }),
    })
}

pub fn export_matrix(cfg: &RunConfig) -> Result<Payload, CliError> {
    let dec = decomposition(cfg.n_max, cfg.l_max, &cfg.spectral())?;
    let mut csv = Vec::new();
    dec.write_csv(&mut csv, cfg.digits()).unwrap();
    Ok(Payload {
        csv,
        json: serde_json::to_value(&dec).expect("serializable"),
    })
}
