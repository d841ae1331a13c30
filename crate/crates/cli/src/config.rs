//! Flags, the optional `key=value` file, and the resolved [`RunConfig`].

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use gkw_core::spectral::{SpectralOptions, WindowPolicy};
use serde::Serialize;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format {s:?} (csv or json)")),
        }
    }
}

/// Flags shared by every subcommand. All optional so that the config file can
/// fill the gaps.
#[derive(Args, Clone, Debug, Default)]
pub struct Flags {
    /// Eigenvalue index or inclusive range such as `3..6`.
    #[arg(long, global = true)]
    pub n: Option<String>,
    /// Working precision in bits [default: 128].
    #[arg(long, global = true)]
    pub prec: Option<u32>,
    /// Number of layers summed before the tail fit [default: 32].
    #[arg(long, global = true)]
    pub vmax: Option<usize>,
    /// Window convergence threshold and kernel mass deficit [default: 1e-20].
    #[arg(long = "mass-target", global = true)]
    pub mass_target: Option<f64>,
    /// Hard cap on the kernel window.
    #[arg(long, global = true)]
    pub jcap: Option<usize>,
    /// Matrix oracle dimension [default: 40].
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    /// Number of oracle eigenvalues [default: 6].
    #[arg(long, global = true)]
    pub count: Option<usize>,
    /// Column or pair index for the identities.
    #[arg(long, global = true)]
    pub ell: Option<usize>,
    /// Largest kernel index or number of decomposition columns.
    #[arg(long, global = true)]
    pub lmax: Option<usize>,
    /// Number of eigenvalues summed.
    #[arg(long, global = true)]
    pub nmax: Option<usize>,
    /// Trace power, 1 or 2 [default: 1].
    #[arg(long, global = true)]
    pub power: Option<u32>,
    /// Directly summed terms in the trace evaluation [default: 1024].
    #[arg(long, global = true)]
    pub terms: Option<usize>,
    /// Residual threshold for identity checks [default: 1e-6].
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for range commands; output order does not depend on it.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Plain-text `key=value` file; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

/// Everything that determines the output. Written verbatim into every
/// artifact; `jobs` is left out because it cannot change a single byte.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub n: Option<String>,
    pub precision_bits: u32,
    pub v_max: usize,
    pub mass_target: f64,
    pub j_cap: Option<usize>,
    pub dim: usize,
    pub count: usize,
    pub ell: usize,
    pub l_max: usize,
    pub n_max: usize,
    pub power: u32,
    pub terms: usize,
    pub tol: f64,
    pub format: Format,
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub jobs: usize,
}

/// Per-command defaults for the parameters whose meaning varies.
pub struct Defaults {
    pub ell: usize,
    pub l_max: usize,
    pub n_max: usize,
}

const KEYS: [&str; 17] = [
    "n", "prec", "vmax", "mass-target", "jcap", "dim", "count", "ell", "lmax", "nmax", "power",
    "terms", "tol", "format", "out", "jobs", "config",
];

/// Reads `key = value` lines; blank lines and `#` comments are skipped, and
/// `_` in keys is accepted for `-`.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("{}:{}: expected key=value", path.display(), i + 1))
        })?;
        let k = k.trim().replace('_', "-");
        if !KEYS.contains(&k.as_str()) || k == "config" {
            return Err(CliError::Usage(format!(
                "{}:{}: unknown key {k:?}",
                path.display(),
                i + 1
            )));
        }
        map.insert(k, v.trim().to_string());
    }
    Ok(map)
}

fn pick<T: FromStr>(
    flag: Option<T>,
    file: &BTreeMap<String, String>,
    key: &str,
) -> Result<Option<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    if flag.is_some() {
        return Ok(flag);
    }
    file.get(key)
        .map(|v| {
            v.parse::<T>()
                .map_err(|e| CliError::Usage(format!("config key {key}: {e}")))
        })
        .transpose()
}

impl RunConfig {
    pub fn resolve(command: &str, flags: &Flags, defaults: Defaults) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(p) => read_config_file(p)?,
            None => BTreeMap::new(),
        };
        let cfg = RunConfig {
            command: command.to_string(),
            n: pick(flags.n.clone(), &file, "n")?,
            precision_bits: pick(flags.prec, &file, "prec")?.unwrap_or(128),
            v_max: pick(flags.vmax, &file, "vmax")?.unwrap_or(32),
            mass_target: pick(flags.mass_target, &file, "mass-target")?.unwrap_or(1e-20),
            j_cap: pick(flags.jcap, &file, "jcap")?,
            dim: pick(flags.dim, &file, "dim")?.unwrap_or(40),
            count: pick(flags.count, &file, "count")?.unwrap_or(6),
            ell: pick(flags.ell, &file, "ell")?.unwrap_or(defaults.ell),
            l_max: pick(flags.lmax, &file, "lmax")?.unwrap_or(defaults.l_max),
            n_max: pick(flags.nmax, &file, "nmax")?.unwrap_or(defaults.n_max),
            power: pick(flags.power, &file, "power")?.unwrap_or(1),
            terms: pick(flags.terms, &file, "terms")?.unwrap_or(1024),
            tol: pick(flags.tol, &file, "tol")?.unwrap_or(1e-6),
            format: pick(flags.format, &file, "format")?.unwrap_or(Format::Csv),
            out: pick(flags.out.clone(), &file, "out")?,
            jobs: pick(flags.jobs, &file, "jobs")?.unwrap_or(0),
        };
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), CliError> {
        if self.precision_bits < gkw_core::numerics::MIN_PRECISION {
            return Err(CliError::Usage(format!(
                "--prec must be at least {} bits",
                gkw_core::numerics::MIN_PRECISION
            )));
        }
        if !(self.mass_target > 0.0 && self.mass_target < 1.0) {
            return Err(CliError::Usage("--mass-target must lie in (0, 1)".into()));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(CliError::Usage("--tol must be positive".into()));
        }
        if self.v_max == 0 || self.dim == 0 || self.count == 0 {
            return Err(CliError::Usage("--vmax, --dim and --count must be positive".into()));
        }
        Ok(())
    }

    pub fn spectral(&self) -> SpectralOptions {
        SpectralOptions {
            v_max: self.v_max,
            window: WindowPolicy {
                mass_deficit: self.mass_target,
                j_cap: self.j_cap,
                size: None,
            },
            prec: self.precision_bits,
        }
    }

    /// Decimal digits written for each value.
    pub fn digits(&self) -> usize {
        (self.precision_bits as f64 * std::f64::consts::LOG10_2).floor() as usize
    }

    /// The `--n` argument as an inclusive list of indices.
    pub fn indices(&self) -> Result<Vec<usize>, CliError> {
        let spec = self
            .n
            .as_deref()
            .ok_or_else(|| CliError::Usage("--n is required".into()))?;
        parse_range(spec)
    }
}

/// `"4"`, `"3..6"` or `"3..=6"`, both ends inclusive.
pub fn parse_range(spec: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::Usage(format!("bad index or range {spec:?}"));
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    let (lo, hi) = match spec.split_once("..") {
        Some((a, b)) => (num(a)?, num(b.trim_start_matches('='))?),
        None => {
            let v = num(spec)?;
            (v, v)
        }
    };
    if lo == 0 || hi < lo {
        return Err(bad());
    }
    Ok((lo..=hi).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("3..6").unwrap(), vec![3, 4, 5, 6]);
        assert_eq!(parse_range("3..=4").unwrap(), vec![3, 4]);
        assert_eq!(parse_range("2").unwrap(), vec![2]);
        assert!(parse_range("0").is_err());
        assert!(parse_range("5..2").is_err());
        assert!(parse_range("x").is_err());
    }

    #[test]
    fn unknown_key_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.cfg");
        std::fs::write(&p, "prec = 96\nwidth = 8\n").unwrap();
        let err = read_config_file(&p).unwrap_err();
        assert!(err.to_string().contains("width"));
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.cfg");
        std::fs::write(&p, "prec = 96\nvmax=12\nformat=json\nmass_target = 1e-18\n").unwrap();
        let flags = Flags {
            prec: Some(160),
            config: Some(p),
            ..Flags::default()
        };
        let d = Defaults { ell: 1, l_max: 5, n_max: 30 };
        let c = RunConfig::resolve("eigen", &flags, d).unwrap();
        assert_eq!(c.precision_bits, 160);
        assert_eq!(c.v_max, 12);
        assert_eq!(c.format, Format::Json);
        assert_eq!(c.mass_target, 1e-18);
        assert_eq!(c.n_max, 30);
    }
}
