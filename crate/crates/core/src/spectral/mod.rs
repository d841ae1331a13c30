//! The layered eigenvalue recurrence.
//!
//! For each index `n` the normalized layers satisfy
//!
//! ```text
//! W[v]        = sum_{r<v} sum_i what_i^(v-r-1) K(n, i) W[r]
//! what_j^(v)  = [ (K y)_j - sum_{r=1}^{v} what_j^(v-r) W[r] ] / (1 - (-1)^(n+j) phi^(2n-2j))
//! y           = sum_{r<v} W[r] what^(v-r-1)
//! ```
//!
//! with `W[0] = 1`, `what^(0) = e_n` and `what_n^(v) = 0` for `v >= 1`, and
//! `(-1)^(n+1) lambda_n = phi^(-2n) sum_v W[v]`.
//!
//! The layers decay only like `1/v^2` (with logarithmic corrections), so the
//! reported eigenvalue adds a fitted tail to the partial sum; see [`tail`].

mod exact;
mod gfunc;
mod layers;
pub mod tail;

pub use exact::{exact_two_layers, simplified_layers, ExactLayers};
pub use gfunc::{
    eigenfunction_eval, functional_equation_residual, g_transform, g_transform_exact, GEval,
    GFunction, RationalFunction,
};
pub use layers::{advance_layer, init_layers, LayerState};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{golden_pow, BigFloat};
use tail::{alternating_limit, fit_tail, TailFit};

/// How the `j` window is sized.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WindowPolicy {
    /// Allowed change of any layer, relative to `sum W`, between two
    /// successive window sizes.
    pub mass_deficit: f64,
    /// Hard cap on the window; default `8 (n + V) + 200`.
    pub j_cap: Option<usize>,
    /// Starting window; default `n + 2V + 64`.
    pub size: Option<usize>,
}

impl Default for WindowPolicy {
    fn default() -> Self {
        WindowPolicy {
            mass_deficit: 1e-20,
            j_cap: None,
            size: None,
        }
    }
}

impl WindowPolicy {
    pub fn cap(&self, n: usize, v_max: usize) -> usize {
        self.j_cap.unwrap_or(8 * (n + v_max) + 200)
    }

    fn initial(&self, n: usize, v_max: usize) -> usize {
        self.size.unwrap_or(n + 2 * v_max + 64).max(n + 1)
    }
}

/// Options for [`eigenvalue`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralOptions {
    pub v_max: usize,
    pub window: WindowPolicy,
    pub prec: u32,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions {
            v_max: 32,
            window: WindowPolicy::default(),
            prec: 128,
        }
    }
}

/// One computed eigenvalue.
///
/// `lambda` includes the fitted tail `sum_{v > V} W[v]`; `lambda_partial` is
/// the plain partial sum `(-1)^(n+1) phi^(-2n) sum_{v <= V} W[v]`. All tail
/// quantities are in units of `sum W` (multiply by `phi^(-2n)` for `lambda`).
#[derive(Clone, Debug, Serialize)]
pub struct EigenvalueResult {
    pub n: usize,
    pub lambda: BigFloat,
    pub lambda_partial: BigFloat,
    /// `W[v]`, `v = 0..=V`.
    pub layers: Vec<BigFloat>,
    /// `W[v] phi^(-2n)`.
    pub contributions: Vec<BigFloat>,
    pub v_max: usize,
    pub window: (usize, usize),
    pub precision_bits: u32,
    /// Fitted `sum_{v > V} W[v]`, already included in `lambda`.
    pub tail_model: BigFloat,
    /// Change of the fitted tail between the two highest model orders.
    pub tail_heuristic: BigFloat,
    /// `C / V` from the `C / v^2` envelope fitted on the last layers.
    pub tail_conservative: BigFloat,
    /// Error estimate used downstream; equals `tail_heuristic`.
    pub tail_estimate: BigFloat,
    /// Envelope constant in the form `|W[v]| <= C / (v^2 sqrt n)`.
    pub c_fit: BigFloat,
    pub model_order: usize,
    /// Largest relative mass of `K y` outside the window (diagnostic only).
    pub leak: f64,
    /// Relative change of the layers against the previous, smaller window.
    pub window_change: f64,
    #[serde(skip)]
    tail_fit: TailFit,
}

impl EigenvalueResult {
    /// `(-1)^(n+1)`.
    pub fn sign(&self) -> i32 {
        if self.n % 2 == 1 {
            1
        } else {
            -1
        }
    }

    /// Error estimate on `lambda` itself.
    pub fn lambda_error(&self) -> BigFloat {
        let p = golden_pow(-2 * self.n as i64).to_float(self.precision_bits);
        &self.tail_estimate * &p
    }

    /// Conservative error bound on `lambda`.
    pub fn lambda_error_conservative(&self) -> BigFloat {
        let p = golden_pow(-2 * self.n as i64).to_float(self.precision_bits);
        &self.tail_conservative * &p
    }

    /// `sum_{v <= V} W[v]`.
    pub fn partial_sum(&self) -> BigFloat {
        BigFloat::sum(&self.layers, self.precision_bits)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("serializable")
    }
}

/// Layers plus the result built from them.
#[derive(Clone, Debug)]
pub struct Solution {
    pub state: LayerState,
    pub result: EigenvalueResult,
}

/// Runs the recurrence to `V = opts.v_max`, growing the window by 3/2 until
/// the layers stop moving: `max_v |W[v] - W'[v]| / |sum W| <=
/// opts.window.mass_deficit` between consecutive windows.
///
/// The relative mass of `K y` escaping the window is far more pessimistic
/// (it tracks coefficients at large `j` that barely feed back into `W`), so
/// it is only reported, as `leak`.
pub fn solve(n: usize, opts: &SpectralOptions) -> Result<Solution> {
    if n == 0 {
        return Err(Error::Config("eigenvalue index n must be >= 1".into()));
    }
    if opts.v_max == 0 {
        return Err(Error::Config("v_max must be >= 1".into()));
    }
    let cap = opts.window.cap(n, opts.v_max);
    let mut size = opts.window.initial(n, opts.v_max).min(cap);
    let mut prev: Option<LayerState> = None;
    loop {
        let mut state = LayerState::new(n, size, opts.prec)?;
        for _ in 0..opts.v_max {
            state.advance()?;
        }
        let change = prev.as_ref().map(|p| layer_change(p, &state));
        if let Some(c) = change {
            if c <= opts.window.mass_deficit {
                let result = finish(&state, c)?;
                return Ok(Solution { state, result });
            }
        }
        if size >= cap {
            return Err(Error::Truncation {
                ell: n as u64,
                j_cap: cap as u64,
                achieved: 1.0 - change.unwrap_or(1.0),
            });
        }
        size = (size * 3 / 2).min(cap);
        prev = Some(state);
    }
}

fn layer_change(a: &LayerState, b: &LayerState) -> f64 {
    let w = b.work_prec();
    let total = BigFloat::sum(b.layers(), w).abs();
    let diff = a
        .layers()
        .iter()
        .zip(b.layers())
        .map(|(x, y)| x.sub_prec(y, w).abs())
        .max()
        .unwrap_or_else(|| BigFloat::zero(w));
    if total.is_zero() {
        return diff.to_f64();
    }
    diff.div_prec(&total, w).to_f64()
}

fn finish(state: &LayerState, window_change: f64) -> Result<EigenvalueResult> {
    let n = state.n();
    let prec = state.prec();
    let w = state.work_prec();
    let layers = state.layers();
    let fit = fit_tail(layers, w)?;
    let partial = BigFloat::sum(layers, w);
    let scale = golden_pow(-2 * n as i64).to_float(w);
    let scale = if n % 2 == 1 { scale } else { -scale };
    let total = partial.add_prec(&fit.tail, w);
    let root_n = BigFloat::from_u64(n as u64, w).sqrt()?;
    Ok(EigenvalueResult {
        n,
        lambda: total.mul_prec(&scale, w).with_prec(prec),
        lambda_partial: partial.mul_prec(&scale, w).with_prec(prec),
        contributions: layers.iter().map(|x| x.mul_prec(&scale.abs(), prec)).collect(),
        layers: layers.iter().map(|x| x.with_prec(prec)).collect(),
        v_max: state.v_done(),
        window: state.window(),
        precision_bits: prec,
        tail_model: fit.tail.with_prec(prec),
        tail_heuristic: fit.heuristic.with_prec(prec),
        tail_conservative: fit.conservative.with_prec(prec),
        tail_estimate: fit.heuristic.with_prec(prec),
        c_fit: fit.c_fit.mul_prec(&root_n, prec),
        model_order: fit.order,
        leak: state.leak(),
        window_change,
        tail_fit: fit,
    })
}

/// `lambda_n` from the layer series; see [`EigenvalueResult`].
pub fn eigenvalue(n: usize, opts: &SpectralOptions) -> Result<EigenvalueResult> {
    Ok(solve(n, opts)?.result)
}

/// `lambda_n(omega) = (-1)^(n+1) phi^(-2n) sum_v omega^v W[v]` for
/// `omega` in `[-1, 1]`, from already computed layers.
///
/// `omega = 1` returns `res.lambda`. For `|omega| < 1` the computed layers
/// are summed and the fitted model supplies the geometric tail. At
/// `omega = -1` the alternating series is resolved by repeated averaging of
/// its last partial sums.
pub fn eigenvalue_omega(res: &EigenvalueResult, omega: &BigFloat) -> Result<BigFloat> {
    let prec = res.precision_bits;
    let w = prec + 16;
    let one = BigFloat::one(w);
    if omega.abs() > one {
        return Err(Error::Domain(format!("omega = {omega} outside [-1, 1]")));
    }
    let scale = golden_pow(-2 * res.n as i64).to_float(w);
    let scale = if res.n % 2 == 1 { scale } else { -scale };
    if *omega == one {
        return Ok(res.lambda.clone());
    }
    let sum = if *omega == -one.clone() {
        alternating_limit(&res.layers, w).0
    } else {
        let mut acc = BigFloat::zero(w);
        let mut pw = BigFloat::one(w);
        for x in &res.layers {
            acc = acc.add_prec(&pw.mul_prec(x, w), w);
            pw = pw.mul_prec(omega, w);
        }
        acc.add_prec(&res.tail_fit.weighted_tail(omega, res.v_max as u64, w), w)
    };
    Ok(sum.mul_prec(&scale, w).with_prec(prec))
}
