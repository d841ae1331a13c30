use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kernel::{KernelCache, KernelMatrix};
use crate::numerics::{golden_inverse_powers, BigFloat};

use super::WindowPolicy;

/// Extra bits carried internally by the recurrence.
pub(crate) const LAYER_GUARD: u32 = 32;

/// Layers checked by the divergence diagnostic start here.
const SANITY_HORIZON: usize = 8;

/// Normalized recurrence state for one eigenvalue index `n`.
///
/// `W[v] = phi^(-2nv) V^(v)(n)` and `what[v][j-1] = phi^(-2nv) q_j^(v)(n)`
/// over the window `1 <= j <= size`.
#[derive(Clone, Debug)]
pub struct LayerState {
    n: usize,
    prec: u32,
    size: usize,
    w: Vec<BigFloat>,
    what: Vec<Vec<BigFloat>>,
    kernel: Arc<KernelMatrix>,
    div: Vec<BigFloat>,
    col_deficit: Vec<f64>,
    leak: f64,
}

/// `1 - (-1)^(n+j) phi^(2n-2j)` for `j = 1..=size` (entry `n` unused).
fn divisors(n: usize, size: usize, prec: u32) -> Vec<BigFloat> {
    let powers = golden_inverse_powers(2 * size.max(n), prec);
    let phi_pos = |k: usize| powers[k].recip();
    let one = BigFloat::one(prec);
    (1..=size)
        .map(|j| {
            if j == n {
                return BigFloat::zero(prec);
            }
            let p = if j > n { powers[2 * (j - n)].clone() } else { phi_pos(2 * (n - j)) };
            if (n + j) % 2 == 0 {
                &one - &p
            } else {
                &one + &p
            }
        })
        .collect()
}

impl LayerState {
    /// State with `v_done = 0`: `W = [1]`, `what^(0) = e_n`.
    pub fn new(n: usize, size: usize, prec: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("eigenvalue index n must be >= 1".into()));
        }
        if size < n + 1 {
            return Err(Error::Config(format!(
                "window 1..={size} does not contain j = n = {n} and a neighbour"
            )));
        }
        let w = prec + LAYER_GUARD;
        let kernel = KernelCache::global().at_least(size, w);
        let mut e = vec![BigFloat::zero(w); size];
        e[n - 1] = BigFloat::one(w);
        let col_deficit = (1..=size)
            .map(|l| {
                let wide = w + 64;
                let mut s = BigFloat::zero(wide);
                for j in 1..=size {
                    s = s.add_prec(kernel.get(j, l), wide);
                }
                (BigFloat::one(wide) - s).to_f64().max(0.0)
            })
            .collect();
        let div = divisors(n, size, w);
        // the smallest divisor sits at |j - n| = 1 and is bounded by 1 - phi^-2
        let floor = 1.0 - 1.0 / (1.618_033_988_749_895f64 * 1.618_033_988_749_895) - 1e-12;
        debug_assert!(div
            .iter()
            .enumerate()
            .all(|(i, d)| i + 1 == n || d.abs().to_f64() >= floor));
        Ok(LayerState {
            n,
            prec,
            size,
            w: vec![BigFloat::one(w)],
            what: vec![e],
            kernel,
            div,
            col_deficit,
            leak: 0.0,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn v_done(&self) -> usize {
        self.w.len() - 1
    }

    /// Inclusive window `[j_lo, j_hi]`.
    pub fn window(&self) -> (usize, usize) {
        (1, self.size)
    }

    /// `W[0..=v_done]` at working precision.
    pub fn layers(&self) -> &[BigFloat] {
        &self.w
    }

    /// `what^(v)` as a vector over `j = 1..=size`.
    pub fn what(&self, v: usize) -> &[BigFloat] {
        &self.what[v]
    }

    /// Largest relative mass of `K y` that fell outside the window so far.
    pub fn leak(&self) -> f64 {
        self.leak
    }

    /// Divisor `1 - (-1)^(n+j) phi^(2n-2j)`.
    pub fn divisor(&self, j: usize) -> &BigFloat {
        &self.div[j - 1]
    }

    pub(crate) fn kernel(&self) -> &KernelMatrix {
        &self.kernel
    }

    pub(crate) fn work_prec(&self) -> u32 {
        self.prec + LAYER_GUARD
    }

    /// Computes layer `v_done + 1` in place.
    pub fn advance(&mut self) -> Result<()> {
        let w = self.work_prec();
        let v = self.v_done() + 1;
        let size = self.size;
        // y = sum_{r<v} W[r] what^(v-r-1)
        let ws: Vec<BigFloat> = self.w[..v].to_vec();
        let mut y = Vec::with_capacity(size);
        let mut column = Vec::with_capacity(v);
        for i in 0..size {
            column.clear();
            column.extend((0..v).map(|r| self.what[v - r - 1][i].clone()));
            y.push(BigFloat::dot(&ws, &column, w));
        }
        let mut total = 0f64;
        let mut leak = 0f64;
        for (yi, d) in y.iter().zip(&self.col_deficit) {
            let a = yi.abs().to_f64();
            total += a;
            leak += a * d;
        }
        if total > 0.0 {
            self.leak = self.leak.max(leak / total);
        }
        let ky: Vec<BigFloat> = (1..=size)
            .map(|j| BigFloat::dot(&self.kernel.row(j)[..size], &y, w))
            .collect();
        let wv = ky[self.n - 1].clone();
        self.w.push(wv);
        let mut next = Vec::with_capacity(size);
        let wr: Vec<BigFloat> = self.w[1..=v].to_vec();
        for (j, kyj) in ky.into_iter().enumerate() {
            if j + 1 == self.n {
                next.push(BigFloat::zero(w));
                continue;
            }
            // sum_{r=1}^{v} what_j^(v-r) W[r]
            column.clear();
            column.extend((1..=v).map(|r| self.what[v - r][j].clone()));
            let s = BigFloat::dot(&column, &wr, w);
            next.push(kyj.sub_prec(&s, w).div_prec(&self.div[j], w));
        }
        self.what.push(next);
        self.check_divergence()
    }

    fn check_divergence(&self) -> Result<()> {
        let v = self.v_done();
        if v < 2 * SANITY_HORIZON {
            return Ok(());
        }
        let now = self.w[v].abs();
        let earlier = self.w[v / 2].abs();
        if now >= earlier && !now.is_zero() {
            return Err(Error::Divergence {
                n: self.n as u64,
                detail: format!(
                    "|W[{v}]| = {:.3e} is not below |W[{}]| = {:.3e}; window 1..={} is likely too small",
                    now.to_f64(),
                    v / 2,
                    earlier.to_f64(),
                    self.size
                ),
            });
        }
        Ok(())
    }
}

/// Builds the initial state for eigenvalue index `n` with the policy's
/// starting window.
pub fn init_layers(n: usize, policy: &WindowPolicy, prec: u32) -> Result<LayerState> {
    let size = policy.size.unwrap_or(n + 128);
    if size > policy.cap(n, 0) {
        return Err(Error::Config(format!(
            "initial window {size} exceeds the cap {}",
            policy.cap(n, 0)
        )));
    }
    LayerState::new(n, size, prec)
}

/// Returns the state advanced by one layer.
pub fn advance_layer(mut state: LayerState) -> Result<LayerState> {
    state.advance()?;
    Ok(state)
}
