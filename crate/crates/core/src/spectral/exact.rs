//! Exact low layers and the simplified recursion.

use crate::error::{Error, Result};
use crate::kernel::k_coeff;
use crate::numerics::{golden_pow, BigFloat, QuadraticNumber};

use super::layers::LayerState;

/// `W[1]`, `W[2]` and `what^(1)`, `what^(2)` computed in `Q(sqrt5)` over the
/// window `1..=size`.
#[derive(Clone, Debug)]
pub struct ExactLayers {
    pub n: usize,
    pub size: usize,
    pub w1: QuadraticNumber,
    pub w2: QuadraticNumber,
    pub what1: Vec<QuadraticNumber>,
    pub what2: Vec<QuadraticNumber>,
}

fn divisor(n: usize, j: usize) -> QuadraticNumber {
    let p = golden_pow(2 * n as i64 - 2 * j as i64);
    if (n + j) % 2 == 0 {
        &QuadraticNumber::one() - &p
    } else {
        &QuadraticNumber::one() + &p
    }
}

/// Runs the recurrence for `v = 1, 2` exactly. Meant for small windows: the
/// kernel block costs `size^2` exact coefficients.
pub fn exact_two_layers(n: usize, size: usize) -> Result<ExactLayers> {
    if n == 0 || size <= n {
        return Err(Error::Config(format!(
            "window 1..={size} must contain n = {n} and a neighbour"
        )));
    }
    let k: Vec<Vec<QuadraticNumber>> = (1..=size as u64)
        .map(|j| (1..=size as u64).map(|l| k_coeff(j, l)).collect())
        .collect();
    let div: Vec<QuadraticNumber> = (1..=size).map(|j| divisor(n, j)).collect();
    let i = n - 1;
    let w1 = k[i][i].clone();
    let what1: Vec<QuadraticNumber> = (0..size)
        .map(|j| {
            if j == i {
                QuadraticNumber::zero()
            } else {
                &k[j][i] / &div[j]
            }
        })
        .collect();
    // y = W[0] what^(1) + W[1] what^(0)
    let mut y = what1.clone();
    y[i] = w1.clone();
    let ky: Vec<QuadraticNumber> = k
        .iter()
        .map(|row| {
            row.iter()
                .zip(&y)
                .fold(QuadraticNumber::zero(), |acc, (a, b)| &acc + &(a * b))
        })
        .collect();
    let w2 = ky[i].clone();
    let what2 = (0..size)
        .map(|j| {
            if j == i {
                QuadraticNumber::zero()
            } else {
                &(&ky[j] - &(&what1[j] * &w1)) / &div[j]
            }
        })
        .collect();
    Ok(ExactLayers {
        n,
        size,
        w1,
        w2,
        what1,
        what2,
    })
}

/// Layers of the simplified recursion, which keeps only the terms of size
/// `1/sqrt n`:
///
/// ```text
/// W~[v]   = sum_i s_i^(v-1) K(n, i)              (v >= 2)
/// s_j^(v) = sum_{i != n} s_i^(v-1) K(j, i) / div_j   (j != n)
/// ```
///
/// seeded with the exact `W[0..=1]` and `s^(1) = what^(1)`. The window and
/// kernel are taken from `state`.
pub fn simplified_layers(state: &LayerState, v_max: usize) -> Vec<BigFloat> {
    let w = state.work_prec();
    let n = state.n();
    let (_, size) = state.window();
    let kernel = state.kernel();
    let mut out = vec![BigFloat::one(w), kernel.get(n, n).clone()];
    let mut s: Vec<BigFloat> = (1..=size)
        .map(|j| {
            if j == n {
                BigFloat::zero(w)
            } else {
                kernel.get(j, n).div_prec(state.divisor(j), w)
            }
        })
        .collect();
    for _ in 2..=v_max {
        let ks: Vec<BigFloat> = (1..=size)
            .map(|j| BigFloat::dot(&kernel.row(j)[..size], &s, w))
            .collect();
        out.push(ks[n - 1].clone());
        s = ks
            .into_iter()
            .enumerate()
            .map(|(j, x)| {
                if j + 1 == n {
                    BigFloat::zero(w)
                } else {
                    x.div_prec(state.divisor(j + 1), w)
                }
            })
            .collect();
    }
    out.truncate(v_max + 1);
    out
}
