//! Dense `K(j, l)` blocks in floating point, built from an exact integer
//! recurrence.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;

use crate::numerics::{golden_inverse_powers, BigFloat};

/// `N(j, l)` for `1 <= j, l <= size`, indexed `[j-1][l-1]`.
///
/// For `j <= l` put `a = l - j`, `m = j - 1`. Then `N = 5 Q_m` with
/// `Q_m = 4^m P_m^{(a,1)}(3/2)`, and the Jacobi recurrence scaled by `4^m`
/// stays in the integers:
///
/// ```text
/// D Q_m = A Q_{m-1} - B Q_{m-2}
/// D = 2m (m+a+1)(2m+a-1)
/// A = (2m+a) [6 (2m+a+1)(2m+a-1) + 4(a^2-1)]
/// B = 32 m (m+a-1)(2m+a+1)
/// ```
///
/// The lower triangle follows from the symmetry `l N(j, l) = j N(l, j)`.
pub fn n_coeff_table(size: usize) -> Vec<Vec<BigInt>> {
    let mut t = vec![vec![BigInt::zero(); size]; size];
    for a in 0..size {
        let ai = a as i64;
        let mut prev = BigInt::from(1);
        let mut cur = BigInt::from(5 * ai + 7);
        for j in 1..=(size - a) {
            let m = (j - 1) as i64;
            let q = match m {
                0 => prev.clone(),
                1 => cur.clone(),
                _ => {
                    let s = 2 * m + ai;
                    let d = 2 * m * (m + ai + 1) * (s - 1);
                    let big_a = s * (6 * (s + 1) * (s - 1) + 4 * (ai * ai - 1));
                    let big_b = 32 * m * (m + ai - 1) * (s + 1);
                    let num = &cur * BigInt::from(big_a) - &prev * BigInt::from(big_b);
                    let (q, r) = num.div_rem(&BigInt::from(d));
                    debug_assert!(r.is_zero(), "kernel recurrence left a remainder");
                    prev = std::mem::replace(&mut cur, q.clone());
                    q
                }
            };
            t[j - 1][j - 1 + a] = q * 5;
        }
    }
    for j in 1..=size {
        for ell in 1..j {
            // l N(j,l) = j N(l,j)
            let v = &t[ell - 1][j - 1] * BigInt::from(j) / BigInt::from(ell);
            t[j - 1][ell - 1] = v;
        }
    }
    t
}

/// `K(j, l)` for `1 <= j, l <= size` at a fixed precision, plus the mass of
/// each column that falls outside the block.
#[derive(Debug)]
pub struct KernelMatrix {
    size: usize,
    prec: u32,
    data: Vec<BigFloat>,
    col_deficit: Vec<f64>,
}

impl KernelMatrix {
    pub fn build(size: usize, prec: u32) -> Self {
        let n = n_coeff_table(size);
        let work = prec + 16;
        let phis = golden_inverse_powers(2 * size + 2, work);
        let mut data = Vec::with_capacity(size * size);
        for j in 1..=size {
            for ell in 1..=size {
                let s = j + ell;
                let v = BigFloat::from_bigint(&n[j - 1][ell - 1], work)
                    .mul_prec(&phis[s], work)
                    .mul_pow2(-(s as i64));
                data.push(v.with_prec(prec));
            }
        }
        let wide = prec + 64;
        let col_deficit = (0..size)
            .map(|l| {
                let mut s = BigFloat::zero(wide);
                for j in 0..size {
                    s = s.add_prec(&data[j * size + l], wide);
                }
                (BigFloat::one(wide) - s).to_f64().max(0.0)
            })
            .collect();
        KernelMatrix {
            size,
            prec,
            data,
            col_deficit,
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    /// `K(j, l)`, 1-based.
    pub fn get(&self, j: usize, ell: usize) -> &BigFloat {
        &self.data[(j - 1) * self.size + (ell - 1)]
    }

    /// Row `K(j, 1..=size)`.
    pub fn row(&self, j: usize) -> &[BigFloat] {
        &self.data[(j - 1) * self.size..j * self.size]
    }

    /// `1 - sum_{j <= size} K(j, l)`: column mass beyond the block.
    pub fn column_deficit(&self, ell: usize) -> f64 {
        self.col_deficit[ell - 1]
    }
}

/// Insert-only cache of kernel blocks keyed by precision. Concurrent callers
/// may build the same block twice; either copy is kept.
#[derive(Default)]
pub struct KernelCache {
    map: RwLock<HashMap<u32, Arc<KernelMatrix>>>,
}

impl KernelCache {
    pub fn global() -> &'static KernelCache {
        static CACHE: OnceLock<KernelCache> = OnceLock::new();
        CACHE.get_or_init(KernelCache::default)
    }

    /// A block of at least `size` at exactly `prec` bits. Growth is
    /// geometric so that slowly increasing requests rebuild rarely.
    pub fn at_least(&self, size: usize, prec: u32) -> Arc<KernelMatrix> {
        let mut target = size;
        if let Some(m) = self.map.read().expect("cache lock").get(&prec) {
            if m.size() >= size {
                return m.clone();
            }
            target = size.max(m.size() * 3 / 2);
        }
        let built = Arc::new(KernelMatrix::build(target, prec));
        let mut w = self.map.write().expect("cache lock");
        let entry = w.entry(prec).or_insert_with(|| built.clone());
        if entry.size() < size {
            *entry = built.clone();
        }
        entry.clone()
    }
}
