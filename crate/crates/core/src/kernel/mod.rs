//! The g-coefficient kernel `K(j, l)`.
//!
//! `K(j, l)` is the j-th g-coefficient of the shifted basis function
//! `e_l(z + 1)`. Expanding the residue at `w = 3/2` gives
//!
//! ```text
//! K(j, l) = phi^-(j+l) * N(j, l) / 2^(j+l)
//! N(j, l) = sum_a C(l-1, a) C(j, a+1) 5^(a+1),   0 <= a <= min(l, j) - 1
//! ```
//!
//! with `N` a positive integer. Every column sums to one: `sum_j K(j, l) = 1`.

mod jacobi;
mod matrix;

pub use jacobi::{jacobi_eval, jacobi_value, JacobiValue};
pub use matrix::{n_coeff_table, KernelCache, KernelMatrix};

use std::io::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::numerics::{binomial, golden_pow, BigFloat, QuadraticNumber, Rational};

/// Integer part `N(j, l)` of the kernel.
pub fn n_coeff(j: u64, ell: u64) -> BigInt {
    assert!(j >= 1 && ell >= 1, "kernel indices start at 1");
    let top = (ell - 1).min(j - 1);
    let mut acc = BigInt::zero();
    let mut five = BigInt::from(5);
    for a in 0..=top {
        acc += binomial(ell - 1, a) * binomial(j, a + 1) * &five;
        five *= 5;
    }
    acc
}

/// Exact `K(j, l)` in Q(sqrt 5).
pub fn k_coeff(j: u64, ell: u64) -> QuadraticNumber {
    let scale = BigRational::new(n_coeff(j, ell), BigInt::one() << (j + ell) as usize);
    golden_pow(-((j + ell) as i64)).mul_rational(&scale)
}

/// `K(l, l) * sqrt(l)`; tends to `5^(1/4) / (2 sqrt(pi))`.
pub fn diagonal_scaled(ell: u64, prec: u32) -> BigFloat {
    let k = k_coeff(ell, ell).to_float(prec + 16);
    let root = BigFloat::from_u64(ell, prec + 16).sqrt().expect("positive");
    (k * root).with_prec(prec)
}

/// `5^(1/4) / (2 sqrt(pi))`.
pub fn diagonal_limit(prec: u32) -> BigFloat {
    let w = prec + 16;
    let five = BigFloat::from_i64(5, w).sqrt().unwrap().sqrt().unwrap();
    let pi = BigFloat::pi(w).sqrt().unwrap();
    (five / pi.mul_pow2(1)).with_prec(prec)
}

/// A window of one kernel column `K(., l)` with a certified tail.
#[derive(Clone, Debug)]
pub struct KernelTable {
    pub ell: u64,
    pub j_lo: u64,
    pub j_hi: u64,
    /// `values[i] = K(j_lo + i, l)`.
    pub values: Vec<QuadraticNumber>,
    /// Exact captured mass `sum_window K(j, l)`.
    pub mass: QuadraticNumber,
    /// Upper bound on `1 - mass`.
    pub tail_mass_bound: BigFloat,
}

impl KernelTable {
    pub fn get(&self, j: u64) -> Option<&QuadraticNumber> {
        if j < self.j_lo || j > self.j_hi {
            None
        } else {
            self.values.get((j - self.j_lo) as usize)
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &QuadraticNumber)> {
        (self.j_lo..).zip(self.values.iter())
    }

    /// Writes `j,K_a,K_b,K_float` rows, `K = K_a + K_b sqrt 5`.
    pub fn write_csv<W: Write>(&self, mut out: W, prec: u32) -> std::io::Result<()> {
        writeln!(out, "j,K_a,K_b,K_float")?;
        for (j, k) in self.iter() {
            writeln!(out, "{},{},{},{}", j, k.a(), k.b(), k.to_float(prec))?;
        }
        Ok(())
    }
}

/// Default hard cap on the window's upper end.
pub fn default_j_cap(ell: u64) -> u64 {
    8 * ell + 200
}

/// Smallest window around `j = l` whose exact mass reaches `mass_target`.
///
/// The window grows one index at a time on whichever side currently holds the
/// larger term; since every column sums to one, the captured mass is a
/// certified lower bound and `1 - mass` an exact tail.
pub fn k_window(ell: u64, mass_target: &BigFloat, j_cap: Option<u64>) -> Result<KernelTable> {
    if ell == 0 {
        return Err(Error::Domain("kernel index l must be >= 1".into()));
    }
    let target = mass_target.to_rational();
    if target <= Rational::zero() || target >= Rational::one() {
        return Err(Error::Domain(format!(
            "mass target must lie in (0, 1), got {mass_target}"
        )));
    }
    let cap = j_cap.unwrap_or_else(|| default_j_cap(ell));
    let target = QuadraticNumber::rational(target);
    let (mut lo, mut hi) = (ell, ell);
    let mut values = std::collections::VecDeque::from([k_coeff(ell, ell)]);
    let mut mass = values[0].clone();
    let mut below = (lo > 1).then(|| k_coeff(lo - 1, ell));
    let mut above = k_coeff(hi + 1, ell);
    while mass.try_cmp(&target)?.is_lt() {
        let take_below = match &below {
            Some(b) => b.try_cmp(&above)?.is_ge(),
            None => false,
        };
        if take_below {
            let b = below.take().expect("checked");
            mass = &mass + &b;
            values.push_front(b);
            lo -= 1;
            below = (lo > 1).then(|| k_coeff(lo - 1, ell));
        } else {
            if hi + 1 > cap {
                return Err(Error::Truncation {
                    ell,
                    j_cap: cap,
                    achieved: mass.to_float(64).to_f64(),
                });
            }
            mass = &mass + &above;
            values.push_back(above);
            hi += 1;
            above = k_coeff(hi + 1, ell);
        }
    }
    let deficit = (&QuadraticNumber::one() - &mass).to_float(64);
    let tail_mass_bound = &deficit + &deficit.ulp();
    Ok(KernelTable {
        ell,
        j_lo: lo,
        j_hi: hi,
        values: values.into(),
        mass,
        tail_mass_bound,
    })
}

/// Outcome of the exact symmetry check and the column-mass check.
#[derive(Clone, Debug)]
pub struct KernelCheck {
    pub l_max: u64,
    /// Pairs `(j, l)` with `l K(j, l) != j K(l, j)`; empty when all hold.
    pub asymmetric: Vec<(u64, u64)>,
    /// `(l, J, 1 - sum_{j <= J} K(j, l))` for each column.
    pub deficits: Vec<(u64, u64, f64)>,
}

impl KernelCheck {
    pub fn max_deficit(&self) -> f64 {
        self.deficits.iter().map(|d| d.2).fold(0.0, f64::max)
    }
}

/// Checks `l K(j, l) = j K(l, j)` exactly for `j, l <= l_max` and that each
/// column `l <= l_max` reaches mass `1 - deficit` inside an automatic window.
pub fn check_identities(l_max: u64, deficit: f64, j_cap: Option<u64>) -> Result<KernelCheck> {
    let mut asymmetric = Vec::new();
    for j in 1..=l_max {
        for ell in j + 1..=l_max {
            let lhs = k_coeff(j, ell).mul_rational(&Rational::from_integer(ell.into()));
            let rhs = k_coeff(ell, j).mul_rational(&Rational::from_integer(j.into()));
            if lhs != rhs {
                asymmetric.push((j, ell));
            }
        }
    }
    let target = BigFloat::one(128) - BigFloat::from_f64(deficit, 128)?;
    let deficits = (1..=l_max)
        .map(|ell| {
            let t = k_window(ell, &target, j_cap.map(|c| c.max(ell)))?;
            let d = (&QuadraticNumber::one() - &t.mass).to_float(64).to_f64();
            Ok((ell, t.j_hi, d))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(KernelCheck {
        l_max,
        asymmetric,
        deficits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identities_hold_on_small_block() {
        let c = check_identities(12, 1e-20, None).unwrap();
        assert!(c.asymmetric.is_empty());
        assert_eq!(c.deficits.len(), 12);
        assert!(c.max_deficit() < 1e-20 && c.max_deficit() >= 0.0);
    }

    #[test]
    fn k11_closed_form() {
        let expect = QuadraticNumber::new(
            Rational::new(15.into(), 8.into()),
            Rational::new((-5).into(), 8.into()),
            5,
        );
        assert_eq!(k_coeff(1, 1), expect);
        assert!((k_coeff(1, 1).to_float(64).to_f64() - 0.477457).abs() < 1e-6);
    }

    #[test]
    fn first_column_residue_oracle() {
        // residue of (w+1)^j/(w-3/2)^j: C(j, j-1) (5/2)
        for j in 1..=10u64 {
            let scale = Rational::new(BigInt::from(5 * j), BigInt::from(2))
                / Rational::from_integer(BigInt::one() << j as usize);
            let expect = golden_pow(-1 - j as i64).mul_rational(&scale);
            assert_eq!(k_coeff(j, 1), expect);
        }
    }

    /// Residue-form expansion `[t^(j-1)] (t+1/2)^(l-1) (t+5/2)^j`, independent
    /// of the closed binomial sum above.
    fn residue_form(j: u64, ell: u64) -> QuadraticNumber {
        let h = Rational::new(1.into(), 2.into());
        let f = Rational::new(5.into(), 2.into());
        let mut coeff = Rational::zero();
        for k in 0..=(j - 1) {
            // t^k from the first factor, t^(j-1-k) from the second
            if k > ell - 1 || j - 1 - k > j {
                continue;
            }
            let c1 = Rational::from_integer(binomial(ell - 1, k)) * num_traits::pow(h.clone(), (ell - 1 - k) as usize);
            let c2 = Rational::from_integer(binomial(j, j - 1 - k)) * num_traits::pow(f.clone(), (k + 1) as usize);
            coeff += c1 * c2;
        }
        let scale = coeff / Rational::from_integer(BigInt::one() << j as usize);
        golden_pow(-((j + ell) as i64)).mul_rational(&scale)
    }

    #[test]
    fn residue_form_matches() {
        for j in 1..=15 {
            for ell in 1..=15 {
                assert_eq!(k_coeff(j, ell), residue_form(j, ell), "j={j} l={ell}");
            }
        }
    }

    #[test]
    fn symmetry_small() {
        let lhs = k_coeff(2, 1);
        let rhs = &k_coeff(1, 2) * &QuadraticNumber::from_int(2);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn diagonal_matches_jacobi() {
        let x = Rational::new(3.into(), 2.into());
        for n in 1..=40u64 {
            let p = jacobi_eval(n - 1, 0, 1, &x);
            let expect = golden_pow(-2 * n as i64)
                .mul_rational(&(Rational::new(5.into(), 4.into()) * p));
            assert_eq!(k_coeff(n, n), expect);
        }
    }

    #[test]
    fn jacobi_form_off_diagonal() {
        // K(j,l) = 5 * 2^(j-l-2) phi^-(l+j) P_{j-1}^{(l-j,1)}(3/2), any sign of l-j
        let x = Rational::new(3.into(), 2.into());
        for j in 1..=12u64 {
            for ell in 1..=12u64 {
                let p = jacobi_eval(j - 1, ell as i64 - j as i64, 1, &x);
                let e = j as i64 - ell as i64 - 2;
                let pow2 = if e >= 0 {
                    Rational::from_integer(BigInt::one() << e as usize)
                } else {
                    Rational::new(BigInt::one(), BigInt::one() << (-e) as usize)
                };
                let expect = golden_pow(-((j + ell) as i64))
                    .mul_rational(&(Rational::from_integer(5.into()) * pow2 * p));
                assert_eq!(k_coeff(j, ell), expect, "j={j} l={ell}");
            }
        }
    }

    #[test]
    fn window_first_column() {
        let target = BigFloat::one(128) - BigFloat::one(128).mul_pow2(-100);
        let t = k_window(1, &target, None).unwrap();
        assert_eq!(t.j_lo, 1);
        assert!(t.mass.try_cmp(&QuadraticNumber::one()).unwrap().is_lt());
        // geometric tail oracle: sum_{j>J} (5j/2)(2 phi)^-j phi^-1
        let r: f64 = 1.0 / (2.0 * 1.618033988749895);
        let jh = t.j_hi as f64;
        let tail = (5.0 / 2.0) / 1.618033988749895
            * (r.powf(jh + 1.0) * ((jh + 1.0) - jh * r) / (1.0 - r).powi(2));
        let deficit = t.tail_mass_bound.to_f64();
        assert!((deficit - tail).abs() <= 1e-6 * tail, "{deficit} vs {tail}");
    }

    #[test]
    fn window_peaks_on_diagonal() {
        let target = BigFloat::parse_decimal("0.999", 64).unwrap();
        let t = k_window(5, &target, None).unwrap();
        assert!(t.j_lo < 5 && t.j_hi > 5);
        let peak = t.get(5).unwrap();
        for (_, k) in t.iter() {
            assert!(k.try_cmp(peak).unwrap().is_le());
            assert!(k.is_positive());
        }
        // brute-force scan: K(5,5) is the column maximum
        for j in 1..=200 {
            assert!(k_coeff(j, 5).try_cmp(peak).unwrap().is_le());
        }
    }

    #[test]
    fn window_cap_reports_mass() {
        let target = BigFloat::one(128) - BigFloat::one(128).mul_pow2(-100);
        match k_window(10, &target, Some(15)) {
            Err(Error::Truncation { achieved, .. }) => assert!(achieved > 0.5 && achieved < 1.0),
            other => panic!("expected truncation, got {other:?}"),
        }
        assert!(k_window(3, &BigFloat::one(64), None).is_err());
    }

    #[test]
    fn csv_dump() {
        let target = BigFloat::parse_decimal("0.9", 64).unwrap();
        let t = k_window(2, &target, None).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf, 64).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("j,K_a,K_b,K_float\n"));
        assert_eq!(s.lines().count(), t.values.len() + 1);
    }
}
