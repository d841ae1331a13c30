use serde::Serialize;

use crate::numerics::{BigFloat, QuadraticNumber, Rational};

/// Which purely periodic continued fraction a [`FixedPoint`] comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FixedKind {
    /// `xi_l = [0; l, l, l, ...]`.
    Single(u64),
    /// `xi_{i,j} xi_{j,i}` with `xi_{i,j} = [0; i, j, i, j, ...]`.
    PairProduct(u64, u64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FixedPoint {
    pub kind: FixedKind,
    pub value: QuadraticNumber,
}

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// `xi_l = (-l + sqrt(l^2 + 4)) / 2`, the positive root of `x^2 + l x - 1`.
pub fn xi_single(ell: u64) -> FixedPoint {
    assert!(ell >= 1, "continued fraction digits start at 1");
    let l = ell as i64;
    FixedPoint {
        kind: FixedKind::Single(ell),
        value: QuadraticNumber::new(q(-l, 2), q(1, 2), ell * ell + 4),
    }
}

/// `xi_{i,j} = [0; i, j, i, j, ...]`, the positive root of
/// `i x^2 + i j x - j`.
pub fn xi_pair(i: u64, j: u64) -> QuadraticNumber {
    assert!(i >= 1 && j >= 1, "continued fraction digits start at 1");
    let m = i * j;
    let two_i = 2 * i as i64;
    QuadraticNumber::new(q(-(m as i64), two_i), q(1, two_i), m * (m + 4))
}

/// `xi_{i,j} xi_{j,i}`, built from `xi_{j,i} = 1 / (j + xi_{i,j})`.
pub fn xi_pair_product(i: u64, j: u64) -> FixedPoint {
    let a = xi_pair(i, j);
    let b = (&QuadraticNumber::from_int(j as i64) + &a)
        .inv()
        .expect("j + xi > 0");
    FixedPoint {
        kind: FixedKind::PairProduct(i, j),
        value: &a * &b,
    }
}

/// `1 / (xi_l^-2 + 1)`, the `l`-th column sum.
pub fn column_target(ell: u64) -> QuadraticNumber {
    let x = xi_single(ell).value;
    let x2 = &x * &x;
    &x2 / &(&QuadraticNumber::one() + &x2)
}

/// `1 / ((xi_{i,j} xi_{j,i})^-2 - 1)`.
pub fn pair_term(i: u64, j: u64) -> QuadraticNumber {
    let p = xi_pair_product(i, j).value;
    let p2 = &p * &p;
    &p2 / &(&QuadraticNumber::one() - &p2)
}

/// `sum_{i+j=l} 1 / ((xi_{i,j} xi_{j,i})^-2 - 1)`, `l >= 2`. The terms
/// generally live in different quadratic fields, so the sum is rounded.
pub fn pair_target(ell: u64, prec: u32) -> BigFloat {
    assert!(ell >= 2, "pair identities start at l = 2");
    let terms: Vec<BigFloat> = (1..ell).map(|i| pair_term(i, ell - i).to_float(prec + 16)).collect();
    BigFloat::sum(&terms, prec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{golden_pow, phi};

    #[test]
    fn singles() {
        assert_eq!(xi_single(1).value, &phi() - &QuadraticNumber::one());
        assert_eq!(xi_single(2).value, QuadraticNumber::from_ints(-1, 1, 2));
        for l in 1..40u64 {
            let x = xi_single(l).value;
            let lhs = &(&(&x * &x) + &(&x * &QuadraticNumber::from_int(l as i64))) - &QuadraticNumber::one();
            assert!(lhs.is_zero());
            assert!(x.is_positive() && x < QuadraticNumber::one());
            let alt = (&(&x * &x).inv().unwrap() + &QuadraticNumber::one()).inv().unwrap();
            assert_eq!(column_target(l), alt);
        }
        // (5 - sqrt5)/10
        assert_eq!(column_target(1), QuadraticNumber::new(q(1, 2), q(-1, 10), 5));
        assert_eq!(column_target(1), (&golden_pow(2) + &QuadraticNumber::one()).inv().unwrap());
    }

    #[test]
    fn pairs() {
        assert_eq!(xi_pair(1, 2), QuadraticNumber::from_ints(-1, 1, 3));
        assert_eq!(xi_pair(2, 1), QuadraticNumber::new(q(-1, 2), q(1, 2), 3));
        assert_eq!(xi_pair_product(1, 2).value, QuadraticNumber::from_ints(2, -1, 3));
        // 1/(6 + 4 sqrt3) per ordered pair
        let want = QuadraticNumber::from_ints(6, 4, 3).inv().unwrap();
        assert_eq!(pair_term(1, 2), want);
        assert!((&pair_target(3, 128) - &(&want + &want).to_float(128)).abs().to_f64() < 1e-36);
        for i in 1..12u64 {
            assert_eq!(xi_pair(i, i), xi_single(i).value);
            let x = xi_single(i).value;
            assert_eq!(xi_pair_product(i, i).value, &x * &x);
            for j in 1..12u64 {
                let a = xi_pair_product(i, j).value;
                assert_eq!(a, xi_pair_product(j, i).value);
                assert!(a.is_positive() && a < QuadraticNumber::one());
                // x = (j + x) / (ij + ix + 1)
                let x = xi_pair(i, j);
                let (ii, jj) = (QuadraticNumber::from_int(i as i64), QuadraticNumber::from_int(j as i64));
                let rhs = &(&jj + &x) / &(&(&(&ii * &jj) + &(&ii * &x)) + &QuadraticNumber::one());
                assert_eq!(x, rhs);
                // depends on ij only: (m + 2 - sqrt(m(m+4))) / 2
                let m = (i * j) as i64;
                assert_eq!(a, QuadraticNumber::new(q(m + 2, 2), q(-1, 2), (m * (m + 4)) as u64));
            }
        }
        // l = 2: 1/(phi^4 - 1)
        let g = (&golden_pow(4) - &QuadraticNumber::one()).inv().unwrap();
        assert!((&pair_target(2, 128) - &g.to_float(128)).abs().to_f64() < 1e-36);
    }
}
