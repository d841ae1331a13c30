//! Exact arithmetic in real quadratic fields Q(sqrt d).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::bigfloat::BigFloat;
use crate::error::{Error, Result};

/// `a + b*sqrt(d)` with `d` square-free.
///
/// Canonical form: when `b == 0` the tag is `d == 1`, so rationals mix freely
/// with every field and equality is plain componentwise equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuadraticNumber {
    a: BigRational,
    b: BigRational,
    d: u64,
}

/// Split `d = s^2 * r` with `r` square-free.
fn square_free_part(d: u64) -> (u64, u64) {
    let mut r = d;
    let mut s = 1u64;
    let mut f = 2u64;
    while f * f <= r {
        while r % (f * f) == 0 {
            r /= f * f;
            s *= f;
        }
        f += 1;
    }
    (s, r)
}

impl QuadraticNumber {
    /// `a + b*sqrt(d)` for any `d >= 1`; square factors of `d` move into `b`.
    pub fn new(a: BigRational, b: BigRational, d: u64) -> Self {
        assert!(d >= 1, "quadratic field tag must be positive");
        let (s, r) = square_free_part(d);
        let b = b * BigRational::from_integer(BigInt::from(s));
        if r == 1 {
            QuadraticNumber::rational(a + b)
        } else if b.is_zero() {
            QuadraticNumber::rational(a)
        } else {
            QuadraticNumber { a, b, d: r }
        }
    }

    pub fn rational(a: BigRational) -> Self {
        QuadraticNumber {
            a,
            b: BigRational::zero(),
            d: 1,
        }
    }

    pub fn from_int(v: i64) -> Self {
        Self::rational(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn from_ints(a: i64, b: i64, d: u64) -> Self {
        Self::new(
            BigRational::from_integer(a.into()),
            BigRational::from_integer(b.into()),
            d,
        )
    }

    /// `sqrt(d)` itself.
    pub fn sqrt_of(d: u64) -> Self {
        Self::from_ints(0, 1, d)
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn a(&self) -> &BigRational {
        &self.a
    }

    pub fn b(&self) -> &BigRational {
        &self.b
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    fn common_field(&self, other: &Self) -> Result<u64> {
        match (self.d, other.d) {
            (1, e) | (e, 1) => Ok(e),
            (x, y) if x == y => Ok(x),
            (x, y) => Err(Error::FieldMismatch(x, y)),
        }
    }

    fn field_or_panic(&self, other: &Self) -> u64 {
        self.common_field(other)
            .unwrap_or_else(|e| panic!("quadratic arithmetic: {e}"))
    }

    fn make(a: BigRational, b: BigRational, d: u64) -> Self {
        if b.is_zero() {
            Self::rational(a)
        } else {
            QuadraticNumber { a, b, d }
        }
    }

    pub fn conjugate(&self) -> Self {
        Self::make(self.a.clone(), -self.b.clone(), self.d)
    }

    /// Field norm `a^2 - d b^2`.
    pub fn norm(&self) -> BigRational {
        &self.a * &self.a - &self.b * &self.b * BigRational::from_integer(self.d.into())
    }

    /// Exact sign: -1, 0 or 1 under the embedding with `sqrt(d) > 0`.
    pub fn signum(&self) -> i32 {
        let sa = sign_of(&self.a);
        let sb = sign_of(&self.b);
        if sb == 0 {
            return sa;
        }
        if sa == 0 || sa == sb {
            return sb;
        }
        let a2 = &self.a * &self.a;
        let db2 = &self.b * &self.b * BigRational::from_integer(self.d.into());
        match a2.cmp(&db2) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => 0,
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    pub fn abs(&self) -> Self {
        if self.signum() < 0 {
            -self.clone()
        } else {
            self.clone()
        }
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let n = self.norm();
        Ok(Self::make(&self.a / &n, -(&self.b / &n), self.d))
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        let d = self.common_field(other)?;
        Ok(Self::make(&self.a + &other.a, &self.b + &other.b, d))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        let d = self.common_field(other)?;
        let dd = BigRational::from_integer(d.into());
        let a = &self.a * &other.a + &self.b * &other.b * dd;
        let b = &self.a * &other.b + &self.b * &other.a;
        Ok(Self::make(a, b, d))
    }

    /// Exact comparison; mismatched fields are a domain error.
    pub fn try_cmp(&self, other: &Self) -> Result<Ordering> {
        self.common_field(other)?;
        Ok((self - other).signum().cmp(&0))
    }

    /// Integer power by repeated squaring; negative exponents invert.
    pub fn pow(&self, k: i64) -> Result<Self> {
        let base = if k < 0 { self.inv()? } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = Self::one();
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &sq;
            }
            e >>= 1;
            if e > 0 {
                sq = &sq * &sq;
            }
        }
        Ok(acc)
    }

    pub fn mul_rational(&self, r: &BigRational) -> Self {
        Self::make(&self.a * r, &self.b * r, self.d)
    }

    /// Value at `prec` bits, within 1 ulp.
    ///
    /// Opposite-sign components are evaluated as `norm / (a - b sqrt d)`, which
    /// has no cancellation.
    pub fn to_float(&self, prec: u32) -> BigFloat {
        if self.b.is_zero() {
            return BigFloat::from_rational(&self.a, prec);
        }
        let guard = 24 + (prec / 16);
        let work = prec + guard;
        let root = BigFloat::from_u64(self.d, work)
            .sqrt()
            .expect("d is positive");
        let a = BigFloat::from_rational(&self.a, work);
        let bs = BigFloat::from_rational(&self.b, work).mul_prec(&root, work);
        let same_sign = sign_of(&self.a) * sign_of(&self.b) >= 0;
        let v = if same_sign {
            a.add_prec(&bs, work)
        } else {
            let num = BigFloat::from_rational(&self.norm(), work);
            num.div_prec(&a.sub_prec(&bs, work), work)
        };
        v.with_prec(prec)
    }
}

fn sign_of(r: &BigRational) -> i32 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

/// Exact `phi^k` with `phi = (1 + sqrt 5)/2`, via Fibonacci/Lucas numbers:
/// `phi^k = (L_k + F_k sqrt 5)/2`.
pub fn golden_pow(k: i64) -> QuadraticNumber {
    let m = k.unsigned_abs();
    let (f, f1) = fib_pair(m);
    let lucas = BigInt::from(2) * &f1 - &f;
    let two = BigInt::from(2);
    let (a, b) = if k >= 0 || m % 2 == 0 {
        (lucas, if k >= 0 { f } else { -f })
    } else {
        // phi^-m = (-1)^m (L_m - F_m sqrt5)/2
        (-lucas, f)
    };
    QuadraticNumber::new(BigRational::new(a, two.clone()), BigRational::new(b, two), 5)
}

/// `(F_m, F_{m+1})` by fast doubling.
pub fn fib_pair(m: u64) -> (BigInt, BigInt) {
    if m == 0 {
        return (BigInt::zero(), BigInt::one());
    }
    let (a, b) = fib_pair(m / 2);
    let c = &a * (BigInt::from(2) * &b - &a);
    let d = &a * &a + &b * &b;
    if m.is_even() {
        (c, d)
    } else {
        let e = &c + &d;
        (d, e)
    }
}

/// `phi` as an element of Q(sqrt 5).
pub fn phi() -> QuadraticNumber {
    golden_pow(1)
}

impl fmt::Debug for QuadraticNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for QuadraticNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", self.a)
        } else {
            write!(f, "({}) + ({})*sqrt({})", self.a, self.b, self.d)
        }
    }
}

impl PartialOrd for QuadraticNumber {
    /// `None` when the operands live in different fields.
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.try_cmp(other).ok()
    }
}

impl Neg for QuadraticNumber {
    type Output = QuadraticNumber;
    fn neg(self) -> QuadraticNumber {
        QuadraticNumber::make(-self.a, -self.b, self.d)
    }
}

impl Neg for &QuadraticNumber {
    type Output = QuadraticNumber;
    fn neg(self) -> QuadraticNumber {
        -self.clone()
    }
}

impl Add<&QuadraticNumber> for &QuadraticNumber {
    type Output = QuadraticNumber;
    fn add(self, rhs: &QuadraticNumber) -> QuadraticNumber {
        let d = self.field_or_panic(rhs);
        QuadraticNumber::make(&self.a + &rhs.a, &self.b + &rhs.b, d)
    }
}

impl Sub<&QuadraticNumber> for &QuadraticNumber {
    type Output = QuadraticNumber;
    fn sub(self, rhs: &QuadraticNumber) -> QuadraticNumber {
        let d = self.field_or_panic(rhs);
        QuadraticNumber::make(&self.a - &rhs.a, &self.b - &rhs.b, d)
    }
}

impl Mul<&QuadraticNumber> for &QuadraticNumber {
    type Output = QuadraticNumber;
    fn mul(self, rhs: &QuadraticNumber) -> QuadraticNumber {
        self.field_or_panic(rhs);
        self.try_mul(rhs).expect("fields checked")
    }
}

impl Div<&QuadraticNumber> for &QuadraticNumber {
    type Output = QuadraticNumber;
    fn div(self, rhs: &QuadraticNumber) -> QuadraticNumber {
        self.field_or_panic(rhs);
        self * &rhs.inv().expect("quadratic division by zero")
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<QuadraticNumber> for QuadraticNumber {
            type Output = QuadraticNumber;
            fn $m(self, rhs: QuadraticNumber) -> QuadraticNumber {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&QuadraticNumber> for QuadraticNumber {
            type Output = QuadraticNumber;
            fn $m(self, rhs: &QuadraticNumber) -> QuadraticNumber {
                (&self).$m(rhs)
            }
        }
    )*};
}

owned_ops!(Add add, Sub sub, Mul mul, Div div);

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: (i64, i64), b: (i64, i64), d: u64) -> QuadraticNumber {
        QuadraticNumber::new(
            BigRational::new(a.0.into(), a.1.into()),
            BigRational::new(b.0.into(), b.1.into()),
            d,
        )
    }

    #[test]
    fn golden_powers_small() {
        assert_eq!(golden_pow(0), QuadraticNumber::one());
        assert_eq!(golden_pow(2), q((3, 2), (1, 2), 5));
        assert_eq!(golden_pow(-2), q((3, 2), (-1, 2), 5));
        assert_eq!(golden_pow(-1), q((-1, 2), (1, 2), 5));
        assert_eq!(&golden_pow(7) * &golden_pow(-7), QuadraticNumber::one());
    }

    #[test]
    fn golden_identities_compare() {
        let phi = phi();
        let lhs = &phi - &QuadraticNumber::one();
        assert_eq!(lhs.try_cmp(&golden_pow(-1)).unwrap(), Ordering::Equal);
        let s5 = &(&phi * &QuadraticNumber::from_int(2)) - &QuadraticNumber::one();
        assert_eq!(s5, QuadraticNumber::sqrt_of(5));
        assert_eq!(s5.try_cmp(&QuadraticNumber::zero()).unwrap(), Ordering::Greater);
        assert!(golden_pow(-2).is_positive());
    }

    #[test]
    fn mismatched_fields() {
        let x = QuadraticNumber::sqrt_of(2);
        let y = QuadraticNumber::sqrt_of(3);
        assert_eq!(x.try_cmp(&y), Err(Error::FieldMismatch(2, 3)));
        assert_eq!(x.partial_cmp(&y), None);
        assert!(x.try_add(&y).is_err());
        // rationals are compatible with every field
        assert!(x.try_add(&QuadraticNumber::from_int(4)).is_ok());
    }

    #[test]
    fn square_factors_are_absorbed() {
        assert_eq!(QuadraticNumber::sqrt_of(12), q((0, 1), (2, 1), 3));
        assert_eq!(QuadraticNumber::sqrt_of(9), QuadraticNumber::from_int(3));
        assert_eq!(QuadraticNumber::sqrt_of(20).d(), 5);
    }

    #[test]
    fn sign_near_cancellation() {
        // 682/305 is a convergent of sqrt 5 from below
        let x = q((-682, 305), (1, 1), 5);
        assert_eq!(x.signum(), 1);
        let y = q((682, 305), (-1, 1), 5);
        assert_eq!(y.signum(), -1);
    }

    /// Integer bisection for floor(sqrt(5) * 2^k), independent of BigFloat.
    fn isqrt_scaled(n: u64, k: u32) -> BigInt {
        let target = BigInt::from(n) << (2 * k as usize);
        let (mut lo, mut hi) = (BigInt::zero(), BigInt::one() << (k as usize + 3));
        while &hi - &lo > BigInt::one() {
            let mid: BigInt = (&lo + &hi) >> 1;
            if &mid * &mid <= target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    #[test]
    fn to_float_against_bisection() {
        let k = 200u32;
        let root = BigRational::new(isqrt_scaled(5, k), BigInt::one() << k as usize);
        let x = QuadraticNumber::sqrt_of(5).to_float(64);
        assert!((x.to_rational() - &root).abs() <= x.ulp().to_rational());
        assert!(x.to_sci_string(18).starts_with("2.236067977499789"));

        // phi^-2 = 3/2 - sqrt5/2, the cancelling branch
        let y = golden_pow(-2).to_float(64);
        let exact = BigRational::new(3.into(), 2.into()) - root / BigInt::from(2);
        assert!((y.to_rational() - exact).abs() <= y.ulp().to_rational());
        assert!(y.to_sci_string(17).starts_with("3.8196601125010515"));
        assert!(QuadraticNumber::zero().to_float(64).is_zero());
    }

    #[test]
    fn tiny_value_keeps_relative_accuracy() {
        let x = golden_pow(-120);
        let v = x.to_float(128);
        let approx = BigFloat::from_f64(1.618_033_988_749_895_f64, 128).unwrap().powi(-120);
        let rel = ((&v - &approx) / &v).abs().to_f64();
        assert!(rel < 1e-14);
        assert!(v.is_positive());
    }
}
