//! Arbitrary-precision binary floating point.
//!
//! A nonzero value is `mant * 2^exp` with `|mant|` holding exactly `prec`
//! significant bits. Every value carries its own precision; binary operations
//! round to the larger of the two operand precisions. There is no global
//! precision or rounding mode.
//!
//! Rounding: `+ - * /`, `sqrt` and conversions from integers and rationals are
//! correctly rounded (nearest, ties to even). Composite operations (`powi`,
//! `ln`, `pi`, `dot`) are evaluated with guard bits and are faithful: the
//! result is within one ulp of the exact value.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

/// Smallest precision accepted by constructors.
pub const MIN_PRECISION: u32 = 16;

const GUARD_BITS: u32 = 32;

#[derive(Clone)]
pub struct BigFloat {
    mant: BigInt,
    exp: i64,
    prec: u32,
}

fn bit_len(x: &BigInt) -> u64 {
    x.bits()
}

impl BigFloat {
    pub fn zero(prec: u32) -> Self {
        BigFloat {
            mant: BigInt::zero(),
            exp: 0,
            prec: prec.max(MIN_PRECISION),
        }
    }

    pub fn one(prec: u32) -> Self {
        Self::from_i64(1, prec)
    }

    /// Round `mant * 2^exp` to `prec` bits. `sticky` flags nonzero bits below
    /// `mant` that were already discarded by the caller.
    fn round_from(mant: BigInt, exp: i64, prec: u32, sticky: bool) -> Self {
        let prec = prec.max(MIN_PRECISION);
        if mant.is_zero() {
            return BigFloat::zero(prec);
        }
        let negative = mant.sign() == Sign::Minus;
        let mag = mant.magnitude().clone();
        let bits = mag.bits();
        let p = prec as u64;
        let (mag, exp) = if bits > p {
            let shift = bits - p;
            let mut q: BigUint = &mag >> shift;
            let half_bit = mag.bit(shift - 1);
            let below_half = if shift >= 2 {
                let mask = (BigUint::one() << (shift - 1)) - BigUint::one();
                !(&mag & &mask).is_zero()
            } else {
                false
            };
            let mut e = exp + shift as i64;
            if half_bit && (below_half || sticky || q.bit(0)) {
                q += 1u32;
                if q.bits() > p {
                    q >>= 1;
                    e += 1;
                }
            }
            (q, e)
        } else {
            let shift = p - bits;
            (mag << shift, exp - shift as i64)
        };
        let sign = if negative { Sign::Minus } else { Sign::Plus };
        BigFloat {
            mant: BigInt::from_biguint(sign, mag),
            exp,
            prec,
        }
    }

    pub fn from_bigint(v: &BigInt, prec: u32) -> Self {
        Self::round_from(v.clone(), 0, prec, false)
    }

    pub fn from_i64(v: i64, prec: u32) -> Self {
        Self::round_from(BigInt::from(v), 0, prec, false)
    }

    pub fn from_u64(v: u64, prec: u32) -> Self {
        Self::round_from(BigInt::from(v), 0, prec, false)
    }

    /// Exact conversion of a finite `f64` (rounded only if `prec < 53`).
    pub fn from_f64(v: f64, prec: u32) -> Result<Self, Error> {
        if !v.is_finite() {
            return Err(Error::NonFinite);
        }
        if v == 0.0 {
            return Ok(BigFloat::zero(prec));
        }
        let bits = v.to_bits();
        let sign = bits >> 63;
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if biased == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), biased - 1075)
        };
        let mut mant = BigInt::from(m);
        if sign == 1 {
            mant = -mant;
        }
        Ok(Self::round_from(mant, e, prec, false))
    }

    /// Correctly rounded quotient `num / den`.
    pub fn from_ratio(num: &BigInt, den: &BigInt, prec: u32) -> Self {
        assert!(!den.is_zero(), "division by zero in BigFloat::from_ratio");
        if num.is_zero() {
            return BigFloat::zero(prec);
        }
        let p = prec.max(MIN_PRECISION) as i64;
        let shift = (p + 2 + bit_len(den) as i64 - bit_len(num) as i64 + 1).max(0);
        let scaled = num << (shift as usize);
        let (q, r) = scaled.div_rem(den);
        Self::round_from(q, -shift, prec, !r.is_zero())
    }

    pub fn from_rational(r: &BigRational, prec: u32) -> Self {
        Self::from_ratio(r.numer(), r.denom(), prec)
    }

    /// Parse a decimal literal such as `-1.25e-20`, correctly rounded.
    pub fn parse_decimal(s: &str, prec: u32) -> Result<Self, Error> {
        let r = parse_decimal_rational(s)?;
        Ok(Self::from_rational(&r, prec))
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.sign() == Sign::Minus
    }

    pub fn is_positive(&self) -> bool {
        self.mant.sign() == Sign::Plus
    }

    pub fn signum(&self) -> i32 {
        match self.mant.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    /// Binary exponent of the leading bit: `2^e <= |x| < 2^(e+1)`.
    pub fn exponent(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.exp + bit_len(&self.mant) as i64 - 1)
        }
    }

    /// Unit in the last place at this value's own precision.
    pub fn ulp(&self) -> BigFloat {
        if self.is_zero() {
            return BigFloat::zero(self.prec);
        }
        BigFloat {
            mant: BigInt::one() << (self.prec as usize - 1),
            exp: self.exp - (self.prec as i64 - 1),
            prec: self.prec,
        }
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        Self::round_from(self.mant.clone(), self.exp, prec, false)
    }

    pub fn abs(&self) -> Self {
        BigFloat {
            mant: self.mant.abs(),
            exp: self.exp,
            prec: self.prec,
        }
    }

    /// Exact multiplication by `2^k`.
    pub fn mul_pow2(&self, k: i64) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        BigFloat {
            mant: self.mant.clone(),
            exp: self.exp + k,
            prec: self.prec,
        }
    }

    /// Exact value as a dyadic rational.
    pub fn to_rational(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.mant << (self.exp as usize))
        } else {
            BigRational::new(self.mant.clone(), BigInt::one() << ((-self.exp) as usize))
        }
    }

    /// Nearest `f64` (saturating to infinity / zero outside its range).
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let r = Self::round_from(self.mant.clone(), self.exp, 53, false);
        let m = r.mant.to_i64().expect("53-bit mantissa fits i64") as f64;
        let mut e = r.exp;
        let mut v = m;
        while e > 0 {
            let step = e.min(512);
            v *= 2f64.powi(step as i32);
            e -= step;
        }
        while e < 0 {
            let step = (-e).min(512);
            v /= 2f64.powi(step as i32);
            e += step;
        }
        v
    }

    /// Integer part rounded toward zero.
    pub fn trunc_to_bigint(&self) -> BigInt {
        if self.exp >= 0 {
            &self.mant << (self.exp as usize)
        } else {
            let shift = (-self.exp) as u64;
            if shift >= bit_len(&self.mant) {
                return BigInt::zero();
            }
            let mag = self.mant.magnitude() >> shift;
            BigInt::from_biguint(self.mant.sign(), mag)
        }
    }

    fn add_impl(&self, other: &BigFloat, prec: u32) -> BigFloat {
        if self.is_zero() {
            return other.with_prec(prec);
        }
        if other.is_zero() {
            return self.with_prec(prec);
        }
        let top_a = self.exp + bit_len(&self.mant) as i64;
        let top_b = other.exp + bit_len(&other.mant) as i64;
        let (big, small, top_big, top_small) = if top_a >= top_b {
            (self, other, top_a, top_b)
        } else {
            (other, self, top_b, top_a)
        };
        // A far smaller addend only acts as a signed sticky bit; replace it by
        // one bit just below every rounding boundary to avoid huge shifts.
        let floor = big.exp.min(top_big - prec as i64);
        if top_small < floor - 2 {
            let e = floor - 3;
            let a = &big.mant << ((big.exp - e) as usize);
            let s = if small.is_negative() { -1 } else { 1 };
            return Self::round_from(a + BigInt::from(s), e, prec, false);
        }
        let e = self.exp.min(other.exp);
        let a = &self.mant << ((self.exp - e) as usize);
        let b = &other.mant << ((other.exp - e) as usize);
        Self::round_from(a + b, e, prec, false)
    }

    fn mul_impl(&self, other: &BigFloat, prec: u32) -> BigFloat {
        if self.is_zero() || other.is_zero() {
            return BigFloat::zero(prec);
        }
        Self::round_from(&self.mant * &other.mant, self.exp + other.exp, prec, false)
    }

    fn div_impl(&self, other: &BigFloat, prec: u32) -> BigFloat {
        assert!(!other.is_zero(), "BigFloat division by zero");
        if self.is_zero() {
            return BigFloat::zero(prec);
        }
        let p = prec.max(MIN_PRECISION) as i64;
        let shift =
            (p + 3 + bit_len(&other.mant) as i64 - bit_len(&self.mant) as i64).max(0) as usize;
        let num = &self.mant << shift;
        let (q, r) = num.div_rem(&other.mant);
        Self::round_from(q, self.exp - other.exp - shift as i64, prec, !r.is_zero())
    }

    pub fn add_prec(&self, other: &BigFloat, prec: u32) -> BigFloat {
        self.add_impl(other, prec)
    }

    pub fn sub_prec(&self, other: &BigFloat, prec: u32) -> BigFloat {
        self.add_impl(&-other, prec)
    }

    pub fn mul_prec(&self, other: &BigFloat, prec: u32) -> BigFloat {
        self.mul_impl(other, prec)
    }

    pub fn div_prec(&self, other: &BigFloat, prec: u32) -> BigFloat {
        self.div_impl(other, prec)
    }

    pub fn checked_div(&self, other: &BigFloat) -> Result<BigFloat, Error> {
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self.div_impl(other, self.prec.max(other.prec)))
    }

    pub fn mul_i64(&self, k: i64) -> BigFloat {
        if self.is_zero() || k == 0 {
            return BigFloat::zero(self.prec);
        }
        Self::round_from(&self.mant * BigInt::from(k), self.exp, self.prec, false)
    }

    pub fn div_i64(&self, k: i64) -> BigFloat {
        self.div_impl(&BigFloat::from_i64(k, 64), self.prec)
    }

    pub fn mul_bigint(&self, k: &BigInt) -> BigFloat {
        if self.is_zero() || k.is_zero() {
            return BigFloat::zero(self.prec);
        }
        Self::round_from(&self.mant * k, self.exp, self.prec, false)
    }

    pub fn recip(&self) -> BigFloat {
        BigFloat::one(self.prec).div_impl(self, self.prec)
    }

    /// Correctly rounded square root.
    pub fn sqrt(&self) -> Result<BigFloat, Error> {
        if self.is_zero() {
            return Ok(self.clone());
        }
        if self.is_negative() {
            return Err(Error::Domain("square root of a negative value".into()));
        }
        let p = self.prec as i64;
        let bits = bit_len(&self.mant) as i64;
        let mut shift = (2 * p + 4 - bits).max(0);
        if (self.exp - shift).rem_euclid(2) != 0 {
            shift += 1;
        }
        let m = self.mant.magnitude() << (shift as usize);
        let r = m.sqrt();
        let exact = &r * &r == m;
        Ok(Self::round_from(
            BigInt::from_biguint(Sign::Plus, r),
            (self.exp - shift) / 2,
            self.prec,
            !exact,
        ))
    }

    /// Integer power, faithful to one ulp.
    pub fn powi(&self, k: i64) -> BigFloat {
        let prec = self.prec;
        if k == 0 {
            return BigFloat::one(prec);
        }
        let bits = 64 - (k.unsigned_abs()).leading_zeros();
        let work = prec + GUARD_BITS + 2 * bits;
        let mut base = self.with_prec(work);
        let mut acc = BigFloat::one(work);
        let mut e = k.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_impl(&base, work);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_impl(&base, work);
            }
        }
        if k < 0 {
            acc = BigFloat::one(work).div_impl(&acc, work);
        }
        acc.with_prec(prec)
    }

    /// `sum a_i * b_i` accumulated exactly above a cutoff 2^-(prec+64) below
    /// the largest product, rounded once.
    pub fn dot(a: &[BigFloat], b: &[BigFloat], prec: u32) -> BigFloat {
        debug_assert_eq!(a.len(), b.len());
        let mut top = i64::MIN;
        for (x, y) in a.iter().zip(b) {
            if x.is_zero() || y.is_zero() {
                continue;
            }
            let t = x.exp + y.exp + bit_len(&x.mant) as i64 + bit_len(&y.mant) as i64;
            top = top.max(t);
        }
        if top == i64::MIN {
            return BigFloat::zero(prec);
        }
        let n_bits = 64 - (a.len() as u64).leading_zeros() as i64;
        let floor = top - (prec as i64 + 64 + n_bits);
        let mut acc = BigInt::zero();
        for (x, y) in a.iter().zip(b) {
            if x.is_zero() || y.is_zero() {
                continue;
            }
            let e = x.exp + y.exp;
            let t = e + bit_len(&x.mant) as i64 + bit_len(&y.mant) as i64;
            if t <= floor {
                continue;
            }
            let prod = &x.mant * &y.mant;
            if e >= floor {
                acc += prod << ((e - floor) as usize);
            } else {
                let mag = prod.magnitude() >> ((floor - e) as u64);
                acc += BigInt::from_biguint(prod.sign(), mag);
            }
        }
        Self::round_from(acc, floor, prec, false)
    }

    /// Sum of a slice, evaluated as a dot product with ones.
    pub fn sum(values: &[BigFloat], prec: u32) -> BigFloat {
        let mut acc = BigFloat::zero(prec);
        let work = prec + GUARD_BITS;
        for v in values {
            acc = acc.add_impl(v, work);
        }
        acc.with_prec(prec)
    }

    pub fn max_abs<'a>(values: impl IntoIterator<Item = &'a BigFloat>) -> Option<BigFloat> {
        values
            .into_iter()
            .map(BigFloat::abs)
            .max_by(|a, b| a.cmp(b))
    }

    /// `pi`, faithful to one ulp (Machin's formula in fixed point).
    pub fn pi(prec: u32) -> BigFloat {
        let work = prec as u64 + 2 * GUARD_BITS as u64;
        let scale = BigInt::one() << work;
        let atan_inv = |k: i64| -> BigInt {
            // atan(1/k) * 2^work, alternating series in fixed point
            let k2 = BigInt::from(k * k);
            let mut term = &scale / BigInt::from(k);
            let mut sum = term.clone();
            let mut n = 1i64;
            loop {
                term = &term / &k2;
                if term.is_zero() {
                    break;
                }
                let t = &term / BigInt::from(2 * n + 1);
                if n % 2 == 1 {
                    sum -= t;
                } else {
                    sum += t;
                }
                n += 1;
            }
            sum
        };
        let v = atan_inv(5) * 16 - atan_inv(239) * 4;
        Self::round_from(v, -(work as i64), prec, false)
    }

    /// `ln 2`, faithful to one ulp.
    pub fn ln2(prec: u32) -> BigFloat {
        let work = prec as u64 + 2 * GUARD_BITS as u64;
        let v = atanh_inv_fixed(3, work) * 2;
        Self::round_from(v, -(work as i64), prec, false)
    }

    /// Natural logarithm, faithful to one ulp.
    pub fn ln(&self) -> Result<BigFloat, Error> {
        if !self.is_positive() {
            return Err(Error::Domain("logarithm of a non-positive value".into()));
        }
        let prec = self.prec;
        let work = prec + 2 * GUARD_BITS;
        // x = m * 2^e with m in [1/sqrt2, sqrt2)
        let mut e = self.exponent().expect("nonzero");
        let mut m = self.with_prec(work).mul_pow2(-e);
        let sqrt2 = BigFloat::from_i64(2, work).sqrt().expect("positive");
        if m > sqrt2 {
            m = m.mul_pow2(-1);
            e += 1;
        }
        let one = BigFloat::one(work);
        let t = m.sub_prec(&one, work).div_prec(&m.add_prec(&one, work), work);
        // ln m = 2 atanh(t), |t| <= 0.172
        let t2 = t.mul_prec(&t, work);
        let mut power = t.clone();
        let mut sum = t.clone();
        let mut k = 1i64;
        let eps_exp = -(work as i64) - 4;
        loop {
            power = power.mul_prec(&t2, work);
            let term = power.div_i64(2 * k + 1);
            if term.is_zero() || term.exponent().unwrap() < eps_exp + sum.exponent().unwrap_or(0) {
                break;
            }
            sum = sum.add_prec(&term, work);
            k += 1;
        }
        let ln_m = sum.mul_pow2(1);
        let ln2 = BigFloat::ln2(work);
        Ok(ln2.mul_i64(e).add_prec(&ln_m, work).with_prec(prec))
    }

    /// Decimal scientific notation with `digits` significant digits.
    pub fn to_sci_string(&self, digits: usize) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let digits = digits.max(1);
        let r = self.to_rational();
        let neg = r.is_negative();
        let r = r.abs();
        let ten = BigInt::from(10);
        // estimate decimal exponent, then correct
        let log10 = (self.exponent().unwrap() as f64 + 0.5) * std::f64::consts::LOG10_2;
        let mut e10 = log10.floor() as i64;
        let pow10 = |k: i64| -> BigRational {
            if k >= 0 {
                BigRational::from_integer(num_traits::pow(ten.clone(), k as usize))
            } else {
                BigRational::new(BigInt::one(), num_traits::pow(ten.clone(), (-k) as usize))
            }
        };
        loop {
            if r >= pow10(e10 + 1) {
                e10 += 1;
            } else if r < pow10(e10) {
                e10 -= 1;
            } else {
                break;
            }
        }
        let scaled = &r * pow10(digits as i64 - 1 - e10);
        let mut n = scaled.round().to_integer();
        if n >= num_traits::pow(ten.clone(), digits) {
            n /= &ten;
            e10 += 1;
        }
        let s = n.to_string();
        let (head, tail) = s.split_at(1);
        let mut out = String::new();
        if neg {
            out.push('-');
        }
        out.push_str(head);
        if !tail.is_empty() {
            out.push('.');
            out.push_str(tail);
        }
        out.push_str(&format!("e{}", e10));
        out
    }

    /// Significant decimal digits carried by this precision.
    pub fn decimal_digits(&self) -> usize {
        ((self.prec as f64) * std::f64::consts::LOG10_2).ceil() as usize + 1
    }
}

/// `atanh(1/k) * 2^work` in fixed point.
fn atanh_inv_fixed(k: i64, work: u64) -> BigInt {
    let scale = BigInt::one() << work;
    let k2 = BigInt::from(k * k);
    let mut term = &scale / BigInt::from(k);
    let mut sum = term.clone();
    let mut n = 1i64;
    loop {
        term = &term / &k2;
        if term.is_zero() {
            break;
        }
        sum += &term / BigInt::from(2 * n + 1);
        n += 1;
    }
    sum
}

pub(crate) fn parse_decimal_rational(s: &str) -> Result<BigRational, Error> {
    let bad = || Error::Parse(s.to_string());
    let t = s.trim();
    let (mant, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i64>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int_part, frac_part) = match mant.find('.') {
        Some(i) => (&mant[..i], &mant[i + 1..]),
        None => (mant, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{}{}", int_part, frac_part);
    let n = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i64;
    let ten = BigInt::from(10);
    let mut r = if scale >= 0 {
        BigRational::from_integer(n * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(n, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        r = -r;
    }
    Ok(r)
}

impl PartialEq for BigFloat {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for BigFloat {}

impl PartialOrd for BigFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BigFloat {
    fn cmp(&self, other: &Self) -> Ordering {
        let (sa, sb) = (self.signum(), other.signum());
        if sa != sb {
            return sa.cmp(&sb);
        }
        if sa == 0 {
            return Ordering::Equal;
        }
        let ea = self.exponent().unwrap();
        let eb = other.exponent().unwrap();
        let mag = if ea != eb {
            ea.cmp(&eb)
        } else {
            let e = self.exp.min(other.exp);
            let a = self.mant.magnitude() << ((self.exp - e) as usize);
            let b = other.mant.magnitude() << ((other.exp - e) as usize);
            a.cmp(&b)
        };
        if sa > 0 {
            mag
        } else {
            mag.reverse()
        }
    }
}

impl fmt::Debug for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}b]", self.to_sci_string(self.decimal_digits()), self.prec)
    }
}

impl fmt::Display for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or_else(|| self.decimal_digits());
        f.write_str(&self.to_sci_string(digits))
    }
}

impl Neg for BigFloat {
    type Output = BigFloat;
    fn neg(mut self) -> BigFloat {
        self.mant = -self.mant;
        self
    }
}

impl Neg for &BigFloat {
    type Output = BigFloat;
    fn neg(self) -> BigFloat {
        -(self.clone())
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $imp:ident) => {
        impl $tr<&BigFloat> for &BigFloat {
            type Output = BigFloat;
            fn $method(self, rhs: &BigFloat) -> BigFloat {
                let p = self.prec.max(rhs.prec);
                self.$imp(rhs, p)
            }
        }
        impl $tr<BigFloat> for BigFloat {
            type Output = BigFloat;
            fn $method(self, rhs: BigFloat) -> BigFloat {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&BigFloat> for BigFloat {
            type Output = BigFloat;
            fn $method(self, rhs: &BigFloat) -> BigFloat {
                (&self).$method(rhs)
            }
        }
        impl $tr<BigFloat> for &BigFloat {
            type Output = BigFloat;
            fn $method(self, rhs: BigFloat) -> BigFloat {
                self.$method(&rhs)
            }
        }
    };
}

binop!(Add, add, add_impl);
binop!(Mul, mul, mul_impl);
binop!(Div, div, div_impl);

impl Sub<&BigFloat> for &BigFloat {
    type Output = BigFloat;
    fn sub(self, rhs: &BigFloat) -> BigFloat {
        let p = self.prec.max(rhs.prec);
        self.add_impl(&-rhs, p)
    }
}
impl Sub<BigFloat> for BigFloat {
    type Output = BigFloat;
    fn sub(self, rhs: BigFloat) -> BigFloat {
        &self - &rhs
    }
}
impl Sub<&BigFloat> for BigFloat {
    type Output = BigFloat;
    fn sub(self, rhs: &BigFloat) -> BigFloat {
        &self - rhs
    }
}
impl Sub<BigFloat> for &BigFloat {
    type Output = BigFloat;
    fn sub(self, rhs: BigFloat) -> BigFloat {
        self - &rhs
    }
}

impl AddAssign<&BigFloat> for BigFloat {
    fn add_assign(&mut self, rhs: &BigFloat) {
        *self = &*self + rhs;
    }
}

impl SubAssign<&BigFloat> for BigFloat {
    fn sub_assign(&mut self, rhs: &BigFloat) {
        *self = &*self - rhs;
    }
}

impl MulAssign<&BigFloat> for BigFloat {
    fn mul_assign(&mut self, rhs: &BigFloat) {
        *self = &*self * rhs;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn half_ulp_ok(approx: &BigFloat, exact: &BigRational) -> bool {
        let err = (approx.to_rational() - exact).abs();
        let half_ulp = approx.ulp().to_rational() / BigInt::from(2);
        err <= half_ulp
    }

    #[test]
    fn f64_roundtrip() {
        for v in [1.0, -2.5, 0.1, 1e-300, 123456789.125, f64::MIN_POSITIVE / 8.0] {
            let x = BigFloat::from_f64(v, 80).unwrap();
            assert_eq!(x.to_f64(), v);
        }
        assert!(BigFloat::from_f64(f64::NAN, 64).is_err());
    }

    #[test]
    fn one_third_is_correctly_rounded() {
        let x = BigFloat::from_ratio(&BigInt::from(1), &BigInt::from(3), 64);
        assert!(half_ulp_ok(&x, &BigRational::new(1.into(), 3.into())));
    }

    #[test]
    fn tiny_addend_is_absorbed() {
        let one = BigFloat::one(64);
        let tiny = BigFloat::one(64).mul_pow2(-500);
        assert_eq!(&one + &tiny, one);
        assert_eq!(&one - &tiny, one);
        // but not when it matters
        let half_ulp = BigFloat::one(64).mul_pow2(-64);
        let three_quarter = &half_ulp + &half_ulp.mul_pow2(-1);
        assert!(&one + &three_quarter > one);
    }

    #[test]
    fn pi_and_ln2_digits() {
        let pi = BigFloat::pi(200);
        assert!(pi
            .to_sci_string(50)
            .starts_with("3.14159265358979323846264338327950288419716939937"));
        let ln2 = BigFloat::ln2(200);
        assert!(ln2
            .to_sci_string(40)
            .starts_with("6.93147180559945309417232121458176568075"));
    }

    #[test]
    fn ln_of_integers() {
        let x = BigFloat::from_i64(10, 160).ln().unwrap();
        assert!(x.to_sci_string(40).starts_with("2.30258509299404568401799145468436420760"));
        let y = BigFloat::from_i64(1, 128).ln().unwrap();
        assert!(y.is_zero() || y.abs().exponent().unwrap() < -120);
        assert!(BigFloat::zero(64).ln().is_err());
    }

    #[test]
    fn sqrt_two() {
        let s = BigFloat::from_i64(2, 128).sqrt().unwrap();
        assert!(s.to_sci_string(35).starts_with("1.414213562373095048801688724209698"));
        assert!(BigFloat::from_i64(-1, 64).sqrt().is_err());
    }

    #[test]
    fn sci_string_rounding() {
        let x = BigFloat::parse_decimal("0.000123456789", 64).unwrap();
        assert_eq!(x.to_sci_string(4), "1.235e-4");
        let y = BigFloat::parse_decimal("-9.9996", 64).unwrap();
        assert_eq!(y.to_sci_string(4), "-1.000e1");
        assert!(BigFloat::parse_decimal("1.2.3", 64).is_err());
    }

    #[test]
    fn dot_matches_naive() {
        let p = 96;
        let a: Vec<BigFloat> = (1..20).map(|k| BigFloat::from_ratio(&1.into(), &BigInt::from(k), p)).collect();
        let b: Vec<BigFloat> = (1..20).map(|k| BigFloat::from_i64(k * k - 7, p)).collect();
        let d = BigFloat::dot(&a, &b, p);
        let exact: BigRational = a
            .iter()
            .zip(&b)
            .map(|(x, y)| x.to_rational() * y.to_rational())
            .fold(BigRational::zero(), |s, t| s + t);
        let err = (d.to_rational() - exact).abs();
        assert!(err <= d.ulp().to_rational());
    }

    fn arb_float() -> impl Strategy<Value = BigFloat> {
        (any::<i64>(), -200i64..200, 20u32..200).prop_map(|(m, e, p)| {
            BigFloat::from_i64(m, 64).mul_pow2(e).with_prec(p)
        })
    }

    proptest! {
        #[test]
        fn add_mul_div_are_correctly_rounded(a in arb_float(), b in arb_float(), p in 16u32..300) {
            let (ra, rb) = (a.to_rational(), b.to_rational());
            prop_assert!(half_ulp_ok(&a.add_prec(&b, p), &(&ra + &rb)));
            prop_assert!(half_ulp_ok(&a.sub_prec(&b, p), &(&ra - &rb)));
            prop_assert!(half_ulp_ok(&a.mul_prec(&b, p), &(&ra * &rb)));
            if !b.is_zero() {
                prop_assert!(half_ulp_ok(&a.div_prec(&b, p), &(&ra / &rb)));
            }
        }

        #[test]
        fn sqrt_is_correctly_rounded(m in 1u64.., e in -100i64..100, p in 16u32..256) {
            let x = BigFloat::from_u64(m, 64).mul_pow2(e).with_prec(p);
            let s = x.sqrt().unwrap();
            // s^2 brackets: (s - ulp/2)^2 <= x <= (s + ulp/2)^2
            let r = s.to_rational();
            let h = s.ulp().to_rational() / BigInt::from(2);
            let lo = &r - &h;
            let hi = &r + &h;
            let xr = x.to_rational();
            prop_assert!(&lo * &lo <= xr && xr <= &hi * &hi);
        }

        #[test]
        fn ordering_matches_rationals(a in arb_float(), b in arb_float()) {
            prop_assert_eq!(a.cmp(&b), a.to_rational().cmp(&b.to_rational()));
        }
    }
}
