use std::ops::{Add, Div, Mul, Neg, Sub};

use super::bigfloat::BigFloat;

/// Complex number as a pair of [`BigFloat`]s. Each component follows the
/// rounding of the real operations it is built from.
#[derive(Clone, Debug, PartialEq)]
pub struct Complex {
    pub re: BigFloat,
    pub im: BigFloat,
}

impl Complex {
    pub fn new(re: BigFloat, im: BigFloat) -> Self {
        Complex { re, im }
    }

    pub fn real(re: BigFloat) -> Self {
        let p = re.prec();
        Complex {
            re,
            im: BigFloat::zero(p),
        }
    }

    pub fn from_f64(re: f64, im: f64, prec: u32) -> Self {
        Complex {
            re: BigFloat::from_f64(re, prec).expect("finite"),
            im: BigFloat::from_f64(im, prec).expect("finite"),
        }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    pub fn norm_sqr(&self) -> BigFloat {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn abs(&self) -> BigFloat {
        self.norm_sqr().sqrt().expect("non-negative")
    }

    pub fn conj(&self) -> Self {
        Complex {
            re: self.re.clone(),
            im: -&self.im,
        }
    }

    pub fn recip(&self) -> Self {
        let n = self.norm_sqr();
        Complex {
            re: &self.re / &n,
            im: -(&self.im / &n),
        }
    }

    pub fn scale(&self, k: &BigFloat) -> Self {
        Complex {
            re: &self.re * k,
            im: &self.im * k,
        }
    }

    pub fn add_real(&self, k: &BigFloat) -> Self {
        Complex {
            re: &self.re + k,
            im: self.im.clone(),
        }
    }
}

impl Add<&Complex> for &Complex {
    type Output = Complex;
    fn add(self, rhs: &Complex) -> Complex {
        Complex::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Sub<&Complex> for &Complex {
    type Output = Complex;
    fn sub(self, rhs: &Complex) -> Complex {
        Complex::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl Mul<&Complex> for &Complex {
    type Output = Complex;
    fn mul(self, rhs: &Complex) -> Complex {
        Complex::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl Div<&Complex> for &Complex {
    type Output = Complex;
    fn div(self, rhs: &Complex) -> Complex {
        self * &rhs.recip()
    }
}

impl Neg for &Complex {
    type Output = Complex;
    fn neg(self) -> Complex {
        Complex::new(-&self.re, -&self.im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn division_roundtrip() {
        let a = Complex::from_f64(1.5, -2.0, 96);
        let b = Complex::from_f64(0.25, 3.0, 96);
        let c = &(&a / &b) * &b;
        assert!((&c - &a).abs().to_f64() < 1e-25);
        assert_eq!(Complex::from_f64(3.0, 4.0, 64).abs().to_f64(), 5.0);
    }
}
