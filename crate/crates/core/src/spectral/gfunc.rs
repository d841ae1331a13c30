//! Functions in the g-basis `e_j(z) = (z - 1/phi)^(j-1) / (z + phi)^(j+1)`.
//!
//! With `w = (z - 1/phi) / (z + phi)` one has `z + phi = sqrt5 / (1 - w)`, so
//! `sum_j a_j e_j(z) = (z + phi)^-2 sum_j a_j w^(j-1)`, a power series in `w`
//! that converges for `Re z > -1/2` (where `|w| < 1`).

use crate::error::{Error, Result};
use crate::numerics::{golden_pow, phi, BigFloat, Complex, QuadraticNumber};

use super::tail::extrapolated_sum;
use super::Solution;

/// `U(z) = sum_j A_j e_j(z)` paired with its eigenvalue.
#[derive(Clone, Debug)]
pub struct GFunction {
    /// Eigenvalue index, or 0 for a function not coming from the recurrence.
    pub n: usize,
    /// `A_j`, `j = 1..=len`.
    pub coefficients: Vec<BigFloat>,
    pub lambda: BigFloat,
}

/// Value of a truncated g-series plus a bound on the omitted terms.
#[derive(Clone, Debug)]
pub struct GEval {
    pub value: Complex,
    /// `max |A_j| (last 8) * |w|^J / (1 - |w|) / |z + phi|^2`; a heuristic
    /// envelope assuming the coefficients do not grow past the window.
    pub tail_bound: BigFloat,
}

impl GFunction {
    pub fn from_coefficients(n: usize, coefficients: Vec<BigFloat>, lambda: BigFloat) -> Self {
        GFunction {
            n,
            coefficients,
            lambda,
        }
    }

    /// Eigenfunction of a solved index: `A_j = sum_v what_j^(v)`.
    ///
    /// With `extrapolate` each coefficient sequence gets the same fitted tail
    /// as the eigenvalue; without it the plain partial sums are used.
    pub fn from_solution(sol: &Solution, extrapolate: bool) -> Result<Self> {
        let st = &sol.state;
        let w = st.work_prec();
        let (_, size) = st.window();
        let mut coefficients = Vec::with_capacity(size);
        let mut seq = Vec::with_capacity(st.v_done() + 1);
        for j in 0..size {
            seq.clear();
            seq.extend((0..=st.v_done()).map(|v| st.what(v)[j].clone()));
            let a = if extrapolate {
                extrapolated_sum(&seq, w)?
            } else {
                BigFloat::sum(&seq, w)
            };
            coefficients.push(a.with_prec(st.prec()));
        }
        let lambda = if extrapolate {
            sol.result.lambda.clone()
        } else {
            sol.result.lambda_partial.clone()
        };
        Ok(GFunction {
            n: st.n(),
            coefficients,
            lambda,
        })
    }

    /// The `lambda = 1` pair: `1/(z+1)` with `a_j = (2 phi - 1)(1 - (-1)^j phi^(-2j))`.
    pub fn gauss_density(count: usize, prec: u32) -> Self {
        let root5 = QuadraticNumber::sqrt_of(5);
        let coefficients = (1..=count as i64)
            .map(|j| {
                let p = golden_pow(-2 * j);
                let f = if j % 2 == 0 {
                    &QuadraticNumber::one() - &p
                } else {
                    &QuadraticNumber::one() + &p
                };
                (&root5 * &f).to_float(prec)
            })
            .collect();
        GFunction {
            n: 1,
            coefficients,
            lambda: BigFloat::one(prec),
        }
    }

    fn prec(&self) -> u32 {
        self.lambda.prec()
    }
}

fn check_half_plane(z: &Complex) -> Result<()> {
    let half = BigFloat::from_ratio(&(-1).into(), &2.into(), 16);
    if z.re <= half {
        return Err(Error::Domain(format!(
            "Re z = {} is not > -1/2",
            z.re.to_sci_string(8)
        )));
    }
    Ok(())
}

/// Sums the g-series at `z` by Horner's rule in `w`.
pub fn eigenfunction_eval(gf: &GFunction, z: &Complex) -> Result<GEval> {
    check_half_plane(z)?;
    let prec = gf.prec().max(z.prec());
    let w = prec + 16;
    let z = Complex::new(z.re.with_prec(w), z.im.with_prec(w));
    let phi_f = phi().to_float(w);
    let phi_inv = golden_pow(-1).to_float(w);
    let zp = z.add_real(&phi_f);
    let t = &z.add_real(&-phi_inv) / &zp;
    let mut acc = Complex::real(BigFloat::zero(w));
    for a in gf.coefficients.iter().rev() {
        acc = (&acc * &t).add_real(a);
    }
    let inv2 = (&zp * &zp).recip();
    let value = &acc * &inv2;
    let r = t.abs();
    let count = gf.coefficients.len();
    let last = BigFloat::max_abs(gf.coefficients[count.saturating_sub(8)..].iter())
        .unwrap_or_else(|| BigFloat::zero(w));
    let one = BigFloat::one(w);
    let tail_bound = last
        .mul_prec(&r.powi(count as i64), w)
        .div_prec(&(&one - &r), w)
        .mul_prec(&inv2.abs(), w);
    Ok(GEval {
        value: Complex::new(value.re.with_prec(prec), value.im.with_prec(prec)),
        tail_bound: tail_bound.with_prec(prec),
    })
}

/// `|U(z) - U(z+1) - U(1/(z+1)) / (lambda (z+1)^2)|`.
pub fn functional_equation_residual(gf: &GFunction, lambda: &BigFloat, z: &Complex) -> Result<BigFloat> {
    if lambda.is_zero() {
        return Err(Error::Domain("functional equation needs lambda != 0".into()));
    }
    let prec = gf.prec().max(z.prec());
    let z1 = z.add_real(&BigFloat::one(prec));
    let zi = z1.recip();
    let u0 = eigenfunction_eval(gf, z)?.value;
    let u1 = eigenfunction_eval(gf, &z1)?.value;
    let u2 = eigenfunction_eval(gf, &zi)?.value;
    let den = (&z1 * &z1).scale(lambda);
    let r = &(&u0 - &u1) - &(&u2 / &den);
    Ok(r.abs())
}

/// Polynomial over `Q(sqrt5)`, coefficients in ascending powers.
type Poly = Vec<QuadraticNumber>;

fn poly_mul(a: &[QuadraticNumber], b: &[QuadraticNumber]) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![QuadraticNumber::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = &out[i + j] + &(x * y);
        }
    }
    out
}

fn poly_add(a: &[QuadraticNumber], b: &[QuadraticNumber]) -> Poly {
    let mut out = vec![QuadraticNumber::zero(); a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] = &out[i] + x;
    }
    for (i, x) in b.iter().enumerate() {
        out[i] = &out[i] + x;
    }
    out
}

fn poly_pow(a: &[QuadraticNumber], k: usize) -> Poly {
    let mut out = vec![QuadraticNumber::one()];
    for _ in 0..k {
        out = poly_mul(&out, a);
    }
    out
}

/// `sum_k c_k g^k`.
fn compose(p: &[QuadraticNumber], g: &[QuadraticNumber]) -> Poly {
    let mut out: Poly = Vec::new();
    for c in p.iter().rev() {
        out = poly_add(&poly_mul(&out, g), std::slice::from_ref(c));
    }
    out
}

/// `num(z) / den(z)` with coefficients in `Q(sqrt5)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalFunction {
    pub num: Vec<QuadraticNumber>,
    pub den: Vec<QuadraticNumber>,
}

impl RationalFunction {
    pub fn new(num: Vec<QuadraticNumber>, den: Vec<QuadraticNumber>) -> Result<Self> {
        if den.iter().all(QuadraticNumber::is_zero) {
            return Err(Error::DivisionByZero);
        }
        Ok(RationalFunction { num, den })
    }

    /// Basis element `e_l`.
    pub fn basis(l: usize) -> Self {
        assert!(l >= 1, "basis index starts at 1");
        let minus = vec![-golden_pow(-1), QuadraticNumber::one()];
        let plus = vec![phi(), QuadraticNumber::one()];
        RationalFunction {
            num: poly_pow(&minus, l - 1),
            den: poly_pow(&plus, l + 1),
        }
    }

    /// `f(z + 1)`.
    pub fn shift(&self) -> Self {
        let g = vec![QuadraticNumber::one(), QuadraticNumber::one()];
        RationalFunction {
            num: compose(&self.num, &g),
            den: compose(&self.den, &g),
        }
    }

    fn degree(&self) -> usize {
        self.num.len().max(self.den.len()).saturating_sub(1)
    }
}

/// Exact g-coefficients `a_1..=a_count` of a rational function: the Taylor
/// coefficients of `5 / (1-w)^2 * f((w phi + 1/phi) / (1 - w))` at `w = 0`.
pub fn g_transform_exact(f: &RationalFunction, count: usize) -> Result<Vec<QuadraticNumber>> {
    // clear the (1-w)^-k denominators with (1-w)^D on top and bottom
    let d = f.degree();
    let zw = vec![golden_pow(-1), phi()]; // z (1-w)
    let one_minus = vec![QuadraticNumber::one(), -QuadraticNumber::one()];
    let lift = |p: &[QuadraticNumber]| -> Poly {
        let mut out: Poly = Vec::new();
        for (k, c) in p.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let term = poly_mul(&poly_pow(&zw, k), &poly_pow(&one_minus, d - k));
            let term: Poly = term.iter().map(|t| c * t).collect();
            out = poly_add(&out, &term);
        }
        out
    };
    let num: Poly = lift(&f.num).iter().map(|c| c * &QuadraticNumber::from_int(5)).collect();
    let den = poly_mul(&lift(&f.den), &poly_pow(&one_minus, 2));
    let lead = den.first().cloned().unwrap_or_else(QuadraticNumber::zero);
    if lead.is_zero() {
        return Err(Error::Domain(
            "f has a pole at z = 1/phi (w = 0); no g-expansion".into(),
        ));
    }
    let inv = lead.inv()?;
    let mut out: Vec<QuadraticNumber> = Vec::with_capacity(count);
    for k in 0..count {
        let mut s = num.get(k).cloned().unwrap_or_else(QuadraticNumber::zero);
        for i in 1..=k.min(den.len() - 1) {
            if !den[i].is_zero() {
                s = &s - &(&den[i] * &out[k - i]);
            }
        }
        out.push(&s * &inv);
    }
    Ok(out)
}

/// Floating g-coefficients, rounded from [`g_transform_exact`].
pub fn g_transform(f: &RationalFunction, count: usize, prec: u32) -> Result<Vec<BigFloat>> {
    Ok(g_transform_exact(f, count)?
        .iter()
        .map(|a| a.to_float(prec))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::k_coeff;
    use crate::spectral::{solve, SpectralOptions};

    fn z(tenths: i64) -> Complex {
        Complex::real(BigFloat::from_ratio(&tenths.into(), &10.into(), 128))
    }

    #[test]
    fn gauss_density_coefficients() {
        let f = RationalFunction::new(
            vec![QuadraticNumber::one()],
            vec![QuadraticNumber::one(), QuadraticNumber::one()],
        )
        .unwrap();
        let a = g_transform_exact(&f, 30).unwrap();
        for (j, aj) in a.iter().enumerate() {
            let j = j as i64 + 1;
            let p = golden_pow(-2 * j);
            let s = if j % 2 == 0 { &QuadraticNumber::one() - &p } else { &QuadraticNumber::one() + &p };
            assert_eq!(aj, &(&QuadraticNumber::sqrt_of(5) * &s));
        }
    }

    #[test]
    fn basis_is_orthonormal() {
        for l in 1..8 {
            let a = g_transform_exact(&RationalFunction::basis(l), 12).unwrap();
            for (j, aj) in a.iter().enumerate() {
                let want = if j + 1 == l { QuadraticNumber::one() } else { QuadraticNumber::zero() };
                assert_eq!(aj, &want, "l={l} j={}", j + 1);
            }
        }
    }

    #[test]
    fn shifted_basis_gives_kernel() {
        for l in 1..=6u64 {
            let a = g_transform_exact(&RationalFunction::basis(l as usize).shift(), 15).unwrap();
            for (j, aj) in a.iter().enumerate() {
                assert_eq!(aj, &k_coeff(j as u64 + 1, l), "j={} l={l}", j + 1);
            }
        }
    }

    #[test]
    fn pole_at_centre_is_rejected() {
        let f = RationalFunction::new(
            vec![QuadraticNumber::one()],
            vec![-golden_pow(-1), QuadraticNumber::one()],
        )
        .unwrap();
        assert!(matches!(g_transform(&f, 4, 64), Err(Error::Domain(_))));
        assert!(RationalFunction::new(vec![], vec![QuadraticNumber::zero()]).is_err());
    }

    #[test]
    fn basis_vanishes_at_centre() {
        let mut c = vec![BigFloat::zero(128); 3];
        c[1] = BigFloat::one(128);
        let gf = GFunction::from_coefficients(0, c, BigFloat::one(128));
        let at = Complex::real(golden_pow(-1).to_float(128));
        assert!(eigenfunction_eval(&gf, &at).unwrap().value.abs().to_f64() < 1e-38);
    }

    #[test]
    fn gauss_density_values_and_residual() {
        let gf = GFunction::gauss_density(260, 128);
        let e = eigenfunction_eval(&gf, &z(3)).unwrap();
        let want = BigFloat::from_ratio(&10.into(), &13.into(), 128);
        assert!((&e.value.re - &want).abs().to_f64() < 1e-36);
        assert!(e.tail_bound.to_f64() < 1e-36);
        let r = functional_equation_residual(&gf, &BigFloat::one(128), &z(3)).unwrap();
        assert!(r.to_f64() < 1e-20, "residual {r}");
        assert!(eigenfunction_eval(&gf, &z(-5)).is_err());
        assert!(functional_equation_residual(&gf, &BigFloat::zero(64), &z(3)).is_err());
    }

    #[test]
    fn second_eigenfunction_refines() {
        let run = |v| {
            let sol = solve(2, &SpectralOptions { v_max: v, ..Default::default() }).unwrap();
            let gf = GFunction::from_solution(&sol, true).unwrap();
            functional_equation_residual(&gf, &gf.lambda, &z(5)).unwrap().to_f64()
        };
        let (r8, r32) = (run(8), run(32));
        assert!(r32 < 1e-6, "residual at V=32: {r32}");
        assert!(r32 < r8, "{r32} !< {r8}");
    }
}
