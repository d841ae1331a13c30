//! Real nonsymmetric eigenvalues: balancing, Hessenberg reduction by
//! stabilized elimination, and the Francis double-shift QR iteration.

use crate::error::{Error, Result};
use crate::numerics::BigFloat;

/// Iterations allowed per eigenvalue before giving up.
const MAX_ITS: usize = 60;

/// Rescales rows and columns by powers of two (exact) until row and column
/// off-diagonal norms are comparable.
pub fn balance(a: &mut [Vec<BigFloat>]) {
    let n = a.len();
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut c = 0f64;
            let mut r = 0f64;
            for j in 0..n {
                if j != i {
                    c += a[j][i].abs().to_f64();
                    r += a[i][j].abs().to_f64();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 0i64; // log2 of the scale factor
            let mut cc = c;
            while cc < r / 2.0 {
                f += 1;
                cc *= 4.0;
            }
            while cc > r * 2.0 {
                f -= 1;
                cc /= 4.0;
            }
            if (cc + r) / f64::powi(2.0, f as i32) < 0.95 * s {
                done = false;
                for x in a[i].iter_mut() {
                    *x = x.mul_pow2(-f);
                }
                for row in a.iter_mut() {
                    row[i] = row[i].mul_pow2(f);
                }
            }
        }
    }
}

/// Reduces to upper Hessenberg form by Gaussian elimination with pivoting;
/// entries below the subdiagonal are cleared.
pub fn hessenberg(a: &mut [Vec<BigFloat>], prec: u32) {
    let n = a.len();
    for m in 1..n.saturating_sub(1) {
        let mut x = BigFloat::zero(prec);
        let mut piv = m;
        for j in m..n {
            if a[j][m - 1].abs() > x.abs() {
                x = a[j][m - 1].clone();
                piv = j;
            }
        }
        if piv != m {
            a.swap(piv, m);
            for row in a.iter_mut() {
                row.swap(piv, m);
            }
        }
        if x.is_zero() {
            continue;
        }
        for i in m + 1..n {
            if a[i][m - 1].is_zero() {
                continue;
            }
            let y = a[i][m - 1].div_prec(&x, prec);
            a[i][m - 1] = BigFloat::zero(prec);
            let (top, bottom) = a.split_at_mut(i);
            let (rm, ri) = (&top[m], &mut bottom[0]);
            for j in m..n {
                ri[j] = ri[j].sub_prec(&y.mul_prec(&rm[j], prec), prec);
            }
            for row in a.iter_mut() {
                row[m] = row[m].add_prec(&y.mul_prec(&row[i], prec), prec);
            }
        }
    }
}

fn same_sign(a: &BigFloat, b: &BigFloat) -> BigFloat {
    if b.is_negative() {
        -a.abs()
    } else {
        a.abs()
    }
}

/// Eigenvalues `(re, im)` of an upper Hessenberg matrix, destroyed in the
/// process. Order is the order of deflation.
pub fn hqr(a: &mut [Vec<BigFloat>], prec: u32) -> Result<Vec<(BigFloat, BigFloat)>> {
    let n = a.len();
    let zero = || BigFloat::zero(prec);
    let mut wr = vec![zero(); n];
    let mut wi = vec![zero(); n];
    let mut anorm = zero();
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm = anorm.add_prec(&a[i][j].abs(), prec);
        }
    }
    // 1-based index helpers keep the classical formulation readable
    macro_rules! at {
        ($i:expr, $j:expr) => {
            a[$i - 1][$j - 1]
        };
    }
    let mut nn = n;
    let mut t = zero();
    let (mut p, mut q, mut r);
    let (mut x, mut y, mut z, mut w);
    while nn >= 1 {
        let mut its = 0;
        loop {
            let mut l = nn;
            while l >= 2 {
                let mut s = at!(l - 1, l - 1).abs().add_prec(&at!(l, l).abs(), prec);
                if s.is_zero() {
                    s = anorm.clone();
                }
                if at!(l, l - 1).abs().add_prec(&s, prec) == s {
                    at!(l, l - 1) = zero();
                    break;
                }
                l -= 1;
            }
            x = at!(nn, nn).clone();
            if l == nn {
                wr[nn - 1] = x.add_prec(&t, prec);
                wi[nn - 1] = zero();
                nn -= 1;
                break;
            }
            y = at!(nn - 1, nn - 1).clone();
            w = at!(nn, nn - 1).mul_prec(&at!(nn - 1, nn), prec);
            if l == nn - 1 {
                p = y.sub_prec(&x, prec).mul_pow2(-1);
                q = p.mul_prec(&p, prec).add_prec(&w, prec);
                z = q.abs().sqrt()?;
                x = x.add_prec(&t, prec);
                if !q.is_negative() {
                    z = p.add_prec(&same_sign(&z, &p), prec);
                    wr[nn - 2] = x.add_prec(&z, prec);
                    wr[nn - 1] = wr[nn - 2].clone();
                    if !z.is_zero() {
                        wr[nn - 1] = x.sub_prec(&w.div_prec(&z, prec), prec);
                    }
                    wi[nn - 2] = zero();
                    wi[nn - 1] = zero();
                } else {
                    wr[nn - 2] = x.add_prec(&p, prec);
                    wr[nn - 1] = wr[nn - 2].clone();
                    wi[nn - 2] = -z.clone();
                    wi[nn - 1] = z;
                }
                nn -= 2;
                break;
            }
            if its == MAX_ITS {
                return Err(Error::Convergence(format!(
                    "QR iteration stalled at order {nn} after {its} sweeps (subdiagonal {:.3e})",
                    at!(nn, nn - 1).to_f64()
                )));
            }
            if its > 0 && its % 10 == 0 {
                // exceptional shift
                t = t.add_prec(&x, prec);
                for i in 1..=nn {
                    at!(i, i) = at!(i, i).sub_prec(&x, prec);
                }
                let s = at!(nn, nn - 1).abs().add_prec(&at!(nn - 1, nn - 2).abs(), prec);
                x = BigFloat::from_ratio(&3.into(), &4.into(), prec).mul_prec(&s, prec);
                y = x.clone();
                w = BigFloat::from_ratio(&(-7).into(), &16.into(), prec)
                    .mul_prec(&s.mul_prec(&s, prec), prec);
            }
            its += 1;
            let mut m = nn - 2;
            loop {
                z = at!(m, m).clone();
                r = x.sub_prec(&z, prec);
                let s = y.sub_prec(&z, prec);
                p = r
                    .mul_prec(&s, prec)
                    .sub_prec(&w, prec)
                    .div_prec(&at!(m + 1, m), prec)
                    .add_prec(&at!(m, m + 1), prec);
                q = at!(m + 1, m + 1)
                    .sub_prec(&z, prec)
                    .sub_prec(&r, prec)
                    .sub_prec(&s, prec);
                r = at!(m + 2, m + 1).clone();
                let s = p.abs().add_prec(&q.abs(), prec).add_prec(&r.abs(), prec);
                p = p.div_prec(&s, prec);
                q = q.div_prec(&s, prec);
                r = r.div_prec(&s, prec);
                if m == l {
                    break;
                }
                let u = at!(m, m - 1).abs().mul_prec(&q.abs().add_prec(&r.abs(), prec), prec);
                let v = p.abs().mul_prec(
                    &at!(m - 1, m - 1)
                        .abs()
                        .add_prec(&z.abs(), prec)
                        .add_prec(&at!(m + 1, m + 1).abs(), prec),
                    prec,
                );
                if u.add_prec(&v, prec) == v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nn {
                at!(i, i - 2) = zero();
                if i != m + 2 {
                    at!(i, i - 3) = zero();
                }
            }
            let mut k = m;
            while k + 1 <= nn {
                if k != m {
                    p = at!(k, k - 1).clone();
                    q = at!(k + 1, k - 1).clone();
                    r = zero();
                    if k != nn - 1 {
                        r = at!(k + 2, k - 1).clone();
                    }
                    x = p.abs().add_prec(&q.abs(), prec).add_prec(&r.abs(), prec);
                    if !x.is_zero() {
                        p = p.div_prec(&x, prec);
                        q = q.div_prec(&x, prec);
                        r = r.div_prec(&x, prec);
                    }
                }
                let norm = p
                    .mul_prec(&p, prec)
                    .add_prec(&q.mul_prec(&q, prec), prec)
                    .add_prec(&r.mul_prec(&r, prec), prec)
                    .sqrt()?;
                let s = same_sign(&norm, &p);
                if !s.is_zero() {
                    if k == m {
                        if l != m {
                            at!(k, k - 1) = -at!(k, k - 1).clone();
                        }
                    } else {
                        at!(k, k - 1) = -s.mul_prec(&x, prec);
                    }
                    p = p.add_prec(&s, prec);
                    x = p.div_prec(&s, prec);
                    y = q.div_prec(&s, prec);
                    z = r.div_prec(&s, prec);
                    q = q.div_prec(&p, prec);
                    r = r.div_prec(&p, prec);
                    for j in k..=nn {
                        p = at!(k, j).add_prec(&q.mul_prec(&at!(k + 1, j), prec), prec);
                        if k != nn - 1 {
                            p = p.add_prec(&r.mul_prec(&at!(k + 2, j), prec), prec);
                            at!(k + 2, j) = at!(k + 2, j).sub_prec(&p.mul_prec(&z, prec), prec);
                        }
                        at!(k + 1, j) = at!(k + 1, j).sub_prec(&p.mul_prec(&y, prec), prec);
                        at!(k, j) = at!(k, j).sub_prec(&p.mul_prec(&x, prec), prec);
                    }
                    let mmin = nn.min(k + 3);
                    for i in l..=mmin {
                        p = x.mul_prec(&at!(i, k), prec).add_prec(&y.mul_prec(&at!(i, k + 1), prec), prec);
                        if k != nn - 1 {
                            p = p.add_prec(&z.mul_prec(&at!(i, k + 2), prec), prec);
                            at!(i, k + 2) = at!(i, k + 2).sub_prec(&p.mul_prec(&r, prec), prec);
                        }
                        at!(i, k + 1) = at!(i, k + 1).sub_prec(&p.mul_prec(&q, prec), prec);
                        at!(i, k) = at!(i, k).sub_prec(&p, prec);
                    }
                }
                k += 1;
            }
            if l >= nn - 1 {
                break;
            }
        }
    }
    Ok(wr.into_iter().zip(wi).collect())
}

/// All eigenvalues of a dense real matrix, sorted by decreasing modulus
/// (ties by real part, then imaginary part, for a deterministic order).
pub fn eigenvalues(mut a: Vec<Vec<BigFloat>>, prec: u32) -> Result<Vec<(BigFloat, BigFloat)>> {
    let n = a.len();
    if a.iter().any(|r| r.len() != n) {
        return Err(Error::Domain("eigenvalues of a non-square matrix".into()));
    }
    for row in a.iter_mut() {
        for x in row.iter_mut() {
            *x = x.with_prec(prec);
        }
    }
    balance(&mut a);
    hessenberg(&mut a, prec);
    let mut ev = hqr(&mut a, prec)?;
    ev.sort_by(|x, y| {
        let mx = x.0.mul_prec(&x.0, prec).add_prec(&x.1.mul_prec(&x.1, prec), prec);
        let my = y.0.mul_prec(&y.0, prec).add_prec(&y.1.mul_prec(&y.1, prec), prec);
        my.cmp(&mx).then_with(|| y.0.cmp(&x.0)).then_with(|| y.1.cmp(&x.1))
    });
    Ok(ev)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> Vec<Vec<BigFloat>> {
        rows.iter()
            .map(|r| r.iter().map(|&v| BigFloat::from_i64(v, 128)).collect())
            .collect()
    }

    #[test]
    fn triangular_and_companion() {
        let ev = eigenvalues(m(&[&[3, 1, 4], &[0, -2, 7], &[0, 0, 1]]), 128).unwrap();
        let re: Vec<f64> = ev.iter().map(|e| e.0.to_f64()).collect();
        assert_eq!(re, vec![3.0, -2.0, 1.0]);
        // x^3 - 6x^2 + 11x - 6 = (x-1)(x-2)(x-3)
        let ev = eigenvalues(m(&[&[6, -11, 6], &[1, 0, 0], &[0, 1, 0]]), 128).unwrap();
        for (e, want) in ev.iter().zip([3.0, 2.0, 1.0]) {
            assert!((e.0.to_f64() - want).abs() < 1e-30);
            assert!(e.1.is_zero());
        }
    }

    #[test]
    fn complex_pair() {
        // rotation-like block with eigenvalues 1 +- 2i, plus 5
        let ev = eigenvalues(m(&[&[1, -2, 0], &[2, 1, 0], &[0, 0, 5]]), 128).unwrap();
        assert!((ev[0].0.to_f64() - 5.0).abs() < 1e-30);
        assert!((ev[1].0.to_f64() - 1.0).abs() < 1e-30);
        assert!((ev[1].1.to_f64().abs() - 2.0).abs() < 1e-30);
        assert_eq!(ev[1].1, -ev[2].1.clone());
    }

    #[test]
    fn hilbert_like_symmetric() {
        // eigenvalues of a 12x12 matrix with known trace and determinant sign
        let n = 12;
        let a: Vec<Vec<BigFloat>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| BigFloat::from_ratio(&1.into(), &((i + j + 1) as i64).into(), 192))
                    .collect()
            })
            .collect();
        let trace = (0..n).fold(BigFloat::zero(192), |acc, i| &acc + &a[i][i]);
        let ev = eigenvalues(a, 192).unwrap();
        let s = ev.iter().fold(BigFloat::zero(192), |acc, e| &acc + &e.0);
        assert!((&s - &trace).abs().to_f64() < 1e-45);
        assert!(ev.iter().all(|e| e.1.is_zero() && e.0.is_positive()));
        // det H_n = c_n^4 / c_2n with c_n = prod_{i<n} i!
        let c = |k: usize| {
            (1..k).fold(num_bigint::BigInt::from(1), |acc, i| {
                acc * (1..=i).fold(num_bigint::BigInt::from(1), |f, x| f * x)
            })
        };
        let cn = c(n);
        let det = BigFloat::from_ratio(&(&cn * &cn * &cn * &cn), &c(2 * n), 192);
        let prod = ev.iter().fold(BigFloat::one(192), |acc, e| &acc * &e.0);
        assert!(((&prod - &det) / &det).abs().to_f64() < 1e-20);
    }
}
