//! Cross-module invariants as property tests.

use gkw_core::analysis::{asympt_c, fit_d, ratio_test};
use gkw_core::kernel::{k_coeff, k_window, n_coeff, KernelMatrix};
use gkw_core::numerics::{golden_pow, BigFloat, QuadraticNumber, Rational};
use gkw_core::oracle::{build_matrix, hurwitz_zeta};
use gkw_core::spectral::{exact_two_layers, solve, SpectralOptions};
use gkw_core::traces::{column_target, decomposition, xi_pair, xi_single};
use proptest::prelude::*;

fn qi(v: i64) -> QuadraticNumber {
    QuadraticNumber::from_int(v)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_symmetry_and_sign(j in 1u64..90, l in 1u64..90) {
        let lhs = k_coeff(j, l).mul_rational(&Rational::from_integer(l.into()));
        let rhs = k_coeff(l, j).mul_rational(&Rational::from_integer(j.into()));
        prop_assert_eq!(lhs, rhs);
        prop_assert!(k_coeff(j, l).is_positive());
        prop_assert!(n_coeff(j, l) > 0.into());
    }

    #[test]
    fn window_mass_is_monotone(l in 1u64..25, e in 6i32..24) {
        let loose = BigFloat::one(96) - BigFloat::from_f64(10f64.powi(-e / 2), 96).unwrap();
        let tight = BigFloat::one(96) - BigFloat::from_f64(10f64.powi(-e), 96).unwrap();
        let a = k_window(l, &loose, None).unwrap();
        let b = k_window(l, &tight, None).unwrap();
        prop_assert!(a.j_lo >= b.j_lo && a.j_hi <= b.j_hi);
        prop_assert!(b.mass.try_cmp(&a.mass).unwrap().is_ge());
        prop_assert!(b.mass.try_cmp(&QuadraticNumber::one()).unwrap().is_lt());
    }

    #[test]
    fn hurwitz_shift(s in 2u32..12, num in 1i64..200, den in 1i64..17) {
        let a = BigFloat::from_ratio(&num.into(), &den.into(), 128);
        let lhs = hurwitz_zeta(s, &a, 128).unwrap();
        let a1 = &a + &BigFloat::one(128);
        let rhs = &a.powi(-(s as i64)) + &hurwitz_zeta(s, &a1, 128).unwrap();
        let rel = ((&lhs - &rhs) / &lhs).abs().to_f64();
        prop_assert!(rel < 1e-35, "s={} a={}/{} rel={}", s, num, den, rel);
    }

    #[test]
    fn periodic_fractions_are_fixed_points(i in 1u64..40, j in 1u64..40) {
        // xi_l = 1 / (l + xi_l)
        let x = xi_single(i).value;
        prop_assert_eq!(&x * &(&qi(i as i64) + &x), qi(1));
        // xi_{i,j} = 1 / (i + 1 / (j + xi_{i,j}))
        let y = xi_pair(i, j);
        let inner = (&qi(j as i64) + &y).inv().unwrap();
        prop_assert_eq!((&qi(i as i64) + &inner).inv().unwrap(), y);
        let t = column_target(i).to_float(96).to_f64();
        prop_assert!(t > 0.0 && t < 0.5);
    }

    #[test]
    fn c_roundtrip(n in 1usize..60, c in 0.4f64..1.7) {
        // lambda from c, then c back
        let p = 160;
        let root = BigFloat::from_u64(n as u64, p).sqrt().unwrap();
        let cf = BigFloat::from_f64(c, p).unwrap();
        let mut lam = golden_pow(-2 * n as i64).to_float(p) * (BigFloat::one(p) + cf.clone() / root);
        if n % 2 == 0 {
            lam = -lam;
        }
        let back = asympt_c(n, &lam, &BigFloat::zero(p)).unwrap();
        prop_assert!((&back.value - &cf).abs().to_f64() < 1e-30);
    }

    #[test]
    fn ratios_of_geometric_sequences(num in 1i64..50, den in 51i64..200, len in 2usize..8) {
        let r = BigFloat::from_ratio(&(-num).into(), &den.into(), 128);
        let ls: Vec<_> = (1..=len as i64).map(|k| (r.powi(k), BigFloat::zero(128))).collect();
        let want = r.recip();
        for x in ratio_test(&ls).unwrap() {
            prop_assert!((&x.value - &want).abs() <= want.abs().ulp().mul_i64(8));
        }
    }

    #[test]
    fn fit_recovers_exact_expansion(d1 in -2.0f64..2.0, d2 in -2.0f64..2.0, d3 in -2.0f64..2.0) {
        let pts: Vec<(usize, f64)> = [1usize, 2, 4, 9, 16, 25, 49, 100]
            .iter()
            .map(|&n| {
                let s = 1.0 / (n as f64).sqrt();
                (n, d1 + d2 * s + d3 * s * s)
            })
            .collect();
        let fit = fit_d(&pts, 2).unwrap();
        prop_assert!((fit.d[0] - d1).abs() < 1e-9);
        prop_assert!((fit.d[1] - d2).abs() < 1e-9);
        prop_assert!((fit.d[2] - d3).abs() < 1e-9);
        prop_assert!(fit.residual < 1e-9);
    }
}

#[test]
fn kernel_block_columns_sum_to_one() {
    let m = KernelMatrix::build(160, 128);
    for l in 1..=20 {
        let s: f64 = (1..=160).map(|j| m.get(j, l).to_f64()).sum();
        assert!((s - 1.0).abs() < 1e-12, "l={l}: {s}");
        assert!(m.column_deficit(l) < 1e-12);
    }
}

#[test]
fn first_layers_exact_versus_float() {
    let ex = exact_two_layers(3, 30).unwrap();
    let sol = solve(
        3,
        &SpectralOptions {
            v_max: 2,
            ..Default::default()
        },
    )
    .unwrap();
    // W[1] = K(n, n) is window independent
    assert_eq!(ex.w1, k_coeff(3, 3));
    let w1 = sol.state.layers()[1].to_f64();
    assert!((w1 - ex.w1.to_float(128).to_f64()).abs() < 1e-15);
    // W[2] only loses the part of the kernel beyond j = 30
    let w2 = sol.state.layers()[2].to_f64();
    assert!((w2 - ex.w2.to_float(128).to_f64()).abs() < 1e-12);
}

#[test]
fn decomposition_rows_match_eigenvalues() {
    let opts = SpectralOptions {
        v_max: 6,
        ..Default::default()
    };
    let dec = decomposition(4, 7, &opts).unwrap();
    for n in 1..=4 {
        let sol = solve(n, &opts).unwrap();
        let row = dec.row_sums[n - 1].to_f64();
        let want = sol.result.lambda_partial.to_f64();
        assert!((row - want).abs() < 1e-30 + 1e-25 * want.abs(), "n={n}: {row} vs {want}");
    }
}

#[test]
fn oracle_trace_tends_to_trace_of_operator() {
    // Tr L = 0.77112552365565890931...
    let m = build_matrix(30, 128).unwrap();
    assert!((m.trace().to_f64() - 0.7711255236556589).abs() < 1e-9);
}
