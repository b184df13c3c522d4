use std::sync::{Arc, OnceLock};

use approx::assert_relative_eq;
use nalgebra::DMatrix;
use num_bigint::{BigInt, BigUint};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

use fockspace::bargmann::{bargmann_forward, bargmann_inverse, hermite_fns, L2Element, HERMITE_BOUND};
use fockspace::coeffspace::{eval_point, inner_product, kernel_eval, kernel_section, norm, TaylorCoeffs, WeightIndex};
use fockspace::dualalgebra::{cauchy_product, gelfand_chain, vage_check, DualSequence};
use fockspace::operators::{
    apply_a, apply_a_star, apply_a_star_stirling, apply_a_star_word, apply_b, apply_b_star, apply_word, OperatorWord,
};
use fockspace::radialkernel::{DirectKernel, LogGrid, QuadratureConfig, RadialKernel, RadialKernelTable};
use fockspace::stirling::stirling_s2;

fn c64() -> impl Strategy<Value = C64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| C64::new(re, im))
}

fn poly(max_len: usize) -> impl Strategy<Value = TaylorCoeffs> {
    prop::collection::vec(c64(), 1..=max_len).prop_map(TaylorCoeffs::new)
}

fn int_poly(max_len: usize) -> impl Strategy<Value = TaylorCoeffs<BigInt>> {
    prop::collection::vec(-50i64..=50, 1..=max_len).prop_map(|v| TaylorCoeffs::new(v.into_iter().map(BigInt::from).collect()))
}

fn int_seq(max_len: usize) -> impl Strategy<Value = DualSequence<BigInt>> {
    prop::collection::vec(-9i64..=9, 1..=max_len)
        .prop_map(|v| DualSequence::new(v.into_iter().map(BigInt::from).collect(), 1))
}

fn point(r_max: f64) -> impl Strategy<Value = C64> {
    (0.0..r_max, 0.0..std::f64::consts::TAU).prop_map(|(r, th)| C64::from_polar(r, th))
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(f64::MIN_POSITIVE)
}

/// Bell numbers from the Bell triangle.
fn bell(k: usize) -> BigUint {
    let mut row = vec![BigUint::from(1u32)];
    for _ in 0..k {
        let mut next = vec![row.last().unwrap().clone()];
        for x in &row {
            let v = next.last().unwrap() + x;
            next.push(v);
        }
        row = next;
    }
    row[0].clone()
}

fn k2_table() -> &'static (RadialKernelTable, Arc<dyn RadialKernel>) {
    static TABLE: OnceLock<(RadialKernelTable, Arc<dyn RadialKernel>)> = OnceLock::new();
    TABLE.get_or_init(|| {
        let exact: Arc<dyn RadialKernel> = Arc::new(DirectKernel::new(2, QuadratureConfig::default()).unwrap());
        let table = RadialKernelTable::build(exact.clone(), LogGrid::default()).unwrap();
        (table, exact)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn trailing_zeros_do_not_change_equality(f in poly(12), pad in 0usize..5) {
        let mut padded = f.coeffs().to_vec();
        padded.extend(std::iter::repeat_n(C64::new(0.0, 0.0), pad));
        prop_assert_eq!(TaylorCoeffs::new(padded), f);
    }

    #[test]
    fn inner_product_is_hermitian(f in poly(30), g in poly(30), m in -3i64..=6) {
        let w = WeightIndex(m);
        let fg = inner_product(&f, &g, w).unwrap();
        let gf = inner_product(&g, &f, w).unwrap();
        prop_assert!(rel(fg, gf.conj()) < 1e-13);
        let ff = inner_product(&f, &f, w).unwrap();
        prop_assert!(ff.im.abs() <= 1e-13 * ff.re);
        assert_relative_eq!(ff.re.sqrt(), norm(&f, w).value, max_relative = 1e-13);
    }

    #[test]
    fn monomials_are_orthogonal(i in 0usize..40, j in 0usize..40, m in 1i64..=5) {
        let v = inner_product(&TaylorCoeffs::monomial(i), &TaylorCoeffs::monomial(j), WeightIndex(m)).unwrap();
        if i == j {
            let fact: f64 = (1..=i).map(|k| k as f64).product();
            assert_relative_eq!(v.re, fact.powi(m as i32), max_relative = 1e-14);
        } else {
            prop_assert_eq!(v, C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn kernel_section_matches_series(z in point(2.0), w in point(2.0), m in 1i64..=6) {
        let series = kernel_eval(WeightIndex(m), z, w, 1e-16).unwrap();
        let section = kernel_section(WeightIndex(m), w, 80).unwrap();
        prop_assert!(rel(series, eval_point(&section, z)) < 1e-13);
    }

    #[test]
    fn kernel_gram_matrix_is_psd(pts in prop::collection::vec(point(1.5), 2..6), m in 1i64..=4) {
        let n = pts.len();
        let gram = DMatrix::from_fn(n, n, |i, j| kernel_eval(WeightIndex(m), pts[i], pts[j], 1e-16).unwrap());
        let eig = gram.clone().symmetric_eigenvalues();
        let scale = gram.diagonal().iter().map(|d| d.re).fold(0.0, f64::max);
        prop_assert!(eig.iter().all(|&l| l >= -1e-12 * scale), "{:?}", eig);
    }

    #[test]
    fn stirling_rows_sum_to_bell(k in 0usize..40) {
        let row: BigUint = (0..=k).map(|n| stirling_s2(k, n)).sum();
        prop_assert_eq!(row, bell(k));
    }

    #[test]
    fn canonical_commutation(f in int_poly(25)) {
        let ba: OperatorWord = "BA".parse().unwrap();
        let ab: OperatorWord = "AB".parse().unwrap();
        prop_assert_eq!(apply_word(&ba, &f).sub(&apply_word(&ab, &f)), f);
    }

    #[test]
    fn a_star_forms_agree(f in int_poly(20), m in 1i64..=7) {
        let w = WeightIndex(m);
        let direct = apply_a_star(&f, w).unwrap();
        prop_assert_eq!(&direct, &apply_a_star_word(&f, w).unwrap());
        prop_assert_eq!(&direct, &apply_a_star_stirling(&f, w).unwrap());
    }

    #[test]
    fn word_composition(f in int_poly(15), u in "[AB]{0,6}", v in "[AB]{0,6}") {
        let (u, v): (OperatorWord, OperatorWord) = (u.parse().unwrap(), v.parse().unwrap());
        prop_assert_eq!(apply_word(&u.then(&v), &f), apply_word(&u, &apply_word(&v, &f)));
    }

    #[test]
    fn adjoint_pairs(f in poly(30), g in poly(30), m in 1i64..=5) {
        let w = WeightIndex(m);
        let a = (inner_product(&apply_a(&f), &g, w).unwrap(), inner_product(&f, &apply_a_star(&g, w).unwrap(), w).unwrap());
        let b = (inner_product(&apply_b(&f), &g, w).unwrap(), inner_product(&f, &apply_b_star(&g, w).unwrap(), w).unwrap());
        prop_assert!(rel(a.0, a.1) < 1e-12);
        prop_assert!(rel(b.0, b.1) < 1e-12);
    }

    #[test]
    fn bargmann_is_linear_and_invertible(c in prop::collection::vec(c64(), 1..60), s in c64(), m in 1u32..=5) {
        let g = L2Element::new(c.clone());
        let scaled = L2Element::new(c.iter().map(|x| x * s).collect());
        let f = bargmann_forward(&g, m).unwrap();
        let fs = bargmann_forward(&scaled, m).unwrap();
        for (a, b) in f.coeffs().iter().zip(fs.coeffs()) {
            prop_assert!((a * s - b).norm() <= 1e-15 * b.norm().max(1e-300) + 1e-300);
        }
        let back = bargmann_inverse(&f, m).unwrap();
        for (a, b) in back.hermite_coeffs.iter().zip(&c) {
            prop_assert!(rel(*a, *b) < 1e-13);
        }
    }

    #[test]
    fn hermite_functions_bounded(n in 0usize..300, t in -40.0f64..40.0) {
        let max = hermite_fns(n, t).into_iter().fold(0.0f64, |a, v| a.max(v.abs()));
        prop_assert!(max < HERMITE_BOUND);
    }

    #[test]
    fn cauchy_product_is_commutative_and_associative(a in int_seq(10), b in int_seq(10), c in int_seq(10)) {
        prop_assert!(cauchy_product(&a, &b).same_coeffs(&cauchy_product(&b, &a)));
        prop_assert!(cauchy_product(&cauchy_product(&a, &b), &c).same_coeffs(&cauchy_product(&a, &cauchy_product(&b, &c))));
    }

    #[test]
    fn norms_increase_along_the_chain(f in poly(40), m in 1u32..=5) {
        prop_assert!(gelfand_chain(&f, m).unwrap().ordered);
    }

    #[test]
    fn product_bound(a in prop::collection::vec(c64(), 1..20), b in prop::collection::vec(c64(), 1..20),
                     p in 1u32..=3, d in 1u32..=3) {
        let q = p + d;
        let r = vage_check(&DualSequence::new(a, p), &DualSequence::new(b, q), p, q).unwrap();
        prop_assert!(r.holds, "{:?}", r);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn table_interpolates_exact_kernel(u in -18.0f64..18.0) {
        let (table, exact) = k2_table();
        let x = u.exp();
        let (t, e) = (table.ln_eval(x).unwrap(), exact.ln_eval(x).unwrap());
        prop_assert!((t - e).abs() < 1e-8, "x={x}: {t} vs {e}");
    }
}
