//! Creation and annihilation operators on coefficient vectors.
//!
//! `a = M_z` shifts coefficients up, `b = d/dz` differentiates. In `F_m` the
//! adjoint of `a` is `a* = (ba)^{m-1} b`, which acts on coefficients as
//! `(a* f)_n = (n+1)^m f_{n+1}`; the adjoint of `b` is
//! `(b* f)_{k+1} = f_k / (k+1)^{m-1}`.
//!
//! Everything here is generic over [`Scalar`], so the algebraic identities
//! can be checked in exact integer or rational arithmetic and the norm
//! identities in floating point.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::coeffspace::{ln_norm_sq, TaylorCoeffs, WeightIndex};
use crate::error::{Error, Result};
use crate::numeric::{ln_factorial, LogSumExp, Neumaier, LN_MAX};
use crate::scalar::{FieldScalar, Scalar};
use crate::stirling::stirling_s2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Letter {
    /// Multiplication by `z`.
    A,
    /// Differentiation.
    B,
}

/// A product of `A` and `B` letters in operator order: the last letter
/// acts first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct OperatorWord {
    letters: Vec<Letter>,
}

impl OperatorWord {
    pub fn new(letters: Vec<Letter>) -> Self {
        OperatorWord { letters }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn count(&self, letter: Letter) -> usize {
        self.letters.iter().filter(|&&l| l == letter).count()
    }

    /// `(AB)^k`, the `k`-th power of the number operator.
    pub fn number_power(k: usize) -> Self {
        OperatorWord::new([Letter::A, Letter::B].repeat(k))
    }

    /// `(BA)^{m-1} B`, the adjoint of `A` in `F_m`.
    pub fn a_star(m: u32) -> Self {
        let mut letters = [Letter::B, Letter::A].repeat(m.saturating_sub(1) as usize);
        letters.push(Letter::B);
        OperatorWord::new(letters)
    }

    /// `word` followed by `other` in operator order (`self · other`).
    pub fn then(&self, other: &OperatorWord) -> Self {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        OperatorWord::new(letters)
    }

    /// `self^k`.
    pub fn pow(&self, k: usize) -> Self {
        OperatorWord::new(self.letters.repeat(k))
    }
}

impl FromStr for OperatorWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                'A' | 'a' => Ok(Letter::A),
                'B' | 'b' => Ok(Letter::B),
                other => Err(Error::input(format!("operator word letter must be A or B, got {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(OperatorWord::new)
    }
}

impl fmt::Display for OperatorWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            f.write_str(match l {
                Letter::A => "A",
                Letter::B => "B",
            })?;
        }
        Ok(())
    }
}

fn check_m(m: WeightIndex) -> Result<u32> {
    u32::try_from(m.m())
        .ok()
        .filter(|&m| m >= 1)
        .ok_or_else(|| Error::domain(format!("operator adjoints need m >= 1, got {}", m.m())))
}

/// `a f = z f`. The truncation degree grows by one.
pub fn apply_a<T: Scalar>(f: &TaylorCoeffs<T>) -> TaylorCoeffs<T> {
    let mut coeffs = Vec::with_capacity(f.len() + 1);
    coeffs.push(T::zero());
    coeffs.extend_from_slice(f.coeffs());
    TaylorCoeffs::new(coeffs)
}

/// `b f = f'`.
pub fn apply_b<T: Scalar>(f: &TaylorCoeffs<T>) -> TaylorCoeffs<T> {
    TaylorCoeffs::new(
        f.coeffs()
            .iter()
            .enumerate()
            .skip(1)
            .map(|(n, c)| T::from_u64(n as u64) * c.clone())
            .collect(),
    )
}

pub fn apply_letter<T: Scalar>(letter: Letter, f: &TaylorCoeffs<T>) -> TaylorCoeffs<T> {
    match letter {
        Letter::A => apply_a(f),
        Letter::B => apply_b(f),
    }
}

/// Applies the word right to left.
pub fn apply_word<T: Scalar>(word: &OperatorWord, f: &TaylorCoeffs<T>) -> TaylorCoeffs<T> {
    word.letters()
        .iter()
        .rev()
        .fold(f.clone(), |g, &l| apply_letter(l, &g))
}

/// `a^n b^n f`.
fn a_pow_b_pow<T: Scalar>(n: usize, f: &TaylorCoeffs<T>) -> TaylorCoeffs<T> {
    let mut g = f.clone();
    for _ in 0..n {
        g = apply_b(&g);
    }
    for _ in 0..n {
        g = apply_a(&g);
    }
    g
}

/// `(a* f)_n = (n+1)^m f_{n+1}` in `F_m`.
pub fn apply_a_star<T: Scalar>(f: &TaylorCoeffs<T>, m: WeightIndex) -> Result<TaylorCoeffs<T>> {
    let m = check_m(m)?;
    Ok(TaylorCoeffs::new(
        f.coeffs()
            .iter()
            .enumerate()
            .skip(1)
            .map(|(n, c)| power::<T>(n as u64, m) * c.clone())
            .collect(),
    ))
}

/// `a* f` as the word `(BA)^{m-1} B`.
pub fn apply_a_star_word<T: Scalar>(f: &TaylorCoeffs<T>, m: WeightIndex) -> Result<TaylorCoeffs<T>> {
    let m = check_m(m)?;
    Ok(apply_word(&OperatorWord::a_star(m), f))
}

/// `a* f` as `b Σ_{n=0}^{m-1} S(m-1, n) a^n b^n f`.
pub fn apply_a_star_stirling<T: Scalar>(f: &TaylorCoeffs<T>, m: WeightIndex) -> Result<TaylorCoeffs<T>> {
    let m = check_m(m)? as usize;
    let mut inner = TaylorCoeffs::<T>::zero();
    for n in 0..m {
        let s = stirling_s2(m - 1, n);
        if s == BigUint::default() {
            continue;
        }
        inner = inner.add(&a_pow_b_pow(n, f).scale(&T::from_biguint(&s)));
    }
    Ok(apply_b(&inner))
}

/// `(b* f)_{k+1} = f_k / (k+1)^{m-1}` in `F_m`.
pub fn apply_b_star<T: FieldScalar>(f: &TaylorCoeffs<T>, m: WeightIndex) -> Result<TaylorCoeffs<T>> {
    let m = check_m(m)?;
    let mut coeffs = Vec::with_capacity(f.len() + 1);
    coeffs.push(T::zero());
    for (k, c) in f.coeffs().iter().enumerate() {
        coeffs.push(c.clone() / power::<T>(k as u64 + 1, m - 1));
    }
    Ok(TaylorCoeffs::new(coeffs))
}

fn power<T: Scalar>(base: u64, exp: u32) -> T {
    let b = T::from_u64(base);
    (0..exp).fold(T::one(), |acc, _| acc * b.clone())
}

/// The domain functional `Σ |f_n|^2 (n!)^m n^m` of `a` in `F_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DomainReport {
    pub functional: f64,
    pub ln_functional: f64,
    /// Always true for truncated elements.
    pub in_domain: bool,
}

/// Computes the domain functional in the log domain. A value beyond double
/// range is reported as a range error naming the dominant index.
pub fn in_domain(f: &TaylorCoeffs, m: WeightIndex) -> Result<DomainReport> {
    let mut lse = LogSumExp::default();
    let mut top = (0usize, f64::NEG_INFINITY);
    for (n, c) in f.coeffs().iter().enumerate().skip(1) {
        let mag = c.norm();
        if mag == 0.0 {
            continue;
        }
        let term = 2.0 * mag.ln() + m.m() as f64 * (ln_factorial(n) + (n as f64).ln());
        if term > top.1 {
            top = (n, term);
        }
        lse.add(term);
    }
    let ln_functional = lse.ln_sum();
    if ln_functional > LN_MAX {
        return Err(Error::Range {
            index: top.0,
            log_magnitude: ln_functional,
        });
    }
    Ok(DomainReport {
        functional: ln_functional.exp(),
        ln_functional,
        in_domain: true,
    })
}

/// `[a*, a] f` computed directly as `a*(a f) - a(a* f)` and checked against
/// `f + Σ_{n=1}^{m-1} (n+1) S(m, n+1) a^n b^n f`.
pub fn commutator_apply<T: Scalar>(f: &TaylorCoeffs<T>, m: WeightIndex) -> Result<TaylorCoeffs<T>> {
    let direct = commutator_direct(f, m)?;
    let formula = commutator_formula(f, m)?;
    let len = direct.len().max(formula.len());
    let agree = (0..len).all(|n| direct.coeff(n).agrees_with(&formula.coeff(n)));
    if !agree {
        return Err(Error::Consistency(format!(
            "commutator routes disagree for m = {}: {:?} vs {:?}",
            m.m(),
            direct.coeffs(),
            formula.coeffs()
        )));
    }
    Ok(direct)
}

pub fn commutator_direct<T: Scalar>(f: &TaylorCoeffs<T>, m: WeightIndex) -> Result<TaylorCoeffs<T>> {
    let lhs = apply_a_star(&apply_a(f), m)?;
    let rhs = apply_a(&apply_a_star(f, m)?);
    Ok(lhs.sub(&rhs))
}

pub fn commutator_formula<T: Scalar>(f: &TaylorCoeffs<T>, m: WeightIndex) -> Result<TaylorCoeffs<T>> {
    let mu = check_m(m)? as usize;
    let mut acc = f.clone();
    for n in 1..mu {
        let c = stirling_s2(mu, n + 1) * BigUint::from(n + 1);
        acc = acc.add(&a_pow_b_pow(n, f).scale(&T::from_biguint(&c)));
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormIdentity {
    /// `‖a f‖^2`.
    pub lhs: f64,
    /// `[‖a* f‖^2, ‖f‖^2, term_1, ..., term_{m-1}]` with
    /// `term_k = C(m, k) Σ |f_n|^2 (n!)^m n^k`.
    pub rhs_terms: Vec<f64>,
    pub rel_err: f64,
}

fn checked_exp(ln: f64, index: usize) -> Result<f64> {
    if ln > LN_MAX {
        return Err(Error::Range {
            index,
            log_magnitude: ln,
        });
    }
    Ok(ln.exp())
}

/// `‖a f‖^2_{F_m} = ‖a* f‖^2 + ‖f‖^2 + Σ_{k=1}^{m-1} C(m,k) Σ_n |f_n|^2 (n!)^m n^k`.
pub fn norm_identity_report(f: &TaylorCoeffs, m: WeightIndex) -> Result<NormIdentity> {
    let mu = check_m(m)?;
    let lhs = checked_exp(ln_norm_sq(apply_a(f).coeffs(), m), f.truncation_degree() + 1)?;
    let mut rhs_terms = vec![
        checked_exp(ln_norm_sq(apply_a_star(f, m)?.coeffs(), m), f.truncation_degree())?,
        checked_exp(ln_norm_sq(f.coeffs(), m), f.truncation_degree())?,
    ];
    for k in 1..mu {
        let mut lse = LogSumExp::default();
        for (n, c) in f.coeffs().iter().enumerate().skip(1) {
            if *c != C64::new(0.0, 0.0) {
                lse.add(2.0 * c.norm().ln() + m.ln_weight(n) + k as f64 * (n as f64).ln());
            }
        }
        let ln_binom = ln_factorial(mu as usize) - ln_factorial(k as usize) - ln_factorial((mu - k) as usize);
        rhs_terms.push(checked_exp(lse.ln_sum() + ln_binom, f.truncation_degree())?);
    }
    let mut sum = Neumaier::default();
    for t in &rhs_terms {
        sum.add(*t);
    }
    let total = sum.sum();
    let rel_err = if lhs == 0.0 && total == 0.0 {
        0.0
    } else {
        (lhs - total).abs() / lhs.abs().max(total.abs())
    };
    Ok(NormIdentity { lhs, rhs_terms, rel_err })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn ints(v: &[i64]) -> TaylorCoeffs<BigInt> {
        TaylorCoeffs::new(v.iter().map(|&x| BigInt::from(x)).collect())
    }

    #[test]
    fn a_and_b_examples() {
        assert_eq!(apply_a(&ints(&[0, 0, 1])), ints(&[0, 0, 0, 1]));
        assert_eq!(apply_a(&ints(&[])), ints(&[]));
        assert_eq!(apply_a(&ints(&[1, 2])), ints(&[0, 1, 2]));
        assert_eq!(apply_b(&ints(&[0, 0, 0, 1])), ints(&[0, 0, 3]));
        assert_eq!(apply_b(&ints(&[7])), ints(&[]));
        assert_eq!(apply_b(&ints(&[1, 1, 1])), ints(&[1, 2]));
    }

    #[test]
    fn word_examples() {
        let ba: OperatorWord = "BA".parse().unwrap();
        let ab: OperatorWord = "AB".parse().unwrap();
        for n in 0..8 {
            let f = TaylorCoeffs::<BigInt>::monomial(n);
            let diff = apply_word(&ba, &f).sub(&apply_word(&ab, &f));
            assert_eq!(diff, f);
        }
        let bab: OperatorWord = "BAB".parse().unwrap();
        assert_eq!(apply_word(&bab, &TaylorCoeffs::<BigInt>::monomial(3)), ints(&[0, 0, 9]));
        let empty: OperatorWord = "".parse().unwrap();
        assert_eq!(apply_word(&empty, &ints(&[4, 5])), ints(&[4, 5]));
        assert!("BAX".parse::<OperatorWord>().is_err());
        assert_eq!(OperatorWord::a_star(2).to_string(), "BAB");
        assert_eq!(OperatorWord::number_power(2).to_string(), "ABAB");
    }

    #[test]
    fn word_degree_bound() {
        let w: OperatorWord = "AABAB".parse().unwrap();
        let f = ints(&[1, 2, 3, 4]);
        assert!(apply_word(&w, &f).truncation_degree() <= f.truncation_degree() + w.count(Letter::A));
    }

    #[test]
    fn a_star_examples() {
        let z3 = TaylorCoeffs::<BigInt>::monomial(3);
        assert_eq!(apply_a_star(&z3, WeightIndex(2)).unwrap(), ints(&[0, 0, 9]));
        assert_eq!(apply_a_star(&ints(&[0, 1]), WeightIndex(1)).unwrap(), ints(&[1]));
        assert_eq!(apply_a_star(&ints(&[5]), WeightIndex(4)).unwrap(), ints(&[]));
        assert!(apply_a_star(&z3, WeightIndex(0)).is_err());
    }

    #[test]
    fn a_star_three_routes_agree() {
        for m in 1..=8 {
            for d in 0..=20 {
                let f = TaylorCoeffs::<BigInt>::monomial(d);
                let direct = apply_a_star(&f, WeightIndex(m)).unwrap();
                assert_eq!(direct, apply_a_star_word(&f, WeightIndex(m)).unwrap(), "m={m} d={d}");
                assert_eq!(direct, apply_a_star_stirling(&f, WeightIndex(m)).unwrap(), "m={m} d={d}");
            }
        }
    }

    #[test]
    fn b_star_examples() {
        let q = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        let one = TaylorCoeffs::new(vec![q(1, 1)]);
        assert_eq!(apply_b_star(&one, WeightIndex(1)).unwrap(), TaylorCoeffs::new(vec![q(0, 1), q(1, 1)]));
        let z = TaylorCoeffs::new(vec![q(0, 1), q(1, 1)]);
        assert_eq!(
            apply_b_star(&z, WeightIndex(2)).unwrap(),
            TaylorCoeffs::new(vec![q(0, 1), q(0, 1), q(1, 2)])
        );
        let zero = TaylorCoeffs::<BigRational>::zero();
        assert!(apply_b_star(&zero, WeightIndex(3)).unwrap().is_zero());
    }

    #[test]
    fn domain_functional_examples() {
        let z2 = TaylorCoeffs::<C64>::monomial(2);
        let r = in_domain(&z2, WeightIndex(2)).unwrap();
        assert!((r.functional - 16.0).abs() < 1e-12 && r.in_domain);
        assert_eq!(in_domain(&TaylorCoeffs::zero(), WeightIndex(2)).unwrap().functional, 0.0);
        assert_eq!(in_domain(&TaylorCoeffs::monomial(0), WeightIndex(5)).unwrap().functional, 0.0);
        let big = TaylorCoeffs::<C64>::monomial(300);
        assert!(matches!(in_domain(&big, WeightIndex(3)), Err(Error::Range { index: 300, .. })));
    }

    #[test]
    fn commutator_examples() {
        for n in 0..6 {
            let f = TaylorCoeffs::<BigInt>::monomial(n);
            assert_eq!(commutator_apply(&f, WeightIndex(1)).unwrap(), f);
        }
        let z2 = TaylorCoeffs::<BigInt>::monomial(2);
        assert_eq!(commutator_apply(&z2, WeightIndex(2)).unwrap(), ints(&[0, 0, 5]));
        let z3 = TaylorCoeffs::<BigInt>::monomial(3);
        assert_eq!(commutator_apply(&z3, WeightIndex(3)).unwrap(), ints(&[0, 0, 0, 37]));
    }

    #[test]
    fn commutator_floating_point() {
        let f = TaylorCoeffs::new(vec![c(0.5), C64::new(-1.0, 2.0), c(3.0)]);
        let got = commutator_apply(&f, WeightIndex(4)).unwrap();
        // ((n+1)^4 - n^4) f_n
        assert_eq!(got.coeffs()[1], C64::new(-15.0, 30.0));
    }

    #[test]
    fn norm_identity_examples() {
        let r = norm_identity_report(&TaylorCoeffs::monomial(0), WeightIndex(2)).unwrap();
        assert_eq!(r.lhs, 1.0);
        assert_eq!(r.rhs_terms, vec![0.0, 1.0, 0.0]);
        let r = norm_identity_report(&TaylorCoeffs::monomial(1), WeightIndex(1)).unwrap();
        assert!((r.lhs - 2.0).abs() < 1e-14);
        assert_eq!(r.rhs_terms.len(), 2);
        let r = norm_identity_report(&TaylorCoeffs::monomial(2), WeightIndex(2)).unwrap();
        assert!((r.lhs - 36.0).abs() < 1e-12);
        let expect = [16.0, 4.0, 16.0];
        for (got, want) in r.rhs_terms.iter().zip(expect) {
            assert!((got - want).abs() < 1e-12, "{:?}", r.rhs_terms);
        }
        assert!(r.rel_err < 1e-14);
    }

    #[test]
    fn norm_identity_overflow_is_range_error() {
        let f = TaylorCoeffs::<C64>::monomial(200);
        assert!(matches!(norm_identity_report(&f, WeightIndex(3)), Err(Error::Range { .. })));
    }
}
