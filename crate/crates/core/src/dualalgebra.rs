//! The dual scale `F_{2-m}`, its Cauchy-product algebra and Riemann
//! integrals of dual-valued paths.
//!
//! `‖b‖²_{2-m} = Σ |b_n|² (n!)^{2-m}`; the weights decay in `n` for `m > 2`.
//! Duality with `F_m` is realized through the `F_1` pairing
//! `(f, b) = Σ f_n conj(b_n) n!`, for which
//! `|(f, b)| ≤ ‖f‖_{F_m} ‖b‖_{2-m}`.
//!
//! For `q ≥ p + 1` the Cauchy product satisfies
//! `‖a * b‖_{2-q} ≤ A(q-p) ‖a‖_{2-p} ‖b‖_{2-q}` with
//! `A(d) = (Σ_n (1/n!)^d)^{1/2}`: split `(n!)^{-(q-2)} ≤ (k!)^{-(q-2)} ((n-k)!)^{-(q-2)}`
//! and apply Cauchy–Schwarz in `k`.

use num_complex::Complex64 as C64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::coeffspace::{inner_product, ln_norm_sq, norm, TaylorCoeffs, WeightIndex};
use crate::error::{Error, Result};
use crate::numeric::{ln_factorial, Neumaier};
use crate::scalar::Scalar;

/// A truncated sequence together with the level `m` of the space
/// `F_{2-m}` it is meant to live in. The level is advisory: norms can be
/// taken at any level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualSequence<T = C64> {
    pub coeffs: Vec<T>,
    pub level: u32,
}

impl<T: Scalar> DualSequence<T> {
    pub fn new(coeffs: Vec<T>, level: u32) -> Self {
        DualSequence { coeffs, level }
    }

    /// The unit sequence `e_n` at level `level`.
    pub fn unit(n: usize, level: u32) -> Self {
        let mut coeffs = vec![T::zero(); n + 1];
        coeffs[n] = T::one();
        DualSequence { coeffs, level }
    }

    pub fn coeff(&self, n: usize) -> T {
        self.coeffs.get(n).cloned().unwrap_or_else(T::zero)
    }

    /// Coefficientwise equality after dropping trailing zeros.
    pub fn same_coeffs(&self, other: &Self) -> bool {
        let len = self.coeffs.len().max(other.coeffs.len());
        (0..len).all(|n| self.coeff(n) == other.coeff(n))
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        DualSequence::new(
            (0..len).map(|n| self.coeff(n) + other.coeff(n)).collect(),
            self.level.max(other.level),
        )
    }

    pub fn scale(&self, c: &T) -> Self {
        DualSequence::new(self.coeffs.iter().map(|x| x.clone() * c.clone()).collect(), self.level)
    }
}

impl DualSequence<C64> {
    pub fn as_taylor(&self) -> TaylorCoeffs {
        TaylorCoeffs::new(self.coeffs.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualNorm {
    pub value: f64,
    /// The norm is positive but below the double range and was flushed to 0.
    pub underflow: bool,
}

fn check_level(m: u32) -> Result<()> {
    if m >= 1 {
        Ok(())
    } else {
        Err(Error::domain("dual levels need m >= 1"))
    }
}

/// `‖b‖_{2-m} = (Σ |b_n|² (n!)^{2-m})^{1/2}`, accumulated in the log domain.
pub fn dual_norm(b: &DualSequence, m: u32) -> Result<DualNorm> {
    check_level(m)?;
    let ln_sq = ln_norm_sq(&b.coeffs, WeightIndex(2 - m as i64));
    let value = (0.5 * ln_sq).exp();
    Ok(DualNorm {
        value,
        underflow: value == 0.0 && ln_sq.is_finite(),
    })
}

/// The `F_1` pairing `Σ f_n conj(b_n) n!`.
pub fn pairing(f: &TaylorCoeffs, b: &DualSequence) -> Result<C64> {
    inner_product(f, &b.as_taylor(), WeightIndex(1))
}

/// `c_n = Σ_{k=0}^{n} a_k b_{n-k}`.
pub fn convolve<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![T::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].clone() + x.clone() * y.clone();
        }
    }
    out
}

/// Cauchy product; the result sits at the larger of the two levels.
pub fn cauchy_product<T: Scalar>(a: &DualSequence<T>, b: &DualSequence<T>) -> DualSequence<T> {
    DualSequence::new(convolve(&a.coeffs, &b.coeffs), a.level.max(b.level))
}

/// `A(d) = (Σ_{n≥0} (1/n!)^d)^{1/2}` for `d ≥ 1`.
pub fn vage_constant(d: u32) -> Result<f64> {
    if d < 1 {
        return Err(Error::domain("the product bound needs q - p >= 1"));
    }
    let mut sum = Neumaier::default();
    for n in 0.. {
        let term = (-(d as f64) * ln_factorial(n)).exp();
        sum.add(term);
        if term <= 1e-18 * sum.sum() {
            break;
        }
    }
    Ok(sum.sum().sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VageReport {
    pub lhs: f64,
    pub bound: f64,
    /// `lhs / bound`.
    pub ratio: f64,
    pub holds: bool,
}

fn check_pq(p: u32, q: u32) -> Result<()> {
    check_level(p)?;
    if q < p + 1 {
        return Err(Error::domain(format!("need q >= p + 1, got p = {p}, q = {q}")));
    }
    Ok(())
}

fn report(lhs: f64, bound: f64) -> VageReport {
    VageReport {
        lhs,
        bound,
        ratio: if bound > 0.0 { lhs / bound } else { f64::INFINITY * lhs },
        holds: lhs <= bound * (1.0 + 1e-12),
    }
}

/// `‖a * b‖_{2-q} ≤ A(q-p) ‖a‖_{2-p} ‖b‖_{2-q}`.
pub fn vage_check(a: &DualSequence, b: &DualSequence, p: u32, q: u32) -> Result<VageReport> {
    check_pq(p, q)?;
    let lhs = dual_norm(&cauchy_product(a, b), q)?.value;
    let bound = vage_constant(q - p)? * dual_norm(a, p)?.value * dual_norm(b, q)?.value;
    Ok(report(lhs, bound))
}

/// The bound with the levels arranged as
/// `‖a * b‖_{2-p} ≤ A(q-p) ‖a‖_{2-q} ‖b‖_{2-p}`. This arrangement fails in
/// general (already for `a = b = 1 + z + ... + z^{19}`, `p = 1`, `q = 2`);
/// it is provided for comparison.
pub fn literal_vage_check(a: &DualSequence, b: &DualSequence, p: u32, q: u32) -> Result<VageReport> {
    check_pq(p, q)?;
    let lhs = dual_norm(&cauchy_product(a, b), p)?.value;
    let bound = vage_constant(q - p)? * dual_norm(a, q)?.value * dual_norm(b, p)?.value;
    Ok(report(lhs, bound))
}

/// Norms of one vector along
/// `‖·‖_{2-(m+1)} ≤ ‖·‖_{2-m} ≤ ‖·‖_{F_1} ≤ ‖·‖_{F_m} ≤ ‖·‖_{F_{m+1}}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GelfandChain {
    pub dual_next: f64,
    pub dual: f64,
    pub pivot: f64,
    pub primal: f64,
    pub primal_next: f64,
    pub ordered: bool,
}

pub fn gelfand_chain(f: &TaylorCoeffs, m: u32) -> Result<GelfandChain> {
    check_level(m)?;
    let m = m as i64;
    let at = |k: i64| norm(f, WeightIndex(k)).value;
    let chain = [at(1 - m), at(2 - m), at(1), at(m), at(m + 1)];
    let ordered = chain.windows(2).all(|w| w[0] <= w[1] * (1.0 + 1e-12));
    Ok(GelfandChain {
        dual_next: chain[0],
        dual: chain[1],
        pivot: chain[2],
        primal: chain[3],
        primal_next: chain[4],
        ordered,
    })
}

/// One sample `(t, b(t))` of a dual-valued path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub t: f64,
    pub coeffs: Vec<C64>,
}

fn check_grid(f_path: &[PathSample], g_path: &[PathSample]) -> Result<()> {
    if f_path.len() != g_path.len() {
        return Err(Error::input(format!(
            "paths have {} and {} samples",
            f_path.len(),
            g_path.len()
        )));
    }
    if f_path.len() < 2 {
        return Err(Error::input("paths need at least two samples"));
    }
    for (i, (a, b)) in f_path.iter().zip(g_path).enumerate() {
        if a.t != b.t {
            return Err(Error::input(format!("sample {i}: grids differ ({} vs {})", a.t, b.t)));
        }
        if i > 0 && a.t <= f_path[i - 1].t {
            return Err(Error::input(format!("sample {i}: grid is not strictly increasing")));
        }
    }
    let (first, last) = (f_path[0].t, f_path[f_path.len() - 1].t);
    if first.abs() > 1e-12 || (last - 1.0).abs() > 1e-12 {
        return Err(Error::input(format!("grid must cover [0, 1], got [{first}, {last}]")));
    }
    Ok(())
}

/// Trapezoidal approximation of `∫_0^1 f(t) * g(t) dt` with `*` the Cauchy
/// product.
pub fn riemann_integral_product(f_path: &[PathSample], g_path: &[PathSample]) -> Result<DualSequence> {
    check_grid(f_path, g_path)?;
    let products: Vec<Vec<C64>> = f_path
        .iter()
        .zip(g_path)
        .map(|(a, b)| convolve(&a.coeffs, &b.coeffs))
        .collect();
    let len = products.iter().map(Vec::len).max().unwrap_or(0);
    let mut acc = vec![C64::zero(); len];
    for i in 1..products.len() {
        let h = f_path[i].t - f_path[i - 1].t;
        for (n, slot) in acc.iter_mut().enumerate() {
            let left = products[i - 1].get(n).copied().unwrap_or_default();
            let right = products[i].get(n).copied().unwrap_or_default();
            *slot += 0.5 * h * (left + right);
        }
    }
    Ok(DualSequence::new(acc, 1))
}

/// A path `t ↦ Σ_k t^k c_k` with sequence-valued coefficients `c_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialPath {
    pub terms: Vec<Vec<C64>>,
}

impl PolynomialPath {
    pub fn at(&self, t: f64) -> Vec<C64> {
        let len = self.terms.iter().map(Vec::len).max().unwrap_or(0);
        let mut out = vec![C64::zero(); len];
        let mut power = 1.0;
        for c in &self.terms {
            for (slot, x) in out.iter_mut().zip(c) {
                *slot += x * power;
            }
            power *= t;
        }
        out
    }

    /// Samples on the uniform grid with `intervals` steps over `[0, 1]`.
    pub fn sample(&self, intervals: usize) -> Vec<PathSample> {
        (0..=intervals)
            .map(|i| {
                let t = i as f64 / intervals as f64;
                PathSample { t, coeffs: self.at(t) }
            })
            .collect()
    }

    /// `∫_0^1 self(t) * other(t) dt = Σ_{k,l} (c_k * d_l) / (k + l + 1)`.
    pub fn exact_product_integral(&self, other: &PolynomialPath) -> Vec<C64> {
        let mut out: Vec<C64> = Vec::new();
        for (k, c) in self.terms.iter().enumerate() {
            for (l, d) in other.terms.iter().enumerate() {
                let prod = convolve(c, d);
                if out.len() < prod.len() {
                    out.resize(prod.len(), C64::zero());
                }
                for (slot, x) in out.iter_mut().zip(prod) {
                    *slot += x / (k + l + 1) as f64;
                }
            }
        }
        out
    }
}

/// Observed order of the trapezoidal rule: least-squares slope of
/// `ln ‖I_h - I‖_{2-level}` against `ln h` over `h = 1/base, 1/(2 base), ...`.
pub fn refinement_order(f: &PolynomialPath, g: &PolynomialPath, level: u32, base: usize, halvings: usize) -> Result<f64> {
    if halvings < 2 || base == 0 {
        return Err(Error::input("refinement study needs base >= 1 and at least two halvings"));
    }
    let exact = f.exact_product_integral(g);
    let mut points = Vec::with_capacity(halvings);
    for j in 0..halvings {
        let n = base << j;
        let approx = riemann_integral_product(&f.sample(n), &g.sample(n))?;
        let len = approx.coeffs.len().max(exact.len());
        let diff: Vec<C64> = (0..len)
            .map(|i| approx.coeffs.get(i).copied().unwrap_or_default() - exact.get(i).copied().unwrap_or_default())
            .collect();
        let err = dual_norm(&DualSequence::new(diff, level), level)?.value;
        if err.is_nan() || err <= 0.0 {
            return Err(Error::input("trapezoidal rule is exact for these paths; no order to measure"));
        }
        points.push(((1.0 / n as f64).ln(), err.ln()));
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn seq(v: &[f64], level: u32) -> DualSequence {
        DualSequence::new(v.iter().map(|&x| c(x)).collect(), level)
    }

    #[test]
    fn dual_norm_examples() {
        let e2 = DualSequence::<C64>::unit(2, 3);
        assert!((dual_norm(&e2, 3).unwrap().value - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        for m in 1..6 {
            assert_eq!(dual_norm(&DualSequence::<C64>::unit(0, m), m).unwrap().value, 1.0);
        }
        for n in 0..30 {
            assert!((dual_norm(&DualSequence::<C64>::unit(n, 2), 2).unwrap().value - 1.0).abs() < 1e-15);
        }
        assert!(dual_norm(&e2, 0).is_err());
    }

    #[test]
    fn dual_norm_underflow_flag() {
        let b = DualSequence::<C64>::unit(170, 12);
        let r = dual_norm(&b, 12).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.underflow);
        assert!(!dual_norm(&DualSequence::new(vec![], 3), 3).unwrap().underflow);
    }

    #[test]
    fn pairing_examples() {
        let z3 = TaylorCoeffs::<C64>::monomial(3);
        assert!((pairing(&z3, &DualSequence::unit(3, 2)).unwrap().re - 6.0).abs() < 1e-14);
        assert_eq!(pairing(&z3, &DualSequence::unit(2, 2)).unwrap(), C64::zero());
        let f = TaylorCoeffs::new(vec![c(1.0), c(1.0)]);
        assert_eq!(pairing(&f, &seq(&[1.0, 1.0], 2)).unwrap(), c(2.0));
    }

    #[test]
    fn cauchy_examples() {
        let one_z = seq(&[1.0, 1.0], 1);
        assert_eq!(cauchy_product(&one_z, &one_z).coeffs, vec![c(1.0), c(2.0), c(1.0)]);
        let a = seq(&[0.5, -2.0, 3.0], 2);
        assert!(cauchy_product(&a, &DualSequence::unit(0, 1)).same_coeffs(&a));
        let e1 = DualSequence::<BigInt>::unit(1, 1);
        assert!(cauchy_product(&e1, &e1).same_coeffs(&DualSequence::unit(2, 1)));
        assert_eq!(cauchy_product(&a, &DualSequence::unit(0, 4)).level, 4);
    }

    #[test]
    fn vage_constant_examples() {
        assert!((vage_constant(1).unwrap() - std::f64::consts::E.sqrt()).abs() < 1e-15);
        assert!((vage_constant(2).unwrap() - 2.279_585_302_336_067f64.sqrt()).abs() < 1e-14);
        // n = 0 and n = 1 both contribute 1; the rest is 2^{-50} + ...
        let a50 = vage_constant(50).unwrap();
        assert!((a50 - (2.0 + 2f64.powi(-50)).sqrt()).abs() < 1e-15);
        assert!(vage_constant(0).is_err());
    }

    #[test]
    fn vage_examples() {
        let e0 = DualSequence::<C64>::unit(0, 1);
        for (p, q) in [(1, 2), (1, 4), (3, 5)] {
            let r = vage_check(&e0, &e0, p, q).unwrap();
            assert_eq!(r.lhs, 1.0);
            assert!(r.holds && r.bound >= 1.0);
        }
        let ones = seq(&[1.0; 20], 1);
        assert!(vage_check(&ones, &ones, 1, 2).unwrap().holds);
        assert!(!literal_vage_check(&ones, &ones, 1, 2).unwrap().holds);
        assert!(vage_check(&e0, &e0, 2, 2).is_err());
    }

    #[test]
    fn gelfand_chain_orders_norms() {
        let f = TaylorCoeffs::new(vec![c(0.3), C64::new(1.0, -2.0), c(0.0), c(4.0), c(-0.01)]);
        for m in 1..5 {
            assert!(gelfand_chain(&f, m).unwrap().ordered);
        }
    }

    #[test]
    fn riemann_examples() {
        let a = vec![c(1.0), c(2.0)];
        let b = vec![c(-1.0), c(0.5)];
        let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let constant = |v: &Vec<C64>| -> Vec<PathSample> {
            grid.iter().map(|&t| PathSample { t, coeffs: v.clone() }).collect()
        };
        let r = riemann_integral_product(&constant(&a), &constant(&b)).unwrap();
        let expect = convolve(&a, &b);
        for (x, y) in r.coeffs.iter().zip(&expect) {
            assert!((x - y).norm() < 1e-14);
        }

        let f = PolynomialPath { terms: vec![vec![], vec![c(1.0)]] };
        let g = PolynomialPath { terms: vec![vec![c(1.0)]] };
        let r = riemann_integral_product(&f.sample(16), &g.sample(16)).unwrap();
        assert!((r.coeffs[0].re - 0.5).abs() < 1e-14);

        let f = PolynomialPath { terms: vec![vec![c(1.0)], vec![c(0.0), c(1.0)]] };
        let r = riemann_integral_product(&f.sample(8), &g.sample(8)).unwrap();
        assert!((r.coeffs[0].re - 1.0).abs() < 1e-14 && (r.coeffs[1].re - 0.5).abs() < 1e-14);
    }

    #[test]
    fn riemann_rejects_bad_grids() {
        let p = |ts: &[f64]| -> Vec<PathSample> {
            ts.iter().map(|&t| PathSample { t, coeffs: vec![c(1.0)] }).collect()
        };
        assert!(riemann_integral_product(&p(&[0.0, 0.5, 1.0]), &p(&[0.0, 0.4, 1.0])).is_err());
        assert!(riemann_integral_product(&p(&[0.0, 1.0]), &p(&[0.0, 0.5, 1.0])).is_err());
        assert!(riemann_integral_product(&p(&[0.0, 0.6, 0.5, 1.0]), &p(&[0.0, 0.6, 0.5, 1.0])).is_err());
        assert!(riemann_integral_product(&p(&[0.0, 0.5]), &p(&[0.0, 0.5])).is_err());
    }

    #[test]
    fn trapezoid_is_second_order() {
        let f = PolynomialPath {
            terms: vec![vec![c(1.0), c(0.5)], vec![c(0.0), c(-1.0)], vec![], vec![c(2.0)]],
        };
        let g = PolynomialPath { terms: vec![vec![c(0.3)], vec![], vec![c(1.0), c(1.0)]] };
        let order = refinement_order(&f, &g, 2, 8, 6).unwrap();
        assert!((1.9..=2.1).contains(&order), "{order}");
    }
}
