//! Coefficient-space model of the generalized Fock spaces `F_m`.
//!
//! An element of `F_m` is a Taylor series `f(z) = Σ f_n z^n` with
//! `Σ |f_n|^2 (n!)^m < ∞`. The inner product is
//! `⟨f, g⟩_m = Σ f_n conj(g_n) (n!)^m`, the reproducing kernel is
//! `k_m(z, w) = Σ (z conj(w))^n / (n!)^m`, and `{z^n / (n!)^{m/2}}` is an
//! orthonormal basis.
//!
//! Weights `(n!)^m` are never formed directly: they live in the log domain as
//! `m · ln(n!)`, since they overflow doubles around `n ≈ 170 / m`.

use num_complex::Complex64 as C64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{factorial_f64, ln_factorial, ComplexNeumaier, LogSumExp, LN_MAX};
use crate::scalar::Scalar;

/// A truncated entire function `f_0 + f_1 z + ... + f_N z^N`.
///
/// Equality ignores trailing zero coefficients.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaylorCoeffs<T = C64> {
    coeffs: Vec<T>,
}

impl<T: Scalar> TaylorCoeffs<T> {
    pub fn new(coeffs: Vec<T>) -> Self {
        TaylorCoeffs { coeffs }
    }

    pub fn zero() -> Self {
        TaylorCoeffs { coeffs: Vec::new() }
    }

    /// `z^n`.
    pub fn monomial(n: usize) -> Self {
        let mut coeffs = vec![T::zero(); n + 1];
        coeffs[n] = T::one();
        TaylorCoeffs { coeffs }
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    /// Coefficient of `z^n`, zero past the stored range.
    pub fn coeff(&self, n: usize) -> T {
        self.coeffs.get(n).cloned().unwrap_or_else(T::zero)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Index of the last stored coefficient (0 for an empty vector).
    pub fn truncation_degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Highest index with a nonzero coefficient.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| !c.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.degree().is_none()
    }

    /// Strips trailing zero coefficients.
    pub fn normalize(&mut self) {
        let keep = self.degree().map_or(0, |d| d + 1);
        self.coeffs.truncate(keep);
    }

    pub fn normalized(mut self) -> Self {
        self.normalize();
        self
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.len().max(other.len());
        TaylorCoeffs::new((0..len).map(|n| self.coeff(n) + other.coeff(n)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let len = self.len().max(other.len());
        TaylorCoeffs::new((0..len).map(|n| self.coeff(n) - other.coeff(n)).collect())
    }

    pub fn scale(&self, c: &T) -> Self {
        TaylorCoeffs::new(self.coeffs.iter().map(|x| x.clone() * c.clone()).collect())
    }
}

impl<T: Scalar> PartialEq for TaylorCoeffs<T> {
    fn eq(&self, other: &Self) -> bool {
        let a = self.degree().map_or(0, |d| d + 1);
        let b = other.degree().map_or(0, |d| d + 1);
        a == b && self.coeffs[..a] == other.coeffs[..b]
    }
}

impl<T: Scalar> From<Vec<T>> for TaylorCoeffs<T> {
    fn from(coeffs: Vec<T>) -> Self {
        TaylorCoeffs::new(coeffs)
    }
}

/// Selects the space `F_m`; `m` may be any integer (negative for duals).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WeightIndex(pub i64);

impl WeightIndex {
    pub fn m(self) -> i64 {
        self.0
    }

    /// `ln((n!)^m) = m · ln(n!)`.
    pub fn ln_weight(self, n: usize) -> f64 {
        if n < 2 {
            0.0
        } else {
            self.0 as f64 * ln_factorial(n)
        }
    }

    /// `(n!)^m` as a double; exact for small values, `exp` of the log
    /// weight once `n!` itself is out of range.
    pub fn weight(self, n: usize) -> f64 {
        match (factorial_f64(n), i32::try_from(self.0)) {
            (Some(f), Ok(m)) => f.powi(m),
            _ => self.ln_weight(n).exp(),
        }
    }
}

impl From<i64> for WeightIndex {
    fn from(m: i64) -> Self {
        WeightIndex(m)
    }
}

/// A norm carried in the log domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Norm {
    pub value: f64,
    pub ln_value: f64,
    /// `value` is infinite although `ln_value` is finite.
    pub overflow: bool,
}

impl Norm {
    pub(crate) fn from_ln_square(ln_sq: f64) -> Self {
        let ln_value = 0.5 * ln_sq;
        let value = ln_value.exp();
        Norm {
            value,
            ln_value,
            overflow: value.is_infinite() && ln_value.is_finite(),
        }
    }
}

fn ln_abs(z: C64) -> f64 {
    z.norm().ln()
}

/// `f * conj(g) * exp(ln_w)`, falling back to polar form when the weight
/// alone would overflow or the unscaled product would underflow.
pub(crate) fn weighted_term(f: C64, g: C64, m: WeightIndex, index: usize) -> Result<C64> {
    if f.is_zero() || g.is_zero() {
        return Ok(C64::zero());
    }
    let prod = f * g.conj();
    let ln_w = m.ln_weight(index);
    if ln_w.abs() < 690.0 {
        let term = prod * m.weight(index);
        if term.re.is_finite() && term.im.is_finite() && !term.is_zero() {
            return Ok(term);
        }
    }
    let ln_mag = ln_abs(f) + ln_abs(g) + ln_w;
    if ln_mag > LN_MAX {
        return Err(Error::Range {
            index,
            log_magnitude: ln_mag,
        });
    }
    let phase = (f / f.norm()) * (g / g.norm()).conj();
    Ok(phase * ln_mag.exp())
}

/// `⟨f, g⟩_m = Σ f_n conj(g_n) (n!)^m` with compensated summation.
pub fn inner_product(f: &TaylorCoeffs, g: &TaylorCoeffs, m: WeightIndex) -> Result<C64> {
    let mut acc = ComplexNeumaier::default();
    for n in 0..f.len().min(g.len()) {
        acc.add(weighted_term(f.coeffs[n], g.coeffs[n], m, n)?);
    }
    Ok(acc.sum())
}

/// `‖f‖_m`, accumulated as a log-sum-exp of `2 ln|f_n| + m ln(n!)`.
pub fn norm(f: &TaylorCoeffs, m: WeightIndex) -> Norm {
    Norm::from_ln_square(ln_norm_sq(f.coeffs(), m))
}

pub(crate) fn ln_norm_sq(coeffs: &[C64], m: WeightIndex) -> f64 {
    let mut lse = LogSumExp::default();
    for (n, c) in coeffs.iter().enumerate() {
        if !c.is_zero() {
            lse.add(2.0 * ln_abs(*c) + m.ln_weight(n));
        }
    }
    lse.ln_sum()
}

/// Term count below tolerance after which a kernel series is cut off.
const STOP_RUN: usize = 3;
const MAX_TERMS: usize = 100_000;

/// `k_m(z, w) = Σ (z conj(w))^n / (n!)^m`, summed until three consecutive
/// terms fall below `tol` relative to the partial sum.
///
/// The stop rule is only armed past the index where the term magnitudes peak,
/// so the rising part of the series is never mistaken for the tail.
pub fn kernel_eval(m: WeightIndex, z: C64, w: C64, tol: f64) -> Result<C64> {
    if m.0 < 1 {
        return Err(Error::domain(format!("kernel series needs m >= 1, got {}", m.0)));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::domain("tolerance must be positive"));
    }
    let zeta = z * w.conj();
    let r = zeta.norm();
    let peak = r.powf(1.0 / m.0 as f64).ceil() as usize;
    let mut acc = ComplexNeumaier::default();
    let mut term = C64::new(1.0, 0.0);
    acc.add(term);
    let mut run = 0;
    for n in 1..MAX_TERMS {
        term = term * zeta / (n as f64).powi(m.0 as i32);
        acc.add(term);
        if n > peak && term.norm() <= tol * acc.sum().norm() {
            run += 1;
            if run >= STOP_RUN {
                break;
            }
        } else {
            run = 0;
        }
    }
    Ok(acc.sum())
}

/// `(z conj(w))^n / (n!)^m` evaluated in polar form to avoid overflow.
pub(crate) fn kernel_term(zeta: C64, n: usize, ln_weight: f64) -> C64 {
    if n == 0 {
        return C64::new((-ln_weight).exp(), 0.0);
    }
    if zeta.is_zero() {
        return C64::zero();
    }
    let (r, theta) = zeta.to_polar();
    C64::from_polar((n as f64 * r.ln() - ln_weight).exp(), n as f64 * theta)
}

/// Degree-`N` truncation of `k_m(·, w)`: coefficient `n` is `conj(w)^n / (n!)^m`.
pub fn kernel_section(m: WeightIndex, w: C64, degree: usize) -> Result<TaylorCoeffs> {
    if m.0 < 1 {
        return Err(Error::domain(format!("kernel section needs m >= 1, got {}", m.0)));
    }
    let wc = w.conj();
    let mut coeffs = Vec::with_capacity(degree + 1);
    let mut power = C64::new(1.0, 0.0);
    for n in 0..=degree {
        let ln_w = m.ln_weight(n);
        let direct = power * (-ln_w).exp();
        if power.re.is_finite() && power.im.is_finite() && (direct.norm() > 0.0 || power.is_zero()) {
            coeffs.push(direct);
        } else {
            coeffs.push(kernel_term(wc, n, ln_w));
        }
        power *= wc;
    }
    Ok(TaylorCoeffs::new(coeffs))
}

/// Horner evaluation of `Σ f_n z^n`.
pub fn eval_point(f: &TaylorCoeffs, z: C64) -> C64 {
    f.coeffs().iter().rev().fold(C64::zero(), |acc, c| acc * z + c)
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("eps must lie in (0, 1), got {eps}")))
    }
}

/// Truncated kernel `Σ_{n<=N} (z conj(w))^n / (n!)^m`.
fn kernel_partial(m: f64, zeta: C64, degree: usize) -> C64 {
    let mut acc = ComplexNeumaier::default();
    for n in 0..=degree {
        acc.add(kernel_term(zeta, n, m * ln_factorial(n)));
    }
    acc.sum()
}

/// Both sides of `Σ_m ε^m k_m(z,w) = ε Σ_n (z conj(w))^n / (n! − ε)`,
/// each truncated at kernel degree `N`.
///
/// The left side sums kernels over `m = 1..M` with `M` chosen so that the
/// dropped geometric tail `ε^{M+1} / (1 − ε)` is below `1e-18`.
pub fn aggregate_kernels_geometric(eps: f64, z: C64, w: C64, degree: usize) -> Result<(C64, C64)> {
    check_eps(eps)?;
    let zeta = z * w.conj();
    let max_m = ((1e-18 * (1.0 - eps)).ln() / eps.ln()).ceil().max(1.0) as usize;
    let mut lhs = ComplexNeumaier::default();
    for m in 1..=max_m {
        lhs.add(eps.powi(m as i32) * kernel_partial(m as f64, zeta, degree));
    }
    let mut rhs = ComplexNeumaier::default();
    for n in 0..=degree {
        let ln_fact = ln_factorial(n);
        rhs.add(kernel_term(zeta, n, ln_fact) / (1.0 - eps * (-ln_fact).exp()));
    }
    Ok((lhs.sum(), eps * rhs.sum()))
}

/// Both sides of `Σ_m ε^m/m! k_m(z,w) = Σ_n (e^{ε/n!} − 1)(z conj(w))^n`,
/// each truncated at kernel degree `N`.
pub fn aggregate_kernels_exponential(eps: f64, z: C64, w: C64, degree: usize) -> Result<(C64, C64)> {
    check_eps(eps)?;
    let zeta = z * w.conj();
    let mut lhs = ComplexNeumaier::default();
    let mut coef = 1.0;
    let mut m = 1usize;
    loop {
        coef *= eps / m as f64;
        lhs.add(coef * kernel_partial(m as f64, zeta, degree));
        if coef < 1e-20 {
            break;
        }
        m += 1;
    }
    let mut rhs = ComplexNeumaier::default();
    for n in 0..=degree {
        let factor = (eps * (-ln_factorial(n)).exp()).exp_m1();
        if factor > 0.0 {
            rhs.add(kernel_term(zeta, n, -factor.ln()));
        }
    }
    Ok((lhs.sum(), rhs.sum()))
}
