//! Hermite functions and the generalized Bargmann transform `L_2(ℝ) → F_m`.
//!
//! The Hermite functions here follow the Rodrigues-type normalization
//! `η_n(t) = e^{t²/2} (e^{-t²})^{(n)} / (π^{1/4} 2^{n/2} √(n!))`. Since
//! `(e^{-t²})^{(n)} = (-1)^n H_n(t) e^{-t²}`, this is `(-1)^n ψ_n(t)` where
//! `ψ_n` is the usual orthonormal Hermite function.
//!
//! The transform sends `η_n` to `z^n / (n!)^{m/2}`, so on Hermite
//! coordinates `g = Σ c_n η_n` it is the diagonal map
//! `c_n ↦ c_n / (n!)^{m/2}`, and its kernel is
//! `h_m(z, t) = Σ z^n η_n(t) / (n!)^{m/2}`.

use num_complex::Complex64 as C64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::coeffspace::{kernel_term, TaylorCoeffs};
use crate::error::{Error, Result};
use crate::numeric::{ln_factorial, rel_diff_c, ComplexNeumaier, LN_MAX};

/// `π^{-1/4}`.
const PI_M14: f64 = 0.751_125_544_464_942_5;

/// Recorded uniform bound on `|η_n(t)|`; the sharp constant is `π^{-1/4}`.
pub const HERMITE_BOUND: f64 = 0.9;

fn check_m(m: u32) -> Result<()> {
    if m >= 1 {
        Ok(())
    } else {
        Err(Error::domain("Bargmann transform needs m >= 1"))
    }
}

/// `[η_0(t), ..., η_n(t)]` by the three-term recurrence
/// `η_{k+1} = -√(2/(k+1)) t η_k - √(k/(k+1)) η_{k-1}`.
pub fn hermite_fns(n: usize, t: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(PI_M14 * (-0.5 * t * t).exp());
    if n >= 1 {
        out.push(-std::f64::consts::SQRT_2 * t * out[0]);
    }
    for k in 1..n {
        let kf = k as f64;
        let next = -(2.0 / (kf + 1.0)).sqrt() * t * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
        out.push(next);
    }
    out
}

pub fn hermite_fn(n: usize, t: f64) -> f64 {
    hermite_fns(n, t)[n]
}

/// Gauss–Hermite nodes and weights for `Q` points, with the weights adapted
/// to integrands that are products of two Hermite functions:
/// `Σ_j w̃_j f(t_j) ≈ ∫ f(t) dt` with `w̃_j = w_j e^{t_j²} = 1 / (Q ψ_{Q-1}(t_j)²)`.
///
/// The rule is exact for `η_i η_k` when `i + k <= 2Q - 1`.
pub fn gauss_hermite(q: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if q == 0 {
        return Err(Error::input("Gauss-Hermite rule needs at least one node"));
    }
    let qf = q as f64;
    let half = q.div_ceil(2);
    let mut pos_nodes: Vec<f64> = Vec::with_capacity(half);
    let mut z = 0.0f64;
    for i in 0..half {
        // Initial guesses for the largest roots first.
        z = match i {
            0 => (2.0 * qf + 1.0).sqrt() - 1.855_75 * (2.0 * qf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * qf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * pos_nodes[0],
            3 => 1.91 * z - 0.91 * pos_nodes[1],
            _ => 2.0 * z - pos_nodes[i - 2],
        };
        let mut converged = false;
        for _ in 0..200 {
            let psi = hermite_fns(q, z);
            // p_Q / p_Q' = ψ_Q / (√(2Q) ψ_{Q-1}) = -η_Q / (√(2Q) η_{Q-1});
            // the Gaussian factor cancels.
            let dz = -psi[q] / ((2.0 * qf).sqrt() * psi[q - 1]);
            z -= dz;
            if dz.abs() <= 1e-15 * z.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Consistency(format!("Gauss-Hermite node {i} of {q} did not converge")));
        }
        pos_nodes.push(z);
    }
    let mut nodes: Vec<f64> = pos_nodes.iter().map(|x| -x).collect();
    let mid = if q % 2 == 1 { 1 } else { 0 };
    nodes.extend(pos_nodes.iter().rev().skip(mid).copied());
    if q % 2 == 1 {
        // the middle root is exactly zero
        nodes[half - 1] = 0.0;
    }
    let weights = nodes
        .iter()
        .map(|&t| {
            let prev = hermite_fns(q - 1, t)[q - 1];
            1.0 / (qf * prev * prev)
        })
        .collect();
    Ok((nodes, weights))
}

/// `η_n(t_j)` for `n <= max_index` on a Gauss–Hermite node set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HermiteEvaluation {
    pub max_index: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `values[n][j] = η_n(t_j)`.
    pub values: Vec<Vec<f64>>,
}

impl HermiteEvaluation {
    pub fn new(max_index: usize, node_count: usize) -> Result<Self> {
        if node_count < max_index + 1 {
            return Err(Error::input(format!(
                "{node_count} nodes cannot resolve Hermite functions up to index {max_index}"
            )));
        }
        let (nodes, weights) = gauss_hermite(node_count)?;
        let per_node: Vec<Vec<f64>> = nodes.iter().map(|&t| hermite_fns(max_index, t)).collect();
        let values = (0..=max_index)
            .map(|n| per_node.iter().map(|v| v[n]).collect())
            .collect();
        Ok(HermiteEvaluation {
            max_index,
            nodes,
            weights,
            values,
        })
    }

    /// `max_{i,k} |Σ_j w̃_j η_i(t_j) η_k(t_j) - δ_{ik}|`.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..=self.max_index {
            for k in 0..=i {
                let s: f64 = self
                    .weights
                    .iter()
                    .zip(&self.values[i])
                    .zip(&self.values[k])
                    .map(|((w, a), b)| w * a * b)
                    .sum();
                let target = if i == k { 1.0 } else { 0.0 };
                worst = worst.max((s - target).abs());
            }
        }
        worst
    }

    /// Largest tabulated `|η_n(t_j)|`.
    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .fold(0.0f64, |acc, v| acc.max(v.abs()))
    }
}

/// `max |η_n(t)|` over `n <= max_index` and `samples` equispaced `t` in
/// `[-t_max, t_max]`.
pub fn hermite_sup(max_index: usize, t_max: f64, samples: usize) -> f64 {
    let samples = samples.max(2);
    (0..samples)
        .map(|i| -t_max + 2.0 * t_max * i as f64 / (samples - 1) as f64)
        .flat_map(|t| hermite_fns(max_index, t))
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// An `L_2(ℝ)` element `g = Σ c_n η_n` in Hermite coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L2Element {
    pub hermite_coeffs: Vec<C64>,
}

impl L2Element {
    pub fn new(hermite_coeffs: Vec<C64>) -> Self {
        L2Element { hermite_coeffs }
    }

    /// `‖g‖_{L_2} = (Σ |c_n|^2)^{1/2}`.
    pub fn norm(&self) -> f64 {
        self.hermite_coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn eval(&self, t: f64) -> C64 {
        if self.hermite_coeffs.is_empty() {
            return C64::zero();
        }
        let eta = hermite_fns(self.hermite_coeffs.len() - 1, t);
        self.hermite_coeffs.iter().zip(eta).map(|(c, e)| c * e).sum()
    }
}

/// Term magnitude bound `|z|^n / (n!)^{m/2}` in the log domain.
fn ln_majorant(m: u32, r: f64, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else if r == 0.0 {
        f64::NEG_INFINITY
    } else {
        n as f64 * r.ln() - 0.5 * m as f64 * ln_factorial(n)
    }
}

/// Index past which `|z|^n / (n!)^{m/2} · HERMITE_BOUND` stays below
/// `tol` times the reference scale `scale`.
fn majorant_cutoff(m: u32, r: f64, tol: f64, scale: f64) -> usize {
    let peak = r.powf(2.0 / m as f64).ceil() as usize;
    let target = (tol * scale / HERMITE_BOUND).ln();
    let mut n = peak;
    while ln_majorant(m, r, n) > target && n < 1_000_000 {
        n += 1;
    }
    n
}

/// `h_m(z, t) = Σ z^n η_n(t) / (n!)^{m/2}`.
///
/// Summation stops once three consecutive term bounds
/// `|z|^n C / (n!)^{m/2}` fall below `tol` relative to the partial sum,
/// counting only past the peak of the bound.
pub fn h_kernel_eval(m: u32, z: C64, t: f64, tol: f64) -> Result<C64> {
    check_m(m)?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::domain("tolerance must be positive"));
    }
    let r = z.norm();
    let peak = (r.powf(2.0 / m as f64).max(0.5 * t * t)).ceil() as usize;
    let mut acc = ComplexNeumaier::default();
    let (mut prev, mut cur) = (0.0, PI_M14 * (-0.5 * t * t).exp());
    let mut run = 0;
    let mut n = 0usize;
    loop {
        let ln_w = 0.5 * m as f64 * ln_factorial(n);
        acc.add(kernel_term(z, n, ln_w) * cur);
        let bound = (ln_majorant(m, r, n)).exp() * HERMITE_BOUND;
        let scale = acc.sum().norm().max(f64::MIN_POSITIVE);
        if n > peak && bound <= tol * scale {
            run += 1;
            if run >= 3 {
                break;
            }
        } else {
            run = 0;
        }
        if n >= 1_000_000 {
            return Err(Error::Consistency("Hermite kernel series did not terminate".into()));
        }
        let nf = n as f64;
        let next = -(2.0 / (nf + 1.0)).sqrt() * t * cur - (nf / (nf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        n += 1;
    }
    Ok(acc.sum())
}

/// `𝔅_m g`: coefficient `n` is `c_n / (n!)^{m/2}`.
pub fn bargmann_forward(g: &L2Element, m: u32) -> Result<TaylorCoeffs> {
    check_m(m)?;
    Ok(TaylorCoeffs::new(
        g.hermite_coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| scale_log(*c, -0.5 * m as f64 * ln_factorial(n)))
            .collect(),
    ))
}

/// `𝔅_m^{-1} f`: Hermite coefficient `n` is `(n!)^{m/2} f_n`.
pub fn bargmann_inverse(f: &TaylorCoeffs, m: u32) -> Result<L2Element> {
    check_m(m)?;
    let coeffs = f
        .coeffs()
        .iter()
        .enumerate()
        .map(|(n, c)| {
            let ln_s = 0.5 * m as f64 * ln_factorial(n);
            if !c.is_zero() && c.norm().ln() + ln_s > LN_MAX {
                return Err(Error::Range {
                    index: n,
                    log_magnitude: c.norm().ln() + ln_s,
                });
            }
            Ok(scale_log(*c, ln_s))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(L2Element::new(coeffs))
}

/// `c · e^{ln_s}` without forming an overflowing or underflowing factor
/// when the product itself is representable.
fn scale_log(c: C64, ln_s: f64) -> C64 {
    if c.is_zero() {
        return c;
    }
    let direct = c * ln_s.exp();
    if direct.re.is_finite() && direct.im.is_finite() && !direct.is_zero() {
        return direct;
    }
    let (r, theta) = c.to_polar();
    C64::from_polar((r.ln() + ln_s).exp(), theta)
}

/// `∫ h_m(z, t) g(t) dt` by Gauss–Hermite quadrature with enough nodes that
/// every retained term of the kernel series is integrated exactly against
/// `g`.
pub fn bargmann_by_quadrature(g: &L2Element, m: u32, z: C64, tol: f64) -> Result<C64> {
    check_m(m)?;
    let n = g.hermite_coeffs.len().saturating_sub(1);
    let degree = majorant_cutoff(m, z.norm(), tol.min(1e-17), 1.0).max(n);
    let q = (degree + n) / 2 + 2;
    let (nodes, weights) = gauss_hermite(q)?;
    let mut acc = ComplexNeumaier::default();
    for (t, w) in nodes.iter().zip(&weights) {
        let h = h_kernel_eval(m, z, *t, tol)?;
        acc.add(h * g.eval(*t) * *w);
    }
    Ok(acc.sum())
}

/// The `m = 1` kernel summed in closed form, as implied by the series with
/// `η_n = (-1)^n ψ_n`: `π^{-1/4} exp(-t²/2 - √2 t z - z²/2)`.
pub fn h1_series_closed_form(z: C64, t: f64) -> C64 {
    PI_M14 * (-0.5 * t * t - std::f64::consts::SQRT_2 * t * z - 0.5 * z * z).exp()
}

/// The candidate `exp(2tz - t² - z²/2)`.
pub fn h1_candidate_closed_form(z: C64, t: f64) -> C64 {
    (2.0 * t * z - t * t - 0.5 * z * z).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedFormReport {
    pub points: usize,
    /// Largest relative deviation of `h1_series_closed_form` from the series.
    pub derived_max_rel_err: f64,
    /// Largest relative deviation of `h1_candidate_closed_form` from the series.
    pub candidate_max_rel_err: f64,
    /// Spread of `series / candidate` over the grid; zero iff the two differ by
    /// a constant factor.
    pub candidate_ratio_spread: f64,
    pub derived_matches: bool,
    pub candidate_matches: bool,
}

/// Compares both closed-form candidates for `h_1` against the series on a
/// grid of `(z, t)`.
pub fn closed_form_m1_report(zs: &[C64], ts: &[f64]) -> Result<ClosedFormReport> {
    let mut derived = 0.0f64;
    let mut candidate = 0.0f64;
    let mut ratios = Vec::new();
    for &z in zs {
        for &t in ts {
            let s = h_kernel_eval(1, z, t, 1e-16)?;
            derived = derived.max(rel_diff_c(s, h1_series_closed_form(z, t)));
            let p = h1_candidate_closed_form(z, t);
            candidate = candidate.max(rel_diff_c(s, p));
            ratios.push(s / p);
        }
    }
    let spread = ratios
        .iter()
        .map(|r| rel_diff_c(*r, ratios[0]))
        .fold(0.0f64, f64::max);
    Ok(ClosedFormReport {
        points: ratios.len(),
        derived_max_rel_err: derived,
        candidate_max_rel_err: candidate,
        candidate_ratio_spread: spread,
        derived_matches: derived < 1e-10,
        candidate_matches: candidate < 1e-10,
    })
}
