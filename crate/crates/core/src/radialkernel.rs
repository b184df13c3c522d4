//! Radial weights `K_m` on `(0, ∞)`.
//!
//! `K_1(x) = e^{-x}` and `K_{m+1} = K_m * K_1` under the Mellin convolution
//! `(f * g)(x) = ∫_0^∞ f(x/t) g(t) dt/t`. Since the Mellin transform turns
//! convolution into a product, `∫_0^∞ x^{c-1} K_m(x) dx = Γ(c)^m`, and in
//! particular the moments are `(n!)^m`. `K_2(x) = 2 K_0(2√x)`.
//!
//! Three evaluation routes exist:
//!
//! * [`DirectKernel`]: the `(m-1)`-fold integral over `ℝ^{m-1}` of
//!   `exp(-x^{1/m} (Σ e^{t_i} + e^{-Σ t_i}))`, by nested adaptive quadrature;
//! * [`ProductFormKernel`]: the same integral in the original variables
//!   `x_i ∈ (0, ∞)` with integrand `e^{-Σ x_i - x / Π x_i} / Π x_i`;
//! * [`ConvolvedKernel`]: one Mellin convolution step with `e^{-t}` applied
//!   to a cached table of `K_{m-1}`.
//!
//! Everything is carried as `ln K_m`. `K_m(x)` behaves like
//! `exp(-m x^{1/m})` times a power of `x`, so tables store the reduced value
//! `ln K_m(x) + m x^{1/m}`, which is close to linear in `ln x` at large `x`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64 as C64;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::coeffspace::TaylorCoeffs;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, log_window, QuadSettings};

/// Log-magnitude below the peak at which integrands are truncated.
const LOG_DROP: f64 = 46.0;

/// Log-spaced abscissae `x_min .. x_max` used for cached kernel tables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
}

impl LogGrid {
    pub fn new(x_min: f64, x_max: f64, points: usize) -> Result<Self> {
        if !(x_min > 0.0 && x_max > x_min && points >= 4) {
            return Err(Error::input(format!(
                "grid needs 0 < x_min < x_max and at least 4 points, got [{x_min}, {x_max}] x {points}"
            )));
        }
        Ok(LogGrid { x_min, x_max, points })
    }

    pub fn ln_step(&self) -> f64 {
        (self.x_max / self.x_min).ln() / (self.points - 1) as f64
    }

    pub fn abscissae(&self) -> Vec<f64> {
        let h = self.ln_step();
        let l0 = self.x_min.ln();
        (0..self.points).map(|i| (l0 + h * i as f64).exp()).collect()
    }
}

impl Default for LogGrid {
    /// `1e-8 .. 1e8`, 20 points per decade.
    fn default() -> Self {
        LogGrid {
            x_min: 1e-8,
            x_max: 1e8,
            points: 321,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_refinements: usize,
    pub grid: LogGrid,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-9,
            abs_tol: 1e-14,
            max_refinements: 500,
            grid: LogGrid::default(),
        }
    }
}

impl QuadratureConfig {
    pub fn new(rel_tol: f64, abs_tol: f64, max_refinements: usize, grid: LogGrid) -> Result<Self> {
        if !(rel_tol > 0.0 && abs_tol > 0.0) {
            return Err(Error::input("quadrature tolerances must be positive"));
        }
        if max_refinements == 0 {
            return Err(Error::input("max_refinements must be positive"));
        }
        LogGrid::new(grid.x_min, grid.x_max, grid.points)?;
        Ok(QuadratureConfig {
            rel_tol,
            abs_tol,
            max_refinements,
            grid,
        })
    }

    pub(crate) fn settings(&self) -> QuadSettings {
        QuadSettings {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_refinements: self.max_refinements,
        }
    }

    /// Tighter settings for inner integrals of nested quadrature.
    fn inner_settings(&self) -> QuadSettings {
        QuadSettings {
            rel_tol: self.rel_tol * 0.1,
            abs_tol: self.abs_tol * 0.1,
            max_refinements: self.max_refinements,
        }
    }
}

/// A positive radial weight on `(0, ∞)`, evaluated in the log domain.
pub trait RadialKernel: Send + Sync {
    /// The `m` of `K_m`.
    fn order(&self) -> u32;

    fn ln_eval(&self, x: f64) -> Result<f64>;

    fn eval(&self, x: f64) -> Result<f64> {
        Ok(self.ln_eval(x)?.exp())
    }
}

fn check_x(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("kernel argument must be positive and finite, got {x}")))
    }
}

/// `m x^{1/m}`, the leading decay rate of `K_m`.
fn leading_decay(m: u32, x: f64) -> f64 {
    m as f64 * x.powf(1.0 / m as f64)
}

/// `K_1(x) = e^{-x}`.
pub fn k1_eval(x: f64) -> f64 {
    (-x).exp()
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ExpKernel;

impl RadialKernel for ExpKernel {
    fn order(&self) -> u32 {
        1
    }

    fn ln_eval(&self, x: f64) -> Result<f64> {
        check_x(x)?;
        Ok(-x)
    }
}

/// Solves `e^u - 1 - u = c` for `c > 0`, returning the negative and positive
/// roots.
fn excess_roots(c: f64) -> (f64, f64) {
    let g = |u: f64| u.exp_m1() - u - c;
    // Positive root lies in (0, max(1, ln(1 + 2c) + 1)); negative root in (-(c + 1), 0).
    let bisect = |mut lo: f64, mut hi: f64| {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (g(mid) > 0.0) == (g(hi) > 0.0) {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-15 * hi.abs().max(1e-300) {
                break;
            }
        }
        0.5 * (lo + hi)
    };
    let upper = (1.0 + c).ln() + (2.0 * c).sqrt() + 1.0;
    let pos = bisect(0.0, upper);
    let neg = bisect(-(c + 1.0), 0.0);
    (neg, pos)
}

/// `K_m` by nested quadrature of
/// `∫_{ℝ^{m-1}} exp(-x^{1/m} (Σ e^{t_i} + e^{-Σ t_i})) dt`.
///
/// Writing `Σ e^{t_i} + e^{-S} - m = Σ g(t_i) + g(-S)` with
/// `g(u) = e^u - 1 - u ≥ 0` and `S = Σ t_i`, the integrand is
/// `e^{-m y} Π e^{-y g(t_i)} e^{-y g(-S)}` with `y = x^{1/m}`. Each variable is
/// confined to where the remaining budget `LOG_DROP / y - Σ g` stays
/// positive, which is a window of width `O(1/√y)` for large `y` and
/// `O(ln(1/y))` for small `y`.
#[derive(Debug, Clone, Copy)]
pub struct DirectKernel {
    m: u32,
    cfg: QuadratureConfig,
}

impl DirectKernel {
    pub fn new(m: u32, cfg: QuadratureConfig) -> Result<Self> {
        if m < 2 {
            return Err(Error::domain("direct integral representation needs m >= 2"));
        }
        Ok(DirectKernel { m, cfg })
    }

    fn nested(&self, level: usize, y: f64, prefix_sum: f64, budget: f64) -> Result<f64> {
        let dims = (self.m - 1) as usize;
        let remaining = dims - level - 1;
        let (neg, pos) = excess_roots(budget);
        // S = prefix + t + rest must keep -S inside [neg, pos].
        let lo = neg.max(-pos - prefix_sum - remaining as f64 * pos);
        let hi = pos.min(-neg - prefix_sum - remaining as f64 * neg);
        if lo >= hi {
            return Ok(0.0);
        }
        let settings = if level == 0 {
            self.cfg.settings()
        } else {
            self.cfg.inner_settings()
        };
        let g = |u: f64| u.exp_m1() - u;
        let est = if remaining == 0 {
            integrate(
                |t| {
                    let s = prefix_sum + t;
                    Ok((-y * (g(t) + g(-s))).exp())
                },
                lo,
                hi,
                &settings,
            )?
        } else {
            integrate(
                |t| {
                    let left = budget - g(t);
                    if left <= 0.0 {
                        return Ok(0.0);
                    }
                    Ok((-y * g(t)).exp() * self.nested(level + 1, y, prefix_sum + t, left)?)
                },
                lo,
                hi,
                &settings,
            )?
        };
        Ok(est.value)
    }
}

impl RadialKernel for DirectKernel {
    fn order(&self) -> u32 {
        self.m
    }

    fn ln_eval(&self, x: f64) -> Result<f64> {
        check_x(x)?;
        let y = x.powf(1.0 / self.m as f64);
        let scaled = self.nested(0, y, 0.0, LOG_DROP / y)?;
        Ok(scaled.ln() - self.m as f64 * y)
    }
}

/// `K_m` by nested quadrature of
/// `∫_{(0,∞)^{m-1}} e^{-Σ x_i - x / Π x_i} / Π x_i dx` in the original
/// variables. Each axis is split at the conditional peak; the bounded piece
/// is integrated directly and the unbounded piece through
/// `x_i = c + v / (1 - v)`.
#[derive(Debug, Clone, Copy)]
pub struct ProductFormKernel {
    m: u32,
    cfg: QuadratureConfig,
}

impl ProductFormKernel {
    pub fn new(m: u32, cfg: QuadratureConfig) -> Result<Self> {
        if m < 2 {
            return Err(Error::domain("product-form integral representation needs m >= 2"));
        }
        Ok(ProductFormKernel { m, cfg })
    }

    fn nested(&self, level: usize, x: f64, shift: f64, sum: f64, prod: f64) -> Result<f64> {
        let dims = (self.m - 1) as usize;
        let last = level + 1 == dims;
        let settings = if level == 0 {
            self.cfg.settings()
        } else {
            self.cfg.inner_settings()
        };
        let y = x.powf(1.0 / self.m as f64);
        let split = if last { (x / prod).sqrt() } else { y };
        let mut body = |xi: f64| -> Result<f64> {
            if xi <= 0.0 {
                return Ok(0.0);
            }
            let s = sum + xi;
            let p = prod * xi;
            if last {
                let expo = shift - s - x / p;
                Ok(expo.exp() / p)
            } else {
                self.nested(level + 1, x, shift, s, p)
            }
        };
        let near = integrate(&mut body, 0.0, split, &settings)?;
        let far = integrate(
            |v| {
                let one_minus = 1.0 - v;
                let xi = split + v / one_minus;
                let jac = 1.0 / (one_minus * one_minus);
                let val = body(xi)?;
                Ok(if val == 0.0 { 0.0 } else { val * jac })
            },
            0.0,
            1.0,
            &settings,
        )?;
        Ok(near.value + far.value)
    }
}

impl RadialKernel for ProductFormKernel {
    fn order(&self) -> u32 {
        self.m
    }

    fn ln_eval(&self, x: f64) -> Result<f64> {
        check_x(x)?;
        let shift = leading_decay(self.m, x);
        let scaled = self.nested(0, x, shift, 0.0, 1.0)?;
        Ok(scaled.ln() - shift)
    }
}

/// `ln (K * e^{-t})(x)` where `(K * e^{-t})(x) = ∫_0^∞ K(x/t) e^{-t} dt/t`.
///
/// With `t = e^s` the integral becomes `∫ exp(ln K(x e^{-s}) - e^s) ds`;
/// the window is located around the saddle `s ≈ ln x / (m + 1)` and the
/// integrand is rescaled by its peak before quadrature.
fn ln_convolve_with_exp(kernel: &dyn RadialKernel, x: f64, cfg: &QuadratureConfig) -> Result<f64> {
    check_x(x)?;
    let u = x.ln();
    let ln_integrand = |s: f64| -> Result<f64> { Ok(kernel.ln_eval((u - s).exp())? - s.exp()) };
    let start = u / (kernel.order() + 1) as f64;
    let (lo, hi, peak) = log_window(ln_integrand, start, 0.5, LOG_DROP, 400)?;
    let est = integrate(|s| Ok((ln_integrand(s)? - peak).exp()), lo, hi, &cfg.settings())?;
    Ok(peak + est.value.ln())
}

/// One Mellin convolution step with `K_1`: `(K * K_1)(x)`, the recursion
/// `K_{m+1} = K_m * K_1`.
pub fn mellin_convolve(kernel: &dyn RadialKernel, x: f64, cfg: &QuadratureConfig) -> Result<f64> {
    Ok(ln_convolve_with_exp(kernel, x, cfg)?.exp())
}

/// `K_{m+1}` as the Mellin convolution of a `K_m` evaluator with `e^{-t}`.
#[derive(Clone)]
pub struct ConvolvedKernel {
    inner: Arc<dyn RadialKernel>,
    cfg: QuadratureConfig,
}

impl ConvolvedKernel {
    pub fn new(inner: Arc<dyn RadialKernel>, cfg: QuadratureConfig) -> Self {
        ConvolvedKernel { inner, cfg }
    }
}

impl RadialKernel for ConvolvedKernel {
    fn order(&self) -> u32 {
        self.inner.order() + 1
    }

    fn ln_eval(&self, x: f64) -> Result<f64> {
        ln_convolve_with_exp(self.inner.as_ref(), x, &self.cfg)
    }
}

/// Uniform samples of the reduced value `ln K_m(x) + m x^{1/m}` in `ln x`.
#[derive(Debug, Clone)]
struct LogSegment {
    ln_x0: f64,
    h: f64,
    reduced: Vec<f64>,
}

impl LogSegment {
    fn build(exact: &dyn RadialKernel, grid: &LogGrid) -> Result<Self> {
        let m = exact.order();
        let reduced = grid
            .abscissae()
            .par_iter()
            .map(|&x| Ok(exact.ln_eval(x)? + leading_decay(m, x)))
            .collect::<Result<Vec<f64>>>()?;
        Ok(LogSegment {
            ln_x0: grid.x_min.ln(),
            h: grid.ln_step(),
            reduced,
        })
    }

    fn covers(&self, u: f64) -> bool {
        u >= self.ln_x0 - 1e-12
    }

    /// Local cubic through the four nearest nodes; linear extrapolation
    /// past the last node.
    fn interpolate(&self, u: f64) -> f64 {
        let r = &self.reduced;
        let n = r.len();
        let pos = (u - self.ln_x0) / self.h;
        if pos >= (n - 1) as f64 {
            let slope = r[n - 1] - r[n - 2];
            return r[n - 1] + slope * (pos - (n - 1) as f64);
        }
        let i = (pos.max(0.0).floor() as usize).saturating_sub(1).min(n - 4);
        let p = pos - i as f64;
        let r = &r[i..i + 4];
        let l0 = -(p - 1.0) * (p - 2.0) * (p - 3.0) / 6.0;
        let l1 = p * (p - 2.0) * (p - 3.0) / 2.0;
        let l2 = -p * (p - 1.0) * (p - 3.0) / 2.0;
        let l3 = p * (p - 1.0) * (p - 2.0) / 6.0;
        l0 * r[0] + l1 * r[1] + l2 * r[2] + l3 * r[3]
    }
}

/// Lower end of the coarse extension below the main grid.
pub const NEAR_ZERO_FLOOR: f64 = 1e-30;
const NEAR_ZERO_PER_DECADE: f64 = 8.0;

/// `K_m` sampled on a log grid and interpolated by local cubics in
/// `(ln x, ln K_m(x) + m x^{1/m})`.
///
/// Above the grid the reduced value is extrapolated linearly. Below it a
/// coarser segment reaching down to [`NEAR_ZERO_FLOOR`] is used, where
/// `K_m` varies like a power of `ln(1/x)`; below that the exact evaluator
/// the table was built from is called.
#[derive(Clone)]
pub struct RadialKernelTable {
    m: u32,
    grid: LogGrid,
    main: LogSegment,
    near: Option<LogSegment>,
    exact: Arc<dyn RadialKernel>,
}

impl std::fmt::Debug for RadialKernelTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RadialKernelTable")
            .field("m", &self.m)
            .field("grid", &self.grid)
            .finish_non_exhaustive()
    }
}

impl RadialKernelTable {
    pub fn build(exact: Arc<dyn RadialKernel>, grid: LogGrid) -> Result<Self> {
        let near = if grid.x_min > NEAR_ZERO_FLOOR * 10.0 {
            let decades = (grid.x_min / NEAR_ZERO_FLOOR).log10();
            let points = (decades * NEAR_ZERO_PER_DECADE).ceil() as usize + 1;
            let near_grid = LogGrid::new(NEAR_ZERO_FLOOR, grid.x_min, points.max(4))?;
            Some(LogSegment::build(exact.as_ref(), &near_grid)?)
        } else {
            None
        };
        let main = LogSegment::build(exact.as_ref(), &grid)?;
        Ok(RadialKernelTable {
            m: exact.order(),
            grid,
            main,
            near,
            exact,
        })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn grid(&self) -> LogGrid {
        self.grid
    }

    /// `(x_i, K_m(x_i))` at the main grid nodes.
    pub fn samples(&self) -> Vec<(f64, f64)> {
        self.grid
            .abscissae()
            .into_iter()
            .zip(self.ln_values())
            .map(|(x, l)| (x, l.exp()))
            .collect()
    }

    /// `ln K_m` at the main grid nodes.
    pub fn ln_values(&self) -> Vec<f64> {
        self.grid
            .abscissae()
            .into_iter()
            .zip(&self.main.reduced)
            .map(|(x, r)| r - leading_decay(self.m, x))
            .collect()
    }

    /// Table values are finite (so `K_m > 0`) and non-increasing.
    pub fn check_invariants(&self) -> Result<()> {
        let ln = self.ln_values();
        if let Some(i) = ln.iter().position(|v| !v.is_finite()) {
            return Err(Error::Consistency(format!("K_{} table value {i} is not positive", self.m)));
        }
        if let Some(i) = ln.windows(2).position(|w| w[1] > w[0]) {
            return Err(Error::Consistency(format!(
                "K_{} table increases between nodes {i} and {}",
                self.m,
                i + 1
            )));
        }
        Ok(())
    }
}

impl RadialKernel for RadialKernelTable {
    fn order(&self) -> u32 {
        self.m
    }

    fn ln_eval(&self, x: f64) -> Result<f64> {
        check_x(x)?;
        let u = x.ln();
        let seg = if self.main.covers(u) {
            &self.main
        } else {
            match &self.near {
                Some(near) if near.covers(u) => near,
                _ => return self.exact.ln_eval(x),
            }
        };
        Ok(seg.interpolate(u) - leading_decay(self.m, x))
    }
}

/// A moment or Mellin-transform value with its error budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub value: f64,
    pub abs_err: f64,
    /// Contribution of `(0, x_min)`, below the cached grid.
    pub near_zero: f64,
    pub near_zero_err: f64,
}

/// `∫_0^∞ x^{c-1} K(x) dx` for real `c > 0`.
///
/// In `u = ln x` the integrand is `exp(c u + ln K(e^u))`; the window where it
/// is within `e^{-46}` of its peak is integrated, split at `ln x_min` so that
/// the part below the table grid gets its own refinement and error estimate.
pub fn mellin_transform(kernel: &dyn RadialKernel, c: f64, cfg: &QuadratureConfig) -> Result<MomentEstimate> {
    if c.is_nan() || c <= 0.0 {
        return Err(Error::domain(format!("Mellin transform of K_m needs c > 0, got {c}")));
    }
    let m = kernel.order() as f64;
    let ln_integrand = |u: f64| -> Result<f64> { Ok(c * u + kernel.ln_eval(u.exp())?) };
    let start = m * c.ln();
    let (lo, hi, peak) = log_window(ln_integrand, start, 0.5, LOG_DROP, 400)?;
    let f = |u: f64| -> Result<f64> { Ok((ln_integrand(u)? - peak).exp()) };
    let split = cfg.grid.x_min.ln().clamp(lo, hi);
    let settings = cfg.settings();
    let near = integrate(f, lo, split, &settings)?;
    let main = integrate(f, split, hi, &settings)?;
    let scale = peak.exp();
    Ok(MomentEstimate {
        value: (near.value + main.value) * scale,
        abs_err: (near.abs_err + main.abs_err) * scale,
        near_zero: near.value * scale,
        near_zero_err: near.abs_err * scale,
    })
}

/// Cache of `K_m` evaluators and tables for one quadrature configuration.
///
/// `K_1` is analytic, `K_2` and `K_3` come from direct quadrature, and
/// `K_m` for `m >= 4` is one convolution step on the cached `K_{m-1}` table.
pub struct RadialKernels {
    cfg: QuadratureConfig,
    tables: Mutex<HashMap<u32, Arc<RadialKernelTable>>>,
}

impl RadialKernels {
    pub fn new(cfg: QuadratureConfig) -> Self {
        RadialKernels {
            cfg,
            tables: Mutex::new(HashMap::new()),
        }
    }

    pub fn config(&self) -> &QuadratureConfig {
        &self.cfg
    }

    fn check_m(m: u32) -> Result<()> {
        if m == 0 {
            Err(Error::domain("K_m needs m >= 1"))
        } else {
            Ok(())
        }
    }

    /// The reference evaluator for `K_m`.
    pub fn exact(&self, m: u32) -> Result<Arc<dyn RadialKernel>> {
        Self::check_m(m)?;
        Ok(match m {
            1 => Arc::new(ExpKernel),
            2 | 3 => Arc::new(DirectKernel::new(m, self.cfg)?),
            _ => Arc::new(ConvolvedKernel::new(self.table(m - 1)?, self.cfg)),
        })
    }

    /// The cached table for `K_m`, built on first use.
    pub fn table(&self, m: u32) -> Result<Arc<RadialKernelTable>> {
        Self::check_m(m)?;
        if let Some(t) = self.tables.lock().expect("kernel cache poisoned").get(&m) {
            return Ok(Arc::clone(t));
        }
        let built = Arc::new(RadialKernelTable::build(self.exact(m)?, self.cfg.grid)?);
        let mut guard = self.tables.lock().expect("kernel cache poisoned");
        Ok(Arc::clone(guard.entry(m).or_insert(built)))
    }

    /// Fast evaluator: analytic for `m = 1`, the table otherwise.
    pub fn fast(&self, m: u32) -> Result<Arc<dyn RadialKernel>> {
        Self::check_m(m)?;
        if m == 1 {
            Ok(Arc::new(ExpKernel))
        } else {
            Ok(self.table(m)?)
        }
    }

    pub fn km_eval(&self, m: u32, x: f64) -> Result<f64> {
        self.exact(m)?.eval(x)
    }

    pub fn km_ln_eval(&self, m: u32, x: f64) -> Result<f64> {
        self.exact(m)?.ln_eval(x)
    }

    /// `∫_0^∞ x^n K_m(x) dx`, which equals `(n!)^m`.
    pub fn km_moment(&self, m: u32, n: usize) -> Result<MomentEstimate> {
        mellin_transform(self.fast(m)?.as_ref(), n as f64 + 1.0, &self.cfg)
    }

    /// `(1/π) ∬ f(z) conj(g(z)) K_m(|z|^2) dA(z)`, reduced by angular
    /// orthogonality to `Σ f_n conj(g_n) ∫_0^∞ u^n K_m(u) du`.
    pub fn geometric_inner_product(&self, f: &TaylorCoeffs, g: &TaylorCoeffs, m: u32) -> Result<C64> {
        let mut acc = C64::zero();
        for n in 0..f.len().min(g.len()) {
            let prod = f.coeffs()[n] * g.coeffs()[n].conj();
            if prod.is_zero() {
                continue;
            }
            acc += prod * self.km_moment(m, n)?.value;
        }
        Ok(acc)
    }
}

pub fn km_eval(m: u32, x: f64, cfg: &QuadratureConfig) -> Result<f64> {
    RadialKernels::new(*cfg).km_eval(m, x)
}

pub fn km_moment(m: u32, n: usize, cfg: &QuadratureConfig) -> Result<MomentEstimate> {
    RadialKernels::new(*cfg).km_moment(m, n)
}

pub fn geometric_inner_product(f: &TaylorCoeffs, g: &TaylorCoeffs, m: u32, cfg: &QuadratureConfig) -> Result<C64> {
    RadialKernels::new(*cfg).geometric_inner_product(f, g, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rel_diff;

    /// 2 K_0(2√x) by the trapezoidal rule on ∫_0^∞ exp(-2√x cosh t) dt,
    /// which converges geometrically for this analytic integrand.
    fn bessel_oracle(x: f64) -> f64 {
        let z = 2.0 * x.sqrt();
        let h = 1.0 / 64.0;
        let mut sum = 0.5 * (-z).exp();
        let mut k = 1;
        loop {
            let v = (-z * (k as f64 * h).cosh()).exp();
            sum += v;
            if v < 1e-300 || v < sum * 1e-20 {
                break;
            }
            k += 1;
        }
        2.0 * h * sum
    }

    #[test]
    fn k1_examples() {
        assert!((k1_eval(1.0) - 0.367_879_441_17).abs() < 1e-11);
        assert!((k1_eval(1e-300) - 1.0).abs() < 1e-15);
        assert!((k1_eval(2f64.ln()) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn excess_roots_solve_equation() {
        for c in [1e-6, 0.3, 5.0, 1e4] {
            let (neg, pos) = excess_roots(c);
            let g = |u: f64| u.exp_m1() - u;
            assert!(neg < 0.0 && pos > 0.0);
            assert!(rel_diff(g(neg), c) < 1e-10, "c={c}");
            assert!(rel_diff(g(pos), c) < 1e-10, "c={c}");
        }
    }

    #[test]
    fn convolving_k1_gives_bessel() {
        let cfg = QuadratureConfig::default();
        let v = mellin_convolve(&ExpKernel, 1.0, &cfg).unwrap();
        assert!((v - 0.227_787_7).abs() < 1e-7);
        assert!(rel_diff(v, bessel_oracle(1.0)) < 1e-9);
    }

    #[test]
    fn direct_k2_matches_oracle() {
        let cfg = QuadratureConfig::default();
        let k2 = DirectKernel::new(2, cfg).unwrap();
        for x in [1e-8, 0.1, 1.0, 4.0, 100.0, 1e6] {
            let got = k2.eval(x).unwrap();
            assert!(rel_diff(got, bessel_oracle(x)) < 1e-9, "x={x}");
        }
        // 2 K_0(4)
        assert!((k2.eval(4.0).unwrap() - 0.022_319_35).abs() < 1e-8);
    }

    #[test]
    fn product_form_matches_direct() {
        let cfg = QuadratureConfig::default();
        for m in [2, 3] {
            let a = DirectKernel::new(m, cfg).unwrap();
            let b = ProductFormKernel::new(m, cfg).unwrap();
            for x in [0.05, 1.0, 7.0] {
                let (va, vb) = (a.eval(x).unwrap(), b.eval(x).unwrap());
                assert!(rel_diff(va, vb) < 1e-7, "m={m} x={x}: {va} vs {vb}");
            }
        }
    }

    #[test]
    fn k3_routes_agree() {
        let cfg = QuadratureConfig::default();
        let direct = DirectKernel::new(3, cfg).unwrap();
        let k2 = Arc::new(DirectKernel::new(2, cfg).unwrap());
        let conv = ConvolvedKernel::new(k2, cfg);
        for x in [0.01, 1.0, 30.0] {
            let a = direct.eval(x).unwrap();
            let b = conv.eval(x).unwrap();
            assert!(rel_diff(a, b) < 1e-7, "x={x}: {a} vs {b}");
        }
    }

    #[test]
    fn table_matches_exact_between_nodes() {
        let cfg = QuadratureConfig::default();
        let kernels = RadialKernels::new(cfg);
        let table = kernels.table(2).unwrap();
        table.check_invariants().unwrap();
        let exact = DirectKernel::new(2, cfg).unwrap();
        for x in [3.3e-7, 0.0123, 0.77, 5.5, 1234.5, 3e7, 1e9] {
            let a = table.ln_eval(x).unwrap();
            let b = exact.ln_eval(x).unwrap();
            assert!((a - b).abs() < 1e-8 * b.abs().max(1.0), "x={x}: {a} vs {b}");
        }
        // coarse extension below the grid, exact evaluator below that
        for x in [1e-10, 3e-17, 2e-29] {
            let (a, b) = (table.ln_eval(x).unwrap(), exact.ln_eval(x).unwrap());
            assert!((a - b).abs() < 1e-7 * b.abs(), "x={x}: {a} vs {b}");
        }
        assert_eq!(table.ln_eval(1e-31).unwrap(), exact.ln_eval(1e-31).unwrap());
    }

    #[test]
    fn moments_low_order() {
        let kernels = RadialKernels::new(QuadratureConfig::default());
        for m in 1..=3u32 {
            for n in 0..=4usize {
                let got = kernels.km_moment(m, n).unwrap();
                let f: f64 = (1..=n).map(|k| k as f64).product();
                let exact = f.powi(m as i32);
                assert!(rel_diff(got.value, exact) < 1e-7, "m={m} n={n}: {}", got.value);
            }
        }
    }

    #[test]
    fn mellin_transform_at_half_integer() {
        // Γ(1.5)^m = (√π / 2)^m
        let kernels = RadialKernels::new(QuadratureConfig::default());
        for m in 1..=3u32 {
            let got = mellin_transform(kernels.fast(m).unwrap().as_ref(), 1.5, kernels.config()).unwrap();
            let exact = (std::f64::consts::PI.sqrt() / 2.0).powi(m as i32);
            assert!(rel_diff(got.value, exact) < 1e-7, "m={m}");
        }
    }

    #[test]
    fn geometric_inner_product_examples() {
        let kernels = RadialKernels::new(QuadratureConfig::default());
        let z = TaylorCoeffs::<C64>::monomial(1);
        let z2 = TaylorCoeffs::<C64>::monomial(2);
        let v = kernels.geometric_inner_product(&z, &z, 2).unwrap();
        assert!((v.re - 1.0).abs() < 1e-7);
        assert_eq!(kernels.geometric_inner_product(&z, &z2, 3).unwrap(), C64::zero());
        let f = TaylorCoeffs::new(vec![C64::new(1.0, 0.0), C64::zero(), C64::new(1.0, 0.0)]);
        let v = kernels.geometric_inner_product(&f, &f, 2).unwrap();
        assert!((v.re - 5.0).abs() < 1e-6);
    }

    #[test]
    fn rejects_invalid_arguments() {
        let cfg = QuadratureConfig::default();
        assert!(km_eval(0, 1.0, &cfg).is_err());
        assert!(km_eval(2, 0.0, &cfg).is_err());
        assert!(km_eval(2, -1.0, &cfg).is_err());
        assert!(DirectKernel::new(1, cfg).is_err());
        assert!(LogGrid::new(1.0, 0.5, 10).is_err());
        assert!(QuadratureConfig::new(0.0, 1e-14, 10, LogGrid::default()).is_err());
    }

    #[test]
    fn starved_quadrature_reports_convergence_error() {
        let cfg = QuadratureConfig {
            max_refinements: 1,
            rel_tol: 1e-13,
            ..QuadratureConfig::default()
        };
        let err = km_eval(3, 1e-6, &cfg).unwrap_err();
        assert!(matches!(err, Error::Convergence { .. }), "{err:?}");
    }
}
