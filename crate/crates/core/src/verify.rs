//! Named invariant checks for every module, grouped into suites.
//!
//! Each check measures an error, compares it with a tolerance and records
//! the outcome. Checks are independent and run in parallel, but reports
//! always list them in a fixed order and contain no timings, so equal
//! configurations give byte-identical JSON.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64 as C64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bargmann::{
    bargmann_by_quadrature, bargmann_forward, bargmann_inverse, closed_form_m1_report, hermite_fn, hermite_sup,
    HermiteEvaluation, L2Element, HERMITE_BOUND,
};
use crate::coeffspace::{
    aggregate_kernels_exponential, aggregate_kernels_geometric, eval_point, inner_product, kernel_section, norm,
    TaylorCoeffs, WeightIndex,
};
use crate::dualalgebra::{
    cauchy_product, dual_norm, gelfand_chain, pairing, refinement_order, vage_check, vage_constant, DualSequence,
    PolynomialPath,
};
use crate::error::{Error, Result};
use crate::numeric::rel_diff_c;
use crate::operators::{
    apply_a, apply_a_star, apply_a_star_stirling, apply_a_star_word, apply_b, apply_b_star, apply_word,
    commutator_apply, commutator_direct, commutator_formula, norm_identity_report, Letter, OperatorWord,
};
use crate::radialkernel::{
    DirectKernel, LogGrid, ProductFormKernel, QuadratureConfig, RadialKernel, RadialKernels,
};
use crate::stirling::{stirling_s2, verify_normal_ordering};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunConfig {
    /// Cap on the degree of random test elements.
    pub degree: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_refinements: usize,
    pub seed: u64,
    /// Largest `m` for the radial-kernel checks.
    pub kernel_m: u32,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            degree: 64,
            rel_tol: 1e-9,
            abs_tol: 1e-14,
            max_refinements: 500,
            seed: 0,
            kernel_m: 4,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.degree < 1 {
            return Err(Error::input("degree must be at least 1"));
        }
        if self.kernel_m < 1 {
            return Err(Error::input("kernel order must be at least 1"));
        }
        self.quadrature().map(|_| ())
    }

    pub fn quadrature(&self) -> Result<QuadratureConfig> {
        QuadratureConfig::new(self.rel_tol, self.abs_tol, self.max_refinements, LogGrid::default())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    Stirling,
    Kernels,
    Operators,
    Bargmann,
    Dual,
    All,
}

impl Suite {
    const MEMBERS: [Suite; 5] = [Suite::Stirling, Suite::Kernels, Suite::Operators, Suite::Bargmann, Suite::Dual];

    fn includes(self, other: Suite) -> bool {
        self == Suite::All || self == other
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "stirling" => Suite::Stirling,
            "kernels" => Suite::Kernels,
            "operators" => Suite::Operators,
            "bargmann" => Suite::Bargmann,
            "dual" => Suite::Dual,
            "all" => Suite::All,
            other => {
                return Err(Error::input(format!(
                    "unknown suite {other:?}; expected stirling, kernels, operators, bargmann, dual or all"
                )))
            }
        })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Stirling => "stirling",
            Suite::Kernels => "kernels",
            Suite::Operators => "operators",
            Suite::Bargmann => "bargmann",
            Suite::Dual => "dual",
            Suite::All => "all",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub measured_error: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub config: RunConfig,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

impl SuiteReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Outcome of a check body: measured error, tolerance, detail.
type Outcome = Result<(f64, f64, String)>;
type CheckFn = Box<dyn Fn(&Context) -> Outcome + Send + Sync>;

struct Context {
    cfg: RunConfig,
    kernels: RadialKernels,
}

impl Context {
    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(stream);
        rng
    }
}

struct Check {
    suite: Suite,
    name: &'static str,
    body: CheckFn,
}

fn check(suite: Suite, name: &'static str, body: impl Fn(&Context) -> Outcome + Send + Sync + 'static) -> Check {
    Check {
        suite,
        name,
        body: Box::new(body),
    }
}

/// Runs every check of `suite` and collects the results in declaration
/// order.
pub fn run_suite(cfg: &RunConfig, suite: Suite) -> Result<SuiteReport> {
    cfg.validate()?;
    let ctx = Context {
        cfg: *cfg,
        kernels: RadialKernels::new(cfg.quadrature()?),
    };
    let checks: Vec<Check> = all_checks()
        .into_iter()
        .filter(|c| suite.includes(c.suite))
        .collect();
    let results: Vec<CheckResult> = checks
        .par_iter()
        .map(|c| {
            let name = format!("{}.{}", c.suite, c.name);
            match (c.body)(&ctx) {
                Ok((err, tol, detail)) => CheckResult {
                    name,
                    measured_error: err,
                    tolerance: tol,
                    passed: err <= tol,
                    detail,
                },
                Err(e) => CheckResult {
                    name,
                    measured_error: f64::INFINITY,
                    tolerance: 0.0,
                    passed: false,
                    detail: e.to_string(),
                },
            }
        })
        .collect();
    let passed = results.iter().all(|r| r.passed);
    Ok(SuiteReport {
        suite: suite.to_string(),
        config: *cfg,
        checks: results,
        passed,
    })
}

/// Names of the checks in a suite, in report order.
pub fn check_names(suite: Suite) -> Vec<String> {
    all_checks()
        .into_iter()
        .filter(|c| suite.includes(c.suite))
        .map(|c| format!("{}.{}", c.suite, c.name))
        .collect()
}

fn random_c64(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn random_poly(rng: &mut ChaCha8Rng, max_degree: usize) -> TaylorCoeffs {
    let d = rng.gen_range(0..=max_degree);
    TaylorCoeffs::new((0..=d).map(|_| random_c64(rng)).collect())
}

fn random_rational_poly(rng: &mut ChaCha8Rng, max_degree: usize) -> TaylorCoeffs<BigRational> {
    let d = rng.gen_range(0..=max_degree);
    TaylorCoeffs::new(
        (0..=d)
            .map(|_| BigRational::new(rng.gen_range(-50i64..=50).into(), rng.gen_range(1i64..=20).into()))
            .collect(),
    )
}

fn ok(err: f64, tol: f64, detail: impl Into<String>) -> Outcome {
    Ok((err, tol, detail.into()))
}

/// 1 when an exact identity fails, 0 otherwise.
fn exact(holds: bool, detail: impl Into<String>) -> Outcome {
    ok(if holds { 0.0 } else { 1.0 }, 0.0, detail)
}

fn rel_err(a: C64, b: C64) -> f64 {
    rel_diff_c(a, b)
}

/// `K_0(z)` by the trapezoidal rule on `∫_0^∞ exp(-z cosh t) dt`.
fn bessel_k0(z: f64) -> f64 {
    let h = 1.0 / 64.0;
    let mut sum = 0.5 * (-z).exp();
    let mut k = 1;
    loop {
        let v = (-z * (k as f64 * h).cosh()).exp();
        sum += v;
        if v < sum * 1e-20 {
            break;
        }
        k += 1;
    }
    h * sum
}

fn partitions(k: usize, n: usize) -> u64 {
    fn go(pos: usize, k: usize, n: usize, used: usize) -> u64 {
        if pos == k {
            return u64::from(used == n);
        }
        (0..=used.min(n.saturating_sub(1)))
            .map(|b| go(pos + 1, k, n, if b == used { used + 1 } else { used }))
            .sum()
    }
    if k == 0 {
        u64::from(n == 0)
    } else {
        go(0, k, n, 0)
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn all_checks() -> Vec<Check> {
    use Suite::*;
    let mut v = Vec::new();

    v.push(check(Stirling, "partition_count", |_| {
        let mut bad = 0;
        for k in 0..=8 {
            for n in 0..=k + 1 {
                if stirling_s2(k, n) != BigUint::from(partitions(k, n)) {
                    bad += 1;
                }
            }
        }
        exact(bad == 0, "S(k,n) against set-partition enumeration, k <= 8")
    }));
    v.push(check(Stirling, "recurrence_and_boundaries", |_| {
        let mut holds = true;
        for k in 1..=60usize {
            holds &= stirling_s2(k, 0).is_zero() && stirling_s2(k, k).is_one() && stirling_s2(k, k + 1).is_zero();
            for n in 1..=k {
                holds &= stirling_s2(k, n) == BigUint::from(n) * stirling_s2(k - 1, n) + stirling_s2(k - 1, n - 1);
            }
        }
        exact(holds, "S(k,n) = n S(k-1,n) + S(k-1,n-1), k <= 60")
    }));
    v.push(check(Stirling, "normal_ordering", |_| {
        exact(
            (1..=8).all(|k| verify_normal_ordering(k, 12)),
            "(ab)^k = Σ S(k,n) a^n b^n on monomials deg <= 12, k <= 8",
        )
    }));
    v.push(check(Stirling, "falling_factorials", |_| {
        let mut holds = true;
        for k in 1..=12usize {
            for j in 0..=25u64 {
                let rhs: BigUint = (1..=k)
                    .map(|n| stirling_s2(k, n) * (0..n as u64).map(|i| BigUint::from(j.saturating_sub(i))).product::<BigUint>())
                    .sum();
                holds &= rhs == BigUint::from(j).pow(k as u32);
            }
        }
        exact(holds, "j^k = Σ S(k,n) j(j-1)...(j-n+1), k <= 12, j <= 25")
    }));

    v.push(check(Kernels, "moment_identity", |ctx| {
        let mut worst = 0.0f64;
        let mut at = (0, 0);
        for m in 1..=ctx.cfg.kernel_m {
            for n in 0..=8usize {
                let got = ctx.kernels.km_moment(m, n)?.value;
                let want = factorial(n).powi(m as i32);
                let e = (got - want).abs() / want;
                if e > worst {
                    worst = e;
                    at = (m, n);
                }
            }
        }
        ok(worst, 1e-6, format!("∫ x^n K_m = (n!)^m, m <= {}, n <= 8; worst at (m,n) = {at:?}", ctx.cfg.kernel_m))
    }));
    v.push(check(Kernels, "bessel_identification", |ctx| {
        let k2 = ctx.kernels.exact(2)?;
        let mut worst = 0.0f64;
        for x in [0.1f64, 0.5, 1.0, 2.0, 4.0, 10.0] {
            let oracle = 2.0 * bessel_k0(2.0 * x.sqrt());
            worst = worst.max((k2.eval(x)? - oracle).abs() / oracle);
        }
        ok(worst, 1e-8, "K_2(x) = 2 K_0(2√x) at six points")
    }));
    v.push(check(Kernels, "monotonicity", |ctx| {
        let mut violations = 0;
        for m in 1..=ctx.cfg.kernel_m.min(4) {
            let k = ctx.kernels.exact(m)?;
            let mut prev = f64::INFINITY;
            for i in 0..100 {
                let x = 0.01 * (5000f64).powf(i as f64 / 99.0);
                let v = k.ln_eval(x)?;
                if v >= prev {
                    violations += 1;
                }
                prev = v;
            }
        }
        ok(violations as f64, 0.0, "K_m strictly decreasing on 100 points of (0.01, 50)")
    }));
    v.push(check(Kernels, "table_invariants", |ctx| {
        for m in 1..=ctx.cfg.kernel_m {
            ctx.kernels.table(m)?.check_invariants()?;
        }
        exact(true, "cached tables positive and non-increasing")
    }));
    v.push(check(Kernels, "representation_consistency", |ctx| {
        let cfg = *ctx.kernels.config();
        let mut worst = 0.0f64;
        for m in [2, 3] {
            let a = DirectKernel::new(m, cfg)?;
            let b = ProductFormKernel::new(m, cfg)?;
            for x in [0.05, 1.0, 7.0] {
                let (va, vb) = (a.eval(x)?, b.eval(x)?);
                worst = worst.max((va - vb).abs() / va);
            }
        }
        ok(worst, 1e-6, "exponential-variable and product-form integrals agree, m = 2, 3")
    }));
    v.push(check(Kernels, "route_consistency", |ctx| {
        let cfg = *ctx.kernels.config();
        let direct = DirectKernel::new(3, cfg)?;
        let conv = crate::radialkernel::ConvolvedKernel::new(Arc::new(DirectKernel::new(2, cfg)?), cfg);
        let mut worst = 0.0f64;
        for x in [0.1, 1.0, 10.0] {
            let (a, b) = (direct.eval(x)?, conv.eval(x)?);
            worst = worst.max((a - b).abs() / a);
        }
        ok(worst, 1e-6, "K_3 by direct quadrature vs K_2 * K_1")
    }));
    v.push(check(Kernels, "geometric_inner_product", |ctx| {
        let mut rng = ctx.rng(11);
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let f = random_poly(&mut rng, 6);
            let g = random_poly(&mut rng, 6);
            let m = rng.gen_range(1..=ctx.cfg.kernel_m.min(3));
            let geo = ctx.kernels.geometric_inner_product(&f, &g, m)?;
            let coef = inner_product(&f, &g, WeightIndex(m as i64))?;
            worst = worst.max(rel_err(geo, coef));
        }
        ok(worst, 1e-6, "plane integral against K_m vs coefficient inner product, 20 random pairs")
    }));
    v.push(check(Kernels, "reproducing_property", |ctx| {
        let mut rng = ctx.rng(12);
        let deg = ctx.cfg.degree.min(30);
        let mut worst = 0.0f64;
        for _ in 0..200 {
            let m = rng.gen_range(1..=6);
            let f = random_poly(&mut rng, deg);
            let w = C64::from_polar(rng.gen_range(0.0..2.0), rng.gen_range(0.0..std::f64::consts::TAU));
            let k = kernel_section(WeightIndex(m), w, f.truncation_degree())?;
            let lhs = inner_product(&f, &k, WeightIndex(m))?;
            worst = worst.max(rel_err(lhs, eval_point(&f, w)));
        }
        ok(worst, 1e-12, format!("⟨f, k_m(·,w)⟩ = f(w), m <= 6, |w| <= 2, deg <= {deg}"))
    }));
    v.push(check(Kernels, "aggregation_geometric", |_| {
        aggregation_grid(aggregate_kernels_geometric)
    }));
    v.push(check(Kernels, "aggregation_exponential", |_| {
        aggregation_grid(aggregate_kernels_exponential)
    }));

    v.push(check(Operators, "adjoint_a", |ctx| {
        let mut rng = ctx.rng(21);
        let deg = ctx.cfg.degree.min(40);
        let mut worst = 0.0f64;
        for _ in 0..1000 {
            let m = WeightIndex(rng.gen_range(1..=5));
            let f = random_poly(&mut rng, deg);
            let g = random_poly(&mut rng, deg);
            let lhs = inner_product(&apply_a(&f), &g, m)?;
            let rhs = inner_product(&f, &apply_a_star(&g, m)?, m)?;
            worst = worst.max(rel_err(lhs, rhs));
        }
        ok(worst, 1e-12, format!("⟨af, g⟩ = ⟨f, a*g⟩, 1000 pairs, m <= 5, deg <= {deg}"))
    }));
    v.push(check(Operators, "adjoint_b", |ctx| {
        let mut rng = ctx.rng(22);
        let deg = ctx.cfg.degree.min(40);
        let mut worst = 0.0f64;
        for _ in 0..1000 {
            let m = WeightIndex(rng.gen_range(1..=5));
            let f = random_poly(&mut rng, deg);
            let g = random_poly(&mut rng, deg);
            let lhs = inner_product(&apply_b(&f), &g, m)?;
            let rhs = inner_product(&f, &apply_b_star(&g, m)?, m)?;
            worst = worst.max(rel_err(lhs, rhs));
        }
        ok(worst, 1e-12, format!("⟨bf, g⟩ = ⟨f, b*g⟩, 1000 pairs, m <= 5, deg <= {deg}"))
    }));
    v.push(check(Operators, "word_identities", |_| {
        let (a, b) = (OperatorWord::new(vec![Letter::A]), OperatorWord::new(vec![Letter::B]));
        let mut holds = true;
        for n in 1..=8usize {
            let bn_a = b.pow(n).then(&a);
            let a_bn = a.then(&b.pow(n));
            let a_n_b = a.pow(n).then(&b);
            let b_an = b.then(&a.pow(n));
            for d in 0..=20 {
                let f = TaylorCoeffs::<BigInt>::monomial(d);
                let nn = BigInt::from(n);
                holds &= apply_word(&bn_a, &f) == apply_word(&a_bn, &f).add(&apply_word(&b.pow(n - 1), &f).scale(&nn));
                holds &= apply_word(&b_an, &f) == apply_word(&a_n_b, &f).add(&apply_word(&a.pow(n - 1), &f).scale(&nn));
            }
        }
        exact(holds, "b^n a = a b^n + n b^{n-1} and b a^n = a^n b + n a^{n-1}, n <= 8, deg <= 20")
    }));
    v.push(check(Operators, "canonical_commutation", |ctx| {
        let mut rng = ctx.rng(23);
        let ba: OperatorWord = "BA".parse()?;
        let ab: OperatorWord = "AB".parse()?;
        let holds = (0..200).all(|_| {
            let f = random_rational_poly(&mut rng, 20);
            apply_word(&ba, &f).sub(&apply_word(&ab, &f)) == f
        });
        exact(holds, "[b, a] = I on 200 random rational polynomials")
    }));
    v.push(check(Operators, "a_star_forms", |_| {
        let mut holds = true;
        for m in 1..=8 {
            for d in 0..=20 {
                let f = TaylorCoeffs::<BigInt>::monomial(d);
                let w = WeightIndex(m);
                let direct = apply_a_star(&f, w)?;
                holds &= direct == apply_a_star_word(&f, w)? && direct == apply_a_star_stirling(&f, w)?;
            }
        }
        exact(holds, "a* as (ba)^{m-1}b, as b Σ S(m-1,n) a^n b^n and coefficientwise, m <= 8, deg <= 20")
    }));
    v.push(check(Operators, "commutator_monomials", |_| {
        let mut holds = true;
        for m in 1..=6 {
            for d in 0..=20 {
                let f = TaylorCoeffs::<BigInt>::monomial(d);
                holds &= commutator_apply(&f, WeightIndex(m)).is_ok();
            }
        }
        exact(holds, "[a*, a] direct vs Stirling formula, monomials deg <= 20, m <= 6")
    }));
    v.push(check(Operators, "commutator_rational", |ctx| {
        let mut rng = ctx.rng(24);
        let mut holds = true;
        for _ in 0..200 {
            let m = WeightIndex(rng.gen_range(1..=6));
            let f = random_rational_poly(&mut rng, 20);
            holds &= commutator_direct(&f, m)? == commutator_formula(&f, m)?;
        }
        exact(holds, "[a*, a] routes agree on 200 random rational polynomials")
    }));
    v.push(check(Operators, "norm_identity", |ctx| {
        let mut rng = ctx.rng(25);
        let deg = ctx.cfg.degree.min(40);
        let mut worst = 0.0f64;
        for _ in 0..200 {
            let m = WeightIndex(rng.gen_range(1..=5));
            let f = random_poly(&mut rng, deg);
            worst = worst.max(norm_identity_report(&f, m)?.rel_err);
        }
        ok(worst, 1e-12, "‖af‖² = ‖a*f‖² + ‖f‖² + Σ C(m,k) Σ|f_n|²(n!)^m n^k, 200 elements")
    }));

    v.push(check(Bargmann, "rodrigues_oracle", |_| {
        let mut worst = 0.0f64;
        for n in 0..=6 {
            for t in [-2.5, -1.0, -0.2, 0.0, 0.6, 1.7, 3.0] {
                worst = worst.max((hermite_fn(n, t) - rodrigues_eta(n, t)).abs());
            }
        }
        ok(worst, 1e-12, "recurrence vs symbolic derivatives of e^{-t²}, n <= 6")
    }));
    v.push(check(Bargmann, "discrete_orthonormality", |_| {
        let ev = HermiteEvaluation::new(60, 61)?;
        ok(ev.orthonormality_error(), 1e-8, "Gauss-Hermite Gram matrix of η_0..η_60 on 61 nodes")
    }));
    v.push(check(Bargmann, "uniform_bound", |_| {
        let sup = hermite_sup(200, 25.0, 4001);
        ok(sup, HERMITE_BOUND, format!("max |η_n(t)| over n <= 200, |t| <= 25 is {sup:.6}"))
    }));
    v.push(check(Bargmann, "unitarity", |ctx| {
        let mut rng = ctx.rng(31);
        let n_max = ctx.cfg.degree.min(60);
        let mut worst = 0.0f64;
        for _ in 0..200 {
            let m = rng.gen_range(1..=5u32);
            let n = rng.gen_range(0..=n_max);
            let g = L2Element::new((0..=n).map(|_| random_c64(&mut rng)).collect());
            let f = bargmann_forward(&g, m)?;
            let (a, b) = (norm(&f, WeightIndex(m as i64)).value, g.norm());
            worst = worst.max((a - b).abs() / b);
        }
        ok(worst, 1e-12, format!("‖B_m g‖ = ‖g‖, 200 elements, m <= 5, N <= {n_max}"))
    }));
    v.push(check(Bargmann, "round_trip", |ctx| {
        let mut rng = ctx.rng(32);
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let m = rng.gen_range(1..=5u32);
            let g = L2Element::new((0..=rng.gen_range(0..=40)).map(|_| random_c64(&mut rng)).collect());
            let back = bargmann_inverse(&bargmann_forward(&g, m)?, m)?;
            for (x, y) in back.hermite_coeffs.iter().zip(&g.hermite_coeffs) {
                worst = worst.max(rel_err(*x, *y));
            }
        }
        ok(worst, 1e-13, "inverse(forward(g)) = g")
    }));
    v.push(check(Bargmann, "quadrature_vs_coordinates", |ctx| {
        let mut rng = ctx.rng(33);
        let mut worst = 0.0f64;
        for _ in 0..12 {
            let m = rng.gen_range(1..=5u32);
            let g = L2Element::new((0..=rng.gen_range(0..=15)).map(|_| random_c64(&mut rng)).collect());
            let z = C64::from_polar(rng.gen_range(0.0..2.0), rng.gen_range(0.0..std::f64::consts::TAU));
            let q = bargmann_by_quadrature(&g, m, z, 1e-16)?;
            let c = eval_point(&bargmann_forward(&g, m)?, z);
            worst = worst.max((q - c).norm() / c.norm().max(1.0));
        }
        ok(worst, 1e-8, "∫ h_m(z,t) g(t) dt vs Σ c_n z^n/(n!)^{m/2}, N <= 15, |z| <= 2")
    }));
    v.push(check(Bargmann, "m1_closed_form", |_| {
        let zs = [C64::new(0.5, 0.0), C64::new(-1.0, 0.5), C64::new(0.3, -1.2), C64::new(1.5, 0.2)];
        let ts = [-1.5, -0.2, 0.3, 2.0];
        let r = closed_form_m1_report(&zs, &ts)?;
        ok(
            r.derived_max_rel_err,
            1e-10,
            format!(
                "series matches π^{{-1/4}} exp(-t²/2 - √2 tz - z²/2); exp(2tz - t² - z²/2) deviates by up to {:.3e} (ratio spread {:.3e})",
                r.candidate_max_rel_err, r.candidate_ratio_spread
            ),
        )
    }));

    v.push(check(Dual, "vage_inequality", |ctx| {
        let mut rng = ctx.rng(41);
        let mut worst = 0.0f64;
        for d in 1..=3u32 {
            for _ in 0..1000 {
                let p = rng.gen_range(1..=3u32);
                let q = p + d;
                let a = DualSequence::new((0..rng.gen_range(1..=20)).map(|_| random_c64(&mut rng)).collect(), q);
                let b = DualSequence::new((0..rng.gen_range(1..=20)).map(|_| random_c64(&mut rng)).collect(), p);
                worst = worst.max(vage_check(&a, &b, p, q)?.ratio);
            }
        }
        ok(worst, 1.0 + 1e-12, "max of ‖a*b‖_{2-q} / (A(q-p) ‖a‖_{2-p} ‖b‖_{2-q}) over 3000 pairs")
    }));
    v.push(check(Dual, "vage_non_vacuous", |_| {
        let e0 = DualSequence::<C64>::unit(0, 1);
        let b = DualSequence::new(vec![C64::new(0.3, 1.0), C64::new(-2.0, 0.0), C64::new(0.5, 0.5)], 2);
        let mut worst = 0.0f64;
        for (p, q) in [(1, 2), (1, 3), (2, 5)] {
            let r = vage_check(&e0, &b, p, q)?;
            worst = worst.max((r.ratio * vage_constant(q - p)? - 1.0).abs());
        }
        ok(worst, 1e-12, "a = e_0 attains ratio 1/A(q-p)")
    }));
    v.push(check(Dual, "vage_constant", |_| {
        ok((vage_constant(1)? - std::f64::consts::E.sqrt()).abs(), 1e-12, "A(1) = √e")
    }));
    v.push(check(Dual, "algebra_axioms", |ctx| {
        let mut rng = ctx.rng(42);
        let rand_seq = |rng: &mut ChaCha8Rng| {
            DualSequence::new((0..rng.gen_range(1..=8)).map(|_| BigInt::from(rng.gen_range(-9i64..=9))).collect(), 1)
        };
        let mut holds = true;
        for _ in 0..100 {
            let (a, b, c) = (rand_seq(&mut rng), rand_seq(&mut rng), rand_seq(&mut rng));
            let s = BigInt::from(rng.gen_range(-5i64..=5));
            holds &= cauchy_product(&a, &b).same_coeffs(&cauchy_product(&b, &a));
            holds &= cauchy_product(&cauchy_product(&a, &b), &c).same_coeffs(&cauchy_product(&a, &cauchy_product(&b, &c)));
            holds &= cauchy_product(&a.add(&b.scale(&s)), &c)
                .same_coeffs(&cauchy_product(&a, &c).add(&cauchy_product(&b, &c).scale(&s)));
            holds &= cauchy_product(&a, &DualSequence::unit(0, 1)).same_coeffs(&a);
        }
        exact(holds, "commutative, associative, bilinear, unit e_0 (exact integers)")
    }));
    v.push(check(Dual, "gelfand_chain", |ctx| {
        let mut rng = ctx.rng(43);
        let mut bad = 0;
        for _ in 0..200 {
            let f = random_poly(&mut rng, 30);
            if !gelfand_chain(&f, rng.gen_range(1..=5))?.ordered {
                bad += 1;
            }
        }
        ok(bad as f64, 0.0, "‖·‖_{2-(m+1)} <= ‖·‖_{2-m} <= ‖·‖_{F_1} <= ‖·‖_{F_m} <= ‖·‖_{F_{m+1}}")
    }));
    v.push(check(Dual, "pairing_bound", |ctx| {
        let mut rng = ctx.rng(44);
        let mut worst = 0.0f64;
        for _ in 0..200 {
            let m = rng.gen_range(1..=5u32);
            let f = random_poly(&mut rng, 30);
            let b = DualSequence::new(random_poly(&mut rng, 30).into_coeffs(), m);
            let lhs = pairing(&f, &b)?.norm();
            let bound = norm(&f, WeightIndex(m as i64)).value * dual_norm(&b, m)?.value;
            worst = worst.max(lhs / bound);
        }
        ok(worst, 1.0 + 1e-12, "|(f, b)| <= ‖f‖_m ‖b‖_{2-m}")
    }));
    v.push(check(Dual, "riemann_refinement", |_| {
        let c = |re: f64| C64::new(re, 0.0);
        let f = PolynomialPath {
            terms: vec![vec![c(1.0), c(-0.5)], vec![c(0.2), c(1.0)], vec![c(-1.0)], vec![c(0.0), c(0.0), c(2.0)]],
        };
        let g = PolynomialPath { terms: vec![vec![c(0.5)], vec![c(0.0), c(-1.0)], vec![], vec![c(1.0), c(0.3)]] };
        let order = refinement_order(&f, &g, 2, 8, 6)?;
        ok((order - 2.0).abs(), 0.1, format!("trapezoidal order {order:.4}"))
    }));
    v
}

/// Operator identities at one weight index `m` on elements of degree at
/// most `degree`: exact checks on every monomial, seeded random checks for
/// adjointness and the norm identity.
pub fn verify_operators(m: WeightIndex, degree: usize, seed: u64) -> Result<SuiteReport> {
    if m.m() < 1 {
        return Err(Error::domain(format!("operator identities need m >= 1, got {}", m.m())));
    }
    let cfg = RunConfig {
        degree,
        seed,
        ..RunConfig::default()
    };
    cfg.validate()?;
    let monomials: Vec<TaylorCoeffs<BigInt>> = (0..=degree).map(TaylorCoeffs::monomial).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(TaylorCoeffs, TaylorCoeffs)> = (0..200)
        .map(|_| (random_poly(&mut rng, degree), random_poly(&mut rng, degree)))
        .collect();
    let mut checks = Vec::new();
    let mut push = |name: &str, outcome: Outcome| {
        let (err, tol, detail) = outcome.unwrap_or_else(|e| (f64::INFINITY, 0.0, e.to_string()));
        checks.push(CheckResult {
            name: format!("operators.{name}"),
            measured_error: err,
            tolerance: tol,
            passed: err <= tol,
            detail,
        });
    };
    push(
        "a_star_forms",
        (|| {
            let mut holds = true;
            for f in &monomials {
                let direct = apply_a_star(f, m)?;
                holds &= direct == apply_a_star_word(f, m)? && direct == apply_a_star_stirling(f, m)?;
            }
            exact(holds, "coefficient, word and Stirling forms of a* on monomials")
        })(),
    );
    push(
        "commutator",
        (|| {
            let mut holds = true;
            for f in &monomials {
                holds &= commutator_direct(f, m)? == commutator_formula(f, m)?;
            }
            exact(holds, "[a*, a] direct vs Stirling formula on monomials")
        })(),
    );
    push(
        "canonical_commutation",
        (|| {
            let ba: OperatorWord = "BA".parse()?;
            let ab: OperatorWord = "AB".parse()?;
            exact(
                monomials.iter().all(|f| &apply_word(&ba, f).sub(&apply_word(&ab, f)) == f),
                "[b, a] = I on monomials",
            )
        })(),
    );
    push(
        "adjoint_a",
        (|| {
            let mut worst = 0.0f64;
            for (f, g) in &pairs {
                let lhs = inner_product(&apply_a(f), g, m)?;
                worst = worst.max(rel_err(lhs, inner_product(f, &apply_a_star(g, m)?, m)?));
            }
            ok(worst, 1e-12, "⟨af, g⟩ = ⟨f, a*g⟩ on 200 random pairs")
        })(),
    );
    push(
        "adjoint_b",
        (|| {
            let mut worst = 0.0f64;
            for (f, g) in &pairs {
                let lhs = inner_product(&apply_b(f), g, m)?;
                worst = worst.max(rel_err(lhs, inner_product(f, &apply_b_star(g, m)?, m)?));
            }
            ok(worst, 1e-12, "⟨bf, g⟩ = ⟨f, b*g⟩ on 200 random pairs")
        })(),
    );
    push(
        "norm_identity",
        (|| {
            let mut worst = 0.0f64;
            for (f, _) in &pairs {
                worst = worst.max(norm_identity_report(f, m)?.rel_err);
            }
            ok(worst, 1e-12, "‖af‖² against its decomposition on 200 random elements")
        })(),
    );
    let passed = checks.iter().all(|c| c.passed);
    Ok(SuiteReport {
        suite: format!("operators(m={}, degree={degree})", m.m()),
        config: cfg,
        checks,
        passed,
    })
}

type Aggregation = fn(f64, C64, C64, usize) -> Result<(C64, C64)>;

fn aggregation_grid(f: Aggregation) -> Outcome {
    let mut worst = 0.0f64;
    for eps in [0.1, 0.5, 0.9] {
        for z in [C64::new(0.3, 0.0), C64::new(-1.0, 0.7), C64::new(1.5, -1.2)] {
            for w in [C64::new(0.5, 0.5), C64::new(2.0, 0.0), C64::new(-0.4, -1.1)] {
                let (lhs, rhs) = f(eps, z, w, 80)?;
                worst = worst.max(rel_err(lhs, rhs));
            }
        }
    }
    ok(worst, 1e-10, "both sides on a 3x3x3 grid of (ε, z, w)")
}

/// Symbolic `(d/dt)^n e^{-t²} = P_n(t) e^{-t²}` turned into `η_n`.
fn rodrigues_eta(n: usize, t: f64) -> f64 {
    let mut p = vec![1i128];
    for _ in 0..n {
        let mut next = vec![0i128; p.len() + 1];
        for (k, c) in p.iter().enumerate() {
            if k > 0 {
                next[k - 1] += k as i128 * c;
            }
            next[k + 1] -= 2 * c;
        }
        p = next;
    }
    let poly: f64 = p.iter().rev().fold(0.0, |acc, &c| acc * t + c as f64);
    let norm = std::f64::consts::PI.powf(0.25) * 2f64.powf(n as f64 / 2.0) * factorial(n).sqrt();
    (-0.5 * t * t).exp() * poly / norm
}

pub fn suites() -> [Suite; 5] {
    Suite::MEMBERS
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_parse() {
        for s in suites() {
            assert_eq!(s.to_string().parse::<Suite>().unwrap(), s);
        }
        assert_eq!("all".parse::<Suite>().unwrap(), Suite::All);
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn all_has_enough_checks() {
        assert!(check_names(Suite::All).len() >= 25);
        let mut names = check_names(Suite::All);
        names.dedup();
        assert_eq!(names.len(), check_names(Suite::All).len());
    }

    #[test]
    fn stirling_suite_passes() {
        let r = run_suite(&RunConfig::default(), Suite::Stirling).unwrap();
        assert!(r.passed, "{:?}", r.failures().collect::<Vec<_>>());
    }

    #[test]
    fn starved_kernels_suite_fails_with_convergence() {
        let cfg = RunConfig {
            max_refinements: 1,
            rel_tol: 1e-13,
            kernel_m: 2,
            ..RunConfig::default()
        };
        let r = run_suite(&cfg, Suite::Kernels).unwrap();
        assert!(!r.passed);
        assert!(r.failures().any(|c| c.detail.contains("did not converge")));
    }

    #[test]
    fn invalid_config_rejected() {
        let cfg = RunConfig {
            rel_tol: 0.0,
            ..RunConfig::default()
        };
        assert!(run_suite(&cfg, Suite::Stirling).is_err());
    }

    #[test]
    fn operator_report_at_fixed_m() {
        let r = verify_operators(WeightIndex(3), 20, 7).unwrap();
        assert!(r.passed, "{:?}", r.failures().collect::<Vec<_>>());
        assert_eq!(r.checks.len(), 6);
        assert!(verify_operators(WeightIndex(0), 20, 7).is_err());
    }
}
