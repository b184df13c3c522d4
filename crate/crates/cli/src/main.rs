use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use fockspace::bargmann::{bargmann_forward, bargmann_inverse, L2Element};
use fockspace::coeffspace::{eval_point, kernel_section};
use fockspace::dualalgebra::{
    dual_norm, gelfand_chain, literal_vage_check, riemann_integral_product, vage_check, vage_constant, DualSequence,
    PathSample,
};
use fockspace::numeric::{ln_factorial, rel_diff_c};
use fockspace::operators::{
    apply_a_star, apply_b_star, apply_word, commutator_apply, in_domain, norm_identity_report, OperatorWord,
};
use fockspace::radialkernel::{LogGrid, QuadratureConfig, RadialKernelTable, RadialKernels};
use fockspace::stirling::StirlingTable;
use fockspace::verify::{run_suite, verify_operators, RunConfig, Suite, SuiteReport};
use fockspace::{inner_product, kernel_eval, norm, Error, TaylorCoeffs, WeightIndex};

#[derive(Parser)]
#[command(name = "fockm", version, about = "Generalized Fock spaces F_m: kernels, weights, operators, transforms")]
struct Cli {
    /// Seed for every randomized check.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Relative tolerance for quadrature and pass/fail thresholds.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Truncation degree cap for generated elements.
    #[arg(long, global = true, default_value_t = 64)]
    degree: usize,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Direction {
    Fwd,
    Inv,
}

#[derive(Subcommand)]
enum Command {
    /// Stirling numbers of the second kind S(k, n) for k <= max-k.
    Stirling {
        #[arg(long)]
        max_k: usize,
    },
    /// K_m tabulated on a log-spaced grid.
    KernelTable {
        #[arg(long)]
        m: u32,
        #[arg(long, default_value_t = 1e-8)]
        xmin: f64,
        #[arg(long, default_value_t = 1e8)]
        xmax: f64,
        #[arg(long, default_value_t = 321)]
        points: usize,
    },
    /// Moments ∫ x^n K_m(x) dx against (n!)^m.
    Moments {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        nmax: usize,
    },
    /// Reproducing kernel k_m(z, w); z and w from flags or a JSON object {"z": [re, im], "w": [re, im]}.
    KernelEval {
        #[arg(long)]
        m: i64,
        #[arg(long, value_parser = parse_c64)]
        z: Option<C64>,
        #[arg(long, value_parser = parse_c64)]
        w: Option<C64>,
        #[arg(long = "in")]
        input: Option<PathBuf>,
    },
    /// ⟨f, g⟩ in F_m; "-" reads from stdin.
    InnerProduct {
        #[arg(long)]
        m: i64,
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        g: PathBuf,
    },
    /// ⟨f, k_m(·, w)⟩ against f(w).
    ReproduceCheck {
        #[arg(long)]
        m: i64,
        #[arg(long, value_parser = parse_c64)]
        w: C64,
        #[arg(long = "in")]
        input: Option<PathBuf>,
    },
    /// Applies a word over {A, B} and reports a*, b*, [a*, a], the domain functional and the norm identity.
    OpApply {
        #[arg(long)]
        word: String,
        #[arg(long)]
        m: i64,
        #[arg(long = "in")]
        input: Option<PathBuf>,
    },
    /// Operator identity suite at one m.
    VerifyOperators {
        #[arg(long)]
        m: i64,
        #[arg(long)]
        deg: usize,
    },
    /// Generalized Bargmann transform on Hermite or Taylor coefficients.
    Bargmann {
        #[arg(long)]
        m: u32,
        #[arg(long, value_enum)]
        direction: Direction,
        #[arg(long = "in")]
        input: Option<PathBuf>,
    },
    /// Norm of a sequence in the dual space F_{2-m}.
    DualNorm {
        #[arg(long)]
        m: u32,
        #[arg(long = "in")]
        input: Option<PathBuf>,
    },
    /// Random trials of the product inequality ‖a*b‖_{2-q} <= A(q-p) ‖a‖_{2-p} ‖b‖_{2-q}.
    VageCheck {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        q: u32,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
    /// Trapezoidal ∫_0^1 f(t) * g(t) dt of two sampled dual-valued paths.
    Integrate {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        g: PathBuf,
    },
    /// Runs a named verification suite.
    Verify {
        #[arg(value_parser = parse_suite)]
        suite: Suite,
        /// Largest m for the kernel checks.
        #[arg(long, default_value_t = 4)]
        m: u32,
        #[arg(long, default_value_t = 500)]
        max_refinements: usize,
        #[arg(long, default_value_t = 1e-14)]
        abs_tol: f64,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("invalid JSON input: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::Input(_) | Error::Domain(_)) => 2,
            CliError::Core(_) => 1,
            _ => 2,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Text to emit plus whether every check it reports passed.
struct Output {
    text: String,
    passed: bool,
}

impl Output {
    fn ok(text: String) -> Self {
        Output { text, passed: true }
    }
}

fn parse_c64(s: &str) -> Result<C64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |p: &str| p.parse::<f64>().map_err(|e| format!("{p:?}: {e}"));
    match parts.as_slice() {
        [re] => Ok(C64::new(num(re)?, 0.0)),
        [re, im] => Ok(C64::new(num(re)?, num(im)?)),
        _ => Err(format!("expected RE or RE,IM, got {s:?}")),
    }
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn read_input(path: Option<&Path>) -> CliResult<String> {
    let mut buf = String::new();
    match path {
        Some(p) if p != Path::new("-") => {
            return fs::read_to_string(p).map_err(|source| CliError::Io {
                path: p.display().to_string(),
                source,
            })
        }
        _ => io::stdin().read_to_string(&mut buf).map_err(|source| CliError::Io {
            path: "<stdin>".into(),
            source,
        })?,
    };
    Ok(buf)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: Option<&Path>) -> CliResult<T> {
    Ok(serde_json::from_str(&read_input(path)?)?)
}

fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

#[derive(Deserialize)]
struct Points {
    z: C64,
    w: C64,
}

#[derive(Deserialize)]
struct Coeffs {
    coeffs: Vec<C64>,
}

fn quadrature(cli: &Cli) -> CliResult<QuadratureConfig> {
    let d = QuadratureConfig::default();
    Ok(QuadratureConfig::new(cli.tol, d.abs_tol, d.max_refinements, d.grid)?)
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Io {
        path: "<csv>".into(),
        source: io::Error::other(e),
    }
}

fn report_output(report: &SuiteReport, format: Format) -> CliResult<Output> {
    let text = match format {
        Format::Json => to_json(report)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["name", "measured_error", "tolerance", "passed", "detail"])
                .map_err(csv_err)?;
            for c in &report.checks {
                w.write_record([
                    c.name.clone(),
                    format!("{:e}", c.measured_error),
                    format!("{:e}", c.tolerance),
                    c.passed.to_string(),
                    c.detail.clone(),
                ])
                .map_err(csv_err)?;
            }
            String::from_utf8(w.into_inner().map_err(|e| csv_err(e.into_error().into()))?)
                .map_err(|e| CliError::Usage(e.to_string()))?
        }
    };
    Ok(Output {
        text,
        passed: report.passed,
    })
}

fn run(cli: &Cli) -> CliResult<Output> {
    let format = |default: Format| cli.format.unwrap_or(default);
    match &cli.command {
        Command::Stirling { max_k } => {
            let table = StirlingTable::with_max_k(*max_k);
            let rows: Vec<Vec<String>> = (0..=*max_k)
                .map(|k| table.row(k).iter().map(|v| v.to_string()).collect())
                .collect();
            match format(Format::Csv) {
                Format::Csv => {
                    let mut s = String::from("k");
                    for n in 0..=*max_k {
                        s += &format!(",{n}");
                    }
                    s.push('\n');
                    for (k, row) in rows.iter().enumerate() {
                        s += &k.to_string();
                        for n in 0..=*max_k {
                            s.push(',');
                            s += row.get(n).map(String::as_str).unwrap_or("0");
                        }
                        s.push('\n');
                    }
                    Ok(Output::ok(s))
                }
                Format::Json => Ok(Output::ok(to_json(&json!({ "max_k": max_k, "rows": rows }))?)),
            }
        }
        Command::KernelTable { m, xmin, xmax, points } => {
            let grid = LogGrid::new(*xmin, *xmax, *points)?;
            let kernels = RadialKernels::new(quadrature(cli)?);
            let table = RadialKernelTable::build(kernels.exact(*m)?, grid)?;
            table.check_invariants()?;
            let samples = table.samples();
            match format(Format::Csv) {
                Format::Csv => {
                    let mut s = String::from("x,K\n");
                    for (x, k) in samples {
                        s += &format!("{x:e},{k:e}\n");
                    }
                    Ok(Output::ok(s))
                }
                Format::Json => Ok(Output::ok(to_json(&json!({ "m": m, "samples": samples }))?)),
            }
        }
        Command::Moments { m, nmax } => {
            let kernels = RadialKernels::new(quadrature(cli)?);
            let mut rows = Vec::new();
            for n in 0..=*nmax {
                let est = kernels.km_moment(*m, n)?;
                let exact = (*m as f64 * ln_factorial(n)).exp();
                let rel = (est.value - exact).abs() / exact;
                rows.push((n, est, exact, rel));
            }
            let text = match format(Format::Csv) {
                Format::Csv => {
                    let mut s = String::from("n,computed,exact,rel_err\n");
                    for (n, est, exact, rel) in &rows {
                        s += &format!("{n},{:.17e},{exact:.17e},{rel:e}\n", est.value);
                    }
                    s
                }
                Format::Json => to_json(
                    &rows
                        .iter()
                        .map(|(n, est, exact, rel)| json!({ "n": n, "computed": est, "exact": exact, "rel_err": rel }))
                        .collect::<Vec<_>>(),
                )?,
            };
            Ok(Output::ok(text))
        }
        Command::KernelEval { m, z, w, input } => {
            let (z, w) = match (z, w) {
                (Some(z), Some(w)) => (*z, *w),
                (None, None) => {
                    let p: Points = read_json(input.as_deref())?;
                    (p.z, p.w)
                }
                _ => return Err(CliError::Usage("give both --z and --w, or neither".into())),
            };
            let value = kernel_eval(WeightIndex(*m), z, w, 1e-16)?;
            Ok(Output::ok(to_json(&json!({ "m": m, "z": z, "w": w, "value": value }))?))
        }
        Command::InnerProduct { m, f, g } => {
            if f == Path::new("-") && g == Path::new("-") {
                return Err(CliError::Usage("only one of --f and --g can read stdin".into()));
            }
            let f: TaylorCoeffs = read_json(Some(f))?;
            let g: TaylorCoeffs = read_json(Some(g))?;
            let m = WeightIndex(*m);
            let value = inner_product(&f, &g, m)?;
            Ok(Output::ok(to_json(&json!({
                "m": m.m(),
                "value": value,
                "norm_f": norm(&f, m),
                "norm_g": norm(&g, m),
            }))?))
        }
        Command::ReproduceCheck { m, w, input } => {
            let f: TaylorCoeffs = read_json(input.as_deref())?;
            let m = WeightIndex(*m);
            let section = kernel_section(m, *w, f.truncation_degree())?;
            let lhs = inner_product(&f, &section, m)?;
            let rhs = eval_point(&f, *w);
            let rel_err = rel_diff_c(lhs, rhs);
            let passed = rel_err <= cli.tol;
            Ok(Output {
                text: to_json(&json!({
                    "m": m.m(),
                    "w": w,
                    "inner_product": lhs,
                    "point_value": rhs,
                    "rel_err": rel_err,
                    "tolerance": cli.tol,
                    "passed": passed,
                }))?,
                passed,
            })
        }
        Command::OpApply { word, m, input } => {
            let word: OperatorWord = word.parse()?;
            let f: TaylorCoeffs = read_json(input.as_deref())?;
            let m = WeightIndex(*m);
            Ok(Output::ok(to_json(&json!({
                "word": word.to_string(),
                "m": m.m(),
                "result": apply_word(&word, &f),
                "a_star": apply_a_star(&f, m)?,
                "b_star": apply_b_star(&f, m)?,
                "commutator": commutator_apply(&f, m)?,
                "domain": in_domain(&f, m)?,
                "norm_identity": norm_identity_report(&f, m)?,
            }))?))
        }
        Command::VerifyOperators { m, deg } => {
            let report = verify_operators(WeightIndex(*m), *deg, cli.seed)?;
            report_output(&report, format(Format::Json))
        }
        Command::Bargmann { m, direction, input } => {
            let text = match direction {
                Direction::Fwd => {
                    let g: L2Element = read_json(input.as_deref())?;
                    to_json(&bargmann_forward(&g, *m)?)?
                }
                Direction::Inv => {
                    let f: TaylorCoeffs = read_json(input.as_deref())?;
                    to_json(&bargmann_inverse(&f, *m)?)?
                }
            };
            Ok(Output::ok(text))
        }
        Command::DualNorm { m, input } => {
            let b: Coeffs = read_json(input.as_deref())?;
            let seq = DualSequence::new(b.coeffs, *m);
            Ok(Output::ok(to_json(&json!({
                "m": m,
                "norm": dual_norm(&seq, *m)?,
                "chain": gelfand_chain(&seq.as_taylor(), *m)?,
            }))?))
        }
        Command::VageCheck { p, q, trials } => {
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            let mut worst = 0.0f64;
            let mut worst_literal = 0.0f64;
            let mut failures = 0usize;
            let len = cli.degree.clamp(1, 64);
            for _ in 0..*trials {
                let mut draw = |level| {
                    let n = rng.gen_range(1..=len);
                    DualSequence::new(
                        (0..n)
                            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                            .collect(),
                        level,
                    )
                };
                let a = draw(*p);
                let b = draw(*q);
                let r = vage_check(&a, &b, *p, *q)?;
                failures += usize::from(!r.holds);
                worst = worst.max(r.ratio);
                worst_literal = worst_literal.max(literal_vage_check(&a, &b, *p, *q)?.ratio);
            }
            Ok(Output {
                text: to_json(&json!({
                    "p": p,
                    "q": q,
                    "trials": trials,
                    "seed": cli.seed,
                    "constant": vage_constant(q - p)?,
                    "worst_ratio": worst,
                    "failures": failures,
                    "worst_ratio_swapped_norms": worst_literal,
                    "passed": failures == 0,
                }))?,
                passed: failures == 0,
            })
        }
        Command::Integrate { f, g } => {
            if f == Path::new("-") && g == Path::new("-") {
                return Err(CliError::Usage("only one of --f and --g can read stdin".into()));
            }
            let f: Vec<PathSample> = read_json(Some(f))?;
            let g: Vec<PathSample> = read_json(Some(g))?;
            let result = riemann_integral_product(&f, &g)?;
            Ok(Output::ok(to_json(&json!({ "coeffs": result.coeffs, "samples": f.len() }))?))
        }
        Command::Verify {
            suite,
            m,
            max_refinements,
            abs_tol,
        } => {
            let cfg = RunConfig {
                degree: cli.degree,
                rel_tol: cli.tol,
                abs_tol: *abs_tol,
                max_refinements: *max_refinements,
                seed: cli.seed,
                kernel_m: *m,
            };
            let report = run_suite(&cfg, *suite)?;
            report_output(&report, format(Format::Json))
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => io::stdout().write_all(text.as_bytes()).map_err(|source| CliError::Io {
            path: "<stdout>".into(),
            source,
        }),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli).and_then(|o| emit(&o.text, cli.out.as_deref()).map(|_| o.passed)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
