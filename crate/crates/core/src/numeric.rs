//! Small numerical helpers shared by the weighted-sum code paths.

use std::sync::OnceLock;

use num_complex::Complex64 as C64;

/// Largest natural log we allow before `exp` would overflow.
pub const LN_MAX: f64 = 709.0;

const LN_FACT_CACHE: usize = 4096;

fn ln_fact_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = Vec::with_capacity(LN_FACT_CACHE);
        let mut acc = Neumaier::default();
        table.push(0.0);
        for k in 1..LN_FACT_CACHE {
            acc.add((k as f64).ln());
            table.push(acc.sum());
        }
        table
    })
}

/// `n!` in double precision for `n <= 170`, `None` beyond.
pub fn factorial_f64(n: usize) -> Option<f64> {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = vec![1.0f64];
        for k in 1..=170 {
            let prev = t[k - 1];
            t.push(prev * k as f64);
        }
        t
    });
    table.get(n).copied()
}

/// `ln(n!)`, cached for small `n` and from the Stirling series beyond.
pub fn ln_factorial(n: usize) -> f64 {
    if n < LN_FACT_CACHE {
        return ln_fact_table()[n];
    }
    let x = n as f64 + 1.0;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    (x - 0.5) * x.ln() - x
        + 0.5 * (2.0 * std::f64::consts::PI).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)))
}

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn sum(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexNeumaier {
    re: Neumaier,
    im: Neumaier,
}

impl ComplexNeumaier {
    pub fn add(&mut self, z: C64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn sum(&self) -> C64 {
        C64::new(self.re.sum(), self.im.sum())
    }
}

/// Running `ln(Σ exp(x_i))` without overflow.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp {
    max: f64,
    scaled: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        LogSumExp {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }
}

impl LogSumExp {
    pub fn add(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x <= self.max {
            self.scaled += (x - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    pub fn ln_sum(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.ln()
        }
    }
}

/// Relative difference `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

pub fn rel_diff_c(a: C64, b: C64) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_factorial_small_values() {
        assert_eq!(ln_factorial(0), 0.0);
        assert_eq!(ln_factorial(1), 0.0);
        assert!((ln_factorial(5) - 120f64.ln()).abs() < 1e-15);
        let f20: f64 = (1..=20).map(|k| k as f64).product();
        assert!((ln_factorial(20) - f20.ln()).abs() < 1e-13);
    }

    #[test]
    fn ln_factorial_table_meets_stirling_series() {
        let n = LN_FACT_CACHE - 1;
        let x = n as f64 + 1.0;
        let inv = 1.0 / x;
        let series = (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + inv / 12.0
            - inv.powi(3) / 360.0;
        assert!(rel_diff(ln_factorial(n), series) < 1e-14);
        assert!(ln_factorial(LN_FACT_CACHE) > ln_factorial(n));
    }

    #[test]
    fn neumaier_recovers_small_terms() {
        let mut acc = Neumaier::default();
        acc.add(1.0);
        acc.add(1e100);
        acc.add(1.0);
        acc.add(-1e100);
        assert_eq!(acc.sum(), 2.0);
    }

    #[test]
    fn log_sum_exp_matches_direct() {
        let mut lse = LogSumExp::default();
        for x in [1.0f64, 2.0, -3.0] {
            lse.add(x);
        }
        let direct = (1f64.exp() + 2f64.exp() + (-3f64).exp()).ln();
        assert!((lse.ln_sum() - direct).abs() < 1e-15);
        assert_eq!(LogSumExp::default().ln_sum(), f64::NEG_INFINITY);
    }
}
