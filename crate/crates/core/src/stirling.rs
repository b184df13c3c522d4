//! Stirling numbers of the second kind and boson normal ordering.
//!
//! `S(k, n)` counts partitions of a `k`-set into `n` blocks and satisfies
//! `S(k, n) = n S(k-1, n) + S(k-1, n-1)` with `S(k, 0) = δ_{k0}`.
//! They are the coefficients of the normal-ordered expansion
//! `(ab)^k = Σ_{n=1}^{k} S(k, n) a^n b^n` of the number operator.

use std::sync::{OnceLock, RwLock};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use crate::coeffspace::TaylorCoeffs;
use crate::operators::{apply_a, apply_b, apply_word, OperatorWord};

/// Triangular cache of `S(k, n)` for `0 <= n <= k <= max_k`.
///
/// Rows are immutable once written; growth takes the write lock, lookups
/// only the read lock.
#[derive(Debug, Default)]
pub struct StirlingTable {
    rows: RwLock<Vec<Vec<BigUint>>>,
}

impl StirlingTable {
    pub fn new() -> Self {
        Self::with_max_k(0)
    }

    /// Builds the table eagerly through row `max_k`.
    pub fn with_max_k(max_k: usize) -> Self {
        let table = StirlingTable {
            rows: RwLock::new(vec![vec![BigUint::one()]]),
        };
        table.grow_to(max_k);
        table
    }

    pub fn max_k(&self) -> usize {
        self.rows.read().expect("stirling table poisoned").len() - 1
    }

    fn grow_to(&self, k: usize) {
        if self.max_k() >= k {
            return;
        }
        let mut rows = self.rows.write().expect("stirling table poisoned");
        while rows.len() <= k {
            let prev = rows.last().expect("row 0 always present");
            let kk = rows.len();
            let mut row = Vec::with_capacity(kk + 1);
            row.push(BigUint::zero());
            for n in 1..=kk {
                let stay = if n < prev.len() {
                    &prev[n] * BigUint::from(n)
                } else {
                    BigUint::zero()
                };
                row.push(stay + &prev[n - 1]);
            }
            rows.push(row);
        }
    }

    pub fn get(&self, k: usize, n: usize) -> BigUint {
        if n > k {
            return BigUint::zero();
        }
        self.grow_to(k);
        self.rows.read().expect("stirling table poisoned")[k][n].clone()
    }

    /// Row `k` as `[S(k,0), ..., S(k,k)]`.
    pub fn row(&self, k: usize) -> Vec<BigUint> {
        self.grow_to(k);
        self.rows.read().expect("stirling table poisoned")[k].clone()
    }
}

fn global() -> &'static StirlingTable {
    static TABLE: OnceLock<StirlingTable> = OnceLock::new();
    TABLE.get_or_init(|| StirlingTable::with_max_k(32))
}

/// Exact `S(k, n)` from the shared process-wide table.
pub fn stirling_s2(k: usize, n: usize) -> BigUint {
    global().get(k, n)
}

/// `[(n, S(k, n)) for n in 1..=k]`: the normal-ordered expansion of `(ab)^k`.
pub fn normal_order_coeffs(k: usize) -> Vec<(usize, BigUint)> {
    let row = global().row(k);
    (1..=k).map(|n| (n, row[n].clone())).collect()
}

/// Applies `(ab)^k` and `Σ S(k,n) a^n b^n` to every monomial `z^j`,
/// `j <= degree`, in exact integer arithmetic and compares the results.
pub fn verify_normal_ordering(k: usize, degree: usize) -> bool {
    if k == 0 {
        return false;
    }
    let word = OperatorWord::number_power(k);
    let expansion = normal_order_coeffs(k);
    (0..=degree).all(|j| {
        let f = TaylorCoeffs::<BigInt>::monomial(j);
        let lhs = apply_word(&word, &f);
        let rhs = normal_ordered_apply(&expansion, &f);
        let direct = f.scale(&BigInt::from(j).pow(k as u32));
        lhs == rhs && lhs == direct
    })
}

/// `Σ c_n a^n b^n f` for an expansion `[(n, c_n)]`.
pub(crate) fn normal_ordered_apply(expansion: &[(usize, BigUint)], f: &TaylorCoeffs<BigInt>) -> TaylorCoeffs<BigInt> {
    let mut acc = TaylorCoeffs::<BigInt>::zero();
    for (n, c) in expansion {
        let mut g = f.clone();
        for _ in 0..*n {
            g = apply_b(&g);
        }
        for _ in 0..*n {
            g = apply_a(&g);
        }
        acc = acc.add(&g.scale(&BigInt::from(c.clone())));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Counts set partitions of {0..k} into exactly n blocks by restricted
    /// growth strings.
    fn brute_force_partitions(k: usize, n: usize) -> u64 {
        fn go(pos: usize, k: usize, n: usize, used: usize) -> u64 {
            if pos == k {
                return u64::from(used == n);
            }
            let mut total = 0;
            for block in 0..=used.min(n.saturating_sub(1)) {
                let next = if block == used { used + 1 } else { used };
                if next <= n {
                    total += go(pos + 1, k, n, next);
                }
            }
            total
        }
        if k == 0 {
            return u64::from(n == 0);
        }
        go(0, k, n, 0)
    }

    fn bell_triangle(count: usize) -> Vec<BigUint> {
        let mut bells = vec![BigUint::one()];
        let mut row = vec![BigUint::one()];
        while bells.len() < count {
            let mut next = vec![row.last().unwrap().clone()];
            for x in &row {
                let v = next.last().unwrap() + x;
                next.push(v);
            }
            bells.push(next[0].clone());
            row = next;
        }
        bells
    }

    #[test]
    fn named_values() {
        assert_eq!(stirling_s2(0, 0), BigUint::one());
        assert_eq!(stirling_s2(3, 5), BigUint::zero());
        assert_eq!(stirling_s2(4, 2), BigUint::from(7u32));
        assert_eq!(brute_force_partitions(4, 2), 7);
    }

    #[test]
    fn matches_partition_enumeration() {
        for k in 0..=9 {
            for n in 0..=k + 1 {
                assert_eq!(stirling_s2(k, n), BigUint::from(brute_force_partitions(k, n)), "S({k},{n})");
            }
        }
    }

    #[test]
    fn boundary_invariants() {
        let table = StirlingTable::with_max_k(40);
        for k in 0..=40 {
            assert_eq!(table.get(k, 0), if k == 0 { BigUint::one() } else { BigUint::zero() });
            assert_eq!(table.get(k, k), BigUint::one());
            assert_eq!(table.get(k, k + 3), BigUint::zero());
        }
    }

    #[test]
    fn row_sums_are_bell_numbers() {
        let bells = bell_triangle(31);
        for (k, bell) in bells.iter().enumerate() {
            let sum: BigUint = stirling_s2_row_sum(k);
            assert_eq!(&sum, bell, "k={k}");
        }
    }

    fn stirling_s2_row_sum(k: usize) -> BigUint {
        global().row(k).iter().sum()
    }

    #[test]
    fn exceeds_u64_without_loss() {
        // S(30, 15) > 2^64; checked through the recurrence at the next row.
        let big = stirling_s2(30, 15);
        assert!(big > BigUint::from(u64::MAX));
        assert_eq!(
            stirling_s2(31, 15),
            BigUint::from(15u32) * &big + stirling_s2(30, 14)
        );
    }

    #[test]
    fn growth_preserves_existing_rows() {
        let table = StirlingTable::new();
        assert_eq!(table.max_k(), 0);
        let before = table.row(6);
        table.get(12, 3);
        assert_eq!(table.max_k(), 12);
        assert_eq!(table.row(6), before);
        for k in 1..=12 {
            for n in 1..=k {
                assert_eq!(
                    table.get(k, n),
                    BigUint::from(n) * table.get(k - 1, n) + table.get(k - 1, n - 1)
                );
            }
        }
    }

    #[test]
    fn normal_order_small_k() {
        let as_u = |v: Vec<(usize, BigUint)>| -> Vec<(usize, u64)> {
            v.into_iter().map(|(n, s)| (n, u64::try_from(s).unwrap())).collect()
        };
        assert_eq!(as_u(normal_order_coeffs(1)), vec![(1, 1)]);
        assert_eq!(as_u(normal_order_coeffs(2)), vec![(1, 1), (2, 1)]);
        assert_eq!(as_u(normal_order_coeffs(3)), vec![(1, 1), (2, 3), (3, 1)]);
    }

    #[test]
    fn normal_ordering_verification() {
        assert!(verify_normal_ordering(2, 5));
        assert!(verify_normal_ordering(1, 1));
        assert!(verify_normal_ordering(8, 12));
        assert!(!verify_normal_ordering(0, 3));
    }

    #[test]
    fn falling_factorial_identity() {
        // j^k = Σ S(k,n) j(j-1)...(j-n+1)
        for k in 1..=10usize {
            for j in 0..=20u64 {
                let mut rhs = BigUint::zero();
                for n in 1..=k {
                    let falling: BigUint = (0..n as u64)
                        .map(|i| BigUint::from(j.saturating_sub(i)))
                        .product();
                    rhs += stirling_s2(k, n) * falling;
                }
                assert_eq!(rhs, BigUint::from(j).pow(k as u32), "k={k} j={j}");
            }
        }
    }

    #[test]
    fn concurrent_readers() {
        let table = StirlingTable::new();
        std::thread::scope(|s| {
            for t in 0..4 {
                let table = &table;
                s.spawn(move || {
                    for k in 0..30 {
                        let _ = table.get(k + t, k / 2);
                    }
                });
            }
        });
        assert_eq!(table.get(5, 2), BigUint::from(15u32));
    }
}
