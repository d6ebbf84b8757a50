//! Exact and log-space combinatorial primitives.
//!
//! Everything downstream (profile probabilities, analytical bounds) is a
//! product of factorials and binomial terms that overflow `f64` long before
//! the parameter ranges of interest, so the primitives here work on natural
//! logarithms and only exponentiate at the last step.

mod partitions;

pub(crate) use partitions::BoundedPartitions;
pub use partitions::{
    enumerate_profiles, multiplicity_groups, partition_count, MultiplicityGroups, ProfileVector,
    Profiles,
};

use crate::error::{Error, Result};

/// A non-negative real carried as its natural logarithm.
///
/// Zero is representable (`ln = -inf`), so products of vanishing
/// probabilities stay well-defined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogNumber {
    ln: f64,
}

impl LogNumber {
    pub const ZERO: LogNumber = LogNumber {
        ln: f64::NEG_INFINITY,
    };
    pub const ONE: LogNumber = LogNumber { ln: 0.0 };

    /// Wraps a raw natural-log magnitude.
    pub fn from_ln(ln: f64) -> Self {
        LogNumber { ln }
    }

    /// Takes the log of a plain non-negative value.
    pub fn from_value(value: f64) -> Self {
        assert!(value >= 0.0, "LogNumber represents non-negative reals");
        LogNumber { ln: value.ln() }
    }

    pub fn ln(self) -> f64 {
        self.ln
    }

    /// Converts back to a plain real (may underflow to 0 or overflow to inf).
    pub fn value(self) -> f64 {
        self.ln.exp()
    }

    pub fn is_zero(self) -> bool {
        self.ln == f64::NEG_INFINITY
    }
}

impl std::ops::Mul for LogNumber {
    type Output = LogNumber;
    // log-domain: products are sums of logs
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: LogNumber) -> LogNumber {
        LogNumber {
            ln: self.ln + rhs.ln,
        }
    }
}

impl std::ops::MulAssign for LogNumber {
    #[allow(clippy::suspicious_op_assign_impl)]
    fn mul_assign(&mut self, rhs: LogNumber) {
        self.ln += rhs.ln;
    }
}

impl std::ops::Div for LogNumber {
    type Output = LogNumber;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: LogNumber) -> LogNumber {
        LogNumber {
            ln: self.ln - rhs.ln,
        }
    }
}

/// Largest `n` whose `ln(n!)` comes from the cached exact product table.
const FACTORIAL_TABLE_SIZE: usize = 171;

fn factorial_table() -> &'static [f64; FACTORIAL_TABLE_SIZE] {
    use std::sync::OnceLock;
    static TABLE: OnceLock<[f64; FACTORIAL_TABLE_SIZE]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = [0.0f64; FACTORIAL_TABLE_SIZE];
        let mut product = 1.0f64;
        for (n, slot) in table.iter_mut().enumerate().skip(1) {
            product *= n as f64;
            *slot = product.ln();
        }
        table
    })
}

/// `ln(n!)`, exact products up to 170! and a Stirling expansion beyond.
pub fn log_factorial(n: u64) -> LogNumber {
    if (n as usize) < FACTORIAL_TABLE_SIZE {
        LogNumber::from_ln(factorial_table()[n as usize])
    } else {
        LogNumber::from_ln(ln_gamma_stirling(n as f64 + 1.0))
    }
}

/// Stirling series for `ln Γ(x)`, accurate to well below 1e-14 relative for
/// x ≥ 20 (only used here for x > 171).
fn ln_gamma_stirling(x: f64) -> f64 {
    const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_7;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv / 12.0 - inv * inv2 / 360.0 + inv * inv2 * inv2 / 1260.0
        - inv * inv2 * inv2 * inv2 / 1680.0;
    (x - 0.5) * x.ln() - x + HALF_LN_TWO_PI + series
}

/// Binomial coefficient `C(n, k)` as a real.
///
/// Out-of-range `k` gives 0. Exact integer arithmetic is used for n ≤ 64;
/// beyond that the value is exponentiated from log space.
pub fn binomial(n: u64, k: i64) -> f64 {
    if k < 0 || k as u64 > n {
        return 0.0;
    }
    let k = k as u64;
    if n <= 64 {
        binomial_exact_u128(n, k) as f64
    } else {
        log_binomial(n, k).value()
    }
}

/// `C(n, k)` as an exact integer; caller guarantees `k <= n <= 64` so the
/// intermediate product stays inside u128.
fn binomial_exact_u128(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 1..=k {
        c = c * (n - k + i) as u128 / i as u128;
    }
    c
}

/// `ln C(n, k)` for in-range `k`; out-of-range gives `LogNumber::ZERO`.
pub fn log_binomial(n: u64, k: u64) -> LogNumber {
    if k > n {
        return LogNumber::ZERO;
    }
    log_factorial(n) / (log_factorial(k) * log_factorial(n - k))
}

/// Default saturation threshold for [`BinomialCdf`]: once the partial sum is
/// within this distance of 1, remaining terms are dropped.
pub const DEFAULT_CDF_EPSILON: f64 = 1e-15;

/// Cumulative distribution of `Binomial(trials, p)` with early termination.
///
/// Values are materialized for `j = 0..` until the partial sum saturates at
/// `1 - eps`; every later `j < trials` reports the saturated value, and
/// `j >= trials` reports exactly 1.
#[derive(Debug, Clone)]
pub struct BinomialCdf {
    trials: u32,
    values: Vec<f64>,
}

impl BinomialCdf {
    pub fn new(trials: u32, p: f64, eps: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) || p.is_nan() {
            return Err(Error::InvalidProbability(p));
        }
        let values = if trials == 0 || p == 0.0 {
            vec![1.0]
        } else if p == 1.0 {
            vec![0.0]
        } else {
            let k = trials as f64;
            // terms follow T_{i+1} = T_i * (trials-i)/(i+1) * p/(1-p); keep the
            // recurrence in log space so deep lower-tail terms underflow to 0
            // individually instead of poisoning the running product
            let log_ratio = p.ln() - (-p).ln_1p();
            let mut log_term = k * (-p).ln_1p();
            let mut sum = log_term.exp();
            let mut comp = 0.0f64; // Kahan compensation
            let mut values = Vec::with_capacity(64);
            values.push(sum.min(1.0));
            for i in 0..trials.saturating_sub(1) {
                log_term += ((k - i as f64) / (i as f64 + 1.0)).ln() + log_ratio;
                let term = log_term.exp();
                let y = term - comp;
                let t = sum + y;
                comp = (t - sum) - y;
                sum = t;
                values.push(sum.min(1.0));
                if 1.0 - sum < eps {
                    break;
                }
            }
            values
        };
        Ok(BinomialCdf { trials, values })
    }

    pub fn trials(&self) -> u32 {
        self.trials
    }

    /// P[X ≤ j]; -1 maps to 0 and j ≥ trials to exactly 1.
    pub fn get(&self, j: i64) -> f64 {
        if j < 0 {
            0.0
        } else if j as u64 >= self.trials as u64 {
            1.0
        } else {
            let idx = (j as usize).min(self.values.len() - 1);
            self.values[idx]
        }
    }

    /// First index whose value already equals the saturated tail value.
    pub fn saturated_from(&self) -> usize {
        self.values.len() - 1
    }

    /// Saturated tail value (the last materialized partial sum).
    pub fn saturated_value(&self) -> f64 {
        *self.values.last().unwrap()
    }
}

/// One-shot binomial CDF query, `P[Binomial(trials, p) <= j]`.
pub fn binomial_cdf(trials: u32, p: f64, j: i64, eps: f64) -> Result<f64> {
    Ok(BinomialCdf::new(trials, p, eps)?.get(j))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_factorial_identity_cases() {
        assert_eq!(log_factorial(0).ln(), 0.0);
        assert_eq!(log_factorial(1).ln(), 0.0);
    }

    #[test]
    fn log_factorial_exact_products() {
        // 5! = 120 and 20! = 2432902008176640000, both exact integer products
        assert!((log_factorial(5).ln() - 120f64.ln()).abs() < 1e-12);
        let ln20 = 2_432_902_008_176_640_000f64.ln();
        assert!((log_factorial(20).ln() - ln20).abs() / ln20 < 1e-12);
    }

    #[test]
    fn log_factorial_beyond_table_matches_direct_sum() {
        for n in [171u64, 200, 500, 1000, 100_000] {
            // independent route: straight Kahan sum of ln(i)
            let mut sum = 0.0f64;
            let mut c = 0.0f64;
            for i in 2..=n {
                let y = (i as f64).ln() - c;
                let t = sum + y;
                c = (t - sum) - y;
                sum = t;
            }
            let got = log_factorial(n).ln();
            assert!(
                ((got - sum) / sum).abs() < 1e-12,
                "n={n}: got {got}, direct {sum}"
            );
        }
    }

    #[test]
    fn binomial_small_values() {
        assert_eq!(binomial(4, 1), 4.0);
        assert_eq!(binomial(0, 0), 1.0);
        assert_eq!(binomial(40, 8), 76_904_685.0);
        assert_eq!(binomial(5, -1), 0.0);
        assert_eq!(binomial(5, 6), 0.0);
    }

    #[test]
    fn binomial_large_matches_log_route() {
        let direct = binomial(200, 100);
        let via_log = log_binomial(200, 100).value();
        assert!(((direct - via_log) / via_log).abs() < 1e-10);
    }

    #[test]
    fn log_number_arithmetic() {
        let a = LogNumber::from_value(3.0);
        let b = LogNumber::from_value(4.0);
        assert!(((a * b).value() - 12.0).abs() < 1e-12);
        assert!(((a / b).value() - 0.75).abs() < 1e-12);
        assert!(LogNumber::ZERO.is_zero());
        assert_eq!((LogNumber::ZERO * a).value(), 0.0);
        assert_eq!(LogNumber::ONE.value(), 1.0);
    }

    #[test]
    fn cdf_hand_sum() {
        // K=2, p=1/2: P[X<=1] = 1/4 + 1/2 = 3/4
        let v = binomial_cdf(2, 0.5, 1, DEFAULT_CDF_EPSILON).unwrap();
        assert!((v - 0.75).abs() < 1e-14);
    }

    #[test]
    fn cdf_degenerate_endpoints() {
        assert_eq!(binomial_cdf(5, 0.0, 0, DEFAULT_CDF_EPSILON).unwrap(), 1.0);
        assert_eq!(binomial_cdf(10, 1.0, 9, DEFAULT_CDF_EPSILON).unwrap(), 0.0);
        assert_eq!(binomial_cdf(10, 1.0, 10, DEFAULT_CDF_EPSILON).unwrap(), 1.0);
        assert_eq!(binomial_cdf(7, 0.3, -1, DEFAULT_CDF_EPSILON).unwrap(), 0.0);
    }

    #[test]
    fn cdf_rejects_bad_probability() {
        assert!(binomial_cdf(3, -0.1, 0, DEFAULT_CDF_EPSILON).is_err());
        assert!(binomial_cdf(3, 1.1, 0, DEFAULT_CDF_EPSILON).is_err());
    }

    #[test]
    fn cdf_saturates_early_for_large_k() {
        let cdf = BinomialCdf::new(1_000_000, 1e-3, DEFAULT_CDF_EPSILON).unwrap();
        // mean 1000, sigma ~31.6; saturation must kick in long before K
        assert!(cdf.saturated_from() < 2000);
        assert!(cdf.get(5000) >= cdf.get(2000));
        assert_eq!(cdf.get(1_000_000), 1.0);
    }
}
