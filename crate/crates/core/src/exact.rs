//! Closed-form per-profile delay, profile probabilities, the best-case
//! delay, the exact optimal average delay, and the deterioration ratio.

use rayon::prelude::*;

use crate::combinatorics::{
    binomial, log_factorial, partition_count, BoundedPartitions, LogNumber, ProfileVector,
};
use crate::error::{Error, Result};
use crate::kahan::KahanSum;

/// Delays are plain `f64` in units of one uncached file transmission.
pub type Delay = f64;

/// Default cap on the number of profiles an exact enumeration may visit.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 50_000_000;

/// Default cap on the number of associations the brute-force oracle visits.
pub const DEFAULT_ASSOCIATION_LIMIT: f64 = 1e8;

/// A problem instance: `users` receivers served through `caches` helper
/// nodes, each holding a `redundancy / caches` fraction of the library.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetworkConfig {
    users: u32,
    caches: u32,
    redundancy: u32,
}

impl NetworkConfig {
    pub fn new(users: u32, caches: u32, redundancy: u32) -> Result<Self> {
        if users < 1 {
            return Err(Error::InvalidConfig("users must be at least 1".into()));
        }
        if caches < 1 {
            return Err(Error::InvalidConfig("caches must be at least 1".into()));
        }
        if redundancy > caches {
            return Err(Error::InvalidConfig(format!(
                "redundancy t={redundancy} exceeds caches={caches}"
            )));
        }
        Ok(NetworkConfig {
            users,
            caches,
            redundancy,
        })
    }

    /// Builds a config from the normalized cache size; `gamma` must be an
    /// integer multiple of `1 / caches`.
    pub fn from_gamma(users: u32, caches: u32, gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::InvalidConfig(format!(
                "gamma={gamma} outside [0, 1]"
            )));
        }
        let scaled = gamma * caches as f64;
        let redundancy = scaled.round();
        if (scaled - redundancy).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "gamma={gamma} is not a multiple of 1/{caches}"
            )));
        }
        Self::new(users, caches, redundancy as u32)
    }

    pub fn users(&self) -> u32 {
        self.users
    }

    pub fn caches(&self) -> u32 {
        self.caches
    }

    /// Cache redundancy t: how many caches jointly store each file piece.
    pub fn redundancy(&self) -> u32 {
        self.redundancy
    }

    pub fn gamma(&self) -> f64 {
        self.redundancy as f64 / self.caches as f64
    }

    /// `t = 0` means the system runs without any coded-caching gain.
    pub fn has_coded_gain(&self) -> bool {
        self.redundancy > 0
    }

    /// Worst possible delivery time `K (1 - gamma)`, attained when every
    /// user shares one cache.
    pub fn worst_case_delay(&self) -> Delay {
        self.users as f64 * (self.caches - self.redundancy) as f64 / self.caches as f64
    }

    /// The unique delay-minimizing profile: loads `floor(K/Λ) + 1` on the
    /// first `K mod Λ` caches and `floor(K/Λ)` on the rest.
    pub fn balanced_profile(&self) -> ProfileVector {
        let base = self.users / self.caches;
        let extra = (self.users % self.caches) as usize;
        let mut loads = vec![base; self.caches as usize];
        for l in loads.iter_mut().take(extra) {
            *l += 1;
        }
        ProfileVector::from_sorted_unchecked(loads)
    }
}

/// Precomputed delivery weights `C(Λ-λ, t) / C(Λ, t)` for λ = 1..Λ-t.
///
/// The per-profile delay is the weight-dot-product with the sorted loads, so
/// grids that sweep many profiles reuse one table.
#[derive(Debug, Clone)]
pub struct DelayWeights {
    weights: Vec<f64>,
}

impl DelayWeights {
    pub fn new(cfg: &NetworkConfig) -> Self {
        let caches = cfg.caches as u64;
        let t = cfg.redundancy as i64;
        let denom = binomial(caches, t);
        let weights = (1..=(cfg.caches - cfg.redundancy) as u64)
            .map(|lam| binomial(caches - lam, t) / denom)
            .collect();
        DelayWeights { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Delay of a sorted load slice (entries past `Λ - t` are ignored, and
    /// trailing zeros contribute nothing).
    pub fn delay(&self, sorted_loads: &[u32]) -> Delay {
        self.weights
            .iter()
            .zip(sorted_loads)
            .map(|(w, &l)| w * l as f64)
            .sum()
    }
}

/// Worst-case delivery time of one profile under the optimal scheme:
/// `sum over the Λ-t most loaded caches of l_λ C(Λ-λ, t) / C(Λ, t)`.
pub fn delay_of_profile(profile: &ProfileVector, cfg: &NetworkConfig) -> Result<Delay> {
    if profile.cache_count() != cfg.caches as usize {
        return Err(Error::DimensionMismatch {
            expected: cfg.caches as usize,
            actual: profile.cache_count(),
        });
    }
    Ok(DelayWeights::new(cfg).delay(profile.loads()))
}

/// Probability of observing a profile under uniform intensities, in log
/// space: `(K! / (Λ^K prod l_i!)) * (Λ! / prod b_j!)`.
pub fn log_profile_probability(profile: &ProfileVector, cfg: &NetworkConfig) -> Result<LogNumber> {
    if profile.cache_count() != cfg.caches as usize {
        return Err(Error::DimensionMismatch {
            expected: cfg.caches as usize,
            actual: profile.cache_count(),
        });
    }
    let mut ln = log_factorial(cfg.users as u64).ln() + log_factorial(cfg.caches as u64).ln()
        - cfg.users as f64 * (cfg.caches as f64).ln();
    for &l in profile.loads() {
        ln -= log_factorial(l as u64).ln();
    }
    for &b in profile.multiplicity_groups().counts() {
        ln -= log_factorial(b as u64).ln();
    }
    Ok(LogNumber::from_ln(ln))
}

/// Probability of observing a profile under uniform intensities.
pub fn profile_probability(profile: &ProfileVector, cfg: &NetworkConfig) -> Result<f64> {
    Ok(log_profile_probability(profile, cfg)?.value())
}

/// Best-case (perfectly balanced) delivery time.
///
/// For `Λ | K` this is `K (1 - gamma) / (1 + Λ gamma)`; otherwise the
/// general closed form with the fractional correction `f(K̂)`.
pub fn t_min(cfg: &NetworkConfig) -> Delay {
    let caches = cfg.caches as f64;
    let t = cfg.redundancy as f64;
    let floor = (cfg.users / cfg.caches) as f64;
    let k_hat = cfg.users % cfg.caches;
    let f = if k_hat == 0 {
        1.0
    } else if k_hat >= cfg.caches - cfg.redundancy {
        0.0
    } else {
        let mut num = 1.0;
        for i in (cfg.redundancy + 1)..=(k_hat + cfg.redundancy) {
            num *= caches - i as f64;
        }
        let mut den = 1.0;
        for j in 0..k_hat {
            den *= caches - j as f64;
        }
        num / den
    };
    (caches - t) / (1.0 + t) * (floor + 1.0 - f)
}

/// Per-profile accumulator state produced by one enumeration pass.
#[derive(Debug, Clone)]
struct ProfileSums {
    probability: KahanSum,
    weighted_delay: KahanSum,
    rank_loads: Vec<KahanSum>,
}

impl ProfileSums {
    fn new(caches: usize) -> Self {
        ProfileSums {
            probability: KahanSum::new(),
            weighted_delay: KahanSum::new(),
            rank_loads: vec![KahanSum::new(); caches],
        }
    }

    fn merge(mut self, other: &ProfileSums) -> Self {
        self.probability.merge(&other.probability);
        self.weighted_delay.merge(&other.weighted_delay);
        for (a, b) in self.rank_loads.iter_mut().zip(&other.rank_loads) {
            a.merge(b);
        }
        self
    }
}

/// Streams every profile once, accumulating `sum P`, `sum P T(L)` and the
/// per-rank `sum P l_λ`.
///
/// The stream is partitioned by the leading (largest) part; sub-streams run
/// in parallel and partial sums are folded in descending leading-part order,
/// so the result is bit-stable for any worker count.
fn profile_sums(users: u32, caches: u32, redundancy: u32, budget: u64) -> Result<ProfileSums> {
    let profiles = partition_count(users, caches);
    if profiles > budget as u128 {
        return Err(Error::EnumerationBudget { profiles, budget });
    }
    let cfg = NetworkConfig::new(users, caches, redundancy)?;
    let weights = DelayWeights::new(&cfg);
    let ln_const = log_factorial(users as u64).ln() + log_factorial(caches as u64).ln()
        - users as f64 * (caches as f64).ln();

    let min_lead = users.div_ceil(caches);
    let partials: Vec<ProfileSums> = (min_lead..=users)
        .into_par_iter()
        .map(|lead| {
            let mut acc = ProfileSums::new(caches as usize);
            let mut stream =
                BoundedPartitions::new((users - lead) as u64, caches as usize - 1, lead);
            while let Some(rest) = stream.advance() {
                accumulate_profile(&mut acc, lead, rest, caches, ln_const, &weights);
            }
            acc
        })
        .collect();

    // descending leading part = global reverse-lexicographic order
    let mut total = ProfileSums::new(caches as usize);
    for partial in partials.iter().rev() {
        total = total.merge(partial);
    }
    Ok(total)
}

/// Folds one profile (leading part + remaining sorted parts) into the sums.
fn accumulate_profile(
    acc: &mut ProfileSums,
    lead: u32,
    rest: &[u32],
    caches: u32,
    ln_const: f64,
    weights: &DelayWeights,
) {
    // single left-to-right pass: log factorials of the loads, run lengths of
    // equal loads, and the weighted delay
    let mut ln = ln_const - log_factorial(lead as u64).ln();
    let mut prev = lead;
    let mut run = 1u64;
    let mut positive = 1usize;
    let mut delay = 0.0f64;
    if let Some(&w) = weights.weights().first() {
        delay += w * lead as f64;
    }
    for (idx, &l) in rest.iter().enumerate() {
        if l == 0 {
            break;
        }
        positive += 1;
        ln -= log_factorial(l as u64).ln();
        if l == prev {
            run += 1;
        } else {
            ln -= log_factorial(run).ln();
            prev = l;
            run = 1;
        }
        if let Some(&w) = weights.weights().get(idx + 1) {
            delay += w * l as f64;
        }
    }
    ln -= log_factorial(run).ln();
    let zeros = caches as u64 - positive as u64;
    if zeros > 0 {
        ln -= log_factorial(zeros).ln();
    }

    let p = ln.exp();
    acc.probability.add(p);
    acc.weighted_delay.add(p * delay);
    acc.rank_loads[0].add(p * lead as f64);
    for (idx, &l) in rest.iter().enumerate() {
        if l == 0 {
            break;
        }
        acc.rank_loads[idx + 1].add(p * l as f64);
    }
}

/// Exact optimal average delay under uniform intensities, as the
/// probability-weighted sum of per-profile delays over every profile.
pub fn exact_average_delay(cfg: &NetworkConfig) -> Result<Delay> {
    exact_average_delay_with_budget(cfg, DEFAULT_ENUMERATION_BUDGET)
}

pub fn exact_average_delay_with_budget(cfg: &NetworkConfig, budget: u64) -> Result<Delay> {
    if cfg.redundancy == cfg.caches {
        return Ok(0.0);
    }
    let sums = profile_sums(cfg.users, cfg.caches, cfg.redundancy, budget)?;
    Ok(sums.weighted_delay.value())
}

/// Expected sorted loads `E[l_λ]` for λ = 1..Λ via exact enumeration.
///
/// Independent of the cache redundancy, so one pass serves a whole grid of
/// `t` values.
pub fn expected_rank_loads_exact(users: u32, caches: u32, budget: u64) -> Result<Vec<f64>> {
    let sums = profile_sums(users, caches, 0, budget)?;
    Ok(sums.rank_loads.iter().map(|k| k.value()).collect())
}

/// Total probability mass over the enumerated profile set (should be 1).
pub fn profile_probability_sum(users: u32, caches: u32, budget: u64) -> Result<f64> {
    Ok(profile_sums(users, caches, 0, budget)?.probability.value())
}

/// Average delay recomposed from expected rank loads:
/// `sum over λ of E[l_λ] C(Λ-λ, t) / C(Λ, t)`.
///
/// Algebraically identical to [`exact_average_delay`]; the two routes cross
/// check each other.
pub fn average_delay_from_rank_loads(rank_loads: &[f64], cfg: &NetworkConfig) -> Result<Delay> {
    if rank_loads.len() != cfg.caches as usize {
        return Err(Error::DimensionMismatch {
            expected: cfg.caches as usize,
            actual: rank_loads.len(),
        });
    }
    let weights = DelayWeights::new(cfg);
    let mut acc = KahanSum::new();
    for (w, &l) in weights.weights().iter().zip(rank_loads) {
        acc.add(w * l);
    }
    Ok(acc.value())
}

/// Independent oracle: averages the delay over all `Λ^K` equiprobable
/// user-to-cache associations.
pub fn brute_force_average_delay(cfg: &NetworkConfig) -> Result<Delay> {
    brute_force_average_delay_with_limit(cfg, DEFAULT_ASSOCIATION_LIMIT)
}

pub fn brute_force_average_delay_with_limit(cfg: &NetworkConfig, limit: f64) -> Result<Delay> {
    let associations = (cfg.caches as f64).powi(cfg.users as i32);
    if associations > limit {
        return Err(Error::InstanceTooLarge {
            associations,
            limit,
        });
    }
    let weights = DelayWeights::new(cfg);
    let k = cfg.users as usize;
    let caches = cfg.caches as usize;

    let mut assignment = vec![0u32; k];
    let mut loads = vec![0u32; caches];
    loads[0] = cfg.users;
    let mut sorted = vec![0u32; caches];
    let mut total = KahanSum::new();
    loop {
        sorted.copy_from_slice(&loads);
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        total.add(weights.delay(&sorted));

        // odometer increment with incremental load bookkeeping
        let mut pos = 0;
        loop {
            if pos == k {
                return Ok(total.value() / associations);
            }
            let digit = assignment[pos] as usize;
            loads[digit] -= 1;
            if digit + 1 < caches {
                assignment[pos] += 1;
                loads[digit + 1] += 1;
                break;
            }
            assignment[pos] = 0;
            loads[0] += 1;
            pos += 1;
        }
    }
}

/// Multiplicative deterioration `G = exact average / t_min`.
///
/// `t = Λ` is the degenerate 0/0 case and is defined as 1: the system is
/// trivially optimal.
pub fn deterioration(cfg: &NetworkConfig) -> Result<f64> {
    deterioration_with_budget(cfg, DEFAULT_ENUMERATION_BUDGET)
}

pub fn deterioration_with_budget(cfg: &NetworkConfig, budget: u64) -> Result<f64> {
    if cfg.redundancy == cfg.caches {
        return Ok(1.0);
    }
    Ok(exact_average_delay_with_budget(cfg, budget)? / t_min(cfg))
}
