//! Fast analytical bounds on the optimal average delay, threshold-based
//! numerical bounds, the proximity load-balancing bound, and non-uniform
//! (Zipf) intensity bounds.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::combinatorics::{enumerate_profiles, partition_count, BinomialCdf, DEFAULT_CDF_EPSILON};
use crate::error::{Error, Result};
use crate::exact::{t_min, Delay, DelayWeights, NetworkConfig};
use crate::kahan::KahanSum;

/// Per-cache association probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityVector {
    probs: Vec<f64>,
}

impl IntensityVector {
    /// Validates entries in [0, 1] summing to 1 within 1e-12.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidIntensities("empty intensity vector".into()));
        }
        if probs
            .iter()
            .any(|&p| !(0.0..=1.0).contains(&p) || p.is_nan())
        {
            return Err(Error::InvalidIntensities(
                "entries must lie in [0, 1]".into(),
            ));
        }
        let total = crate::kahan::kahan_sum(probs.iter().copied());
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidIntensities(format!(
                "entries sum to {total}, expected 1"
            )));
        }
        Ok(IntensityVector { probs })
    }

    pub fn uniform(caches: u32) -> Self {
        IntensityVector {
            probs: vec![1.0 / caches as f64; caches as usize],
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn caches(&self) -> u32 {
        self.probs.len() as u32
    }

    pub fn max(&self) -> f64 {
        self.probs.iter().copied().fold(0.0, f64::max)
    }
}

/// Zipf cache-population intensities `p_λ = λ^{-α} / H_α(Λ)`, with the
/// generalized harmonic normalizer summed directly.
pub fn zipf_intensities(caches: u32, alpha: f64) -> Result<IntensityVector> {
    if caches < 1 {
        return Err(Error::InvalidIntensities("need at least one cache".into()));
    }
    if alpha.is_nan() || alpha < 0.0 {
        return Err(Error::InvalidIntensities(format!(
            "zipf exponent {alpha} must be non-negative"
        )));
    }
    let mut harmonic = KahanSum::new();
    let raw: Vec<f64> = (1..=caches as u64)
        .map(|lam| {
            let w = (lam as f64).powf(-alpha);
            harmonic.add(w);
            w
        })
        .collect();
    let h = harmonic.value();
    Ok(IntensityVector {
        probs: raw.into_iter().map(|w| w / h).collect(),
    })
}

/// How a [`BoundPair`] was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundMethod {
    Analytical,
    OrderStatistic,
    Threshold,
    NonUniform,
}

/// A lower/upper bracket on a delay-like quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundPair {
    pub lower: f64,
    pub upper: f64,
    pub method: BoundMethod,
}

/// `sum over j < users of max(1 - ratio (1 - P_j), 0)`, exploiting the CDF
/// saturation point: past it every term is constant.
fn clipped_cdf_sum(cdf: &BinomialCdf, users: u32, ratio: f64) -> f64 {
    let sat = cdf.saturated_from().min(users.saturating_sub(1) as usize);
    let mut acc = KahanSum::new();
    for j in 0..=sat as i64 {
        let term = 1.0 - ratio * (1.0 - cdf.get(j));
        if term > 0.0 {
            acc.add(term);
        }
    }
    let remaining = users as i64 - 1 - sat as i64;
    if remaining > 0 {
        let term = 1.0 - ratio * (1.0 - cdf.get(sat as i64));
        if term > 0.0 {
            acc.add(remaining as f64 * term);
        }
    }
    acc.value()
}

/// `sum of P_j for j in [from, users)` with the same saturation shortcut.
fn cdf_tail_sum(cdf: &BinomialCdf, users: u32, from: u32) -> f64 {
    if from >= users {
        return 0.0;
    }
    let sat = cdf.saturated_from().min(users.saturating_sub(1) as usize);
    let mut acc = KahanSum::new();
    for j in from as usize..=sat {
        acc.add(cdf.get(j as i64));
    }
    let tail_start = (sat + 1).max(from as usize);
    if tail_start < users as usize {
        let count = users as usize - tail_start;
        acc.add(count as f64 * cdf.get(sat as i64));
    }
    acc.value()
}

fn uniform_cdf(cfg: &NetworkConfig) -> BinomialCdf {
    BinomialCdf::new(cfg.users(), 1.0 / cfg.caches() as f64, DEFAULT_CDF_EPSILON)
        .expect("1/caches is a valid probability")
}

/// Analytical upper bound on the optimal average delay (uniform
/// intensities): `K(Λ-t)/(t+1) - sum_λ w_λ sum_j max(1 - (Λ/λ)(1-P_j), 0)`.
pub fn analytical_upper_bound(cfg: &NetworkConfig) -> Delay {
    let caches = cfg.caches();
    let t = cfg.redundancy();
    if t == caches {
        return 0.0;
    }
    let cdf = uniform_cdf(cfg);
    let weights = DelayWeights::new(cfg);
    let mut correction = KahanSum::new();
    for (idx, &w) in weights.weights().iter().enumerate() {
        let lam = (idx + 1) as f64;
        correction.add(w * clipped_cdf_sum(&cdf, cfg.users(), caches as f64 / lam));
    }
    cfg.users() as f64 * (caches - t) as f64 / (t + 1) as f64 - correction.value()
}

/// Analytical lower bound on the optimal average delay (uniform
/// intensities). Needs at least two caches.
pub fn analytical_lower_bound(cfg: &NetworkConfig) -> Result<Delay> {
    let caches = cfg.caches();
    if caches < 2 {
        return Err(Error::CacheCountTooSmall(caches));
    }
    let t = cfg.redundancy();
    if t == caches {
        return Ok(0.0);
    }
    let k = cfg.users() as f64;
    let cdf = uniform_cdf(cfg);
    let from = cfg.users().div_ceil(caches);
    let tail = cdf_tail_sum(&cdf, cfg.users(), from);
    let cm1 = (caches - 1) as f64;
    Ok((caches - t) as f64 / (1.0 + t as f64)
        * (k / caches as f64 * (caches - t - 1) as f64 / cm1 + t as f64 / cm1 * (k - tail)))
}

/// Order-statistic bracket on `E[l_rank]`, the expected load of the
/// rank-th most populous cache. Only rank 1 has a non-trivial lower bound.
pub fn expected_top_load_bounds(cfg: &NetworkConfig, rank: u32) -> Result<BoundPair> {
    let caches = cfg.caches();
    if rank < 1 || rank > caches {
        return Err(Error::InvalidConfig(format!(
            "rank {rank} outside [1, {caches}]"
        )));
    }
    let cdf = uniform_cdf(cfg);
    let k = cfg.users() as f64;
    let upper = k - clipped_cdf_sum(&cdf, cfg.users(), caches as f64 / rank as f64);
    let lower = if rank == 1 {
        let from = cfg.users().div_ceil(caches);
        k - cdf_tail_sum(&cdf, cfg.users(), from)
    } else {
        0.0
    };
    Ok(BoundPair {
        lower,
        upper,
        method: BoundMethod::OrderStatistic,
    })
}

/// Threshold-based numerical bounds built from the highest-probability
/// profiles covering mass `coverage`.
#[derive(Debug, Clone)]
pub struct ThresholdBounds {
    pub lower: Delay,
    pub upper: Delay,
    /// Probability mass actually covered by the retained profile set.
    pub coverage: f64,
    pub requested: f64,
    /// Set when the enumeration budget ran out before `requested` coverage.
    pub truncated: bool,
}

struct Candidate {
    prob: f64,
    delay: f64,
    index: u64,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.prob == other.prob && self.index == other.index
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on probability via Reverse; index breaks ties so the
        // retained set is identical run to run
        self.prob
            .total_cmp(&other.prob)
            .then(self.index.cmp(&other.index))
    }
}

pub fn threshold_bounds(cfg: &NetworkConfig, coverage: f64) -> Result<ThresholdBounds> {
    threshold_bounds_with_budget(cfg, coverage, crate::exact::DEFAULT_ENUMERATION_BUDGET)
}

/// Streams all profiles keeping a bounded top-set ordered by probability,
/// then accumulates greedily until the requested mass is covered. The mass
/// not covered is padded with the best-case delay (lower bound) or the
/// worst-case delay (upper bound).
pub fn threshold_bounds_with_budget(
    cfg: &NetworkConfig,
    coverage: f64,
    budget: u64,
) -> Result<ThresholdBounds> {
    if !(coverage > 0.0 && coverage <= 1.0) {
        return Err(Error::InvalidProbability(coverage));
    }
    let weights = DelayWeights::new(cfg);
    let total_profiles = partition_count(cfg.users(), cfg.caches());
    let truncated = total_profiles > budget as u128;

    // keep enough mass that greedy accumulation can always reach `coverage`;
    // the slack absorbs float drift in the running total
    let keep_target = coverage + 1e-9;
    let mut heap: BinaryHeap<std::cmp::Reverse<Candidate>> = BinaryHeap::new();
    let mut kept_mass = 0.0f64;
    for (index, profile) in enumerate_profiles(cfg.users(), cfg.caches())
        .take(budget as usize)
        .enumerate()
    {
        let prob = crate::exact::profile_probability(&profile, cfg)?;
        let delay = weights.delay(profile.loads());
        heap.push(std::cmp::Reverse(Candidate {
            prob,
            delay,
            index: index as u64,
        }));
        kept_mass += prob;
        while let Some(std::cmp::Reverse(min)) = heap.peek() {
            if kept_mass - min.prob >= keep_target {
                kept_mass -= min.prob;
                heap.pop();
            } else {
                break;
            }
        }
    }

    let mut kept: Vec<Candidate> = heap.into_iter().map(|r| r.0).collect();
    kept.sort_unstable_by(|a, b| b.prob.total_cmp(&a.prob).then(a.index.cmp(&b.index)));

    let mut mass = KahanSum::new();
    let mut weighted = KahanSum::new();
    for c in &kept {
        mass.add(c.prob);
        weighted.add(c.prob * c.delay);
        if mass.value() >= coverage {
            break;
        }
    }
    let achieved = mass.value().min(1.0);
    let remainder = (1.0 - achieved).max(0.0);
    let best = t_min(cfg);
    let worst = cfg.worst_case_delay();
    Ok(ThresholdBounds {
        lower: weighted.value() + remainder * best,
        upper: weighted.value() + remainder * worst,
        coverage: achieved,
        requested: coverage,
        truncated: truncated && achieved < coverage,
    })
}

/// Upper bound on the average delay for arbitrary intensities:
/// `K(Λ-t)/(1+t) - sum_λ w_λ sum_j max(0, 1 - (Λ - F(j))/λ)` with
/// `F(j) = sum_k P[Binomial(K, p_k) <= j]`.
pub fn nonuniform_upper_bound(cfg: &NetworkConfig, intensities: &IntensityVector) -> Result<Delay> {
    let caches = cfg.caches();
    if intensities.caches() != caches {
        return Err(Error::DimensionMismatch {
            expected: caches as usize,
            actual: intensities.caches() as usize,
        });
    }
    let t = cfg.redundancy();
    if t == caches {
        return Ok(0.0);
    }
    let k = cfg.users();

    // accumulate F(j) over caches in decreasing intensity; each cache
    // contributes explicit values until its CDF saturates, then a constant
    // folded in through a tail accumulator
    let mut order: Vec<usize> = (0..caches as usize).collect();
    order.sort_unstable_by(|&a, &b| {
        intensities.probs()[b]
            .total_cmp(&intensities.probs()[a])
            .then(a.cmp(&b))
    });
    let mut f = vec![0.0f64; k as usize];
    let mut tail_add = vec![0.0f64; k as usize];
    for &cache in &order {
        let cdf = BinomialCdf::new(k, intensities.probs()[cache], DEFAULT_CDF_EPSILON)?;
        let sat = cdf.saturated_from().min(k as usize - 1);
        for (j, slot) in f.iter_mut().enumerate().take(sat) {
            *slot += cdf.get(j as i64);
        }
        tail_add[sat] += cdf.get(sat as i64);
    }
    let mut running = 0.0f64;
    for (j, slot) in f.iter_mut().enumerate() {
        running += tail_add[j];
        *slot += running;
    }

    // suffix sums of F let each λ reduce to one subtraction
    let mut suffix = vec![0.0f64; k as usize + 1];
    let mut acc = KahanSum::new();
    for j in (0..k as usize).rev() {
        acc.add(f[j]);
        suffix[j] = acc.value();
    }

    let weights = DelayWeights::new(cfg);
    let mut correction = KahanSum::new();
    for (idx, &w) in weights.weights().iter().enumerate() {
        let lam = (idx + 1) as f64;
        let threshold = caches as f64 - lam;
        // terms are positive exactly where F(j) > Λ - λ; F is non-decreasing
        let start = f.partition_point(|&v| v <= threshold);
        if start < k as usize {
            let count = (k as usize - start) as f64;
            correction.add(w * (suffix[start] - count * threshold) / lam);
        }
    }
    Ok(k as f64 * (caches - t) as f64 / (1 + t) as f64 - correction.value())
}

/// Lower bound on the average delay for arbitrary intensities, driven by
/// `E[l_1] >= K max(p)`. Needs at least two caches.
pub fn nonuniform_lower_bound(cfg: &NetworkConfig, intensities: &IntensityVector) -> Result<Delay> {
    let caches = cfg.caches();
    if caches < 2 {
        return Err(Error::CacheCountTooSmall(caches));
    }
    if intensities.caches() != caches {
        return Err(Error::DimensionMismatch {
            expected: caches as usize,
            actual: intensities.caches() as usize,
        });
    }
    let t = cfg.redundancy();
    let k = cfg.users() as f64;
    let cm1 = (caches - 1) as f64;
    Ok((caches - t) as f64 / (1 + t) as f64
        * (k * t as f64 * intensities.max() / cm1
            + k / caches as f64 * (caches - t - 1) as f64 / cm1))
}

/// Upper bound on the average delay under proximity-bounded load balancing
/// with groups of `group_size` caches and uniform group intensities.
pub fn proximity_upper_bound(cfg: &NetworkConfig, group_size: u32) -> Result<Delay> {
    let caches = cfg.caches();
    if group_size < 1 || group_size > caches {
        return Err(Error::InvalidPolicy(format!(
            "group size {group_size} outside [1, {caches}]"
        )));
    }
    let t = cfg.redundancy();
    if t == caches {
        return Ok(0.0);
    }
    let k = cfg.users();
    let h = group_size as f64;
    let cdf = BinomialCdf::new(k, h / caches as f64, DEFAULT_CDF_EPSILON)?;
    let clipped = clipped_cdf_sum(&cdf, k, caches as f64 / h);
    Ok((caches - t) as f64 / (1 + t) as f64 * (1.0 + k as f64 / h - clipped / h))
}
