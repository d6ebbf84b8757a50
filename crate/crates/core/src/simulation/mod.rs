//! Seeded Monte Carlo sampling of user-to-cache associations under
//! pluggable load-balancing policies, the sampling-based delay estimator,
//! and empirical sorted-load statistics.

mod rng;

pub use rng::{mix64, substream, SplitMix64};

use rayon::prelude::*;

use crate::bounds::IntensityVector;
use crate::combinatorics::ProfileVector;
use crate::error::{Error, Result};
use crate::exact::{t_min, DelayWeights, NetworkConfig};

/// Per-cache user counts of one association realization (unsorted).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PopulationVector {
    loads: Vec<u32>,
}

impl PopulationVector {
    pub fn new(loads: Vec<u32>) -> Self {
        PopulationVector { loads }
    }

    pub fn loads(&self) -> &[u32] {
        &self.loads
    }

    pub fn user_count(&self) -> u64 {
        self.loads.iter().map(|&l| l as u64).sum()
    }

    /// Sorts into the corresponding profile vector.
    pub fn into_profile(mut self) -> ProfileVector {
        self.loads.sort_unstable_by(|a, b| b.cmp(a));
        ProfileVector::from_sorted_unchecked(self.loads)
    }
}

/// The load-balancing element of an association policy.
///
/// `Uniform` is the plain one-draw association and behaves exactly like
/// `HChoice(1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyKind {
    Uniform,
    /// Draw `h` distinct candidate caches from the intensities (repeats are
    /// redrawn) and join the least loaded; `h = Λ` is the full global
    /// least-loaded choice.
    HChoice(u32),
    /// Caches are pre-partitioned into consecutive blocks of `h`; a user
    /// draws a block with its summed intensity and joins its least-loaded
    /// cache.
    Proximity(u32),
}

impl PolicyKind {
    pub fn name(&self) -> &'static str {
        match self {
            PolicyKind::Uniform => "uniform",
            PolicyKind::HChoice(_) => "hchoice",
            PolicyKind::Proximity(_) => "proximity",
        }
    }
}

/// How users attach to caches: a policy kind plus per-cache intensities.
#[derive(Debug, Clone)]
pub struct AssociationPolicy {
    kind: PolicyKind,
    intensities: IntensityVector,
}

impl AssociationPolicy {
    pub fn new(kind: PolicyKind, intensities: IntensityVector) -> Result<Self> {
        let caches = intensities.caches();
        let h = match kind {
            PolicyKind::Uniform => 1,
            PolicyKind::HChoice(h) | PolicyKind::Proximity(h) => h,
        };
        if h < 1 || h > caches {
            return Err(Error::InvalidPolicy(format!(
                "choice size h={h} outside [1, {caches}]"
            )));
        }
        if let PolicyKind::HChoice(h) = kind {
            let reachable = intensities.probs().iter().filter(|&&p| p > 0.0).count() as u32;
            if h > reachable {
                return Err(Error::InvalidPolicy(format!(
                    "h={h} distinct candidates unreachable: only {reachable} caches have positive intensity"
                )));
            }
        }
        Ok(AssociationPolicy { kind, intensities })
    }

    pub fn uniform(caches: u32) -> Self {
        AssociationPolicy {
            kind: PolicyKind::Uniform,
            intensities: IntensityVector::uniform(caches),
        }
    }

    pub fn h_choice(h: u32, intensities: IntensityVector) -> Result<Self> {
        Self::new(PolicyKind::HChoice(h), intensities)
    }

    pub fn proximity(h: u32, intensities: IntensityVector) -> Result<Self> {
        Self::new(PolicyKind::Proximity(h), intensities)
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    pub fn intensities(&self) -> &IntensityVector {
        &self.intensities
    }

    pub fn caches(&self) -> u32 {
        self.intensities.caches()
    }

    pub fn descriptor(&self) -> String {
        match self.kind {
            PolicyKind::Uniform => "uniform".into(),
            PolicyKind::HChoice(h) => format!("hchoice(h={h})"),
            PolicyKind::Proximity(h) => format!("proximity(h={h})"),
        }
    }
}

/// Block index ranges plus cumulative block mass for proximity groups.
type ProximityBlocks = (Vec<(u32, u32)>, Vec<f64>);

/// Immutable sampling tables derived from a policy: cumulative cache
/// intensities plus, for proximity, block ranges and cumulative block mass.
pub struct PolicySampler {
    choices: u32,
    cache_cum: Vec<f64>,
    blocks: Option<ProximityBlocks>,
}

impl PolicySampler {
    pub fn new(policy: &AssociationPolicy) -> Self {
        let probs = policy.intensities.probs();
        let mut cache_cum = Vec::with_capacity(probs.len());
        let mut running = 0.0f64;
        for &p in probs {
            running += p;
            cache_cum.push(running);
        }
        *cache_cum.last_mut().unwrap() = 1.0;

        let (choices, blocks) = match policy.kind {
            PolicyKind::Uniform => (1, None),
            PolicyKind::HChoice(h) => (h, None),
            PolicyKind::Proximity(h) => {
                let caches = policy.caches();
                let mut ranges = Vec::new();
                let mut cum = Vec::new();
                let mut mass = 0.0f64;
                let mut start = 0u32;
                while start < caches {
                    let end = (start + h).min(caches);
                    mass += probs[start as usize..end as usize].iter().sum::<f64>();
                    ranges.push((start, end));
                    cum.push(mass);
                    start = end;
                }
                *cum.last_mut().unwrap() = 1.0;
                (h, Some((ranges, cum)))
            }
        };
        PolicySampler {
            choices,
            cache_cum,
            blocks,
        }
    }

    /// One association: users placed sequentially in index order, each draw
    /// resolved by inverse-CDF lookup. Ties on load break to the lowest
    /// cache index.
    pub fn sample_into(&self, users: u32, rng: &mut SplitMix64, loads: &mut Vec<u32>) {
        let caches = self.cache_cum.len();
        loads.clear();
        loads.resize(caches, 0);
        match &self.blocks {
            None if self.choices as usize == caches => {
                // choice over every cache: no draws needed
                for _ in 0..users {
                    let mut best = 0usize;
                    for (idx, &l) in loads.iter().enumerate().skip(1) {
                        if l < loads[best] {
                            best = idx;
                        }
                    }
                    loads[best] += 1;
                }
            }
            None => {
                let mut seen = vec![false; caches];
                let mut drawn: Vec<usize> = Vec::with_capacity(self.choices as usize);
                for _ in 0..users {
                    drawn.clear();
                    while drawn.len() < self.choices as usize {
                        let candidate = pick(&self.cache_cum, rng.next_f64());
                        if !seen[candidate] {
                            seen[candidate] = true;
                            drawn.push(candidate);
                        }
                    }
                    let mut best = drawn[0];
                    for &c in &drawn[1..] {
                        if (loads[c], c) < (loads[best], best) {
                            best = c;
                        }
                    }
                    for &c in &drawn {
                        seen[c] = false;
                    }
                    loads[best] += 1;
                }
            }
            Some((ranges, block_cum)) => {
                for _ in 0..users {
                    let block = pick(block_cum, rng.next_f64());
                    let (start, end) = ranges[block];
                    let mut best = start as usize;
                    for idx in (start as usize + 1)..end as usize {
                        if loads[idx] < loads[best] {
                            best = idx;
                        }
                    }
                    loads[best] += 1;
                }
            }
        }
    }
}

#[inline]
fn pick(cum: &[f64], u: f64) -> usize {
    cum.partition_point(|&c| c <= u).min(cum.len() - 1)
}

/// Draws one association under the policy.
pub fn sample_association(
    users: u32,
    policy: &AssociationPolicy,
    rng: &mut SplitMix64,
) -> PopulationVector {
    let sampler = PolicySampler::new(policy);
    let mut loads = Vec::new();
    sampler.sample_into(users, rng, &mut loads);
    PopulationVector::new(loads)
}

/// Outcome of a sampling-based delay estimation run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub samples: u64,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub std_dev: f64,
    pub std_error: f64,
    /// 95% normal-approximation interval, half-width 1.96 standard errors.
    pub ci95: (f64, f64),
    pub seed: u64,
    pub policy: String,
    /// Empirical mean of the λ-th largest load, λ = 1..Λ.
    pub rank_means: Vec<f64>,
}

impl SimulationReport {
    pub fn ci_contains(&self, value: f64) -> bool {
        self.ci95.0 <= value && value <= self.ci95.1
    }
}

/// Fixed chunk length for the deterministic parallel reduction: partial
/// statistics are computed per chunk and folded in chunk order, so results
/// are bit-identical for every worker count.
const CHUNK: u64 = 1024;

struct ChunkStat {
    count: u64,
    mean: f64,
    m2: f64,
    rank_sums: Vec<u64>,
}

impl ChunkStat {
    fn new(caches: usize) -> Self {
        ChunkStat {
            count: 0,
            mean: 0.0,
            m2: 0.0,
            rank_sums: vec![0; caches],
        }
    }

    fn push(&mut self, delay: f64, sorted_loads: &[u32]) {
        self.count += 1;
        let delta = delay - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (delay - self.mean);
        for (sum, &l) in self.rank_sums.iter_mut().zip(sorted_loads) {
            *sum += l as u64;
        }
    }

    /// Chan's pairwise merge of Welford accumulators.
    fn merge(&mut self, other: &ChunkStat) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            self.count = other.count;
            self.mean = other.mean;
            self.m2 = other.m2;
            self.rank_sums.copy_from_slice(&other.rank_sums);
            return;
        }
        let total = self.count + other.count;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / total as f64;
        self.m2 += other.m2 + delta * delta * self.count as f64 * other.count as f64 / total as f64;
        self.count = total;
        for (a, b) in self.rank_sums.iter_mut().zip(&other.rank_sums) {
            *a += b;
        }
    }
}

fn run_chunks(
    cfg: &NetworkConfig,
    policy: &AssociationPolicy,
    n_samples: u64,
    seed: u64,
) -> Result<ChunkStat> {
    if policy.caches() != cfg.caches() {
        return Err(Error::DimensionMismatch {
            expected: cfg.caches() as usize,
            actual: policy.caches() as usize,
        });
    }
    let sampler = PolicySampler::new(policy);
    let weights = DelayWeights::new(cfg);
    let caches = cfg.caches() as usize;
    let users = cfg.users();
    let chunks = n_samples.div_ceil(CHUNK);

    let partials: Vec<ChunkStat> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let start = chunk * CHUNK;
            let end = (start + CHUNK).min(n_samples);
            let mut stat = ChunkStat::new(caches);
            let mut loads = Vec::with_capacity(caches);
            for index in start..end {
                let mut rng = substream(seed, index);
                sampler.sample_into(users, &mut rng, &mut loads);
                loads.sort_unstable_by(|a, b| b.cmp(a));
                stat.push(weights.delay(&loads), &loads);
            }
            stat
        })
        .collect();

    let mut total = ChunkStat::new(caches);
    for partial in &partials {
        total.merge(partial);
    }
    Ok(total)
}

/// Sampling-based estimate of the average delay: the mean of `T(sort(V))`
/// over `n_samples` independent associations, with normal-approximation
/// confidence interval and empirical rank loads.
pub fn sbn_estimate(
    cfg: &NetworkConfig,
    policy: &AssociationPolicy,
    n_samples: u64,
    seed: u64,
) -> Result<SimulationReport> {
    if n_samples < 2 {
        return Err(Error::InvalidConfig(
            "sbn_estimate needs at least 2 samples".into(),
        ));
    }
    let stat = run_chunks(cfg, policy, n_samples, seed)?;
    let n = stat.count as f64;
    let variance = stat.m2 / (n - 1.0);
    let std_dev = variance.max(0.0).sqrt();
    let std_error = std_dev / n.sqrt();
    let half = 1.96 * std_error;
    Ok(SimulationReport {
        samples: stat.count,
        mean: stat.mean,
        std_dev,
        std_error,
        ci95: (stat.mean - half, stat.mean + half),
        seed,
        policy: policy.descriptor(),
        rank_means: stat.rank_sums.iter().map(|&s| s as f64 / n).collect(),
    })
}

/// Empirical `E[l_λ]`: rank-wise mean of the sorted loads across samples.
pub fn empirical_rank_loads(
    cfg: &NetworkConfig,
    policy: &AssociationPolicy,
    n_samples: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    if n_samples < 1 {
        return Err(Error::InvalidConfig(
            "empirical_rank_loads needs at least 1 sample".into(),
        ));
    }
    let stat = run_chunks(cfg, policy, n_samples, seed)?;
    let n = stat.count as f64;
    Ok(stat.rank_sums.iter().map(|&s| s as f64 / n).collect())
}

/// User-count regime swept by the scaling probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingRegime {
    /// K = Λ
    Linear,
    /// K = Λ ln Λ (rounded)
    LinearLog,
    /// K = Λ²
    Quadratic,
}

impl ScalingRegime {
    pub fn users_for(&self, caches: u32) -> u32 {
        match self {
            ScalingRegime::Linear => caches,
            ScalingRegime::LinearLog => {
                (caches as f64 * (caches as f64).ln()).round().max(1.0) as u32
            }
            ScalingRegime::Quadratic => caches * caches,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ScalingRegime::Linear => "linear",
            ScalingRegime::LinearLog => "linear-log",
            ScalingRegime::Quadratic => "quadratic",
        }
    }
}

/// One grid point of a scaling probe.
#[derive(Debug, Clone)]
pub struct ScalingProbeRow {
    pub caches: u32,
    pub users: u32,
    pub redundancy: u32,
    pub samples: u64,
    pub mean_delay: f64,
    pub t_min: f64,
    pub g_estimate: f64,
    /// Predicted growth rate for this policy/regime pair (natural logs);
    /// bounded `g_estimate / normalizer` across the grid backs the
    /// asymptotic claims empirically.
    pub normalizer: f64,
    pub normalized: f64,
}

/// Growth normalizer: `ln Λ / ln ln Λ` for the plain association at K=Θ(Λ),
/// `ln ln Λ / ln h` for h-choice, `ln(Λ/h) / ln ln(Λ/h)` for proximity, and
/// 1 in the non-scaling regimes K = Ω(Λ ln Λ).
fn probe_normalizer(kind: PolicyKind, regime: ScalingRegime, caches: u32) -> f64 {
    if !matches!(regime, ScalingRegime::Linear) {
        return 1.0;
    }
    let log = |x: f64| x.ln();
    match kind {
        PolicyKind::Uniform | PolicyKind::HChoice(1) => {
            log(caches as f64) / log(log(caches as f64))
        }
        PolicyKind::HChoice(h) => log(log(caches as f64)) / log(h as f64),
        PolicyKind::Proximity(h) => {
            let per_group = caches as f64 / h as f64;
            log(per_group) / log(log(per_group))
        }
    }
}

/// Sweeps a cache-count grid in one regime and reports deterioration
/// estimates next to the predicted normalizer.
pub fn scaling_probe(
    cache_grid: &[u32],
    regime: ScalingRegime,
    kind: PolicyKind,
    gamma: f64,
    samples: u64,
    seed: u64,
) -> Result<Vec<ScalingProbeRow>> {
    let mut rows = Vec::with_capacity(cache_grid.len());
    for &caches in cache_grid {
        if caches < 8 {
            return Err(Error::InvalidConfig(
                "scaling probes need at least 8 caches per point".into(),
            ));
        }
        let users = regime.users_for(caches);
        let redundancy = ((gamma * caches as f64).round() as u32).clamp(1, caches);
        let cfg = NetworkConfig::new(users, caches, redundancy)?;
        let policy = AssociationPolicy::new(kind, IntensityVector::uniform(caches))?;
        let point_seed = mix64(seed ^ mix64(caches as u64));
        let report = sbn_estimate(&cfg, &policy, samples, point_seed)?;
        let best = t_min(&cfg);
        let g_estimate = report.mean / best;
        let normalizer = probe_normalizer(kind, regime, caches);
        rows.push(ScalingProbeRow {
            caches,
            users,
            redundancy,
            samples,
            mean_delay: report.mean,
            t_min: best,
            g_estimate,
            normalizer,
            normalized: g_estimate / normalizer,
        });
    }
    Ok(rows)
}
