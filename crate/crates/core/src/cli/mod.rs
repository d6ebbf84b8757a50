//! Experiment runner behind the command-line interface: grid validation,
//! per-command row production, and file emission.

mod figures;
mod row;

pub use figures::{figure_rows, FigureOptions, DEFAULT_FIGURE_SEED};
pub use row::{emit, emit_csv, emit_json, fmt_sig, parse_json_rows, OutputFormat, ResultRow};

use std::time::Instant;

use crate::bounds::{
    analytical_lower_bound, analytical_upper_bound, nonuniform_lower_bound, nonuniform_upper_bound,
    proximity_upper_bound, threshold_bounds_with_budget, zipf_intensities, IntensityVector,
};
use crate::error::{Error, Result};
use crate::exact::{
    average_delay_from_rank_loads, expected_rank_loads_exact, t_min, NetworkConfig,
    DEFAULT_ENUMERATION_BUDGET,
};
use crate::simulation::{
    sbn_estimate, scaling_probe, AssociationPolicy, PolicyKind, ScalingRegime,
};

/// Which command a spec is being validated for; preconditions differ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecCommand {
    Exact,
    Bounds,
    Simulate,
}

/// Association policy selector as it appears on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PolicyName {
    #[default]
    Uniform,
    HChoice,
    Proximity,
}

impl PolicyName {
    pub fn as_str(&self) -> &'static str {
        match self {
            PolicyName::Uniform => "uniform",
            PolicyName::HChoice => "hchoice",
            PolicyName::Proximity => "proximity",
        }
    }

    pub fn kind(&self, h: u32) -> PolicyKind {
        match self {
            PolicyName::Uniform => PolicyKind::Uniform,
            PolicyName::HChoice => PolicyKind::HChoice(h),
            PolicyName::Proximity => PolicyKind::Proximity(h),
        }
    }
}

/// A fully resolved experiment description. Every module precondition is
/// checked by [`ExperimentSpec::grid`] before any computation starts.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub users: Vec<u32>,
    pub caches: Vec<u32>,
    pub t_values: Option<Vec<u32>>,
    pub gammas: Option<Vec<f64>>,
    pub policy: PolicyName,
    pub h: u32,
    pub alpha: Option<f64>,
    pub rho: Option<f64>,
    pub samples: u64,
    pub seed: Option<u64>,
    pub budget: u64,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            users: Vec::new(),
            caches: Vec::new(),
            t_values: None,
            gammas: None,
            policy: PolicyName::Uniform,
            h: 1,
            alpha: None,
            rho: None,
            samples: 10_000,
            seed: None,
            budget: DEFAULT_ENUMERATION_BUDGET,
        }
    }
}

impl ExperimentSpec {
    /// Expands the grid, validating every referenced precondition up front
    /// and naming the offending field on failure.
    pub fn grid(&self, command: SpecCommand) -> Result<Vec<NetworkConfig>> {
        if self.users.is_empty() {
            return Err(Error::InvalidConfig(
                "--users/-K: at least one value required".into(),
            ));
        }
        if self.caches.is_empty() {
            return Err(Error::InvalidConfig(
                "--caches/-L: at least one value required".into(),
            ));
        }
        if self.t_values.is_some() && self.gammas.is_some() {
            return Err(Error::InvalidConfig(
                "--t and --gamma are mutually exclusive".into(),
            ));
        }
        if self.t_values.is_none() && self.gammas.is_none() {
            return Err(Error::InvalidConfig("--t or --gamma required".into()));
        }
        if let Some(alpha) = self.alpha {
            if alpha.is_nan() || alpha < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "--alpha: {alpha} must be non-negative"
                )));
            }
        }
        if let Some(rho) = self.rho {
            if !(rho > 0.0 && rho <= 1.0) {
                return Err(Error::InvalidConfig(format!("--rho: {rho} outside (0, 1]")));
            }
        }
        match command {
            SpecCommand::Simulate => {
                if self.seed.is_none() {
                    return Err(Error::InvalidConfig(
                        "--seed: required for simulate (no silent entropy)".into(),
                    ));
                }
                if self.samples < 2 {
                    return Err(Error::InvalidConfig(
                        "--samples: at least 2 required".into(),
                    ));
                }
                for &caches in &self.caches {
                    if self.h < 1 || self.h > caches {
                        return Err(Error::InvalidConfig(format!(
                            "--h: {} outside [1, {caches}]",
                            self.h
                        )));
                    }
                }
            }
            SpecCommand::Bounds => {
                for &caches in &self.caches {
                    if caches < 2 {
                        return Err(Error::InvalidConfig(
                            "--caches/-L: bounds need at least 2 caches (the lower bound divides by Λ-1)".into(),
                        ));
                    }
                    if self.policy == PolicyName::Proximity && (self.h < 1 || self.h > caches) {
                        return Err(Error::InvalidConfig(format!(
                            "--h: {} outside [1, {caches}]",
                            self.h
                        )));
                    }
                }
            }
            SpecCommand::Exact => {}
        }

        let mut grid = Vec::new();
        for &users in &self.users {
            for &caches in &self.caches {
                if let Some(ts) = &self.t_values {
                    for &t in ts {
                        let cfg = NetworkConfig::new(users, caches, t).map_err(|e| {
                            Error::InvalidConfig(format!("--t: {e} (K={users}, caches={caches})"))
                        })?;
                        grid.push(cfg);
                    }
                }
                if let Some(gammas) = &self.gammas {
                    for &gamma in gammas {
                        let cfg = NetworkConfig::from_gamma(users, caches, gamma).map_err(|e| {
                            Error::InvalidConfig(format!(
                                "--gamma: {e} (K={users}, caches={caches})"
                            ))
                        })?;
                        grid.push(cfg);
                    }
                }
            }
        }
        Ok(grid)
    }

    fn intensities(&self, caches: u32) -> Result<IntensityVector> {
        match self.alpha {
            Some(alpha) => zipf_intensities(caches, alpha),
            None => Ok(IntensityVector::uniform(caches)),
        }
    }
}

fn degenerate_safe_g(value: f64, best: f64, cfg: &NetworkConfig) -> f64 {
    if cfg.redundancy() == cfg.caches() {
        1.0
    } else {
        value / best
    }
}

fn flag_degenerate(row: &mut ResultRow, cfg: &NetworkConfig) {
    if !cfg.has_coded_gain() {
        row.warning = Some("no coded gain (t=0)".into());
    }
}

/// Exact optimal average delay per grid point.
///
/// The profile enumeration is shared across every `t` of one `(K, Λ)` pair;
/// its cost is charged to the pair's first row. A blown enumeration budget
/// becomes a row-level error and the run continues.
pub fn run_exact(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    let grid = spec.grid(SpecCommand::Exact)?;
    let mut rows = Vec::with_capacity(grid.len());
    let mut group: Option<(u32, u32, Result<Vec<f64>>)> = None;
    for cfg in &grid {
        let start = Instant::now();
        let key = (cfg.users(), cfg.caches());
        let fresh_group = !matches!(&group, Some((k, c, _)) if (*k, *c) == key);
        if fresh_group {
            group = Some((
                key.0,
                key.1,
                expected_rank_loads_exact(cfg.users(), cfg.caches(), spec.budget),
            ));
        }
        let mut row = ResultRow::for_config(cfg);
        flag_degenerate(&mut row, cfg);
        let best = t_min(cfg);
        row.t_min = Some(best);
        match &group.as_ref().unwrap().2 {
            Ok(rank_loads) => {
                let exact = average_delay_from_rank_loads(rank_loads, cfg)?;
                row.exact = Some(exact);
                row.g = Some(degenerate_safe_g(exact, best, cfg));
            }
            Err(e) => {
                row.error = Some(e.to_string());
            }
        }
        row.runtime_ms = Some(start.elapsed().as_secs_f64() * 1e3);
        rows.push(row);
    }
    Ok(rows)
}

/// Analytical bounds per grid point, plus threshold bounds when `rho` is
/// given, non-uniform bounds when `alpha` is given, and the proximity bound
/// when the policy is proximity.
pub fn run_bounds(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    let grid = spec.grid(SpecCommand::Bounds)?;
    let mut rows = Vec::with_capacity(grid.len());
    for cfg in &grid {
        let start = Instant::now();
        let mut row = ResultRow::for_config(cfg);
        flag_degenerate(&mut row, cfg);
        row.t_min = Some(t_min(cfg));
        row.aub = Some(analytical_upper_bound(cfg));
        row.alb = Some(analytical_lower_bound(cfg)?);
        if let Some(rho) = spec.rho {
            row.rho = Some(rho);
            let tb = threshold_bounds_with_budget(cfg, rho, spec.budget)?;
            row.nlb = Some(tb.lower);
            row.nub = Some(tb.upper);
            row.rho_achieved = Some(tb.coverage);
            if tb.truncated {
                row.warning = Some(format!(
                    "enumeration budget reached at coverage {:.6}",
                    tb.coverage
                ));
            }
        }
        if let Some(alpha) = spec.alpha {
            row.alpha = Some(alpha);
            let p = zipf_intensities(cfg.caches(), alpha)?;
            row.naub = Some(nonuniform_upper_bound(cfg, &p)?);
            row.nalb = Some(nonuniform_lower_bound(cfg, &p)?);
        }
        if spec.policy == PolicyName::Proximity {
            row.policy = Some(PolicyName::Proximity.as_str().into());
            row.h = Some(spec.h);
            row.paub = Some(proximity_upper_bound(cfg, spec.h)?);
        }
        row.runtime_ms = Some(start.elapsed().as_secs_f64() * 1e3);
        rows.push(row);
    }
    Ok(rows)
}

/// Monte Carlo estimation per grid point; deterministic for a fixed seed,
/// so rows carry no wall-clock field.
pub fn run_simulate(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    let grid = spec.grid(SpecCommand::Simulate)?;
    let seed = spec.seed.expect("validated");
    let mut rows = Vec::with_capacity(grid.len());
    for cfg in &grid {
        let intensities = spec.intensities(cfg.caches())?;
        let policy = AssociationPolicy::new(spec.policy.kind(spec.h), intensities)?;
        let report = sbn_estimate(cfg, &policy, spec.samples, seed)?;
        let mut row = ResultRow::for_config(cfg);
        flag_degenerate(&mut row, cfg);
        let best = t_min(cfg);
        row.policy = Some(report.policy.clone());
        row.h = Some(spec.h);
        row.alpha = spec.alpha;
        row.seed = Some(seed);
        row.samples = Some(report.samples);
        row.sbn_mean = Some(report.mean);
        row.sbn_stderr = Some(report.std_error);
        row.sbn_ci = Some(1.96 * report.std_error);
        row.e_l1 = report.rank_means.first().copied();
        row.t_min = Some(best);
        row.g = Some(degenerate_safe_g(report.mean, best, cfg));
        rows.push(row);
    }
    Ok(rows)
}

/// Deterioration scaling probe over a cache grid in one regime.
pub fn run_probe(
    cache_grid: &[u32],
    regime: ScalingRegime,
    policy: PolicyName,
    h: u32,
    gamma: f64,
    samples: u64,
    seed: u64,
) -> Result<Vec<ResultRow>> {
    let probe = scaling_probe(cache_grid, regime, policy.kind(h), gamma, samples, seed)?;
    Ok(probe
        .into_iter()
        .map(|p| {
            let cfg = NetworkConfig::new(p.users, p.caches, p.redundancy)
                .expect("probe emits valid configs");
            let mut row = ResultRow::for_config(&cfg);
            row.policy = Some(policy.as_str().into());
            row.h = Some(h);
            row.seed = Some(seed);
            row.samples = Some(p.samples);
            row.sbn_mean = Some(p.mean_delay);
            row.t_min = Some(p.t_min);
            row.g = Some(p.g_estimate);
            row.normalizer = Some(p.normalizer);
            row.normalized_g = Some(p.normalized);
            row
        })
        .collect())
}

/// True when any row carries an error; the process exit code keys off this.
pub fn has_row_errors(rows: &[ResultRow]) -> bool {
    rows.iter().any(|r| r.error.is_some())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_spec() -> ExperimentSpec {
        ExperimentSpec {
            users: vec![2],
            caches: vec![2],
            t_values: Some(vec![1]),
            ..ExperimentSpec::default()
        }
    }

    #[test]
    fn exact_row_small_case() {
        let rows = run_exact(&base_spec()).unwrap();
        assert_eq!(rows.len(), 1);
        let row = &rows[0];
        assert!((row.exact.unwrap() - 0.75).abs() < 1e-12);
        assert!((row.t_min.unwrap() - 0.5).abs() < 1e-12);
        assert!((row.g.unwrap() - 1.5).abs() < 1e-12);
        assert!(row.error.is_none());
    }

    #[test]
    fn exact_degenerate_full_redundancy() {
        let mut spec = base_spec();
        spec.t_values = Some(vec![2]);
        let rows = run_exact(&spec).unwrap();
        assert_eq!(rows[0].exact, Some(0.0));
        assert_eq!(rows[0].g, Some(1.0));
    }

    #[test]
    fn exact_budget_error_is_row_level() {
        let mut spec = base_spec();
        spec.users = vec![50];
        spec.caches = vec![10];
        spec.t_values = Some(vec![1, 2]);
        spec.budget = 10;
        let rows = run_exact(&spec).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.error.is_some()));
        assert!(has_row_errors(&rows));
    }

    #[test]
    fn grid_validation_messages_name_fields() {
        let mut spec = base_spec();
        spec.t_values = Some(vec![5]);
        let err = spec.grid(SpecCommand::Exact).unwrap_err().to_string();
        assert!(err.contains("--t"), "{err}");

        let mut spec = base_spec();
        spec.t_values = None;
        spec.gammas = Some(vec![0.3]);
        let err = spec.grid(SpecCommand::Exact).unwrap_err().to_string();
        assert!(err.contains("--gamma"), "{err}");

        let mut spec = base_spec();
        spec.seed = None;
        let err = spec.grid(SpecCommand::Simulate).unwrap_err().to_string();
        assert!(err.contains("--seed"), "{err}");

        let mut spec = base_spec();
        spec.caches = vec![1];
        let err = spec.grid(SpecCommand::Bounds).unwrap_err().to_string();
        assert!(err.contains("--caches"), "{err}");
    }

    #[test]
    fn bounds_rows_cover_requested_methods() {
        let mut spec = base_spec();
        spec.users = vec![16];
        spec.caches = vec![8];
        spec.t_values = Some(vec![2]);
        spec.rho = Some(0.9);
        spec.alpha = Some(1.0);
        spec.policy = PolicyName::Proximity;
        spec.h = 2;
        let rows = run_bounds(&spec).unwrap();
        let row = &rows[0];
        assert!(row.aub.is_some());
        assert!(row.alb.is_some());
        assert!(row.nlb.is_some());
        assert!(row.nub.is_some());
        assert!(row.rho_achieved.unwrap() >= 0.9);
        assert!(row.naub.is_some());
        assert!(row.nalb.is_some());
        assert!(row.paub.is_some());
        assert!(row.error.is_none());
    }

    #[test]
    fn simulate_rows_are_seeded_and_deterministic() {
        let mut spec = base_spec();
        spec.users = vec![8];
        spec.caches = vec![4];
        spec.t_values = Some(vec![1]);
        spec.samples = 4000;
        spec.seed = Some(11);
        let a = run_simulate(&spec).unwrap();
        let b = run_simulate(&spec).unwrap();
        assert_eq!(a, b);
        assert!(a[0].sbn_mean.is_some());
        assert!(a[0].runtime_ms.is_none());
    }
}
