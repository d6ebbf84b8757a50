//! Bundled figure datasets: each id maps to a fixed desk-scale parameter
//! grid that runs in minutes on a workstation.

use serde::Deserialize;

use super::row::ResultRow;
use super::{run_bounds, run_exact, run_simulate, ExperimentSpec, PolicyName};
use crate::combinatorics::{BinomialCdf, ProfileVector, DEFAULT_CDF_EPSILON};
use crate::error::{Error, Result};
use crate::exact::{delay_of_profile, NetworkConfig, DEFAULT_ENUMERATION_BUDGET};

pub const DEFAULT_FIGURE_SEED: u64 = 2024;

/// Overrides for a figure run; `None` keeps the figure's bundled default.
#[derive(Debug, Clone, Default)]
pub struct FigureOptions {
    pub seed: Option<u64>,
    pub samples: Option<u64>,
    pub budget: Option<u64>,
    /// Replacement profile file for figure 2.
    pub profiles_path: Option<std::path::PathBuf>,
}

#[derive(Deserialize)]
struct ProfileFile {
    users: u32,
    caches: u32,
    profiles: Vec<Vec<u32>>,
}

const FIG2_PROFILES: &str = include_str!("../../figures/fig2_profiles.json");

/// Produces the dataset for one figure id (2..=10).
pub fn figure_rows(id: u32, options: &FigureOptions) -> Result<Vec<ResultRow>> {
    let seed = options.seed.unwrap_or(DEFAULT_FIGURE_SEED);
    let samples = options.samples.unwrap_or(10_000);
    let budget = options.budget.unwrap_or(DEFAULT_ENUMERATION_BUDGET);
    match id {
        2 => per_profile_delays(options),
        3 => cdf_curve(),
        4 => {
            // the K=100 grid holds ~9.7e7 profiles; the default budget is
            // sized for it unless the caller lowered it explicitly
            let budget = options.budget.unwrap_or(150_000_000);
            let spec = ExperimentSpec {
                users: vec![20, 40, 60, 80, 100],
                caches: vec![20],
                t_values: Some((1..=10).collect()),
                budget,
                ..ExperimentSpec::default()
            };
            let mut rows = run_exact(&spec)?;
            let bound_rows = run_bounds(&spec)?;
            for (row, bounds) in rows.iter_mut().zip(&bound_rows) {
                row.aub = bounds.aub;
                row.alb = bounds.alb;
            }
            Ok(rows)
        }
        5 => {
            let spec = ExperimentSpec {
                users: vec![20, 40],
                caches: vec![20],
                t_values: Some((1..=6).collect()),
                samples,
                seed: Some(seed),
                budget,
                ..ExperimentSpec::default()
            };
            merge_exact_and_simulation(&spec)
        }
        6 => {
            let spec = ExperimentSpec {
                users: vec![60],
                caches: vec![30],
                t_values: Some((1..=15).collect()),
                rho: Some(0.95),
                budget,
                ..ExperimentSpec::default()
            };
            let mut rows = run_bounds(&spec)?;
            let exact_rows = run_exact(&spec)?;
            for (row, exact) in rows.iter_mut().zip(&exact_rows) {
                row.exact = exact.exact;
                row.g = exact.g;
            }
            Ok(rows)
        }
        7 => {
            let mut rows = Vec::new();
            for h in [1u32, 2, 4, 8] {
                let spec = ExperimentSpec {
                    users: vec![128],
                    caches: vec![64],
                    t_values: Some(vec![1, 2, 4, 8, 16, 32]),
                    policy: PolicyName::Proximity,
                    h,
                    budget,
                    ..ExperimentSpec::default()
                };
                rows.extend(run_bounds(&spec)?);
            }
            Ok(rows)
        }
        8 => {
            let spec = ExperimentSpec {
                users: vec![200, 500, 1000],
                caches: vec![100],
                t_values: Some(vec![5, 10, 20, 50]),
                samples,
                seed: Some(seed),
                budget,
                ..ExperimentSpec::default()
            };
            let mut rows = run_bounds(&spec)?;
            let sim_rows = run_simulate(&spec)?;
            for (row, sim) in rows.iter_mut().zip(&sim_rows) {
                row.sbn_mean = sim.sbn_mean;
                row.sbn_stderr = sim.sbn_stderr;
                row.sbn_ci = sim.sbn_ci;
                row.seed = sim.seed;
                row.samples = sim.samples;
                row.runtime_ms = None;
            }
            Ok(rows)
        }
        9 | 10 => {
            let mut rows = Vec::new();
            for alpha in [0.0, 0.5, 0.75, 1.0, 1.25] {
                let spec = ExperimentSpec {
                    users: vec![32],
                    caches: vec![8],
                    t_values: Some(vec![1, 2, 4]),
                    alpha: Some(alpha),
                    samples,
                    seed: Some(seed),
                    budget,
                    ..ExperimentSpec::default()
                };
                let mut bound_rows = run_bounds(&spec)?;
                let sim_rows = run_simulate(&spec)?;
                for (row, sim) in bound_rows.iter_mut().zip(&sim_rows) {
                    if id == 9 {
                        row.nalb = None;
                    } else {
                        row.naub = None;
                    }
                    row.sbn_mean = sim.sbn_mean;
                    row.sbn_stderr = sim.sbn_stderr;
                    row.sbn_ci = sim.sbn_ci;
                    row.seed = sim.seed;
                    row.samples = sim.samples;
                    row.policy = sim.policy.clone();
                    row.runtime_ms = None;
                }
                rows.extend(bound_rows);
            }
            Ok(rows)
        }
        other => Err(Error::InvalidConfig(format!(
            "figure id {other} outside 2..=10"
        ))),
    }
}

/// Figure 2: worst-case delay of a fixed set of profiles across the cache
/// size range. The profile set ships with the tool and can be replaced.
fn per_profile_delays(options: &FigureOptions) -> Result<Vec<ResultRow>> {
    let text = match &options.profiles_path {
        Some(path) => std::fs::read_to_string(path).map_err(|source| Error::OutputIo {
            path: path.display().to_string(),
            source,
        })?,
        None => FIG2_PROFILES.to_string(),
    };
    let file: ProfileFile = serde_json::from_str(&text)?;
    let mut rows = Vec::new();
    for loads in &file.profiles {
        let profile = ProfileVector::new(loads.clone())?;
        if profile.user_count() != file.users as u64
            || profile.cache_count() != file.caches as usize
        {
            return Err(Error::InvalidConfig(format!(
                "profile {loads:?} does not match K={} caches={}",
                file.users, file.caches
            )));
        }
        for t in 1..file.caches {
            let cfg = NetworkConfig::new(file.users, file.caches, t)?;
            let mut row = ResultRow::for_config(&cfg);
            row.profile = Some(format!(
                "[{}]",
                loads
                    .iter()
                    .map(|l| l.to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            ));
            row.delay = Some(delay_of_profile(&profile, &cfg)?);
            rows.push(row);
        }
    }
    Ok(rows)
}

/// Figure 3: the binomial CDF driving the analytical bounds, at desk scale
/// (K = 1e5 users over 1e3 caches). Rows stop once the CDF saturates.
fn cdf_curve() -> Result<Vec<ResultRow>> {
    let users = 100_000u32;
    let caches = 1000u32;
    let cdf = BinomialCdf::new(users, 1.0 / caches as f64, DEFAULT_CDF_EPSILON)?;
    let mut rows = Vec::new();
    for j in 0..=cdf.saturated_from() {
        let mut row = ResultRow {
            k: Some(users),
            lambda: Some(caches),
            ..ResultRow::default()
        };
        row.j = Some(j as u32);
        row.cdf = Some(cdf.get(j as i64));
        rows.push(row);
    }
    Ok(rows)
}

fn merge_exact_and_simulation(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    let mut rows = run_exact(spec)?;
    let sim_rows = run_simulate(spec)?;
    for (row, sim) in rows.iter_mut().zip(&sim_rows) {
        row.sbn_mean = sim.sbn_mean;
        row.sbn_stderr = sim.sbn_stderr;
        row.sbn_ci = sim.sbn_ci;
        row.seed = sim.seed;
        row.samples = sim.samples;
        row.policy = sim.policy.clone();
        row.runtime_ms = None;
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig2_profiles_match_embedded_network() {
        let rows = figure_rows(2, &FigureOptions::default()).unwrap();
        // 8 profiles x 7 cache sizes
        assert_eq!(rows.len(), 56);
        assert!(rows
            .iter()
            .all(|r| r.delay.is_some() && r.profile.is_some()));
        // the balanced profile is the cheapest at every t
        for t in 1..8u32 {
            let of_t: Vec<&ResultRow> = rows.iter().filter(|r| r.t == Some(t)).collect();
            let balanced = of_t
                .iter()
                .find(|r| r.profile.as_deref() == Some("[5 5 5 5 5 5 5 5]"))
                .unwrap();
            assert!(of_t
                .iter()
                .all(|r| r.delay.unwrap() >= balanced.delay.unwrap() - 1e-12));
        }
    }

    #[test]
    fn fig3_curve_is_monotone() {
        let rows = figure_rows(3, &FigureOptions::default()).unwrap();
        assert!(rows.len() > 10);
        assert!(rows
            .windows(2)
            .all(|w| w[1].cdf.unwrap() >= w[0].cdf.unwrap()));
        assert!(rows.last().unwrap().cdf.unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn fig7_proximity_bound_monotone_in_h() {
        let rows = figure_rows(7, &FigureOptions::default()).unwrap();
        for t in [1u32, 2, 4, 8, 16, 32] {
            let per_h: Vec<f64> = [1u32, 2, 4, 8]
                .iter()
                .map(|&h| {
                    rows.iter()
                        .find(|r| r.h == Some(h) && r.t == Some(t))
                        .unwrap()
                        .paub
                        .unwrap()
                })
                .collect();
            assert!(
                per_h.windows(2).all(|w| w[1] <= w[0] + 1e-9),
                "t={t}: {per_h:?}"
            );
        }
    }

    #[test]
    fn fig6_lower_bound_tight_upper_bound_diverges() {
        let rows = figure_rows(6, &FigureOptions::default()).unwrap();
        assert_eq!(rows.len(), 15);
        let mut prev_upper_err = 0.0f64;
        for row in &rows {
            let exact = row.exact.unwrap();
            let lower_err = (exact - row.nlb.unwrap()) / exact;
            let upper_err = (row.nub.unwrap() - exact) / exact;
            // the lower bound stays within a few percent over the whole
            // cache-size range while the upper bound drifts away
            assert!(lower_err < 0.05, "t={:?}: {lower_err}", row.t);
            assert!(upper_err > prev_upper_err - 1e-12, "t={:?}", row.t);
            if row.t.unwrap() >= 2 {
                assert!(upper_err > lower_err, "t={:?}", row.t);
            }
            prev_upper_err = upper_err;
        }
    }

    #[test]
    fn unknown_figure_is_rejected() {
        assert!(figure_rows(1, &FigureOptions::default()).is_err());
        assert!(figure_rows(11, &FigureOptions::default()).is_err());
    }
}
