//! Delivery-time analysis for coded-caching networks where `K` users attach
//! at random to `Λ` shared caches.
//!
//! With uncoded placement of redundancy `t = Λγ`, a delivery round serves
//! the sorted per-cache loads `l_1 ≥ … ≥ l_Λ` in time
//! `T(L) = Σ_λ l_λ · C(Λ-λ, t) / C(Λ, t)`, so the random association makes
//! the delivery time a statistic of a multinomial occupancy process. This
//! crate computes that statistic four ways:
//!
//! - [`exact`]: the exact optimal average delay by streaming every load
//!   profile (an integer-partition enumeration) with its closed-form
//!   probability, plus the best case `T_min` and the deterioration ratio
//!   `G = average / T_min`.
//! - [`bounds`]: closed-form upper/lower bounds from binomial order
//!   statistics, threshold-based numerical bounds at a chosen coverage,
//!   proximity load-balancing bounds, and bounds for non-uniform (Zipf)
//!   attachment intensities.
//! - [`simulation`]: seeded, worker-count-invariant Monte Carlo under
//!   uniform, power-of-h-choices, and proximity-group policies, plus
//!   scaling probes for the large-`Λ` growth laws.
//! - [`cli`]: the experiment runner behind the `cachecalc` binary, emitting
//!   CSV/JSON parameter-grid results.

pub mod bounds;
pub mod cli;
pub mod combinatorics;
mod error;
pub mod exact;
mod kahan;
pub mod simulation;

pub use error::{Error, Result};

pub use bounds::{
    analytical_lower_bound, analytical_upper_bound, expected_top_load_bounds,
    nonuniform_lower_bound, nonuniform_upper_bound, proximity_upper_bound, threshold_bounds,
    zipf_intensities, BoundMethod, BoundPair, IntensityVector, ThresholdBounds,
};
pub use combinatorics::{
    binomial, binomial_cdf, enumerate_profiles, log_factorial, multiplicity_groups,
    partition_count, BinomialCdf, LogNumber, MultiplicityGroups, ProfileVector,
};
pub use exact::{
    brute_force_average_delay, delay_of_profile, deterioration, exact_average_delay,
    profile_probability, t_min, Delay, DelayWeights, NetworkConfig, DEFAULT_ENUMERATION_BUDGET,
};
pub use simulation::{
    empirical_rank_loads, sample_association, sbn_estimate, scaling_probe, AssociationPolicy,
    PolicyKind, PopulationVector, ScalingRegime, SimulationReport,
};
