//! Effective sample size (ESS) diagnostics for importance sampling.
//!
//! The crate covers three layers:
//!
//! * closed-form diagnostics computed from a single weighted sample set
//!   ([`diagnostics`]): the rule-of-thumb `1 / Σ w̄²`, its CV and L2 forms,
//!   the integrand-aware variant and the delta-method approximation chain;
//! * a brute-force replication engine ([`ground_truth`]) that measures the
//!   true variance-ratio ESS and its MSE counterpart;
//! * the experiment harness ([`experiments`]) that sweeps proposal mismatch,
//!   rare-event thresholds and multiple importance sampling schemes
//!   ([`mis`]) and writes deterministic CSV tables.
//!
//! All randomness flows through an explicit [`RandomStream`] derived from a
//! 64-bit master seed, so every table is bit-reproducible.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod distributions;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod ground_truth;
pub mod mis;
pub mod numeric;
pub mod quadrature;
pub mod rng;

pub use diagnostics::{
    convex_combination_variance, cv, ess_delta_chain, ess_hat, ess_hat_from_unnormalized,
    ess_hat_h, l2_discrepancy, DeltaChain, EssReport, VarianceSource,
};
pub use distributions::{chi2_gaussian, Density, Gaussian1D, GaussianMixture1D};
pub use error::{Error, Result};
pub use estimators::{
    compute_weights, normalize, raw_mc_estimate, snis_estimate, uis_estimate, Integrand,
    WeightedSampleSet,
};
pub use ground_truth::{rrmse, run_replication, GroundTruth, ReplicationPlan, SamplingRule};
pub use mis::{ess_mis, mis_sample, MisKind, MisScheme};
pub use rng::RandomStream;
