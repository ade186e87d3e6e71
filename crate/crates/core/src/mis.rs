//! Multiple importance sampling with `J` proposals.
//!
//! Three sampling/weighting rules are supported:
//!
//! * `N1`: sample `n` comes from proposal `n mod J` and is weighted by that
//!   proposal alone, `π(x)/q_j(x)`;
//! * `N3`: same deterministic allocation, weighted by the equal-weight
//!   mixture `ψ(x) = (1/J) Σ q_j(x)` (deterministic mixture);
//! * `R3`: i.i.d. draws from `ψ`, weighted by `π(x)/ψ(x)`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::distributions::{Density, Gaussian1D, GaussianMixture1D};
use crate::error::{Error, Result};
use crate::estimators::WeightedSampleSet;
use crate::numeric::log_sum_exp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MisKind {
    N1,
    N3,
    R3,
}

impl MisKind {
    pub const ALL: [MisKind; 3] = [MisKind::N1, MisKind::N3, MisKind::R3];

    pub fn as_str(&self) -> &'static str {
        match self {
            MisKind::N1 => "N1",
            MisKind::N3 => "N3",
            MisKind::R3 => "R3",
        }
    }
}

impl fmt::Display for MisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MisKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "N1" => Ok(MisKind::N1),
            "N3" => Ok(MisKind::N3),
            "R3" => Ok(MisKind::R3),
            other => Err(Error::InvalidParameter(format!(
                "unknown MIS scheme `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MisScheme {
    kind: MisKind,
    proposals: Vec<Density>,
}

impl MisScheme {
    pub fn new(kind: MisKind, proposals: Vec<Density>) -> Result<Self> {
        if proposals.is_empty() {
            return Err(Error::InvalidParameter(
                "MIS needs at least one proposal".into(),
            ));
        }
        Ok(Self { kind, proposals })
    }

    pub fn kind(&self) -> MisKind {
        self.kind
    }

    pub fn proposals(&self) -> &[Density] {
        &self.proposals
    }

    pub fn num_proposals(&self) -> usize {
        self.proposals.len()
    }

    /// `ln ψ(x)` for the equal-weight mixture of the proposals.
    ///
    /// Evaluated term by term exactly like [`GaussianMixture1D`], so a target
    /// mixture with the same components yields log-weights of exactly zero.
    pub fn log_mixture_density(&self, x: f64) -> f64 {
        let lw = (1.0 / self.proposals.len() as f64).ln();
        let terms: Vec<f64> = self
            .proposals
            .iter()
            .map(|q| lw + q.log_density(x))
            .collect();
        log_sum_exp(&terms)
    }

    /// Whether `total_n` draws can be allocated under this scheme.
    pub fn check_total(&self, total_n: usize) -> Result<()> {
        let j = self.proposals.len();
        if total_n == 0 {
            return Err(Error::InvalidParameter(
                "total sample count must be >= 1".into(),
            ));
        }
        if matches!(self.kind, MisKind::N1 | MisKind::N3) && !total_n.is_multiple_of(j) {
            return Err(Error::InvalidParameter(format!(
                "{} needs a total that is a multiple of J = {j}, got {total_n}",
                self.kind
            )));
        }
        Ok(())
    }

    /// Log-weight of a draw `x` that came from proposal `source` (ignored by N3/R3).
    pub fn log_weight(&self, target: &Density, x: f64, source: usize) -> f64 {
        let lt = target.log_density(x);
        if lt == f64::NEG_INFINITY {
            return lt;
        }
        match self.kind {
            MisKind::N1 => lt - self.proposals[source].log_density(x),
            MisKind::N3 | MisKind::R3 => lt - self.log_mixture_density(x),
        }
    }
}

/// Draws `total_n` samples under the scheme and weights them against `target`.
pub fn mis_sample<R: Rng + ?Sized>(
    scheme: &MisScheme,
    target: &Density,
    rng: &mut R,
    total_n: usize,
) -> Result<WeightedSampleSet> {
    scheme.check_total(total_n)?;
    let j = scheme.num_proposals();
    let mut samples = Vec::with_capacity(total_n);
    let mut log_weights = Vec::with_capacity(total_n);
    for n in 0..total_n {
        let source = match scheme.kind {
            MisKind::N1 | MisKind::N3 => n % j,
            MisKind::R3 => rng.random_range(0..j),
        };
        let x = scheme.proposals[source].sample_one(rng);
        samples.push(x);
        log_weights.push(scheme.log_weight(target, x, source));
    }
    WeightedSampleSet::new(samples, log_weights, scheme.kind.as_str())
}

/// MIS extension of the Kong ESS: `N / (1 + Var[Ẑ])`.
pub fn ess_mis(total_n: usize, var_zhat: f64) -> Result<f64> {
    if !(var_zhat >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Var[Z^] = {var_zhat} must be >= 0"
        )));
    }
    Ok(total_n as f64 / (1.0 + var_zhat))
}

/// Target means of the three-mode mixture target.
pub const SCENARIO_TARGET_MEANS: [f64; 3] = [-3.0, 0.0, 3.0];
/// Component variance `c²` of the target.
pub const SCENARIO_TARGET_VARIANCE: f64 = 1.0;

/// Target mixture and proposals of MIS scenario `k` (1 = no mismatch,
/// 2 = mild, 3 = large).
pub fn scenario(k: u8) -> Result<(Density, Vec<Density>)> {
    let (means, variance): ([f64; 3], f64) = match k {
        1 => (SCENARIO_TARGET_MEANS, SCENARIO_TARGET_VARIANCE),
        2 => ([-3.0, -1.0, 3.0], 2.0),
        3 => ([-4.0, -1.0, 1.0], 2.0),
        _ => {
            return Err(Error::InvalidParameter(format!(
                "scenario must be 1, 2 or 3, got {k}"
            )))
        }
    };
    let target = GaussianMixture1D::equally_weighted(
        SCENARIO_TARGET_MEANS
            .iter()
            .map(|&m| Gaussian1D::new(m, SCENARIO_TARGET_VARIANCE))
            .collect::<Result<_>>()?,
    )?;
    let proposals = means
        .iter()
        .map(|&m| Density::gaussian(m, variance))
        .collect::<Result<_>>()?;
    Ok((Density::from(target), proposals))
}
