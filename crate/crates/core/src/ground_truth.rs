//! Brute-force replication of the estimators to measure the true ESS.
//!
//! For each replicate the engine draws a fresh set of `N` target samples for
//! the plain Monte Carlo estimator and, independently, a fresh weighted set
//! for the self-normalized estimator. Across `R` replicates:
//!
//! * `var_raw`, `var_snis` use the unbiased `R − 1` denominator;
//! * `mse_snis = mean((Ĩ_r − I)²)`, `bias_snis = mean(Ĩ_r) − I`;
//! * `ess = N · var_raw / var_snis` and `ess_star = N · var_raw / mse_snis`.
//!
//! Standard errors of the ratio statistics come from splitting the
//! replicates into contiguous batches (at most [`MAX_BATCHES`]) and taking
//! the spread of the per-batch ratios.

use std::io::Write;

use rayon::prelude::*;

use crate::diagnostics::ess_hat_from_unnormalized;
use crate::distributions::Density;
use crate::error::{Error, Result};
use crate::estimators::{
    compute_weights, raw_mc_estimate, snis_estimate, uis_estimate, Integrand, WeightedSampleSet,
};
use crate::mis::{mis_sample, MisScheme};
use crate::numeric::{compensated_sum, mean_and_variance};
use crate::rng::{stream, RandomStream};

pub const MAX_BATCHES: usize = 50;

/// How the importance-sampled set of each replicate is produced.
#[derive(Debug, Clone)]
pub enum SamplingRule {
    Proposal(Density),
    Mis(MisScheme),
}

impl SamplingRule {
    fn draw(
        &self,
        target: &Density,
        rng: &mut RandomStream,
        n: usize,
    ) -> Result<WeightedSampleSet> {
        match self {
            SamplingRule::Proposal(q) => compute_weights(target, q, q.sample(rng, n)),
            SamplingRule::Mis(scheme) => mis_sample(scheme, target, rng, n),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReplicationPlan {
    pub target: Density,
    pub rule: SamplingRule,
    pub integrand: Integrand,
    pub n_per_run: usize,
    pub replicates: usize,
    /// Exact value of the integral, supplied analytically.
    pub true_value: f64,
    pub master_seed: u64,
}

impl ReplicationPlan {
    pub fn validate(&self) -> Result<()> {
        if self.replicates < 2 {
            return Err(Error::InvalidParameter("need at least 2 replicates".into()));
        }
        if self.n_per_run < 1 {
            return Err(Error::InvalidParameter(
                "need at least 1 sample per run".into(),
            ));
        }
        if let SamplingRule::Mis(s) = &self.rule {
            s.check_total(self.n_per_run)?;
        }
        Ok(())
    }
}

/// Monte Carlo standard errors of the [`GroundTruth`] fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StdErrors {
    pub var_raw: f64,
    pub var_snis: f64,
    pub mse_snis: f64,
    pub bias_snis: f64,
    pub ess: f64,
    pub ess_star: f64,
    pub mean_ess_hat: f64,
    pub var_zhat: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub n: usize,
    pub replicates: usize,
    pub var_raw: f64,
    pub var_snis: f64,
    pub mse_snis: f64,
    pub bias_snis: f64,
    pub ess: f64,
    pub ess_star: f64,
    /// Replicate mean and standard deviation of the per-run ESS^.
    pub mean_ess_hat: f64,
    pub sd_ess_hat: f64,
    /// Replicate variance of `Ẑ = (1/N) Σ Wₙ`.
    pub var_zhat: f64,
    pub std_errors: StdErrors,
}

impl GroundTruth {
    pub const CSV_HEADER: &'static str =
        "n,replicates,var_raw,var_snis,mse_snis,bias_snis,ess,ess_star,se_ess";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
            self.n,
            self.replicates,
            self.var_raw,
            self.var_snis,
            self.mse_snis,
            self.bias_snis,
            self.ess,
            self.ess_star,
            self.std_errors.ess
        )
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        writeln!(out, "{}", self.csv_row())?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Replicate {
    raw: f64,
    snis: f64,
    ess_hat: f64,
    zhat: f64,
}

fn one_replicate(plan: &ReplicationPlan, r: usize) -> Result<Replicate> {
    let mut rng = stream(plan.master_seed, r as u64);
    let direct = plan.target.sample(&mut rng, plan.n_per_run);
    let raw = raw_mc_estimate(&direct, &plan.integrand);
    let ws = plan.rule.draw(&plan.target, &mut rng, plan.n_per_run)?;
    Ok(Replicate {
        raw,
        snis: snis_estimate(&ws, &plan.integrand),
        ess_hat: ess_hat_from_unnormalized(ws.log_weights())?,
        zhat: uis_estimate(&ws, &Integrand::constant(1.0), 1.0),
    })
}

/// Per-block summary; also used for whole-run totals.
#[derive(Debug, Clone, Copy)]
struct Block {
    var_raw: f64,
    var_snis: f64,
    mse_snis: f64,
    bias_snis: f64,
    mean_ess_hat: f64,
    var_zhat: f64,
}

fn summarize(reps: &[Replicate], true_value: f64) -> Block {
    let raw: Vec<f64> = reps.iter().map(|r| r.raw).collect();
    let snis: Vec<f64> = reps.iter().map(|r| r.snis).collect();
    let zhat: Vec<f64> = reps.iter().map(|r| r.zhat).collect();
    let (_, var_raw) = mean_and_variance(&raw);
    let (mean_snis, var_snis) = mean_and_variance(&snis);
    let (_, var_zhat) = mean_and_variance(&zhat);
    let mse_snis =
        compensated_sum(snis.iter().map(|s| (s - true_value).powi(2))) / reps.len() as f64;
    let mean_ess_hat = compensated_sum(reps.iter().map(|r| r.ess_hat)) / reps.len() as f64;
    Block {
        var_raw,
        var_snis,
        mse_snis,
        bias_snis: mean_snis - true_value,
        mean_ess_hat,
        var_zhat,
    }
}

fn batch_se<F: Fn(&Block) -> f64>(blocks: &[Block], f: F) -> f64 {
    if blocks.len() < 2 {
        return f64::NAN;
    }
    let values: Vec<f64> = blocks.iter().map(f).collect();
    (mean_and_variance(&values).1 / blocks.len() as f64).sqrt()
}

/// Runs the replication plan. Output is independent of the rayon pool size.
pub fn run_replication(plan: &ReplicationPlan) -> Result<GroundTruth> {
    plan.validate()?;
    let reps: Vec<Replicate> = (0..plan.replicates)
        .into_par_iter()
        .map(|r| one_replicate(plan, r))
        .collect::<Result<_>>()?;

    let all = summarize(&reps, plan.true_value);
    if all.var_snis == 0.0 {
        return Err(Error::DegenerateVariance);
    }
    let n = plan.n_per_run as f64;
    let r = plan.replicates;

    let num_batches = MAX_BATCHES.min(r / 2);
    let blocks: Vec<Block> = if num_batches >= 2 {
        let size = r / num_batches;
        reps.chunks_exact(size)
            .take(num_batches)
            .map(|c| summarize(c, plan.true_value))
            .collect()
    } else {
        Vec::new()
    };

    let ess_hats: Vec<f64> = reps.iter().map(|r| r.ess_hat).collect();
    let (_, var_ess_hat) = mean_and_variance(&ess_hats);
    let snis: Vec<f64> = reps.iter().map(|r| r.snis).collect();
    let (_, var_snis) = mean_and_variance(&snis);

    Ok(GroundTruth {
        n: plan.n_per_run,
        replicates: r,
        var_raw: all.var_raw,
        var_snis: all.var_snis,
        mse_snis: all.mse_snis,
        bias_snis: all.bias_snis,
        ess: n * all.var_raw / all.var_snis,
        ess_star: n * all.var_raw / all.mse_snis,
        mean_ess_hat: all.mean_ess_hat,
        sd_ess_hat: var_ess_hat.sqrt(),
        var_zhat: all.var_zhat,
        std_errors: StdErrors {
            var_raw: batch_se(&blocks, |b| b.var_raw),
            var_snis: batch_se(&blocks, |b| b.var_snis),
            mse_snis: batch_se(&blocks, |b| b.mse_snis),
            bias_snis: (var_snis / r as f64).sqrt(),
            ess: batch_se(&blocks, |b| n * b.var_raw / b.var_snis),
            ess_star: batch_se(&blocks, |b| n * b.var_raw / b.mse_snis),
            mean_ess_hat: (var_ess_hat / r as f64).sqrt(),
            var_zhat: batch_se(&blocks, |b| b.var_zhat),
        },
    })
}

/// Relative root MSE `√MSE / |I|` of the self-normalized estimator.
pub fn rrmse(gt: &GroundTruth, true_value: f64) -> Result<f64> {
    if true_value == 0.0 {
        return Err(Error::ZeroTrueValue);
    }
    Ok(gt.mse_snis.sqrt() / true_value.abs())
}
