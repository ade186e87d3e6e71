//! Closed-form ESS diagnostics computed from one weighted sample set.
//!
//! The rule of thumb `ESS^ = 1 / Σ w̄ₙ²` is evaluated as `(Σ uₙ)² / Σ uₙ²`
//! with `uₙ = w̄ₙ / max w̄`, which is scale free and returns exactly `N` for
//! equal weights and exactly `1` for a single non-zero weight.

use std::io::Write;

use crate::distributions::{chi2_gaussian, Gaussian1D};
use crate::error::{Error, Result};
use crate::estimators::{Integrand, WeightedSampleSet};
use crate::numeric::{compensated_sum, max_value};

const SUM_TOLERANCE: f64 = 1e-9;

fn check_normalized(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::InvalidWeights("no weights".into()));
    }
    if let Some(w) = weights.iter().find(|w| !(0.0..=1.0).contains(*w)) {
        return Err(Error::InvalidWeights(format!("weight {w} outside [0, 1]")));
    }
    let total = compensated_sum(weights.iter().copied());
    if (total - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::InvalidWeights(format!("weights sum to {total}")));
    }
    Ok(())
}

/// `(Σ uₙ)² / Σ uₙ²` for non-negative `u` with `max u = 1`, clamped to `[1, N]`.
fn ess_of_scaled(scaled: &[f64]) -> f64 {
    let s1 = compensated_sum(scaled.iter().copied());
    let s2 = compensated_sum(scaled.iter().map(|u| u * u));
    (s1 * s1 / s2).clamp(1.0, scaled.len() as f64)
}

fn scaled_from_log(log_weights: &[f64]) -> Result<Vec<f64>> {
    let m = max_value(log_weights);
    if !m.is_finite() {
        return Err(Error::AllWeightsZero);
    }
    Ok(log_weights.iter().map(|&lw| (lw - m).exp()).collect())
}

/// Rule-of-thumb ESS `1 / Σ w̄ₙ²` of normalized weights. Lies in `[1, N]`.
pub fn ess_hat(normalized_weights: &[f64]) -> Result<f64> {
    check_normalized(normalized_weights)?;
    let m = max_value(normalized_weights);
    let scaled: Vec<f64> = normalized_weights.iter().map(|w| w / m).collect();
    Ok(ess_of_scaled(&scaled))
}

/// Particle form `N (Σwₙ/N)² / (Σwₙ²/N)` evaluated from log-weights.
pub fn ess_hat_from_unnormalized(log_weights: &[f64]) -> Result<f64> {
    if log_weights.is_empty() {
        return Err(Error::InvalidWeights("no weights".into()));
    }
    Ok(ess_of_scaled(&scaled_from_log(log_weights)?))
}

/// ESS^ computed with weights proportional to `|h(xₙ)| wₙ`.
pub fn ess_hat_h(ws: &WeightedSampleSet, h: &Integrand) -> Result<f64> {
    let log_products: Vec<f64> = ws
        .samples()
        .iter()
        .zip(ws.log_weights())
        .map(|(&x, &lw)| lw + h.eval(x).abs().ln())
        .collect();
    match scaled_from_log(&log_products) {
        Ok(scaled) => Ok(ess_of_scaled(&scaled)),
        Err(Error::AllWeightsZero) => Err(Error::NoMassUnderH),
        Err(e) => Err(e),
    }
}

/// Coefficient of variation `√((1/N) Σ (N w̄ₙ − 1)²)`.
pub fn cv(normalized_weights: &[f64]) -> Result<f64> {
    check_normalized(normalized_weights)?;
    let n = normalized_weights.len() as f64;
    let ss = compensated_sum(normalized_weights.iter().map(|w| (n * w - 1.0).powi(2)));
    Ok((ss / n).sqrt())
}

/// Euclidean distance between the weights and the uniform mass function.
pub fn l2_discrepancy(normalized_weights: &[f64]) -> Result<f64> {
    check_normalized(normalized_weights)?;
    let u = 1.0 / normalized_weights.len() as f64;
    Ok(compensated_sum(normalized_weights.iter().map(|w| (w - u).powi(2))).sqrt())
}

/// Variance of `Σ wₙ Zₙ / Σ wₙ` for i.i.d. `Zₙ` with variance `sigma2_z`.
pub fn convex_combination_variance(unnormalized_weights: &[f64], sigma2_z: f64) -> Result<f64> {
    if unnormalized_weights
        .iter()
        .any(|w| !(*w >= 0.0) || !w.is_finite())
    {
        return Err(Error::InvalidParameter(
            "weights must be finite and non-negative".into(),
        ));
    }
    if !(sigma2_z > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "variance {sigma2_z} must be positive"
        )));
    }
    let s1 = compensated_sum(unnormalized_weights.iter().copied());
    if s1 == 0.0 {
        return Err(Error::AllWeightsZero);
    }
    let s2 = compensated_sum(unnormalized_weights.iter().map(|w| w * w));
    Ok(sigma2_z * s2 / (s1 * s1))
}

/// Where the weight variance fed to the delta chain came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarianceSource {
    Analytic,
    Empirical,
}

/// Delta-method approximations of the ESS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaChain {
    pub n: usize,
    /// `Var_q[W]`.
    pub var_w: f64,
    /// `E_q[W²] = Var_q[W] + Z²`.
    pub e_w2: f64,
    pub z: f64,
    /// `N / (1 + Var_q[W])`, valid for a normalized target.
    pub ess_kong: f64,
    /// `N Z² / E_q[W²]`.
    pub ess_z_corrected: f64,
    pub source: VarianceSource,
}

pub fn ess_delta_chain(n: usize, var_w: f64, z: f64, source: VarianceSource) -> Result<DeltaChain> {
    if !(var_w >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Var[W] = {var_w} must be >= 0"
        )));
    }
    if !(z > 0.0) {
        return Err(Error::InvalidParameter(format!("Z = {z} must be > 0")));
    }
    let nf = n as f64;
    let z2 = z * z;
    Ok(DeltaChain {
        n,
        var_w,
        e_w2: var_w + z2,
        z,
        ess_kong: nf / (1.0 + var_w),
        ess_z_corrected: nf * z2 / (z2 + var_w),
        source,
    })
}

impl DeltaChain {
    /// Chain for a normalized Gaussian target and proposal, using the
    /// closed-form second moment of the weights.
    pub fn gaussian(n: usize, target: &Gaussian1D, proposal: &Gaussian1D) -> Result<Self> {
        let e_w2 = chi2_gaussian(target, proposal)?;
        ess_delta_chain(n, (e_w2 - 1.0).max(0.0), 1.0, VarianceSource::Analytic)
    }

    /// Plug-in chain: `Z` and `E_q[W²]` replaced by their sample averages.
    /// `ess_z_corrected` then coincides with [`ess_hat_from_unnormalized`].
    pub fn empirical(ws: &WeightedSampleSet) -> Result<Self> {
        let lw = ws.log_weights();
        let m = max_value(lw);
        let nf = ws.len() as f64;
        let scaled = scaled_from_log(lw)?;
        let s1 = compensated_sum(scaled.iter().copied()) / nf;
        let s2 = compensated_sum(scaled.iter().map(|u| u * u)) / nf;
        let z = s1 * m.exp();
        let e_w2 = s2 * (2.0 * m).exp();
        let var_w = ((s2 - s1 * s1).max(0.0)) * (2.0 * m).exp();
        Ok(DeltaChain {
            n: ws.len(),
            var_w,
            e_w2,
            z,
            ess_kong: nf / (1.0 + var_w),
            ess_z_corrected: ess_of_scaled(&scaled),
            source: VarianceSource::Empirical,
        })
    }
}

/// Every closed-form diagnostic for one sample set.
#[derive(Debug, Clone, PartialEq)]
pub struct EssReport {
    pub n: usize,
    pub ess_hat: f64,
    pub cv: f64,
    pub l2: f64,
    pub ess_hat_h: Option<f64>,
    pub delta_chain: Option<DeltaChain>,
}

impl EssReport {
    pub const CSV_HEADER: &'static str = "n,ess_hat,cv,l2,ess_hat_h";

    pub fn from_sample_set(ws: &WeightedSampleSet, h: Option<&Integrand>) -> Result<Self> {
        let w = crate::estimators::normalize(ws);
        Ok(Self {
            n: ws.len(),
            ess_hat: ess_hat(&w)?,
            cv: cv(&w)?,
            l2: l2_discrepancy(&w)?,
            ess_hat_h: h.map(|h| ess_hat_h(ws, h)).transpose()?,
            delta_chain: None,
        })
    }

    pub fn with_delta_chain(mut self, chain: DeltaChain) -> Self {
        self.delta_chain = Some(chain);
        self
    }

    pub fn csv_row(&self) -> String {
        let h = self.ess_hat_h.map(|v| format!("{v:?}")).unwrap_or_default();
        format!(
            "{},{:?},{:?},{:?},{}",
            self.n, self.ess_hat, self.cv, self.l2, h
        )
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        writeln!(out, "{}", self.csv_row())?;
        Ok(())
    }
}
