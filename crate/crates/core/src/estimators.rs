//! Importance weights and the three integral estimators: unnormalized IS,
//! self-normalized IS and plain Monte Carlo on target draws.
//!
//! Weights stay in log space inside [`WeightedSampleSet`]. Normalized weights
//! produced by [`normalize`] sum to one. The alternative convention that
//! rescales them to sum to `N` is `N · normalize(..)`, see
//! [`WeightedSampleSet::mean_normalized_weights`].

use std::fmt;
use std::io::{Read, Write};
use std::sync::Arc;

use crate::distributions::Density;
use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, max_value};

/// Function whose expectation under the target is being estimated.
#[derive(Clone)]
pub enum Integrand {
    Identity,
    /// `1{|x| > alpha}`.
    IndicatorAbsGt(f64),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Integrand {
    pub fn custom<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        Integrand::Custom(Arc::new(f))
    }

    pub fn constant(c: f64) -> Self {
        Integrand::custom(move |_| c)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Integrand::Identity => x,
            Integrand::IndicatorAbsGt(alpha) => {
                if x.abs() > *alpha {
                    1.0
                } else {
                    0.0
                }
            }
            Integrand::Custom(f) => f(x),
        }
    }
}

impl fmt::Debug for Integrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Integrand::Identity => write!(f, "Identity"),
            Integrand::IndicatorAbsGt(a) => write!(f, "IndicatorAbsGt({a})"),
            Integrand::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl std::str::FromStr for Integrand {
    type Err = Error;

    /// Accepts `identity`, `abs-gt:<alpha>` and `const:<c>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("unknown integrand `{s}`"));
        match s.split_once(':') {
            None if s == "identity" => Ok(Integrand::Identity),
            Some(("abs-gt", a)) => {
                let alpha: f64 = a.parse().map_err(|_| bad())?;
                if !(alpha >= 0.0) {
                    return Err(bad());
                }
                Ok(Integrand::IndicatorAbsGt(alpha))
            }
            Some(("const", c)) => Ok(Integrand::constant(c.parse().map_err(|_| bad())?)),
            _ => Err(bad()),
        }
    }
}

/// Samples paired with unnormalized log-weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSampleSet {
    samples: Vec<f64>,
    log_weights: Vec<f64>,
    provenance: String,
}

impl WeightedSampleSet {
    pub fn new(
        samples: Vec<f64>,
        log_weights: Vec<f64>,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidParameter("sample set is empty".into()));
        }
        if samples.len() != log_weights.len() {
            return Err(Error::InvalidParameter(format!(
                "{} samples but {} log-weights",
                samples.len(),
                log_weights.len()
            )));
        }
        if log_weights
            .iter()
            .any(|w| w.is_nan() || *w == f64::INFINITY)
        {
            return Err(Error::InvalidParameter(
                "log-weights must be finite or -inf".into(),
            ));
        }
        if !log_weights.iter().any(|w| w.is_finite()) {
            return Err(Error::AllWeightsZero);
        }
        Ok(Self {
            samples,
            log_weights,
            provenance: provenance.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// Normalized weights summing to `N` (`W_n / mean(W)`).
    pub fn mean_normalized_weights(&self) -> Vec<f64> {
        let n = self.len() as f64;
        normalize(self).into_iter().map(|w| w * n).collect()
    }

    /// Same samples with every weight set equal, as after resampling.
    pub fn with_equal_weights(&self) -> Self {
        Self {
            samples: self.samples.clone(),
            log_weights: vec![0.0; self.len()],
            provenance: format!("{}+reset", self.provenance),
        }
    }

    /// Writes `x,log_w` CSV with round-trip precision.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x,log_w")?;
        for (x, lw) in self.samples.iter().zip(&self.log_weights) {
            writeln!(out, "{x:?},{lw:?}")?;
        }
        Ok(())
    }

    /// Parses `x,log_w` CSV. Lines starting with `#` are skipped.
    pub fn read_csv<R: Read>(input: R, provenance: impl Into<String>) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(input);
        let headers = reader.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "x" || &headers[1] != "log_w" {
            return Err(Error::Parse {
                line: 1,
                message: format!(
                    "expected header `x,log_w`, found `{}`",
                    headers.iter().collect::<Vec<_>>().join(",")
                ),
            });
        }
        let mut samples = Vec::new();
        let mut log_weights = Vec::new();
        for record in reader.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            let field = |i: usize, name: &str| -> Result<f64> {
                let raw = record.get(i).ok_or_else(|| Error::Parse {
                    line,
                    message: format!("missing `{name}`"),
                })?;
                raw.parse::<f64>().map_err(|_| Error::Parse {
                    line,
                    message: format!("`{raw}` is not a number for `{name}`"),
                })
            };
            let x = field(0, "x")?;
            let lw = field(1, "log_w")?;
            if !x.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("sample `{x}` is not finite"),
                });
            }
            if lw.is_nan() || lw == f64::INFINITY {
                return Err(Error::Parse {
                    line,
                    message: format!("log-weight `{lw}` must be finite or -inf"),
                });
            }
            samples.push(x);
            log_weights.push(lw);
        }
        WeightedSampleSet::new(samples, log_weights, provenance)
    }
}

/// Log-weights `ln π(x) − ln q(x)` for samples drawn from `proposal`.
pub fn compute_weights(
    target: &Density,
    proposal: &Density,
    samples: Vec<f64>,
) -> Result<WeightedSampleSet> {
    let log_weights = samples
        .iter()
        .map(|&x| {
            let lt = target.log_density(x);
            if lt == f64::NEG_INFINITY {
                lt
            } else {
                lt - proposal.log_density(x)
            }
        })
        .collect();
    WeightedSampleSet::new(samples, log_weights, "IS")
}

/// Normalized weights `w̄ₙ = exp(ln wₙ − logsumexp(ln w))`, summing to one.
pub fn normalize(ws: &WeightedSampleSet) -> Vec<f64> {
    normalize_log_weights(ws.log_weights())
}

pub(crate) fn normalize_log_weights(log_weights: &[f64]) -> Vec<f64> {
    let m = max_value(log_weights);
    let scaled: Vec<f64> = log_weights.iter().map(|&lw| (lw - m).exp()).collect();
    let total = compensated_sum(scaled.iter().copied());
    scaled.into_iter().map(|w| w / total).collect()
}

/// `(1 / (N·Z)) Σ Wₙ h(xₙ)`, unbiased when `Z` is the target's normalizer.
pub fn uis_estimate(ws: &WeightedSampleSet, h: &Integrand, z: f64) -> f64 {
    let m = max_value(ws.log_weights());
    let s = compensated_sum(
        ws.samples()
            .iter()
            .zip(ws.log_weights())
            .map(|(&x, &lw)| (lw - m).exp() * h.eval(x)),
    );
    s * (m - (ws.len() as f64).ln() - z.ln()).exp()
}

/// `Σ w̄ₙ h(xₙ)`; usable without knowing `Z`.
///
/// Evaluated as `Σ uₙ h(xₙ) / Σ uₙ` with `uₙ = exp(ln wₙ − max ln w)`, so equal
/// weights reproduce [`raw_mc_estimate`] bit for bit.
pub fn snis_estimate(ws: &WeightedSampleSet, h: &Integrand) -> f64 {
    let m = max_value(ws.log_weights());
    let u: Vec<f64> = ws.log_weights().iter().map(|&lw| (lw - m).exp()).collect();
    let num = compensated_sum(ws.samples().iter().zip(&u).map(|(&x, &u)| u * h.eval(x)));
    num / compensated_sum(u.iter().copied())
}

/// Plain average of `h` over draws from the target.
pub fn raw_mc_estimate(samples: &[f64], h: &Integrand) -> f64 {
    compensated_sum(samples.iter().map(|&x| h.eval(x))) / samples.len() as f64
}
