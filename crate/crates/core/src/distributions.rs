//! Univariate Gaussian and Gaussian-mixture densities with exact samplers.
//!
//! Densities double as importance-sampling targets and proposals. A target
//! known only up to its normalizing constant is modelled with
//! [`Density::Scaled`], which shifts the base log-density by `ln Z` and
//! samples exactly like the base.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numeric::log_sum_exp;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian1D {
    mean: f64,
    variance: f64,
    std_dev: f64,
}

impl Gaussian1D {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        if !(variance > 0.0 && variance.is_finite()) || !mean.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Gaussian needs finite mean and positive finite variance, got N({mean}, {variance})"
            )));
        }
        Ok(Self {
            mean,
            variance,
            std_dev: variance.sqrt(),
        })
    }

    pub fn standard() -> Self {
        Self {
            mean: 0.0,
            variance: 1.0,
            std_dev: 1.0,
        }
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn std_dev(&self) -> f64 {
        self.std_dev
    }

    pub fn log_density(&self, x: f64) -> f64 {
        let d = x - self.mean;
        -0.5 * (LN_2PI + self.variance.ln()) - 0.5 * d * d / self.variance
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        self.mean + self.std_dev * z
    }
}

/// Finite mixture of Gaussians with weights summing to one.
#[derive(Debug, Clone)]
pub struct GaussianMixture1D {
    components: Vec<(f64, Gaussian1D)>,
    log_weights: Vec<f64>,
    picker: WeightedIndex<f64>,
}

impl GaussianMixture1D {
    pub fn new(components: Vec<(f64, Gaussian1D)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParameter(
                "mixture needs at least one component".into(),
            ));
        }
        if let Some((w, _)) = components.iter().find(|(w, _)| !(*w > 0.0 && *w <= 1.0)) {
            return Err(Error::InvalidParameter(format!(
                "mixture weight {w} outside (0, 1]"
            )));
        }
        let total: f64 = components.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "mixture weights sum to {total}, expected 1"
            )));
        }
        let picker = WeightedIndex::new(components.iter().map(|(w, _)| *w))
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        let log_weights = components.iter().map(|(w, _)| w.ln()).collect();
        Ok(Self {
            components,
            log_weights,
            picker,
        })
    }

    /// Mixture giving every component weight `1/J`.
    pub fn equally_weighted(components: Vec<Gaussian1D>) -> Result<Self> {
        let w = 1.0 / components.len().max(1) as f64;
        Self::new(components.into_iter().map(|c| (w, c)).collect())
    }

    pub fn components(&self) -> &[(f64, Gaussian1D)] {
        &self.components
    }

    pub fn mean(&self) -> f64 {
        self.components.iter().map(|(w, c)| w * c.mean()).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.components
            .iter()
            .map(|(w, c)| w * (c.variance() + (c.mean() - m).powi(2)))
            .sum()
    }

    pub fn log_density(&self, x: f64) -> f64 {
        let terms: Vec<f64> = self
            .components
            .iter()
            .zip(&self.log_weights)
            .map(|((_, c), lw)| lw + c.log_density(x))
            .collect();
        log_sum_exp(&terms)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let k = self.picker.sample(rng);
        self.components[k].1.sample(rng)
    }
}

/// A target or proposal density.
#[derive(Debug, Clone)]
pub enum Density {
    Gaussian(Gaussian1D),
    Mixture(GaussianMixture1D),
    /// `Z · base(x)` with `log_z = ln Z`.
    Scaled {
        base: Box<Density>,
        log_z: f64,
    },
}

impl From<Gaussian1D> for Density {
    fn from(g: Gaussian1D) -> Self {
        Density::Gaussian(g)
    }
}

impl From<GaussianMixture1D> for Density {
    fn from(m: GaussianMixture1D) -> Self {
        Density::Mixture(m)
    }
}

impl Density {
    pub fn gaussian(mean: f64, variance: f64) -> Result<Self> {
        Gaussian1D::new(mean, variance).map(Density::Gaussian)
    }

    pub fn scaled(base: Density, log_z: f64) -> Self {
        Density::Scaled {
            base: Box::new(base),
            log_z,
        }
    }

    /// ln of the (possibly unnormalized) density at `x`.
    pub fn log_density(&self, x: f64) -> f64 {
        match self {
            Density::Gaussian(g) => g.log_density(x),
            Density::Mixture(m) => m.log_density(x),
            Density::Scaled { base, log_z } => base.log_density(x) + log_z,
        }
    }

    /// ln Z, zero for the normalized variants.
    pub fn log_normalizer(&self) -> f64 {
        match self {
            Density::Scaled { base, log_z } => base.log_normalizer() + log_z,
            _ => 0.0,
        }
    }

    /// Mean of the normalized density.
    pub fn mean(&self) -> f64 {
        match self {
            Density::Gaussian(g) => g.mean(),
            Density::Mixture(m) => m.mean(),
            Density::Scaled { base, .. } => base.mean(),
        }
    }

    /// Variance of the normalized density.
    pub fn variance(&self) -> f64 {
        match self {
            Density::Gaussian(g) => g.variance(),
            Density::Mixture(m) => m.variance(),
            Density::Scaled { base, .. } => base.variance(),
        }
    }

    /// An interval `[lo, hi]` holding every component's ±`k` standard deviations.
    pub fn window(&self, k: f64) -> (f64, f64) {
        match self {
            Density::Gaussian(g) => (g.mean() - k * g.std_dev(), g.mean() + k * g.std_dev()),
            Density::Mixture(m) => m.components().iter().fold(
                (f64::INFINITY, f64::NEG_INFINITY),
                |(lo, hi), (_, c)| {
                    (
                        lo.min(c.mean() - k * c.std_dev()),
                        hi.max(c.mean() + k * c.std_dev()),
                    )
                },
            ),
            Density::Scaled { base, .. } => base.window(k),
        }
    }

    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Density::Gaussian(g) => g.sample(rng),
            Density::Mixture(m) => m.sample(rng),
            Density::Scaled { base, .. } => base.sample_one(rng),
        }
    }

    /// `n` independent draws.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.sample_one(rng)).collect()
    }
}

/// `E_q[(π/q)²]` for normalized Gaussian target π and proposal q.
///
/// Finite only when `2·σ_q² > σ_π²`; otherwise the weights have infinite
/// variance and [`Error::DivergentSecondMoment`] is returned.
pub fn chi2_gaussian(target: &Gaussian1D, proposal: &Gaussian1D) -> Result<f64> {
    let (st2, sq2) = (target.variance(), proposal.variance());
    let denom = 2.0 * sq2 - st2;
    if denom <= 0.0 {
        return Err(Error::DivergentSecondMoment {
            target_variance: st2,
            proposal_variance: sq2,
        });
    }
    if target == proposal {
        return Ok(1.0);
    }
    let dm = target.mean() - proposal.mean();
    Ok(sq2 / (st2.sqrt() * denom.sqrt()) * (dm * dm / denom).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{simpson, ORACLE_PANELS};
    use crate::rng::stream;

    fn std_pdf(x: f64) -> f64 {
        (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
    }

    fn three_mode() -> GaussianMixture1D {
        GaussianMixture1D::equally_weighted(vec![
            Gaussian1D::new(-3.0, 1.0).unwrap(),
            Gaussian1D::standard(),
            Gaussian1D::new(3.0, 1.0).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn log_density_examples() {
        let half_ln_2pi = 0.5 * (2.0 * std::f64::consts::PI).ln();
        let n01 = Density::from(Gaussian1D::standard());
        assert!((n01.log_density(0.0) + half_ln_2pi).abs() < 1e-15);

        let scaled = Density::scaled(n01.clone(), 2f64.ln());
        assert!((scaled.log_density(0.0) - (2f64.ln() - half_ln_2pi)).abs() < 1e-15);

        let direct = ((std_pdf(3.0) + std_pdf(0.0) + std_pdf(3.0)) / 3.0).ln();
        assert!((Density::from(three_mode()).log_density(0.0) - direct).abs() < 1e-14);
    }

    #[test]
    fn own_mode_density() {
        let g = Gaussian1D::new(1.5, 0.3).unwrap();
        let expected = -0.5 * (2.0 * std::f64::consts::PI * 0.3).ln();
        assert!((g.log_density(1.5) - expected).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Gaussian1D::new(0.0, 0.0).is_err());
        assert!(Gaussian1D::new(0.0, -1.0).is_err());
        assert!(Gaussian1D::new(f64::NAN, 1.0).is_err());
        let g = Gaussian1D::standard();
        assert!(GaussianMixture1D::new(vec![(0.5, g), (0.4, g)]).is_err());
        assert!(GaussianMixture1D::new(vec![(1.2, g), (-0.2, g)]).is_err());
        assert!(GaussianMixture1D::new(vec![]).is_err());
    }

    #[test]
    fn mixture_is_pointwise_convex_combination() {
        let m = GaussianMixture1D::new(vec![
            (0.2, Gaussian1D::new(-1.0, 0.5).unwrap()),
            (0.8, Gaussian1D::new(2.0, 3.0).unwrap()),
        ])
        .unwrap();
        for i in -20..=20 {
            let x = i as f64 * 0.4;
            let direct = 0.2 * Gaussian1D::new(-1.0, 0.5).unwrap().log_density(x).exp()
                + 0.8 * Gaussian1D::new(2.0, 3.0).unwrap().log_density(x).exp();
            assert!((m.log_density(x).exp() - direct).abs() < 1e-15);
        }
    }

    #[test]
    fn densities_integrate_to_their_normalizer() {
        let cases = vec![
            Density::from(Gaussian1D::standard()),
            Density::gaussian(1.0, 4.0).unwrap(),
            Density::from(three_mode()),
            Density::scaled(Density::from(three_mode()), 3.0),
            Density::scaled(Density::gaussian(-2.0, 0.25).unwrap(), -1.5),
        ];
        for d in cases {
            let (lo, hi) = d.window(12.0);
            let z = simpson(|x| d.log_density(x).exp(), lo, hi, ORACLE_PANELS);
            assert!((z - d.log_normalizer().exp()).abs() < 1e-8, "{d:?}: {z}");
        }
    }

    #[test]
    fn sample_moments() {
        let mut rng = stream(11, 0);
        let n = 1_000_000;
        let xs = Density::from(Gaussian1D::standard()).sample(&mut rng, n);
        let mean = xs.iter().sum::<f64>() / n as f64;
        assert!(mean.abs() < 5e-3, "{mean}");

        let xs = Density::from(three_mode()).sample(&mut rng, n);
        let mean = xs.iter().sum::<f64>() / n as f64;
        assert!(mean.abs() < 2e-2, "{mean}");
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!((var - 7.0).abs() < 0.05, "{var}");

        let one = Density::scaled(Density::from(three_mode()), 1.0).sample(&mut rng, 1);
        assert_eq!(one.len(), 1);
        assert!(one[0].is_finite());
    }

    #[test]
    fn scaled_sampler_matches_base() {
        let base = Density::gaussian(0.5, 2.0).unwrap();
        let scaled = Density::scaled(base.clone(), 4.0);
        assert_eq!(
            base.sample(&mut stream(3, 1), 16),
            scaled.sample(&mut stream(3, 1), 16)
        );
    }

    #[test]
    fn chi2_closed_forms() {
        let t = Gaussian1D::standard();
        assert_eq!(chi2_gaussian(&t, &t).unwrap(), 1.0);
        for &mu in &[0.5, 1.0, 2.0] {
            let q = Gaussian1D::new(mu, 1.0).unwrap();
            let v = chi2_gaussian(&t, &q).unwrap();
            assert!((v / (mu * mu).exp() - 1.0).abs() < 1e-14);
        }
        for &s2 in &[0.75, 2.0, 4.0] {
            let q = Gaussian1D::new(0.0, s2).unwrap();
            let v = chi2_gaussian(&t, &q).unwrap();
            assert!((v - s2 / (2.0 * s2 - 1.0_f64).sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn chi2_matches_quadrature() {
        let t = Gaussian1D::standard();
        for &(mu, s2) in &[
            (1.0, 1.0),
            (2.0, 1.0),
            (0.0, 2.0),
            (0.0, 4.0),
            (0.7, 0.6),
            (-1.0, 1.5),
        ] {
            let q = Gaussian1D::new(mu, s2).unwrap();
            let f = |x: f64| (2.0 * t.log_density(x) - q.log_density(x)).exp();
            let quad = simpson(f, -60.0, 60.0, ORACLE_PANELS);
            let closed = chi2_gaussian(&t, &q).unwrap();
            assert!(
                (quad - closed).abs() < 1e-8,
                "mu={mu} s2={s2}: {quad} vs {closed}"
            );
        }
    }

    #[test]
    fn chi2_diverges_for_narrow_proposals() {
        let t = Gaussian1D::standard();
        for &s2 in &[0.5, 0.36, 0.1] {
            let q = Gaussian1D::new(0.0, s2).unwrap();
            assert!(matches!(
                chi2_gaussian(&t, &q),
                Err(Error::DivergentSecondMoment { .. })
            ));
        }
    }
}
