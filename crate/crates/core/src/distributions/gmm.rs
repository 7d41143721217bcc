use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Gaussian mixture: component weights, means and standard deviations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMixture")]
pub struct GmmParams {
    weights: Vec<f64>,
    means: Vec<f64>,
    stds: Vec<f64>,
}

#[derive(Deserialize)]
struct RawMixture {
    weights: Vec<f64>,
    means: Vec<f64>,
    stds: Vec<f64>,
}

impl TryFrom<RawMixture> for GmmParams {
    type Error = Error;

    fn try_from(raw: RawMixture) -> Result<Self> {
        GmmParams::new(raw.weights, raw.means, raw.stds)
    }
}

pub(crate) fn check_weights(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::invalid("mixture needs at least one component"));
    }
    if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(Error::invalid(format!("mixture weight {w} is negative or non-finite")));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::invalid(format!("mixture weights sum to {sum}, expected 1")));
    }
    Ok(())
}

pub(crate) fn check_spread(name: &str, stds: &[f64]) -> Result<()> {
    match stds.iter().find(|s| !s.is_finite() || **s <= 0.0) {
        Some(s) => Err(Error::invalid(format!("{name} {s} must be finite and > 0"))),
        None => Ok(()),
    }
}

/// Index of the component selected by a uniform draw `u` in [0, 1).
pub(crate) fn select_component(weights: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    // u landed in the rounding gap above the cumulative sum
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

pub(crate) fn normal_ln_pdf(x: f64, mean: f64, std: f64) -> f64 {
    let z = (x - mean) / std;
    -0.5 * z * z - std.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
}

impl GmmParams {
    pub fn new(weights: Vec<f64>, means: Vec<f64>, stds: Vec<f64>) -> Result<Self> {
        if weights.len() != means.len() || weights.len() != stds.len() {
            return Err(Error::invalid(format!(
                "mixture vectors differ in length ({}, {}, {})",
                weights.len(),
                means.len(),
                stds.len()
            )));
        }
        check_weights(&weights)?;
        if let Some(m) = means.iter().find(|m| !m.is_finite()) {
            return Err(Error::invalid(format!("mixture mean {m} is not finite")));
        }
        check_spread("mixture std", &stds)?;
        Ok(Self { weights, means, stds })
    }

    /// Single Gaussian component.
    pub fn gaussian(mean: f64, std: f64) -> Result<Self> {
        Self::new(vec![1.0], vec![mean], vec![std])
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn stds(&self) -> &[f64] {
        &self.stds
    }

    pub fn components(&self) -> usize {
        self.weights.len()
    }

    /// Analytic mixture mean and standard deviation.
    pub fn total_moments(&self) -> (f64, f64) {
        let mean: f64 = self.weights.iter().zip(&self.means).map(|(q, m)| q * m).sum();
        let second: f64 = self
            .weights
            .iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(q, (m, s))| q * (s * s + m * m))
            .sum();
        (mean, (second - mean * mean).max(0.0).sqrt())
    }

    /// One draw: pick a component by weight, then a Gaussian from it.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let c = select_component(&self.weights, rng.random::<f64>());
        let z: f64 = StandardNormal.sample(rng);
        self.means[c] + self.stds[c] * z
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n).map(|_| self.draw(rng)).collect()
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        let terms: Vec<f64> = self
            .weights
            .iter()
            .zip(self.means.iter().zip(&self.stds))
            .filter(|(q, _)| **q > 0.0)
            .map(|(q, (m, s))| q.ln() + normal_ln_pdf(x, *m, *s))
            .collect();
        let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return max;
        }
        max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }
}

/// Total mean and standard deviation of a mixture.
pub fn gmm_total_moments(params: &GmmParams) -> (f64, f64) {
    params.total_moments()
}

/// `n` draws from `params`.
pub fn sample_gmm<R: Rng + ?Sized>(params: &GmmParams, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::invalid("sample count must be at least 1"));
    }
    Ok(params.sample(n, rng))
}

/// Monte Carlo estimate of KL(GMM || Gaussian).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KldEstimate {
    /// Raw sample mean of the log-density ratio (may dip below zero).
    pub raw: f64,
    /// Standard error of `raw`.
    pub std_error: f64,
    pub samples: usize,
}

impl KldEstimate {
    /// Estimate clamped at zero.
    pub fn value(&self) -> f64 {
        self.raw.max(0.0)
    }
}

pub(crate) fn kld_monte_carlo<R: Rng + ?Sized>(
    gmm: &GmmParams,
    ref_mean: f64,
    ref_std: f64,
    n_mc: usize,
    rng: &mut R,
) -> KldEstimate {
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for i in 0..n_mc {
        let x = gmm.draw(rng);
        let d = gmm.ln_pdf(x) - normal_ln_pdf(x, ref_mean, ref_std);
        let delta = d - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (d - mean);
    }
    let var = if n_mc > 1 { m2 / (n_mc - 1) as f64 } else { 0.0 };
    KldEstimate {
        raw: mean,
        std_error: (var / n_mc as f64).sqrt(),
        samples: n_mc,
    }
}

pub const MIN_KLD_SAMPLES: usize = 10_000;

/// KL(GMM || N(ref_mean, ref_std²)) in nats, with its sampling error.
pub fn kld_estimate<R: Rng + ?Sized>(
    gmm: &GmmParams,
    ref_mean: f64,
    ref_std: f64,
    n_mc: usize,
    rng: &mut R,
) -> Result<KldEstimate> {
    if !(ref_std > 0.0 && ref_std.is_finite()) {
        return Err(Error::invalid(format!("reference std {ref_std} must be > 0")));
    }
    if !ref_mean.is_finite() {
        return Err(Error::invalid("reference mean must be finite"));
    }
    if n_mc < MIN_KLD_SAMPLES {
        return Err(Error::invalid(format!(
            "KLD needs at least {MIN_KLD_SAMPLES} Monte Carlo samples, got {n_mc}"
        )));
    }
    Ok(kld_monte_carlo(gmm, ref_mean, ref_std, n_mc, rng))
}

/// Clamped Monte Carlo KLD between a mixture and a reference Gaussian.
pub fn kld_gmm_vs_gaussian<R: Rng + ?Sized>(
    gmm: &GmmParams,
    ref_mean: f64,
    ref_std: f64,
    n_mc: usize,
    rng: &mut R,
) -> Result<f64> {
    kld_estimate(gmm, ref_mean, ref_std, n_mc, rng).map(|e| e.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn single_component_moments() {
        let g = GmmParams::gaussian(0.0, 1.0).unwrap();
        assert_eq!(g.total_moments(), (0.0, 1.0));
    }

    #[test]
    fn symmetric_point_masses_have_unit_variance() {
        let g = GmmParams::new(vec![0.5, 0.5], vec![-1.0, 1.0], vec![1e-9, 1e-9]).unwrap();
        let (m, s) = g.total_moments();
        assert_eq!(m, 0.0);
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_invalid_params() {
        assert!(GmmParams::new(vec![0.5, 0.4], vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(GmmParams::new(vec![1.0], vec![0.0], vec![0.0]).is_err());
        assert!(GmmParams::new(vec![1.5, -0.5], vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(GmmParams::new(vec![1.0], vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(GmmParams::new(vec![], vec![], vec![]).is_err());
    }

    #[test]
    fn deserialize_validates() {
        let bad = r#"{"weights":[0.7],"means":[0.0],"stds":[1.0]}"#;
        assert!(serde_json::from_str::<GmmParams>(bad).is_err());
        let good = r#"{"weights":[1.0],"means":[0.0],"stds":[1.0]}"#;
        assert!(serde_json::from_str::<GmmParams>(good).is_ok());
    }

    #[test]
    fn degenerate_component_pins_samples() {
        let g = GmmParams::gaussian(5.0, 1e-12).unwrap();
        let xs = sample_gmm(&g, 1000, &mut seeded(1)).unwrap();
        assert!(xs.iter().all(|x| (x - 5.0).abs() < 1e-9));
    }

    #[test]
    fn same_seed_same_samples() {
        let g = GmmParams::new(vec![0.2, 0.8], vec![-1.0, 2.0], vec![0.3, 0.5]).unwrap();
        let a = sample_gmm(&g, 500, &mut seeded(9)).unwrap();
        let b = sample_gmm(&g, 500, &mut seeded(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_samples_rejected() {
        let g = GmmParams::gaussian(0.0, 1.0).unwrap();
        assert!(sample_gmm(&g, 0, &mut seeded(0)).is_err());
    }

    #[test]
    fn component_selection_skips_zero_weights() {
        let w = [0.0, 1.0, 0.0];
        for u in [0.0, 0.3, 0.999_999_999] {
            assert_eq!(select_component(&w, u), 1);
        }
    }

    #[test]
    fn kld_exact_match_is_small() {
        let g = GmmParams::gaussian(0.3, 0.02).unwrap();
        let k = kld_gmm_vs_gaussian(&g, 0.3, 0.02, 100_000, &mut seeded(3)).unwrap();
        assert!(k <= 0.005, "{k}");
        assert!(k >= 0.0);
    }

    #[test]
    fn kld_rejects_bad_reference() {
        let g = GmmParams::gaussian(0.0, 1.0).unwrap();
        assert!(kld_gmm_vs_gaussian(&g, 0.0, 0.0, 100_000, &mut seeded(0)).is_err());
        assert!(kld_gmm_vs_gaussian(&g, 0.0, -1.0, 100_000, &mut seeded(0)).is_err());
        assert!(kld_gmm_vs_gaussian(&g, 0.0, 1.0, 10, &mut seeded(0)).is_err());
    }
}
