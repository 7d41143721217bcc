use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::gmm::{check_spread, check_weights, select_component};
use crate::error::{Error, Result};

/// Lognormal mixture for communication latency, parameters in log-seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLmm")]
pub struct LmmParams {
    weights: Vec<f64>,
    log_means: Vec<f64>,
    log_stds: Vec<f64>,
}

#[derive(Deserialize)]
struct RawLmm {
    weights: Vec<f64>,
    log_means: Vec<f64>,
    log_stds: Vec<f64>,
}

impl TryFrom<RawLmm> for LmmParams {
    type Error = Error;

    fn try_from(raw: RawLmm) -> Result<Self> {
        LmmParams::new(raw.weights, raw.log_means, raw.log_stds)
    }
}

impl LmmParams {
    pub fn new(weights: Vec<f64>, log_means: Vec<f64>, log_stds: Vec<f64>) -> Result<Self> {
        if weights.len() != log_means.len() || weights.len() != log_stds.len() {
            return Err(Error::invalid("lognormal mixture vectors differ in length"));
        }
        check_weights(&weights)?;
        if log_means.iter().any(|m| !m.is_finite()) {
            return Err(Error::invalid("lognormal log-mean is not finite"));
        }
        check_spread("lognormal log-std", &log_stds)?;
        Ok(Self {
            weights,
            log_means,
            log_stds,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn log_means(&self) -> &[f64] {
        &self.log_means
    }

    pub fn log_stds(&self) -> &[f64] {
        &self.log_stds
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let c = select_component(&self.weights, rng.random::<f64>());
        let z: f64 = StandardNormal.sample(rng);
        (self.log_means[c] + self.log_stds[c] * z).exp()
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n).map(|_| self.draw(rng)).collect()
    }

    /// Mixture density at `x` seconds.
    pub fn pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let ln_x = x.ln();
        self.weights
            .iter()
            .zip(self.log_means.iter().zip(&self.log_stds))
            .map(|(q, (m, s))| {
                let z = (ln_x - m) / s;
                q / (x * s * (2.0 * std::f64::consts::PI).sqrt()) * (-0.5 * z * z).exp()
            })
            .sum()
    }
}

/// `n` latency draws in seconds.
pub fn sample_lmm<R: Rng + ?Sized>(params: &LmmParams, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::invalid("sample count must be at least 1"));
    }
    Ok(params.sample(n, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn samples_are_positive() {
        let p = LmmParams::new(vec![0.3, 0.7], vec![-3.0, 1.0], vec![2.0, 0.8]).unwrap();
        let xs = sample_lmm(&p, 50_000, &mut seeded(11)).unwrap();
        assert!(xs.iter().all(|x| *x > 0.0));
    }

    #[test]
    fn pdf_integrates_to_one() {
        let p = LmmParams::new(vec![0.5, 0.5], vec![-1.0, 0.5], vec![0.4, 0.3]).unwrap();
        let n = 200_000;
        let hi = 20.0;
        let h = hi / n as f64;
        let area: f64 = (0..n).map(|i| p.pdf((i as f64 + 0.5) * h) * h).sum();
        assert!((area - 1.0).abs() < 1e-6, "{area}");
    }

    #[test]
    fn rejects_invalid() {
        assert!(LmmParams::new(vec![1.0], vec![0.0], vec![0.0]).is_err());
        assert!(LmmParams::new(vec![0.9], vec![0.0], vec![1.0]).is_err());
        let p = LmmParams::new(vec![1.0], vec![0.0], vec![1.0]).unwrap();
        assert!(sample_lmm(&p, 0, &mut seeded(0)).is_err());
    }
}
