//! Stochastic primitives: Gaussian and lognormal mixtures, KL divergence
//! against a Gaussian, random-search GMM fitting, exponential recovery times.

mod fit;
mod gmm;
mod lmm;

use rand::Rng;
use rand_distr::{Distribution, Exp};

pub use fit::{fit_gmm_random_search, FitFailure, FitReport, FitTarget, MEAN_TOL_FRACTION, STD_REL_TOL};
pub use gmm::{
    gmm_total_moments, kld_estimate, kld_gmm_vs_gaussian, sample_gmm, GmmParams, KldEstimate, MIN_KLD_SAMPLES,
};
pub use lmm::{sample_lmm, LmmParams};

use crate::error::{Error, Result};

/// GPS recovery-time rate fitted to field data, per second.
pub const GPS_RECOVERY_RATE: f64 = 0.13;

/// `n` exponential draws with the given rate (per second).
pub fn sample_exponential<R: Rng + ?Sized>(rate: f64, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    let dist = exponential(rate)?;
    Ok((0..n).map(|_| dist.sample(rng)).collect())
}

pub(crate) fn exponential(rate: f64) -> Result<Exp<f64>> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::invalid(format!("exponential rate {rate} must be > 0")));
    }
    Exp::new(rate).map_err(|e| Error::invalid(e.to_string()))
}
