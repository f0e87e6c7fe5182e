//! Parameter noise: normal and folded-normal draws, folded-normal moments,
//! and the piecewise-constant replacement process used for stochastic input.
//!
//! Streams come from ChaCha8 seeded through `SeedableRng::seed_from_u64`
//! (PCG32 seed expansion), which is portable across platforms. Normal
//! variates use the ziggurat sampler of `rand_distr::StandardNormal`.

use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::math;

pub type NoiseRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> NoiseRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed for sweep point `index` derived from a base seed, so concurrent
/// sweep points never share a stream.
pub fn point_seed(base: u64, index: usize) -> u64 {
    base ^ index as u64
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma >= 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(alloc::format!(
            "sigma must be non-negative, got {sigma}"
        )))
    }
}

pub fn sample_normal<R: Rng + ?Sized>(mean: f64, sigma: f64, rng: &mut R) -> Result<f64> {
    check_sigma(sigma)?;
    if sigma == 0.0 {
        return Ok(mean);
    }
    let z: f64 = rng.sample(StandardNormal);
    Ok(mean + sigma * z)
}

/// `|X|` with `X ~ N(mean, sigma)`.
pub fn sample_folded_normal<R: Rng + ?Sized>(mean: f64, sigma: f64, rng: &mut R) -> Result<f64> {
    Ok(sample_normal(mean, sigma, rng)?.abs())
}

/// Standard normal CDF, `0.5 * erfc(-x / sqrt 2)`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * math::erfc(-x / core::f64::consts::SQRT_2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoldedNormalMoments {
    pub mean_f: f64,
    pub sigma_f: f64,
}

/// Mean and standard deviation of `|X|`, `X ~ N(mean, sigma)`.
pub fn folded_normal_moments(mean: f64, sigma: f64) -> Result<FoldedNormalMoments> {
    check_sigma(sigma)?;
    if sigma == 0.0 {
        return Ok(FoldedNormalMoments {
            mean_f: mean.abs(),
            sigma_f: 0.0,
        });
    }
    let ratio = mean / sigma;
    let mean_f = core::f64::consts::FRAC_2_SQRT_PI * core::f64::consts::FRAC_1_SQRT_2
        * sigma
        * math::exp(-0.5 * ratio * ratio)
        + mean * (1.0 - 2.0 * normal_cdf(-ratio));
    let var = mean * mean + sigma * sigma - mean_f * mean_f;
    Ok(FoldedNormalMoments {
        mean_f,
        sigma_f: math::sqrt(var.max(0.0)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distribution {
    Normal { mean: f64, sigma: f64 },
    FoldedNormal { mean: f64, sigma: f64 },
}

impl Distribution {
    pub fn mean(&self) -> f64 {
        match *self {
            Distribution::Normal { mean, .. } | Distribution::FoldedNormal { mean, .. } => mean,
        }
    }

    pub fn sigma(&self) -> f64 {
        match *self {
            Distribution::Normal { sigma, .. } | Distribution::FoldedNormal { sigma, .. } => sigma,
        }
    }

    pub fn with_mean(self, mean: f64) -> Self {
        match self {
            Distribution::Normal { sigma, .. } => Distribution::Normal { mean, sigma },
            Distribution::FoldedNormal { sigma, .. } => Distribution::FoldedNormal { mean, sigma },
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Distribution::Normal { .. } => "normal",
            Distribution::FoldedNormal { .. } => "folded-normal",
        }
    }

    /// Expected value of a draw (the folded mean for folded-normal).
    pub fn expected_value(&self) -> Result<f64> {
        match *self {
            Distribution::Normal { mean, sigma } => {
                check_sigma(sigma)?;
                Ok(mean)
            }
            Distribution::FoldedNormal { mean, sigma } => {
                Ok(folded_normal_moments(mean, sigma)?.mean_f)
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        match *self {
            Distribution::Normal { mean, sigma } => sample_normal(mean, sigma, rng),
            Distribution::FoldedNormal { mean, sigma } => sample_folded_normal(mean, sigma, rng),
        }
    }
}

/// Piecewise-constant random replacement of one named parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseProcess {
    pub target: String,
    pub distribution: Distribution,
    pub refresh_interval: f64,
    pub seed: u64,
}

impl NoiseProcess {
    pub fn normal(target: &str, mean: f64, sigma: f64, refresh: f64, seed: u64) -> Self {
        Self {
            target: target.into(),
            distribution: Distribution::Normal { mean, sigma },
            refresh_interval: refresh,
            seed,
        }
    }

    pub fn folded_normal(target: &str, mean: f64, sigma: f64, refresh: f64, seed: u64) -> Self {
        Self {
            target: target.into(),
            distribution: Distribution::FoldedNormal { mean, sigma },
            refresh_interval: refresh,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_sigma(self.distribution.sigma())?;
        if !(self.refresh_interval > 0.0) || !self.refresh_interval.is_finite() {
            return Err(Error::config("noise refresh interval must be positive"));
        }
        Ok(())
    }

    /// Refresh interval snapped to a whole number of steps of size `dt`.
    pub fn refresh_steps(&self, dt: f64) -> Result<usize> {
        self.validate()?;
        if self.refresh_interval < dt * (1.0 - 1e-9) {
            return Err(Error::config(alloc::format!(
                "refresh interval {} shorter than dt {dt}",
                self.refresh_interval
            )));
        }
        Ok((math::round(self.refresh_interval / dt) as usize).max(1))
    }
}

/// Draw stream of a [`NoiseProcess`] on a fixed step grid.
pub struct NoiseStream {
    distribution: Distribution,
    rng: NoiseRng,
    refresh_steps: usize,
}

impl NoiseStream {
    pub fn new(process: &NoiseProcess, dt: f64) -> Result<Self> {
        let refresh_steps = process.refresh_steps(dt)?;
        Ok(Self {
            distribution: process.distribution,
            rng: rng_from_seed(process.seed),
            refresh_steps,
        })
    }

    pub fn refresh_steps(&self) -> usize {
        self.refresh_steps
    }

    pub fn next_value(&mut self) -> f64 {
        // sigma was validated on construction
        self.distribution
            .sample(&mut self.rng)
            .unwrap_or(self.distribution.mean())
    }
}

/// Parameter path that is constant on `[k T, (k+1) T)`, `T` the snapped
/// refresh interval.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSchedule {
    pub interval: f64,
    pub values: Vec<f64>,
}

impl NoiseSchedule {
    pub fn value_at(&self, t: f64) -> Option<f64> {
        if t < 0.0 {
            return None;
        }
        let k = math::floor(t / self.interval * (1.0 + 1e-12)) as usize;
        self.values.get(k).copied()
    }
}

/// The path the integrator applies over `[0, t_end)` with step `dt`: one
/// draw per refresh interval, in stream order.
pub fn noise_schedule(process: &NoiseProcess, t_end: f64, dt: f64) -> Result<NoiseSchedule> {
    if !(dt > 0.0) || !(t_end > 0.0) {
        return Err(Error::config("dt and t_end must be positive"));
    }
    let mut stream = NoiseStream::new(process, dt)?;
    let steps = math::floor(t_end / dt * (1.0 + 1e-12)) as usize;
    let r = stream.refresh_steps();
    let draws = steps.div_ceil(r);
    let values = (0..draws).map(|_| stream.next_value()).collect();
    Ok(NoiseSchedule {
        interval: r as f64 * dt,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_sigma_is_degenerate() {
        let mut rng = rng_from_seed(1);
        assert_eq!(sample_normal(3.0, 0.0, &mut rng).unwrap(), 3.0);
        assert_eq!(sample_folded_normal(0.07, 0.0, &mut rng).unwrap(), 0.07);
        let m = folded_normal_moments(0.07, 0.0).unwrap();
        assert_eq!(m.mean_f, 0.07);
        assert_eq!(m.sigma_f, 0.0);
    }

    #[test]
    fn negative_sigma_rejected() {
        let mut rng = rng_from_seed(1);
        assert!(sample_normal(0.0, -1.0, &mut rng).is_err());
        assert!(sample_folded_normal(0.0, -1.0, &mut rng).is_err());
        assert!(folded_normal_moments(0.0, -1.0).is_err());
    }

    #[test]
    fn fixed_seed_replays_stream() {
        let draw = |seed| {
            let mut rng = rng_from_seed(seed);
            (0..100)
                .map(|_| sample_normal(0.0, 1.0, &mut rng).unwrap().to_bits())
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(42), draw(42));
        assert_ne!(draw(42), draw(43));
    }

    #[test]
    fn half_normal_moments() {
        let m = folded_normal_moments(0.0, 1.0).unwrap();
        let two_over_pi = 2.0 / core::f64::consts::PI;
        assert!((m.mean_f - libm::sqrt(two_over_pi)).abs() < 1e-15);
        assert!((m.sigma_f - libm::sqrt(1.0 - two_over_pi)).abs() < 1e-15);
    }

    #[test]
    fn folded_mean_is_symmetric_in_mean() {
        let a = folded_normal_moments(0.3, 0.2).unwrap();
        let b = folded_normal_moments(-0.3, 0.2).unwrap();
        assert!((a.mean_f - b.mean_f).abs() < 1e-15);
        assert!((a.sigma_f - b.sigma_f).abs() < 1e-15);
    }

    #[test]
    fn cdf_reference_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        // mpmath: ncdf(1.75), ncdf(-3)
        assert!((normal_cdf(1.75) - 0.959940843136183).abs() < 1e-14);
        assert!((normal_cdf(-3.0) - 0.00134989803163009).abs() < 1e-16);
    }

    #[test]
    fn schedule_counts_draws() {
        let p = NoiseProcess::folded_normal("kc", 0.07, 0.04, 1000.0, 5);
        let s = noise_schedule(&p, 5000.0, 0.05).unwrap();
        assert_eq!(s.values.len(), 5);
        assert!(s.values.iter().all(|v| *v >= 0.0));
        assert_eq!(s.value_at(999.9), Some(s.values[0]));
        assert_eq!(s.value_at(1000.0), Some(s.values[1]));
    }

    #[test]
    fn schedule_per_step_refresh() {
        let p = NoiseProcess::normal("J", 0.5, 10.0, 0.001, 9);
        let s = noise_schedule(&p, 1.0, 0.001).unwrap();
        assert_eq!(s.values.len(), 1000);
        assert!((s.interval - 0.001).abs() < 1e-18);
    }

    #[test]
    fn schedule_constant_when_sigma_zero() {
        let p = NoiseProcess::normal("J", 0.25, 0.0, 0.1, 9);
        let s = noise_schedule(&p, 10.0, 0.01).unwrap();
        assert!(s.values.iter().all(|v| *v == 0.25));
    }

    #[test]
    fn refresh_shorter_than_dt_rejected() {
        let p = NoiseProcess::normal("J", 0.0, 1.0, 0.001, 1);
        assert!(noise_schedule(&p, 1.0, 0.01).is_err());
    }

    #[test]
    fn refresh_is_snapped_to_grid() {
        let p = NoiseProcess::normal("J", 0.0, 1.0, 0.0123, 1);
        assert_eq!(p.refresh_steps(0.001).unwrap(), 12);
    }
}
