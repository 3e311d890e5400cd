//! Slow phase drift of the fiber interferometers.
//!
//! The drift is a Gaussian random walk whose one-second increments have mean
//! absolute value `rate`. Measurement blocks are separated by stabilization
//! cycles that bring the phase back within `residual` of zero.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{invalid, Result};
use crate::statekit::seeded_rng;

/// Time step of sampled trajectories, in seconds.
pub const DEFAULT_STEP: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseDrift {
    /// Mean absolute phase change per second.
    pub rate: f64,
    pub block_duration: f64,
    /// Largest phase offset left after a stabilization cycle.
    pub residual: f64,
}

impl PhaseDrift {
    pub fn new(rate: f64, block_duration: f64) -> Result<Self> {
        if !(rate.is_finite() && rate >= 0.0) {
            return Err(invalid("rate", format!("must be non-negative, got {rate}")));
        }
        if !(block_duration > 0.0) {
            return Err(invalid("block_duration", format!("must be positive, got {block_duration}")));
        }
        Ok(Self {
            rate,
            block_duration,
            residual: 0.0,
        })
    }

    pub fn with_residual(mut self, residual: f64) -> Self {
        self.residual = residual.abs();
        self
    }

    /// Standard deviation of the increment over one second.
    pub fn sigma_per_second(&self) -> f64 {
        self.rate * (std::f64::consts::PI / 2.0).sqrt()
    }

    /// `E[cos φ]` averaged over one block that starts at zero phase.
    pub fn coherence(&self) -> f64 {
        let a = 0.5 * self.sigma_per_second().powi(2);
        let x = a * self.block_duration;
        if x < 1e-12 {
            1.0 - 0.5 * x
        } else {
            (1.0 - (-x).exp()) / x
        }
    }

    fn reset<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.residual > 0.0 {
            rng.random_range(-self.residual..=self.residual)
        } else {
            0.0
        }
    }

    /// Phase at `t = 0, dt, 2dt, …` up to `duration`. A block boundary resets
    /// the phase.
    pub fn trajectory<R: Rng + ?Sized>(&self, duration: f64, dt: f64, rng: &mut R) -> Vec<f64> {
        let steps = (duration / dt).round() as usize;
        let mut phases = Vec::with_capacity(steps + 1);
        if self.rate == 0.0 && self.residual == 0.0 {
            phases.resize(steps + 1, 0.0);
            return phases;
        }
        let step = Normal::new(0.0, self.sigma_per_second() * dt.sqrt()).expect("finite sigma");
        let mut phase = self.reset(rng);
        let mut block = 0;
        phases.push(phase);
        for k in 1..=steps {
            let t = k as f64 * dt;
            let current = (t / self.block_duration + 1e-9).floor() as usize;
            if current != block {
                block = current;
                phase = self.reset(rng);
            } else {
                phase += step.sample(rng);
            }
            phases.push(phase);
        }
        phases
    }
}

/// Drift trajectory sampled every [`DEFAULT_STEP`] seconds, with resets at
/// five-second block boundaries.
pub fn phase_drift_process(duration: f64, rate: f64, seed: u64) -> Result<Vec<f64>> {
    if !(duration.is_finite() && duration >= 0.0) {
        return Err(invalid("duration", format!("must be non-negative, got {duration}")));
    }
    let drift = PhaseDrift::new(rate, 5.0)?;
    Ok(drift.trajectory(duration, DEFAULT_STEP, &mut seeded_rng(seed)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statekit::substream;
    use std::f64::consts::PI;

    #[test]
    fn zero_rate_is_flat() {
        let phases = phase_drift_process(12.0, 0.0, 3).unwrap();
        assert_eq!(phases.len(), 1201);
        assert!(phases.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn mean_absolute_increment_per_second() {
        let drift = PhaseDrift::new(PI / 1000.0, 5.0).unwrap();
        let trials = 10_000;
        let mut sum = 0.0;
        for i in 0..trials {
            let phases = drift.trajectory(1.0, 0.05, &mut substream(11, i));
            sum += (phases.last().unwrap() - phases[0]).abs();
        }
        let mean = sum / trials as f64;
        assert!((mean / (PI / 1000.0) - 1.0).abs() < 0.05, "mean {mean}");
    }

    #[test]
    fn blocks_restart_within_residual() {
        let drift = PhaseDrift::new(0.5, 5.0).unwrap().with_residual(1e-3);
        let phases = drift.trajectory(20.0, 0.1, &mut substream(5, 0));
        for k in [0, 50, 100, 150] {
            assert!(phases[k].abs() <= 1e-3, "t = {}", k as f64 * 0.1);
        }
        assert!(phases[49].abs() > 1e-3);
    }

    #[test]
    fn seeded_trajectories_repeat() {
        let a = phase_drift_process(6.0, 0.01, 42).unwrap();
        let b = phase_drift_process(6.0, 0.01, 42).unwrap();
        let c = phase_drift_process(6.0, 0.01, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn coherence_matches_sampled_average() {
        let drift = PhaseDrift::new(0.3, 5.0).unwrap();
        let mut sum = 0.0;
        let mut count = 0.0;
        for i in 0..2000 {
            let phases = drift.trajectory(5.0, 0.05, &mut substream(8, i));
            for p in &phases[..phases.len() - 1] {
                sum += p.cos();
                count += 1.0;
            }
        }
        assert!((sum / count - drift.coherence()).abs() < 0.01);
        assert_eq!(PhaseDrift::new(0.0, 5.0).unwrap().coherence(), 1.0);
    }
}
