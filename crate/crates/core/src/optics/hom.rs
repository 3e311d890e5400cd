//! Hong-Ou-Mandel scan on the variable-ratio coupler: one photon enters in
//! `f2`, the other in `f3` with a relative delay, and coincidences between
//! the two outputs are counted.

use super::fock::{apply_coupler, CouplerSpec, Fiber, FockState, Mode};
use super::ImperfectionParams;
use crate::error::{invalid, Result};
use crate::statekit::C64;

/// Squared internal-mode overlap of the two photons at relative delay `tau`.
pub fn temporal_overlap(params: &ImperfectionParams, tau: f64) -> f64 {
    let s = params.coherence_time;
    params.mode_overlap * (-tau * tau / (2.0 * s * s)).exp()
}

/// Probability that the two photons leave the coupler in different fibers.
pub fn coincidence_probability(reflectance: f64, overlap: f64) -> Result<f64> {
    let spec = CouplerSpec::new(Fiber::F2, Fiber::F3, reflectance)?;
    let same = C64::from(overlap.clamp(0.0, 1.0).sqrt());
    let other = C64::from((1.0 - overlap).clamp(0.0, 1.0).sqrt());
    let input = FockState::from_photons(&[
        vec![(Mode::new(Fiber::F2), C64::from(1.0))],
        vec![
            (Mode::labeled(Fiber::F3, 0), same),
            (Mode::labeled(Fiber::F3, 1), other),
        ],
    ]);
    let out = apply_coupler(&input, &spec);
    Ok(out.probability(|o| o.fiber_count(Fiber::F2) == 1 && o.fiber_count(Fiber::F3) == 1))
}

/// `(max − min)/(max + min)` of the dip for full-to-`overlap` interference.
pub fn ideal_visibility(reflectance: f64, overlap: f64) -> f64 {
    let (r, t) = (reflectance, 1.0 - reflectance);
    r * t * overlap / (r * r + t * t - r * t * overlap)
}

/// Mode overlap that produces the given `(max − min)/(max + min)` dip
/// visibility on a coupler with reflectance `reflectance`.
pub fn overlap_for_visibility(reflectance: f64, visibility: f64) -> Result<f64> {
    if !(reflectance > 0.0 && reflectance < 1.0) {
        return Err(invalid("reflectance", format!("must lie in (0, 1), got {reflectance}")));
    }
    let (r, t) = (reflectance, 1.0 - reflectance);
    let v = visibility * (r * r + t * t) / (r * t * (1.0 + visibility));
    if !(0.0..=1.0 + 1e-12).contains(&v) {
        return Err(invalid(
            "visibility",
            format!("{visibility} is not reachable at R = {reflectance}"),
        ));
    }
    Ok(v.min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomPoint {
    pub delay: f64,
    /// Coincidences per second.
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomScan {
    pub reflectance: f64,
    pub points: Vec<HomPoint>,
}

impl HomScan {
    fn extremes(&self) -> (f64, f64) {
        self.points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.rate), hi.max(p.rate))
        })
    }

    /// `(max − min)/(max + min)`.
    pub fn visibility(&self) -> f64 {
        let (lo, hi) = self.extremes();
        if hi + lo == 0.0 {
            return 0.0;
        }
        (hi - lo) / (hi + lo)
    }

    /// `(max − min)/max`.
    pub fn visibility_relative_to_max(&self) -> f64 {
        let (lo, hi) = self.extremes();
        if hi == 0.0 {
            return 0.0;
        }
        (hi - lo) / hi
    }
}

/// Expected coincidence rate between the two coupler outputs as a function
/// of delay. Counts include detector efficiencies and accidentals from dark
/// counts.
pub fn hom_dip_scan(reflectance: f64, delays: &[f64], params: &ImperfectionParams) -> Result<HomScan> {
    params.validate()?;
    if delays.is_empty() {
        return Err(invalid("delays", "at least one delay is required"));
    }
    let eta = params.detector_efficiency;
    let points = delays
        .iter()
        .map(|&delay| {
            let p = coincidence_probability(reflectance, temporal_overlap(params, delay))?;
            // each output fiber sees one photon per pair on average
            let singles = params.pair_rate * eta;
            let rate = params.pair_rate * eta * eta * p + 2.0 * params.accidental_rate(singles);
            Ok(HomPoint { delay, rate })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HomScan { reflectance, points })
}

/// `n` delays evenly spaced over `[-half_width, half_width]`.
pub fn symmetric_delays(half_width: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![0.0];
    }
    (0..n)
        .map(|k| -half_width + 2.0 * half_width * k as f64 / (n - 1) as f64)
        .collect()
}
