//! Fock-space model of the two-photon encoding setup: dual-rail sources,
//! the variable-ratio coupler with a heralding detector, amplitude filters,
//! the HOM alignment scan and the Mach-Zehnder verification stage.

pub mod drift;
pub mod encoder;
pub mod experiment;
pub mod fock;
pub mod hom;
pub mod verify;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub use drift::{phase_drift_process, PhaseDrift};
pub use encoder::{
    damping_factors, optimal_splitting_ratio, prepare_input, simulate_encoding, EncoderSetup,
    EncodingSimulation,
};
pub use experiment::{run_experiment, ExperimentConfig, ExperimentRow, SimulationMode};
pub use fock::{apply_attenuator, apply_coupler, CouplerSpec, Fiber, FockState, Mode, ModeOccupation};
pub use hom::{hom_dip_scan, overlap_for_visibility, HomPoint, HomScan};
pub use verify::{mz_verify, PhaseResponse};

/// Source, detector and interferometer imperfections.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImperfectionParams {
    /// Squared overlap of the internal modes of the two photons (1 = ideal).
    pub mode_overlap: f64,
    /// Mean absolute phase change per second of the interferometers (rad/s).
    pub phase_drift_rate: f64,
    pub detector_efficiency: f64,
    /// Dark counts per second of each detector.
    pub dark_count_rate: f64,
    /// Coincidence window in seconds.
    pub coincidence_window: f64,
    /// Classical fringe visibility of the verification interferometer.
    #[serde(default = "one")]
    pub mz_visibility: f64,
    /// Photon pairs per second leaving the source.
    #[serde(default = "default_pair_rate")]
    pub pair_rate: f64,
    /// RMS width of the HOM dip in delay units (seconds).
    #[serde(default = "default_coherence_time")]
    pub coherence_time: f64,
    /// Length of a measurement block between two stabilization cycles.
    #[serde(default = "default_block")]
    pub block_duration: f64,
}

fn one() -> f64 {
    1.0
}

fn default_pair_rate() -> f64 {
    2.0e4
}

fn default_coherence_time() -> f64 {
    1.0e-13
}

fn default_block() -> f64 {
    5.0
}

impl ImperfectionParams {
    pub fn ideal() -> Self {
        Self {
            mode_overlap: 1.0,
            phase_drift_rate: 0.0,
            detector_efficiency: 1.0,
            dark_count_rate: 0.0,
            coincidence_window: 2.0e-9,
            mz_visibility: 1.0,
            pair_rate: default_pair_rate(),
            coherence_time: default_coherence_time(),
            block_duration: default_block(),
        }
    }

    /// Values representative of the fiber setup: 98 % HOM visibility on a
    /// balanced coupler, π/1000 rad/s drift, 60 % detectors with 50 dark
    /// counts per second, a 2 ns window and a 97 % interferometer.
    pub fn lab() -> Self {
        Self {
            mode_overlap: hom::overlap_for_visibility(0.5, 0.98).expect("valid visibility"),
            phase_drift_rate: std::f64::consts::PI / 1000.0,
            detector_efficiency: 0.6,
            dark_count_rate: 50.0,
            coincidence_window: 2.0e-9,
            mz_visibility: 0.97,
            pair_rate: default_pair_rate(),
            coherence_time: default_coherence_time(),
            block_duration: default_block(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = [
            ("mode_overlap", self.mode_overlap),
            ("detector_efficiency", self.detector_efficiency),
            ("mz_visibility", self.mz_visibility),
        ];
        for (name, v) in unit {
            if !(0.0..=1.0).contains(&v) {
                return Err(invalid(name, format!("must lie in [0, 1], got {v}")));
            }
        }
        let nonneg = [
            ("phase_drift_rate", self.phase_drift_rate),
            ("dark_count_rate", self.dark_count_rate),
            ("coincidence_window", self.coincidence_window),
            ("pair_rate", self.pair_rate),
        ];
        for (name, v) in nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(name, format!("must be finite and non-negative, got {v}")));
            }
        }
        for (name, v) in [("coherence_time", self.coherence_time), ("block_duration", self.block_duration)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Accidental coincidences per second between a detector with the given
    /// singles rate and dark counts in a partner detector.
    pub fn accidental_rate(&self, singles: f64) -> f64 {
        self.dark_count_rate * singles * self.coincidence_window
    }
}

impl Default for ImperfectionParams {
    fn default() -> Self {
        Self::ideal()
    }
}

/// Coincidence rates D1–D3 (`c_plus`) and D2–D3 (`c_minus`), per second or
/// as total counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceRecord {
    pub c_plus: f64,
    pub c_minus: f64,
}

impl CoincidenceRecord {
    /// `C⁺ / (C⁺ + C⁻)`; NaN when no coincidences were recorded.
    pub fn fidelity(&self) -> f64 {
        self.c_plus / (self.c_plus + self.c_minus)
    }

    pub fn total(&self) -> f64 {
        self.c_plus + self.c_minus
    }
}
