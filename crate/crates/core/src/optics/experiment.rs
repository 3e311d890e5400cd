//! Sweep of input states through encoder and verification, one row per
//! verified state.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::Serialize;

pub use crate::config::{ExperimentConfig, SimulationMode};

use super::drift::PhaseDrift;
use super::encoder::EncoderSetup;
use super::verify::{coincidence_rates, PhaseResponse};
use super::CoincidenceRecord;
use crate::codec::QubitIndex;
use crate::error::Result;
use crate::statekit::{substream, BlochAngles};

/// Drift sampling step inside a shot-noise block, in seconds.
const BLOCK_STEP: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub qubit: u8,
    pub theta_deg: f64,
    pub phi_deg: f64,
    pub partner_theta_deg: f64,
    pub partner_phi_deg: f64,
    /// `C⁺ / (C⁺ + C⁻)`.
    pub fidelity: f64,
    /// Probability per photon pair that encoding and decoding both succeed.
    pub success_probability: f64,
    /// Coincidence rates per second.
    pub c_plus: f64,
    pub c_minus: f64,
    /// Coincidences over all measurement blocks of this point.
    pub counts_plus: f64,
    pub counts_minus: f64,
}

impl ExperimentRow {
    pub const COLUMNS: [&'static str; 11] = [
        "qubit",
        "theta_deg",
        "phi_deg",
        "partner_theta_deg",
        "partner_phi_deg",
        "fidelity",
        "success_probability",
        "c_plus",
        "c_minus",
        "counts_plus",
        "counts_minus",
    ];

    pub fn values(&self) -> [f64; 10] {
        [
            self.theta_deg,
            self.phi_deg,
            self.partner_theta_deg,
            self.partner_phi_deg,
            self.fidelity,
            self.success_probability,
            self.c_plus,
            self.c_minus,
            self.counts_plus,
            self.counts_minus,
        ]
    }
}

#[derive(Debug, Clone, Copy)]
struct Point {
    which: QubitIndex,
    theta: f64,
    phi: f64,
    partner: (f64, f64),
}

fn grid(config: &ExperimentConfig) -> Result<Vec<Point>> {
    let mut points = Vec::new();
    for sweep in &config.sweeps {
        let which = QubitIndex::from_number(sweep.qubit as usize)?;
        let phis = sweep.phi.values()?;
        for theta in sweep.theta.values()? {
            for &phi in &phis {
                points.push(Point {
                    which,
                    theta,
                    phi,
                    partner: (sweep.partner.theta, sweep.partner.phi),
                });
            }
        }
    }
    Ok(points)
}

fn sample_counts<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    Poisson::new(mean).expect("positive mean").sample(rng)
}

fn simulate_point(config: &ExperimentConfig, point: &Point, index: usize) -> Result<ExperimentRow> {
    let params = &config.params;
    let verified = BlochAngles::from_degrees(point.theta, point.phi)?;
    let partner = BlochAngles::from_degrees(point.partner.0, point.partner.1)?;
    let (q1, q2) = match point.which {
        QubitIndex::First => (verified, partner),
        QubitIndex::Second => (partner, verified),
    };
    let setup = EncoderSetup::new(config.reflectance, true)?;
    let heralded = setup.herald(&q1.state(), &q2.state(), params.mode_overlap)?;
    let herald_probability = heralded.norm_sqr();
    let response = PhaseResponse::measure(&heralded, point.which, verified);
    let drift = PhaseDrift::new(params.phase_drift_rate, params.block_duration)?;
    let duration = config.blocks as f64 * params.block_duration;

    let (rates, counts) = match config.mode {
        SimulationMode::Expected => {
            let (p, m) = response.averaged(drift.coherence(), params.mz_visibility);
            let rates = coincidence_rates(p, m, herald_probability, params);
            let counts = CoincidenceRecord {
                c_plus: rates.c_plus * duration,
                c_minus: rates.c_minus * duration,
            };
            (rates, counts)
        }
        SimulationMode::ShotNoise => {
            let mut rng = substream(config.seed, index as u64);
            let mut counts = CoincidenceRecord::default();
            for _ in 0..config.blocks {
                let phases = drift.trajectory(params.block_duration, BLOCK_STEP, &mut rng);
                let n = (phases.len() - 1) as f64;
                let (mut p, mut m) = (0.0, 0.0);
                for &delta in &phases[..phases.len() - 1] {
                    let (dp, dm) = response.at(delta, params.mz_visibility);
                    p += dp / n;
                    m += dm / n;
                }
                let mean = coincidence_rates(p, m, herald_probability, params);
                counts.c_plus += sample_counts(mean.c_plus * params.block_duration, &mut rng);
                counts.c_minus += sample_counts(mean.c_minus * params.block_duration, &mut rng);
            }
            let rates = CoincidenceRecord {
                c_plus: counts.c_plus / duration,
                c_minus: counts.c_minus / duration,
            };
            (rates, counts)
        }
    };

    Ok(ExperimentRow {
        qubit: point.which.number() as u8,
        theta_deg: point.theta,
        phi_deg: point.phi,
        partner_theta_deg: point.partner.0,
        partner_phi_deg: point.partner.1,
        fidelity: counts.fidelity(),
        success_probability: response.plus[0] + response.minus[0],
        c_plus: rates.c_plus,
        c_minus: rates.c_minus,
        counts_plus: counts.c_plus,
        counts_minus: counts.c_minus,
    })
}

/// Runs every sweep of the configuration. Points are simulated in parallel;
/// rows come back in grid order and do not depend on the thread count.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    config.validate()?;
    let points = grid(config)?;
    points
        .par_iter()
        .enumerate()
        .map(|(i, p)| simulate_point(config, p, i))
        .collect()
}
