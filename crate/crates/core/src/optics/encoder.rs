//! The optical encoder: two dual-rail photons, a variable-ratio coupler
//! between `f2` and `f3`, post-selection on a click in `f3`, and amplitude
//! filters on `f1` and `f4`.
//!
//! Qubit 1 lives in `f2` (`|0⟩`) and `f1` (`|1⟩`); qubit 2 in `f4` (`|0⟩`) and
//! `f3` (`|1⟩`). After a heralding photon in `f3`, the remaining photon sits
//! in `f4`, `f2` or `f1`, which are the qutrit levels `|0⟩`, `|1⟩`, `|2⟩`.

use std::f64::consts::{FRAC_PI_2, PI};

use super::fock::{apply_attenuator, apply_coupler, CouplerSpec, Fiber, FockState, Mode, ModeOccupation};
use crate::error::{invalid, Error, Result};
use crate::statekit::{BlochAngles, CVector, PureState, C64};

/// Fibers carrying qutrit levels `|0⟩`, `|1⟩`, `|2⟩`.
pub const QUTRIT_FIBERS: [Fiber; 3] = [Fiber::F4, Fiber::F2, Fiber::F1];

const TOL: f64 = 1e-12;

/// Intensity damping factors `(η₁, η₄) = ((R−T)²/R, (R−T)²/T)` that turn
/// the heralded amplitudes into the target qutrit.
pub fn damping_factors(reflectance: f64) -> (f64, f64) {
    let t = 1.0 - reflectance;
    let d = (reflectance - t).powi(2);
    (d / reflectance, d / t)
}

/// Whether both damping factors are physical attenuations.
pub fn filters_feasible(reflectance: f64) -> bool {
    if !(reflectance > 0.0 && reflectance < 1.0) {
        return false;
    }
    let (eta1, eta4) = damping_factors(reflectance);
    eta1 <= 1.0 + TOL && eta4 <= 1.0 + TOL
}

/// `(T−R)²(1 − |β₁|²|α₂|²)`.
pub fn filtered_success_probability(reflectance: f64, q1: &PureState, q2: &PureState) -> f64 {
    let t = 1.0 - reflectance;
    (t - reflectance).powi(2) * (1.0 - q1.amplitude(1).norm_sqr() * q2.amplitude(0).norm_sqr())
}

/// Scans `R` over `(0, 1/2)` with the given step and returns the feasible
/// value maximizing the filtered success factor `(T−R)²`.
pub fn optimal_splitting_ratio(resolution: f64) -> Result<f64> {
    if !(resolution > 0.0 && resolution < 0.5) {
        return Err(invalid("resolution", format!("must lie in (0, 0.5), got {resolution}")));
    }
    let steps = (0.5 / resolution).round() as usize;
    let mut best: Option<(f64, f64)> = None;
    for k in 1..steps {
        let r = 0.5 * k as f64 / steps as f64;
        if !filters_feasible(r) {
            continue;
        }
        let value = (1.0 - 2.0 * r).powi(2);
        if best.is_none_or(|(_, v)| value > v) {
            best = Some((r, value));
        }
    }
    best.map(|(r, _)| r)
        .ok_or_else(|| invalid("resolution", "no feasible ratio on the grid"))
}

/// Dual-rail input `|ψ₁⟩ ⊗ |ψ₂⟩`. The second photon has squared overlap
/// `overlap` with the first in its internal mode; the rest sits in label 1.
pub fn prepare_input(q1: &PureState, q2: &PureState, overlap: f64) -> FockState {
    let photon1 = vec![
        (Mode::new(Fiber::F2), q1.amplitude(0)),
        (Mode::new(Fiber::F1), q1.amplitude(1)),
    ];
    let same = C64::from(overlap.clamp(0.0, 1.0).sqrt());
    let other = C64::from((1.0 - overlap).clamp(0.0, 1.0).sqrt());
    let mut photon2 = Vec::with_capacity(4);
    for (fiber, amp) in [(Fiber::F4, q2.amplitude(0)), (Fiber::F3, q2.amplitude(1))] {
        photon2.push((Mode::labeled(fiber, 0), amp * same));
        if other.re > 0.0 {
            photon2.push((Mode::labeled(fiber, 1), amp * other));
        }
    }
    FockState::from_photons(&[photon1, photon2])
}

/// Exactly one photon in `f3` and one in the qutrit fibers.
pub fn is_heralded(occ: &ModeOccupation) -> bool {
    occ.fiber_count(Fiber::F3) == 1
        && QUTRIT_FIBERS.iter().map(|&f| occ.fiber_count(f)).sum::<u8>() == 1
}

/// Configuration of the encoding stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncoderSetup {
    pub reflectance: f64,
    /// Apply the damping factors on `f1` and `f4`.
    pub filters: bool,
    /// Undo the fixed per-level phases `(i, sgn(R−T), 1)` left by the coupler,
    /// using phase shifters on `f4` and `f2`.
    pub compensate: bool,
}

impl EncoderSetup {
    pub fn new(reflectance: f64, filters: bool) -> Result<Self> {
        let setup = Self {
            reflectance,
            filters,
            compensate: true,
        };
        setup.validate()?;
        Ok(setup)
    }

    pub fn validate(&self) -> Result<()> {
        let r = self.reflectance;
        if !(r > 0.0 && r < 1.0) {
            return Err(invalid("reflectance", format!("must lie in (0, 1), got {r}")));
        }
        if self.filters {
            if (r - 0.5).abs() < TOL {
                return Err(Error::BalancedCoupler);
            }
            let (eta1, eta4) = damping_factors(r);
            for (name, value) in [("eta1", eta1), ("eta4", eta4)] {
                if value > 1.0 + TOL {
                    return Err(Error::InfeasibleDamping {
                        name,
                        value,
                        reflectance: r,
                    });
                }
            }
        }
        Ok(())
    }

    /// Per-level phases applied by the compensation stage.
    pub fn compensation_phases(&self) -> [f64; 3] {
        let r = self.reflectance;
        let sign_phase = if r < 1.0 - r { PI } else { 0.0 };
        [-FRAC_PI_2, sign_phase, 0.0]
    }

    /// Post-selected (unnormalized) two-photon state after the coupler, the
    /// herald, the filters and the compensation. Its squared norm is the
    /// success probability of the encoding stage.
    pub fn herald(&self, q1: &PureState, q2: &PureState, overlap: f64) -> Result<FockState> {
        self.validate()?;
        let coupler = CouplerSpec::new(Fiber::F2, Fiber::F3, self.reflectance)?;
        let mixed = apply_coupler(&prepare_input(q1, q2, overlap), &coupler);
        let mut heralded = mixed.project(is_heralded);
        if self.filters {
            let (eta1, eta4) = damping_factors(self.reflectance);
            heralded = apply_attenuator(&heralded, Fiber::F1, eta1.min(1.0))?.state;
            heralded = apply_attenuator(&heralded, Fiber::F4, eta4.min(1.0))?.state;
        }
        if self.compensate {
            for (fiber, phase) in QUTRIT_FIBERS.iter().zip(self.compensation_phases()) {
                if phase != 0.0 {
                    heralded = heralded.apply_phase(*fiber, phase);
                }
            }
        }
        Ok(heralded)
    }
}

/// Qutrit amplitudes of a heralded state with indistinguishable photons.
/// Terms involving a non-zero internal label are rejected.
pub fn qutrit_amplitudes(heralded: &FockState) -> Result<CVector> {
    let mut amps = CVector::zeros(3);
    for (occ, a) in heralded.terms() {
        if occ.iter().any(|(m, _)| m.label != 0) {
            return Err(invalid("heralded", "state contains distinguishable photons"));
        }
        let level = QUTRIT_FIBERS
            .iter()
            .position(|&f| occ.fiber_count(f) == 1)
            .ok_or_else(|| invalid("heralded", format!("term {occ} outside the qutrit subspace")))?;
        amps[level] += a;
    }
    Ok(amps)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodingSimulation {
    /// Normalized qutrit over `(f4, f2, f1)`; absent when nothing is heralded.
    pub qutrit: Option<PureState>,
    pub success_probability: f64,
    /// Post-selected state including the heralding photon in `f3`.
    pub heralded: FockState,
}

/// Runs the ideal encoder (indistinguishable photons, phase compensation on)
/// for two qubits given by their Bloch angles.
pub fn simulate_encoding(
    q1: BlochAngles,
    q2: BlochAngles,
    reflectance: f64,
    apply_filters: bool,
) -> Result<EncodingSimulation> {
    let setup = EncoderSetup::new(reflectance, apply_filters)?;
    let heralded = setup.herald(&q1.state(), &q2.state(), 1.0)?;
    let success_probability = heralded.norm_sqr();
    let qutrit = PureState::from_vector(qutrit_amplitudes(&heralded)?).ok();
    Ok(EncodingSimulation {
        qutrit,
        success_probability,
        heralded,
    })
}
