//! Mach-Zehnder verification of a decoded qubit.
//!
//! Two of the three qutrit fibers are routed into `f5` and `f6`, which are
//! recombined on a coupler preceded by an attenuator and a phase modulator.
//! Together they implement the projection onto a chosen basis state (D1)
//! and its orthogonal complement (D2). A photon left in the third fiber is
//! a decoding failure and never reaches D1 or D2.

use super::drift::PhaseDrift;
use super::fock::{Fiber, FockState, Mode};
use super::{CoincidenceRecord, ImperfectionParams};
use crate::codec::QubitIndex;
use crate::error::Result;
use crate::statekit::{BlochAngles, C64};

/// Fiber routing for verifying one qubit: `(from, to)` pairs plus the
/// fibers carrying qubit `|0⟩` and `|1⟩` after routing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Routing {
    pub routes: [(Fiber, Fiber); 2],
    pub zero_mode: Fiber,
    pub one_mode: Fiber,
}

impl Routing {
    pub fn for_qubit(which: QubitIndex) -> Self {
        match which {
            QubitIndex::First => Self {
                routes: [(Fiber::F1, Fiber::F5), (Fiber::F2, Fiber::F6)],
                zero_mode: Fiber::F6,
                one_mode: Fiber::F5,
            },
            QubitIndex::Second => Self {
                routes: [(Fiber::F2, Fiber::F6), (Fiber::F4, Fiber::F5)],
                zero_mode: Fiber::F5,
                one_mode: Fiber::F6,
            },
        }
    }
}

/// Routes the heralded state into the interferometer and measures it in the
/// basis `{|b⟩, |b⊥⟩}` with an extra phase error `delta` on the `|1⟩` arm.
/// Returns the probabilities of a D3 click together with D1 or D2.
pub fn detection_probabilities(
    heralded: &FockState,
    which: QubitIndex,
    basis: BlochAngles,
    delta: f64,
) -> (f64, f64) {
    let routing = Routing::for_qubit(which);
    let (b0, b1) = (basis.alpha(), basis.beta());
    let drift = C64::from_polar(1.0, delta);
    let routed = heralded.route(&routing.routes);
    let measured = routed.transform(|m| {
        let to = |fiber, a| (Mode::labeled(fiber, m.label), a);
        if m.fiber == routing.zero_mode {
            vec![to(Fiber::D1, b0.conj()), to(Fiber::D2, -b1)]
        } else if m.fiber == routing.one_mode {
            vec![to(Fiber::D1, b1.conj() * drift), to(Fiber::D2, b0 * drift)]
        } else {
            vec![(m, C64::from(1.0))]
        }
    });
    let herald = |o: &super::fock::ModeOccupation| o.fiber_count(Fiber::F3) == 1;
    let p_plus = measured.probability(|o| herald(o) && o.fiber_count(Fiber::D1) == 1);
    let p_minus = measured.probability(|o| herald(o) && o.fiber_count(Fiber::D2) == 1);
    (p_plus, p_minus)
}

/// `p(δ) = a + b cos δ + c sin δ` for each detector, together with the
/// probability that the photon reaches the interferometer at all.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseResponse {
    pub plus: [f64; 3],
    pub minus: [f64; 3],
}

impl PhaseResponse {
    pub fn measure(heralded: &FockState, which: QubitIndex, basis: BlochAngles) -> Self {
        let (p0, m0) = detection_probabilities(heralded, which, basis, 0.0);
        let (pp, mp) = detection_probabilities(heralded, which, basis, std::f64::consts::PI);
        let (ph, mh) = detection_probabilities(heralded, which, basis, std::f64::consts::FRAC_PI_2);
        let fit = |at0: f64, atpi: f64, athalf: f64| {
            let a = 0.5 * (at0 + atpi);
            [a, 0.5 * (at0 - atpi), athalf - a]
        };
        Self {
            plus: fit(p0, pp, ph),
            minus: fit(m0, mp, mh),
        }
    }

    /// Detection probabilities at phase error `delta`, with the fringe
    /// contrast reduced to `visibility`.
    pub fn at(&self, delta: f64, visibility: f64) -> (f64, f64) {
        let eval = |c: &[f64; 3]| c[0] + visibility * (c[1] * delta.cos() + c[2] * delta.sin());
        (eval(&self.plus).max(0.0), eval(&self.minus).max(0.0))
    }

    /// Probabilities averaged over phase errors with `E[cos δ] = coherence`
    /// and `E[sin δ] = 0`.
    pub fn averaged(&self, coherence: f64, visibility: f64) -> (f64, f64) {
        let k = coherence * visibility;
        let eval = |c: &[f64; 3]| (c[0] + k * c[1]).max(0.0);
        (eval(&self.plus), eval(&self.minus))
    }
}

/// Converts per-pair detection probabilities into coincidence rates.
pub fn coincidence_rates(p_plus: f64, p_minus: f64, herald_probability: f64, params: &ImperfectionParams) -> CoincidenceRecord {
    let eta = params.detector_efficiency;
    let singles_d3 = params.pair_rate * eta * herald_probability;
    let accidental = params.accidental_rate(singles_d3);
    CoincidenceRecord {
        c_plus: params.pair_rate * eta * eta * p_plus + accidental,
        c_minus: params.pair_rate * eta * eta * p_minus + accidental,
    }
}

/// Expected D1–D3 and D2–D3 coincidence rates when verifying qubit `which`
/// of the heralded state in the basis containing `basis`. Phase drift is
/// averaged over one measurement block.
pub fn mz_verify(
    heralded: &FockState,
    which: QubitIndex,
    basis: BlochAngles,
    params: &ImperfectionParams,
) -> Result<CoincidenceRecord> {
    params.validate()?;
    let coherence = PhaseDrift::new(params.phase_drift_rate, params.block_duration)?.coherence();
    let response = PhaseResponse::measure(heralded, which, basis);
    let (p_plus, p_minus) = response.averaged(coherence, params.mz_visibility);
    Ok(coincidence_rates(p_plus, p_minus, heralded.norm_sqr(), params))
}
