//! Few-photon Fock states over named fiber modes.
//!
//! A state is a sparse map from occupation patterns to amplitudes. Linear
//! optical elements act on creation operators, so every element is applied
//! by expanding each term as a monomial in creation operators, substituting
//! the element's single-photon map and collecting terms again. Multi-photon
//! interference falls out of the amplitude algebra.
//!
//! Each mode carries an internal label on top of the fiber so that partially
//! distinguishable photons can be modeled: photons with different labels
//! never interfere.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::statekit::C64;

/// Fibers of the setup plus the two output ports of the measurement coupler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Fiber {
    F1,
    F2,
    F3,
    F4,
    F5,
    F6,
    /// Port of the measurement coupler monitored by detector D1.
    D1,
    /// Port of the measurement coupler monitored by detector D2.
    D2,
}

impl Fiber {
    pub const ALL: [Fiber; 8] = [
        Fiber::F1,
        Fiber::F2,
        Fiber::F3,
        Fiber::F4,
        Fiber::F5,
        Fiber::F6,
        Fiber::D1,
        Fiber::D2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Fiber::F1 => "f1",
            Fiber::F2 => "f2",
            Fiber::F3 => "f3",
            Fiber::F4 => "f4",
            Fiber::F5 => "f5",
            Fiber::F6 => "f6",
            Fiber::D1 => "d1",
            Fiber::D2 => "d2",
        }
    }
}

impl fmt::Display for Fiber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Fiber {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Fiber::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownMode(s.to_string()))
    }
}

/// A fiber together with an internal (temporal) mode label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mode {
    pub fiber: Fiber,
    pub label: u8,
}

impl Mode {
    pub fn new(fiber: Fiber) -> Self {
        Self { fiber, label: 0 }
    }

    pub fn labeled(fiber: Fiber, label: u8) -> Self {
        Self { fiber, label }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.label {
            0 => write!(f, "{}", self.fiber),
            l => write!(f, "{}#{}", self.fiber, l),
        }
    }
}

/// Photon numbers per mode. Modes with zero photons are not stored.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeOccupation {
    counts: BTreeMap<Mode, u8>,
}

impl ModeOccupation {
    pub fn vacuum() -> Self {
        Self::default()
    }

    pub fn from_modes(modes: &[Mode]) -> Self {
        let mut occ = Self::default();
        for &m in modes {
            *occ.counts.entry(m).or_insert(0) += 1;
        }
        occ
    }

    pub fn count(&self, mode: Mode) -> u8 {
        self.counts.get(&mode).copied().unwrap_or(0)
    }

    /// Photons in a fiber, summed over internal labels.
    pub fn fiber_count(&self, fiber: Fiber) -> u8 {
        self.counts
            .iter()
            .filter(|(m, _)| m.fiber == fiber)
            .map(|(_, &n)| n)
            .sum()
    }

    pub fn total(&self) -> u8 {
        self.counts.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Mode, u8)> + '_ {
        self.counts.iter().map(|(&m, &n)| (m, n))
    }

    /// Creation operators as a sorted multiset of modes.
    fn monomial(&self) -> Vec<Mode> {
        self.counts
            .iter()
            .flat_map(|(&m, &n)| std::iter::repeat_n(m, n as usize))
            .collect()
    }

    /// `Π nₖ!`
    fn factorial_product(&self) -> f64 {
        self.counts
            .values()
            .map(|&n| (1..=n as u32).product::<u32>() as f64)
            .product()
    }
}

impl fmt::Display for ModeOccupation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("|")?;
        for (i, (m, n)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{m}:{n}")?;
        }
        f.write_str("⟩")
    }
}

/// Sparse superposition of occupation patterns. Need not be normalized:
/// after post-selection or loss its squared norm is the branch probability.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FockState {
    terms: BTreeMap<ModeOccupation, C64>,
}

/// Amplitudes below this magnitude are dropped after each element.
const PRUNE: f64 = 1e-300;

impl FockState {
    pub fn vacuum() -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(ModeOccupation::vacuum(), C64::from(1.0));
        Self { terms }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (ModeOccupation, C64)>) -> Self {
        let mut state = Self::default();
        for (occ, amp) in terms {
            *state.terms.entry(occ).or_insert(C64::from(0.0)) += amp;
        }
        state.prune();
        state
    }

    /// Creates one photon per entry of `photons` on top of the vacuum; each
    /// photon is a superposition over modes given as `(mode, amplitude)`.
    pub fn from_photons(photons: &[Vec<(Mode, C64)>]) -> Self {
        let mut poly: BTreeMap<Vec<Mode>, C64> = BTreeMap::new();
        poly.insert(Vec::new(), C64::from(1.0));
        for photon in photons {
            let mut next = BTreeMap::new();
            for (mono, coeff) in &poly {
                for &(mode, amp) in photon {
                    let mut grown = mono.clone();
                    let at = grown.partition_point(|m| *m <= mode);
                    grown.insert(at, mode);
                    *next.entry(grown).or_insert(C64::from(0.0)) += coeff * amp;
                }
            }
            poly = next;
        }
        Self::from_polynomial(poly)
    }

    fn from_polynomial(poly: BTreeMap<Vec<Mode>, C64>) -> Self {
        Self::from_terms(poly.into_iter().map(|(mono, coeff)| {
            let occ = ModeOccupation::from_modes(&mono);
            let scale = occ.factorial_product().sqrt();
            (occ, coeff * scale)
        }))
    }

    fn prune(&mut self) {
        self.terms.retain(|_, a| a.norm() > PRUNE);
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ModeOccupation, C64)> {
        self.terms.iter().map(|(o, &a)| (o, a))
    }

    pub fn amplitude(&self, occ: &ModeOccupation) -> C64 {
        self.terms.get(occ).copied().unwrap_or(C64::from(0.0))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn max_photons(&self) -> u8 {
        self.terms.keys().map(|o| o.total()).max().unwrap_or(0)
    }

    /// Total weight of the terms matching `predicate`.
    pub fn probability(&self, predicate: impl Fn(&ModeOccupation) -> bool) -> f64 {
        self.terms
            .iter()
            .filter(|(o, _)| predicate(o))
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Keeps only the terms matching `predicate` (unnormalized).
    pub fn project(&self, predicate: impl Fn(&ModeOccupation) -> bool) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|(o, _)| predicate(o))
                .map(|(o, &a)| (o.clone(), a))
                .collect(),
        }
    }

    pub fn scaled(&self, factor: C64) -> Self {
        let mut out = self.clone();
        for a in out.terms.values_mut() {
            *a *= factor;
        }
        out.prune();
        out
    }

    /// Applies a linear map on creation operators: every photon in mode `m`
    /// is replaced by the superposition `map(m)`.
    pub fn transform(&self, map: impl Fn(Mode) -> Vec<(Mode, C64)>) -> Self {
        let mut poly: BTreeMap<Vec<Mode>, C64> = BTreeMap::new();
        for (occ, amp) in &self.terms {
            let coeff = amp / occ.factorial_product().sqrt();
            let mut partial: BTreeMap<Vec<Mode>, C64> = BTreeMap::new();
            partial.insert(Vec::new(), coeff);
            for mode in occ.monomial() {
                let image = map(mode);
                let mut next = BTreeMap::new();
                for (mono, c) in &partial {
                    for &(out, a) in &image {
                        let mut grown = mono.clone();
                        let at = grown.partition_point(|m| *m <= out);
                        grown.insert(at, out);
                        *next.entry(grown).or_insert(C64::from(0.0)) += c * a;
                    }
                }
                partial = next;
            }
            for (mono, c) in partial {
                *poly.entry(mono).or_insert(C64::from(0.0)) += c;
            }
        }
        Self::from_polynomial(poly)
    }

    /// Moves every photon of fiber `from` into fiber `to`, keeping labels.
    pub fn route(&self, routes: &[(Fiber, Fiber)]) -> Self {
        self.transform(|m| {
            let fiber = routes
                .iter()
                .find(|(from, _)| *from == m.fiber)
                .map_or(m.fiber, |&(_, to)| to);
            vec![(Mode::labeled(fiber, m.label), C64::from(1.0))]
        })
    }

    /// Phase shifter on one fiber.
    pub fn apply_phase(&self, fiber: Fiber, phase: f64) -> Self {
        let factor = C64::from_polar(1.0, phase);
        self.transform(|m| {
            let a = if m.fiber == fiber { factor } else { C64::from(1.0) };
            vec![(m, a)]
        })
    }
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (occ, a)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({:.6}{:+.6}i){}", a.re, a.im, occ)?;
        }
        Ok(())
    }
}

/// Two-mode fiber coupler with reflectance `R` and transmittance `1 - R`.
///
/// Convention: a photon entering either port stays in it with amplitude
/// `√R` and crosses with amplitude `i√T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplerSpec {
    pub mode_a: Fiber,
    pub mode_b: Fiber,
    pub reflectance: f64,
}

impl CouplerSpec {
    pub fn new(mode_a: Fiber, mode_b: Fiber, reflectance: f64) -> Result<Self> {
        if mode_a == mode_b {
            return Err(crate::error::invalid("mode_b", "coupler needs two distinct modes"));
        }
        if !(0.0..=1.0).contains(&reflectance) {
            return Err(crate::error::invalid(
                "reflectance",
                format!("must lie in [0, 1], got {reflectance}"),
            ));
        }
        Ok(Self {
            mode_a,
            mode_b,
            reflectance,
        })
    }

    /// Builds a coupler from mode names such as `"f2"`.
    pub fn between(mode_a: &str, mode_b: &str, reflectance: f64) -> Result<Self> {
        Self::new(mode_a.parse()?, mode_b.parse()?, reflectance)
    }

    pub fn transmittance(&self) -> f64 {
        1.0 - self.reflectance
    }

    /// Single-photon transfer matrix on `(mode_a, mode_b)`; column `k` is the
    /// image of input port `k`.
    pub fn transfer_matrix(&self) -> [[C64; 2]; 2] {
        let r = C64::from(self.reflectance.sqrt());
        let t = C64::new(0.0, self.transmittance().sqrt());
        [[r, t], [t, r]]
    }
}

pub fn apply_coupler(state: &FockState, spec: &CouplerSpec) -> FockState {
    let u = spec.transfer_matrix();
    state.transform(|m| {
        let port = if m.fiber == spec.mode_a {
            0
        } else if m.fiber == spec.mode_b {
            1
        } else {
            return vec![(m, C64::from(1.0))];
        };
        vec![
            (Mode::labeled(spec.mode_a, m.label), u[0][port]),
            (Mode::labeled(spec.mode_b, m.label), u[1][port]),
        ]
    })
}

/// Result of passing a state through an attenuator.
#[derive(Debug, Clone, PartialEq)]
pub struct Attenuated {
    /// Branch in which no photon was absorbed.
    pub state: FockState,
    /// Weight of the branches in which at least one photon was absorbed.
    pub lost_probability: f64,
}

/// Attenuator with intensity transmission `eta` on one fiber. Absorbed
/// photons end up in a loss mode that is traced out, which leaves the
/// no-loss branch scaled by `√eta` per photon in the fiber.
pub fn apply_attenuator(state: &FockState, fiber: Fiber, eta: f64) -> Result<Attenuated> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(crate::error::invalid(
            "eta",
            format!("transmission must lie in [0, 1], got {eta}"),
        ));
    }
    let amp = C64::from(eta.sqrt());
    let survived = state.transform(|m| {
        let a = if m.fiber == fiber { amp } else { C64::from(1.0) };
        vec![(m, a)]
    });
    let lost_probability = (state.norm_sqr() - survived.norm_sqr()).max(0.0);
    Ok(Attenuated {
        state: survived,
        lost_probability,
    })
}
