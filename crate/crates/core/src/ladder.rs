//! Ladder codes: `N` systems of local dimension `d` packed into one system of
//! dimension `N(d-1) + 1`.
//!
//! Code word `|j⟩` stands for the product basis state obtained by raising the
//! systems one step at a time, starting from the last system, until `j` steps
//! have been taken. For two qubits this is `|00⟩, |01⟩, |11⟩`, the encoder of
//! [`crate::codec`]; for two qutrits it is `|00⟩, |01⟩, |02⟩, |12⟩, |22⟩`.
//! Every other product basis state is filtered out.
//!
//! System `n` is carried by the `d` consecutive code words in which all
//! systems after it are saturated and all systems before it are still in
//! `|0⟩`, so projecting onto that window recovers it perfectly.
//!
//! For more than two qudits (`d > 2`, `N > 2`) this construction is an
//! extrapolation from the two-qubit and two-qutrit instances rather than an
//! independently established code.

use std::ops::Range;

use crate::codec::QubitIndex;
use crate::error::{invalid, Error, Result};
use crate::statekit::{CMatrix, CVector, PovmElement, PureState, QuantumOperation, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LadderCode {
    n_systems: usize,
    d: usize,
    code_dim: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LadderEncoding {
    pub state: PureState,
    pub success_probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LadderDecoding {
    /// The recovered system, absent when the success branch has zero weight.
    pub system: Option<PureState>,
    pub success_probability: f64,
}

impl LadderCode {
    pub fn new(n_systems: usize, d: usize) -> Result<Self> {
        if n_systems == 0 {
            return Err(invalid("n_systems", "need at least one system"));
        }
        if d < 2 {
            return Err(invalid("d", format!("local dimension must be at least 2, got {d}")));
        }
        Ok(Self {
            n_systems,
            d,
            code_dim: n_systems * (d - 1) + 1,
        })
    }

    pub fn qubits(n_systems: usize) -> Result<Self> {
        Self::new(n_systems, 2)
    }

    pub fn n_systems(&self) -> usize {
        self.n_systems
    }

    pub fn local_dim(&self) -> usize {
        self.d
    }

    pub fn code_dim(&self) -> usize {
        self.code_dim
    }

    /// Local levels `(k₁, …, k_N)` of code word `j`.
    pub fn levels(&self, j: usize) -> Vec<usize> {
        assert!(j < self.code_dim);
        let mut remaining = j;
        let mut levels = vec![0; self.n_systems];
        for slot in levels.iter_mut().rev() {
            let step = remaining.min(self.d - 1);
            *slot = step;
            remaining -= step;
        }
        levels
    }

    /// Code words carrying system `n` (1-based).
    pub fn window(&self, n: usize) -> Result<Range<usize>> {
        if n == 0 || n > self.n_systems {
            return Err(Error::IndexOutOfRange {
                index: n,
                max: self.n_systems,
            });
        }
        let start = (self.n_systems - n) * (self.d - 1);
        Ok(start..start + self.d)
    }

    fn product_index(&self, levels: &[usize]) -> usize {
        levels.iter().fold(0, |acc, &k| acc * self.d + k)
    }

    /// The encoder as an operation from the `d^N`-dimensional product space.
    pub fn encoding_operation(&self) -> Result<QuantumOperation> {
        let in_dim = self
            .d
            .checked_pow(self.n_systems as u32)
            .filter(|&n| n <= 1 << 16)
            .ok_or_else(|| invalid("n_systems", "product space too large"))?;
        let mut k = CMatrix::zeros(self.code_dim, in_dim);
        for j in 0..self.code_dim {
            k[(j, self.product_index(&self.levels(j)))] = C64::from(1.0);
        }
        QuantumOperation::new(in_dim, self.code_dim, vec![k])
    }

    pub fn encode(&self, systems: &[PureState]) -> Result<LadderEncoding> {
        if systems.len() != self.n_systems {
            return Err(Error::DimensionMismatch {
                expected: self.n_systems,
                found: systems.len(),
            });
        }
        if let Some(bad) = systems.iter().find(|s| s.dim() != self.d) {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: bad.dim(),
            });
        }
        let amplitudes = CVector::from_fn(self.code_dim, |j, _| {
            self.levels(j)
                .iter()
                .zip(systems)
                .map(|(&k, s)| s.amplitude(k))
                .product()
        });
        let (state, success_probability) =
            PureState::from_unnormalized(amplitudes).map_err(|_| Error::EncodingAlwaysFails)?;
        Ok(LadderEncoding {
            state,
            success_probability,
        })
    }

    /// `{Π₊, Π₋}` for recovering system `n`.
    pub fn decoding_povm(&self, n: usize) -> Result<[PovmElement; 2]> {
        let inside: Vec<usize> = self.window(n)?.collect();
        let outside: Vec<usize> = (0..self.code_dim).filter(|j| !inside.contains(j)).collect();
        Ok([
            PovmElement::projector(self.code_dim, &inside),
            PovmElement::projector(self.code_dim, &outside),
        ])
    }

    pub fn decode(&self, state: &PureState, n: usize) -> Result<LadderDecoding> {
        if state.dim() != self.code_dim {
            return Err(Error::DimensionMismatch {
                expected: self.code_dim,
                found: state.dim(),
            });
        }
        let window = self.window(n)?;
        let [plus, _] = self.decoding_povm(n)?;
        let p = plus.probability(state)?;
        let system = PureState::new(window.map(|j| state.amplitude(j)).collect()).ok();
        let success_probability = if system.is_some() { p } else { 0.0 };
        Ok(LadderDecoding {
            system,
            success_probability,
        })
    }
}

/// Encodes `N` qubits into an `(N+1)`-level system.
pub fn encode_n_qubits(qubits: &[PureState]) -> Result<LadderEncoding> {
    LadderCode::qubits(qubits.len())?.encode(qubits)
}

/// Recovers qubit `n` (1-based) from an `(N+1)`-level ladder state.
pub fn decode_nth_qubit(state: &PureState, n: usize) -> Result<LadderDecoding> {
    LadderCode::qubits(state.dim() - 1)?.decode(state, n)
}

/// Encodes two qutrits into a five-level system.
pub fn encode_two_qutrits(t1: &PureState, t2: &PureState) -> Result<LadderEncoding> {
    LadderCode::new(2, 3)?.encode(&[t1.clone(), t2.clone()])
}

pub fn decode_qutrit(state: &PureState, which: QubitIndex) -> Result<LadderDecoding> {
    LadderCode::new(2, 3)?.decode(state, which.number())
}
