//! Probabilistic encoding of two qubits into one qutrit.
//!
//! The encoder keeps `|00⟩ → |0⟩`, `|01⟩ → |1⟩`, `|11⟩ → |2⟩` and filters out
//! `|10⟩`. Either qubit can then be recovered perfectly by projecting the
//! qutrit onto a two-dimensional subspace, or both can be recovered
//! approximately by the joint decoder
//! `|0⟩ → |00⟩/√2`, `|1⟩ → |01⟩`, `|2⟩ → |11⟩/√2`.

use std::f64::consts::SQRT_2;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::statekit::{
    c, fidelity, kron_vec, partial_trace, sample_bloch_uniform, substream, BlochAngles, CMatrix,
    DensityMatrix, Keep, PovmElement, PureState, QuantumOperation, C64,
};
use crate::stats::{MeanAccumulator, RatioAccumulator};

/// Average fidelity of the optimal symmetric joint decoder, `(4 + √2)/6`.
pub fn optimal_joint_fidelity() -> f64 {
    (4.0 + SQRT_2) / 6.0
}

/// Which of the two encoded qubits to act on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QubitIndex {
    First,
    Second,
}

impl QubitIndex {
    pub fn from_number(n: usize) -> Result<Self> {
        match n {
            1 => Ok(Self::First),
            2 => Ok(Self::Second),
            _ => Err(Error::IndexOutOfRange { index: n, max: 2 }),
        }
    }

    pub fn number(self) -> usize {
        match self {
            Self::First => 1,
            Self::Second => 2,
        }
    }

    /// Qutrit levels carrying this qubit's `|0⟩` and `|1⟩`.
    pub fn levels(self) -> [usize; 2] {
        match self {
            Self::First => [1, 2],
            Self::Second => [0, 1],
        }
    }
}

fn matrix_from_entries(rows: usize, cols: usize, entries: &[(usize, usize, f64)]) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols);
    for &(r, col, v) in entries {
        m[(r, col)] = C64::from(v);
    }
    m
}

/// The encoding map from two qubits (dimension 4) to a qutrit.
pub fn encoding_operation() -> QuantumOperation {
    let k = matrix_from_entries(3, 4, &[(0, 0, 1.0), (1, 1, 1.0), (2, 3, 1.0)]);
    QuantumOperation::new(4, 3, vec![k]).expect("encoder is a partial isometry")
}

/// The optimal joint decoder from a qutrit to two qubits.
pub fn joint_decoding_operation() -> QuantumOperation {
    let h = SQRT_2.recip();
    let k = matrix_from_entries(4, 3, &[(0, 0, h), (1, 1, 1.0), (3, 2, h)]);
    QuantumOperation::new(3, 4, vec![k]).expect("decoder is trace-non-increasing")
}

/// `{Π₊, Π₋}` for decoding `which`.
pub fn decoding_povm(which: QubitIndex) -> [PovmElement; 2] {
    let plus = PovmElement::projector(3, &which.levels());
    let minus = match which {
        QubitIndex::First => PovmElement::projector(3, &[0]),
        QubitIndex::Second => PovmElement::projector(3, &[2]),
    };
    [plus, minus]
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodeResult {
    pub qutrit: PureState,
    /// `1 - |β₁|²|α₂|²`.
    pub success_probability: f64,
}

fn check_qubit(state: &PureState) -> Result<()> {
    if state.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: state.dim(),
        });
    }
    Ok(())
}

pub fn encode(q1: &PureState, q2: &PureState) -> Result<EncodeResult> {
    check_qubit(q1)?;
    check_qubit(q2)?;
    let product = kron_vec(q1.as_vector(), q2.as_vector());
    let image = encoding_operation().images(&product)?.remove(0);
    let (qutrit, success_probability) =
        PureState::from_unnormalized(image).map_err(|_| Error::EncodingAlwaysFails)?;
    Ok(EncodeResult {
        qutrit,
        success_probability,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingleDecode {
    /// Recovered qubit, absent when the success branch has zero probability.
    pub qubit: Option<PureState>,
    pub success_probability: f64,
}

/// Projects onto the subspace carrying `which` and relabels the two levels
/// onto the qubit basis.
pub fn decode_single(qutrit: &PureState, which: QubitIndex) -> Result<SingleDecode> {
    if qutrit.dim() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            found: qutrit.dim(),
        });
    }
    let [plus, _] = decoding_povm(which);
    let success_probability = plus.probability(qutrit)?;
    let [lo, hi] = which.levels();
    let qubit = PureState::new(vec![qutrit.amplitude(lo), qutrit.amplitude(hi)]).ok();
    let success_probability = if qubit.is_some() { success_probability } else { 0.0 };
    Ok(SingleDecode {
        qubit,
        success_probability,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointDecodeResult {
    pub two_qubit_state: PureState,
    pub success_probability: f64,
    /// Reduced states of qubit 1 and qubit 2.
    pub per_qubit_states: [DensityMatrix; 2],
}

pub fn decode_joint(qutrit: &PureState) -> Result<JointDecodeResult> {
    let image = joint_decoding_operation().images(qutrit.as_vector())?.remove(0);
    // at least half of any normalized qutrit survives
    let (two_qubit_state, success_probability) = PureState::from_unnormalized(image)?;
    let rho = two_qubit_state.to_density();
    let first = partial_trace(&rho, (2, 2), Keep::First)?;
    let second = partial_trace(&rho, (2, 2), Keep::Second)?;
    Ok(JointDecodeResult {
        two_qubit_state,
        success_probability,
        per_qubit_states: [first, second],
    })
}

/// Joint encode-and-decode success probability for a fixed first qubit at
/// polar angle `theta`, averaged over the second qubit.
pub fn p1_analytic(theta: f64) -> f64 {
    0.25 + 0.5 * (theta / 2.0).cos().powi(2)
}

/// Success-weighted fidelity of qubit 1 after joint decoding, for a fixed
/// first qubit at polar angle `theta`, averaged over the second qubit.
pub fn f1_analytic(theta: f64) -> f64 {
    let c2 = (theta / 2.0).cos().powi(2);
    let num = 1.0 + 2.0 * c2 * c2 + (SQRT_2 - 1.0) / 2.0 * theta.sin().powi(2);
    num / (1.0 + 2.0 * c2)
}

/// Per-sample quantities of the full pipeline for one input pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairOutcome {
    pub encode_probability: f64,
    /// Encoding times single-qubit decoding success, per qubit.
    pub single_probability: [f64; 2],
    /// Encoding times joint decoding success.
    pub joint_probability: f64,
    /// Fidelity of each jointly decoded qubit, conditioned on success.
    pub joint_fidelity: [f64; 2],
}

pub fn evaluate_pair(q1: &PureState, q2: &PureState) -> Result<PairOutcome> {
    let encoded = match encode(q1, q2) {
        Ok(e) => e,
        Err(Error::EncodingAlwaysFails) => {
            return Ok(PairOutcome {
                encode_probability: 0.0,
                single_probability: [0.0; 2],
                joint_probability: 0.0,
                joint_fidelity: [0.0; 2],
            })
        }
        Err(e) => return Err(e),
    };
    let n = encoded.success_probability;
    let d1 = decode_single(&encoded.qutrit, QubitIndex::First)?;
    let d2 = decode_single(&encoded.qutrit, QubitIndex::Second)?;
    let joint = decode_joint(&encoded.qutrit)?;
    Ok(PairOutcome {
        encode_probability: n,
        single_probability: [n * d1.success_probability, n * d2.success_probability],
        joint_probability: n * joint.success_probability,
        joint_fidelity: [
            fidelity(q1, &joint.per_qubit_states[0])?,
            fidelity(q2, &joint.per_qubit_states[1])?,
        ],
    })
}

/// Monte Carlo averages over Bloch-uniform input pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AveragePerformance {
    pub samples: usize,
    /// Average encode + single-decode success probability, per qubit.
    pub single_probability: [f64; 2],
    pub single_probability_stderr: [f64; 2],
    /// Success-weighted joint fidelity, per qubit.
    pub joint_fidelity: [f64; 2],
    pub joint_fidelity_stderr: [f64; 2],
    /// Mean of the conditional fidelity with every input weighted equally.
    pub joint_fidelity_unweighted: [f64; 2],
    pub joint_probability: f64,
    pub joint_probability_stderr: f64,
}

impl AveragePerformance {
    /// Symmetric success-weighted fidelity `(F₁ + F₂)/2`.
    pub fn symmetric_fidelity(&self) -> f64 {
        0.5 * (self.joint_fidelity[0] + self.joint_fidelity[1])
    }

    pub fn symmetric_fidelity_unweighted(&self) -> f64 {
        0.5 * (self.joint_fidelity_unweighted[0] + self.joint_fidelity_unweighted[1])
    }

    /// Average of the two per-qubit single-decode probabilities.
    pub fn mean_single_probability(&self) -> f64 {
        0.5 * (self.single_probability[0] + self.single_probability[1])
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct PerformanceSums {
    single: [MeanAccumulator; 2],
    weighted: [RatioAccumulator; 2],
    unweighted: [MeanAccumulator; 2],
    joint: MeanAccumulator,
}

impl PerformanceSums {
    fn push(&mut self, o: &PairOutcome) {
        for j in 0..2 {
            self.single[j].push(o.single_probability[j]);
            self.weighted[j].push(o.joint_probability * o.joint_fidelity[j], o.joint_probability);
            if o.encode_probability > 0.0 {
                self.unweighted[j].push(o.joint_fidelity[j]);
            }
        }
        self.joint.push(o.joint_probability);
    }

    fn merge(mut self, other: &Self) -> Self {
        for j in 0..2 {
            self.single[j].merge(&other.single[j]);
            self.weighted[j].merge(&other.weighted[j]);
            self.unweighted[j].merge(&other.unweighted[j]);
        }
        self.joint.merge(&other.joint);
        self
    }
}

pub(crate) const CHUNK: usize = 8192;

/// Runs `body` over `n` samples split into fixed-size chunks, each with its
/// own substream, and returns the per-chunk results in chunk order.
pub(crate) fn sample_chunks<A, F>(n: usize, seed: u64, body: F) -> Vec<A>
where
    A: Send,
    F: Fn(&mut rand_chacha::ChaCha8Rng, usize) -> A + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, i as u64);
            let len = CHUNK.min(n - i * CHUNK);
            body(&mut rng, len)
        })
        .collect()
}

pub const MIN_AVERAGE_SAMPLES: usize = 10_000;

pub fn average_performance(n_samples: usize, seed: u64) -> Result<AveragePerformance> {
    if n_samples < MIN_AVERAGE_SAMPLES {
        return Err(crate::error::invalid(
            "n_samples",
            format!("need at least {MIN_AVERAGE_SAMPLES}, got {n_samples}"),
        ));
    }
    let parts = sample_chunks(n_samples, seed, |rng, len| -> Result<PerformanceSums> {
        let mut sums = PerformanceSums::default();
        for _ in 0..len {
            let q1 = sample_bloch_uniform(rng).state();
            let q2 = sample_bloch_uniform(rng).state();
            sums.push(&evaluate_pair(&q1, &q2)?);
        }
        Ok(sums)
    });
    let mut total = PerformanceSums::default();
    for part in parts {
        total = total.merge(&part?);
    }
    Ok(AveragePerformance {
        samples: n_samples,
        single_probability: total.single.map(|a| a.mean()),
        single_probability_stderr: total.single.map(|a| a.std_error()),
        joint_fidelity: total.weighted.map(|a| a.ratio()),
        joint_fidelity_stderr: total.weighted.map(|a| a.std_error()),
        joint_fidelity_unweighted: total.unweighted.map(|a| a.mean()),
        joint_probability: total.joint.mean(),
        joint_probability_stderr: total.joint.std_error(),
    })
}

/// Monte Carlo estimate of the joint success probability and of the
/// success-weighted fidelity of qubit 1, for a first qubit at polar angle
/// `theta` with random azimuth and a Bloch-uniform second qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalEstimate {
    pub theta: f64,
    pub p1: f64,
    pub p1_stderr: f64,
    pub f1: f64,
    pub f1_stderr: f64,
}

pub fn conditional_performance(theta: f64, n_samples: usize, seed: u64) -> Result<ConditionalEstimate> {
    BlochAngles::new(theta, 0.0)?;
    let parts = sample_chunks(n_samples, seed, |rng, len| -> Result<(MeanAccumulator, RatioAccumulator)> {
        let mut p = MeanAccumulator::default();
        let mut f = RatioAccumulator::default();
        for _ in 0..len {
            let phi = sample_bloch_uniform(rng).phi;
            let q1 = BlochAngles { theta, phi }.state();
            let q2 = sample_bloch_uniform(rng).state();
            let o = evaluate_pair(&q1, &q2)?;
            p.push(o.joint_probability);
            f.push(o.joint_probability * o.joint_fidelity[0], o.joint_probability);
        }
        Ok((p, f))
    });
    let mut p = MeanAccumulator::default();
    let mut f = RatioAccumulator::default();
    for part in parts {
        let (pp, ff) = part?;
        p.merge(&pp);
        f.merge(&ff);
    }
    Ok(ConditionalEstimate {
        theta,
        p1: p.mean(),
        p1_stderr: p.std_error(),
        f1: f.ratio(),
        f1_stderr: f.std_error(),
    })
}

/// Qubit with real amplitudes; convenience for tests and examples.
pub fn real_qubit(alpha: f64, beta: f64) -> PureState {
    PureState::qubit(c(alpha, 0.0), c(beta, 0.0)).expect("nonzero qubit")
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    use super::*;
    use crate::statekit::{measure_povm, seeded_rng, EXACT_TOL, PSD_TOL};

    fn assert_state(s: &PureState, expected: &[C64]) {
        assert_eq!(s.dim(), expected.len());
        for (a, b) in s.amplitudes().iter().zip(expected) {
            assert!((a - b).norm() < EXACT_TOL, "{:?} vs {:?}", s.amplitudes(), expected);
        }
    }

    fn plus() -> PureState {
        real_qubit(1.0, 1.0)
    }

    #[test]
    fn encode_basis_and_superposition() {
        let zero = PureState::basis(2, 0);
        let r = encode(&zero, &zero).unwrap();
        assert_eq!(r.qutrit, PureState::basis(3, 0));
        assert!((r.success_probability - 1.0).abs() < EXACT_TOL);

        // hand computation: α₁α₂ = α₁β₂ = β₁β₂ = 1/2, filtered |10⟩ carries 1/4
        let r = encode(&plus(), &plus()).unwrap();
        let third = C64::from(3f64.sqrt().recip());
        assert_state(&r.qutrit, &[third, third, third]);
        assert!((r.success_probability - 0.75).abs() < EXACT_TOL);
    }

    #[test]
    fn filtered_state_cannot_be_encoded() {
        let r = encode(&PureState::basis(2, 1), &PureState::basis(2, 0));
        assert_eq!(r, Err(Error::EncodingAlwaysFails));
    }

    #[test]
    fn encode_rejects_non_qubits() {
        assert!(encode(&PureState::basis(3, 0), &plus()).is_err());
    }

    #[test]
    fn single_decoding_recovers_the_first_qubit() {
        let q1 = PureState::qubit(c(0.6, 0.0), c(0.0, 0.8)).unwrap();
        let q2 = PureState::qubit(c(0.28, 0.0), c(0.0, 0.96)).unwrap();
        let e = encode(&q1, &q2).unwrap();
        let d = decode_single(&e.qutrit, QubitIndex::First).unwrap();
        assert!((d.qubit.unwrap().overlap(&q1).unwrap() - 1.0).abs() < EXACT_TOL);
        let beta2 = q2.amplitude(1).norm_sqr();
        assert!((d.success_probability - beta2 / e.success_probability).abs() < EXACT_TOL);

        let povm = decoding_povm(QubitIndex::First);
        let p = measure_povm(&povm, &e.qutrit).unwrap();
        let expected = (0.6f64.powi(2) * beta2 + 0.8f64.powi(2) * beta2) / e.success_probability;
        assert!((p[0] - expected).abs() < EXACT_TOL);
    }

    #[test]
    fn povm_structure() {
        let p = measure_povm(&decoding_povm(QubitIndex::First), &PureState::basis(3, 0)).unwrap();
        assert_eq!(p, vec![0.0, 1.0]);
        let p = measure_povm(&decoding_povm(QubitIndex::Second), &PureState::basis(3, 2)).unwrap();
        assert_eq!(p, vec![0.0, 1.0]);
    }

    #[test]
    fn single_decoding_edge_cases() {
        let d = decode_single(&PureState::basis(3, 0), QubitIndex::First).unwrap();
        assert_eq!(d.qubit, None);
        assert_eq!(d.success_probability, 0.0);

        // POVM arithmetic: Π₂₊ keeps two of three equal components
        let flat = PureState::from_real(&[1.0, 1.0, 1.0]).unwrap();
        let d = decode_single(&flat, QubitIndex::Second).unwrap();
        let h = C64::from(FRAC_1_SQRT_2);
        assert_state(d.qubit.as_ref().unwrap(), &[h, h]);
        assert!((d.success_probability - 2.0 / 3.0).abs() < EXACT_TOL);
    }

    #[test]
    fn joint_decoding_examples() {
        let r = decode_joint(&PureState::basis(3, 1)).unwrap();
        assert_eq!(r.two_qubit_state, PureState::basis(4, 1));
        assert!((r.success_probability - 1.0).abs() < EXACT_TOL);

        let r = decode_joint(&PureState::basis(3, 0)).unwrap();
        assert_eq!(r.two_qubit_state, PureState::basis(4, 0));
        assert!((r.success_probability - 0.5).abs() < EXACT_TOL);

        let flat = PureState::from_real(&[1.0, 1.0, 1.0]).unwrap();
        let r = decode_joint(&flat).unwrap();
        assert!((r.success_probability - 2.0 / 3.0).abs() < EXACT_TOL);
        // image (1/√2, 1, 0, 1/√2)/√3 renormalized by √(2/3)
        let h = C64::from(0.5);
        assert_state(&r.two_qubit_state, &[h, C64::from(FRAC_1_SQRT_2), C64::from(0.0), h]);
    }

    #[test]
    fn joint_reduced_states_match_hand_computation() {
        // element-wise partial trace of the 4×4 output, written out directly
        let mut rng = seeded_rng(5);
        for _ in 0..50 {
            let q = PureState::new(
                (0..3)
                    .map(|_| {
                        let a = sample_bloch_uniform(&mut rng);
                        C64::from_polar(a.theta.cos() + 1.1, a.phi)
                    })
                    .collect(),
            )
            .unwrap();
            let r = decode_joint(&q).unwrap();
            let v = r.two_qubit_state.amplitudes();
            let m = |i: usize, j: usize| v[i] * v[j].conj();
            let rho1 = [[m(0, 0) + m(1, 1), m(0, 2) + m(1, 3)], [m(2, 0) + m(3, 1), m(2, 2) + m(3, 3)]];
            let rho2 = [[m(0, 0) + m(2, 2), m(0, 1) + m(2, 3)], [m(1, 0) + m(3, 2), m(1, 1) + m(3, 3)]];
            for i in 0..2 {
                for j in 0..2 {
                    assert!((r.per_qubit_states[0].matrix()[(i, j)] - rho1[i][j]).norm() < EXACT_TOL);
                    assert!((r.per_qubit_states[1].matrix()[(i, j)] - rho2[i][j]).norm() < EXACT_TOL);
                }
            }
            let p = q.amplitude(0).norm_sqr() / 2.0 + q.amplitude(1).norm_sqr() + q.amplitude(2).norm_sqr() / 2.0;
            assert!((r.success_probability - p).abs() < EXACT_TOL);
            let failure = q.amplitude(0).norm_sqr() / 2.0 + q.amplitude(2).norm_sqr() / 2.0;
            assert!((r.success_probability + failure - 1.0).abs() < PSD_TOL);
        }
    }

    #[test]
    fn operation_on_flat_input_pair() {
        // encode then decode with α₁=β₁=α₂=β₂=1/√2, by matrix arithmetic:
        // encoded image (1,1,0,1)/2 → (1/2, 1/2, 1/2), decoded (1/(2√2), 1/2, 0, 1/(2√2))
        // total probability 1/8 + 1/4 + 1/8 = 1/2
        let e = encode(&plus(), &plus()).unwrap();
        let out = joint_decoding_operation().apply(&e.qutrit).unwrap();
        assert!((e.success_probability * out[0].probability - 0.5).abs() < EXACT_TOL);
        assert!((out[0].probability - 2.0 / 3.0).abs() < EXACT_TOL);
    }

    #[test]
    fn analytic_curves_at_endpoints() {
        assert!((p1_analytic(0.0) - 0.75).abs() < EXACT_TOL);
        assert!((p1_analytic(PI) - 0.25).abs() < EXACT_TOL);
        assert!((p1_analytic(PI / 2.0) - 0.5).abs() < EXACT_TOL);
        assert!((f1_analytic(0.0) - 1.0).abs() < EXACT_TOL);
        assert!((f1_analytic(PI) - 1.0).abs() < EXACT_TOL);
        let mid = (1.0 + 0.5 + (SQRT_2 - 1.0) / 2.0) / 2.0;
        assert!((f1_analytic(PI / 2.0) - mid).abs() < EXACT_TOL);
        assert!((mid - 0.853_553_390_593_273_7).abs() < 1e-15);
    }

    #[test]
    fn procedure_is_not_covariant() {
        assert!(f1_analytic(0.0) - f1_analytic(PI / 2.0) > 0.1);
    }

    #[test]
    fn conditional_quantities_do_not_depend_on_azimuth() {
        // average over the second qubit with an exact product quadrature:
        // Gauss-Legendre in cos θ₂ and a uniform φ₂ grid
        let nodes = crate::quadrature::gauss_legendre(6);
        let theta = 1.1;
        let mut reference: Option<(f64, f64)> = None;
        for k in 0..24 {
            let phi1 = 2.0 * PI * k as f64 / 24.0;
            let q1 = BlochAngles { theta, phi: phi1 }.state();
            let (mut p, mut g) = (0.0, 0.0);
            for &(x, w) in &nodes {
                for m in 0..8 {
                    let phi2 = 2.0 * PI * m as f64 / 8.0;
                    let q2 = BlochAngles { theta: x.acos(), phi: phi2 }.state();
                    let o = evaluate_pair(&q1, &q2).unwrap();
                    p += w / 2.0 / 8.0 * o.joint_probability;
                    g += w / 2.0 / 8.0 * o.joint_probability * o.joint_fidelity[0];
                }
            }
            let (p1, f1) = (p, g / p);
            assert!((p1 - p1_analytic(theta)).abs() < 1e-12);
            assert!((f1 - f1_analytic(theta)).abs() < 1e-12);
            match reference {
                None => reference = Some((p1, f1)),
                Some((p0, f0)) => {
                    assert!((p1 - p0).abs() < 1e-10 && (f1 - f0).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn average_performance_rejects_small_sample_counts() {
        assert!(average_performance(100, 1).is_err());
    }

    #[test]
    fn average_performance_is_deterministic() {
        let a = average_performance(MIN_AVERAGE_SAMPLES, 3).unwrap();
        let b = average_performance(MIN_AVERAGE_SAMPLES, 3).unwrap();
        assert_eq!(a, b);
    }
}
