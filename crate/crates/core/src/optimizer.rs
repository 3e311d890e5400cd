//! Numerical search over probabilistic qutrit-to-two-qubit decoders.
//!
//! A decoder is a set of at most [`MAX_ELEMENTS`] operation elements
//! `Kᵢ : C³ → C⁴`. Its figure of merit is the success-weighted fidelity of
//! each retrieved qubit averaged over Bloch-uniform inputs,
//!
//! ```text
//! F_j = E[ Σᵢ ⟨ψ_j| tr_other(Kᵢ v v† Kᵢ†) |ψ_j⟩ ] / E[ Σᵢ tr(Kᵢ v v† Kᵢ†) ]
//! ```
//!
//! with `v` the unnormalized encoded qutrit. Both averages are quadratic
//! forms in `vec(Kᵢ)`, so the search precomputes them once with an exact
//! quadrature and then runs a noiseless gradient ascent. `F_j` is invariant
//! under rescaling all elements, so the trace-non-increasing constraint only
//! affects the success probability.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::codec::{
    encode, joint_decoding_operation, optimal_joint_fidelity, sample_chunks, QubitIndex,
};
use crate::error::{invalid, Error, Result};
use crate::quadrature::BlochGrid;
use crate::statekit::{
    c, max_eigenvalue, reduce, sample_bloch_uniform, substream, CMatrix, CVector, Keep,
    PureState, QuantumOperation, C64, EXACT_TOL,
};
use crate::stats::{MeanAccumulator, RatioAccumulator};

pub const MAX_ELEMENTS: usize = 4;
const IN_DIM: usize = 3;
const OUT_DIM: usize = 4;
const ELEMENT_LEN: usize = IN_DIM * OUT_DIM;
/// Entries of `vec(K)` used by the diagonal family `a|00⟩⟨0| + b|01⟩⟨1| + c|11⟩⟨2|`.
const DIAGONAL_ENTRIES: [usize; 3] = [0, IN_DIM + 1, 3 * IN_DIM + 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SearchSpace {
    /// Up to four unrestricted complex elements (24 reals each).
    Full { n_elements: usize },
    /// One element with real coefficients `(a, b, c)`.
    Diagonal,
}

impl SearchSpace {
    pub fn n_params(self) -> usize {
        match self {
            SearchSpace::Full { n_elements } => 2 * ELEMENT_LEN * n_elements,
            SearchSpace::Diagonal => 3,
        }
    }

    fn validate(self) -> Result<()> {
        if let SearchSpace::Full { n_elements } = self {
            if !(1..=MAX_ELEMENTS).contains(&n_elements) {
                return Err(invalid(
                    "n_elements",
                    format!("must lie in 1..={MAX_ELEMENTS}, got {n_elements}"),
                ));
            }
        }
        Ok(())
    }

    /// `vec(Kᵢ)` (row-major) for every element.
    fn elements(self, params: &[f64]) -> Vec<CVector> {
        match self {
            SearchSpace::Full { n_elements } => (0..n_elements)
                .map(|e| {
                    let p = &params[2 * ELEMENT_LEN * e..2 * ELEMENT_LEN * (e + 1)];
                    CVector::from_fn(ELEMENT_LEN, |i, _| c(p[2 * i], p[2 * i + 1]))
                })
                .collect(),
            SearchSpace::Diagonal => {
                let mut k = CVector::zeros(ELEMENT_LEN);
                for (&idx, &x) in DIAGONAL_ENTRIES.iter().zip(params) {
                    k[idx] = C64::from(x);
                }
                vec![k]
            }
        }
    }

    /// Pulls a gradient with respect to `conj(vec(Kᵢ))` back to the
    /// real parameters.
    fn pull_back(self, grads: &[CVector]) -> Vec<f64> {
        match self {
            SearchSpace::Full { .. } => grads
                .iter()
                .flat_map(|g| g.iter().flat_map(|z| [z.re, z.im]))
                .collect(),
            SearchSpace::Diagonal => DIAGONAL_ENTRIES.iter().map(|&i| grads[0][i].re).collect(),
        }
    }
}

fn element_matrix(k: &CVector) -> CMatrix {
    CMatrix::from_fn(OUT_DIM, IN_DIM, |r, col| k[r * IN_DIM + col])
}

/// A decoder together with the parameters it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderCandidate {
    operation: QuantumOperation,
    params: Vec<f64>,
    space: SearchSpace,
}

impl DecoderCandidate {
    /// Builds the operation from raw parameters. If `Σ K†K` has an
    /// eigenvalue above 1 all elements are scaled down so that the largest
    /// one equals 1.
    pub fn from_params(space: SearchSpace, params: &[f64]) -> Result<Self> {
        space.validate()?;
        if params.len() != space.n_params() {
            return Err(Error::DimensionMismatch {
                expected: space.n_params(),
                found: params.len(),
            });
        }
        if params.iter().any(|x| !x.is_finite()) {
            return Err(invalid("params", "non-finite parameter"));
        }
        let elements: Vec<CMatrix> = space.elements(params).iter().map(element_matrix).collect();
        let effect = elements
            .iter()
            .fold(CMatrix::zeros(IN_DIM, IN_DIM), |acc, k| acc + k.adjoint() * k);
        let top = max_eigenvalue(&effect);
        if top == 0.0 {
            return Err(Error::ZeroNorm);
        }
        let scale = if top > 1.0 { top.sqrt().recip() } else { 1.0 };
        let params: Vec<f64> = params.iter().map(|x| x * scale).collect();
        let elements = elements.into_iter().map(|k| k * C64::from(scale)).collect();
        Ok(Self {
            operation: QuantumOperation::new(IN_DIM, OUT_DIM, elements)?,
            params,
            space,
        })
    }

    /// Wraps an existing 3 → 4 operation as a full-space candidate.
    pub fn from_operation(operation: &QuantumOperation) -> Result<Self> {
        if operation.in_dim() != IN_DIM || operation.out_dim() != OUT_DIM {
            return Err(Error::DimensionMismatch {
                expected: IN_DIM * OUT_DIM,
                found: operation.in_dim() * operation.out_dim(),
            });
        }
        let n_elements = operation.elements().len();
        let params: Vec<f64> = operation
            .elements()
            .iter()
            .flat_map(|k| {
                (0..ELEMENT_LEN).flat_map(move |i| {
                    let z = k[(i / IN_DIM, i % IN_DIM)];
                    [z.re, z.im]
                })
            })
            .collect();
        Self::from_params(SearchSpace::Full { n_elements }, &params)
    }

    /// The decoder `|0⟩ → |00⟩/√2, |1⟩ → |01⟩, |2⟩ → |11⟩/√2`.
    pub fn optimal() -> Self {
        Self::from_operation(&joint_decoding_operation()).expect("valid decoder")
    }

    /// Direct inverse of the encoder, `|0⟩ → |00⟩, |1⟩ → |01⟩, |2⟩ → |11⟩`.
    pub fn exact_inverse() -> Self {
        Self::from_params(SearchSpace::Diagonal, &[1.0, 1.0, 1.0]).expect("valid decoder")
    }

    /// Ignores the qutrit and always outputs `output`.
    pub fn discard(output: &PureState) -> Result<Self> {
        if output.dim() != OUT_DIM {
            return Err(Error::DimensionMismatch {
                expected: OUT_DIM,
                found: output.dim(),
            });
        }
        let elements = (0..IN_DIM)
            .map(|i| {
                let mut k = CMatrix::zeros(OUT_DIM, IN_DIM);
                k.set_column(i, output.as_vector());
                k
            })
            .collect();
        Self::from_operation(&QuantumOperation::new(IN_DIM, OUT_DIM, elements)?)
    }

    pub fn operation(&self) -> &QuantumOperation {
        &self.operation
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn space(&self) -> SearchSpace {
        self.space
    }

    /// Same decoder scaled so that the largest eigenvalue of `Σ K†K` is 1,
    /// which maximizes the success probability without changing fidelities.
    pub fn saturated(&self) -> Self {
        let top = self.operation.completeness_bound();
        let scale = top.sqrt().recip();
        let params: Vec<f64> = self.params.iter().map(|x| x * scale).collect();
        Self::from_params(self.space, &params).expect("rescaled candidate stays valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecoderEvaluation {
    pub f1: f64,
    pub f2: f64,
    /// Probability that encoding and decoding both succeed.
    pub success_probability: f64,
    pub f1_stderr: f64,
    pub f2_stderr: f64,
    pub success_probability_stderr: f64,
}

impl DecoderEvaluation {
    pub fn fidelity(&self) -> f64 {
        0.5 * (self.f1 + self.f2)
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct EvalSums {
    f: [RatioAccumulator; 2],
    p: MeanAccumulator,
}

impl EvalSums {
    fn merge(&mut self, other: &Self) {
        self.f[0].merge(&other.f[0]);
        self.f[1].merge(&other.f[1]);
        self.p.merge(&other.p);
    }
}

/// Success weight and weighted fidelity numerators for one input pair,
/// through encode → decoder → partial trace → overlap.
fn pair_terms(op: &QuantumOperation, q1: &PureState, q2: &PureState) -> Result<(f64, [f64; 2])> {
    let enc = match encode(q1, q2) {
        Ok(e) => e,
        Err(Error::EncodingAlwaysFails) => return Ok((0.0, [0.0; 2])),
        Err(e) => return Err(e),
    };
    let out = op.apply_to_matrix(enc.qutrit.to_density().matrix())?;
    let p_dec = out.trace().re;
    let mut nums = [0.0; 2];
    for (j, (q, keep)) in [(q1, Keep::First), (q2, Keep::Second)].into_iter().enumerate() {
        let reduced = reduce(&out, (2, 2), keep)?;
        let v = q.as_vector();
        nums[j] = enc.success_probability * (v.adjoint() * reduced * v)[(0, 0)].re;
    }
    Ok((enc.success_probability * p_dec, nums))
}

fn finish(sums: &EvalSums) -> DecoderEvaluation {
    DecoderEvaluation {
        f1: sums.f[0].ratio(),
        f2: sums.f[1].ratio(),
        success_probability: sums.p.mean(),
        f1_stderr: sums.f[0].std_error(),
        f2_stderr: sums.f[1].std_error(),
        success_probability_stderr: sums.p.std_error(),
    }
}

/// Monte Carlo average over Bloch-uniform input pairs.
pub fn evaluate_decoder(candidate: &DecoderCandidate, n_samples: usize, seed: u64) -> Result<DecoderEvaluation> {
    if n_samples < 2 {
        return Err(invalid("n_samples", format!("need at least 2, got {n_samples}")));
    }
    let op = candidate.operation();
    let parts = sample_chunks(n_samples, seed, |rng, len| -> Result<EvalSums> {
        let mut sums = EvalSums::default();
        for _ in 0..len {
            let q1 = sample_bloch_uniform(rng).state();
            let q2 = sample_bloch_uniform(rng).state();
            let (w, nums) = pair_terms(op, &q1, &q2)?;
            sums.f[0].push(nums[0], w);
            sums.f[1].push(nums[1], w);
            sums.p.push(w);
        }
        Ok(sums)
    });
    let mut total = EvalSums::default();
    for part in parts {
        total.merge(&part?);
    }
    Ok(finish(&total))
}

/// Weighted average over a product quadrature grid; standard errors are 0.
pub fn evaluate_decoder_quadrature(candidate: &DecoderCandidate, grid: &BlochGrid) -> Result<DecoderEvaluation> {
    let op = candidate.operation();
    let (mut w_sum, mut n_sum) = (0.0, [0.0; 2]);
    for (a1, w1) in grid.points() {
        for (a2, w2) in grid.points() {
            let (w, nums) = pair_terms(op, &a1.state(), &a2.state())?;
            let weight = w1 * w2;
            w_sum += weight * w;
            n_sum[0] += weight * nums[0];
            n_sum[1] += weight * nums[1];
        }
    }
    Ok(DecoderEvaluation {
        f1: n_sum[0] / w_sum,
        f2: n_sum[1] / w_sum,
        success_probability: w_sum,
        f1_stderr: 0.0,
        f2_stderr: 0.0,
        success_probability_stderr: 0.0,
    })
}

/// Exact quadratic forms of the averaged fidelity numerators and
/// denominator in `vec(K)`.
#[derive(Debug, Clone)]
pub struct FidelityForms {
    numerators: [CMatrix; 2],
    denominator: CMatrix,
}

impl FidelityForms {
    /// The integrands are polynomials of degree 2 in each qubit's Bloch
    /// vector, so a 4 × 8 grid per qubit is already exact.
    pub fn new() -> Self {
        Self::with_grid(&BlochGrid::new(4, 8))
    }

    pub fn with_grid(grid: &BlochGrid) -> Self {
        let id2 = CMatrix::identity(2, 2);
        let id4 = CMatrix::identity(OUT_DIM, OUT_DIM);
        let mut numerators = [CMatrix::zeros(ELEMENT_LEN, ELEMENT_LEN), CMatrix::zeros(ELEMENT_LEN, ELEMENT_LEN)];
        let mut denominator = CMatrix::zeros(ELEMENT_LEN, ELEMENT_LEN);
        for (a1, w1) in grid.points() {
            for (a2, w2) in grid.points() {
                let w = C64::from(w1 * w2);
                let (x1, y1, x2, y2) = (a1.alpha(), a1.beta(), a2.alpha(), a2.beta());
                let v = CVector::from_vec(vec![x1 * x2, x1 * y2, y1 * y2]);
                let n = (&v * v.adjoint()).map(|z| z.conj());
                let p1 = a1.state().to_density().matrix().clone();
                let p2 = a2.state().to_density().matrix().clone();
                numerators[0] += p1.kronecker(&id2).kronecker(&n) * w;
                numerators[1] += id2.kronecker(&p2).kronecker(&n) * w;
                denominator += id4.kronecker(&n) * w;
            }
        }
        Self {
            numerators,
            denominator,
        }
    }

    fn sums(&self, elements: &[CVector]) -> ([f64; 2], f64) {
        let form = |m: &CMatrix| elements.iter().map(|k| (k.adjoint() * m * k)[(0, 0)].re).sum::<f64>();
        (
            [form(&self.numerators[0]), form(&self.numerators[1])],
            form(&self.denominator),
        )
    }

    /// `(F₁, F₂)` for the given elements.
    pub fn fidelities(&self, elements: &[CVector]) -> [f64; 2] {
        let (n, d) = self.sums(elements);
        [n[0] / d, n[1] / d]
    }

    /// Penalized symmetric objective and its gradient with respect to the
    /// real and imaginary parts of every element.
    fn objective(&self, elements: &[CVector], penalty: f64) -> (f64, Vec<CVector>) {
        let (n, d) = self.sums(elements);
        let f = [n[0] / d, n[1] / d];
        let gap = f[0] - f[1];
        let value = 0.5 * (f[0] + f[1]) - penalty * gap * gap;
        // dJ/dF_j
        let c1 = 0.5 - 2.0 * penalty * gap;
        let c2 = 0.5 + 2.0 * penalty * gap;
        let grads = elements
            .iter()
            .map(|k| {
                // d(k†Mk)/d(re, im) = 2 (Mk) packed as a complex number
                let g1 = (&self.numerators[0] * k - &self.denominator * k * C64::from(f[0])) * C64::from(2.0 / d);
                let g2 = (&self.numerators[1] * k - &self.denominator * k * C64::from(f[1])) * C64::from(2.0 / d);
                g1 * C64::from(c1) + g2 * C64::from(c2)
            })
            .collect();
        (value, grads)
    }
}

impl Default for FidelityForms {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeOptions {
    pub restarts: usize,
    /// Stop a restart once the gradient norm falls below this value.
    pub tolerance: f64,
    pub seed: u64,
    pub space: SearchSpace,
    /// Weight of `(F₁ − F₂)²` in the objective.
    pub penalty: f64,
    pub max_iterations: usize,
}

impl OptimizeOptions {
    pub fn new(restarts: usize, tolerance: f64, seed: u64) -> Self {
        Self {
            restarts,
            tolerance,
            seed,
            space: SearchSpace::Full {
                n_elements: MAX_ELEMENTS,
            },
            penalty: 10.0,
            max_iterations: 5000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RestartReport {
    pub index: usize,
    pub fidelity: f64,
    pub f1: f64,
    pub f2: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    /// Best decoder found, scaled to maximize its success probability.
    pub best: DecoderCandidate,
    /// `(F₁ + F₂)/2` of the best decoder.
    pub fidelity: f64,
    pub evaluation: DecoderEvaluation,
    pub restarts: Vec<RestartReport>,
}

fn unit(x: &mut [f64]) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.iter_mut().for_each(|v| *v /= norm);
}

fn ascend(forms: &FidelityForms, options: &OptimizeOptions, index: usize) -> (Vec<f64>, RestartReport) {
    let space = options.space;
    let mut rng = substream(options.seed, index as u64);
    let mut x: Vec<f64> = (0..space.n_params()).map(|_| StandardNormal.sample(&mut rng)).collect();
    unit(&mut x);
    let eval = |x: &[f64]| {
        let (value, grads) = forms.objective(&space.elements(x), options.penalty);
        (value, space.pull_back(&grads))
    };
    let (mut value, mut grad) = eval(&x);
    let mut step = 1.0;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < options.max_iterations {
        let g2: f64 = grad.iter().map(|g| g * g).sum();
        if g2.sqrt() < options.tolerance {
            converged = true;
            break;
        }
        iterations += 1;
        let mut accepted = false;
        while step > 1e-16 {
            let mut trial: Vec<f64> = x.iter().zip(&grad).map(|(a, g)| a + step * g).collect();
            unit(&mut trial);
            let (tv, tg) = eval(&trial);
            if tv >= value + 1e-4 * step * g2 {
                x = trial;
                value = tv;
                grad = tg;
                accepted = true;
                step = (2.0 * step).min(1e3);
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            converged = true;
            break;
        }
    }
    let [f1, f2] = forms.fidelities(&space.elements(&x));
    let report = RestartReport {
        index,
        fidelity: 0.5 * (f1 + f2),
        f1,
        f2,
        iterations,
        converged,
    };
    (x, report)
}

/// Multi-start gradient ascent of `(F₁ + F₂)/2 − penalty·(F₁ − F₂)²`.
/// Restarts run in parallel; the best one (lowest index on ties) wins.
pub fn optimize_decoder(options: &OptimizeOptions) -> Result<OptimizationResult> {
    options.space.validate()?;
    if options.restarts == 0 {
        return Err(invalid("restarts", "need at least one restart"));
    }
    if !(options.tolerance > 0.0) || !(options.penalty >= 0.0) {
        return Err(invalid("tolerance", "tolerance must be positive and penalty non-negative"));
    }
    let forms = FidelityForms::new();
    let runs: Vec<(Vec<f64>, RestartReport)> = (0..options.restarts)
        .into_par_iter()
        .map(|i| ascend(&forms, options, i))
        .collect();
    let objective = |r: &RestartReport| r.fidelity - options.penalty * (r.f1 - r.f2).powi(2);
    let (best_params, best_report) = runs
        .iter()
        .fold(None::<&(Vec<f64>, RestartReport)>, |acc, run| match acc {
            Some(b) if objective(&b.1) >= objective(&run.1) => Some(b),
            _ => Some(run),
        })
        .expect("at least one restart");
    let best = DecoderCandidate::from_params(options.space, best_params)?.saturated();
    let evaluation = evaluate_decoder_quadrature(&best, &BlochGrid::new(4, 8))?;
    Ok(OptimizationResult {
        best,
        fidelity: best_report.fidelity,
        evaluation,
        restarts: runs.into_iter().map(|(_, r)| r).collect(),
    })
}

/// Distance of a fidelity from the optimal symmetric value.
pub fn gap_to_optimum(fidelity: f64) -> f64 {
    fidelity - optimal_joint_fidelity()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingleDecodingReport {
    pub points: usize,
    /// Smallest decoded fidelity, per qubit.
    pub min_fidelity: [f64; 2],
    /// Largest deviation of the decoding success probability from
    /// `|β₂|²/𝒩` (qubit 1) and `|α₁|²/𝒩` (qubit 2).
    pub max_probability_error: [f64; 2],
    /// Quadrature average of encoding times decoding success, per qubit.
    pub average_success: [f64; 2],
}

/// Checks single-qubit decoding on a `n_grid⁴` product grid over
/// `(θ₁, φ₁, θ₂, φ₂)`.
pub fn verify_single_decoding_optimality(n_grid: usize) -> Result<SingleDecodingReport> {
    if n_grid == 0 {
        return Err(invalid("n_grid", "must be positive"));
    }
    let grid = BlochGrid::new(n_grid, n_grid);
    let mut report = SingleDecodingReport {
        points: 0,
        min_fidelity: [1.0; 2],
        max_probability_error: [0.0; 2],
        average_success: [0.0; 2],
    };
    for (a1, w1) in grid.points() {
        for (a2, w2) in grid.points() {
            let (q1, q2) = (a1.state(), a2.state());
            report.points += 1;
            let enc = encode(&q1, &q2)?;
            let n = enc.success_probability;
            let expected = [q2.amplitude(1).norm_sqr() / n, q1.amplitude(0).norm_sqr() / n];
            for (j, (which, target)) in [(QubitIndex::First, &q1), (QubitIndex::Second, &q2)].into_iter().enumerate() {
                let dec = crate::codec::decode_single(&enc.qutrit, which)?;
                if let Some(qubit) = &dec.qubit {
                    let f = qubit.overlap(target)?;
                    report.min_fidelity[j] = report.min_fidelity[j].min(f);
                }
                let err = (dec.success_probability - expected[j]).abs();
                report.max_probability_error[j] = report.max_probability_error[j].max(err);
                report.average_success[j] += w1 * w2 * n * dec.success_probability;
            }
        }
    }
    Ok(report)
}

/// Whether a decoder keeps `Σ K†K ≼ I`.
pub fn is_trace_non_increasing(candidate: &DecoderCandidate) -> bool {
    candidate.operation().completeness_bound() <= 1.0 + EXACT_TOL
}
