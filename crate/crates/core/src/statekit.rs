//! Finite-dimensional state algebra: pure states, density matrices,
//! probabilistic operations, POVMs and uniform sampling on the Bloch sphere.
//!
//! Composite systems use row-major ordering with the first subsystem as the
//! most significant index: basis state `|i⟩⊗|j⟩` has index `i * d2 + j`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Tolerance for exact linear algebra.
pub const EXACT_TOL: f64 = 1e-12;
/// Tolerance for positivity and completeness checks.
pub const PSD_TOL: f64 = 1e-10;

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub(crate) fn norm_sqr(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Largest eigenvalue of a Hermitian matrix.
pub fn max_eigenvalue(m: &CMatrix) -> f64 {
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

fn hermiticity_defect(m: &CMatrix) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// A normalized pure state of a finite-dimensional system.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
}

impl PureState {
    /// Normalizes `amplitudes` into a state. Zero vectors are rejected.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        Self::from_vector(CVector::from_vec(amplitudes))
    }

    pub fn from_vector(amplitudes: CVector) -> Result<Self> {
        Self::from_unnormalized(amplitudes).map(|(s, _)| s)
    }

    /// Normalizes an unnormalized vector and also returns its squared norm,
    /// which is the branch probability whenever the vector came out of a
    /// probabilistic operation.
    pub fn from_unnormalized(amplitudes: CVector) -> Result<(Self, f64)> {
        if amplitudes.len() < 2 {
            return Err(Error::DimensionTooSmall(amplitudes.len()));
        }
        let weight = norm_sqr(&amplitudes);
        if !(weight > 0.0) || !weight.is_finite() {
            return Err(Error::ZeroNorm);
        }
        let scale = C64::from(weight.sqrt().recip());
        Ok((
            Self {
                amplitudes: amplitudes * scale,
            },
            weight,
        ))
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&x| C64::from(x)).collect())
    }

    /// Computational basis state `|index⟩`.
    ///
    /// Panics if `index >= dim` or `dim < 2`.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(dim >= 2 && index < dim, "basis |{index}⟩ in dimension {dim}");
        let mut amplitudes = CVector::zeros(dim);
        amplitudes[index] = C64::from(1.0);
        Self { amplitudes }
    }

    /// Qubit `alpha|0⟩ + beta|1⟩`, normalized.
    pub fn qubit(alpha: C64, beta: C64) -> Result<Self> {
        Self::new(vec![alpha, beta])
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        self.amplitudes.as_slice()
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amplitudes[index]
    }

    pub fn as_vector(&self) -> &CVector {
        &self.amplitudes
    }

    /// Renormalizes the amplitudes. Idempotent on valid states.
    pub fn normalize(&self) -> Self {
        Self::from_vector(self.amplitudes.clone()).expect("valid state has nonzero norm")
    }

    pub fn with_global_phase(&self, phase: f64) -> Self {
        Self {
            amplitudes: &self.amplitudes * C64::from_polar(1.0, phase),
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// `|⟨self|other⟩|²`.
    pub fn overlap(&self, other: &PureState) -> Result<f64> {
        self.inner(other).map(|z| z.norm_sqr())
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Polar and azimuthal Bloch-sphere angles, in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochAngles {
    pub theta: f64,
    pub phi: f64,
}

impl BlochAngles {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::AngleOutOfRange {
                name: "theta",
                value: theta,
            });
        }
        if !(0.0..2.0 * PI).contains(&phi) {
            return Err(Error::AngleOutOfRange {
                name: "phi",
                value: phi,
            });
        }
        Ok(Self { theta, phi })
    }

    /// Builds angles from degrees; the azimuth is wrapped into `[0°, 360°)`.
    pub fn from_degrees(theta_deg: f64, phi_deg: f64) -> Result<Self> {
        if !theta_deg.is_finite() || !phi_deg.is_finite() {
            return Err(Error::AngleOutOfRange {
                name: "theta/phi",
                value: f64::NAN,
            });
        }
        let phi = phi_deg.rem_euclid(360.0).to_radians();
        // rem_euclid can round up to exactly 2π for tiny negative inputs
        let phi = if phi >= 2.0 * PI { 0.0 } else { phi };
        Self::new(theta_deg.to_radians(), phi)
    }

    /// `cos(θ/2)`.
    pub fn alpha(&self) -> C64 {
        C64::from((self.theta / 2.0).cos())
    }

    /// `e^{iφ} sin(θ/2)`.
    pub fn beta(&self) -> C64 {
        C64::from_polar((self.theta / 2.0).sin(), self.phi)
    }

    pub fn state(&self) -> PureState {
        PureState {
            amplitudes: CVector::from_vec(vec![self.alpha(), self.beta()]),
        }
    }
}

/// A density matrix with unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates hermiticity, positivity and unit trace.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        if matrix.nrows() < 2 {
            return Err(Error::DimensionTooSmall(matrix.nrows()));
        }
        let defect = hermiticity_defect(&matrix);
        if defect > EXACT_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > EXACT_TOL {
            return Err(Error::BadTrace(trace));
        }
        let lowest = min_eigenvalue(&matrix);
        if lowest < -PSD_TOL {
            return Err(Error::NotPositive(lowest));
        }
        Ok(Self { matrix })
    }

    /// Divides a positive matrix by its trace.
    pub fn from_unnormalized(matrix: CMatrix) -> Result<Self> {
        let trace = matrix.trace().re;
        if !(trace > 0.0) {
            return Err(Error::ZeroNorm);
        }
        let mut m = matrix / C64::from(trace);
        // symmetrize away rounding so the Hermitian check stays exact
        m = (&m + m.adjoint()) * C64::from(0.5);
        Self::new(m)
    }

    pub fn from_pure(state: &PureState) -> Self {
        let v = state.as_vector();
        Self {
            matrix: v * v.adjoint(),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        assert!(dim >= 2);
        Self {
            matrix: CMatrix::identity(dim, dim) / C64::from(dim as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.matrix.clone().symmetric_eigenvalues().iter().copied().collect()
    }
}

/// `a ⊗ b` for raw amplitude vectors.
pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    let mut out = CVector::zeros(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i * b.len() + j] = x * y;
        }
    }
    out
}

pub fn tensor_product(a: &PureState, b: &PureState) -> PureState {
    PureState {
        amplitudes: kron_vec(&a.amplitudes, &b.amplitudes),
    }
}

/// Which factor of a bipartite system to keep in a partial trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    First,
    Second,
}

/// Partial trace of an arbitrary (not necessarily normalized) operator on
/// a `d1 × d2` system.
pub fn reduce(m: &CMatrix, dims: (usize, usize), keep: Keep) -> Result<CMatrix> {
    let (d1, d2) = dims;
    check_dim(d1 * d2, m.nrows())?;
    check_dim(d1 * d2, m.ncols())?;
    Ok(match keep {
        Keep::First => CMatrix::from_fn(d1, d1, |i, k| {
            (0..d2).map(|j| m[(i * d2 + j, k * d2 + j)]).sum()
        }),
        Keep::Second => CMatrix::from_fn(d2, d2, |j, l| {
            (0..d1).map(|i| m[(i * d2 + j, i * d2 + l)]).sum()
        }),
    })
}

pub fn partial_trace(rho: &DensityMatrix, dims: (usize, usize), keep: Keep) -> Result<DensityMatrix> {
    let reduced = reduce(&rho.matrix, dims, keep)?;
    let reduced = (&reduced + reduced.adjoint()) * C64::from(0.5);
    DensityMatrix::new(reduced)
}

/// `⟨ψ|ρ|ψ⟩`.
pub fn fidelity(psi: &PureState, rho: &DensityMatrix) -> Result<f64> {
    check_dim(rho.dim(), psi.dim())?;
    let v = psi.as_vector();
    let value = v.dotc(&(&rho.matrix * v));
    Ok(value.re.clamp(0.0, 1.0))
}

/// Probabilistic quantum operation given by its operation elements.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumOperation {
    in_dim: usize,
    out_dim: usize,
    elements: Vec<CMatrix>,
}

/// One branch of an applied operation. `state` is `None` when the branch has
/// zero probability.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub state: Option<PureState>,
    pub probability: f64,
}

impl QuantumOperation {
    pub fn new(in_dim: usize, out_dim: usize, elements: Vec<CMatrix>) -> Result<Self> {
        if elements.is_empty() {
            return Err(crate::error::invalid("elements", "operation needs at least one element"));
        }
        for k in &elements {
            check_dim(out_dim, k.nrows())?;
            check_dim(in_dim, k.ncols())?;
        }
        let op = Self {
            in_dim,
            out_dim,
            elements,
        };
        let top = op.completeness_bound();
        if top > 1.0 + PSD_TOL {
            return Err(Error::NotTraceNonIncreasing(top));
        }
        Ok(op)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            in_dim: dim,
            out_dim: dim,
            elements: vec![CMatrix::identity(dim, dim)],
        }
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    /// `Σ Kᵢ†Kᵢ`.
    pub fn effect(&self) -> CMatrix {
        self.elements
            .iter()
            .fold(CMatrix::zeros(self.in_dim, self.in_dim), |acc, k| acc + k.adjoint() * k)
    }

    /// Largest eigenvalue of `Σ Kᵢ†Kᵢ`; at most 1 for a valid operation.
    pub fn completeness_bound(&self) -> f64 {
        max_eigenvalue(&self.effect())
    }

    /// Unnormalized images `Kᵢ|v⟩`.
    pub fn images(&self, v: &CVector) -> Result<Vec<CVector>> {
        check_dim(self.in_dim, v.len())?;
        Ok(self.elements.iter().map(|k| k * v).collect())
    }

    pub fn apply(&self, state: &PureState) -> Result<Vec<Outcome>> {
        Ok(self
            .images(state.as_vector())?
            .into_iter()
            .map(|image| match PureState::from_unnormalized(image) {
                Ok((state, probability)) => Outcome {
                    state: Some(state),
                    probability,
                },
                Err(_) => Outcome {
                    state: None,
                    probability: 0.0,
                },
            })
            .collect())
    }

    /// Unnormalized output density matrix `Σ Kᵢ ρ Kᵢ†`; its trace is the
    /// success probability.
    pub fn apply_to_matrix(&self, rho: &CMatrix) -> Result<CMatrix> {
        check_dim(self.in_dim, rho.nrows())?;
        Ok(self
            .elements
            .iter()
            .fold(CMatrix::zeros(self.out_dim, self.out_dim), |acc, k| {
                acc + k * rho * k.adjoint()
            }))
    }
}

/// Total success probability of a list of outcomes.
pub fn total_probability(outcomes: &[Outcome]) -> f64 {
    outcomes.iter().map(|o| o.probability).sum()
}

/// A positive semidefinite measurement effect.
#[derive(Debug, Clone, PartialEq)]
pub struct PovmElement {
    matrix: CMatrix,
}

impl PovmElement {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        let defect = hermiticity_defect(&matrix);
        if defect > PSD_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let lowest = min_eigenvalue(&matrix);
        if lowest < -PSD_TOL {
            return Err(Error::NotPositive(lowest));
        }
        Ok(Self { matrix })
    }

    /// Projector onto the span of the listed basis vectors.
    pub fn projector(dim: usize, indices: &[usize]) -> Self {
        let mut matrix = CMatrix::zeros(dim, dim);
        for &i in indices {
            matrix[(i, i)] = C64::from(1.0);
        }
        Self { matrix }
    }

    /// `I - self`. Valid whenever `self ≼ I`.
    pub fn complement(&self) -> Result<Self> {
        let n = self.dim();
        Self::new(CMatrix::identity(n, n) - &self.matrix)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// `⟨s|Π|s⟩`.
    pub fn probability(&self, state: &PureState) -> Result<f64> {
        check_dim(self.dim(), state.dim())?;
        let v = state.as_vector();
        Ok(v.dotc(&(&self.matrix * v)).re.max(0.0))
    }
}

/// Outcome probabilities of a complete POVM. Incomplete sets are rejected.
pub fn measure_povm(elements: &[PovmElement], state: &PureState) -> Result<Vec<f64>> {
    let first = elements
        .first()
        .ok_or_else(|| crate::error::invalid("elements", "empty POVM"))?;
    let n = first.dim();
    let mut total = CMatrix::zeros(n, n);
    for e in elements {
        check_dim(n, e.dim())?;
        total += &e.matrix;
    }
    let defect = (total - CMatrix::identity(n, n))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if defect > PSD_TOL {
        return Err(Error::IncompletePovm(defect));
    }
    elements.iter().map(|e| e.probability(state)).collect()
}

/// Samples angles of a pure qubit state uniformly over the Bloch sphere.
pub fn sample_bloch_uniform<R: Rng + ?Sized>(rng: &mut R) -> BlochAngles {
    let cos_theta: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..2.0 * PI);
    BlochAngles {
        theta: cos_theta.acos(),
        phi,
    }
}

/// Seeded generator used throughout the crate.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent substream `stream` of the generator seeded with `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < EXACT_TOL
    }

    #[test]
    fn tensor_product_ordering() {
        let zero = PureState::basis(2, 0);
        let one = PureState::basis(2, 1);
        assert_eq!(tensor_product(&zero, &zero), PureState::basis(4, 0));
        assert_eq!(tensor_product(&one, &zero), PureState::basis(4, 2));

        let q = PureState::qubit(c(0.6, 0.0), c(0.0, 0.8)).unwrap();
        let t = tensor_product(&q, &one);
        let expected = [c(0.0, 0.0), c(0.6, 0.0), c(0.0, 0.0), c(0.0, 0.8)];
        for (x, y) in t.amplitudes().iter().zip(expected) {
            assert!(close(*x, y));
        }
    }

    #[test]
    fn zero_vector_is_rejected() {
        assert_eq!(PureState::from_real(&[0.0, 0.0]), Err(Error::ZeroNorm));
        assert_eq!(PureState::from_real(&[1.0]), Err(Error::DimensionTooSmall(1)));
    }

    #[test]
    fn identity_operation_keeps_state() {
        let s = PureState::from_real(&[1.0, 2.0, 2.0]).unwrap();
        let out = QuantumOperation::identity(3).apply(&s).unwrap();
        assert_eq!(out.len(), 1);
        assert!((out[0].probability - 1.0).abs() < EXACT_TOL);
        assert!((out[0].state.as_ref().unwrap().overlap(&s).unwrap() - 1.0).abs() < EXACT_TOL);
    }

    #[test]
    fn projector_operation() {
        let s = PureState::qubit(c(0.6, 0.0), c(0.8, 0.0)).unwrap();
        let p0 = PovmElement::projector(2, &[0]).matrix().clone();
        let op = QuantumOperation::new(2, 2, vec![p0]).unwrap();
        let out = op.apply(&s).unwrap();
        assert!((out[0].probability - 0.36).abs() < EXACT_TOL);
        assert_eq!(out[0].state.as_ref().unwrap(), &PureState::basis(2, 0));

        let zero_branch = op.apply(&PureState::basis(2, 1)).unwrap();
        assert_eq!(zero_branch[0].state, None);
        assert_eq!(zero_branch[0].probability, 0.0);
    }

    #[test]
    fn operation_rejects_amplifying_elements() {
        let k = CMatrix::identity(2, 2) * c(1.1, 0.0);
        assert!(matches!(
            QuantumOperation::new(2, 2, vec![k]),
            Err(Error::NotTraceNonIncreasing(_))
        ));
        let wrong_shape = CMatrix::identity(3, 2);
        assert!(matches!(
            QuantumOperation::new(2, 2, vec![wrong_shape]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn apply_rejects_dimension_mismatch() {
        let s = PureState::basis(3, 0);
        assert!(QuantumOperation::identity(2).apply(&s).is_err());
    }

    #[test]
    fn povm_rejects_incomplete_set() {
        let p0 = PovmElement::projector(3, &[0]);
        let p1 = PovmElement::projector(3, &[1]);
        assert!(matches!(
            measure_povm(&[p0, p1], &PureState::basis(3, 0)),
            Err(Error::IncompletePovm(_))
        ));
    }

    #[test]
    fn povm_element_rejects_negative_matrix() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0, 0.0), c(-0.5, 0.0)]));
        assert!(matches!(PovmElement::new(m), Err(Error::NotPositive(_))));
    }

    #[test]
    fn partial_trace_basics() {
        let zz = PureState::basis(4, 0).to_density();
        let kept = partial_trace(&zz, (2, 2), Keep::First).unwrap();
        assert_eq!(kept, PureState::basis(2, 0).to_density());

        let bell = PureState::from_real(&[1.0, 0.0, 0.0, 1.0]).unwrap().to_density();
        let kept = partial_trace(&bell, (2, 2), Keep::Second).unwrap();
        let half = DensityMatrix::maximally_mixed(2);
        assert!((kept.matrix() - half.matrix()).norm() < EXACT_TOL);

        assert!(partial_trace(&bell, (3, 2), Keep::First).is_err());
    }

    #[test]
    fn fidelity_basics() {
        let plus = PureState::from_real(&[1.0, 1.0]).unwrap();
        let minus = PureState::from_real(&[1.0, -1.0]).unwrap();
        assert!((fidelity(&plus, &plus.to_density()).unwrap() - 1.0).abs() < EXACT_TOL);
        let half = fidelity(&PureState::basis(2, 0), &DensityMatrix::maximally_mixed(2)).unwrap();
        assert!((half - 0.5).abs() < EXACT_TOL);
        assert!(fidelity(&plus, &minus.to_density()).unwrap().abs() < EXACT_TOL);
        assert!(fidelity(&PureState::basis(3, 0), &plus.to_density()).is_err());
    }

    #[test]
    fn density_matrix_validation() {
        let not_hermitian = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.1, 0.0), c(0.0, 0.0), c(0.5, 0.0)]);
        assert!(matches!(DensityMatrix::new(not_hermitian), Err(Error::NotHermitian(_))));
        let bad_trace = CMatrix::identity(2, 2);
        assert!(matches!(DensityMatrix::new(bad_trace), Err(Error::BadTrace(_))));
        let negative = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.5, 0.0), c(-0.5, 0.0)]));
        assert!(matches!(DensityMatrix::new(negative), Err(Error::NotPositive(_))));
    }

    #[test]
    fn bloch_angle_validation() {
        assert!(BlochAngles::new(-0.1, 0.0).is_err());
        assert!(BlochAngles::new(0.0, 2.0 * PI).is_err());
        let a = BlochAngles::from_degrees(90.0, 360.0).unwrap();
        assert_eq!(a.phi, 0.0);
        let a = BlochAngles::from_degrees(180.0, -90.0).unwrap();
        assert!((a.phi - 1.5 * PI).abs() < EXACT_TOL);
    }

    #[test]
    fn bloch_sampling_moments_and_determinism() {
        let mut rng = seeded_rng(2024);
        let n = 100_000;
        let (mut cos_sum, mut pop_sum) = (0.0, 0.0);
        for _ in 0..n {
            let a = sample_bloch_uniform(&mut rng);
            assert!((0.0..=PI).contains(&a.theta) && (0.0..2.0 * PI).contains(&a.phi));
            cos_sum += a.theta.cos();
            pop_sum += (a.theta / 2.0).cos().powi(2);
        }
        assert!((cos_sum / n as f64).abs() < 0.01);
        assert!((pop_sum / n as f64 - 0.5).abs() < 0.005);

        let draw = |seed| {
            let mut rng = seeded_rng(seed);
            (0..100).map(|_| sample_bloch_uniform(&mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(42), draw(42));
        assert_ne!(draw(42), draw(43));
    }

    fn arb_state(dim: usize) -> impl Strategy<Value = PureState> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim)
            .prop_filter("nonzero", |v| v.iter().map(|(a, b)| a * a + b * b).sum::<f64>() > 1e-3)
            .prop_map(|v| PureState::new(v.into_iter().map(|(a, b)| c(a, b)).collect()).unwrap())
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(s in arb_state(5)) {
            let once = s.normalize();
            let twice = once.normalize();
            prop_assert!((norm_sqr(once.as_vector()) - 1.0).abs() < EXACT_TOL);
            prop_assert!((once.as_vector() - twice.as_vector()).norm() < EXACT_TOL);
        }

        #[test]
        fn partial_trace_of_product_state(a in arb_state(2), b in arb_state(3)) {
            let rho = tensor_product(&a, &b).to_density();
            let first = partial_trace(&rho, (2, 3), Keep::First).unwrap();
            let second = partial_trace(&rho, (2, 3), Keep::Second).unwrap();
            prop_assert!((first.matrix() - a.to_density().matrix()).norm() < EXACT_TOL);
            prop_assert!((second.matrix() - b.to_density().matrix()).norm() < EXACT_TOL);
        }

        #[test]
        fn fidelity_ignores_global_phase(a in arb_state(3), b in arb_state(3), phase in 0.0f64..6.3) {
            let rho = b.to_density();
            let f = fidelity(&a, &rho).unwrap();
            let g = fidelity(&a.with_global_phase(phase), &rho).unwrap();
            prop_assert!((f - g).abs() < EXACT_TOL);
        }

        #[test]
        fn complete_povm_probabilities_sum_to_one(s in arb_state(4), split in 1usize..4) {
            let low: Vec<usize> = (0..split).collect();
            let high: Vec<usize> = (split..4).collect();
            let povm = [PovmElement::projector(4, &low), PovmElement::projector(4, &high)];
            let p = measure_povm(&povm, &s).unwrap();
            prop_assert!(p.iter().all(|&x| x >= 0.0));
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < PSD_TOL);
        }

        #[test]
        fn operations_never_exceed_unit_probability(s in arb_state(3), w in 0.0f64..1.0) {
            let k0 = CMatrix::from_diagonal(&CVector::from_vec(vec![c(w.sqrt(), 0.0), c(1.0, 0.0), c(0.0, 0.0)]));
            let k1 = CMatrix::from_diagonal(&CVector::from_vec(vec![c((1.0 - w).sqrt(), 0.0), c(0.0, 0.0), c(0.5, 0.0)]));
            let op = QuantumOperation::new(3, 3, vec![k0, k1]).unwrap();
            let total = total_probability(&op.apply(&s).unwrap());
            prop_assert!(total <= 1.0 + PSD_TOL);
        }
    }
}
