//! Quantum states and observables on a finite-dimensional Hilbert space:
//! state vectors and their rays, density matrices, Hermitian observables,
//! classical probability vectors, and Haar sampling.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{self, eigh, qr, ComplexMatrix};

/// Norms below this are treated as the zero vector.
pub const ZERO_NORM: f64 = 1e-14;
/// Hermiticity tolerance for observables and density matrices.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Lowest admissible eigenvalue of a density matrix (Jacobi round-off).
pub const POSITIVITY_TOL: f64 = 1e-10;
/// Admissible deviation of a density matrix trace from one.
pub const TRACE_TOL: f64 = 1e-10;
/// Unitarity tolerance for matrices handed in by callers.
pub const UNITARY_TOL: f64 = 1e-10;

/// A nonzero complex vector `ψ^α`, not necessarily normalized.
#[derive(Clone, Debug)]
pub struct StateVector {
    amplitudes: Vec<C64>,
    norm_sqr: f64,
}

impl PartialEq for StateVector {
    fn eq(&self, other: &Self) -> bool {
        self.amplitudes == other.amplitudes
    }
}

impl StateVector {
    /// Wraps raw amplitudes without rescaling them.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm_sqr = linalg::norm_sqr(&amplitudes);
        if norm_sqr.sqrt() < ZERO_NORM {
            return Err(Error::ZeroVector(norm_sqr.sqrt()));
        }
        Ok(Self {
            amplitudes,
            norm_sqr,
        })
    }

    /// Real-valued amplitudes, convenient in tests and examples.
    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// The `k`-th standard basis vector in dimension `n`.
    pub fn basis(n: usize, k: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); n];
        amps[k] = C64::new(1.0, 0.0);
        Self {
            amplitudes: amps,
            norm_sqr: 1.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    /// `ψ·ψ̄ = <ψ|ψ>`.
    pub fn norm_sqr(&self) -> f64 {
        self.norm_sqr
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr.sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        linalg::inner(&self.amplitudes, &other.amplitudes)
    }

    /// Unit-norm rescaling of this state.
    pub fn normalized(&self) -> StateVector {
        let s = 1.0 / self.norm();
        StateVector {
            amplitudes: self.amplitudes.iter().map(|z| z * s).collect(),
            norm_sqr: 1.0,
        }
    }

    pub fn scaled(&self, z: C64) -> Result<StateVector> {
        StateVector::new(self.amplitudes.iter().map(|a| a * z).collect())
    }

    pub fn apply(&self, m: &ComplexMatrix) -> Result<StateVector> {
        if m.cols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: m.cols(),
                found: self.dim(),
            });
        }
        StateVector::new(m.mat_vec(&self.amplitudes))
    }

    /// Largest componentwise distance to `other`.
    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Scales `v` to unit norm.
pub fn normalize(v: &[C64]) -> Result<StateVector> {
    Ok(StateVector::new(v.to_vec())?.normalized())
}

/// A ray `[ψ]`: the class of `zψ` for all nonzero complex `z`, stored through
/// a canonical unit representative whose first non-negligible component is
/// real and positive.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectivePoint {
    representative: StateVector,
}

impl ProjectivePoint {
    const LEADING_TOL: f64 = 1e-12;

    pub fn new(state: &StateVector) -> Self {
        let unit = state.normalized();
        let lead = unit
            .amplitudes
            .iter()
            .find(|z| z.norm() > Self::LEADING_TOL)
            .copied()
            .unwrap_or(C64::new(1.0, 0.0));
        let phase = lead.conj() / lead.norm();
        let amplitudes = unit.amplitudes.iter().map(|z| z * phase).collect();
        Self {
            representative: StateVector {
                amplitudes,
                norm_sqr: 1.0,
            },
        }
    }

    pub fn representative(&self) -> &StateVector {
        &self.representative
    }

    /// Componentwise distance between canonical representatives.
    pub fn distance_to(&self, other: &ProjectivePoint) -> f64 {
        self.representative.max_abs_diff(&other.representative)
    }
}

/// A Hermitian matrix `A = A^†`, used both for random variables and for
/// Hamiltonians.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    matrix: ComplexMatrix,
}

impl Observable {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, HERMITIAN_TOL)
    }

    pub fn with_tolerance(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare(matrix.rows(), matrix.cols()));
        }
        let defect = matrix.hermiticity_defect();
        if defect > tol {
            return Err(Error::NotHermitian(defect));
        }
        Ok(Self { matrix })
    }

    /// Hermitian part `(M + M^†)/2` of an arbitrary square matrix.
    pub fn hermitian_part(m: &ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare(m.rows(), m.cols()));
        }
        Ok(Self {
            matrix: (m + &m.adjoint()).scale_real(0.5),
        })
    }

    pub fn diagonal(values: &[f64]) -> Self {
        Self {
            matrix: ComplexMatrix::diag_real(values),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(n),
        }
    }

    pub fn zero(n: usize) -> Self {
        Self {
            matrix: ComplexMatrix::zeros(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// `<ψ|A|ψ>` for a normalized copy of `ψ`.
    pub fn expectation_in(&self, psi: &StateVector) -> Result<f64> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: psi.dim(),
            });
        }
        let a_psi = self.matrix.mat_vec(psi.amplitudes());
        Ok(linalg::inner(psi.amplitudes(), &a_psi).re / psi.norm_sqr())
    }

    /// The observable `-i[A, B]`, Hermitian whenever `A` and `B` are.
    pub fn commutator_bracket(&self, other: &Observable) -> Result<Observable> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Observable::hermitian_part(&self.matrix.commutator(&other.matrix).scale(-C64::i()))
    }
}

pub fn pauli_x() -> Observable {
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    Observable {
        matrix: ComplexMatrix::from_vec(2, 2, vec![o, l, l, o]).unwrap(),
    }
}

pub fn pauli_y() -> Observable {
    let o = C64::new(0.0, 0.0);
    Observable {
        matrix: ComplexMatrix::from_vec(2, 2, vec![o, -C64::i(), C64::i(), o]).unwrap(),
    }
}

pub fn pauli_z() -> Observable {
    Observable::diagonal(&[1.0, -1.0])
}

/// Outcome of [`validate_density`].
#[derive(Clone, Debug, PartialEq)]
pub struct DensityDiagnostics {
    pub valid: bool,
    /// `max |M - M^†|`.
    pub hermiticity_defect: f64,
    /// Smallest eigenvalue of the Hermitian part.
    pub min_eigenvalue: f64,
    /// `|Tr M - 1|`, including any imaginary part of the trace.
    pub trace_defect: f64,
    /// Names of the failed conditions.
    pub failures: Vec<&'static str>,
}

/// Checks Hermiticity, positivity, and unit trace of `m`, each within `tol`.
pub fn validate_density(m: &ComplexMatrix, tol: f64) -> DensityDiagnostics {
    if !m.is_square() {
        return DensityDiagnostics {
            valid: false,
            hermiticity_defect: f64::INFINITY,
            min_eigenvalue: f64::NAN,
            trace_defect: f64::INFINITY,
            failures: vec!["square"],
        };
    }
    let hermiticity_defect = m.hermiticity_defect();
    let min_eigenvalue = eigh(m).values[0];
    let trace_defect = (m.trace() - C64::new(1.0, 0.0)).norm();
    let mut failures = Vec::new();
    if hermiticity_defect > tol {
        failures.push("hermiticity");
    }
    if min_eigenvalue < -tol {
        failures.push("positivity");
    }
    if trace_defect > tol {
        failures.push("trace");
    }
    DensityDiagnostics {
        valid: failures.is_empty(),
        hermiticity_defect,
        min_eigenvalue,
        trace_defect,
        failures,
    }
}

/// A density matrix: Hermitian, positive semidefinite, unit trace. For a
/// bipartite system the four-index `ρ^{ij}_{kl}` is the same matrix with
/// composite row index `(ij)` and column index `(kl)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare(matrix.rows(), matrix.cols()));
        }
        let diag = validate_density(&matrix, POSITIVITY_TOL);
        if diag.hermiticity_defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(diag.hermiticity_defect));
        }
        if !diag.valid {
            return Err(Error::InvalidDensity(format!(
                "{} (min eigenvalue {:e}, trace defect {:e})",
                diag.failures.join(", "),
                diag.min_eigenvalue,
                diag.trace_defect
            )));
        }
        Ok(Self { matrix })
    }

    /// Wraps a matrix known to be a density matrix up to round-off, forcing
    /// exact Hermiticity.
    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        let matrix = (&matrix + &matrix.adjoint()).scale_real(0.5);
        Self { matrix }
    }

    /// The maximally mixed state `1/n`.
    pub fn maximally_mixed(n: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(n).scale_real(1.0 / n as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Ascending eigenvalues.
    pub fn spectrum(&self) -> Vec<f64> {
        eigh(&self.matrix).values
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.matrix.matmul(&self.matrix).trace().re
    }
}

/// A probability vector on `N` outcomes.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalState {
    probabilities: Vec<f64>,
}

impl ClassicalState {
    pub fn new(probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.is_empty() {
            return Err(Error::InvalidClassicalState("empty".into()));
        }
        if let Some(p) = probabilities.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidClassicalState(format!("negative or non-finite entry {p}")));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidClassicalState(format!("sum is {total}")));
        }
        Ok(Self { probabilities })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }
}

/// Rank-one projector `ψψ^†/(ψ·ψ̄)`.
pub fn projector(s: &StateVector) -> DensityMatrix {
    let m = ComplexMatrix::outer(s.amplitudes(), s.amplitudes()).scale_real(1.0 / s.norm_sqr());
    DensityMatrix::from_trusted(m)
}

/// `Tr(ρ A)`.
pub fn expectation(rho: &DensityMatrix, a: &Observable) -> Result<f64> {
    if rho.dim() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: a.dim(),
        });
    }
    let n = rho.dim();
    let mut tr = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            tr += rho.matrix()[(i, k)] * a.matrix()[(k, i)];
        }
    }
    debug_assert!(
        tr.im.abs() <= 1e-12 * (1.0 + a.matrix().max_abs()),
        "Tr(ρA) has imaginary part {}",
        tr.im
    );
    Ok(tr.re)
}

/// `U ρ U^†`.
pub fn unitary_conjugate(rho: &DensityMatrix, u: &ComplexMatrix) -> Result<DensityMatrix> {
    if u.rows() != rho.dim() || u.cols() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: u.rows(),
        });
    }
    u.require_unitary(UNITARY_TOL)?;
    Ok(DensityMatrix::from_trusted(
        u.matmul(rho.matrix()).matmul(&u.adjoint()),
    ))
}

/// Complex standard Gaussian with `E|z|² = 1`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-distributed `n x n` unitary: QR of a Ginibre matrix, with the phases
/// of `R`'s diagonal moved into `Q` so that the factorization is unique.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    assert!(n >= 1, "haar_unitary needs n >= 1");
    let z = ComplexMatrix::from_fn(n, n, |_, _| complex_gaussian(rng));
    let (q, r) = qr(&z);
    let phases: Vec<C64> = (0..n)
        .map(|i| {
            let d = r[(i, i)];
            if d.norm() > 0.0 {
                d / d.norm()
            } else {
                C64::new(1.0, 0.0)
            }
        })
        .collect();
    ComplexMatrix::from_fn(n, n, |i, j| q[(i, j)] * phases[j])
}

/// Fubini-Study-uniform unit state (normalized complex Gaussian vector).
pub fn random_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> StateVector {
    assert!(n >= 1, "random_state needs n >= 1");
    loop {
        let v: Vec<C64> = (0..n).map(|_| complex_gaussian(rng)).collect();
        if let Ok(s) = normalize(&v) {
            return s;
        }
    }
}

/// Random Hermitian matrix with Gaussian entries (GUE up to scale).
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Observable {
    let g = ComplexMatrix::from_fn(n, n, |_, _| complex_gaussian(rng));
    Observable::hermitian_part(&g).expect("square by construction")
}

/// `diag(p_1, …, p_N)`.
pub fn classical_embed(p: &ClassicalState) -> DensityMatrix {
    DensityMatrix {
        matrix: ComplexMatrix::diag_real(p.probabilities()),
    }
}
