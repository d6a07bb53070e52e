//! Bipartite pure states of `H^N ⊗ H^N` as square arrays.
//!
//! A state `|Ψ> = ψ^α |e_α>` with composite index `α = iN + j` (row-major,
//! zero-based) is written `ψ^{(ij)} = Γ^{ij} / √N`, so that `Γ` is unitary
//! exactly when the state is maximally entangled, and `Γ` has rank one
//! exactly when the state is a product.

use num_complex::Complex64 as C64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{svd, ComplexMatrix};
use crate::states::{haar_unitary, DensityMatrix, StateVector, UNITARY_TOL};

/// Square-array form `Γ^{ij}` of a bipartite state.
///
/// The array is held as `Γ/√N` (the reshaped amplitudes) so that the state
/// round trip is exact; [`GammaArray::entries`] rescales on demand.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaArray {
    amplitudes: ComplexMatrix,
}

impl GammaArray {
    /// Wraps `Γ` itself (not divided by `√N`).
    pub fn new(gamma: ComplexMatrix) -> Result<Self> {
        if !gamma.is_square() {
            return Err(Error::NotSquare(gamma.rows(), gamma.cols()));
        }
        let n = gamma.rows();
        Ok(Self {
            amplitudes: gamma.scale_real(1.0 / (n as f64).sqrt()),
        })
    }

    /// Wraps the reshaped amplitudes `Γ/√N` directly.
    pub fn from_amplitudes(amplitudes: ComplexMatrix) -> Result<Self> {
        if !amplitudes.is_square() {
            return Err(Error::NotSquare(amplitudes.rows(), amplitudes.cols()));
        }
        Ok(Self { amplitudes })
    }

    /// Local dimension `N`.
    pub fn n(&self) -> usize {
        self.amplitudes.rows()
    }

    /// `Γ^{ij}`.
    pub fn entries(&self) -> ComplexMatrix {
        self.amplitudes.scale_real((self.n() as f64).sqrt())
    }

    /// `Γ/√N`, the amplitudes arranged as an `N x N` array.
    pub fn amplitudes(&self) -> &ComplexMatrix {
        &self.amplitudes
    }

    /// `Tr(ΓΓ^†)/N`, equal to `ψ·ψ̄`.
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.frobenius_norm().powi(2)
    }

    /// `max |ΓΓ^† - 1|`.
    pub fn unitarity_defect(&self) -> f64 {
        let g = self.entries();
        g.matmul(&g.adjoint())
            .max_abs_diff(&ComplexMatrix::identity(self.n()))
    }
}

/// Reshapes a state of dimension `N²` into its `Γ` array.
pub fn gamma_of_state(psi: &StateVector) -> Result<GammaArray> {
    let d = psi.dim();
    let n = (d as f64).sqrt().round() as usize;
    if n * n != d {
        return Err(Error::NotSquareDim(d));
    }
    Ok(GammaArray {
        amplitudes: ComplexMatrix::from_vec(n, n, psi.amplitudes().to_vec())?,
    })
}

/// Inverse of [`gamma_of_state`]: `ψ = vec(Γ)/√N`.
pub fn state_of_gamma(gamma: &GammaArray) -> Result<StateVector> {
    StateVector::new(gamma.amplitudes.as_slice().to_vec())
}

/// Singular-value data of `Γ/√N = U diag(σ) V^†`.
#[derive(Clone, Debug)]
pub struct SchmidtDecomposition {
    /// Schmidt coefficients, descending.
    pub coefficients: Vec<f64>,
    pub left: ComplexMatrix,
    pub right: ComplexMatrix,
    /// Number of coefficients above [`SchmidtDecomposition::RANK_TOL`] times the largest.
    pub rank: usize,
    /// `σ_k²`: the common spectrum of both reduced states.
    pub reduced_spectrum: Vec<f64>,
}

impl SchmidtDecomposition {
    pub const RANK_TOL: f64 = 1e-8;

    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.coefficients.len();
        let us = ComplexMatrix::from_fn(self.left.rows(), n, |i, j| self.left[(i, j)] * self.coefficients[j]);
        us.matmul(&self.right.adjoint())
    }
}

pub fn schmidt(gamma: &GammaArray) -> SchmidtDecomposition {
    let d = svd(&gamma.amplitudes);
    let rank = d.rank(SchmidtDecomposition::RANK_TOL, 0.0);
    let reduced_spectrum = d.s.iter().map(|s| s * s).collect();
    SchmidtDecomposition {
        coefficients: d.s,
        left: d.u,
        right: d.v,
        rank,
        reduced_spectrum,
    }
}

/// True when `σ_2/σ_1 <= tol`.
pub fn is_product(gamma: &GammaArray, tol: f64) -> bool {
    let s = schmidt(gamma).coefficients;
    match s.as_slice() {
        [] => false,
        [_] => true,
        [first, second, ..] => *first > 0.0 && second / first <= tol,
    }
}

/// Unit factors `φ^i`, `λ^j` of a product state.
#[derive(Clone, Debug, PartialEq)]
pub struct SegreFactors {
    phi: StateVector,
    lambda: StateVector,
}

impl SegreFactors {
    /// Normalizes both factors; they must share a dimension.
    pub fn new(phi: &StateVector, lambda: &StateVector) -> Result<Self> {
        if phi.dim() != lambda.dim() {
            return Err(Error::DimensionMismatch {
                expected: phi.dim(),
                found: lambda.dim(),
            });
        }
        Ok(Self {
            phi: phi.normalized(),
            lambda: lambda.normalized(),
        })
    }

    pub fn phi(&self) -> &StateVector {
        &self.phi
    }

    pub fn lambda(&self) -> &StateVector {
        &self.lambda
    }
}

/// `Ψ^{(ij)} = φ^i λ^j`.
pub fn segre_embed(f: &SegreFactors) -> StateVector {
    let amps = segre_product(f.phi.amplitudes(), f.lambda.amplitudes());
    StateVector::new(amps).expect("product of unit vectors is a unit vector")
}

pub(crate) fn segre_product(phi: &[C64], lambda: &[C64]) -> Vec<C64> {
    phi.iter()
        .flat_map(|a| lambda.iter().map(move |b| a * b))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    /// Trace over the first factor, leaving the state of the second.
    First,
    /// Trace over the second factor, leaving the state of the first.
    Second,
}

/// Reduced density matrix: `ΓΓ^†/N` when tracing out the second factor,
/// `ΓᵀΓ*/N` when tracing out the first.
pub fn partial_trace(gamma: &GammaArray, side: Subsystem) -> DensityMatrix {
    let a = &gamma.amplitudes;
    let m = match side {
        Subsystem::Second => a.matmul(&a.adjoint()),
        Subsystem::First => a.transpose().matmul(&a.conj()),
    };
    DensityMatrix::from_trusted(m)
}

/// True when `max |ΓΓ^† - 1| <= tol`.
pub fn is_maximally_entangled(gamma: &GammaArray, tol: f64) -> bool {
    gamma.unitarity_defect() <= tol
}

/// A Haar-random point of the maximally entangled set (`Γ` a Haar unitary).
pub fn random_max_entangled<R: Rng + ?Sized>(n: usize, rng: &mut R) -> GammaArray {
    assert!(n >= 2, "random_max_entangled needs n >= 2");
    GammaArray::new(haar_unitary(n, rng)).expect("square")
}

/// `(U ⊗ V)Ψ`, i.e. `Γ → U Γ Vᵀ`.
pub fn local_unitary_act(u: &ComplexMatrix, v: &ComplexMatrix, gamma: &GammaArray) -> Result<GammaArray> {
    let n = gamma.n();
    for m in [u, v] {
        if m.rows() != n || m.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: m.rows(),
            });
        }
        m.require_unitary(UNITARY_TOL)?;
    }
    Ok(GammaArray {
        amplitudes: u.matmul(&gamma.amplitudes).matmul(&v.transpose()),
    })
}

/// `-Σ σ_k² ln σ_k²` with `0 ln 0 = 0`, in `[0, ln N]`.
pub fn entanglement_entropy(gamma: &GammaArray) -> f64 {
    let total = gamma.norm_sqr();
    let s: f64 = schmidt(gamma)
        .reduced_spectrum
        .iter()
        .map(|p| p / total)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum();
    s.clamp(0.0, (gamma.n() as f64).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{normalize, projector, random_state};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, LN_2, SQRT_2};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn bell() -> StateVector {
        StateVector::from_real(&[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2]).unwrap()
    }

    #[test]
    fn gamma_examples() {
        let g = gamma_of_state(&StateVector::basis(4, 0)).unwrap();
        let want = ComplexMatrix::diag_real(&[SQRT_2, 0.0]);
        assert!(g.entries().max_abs_diff(&want) < 1e-15);

        let g = gamma_of_state(&bell()).unwrap();
        assert!(g.entries().max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15);

        assert!(matches!(
            gamma_of_state(&StateVector::basis(3, 0)),
            Err(Error::NotSquareDim(3))
        ));
        assert!(matches!(
            GammaArray::new(ComplexMatrix::zeros(2, 3)),
            Err(Error::NotSquare(2, 3))
        ));
    }

    #[test]
    fn state_round_trip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for n in [2, 3, 4] {
            for _ in 0..100 {
                let psi = random_state(n * n, &mut rng);
                let back = state_of_gamma(&gamma_of_state(&psi).unwrap()).unwrap();
                assert_eq!(back, psi);
            }
        }
    }

    #[test]
    fn schmidt_examples() {
        let s = schmidt(&gamma_of_state(&bell()).unwrap());
        for x in &s.coefficients {
            assert!((x - FRAC_1_SQRT_2).abs() < 1e-15);
        }
        assert_eq!(s.rank, 2);

        let prod = segre_embed(
            &SegreFactors::new(
                &normalize(&[c(1.0, 0.2), c(0.3, -0.5), c(0.0, 1.0)]).unwrap(),
                &normalize(&[c(0.2, 0.0), c(0.1, 0.7), c(-0.4, 0.4)]).unwrap(),
            )
            .unwrap(),
        );
        let s = schmidt(&gamma_of_state(&prod).unwrap());
        assert!((s.coefficients[0] - 1.0).abs() < 1e-14);
        assert!(s.coefficients[1..].iter().all(|x| x.abs() < 1e-14));
        assert_eq!(s.rank, 1);

        // repeated coefficients
        let g = GammaArray::new(ComplexMatrix::diag_real(&[1.0, 1.0, 1.0, 0.0]).scale_real((4.0f64 / 3.0).sqrt())).unwrap();
        let s = schmidt(&g);
        assert!(s.reconstruct().max_abs_diff(g.amplitudes()) < 1e-10);
        assert!((s.coefficients.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn product_detection() {
        assert!(is_product(&gamma_of_state(&StateVector::basis(4, 0)).unwrap(), 1e-8));
        assert!(!is_product(&gamma_of_state(&bell()).unwrap(), 1e-8));

        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let base = ComplexMatrix::outer(
            &[c(0.6, 0.0), c(0.0, 0.8)],
            &[c(0.0, 1.0), c(0.0, 0.0)],
        );
        let noise = ComplexMatrix::from_fn(2, 2, |_, _| c(rng.random_range(-1.0..1.0) * 1e-12, 0.0));
        let g = GammaArray::from_amplitudes(&base + &noise).unwrap();
        assert!(is_product(&g, 1e-8));
    }

    #[test]
    fn segre_examples() {
        let e0 = StateVector::basis(2, 0);
        assert_eq!(segre_embed(&SegreFactors::new(&e0, &e0).unwrap()), StateVector::basis(4, 0));

        let plus = normalize(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let minus = normalize(&[c(1.0, 0.0), c(-1.0, 0.0)]).unwrap();
        let psi = segre_embed(&SegreFactors::new(&plus, &minus).unwrap());
        for (z, want) in psi.amplitudes().iter().zip([0.5, -0.5, 0.5, -0.5]) {
            assert!((z - c(want, 0.0)).norm() < 1e-15);
        }

        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let phi = random_state(3, &mut rng);
        let lambda = random_state(3, &mut rng);
        let psi = segre_embed(&SegreFactors::new(&phi, &lambda).unwrap());
        let g = gamma_of_state(&psi).unwrap();
        assert!(is_product(&g, 1e-10));
        let reduced = partial_trace(&g, Subsystem::Second);
        assert!(reduced.matrix().max_abs_diff(projector(&phi).matrix()) < 1e-14);
        assert!((reduced.purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partial_trace_examples() {
        let bell_g = gamma_of_state(&bell()).unwrap();
        for side in [Subsystem::First, Subsystem::Second] {
            let r = partial_trace(&bell_g, side);
            assert!(r.matrix().max_abs_diff(&DensityMatrix::maximally_mixed(2).matrix().clone()) < 1e-15);
        }
        let r = partial_trace(&gamma_of_state(&StateVector::basis(4, 0)).unwrap(), Subsystem::Second);
        assert_eq!(r.matrix(), &ComplexMatrix::diag_real(&[1.0, 0.0]));

        // tracing out the first factor of |0>|+> leaves |+><+|
        let plus = normalize(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let psi = segre_embed(&SegreFactors::new(&StateVector::basis(2, 0), &plus).unwrap());
        let r = partial_trace(&gamma_of_state(&psi).unwrap(), Subsystem::First);
        assert!(r.matrix().max_abs_diff(projector(&plus).matrix()) < 1e-15);
    }

    #[test]
    fn maximal_entanglement_examples() {
        let id = GammaArray::new(ComplexMatrix::identity(3)).unwrap();
        assert!(is_maximally_entangled(&id, 1e-12));
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        assert!(is_maximally_entangled(&GammaArray::new(haar_unitary(4, &mut rng)).unwrap(), 1e-10));
        assert!(!is_maximally_entangled(&gamma_of_state(&StateVector::basis(4, 0)).unwrap(), 1e-3));
    }

    #[test]
    fn sampled_maximally_entangled_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        for n in [2, 3, 4] {
            for _ in 0..100 {
                let g = random_max_entangled(n, &mut rng);
                assert!(is_maximally_entangled(&g, 1e-10));
                let r = partial_trace(&g, Subsystem::Second);
                assert!(r.matrix().max_abs_diff(DensityMatrix::maximally_mixed(n).matrix()) < 1e-10);
                assert!((entanglement_entropy(&g) - (n as f64).ln()).abs() < 1e-10);
                assert!((g.norm_sqr() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn local_unitaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(46);
        let g = gamma_of_state(&random_state(9, &mut rng)).unwrap();
        let same = local_unitary_act(&ComplexMatrix::identity(3), &ComplexMatrix::identity(3), &g).unwrap();
        assert_eq!(same, g);

        let sigma = schmidt(&g).coefficients;
        for _ in 0..100 {
            let u = haar_unitary(3, &mut rng);
            let v = haar_unitary(3, &mut rng);
            let moved = local_unitary_act(&u, &v, &g).unwrap();
            for (a, b) in sigma.iter().zip(schmidt(&moved).coefficients) {
                assert!((a - b).abs() < 1e-10);
            }
            // the Γ-array action matches (U ⊗ V) on the state vector
            let direct = u.kron(&v).mat_vec(state_of_gamma(&g).unwrap().amplitudes());
            let via = state_of_gamma(&moved).unwrap();
            for (a, b) in direct.iter().zip(via.amplitudes()) {
                assert!((a - b).norm() < 1e-13);
            }
        }

        let u = haar_unitary(2, &mut rng);
        let v = haar_unitary(2, &mut rng);
        let orbit = local_unitary_act(&u, &v, &GammaArray::new(ComplexMatrix::identity(2)).unwrap()).unwrap();
        assert!(orbit.entries().max_abs_diff(&u.matmul(&v.transpose())) < 1e-14);
        assert!(is_maximally_entangled(&orbit, 1e-10));

        assert!(matches!(
            local_unitary_act(&ComplexMatrix::diag_real(&[2.0, 1.0]), &v, &orbit),
            Err(Error::NotUnitary(_))
        ));
    }

    #[test]
    fn entropy_endpoints() {
        assert_eq!(entanglement_entropy(&gamma_of_state(&StateVector::basis(4, 0)).unwrap()), 0.0);
        assert!((entanglement_entropy(&gamma_of_state(&bell()).unwrap()) - LN_2).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for _ in 0..50 {
            let e = entanglement_entropy(&gamma_of_state(&random_state(16, &mut rng)).unwrap());
            assert!((0.0..=4f64.ln()).contains(&e));
        }
    }
}
