use num_complex::Complex64 as C64;

use crate::linalg::ComplexMatrix;

/// Generalized Gell-Mann basis of `su(N)`, normalized to `Tr(T_a T_b) = 2δ_ab`.
///
/// Ordering: for each pair `j < k` the symmetric generator followed by the
/// antisymmetric one, then the `N - 1` diagonal generators. For `N = 2`
/// this is `(σ_x, σ_y, σ_z)`.
#[derive(Clone, Debug)]
pub struct SuNBasis {
    n: usize,
    generators: Vec<ComplexMatrix>,
}

impl SuNBasis {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generators(&self) -> &[ComplexMatrix] {
        &self.generators
    }

    pub fn get(&self, a: usize) -> &ComplexMatrix {
        &self.generators[a]
    }

    /// `Σ_a c_a T_a`.
    pub fn combine(&self, coeffs: &[f64]) -> ComplexMatrix {
        assert_eq!(coeffs.len(), self.len());
        let mut out = ComplexMatrix::zeros(self.n, self.n);
        for (c, t) in coeffs.iter().zip(&self.generators) {
            for i in 0..self.n {
                for j in 0..self.n {
                    out[(i, j)] += t[(i, j)] * *c;
                }
            }
        }
        out
    }

    /// Coordinates `c_a = Tr(T_a M)/2` of a matrix in this basis (exact for
    /// traceless Hermitian `M`).
    pub fn coordinates(&self, m: &ComplexMatrix) -> Vec<f64> {
        self.generators
            .iter()
            .map(|t| 0.5 * t.matmul(m).trace().re)
            .collect()
    }

    /// `(max |Tr(T_a T_b) - 2δ_ab|, max Hermiticity defect, max |Tr T_a|)`.
    pub fn defects(&self) -> (f64, f64, f64) {
        let mut ortho: f64 = 0.0;
        for (a, ta) in self.generators.iter().enumerate() {
            for (b, tb) in self.generators.iter().enumerate() {
                let target = if a == b { 2.0 } else { 0.0 };
                ortho = ortho.max((ta.matmul(tb).trace() - target).norm());
            }
        }
        let herm = self
            .generators
            .iter()
            .map(|t| t.hermiticity_defect())
            .fold(0.0, f64::max);
        let trace = self
            .generators
            .iter()
            .map(|t| t.trace().norm())
            .fold(0.0, f64::max);
        (ortho, herm, trace)
    }
}

pub fn gellmann_basis(n: usize) -> SuNBasis {
    assert!(n >= 2, "su(N) needs N >= 2");
    let mut generators = Vec::with_capacity(n * n - 1);
    for j in 0..n {
        for k in (j + 1)..n {
            let mut s = ComplexMatrix::zeros(n, n);
            s[(j, k)] = C64::new(1.0, 0.0);
            s[(k, j)] = C64::new(1.0, 0.0);
            generators.push(s);
            let mut a = ComplexMatrix::zeros(n, n);
            a[(j, k)] = C64::new(0.0, -1.0);
            a[(k, j)] = C64::new(0.0, 1.0);
            generators.push(a);
        }
    }
    for l in 1..n {
        let scale = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut diag = vec![scale; l];
        diag.push(-(l as f64) * scale);
        diag.resize(n, 0.0);
        generators.push(ComplexMatrix::diag_real(&diag));
    }
    SuNBasis { n, generators }
}
