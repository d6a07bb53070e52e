use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64 as C64;

use super::basis::{gellmann_basis, SuNBasis};
use crate::bipartite::{segre_product, GammaArray, SegreFactors};
use crate::error::{Error, Result};
use crate::fubini_study::{fs_metric, fs_symplectic, horizontal_part};
use crate::linalg::{expm_i_hermitian_with_derivatives, norm_sqr, ComplexMatrix};
use crate::states::{StateVector, UNITARY_TOL};

/// A chart evaluated at one parameter value: the unit state and the
/// horizontal tangent vectors `∂ψ/∂θ_a`.
#[derive(Clone, Debug)]
pub struct ChartPoint {
    pub state: Vec<C64>,
    pub tangents: Vec<Vec<C64>>,
}

impl ChartPoint {
    pub fn state_vector(&self) -> StateVector {
        StateVector::new(self.state.clone()).expect("chart states are unit vectors")
    }

    /// Row-major `g(t_a, t_b)`.
    pub fn metric(&self) -> Vec<f64> {
        self.gram(fs_metric)
    }

    /// Row-major `Ω(t_a, t_b)`.
    pub fn symplectic(&self) -> Vec<f64> {
        self.gram(fs_symplectic)
    }

    fn gram(&self, form: fn(&[C64], &[C64], &[C64]) -> f64) -> Vec<f64> {
        let d = self.tangents.len();
        let mut m = vec![0.0; d * d];
        for a in 0..d {
            for b in 0..d {
                m[a * d + b] = form(&self.state, &self.tangents[a], &self.tangents[b]);
            }
        }
        m
    }
}

/// A parametrized submanifold of `CP^{N²-1}` on a coordinate box.
pub trait Chart: Sync {
    /// Complex dimension of the ambient Hilbert space.
    fn ambient_dim(&self) -> usize;

    fn param_dim(&self) -> usize;

    /// Closed coordinate box, one interval per parameter.
    fn domain(&self) -> &[(f64, f64)];

    /// Evaluates without checking the domain.
    fn eval_unchecked(&self, theta: &[f64]) -> ChartPoint;

    fn evaluate(&self, theta: &[f64]) -> Result<ChartPoint> {
        check_domain(self.domain(), theta)?;
        Ok(self.eval_unchecked(theta))
    }
}

pub(crate) fn check_domain(domain: &[(f64, f64)], theta: &[f64]) -> Result<()> {
    if theta.len() != domain.len() {
        return Err(Error::DimensionMismatch {
            expected: domain.len(),
            found: theta.len(),
        });
    }
    for (index, (&value, &(lo, hi))) in theta.iter().zip(domain).enumerate() {
        if !(lo..=hi).contains(&value) {
            return Err(Error::OutOfDomain { index, value });
        }
    }
    Ok(())
}

/// A chart on the maximally entangled orbit, `Γ(θ) = U(θ) Γ0` with `U(θ)`
/// special unitary.
pub trait OrbitChart: Chart {
    fn base(&self) -> &GammaArray;

    /// `U(θ)` and its partial derivatives `∂_a U`.
    fn group_element(&self, theta: &[f64]) -> (ComplexMatrix, Vec<ComplexMatrix>);
}

fn orbit_point(base: &GammaArray, u: &ComplexMatrix, du: &[ComplexMatrix]) -> ChartPoint {
    let a0 = base.amplitudes();
    let state = u.matmul(a0).into_vec();
    let ns = norm_sqr(&state);
    let tangents = du
        .iter()
        .map(|d| horizontal_part(&state, ns, d.matmul(a0).as_slice()))
        .collect();
    ChartPoint { state, tangents }
}

fn require_unitary_gamma(gamma0: &GammaArray) -> Result<()> {
    let defect = gamma0.unitarity_defect();
    if defect > UNITARY_TOL {
        return Err(Error::NotUnitary(defect));
    }
    Ok(())
}

/// Exponential chart `θ ↦ exp(i Σ θ_a T_a) Γ0` around a maximally entangled
/// base point.
#[derive(Clone, Debug)]
pub struct MaxEntChart {
    gamma0: GammaArray,
    basis: SuNBasis,
    domain: Vec<(f64, f64)>,
}

impl MaxEntChart {
    pub fn new(gamma0: GammaArray, basis: SuNBasis) -> Result<Self> {
        if basis.n() != gamma0.n() {
            return Err(Error::DimensionMismatch {
                expected: gamma0.n(),
                found: basis.n(),
            });
        }
        require_unitary_gamma(&gamma0)?;
        let domain = vec![(-FRAC_PI_2, FRAC_PI_2); basis.len()];
        Ok(Self {
            gamma0,
            basis,
            domain,
        })
    }

    pub fn basis(&self) -> &SuNBasis {
        &self.basis
    }
}

pub fn maxent_chart(gamma0: &GammaArray, basis: &SuNBasis) -> Result<MaxEntChart> {
    MaxEntChart::new(gamma0.clone(), basis.clone())
}

impl Chart for MaxEntChart {
    fn ambient_dim(&self) -> usize {
        self.gamma0.n().pow(2)
    }

    fn param_dim(&self) -> usize {
        self.basis.len()
    }

    fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    fn eval_unchecked(&self, theta: &[f64]) -> ChartPoint {
        let (u, du) = self.group_element(theta);
        orbit_point(&self.gamma0, &u, &du)
    }
}

impl OrbitChart for MaxEntChart {
    fn base(&self) -> &GammaArray {
        &self.gamma0
    }

    fn group_element(&self, theta: &[f64]) -> (ComplexMatrix, Vec<ComplexMatrix>) {
        expm_i_hermitian_with_derivatives(&self.basis.combine(theta), self.basis.generators())
    }
}

/// Euler-angle chart of the `N = 2` orbit,
/// `U = exp(iασ_z/2) exp(iβσ_y/2) exp(iγσ_z/2)` on
/// `[0, 2π) x [0, π) x [0, 2π)`, which covers `SU(2)/Z_2` once.
#[derive(Clone, Debug)]
pub struct EulerChart {
    gamma0: GammaArray,
    domain: [(f64, f64); 3],
}

impl EulerChart {
    pub fn new(gamma0: GammaArray) -> Result<Self> {
        if gamma0.n() != 2 {
            return Err(Error::Unsupported(format!(
                "the Euler-angle chart needs N = 2, got {}",
                gamma0.n()
            )));
        }
        require_unitary_gamma(&gamma0)?;
        Ok(Self {
            gamma0,
            domain: [(0.0, 2.0 * PI), (0.0, PI), (0.0, 2.0 * PI)],
        })
    }
}

impl Chart for EulerChart {
    fn ambient_dim(&self) -> usize {
        4
    }

    fn param_dim(&self) -> usize {
        3
    }

    fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    fn eval_unchecked(&self, theta: &[f64]) -> ChartPoint {
        let (u, du) = self.group_element(theta);
        orbit_point(&self.gamma0, &u, &du)
    }
}

impl OrbitChart for EulerChart {
    fn base(&self) -> &GammaArray {
        &self.gamma0
    }

    fn group_element(&self, theta: &[f64]) -> (ComplexMatrix, Vec<ComplexMatrix>) {
        let (alpha, beta, gamma) = (theta[0], theta[1], theta[2]);
        let half_z = |angle: f64| {
            ComplexMatrix::diag(&[C64::from_polar(1.0, angle / 2.0), C64::from_polar(1.0, -angle / 2.0)])
        };
        let (s, c) = (beta / 2.0).sin_cos();
        let a = half_z(alpha);
        let b = ComplexMatrix::from_vec(2, 2, vec![c.into(), s.into(), (-s).into(), c.into()])
            .expect("2x2");
        let g = half_z(gamma);
        let i_half = C64::new(0.0, 0.5);
        let iz = ComplexMatrix::diag(&[i_half, -i_half]);
        let iy = ComplexMatrix::from_vec(2, 2, vec![0.0.into(), 0.5.into(), (-0.5).into(), 0.0.into()])
            .expect("2x2");
        let bg = b.matmul(&g);
        let u = a.matmul(&bg);
        let du = vec![
            iz.matmul(&u),
            a.matmul(&iy).matmul(&bg),
            u.matmul(&iz),
        ];
        (u, du)
    }
}

/// Euler angles `(α, β, γ)` in the [`EulerChart`] domain of the ray of a
/// `2 x 2` unitary, after removing its determinant phase.
pub fn euler_angles(u: &ComplexMatrix) -> [f64; 3] {
    let root = (u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)]).sqrt();
    let (u00, u01) = (u[(0, 0)] / root, u[(0, 1)] / root);
    let beta = 2.0 * u01.norm().atan2(u00.norm());
    let (p, q) = (u00.arg(), u01.arg());
    let wrap = |x: f64| {
        let r = x.rem_euclid(2.0 * PI);
        if r >= 2.0 * PI { 0.0 } else { r }
    };
    [wrap(p + q), beta.min(PI.next_down()), wrap(p - q)]
}

/// Haar probability density of [`euler_angles`] on the [`EulerChart`] box.
pub fn euler_haar_density(theta: &[f64]) -> f64 {
    theta[1].sin() / (8.0 * PI * PI)
}

/// Chart on the Segre image: each factor moves by `exp(i Σ θ_k G_k)` with
/// the `2(N-1)` generators `G_k` that mix the factor with its orthogonal
/// complement, so no phase direction is included.
#[derive(Clone, Debug)]
pub struct SegreChart {
    n: usize,
    left: FactorMotion,
    right: FactorMotion,
    domain: Vec<(f64, f64)>,
}

#[derive(Clone, Debug)]
struct FactorMotion {
    frame: ComplexMatrix,
    generators: Vec<ComplexMatrix>,
}

impl FactorMotion {
    fn new(phi: &StateVector) -> Self {
        let n = phi.dim();
        let frame = unitary_with_first_column(phi.amplitudes());
        let full = gellmann_basis(n);
        // the first N-1 symmetric/antisymmetric pairs are those with j = 0
        let generators = full.generators()[..2 * (n - 1)].to_vec();
        Self { frame, generators }
    }

    fn eval(&self, theta: &[f64]) -> (Vec<C64>, Vec<Vec<C64>>) {
        let mut h = ComplexMatrix::zeros(self.frame.rows(), self.frame.rows());
        for (t, g) in theta.iter().zip(&self.generators) {
            h = &h + &g.scale_real(*t);
        }
        let (e, de) = expm_i_hermitian_with_derivatives(&h, &self.generators);
        let phi = self.frame.mat_vec(&e.column(0));
        let dphi = de.iter().map(|d| self.frame.mat_vec(&d.column(0))).collect();
        (phi, dphi)
    }
}

/// A Householder reflection times a phase, sending `e_0` to the unit vector `p`.
fn unitary_with_first_column(p: &[C64]) -> ComplexMatrix {
    let n = p.len();
    let phase = if p[0].norm() > 1e-300 { p[0] / p[0].norm() } else { C64::new(1.0, 0.0) };
    let mut v = p.to_vec();
    v[0] -= phase;
    let vv = norm_sqr(&v);
    let mut h = ComplexMatrix::identity(n);
    if vv > 1e-30 {
        let outer = ComplexMatrix::outer(&v, &v).scale_real(2.0 / vv);
        h = &h - &outer;
    }
    h.scale(phase)
}

impl SegreChart {
    pub fn new(f: &SegreFactors) -> Self {
        let n = f.phi().dim();
        Self {
            n,
            left: FactorMotion::new(f.phi()),
            right: FactorMotion::new(f.lambda()),
            domain: vec![(-FRAC_PI_2, FRAC_PI_2); 4 * (n - 1)],
        }
    }
}

pub fn segre_chart(f: &SegreFactors) -> SegreChart {
    SegreChart::new(f)
}

impl Chart for SegreChart {
    fn ambient_dim(&self) -> usize {
        self.n * self.n
    }

    fn param_dim(&self) -> usize {
        4 * (self.n - 1)
    }

    fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    fn eval_unchecked(&self, theta: &[f64]) -> ChartPoint {
        let half = 2 * (self.n - 1);
        let (phi, dphi) = self.left.eval(&theta[..half]);
        let (lambda, dlambda) = self.right.eval(&theta[half..]);
        let state = segre_product(&phi, &lambda);
        let ns = norm_sqr(&state);
        let tangents = dphi
            .iter()
            .map(|d| segre_product(d, &lambda))
            .chain(dlambda.iter().map(|d| segre_product(&phi, d)))
            .map(|w| horizontal_part(&state, ns, &w))
            .collect();
        ChartPoint { state, tangents }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bipartite::{gamma_of_state, is_maximally_entangled, is_product, random_max_entangled, segre_embed};
    use crate::linalg::real_singular_values;
    use crate::states::{haar_unitary, random_state};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rank(d: usize, m: &[f64]) -> usize {
        let s = real_singular_values(d, d, m);
        s.iter().filter(|&&x| x > 1e-8 * s[0]).count()
    }

    fn random_theta(rng: &mut ChaCha8Rng, d: usize, r: f64) -> Vec<f64> {
        (0..d).map(|_| rng.random_range(-r..r)).collect()
    }

    fn finite_difference<C: Chart>(c: &C, theta: &[f64], a: usize) -> Vec<C64> {
        let h = 1e-6;
        let mut p = theta.to_vec();
        let mut m = theta.to_vec();
        p[a] += h;
        m[a] -= h;
        let (sp, sm) = (c.eval_unchecked(&p).state, c.eval_unchecked(&m).state);
        sp.iter().zip(&sm).map(|(x, y)| (x - y) / (2.0 * h)).collect()
    }

    #[test]
    fn maxent_chart_stays_on_orbit() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [2, 3] {
            let g0 = random_max_entangled(n, &mut rng);
            let c = maxent_chart(&g0, &gellmann_basis(n)).unwrap();
            assert!(c.evaluate(&vec![0.0; n * n - 1]).unwrap().state_vector() == crate::bipartite::state_of_gamma(&g0).unwrap());
            for _ in 0..100 {
                let th = random_theta(&mut rng, n * n - 1, 1.0);
                let p = c.evaluate(&th).unwrap();
                assert!((norm_sqr(&p.state) - 1.0).abs() < 1e-12);
                let g = gamma_of_state(&p.state_vector()).unwrap();
                assert!(is_maximally_entangled(&g, 1e-10));
            }
        }
    }

    #[test]
    fn maxent_pullbacks_at_origin() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g0 = random_max_entangled(2, &mut rng);
        let p = maxent_chart(&g0, &gellmann_basis(2)).unwrap().evaluate(&[0.0; 3]).unwrap();
        assert!(p.symplectic().iter().all(|x| x.abs() < 1e-12));
        for (k, x) in p.metric().iter().enumerate() {
            let expected = if k % 4 == 0 { 1.0 } else { 0.0 };
            assert!((x - expected).abs() < 1e-12, "{k}: {x}");
        }
    }

    #[test]
    fn analytic_tangents_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g0 = random_max_entangled(3, &mut rng);
        let c = maxent_chart(&g0, &gellmann_basis(3)).unwrap();
        let th = random_theta(&mut rng, 8, 0.7);
        let p = c.evaluate(&th).unwrap();
        for a in 0..8 {
            let fd = horizontal_part(&p.state, 1.0, &finite_difference(&c, &th, a));
            let err = fd.iter().zip(&p.tangents[a]).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            assert!(err < 1e-8, "a={a} err={err}");
        }
        let e = EulerChart::new(random_max_entangled(2, &mut rng)).unwrap();
        let th = [1.1, 0.4, 5.0];
        let p = e.evaluate(&th).unwrap();
        for a in 0..3 {
            let fd = horizontal_part(&p.state, 1.0, &finite_difference(&e, &th, a));
            let err = fd.iter().zip(&p.tangents[a]).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            assert!(err < 1e-8, "euler a={a} err={err}");
        }
    }

    #[test]
    fn euler_metric_density() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let e = EulerChart::new(random_max_entangled(2, &mut rng)).unwrap();
        for beta in [0.3, 1.2, 2.9] {
            let g = e.evaluate(&[0.7, beta, 2.0]).unwrap().metric();
            let det = crate::linalg::real_det(3, &g);
            assert!((det.sqrt() - beta.sin() / 8.0).abs() < 1e-14);
        }
    }

    #[test]
    fn euler_angles_invert_the_chart() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g0 = random_max_entangled(2, &mut rng);
        let e = EulerChart::new(g0.clone()).unwrap();
        for _ in 0..50 {
            let u = haar_unitary(2, &mut rng);
            let th = euler_angles(&u);
            assert!(check_domain(e.domain(), &th).is_ok());
            let direct = StateVector::new(u.matmul(g0.amplitudes()).into_vec()).unwrap();
            let via = e.evaluate(&th).unwrap().state_vector();
            assert!(crate::fubini_study::fs_distance(&direct, &via) < 1e-7);
        }
    }

    #[test]
    fn segre_chart_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in [2, 3] {
            let f = SegreFactors::new(&random_state(n, &mut rng), &random_state(n, &mut rng)).unwrap();
            let c = segre_chart(&f);
            let d = 4 * (n - 1);
            let p0 = c.evaluate(&vec![0.0; d]).unwrap();
            assert!(p0.state_vector().max_abs_diff(&segre_embed(&f)) < 1e-14);
            let th = random_theta(&mut rng, d, 0.5);
            let p = c.evaluate(&th).unwrap();
            assert!(is_product(&gamma_of_state(&p.state_vector()).unwrap(), 1e-10));
            assert_eq!(rank(d, &p.metric()), d);
            assert_eq!(rank(d, &p.symplectic()), d);
        }
    }

    #[test]
    fn out_of_domain_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let e = EulerChart::new(random_max_entangled(2, &mut rng)).unwrap();
        assert!(matches!(e.evaluate(&[0.0, 4.0, 0.0]), Err(Error::OutOfDomain { index: 1, .. })));
        assert!(matches!(e.evaluate(&[0.0, 1.0]), Err(Error::DimensionMismatch { .. })));
        let bad = GammaArray::new(ComplexMatrix::diag_real(&[1.0, 0.5])).unwrap();
        assert!(matches!(EulerChart::new(bad), Err(Error::NotUnitary(_))));
    }
}
