//! Hilbert space as a flat phase space.
//!
//! A complex vector `ψ ∈ C^N` is written as a real vector `X = (x, y) ∈ R^{2N}`
//! (all real parts first, then all imaginary parts) under the scale
//! convention `ψ = (x + i y)/√2`. With this scale the Hermitian product
//! splits into the Euclidean metric `g = 1` and the symplectic form
//! `Ω = [[0, 1], [-1, 0]]`, the quantum expectation `<ψ|H|ψ>` becomes the
//! quadratic Hamiltonian `½ Xᵀ Q X`, and Schrödinger evolution `ψ̇ = -iHψ`
//! is exactly the Hamiltonian flow `Ẋ^I = Ω^{IJ} ∂_J <H>` with
//! `Ω^{IJ} = [[0, 1], [-1, 0]]`.
//!
//! Note `Ω^{IK} Ω_{KJ} = -δ^I_J` for this pair; see [`INVERSE_SIGN`].

use std::f64::consts::SQRT_2;
use std::io::Write;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigh, ComplexMatrix, RealLu};
use crate::states::{Observable, StateVector, HERMITIAN_TOL};

/// Sign `s` in `Ω^{IK} Ω_{KJ} = s δ^I_J` for the stored pair of forms.
pub const INVERSE_SIGN: f64 = -1.0;

/// Largest number of integration steps accepted by [`integrate_flow`].
pub const MAX_STEPS: f64 = 1e7;

/// A point `X^I` of the real phase space `R^{2N}`.
#[derive(Clone, Debug, PartialEq)]
pub struct RealStateVector {
    components: Vec<f64>,
}

impl RealStateVector {
    pub fn new(components: Vec<f64>) -> Self {
        Self { components }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            components: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    /// `X^I g_IJ X^J`.
    pub fn g_norm_sqr(&self) -> f64 {
        self.components.iter().map(|x| x * x).sum()
    }

    pub fn distance(&self, other: &RealStateVector) -> f64 {
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() == expected {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected,
                found: self.dim(),
            })
        }
    }
}

/// `X = √2 (Re ψ, Im ψ)`.
pub fn realify(psi: &StateVector) -> RealStateVector {
    realify_vector(psi.amplitudes())
}

/// [`realify`] for an arbitrary complex vector (tangent vectors included).
pub fn realify_vector(v: &[C64]) -> RealStateVector {
    let mut components: Vec<f64> = v.iter().map(|z| z.re * SQRT_2).collect();
    components.extend(v.iter().map(|z| z.im * SQRT_2));
    RealStateVector { components }
}

/// Inverse of [`realify`]; fails on odd dimension and on the zero vector.
pub fn complexify(x: &RealStateVector) -> Result<StateVector> {
    StateVector::new(complexify_vector(x)?)
}

pub fn complexify_vector(x: &RealStateVector) -> Result<Vec<C64>> {
    if !x.dim().is_multiple_of(2) || x.dim() == 0 {
        return Err(Error::OddDimension(x.dim()));
    }
    let n = x.dim() / 2;
    let (re, im) = x.components.split_at(n);
    Ok(re
        .iter()
        .zip(im)
        .map(|(&a, &b)| C64::new(a / SQRT_2, b / SQRT_2))
        .collect())
}

/// The constant flat Kähler data on `R^{2N}`: metric `g_IJ`, symplectic form
/// `Ω_IJ`, and the bivector `Ω^{IJ}` used in Poisson brackets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FlatKahlerStructure {
    n: usize,
}

impl FlatKahlerStructure {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    /// Real dimension `2N`.
    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn metric(&self) -> Vec<f64> {
        let d = self.dim();
        (0..d * d)
            .map(|k| if k / d == k % d { 1.0 } else { 0.0 })
            .collect()
    }

    /// `Ω_IJ`, row-major.
    pub fn omega_lower(&self) -> Vec<f64> {
        self.block_form()
    }

    /// `Ω^{IJ}`, row-major. Same block pattern as `Ω_IJ`.
    pub fn omega_upper(&self) -> Vec<f64> {
        self.block_form()
    }

    fn block_form(&self) -> Vec<f64> {
        let (n, d) = (self.n, self.dim());
        let mut m = vec![0.0; d * d];
        for a in 0..n {
            m[a * d + (n + a)] = 1.0;
            m[(n + a) * d + a] = -1.0;
        }
        m
    }

    /// `V^I = Ω^{IJ} w_J`.
    pub fn raise(&self, w: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut v = Vec::with_capacity(2 * n);
        v.extend_from_slice(&w[n..]);
        v.extend(w[..n].iter().map(|x| -x));
        v
    }

    /// `Ω^{IJ} a_I b_J`.
    pub fn bracket_of_gradients(&self, a: &[f64], b: &[f64]) -> f64 {
        let n = self.n;
        (0..n).map(|k| a[k] * b[n + k] - a[n + k] * b[k]).sum()
    }

    /// `(X^I g_IJ Y^J, X^I Ω_IJ Y^J)`.
    pub fn pair(&self, x: &[f64], y: &[f64]) -> (f64, f64) {
        let n = self.n;
        let g = x.iter().zip(y).map(|(a, b)| a * b).sum();
        let omega = (0..n).map(|k| x[k] * y[n + k] - x[n + k] * y[k]).sum();
        (g, omega)
    }
}

/// The function `X ↦ ½ Xᵀ Q X` on phase space, with `Q` real symmetric.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticForm {
    dim: usize,
    hessian: Vec<f64>,
}

impl QuadraticForm {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hessian(&self) -> &[f64] {
        &self.hessian
    }

    pub fn value(&self, x: &RealStateVector) -> Result<f64> {
        let g = self.gradient(x)?;
        Ok(0.5 * x.components.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>())
    }

    /// `∂_I f = Q_IJ X^J`.
    pub fn gradient(&self, x: &RealStateVector) -> Result<Vec<f64>> {
        x.check_dim(self.dim)?;
        let d = self.dim;
        Ok((0..d)
            .map(|i| {
                self.hessian[i * d..(i + 1) * d]
                    .iter()
                    .zip(&x.components)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    /// `{f, g}(X) = Ω^{IJ} ∂_I f ∂_J g`.
    pub fn poisson(&self, other: &QuadraticForm, x: &RealStateVector) -> Result<f64> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let a = self.gradient(x)?;
        let b = other.gradient(x)?;
        Ok(FlatKahlerStructure::new(self.dim / 2).bracket_of_gradients(&a, &b))
    }

    /// The bracket `{f, g}` as a quadratic form in its own right:
    /// `Q_{f,g} = Q_f P Q_g - Q_g P Q_f` with `P = Ω^{IJ}`.
    pub fn bracket(&self, other: &QuadraticForm) -> Result<QuadraticForm> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let d = self.dim;
        let p = FlatKahlerStructure::new(d / 2).omega_upper();
        let fpg = triple_product(d, &self.hessian, &p, &other.hessian);
        let gpf = triple_product(d, &other.hessian, &p, &self.hessian);
        Ok(QuadraticForm {
            dim: d,
            hessian: fpg.iter().zip(&gpf).map(|(a, b)| a - b).collect(),
        })
    }
}

fn triple_product(d: usize, a: &[f64], b: &[f64], c: &[f64]) -> Vec<f64> {
    let ab = real_matmul(d, a, b);
    real_matmul(d, &ab, c)
}

fn real_matmul(d: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for k in 0..d {
            let aik = a[i * d + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..d {
                out[i * d + j] += aik * b[k * d + j];
            }
        }
    }
    out
}

/// A Hermitian observable split as `A = S + iΛ` with `S` real symmetric and
/// `Λ` real antisymmetric, together with the phase-space function
/// `<ψ|A|ψ> = ½(xᵀSx + yᵀSy) - xᵀΛy`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticObservable {
    source: Observable,
    symmetric: Vec<f64>,
    antisymmetric: Vec<f64>,
    form: QuadraticForm,
}

impl QuadraticObservable {
    /// Splits a raw matrix, rejecting non-Hermitian input.
    pub fn from_matrix(m: &ComplexMatrix) -> Result<Self> {
        Ok(split_hermitian(&Observable::new(m.clone())?))
    }

    pub fn source(&self) -> &Observable {
        &self.source
    }

    pub fn n(&self) -> usize {
        self.source.dim()
    }

    /// `S = Re A`, row-major `N x N`.
    pub fn symmetric(&self) -> &[f64] {
        &self.symmetric
    }

    /// `Λ = Im A`, row-major `N x N`.
    pub fn antisymmetric(&self) -> &[f64] {
        &self.antisymmetric
    }

    pub fn form(&self) -> &QuadraticForm {
        &self.form
    }

    /// `S + iΛ`.
    pub fn reassemble(&self) -> ComplexMatrix {
        let n = self.n();
        ComplexMatrix::from_fn(n, n, |i, j| {
            C64::new(self.symmetric[i * n + j], self.antisymmetric[i * n + j])
        })
    }
}

/// Splits a Hermitian observable into real symmetric and imaginary
/// antisymmetric parts.
pub fn split_hermitian(a: &Observable) -> QuadraticObservable {
    let n = a.dim();
    let m = a.matrix();
    debug_assert!(m.hermiticity_defect() <= HERMITIAN_TOL);
    let symmetric: Vec<f64> = (0..n * n).map(|k| m[(k / n, k % n)].re).collect();
    let antisymmetric: Vec<f64> = (0..n * n).map(|k| m[(k / n, k % n)].im).collect();
    // Q = [[S, -Λ], [Λ, S]]
    let d = 2 * n;
    let mut hessian = vec![0.0; d * d];
    for i in 0..n {
        for j in 0..n {
            let s = symmetric[i * n + j];
            let l = antisymmetric[i * n + j];
            hessian[i * d + j] = s;
            hessian[(n + i) * d + (n + j)] = s;
            hessian[i * d + (n + j)] = -l;
            hessian[(n + i) * d + j] = l;
        }
    }
    QuadraticObservable {
        source: a.clone(),
        symmetric,
        antisymmetric,
        form: QuadraticForm { dim: d, hessian },
    }
}

/// `(X^I g_IJ Y^J, X^I Ω_IJ Y^J)`; with the `√2` convention these equal
/// `2 Re<ψ|φ>` and `2 Im<ψ|φ>`.
pub fn scalar_product_parts(x: &RealStateVector, y: &RealStateVector) -> Result<(f64, f64)> {
    y.check_dim(x.dim())?;
    if !x.dim().is_multiple_of(2) {
        return Err(Error::OddDimension(x.dim()));
    }
    Ok(FlatKahlerStructure::new(x.dim() / 2).pair(&x.components, &y.components))
}

/// Value `<ψ|A|ψ>` (unnormalized) and its exact gradient in `X`.
pub fn observable_value_and_gradient(
    q: &QuadraticObservable,
    x: &RealStateVector,
) -> Result<(f64, Vec<f64>)> {
    let grad = q.form.gradient(x)?;
    let value = 0.5 * x.components.iter().zip(&grad).map(|(a, b)| a * b).sum::<f64>();
    Ok((value, grad))
}

/// `{<f>, <g>}(X) = Ω^{IJ} ∂_I<f> ∂_J<g>`.
pub fn poisson_bracket(
    f: &QuadraticObservable,
    g: &QuadraticObservable,
    x: &RealStateVector,
) -> Result<f64> {
    f.form.poisson(&g.form, x)
}

/// `Ẋ^I = Ω^{IJ} ∂_J <H>`.
pub fn hamiltonian_vector_field(h: &QuadraticObservable, x: &RealStateVector) -> Result<Vec<f64>> {
    let grad = h.form.gradient(x)?;
    Ok(FlatKahlerStructure::new(h.n()).raise(&grad))
}

/// `exp(-iHt) ψ0` through the eigen-decomposition of `H`.
pub fn schrodinger_exact(h: &Observable, psi0: &StateVector, t: f64) -> Result<StateVector> {
    psi0.apply(&propagator(h, t))
}

/// `exp(-iHt)`.
pub fn propagator(h: &Observable, t: f64) -> ComplexMatrix {
    let eig = eigh(h.matrix());
    let n = h.dim();
    let phases: Vec<C64> = eig.values.iter().map(|&l| C64::from_polar(1.0, -l * t)).collect();
    ComplexMatrix::from_fn(n, n, |i, j| eig.vectors[(i, j)] * phases[j]).matmul(&eig.vectors.adjoint())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    ExplicitEuler,
    Rk4,
    ImplicitMidpoint,
}

impl Integrator {
    pub fn name(self) -> &'static str {
        match self {
            Integrator::ExplicitEuler => "explicit-euler",
            Integrator::Rk4 => "rk4",
            Integrator::ImplicitMidpoint => "implicit-midpoint",
        }
    }
}

impl std::str::FromStr for Integrator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "explicit-euler" | "euler" => Ok(Integrator::ExplicitEuler),
            "rk4" => Ok(Integrator::Rk4),
            "implicit-midpoint" | "midpoint" => Ok(Integrator::ImplicitMidpoint),
            other => Err(Error::Unsupported(format!("integrator {other}"))),
        }
    }
}

/// Number of uniform steps used to cover `[0, t]` with steps no longer than
/// `dt`.
fn step_count(t: f64, dt: f64) -> Result<usize> {
    if !dt.is_finite() || dt <= 0.0 {
        return Err(Error::NonpositiveStep(dt));
    }
    if !t.is_finite() || t < 0.0 {
        return Err(Error::Unsupported(format!("duration {t} must be finite and nonnegative")));
    }
    let ratio = t / dt;
    if ratio > MAX_STEPS {
        return Err(Error::StepBudgetExceeded(ratio));
    }
    Ok((ratio * (1.0 - 1e-12)).ceil() as usize)
}

/// Linear generator `G = P Q` of the flow `Ẋ = G X`.
fn flow_generator(h: &QuadraticObservable) -> Vec<f64> {
    let d = 2 * h.n();
    let p = FlatKahlerStructure::new(h.n()).omega_upper();
    real_matmul(d, &p, h.form.hessian())
}

fn apply(d: usize, m: &[f64], x: &[f64]) -> Vec<f64> {
    (0..d)
        .map(|i| m[i * d..(i + 1) * d].iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

fn axpy(a: f64, x: &[f64], y: &[f64]) -> Vec<f64> {
    y.iter().zip(x).map(|(yi, xi)| yi + a * xi).collect()
}

/// A single-step map for the linear flow.
struct Stepper {
    d: usize,
    generator: Vec<f64>,
    method: Integrator,
    h: f64,
    midpoint: Option<(RealLu, Vec<f64>)>,
}

impl Stepper {
    fn new(q: &QuadraticObservable, method: Integrator, h: f64) -> Self {
        let d = 2 * q.n();
        let generator = flow_generator(q);
        let midpoint = (method == Integrator::ImplicitMidpoint).then(|| {
            // (1 - h/2 G) X' = (1 + h/2 G) X
            let mut lhs = vec![0.0; d * d];
            let mut rhs = vec![0.0; d * d];
            for i in 0..d {
                for j in 0..d {
                    let id = if i == j { 1.0 } else { 0.0 };
                    lhs[i * d + j] = id - 0.5 * h * generator[i * d + j];
                    rhs[i * d + j] = id + 0.5 * h * generator[i * d + j];
                }
            }
            let lu = RealLu::new(d, &lhs).expect("1 - hG/2 is invertible for skew G");
            (lu, rhs)
        });
        Self {
            d,
            generator,
            method,
            h,
            midpoint,
        }
    }

    fn step(&self, x: &[f64]) -> Vec<f64> {
        let (d, g, h) = (self.d, &self.generator, self.h);
        match self.method {
            Integrator::ExplicitEuler => axpy(h, &apply(d, g, x), x),
            Integrator::Rk4 => {
                let k1 = apply(d, g, x);
                let k2 = apply(d, g, &axpy(0.5 * h, &k1, x));
                let k3 = apply(d, g, &axpy(0.5 * h, &k2, x));
                let k4 = apply(d, g, &axpy(h, &k3, x));
                (0..d)
                    .map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
                    .collect()
            }
            Integrator::ImplicitMidpoint => {
                let (lu, rhs) = self.midpoint.as_ref().unwrap();
                lu.solve(&apply(d, rhs, x))
            }
        }
    }
}

/// Integrates `Ẋ = {X, <H>}` from `x0` over `[0, t]` with uniform steps of
/// length at most `dt`.
pub fn integrate_flow(
    h: &QuadraticObservable,
    x0: &RealStateVector,
    t: f64,
    dt: f64,
    method: Integrator,
) -> Result<RealStateVector> {
    integrate_flow_with(h, x0, t, dt, method, |_, _, _| Ok(()))
}

/// [`integrate_flow`] with a visitor called on the initial point and after
/// every step as `visit(step, time, X)`.
pub fn integrate_flow_with<F>(
    h: &QuadraticObservable,
    x0: &RealStateVector,
    t: f64,
    dt: f64,
    method: Integrator,
    mut visit: F,
) -> Result<RealStateVector>
where
    F: FnMut(usize, f64, &RealStateVector) -> Result<()>,
{
    x0.check_dim(2 * h.n())?;
    let steps = step_count(t, dt)?;
    let mut x = x0.clone();
    visit(0, 0.0, &x)?;
    if steps == 0 {
        return Ok(x);
    }
    let hstep = t / steps as f64;
    let stepper = Stepper::new(h, method, hstep);
    for k in 1..=steps {
        x = RealStateVector::new(stepper.step(&x.components));
        visit(k, k as f64 * hstep, &x)?;
    }
    Ok(x)
}

/// Writes a trajectory as CSV with header `t,re_0,…,re_{N-1},im_0,…,im_{N-1},energy,norm`.
/// `re_k`/`im_k` are the amplitudes of `ψ`, `energy` is `<ψ|H|ψ>` and `norm`
/// is `ψ·ψ̄`. Every `stride`-th step is written, plus the final one.
pub fn write_trajectory_csv<W: Write + ?Sized>(
    out: &mut W,
    h: &QuadraticObservable,
    x0: &RealStateVector,
    t: f64,
    dt: f64,
    method: Integrator,
    stride: usize,
) -> Result<RealStateVector> {
    let n = h.n();
    let stride = stride.max(1);
    let mut header = String::from("t");
    for k in 0..n {
        header.push_str(&format!(",re_{k}"));
    }
    for k in 0..n {
        header.push_str(&format!(",im_{k}"));
    }
    header.push_str(",energy,norm");
    writeln!(out, "{header}")?;
    let steps = step_count(t, dt)?;
    integrate_flow_with(h, x0, t, dt, method, |k, time, x| {
        if k % stride != 0 && k != steps {
            return Ok(());
        }
        let amps = complexify_vector(x)?;
        let mut line = format!("{time}");
        for z in &amps {
            line.push_str(&format!(",{}", z.re));
        }
        for z in &amps {
            line.push_str(&format!(",{}", z.im));
        }
        let energy = h.form.value(x)?;
        line.push_str(&format!(",{},{}", energy, 0.5 * x.g_norm_sqr()));
        writeln!(out, "{line}")?;
        Ok(())
    })
}
