//! Fubini-Study metric and symplectic form on `CP^{N-1}`, evaluated on
//! tangent vectors at a representative `ψ`.
//!
//! In the dot notation `a·b̄ = Σ a^α conj(b^α)`:
//!
//! ```text
//! g(u, v) = Re[ (ψ·ψ̄)(u·v̄) - (u·ψ̄)(ψ·v̄) ] / (ψ·ψ̄)²
//! Ω(u, v) = i[ (ψ·ψ̄)(u·v̄ - v·ū) - (u·ψ̄)(ψ·v̄) + (v·ψ̄)(ψ·ū) ] / (ψ·ψ̄)²
//! ```
//!
//! The wedge is taken without a factor ½, `(dα∧dβ)(u, v) = dα(u)dβ(v) - dα(v)dβ(u)`,
//! which fixes `Ω(u, iu) = 2 g(u, u)` on horizontal vectors
//! ([`KAHLER_CONSTANT`]). Both forms vanish on the vertical directions `ψ`
//! and `iψ` and are invariant under `ψ → zψ`, `u → zu`.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::inner;
use crate::states::StateVector;

/// `c` in `Ω(u, iu) = c·g(u, u)` for horizontal `u`, under the wedge
/// convention above. Measured on `CP¹` and frozen.
pub const KAHLER_CONSTANT: f64 = 2.0;

/// Smallest overlap between consecutive samples accepted by [`curve_length`].
pub const MIN_SEGMENT_OVERLAP: f64 = 0.9;

/// Bilinear evaluators for the Fubini-Study metric and symplectic form at a
/// fixed base point.
#[derive(Clone, Debug)]
pub struct FubiniStudyForms {
    base: StateVector,
}

/// A tangent direction attached to a base point. Stored tangents are always
/// horizontal (`<ψ, u> = 0`).
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVectorAtPoint {
    base: StateVector,
    direction: Vec<C64>,
    horizontal: bool,
}

impl TangentVectorAtPoint {
    pub fn base(&self) -> &StateVector {
        &self.base
    }

    pub fn direction(&self) -> &[C64] {
        &self.direction
    }

    pub fn is_horizontal(&self) -> bool {
        self.horizontal
    }
}

/// `u = w - ψ <ψ|w> / <ψ|ψ>`.
pub fn horizontal_project(psi: &StateVector, w: &[C64]) -> TangentVectorAtPoint {
    TangentVectorAtPoint {
        base: psi.clone(),
        direction: horizontal_part(psi.amplitudes(), psi.norm_sqr(), w),
        horizontal: true,
    }
}

pub(crate) fn horizontal_part(psi: &[C64], norm_sqr: f64, w: &[C64]) -> Vec<C64> {
    let coeff = inner(psi, w) / norm_sqr;
    w.iter().zip(psi).map(|(wk, pk)| wk - pk * coeff).collect()
}

impl FubiniStudyForms {
    pub fn new(base: &StateVector) -> Self {
        Self { base: base.clone() }
    }

    pub fn base(&self) -> &StateVector {
        &self.base
    }

    /// Attaches a raw direction to this base point, projecting it to the
    /// horizontal subspace.
    pub fn tangent(&self, w: &[C64]) -> TangentVectorAtPoint {
        horizontal_project(&self.base, w)
    }

    fn check(&self, u: &TangentVectorAtPoint, v: &TangentVectorAtPoint) -> Result<()> {
        if u.base != self.base || v.base != self.base {
            return Err(Error::BasePointMismatch);
        }
        Ok(())
    }

    pub fn metric(&self, u: &TangentVectorAtPoint, v: &TangentVectorAtPoint) -> Result<f64> {
        self.check(u, v)?;
        Ok(self.metric_raw(&u.direction, &v.direction))
    }

    pub fn symplectic(&self, u: &TangentVectorAtPoint, v: &TangentVectorAtPoint) -> Result<f64> {
        self.check(u, v)?;
        Ok(self.symplectic_raw(&u.direction, &v.direction))
    }

    /// `g(u, v)` on raw (not necessarily horizontal) directions.
    pub fn metric_raw(&self, u: &[C64], v: &[C64]) -> f64 {
        fs_metric(self.base.amplitudes(), u, v)
    }

    /// `Ω(u, v)` on raw (not necessarily horizontal) directions.
    pub fn symplectic_raw(&self, u: &[C64], v: &[C64]) -> f64 {
        fs_symplectic(self.base.amplitudes(), u, v)
    }
}

/// `a·b̄`.
fn dot_bar(a: &[C64], b: &[C64]) -> C64 {
    inner(b, a)
}

fn metric_half(psi: &[C64], u: &[C64], v: &[C64], pp: f64) -> f64 {
    (dot_bar(u, v) * pp - dot_bar(u, psi) * dot_bar(psi, v)).re
}

/// Fubini-Study metric at representative `psi`, symmetrized.
pub fn fs_metric(psi: &[C64], u: &[C64], v: &[C64]) -> f64 {
    let pp = crate::linalg::norm_sqr(psi);
    0.5 * (metric_half(psi, u, v, pp) + metric_half(psi, v, u, pp)) / (pp * pp)
}

/// Fubini-Study symplectic form at representative `psi`.
pub fn fs_symplectic(psi: &[C64], u: &[C64], v: &[C64]) -> f64 {
    let pp = crate::linalg::norm_sqr(psi);
    let bracket = (dot_bar(u, v) - dot_bar(v, u)) * pp - dot_bar(u, psi) * dot_bar(psi, v)
        + dot_bar(v, psi) * dot_bar(psi, u);
    let value = C64::i() * bracket / (pp * pp);
    debug_assert!(value.im.abs() <= 1e-12 * (1.0 + value.re.abs()));
    value.re
}

pub fn fs_metric_eval(
    f: &FubiniStudyForms,
    u: &TangentVectorAtPoint,
    v: &TangentVectorAtPoint,
) -> Result<f64> {
    f.metric(u, v)
}

pub fn fs_symplectic_eval(
    f: &FubiniStudyForms,
    u: &TangentVectorAtPoint,
    v: &TangentVectorAtPoint,
) -> Result<f64> {
    f.symplectic(u, v)
}

/// Geodesic distance `arccos(|<ψ|φ>| / (‖ψ‖‖φ‖))`, in `[0, π/2]`.
pub fn fs_distance(psi: &StateVector, phi: &StateVector) -> f64 {
    let overlap = psi.inner(phi).norm() / (psi.norm() * phi.norm());
    overlap.clamp(0.0, 1.0).acos()
}

/// Length of a finely sampled curve: the sum over segments of
/// `sqrt(g(Δ, Δ))`, where `Δ` is the horizontal part of the difference of
/// consecutive unit representatives.
pub fn curve_length(samples: &[StateVector]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::Unsupported(format!(
            "curve needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    let mut total = 0.0;
    for (index, pair) in samples.windows(2).enumerate() {
        let a = pair[0].normalized();
        let b = pair[1].normalized();
        if b.dim() != a.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                found: b.dim(),
            });
        }
        let overlap = a.inner(&b).norm();
        if overlap <= MIN_SEGMENT_OVERLAP {
            return Err(Error::TooCoarse { index, overlap });
        }
        let diff: Vec<C64> = b
            .amplitudes()
            .iter()
            .zip(a.amplitudes())
            .map(|(x, y)| x - y)
            .collect();
        let delta = horizontal_part(a.amplitudes(), 1.0, &diff);
        total += fs_metric(a.amplitudes(), &delta, &delta).max(0.0).sqrt();
    }
    Ok(total)
}

/// Samples of the minimizing geodesic from `psi` to `phi`, `count >= 2`
/// points including both endpoints.
pub fn geodesic_samples(psi: &StateVector, phi: &StateVector, count: usize) -> Vec<StateVector> {
    let a = psi.normalized();
    let b = phi.normalized();
    let overlap = a.inner(&b);
    // align phases so that <a|b> is real and nonnegative
    let phase = if overlap.norm() > 0.0 {
        overlap.conj() / overlap.norm()
    } else {
        C64::new(1.0, 0.0)
    };
    let b_aligned: Vec<C64> = b.amplitudes().iter().map(|z| z * phase).collect();
    let theta = fs_distance(&a, &b);
    let perp = horizontal_part(a.amplitudes(), 1.0, &b_aligned);
    let perp_norm = crate::linalg::norm_sqr(&perp).sqrt();
    let count = count.max(2);
    (0..count)
        .map(|k| {
            let t = theta * k as f64 / (count - 1) as f64;
            let amps: Vec<C64> = if perp_norm > 0.0 {
                a.amplitudes()
                    .iter()
                    .zip(&perp)
                    .map(|(x, p)| x * t.cos() + p * (t.sin() / perp_norm))
                    .collect()
            } else {
                a.amplitudes().to_vec()
            };
            StateVector::new(amps).expect("geodesic samples are unit vectors")
        })
        .collect()
}
