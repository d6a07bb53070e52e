//! Submanifolds of the projective state space `CP^{N²-1}` of a pair of
//! `N`-level systems.
//!
//! Two families are covered. The maximally entangled orbit `Γ ↦ UΓ` (real
//! dimension `N² - 1`) is parametrized by exponential charts for any `N` and
//! by Euler angles for `N = 2`. The Segre image of product states (real
//! dimension `4(N - 1)`) serves as a negative control. On either family the
//! Fubini-Study forms are pulled back to the chart's tangent basis.
//!
//! The orbit is Lagrangian: `Ω` pulls back to zero, because its tangents
//! `vec(iT_aΓ)` satisfy `Ω ∝ Im Tr(T_a T_b) = 0`, and it has half the
//! ambient dimension. Normal directions at `Γ` are `vec(KΓ)` with `K`
//! Hermitian traceless; [`VariationField`] builds smooth fields of that form
//! and [`volume_variation`] measures the first and second variation of the
//! induced volume along them.

mod basis;
mod chart;
mod volume;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use basis::{gellmann_basis, SuNBasis};
pub use chart::{
    euler_angles, euler_haar_density, maxent_chart, segre_chart, Chart, ChartPoint, EulerChart, MaxEntChart,
    OrbitChart, SegreChart,
};
pub use volume::{
    haar_monte_carlo_volume, induced_volume, midpoint_integrate, minimal_report, volume_sweep, volume_variation,
    write_sweep_csv, FieldPoint, Grid, MinimalityOptions, MinimalityTrial, MonteCarloVolume, VariationField,
    VariationKind, VolumeVariation,
};

use crate::bipartite::{random_max_entangled, SegreFactors};
use crate::error::{Error, Result};
use crate::exec::{stream_rng, Execution};
use crate::linalg::{eigh, real_singular_values, ComplexMatrix};
use crate::report::CheckReport;
use crate::states::random_state;
use num_complex::Complex64 as C64;

/// Relative threshold of the numerical rank.
pub const RANK_REL_TOL: f64 = 1e-8;
/// Singular values at or below this count as zero regardless of scale.
pub const RANK_ABS_FLOOR: f64 = 1e-12;
/// Default bound on `|Ω|` pullback entries for the Lagrangian check.
pub const LAGRANGIAN_TOL: f64 = 1e-10;
/// Half-width of the box random chart parameters are drawn from.
const SAMPLE_RADIUS: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FormKind {
    Metric,
    Symplectic,
}

/// A Fubini-Study form evaluated on a chart's tangent basis at `θ`.
#[derive(Clone, Debug)]
pub struct PulledBackForm {
    theta: Vec<f64>,
    kind: FormKind,
    dim: usize,
    matrix: Vec<f64>,
}

impl PulledBackForm {
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn kind(&self) -> FormKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row-major `d x d` entries.
    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub fn entry(&self, a: usize, b: usize) -> f64 {
        self.matrix[a * self.dim + b]
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn symmetry_defect(&self) -> f64 {
        self.pair_defect(-1.0)
    }

    pub fn antisymmetry_defect(&self) -> f64 {
        self.pair_defect(1.0)
    }

    fn pair_defect(&self, sign: f64) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for a in 0..d {
            for b in 0..d {
                worst = worst.max((self.entry(a, b) + sign * self.entry(b, a)).abs());
            }
        }
        worst
    }

    pub fn singular_values(&self) -> Vec<f64> {
        real_singular_values(self.dim, self.dim, &self.matrix)
    }

    /// Singular values above `max(RANK_REL_TOL · σ_max, RANK_ABS_FLOOR)`.
    pub fn rank(&self) -> usize {
        rank_of(&self.singular_values())
    }

    /// Smallest eigenvalue of the symmetric part.
    pub fn min_eigenvalue(&self) -> f64 {
        let d = self.dim;
        let sym = ComplexMatrix::from_fn(d, d, |a, b| C64::new(0.5 * (self.entry(a, b) + self.entry(b, a)), 0.0));
        eigh(&sym).values.first().copied().unwrap_or(0.0)
    }
}

fn rank_of(s: &[f64]) -> usize {
    let largest = s.first().copied().unwrap_or(0.0);
    let cutoff = (RANK_REL_TOL * largest).max(RANK_ABS_FLOOR);
    s.iter().filter(|&&x| x > cutoff).count()
}

fn from_point(theta: &[f64], point: &ChartPoint, kind: FormKind) -> PulledBackForm {
    let matrix = match kind {
        FormKind::Metric => point.metric(),
        FormKind::Symplectic => point.symplectic(),
    };
    PulledBackForm {
        theta: theta.to_vec(),
        kind,
        dim: point.tangents.len(),
        matrix,
    }
}

pub fn pullback_form<C: Chart + ?Sized>(c: &C, theta: &[f64], which: FormKind) -> Result<PulledBackForm> {
    let point = c.evaluate(theta)?;
    Ok(from_point(theta, &point, which))
}

/// Pullback data at one sampled chart point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointPullback {
    /// `max |Ω(t_a, t_b)|`.
    pub omega_max: f64,
    /// Numerical rank of the metric pullback.
    pub tangent_rank: usize,
    /// Numerical rank of the symplectic pullback.
    pub omega_rank: usize,
    /// Smallest eigenvalue of the metric pullback.
    pub metric_min_eigenvalue: f64,
}

/// Pullbacks over a batch of random points of a chart family.
#[derive(Clone, Debug)]
pub struct PullbackSurvey {
    pub n: usize,
    pub param_dim: usize,
    /// Real dimension of `CP^{N²-1}`.
    pub ambient_dim: usize,
    pub points: Vec<PointPullback>,
}

impl PullbackSurvey {
    pub fn omega_violations(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.omega_max).collect()
    }

    pub fn tangent_rank_range(&self) -> (usize, usize) {
        range(self.points.iter().map(|p| p.tangent_rank))
    }

    pub fn omega_rank_range(&self) -> (usize, usize) {
        range(self.points.iter().map(|p| p.omega_rank))
    }

    /// Both Lagrangian conditions at every point: `|Ω| <= tol` entrywise and
    /// tangent rank equal to half the ambient dimension.
    pub fn is_lagrangian(&self, tol: f64) -> bool {
        !self.points.is_empty()
            && self
                .points
                .iter()
                .all(|p| p.omega_max <= tol && 2 * p.tangent_rank == self.ambient_dim)
    }
}

fn range(it: impl Iterator<Item = usize>) -> (usize, usize) {
    it.fold((usize::MAX, 0), |(lo, hi), r| (lo.min(r), hi.max(r)))
}

/// Samples `points` charts (and parameters) from `make` and records the
/// pullbacks. Point `i` draws from its own stream of a base seed taken from
/// `rng`, so the result does not depend on `exec`.
pub fn pullback_survey<C, R, F>(
    n: usize,
    points: usize,
    rng: &mut R,
    exec: Execution,
    make: F,
) -> Result<PullbackSurvey>
where
    C: Chart,
    R: Rng + ?Sized,
    F: Fn(&mut ChaCha8Rng) -> Result<C> + Sync,
{
    let base: u64 = rng.random();
    let samples = exec.try_map(points, |i| {
        let mut local = stream_rng(base, i);
        let chart = make(&mut local)?;
        let theta: Vec<f64> = (0..chart.param_dim())
            .map(|_| local.random_range(-SAMPLE_RADIUS..SAMPLE_RADIUS))
            .collect();
        let point = chart.evaluate(&theta)?;
        let g = from_point(&theta, &point, FormKind::Metric);
        let w = from_point(&theta, &point, FormKind::Symplectic);
        Ok::<_, Error>((
            chart.param_dim(),
            PointPullback {
                omega_max: w.max_abs(),
                tangent_rank: g.rank(),
                omega_rank: w.rank(),
                metric_min_eigenvalue: g.min_eigenvalue(),
            },
        ))
    })?;
    let param_dim = samples.first().map_or(0, |s| s.0);
    Ok(PullbackSurvey {
        n,
        param_dim,
        ambient_dim: 2 * (n * n - 1),
        points: samples.into_iter().map(|s| s.1).collect(),
    })
}

pub const SUPPORTED_N: [usize; 3] = [2, 3, 4];

fn require_supported(n: usize) -> Result<()> {
    if SUPPORTED_N.contains(&n) {
        Ok(())
    } else {
        Err(Error::Unsupported(format!("n = {n} (supported: 2, 3, 4)")))
    }
}

/// Pullbacks on the maximally entangled orbit at Haar-random base points.
pub fn maxent_survey<R: Rng + ?Sized>(n: usize, points: usize, rng: &mut R, exec: Execution) -> Result<PullbackSurvey> {
    require_supported(n)?;
    let basis = gellmann_basis(n);
    pullback_survey(n, points, rng, exec, |r| {
        MaxEntChart::new(random_max_entangled(n, r), basis.clone())
    })
}

/// Pullbacks on the Segre image at random product base points.
pub fn segre_survey<R: Rng + ?Sized>(n: usize, points: usize, rng: &mut R, exec: Execution) -> Result<PullbackSurvey> {
    require_supported(n)?;
    pullback_survey(n, points, rng, exec, |r| {
        let f = SegreFactors::new(&random_state(n, r), &random_state(n, r))?;
        Ok(SegreChart::new(&f))
    })
}

/// The Lagrangian certificate of the maximally entangled orbit.
pub fn lagrangian_report<R: Rng + ?Sized>(
    n: usize,
    points: usize,
    tol: f64,
    rng: &mut R,
    exec: Execution,
) -> Result<CheckReport> {
    let s = maxent_survey(n, points, rng, exec)?;
    let (rank_lo, rank_hi) = s.tangent_rank_range();
    let mut r = CheckReport::new("lagrangian", n, points, tol).with_violations(&s.omega_violations());
    r.tangent_rank = Some(rank_lo);
    r.ambient_dim = Some(s.ambient_dim);
    r.pass = s.is_lagrangian(tol);
    Ok(r.param("tangent_rank_max", rank_hi).param("expected_rank", n * n - 1))
}

/// Negative control: the same harness on the Segre chart. Passes when the
/// symplectic pullback has full rank `4(N-1)` at every point, i.e. when the
/// Lagrangian test correctly fails.
pub fn segre_report<R: Rng + ?Sized>(
    n: usize,
    points: usize,
    tol: f64,
    rng: &mut R,
    exec: Execution,
) -> Result<CheckReport> {
    let s = segre_survey(n, points, rng, exec)?;
    let expected = 4 * (n - 1);
    let (rank_lo, rank_hi) = s.tangent_rank_range();
    let (omega_lo, omega_hi) = s.omega_rank_range();
    let mut r = CheckReport::new("segre", n, points, tol).with_violations(&s.omega_violations());
    r.tangent_rank = Some(rank_lo);
    r.ambient_dim = Some(s.ambient_dim);
    let lagrangian = s.is_lagrangian(tol);
    r.pass = !lagrangian && omega_lo == expected && omega_hi == expected && rank_lo == expected && rank_hi == expected;
    Ok(r
        .param("omega_rank_min", omega_lo)
        .param("omega_rank_max", omega_hi)
        .param("expected_rank", expected)
        .param("lagrangian", lagrangian))
}
