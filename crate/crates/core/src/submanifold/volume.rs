use std::io::Write;

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::basis::{gellmann_basis, SuNBasis};
use super::chart::{euler_angles, euler_haar_density, Chart, EulerChart, OrbitChart};
use crate::bipartite::random_max_entangled;
use crate::error::{Error, Result};
use crate::exec::{stream_rng, Execution};
use crate::fubini_study::fs_metric;
use crate::linalg::{inner, pairwise_sum, real_det, ComplexMatrix};
use crate::report::CheckReport;
use crate::states::haar_unitary;

/// Tensor-product midpoint grid, `nodes[k]` cells along axis `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grid {
    nodes: Vec<usize>,
}

impl Grid {
    pub fn new(nodes: Vec<usize>) -> Self {
        assert!(nodes.iter().all(|&m| m > 0), "every axis needs at least one node");
        Self { nodes }
    }

    pub fn uniform(per_axis: usize, dim: usize) -> Self {
        Self::new(vec![per_axis; dim])
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn cell_widths(&self, domain: &[(f64, f64)]) -> Vec<f64> {
        domain
            .iter()
            .zip(&self.nodes)
            .map(|(&(lo, hi), &m)| (hi - lo) / m as f64)
            .collect()
    }

    /// Midpoint of cell `index`, last axis fastest.
    fn node(&self, domain: &[(f64, f64)], widths: &[f64], mut index: usize) -> Vec<f64> {
        let mut theta = vec![0.0; self.dim()];
        for k in (0..self.dim()).rev() {
            let i = index % self.nodes[k];
            index /= self.nodes[k];
            theta[k] = domain[k].0 + (i as f64 + 0.5) * widths[k];
        }
        theta
    }
}

fn check_grid(domain: &[(f64, f64)], grid: &Grid) -> Result<()> {
    if grid.dim() != domain.len() {
        return Err(Error::DimensionMismatch {
            expected: domain.len(),
            found: grid.dim(),
        });
    }
    Ok(())
}

/// Midpoint rule for `∫ f` over a box.
pub fn midpoint_integrate<F>(domain: &[(f64, f64)], grid: &Grid, exec: Execution, f: F) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    check_grid(domain, grid)?;
    let widths = grid.cell_widths(domain);
    let values = exec.try_map(grid.len(), |i| f(&grid.node(domain, &widths, i)))?;
    Ok(pairwise_sum(&values) * widths.iter().product::<f64>())
}

/// Evaluates `f` at a node, retrying once a quarter cell away if `ok` rejects
/// the value.
fn with_jitter<T>(
    theta: &[f64],
    widths: &[f64],
    f: impl Fn(&[f64]) -> Result<T>,
    ok: impl Fn(&T) -> bool,
) -> Result<std::result::Result<T, T>> {
    let first = f(theta)?;
    if ok(&first) {
        return Ok(Ok(first));
    }
    let moved: Vec<f64> = theta.iter().zip(widths).map(|(t, w)| t + 0.25 * w).collect();
    let second = f(&moved)?;
    Ok(if ok(&second) { Ok(second) } else { Err(second) })
}

fn sqrt_det_metric<C: Chart + ?Sized>(c: &C, theta: &[f64]) -> f64 {
    let g = c.eval_unchecked(theta).metric();
    real_det(c.param_dim(), &g)
}

/// `∫ √det g(θ) dθ` over the chart box by the midpoint rule.
pub fn induced_volume<C: Chart + ?Sized>(c: &C, grid: &Grid, exec: Execution) -> Result<f64> {
    let domain = c.domain();
    check_grid(domain, grid)?;
    let widths = grid.cell_widths(domain);
    let values = exec.try_map(grid.len(), |i| {
        let theta = grid.node(domain, &widths, i);
        match with_jitter(&theta, &widths, |t| Ok(sqrt_det_metric(c, t)), |d| *d > 0.0)? {
            Ok(det) => Ok(det.sqrt()),
            Err(det) => Err(Error::SingularMetric(det)),
        }
    })?;
    Ok(pairwise_sum(&values) * widths.iter().product::<f64>())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonteCarloVolume {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Importance-sampled orbit volume: Haar-random `U`, Euler angles `θ(U)`,
/// and the average of `√det g(θ) / p(θ)` with `p` the Haar density.
pub fn haar_monte_carlo_volume<R: Rng + ?Sized>(
    chart: &EulerChart,
    samples: usize,
    rng: &mut R,
    exec: Execution,
) -> Result<MonteCarloVolume> {
    if samples < 2 {
        return Err(Error::Unsupported("Monte Carlo needs at least 2 samples".into()));
    }
    let base: u64 = rng.random();
    let values = exec.try_map(samples, |i| {
        let theta = euler_angles(&haar_unitary(2, &mut stream_rng(base, i)));
        let det = sqrt_det_metric(chart, &theta);
        if det <= 0.0 {
            return Err(Error::SingularMetric(det));
        }
        Ok(det.sqrt() / euler_haar_density(&theta))
    })?;
    let m = samples as f64;
    let mean = pairwise_sum(&values) / m;
    let dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&dev) / (m - 1.0);
    Ok(MonteCarloVolume {
        estimate: mean,
        std_error: (var / m).sqrt(),
        samples,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VariationKind {
    /// `δψ = vec(KΓ)/√N`, orthogonal to the orbit.
    Normal,
    /// `δψ = vec(iKΓ)/√N`, tangent to the orbit.
    Tangential,
}

/// A smooth field `K(θ)` of Hermitian traceless matrices along an orbit
/// chart, and the induced variation direction.
///
/// The coefficients of `K` in the Gell-Mann basis are
/// `c = A (c₀ + L vec R(U))`, where `R_bc = Tr(T_b U T_c U^†)/2` is the
/// adjoint action of the group element. `R` depends only on the point of the
/// orbit, so the field is smooth across chart seams and coordinate
/// singularities.
#[derive(Clone, Debug)]
pub struct VariationField {
    kind: VariationKind,
    basis: SuNBasis,
    constant: Vec<f64>,
    linear: Vec<f64>,
    amplitude: f64,
}

/// A variation field evaluated on a chart point.
#[derive(Clone, Debug)]
pub struct FieldPoint {
    pub state: Vec<C64>,
    /// Raw (unprojected) `∂_a ψ`.
    pub tangents: Vec<Vec<C64>>,
    pub field: Vec<C64>,
    pub d_field: Vec<Vec<C64>>,
}

impl VariationField {
    pub fn new(kind: VariationKind, basis: SuNBasis, constant: Vec<f64>, linear: Vec<f64>) -> Result<Self> {
        let d = basis.len();
        if constant.len() != d || linear.len() != d * d * d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: constant.len(),
            });
        }
        Ok(Self {
            kind,
            basis,
            constant,
            linear,
            amplitude: 1.0,
        })
    }

    /// Gaussian `c₀`, and Gaussian `L` scaled by `1/(N²-1)`.
    pub fn random<R: Rng + ?Sized>(kind: VariationKind, n: usize, rng: &mut R) -> Self {
        let basis = gellmann_basis(n);
        let d = basis.len();
        let constant = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let linear = (0..d * d * d)
            .map(|_| rng.sample::<f64, _>(StandardNormal) / d as f64)
            .collect();
        Self::new(kind, basis, constant, linear).expect("consistent sizes")
    }

    pub fn kind(&self) -> VariationKind {
        self.kind
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    /// Coefficients of `K` and their derivatives along each `∂_a U`.
    fn coefficients(&self, u: &ComplexMatrix, du: &[ComplexMatrix]) -> (Vec<f64>, Vec<Vec<f64>>) {
        let t = self.basis.generators();
        let d = t.len();
        let uh = u.adjoint();
        let right: Vec<ComplexMatrix> = t.iter().map(|tc| tc.matmul(&uh)).collect();
        let adjoint: Vec<ComplexMatrix> = right.iter().map(|r| u.matmul(r)).collect();
        let mut r = vec![0.0; d * d];
        for b in 0..d {
            for c in 0..d {
                r[b * d + c] = 0.5 * t[b].matmul(&adjoint[c]).trace().re;
            }
        }
        let apply = |v: &[f64], with_constant: bool| -> Vec<f64> {
            (0..d)
                .map(|a| {
                    let lin: f64 = self.linear[a * d * d..(a + 1) * d * d]
                        .iter()
                        .zip(v)
                        .map(|(l, x)| l * x)
                        .sum();
                    let c0 = if with_constant { self.constant[a] } else { 0.0 };
                    self.amplitude * (c0 + lin)
                })
                .collect()
        };
        let coeffs = apply(&r, true);
        let derivs = du
            .iter()
            .map(|dua| {
                let mut dr = vec![0.0; d * d];
                for c in 0..d {
                    let m = dua.matmul(&right[c]);
                    for b in 0..d {
                        dr[b * d + c] = t[b].matmul(&m).trace().re;
                    }
                }
                apply(&dr, false)
            })
            .collect();
        (coeffs, derivs)
    }

    pub fn evaluate<C: OrbitChart + ?Sized>(&self, chart: &C, theta: &[f64]) -> FieldPoint {
        let (u, du) = chart.group_element(theta);
        let a0 = chart.base().amplitudes();
        let (c, dc) = self.coefficients(&u, &du);
        let factor = match self.kind {
            VariationKind::Normal => C64::new(1.0, 0.0),
            VariationKind::Tangential => C64::new(0.0, 1.0),
        };
        let k = self.basis.combine(&c).scale(factor);
        let gamma = u.matmul(a0);
        let field = k.matmul(&gamma).into_vec();
        let d_field = du
            .iter()
            .zip(&dc)
            .map(|(dua, dca)| {
                let dk = self.basis.combine(dca).scale(factor);
                let dgamma = dua.matmul(a0);
                (&dk.matmul(&gamma) + &k.matmul(&dgamma)).into_vec()
            })
            .collect();
        let tangents = du.iter().map(|dua| dua.matmul(a0).into_vec()).collect();
        FieldPoint {
            state: gamma.into_vec(),
            tangents,
            field,
            d_field,
        }
    }

    /// Largest of `|<ψ, δψ>|` and `|g(δψ, t_a)|` over the chart tangents.
    /// Zero up to round-off for normal fields.
    pub fn normality_defect<C: OrbitChart + ?Sized>(&self, chart: &C, theta: &[f64]) -> Result<f64> {
        super::chart::check_domain(chart.domain(), theta)?;
        let p = self.evaluate(chart, theta);
        let vertical = inner(&p.state, &p.field).norm();
        Ok(p
            .tangents
            .iter()
            .map(|t| fs_metric(&p.state, &p.field, t).abs())
            .fold(vertical, f64::max))
    }
}

/// Volumes of the chart perturbed to `normalize(ψ + s δψ)` for
/// `s ∈ {-ε, 0, ε}`, with central first and second differences.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VolumeVariation {
    pub epsilon: f64,
    pub v0: f64,
    pub v_plus: f64,
    pub v_minus: f64,
    /// `(V(ε) - V(-ε)) / 2ε`.
    pub first: f64,
    /// `(V(ε) - 2V(0) + V(-ε)) / ε²`.
    pub second: f64,
}

fn perturbed_det(p: &FieldPoint, s: f64) -> f64 {
    let d = p.tangents.len();
    let psi: Vec<C64> = p.state.iter().zip(&p.field).map(|(a, b)| a + b * s).collect();
    let t: Vec<Vec<C64>> = p
        .tangents
        .iter()
        .zip(&p.d_field)
        .map(|(ta, da)| ta.iter().zip(da).map(|(x, y)| x + y * s).collect())
        .collect();
    let mut g = vec![0.0; d * d];
    for a in 0..d {
        for b in a..d {
            let v = fs_metric(&psi, &t[a], &t[b]);
            g[a * d + b] = v;
            g[b * d + a] = v;
        }
    }
    real_det(d, &g)
}

pub fn volume_variation<C: OrbitChart + ?Sized>(
    chart: &C,
    field: &VariationField,
    epsilon: f64,
    grid: &Grid,
    exec: Execution,
) -> Result<VolumeVariation> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::NonpositiveStep(epsilon));
    }
    let domain = chart.domain();
    check_grid(domain, grid)?;
    let widths = grid.cell_widths(domain);
    let dets = |theta: &[f64]| {
        let p = field.evaluate(chart, theta);
        Ok([perturbed_det(&p, -epsilon), perturbed_det(&p, 0.0), perturbed_det(&p, epsilon)])
    };
    let nodes = exec.try_map(grid.len(), |i| {
        let theta = grid.node(domain, &widths, i);
        match with_jitter(&theta, &widths, dets, |d| d[1] > 0.0)? {
            Ok(d) => match d.iter().find(|x| x.is_nan() || **x <= 0.0) {
                Some(&bad) => Err(Error::ImmersionLost(bad)),
                None => Ok(d.map(f64::sqrt)),
            },
            Err(d) => Err(Error::SingularMetric(d[1])),
        }
    })?;
    let cell: f64 = widths.iter().product();
    let total = |k: usize| pairwise_sum(&nodes.iter().map(|v| v[k]).collect::<Vec<_>>()) * cell;
    let (v_minus, v0, v_plus) = (total(0), total(1), total(2));
    Ok(VolumeVariation {
        epsilon,
        v0,
        v_plus,
        v_minus,
        first: (v_plus - v_minus) / (2.0 * epsilon),
        second: (v_plus - 2.0 * v0 + v_minus) / (epsilon * epsilon),
    })
}

pub fn volume_sweep<C: OrbitChart + ?Sized>(
    chart: &C,
    field: &VariationField,
    epsilons: &[f64],
    grid: &Grid,
    exec: Execution,
) -> Result<Vec<VolumeVariation>> {
    epsilons
        .iter()
        .map(|&e| volume_variation(chart, field, e, grid, exec))
        .collect()
}

/// CSV `epsilon,V,deltaV,delta2V`.
pub fn write_sweep_csv<W: Write>(out: W, rows: &[VolumeVariation]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let fail = |e: csv::Error| Error::Parse(e.to_string());
    w.write_record(["epsilon", "V", "deltaV", "delta2V"]).map_err(fail)?;
    for r in rows {
        w.write_record([r.epsilon, r.v0, r.first, r.second].map(|x| x.to_string()))
            .map_err(fail)?;
    }
    w.flush()?;
    Ok(())
}

/// Parameters of the minimality check on the `N = 2` orbit.
#[derive(Clone, Debug, PartialEq)]
pub struct MinimalityOptions {
    pub grid: usize,
    pub epsilon: f64,
    pub normal_fields: usize,
    pub tangential_fields: usize,
    /// Bound on `|δV|/V` for normal fields.
    pub normal_tol: f64,
    /// Bound on `|δV|/V` for tangential fields.
    pub tangential_tol: f64,
    /// Lower bound `-second_tol · V` on the recorded `δ²V`.
    pub second_tol: f64,
}

impl Default for MinimalityOptions {
    fn default() -> Self {
        Self {
            grid: 32,
            epsilon: 1e-3,
            normal_fields: 20,
            tangential_fields: 5,
            normal_tol: 1e-2,
            tangential_tol: 1e-3,
            second_tol: 1e-2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinimalityTrial {
    pub kind: VariationKind,
    pub variation: VolumeVariation,
    /// `δV / V(0)`.
    pub first_relative: f64,
    /// `δ²V / V(0)`.
    pub second_relative: f64,
}

/// Volume variation of the `N = 2` orbit (Euler chart) along random normal
/// and tangential fields. Passes when every normal field has
/// `|δV|/V <= normal_tol`, every tangential field `|δV|/V <= tangential_tol`,
/// and every normal field `δ²V >= -second_tol · V`.
pub fn minimal_report<R: Rng + ?Sized>(
    opts: &MinimalityOptions,
    rng: &mut R,
    exec: Execution,
) -> Result<(CheckReport, Vec<MinimalityTrial>)> {
    let chart = EulerChart::new(random_max_entangled(2, rng))?;
    let grid = Grid::uniform(opts.grid, 3);
    let kinds = std::iter::repeat_n(VariationKind::Normal, opts.normal_fields)
        .chain(std::iter::repeat_n(VariationKind::Tangential, opts.tangential_fields));
    let mut trials = Vec::new();
    for kind in kinds {
        let field = VariationField::random(kind, 2, rng);
        let variation = volume_variation(&chart, &field, opts.epsilon, &grid, exec)?;
        trials.push(MinimalityTrial {
            kind,
            variation,
            first_relative: variation.first / variation.v0,
            second_relative: variation.second / variation.v0,
        });
    }
    let select = |k: VariationKind| trials.iter().filter(move |t| t.kind == k);
    let normal_first: Vec<f64> = select(VariationKind::Normal).map(|t| t.first_relative.abs()).collect();
    let tangential_max = select(VariationKind::Tangential)
        .map(|t| t.first_relative.abs())
        .fold(0.0, f64::max);
    let second_min = select(VariationKind::Normal)
        .map(|t| t.second_relative)
        .fold(f64::INFINITY, f64::min);
    let first_ok = normal_first.iter().all(|&x| x <= opts.normal_tol) && tangential_max <= opts.tangential_tol;
    let second_ok = opts.normal_fields == 0 || second_min >= -opts.second_tol;
    let volume = trials.first().map_or(0.0, |t| t.variation.v0);
    let mut r = CheckReport::new("minimal", 2, trials.len(), opts.normal_tol).with_violations(&normal_first);
    r.tangent_rank = Some(3);
    r.ambient_dim = Some(6);
    r.pass = first_ok && second_ok;
    let r = r
        .param("grid", opts.grid)
        .param("epsilon", opts.epsilon)
        .param("normal_fields", opts.normal_fields)
        .param("tangential_fields", opts.tangential_fields)
        .param("volume", volume)
        .param("tangential_max", tangential_max)
        .param("tangential_tol", opts.tangential_tol)
        .param("first_variation_ok", first_ok)
        .param("second_relative_min", if second_min.is_finite() { second_min } else { 0.0 })
        .param("second_tol", opts.second_tol)
        .param("second_variation_ok", second_ok);
    Ok((r, trials))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::submanifold::{maxent_chart, MaxEntChart};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn midpoint_rule_is_second_order() {
        let exact = std::f64::consts::E - 1.0;
        let err = |m| {
            let v = midpoint_integrate(&[(0.0, 1.0)], &Grid::uniform(m, 1), Execution::Sequential, |x| Ok(x[0].exp()))
                .unwrap();
            (v - exact).abs()
        };
        let ratio = err(16) / err(32);
        assert!((ratio - 4.0).abs() < 0.05, "ratio {ratio}");
    }

    #[test]
    fn euler_volume_is_pi_squared() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let chart = EulerChart::new(random_max_entangled(2, &mut rng)).unwrap();
        let coarse = induced_volume(&chart, &Grid::uniform(8, 3), Execution::Parallel).unwrap();
        let fine = induced_volume(&chart, &Grid::uniform(16, 3), Execution::Parallel).unwrap();
        assert!(((fine - coarse) / fine).abs() < 5e-3);
        assert!((fine - PI * PI).abs() / (PI * PI) < 2e-3);
        let mc = haar_monte_carlo_volume(&chart, 2000, &mut rng, Execution::Parallel).unwrap();
        assert!((mc.estimate - PI * PI).abs() / (PI * PI) < 1e-2);
    }

    #[test]
    fn normal_fields_are_normal() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for n in [2, 3] {
            let chart: MaxEntChart = maxent_chart(&random_max_entangled(n, &mut rng), &gellmann_basis(n)).unwrap();
            let field = VariationField::random(VariationKind::Normal, n, &mut rng);
            for _ in 0..20 {
                let th: Vec<f64> = (0..n * n - 1).map(|_| rng.random_range(-1.0..1.0)).collect();
                assert!(field.normality_defect(&chart, &th).unwrap() <= 1e-10);
            }
        }
    }

    #[test]
    fn field_derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let chart = EulerChart::new(random_max_entangled(2, &mut rng)).unwrap();
        let field = VariationField::random(VariationKind::Normal, 2, &mut rng);
        let th = [1.0, 0.8, 2.5];
        let p = field.evaluate(&chart, &th);
        let h = 1e-6;
        for a in 0..3 {
            let (mut tp, mut tm) = (th, th);
            tp[a] += h;
            tm[a] -= h;
            let (fp, fm) = (field.evaluate(&chart, &tp).field, field.evaluate(&chart, &tm).field);
            let err = fp
                .iter()
                .zip(&fm)
                .zip(&p.d_field[a])
                .map(|((x, y), z)| ((x - y) / (2.0 * h) - z).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-7, "a={a} err={err}");
        }
    }

    #[test]
    fn field_is_invariant_under_center() {
        // U and -U are the same orbit point, so the field must agree there.
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let field = VariationField::random(VariationKind::Normal, 2, &mut rng);
        let u = haar_unitary(2, &mut rng);
        let (c1, _) = field.coefficients(&u, &[]);
        let (c2, _) = field.coefficients(&u.scale_real(-1.0), &[]);
        assert_eq!(c1, c2);
    }

    #[test]
    fn tangential_variation_is_volume_neutral() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let chart = EulerChart::new(random_max_entangled(2, &mut rng)).unwrap();
        let field = VariationField::random(VariationKind::Tangential, 2, &mut rng);
        let v = volume_variation(&chart, &field, 1e-3, &Grid::uniform(16, 3), Execution::Parallel).unwrap();
        assert!((v.first / v.v0).abs() < 1e-3, "{v:?}");
    }

    #[test]
    fn sweep_csv_layout() {
        let rows = [VolumeVariation {
            epsilon: 0.5,
            v0: 1.0,
            v_plus: 2.0,
            v_minus: 0.0,
            first: 2.0,
            second: 0.0,
        }];
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &rows).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "epsilon,V,deltaV,delta2V\n0.5,1,2,0\n");
    }

    #[test]
    fn grid_dimension_is_checked() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let chart = EulerChart::new(random_max_entangled(2, &mut rng)).unwrap();
        assert!(matches!(
            induced_volume(&chart, &Grid::uniform(4, 2), Execution::Sequential),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
