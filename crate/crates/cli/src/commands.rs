use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use entgeom::bipartite::random_max_entangled;
use entgeom::error::{Error, Result};
use entgeom::fubini_study::{curve_length, fs_distance, geodesic_samples};
use entgeom::io::{gamma_to_json, load_input, matrix_to_json, state_to_json, InputKind, LoadedInput};
use entgeom::linalg::eigh;
use entgeom::realform::{
    integrate_flow_with, poisson_bracket, realify, split_hermitian, write_trajectory_csv, Integrator,
};
use entgeom::report::{emit, CheckReport, ReportFormat};
use entgeom::states::{haar_unitary, normalize, pauli_z, random_hermitian, random_state, Observable, StateVector};
use entgeom::submanifold::{
    lagrangian_report, minimal_report, segre_report, volume_sweep, write_sweep_csv, EulerChart, Grid,
    MinimalityOptions, VariationField, VariationKind, LAGRANGIAN_TOL,
};
use entgeom::{Execution, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::args::{Cli, Command, Common, Exec, FlowArgs, Format, Geometry, Method, MinimalArgs, PairArgs, SampleKind, Verify};

/// What a subcommand produced.
pub enum Outcome {
    Reports(Vec<CheckReport>),
    Written,
}

const SWEEP_EPSILONS: [f64; 7] = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4];

pub fn run(cli: &Cli) -> Result<Outcome> {
    let c = &cli.common;
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let exec = match c.execution {
        Exec::Sequential => Execution::Sequential,
        Exec::Parallel => Execution::Parallel,
    };
    let started = Instant::now();
    let report = match &cli.command {
        Command::Verify(v) => match v {
            Verify::Lagrangian => {
                lagrangian_report(c.n, c.points as usize, c.tol.unwrap_or(LAGRANGIAN_TOL), &mut rng, exec)?
            }
            Verify::Segre => segre_report(c.n, c.points as usize, c.tol.unwrap_or(LAGRANGIAN_TOL), &mut rng, exec)?,
            Verify::Minimal(m) => verify_minimal(c, m, &mut rng, exec)?,
            Verify::Flow(f) => verify_flow(c, f)?,
            Verify::Bracket => verify_bracket(c, &mut rng)?,
        },
        Command::Geometry(g) => match g {
            Geometry::Distance(p) => geometry_distance(c, p, &mut rng)?,
            Geometry::Length { pair, samples } => geometry_length(c, pair, *samples as usize, &mut rng)?,
        },
        Command::Sample { what, count } => {
            sample(c, *what, *count as usize, &mut rng)?;
            return Ok(Outcome::Written);
        }
        Command::Evolve { flow, stride } => {
            evolve(c, flow, *stride as usize)?;
            return Ok(Outcome::Written);
        }
    };
    let mut report = report.with_seed(c.seed);
    if c.timing {
        report.wall_ms = Some(started.elapsed().as_secs_f64() * 1e3);
    }
    Ok(Outcome::Reports(vec![report]))
}

pub fn write_reports(c: &Common, reports: &[CheckReport]) -> Result<()> {
    let format = match c.format {
        Format::Json => ReportFormat::Json,
        Format::Csv => ReportFormat::Csv,
    };
    with_output(c.output.as_deref(), |w| emit(reports, format, w))
}

fn with_output(path: Option<&Path>, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            body(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            body(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn verify_minimal(c: &Common, m: &MinimalArgs, rng: &mut ChaCha8Rng, exec: Execution) -> Result<CheckReport> {
    if c.n != 2 {
        return Err(Error::Unsupported(format!(
            "the volume checks run on the N = 2 orbit only, got n = {}",
            c.n
        )));
    }
    let mut opts = MinimalityOptions {
        grid: m.grid as usize,
        epsilon: m.epsilon,
        normal_fields: m.normal_fields,
        tangential_fields: m.tangential_fields,
        ..MinimalityOptions::default()
    };
    if let Some(tol) = c.tol {
        opts.normal_tol = tol;
    }
    let (report, _) = minimal_report(&opts, rng, exec)?;
    if let Some(path) = &m.sweep {
        let mut local = ChaCha8Rng::seed_from_u64(c.seed);
        local.set_stream(1);
        let chart = EulerChart::new(random_max_entangled(2, &mut local))?;
        let field = VariationField::random(VariationKind::Normal, 2, &mut local);
        let rows = volume_sweep(&chart, &field, &SWEEP_EPSILONS, &Grid::uniform(opts.grid, 3), exec)?;
        with_output(Some(path), |w| write_sweep_csv(w, &rows))?;
    }
    Ok(report)
}

fn integrator(m: Method) -> Integrator {
    match m {
        Method::Rk4 => Integrator::Rk4,
        Method::ImplicitMidpoint => Integrator::ImplicitMidpoint,
        Method::ExplicitEuler => Integrator::ExplicitEuler,
    }
}

fn default_tolerance(m: Method) -> f64 {
    match m {
        Method::Rk4 => 1e-10,
        Method::ImplicitMidpoint => 1e-6,
        Method::ExplicitEuler => 1e-2,
    }
}

fn load_state(path: &Path) -> Result<StateVector> {
    match load_input(path, InputKind::State)? {
        LoadedInput::State(s) => Ok(s),
        _ => unreachable!("state requested"),
    }
}

/// Hamiltonian and initial state of a flow run, with their sizes reconciled.
fn flow_inputs(c: &Common, f: &FlowArgs) -> Result<(Observable, StateVector)> {
    let h = match &f.hamiltonian {
        Some(p) => match load_input(p, InputKind::Observable)? {
            LoadedInput::Observable(h) => h,
            _ => unreachable!("observable requested"),
        },
        None if c.n == 2 => pauli_z(),
        None => {
            let mut d = vec![0.0; c.n];
            d[0] = 1.0;
            d[1] = -1.0;
            Observable::diagonal(&d)
        }
    };
    let psi = match &f.state {
        Some(p) => load_state(p)?,
        None => normalize(&vec![C64::new(1.0, 0.0); h.dim()])?,
    };
    if psi.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: psi.dim(),
        });
    }
    Ok((h, psi))
}

fn verify_flow(c: &Common, f: &FlowArgs) -> Result<CheckReport> {
    let (h, psi0) = flow_inputs(c, f)?;
    let n = h.dim();
    let q = split_hermitian(&h);
    let x0 = realify(&psi0);
    let eig = eigh(h.matrix());
    let coeffs = eig.vectors.adjoint().mat_vec(psi0.amplitudes());
    let energy0 = h.expectation_in(&psi0)?;
    let mut errors = Vec::new();
    let (mut energy_drift, mut norm_drift): (f64, f64) = (0.0, 0.0);
    integrate_flow_with(&q, &x0, f.t, f.dt, integrator(f.method), |k, time, x| {
        if k == 0 {
            return Ok(());
        }
        let evolved: Vec<C64> = coeffs
            .iter()
            .zip(&eig.values)
            .map(|(c, l)| c * C64::from_polar(1.0, -l * time))
            .collect();
        let exact = realify(&StateVector::new(eig.vectors.mat_vec(&evolved))?);
        errors.push(x.distance(&exact));
        energy_drift = energy_drift.max((q.form().value(x)? - energy0).abs());
        norm_drift = norm_drift.max((0.5 * x.g_norm_sqr() - 1.0).abs());
        Ok(())
    })?;
    let tol = c.tol.unwrap_or_else(|| default_tolerance(f.method));
    let mut r = CheckReport::new("flow", n, errors.len(), tol).with_violations(&errors);
    r.ambient_dim = Some(2 * n);
    r.pass = r.max_violation <= tol;
    let source = |p: &Option<std::path::PathBuf>| p.as_ref().map_or("default".to_string(), |p| p.display().to_string());
    Ok(r
        .param("method", integrator(f.method).name())
        .param("dt", f.dt)
        .param("t", f.t)
        .param("endpoint_error", errors.last().copied().unwrap_or(0.0))
        .param("energy_drift", energy_drift)
        .param("norm_drift", norm_drift)
        .param("hamiltonian", source(&f.hamiltonian))
        .param("state", source(&f.state)))
}

fn verify_bracket(c: &Common, rng: &mut ChaCha8Rng) -> Result<CheckReport> {
    let n = c.n;
    let jacobi_tol = c.tol.unwrap_or(1e-9);
    let correspondence_tol = c.tol.unwrap_or(1e-10);
    let (mut anti, mut jacobi, mut corr): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut violations = Vec::new();
    for _ in 0..c.points {
        let (a, b, h) = (random_hermitian(n, rng), random_hermitian(n, rng), random_hermitian(n, rng));
        let x = realify(&random_state(n, rng));
        let (qa, qb, qh) = (split_hermitian(&a), split_hermitian(&b), split_hermitian(&h));
        let ab = poisson_bracket(&qa, &qb, &x)?;
        let ba = poisson_bracket(&qb, &qa, &x)?;
        let (fa, fb, fh) = (qa.form(), qb.form(), qh.form());
        let cyclic = fa.bracket(fb)?.poisson(fh, &x)? + fb.bracket(fh)?.poisson(fa, &x)? + fh.bracket(fa)?.poisson(fb, &x)?;
        let commutator = split_hermitian(&a.commutator_bracket(&b)?).form().value(&x)?;
        let v = [(ab + ba).abs(), cyclic.abs(), (ab - commutator).abs()];
        anti = anti.max(v[0]);
        jacobi = jacobi.max(v[1]);
        corr = corr.max(v[2]);
        violations.push(v.into_iter().fold(0.0, f64::max));
    }
    let mut r = CheckReport::new("bracket", n, c.points as usize, jacobi_tol).with_violations(&violations);
    r.ambient_dim = Some(2 * n);
    r.pass = anti == 0.0 && jacobi <= jacobi_tol && corr <= correspondence_tol;
    Ok(r
        .param("antisymmetry_max", anti)
        .param("jacobi_max", jacobi)
        .param("correspondence_max", corr)
        .param("correspondence_tol", correspondence_tol))
}

fn state_pair(c: &Common, p: &PairArgs, rng: &mut ChaCha8Rng) -> Result<(StateVector, StateVector)> {
    let a = match &p.a {
        Some(path) => load_state(path)?,
        None => random_state(c.n, rng),
    };
    let b = match &p.b {
        Some(path) => load_state(path)?,
        None => random_state(a.dim(), rng),
    };
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok((a, b))
}

fn geometry_distance(c: &Common, p: &PairArgs, rng: &mut ChaCha8Rng) -> Result<CheckReport> {
    let (a, b) = state_pair(c, p, rng)?;
    let d = fs_distance(&a, &b);
    let u = haar_unitary(a.dim(), rng);
    let z = C64::from_polar(rng.random_range(0.5..2.0), rng.random_range(0.0..std::f64::consts::TAU));
    let rotated = fs_distance(&a.apply(&u)?, &b.apply(&u)?);
    let rescaled = fs_distance(&a.scaled(z)?, &b);
    let violations = [(rotated - d).abs(), (rescaled - d).abs()];
    let tol = c.tol.unwrap_or(1e-10);
    let mut r = CheckReport::new("distance", a.dim(), 1, tol).with_violations(&violations);
    r.pass = r.max_violation <= tol && (0.0..=std::f64::consts::FRAC_PI_2).contains(&d);
    Ok(r.param("distance", d))
}

fn geometry_length(c: &Common, p: &PairArgs, samples: usize, rng: &mut ChaCha8Rng) -> Result<CheckReport> {
    let (a, b) = state_pair(c, p, rng)?;
    let d = fs_distance(&a, &b);
    let length = curve_length(&geodesic_samples(&a, &b, samples))?;
    let tol = c.tol.unwrap_or(1e-3);
    let mut r = CheckReport::new("length", a.dim(), samples, tol).with_violations(&[(length - d).abs()]);
    r.pass = r.max_violation <= tol;
    Ok(r.param("distance", d).param("length", length))
}

fn sample(c: &Common, what: SampleKind, count: usize, rng: &mut ChaCha8Rng) -> Result<()> {
    with_output(c.output.as_deref(), |w| {
        for _ in 0..count {
            let line = match what {
                SampleKind::State => state_to_json(&random_state(c.n, rng)),
                SampleKind::Unitary => matrix_to_json(&haar_unitary(c.n, rng)),
                SampleKind::Maxent => gamma_to_json(&random_max_entangled(c.n, rng)),
            };
            writeln!(w, "{line}")?;
        }
        Ok(())
    })
}

fn evolve(c: &Common, f: &FlowArgs, stride: usize) -> Result<()> {
    let (h, psi0) = flow_inputs(c, f)?;
    let q = split_hermitian(&h);
    with_output(c.output.as_deref(), |w| {
        write_trajectory_csv(w, &q, &realify(&psi0), f.t, f.dt, integrator(f.method), stride).map(|_| ())
    })
}
