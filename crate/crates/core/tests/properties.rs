use entgeom::bipartite::{
    gamma_of_state, partial_trace, random_max_entangled, schmidt, state_of_gamma, GammaArray, Subsystem,
};
use entgeom::fubini_study::{fs_metric, fs_symplectic, horizontal_project};
use entgeom::linalg::{inner, ComplexMatrix};
use entgeom::realform::{complexify, hamiltonian_vector_field, realify, realify_vector, split_hermitian};
use entgeom::states::{haar_unitary, random_hermitian, random_state, StateVector};
use entgeom::submanifold::{
    gellmann_basis, maxent_chart, pullback_form, volume_variation, EulerChart, FormKind, Grid, VariationField,
    VariationKind,
};
use entgeom::{Execution, C64};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_vec(n: usize, r: &mut ChaCha8Rng) -> Vec<C64> {
    random_state(n, r).into_amplitudes()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn realify_round_trip(re in prop::collection::vec(-10.0f64..10.0, 1..6), im_seed in any::<u64>()) {
        let mut r = rng(im_seed);
        let amps: Vec<C64> = re.iter().map(|&x| C64::new(x, rand::Rng::random_range(&mut r, -10.0..10.0))).collect();
        prop_assume!(amps.iter().any(|z| z.norm() > 1e-6));
        let psi = StateVector::new(amps).unwrap();
        let back = complexify(&realify(&psi)).unwrap();
        for (a, b) in back.amplitudes().iter().zip(psi.amplitudes()) {
            prop_assert!((a - b).norm() <= 4.0 * f64::EPSILON * b.norm().max(1.0));
        }
    }

    #[test]
    fn schrodinger_is_hamiltonian(seed in any::<u64>(), n in 2usize..5) {
        let mut r = rng(seed);
        let h = random_hermitian(n, &mut r);
        let psi = random_state(n, &mut r);
        let field = hamiltonian_vector_field(&split_hermitian(&h), &realify(&psi)).unwrap();
        let minus_i_h_psi: Vec<C64> = h.matrix().mat_vec(psi.amplitudes()).iter().map(|z| z * C64::new(0.0, -1.0)).collect();
        let expected = realify_vector(&minus_i_h_psi);
        for (a, b) in field.iter().zip(expected.components()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn fubini_study_forms_are_invariant(seed in any::<u64>(), n in 2usize..5, scale in 0.1f64..10.0, phase in 0.0f64..6.3) {
        let mut r = rng(seed);
        let psi = random_vec(n, &mut r);
        let (u, v) = (random_vec(n, &mut r), random_vec(n, &mut r));
        let g = fs_metric(&psi, &u, &v);
        let w = fs_symplectic(&psi, &u, &v);
        let z = C64::from_polar(scale, phase);
        let sc = |x: &[C64]| x.iter().map(|a| a * z).collect::<Vec<_>>();
        prop_assert!((fs_metric(&sc(&psi), &sc(&u), &sc(&v)) - g).abs() <= 1e-10);
        prop_assert!((fs_symplectic(&sc(&psi), &sc(&u), &sc(&v)) - w).abs() <= 1e-10);
        let m = haar_unitary(n, &mut r);
        let (pu, uu, vu) = (m.mat_vec(&psi), m.mat_vec(&u), m.mat_vec(&v));
        prop_assert!((fs_metric(&pu, &uu, &vu) - g).abs() <= 1e-10);
        prop_assert!((fs_symplectic(&pu, &uu, &vu) - w).abs() <= 1e-10);
        let vertical: Vec<C64> = psi.iter().map(|a| a * C64::i()).collect();
        prop_assert!(fs_metric(&psi, &vertical, &v).abs() <= 1e-12);
        prop_assert!(fs_symplectic(&psi, &vertical, &v).abs() <= 1e-12);
    }

    #[test]
    fn horizontal_projection_is_orthogonal(seed in any::<u64>(), n in 2usize..6) {
        let mut r = rng(seed);
        let psi = random_state(n, &mut r);
        let t = horizontal_project(&psi, &random_vec(n, &mut r));
        prop_assert!(inner(psi.amplitudes(), t.direction()).norm() <= 1e-12);
    }

    #[test]
    fn maximally_entangled_reductions_are_mixed(seed in any::<u64>(), n in 2usize..5) {
        let g = random_max_entangled(n, &mut rng(seed));
        let target = ComplexMatrix::identity(n).scale_real(1.0 / n as f64);
        for side in [Subsystem::First, Subsystem::Second] {
            prop_assert!(partial_trace(&g, side).matrix().max_abs_diff(&target) <= 1e-10);
        }
        let psi = state_of_gamma(&g).unwrap();
        let back = gamma_of_state(&psi).unwrap();
        prop_assert_eq!(back, g);
    }

    #[test]
    fn schmidt_reconstructs(seed in any::<u64>(), n in 2usize..5) {
        let mut r = rng(seed);
        let g = gamma_of_state(&random_state(n * n, &mut r)).unwrap();
        let s = schmidt(&g);
        prop_assert!(s.reconstruct().max_abs_diff(g.amplitudes()) <= 1e-10);
        let purity = partial_trace(&g, Subsystem::Second).purity();
        let sum: f64 = s.coefficients.iter().map(|x| x.powi(4)).sum();
        prop_assert!((purity - sum).abs() <= 1e-10);
    }

    #[test]
    fn orbit_is_lagrangian_everywhere(seed in any::<u64>(), n in 2usize..4, theta in prop::collection::vec(-1.0f64..1.0, 8)) {
        let d = n * n - 1;
        let c = maxent_chart(&random_max_entangled(n, &mut rng(seed)), &gellmann_basis(n)).unwrap();
        let w = pullback_form(&c, &theta[..d], FormKind::Symplectic).unwrap();
        prop_assert!(w.max_abs() <= 1e-10);
        let g = pullback_form(&c, &theta[..d], FormKind::Metric).unwrap();
        prop_assert_eq!(g.rank(), d);
        prop_assert!(g.min_eigenvalue() > 0.0);
    }

    #[test]
    fn variation_fields_are_normal(seed in any::<u64>(), theta in prop::collection::vec(0.01f64..3.1, 3)) {
        let mut r = rng(seed);
        let chart = EulerChart::new(random_max_entangled(2, &mut r)).unwrap();
        let field = VariationField::random(VariationKind::Normal, 2, &mut r);
        prop_assert!(field.normality_defect(&chart, &theta).unwrap() <= 1e-10);
    }
}

#[test]
fn gamma_rejects_rectangles() {
    assert!(GammaArray::new(ComplexMatrix::zeros(2, 3)).is_err());
}

/// Scaling the field amplitude scales `δV` linearly and `δ²V` quadratically.
/// On the `N = 2` orbit `δV` vanishes to round-off, so its ratio test is taken
/// against a quadrature floor.
#[test]
fn variation_scales_with_amplitude() {
    let mut r = rng(21);
    let chart = EulerChart::new(random_max_entangled(2, &mut r)).unwrap();
    let grid = Grid::uniform(12, 3);
    for _ in 0..3 {
        let field = VariationField::random(VariationKind::Normal, 2, &mut r);
        let one = volume_variation(&chart, &field, 1e-3, &grid, Execution::Parallel).unwrap();
        let two = volume_variation(&chart, &field.clone().with_amplitude(2.0), 1e-3, &grid, Execution::Parallel).unwrap();
        let floor = 1e-10 * one.v0;
        assert!((two.first - 2.0 * one.first).abs() <= (0.05 * (2.0 * one.first).abs()).max(floor));
        assert!((two.second / one.second - 4.0).abs() <= 0.05 * 4.0, "{} {}", two.second, one.second);
    }
}
