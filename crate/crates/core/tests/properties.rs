use std::f64::consts::PI;

use isotropica::numerics::{hbar_fourier, hbar_fourier_onto, integrate_field, Axis, GridSpec, SampledField};
use isotropica::phase::{excess, CleanIntersectionDims};
use isotropica::profiles::Profile;
use isotropica::propagation::{evolve, problem_grid, PropagatorConfig};
use isotropica::spectra::{
    assemble_kernel, apply_p_phi, diagonalize_with, harmonic_surrogate, weyl_count_check, DiagonalizeOptions, Domain,
    LevelSetMeasure, Potential, SchrodingerProblem,
};
use isotropica::states::{
    bohr_sommerfeld_residue, decompose_model_state, eval_model_state, sample_model_state, superpose, CoherentState,
    IsotropicSubmanifoldModel, ModelIsotropicState, StatePhase,
};
use isotropica::wavefront::{fbi_transform, PhaseSpaceGrid};
use isotropica::Complex64;
use proptest::prelude::*;

fn centred(step: f64, n: usize) -> GridSpec {
    GridSpec::new(vec![Axis::fft_centered(step, n).unwrap()]).unwrap()
}

fn packet(x: f64, p: f64, hbar: f64, grid: &GridSpec) -> SampledField {
    CoherentState::gaussian(vec![x], vec![p]).unwrap().sample(grid, hbar).unwrap()
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fourier_preserves_norm_and_inverts(x in -1.0f64..1.0, p in -1.0f64..1.0, hbar in 0.005f64..0.05) {
        let grid = centred(0.2 * hbar.sqrt(), 512);
        let psi = packet(20.0 * x * hbar.sqrt(), 6.0 * p * hbar.sqrt(), hbar, &grid);
        let f = hbar_fourier(&psi, 1).unwrap();
        prop_assert!((f.norm() - psi.norm()).abs() < 1e-10 * psi.norm());
        let back = hbar_fourier_onto(&f, -1, &[grid.axes[0].lower]).unwrap();
        prop_assert!(back.sup_distance(&psi).unwrap() < 1e-9);
    }

    #[test]
    fn integration_is_linear_and_commutes_with_conjugation(
        re in prop::collection::vec(-1.0f64..1.0, 33),
        im in prop::collection::vec(-1.0f64..1.0, 33),
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
    ) {
        let grid = GridSpec::new(vec![Axis::boxed(-1.0, 1.0, 33).unwrap()]).unwrap();
        let f = SampledField::new(grid.clone(), re.iter().zip(&im).map(|(r, i)| Complex64::new(*r, *i)).collect(), 0.1).unwrap();
        let g = SampledField::new(grid, im.iter().zip(&re).map(|(r, i)| Complex64::new(*r, -*i)).collect(), 0.1).unwrap();
        let (ca, cb) = (Complex64::new(a, 0.3), Complex64::new(-0.7, b));
        let lhs = integrate_field(&f.combine(ca, &g, cb).unwrap()).unwrap();
        let rhs = ca * integrate_field(&f).unwrap() + cb * integrate_field(&g).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-13 * (1.0 + rhs.norm()));
        prop_assert_eq!(integrate_field(&f.conj()).unwrap(), integrate_field(&f).unwrap().conj());
    }

    #[test]
    fn leading_order_state_matches_formula(
        x1 in -1.0f64..1.0, v in -3.0f64..3.0, hbar in 0.001f64..0.1, order in 0.0f64..2.0, tilt in -1.0f64..1.0,
    ) {
        let slow = Profile::gaussian(0.7);
        let fast = Profile::standard_gaussian();
        let phase = StatePhase::Linear { coefficients: vec![tilt, 0.0], constant: 0.0 };
        let st = ModelIsotropicState::simple(vec![slow.clone()], vec![fast.clone()], order, phase).unwrap();
        let x2 = v * hbar.sqrt();
        let got = eval_model_state(&st, &[x1, x2], hbar).unwrap();
        let want = Complex64::from_polar(hbar.powf(order) * slow.eval(x1) * fast.eval(v), tilt * x1 / hbar);
        prop_assert!(rel(got, want) < 1e-12);
    }

    #[test]
    fn bohr_sommerfeld_is_reparametrization_invariant(radius in 0.2f64..2.0, w in -0.8f64..0.8) {
        let plain = bohr_sommerfeld_residue(&IsotropicSubmanifoldModel::Circle { radius, warp: 0.0 }, Some(0.07)).unwrap();
        let warped = bohr_sommerfeld_residue(&IsotropicSubmanifoldModel::Circle { radius, warp: w }, Some(0.07)).unwrap();
        prop_assert!((plain - warped).abs() < 1e-9, "{} {}", plain, warped);
    }

    #[test]
    fn excess_vanishes_exactly_for_transverse_counts(
        dx in 0usize..5, dy in 1usize..6, ds_frac in 0.0f64..1.0, extra in 0usize..4,
    ) {
        let ds = (ds_frac * dy as f64).floor() as usize;
        let base = CleanIntersectionDims { intersection: 0, dim_x: dx, dim_y: dy, dim_sigma: ds, dim_gamma: dx + dy };
        let t = base.transverse_intersection();
        prop_assume!(t >= 0);
        let d = CleanIntersectionDims { intersection: t as usize + extra, ..base };
        prop_assert_eq!(excess(&d).unwrap() == 0, extra == 0);
    }

    #[test]
    fn counting_is_monotone_in_c(hbar in 1e-4f64..1e-2, c1 in 0.2f64..2.0, dc in 0.0f64..1.0, alpha in 0.3f64..0.9) {
        let c2 = c1 + dc;
        let s = harmonic_surrogate(hbar, 2.0 * c2 * hbar.powf(alpha)).unwrap();
        let theta = LevelSetMeasure::exact(2.0 * PI, 0.0);
        let a = weyl_count_check(&s, c1, alpha, &theta).unwrap();
        let b = weyl_count_check(&s, c2, alpha, &theta).unwrap();
        prop_assert!(a.count <= b.count);
    }

    #[test]
    fn husimi_covariant_under_fourier(x in -0.4f64..0.4, p in -0.4f64..0.4) {
        let hbar = 0.01;
        // a self-dual grid: 2πħ/(M Δx) = Δx
        let n = 256;
        let step = (2.0 * PI * hbar / n as f64).sqrt();
        let grid = centred(step, n);
        let psi = packet(x, p, hbar, &grid);
        let f = hbar_fourier(&psi, 1).unwrap();
        let ax = Axis::boxed(-0.6, 0.6, 25).unwrap();
        let g = GridSpec::new(vec![ax]).unwrap();
        let psg = PhaseSpaceGrid::new(g.clone(), g).unwrap();
        let h = fbi_transform(&psi, &psg).unwrap();
        let hf = fbi_transform(&f, &psg).unwrap();
        let m = 25;
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                // (X, Ξ) = (ξ, −x): image at (i, j) is the original at (m−1−j, i)
                let a = hf.values[i * m + j];
                let b = h.values[(m - 1 - j) * m + i];
                worst = worst.max((a - b).abs());
            }
        }
        prop_assert!(worst < 1e-4 * h.max(), "{}", worst);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn husimi_mass_is_the_squared_norm(x in -0.3f64..0.3, p in -0.3f64..0.3, hbar in 0.01f64..0.04) {
        let grid = GridSpec::new(vec![Axis::boxed(-2.0, 2.0, 401).unwrap()]).unwrap();
        let psi = packet(x, p, hbar, &grid);
        let ax = Axis::boxed(-1.5, 1.5, 121).unwrap();
        let g = GridSpec::new(vec![ax]).unwrap();
        let h = fbi_transform(&psi, &PhaseSpaceGrid::new(g.clone(), g).unwrap()).unwrap();
        prop_assert!((h.total_mass() / psi.norm_sqr() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn decompose_superpose_round_trip(width in 0.3f64..0.8, hbar in 0.005f64..0.02, tilt in -0.5f64..0.5) {
        let st = ModelIsotropicState::simple(
            vec![Profile::gaussian(width)],
            vec![Profile::standard_gaussian()],
            0.0,
            StatePhase::Linear { coefficients: vec![tilt, 0.0], constant: 0.0 },
        ).unwrap();
        let sh: f64 = hbar.sqrt();
        let grid = GridSpec::new(vec![
            Axis::boxed(-5.0, 5.0, (10.0 / (0.25 * sh)).ceil() as usize + 1).unwrap(),
            Axis::boxed(-10.0 * sh, 10.0 * sh, 81).unwrap(),
        ]).unwrap();
        let family = decompose_model_state(&st, hbar).unwrap();
        let sup = superpose(&family, &grid, hbar).unwrap();
        let direct = sample_model_state(&st, &grid, hbar).unwrap();
        prop_assert!(sup.field.sup_distance(&direct).unwrap() < 1e-6 * direct.sup());
    }

    #[test]
    fn kernel_trace_is_multiplier_sum(width in 0.5f64..3.0, centre in -1.0f64..1.0) {
        let p = SchrodingerProblem::new(1, Potential::cosine(1.0, -0.3), 0.05, 256, Domain::Torus, 1.0).unwrap();
        let s = diagonalize_with(&p, DiagonalizeOptions { retain_vectors: true }).unwrap();
        let phi = Profile::Gaussian { center: centre, width };
        let k = assemble_kernel(&s, &phi).unwrap();
        let sum: f64 = apply_p_phi(&s, &phi).unwrap().iter().sum();
        prop_assert!((k.trace() - sum).abs() < 1e-10);
    }

    #[test]
    fn evolution_is_unitary_and_linear(x in -1.0f64..1.0, p in -0.5f64..0.5, t in 0.1f64..2.0) {
        let hbar = 0.01;
        let prob = SchrodingerProblem::new(1, Potential::cosine(1.0, -0.3), hbar, 1024, Domain::Torus, 1.5).unwrap();
        let grid = problem_grid(&prob).unwrap();
        let cfg = PropagatorConfig::for_hbar(hbar);
        let a = packet(PI + x, p, hbar, &grid);
        let b = packet(PI - 1.0, 0.2, hbar, &grid);
        let ea = evolve(&a, &prob, t, &cfg).unwrap();
        let eb = evolve(&b, &prob, t, &cfg).unwrap();
        prop_assert!((ea.norm() - a.norm()).abs() < 1e-10 * a.norm());
        let (ca, cb) = (Complex64::new(0.6, 0.8), Complex64::new(-1.1, 0.2));
        let mix = evolve(&a.combine(ca, &b, cb).unwrap(), &prob, t, &cfg).unwrap();
        let sum = ea.combine(ca, &eb, cb).unwrap();
        prop_assert!(mix.sup_distance(&sum).unwrap() < 1e-10 * mix.sup());
    }

    #[test]
    fn free_evolution_is_the_fourier_multiplier(x in -0.5f64..0.5, p in -0.5f64..0.5, t in 0.1f64..2.0) {
        let hbar = 0.01;
        let prob = SchrodingerProblem::new(1, Potential::Free { value: 0.0 }, hbar, 1024, Domain::Torus, 1.0).unwrap();
        let grid = problem_grid(&prob).unwrap();
        let psi = packet(PI + x, p, hbar, &grid);
        let got = evolve(&psi, &prob, t, &PropagatorConfig::for_hbar(hbar)).unwrap();
        let dual = hbar_fourier(&psi, 1).unwrap();
        let xi = dual.grid().axes[0].coordinates();
        let moved = SampledField::new(
            dual.grid().clone(),
            dual.values().iter().zip(&xi).map(|(v, k)| v * Complex64::from_polar(1.0, -t * k * k / (2.0 * hbar))).collect(),
            hbar,
        ).unwrap();
        let exact = hbar_fourier_onto(&moved, -1, &[grid.axes[0].lower]).unwrap();
        // the inverse lands on a boxed grid with the same nodes
        let diff = got.values().iter().zip(exact.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(diff < 1e-8 * psi.sup(), "{}", diff);
    }
}
