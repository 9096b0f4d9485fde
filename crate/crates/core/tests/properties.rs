use catkit::catability::{witness_expectation, witness_expectation_fock, witness_operator, WitnessSpec};
use catkit::channels::{apply_phase_diffusion, diffused_witness_closed_form, PhaseDiffusion};
use catkit::dirac::{
    dirac_space, relativistic_catability_closed_form, relativistic_catability_numeric, revival_detect, revival_time,
    zitterbewegung_frequency, DiracCatSpec,
};
use catkit::fock::{cat_state, CatSpec, FockSpace, QuantumState};
use catkit::fw::{even_residual, fw_iterate, grade_split, odd_residual, GradedHamiltonian};
use catkit::spin_s::{make_spin_space, spin_cat_expectation_state, spin_cat_witness, SpinCatWitnessSpec};
use catkit::{Complex64, OperatorMatrix, Parity};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn branch() -> impl Strategy<Value = Parity> {
    prop_oneof![Just(Parity::Even), Just(Parity::Odd)]
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> OperatorMatrix {
    let a = random_matrix(rng, dim, dim);
    OperatorMatrix::hermitian((&a + a.adjoint()) * c(0.5, 0.0)).unwrap()
}

/// Random full-rank density matrix `AA†/Tr`, with weights decaying in `n` so
/// the guard band stays nearly empty.
fn random_density(rng: &mut ChaCha8Rng, dim: usize) -> QuantumState {
    let mut a = random_matrix(rng, dim, dim);
    for n in 0..dim {
        a.row_mut(n).scale_mut((-0.3 * n as f64).exp());
    }
    let rho = &a * a.adjoint();
    let tr = rho.trace().re;
    QuantumState::from_density(rho / c(tr, 0.0)).unwrap()
}

fn random_unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> DVector<Complex64> {
    let v = DVector::from_fn(dim, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let n = v.norm();
    v / c(n, 0.0)
}

/// `β = diag(I_k, −I_k)`.
fn block_beta(k: usize) -> OperatorMatrix {
    OperatorMatrix::from_real_diagonal(&(0..2 * k).map(|i| if i < k { 1.0 } else { -1.0 }).collect::<Vec<_>>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fock_sum_matches_trace(seed in any::<u64>(), re in -1.0f64..1.0, im in -1.0f64..1.0,
                              gamma in 0.01f64..10.0, phi in 0.0f64..6.3, b in branch()) {
        let space = FockSpace::with_default_guard(34).unwrap();
        let rho = random_density(&mut ChaCha8Rng::seed_from_u64(seed), 34);
        let spec = WitnessSpec::new(c(re, im), gamma, b, phi).unwrap();
        let fast = witness_expectation_fock(&space, &rho, &spec).unwrap();
        let slow = witness_expectation(&space, &rho, &spec).unwrap();
        prop_assert!((fast - slow).abs() <= 1e-10 * slow.abs().max(1.0), "{} vs {}", fast, slow);
    }

    #[test]
    fn witness_is_positive(re in -1.5f64..1.5, im in -1.5f64..1.5, gamma in 0.01f64..10.0,
                           phi in 0.0f64..6.3, b in branch()) {
        let space = FockSpace::with_default_guard(40).unwrap();
        let w = witness_operator(&space, &WitnessSpec::new(c(re, im), gamma, b, phi).unwrap()).unwrap();
        prop_assert!(w.min_eigenvalue().unwrap() >= -1e-9);
    }

    #[test]
    fn grading_algebra(seed in any::<u64>(), k in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let beta = block_beta(k);
        let h = random_hermitian(&mut rng, 2 * k);
        let (even, odd) = grade_split(&h, &beta).unwrap();
        prop_assert!((&(&even + &odd) - &h).max_norm() <= 1e-14);
        prop_assert!(even_residual(&even, &beta) <= 1e-14);
        prop_assert!(odd_residual(&odd, &beta) <= 1e-14);
        let (even2, odd2) = grade_split(&random_hermitian(&mut rng, 2 * k), &beta).unwrap();
        // even·even and odd·odd are even; even·odd is odd
        prop_assert!(even_residual(&(&even * &even2), &beta) <= 1e-13);
        prop_assert!(even_residual(&(&odd * &odd2), &beta) <= 1e-13);
        prop_assert!(odd_residual(&(&even * &odd2), &beta) <= 1e-13);
    }

    #[test]
    fn fw_preserves_spectrum(seed in any::<u64>(), k in 1usize..4, m in 2.0f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let beta = block_beta(k);
        let (even, _) = grade_split(&random_hermitian(&mut rng, 2 * k), &beta).unwrap();
        let (_, odd) = grade_split(&random_hermitian(&mut rng, 2 * k), &beta).unwrap();
        let gh = GradedHamiltonian::new(beta, m, even.scale_real(0.2), odd.scale_real(0.2)).unwrap();
        let res = fw_iterate(&gh, 12, 1e-10).unwrap();
        let before = gh.spectrum().unwrap();
        let after = res.transformed.spectrum().unwrap();
        for (x, y) in before.iter().zip(&after) {
            prop_assert!((x - y).abs() <= 1e-9);
        }
        prop_assert!(res.final_odd_norm() <= 1e-10);
    }

    #[test]
    fn spin_witness_lower_bound(seed in any::<u64>(), two_s in 1usize..5, b in branch()) {
        let s = two_s as f64 / 2.0;
        let space = FockSpace::with_default_guard(30).unwrap();
        let spin = make_spin_space(s).unwrap();
        let spec = SpinCatWitnessSpec::new(c(0.9, 0.0), 1.0, 0.25, b, s).unwrap();
        let w = spin_cat_witness(&space, &spin, &spec).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = QuantumState::from_vector(random_unit_vector(&mut rng, w.dim())).unwrap();
        let v = spin_cat_expectation_state(&space, &spin, &spec, &psi).unwrap();
        prop_assert!(v >= 0.25 * s * (s + 1.0) - 1e-9, "{}", v);
    }
}

#[test]
fn diffusion_matches_closed_form_on_grid() {
    let alpha = 1.2;
    let space = FockSpace::with_default_guard(catkit::fock::required_cutoff(alpha)).unwrap();
    let cat = CatSpec::even(alpha);
    for sigma in [0.1, 0.5, 1.0, 2.0] {
        for offset in [0.0, 0.4, 1.0, 2.2] {
            let diff = PhaseDiffusion::new(sigma, offset, 128).unwrap();
            let rho = apply_phase_diffusion(&space, &cat, &diff).unwrap();
            let w = witness_expectation(&space, &rho, &WitnessSpec::new(c(alpha, 0.0), 1.0, Parity::Even, 0.0).unwrap())
                .unwrap();
            let expect = diffused_witness_closed_form(alpha, sigma, offset, 0.0);
            assert!((w - expect).abs() <= 1e-6 * expect.max(1e-3), "σ={sigma} θ₀={offset}: {w} vs {expect}");
        }
    }
}

#[test]
fn matched_cat_follows_phase_law() {
    let alpha = 1.0;
    let space = FockSpace::with_default_guard(catkit::fock::required_cutoff(alpha)).unwrap();
    for b in [Parity::Even, Parity::Odd] {
        let cat = cat_state(&space, &CatSpec::new(c(alpha, 0.0), b, 0.0)).unwrap();
        for k in 0..8 {
            let phi = k as f64 * 0.4;
            let v = witness_expectation(&space, &cat, &WitnessSpec::new(c(alpha, 0.0), 0.7, b, phi).unwrap()).unwrap();
            assert!((v - 4.0 * phi.sin().powi(2)).abs() <= 1e-9, "{b:?} φ={phi}: {v}");
        }
    }
}

#[test]
fn dirac_closed_form_matches_numeric() {
    for p in [0.0, 0.2, 0.5, 1.0, 3.0] {
        for alpha in [0.5, 1.0, 1.5] {
            for b in [Parity::Even, Parity::Odd] {
                let spec = DiracCatSpec::new(c(alpha, 0.0), b, 0.8, 1.0, p, 1.0).unwrap();
                let num = relativistic_catability_numeric(&dirac_space(&spec).unwrap(), &spec).unwrap();
                let closed = relativistic_catability_closed_form(&spec);
                assert!((num - closed).abs() <= 1e-8 * closed.abs().max(spec.gamma), "{p} {alpha} {b:?}: {num} vs {closed}");
            }
        }
    }
}

#[test]
fn zitterbewegung_at_twice_the_energy() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (t_max, n) = (200.0, 4096);
    for _ in 0..5 {
        let m = rng.random_range(0.5..2.0);
        let p = rng.random_range(0.0..1.5);
        let f = zitterbewegung_frequency(m, p, t_max, n).unwrap();
        let bin = 2.0 * std::f64::consts::PI / t_max;
        assert!((f - 2.0 * p.hypot(m)).abs() <= bin, "m={m} p={p}: {f}");
    }
}

#[test]
fn revival_near_prediction() {
    for ratio in [30.0, 50.0, 80.0] {
        let t = revival_detect(ratio, 1.0, 2.0).unwrap();
        let expect = revival_time(ratio, 1.0);
        assert!((t - expect).abs() <= 0.02 * expect, "m/ω={ratio}: {t} vs {expect}");
    }
}
