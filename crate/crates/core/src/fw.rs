//! ℤ₂-graded operators and iterative Foldy–Wouthuysen block diagonalization.
//!
//! An involution β grades operators by `Θ(X) = βXβ`: even parts commute with
//! β, odd parts anticommute. A Hamiltonian `H = βm + 𝓔 + 𝓞` is brought to
//! block form by conjugating with `e^{iS}`, `S` odd.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{CatError, Result};
use crate::fock::{matrix_exponential, OperatorMatrix, HERMITIAN_TOL};

/// Residual allowed in the grading relations.
pub const GRADING_TOL: f64 = 1e-12;

pub const DEFAULT_MAX_ITER: usize = 12;
pub const DEFAULT_TOL: f64 = 1e-10;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `H = βm + 𝓔 + 𝓞` with `[β, 𝓔] = 0` and `{β, 𝓞} = 0`.
#[derive(Clone, Debug)]
pub struct GradedHamiltonian {
    beta: OperatorMatrix,
    mass: f64,
    even_part: OperatorMatrix,
    odd_part: OperatorMatrix,
}

impl GradedHamiltonian {
    pub fn new(beta: OperatorMatrix, mass: f64, even_part: OperatorMatrix, odd_part: OperatorMatrix) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(CatError::ZeroMass(mass));
        }
        let dim = beta.dim();
        for op in [&even_part, &odd_part] {
            if op.dim() != dim {
                return Err(CatError::DimensionMismatch {
                    expected: dim,
                    found: op.dim(),
                });
            }
        }
        check_involution(&beta)?;
        let scale = even_part.max_norm().max(odd_part.max_norm()).max(1.0);
        let e = even_residual(&even_part, &beta);
        if e > GRADING_TOL * scale {
            return Err(CatError::NotGraded(format!("even part fails [beta, E] = 0 by {e:e}")));
        }
        let o = odd_residual(&odd_part, &beta);
        if o > GRADING_TOL * scale {
            return Err(CatError::NotGraded(format!("odd part fails {{beta, O}} = 0 by {o:e}")));
        }
        let gh = Self {
            beta: OperatorMatrix::hermitian(beta.into_entries())?,
            mass,
            even_part,
            odd_part,
        };
        let h = gh.total().hermiticity_residual();
        if h > HERMITIAN_TOL * scale {
            return Err(CatError::NotHermitian(h));
        }
        Ok(gh)
    }

    /// Splits `H − βm` into its graded parts.
    pub fn from_total(h: &OperatorMatrix, beta: &OperatorMatrix, mass: f64) -> Result<Self> {
        let rest = h - &beta.scale_real(mass);
        let (even, odd) = grade_split(&rest, beta)?;
        Self::new(beta.clone(), mass, even, odd)
    }

    pub fn beta(&self) -> &OperatorMatrix {
        &self.beta
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn even_part(&self) -> &OperatorMatrix {
        &self.even_part
    }

    pub fn odd_part(&self) -> &OperatorMatrix {
        &self.odd_part
    }

    pub fn dim(&self) -> usize {
        self.beta.dim()
    }

    pub fn total(&self) -> OperatorMatrix {
        &(&self.beta.scale_real(self.mass) + &self.even_part) + &self.odd_part
    }

    /// Even part including the mass term, `βm + 𝓔`.
    pub fn block_diagonal(&self) -> OperatorMatrix {
        &self.beta.scale_real(self.mass) + &self.even_part
    }

    pub fn spectrum(&self) -> Result<Vec<f64>> {
        self.total().assert_hermitian()?.eigenvalues_hermitian()
    }
}

fn check_involution(beta: &OperatorMatrix) -> Result<()> {
    let r = (&(beta * beta) - &OperatorMatrix::identity(beta.dim())).max_norm();
    if r > GRADING_TOL {
        return Err(CatError::NotInvolution(r));
    }
    Ok(())
}

/// `‖βXβ − X‖_max`: zero for even `X`.
pub fn even_residual(x: &OperatorMatrix, beta: &OperatorMatrix) -> f64 {
    (&(&(beta * x) * beta) - x).max_norm()
}

/// `‖βXβ + X‖_max`: zero for odd `X`.
pub fn odd_residual(x: &OperatorMatrix, beta: &OperatorMatrix) -> f64 {
    (&(&(beta * x) * beta) + x).max_norm()
}

/// `((H + βHβ)/2, (H − βHβ)/2)`.
pub fn grade_split(h: &OperatorMatrix, beta: &OperatorMatrix) -> Result<(OperatorMatrix, OperatorMatrix)> {
    check_involution(beta)?;
    let image = &(beta * h) * beta;
    let even = (h + &image).scale_real(0.5);
    let odd = h - &even;
    let keep = |op: OperatorMatrix| {
        if h.hermitian_hint() && beta.hermitian_hint() {
            op.assert_hermitian()
        } else {
            Ok(op)
        }
    };
    Ok((keep(even)?, keep(odd)?))
}

/// `S₁ = −(i/2m)β𝓞`, which cancels the odd term at first order:
/// `i[S₁, βm] = −𝓞`.
pub fn fw_generator_first(gh: &GradedHamiltonian) -> Result<OperatorMatrix> {
    let s1 = (gh.beta() * gh.odd_part()).scale(-I / (2.0 * gh.mass()));
    let cancel = &s1.commutator(&gh.beta().scale_real(gh.mass())).scale(I) + gh.odd_part();
    let scale = gh.odd_part().max_norm().max(1.0);
    if cancel.max_norm() > GRADING_TOL * scale {
        return Err(CatError::NotGraded(format!(
            "first-order generator leaves {:e} of the odd part",
            cancel.max_norm()
        )));
    }
    s1.assert_hermitian()
}

/// `S₂ = −(i/8m²)β[𝓞, 𝓔]`, evaluated as written.
///
/// `β[𝓞, 𝓔]` is Hermitian, so this operator is anti-Hermitian; it is odd and
/// carries the `m⁻²` scaling, but it is not used to build a unitary.
pub fn fw_generator_second(gh: &GradedHamiltonian) -> Result<OperatorMatrix> {
    let comm = gh.odd_part().commutator(gh.even_part());
    let m = gh.mass();
    let s2 = (gh.beta() * &comm).scale(-I / (8.0 * m * m));
    if !s2.is_finite() {
        return Err(CatError::NonFinite);
    }
    Ok(s2)
}

/// One conjugation step of [`fw_iterate`].
#[derive(Clone, Debug)]
pub struct FwStep {
    pub iteration: usize,
    pub generator: OperatorMatrix,
    pub odd_norm_before: f64,
    pub odd_norm_after: f64,
}

#[derive(Clone, Debug)]
pub struct FwResult {
    pub unitary: OperatorMatrix,
    pub transformed: GradedHamiltonian,
    pub generator_log: Vec<FwStep>,
    pub converged: bool,
}

impl FwResult {
    pub fn final_odd_norm(&self) -> f64 {
        self.transformed.odd_part().max_norm()
    }
}

/// Repeatedly conjugates `H ↦ e^{iS}He^{−iS}` with `S = −(i/2m)β·odd(H)`
/// until the odd part's max norm is at most `tol`.
///
/// On failure the partial result is returned inside
/// [`CatError::NoConvergence`].
pub fn fw_iterate(gh: &GradedHamiltonian, max_iter: usize, tol: f64) -> Result<FwResult> {
    if max_iter == 0 {
        return Err(CatError::invalid("max_iter must be >= 1"));
    }
    if !(tol > 0.0) {
        return Err(CatError::invalid(format!("tol must be positive, got {tol}")));
    }
    let mut current = gh.clone();
    let mut unitary = OperatorMatrix::identity(gh.dim());
    let mut log = Vec::new();
    loop {
        let before = current.odd_part().max_norm();
        if before <= tol {
            return Ok(FwResult {
                unitary,
                transformed: current,
                generator_log: log,
                converged: true,
            });
        }
        if log.len() == max_iter {
            return Err(CatError::NoConvergence(Box::new(FwResult {
                unitary,
                transformed: current,
                generator_log: log,
                converged: false,
            })));
        }
        let s = fw_generator_first(&current)?;
        let step = matrix_exponential(&s, I)?;
        let h = current.total().conjugate_by(&step);
        // Conjugation by an exact unitary keeps H Hermitian; strip rounding.
        let h = OperatorMatrix::hermitian(((h.entries() + h.entries().adjoint()) * Complex64::new(0.5, 0.0)).clone())?;
        current = GradedHamiltonian::from_total(&h, gh.beta(), gh.mass())?;
        unitary = &step * &unitary;
        log.push(FwStep {
            iteration: log.len() + 1,
            generator: s,
            odd_norm_before: before,
            odd_norm_after: current.odd_part().max_norm(),
        });
    }
}

/// Partial sum of `√(p² + m²) = m Σ_k C(½, k)(p/m)^{2k}` through `p^order`.
pub fn fw_kinetic_series(p: f64, m: f64, order: usize) -> Result<f64> {
    if !(m > 0.0) {
        return Err(CatError::ZeroMass(m));
    }
    if p.abs() >= m {
        return Err(CatError::DivergentRegime { p, m });
    }
    if order > 10 {
        return Err(CatError::invalid(format!("kinetic series is tabulated to order 10, got {order}")));
    }
    let x2 = (p / m).powi(2);
    let mut coeff = 1.0;
    let mut power = 1.0;
    let mut sum = 0.0;
    for k in 0..=order / 2 {
        sum += coeff * power;
        // C(½, k+1) = C(½, k)·(½ − k)/(k + 1)
        coeff *= (0.5 - k as f64) / (k as f64 + 1.0);
        power *= x2;
    }
    Ok(m * sum)
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn op4(rows: [[Complex64; 4]; 4]) -> OperatorMatrix {
    OperatorMatrix::new(DMatrix::from_fn(4, 4, |i, j| rows[i][j]))
}

/// Dirac matrices `γ⁰ … γ³` in the standard representation.
pub fn gamma_matrices() -> [OperatorMatrix; 4] {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    let g0 = op4([[one, z, z, z], [z, one, z, z], [z, z, -one, z], [z, z, z, -one]]);
    let g1 = op4([[z, z, z, one], [z, z, one, z], [z, -one, z, z], [-one, z, z, z]]);
    let g2 = op4([[z, z, z, -i], [z, z, i, z], [z, i, z, z], [-i, z, z, z]]);
    let g3 = op4([[z, z, one, z], [z, z, z, -one], [-one, z, z, z], [z, one, z, z]]);
    [g0, g1, g2, g3]
}

/// `β = γ⁰`.
pub fn dirac_beta() -> OperatorMatrix {
    OperatorMatrix::hermitian(gamma_matrices()[0].entries().clone()).expect("gamma0 is Hermitian")
}

/// `α_x = γ⁰γ¹`.
pub fn dirac_alpha_x() -> OperatorMatrix {
    let [g0, g1, ..] = gamma_matrices();
    (&g0 * &g1).assert_hermitian().expect("alpha_x is Hermitian")
}

/// `max_{μν} ‖{γ^μ, γ^ν} − 2g^{μν}I‖_max` with signature (+, −, −, −).
pub fn clifford_residual() -> f64 {
    let g = gamma_matrices();
    let id = OperatorMatrix::identity(4);
    let mut worst: f64 = 0.0;
    for mu in 0..4 {
        for nu in 0..4 {
            let metric = match (mu == nu, mu) {
                (false, _) => 0.0,
                (true, 0) => 2.0,
                (true, _) => -2.0,
            };
            let r = &g[mu].anticommutator(&g[nu]) - &id.scale_real(metric);
            worst = worst.max(r.max_norm());
        }
    }
    worst
}

/// `H = α_x p + βm` for 1-D momentum `p`.
pub fn free_dirac_hamiltonian(p: f64, m: f64) -> Result<GradedHamiltonian> {
    let odd = dirac_alpha_x().scale_real(p);
    GradedHamiltonian::new(dirac_beta(), m, OperatorMatrix::zeros(4), odd)
}

/// Dirac Hamiltonian on `potential.len()` lattice sites with spacing `h`:
/// `α_x ⊗ P + β ⊗ m + I₄ ⊗ V`, spinor index outermost, `P` the central
/// difference `−i d/dx` with open ends.
pub fn lattice_dirac_hamiltonian(potential: &[f64], spacing: f64, m: f64) -> Result<GradedHamiltonian> {
    let n = potential.len();
    if n < 2 {
        return Err(CatError::invalid("lattice needs at least two sites"));
    }
    if !(spacing > 0.0) {
        return Err(CatError::invalid(format!("lattice spacing must be positive, got {spacing}")));
    }
    let mut p = DMatrix::<Complex64>::zeros(n, n);
    for j in 0..n - 1 {
        p[(j, j + 1)] = c(0.0, -0.5 / spacing);
        p[(j + 1, j)] = c(0.0, 0.5 / spacing);
    }
    let p = OperatorMatrix::hermitian(p)?;
    let v = OperatorMatrix::from_real_diagonal(potential);
    let beta = dirac_beta().kron(&OperatorMatrix::identity(n));
    let odd = dirac_alpha_x().kron(&p);
    let even = OperatorMatrix::identity(4).kron(&v);
    GradedHamiltonian::new(beta, m, even, odd)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dispersion(p: f64, m: f64) -> f64 {
        (p * p + m * m).sqrt()
    }

    #[test]
    fn splitting_pure_beta() {
        let beta = dirac_beta();
        let (even, odd) = grade_split(&beta, &beta).unwrap();
        assert!((&even - &beta).max_norm() == 0.0);
        assert!(odd.max_norm() == 0.0);
    }

    #[test]
    fn kinetic_term_is_odd() {
        let h = dirac_alpha_x().scale_real(0.4);
        let (even, odd) = grade_split(&h, &dirac_beta()).unwrap();
        assert!(even.max_norm() == 0.0);
        assert!((&odd - &h).max_norm() == 0.0);
    }

    #[test]
    fn rejects_non_involution() {
        let b = dirac_beta().scale_real(2.0);
        assert!(matches!(grade_split(&b, &b), Err(CatError::NotInvolution(_))));
    }

    #[test]
    fn rejects_zero_mass() {
        assert!(matches!(free_dirac_hamiltonian(0.1, 0.0), Err(CatError::ZeroMass(_))));
    }

    #[test]
    fn rejects_mislabelled_parts() {
        let r = GradedHamiltonian::new(dirac_beta(), 1.0, dirac_alpha_x(), OperatorMatrix::zeros(4));
        assert!(matches!(r, Err(CatError::NotGraded(_))));
    }

    #[test]
    fn clifford_relations_hold_exactly() {
        assert_eq!(clifford_residual(), 0.0);
        let beta = dirac_beta();
        assert_eq!(beta.anticommutator(&dirac_alpha_x()).max_norm(), 0.0);
    }

    #[test]
    fn rest_frame_spectrum() {
        let vals = free_dirac_hamiltonian(0.0, 1.0).unwrap().spectrum().unwrap();
        let expected = [-1.0, -1.0, 1.0, 1.0];
        assert!(vals.iter().zip(expected).all(|(a, b)| (a - b).abs() < 1e-14));
    }

    #[test]
    fn first_generator_cancels_odd_term() {
        let gh = free_dirac_hamiltonian(0.2, 1.0).unwrap();
        let s1 = fw_generator_first(&gh).unwrap();
        let cancel = &s1.commutator(gh.beta()).scale(I) + gh.odd_part();
        assert!(cancel.max_norm() <= 1e-14);
        assert!(s1.anticommutator(gh.beta()).max_norm() <= 1e-14);
        let rest = free_dirac_hamiltonian(0.0, 1.0).unwrap();
        assert_eq!(fw_generator_first(&rest).unwrap().max_norm(), 0.0);
    }

    #[test]
    fn second_generator_vanishes_without_even_part() {
        let gh = free_dirac_hamiltonian(0.3, 1.0).unwrap();
        assert_eq!(fw_generator_second(&gh).unwrap().max_norm(), 0.0);
    }

    #[test]
    fn second_generator_on_lattice_is_odd_and_scales() {
        let v: Vec<f64> = (0..12).map(|j| 0.3 * ((j as f64) * 0.5).sin()).collect();
        let gh1 = lattice_dirac_hamiltonian(&v, 0.5, 1.0).unwrap();
        let gh2 = lattice_dirac_hamiltonian(&v, 0.5, 2.0).unwrap();
        let s1 = fw_generator_second(&gh1).unwrap();
        let s2 = fw_generator_second(&gh2).unwrap();
        assert!(s1.max_norm() > 0.0);
        assert!(s1.anticommutator(gh1.beta()).max_norm() <= 1e-12);
        let ratio = s1.max_norm() / s2.max_norm();
        assert!((ratio - 4.0).abs() <= 0.04, "{ratio}");
        let anti = &s1 + &s1.adjoint();
        assert!(anti.max_norm() <= 1e-14);
    }

    #[test]
    fn iteration_recovers_dispersion() {
        let gh = free_dirac_hamiltonian(0.2, 1.0).unwrap();
        let res = fw_iterate(&gh, 3, 1e-12).or_else(|e| match e {
            CatError::NoConvergence(partial) => Ok(*partial),
            other => Err(other),
        });
        let res = res.unwrap();
        assert_eq!(res.generator_log.len(), 3);
        let vals = res.transformed.block_diagonal().eigenvalues_hermitian().unwrap();
        let e = dispersion(0.2, 1.0);
        assert!((vals[0] + e).abs() < 1e-8 && (vals[3] - e).abs() < 1e-8, "{vals:?}");
        assert!((e - 1.019_803_902_718_557).abs() < 1e-12);
    }

    #[test]
    fn converged_even_part_is_beta_energy() {
        for x in [0.05, 0.1, 0.2, 0.3] {
            let gh = free_dirac_hamiltonian(x, 1.0).unwrap();
            let res = fw_iterate(&gh, DEFAULT_MAX_ITER, DEFAULT_TOL).unwrap();
            assert!(res.converged);
            assert!(res.unitary.unitarity_residual() <= 1e-10);
            let target = gh.beta().scale_real(dispersion(x, 1.0));
            assert!((&res.transformed.block_diagonal() - &target).max_norm() <= 1e-6);
            for step in &res.generator_log {
                assert!(step.generator.anticommutator(gh.beta()).max_norm() <= 1e-12);
                assert!(step.generator.hermiticity_residual() <= 1e-12);
            }
        }
    }

    #[test]
    fn rest_frame_needs_no_iteration() {
        let res = fw_iterate(&free_dirac_hamiltonian(0.0, 1.0).unwrap(), 4, 1e-10).unwrap();
        assert!(res.generator_log.is_empty());
    }

    #[test]
    fn shrink_factor_is_quadratic_in_momentum() {
        let rate = |x: f64| {
            let gh = free_dirac_hamiltonian(x, 1.0).unwrap();
            let res = fw_iterate(&gh, DEFAULT_MAX_ITER, 1e-13).unwrap();
            let s = &res.generator_log[0];
            s.odd_norm_after / s.odd_norm_before
        };
        let ratio = rate(0.2) / rate(0.1);
        assert!((ratio - 4.0).abs() <= 2.0, "{ratio}");
    }

    #[test]
    fn kinetic_series_values() {
        assert_eq!(fw_kinetic_series(0.0, 1.3, 10).unwrap(), 1.3);
        let s = fw_kinetic_series(0.3, 1.0, 10).unwrap();
        assert!((s - 1.09f64.sqrt()).abs() <= 1e-6);
        let quartic = fw_kinetic_series(0.5, 2.0, 4).unwrap() - fw_kinetic_series(0.5, 2.0, 2).unwrap();
        let x: f64 = 0.25;
        assert!((quartic + x.powi(4) / 8.0 * 2.0).abs() < 1e-15);
        assert!(matches!(fw_kinetic_series(1.0, 1.0, 4), Err(CatError::DivergentRegime { .. })));
    }

    #[test]
    fn no_convergence_returns_partial_log() {
        let gh = free_dirac_hamiltonian(0.3, 1.0).unwrap();
        match fw_iterate(&gh, 1, 1e-14) {
            Err(CatError::NoConvergence(partial)) => assert_eq!(partial.generator_log.len(), 1),
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }
}
