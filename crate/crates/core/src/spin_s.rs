//! Catability witness on an oscillator ⊗ spin-s space:
//! `Ô_s^± = 𝒞(α) ⊗ I + γ(I ∓ Π̂ ⊗ 𝒫_s) + λ I ⊗ Ŝ²`, Fock index outermost.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::catability::quadratic_operator;
use crate::error::{CatError, Result};
use crate::fock::{self, coherent_state, expectation_real, FockSpace, OperatorMatrix, Parity, QuantumState};
use crate::su11::make_su11;

/// Spin matrices in the `|s, m⟩` basis ordered `m = s, s−1, …, −s`.
#[derive(Clone, Debug)]
pub struct SpinSpace {
    two_s: usize,
    pub sx: OperatorMatrix,
    pub sy: OperatorMatrix,
    pub sz: OperatorMatrix,
    pub parity_spin: OperatorMatrix,
}

impl SpinSpace {
    pub fn s(&self) -> f64 {
        self.two_s as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.two_s + 1
    }

    /// `s(s+1)`.
    pub fn casimir_value(&self) -> f64 {
        let s = self.s();
        s * (s + 1.0)
    }

    pub fn casimir(&self) -> OperatorMatrix {
        let sq = &(&(&self.sx * &self.sx) + &(&self.sy * &self.sy)) + &(&self.sz * &self.sz);
        OperatorMatrix::hermitian(sq.entries().clone()).expect("S² is Hermitian")
    }

    /// Max residual of `[S_i, S_j] − iε_{ijk}S_k` over the three pairs.
    pub fn closure_residual(&self) -> f64 {
        let i = Complex64::new(0.0, 1.0);
        let r = |a: &OperatorMatrix, b: &OperatorMatrix, c: &OperatorMatrix| (&a.commutator(b) - &c.scale(i)).max_norm();
        r(&self.sx, &self.sy, &self.sz)
            .max(r(&self.sy, &self.sz, &self.sx))
            .max(r(&self.sz, &self.sx, &self.sy))
    }

    /// Replaces the spin parity by another involution.
    pub fn with_parity(mut self, parity: OperatorMatrix) -> Result<Self> {
        if parity.dim() != self.dim() {
            return Err(CatError::DimensionMismatch {
                expected: self.dim(),
                found: parity.dim(),
            });
        }
        let r = (&(&parity * &parity) - &OperatorMatrix::identity(self.dim())).max_norm();
        if r > 1e-12 {
            return Err(CatError::NotInvolution(r));
        }
        self.parity_spin = parity.assert_hermitian()?;
        Ok(self)
    }

    /// `⟨χ|𝒫_s|χ⟩`.
    pub fn parity_expectation(&self, chi: &DVector<Complex64>) -> Result<f64> {
        self.check_len(chi)?;
        Ok(chi.dotc(&self.parity_spin.apply(chi)).re)
    }

    fn check_len(&self, chi: &DVector<Complex64>) -> Result<()> {
        if chi.len() != self.dim() {
            return Err(CatError::DimensionMismatch {
                expected: self.dim(),
                found: chi.len(),
            });
        }
        Ok(())
    }
}

/// Spin-`s` matrices with the default parity `(−1)^{s−m}`; `2s` must be a
/// non-negative integer.
pub fn make_spin_space(s: f64) -> Result<SpinSpace> {
    let two = 2.0 * s;
    if !(two >= 0.0 && two.fract() == 0.0 && two.is_finite()) {
        return Err(CatError::InvalidSpin(s));
    }
    let two_s = two as usize;
    let dim = two_s + 1;
    let m_of = |k: usize| s - k as f64;
    let mut plus = DMatrix::<Complex64>::zeros(dim, dim);
    for k in 1..dim {
        // S₊|s,m⟩ = √(s(s+1) − m(m+1)) |s,m+1⟩ with m = m_of(k), m+1 = m_of(k−1)
        let m = m_of(k);
        plus[(k - 1, k)] = Complex64::new((s * (s + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    let minus = plus.adjoint();
    let sx = OperatorMatrix::hermitian((&plus + &minus) * Complex64::new(0.5, 0.0)).expect("S_x is Hermitian");
    let sy = OperatorMatrix::hermitian((&plus - &minus) * Complex64::new(0.0, -0.5)).expect("S_y is Hermitian");
    let sz = OperatorMatrix::from_real_diagonal(&(0..dim).map(m_of).collect::<Vec<_>>());
    let parity_spin = OperatorMatrix::from_real_diagonal(
        &(0..dim).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect::<Vec<_>>(),
    );
    Ok(SpinSpace {
        two_s,
        sx,
        sy,
        sz,
        parity_spin,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinCatWitnessSpec {
    pub alpha: Complex64,
    pub gamma: f64,
    pub lambda: f64,
    pub parity_branch: Parity,
    pub s: f64,
}

impl SpinCatWitnessSpec {
    pub fn new(alpha: Complex64, gamma: f64, lambda: f64, parity_branch: Parity, s: f64) -> Result<Self> {
        if !(gamma > 0.0 && lambda > 0.0 && gamma.is_finite() && lambda.is_finite()) {
            return Err(CatError::invalid(format!(
                "gamma and lambda must be positive, got {gamma} and {lambda}"
            )));
        }
        make_spin_space(s)?;
        Ok(Self {
            alpha,
            gamma,
            lambda,
            parity_branch,
            s,
        })
    }
}

/// The three sectors `(𝒞(α) ⊗ I, I ∓ Π̂ ⊗ 𝒫_s, I ⊗ Ŝ²)` on the product space.
pub fn witness_sectors(
    space: &FockSpace,
    spin: &SpinSpace,
    spec: &SpinCatWitnessSpec,
) -> Result<[OperatorMatrix; 3]> {
    space.check_adequate(spec.alpha.norm(), "spin-cat witness")?;
    if (spin.s() - spec.s).abs() > 0.0 {
        return Err(CatError::invalid(format!("spin space has s = {}, spec has s = {}", spin.s(), spec.s)));
    }
    let id_f = OperatorMatrix::identity(space.dim());
    let id_s = OperatorMatrix::identity(spin.dim());
    let osc = quadratic_operator(space, spec.alpha, 0.0).kron(&id_s);
    let joint = fock::parity_operator(space).kron(&spin.parity_spin);
    let parity = &id_f.kron(&id_s) - &joint.scale_real(spec.parity_branch.sign());
    let casimir = id_f.kron(&spin.casimir());
    Ok([osc, parity, casimir])
}

pub fn spin_cat_witness(space: &FockSpace, spin: &SpinSpace, spec: &SpinCatWitnessSpec) -> Result<OperatorMatrix> {
    let [osc, parity, casimir] = witness_sectors(space, spin, spec)?;
    Ok(&(&osc + &parity.scale_real(spec.gamma)) + &casimir.scale_real(spec.lambda))
}

/// Max norms of `[𝒞, Ŝ²]`, `[𝒞, Π̂_s]`, `[Ŝ², Π̂_s]` on the guarded block.
pub fn sector_commutators(space: &FockSpace, spin: &SpinSpace, spec: &SpinCatWitnessSpec) -> Result<[f64; 3]> {
    let [osc, parity, casimir] = witness_sectors(space, spin, spec)?;
    let keep = space.guarded_dim() * spin.dim();
    Ok([
        osc.commutator(&casimir).block_max_norm(keep),
        osc.commutator(&parity).block_max_norm(keep),
        casimir.commutator(&parity).block_max_norm(keep),
    ])
}

/// `|β² − α²|² + γ(1 ∓ e^{−2|β|²}Π_spin) + λs(s+1)` for `|β⟩ ⊗ χ` with
/// `Π_spin = ⟨χ|𝒫_s|χ⟩`.
pub fn spin_cat_expectation_closed_form(beta: Complex64, pi_spin: f64, spec: &SpinCatWitnessSpec) -> Result<f64> {
    if !(pi_spin.abs() <= 1.0) {
        return Err(CatError::invalid(format!("spin parity must lie in [-1, 1], got {pi_spin}")));
    }
    let osc = (beta * beta - spec.alpha * spec.alpha).norm_sqr();
    let parity = 1.0 - spec.parity_branch.sign() * (-2.0 * beta.norm_sqr()).exp() * pi_spin;
    Ok(osc + spec.gamma * parity + spec.lambda * spec.s * (spec.s + 1.0))
}

/// Matrix expectation on the product state `|β⟩ ⊗ χ`.
pub fn spin_cat_expectation_numeric(
    space: &FockSpace,
    spin: &SpinSpace,
    spec: &SpinCatWitnessSpec,
    beta: Complex64,
    chi: &DVector<Complex64>,
) -> Result<f64> {
    spin.check_len(chi)?;
    let coh = coherent_state(space, beta)?;
    let psi = coh.as_vector().expect("coherent states are vectors").kronecker(chi);
    let state = QuantumState::from_vector(psi)?;
    spin_cat_expectation_state(space, spin, spec, &state)
}

/// Matrix expectation on an arbitrary (possibly entangled) product-space state.
pub fn spin_cat_expectation_state(
    space: &FockSpace,
    spin: &SpinSpace,
    spec: &SpinCatWitnessSpec,
    state: &QuantumState,
) -> Result<f64> {
    expectation_real(state, &spin_cat_witness(space, spin, spec)?)
}

/// `‖[𝒞(α), K₊]‖_max` on the guarded subspace. Nonzero for `α ≠ 0`: the
/// oscillator sector is not invariant under the pair generators.
pub fn dynamical_symmetry_commutator_norm(space: &FockSpace, alpha: Complex64) -> f64 {
    let c = quadratic_operator(space, alpha, 0.0);
    let gen = make_su11(space);
    c.commutator(&gen.k_plus).block_max_norm(space.guarded_dim() - 2)
}

/// `‖R(χ)𝒞(α)R†(χ) − 𝒞(αe^{iχ})‖_max` on the guarded subspace.
pub fn orbit_covariance_residual(space: &FockSpace, alpha: Complex64, chi: f64) -> f64 {
    let rot = fock::phase_rotation(space, chi);
    let moved = quadratic_operator(space, alpha, 0.0).conjugate_by(&rot);
    let target = quadratic_operator(space, alpha * Complex64::from_polar(1.0, chi), 0.0);
    (&moved - &target).block_max_norm(space.guarded_dim())
}
