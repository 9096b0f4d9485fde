//! Single-mode realization of su(1,1): `K₊ = a†²/2`, `K₋ = a²/2`,
//! `K₀ = (n̂ + ½)/2`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{CatError, Result};
use crate::fock::{self, expectation_real, matrix_exponential, FockSpace, OperatorMatrix, QuantumState};

/// Quadratic Casimir of the single-mode realization.
pub const CASIMIR: f64 = -3.0 / 16.0;

/// Largest squeezing magnitude accepted by [`squeeze_operator`].
pub const MAX_SQUEEZE: f64 = 2.0;

#[derive(Clone, Debug)]
pub struct Su11Generators {
    pub k_plus: OperatorMatrix,
    pub k_minus: OperatorMatrix,
    pub k_zero: OperatorMatrix,
    space: FockSpace,
}

impl Su11Generators {
    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    /// All three generators conjugated by `unitary`.
    pub fn conjugated(&self, unitary: &OperatorMatrix) -> Self {
        Self {
            k_plus: self.k_plus.conjugate_by(unitary),
            k_minus: self.k_minus.conjugate_by(unitary),
            k_zero: self.k_zero.conjugate_by(unitary),
            space: self.space,
        }
    }

    /// Max residuals of `[K₀,K₊] − K₊`, `[K₀,K₋] + K₋`, `[K₊,K₋] + 2K₀`
    /// on the guarded subspace.
    pub fn commutator_residuals(&self) -> [f64; 3] {
        let g = self.space.guarded_dim();
        let r1 = &self.k_zero.commutator(&self.k_plus) - &self.k_plus;
        let r2 = &self.k_zero.commutator(&self.k_minus) + &self.k_minus;
        let r3 = &self.k_plus.commutator(&self.k_minus) + &self.k_zero.scale_real(2.0);
        [r1.block_max_norm(g), r2.block_max_norm(g), r3.block_max_norm(g)]
    }
}

pub fn make_su11(space: &FockSpace) -> Su11Generators {
    let (a, a_dag, n) = fock::make_ladder(space);
    let k_plus = (&a_dag * &a_dag).scale_real(0.5);
    let k_minus = (&a * &a).scale_real(0.5);
    let k_zero = (&n + &OperatorMatrix::identity(space.dim()).scale_real(0.5)).scale_real(0.5);
    Su11Generators {
        k_plus,
        k_minus,
        k_zero,
        space: *space,
    }
}

/// `Ĉ = K₀² − ½(K₊K₋ + K₋K₊)`.
pub fn casimir_quadratic(gen: &Su11Generators) -> OperatorMatrix {
    let k0sq = &gen.k_zero * &gen.k_zero;
    let sym = (&gen.k_plus * &gen.k_minus) + (&gen.k_minus * &gen.k_plus);
    OperatorMatrix::hermitian((&k0sq - &sym.scale_real(0.5)).into_entries())
        .expect("casimir of Hermitian pair is Hermitian")
}

/// Roots of `k(k − 1) = casimir`, smaller first.
pub fn bargmann_indices(casimir: f64) -> (f64, f64) {
    let disc = (0.25 + casimir).sqrt();
    (0.5 - disc, 0.5 + disc)
}

/// Max-norm of `K₊K₋ − K₀(K₀ − 1) + 𝒞` on the guarded subspace.
pub fn casimir_reduction_residual(gen: &Su11Generators) -> f64 {
    let dim = gen.space.dim();
    let id = OperatorMatrix::identity(dim);
    let lhs = &gen.k_plus * &gen.k_minus;
    let rhs = &gen.k_zero * &(&gen.k_zero - &id);
    (&(&lhs - &rhs) + &id.scale_real(CASIMIR)).block_max_norm(gen.space.guarded_dim())
}

/// `Ŝ(ζ) = exp(ζK₊ − ζ*K₋)`.
///
/// Rejects `|ζ| > 2` and squeezings whose vacuum photon distribution
/// (mean plus eight standard deviations) does not fit the guarded subspace.
pub fn squeeze_operator(gen: &Su11Generators, zeta: Complex64) -> Result<OperatorMatrix> {
    let r = zeta.norm();
    if r > MAX_SQUEEZE {
        return Err(CatError::invalid(format!("|zeta| = {r} exceeds {MAX_SQUEEZE}")));
    }
    let mean = r.sinh().powi(2);
    let std = std::f64::consts::SQRT_2 * r.sinh() * r.cosh();
    let needed = (mean + 8.0 * std).ceil() as usize + 1;
    if needed > gen.space.guarded_dim() {
        return Err(CatError::Truncation {
            what: format!("squeeze |zeta| = {r}"),
            required: needed + gen.space.guard_band(),
            available: gen.space.n_cut(),
        });
    }
    // ζK₊ − ζ*K₋ is anti-Hermitian; exponentiate i·H with H = −i(ζK₊ − ζ*K₋).
    let anti = &gen.k_plus.scale(zeta) - &gen.k_minus.scale(zeta.conj());
    let herm = anti.scale(Complex64::new(0.0, -1.0)).assert_hermitian()?;
    matrix_exponential(&herm, Complex64::new(0.0, 1.0))
}

/// Rotated quadratures `X̂_φ = (ae^{−iφ} + a†e^{iφ})/√2`, `P̂_φ = (ae^{−iφ} − a†e^{iφ})/(i√2)`.
pub fn quadrature(space: &FockSpace, phi: f64) -> (OperatorMatrix, OperatorMatrix) {
    let (a, a_dag, _) = fock::make_ladder(space);
    let down = a.scale(Complex64::from_polar(1.0, -phi));
    let up = a_dag.scale(Complex64::from_polar(1.0, phi));
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let x = (&down + &up).scale_real(s);
    let p = (&down - &up).scale(Complex64::new(0.0, -s));
    (
        x.assert_hermitian().expect("X is Hermitian"),
        p.assert_hermitian().expect("P is Hermitian"),
    )
}

pub fn variance(state: &QuantumState, op: &OperatorMatrix) -> Result<f64> {
    let mean = expectation_real(state, op)?;
    let sq = expectation_real(state, &(op * op).assert_hermitian()?)?;
    Ok(sq - mean * mean)
}

/// How far `Ŝ(ζ) K_i Ŝ†(ζ)` leaves `span{K₊, K₋, K₀}` after least-squares
/// projection onto that span, measured on the leading `keep` levels.
///
/// Squeezing stretches level `n` to occupations of order `n·e^{2|ζ|}`, so
/// `keep` must leave that much headroom below the cutoff; it is clamped to
/// the guarded subspace.
pub fn squeeze_closure_residual(gen: &Su11Generators, zeta: Complex64, keep: usize) -> Result<f64> {
    let s = squeeze_operator(gen, zeta)?;
    let g = keep.min(gen.space.guarded_dim());
    let block = |op: &OperatorMatrix| -> DVector<Complex64> {
        let m = op.entries().view((0, 0), (g, g)).clone_owned();
        DVector::from_column_slice(m.as_slice())
    };
    let basis = [block(&gen.k_plus), block(&gen.k_minus), block(&gen.k_zero)];
    let design = DMatrix::from_columns(&basis);
    let gram = design.adjoint() * &design;
    let chol = gram
        .cholesky()
        .ok_or_else(|| CatError::invalid("degenerate generator basis"))?;
    let mut worst: f64 = 0.0;
    for k in [&gen.k_plus, &gen.k_minus, &gen.k_zero] {
        let target = block(&k.conjugate_by(&s));
        let coeffs = chol.solve(&(design.adjoint() * &target));
        let resid = target - &design * coeffs;
        worst = worst.max(resid.iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    Ok(worst)
}
