//! Truncated Fock-space linear algebra.
//!
//! The basis is `|0⟩ … |n_cut − 1⟩`. Truncation necessarily breaks canonical
//! identities such as `[a, a†] = 1` at the top of the ladder, so algebraic
//! checks are made on the *guarded subspace*: the leading
//! `n_cut − guard_band` levels.

mod operator;
mod state;

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use operator::{matrix_exponential, OperatorMatrix, HERMITIAN_TOL};
pub use state::{expectation, expectation_real, QuantumState, STATE_TOL};

use crate::error::{CatError, Result};

pub const DEFAULT_GUARD_BAND: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FockSpace {
    n_cut: usize,
    guard_band: usize,
}

impl FockSpace {
    pub fn new(n_cut: usize, guard_band: usize) -> Result<Self> {
        if n_cut < 4 {
            return Err(CatError::invalid(format!("n_cut must be >= 4, got {n_cut}")));
        }
        if 2 * guard_band >= n_cut {
            return Err(CatError::invalid(format!(
                "guard_band {guard_band} must be < n_cut/2 ({n_cut}/2)"
            )));
        }
        Ok(Self { n_cut, guard_band })
    }

    /// Space with [`DEFAULT_GUARD_BAND`], shrinking the guard for tiny cutoffs.
    pub fn with_default_guard(n_cut: usize) -> Result<Self> {
        let guard = DEFAULT_GUARD_BAND.min(n_cut.saturating_sub(1) / 2);
        Self::new(n_cut, guard)
    }

    pub fn n_cut(&self) -> usize {
        self.n_cut
    }

    pub fn dim(&self) -> usize {
        self.n_cut
    }

    pub fn guard_band(&self) -> usize {
        self.guard_band
    }

    /// Number of levels on which algebraic identities are asserted.
    pub fn guarded_dim(&self) -> usize {
        self.n_cut - self.guard_band
    }

    /// Fails unless a coherent amplitude of modulus `amplitude` fits.
    pub fn check_adequate(&self, amplitude: f64, what: &str) -> Result<()> {
        let required = required_cutoff(amplitude);
        if self.n_cut < required {
            return Err(CatError::Truncation {
                what: what.to_string(),
                required,
                available: self.n_cut,
            });
        }
        Ok(())
    }
}

/// Smallest cutoff accepted for a coherent amplitude `|α|`:
/// `⌈|α|² + 8|α| + 20⌉`. The Poisson tail beyond it is below 1e-12.
pub fn required_cutoff(amplitude: f64) -> usize {
    let a = amplitude.abs();
    (a * a + 8.0 * a + 20.0).ceil() as usize
}

/// Photon-number parity branch of a cat state or witness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

impl std::str::FromStr for Parity {
    type Err = CatError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "even" | "plus" => Ok(Parity::Even),
            "-" | "odd" | "minus" => Ok(Parity::Odd),
            other => Err(CatError::invalid(format!("unknown parity branch '{other}'"))),
        }
    }
}

/// `|αe^{iθ}⟩ ± |−αe^{iθ}⟩`, normalized.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatSpec {
    pub alpha: Complex64,
    pub parity: Parity,
    pub theta: f64,
}

impl CatSpec {
    pub fn new(alpha: Complex64, parity: Parity, theta: f64) -> Self {
        Self {
            alpha,
            parity,
            theta,
        }
    }

    pub fn even(alpha: f64) -> Self {
        Self::new(Complex64::new(alpha, 0.0), Parity::Even, 0.0)
    }

    pub fn odd(alpha: f64) -> Self {
        Self::new(Complex64::new(alpha, 0.0), Parity::Odd, 0.0)
    }

    /// Displacement of the `+` component, `αe^{iθ}`.
    pub fn displacement(&self) -> Complex64 {
        self.alpha * Complex64::from_polar(1.0, self.theta)
    }
}

/// Squared norm `2(1 ± e^{−2|α|²})` of the unnormalized superposition.
pub fn cat_norm_squared(alpha: Complex64, parity: Parity) -> f64 {
    2.0 * (1.0 + parity.sign() * (-2.0 * alpha.norm_sqr()).exp())
}

/// Truncated `a`, `a†` and `n̂ = a†a`.
pub fn make_ladder(space: &FockSpace) -> (OperatorMatrix, OperatorMatrix, OperatorMatrix) {
    let n = space.dim();
    let mut a = nalgebra::DMatrix::<Complex64>::zeros(n, n);
    for k in 1..n {
        a[(k - 1, k)] = Complex64::new((k as f64).sqrt(), 0.0);
    }
    let a = OperatorMatrix::new(a);
    let a_dag = a.adjoint();
    let number = OperatorMatrix::from_real_diagonal(&(0..n).map(|k| k as f64).collect::<Vec<_>>());
    (a, a_dag, number)
}

pub fn annihilation(space: &FockSpace) -> OperatorMatrix {
    make_ladder(space).0
}

pub fn number_operator(space: &FockSpace) -> OperatorMatrix {
    make_ladder(space).2
}

/// `Π̂ = (−1)^n̂`.
pub fn parity_operator(space: &FockSpace) -> OperatorMatrix {
    let diag: Vec<f64> = (0..space.dim()).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect();
    OperatorMatrix::from_real_diagonal(&diag)
}

/// `R̂(φ) = e^{iφn̂}`.
pub fn phase_rotation(space: &FockSpace, phi: f64) -> OperatorMatrix {
    let diag: Vec<Complex64> = (0..space.dim())
        .map(|k| Complex64::from_polar(1.0, phi * k as f64))
        .collect();
    OperatorMatrix::from_diagonal(&diag)
}

/// Wigner function at the phase-space origin, `(2/π)Tr(ρΠ̂)`.
pub fn wigner_origin(state: &QuantumState) -> f64 {
    let parity: f64 = state
        .populations()
        .iter()
        .enumerate()
        .map(|(k, p)| if k % 2 == 0 { *p } else { -*p })
        .sum();
    2.0 / PI * parity
}

/// Unnormalized Fock amplitudes `βⁿ/√n!` up to `len`, computed by recurrence.
pub(crate) fn coherent_amplitudes(beta: Complex64, len: usize) -> DVector<Complex64> {
    let mut v = DVector::<Complex64>::zeros(len);
    let mut c = Complex64::new((-0.5 * beta.norm_sqr()).exp(), 0.0);
    for k in 0..len {
        v[k] = c;
        c *= beta / ((k + 1) as f64).sqrt();
    }
    v
}

/// `|β⟩` truncated to the space and renormalized.
pub fn coherent_state(space: &FockSpace, beta: Complex64) -> Result<QuantumState> {
    space.check_adequate(beta.norm(), "coherent state")?;
    QuantumState::normalized(coherent_amplitudes(beta, space.dim()))
}

/// Normalized `|αe^{iθ}⟩ ± |−αe^{iθ}⟩`.
pub fn cat_state(space: &FockSpace, spec: &CatSpec) -> Result<QuantumState> {
    let amp = spec.alpha.norm();
    space.check_adequate(amp, "cat state")?;
    if spec.parity == Parity::Odd && amp < 1e-8 {
        return Err(CatError::DegenerateCat(amp));
    }
    let d = spec.displacement();
    // Components of |d⟩ ± |−d⟩ differ only by (−1)ⁿ, so the sum keeps the
    // matching parity levels and doubles them.
    let plus = coherent_amplitudes(d, space.dim());
    let keep = match spec.parity {
        Parity::Even => 0,
        Parity::Odd => 1,
    };
    let v = DVector::from_iterator(
        space.dim(),
        plus.iter()
            .enumerate()
            .map(|(k, &c)| if k % 2 == keep { c * 2.0 } else { Complex64::new(0.0, 0.0) }),
    );
    QuantumState::normalized(v)
}
