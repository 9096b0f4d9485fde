use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::operator::OperatorMatrix;
use crate::error::{CatError, Result};

/// Tolerance for norm, trace and positivity checks on states.
pub const STATE_TOL: f64 = 1e-10;

/// A pure state vector or a density matrix on a truncated space.
#[derive(Clone, Debug, PartialEq)]
pub enum QuantumState {
    Vector(DVector<Complex64>),
    Density(DMatrix<Complex64>),
}

impl QuantumState {
    /// Wraps a vector, failing if it is not unit-norm within [`STATE_TOL`].
    pub fn from_vector(v: DVector<Complex64>) -> Result<Self> {
        let norm = v.norm();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(CatError::InvalidState(format!("vector norm {norm}")));
        }
        Ok(QuantumState::Vector(v))
    }

    /// Normalizes and wraps a nonzero vector.
    pub fn normalized(mut v: DVector<Complex64>) -> Result<Self> {
        let norm = v.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(CatError::InvalidState(format!("cannot normalize vector of norm {norm}")));
        }
        v.unscale_mut(norm);
        Ok(QuantumState::Vector(v))
    }

    pub fn from_density(rho: DMatrix<Complex64>) -> Result<Self> {
        let op = OperatorMatrix::new(rho);
        let herm = op.hermiticity_residual();
        if herm > STATE_TOL {
            return Err(CatError::InvalidState(format!("density not Hermitian ({herm:e})")));
        }
        let tr = op.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(CatError::InvalidState(format!("density trace {tr}")));
        }
        let min = op.min_eigenvalue()?;
        if min < -STATE_TOL {
            return Err(CatError::InvalidState(format!("density eigenvalue {min:e}")));
        }
        Ok(QuantumState::Density(op.into_entries()))
    }

    /// Builds a density matrix without the positivity check; the caller
    /// guarantees the invariants (e.g. output of a CPTP map).
    pub(crate) fn density_unchecked(rho: DMatrix<Complex64>) -> Self {
        QuantumState::Density(rho)
    }

    pub fn dim(&self) -> usize {
        match self {
            QuantumState::Vector(v) => v.len(),
            QuantumState::Density(m) => m.nrows(),
        }
    }

    pub fn is_pure_vector(&self) -> bool {
        matches!(self, QuantumState::Vector(_))
    }

    pub fn as_vector(&self) -> Option<&DVector<Complex64>> {
        match self {
            QuantumState::Vector(v) => Some(v),
            QuantumState::Density(_) => None,
        }
    }

    pub fn density_matrix(&self) -> DMatrix<Complex64> {
        match self {
            QuantumState::Vector(v) => v * v.adjoint(),
            QuantumState::Density(m) => m.clone(),
        }
    }

    pub fn to_density(&self) -> QuantumState {
        QuantumState::Density(self.density_matrix())
    }

    pub fn trace(&self) -> f64 {
        match self {
            QuantumState::Vector(v) => v.norm_squared(),
            QuantumState::Density(m) => m.trace().re,
        }
    }

    /// Population `ρ_nn` of each basis level.
    pub fn populations(&self) -> Vec<f64> {
        match self {
            QuantumState::Vector(v) => v.iter().map(|z| z.norm_sqr()).collect(),
            QuantumState::Density(m) => (0..m.nrows()).map(|k| m[(k, k)].re).collect(),
        }
    }

    /// `⟨ψ|ρ|ψ⟩` against a pure reference vector.
    pub fn fidelity_with_pure(&self, psi: &DVector<Complex64>) -> Result<f64> {
        if psi.len() != self.dim() {
            return Err(CatError::DimensionMismatch {
                expected: self.dim(),
                found: psi.len(),
            });
        }
        Ok(match self {
            QuantumState::Vector(v) => psi.dotc(v).norm_sqr(),
            QuantumState::Density(m) => psi.dotc(&(m * psi)).re,
        })
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        match self {
            QuantumState::Vector(_) => Ok(0.0),
            QuantumState::Density(m) => OperatorMatrix::new(m.clone()).min_eigenvalue(),
        }
    }
}

/// `⟨ψ|Ô|ψ⟩` or `Tr(ρÔ)`.
pub fn expectation(state: &QuantumState, op: &OperatorMatrix) -> Result<Complex64> {
    if state.dim() != op.dim() {
        return Err(CatError::DimensionMismatch {
            expected: op.dim(),
            found: state.dim(),
        });
    }
    let value = match state {
        QuantumState::Vector(v) => v.dotc(&op.apply(v)),
        QuantumState::Density(rho) => {
            // Tr(ρO) = Σ_ij ρ_ij O_ji without forming the product.
            let o = op.entries();
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..rho.ncols() {
                for i in 0..rho.nrows() {
                    acc += rho[(i, j)] * o[(j, i)];
                }
            }
            acc
        }
    };
    Ok(value)
}

/// Real part of the expectation of a Hermitian operator.
pub fn expectation_real(state: &QuantumState, op: &OperatorMatrix) -> Result<f64> {
    let value = expectation(state, op)?;
    if op.hermitian_hint() && value.im.abs() > 1e-8 * value.norm().max(1.0) {
        return Err(CatError::NotHermitian(value.im.abs()));
    }
    Ok(value.re)
}
