use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{CatError, Result};

/// Tolerance under which an operator is treated as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Dense complex square matrix acting on a truncated Hilbert space.
///
/// `hermitian_hint` is carried through arithmetic where it is preserved
/// (sums, real scalings) and dropped otherwise. Constructors that set it
/// check the residual `‖M − M†‖_max` against [`HERMITIAN_TOL`].
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    entries: DMatrix<Complex64>,
    hermitian_hint: bool,
}

impl OperatorMatrix {
    pub fn new(entries: DMatrix<Complex64>) -> Self {
        assert!(entries.is_square(), "operator matrix must be square");
        Self {
            entries,
            hermitian_hint: false,
        }
    }

    pub fn hermitian(entries: DMatrix<Complex64>) -> Result<Self> {
        let op = Self::new(entries);
        let residual = op.hermiticity_residual();
        if residual > HERMITIAN_TOL {
            return Err(CatError::NotHermitian(residual));
        }
        Ok(Self {
            hermitian_hint: true,
            ..op
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: DMatrix::identity(dim, dim),
            hermitian_hint: true,
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            entries: DMatrix::zeros(dim, dim),
            hermitian_hint: true,
        }
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let hermitian_hint = diag.iter().all(|z| z.im == 0.0);
        Self {
            entries: DMatrix::from_diagonal(&DVector::from_column_slice(diag)),
            hermitian_hint,
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let diag: Vec<Complex64> = diag.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_diagonal(&diag)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<Complex64> {
        self.entries
    }

    pub fn hermitian_hint(&self) -> bool {
        self.hermitian_hint
    }

    /// Marks the operator Hermitian after verifying the residual.
    pub fn assert_hermitian(self) -> Result<Self> {
        Self::hermitian(self.entries)
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self {
            entries: self.entries.adjoint(),
            hermitian_hint: self.hermitian_hint,
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            entries: &self.entries * factor,
            hermitian_hint: self.hermitian_hint && factor.im == 0.0,
        }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    pub fn commutator(&self, other: &Self) -> Self {
        Self::new(&self.entries * &other.entries - &other.entries * &self.entries)
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        Self::new(&self.entries * &other.entries + &other.entries * &self.entries)
    }

    /// `self ⊗ other`, with `self` as the slow (outer) index.
    pub fn kron(&self, other: &Self) -> Self {
        Self {
            entries: self.entries.kronecker(&other.entries),
            hermitian_hint: self.hermitian_hint && other.hermitian_hint,
        }
    }

    /// `U X U†`.
    pub fn conjugate_by(&self, unitary: &Self) -> Self {
        Self::new(&unitary.entries * &self.entries * unitary.entries.adjoint())
    }

    pub fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        &self.entries * v
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    pub fn max_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max-norm restricted to the leading `keep × keep` block.
    pub fn block_max_norm(&self, keep: usize) -> f64 {
        let keep = keep.min(self.dim());
        self.entries
            .view((0, 0), (keep, keep))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn hermiticity_residual(&self) -> f64 {
        (&self.entries - self.entries.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn unitarity_residual(&self) -> f64 {
        let dim = self.dim();
        (self.entries.adjoint() * &self.entries - DMatrix::<Complex64>::identity(dim, dim))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|j| (0..n).all(|i| i == j || self.entries[(i, j)] == Complex64::new(0.0, 0.0)))
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Eigenvalues (ascending) and eigenvectors of a Hermitian operator.
    pub fn hermitian_eigen(&self) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
        let residual = self.hermiticity_residual();
        let scale = self.max_norm().max(1.0);
        if residual > HERMITIAN_TOL * scale {
            return Err(CatError::NotHermitian(residual));
        }
        if !self.is_finite() {
            return Err(CatError::NonFinite);
        }
        // Symmetrize so rounding noise in the input cannot leak into the solver.
        let sym = (&self.entries + self.entries.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = sym.symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = DMatrix::from_fn(self.dim(), self.dim(), |i, j| eig.eigenvectors[(i, order[j])]);
        Ok((values, vectors))
    }

    pub fn eigenvalues_hermitian(&self) -> Result<Vec<f64>> {
        Ok(self.hermitian_eigen()?.0)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues_hermitian()?[0])
    }
}

/// `exp(scale · op)`.
///
/// Diagonal inputs are exponentiated entrywise, Hermitian inputs through their
/// eigendecomposition (so `scale = i·t` yields an exactly unitary result), and
/// everything else by scaling and squaring.
pub fn matrix_exponential(op: &OperatorMatrix, scale: Complex64) -> Result<OperatorMatrix> {
    if !op.is_finite() || !scale.re.is_finite() || !scale.im.is_finite() {
        return Err(CatError::NonFinite);
    }
    let dim = op.dim();
    if op.is_diagonal() {
        let diag: Vec<Complex64> = (0..dim).map(|k| (op.get(k, k) * scale).exp()).collect();
        return Ok(OperatorMatrix::from_diagonal(&diag));
    }
    if op.hermiticity_residual() <= HERMITIAN_TOL * op.max_norm().max(1.0) {
        let (values, vectors) = op.hermitian_eigen()?;
        let phases = DVector::from_iterator(dim, values.iter().map(|&l| (scale * l).exp()));
        let mut scaled = vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= phases[j];
        }
        let result = scaled * vectors.adjoint();
        let out = OperatorMatrix::new(result);
        return if scale.im == 0.0 {
            out.assert_hermitian()
        } else {
            Ok(out)
        };
    }
    let result = (op.entries() * scale).exp();
    let out = OperatorMatrix::new(result);
    if !out.is_finite() {
        return Err(CatError::NonFinite);
    }
    Ok(out)
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix {
            entries: &self.entries + &rhs.entries,
            hermitian_hint: self.hermitian_hint && rhs.hermitian_hint,
        }
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix {
            entries: &self.entries - &rhs.entries,
            hermitian_hint: self.hermitian_hint && rhs.hermitian_hint,
        }
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix::new(&self.entries * &rhs.entries)
    }
}

impl Neg for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn neg(self) -> OperatorMatrix {
        self.scale_real(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr for OperatorMatrix {
            type Output = OperatorMatrix;
            fn $method(self, rhs: Self) -> OperatorMatrix {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
