//! Truncated Fock-space linear algebra for the cavity mode.
//!
//! The mode is truncated to `d` levels `|0⟩ … |d−1⟩`. Ladder operators are
//! the truncated matrices themselves, so `a†|d−1⟩ = 0` and
//! `aa† = diag(1, …, d−1, 0)`; code that needs `aa†` must form the product
//! instead of assuming `aa† = a†a + 1`.

use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cnorm, max_abs, re, CMatrix, Real};

/// Number of Fock levels kept in the truncated mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dimension(usize);

impl Dimension {
    pub fn new(d: usize) -> Result<Self> {
        if d < 1 {
            return Err(Error::InvalidDimension(d));
        }
        Ok(Self(d))
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0
    }

    /// Dimension of the matrix space, `d²`.
    #[inline]
    pub fn squared(self) -> usize {
        self.0 * self.0
    }
}

impl std::fmt::Display for Dimension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// Truncated annihilation operator: `a|n⟩ = √n |n−1⟩`.
pub fn annihilation<T: Real>(d: Dimension) -> CMatrix<T> {
    let d = d.get();
    CMatrix::from_fn(d, d, |i, j| {
        if j == i + 1 {
            re(T::lit(j as f64).sqrt())
        } else {
            Complex::default()
        }
    })
}

/// Truncated creation operator, the conjugate transpose of [`annihilation`].
pub fn creation<T: Real>(d: Dimension) -> CMatrix<T> {
    annihilation::<T>(d).adjoint()
}

/// Number operator `a†a = diag(0, 1, …, d−1)`.
pub fn number<T: Real>(d: Dimension) -> CMatrix<T> {
    let d = d.get();
    CMatrix::from_fn(d, d, |i, j| if i == j { re(T::lit(i as f64)) } else { Complex::default() })
}

/// Cavity-mode density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldDensityMatrix<T: Real> {
    dim: Dimension,
    entries: CMatrix<T>,
}

impl<T: Real> FieldDensityMatrix<T> {
    /// Validates `entries` against the density-matrix invariants.
    pub fn new(entries: CMatrix<T>) -> Result<Self> {
        let d = square_dim(&entries)?;
        let asym = hermitian_defect(&entries);
        if asym > T::tol(1e-12) {
            return Err(Error::NonHermitian(asym.as_f64()));
        }
        let tr = entries.trace();
        if cnorm(tr - re(T::one())) > T::tol(1e-12) {
            return Err(Error::InvalidDensity(format!("trace {}", tr.re)));
        }
        let eig = hermitian_eigensystem(&entries)?;
        let min = eig.values[0];
        if min < -T::tol(1e-10) {
            return Err(Error::InvalidDensity(format!("eigenvalue {min}")));
        }
        Ok(Self { dim: d, entries })
    }

    /// Wraps a matrix the caller has already brought into density form.
    pub(crate) fn from_trusted(entries: CMatrix<T>) -> Self {
        let dim = Dimension(entries.nrows());
        Self { dim, entries }
    }

    #[inline]
    pub fn dim(&self) -> Dimension {
        self.dim
    }

    #[inline]
    pub fn matrix(&self) -> &CMatrix<T> {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.entries
    }
}

/// Fock state `|n⟩⟨n|`.
pub fn fock_state<T: Real>(d: Dimension, n: usize) -> Result<FieldDensityMatrix<T>> {
    if n >= d.get() {
        return Err(Error::IndexOutOfRange { index: n, dim: d.get() });
    }
    let mut m = CMatrix::zeros(d.get(), d.get());
    m[(n, n)] = re(T::one());
    Ok(FieldDensityMatrix::from_trusted(m))
}

/// Completely mixed state `1/d`.
pub fn mixed_state<T: Real>(d: Dimension) -> FieldDensityMatrix<T> {
    let w = re(T::one() / T::lit(d.get() as f64));
    FieldDensityMatrix::from_trusted(CMatrix::from_diagonal_element(d.get(), d.get(), w))
}

/// Spectral decomposition `M = V Λ V†` of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct Eigensystem<T: Real> {
    /// Eigenvalues in ascending order.
    pub values: DVector<T>,
    /// Unitary matrix whose columns are the matching eigenvectors.
    pub vectors: CMatrix<T>,
}

impl<T: Real> Eigensystem<T> {
    /// Rebuilds `V f(Λ) V†`.
    pub fn map(&self, f: impl Fn(T) -> T) -> CMatrix<T> {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let w = re(f(self.values[j]));
            scaled.column_mut(j).iter_mut().for_each(|z| *z *= w);
        }
        scaled * self.vectors.adjoint()
    }
}

/// Eigen-decomposition of a Hermitian matrix, symmetrized first.
pub fn hermitian_eigensystem<T: Real>(m: &CMatrix<T>) -> Result<Eigensystem<T>> {
    square_dim(m)?;
    let scale = T::one().max(max_abs(m));
    let asym = hermitian_defect(m);
    if asym > T::tol(1e-10) * scale {
        return Err(Error::NonHermitian(asym.as_f64()));
    }
    let sym = (m + m.adjoint()) * re(T::lit(0.5));
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = DVector::from_iterator(order.len(), order.iter().map(|&i| eig.eigenvalues[i]));
    let vectors = CMatrix::from_fn(m.nrows(), m.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(Eigensystem { values, vectors })
}

/// Largest entry of `|M − M†|`.
pub fn hermitian_defect<T: Real>(m: &CMatrix<T>) -> T {
    let n = m.nrows();
    let mut worst = T::zero();
    for i in 0..n {
        for j in i..n {
            worst = worst.max(cnorm(m[(i, j)] - m[(j, i)].conj()));
        }
    }
    worst
}

fn square_dim<T: Real>(m: &CMatrix<T>) -> Result<Dimension> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
    }
    Dimension::new(m.nrows())
}
