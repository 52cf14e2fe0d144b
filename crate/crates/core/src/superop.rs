//! Superoperators on the `d×d` matrix space of the cavity mode.
//!
//! A superoperator is stored as a dense `d²×d²` matrix. Matrix units
//! `E_{m,n} = |m⟩⟨n|` are flattened row-major, `p = m·d + n`, and column `p`
//! of the dense matrix holds the image of `E_{m,n}` flattened the same way.
//!
//! The elementary generators `K0`, `K±`, `N` conserve the offset `m − n`, so
//! every superoperator built from them is block diagonal over offsets; see
//! [`offset_blocks`].

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{annihilation, number, Dimension};
use crate::scalar::{cnorm, max_abs, re, CMatrix, Real};

/// Flat index of `E_{m,n}` in a dimension-`d` matrix space.
#[inline]
pub fn unit_index(d: usize, m: usize, n: usize) -> usize {
    m * d + n
}

/// Matrix unit `E_{m,n}`.
pub fn matrix_unit<T: Real>(d: Dimension, m: usize, n: usize) -> CMatrix<T> {
    let mut e = CMatrix::zeros(d.get(), d.get());
    e[(m, n)] = re(T::one());
    e
}

/// The four generators acting on the cavity density matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Elementary {
    /// `K0 X = ½(a†a X + X a†a) + ½X`
    K0,
    /// `K+ X = a† X a`
    KPlus,
    /// `K− X = a X a†`
    KMinus,
    /// `N X = [a†a, X]`
    N,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator<T: Real> {
    dim: Dimension,
    dense: CMatrix<T>,
}

impl<T: Real> Superoperator<T> {
    pub fn zeros(dim: Dimension) -> Self {
        let n = dim.squared();
        Self { dim, dense: CMatrix::zeros(n, n) }
    }

    pub fn identity(dim: Dimension) -> Self {
        Self::scalar(dim, re(T::one()))
    }

    /// `c · 𝕀`.
    pub fn scalar(dim: Dimension, c: Complex<T>) -> Self {
        let n = dim.squared();
        Self { dim, dense: CMatrix::from_diagonal_element(n, n, c) }
    }

    pub fn from_dense(dim: Dimension, dense: CMatrix<T>) -> Result<Self> {
        let n = dim.squared();
        if dense.nrows() != n || dense.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: dense.nrows() });
        }
        Ok(Self { dim, dense })
    }

    /// The map `X ↦ L X R`.
    pub fn sandwich(left: &CMatrix<T>, right: &CMatrix<T>) -> Self {
        let d = left.nrows();
        let dense = left.kronecker(&right.transpose());
        Self { dim: Dimension::new(d).expect("non-empty operator"), dense }
    }

    /// Tabulates a linear map by its action on matrix units.
    pub fn from_map(dim: Dimension, f: impl Fn(&CMatrix<T>) -> CMatrix<T>) -> Self {
        let d = dim.get();
        let mut dense = CMatrix::zeros(d * d, d * d);
        for m in 0..d {
            for n in 0..d {
                let img = f(&matrix_unit(dim, m, n));
                let col = unit_index(d, m, n);
                for i in 0..d {
                    for j in 0..d {
                        dense[(unit_index(d, i, j), col)] = img[(i, j)];
                    }
                }
            }
        }
        Self { dim, dense }
    }

    #[inline]
    pub fn dim(&self) -> Dimension {
        self.dim
    }

    #[inline]
    pub fn dense(&self) -> &CMatrix<T> {
        &self.dense
    }

    pub fn into_dense(self) -> CMatrix<T> {
        self.dense
    }

    pub fn apply(&self, x: &CMatrix<T>) -> Result<CMatrix<T>> {
        let d = self.dim.get();
        if x.nrows() != d || x.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: x.nrows() });
        }
        let mut out = CMatrix::zeros(d, d);
        for p in 0..d * d {
            let mut acc = Complex::default();
            for q in 0..d * d {
                let s = self.dense[(p, q)];
                if s != Complex::default() {
                    acc += s * x[(q / d, q % d)];
                }
            }
            out[(p / d, p % d)] = acc;
        }
        Ok(out)
    }

    /// Image of the matrix unit `E_{m,n}`.
    pub fn apply_unit(&self, m: usize, n: usize) -> CMatrix<T> {
        let d = self.dim.get();
        let col = self.dense.column(unit_index(d, m, n));
        CMatrix::from_fn(d, d, |i, j| col[unit_index(d, i, j)])
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self { dim: self.dim, dense: &self.dense * &other.dense })
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        Self { dim: self.dim, dense: &self.dense * c }
    }

    pub fn scale_real(&self, c: T) -> Self {
        self.scale(re(c))
    }

    /// `self + c·𝕀`.
    pub fn plus_scalar(&self, c: Complex<T>) -> Self {
        let mut dense = self.dense.clone();
        for i in 0..dense.nrows() {
            dense[(i, i)] += c;
        }
        Self { dim: self.dim, dense }
    }

    /// Largest entry modulus of the dense matrix.
    pub fn max_abs(&self) -> T {
        max_abs(&self.dense)
    }

    /// Largest entry modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        crate::scalar::max_abs_diff(&self.dense, &other.dense)
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim.get(),
                found: other.dim.get(),
            });
        }
        Ok(())
    }
}

impl<T: Real> Add for &Superoperator<T> {
    type Output = Superoperator<T>;
    fn add(self, rhs: Self) -> Superoperator<T> {
        assert_eq!(self.dim, rhs.dim, "superoperator dimension mismatch");
        Superoperator { dim: self.dim, dense: &self.dense + &rhs.dense }
    }
}

impl<T: Real> Sub for &Superoperator<T> {
    type Output = Superoperator<T>;
    fn sub(self, rhs: Self) -> Superoperator<T> {
        assert_eq!(self.dim, rhs.dim, "superoperator dimension mismatch");
        Superoperator { dim: self.dim, dense: &self.dense - &rhs.dense }
    }
}

impl<T: Real> Mul for &Superoperator<T> {
    type Output = Superoperator<T>;
    fn mul(self, rhs: Self) -> Superoperator<T> {
        assert_eq!(self.dim, rhs.dim, "superoperator dimension mismatch");
        Superoperator { dim: self.dim, dense: &self.dense * &rhs.dense }
    }
}

impl<T: Real> Neg for &Superoperator<T> {
    type Output = Superoperator<T>;
    fn neg(self) -> Superoperator<T> {
        Superoperator { dim: self.dim, dense: -&self.dense }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl<T: Real> $tr for Superoperator<T> {
            type Output = Superoperator<T>;
            fn $f(self, rhs: Self) -> Superoperator<T> {
                (&self).$f(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// Builds one of the generators `K0`, `K±`, `N` on the truncated mode.
pub fn elementary<T: Real>(kind: Elementary, d: Dimension) -> Superoperator<T> {
    let a = annihilation::<T>(d);
    let ad = a.adjoint();
    let n = number::<T>(d);
    let id = CMatrix::identity(d.get(), d.get());
    match kind {
        Elementary::K0 => {
            let half = re(T::lit(0.5));
            let left = Superoperator::sandwich(&n, &id);
            let right = Superoperator::sandwich(&id, &n);
            (&left + &right).scale(half).plus_scalar(half)
        }
        Elementary::KPlus => Superoperator::sandwich(&ad, &a),
        Elementary::KMinus => Superoperator::sandwich(&a, &ad),
        Elementary::N => &Superoperator::sandwich(&n, &id) - &Superoperator::sandwich(&id, &n),
    }
}

/// `X ↦ ½(P X + X P)`.
pub fn half_anticommutator<T: Real>(p: &CMatrix<T>) -> Superoperator<T> {
    let id = CMatrix::identity(p.nrows(), p.ncols());
    (&Superoperator::sandwich(p, &id) + &Superoperator::sandwich(&id, p)).scale(re(T::lit(0.5)))
}

/// `ST − TS`.
pub fn commutator<T: Real>(s: &Superoperator<T>, t: &Superoperator<T>) -> Result<Superoperator<T>> {
    Ok(&s.compose(t)? - &t.compose(s)?)
}

/// Casimir element `C = K0² − K0 − K+K−`.
pub fn casimir<T: Real>(d: Dimension) -> Superoperator<T> {
    let k0 = elementary::<T>(Elementary::K0, d);
    let kp = elementary::<T>(Elementary::KPlus, d);
    let km = elementary::<T>(Elementary::KMinus, d);
    &(&(&k0 * &k0) - &k0) - &(&kp * &km)
}

/// Offset of a flat matrix-unit index.
#[inline]
pub fn offset_of(d: usize, p: usize) -> isize {
    (p / d) as isize - (p % d) as isize
}

/// Flat indices of the matrix units with offset `k = m − n`, ordered by the
/// column index `n` (for `k ≥ 0`) or the row index (for `k < 0`).
pub fn offset_units(d: usize, k: isize) -> Vec<usize> {
    let span = d as isize - k.abs();
    if span <= 0 {
        return Vec::new();
    }
    (0..span as usize)
        .map(|n| {
            if k >= 0 {
                unit_index(d, n + k as usize, n)
            } else {
                unit_index(d, n, n + k.unsigned_abs())
            }
        })
        .collect()
}

/// One offset sector of an offset-preserving superoperator.
#[derive(Debug, Clone, PartialEq)]
pub struct OffsetBlock<T: Real> {
    pub offset: isize,
    /// Flat indices of the sector's matrix units, in block order.
    pub units: Vec<usize>,
    pub matrix: CMatrix<T>,
}

const STRUCTURE_TOL: f64 = 1e-14;

/// Splits an offset-preserving superoperator into its offset sectors.
pub fn offset_blocks<T: Real>(s: &Superoperator<T>) -> Result<Vec<OffsetBlock<T>>> {
    let d = s.dim.get();
    let dense = &s.dense;
    let mut leak = T::zero();
    for p in 0..d * d {
        for q in 0..d * d {
            if offset_of(d, p) != offset_of(d, q) {
                leak = leak.max(cnorm(dense[(p, q)]));
            }
        }
    }
    if leak > T::tol(STRUCTURE_TOL) {
        return Err(Error::NotOffsetPreserving(leak.as_f64()));
    }
    let dd = d as isize;
    Ok((-(dd - 1)..dd)
        .map(|k| {
            let units = offset_units(d, k);
            let matrix = CMatrix::from_fn(units.len(), units.len(), |i, j| dense[(units[i], units[j])]);
            OffsetBlock { offset: k, units, matrix }
        })
        .collect())
}

/// Reassembles a superoperator from its offset sectors.
pub fn from_offset_blocks<T: Real>(d: Dimension, blocks: &[OffsetBlock<T>]) -> Superoperator<T> {
    let mut out = Superoperator::zeros(d);
    for b in blocks {
        for (i, &p) in b.units.iter().enumerate() {
            for (j, &q) in b.units.iter().enumerate() {
                out.dense[(p, q)] = b.matrix[(i, j)];
            }
        }
    }
    out
}

/// Applies `f` to the eigenvalues of a superoperator that is diagonal in the
/// matrix-unit basis.
pub fn scalar_function_of_diagonal<T: Real>(
    s: &Superoperator<T>,
    f: impl Fn(Complex<T>) -> Complex<T>,
) -> Result<Superoperator<T>> {
    let n = s.dense.nrows();
    let mut leak = T::zero();
    for p in 0..n {
        for q in 0..n {
            if p != q {
                leak = leak.max(cnorm(s.dense[(p, q)]));
            }
        }
    }
    if leak > T::tol(STRUCTURE_TOL) {
        return Err(Error::NotDiagonal(leak.as_f64()));
    }
    let dense = CMatrix::from_fn(n, n, |p, q| if p == q { f(s.dense[(p, p)]) } else { Complex::default() });
    Ok(Superoperator { dim: s.dim, dense })
}

/// Choi matrix `Σ_{m,n} E_{m,n} ⊗ S(E_{m,n})`; `S` is completely positive
/// iff this matrix is positive semidefinite.
pub fn choi<T: Real>(s: &Superoperator<T>) -> CMatrix<T> {
    let d = s.dim.get();
    CMatrix::from_fn(d * d, d * d, |r, c| {
        let (m, i) = (r / d, r % d);
        let (n, j) = (c / d, c % d);
        s.dense[(unit_index(d, i, j), unit_index(d, m, n))]
    })
}

/// Ordering tag written into exported superoperator files.
pub const ORDERING: &str = "row-major: p = m*d + n";

/// Serialized form of a superoperator: nested `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperoperatorJson {
    pub d: usize,
    pub ordering: String,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

impl<T: Real> Superoperator<T> {
    pub fn to_json(&self) -> SuperoperatorJson {
        let n = self.dense.nrows();
        let matrix = (0..n)
            .map(|r| (0..n).map(|c| {
                let z = self.dense[(r, c)];
                [z.re.as_f64(), z.im.as_f64()]
            }).collect())
            .collect();
        SuperoperatorJson { d: self.dim.get(), ordering: ORDERING.to_string(), matrix }
    }

    pub fn from_json(j: &SuperoperatorJson) -> Result<Self> {
        let dim = Dimension::new(j.d)?;
        let n = dim.squared();
        if j.ordering != ORDERING {
            return Err(Error::InvalidParams { name: "ordering", reason: j.ordering.clone() });
        }
        if j.matrix.len() != n || j.matrix.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: j.matrix.len() });
        }
        let dense = DMatrix::from_fn(n, n, |r, c| {
            let [x, y] = j.matrix[r][c];
            Complex::new(T::lit(x), T::lit(y))
        });
        Ok(Self { dim, dense })
    }
}
