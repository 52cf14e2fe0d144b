//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt;

use nalgebra::{ComplexField, DMatrix, RealField};
use num_complex::Complex;
use num_traits::ToPrimitive;

/// Real floating-point type the simulator is generic over (`f32` or `f64`).
pub trait Real: RealField + Copy + Default + ToPrimitive + fmt::Display {
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        nalgebra::convert(x)
    }

    /// Lossy conversion used for diagnostics and serialization.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// A tolerance stated for `f64`, widened to a few ulps of `Self` when the
    /// type cannot resolve it.
    #[inline]
    fn tol(x: f64) -> Self {
        let floor = Self::default_epsilon() * Self::lit(64.0);
        let t = Self::lit(x);
        if t > floor {
            t
        } else {
            floor
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex dense matrix over `T`.
pub type CMatrix<T> = DMatrix<Complex<T>>;

#[inline]
pub(crate) fn cx<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::lit(im))
}

#[inline]
pub(crate) fn re<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

#[inline]
pub(crate) fn cexp<T: Real>(z: Complex<T>) -> Complex<T> {
    ComplexField::exp(z)
}

#[inline]
pub(crate) fn csqrt<T: Real>(z: Complex<T>) -> Complex<T> {
    ComplexField::sqrt(z)
}

#[inline]
pub(crate) fn cnorm<T: Real>(z: Complex<T>) -> T {
    ComplexField::modulus(z)
}

#[inline]
pub(crate) fn rabs<T: Real>(x: T) -> T {
    ComplexField::abs(x)
}

/// Largest entry modulus of a complex matrix.
pub fn max_abs<T: Real>(m: &CMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(cnorm(*z)))
}

/// Largest entry modulus of `a - b`.
pub fn max_abs_diff<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> T {
    a.iter()
        .zip(b.iter())
        .fold(T::zero(), |acc, (x, y)| acc.max(cnorm(*x - *y)))
}

/// `sinh(z)/z`, accurate through `z = 0`.
pub(crate) fn sinhc<T: Real>(z: Complex<T>) -> Complex<T> {
    if cnorm(z) <= T::lit(0.5) {
        // Taylor series; the eighth term is below 1e-17 for |z| <= 0.5.
        let z2 = z * z;
        let mut term = re(T::one());
        let mut sum = term;
        for k in 1..9u32 {
            let denom = T::lit(((2 * k) * (2 * k + 1)) as f64);
            term = term * z2 / re(denom);
            sum += term;
        }
        sum
    } else {
        ComplexField::sinh(z) / z
    }
}

/// First divided difference of `λ ↦ exp(λt)`:
/// `(e^{λ1 t} − e^{λ2 t}) / (λ1 − λ2)`, equal to `t·e^{λt}` when `λ1 = λ2`.
///
/// This is also `∫₀ᵗ e^{λ1 (t−s)} e^{λ2 s} ds`.
pub fn exp_divided_difference<T: Real>(l1: Complex<T>, l2: Complex<T>, t: T) -> Complex<T> {
    let half = T::lit(0.5);
    let centre = (l1 + l2) * re(half * t);
    let h = (l1 - l2) * re(half * t);
    re(t) * cexp(centre) * sinhc(h)
}
