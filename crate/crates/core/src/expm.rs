//! Dense complex matrix exponential: scaling and squaring around a degree-13
//! diagonal Padé approximant.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cnorm, re, CMatrix, Real};

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Largest 1-norm for which the degree-13 approximant is accurate to unit
/// roundoff in double precision.
const THETA13: f64 = 5.371920351148152;

/// Induced 1-norm (largest column sum).
pub fn norm1<T: Real>(m: &CMatrix<T>) -> T {
    m.column_iter()
        .map(|c| c.iter().fold(T::zero(), |acc, z| acc + cnorm(*z)))
        .fold(T::zero(), |a, b| a.max(b))
}

/// `exp(A)` for a square complex matrix.
pub fn expm<T: Real>(a: &CMatrix<T>) -> Result<CMatrix<T>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimensionMismatch { expected: n, found: a.ncols() });
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::ExpmFailure("non-finite input".into()));
    }
    if n == 0 {
        return Ok(a.clone());
    }

    let norm = norm1(a).as_f64();
    let s = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let scaled = a * re(T::lit(0.5f64.powi(s)));

    let b = |k: usize| re(T::lit(PADE13[k]));
    let id = CMatrix::<T>::identity(n, n);
    let a2 = &scaled * &scaled;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let u_inner = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9))
        + &a6 * b(7)
        + &a4 * b(5)
        + &a2 * b(3)
        + &id * b(1);
    let u = &scaled * u_inner;
    let v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8))
        + &a6 * b(6)
        + &a4 * b(4)
        + &a2 * b(2)
        + &id * b(0);

    let p = &v + &u;
    let q = &v - &u;
    let lu = q.lu();
    let mut r = lu
        .solve(&p)
        .ok_or_else(|| Error::ExpmFailure("singular Padé denominator".into()))?;
    for _ in 0..s {
        r = &r * &r;
    }
    if r.iter().any(|z: &Complex<T>| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::ExpmFailure("overflow during squaring".into()));
    }
    Ok(r)
}
