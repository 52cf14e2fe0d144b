//! Weak-relaxation perturbation theory.
//!
//! At zero order the relaxation rates are dropped. The remaining generator
//! couples the `g` unit `E_{m+1,n+1}` only to the `e` unit `E_{m,n}`, so the
//! zero-order propagator splits into 2×2 systems
//!
//! ```text
//! ẋ = −a_g x + αs y,   ẏ = αs x − a_e y,   s = √((m+1)(n+1))
//! ```
//!
//! with characteristic roots `μ1,2 = (±√D − α(m+n+2))/2`,
//! `D = 4α²(m+1)(n+1) − 4κ²Δ²(m−n)²`. Units with no partner evolve by a
//! single exponential.
//!
//! The first-order correction is `∫₀ᵗ G0(t−s) R G0(s) ds` with the relaxation
//! coupling `R = [[−γ_ge, γ_eg], [γ_ge, −γ_eg]]`, integrated by composite
//! Simpson with repeated panel doubling.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::generator::{derived_constants, kappa, Atom, ModelParams};
use crate::scalar::{cexp, cnorm, csqrt, exp_divided_difference, rabs, re, Real};
use crate::superop::{unit_index, Superoperator};

use super::{check_time, ConditionalPropagators, Method};

/// Simpson panels are doubled at most until this count is reached.
pub const QUAD_PANEL_CAP: usize = 1 << 16;

const QUAD_REL_TOL: f64 = 1e-6;
const DEGENERACY_TOL: f64 = 1e-9;

/// `max(γ_ge, γ_eg) < κΓ`.
pub fn weak_regime_valid<T: Real>(p: &ModelParams<T>) -> Result<bool> {
    let alpha = derived_constants(p)?.alpha;
    Ok(p.gamma_ge.max(p.gamma_eg) < alpha)
}

/// Characteristic data of the 2×2 system attached to the `e` unit `E_{m,n}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicRootData<T: Real> {
    pub discriminant: Complex<T>,
    pub mu1: Complex<T>,
    pub mu2: Complex<T>,
    /// `|μ1 − μ2| < 1e−9·max(|μ1|, |μ2|, α)`; the propagator then uses the
    /// confluent limit, which the divided-difference evaluation handles.
    pub degenerate: bool,
}

/// Roots for the pair `(g: E_{m+1,n+1}, e: E_{m,n})`, `m, n ≤ d − 2`.
pub fn characteristic_roots<T: Real>(
    p: &ModelParams<T>,
    m: usize,
    n: usize,
) -> Result<CharacteristicRootData<T>> {
    let d = p.d.get();
    for idx in [m, n] {
        if idx + 1 >= d {
            return Err(Error::IndexOutOfRange { index: idx, dim: d.saturating_sub(1) });
        }
    }
    let kappa = kappa(p)?;
    Ok(Pair::new(kappa * p.gamma_phase, kappa * p.delta, m, n).roots)
}

#[derive(Debug, Clone, Copy)]
struct Pair<T: Real> {
    a_g: Complex<T>,
    a_e: Complex<T>,
    coupling: T,
    roots: CharacteristicRootData<T>,
}

impl<T: Real> Pair<T> {
    fn new(alpha: T, kd: T, m: usize, n: usize) -> Self {
        let half = T::lit(0.5);
        let sum = T::lit((m + n + 2) as f64);
        let diff = T::lit(m as f64 - n as f64);
        let s2 = T::lit(((m + 1) * (n + 1)) as f64);
        let a_g = Complex::new(alpha * sum * half, kd * diff);
        let a_e = Complex::new(alpha * sum * half, -kd * diff);
        // 4(αs − κΔ|m−n|)(αs + κΔ|m−n|), exact zero when the terms balance
        let (coherent, detuned) = (alpha * s2.sqrt(), rabs(kd * diff));
        let disc = re(T::lit(4.0) * (coherent - detuned) * (coherent + detuned));
        let root = csqrt(disc);
        let mu1 = (root - re(alpha * sum)) * re(half);
        let mu2 = (-root - re(alpha * sum)) * re(half);
        let scale = cnorm(mu1).max(cnorm(mu2)).max(alpha);
        let degenerate = cnorm(mu1 - mu2) < T::lit(DEGENERACY_TOL) * scale;
        Self {
            a_g,
            a_e,
            coupling: coherent,
            roots: CharacteristicRootData { discriminant: disc, mu1, mu2, degenerate },
        }
    }

    /// `(x, y)` at time `t` starting from the `g` unit (`from = G`) or the
    /// `e` unit.
    fn propagate(&self, from: Atom, t: T) -> (Complex<T>, Complex<T>) {
        let CharacteristicRootData { mu1, mu2, .. } = self.roots;
        let phi = exp_divided_difference(mu1, mu2, t);
        let lead = cexp(mu1 * re(t));
        let cross = phi * re(self.coupling);
        match from {
            Atom::G => (lead - (mu1 + self.a_g) * phi, cross),
            Atom::E => (cross, lead - (mu1 + self.a_e) * phi),
        }
    }
}

/// Sparse zero-order propagator: each source unit reaches at most one `g`
/// unit and one `e` unit.
struct ZeroOrder<T: Real> {
    d: usize,
    pairs: Vec<Pair<T>>,
    /// Decay rates of the unpaired units, by flat index.
    lone_g: Vec<Complex<T>>,
    lone_e: Vec<Complex<T>>,
}

#[derive(Debug, Clone, Copy, Default)]
struct Image<T: Real> {
    g: Option<(usize, Complex<T>)>,
    e: Option<(usize, Complex<T>)>,
}

impl<T: Real> ZeroOrder<T> {
    fn new(p: &ModelParams<T>) -> Result<Self> {
        let kappa = kappa(p)?;
        let alpha = kappa * p.gamma_phase;
        let kd = kappa * p.delta;
        let d = p.d.get();
        let half = T::lit(0.5);
        let inner = d.saturating_sub(1);
        let mut pairs = Vec::with_capacity(inner * inner);
        for m in 0..inner {
            for n in 0..inner {
                pairs.push(Pair::new(alpha, kd, m, n));
            }
        }
        let upper = |j: usize| if j + 1 < d { T::lit((j + 1) as f64) } else { T::zero() };
        let mut lone_g = vec![Complex::default(); d * d];
        let mut lone_e = vec![Complex::default(); d * d];
        for m in 0..d {
            for n in 0..d {
                let diff = T::lit(m as f64 - n as f64);
                let q = unit_index(d, m, n);
                lone_g[q] = Complex::new(alpha * T::lit((m + n) as f64) * half, kd * diff);
                lone_e[q] = Complex::new(alpha * (upper(m) + upper(n)) * half, -kd * diff);
            }
        }
        Ok(Self { d, pairs, lone_g, lone_e })
    }

    fn column(&self, from: Atom, q: usize, t: T) -> Image<T> {
        let d = self.d;
        let (m, n) = (q / d, q % d);
        match from {
            Atom::G if m >= 1 && n >= 1 => {
                let (x, y) = self.pairs[(m - 1) * (d - 1) + (n - 1)].propagate(Atom::G, t);
                Image { g: Some((q, x)), e: Some((unit_index(d, m - 1, n - 1), y)) }
            }
            Atom::G => Image { g: Some((q, cexp(-self.lone_g[q] * re(t)))), e: None },
            Atom::E if m + 1 < d && n + 1 < d => {
                let (x, y) = self.pairs[m * (d - 1) + n].propagate(Atom::E, t);
                Image { g: Some((unit_index(d, m + 1, n + 1), x)), e: Some((q, y)) }
            }
            Atom::E => Image { g: None, e: Some((q, cexp(-self.lone_e[q] * re(t)))) },
        }
    }

    /// Dense `[M_g, M_e]` for one preparation.
    fn dense(&self, dim: crate::fock::Dimension, prepared: Atom, t: T) -> [Superoperator<T>; 2] {
        let dd = self.d * self.d;
        let mut out = [nalgebra::DMatrix::zeros(dd, dd), nalgebra::DMatrix::zeros(dd, dd)];
        for q in 0..dd {
            let img = self.column(prepared, q, t);
            if let Some((p, v)) = img.g {
                out[0][(p, q)] = v;
            }
            if let Some((p, v)) = img.e {
                out[1][(p, q)] = v;
            }
        }
        let [g, e] = out;
        [
            Superoperator::from_dense(dim, g).expect("square"),
            Superoperator::from_dense(dim, e).expect("square"),
        ]
    }
}

fn identity_at_zero<T: Real>(
    p: &ModelParams<T>,
    prepared: Atom,
    order: u8,
    valid: bool,
) -> ConditionalPropagators<T> {
    ConditionalPropagators::initial(p.d, prepared, Method::Weak, order, valid)
}

pub fn weak_zero_order<T: Real>(
    p: &ModelParams<T>,
    prepared: Atom,
    t: T,
) -> Result<ConditionalPropagators<T>> {
    check_time(t)?;
    let valid = weak_regime_valid(p)?;
    if t == T::zero() {
        return Ok(identity_at_zero(p, prepared, 0, valid));
    }
    let [m_g, m_e] = ZeroOrder::new(p)?.dense(p.d, prepared, t);
    Ok(ConditionalPropagators { prepared, t, m_g, m_e, method: Method::Weak, order: 0, valid })
}

pub fn weak_first_order<T: Real>(
    p: &ModelParams<T>,
    prepared: Atom,
    t: T,
    quad_steps: usize,
) -> Result<ConditionalPropagators<T>> {
    weak_first_order_with_tolerance(p, prepared, t, quad_steps, QUAD_REL_TOL)
}

/// [`weak_first_order`] with an explicit relative tolerance on the
/// step-halving error estimate.
pub fn weak_first_order_with_tolerance<T: Real>(
    p: &ModelParams<T>,
    prepared: Atom,
    t: T,
    quad_steps: usize,
    rel_tol: f64,
) -> Result<ConditionalPropagators<T>> {
    check_time(t)?;
    if quad_steps < 8 || !quad_steps.is_multiple_of(2) {
        return Err(Error::InvalidQuadSteps(quad_steps));
    }
    let valid = weak_regime_valid(p)?;
    if t == T::zero() {
        return Ok(identity_at_zero(p, prepared, 1, valid));
    }
    let zero = ZeroOrder::new(p)?;
    let [g0, e0] = zero.dense(p.d, prepared, t);
    if p.gamma_ge == T::zero() && p.gamma_eg == T::zero() {
        return Ok(ConditionalPropagators { prepared, t, m_g: g0, m_e: e0, method: Method::Weak, order: 1, valid });
    }

    let d = zero.d;
    let dd = d * d;
    let len = 2 * dd * dd;
    let (gge, geg) = (re(p.gamma_ge), re(p.gamma_eg));

    // acc[(r·d² + p)·d² + q] += w · [G0(t−s) R G0(s)]_{r,p; prepared,q}
    let integrand = |s: T, w: T, acc: &mut [Complex<T>]| {
        let w = re(w);
        let mut push = |from: Atom, src: usize, c: Complex<T>, q: usize| {
            let img = zero.column(from, src, t - s);
            if let Some((pp, v)) = img.g {
                acc[pp * dd + q] += w * c * v;
            }
            if let Some((pp, v)) = img.e {
                acc[(dd + pp) * dd + q] += w * c * v;
            }
        };
        for q in 0..dd {
            let img = zero.column(prepared, q, s);
            if let Some((pg, vg)) = img.g {
                push(Atom::G, pg, -gge * vg, q);
                push(Atom::E, pg, gge * vg, q);
            }
            if let Some((pe, ve)) = img.e {
                push(Atom::G, pe, geg * ve, q);
                push(Atom::E, pe, -geg * ve, q);
            }
        }
    };

    let base_norm = g0.max_abs().max(e0.max_abs());
    let corr = simpson_doubling(integrand, t, quad_steps, len, base_norm, rel_tol)?;

    let block = |r: usize| {
        nalgebra::DMatrix::from_fn(dd, dd, |pp, q| corr[(r * dd + pp) * dd + q])
    };
    let m_g = &g0 + &Superoperator::from_dense(p.d, block(0))?;
    let m_e = &e0 + &Superoperator::from_dense(p.d, block(1))?;
    Ok(ConditionalPropagators { prepared, t, m_g, m_e, method: Method::Weak, order: 1, valid })
}

/// Composite Simpson over `[0, t]` for a vector-valued integrand, doubling the
/// panel count until `|S_2n − S_n|/15 ≤ rel_tol · max(|base + S_2n|)`.
///
/// `f(s, w, acc)` must add `w·f(s)` into `acc`.
fn simpson_doubling<T: Real>(
    f: impl Fn(T, T, &mut [Complex<T>]),
    t: T,
    panels: usize,
    len: usize,
    base_norm: T,
    rel_tol: f64,
) -> Result<Vec<Complex<T>>> {
    let one = T::one();
    let mut ends = vec![Complex::default(); len];
    f(T::zero(), one, &mut ends);
    f(t, one, &mut ends);

    let mut n = panels;
    let h = |n: usize| t / T::lit(n as f64);
    let mut even = vec![Complex::default(); len];
    let mut odd = vec![Complex::default(); len];
    for k in 1..n {
        let s = h(n) * T::lit(k as f64);
        if k % 2 == 0 {
            f(s, one, &mut even);
        } else {
            f(s, one, &mut odd);
        }
    }
    let combine = |n: usize, even: &[Complex<T>], odd: &[Complex<T>]| -> Vec<Complex<T>> {
        let c = re(h(n) / T::lit(3.0));
        let (two, four) = (re(T::lit(2.0)), re(T::lit(4.0)));
        (0..len).map(|i| c * (ends[i] + two * even[i] + four * odd[i])).collect()
    };
    let mut coarse = combine(n, &even, &odd);
    loop {
        if n * 2 > QUAD_PANEL_CAP.max(panels) {
            let est = estimate(&coarse, &coarse);
            return Err(Error::QuadratureNotConverged { estimate: est.as_f64(), tolerance: rel_tol });
        }
        for i in 0..len {
            even[i] += odd[i];
            odd[i] = Complex::default();
        }
        n *= 2;
        for k in (1..n).step_by(2) {
            f(h(n) * T::lit(k as f64), one, &mut odd);
        }
        let fine = combine(n, &even, &odd);
        let est = estimate(&fine, &coarse) / T::lit(15.0);
        let norm = base_norm.max(fine.iter().fold(T::zero(), |a, z| a.max(cnorm(*z))));
        let tol = T::lit(rel_tol) * norm;
        if est <= tol {
            return Ok(fine);
        }
        if n * 2 > QUAD_PANEL_CAP.max(panels) {
            return Err(Error::QuadratureNotConverged { estimate: est.as_f64(), tolerance: tol.as_f64() });
        }
        coarse = fine;
    }
}

fn estimate<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc.max(cnorm(*x - *y)))
}
