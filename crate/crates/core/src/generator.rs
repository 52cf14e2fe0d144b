//! Model generators: the full atom-field equations in the rotating frame, the
//! secular Liouvillian of the diagonal atomic blocks, and the constant 2×2
//! block generator of the conditional transformers.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::fock::{annihilation, number, Dimension, FieldDensityMatrix};
use crate::scalar::{cnorm, cx, re, CMatrix, Real};
use crate::superop::{elementary, half_anticommutator, Elementary, Superoperator};

/// Atomic basis state, used both as preparation and as detection label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Atom {
    G,
    E,
}

impl Atom {
    pub const BOTH: [Atom; 2] = [Atom::G, Atom::E];

    #[inline]
    pub fn index(self) -> usize {
        match self {
            Atom::G => 0,
            Atom::E => 1,
        }
    }

    pub fn other(self) -> Atom {
        match self {
            Atom::G => Atom::E,
            Atom::E => Atom::G,
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Atom::G => "g",
            Atom::E => "e",
        })
    }
}

impl FromStr for Atom {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "g" => Ok(Atom::G),
            "e" => Ok(Atom::E),
            other => Err(format!("expected g or e, got {other:?}")),
        }
    }
}

/// Physical rates of the model plus the field truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<T: Real> {
    /// Coupling Ω.
    pub omega: Complex<T>,
    /// Detuning Δ.
    pub delta: T,
    /// Phase relaxation Γ.
    pub gamma_phase: T,
    /// Upward population rate γ_ge.
    pub gamma_ge: T,
    /// Downward population rate γ_eg.
    pub gamma_eg: T,
    pub d: Dimension,
}

impl<T: Real> ModelParams<T> {
    pub fn new(
        omega: Complex<T>,
        delta: T,
        gamma_phase: T,
        gamma_ge: T,
        gamma_eg: T,
        d: Dimension,
    ) -> Result<Self> {
        let p = Self { omega, delta, gamma_phase, gamma_ge, gamma_eg, d };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |name: &'static str, x: T| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParams { name, reason: format!("{x} is not finite") })
            }
        };
        finite("omega", self.omega.re)?;
        finite("omega_im", self.omega.im)?;
        finite("delta", self.delta)?;
        for (name, x) in [
            ("gamma_phase", self.gamma_phase),
            ("gamma_ge", self.gamma_ge),
            ("gamma_eg", self.gamma_eg),
        ] {
            finite(name, x)?;
            if x < T::zero() {
                return Err(Error::InvalidParams { name, reason: format!("{x} is negative") });
            }
        }
        Ok(())
    }

    /// `|Ω|`.
    pub fn omega_abs(&self) -> T {
        cnorm(self.omega)
    }

    pub fn with_gammas(self, gamma_ge: T, gamma_eg: T) -> Self {
        Self { gamma_ge, gamma_eg, ..self }
    }

    pub fn with_dim(self, d: Dimension) -> Self {
        Self { d, ..self }
    }
}

/// κ, α = κΓ and β = κ(iΔN − Γ/2).
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedConstants<T: Real> {
    pub kappa: T,
    pub alpha: T,
    pub beta: Superoperator<T>,
}

/// `κ = |Ω|²/(Γ² + Δ²)`.
pub(crate) fn kappa<T: Real>(p: &ModelParams<T>) -> Result<T> {
    let denom = p.gamma_phase * p.gamma_phase + p.delta * p.delta;
    if denom <= T::zero() {
        return Err(Error::DegenerateParams);
    }
    Ok(p.omega.norm_sqr() / denom)
}

pub fn derived_constants<T: Real>(p: &ModelParams<T>) -> Result<DerivedConstants<T>> {
    p.validate()?;
    let kappa = kappa(p)?;
    let alpha = kappa * p.gamma_phase;
    let n = elementary::<T>(Elementary::N, p.d);
    let beta = n
        .scale(Complex::new(T::zero(), kappa * p.delta))
        .plus_scalar(re(-alpha * T::lit(0.5)));
    Ok(DerivedConstants { kappa, alpha, beta })
}

/// A 2×2 array of superoperators acting on pairs `(X_g, X_e)`;
/// `blocks[r][s]` maps the `s` component into the `r` component.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockGenerator<T: Real> {
    pub blocks: [[Superoperator<T>; 2]; 2],
}

impl<T: Real> BlockGenerator<T> {
    #[inline]
    pub fn block(&self, to: Atom, from: Atom) -> &Superoperator<T> {
        &self.blocks[to.index()][from.index()]
    }

    pub fn dim(&self) -> Dimension {
        self.blocks[0][0].dim()
    }

    /// `(X_g, X_e) ↦ A (X_g, X_e)`.
    pub fn apply(&self, pair: [&CMatrix<T>; 2]) -> Result<[CMatrix<T>; 2]> {
        let mut out = [CMatrix::zeros(0, 0), CMatrix::zeros(0, 0)];
        for (r, slot) in out.iter_mut().enumerate() {
            *slot = &self.blocks[r][0].apply(pair[0])? + &self.blocks[r][1].apply(pair[1])?;
        }
        Ok(out)
    }

    /// Largest entry-wise difference over all four blocks.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        let mut worst = T::zero();
        for r in 0..2 {
            for s in 0..2 {
                worst = worst.max(self.blocks[r][s].max_abs_diff(&other.blocks[r][s]));
            }
        }
        worst
    }
}

/// Constant generator of the conditional transformer system.
///
/// `A_gg = −(αK0 + β + γ_ge)`, `A_ge = αK+ + γ_eg`, `A_eg = αK− + γ_ge`,
/// `A_ee = −(αK0 − β + γ_eg)`. The K0 ± α/2 combinations are realized as
/// `α·½{a†a,·}` and `α·½{aa†,·}` so that probability is conserved exactly on
/// the truncated space.
pub fn conditional_block_generator<T: Real>(p: &ModelParams<T>) -> Result<BlockGenerator<T>> {
    let c = derived_constants(p)?;
    let d = p.d;
    let alpha = c.alpha;
    let kd = Complex::new(T::zero(), c.kappa * p.delta);

    let a = annihilation::<T>(d);
    let n_op = elementary::<T>(Elementary::N, d);
    let lower = half_anticommutator(&number::<T>(d));
    let upper = half_anticommutator(&(&a * a.adjoint()));

    let gg = (&lower.scale_real(alpha) + &n_op.scale(kd)).plus_scalar(re(p.gamma_ge));
    let ee = (&upper.scale_real(alpha) - &n_op.scale(kd)).plus_scalar(re(p.gamma_eg));
    let ge = elementary::<T>(Elementary::KPlus, d).scale_real(alpha).plus_scalar(re(p.gamma_eg));
    let eg = elementary::<T>(Elementary::KMinus, d).scale_real(alpha).plus_scalar(re(p.gamma_ge));

    Ok(BlockGenerator { blocks: [[-&gg, ge], [eg, -&ee]] })
}

/// Secular Liouvillian of the diagonal atomic blocks `(ρ_gg, ρ_ee)`.
///
/// Assembled from operator products, independently of the elementary
/// superoperators, so that it can serve as a cross-check of
/// [`conditional_block_generator`]:
///
/// ```text
/// ρ̇_gg = −α·½{a†a, ρ_gg} + α a†ρ_ee a − iκΔ[a†a, ρ_gg] − γ_ge ρ_gg + γ_eg ρ_ee
/// ρ̇_ee = −α·½{aa†, ρ_ee} + α aρ_gg a† + iκΔ[a†a, ρ_ee] − γ_eg ρ_ee + γ_ge ρ_gg
/// ```
pub fn secular_liouvillian<T: Real>(p: &ModelParams<T>) -> Result<BlockGenerator<T>> {
    p.validate()?;
    let kappa = kappa(p)?;
    let alpha = kappa * p.gamma_phase;
    let d = p.d;
    let a = annihilation::<T>(d);
    let ad = a.adjoint();
    let n = number::<T>(d);
    let aad = &a * &ad;
    let half = re(T::lit(0.5));
    let ikd = Complex::new(T::zero(), kappa * p.delta);
    let (ca, gge, geg) = (re(alpha), re(p.gamma_ge), re(p.gamma_eg));

    let gg = Superoperator::from_map(d, |x| {
        -(&n * x + x * &n) * (ca * half) - (&n * x - x * &n) * ikd - x * gge
    });
    let ge = Superoperator::from_map(d, |x| &ad * x * &a * ca + x * geg);
    let eg = Superoperator::from_map(d, |x| &a * x * &ad * ca + x * gge);
    let ee = Superoperator::from_map(d, |x| {
        -(&aad * x + x * &aad) * (ca * half) + (&n * x - x * &n) * ikd - x * geg
    });
    Ok(BlockGenerator { blocks: [[gg, ge], [eg, ee]] })
}

/// Rotating-frame atom-field state, split into atomic blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomFieldState<T: Real> {
    pub gg: CMatrix<T>,
    pub ge: CMatrix<T>,
    pub eg: CMatrix<T>,
    pub ee: CMatrix<T>,
}

impl<T: Real> AtomFieldState<T> {
    /// Atom in `prepared`, field in `rho`, no atomic coherence.
    pub fn product(prepared: Atom, rho: &FieldDensityMatrix<T>) -> Self {
        let d = rho.dim().get();
        let zero = CMatrix::zeros(d, d);
        let (gg, ee) = match prepared {
            Atom::G => (rho.matrix().clone(), zero.clone()),
            Atom::E => (zero.clone(), rho.matrix().clone()),
        };
        Self { gg, ge: zero.clone(), eg: zero, ee }
    }

    pub fn dim(&self) -> usize {
        self.gg.nrows()
    }

    /// `Tr ρ_gg + Tr ρ_ee`.
    pub fn trace(&self) -> Complex<T> {
        self.gg.trace() + self.ee.trace()
    }

    /// `self + h·k`.
    pub(crate) fn axpy(&self, h: T, k: &Self) -> Self {
        let h = re(h);
        Self {
            gg: &self.gg + &k.gg * h,
            ge: &self.ge + &k.ge * h,
            eg: &self.eg + &k.eg * h,
            ee: &self.ee + &k.ee * h,
        }
    }
}

/// Time derivative of the rotating-frame atom-field state:
///
/// ```text
/// ρ̇_gg = −i(Ω* a†ρ_eg − Ω ρ_ge a) + γ_eg ρ_ee − γ_ge ρ_gg
/// ρ̇_ge = −i(Ω* a†ρ_ee − Ω* ρ_gg a†) − (Γ + iΔ) ρ_ge
/// ρ̇_eg = −i(Ω aρ_gg − Ω ρ_ee a) − (Γ − iΔ) ρ_eg
/// ρ̇_ee = −i(Ω aρ_ge − Ω* ρ_eg a†) + γ_ge ρ_gg − γ_eg ρ_ee
/// ```
pub fn presecular_rhs<T: Real>(p: &ModelParams<T>, s: &AtomFieldState<T>) -> Result<AtomFieldState<T>> {
    let d = p.d.get();
    for m in [&s.gg, &s.ge, &s.eg, &s.ee] {
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: m.nrows() });
        }
    }
    let ops = PresecularOps::new(p);
    Ok(ops.rhs(s))
}

/// Operators reused by every right-hand-side evaluation.
pub(crate) struct PresecularOps<T: Real> {
    a: CMatrix<T>,
    ad: CMatrix<T>,
    omega: Complex<T>,
    omega_c: Complex<T>,
    decay_ge: Complex<T>,
    decay_eg: Complex<T>,
    gamma_ge: Complex<T>,
    gamma_eg: Complex<T>,
}

impl<T: Real> PresecularOps<T> {
    pub(crate) fn new(p: &ModelParams<T>) -> Self {
        let a = annihilation::<T>(p.d);
        let ad = a.adjoint();
        Self {
            a,
            ad,
            omega: p.omega,
            omega_c: p.omega.conj(),
            decay_ge: Complex::new(p.gamma_phase, p.delta),
            decay_eg: Complex::new(p.gamma_phase, -p.delta),
            gamma_ge: re(p.gamma_ge),
            gamma_eg: re(p.gamma_eg),
        }
    }

    pub(crate) fn rhs(&self, s: &AtomFieldState<T>) -> AtomFieldState<T> {
        let i = cx::<T>(0.0, 1.0);
        let (a, ad) = (&self.a, &self.ad);
        let gg = -(ad * &s.eg * self.omega_c - &s.ge * a * self.omega) * i + &s.ee * self.gamma_eg
            - &s.gg * self.gamma_ge;
        let ge = -(ad * &s.ee * self.omega_c - &s.gg * ad * self.omega_c) * i - &s.ge * self.decay_ge;
        let eg = -(a * &s.gg * self.omega - &s.ee * a * self.omega) * i - &s.eg * self.decay_eg;
        let ee = -(a * &s.ge * self.omega - &s.eg * ad * self.omega_c) * i + &s.gg * self.gamma_ge
            - &s.ee * self.gamma_eg;
        AtomFieldState { gg, ge, eg, ee }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{fock_state, mixed_state};
    use crate::scalar::max_abs;
    use crate::superop::matrix_unit;
    use proptest::prelude::*;

    fn params(d: usize) -> ModelParams<f64> {
        ModelParams::new(cx(0.7, 0.0), 0.5, 2.0, 0.1, 1.0, Dimension::new(d).unwrap()).unwrap()
    }

    #[test]
    fn derived_constant_examples() {
        let c = derived_constants(&params(4)).unwrap();
        assert!((c.kappa - 0.49 / 4.25).abs() < 1e-15);
        assert!((c.kappa - 0.1152941).abs() < 1e-7);
        assert!((c.alpha - 0.2305882).abs() < 1e-7);

        let mut p = params(3);
        p.delta = 0.0;
        let c = derived_constants(&p).unwrap();
        let want = Superoperator::scalar(p.d, re(-c.alpha / 2.0));
        assert!(c.beta.max_abs_diff(&want) < 1e-16);

        p.gamma_phase = 0.0;
        assert_eq!(derived_constants(&p), Err(Error::DegenerateParams));
    }

    #[test]
    fn beta_is_scalar_on_offset_zero() {
        let p = params(4);
        let c = derived_constants(&p).unwrap();
        for n in 0..4 {
            let img = c.beta.apply(&matrix_unit(p.d, n, n)).unwrap();
            assert!((img[(n, n)] - re(-c.alpha / 2.0)).norm() < 1e-16);
        }
    }

    #[test]
    fn rejects_bad_rates() {
        let d = Dimension::new(2).unwrap();
        let r = ModelParams::new(cx(0.7, 0.0), 0.5, 2.0, -0.1, 1.0, d);
        assert!(matches!(r, Err(Error::InvalidParams { name: "gamma_ge", .. })));
        let r = ModelParams::new(cx(f64::NAN, 0.0), 0.5, 2.0, 0.1, 1.0, d);
        assert!(matches!(r, Err(Error::InvalidParams { name: "omega", .. })));
    }

    #[test]
    fn single_level_generator() {
        let p = params(1);
        let a = conditional_block_generator(&p).unwrap();
        let at = |r: usize, s: usize| a.blocks[r][s].dense()[(0, 0)];
        assert!((at(0, 0) - re(-0.1)).norm() < 1e-15);
        assert!((at(0, 1) - re(1.0)).norm() < 1e-15);
        assert!((at(1, 0) - re(0.1)).norm() < 1e-15);
        // aa† vanishes on the only level, so the top-edge correction removes α
        assert!((at(1, 1) - re(-1.0)).norm() < 1e-15);
    }

    #[test]
    fn eg_block_example() {
        let p = params(3);
        let c = derived_constants(&p).unwrap();
        let a = conditional_block_generator(&p).unwrap();
        let img = a.block(Atom::E, Atom::G).apply(&matrix_unit(p.d, 1, 1)).unwrap();
        let want = matrix_unit::<f64>(p.d, 0, 0) * re(c.alpha) + matrix_unit::<f64>(p.d, 1, 1) * re(0.1);
        assert!(crate::scalar::max_abs_diff(&img, &want) < 1e-15);
    }

    #[test]
    fn agrees_with_elementary_form_away_from_edge() {
        // Off the top level the product forms equal αK0 ± β exactly.
        let p = params(5);
        let c = derived_constants(&p).unwrap();
        let a = conditional_block_generator(&p).unwrap();
        let k0 = elementary::<f64>(Elementary::K0, p.d).scale_real(c.alpha);
        let gg = -&(&k0 + &c.beta).plus_scalar(re(p.gamma_ge));
        let ee = -&(&k0 - &c.beta).plus_scalar(re(p.gamma_eg));
        for m in 0..4 {
            for n in 0..4 {
                let e = matrix_unit(p.d, m, n);
                let diff = a.blocks[0][0].apply(&e).unwrap() - gg.apply(&e).unwrap();
                assert!(max_abs(&diff) < 1e-15);
                let diff = a.blocks[1][1].apply(&e).unwrap() - ee.apply(&e).unwrap();
                assert!(max_abs(&diff) < 1e-15);
            }
        }
        // The gg product form agrees everywhere, including the top level.
        assert!(a.blocks[0][0].max_abs_diff(&gg) < 1e-15);
    }

    #[test]
    fn liouvillian_matches_block_generator() {
        for d in 1..=6 {
            let p = params(d);
            let a = conditional_block_generator(&p).unwrap();
            let l = secular_liouvillian(&p).unwrap();
            assert!(a.max_abs_diff(&l) < 1e-14, "d = {d}");
        }
    }

    #[test]
    fn liouvillian_examples() {
        let p = params(4).with_gammas(0.0, 1.0);
        let l = secular_liouvillian(&p).unwrap();
        let zero = CMatrix::zeros(4, 4);
        let e00 = matrix_unit(p.d, 0, 0);
        // Excited atom in vacuum: decay plus emission into the mode.
        let alpha = derived_constants(&p).unwrap().alpha;
        let [dg, de] = l.apply([&zero, &e00]).unwrap();
        assert!((de.trace() - re(-1.0 - alpha)).norm() < 1e-15);
        // Only atomic decay remains when the mode has a single level.
        let p1 = p.with_dim(Dimension::new(1).unwrap());
        let one = CMatrix::identity(1, 1);
        let [_, de1] = secular_liouvillian(&p1).unwrap().apply([&CMatrix::zeros(1, 1), &one]).unwrap();
        assert!((de1.trace() - re(-1.0)).norm() < 1e-15);
        assert!((dg.trace() + de.trace()).norm() < 1e-15);

        let rho = mixed_state::<f64>(p.d);
        let [dg, de] = l.apply([rho.matrix(), &zero]).unwrap();
        assert!((dg.trace() + de.trace()).norm() < 1e-15);
        for m in [&dg, &de] {
            for i in 0..4 {
                for j in 0..4 {
                    if i != j {
                        assert_eq!(m[(i, j)].norm(), 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn presecular_examples() {
        let mut p = params(3).with_gammas(0.0, 1.0);
        let rho = fock_state::<f64>(p.d, 0).unwrap();
        let s = AtomFieldState::product(Atom::G, &rho);
        let ds = presecular_rhs(&p, &s).unwrap();
        for m in [&ds.gg, &ds.ge, &ds.eg, &ds.ee] {
            assert_eq!(max_abs(m), 0.0);
        }

        p.omega = cx(0.0, 0.0);
        let mut s = AtomFieldState::product(Atom::E, &mixed_state(p.d));
        s.ge = CMatrix::identity(3, 3);
        s.eg = CMatrix::identity(3, 3);
        let ds = presecular_rhs(&p, &s).unwrap();
        assert!((ds.ge[(0, 0)] - cx(-2.0, -0.5)).norm() < 1e-15);
        assert!((ds.ee.trace() - re(-1.0)).norm() < 1e-15);
        assert!((ds.gg.trace() - re(1.0)).norm() < 1e-15);

        let bad = AtomFieldState::product(Atom::G, &mixed_state(Dimension::new(2).unwrap()));
        assert!(matches!(presecular_rhs(&p, &bad), Err(Error::DimensionMismatch { .. })));
    }

    fn arb_params() -> impl Strategy<Value = ModelParams<f64>> {
        (1usize..=8, -2.0f64..2.0, -2.0f64..2.0, -3.0f64..3.0, 0.1f64..5.0, 0.0f64..2.0, 0.0f64..2.0).prop_map(
            |(d, or, oi, delta, gp, gge, geg)| {
                ModelParams::new(cx(or, oi), delta, gp, gge, geg, Dimension::new(d).unwrap()).unwrap()
            },
        )
    }

    proptest! {
        #[test]
        fn column_trace_sums_vanish(p in arb_params()) {
            let a = conditional_block_generator(&p).unwrap();
            let d = p.d.get();
            for m in 0..d {
                for n in 0..d {
                    let e = matrix_unit(p.d, m, n);
                    for s in 0..2 {
                        let t = a.blocks[0][s].apply(&e).unwrap().trace() + a.blocks[1][s].apply(&e).unwrap().trace();
                        prop_assert!(t.norm() <= 1e-13);
                    }
                }
            }
        }

        #[test]
        fn blocks_preserve_hermiticity(p in arb_params(), seed in proptest::collection::vec(-1.0f64..1.0, 128)) {
            let a = conditional_block_generator(&p).unwrap();
            let d = p.d.get();
            let raw = CMatrix::from_fn(d, d, |i, j| cx(seed[i * 8 + j], seed[64 + i * 8 + j]));
            let x = &raw + raw.adjoint();
            for r in 0..2 {
                for s in 0..2 {
                    let y = a.blocks[r][s].apply(&x).unwrap();
                    prop_assert!(max_abs(&(&y - y.adjoint())) <= 1e-13);
                }
            }
        }

        #[test]
        fn presecular_conserves_trace(p in arb_params(), seed in proptest::collection::vec(-1.0f64..1.0, 256)) {
            let d = p.d.get();
            let m = |k: usize| CMatrix::from_fn(d, d, |i, j| cx(seed[k * 64 + i * 8 + j], seed[((k + 1) % 4) * 64 + j * 8 + i]));
            let s = AtomFieldState { gg: m(0), ge: m(1), eg: m(1).adjoint(), ee: m(3) };
            let ds = presecular_rhs(&p, &s).unwrap();
            prop_assert!(ds.trace().norm() <= 1e-13);
        }
    }
}
