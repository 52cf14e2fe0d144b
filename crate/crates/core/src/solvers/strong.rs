//! Strong-relaxation perturbation theory.
//!
//! The zero-order generator keeps only the downward decay, `A0 = γ_eg·[[0, 1],
//! [0, −1]]`, whose propagator `G0` is scalar. The first-order correction is
//! the variation-of-parameters integral `∫₀ᵗ G0(t−s) (A − A0) G0(s) ds`, and
//! since every entry of `G0` is a sum of scalar exponentials the integral
//! reduces to divided differences of `exp`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::generator::{conditional_block_generator, derived_constants, Atom, ModelParams};
use crate::scalar::{exp_divided_difference, re, Real};
use crate::superop::Superoperator;

use super::{check_order, check_time, ConditionalPropagators, Method};

/// `γ_ge < κΓ < γ_eg`.
pub fn strong_regime_valid<T: Real>(p: &ModelParams<T>) -> Result<bool> {
    let alpha = derived_constants(p)?.alpha;
    Ok(p.gamma_ge < alpha && alpha < p.gamma_eg)
}

/// One term `c·e^{λt}` of a scalar propagator entry.
type Term<T> = (T, T);

/// Entries of `G0(t)` as sums of exponentials, `[to][from]`.
fn zero_order_terms<T: Real>(gamma: T) -> [[Vec<Term<T>>; 2]; 2] {
    let one = T::one();
    [
        [vec![(one, T::zero())], vec![(one, T::zero()), (-one, -gamma)]],
        [vec![], vec![(one, -gamma)]],
    ]
}

fn eval_terms<T: Real>(terms: &[Term<T>], t: T) -> T {
    terms.iter().fold(T::zero(), |acc, &(c, l)| acc + c * (l * t).exp())
}

/// `∫₀ᵗ f(t−s) g(s) ds` for two sums of exponentials.
fn convolve<T: Real>(f: &[Term<T>], g: &[Term<T>], t: T) -> Complex<T> {
    let mut acc = Complex::default();
    for &(c1, l1) in f {
        for &(c2, l2) in g {
            acc += exp_divided_difference(re(l1), re(l2), t) * re(c1 * c2);
        }
    }
    acc
}

pub fn strong_perturbative<T: Real>(
    p: &ModelParams<T>,
    prepared: Atom,
    t: T,
    order: u8,
) -> Result<ConditionalPropagators<T>> {
    check_time(t)?;
    check_order(order)?;
    if p.gamma_eg <= T::zero() {
        return Err(Error::ZeroGammaEg);
    }
    let valid = strong_regime_valid(p)?;
    let d = p.d;
    let g0 = zero_order_terms(p.gamma_eg);
    let i = prepared.index();

    let mut out = [Superoperator::zeros(d), Superoperator::zeros(d)];
    for (r, slot) in out.iter_mut().enumerate() {
        *slot = Superoperator::scalar(d, re(eval_terms(&g0[r][i], t)));
    }

    if order == 1 {
        let mut a1 = conditional_block_generator(p)?.blocks;
        a1[0][1] = a1[0][1].plus_scalar(re(-p.gamma_eg));
        a1[1][1] = a1[1][1].plus_scalar(re(p.gamma_eg));
        for (r, slot) in out.iter_mut().enumerate() {
            for (a, row) in a1.iter().enumerate() {
                for (b, block) in row.iter().enumerate() {
                    let w = convolve(&g0[r][a], &g0[b][i], t);
                    if w != Complex::default() {
                        *slot = &*slot + &block.scale(w);
                    }
                }
            }
        }
    }

    let [m_g, m_e] = out;
    Ok(ConditionalPropagators { prepared, t, m_g, m_e, method: Method::Strong, order, valid })
}
