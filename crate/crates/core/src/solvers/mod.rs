//! Conditional transformers `𝔐_{r,i}(t)`: for an atom prepared in `i`, the
//! pair `(M_g, M_e)` maps the initial field state to the unnormalized field
//! state found together with detection outcome `g` or `e`.

mod exact;
mod presecular;
mod strong;
mod weak;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use exact::{exact_conditional, ExactSolver};
pub use presecular::{integrate_presecular, max_presecular_step};
pub use strong::{strong_perturbative, strong_regime_valid};
pub use weak::{
    characteristic_roots, weak_first_order, weak_first_order_with_tolerance, weak_regime_valid,
    weak_zero_order, CharacteristicRootData, QUAD_PANEL_CAP,
};

use crate::error::{Error, Result};
use crate::fock::Dimension;
use crate::generator::{Atom, ModelParams};
use crate::scalar::Real;
use crate::superop::{Superoperator, SuperoperatorJson};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Strong,
    Weak,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Exact => "exact",
            Method::Strong => "strong",
            Method::Weak => "weak",
        })
    }
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "exact" => Ok(Method::Exact),
            "strong" => Ok(Method::Strong),
            "weak" => Ok(Method::Weak),
            other => Err(format!("expected exact, strong or weak, got {other:?}")),
        }
    }
}

/// The transformer pair for one preparation at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalPropagators<T: Real> {
    pub prepared: Atom,
    pub t: T,
    pub m_g: Superoperator<T>,
    pub m_e: Superoperator<T>,
    pub method: Method,
    /// Perturbation order; zero for the exact solver.
    pub order: u8,
    /// Whether the parameters lie inside the method's regime of validity.
    /// Always true for the exact solver.
    pub valid: bool,
}

impl<T: Real> ConditionalPropagators<T> {
    /// Transformer for the given detection outcome.
    pub fn detected(&self, r: Atom) -> &Superoperator<T> {
        match r {
            Atom::G => &self.m_g,
            Atom::E => &self.m_e,
        }
    }

    /// `(identity, zero)` or `(zero, identity)` for the preparation.
    pub(crate) fn initial(d: Dimension, prepared: Atom, method: Method, order: u8, valid: bool) -> Self {
        let (m_g, m_e) = match prepared {
            Atom::G => (Superoperator::identity(d), Superoperator::zeros(d)),
            Atom::E => (Superoperator::zeros(d), Superoperator::identity(d)),
        };
        Self { prepared, t: T::zero(), m_g, m_e, method, order, valid }
    }

    /// Largest entry-wise deviation of either transformer.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.m_g.max_abs_diff(&other.m_g).max(self.m_e.max_abs_diff(&other.m_e))
    }

    pub fn to_json(&self, params: &ModelParams<T>) -> PropagatorJson {
        PropagatorJson {
            method: self.method,
            order: self.order,
            t: self.t.as_f64(),
            prepared: self.prepared.to_string(),
            valid: self.valid,
            params: ParamsJson::from(params),
            m_g: self.m_g.to_json(),
            m_e: self.m_e.to_json(),
        }
    }
}

/// Parameter record attached to exported propagators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsJson {
    pub omega: [f64; 2],
    pub delta: f64,
    pub gamma_phase: f64,
    pub gamma_ge: f64,
    pub gamma_eg: f64,
    pub d: usize,
}

impl<T: Real> From<&ModelParams<T>> for ParamsJson {
    fn from(p: &ModelParams<T>) -> Self {
        Self {
            omega: [p.omega.re.as_f64(), p.omega.im.as_f64()],
            delta: p.delta.as_f64(),
            gamma_phase: p.gamma_phase.as_f64(),
            gamma_ge: p.gamma_ge.as_f64(),
            gamma_eg: p.gamma_eg.as_f64(),
            d: p.d.get(),
        }
    }
}

/// Serialized propagator pair, tagged for use as a regression golden.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagatorJson {
    pub method: Method,
    pub order: u8,
    pub t: f64,
    pub prepared: String,
    pub valid: bool,
    pub params: ParamsJson,
    pub m_g: SuperoperatorJson,
    pub m_e: SuperoperatorJson,
}

pub(crate) fn check_time<T: Real>(t: T) -> Result<()> {
    if t.partial_cmp(&T::zero()).is_none_or(|o| o == Ordering::Less) {
        return Err(Error::NegativeTime(t.as_f64()));
    }
    Ok(())
}

pub(crate) fn check_order(order: u8) -> Result<()> {
    if order > 1 {
        return Err(Error::InvalidParams { name: "order", reason: format!("{order} is not 0 or 1") });
    }
    Ok(())
}
