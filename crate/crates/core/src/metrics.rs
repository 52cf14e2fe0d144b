//! Information characteristics of the photodetection readout.

use crate::error::{Error, Result};
use crate::fock::{hermitian_eigensystem, FieldDensityMatrix};
use crate::generator::{Atom, ModelParams};
use crate::scalar::{rabs, re, CMatrix, Real};
use crate::solvers::{
    exact_conditional, strong_perturbative, weak_first_order, weak_zero_order,
    ConditionalPropagators, Method,
};
use crate::superop::Superoperator;

const IMAG_TOL: f64 = 1e-9;
const PROB_TOL: f64 = 1e-6;
const BRANCH_TOL: f64 = 1e-12;
const CLAMP_TOL: f64 = 1e-8;
const ENTROPY_FLOOR: f64 = 1e-14;

/// `Re Tr[M ρ]`, clamped into `[0, 1]` once checked.
pub fn detection_probability<T: Real>(m: &Superoperator<T>, rho: &FieldDensityMatrix<T>) -> Result<T> {
    let tr = m.apply(rho.matrix())?.trace();
    if rabs(tr.im) > T::tol(IMAG_TOL) {
        return Err(Error::NonPhysicalProbability(tr.re.as_f64()));
    }
    let p = tr.re;
    let slack = T::tol(PROB_TOL);
    if !(p >= -slack && p <= T::one() + slack) {
        return Err(Error::NonPhysicalProbability(p.as_f64()));
    }
    Ok(p.max(T::zero()).min(T::one()))
}

/// `M ρ / Tr[M ρ]`, symmetrized, with small negative eigenvalues removed.
pub fn conditional_state<T: Real>(
    m: &Superoperator<T>,
    rho: &FieldDensityMatrix<T>,
) -> Result<FieldDensityMatrix<T>> {
    let raw = m.apply(rho.matrix())?;
    let tr = raw.trace().re;
    if tr.partial_cmp(&T::tol(BRANCH_TOL)) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::ZeroProbabilityBranch(tr.as_f64()));
    }
    let scaled = &raw * re(T::one() / tr);
    let sym = (&scaled + scaled.adjoint()) * re(T::lit(0.5));
    project_to_density(&sym)
}

/// Clamps eigenvalues in `[−1e−8, 0)` to zero and renormalizes; anything
/// more negative is rejected.
pub(crate) fn project_to_density<T: Real>(sym: &CMatrix<T>) -> Result<FieldDensityMatrix<T>> {
    let eig = hermitian_eigensystem(sym)?;
    let min = eig.values[0];
    if min < -T::tol(CLAMP_TOL) {
        return Err(Error::NonPhysicalState(min.as_f64()));
    }
    if min >= T::zero() {
        return Ok(FieldDensityMatrix::from_trusted(sym.clone()));
    }
    let total = eig.values.iter().fold(T::zero(), |a, &v| a + v.max(T::zero()));
    let fixed = eig.map(|v| v.max(T::zero()) / total);
    Ok(FieldDensityMatrix::from_trusted((&fixed + fixed.adjoint()) * re(T::lit(0.5))))
}

/// Von Neumann entropy in nats.
pub fn von_neumann_entropy<T: Real>(rho: &FieldDensityMatrix<T>) -> Result<T> {
    let eig = hermitian_eigensystem(rho.matrix())?;
    let floor = T::tol(ENTROPY_FLOOR);
    Ok(eig
        .values
        .iter()
        .filter(|&&v| v > floor)
        .fold(T::zero(), |acc, &v| acc - v * v.ln()))
}

/// `S(ρ_before) − S(ρ_after)`.
pub fn information_gain<T: Real>(
    before: &FieldDensityMatrix<T>,
    after: &FieldDensityMatrix<T>,
) -> Result<T> {
    Ok(von_neumann_entropy(before)? - von_neumann_entropy(after)?)
}

/// Uhlmann fidelity `Tr √(√ρ σ √ρ)`.
pub fn uhlmann_fidelity<T: Real>(rho: &FieldDensityMatrix<T>, sigma: &FieldDensityMatrix<T>) -> Result<T> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim().get(), found: sigma.dim().get() });
    }
    let root = hermitian_eigensystem(rho.matrix())?.map(|v| v.max(T::zero()).sqrt());
    let inner = &root * sigma.matrix() * &root;
    let inner = (&inner + inner.adjoint()) * re(T::lit(0.5));
    let f = hermitian_eigensystem(&inner)?
        .values
        .iter()
        .fold(T::zero(), |acc, &v| acc + v.max(T::zero()).sqrt());
    Ok(f.max(T::zero()).min(T::one()))
}

/// Outcome statistics of one (prepared, detected) pair at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord<T: Real> {
    pub prepared: Atom,
    pub detected: Atom,
    pub t: T,
    pub probability: T,
    /// Nats.
    pub info_gain: T,
    pub fidelity: T,
    pub conditional_state: FieldDensityMatrix<T>,
    /// Regime-of-validity flag of the solver that produced the transformer.
    pub valid: bool,
}

/// Metrics of an already computed transformer pair.
pub fn record_from<T: Real>(
    props: &ConditionalPropagators<T>,
    detected: Atom,
    rho0: &FieldDensityMatrix<T>,
) -> Result<MeasurementRecord<T>> {
    let m = props.detected(detected);
    let probability = detection_probability(m, rho0)?;
    let conditional = conditional_state(m, rho0)?;
    Ok(MeasurementRecord {
        prepared: props.prepared,
        detected,
        t: props.t,
        probability,
        info_gain: information_gain(rho0, &conditional)?,
        fidelity: uhlmann_fidelity(rho0, &conditional)?,
        conditional_state: conditional,
        valid: props.valid,
    })
}

/// Transformer pair from the chosen solver. `order` and `quad_steps` are
/// ignored by the exact method.
pub fn propagators<T: Real>(
    p: &ModelParams<T>,
    prepared: Atom,
    t: T,
    method: Method,
    order: u8,
    quad_steps: usize,
) -> Result<ConditionalPropagators<T>> {
    match (method, order) {
        (Method::Exact, _) => exact_conditional(p, prepared, t),
        (Method::Strong, o) => strong_perturbative(p, prepared, t, o),
        (Method::Weak, 0) => weak_zero_order(p, prepared, t),
        (Method::Weak, 1) => weak_first_order(p, prepared, t, quad_steps),
        (Method::Weak, o) => Err(Error::InvalidParams { name: "order", reason: format!("{o} is not 0 or 1") }),
    }
}

#[allow(clippy::too_many_arguments)]
pub fn measure<T: Real>(
    p: &ModelParams<T>,
    prepared: Atom,
    detected: Atom,
    rho0: &FieldDensityMatrix<T>,
    t: T,
    method: Method,
    order: u8,
    quad_steps: usize,
) -> Result<MeasurementRecord<T>> {
    if rho0.dim() != p.d {
        return Err(Error::DimensionMismatch { expected: p.d.get(), found: rho0.dim().get() });
    }
    let props = propagators(p, prepared, t, method, order, quad_steps)?;
    record_from(&props, detected, rho0)
}
