use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::generator::{AtomFieldState, ModelParams, PresecularOps};
use crate::scalar::{cnorm, Real};

const TRACE_DRIFT_BUDGET: f64 = 1e-8;

/// Largest RK4 step, `min(0.01/Γ, 0.01/|Ω|)`; `None` if both rates vanish.
pub fn max_presecular_step<T: Real>(p: &ModelParams<T>) -> Option<T> {
    let c = T::lit(0.01);
    [p.gamma_phase, p.omega_abs()]
        .into_iter()
        .filter(|&r| r > T::zero())
        .map(|r| c / r)
        .reduce(|a, b| a.min(b))
}

/// Classic fixed-step RK4 for the rotating-frame atom-field equations,
/// sampled on `grid`.
///
/// Every grid interval is split into the fewest equal steps that respect
/// [`max_presecular_step`].
pub fn integrate_presecular<T: Real>(
    p: &ModelParams<T>,
    s0: &AtomFieldState<T>,
    grid: &[T],
) -> Result<Vec<AtomFieldState<T>>> {
    p.validate()?;
    let increasing = grid.windows(2).all(|w| w[1].partial_cmp(&w[0]) == Some(Ordering::Greater));
    if grid.first() != Some(&T::zero()) || !increasing {
        return Err(Error::InvalidGrid);
    }
    let d = p.d.get();
    for m in [&s0.gg, &s0.ge, &s0.eg, &s0.ee] {
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: m.nrows() });
        }
    }
    let ops = PresecularOps::new(p);
    let hmax = max_presecular_step(p);
    let half = T::lit(0.5);
    let sixth = T::one() / T::lit(6.0);
    let trace0 = s0.trace();

    let mut out = Vec::with_capacity(grid.len());
    let mut state = s0.clone();
    out.push(state.clone());
    for w in grid.windows(2) {
        let span = w[1] - w[0];
        let steps = hmax.map_or(1, |h| (span / h).ceil().as_f64().max(1.0) as usize);
        let h = span / T::lit(steps as f64);
        for _ in 0..steps {
            let k1 = ops.rhs(&state);
            let k2 = ops.rhs(&state.axpy(h * half, &k1));
            let k3 = ops.rhs(&state.axpy(h * half, &k2));
            let k4 = ops.rhs(&state.axpy(h, &k3));
            let incr = k1.axpy(T::lit(2.0), &k2).axpy(T::lit(2.0), &k3).axpy(T::one(), &k4);
            state = state.axpy(h * sixth, &incr);
        }
        let drift = cnorm(state.trace() - trace0);
        if drift > T::tol(TRACE_DRIFT_BUDGET) {
            return Err(Error::StepTooLarge(drift.as_f64()));
        }
        out.push(state.clone());
    }
    Ok(out)
}
