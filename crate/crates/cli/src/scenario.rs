//! Time-grid evaluation of one scenario and its on-disk artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use condevo::metrics::propagators;
use condevo::{
    conditional_state, detection_probability, fock_state, hermitian_eigensystem, information_gain, mixed_state,
    uhlmann_fidelity, Atom, CMatrix64, Density, Error, ExactSolver, Method, Propagators, C64,
};

use crate::config::{Initial, ScenarioConfig};
use crate::error::CliError;
use crate::format::format_g;

pub const CSV_HEADER: &str = "tau_omega,P_g,P_e,info_gain,fidelity,validity";

/// Probabilities at or below this leave the detected branch undefined.
const BRANCH_TOL: f64 = 1e-12;
const PROB_SLACK: f64 = 1e-6;
const IMAG_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Row {
    pub tau_omega: f64,
    pub p_g: f64,
    pub p_e: f64,
    /// NaN when the detected branch has vanishing probability.
    pub info_gain: f64,
    pub fidelity: f64,
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Timeseries {
    pub rows: Vec<Row>,
}

impl Timeseries {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let fields = [r.tau_omega, r.p_g, r.p_e, r.info_gain, r.fidelity].map(format_g);
            out.push_str(&fields.join(","));
            out.push_str(if r.valid { ",1\n" } else { ",0\n" });
        }
        out
    }
}

/// Conditional field state at one Ωτ, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub d: usize,
    pub tau_omega: f64,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl Snapshot {
    fn new(tau_omega: f64, rho: &CMatrix64) -> Self {
        let d = rho.nrows();
        // +0.0 folds negative zeros so the text does not depend on their sign
        let part = |f: fn(&C64) -> f64| (0..d).map(|i| (0..d).map(|j| f(&rho[(i, j)]) + 0.0).collect()).collect();
        Snapshot { d, tau_omega, re: part(|z| z.re), im: part(|z| z.im) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutput {
    pub timeseries: Timeseries,
    pub snapshots: Vec<Snapshot>,
}

pub fn initial_state(cfg: &ScenarioConfig) -> Density {
    match cfg.initial {
        Initial::Mixed => mixed_state(cfg.params.d),
        Initial::Fock(n) => fock_state(cfg.params.d, n).expect("fock index validated with the config"),
    }
}

/// Uniform grid `tau_max·i/steps`, `i = 0..=steps`.
pub fn tau_grid(cfg: &ScenarioConfig) -> Vec<f64> {
    (0..=cfg.steps).map(|i| cfg.tau_max * i as f64 / cfg.steps as f64).collect()
}

enum Engine {
    Exact(Box<ExactSolver<f64>>),
    Perturbative,
}

struct Evaluator<'a> {
    cfg: &'a ScenarioConfig,
    rho0: Density,
    engine: Engine,
}

struct Point {
    row: Row,
    state: Option<Density>,
}

impl<'a> Evaluator<'a> {
    fn new(cfg: &'a ScenarioConfig) -> Result<Self, CliError> {
        let engine = match cfg.method {
            Method::Exact => Engine::Exact(Box::new(
                ExactSolver::new(&cfg.params).map_err(|source| CliError::Numerical { tau: 0.0, source })?,
            )),
            _ => Engine::Perturbative,
        };
        Ok(Evaluator { cfg, rho0: initial_state(cfg), engine })
    }

    fn transformers(&self, t: f64) -> condevo::Result<Propagators> {
        let c = self.cfg;
        match &self.engine {
            Engine::Exact(solver) => solver.propagate(c.prepared, t),
            Engine::Perturbative => propagators(&c.params, c.prepared, t, c.method, c.order, c.quad_steps),
        }
    }

    fn at(&self, tau: f64) -> Result<Point, CliError> {
        self.point(tau).map_err(|source| CliError::Numerical { tau, source })
    }

    /// The exact solver is held to the library's physicality checks. The
    /// perturbative transformers are only approximately trace preserving and
    /// positive, so their outputs are clamped or projected and the row is
    /// marked invalid instead.
    fn point(&self, tau: f64) -> condevo::Result<Point> {
        let props = self.transformers(tau / self.cfg.params.omega_abs())?;
        let strict = matches!(self.engine, Engine::Exact(_));
        let mut physical = props.valid;

        let mut prob = |r: Atom| -> condevo::Result<f64> {
            let m = props.detected(r);
            if strict {
                return detection_probability(m, &self.rho0);
            }
            let tr = m.apply(self.rho0.matrix())?.trace();
            if tr.im.abs() > IMAG_TOL || !(-PROB_SLACK..=1.0 + PROB_SLACK).contains(&tr.re) {
                physical = false;
            }
            Ok(tr.re.clamp(0.0, 1.0))
        };
        let (p_g, p_e) = (prob(Atom::G)?, prob(Atom::E)?);

        let branch = props.detected(self.cfg.detected);
        let raw = branch.apply(self.rho0.matrix())?.trace().re;
        let state = if raw <= BRANCH_TOL {
            None
        } else if strict {
            Some(conditional_state(branch, &self.rho0)?)
        } else {
            match conditional_state(branch, &self.rho0) {
                Ok(s) => Some(s),
                Err(Error::NonPhysicalState(_)) => {
                    physical = false;
                    Some(project_loose(&branch.apply(self.rho0.matrix())?)?)
                }
                Err(e) => return Err(e),
            }
        };
        let (info_gain, fidelity) = match &state {
            Some(s) => (information_gain(&self.rho0, s)?, uhlmann_fidelity(&self.rho0, s)?),
            None => (f64::NAN, f64::NAN),
        };
        Ok(Point { row: Row { tau_omega: tau, p_g, p_e, info_gain, fidelity, valid: physical }, state })
    }
}

/// Nearest density matrix by eigenvalue clipping, with no tolerance on how
/// negative the discarded part was.
fn project_loose(raw: &CMatrix64) -> condevo::Result<Density> {
    let sym = (raw + raw.adjoint()) * C64::new(0.5, 0.0);
    let clipped = hermitian_eigensystem(&sym)?.map(|v| v.max(0.0));
    let total = clipped.trace().re;
    if total <= BRANCH_TOL {
        return Err(Error::ZeroProbabilityBranch(total));
    }
    let rho = &clipped * C64::new(1.0 / total, 0.0);
    Density::new((&rho + rho.adjoint()) * C64::new(0.5, 0.0))
}

/// Evaluates the grid and the requested snapshots without touching disk.
pub fn compute_scenario(cfg: &ScenarioConfig) -> Result<ScenarioOutput, CliError> {
    let eval = Evaluator::new(cfg)?;
    let rows = tau_grid(cfg).into_iter().map(|tau| eval.at(tau).map(|p| p.row)).collect::<Result<_, _>>()?;
    let snapshots = cfg
        .snapshots
        .iter()
        .map(|&tau| {
            let state = eval.at(tau)?.state.ok_or(CliError::Numerical {
                tau,
                source: Error::ZeroProbabilityBranch(0.0),
            })?;
            Ok(Snapshot::new(tau, state.matrix()))
        })
        .collect::<Result<_, CliError>>()?;
    Ok(ScenarioOutput { timeseries: Timeseries { rows }, snapshots })
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn csv_path(prefix: &Path) -> PathBuf {
    with_suffix(prefix, ".csv")
}

pub fn config_echo_path(prefix: &Path) -> PathBuf {
    with_suffix(prefix, ".cfg")
}

pub fn snapshot_path(prefix: &Path, tau: f64) -> PathBuf {
    with_suffix(prefix, &format!("_snap_{}.json", format_g(tau)))
}

pub(crate) fn write(path: PathBuf, contents: &[u8]) -> Result<PathBuf, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    }
    fs::write(&path, contents).map_err(|source| CliError::Io { path: path.clone(), source })?;
    Ok(path)
}

/// Runs the scenario and writes `{prefix}.csv`, `{prefix}.cfg` and one
/// `{prefix}_snap_{tau}.json` per snapshot. Returns the written paths.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Vec<PathBuf>, CliError> {
    let out = compute_scenario(cfg)?;
    let prefix = &cfg.out_prefix;
    let mut written = vec![
        write(csv_path(prefix), out.timeseries.to_csv().as_bytes())?,
        write(config_echo_path(prefix), cfg.to_document().as_bytes())?,
    ];
    for snap in &out.snapshots {
        let json = serde_json::to_string(snap).expect("snapshot serializes");
        written.push(write(snapshot_path(prefix, snap.tau_omega), json.as_bytes())?);
    }
    Ok(written)
}
