//! Flat `key = value` scenario files.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use condevo::{Atom, Dimension, Method, Params, C64};

use crate::error::CliError;

/// Initial field state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Initial {
    Mixed,
    Fock(usize),
}

impl fmt::Display for Initial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Initial::Mixed => f.write_str("mixed"),
            Initial::Fock(n) => write!(f, "fock:{n}"),
        }
    }
}

impl FromStr for Initial {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "mixed" {
            return Ok(Initial::Mixed);
        }
        match s.strip_prefix("fock:") {
            Some(n) => n.trim().parse().map(Initial::Fock).map_err(|_| format!("bad Fock index {n:?}")),
            None => Err(format!("expected mixed or fock:n, got {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub params: Params,
    pub prepared: Atom,
    pub detected: Atom,
    pub initial: Initial,
    pub method: Method,
    pub order: u8,
    /// End of the grid in units of Ωτ.
    pub tau_max: f64,
    pub steps: usize,
    pub quad_steps: usize,
    /// Ωτ values at which the conditional state is dumped.
    pub snapshots: Vec<f64>,
    pub out_prefix: PathBuf,
}

pub const DEFAULT_OUT_PREFIX: &str = "scenario";

const KEYS: &[&str] = &[
    "omega",
    "omega_im",
    "delta",
    "gamma_phase",
    "gamma_ge",
    "gamma_eg",
    "d",
    "prepared",
    "detected",
    "initial",
    "method",
    "order",
    "tau_max",
    "steps",
    "quad_steps",
    "snapshots",
    "out_prefix",
];

fn invalid(key: &str, msg: impl Into<String>) -> CliError {
    CliError::Invalid { key: key.to_string(), msg: msg.into() }
}

struct Entries(HashMap<&'static str, String>);

impl Entries {
    fn raw(&self, key: &'static str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn get<V: FromStr>(&self, key: &'static str) -> Result<Option<V>, CliError>
    where
        V::Err: fmt::Display,
    {
        self.raw(key).map(|v| v.parse::<V>().map_err(|e| invalid(key, format!("{v:?}: {e}")))).transpose()
    }

    fn required<V: FromStr>(&self, key: &'static str) -> Result<V, CliError>
    where
        V::Err: fmt::Display,
    {
        self.get(key)?.ok_or_else(|| invalid(key, "missing"))
    }
}

fn finite(key: &str, x: f64) -> Result<f64, CliError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(invalid(key, "must be finite"))
    }
}

/// Parses and validates a scenario document.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, CliError> {
    let mut seen = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            return Err(CliError::Parse { line: line_no, msg: format!("expected key = value, got {body:?}") });
        };
        let (key, value) = (key.trim(), value.trim());
        let Some(&known) = KEYS.iter().find(|&&k| k == key) else {
            return Err(CliError::Parse { line: line_no, msg: format!("unknown key {key:?}") });
        };
        if value.is_empty() {
            return Err(CliError::Parse { line: line_no, msg: format!("empty value for {key}") });
        }
        if seen.insert(known, value.to_string()).is_some() {
            return Err(CliError::Parse { line: line_no, msg: format!("duplicate key {key}") });
        }
    }
    build(&Entries(seen))
}

fn build(e: &Entries) -> Result<ScenarioConfig, CliError> {
    let omega = C64::new(finite("omega", e.required("omega")?)?, finite("omega_im", e.get("omega_im")?.unwrap_or(0.0))?);
    if omega.norm() == 0.0 {
        return Err(invalid("omega", "coupling must be nonzero (time axis is Ωτ)"));
    }
    let delta = finite("delta", e.required("delta")?)?;
    let gamma_phase: f64 = e.required("gamma_phase")?;
    if gamma_phase == 0.0 && delta == 0.0 {
        return Err(invalid("gamma_phase", "Γ and Δ cannot both vanish"));
    }
    let d: usize = e.required("d")?;
    let dim = Dimension::new(d).map_err(|err| invalid("d", err.to_string()))?;
    let params = Params {
        omega,
        delta,
        gamma_phase,
        gamma_ge: e.required("gamma_ge")?,
        gamma_eg: e.required("gamma_eg")?,
        d: dim,
    };
    if let Err(condevo::Error::InvalidParams { name, reason }) = params.validate() {
        return Err(invalid(name, reason));
    }

    let initial: Initial = e.required("initial")?;
    if let Initial::Fock(n) = initial {
        if n >= d {
            return Err(invalid("initial", format!("fock:{n} needs d > {n}, got d = {d}")));
        }
    }

    let order: u8 = e.get("order")?.unwrap_or(1);
    if order > 1 {
        return Err(invalid("order", "must be 0 or 1"));
    }

    let tau_max = finite("tau_max", e.required("tau_max")?)?;
    if tau_max <= 0.0 {
        return Err(invalid("tau_max", "must be positive"));
    }
    let steps: usize = e.required("steps")?;
    if steps < 2 {
        return Err(invalid("steps", "must be at least 2"));
    }
    let quad_steps: usize = e.get("quad_steps")?.unwrap_or(64);
    if quad_steps < 8 || !quad_steps.is_multiple_of(2) {
        return Err(invalid("quad_steps", "must be even and at least 8"));
    }

    let snapshots = match e.raw("snapshots") {
        None => Vec::new(),
        Some(list) => list
            .split(',')
            .map(|s| {
                let tau: f64 = s.trim().parse().map_err(|_| invalid("snapshots", format!("bad value {s:?}")))?;
                if !(0.0..=tau_max).contains(&tau) {
                    return Err(invalid("snapshots", format!("{tau} lies outside [0, tau_max]")));
                }
                Ok(tau)
            })
            .collect::<Result<_, _>>()?,
    };

    Ok(ScenarioConfig {
        params,
        prepared: e.get("prepared")?.unwrap_or(Atom::G),
        detected: e.get("detected")?.unwrap_or(Atom::G),
        initial,
        method: e.required("method")?,
        order,
        tau_max,
        steps,
        quad_steps,
        snapshots,
        out_prefix: e.get("out_prefix")?.unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_PREFIX)),
    })
}

impl ScenarioConfig {
    /// Canonical document with every default spelled out; parses back to
    /// the same config.
    pub fn to_document(&self) -> String {
        let p = &self.params;
        let mut s = String::new();
        let mut kv = |k: &str, v: &dyn fmt::Display| writeln!(s, "{k} = {v}").unwrap();
        kv("omega", &p.omega.re);
        kv("omega_im", &p.omega.im);
        kv("delta", &p.delta);
        kv("gamma_phase", &p.gamma_phase);
        kv("gamma_ge", &p.gamma_ge);
        kv("gamma_eg", &p.gamma_eg);
        kv("d", &p.d.get());
        kv("prepared", &self.prepared);
        kv("detected", &self.detected);
        kv("initial", &self.initial);
        kv("method", &self.method);
        kv("order", &self.order);
        kv("tau_max", &self.tau_max);
        kv("steps", &self.steps);
        kv("quad_steps", &self.quad_steps);
        if !self.snapshots.is_empty() {
            let list: Vec<String> = self.snapshots.iter().map(f64::to_string).collect();
            kv("snapshots", &list.join(", "));
        }
        kv("out_prefix", &self.out_prefix.display());
        s
    }

    /// Fields that must agree for two runs to be comparable row by row.
    pub(crate) fn mismatch(&self, other: &Self) -> Option<&'static str> {
        let (a, b) = (&self.params, &other.params);
        [
            ("omega", a.omega == b.omega),
            ("delta", a.delta == b.delta),
            ("gamma_phase", a.gamma_phase == b.gamma_phase),
            ("gamma_ge", a.gamma_ge == b.gamma_ge),
            ("gamma_eg", a.gamma_eg == b.gamma_eg),
            ("d", a.d == b.d),
            ("prepared", self.prepared == other.prepared),
            ("detected", self.detected == other.detected),
            ("initial", self.initial == other.initial),
            ("tau_max", self.tau_max == other.tau_max),
            ("steps", self.steps == other.steps),
        ]
        .into_iter()
        .find(|(_, same)| !same)
        .map(|(k, _)| k)
    }
}
