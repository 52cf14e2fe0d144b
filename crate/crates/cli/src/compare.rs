//! Row-by-row deviation between two runs of the same scenario.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use condevo::{derived_constants, Method};

use crate::config::ScenarioConfig;
use crate::error::CliError;
use crate::format::format_g;
use crate::scenario::{compute_scenario, write, Row, Timeseries};

pub const COLUMNS: [&str; 4] = ["P_g", "P_e", "info_gain", "fidelity"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColumnDeviation {
    pub max_abs: f64,
    pub rms: f64,
    /// Rows where both sides are defined.
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationReport {
    pub a: String,
    pub b: String,
    /// κΓ/γ_eg, infinite when γ_eg = 0.
    pub epsilon: f64,
    pub columns: [ColumnDeviation; 4],
}

fn column(r: &Row, k: usize) -> f64 {
    [r.p_g, r.p_e, r.info_gain, r.fidelity][k]
}

fn label(cfg: &ScenarioConfig) -> String {
    match cfg.method {
        Method::Exact => "exact".into(),
        m => format!("{m} order {}", cfg.order),
    }
}

pub fn deviations(a: &Timeseries, b: &Timeseries) -> [ColumnDeviation; 4] {
    std::array::from_fn(|k| {
        let diffs: Vec<f64> = a
            .rows
            .iter()
            .zip(&b.rows)
            .map(|(x, y)| column(x, k) - column(y, k))
            .filter(|d| !d.is_nan())
            .collect();
        let n = diffs.len();
        let max_abs = diffs.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        let rms = if n == 0 { 0.0 } else { (diffs.iter().map(|d| d * d).sum::<f64>() / n as f64).sqrt() };
        ColumnDeviation { max_abs, rms, rows: n }
    })
}

/// Runs both configs and tabulates per-column deviations. Only the solver
/// settings and output locations may differ between the two.
pub fn compare_methods(a: &ScenarioConfig, b: &ScenarioConfig) -> Result<DeviationReport, CliError> {
    if let Some(key) = a.mismatch(b) {
        return Err(CliError::Mismatch(key));
    }
    let p = &a.params;
    let alpha = derived_constants(p).map_err(|source| CliError::Numerical { tau: 0.0, source })?.alpha;
    let epsilon = if p.gamma_eg > 0.0 { alpha / p.gamma_eg } else { f64::INFINITY };
    let (ta, tb) = std::thread::scope(|s| {
        let ha = s.spawn(|| compute_scenario(a));
        let tb = compute_scenario(b);
        (ha.join().expect("comparison worker panicked"), tb)
    });
    let (ta, tb) = (ta?.timeseries, tb?.timeseries);
    Ok(DeviationReport { a: label(a), b: label(b), epsilon, columns: deviations(&ta, &tb) })
}

impl DeviationReport {
    pub fn to_csv(&self, cfg: &ScenarioConfig) -> String {
        let p = &cfg.params;
        let mut s = String::new();
        writeln!(s, "# a = {}", self.a).unwrap();
        writeln!(s, "# b = {}", self.b).unwrap();
        writeln!(s, "# epsilon = {}", format_g(self.epsilon)).unwrap();
        writeln!(s, "# gamma_ge = {}", format_g(p.gamma_ge)).unwrap();
        writeln!(s, "# gamma_eg = {}", format_g(p.gamma_eg)).unwrap();
        writeln!(s, "# tau_max = {}", format_g(cfg.tau_max)).unwrap();
        s.push_str("column,max_abs,rms,rows\n");
        for (name, c) in COLUMNS.iter().zip(&self.columns) {
            writeln!(s, "{name},{},{},{}", format_g(c.max_abs), format_g(c.rms), c.rows).unwrap();
        }
        s
    }
}

pub fn compare_path(prefix: &Path) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push("_compare.csv");
    PathBuf::from(s)
}

/// Writes the report next to `a`'s output prefix.
pub fn run_compare(a: &ScenarioConfig, b: &ScenarioConfig) -> Result<(DeviationReport, PathBuf), CliError> {
    let report = compare_methods(a, b)?;
    let path = write(compare_path(&a.out_prefix), report.to_csv(a).as_bytes())?;
    Ok((report, path))
}
