//! One scenario repeated over truncations or initial Fock states.

use std::path::PathBuf;

use condevo::Dimension;

use crate::config::{Initial, ScenarioConfig};
use crate::error::CliError;
use crate::scenario::run_scenario;

pub const SWEEP_DIMS: [usize; 3] = [2, 4, 6];
pub const SWEEP_FOCK: [usize; 3] = [1, 3, 5];

/// Mixed states sweep `d`; Fock states sweep `n` with `d` raised to at
/// least `n + 1`. Each cell writes under `{prefix}_d{d}` or `{prefix}_n{n}`.
pub fn sweep_cells(cfg: &ScenarioConfig) -> Vec<ScenarioConfig> {
    let cell = |d: usize, initial: Initial, tag: String| {
        let mut c = cfg.clone();
        c.params.d = Dimension::new(d).expect("sweep dimensions are positive");
        c.initial = initial;
        let mut prefix = cfg.out_prefix.as_os_str().to_owned();
        prefix.push(tag);
        c.out_prefix = PathBuf::from(prefix);
        c
    };
    match cfg.initial {
        Initial::Mixed => SWEEP_DIMS.iter().map(|&d| cell(d, Initial::Mixed, format!("_d{d}"))).collect(),
        Initial::Fock(_) => SWEEP_FOCK
            .iter()
            .map(|&n| cell(cfg.params.d.get().max(n + 1), Initial::Fock(n), format!("_n{n}")))
            .collect(),
    }
}

/// Runs every cell on its own thread. Cells share nothing, so the first
/// failure in cell order is reported.
pub fn run_sweep(cfg: &ScenarioConfig) -> Result<Vec<PathBuf>, CliError> {
    let cells = sweep_cells(cfg);
    let results: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = cells.iter().map(|c| s.spawn(|| run_scenario(c))).collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    });
    let mut written = Vec::new();
    for r in results {
        written.extend(r?);
    }
    Ok(written)
}
