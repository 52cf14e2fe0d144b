use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid {key}: {msg}")]
    Invalid { key: String, msg: String },

    #[error("configs differ in {0}; only method, order, quad_steps, snapshots and out_prefix may differ")]
    Mismatch(&'static str),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("at tau_omega = {tau}: {source}")]
    Numerical { tau: f64, source: condevo::Error },
}

impl CliError {
    /// 1 for anything wrong with the inputs or the filesystem, 2 for
    /// failures inside the numerics.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical { .. } => 2,
            _ => 1,
        }
    }
}
