//! Experiment runner for the Gaussian-state learning pipeline.

pub mod commands;
pub mod config;
pub mod output;

use qcis_core::estimator::EstimatorConfig;
use qcis_core::gaussian::StatePrepParams;

pub use config::Config;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) | CliError::Io(_) => 2,
        }
    }
}

impl From<qcis_core::Error> for CliError {
    fn from(e: qcis_core::Error) -> Self {
        use qcis_core::Error as E;
        match e {
            E::InvalidParameter(_) | E::Parse(_) | E::BudgetTooSmall { .. } => CliError::Usage(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

/// Result of a subcommand: a report for the terminal and whether it passed.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub report: String,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            2
        }
    }
}

/// Estimator settings from the config. `gt` and `c` are mutually exclusive;
/// `e_max` defaults to the largest mode energy of `params`.
pub fn estimator_config(cfg: &Config, params: &StatePrepParams<f64>) -> Result<EstimatorConfig<f64>, CliError> {
    if cfg.contains("gt") && cfg.contains("c") {
        return Err(CliError::Usage("`gt` and `c` are mutually exclusive".into()));
    }
    let e_max = match cfg.positive("e_max")? {
        Some(e) => e,
        None => params.state()?.max_mode_energy(),
    };
    let eps = cfg.positive("eps")?.unwrap_or(1e-3);
    let mut est = EstimatorConfig::new(eps, e_max)?;
    if let Some(c) = cfg.positive("c")? {
        est.c = c;
        est.c_eps = 1.0 / (2.0 * c * c);
    }
    if let Some(c_eps) = cfg.positive("c_eps")? {
        est.c_eps = c_eps;
    }
    est.gt_override = cfg.positive("gt")?;
    est.order = cfg.get_or("order", est.order)?;
    est.rounds_override = cfg.get("rounds")?;
    est.clip = cfg.get_or("clip", true)?;
    est.validate()?;
    Ok(est)
}
