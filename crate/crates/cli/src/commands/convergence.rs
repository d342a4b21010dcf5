//! Per-round estimation error of the pair iteration fed with exact Pauli
//! expectations.

use qcis_core::estimator::{iterate, IterationTrace};
use qcis_core::fock::{build_state_with, FockBuildOptions};
use qcis_core::transduction::{fock_paulis, PairMap};
use serde_json::json;

use crate::output::RunContext;
use crate::{estimator_config, CliError, Config, Outcome};

#[derive(Clone, Debug)]
pub struct ConvergenceResult {
    pub trace: IterationTrace<f64>,
    pub gt: f64,
    /// Divergence or series failure, if the run stopped early.
    pub failure: Option<String>,
    pub threshold: f64,
}

impl ConvergenceResult {
    pub fn max_errors(&self) -> Vec<f64> {
        self.trace.max_errors().unwrap_or_default()
    }

    pub fn final_error(&self) -> Option<f64> {
        self.max_errors().last().copied()
    }

    pub fn passed(&self) -> bool {
        self.failure.is_none() && self.final_error().is_some_and(|e| e <= self.threshold)
    }
}

pub fn compute(cfg: &Config) -> Result<ConvergenceResult, CliError> {
    let params = cfg.state_params()?;
    if params.n_modes() != 2 {
        return Err(CliError::Usage("convergence needs a two-mode state".into()));
    }
    let est = estimator_config(cfg, &params)?;
    let gt = est.gt();
    let gamma = params.state()?.moments().pair_slice(0, 1);
    let map = PairMap::forward(gt, gt)?;
    let source = cfg.raw("pauli_source").unwrap_or("fock");
    let paulis = match source {
        "fock" => {
            let opts = FockBuildOptions {
                prune: cfg.get_or("prune", FockBuildOptions::default().prune)?,
                ..FockBuildOptions::default()
            };
            let ens = build_state_with(&params, cfg.get_or("n_trunc", 60usize)?, opts)?;
            fock_paulis(&ens, gt, gt)?
        }
        "series" => map.forward_model(&gamma, cfg.get_or("oracle_order", 16usize)?)?,
        other => return Err(CliError::Usage(format!("unknown pauli_source `{other}`"))),
    };
    let out = iterate(&paulis, &map, &est, Some(&gamma))?;
    Ok(ConvergenceResult {
        trace: out.trace,
        gt,
        failure: out.failure.map(|e| e.to_string()),
        threshold: cfg.positive("threshold")?.unwrap_or(1e-6),
    })
}

pub fn run(cfg: &Config, ctx: &mut RunContext) -> Result<Outcome, CliError> {
    let res = compute(cfg)?;
    ctx.write("convergence.csv", &res.trace.to_csv())?;
    let errs = res.max_errors();
    let mut report = format!("gt = {:.6e}\nround  max_error\n", res.gt);
    for (r, e) in errs.iter().enumerate() {
        report.push_str(&format!("{r:>5}  {e:.6e}\n"));
    }
    if let Some(f) = &res.failure {
        report.push_str(&format!("FAILED: {f}\n"));
    } else if !res.passed() {
        report.push_str(&format!("FAILED: final error above threshold {:.3e}\n", res.threshold));
    }
    ctx.write_manifest(
        "convergence",
        cfg,
        json!({
            "gt": res.gt,
            "max_errors": errs,
            "failure": res.failure,
            "threshold": res.threshold,
            "passed": res.passed(),
        }),
    )?;
    Ok(Outcome {
        passed: res.passed(),
        report,
    })
}
