//! Full n-mode protocol run.

use qcis_core::protocol::{run_protocol, MergeRule, OracleMode, ProtocolConfig, ProtocolRun};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::output::RunContext;
use crate::{estimator_config, CliError, Config, Outcome};

pub fn protocol_config(cfg: &Config, params: &qcis_core::gaussian::StatePrepParams<f64>) -> Result<ProtocolConfig<f64>, CliError> {
    let mut pc = ProtocolConfig::new(estimator_config(cfg, params)?);
    pc.mode = match cfg.raw("mode").unwrap_or("pairwise-oracle") {
        "full-sim" => OracleMode::FullSim,
        "pairwise-oracle" => OracleMode::PairwiseOracle,
        other => return Err(CliError::Usage(format!("unknown mode `{other}`"))),
    };
    pc.merge = match cfg.raw("merge").unwrap_or("mean") {
        "mean" => MergeRule::Mean,
        "median" => MergeRule::Median,
        other => return Err(CliError::Usage(format!("unknown merge rule `{other}`"))),
    };
    pc.copies = cfg.count("copies")?;
    if let Some(d) = cfg.positive("delta")? {
        if d >= 1.0 {
            return Err(CliError::Usage("`delta` must be below 1".into()));
        }
        pc.delta = d;
    }
    pc.median_of_means = cfg.get_or("median_of_means", true)?;
    pc.n_trunc = cfg.get_or("n_trunc", pc.n_trunc)?;
    pc.fock.prune = cfg.get_or("prune", pc.fock.prune)?;
    pc.oracle_order = cfg.get_or("oracle_order", pc.oracle_order)?;
    Ok(pc)
}

pub fn compute(cfg: &Config, seed: u64) -> Result<(ProtocolRun<f64>, f64, f64), CliError> {
    let params = cfg.state_params()?;
    let pc = protocol_config(cfg, &params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let run = run_protocol(&params, &pc, &mut rng)?;
    let truth = params.state()?.moments();
    let diffs: Vec<f64> = run
        .estimate
        .gamma_hat
        .iter()
        .zip(truth.as_slice())
        .map(|(a, b)| (a - b).abs())
        .collect();
    let max = diffs.iter().copied().fold(0.0, f64::max);
    let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
    Ok((run, max, mean))
}

pub fn run(cfg: &Config, ctx: &mut RunContext) -> Result<Outcome, CliError> {
    let (run, max_err, mean_err) = compute(cfg, ctx.seed)?;
    let text = serde_json::to_string_pretty(&run.estimate).map_err(|e| CliError::Numerical(e.to_string()))?;
    ctx.write("protocol.json", &(text + "\n"))?;
    let report = format!(
        "modes {}  prepared states {}  pairs {}\nmax error  {max_err:.6e}\nmean error {mean_err:.6e}\nmax spread {:.6e}\n",
        run.estimate.n,
        run.family.len(),
        run.pairs.len(),
        run.estimate.max_spread()
    );
    ctx.write_manifest(
        "protocol",
        cfg,
        json!({ "max_error": max_err, "mean_error": mean_err, "max_spread": run.estimate.max_spread() }),
    )?;
    Ok(Outcome { passed: true, report })
}
