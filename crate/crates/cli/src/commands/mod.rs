pub mod convergence;
pub mod protocol;
pub mod sample_complexity;
pub mod validate;

use crate::output::RunContext;
use crate::{CliError, Config, Outcome};

pub const SUBCOMMANDS: &[(&str, &str)] = &[
    ("convergence", "per-round error of the pair iteration on exact expectations"),
    ("sample-complexity", "error versus copy count and required copies versus modes"),
    ("protocol", "run the full n-mode protocol"),
    ("validate", "oracle-equivalence and invariant checks"),
];

pub fn dispatch(name: &str, cfg: &Config, ctx: &mut RunContext) -> Result<Outcome, CliError> {
    match name {
        "convergence" => convergence::run(cfg, ctx),
        "sample-complexity" => sample_complexity::run(cfg, ctx),
        "protocol" => protocol::run(cfg, ctx),
        "validate" => validate::run(cfg, ctx),
        other => Err(CliError::Usage(format!("unknown subcommand `{other}`"))),
    }
}
