use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::json;

use crate::{CliError, Config};

/// Output directory, seed and bookkeeping shared by every subcommand.
#[derive(Debug)]
pub struct RunContext {
    pub out: PathBuf,
    pub seed: u64,
    started: Instant,
    written: Vec<String>,
}

impl RunContext {
    pub fn new(out: impl Into<PathBuf>, seed: u64) -> Result<Self, CliError> {
        let out = out.into();
        std::fs::create_dir_all(&out)?;
        Ok(Self {
            out,
            seed,
            started: Instant::now(),
            written: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf, CliError> {
        let p = self.path(name);
        std::fs::write(&p, contents)?;
        self.written.push(name.to_string());
        Ok(p)
    }

    /// `<command>.manifest.json` with the config, seed, versions and runtime.
    pub fn write_manifest(&mut self, command: &str, cfg: &Config, extra: serde_json::Value) -> Result<PathBuf, CliError> {
        let manifest = json!({
            "command": command,
            "config": cfg.entries(),
            "seed": self.seed,
            "versions": {
                "qcis-cli": env!("CARGO_PKG_VERSION"),
                "qcis-core": qcis_core::VERSION,
            },
            "runtime_seconds": self.started.elapsed().as_secs_f64(),
            "outputs": self.written,
            "summary": extra,
        });
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Numerical(e.to_string()))?;
        let name = format!("{command}.manifest.json");
        let p = self.path(&name);
        std::fs::write(&p, text + "\n")?;
        Ok(p)
    }

    pub fn out_dir(&self) -> &Path {
        &self.out
    }
}

/// Full-precision CSV number.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}
