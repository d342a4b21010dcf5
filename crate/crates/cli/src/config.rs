//! Flat `key = value` experiment configuration.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use qcis_core::gaussian::StatePrepParams;
use qcis_core::random::{random_params, RandomStateBounds};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::CliError;

/// Every key accepted in a config file or as a `--key value` flag, with a
/// one-line description.
pub const KNOWN_KEYS: &[(&str, &str)] = &[
    ("n_modes", "number of modes (default 2)"),
    ("nbar", "thermal occupations, comma separated"),
    ("squeeze", "single-mode squeezing z_jj, comma separated complex"),
    ("two_mode", "two-mode squeezing as j-k:z entries, comma separated"),
    ("alpha", "displacements, comma separated complex"),
    ("random_state_seed", "draw a random state instead of the explicit parameters"),
    ("random_e_max", "energy bound for random states"),
    ("random_nbar_max", "largest thermal occupation of random states"),
    ("gt", "interaction strength gbar*t (excludes c)"),
    ("c", "tail constant C: gt = 1/(C sqrt(E_max))"),
    ("e_max", "per-mode energy bound (default: the state's own)"),
    ("eps", "target accuracy"),
    ("delta", "failure probability"),
    ("c_eps", "shadow accuracy factor, eps' = c_eps*eps/E_max"),
    ("order", "series order of the forward model"),
    ("rounds", "iteration rounds after round 0"),
    ("clip", "clip iterates before evaluating the tail (true/false)"),
    ("n_trunc", "Fock truncation per mode"),
    ("prune", "drop thermal Fock components below this weight"),
    ("pauli_source", "exact Pauli source for convergence: fock or series"),
    ("oracle_order", "series order for exact pair expectations"),
    ("threshold", "convergence pass threshold on the final max error"),
    ("mode", "protocol mode: full-sim or pairwise-oracle"),
    ("merge", "merge rule: mean or median"),
    ("copies", "total copies; omit for exact expectations"),
    ("median_of_means", "median-of-means aggregation (true/false)"),
    ("t_min", "smallest copy count of the sweep"),
    ("t_max", "largest copy count of the sweep"),
    ("t_points", "number of geometric sweep points"),
    ("seeds", "repetitions per sweep point"),
    ("n_list", "mode counts for the required-copies sweep"),
    ("growth_t", "copy counts used to fit the error constant per mode count"),
    ("growth_seeds", "repetitions per mode count and copy count"),
    ("inject", "validate fault injection: none, wrong-shift or symmetrized-wick"),
    ("seed", "master random seed"),
    ("threads", "worker threads"),
];

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("line {}: expected `key = value`", lineno + 1)))?;
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        if !KNOWN_KEYS.iter().any(|(k, _)| *k == key) {
            return Err(CliError::Usage(format!("unknown key `{key}`")));
        }
        self.entries.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.entries
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        self.raw(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| CliError::Usage(format!("invalid value `{v}` for `{key}`")))
            })
            .transpose()
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, CliError> {
        self.raw(key)
            .map(|v| {
                split_list(v)
                    .map(|s| s.parse().map_err(|_| CliError::Usage(format!("invalid entry `{s}` in `{key}`"))))
                    .collect()
            })
            .transpose()
    }

    /// Non-negative integer, also written as `1e9` or `2.5e6`.
    pub fn count(&self, key: &str) -> Result<Option<u64>, CliError> {
        let Some(v) = self.raw(key) else { return Ok(None) };
        if let Ok(n) = v.parse::<u64>() {
            return Ok(Some(n));
        }
        match v.parse::<f64>() {
            Ok(x) if x >= 0.0 && x.fract() == 0.0 && x < u64::MAX as f64 => Ok(Some(x as u64)),
            _ => Err(CliError::Usage(format!("invalid count `{v}` for `{key}`"))),
        }
    }

    pub fn positive(&self, key: &str) -> Result<Option<f64>, CliError> {
        match self.get::<f64>(key)? {
            Some(x) if !(x > 0.0 && x.is_finite()) => Err(CliError::Usage(format!("`{key}` must be positive"))),
            other => Ok(other),
        }
    }

    /// State preparation from the explicit parameters or a random draw.
    pub fn state_params(&self) -> Result<StatePrepParams<f64>, CliError> {
        let n = self.get_or("n_modes", 2usize)?;
        if n == 0 {
            return Err(CliError::Usage("n_modes must be at least 1".into()));
        }
        if let Some(seed) = self.get::<u64>("random_state_seed")? {
            let mut bounds = RandomStateBounds::default();
            if let Some(e) = self.positive("random_e_max")? {
                bounds.e_max = e;
            }
            if let Some(nb) = self.get::<f64>("random_nbar_max")? {
                bounds.nbar_max = nb;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            return random_params(n, &bounds, &mut rng).map_err(|e| CliError::Usage(e.to_string()));
        }
        let mut p = StatePrepParams::vacuum(n);
        let fill = |key: &str, target: &mut Vec<Complex64>| -> Result<(), CliError> {
            if let Some(v) = self.raw(key) {
                let vals: Vec<Complex64> = split_list(v).map(parse_complex).collect::<Result<_, _>>()?;
                if vals.len() != n {
                    return Err(CliError::Usage(format!("`{key}` needs {n} entries, got {}", vals.len())));
                }
                *target = vals;
            }
            Ok(())
        };
        if let Some(nb) = self.list::<f64>("nbar")? {
            if nb.len() != n {
                return Err(CliError::Usage(format!("`nbar` needs {n} entries, got {}", nb.len())));
            }
            p.nbar = nb;
        }
        fill("squeeze", &mut p.single_squeeze)?;
        fill("alpha", &mut p.displacement)?;
        if let Some(v) = self.raw("two_mode") {
            for item in split_list(v) {
                let (pair, z) = item
                    .split_once(':')
                    .ok_or_else(|| CliError::Usage(format!("two_mode entry `{item}` must be j-k:z")))?;
                let (j, k) = pair
                    .split_once('-')
                    .ok_or_else(|| CliError::Usage(format!("two_mode pair `{pair}` must be j-k")))?;
                let parse_idx = |s: &str| {
                    s.trim()
                        .parse::<usize>()
                        .map_err(|_| CliError::Usage(format!("bad mode index `{s}`")))
                };
                p.two_mode_squeeze.push((parse_idx(j)?, parse_idx(k)?, parse_complex(z)?));
            }
        }
        p.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(p)
    }
}

fn split_list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

/// `a`, `bi`, `a+bi` or `a-bi` (also `j` for the imaginary unit).
pub fn parse_complex(s: &str) -> Result<Complex64, CliError> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || CliError::Usage(format!("invalid complex number `{s}`"));
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return t.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    // split at the last sign that is not part of an exponent or the leading sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let im_of = |x: &str| -> Result<f64, CliError> {
        match x {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => x.parse().map_err(|_| bad()),
        }
    };
    match split {
        Some(i) => Ok(Complex64::new(body[..i].parse().map_err(|_| bad())?, im_of(&body[i..])?)),
        None => Ok(Complex64::new(0.0, im_of(body)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_files() {
        let cfg = Config::parse("# comment\n n_modes = 2 \n\neps=0.1 # trailing\n").unwrap();
        assert_eq!(cfg.get::<usize>("n_modes").unwrap(), Some(2));
        assert_eq!(cfg.get::<f64>("eps").unwrap(), Some(0.1));
        assert!(Config::parse("bogus = 1").is_err());
        assert!(Config::parse("eps 0.1").is_err());
        assert!(cfg.get::<usize>("eps").is_err());
    }

    #[test]
    fn complex_literals() {
        let c = |s| parse_complex(s).unwrap();
        assert_eq!(c("0.4"), Complex64::new(0.4, 0.0));
        assert_eq!(c("2i"), Complex64::new(0.0, 2.0));
        assert_eq!(c("-i"), Complex64::new(0.0, -1.0));
        assert_eq!(c("0.3-1.2i"), Complex64::new(0.3, -1.2));
        assert_eq!(c("1e-3+2e-2i"), Complex64::new(1e-3, 2e-2));
        assert_eq!(c("-1 + i"), Complex64::new(-1.0, 1.0));
        assert!(parse_complex("abc").is_err());
    }

    #[test]
    fn explicit_state() {
        let cfg = Config::parse("nbar = 0.3, 0.5\nsqueeze = 0.2, 0.3\ntwo_mode = 0-1:0.4\nalpha = 1+i, -0.5i").unwrap();
        let p = cfg.state_params().unwrap();
        assert_eq!(p.nbar, vec![0.3, 0.5]);
        assert_eq!(p.two_mode_squeeze, vec![(0, 1, Complex64::new(0.4, 0.0))]);
        assert_eq!(p.displacement[1], Complex64::new(0.0, -0.5));
        assert!(Config::parse("nbar = 0.3").unwrap().state_params().is_err());
    }
}
