//! Seeded random Gaussian preparations with bounded per-mode energy.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::StatePrepParams;
use crate::scalar::{cx, Cx, Real};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomStateBounds {
    pub nbar_max: f64,
    /// Largest `|z|` of a single-mode squeezer.
    pub squeeze_max: f64,
    /// Largest `|z|` of a two-mode squeezer; zero disables them.
    pub two_mode_max: f64,
    pub alpha_max: f64,
    /// Upper bound on every mode energy `(<Q^2> + <P^2>) / 2`.
    pub e_max: f64,
}

impl Default for RandomStateBounds {
    fn default() -> Self {
        Self {
            nbar_max: 1.0,
            squeeze_max: 0.5,
            two_mode_max: 0.5,
            alpha_max: 1.5,
            e_max: 5.0,
        }
    }
}

impl RandomStateBounds {
    /// Weak states that stay well inside a small Fock truncation.
    pub fn low_energy() -> Self {
        Self {
            nbar_max: 0.2,
            squeeze_max: 0.2,
            two_mode_max: 0.2,
            alpha_max: 0.5,
            e_max: 1.5,
        }
    }
}

fn polar<T: Real, R: Rng + ?Sized>(r_max: f64, rng: &mut R) -> Cx<T> {
    // uniform on the disc
    let r = r_max * rng.random::<f64>().sqrt();
    let phi = std::f64::consts::TAU * rng.random::<f64>();
    cx(T::lit(r * phi.cos()), T::lit(r * phi.sin()))
}

const MAX_ATTEMPTS: usize = 10_000;

/// Draw preparations until every mode energy is at most `bounds.e_max`.
pub fn random_params<T: Real, R: Rng + ?Sized>(n: usize, bounds: &RandomStateBounds, rng: &mut R) -> Result<StatePrepParams<T>> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one mode".into()));
    }
    for _ in 0..MAX_ATTEMPTS {
        let mut two_mode = Vec::new();
        if bounds.two_mode_max > 0.0 {
            for j in 0..n {
                for k in j + 1..n {
                    two_mode.push((j, k, polar(bounds.two_mode_max, rng)));
                }
            }
        }
        let params = StatePrepParams {
            nbar: (0..n).map(|_| T::lit(bounds.nbar_max * rng.random::<f64>())).collect(),
            single_squeeze: (0..n).map(|_| polar(bounds.squeeze_max, rng)).collect(),
            two_mode_squeeze: two_mode,
            displacement: (0..n).map(|_| polar(bounds.alpha_max, rng)).collect(),
        };
        let state = params.state()?;
        if state.max_mode_energy() <= T::lit(bounds.e_max) {
            return Ok(params);
        }
    }
    Err(Error::InvalidParameter(format!(
        "no state within energy {} after {MAX_ATTEMPTS} draws",
        bounds.e_max
    )))
}
