//! Iterative extraction of the 14 moments of a mode pair from measured
//! shifted Pauli expectations.
//!
//! Round 0 is the linear inversion `M^{-1} p`. Every later round subtracts the
//! series tail evaluated at the previous iterate,
//! `gamma_r = M^{-1} (p - f(clip(gamma_{r-1})))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::PAIR_LEN;
use crate::scalar::Real;
use crate::shadows::{observable_count, required_samples_with, DEFAULT_MOM_CONSTANT};
use crate::transduction::{PairMap, PauliVector};

/// Tunables of the pair estimator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig<T> {
    /// Tail constant: the interaction strength is `gt = 1 / (C sqrt(E_max))`.
    pub c: T,
    /// Target accuracy.
    pub eps: T,
    /// Per-mode energy bound.
    pub e_max: T,
    /// Shadow accuracy factor, `eps' = c_eps eps / E_max`.
    pub c_eps: T,
    /// Series order of the forward model.
    pub order: usize,
    /// Explicit `gbar t`, replacing `1 / (C sqrt(E_max))`.
    pub gt_override: Option<T>,
    /// Explicit number of rounds after round 0.
    pub rounds_override: Option<usize>,
    /// Clip iterates to the balls `|mu| <= 2 sqrt(2E)`, `|sigma| <= 4E`
    /// before evaluating the tail.
    pub clip: bool,
}

impl<T: Real> EstimatorConfig<T> {
    pub const DEFAULT_C: f64 = 10.0;
    pub const DEFAULT_ORDER: usize = 8;

    pub fn new(eps: T, e_max: T) -> Result<Self> {
        let c = T::lit(Self::DEFAULT_C);
        let cfg = Self {
            c,
            eps,
            e_max,
            c_eps: T::one() / (T::lit(2.0) * c * c),
            order: Self::DEFAULT_ORDER,
            gt_override: None,
            rounds_override: None,
            clip: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |x: T| x > T::zero() && x.is_finite();
        if !(pos(self.c) && pos(self.eps) && pos(self.e_max) && pos(self.c_eps)) {
            return Err(Error::InvalidParameter("C, eps, E_max and c_eps must be positive".into()));
        }
        if self.order < 2 {
            return Err(Error::InvalidParameter(format!("series order {} below 2", self.order)));
        }
        if let Some(g) = self.gt_override {
            if !pos(g) {
                return Err(Error::InvalidParameter(format!("gt = {g} must be positive")));
            }
        }
        if self.rounds_override == Some(0) {
            return Err(Error::InvalidParameter("at least one round is required".into()));
        }
        Ok(())
    }

    pub fn gt(&self) -> T {
        self.gt_override
            .unwrap_or_else(|| T::one() / (self.c * self.e_max.sqrt()))
    }

    pub fn eps_prime(&self) -> T {
        self.c_eps * self.eps / self.e_max
    }

    /// `ceil(log2(E_max / eps))`, at least 1.
    pub fn rounds(&self) -> usize {
        self.rounds_override.unwrap_or_else(|| {
            let r = (self.e_max / self.eps).log2().ceil();
            r.to_f64_lossy().max(1.0) as usize
        })
    }
}

/// Copy budget for the full protocol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleBudget {
    pub n_modes: usize,
    /// Number of prepared qubit states, `ceil(log2 n) + 1`.
    pub n_states: usize,
    /// One- and two-qubit observables per state.
    pub observables: usize,
    pub eps_prime: f64,
    pub per_state: u64,
    pub total: u64,
    /// `E_max^2 ln(n / delta) ceil(log2 n) / eps^2`, without constants.
    pub predicted_scaling: f64,
}

pub fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// Estimator configuration and copy budget for `n` modes.
pub fn derive_config<T: Real>(e_max: T, eps: T, delta: f64, n: usize) -> Result<(EstimatorConfig<T>, SampleBudget)> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need at least two modes, got {n}")));
    }
    if !(eps < e_max) {
        return Err(Error::InvalidParameter(format!("eps = {eps} must be below E_max = {e_max}")));
    }
    let cfg = EstimatorConfig::new(eps, e_max)?;
    let budget = budget_for(&cfg, delta, n, DEFAULT_MOM_CONSTANT)?;
    Ok((cfg, budget))
}

pub fn budget_for<T: Real>(cfg: &EstimatorConfig<T>, delta: f64, n: usize, mom_constant: f64) -> Result<SampleBudget> {
    let observables = observable_count(n);
    let eps_prime = cfg.eps_prime().to_f64_lossy();
    let per_state = required_samples_with(mom_constant, 2, observables, eps_prime, delta)?;
    let n_states = ceil_log2(n) + 1;
    let (e, eps) = (cfg.e_max.to_f64_lossy(), cfg.eps.to_f64_lossy());
    Ok(SampleBudget {
        n_modes: n,
        n_states,
        observables,
        eps_prime,
        per_state,
        total: per_state.saturating_mul(n_states as u64),
        predicted_scaling: e * e * (n as f64 / delta).ln() * ceil_log2(n) as f64 / (eps * eps),
    })
}

/// One row of an iteration trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord<T> {
    pub round: usize,
    pub gamma: [T; PAIR_LEN],
    /// `||p - p(gamma_r)||_inf` with the forward model at the configured order.
    pub residual: T,
    pub mean_err: Option<T>,
    pub cov_err: Option<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace<T> {
    pub rounds: Vec<RoundRecord<T>>,
}

impl<T: Real> IterationTrace<T> {
    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn final_gamma(&self) -> Option<[T; PAIR_LEN]> {
        self.rounds.last().map(|r| r.gamma)
    }

    /// `max(mean_err, cov_err)` per round, when ground truth was supplied.
    pub fn max_errors(&self) -> Option<Vec<T>> {
        self.rounds
            .iter()
            .map(|r| Some(r.mean_err?.max(r.cov_err?)))
            .collect()
    }

    /// CSV with header `round,residual,mean_err,cov_err`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("round,residual,mean_err,cov_err\n");
        let opt = |x: Option<T>| x.map(|v| format!("{:.16e}", v.to_f64_lossy())).unwrap_or_default();
        for r in &self.rounds {
            s.push_str(&format!(
                "{},{:.16e},{},{}\n",
                r.round,
                r.residual.to_f64_lossy(),
                opt(r.mean_err),
                opt(r.cov_err)
            ));
        }
        s
    }
}

/// `(max over means, max over second moments)` of `|a - b|`.
pub fn split_errors<T: Real>(a: &[T; PAIR_LEN], b: &[T; PAIR_LEN]) -> (T, T) {
    let d = |i: usize| (a[i] - b[i]).abs();
    let mean = (0..4).map(d).fold(T::zero(), T::max);
    let cov = (4..PAIR_LEN).map(d).fold(T::zero(), T::max);
    (mean, cov)
}

/// Project onto the balls the tail bound is stated on.
pub fn clip_to_balls<T: Real>(gamma: &[T; PAIR_LEN], e_max: T) -> [T; PAIR_LEN] {
    let mu_max = T::lit(2.0) * (T::lit(2.0) * e_max).sqrt();
    let sigma_max = T::lit(4.0) * e_max;
    std::array::from_fn(|i| {
        let bound = if i < 4 { mu_max } else { sigma_max };
        gamma[i].max(-bound).min(bound)
    })
}

/// Outcome of running the iteration to the end or to the first failure.
#[derive(Debug)]
pub struct IterationOutcome<T> {
    pub trace: IterationTrace<T>,
    /// Divergence or series failure that stopped the run early.
    pub failure: Option<Error>,
}

/// Run all rounds, keeping the trace even if the run fails.
pub fn iterate<T: Real>(
    p: &PauliVector<T>,
    map: &PairMap<T>,
    cfg: &EstimatorConfig<T>,
    truth: Option<&[T; PAIR_LEN]>,
) -> Result<IterationOutcome<T>> {
    cfg.validate()?;
    let series = map.series(cfg.order)?;
    let rounds = cfg.rounds();
    let floor = T::lit(1e-10) * p.values.iter().fold(T::one(), |m, x| m.max(x.abs()));
    let mut trace = IterationTrace { rounds: Vec::with_capacity(rounds + 1) };
    let mut tail = [T::zero(); PAIR_LEN];
    let mut growth = 0;
    for r in 0..=rounds {
        let rhs: [T; PAIR_LEN] = std::array::from_fn(|i| p.values[i] - tail[i]);
        let gamma: [T; PAIR_LEN] = map
            .m_inv()
            .matvec(&rhs)
            .try_into()
            .unwrap_or_else(|_| unreachable!());
        let arg = if cfg.clip { clip_to_balls(&gamma, cfg.e_max) } else { gamma };
        tail = match series.tail(&arg) {
            Ok(t) => t,
            Err(e) => {
                return Ok(IterationOutcome {
                    trace,
                    failure: Some(e),
                })
            }
        };
        let model = map.apply_m(&gamma);
        let residual = (0..PAIR_LEN)
            .map(|i| (p.values[i] - model[i] - tail[i]).abs())
            .fold(T::zero(), T::max);
        let (mean_err, cov_err) = match truth {
            Some(t) => {
                let (m, c) = split_errors(&gamma, t);
                (Some(m), Some(c))
            }
            None => (None, None),
        };
        if let Some(prev) = trace.rounds.last() {
            if residual > prev.residual && residual > floor {
                growth += 1;
            } else {
                growth = 0;
            }
        }
        trace.rounds.push(RoundRecord {
            round: r,
            gamma,
            residual,
            mean_err,
            cov_err,
        });
        if growth >= 2 {
            return Ok(IterationOutcome {
                trace,
                failure: Some(Error::Diverged { round: r }),
            });
        }
    }
    Ok(IterationOutcome { trace, failure: None })
}

/// Final estimate and trace; divergence and series failures are errors.
pub fn extract_pair<T: Real>(
    p: &PauliVector<T>,
    map: &PairMap<T>,
    cfg: &EstimatorConfig<T>,
    truth: Option<&[T; PAIR_LEN]>,
) -> Result<([T; PAIR_LEN], IterationTrace<T>)> {
    let out = iterate(p, map, cfg, truth)?;
    if let Some(e) = out.failure {
        return Err(e);
    }
    let gamma = out.trace.final_gamma().ok_or(Error::NoRecords)?;
    Ok((gamma, out.trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::StatePrepParams;
    use crate::transduction::Orientation;

    fn cfg(gt: f64, rounds: usize) -> EstimatorConfig<f64> {
        let mut c = EstimatorConfig::new(1e-3, 5.0).unwrap();
        c.gt_override = Some(gt);
        c.rounds_override = Some(rounds);
        c
    }

    #[test]
    fn derived_quantities() {
        let c = EstimatorConfig::<f64>::new(0.01, 4.0).unwrap();
        assert!((c.gt() - 0.05).abs() < 1e-15);
        assert_eq!(c.rounds(), 9);
        assert!((c.eps_prime() - 0.01 / 4.0 / 200.0).abs() < 1e-18);
        assert!(EstimatorConfig::<f64>::new(-1.0, 4.0).is_err());
    }

    #[test]
    fn budget_laws() {
        let (_, a) = derive_config(5.0, 0.2, 0.05, 4).unwrap();
        let (_, b) = derive_config(5.0, 0.1, 0.05, 4).unwrap();
        assert!((b.total as f64 / a.total as f64 - 4.0).abs() < 1e-3);
        let (_, c) = derive_config(10.0, 0.2, 0.05, 4).unwrap();
        assert!((c.total as f64 / a.total as f64 - 4.0).abs() < 1e-3);
        assert_eq!(a.n_states, 3);
        let (_, d) = derive_config(5.0, 0.2, 0.05, 16).unwrap();
        assert_eq!(d.n_states, 5);
        assert_eq!(d.observables, 9 * 120 + 48);
        assert!(derive_config(1.0, 2.0, 0.05, 4).is_err());
    }

    #[test]
    fn linear_regime_is_a_fixed_point_at_order_two() {
        let map = PairMap::forward(0.02, 0.03).unwrap();
        let gamma = [0.4, -0.1, 0.2, 0.3, 0.8, 0.7, 0.9, 0.6, 0.05, -0.02, 0.1, 0.0, -0.1, 0.2];
        let lin = map.apply_m(&gamma);
        let p = PauliVector {
            values: lin,
            shifted: [false; PAIR_LEN],
            couplings: (0.02, 0.03),
        };
        let mut c = cfg(0.02, 4);
        c.order = 2;
        let (g, trace) = extract_pair(&p, &map, &c, Some(&gamma)).unwrap();
        for r in &trace.rounds {
            assert!(r.mean_err.unwrap().max(r.cov_err.unwrap()) < 1e-12);
        }
        assert!(split_errors(&g, &gamma).1 < 1e-12);
    }

    #[test]
    fn vacuum_is_exact_from_round_zero() {
        let gamma = StatePrepParams::<f64>::vacuum(2).state().unwrap().moments().pair_slice(0, 1);
        let map = PairMap::forward(0.01, 0.01).unwrap();
        let p = map.forward_model(&gamma, 12).unwrap();
        let (_, trace) = extract_pair(&p, &map, &cfg(0.01, 4), Some(&gamma)).unwrap();
        assert_eq!(trace.len(), 5);
        let errs = trace.max_errors().unwrap();
        // the psi2 entries carry a small nonzero tail even for vacuum
        assert!(errs.iter().all(|e| *e < 1e-5), "{errs:?}");
        assert!(errs[4] < 1e-12);
    }

    #[test]
    fn reference_pair_series_pipeline_converges() {
        let gamma = StatePrepParams::<f64>::reference_pair().state().unwrap().moments().pair_slice(0, 1);
        let map = PairMap::new(0.01, 0.01, Orientation::Forward).unwrap();
        let p = map.forward_model(&gamma, 14).unwrap();
        let (_, trace) = extract_pair(&p, &map, &cfg(0.01, 4), Some(&gamma)).unwrap();
        let errs = trace.max_errors().unwrap();
        for w in errs.windows(2) {
            assert!(w[1] < w[0], "{errs:?}");
        }
        assert!(errs[4] < 1e-6);
        assert!(errs[0] / errs[4] > 100.0);
    }

    #[test]
    fn out_of_regime_is_flagged() {
        let mut params = StatePrepParams::<f64>::reference_pair();
        params.displacement = vec![crate::scalar::cx(2.5, 0.0), crate::scalar::cx(0.0, 2.5)];
        let gamma = params.state().unwrap().moments().pair_slice(0, 1);
        let map = PairMap::forward(0.6, 0.6).unwrap();
        let p = map.forward_model(&gamma, 2).unwrap();
        let mut c = cfg(0.6, 8);
        c.e_max = 10.0;
        let out = iterate(&p, &map, &c, Some(&gamma)).unwrap();
        assert!(out.failure.is_some());
    }

    #[test]
    fn trace_csv_layout() {
        let t = IterationTrace {
            rounds: vec![RoundRecord {
                round: 0,
                gamma: [0.0; PAIR_LEN],
                residual: 0.5,
                mean_err: None,
                cov_err: None,
            }],
        };
        assert_eq!(t.to_csv(), "round,residual,mean_err,cov_err\n0,5.0000000000000000e-1,,\n");
    }
}
