//! Full n-mode orchestration: qubit preparations, routing of measured Pauli
//! data to mode pairs, per-pair extraction and merging.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{extract_pair, EstimatorConfig, IterationTrace};
use crate::fock::{build_state_with, BasisSampler, FockBuildOptions, FockOperator, TransductionConfig};
use crate::gaussian::{moment_len, MomentVector, StatePrepParams, PAIR_LEN};
use crate::linalg::CMatrix;
use crate::pauli::{Pauli, PauliString, QubitInit};
use crate::scalar::{cx, Real};
use crate::shadows::{batch_count, estimate_from_batches, observable_count, sample_batches, Tally};
use crate::transduction::{moment_table, swap_pair, Orientation, PairMap, PairSeries, PauliVector, Preparation, PAULI_ENTRIES};

/// Qubit preparations, the all-ground state first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InitialStateFamily {
    pub n: usize,
    pub members: Vec<Vec<QubitInit>>,
}

/// Members built by recursive doubling on `2^ceil(log2 n)` qubits, then
/// truncated to `n` qubits.
pub fn build_family(n: usize) -> Result<InitialStateFamily> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need at least two modes, got {n}")));
    }
    let mut members = vec![vec![QubitInit::Plus, QubitInit::PlusI]];
    let mut width = 2;
    while width < n {
        let mut next: Vec<Vec<QubitInit>> = members.iter().map(|m| m.repeat(2)).collect();
        let mut split = vec![QubitInit::Plus; width];
        split.extend(vec![QubitInit::PlusI; width]);
        next.push(split);
        members = next;
        width *= 2;
    }
    let mut all = vec![vec![QubitInit::Ground; n]];
    all.extend(members.into_iter().map(|mut m| {
        m.truncate(n);
        m
    }));
    Ok(InitialStateFamily { n, members: all })
}

impl InitialStateFamily {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Bit `m` of qubit `q`'s code is set when member `m` prepares `|+i>`
    /// there. Fails if a non-ground member uses anything but `|+>`/`|+i>`.
    fn codes(&self) -> Result<Vec<u64>> {
        if self.members.len() > 64 {
            return Err(Error::InvalidParameter("family too large for bit codes".into()));
        }
        let mut codes = vec![0u64; self.n];
        for (m, member) in self.members.iter().enumerate().skip(1) {
            for (q, init) in member.iter().enumerate() {
                match init {
                    QubitInit::Plus => {}
                    QubitInit::PlusI => codes[q] |= 1 << m,
                    QubitInit::Ground => {
                        return Err(Error::InvalidParameter(format!("member {m} prepares |g> on qubit {q}")));
                    }
                }
            }
        }
        Ok(codes)
    }

    /// Verify every pair has a member restricting to `(+, +i)` or `(+i, +)`.
    pub fn check_coverage(&self) -> Result<()> {
        if self.members.first().is_none_or(|m| m.iter().any(|q| *q != QubitInit::Ground)) {
            return Err(Error::InvalidParameter("first member must be all-ground".into()));
        }
        let codes = self.codes()?;
        for j in 0..self.n {
            for k in j + 1..self.n {
                if codes[j] == codes[k] {
                    return Err(Error::CoverageFailure(j, k));
                }
            }
        }
        Ok(())
    }
}

/// Which member serves as the second preparation of pair `(j, k)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairAssignment {
    pub j: usize,
    pub k: usize,
    pub member: usize,
    pub orientation: Orientation,
}

impl PairAssignment {
    /// Qubits in the order the Pauli entries label them.
    pub fn labelled_qubits(&self) -> [usize; 2] {
        match self.orientation {
            Orientation::Forward => [self.j, self.k],
            Orientation::Reversed => [self.k, self.j],
        }
    }
}

pub fn assign_pairs(family: &InitialStateFamily) -> Result<Vec<PairAssignment>> {
    let n = family.n;
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for j in 0..n {
        for k in j + 1..n {
            let found = family.members.iter().enumerate().skip(1).find_map(|(m, member)| {
                match (member[j], member[k]) {
                    (QubitInit::Plus, QubitInit::PlusI) => Some((m, Orientation::Forward)),
                    (QubitInit::PlusI, QubitInit::Plus) => Some((m, Orientation::Reversed)),
                    _ => None,
                }
            });
            let (member, orientation) = found.ok_or(Error::CoverageFailure(j, k))?;
            out.push(PairAssignment { j, k, member, orientation });
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleMode {
    /// Simulate all `n` modes and qubits jointly (small `n`).
    FullSim,
    /// Simulate each mode pair from its two-mode marginal.
    PairwiseOracle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MergeRule {
    Mean,
    Median,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig<T> {
    pub estimator: EstimatorConfig<T>,
    pub mode: OracleMode,
    pub merge: MergeRule,
    /// Total number of copies; `None` feeds exact expectations.
    pub copies: Option<u64>,
    pub delta: f64,
    pub median_of_means: bool,
    /// Fock truncation for full simulation.
    pub n_trunc: usize,
    pub fock: FockBuildOptions,
    /// Series order used to compute exact pair expectations.
    pub oracle_order: usize,
}

impl<T: Real> ProtocolConfig<T> {
    pub const FULL_SIM_MAX_MODES: usize = 4;

    pub fn new(estimator: EstimatorConfig<T>) -> Self {
        Self {
            estimator,
            mode: OracleMode::PairwiseOracle,
            merge: MergeRule::Mean,
            copies: None,
            delta: 0.05,
            median_of_means: true,
            n_trunc: 20,
            fock: FockBuildOptions::default(),
            oracle_order: 12,
        }
    }
}

/// Merged moment vector with per-entry provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalEstimate<T> {
    pub n: usize,
    pub gamma_hat: Vec<T>,
    /// Pairs whose extraction contributed to each entry.
    pub provenance: Vec<Vec<(usize, usize)>>,
    /// `max - min` over contributing pairs.
    pub spread: Vec<T>,
    pub config: serde_json::Value,
}

impl<T: Real> GlobalEstimate<T> {
    pub fn moments(&self) -> Result<MomentVector<T>> {
        MomentVector::new(self.n, self.gamma_hat.clone())
    }

    pub fn max_error(&self, truth: &MomentVector<T>) -> T {
        self.gamma_hat
            .iter()
            .zip(truth.as_slice())
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), T::max)
    }

    pub fn max_spread(&self) -> T {
        self.spread.iter().copied().fold(T::zero(), T::max)
    }
}

/// Per-pair outcome of a protocol run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairResult<T> {
    pub assignment: PairAssignment,
    /// Estimate in `(j, k)` pair ordering.
    pub gamma: [T; PAIR_LEN],
    /// Shifted Pauli vector fed to the estimator.
    pub paulis: PauliVector<T>,
    /// All 15 two-qubit expectations of each preparation, labelled qubit
    /// order, ordered as [`PauliString::two_qubit_all`].
    pub psi1_all: Vec<T>,
    pub psi2_all: Vec<T>,
    pub trace: IterationTrace<T>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProtocolRun<T> {
    pub family: InitialStateFamily,
    pub estimate: GlobalEstimate<T>,
    pub pairs: Vec<PairResult<T>>,
}

/// Combine per-pair `(j, k, gamma_jk)` estimates.
pub fn merge_estimates<T: Real>(
    n: usize,
    results: &[(usize, usize, [T; PAIR_LEN])],
    rule: MergeRule,
) -> Result<GlobalEstimate<T>> {
    let layout = MomentVector::<T>::zeros(n);
    let mut seen = vec![false; n * n];
    let mut values: Vec<Vec<T>> = vec![Vec::new(); moment_len(n)];
    let mut provenance = vec![Vec::new(); moment_len(n)];
    for (j, k, g) in results {
        let (j, k) = (*j, *k);
        if j >= k || k >= n {
            return Err(Error::InvalidParameter(format!("pair ({j}, {k}) is not an ordered pair of {n} modes")));
        }
        seen[j * n + k] = true;
        for (slot, &idx) in layout.pair_indices(j, k).iter().enumerate() {
            values[idx].push(g[slot]);
            provenance[idx].push((j, k));
        }
    }
    for j in 0..n {
        for k in j + 1..n {
            if !seen[j * n + k] {
                return Err(Error::MissingPair(j, k));
            }
        }
    }
    let combine = |v: &Vec<T>| -> T {
        match rule {
            MergeRule::Mean => v.iter().copied().sum::<T>() / T::from_usize_lossy(v.len()),
            MergeRule::Median => {
                let mut s = v.clone();
                s.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
                let m = s.len() / 2;
                if s.len() % 2 == 1 {
                    s[m]
                } else {
                    (s[m - 1] + s[m]) / T::lit(2.0)
                }
            }
        }
    };
    let spread = values
        .iter()
        .map(|v| {
            let hi = v.iter().copied().fold(T::neg_infinity(), T::max);
            let lo = v.iter().copied().fold(T::infinity(), T::min);
            hi - lo
        })
        .collect();
    Ok(GlobalEstimate {
        n,
        gamma_hat: values.iter().map(combine).collect(),
        provenance,
        spread,
        config: serde_json::Value::Null,
    })
}

/// Two-qubit density matrix from its 15 Pauli expectations.
pub fn two_qubit_density<T: Real>(expectations: &[T]) -> Result<FockOperator<T>> {
    let strings = PauliString::two_qubit_all();
    if expectations.len() != strings.len() {
        return Err(Error::DimensionMismatch("need 15 two-qubit expectations".into()));
    }
    let quarter = T::lit(0.25);
    let mut rho = CMatrix::<T>::identity(4).scale(cx(quarter, T::zero()));
    for (s, &v) in strings.iter().zip(expectations) {
        rho = rho.add(&s.matrix::<T>().scale(cx(quarter * v, T::zero())));
    }
    FockOperator::new(vec![2, 2], rho)
}

fn entry_index(obs: [Pauli; 2]) -> usize {
    PauliString::two_qubit_all()
        .iter()
        .position(|s| s.0 == obs)
        .expect("non-identity two-qubit string")
}

/// Where the two-qubit data of one preparation comes from.
enum PairData<T> {
    Exact(Vec<T>),
    Tallies(Vec<Tally>),
}

impl<T: Real> PairData<T> {
    fn expectations(&self) -> Result<Vec<T>> {
        match self {
            PairData::Exact(v) => Ok(v.clone()),
            PairData::Tallies(b) => Ok(estimate_from_batches(b, &PauliString::two_qubit_all())?
                .into_iter()
                .map(|e| T::lit(e.value))
                .collect()),
        }
    }
}

/// Run the full protocol on the state prepared by `params`.
pub fn run_protocol<T: Real, R: Rng + ?Sized>(
    params: &StatePrepParams<T>,
    cfg: &ProtocolConfig<T>,
    rng: &mut R,
) -> Result<ProtocolRun<T>> {
    params.validate()?;
    cfg.estimator.validate()?;
    let n = params.n_modes();
    let family = build_family(n)?;
    family.check_coverage()?;
    let assignments = assign_pairs(&family)?;
    let gt = cfg.estimator.gt();

    let per_state = match cfg.copies {
        None => None,
        Some(total) => {
            let per = total / family.len() as u64;
            let batches = if cfg.median_of_means {
                batch_count(observable_count(n), cfg.delta)
            } else {
                1
            };
            let minimum = (batches * family.len()) as u64;
            if total < minimum {
                return Err(Error::BudgetTooSmall { budget: total, minimum });
            }
            Some((per, batches))
        }
    };

    // (psi1, psi2) data in labelled qubit order for every pair
    let data: Vec<(PairData<T>, PairData<T>)> = match cfg.mode {
        OracleMode::FullSim => full_sim_data(params, cfg, &family, &assignments, gt, per_state, rng)?,
        OracleMode::PairwiseOracle => {
            let seeds: Vec<u64> = assignments.iter().map(|_| rng.random()).collect();
            let truth = params.state()?.moments();
            assignments
                .par_iter()
                .zip(seeds)
                .map(|(a, seed)| pairwise_data(&truth, a, cfg, gt, per_state, seed))
                .collect::<Result<_>>()?
        }
    };

    let pairs: Vec<PairResult<T>> = assignments
        .into_par_iter()
        .zip(data)
        .map(|(a, (d1, d2))| {
            let psi1_all = d1.expectations()?;
            let psi2_all = d2.expectations()?;
            let map = PairMap::new(gt, gt, a.orientation)?;
            let raw = PAULI_ENTRIES.map(|(prep, obs)| match prep {
                Preparation::Psi1 => psi1_all[entry_index(obs)],
                Preparation::Psi2 => psi2_all[entry_index(obs)],
            });
            let paulis = map.shift(raw);
            let (gamma, trace) = extract_pair(&paulis, &map, &cfg.estimator, None)?;
            Ok(PairResult {
                assignment: a,
                gamma,
                paulis,
                psi1_all,
                psi2_all,
                trace,
            })
        })
        .collect::<Result<_>>()?;

    let triples: Vec<_> = pairs.iter().map(|p| (p.assignment.j, p.assignment.k, p.gamma)).collect();
    let mut estimate = merge_estimates(n, &triples, cfg.merge)?;
    estimate.config = serde_json::json!({
        "gt": gt.to_f64_lossy(),
        "eps": cfg.estimator.eps.to_f64_lossy(),
        "e_max": cfg.estimator.e_max.to_f64_lossy(),
        "c": cfg.estimator.c.to_f64_lossy(),
        "c_eps": cfg.estimator.c_eps.to_f64_lossy(),
        "order": cfg.estimator.order,
        "rounds": cfg.estimator.rounds(),
        "mode": cfg.mode,
        "merge": cfg.merge,
        "copies": cfg.copies,
        "delta": cfg.delta,
        "median_of_means": cfg.median_of_means,
        "family_size": family.len(),
    });
    Ok(ProtocolRun {
        family,
        estimate,
        pairs,
    })
}

fn full_sim_data<T: Real, R: Rng + ?Sized>(
    params: &StatePrepParams<T>,
    cfg: &ProtocolConfig<T>,
    family: &InitialStateFamily,
    assignments: &[PairAssignment],
    gt: T,
    per_state: Option<(u64, usize)>,
    rng: &mut R,
) -> Result<Vec<(PairData<T>, PairData<T>)>> {
    let n = params.n_modes();
    if n > ProtocolConfig::<T>::FULL_SIM_MAX_MODES {
        return Err(Error::InvalidParameter(format!(
            "full simulation supports at most {} modes, got {n}",
            ProtocolConfig::<T>::FULL_SIM_MAX_MODES
        )));
    }
    let ensemble = build_state_with(params, cfg.n_trunc, cfg.fock)?;
    let tcfg = TransductionConfig::uniform(n, gt)?;
    let states: Vec<FockOperator<T>> = family
        .members
        .iter()
        .map(|m| ensemble.transduce(m, &tcfg))
        .collect::<Result<_>>()?;
    let tallies: Option<Vec<Vec<Tally>>> = match per_state {
        None => None,
        Some((per, batches)) => Some(
            states
                .iter()
                .map(|rho| sample_batches(&BasisSampler::new(rho)?, per, batches, rng))
                .collect::<Result<_>>()?,
        ),
    };
    let strings = PauliString::two_qubit_all();
    let member_data = |m: usize, qubits: [usize; 2]| -> Result<PairData<T>> {
        Ok(match &tallies {
            None => {
                let reduced = states[m].partial_trace(&[qubits[0].min(qubits[1]), qubits[0].max(qubits[1])]);
                let swapped = qubits[0] > qubits[1];
                PairData::Exact(
                    strings
                        .iter()
                        .map(|s| {
                            let s = if swapped { PauliString(vec![s.0[1], s.0[0]]) } else { s.clone() };
                            reduced.pauli_expectation(&s)
                        })
                        .collect::<Result<_>>()?,
                )
            }
            Some(t) => PairData::Tallies(t[m].iter().map(|b| b.restrict(&qubits)).collect()),
        })
    };
    assignments
        .iter()
        .map(|a| {
            let q = a.labelled_qubits();
            Ok((member_data(0, q)?, member_data(a.member, q)?))
        })
        .collect()
}

/// Exact 15 expectations of a two-mode marginal (labelled order) after the
/// interaction, from the series at high order.
pub fn pair_exact_expectations<T: Real>(gamma_ab: &[T; PAIR_LEN], gt: [T; 2], inits: [QubitInit; 2], order: usize) -> Result<Vec<T>> {
    let strings: Vec<[Pauli; 2]> = PauliString::two_qubit_all()
        .into_iter()
        .map(|s| [s.0[0], s.0[1]])
        .collect();
    let series = PairSeries::new(order, gt, inits, &strings);
    let contrib = series.contributions(&moment_table(gamma_ab, order));
    crate::transduction::check_convergence(&contrib, order)?;
    Ok(contrib.iter().map(|c| c.iter().copied().sum()).collect())
}

fn pairwise_data<T: Real>(
    truth: &MomentVector<T>,
    a: &PairAssignment,
    cfg: &ProtocolConfig<T>,
    gt: T,
    per_state: Option<(u64, usize)>,
    seed: u64,
) -> Result<(PairData<T>, PairData<T>)> {
    let g = truth.pair_slice(a.j, a.k);
    let gamma_ab = match a.orientation {
        Orientation::Forward => g,
        Orientation::Reversed => swap_pair(&g),
    };
    let e1 = pair_exact_expectations(&gamma_ab, [gt, gt], Preparation::Psi1.inits(), cfg.oracle_order)?;
    let e2 = pair_exact_expectations(&gamma_ab, [gt, gt], Preparation::Psi2.inits(), cfg.oracle_order)?;
    match per_state {
        None => Ok((PairData::Exact(e1), PairData::Exact(e2))),
        Some((per, batches)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut sample = |e: &[T]| -> Result<PairData<T>> {
                let sampler = BasisSampler::new(&two_qubit_density(e)?)?;
                Ok(PairData::Tallies(sample_batches(&sampler, per, batches, &mut rng)?))
            };
            Ok((sample(&e1)?, sample(&e2)?))
        }
    }
}
