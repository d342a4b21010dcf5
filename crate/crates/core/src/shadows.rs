//! Random single-qubit Pauli measurements and median-of-means estimation of
//! low-weight Pauli observables.
//!
//! Two data representations are supported. [`ShadowRecord`] lists keep every
//! measured copy; [`Tally`] keeps only the count of each `(bases, outcomes)`
//! cell, which is all the estimator ever looks at. Tallies can be sampled
//! directly from outcome distributions in time independent of the number of
//! copies.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::BasisSampler;
use crate::pauli::{Pauli, PauliString};

pub const DEFAULT_MOM_CONSTANT: f64 = 34.0;

/// Number of one- and two-qubit Pauli observables on `n` qubits.
pub fn observable_count(n: usize) -> usize {
    9 * n * n.saturating_sub(1) / 2 + 3 * n
}

/// `ceil(c 3^k ln(2B/delta) / eps'^2)`.
pub fn required_samples_with(constant: f64, k: u32, b: usize, eps_prime: f64, delta: f64) -> Result<u64> {
    if !(constant > 0.0 && eps_prime > 0.0 && delta > 0.0 && delta < 1.0) || b == 0 {
        return Err(Error::InvalidParameter(format!(
            "required_samples needs positive arguments (c={constant}, B={b}, eps'={eps_prime}, delta={delta})"
        )));
    }
    let count = constant * 3f64.powi(k as i32) * (2.0 * b as f64 / delta).ln() / (eps_prime * eps_prime);
    Ok(count.ceil() as u64)
}

pub fn required_samples(k: u32, b: usize, eps_prime: f64, delta: f64) -> Result<u64> {
    required_samples_with(DEFAULT_MOM_CONSTANT, k, b, eps_prime, delta)
}

/// Median-of-means batch count `ceil(2 ln(2B/delta))`.
pub fn batch_count(b: usize, delta: f64) -> usize {
    ((2.0 * (2.0 * b.max(1) as f64 / delta).ln()).ceil() as usize).max(1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Aggregation {
    MedianOfMeans { batches: usize },
    Mean,
}

impl Aggregation {
    pub fn for_targets(b: usize, delta: f64) -> Self {
        Aggregation::MedianOfMeans {
            batches: batch_count(b, delta),
        }
    }

    pub fn batches(self) -> usize {
        match self {
            Aggregation::MedianOfMeans { batches } => batches,
            Aggregation::Mean => 1,
        }
    }
}

/// One measured copy.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShadowRecord {
    pub state_id: usize,
    pub bases: Vec<Pauli>,
    pub outcomes: Vec<i8>,
}

impl ShadowRecord {
    pub fn n_qubits(&self) -> usize {
        self.bases.len()
    }

    /// Single-record estimate of `target`: `prod_{q in supp} 3 s_q` when
    /// every basis matches, else 0.
    pub fn estimate(&self, target: &PauliString) -> f64 {
        let mut v = 1.0;
        for (q, &p) in target.0.iter().enumerate() {
            if p == Pauli::I {
                continue;
            }
            if self.bases[q] != p {
                return 0.0;
            }
            v *= 3.0 * self.outcomes[q] as f64;
        }
        v
    }

    pub fn restrict(&self, qubits: &[usize]) -> Self {
        Self {
            state_id: self.state_id,
            bases: qubits.iter().map(|&q| self.bases[q]).collect(),
            outcomes: qubits.iter().map(|&q| self.outcomes[q]).collect(),
        }
    }

    /// `state_id<TAB>bases<TAB>outcomes`.
    pub fn to_line(&self) -> String {
        let mut s = format!("{}\t", self.state_id);
        s.extend(self.bases.iter().map(|b| b.to_char()));
        s.push('\t');
        s.extend(self.outcomes.iter().map(|&o| if o > 0 { '+' } else { '-' }));
        s
    }

    pub fn from_line(line: &str) -> Result<Self> {
        let mut parts = line.trim_end().split('\t');
        let (Some(id), Some(bases), Some(outs), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
            return Err(Error::Parse(format!("malformed shadow record `{line}`")));
        };
        let state_id = id.parse().map_err(|_| Error::Parse(format!("bad state id `{id}`")))?;
        let bases = bases
            .chars()
            .map(|c| match Pauli::from_char(c)? {
                Pauli::I => Err(Error::Parse("identity is not a measurement basis".into())),
                p => Ok(p),
            })
            .collect::<Result<Vec<_>>>()?;
        let outcomes = outs
            .chars()
            .map(|c| match c {
                '+' => Ok(1),
                '-' => Ok(-1),
                _ => Err(Error::Parse(format!("bad outcome `{c}`"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if bases.len() != outcomes.len() {
            return Err(Error::Parse(format!("record `{line}` has mismatched lengths")));
        }
        Ok(Self {
            state_id,
            bases,
            outcomes,
        })
    }
}

pub fn write_records<W: Write>(mut w: W, records: &[ShadowRecord]) -> Result<()> {
    for r in records {
        writeln!(w, "{}", r.to_line())?;
    }
    Ok(())
}

pub fn read_records<R: BufRead>(r: R) -> Result<Vec<ShadowRecord>> {
    r.lines()
        .filter(|l| l.as_ref().map_or(true, |s| !s.trim().is_empty()))
        .map(|l| ShadowRecord::from_line(&l?))
        .collect()
}

fn random_bases<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Pauli> {
    (0..n).map(|_| Pauli::BASES[rng.random_range(0..3)]).collect()
}

/// Measure `t` copies in independently uniform random bases.
///
/// `source(bases, rng)` returns one outcome per qubit. Every copy draws from
/// its own generator seeded from `rng`, so results do not depend on the
/// thread count.
pub fn collect_shadows<R, F>(source: F, n_qubits: usize, state_id: usize, t: usize, rng: &mut R) -> Result<Vec<ShadowRecord>>
where
    R: Rng + ?Sized,
    F: Fn(&[Pauli], &mut ChaCha8Rng) -> Result<Vec<i8>> + Sync,
{
    if t == 0 {
        return Err(Error::InvalidParameter("at least one copy is required".into()));
    }
    let seeds: Vec<u64> = (0..t).map(|_| rng.random()).collect();
    seeds
        .into_par_iter()
        .map(|s| {
            let mut r = ChaCha8Rng::seed_from_u64(s);
            let bases = random_bases(n_qubits, &mut r);
            let outcomes = source(&bases, &mut r)?;
            if outcomes.len() != n_qubits {
                return Err(Error::DimensionMismatch("source returned wrong outcome count".into()));
            }
            Ok(ShadowRecord {
                state_id,
                bases,
                outcomes,
            })
        })
        .collect()
}

/// Point estimate for one target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShadowEstimate {
    pub target: PauliString,
    pub value: f64,
    pub samples: u64,
    pub batches: usize,
}

fn validate_targets(targets: &[PauliString], n: usize) -> Result<()> {
    for t in targets {
        if t.n_qubits() != n || t.weight() == 0 || t.weight() > 2 {
            return Err(Error::InvalidParameter(format!("target {t} must have weight 1 or 2 on {n} qubits")));
        }
    }
    Ok(())
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Split `t` items into `k` near-equal consecutive batches.
fn batch_bounds(t: usize, k: usize) -> Vec<(usize, usize)> {
    (0..k).map(|i| (i * t / k, (i + 1) * t / k)).collect()
}

/// Estimate each target from a record list.
pub fn estimate_paulis(records: &[ShadowRecord], targets: &[PauliString], agg: Aggregation) -> Result<Vec<ShadowEstimate>> {
    let Some(first) = records.first() else {
        return Err(Error::NoRecords);
    };
    validate_targets(targets, first.n_qubits())?;
    let k = agg.batches().clamp(1, records.len());
    let bounds = batch_bounds(records.len(), k);
    Ok(targets
        .par_iter()
        .map(|target| {
            let means: Vec<f64> = bounds
                .iter()
                .map(|&(a, b)| records[a..b].iter().map(|r| r.estimate(target)).sum::<f64>() / (b - a) as f64)
                .collect();
            ShadowEstimate {
                target: target.clone(),
                value: median(means),
                samples: records.len() as u64,
                batches: k,
            }
        })
        .collect())
}

/// Counts of every `(bases, outcomes)` cell for `n` qubits. Cell index is
/// `basis_index * 2^n + outcome_bits`, both with qubit 0 most significant
/// (`X, Y, Z = 0, 1, 2`; bit set means `-1`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    n_qubits: usize,
    counts: Vec<u64>,
}

impl Tally {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            counts: vec![0; 3usize.pow(n_qubits as u32) << n_qubits],
        }
    }

    pub fn from_records(records: &[ShadowRecord]) -> Result<Self> {
        let first = records.first().ok_or(Error::NoRecords)?;
        let mut t = Self::new(first.n_qubits());
        for r in records {
            t.push(r);
        }
        Ok(t)
    }

    pub fn push(&mut self, r: &ShadowRecord) {
        let n = self.n_qubits;
        let basis = crate::fock::basis_index(&r.bases);
        let bits = r
            .outcomes
            .iter()
            .fold(0usize, |acc, &o| (acc << 1) | usize::from(o < 0));
        self.counts[(basis << n) | bits] += 1;
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Tally of `t` copies measured in uniform random bases, drawn from the
    /// exact outcome distributions of `sampler`.
    pub fn sample<R: Rng + ?Sized>(sampler: &BasisSampler, t: u64, rng: &mut R) -> Self {
        let n = sampler.n_qubits();
        let n_bases = 3usize.pow(n as u32);
        let mut tally = Self::new(n);
        let per_basis = multinomial(t, &vec![1.0 / n_bases as f64; n_bases], rng);
        for (b, &m) in per_basis.iter().enumerate() {
            if m == 0 {
                continue;
            }
            let bases: Vec<Pauli> = (0..n)
                .map(|q| Pauli::BASES[(b / 3usize.pow((n - 1 - q) as u32)) % 3])
                .collect();
            let probs = sampler.probabilities(&bases);
            for (o, c) in multinomial(m, &probs, rng).into_iter().enumerate() {
                tally.counts[(b << n) | o] += c;
            }
        }
        tally
    }

    /// Sum of single-record estimates of `target` over all tallied copies.
    pub fn estimate_sum(&self, target: &PauliString) -> f64 {
        let n = self.n_qubits;
        let support = target.support();
        let scale = 3f64.powi(support.len() as i32);
        let mut sum = 0i128;
        for b in 0..3usize.pow(n as u32) {
            let matches = support.iter().all(|&q| {
                let digit = (b / 3usize.pow((n - 1 - q) as u32)) % 3;
                Pauli::BASES[digit] == target.0[q]
            });
            if !matches {
                continue;
            }
            for o in 0..1usize << n {
                let c = self.counts[(b << n) | o];
                if c == 0 {
                    continue;
                }
                let flips = support.iter().filter(|&&q| (o >> (n - 1 - q)) & 1 == 1).count();
                sum += if flips % 2 == 0 { c as i128 } else { -(c as i128) };
            }
        }
        scale * sum as f64
    }

    /// Marginal tally on the listed qubits (in the listed order).
    pub fn restrict(&self, qubits: &[usize]) -> Self {
        let n = self.n_qubits;
        let m = qubits.len();
        let mut out = Self::new(m);
        for b in 0..3usize.pow(n as u32) {
            let nb = qubits
                .iter()
                .fold(0, |acc, &q| acc * 3 + (b / 3usize.pow((n - 1 - q) as u32)) % 3);
            for o in 0..1usize << n {
                let no = qubits.iter().fold(0, |acc, &q| (acc << 1) | ((o >> (n - 1 - q)) & 1));
                out.counts[(nb << m) | no] += self.counts[(b << n) | o];
            }
        }
        out
    }
}

/// Multinomial draw by sequential conditional binomials.
pub fn multinomial<R: Rng + ?Sized>(t: u64, probs: &[f64], rng: &mut R) -> Vec<u64> {
    let mut out = vec![0; probs.len()];
    let mut remaining = t;
    let mut mass: f64 = probs.iter().map(|p| p.max(0.0)).sum();
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        let p = p.max(0.0);
        if i + 1 == probs.len() || mass <= 0.0 {
            out[i] = remaining;
            break;
        }
        let q = (p / mass).clamp(0.0, 1.0);
        let c = Binomial::new(remaining, q).expect("valid binomial").sample(rng);
        out[i] = c;
        remaining -= c;
        mass -= p;
    }
    out
}

/// Tallies for median-of-means batches of `t` copies in total.
pub fn sample_batches<R: Rng + ?Sized>(sampler: &BasisSampler, t: u64, batches: usize, rng: &mut R) -> Result<Vec<Tally>> {
    if t == 0 {
        return Err(Error::InvalidParameter("at least one copy is required".into()));
    }
    let k = batches.clamp(1, t as usize) as u64;
    Ok((0..k)
        .map(|i| Tally::sample(sampler, (i + 1) * t / k - i * t / k, rng))
        .collect())
}

/// Median over batches of each batch mean.
pub fn estimate_from_batches(batches: &[Tally], targets: &[PauliString]) -> Result<Vec<ShadowEstimate>> {
    let Some(first) = batches.first() else {
        return Err(Error::NoRecords);
    };
    validate_targets(targets, first.n_qubits())?;
    let totals: Vec<u64> = batches.iter().map(Tally::total).collect();
    if totals.contains(&0) {
        return Err(Error::NoRecords);
    }
    let samples = totals.iter().sum();
    Ok(targets
        .iter()
        .map(|target| {
            let means = batches
                .iter()
                .zip(&totals)
                .map(|(b, &t)| b.estimate_sum(target) / t as f64)
                .collect();
            ShadowEstimate {
                target: target.clone(),
                value: median(means),
                samples,
                batches: batches.len(),
            }
        })
        .collect())
}

/// Human-readable dump of estimates, one per line.
pub fn format_estimates(estimates: &[ShadowEstimate]) -> String {
    let mut s = String::new();
    for e in estimates {
        let _ = writeln!(s, "{}\t{:.6}\t{}\t{}", e.target, e.value, e.samples, e.batches);
    }
    s
}
