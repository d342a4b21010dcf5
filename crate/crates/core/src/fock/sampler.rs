use rand::Rng;

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString};
use crate::scalar::Real;

use super::FockOperator;

/// Outcome distributions of an `n`-qubit state for every product of
/// single-qubit `X`/`Y`/`Z` measurements.
///
/// Bases are indexed in base 3 (`X = 0`, `Y = 1`, `Z = 2`, qubit 0 most
/// significant) and outcomes as bit strings (bit set means `-1`, qubit 0 most
/// significant).
#[derive(Clone, Debug)]
pub struct BasisSampler {
    n_qubits: usize,
    cumulative: Vec<Vec<f64>>,
}

pub fn basis_index(bases: &[Pauli]) -> usize {
    bases.iter().fold(0, |acc, b| acc * 3 + (b.index() - 1))
}

impl BasisSampler {
    pub fn new<T: Real>(rho: &FockOperator<T>) -> Result<Self> {
        let n = rho.dims().len();
        if rho.dims().iter().any(|&d| d != 2) {
            return Err(Error::DimensionMismatch("sampler needs an all-qubit state".into()));
        }
        let combos = 3usize.pow(n as u32);
        let mut cumulative = Vec::with_capacity(combos);
        for c in 0..combos {
            let bases: Vec<Pauli> = (0..n)
                .map(|q| Pauli::BASES[(c / 3usize.pow((n - 1 - q) as u32)) % 3])
                .collect();
            // <B_S> for every subset S of qubits
            let subset_exp: Vec<f64> = (0..1usize << n)
                .map(|mask| {
                    let s = PauliString(
                        (0..n)
                            .map(|q| if mask >> (n - 1 - q) & 1 == 1 { bases[q] } else { Pauli::I })
                            .collect(),
                    );
                    rho.pauli_expectation(&s).map(|x| x.to_f64_lossy())
                })
                .collect::<Result<_>>()?;
            let norm = subset_exp[0];
            let mut acc = 0.0;
            let mut cdf = Vec::with_capacity(1 << n);
            for outcome in 0..1usize << n {
                // P(s) = 2^-n sum_S prod_{q in S} s_q <B_S>
                let p: f64 = subset_exp
                    .iter()
                    .enumerate()
                    .map(|(mask, e)| if (mask & outcome).count_ones() % 2 == 1 { -e } else { *e })
                    .sum::<f64>()
                    / (1u64 << n) as f64
                    / norm;
                acc += p.max(0.0);
                cdf.push(acc);
            }
            cumulative.push(cdf);
        }
        for cdf in &mut cumulative {
            let total = *cdf.last().expect("nonempty");
            cdf.iter_mut().for_each(|x| *x /= total);
        }
        Ok(Self { n_qubits: n, cumulative })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Outcome probabilities for the given bases.
    pub fn probabilities(&self, bases: &[Pauli]) -> Vec<f64> {
        let cdf = &self.cumulative[basis_index(bases)];
        let mut prev = 0.0;
        cdf.iter()
            .map(|&c| {
                let p = c - prev;
                prev = c;
                p
            })
            .collect()
    }

    /// Draw one outcome bit string (bit set means `-1`).
    pub fn sample_bits<R: Rng + ?Sized>(&self, basis: usize, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let cdf = &self.cumulative[basis];
        cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
    }

    pub fn sample<R: Rng + ?Sized>(&self, bases: &[Pauli], rng: &mut R) -> Vec<i8> {
        let bits = self.sample_bits(basis_index(bases), rng);
        (0..self.n_qubits)
            .map(|q| if bits >> (self.n_qubits - 1 - q) & 1 == 1 { -1 } else { 1 })
            .collect()
    }
}

/// One Born-rule draw of `rho` measured qubit-wise in `bases`.
pub fn sample_in_bases<T: Real, R: Rng + ?Sized>(rho: &FockOperator<T>, bases: &[Pauli], rng: &mut R) -> Result<Vec<i8>> {
    if bases.len() != rho.dims().len() || bases.contains(&Pauli::I) {
        return Err(Error::InvalidParameter("one X/Y/Z basis per qubit required".into()));
    }
    Ok(BasisSampler::new(rho)?.sample(bases, rng))
}
