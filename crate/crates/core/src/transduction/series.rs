//! Heisenberg-picture series for two-qubit Pauli expectations after the JC
//! interaction.
//!
//! With `H' = sum_l g_l (Q_l X_l - P_l Y_l)` (`g_l = gbar_l t`),
//! `U^dag O U = sum_k i^k / k! ad_{H'}^k(O)`. Each `ad^k(O)` is kept as an
//! exact sum of terms `c * g_1^{e_1} g_2^{e_2} * Q_1^a P_1^b Q_2^c P_2^d (x) sigma`
//! with Gaussian-integer `c`. Expectations then only need the ordered
//! monomial moments of the modes (quantum Wick) and the Bloch components of
//! the product qubit preparation; no density matrix is involved, so the
//! moment vector does not have to be physical.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::gaussian::{MomentTable, PAIR_LEN};
use crate::pauli::{Pauli, QubitInit};
use crate::scalar::{cx, Cx, Real};

type Coef = Complex<i128>;

/// `(exponents of Q1 P1 Q2 P2, Pauli indices on the two qubits, e1, e2)`.
type Key = ([u8; 4], [u8; 2], u8, u8);

type Poly = HashMap<Key, Coef>;

#[inline]
fn times_i_pow(c: Coef, k: u8) -> Coef {
    match k % 4 {
        0 => c,
        1 => Complex::new(-c.im, c.re),
        2 => Complex::new(-c.re, -c.im),
        _ => Complex::new(c.im, -c.re),
    }
}

/// `letter * Q^a P^b` for `letter` on the same mode, in `Q^. P^.` order.
fn left_mul(quad_is_q: bool, a: u8, b: u8) -> Vec<(Coef, u8, u8)> {
    if quad_is_q {
        vec![(Complex::new(1, 0), a + 1, b)]
    } else {
        // P Q^a = Q^a P - i a Q^{a-1}
        let mut v = vec![(Complex::new(1, 0), a, b + 1)];
        if a > 0 {
            v.push((Complex::new(0, -(a as i128)), a - 1, b));
        }
        v
    }
}

/// `Q^a P^b * letter`.
fn right_mul(quad_is_q: bool, a: u8, b: u8) -> Vec<(Coef, u8, u8)> {
    if quad_is_q {
        // P^b Q = Q P^b - i b P^{b-1}
        let mut v = vec![(Complex::new(1, 0), a + 1, b)];
        if b > 0 {
            v.push((Complex::new(0, -(b as i128)), a, b - 1));
        }
        v
    } else {
        vec![(Complex::new(1, 0), a, b + 1)]
    }
}

/// `[H', T]` with the couplings kept symbolic.
fn commutator(poly: &Poly) -> Poly {
    let mut out: Poly = HashMap::with_capacity(poly.len() * 4);
    for (&(exps, paulis, e1, e2), &c) in poly {
        for l in 0..2 {
            for (is_q, sigma, sign) in [(true, Pauli::X, 1i128), (false, Pauli::Y, -1i128)] {
                let tau = Pauli::from_index(paulis[l] as usize);
                let (ph_left, p_left) = sigma.mul(tau);
                let (ph_right, p_right) = tau.mul(sigma);
                let (a, b) = (exps[2 * l], exps[2 * l + 1]);
                let (ne1, ne2) = if l == 0 { (e1 + 1, e2) } else { (e1, e2 + 1) };
                let mut push = |mode: Vec<(Coef, u8, u8)>, ph: u8, p: Pauli, s: i128| {
                    for (mc, na, nb) in mode {
                        let mut ne = exps;
                        ne[2 * l] = na;
                        ne[2 * l + 1] = nb;
                        let mut np = paulis;
                        np[l] = p.index() as u8;
                        let val = times_i_pow(c * mc, ph) * (sign * s);
                        let e = out.entry((ne, np, ne1, ne2)).or_insert(Complex::new(0, 0));
                        *e += val;
                    }
                };
                push(left_mul(is_q, a, b), ph_left, p_left, 1);
                push(right_mul(is_q, a, b), ph_right, p_right, -1);
            }
        }
    }
    out.retain(|_, c| *c != Complex::new(0, 0));
    out
}

/// `ad_{H'}^k(O)` for `k = 0..=order` and every two-qubit Pauli `O`.
#[derive(Debug)]
pub struct Expansion {
    order: usize,
    /// `terms[obs][k]` with `obs = 4 * P_1 + P_2`.
    terms: Vec<Vec<Vec<(Key, Coef)>>>,
}

impl Expansion {
    fn build(order: usize) -> Self {
        let terms = (0..16)
            .map(|obs| {
                let mut poly: Poly = HashMap::new();
                poly.insert(([0; 4], [(obs / 4) as u8, (obs % 4) as u8], 0, 0), Complex::new(1, 0));
                let mut orders = Vec::with_capacity(order + 1);
                for k in 0..=order {
                    if k > 0 {
                        poly = commutator(&poly);
                    }
                    let mut v: Vec<(Key, Coef)> = poly.iter().map(|(k, c)| (*k, *c)).collect();
                    v.sort_by(|a, b| a.0.cmp(&b.0));
                    orders.push(v);
                }
                orders
            })
            .collect();
        Self { order, terms }
    }

    /// Cached expansion of the given order.
    pub fn get(order: usize) -> Arc<Self> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Expansion>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("expansion cache poisoned");
        guard
            .entry(order)
            .or_insert_with(|| Arc::new(Expansion::build(order)))
            .clone()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of symbolic terms at order `k` for observable `(p1, p2)`.
    pub fn term_count(&self, p1: Pauli, p2: Pauli, k: usize) -> usize {
        self.terms[4 * p1.index() + p2.index()][k].len()
    }
}

/// Wick moment table of a two-mode moment vector in the pair ordering.
///
/// `gamma` need not describe a physical state.
pub fn moment_table<T: Real>(gamma: &[T; PAIR_LEN], max_degree: usize) -> MomentTable<T, 4> {
    let mean = [gamma[0], gamma[1], gamma[2], gamma[3]];
    // non-centralised symmetrised second moments in quadrature order
    let raw = |i: usize, j: usize| -> T {
        let (mi, mj) = (i / 2, j / 2);
        if mi == mj {
            if i == j {
                gamma[4 + i]
            } else {
                gamma[8 + mi]
            }
        } else {
            let (a, b) = if mi < mj { (i % 2, j % 2) } else { (j % 2, i % 2) };
            gamma[10 + 2 * a + b]
        }
    };
    let half = T::lit(0.5);
    let g: [[Cx<T>; 4]; 4] = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let omega = if i / 2 == j / 2 && i != j {
                if i < j {
                    half
                } else {
                    -half
                }
            } else {
                T::zero()
            };
            cx(raw(i, j) - mean[i] * mean[j], omega)
        })
    });
    MomentTable::new(&mean, &g, max_degree)
}

/// Expansion specialised to fixed couplings and qubit preparations:
/// for each requested observable and order, a list of `(monomial, weight)`.
#[derive(Clone, Debug)]
pub struct PairSeries<T: Real> {
    order: usize,
    observables: Vec<[Pauli; 2]>,
    terms: Vec<Vec<Vec<([u8; 4], Cx<T>)>>>,
}

impl<T: Real> PairSeries<T> {
    pub fn new(order: usize, gt: [T; 2], inits: [QubitInit; 2], observables: &[[Pauli; 2]]) -> Self {
        let exp = Expansion::get(order);
        let mut fact = T::one();
        let inv_fact: Vec<T> = (0..=order)
            .map(|k| {
                if k > 0 {
                    fact = fact * T::from_usize_lossy(k);
                }
                T::one() / fact
            })
            .collect();
        let terms = observables
            .iter()
            .map(|&[p1, p2]| {
                exp.terms[4 * p1.index() + p2.index()]
                    .iter()
                    .enumerate()
                    .map(|(k, list)| {
                        let mut merged: HashMap<[u8; 4], Cx<T>> = HashMap::new();
                        for &((exps, paulis, e1, e2), c) in list {
                            let q = inits[0].expectation(Pauli::from_index(paulis[0] as usize))
                                * inits[1].expectation(Pauli::from_index(paulis[1] as usize));
                            if q == 0 {
                                continue;
                            }
                            let c = times_i_pow(c, (k % 4) as u8) * (q as i128);
                            let scale = inv_fact[k] * gt[0].powi(e1 as i32) * gt[1].powi(e2 as i32);
                            let w = cx(T::lit(c.re as f64), T::lit(c.im as f64)) * scale;
                            *merged.entry(exps).or_insert(cx(T::zero(), T::zero())) += w;
                        }
                        let mut v: Vec<_> = merged.into_iter().collect();
                        v.sort_by(|a, b| a.0.cmp(&b.0));
                        v
                    })
                    .collect()
            })
            .collect();
        Self {
            order,
            observables: observables.to_vec(),
            terms,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn observables(&self) -> &[[Pauli; 2]] {
        &self.observables
    }

    /// `contributions[obs][k]`: the order-`k` part of each expectation.
    pub fn contributions(&self, table: &MomentTable<T, 4>) -> Vec<Vec<T>> {
        assert!(table.max_degree() >= self.order, "moment table too shallow");
        self.terms
            .iter()
            .map(|orders| {
                orders
                    .iter()
                    .map(|list| {
                        list.iter()
                            .fold(cx(T::zero(), T::zero()), |acc, (e, w)| acc + *w * table.get(*e))
                            .re
                    })
                    .collect()
            })
            .collect()
    }
}

/// Truncation check on the order-by-order magnitudes summed over all entries:
/// the last two orders must be smaller than the two before.
pub fn check_convergence<T: Real>(contrib: &[Vec<T>], order: usize) -> Result<()> {
    if order < 4 {
        return Ok(());
    }
    let size = |k: usize| contrib.iter().map(|c| c[k].abs()).fold(T::zero(), |a, b| a + b);
    let last = size(order) + size(order - 1);
    let prev = size(order - 2) + size(order - 3);
    if last > T::lit(1e-12) && last >= prev {
        return Err(Error::SeriesNotConverged {
            order,
            change: last.to_f64_lossy(),
        });
    }
    Ok(())
}
