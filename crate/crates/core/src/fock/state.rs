use rayon::prelude::*;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::gaussian::{OperatorWord, Quad, StatePrepParams};
use crate::scalar::{cx, Cx, Real};

use super::ops::{displacement, squeezer, TwoModeSqueezer};
use super::tensor::{apply_local, apply_quadrature, embed, inner, norm_sqr, project};
use super::FockOperator;

/// Numerical settings for [`build_state`].
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FockBuildOptions {
    /// Extra levels per mode used while applying squeezers and displacements.
    pub pad: usize,
    /// Thermal occupation tuples with joint probability below this are dropped
    /// (their weight counts as leakage).
    pub prune: f64,
    /// Largest tolerated trace deficit.
    pub leakage_budget: f64,
}

impl Default for FockBuildOptions {
    fn default() -> Self {
        Self {
            pad: 20,
            prune: 1e-14,
            leakage_budget: 1e-6,
        }
    }
}

/// Truncated Fock-space density matrix stored as a spectral ensemble
/// `rho = sum_w p_w |psi_w><psi_w|`, with `|psi_w> = D S |n_w>` projected onto
/// `n_trunc` levels per mode.
///
/// The vectors are not renormalised after projection, so `trace(rho)` is
/// `1 - leakage`.
#[derive(Clone, Debug)]
pub struct FockEnsemble<T: Real> {
    n_modes: usize,
    n_trunc: usize,
    weights: Vec<T>,
    vectors: Vec<Vec<Cx<T>>>,
    leakage: T,
}

fn thermal_probs(nbar: f64, n_trunc: usize) -> Vec<f64> {
    if nbar == 0.0 {
        return vec![1.0];
    }
    let r = nbar / (nbar + 1.0);
    (0..n_trunc).map(|n| r.powi(n as i32) / (nbar + 1.0)).collect()
}

/// All occupation tuples whose joint thermal probability is at least `prune`.
fn occupation_tuples(probs: &[Vec<f64>], prune: f64) -> Vec<(Vec<usize>, f64)> {
    let mut out = Vec::new();
    let mut stack = vec![(Vec::new(), 1.0)];
    while let Some((prefix, p)) = stack.pop() {
        let j: usize = prefix.len();
        if j == probs.len() {
            out.push((prefix, p));
            continue;
        }
        for (n, &q) in probs[j].iter().enumerate() {
            let joint = p * q;
            if joint < prune {
                // probabilities decrease with n
                break;
            }
            let mut next: Vec<usize> = prefix.clone();
            next.push(n);
            stack.push((next, joint));
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

/// Build `D S rho_th S^dag D^dag` on `n_trunc` levels per mode.
pub fn build_state<T: Real>(p: &StatePrepParams<T>, n_trunc: usize) -> Result<FockEnsemble<T>> {
    build_state_with(p, n_trunc, FockBuildOptions::default())
}

pub fn build_state_with<T: Real>(
    p: &StatePrepParams<T>,
    n_trunc: usize,
    opts: FockBuildOptions,
) -> Result<FockEnsemble<T>> {
    p.validate()?;
    if n_trunc < 2 {
        return Err(Error::InvalidParameter(format!("n_trunc = {n_trunc} must be at least 2")));
    }
    let n = p.n_modes();
    let big = n_trunc + opts.pad;
    let big_dims = vec![big; n];
    let dims = vec![n_trunc; n];

    let zero = cx(T::zero(), T::zero());
    let single: Vec<_> = p
        .single_squeeze
        .iter()
        .map(|&z| (z != zero).then(|| squeezer::<T>(big, z)))
        .collect();
    let pairs: Vec<_> = p
        .ordered_pairs()
        .into_iter()
        .filter(|&(_, _, z)| z != zero)
        .map(|(j, k, z)| (j, k, TwoModeSqueezer::new(big, z)))
        .collect();
    let disp: Vec<_> = p
        .displacement
        .iter()
        .map(|&a| (a != zero).then(|| displacement::<T>(big, a)))
        .collect();

    let probs: Vec<Vec<f64>> = p
        .nbar
        .iter()
        .map(|nb| thermal_probs(nb.to_f64_lossy(), n_trunc))
        .collect();
    let tuples = occupation_tuples(&probs, opts.prune);
    let kept_weight: f64 = tuples.iter().map(|t| t.1).sum();

    let strides = super::tensor::strides(&big_dims);
    let built: Vec<(f64, Vec<Cx<T>>)> = tuples
        .into_par_iter()
        .map(|(occ, w)| {
            let mut v = vec![zero; big.pow(n as u32)];
            let idx: usize = occ.iter().zip(&strides).map(|(o, s)| o * s).sum();
            v[idx] = cx(T::one(), T::zero());
            for (j, s) in single.iter().enumerate() {
                if let Some(s) = s {
                    v = apply_local(&v, &big_dims, j, s);
                }
            }
            for (j, k, s) in &pairs {
                v = s.apply(&v, &big_dims, *j, *k);
            }
            for (j, d) in disp.iter().enumerate() {
                if let Some(d) = d {
                    v = apply_local(&v, &big_dims, j, d);
                }
            }
            (w, project(&v, &big_dims, &dims))
        })
        .collect();
    let mut leakage = 1.0 - kept_weight;
    let mut weights = Vec::with_capacity(built.len());
    let mut vectors = Vec::with_capacity(built.len());
    for (w, v) in built {
        leakage += w * (1.0 - norm_sqr(&v).to_f64_lossy());
        weights.push(T::lit(w));
        vectors.push(v);
    }
    let leakage = leakage.max(0.0);
    if leakage > opts.leakage_budget {
        return Err(Error::LeakageExceeded {
            leakage,
            budget: opts.leakage_budget,
        });
    }
    Ok(FockEnsemble {
        n_modes: n,
        n_trunc,
        weights,
        vectors,
        leakage: T::lit(leakage),
    })
}

impl<T: Real> FockEnsemble<T> {
    /// Ensemble from explicit weighted vectors on `n_trunc` levels per mode.
    pub fn from_components(n_modes: usize, n_trunc: usize, components: Vec<(T, Vec<Cx<T>>)>) -> Result<Self> {
        let dim = n_trunc.pow(n_modes as u32);
        if let Some((_, v)) = components.iter().find(|(_, v)| v.len() != dim) {
            return Err(Error::DimensionMismatch(format!("vector of length {} for dimension {dim}", v.len())));
        }
        let trace: T = components.iter().map(|(w, v)| *w * norm_sqr(v)).sum();
        let (weights, vectors) = components.into_iter().unzip();
        Ok(Self {
            n_modes,
            n_trunc,
            weights,
            vectors,
            leakage: (T::one() - trace).max(T::zero()),
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn n_trunc(&self) -> usize {
        self.n_trunc
    }

    pub fn dims(&self) -> Vec<usize> {
        vec![self.n_trunc; self.n_modes]
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn components(&self) -> impl Iterator<Item = (T, &[Cx<T>])> {
        self.weights.iter().copied().zip(self.vectors.iter().map(|v| v.as_slice()))
    }

    /// `1 - trace(rho)`.
    pub fn leakage(&self) -> T {
        self.leakage
    }

    pub fn trace(&self) -> T {
        self.components().map(|(w, v)| w * norm_sqr(v)).sum()
    }

    /// Thermal occupation probabilities on the diagonal of mode `mode`'s
    /// reduced state.
    pub fn photon_distribution(&self, mode: usize) -> Vec<T> {
        let dims = self.dims();
        let st = super::tensor::strides(&dims)[mode];
        let mut p = vec![T::zero(); self.n_trunc];
        for (w, v) in self.components() {
            for (i, x) in v.iter().enumerate() {
                p[(i / st) % self.n_trunc] += w * x.norm_sqr();
            }
        }
        p
    }

    /// Dense density matrix; only sensible for small total dimension.
    pub fn to_operator(&self) -> FockOperator<T> {
        self.reduced_operator(&(0..self.n_modes).collect::<Vec<_>>())
    }

    /// Dense reduced density matrix on the modes in `keep` (in that order).
    pub fn reduced_operator(&self, keep: &[usize]) -> FockOperator<T> {
        let dims = self.dims();
        let st = super::tensor::strides(&dims);
        let n = self.n_trunc;
        let kd = n.pow(keep.len() as u32);
        let traced: Vec<usize> = (0..self.n_modes).filter(|m| !keep.contains(m)).collect();
        let od = n.pow(traced.len() as u32);
        let index = |k: usize, o: usize| -> usize {
            let mut i = 0;
            let mut rem = k;
            for &m in keep.iter().rev() {
                i += (rem % n) * st[m];
                rem /= n;
            }
            let mut rem = o;
            for &m in traced.iter().rev() {
                i += (rem % n) * st[m];
                rem /= n;
            }
            i
        };
        let mut rho = crate::linalg::CMatrix::zeros(kd, kd);
        let mut block = vec![cx(T::zero(), T::zero()); kd * od];
        for (w, v) in self.components() {
            for k in 0..kd {
                for o in 0..od {
                    block[k * od + o] = v[index(k, o)];
                }
            }
            for a in 0..kd {
                let ra = &block[a * od..(a + 1) * od];
                for b in 0..=a {
                    let rb = &block[b * od..(b + 1) * od];
                    let val = inner(rb, ra) * w;
                    rho[(a, b)] += val;
                    if a != b {
                        rho[(b, a)] += val.conj();
                    }
                }
            }
        }
        FockOperator::new(vec![n; keep.len()], rho).expect("consistent dimensions")
    }

    /// `tr(rho R_{w_1} ... R_{w_k})` with the quadratures applied in a space
    /// enlarged by `k` levels, so no truncation error enters.
    pub fn moment(&self, word: &OperatorWord) -> Cx<T> {
        let k = word.len();
        let dims = self.dims();
        let big: Vec<usize> = vec![self.n_trunc + k; self.n_modes];
        let mut acc = cx(T::zero(), T::zero());
        for (w, v) in self.components() {
            let psi = embed(v, &dims, &big);
            let mut x = psi.clone();
            for l in word.0.iter().rev() {
                x = apply_quadrature(&x, &big, l.mode, l.quad);
            }
            acc += inner(&psi, &x) * w;
        }
        acc
    }

    /// Every ordered two-mode moment up to `max_order`, computed in one pass.
    pub fn two_mode_moments(&self, max_order: usize) -> TwoModeMoments<T> {
        assert_eq!(self.n_modes, 2, "two_mode_moments needs two modes");
        let dims = self.dims();
        let d = self.n_trunc + max_order;
        let big = [d, d];
        let words = single_mode_words(max_order);
        let mut table: HashMap<(Vec<Quad>, Vec<Quad>), Cx<T>> = HashMap::new();
        for (w, v) in self.components() {
            let psi = embed(v, &dims, &big);
            // left[a] = A^dag psi on mode 0, right[b] = B psi on mode 1
            let mut left: HashMap<&[Quad], Vec<Cx<T>>> = HashMap::new();
            let mut right: HashMap<&[Quad], Vec<Cx<T>>> = HashMap::new();
            left.insert(&[], psi.clone());
            right.insert(&[], psi.clone());
            for word in words.iter().filter(|w| !w.is_empty()) {
                let (init, last) = word.split_at(word.len() - 1);
                let l = apply_quadrature(&left[init], &big, 0, last[0]);
                left.insert(word.as_slice(), l);
                let r = apply_quadrature(&right[&word[1..]], &big, 1, word[0]);
                right.insert(word.as_slice(), r);
            }
            for a in &words {
                for b in words.iter().filter(|b| a.len() + b.len() <= max_order) {
                    let val = inner(&left[a.as_slice()], &right[b.as_slice()]) * w;
                    *table.entry((a.clone(), b.clone())).or_insert(cx(T::zero(), T::zero())) += val;
                }
            }
        }
        TwoModeMoments { max_order, table }
    }
}

/// All quadrature words on one mode up to a given length, shortest first.
fn single_mode_words(max_len: usize) -> Vec<Vec<Quad>> {
    let mut all = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max_len {
        frontier = frontier
            .into_iter()
            .flat_map(|w: Vec<Quad>| {
                [Quad::Q, Quad::P].map(|q| {
                    let mut w2 = w.clone();
                    w2.push(q);
                    w2
                })
            })
            .collect();
        all.extend(frontier.iter().cloned());
    }
    all
}

/// Lookup table produced by [`FockEnsemble::two_mode_moments`].
#[derive(Clone, Debug)]
pub struct TwoModeMoments<T> {
    max_order: usize,
    table: HashMap<(Vec<Quad>, Vec<Quad>), Cx<T>>,
}

impl<T: Real> TwoModeMoments<T> {
    /// Moment of an ordered word on modes 0 and 1. Letters of different modes
    /// commute, so the word factorises into its per-mode subwords.
    pub fn get(&self, word: &OperatorWord) -> Option<Cx<T>> {
        if word.len() > self.max_order {
            return None;
        }
        let a: Vec<Quad> = word.0.iter().filter(|l| l.mode == 0).map(|l| l.quad).collect();
        let b: Vec<Quad> = word.0.iter().filter(|l| l.mode == 1).map(|l| l.quad).collect();
        if a.len() + b.len() != word.len() {
            return None;
        }
        self.table.get(&(a, b)).copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::Letter;

    #[test]
    fn vacuum_is_a_single_fock_state() {
        let e = build_state(&StatePrepParams::<f64>::vacuum(2), 10).unwrap();
        assert_eq!(e.len(), 1);
        let rho = e.to_operator();
        assert!((rho.matrix()[(0, 0)].re - 1.0).abs() < 1e-15);
        assert!(rho.matrix().as_slice().iter().skip(1).all(|x| x.norm() < 1e-15));
    }

    #[test]
    fn thermal_distribution_is_geometric() {
        let mut p = StatePrepParams::<f64>::vacuum(1);
        p.nbar[0] = 0.3;
        let e = build_state(&p, 60).unwrap();
        let dist = e.photon_distribution(0);
        for (n, &pn) in dist.iter().enumerate().take(20) {
            let expected = 0.3f64.powi(n as i32) / 1.3f64.powi(n as i32 + 1);
            assert!((pn - expected).abs() < 1e-15, "n = {n}");
        }
    }

    #[test]
    fn too_small_truncation_is_reported() {
        let mut p = StatePrepParams::<f64>::vacuum(1);
        p.displacement[0] = cx(2.0, 0.0);
        assert!(matches!(build_state(&p, 6), Err(Error::LeakageExceeded { .. })));
    }

    #[test]
    fn displaced_vacuum_mean() {
        let mut p = StatePrepParams::<f64>::vacuum(1);
        p.displacement[0] = cx(0.5f64.sqrt(), 0.0);
        let e = build_state(&p, 40).unwrap();
        let q = e.moment(&OperatorWord::new(vec![Letter::q(0)]));
        assert!((q.re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn batched_moments_match_direct_ones() {
        let mut p = StatePrepParams::<f64>::vacuum(2);
        p.nbar = vec![0.2, 0.1];
        p.single_squeeze[1] = cx(0.2, 0.1);
        p.two_mode_squeeze.push((0, 1, cx(0.3, 0.0)));
        p.displacement = vec![cx(0.3, -0.2), cx(0.1, 0.4)];
        let e = build_state(&p, 25).unwrap();
        let table = e.two_mode_moments(4);
        for w in OperatorWord::all_of_order(2, 3).into_iter().step_by(5) {
            let direct = e.moment(&w);
            assert!((table.get(&w).unwrap() - direct).norm() < 1e-12);
        }
    }

    #[test]
    fn reduced_operator_has_marginal_trace() {
        let mut p = StatePrepParams::<f64>::vacuum(2);
        p.nbar = vec![0.2, 0.0];
        p.two_mode_squeeze.push((0, 1, cx(0.2, 0.0)));
        let e = build_state(&p, 12).unwrap();
        let full = e.to_operator();
        let red = e.reduced_operator(&[1]);
        let red2 = full.partial_trace(&[1]);
        assert!(red.matrix().sub(red2.matrix()).max_abs() < 1e-14);
        assert!((red.trace().re - e.trace()).abs() < 1e-14);
    }
}
