//! Exact truncated-Fock simulation of the transduction experiment: state
//! preparation, Jaynes-Cummings evolution of mode-qubit pairs, reduction to
//! the qubits, Pauli expectations and Born-rule sampling.
//!
//! Tensor factors are ordered modes first, then qubits.

mod ops;
mod sampler;
mod state;
pub mod tensor;

pub use ops::{
    annihilation, displacement, jc_generator, jc_propagator, jc_unitary, jc_unitary_analytic, momentum, position,
    squeezer, TwoModeSqueezer,
};
pub use sampler::{basis_index, sample_in_bases, BasisSampler};
pub use state::{build_state, build_state_with, FockBuildOptions, FockEnsemble, TwoModeMoments};

use rayon::prelude::*;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::pauli::{pauli_expectation, PauliString, QubitInit};
use crate::scalar::{cx, Cx, Real};

use tensor::{norm_sqr, SparseLocalOp};

/// Dense operator on a tensor product of subsystems with dimensions `dims`.
#[derive(Clone, Debug, PartialEq)]
pub struct FockOperator<T: Real> {
    dims: Vec<usize>,
    data: CMatrix<T>,
}

impl<T: Real> FockOperator<T> {
    pub fn new(dims: Vec<usize>, data: CMatrix<T>) -> Result<Self> {
        let d: usize = dims.iter().product();
        if data.rows() != d || data.cols() != d {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for subsystem dimensions {dims:?}",
                data.rows(),
                data.cols()
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn from_pure(dims: Vec<usize>, v: &[Cx<T>]) -> Result<Self> {
        let d = v.len();
        Self::new(dims, CMatrix::from_fn(d, d, |i, j| v[i] * v[j].conj()))
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.data.rows()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.data
    }

    pub fn trace(&self) -> Cx<T> {
        self.data.trace()
    }

    pub fn purity(&self) -> T {
        self.data.matmul(&self.data).trace().re
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.data.is_hermitian(tol)
    }

    /// Smallest eigenvalue (dense Jacobi; small operators only).
    pub fn min_eigenvalue(&self) -> T {
        self.data.hermitian_eigenvalues()[0]
    }

    pub fn kron(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self {
            dims,
            data: self.data.kron(&other.data),
        }
    }

    /// Reduced operator on the subsystems in `keep` (in that order).
    pub fn partial_trace(&self, keep: &[usize]) -> Self {
        let st = tensor::strides(&self.dims);
        let traced: Vec<usize> = (0..self.dims.len()).filter(|s| !keep.contains(s)).collect();
        let kd: usize = keep.iter().map(|&s| self.dims[s]).product();
        let od: usize = traced.iter().map(|&s| self.dims[s]).product();
        let offset = |sites: &[usize], mut k: usize| -> usize {
            let mut i = 0;
            for &s in sites.iter().rev() {
                i += (k % self.dims[s]) * st[s];
                k /= self.dims[s];
            }
            i
        };
        let mut out = CMatrix::zeros(kd, kd);
        for a in 0..kd {
            let ia = offset(keep, a);
            for b in 0..kd {
                let ib = offset(keep, b);
                let mut acc = cx(T::zero(), T::zero());
                for o in 0..od {
                    let io = offset(&traced, o);
                    acc += self.data[(ia + io, ib + io)];
                }
                out[(a, b)] = acc;
            }
        }
        Self {
            dims: keep.iter().map(|&s| self.dims[s]).collect(),
            data: out,
        }
    }

    /// Real part of `tr(rho P)` for an all-qubit operator.
    pub fn pauli_expectation(&self, p: &PauliString) -> Result<T> {
        if self.dims.iter().any(|&d| d != 2) || p.n_qubits() != self.dims.len() {
            return Err(Error::DimensionMismatch(format!(
                "Pauli string of length {} on subsystems {:?}",
                p.n_qubits(),
                self.dims
            )));
        }
        Ok(pauli_expectation(&self.data, p).re)
    }

    /// Check the density-matrix invariants: Hermitian, trace within `tol` of
    /// `1 - leakage`, spectrum above `-tol`.
    pub fn validate_density(&self, leakage: T, tol: T) -> Result<()> {
        if !self.is_hermitian(tol) {
            return Err(Error::InvalidState("density matrix is not Hermitian".into()));
        }
        let tr = self.trace().re;
        if (tr - (T::one() - leakage)).abs() > tol {
            return Err(Error::InvalidState(format!("trace {tr} with leakage {leakage}")));
        }
        let ev = self.min_eigenvalue();
        if ev < -tol {
            return Err(Error::InvalidState(format!("negative eigenvalue {ev}")));
        }
        Ok(())
    }

    /// `U rho U^dag` for `U` a product of two-site operators.
    fn conjugate_by(&self, ops: &[(usize, usize, &SparseLocalOp<T>)]) -> Self {
        let d = self.dim();
        let apply_cols = |m: &CMatrix<T>| -> CMatrix<T> {
            let mut out = CMatrix::zeros(d, d);
            let mut col = vec![cx(T::zero(), T::zero()); d];
            for c in 0..d {
                for (r, slot) in col.iter_mut().enumerate() {
                    *slot = m[(r, c)];
                }
                let mut v = col.clone();
                for (a, b, op) in ops {
                    v = op.apply(&v, &self.dims, *a, *b);
                }
                for (r, x) in v.into_iter().enumerate() {
                    out[(r, c)] = x;
                }
            }
            out
        };
        let u_rho = apply_cols(&self.data);
        let data = apply_cols(&u_rho.adjoint());
        Self {
            dims: self.dims.clone(),
            data,
        }
    }
}

/// Per-pair couplings `gbar_j` and the common interaction time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransductionConfig<T> {
    pub couplings: Vec<T>,
    pub time: T,
}

impl<T: Real> TransductionConfig<T> {
    pub fn new(couplings: Vec<T>, time: T) -> Result<Self> {
        if !(time > T::zero()) || couplings.iter().any(|g| !(*g > T::zero())) {
            return Err(Error::InvalidParameter("couplings and time must be positive".into()));
        }
        Ok(Self { couplings, time })
    }

    /// Every pair with the same `gbar t`.
    pub fn uniform(n: usize, gt: T) -> Result<Self> {
        Self::new(vec![gt; n], T::one())
    }

    pub fn n_pairs(&self) -> usize {
        self.couplings.len()
    }

    /// Dimensionless `gbar_j t`.
    pub fn gt(&self, j: usize) -> T {
        self.couplings[j] * self.time
    }

    fn propagators(&self, n_trunc: usize) -> Vec<SparseLocalOp<T>> {
        (0..self.n_pairs()).map(|j| jc_propagator(n_trunc, self.gt(j))).collect()
    }
}

fn product_ket<T: Real>(inits: &[QubitInit]) -> Vec<Cx<T>> {
    inits.iter().fold(vec![cx(T::one(), T::zero())], |acc, q| {
        let k = q.ket::<T>();
        acc.iter().flat_map(|a| [*a * k[0], *a * k[1]]).collect()
    })
}

fn check_pairing(n_modes: usize, inits: &[QubitInit], cfg_pairs: usize) -> Result<()> {
    if inits.len() != n_modes || cfg_pairs != n_modes {
        return Err(Error::DimensionMismatch(format!(
            "{n_modes} modes, {} qubits, {cfg_pairs} couplings",
            inits.len()
        )));
    }
    Ok(())
}

/// Evolve `rho_f (x) |q><q|` under `prod_j exp(-i t H_JC,j)`; the result
/// lives on the mode sites followed by the qubit sites.
pub fn jc_evolve<T: Real>(
    rho_f: &FockOperator<T>,
    inits: &[QubitInit],
    cfg: &TransductionConfig<T>,
) -> Result<FockOperator<T>> {
    let n = rho_f.dims().len();
    check_pairing(n, inits, cfg.n_pairs())?;
    let n_trunc = rho_f.dims()[0];
    if rho_f.dims().iter().any(|&d| d != n_trunc) {
        return Err(Error::DimensionMismatch("modes must share one truncation".into()));
    }
    let ket = product_ket::<T>(inits);
    let q = FockOperator::from_pure(vec![2; n], &ket)?;
    let joint = rho_f.kron(&q);
    let props = cfg.propagators(n_trunc);
    let ops: Vec<_> = props.iter().enumerate().map(|(j, p)| (j, n + j, p)).collect();
    Ok(joint.conjugate_by(&ops))
}

/// Trace out every mode of a mode-then-qubit operator with `n_qubits` qubits.
pub fn qubit_reduced<T: Real>(rho: &FockOperator<T>, n_qubits: usize) -> FockOperator<T> {
    let s = rho.dims().len();
    let keep: Vec<usize> = (s - n_qubits..s).collect();
    rho.partial_trace(&keep)
}

fn neumaier_add<T: Real>(sum: &mut Cx<T>, comp: &mut Cx<T>, x: Cx<T>) {
    fn part<T: Real>(s: &mut T, c: &mut T, x: T) {
        let t = *s + x;
        *c += if s.abs() >= x.abs() { (*s - t) + x } else { (x - t) + *s };
        *s = t;
    }
    part(&mut sum.re, &mut comp.re, x.re);
    part(&mut sum.im, &mut comp.im, x.im);
}

impl<T: Real> FockEnsemble<T> {
    /// Evolved pure components on mode sites followed by qubit sites.
    pub fn evolve(&self, inits: &[QubitInit], cfg: &TransductionConfig<T>) -> Result<Vec<(T, Vec<Cx<T>>)>> {
        let n = self.n_modes();
        check_pairing(n, inits, cfg.n_pairs())?;
        let ket = product_ket::<T>(inits);
        let props = cfg.propagators(self.n_trunc());
        let mut dims = self.dims();
        dims.extend(std::iter::repeat_n(2, n));
        Ok(self
            .components()
            .map(|(w, v)| {
                let mut x: Vec<Cx<T>> = v.iter().flat_map(|a| ket.iter().map(move |b| *a * *b)).collect();
                for (j, p) in props.iter().enumerate() {
                    x = p.apply(&x, &dims, j, n + j);
                }
                (w, x)
            })
            .collect())
    }

    /// Qubit state after transduction, `tr_modes[U (rho_f (x) |q><q|) U^dag]`.
    pub fn transduce(&self, inits: &[QubitInit], cfg: &TransductionConfig<T>) -> Result<FockOperator<T>> {
        let n = self.n_modes();
        check_pairing(n, inits, cfg.n_pairs())?;
        let ket = product_ket::<T>(inits);
        let props = cfg.propagators(self.n_trunc());
        let mut dims = self.dims();
        dims.extend(std::iter::repeat_n(2, n));
        let q = 1usize << n;
        let zero = cx(T::zero(), T::zero());
        let components: Vec<(T, &[Cx<T>])> = self.components().collect();
        let partial: Vec<Vec<Cx<T>>> = components
            .par_chunks(16)
            .map(|chunk| {
                let mut acc = vec![zero; q * q];
                for &(w, v) in chunk {
                    let mut x: Vec<Cx<T>> = v.iter().flat_map(|a| ket.iter().map(move |b| *a * *b)).collect();
                    for (j, p) in props.iter().enumerate() {
                        x = p.apply(&x, &dims, j, n + j);
                    }
                    let mut local = vec![zero; q * q];
                    for m in x.chunks_exact(q) {
                        if norm_sqr(m) == T::zero() {
                            continue;
                        }
                        for a in 0..q {
                            for b in 0..q {
                                local[a * q + b] += m[a] * m[b].conj();
                            }
                        }
                    }
                    for (s, l) in acc.iter_mut().zip(local) {
                        *s += l * w;
                    }
                }
                acc
            })
            .collect();
        let mut sum = vec![zero; q * q];
        let mut comp = vec![zero; q * q];
        for acc in partial {
            for (i, l) in acc.into_iter().enumerate() {
                neumaier_add(&mut sum[i], &mut comp[i], l);
            }
        }
        let mut rho = CMatrix::zeros(q, q);
        for a in 0..q {
            for b in 0..q {
                rho[(a, b)] = sum[a * q + b] + comp[a * q + b];
            }
        }
        FockOperator::new(vec![2; n], rho)
    }
}
