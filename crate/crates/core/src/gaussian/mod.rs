//! Gaussian states of `n` bosonic modes described by their first and second
//! moments.
//!
//! Conventions: `hbar = 1`, `[Q, P] = i`, `a = (Q + iP)/sqrt(2)`, so the vacuum
//! has `<Q^2> = <P^2> = 1/2`. Quadratures are ordered `(Q1, P1, ..., Qn, Pn)`.

mod moments;
mod prep;
mod wick;

pub use moments::{moment_len, MomentVector, PAIR_LEN};
pub use prep::{squeezer_symplectic, two_mode_squeezer_symplectic, StatePrepParams};
pub use wick::{wick_moment_with, MomentTable, TwoPointKind};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, RMatrix};
use crate::scalar::{cx, Cx, Real};

/// Position- or momentum-like quadrature.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Quad {
    Q,
    P,
}

impl Quad {
    #[inline]
    pub fn offset(self) -> usize {
        match self {
            Quad::Q => 0,
            Quad::P => 1,
        }
    }
}

/// One letter of an operator word: quadrature `quad` of mode `mode`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Letter {
    pub mode: usize,
    pub quad: Quad,
}

impl Letter {
    pub fn q(mode: usize) -> Self {
        Self { mode, quad: Quad::Q }
    }

    pub fn p(mode: usize) -> Self {
        Self { mode, quad: Quad::P }
    }

    /// Index into the quadrature vector `(Q1, P1, ..., Qn, Pn)`.
    #[inline]
    pub fn index(self) -> usize {
        2 * self.mode + self.quad.offset()
    }
}

/// Ordered product of quadrature operators, read left to right.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OperatorWord(pub Vec<Letter>);

impl OperatorWord {
    pub fn new(letters: Vec<Letter>) -> Self {
        Self(letters)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_mode(&self) -> Option<usize> {
        self.0.iter().map(|l| l.mode).max()
    }

    /// Every word of length `order` over the quadratures of `n_modes` modes.
    pub fn all_of_order(n_modes: usize, order: usize) -> Vec<Self> {
        let alphabet: Vec<Letter> = (0..n_modes)
            .flat_map(|m| [Letter::q(m), Letter::p(m)])
            .collect();
        let mut words = vec![Vec::new()];
        for _ in 0..order {
            words = words
                .into_iter()
                .flat_map(|w| {
                    alphabet.iter().map(move |l| {
                        let mut w2 = w.clone();
                        w2.push(*l);
                        w2
                    })
                })
                .collect();
        }
        words.into_iter().map(Self).collect()
    }
}

/// Symplectic form for quadrature ordering `(Q1, P1, ..., Qn, Pn)`.
pub fn symplectic_form<T: Real>(n_modes: usize) -> RMatrix<T> {
    let mut omega = RMatrix::zeros(2 * n_modes, 2 * n_modes);
    for j in 0..n_modes {
        omega[(2 * j, 2 * j + 1)] = T::one();
        omega[(2 * j + 1, 2 * j)] = -T::one();
    }
    omega
}

/// Tolerance for symmetry of the covariance matrix.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Smallest eigenvalue allowed for `cov + (i/2) Omega`.
pub const UNCERTAINTY_TOL: f64 = -1e-10;

/// First and second moments of an `n`-mode Gaussian state.
///
/// `cov` holds the centralised symmetrised second moments
/// `Sigma_jk = <{R_j - mu_j, R_k - mu_k}>/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianState<T: Real> {
    n_modes: usize,
    mean: Vec<T>,
    cov: RMatrix<T>,
}

impl<T: Real> GaussianState<T> {
    /// Validated constructor: symmetric covariance obeying the uncertainty
    /// relation `cov + (i/2) Omega >= 0`.
    pub fn new(mean: Vec<T>, cov: RMatrix<T>) -> Result<Self> {
        let s = Self::new_unchecked(mean, cov)?;
        s.validate()?;
        Ok(s)
    }

    /// Shape-checked constructor that skips the physicality checks. The
    /// iterative estimator produces moment vectors that need not belong to any
    /// physical state; Wick expansions are still well defined for them.
    pub fn new_unchecked(mean: Vec<T>, cov: RMatrix<T>) -> Result<Self> {
        if mean.is_empty() || mean.len() % 2 != 0 {
            return Err(Error::DimensionMismatch(format!(
                "mean length {} is not a positive even number",
                mean.len()
            )));
        }
        if cov.rows() != mean.len() || cov.cols() != mean.len() {
            return Err(Error::DimensionMismatch(format!(
                "covariance is {}x{}, expected {}x{}",
                cov.rows(),
                cov.cols(),
                mean.len(),
                mean.len()
            )));
        }
        Ok(Self {
            n_modes: mean.len() / 2,
            mean,
            cov,
        })
    }

    pub fn vacuum(n_modes: usize) -> Self {
        Self::thermal(&vec![T::zero(); n_modes])
    }

    pub fn thermal(nbar: &[T]) -> Self {
        let n = nbar.len();
        let mut cov = RMatrix::zeros(2 * n, 2 * n);
        for (j, &nb) in nbar.iter().enumerate() {
            let v = nb + T::lit(0.5);
            cov[(2 * j, 2 * j)] = v;
            cov[(2 * j + 1, 2 * j + 1)] = v;
        }
        Self {
            n_modes: n,
            mean: vec![T::zero(); 2 * n],
            cov,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let scale = T::one().max(self.cov.max_abs());
        if !self.cov.is_symmetric(T::lit(SYMMETRY_TOL) * scale) {
            return Err(Error::InvalidState("covariance matrix is not symmetric".into()));
        }
        if !self.mean.iter().chain(self.cov.as_slice()).all(|x| x.is_finite()) {
            return Err(Error::InvalidState("non-finite moment".into()));
        }
        let min_ev = self.uncertainty_eigenvalues()[0];
        if min_ev < T::lit(UNCERTAINTY_TOL) * scale {
            return Err(Error::InvalidState(format!(
                "cov + (i/2)Omega has eigenvalue {min_ev:e} < 0"
            )));
        }
        Ok(())
    }

    /// Ascending spectrum of `cov + (i/2) Omega`.
    pub fn uncertainty_eigenvalues(&self) -> Vec<T> {
        self.two_point(TwoPointKind::Ordered).hermitian_eigenvalues()
    }

    #[inline]
    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    #[inline]
    pub fn mean(&self) -> &[T] {
        &self.mean
    }

    #[inline]
    pub fn cov(&self) -> &RMatrix<T> {
        &self.cov
    }

    /// Non-centralised symmetrised second moment `<{R_j, R_k}>/2`.
    pub fn second_moment(&self, j: usize, k: usize) -> T {
        self.cov[(j, k)] + self.mean[j] * self.mean[k]
    }

    /// Per-mode energy `<Q_j^2>/2 + <P_j^2>/2`.
    pub fn mode_energy(&self, mode: usize) -> T {
        let (q, p) = (2 * mode, 2 * mode + 1);
        T::lit(0.5) * (self.second_moment(q, q) + self.second_moment(p, p))
    }

    pub fn max_mode_energy(&self) -> T {
        (0..self.n_modes)
            .map(|j| self.mode_energy(j))
            .fold(T::neg_infinity(), T::max)
    }

    /// Reduced state on the modes in `keep`, in the given order.
    pub fn marginalize(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::EmptySelection);
        }
        if let Some(&bad) = keep.iter().find(|&&m| m >= self.n_modes) {
            return Err(Error::InvalidParameter(format!(
                "mode {bad} out of range for {} modes",
                self.n_modes
            )));
        }
        let idx: Vec<usize> = keep.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
        Ok(Self {
            n_modes: keep.len(),
            mean: idx.iter().map(|&i| self.mean[i]).collect(),
            cov: self.cov.select(&idx, &idx),
        })
    }

    /// Two-point function `<dR_j dR_k>` for the chosen kind.
    pub fn two_point(&self, kind: TwoPointKind) -> CMatrix<T> {
        let omega = symplectic_form::<T>(self.n_modes);
        let half = T::lit(0.5);
        CMatrix::from_fn(2 * self.n_modes, 2 * self.n_modes, |i, j| match kind {
            TwoPointKind::Ordered => cx(self.cov[(i, j)], half * omega[(i, j)]),
            TwoPointKind::Symmetrized => cx(self.cov[(i, j)], T::zero()),
        })
    }

    /// Expectation of an ordered product of quadratures by the quantum Wick
    /// theorem.
    pub fn wick_moment(&self, word: &OperatorWord) -> Cx<T> {
        self.wick_moment_kind(word, TwoPointKind::Ordered)
    }

    pub fn wick_moment_kind(&self, word: &OperatorWord, kind: TwoPointKind) -> Cx<T> {
        let idx: Vec<usize> = word.0.iter().map(|l| l.index()).collect();
        wick_moment_with(&self.mean, &self.two_point(kind), &idx)
    }

    pub fn moments(&self) -> MomentVector<T> {
        MomentVector::from_state(self)
    }
}
