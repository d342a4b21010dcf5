use serde::{Deserialize, Serialize};

use super::{GaussianState, Quad};
use crate::error::{Error, Result};
use crate::linalg::RMatrix;
use crate::scalar::Real;

/// Length of the per-pair moment slice.
pub const PAIR_LEN: usize = 14;

/// The `2n^2 + 3n` means and non-centralised second moments of `n` modes.
///
/// Layout:
/// - means `(<Q1>, <P1>, ..., <Qn>, <Pn>)`
/// - squares `(<Q1^2>, <P1^2>, ..., <Qn^2>, <Pn^2>)`
/// - symmetrised products `<(Q_j P_j + P_j Q_j)/2>` for each mode
/// - cross moments `<Q_j Q_k>, <Q_j P_k>, <P_j Q_k>, <P_j P_k>` for `j < k`
///   in lexicographic order
///
/// For two modes this is exactly the 14-entry pair ordering.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentVector<T> {
    n_modes: usize,
    gamma: Vec<T>,
}

/// Entry count for `n` modes.
pub fn moment_len(n_modes: usize) -> usize {
    2 * n_modes * n_modes + 3 * n_modes
}

impl<T: Real> MomentVector<T> {
    pub fn new(n_modes: usize, gamma: Vec<T>) -> Result<Self> {
        if gamma.len() != moment_len(n_modes) {
            return Err(Error::DimensionMismatch(format!(
                "moment vector of length {} for {n_modes} modes (expected {})",
                gamma.len(),
                moment_len(n_modes)
            )));
        }
        Ok(Self { n_modes, gamma })
    }

    pub fn zeros(n_modes: usize) -> Self {
        Self {
            n_modes,
            gamma: vec![T::zero(); moment_len(n_modes)],
        }
    }

    pub fn from_state(s: &GaussianState<T>) -> Self {
        let n = s.n_modes();
        let mut v = Self::zeros(n);
        for i in 0..2 * n {
            v.gamma[i] = s.mean()[i];
        }
        for j in 0..n {
            let (q, p) = (2 * j, 2 * j + 1);
            let sq_q = v.square_index(j, Quad::Q);
            let sq_p = v.square_index(j, Quad::P);
            let sym = v.sym_index(j);
            v.gamma[sq_q] = s.second_moment(q, q);
            v.gamma[sq_p] = s.second_moment(p, p);
            v.gamma[sym] = s.second_moment(q, p);
            for k in (j + 1)..n {
                for a in [Quad::Q, Quad::P] {
                    for b in [Quad::Q, Quad::P] {
                        let idx = v.cross_index(j, a, k, b);
                        v.gamma[idx] = s.second_moment(2 * j + a.offset(), 2 * k + b.offset());
                    }
                }
            }
        }
        v
    }

    /// Gaussian moments (mean, centralised covariance) encoded by this vector.
    /// No physicality check: iterates of the estimator may violate the
    /// uncertainty relation.
    pub fn to_state_unchecked(&self) -> GaussianState<T> {
        let n = self.n_modes;
        let mean: Vec<T> = self.means().to_vec();
        let mut cov = RMatrix::zeros(2 * n, 2 * n);
        for r in 0..2 * n {
            for c in 0..2 * n {
                cov[(r, c)] = self.raw_second(r, c) - mean[r] * mean[c];
            }
        }
        GaussianState::new_unchecked(mean, cov).expect("consistent shapes")
    }

    pub fn to_state(&self) -> Result<GaussianState<T>> {
        let s = self.to_state_unchecked();
        s.validate()?;
        Ok(s)
    }

    #[inline]
    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.gamma
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.gamma
    }

    pub fn into_vec(self) -> Vec<T> {
        self.gamma
    }

    pub fn means(&self) -> &[T] {
        &self.gamma[..2 * self.n_modes]
    }

    pub fn second_moments(&self) -> &[T] {
        &self.gamma[2 * self.n_modes..]
    }

    #[inline]
    pub fn mean_index(&self, mode: usize, q: Quad) -> usize {
        2 * mode + q.offset()
    }

    #[inline]
    pub fn square_index(&self, mode: usize, q: Quad) -> usize {
        2 * self.n_modes + 2 * mode + q.offset()
    }

    #[inline]
    pub fn sym_index(&self, mode: usize) -> usize {
        4 * self.n_modes + mode
    }

    /// Index of `<A_j B_k>`; `j != k` in either order.
    pub fn cross_index(&self, j: usize, a: Quad, k: usize, b: Quad) -> usize {
        assert_ne!(j, k, "cross moment needs distinct modes");
        let (j, a, k, b) = if j < k { (j, a, k, b) } else { (k, b, j, a) };
        let n = self.n_modes;
        // pairs (0,1),(0,2),..,(0,n-1),(1,2),...
        let pair = j * (2 * n - j - 1) / 2 + (k - j - 1);
        5 * n + 4 * pair + 2 * a.offset() + b.offset()
    }

    pub fn mean(&self, mode: usize, q: Quad) -> T {
        self.gamma[self.mean_index(mode, q)]
    }

    pub fn square(&self, mode: usize, q: Quad) -> T {
        self.gamma[self.square_index(mode, q)]
    }

    pub fn sym(&self, mode: usize) -> T {
        self.gamma[self.sym_index(mode)]
    }

    pub fn cross(&self, j: usize, a: Quad, k: usize, b: Quad) -> T {
        self.gamma[self.cross_index(j, a, k, b)]
    }

    /// `<{R_r, R_c}>/2` by quadrature indices.
    pub fn raw_second(&self, r: usize, c: usize) -> T {
        let (mr, qr) = (r / 2, if r % 2 == 0 { Quad::Q } else { Quad::P });
        let (mc, qc) = (c / 2, if c % 2 == 0 { Quad::Q } else { Quad::P });
        if mr == mc {
            if qr == qc {
                self.square(mr, qr)
            } else {
                self.sym(mr)
            }
        } else {
            self.cross(mr, qr, mc, qc)
        }
    }

    /// Indices of the 14-entry slice for the ordered mode pair `(j, k)`.
    pub fn pair_indices(&self, j: usize, k: usize) -> [usize; PAIR_LEN] {
        use Quad::{P, Q};
        [
            self.mean_index(j, Q),
            self.mean_index(j, P),
            self.mean_index(k, Q),
            self.mean_index(k, P),
            self.square_index(j, Q),
            self.square_index(j, P),
            self.square_index(k, Q),
            self.square_index(k, P),
            self.sym_index(j),
            self.sym_index(k),
            self.cross_index(j, Q, k, Q),
            self.cross_index(j, Q, k, P),
            self.cross_index(j, P, k, Q),
            self.cross_index(j, P, k, P),
        ]
    }

    /// The 14 moments of modes `(j, k)` in pair ordering.
    pub fn pair_slice(&self, j: usize, k: usize) -> [T; PAIR_LEN] {
        self.pair_indices(j, k).map(|i| self.gamma[i])
    }

    /// Whether the vector satisfies the energy bounds
    /// `|mu| <= sqrt(2E)` and `|sigma| <= 2E`.
    pub fn within_energy_bounds(&self, e_max: T) -> bool {
        let two_e = T::lit(2.0) * e_max;
        let slack = T::one() + T::lit(1e-12);
        self.means().iter().all(|m| m.abs() <= two_e.sqrt() * slack)
            && self.second_moments().iter().all(|s| s.abs() <= two_e * slack)
    }
}
