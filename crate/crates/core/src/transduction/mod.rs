//! The per-pair map between the 14 Gaussian moments of two modes and 14
//! (shifted) two-qubit Pauli expectations.
//!
//! Moment ordering: `<Q1>, <P1>, <Q2>, <P2>, <Q1^2>, <P1^2>, <Q2^2>, <P2^2>,
//! <{Q1,P1}>/2, <{Q2,P2}>/2, <Q1Q2>, <Q1P2>, <P1Q2>, <P1P2>`.
//!
//! Pauli ordering, with `psi1 = |g>|g>` and `psi2 = |+>|+i>` (a bar marks a
//! shifted entry): `Y1, X1, Y2, X2, Z1bar` under psi1, `X1bar, Y2bar` under
//! psi2, `Z2bar` under psi1, `Y1, X2` under psi2, then `Y1Y2, Y1X2, X1Y2,
//! X1X2` under psi1.

mod closed_form;
mod series;

pub use closed_form::second_order_paulis;
pub use series::{check_convergence, moment_table, Expansion, PairSeries};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::PAIR_LEN;
use crate::linalg::RMatrix;
use crate::fock::{FockEnsemble, FockOperator, TransductionConfig};
use crate::pauli::{Pauli, PauliString, QubitInit};
use crate::scalar::Real;

/// Which of the two preparations an entry is measured under.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Preparation {
    /// `|g>|g>`
    Psi1,
    /// `|+>|+i>`
    Psi2,
}

impl Preparation {
    pub fn inits(self) -> [QubitInit; 2] {
        match self {
            Preparation::Psi1 => [QubitInit::Ground, QubitInit::Ground],
            Preparation::Psi2 => [QubitInit::Plus, QubitInit::PlusI],
        }
    }
}

/// `(preparation, observable)` for each of the 14 entries.
pub const PAULI_ENTRIES: [(Preparation, [Pauli; 2]); PAIR_LEN] = {
    use Pauli::{I, X, Y, Z};
    use Preparation::{Psi1, Psi2};
    [
        (Psi1, [Y, I]),
        (Psi1, [X, I]),
        (Psi1, [I, Y]),
        (Psi1, [I, X]),
        (Psi1, [Z, I]),
        (Psi2, [X, I]),
        (Psi2, [I, Y]),
        (Psi1, [I, Z]),
        (Psi2, [Y, I]),
        (Psi2, [I, X]),
        (Psi1, [Y, Y]),
        (Psi1, [Y, X]),
        (Psi1, [X, Y]),
        (Psi1, [X, X]),
    ]
};

/// `gamma_(k,j)[i] = gamma_(j,k)[SWAP[i]]`.
pub const SWAP: [usize; PAIR_LEN] = [2, 3, 0, 1, 6, 7, 4, 5, 9, 8, 10, 12, 11, 13];

pub fn swap_pair<T: Copy>(v: &[T; PAIR_LEN]) -> [T; PAIR_LEN] {
    SWAP.map(|i| v[i])
}

/// Additive constants turning the affine relations into linear ones.
pub fn shift_constants<T: Real>(g1: T, g2: T) -> [T; PAIR_LEN] {
    let two = T::lit(2.0);
    let mut s = [T::zero(); PAIR_LEN];
    s[4] = T::one() + two * g1 * g1;
    s[5] = -T::one();
    s[6] = -T::one();
    s[7] = T::one() + two * g2 * g2;
    s
}

/// The 14 Pauli entries of a pair, raw or shifted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliVector<T> {
    pub values: [T; PAIR_LEN],
    /// Which entries carry their shift constant.
    pub shifted: [bool; PAIR_LEN],
    /// `(gbar_1 t, gbar_2 t)` used for the shifts.
    pub couplings: (T, T),
}

impl<T: Real> PauliVector<T> {
    /// Apply the shifts to raw expectations.
    pub fn shift(raw: [T; PAIR_LEN], g1: T, g2: T) -> Self {
        let c = shift_constants(g1, g2);
        let mut values = raw;
        let mut shifted = [false; PAIR_LEN];
        for i in 0..PAIR_LEN {
            if c[i] != T::zero() {
                values[i] = values[i] + c[i];
                shifted[i] = true;
            }
        }
        Self {
            values,
            shifted,
            couplings: (g1, g2),
        }
    }

    /// Raw expectations (inverse of [`PauliVector::shift`]).
    pub fn raw(&self) -> [T; PAIR_LEN] {
        let c = shift_constants(self.couplings.0, self.couplings.1);
        std::array::from_fn(|i| if self.shifted[i] { self.values[i] - c[i] } else { self.values[i] })
    }

    /// Gather raw entries from expectation oracles for the two preparations,
    /// then shift.
    pub fn from_oracles(
        g1: T,
        g2: T,
        mut psi1: impl FnMut([Pauli; 2]) -> T,
        mut psi2: impl FnMut([Pauli; 2]) -> T,
    ) -> Self {
        let raw = PAULI_ENTRIES.map(|(prep, obs)| match prep {
            Preparation::Psi1 => psi1(obs),
            Preparation::Psi2 => psi2(obs),
        });
        Self::shift(raw, g1, g2)
    }
}

/// Orientation of the `psi2` preparation on an ordered mode pair `(j, k)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    /// Qubit `j` in `|+>`, qubit `k` in `|+i>`.
    Forward,
    /// Qubit `j` in `|+i>`, qubit `k` in `|+>`. The Pauli entries are then
    /// labelled with qubit `k` as "qubit 1".
    Reversed,
}

/// The linear map `M`, its inverse and the series forward model for one
/// ordered pair `(j, k)` with couplings `(gbar_j t, gbar_k t)`.
#[derive(Clone, Debug)]
pub struct PairMap<T: Real> {
    g: (T, T),
    orientation: Orientation,
    m: RMatrix<T>,
    m_inv: RMatrix<T>,
}

/// `M` for the forward orientation.
pub fn m_matrix<T: Real>(g1: T, g2: T) -> RMatrix<T> {
    let two = T::lit(2.0);
    let mut m = RMatrix::zeros(PAIR_LEN, PAIR_LEN);
    m[(0, 0)] = two * g1;
    m[(1, 1)] = two * g1;
    m[(2, 2)] = two * g2;
    m[(3, 3)] = two * g2;
    m[(4, 4)] = two * g1 * g1;
    m[(4, 5)] = two * g1 * g1;
    m[(5, 5)] = -two * g1 * g1;
    m[(6, 6)] = -two * g2 * g2;
    m[(7, 6)] = two * g2 * g2;
    m[(7, 7)] = two * g2 * g2;
    m[(8, 8)] = -two * g1 * g1;
    m[(9, 9)] = -two * g2 * g2;
    for i in 10..14 {
        m[(i, i)] = T::lit(4.0) * g1 * g2;
    }
    m
}

/// Closed-form `M^{-1}` for the forward orientation.
pub fn m_inverse<T: Real>(g1: T, g2: T) -> RMatrix<T> {
    let two = T::lit(2.0);
    let (a1, a2) = (T::one() / (two * g1), T::one() / (two * g2));
    let (b1, b2) = (T::one() / (two * g1 * g1), T::one() / (two * g2 * g2));
    let mut m = RMatrix::zeros(PAIR_LEN, PAIR_LEN);
    m[(0, 0)] = a1;
    m[(1, 1)] = a1;
    m[(2, 2)] = a2;
    m[(3, 3)] = a2;
    m[(4, 4)] = b1;
    m[(4, 5)] = b1;
    m[(5, 5)] = -b1;
    m[(6, 6)] = -b2;
    m[(7, 6)] = b2;
    m[(7, 7)] = b2;
    m[(8, 8)] = -b1;
    m[(9, 9)] = -b2;
    for i in 10..14 {
        m[(i, i)] = T::one() / (T::lit(4.0) * g1 * g2);
    }
    m
}

fn permute_columns<T: Real>(m: &RMatrix<T>) -> RMatrix<T> {
    // (M Pi)[r][i] with (Pi v)_i = v[SWAP[i]]: column SWAP[i] of the result is column i of M
    let mut out = RMatrix::zeros(PAIR_LEN, PAIR_LEN);
    for r in 0..PAIR_LEN {
        for (i, &s) in SWAP.iter().enumerate() {
            out[(r, s)] = m[(r, i)];
        }
    }
    out
}

fn permute_rows<T: Real>(m: &RMatrix<T>) -> RMatrix<T> {
    RMatrix::from_fn(PAIR_LEN, PAIR_LEN, |r, c| m[(SWAP[r], c)])
}

impl<T: Real> PairMap<T> {
    /// Map for ordered pair `(j, k)` with `g1 = gbar_j t`, `g2 = gbar_k t`.
    pub fn new(g1: T, g2: T, orientation: Orientation) -> Result<Self> {
        if !(g1 > T::zero() && g2 > T::zero()) || !g1.is_finite() || !g2.is_finite() {
            return Err(Error::InvalidParameter(format!("couplings ({g1}, {g2}) must be positive")));
        }
        let (m, m_inv) = match orientation {
            Orientation::Forward => (m_matrix(g1, g2), m_inverse(g1, g2)),
            Orientation::Reversed => {
                let (m, mi) = (m_matrix(g2, g1), m_inverse(g2, g1));
                (permute_columns(&m), permute_rows(&mi))
            }
        };
        Ok(Self {
            g: (g1, g2),
            orientation,
            m,
            m_inv,
        })
    }

    pub fn forward(g1: T, g2: T) -> Result<Self> {
        Self::new(g1, g2, Orientation::Forward)
    }

    pub fn couplings(&self) -> (T, T) {
        self.g
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// Couplings in the order the Pauli entries are labelled.
    pub fn pauli_couplings(&self) -> (T, T) {
        match self.orientation {
            Orientation::Forward => self.g,
            Orientation::Reversed => (self.g.1, self.g.0),
        }
    }

    pub fn m(&self) -> &RMatrix<T> {
        &self.m
    }

    pub fn m_inv(&self) -> &RMatrix<T> {
        &self.m_inv
    }

    /// `(||A||_inf, ||B||_inf)` for rows 1-4 and 5-14 of `M^{-1}`.
    pub fn block_norms(&self) -> (T, T) {
        let row_sum = |r: usize| (0..PAIR_LEN).map(|c| self.m_inv[(r, c)].abs()).sum::<T>();
        let a = (0..4).map(row_sum).fold(T::zero(), T::max);
        let b = (4..PAIR_LEN).map(row_sum).fold(T::zero(), T::max);
        (a, b)
    }

    /// Shift raw expectations with this map's couplings.
    pub fn shift(&self, raw: [T; PAIR_LEN]) -> PauliVector<T> {
        let (a, b) = self.pauli_couplings();
        PauliVector::shift(raw, a, b)
    }

    pub fn apply_m(&self, gamma: &[T; PAIR_LEN]) -> [T; PAIR_LEN] {
        to_array(self.m.matvec(gamma))
    }

    /// `M^{-1} p`.
    pub fn invert_linear(&self, p: &PauliVector<T>) -> [T; PAIR_LEN] {
        to_array(self.m_inv.matvec(&p.values))
    }

    /// Series model of the shifted Pauli vector, truncated at order `order`.
    pub fn forward_model(&self, gamma: &[T; PAIR_LEN], order: usize) -> Result<PauliVector<T>> {
        let tail = self.tail(gamma, order)?;
        let lin = self.apply_m(gamma);
        let (a, b) = self.pauli_couplings();
        Ok(PauliVector {
            values: std::array::from_fn(|i| lin[i] + tail[i]),
            shifted: shift_constants(a, b).map(|c| c != T::zero()),
            couplings: (a, b),
        })
    }

    /// `f(gamma) = p(gamma) - M gamma`: the orders `3..=order` of the series.
    pub fn tail(&self, gamma: &[T; PAIR_LEN], order: usize) -> Result<[T; PAIR_LEN]> {
        self.series(order)?.tail(gamma)
    }

    /// Evaluator with the expansion specialised to this map's couplings.
    pub fn series(&self, order: usize) -> Result<SeriesModel<T>> {
        SeriesModel::new(self.pauli_couplings(), self.orientation, order)
    }
}

fn to_array<T: Copy>(v: Vec<T>) -> [T; PAIR_LEN] {
    v.try_into().unwrap_or_else(|_| panic!("expected {PAIR_LEN} entries"))
}

/// Reusable compiled forward model for one map and series order.
#[derive(Clone, Debug)]
pub struct SeriesModel<T: Real> {
    order: usize,
    orientation: Orientation,
    psi1: PairSeries<T>,
    psi2: PairSeries<T>,
    /// `(preparation, index within that series)` per entry
    slots: [(Preparation, usize); PAIR_LEN],
}

impl<T: Real> SeriesModel<T> {
    fn new(g: (T, T), orientation: Orientation, order: usize) -> Result<Self> {
        if order < 2 {
            return Err(Error::InvalidParameter(format!("series order {order} below 2")));
        }
        let mut obs1 = Vec::new();
        let mut obs2 = Vec::new();
        let slots = PAULI_ENTRIES.map(|(prep, obs)| match prep {
            Preparation::Psi1 => {
                obs1.push(obs);
                (prep, obs1.len() - 1)
            }
            Preparation::Psi2 => {
                obs2.push(obs);
                (prep, obs2.len() - 1)
            }
        });
        let gt = [g.0, g.1];
        Ok(Self {
            order,
            orientation,
            psi1: PairSeries::new(order, gt, Preparation::Psi1.inits(), &obs1),
            psi2: PairSeries::new(order, gt, Preparation::Psi2.inits(), &obs2),
            slots,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Per-entry contributions of each order `0..=K` (raw, unshifted).
    pub fn contributions(&self, gamma: &[T; PAIR_LEN]) -> [Vec<T>; PAIR_LEN] {
        let g = match self.orientation {
            Orientation::Forward => *gamma,
            Orientation::Reversed => swap_pair(gamma),
        };
        let table = moment_table(&g, self.order);
        let c1 = self.psi1.contributions(&table);
        let c2 = self.psi2.contributions(&table);
        self.slots.map(|(prep, i)| match prep {
            Preparation::Psi1 => c1[i].clone(),
            Preparation::Psi2 => c2[i].clone(),
        })
    }

    pub fn tail(&self, gamma: &[T; PAIR_LEN]) -> Result<[T; PAIR_LEN]> {
        let c = self.contributions(gamma);
        check_convergence(&c, self.order)?;
        Ok(c.map(|v| v.iter().skip(3).copied().sum()))
    }
}

fn transduced_pair<T: Real>(ensemble: &FockEnsemble<T>, g1: T, g2: T) -> Result<[FockOperator<T>; 2]> {
    if ensemble.n_modes() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "pair entries need a two-mode state, got {} modes",
            ensemble.n_modes()
        )));
    }
    let cfg = TransductionConfig::new(vec![g1, g2], T::one())?;
    Ok([
        ensemble.transduce(&Preparation::Psi1.inits(), &cfg)?,
        ensemble.transduce(&Preparation::Psi2.inits(), &cfg)?,
    ])
}

/// Raw Pauli entries of a two-mode Fock ensemble, computed by direct
/// simulation of the interaction for both preparations.
pub fn fock_raw_paulis<T: Real>(ensemble: &FockEnsemble<T>, g1: T, g2: T) -> Result<[T; PAIR_LEN]> {
    let rho = transduced_pair(ensemble, g1, g2)?;
    let mut out = [T::zero(); PAIR_LEN];
    for (slot, (prep, obs)) in out.iter_mut().zip(PAULI_ENTRIES) {
        *slot = rho[prep as usize].pauli_expectation(&PauliString(obs.to_vec()))?;
    }
    Ok(out)
}

/// Shifted entries of a two-mode Fock ensemble. Each shifted observable
/// `P + c I` is evaluated on the transduced state as a whole, so the shift
/// carries the same trace as the Pauli part.
pub fn fock_paulis<T: Real>(ensemble: &FockEnsemble<T>, g1: T, g2: T) -> Result<PauliVector<T>> {
    let rho = transduced_pair(ensemble, g1, g2)?;
    let traces = [rho[0].trace().re, rho[1].trace().re];
    let c = shift_constants(g1, g2);
    let mut values = [T::zero(); PAIR_LEN];
    for (i, (prep, obs)) in PAULI_ENTRIES.into_iter().enumerate() {
        values[i] = rho[prep as usize].pauli_expectation(&PauliString(obs.to_vec()))? + c[i] * traces[prep as usize];
    }
    Ok(PauliVector {
        values,
        shifted: c.map(|x| x != T::zero()),
        couplings: (g1, g2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_gamma() -> [f64; PAIR_LEN] {
        [0.3, -1.2, 0.6, 0.4, 0.9, 1.9, 1.1, 0.8, -0.2, 0.1, 0.3, 0.2, -0.4, 0.05]
    }

    #[test]
    fn closed_form_inverse() {
        for (g1, g2) in [(0.5, 0.5), (0.01, 0.03), (0.2, 0.07)] {
            let m = m_matrix::<f64>(g1, g2);
            let mi = m_inverse::<f64>(g1, g2);
            assert!(m.matmul(&mi).sub(&RMatrix::identity(PAIR_LEN)).max_abs() < 1e-12);
            assert_eq!(mi.as_slice().iter().filter(|x| **x != 0.0).count(), 16);
        }
        let mi = m_inverse::<f64>(0.5, 0.5);
        assert_eq!(mi[(0, 0)], 1.0);
        let mi = m_inverse::<f64>(0.3, 0.1);
        assert_eq!(mi[(4, 4)], mi[(4, 5)]);
        assert!((mi[(4, 4)] - 1.0 / (2.0 * 0.09)).abs() < 1e-12);
    }

    #[test]
    fn block_norms_at_gt_001() {
        let (a, b) = PairMap::<f64>::forward(0.01, 0.01).unwrap().block_norms();
        assert!((a - 50.0).abs() < 1e-9);
        assert!((b - 10000.0).abs() < 1e-6);
    }

    #[test]
    fn reversed_map_is_consistent() {
        let map = PairMap::<f64>::new(0.02, 0.05, Orientation::Reversed).unwrap();
        assert!(map.m().matmul(map.m_inv()).sub(&RMatrix::identity(PAIR_LEN)).max_abs() < 1e-12);
        let gamma = sample_gamma();
        let fwd = PairMap::<f64>::forward(0.05, 0.02).unwrap();
        let a = map.apply_m(&gamma);
        let b = fwd.apply_m(&swap_pair(&gamma));
        assert_eq!(a, b);
    }

    #[test]
    fn low_orders_reproduce_m_gamma() {
        let map = PairMap::<f64>::forward(0.03, 0.05).unwrap();
        let gamma = sample_gamma();
        let series = map.series(2).unwrap();
        let c = series.contributions(&gamma);
        let lin = map.apply_m(&gamma);
        let shifts = shift_constants(0.03, 0.05);
        for i in 0..PAIR_LEN {
            let up_to_two: f64 = c[i].iter().take(3).sum();
            assert!((up_to_two + shifts[i] - lin[i]).abs() < 1e-15, "entry {i}");
        }
        assert_eq!(map.tail(&gamma, 2).unwrap(), [0.0; PAIR_LEN]);
    }

    #[test]
    fn invert_linear_example() {
        let map = PairMap::<f64>::forward(0.01, 0.01).unwrap();
        let mut raw = [0.0; PAIR_LEN];
        raw[0] = 0.02;
        let p = map.shift(raw);
        let g = map.invert_linear(&p);
        assert!((g[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shift_examples() {
        let mut raw = [0.0f64; PAIR_LEN];
        raw[4] = -1.0;
        raw[5] = 1.0;
        let p = PauliVector::shift(raw, 0.01, 0.01);
        assert!((p.values[4] - 2e-4).abs() < 1e-15);
        assert_eq!(p.values[5], 0.0);
        assert_eq!(p.raw(), raw);
    }
}
