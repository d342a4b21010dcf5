//! Quantum Wick expansion of ordered quadrature products.
//!
//! For a Gaussian state with mean `mu` and two-point function
//! `G_jk = <dR_j dR_k> = Sigma_jk + (i/2) Omega_jk`, the expectation of an
//! ordered word is obtained by recursively taking the first letter either as
//! its mean or contracted against a later letter with `G(first, later)`.
//! Contractions keep the letters' order, which is what distinguishes the
//! quantum expansion from the classical Isserlis formula.

use serde::{Deserialize, Serialize};

use crate::linalg::CMatrix;
use crate::scalar::{cx_real, Cx, Real};

/// Which two-point function feeds the pairings.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum TwoPointKind {
    /// `Sigma + (i/2) Omega`: correct for ordered operator products.
    #[default]
    Ordered,
    /// `Sigma` alone. Only valid for classical (commuting) variables; kept to
    /// demonstrate that the commutator term is required.
    Symmetrized,
}

/// `<R_{w_1} ... R_{w_k}>` for quadrature indices `word`.
pub fn wick_moment_with<T: Real>(mean: &[T], two_point: &CMatrix<T>, word: &[usize]) -> Cx<T> {
    let Some((&first, rest)) = word.split_first() else {
        return cx_real(T::one());
    };
    let mut total = cx_real::<T>(mean[first]) * wick_moment_with(mean, two_point, rest);
    let mut remaining = Vec::with_capacity(rest.len().saturating_sub(1));
    for (j, &partner) in rest.iter().enumerate() {
        let g = two_point[(first, partner)];
        if g.re == T::zero() && g.im == T::zero() {
            continue;
        }
        remaining.clear();
        remaining.extend_from_slice(&rest[..j]);
        remaining.extend_from_slice(&rest[j + 1..]);
        total = total + g * wick_moment_with(mean, two_point, &remaining);
    }
    total
}

/// Moments of block-ordered words `R_0^{e_0} R_1^{e_1} ... R_{L-1}^{e_{L-1}}`
/// for every exponent tuple of total degree `<= max_degree`.
///
/// Because the recursion removes the first letter and one partner, a
/// block-ordered word stays block-ordered and identical letters are
/// interchangeable, so the expansion collapses to a dynamic programme over
/// exponent tuples.
#[derive(Clone, Debug)]
pub struct MomentTable<T: Real, const L: usize> {
    max_degree: usize,
    values: Vec<Cx<T>>,
}

impl<T: Real, const L: usize> MomentTable<T, L> {
    pub fn new(mean: &[T; L], two_point: &[[Cx<T>; L]; L], max_degree: usize) -> Self {
        let side = max_degree + 1;
        let size = side.pow(L as u32);
        let mut values = vec![cx_real(T::zero()); size];
        let mut table = Self { max_degree, values: Vec::new() };
        // visit tuples by increasing total degree
        let mut by_degree: Vec<Vec<[usize; L]>> = vec![Vec::new(); max_degree + 1];
        for flat in 0..size {
            let e = Self::unflatten(flat, side);
            let d: usize = e.iter().sum();
            if d <= max_degree {
                by_degree[d].push(e);
            }
        }
        values[0] = cx_real(T::one());
        for tuples in by_degree.iter().skip(1) {
            for e in tuples {
                let first = e.iter().position(|&x| x > 0).expect("nonzero degree");
                let mut reduced = *e;
                reduced[first] -= 1;
                let mut acc = cx_real::<T>(mean[first]) * values[Self::flatten(&reduced, side)];
                for (q, &count) in reduced.iter().enumerate() {
                    if count == 0 {
                        continue;
                    }
                    let g = two_point[first][q];
                    let mut r2 = reduced;
                    r2[q] -= 1;
                    acc = acc + g * values[Self::flatten(&r2, side)] * T::from_usize_lossy(count);
                }
                values[Self::flatten(e, side)] = acc;
            }
        }
        table.values = values;
        table
    }

    fn flatten(e: &[usize; L], side: usize) -> usize {
        e.iter().fold(0, |acc, &x| acc * side + x)
    }

    fn unflatten(mut flat: usize, side: usize) -> [usize; L] {
        let mut e = [0; L];
        for slot in e.iter_mut().rev() {
            *slot = flat % side;
            flat /= side;
        }
        e
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Moment for exponents `e`; panics if the total degree exceeds the table.
    #[inline]
    pub fn get(&self, e: [u8; L]) -> Cx<T> {
        let side = self.max_degree + 1;
        let idx = e.iter().fold(0usize, |acc, &x| acc * side + x as usize);
        self.values[idx]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{GaussianState, Letter, OperatorWord, StatePrepParams};
    use crate::scalar::cx;

    #[test]
    fn vacuum_qp_is_half_i() {
        let s = GaussianState::<f64>::vacuum(1);
        let v = s.wick_moment(&OperatorWord::new(vec![Letter::q(0), Letter::p(0)]));
        assert!((v - cx(0.0, 0.5)).norm() < 1e-15);
        let v = s.wick_moment(&OperatorWord::new(vec![Letter::p(0), Letter::q(0)]));
        assert!((v - cx(0.0, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn vacuum_fourth_moment() {
        let s = GaussianState::<f64>::vacuum(1);
        let v = s.wick_moment(&OperatorWord::new(vec![Letter::q(0); 4]));
        assert!((v - cx(0.75, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn low_orders() {
        let s = StatePrepParams::<f64>::reference_pair().state().unwrap();
        assert_eq!(s.wick_moment(&OperatorWord::default()), cx(1.0, 0.0));
        for i in 0..4 {
            let l = Letter { mode: i / 2, quad: if i % 2 == 0 { crate::gaussian::Quad::Q } else { crate::gaussian::Quad::P } };
            assert!((s.wick_moment(&OperatorWord::new(vec![l])).re - s.mean()[i]).abs() < 1e-15);
            for j in 0..4 {
                let l2 = Letter { mode: j / 2, quad: if j % 2 == 0 { crate::gaussian::Quad::Q } else { crate::gaussian::Quad::P } };
                let v = s.wick_moment(&OperatorWord::new(vec![l, l2]));
                assert!((v.re - s.second_moment(i, j)).abs() < 1e-14);
                let expected_im = if i / 2 == j / 2 && i != j { if i < j { 0.5 } else { -0.5 } } else { 0.0 };
                assert!((v.im - expected_im).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn symmetrised_words_are_real() {
        let s = StatePrepParams::<f64>::reference_pair().state().unwrap();
        for w in OperatorWord::all_of_order(2, 3) {
            let mut rev = w.0.clone();
            rev.reverse();
            let a = s.wick_moment(&w);
            let b = s.wick_moment(&OperatorWord::new(rev));
            // <w> and <reverse(w)> are complex conjugates
            assert!((a - b.conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn table_matches_recursion() {
        let s = StatePrepParams::<f64>::reference_pair().state().unwrap();
        let g = s.two_point(TwoPointKind::Ordered);
        let mean: [f64; 4] = [s.mean()[0], s.mean()[1], s.mean()[2], s.mean()[3]];
        let gp: [[Cx<f64>; 4]; 4] = std::array::from_fn(|i| std::array::from_fn(|j| g[(i, j)]));
        let table = MomentTable::new(&mean, &gp, 6);
        for a in 0..=6u8 {
            for b in 0..=(6 - a) {
                for c in 0..=(6 - a - b) {
                    for d in 0..=(6 - a - b - c) {
                        let word: Vec<usize> = std::iter::repeat_n(0, a as usize)
                            .chain(std::iter::repeat_n(1, b as usize))
                            .chain(std::iter::repeat_n(2, c as usize))
                            .chain(std::iter::repeat_n(3, d as usize))
                            .collect();
                        let direct = wick_moment_with(s.mean(), &g, &word);
                        let fast = table.get([a, b, c, d]);
                        assert!((direct - fast).norm() <= 1e-12 * (1.0 + direct.norm()), "{a}{b}{c}{d}");
                    }
                }
            }
        }
    }
}
