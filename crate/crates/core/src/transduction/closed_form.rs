//! Closed-form second-order Pauli expectations of a mode pair.

use crate::gaussian::PAIR_LEN;
use crate::pauli::Pauli;
use crate::scalar::Real;

use super::{Preparation, PAULI_ENTRIES};

/// Second-order expansion in `(g1, g2)` of `<O>` after the interaction, for
/// either preparation. `gamma` is in the pair ordering.
pub fn second_order_pauli<T: Real>(gamma: &[T; PAIR_LEN], g1: T, g2: T, prep: Preparation, obs: [Pauli; 2]) -> T {
    use Pauli::{I, X, Y, Z};
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let one = T::one();
    let [q1, p1, q2, p2] = [gamma[0], gamma[1], gamma[2], gamma[3]];
    let (q1sq, p1sq, q2sq, _p2sq) = (gamma[4], gamma[5], gamma[6], gamma[7]);
    let (s1, s2) = (gamma[8], gamma[9]);
    let (q1q2, q1p2, p1q2, p1p2) = (gamma[10], gamma[11], gamma[12], gamma[13]);
    let z1_dev = two * g1 * g1 * (q1sq + p1sq - one);
    let z2_dev = two * g2 * g2 * (gamma[6] + gamma[7] - one);
    match prep {
        Preparation::Psi1 => match obs {
            [I, I] => one,
            [X, I] => two * g1 * p1,
            [Y, I] => two * g1 * q1,
            [Z, I] => -(one - z1_dev),
            [I, X] => two * g2 * p2,
            [I, Y] => two * g2 * q2,
            [I, Z] => -(one - z2_dev),
            [X, X] => four * g1 * g2 * p1p2,
            [X, Y] => four * g1 * g2 * p1q2,
            [Y, X] => four * g1 * g2 * q1p2,
            [Y, Y] => four * g1 * g2 * q1q2,
            [X, Z] => -two * g1 * p1,
            [Y, Z] => -two * g1 * q1,
            [Z, X] => -two * g2 * p2,
            [Z, Y] => -two * g2 * q2,
            [Z, Z] => one - z1_dev - z2_dev,
        },
        Preparation::Psi2 => match obs {
            [I, I] => one,
            [X, I] => one - two * g1 * g1 * p1sq,
            [Y, I] => -two * g1 * g1 * s1,
            [Z, I] => two * g1 * (p1 - g1),
            [I, X] => -two * g2 * g2 * s2,
            [I, Y] => one - two * g2 * g2 * q2sq,
            [I, Z] => two * g2 * (q2 - g2),
            [X, X] => -two * g2 * g2 * s2,
            [X, Y] => one - two * g1 * g1 * p1sq - two * g2 * g2 * q2sq,
            [X, Z] => two * g2 * (q2 - g2),
            [Y, Y] => -two * g1 * g1 * s1,
            [Z, Y] => two * g1 * (p1 - g1),
            [Z, Z] => four * g1 * g2 * p1q2,
            [Y, X] | [Y, Z] | [Z, X] => T::zero(),
        },
    }
}

/// Raw (unshifted) second-order values of the 14 entries.
pub fn second_order_paulis<T: Real>(gamma: &[T; PAIR_LEN], g1: T, g2: T) -> [T; PAIR_LEN] {
    PAULI_ENTRIES.map(|(prep, obs)| second_order_pauli(gamma, g1, g2, prep, obs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transduction::{moment_table, PairSeries};

    #[test]
    fn matches_series_truncated_at_two_on_a_physical_pair() {
        use crate::gaussian::StatePrepParams;
        let state = StatePrepParams::<f64>::reference_pair().state().unwrap();
        let gamma = state.moments().pair_slice(0, 1);
        let (g1, g2) = (0.013, 0.021);
        let table = moment_table(&gamma, 2);
        let all: Vec<[Pauli; 2]> = Pauli::ALL
            .iter()
            .flat_map(|&a| Pauli::ALL.iter().map(move |&b| [a, b]))
            .filter(|o| *o != [Pauli::I, Pauli::I])
            .collect();
        for prep in [Preparation::Psi1, Preparation::Psi2] {
            let s = PairSeries::new(2, [g1, g2], prep.inits(), &all);
            let c = s.contributions(&table);
            for (obs, orders) in all.iter().zip(&c) {
                let series: f64 = orders.iter().sum();
                let closed = second_order_pauli(&gamma, g1, g2, prep, *obs);
                assert!((series - closed).abs() < 1e-14, "{prep:?} {obs:?}: {series} vs {closed}");
            }
        }
    }
}
