use proptest::prelude::*;
use qcis_core::estimator::ceil_log2;
use qcis_core::gaussian::PAIR_LEN;
use qcis_core::pauli::{Pauli, PauliString};
use qcis_core::protocol::build_family;
use qcis_core::shadows::{ShadowRecord, Tally};
use qcis_core::transduction::{second_order_paulis, swap_pair, Orientation, PairMap};

fn coupling() -> impl Strategy<Value = f64> {
    0.005f64..0.2
}

fn pair_moments() -> impl Strategy<Value = [f64; PAIR_LEN]> {
    prop::array::uniform14(-4.0f64..4.0)
}

fn basis() -> impl Strategy<Value = Pauli> {
    prop_oneof![Just(Pauli::X), Just(Pauli::Y), Just(Pauli::Z)]
}

fn record(n: usize) -> impl Strategy<Value = ShadowRecord> {
    (
        prop::collection::vec(basis(), n),
        prop::collection::vec(prop_oneof![Just(1i8), Just(-1i8)], n),
    )
        .prop_map(|(bases, outcomes)| ShadowRecord {
            state_id: 0,
            bases,
            outcomes,
        })
}

fn low_weight_target(n: usize) -> impl Strategy<Value = PauliString> {
    (0..n, 0..n, basis(), basis()).prop_map(move |(a, b, p, q)| {
        if a == b {
            PauliString::from_sparse(n, &[(a, p)])
        } else {
            PauliString::from_sparse(n, &[(a, p), (b, q)])
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn second_order_data_inverts_exactly(gamma in pair_moments(), g1 in coupling(), g2 in coupling()) {
        let map = PairMap::forward(g1, g2).unwrap();
        let back = map.invert_linear(&map.shift(second_order_paulis(&gamma, g1, g2)));
        let scale = 1.0 / (g1.min(g2) * g1.min(g2));
        for i in 0..PAIR_LEN {
            prop_assert!((back[i] - gamma[i]).abs() < 1e-13 * scale, "entry {i}: {} vs {}", back[i], gamma[i]);
        }
    }

    #[test]
    fn linear_map_matches_its_inverse(g1 in coupling(), g2 in coupling()) {
        let map = PairMap::forward(g1, g2).unwrap();
        let prod = map.m().matmul(map.m_inv());
        for i in 0..PAIR_LEN {
            for j in 0..PAIR_LEN {
                let target = if i == j { 1.0 } else { 0.0 };
                prop_assert!((prod[(i, j)] - target).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn block_norms_scale_as_inverse_powers(g in coupling()) {
        let (a, b) = PairMap::forward(g, g).unwrap().block_norms();
        prop_assert!((a * 2.0 * g - 1.0).abs() < 1e-10);
        prop_assert!((b * g * g - 1.0).abs() < 1e-10);
        let (a2, b2) = PairMap::forward(g / 2.0, g / 2.0).unwrap().block_norms();
        prop_assert!((a2 / a - 2.0).abs() < 0.02);
        prop_assert!((b2 / b - 4.0).abs() < 0.04);
    }

    #[test]
    fn reversed_map_is_a_relabelling(gamma in pair_moments(), g1 in coupling(), g2 in coupling()) {
        let rev = PairMap::new(g1, g2, Orientation::Reversed).unwrap();
        let fwd = PairMap::forward(g2, g1).unwrap();
        let a = rev.apply_m(&gamma);
        let b = fwd.apply_m(&swap_pair(&gamma));
        for i in 0..PAIR_LEN {
            prop_assert!((a[i] - b[i]).abs() < 1e-12 * (1.0 + b[i].abs()));
        }
    }

    #[test]
    fn record_estimate_depends_only_on_support(r in record(6), t in low_weight_target(6)) {
        let support = t.support();
        let local = r.restrict(&support).estimate(&t.restrict(&support));
        prop_assert_eq!(r.estimate(&t), local);
        prop_assert!(r.estimate(&t).abs() <= 9.0);
    }

    #[test]
    fn record_lines_round_trip(r in record(5), id in 0usize..1000) {
        let r = ShadowRecord { state_id: id, ..r };
        prop_assert_eq!(ShadowRecord::from_line(&r.to_line()).unwrap(), r);
    }

    #[test]
    fn tally_agrees_with_records(records in prop::collection::vec(record(4), 1..60), t in low_weight_target(4), keep in prop::sample::subsequence(vec![0usize, 1, 2, 3], 1..=3)) {
        let tally = Tally::from_records(&records).unwrap();
        prop_assert_eq!(tally.total(), records.len() as u64);
        let direct: f64 = records.iter().map(|r| r.estimate(&t)).sum();
        prop_assert!((tally.estimate_sum(&t) - direct).abs() < 1e-9);
        let restricted: Vec<ShadowRecord> = records.iter().map(|r| r.restrict(&keep)).collect();
        prop_assert_eq!(tally.restrict(&keep), Tally::from_records(&restricted).unwrap());
    }

    #[test]
    fn family_covers_every_pair(n in 2usize..600) {
        let family = build_family(n).unwrap();
        prop_assert_eq!(family.len(), ceil_log2(n) + 1);
        prop_assert!(family.check_coverage().is_ok());
    }
}
