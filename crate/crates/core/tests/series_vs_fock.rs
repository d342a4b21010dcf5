use qcis_core::fock::build_state;
use qcis_core::gaussian::StatePrepParams;
use qcis_core::transduction::{fock_paulis, fock_raw_paulis, shift_constants, Orientation, PairMap};

#[test]
fn reference_pair_series_matches_fock() {
    let params = StatePrepParams::<f64>::reference_pair();
    let ens = build_state(&params, 60).unwrap();
    assert!(ens.leakage() < 1e-10);
    let gamma = params.state().unwrap().moments().pair_slice(0, 1);
    for (g1, g2, order) in [(0.01, 0.02, 8), (0.05, 0.03, 12)] {
        let fock = fock_raw_paulis(&ens, g1, g2).unwrap();
        let model = PairMap::new(g1, g2, Orientation::Forward)
            .unwrap()
            .forward_model(&gamma, order)
            .unwrap();
        let shifts = shift_constants(g1, g2);
        for i in 0..14 {
            let d = (model.values[i] - shifts[i] - fock[i]).abs();
            assert!(d < 1e-9, "gt ({g1}, {g2}) entry {i}: {d:e}");
        }
    }
}

#[test]
fn reversed_orientation_matches_fock_on_swapped_modes() {
    let mut params = StatePrepParams::<f64>::reference_pair();
    params.nbar.swap(0, 1);
    params.single_squeeze.swap(0, 1);
    params.displacement.swap(0, 1);
    let ens = build_state(&params, 40).unwrap();
    // the swapped state viewed as pair (1, 0) of the original
    let gamma = StatePrepParams::<f64>::reference_pair().state().unwrap().moments().pair_slice(0, 1);
    let (gj, gk) = (0.02, 0.03);
    let map = PairMap::new(gj, gk, Orientation::Reversed).unwrap();
    let fock = fock_raw_paulis(&ens, gk, gj).unwrap();
    let model = map.forward_model(&gamma, 10).unwrap();
    let shifts = shift_constants(gk, gj);
    for i in 0..14 {
        assert!((model.values[i] - shifts[i] - fock[i]).abs() < 1e-9, "entry {i}");
    }
}

#[test]
fn shifted_fock_entries_track_the_series_closely() {
    let params = StatePrepParams::<f64>::reference_pair();
    let ens = build_state(&params, 60).unwrap();
    let gamma = params.state().unwrap().moments().pair_slice(0, 1);
    let map = PairMap::forward(0.01, 0.01).unwrap();
    let model = map.forward_model(&gamma, 16).unwrap();
    let fock = fock_paulis(&ens, 0.01, 0.01).unwrap();
    assert_eq!(fock.shifted, model.shifted);
    for i in 0..14 {
        let d = (model.values[i] - fock.values[i]).abs();
        assert!(d < 1e-14, "entry {i}: {d:e}");
    }
}
