use qcis_core::fock::BasisSampler;
use qcis_core::pauli::{Pauli, PauliString};
use qcis_core::protocol::two_qubit_density;
use qcis_core::shadows::{
    batch_count, collect_shadows, estimate_from_batches, estimate_paulis, required_samples, sample_batches, Aggregation,
    Tally,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A mixed, correlated two-qubit state with known Pauli expectations; the
/// absolute values sum to less than one, so the density is positive.
fn reference_expectations() -> Vec<f64> {
    (0..15).map(|i| 0.065 * ((i as f64) * 1.7).sin()).collect()
}

fn sampler() -> (BasisSampler, Vec<f64>, Vec<PauliString>) {
    let exp = reference_expectations();
    let rho = two_qubit_density(&exp).unwrap();
    assert!(rho.validate_density(0.0, 1e-12).is_ok());
    (BasisSampler::new(&rho).unwrap(), exp, PauliString::two_qubit_all())
}

#[test]
fn tally_estimates_are_unbiased() {
    let (s, exp, strings) = sampler();
    let t = 400_000u64;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let tally = Tally::sample(&s, t, &mut rng);
    assert_eq!(tally.total(), t);
    for (p, e) in strings.iter().zip(&exp) {
        let est = tally.estimate_sum(p) / t as f64;
        let sigma = 3f64.powi(p.weight() as i32) / (t as f64).sqrt();
        assert!((est - e).abs() < 6.0 * sigma, "{p}: {est} vs {e}");
    }
}

#[test]
fn record_and_tally_paths_agree_statistically() {
    let (s, exp, strings) = sampler();
    let t = 60_000usize;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let records = collect_shadows(|bases: &[Pauli], r: &mut ChaCha8Rng| Ok(s.sample(bases, r)), 2, 0, t, &mut rng).unwrap();
    let from_records = estimate_paulis(&records, &strings, Aggregation::Mean).unwrap();
    let batches = sample_batches(&s, t as u64, 1, &mut rng).unwrap();
    let from_tallies = estimate_from_batches(&batches, &strings).unwrap();
    for ((a, b), e) in from_records.iter().zip(&from_tallies).zip(&exp) {
        let sigma = 9.0 / (t as f64).sqrt();
        assert!((a.value - e).abs() < 6.0 * sigma);
        assert!((b.value - e).abs() < 6.0 * sigma);
        assert_eq!(a.samples, t as u64);
    }
}

#[test]
fn median_of_means_meets_its_guarantee() {
    let (s, exp, strings) = sampler();
    let (eps, delta) = (0.05, 0.05);
    let t = required_samples(2, strings.len(), eps, delta).unwrap();
    let k = batch_count(strings.len(), delta);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut failures = 0;
    for _ in 0..40 {
        let est = estimate_from_batches(&sample_batches(&s, t, k, &mut rng).unwrap(), &strings).unwrap();
        if est.iter().zip(&exp).any(|(a, e)| (a.value - e).abs() > eps) {
            failures += 1;
        }
    }
    assert!(failures <= 2, "{failures} of 40 trials missed");
}

#[test]
fn seeded_collection_is_reproducible() {
    let (s, _, _) = sampler();
    let run = |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        collect_shadows(|b: &[Pauli], r: &mut ChaCha8Rng| Ok(s.sample(b, r)), 2, 3, 500, &mut rng).unwrap()
    };
    assert_eq!(run(7), run(7));
    assert_ne!(run(7), run(8));
}
