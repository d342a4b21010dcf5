//! Oracle-equivalence and invariant checks with optional fault injection.

use qcis_core::estimator::ceil_log2;
use qcis_core::fock::{build_state, build_state_with, jc_evolve, qubit_reduced, FockBuildOptions, TransductionConfig};
use qcis_core::gaussian::{OperatorWord, StatePrepParams, TwoPointKind, PAIR_LEN};
use qcis_core::linalg::RMatrix;
use qcis_core::pauli::{PauliString, QubitInit};
use qcis_core::protocol::build_family;
use qcis_core::random::{random_params, RandomStateBounds};
use qcis_core::transduction::{fock_raw_paulis, second_order_paulis, shift_constants, PairMap, PauliVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::output::RunContext;
use crate::{CliError, Config, Outcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    None,
    /// Use `1 + (gt)^2` instead of `1 + 2 (gt)^2` for the `Z` shifts.
    WrongShift,
    /// Use the symmetrised two-point function in the Wick expansion.
    SymmetrizedWick,
}

impl Fault {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "none" => Ok(Fault::None),
            "wrong-shift" => Ok(Fault::WrongShift),
            "symmetrized-wick" => Ok(Fault::SymmetrizedWick),
            other => Err(CliError::Usage(format!("unknown fault `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub measured: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: &'static str, measured: f64, threshold: f64) -> Self {
        Self {
            name,
            measured,
            threshold,
            passed: measured <= threshold,
        }
    }
}

fn random_gamma(rng: &mut ChaCha8Rng, e_max: f64) -> [f64; PAIR_LEN] {
    let mu = (2.0 * e_max).sqrt();
    std::array::from_fn(|i| {
        let bound = if i < 4 { mu } else { 2.0 * e_max };
        rng.random_range(-bound..bound)
    })
}

/// Closed-form second-order Paulis, shifted, inverted: must return the input.
pub fn check_m_inversion(fault: Fault, rng: &mut ChaCha8Rng) -> Result<Check, CliError> {
    let mut worst: f64 = 0.0;
    for (g1, g2) in [(0.01, 0.02), (0.05, 0.03), (0.2, 0.1)] {
        let map = PairMap::forward(g1, g2)?;
        let eye = map.m().matmul(map.m_inv()).sub(&RMatrix::identity(PAIR_LEN)).max_abs();
        worst = worst.max(eye);
        for _ in 0..50 {
            let gamma = random_gamma(rng, 3.0);
            let raw = second_order_paulis(&gamma, g1, g2);
            let p = match fault {
                Fault::WrongShift => {
                    let mut c = shift_constants(g1, g2);
                    c[4] = 1.0 + g1 * g1;
                    c[7] = 1.0 + g2 * g2;
                    PauliVector {
                        values: std::array::from_fn(|i| raw[i] + c[i]),
                        shifted: c.map(|x| x != 0.0),
                        couplings: (g1, g2),
                    }
                }
                _ => map.shift(raw),
            };
            let back = map.invert_linear(&p);
            let d = (0..PAIR_LEN).map(|i| (back[i] - gamma[i]).abs()).fold(0.0, f64::max);
            worst = worst.max(d);
        }
    }
    Ok(Check::at_most("m_inversion", worst, 1e-10))
}

pub fn check_wick_vs_fock(fault: Fault, rng: &mut ChaCha8Rng) -> Result<Check, CliError> {
    let bounds = RandomStateBounds {
        nbar_max: 0.5,
        squeeze_max: 0.4,
        two_mode_max: 0.4,
        alpha_max: 1.0,
        e_max: 2.0,
    };
    let kind = if fault == Fault::SymmetrizedWick {
        TwoPointKind::Symmetrized
    } else {
        TwoPointKind::Ordered
    };
    let params = random_params::<f64, _>(2, &bounds, rng)?;
    let state = params.state()?;
    let table = build_state(&params, 40)?.two_mode_moments(4);
    let mut worst: f64 = 0.0;
    for order in 1..=4 {
        for w in OperatorWord::all_of_order(2, order) {
            let fock = table.get(&w).ok_or_else(|| CliError::Numerical("missing Fock moment".into()))?;
            worst = worst.max((state.wick_moment_kind(&w, kind) - fock).norm());
        }
    }
    Ok(Check::at_most("wick_vs_fock", worst, 1e-6))
}

/// Three-mode joint simulation versus independent two-mode marginals.
pub fn check_oracle_equivalence(rng: &mut ChaCha8Rng) -> Result<Check, CliError> {
    let params = random_params::<f64, _>(3, &RandomStateBounds::low_energy(), rng)?;
    let opts = FockBuildOptions {
        prune: 1e-12,
        ..FockBuildOptions::default()
    };
    let ens = build_state_with(&params, 12, opts)?;
    let inits = [QubitInit::Plus, QubitInit::PlusI, QubitInit::Ground];
    let g = [0.03, 0.05, 0.04];
    let full = ens.transduce(&inits, &TransductionConfig::new(g.to_vec(), 1.0)?)?;
    let mut worst: f64 = 0.0;
    for (j, k) in [(0, 1), (0, 2), (1, 2)] {
        let marginal = ens.reduced_operator(&[j, k]);
        let cfg = TransductionConfig::new(vec![g[j], g[k]], 1.0)?;
        let pair = qubit_reduced(&jc_evolve(&marginal, &[inits[j], inits[k]], &cfg)?, 2);
        let joint = full.partial_trace(&[j, k]);
        for s in PauliString::two_qubit_all() {
            worst = worst.max((joint.pauli_expectation(&s)? - pair.pauli_expectation(&s)?).abs());
        }
    }
    Ok(Check::at_most("oracle_equivalence", worst, 1e-8))
}

pub fn check_block_norms() -> Result<Check, CliError> {
    let norms = |g: f64| PairMap::forward(g, g).map(|m| m.block_norms());
    let mut worst: f64 = 0.0;
    for g in [0.1, 0.05] {
        let (a0, b0) = norms(g)?;
        let (a1, b1) = norms(g / 2.0)?;
        worst = worst.max(((a1 / a0) - 2.0).abs() / 0.02).max(((b1 / b0) - 4.0).abs() / 0.04);
    }
    // measured is the ratio deviation in units of its tolerance
    Ok(Check::at_most("block_norm_scaling", worst, 1.0))
}

pub fn check_series_vs_fock() -> Result<Check, CliError> {
    let params = StatePrepParams::<f64>::reference_pair();
    let ens = build_state(&params, 50)?;
    let gamma = params.state()?.moments().pair_slice(0, 1);
    let gt = 0.01;
    let fock = fock_raw_paulis(&ens, gt, gt)?;
    let model = PairMap::forward(gt, gt)?.forward_model(&gamma, 8)?;
    let raw = model.raw();
    let worst = (0..PAIR_LEN).map(|i| (raw[i] - fock[i]).abs()).fold(0.0, f64::max);
    Ok(Check::at_most("series_vs_fock", worst, 1e-9))
}

pub fn check_family() -> Result<Check, CliError> {
    let mut failures = 0usize;
    for n in 2..=256 {
        let f = build_family(n)?;
        if f.len() != ceil_log2(n) + 1 || f.check_coverage().is_err() {
            failures += 1;
        }
    }
    Ok(Check::at_most("family_coverage", failures as f64, 0.0))
}

pub fn compute(cfg: &Config, seed: u64) -> Result<Vec<Check>, CliError> {
    let fault = Fault::parse(cfg.raw("inject").unwrap_or("none"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(vec![
        check_m_inversion(fault, &mut rng)?,
        check_wick_vs_fock(fault, &mut rng)?,
        check_oracle_equivalence(&mut rng)?,
        check_block_norms()?,
        check_series_vs_fock()?,
        check_family()?,
    ])
}

pub fn run(cfg: &Config, ctx: &mut RunContext) -> Result<Outcome, CliError> {
    let checks = compute(cfg, ctx.seed)?;
    let passed = checks.iter().all(|c| c.passed);
    let mut report = String::new();
    for c in &checks {
        report.push_str(&format!(
            "{}  {:<20} measured={:.3e}  threshold={:.3e}\n",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.threshold
        ));
    }
    let text = serde_json::to_string_pretty(&checks).map_err(|e| CliError::Numerical(e.to_string()))?;
    ctx.write("validate.json", &(text + "\n"))?;
    ctx.write_manifest("validate", cfg, json!({ "passed": passed, "failed": checks.iter().filter(|c| !c.passed).map(|c| c.name).collect::<Vec<_>>() }))?;
    Ok(Outcome { passed, report })
}
