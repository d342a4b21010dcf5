//! Error versus copy count, and the copy count needed for a fixed error as
//! the number of modes grows.

use qcis_core::estimator::budget_for;
use qcis_core::gaussian::StatePrepParams;
use qcis_core::protocol::{run_protocol, OracleMode};
use qcis_core::random::{random_params, RandomStateBounds};
use qcis_core::shadows::DEFAULT_MOM_CONSTANT;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use super::protocol::protocol_config;
use crate::output::{num, RunContext};
use crate::{CliError, Config, Outcome};

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub t: u64,
    pub median_err: f64,
    pub q90_err: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthPoint {
    pub n: usize,
    /// Median of `error * sqrt(T)`.
    pub constant: f64,
    /// `(constant / eps)^2`.
    pub required_t: f64,
    /// Copy budget of the worst-case bound for the same settings.
    pub bound_t: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleComplexity {
    pub sweep: Vec<SweepPoint>,
    pub slope: f64,
    pub growth: Vec<GrowthPoint>,
    /// Log-log slope of required copies versus mode count.
    pub growth_exponent: f64,
}

/// `q`-quantile by linear interpolation of the sorted sample.
pub fn quantile(v: &[f64], q: f64) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    let pos = q * (s.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    s[lo] + (s[hi] - s[lo]) * (pos - lo as f64)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn geometric_grid(lo: f64, hi: f64, points: usize) -> Vec<u64> {
    if points <= 1 {
        return vec![lo.round() as u64];
    }
    (0..points)
        .map(|i| (lo * (hi / lo).powf(i as f64 / (points - 1) as f64)).round() as u64)
        .collect()
}

fn seed_for(master: u64, a: u64, b: u64) -> u64 {
    master
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(a.wrapping_mul(0xBF58_476D_1CE4_E5B9))
        .wrapping_add(b.wrapping_mul(0x94D0_49BB_1331_11EB))
}

/// Max estimation error of one pairwise-oracle run with `t` copies.
fn run_error(cfg: &Config, params: &StatePrepParams<f64>, t: u64, seed: u64) -> Result<f64, CliError> {
    let mut pc = protocol_config(cfg, params)?;
    pc.mode = OracleMode::PairwiseOracle;
    pc.copies = Some(t);
    let truth = params.state()?.moments();
    let run = run_protocol(params, &pc, &mut ChaCha8Rng::seed_from_u64(seed))?;
    Ok(run.estimate.max_error(&truth))
}

fn growth_state(cfg: &Config, n: usize, seed: u64) -> Result<StatePrepParams<f64>, CliError> {
    let bounds = RandomStateBounds {
        nbar_max: cfg.get_or("random_nbar_max", 0.5)?,
        squeeze_max: 0.3,
        two_mode_max: 0.2,
        alpha_max: 1.0,
        e_max: cfg.positive("random_e_max")?.unwrap_or(2.0),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(random_params(n, &bounds, &mut rng)?)
}

pub fn compute(cfg: &Config, seed: u64) -> Result<SampleComplexity, CliError> {
    let params = cfg.state_params()?;
    let t_min = cfg.positive("t_min")?.unwrap_or(1e6);
    let t_max = cfg.positive("t_max")?.unwrap_or(1e9);
    let grid = geometric_grid(t_min, t_max, cfg.get_or("t_points", 7usize)?);
    let seeds = cfg.get_or("seeds", 20u64)?;
    if seeds == 0 {
        return Err(CliError::Usage("`seeds` must be positive".into()));
    }

    let jobs: Vec<(usize, u64)> = (0..grid.len()).flat_map(|i| (0..seeds).map(move |s| (i, s))).collect();
    let errs: Vec<f64> = jobs
        .par_iter()
        .map(|&(i, s)| run_error(cfg, &params, grid[i], seed_for(seed, i as u64, s)))
        .collect::<Result<_, _>>()?;
    let sweep: Vec<SweepPoint> = grid
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let e = &errs[i * seeds as usize..(i + 1) * seeds as usize];
            SweepPoint {
                t,
                median_err: quantile(e, 0.5),
                q90_err: quantile(e, 0.9),
            }
        })
        .collect();
    let slope = log_log_slope(
        &sweep.iter().map(|p| p.t as f64).collect::<Vec<_>>(),
        &sweep.iter().map(|p| p.median_err).collect::<Vec<_>>(),
    );

    let n_list = cfg.list::<usize>("n_list")?.unwrap_or_else(|| vec![2, 4, 8, 16]);
    let growth_t: Vec<u64> = cfg
        .list::<f64>("growth_t")?
        .unwrap_or_else(|| vec![1e8, 1e9])
        .into_iter()
        .map(|t| t.round() as u64)
        .collect();
    let growth_seeds = cfg.get_or("growth_seeds", 8u64)?;
    let eps = cfg.positive("eps")?.unwrap_or(1e-3);
    let delta = cfg.get_or("delta", 0.05)?;
    let mut growth = Vec::new();
    for (ni, &n) in n_list.iter().enumerate() {
        let state = growth_state(cfg, n, seed_for(seed, 1000 + ni as u64, 0))?;
        let jobs: Vec<(usize, u64)> = (0..growth_t.len())
            .flat_map(|i| (0..growth_seeds).map(move |s| (i, s)))
            .collect();
        let scaled: Vec<f64> = jobs
            .par_iter()
            .map(|&(i, s)| {
                let t = growth_t[i];
                run_error(cfg, &state, t, seed_for(seed, 2000 + ni as u64, (i as u64) << 32 | s)).map(|e| e * (t as f64).sqrt())
            })
            .collect::<Result<_, _>>()?;
        let constant = quantile(&scaled, 0.5);
        let est = protocol_config(cfg, &state)?.estimator;
        growth.push(GrowthPoint {
            n,
            constant,
            required_t: (constant / eps).powi(2),
            bound_t: budget_for(&est, delta, n, DEFAULT_MOM_CONSTANT)?.total,
        });
    }
    let growth_exponent = if growth.len() >= 2 {
        log_log_slope(
            &growth.iter().map(|g| g.n as f64).collect::<Vec<_>>(),
            &growth.iter().map(|g| g.required_t).collect::<Vec<_>>(),
        )
    } else {
        f64::NAN
    };
    Ok(SampleComplexity {
        sweep,
        slope,
        growth,
        growth_exponent,
    })
}

pub fn run(cfg: &Config, ctx: &mut RunContext) -> Result<Outcome, CliError> {
    let res = compute(cfg, ctx.seed)?;
    let mut csv = String::from("T,median_err,q90_err\n");
    for p in &res.sweep {
        csv.push_str(&format!("{},{},{}\n", p.t, num(p.median_err), num(p.q90_err)));
    }
    ctx.write("sample_complexity.csv", &csv)?;
    let mut csv = String::from("n,error_constant,required_T,bound_T\n");
    for g in &res.growth {
        csv.push_str(&format!("{},{},{},{}\n", g.n, num(g.constant), num(g.required_t), g.bound_t));
    }
    ctx.write("required_copies.csv", &csv)?;
    let mut report = format!("error vs T log-log slope {:.4}\n", res.slope);
    for g in &res.growth {
        report.push_str(&format!("n = {:>4}  required T {:.4e}\n", g.n, g.required_t));
    }
    report.push_str(&format!("required T vs n log-log slope {:.4}\n", res.growth_exponent));
    ctx.write_manifest(
        "sample-complexity",
        cfg,
        json!({ "slope": res.slope, "growth_exponent": res.growth_exponent }),
    )?;
    Ok(Outcome { passed: true, report })
}
