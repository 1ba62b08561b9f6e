use num::{BigInt, BigRational};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::plan::{realization_count, DemandPolicy, ExperimentPlan, Mode};
use crate::analysis::{fmt_rational, per_server_rates, theorem1_rate, SchemeMetrics};
use crate::error::SimError;
use crate::protocol::{
    run_round, run_round_with_randomness, stream_rng, DeliveryMode, FileSet, RngDomain,
    RoundTranscript, SystemConfig,
};

/// Outcome of [`estimate_rate`].
#[derive(Clone, Debug, Serialize)]
pub struct RateEstimate {
    pub mode: Mode,
    pub delivery: DeliveryMode,
    /// Rounds run: trials, or realizations when exhaustive.
    pub rounds: u128,
    pub mean: f64,
    /// Exact mean as `p/q`, when every round's rate is a known rational.
    pub mean_exact: String,
    pub std_dev: Option<f64>,
    /// 95% normal-approximation half-width (Monte Carlo only).
    pub half_width: Option<f64>,
    pub per_server_mean: Vec<f64>,
    pub per_server_exact: Vec<String>,
    /// The closed-form value for the mode's delivery.
    pub expected: String,
    pub expected_value: f64,
    /// Per-server closed forms; empty for uncoded delivery.
    pub expected_per_server: Vec<String>,
    /// Exact agreement with the closed form (exhaustive and uncoded runs).
    pub matches_expected: Option<bool>,
    pub decode_failures: u64,
    pub upload_bits_analytic: f64,
    pub subpacketization: String,
    #[serde(skip)]
    pub mean_rational: BigRational,
    #[serde(skip)]
    pub per_server_rational: Vec<BigRational>,
    #[serde(skip)]
    pub metrics: SchemeMetrics,
    #[serde(skip)]
    pub transcripts: Vec<RoundTranscript>,
}

impl RateEstimate {
    pub fn all_decoded(&self) -> bool {
        self.decode_failures == 0
    }
}

/// What a single round contributes.
struct RoundTally {
    rate: f64,
    /// Bits per server.
    bits: Vec<u64>,
    ok: bool,
    transcript: Option<RoundTranscript>,
}

impl RoundTally {
    fn from(t: RoundTranscript, keep: bool) -> Self {
        Self {
            rate: t.rate_value,
            bits: t.download_bits.clone(),
            ok: t.all_decoded(),
            transcript: keep.then_some(t),
        }
    }
}

/// Demands for trial `trial` under `policy`.
pub fn trial_demands(config: &SystemConfig, policy: &DemandPolicy, trial: u64) -> Vec<usize> {
    match policy {
        DemandPolicy::Fixed(d) => d.clone(),
        DemandPolicy::Uniform => {
            let mut rng = stream_rng(config.seed(), trial, RngDomain::Demands, 0);
            (0..config.users())
                .map(|_| rng.gen_range(0..config.files()))
                .collect()
        }
    }
}

/// Realization `index` of all users' randomness, as base-`B` digits.
pub fn realization(config: &SystemConfig, index: u64) -> Vec<Vec<u32>> {
    let b = config.servers() as u64;
    let mut x = index;
    (0..config.users())
        .map(|_| {
            (0..config.files() - 1)
                .map(|_| {
                    let d = (x % b) as u32;
                    x /= b;
                    d
                })
                .collect()
        })
        .collect()
}

pub fn estimate_rate(plan: &ExperimentPlan) -> Result<RateEstimate, SimError> {
    plan.check()?;
    let config = &plan.config;
    let files = plan.file_set()?;
    let keep = plan.keep_transcripts as u64;

    let tallies: Vec<RoundTally> = match (plan.mode, plan.delivery) {
        (Mode::Fixed, _) => {
            let DemandPolicy::Fixed(d) = &plan.demands else {
                unreachable!("checked")
            };
            let v = plan.randomness.clone().expect("checked");
            let t = run_round_with_randomness(config, &files, d, v)?;
            vec![RoundTally::from(maybe_dump(t, plan.raw_dump), keep > 0)]
        }
        (Mode::Exhaustive, DeliveryMode::Pda) => {
            let DemandPolicy::Fixed(d) = &plan.demands else {
                unreachable!("checked")
            };
            let count = realization_count(config) as u64;
            (0..count)
                .into_par_iter()
                .map(|i| {
                    let t = run_round_with_randomness(config, &files, d, realization(config, i))?;
                    Ok(RoundTally::from(maybe_dump(t, plan.raw_dump), i < keep))
                })
                .collect::<Result<_, SimError>>()?
        }
        (Mode::Exhaustive, DeliveryMode::Uncoded) => {
            let d = trial_demands(config, &plan.demands, 0);
            let t = run_round(config, &files, &d, 0, DeliveryMode::Uncoded)?;
            vec![RoundTally::from(t, keep > 0)]
        }
        (Mode::MonteCarlo, delivery) => (0..plan.trials)
            .into_par_iter()
            .map(|i| {
                let d = trial_demands(config, &plan.demands, i);
                let t = run_round(config, &files, &d, i, delivery)?;
                Ok(RoundTally::from(maybe_dump(t, plan.raw_dump), i < keep))
            })
            .collect::<Result<_, SimError>>()?,
    };

    Ok(summarize(plan, &files, tallies))
}

fn maybe_dump(t: RoundTranscript, raw: bool) -> RoundTranscript {
    if raw {
        t.with_raw_dump()
    } else {
        t
    }
}

fn summarize(plan: &ExperimentPlan, files: &FileSet, tallies: Vec<RoundTally>) -> RateEstimate {
    let config = &plan.config;
    let servers = config.servers();
    let n = tallies.len();
    let unit = BigInt::from(files.padded_len() as u64 * 8);

    let mut server_bits = vec![0u128; servers];
    for t in &tallies {
        for (acc, &b) in server_bits.iter_mut().zip(&t.bits) {
            *acc += b as u128;
        }
    }
    let denom = &unit * BigInt::from(n);
    let per_server_rational: Vec<BigRational> = server_bits
        .iter()
        .map(|&b| BigRational::new(BigInt::from(b), denom.clone()))
        .collect();
    let mean_rational: BigRational = per_server_rational.iter().sum();

    let mean = tallies.iter().map(|t| t.rate).sum::<f64>() / n as f64;
    let std_dev = (n > 1).then(|| {
        let var = tallies.iter().map(|t| (t.rate - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        var.sqrt()
    });
    let half_width = match plan.mode {
        Mode::MonteCarlo => std_dev.map(|s| 1.96 * s / (n as f64).sqrt()),
        _ => None,
    };

    let metrics = theorem1_rate(config.pda(), servers, config.files());
    let (expected, expected_per_server) = match plan.delivery {
        DeliveryMode::Pda => (
            metrics.coded_branch.clone(),
            per_server_rates(config.pda(), servers, config.files()),
        ),
        // the uncoded split across servers is only near-equal
        DeliveryMode::Uncoded => (metrics.uncoded_branch.clone(), Vec::new()),
    };
    let matches_expected = match (plan.mode, plan.delivery) {
        (Mode::Exhaustive, DeliveryMode::Pda) => Some(mean_rational == expected),
        (_, DeliveryMode::Uncoded) => Some(mean_rational == expected),
        _ => None,
    };
    let to_f64 = crate::analysis::rational_to_f64;

    RateEstimate {
        mode: plan.mode,
        delivery: plan.delivery,
        rounds: n as u128,
        mean,
        mean_exact: fmt_rational(&mean_rational),
        std_dev,
        half_width,
        per_server_mean: per_server_rational.iter().map(to_f64).collect(),
        per_server_exact: per_server_rational.iter().map(fmt_rational).collect(),
        expected: fmt_rational(&expected),
        expected_value: to_f64(&expected),
        expected_per_server: expected_per_server.iter().map(fmt_rational).collect(),
        matches_expected,
        decode_failures: tallies.iter().filter(|t| !t.ok).count() as u64,
        upload_bits_analytic: metrics.upload.bits,
        subpacketization: metrics.subpacketization.to_string(),
        transcripts: tallies.into_iter().filter_map(|t| t.transcript).collect(),
        mean_rational,
        per_server_rational,
        metrics,
    }
}

/// Exact mean rate over all `B^{K(N-1)}` realizations with fixed demands.
/// Shorthand for an exhaustive [`estimate_rate`] with a small file.
pub fn exhaustive_mean(
    config: &SystemConfig,
    demands: &[usize],
    cap: u64,
) -> Result<RateEstimate, SimError> {
    let mut plan = ExperimentPlan::new(config.clone(), 1);
    plan.mode = Mode::Exhaustive;
    plan.demands = DemandPolicy::Fixed(demands.to_vec());
    plan.cap = cap;
    plan.keep_transcripts = 0;
    estimate_rate(&plan)
}
