use std::collections::HashMap;

use num::{BigInt, BigRational, Zero};
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::plan::realization_count;
use super::rate::realization;
use crate::analysis::{fmt_rational, rational_to_f64};
use crate::error::SimError;
use crate::protocol::{
    random_symbols, stream_rng, PrivateQueries, QueryBuilder, RngDomain, SystemConfig,
};

/// p-values below this flag a server.
pub const FLAG_P: f64 = 1e-6;

/// Largest joint domain the empirical audit will histogram.
pub const JOINT_DOMAIN_MAX: u64 = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditMethod {
    Exact,
    Empirical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditScope {
    /// All users' queries to a server, jointly.
    Joint,
    /// Each user's query on its own.
    Marginal,
}

#[derive(Clone, Debug, Serialize)]
pub struct ServerPrivacy {
    pub server: usize,
    /// Largest total-variation distance between the query distribution under
    /// one demand vector and the mixture over all of them. Exact method only.
    pub tv_distance: Option<String>,
    pub tv: f64,
    pub chi_square: Option<f64>,
    pub df: Option<u64>,
    pub p_value: Option<f64>,
    /// Whether the observed distribution is uniform on its support.
    pub uniform: Option<bool>,
    /// Queries whose symbol sum was not the server index.
    pub sum_violations: u64,
    pub flagged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PrivacyReport {
    pub method: AuditMethod,
    pub scope: AuditScope,
    pub demand_vectors: Vec<Vec<usize>>,
    /// Realizations (exact) or samples per demand vector (empirical).
    pub samples: u64,
    pub servers: Vec<ServerPrivacy>,
    pub passed: bool,
}

/// Places the demanded file at position `d` as `b`, zeros elsewhere. Leaks
/// the demand; kept as a negative control for the audits.
#[derive(Clone, Copy, Debug, Default)]
pub struct LeakyQueries;

impl QueryBuilder for LeakyQueries {
    fn build(&self, server: usize, _servers: usize, demand: usize, v: &[u32]) -> Vec<u32> {
        let mut q = vec![0; v.len() + 1];
        q[demand] = server as u32;
        q
    }
}

fn check_demands(config: &SystemConfig, demands: &[Vec<usize>]) -> Result<(), SimError> {
    let mut distinct = demands.to_vec();
    distinct.sort();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(SimError::Plan(
            "a privacy audit needs two distinct demand vectors".into(),
        ));
    }
    for d in demands {
        if d.len() != config.users() || d.iter().any(|&x| x >= config.files()) {
            return Err(SimError::Plan(format!(
                "demand vector {d:?} does not fit K={} N={}",
                config.users(),
                config.files()
            )));
        }
    }
    Ok(())
}

/// Two demand vectors that differ for every user (when `N > 1`).
pub fn default_demands(config: &SystemConfig) -> Vec<Vec<usize>> {
    vec![
        vec![0; config.users()],
        vec![config.files() - 1; config.users()],
    ]
}

pub fn privacy_audit_exact(
    config: &SystemConfig,
    demands: &[Vec<usize>],
    cap: u64,
) -> Result<PrivacyReport, SimError> {
    privacy_audit_exact_with(config, demands, cap, &PrivateQueries)
}

/// Enumerates every realization of `(V^1..V^K)` and compares, per server,
/// the exact distribution of the joint query tuple across demand vectors.
pub fn privacy_audit_exact_with(
    config: &SystemConfig,
    demands: &[Vec<usize>],
    cap: u64,
    builder: &dyn QueryBuilder,
) -> Result<PrivacyReport, SimError> {
    check_demands(config, demands)?;
    let needed = realization_count(config);
    if needed > cap as u128 {
        return Err(SimError::CapExceeded { needed, cap });
    }
    let count = needed as u64;
    let servers = config.servers();

    let report: Vec<ServerPrivacy> = (0..servers)
        .into_par_iter()
        .map(|b| {
            let mut violations = 0u64;
            let hists: Vec<HashMap<Vec<u32>, u64>> = demands
                .iter()
                .map(|d| {
                    let mut h: HashMap<Vec<u32>, u64> = HashMap::new();
                    for i in 0..count {
                        let v = realization(config, i);
                        let mut key = Vec::with_capacity(config.users() * config.files());
                        for (k, vk) in v.iter().enumerate() {
                            let q = builder.build(b, servers, d[k], vk);
                            if symbol_sum(&q, servers) != b {
                                violations += 1;
                            }
                            key.extend(q);
                        }
                        *h.entry(key).or_default() += 1;
                    }
                    h
                })
                .collect();

            // distance of each distribution to the mixture
            let mut mixture: HashMap<&Vec<u32>, u64> = HashMap::new();
            for h in &hists {
                for (key, &c) in h {
                    *mixture.entry(key).or_default() += c;
                }
            }
            let m = hists.len() as u64;
            let mut worst = BigRational::zero();
            for h in &hists {
                let diff: u64 = mixture
                    .iter()
                    .map(|(key, &mc)| (h.get(*key).copied().unwrap_or(0) * m).abs_diff(mc))
                    .sum();
                let tv = BigRational::new(BigInt::from(diff), BigInt::from(2 * m * count));
                if tv > worst {
                    worst = tv;
                }
            }
            let uniform = hists
                .iter()
                .all(|h| h.len() as u64 == count && h.values().all(|&c| c == 1));
            ServerPrivacy {
                server: b,
                tv_distance: Some(fmt_rational(&worst)),
                tv: rational_to_f64(&worst),
                chi_square: None,
                df: None,
                p_value: None,
                uniform: Some(uniform),
                sum_violations: violations,
                flagged: !worst.is_zero() || violations > 0,
            }
        })
        .collect();

    Ok(PrivacyReport {
        method: AuditMethod::Exact,
        scope: AuditScope::Joint,
        demand_vectors: demands.to_vec(),
        samples: count,
        passed: report.iter().all(|s| !s.flagged),
        servers: report,
    })
}

fn symbol_sum(q: &[u32], servers: usize) -> usize {
    (q.iter().map(|&x| x as u64).sum::<u64>() % servers as u64) as usize
}

/// Index of the first `N-1` symbols of `q`, read base `B`.
fn prefix_index(q: &[u32], servers: usize) -> u64 {
    q[..q.len() - 1]
        .iter()
        .fold(0u64, |acc, &x| acc * servers as u64 + x as u64)
}

/// Pearson statistic of `counts` against the uniform distribution.
fn chi_square_uniform(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let e = n as f64 / counts.len() as f64;
    counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum()
}

/// Samples `samples` query rounds per demand vector and tests, per server,
/// that the first `N-1` symbols of each query are uniform. The last symbol
/// is fixed by the sum rule, which is checked separately.
///
/// With `joint` and a joint domain of at most [`JOINT_DOMAIN_MAX`], all users'
/// prefixes are histogrammed together; otherwise each user separately.
/// Independent statistics are summed, so each server gets one test.
pub fn privacy_audit_empirical(
    config: &SystemConfig,
    demands: &[Vec<usize>],
    samples: u64,
    builder: &dyn QueryBuilder,
    joint: bool,
) -> Result<PrivacyReport, SimError> {
    check_demands(config, demands)?;
    if samples < 1000 {
        return Err(SimError::Plan(
            "the empirical audit needs at least 1000 samples".into(),
        ));
    }
    let servers = config.servers();
    let users = config.users();
    let n = config.files();
    let prefix_domain = (servers as u64).checked_pow((n - 1) as u32);
    let joint_domain = prefix_domain.and_then(|p| p.checked_pow(users as u32));
    let scope = match joint_domain {
        Some(d) if joint && d <= JOINT_DOMAIN_MAX => AuditScope::Joint,
        _ => AuditScope::Marginal,
    };
    let cells = match scope {
        AuditScope::Joint => joint_domain.unwrap(),
        AuditScope::Marginal => prefix_domain
            .filter(|&d| d <= 1 << 24)
            .ok_or_else(|| SimError::Plan("per-user query domain too large to histogram".into()))?,
    } as usize;
    let tables = if scope == AuditScope::Joint { 1 } else { users };

    // hist[di][b][table][cell]
    let hist: Vec<Vec<Vec<Vec<u64>>>> = demands
        .par_iter()
        .enumerate()
        .map(|(di, d)| {
            let mut h = vec![vec![vec![0u64; cells]; tables]; servers];
            let mut violations = vec![0u64; servers];
            for i in 0..samples {
                let v: Vec<Vec<u32>> = (0..users)
                    .map(|k| {
                        let stream = (di * users + k) as u64;
                        let mut rng = stream_rng(config.seed(), i, RngDomain::Queries, stream);
                        random_symbols(&mut rng, servers, n - 1)
                    })
                    .collect();
                for (b, hb) in h.iter_mut().enumerate() {
                    let mut joint_idx = 0u64;
                    for k in 0..users {
                        let q = builder.build(b, servers, d[k], &v[k]);
                        if symbol_sum(&q, servers) != b {
                            violations[b] += 1;
                        }
                        let idx = prefix_index(&q, servers);
                        match scope {
                            AuditScope::Joint => {
                                joint_idx = joint_idx * prefix_domain.unwrap() + idx
                            }
                            AuditScope::Marginal => hb[k][idx as usize] += 1,
                        }
                    }
                    if scope == AuditScope::Joint {
                        hb[0][joint_idx as usize] += 1;
                    }
                }
            }
            // smuggle the violation counts through an extra table
            for (b, hb) in h.iter_mut().enumerate() {
                hb.push(vec![violations[b]]);
            }
            h
        })
        .collect();

    let report: Vec<ServerPrivacy> = (0..servers)
        .map(|b| {
            let mut stat = 0.0;
            let mut df = 0u64;
            let mut violations = 0u64;
            for h in &hist {
                for table in &h[b][..tables] {
                    stat += chi_square_uniform(table);
                    df += cells as u64 - 1;
                }
                violations += h[b][tables][0];
            }
            // empirical TV between the first demand vector and each other one
            let first = &hist[0][b];
            let tv = hist[1..]
                .iter()
                .flat_map(|h| {
                    (0..tables).map(move |t| {
                        let a = &first[t];
                        let c = &h[b][t];
                        a.iter().zip(c).map(|(&x, &y)| x.abs_diff(y)).sum::<u64>() as f64
                            / (2.0 * samples as f64)
                    })
                })
                .fold(0.0, f64::max);
            let p_value = if df == 0 {
                1.0
            } else {
                ChiSquared::new(df as f64)
                    .map(|c| c.sf(stat))
                    .unwrap_or(f64::NAN)
            };
            ServerPrivacy {
                server: b,
                tv_distance: None,
                tv,
                chi_square: Some(stat),
                df: Some(df),
                p_value: Some(p_value),
                uniform: None,
                sum_violations: violations,
                // a NaN p-value counts as flagged
                flagged: p_value.is_nan() || p_value < FLAG_P || violations > 0,
            }
        })
        .collect();

    Ok(PrivacyReport {
        method: AuditMethod::Empirical,
        scope,
        demand_vectors: demands.to_vec(),
        samples,
        passed: report.iter().all(|s| !s.flagged),
        servers: report,
    })
}
