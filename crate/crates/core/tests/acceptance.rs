//! One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

mod common;

use std::time::{Duration, Instant};

use mupir::analysis::{
    emit_figure_data, man_metrics, order_optimality_check, per_server_rates, regular_rate,
    theorem1_rate, FigureId, FigureSpec,
};
use mupir::constructions::{catalog, man_pda, single_user_pda, ManParams, SEC3A_PRINTED_TEXT};
use mupir::pda::{Condition, Pda, PdaArray};
use mupir::protocol::{run_round_with_randomness, FileSet, PrivateQueries, SystemConfig};
use mupir::sim::{
    default_demands, exhaustive_mean, privacy_audit_empirical, privacy_audit_exact, worked,
    LeakyQueries, DEFAULT_CAP,
};
use num::{BigInt, BigRational, One};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn inv_pow(base: i64, exp: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(base).pow(exp))
}

fn criterion_1() -> Outcome {
    let sec3a = catalog("sec3a").map_err(|e| e.to_string())?;
    ensure(sec3a.params().to_string() == "(8,6,3,11)", || {
        format!("sec3a is {}", sec3a.params())
    })?;
    for (i, listed) in worked::SEC3A_OCCUPANCY.iter().enumerate() {
        let s = i as u32 + 1;
        let got = sec3a.occupancy().users_of_one_based(s);
        ensure(got == listed.to_vec(), || {
            format!("K_{s} = {got:?}, listed {listed:?}")
        })?;
    }
    let sec4a = catalog("sec4a").map_err(|e| e.to_string())?;
    ensure(sec4a.params().to_string() == "(6,4,2,4)", || {
        format!("sec4a is {}", sec4a.params())
    })?;
    ensure(sec4a.regularity() == Some(3), || {
        "sec4a is not 3-regular".into()
    })?;

    // the array as usually printed breaks C3b for label 5, nothing else
    let report = PdaArray::parse(SEC3A_PRINTED_TEXT)
        .map_err(|e| e.to_string())?
        .validate();
    let c3b_only = report.violations.len() == 1
        && report.violations[0].condition == Condition::C3b
        && report.violations[0].cells.contains(&(2, 5));
    ensure(c3b_only, || {
        format!("printed array: {:?}", report.violations)
    })?;
    Ok(
        "repaired sec3a (8,6,3,11) with all 11 listed K_s; sec4a 3-regular (6,4,2,4); \
        printed sec3a rejected on C3b at (2,5)"
            .into(),
    )
}

fn criterion_2() -> Outcome {
    let r = theorem1_rate(&catalog("sec3a").unwrap(), 2, 8).rate_f64();
    ensure((r - 3.663).abs() < 1e-3, || format!("sec3a rate {r}"))?;
    let m = theorem1_rate(&catalog("sec4a").unwrap(), 3, 6);
    let expected = (rational(3, 1) - inv_pow(3, 15)) / rational(2, 1);
    ensure(m.rate == expected, || format!("sec4a rate {}", m.rate))?;
    Ok(format!("sec3a {r:.6}; sec4a (3 - 3^-15)/2 exactly"))
}

fn worked_config(file_len: usize) -> SystemConfig {
    let pda = catalog("sec4a").unwrap();
    SystemConfig::new(worked::SERVERS, worked::FILES, 6, file_len, pda, 1).unwrap()
}

fn criterion_3() -> Outcome {
    let config = worked_config(8);
    let files = FileSet::synthetic(&config);
    let t = run_round_with_randomness(&config, &files, &worked::DEMANDS, worked::randomness())
        .map_err(|e| e.to_string())?;
    for k in 0..6 {
        for b in 0..3 {
            let want = worked::QUERIES[k][b].to_vec();
            ensure(t.queries[b][k] == want, || {
                format!("Q_{b}^{} = {:?}, expected {want:?}", k + 1, t.queries[b][k])
            })?;
        }
    }
    Ok("18/18 queries symbol-for-symbol".into())
}

fn criterion_4() -> Outcome {
    let stats = common::run_roundtrips(4096, 8, 2024);
    ensure(stats.rounds >= 1000, || {
        format!("only {} rounds", stats.rounds)
    })?;
    ensure(stats.failures.is_empty(), || {
        format!("{:?}", stats.failures)
    })?;
    Ok(format!(
        "{} rounds over {} arrays x B in {{2,3,4}}, L = 4096, all users byte-exact",
        stats.rounds,
        common::roundtrip_family().len()
    ))
}

fn criterion_5() -> Outcome {
    let config = worked_config(4096);
    let files = FileSet::synthetic(&config);
    let t = run_round_with_randomness(&config, &files, &worked::DEMANDS, worked::randomness())
        .map_err(|e| e.to_string())?;
    let l = 4096u64 * 8;
    ensure(t.present.iter().all(|p| p.len() == 4), || {
        format!("suppression happened: {:?}", t.present)
    })?;
    ensure(2 * t.download_bits_total == 3 * l, || {
        format!("{} bits for L = {l}", t.download_bits_total)
    })?;
    let upload = 90.0 * 3f64.log2();
    ensure((t.upload_bits_analytic - upload).abs() < 1e-9, || {
        format!("upload {}", t.upload_bits_analytic)
    })?;
    let sub = theorem1_rate(config.pda(), 3, 6).subpacketization;
    ensure(sub == 8u32.into() && config.subpacketization() == 8, || {
        format!("subpacketization {sub}")
    })?;
    ensure(t.all_decoded(), || "worked round did not decode".into())?;
    Ok(format!(
        "{} bits = 1.5L, upload {:.4} = 90 log2 3, subpacketization 8",
        t.download_bits_total, upload
    ))
}

fn criterion_6() -> Outcome {
    let pda = man_pda(ManParams::new(2, 1).unwrap()).unwrap();
    let config = SystemConfig::new(2, 2, 2, 1, pda, 0).unwrap();
    let est = exhaustive_mean(&config, &[0, 1], DEFAULT_CAP).map_err(|e| e.to_string())?;
    ensure(est.rounds == 4, || format!("{} realizations", est.rounds))?;
    ensure(est.mean_rational == rational(7, 8), || {
        format!("mean {}", est.mean_exact)
    })?;
    ensure(est.per_server_rational[0] == rational(3, 8), || {
        format!("server 0 {}", est.per_server_exact[0])
    })?;
    ensure(
        est.mean_rational == theorem1_rate(config.pda(), 2, 2).coded_branch,
        || "closed form differs".into(),
    )?;

    let man = |k, t| man_pda(ManParams::new(k, t).unwrap()).unwrap();
    let cases: Vec<(Pda, usize, usize)> = vec![
        (man(3, 1), 2, 3),
        (man(3, 2), 3, 2),
        (man(4, 1), 2, 3),
        (man(4, 2), 2, 4),
        (man(5, 2), 2, 3),
        (single_user_pda(3, 1).unwrap(), 3, 4),
        (catalog("sec4a").unwrap(), 2, 2),
        (catalog("sec3a").unwrap(), 2, 2),
        (catalog("trivial").unwrap(), 4, 5),
    ];
    let mut total = 0u128;
    for (pda, servers, files) in &cases {
        let k = pda.k();
        let config = SystemConfig::new(*servers, *files, k, 1, pda.clone(), 7).unwrap();
        let demands: Vec<usize> = (0..k).map(|i| (i * 7 + 3) % files).collect();
        let est = exhaustive_mean(&config, &demands, DEFAULT_CAP).map_err(|e| e.to_string())?;
        let expected = per_server_rates(pda, *servers, *files);
        ensure(est.per_server_rational == expected, || {
            format!(
                "{} B={servers} N={files}: {:?}",
                pda.params(),
                est.per_server_exact
            )
        })?;
        ensure(est.all_decoded(), || {
            format!("{} failed to decode", pda.params())
        })?;
        total += est.rounds;
    }
    Ok(format!(
        "(2,2,1,1): 7/8 total, 3/8 server 0 over 4 realizations; {} more instances exact per server ({total} realizations)",
        cases.len()
    ))
}

fn criterion_7() -> Outcome {
    let man = |k, t| man_pda(ManParams::new(k, t).unwrap()).unwrap();
    let cases: Vec<(Pda, usize, usize)> = vec![
        (man(2, 1), 2, 2),
        (man(2, 0), 3, 3),
        (man(3, 1), 2, 3),
        (man(3, 2), 3, 2),
        (man(4, 2), 2, 3),
        (single_user_pda(3, 1).unwrap(), 3, 4),
        (catalog("trivial").unwrap(), 4, 5),
        (catalog("sec4a").unwrap(), 2, 3),
        (catalog("sec3a").unwrap(), 2, 2),
    ];
    for (pda, servers, files) in &cases {
        let config = SystemConfig::new(*servers, *files, pda.k(), 1, pda.clone(), 3).unwrap();
        let mut demands = default_demands(&config);
        demands.push((0..pda.k()).map(|k| k % files).collect());
        let report =
            privacy_audit_exact(&config, &demands, DEFAULT_CAP).map_err(|e| e.to_string())?;
        for s in &report.servers {
            ensure(
                s.tv_distance.as_deref() == Some("0") && s.uniform == Some(true),
                || {
                    format!(
                        "{} B={servers} N={files} server {}: TV {:?}",
                        pda.params(),
                        s.server,
                        s.tv_distance
                    )
                },
            )?;
        }
    }

    let config = SystemConfig::new(3, 4, 4, 1, man(4, 2), 11).unwrap();
    let demands = default_demands(&config);
    let leaky = privacy_audit_empirical(&config, &demands, 100_000, &LeakyQueries, true)
        .map_err(|e| e.to_string())?;
    ensure(!leaky.passed, || "leaky queries not flagged".into())?;
    let honest = privacy_audit_empirical(&config, &demands, 100_000, &PrivateQueries, true)
        .map_err(|e| e.to_string())?;
    ensure(honest.passed, || {
        format!("scheme flagged: {:?}", honest.servers)
    })?;
    let min_p = honest
        .servers
        .iter()
        .filter_map(|s| s.p_value)
        .fold(1.0, f64::min);
    Ok(format!(
        "exact TV = 0 and uniform joint queries on {} instances; leaky mutant flagged at 1e5 samples, scheme min p = {min_p:.3}",
        cases.len()
    ))
}

fn criterion_8() -> Outcome {
    let mut checked = 0;
    for k in 1..=8 {
        for t in 0..=k {
            let pda = man_pda(ManParams::new(k, t).unwrap()).unwrap();
            for servers in [2, 3] {
                for files in [2, 4, 8] {
                    let closed = man_metrics(k, t, servers, files).map_err(|e| e.to_string())?;
                    let general = theorem1_rate(&pda, servers, files);
                    ensure(
                        closed.rate == general.rate && closed.coded_branch == general.coded_branch,
                        || {
                            format!(
                                "K={k} t={t} B={servers} N={files}: {} vs {}",
                                closed.rate, general.rate
                            )
                        },
                    )?;
                    checked += 1;
                }
            }
        }
    }
    let mut regular = 0;
    for name in ["sec3a", "sec4a", "trivial"] {
        let pda = catalog(name).unwrap();
        let Some(g) = pda.regularity() else { continue };
        for servers in [2, 3, 4] {
            for files in [1, 2, 4, 8] {
                let general = theorem1_rate(&pda, servers, files);
                let closed = regular_rate(g, pda.s(), pda.f(), servers, files);
                ensure(closed == general.coded_branch, || {
                    format!("{name} B={servers} N={files}")
                })?;
                regular += 1;
            }
        }
    }
    Ok(format!(
        "{checked} MAN grid points and {regular} regular-catalog points equal as rationals"
    ))
}

fn criterion_9() -> Outcome {
    let mut checked = 0;
    for k in 1..=8 {
        for t in 0..=k {
            for servers in [2, 3] {
                for files in [2, 4, 8] {
                    let o =
                        order_optimality_check(k, files, servers, t).map_err(|e| e.to_string())?;
                    ensure(o.holds(), || {
                        format!("K={k} t={t} B={servers} N={files}: {o:?}")
                    })?;
                    if let Some(ratio) = &o.ratio {
                        ensure(*ratio <= o.geometric_bound, || format!("ratio {ratio}"))?;
                    }
                    checked += 1;
                }
            }
        }
    }
    Ok(format!(
        "R/R_cc <= B/(B-1) and the factor-2/8 chains at all {checked} points"
    ))
}

fn criterion_10() -> Outcome {
    let num = |s: &str| s.parse::<f64>().unwrap_or(f64::NAN);
    let mut spec = FigureSpec::new(FigureId::Fig2);
    spec.servers = Some(2);
    spec.files = Some(4);
    spec.users = Some(4);
    let fig2 = emit_figure_data(&spec).map_err(|e| e.to_string())?;
    let pda = fig2.column("pda_rate").ok_or("no pda_rate")?;
    let pd = fig2
        .column("product_design_rate")
        .ok_or("no product_design_rate")?;
    ensure(!pda.is_empty(), || "fig2 is empty".into())?;
    for (a, b) in pda.iter().zip(&pd) {
        ensure(num(a) >= num(b), || format!("fig2: {a} < {b}"))?;
    }
    let mut lengths = Vec::new();
    for (id, col) in [
        (FigureId::Fig6, "f_pd_over_f_new"),
        (FigureId::Fig7, "u_pd_over_u_new"),
    ] {
        let data = emit_figure_data(&FigureSpec::new(id)).map_err(|e| e.to_string())?;
        let v: Vec<f64> = data
            .column(col)
            .ok_or(format!("no {col}"))?
            .into_iter()
            .map(num)
            .collect();
        ensure(v.len() > 1 && v.windows(2).all(|w| w[1] > w[0]), || {
            format!("{id}: {v:?}")
        })?;
        lengths.push(v.len());
    }
    Ok(format!(
        "fig2 PDA >= product design at {} points; fig6 ({}) and fig7 ({}) ratios strictly increasing in K",
        pda.len(),
        lengths[0],
        lengths[1]
    ))
}

fn main() -> std::process::ExitCode {
    let criteria: [(fn() -> Outcome, Duration); 10] = [
        (criterion_1, Duration::from_secs(1)),
        (criterion_2, Duration::from_secs(1)),
        (criterion_3, Duration::from_secs(1)),
        (criterion_4, Duration::from_secs(60)),
        (criterion_5, Duration::from_secs(60)),
        (criterion_6, Duration::from_secs(30)),
        (criterion_7, Duration::from_secs(60)),
        (criterion_8, Duration::from_secs(60)),
        (criterion_9, Duration::from_secs(60)),
        (criterion_10, Duration::from_secs(60)),
    ];
    let mut failed = Vec::new();
    for (i, (run, limit)) in criteria.iter().enumerate() {
        let n = i + 1;
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > *limit => {
                Err(format!("{detail}; took {elapsed:.2?}, limit {limit:?}"))
            }
            other => other,
        };
        match outcome {
            Ok(detail) => println!("criterion {n}: PASS ({elapsed:.2?}) {detail}"),
            Err(why) => {
                println!("criterion {n}: FAIL ({elapsed:.2?}) {why}");
                failed.push(n);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: 10/10 criteria passed");
        std::process::ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::ExitCode::FAILURE
    }
}
