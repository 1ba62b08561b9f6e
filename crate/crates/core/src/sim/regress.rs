use num::{BigInt, BigRational, One};
use serde::Serialize;

use super::worked;
use crate::analysis::{
    emit_figure_data, fmt_rational, per_server_rates, theorem1_rate, FigureId, FigureSpec,
};
use crate::constructions::{catalog, SEC3A_PRINTED_TEXT};
use crate::pda::{Condition, Pda, PdaArray};
use crate::protocol::{run_round_with_randomness, xor_into, zero_packet, FileSet, SystemConfig};

#[derive(Clone, Debug, Serialize)]
pub struct RegressionEntry {
    pub name: String,
    pub expected: String,
    pub observed: String,
    pub passed: bool,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct RegressionLedger {
    pub entries: Vec<RegressionEntry>,
}

impl RegressionLedger {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &RegressionEntry> {
        self.entries.iter().filter(|e| !e.passed)
    }

    fn check(&mut self, name: &str, expected: impl ToString, observed: impl ToString) {
        let (expected, observed) = (expected.to_string(), observed.to_string());
        self.entries.push(RegressionEntry {
            name: name.into(),
            passed: expected == observed,
            expected,
            observed,
        });
    }

    fn check_with(
        &mut self,
        name: &str,
        expected: impl ToString,
        observed: impl ToString,
        passed: bool,
    ) {
        self.entries.push(RegressionEntry {
            name: name.into(),
            expected: expected.to_string(),
            observed: observed.to_string(),
            passed,
        });
    }
}

fn pow_inv(base: i64, exp: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(base).pow(exp))
}

fn occupancy_text(pda: &Pda) -> String {
    (1..=pda.s() as u32)
        .map(|s| format!("{:?}", pda.occupancy().users_of_one_based(s)))
        .collect::<Vec<_>>()
        .join(" ")
}

fn worked_config(file_len: usize) -> SystemConfig {
    let pda = catalog("sec4a").expect("catalog");
    SystemConfig::new(
        worked::SERVERS,
        worked::FILES,
        pda.k(),
        file_len,
        pda,
        0x5eed,
    )
    .expect("config")
}

/// Every published number the crate can reproduce, checked in one pass.
pub fn regression_suite() -> RegressionLedger {
    let mut ledger = RegressionLedger::default();
    arrays(&mut ledger);
    rates(&mut ledger);
    worked_round(&mut ledger);
    figures(&mut ledger);
    ledger
}

fn arrays(ledger: &mut RegressionLedger) {
    let sec3a = catalog("sec3a").expect("catalog");
    ledger.check("sec3a parameters", "(8,6,3,11)", sec3a.params());
    let listed = worked::SEC3A_OCCUPANCY
        .iter()
        .map(|k| format!("{k:?}"))
        .collect::<Vec<_>>()
        .join(" ");
    ledger.check("sec3a occupancy", listed, occupancy_text(&sec3a));

    let printed = PdaArray::parse(SEC3A_PRINTED_TEXT).expect("printed array parses");
    let report = printed.validate();
    let observed = report
        .violations
        .iter()
        .map(|v| format!("{:?} {:?}", v.condition, v.cells))
        .collect::<Vec<_>>()
        .join("; ");
    let only_c3b = report.violations.len() == 1
        && report.violations[0].condition == Condition::C3b
        && report.violations[0].cells.contains(&(2, 5))
        && report.violations[0].cells.contains(&(3, 8));
    ledger.check_with(
        "sec3a as printed fails C3b at (2,5)",
        "one C3b violation",
        observed,
        only_c3b,
    );

    let sec4a = catalog("sec4a").expect("catalog");
    ledger.check("sec4a parameters", "(6,4,2,4)", sec4a.params());
    ledger.check(
        "sec4a regularity",
        "Some(3)",
        format!("{:?}", sec4a.regularity()),
    );
    let listed = worked::SEC4A_OCCUPANCY
        .iter()
        .map(|k| format!("{k:?}"))
        .collect::<Vec<_>>()
        .join(" ");
    ledger.check("sec4a occupancy", listed, occupancy_text(&sec4a));
}

fn rates(ledger: &mut RegressionLedger) {
    let sec3a = catalog("sec3a").expect("catalog");
    let m = theorem1_rate(&sec3a, 2, 8);
    let r = m.rate_f64();
    ledger.check_with(
        "sec3a rate, B=2 N=8",
        "3.663 ± 1e-3",
        format!("{r:.6}"),
        (r - 3.663).abs() < 1e-3,
    );
    ledger.check("sec3a subpacketization, B=2", 6, &m.subpacketization);
    ledger.check("sec3a upload bits, B=2 N=8", 112.0, m.upload.bits);

    let sec4a = catalog("sec4a").expect("catalog");
    let m = theorem1_rate(&sec4a, 3, 6);
    let three = BigRational::from_integer(3.into());
    let two = BigRational::from_integer(2.into());
    let expected = (&three - pow_inv(3, 15)) / &two;
    ledger.check(
        "sec4a rate, B=3 N=6",
        fmt_rational(&expected),
        fmt_rational(&m.rate),
    );
    let per = per_server_rates(&sec4a, 3, 6);
    let zero = (BigRational::one() - pow_inv(3, 15)) / &two;
    ledger.check(
        "sec4a server 0 expected rate",
        fmt_rational(&zero),
        fmt_rational(&per[0]),
    );
    ledger.check("sec4a server 1 expected rate", "1/2", fmt_rational(&per[1]));
    ledger.check("sec4a subpacketization", 8, &m.subpacketization);
    let upload = 90.0 * 3f64.log2();
    ledger.check_with(
        "sec4a upload bits",
        format!("90 log2 3 = {upload:.6}"),
        format!("{:.6}", m.upload.bits),
        (m.upload.bits - upload).abs() < 1e-9,
    );

    // one user, no cache: plain PIR at rate 1 + 1/B + ... + 1/B^{N-1}
    let trivial = catalog("trivial").expect("catalog");
    ledger.check(
        "trivial rate, B=2 N=2",
        "3/2",
        fmt_rational(&theorem1_rate(&trivial, 2, 2).rate),
    );
    ledger.check(
        "trivial rate, B=3 N=3",
        "13/9",
        fmt_rational(&theorem1_rate(&trivial, 3, 3).rate),
    );
    ledger.check(
        "trivial rate, N=1",
        "1",
        fmt_rational(&theorem1_rate(&trivial, 2, 1).rate),
    );
}

fn worked_round(ledger: &mut RegressionLedger) {
    let config = worked_config(64);
    let files = FileSet::synthetic(&config);
    let round =
        match run_round_with_randomness(&config, &files, &worked::DEMANDS, worked::randomness()) {
            Ok(t) => t,
            Err(e) => {
                ledger.check_with("worked round runs", "ok", e, false);
                return;
            }
        };

    let mut mismatches = 0;
    for (k, per_server) in worked::QUERIES.iter().enumerate() {
        for (b, q) in per_server.iter().enumerate() {
            if round.queries[b][k] != q.to_vec() {
                mismatches += 1;
            }
        }
    }
    ledger.check(
        "worked round queries matching the table",
        18,
        18 - mismatches,
    );

    // rebuild X_{b,1} from the listed terms, directly from file packets
    let mut matching = 0;
    for (b, terms) in worked::ANSWERS_S1.iter().enumerate() {
        let mut x = zero_packet(files.packet_len());
        for &(f, js) in terms {
            for (n, &j) in js.iter().enumerate() {
                if j > 0 {
                    xor_into(&mut x, files.packet(n, f - 1, j));
                }
            }
        }
        if round.broadcasts[b].packet(1) == Some(x.as_slice()) {
            matching += 1;
        }
    }
    ledger.check("worked round label-1 answers, bytewise", 3, matching);

    ledger.check(
        "worked round transmissions",
        "[[1, 2, 3, 4], [1, 2, 3, 4], [1, 2, 3, 4]]",
        format!("{:?}", round.present),
    );
    let l = files.padded_len() as u64 * 8;
    ledger.check(
        "worked round download bits",
        format!("1.5L = {}", 3 * l / 2),
        format!("1.5L = {}", round.download_bits_total),
    );
    ledger.check("worked round rate", "3/2", &round.rate);
    ledger.check(
        "worked round decoded",
        "[true, true, true, true, true, true]",
        format!("{:?}", round.success),
    );

    // users 1, 2 and 3 all zero: server 0 drops label 1 and nothing else
    let mut v = worked::randomness();
    for vk in &mut v[..3] {
        vk.iter_mut().for_each(|x| *x = 0);
    }
    match run_round_with_randomness(&config, &files, &worked::DEMANDS, v) {
        Ok(t) => {
            ledger.check(
                "zero randomness for users 1-3: server 0 labels",
                "[2, 3, 4]",
                format!("{:?}", t.present[0]),
            );
            ledger.check(
                "zero randomness for users 1-3: decoded",
                true,
                t.all_decoded(),
            );
        }
        Err(e) => ledger.check_with("zero randomness round runs", "ok", e, false),
    }
}

fn figures(ledger: &mut RegressionLedger) {
    let parse = |s: &str| s.parse::<f64>().unwrap_or(f64::NAN);
    match emit_figure_data(&FigureSpec::new(FigureId::Fig2)) {
        Ok(d) => {
            let a = d.column("pda_rate").unwrap_or_default();
            let b = d.column("product_design_rate").unwrap_or_default();
            let ok = !a.is_empty() && a.iter().zip(&b).all(|(x, y)| parse(x) >= parse(y));
            ledger.check_with(
                "fig2: PDA rate at least product design",
                "holds",
                if ok { "holds" } else { "violated" },
                ok,
            );
        }
        Err(e) => ledger.check_with("fig2 data", "ok", e, false),
    }
    for (id, col) in [
        (FigureId::Fig6, "f_pd_over_f_new"),
        (FigureId::Fig7, "u_pd_over_u_new"),
    ] {
        let name = format!("{id}: {col} increasing in K");
        match emit_figure_data(&FigureSpec::new(id)) {
            Ok(d) => {
                let v: Vec<f64> = d
                    .column(col)
                    .unwrap_or_default()
                    .into_iter()
                    .map(parse)
                    .collect();
                let ok = v.len() > 1 && v.windows(2).all(|w| w[1] > w[0]);
                ledger.check_with(
                    &name,
                    "strictly increasing",
                    if ok {
                        "strictly increasing"
                    } else {
                        "not monotone"
                    },
                    ok,
                );
            }
            Err(e) => ledger.check_with(&name, "ok", e, false),
        }
    }
}
