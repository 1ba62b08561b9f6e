#![allow(dead_code)]

use mupir::constructions::{catalog, man_pda, single_user_pda, ManParams};
use mupir::pda::Pda;
use mupir::protocol::{run_round, DeliveryMode, FileSet, SystemConfig};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// trivial, single-user with `F <= 4`, MAN with `K <= 6` and every `t`,
/// and both worked-example arrays.
pub fn roundtrip_family() -> Vec<(String, Pda)> {
    let mut out = vec![("trivial".to_string(), catalog("trivial").unwrap())];
    for f in 1..=4 {
        for z in 0..=f {
            out.push((
                format!("single-user F={f} Z={z}"),
                single_user_pda(f, z).unwrap(),
            ));
        }
    }
    for k in 1..=6 {
        for t in 0..=k {
            out.push((
                format!("MAN K={k} t={t}"),
                man_pda(ManParams::new(k, t).unwrap()).unwrap(),
            ));
        }
    }
    out.push(("sec3a".into(), catalog("sec3a").unwrap()));
    out.push(("sec4a".into(), catalog("sec4a").unwrap()));
    out
}

#[derive(Debug, Default)]
pub struct RoundtripStats {
    pub rounds: usize,
    pub failures: Vec<String>,
}

/// Runs `rounds_per_case` seeded rounds for every array and `B ∈ {2,3,4}`
/// with random demands, random file bytes and a file count cycling through
/// 1..=4.
pub fn run_roundtrips(file_len: usize, rounds_per_case: usize, seed: u64) -> RoundtripStats {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = RoundtripStats::default();
    for (name, pda) in roundtrip_family() {
        for servers in 2..=4 {
            for r in 0..rounds_per_case {
                let files = 1 + (r % 4);
                let config = SystemConfig::new(
                    servers,
                    files,
                    pda.k(),
                    file_len,
                    pda.clone(),
                    rng.next_u64(),
                )
                .unwrap();
                let library: Vec<Vec<u8>> = (0..files)
                    .map(|_| {
                        let mut bytes = vec![0u8; file_len];
                        rng.fill_bytes(&mut bytes);
                        bytes
                    })
                    .collect();
                let set = FileSet::from_bytes(&config, library).unwrap();
                let demands: Vec<usize> = (0..pda.k()).map(|_| rng.gen_range(0..files)).collect();
                let t = run_round(&config, &set, &demands, r as u64, DeliveryMode::Pda).unwrap();
                stats.rounds += 1;
                if !t.all_decoded() {
                    stats
                        .failures
                        .push(format!("{name} B={servers} N={files} demands={demands:?}"));
                }
            }
        }
    }
    stats
}
