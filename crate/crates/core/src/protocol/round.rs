use num::{BigInt, BigRational};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    decode, decode_uncoded, gen_queries, place, place_uncoded, queries_from_randomness,
    server_answer, uncoded_delivery, wire, Broadcast, FileSet, QuerySet, SystemConfig,
    UserRandomness,
};
use crate::analysis::{fmt_rational, theorem1_rate};
use crate::error::ProtocolError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeliveryMode {
    #[default]
    Pda,
    Uncoded,
}

/// Everything observable in one round, plus the meters.
#[derive(Clone, Debug, Serialize)]
pub struct RoundTranscript {
    pub mode: DeliveryMode,
    pub servers: usize,
    pub files: usize,
    pub users: usize,
    pub pda: String,
    pub file_len_bytes: usize,
    pub padded_len_bytes: usize,
    pub packet_len_bytes: usize,
    pub round: u64,
    pub demands: Vec<usize>,
    pub randomness: Vec<UserRandomness>,
    /// `queries[b][k]` symbol arrays.
    pub queries: Vec<Vec<Vec<u32>>>,
    /// 1-based labels each server transmitted.
    pub present: Vec<Vec<u32>>,
    pub download_bits: Vec<u64>,
    pub download_bits_total: u64,
    /// Presence-bitmap overhead, not part of the rate.
    pub bitmap_bits: u64,
    /// Realized `Σ_b R_b`, relative to the padded file length.
    pub rate: String,
    pub rate_value: f64,
    /// The expected rate from the closed form, for comparison.
    pub expected_rate: String,
    pub upload_bits_analytic: f64,
    pub upload_bits_wire: u64,
    pub success: Vec<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub raw_broadcasts: Option<Vec<Vec<Option<String>>>>,
    #[serde(skip)]
    pub rate_exact: BigRational,
    #[serde(skip)]
    pub decoded: Vec<Vec<u8>>,
    #[serde(skip)]
    pub broadcasts: Vec<Broadcast>,
}

impl RoundTranscript {
    pub fn all_decoded(&self) -> bool {
        self.success.iter().all(|&ok| ok)
    }

    /// Fills `raw_broadcasts` with hex packets for byte-level debugging.
    pub fn with_raw_dump(mut self) -> Self {
        self.raw_broadcasts = Some(self.broadcasts.iter().map(Broadcast::hex_dump).collect());
        self
    }
}

/// One round with `V^k` drawn from the stream keyed by `(seed, round, k)`.
pub fn run_round(
    config: &SystemConfig,
    files: &FileSet,
    demands: &[usize],
    round: u64,
    mode: DeliveryMode,
) -> Result<RoundTranscript, ProtocolError> {
    match mode {
        DeliveryMode::Pda => {
            let set = gen_queries(config, demands, round)?;
            pda_round(config, files, demands, set, round)
        }
        DeliveryMode::Uncoded => uncoded_round(config, files, demands, round),
    }
}

/// One round of the PDA scheme with injected `V^k` vectors.
pub fn run_round_with_randomness(
    config: &SystemConfig,
    files: &FileSet,
    demands: &[usize],
    randomness: Vec<Vec<u32>>,
) -> Result<RoundTranscript, ProtocolError> {
    let set = queries_from_randomness(config, demands, randomness)?;
    pda_round(config, files, demands, set, 0)
}

fn base_transcript(
    config: &SystemConfig,
    files: &FileSet,
    demands: &[usize],
    round: u64,
    mode: DeliveryMode,
) -> RoundTranscript {
    let expected = theorem1_rate(config.pda(), config.servers(), config.files());
    RoundTranscript {
        mode,
        servers: config.servers(),
        files: config.files(),
        users: config.users(),
        pda: config.pda().params().to_string(),
        file_len_bytes: files.original_len(),
        padded_len_bytes: files.padded_len(),
        packet_len_bytes: files.packet_len(),
        round,
        demands: demands.to_vec(),
        randomness: Vec::new(),
        queries: Vec::new(),
        present: Vec::new(),
        download_bits: Vec::new(),
        download_bits_total: 0,
        bitmap_bits: 0,
        rate: String::new(),
        rate_value: 0.0,
        expected_rate: match mode {
            DeliveryMode::Pda => fmt_rational(&expected.coded_branch),
            DeliveryMode::Uncoded => fmt_rational(&expected.uncoded_branch),
        },
        upload_bits_analytic: 0.0,
        upload_bits_wire: 0,
        success: Vec::new(),
        raw_broadcasts: None,
        rate_exact: BigRational::default(),
        decoded: Vec::new(),
        broadcasts: Vec::new(),
    }
}

fn pda_round(
    config: &SystemConfig,
    files: &FileSet,
    demands: &[usize],
    set: QuerySet,
    round: u64,
) -> Result<RoundTranscript, ProtocolError> {
    let caches = place(config, files)?;
    let servers = config.servers();

    // queries cross the wire in packed form; servers see the decoded copies
    let mut wire_bits = 0u64;
    let mut received = Vec::with_capacity(servers);
    for (b, batch) in set.queries.iter().enumerate() {
        let mut decoded = Vec::with_capacity(batch.len());
        for q in batch {
            let bytes = wire::encode(q, servers);
            wire_bits += wire::encoded_bits(servers, config.files());
            decoded.push(wire::decode(&bytes, q.user, b, servers, config.files())?);
        }
        received.push(decoded);
    }

    let broadcasts: Vec<Broadcast> = (0..servers)
        .into_par_iter()
        .map(|b| server_answer(config, files, b, &received[b]))
        .collect::<Result<_, _>>()?;

    let decoded: Vec<Vec<u8>> = (0..config.users())
        .into_par_iter()
        .map(|k| {
            decode(
                config,
                k,
                demands[k],
                &caches[k],
                &set.randomness[k],
                &set.queries,
                &broadcasts,
            )
        })
        .collect::<Result<_, _>>()?;

    let mut t = base_transcript(config, files, demands, round, DeliveryMode::Pda);
    t.success = decoded
        .iter()
        .zip(demands)
        .map(|(got, &d)| got.as_slice() == &files.file(d)[..files.original_len()])
        .collect();
    t.download_bits = broadcasts.iter().map(Broadcast::payload_bits).collect();
    t.download_bits_total = t.download_bits.iter().sum();
    t.bitmap_bits = broadcasts.iter().map(Broadcast::bitmap_bits).sum();
    t.present = broadcasts.iter().map(Broadcast::present_labels).collect();
    let packets: usize = broadcasts.iter().map(Broadcast::present_count).sum();
    t.rate_exact = BigRational::new(
        BigInt::from(packets),
        BigInt::from(config.subpacketization()),
    );
    t.rate = fmt_rational(&t.rate_exact);
    t.rate_value = packets as f64 / config.subpacketization() as f64;
    t.upload_bits_analytic = theorem1_rate(config.pda(), servers, config.files())
        .upload
        .bits;
    t.upload_bits_wire = wire_bits;
    t.queries = set
        .queries
        .iter()
        .map(|batch| batch.iter().map(|q| q.symbols.clone()).collect())
        .collect();
    t.randomness = set.randomness;
    t.decoded = decoded;
    t.broadcasts = broadcasts;
    Ok(t)
}

fn uncoded_round(
    config: &SystemConfig,
    files: &FileSet,
    demands: &[usize],
    round: u64,
) -> Result<RoundTranscript, ProtocolError> {
    if demands.len() != config.users() {
        return Err(ProtocolError::Config(format!(
            "{} demands for {} users",
            demands.len(),
            config.users()
        )));
    }
    let caches = place_uncoded(config, files)?;
    let delivery = uncoded_delivery(config, files)?;
    let decoded: Vec<Vec<u8>> = caches
        .iter()
        .zip(demands)
        .map(|(cache, &d)| decode_uncoded(config, d, cache, &delivery))
        .collect::<Result<_, _>>()?;
    let mut t = base_transcript(config, files, demands, round, DeliveryMode::Uncoded);
    t.success = decoded
        .iter()
        .zip(demands)
        .map(|(got, &d)| got.as_slice() == &files.file(d)[..files.original_len()])
        .collect();
    t.download_bits = delivery.bits_per_server();
    t.download_bits_total = delivery.total_bits();
    t.rate_exact = BigRational::new(
        BigInt::from(t.download_bits_total),
        BigInt::from(files.padded_len() as u64 * 8),
    );
    t.rate = fmt_rational(&t.rate_exact);
    t.rate_value = t.download_bits_total as f64 / (files.padded_len() as f64 * 8.0);
    t.decoded = decoded;
    Ok(t)
}
