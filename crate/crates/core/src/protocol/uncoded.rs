use super::{CacheContent, FileSet, SystemConfig};
use crate::error::ProtocolError;

/// The demand-independent fallback: every user caches the first `Z` subfiles
/// of every file and the servers broadcast everything else.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UncodedDelivery {
    /// `payloads[b]` is server `b`'s contiguous share of the uncached library.
    pub payloads: Vec<Vec<u8>>,
}

impl UncodedDelivery {
    pub fn bits_per_server(&self) -> Vec<u64> {
        self.payloads.iter().map(|p| p.len() as u64 * 8).collect()
    }

    pub fn total_bits(&self) -> u64 {
        self.bits_per_server().iter().sum()
    }
}

/// Identical caches for all users: the leading `Z/F` fraction of each file.
pub fn place_uncoded(
    config: &SystemConfig,
    files: &FileSet,
) -> Result<Vec<CacheContent>, ProtocolError> {
    files.check(config)?;
    let z = config.pda().z();
    Ok((0..config.users())
        .map(|k| {
            let mut cache = CacheContent::new(k, config.packet_len());
            for f in 0..z {
                for n in 0..config.files() {
                    cache.insert(n, f, files.subfile(n, f).to_vec());
                }
            }
            cache
        })
        .collect())
}

/// Splits the uncached `(1 - M/N)` fraction of the whole library into `B`
/// near-equal contiguous shares, one per server. The total is `(N - M)L`
/// bits.
pub fn uncoded_delivery(
    config: &SystemConfig,
    files: &FileSet,
) -> Result<UncodedDelivery, ProtocolError> {
    files.check(config)?;
    let offset = config.pda().z() * config.subfile_len();
    let stream: Vec<u8> = (0..config.files())
        .flat_map(|n| files.file(n)[offset..].iter().copied())
        .collect();
    let servers = config.servers();
    let base = stream.len() / servers;
    let extra = stream.len() % servers;
    let mut payloads = Vec::with_capacity(servers);
    let mut start = 0;
    for b in 0..servers {
        let len = base + usize::from(b < extra);
        payloads.push(stream[start..start + len].to_vec());
        start += len;
    }
    Ok(UncodedDelivery { payloads })
}

pub fn decode_uncoded(
    config: &SystemConfig,
    demand: usize,
    cache: &CacheContent,
    delivery: &UncodedDelivery,
) -> Result<Vec<u8>, ProtocolError> {
    if demand >= config.files() {
        return Err(ProtocolError::DemandOutOfRange {
            user: cache.user,
            demand,
            max: config.files() - 1,
        });
    }
    if delivery.payloads.len() != config.servers() {
        return Err(ProtocolError::MissingBroadcast(format!(
            "{} of {} server payloads",
            delivery.payloads.len(),
            config.servers()
        )));
    }
    let z = config.pda().z();
    let tail = config.padded_len() - z * config.subfile_len();
    let stream: Vec<u8> = delivery.payloads.concat();
    if stream.len() != tail * config.files() {
        return Err(ProtocolError::Length(
            "uncoded payload size mismatch".into(),
        ));
    }
    let mut file = Vec::with_capacity(config.padded_len());
    for f in 0..z {
        let sub = cache
            .subfile(demand, f)
            .ok_or_else(|| ProtocolError::MissingBroadcast("uncoded cache incomplete".into()))?;
        file.extend_from_slice(sub);
    }
    file.extend_from_slice(&stream[demand * tail..(demand + 1) * tail]);
    file.truncate(config.file_len());
    Ok(file)
}
