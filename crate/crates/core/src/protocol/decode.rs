use super::packet::{xor_into, zero_packet};
use super::{Broadcast, CacheContent, QueryVector, SystemConfig, UserRandomness};
use crate::error::ProtocolError;
use crate::pda::Cell;

/// `Σ_n W^f_{n, Q_n}` rebuilt from cached subfiles.
fn rebuild_from_cache(
    cache: &CacheContent,
    f: usize,
    query: &QueryVector,
    packet_len: usize,
) -> Result<Vec<u8>, ProtocolError> {
    let mut acc = zero_packet(packet_len);
    for (n, &j) in query.symbols.iter().enumerate() {
        if j == 0 {
            continue;
        }
        let p = cache.packet(n, f, j as usize).ok_or_else(|| {
            ProtocolError::MissingBroadcast(format!(
                "user {} lacks cached subfile ({n}, {}) needed to cancel interference",
                cache.user + 1,
                f + 1
            ))
        })?;
        xor_into(&mut acc, p);
    }
    Ok(acc)
}

/// Recovers user `user`'s demanded file (padding stripped).
///
/// Rows with a star come from the cache. For a row labelled `s` the user
/// cancels the other cells of `s` from each `X_{b,s}` to get `A_{b,s}`, then
/// `W_{d,j} = A_{(j+V̄) mod B} − A_{V̄}` for `j ∈ [1:B-1]`. Suppressed entries
/// of server 0 read as zero packets.
///
/// `queries[b][k]` are the queries of every user; decoding needs them to
/// rebuild other users' interference terms.
pub fn decode(
    config: &SystemConfig,
    user: usize,
    demand: usize,
    cache: &CacheContent,
    randomness: &UserRandomness,
    queries: &[Vec<QueryVector>],
    broadcasts: &[Broadcast],
) -> Result<Vec<u8>, ProtocolError> {
    let servers = config.servers();
    let pda = config.pda();
    let packet_len = config.packet_len();
    if user >= config.users() || cache.user != user || randomness.user != user {
        return Err(ProtocolError::Config(format!(
            "decode inputs are not all for user {}",
            user + 1
        )));
    }
    if demand >= config.files() {
        return Err(ProtocolError::DemandOutOfRange {
            user,
            demand,
            max: config.files() - 1,
        });
    }
    if broadcasts.len() != servers || queries.len() != servers {
        return Err(ProtocolError::MissingBroadcast(format!(
            "expected {servers} broadcasts and query batches, got {} and {}",
            broadcasts.len(),
            queries.len()
        )));
    }
    for (b, x) in broadcasts.iter().enumerate() {
        if x.server != b || x.labels() != pda.s() || x.packet_len() != packet_len {
            return Err(ProtocolError::Length(format!(
                "broadcast in slot {b} is inconsistent with the configuration"
            )));
        }
    }

    let mut file = Vec::with_capacity(config.padded_len());
    for f in 0..pda.f() {
        match pda.cell(f, user) {
            Cell::Star => {
                let sub = cache.subfile(demand, f).ok_or_else(|| {
                    ProtocolError::MissingBroadcast(format!(
                        "subfile ({demand}, {}) missing from cache of user {}",
                        f + 1,
                        user + 1
                    ))
                })?;
                file.extend_from_slice(sub);
            }
            Cell::Int(s) => {
                let mut isolated = Vec::with_capacity(servers);
                for (b, x) in broadcasts.iter().enumerate() {
                    let mut a = match x.packet(s) {
                        Some(p) => p.to_vec(),
                        None if b == 0 => zero_packet(packet_len),
                        None => {
                            return Err(ProtocolError::MissingBroadcast(format!(
                                "server {b} omitted entry {s}"
                            )))
                        }
                    };
                    for &(f2, k2) in pda.occupancy().cells_of(s) {
                        if (f2, k2) != (f, user) {
                            let interference =
                                rebuild_from_cache(cache, f2, &queries[b][k2], packet_len)?;
                            xor_into(&mut a, &interference);
                        }
                    }
                    isolated.push(a);
                }
                let base = randomness.v_bar as usize % servers;
                for j in 1..servers {
                    let mut packet = isolated[(j + base) % servers].clone();
                    xor_into(&mut packet, &isolated[base]);
                    file.extend_from_slice(&packet);
                }
            }
        }
    }
    file.truncate(config.file_len());
    Ok(file)
}
