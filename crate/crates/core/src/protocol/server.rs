use serde::Serialize;

use super::packet::{xor_into, zero_packet};
use super::{FileSet, QueryVector, SystemConfig};
use crate::error::ProtocolError;

/// The coded packets broadcast by one server, one slot per integer `s`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Broadcast {
    pub server: usize,
    packet_len: usize,
    /// `packets[s-1]`; `None` marks a suppressed entry (server 0 only).
    packets: Vec<Option<Vec<u8>>>,
}

impl Broadcast {
    pub fn labels(&self) -> usize {
        self.packets.len()
    }

    pub fn is_present(&self, s: u32) -> bool {
        self.packets[s as usize - 1].is_some()
    }

    /// `X_{b,s}` if it was transmitted.
    pub fn packet(&self, s: u32) -> Option<&[u8]> {
        self.packets[s as usize - 1].as_deref()
    }

    /// 1-based labels of transmitted entries.
    pub fn present_labels(&self) -> Vec<u32> {
        (1..=self.packets.len() as u32)
            .filter(|&s| self.is_present(s))
            .collect()
    }

    pub fn present_count(&self) -> usize {
        self.packets.iter().filter(|p| p.is_some()).count()
    }

    pub fn packet_len(&self) -> usize {
        self.packet_len
    }

    /// Bits counted toward the rate: one packet per transmitted entry.
    pub fn payload_bits(&self) -> u64 {
        self.present_count() as u64 * self.packet_len as u64 * 8
    }

    /// Presence bitmap overhead, carried by server 0 only.
    pub fn bitmap_bits(&self) -> u64 {
        if self.server == 0 {
            self.packets.len() as u64
        } else {
            0
        }
    }

    pub fn hex_dump(&self) -> Vec<Option<String>> {
        self.packets
            .iter()
            .map(|p| p.as_ref().map(hex::encode))
            .collect()
    }
}

fn check_queries(
    config: &SystemConfig,
    b: usize,
    queries: &[QueryVector],
) -> Result<(), ProtocolError> {
    let servers = config.servers();
    if queries.len() != config.users() {
        return Err(ProtocolError::Config(format!(
            "server {b} got {} queries for {} users",
            queries.len(),
            config.users()
        )));
    }
    for (k, q) in queries.iter().enumerate() {
        let bad = |reason: String| ProtocolError::MalformedQuery {
            user: k,
            server: b,
            reason,
        };
        if q.user != k || q.server != b {
            return Err(bad(format!(
                "addressed as user {} to server {}",
                q.user, q.server
            )));
        }
        if q.symbols.len() != config.files() {
            return Err(bad(format!(
                "{} symbols, expected {}",
                q.symbols.len(),
                config.files()
            )));
        }
        if let Some(&s) = q.symbols.iter().find(|&&s| s as usize >= servers) {
            return Err(bad(format!("symbol {s} outside [0:{}]", servers - 1)));
        }
        if q.symbol_sum(servers) != b {
            return Err(bad(format!(
                "symbol sum is {} mod {servers}, expected {b}",
                q.symbol_sum(servers)
            )));
        }
    }
    Ok(())
}

/// Whether server 0 withholds `X_{0,s}`: every user in `K_s` sent it the
/// all-zero query.
pub fn server_zero_suppresses(config: &SystemConfig, s: u32, queries: &[QueryVector]) -> bool {
    config
        .pda()
        .occupancy()
        .users_of(s)
        .iter()
        .all(|&k| queries[k].is_zero())
}

/// Server `b`'s answer: for each `s`,
/// `X_{b,s} = Σ_{(f,k): P_{f,k}=s} Σ_n W^f_{n, Q^k_{b,n}}` with `W^f_{n,0} = 0`.
pub fn server_answer(
    config: &SystemConfig,
    files: &FileSet,
    b: usize,
    queries: &[QueryVector],
) -> Result<Broadcast, ProtocolError> {
    files.check(config)?;
    if b >= config.servers() {
        return Err(ProtocolError::Config(format!("no server {b}")));
    }
    check_queries(config, b, queries)?;
    let pda = config.pda();
    let packet_len = config.packet_len();
    let packets = (1..=pda.s() as u32)
        .map(|s| {
            if b == 0 && server_zero_suppresses(config, s, queries) {
                return None;
            }
            let mut x = zero_packet(packet_len);
            for &(f, k) in pda.occupancy().cells_of(s) {
                for (n, &j) in queries[k].symbols.iter().enumerate() {
                    if j != 0 {
                        xor_into(&mut x, files.packet(n, f, j as usize));
                    }
                }
            }
            Some(x)
        })
        .collect();
    Ok(Broadcast {
        server: b,
        packet_len,
        packets,
    })
}
