//! The PDA-driven multi-user retrieval scheme over concrete file bytes.
//!
//! Indexing follows the scheme itself: servers `b ∈ [0:B-1]`, files
//! `n ∈ [0:N-1]` and query symbols `[0:B-1]` are 0-based; users and subfiles
//! are 0-based here but printed 1-based; packet `j ∈ [1:B-1]` of a subfile is
//! 1-based, with packet 0 standing for the all-zero packet.
//!
//! Packet addition and subtraction are both bytewise XOR.

mod decode;
mod files;
mod packet;
mod placement;
mod query;
mod round;
mod server;
mod uncoded;
pub mod wire;

use std::sync::Arc;

pub use decode::decode;
pub use files::FileSet;
pub use packet::{xor_into, zero_packet};
pub use placement::{place, CacheContent};
pub use query::{
    gen_queries, queries_from_randomness, random_symbols, stream_rng, PrivateQueries, QueryBuilder,
    QuerySet, QueryVector, RngDomain, UserRandomness,
};
pub use round::{run_round, run_round_with_randomness, DeliveryMode, RoundTranscript};
pub use server::{server_answer, server_zero_suppresses, Broadcast};
pub use uncoded::{decode_uncoded, place_uncoded, uncoded_delivery, UncodedDelivery};

use crate::error::ProtocolError;
use crate::pda::Pda;

/// Parameters of one system instance.
#[derive(Clone, Debug)]
pub struct SystemConfig {
    servers: usize,
    files: usize,
    file_len: usize,
    pda: Arc<Pda>,
    seed: u64,
}

impl SystemConfig {
    /// `servers` is `B ≥ 2`, `files` is `N ≥ 1`, `users` must equal the PDA's
    /// column count and `file_len` is the unpadded file length in bytes.
    pub fn new(
        servers: usize,
        files: usize,
        users: usize,
        file_len: usize,
        pda: impl Into<Arc<Pda>>,
        seed: u64,
    ) -> Result<Self, ProtocolError> {
        let pda = pda.into();
        if servers < 2 {
            return Err(ProtocolError::Config(format!("B={servers}, need B >= 2")));
        }
        if servers > u32::MAX as usize {
            return Err(ProtocolError::Config("B too large".into()));
        }
        if files == 0 {
            return Err(ProtocolError::Config("N must be at least 1".into()));
        }
        if users != pda.k() {
            return Err(ProtocolError::Config(format!(
                "K={users} but the PDA has {} columns",
                pda.k()
            )));
        }
        if file_len == 0 {
            return Err(ProtocolError::Config("file length must be positive".into()));
        }
        Ok(Self {
            servers,
            files,
            file_len,
            pda,
            seed,
        })
    }

    /// `B`.
    pub fn servers(&self) -> usize {
        self.servers
    }

    /// `N`.
    pub fn files(&self) -> usize {
        self.files
    }

    /// `K`.
    pub fn users(&self) -> usize {
        self.pda.k()
    }

    pub fn pda(&self) -> &Pda {
        &self.pda
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    /// Original file length in bytes.
    pub fn file_len(&self) -> usize {
        self.file_len
    }

    /// Number of packets per file, `F(B-1)`.
    pub fn subpacketization(&self) -> usize {
        self.pda.f() * (self.servers - 1)
    }

    /// File length after zero padding to a multiple of `F(B-1)` bytes.
    pub fn padded_len(&self) -> usize {
        self.file_len.div_ceil(self.subpacketization()) * self.subpacketization()
    }

    pub fn subfile_len(&self) -> usize {
        self.padded_len() / self.pda.f()
    }

    pub fn packet_len(&self) -> usize {
        self.padded_len() / self.subpacketization()
    }
}
