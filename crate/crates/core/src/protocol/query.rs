use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use super::SystemConfig;
use crate::error::ProtocolError;

/// Separates the independent random streams derived from one seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RngDomain {
    Queries = 1,
    Files = 2,
    Demands = 3,
}

/// A ChaCha20 stream keyed by `(seed, round, domain)` and selected by
/// `stream` (a user, file or trial index).
pub fn stream_rng(seed: u64, round: u64, domain: RngDomain, stream: u64) -> ChaCha20Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&round.to_le_bytes());
    key[16..24].copy_from_slice(&(domain as u64).to_le_bytes());
    let mut rng = ChaCha20Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}

/// `len` symbols uniform over `[0:servers-1]` (rejection sampled).
pub fn random_symbols<R: Rng>(rng: &mut R, servers: usize, len: usize) -> Vec<u32> {
    (0..len).map(|_| rng.gen_range(0..servers as u32)).collect()
}

/// `V^k` together with `V̄^k = (Σ V^k) mod B`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UserRandomness {
    pub user: usize,
    pub v: Vec<u32>,
    pub v_bar: u32,
}

impl UserRandomness {
    pub fn new(user: usize, v: Vec<u32>, servers: usize) -> Self {
        let v_bar = (v.iter().map(|&x| x as u64).sum::<u64>() % servers as u64) as u32;
        Self { user, v, v_bar }
    }
}

/// `Q_b^k`: the length-`N` query user `k` sends to server `b`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QueryVector {
    pub user: usize,
    pub server: usize,
    pub symbols: Vec<u32>,
}

impl QueryVector {
    pub fn is_zero(&self) -> bool {
        self.symbols.iter().all(|&q| q == 0)
    }

    pub fn symbol_sum(&self, servers: usize) -> usize {
        (self.symbols.iter().map(|&q| q as u64).sum::<u64>() % servers as u64) as usize
    }
}

/// Turns a user's randomness and demand into the query for one server.
pub trait QueryBuilder: Sync {
    fn build(&self, server: usize, servers: usize, demand: usize, v: &[u32]) -> Vec<u32>;
}

/// The scheme's query map: insert `(b - Σ V) mod B` at position `d_k`.
#[derive(Clone, Copy, Debug, Default)]
pub struct PrivateQueries;

impl QueryBuilder for PrivateQueries {
    fn build(&self, server: usize, servers: usize, demand: usize, v: &[u32]) -> Vec<u32> {
        let b = servers as u64;
        let sum = v.iter().map(|&x| x as u64).sum::<u64>() % b;
        let pivot = ((server as u64 + b - sum) % b) as u32;
        let mut q = Vec::with_capacity(v.len() + 1);
        q.extend_from_slice(&v[..demand]);
        q.push(pivot);
        q.extend_from_slice(&v[demand..]);
        q
    }
}

/// All randomness and queries of one round.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuerySet {
    pub randomness: Vec<UserRandomness>,
    /// `queries[b][k]`.
    pub queries: Vec<Vec<QueryVector>>,
}

impl QuerySet {
    pub fn for_server(&self, b: usize) -> &[QueryVector] {
        &self.queries[b]
    }
}

fn check_demands(config: &SystemConfig, demands: &[usize]) -> Result<(), ProtocolError> {
    if demands.len() != config.users() {
        return Err(ProtocolError::Config(format!(
            "{} demands for {} users",
            demands.len(),
            config.users()
        )));
    }
    for (user, &demand) in demands.iter().enumerate() {
        if demand >= config.files() {
            return Err(ProtocolError::DemandOutOfRange {
                user,
                demand,
                max: config.files() - 1,
            });
        }
    }
    Ok(())
}

/// Builds every query from explicit `V^k` vectors.
pub fn queries_from_randomness(
    config: &SystemConfig,
    demands: &[usize],
    v: Vec<Vec<u32>>,
) -> Result<QuerySet, ProtocolError> {
    check_demands(config, demands)?;
    let servers = config.servers();
    if v.len() != config.users() {
        return Err(ProtocolError::Config(format!(
            "{} randomness vectors for {} users",
            v.len(),
            config.users()
        )));
    }
    for (k, vk) in v.iter().enumerate() {
        if vk.len() != config.files() - 1 || vk.iter().any(|&x| x as usize >= servers) {
            return Err(ProtocolError::Config(format!(
                "randomness of user {} must be {} symbols in [0:{}]",
                k + 1,
                config.files() - 1,
                servers - 1
            )));
        }
    }
    let randomness: Vec<UserRandomness> = v
        .into_iter()
        .enumerate()
        .map(|(k, vk)| UserRandomness::new(k, vk, servers))
        .collect();
    let queries = (0..servers)
        .map(|b| {
            randomness
                .iter()
                .map(|r| QueryVector {
                    user: r.user,
                    server: b,
                    symbols: PrivateQueries.build(b, servers, demands[r.user], &r.v),
                })
                .collect()
        })
        .collect();
    Ok(QuerySet {
        randomness,
        queries,
    })
}

/// Draws each `V^k` uniformly from `[0:B-1]^{N-1}` using the stream keyed by
/// `(seed, round, user)` and builds every query.
pub fn gen_queries(
    config: &SystemConfig,
    demands: &[usize],
    round: u64,
) -> Result<QuerySet, ProtocolError> {
    check_demands(config, demands)?;
    let v = (0..config.users())
        .map(|k| {
            let mut rng = stream_rng(config.seed(), round, RngDomain::Queries, k as u64);
            random_symbols(&mut rng, config.servers(), config.files() - 1)
        })
        .collect();
    queries_from_randomness(config, demands, v)
}
