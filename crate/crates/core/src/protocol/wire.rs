//! Bit-packed query encoding.
//!
//! A query travels as its first `N-1` symbols, each in `⌈log₂B⌉` bits,
//! most significant bit first. The dropped last symbol is restored from the
//! sum constraint. The dropped position is fixed, so it says nothing about
//! the demand.

use super::QueryVector;
use crate::error::ProtocolError;

/// `⌈log₂B⌉`.
pub fn symbol_width(servers: usize) -> u32 {
    usize::BITS - (servers - 1).leading_zeros()
}

pub fn encoded_bits(servers: usize, files: usize) -> u64 {
    (files as u64 - 1) * symbol_width(servers) as u64
}

pub fn encode(query: &QueryVector, servers: usize) -> Vec<u8> {
    let width = symbol_width(servers);
    let n = query.symbols.len();
    let total = (n.saturating_sub(1) as u64 * width as u64) as usize;
    let mut out = vec![0u8; total.div_ceil(8)];
    let mut pos = 0usize;
    for &sym in &query.symbols[..n.saturating_sub(1)] {
        for bit in (0..width).rev() {
            if (sym >> bit) & 1 == 1 {
                out[pos / 8] |= 0x80 >> (pos % 8);
            }
            pos += 1;
        }
    }
    out
}

pub fn decode(
    bytes: &[u8],
    user: usize,
    server: usize,
    servers: usize,
    files: usize,
) -> Result<QueryVector, ProtocolError> {
    let width = symbol_width(servers);
    let needed = encoded_bits(servers, files) as usize;
    let malformed = |reason: String| ProtocolError::MalformedQuery {
        user,
        server,
        reason,
    };
    if bytes.len() != needed.div_ceil(8) {
        return Err(malformed(format!(
            "{} bytes on the wire, expected {}",
            bytes.len(),
            needed.div_ceil(8)
        )));
    }
    let mut symbols = Vec::with_capacity(files);
    let mut pos = 0usize;
    for _ in 0..files - 1 {
        let mut sym = 0u32;
        for _ in 0..width {
            let bit = (bytes[pos / 8] >> (7 - pos % 8)) & 1;
            sym = (sym << 1) | bit as u32;
            pos += 1;
        }
        if sym as usize >= servers {
            return Err(malformed(format!(
                "symbol {sym} outside [0:{}]",
                servers - 1
            )));
        }
        symbols.push(sym);
    }
    let partial: u64 = symbols.iter().map(|&s| s as u64).sum();
    let b = servers as u64;
    symbols.push(((server as u64 + b - partial % b) % b) as u32);
    Ok(QueryVector {
        user,
        server,
        symbols,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{PrivateQueries, QueryBuilder};
    use proptest::prelude::*;

    #[test]
    fn widths() {
        assert_eq!(symbol_width(2), 1);
        assert_eq!(symbol_width(3), 2);
        assert_eq!(symbol_width(4), 2);
        assert_eq!(symbol_width(5), 3);
        assert_eq!(encoded_bits(3, 6), 10);
        assert_eq!(encoded_bits(7, 1), 0);
    }

    #[test]
    fn rejects_out_of_range_symbol() {
        // B = 3 uses two bits per symbol; 0b11 is not a symbol
        assert!(decode(&[0b1100_0000], 0, 0, 3, 2).is_err());
        assert!(decode(&[0, 0], 0, 0, 3, 2).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(servers in 2usize..9, files in 1usize..10, seed in any::<u64>(), demand_frac in 0.0f64..1.0, b_frac in 0.0f64..1.0) {
            let demand = ((files as f64) * demand_frac) as usize;
            let b = ((servers as f64) * b_frac) as usize;
            let mut x = seed;
            let v: Vec<u32> = (0..files - 1).map(|_| { x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); ((x >> 33) % servers as u64) as u32 }).collect();
            let q = QueryVector { user: 2, server: b, symbols: PrivateQueries.build(b, servers, demand, &v) };
            let bytes = encode(&q, servers);
            prop_assert_eq!(bytes.len() as u64, encoded_bits(servers, files).div_ceil(8));
            prop_assert_eq!(decode(&bytes, 2, b, servers, files).unwrap(), q);
        }
    }
}
