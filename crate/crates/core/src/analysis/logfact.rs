use num::{BigUint, One, ToPrimitive};
use statrs::function::gamma::ln_gamma;

/// Above this many terms the sum switches to a log-gamma difference.
const DIRECT_SUM_LIMIT: f64 = (1u64 << 20) as f64;

/// `Σ_{j=lo+1}^{hi} log₂ j` for `lo <= hi`.
pub fn log2_falling_range(lo: f64, hi: f64) -> f64 {
    assert!(lo >= 0.0 && hi >= lo);
    if hi - lo <= DIRECT_SUM_LIMIT {
        let (lo, hi) = (lo as u64, hi as u64);
        return ((lo + 1)..=hi).map(|j| (j as f64).log2()).sum();
    }
    (ln_gamma(hi + 1.0) - ln_gamma(lo + 1.0)) / std::f64::consts::LN_2
}

/// `log₂(B^N! / B^{N-1}!)` in floating point.
///
/// Infinite when `B^N` itself overflows `f64`.
pub fn log2_factorial_ratio(servers: u64, files: u32) -> f64 {
    assert!(servers >= 2 && files >= 1);
    let hi = (servers as f64).powi(files as i32);
    let lo = (servers as f64).powi(files as i32 - 1);
    if !hi.is_finite() {
        return f64::INFINITY;
    }
    log2_falling_range(lo, hi)
}

/// The same quantity through an exact big-integer product, available when
/// `B^N <= 2^20`.
pub fn log2_factorial_ratio_exact(servers: u64, files: u32) -> Option<f64> {
    let hi = servers.checked_pow(files)?;
    if hi > 1 << 20 {
        return None;
    }
    let lo = servers.pow(files - 1);
    Some(log2_big(&product(lo + 1, hi)))
}

fn product(from: u64, to: u64) -> BigUint {
    if from > to {
        return BigUint::one();
    }
    if to - from < 16 {
        return (from..=to).map(BigUint::from).product();
    }
    let mid = from + (to - from) / 2;
    product(from, mid) * product(mid + 1, to)
}

fn log2_big(n: &BigUint) -> f64 {
    let bits = n.bits();
    let shift = bits.saturating_sub(64);
    let top = (n >> shift).to_f64().expect("64-bit prefix");
    top.log2() + shift as f64
}
