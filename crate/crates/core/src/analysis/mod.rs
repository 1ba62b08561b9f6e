//! Closed-form rate, subpacketization and upload-cost formulas, evaluated
//! exactly over big rationals, and the comparison datasets built from them.

mod asymptotics;
mod figures;
mod formulas;
mod logfact;

pub use asymptotics::{ratio_asymptotics, AsymptoticRatios};
pub use figures::{emit_figure_data, Dataset, FigureId, FigureSpec};
pub use formulas::{
    cc_rate, cc_rate_memory_sharing, cc_rates, cia_metrics, man_metrics, order_optimality_check,
    per_server_rates, product_design_metrics, q_pda_metrics, q_pda_params, regular_rate,
    theorem1_rate, CcRates, OrderOptimality, QPdaParams, QPdaVariant,
};
pub use logfact::{log2_factorial_ratio, log2_factorial_ratio_exact, log2_falling_range};

use std::fmt;

use num::{BigInt, BigRational, BigUint, One, Signed, ToPrimitive, Zero};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Pda,
    ProductDesign,
    Uncoded,
    Cia,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Pda => "pda",
            Scheme::ProductDesign => "product_design",
            Scheme::Uncoded => "uncoded",
            Scheme::Cia => "cia",
        })
    }
}

/// The logarithm an upload cost is a multiple of.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Log2Term {
    /// `log₂ B`.
    Base(u64),
    /// `log₂(B^N! / B^{N-1}!)`.
    FactorialRatio { servers: u64, files: u32 },
    /// No upload.
    None,
}

/// Upload cost `coefficient · log2_term` bits, with its float value.
#[derive(Clone, Debug, PartialEq)]
pub struct UploadCost {
    pub coefficient: BigUint,
    pub log2_term: Log2Term,
    pub bits: f64,
}

impl UploadCost {
    pub fn log2_base(coefficient: BigUint, base: u64) -> Self {
        let bits = big_to_f64(&coefficient) * (base as f64).log2();
        Self {
            coefficient,
            log2_term: Log2Term::Base(base),
            bits,
        }
    }

    pub fn zero() -> Self {
        Self {
            coefficient: BigUint::zero(),
            log2_term: Log2Term::None,
            bits: 0.0,
        }
    }
}

impl fmt::Display for UploadCost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.log2_term {
            Log2Term::Base(b) => write!(f, "{}*log2({b})", self.coefficient),
            Log2Term::FactorialRatio { servers, files } => write!(
                f,
                "{}*log2({servers}^{files}!/{servers}^{}!)",
                self.coefficient,
                files - 1
            ),
            Log2Term::None => f.write_str("0"),
        }
    }
}

/// Rate, subpacketization and upload cost of one scheme at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct SchemeMetrics {
    pub scheme: Scheme,
    /// The reported rate, `min{N - M, coded_branch}`.
    pub rate: BigRational,
    /// The scheme's own delivery rate.
    pub coded_branch: BigRational,
    /// `N - M`, achievable by uncoded delivery.
    pub uncoded_branch: BigRational,
    pub subpacketization: BigUint,
    pub upload: UploadCost,
}

impl SchemeMetrics {
    pub fn rate_f64(&self) -> f64 {
        rational_to_f64(&self.rate)
    }

    /// Whether the uncoded fallback is the smaller operand.
    pub fn uncoded_wins(&self) -> bool {
        self.uncoded_branch < self.coded_branch
    }
}

pub(crate) fn rat(n: impl Into<BigInt>, d: impl Into<BigInt>) -> BigRational {
    BigRational::new(n.into(), d.into())
}

pub(crate) fn int(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

/// `Σ_{i=0}^{terms} B^{-i}`.
pub fn r_pir_sum(servers: u64, terms: u64) -> BigRational {
    assert!(servers >= 2, "B must be at least 2");
    let b = BigInt::from(servers);
    let exp = u32::try_from(terms).expect("term count fits in u32");
    let top = num::pow(b.clone(), exp as usize);
    // (B^{terms+1} - 1) / ((B - 1) B^{terms})
    BigRational::new(&top * &b - 1, (b - 1) * top)
}

/// `Σ_{i=1}^{terms} B^{-i}`.
pub fn r_pir_tail(servers: u64, terms: u64) -> BigRational {
    r_pir_sum(servers, terms) - BigRational::one()
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

pub fn big_to_f64(n: &BigUint) -> f64 {
    n.to_f64().unwrap_or(f64::INFINITY)
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    if let Some(x) = r.to_f64() {
        if x.is_finite() && (x != 0.0 || r.is_zero()) {
            return x;
        }
    }
    // scale by bit lengths when numerator and denominator overflow f64
    let n = r.numer().abs();
    let d = r.denom().abs();
    let shift = n.bits() as i64 - d.bits() as i64;
    let top = |x: &BigInt| {
        let bits = x.bits();
        let drop = bits.saturating_sub(60);
        ((x >> drop).to_f64().unwrap(), drop as i64)
    };
    let (nf, ns) = top(&n);
    let (df, ds) = top(&d);
    let _ = shift;
    let value = nf / df * 2f64.powi((ns - ds) as i32);
    if r.is_negative() {
        -value
    } else {
        value
    }
}

/// Rationals as `p/q`, or `p` when the denominator is 1.
pub fn fmt_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Floats at 12 significant digits, `%.12g` style.
pub fn fmt_sig(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-5..DIGITS).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        return format!(
            "{mantissa}e{}{:02}",
            if exp < 0 { '-' } else { '+' },
            exp.abs()
        );
    }
    let decimals = (DIGITS - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct_sum(servers: u64, from: u64, to: u64) -> BigRational {
        let mut acc = BigRational::zero();
        for i in from..=to {
            acc += rat(1, num::pow(BigInt::from(servers), i as usize));
        }
        acc
    }

    #[test]
    fn geometric_sums_match_direct_summation() {
        for servers in 2..6 {
            for terms in 0..20 {
                assert_eq!(r_pir_sum(servers, terms), direct_sum(servers, 0, terms));
                assert_eq!(r_pir_tail(servers, terms), direct_sum(servers, 1, terms));
            }
        }
    }

    #[test]
    fn geometric_sum_examples() {
        assert_eq!(r_pir_sum(2, 0), int(1));
        let three_15 = num::pow(BigInt::from(3), 15);
        let expected = (int(3) - rat(1, three_15)) / int(2);
        assert_eq!(r_pir_sum(3, 15), expected);
        assert_eq!(r_pir_tail(2, 7), int(1) - rat(1, 128));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), BigUint::from(6u32));
        assert_eq!(binomial(4, 5), BigUint::zero());
        assert_eq!(binomial(64, 32), BigUint::from(1832624140942590534u64));
    }

    #[test]
    fn formatting() {
        assert_eq!(fmt_rational(&rat(7, 8)), "7/8");
        assert_eq!(fmt_rational(&int(3)), "3");
        assert_eq!(fmt_sig(3.6627604166666665), "3.66276041667");
        assert_eq!(fmt_sig(1.5), "1.5");
        assert_eq!(fmt_sig(112.0), "112");
        assert_eq!(fmt_sig(1.0e27), "1e+27");
        assert_eq!(fmt_sig(2.5e-9), "2.5e-09");
        assert_eq!(fmt_sig(0.0), "0");
    }

    #[test]
    fn huge_rationals_convert() {
        let big = num::pow(BigInt::from(10), 400);
        let r = BigRational::new(&big * 3, &big * 2);
        assert_eq!(rational_to_f64(&r), 1.5);
        let r = BigRational::new(
            num::pow(BigInt::from(10), 320) * 3,
            BigInt::from(2) * num::pow(BigInt::from(10), 319),
        );
        assert!((rational_to_f64(&r) - 15.0).abs() < 1e-12);
    }
}
