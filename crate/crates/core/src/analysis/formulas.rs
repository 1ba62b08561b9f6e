use num::{BigInt, BigRational, BigUint, One, Zero};
use serde::Serialize;

use super::{
    binomial, int, log2_factorial_ratio, r_pir_sum, r_pir_tail, rat, Log2Term, Scheme,
    SchemeMetrics, UploadCost,
};
use crate::error::AnalysisError;
use crate::pda::Pda;

fn check_servers(servers: usize) -> Result<(), AnalysisError> {
    if servers < 2 {
        return Err(AnalysisError::Parameters(format!(
            "need at least 2 servers, got {servers}"
        )));
    }
    Ok(())
}

/// Upload `BK(N-1) log₂B`, zero when nothing is left to retrieve.
fn pda_upload(servers: usize, users: usize, files: usize, full_cache: bool) -> UploadCost {
    if full_cache {
        return UploadCost::zero();
    }
    let coefficient = BigUint::from(servers) * BigUint::from(users) * BigUint::from(files - 1);
    UploadCost::log2_base(coefficient, servers as u64)
}

/// Rate of the PDA scheme on an arbitrary valid PDA.
///
/// The coded branch is `S/F + (1/F) Σ_s Σ_{i=1}^{|K_s|(N-1)} B^{-i}`; the
/// reported rate is its minimum with `N - M`, `M = NZ/F`. A full-cache PDA
/// (`S = 0`) has rate 0 and no upload.
///
/// # Panics
/// If `servers < 2` or `files == 0`.
pub fn theorem1_rate(pda: &Pda, servers: usize, files: usize) -> SchemeMetrics {
    assert!(servers >= 2 && files >= 1, "need B >= 2 and N >= 1");
    let f = pda.f();
    let uncoded_branch = rat(files * (f - pda.z()), f);
    let coded_branch = if pda.is_full_cache() {
        BigRational::zero()
    } else {
        let occupancy = pda.occupancy();
        let mut tails = BigRational::zero();
        for size in occupancy.sizes() {
            tails += r_pir_tail(servers as u64, (size * (files - 1)) as u64);
        }
        (int(pda.s()) + tails) / int(f)
    };
    let rate = coded_branch.clone().min(uncoded_branch.clone());
    SchemeMetrics {
        scheme: Scheme::Pda,
        rate,
        coded_branch,
        uncoded_branch,
        subpacketization: BigUint::from((servers - 1) * f),
        upload: pda_upload(servers, pda.k(), files, pda.is_full_cache()),
    }
}

/// Expected rate of each server. Server 0 sends `X_{0,s}` unless every user
/// in `K_s` drew the all-zero query, which happens with probability
/// `B^{-|K_s|(N-1)}`; every other server always sends all `S` packets.
pub fn per_server_rates(pda: &Pda, servers: usize, files: usize) -> Vec<BigRational> {
    assert!(servers >= 2 && files >= 1, "need B >= 2 and N >= 1");
    let packets = int(pda.f() * (servers - 1));
    let b = BigInt::from(servers);
    let mut zero = BigRational::zero();
    for size in pda.occupancy().sizes() {
        let p = num::pow(b.clone(), size * (files - 1));
        zero += BigRational::one() - BigRational::new(BigInt::one(), p);
    }
    let mut rates = vec![zero / &packets];
    rates.extend((1..servers).map(|_| int(pda.s()) / &packets));
    rates
}

/// `(S/F) Σ_{i=0}^{g(N-1)} B^{-i}`, the coded branch for a g-regular PDA.
pub fn regular_rate(g: usize, s: usize, f: usize, servers: usize, files: usize) -> BigRational {
    assert!(g >= 1 && f >= 1 && servers >= 2 && files >= 1);
    rat(s, f) * r_pir_sum(servers as u64, (g * (files - 1)) as u64)
}

fn check_man(k: usize, t: usize, servers: usize, files: usize) -> Result<(), AnalysisError> {
    check_servers(servers)?;
    if k == 0 || t > k || files == 0 {
        return Err(AnalysisError::Parameters(format!(
            "need K >= 1, N >= 1 and t in [0:K], got K={k}, t={t}, N={files}"
        )));
    }
    Ok(())
}

/// The PDA scheme on the MAN array with `t = KM/N`.
pub fn man_metrics(
    k: usize,
    t: usize,
    servers: usize,
    files: usize,
) -> Result<SchemeMetrics, AnalysisError> {
    check_man(k, t, servers, files)?;
    let coded_branch = if t == k {
        BigRational::zero()
    } else {
        rat(k - t, t + 1) * r_pir_sum(servers as u64, ((t + 1) * (files - 1)) as u64)
    };
    let uncoded_branch = rat(files * (k - t), k);
    Ok(SchemeMetrics {
        scheme: Scheme::Pda,
        rate: coded_branch.clone().min(uncoded_branch.clone()),
        coded_branch,
        uncoded_branch,
        subpacketization: BigUint::from(servers - 1) * binomial(k as u64, t as u64),
        upload: pda_upload(servers, k, files, t == k),
    })
}

/// The product-design comparator at `t = KM/N`.
pub fn product_design_metrics(
    k: usize,
    t: usize,
    servers: usize,
    files: usize,
) -> Result<SchemeMetrics, AnalysisError> {
    check_man(k, t, servers, files)?;
    let coded_branch = rat(k - t, t + 1) * r_pir_sum(servers as u64, (files - 1) as u64);
    let uncoded_branch = rat(files * (k - t), k);
    let coefficient = BigUint::from(t + 1)
        * binomial(k as u64, (t + 1) as u64)
        * BigUint::from(servers)
        * BigUint::from(files);
    let upload = if coefficient.is_zero() {
        UploadCost::zero()
    } else {
        let files32 = u32::try_from(files)
            .map_err(|_| AnalysisError::Parameters(format!("N={files} is too large")))?;
        let bits = super::big_to_f64(&coefficient) * log2_factorial_ratio(servers as u64, files32);
        UploadCost {
            coefficient,
            log2_term: Log2Term::FactorialRatio {
                servers: servers as u64,
                files: files32,
            },
            bits,
        }
    };
    Ok(SchemeMetrics {
        scheme: Scheme::ProductDesign,
        rate: coded_branch.clone().min(uncoded_branch.clone()),
        coded_branch,
        uncoded_branch,
        subpacketization: num::pow(BigUint::from(servers), files) * binomial(k as u64, t as u64),
        upload,
    })
}

/// The MAN coded-caching rate at integer `t`: `(K - t)/(t + 1)`.
pub fn cc_rate(k: usize, t: usize) -> BigRational {
    assert!(t <= k);
    rat(k - t, t + 1)
}

/// `R_cc` at arbitrary memory by memory sharing between neighbouring
/// integer points. The integer-point curve is convex, so the chord is the
/// lower convex envelope.
pub fn cc_rate_memory_sharing(k: usize, t: &BigRational) -> BigRational {
    assert!(*t >= BigRational::zero() && *t <= int(k));
    let lo = t.floor();
    if lo == *t {
        return cc_rate(k, usize::try_from(lo.to_integer()).unwrap());
    }
    let lo_t = usize::try_from(lo.to_integer()).unwrap();
    let frac = t - &lo;
    let a = cc_rate(k, lo_t);
    let b = cc_rate(k, lo_t + 1);
    &a + (b - &a) * frac
}

/// The coded-caching benchmarks at memory `M`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CcRates {
    /// `t = KM/N`, possibly fractional.
    #[serde(serialize_with = "ser_rational")]
    pub t: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub r_cc: BigRational,
    /// Lower bound on the optimal coded-caching rate, `R_cc / 4`.
    #[serde(serialize_with = "ser_rational")]
    pub optimal_lower_bound: BigRational,
    /// The optimum under uncoded placement, equal to `R_cc` when `N >= K`.
    #[serde(serialize_with = "ser_opt_rational")]
    pub optimal_uncoded: Option<BigRational>,
}

fn ser_rational<S: serde::Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&super::fmt_rational(r))
}

fn ser_opt_rational<S: serde::Serializer>(
    r: &Option<BigRational>,
    s: S,
) -> Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&super::fmt_rational(r)),
        None => s.serialize_none(),
    }
}

pub fn cc_rates(k: usize, memory: &BigRational, files: usize) -> Result<CcRates, AnalysisError> {
    if k == 0 || files == 0 || *memory < BigRational::zero() || *memory > int(files) {
        return Err(AnalysisError::Parameters(format!(
            "need K, N >= 1 and M in [0, N], got K={k}, M={}, N={files}",
            super::fmt_rational(memory)
        )));
    }
    let t = memory * int(k) / int(files);
    let r_cc = cc_rate_memory_sharing(k, &t);
    Ok(CcRates {
        optimal_lower_bound: &r_cc / int(4),
        optimal_uncoded: (files >= k).then(|| r_cc.clone()),
        t,
        r_cc,
    })
}

/// Outcome of the order-optimality inequalities at one grid point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderOptimality {
    pub users: usize,
    pub files: usize,
    pub servers: usize,
    pub t: usize,
    #[serde(serialize_with = "ser_rational")]
    pub rate: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub r_cc: BigRational,
    /// `R / R_cc`; absent when both vanish.
    #[serde(serialize_with = "ser_opt_rational")]
    pub ratio: Option<BigRational>,
    #[serde(serialize_with = "ser_rational")]
    pub geometric_bound: BigRational,
    /// `R <= R_cc · B/(B-1)`.
    pub within_geometric: bool,
    /// `R <= 2 R_cc`.
    pub within_factor_2: bool,
    /// `R <= 8 (R_cc / 4)`.
    pub within_factor_8: bool,
}

impl OrderOptimality {
    pub fn holds(&self) -> bool {
        self.within_geometric && self.within_factor_2 && self.within_factor_8
    }
}

/// Checks the MAN-PDA scheme's coded branch against `R_cc` as exact
/// rationals.
pub fn order_optimality_check(
    k: usize,
    files: usize,
    servers: usize,
    t: usize,
) -> Result<OrderOptimality, AnalysisError> {
    let metrics = man_metrics(k, t, servers, files)?;
    let rate = metrics.coded_branch;
    let r_cc = cc_rate(k, t);
    let geometric_bound = rat(servers, servers - 1);
    let ratio = (!r_cc.is_zero()).then(|| &rate / &r_cc);
    Ok(OrderOptimality {
        users: k,
        files,
        servers,
        t,
        within_geometric: rate <= &r_cc * &geometric_bound,
        within_factor_2: rate <= &r_cc * int(2),
        within_factor_8: rate <= int(8) * (&r_cc / int(4)),
        rate,
        r_cc,
        ratio,
        geometric_bound,
    })
}

/// Rate of the two-user two-file interference-alignment scheme, for
/// comparison plots only. Defined for `M ∈ [0, 2]`.
pub fn cia_metrics(memory: &BigRational, servers: usize) -> Result<SchemeMetrics, AnalysisError> {
    check_servers(servers)?;
    if *memory < BigRational::zero() || *memory > int(2) {
        return Err(AnalysisError::Parameters(format!(
            "memory {} outside [0, 2]",
            super::fmt_rational(memory)
        )));
    }
    let b = int(servers);
    let one = BigRational::one();
    let first = rat(servers - 1, 2 * servers);
    let second = rat(2 * (servers - 1), 2 * servers - 1);
    let rate = if *memory <= first {
        int(2) * (&one - memory)
    } else if *memory <= second {
        (&b + &one) * (int(3) - int(2) * memory) / (int(2) * &b + &one)
    } else {
        (&one - memory / int(2)) * (&one + &one / &b)
    };
    Ok(SchemeMetrics {
        scheme: Scheme::Cia,
        uncoded_branch: int(2) - memory,
        coded_branch: rate.clone(),
        rate,
        subpacketization: BigUint::one(),
        upload: UploadCost::zero(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QPdaVariant {
    /// Caching ratio `1/q`.
    OneOverQ,
    /// Caching ratio `1 - 1/q`.
    OneMinusOneOverQ,
}

/// Parameters of the `(q, m)` array families.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QPdaParams {
    pub k: usize,
    pub f: BigUint,
    pub z: BigUint,
    pub s: BigUint,
    pub g: usize,
}

pub fn q_pda_params(q: usize, m: usize, variant: QPdaVariant) -> Result<QPdaParams, AnalysisError> {
    if q < 2 || m < 1 {
        return Err(AnalysisError::Parameters(format!(
            "need q >= 2 and m >= 1, got q={q}, m={m}"
        )));
    }
    let qb = BigUint::from(q);
    let qm = num::pow(qb.clone(), m);
    let qm1 = num::pow(qb.clone(), m - 1);
    let k = q * (m + 1);
    Ok(match variant {
        QPdaVariant::OneOverQ => QPdaParams {
            k,
            s: &qm * &qb - &qm,
            f: qm,
            z: qm1,
            g: m + 1,
        },
        QPdaVariant::OneMinusOneOverQ => {
            let q1 = BigUint::from(q - 1);
            QPdaParams {
                k,
                f: &q1 * &qm,
                z: &q1 * &q1 * qm1,
                s: qm,
                g: (q - 1) * (m + 1),
            }
        }
    })
}

/// The PDA scheme on a `(q, m)` family member, from its parameters alone.
pub fn q_pda_metrics(
    q: usize,
    m: usize,
    servers: usize,
    files: usize,
    variant: QPdaVariant,
) -> Result<SchemeMetrics, AnalysisError> {
    check_servers(servers)?;
    if files == 0 {
        return Err(AnalysisError::Parameters("need N >= 1".into()));
    }
    let p = q_pda_params(q, m, variant)?;
    let f = BigInt::from(p.f.clone());
    let s_over_f = BigRational::new(BigInt::from(p.s.clone()), f.clone());
    let coded_branch = s_over_f * r_pir_sum(servers as u64, (p.g * (files - 1)) as u64);
    let uncoded_branch =
        BigRational::new(BigInt::from(files) * (&f - BigInt::from(p.z.clone())), f);
    Ok(SchemeMetrics {
        scheme: Scheme::Pda,
        rate: coded_branch.clone().min(uncoded_branch.clone()),
        coded_branch,
        uncoded_branch,
        subpacketization: BigUint::from(servers - 1) * &p.f,
        upload: pda_upload(servers, p.k, files, false),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{catalog, man_pda, single_user_pda, ManParams};
    use proptest::prelude::*;

    /// The rate by brute force: per label, sum `B^{-i}` term by term.
    fn oracle_rate(pda: &Pda, servers: usize, files: usize) -> BigRational {
        let mut total = BigRational::zero();
        for size in pda.occupancy().sizes() {
            total += BigRational::one();
            let mut p = BigRational::one();
            for _ in 0..size * (files - 1) {
                p /= int(servers);
                total += &p;
            }
        }
        total / int(pda.f())
    }

    #[test]
    fn sec3a_rate_is_about_3_663() {
        let m = theorem1_rate(&catalog("sec3a").unwrap(), 2, 8);
        assert!((m.rate_f64() - 3.663).abs() < 1e-3);
        assert_eq!(m.subpacketization, BigUint::from(6u32));
        assert_eq!(m.upload.coefficient, BigUint::from(112u32));
        assert_eq!(m.upload.bits, 112.0);
        assert_eq!(m.rate, oracle_rate(&catalog("sec3a").unwrap(), 2, 8));
    }

    #[test]
    fn sec4a_rate_exact() {
        let pda = catalog("sec4a").unwrap();
        let m = theorem1_rate(&pda, 3, 6);
        let expected = (int(3) - rat(1, num::pow(BigInt::from(3), 15))) / int(2);
        assert_eq!(m.rate, expected);
        assert_eq!(regular_rate(3, 4, 4, 3, 6), expected);
        assert_eq!(m.subpacketization, BigUint::from(8u32));
        assert_eq!(m.upload.coefficient, BigUint::from(90u32));
        assert!((m.upload.bits - 90.0 * 3f64.log2()).abs() < 1e-9);
    }

    #[test]
    fn per_server_rates_sum_to_closed_form() {
        let pda = catalog("sec4a").unwrap();
        let rates = per_server_rates(&pda, 3, 6);
        let half = (int(1) - rat(1, num::pow(BigInt::from(3), 15))) / int(2);
        assert_eq!(rates[0], half);
        assert_eq!(rates[1], rat(1, 2));
        for k in 1..=6 {
            for t in 0..=k {
                let pda = man_pda(ManParams::new(k, t).unwrap()).unwrap();
                for servers in 2..5 {
                    let total: BigRational = per_server_rates(&pda, servers, 3).into_iter().sum();
                    assert_eq!(total, theorem1_rate(&pda, servers, 3).coded_branch);
                }
            }
        }
    }

    #[test]
    fn full_cache_rate_is_zero() {
        let pda = man_pda(ManParams::new(3, 3).unwrap()).unwrap();
        let m = theorem1_rate(&pda, 2, 4);
        assert!(m.rate.is_zero());
        assert_eq!(m.upload.bits, 0.0);
    }

    #[test]
    fn single_user_matches_pir_with_side_information() {
        for f in 1..=8 {
            for z in 0..=f {
                let pda = single_user_pda(f, z).unwrap();
                for servers in [2, 3, 5] {
                    for files in 1..=6 {
                        let expected = rat(f - z, f) * r_pir_sum(servers as u64, files as u64 - 1);
                        assert_eq!(theorem1_rate(&pda, servers, files).coded_branch, expected);
                    }
                }
            }
        }
    }

    #[test]
    fn man_example_composes_with_cc_rate() {
        let m = man_metrics(4, 1, 2, 4).unwrap();
        assert_eq!(m.coded_branch, rat(3, 2) * r_pir_sum(2, 6));
        let pda = man_pda(ManParams::new(4, 1).unwrap()).unwrap();
        assert_eq!(theorem1_rate(&pda, 2, 4), m);
        let pure = man_metrics(1, 0, 3, 5).unwrap();
        assert_eq!(pure.coded_branch, r_pir_sum(3, 4));
    }

    #[test]
    fn man_matches_general_rate_on_constructed_arrays() {
        for k in 1..=8 {
            for t in 0..=k {
                let pda = man_pda(ManParams::new(k, t).unwrap()).unwrap();
                for servers in [2, 3] {
                    for files in [2, 4, 8] {
                        let closed = man_metrics(k, t, servers, files).unwrap();
                        let general = theorem1_rate(&pda, servers, files);
                        assert_eq!(closed.rate, general.rate, "K={k} t={t}");
                        assert_eq!(closed.coded_branch, oracle_rate(&pda, servers, files));
                        assert_eq!(closed.subpacketization, general.subpacketization);
                    }
                }
            }
        }
    }

    #[test]
    fn product_design_values() {
        let pd = product_design_metrics(4, 1, 2, 4).unwrap();
        assert_eq!(pd.coded_branch, rat(3, 2) * rat(15, 8));
        assert_eq!(pd.subpacketization, BigUint::from(64u32));
        // 2 * C(4,2) * 2 * 4 = 96 times log2(16!/8!)
        assert_eq!(pd.upload.coefficient, BigUint::from(96u32));
        let exact: f64 = (9..=16).map(|j: u32| (j as f64).log2()).sum();
        assert!((pd.upload.bits - 96.0 * exact).abs() < 1e-9);
        let top = product_design_metrics(4, 4, 2, 4).unwrap();
        assert!(top.rate.is_zero());
        assert_eq!(top.upload.bits, 0.0);
    }

    #[test]
    fn cc_rate_values() {
        let r = cc_rates(4, &int(2), 4).unwrap();
        assert_eq!(r.r_cc, rat(2, 3));
        // independent evaluation of K(1 - M/N)/(1 + KM/N)
        let (k, m, n) = (int(4), int(2), int(4));
        let one = BigRational::one();
        assert_eq!(r.r_cc, &k * (&one - &m / &n) / (&one + &k * &m / &n));
        assert_eq!(cc_rates(4, &int(0), 4).unwrap().r_cc, int(4));
        assert!(cc_rates(4, &int(4), 4).unwrap().r_cc.is_zero());
        let mid = cc_rates(4, &rat(1, 2), 4).unwrap();
        assert_eq!(mid.r_cc, (int(4) + rat(3, 2)) / int(2));
        assert!(cc_rates(4, &int(5), 4).is_err());
    }

    #[test]
    fn order_optimality_grid() {
        for k in 1..=8 {
            for files in 1..=8 {
                for servers in 2..=4 {
                    for t in 0..=k {
                        let r = order_optimality_check(k, files, servers, t).unwrap();
                        assert!(r.holds(), "{r:?}");
                    }
                }
            }
        }
        let wide = order_optimality_check(5, 4, 64, 2).unwrap();
        let ratio = wide.ratio.unwrap();
        assert!(ratio > int(1) && ratio < rat(64, 63));
        let pure = order_optimality_check(1, 5, 3, 0).unwrap();
        assert_eq!(pure.ratio.unwrap(), r_pir_sum(3, 4));
    }

    #[test]
    fn cia_is_continuous_at_breakpoints() {
        for servers in 2..8 {
            let first = rat(servers - 1, 2 * servers);
            let second = rat(2 * (servers - 1), 2 * servers - 1);
            let b = int(servers);
            let one = BigRational::one();
            let mid = |m: &BigRational| (&b + &one) * (int(3) - int(2) * m) / (int(2) * &b + &one);
            let tail = |m: &BigRational| (&one - m / int(2)) * (&one + &one / &b);
            assert_eq!(cia_metrics(&first, servers).unwrap().rate, mid(&first));
            assert_eq!(mid(&second), tail(&second));
            assert_eq!(cia_metrics(&int(0), servers).unwrap().rate, int(2));
            assert!(cia_metrics(&int(2), servers).unwrap().rate.is_zero());
        }
    }

    #[test]
    fn q_pda_parameters() {
        let a = q_pda_params(3, 3, QPdaVariant::OneOverQ).unwrap();
        assert_eq!(
            (a.k, a.f.clone(), a.z.clone(), a.s.clone()),
            (12, 27u32.into(), 9u32.into(), 54u32.into())
        );
        let b = q_pda_params(3, 3, QPdaVariant::OneMinusOneOverQ).unwrap();
        assert_eq!(
            (b.k, b.f.clone(), b.z.clone(), b.s.clone()),
            (12, 54u32.into(), 36u32.into(), 27u32.into())
        );
        // every label sits in g columns: g S = K (F - Z)
        for q in 2..6 {
            for m in 1..5 {
                for v in [QPdaVariant::OneOverQ, QPdaVariant::OneMinusOneOverQ] {
                    let p = q_pda_params(q, m, v).unwrap();
                    assert_eq!(
                        BigUint::from(p.g) * &p.s,
                        BigUint::from(p.k) * (&p.f - &p.z)
                    );
                }
            }
        }
    }

    #[test]
    fn q_pda_rates_match_family_formulas() {
        let a = q_pda_metrics(3, 3, 10, 18, QPdaVariant::OneOverQ).unwrap();
        assert_eq!(a.coded_branch, int(2) * r_pir_sum(10, 4 * 17));
        let b = q_pda_metrics(3, 3, 10, 18, QPdaVariant::OneMinusOneOverQ).unwrap();
        assert_eq!(b.coded_branch, rat(1, 2) * r_pir_sum(10, 8 * 17));
        let pd = product_design_metrics(12, 4, 10, 18).unwrap();
        assert!(a.rate > pd.rate);
    }

    proptest! {
        #[test]
        fn reported_rate_is_min_of_branches(k in 1usize..9, t_frac in 0.0f64..=1.0, servers in 2usize..6, files in 1usize..9) {
            let t = ((k as f64) * t_frac) as usize;
            for m in [man_metrics(k, t, servers, files).unwrap(), product_design_metrics(k, t, servers, files).unwrap()] {
                let expected = m.coded_branch.clone().min(m.uncoded_branch.clone());
                prop_assert_eq!(&m.rate, &expected);
                prop_assert!(m.rate >= BigRational::zero());
                prop_assert!(m.subpacketization >= BigUint::one());
                prop_assert!(m.upload.bits >= 0.0);
            }
        }
    }
}
