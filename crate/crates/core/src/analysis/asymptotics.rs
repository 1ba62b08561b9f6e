use num::{BigInt, BigRational, BigUint, One};
use serde::Serialize;

use super::{binomial, fmt_rational, product_design_metrics, q_pda_metrics, QPdaVariant};
use crate::error::AnalysisError;

/// The three scheme-vs-product-design ratios at `K = q(m+1)`, `t = m+1`,
/// caching ratio `1/q`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticRatios {
    pub q: usize,
    pub m: usize,
    pub servers: usize,
    pub files: usize,
    /// `R_new / R_PD` from the two rate formulas.
    #[serde(serialize_with = "ser")]
    pub rate_ratio: BigRational,
    /// `((m+2)/(m+1)) (1 - B^{m-mN-N}) / (1 - B^{-N})`.
    #[serde(serialize_with = "ser")]
    pub rate_ratio_closed_form: BigRational,
    /// `1 / (1 - B^{-N})`, the large-K limit.
    #[serde(serialize_with = "ser")]
    pub rate_ratio_limit: BigRational,
    /// `(B-1) q^m / (B^N C(K,t))`.
    #[serde(serialize_with = "ser")]
    pub subpacketization_ratio: BigRational,
    pub upload_ratio: f64,
    /// `1 / (N (B^N - B^{N-1}))`; only meaningful for `N >= 2`.
    #[serde(serialize_with = "ser")]
    pub upload_ratio_bound: BigRational,
}

fn ser<S: serde::Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_rational(r))
}

pub fn ratio_asymptotics(
    q: usize,
    m: usize,
    servers: usize,
    files: usize,
) -> Result<AsymptoticRatios, AnalysisError> {
    if files == 0 {
        return Err(AnalysisError::Parameters("need N >= 1".into()));
    }
    let k = q * (m + 1);
    let t = m + 1;
    let new = q_pda_metrics(q, m, servers, files, QPdaVariant::OneOverQ)?;
    let pd = product_design_metrics(k, t, servers, files)?;

    let b = BigInt::from(servers);
    let b_n = num::pow(b.clone(), files);
    let one = BigRational::one();
    // B^{m - mN - N} = 1 / B^{mN + N - m}
    let deep = num::pow(b.clone(), m * files + files - m);
    let inv_b_n = BigRational::new(BigInt::one(), b_n.clone());
    let closed = BigRational::new(BigInt::from(m + 2), BigInt::from(m + 1))
        * (&one - BigRational::new(BigInt::one(), deep))
        / (&one - &inv_b_n);

    let f_new = BigUint::from(servers - 1) * num::pow(BigUint::from(q), m);
    let f_pd = num::pow(BigUint::from(servers), files) * binomial(k as u64, t as u64);

    let bound_den = BigInt::from(files) * (&b_n - num::pow(b, files - 1));

    Ok(AsymptoticRatios {
        q,
        m,
        servers,
        files,
        rate_ratio: &new.coded_branch / &pd.coded_branch,
        rate_ratio_closed_form: closed,
        rate_ratio_limit: &one / (&one - &inv_b_n),
        subpacketization_ratio: BigRational::new(f_new.into(), f_pd.into()),
        upload_ratio: new.upload.bits / pd.upload.bits,
        upload_ratio_bound: &one / BigRational::from_integer(bound_den),
    })
}
