use std::fmt;
use std::str::FromStr;

use num::{BigRational, BigUint, Zero};

use super::{
    fmt_rational, fmt_sig, int, man_metrics, product_design_metrics, q_pda_metrics, q_pda_params,
    rat, ratio_asymptotics, rational_to_f64, QPdaVariant, SchemeMetrics,
};
use crate::error::AnalysisError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FigureId {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Table1,
    Table2,
}

impl FigureId {
    pub const ALL: [FigureId; 8] = [
        FigureId::Fig2,
        FigureId::Fig3,
        FigureId::Fig4,
        FigureId::Fig5,
        FigureId::Fig6,
        FigureId::Fig7,
        FigureId::Table1,
        FigureId::Table2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
            FigureId::Fig4 => "fig4",
            FigureId::Fig5 => "fig5",
            FigureId::Fig6 => "fig6",
            FigureId::Fig7 => "fig7",
            FigureId::Table1 => "table1",
            FigureId::Table2 => "table2",
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigureId {
    type Err = AnalysisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FigureId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| AnalysisError::UnknownFigure(s.to_string()))
    }
}

/// Which dataset to emit, with optional overrides of its default
/// parameters. Unset fields take the per-figure defaults.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FigureSpec {
    pub id: FigureId,
    pub servers: Option<usize>,
    pub files: Option<usize>,
    pub users: Option<usize>,
    pub q: Option<usize>,
    pub m: Option<usize>,
    /// Largest `m` for the series that sweep it.
    pub m_max: Option<usize>,
    /// Memory-sharing points per unit step of `t` for fig2 (1 = integer
    /// points only).
    pub steps: usize,
}

impl FigureSpec {
    pub fn new(id: FigureId) -> Self {
        Self {
            id,
            servers: None,
            files: None,
            users: None,
            q: None,
            m: None,
            m_max: None,
            steps: 1,
        }
    }
}

/// A header row and string cells, ready for CSV.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    pub id: FigureId,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Dataset {
    fn new(id: FigureId, header: &[&str]) -> Self {
        Self {
            id,
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i].as_str()).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

fn float(r: &BigRational) -> String {
    fmt_sig(rational_to_f64(r))
}

pub fn emit_figure_data(spec: &FigureSpec) -> Result<Dataset, AnalysisError> {
    if spec.steps == 0 {
        return Err(AnalysisError::Parameters("steps must be at least 1".into()));
    }
    match spec.id {
        FigureId::Fig2 => man_rates(spec),
        FigureId::Fig3 => man_uploads(spec),
        FigureId::Fig4 => q_rates(spec),
        FigureId::Fig5 => rate_sweep(spec),
        FigureId::Fig6 | FigureId::Fig7 => cost_sweep(spec),
        FigureId::Table1 => table1(spec),
        FigureId::Table2 => table2(spec),
    }
}

fn man_defaults(spec: &FigureSpec) -> (usize, usize, usize) {
    (
        spec.servers.unwrap_or(2),
        spec.files.unwrap_or(4),
        spec.users.unwrap_or(4),
    )
}

fn man_pair(
    k: usize,
    t: usize,
    servers: usize,
    files: usize,
) -> Result<(SchemeMetrics, SchemeMetrics), AnalysisError> {
    Ok((
        man_metrics(k, t, servers, files)?,
        product_design_metrics(k, t, servers, files)?,
    ))
}

/// Rates of both schemes over the `M/N` grid; fractional points use memory
/// sharing between neighbouring integer `t`.
fn man_rates(spec: &FigureSpec) -> Result<Dataset, AnalysisError> {
    let (servers, files, k) = man_defaults(spec);
    let mut data = Dataset::new(
        spec.id,
        &[
            "m_over_n",
            "t",
            "pda_rate",
            "product_design_rate",
            "pda_rate_exact",
            "product_design_rate_exact",
        ],
    );
    let points: Vec<_> = (0..=k)
        .map(|t| man_pair(k, t, servers, files))
        .collect::<Result<_, _>>()?;
    for t in 0..=k {
        let substeps = if t == k { 1 } else { spec.steps };
        for j in 0..substeps {
            let frac = rat(j, spec.steps);
            let blend = |a: &BigRational, b: &BigRational| a + (b - a) * &frac;
            let (pda, pd) = if j == 0 {
                (points[t].0.rate.clone(), points[t].1.rate.clone())
            } else {
                (
                    blend(&points[t].0.rate, &points[t + 1].0.rate),
                    blend(&points[t].1.rate, &points[t + 1].1.rate),
                )
            };
            let t_exact = int(t) + &frac;
            data.push(vec![
                fmt_rational(&(&t_exact / int(k))),
                fmt_rational(&t_exact),
                float(&pda),
                float(&pd),
                fmt_rational(&pda),
                fmt_rational(&pd),
            ]);
        }
    }
    Ok(data)
}

fn man_uploads(spec: &FigureSpec) -> Result<Dataset, AnalysisError> {
    let (servers, files, k) = man_defaults(spec);
    let mut data = Dataset::new(
        spec.id,
        &[
            "m_over_n",
            "t",
            "pda_upload_bits",
            "product_design_upload_bits",
            "upload_ratio",
        ],
    );
    for t in 0..=k {
        let (pda, pd) = man_pair(k, t, servers, files)?;
        let ratio = if pda.upload.bits > 0.0 {
            fmt_sig(pd.upload.bits / pda.upload.bits)
        } else {
            "NA".to_string()
        };
        data.push(vec![
            fmt_rational(&rat(t, k)),
            t.to_string(),
            fmt_sig(pda.upload.bits),
            fmt_sig(pd.upload.bits),
            ratio,
        ]);
    }
    Ok(data)
}

/// No cache, the two `(q, m)` families and a full cache, against the
/// product design at the same `t`.
fn q_rates(spec: &FigureSpec) -> Result<Dataset, AnalysisError> {
    let servers = spec.servers.unwrap_or(10);
    let files = spec.files.unwrap_or(18);
    let q = spec.q.unwrap_or(3);
    let m = spec.m.unwrap_or(3);
    let k = q * (m + 1);
    let mut data = Dataset::new(
        spec.id,
        &["m_over_n", "t", "pda", "pda_rate", "product_design_rate"],
    );
    let label = |k: usize, f: &BigUint, z: &BigUint, s: &BigUint| format!("({k} {f} {z} {s})");

    let none = man_metrics(k, 0, servers, files)?;
    let pd = product_design_metrics(k, 0, servers, files)?;
    data.push(vec![
        "0".into(),
        "0".into(),
        label(k, &1u32.into(), &0u32.into(), &k.into()),
        float(&none.rate),
        float(&pd.rate),
    ]);
    for (variant, t) in [
        (QPdaVariant::OneOverQ, m + 1),
        (QPdaVariant::OneMinusOneOverQ, k - (m + 1)),
    ] {
        let p = q_pda_params(q, m, variant)?;
        let new = q_pda_metrics(q, m, servers, files, variant)?;
        let pd = product_design_metrics(k, t, servers, files)?;
        data.push(vec![
            fmt_rational(&rat(t, k)),
            t.to_string(),
            label(k, &p.f, &p.z, &p.s),
            float(&new.rate),
            float(&pd.rate),
        ]);
    }
    data.push(vec![
        "1".into(),
        k.to_string(),
        label(k, &1u32.into(), &1u32.into(), &BigUint::zero()),
        "0".into(),
        "0".into(),
    ]);
    Ok(data)
}

fn sweep_range(spec: &FigureSpec, default_max: usize) -> std::ops::RangeInclusive<usize> {
    1..=spec.m_max.unwrap_or(default_max)
}

/// Rates against `K` at caching ratio `1/q` and a fixed `N`.
fn rate_sweep(spec: &FigureSpec) -> Result<Dataset, AnalysisError> {
    let servers = spec.servers.unwrap_or(10);
    let files = spec.files.unwrap_or(300);
    let q = spec.q.unwrap_or(3);
    let mut data = Dataset::new(
        spec.id,
        &[
            "m",
            "k",
            "t",
            "pda_rate",
            "product_design_rate",
            "rate_ratio",
            "rate_ratio_limit",
        ],
    );
    for m in sweep_range(spec, 10) {
        let r = ratio_asymptotics(q, m, servers, files)?;
        let new = q_pda_metrics(q, m, servers, files, QPdaVariant::OneOverQ)?;
        let pd = product_design_metrics(q * (m + 1), m + 1, servers, files)?;
        data.push(vec![
            m.to_string(),
            (q * (m + 1)).to_string(),
            (m + 1).to_string(),
            float(&new.coded_branch),
            float(&pd.coded_branch),
            float(&r.rate_ratio),
            float(&r.rate_ratio_limit),
        ]);
    }
    Ok(data)
}

/// Subpacketization (fig6) or upload (fig7) against `K`, with `N = K`
/// unless `files` is given.
fn cost_sweep(spec: &FigureSpec) -> Result<Dataset, AnalysisError> {
    let servers = spec.servers.unwrap_or(10);
    let q = spec.q.unwrap_or(3);
    let upload = spec.id == FigureId::Fig7;
    let header: &[&str] = if upload {
        &["m", "k", "n", "u_new_bits", "u_pd_bits", "u_pd_over_u_new"]
    } else {
        &["m", "k", "n", "f_new", "f_pd", "f_pd_over_f_new"]
    };
    let mut data = Dataset::new(spec.id, header);
    for m in sweep_range(spec, 8) {
        let k = q * (m + 1);
        let files = spec.files.unwrap_or(k);
        let new = q_pda_metrics(q, m, servers, files, QPdaVariant::OneOverQ)?;
        let pd = product_design_metrics(k, m + 1, servers, files)?;
        let (a, b, ratio) = if upload {
            (
                fmt_sig(new.upload.bits),
                fmt_sig(pd.upload.bits),
                fmt_sig(pd.upload.bits / new.upload.bits),
            )
        } else {
            let ratio = BigRational::new(
                pd.subpacketization.clone().into(),
                new.subpacketization.clone().into(),
            );
            (
                new.subpacketization.to_string(),
                pd.subpacketization.to_string(),
                float(&ratio),
            )
        };
        data.push(vec![
            m.to_string(),
            k.to_string(),
            files.to_string(),
            a,
            b,
            ratio,
        ]);
    }
    Ok(data)
}

fn table1(spec: &FigureSpec) -> Result<Dataset, AnalysisError> {
    let (servers, files, k) = man_defaults(spec);
    let mut data = Dataset::new(
        spec.id,
        &[
            "t",
            "m_over_n",
            "pda_rate",
            "pda_subpacketization",
            "pda_upload_bits",
            "product_design_rate",
            "product_design_subpacketization",
            "product_design_upload_bits",
        ],
    );
    for t in 0..=k {
        let (pda, pd) = man_pair(k, t, servers, files)?;
        data.push(vec![
            t.to_string(),
            fmt_rational(&rat(t, k)),
            fmt_rational(&pda.rate),
            pda.subpacketization.to_string(),
            fmt_sig(pda.upload.bits),
            fmt_rational(&pd.rate),
            pd.subpacketization.to_string(),
            fmt_sig(pd.upload.bits),
        ]);
    }
    Ok(data)
}

/// The two `(q, m)` families and the product design at caching ratio `1/q`.
fn table2(spec: &FigureSpec) -> Result<Dataset, AnalysisError> {
    let servers = spec.servers.unwrap_or(10);
    let files = spec.files.unwrap_or(18);
    let q = spec.q.unwrap_or(3);
    let m = spec.m.unwrap_or(3);
    let k = q * (m + 1);
    let mut data = Dataset::new(
        spec.id,
        &[
            "scheme",
            "m_over_n",
            "k",
            "t",
            "rate",
            "subpacketization",
            "upload_bits",
        ],
    );
    let rows = [
        (
            "pda_1_over_q",
            m + 1,
            q_pda_metrics(q, m, servers, files, QPdaVariant::OneOverQ)?,
        ),
        (
            "pda_1_minus_1_over_q",
            k - (m + 1),
            q_pda_metrics(q, m, servers, files, QPdaVariant::OneMinusOneOverQ)?,
        ),
        (
            "product_design",
            m + 1,
            product_design_metrics(k, m + 1, servers, files)?,
        ),
    ];
    for (name, t, metrics) in rows {
        data.push(vec![
            name.to_string(),
            fmt_rational(&rat(t, k)),
            k.to_string(),
            t.to_string(),
            float(&metrics.rate),
            metrics.subpacketization.to_string(),
            fmt_sig(metrics.upload.bits),
        ]);
    }
    Ok(data)
}
