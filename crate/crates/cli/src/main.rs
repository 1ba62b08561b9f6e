use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mupir::analysis::{emit_figure_data, fmt_sig, FigureId, FigureSpec};
use mupir::constructions::{catalog, man_pda, single_user_pda, trivial_pda, ManParams};
use mupir::pda::{Pda, PdaArray};
use mupir::protocol::{PrivateQueries, QueryBuilder, SystemConfig};
use mupir::sim::{
    default_demands, estimate_rate, privacy_audit_empirical, privacy_audit_exact_with,
    regression_suite, resolve_pda, ExperimentPlan, LeakyQueries, PlanFile, PrivacyReport,
    RateEstimate, DEFAULT_CAP,
};

#[derive(Parser)]
#[command(
    name = "mupir",
    version,
    about = "Cache-aided multi-user PIR driven by placement delivery arrays"
)]
struct Cli {
    /// Suppress human-readable summaries.
    #[arg(short, long, global = true)]
    quiet: bool,

    /// Default seed for plans and audits that do not set one.
    #[arg(long, global = true, env = "MUPIR_SEED", default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a `.pda` file against the array conditions.
    Validate { path: PathBuf },
    /// Build an array: `man`, `single-user`, `trivial` or `catalog:NAME`.
    Construct(ConstructArgs),
    /// Run an experiment plan (JSON).
    Simulate {
        plan: PathBuf,
        /// Directory for transcripts and reports.
        #[arg(short, long, default_value = "mupir-out")]
        out_dir: PathBuf,
    },
    /// Emit a figure or table dataset as CSV.
    Analyze(AnalyzeArgs),
    /// Audit query privacy on one configuration.
    Audit(AuditArgs),
    /// Reproduce every published example number.
    Regress {
        /// Write the ledger as CSV.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ConstructArgs {
    family: String,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    t: Option<usize>,
    #[arg(long)]
    f: Option<usize>,
    #[arg(long)]
    z: Option<usize>,
    /// Output path; standard output when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// fig2..fig7, table1 or table2.
    id: String,
    #[arg(long)]
    servers: Option<usize>,
    #[arg(long)]
    files: Option<usize>,
    #[arg(long)]
    users: Option<usize>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    m_max: Option<usize>,
    /// Memory-sharing points per unit of t (fig2).
    #[arg(long, default_value_t = 1)]
    steps: usize,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AuditMode {
    Exact,
    Empirical,
}

#[derive(Args)]
struct AuditArgs {
    /// `.pda` path or `catalog:NAME`.
    #[arg(long)]
    pda: String,
    #[arg(long)]
    servers: usize,
    #[arg(long)]
    files: usize,
    /// A demand vector such as `0,1,1`; give at least two.
    #[arg(long, required = true, value_delimiter = ';')]
    demands: Vec<String>,
    #[arg(long, value_enum, default_value = "exact")]
    mode: AuditMode,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    /// Histogram all users jointly when the domain is small enough.
    #[arg(long)]
    joint: bool,
    /// Audit the demand-leaking query builder instead of the scheme.
    #[arg(long)]
    mutant: bool,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: u64,
    /// Write the report as JSON.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

enum Failure {
    /// Invalid array, failed audit or failed regression.
    Domain(String),
    /// Usage or I/O.
    Usage(String),
}

impl Failure {
    fn usage(e: impl Display) -> Self {
        Failure::Usage(e.to_string())
    }

    fn domain(e: impl Display) -> Self {
        Failure::Domain(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

struct Out {
    quiet: bool,
}

impl Out {
    fn say(&self, line: impl Display) {
        if !self.quiet {
            println!("{line}");
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = Out { quiet: cli.quiet };
    let result = match cli.command {
        Command::Validate { path } => validate(&out, &path),
        Command::Construct(args) => construct(&out, args),
        Command::Simulate { plan, out_dir } => simulate(&out, &plan, &out_dir, cli.seed),
        Command::Analyze(args) => analyze(&out, args),
        Command::Audit(args) => audit(&out, args, cli.seed),
        Command::Regress { output } => regress(&out, output.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(msg)) => {
            eprintln!("mupir: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("mupir: {msg}");
            ExitCode::from(2)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Outcome {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Failure::usage(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn describe(pda: &Pda) -> String {
    match pda.regularity() {
        Some(g) => format!("{} PDA, {g}-regular", pda.params()),
        None => format!("{} PDA", pda.params()),
    }
}

fn validate(out: &Out, path: &Path) -> Outcome {
    let text = read(path)?;
    // a file that cannot be read as an array is an invalid array
    let array = PdaArray::parse(&text).map_err(Failure::domain)?;
    let report = array.validate();
    if report.valid {
        let pda = Pda::new(array).map_err(Failure::domain)?;
        out.say(format!("{}: valid {}", path.display(), describe(&pda)));
        return Ok(());
    }
    for v in &report.violations {
        out.say(v);
    }
    let mut conditions: Vec<String> = report
        .violations
        .iter()
        .map(|v| v.condition.to_string())
        .collect();
    conditions.dedup();
    Err(Failure::Domain(format!(
        "{}: not a PDA, {} violation(s) of {}",
        path.display(),
        report.violations.len(),
        conditions.join(", ")
    )))
}

fn construct(out: &Out, args: ConstructArgs) -> Outcome {
    let need = |v: Option<usize>, flag: &str| {
        v.ok_or_else(|| Failure::usage(format!("{} needs --{flag}", args.family)))
    };
    let pda = match args.family.as_str() {
        "man" => man_pda(ManParams {
            k: need(args.k, "k")?,
            t: need(args.t, "t")?,
        }),
        "single-user" => single_user_pda(need(args.f, "f")?, need(args.z, "z")?),
        "trivial" => Ok(trivial_pda()),
        other => match other.strip_prefix("catalog:") {
            Some(name) => catalog(name),
            None => return Err(Failure::usage(format!("unknown family `{other}`"))),
        },
    }
    .map_err(Failure::usage)?;
    match &args.output {
        Some(path) => {
            write(path, &pda.to_text())?;
            out.say(format!("{} -> {}", describe(&pda), path.display()));
        }
        None => print!("{}", pda.to_text()),
    }
    Ok(())
}

fn simulate(out: &Out, plan_path: &Path, out_dir: &Path, seed: u64) -> Outcome {
    let text = read(plan_path)?;
    let file: PlanFile = serde_json::from_str(&text)
        .map_err(|e| Failure::usage(format!("{}: {e}", plan_path.display())))?;
    let base = plan_path.parent().unwrap_or(Path::new("."));
    let plan = ExperimentPlan::from_file(file, base, seed).map_err(Failure::usage)?;
    let est = estimate_rate(&plan).map_err(Failure::domain)?;

    let transcripts = serde_json::to_string_pretty(&est.transcripts).expect("serializable");
    write(&out_dir.join("transcripts.json"), &transcripts)?;
    write(
        &out_dir.join("report.json"),
        &serde_json::to_string_pretty(&est).expect("serializable"),
    )?;
    write(&out_dir.join("report.csv"), &report_csv(&est))?;

    let c = &plan.config;
    out.say(format!(
        "{} on B={} N={} K={}, L={} bytes, seed {}",
        describe(c.pda()),
        c.servers(),
        c.files(),
        c.users(),
        c.file_len(),
        c.seed()
    ));
    out.say(format!(
        "{:<18}{:?} / {:?}, {} round(s)",
        "mode", est.mode, est.delivery, est.rounds
    ));
    out.say(format!(
        "{:<18}{} = {}",
        "rate",
        est.mean_exact,
        fmt_sig(est.mean)
    ));
    if let Some(hw) = est.half_width {
        out.say(format!("{:<18}± {}", "95% half-width", fmt_sig(hw)));
    }
    out.say(format!(
        "{:<18}{} = {}",
        "closed form",
        est.expected,
        fmt_sig(est.expected_value)
    ));
    out.say(format!(
        "{:<18}{}",
        "uncoded branch",
        mupir::analysis::fmt_rational(&est.metrics.uncoded_branch)
    ));
    if let Some(m) = est.matches_expected {
        out.say(format!(
            "{:<18}{}",
            "exact match",
            if m { "yes" } else { "NO" }
        ));
    }
    out.say(format!("{:<18}{} L", "download", est.mean_exact));
    out.say(format!(
        "{:<18}{}",
        "per server",
        est.per_server_exact.join("  ")
    ));
    out.say(format!(
        "{:<18}{}",
        "upload bits",
        fmt_sig(est.upload_bits_analytic)
    ));
    out.say(format!(
        "{:<18}{}",
        "subpacketization", est.subpacketization
    ));
    out.say(format!("{:<18}{}", "decode failures", est.decode_failures));

    let mut failed = Vec::new();
    if !est.all_decoded() {
        failed.push(format!("{} round(s) failed to decode", est.decode_failures));
    }
    if est.matches_expected == Some(false) {
        failed.push("exhaustive mean differs from the closed form".to_string());
    }
    let flags = &plan.audit;
    if flags.exact || flags.empirical_samples > 0 {
        let demands = if flags.demands.is_empty() {
            default_demands(c)
        } else {
            flags.demands.clone()
        };
        let mut reports = Vec::new();
        if flags.exact {
            reports.push(
                privacy_audit_exact_with(c, &demands, plan.cap, &PrivateQueries)
                    .map_err(Failure::domain)?,
            );
        }
        if flags.empirical_samples > 0 {
            reports.push(
                privacy_audit_empirical(
                    c,
                    &demands,
                    flags.empirical_samples,
                    &PrivateQueries,
                    false,
                )
                .map_err(Failure::domain)?,
            );
        }
        write(
            &out_dir.join("audit.json"),
            &serde_json::to_string_pretty(&reports).expect("serializable"),
        )?;
        for r in &reports {
            summarize_audit(out, r);
            if !r.passed {
                failed.push(format!("{:?} privacy audit flagged", r.method));
            }
        }
    }
    out.say(format!("reports written to {}", out_dir.display()));
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Domain(failed.join("; ")))
    }
}

fn report_csv(est: &RateEstimate) -> String {
    let opt = |x: Option<f64>| x.map(fmt_sig).unwrap_or_else(|| "NA".into());
    let mut rows = vec![
        ("mode", format!("{:?}", est.mode)),
        ("delivery", format!("{:?}", est.delivery)),
        ("rounds", est.rounds.to_string()),
        ("rate", fmt_sig(est.mean)),
        ("rate_exact", est.mean_exact.clone()),
        ("std_dev", opt(est.std_dev)),
        ("half_width", opt(est.half_width)),
        ("expected", est.expected.clone()),
        (
            "matches_expected",
            est.matches_expected.map_or("NA".into(), |m| m.to_string()),
        ),
        ("decode_failures", est.decode_failures.to_string()),
        ("upload_bits", fmt_sig(est.upload_bits_analytic)),
        ("subpacketization", est.subpacketization.clone()),
    ];
    let servers: Vec<(String, String)> = est
        .per_server_exact
        .iter()
        .enumerate()
        .map(|(b, r)| (format!("server_{b}_rate"), r.clone()))
        .collect();
    let mut csv = String::from("metric,value\n");
    for (k, v) in rows.drain(..) {
        csv.push_str(&format!("{k},{v}\n"));
    }
    for (k, v) in servers {
        csv.push_str(&format!("{k},{v}\n"));
    }
    csv
}

fn analyze(out: &Out, args: AnalyzeArgs) -> Outcome {
    let id: FigureId = args.id.parse().map_err(Failure::usage)?;
    let spec = FigureSpec {
        id,
        servers: args.servers,
        files: args.files,
        users: args.users,
        q: args.q,
        m: args.m,
        m_max: args.m_max,
        steps: args.steps,
    };
    let data = emit_figure_data(&spec).map_err(Failure::usage)?;
    match &args.output {
        Some(path) => {
            write(path, &data.to_csv())?;
            out.say(format!(
                "{id}: {} rows -> {}",
                data.rows.len(),
                path.display()
            ));
        }
        None => print!("{}", data.to_csv()),
    }
    Ok(())
}

fn parse_demands(raw: &[String], config: &SystemConfig) -> Result<Vec<Vec<usize>>, Failure> {
    let vectors = raw
        .iter()
        .map(|v| {
            v.split(',')
                .map(|x| x.trim().parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| Failure::usage(format!("demand vector `{v}`: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if vectors.len() < 2 {
        return Err(Failure::usage("give at least two demand vectors"));
    }
    if let Some(bad) = vectors.iter().find(|d| d.len() != config.users()) {
        return Err(Failure::usage(format!(
            "demand vector {bad:?} needs {} entries",
            config.users()
        )));
    }
    Ok(vectors)
}

fn audit(out: &Out, args: AuditArgs, seed: u64) -> Outcome {
    let pda = resolve_pda(&args.pda, Path::new(".")).map_err(Failure::usage)?;
    let config = SystemConfig::new(args.servers, args.files, pda.k(), 1, pda, seed)
        .map_err(Failure::usage)?;
    let demands = parse_demands(&args.demands, &config)?;
    let builder: &dyn QueryBuilder = if args.mutant {
        &LeakyQueries
    } else {
        &PrivateQueries
    };
    let report = match args.mode {
        AuditMode::Exact => privacy_audit_exact_with(&config, &demands, args.cap, builder),
        AuditMode::Empirical => {
            privacy_audit_empirical(&config, &demands, args.samples, builder, args.joint)
        }
    }
    .map_err(Failure::usage)?;
    if let Some(path) = &args.output {
        write(
            path,
            &serde_json::to_string_pretty(&report).expect("serializable"),
        )?;
    }
    summarize_audit(out, &report);
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Domain(
            "privacy audit flagged at least one server".into(),
        ))
    }
}

fn summarize_audit(out: &Out, r: &PrivacyReport) {
    out.say(format!(
        "{:?} audit ({:?}), {} demand vectors, {} samples",
        r.method,
        r.scope,
        r.demand_vectors.len(),
        r.samples
    ));
    for s in &r.servers {
        let detail = match (&s.tv_distance, s.p_value) {
            (Some(tv), _) => format!("TV={tv}"),
            (None, Some(p)) => format!(
                "chi2={} df={} p={} TV~{}",
                fmt_sig(s.chi_square.unwrap_or(f64::NAN)),
                s.df.unwrap_or(0),
                fmt_sig(p),
                fmt_sig(s.tv)
            ),
            _ => String::new(),
        };
        let flag = if s.flagged { "FLAGGED" } else { "ok" };
        out.say(format!("  server {}: {detail} {flag}", s.server));
    }
}

fn regress(out: &Out, output: Option<&Path>) -> Outcome {
    let ledger = regression_suite();
    for e in &ledger.entries {
        let mark = if e.passed { "PASS" } else { "FAIL" };
        out.say(format!("{mark}  {}: {}", e.name, e.observed));
        if !e.passed {
            out.say(format!("      expected {}", e.expected));
        }
    }
    if let Some(path) = output {
        let mut csv = String::from("name,passed,expected,observed\n");
        for e in &ledger.entries {
            csv.push_str(&format!(
                "{},{},{},{}\n",
                quote(&e.name),
                e.passed,
                quote(&e.expected),
                quote(&e.observed)
            ));
        }
        write(path, &csv)?;
    }
    let failed = ledger.failures().count();
    out.say(format!("{} checks, {failed} failed", ledger.entries.len()));
    let _ = std::io::stdout().flush();
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::Domain(format!(
            "{failed} regression check(s) failed"
        )))
    }
}

fn quote(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}
