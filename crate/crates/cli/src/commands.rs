//! Subcommands and the exit-code contract.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use nnrank_core::bounds::{
    extract_pattern, rank_bracket, rectangle_cover_lower_bound, BoundsError, CoverOutcome, DEFAULT_NODE_BUDGET,
};
use nnrank_core::construction::{AnyBundle, Bundle, ConstructionError, SurrogateSpec};
use nnrank_core::nmf::{nmf_run, upper_bound_probe, NmfAlgorithm, NmfConfig, NmfError, RestartSummary, DEFAULT_THRESHOLD};
use nnrank_core::scalar::{Matrix, Rational};
use nnrank_core::verify::{full_verify, MinorSelection, Verdict, VerifyOptions, DEFAULT_MAX_PRECISION_BITS};

use crate::bundle::{self, LoadError, REPORT_FILE};
use crate::format::FormatError;
use crate::report::{bracket_dto, bracket_line, cover_from_dto, nmf_dto, CurvePoint, NmfDto, ReportFile};
use crate::StdClock;

pub mod exit {
    pub const OK: u8 = 0;
    pub const FALSIFIED: u8 = 1;
    pub const INCONCLUSIVE: u8 = 2;
    pub const PRECISION_EXHAUSTED: u8 = 3;
    pub const REFUSED: u8 = 4;
    pub const USAGE: u8 = 64;
    pub const DATA: u8 = 65;
    pub const NO_INPUT: u8 = 66;
}

pub fn verdict_exit(v: Verdict) -> u8 {
    match v {
        Verdict::Certified => exit::OK,
        Verdict::Falsified => exit::FALSIFIED,
        Verdict::Inconclusive => exit::INCONCLUSIVE,
    }
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        CliError { code, message: message.into() }
    }

    fn usage(message: impl Into<String>) -> Self {
        CliError::new(exit::USAGE, message)
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::new(exit::NO_INPUT, format!("{}: {e}", path.display()))
    }
}

impl From<LoadError> for CliError {
    fn from(e: LoadError) -> Self {
        let code = match e {
            LoadError::Missing { .. } => exit::NO_INPUT,
            LoadError::Format { .. } => exit::DATA,
        };
        CliError::new(code, e.to_string())
    }
}

type CmdResult = Result<u8, CliError>;

#[derive(Debug, Parser)]
#[command(name = "nnrank", version, about = "Construct, certify and bracket the nonnegative rank of the rank-three family")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build Λ, B and A for a given k and write them as a bundle directory.
    Construct(ConstructArgs),
    /// Check every claim about a bundle and write report.json.
    Verify(VerifyArgs),
    /// Bracket the nonnegative rank of a verified bundle.
    Bounds(BoundsArgs),
    /// Numerical nonnegative factorizations for an upper bound.
    Nmf(NmfArgs),
    /// Print a stored report.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Paper,
    Surrogate,
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    /// First chain value as p/q, paper mode only.
    #[arg(long, default_value = "1/10")]
    pub h1: String,
    /// `default`, `pow:B` or `list:p/q,p/q,...`, surrogate mode only.
    #[arg(long)]
    pub surrogate_spec: Option<String>,
    #[arg(long, default_value_t = 4096)]
    pub precision_bits: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Bundle directory.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Check every principal 3×3 minor regardless of size.
    #[arg(long, conflicts_with = "sample_minors")]
    pub exhaustive_minors: bool,
    /// Check a seeded sample of this many principal minors.
    #[arg(long)]
    pub sample_minors: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_MAX_PRECISION_BITS)]
    pub max_precision_bits: u64,
    #[arg(long, default_value_t = 0x5eed)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Solve the rectangle cover of the certified zero pattern exactly (2k ≤ 20).
    #[arg(long)]
    pub rectangle_exact: bool,
    /// Node budget for the exact rectangle cover.
    #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
    pub budget: u64,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("ranks").required(true).args(["rank", "sweep"])))]
pub struct NmfArgs {
    /// Bundle directory or a single matrix file.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub rank: Option<usize>,
    /// Try every rank from 1 to this value.
    #[arg(long)]
    pub sweep: Option<usize>,
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5000)]
    pub iterations: usize,
    /// `hals` or `mu`.
    #[arg(long, default_value = "hals")]
    pub algorithm: String,
    /// Residual at or below which a rank counts as reached.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
    /// Stop a restart early once its residual drops this low.
    #[arg(long, default_value_t = 1e-10)]
    pub target: f64,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Text,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    pub format: ReportFormat,
}

pub fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Construct(a) => construct(&a),
        Command::Verify(a) => verify(&a),
        Command::Bounds(a) => bounds(&a),
        Command::Nmf(a) => nmf(&a),
        Command::Report(a) => report(&a),
    }
}

fn construction_error(e: ConstructionError) -> CliError {
    let code = match e {
        ConstructionError::InvalidK(_) | ConstructionError::InvalidH1(_) | ConstructionError::Validation(_) => exit::USAGE,
        ConstructionError::PrecisionExhausted { .. } => exit::PRECISION_EXHAUSTED,
        ConstructionError::Shape(_) | ConstructionError::Scalar(_) => exit::DATA,
    };
    CliError::new(code, e.to_string())
}

pub fn construct(a: &ConstructArgs) -> CmdResult {
    if a.k == 0 {
        return Err(CliError::usage("--k must be at least 1"));
    }
    let bundle: AnyBundle = match a.mode {
        ModeArg::Surrogate => {
            let spec = match &a.surrogate_spec {
                Some(s) => s.parse::<SurrogateSpec>().map_err(|e| CliError::usage(e.to_string()))?,
                None => SurrogateSpec::default(),
            };
            Bundle::surrogate(a.k, &spec).map_err(construction_error)?.into()
        }
        ModeArg::Paper => {
            if a.precision_bits < 2 {
                return Err(CliError::usage("--precision-bits must be at least 2"));
            }
            let h1: Rational = a.h1.parse().map_err(|e| CliError::usage(format!("--h1: {e}")))?;
            Bundle::paper(a.k, &h1, a.precision_bits).map_err(construction_error)?.into()
        }
    };
    let files = bundle::bundle_to_files(&bundle);
    let digest = bundle::write_bundle(&a.out, &files).map_err(|e| CliError::io(&a.out, e))?;
    let n = 2 * a.k;
    let detail = match &bundle {
        AnyBundle::Exact(_) => format!("surrogate ({})", files.b.meta.surrogate_spec.as_deref().unwrap_or("")),
        AnyBundle::Interval(b) => {
            let last = b.chain.values().last().expect("k >= 1");
            let exp = match last.top_exponent().map(|e| e.to_string()) {
                Some(e) if e.len() > 24 => format!("-({}-digit number)", e.len() - 1),
                Some(e) => e,
                None => "-inf".into(),
            };
            format!("paper h1={} at {} bits, h_{} ≈ 2^{exp}", a.h1, a.precision_bits, a.k)
        }
    };
    println!("A {n}x{n}, B {n}x3, {detail}, digest {digest}");
    Ok(exit::OK)
}

pub fn verify(a: &VerifyArgs) -> CmdResult {
    let (bundle, digest) = bundle::read_bundle(&a.input)?;
    let minors = if a.exhaustive_minors {
        MinorSelection::Exhaustive
    } else if let Some(count) = a.sample_minors {
        MinorSelection::Sampled { count }
    } else {
        MinorSelection::Auto
    };
    let opts = VerifyOptions { minors, max_precision_bits: a.max_precision_bits, seed: a.seed, ..Default::default() };
    let clock = StdClock::start();
    let core = full_verify(&bundle, &opts, &clock);
    let file = ReportFile::from_report(&core, &digest, nnrank_core::verify::Clock::now_micros(&clock));
    save_report(&a.input, &file)?;
    print!("{}", file.render_text());
    Ok(verdict_exit(core.overall))
}

fn save_report(dir: &Path, r: &ReportFile) -> Result<(), CliError> {
    let path = dir.join(REPORT_FILE);
    bundle::write_atomic(&path, &r.canonical_bytes()).map_err(|e| CliError::io(&path, e))
}

fn load_report(dir: &Path) -> Result<Option<ReportFile>, CliError> {
    let path = dir.join(REPORT_FILE);
    match std::fs::read(&path) {
        Ok(bytes) => ReportFile::parse(&bytes)
            .map(Some)
            .map_err(|e| CliError::new(exit::DATA, format!("{}: {e}", path.display()))),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(CliError::io(&path, e)),
    }
}

fn bounds_error(e: BoundsError) -> CliError {
    let code = match e {
        BoundsError::Inconsistent { .. } => exit::FALSIFIED,
        BoundsError::PatternNotCertified(_) | BoundsError::NotCertified(_) => exit::REFUSED,
        BoundsError::InvalidK | BoundsError::TooLarge { .. } => exit::USAGE,
        BoundsError::OutOfBounds { .. } => exit::DATA,
    };
    CliError::new(code, e.to_string())
}

fn nmf_upper(n: &NmfDto) -> Option<(usize, f64)> {
    let r = n.threshold_rank?;
    n.curve.iter().find(|p| p.r == r).map(|p| (r, p.best_residual))
}

/// Recomputes the bracket from the report's own verdicts, keeping any
/// stored rectangle cover and NMF result.
fn rebracket(file: &mut ReportFile, cover: Option<&CoverOutcome>) -> Result<(), CliError> {
    let core = file.to_certificate_report().map_err(|e| CliError::new(exit::DATA, e.to_string()))?;
    let stored = file.rank_bracket.as_ref().and_then(|b| b.rectangle.as_ref()).map(cover_from_dto);
    let cover = cover.or(stored.as_ref());
    let b = rank_bracket(&core, cover, file.nmf.as_ref().and_then(nmf_upper)).map_err(bounds_error)?;
    file.rank_bracket = Some(bracket_dto(&b, cover));
    Ok(())
}

pub fn bounds(a: &BoundsArgs) -> CmdResult {
    let (bundle, digest) = bundle::read_bundle(&a.input)?;
    let k = bundle.k();
    if a.rectangle_exact && 2 * k > 20 {
        return Err(CliError::usage(format!("--rectangle-exact needs 2k <= 20 (2k = {})", 2 * k)));
    }
    let Some(mut file) = load_report(&a.input)? else {
        return Err(CliError::new(exit::REFUSED, "no report.json: run `verify` first"));
    };
    if file.bundle_digest != digest {
        return Err(CliError::new(exit::REFUSED, "report.json belongs to a different bundle: run `verify` again"));
    }
    let core = file.to_certificate_report().map_err(|e| CliError::new(exit::DATA, e.to_string()))?;
    if core.overall != Verdict::Certified {
        return Err(CliError::new(exit::REFUSED, format!("bundle is not certified (overall {})", core.overall.as_str())));
    }
    let cover = if a.rectangle_exact {
        let pattern = match &bundle {
            AnyBundle::Exact(b) => extract_pattern(&b.a, &core),
            AnyBundle::Interval(b) => extract_pattern(&b.a, &core),
        }
        .map_err(bounds_error)?;
        Some(rectangle_cover_lower_bound(&pattern, a.budget).map_err(bounds_error)?)
    } else {
        None
    };
    rebracket(&mut file, cover.as_ref())?;
    save_report(&a.input, &file)?;
    let b = file.rank_bracket.as_ref().expect("just computed");
    println!("{}", bracket_line(b));
    if let Some(r) = &b.rectangle {
        println!("rectangle cover: {} ({}, {} nodes)", if r.status == "exact" { r.lower.to_string() } else { format!("[{}, {}]", r.lower, r.upper) }, r.status, r.nodes);
    }
    Ok(exit::OK)
}

fn nmf_error(e: NmfError) -> CliError {
    let code = match e {
        NmfError::InvalidRank(_) | NmfError::UnknownAlgorithm(_) => exit::USAGE,
        _ => exit::DATA,
    };
    CliError::new(code, e.to_string())
}

fn load_target(path: &Path) -> Result<(Matrix<f64>, Option<String>), CliError> {
    if path.is_dir() {
        let (b, digest) = bundle::read_bundle(path)?;
        Ok((b.a_to_f64(), Some(digest)))
    } else {
        let f = bundle::read_matrix_file(path)?;
        let m = f.to_f64().map_err(|e: FormatError| CliError::new(exit::DATA, format!("{}: {e}", path.display())))?;
        Ok((m, None))
    }
}

fn write_csv(path: &Path, rows: &[(usize, &RestartSummary)]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::new(exit::DATA, e.to_string());
    w.write_record(["r", "restart", "iterations", "residual"]).map_err(fail)?;
    for (r, s) in rows {
        let restart = if s.warm { "warm".to_string() } else { s.restart.to_string() };
        w.write_record([r.to_string(), restart, s.iterations.to_string(), format!("{:e}", s.residual)]).map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::new(exit::DATA, e.to_string()))?;
    bundle::write_atomic(path, &bytes).map_err(|e| CliError::io(path, e))
}

pub fn nmf(a: &NmfArgs) -> CmdResult {
    let algorithm: NmfAlgorithm = a.algorithm.parse().map_err(nmf_error)?;
    if a.rank == Some(0) || a.sweep == Some(0) || a.restarts == 0 {
        return Err(CliError::usage("ranks and --restarts must be at least 1"));
    }
    let (m, digest) = load_target(&a.input)?;
    let template = NmfConfig {
        rank: 1,
        max_iterations: a.iterations,
        restarts: a.restarts,
        seed: a.seed,
        algorithm,
        tolerance: 0.0,
        target: a.target,
    };
    let (dto, rows): (NmfDto, Vec<(usize, RestartSummary)>) = if let Some(r) = a.rank {
        let res = nmf_run(&m, &NmfConfig { rank: r, ..template.clone() }).map_err(nmf_error)?;
        println!("r={r}: best residual {:e} over {} restarts ({} non-finite)", res.best.residual, a.restarts, res.non_finite);
        let dto = NmfDto {
            algorithm: algorithm.as_str().into(),
            seed: a.seed,
            restarts: a.restarts,
            max_iterations: a.iterations,
            threshold: a.threshold,
            curve: vec![CurvePoint { r, best_residual: res.best.residual }],
            threshold_rank: (res.best.residual <= a.threshold).then_some(r),
        };
        (dto, res.restarts.into_iter().map(|s| (r, s)).collect())
    } else {
        let r_max = a.sweep.expect("clap requires --rank or --sweep");
        let probe = upper_bound_probe(&m, r_max, &template, a.threshold).map_err(nmf_error)?;
        for p in &probe.curve {
            println!("r={}: best residual {:e}", p.r, p.best_residual);
        }
        match probe.threshold_rank {
            Some(r) => println!("smallest r with residual <= {:e}: {r}", a.threshold),
            None => println!("no r <= {r_max} reached residual {:e}", a.threshold),
        }
        let rows = probe.curve.iter().flat_map(|p| p.restarts.iter().map(move |s| (p.r, *s))).collect();
        (nmf_dto(&probe, algorithm.as_str(), a.seed, a.restarts, a.iterations), rows)
    };
    if let Some(path) = &a.csv {
        let refs: Vec<(usize, &RestartSummary)> = rows.iter().map(|(r, s)| (*r, s)).collect();
        write_csv(path, &refs)?;
    }
    let Some(digest) = digest else { return Ok(exit::OK) };
    let Some(mut file) = load_report(&a.input)? else { return Ok(exit::OK) };
    if file.bundle_digest != digest {
        eprintln!("warning: report.json belongs to a different bundle; not updated");
        return Ok(exit::OK);
    }
    file.nmf = Some(dto);
    let code = if file.overall == Verdict::Certified.as_str() {
        match rebracket(&mut file, None) {
            Ok(()) => {
                println!("{}", bracket_line(file.rank_bracket.as_ref().expect("just computed")));
                exit::OK
            }
            Err(e) if e.code == exit::FALSIFIED => {
                eprintln!("error: {}", e.message);
                exit::FALSIFIED
            }
            Err(e) => return Err(e),
        }
    } else {
        exit::OK
    };
    save_report(&a.input, &file)?;
    Ok(code)
}

pub fn report(a: &ReportArgs) -> CmdResult {
    let Some(file) = load_report(&a.input)? else {
        return Err(CliError::new(exit::NO_INPUT, format!("{}: no report.json", a.input.display())));
    };
    let mut out = std::io::stdout().lock();
    let res = match a.format {
        ReportFormat::Json => out.write_all(&file.canonical_bytes()),
        ReportFormat::Text => out.write_all(file.render_text().as_bytes()),
    };
    res.map_err(|e| CliError::new(exit::DATA, e.to_string()))?;
    Ok(exit::OK)
}
