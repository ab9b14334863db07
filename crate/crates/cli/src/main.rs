//! `qsys`: exact Q-system solving, series evaluation and verification.
//!
//! Exit codes: 0 success, 1 gating verification failure, 2 malformed
//! input or configuration, 3 solver precondition failure.

use std::fs;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;

use qsys_core::combinat::{
    coeff_table, series_k, series_k_specialized, series_r, series_r_specialized,
    BinomialConvention,
};
use qsys_core::json::{
    coeff_table_to_json, family_to_json, multiplicities_to_json, parse_nu, report_to_json,
    series_to_json, spec_from_json, JsonError,
};
use qsys_core::kr::{kr_multiplicities, run_suite, KrError};
use qsys_core::liedata::{algebra, denominator_identity_check, DenominatorIdentity, LieError};
use qsys_core::qsolve::{solve, QsolveError, QSystemSpec};

const DEFAULT_MAX_CUTOFF: u32 = 16;

#[derive(Parser)]
#[command(name = "qsys", version, about = "Exact Q-system solver and identity verifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SeriesKind {
    K,
    R,
}

#[derive(Clone, Copy, ValueEnum)]
enum Convention {
    Type1,
    Type2,
}

impl From<Convention> for BinomialConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::Type1 => BinomialConvention::TypeI,
            Convention::Type2 => BinomialConvention::TypeII,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum IdentityArg {
    All,
    CnBn,
    BnDn,
    CnDn,
}

#[derive(Parser)]
struct InputArgs {
    /// Algebra selector such as A1, B3, A4^2, D4^3
    #[arg(long, conflicts_with = "spec")]
    algebra: Option<String>,
    /// Path to a Q-system spec file (JSON)
    #[arg(long)]
    spec: Option<String>,
}

#[derive(Parser)]
struct OutputArgs {
    /// Write JSON here instead of stdout
    #[arg(long)]
    out: Option<String>,
    /// Pretty-print the JSON
    #[arg(long)]
    pretty: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a Q-system for its unique or canonical solution
    Solve {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        cutoff: u32,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Evaluate the K- or R-series directly from the closed-form coefficients
    Series {
        #[arg(value_enum)]
        which: SeriesKind,
        #[command(flatten)]
        input: InputArgs,
        /// ν as comma-separated `(a,m):value` or `i:value` pairs
        #[arg(long, default_value = "")]
        nu: String,
        #[arg(long)]
        cutoff: u32,
        /// Emit one row per exponent with both K and R coefficients
        #[arg(long)]
        table: bool,
        #[arg(long, value_enum, default_value = "type1")]
        convention: Convention,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the verification suite for an algebra
    Verify {
        #[arg(long)]
        algebra: String,
        #[arg(long)]
        cutoff: u32,
        /// Seed for the randomized power-series samples
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Decompose a tensor product of KR modules into dominant multiplicities
    Decompose {
        #[arg(long)]
        algebra: String,
        #[arg(long, default_value = "")]
        nu: String,
        #[arg(long)]
        cutoff: u32,
        #[arg(long, value_enum, default_value = "type1")]
        convention: Convention,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Check the classical Weyl-denominator identities exactly
    Identities {
        #[arg(long, value_enum, default_value = "all")]
        which: IdentityArg,
        /// Rank to check
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
}

enum CliError {
    /// malformed input or configuration → exit 2
    Usage(String),
    /// solver precondition failure → exit 3
    Precondition(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Precondition(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Precondition(m) => m,
        }
    }
}

impl From<QsolveError> for CliError {
    fn from(e: QsolveError) -> Self {
        match e {
            QsolveError::SingularD
            | QsolveError::WindowTooSmall { .. }
            | QsolveError::UnsupportedDShape
            | QsolveError::KindMismatch
            | QsolveError::InsufficientIndexRange(_) => CliError::Precondition(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<LieError> for CliError {
    fn from(e: LieError) -> Self {
        match e {
            LieError::BadSelector(_) | LieError::RankTooSmall(_) => CliError::Usage(e.to_string()),
            _ => CliError::Precondition(e.to_string()),
        }
    }
}

impl From<KrError> for CliError {
    fn from(e: KrError) -> Self {
        match e {
            KrError::Qsolve(q) => q.into(),
            KrError::Lie(l) => l.into(),
            KrError::Series(s) => CliError::Usage(s.to_string()),
            _ => CliError::Precondition(e.to_string()),
        }
    }
}

impl From<JsonError> for CliError {
    fn from(e: JsonError) -> Self {
        match e {
            JsonError::Qsolve(q) => q.into(),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

fn max_cutoff() -> u32 {
    std::env::var("QSYS_MAX_CUTOFF")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_MAX_CUTOFF)
}

fn check_cutoff(cutoff: u32) -> Result<(), CliError> {
    if cutoff < 1 {
        return Err(CliError::Usage("cutoff must be at least 1".into()));
    }
    let cap = max_cutoff();
    if cutoff > cap {
        return Err(CliError::Usage(format!(
            "cutoff {cutoff} exceeds the safety cap {cap} (set QSYS_MAX_CUTOFF to raise it)"
        )));
    }
    Ok(())
}

fn load_spec(input: &InputArgs, cutoff: u32) -> Result<Arc<QSystemSpec>, CliError> {
    match (&input.algebra, &input.spec) {
        (Some(sel), None) => {
            let alg = algebra(sel)?;
            Ok(Arc::new(alg.kr_matrices(cutoff.max(1) as usize)))
        }
        (None, Some(path)) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {path}: {e}")))?;
            let value: Value = serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("invalid JSON in {path}: {e}")))?;
            Ok(Arc::new(spec_from_json(&value)?))
        }
        _ => Err(CliError::Usage(
            "exactly one of --algebra or --spec is required".into(),
        )),
    }
}

fn emit(value: &Value, output: &OutputArgs) -> Result<(), CliError> {
    let mut text = if output.pretty {
        serde_json::to_string_pretty(value).expect("serializable")
    } else {
        serde_json::to_string(value).expect("serializable")
    };
    text.push('\n');
    match &output.out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Usage(format!("cannot write {path}: {e}"))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Solve { input, cutoff, output } => {
            check_cutoff(cutoff)?;
            let spec = load_spec(&input, cutoff)?;
            let sol = solve(&spec, cutoff)?;
            emit(&family_to_json(&sol), &output)?;
            Ok(0)
        }
        Command::Series {
            which,
            input,
            nu,
            cutoff,
            table,
            convention,
            output,
        } => {
            check_cutoff(cutoff)?;
            let spec = load_spec(&input, cutoff)?;
            let nu = parse_nu(&nu, &spec)?;
            let convention = convention.into();
            let value = if table {
                let rows = coeff_table(&spec, &nu, cutoff, convention)?;
                coeff_table_to_json(&spec, &rows)
            } else {
                let specialized = spec.kind == qsys_core::SystemKind::Specialized;
                let series = match (which, specialized) {
                    (SeriesKind::K, true) => series_k_specialized(&spec, &nu, cutoff, convention)?,
                    (SeriesKind::R, true) => series_r_specialized(&spec, &nu, cutoff, convention)?,
                    (SeriesKind::K, false) => series_k(&spec, &nu, cutoff, convention)?,
                    (SeriesKind::R, false) => series_r(&spec, &nu, cutoff, convention)?,
                };
                series_to_json(&series)
            };
            emit(&value, &output)?;
            Ok(0)
        }
        Command::Verify {
            algebra: sel,
            cutoff,
            seed,
            output,
        } => {
            check_cutoff(cutoff)?;
            let alg = algebra(&sel)?;
            let report = run_suite(&alg, cutoff, seed)?;
            emit(&report_to_json(&report), &output)?;
            Ok(if report.gating_ok() { 0 } else { 1 })
        }
        Command::Decompose {
            algebra: sel,
            nu,
            cutoff,
            convention,
            output,
        } => {
            check_cutoff(cutoff)?;
            let alg = algebra(&sel)?;
            let spec = alg.kr_matrices(cutoff.max(1) as usize);
            let nu = parse_nu(&nu, &spec)?;
            let rows = kr_multiplicities(&alg, &nu, cutoff, convention.into())?;
            emit(&multiplicities_to_json(&rows), &output)?;
            Ok(0)
        }
        Command::Identities { which, n, output } => {
            let identities: Vec<DenominatorIdentity> = match which {
                IdentityArg::All => vec![
                    DenominatorIdentity::CnViaBn,
                    DenominatorIdentity::BnViaDn,
                    DenominatorIdentity::CnViaDn,
                ],
                IdentityArg::CnBn => vec![DenominatorIdentity::CnViaBn],
                IdentityArg::BnDn => vec![DenominatorIdentity::BnViaDn],
                IdentityArg::CnDn => vec![DenominatorIdentity::CnViaDn],
            };
            let mut all_pass = true;
            let mut rows = Vec::new();
            for id in identities {
                let ok = denominator_identity_check(id, n)?;
                all_pass &= ok;
                rows.push(serde_json::json!({
                    "identity": id.as_str(),
                    "n": n,
                    "status": if ok { "pass" } else { "fail" },
                }));
            }
            emit(&Value::Array(rows), &output)?;
            Ok(if all_pass { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
