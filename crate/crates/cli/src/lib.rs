//! The `meanscope` command line: corpus inspection, operator traces,
//! verdicts, chain reports and kernel tables. All numerics live in
//! `meanscope_core`; this crate parses arguments and renders reports.

pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use meanscope_core::{
    chain_report, corpus_csv, corpus_json, corpus_text, domains_of, eval_trace, export_plot_data,
    gamma_kernel_eval, grid, lookup, parse_method, parse_operator, trace_csv, trace_json,
    trace_text, verdict, verdict_csv, verdict_json, verdict_text, DomainTag, Error, PlotData,
};
use thiserror::Error as ThisError;

pub use config::{CliConfig, Format};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] Error),

    #[error("cannot write output: {0}")]
    Output(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => EXIT_NUMERICAL,
            _ => EXIT_USAGE,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "meanscope",
    version,
    about = "Summability verdicts for bounded functions on a half-line"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Plain-text `key = value` configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Report format (overrides the config file).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write the report here instead of stdout (overrides the config file).
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DomainArg {
    Additive,
    Multiplicative,
}

impl From<DomainArg> for DomainTag {
    fn from(d: DomainArg) -> Self {
        match d {
            DomainArg::Additive => DomainTag::Additive,
            DomainArg::Multiplicative => DomainTag::Multiplicative,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Inspect the function corpus.
    Corpus {
        #[command(subcommand)]
        action: CorpusAction,
    },
    /// Evaluate an averaging operator applied to a corpus function.
    Eval {
        #[arg(long = "fn", value_name = "LABEL")]
        function: String,
        /// window:θ, exp, cesaro or kernel:n.
        #[arg(long, value_name = "OP")]
        op: String,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long)]
        points: usize,
        /// Also write the trace as `x,value` CSV.
        #[arg(long, value_name = "PATH")]
        plot: Option<PathBuf>,
    },
    /// Decide whether a function is summable by one method.
    Verdict {
        #[arg(long = "fn", value_name = "LABEL")]
        function: String,
        #[arg(long, value_name = "NAME")]
        method: String,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Verdicts along a whole method chain, with consistency checks.
    Chain {
        #[arg(long = "fn", value_name = "LABEL")]
        function: String,
        #[arg(long)]
        kmax: u32,
        #[arg(long)]
        tol: Option<f64>,
        /// Domain for labels defined on both (default additive).
        #[arg(long, value_enum)]
        domain: Option<DomainArg>,
        /// Also write the tower as `k,upper,lower` CSV.
        #[arg(long, value_name = "PATH")]
        plot: Option<PathBuf>,
    },
    /// Tabulate the gamma kernel h^n.
    Kernel {
        #[arg(long)]
        n: u32,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long)]
        points: usize,
    },
}

#[derive(Debug, Subcommand)]
enum CorpusAction {
    /// Every label with its domain, bound and known values.
    List,
}

/// Runs the command line and returns the process exit code. Reports go to
/// `stdout` (or `--out`), diagnostics to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(stderr, "{e}")
            } else {
                write!(stdout, "{e}")
            };
            return code;
        }
    };
    match execute(cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let mut cfg = match &cli.global.config {
        Some(path) => CliConfig::load(path)?,
        None => CliConfig::default(),
    };
    if let Some(f) = cli.global.format {
        cfg.format = f;
    }
    if let Some(out) = cli.global.out {
        cfg.out = Some(out);
    }
    let report = render(cli.command, &mut cfg)?;
    match &cfg.out {
        Some(path) => meanscope_core::report::write_file(path, &report)?,
        None => stdout.write_all(report.as_bytes())?,
    }
    Ok(())
}

fn render(command: Command, cfg: &mut CliConfig) -> Result<String, CliError> {
    let format = cfg.format;
    Ok(match command {
        Command::Corpus {
            action: CorpusAction::List,
        } => match format {
            Format::Json => corpus_json(),
            Format::Csv => corpus_csv(),
            Format::Text => corpus_text(),
        },
        Command::Eval {
            function,
            op,
            from,
            to,
            points,
            plot,
        } => {
            let (kind, k) = parse_operator(&op)?;
            let f = lookup(&function, Some(kind.domain()))?.function;
            let trace = eval_trace(&f, kind, k, from, to, points, &cfg.analysis.quadrature)?;
            write_plot(plot.as_deref(), &PlotData::Trace(&trace))?;
            render_trace(format, &function, &op, &trace)
        }
        Command::Verdict {
            function,
            method,
            tol,
        } => {
            let method = parse_method(&method)?;
            let f = lookup(&function, Some(method.domain()))?.function;
            let v = verdict(&f, method, tol.unwrap_or(cfg.tol), &cfg.analysis)?;
            match format {
                Format::Json => verdict_json(&function, &v),
                Format::Csv => verdict_csv(&function, &v),
                Format::Text => verdict_text(&function, &v),
            }
        }
        Command::Chain {
            function,
            kmax,
            tol,
            domain,
            plot,
        } => {
            let domain = chain_domain(&function, domain)?;
            let f = lookup(&function, Some(domain))?.function;
            let report = chain_report(&f, kmax, tol.unwrap_or(cfg.tol), &cfg.analysis)?;
            write_plot(plot.as_deref(), &PlotData::Tower(&report))?;
            match format {
                Format::Json => report.to_json(),
                Format::Csv => report.to_csv(),
                Format::Text => report.to_text(),
            }
        }
        Command::Kernel {
            n,
            from,
            to,
            points,
        } => {
            let trace = grid(from, to, points)?
                .into_iter()
                .map(|x| Ok((x, gamma_kernel_eval(n, x)?)))
                .collect::<Result<Vec<_>, Error>>()?;
            render_trace(format, &format!("h^{n}"), "kernel", &trace)
        }
    })
}

fn render_trace(format: Format, function: &str, op: &str, trace: &[(f64, f64)]) -> String {
    match format {
        Format::Json => trace_json(function, op, trace),
        Format::Csv => trace_csv(trace),
        Format::Text => trace_text(trace),
    }
}

fn write_plot(path: Option<&Path>, data: &PlotData<'_>) -> Result<(), CliError> {
    if let Some(p) = path {
        export_plot_data(data, p)?;
    }
    Ok(())
}

/// A label on one domain uses it; a label on both (the constants) uses
/// `requested`, defaulting to additive.
fn chain_domain(label: &str, requested: Option<DomainArg>) -> Result<DomainTag, CliError> {
    let available = domains_of(label);
    match (requested.map(DomainTag::from), available.as_slice()) {
        (_, []) => Err(Error::UnknownLabel(label.to_string()).into()),
        (Some(d), _) => Ok(d),
        (None, [only]) => Ok(*only),
        (None, _) => Ok(DomainTag::Additive),
    }
}
