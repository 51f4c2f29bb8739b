//! `chaintrends` — subcommand pipeline over the analysis library: monthly
//! transaction aggregation, trends-window stitching, log returns,
//! descriptive summaries, lagged cross-correlation and SVG charts.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data or validation
//! errors. Diagnostics go to stderr; data goes only to `--out`-style paths
//! or stdout.

mod cmd;
mod pathglob;

use std::num::NonZeroUsize;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "chaintrends", version, about = "Blockchain and search-trends analysis pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Aggregate transaction export shards into monthly statistics
    Aggregate {
        /// Shard file or glob pattern (quote globs so the shell passes them through)
        #[arg(long)]
        input: Option<String>,
        /// Comma-separated shard files
        #[arg(long)]
        inputs: Option<String>,
        /// Worker threads (default: machine parallelism)
        #[arg(long)]
        workers: Option<NonZeroUsize>,
        /// Malformed-row policy for the transaction files
        #[arg(long, value_enum, default_value_t = PolicyArg::Skip)]
        policy: PolicyArg,
        /// Output CSV path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stitch overlapping trends windows into one continuous daily series
    Stitch {
        /// Trends window CSV (`window_id,date,value`)
        #[arg(long)]
        input: PathBuf,
        /// Minimum overlap between consecutive windows, in days
        #[arg(long, default_value = "30")]
        min_overlap: NonZeroUsize,
        /// Output CSV path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Percent log returns of a daily price series
    Returns {
        /// Price CSV (`date,close`)
        #[arg(long)]
        input: PathBuf,
        /// Output CSV path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Descriptive summary (mean/std/min/quartiles/max) of series files
    Describe {
        /// Single series CSV
        #[arg(long)]
        input: Option<PathBuf>,
        /// Comma-separated series CSVs, one summary column each
        #[arg(long)]
        inputs: Option<String>,
        /// Output CSV path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lagged cross-correlation: pairwise matrix or a single pair's curve
    Xcorr {
        /// Comma-separated series CSVs
        #[arg(long)]
        inputs: String,
        /// Largest lag searched, in days
        #[arg(long, default_value = "60")]
        max_lag: usize,
        /// matrix: max-correlation matrix; curve: lag curve of the first pair
        #[arg(long, value_enum, default_value_t = XcorrKind::Matrix)]
        kind: XcorrKind,
        /// Output CSV path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Companion CSV of lag-at-max values (matrix kind only)
        #[arg(long)]
        lags_out: Option<PathBuf>,
    },
    /// Render an SVG chart
    Render {
        /// Chart kind
        #[arg(long, value_enum, default_value_t = RenderKind::Lines)]
        kind: RenderKind,
        /// Comma-separated series CSVs (lines kind)
        #[arg(long)]
        inputs: Option<String>,
        /// Single input: matrix CSV for heatmap, series CSV for histogram
        #[arg(long)]
        input: Option<PathBuf>,
        /// Histogram bin count
        #[arg(long, default_value = "50")]
        bins: NonZeroUsize,
        /// Chart title
        #[arg(long, default_value = "")]
        title: String,
        /// Output SVG path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Skip,
    Abort,
}

impl From<PolicyArg> for chaintrends_core::MalformedPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Skip => chaintrends_core::MalformedPolicy::Skip,
            PolicyArg::Abort => chaintrends_core::MalformedPolicy::Abort,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum XcorrKind {
    Matrix,
    Curve,
}

#[derive(Clone, Copy, ValueEnum)]
enum RenderKind {
    Lines,
    Heatmap,
    Histogram,
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err:#}");
            2
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Aggregate {
            input,
            inputs,
            workers,
            policy,
            out,
        } => cmd::aggregate(input.as_deref(), inputs.as_deref(), workers, policy.into(), out.as_deref()),
        Command::Stitch {
            input,
            min_overlap,
            out,
        } => cmd::stitch(&input, min_overlap.get(), out.as_deref()),
        Command::Returns { input, out } => cmd::returns(&input, out.as_deref()),
        Command::Describe { input, inputs, out } => {
            cmd::describe(input.as_deref(), inputs.as_deref(), out.as_deref())
        }
        Command::Xcorr {
            inputs,
            max_lag,
            kind,
            out,
            lags_out,
        } => match kind {
            XcorrKind::Matrix => cmd::xcorr_matrix(&inputs, max_lag, out.as_deref(), lags_out.as_deref()),
            XcorrKind::Curve => cmd::xcorr_curve(&inputs, max_lag, out.as_deref(), lags_out.as_deref()),
        },
        Command::Render {
            kind,
            inputs,
            input,
            bins,
            title,
            out,
        } => match kind {
            RenderKind::Lines => cmd::render_lines(inputs.as_deref(), input.as_deref(), &title, out.as_deref()),
            RenderKind::Heatmap => cmd::render_heatmap(input.as_deref(), &title, out.as_deref()),
            RenderKind::Histogram => {
                cmd::render_histogram(input.as_deref(), bins.get(), &title, out.as_deref())
            }
        },
    }
}
