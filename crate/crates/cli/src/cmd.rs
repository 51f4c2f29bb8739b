//! Subcommand implementations: thin file-handling wrappers around the
//! library. Every function is a pure mapping from (input files, flags) to
//! output bytes, so repeated runs are byte-identical.

use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chaintrends_core::{aggregate, ingest, render, stats, trends, xcorr};
use chaintrends_core::{DailySeries, MalformedPolicy, XCorrMatrix};

use crate::pathglob;

pub fn aggregate(
    input: Option<&str>,
    inputs: Option<&str>,
    workers: Option<NonZeroUsize>,
    policy: MalformedPolicy,
    out: Option<&Path>,
) -> Result<()> {
    let shards = collect_shards(input, inputs)?;
    let workers = workers.unwrap_or_else(default_workers);
    let (rows, report) = aggregate::run_parallel(&shards, workers, policy)?;
    eprintln!(
        "aggregated {} row(s) into {} month(s) from {} shard(s), {} rejected",
        report.rows_ok,
        rows.len(),
        shards.len(),
        report.rows_rejected
    );
    for (line, reason) in &report.first_errors {
        eprintln!("  rejected line {line}: {reason}");
    }
    write_output(out, &aggregate::monthly_csv(&rows))
}

pub fn stitch(input: &Path, min_overlap: usize, out: Option<&Path>) -> Result<()> {
    let windows = ingest::parse_trends(open(input)?)
        .with_context(|| format!("parsing {}", input.display()))?;
    let stitched = trends::stitch(&windows, min_overlap)?;
    eprintln!(
        "stitched {} window(s) into {} day(s)",
        windows.len(),
        stitched.len()
    );
    write_output(out, &stitched.to_csv(4))
}

pub fn returns(input: &Path, out: Option<&Path>) -> Result<()> {
    let prices = ingest::parse_prices(open(input)?, &stem(input))
        .with_context(|| format!("parsing {}", input.display()))?;
    let returns = stats::log_returns(&prices)?;
    write_output(out, &returns.to_csv(6))
}

pub fn describe(
    input: Option<&Path>,
    inputs: Option<&str>,
    out: Option<&Path>,
) -> Result<()> {
    let series = load_series_list(input, inputs)?;
    let columns: Vec<(String, stats::SummaryStats)> = series
        .iter()
        .map(|s| Ok((s.name().to_string(), stats::describe(s.values())?)))
        .collect::<Result<_>>()?;
    let borrowed: Vec<(&str, stats::SummaryStats)> =
        columns.iter().map(|(n, s)| (n.as_str(), *s)).collect();
    write_output(out, &stats::describe_csv(&borrowed))
}

pub fn xcorr_matrix(
    inputs: &str,
    max_lag: usize,
    out: Option<&Path>,
    lags_out: Option<&Path>,
) -> Result<()> {
    let series = load_series_list(None, Some(inputs))?;
    let matrix = xcorr::xcorr_matrix(&series, max_lag)?;
    write_output(out, &matrix.to_csv())?;
    if let Some(path) = lags_out {
        write_output(Some(path), &matrix.lags_to_csv())?;
    }
    Ok(())
}

pub fn xcorr_curve(
    inputs: &str,
    max_lag: usize,
    out: Option<&Path>,
    lags_out: Option<&Path>,
) -> Result<()> {
    if lags_out.is_some() {
        bail!("--lags-out only applies to --kind matrix");
    }
    let series = load_series_list(None, Some(inputs))?;
    if series.len() != 2 {
        bail!("--kind curve needs exactly 2 inputs, found {}", series.len());
    }
    let curve = xcorr::cross_correlation(&series[0], &series[1], max_lag)?;
    write_output(out, &curve.to_csv())
}

pub fn render_lines(
    inputs: Option<&str>,
    input: Option<&Path>,
    title: &str,
    out: Option<&Path>,
) -> Result<()> {
    let series = load_series_list(input, inputs)?;
    write_output(out, &render::render_lines(&series, title)?)
}

pub fn render_heatmap(input: Option<&Path>, title: &str, out: Option<&Path>) -> Result<()> {
    let input = input.context("--kind heatmap needs --input with a matrix CSV")?;
    let matrix = read_matrix_csv(input)?;
    write_output(out, &render::render_heatmap(&matrix, title)?)
}

pub fn render_histogram(
    input: Option<&Path>,
    bins: usize,
    title: &str,
    out: Option<&Path>,
) -> Result<()> {
    let input = input.context("--kind histogram needs --input with a series CSV")?;
    let series = ingest::parse_series(open(input)?, &stem(input))
        .with_context(|| format!("parsing {}", input.display()))?;
    let histogram = stats::histogram(series.values(), bins)?;
    write_output(out, &render::render_histogram(&histogram, title))
}

fn collect_shards(input: Option<&str>, inputs: Option<&str>) -> Result<Vec<PathBuf>> {
    let mut shards = Vec::new();
    if let Some(list) = inputs {
        shards.extend(split_list(list).map(PathBuf::from));
    }
    if let Some(pattern) = input {
        shards.extend(pathglob::expand(pattern)?);
    }
    if shards.is_empty() {
        bail!("no input shards: pass --input or --inputs");
    }
    Ok(shards)
}

fn load_series_list(input: Option<&Path>, inputs: Option<&str>) -> Result<Vec<DailySeries>> {
    let mut paths: Vec<PathBuf> = Vec::new();
    if let Some(path) = input {
        paths.push(path.to_path_buf());
    }
    if let Some(list) = inputs {
        paths.extend(split_list(list).map(PathBuf::from));
    }
    if paths.is_empty() {
        bail!("no input series: pass --input or --inputs");
    }
    paths
        .iter()
        .map(|path| {
            ingest::parse_series(open(path)?, &stem(path))
                .with_context(|| format!("parsing {}", path.display()))
        })
        .collect()
}

/// Reads back a matrix CSV (as written by the xcorr subcommand) for
/// rendering. Lags are not part of the coefficient file and stay zero.
fn read_matrix_csv(path: &Path) -> Result<XCorrMatrix> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines();
    let header = lines.next().context("matrix CSV is empty")?;
    let names: Vec<String> = header
        .split(',')
        .skip(1)
        .map(|s| s.to_string())
        .collect();
    if names.is_empty() {
        bail!("matrix CSV has no series names");
    }

    let mut max_corr = Vec::with_capacity(names.len());
    for (i, line) in lines.filter(|l| !l.is_empty()).enumerate() {
        let mut fields = line.split(',');
        let label = fields.next().unwrap_or_default();
        if i >= names.len() {
            bail!("matrix CSV has more rows than names");
        }
        if label != names[i] {
            bail!("matrix CSV row `{label}` does not match column `{}`", names[i]);
        }
        let row: Vec<f64> = fields
            .map(|f| f.parse::<f64>().with_context(|| format!("bad matrix value `{f}`")))
            .collect::<Result<_>>()?;
        if row.len() != names.len() {
            bail!("matrix CSV row `{label}` has {} values, expected {}", row.len(), names.len());
        }
        max_corr.push(row);
    }
    if max_corr.len() != names.len() {
        bail!("matrix CSV has {} rows, expected {}", max_corr.len(), names.len());
    }

    let n = names.len();
    Ok(XCorrMatrix {
        names,
        max_corr,
        lag_at_max: vec![vec![0; n]; n],
    })
}

fn split_list(list: &str) -> impl Iterator<Item = &str> {
    list.split(',').filter(|s| !s.is_empty())
}

fn stem(path: &Path) -> String {
    path.file_stem().unwrap_or_default().to_string_lossy().into_owned()
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| {
        format!("opening {}", path.display())
    })?))
}

fn default_workers() -> NonZeroUsize {
    std::thread::available_parallelism().unwrap_or(NonZeroUsize::new(1).unwrap())
}

fn write_output(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, content)
            .with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().write_all(content.as_bytes())?,
    }
    Ok(())
}
