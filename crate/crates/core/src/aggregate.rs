//! Shard-parallel monthly aggregation of transaction records.
//!
//! Each shard is mapped independently into a [`PartialAggregate`] and the
//! partials are merged pairwise. Merging is associative and commutative with
//! the empty aggregate as identity, so the reduction order never changes the
//! result; sums are kept in 128-bit integers so the final means are exact to
//! rounding. [`run_parallel`] fans shards out over a bounded worker pool and
//! folds the partials back in shard order, making the output bit-identical
//! for every worker count.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::BufReader;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::ingest::{parse_transactions, MalformedPolicy, ParseError, ParseReport, TxRecord};
use crate::stats::{self, StatsError};

#[derive(Debug, Error)]
pub enum AggregateError {
    #[error("shard {path}: {source}")]
    Shard { path: PathBuf, source: ParseError },
    #[error("worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error("gas-difficulty correlation: {0}")]
    Correlation(#[from] StatsError),
}

/// A UTC calendar month, printed as `YYYY-MM`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Month {
    pub year: i32,
    pub month: u32,
}

impl Month {
    /// Calendar month (UTC) containing the given epoch second.
    pub fn from_timestamp(epoch_secs: i64) -> Self {
        use chrono::Datelike;
        let dt = chrono::DateTime::from_timestamp(epoch_secs, 0)
            .expect("timestamp validated at parse time");
        Month {
            year: dt.year(),
            month: dt.month(),
        }
    }
}

impl fmt::Display for Month {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

/// Counters and sums for one month of one partial aggregate.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MonthTotals {
    pub tx_count: u64,
    pub contract_count: u64,
    pub gas_sum: u128,
    pub gas_price_sum_wei: u128,
    /// (gas_used, difficulty) for rows that carry a difficulty.
    pub difficulty_pairs: Vec<(u64, u64)>,
}

impl MonthTotals {
    fn absorb(&mut self, other: MonthTotals) {
        self.tx_count += other.tx_count;
        self.contract_count += other.contract_count;
        self.gas_sum += other.gas_sum;
        self.gas_price_sum_wei += other.gas_price_sum_wei;
        self.difficulty_pairs.extend(other.difficulty_pairs);
    }
}

/// Mergeable per-month statistics. The empty aggregate is the merge
/// identity; merge is associative and commutative (difficulty pairs compared
/// as multisets).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PartialAggregate {
    months: BTreeMap<Month, MonthTotals>,
}

impl PartialAggregate {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.months.is_empty()
    }

    pub fn months(&self) -> impl Iterator<Item = (&Month, &MonthTotals)> {
        self.months.iter()
    }

    /// Tallies one record into its calendar month.
    pub fn add(&mut self, record: &TxRecord) {
        let totals = self
            .months
            .entry(Month::from_timestamp(record.timestamp))
            .or_default();
        totals.tx_count += 1;
        if record.is_contract_creation {
            totals.contract_count += 1;
        }
        totals.gas_sum += u128::from(record.gas_used);
        totals.gas_price_sum_wei += u128::from(record.gas_price_wei);
        if let Some(difficulty) = record.difficulty {
            totals.difficulty_pairs.push((record.gas_used, difficulty));
        }
    }

    /// Month-wise sum of all counters; difficulty pairs concatenated.
    pub fn merge(mut self, other: PartialAggregate) -> PartialAggregate {
        for (month, totals) in other.months {
            self.months.entry(month).or_default().absorb(totals);
        }
        self
    }

    /// All difficulty pairs across months, in month order.
    pub fn difficulty_pairs(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.months
            .values()
            .flat_map(|t| t.difficulty_pairs.iter().copied())
    }

    pub fn total_tx_count(&self) -> u64 {
        self.months.values().map(|t| t.tx_count).sum()
    }
}

/// Finalized statistics for one month.
#[derive(Debug, Clone, PartialEq)]
pub struct MonthlyAggregate {
    pub month: Month,
    pub tx_count: u64,
    pub contract_count: u64,
    /// Unweighted per-transaction mean, gas units.
    pub mean_gas: f64,
    /// Unweighted per-transaction mean, Gwei (1e-9 ETH).
    pub mean_gas_price_gwei: f64,
}

/// Tallies one shard of records into a partial aggregate.
pub fn map_shard(records: &[TxRecord]) -> PartialAggregate {
    let mut agg = PartialAggregate::new();
    for record in records {
        agg.add(record);
    }
    agg
}

/// Turns a partial aggregate into per-month means, months ascending.
pub fn finalize(agg: &PartialAggregate) -> Vec<MonthlyAggregate> {
    agg.months
        .iter()
        .filter(|(_, t)| t.tx_count > 0)
        .map(|(&month, t)| {
            let n = t.tx_count as f64;
            MonthlyAggregate {
                month,
                tx_count: t.tx_count,
                contract_count: t.contract_count,
                mean_gas: t.gas_sum as f64 / n,
                mean_gas_price_gwei: (t.gas_price_sum_wei as f64 / n) / 1e9,
            }
        })
        .collect()
}

/// Parses and aggregates the given shard files on a pool of `workers`
/// threads and merges the per-shard results in shard order.
///
/// The output is bit-identical for every worker count: shard parsing is
/// independent, integer sums are exact, and the fold order is fixed by the
/// shard list, not by completion order. Any shard failure (I/O, header, or a
/// malformed row under [`MalformedPolicy::Abort`]) fails the whole run and
/// names the shard. Per-shard parse reports are summed, with error samples
/// prefixed by the shard path.
pub fn run_parallel(
    shard_paths: &[PathBuf],
    workers: NonZeroUsize,
    policy: MalformedPolicy,
) -> Result<(Vec<MonthlyAggregate>, ParseReport), AggregateError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.get())
        .build()?;

    let shards: Vec<(PartialAggregate, ParseReport)> = pool.install(|| {
        shard_paths
            .par_iter()
            .map(|path| aggregate_shard(path, policy))
            .collect::<Result<Vec<_>, AggregateError>>()
    })?;

    let mut total = PartialAggregate::new();
    let mut report = ParseReport::default();
    for (path, (partial, mut shard_report)) in shard_paths.iter().zip(shards) {
        total = total.merge(partial);
        for (_, reason) in &mut shard_report.first_errors {
            *reason = format!("{}: {reason}", path.display());
        }
        report.absorb(shard_report);
    }
    Ok((finalize(&total), report))
}

fn aggregate_shard(
    path: &Path,
    policy: MalformedPolicy,
) -> Result<(PartialAggregate, ParseReport), AggregateError> {
    let shard_err = |source: ParseError| AggregateError::Shard {
        path: path.to_path_buf(),
        source,
    };
    let file = File::open(path).map_err(|e| shard_err(e.into()))?;
    let (records, report) =
        parse_transactions(BufReader::new(file), policy).map_err(shard_err)?;
    Ok((map_shard(&records), report))
}

/// Pearson correlation between gas used and difficulty over every collected
/// pair. Needs at least two pairs and non-zero variance in both coordinates.
pub fn gas_difficulty_pearson(agg: &PartialAggregate) -> Result<f64, AggregateError> {
    let (gas, difficulty): (Vec<f64>, Vec<f64>) = agg
        .difficulty_pairs()
        .map(|(g, d)| (g as f64, d as f64))
        .unzip();
    Ok(stats::pearson(&gas, &difficulty)?)
}

/// CSV rendering: `month,tx_count,contract_count,mean_gas,mean_gas_price_gwei`
/// with means printed to 6 decimal places.
pub fn monthly_csv(rows: &[MonthlyAggregate]) -> String {
    let mut out = String::from("month,tx_count,contract_count,mean_gas,mean_gas_price_gwei\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{:.6},{:.6}\n",
            row.month, row.tx_count, row.contract_count, row.mean_gas, row.mean_gas_price_gwei
        ));
    }
    out
}
