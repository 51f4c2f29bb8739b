//! Percent log returns, descriptive summaries, histogram estimation and
//! Pearson correlation.

use chrono::NaiveDate;
use thiserror::Error;

use crate::series::{date_value_csv, DailySeries};

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("input is empty")]
    Empty,
    #[error("series `{name}` too short: need at least {needed} points, found {found}")]
    TooShort {
        name: String,
        needed: usize,
        found: usize,
    },
    #[error("series `{name}` has non-positive price {value} at {date}")]
    NonPositivePrice {
        name: String,
        date: NaiveDate,
        value: f64,
    },
    #[error("length mismatch: {x} vs {y}")]
    LengthMismatch { x: usize, y: usize },
    #[error("zero variance in {0} input")]
    ZeroVariance(&'static str),
    #[error("bin count must be at least 1")]
    ZeroBins,
}

/// Percent log returns of a daily price series: one value per consecutive
/// day pair, dated at the later day.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    pub name: String,
    /// Date of the first return (source start + 1 day).
    pub start_date: NaiveDate,
    /// 100 * ln(P_{t+1} / P_t), in percent.
    pub values: Vec<f64>,
}

impl ReturnSeries {
    pub fn date_at(&self, index: usize) -> NaiveDate {
        self.start_date + chrono::Days::new(index as u64)
    }

    pub fn to_csv(&self, decimals: usize) -> String {
        date_value_csv(self.start_date, &self.values, decimals)
    }
}

/// Seven-number summary; `std` is the sample (n-1) standard deviation and
/// quartiles interpolate linearly between order statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryStats {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Equal-width histogram normalized as a probability density.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// k+1 strictly increasing edges.
    pub bin_edges: Vec<f64>,
    /// Raw per-bin counts; sums to the input length.
    pub counts: Vec<u64>,
    /// count / (n * width) per bin, so sum(density * width) = 1.
    pub densities: Vec<f64>,
}

/// Computes percent log returns: value_t = 100 * ln(P_{t+1} / P_t).
pub fn log_returns(prices: &DailySeries) -> Result<ReturnSeries, StatsError> {
    if prices.len() < 2 {
        return Err(StatsError::TooShort {
            name: prices.name().to_string(),
            needed: 2,
            found: prices.len(),
        });
    }
    if let Some(i) = prices.values().iter().position(|&p| p <= 0.0) {
        return Err(StatsError::NonPositivePrice {
            name: prices.name().to_string(),
            date: prices.date_at(i),
            value: prices.values()[i],
        });
    }
    let values = prices
        .values()
        .windows(2)
        .map(|w| 100.0 * (w[1] / w[0]).ln())
        .collect();
    Ok(ReturnSeries {
        name: prices.name().to_string(),
        start_date: prices.date_at(1),
        values,
    })
}

/// Seven-number summary of the values.
pub fn describe(values: &[f64]) -> Result<SummaryStats, StatsError> {
    if values.is_empty() {
        return Err(StatsError::Empty);
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = if n == 1 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    };
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(SummaryStats {
        mean,
        std,
        min: sorted[0],
        q1: quantile(&sorted, 0.25),
        median: quantile(&sorted, 0.5),
        q3: quantile(&sorted, 0.75),
        max: sorted[n - 1],
    })
}

/// Linear order-statistic interpolation at position h = (n-1)p over sorted
/// values.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

/// Equal-width histogram over [min, max], normalized as a PDF. A degenerate
/// range (min = max) spans [min - 0.5, min + 0.5]; the last bin is
/// right-closed.
pub fn histogram(values: &[f64], bin_count: usize) -> Result<Histogram, StatsError> {
    if values.is_empty() {
        return Err(StatsError::Empty);
    }
    if bin_count == 0 {
        return Err(StatsError::ZeroBins);
    }
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if min == max {
        (min - 0.5, min + 0.5)
    } else {
        (min, max)
    };

    let k = bin_count;
    let span = hi - lo;
    let bin_edges: Vec<f64> = (0..=k).map(|i| lo + span * i as f64 / k as f64).collect();

    let mut counts = vec![0u64; k];
    for &v in values {
        let index = (((v - lo) / span) * k as f64).floor() as usize;
        counts[index.min(k - 1)] += 1;
    }

    let n = values.len() as f64;
    let densities = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| c as f64 / (n * (bin_edges[i + 1] - bin_edges[i])))
        .collect();
    Ok(Histogram {
        bin_edges,
        counts,
        densities,
    })
}

/// Product-moment correlation coefficient, clamped to [-1, 1] to absorb
/// rounding. Constant inputs are rejected as zero-variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch { x: x.len(), y: y.len() });
    }
    if x.len() < 2 {
        return Err(StatsError::TooShort {
            name: "pearson input".to_string(),
            needed: 2,
            found: x.len(),
        });
    }
    if x.iter().all(|&v| v == x[0]) {
        return Err(StatsError::ZeroVariance("first"));
    }
    if y.iter().all(|&v| v == y[0]) {
        return Err(StatsError::ZeroVariance("second"));
    }
    // Identical inputs correlate exactly; skipping the arithmetic keeps the
    // self-correlation free of rounding.
    if x == y {
        return Ok(1.0);
    }

    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for i in 0..x.len() {
        let dx = x[i] - mean_x;
        let dy = y[i] - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 {
        return Err(StatsError::ZeroVariance("first"));
    }
    if var_y == 0.0 {
        return Err(StatsError::ZeroVariance("second"));
    }
    Ok((cov / (var_x * var_y).sqrt()).clamp(-1.0, 1.0))
}

/// CSV rendering of one or more summaries side by side: a `stat,<name>...`
/// header and the rows mean, std, min, q1, median, q3, max printed to 2
/// decimals.
pub fn describe_csv(columns: &[(&str, SummaryStats)]) -> String {
    let mut out = String::from("stat");
    for (name, _) in columns {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    type Field = fn(&SummaryStats) -> f64;
    let rows: [(&str, Field); 7] = [
        ("mean", |s| s.mean),
        ("std", |s| s.std),
        ("min", |s| s.min),
        ("q1", |s| s.q1),
        ("median", |s| s.median),
        ("q3", |s| s.q3),
        ("max", |s| s.max),
    ];
    for (label, get) in rows {
        out.push_str(label);
        for (_, stats) in columns {
            out.push_str(&format!(",{:.2}", get(stats)));
        }
        out.push('\n');
    }
    out
}
