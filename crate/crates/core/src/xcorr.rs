//! Lagged cross-correlation between date-aligned daily series, lag-max
//! extraction and the pairwise matrix of maxima.
//!
//! The coefficient at lag `k` is the Pearson correlation between
//! `x[0..n-k]` and `y[k..n]` on the aligned overlap, so a positive lag
//! means y's values trail x's by `k` days. A lag whose slices have zero
//! variance is recorded as undefined and excluded from maxima rather than
//! treated as zero.

use thiserror::Error;

use crate::series::DailySeries;
use crate::stats::{self, StatsError};
use crate::trends::{self, TrendsError};

/// Default search range in days.
pub const DEFAULT_MAX_LAG: usize = 60;

#[derive(Debug, Error)]
pub enum XCorrError {
    #[error(transparent)]
    Align(#[from] TrendsError),
    #[error("pair ({x}, {y}): aligned overlap of {overlap} day(s) is too short for max lag {max_lag}")]
    OverlapTooShort {
        x: String,
        y: String,
        overlap: usize,
        max_lag: usize,
    },
    #[error("pair ({x}, {y}): no defined correlation at lags >= {min_lag}")]
    NoDefinedLag { x: String, y: String, min_lag: usize },
}

/// Correlation-vs-lag curve for one ordered pair. `coefficients[k]` holds
/// the coefficient at lag `k`, or `None` where a zero-variance slice left
/// it undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct LagCorrelation {
    pub x_name: String,
    pub y_name: String,
    pub coefficients: Vec<Option<f64>>,
}

impl LagCorrelation {
    pub fn max_lag(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// CSV rendering as `lag,coefficient` rows; undefined lags leave the
    /// coefficient field empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lag,coefficient\n");
        for (lag, c) in self.coefficients.iter().enumerate() {
            match c {
                Some(c) => out.push_str(&format!("{lag},{c:.6}\n")),
                None => out.push_str(&format!("{lag},\n")),
            }
        }
        out
    }
}

/// Per-pair maximum cross-correlation and the lag attaining it, over a set
/// of series. `max_corr` is symmetric by construction; diagonal entries are
/// autocorrelation peaks restricted to lags >= 1.
#[derive(Debug, Clone, PartialEq)]
pub struct XCorrMatrix {
    pub names: Vec<String>,
    pub max_corr: Vec<Vec<f64>>,
    pub lag_at_max: Vec<Vec<usize>>,
}

impl XCorrMatrix {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Coefficient CSV: header row and column of names, values to 2
    /// decimals.
    pub fn to_csv(&self) -> String {
        self.render_csv(|i, j| format!("{:.2}", self.max_corr[i][j]))
    }

    /// Companion CSV of integer lag-at-max values, same shape.
    pub fn lags_to_csv(&self) -> String {
        self.render_csv(|i, j| self.lag_at_max[i][j].to_string())
    }

    fn render_csv(&self, cell: impl Fn(usize, usize) -> String) -> String {
        let mut out = String::new();
        for name in &self.names {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for i in 0..self.names.len() {
            out.push_str(&self.names[i]);
            for j in 0..self.names.len() {
                out.push(',');
                out.push_str(&cell(i, j));
            }
            out.push('\n');
        }
        out
    }
}

/// Correlation of the aligned pair at every lag 0..=max_lag. Requires the
/// aligned overlap to be longer than max_lag + 2.
pub fn cross_correlation(
    x: &DailySeries,
    y: &DailySeries,
    max_lag: usize,
) -> Result<LagCorrelation, XCorrError> {
    let (xa, ya) = trends::align(x, y)?;
    let n = xa.len();
    if n <= max_lag + 2 {
        return Err(XCorrError::OverlapTooShort {
            x: x.name().to_string(),
            y: y.name().to_string(),
            overlap: n,
            max_lag,
        });
    }

    let xv = xa.values();
    let yv = ya.values();
    let coefficients = (0..=max_lag)
        .map(|k| match stats::pearson(&xv[..n - k], &yv[k..]) {
            Ok(c) => Some(c),
            Err(StatsError::ZeroVariance(_)) => None,
            // Slice lengths are equal and >= 3 here, so nothing else can
            // fail.
            Err(_) => None,
        })
        .collect();

    Ok(LagCorrelation {
        x_name: x.name().to_string(),
        y_name: y.name().to_string(),
        coefficients,
    })
}

/// The lag with the greatest (signed) defined coefficient among lags >=
/// min_lag; ties break toward the smallest lag.
pub fn lag_max(lc: &LagCorrelation, min_lag: usize) -> Result<(usize, f64), XCorrError> {
    let mut best: Option<(usize, f64)> = None;
    for (lag, c) in lc.coefficients.iter().enumerate().skip(min_lag) {
        if let Some(c) = c {
            if best.is_none_or(|(_, bc)| *c > bc) {
                best = Some((lag, *c));
            }
        }
    }
    best.ok_or_else(|| XCorrError::NoDefinedLag {
        x: lc.x_name.clone(),
        y: lc.y_name.clone(),
        min_lag,
    })
}

/// Pairwise lag-max matrix.
///
/// Off-diagonal cells evaluate both directions (i then j, and j then i) at
/// lags >= 0 and record the larger coefficient with its direction's lag in
/// both cells, making `max_corr` symmetric. Diagonal cells are the series'
/// autocorrelation peak restricted to lags >= 1. A tie between directions
/// breaks toward the smaller lag, then toward the row-ascending direction.
pub fn xcorr_matrix(series: &[DailySeries], max_lag: usize) -> Result<XCorrMatrix, XCorrError> {
    let n = series.len();
    let mut max_corr = vec![vec![0.0; n]; n];
    let mut lag_at_max = vec![vec![0usize; n]; n];

    for i in 0..n {
        let auto = cross_correlation(&series[i], &series[i], max_lag)?;
        let (lag, c) = lag_max(&auto, 1)?;
        max_corr[i][i] = c;
        lag_at_max[i][i] = lag;

        for j in i + 1..n {
            let forward = lag_max(&cross_correlation(&series[i], &series[j], max_lag)?, 0)?;
            let reverse = lag_max(&cross_correlation(&series[j], &series[i], max_lag)?, 0)?;
            let (lag, c) = if reverse.1 > forward.1
                || (reverse.1 == forward.1 && reverse.0 < forward.0)
            {
                reverse
            } else {
                forward
            };
            max_corr[i][j] = c;
            max_corr[j][i] = c;
            lag_at_max[i][j] = lag;
            lag_at_max[j][i] = lag;
        }
    }

    Ok(XCorrMatrix {
        names: series.iter().map(|s| s.name().to_string()).collect(),
        max_corr,
        lag_at_max,
    })
}
