//! Stitching of overlapping, individually max-100-normalized search-interest
//! windows into one continuous daily series.
//!
//! Each provider window is normalized to its own maximum, so consecutive
//! windows disagree by an unknown positive factor. The first window is taken
//! at unit scale and every later window is rescaled by the ratio of overlap
//! means against the series stitched so far; overlap days take the average
//! of the two estimates. The finished series is renormalized to a maximum of
//! exactly 100. The estimator is exact when the windows are noise-free
//! rescalings of one underlying series.

use chrono::NaiveDate;
use thiserror::Error;

use crate::ingest::TrendsWindow;
use crate::series::{DailySeries, SeriesError};

/// Default minimum overlap (days) required between consecutive windows.
pub const DEFAULT_MIN_OVERLAP: usize = 30;

#[derive(Debug, Error)]
pub enum TrendsError {
    #[error("no windows to stitch")]
    NoWindows,
    #[error("windows `{a}` and `{b}` are not sorted by start date")]
    Unsorted { a: String, b: String },
    #[error("insufficient overlap between `{a}` and `{b}`: {got} day(s), need {needed}")]
    InsufficientOverlap { a: String, b: String, got: i64, needed: usize },
    #[error("window `{id}` has zero mean over the overlap, scale undefined")]
    ZeroOverlapMean { id: String },
    #[error("series `{0}` is all zero, maximum rescale undefined")]
    AllZero(String),
    #[error("rescale target must be positive, got {0}")]
    NonPositiveTarget(f64),
    #[error("series `{a}` and `{b}` share {got} day(s), need at least 2")]
    NoOverlap { a: String, b: String, got: i64 },
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Stitches sorted, overlapping windows into one daily series renormalized
/// to a maximum of 100.
///
/// Window 1 is taken at unit scale. Each subsequent window `k` is multiplied
/// by `mean(stitched over overlap) / mean(window k over overlap)`; on the
/// overlap days the stitched value and the scaled incoming value are
/// averaged. Consecutive windows must overlap by at least `min_overlap`
/// days (so the union of dates is gap-free).
pub fn stitch(windows: &[TrendsWindow], min_overlap: usize) -> Result<DailySeries, TrendsError> {
    let first = windows.first().ok_or(TrendsError::NoWindows)?;
    let min_overlap = min_overlap.max(1);

    let start_date = first.start_date;
    let mut acc = first.values.clone();
    let mut prev_id = first.window_id.as_str();
    let mut prev_start = first.start_date;

    for window in &windows[1..] {
        if window.start_date < prev_start {
            return Err(TrendsError::Unsorted {
                a: prev_id.to_string(),
                b: window.window_id.clone(),
            });
        }

        let acc_end = start_date + chrono::Days::new(acc.len() as u64 - 1);
        let overlap_end = acc_end.min(window.end_date());
        let overlap_days = (overlap_end - window.start_date).num_days() + 1;
        if overlap_days < min_overlap as i64 {
            return Err(TrendsError::InsufficientOverlap {
                a: prev_id.to_string(),
                b: window.window_id.clone(),
                got: overlap_days.max(0),
                needed: min_overlap,
            });
        }

        let overlap = overlap_days as usize;
        let offset = (window.start_date - start_date).num_days() as usize;
        let acc_mean = mean(&acc[offset..offset + overlap]);
        let win_mean = mean(&window.values[..overlap]);
        if win_mean == 0.0 {
            return Err(TrendsError::ZeroOverlapMean {
                id: window.window_id.clone(),
            });
        }
        let factor = acc_mean / win_mean;

        for (i, &v) in window.values.iter().enumerate() {
            let scaled = factor * v;
            if i < overlap {
                acc[offset + i] = (acc[offset + i] + scaled) / 2.0;
            } else {
                acc.push(scaled);
            }
        }

        prev_id = &window.window_id;
        prev_start = window.start_date;
    }

    let max = acc.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max <= 0.0 {
        return Err(TrendsError::AllZero("stitched".into()));
    }
    for v in &mut acc {
        *v = *v / max * 100.0;
    }
    Ok(DailySeries::new("stitched", start_date, acc)?)
}

/// Multiplies every value by `target_max / max(values)`, so the output
/// maximum equals `target_max` exactly. Used to fit a secondary series onto
/// a chart's y axis.
pub fn rescale_to_max(series: &DailySeries, target_max: f64) -> Result<DailySeries, TrendsError> {
    if target_max.is_nan() || target_max <= 0.0 {
        return Err(TrendsError::NonPositiveTarget(target_max));
    }
    let max = series.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max <= 0.0 {
        return Err(TrendsError::AllZero(series.name().to_string()));
    }
    let values = series.values().iter().map(|&v| v / max * target_max).collect();
    Ok(DailySeries::new(series.name(), series.start_date(), values)?)
}

/// Restricts both series to the intersection of their date ranges.
pub fn align(a: &DailySeries, b: &DailySeries) -> Result<(DailySeries, DailySeries), TrendsError> {
    let start = a.start_date().max(b.start_date());
    let end = a.end_date().min(b.end_date());
    let days = (end - start).num_days() + 1;
    if days < 2 {
        return Err(TrendsError::NoOverlap {
            a: a.name().to_string(),
            b: b.name().to_string(),
            got: days.max(0),
        });
    }
    Ok((slice_series(a, start, days as usize)?, slice_series(b, start, days as usize)?))
}

fn slice_series(s: &DailySeries, start: NaiveDate, len: usize) -> Result<DailySeries, SeriesError> {
    let offset = (start - s.start_date()).num_days() as usize;
    DailySeries::new(s.name(), start, s.values()[offset..offset + len].to_vec())
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}
