//! Streaming parsers for the three input data families: transaction exports,
//! daily price bars, and raw search-interest windows.
//!
//! Transaction exports are large and frequently dirty, so
//! [`parse_transactions`] takes an explicit malformed-row policy and reports
//! per-row outcomes in a [`ParseReport`]. Price and trends files are small,
//! curated inputs; their parsers abort on the first bad row.
//!
//! ## CSV contracts
//!
//! | File         | Header                                            |
//! |--------------|---------------------------------------------------|
//! | transactions | `timestamp,gas,gas_price,value,to_address,difficulty` |
//! | prices       | `date,close`                                      |
//! | trends       | `window_id,date,value`                            |
//!
//! All files are UTF-8 with `\n` or `\r\n` line endings, `.` decimal
//! separator and no thousands separators. An empty `to_address` marks a
//! contract creation. Timestamps are accepted as ISO-8601 or integer epoch
//! seconds and normalized to epoch seconds UTC.

use std::collections::HashSet;
use std::io::BufRead;

use chrono::{NaiveDate, NaiveDateTime, Utc};
use thiserror::Error;

use crate::series::{DailySeries, SeriesError};

/// Exact header expected on transaction export shards.
pub const TX_HEADER: &str = "timestamp,gas,gas_price,value,to_address,difficulty";
/// Exact header expected on price files.
pub const PRICE_HEADER: &str = "date,close";
/// Exact header expected on trends window files.
pub const TRENDS_HEADER: &str = "window_id,date,value";

/// 2015-07-30T00:00:00Z, the earliest admissible transaction timestamp.
pub const EARLIEST_TIMESTAMP: i64 = 1_438_214_400;

/// Number of (line, reason) samples kept in a [`ParseReport`].
pub const MAX_REPORTED_ERRORS: usize = 10;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("header mismatch: expected `{expected}`, found `{found}`")]
    Header {
        expected: &'static str,
        found: String,
    },
    #[error("line {line}: {reason}")]
    Row { line: u64, reason: String },
    #[error("window `{window_id}`: {reason}")]
    Window { window_id: String, reason: String },
    #[error("no data rows")]
    NoRows,
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// What to do with a malformed transaction row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MalformedPolicy {
    /// Count and skip the row.
    #[default]
    Skip,
    /// Fail the parse on the first malformed row.
    Abort,
}

/// One blockchain transaction row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TxRecord {
    /// UTC epoch seconds.
    pub timestamp: i64,
    /// Gas units, at least 1.
    pub gas_used: u64,
    /// Wei (1e-18 ETH).
    pub gas_price_wei: u64,
    /// True when `to_address` was empty in the export.
    pub is_contract_creation: bool,
    /// Block difficulty, when the export carries it.
    pub difficulty: Option<u64>,
}

impl TxRecord {
    /// Renders the record back into the export row format. Round-trips
    /// through [`parse_transactions`] field-for-field; the unused `value`
    /// column is written as `0`.
    pub fn to_csv_row(&self) -> String {
        let to_address = if self.is_contract_creation { "" } else { "0x0" };
        let difficulty = self.difficulty.map(|d| d.to_string()).unwrap_or_default();
        format!(
            "{},{},{},0,{},{}",
            self.timestamp, self.gas_used, self.gas_price_wei, to_address, difficulty
        )
    }
}

/// One daily closing price.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceBar {
    pub date: NaiveDate,
    pub close_usd: f64,
}

/// One raw provider-exported window of daily search-interest values,
/// normalized by the provider so its maximum is exactly 100.
#[derive(Debug, Clone, PartialEq)]
pub struct TrendsWindow {
    pub window_id: String,
    pub start_date: NaiveDate,
    pub values: Vec<f64>,
}

impl TrendsWindow {
    pub fn end_date(&self) -> NaiveDate {
        self.start_date + chrono::Days::new(self.values.len() as u64 - 1)
    }
}

/// Per-file parsing outcome: every physical data row is either ok or
/// rejected, and the first few rejections are kept with their reasons.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseReport {
    pub rows_ok: u64,
    pub rows_rejected: u64,
    /// Up to [`MAX_REPORTED_ERRORS`] (line number, reason) samples.
    pub first_errors: Vec<(u64, String)>,
}

impl ParseReport {
    fn reject(&mut self, line: u64, reason: String) {
        self.rows_rejected += 1;
        if self.first_errors.len() < MAX_REPORTED_ERRORS {
            self.first_errors.push((line, reason));
        }
    }

    /// Folds another report into this one, keeping the first
    /// [`MAX_REPORTED_ERRORS`] error samples in absorption order.
    pub fn absorb(&mut self, other: ParseReport) {
        self.rows_ok += other.rows_ok;
        self.rows_rejected += other.rows_rejected;
        for entry in other.first_errors {
            if self.first_errors.len() >= MAX_REPORTED_ERRORS {
                break;
            }
            self.first_errors.push(entry);
        }
    }
}

/// Parses a transaction export shard.
///
/// Well-formed rows become [`TxRecord`]s in input order. Malformed rows are
/// counted and skipped under [`MalformedPolicy::Skip`], or fail the whole
/// parse (naming the line) under [`MalformedPolicy::Abort`]. Blank lines are
/// not data rows and are ignored.
pub fn parse_transactions(
    reader: impl BufRead,
    policy: MalformedPolicy,
) -> Result<(Vec<TxRecord>, ParseReport), ParseError> {
    let mut lines = reader.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header != TX_HEADER {
        return Err(ParseError::Header {
            expected: TX_HEADER,
            found: header,
        });
    }

    let now = Utc::now().timestamp();
    let mut records = Vec::new();
    let mut report = ParseReport::default();
    for (line_no, line) in (2u64..).zip(lines) {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        match parse_tx_row(&line, now) {
            Ok(record) => {
                records.push(record);
                report.rows_ok += 1;
            }
            Err(reason) => match policy {
                MalformedPolicy::Skip => report.reject(line_no, reason),
                MalformedPolicy::Abort => {
                    return Err(ParseError::Row {
                        line: line_no,
                        reason,
                    })
                }
            },
        }
    }
    Ok((records, report))
}

fn parse_tx_row(line: &str, now: i64) -> Result<TxRecord, String> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != 6 {
        return Err(format!("expected 6 fields, found {}", fields.len()));
    }

    let timestamp = parse_timestamp(fields[0], now)?;
    let gas_used: u64 = fields[1]
        .parse()
        .map_err(|_| format!("invalid gas `{}`", fields[1]))?;
    if gas_used < 1 {
        return Err(format!("gas must be at least 1, found {gas_used}"));
    }
    let gas_price_wei: u64 = fields[2]
        .parse()
        .map_err(|_| format!("invalid gas price `{}`", fields[2]))?;
    // fields[3] is the transferred value; carried by exports but unused here.
    let is_contract_creation = fields[4].is_empty();
    let difficulty = if fields[5].is_empty() {
        None
    } else {
        Some(
            fields[5]
                .parse()
                .map_err(|_| format!("invalid difficulty `{}`", fields[5]))?,
        )
    };

    Ok(TxRecord {
        timestamp,
        gas_used,
        gas_price_wei,
        is_contract_creation,
        difficulty,
    })
}

/// Accepts integer epoch seconds or ISO-8601 (with or without an explicit
/// offset, naive forms read as UTC) and normalizes to epoch seconds UTC.
fn parse_timestamp(text: &str, now: i64) -> Result<i64, String> {
    let secs = if let Ok(epoch) = text.parse::<i64>() {
        epoch
    } else if let Ok(dt) = chrono::DateTime::parse_from_rfc3339(text) {
        dt.timestamp()
    } else if let Ok(dt) = NaiveDateTime::parse_from_str(text, "%Y-%m-%dT%H:%M:%S") {
        dt.and_utc().timestamp()
    } else {
        return Err(format!("invalid timestamp `{text}`"));
    };
    if !(EARLIEST_TIMESTAMP..=now).contains(&secs) {
        return Err(format!("timestamp {secs} outside [2015-07-30, now]"));
    }
    Ok(secs)
}

/// Parses a `date,close` price file into a series named `name`.
///
/// Price files must be clean: any malformed row, non-positive close,
/// out-of-order date or calendar gap aborts the parse.
pub fn parse_prices(reader: impl BufRead, name: &str) -> Result<DailySeries, ParseError> {
    let bars = parse_date_value_rows(reader, PRICE_HEADER, |line, close| {
        if close <= 0.0 {
            return Err(ParseError::Row {
                line,
                reason: format!("non-positive price {close}"),
            });
        }
        Ok(())
    })?;
    let series = DailySeries::new(
        name,
        bars[0].date,
        bars.iter().map(|b| b.close_usd).collect(),
    )?;
    Ok(series)
}

/// Parses a generic `date,value` (or `date,close`) series file: same date
/// discipline as [`parse_prices`] but without the positivity requirement.
/// Used for reading back stitched trends, returns and other pipeline output.
pub fn parse_series(reader: impl BufRead, name: &str) -> Result<DailySeries, ParseError> {
    let bars = parse_date_value_rows(reader, "date,value", |_, _| Ok(()))?;
    let series = DailySeries::new(
        name,
        bars[0].date,
        bars.iter().map(|b| b.close_usd).collect(),
    )?;
    Ok(series)
}

fn parse_date_value_rows(
    reader: impl BufRead,
    expected_header: &'static str,
    validate: impl Fn(u64, f64) -> Result<(), ParseError>,
) -> Result<Vec<PriceBar>, ParseError> {
    let mut lines = reader.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    // `date,value` and `date,close` files share one reader.
    if header != expected_header && header != PRICE_HEADER {
        return Err(ParseError::Header {
            expected: expected_header,
            found: header,
        });
    }

    let mut bars: Vec<PriceBar> = Vec::new();
    for (line_no, line) in (2u64..).zip(lines) {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let (date_text, value_text) = line.split_once(',').ok_or_else(|| ParseError::Row {
            line: line_no,
            reason: "expected 2 fields".into(),
        })?;
        let date = NaiveDate::parse_from_str(date_text, "%Y-%m-%d").map_err(|_| {
            ParseError::Row {
                line: line_no,
                reason: format!("invalid date `{date_text}`"),
            }
        })?;
        let value: f64 = value_text.parse().map_err(|_| ParseError::Row {
            line: line_no,
            reason: format!("invalid value `{value_text}`"),
        })?;
        if !value.is_finite() {
            return Err(ParseError::Row {
                line: line_no,
                reason: format!("non-finite value `{value_text}`"),
            });
        }
        validate(line_no, value)?;
        if let Some(prev) = bars.last() {
            if date <= prev.date {
                return Err(ParseError::Row {
                    line: line_no,
                    reason: format!("non-increasing dates: {} then {}", prev.date, date),
                });
            }
            if date != prev.date.succ_opt().unwrap() {
                return Err(ParseError::Row {
                    line: line_no,
                    reason: format!("gap between {} and {}", prev.date, date),
                });
            }
        }
        bars.push(PriceBar {
            date,
            close_usd: value,
        });
    }
    if bars.is_empty() {
        return Err(ParseError::NoRows);
    }
    Ok(bars)
}

/// Parses a `window_id,date,value` trends export into windows, one per
/// distinct id, in order of first appearance.
///
/// Rows of a window must be contiguous in the file and cover consecutive
/// days. Every value must lie in [0, 100] and each window's maximum must be
/// exactly 100; anything else signals a mis-exported window and aborts.
pub fn parse_trends(reader: impl BufRead) -> Result<Vec<TrendsWindow>, ParseError> {
    let mut lines = reader.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header != TRENDS_HEADER {
        return Err(ParseError::Header {
            expected: TRENDS_HEADER,
            found: header,
        });
    }

    let mut windows: Vec<TrendsWindow> = Vec::new();
    let mut finished: HashSet<String> = HashSet::new();
    let mut current: Option<TrendsWindow> = None;

    for (line_no, line) in (2u64..).zip(lines) {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(ParseError::Row {
                line: line_no,
                reason: format!("expected 3 fields, found {}", fields.len()),
            });
        }
        let id = fields[0];
        let date = NaiveDate::parse_from_str(fields[1], "%Y-%m-%d").map_err(|_| {
            ParseError::Row {
                line: line_no,
                reason: format!("invalid date `{}`", fields[1]),
            }
        })?;
        let value: f64 = fields[2].parse().map_err(|_| ParseError::Row {
            line: line_no,
            reason: format!("invalid value `{}`", fields[2]),
        })?;
        if !(0.0..=100.0).contains(&value) {
            return Err(ParseError::Row {
                line: line_no,
                reason: format!("value {value} outside [0, 100]"),
            });
        }

        match current.as_mut() {
            Some(window) if window.window_id == id => {
                let expected = window.end_date().succ_opt().unwrap();
                if date != expected {
                    return Err(ParseError::Window {
                        window_id: id.to_string(),
                        reason: format!("gap in dates: expected {expected}, found {date}"),
                    });
                }
                window.values.push(value);
            }
            _ => {
                if let Some(done) = current.take() {
                    finish_window(&done)?;
                    finished.insert(done.window_id.clone());
                    windows.push(done);
                }
                if finished.contains(id) {
                    return Err(ParseError::Row {
                        line: line_no,
                        reason: format!("window rows not contiguous: `{id}` reappears"),
                    });
                }
                current = Some(TrendsWindow {
                    window_id: id.to_string(),
                    start_date: date,
                    values: vec![value],
                });
            }
        }
    }
    if let Some(done) = current.take() {
        finish_window(&done)?;
        windows.push(done);
    }
    Ok(windows)
}

fn finish_window(window: &TrendsWindow) -> Result<(), ParseError> {
    if window.values.len() < 2 {
        return Err(ParseError::Window {
            window_id: window.window_id.clone(),
            reason: format!("window has {} value(s), need at least 2", window.values.len()),
        });
    }
    let max = window.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max != 100.0 {
        return Err(ParseError::Window {
            window_id: window.window_id.clone(),
            reason: format!("window not normalized to 100 (max {max})"),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use std::io::Cursor;

    use proptest::prelude::*;

    use super::*;

    fn parse_tx(text: &str, policy: MalformedPolicy) -> (Vec<TxRecord>, ParseReport) {
        parse_transactions(Cursor::new(text), policy).unwrap()
    }

    #[test]
    fn tx_row_maps_fields_directly() {
        let csv = format!("{TX_HEADER}\n2018-01-15T09:30:00Z,21000,50000000000,1,0xabc,123\n");
        let (records, report) = parse_tx(&csv, MalformedPolicy::Skip);
        assert_eq!(records.len(), 1);
        let r = &records[0];
        assert_eq!(r.timestamp, 1_516_008_600);
        assert_eq!(r.gas_used, 21_000);
        assert_eq!(r.gas_price_wei, 50_000_000_000);
        assert!(!r.is_contract_creation);
        assert_eq!(r.difficulty, Some(123));
        assert_eq!(report.rows_ok, 1);
        assert_eq!(report.rows_rejected, 0);
    }

    #[test]
    fn tx_epoch_timestamps_and_contract_flag() {
        let csv = format!("{TX_HEADER}\n1516008600,21000,1,0,,\n");
        let (records, _) = parse_tx(&csv, MalformedPolicy::Skip);
        assert_eq!(records[0].timestamp, 1_516_008_600);
        assert!(records[0].is_contract_creation);
        assert_eq!(records[0].difficulty, None);
    }

    #[test]
    fn tx_empty_file_with_header() {
        let (records, report) = parse_tx(&format!("{TX_HEADER}\n"), MalformedPolicy::Skip);
        assert!(records.is_empty());
        assert_eq!(report, ParseReport::default());
    }

    #[test]
    fn tx_negative_gas_skipped_under_skip_policy() {
        let csv = format!("{TX_HEADER}\n1516008600,-5,1,0,0x0,\n");
        let (records, report) = parse_tx(&csv, MalformedPolicy::Skip);
        assert!(records.is_empty());
        assert_eq!(report.rows_rejected, 1);
        assert_eq!(report.first_errors.len(), 1);
        assert_eq!(report.first_errors[0].0, 2);
    }

    #[test]
    fn tx_zero_gas_rejected() {
        let csv = format!("{TX_HEADER}\n1516008600,0,1,0,0x0,\n");
        let (_, report) = parse_tx(&csv, MalformedPolicy::Skip);
        assert_eq!(report.rows_rejected, 1);
    }

    #[test]
    fn tx_timestamp_out_of_range_rejected() {
        // One day before the chain existed, and one far in the future.
        let csv = format!("{TX_HEADER}\n1438128000,21000,1,0,0x0,\n99999999999,21000,1,0,0x0,\n");
        let (_, report) = parse_tx(&csv, MalformedPolicy::Skip);
        assert_eq!(report.rows_rejected, 2);
    }

    #[test]
    fn tx_abort_policy_names_line() {
        let csv = format!("{TX_HEADER}\n1516008600,21000,1,0,0x0,\nbad row\n");
        let err = parse_transactions(Cursor::new(csv), MalformedPolicy::Abort).unwrap_err();
        match err {
            ParseError::Row { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn tx_header_mismatch() {
        let err =
            parse_transactions(Cursor::new("time,gas\n"), MalformedPolicy::Skip).unwrap_err();
        assert!(matches!(err, ParseError::Header { .. }));
    }

    #[test]
    fn tx_crlf_accepted() {
        let csv = format!("{TX_HEADER}\r\n1516008600,21000,1,0,0x0,\r\n");
        let (records, _) = parse_tx(&csv, MalformedPolicy::Skip);
        assert_eq!(records.len(), 1);
    }

    #[test]
    fn prices_two_rows() {
        let series =
            parse_prices(Cursor::new("date,close\n2020-01-01,100.0\n2020-01-02,110.0\n"), "eth")
                .unwrap();
        assert_eq!(series.len(), 2);
        assert_eq!(series.name(), "eth");
        assert_eq!(series.values(), &[100.0, 110.0]);
    }

    #[test]
    fn prices_out_of_order_names_both_dates() {
        let err = parse_prices(
            Cursor::new("date,close\n2020-01-02,100.0\n2020-01-01,110.0\n"),
            "eth",
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("2020-01-02") && msg.contains("2020-01-01"), "{msg}");
    }

    #[test]
    fn prices_gap_rejected() {
        let err = parse_prices(
            Cursor::new("date,close\n2020-01-01,100.0\n2020-01-03,110.0\n"),
            "eth",
        )
        .unwrap_err();
        assert!(err.to_string().contains("gap"));
    }

    #[test]
    fn prices_non_positive_close_rejected() {
        let err =
            parse_prices(Cursor::new("date,close\n2020-01-01,0\n"), "eth").unwrap_err();
        assert!(err.to_string().contains("non-positive price"));
    }

    #[test]
    fn series_reader_accepts_value_header_and_negatives() {
        let series = parse_series(
            Cursor::new("date,value\n2020-01-01,-4.5\n2020-01-02,2.0\n"),
            "returns",
        )
        .unwrap();
        assert_eq!(series.values(), &[-4.5, 2.0]);
    }

    #[test]
    fn trends_single_window() {
        let csv = "window_id,date,value\nw1,2020-01-01,50\nw1,2020-01-02,100\nw1,2020-01-03,25\n";
        let windows = parse_trends(Cursor::new(csv)).unwrap();
        assert_eq!(windows.len(), 1);
        assert_eq!(windows[0].values, vec![50.0, 100.0, 25.0]);
        assert_eq!(windows[0].end_date(), NaiveDate::from_ymd_opt(2020, 1, 3).unwrap());
    }

    #[test]
    fn trends_unnormalized_window_rejected() {
        let csv = "window_id,date,value\nw1,2020-01-01,40\nw1,2020-01-02,80\nw1,2020-01-03,60\n";
        let err = parse_trends(Cursor::new(csv)).unwrap_err();
        assert!(err.to_string().contains("not normalized to 100"), "{err}");
    }

    #[test]
    fn trends_interleaved_ids_rejected() {
        let csv = "window_id,date,value\nw1,2020-01-01,100\nw1,2020-01-02,50\n\
                   w2,2020-02-01,100\nw2,2020-02-02,10\nw1,2020-01-03,25\n";
        let err = parse_trends(Cursor::new(csv)).unwrap_err();
        assert!(err.to_string().contains("not contiguous"), "{err}");
    }

    #[test]
    fn trends_date_gap_rejected() {
        let csv = "window_id,date,value\nw1,2020-01-01,100\nw1,2020-01-03,50\n";
        let err = parse_trends(Cursor::new(csv)).unwrap_err();
        assert!(err.to_string().contains("gap in dates"), "{err}");
    }

    #[test]
    fn trends_value_out_of_range_rejected() {
        let csv = "window_id,date,value\nw1,2020-01-01,100\nw1,2020-01-02,100.5\n";
        let err = parse_trends(Cursor::new(csv)).unwrap_err();
        assert!(err.to_string().contains("outside [0, 100]"), "{err}");
    }

    fn arb_record() -> impl Strategy<Value = TxRecord> {
        (
            EARLIEST_TIMESTAMP..1_700_000_000i64,
            1u64..10_000_000,
            0u64..1_000_000_000_000,
            any::<bool>(),
            proptest::option::of(0u64..u64::MAX / 2),
        )
            .prop_map(|(timestamp, gas_used, gas_price_wei, is_contract_creation, difficulty)| {
                TxRecord {
                    timestamp,
                    gas_used,
                    gas_price_wei,
                    is_contract_creation,
                    difficulty,
                }
            })
    }

    proptest! {
        // Serializing parsed records and re-parsing them yields the same
        // records, in the same order.
        #[test]
        fn round_trip_preserves_records(records in proptest::collection::vec(arb_record(), 0..50)) {
            let mut csv = String::from(TX_HEADER);
            csv.push('\n');
            for r in &records {
                csv.push_str(&r.to_csv_row());
                csv.push('\n');
            }
            let (reparsed, report) = parse_tx(&csv, MalformedPolicy::Skip);
            prop_assert_eq!(&reparsed, &records);
            prop_assert_eq!(report.rows_ok, records.len() as u64);
            prop_assert_eq!(report.rows_rejected, 0);
        }

        // rows_ok + rows_rejected always equals the number of physical data
        // rows, however dirty the input.
        #[test]
        fn report_accounts_for_every_row(
            rows in proptest::collection::vec(
                prop_oneof![
                    Just("1516008600,21000,1,0,0x0,".to_string()),
                    Just("garbage".to_string()),
                    Just("1516008600,-5,1,0,0x0,".to_string()),
                    Just("0,21000,1,0,0x0,".to_string()),
                ],
                0..60,
            )
        ) {
            let mut csv = String::from(TX_HEADER);
            csv.push('\n');
            for row in &rows {
                csv.push_str(row);
                csv.push('\n');
            }
            let (_, report) = parse_tx(&csv, MalformedPolicy::Skip);
            prop_assert_eq!(report.rows_ok + report.rows_rejected, rows.len() as u64);
        }
    }
}
