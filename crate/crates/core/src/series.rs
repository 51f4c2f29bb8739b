//! Date-indexed daily series shared by the parsing, stitching, statistics
//! and correlation modules.

use chrono::NaiveDate;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("series `{0}` has no values")]
    Empty(String),
    #[error("series `{name}` has a non-finite value at {date}")]
    NonFinite { name: String, date: NaiveDate },
}

/// A named, gap-free sequence of daily values: index `i` holds the value for
/// `start_date + i` days. Gaps and duplicate days are unrepresentable.
#[derive(Debug, Clone, PartialEq)]
pub struct DailySeries {
    name: String,
    start_date: NaiveDate,
    values: Vec<f64>,
}

impl DailySeries {
    /// Builds a series, rejecting empty inputs and non-finite values.
    pub fn new(
        name: impl Into<String>,
        start_date: NaiveDate,
        values: Vec<f64>,
    ) -> Result<Self, SeriesError> {
        let name = name.into();
        if values.is_empty() {
            return Err(SeriesError::Empty(name));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(SeriesError::NonFinite {
                date: start_date + chrono::Days::new(i as u64),
                name,
            });
        }
        Ok(Self {
            name,
            start_date,
            values,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn start_date(&self) -> NaiveDate {
        self.start_date
    }

    /// Date of the last value.
    pub fn end_date(&self) -> NaiveDate {
        self.start_date + chrono::Days::new(self.values.len() as u64 - 1)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false: the constructor rejects empty value lists.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn date_at(&self, index: usize) -> NaiveDate {
        self.start_date + chrono::Days::new(index as u64)
    }

    pub fn iter_dated(&self) -> impl Iterator<Item = (NaiveDate, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| (self.date_at(i), v))
    }

    /// CSV rendering as `date,value` rows with a fixed number of decimals.
    pub fn to_csv(&self, decimals: usize) -> String {
        date_value_csv(self.start_date, &self.values, decimals)
    }
}

/// Formats consecutive daily values as a `date,value` CSV document.
pub fn date_value_csv(start_date: NaiveDate, values: &[f64], decimals: usize) -> String {
    let mut out = String::with_capacity(values.len() * 24 + 16);
    out.push_str("date,value\n");
    for (i, v) in values.iter().enumerate() {
        let date = start_date + chrono::Days::new(i as u64);
        out.push_str(&format!("{date},{v:.decimals$}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    #[test]
    fn dates_are_consecutive() {
        let s = DailySeries::new("a", d(2020, 12, 30), vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(s.date_at(0), d(2020, 12, 30));
        assert_eq!(s.date_at(2), d(2021, 1, 1));
        assert_eq!(s.end_date(), d(2021, 1, 1));
    }

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(matches!(
            DailySeries::new("a", d(2020, 1, 1), vec![]),
            Err(SeriesError::Empty(_))
        ));
        let err = DailySeries::new("a", d(2020, 1, 1), vec![1.0, f64::NAN]).unwrap_err();
        match err {
            SeriesError::NonFinite { date, .. } => assert_eq!(date, d(2020, 1, 2)),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn csv_has_fixed_decimals() {
        let s = DailySeries::new("a", d(2020, 1, 1), vec![1.0, 2.25]).unwrap();
        assert_eq!(s.to_csv(4), "date,value\n2020-01-01,1.0000\n2020-01-02,2.2500\n");
    }
}
