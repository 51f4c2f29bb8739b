//! End-to-end analysis library for blockchain transaction exports, daily
//! price bars and search-interest windows: shard-parallel monthly gas and
//! transaction statistics, stitching of overlapping normalized interest
//! windows, percent log returns with descriptive summaries, pairwise lagged
//! cross-correlation with lag-max extraction, and deterministic CSV/SVG
//! output.
//!
//! The companion `chaintrends` binary wires these modules into a subcommand
//! pipeline; everything here is usable as a plain library.

pub mod aggregate;
pub mod ingest;
pub mod render;
pub mod series;
pub mod stats;
pub mod trends;
pub mod xcorr;

pub use aggregate::{Month, MonthlyAggregate, PartialAggregate};
pub use ingest::{MalformedPolicy, ParseReport, PriceBar, TrendsWindow, TxRecord};
pub use series::DailySeries;
pub use stats::{Histogram, ReturnSeries, SummaryStats};
pub use xcorr::{LagCorrelation, XCorrMatrix};
