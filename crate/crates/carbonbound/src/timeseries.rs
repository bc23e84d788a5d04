//! Hour-indexed series and interval types shared by every other module.
//!
//! All ranges are half-open: a series starting at `start` with `n` values
//! covers stamps `start .. start+n`. Timestamps are UTC throughout; parsing
//! normalizes any offset to UTC and rejects sub-hour precision.

use chrono::{DateTime, NaiveDateTime, SecondsFormat, TimeZone, Utc};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Errors from constructing or combining series types.
#[derive(Debug, Error, PartialEq)]
pub enum SeriesError {
    #[error("invalid region code {0:?}: must be non-empty uppercase alphanumeric ASCII")]
    InvalidRegion(String),
    #[error("timestamp {0:?} is not a whole UTC hour or is malformed")]
    BadTimestamp(String),
    #[error("series must contain at least one value")]
    EmptySeries,
    #[error("non-finite value at offset {index}")]
    NonFinite { index: usize },
    #[error("negative value {value} at offset {index} not allowed for unit {unit:?}")]
    NegativeValue {
        index: usize,
        value: f64,
        unit: Unit,
    },
    #[error("series ranges do not overlap")]
    EmptyOverlap,
    #[error("slice [{from}, {from}+{len}) outside series range [{start}, {end})")]
    OutOfRange {
        from: HourlyStamp,
        len: usize,
        start: HourlyStamp,
        end: HourlyStamp,
    },
    #[error("interval has lower {lower} > upper {upper}")]
    InvertedInterval { lower: f64, upper: f64 },
    #[error("alpha {0} outside (0, 1)")]
    AlphaOutOfRange(f64),
    #[error("interval alpha {interval} differs from series alpha {series}")]
    AlphaMismatch { interval: f64, series: f64 },
}

/// Whole hours since the Unix epoch, UTC.
///
/// Serializes as an ISO-8601 string so config files and reports stay
/// human-readable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct HourlyStamp(pub i64);

impl TryFrom<String> for HourlyStamp {
    type Error = SeriesError;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        HourlyStamp::parse(&value)
    }
}

impl From<HourlyStamp> for String {
    fn from(value: HourlyStamp) -> String {
        value.to_string()
    }
}

impl HourlyStamp {
    /// Parse an ISO-8601 timestamp, normalizing to UTC.
    ///
    /// Accepts RFC 3339 (`2022-07-01T05:00:00Z`, any offset) and the common
    /// space-separated form (`2022-07-01 05:00:00`, interpreted as UTC).
    /// Minutes and seconds must be zero.
    pub fn parse(text: &str) -> Result<Self, SeriesError> {
        let trimmed = text.trim();
        let utc: DateTime<Utc> = if let Ok(dt) = DateTime::parse_from_rfc3339(trimmed) {
            dt.with_timezone(&Utc)
        } else {
            let naive = NaiveDateTime::parse_from_str(trimmed, "%Y-%m-%d %H:%M:%S")
                .or_else(|_| NaiveDateTime::parse_from_str(trimmed, "%Y-%m-%d %H:%M"))
                .or_else(|_| NaiveDateTime::parse_from_str(trimmed, "%Y-%m-%dT%H:%M"))
                .map_err(|_| SeriesError::BadTimestamp(text.to_string()))?;
            Utc.from_utc_datetime(&naive)
        };
        let secs = utc.timestamp();
        if secs.rem_euclid(3600) != 0 {
            return Err(SeriesError::BadTimestamp(text.to_string()));
        }
        Ok(HourlyStamp(secs.div_euclid(3600)))
    }

    pub fn from_datetime(dt: DateTime<Utc>) -> Result<Self, SeriesError> {
        let secs = dt.timestamp();
        if secs.rem_euclid(3600) != 0 || dt.timestamp_subsec_nanos() != 0 {
            return Err(SeriesError::BadTimestamp(dt.to_rfc3339()));
        }
        Ok(HourlyStamp(secs.div_euclid(3600)))
    }

    pub fn to_datetime(self) -> DateTime<Utc> {
        Utc.timestamp_opt(self.0 * 3600, 0).unwrap()
    }

    /// UTC day this hour falls in, counted in days since the epoch.
    pub fn epoch_day(self) -> i64 {
        self.0.div_euclid(24)
    }

    /// Hour of the UTC day, 0..=23.
    pub fn hour_of_day(self) -> u32 {
        self.0.rem_euclid(24) as u32
    }

    /// First hour (UTC midnight) of this stamp's day.
    pub fn day_start(self) -> HourlyStamp {
        HourlyStamp(self.epoch_day() * 24)
    }

    pub fn offset(self, hours: i64) -> HourlyStamp {
        HourlyStamp(self.0 + hours)
    }
}

impl fmt::Display for HourlyStamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}",
            self.to_datetime()
                .to_rfc3339_opts(SecondsFormat::Secs, true)
        )
    }
}

/// Balancing-authority code such as `CISO`, `ERCO`, or `ISNE`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct RegionId(String);

impl RegionId {
    pub fn new(code: &str) -> Result<Self, SeriesError> {
        if code.is_empty()
            || !code
                .bytes()
                .all(|b| b.is_ascii_uppercase() || b.is_ascii_digit())
        {
            return Err(SeriesError::InvalidRegion(code.to_string()));
        }
        Ok(RegionId(code.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for RegionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for RegionId {
    type Error = SeriesError;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        RegionId::new(&value)
    }
}

impl From<RegionId> for String {
    fn from(value: RegionId) -> String {
        value.0
    }
}

/// Physical unit of a series. Carbon intensity and power must be
/// non-negative; dimensionless values may take any finite value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Unit {
    GramsCo2PerKwh,
    MegawattHours,
    Megawatts,
    Dimensionless,
}

impl Unit {
    fn requires_non_negative(self) -> bool {
        !matches!(self, Unit::Dimensionless)
    }
}

/// Contiguous hourly values for one region: index `i` holds the value for
/// stamp `start + i`, with no gaps.
#[derive(Debug, Clone, PartialEq)]
pub struct HourlySeries {
    region: RegionId,
    start: HourlyStamp,
    values: Vec<f64>,
    unit: Unit,
}

impl HourlySeries {
    pub fn new(
        region: RegionId,
        start: HourlyStamp,
        values: Vec<f64>,
        unit: Unit,
    ) -> Result<Self, SeriesError> {
        if values.is_empty() {
            return Err(SeriesError::EmptySeries);
        }
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                return Err(SeriesError::NonFinite { index });
            }
            if value < 0.0 && unit.requires_non_negative() {
                return Err(SeriesError::NegativeValue { index, value, unit });
            }
        }
        Ok(HourlySeries {
            region,
            start,
            values,
            unit,
        })
    }

    pub fn region(&self) -> &RegionId {
        &self.region
    }

    pub fn start(&self) -> HourlyStamp {
        self.start
    }

    /// One past the last stamp.
    pub fn end(&self) -> HourlyStamp {
        self.start.offset(self.values.len() as i64)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // non-empty by construction
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at a stamp, if the stamp lies in range.
    pub fn at(&self, stamp: HourlyStamp) -> Option<f64> {
        let idx = stamp.0.checked_sub(self.start.0)?;
        if idx < 0 {
            return None;
        }
        self.values.get(idx as usize).copied()
    }

    pub fn stamps(&self) -> impl Iterator<Item = HourlyStamp> + '_ {
        let start = self.start;
        (0..self.values.len() as i64).map(move |i| start.offset(i))
    }
}

/// Trim two series to their overlapping stamp range `[max(start), min(end))`.
///
/// The regions may differ; spatial comparisons pair different grids over the
/// same hours. Errors with [`SeriesError::EmptyOverlap`] when the ranges are
/// disjoint.
pub fn align(
    a: &HourlySeries,
    b: &HourlySeries,
) -> Result<(HourlySeries, HourlySeries), SeriesError> {
    let start = a.start().max(b.start());
    let end = a.end().min(b.end());
    if start >= end {
        return Err(SeriesError::EmptyOverlap);
    }
    let len = (end.0 - start.0) as usize;
    Ok((slice(a, start, len)?, slice(b, start, len)?))
}

/// Copy `len` hours starting at `from` into a new series, preserving region
/// and unit.
pub fn slice(s: &HourlySeries, from: HourlyStamp, len: usize) -> Result<HourlySeries, SeriesError> {
    let out_of_range = || SeriesError::OutOfRange {
        from,
        len,
        start: s.start(),
        end: s.end(),
    };
    if len == 0 || from < s.start() || from.offset(len as i64) > s.end() {
        return Err(out_of_range());
    }
    let offset = (from.0 - s.start.0) as usize;
    HourlySeries::new(
        s.region.clone(),
        from,
        s.values[offset..offset + len].to_vec(),
        s.unit,
    )
}

/// Point forecasts for `origin+1 ..= origin+H`, issued at `origin`.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastBatch {
    pub region: RegionId,
    pub origin: HourlyStamp,
    predictions: Vec<f64>,
}

impl ForecastBatch {
    pub fn new(
        region: RegionId,
        origin: HourlyStamp,
        predictions: Vec<f64>,
    ) -> Result<Self, SeriesError> {
        if predictions.is_empty() {
            return Err(SeriesError::EmptySeries);
        }
        if let Some(index) = predictions.iter().position(|v| !v.is_finite()) {
            return Err(SeriesError::NonFinite { index });
        }
        Ok(ForecastBatch {
            region,
            origin,
            predictions,
        })
    }

    pub fn horizon(&self) -> usize {
        self.predictions.len()
    }

    pub fn predictions(&self) -> &[f64] {
        &self.predictions
    }

    /// Prediction for `origin + h`, with `h` in `1..=H`.
    pub fn prediction_at(&self, h: usize) -> Option<f64> {
        if h == 0 {
            return None;
        }
        self.predictions.get(h - 1).copied()
    }

    /// Stamp of the `h`-hours-ahead target.
    pub fn target(&self, h: usize) -> HourlyStamp {
        self.origin.offset(h as i64)
    }
}

/// A confidence interval at significance level `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
    pub alpha: f64,
}

impl Interval {
    pub fn new(lower: f64, upper: f64, alpha: f64) -> Result<Self, SeriesError> {
        if !(0.0..1.0).contains(&alpha) || alpha == 0.0 {
            return Err(SeriesError::AlphaOutOfRange(alpha));
        }
        if lower > upper {
            return Err(SeriesError::InvertedInterval { lower, upper });
        }
        Ok(Interval {
            lower,
            upper,
            alpha,
        })
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    /// Closed-interval membership; boundary values count as covered.
    pub fn covers(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }
}

/// Contiguous per-hour intervals at a single significance level.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalSeries {
    region: RegionId,
    start: HourlyStamp,
    alpha: f64,
    intervals: Vec<Interval>,
}

impl IntervalSeries {
    pub fn new(
        region: RegionId,
        start: HourlyStamp,
        alpha: f64,
        intervals: Vec<Interval>,
    ) -> Result<Self, SeriesError> {
        if intervals.is_empty() {
            return Err(SeriesError::EmptySeries);
        }
        if !(0.0..1.0).contains(&alpha) || alpha == 0.0 {
            return Err(SeriesError::AlphaOutOfRange(alpha));
        }
        for interval in &intervals {
            if interval.alpha != alpha {
                return Err(SeriesError::AlphaMismatch {
                    interval: interval.alpha,
                    series: alpha,
                });
            }
        }
        Ok(IntervalSeries {
            region,
            start,
            alpha,
            intervals,
        })
    }

    pub fn region(&self) -> &RegionId {
        &self.region
    }

    pub fn start(&self) -> HourlyStamp {
        self.start
    }

    pub fn end(&self) -> HourlyStamp {
        self.start.offset(self.intervals.len() as i64)
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn at(&self, stamp: HourlyStamp) -> Option<&Interval> {
        let idx = stamp.0.checked_sub(self.start.0)?;
        if idx < 0 {
            return None;
        }
        self.intervals.get(idx as usize)
    }

    pub fn stamps(&self) -> impl Iterator<Item = HourlyStamp> + '_ {
        let start = self.start;
        (0..self.intervals.len() as i64).map(move |i| start.offset(i))
    }
}
