//! Parsers for the delimited input files and the energy-mix to
//! carbon-intensity conversion.
//!
//! All files are comma-separated with a header row and an ISO-8601 UTC
//! hour in the first column. Gaps of at most [`MAX_FILL_RUN`] consecutive
//! hours are forward-filled and recorded in a [`FillLog`]; longer gaps are
//! hard errors, since silently interpolating them would corrupt
//! calibration downstream.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use crate::timeseries::{ForecastBatch, HourlySeries, HourlyStamp, RegionId, SeriesError, Unit};

/// Longest run of consecutive missing hours that forward-fill may repair.
pub const MAX_FILL_RUN: usize = 3;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("gap of {hours} hours after {after} exceeds the {MAX_FILL_RUN}-hour fill limit")]
    GapTooLarge { after: HourlyStamp, hours: usize },
    #[error("line {line}: expected {expected} horizon columns, found {got}")]
    InconsistentHorizon {
        line: usize,
        expected: usize,
        got: usize,
    },
    #[error("line {line}, column {column}: value {value} outside [0, 1]")]
    ValueOutOfUnitRange {
        line: usize,
        column: String,
        value: f64,
    },
    #[error("total generation is zero at {0}")]
    ZeroGeneration(HourlyStamp),
    #[error("no emission factor for source {0:?}")]
    MissingFactor(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// One hour of generation per source, in MWh.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceMixRow {
    pub stamp: HourlyStamp,
    pub generation: BTreeMap<String, f64>,
}

/// Lifecycle emission factors in gCO2eq per kWh, keyed by source name.
///
/// The toolkit ships a documented default table as an editable file
/// (`data/emission_factors.csv`); factors are always loaded from a file,
/// never baked into code.
#[derive(Debug, Clone, PartialEq)]
pub struct EmissionFactorTable {
    factors: BTreeMap<String, f64>,
}

impl EmissionFactorTable {
    pub fn new(factors: BTreeMap<String, f64>) -> Result<Self, IngestError> {
        for (source, &factor) in &factors {
            if !factor.is_finite() || factor < 0.0 {
                return Err(IngestError::Invalid(format!(
                    "factor for {source:?} must be finite and >= 0, got {factor}"
                )));
            }
        }
        Ok(EmissionFactorTable { factors })
    }

    pub fn factor(&self, source: &str) -> Option<f64> {
        self.factors.get(source).copied()
    }

    pub fn sources(&self) -> impl Iterator<Item = &str> {
        self.factors.keys().map(String::as_str)
    }

    /// Load from a `source,g_per_kwh` file.
    pub fn parse(path: &Path) -> Result<Self, IngestError> {
        let mut reader = csv::Reader::from_path(path)?;
        let mut factors = BTreeMap::new();
        for (i, record) in reader.records().enumerate() {
            let line = i + 2;
            let record = record?;
            if record.len() != 2 {
                return Err(IngestError::Parse {
                    line,
                    message: format!("expected 2 columns, found {}", record.len()),
                });
            }
            let value = parse_number(&record[1], line, &record[0])?;
            if factors.insert(record[0].to_string(), value).is_some() {
                return Err(IngestError::Parse {
                    line,
                    message: format!("duplicate source {:?}", &record[0]),
                });
            }
        }
        if factors.is_empty() {
            return Err(IngestError::Parse {
                line: 1,
                message: "emission factor table is empty".into(),
            });
        }
        EmissionFactorTable::new(factors)
    }
}

/// Normalized datacenter power trace with the peak it scales against.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerTrace {
    pub region: RegionId,
    pub start: HourlyStamp,
    normalized: Vec<f64>,
    pub peak_mw: f64,
}

impl PowerTrace {
    pub fn new(
        region: RegionId,
        start: HourlyStamp,
        normalized: Vec<f64>,
        peak_mw: f64,
    ) -> Result<Self, IngestError> {
        if normalized.is_empty() {
            return Err(SeriesError::EmptySeries.into());
        }
        if !(peak_mw.is_finite() && peak_mw > 0.0) {
            return Err(IngestError::Invalid(format!(
                "peak_mw must be positive and finite, got {peak_mw}"
            )));
        }
        for (index, &value) in normalized.iter().enumerate() {
            if !value.is_finite() || !(0.0..=1.0).contains(&value) {
                return Err(IngestError::ValueOutOfUnitRange {
                    line: index + 2,
                    column: "normalized_power".into(),
                    value,
                });
            }
        }
        Ok(PowerTrace {
            region,
            start,
            normalized,
            peak_mw,
        })
    }

    pub fn len(&self) -> usize {
        self.normalized.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn end(&self) -> HourlyStamp {
        self.start.offset(self.normalized.len() as i64)
    }

    pub fn normalized(&self) -> &[f64] {
        &self.normalized
    }

    /// Instantaneous load in MW at a stamp.
    pub fn megawatts_at(&self, stamp: HourlyStamp) -> Option<f64> {
        let idx = stamp.0.checked_sub(self.start.0)?;
        if idx < 0 {
            return None;
        }
        self.normalized.get(idx as usize).map(|n| n * self.peak_mw)
    }

    /// View the MW profile as an hourly series.
    pub fn megawatt_series(&self) -> HourlySeries {
        let values = self.normalized.iter().map(|n| n * self.peak_mw).collect();
        HourlySeries::new(self.region.clone(), self.start, values, Unit::Megawatts)
            .expect("trace values validated at construction")
    }
}

/// Record of hours that were forward-filled during parsing, kept apart
/// from the data so later statistics can exclude them.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FillLog {
    filled: Vec<HourlyStamp>,
}

impl FillLog {
    pub fn from_stamps(mut filled: Vec<HourlyStamp>) -> Self {
        filled.sort_unstable();
        filled.dedup();
        FillLog { filled }
    }

    pub fn is_empty(&self) -> bool {
        self.filled.is_empty()
    }

    pub fn len(&self) -> usize {
        self.filled.len()
    }

    pub fn stamps(&self) -> &[HourlyStamp] {
        &self.filled
    }

    pub fn contains(&self, stamp: HourlyStamp) -> bool {
        self.filled.binary_search(&stamp).is_ok()
    }

    pub fn merge(&mut self, other: &FillLog) {
        self.filled.extend_from_slice(&other.filled);
        self.filled.sort_unstable();
        self.filled.dedup();
    }

    /// Write the sidecar log: one `timestamp` row per filled hour.
    pub fn write(&self, path: &Path) -> Result<(), IngestError> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "timestamp")?;
        for stamp in &self.filled {
            writeln!(out, "{stamp}")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self, IngestError> {
        let mut reader = csv::Reader::from_path(path)?;
        let mut filled = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record?;
            filled.push(parse_stamp(&record[0], i + 2)?);
        }
        Ok(FillLog { filled })
    }
}

fn parse_stamp(text: &str, line: usize) -> Result<HourlyStamp, IngestError> {
    HourlyStamp::parse(text).map_err(|e| IngestError::Parse {
        line,
        message: e.to_string(),
    })
}

fn parse_number(text: &str, line: usize, column: &str) -> Result<f64, IngestError> {
    let value: f64 = text.trim().parse().map_err(|_| IngestError::Parse {
        line,
        message: format!("column {column:?}: {text:?} is not a number"),
    })?;
    if !value.is_finite() {
        return Err(IngestError::Parse {
            line,
            message: format!("column {column:?}: non-finite value"),
        });
    }
    Ok(value)
}

/// Sort rows by stamp, reject duplicates, and forward-fill short gaps.
/// Returns the filled stamps alongside the gap-free rows.
fn fill_gaps<T: Clone>(
    mut rows: Vec<(HourlyStamp, T)>,
) -> Result<(Vec<(HourlyStamp, T)>, FillLog), IngestError> {
    rows.sort_by_key(|(stamp, _)| *stamp);
    for pair in rows.windows(2) {
        if pair[0].0 == pair[1].0 {
            return Err(IngestError::Invalid(format!(
                "duplicate timestamp {}",
                pair[0].0
            )));
        }
    }
    let mut out: Vec<(HourlyStamp, T)> = Vec::with_capacity(rows.len());
    let mut log = FillLog::default();
    for (stamp, value) in rows {
        if let Some((prev_stamp, prev_value)) = out.last().cloned() {
            let gap = (stamp.0 - prev_stamp.0 - 1) as usize;
            if gap > MAX_FILL_RUN {
                return Err(IngestError::GapTooLarge {
                    after: prev_stamp,
                    hours: gap,
                });
            }
            for i in 1..=gap as i64 {
                let filled_stamp = prev_stamp.offset(i);
                log.filled.push(filled_stamp);
                out.push((filled_stamp, prev_value.clone()));
            }
        }
        out.push((stamp, value));
    }
    Ok((out, log))
}

/// Parse an energy source mix file: `timestamp,<source1>,<source2>,...`
/// with MWh values. Rows come back sorted with short gaps forward-filled.
pub fn parse_mix_table(path: &Path) -> Result<(Vec<SourceMixRow>, FillLog), IngestError> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    if headers.len() < 2 {
        return Err(IngestError::Parse {
            line: 1,
            message: "mix file needs a timestamp column and at least one source".into(),
        });
    }
    let sources: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();

    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record?;
        if record.len() != headers.len() {
            return Err(IngestError::Parse {
                line,
                message: format!("expected {} columns, found {}", headers.len(), record.len()),
            });
        }
        let stamp = parse_stamp(&record[0], line)?;
        let mut generation = BTreeMap::new();
        for (source, field) in sources.iter().zip(record.iter().skip(1)) {
            let value = parse_number(field, line, source)?;
            if value < 0.0 {
                return Err(IngestError::Parse {
                    line,
                    message: format!("column {source:?}: negative generation {value} MWh"),
                });
            }
            generation.insert(source.clone(), value);
        }
        rows.push((stamp, generation));
    }
    let (rows, log) = fill_gaps(rows)?;
    let rows = rows
        .into_iter()
        .map(|(stamp, generation)| SourceMixRow { stamp, generation })
        .collect();
    Ok((rows, log))
}

/// Grid-average carbon intensity: the generation-weighted mean of the
/// per-source emission factors, hour by hour.
pub fn mix_to_carbon_intensity(
    region: &RegionId,
    rows: &[SourceMixRow],
    factors: &EmissionFactorTable,
) -> Result<HourlySeries, IngestError> {
    if rows.is_empty() {
        return Err(SeriesError::EmptySeries.into());
    }
    let mut values = Vec::with_capacity(rows.len());
    for row in rows {
        let mut weighted = 0.0;
        let mut total = 0.0;
        for (source, &mwh) in &row.generation {
            let factor = factors
                .factor(source)
                .ok_or_else(|| IngestError::MissingFactor(source.clone()))?;
            weighted += mwh * factor;
            total += mwh;
        }
        if total <= 0.0 {
            return Err(IngestError::ZeroGeneration(row.stamp));
        }
        values.push(weighted / total);
    }
    Ok(HourlySeries::new(
        region.clone(),
        rows[0].stamp,
        values,
        Unit::GramsCo2PerKwh,
    )?)
}

/// Parse a ground-truth file: `timestamp,carbon_intensity`.
pub fn parse_truth_table(
    path: &Path,
    region: &RegionId,
) -> Result<(HourlySeries, FillLog), IngestError> {
    let (rows, log) = parse_value_table(path, "carbon_intensity")?;
    let values: Vec<f64> = rows.iter().map(|(_, v)| *v).collect();
    let series = HourlySeries::new(region.clone(), rows[0].0, values, Unit::GramsCo2PerKwh)?;
    Ok((series, log))
}

fn parse_value_table(
    path: &Path,
    column: &str,
) -> Result<(Vec<(HourlyStamp, f64)>, FillLog), IngestError> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record?;
        if record.len() < 2 {
            return Err(IngestError::Parse {
                line,
                message: "expected timestamp and value columns".into(),
            });
        }
        let stamp = parse_stamp(&record[0], line)?;
        let value = parse_number(&record[1], line, column)?;
        rows.push((stamp, value));
    }
    if rows.is_empty() {
        return Err(IngestError::Parse {
            line: 1,
            message: "file has no data rows".into(),
        });
    }
    fill_gaps(rows)
}

/// Parse a multi-horizon forecast file: `origin_timestamp,h1,...,hH`.
/// Every row must carry the same horizon count.
pub fn parse_forecast_table(
    path: &Path,
    region: &RegionId,
) -> Result<Vec<ForecastBatch>, IngestError> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_path(path)?;
    let horizon = reader.headers()?.len().saturating_sub(1);
    if horizon == 0 {
        return Err(IngestError::Parse {
            line: 1,
            message: "forecast file needs at least one horizon column".into(),
        });
    }
    let mut batches = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record?;
        if record.len() != horizon + 1 {
            return Err(IngestError::InconsistentHorizon {
                line,
                expected: horizon,
                got: record.len().saturating_sub(1),
            });
        }
        let origin = parse_stamp(&record[0], line)?;
        let mut predictions = Vec::with_capacity(horizon);
        for (h, field) in record.iter().skip(1).enumerate() {
            predictions.push(parse_number(field, line, &format!("h{}", h + 1))?);
        }
        batches.push(ForecastBatch::new(region.clone(), origin, predictions)?);
    }
    if batches.is_empty() {
        return Err(IngestError::Parse {
            line: 1,
            message: "file has no data rows".into(),
        });
    }
    batches.sort_by_key(|b| b.origin);
    Ok(batches)
}

/// Parse a normalized power trace file: `timestamp,normalized_power` with
/// values in [0, 1], scaled by `peak_mw`.
pub fn parse_power_trace(
    path: &Path,
    region: &RegionId,
    peak_mw: f64,
) -> Result<(PowerTrace, FillLog), IngestError> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record?;
        if record.len() < 2 {
            return Err(IngestError::Parse {
                line,
                message: "expected timestamp and normalized_power columns".into(),
            });
        }
        let stamp = parse_stamp(&record[0], line)?;
        let value = parse_number(&record[1], line, "normalized_power")?;
        if !(0.0..=1.0).contains(&value) {
            return Err(IngestError::ValueOutOfUnitRange {
                line,
                column: "normalized_power".into(),
                value,
            });
        }
        rows.push((stamp, value));
    }
    if rows.is_empty() {
        return Err(IngestError::Parse {
            line: 1,
            message: "file has no data rows".into(),
        });
    }
    let (rows, log) = fill_gaps(rows)?;
    let normalized: Vec<f64> = rows.iter().map(|(_, v)| *v).collect();
    let trace = PowerTrace::new(region.clone(), rows[0].0, normalized, peak_mw)?;
    Ok((trace, log))
}

/// Write a mix table in the same format `parse_mix_table` reads.
pub fn write_mix_table(path: &Path, rows: &[SourceMixRow]) -> Result<(), IngestError> {
    let mut out = BufWriter::new(File::create(path)?);
    let sources: Vec<&String> = rows
        .first()
        .map(|r| r.generation.keys().collect())
        .unwrap_or_default();
    write!(out, "timestamp")?;
    for source in &sources {
        write!(out, ",{source}")?;
    }
    writeln!(out)?;
    for row in rows {
        write!(out, "{}", row.stamp)?;
        for source in &sources {
            write!(
                out,
                ",{}",
                row.generation.get(*source).copied().unwrap_or(0.0)
            )?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

/// Write an hourly series as `timestamp,<column>` rows.
pub fn write_series(path: &Path, series: &HourlySeries, column: &str) -> Result<(), IngestError> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "timestamp,{column}")?;
    for (stamp, value) in series.stamps().zip(series.values()) {
        writeln!(out, "{stamp},{value}")?;
    }
    out.flush()?;
    Ok(())
}

/// Write forecast batches in the `origin_timestamp,h1..hH` format.
pub fn write_forecast_table(path: &Path, batches: &[ForecastBatch]) -> Result<(), IngestError> {
    let mut out = BufWriter::new(File::create(path)?);
    let horizon = batches.first().map_or(0, ForecastBatch::horizon);
    write!(out, "origin_timestamp")?;
    for h in 1..=horizon {
        write!(out, ",h{h}")?;
    }
    writeln!(out)?;
    for batch in batches {
        write!(out, "{}", batch.origin)?;
        for value in batch.predictions() {
            write!(out, ",{value}")?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use tempfile::TempDir;

    fn region() -> RegionId {
        RegionId::new("CISO").unwrap()
    }

    fn write_file(dir: &TempDir, name: &str, content: &str) -> std::path::PathBuf {
        let path = dir.path().join(name);
        let mut f = File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    fn factors(pairs: &[(&str, f64)]) -> EmissionFactorTable {
        EmissionFactorTable::new(pairs.iter().map(|(s, f)| (s.to_string(), *f)).collect()).unwrap()
    }

    #[test]
    fn parse_mix_two_rows() {
        let dir = TempDir::new().unwrap();
        let path = write_file(
            &dir,
            "mix.csv",
            "timestamp,solar,gas\n2022-07-01T00:00:00Z,10,90\n2022-07-01T01:00:00Z,20,80\n",
        );
        let (rows, log) = parse_mix_table(&path).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(log.is_empty());
        assert_eq!(rows[0].generation["solar"], 10.0);
        assert_eq!(rows[1].generation["gas"], 80.0);
        assert_eq!(rows[1].stamp.0 - rows[0].stamp.0, 1);
    }

    #[test]
    fn short_gap_is_filled_and_logged() {
        let dir = TempDir::new().unwrap();
        let path = write_file(
            &dir,
            "mix.csv",
            "timestamp,solar,gas\n\
             2022-07-01T00:00:00Z,10,90\n\
             2022-07-01T03:00:00Z,20,80\n",
        );
        let (rows, log) = parse_mix_table(&path).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(log.len(), 2);
        assert!(log.contains(rows[1].stamp));
        assert!(log.contains(rows[2].stamp));
        // filled rows copy the previous observation
        assert_eq!(rows[1].generation, rows[0].generation);
        assert_eq!(rows[2].generation, rows[0].generation);
    }

    #[test]
    fn long_gap_is_an_error() {
        let dir = TempDir::new().unwrap();
        let path = write_file(
            &dir,
            "truth.csv",
            "timestamp,carbon_intensity\n\
             2022-07-01T00:00:00Z,400\n\
             2022-07-01T05:00:00Z,410\n",
        );
        let err = parse_truth_table(&path, &region()).unwrap_err();
        assert!(
            matches!(err, IngestError::GapTooLarge { hours: 4, .. }),
            "{err}"
        );
    }

    #[test]
    fn negative_generation_names_row_and_column() {
        let dir = TempDir::new().unwrap();
        let path = write_file(
            &dir,
            "mix.csv",
            "timestamp,solar,gas\n2022-07-01T00:00:00Z,10,-5\n",
        );
        let err = parse_mix_table(&path).unwrap_err();
        let text = err.to_string();
        assert!(text.contains("line 2"), "{text}");
        assert!(text.contains("gas"), "{text}");
    }

    #[test]
    fn mix_single_source_equals_factor() {
        let rows = vec![SourceMixRow {
            stamp: HourlyStamp(0),
            generation: [("gas".to_string(), 100.0)].into_iter().collect(),
        }];
        let series =
            mix_to_carbon_intensity(&region(), &rows, &factors(&[("gas", 490.0)])).unwrap();
        assert_eq!(series.values(), &[490.0]);
    }

    #[test]
    fn mix_weighted_average() {
        let rows = vec![SourceMixRow {
            stamp: HourlyStamp(0),
            generation: [("coal".to_string(), 50.0), ("wind".to_string(), 50.0)]
                .into_iter()
                .collect(),
        }];
        let table = factors(&[("coal", 820.0), ("wind", 11.0)]);
        let series = mix_to_carbon_intensity(&region(), &rows, &table).unwrap();
        assert_eq!(series.values(), &[415.5]);
    }

    #[test]
    fn mix_zero_generation_and_missing_factor() {
        let zero = vec![SourceMixRow {
            stamp: HourlyStamp(7),
            generation: [("gas".to_string(), 0.0)].into_iter().collect(),
        }];
        let table = factors(&[("gas", 490.0)]);
        assert!(matches!(
            mix_to_carbon_intensity(&region(), &zero, &table),
            Err(IngestError::ZeroGeneration(HourlyStamp(7)))
        ));

        let rows = vec![SourceMixRow {
            stamp: HourlyStamp(0),
            generation: [("nuclear".to_string(), 10.0)].into_iter().collect(),
        }];
        assert!(matches!(
            mix_to_carbon_intensity(&region(), &rows, &table),
            Err(IngestError::MissingFactor(s)) if s == "nuclear"
        ));
    }

    #[test]
    fn parse_forecast_batches() {
        let dir = TempDir::new().unwrap();
        let header: String = std::iter::once("origin_timestamp".to_string())
            .chain((1..=24).map(|h| format!("h{h}")))
            .collect::<Vec<_>>()
            .join(",");
        let row = |ts: &str| {
            std::iter::once(ts.to_string())
                .chain((1..=24).map(|h| format!("{}", 400 + h)))
                .collect::<Vec<_>>()
                .join(",")
        };
        let content = format!(
            "{header}\n{}\n{}\n",
            row("2022-07-02T00:00:00Z"),
            row("2022-07-01T00:00:00Z")
        );
        let path = write_file(&dir, "fc.csv", &content);
        let batches = parse_forecast_table(&path, &region()).unwrap();
        assert_eq!(batches.len(), 2);
        assert_eq!(batches[0].horizon(), 24);
        // sorted by origin even though the file was not
        assert!(batches[0].origin < batches[1].origin);
        assert_eq!(batches[0].prediction_at(1), Some(401.0));
    }

    #[test]
    fn mixed_horizons_are_rejected() {
        let dir = TempDir::new().unwrap();
        let path = write_file(
            &dir,
            "fc.csv",
            "origin_timestamp,h1,h2\n2022-07-01T00:00:00Z,1,2\n2022-07-02T00:00:00Z,1,2,3\n",
        );
        let err = parse_forecast_table(&path, &region()).unwrap_err();
        assert!(matches!(
            err,
            IngestError::InconsistentHorizon {
                line: 3,
                expected: 2,
                got: 3
            }
        ));
    }

    #[test]
    fn parse_96_hour_batches() {
        let dir = TempDir::new().unwrap();
        let header: String = std::iter::once("origin_timestamp".to_string())
            .chain((1..=96).map(|h| format!("h{h}")))
            .collect::<Vec<_>>()
            .join(",");
        let row: String = std::iter::once("2022-07-01T00:00:00Z".to_string())
            .chain((1..=96).map(|h| format!("{h}")))
            .collect::<Vec<_>>()
            .join(",");
        let path = write_file(&dir, "fc96.csv", &format!("{header}\n{row}\n"));
        let batches = parse_forecast_table(&path, &region()).unwrap();
        assert_eq!(batches[0].horizon(), 96);
        assert_eq!(batches[0].prediction_at(96), Some(96.0));
    }

    #[test]
    fn power_trace_flat_and_out_of_range() {
        let dir = TempDir::new().unwrap();
        let flat = write_file(
            &dir,
            "power.csv",
            "timestamp,normalized_power\n2022-07-01T00:00:00Z,1.0\n2022-07-01T01:00:00Z,1.0\n",
        );
        let (trace, log) = parse_power_trace(&flat, &region(), 20.0).unwrap();
        assert!(log.is_empty());
        assert_eq!(trace.megawatts_at(trace.start), Some(20.0));

        let zero = write_file(
            &dir,
            "zero.csv",
            "timestamp,normalized_power\n2022-07-01T00:00:00Z,0.0\n",
        );
        let (trace, _) = parse_power_trace(&zero, &region(), 20.0).unwrap();
        assert_eq!(trace.megawatts_at(trace.start), Some(0.0));

        let bad = write_file(
            &dir,
            "bad.csv",
            "timestamp,normalized_power\n2022-07-01T00:00:00Z,1.2\n",
        );
        let err = parse_power_trace(&bad, &region(), 20.0).unwrap_err();
        assert!(matches!(
            err,
            IngestError::ValueOutOfUnitRange { line: 2, .. }
        ));
    }

    #[test]
    fn shipped_default_factor_table_parses() {
        let path =
            std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/emission_factors.csv");
        let table = EmissionFactorTable::parse(&path).unwrap();
        for source in [
            "coal",
            "natural_gas",
            "nuclear",
            "hydro",
            "wind",
            "solar",
            "petroleum",
        ] {
            assert!(table.factor(source).is_some(), "missing {source}");
        }
        assert!(table.factor("coal").unwrap() > table.factor("wind").unwrap());
    }

    #[test]
    fn fill_log_round_trips() {
        let dir = TempDir::new().unwrap();
        let log = FillLog {
            filled: vec![HourlyStamp(100), HourlyStamp(101), HourlyStamp(500)],
        };
        let path = dir.path().join("fills.csv");
        log.write(&path).unwrap();
        assert_eq!(FillLog::read(&path).unwrap(), log);
    }

    proptest! {
        // scaling every source at an hour by c > 0 leaves CI unchanged
        #[test]
        fn ci_scale_invariant(
            gens in proptest::collection::vec(0.1f64..1e4, 2..6),
            scale in 0.1f64..100.0,
        ) {
            let table = factors(&[("s0", 820.0), ("s1", 490.0), ("s2", 230.0), ("s3", 24.0), ("s4", 11.0), ("s5", 12.0)]);
            let row = |mult: f64| SourceMixRow {
                stamp: HourlyStamp(0),
                generation: gens
                    .iter()
                    .enumerate()
                    .map(|(i, &g)| (format!("s{i}"), g * mult))
                    .collect(),
            };
            let base = mix_to_carbon_intensity(&region(), &[row(1.0)], &table).unwrap();
            let scaled = mix_to_carbon_intensity(&region(), &[row(scale)], &table).unwrap();
            let rel = (base.values()[0] - scaled.values()[0]).abs() / base.values()[0];
            prop_assert!(rel < 1e-12, "relative difference {rel}");
        }

        // CI stays within the factor range of the generating sources
        #[test]
        fn ci_bounded_by_factors(
            gens in proptest::collection::vec(0.0f64..1e4, 3),
        ) {
            prop_assume!(gens.iter().sum::<f64>() > 0.0);
            let table = factors(&[("a", 820.0), ("b", 490.0), ("c", 11.0)]);
            let row = SourceMixRow {
                stamp: HourlyStamp(0),
                generation: ["a", "b", "c"]
                    .iter()
                    .zip(&gens)
                    .map(|(s, &g)| (s.to_string(), g))
                    .collect(),
            };
            let active: Vec<f64> = ["a", "b", "c"]
                .iter()
                .zip(&gens)
                .filter(|(_, &g)| g > 0.0)
                .map(|(s, _)| table.factor(s).unwrap())
                .collect();
            let lo = active.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = active.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let ci = mix_to_carbon_intensity(&region(), &[row], &table).unwrap().values()[0];
            prop_assert!(ci >= lo - 1e-9 && ci <= hi + 1e-9, "{lo} <= {ci} <= {hi}");
        }

        // writing parsed rows and re-parsing reproduces values bit-for-bit
        #[test]
        fn mix_round_trip_bit_exact(
            raw in proptest::collection::vec((0.0f64..1e6, 0.0f64..1e6), 1..20),
        ) {
            let rows: Vec<SourceMixRow> = raw
                .iter()
                .enumerate()
                .map(|(i, &(solar, gas))| SourceMixRow {
                    stamp: HourlyStamp(i as i64),
                    generation: [("gas".to_string(), gas), ("solar".to_string(), solar)]
                        .into_iter()
                        .collect(),
                })
                .collect();
            let dir = TempDir::new().unwrap();
            let path = dir.path().join("mix.csv");
            write_mix_table(&path, &rows).unwrap();
            let (reparsed, log) = parse_mix_table(&path).unwrap();
            prop_assert!(log.is_empty());
            prop_assert_eq!(reparsed, rows);
        }

        #[test]
        fn forecast_round_trip_bit_exact(
            raw in proptest::collection::vec(
                proptest::collection::vec(-1e4f64..1e4, 4),
                1..10,
            ),
        ) {
            let batches: Vec<ForecastBatch> = raw
                .iter()
                .enumerate()
                .map(|(i, preds)| {
                    ForecastBatch::new(region(), HourlyStamp(i as i64 * 24), preds.clone())
                        .unwrap()
                })
                .collect();
            let dir = TempDir::new().unwrap();
            let path = dir.path().join("fc.csv");
            write_forecast_table(&path, &batches).unwrap();
            let reparsed = parse_forecast_table(&path, &region()).unwrap();
            prop_assert_eq!(reparsed, batches);
        }
    }
}
