//! End-to-end orchestration behind the command-line interface.
//!
//! Every subcommand works against a workspace directory: `ingest`
//! normalizes the configured input files into it, `forecast` writes
//! baseline forecast batches, `run` produces interval files plus coverage
//! and width reports, `shift` replays the load-shifting case studies, and
//! `report` re-derives the evaluation tables from stored artifacts.
//! All outputs are deterministic for a fixed config and seed.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::config::PipelineConfig;
use crate::conformal::{spci_run_multi, ConformalError, SpciConfig};
use crate::evaluate::{
    breakdown_excluding, width_stats, write_breakdown_report, BreakdownRow, EvaluateError,
    WidthStats,
};
use crate::forecast::{
    daily_mape, forecast, horizon_bucket_mape, seasonal_group_stats, write_accuracy_reports,
    ForecastError, ForecasterSpec,
};
use crate::ingest::{
    mix_to_carbon_intensity, parse_forecast_table, parse_mix_table, parse_power_trace,
    parse_truth_table, write_forecast_table, write_mix_table, write_series, EmissionFactorTable,
    FillLog, IngestError, PowerTrace,
};
use crate::shiftsim::{
    day_totals, spatial_shift_sim, temporal_shift_sim, write_cases, write_summary, DayTotals,
    MisleadingDirection, ShiftError, ShiftPolicy, ShiftSummaryRow,
};
use crate::timeseries::{
    ForecastBatch, HourlySeries, HourlyStamp, Interval, IntervalSeries, RegionId, SeriesError, Unit,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Input {
        path: PathBuf,
        #[source]
        source: IngestError,
    },
    #[error("missing {0}; run the earlier pipeline stages first")]
    MissingInput(PathBuf),
    #[error("region {region}: test split [{from}, {to}) contains no usable hours")]
    EmptyTestSplit {
        region: RegionId,
        from: HourlyStamp,
        to: HourlyStamp,
    },
    #[error("region {region}: calibration yields {have} residuals but window_capacity is {needed}; extend the calibration split or lower spci.window_capacity")]
    CalibrationTooShort {
        region: RegionId,
        needed: usize,
        have: usize,
    },
    #[error("interval file {path}: {message}")]
    BadIntervalFile { path: PathBuf, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Forecast(#[from] ForecastError),
    #[error(transparent)]
    Conformal(#[from] ConformalError),
    #[error(transparent)]
    Evaluate(#[from] EvaluateError),
    #[error(transparent)]
    Shift(#[from] ShiftError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

fn with_path<T>(path: &Path, result: Result<T, IngestError>) -> Result<T, PipelineError> {
    result.map_err(|source| PipelineError::Input {
        path: path.to_path_buf(),
        source,
    })
}

/// Shift case-study mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftMode {
    Temporal,
    Spatial,
}

/// Workspace paths for one run.
pub struct Workspace {
    root: PathBuf,
}

impl Workspace {
    pub fn new(root: &Path) -> Self {
        Workspace {
            root: root.to_path_buf(),
        }
    }

    fn region_dir(&self, region: &RegionId) -> PathBuf {
        self.root.join(region.as_str())
    }

    pub fn truth(&self, region: &RegionId) -> PathBuf {
        self.region_dir(region).join("truth.csv")
    }

    pub fn fills(&self, region: &RegionId) -> PathBuf {
        self.region_dir(region).join("fills.csv")
    }

    pub fn forecasts(&self, region: &RegionId) -> PathBuf {
        self.region_dir(region).join("forecasts.csv")
    }

    pub fn mix(&self, region: &RegionId) -> PathBuf {
        self.region_dir(region).join("mix.csv")
    }

    pub fn power(&self) -> PathBuf {
        self.root.join("power.csv")
    }

    pub fn power_fills(&self) -> PathBuf {
        self.root.join("power_fills.csv")
    }

    pub fn reports_dir(&self) -> PathBuf {
        self.root.join("reports")
    }

    pub fn intervals(&self, region: &RegionId, alpha: f64) -> PathBuf {
        self.reports_dir()
            .join(format!("intervals_{}_a{}.csv", region, alpha))
    }

    fn load_truth(&self, region: &RegionId) -> Result<(HourlySeries, FillLog), PipelineError> {
        let truth_path = self.truth(region);
        if !truth_path.exists() {
            return Err(PipelineError::MissingInput(truth_path));
        }
        let (series, _) = with_path(&truth_path, parse_truth_table(&truth_path, region))?;
        let fills_path = self.fills(region);
        let fills = if fills_path.exists() {
            with_path(&fills_path, FillLog::read(&fills_path))?
        } else {
            FillLog::default()
        };
        Ok((series, fills))
    }

    fn load_power(&self, region: &RegionId, peak_mw: f64) -> Result<PowerTrace, PipelineError> {
        let path = self.power();
        if !path.exists() {
            return Err(PipelineError::MissingInput(path));
        }
        let (trace, _) = with_path(&path, parse_power_trace(&path, region, peak_mw))?;
        Ok(trace)
    }
}

/// Normalize all configured inputs into the workspace with provenance
/// logs. Running twice on unchanged inputs rewrites identical bytes.
pub fn cmd_ingest(config: &PipelineConfig) -> Result<Vec<PathBuf>, PipelineError> {
    let ws = Workspace::new(&config.workspace);
    let mut written = Vec::new();

    let factors = match &config.factors {
        Some(path) => Some(with_path(path, EmissionFactorTable::parse(path))?),
        None => None,
    };

    for region_cfg in &config.regions {
        let region = &region_cfg.code;
        fs::create_dir_all(ws.region_dir(region))?;

        let (truth, fills) = if let Some(path) = &region_cfg.truth {
            with_path(path, parse_truth_table(path, region))?
        } else {
            let mix_path = region_cfg.mix.as_ref().expect("validated by config");
            let (rows, fills) = with_path(mix_path, parse_mix_table(mix_path))?;
            let table = factors.as_ref().expect("validated by config");
            let truth = with_path(mix_path, mix_to_carbon_intensity(region, &rows, table))?;
            let normalized_mix = ws.mix(region);
            with_path(&normalized_mix, write_mix_table(&normalized_mix, &rows))?;
            written.push(normalized_mix);
            (truth, fills)
        };

        let truth_path = ws.truth(region);
        with_path(
            &truth_path,
            write_series(&truth_path, &truth, "carbon_intensity"),
        )?;
        written.push(truth_path);

        let fills_path = ws.fills(region);
        with_path(&fills_path, fills.write(&fills_path))?;
        written.push(fills_path);

        if let Some(path) = &region_cfg.forecasts {
            let batches = with_path(path, parse_forecast_table(path, region))?;
            let out = ws.forecasts(region);
            with_path(&out, write_forecast_table(&out, &batches))?;
            written.push(out);
        }
    }

    if let Some(path) = &config.power {
        let region = &config.regions[0].code;
        let (trace, fills) = with_path(path, parse_power_trace(path, region, config.peak_mw))?;
        let power_path = ws.power();
        let series = HourlySeries::new(
            region.clone(),
            trace.start,
            trace.normalized().to_vec(),
            Unit::Dimensionless,
        )?;
        with_path(
            &power_path,
            write_series(&power_path, &series, "normalized_power"),
        )?;
        written.push(power_path);
        let fills_path = ws.power_fills();
        with_path(&fills_path, fills.write(&fills_path))?;
        written.push(fills_path);
    }

    Ok(written)
}

/// Forecast origins sit at 23:00 UTC so each batch's first 24 targets
/// cover exactly one UTC day.
fn daily_origins(
    truth: &HourlySeries,
    lookback: usize,
    horizon: usize,
    from: HourlyStamp,
    to: HourlyStamp,
) -> Vec<HourlyStamp> {
    let earliest = truth
        .start()
        .offset(lookback as i64 - 1)
        .max(from.offset(-1));
    let mut origin = earliest.day_start().offset(23);
    if origin < earliest {
        origin = origin.offset(24);
    }
    let mut out = Vec::new();
    while origin.offset(1) < to && origin.offset(horizon as i64) < truth.end() {
        out.push(origin);
        origin = origin.offset(24);
    }
    out
}

/// Generate baseline forecast batches into the workspace and write the
/// accuracy reports for the test split.
pub fn cmd_forecast(config: &PipelineConfig) -> Result<Vec<PathBuf>, PipelineError> {
    let ws = Workspace::new(&config.workspace);
    let spec = config.forecaster.spec().map_err(PipelineError::Config)?;
    let horizon = config.forecaster.horizon;
    let mut written = Vec::new();
    fs::create_dir_all(ws.reports_dir())?;

    for region_cfg in &config.regions {
        let region = &region_cfg.code;
        let (truth, fills) = ws.load_truth(region)?;

        let origins = daily_origins(
            &truth,
            spec.lookback(),
            horizon,
            config.split.train_end,
            config.split.test_end,
        );
        let batches: Vec<ForecastBatch> = origins
            .iter()
            .map(|&origin| forecast(spec, &truth, origin, horizon))
            .collect::<Result<_, _>>()?;
        if batches.is_empty() {
            return Err(PipelineError::EmptyTestSplit {
                region: region.clone(),
                from: config.split.train_end,
                to: config.split.test_end,
            });
        }
        let out = ws.forecasts(region);
        with_path(&out, write_forecast_table(&out, &batches))?;
        written.push(out);

        // accuracy over the test split only
        let test_batches: Vec<&ForecastBatch> = batches
            .iter()
            .filter(|b| b.target(1) >= config.split.calibration_end)
            .collect();
        if test_batches.is_empty() {
            continue;
        }
        if let Some(pred) = freshest_prediction_series(&test_batches, region) {
            let days = daily_mape(&pred, &truth, Some(&fills))?;
            let daily_path = ws.reports_dir().join(format!("daily_mape_{region}.csv"));
            write_daily_mape(&daily_path, region, &days)?;
            written.push(daily_path);

            let in_study: Vec<_> = days
                .iter()
                .filter(|(date, _)| {
                    use chrono::Datelike;
                    (7..=12).contains(&date.month())
                })
                .cloned()
                .collect();
            if !in_study.is_empty() {
                let seasonal = seasonal_group_stats(&in_study)?;
                let path = ws.reports_dir().join(format!("seasonal_{region}.csv"));
                write_accuracy_reports(&path, &seasonal)?;
                written.push(path);
            }
        }

        if horizon == 96 {
            let complete: Vec<ForecastBatch> = test_batches
                .iter()
                .filter(|b| truth.at(b.target(96)).is_some())
                .map(|b| (*b).clone())
                .collect();
            if !complete.is_empty() {
                let buckets = horizon_bucket_mape(&complete, &truth)?;
                let path = ws.reports_dir().join(format!("buckets_{region}.csv"));
                write_accuracy_reports(&path, &buckets)?;
                written.push(path);
            }
        }
    }
    Ok(written)
}

/// Hourly point-forecast series built from batches, taking the freshest
/// (smallest-horizon) prediction when several batches cover an hour.
fn freshest_prediction_series(
    batches: &[&ForecastBatch],
    region: &RegionId,
) -> Option<HourlySeries> {
    let mut by_target: std::collections::BTreeMap<i64, (usize, f64)> = Default::default();
    for batch in batches {
        for h in 1..=batch.horizon() {
            let target = batch.target(h).0;
            let candidate = (h, batch.prediction_at(h).expect("h within horizon"));
            by_target
                .entry(target)
                .and_modify(|kept| {
                    if candidate.0 < kept.0 {
                        *kept = candidate;
                    }
                })
                .or_insert(candidate);
        }
    }
    let (&first, _) = by_target.iter().next()?;
    let (&last, _) = by_target.iter().next_back()?;
    if (last - first + 1) as usize != by_target.len() {
        return None; // holes between batches
    }
    let values: Vec<f64> = by_target.values().map(|(_, v)| *v).collect();
    HourlySeries::new(
        region.clone(),
        HourlyStamp(first),
        values,
        Unit::GramsCo2PerKwh,
    )
    .ok()
}

fn write_daily_mape(
    path: &Path,
    region: &RegionId,
    days: &[(chrono::NaiveDate, f64)],
) -> Result<(), PipelineError> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    writeln!(out, "region,date,mape_percent")?;
    for (date, value) in days {
        writeln!(out, "{region},{date},{value:.4}")?;
    }
    out.flush()?;
    Ok(())
}

/// Aligned per-hour streams ready for the sequential loop.
struct PreparedStream {
    start: HourlyStamp,
    horizon_offset: usize,
    forecasts: Vec<f64>,
    truths: Vec<f64>,
    targets: Vec<HourlyStamp>,
    initial: Vec<f64>,
}

fn hourly_stream(
    config: &PipelineConfig,
    region: &RegionId,
    truth: &HourlySeries,
    spec: ForecasterSpec,
) -> Result<PreparedStream, PipelineError> {
    let lookback = spec.lookback() as i64;
    let calib_from = config.split.train_end.max(truth.start().offset(lookback));
    let calib_to = config.split.calibration_end.min(truth.end());
    let mut initial = Vec::new();
    let mut stamp = calib_from;
    while stamp < calib_to {
        let batch = forecast(spec, truth, stamp.offset(-1), 1)?;
        let y = truth.at(stamp).expect("stamp in range");
        initial.push(y - batch.predictions()[0]);
        stamp = stamp.offset(1);
    }
    let needed = config.spci.window_capacity;
    if initial.len() < needed {
        return Err(PipelineError::CalibrationTooShort {
            region: region.clone(),
            needed,
            have: initial.len(),
        });
    }
    let initial = initial.split_off(initial.len() - needed);

    let test_from = config
        .split
        .calibration_end
        .max(truth.start().offset(lookback));
    let test_to = config.split.test_end.min(truth.end());
    let mut forecasts = Vec::new();
    let mut truths = Vec::new();
    let mut targets = Vec::new();
    let mut stamp = test_from;
    while stamp < test_to {
        let batch = forecast(spec, truth, stamp.offset(-1), 1)?;
        forecasts.push(batch.predictions()[0]);
        truths.push(truth.at(stamp).expect("stamp in range"));
        targets.push(stamp);
        stamp = stamp.offset(1);
    }
    if forecasts.is_empty() {
        return Err(PipelineError::EmptyTestSplit {
            region: region.clone(),
            from: config.split.calibration_end,
            to: config.split.test_end,
        });
    }
    Ok(PreparedStream {
        start: test_from,
        horizon_offset: 1,
        forecasts,
        truths,
        targets,
        initial,
    })
}

fn batch_streams(
    config: &PipelineConfig,
    region: &RegionId,
    truth: &HourlySeries,
    batches: &[ForecastBatch],
) -> Result<Vec<PreparedStream>, PipelineError> {
    let horizon = batches.first().map_or(0, ForecastBatch::horizon);
    let mut streams = Vec::with_capacity(horizon);
    for h in 1..=horizon {
        let mut initial = Vec::new();
        let mut forecasts = Vec::new();
        let mut truths = Vec::new();
        let mut targets = Vec::new();
        for batch in batches {
            let target = batch.target(h);
            let Some(y) = truth.at(target) else { continue };
            let pred = batch.prediction_at(h).expect("h within horizon");
            if target >= config.split.train_end && target < config.split.calibration_end {
                initial.push(y - pred);
            } else if target >= config.split.calibration_end && target < config.split.test_end {
                forecasts.push(pred);
                truths.push(y);
                targets.push(target);
            }
        }
        if forecasts.is_empty() {
            return Err(PipelineError::EmptyTestSplit {
                region: region.clone(),
                from: config.split.calibration_end,
                to: config.split.test_end,
            });
        }
        let needed = config.spci.window_capacity;
        if initial.len() < needed {
            return Err(PipelineError::CalibrationTooShort {
                region: region.clone(),
                needed,
                have: initial.len(),
            });
        }
        let initial = initial.split_off(initial.len() - needed);
        streams.push(PreparedStream {
            start: targets[0],
            horizon_offset: h,
            forecasts,
            truths,
            targets,
            initial,
        });
    }
    Ok(streams)
}

/// Run the interval engine for every region and significance level,
/// writing interval files plus the coverage and width reports.
pub fn cmd_run(config: &PipelineConfig) -> Result<Vec<PathBuf>, PipelineError> {
    let ws = Workspace::new(&config.workspace);
    let spec = config.forecaster.spec().map_err(PipelineError::Config)?;
    fs::create_dir_all(ws.reports_dir())?;
    let mut written = Vec::new();
    let mut breakdown_rows = Vec::new();
    let mut width_rows: Vec<(RegionId, f64, WidthStats)> = Vec::new();

    for region_cfg in &config.regions {
        let region = &region_cfg.code;
        let (truth, fills) = ws.load_truth(region)?;

        let forecasts_path = ws.forecasts(region);
        let streams = if forecasts_path.exists() {
            let batches = with_path(
                &forecasts_path,
                parse_forecast_table(&forecasts_path, region),
            )?;
            batch_streams(config, region, &truth, &batches)?
        } else {
            vec![hourly_stream(config, region, &truth, spec)?]
        };

        // one entry per test hour and alpha, keyed by target stamp; the
        // freshest horizon wins when batches overlap
        type HourRecord = (usize, Interval, f64, f64); // (h, interval, pred, truth)
        let mut per_alpha: Vec<std::collections::BTreeMap<i64, HourRecord>> =
            vec![Default::default(); config.alphas.len()];

        for stream in &streams {
            let stream_config = SpciConfig {
                seed: config
                    .spci
                    .seed
                    .wrapping_add((stream.horizon_offset as u64) << 32),
                ..config.spci.clone()
            };
            let series_per_alpha = spci_run_multi(
                &stream_config,
                &config.alphas,
                region,
                stream.start,
                &stream.forecasts,
                &stream.truths,
                &stream.initial,
            )?;
            for (alpha_idx, series) in series_per_alpha.iter().enumerate() {
                for (i, &target) in stream.targets.iter().enumerate() {
                    let record = (
                        stream.horizon_offset,
                        series.intervals()[i],
                        stream.forecasts[i],
                        stream.truths[i],
                    );
                    per_alpha[alpha_idx]
                        .entry(target.0)
                        .and_modify(|kept| {
                            if record.0 < kept.0 {
                                *kept = record;
                            }
                        })
                        .or_insert(record);
                }
            }
        }

        for (alpha_idx, &alpha) in config.alphas.iter().enumerate() {
            let hours = &per_alpha[alpha_idx];
            let (&first, _) = hours.iter().next().expect("nonempty test split");
            let (&last, _) = hours.iter().next_back().expect("nonempty test split");
            if (last - first + 1) as usize != hours.len() {
                return Err(PipelineError::BadIntervalFile {
                    path: ws.intervals(region, alpha),
                    message: "forecast batches leave holes in the test range; intervals must cover contiguous hours".into(),
                });
            }
            let start = HourlyStamp(first);
            let intervals: Vec<Interval> = hours.values().map(|r| r.1).collect();
            let points: Vec<f64> = hours.values().map(|r| r.2).collect();
            let truths: Vec<f64> = hours.values().map(|r| r.3).collect();

            let series = IntervalSeries::new(region.clone(), start, alpha, intervals)?;
            let point_series =
                HourlySeries::new(region.clone(), start, points, Unit::GramsCo2PerKwh)?;
            let truth_series =
                HourlySeries::new(region.clone(), start, truths, Unit::GramsCo2PerKwh)?;

            let path = ws.intervals(region, alpha);
            write_interval_file(&path, &series, &point_series, Some(&truth_series))?;
            written.push(path);

            let b = breakdown_excluding(&series, &truth_series, &point_series, Some(&fills))?;
            breakdown_rows.push(BreakdownRow {
                region: region.clone(),
                alpha,
                breakdown: b,
            });
            width_rows.push((region.clone(), alpha, width_stats(&series)));
        }
    }

    let coverage_path = ws.reports_dir().join("coverage.csv");
    write_breakdown_report(&coverage_path, &breakdown_rows)?;
    written.push(coverage_path);

    let widths_path = ws.reports_dir().join("widths.csv");
    write_width_report(&widths_path, &width_rows)?;
    written.push(widths_path);

    Ok(written)
}

fn write_width_report(
    path: &Path,
    rows: &[(RegionId, f64, WidthStats)],
) -> Result<(), PipelineError> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    writeln!(out, "region,alpha,mean_width,median_width,max_width")?;
    for (region, alpha, stats) in rows {
        writeln!(
            out,
            "{region},{alpha},{:.4},{:.4},{:.4}",
            stats.mean, stats.median, stats.max
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Write one interval file: `target_timestamp,alpha,lower,upper,point_forecast,truth`.
pub fn write_interval_file(
    path: &Path,
    series: &IntervalSeries,
    points: &HourlySeries,
    truths: Option<&HourlySeries>,
) -> Result<(), PipelineError> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    writeln!(
        out,
        "target_timestamp,alpha,lower,upper,point_forecast,truth"
    )?;
    for (i, stamp) in series.stamps().enumerate() {
        let interval = &series.intervals()[i];
        let point = points
            .at(stamp)
            .ok_or_else(|| PipelineError::BadIntervalFile {
                path: path.to_path_buf(),
                message: format!("point forecast missing for {stamp}"),
            })?;
        let truth = truths.and_then(|t| t.at(stamp));
        match truth {
            Some(y) => writeln!(
                out,
                "{stamp},{},{},{},{point},{y}",
                series.alpha(),
                interval.lower,
                interval.upper
            )?,
            None => writeln!(
                out,
                "{stamp},{},{},{},{point},",
                series.alpha(),
                interval.lower,
                interval.upper
            )?,
        }
    }
    out.flush()?;
    Ok(())
}

/// Read an interval file back into a series plus its point forecasts and,
/// when present, truths.
pub fn read_interval_file(
    path: &Path,
    region: &RegionId,
) -> Result<(IntervalSeries, HourlySeries, Option<HourlySeries>), PipelineError> {
    let bad = |message: String| PipelineError::BadIntervalFile {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(|e| bad(e.to_string()))?;
    let mut stamps: Vec<HourlyStamp> = Vec::new();
    let mut alpha: Option<f64> = None;
    let mut intervals = Vec::new();
    let mut points = Vec::new();
    let mut truths: Vec<f64> = Vec::new();
    let mut truth_count = 0usize;

    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| bad(e.to_string()))?;
        if record.len() < 5 {
            return Err(bad(format!("line {line}: expected at least 5 columns")));
        }
        let stamp = HourlyStamp::parse(&record[0]).map_err(|e| bad(format!("line {line}: {e}")))?;
        let field = |idx: usize| -> Result<f64, PipelineError> {
            record[idx]
                .trim()
                .parse()
                .map_err(|_| bad(format!("line {line}: column {idx} is not a number")))
        };
        let row_alpha = field(1)?;
        match alpha {
            None => alpha = Some(row_alpha),
            Some(a) if a != row_alpha => {
                return Err(bad(format!(
                    "line {line}: mixed alphas {a} and {row_alpha}"
                )))
            }
            _ => {}
        }
        intervals.push(
            Interval::new(field(2)?, field(3)?, row_alpha)
                .map_err(|e| bad(format!("line {line}: {e}")))?,
        );
        points.push(field(4)?);
        if record.len() > 5 && !record[5].trim().is_empty() {
            truths.push(field(5)?);
            truth_count += 1;
        }
        stamps.push(stamp);
    }
    if stamps.is_empty() {
        return Err(bad("file has no data rows".into()));
    }
    for pair in stamps.windows(2) {
        if pair[1].0 != pair[0].0 + 1 {
            return Err(bad(format!("hours are not contiguous around {}", pair[1])));
        }
    }
    let alpha = alpha.expect("nonempty");
    let start = stamps[0];
    let series = IntervalSeries::new(region.clone(), start, alpha, intervals)?;
    let point_series = HourlySeries::new(region.clone(), start, points, Unit::GramsCo2PerKwh)?;
    let truth_series = if truth_count == stamps.len() {
        Some(HourlySeries::new(
            region.clone(),
            start,
            truths,
            Unit::GramsCo2PerKwh,
        )?)
    } else if truth_count == 0 {
        None
    } else {
        return Err(bad(
            "truth column must be fully present or fully empty".into()
        ));
    };
    Ok((series, point_series, truth_series))
}

fn misleading_direction(config: &PipelineConfig) -> MisleadingDirection {
    if config.misleading_as_captioned {
        MisleadingDirection::AsCaptioned
    } else {
        MisleadingDirection::ShiftTriggering
    }
}

fn shift_policies(config: &PipelineConfig) -> Result<Vec<ShiftPolicy>, PipelineError> {
    let configured = config.policy().map_err(PipelineError::Config)?;
    let mut policies = vec![ShiftPolicy::Point, ShiftPolicy::IntervalDominance];
    if !policies.contains(&configured) {
        policies.push(configured);
    }
    Ok(policies)
}

/// Replay the temporal or spatial case studies against the stored
/// intervals, once per policy and significance level.
pub fn cmd_shift(config: &PipelineConfig, mode: ShiftMode) -> Result<Vec<PathBuf>, PipelineError> {
    let ws = Workspace::new(&config.workspace);
    fs::create_dir_all(ws.reports_dir())?;
    let policies = shift_policies(config)?;
    let direction = misleading_direction(config);
    let mut written = Vec::new();
    let mut summary_rows: Vec<ShiftSummaryRow> = Vec::new();

    for &alpha in &config.alphas {
        let mut region_days = Vec::new();
        for region_cfg in &config.regions {
            let region = &region_cfg.code;
            let path = ws.intervals(region, alpha);
            if !path.exists() {
                return Err(PipelineError::MissingInput(path));
            }
            let (series, points, truths) = read_interval_file(&path, region)?;
            let truth = match truths {
                Some(t) => t,
                None => ws.load_truth(region)?.0,
            };
            let trace = ws.load_power(region, config.peak_mw)?;
            let days = day_totals(&trace, &points, &truth, &series)?;
            region_days.push((region.clone(), days));
        }

        match mode {
            ShiftMode::Temporal => {
                for (region, days) in &region_days {
                    for &policy in &policies {
                        let report = temporal_shift_sim(region, days, policy, direction)?;
                        let path = ws.reports_dir().join(format!(
                            "shift_temporal_cases_{region}_{policy}_a{alpha}.csv"
                        ));
                        write_cases(&path, &report)?;
                        written.push(path);
                        summary_rows.push(ShiftSummaryRow::from_report(
                            &format!("{region}(d)"),
                            &format!("{region}(d+1)"),
                            alpha,
                            &report,
                        ));
                    }
                }
            }
            ShiftMode::Spatial => {
                for (source_region, source_days) in &region_days {
                    for (target_region, target_days) in &region_days {
                        if source_region == target_region {
                            continue;
                        }
                        let (source_days, target_days) = common_days(source_days, target_days);
                        if source_days.is_empty() {
                            continue;
                        }
                        for &policy in &policies {
                            let report = spatial_shift_sim(
                                source_region,
                                &source_days,
                                target_region,
                                &target_days,
                                policy,
                                direction,
                            )?;
                            let path = ws.reports_dir().join(format!(
                                "shift_spatial_cases_{source_region}_{target_region}_{policy}_a{alpha}.csv"
                            ));
                            write_cases(&path, &report)?;
                            written.push(path);
                            summary_rows.push(ShiftSummaryRow::from_report(
                                source_region.as_str(),
                                target_region.as_str(),
                                alpha,
                                &report,
                            ));
                        }
                    }
                }
            }
        }
    }

    let summary_path = ws.reports_dir().join(match mode {
        ShiftMode::Temporal => "shift_temporal_summary.csv",
        ShiftMode::Spatial => "shift_spatial_summary.csv",
    });
    write_summary(&summary_path, &summary_rows)?;
    written.push(summary_path);
    Ok(written)
}

fn common_days(a: &[DayTotals], b: &[DayTotals]) -> (Vec<DayTotals>, Vec<DayTotals>) {
    let days_b: std::collections::BTreeMap<i64, &DayTotals> =
        b.iter().map(|d| (d.day.0, d)).collect();
    let mut out_a = Vec::new();
    let mut out_b = Vec::new();
    for day in a {
        if let Some(&other) = days_b.get(&day.day.0) {
            out_a.push(day.clone());
            out_b.push(other.clone());
        }
    }
    (out_a, out_b)
}

/// Re-derive the coverage, width, and accuracy tables from artifacts
/// already in the workspace.
pub fn cmd_report(config: &PipelineConfig) -> Result<Vec<PathBuf>, PipelineError> {
    let ws = Workspace::new(&config.workspace);
    fs::create_dir_all(ws.reports_dir())?;
    let mut written = Vec::new();
    let mut breakdown_rows = Vec::new();
    let mut width_rows = Vec::new();

    for region_cfg in &config.regions {
        let region = &region_cfg.code;
        let (truth, fills) = ws.load_truth(region)?;
        for &alpha in &config.alphas {
            let path = ws.intervals(region, alpha);
            if !path.exists() {
                return Err(PipelineError::MissingInput(path));
            }
            let (series, points, stored_truth) = read_interval_file(&path, region)?;
            let truth_series = stored_truth.unwrap_or_else(|| truth.clone());
            let b = breakdown_excluding(&series, &truth_series, &points, Some(&fills))?;
            breakdown_rows.push(BreakdownRow {
                region: region.clone(),
                alpha,
                breakdown: b,
            });
            width_rows.push((region.clone(), alpha, width_stats(&series)));
        }

        let forecasts_path = ws.forecasts(region);
        if forecasts_path.exists() {
            let batches = with_path(
                &forecasts_path,
                parse_forecast_table(&forecasts_path, region),
            )?;
            let refs: Vec<&ForecastBatch> = batches
                .iter()
                .filter(|b| b.target(1) >= config.split.calibration_end)
                .collect();
            if let Some(pred) = freshest_prediction_series(&refs, region) {
                let days = daily_mape(&pred, &truth, Some(&fills))?;
                let daily_path = ws.reports_dir().join(format!("daily_mape_{region}.csv"));
                write_daily_mape(&daily_path, region, &days)?;
                written.push(daily_path);
            }
        }
    }

    let coverage_path = ws.reports_dir().join("coverage.csv");
    write_breakdown_report(&coverage_path, &breakdown_rows)?;
    written.push(coverage_path);
    let widths_path = ws.reports_dir().join("widths.csv");
    write_width_report(&widths_path, &width_rows)?;
    written.push(widths_path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn daily_origins_sit_at_2300_and_cover_the_range() {
        let region = RegionId::new("CISO").unwrap();
        let truth = HourlySeries::new(
            region,
            HourlyStamp(0),
            vec![100.0; 24 * 30],
            Unit::GramsCo2PerKwh,
        )
        .unwrap();
        let origins = daily_origins(&truth, 24, 24, HourlyStamp(24 * 5), HourlyStamp(24 * 20));
        assert!(!origins.is_empty());
        for origin in &origins {
            assert_eq!(origin.hour_of_day(), 23);
            // full lookback available
            assert!(origin.0 - 23 >= 0);
            // targets stay inside the truth range
            assert!(origin.0 + 24 < 24 * 30);
        }
        // consecutive origins are one day apart
        for pair in origins.windows(2) {
            assert_eq!(pair[1].0 - pair[0].0, 24);
        }
    }

    #[test]
    fn freshest_prediction_prefers_smaller_horizon() {
        let region = RegionId::new("CISO").unwrap();
        let a = ForecastBatch::new(region.clone(), HourlyStamp(0), vec![10.0, 11.0]).unwrap();
        let b = ForecastBatch::new(region.clone(), HourlyStamp(1), vec![20.0, 21.0]).unwrap();
        let series = freshest_prediction_series(&[&a, &b], &region).unwrap();
        // hour 2 is covered by a's h=2 (11.0) and b's h=1 (20.0): b wins
        assert_eq!(series.at(HourlyStamp(2)), Some(20.0));
        assert_eq!(series.at(HourlyStamp(1)), Some(10.0));
        assert_eq!(series.at(HourlyStamp(3)), Some(21.0));
    }
}
