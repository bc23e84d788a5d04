//! Baseline point forecasters and forecast-accuracy analyses.
//!
//! The forecasters stand in for any external prediction model: they only
//! need history through the forecast origin and produce multi-horizon
//! batches in the same shape an imported forecast file does. Accuracy is
//! measured as MAPE, grouped by UTC day, by season, or by horizon bucket.

use chrono::{Datelike, NaiveDate};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use thiserror::Error;

use crate::ingest::FillLog;
use crate::timeseries::{align, ForecastBatch, HourlySeries, HourlyStamp, SeriesError};

#[derive(Debug, Error)]
pub enum ForecastError {
    #[error("history [{have_start}, {have_end}) does not cover [{need_start}, {need_end}) required by the forecaster")]
    InsufficientHistory {
        need_start: HourlyStamp,
        need_end: HourlyStamp,
        have_start: HourlyStamp,
        have_end: HourlyStamp,
    },
    #[error("truth value at index {0} is zero; MAPE is undefined")]
    ZeroTruthValue(usize),
    #[error("length mismatch: {left} predictions vs {right} truths")]
    LengthMismatch { left: usize, right: usize },
    #[error("expected horizon {expected}, found batch with horizon {got}")]
    HorizonMismatch { expected: usize, got: usize },
    #[error("truth series does not cover target hour {0}")]
    TruthMissing(HourlyStamp),
    #[error("date {0} outside the July-December study range")]
    DateOutOfStudyRange(NaiveDate),
    #[error("empty input")]
    EmptyInput,
    #[error("bad forecaster: {0}")]
    BadForecaster(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Built-in point forecasters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForecasterSpec {
    /// Repeat the value observed at the same hour of day in the most
    /// recent fully observed day.
    SeasonalNaive24h,
    /// Repeat the value observed exactly one week before the target hour.
    SameHourLastWeek,
    /// Mean of the last `k` observed hours, for every horizon.
    MovingAverage { k: usize },
}

impl ForecasterSpec {
    /// Hours of history required, ending at the forecast origin.
    pub fn lookback(&self) -> usize {
        match self {
            ForecasterSpec::SeasonalNaive24h => 24,
            ForecasterSpec::SameHourLastWeek => 168,
            ForecasterSpec::MovingAverage { k } => *k,
        }
    }
}

/// Accuracy summary for one group of predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyReport {
    pub group_label: String,
    pub mape_percent: f64,
    /// Spread of the per-day (or per-batch) MAPEs within the group,
    /// population convention.
    pub stddev: f64,
    pub n: usize,
}

/// Produce an `H`-hour forecast batch from history ending at `origin`.
pub fn forecast(
    spec: ForecasterSpec,
    history: &HourlySeries,
    origin: HourlyStamp,
    horizon: usize,
) -> Result<ForecastBatch, ForecastError> {
    if horizon == 0 {
        return Err(ForecastError::EmptyInput);
    }
    if matches!(spec, ForecasterSpec::MovingAverage { k: 0 }) {
        return Err(ForecastError::BadForecaster(
            "moving average needs k >= 1".into(),
        ));
    }
    let lookback = spec.lookback().max(1);
    let need_start = origin.offset(-(lookback as i64) + 1);
    let need_end = origin.offset(1);
    if need_start < history.start() || need_end > history.end() {
        return Err(ForecastError::InsufficientHistory {
            need_start,
            need_end,
            have_start: history.start(),
            have_end: history.end(),
        });
    }

    let value_at = |stamp: HourlyStamp| {
        history
            .at(stamp)
            .expect("stamp inside the validated lookback range")
    };
    let predictions: Vec<f64> = match spec {
        ForecasterSpec::SeasonalNaive24h => (1..=horizon)
            .map(|h| value_at(origin.offset(-23 + ((h as i64 - 1) % 24))))
            .collect(),
        ForecasterSpec::SameHourLastWeek => {
            if horizon > 168 {
                return Err(ForecastError::InsufficientHistory {
                    need_start,
                    need_end: origin.offset(horizon as i64 - 168 + 1),
                    have_start: history.start(),
                    have_end: history.end(),
                });
            }
            (1..=horizon)
                .map(|h| value_at(origin.offset(h as i64 - 168)))
                .collect()
        }
        ForecasterSpec::MovingAverage { k } => {
            let sum: f64 = (0..k as i64).map(|i| value_at(origin.offset(-i))).sum();
            vec![sum / k as f64; horizon]
        }
    };
    Ok(ForecastBatch::new(
        history.region().clone(),
        origin,
        predictions,
    )?)
}

/// Mean absolute percentage error, in percent.
pub fn mape(pred: &[f64], truth: &[f64]) -> Result<f64, ForecastError> {
    if pred.len() != truth.len() {
        return Err(ForecastError::LengthMismatch {
            left: pred.len(),
            right: truth.len(),
        });
    }
    if pred.is_empty() {
        return Err(ForecastError::EmptyInput);
    }
    let mut total = 0.0;
    for (i, (&p, &t)) in pred.iter().zip(truth).enumerate() {
        if t == 0.0 {
            return Err(ForecastError::ZeroTruthValue(i));
        }
        total += ((t - p) / t).abs();
    }
    Ok(total * 100.0 / pred.len() as f64)
}

const BUCKETS: [(usize, usize, &str); 4] = [
    (1, 24, "1-24h"),
    (25, 48, "25-48h"),
    (49, 72, "49-72h"),
    (73, 96, "73-96h"),
];

/// Split 96-hour batches into four 24-hour horizon buckets and report the
/// MAPE of each, pooled over all batches. The stddev is taken over the
/// per-batch bucket MAPEs.
pub fn horizon_bucket_mape(
    batches: &[ForecastBatch],
    truth: &HourlySeries,
) -> Result<Vec<AccuracyReport>, ForecastError> {
    if batches.is_empty() {
        return Err(ForecastError::EmptyInput);
    }
    for batch in batches {
        if batch.horizon() != 96 {
            return Err(ForecastError::HorizonMismatch {
                expected: 96,
                got: batch.horizon(),
            });
        }
    }

    let mut pooled_ape: [Vec<f64>; 4] = Default::default();
    let mut batch_mapes: [Vec<f64>; 4] = Default::default();
    for batch in batches {
        for (bucket, &(from, to, _)) in BUCKETS.iter().enumerate() {
            let mut apes = Vec::with_capacity(24);
            for h in from..=to {
                let target = batch.target(h);
                let y = truth
                    .at(target)
                    .ok_or(ForecastError::TruthMissing(target))?;
                if y == 0.0 {
                    return Err(ForecastError::ZeroTruthValue(h - 1));
                }
                let p = batch.prediction_at(h).expect("h within horizon");
                apes.push(((y - p) / y).abs());
            }
            let batch_mape = apes.iter().sum::<f64>() * 100.0 / apes.len() as f64;
            batch_mapes[bucket].push(batch_mape);
            pooled_ape[bucket].extend(apes);
        }
    }

    Ok(BUCKETS
        .iter()
        .enumerate()
        .map(|(bucket, &(_, _, label))| {
            let apes = &pooled_ape[bucket];
            let mape_percent = apes.iter().sum::<f64>() * 100.0 / apes.len() as f64;
            AccuracyReport {
                group_label: label.to_string(),
                mape_percent,
                stddev: population_stddev(&batch_mapes[bucket]),
                n: apes.len(),
            }
        })
        .collect())
}

fn population_stddev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64;
    var.sqrt()
}

fn season_of(date: NaiveDate) -> Result<&'static str, ForecastError> {
    match date.month() {
        7 | 8 => Ok("summer"),
        9 | 10 => Ok("fall"),
        11 | 12 => Ok("winter"),
        _ => Err(ForecastError::DateOutOfStudyRange(date)),
    }
}

/// Group daily MAPEs into summer (Jul-Aug), fall (Sep-Oct), and winter
/// (Nov-Dec), reporting mean and standard deviation over days.
pub fn seasonal_group_stats(
    daily_mapes: &[(NaiveDate, f64)],
) -> Result<Vec<AccuracyReport>, ForecastError> {
    if daily_mapes.is_empty() {
        return Err(ForecastError::EmptyInput);
    }
    let mut groups: [Vec<f64>; 3] = Default::default();
    for &(date, value) in daily_mapes {
        let idx = match season_of(date)? {
            "summer" => 0,
            "fall" => 1,
            _ => 2,
        };
        groups[idx].push(value);
    }
    Ok(["summer", "fall", "winter"]
        .iter()
        .zip(&groups)
        .filter(|(_, values)| !values.is_empty())
        .map(|(label, values)| AccuracyReport {
            group_label: label.to_string(),
            mape_percent: values.iter().sum::<f64>() / values.len() as f64,
            stddev: population_stddev(values),
            n: values.len(),
        })
        .collect())
}

/// MAPE per complete UTC day of the overlap between predictions and truth.
///
/// Hours recorded in the fill log are excluded so interpolated values do
/// not flatter the forecaster; a day with every hour excluded is dropped.
pub fn daily_mape(
    pred: &HourlySeries,
    truth: &HourlySeries,
    fills: Option<&FillLog>,
) -> Result<Vec<(NaiveDate, f64)>, ForecastError> {
    let (pred, truth) = align(pred, truth)?;
    let mut out = Vec::new();
    let mut day_start = pred.start().day_start();
    if day_start < pred.start() {
        day_start = day_start.offset(24);
    }
    while day_start.offset(24) <= pred.end() {
        let mut apes = Vec::with_capacity(24);
        for i in 0..24 {
            let stamp = day_start.offset(i);
            if fills.is_some_and(|log| log.contains(stamp)) {
                continue;
            }
            let p = pred.at(stamp).expect("stamp within aligned range");
            let t = truth.at(stamp).expect("stamp within aligned range");
            if t == 0.0 {
                return Err(ForecastError::ZeroTruthValue(i as usize));
            }
            apes.push(((t - p) / t).abs());
        }
        if !apes.is_empty() {
            let date = day_start.to_datetime().date_naive();
            out.push((date, apes.iter().sum::<f64>() * 100.0 / apes.len() as f64));
        }
        day_start = day_start.offset(24);
    }
    Ok(out)
}

/// Emit reports as `group,mape_percent,stddev,n`.
pub fn write_accuracy_reports(path: &Path, reports: &[AccuracyReport]) -> std::io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "group,mape_percent,stddev,n")?;
    for report in reports {
        writeln!(
            out,
            "{},{:.2},{:.2},{}",
            report.group_label, report.mape_percent, report.stddev, report.n
        )?;
    }
    out.flush()
}
