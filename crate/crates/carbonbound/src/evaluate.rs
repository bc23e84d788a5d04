//! Coverage and interval-quality metrics.
//!
//! Coverage uses closed bounds: a truth sitting exactly on an interval
//! edge counts as covered. The four-way breakdown classifies every hour by
//! whether the interval covers the truth and whether it covers the point
//! forecast, so the cells always partition 100%.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use thiserror::Error;

use crate::ingest::FillLog;
use crate::timeseries::{HourlySeries, HourlyStamp, IntervalSeries, RegionId};

#[derive(Debug, Error)]
pub enum EvaluateError {
    #[error("interval range [{intervals_start}, {intervals_end}) and series range [{series_start}, {series_end}) do not overlap")]
    AlignmentError {
        intervals_start: HourlyStamp,
        intervals_end: HourlyStamp,
        series_start: HourlyStamp,
        series_end: HourlyStamp,
    },
    #[error("all overlapping hours were excluded by the fill log")]
    NothingToScore,
}

/// Per-hour classification shared by coverage and the breakdown.
struct Classified {
    n: usize,
    truth_covered: usize,
    cells: [usize; 4], // [t_cov&p_cov, t_cov&p_unc, t_unc&p_cov, t_unc&p_unc]
}

fn classify(
    intervals: &IntervalSeries,
    truth: &HourlySeries,
    points: Option<&HourlySeries>,
    exclude: Option<&FillLog>,
) -> Result<Classified, EvaluateError> {
    let misaligned = || EvaluateError::AlignmentError {
        intervals_start: intervals.start(),
        intervals_end: intervals.end(),
        series_start: truth.start(),
        series_end: truth.end(),
    };
    let mut start = intervals.start().max(truth.start());
    let mut end = intervals.end().min(truth.end());
    if let Some(p) = points {
        start = start.max(p.start());
        end = end.min(p.end());
    }
    if start >= end {
        return Err(misaligned());
    }

    let mut out = Classified {
        n: 0,
        truth_covered: 0,
        cells: [0; 4],
    };
    let mut stamp = start;
    while stamp < end {
        if !exclude.is_some_and(|log| log.contains(stamp)) {
            let interval = intervals.at(stamp).expect("stamp in range");
            let y = truth.at(stamp).expect("stamp in range");
            let t_cov = interval.covers(y);
            out.n += 1;
            if t_cov {
                out.truth_covered += 1;
            }
            if let Some(p) = points {
                let p_cov = interval.covers(p.at(stamp).expect("stamp in range"));
                let cell = match (t_cov, p_cov) {
                    (true, true) => 0,
                    (true, false) => 1,
                    (false, true) => 2,
                    (false, false) => 3,
                };
                out.cells[cell] += 1;
            }
        }
        stamp = stamp.offset(1);
    }
    if out.n == 0 {
        return Err(EvaluateError::NothingToScore);
    }
    Ok(out)
}

/// Percentage of hours whose interval contains the true value.
pub fn coverage(intervals: &IntervalSeries, truth: &HourlySeries) -> Result<f64, EvaluateError> {
    coverage_excluding(intervals, truth, None)
}

/// Coverage with forward-filled hours dropped from the statistic.
pub fn coverage_excluding(
    intervals: &IntervalSeries,
    truth: &HourlySeries,
    exclude: Option<&FillLog>,
) -> Result<f64, EvaluateError> {
    let c = classify(intervals, truth, None, exclude)?;
    Ok(c.truth_covered as f64 * 100.0 / c.n as f64)
}

/// Four-way coverage breakdown in percent, plus the overall coverage.
///
/// `t_*` says whether the interval covered the truth, `p_*` whether it
/// covered the point forecast. Cells sum to 100 and
/// `coverage_percent = t_cov_p_cov + t_cov_p_uncov` by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageBreakdown {
    pub coverage_percent: f64,
    pub t_cov_p_cov: f64,
    pub t_cov_p_uncov: f64,
    pub t_uncov_p_cov: f64,
    pub t_uncov_p_uncov: f64,
    pub n: usize,
}

pub fn breakdown(
    intervals: &IntervalSeries,
    truth: &HourlySeries,
    points: &HourlySeries,
) -> Result<CoverageBreakdown, EvaluateError> {
    breakdown_excluding(intervals, truth, points, None)
}

pub fn breakdown_excluding(
    intervals: &IntervalSeries,
    truth: &HourlySeries,
    points: &HourlySeries,
    exclude: Option<&FillLog>,
) -> Result<CoverageBreakdown, EvaluateError> {
    let c = classify(intervals, truth, Some(points), exclude)?;
    let pct = |count: usize| count as f64 * 100.0 / c.n as f64;
    Ok(CoverageBreakdown {
        coverage_percent: pct(c.truth_covered),
        t_cov_p_cov: pct(c.cells[0]),
        t_cov_p_uncov: pct(c.cells[1]),
        t_uncov_p_cov: pct(c.cells[2]),
        t_uncov_p_uncov: pct(c.cells[3]),
        n: c.n,
    })
}

/// Mean, median, and max interval width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WidthStats {
    pub mean: f64,
    pub median: f64,
    pub max: f64,
}

pub fn width_stats(intervals: &IntervalSeries) -> WidthStats {
    let mut widths: Vec<f64> = intervals.intervals().iter().map(|i| i.width()).collect();
    widths.sort_unstable_by(f64::total_cmp);
    let n = widths.len();
    let median = if n % 2 == 1 {
        widths[n / 2]
    } else {
        0.5 * (widths[n / 2 - 1] + widths[n / 2])
    };
    WidthStats {
        mean: widths.iter().sum::<f64>() / n as f64,
        median,
        max: widths[n - 1],
    }
}

/// One labelled breakdown row of the coverage report.
#[derive(Debug, Clone)]
pub struct BreakdownRow {
    pub region: RegionId,
    pub alpha: f64,
    pub breakdown: CoverageBreakdown,
}

/// Emit breakdown rows in a table mirroring the four-cell layout,
/// percentages to two decimals.
pub fn write_breakdown_report(path: &Path, rows: &[BreakdownRow]) -> std::io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(
        out,
        "region,alpha,coverage,t_cov_p_cov,t_cov_p_uncov,t_uncov_p_cov,t_uncov_p_uncov,n"
    )?;
    for row in rows {
        let b = &row.breakdown;
        writeln!(
            out,
            "{},{},{:.2},{:.2},{:.2},{:.2},{:.2},{}",
            row.region,
            row.alpha,
            b.coverage_percent,
            b.t_cov_p_cov,
            b.t_cov_p_uncov,
            b.t_uncov_p_cov,
            b.t_uncov_p_uncov,
            b.n
        )?;
    }
    out.flush()
}
