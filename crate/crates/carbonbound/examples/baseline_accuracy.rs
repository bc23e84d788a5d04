//! Baseline forecasters and the accuracy analyses: MAPE, seasonal
//! grouping, and 96-hour horizon buckets.
//!
//! Run with: cargo run --release -p carbonbound --example baseline_accuracy

use carbonbound::forecast::{
    daily_mape, forecast, horizon_bucket_mape, mape, seasonal_group_stats, ForecasterSpec,
};
use carbonbound::synthetic::{seasonal_ar1, SyntheticCi};
use carbonbound::timeseries::{HourlySeries, HourlyStamp, RegionId, Unit};

fn main() {
    let region = RegionId::new("ERCO").unwrap();
    // July through December of 2022, hourly
    let start = HourlyStamp::parse("2022-07-01T00:00:00Z").unwrap();
    let truth = seasonal_ar1(&region, start, 24 * 184, SyntheticCi::default(), 5);

    let specs = [
        ("seasonal_naive_24h", ForecasterSpec::SeasonalNaive24h),
        ("same_hour_last_week", ForecasterSpec::SameHourLastWeek),
        (
            "moving_average(24)",
            ForecasterSpec::MovingAverage { k: 24 },
        ),
    ];

    // 24-hour batches issued every evening at 23:00 UTC
    println!("day-ahead MAPE over five months, by forecaster:");
    for (name, spec) in specs {
        let mut all_pred = Vec::new();
        let mut all_truth = Vec::new();
        let mut origin = start.offset(spec.lookback() as i64 + 23);
        while origin.0 % 24 != 23 {
            origin = origin.offset(1);
        }
        while origin.offset(24) < truth.end() {
            let batch = forecast(spec, &truth, origin, 24).unwrap();
            for h in 1..=24 {
                all_pred.push(batch.prediction_at(h).unwrap());
                all_truth.push(truth.at(batch.target(h)).unwrap());
            }
            origin = origin.offset(24);
        }
        println!("  {name:22} {:6.2}%", mape(&all_pred, &all_truth).unwrap());
    }

    // daily MAPE series -> seasonal grouping, using the naive baseline
    let spec = ForecasterSpec::SeasonalNaive24h;
    let mut pred_values = Vec::new();
    let pred_start = start.offset(spec.lookback() as i64);
    let mut stamp = pred_start;
    while stamp < truth.end() {
        let batch = forecast(spec, &truth, stamp.offset(-1), 1).unwrap();
        pred_values.push(batch.predictions()[0]);
        stamp = stamp.offset(1);
    }
    let pred = HourlySeries::new(
        region.clone(),
        pred_start,
        pred_values,
        Unit::GramsCo2PerKwh,
    )
    .unwrap();
    let days = daily_mape(&pred, &truth, None).unwrap();
    println!("\nseasonal day-ahead accuracy (mean +/- stddev over days):");
    for report in seasonal_group_stats(&days).unwrap() {
        println!(
            "  {:7} {:5.2}% +/- {:4.2}  ({} days)",
            report.group_label, report.mape_percent, report.stddev, report.n
        );
    }

    // long-horizon degradation: 96-hour batches, four buckets
    let mut batches = Vec::new();
    let mut origin = start.offset(200);
    for _ in 0..40 {
        batches.push(forecast(spec, &truth, origin, 96).unwrap());
        origin = origin.offset(96);
    }
    let buckets = horizon_bucket_mape(&batches, &truth).unwrap();
    println!(
        "\nhorizon buckets over {} batches of 96 hours:",
        batches.len()
    );
    for report in &buckets {
        println!(
            "  {:7} {:5.2}% +/- {:4.2}",
            report.group_label, report.mape_percent, report.stddev
        );
    }
    let ratio = buckets[3].mape_percent / buckets[0].mape_percent;
    println!("  73-96h vs 1-24h error ratio: {ratio:.2}x");
}
