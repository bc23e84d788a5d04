//! Sequential conformal prediction intervals for point forecasts.
//!
//! The pipeline: signed residuals are the nonconformity scores; a sliding
//! window keeps the most recent ones; a quantile regression forest fitted
//! on lagged residuals predicts conditional quantiles of the next residual;
//! a grid search over the tail split `beta` picks the narrowest interval
//! with nominal mass `1 - alpha`; and after every hour the realized
//! residual is fed back into the window, evicting the oldest entry.
//!
//! Quantiles use the type-1 (ceil-index) empirical convention over
//! ascending values throughout.
//!
//! ```
//! use carbonbound::conformal::{split_conformal_interval, ResidualWindow};
//!
//! // calibration residuals from some point forecaster
//! let window = ResidualWindow::from_initial(5, &[-6.0, -1.0, 0.0, 2.0, 5.0]).unwrap();
//! let interval = split_conformal_interval(420.0, &window, 0.2).unwrap();
//! assert_eq!((interval.lower, interval.upper), (414.0, 425.0));
//! ```

mod qrf;

pub use qrf::{qrf_fit, qrf_quantile, PooledQuantiles, QrfModel, TreeGrowth};

use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use thiserror::Error;

use crate::timeseries::{HourlyStamp, Interval, IntervalSeries, RegionId, SeriesError};

#[derive(Debug, Error)]
pub enum ConformalError {
    #[error("empty input")]
    EmptyInput,
    #[error("residual window is empty")]
    EmptyWindow,
    #[error("residual window too small: need {needed}, have {have}")]
    WindowTooSmall { needed: usize, have: usize },
    #[error("expected {expected} lagged residuals, got {got}")]
    LagLengthMismatch { expected: usize, got: usize },
    #[error("forecast and truth lengths differ: {forecasts} vs {truths}")]
    AlignmentError { forecasts: usize, truths: usize },
    #[error("bad configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Signed prediction residual; sign is preserved so both interval tails
/// can be calibrated.
pub fn residual(y: f64, y_hat: f64) -> f64 {
    y - y_hat
}

/// 1-based type-1 index into `n` ascending values, clamped to `[1, n]`,
/// returned 0-based.
pub(crate) fn type1_index(n: usize, p: f64) -> usize {
    let raw = (p * n as f64).ceil();
    let k = if raw < 1.0 {
        1
    } else if raw > n as f64 {
        n
    } else {
        raw as usize
    };
    k - 1
}

/// Type-1 empirical quantile: sort ascending, take element `ceil(p*n)`
/// (1-based, clamped).
pub fn empirical_quantile(values: &[f64], p: f64) -> Result<f64, ConformalError> {
    if values.is_empty() {
        return Err(ConformalError::EmptyInput);
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    Ok(sorted[type1_index(sorted.len(), p)])
}

/// Fixed-capacity sliding set of recent residuals, oldest first. Once full
/// it stays full: each push evicts the oldest entry.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualWindow {
    capacity: usize,
    residuals: VecDeque<f64>,
}

impl ResidualWindow {
    pub fn new(capacity: usize) -> Result<Self, ConformalError> {
        if capacity < 2 {
            return Err(ConformalError::BadConfig(
                "window capacity must be >= 2".into(),
            ));
        }
        Ok(ResidualWindow {
            capacity,
            residuals: VecDeque::with_capacity(capacity),
        })
    }

    /// Window pre-filled with calibration residuals, which must not exceed
    /// the capacity.
    pub fn from_initial(capacity: usize, initial: &[f64]) -> Result<Self, ConformalError> {
        if initial.len() > capacity {
            return Err(ConformalError::BadConfig(format!(
                "{} initial residuals exceed window capacity {capacity}",
                initial.len()
            )));
        }
        let mut window = ResidualWindow::new(capacity)?;
        window.residuals.extend(initial.iter().copied());
        Ok(window)
    }

    /// Append the newest residual, returning the evicted oldest entry once
    /// the window is at capacity.
    pub fn push(&mut self, residual: f64) -> Option<f64> {
        let evicted = if self.residuals.len() == self.capacity {
            self.residuals.pop_front()
        } else {
            None
        };
        self.residuals.push_back(residual);
        evicted
    }

    pub fn len(&self) -> usize {
        self.residuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residuals.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.residuals.iter().copied()
    }

    /// Last `w` residuals, oldest first.
    pub fn last(&self, w: usize) -> Result<Vec<f64>, ConformalError> {
        if w > self.residuals.len() {
            return Err(ConformalError::WindowTooSmall {
                needed: w,
                have: self.residuals.len(),
            });
        }
        Ok(self
            .residuals
            .iter()
            .skip(self.residuals.len() - w)
            .copied()
            .collect())
    }
}

/// Split-conformal interval: point forecast shifted by the window's
/// `alpha/2` and `1 - alpha/2` residual quantiles.
pub fn split_conformal_interval(
    y_hat: f64,
    window: &ResidualWindow,
    alpha: f64,
) -> Result<Interval, ConformalError> {
    if window.is_empty() {
        return Err(ConformalError::EmptyWindow);
    }
    let residuals: Vec<f64> = window.iter().collect();
    let lo = empirical_quantile(&residuals, alpha / 2.0)?;
    let hi = empirical_quantile(&residuals, 1.0 - alpha / 2.0)?;
    Ok(Interval::new(y_hat + lo, y_hat + hi, alpha)?)
}

/// Outcome of the tail-split search: the chosen `beta` and the residual
/// quantiles bounding the interval offsets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaSplit {
    pub beta: f64,
    pub lower_q: f64,
    pub upper_q: f64,
}

/// Search an even grid of `grid_size` points over `[0, alpha]` for the
/// tail split minimizing `q(1-alpha+beta) - q(beta)`.
///
/// A single-point grid degenerates to the symmetric split `beta = alpha/2`.
/// Width ties go to the candidate closest to `alpha/2`, then to the
/// smaller `beta`.
pub fn beta_search(quantile_fn: impl Fn(f64) -> f64, alpha: f64, grid_size: usize) -> BetaSplit {
    let grid_size = grid_size.max(1);
    let candidates = (0..grid_size).map(|i| {
        if grid_size == 1 {
            alpha / 2.0
        } else {
            alpha * i as f64 / (grid_size - 1) as f64
        }
    });

    let mut best: Option<(f64, f64, BetaSplit)> = None; // (width, tie distance, split)
    for beta in candidates {
        let lower_q = quantile_fn(beta);
        // 1 - (alpha - beta) rather than 1 - alpha + beta: for the
        // symmetric split this reproduces 1 - alpha/2 bit-for-bit, so the
        // single-point grid matches split conformal exactly
        let upper_q = quantile_fn(1.0 - (alpha - beta));
        let width = upper_q - lower_q;
        let distance = (beta - alpha / 2.0).abs();
        let better = match &best {
            None => true,
            Some((w, d, _)) => width < *w || (width == *w && distance < *d),
        };
        if better {
            best = Some((
                width,
                distance,
                BetaSplit {
                    beta,
                    lower_q,
                    upper_q,
                },
            ));
        }
    }
    best.expect("grid has at least one candidate").2
}

/// Configuration for the sequential interval loop.
///
/// `lag_window = 0` removes residual conditioning entirely; together with
/// `n_trees = 1`, `max_depth = 0`, `bootstrap = false`, and
/// `beta_grid_size = 1` the loop reduces exactly to split conformal over
/// the sliding window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpciConfig {
    /// Significance level; target coverage is `1 - alpha`.
    pub alpha: f64,
    /// Residual window capacity `T`.
    pub window_capacity: usize,
    /// Lagged residuals fed to the forest, `w < T`.
    pub lag_window: usize,
    pub n_trees: usize,
    /// Grid points for the tail-split search over `[0, alpha]`.
    pub beta_grid_size: usize,
    /// Hours between forest refits.
    pub refit_stride: usize,
    pub seed: u64,
    /// Split depth limit. Shallow trees keep leaves large enough for
    /// stable tail quantiles; deep trees narrow the intervals but erode
    /// coverage.
    pub max_depth: usize,
    pub min_leaf: usize,
    pub bootstrap: bool,
}

impl Default for SpciConfig {
    fn default() -> Self {
        SpciConfig {
            alpha: 0.1,
            window_capacity: 5000,
            lag_window: 24,
            n_trees: 25,
            beta_grid_size: 11,
            refit_stride: 24,
            seed: 42,
            max_depth: 6,
            min_leaf: 5,
            bootstrap: true,
        }
    }
}

impl SpciConfig {
    pub fn validate(&self) -> Result<(), ConformalError> {
        let fail = |msg: String| Err(ConformalError::BadConfig(msg));
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return fail(format!("alpha {} outside (0, 1)", self.alpha));
        }
        if self.window_capacity < 2 {
            return fail("window_capacity must be >= 2".into());
        }
        if self.lag_window >= self.window_capacity {
            return fail(format!(
                "lag_window {} must be smaller than window_capacity {}",
                self.lag_window, self.window_capacity
            ));
        }
        if self.n_trees == 0 || self.beta_grid_size == 0 || self.refit_stride == 0 {
            return fail("n_trees, beta_grid_size, refit_stride must be >= 1".into());
        }
        if self.min_leaf == 0 {
            return fail("min_leaf must be >= 1".into());
        }
        Ok(())
    }

    fn growth(&self) -> TreeGrowth {
        TreeGrowth {
            max_depth: self.max_depth,
            min_leaf: self.min_leaf,
            bootstrap: self.bootstrap,
        }
    }
}

/// Run the sequential loop for one stream at the configured alpha.
///
/// `point_forecasts` and `truths` are aligned over the test range starting
/// at `start`; `initial_residuals` must fill the window exactly. For each
/// step the interval is emitted before that hour's truth is consumed, so
/// later truths can never leak into earlier intervals.
pub fn spci_run(
    config: &SpciConfig,
    region: &RegionId,
    start: HourlyStamp,
    point_forecasts: &[f64],
    truths: &[f64],
    initial_residuals: &[f64],
) -> Result<IntervalSeries, ConformalError> {
    let mut series = spci_run_multi(
        config,
        &[config.alpha],
        region,
        start,
        point_forecasts,
        truths,
        initial_residuals,
    )?;
    Ok(series.remove(0))
}

/// Same loop evaluated at several significance levels in one pass.
///
/// Residuals and forest fits do not depend on alpha, so the expensive part
/// of the loop is shared; each alpha only repeats the tail-split search.
/// Output order matches `alphas`, and every series is identical to a
/// single-alpha run with the same seed.
pub fn spci_run_multi(
    config: &SpciConfig,
    alphas: &[f64],
    region: &RegionId,
    start: HourlyStamp,
    point_forecasts: &[f64],
    truths: &[f64],
    initial_residuals: &[f64],
) -> Result<Vec<IntervalSeries>, ConformalError> {
    config.validate()?;
    if alphas.is_empty() || point_forecasts.is_empty() {
        return Err(ConformalError::EmptyInput);
    }
    for &alpha in alphas {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(ConformalError::BadConfig(format!(
                "alpha {alpha} outside (0, 1)"
            )));
        }
    }
    if point_forecasts.len() != truths.len() {
        return Err(ConformalError::AlignmentError {
            forecasts: point_forecasts.len(),
            truths: truths.len(),
        });
    }
    if initial_residuals.len() != config.window_capacity {
        return Err(ConformalError::WindowTooSmall {
            needed: config.window_capacity,
            have: initial_residuals.len(),
        });
    }

    let mut window = ResidualWindow::from_initial(config.window_capacity, initial_residuals)?;
    let growth = config.growth();
    let mut model: Option<QrfModel> = None;
    let mut per_alpha: Vec<Vec<Interval>> =
        vec![Vec::with_capacity(point_forecasts.len()); alphas.len()];

    for (step, (&y_hat, &y)) in point_forecasts.iter().zip(truths).enumerate() {
        if step % config.refit_stride == 0 || model.is_none() {
            let refit_seed = config.seed.wrapping_add(step as u64);
            model = Some(qrf_fit(
                &window,
                config.lag_window,
                config.n_trees,
                refit_seed,
                growth,
            )?);
        }
        let fitted = model.as_ref().expect("model fitted above");
        let recent = window.last(config.lag_window)?;
        let pooled = PooledQuantiles::from_model(fitted, &recent)?;

        for (intervals, &alpha) in per_alpha.iter_mut().zip(alphas) {
            let split = beta_search(|p| pooled.quantile(p), alpha, config.beta_grid_size);
            let interval = Interval::new(y_hat + split.lower_q, y_hat + split.upper_q, alpha)
                .expect("quantile monotonicity keeps lower <= upper");
            intervals.push(interval);
        }

        window.push(residual(y, y_hat));
        debug_assert_eq!(window.len(), config.window_capacity);
    }

    per_alpha
        .into_iter()
        .zip(alphas)
        .map(|(intervals, &alpha)| {
            IntervalSeries::new(region.clone(), start, alpha, intervals).map_err(Into::into)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn region() -> RegionId {
        RegionId::new("ERCO").unwrap()
    }

    /// Selection-by-counting quantile, independent of the sort-based path:
    /// smallest value whose rank reaches the type-1 index.
    fn counting_quantile(values: &[f64], p: f64) -> f64 {
        let n = values.len();
        let raw = (p * n as f64).ceil();
        let k = (raw.max(1.0) as usize).min(n);
        let mut best = f64::INFINITY;
        for &candidate in values {
            let rank = values.iter().filter(|&&x| x <= candidate).count();
            if rank >= k && candidate < best {
                best = candidate;
            }
        }
        best
    }

    #[test]
    fn residual_keeps_sign() {
        assert_eq!(residual(105.0, 100.0), 5.0);
        assert_eq!(residual(100.0, 100.0), 0.0);
        assert_eq!(residual(90.0, 100.0), -10.0);
    }

    #[test]
    fn quantile_examples() {
        let e = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(empirical_quantile(&e, 0.5).unwrap(), 2.0);
        assert_eq!(empirical_quantile(&e, 1.0).unwrap(), 4.0);
        assert_eq!(empirical_quantile(&e, 0.0).unwrap(), 1.0);
        assert!(matches!(
            empirical_quantile(&[], 0.5),
            Err(ConformalError::EmptyInput)
        ));
    }

    #[test]
    fn window_eviction_keeps_capacity() {
        let mut window = ResidualWindow::new(3).unwrap();
        assert_eq!(window.push(1.0), None);
        assert_eq!(window.push(2.0), None);
        assert_eq!(window.push(3.0), None);
        assert_eq!(window.push(4.0), Some(1.0));
        assert_eq!(window.len(), 3);
        assert_eq!(window.iter().collect::<Vec<_>>(), vec![2.0, 3.0, 4.0]);
    }

    #[test]
    fn split_conformal_symmetric_example() {
        let window = ResidualWindow::from_initial(5, &[-2.0, -1.0, 0.0, 1.0, 2.0]).unwrap();
        let interval = split_conformal_interval(100.0, &window, 0.2).unwrap();
        assert_eq!(interval.lower, 98.0);
        assert_eq!(interval.upper, 102.0);
    }

    #[test]
    fn split_conformal_zero_residuals_degenerates() {
        let window = ResidualWindow::from_initial(4, &[0.0; 4]).unwrap();
        let interval = split_conformal_interval(250.0, &window, 0.1).unwrap();
        assert_eq!(interval.lower, 250.0);
        assert_eq!(interval.upper, 250.0);
    }

    #[test]
    fn split_conformal_translation_equivariance() {
        let window = ResidualWindow::from_initial(6, &[-3.0, -1.0, 0.0, 0.5, 2.0, 4.0]).unwrap();
        let base = split_conformal_interval(100.0, &window, 0.2).unwrap();
        let shifted = split_conformal_interval(117.0, &window, 0.2).unwrap();
        assert_eq!(shifted.lower, base.lower + 17.0);
        assert_eq!(shifted.upper, base.upper + 17.0);
    }

    #[test]
    fn beta_search_single_point_grid_is_symmetric_split() {
        let residuals = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let qf = |p: f64| counting_quantile(&residuals, p);
        let split = beta_search(qf, 0.2, 1);
        assert_eq!(split.beta, 0.1);
        assert_eq!(split.lower_q, qf(0.1));
        assert_eq!(split.upper_q, qf(0.9));
    }

    /// Brute-force reference for the grid search.
    fn beta_oracle(qf: impl Fn(f64) -> f64, alpha: f64, grid_size: usize) -> BetaSplit {
        let grid: Vec<f64> = if grid_size == 1 {
            vec![alpha / 2.0]
        } else {
            (0..grid_size)
                .map(|i| alpha * i as f64 / (grid_size - 1) as f64)
                .collect()
        };
        let mut entries: Vec<(f64, f64, f64, f64)> = grid
            .iter()
            .map(|&beta| {
                let lo = qf(beta);
                let hi = qf(1.0 - (alpha - beta));
                (hi - lo, (beta - alpha / 2.0).abs(), beta, lo)
            })
            .collect();
        entries.sort_by(|a, b| {
            a.0.total_cmp(&b.0)
                .then(a.1.total_cmp(&b.1))
                .then(a.2.total_cmp(&b.2))
        });
        let (_, _, beta, lower_q) = entries[0];
        BetaSplit {
            beta,
            lower_q,
            upper_q: qf(1.0 - (alpha - beta)),
        }
    }

    #[test]
    fn beta_search_matches_brute_force_on_fixtures() {
        let symmetric = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let one_sided = [0.0, 1.0, 2.0, 3.0, 4.0];
        for residuals in [&symmetric, &one_sided] {
            for alpha in [0.1, 0.2, 0.5] {
                for grid in [1, 2, 11, 41] {
                    let qf = |p: f64| counting_quantile(residuals.as_slice(), p);
                    assert_eq!(beta_search(qf, alpha, grid), beta_oracle(qf, alpha, grid));
                }
            }
        }
    }

    #[test]
    fn beta_search_biased_low_residuals_shift_beta_down() {
        // forecaster biased low: all residuals >= 0, so the cheapest tail
        // to give up is the lower one
        let residuals = [0.0, 1.0, 2.0, 3.0, 4.0];
        let qf = |p: f64| counting_quantile(&residuals, p);
        let split = beta_search(qf, 0.2, 11);
        assert!(split.beta <= 0.1, "beta was {}", split.beta);
        assert_eq!(split, beta_oracle(qf, 0.2, 11));
    }

    fn degenerate_config(alpha: f64, capacity: usize) -> SpciConfig {
        SpciConfig {
            alpha,
            window_capacity: capacity,
            lag_window: 0,
            n_trees: 1,
            beta_grid_size: 1,
            refit_stride: 1,
            max_depth: 0,
            bootstrap: false,
            ..SpciConfig::default()
        }
    }

    #[test]
    fn degenerate_spci_equals_split_conformal() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let capacity = 40;
        let initial: Vec<f64> = (0..capacity).map(|_| rng.random_range(-5.0..5.0)).collect();
        let n = 120;
        let forecasts: Vec<f64> = (0..n).map(|_| rng.random_range(80.0..120.0)).collect();
        let truths: Vec<f64> = forecasts
            .iter()
            .map(|f| f + rng.random_range(-5.0..5.0))
            .collect();

        let config = degenerate_config(0.2, capacity);
        let series = spci_run(
            &config,
            &region(),
            HourlyStamp(0),
            &forecasts,
            &truths,
            &initial,
        )
        .unwrap();

        let mut window = ResidualWindow::from_initial(capacity, &initial).unwrap();
        for (i, interval) in series.intervals().iter().enumerate() {
            let expected = split_conformal_interval(forecasts[i], &window, 0.2).unwrap();
            assert_eq!(interval.lower, expected.lower, "hour {i}");
            assert_eq!(interval.upper, expected.upper, "hour {i}");
            window.push(truths[i] - forecasts[i]);
        }
    }

    #[test]
    fn perfect_forecaster_zero_residuals_pins_intervals() {
        let truths: Vec<f64> = (0..50).map(|i| 100.0 + (i as f64 * 0.3).sin()).collect();
        let config = SpciConfig {
            window_capacity: 30,
            lag_window: 4,
            n_trees: 3,
            refit_stride: 5,
            ..SpciConfig::default()
        };
        let initial = vec![0.0; 30];
        let series = spci_run(
            &config,
            &region(),
            HourlyStamp(0),
            &truths,
            &truths,
            &initial,
        )
        .unwrap();
        for (interval, &y) in series.intervals().iter().zip(&truths) {
            assert_eq!(interval.lower, y);
            assert_eq!(interval.upper, y);
        }
    }

    #[test]
    fn spci_is_causal_in_truths() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let capacity = 24;
        let initial: Vec<f64> = (0..capacity).map(|_| rng.random_range(-2.0..2.0)).collect();
        let forecasts: Vec<f64> = (0..60).map(|_| rng.random_range(90.0..110.0)).collect();
        let truths: Vec<f64> = forecasts
            .iter()
            .map(|f| f + rng.random_range(-2.0..2.0))
            .collect();
        let config = SpciConfig {
            window_capacity: capacity,
            lag_window: 3,
            n_trees: 4,
            refit_stride: 2,
            ..SpciConfig::default()
        };
        let baseline = spci_run(
            &config,
            &region(),
            HourlyStamp(0),
            &forecasts,
            &truths,
            &initial,
        )
        .unwrap();

        let cut = 33;
        let mut mutated = truths.clone();
        for value in mutated.iter_mut().skip(cut) {
            *value += 1e6; // sentinel future truths
        }
        let perturbed = spci_run(
            &config,
            &region(),
            HourlyStamp(0),
            &forecasts,
            &mutated,
            &initial,
        )
        .unwrap();

        for i in 0..=cut {
            assert_eq!(
                baseline.intervals()[i],
                perturbed.intervals()[i],
                "interval {i} depended on a future truth"
            );
        }
    }

    #[test]
    fn spci_deterministic_and_multi_alpha_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let capacity = 30;
        let initial: Vec<f64> = (0..capacity).map(|_| rng.random_range(-3.0..3.0)).collect();
        let forecasts: Vec<f64> = (0..40).map(|_| rng.random_range(50.0..60.0)).collect();
        let truths: Vec<f64> = forecasts
            .iter()
            .map(|f| f + rng.random_range(-3.0..3.0))
            .collect();
        let config = SpciConfig {
            window_capacity: capacity,
            lag_window: 5,
            n_trees: 6,
            refit_stride: 7,
            ..SpciConfig::default()
        };

        let multi = spci_run_multi(
            &config,
            &[0.1, 0.05],
            &region(),
            HourlyStamp(0),
            &forecasts,
            &truths,
            &initial,
        )
        .unwrap();
        for (idx, alpha) in [0.1, 0.05].into_iter().enumerate() {
            let single = spci_run(
                &SpciConfig {
                    alpha,
                    ..config.clone()
                },
                &region(),
                HourlyStamp(0),
                &forecasts,
                &truths,
                &initial,
            )
            .unwrap();
            assert_eq!(single, multi[idx]);
        }

        let again = spci_run_multi(
            &config,
            &[0.1, 0.05],
            &region(),
            HourlyStamp(0),
            &forecasts,
            &truths,
            &initial,
        )
        .unwrap();
        assert_eq!(multi, again);
    }

    #[test]
    fn spci_translation_equivariance() {
        // values with few mantissa bits so adding 256 is exact in f64
        let initial: Vec<f64> = (0..16).map(|i| (i as f64 - 8.0) * 0.25).collect();
        let forecasts: Vec<f64> = (0..30).map(|i| 100.0 + (i % 7) as f64 * 0.5).collect();
        let truths: Vec<f64> = (0..30).map(|i| 100.5 + (i % 5) as f64 * 0.25).collect();
        let config = SpciConfig {
            window_capacity: 16,
            lag_window: 3,
            n_trees: 4,
            refit_stride: 6,
            ..SpciConfig::default()
        };
        let base = spci_run(
            &config,
            &region(),
            HourlyStamp(0),
            &forecasts,
            &truths,
            &initial,
        )
        .unwrap();

        let shift = 256.0;
        let forecasts_up: Vec<f64> = forecasts.iter().map(|f| f + shift).collect();
        let truths_up: Vec<f64> = truths.iter().map(|t| t + shift).collect();
        let shifted = spci_run(
            &config,
            &region(),
            HourlyStamp(0),
            &forecasts_up,
            &truths_up,
            &initial,
        )
        .unwrap();

        for (a, b) in base.intervals().iter().zip(shifted.intervals()) {
            assert_eq!(b.lower, a.lower + shift);
            assert_eq!(b.upper, a.upper + shift);
        }
    }

    #[test]
    fn spci_rejects_misaligned_or_short_inputs() {
        let config = SpciConfig {
            window_capacity: 10,
            lag_window: 2,
            ..SpciConfig::default()
        };
        let err = spci_run(
            &config,
            &region(),
            HourlyStamp(0),
            &[1.0, 2.0],
            &[1.0],
            &[0.0; 10],
        )
        .unwrap_err();
        assert!(matches!(err, ConformalError::AlignmentError { .. }));

        let err = spci_run(
            &config,
            &region(),
            HourlyStamp(0),
            &[1.0, 2.0],
            &[1.0, 2.0],
            &[0.0; 9],
        )
        .unwrap_err();
        assert!(matches!(
            err,
            ConformalError::WindowTooSmall {
                needed: 10,
                have: 9
            }
        ));
    }

    proptest! {
        // empirical quantile agrees with an O(n^2) selection-by-counting oracle
        #[test]
        fn quantile_matches_counting_oracle(
            values in proptest::collection::vec(-1e6f64..1e6, 1..40),
            p in 0.0f64..=1.0,
        ) {
            let expected = counting_quantile(&values, p);
            prop_assert_eq!(empirical_quantile(&values, p).unwrap(), expected);
        }

        // nested significance levels give nested split-conformal intervals
        #[test]
        fn split_conformal_nested_in_alpha(
            residuals in proptest::collection::vec(-100.0f64..100.0, 2..60),
            a1 in 0.01f64..0.5,
            gap in 0.01f64..0.4,
        ) {
            let a2 = (a1 + gap).min(0.95);
            let window = ResidualWindow::from_initial(residuals.len(), &residuals).unwrap();
            let wide = split_conformal_interval(0.0, &window, a1).unwrap();
            let narrow = split_conformal_interval(0.0, &window, a2).unwrap();
            prop_assert!(wide.lower <= narrow.lower);
            prop_assert!(wide.upper >= narrow.upper);
        }

        // emitted intervals are always well-formed
        #[test]
        fn spci_intervals_well_formed(seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let capacity = 20;
            let initial: Vec<f64> = (0..capacity).map(|_| rng.random_range(-4.0..4.0)).collect();
            let forecasts: Vec<f64> = (0..15).map(|_| rng.random_range(10.0..30.0)).collect();
            let truths: Vec<f64> = forecasts.iter().map(|f| f + rng.random_range(-4.0..4.0)).collect();
            let config = SpciConfig {
                window_capacity: capacity,
                lag_window: 3,
                n_trees: 2,
                refit_stride: 4,
                seed,
                ..SpciConfig::default()
            };
            let series = spci_run(&config, &region(), HourlyStamp(0), &forecasts, &truths, &initial).unwrap();
            for interval in series.intervals() {
                prop_assert!(interval.lower <= interval.upper);
            }
        }
    }
}
