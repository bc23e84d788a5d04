//! Deterministic synthetic series for demos, benchmarks, and tests.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::timeseries::{HourlySeries, HourlyStamp, RegionId, Unit};

/// Shape of a synthetic carbon-intensity signal: a daily cycle plus AR(1)
/// noise around a positive base level.
#[derive(Debug, Clone, Copy)]
pub struct SyntheticCi {
    pub base: f64,
    /// Amplitude of the 24-hour sinusoid.
    pub daily_amplitude: f64,
    /// AR(1) coefficient of the noise, in (-1, 1).
    pub ar_coefficient: f64,
    /// Standard deviation of the AR(1) innovations.
    pub noise_sd: f64,
}

impl Default for SyntheticCi {
    fn default() -> Self {
        SyntheticCi {
            base: 400.0,
            daily_amplitude: 120.0,
            ar_coefficient: 0.8,
            noise_sd: 25.0,
        }
    }
}

/// Generate `len` hours of synthetic carbon intensity starting at `start`.
/// Identical arguments always produce identical series.
pub fn seasonal_ar1(
    region: &RegionId,
    start: HourlyStamp,
    len: usize,
    shape: SyntheticCi,
    seed: u64,
) -> HourlySeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut noise = 0.0;
    let values: Vec<f64> = (0..len)
        .map(|i| {
            let hour = (start.0 + i as i64) as f64;
            let cycle = (hour * std::f64::consts::TAU / 24.0).sin();
            let z: f64 = StandardNormal.sample(&mut rng);
            noise = shape.ar_coefficient * noise + shape.noise_sd * z;
            shape.base + shape.daily_amplitude * cycle + noise
        })
        .collect();
    HourlySeries::new(region.clone(), start, values, Unit::GramsCo2PerKwh)
        .expect("synthetic signal stays positive for sane shapes")
}
