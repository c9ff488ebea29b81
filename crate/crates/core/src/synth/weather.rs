use std::f64::consts::TAU;

use chrono::Days;
use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};

use super::{rng, ScenarioConfig, STREAM_WEATHER};
use crate::epi::io::DailyWeather;
use crate::epi::BIWEEK_DAYS;

/// Round-trips `v` through its `decimals`-place decimal form, so that values
/// written to CSV read back identically.
fn quantize(v: f64, decimals: usize) -> f64 {
    format!("{v:.decimals$}")
        .parse()
        .expect("formatted float parses")
}

/// Daily mean temperature (°C, sinusoidal season plus Gaussian noise) and
/// precipitation (mm, exponential on wet days, zero otherwise).
pub fn gen_weather(config: &ScenarioConfig) -> DailyWeather<f64> {
    let w = &config.weather;
    let mut rng = rng(config.seed, STREAM_WEATHER);
    let noise = Normal::new(0.0, w.temp_noise_sd).expect("validated sd");
    let amount = Exp::new(1.0 / w.mean_rain_mm).expect("validated mean");
    let days = config.n_biweeks as u64 * BIWEEK_DAYS;
    let mut temp = Vec::with_capacity(days as usize);
    let mut rain = Vec::with_capacity(days as usize);
    for d in 0..days {
        let date = config.start_date + Days::new(d);
        let season = w.amplitude_c * (TAU * (d as f64 - w.phase_days) / 365.25).sin();
        let t = w.mean_temp_c + season + noise.sample(&mut rng);
        temp.push((date, quantize(t, 2)));
        let wet = rng.random_bool(w.rain_probability);
        let mm = amount.sample(&mut rng);
        rain.push((date, if wet { quantize(mm, 1).max(0.1) } else { 0.0 }));
    }
    (temp, rain)
}
