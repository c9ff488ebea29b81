use rand::Rng;
use rand_distr::StandardNormal;

use super::{
    rng, Result, ScenarioConfig, SynthError, STREAM_ALPHA, STREAM_NOISE, STREAM_POPULATION,
};
use crate::epi::{Covariate, EpidemicPanel, WeatherBin};
use crate::geo::CoverageMatrix;
use crate::SpatialUnit;

#[derive(Clone, Debug)]
pub struct Simulation {
    pub panel: EpidemicPanel<f64>,
    /// Generating mixing exponent per unit, in unit order.
    pub alpha: Vec<f64>,
    /// Biweeks where incidence was capped at the available susceptibles.
    pub truncations: usize,
}

/// Runs `I(t+1) = β S/N I^α ε` forward for every unit. Weather enters at
/// `E(t − lag)`, clamped to the first biweek during the lead-in.
pub fn simulate_tsir(
    config: &ScenarioConfig,
    units: &[SpatialUnit],
    coverage: &CoverageMatrix<f64>,
    weather: &[WeatherBin<f64>],
) -> Result<Simulation> {
    config.validate()?;
    let n_t = config.n_biweeks;
    if weather.len() != n_t {
        return Err(SynthError::Config(format!(
            "{} weather bins for {n_t} biweeks",
            weather.len()
        )));
    }
    let rule = config.susceptible_rule();
    let covariates = Covariate::from_weather(weather);
    let lags = config.lag_vector();
    let theta = &config.theta;
    let weather_theta = [theta.temperature, theta.rain_days];

    let mut pop_rng = rng(config.seed, STREAM_POPULATION);
    let mut alpha_rng = rng(config.seed, STREAM_ALPHA);
    let mut noise_rng = rng(config.seed, STREAM_NOISE);

    let mut infected = Vec::with_capacity(units.len());
    let mut population = Vec::with_capacity(units.len());
    let mut alphas = Vec::with_capacity(units.len());
    let mut truncations = 0;

    for (u, unit) in units.iter().enumerate() {
        let n0 = pop_rng.random_range(config.population.min..=config.population.max) as f64;
        let pop: Vec<f64> = (0..n_t)
            .map(|t| (n0 * (1.0 + config.population.growth_per_biweek).powi(t as i32)).round())
            .collect();
        let [lo, hi] = config.alpha_range;
        let drawn = if lo < hi {
            alpha_rng.random_range(lo..=hi)
        } else {
            lo
        };
        let alpha = config.alpha.as_ref().map_or(drawn, |a| a[u]);
        let landscape: f64 = coverage
            .classes()
            .iter()
            .map(|&c| {
                coverage
                    .get(unit.id(), c)
                    .map(|l| theta.landscape_value(c) * l)
                    .ok_or_else(|| {
                        SynthError::Config(format!("no coverage for unit {}", unit.id()))
                    })
            })
            .sum::<Result<f64>>()?;
        let density: Vec<f64> = pop.iter().map(|n| n / unit.area_km2()).collect();

        let mut inf = vec![0.0; n_t];
        let mut s = rule.initial(pop[0]);
        inf[0] = (config.initial_infected_fraction * pop[0])
            .round()
            .clamp(1.0, s);
        for t in 0..n_t - 1 {
            let mut log_beta = landscape + theta.density * density[t];
            for (k, cov) in covariates.iter().enumerate() {
                log_beta += weather_theta[k] * cov.values[t.saturating_sub(lags[k])];
            }
            let z: f64 = noise_rng.sample(StandardNormal);
            let s_next = rule.next(s, inf[t], pop[t]);
            let mut next = if inf[t] > 0.0 {
                (log_beta + alpha * inf[t].ln() + s.ln() - pop[t].ln() + config.noise_sigma * z)
                    .exp()
            } else {
                0.0
            };
            if config.integer_counts {
                next = next.round();
            }
            if next > s_next {
                next = s_next.max(0.0);
                truncations += 1;
            }
            inf[t + 1] = next;
            s = s_next;
        }
        infected.push(inf);
        population.push(pop);
        alphas.push(alpha);
    }
    let ids: Vec<String> = units.iter().map(|u| u.id().to_string()).collect();
    let areas: Vec<f64> = units.iter().map(|u| u.area_km2()).collect();
    let panel = EpidemicPanel::assemble(
        config.start_date,
        &ids,
        infected,
        population,
        &areas,
        covariates,
        &rule,
    )?;
    Ok(Simulation {
        panel,
        alpha: alphas,
        truncations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::epi::bin_weather;
    use crate::synth::{gen_landscape, gen_units, gen_weather, ThetaConfig};

    fn run(config: &ScenarioConfig) -> Simulation {
        let units = gen_units(config).unwrap();
        let cov = gen_landscape(config, &units).unwrap();
        let (t, r) = gen_weather(config);
        let bins = bin_weather(&t, &r, config.start_date, config.end_date()).unwrap();
        simulate_tsir(config, &units, &cov, &bins).unwrap()
    }

    #[test]
    fn same_seed_same_trajectories() {
        let c = ScenarioConfig::default();
        let (a, b) = (run(&c), run(&c));
        for (x, y) in a.panel.units().iter().zip(b.panel.units()) {
            assert_eq!(x.infected, y.infected);
        }
    }

    #[test]
    fn susceptibles_are_conserved() {
        let c = ScenarioConfig::default();
        let sim = run(&c);
        for u in sim.panel.units() {
            for t in 0..u.infected.len() - 1 {
                let births = (c.birth_rate * u.population[t]).round();
                assert_eq!(
                    u.susceptible[t + 1],
                    u.susceptible[t] - u.infected[t] + births
                );
                assert!(u.infected[t] <= u.susceptible[t]);
            }
        }
    }

    #[test]
    fn constant_beta_grows_geometrically() {
        // α = 1, no noise, no depletion pressure: I(t+1)/I(t) = β S/N
        let c = ScenarioConfig {
            n_units: 1,
            n_biweeks: 10,
            theta: ThetaConfig {
                landscape: Default::default(),
                temperature: 0.0,
                rain_days: 0.0,
                density: 0.0,
            },
            alpha: Some(vec![1.0]),
            noise_sigma: 0.0,
            integer_counts: false,
            s0: 1.0,
            birth_rate: 0.0,
            initial_infected_fraction: 1e-6,
            population: crate::synth::PopulationConfig {
                min: 1_000_000,
                max: 1_000_000,
                growth_per_biweek: 0.0,
            },
            ..Default::default()
        };
        let sim = run(&c);
        let u = &sim.panel.units()[0];
        for t in 0..9 {
            let ratio = u.infected[t + 1] / u.infected[t];
            let expected = u.susceptible[t] / u.population[t];
            assert!(
                (ratio - expected).abs() < 1e-12,
                "t={t}: {ratio} vs {expected}"
            );
        }
        assert_eq!(sim.truncations, 0);
    }
}
