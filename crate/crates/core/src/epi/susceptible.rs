use serde::{Deserialize, Serialize};

use super::{EpiError, Result};
use crate::Real;

/// Susceptible bookkeeping: `S(0) = round(s0 · N(0))`, then
/// `S(t+1) = S(t) − I(t) + round(birth_rate · N(t))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SusceptibleRule {
    pub s0: f64,
    #[serde(default)]
    pub birth_rate: f64,
}

impl Default for SusceptibleRule {
    fn default() -> Self {
        Self {
            s0: 0.1,
            birth_rate: 0.0,
        }
    }
}

impl SusceptibleRule {
    pub fn validate(&self) -> Result<()> {
        if !(self.s0 > 0.0 && self.s0 <= 1.0) {
            return Err(EpiError::InitialFraction(self.s0));
        }
        if !(self.birth_rate >= 0.0 && self.birth_rate.is_finite()) {
            return Err(EpiError::Panel(format!(
                "birth rate {} must be ≥ 0",
                self.birth_rate
            )));
        }
        Ok(())
    }

    pub fn initial<T: Real>(&self, population: T) -> T {
        (T::lit(self.s0) * population).round()
    }

    pub fn next<T: Real>(&self, susceptible: T, infected: T, population: T) -> T {
        susceptible - infected + (T::lit(self.birth_rate) * population).round()
    }
}

/// Rebuilds `S(t)` from incidence and population; fails where a biweek's
/// incidence exceeds the susceptibles available.
pub fn reconstruct_susceptibles<T: Real>(
    unit: &str,
    infected: &[T],
    population: &[T],
    rule: &SusceptibleRule,
) -> Result<Vec<T>> {
    rule.validate()?;
    if infected.len() != population.len() {
        return Err(EpiError::Panel(format!(
            "unit {unit:?}: {} incidence values, {} population values",
            infected.len(),
            population.len()
        )));
    }
    let mut out = Vec::with_capacity(infected.len());
    let Some(&n0) = population.first() else {
        return Ok(out);
    };
    let mut s = rule.initial(n0);
    for (t, (&i, &n)) in infected.iter().zip(population).enumerate() {
        if s < i {
            return Err(EpiError::Depletion {
                unit: unit.to_string(),
                t,
                susceptible: s.as_f64(),
                infected: i.as_f64(),
            });
        }
        out.push(s);
        s = rule.next(s, i, n);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_without_incidence() {
        let s =
            reconstruct_susceptibles("u", &[0.0; 4], &[10_000.0; 4], &SusceptibleRule::default())
                .unwrap();
        assert_eq!(s, vec![1000.0; 4]);
    }

    #[test]
    fn cumulative_depletion() {
        let inc = [50.0, 30.0, 20.0, 5.0];
        let s = reconstruct_susceptibles("u", &inc, &[10_000.0; 4], &SusceptibleRule::default())
            .unwrap();
        let mut expected = vec![1000.0];
        for i in &inc[..3] {
            expected.push(expected.last().unwrap() - i);
        }
        assert_eq!(s, expected);
        assert_eq!(&s[..3], &[1000.0, 950.0, 920.0]);
    }

    #[test]
    fn replenishment() {
        let rule = SusceptibleRule {
            s0: 0.1,
            birth_rate: 0.001,
        };
        let s = reconstruct_susceptibles("u", &[5.0, 5.0], &[10_000.0, 10_000.0], &rule).unwrap();
        assert_eq!(s, vec![1000.0, 1005.0]);
    }

    #[test]
    fn depletion_at_start() {
        let e = reconstruct_susceptibles(
            "u7",
            &[1500.0, 0.0],
            &[10_000.0; 2],
            &SusceptibleRule::default(),
        )
        .unwrap_err();
        assert!(matches!(e, EpiError::Depletion { t: 0, ref unit, .. } if unit == "u7"));
        let bad = SusceptibleRule {
            s0: 0.0,
            birth_rate: 0.0,
        };
        assert!(matches!(
            reconstruct_susceptibles("u", &[0.0], &[1.0], &bad),
            Err(EpiError::InitialFraction(_))
        ));
    }
}
