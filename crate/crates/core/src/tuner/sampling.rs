use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use super::Configuration;
use crate::config::rng;
use crate::maze::RewardParams;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplingError {
    #[error("{field}: lower bound {lo} exceeds upper bound {hi}")]
    Inverted { field: &'static str, lo: f64, hi: f64 },
    #[error("{field}: range [{lo}, {hi}] leaves the admissible domain")]
    OutOfDomain { field: &'static str, lo: f64, hi: f64 },
    #[error("candidate count must be at least 1")]
    Empty,
}

/// Per-field `(lo, hi)` bounds of the reward design space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamRanges {
    pub step_cost: (f64, f64),
    pub bump_penalty: (f64, f64),
    pub oil_penalty: (f64, f64),
    pub goal_reward: (f64, f64),
    pub gamma: (f64, f64),
}

impl Default for ParamRanges {
    fn default() -> Self {
        ParamRanges {
            step_cost: (-2.0, -0.2),
            bump_penalty: (-20.0, 0.0),
            oil_penalty: (-30.0, 0.0),
            goal_reward: (5.0, 100.0),
            gamma: (0.5, 0.99),
        }
    }
}

impl ParamRanges {
    pub const FIELDS: [&'static str; 5] =
        ["step_cost", "bump_penalty", "oil_penalty", "goal_reward", "gamma"];

    pub fn as_array(&self) -> [(f64, f64); 5] {
        [
            self.step_cost,
            self.bump_penalty,
            self.oil_penalty,
            self.goal_reward,
            self.gamma,
        ]
    }

    pub fn from_array(a: [(f64, f64); 5]) -> Self {
        ParamRanges {
            step_cost: a[0],
            bump_penalty: a[1],
            oil_penalty: a[2],
            goal_reward: a[3],
            gamma: a[4],
        }
    }

    pub fn validate(&self) -> Result<(), SamplingError> {
        for (field, (lo, hi)) in Self::FIELDS.into_iter().zip(self.as_array()) {
            if !(lo.is_finite() && hi.is_finite()) {
                return Err(SamplingError::OutOfDomain { field, lo, hi });
            }
            if lo > hi {
                return Err(SamplingError::Inverted { field, lo, hi });
            }
            let ok = match field {
                "gamma" => lo > 0.0 && hi < 1.0,
                "goal_reward" => lo >= 0.0,
                _ => hi <= 0.0,
            };
            if !ok {
                return Err(SamplingError::OutOfDomain { field, lo, hi });
            }
        }
        Ok(())
    }
}

/// Latin-hypercube sample of `n` configurations, ids `0..n`.
///
/// Each field's range is cut into `n` equal strata and every stratum is used
/// exactly once, in an independently shuffled order per field.
pub fn generate_candidates(
    ranges: &ParamRanges,
    n: usize,
    seed: u64,
) -> Result<Vec<Configuration>, SamplingError> {
    ranges.validate()?;
    if n == 0 {
        return Err(SamplingError::Empty);
    }
    let mut rng = rng(seed);
    let bounds = ranges.as_array();
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(5);
    for &(lo, hi) in &bounds {
        let mut strata: Vec<usize> = (0..n).collect();
        strata.shuffle(&mut rng);
        let col = strata
            .into_iter()
            .map(|k| {
                let u = (k as f64 + rng.gen::<f64>()) / n as f64;
                (lo + u * (hi - lo)).clamp(lo, hi)
            })
            .collect();
        columns.push(col);
    }
    Ok((0..n)
        .map(|i| {
            let params = RewardParams::from_array([
                columns[0][i],
                columns[1][i],
                columns[2][i],
                columns[3][i],
                columns[4][i],
            ]);
            Configuration::new(i, params)
        })
        .collect())
}
