use super::Configuration;
use crate::maze::{CellKind, Maze};

/// Names of the feature entries, bias last.
pub const FEATURE_NAMES: [&str; 9] = [
    "step_cost",
    "bump_penalty",
    "oil_penalty",
    "goal_reward",
    "gamma",
    "gamma_sq",
    "bump_exposure",
    "oil_exposure",
    "bias",
];

const RAW_DIM: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        self.0.iter().zip(other).map(|(a, b)| a * b).sum()
    }
}

/// Joint scenario/configuration encoding with pool-wide min-max scaling.
///
/// The raw block is the five reward fields, `gamma^2`, and each penalty's
/// magnitude times the maze's density of that obstacle. A constant bias
/// entry is appended after scaling.
#[derive(Debug, Clone, PartialEq)]
pub struct Featurizer {
    bump_density: f64,
    oil_density: f64,
    lo: [f64; RAW_DIM],
    hi: [f64; RAW_DIM],
}

impl Featurizer {
    /// Fits the scaling ranges over `pool`. Returns `None` for an empty pool.
    pub fn fit(maze: &Maze, pool: &[Configuration]) -> Option<Featurizer> {
        if pool.is_empty() {
            return None;
        }
        let cells = maze.traversable_count() as f64;
        let mut f = Featurizer {
            bump_density: maze.count_kind(CellKind::SpeedBump) as f64 / cells,
            oil_density: maze.count_kind(CellKind::OilSpill) as f64 / cells,
            lo: [f64::INFINITY; RAW_DIM],
            hi: [f64::NEG_INFINITY; RAW_DIM],
        };
        for c in pool {
            let raw = f.raw(c);
            for i in 0..RAW_DIM {
                f.lo[i] = f.lo[i].min(raw[i]);
                f.hi[i] = f.hi[i].max(raw[i]);
            }
        }
        Some(f)
    }

    pub fn dim(&self) -> usize {
        RAW_DIM + 1
    }

    /// Unscaled features.
    pub fn raw(&self, c: &Configuration) -> [f64; RAW_DIM] {
        let p = &c.params;
        [
            p.step_cost,
            p.bump_penalty,
            p.oil_penalty,
            p.goal_reward,
            p.gamma,
            p.gamma * p.gamma,
            p.bump_penalty.abs() * self.bump_density,
            p.oil_penalty.abs() * self.oil_density,
        ]
    }

    /// Scaled features plus bias. A field constant over the pool maps to 0.
    pub fn featurize(&self, c: &Configuration) -> FeatureVector {
        let raw = self.raw(c);
        let mut v = Vec::with_capacity(RAW_DIM + 1);
        for i in 0..RAW_DIM {
            let span = self.hi[i] - self.lo[i];
            v.push(if span > 0.0 { (raw[i] - self.lo[i]) / span } else { 0.0 });
        }
        v.push(1.0);
        FeatureVector(v)
    }

    pub fn featurize_all(&self, pool: &[Configuration]) -> Vec<FeatureVector> {
        pool.iter().map(|c| self.featurize(c)).collect()
    }
}
