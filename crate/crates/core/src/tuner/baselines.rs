//! Undirected search baselines sharing the tuner's evaluation accounting.

use rand::seq::SliceRandom;

use super::search::{check_pool, TuneError, TuneTrace};
use super::Configuration;
use crate::config::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Baseline {
    Random,
    CoordinateSweep,
    Grid,
}

impl Baseline {
    pub const ALL: [Baseline; 3] = [Baseline::Random, Baseline::CoordinateSweep, Baseline::Grid];

    pub fn name(self) -> &'static str {
        match self {
            Baseline::Random => "random",
            Baseline::CoordinateSweep => "coordinate_sweep",
            Baseline::Grid => "grid",
        }
    }

    pub fn run<F>(self, pool: &[Configuration], budget: usize, seed: u64, objective: F) -> Result<TuneTrace, TuneError>
    where
        F: Fn(&Configuration) -> Result<f64, TuneError>,
    {
        match self {
            Baseline::Random => random_search(pool, budget, seed, objective),
            Baseline::CoordinateSweep => coordinate_sweep(pool, budget, seed, objective),
            Baseline::Grid => grid_search(pool, budget, objective),
        }
    }
}

/// Evaluates `budget` configurations in a seeded uniformly random order.
pub fn random_search<F>(pool: &[Configuration], budget: usize, seed: u64, objective: F) -> Result<TuneTrace, TuneError>
where
    F: Fn(&Configuration) -> Result<f64, TuneError>,
{
    check_pool(pool, budget)?;
    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.shuffle(&mut rng(seed));
    let mut trace = TuneTrace::default();
    for &i in &order[..budget] {
        trace.push(pool[i], objective(&pool[i])?);
    }
    Ok(trace)
}

/// Parameter vectors rescaled to the unit box spanned by the pool.
fn normalized(pool: &[Configuration]) -> Vec<[f64; 5]> {
    let mut lo = [f64::INFINITY; 5];
    let mut hi = [f64::NEG_INFINITY; 5];
    for c in pool {
        for (f, x) in c.params.to_array().into_iter().enumerate() {
            lo[f] = lo[f].min(x);
            hi[f] = hi[f].max(x);
        }
    }
    pool.iter()
        .map(|c| {
            let mut v = c.params.to_array();
            for f in 0..5 {
                let span = hi[f] - lo[f];
                v[f] = if span > 0.0 { (v[f] - lo[f]) / span } else { 0.0 };
            }
            v
        })
        .collect()
}

/// One-factor-at-a-time search, the way parameters are tuned by hand.
///
/// Starts at a random configuration. Each step varies one field (cycling
/// through the five) by evaluating the unevaluated candidate closest to the
/// incumbent on the other four, and moves the incumbent on improvement.
pub fn coordinate_sweep<F>(pool: &[Configuration], budget: usize, seed: u64, objective: F) -> Result<TuneTrace, TuneError>
where
    F: Fn(&Configuration) -> Result<f64, TuneError>,
{
    check_pool(pool, budget)?;
    let coords = normalized(pool);
    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.shuffle(&mut rng(seed));
    let mut evaluated = vec![false; pool.len()];
    let mut trace = TuneTrace::default();

    let mut incumbent = order[0];
    let mut incumbent_reward = objective(&pool[incumbent])?;
    evaluated[incumbent] = true;
    trace.push(pool[incumbent], incumbent_reward);

    let mut field = 0;
    while trace.len() < budget {
        let base = coords[incumbent];
        let next = (0..pool.len())
            .filter(|&i| !evaluated[i])
            .map(|i| {
                let d: f64 = (0..5)
                    .filter(|&f| f != field)
                    .map(|f| (coords[i][f] - base[f]).powi(2))
                    .sum();
                (d, i)
            })
            .min_by(|a, b| a.0.total_cmp(&b.0).then(pool[a.1].id.cmp(&pool[b.1].id)))
            .map(|(_, i)| i)
            .expect("budget within pool size");
        let reward = objective(&pool[next])?;
        evaluated[next] = true;
        trace.push(pool[next], reward);
        if reward > incumbent_reward {
            incumbent = next;
            incumbent_reward = reward;
        }
        field = (field + 1) % 5;
    }
    Ok(trace)
}

/// Visits a regular lattice over the pool's box in lexicographic order,
/// evaluating the unevaluated candidate nearest each lattice point.
pub fn grid_search<F>(pool: &[Configuration], budget: usize, objective: F) -> Result<TuneTrace, TuneError>
where
    F: Fn(&Configuration) -> Result<f64, TuneError>,
{
    check_pool(pool, budget)?;
    let coords = normalized(pool);
    let mut levels = 1usize;
    while levels.pow(5) < budget {
        levels += 1;
    }
    let mut evaluated = vec![false; pool.len()];
    let mut trace = TuneTrace::default();
    let mut point = [0usize; 5];
    while trace.len() < budget {
        let target: Vec<f64> = point.iter().map(|&k| (k as f64 + 0.5) / levels as f64).collect();
        let next = (0..pool.len())
            .filter(|&i| !evaluated[i])
            .map(|i| {
                let d: f64 = (0..5).map(|f| (coords[i][f] - target[f]).powi(2)).sum();
                (d, i)
            })
            .min_by(|a, b| a.0.total_cmp(&b.0).then(pool[a.1].id.cmp(&pool[b.1].id)))
            .map(|(_, i)| i)
            .expect("budget within pool size");
        let reward = objective(&pool[next])?;
        evaluated[next] = true;
        trace.push(pool[next], reward);
        // odometer increment, last field fastest
        for f in (0..5).rev() {
            point[f] += 1;
            if point[f] < levels {
                break;
            }
            point[f] = 0;
        }
    }
    Ok(trace)
}
