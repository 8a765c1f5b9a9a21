//! Evaluations-to-target benchmark of the tuner against the baselines.

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

use crate::config::{derive_seed, stream};
use crate::maze::Maze;
use crate::numfmt::sig17;
use crate::tuner::{
    generate_candidates, tune_with, Baseline, Configuration, Featurizer, Objective, ParamRanges, SamplingError,
    TuneError, TuneOptions, TuneTrace,
};

pub const PUBLISHED_MEAN_SPEEDUP: f64 = 1.48;
pub const PUBLISHED_PEAK_SPEEDUP: f64 = 1.82;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("target quantile must lie in (0, 1), got {0}")]
    Quantile(f64),
    #[error("no mazes given")]
    NoMazes,
    #[error("seed count must be positive")]
    NoSeeds,
    #[error("maze {maze}: {source}")]
    Tune {
        maze: usize,
        #[source]
        source: TuneError,
    },
    #[error(transparent)]
    Sampling(#[from] SamplingError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub pool_size: usize,
    pub budget: usize,
    pub target_quantile: f64,
    pub seeds: usize,
    pub ranges: ParamRanges,
    pub tune: TuneOptions,
    pub theta: f64,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            pool_size: 200,
            budget: 40,
            target_quantile: 0.05,
            seeds: 20,
            ranges: ParamRanges::default(),
            tune: TuneOptions::default(),
            theta: crate::solver::DEFAULT_THETA,
            seed: 0,
        }
    }
}

/// A search method under comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Tuner,
    Baseline(Baseline),
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Tuner,
        Method::Baseline(Baseline::Random),
        Method::Baseline(Baseline::CoordinateSweep),
        Method::Baseline(Baseline::Grid),
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Tuner => "tuner",
            Method::Baseline(b) => b.name(),
        }
    }
}

/// One search run. Runs that never hit the target count as `budget`
/// evaluations and are flagged censored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunRecord {
    pub maze: usize,
    pub seed: usize,
    pub method: Method,
    pub evaluations: usize,
    pub censored: bool,
    pub best_reward: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MazeSpeedup {
    pub maze: usize,
    pub threshold: f64,
    pub oracle_best: f64,
    /// Median evaluations-to-target per method, in [`Method::ALL`] order.
    pub medians: Vec<(Method, f64)>,
    /// Baseline median over tuner median, per baseline.
    pub ratios: Vec<(Baseline, f64)>,
    /// Seeds on which the tuner's final best reached the target.
    pub tuner_hits: usize,
}

impl MazeSpeedup {
    pub fn median(&self, m: Method) -> f64 {
        self.medians.iter().find(|(k, _)| *k == m).map_or(f64::NAN, |x| x.1)
    }

    pub fn ratio(&self, b: Baseline) -> f64 {
        self.ratios.iter().find(|(k, _)| *k == b).map_or(f64::NAN, |x| x.1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedupReport {
    pub budget: usize,
    pub pool_size: usize,
    pub target_quantile: f64,
    pub seeds: usize,
    pub mazes: Vec<MazeSpeedup>,
    pub runs: Vec<RunRecord>,
}

impl SpeedupReport {
    /// Mean and peak of the per-maze ratios against `b`.
    pub fn aggregate(&self, b: Baseline) -> (f64, f64) {
        let ratios: Vec<f64> = self.mazes.iter().map(|m| m.ratio(b)).collect();
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        let peak = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (mean, peak)
    }

    /// Per-maze table, one row per (maze, method).
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "maze,method,median_evaluations,ratio_vs_tuner,censored_runs,threshold,oracle_best\n",
        );
        for m in &self.mazes {
            for method in Method::ALL {
                let censored = self
                    .runs
                    .iter()
                    .filter(|r| r.maze == m.maze && r.method == method && r.censored)
                    .count();
                let ratio = match method {
                    Method::Tuner => 1.0,
                    Method::Baseline(b) => m.ratio(b),
                };
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    m.maze,
                    method.name(),
                    sig17(m.median(method)),
                    sig17(ratio),
                    censored,
                    sig17(m.threshold),
                    sig17(m.oracle_best)
                );
            }
        }
        out
    }

    /// Every individual run.
    pub fn runs_csv(&self) -> String {
        let mut out = String::from("maze,seed,method,evaluations_to_target,censored,best_reward\n");
        for r in &self.runs {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.maze,
                r.seed,
                r.method.name(),
                r.evaluations,
                r.censored,
                sig17(r.best_reward)
            );
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "speedup benchmark: {} mazes, pool {}, budget {}, target top {}%, {} seeds",
            self.mazes.len(),
            self.pool_size,
            self.budget,
            sig17(self.target_quantile * 100.0),
            self.seeds
        );
        let _ = writeln!(out, "evaluations counted as objective calls; censored runs count as the budget");
        out.push('\n');
        let _ = writeln!(
            out,
            "{:>4}  {:>8}  {:>8}  {:>8}  {:>8}  {:>8}  {:>8}  {:>8}",
            "maze", "tuner", "random", "sweep", "grid", "x_rand", "x_sweep", "x_grid"
        );
        for m in &self.mazes {
            let _ = writeln!(
                out,
                "{:>4}  {:>8.1}  {:>8.1}  {:>8.1}  {:>8.1}  {:>8.3}  {:>8.3}  {:>8.3}  tuner hit {}/{}",
                m.maze,
                m.median(Method::Tuner),
                m.median(Method::Baseline(Baseline::Random)),
                m.median(Method::Baseline(Baseline::CoordinateSweep)),
                m.median(Method::Baseline(Baseline::Grid)),
                m.ratio(Baseline::Random),
                m.ratio(Baseline::CoordinateSweep),
                m.ratio(Baseline::Grid),
                m.tuner_hits,
                self.seeds
            );
        }
        out.push('\n');
        for b in Baseline::ALL {
            let (mean, peak) = self.aggregate(b);
            let _ = writeln!(out, "vs {:<16} mean {:.3}x  peak {:.3}x", b.name(), mean, peak);
        }
        out.push('\n');
        let (mean, peak) = self.aggregate(Baseline::Random);
        let _ = writeln!(
            out,
            "reference: measured mean {:.3}x vs published 1.48x; measured peak {:.3}x vs published 1.82x (random-search baseline)",
            mean, peak
        );
        out
    }
}

fn median(values: &mut [usize]) -> f64 {
    values.sort_unstable();
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2] as f64
    } else {
        (values[n / 2 - 1] + values[n / 2]) as f64 / 2.0
    }
}

/// The `ceil(q * n)`-th best value of the oracle table.
pub fn target_threshold(oracle: &[f64], quantile: f64) -> f64 {
    let mut sorted = oracle.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let k = ((quantile * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[k - 1]
}

fn record(maze: usize, seed: usize, method: Method, trace: &TuneTrace, threshold: f64, budget: usize) -> RunRecord {
    let hit = trace.evaluations_to_reach(threshold);
    RunRecord {
        maze,
        seed,
        method,
        evaluations: hit.unwrap_or(budget),
        censored: hit.is_none(),
        best_reward: trace.best().map_or(f64::NEG_INFINITY, |e| e.reward),
    }
}

/// Benchmark over a table of precomputed objective values.
///
/// `oracle[m][i]` is the objective of `pool[i]` on maze `m`. Search methods
/// read this table instead of re-solving, so evaluations are counted, not
/// timed. `features[m]` are the tuner's features on maze `m`.
pub fn benchmark_from_oracle(
    pool: &[Configuration],
    features: &[Vec<crate::tuner::FeatureVector>],
    oracle: &[Vec<f64>],
    cfg: &BenchConfig,
) -> Result<SpeedupReport, BenchError> {
    if !(cfg.target_quantile > 0.0 && cfg.target_quantile < 1.0) {
        return Err(BenchError::Quantile(cfg.target_quantile));
    }
    if oracle.is_empty() {
        return Err(BenchError::NoMazes);
    }
    if cfg.seeds == 0 {
        return Err(BenchError::NoSeeds);
    }
    let index: HashMap<usize, usize> = pool.iter().enumerate().map(|(i, c)| (c.id, i)).collect();
    let jobs: Vec<(usize, usize)> = (0..oracle.len()).flat_map(|m| (0..cfg.seeds).map(move |s| (m, s))).collect();
    let per_job: Result<Vec<Vec<RunRecord>>, BenchError> = jobs
        .par_iter()
        .map(|&(m, s)| {
            let table = &oracle[m];
            let threshold = target_threshold(table, cfg.target_quantile);
            let lookup = |c: &Configuration| -> Result<f64, TuneError> { Ok(table[index[&c.id]]) };
            let wrap = |source| BenchError::Tune { maze: m, source };
            let run_seed = derive_seed(derive_seed(cfg.seed, m as u64), s as u64);
            let opts = TuneOptions {
                budget: cfg.budget,
                seed: derive_seed(run_seed, stream::TUNER),
                ..cfg.tune
            };
            let mut records = Vec::with_capacity(Method::ALL.len());
            let out = tune_with(pool, &features[m], m, &opts, lookup).map_err(wrap)?;
            records.push(record(m, s, Method::Tuner, &out.trace, threshold, cfg.budget));
            for b in Baseline::ALL {
                let stream_id = match b {
                    Baseline::Random => stream::RANDOM_SEARCH,
                    Baseline::CoordinateSweep => stream::SWEEP,
                    Baseline::Grid => stream::GRID,
                };
                let trace = b
                    .run(pool, cfg.budget, derive_seed(run_seed, stream_id), lookup)
                    .map_err(wrap)?;
                records.push(record(m, s, Method::Baseline(b), &trace, threshold, cfg.budget));
            }
            Ok(records)
        })
        .collect();
    let runs: Vec<RunRecord> = per_job?.into_iter().flatten().collect();

    let mazes = (0..oracle.len())
        .map(|m| {
            let threshold = target_threshold(&oracle[m], cfg.target_quantile);
            let medians: Vec<(Method, f64)> = Method::ALL
                .iter()
                .map(|&method| {
                    let mut evals: Vec<usize> = runs
                        .iter()
                        .filter(|r| r.maze == m && r.method == method)
                        .map(|r| r.evaluations)
                        .collect();
                    (method, median(&mut evals))
                })
                .collect();
            let tuner = medians[0].1;
            let ratios = Baseline::ALL
                .iter()
                .zip(&medians[1..])
                .map(|(&b, &(_, med))| (b, med / tuner))
                .collect();
            MazeSpeedup {
                maze: m,
                threshold,
                oracle_best: oracle[m].iter().copied().fold(f64::NEG_INFINITY, f64::max),
                medians,
                ratios,
                tuner_hits: runs
                    .iter()
                    .filter(|r| r.maze == m && r.method == Method::Tuner && !r.censored)
                    .count(),
            }
        })
        .collect();
    Ok(SpeedupReport {
        budget: cfg.budget,
        pool_size: pool.len(),
        target_quantile: cfg.target_quantile,
        seeds: cfg.seeds,
        mazes,
        runs,
    })
}

/// Exhaustive objective values of `pool` on `maze`, in pool order.
pub fn oracle_table(maze: &Maze, pool: &[Configuration], theta: f64) -> Result<Vec<f64>, TuneError> {
    let objective = Objective {
        theta,
        ..Objective::new(maze)
    };
    pool.par_iter().map(|c| objective.evaluate(c)).collect()
}

/// Generates the shared pool, builds each maze's oracle table and features,
/// then runs [`benchmark_from_oracle`].
pub fn benchmark_speedup(mazes: &[Maze], cfg: &BenchConfig) -> Result<SpeedupReport, BenchError> {
    if mazes.is_empty() {
        return Err(BenchError::NoMazes);
    }
    if !(cfg.target_quantile > 0.0 && cfg.target_quantile < 1.0) {
        return Err(BenchError::Quantile(cfg.target_quantile));
    }
    let pool = generate_candidates(&cfg.ranges, cfg.pool_size, derive_seed(cfg.seed, stream::POOL))?;
    let mut oracle = Vec::with_capacity(mazes.len());
    let mut features = Vec::with_capacity(mazes.len());
    for (m, maze) in mazes.iter().enumerate() {
        oracle.push(oracle_table(maze, &pool, cfg.theta).map_err(|source| BenchError::Tune { maze: m, source })?);
        let f = Featurizer::fit(maze, &pool).ok_or(BenchError::Tune {
            maze: m,
            source: TuneError::ZeroBudget,
        })?;
        features.push(f.featurize_all(&pool));
    }
    benchmark_from_oracle(&pool, &features, &oracle, cfg)
}
