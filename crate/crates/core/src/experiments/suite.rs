//! The multi-maze policy suite behind the spider plots.

use rayon::prelude::*;
use thiserror::Error;

use super::generators::{generate_maze, GenerateError, MazeSpec};
use crate::config::{derive_seed, stream};
use crate::maze::Maze;
use crate::numfmt::sig17;
use crate::solver::{self, SolveError};
use crate::tuner::{
    fit_ranking_model, generate_candidates, tune_with, Configuration, FeatureTable, Featurizer, FitOptions,
    Objective, ParamRanges, PartialRanking, RankingError, SamplingError, TuneError, TuneOptions,
};

pub const POLICY_COUNT: usize = 12;
pub const DEFAULT_GAMMAS: (f64, f64) = (0.5, 0.95);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GammaRegime {
    Low,
    High,
}

impl GammaRegime {
    pub fn name(self) -> &'static str {
        match self {
            GammaRegime::Low => "low",
            GammaRegime::High => "high",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpiderRow {
    pub maze: usize,
    pub policy: usize,
    pub regime: GammaRegime,
    pub gamma: f64,
    pub reward: f64,
}

/// Accumulated reward per (maze, policy, gamma regime).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SpiderTable {
    pub rows: Vec<SpiderRow>,
}

impl SpiderTable {
    pub fn maze_ids(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = self.rows.iter().map(|r| r.maze).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    pub fn get(&self, maze: usize, policy: usize, regime: GammaRegime) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.maze == maze && r.policy == policy && r.regime == regime)
            .map(|r| r.reward)
    }

    /// Low and high traces for one maze, if all 24 cells are present.
    pub fn traces(&self, maze: usize) -> Option<(Vec<f64>, Vec<f64>)> {
        let low: Option<Vec<f64>> = (0..POLICY_COUNT).map(|p| self.get(maze, p, GammaRegime::Low)).collect();
        let high: Option<Vec<f64>> = (0..POLICY_COUNT).map(|p| self.get(maze, p, GammaRegime::High)).collect();
        Some((low?, high?))
    }

    /// Exactly one row per (maze, policy, regime) for every maze present.
    pub fn check_complete(&self) -> Result<(), String> {
        let mazes = self.maze_ids();
        if mazes.is_empty() {
            return Err("spider table is empty".into());
        }
        if self.rows.len() != mazes.len() * POLICY_COUNT * 2 {
            return Err(format!(
                "spider table has {} rows, expected {}",
                self.rows.len(),
                mazes.len() * POLICY_COUNT * 2
            ));
        }
        for &m in &mazes {
            for p in 0..POLICY_COUNT {
                for regime in [GammaRegime::Low, GammaRegime::High] {
                    let n = self
                        .rows
                        .iter()
                        .filter(|r| r.maze == m && r.policy == p && r.regime == regime)
                        .count();
                    if n != 1 {
                        return Err(format!("maze {m}, R{p}, {} gamma: {n} rows", regime.name()));
                    }
                }
            }
        }
        Ok(())
    }

    /// Best policy per maze over both regimes (first on ties).
    pub fn argmax_policies(&self) -> Vec<(usize, usize)> {
        self.maze_ids()
            .into_iter()
            .map(|m| {
                let best = self
                    .rows
                    .iter()
                    .filter(|r| r.maze == m)
                    .fold(None::<&SpiderRow>, |acc, r| match acc {
                        Some(b) if b.reward >= r.reward => Some(b),
                        _ => Some(r),
                    })
                    .map_or(0, |r| r.policy);
                (m, best)
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("maze,policy,gamma_regime,gamma,accumulated_reward\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},R{},{},{},{}\n",
                r.maze,
                r.policy,
                r.regime.name(),
                sig17(r.gamma),
                sig17(r.reward)
            ));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<SpiderTable, String> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == "maze,policy,gamma_regime,gamma,accumulated_reward" => {}
            other => return Err(format!("unexpected header {other:?}")),
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = || format!("line {}: malformed row", i + 2);
            if f.len() != 5 {
                return Err(bad());
            }
            rows.push(SpiderRow {
                maze: f[0].parse().map_err(|_| bad())?,
                policy: f[1].strip_prefix('R').and_then(|p| p.parse().ok()).ok_or_else(bad)?,
                regime: match f[2] {
                    "low" => GammaRegime::Low,
                    "high" => GammaRegime::High,
                    _ => return Err(bad()),
                },
                gamma: f[3].parse().map_err(|_| bad())?,
                reward: f[4].parse().map_err(|_| bad())?,
            });
        }
        Ok(SpiderTable { rows })
    }
}

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("expected {POLICY_COUNT} policies, got {0}")]
    PolicyCount(usize),
    #[error("no mazes given")]
    NoMazes,
    #[error("gammas must satisfy 0 < low < high < 1, got ({0}, {1})")]
    Gammas(f64, f64),
    #[error("maze {maze}, policy R{policy}: {source}")]
    Solve {
        maze: usize,
        policy: usize,
        #[source]
        source: SolveError,
    },
    #[error(transparent)]
    Generate(#[from] GenerateError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Tune(#[from] TuneError),
    #[error(transparent)]
    Ranking(#[from] RankingError),
}

/// Solves every (maze, policy, regime) cell with the regime's gamma
/// substituted and records the accumulated reward. Rows come out in
/// (maze, policy, regime) order whatever the thread count.
pub fn run_policy_suite(
    mazes: &[Maze],
    policies: &[Configuration],
    gammas: (f64, f64),
    theta: f64,
) -> Result<SpiderTable, SuiteError> {
    if mazes.is_empty() {
        return Err(SuiteError::NoMazes);
    }
    if policies.len() != POLICY_COUNT {
        return Err(SuiteError::PolicyCount(policies.len()));
    }
    let (low, high) = gammas;
    if !(0.0 < low && low < high && high < 1.0) {
        return Err(SuiteError::Gammas(low, high));
    }
    let cells: Vec<(usize, usize, GammaRegime, f64)> = (0..mazes.len())
        .flat_map(|m| {
            (0..POLICY_COUNT).flat_map(move |p| {
                [(m, p, GammaRegime::Low, low), (m, p, GammaRegime::High, high)]
            })
        })
        .collect();
    let rows: Result<Vec<SpiderRow>, SuiteError> = cells
        .par_iter()
        .map(|&(m, p, regime, gamma)| {
            let maze = &mazes[m];
            let params = policies[p].params.with_gamma(gamma);
            let wrap = |source| SuiteError::Solve {
                maze: m,
                policy: p,
                source,
            };
            let sol = solver::solve(maze, &params, theta).map_err(wrap)?;
            let reward = solver::accumulated_reward(maze, &params, &sol.policy, solver::default_max_steps(maze))
                .map_err(wrap)?;
            Ok(SpiderRow {
                maze: m,
                policy: p,
                regime,
                gamma,
                reward,
            })
        })
        .collect();
    Ok(SpiderTable { rows: rows? })
}

/// Settings for the full spider experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SpiderConfig {
    pub maze_count: usize,
    pub width: usize,
    pub height: usize,
    pub pool_size: usize,
    pub ranges: ParamRanges,
    pub tune: TuneOptions,
    pub gammas: (f64, f64),
    pub theta: f64,
    pub seed: u64,
}

impl Default for SpiderConfig {
    fn default() -> Self {
        SpiderConfig {
            maze_count: 8,
            width: 15,
            height: 15,
            pool_size: 200,
            ranges: ParamRanges::default(),
            tune: TuneOptions::default(),
            gammas: DEFAULT_GAMMAS,
            theta: solver::DEFAULT_THETA,
            seed: 0,
        }
    }
}

/// Seeded multi-modal maze family of identical size with per-maze densities.
pub fn suite_mazes(count: usize, width: usize, height: usize, seed: u64) -> Result<Vec<Maze>, GenerateError> {
    (0..count)
        .map(|i| {
            let s = derive_seed(derive_seed(seed, stream::MAZES), i as u64);
            let mut r = crate::config::rng(s);
            use rand::Rng;
            let densities = (
                r.gen_range(0.10..0.30),
                r.gen_range(0.05..0.20),
                r.gen_range(0.02..0.12),
            );
            generate_maze(&MazeSpec::multi_modal(width, height, densities, s))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpiderRun {
    pub mazes: Vec<Maze>,
    pub policies: Vec<Configuration>,
    pub table: SpiderTable,
}

/// Tunes on every maze over one shared pool, fits a single ranking model on
/// all the resulting partial rankings, takes its top twelve configurations
/// as R0..R11 and runs the suite with them.
pub fn spider_experiment(cfg: &SpiderConfig) -> Result<SpiderRun, SuiteError> {
    let mazes = suite_mazes(cfg.maze_count, cfg.width, cfg.height, cfg.seed)?;
    if mazes.is_empty() {
        return Err(SuiteError::NoMazes);
    }
    let pool = generate_candidates(&cfg.ranges, cfg.pool_size, derive_seed(cfg.seed, stream::POOL))?;
    let mut table = FeatureTable::new();
    let mut featurized = Vec::with_capacity(mazes.len());
    for (m, maze) in mazes.iter().enumerate() {
        let f = Featurizer::fit(maze, &pool).expect("pool non-empty");
        let feats = f.featurize_all(&pool);
        for (c, fv) in pool.iter().zip(&feats) {
            table.insert(m, c.id, fv.clone());
        }
        featurized.push(feats);
    }
    let mut rankings = Vec::with_capacity(mazes.len());
    for (m, maze) in mazes.iter().enumerate() {
        let objective = Objective {
            theta: cfg.theta,
            ..Objective::new(maze)
        };
        let opts = TuneOptions {
            seed: derive_seed(derive_seed(cfg.seed, stream::TUNER), m as u64),
            ..cfg.tune
        };
        let out = tune_with(&pool, &featurized[m], m, &opts, |c| objective.evaluate(c))?;
        let scored: Vec<(usize, f64)> = out.trace.entries().iter().map(|e| (e.config.id, e.reward)).collect();
        rankings.push(PartialRanking::from_scores(m, &scored));
    }
    let model = fit_ranking_model(&rankings, &table, &FitOptions { ..cfg.tune.fit })?;
    let mut scored: Vec<(f64, usize)> = pool
        .iter()
        .enumerate()
        .map(|(i, _)| {
            let s: f64 = featurized.iter().map(|f| model.w.dot(f[i].values())).sum();
            (s / mazes.len() as f64, i)
        })
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let policies: Vec<Configuration> = scored
        .iter()
        .take(POLICY_COUNT)
        .enumerate()
        .map(|(k, &(_, i))| Configuration::new(k, pool[i].params))
        .collect();
    let table = run_policy_suite(&mazes, &policies, cfg.gammas, cfg.theta)?;
    Ok(SpiderRun {
        mazes,
        policies,
        table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maze::RewardParams;

    fn policies() -> Vec<Configuration> {
        (0..POLICY_COUNT)
            .map(|k| {
                Configuration::new(
                    k,
                    RewardParams::new(-1.0, -(k as f64), -2.0 * k as f64, 20.0 + k as f64, 0.9).unwrap(),
                )
            })
            .collect()
    }

    #[test]
    fn one_maze_gives_24_rows() {
        let maze = Maze::parse("S.B.\n.O..\n...G").unwrap();
        let t = run_policy_suite(&[maze], &policies(), (0.5, 0.95), 1e-6).unwrap();
        assert_eq!(t.rows.len(), 24);
        t.check_complete().unwrap();
        assert_eq!(SpiderTable::from_csv(&t.to_csv()).unwrap(), t);
    }

    #[test]
    fn gamma_substitution_is_pure() {
        let maze = Maze::parse("S.B.\n.O..\n...G").unwrap();
        let mut pols = policies();
        pols[1].params = pols[0].params.with_gamma(0.3);
        let t = run_policy_suite(&[maze], &pols, (0.5, 0.95), 1e-6).unwrap();
        for regime in [GammaRegime::Low, GammaRegime::High] {
            assert_eq!(t.get(0, 0, regime), t.get(0, 1, regime));
        }
    }

    #[test]
    fn argument_checks() {
        let maze = Maze::parse("SG").unwrap();
        assert!(matches!(
            run_policy_suite(&[maze.clone()], &policies()[..11], (0.5, 0.9), 1e-6),
            Err(SuiteError::PolicyCount(11))
        ));
        assert!(matches!(
            run_policy_suite(&[maze.clone()], &policies(), (0.9, 0.5), 1e-6),
            Err(SuiteError::Gammas(..))
        ));
        assert!(matches!(run_policy_suite(&[], &policies(), (0.5, 0.9), 1e-6), Err(SuiteError::NoMazes)));
        let mut t = run_policy_suite(&[maze], &policies(), (0.5, 0.9), 1e-6).unwrap();
        t.rows.pop();
        assert!(t.check_complete().is_err());
    }
}
