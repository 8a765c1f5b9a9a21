//! Budgeted tuning loop driven by the ranking model.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use thiserror::Error;

use super::features::{FeatureVector, Featurizer};
use super::ranking::{fit_ranking_model, FeatureTable, FitOptions, PartialRanking, RankingError, RankingModel};
use super::Configuration;
use crate::config::rng;
use crate::maze::{Maze, RewardParams};
use crate::numfmt::sig17;
use crate::solver::{self, SolveError, DEFAULT_THETA};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TuneError {
    #[error("budget {budget} exceeds pool size {pool}")]
    BudgetExceedsPool { budget: usize, pool: usize },
    #[error("seed count {seed_count} must be below the budget {budget}")]
    SeedCount { seed_count: usize, budget: usize },
    #[error("budget must be at least 1")]
    ZeroBudget,
    #[error("refit interval must be at least 1")]
    ZeroRefit,
    #[error("configuration id {0} appears twice in the pool")]
    DuplicateId(usize),
    #[error("pool has {pool} configurations but {features} feature vectors")]
    FeatureCount { pool: usize, features: usize },
    #[error("configuration {config_id}: {source}")]
    Solve {
        config_id: usize,
        #[source]
        source: SolveError,
    },
    #[error(transparent)]
    Ranking(#[from] RankingError),
}

/// How an evaluated configuration's rollout is scored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scoring {
    /// With the configuration's own reward weights.
    OwnParams,
    /// With a fixed reference reward, independent of the configuration.
    Reference(RewardParams),
}

/// Tuning objective: solve with the candidate's parameters, then score the
/// greedy rollout from the start.
#[derive(Debug, Clone)]
pub struct Objective<'a> {
    pub maze: &'a Maze,
    pub theta: f64,
    pub max_steps: usize,
    pub discounted: bool,
    pub scoring: Scoring,
}

impl<'a> Objective<'a> {
    pub fn new(maze: &'a Maze) -> Self {
        Objective {
            maze,
            theta: DEFAULT_THETA,
            max_steps: solver::default_max_steps(maze),
            discounted: false,
            scoring: Scoring::OwnParams,
        }
    }

    pub fn evaluate(&self, c: &Configuration) -> Result<f64, TuneError> {
        let wrap = |source| TuneError::Solve {
            config_id: c.id,
            source,
        };
        let sol = solver::solve(self.maze, &c.params, self.theta).map_err(wrap)?;
        let path = solver::extract_path(self.maze, &sol.policy, self.max_steps).map_err(wrap)?;
        let params = match self.scoring {
            Scoring::OwnParams => c.params,
            Scoring::Reference(p) => p,
        };
        Ok(solver::path_reward(self.maze, &params, &path, self.discounted))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuneOptions {
    pub budget: usize,
    pub seed_count: usize,
    pub refit_every: usize,
    pub fit: FitOptions,
    pub seed: u64,
}

impl Default for TuneOptions {
    fn default() -> Self {
        TuneOptions {
            budget: 40,
            seed_count: 10,
            refit_every: 1,
            fit: FitOptions::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub eval_index: usize,
    pub config: Configuration,
    pub reward: f64,
    pub best_so_far: f64,
}

/// Evaluations in the order they were made.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TuneTrace {
    entries: Vec<TraceEntry>,
}

impl TuneTrace {
    pub fn push(&mut self, config: Configuration, reward: f64) {
        let best = self
            .entries
            .last()
            .map_or(reward, |e| e.best_so_far.max(reward));
        self.entries.push(TraceEntry {
            eval_index: self.entries.len(),
            config,
            reward,
            best_so_far: best,
        });
    }

    pub fn entries(&self) -> &[TraceEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// First-best evaluated entry.
    pub fn best(&self) -> Option<&TraceEntry> {
        self.entries
            .iter()
            .fold(None, |acc: Option<&TraceEntry>, e| match acc {
                Some(b) if b.reward >= e.reward => Some(b),
                _ => Some(e),
            })
    }

    /// Number of evaluations until the running best reaches `threshold`.
    pub fn evaluations_to_reach(&self, threshold: f64) -> Option<usize> {
        self.entries
            .iter()
            .position(|e| e.best_so_far >= threshold)
            .map(|i| i + 1)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "eval_index,config_id,step_cost,bump_penalty,oil_penalty,goal_reward,gamma,accumulated_reward,best_so_far\n",
        );
        for e in &self.entries {
            let p = &e.config.params;
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                e.eval_index,
                e.config.id,
                sig17(p.step_cost),
                sig17(p.bump_penalty),
                sig17(p.oil_penalty),
                sig17(p.goal_reward),
                sig17(p.gamma),
                sig17(e.reward),
                sig17(e.best_so_far)
            ));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneOutcome {
    pub best: Configuration,
    pub best_reward: f64,
    pub trace: TuneTrace,
    pub model: RankingModel,
}

pub(crate) fn check_pool(pool: &[Configuration], budget: usize) -> Result<(), TuneError> {
    if budget == 0 {
        return Err(TuneError::ZeroBudget);
    }
    if budget > pool.len() {
        return Err(TuneError::BudgetExceedsPool {
            budget,
            pool: pool.len(),
        });
    }
    let mut ids = BTreeSet::new();
    for c in pool {
        if !ids.insert(c.id) {
            return Err(TuneError::DuplicateId(c.id));
        }
    }
    Ok(())
}

/// Tunes over `pool` on one maze with the default objective.
pub fn tune(maze: &Maze, pool: &[Configuration], opts: &TuneOptions) -> Result<TuneOutcome, TuneError> {
    check_pool(pool, opts.budget)?;
    let featurizer = Featurizer::fit(maze, pool).expect("pool checked non-empty");
    let features = featurizer.featurize_all(pool);
    let objective = Objective::new(maze);
    tune_with(pool, &features, 0, opts, |c| objective.evaluate(c))
}

/// Tuning loop with a caller-supplied objective.
///
/// `features[i]` belongs to `pool[i]`; `scenario` tags the rankings built
/// from the observed rewards. Seed evaluations may run in parallel and are
/// recorded in ascending configuration-id order.
pub fn tune_with<F>(
    pool: &[Configuration],
    features: &[FeatureVector],
    scenario: usize,
    opts: &TuneOptions,
    objective: F,
) -> Result<TuneOutcome, TuneError>
where
    F: Fn(&Configuration) -> Result<f64, TuneError> + Sync,
{
    check_pool(pool, opts.budget)?;
    if opts.seed_count >= opts.budget {
        return Err(TuneError::SeedCount {
            seed_count: opts.seed_count,
            budget: opts.budget,
        });
    }
    if opts.refit_every == 0 {
        return Err(TuneError::ZeroRefit);
    }
    if features.len() != pool.len() {
        return Err(TuneError::FeatureCount {
            pool: pool.len(),
            features: features.len(),
        });
    }
    let dim = features.first().map_or(0, FeatureVector::dim);
    let mut table = FeatureTable::new();
    for (c, fv) in pool.iter().zip(features) {
        table.insert(scenario, c.id, fv.clone());
    }

    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.shuffle(&mut rng(opts.seed));
    let mut seeds: Vec<usize> = order[..opts.seed_count].to_vec();
    seeds.sort_by_key(|&i| pool[i].id);

    let mut evaluated = vec![false; pool.len()];
    let mut observed: Vec<(usize, f64)> = Vec::with_capacity(opts.budget);
    let mut trace = TuneTrace::default();

    let seed_rewards: Vec<Result<f64, TuneError>> =
        seeds.par_iter().map(|&i| objective(&pool[i])).collect();
    for (&i, r) in seeds.iter().zip(seed_rewards) {
        let reward = r?;
        evaluated[i] = true;
        observed.push((pool[i].id, reward));
        trace.push(pool[i], reward);
    }

    let fit = |observed: &[(usize, f64)]| -> Result<Option<RankingModel>, TuneError> {
        let ranking = PartialRanking::from_scores(scenario, observed);
        if ranking.pairs().is_empty() {
            return Ok(None);
        }
        Ok(Some(fit_ranking_model(&[ranking], &table, &opts.fit)?))
    };

    let mut model: Option<RankingModel> = None;
    let mut since_fit = usize::MAX;
    while trace.len() < opts.budget {
        if since_fit >= opts.refit_every {
            model = fit(&observed)?;
            since_fit = 0;
        }
        let next = match &model {
            Some(m) => (0..pool.len())
                .filter(|&i| !evaluated[i])
                .map(|i| (m.w.dot(features[i].values()), i))
                .max_by(|a, b| a.0.total_cmp(&b.0).then(pool[b.1].id.cmp(&pool[a.1].id)))
                .map(|(_, i)| i),
            // no ordered pair yet: continue down the shuffled order
            None => order.iter().copied().find(|&i| !evaluated[i]),
        }
        .expect("budget within pool size");
        let reward = objective(&pool[next])?;
        evaluated[next] = true;
        observed.push((pool[next].id, reward));
        trace.push(pool[next], reward);
        since_fit += 1;
    }

    let model = fit(&observed)?.unwrap_or_else(|| RankingModel::zeros(dim, opts.fit.c_reg));
    let best = *trace.best().expect("budget >= 1");
    Ok(TuneOutcome {
        best: best.config,
        best_reward: best.reward,
        trace,
        model,
    })
}
