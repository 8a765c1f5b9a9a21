//! Tabular dynamic programming over a [`Maze`].
//!
//! Iterative policy evaluation sweeps states in ascending index order and
//! updates values in place. Policy improvement is greedy with ties resolved
//! by the fixed action order North < South < East < West.

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::maze::{Action, Maze, ParamsError, RewardParams, StateId};
use crate::numfmt::sig17;

/// Default convergence threshold in value units.
pub const DEFAULT_THETA: f64 = 1e-6;
/// Default cap on improvement rounds.
pub const DEFAULT_MAX_ROUNDS: usize = 1000;
/// Default cap on evaluation sweeps per call.
pub const DEFAULT_MAX_SWEEPS: usize = 10_000_000;
/// Action values closer than this to the incumbent's are treated as ties.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("theta must be positive and finite, got {0}")]
    InvalidTheta(f64),
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error("policy has no action for state {state} (row {row}, column {col})")]
    PolicyNotTotal { state: usize, row: usize, col: usize },
    #[error("policy covers {found} cells, maze has {expected}")]
    PolicySize { expected: usize, found: usize },
    #[error("value function covers {found} cells, maze has {expected}")]
    ValueSize { expected: usize, found: usize },
    #[error("policy iteration did not stabilise within {0} rounds")]
    RoundLimit(usize),
    #[error("evaluation did not converge within {sweeps} sweeps (residual {residual})")]
    SweepLimit { sweeps: usize, residual: f64 },
    #[error("linear system is singular at pivot {0}")]
    Singular(usize),
    #[error("max_steps must be at least 1")]
    ZeroSteps,
}

/// Deterministic action choice for every non-goal state.
///
/// Stored per cell index; wall cells and the goal carry `None`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Policy {
    actions: Vec<Option<Action>>,
}

impl Policy {
    /// Same action in every non-goal state.
    pub fn uniform(maze: &Maze, action: Action) -> Policy {
        let mut actions = vec![None; maze.cell_count()];
        for s in maze.states() {
            if s != maze.goal() {
                actions[s.0] = Some(action);
            }
        }
        Policy { actions }
    }

    /// Seeded random policy, one uniform draw per non-goal state in sweep order.
    pub fn random<R: rand::Rng + ?Sized>(maze: &Maze, rng: &mut R) -> Policy {
        let mut actions = vec![None; maze.cell_count()];
        for s in maze.states() {
            if s != maze.goal() {
                actions[s.0] = Some(Action::ALL[rng.gen_range(0..4)]);
            }
        }
        Policy { actions }
    }

    /// Raw per-cell table; not checked for totality until used.
    pub fn from_cells(actions: Vec<Option<Action>>) -> Policy {
        Policy { actions }
    }

    pub fn get(&self, s: StateId) -> Option<Action> {
        self.actions.get(s.0).copied().flatten()
    }

    pub fn set(&mut self, s: StateId, a: Action) {
        self.actions[s.0] = Some(a);
    }

    pub fn cells(&self) -> &[Option<Action>] {
        &self.actions
    }

    /// Checks that every non-goal state of `maze` has an action.
    pub fn check_total(&self, maze: &Maze) -> Result<(), SolveError> {
        if self.actions.len() != maze.cell_count() {
            return Err(SolveError::PolicySize {
                expected: maze.cell_count(),
                found: self.actions.len(),
            });
        }
        for s in maze.states() {
            if s != maze.goal() && self.actions[s.0].is_none() {
                let (row, col) = maze.row_col(s);
                return Err(SolveError::PolicyNotTotal {
                    state: s.0,
                    row: row + 1,
                    col: col + 1,
                });
            }
        }
        Ok(())
    }

    /// `row,col,action` lines (zero-based coordinates) for every non-goal state.
    pub fn to_text(&self, maze: &Maze) -> String {
        let mut out = String::from("row,col,action\n");
        for s in maze.states() {
            if let Some(a) = self.get(s) {
                let (r, c) = maze.row_col(s);
                out.push_str(&format!("{r},{c},{a}\n"));
            }
        }
        out
    }
}

/// State values indexed by cell; wall cells hold 0 and are never read.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueFunction {
    values: Vec<f64>,
}

impl ValueFunction {
    pub fn zeros(maze: &Maze) -> ValueFunction {
        ValueFunction {
            values: vec![0.0; maze.cell_count()],
        }
    }

    pub fn from_cells(values: Vec<f64>) -> ValueFunction {
        ValueFunction { values }
    }

    pub fn get(&self, s: StateId) -> f64 {
        self.values[s.0]
    }

    pub fn cells(&self) -> &[f64] {
        &self.values
    }

    /// Largest absolute difference over the states of `maze`.
    pub fn max_gap(&self, other: &ValueFunction, maze: &Maze) -> f64 {
        maze.states()
            .into_iter()
            .map(|s| (self.get(s) - other.get(s)).abs())
            .fold(0.0, f64::max)
    }

    /// CSV with header `state,row,col,value`, one line per state.
    pub fn to_csv(&self, maze: &Maze) -> String {
        let mut out = String::from("state,row,col,value\n");
        for s in maze.states() {
            let (r, c) = maze.row_col(s);
            out.push_str(&format!("{},{},{},{}\n", s.0, r, c, sig17(self.get(s))));
        }
        out
    }

    /// Reads the CSV written by [`ValueFunction::to_csv`].
    pub fn from_csv(maze: &Maze, text: &str) -> Result<ValueFunction, String> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == "state,row,col,value" => {}
            other => return Err(format!("unexpected header {other:?}")),
        }
        let mut values = vec![0.0; maze.cell_count()];
        let mut seen = vec![false; maze.cell_count()];
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(format!("line {}: expected 4 fields", i + 2));
            }
            let state: usize = fields[0]
                .trim()
                .parse()
                .map_err(|e| format!("line {}: bad state: {e}", i + 2))?;
            let value: f64 = fields[3]
                .trim()
                .parse()
                .map_err(|e| format!("line {}: bad value: {e}", i + 2))?;
            if !maze.is_state(StateId(state)) {
                return Err(format!("line {}: {state} is not a state of the maze", i + 2));
            }
            values[state] = value;
            seen[state] = true;
        }
        if let Some(s) = maze.states().into_iter().find(|s| !seen[s.0]) {
            return Err(format!("missing value for state {}", s.0));
        }
        Ok(ValueFunction { values })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolveStats {
    pub sweeps: usize,
    pub improvement_rounds: usize,
    pub residual: f64,
    pub elapsed: Duration,
    pub evaluations: u64,
}

impl SolveStats {
    /// Key=value summary, without wall-clock time.
    pub fn summary(&self) -> String {
        format!(
            "sweeps={}\nimprovement_rounds={}\nresidual={}\nevaluations={}\n",
            self.sweeps,
            self.improvement_rounds,
            sig17(self.residual),
            self.evaluations
        )
    }
}

/// Tunables for iterative solves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub theta: f64,
    pub max_rounds: usize,
    pub max_sweeps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            theta: DEFAULT_THETA,
            max_rounds: DEFAULT_MAX_ROUNDS,
            max_sweeps: DEFAULT_MAX_SWEEPS,
        }
    }
}

impl SolverConfig {
    pub fn with_theta(theta: f64) -> Self {
        SolverConfig {
            theta,
            ..Default::default()
        }
    }

    fn check(&self) -> Result<(), SolveError> {
        if self.theta > 0.0 && self.theta.is_finite() {
            Ok(())
        } else {
            Err(SolveError::InvalidTheta(self.theta))
        }
    }
}

/// Dense transition and reward tables over the states of a maze.
struct Tables {
    states: Vec<StateId>,
    goal: usize,
    next: Vec<[usize; 4]>,
    reward: Vec<[f64; 4]>,
    gamma: f64,
}

impl Tables {
    fn build(maze: &Maze, params: &RewardParams) -> Tables {
        let states = maze.states();
        let mut dense = vec![usize::MAX; maze.cell_count()];
        for (k, s) in states.iter().enumerate() {
            dense[s.0] = k;
        }
        let mut next = Vec::with_capacity(states.len());
        let mut reward = Vec::with_capacity(states.len());
        for &s in &states {
            let mut n = [0usize; 4];
            let mut r = [0.0; 4];
            for a in Action::ALL {
                let s2 = maze.transition(s, a);
                n[a.index()] = dense[s2.0];
                r[a.index()] = maze.reward(params, s, a, s2);
            }
            next.push(n);
            reward.push(r);
        }
        Tables {
            goal: dense[maze.goal().0],
            states,
            next,
            reward,
            gamma: params.gamma,
        }
    }

    fn len(&self) -> usize {
        self.states.len()
    }

    #[inline]
    fn q(&self, v: &[f64], k: usize, a: usize) -> f64 {
        self.reward[k][a] + self.gamma * v[self.next[k][a]]
    }

    fn dense_policy(&self, pi: &Policy) -> Vec<usize> {
        self.states
            .iter()
            .map(|&s| pi.get(s).map_or(0, Action::index))
            .collect()
    }

    fn dense_values(&self, v: &ValueFunction) -> Vec<f64> {
        self.states.iter().map(|&s| v.get(s)).collect()
    }

    fn to_values(&self, dense: &[f64], cells: usize) -> ValueFunction {
        let mut values = vec![0.0; cells];
        for (k, s) in self.states.iter().enumerate() {
            values[s.0] = dense[k];
        }
        ValueFunction { values }
    }

    fn to_policy(&self, dense: &[usize], cells: usize) -> Policy {
        let mut actions = vec![None; cells];
        for (k, s) in self.states.iter().enumerate() {
            if k != self.goal {
                actions[s.0] = Action::from_index(dense[k]);
            }
        }
        Policy { actions }
    }

    /// In-place sweeps under a fixed policy until the largest change drops
    /// below theta. Returns (sweeps, residual, backups).
    fn evaluate(
        &self,
        policy: &[usize],
        v: &mut [f64],
        cfg: &SolverConfig,
    ) -> Result<(usize, f64, u64), SolveError> {
        let mut sweeps = 0;
        let mut backups = 0u64;
        loop {
            let mut delta: f64 = 0.0;
            for k in 0..self.len() {
                if k == self.goal {
                    continue;
                }
                let old = v[k];
                let new = self.q(v, k, policy[k]);
                v[k] = new;
                delta = delta.max((old - new).abs());
            }
            sweeps += 1;
            backups += self.len() as u64 - 1;
            if delta < cfg.theta {
                return Ok((sweeps, delta, backups));
            }
            if sweeps >= cfg.max_sweeps || !delta.is_finite() {
                return Err(SolveError::SweepLimit {
                    sweeps,
                    residual: delta,
                });
            }
        }
    }

    /// Greedy improvement in place. Returns whether no action changed.
    fn improve(&self, v: &[f64], policy: &mut [usize]) -> bool {
        let mut stable = true;
        for k in 0..self.len() {
            if k == self.goal {
                continue;
            }
            let best = self.argmax(v, k);
            let old = policy[k];
            if best != old && self.q(v, k, best) - self.q(v, k, old) > TIE_TOLERANCE {
                policy[k] = best;
                stable = false;
            }
        }
        stable
    }

    /// First action in the fixed order attaining the maximum backup.
    fn argmax(&self, v: &[f64], k: usize) -> usize {
        let mut best = 0;
        let mut best_q = self.q(v, k, 0);
        for a in 1..4 {
            let q = self.q(v, k, a);
            if q > best_q {
                best = a;
                best_q = q;
            }
        }
        best
    }
}

fn check_values(maze: &Maze, v: &ValueFunction) -> Result<(), SolveError> {
    if v.values.len() != maze.cell_count() {
        return Err(SolveError::ValueSize {
            expected: maze.cell_count(),
            found: v.values.len(),
        });
    }
    Ok(())
}

/// Iterative evaluation of `pi` from an all-zero start.
pub fn policy_evaluation(
    maze: &Maze,
    params: &RewardParams,
    pi: &Policy,
    theta: f64,
) -> Result<(ValueFunction, SolveStats), SolveError> {
    policy_evaluation_with(maze, params, pi, &SolverConfig::with_theta(theta))
}

pub fn policy_evaluation_with(
    maze: &Maze,
    params: &RewardParams,
    pi: &Policy,
    cfg: &SolverConfig,
) -> Result<(ValueFunction, SolveStats), SolveError> {
    cfg.check()?;
    params.validate()?;
    pi.check_total(maze)?;
    let started = Instant::now();
    let tables = Tables::build(maze, params);
    let policy = tables.dense_policy(pi);
    let mut v = vec![0.0; tables.len()];
    let (sweeps, residual, evaluations) = tables.evaluate(&policy, &mut v, cfg)?;
    let stats = SolveStats {
        sweeps,
        improvement_rounds: 0,
        residual,
        elapsed: started.elapsed(),
        evaluations,
    };
    Ok((tables.to_values(&v, maze.cell_count()), stats))
}

/// Solves `(I - gamma P) V = R` for `pi` by Gaussian elimination with
/// partial pivoting. The goal row is pinned to zero.
pub fn policy_evaluation_exact(
    maze: &Maze,
    params: &RewardParams,
    pi: &Policy,
) -> Result<ValueFunction, SolveError> {
    params.validate()?;
    pi.check_total(maze)?;
    let tables = Tables::build(maze, params);
    let policy = tables.dense_policy(pi);
    let n = tables.len();
    let mut a = vec![0.0; n * n];
    let mut b = vec![0.0; n];
    for k in 0..n {
        a[k * n + k] = 1.0;
        if k == tables.goal {
            continue;
        }
        let act = policy[k];
        a[k * n + tables.next[k][act]] -= tables.gamma;
        b[k] = tables.reward[k][act];
    }
    let x = solve_dense(&mut a, &mut b, n)?;
    Ok(tables.to_values(&x, maze.cell_count()))
}

fn solve_dense(a: &mut [f64], b: &mut [f64], n: usize) -> Result<Vec<f64>, SolveError> {
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .unwrap_or(col);
        if a[pivot * n + col].abs() < 1e-14 {
            return Err(SolveError::Singular(col));
        }
        if pivot != col {
            for j in 0..n {
                a.swap(col * n + j, pivot * n + j);
            }
            b.swap(col, pivot);
        }
        let diag = a[col * n + col];
        for i in col + 1..n {
            let f = a[i * n + col] / diag;
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                a[i * n + j] -= f * a[col * n + j];
            }
            b[i] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in i + 1..n {
            s -= a[i * n + j] * x[j];
        }
        x[i] = s / a[i * n + i];
    }
    Ok(x)
}

/// Greedy one-step improvement of `pi` against `v`.
///
/// A state keeps its current action when no alternative beats it by more
/// than [`TIE_TOLERANCE`]; otherwise it takes the first maximiser in action
/// order. `stable` is true when nothing changed.
pub fn policy_improvement(
    maze: &Maze,
    params: &RewardParams,
    v: &ValueFunction,
    pi: &Policy,
) -> Result<(Policy, bool), SolveError> {
    params.validate()?;
    check_values(maze, v)?;
    pi.check_total(maze)?;
    let tables = Tables::build(maze, params);
    let dense_v = tables.dense_values(v);
    let mut policy = tables.dense_policy(pi);
    let stable = tables.improve(&dense_v, &mut policy);
    Ok((tables.to_policy(&policy, maze.cell_count()), stable))
}

/// Policy greedy with respect to `v`, ties to the lowest action.
pub fn greedy_policy(
    maze: &Maze,
    params: &RewardParams,
    v: &ValueFunction,
) -> Result<Policy, SolveError> {
    check_values(maze, v)?;
    let tables = Tables::build(maze, params);
    let dense_v = tables.dense_values(v);
    let policy: Vec<usize> = (0..tables.len()).map(|k| tables.argmax(&dense_v, k)).collect();
    Ok(tables.to_policy(&policy, maze.cell_count()))
}

/// One-step lookahead values `r + gamma V(s')` for every action at `s`.
pub fn action_values(
    maze: &Maze,
    params: &RewardParams,
    v: &ValueFunction,
    s: StateId,
) -> [f64; 4] {
    let mut out = [0.0; 4];
    for a in Action::ALL {
        let s2 = maze.transition(s, a);
        out[a.index()] = maze.reward(params, s, a, s2) + params.gamma * v.get(s2);
    }
    out
}

/// Output of [`policy_iteration`].
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub values: ValueFunction,
    pub policy: Policy,
    pub stats: SolveStats,
}

/// Alternates evaluation and improvement until the policy is stable.
///
/// Each round's evaluation resumes from the previous round's values.
pub fn policy_iteration(
    maze: &Maze,
    params: &RewardParams,
    theta: f64,
    init: &Policy,
) -> Result<Solution, SolveError> {
    policy_iteration_with(maze, params, init, &SolverConfig::with_theta(theta), None)
}

/// [`policy_iteration`] with explicit limits. When `history` is given, the
/// policy entering each round is pushed onto it, followed by the final one.
pub fn policy_iteration_with(
    maze: &Maze,
    params: &RewardParams,
    init: &Policy,
    cfg: &SolverConfig,
    mut history: Option<&mut Vec<Policy>>,
) -> Result<Solution, SolveError> {
    cfg.check()?;
    params.validate()?;
    init.check_total(maze)?;
    let started = Instant::now();
    let tables = Tables::build(maze, params);
    let cells = maze.cell_count();
    let mut policy = tables.dense_policy(init);
    let mut v = vec![0.0; tables.len()];
    let mut stats = SolveStats::default();
    loop {
        if stats.improvement_rounds >= cfg.max_rounds {
            return Err(SolveError::RoundLimit(cfg.max_rounds));
        }
        if let Some(h) = history.as_deref_mut() {
            h.push(tables.to_policy(&policy, cells));
        }
        let (sweeps, residual, backups) = tables.evaluate(&policy, &mut v, cfg)?;
        stats.sweeps += sweeps;
        stats.residual = residual;
        stats.evaluations += backups + 4 * (tables.len() as u64 - 1);
        stats.improvement_rounds += 1;
        if tables.improve(&v, &mut policy) {
            break;
        }
    }
    if let Some(h) = history {
        h.push(tables.to_policy(&policy, cells));
    }
    stats.elapsed = started.elapsed();
    Ok(Solution {
        values: tables.to_values(&v, cells),
        policy: tables.to_policy(&policy, cells),
        stats,
    })
}

/// Policy iteration from the all-North policy with default limits.
pub fn solve(maze: &Maze, params: &RewardParams, theta: f64) -> Result<Solution, SolveError> {
    policy_iteration(maze, params, theta, &Policy::uniform(maze, Action::North))
}

/// In-place optimality sweeps `V(s) <- max_a [r + gamma V(s')]` from zeros.
pub fn value_iteration(
    maze: &Maze,
    params: &RewardParams,
    theta: f64,
) -> Result<(ValueFunction, SolveStats), SolveError> {
    let cfg = SolverConfig::with_theta(theta);
    cfg.check()?;
    params.validate()?;
    let started = Instant::now();
    let tables = Tables::build(maze, params);
    let mut v = vec![0.0; tables.len()];
    let mut stats = SolveStats::default();
    loop {
        let mut delta: f64 = 0.0;
        for k in 0..tables.len() {
            if k == tables.goal {
                continue;
            }
            let best = (0..4).map(|a| tables.q(&v, k, a)).fold(f64::NEG_INFINITY, f64::max);
            delta = delta.max((best - v[k]).abs());
            v[k] = best;
        }
        stats.sweeps += 1;
        stats.evaluations += 4 * (tables.len() as u64 - 1);
        stats.residual = delta;
        if delta < theta {
            break;
        }
        if stats.sweeps >= cfg.max_sweeps || !delta.is_finite() {
            return Err(SolveError::SweepLimit {
                sweeps: stats.sweeps,
                residual: delta,
            });
        }
    }
    stats.elapsed = started.elapsed();
    Ok((tables.to_values(&v, maze.cell_count()), stats))
}

/// Rollout from the start following `pi` for at most `max_steps` moves.
///
/// The result always begins with the start state and ends at the goal only
/// if it was reached.
pub fn extract_path(maze: &Maze, pi: &Policy, max_steps: usize) -> Result<Vec<StateId>, SolveError> {
    if max_steps == 0 {
        return Err(SolveError::ZeroSteps);
    }
    pi.check_total(maze)?;
    let mut path = vec![maze.start()];
    let mut s = maze.start();
    for _ in 0..max_steps {
        if s == maze.goal() {
            break;
        }
        let a = pi.get(s).expect("policy checked total");
        s = maze.transition(s, a);
        path.push(s);
    }
    Ok(path)
}

/// Sum of rewards collected along a path; discounted by `gamma^t` on request.
pub fn path_reward(maze: &Maze, params: &RewardParams, path: &[StateId], discounted: bool) -> f64 {
    let mut total = 0.0;
    let mut weight = 1.0;
    for w in path.windows(2) {
        if w[0] == maze.goal() {
            break;
        }
        total += weight * maze.entry_reward(params, w[1]);
        if discounted {
            weight *= params.gamma;
        }
    }
    total
}

/// Undiscounted return of the rollout of `pi` from the start.
pub fn accumulated_reward(
    maze: &Maze,
    params: &RewardParams,
    pi: &Policy,
    max_steps: usize,
) -> Result<f64, SolveError> {
    let path = extract_path(maze, pi, max_steps)?;
    Ok(path_reward(maze, params, &path, false))
}

/// Discounted counterpart of [`accumulated_reward`].
pub fn accumulated_reward_discounted(
    maze: &Maze,
    params: &RewardParams,
    pi: &Policy,
    max_steps: usize,
) -> Result<f64, SolveError> {
    let path = extract_path(maze, pi, max_steps)?;
    Ok(path_reward(maze, params, &path, true))
}

/// Rollout horizon used when none is given: one move per state.
pub fn default_max_steps(maze: &Maze) -> usize {
    maze.traversable_count().max(1)
}
