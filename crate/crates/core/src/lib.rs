//! Policy iteration path planning on grid mazes, plus an ordinal-regression
//! auto-tuner for reward weights and the discount factor.
//!
//! * [`maze`]: the deterministic grid MDP and its text format.
//! * [`solver`]: policy evaluation, improvement and iteration, with exact and
//!   value-iteration cross-checks.
//! * [`tuner`]: featurisation, pairwise ranking model, candidate sampling and
//!   the budgeted tuning loop with its baselines.
//! * [`experiments`]: maze generators, the policy suite, the speedup
//!   benchmark and CSV/SVG exporters.
//! * [`config`]: key=value run configuration and seed derivation.

pub mod config;
pub mod experiments;
pub mod maze;
pub mod numfmt;
pub mod solver;
pub mod tuner;

pub use maze::{Action, CellKind, Maze, MazeError, RewardParams, StateId};
pub use solver::{Policy, SolveError, SolveStats, Solution, ValueFunction};
