//! Design-space exploration of [`RewardParams`] with a pairwise ranking model.

mod baselines;
mod features;
mod kendall;
mod ranking;
mod sampling;
mod search;

pub use baselines::{coordinate_sweep, grid_search, random_search, Baseline};
pub use features::{FeatureVector, Featurizer, FEATURE_NAMES};
pub use kendall::{kendall_tau, kendall_tau_scores, KendallError};
pub use ranking::{
    fit_ranking_model, primal_objective, FeatureTable, FitOptions, Optimizer, PartialRanking, RankingError,
    RankingModel,
};
pub use sampling::{generate_candidates, ParamRanges, SamplingError};
pub use search::{tune, tune_with, Objective, Scoring, TraceEntry, TuneError, TuneOptions, TuneOutcome, TuneTrace};

use crate::maze::RewardParams;

/// A design-space point with an id unique within its pool.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Configuration {
    pub id: usize,
    pub params: RewardParams,
}

impl Configuration {
    pub fn new(id: usize, params: RewardParams) -> Self {
        Configuration { id, params }
    }

    /// `key=value` lines, as written for a best-configuration file.
    pub fn to_key_values(&self) -> String {
        let mut out = format!("id={}\n", self.id);
        for (k, v) in self.params.fields() {
            out.push_str(&format!("{k}={}\n", crate::numfmt::sig17(v)));
        }
        out
    }
}
