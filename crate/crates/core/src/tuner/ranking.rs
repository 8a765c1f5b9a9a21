//! Linear ranking model from partial rankings.
//!
//! Minimises `1/2 |w|^2 + (C/m') * sum hinge(1 - w.(phi_better - phi_worse))`
//! over the distinct ordered pairs of all rankings, `m'` being their count.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::features::FeatureVector;

/// Margins below `1 - MARGIN_SLACK` count as training violations.
pub const MARGIN_SLACK: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RankingError {
    #[error("no ranked pairs to fit")]
    NoPairs,
    #[error("regularisation constant must be positive, got {0}")]
    InvalidC(f64),
    #[error("ranking for scenario {scenario} pairs configuration {id} with itself")]
    SelfPair { scenario: usize, id: usize },
    #[error("ranking for scenario {scenario} orders {a} and {b} both ways")]
    Contradiction { scenario: usize, a: usize, b: usize },
    #[error("no features for configuration {id} in scenario {scenario}")]
    MissingFeatures { scenario: usize, id: usize },
    #[error("feature dimension {found} does not match {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("non-finite feature entry for configuration {id} in scenario {scenario}")]
    NonFinite { scenario: usize, id: usize },
}

/// Ordered `(better, worse)` configuration pairs observed in one scenario.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialRanking {
    scenario: usize,
    pairs: Vec<(usize, usize)>,
}

impl PartialRanking {
    /// Validating constructor: no self pairs and no pair in both directions.
    pub fn new(scenario: usize, pairs: Vec<(usize, usize)>) -> Result<Self, RankingError> {
        let set: BTreeSet<(usize, usize)> = pairs.iter().copied().collect();
        for &(a, b) in &pairs {
            if a == b {
                return Err(RankingError::SelfPair { scenario, id: a });
            }
            if set.contains(&(b, a)) {
                return Err(RankingError::Contradiction { scenario, a, b });
            }
        }
        Ok(PartialRanking { scenario, pairs })
    }

    /// Without the consistency checks; used to build deliberately infeasible data.
    pub fn new_unchecked(scenario: usize, pairs: Vec<(usize, usize)>) -> Self {
        PartialRanking { scenario, pairs }
    }

    /// Every pair of a total order given best first. Equal scores yield no pair.
    pub fn from_scores(scenario: usize, scored: &[(usize, f64)]) -> Self {
        let mut pairs = Vec::new();
        for (i, &(a, sa)) in scored.iter().enumerate() {
            for &(b, sb) in &scored[i + 1..] {
                if sa > sb {
                    pairs.push((a, b));
                } else if sb > sa {
                    pairs.push((b, a));
                }
            }
        }
        PartialRanking { scenario, pairs }
    }

    pub fn scenario(&self) -> usize {
        self.scenario
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }
}

/// Feature vectors keyed by (scenario, configuration id).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureTable {
    map: BTreeMap<(usize, usize), FeatureVector>,
}

impl FeatureTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, scenario: usize, id: usize, fv: FeatureVector) {
        self.map.insert((scenario, id), fv);
    }

    pub fn get(&self, scenario: usize, id: usize) -> Option<&FeatureVector> {
        self.map.get(&(scenario, id))
    }

    /// One scenario, vectors indexed by configuration id.
    pub fn single(scenario: usize, features: &[FeatureVector]) -> Self {
        let mut t = FeatureTable::new();
        for (id, fv) in features.iter().enumerate() {
            t.insert(scenario, id, fv.clone());
        }
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Optimizer {
    /// Dual coordinate descent over the pair multipliers, fixed pair order.
    DualCoordinate { max_epochs: usize, tolerance: f64 },
    /// Full-batch primal subgradient steps of size `1/(lambda t)`, `lambda = 1/C`.
    Subgradient { epochs: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub c_reg: f64,
    pub optimizer: Optimizer,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            c_reg: 10.0,
            optimizer: Optimizer::DualCoordinate {
                max_epochs: 20_000,
                tolerance: 1e-10,
            },
        }
    }
}

impl FitOptions {
    pub fn with_c(c_reg: f64) -> Self {
        FitOptions {
            c_reg,
            ..Default::default()
        }
    }

    pub fn subgradient(c_reg: f64, epochs: usize) -> Self {
        FitOptions {
            c_reg,
            optimizer: Optimizer::Subgradient { epochs },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankingModel {
    pub w: FeatureVector,
    pub c_reg: f64,
    pub training_violations: usize,
    /// Distinct pairs the model was fitted on.
    pub pairs: usize,
}

impl RankingModel {
    pub fn zeros(dim: usize, c_reg: f64) -> Self {
        RankingModel {
            w: FeatureVector(vec![0.0; dim]),
            c_reg,
            training_violations: 0,
            pairs: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.w.dim()
    }

    /// `w . phi`; higher is predicted better.
    pub fn score(&self, phi: &FeatureVector) -> Result<f64, RankingError> {
        if phi.dim() != self.w.dim() {
            return Err(RankingError::Dimension {
                expected: self.w.dim(),
                found: phi.dim(),
            });
        }
        Ok(self.w.dot(phi.values()))
    }

    pub fn norm(&self) -> f64 {
        self.w.dot(self.w.values()).sqrt()
    }

    /// Same model with `w` multiplied by `alpha`.
    pub fn scaled(&self, alpha: f64) -> Self {
        let mut m = self.clone();
        m.w.0.iter_mut().for_each(|x| *x *= alpha);
        m
    }

    /// Primal objective on the given difference vectors.
    fn objective(&self, diffs: &[Vec<f64>]) -> f64 {
        let hinge: f64 = diffs
            .iter()
            .map(|d| (1.0 - self.w.dot(d)).max(0.0))
            .sum();
        0.5 * self.w.dot(self.w.values()) + self.c_reg / diffs.len() as f64 * hinge
    }
}

/// Difference vectors of the distinct pairs, in first-seen order.
fn pair_differences(
    rankings: &[PartialRanking],
    features: &FeatureTable,
) -> Result<(usize, Vec<Vec<f64>>), RankingError> {
    let mut seen = BTreeSet::new();
    let mut diffs = Vec::new();
    let mut dim: Option<usize> = None;
    let lookup = |scenario: usize, id: usize| -> Result<&FeatureVector, RankingError> {
        let fv = features
            .get(scenario, id)
            .ok_or(RankingError::MissingFeatures { scenario, id })?;
        if fv.values().iter().any(|x| !x.is_finite()) {
            return Err(RankingError::NonFinite { scenario, id });
        }
        Ok(fv)
    };
    for r in rankings {
        for &(better, worse) in r.pairs() {
            if !seen.insert((r.scenario, better, worse)) {
                continue;
            }
            let a = lookup(r.scenario, better)?;
            let b = lookup(r.scenario, worse)?;
            let d = *dim.get_or_insert(a.dim());
            for fv in [a, b] {
                if fv.dim() != d {
                    return Err(RankingError::Dimension {
                        expected: d,
                        found: fv.dim(),
                    });
                }
            }
            diffs.push(a.values().iter().zip(b.values()).map(|(x, y)| x - y).collect());
        }
    }
    match dim {
        Some(d) => Ok((d, diffs)),
        None => Err(RankingError::NoPairs),
    }
}

/// Fits the ranking model. Deterministic for fixed inputs.
pub fn fit_ranking_model(
    rankings: &[PartialRanking],
    features: &FeatureTable,
    opts: &FitOptions,
) -> Result<RankingModel, RankingError> {
    if !(opts.c_reg > 0.0 && opts.c_reg.is_finite()) {
        return Err(RankingError::InvalidC(opts.c_reg));
    }
    let (dim, diffs) = pair_differences(rankings, features)?;
    let m = diffs.len();
    let upper = opts.c_reg / m as f64;
    let w = match opts.optimizer {
        Optimizer::DualCoordinate {
            max_epochs,
            tolerance,
        } => dual_coordinate(&diffs, dim, upper, max_epochs, tolerance),
        Optimizer::Subgradient { epochs } => subgradient(&diffs, dim, opts.c_reg, epochs),
    };
    let violations = diffs
        .iter()
        .filter(|d| dot(&w, d) < 1.0 - MARGIN_SLACK)
        .count();
    Ok(RankingModel {
        w: FeatureVector(w),
        c_reg: opts.c_reg,
        training_violations: violations,
        pairs: m,
    })
}

/// Primal objective value of `model` on the pairs of `rankings`.
pub fn primal_objective(
    model: &RankingModel,
    rankings: &[PartialRanking],
    features: &FeatureTable,
) -> Result<f64, RankingError> {
    let (_, diffs) = pair_differences(rankings, features)?;
    Ok(model.objective(&diffs))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

// Box-constrained dual: max sum(a) - 1/2 |sum a_i d_i|^2, 0 <= a_i <= upper.
fn dual_coordinate(diffs: &[Vec<f64>], dim: usize, upper: f64, max_epochs: usize, tol: f64) -> Vec<f64> {
    let mut w = vec![0.0; dim];
    let mut alpha = vec![0.0; diffs.len()];
    let sq: Vec<f64> = diffs.iter().map(|d| dot(d, d)).collect();
    for _ in 0..max_epochs {
        let mut max_pg: f64 = 0.0;
        for (i, d) in diffs.iter().enumerate() {
            if sq[i] == 0.0 {
                continue;
            }
            let g = dot(&w, d) - 1.0;
            let pg = if alpha[i] == 0.0 {
                g.min(0.0)
            } else if alpha[i] == upper {
                g.max(0.0)
            } else {
                g
            };
            max_pg = max_pg.max(pg.abs());
            if pg != 0.0 {
                let new = (alpha[i] - g / sq[i]).clamp(0.0, upper);
                let step = new - alpha[i];
                alpha[i] = new;
                for (wj, dj) in w.iter_mut().zip(d) {
                    *wj += step * dj;
                }
            }
        }
        if max_pg < tol {
            break;
        }
    }
    w
}

fn subgradient(diffs: &[Vec<f64>], dim: usize, c_reg: f64, epochs: usize) -> Vec<f64> {
    let lambda = 1.0 / c_reg;
    let m = diffs.len() as f64;
    let radius = 1.0 / lambda.sqrt();
    let mut w = vec![0.0; dim];
    let mut grad = vec![0.0; dim];
    for t in 1..=epochs {
        let eta = 1.0 / (lambda * t as f64);
        grad.iter_mut().zip(&w).for_each(|(g, wj)| *g = lambda * wj);
        for d in diffs {
            if dot(&w, d) < 1.0 {
                for (g, dj) in grad.iter_mut().zip(d) {
                    *g -= dj / m;
                }
            }
        }
        for (wj, g) in w.iter_mut().zip(&grad) {
            *wj -= eta * g;
        }
        let norm = dot(&w, &w).sqrt();
        if norm > radius {
            w.iter_mut().for_each(|x| *x *= radius / norm);
        }
    }
    w
}
