use std::collections::HashMap;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KendallError {
    #[error("rankings cover different id sets")]
    MismatchedIds,
    #[error("score sequences have different lengths ({0} vs {1})")]
    Length(usize, usize),
    #[error("id {0} appears twice in a ranking")]
    Duplicate(usize),
}

/// Kendall rank correlation of two orderings (best first) of the same ids.
pub fn kendall_tau(order_a: &[usize], order_b: &[usize]) -> Result<f64, KendallError> {
    if order_a.len() != order_b.len() {
        return Err(KendallError::MismatchedIds);
    }
    let mut pos_b = HashMap::with_capacity(order_b.len());
    for (i, &id) in order_b.iter().enumerate() {
        if pos_b.insert(id, i).is_some() {
            return Err(KendallError::Duplicate(id));
        }
    }
    let mut ranks_b = Vec::with_capacity(order_a.len());
    let mut seen = HashMap::with_capacity(order_a.len());
    for &id in order_a {
        if seen.insert(id, ()).is_some() {
            return Err(KendallError::Duplicate(id));
        }
        ranks_b.push(*pos_b.get(&id).ok_or(KendallError::MismatchedIds)? as f64);
    }
    let ranks_a: Vec<f64> = (0..order_a.len()).map(|i| i as f64).collect();
    kendall_tau_scores(&ranks_a, &ranks_b)
}

/// Kendall tau over paired scores; pairs tied in either sequence are left
/// out of the count. Returns 0 when no untied pair exists.
pub fn kendall_tau_scores(a: &[f64], b: &[f64]) -> Result<f64, KendallError> {
    if a.len() != b.len() {
        return Err(KendallError::Length(a.len(), b.len()));
    }
    let (mut concordant, mut discordant) = (0i64, 0i64);
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            let s = (a[i] - a[j]).signum() * (b[i] - b[j]).signum();
            if a[i] == a[j] || b[i] == b[j] {
                continue;
            }
            if s > 0.0 {
                concordant += 1;
            } else {
                discordant += 1;
            }
        }
    }
    let n = concordant + discordant;
    if n == 0 {
        return Ok(0.0);
    }
    Ok((concordant - discordant) as f64 / n as f64)
}
