//! Per-dataset model ranks and turning points of SERA curves.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{check_same_len, Result};
use crate::sera::RelevanceGrid;

/// Ranks from 1; exactly tied scores share their average rank.
pub fn rank_models(scores: &BTreeMap<String, f64>, lower_is_better: bool) -> BTreeMap<String, f64> {
    let mut entries: Vec<(&String, f64)> = scores.iter().map(|(k, &v)| (k, v)).collect();
    entries.sort_by(|a, b| {
        let ord = a.1.total_cmp(&b.1);
        if lower_is_better {
            ord
        } else {
            ord.reverse()
        }
    });
    let mut ranks = BTreeMap::new();
    let mut i = 0;
    while i < entries.len() {
        let mut j = i;
        while j + 1 < entries.len() && entries[j + 1].1 == entries[i].1 {
            j += 1;
        }
        // Positions i..=j (0-based) share the mean of ranks i+1..=j+1.
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for e in &entries[i..=j] {
            ranks.insert(e.0.clone(), rank);
        }
        i = j + 1;
    }
    ranks
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurningPoint {
    /// Smallest grid cutoff at which the SERA-optimised model's restricted
    /// SERA is strictly lower than the standard model's.
    pub phi_t: Option<f64>,
    /// Whether the strict inequality also holds at every larger cutoff that
    /// still selects at least one instance.
    pub holds_on_suffix: bool,
}

/// SERA over the instances with relevance `>= cutoff`, or `None` when no
/// instance qualifies.
pub fn restricted_sera(y: &[f64], y_hat: &[f64], relevances: &[f64], cutoff: f64) -> Option<f64> {
    let mut any = false;
    let mut total = 0.0;
    for ((&yi, &pi), &phi) in y.iter().zip(y_hat).zip(relevances) {
        if phi >= cutoff {
            any = true;
            total += phi * (pi - yi) * (pi - yi);
        }
    }
    any.then_some(total)
}

/// Scans the grid cutoffs upwards for the first one where the model `S`
/// beats the model `M` on restricted SERA.
pub fn turning_point(
    y: &[f64],
    y_hat_s: &[f64],
    y_hat_m: &[f64],
    relevances: &[f64],
    grid: RelevanceGrid,
) -> Result<TurningPoint> {
    check_same_len("targets and S predictions", y.len(), y_hat_s.len())?;
    check_same_len("targets and M predictions", y.len(), y_hat_m.len())?;
    check_same_len("targets and relevances", y.len(), relevances.len())?;

    let mut phi_t = None;
    let mut holds_on_suffix = false;
    for t in grid.cutoffs() {
        let (Some(s), Some(m)) = (
            restricted_sera(y, y_hat_s, relevances, t),
            restricted_sera(y, y_hat_m, relevances, t),
        ) else {
            break;
        };
        let better = s < m;
        match phi_t {
            None if better => {
                phi_t = Some(t);
                holds_on_suffix = true;
            }
            Some(_) if !better => holds_on_suffix = false,
            _ => {}
        }
    }
    Ok(TurningPoint {
        phi_t,
        holds_on_suffix,
    })
}
