//! Interference-budget allocation for users on orthogonal sub-bands.
//!
//! With a single-user design for each sub-band, user `k` reaches a worst-case
//! SINR of `Iᵏ·yᵏ` when granted an interference budget `Iᵏ`. The budgets
//! share the primary receiver's limit `Σ Iᵏ = I`. Two splits are provided:
//! the sum-rate optimal one (a water-filling solution that drops users whose
//! budget would be non-positive) and the equal-rate one.

use crate::beamformer::whitened_gain;
use crate::channel::{RobustMatrices, SystemConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AllocationMode {
    Optimal,
    Fair,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationResult {
    /// Per-user budget; zero for dropped users.
    pub budgets: Vec<f64>,
    pub gains: Vec<f64>,
    /// Per-user worst-case rate `log₂(1 + Iᵏ·yᵏ)`; zero for dropped users.
    pub rates: Vec<f64>,
    /// Case-1 sum rate, normalized by the original number of users.
    pub sum_rate: f64,
    /// Indices of users that were dropped, in drop order.
    pub dropped: Vec<usize>,
    pub mode: AllocationMode,
}

impl AllocationResult {
    pub fn active(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.budgets.len()).filter(|k| !self.dropped.contains(k))
    }

    /// `max − min` of the rates of active users.
    pub fn rate_spread(&self) -> f64 {
        let rates: Vec<f64> = self.active().map(|k| self.rates[k]).collect();
        let max = rates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = rates.iter().copied().fold(f64::INFINITY, f64::min);
        if rates.is_empty() {
            0.0
        } else {
            max - min
        }
    }
}

/// Worst-case SINR per unit of interference budget,
/// `λ_max(B^{-1/2}·A·B^{-1/2}) / P_su`.
pub fn per_user_gain(rm: &RobustMatrices, cfg: &SystemConfig) -> Result<f64> {
    Ok(whitened_gain(rm)?.top.value.max(0.0) / cfg.p_su)
}

fn validate_gains(gains: &[f64], i_limit: f64) -> Result<()> {
    if gains.is_empty() {
        return Err(Error::validation("at least one user is required"));
    }
    if let Some(g) = gains.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
        return Err(Error::validation(format!("gains must be positive and finite, got {g}")));
    }
    if !(i_limit > 0.0 && i_limit.is_finite()) {
        return Err(Error::validation(format!("interference limit must be > 0, got {i_limit}")));
    }
    Ok(())
}

fn finish(
    budgets: Vec<f64>,
    gains: &[f64],
    dropped: Vec<usize>,
    mode: AllocationMode,
) -> AllocationResult {
    let rates: Vec<f64> = budgets
        .iter()
        .zip(gains)
        .map(|(i, y)| (1.0 + i * y).log2())
        .collect();
    let mut result = AllocationResult {
        budgets,
        gains: gains.to_vec(),
        rates,
        sum_rate: 0.0,
        dropped,
        mode,
    };
    result.sum_rate = case1_sum_rate(&result, gains.len());
    result
}

/// Sum-rate maximizing split `Iʲ = (I + Σ 1/yᵏ)/N − 1/yʲ` over the active set.
///
/// Users with a non-positive budget are dropped one at a time (most negative
/// first) and the split is recomputed until every active budget is positive.
pub fn optimal_split(gains: &[f64], i_limit: f64) -> Result<AllocationResult> {
    validate_gains(gains, i_limit)?;
    let mut active: Vec<usize> = (0..gains.len()).collect();
    let mut dropped = Vec::new();
    loop {
        let n = active.len() as f64;
        let inv_sum: f64 = active.iter().map(|&k| 1.0 / gains[k]).sum();
        let level = (i_limit + inv_sum) / n;
        let candidate: Vec<(usize, f64)> = active
            .iter()
            .map(|&k| (k, level - 1.0 / gains[k]))
            .collect();
        let worst = candidate
            .iter()
            .copied()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("active set is never empty");
        // A lone user always receives I > 0, so the loop terminates.
        if worst.1 > 0.0 {
            let mut budgets = vec![0.0; gains.len()];
            for (k, b) in candidate {
                budgets[k] = b;
            }
            return Ok(finish(budgets, gains, dropped, AllocationMode::Optimal));
        }
        active.retain(|&k| k != worst.0);
        dropped.push(worst.0);
    }
}

/// Equal-rate split `Iʲ = (I/yʲ) / Σ 1/yᵏ`.
pub fn fair_split(gains: &[f64], i_limit: f64) -> Result<AllocationResult> {
    validate_gains(gains, i_limit)?;
    let inv_sum: f64 = gains.iter().map(|y| 1.0 / y).sum();
    let budgets = gains.iter().map(|y| (i_limit / y) / inv_sum).collect();
    Ok(finish(budgets, gains, Vec::new(), AllocationMode::Fair))
}

/// `(1/N)·Σ_active log₂(1 + Iᵏ·yᵏ)` with `N` the original user count.
pub fn case1_sum_rate(alloc: &AllocationResult, n_users_original: usize) -> f64 {
    let total: f64 = alloc
        .active()
        .map(|k| (1.0 + alloc.budgets[k] * alloc.gains[k]).log2())
        .sum();
    total / n_users_original as f64
}
