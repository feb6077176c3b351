//! Full-band multiuser design with inter-user interference control.
//!
//! All users transmit over the whole band, so stream `J` leaks
//! `P_su·|w2ᴷᴴ·H_sᴷ·w1ᴶ|²` into receiver `K`. Each user keeps an equal share
//! `I/N` of the primary-receiver budget and may leak at most `I′` into every
//! other secondary receiver. Each round re-optimizes the receivers against
//! the current cross interference, then solves per-user transmit relaxations
//! with those receivers held fixed. Rounds stop once the sum rate improves by
//! less than [`MIN_IMPROVEMENT`].

use crate::beamformer::{
    closed_form_transmit, robust_sinr, BeamformerPair, DesignMethod, DesignReport,
};
use crate::channel::{build_robust_matrices, default_regularization, ChannelSet, RobustMatrices, SystemConfig};
use crate::error::{Error, Result};
use crate::hermitian::{hermitian_solve, normalize_phase, HermitianMatrix};
use crate::sdp::{extract_rank_one, solve, ExtractionStatus, SdpProblem, TraceConstraint};

pub const MIN_IMPROVEMENT: f64 = 1e-6;

/// Relative slack used when checking the `I′` constraints of the initial point.
const CROSS_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case2Status {
    Ok,
    /// The `I′` constraints leave this user essentially no worst-case SINR.
    Starved,
}

#[derive(Debug, Clone)]
pub struct Case2Outcome {
    pub reports: Vec<DesignReport>,
    pub statuses: Vec<Case2Status>,
    /// Sum rate of every accepted iterate, starting with the first one that
    /// satisfies the `I′` constraints.
    pub sum_rate_history: Vec<f64>,
    /// Alternating rounds executed (accepted or not).
    pub rounds: usize,
    pub sum_rate: f64,
}

/// Worst-case SINR of every user including the other users' streams.
pub fn case2_sinrs(rms: &[RobustMatrices], pairs: &[BeamformerPair]) -> Vec<f64> {
    (0..rms.len())
        .map(|k| {
            let rm = &rms[k];
            let w2 = &pairs[k].w2;
            let gain = |w1| rm.p_su * w2.dotc(&(&rm.hs * w1)).norm_sqr();
            let cross: f64 = (0..pairs.len())
                .filter(|&j| j != k)
                .map(|j| gain(&pairs[j].w1))
                .sum();
            let denom = rm.d.quad_form(w2) + cross;
            if denom > 0.0 {
                gain(&pairs[k].w1) / denom
            } else {
                0.0
            }
        })
        .collect()
}

/// `Σ log₂(1 + SINRₖ)` over all users, without a `1/N` factor.
pub fn case2_sum_rate(rms: &[RobustMatrices], pairs: &[BeamformerPair]) -> f64 {
    case2_sinrs(rms, pairs).iter().map(|s| (1.0 + s).log2()).sum()
}

fn leakage_matrix(rm: &RobustMatrices, w2: &crate::hermitian::CVector) -> HermitianMatrix {
    HermitianMatrix::outer(&(rm.hs.adjoint() * w2))
}

fn cross_feasible(rms: &[RobustMatrices], pairs: &[BeamformerPair], i_prime: f64) -> bool {
    (0..rms.len()).all(|k| {
        (0..rms.len()).filter(|&j| j != k).all(|j| {
            let leak = rms[j].p_su * pairs[j].w2.dotc(&(&rms[j].hs * &pairs[k].w1)).norm_sqr();
            leak <= i_prime * (1.0 + CROSS_SLACK)
        })
    })
}

/// Receivers maximizing each user's SINR against the current cross interference.
fn update_receivers(rms: &[RobustMatrices], pairs: &mut [BeamformerPair]) -> Result<()> {
    let snapshot: Vec<BeamformerPair> = pairs.to_vec();
    for (k, rm) in rms.iter().enumerate() {
        let own = &rm.hs * &snapshot[k].w1;
        if own.norm() == 0.0 {
            continue;
        }
        let mut q = rm.d.clone();
        for (j, other) in snapshot.iter().enumerate() {
            if j != k {
                q = q.add_scaled(&HermitianMatrix::outer(&(&rm.hs * &other.w1)), rm.p_su);
            }
        }
        let mut w2 = hermitian_solve(&q, &own)?;
        let norm = w2.norm();
        w2.unscale_mut(norm);
        normalize_phase(&mut w2);
        pairs[k].w2 = w2;
    }
    Ok(())
}

/// Alternating transmit/receive optimization for full-band users.
pub fn solve_case2(
    channels: &[ChannelSet],
    cfg: &SystemConfig,
    i_prime: f64,
    max_rounds: usize,
) -> Result<Case2Outcome> {
    cfg.validate()?;
    if channels.is_empty() {
        return Err(Error::validation("at least one user is required"));
    }
    if !(i_prime > 0.0 && i_prime.is_finite()) {
        return Err(Error::validation(format!("I′ must be > 0, got {i_prime}")));
    }
    let n = channels.len();
    let share = cfg.with_i_limit(cfg.i_limit / n as f64);
    let rms = channels
        .iter()
        .map(|cs| build_robust_matrices(cs, cfg, Some(default_regularization(&cs.h0))))
        .collect::<Result<Vec<_>>>()?;

    let initial = rms
        .iter()
        .map(|rm| closed_form_transmit(rm, &share))
        .collect::<Result<Vec<_>>>()?;
    let initial_sinr: Vec<f64> = initial.iter().map(|r| r.worst_case_sinr).collect();
    let mut methods: Vec<DesignMethod> = initial.iter().map(|r| r.method).collect();
    let mut defects: Vec<Option<f64>> = initial.iter().map(|r| r.rank_defect).collect();
    let mut pairs: Vec<BeamformerPair> = initial.into_iter().map(|r| r.pair).collect();

    let mut history = Vec::new();
    if cross_feasible(&rms, &pairs, i_prime) {
        history.push(case2_sum_rate(&rms, &pairs));
    }

    let pu_ratio = share.i_limit / cfg.p_su;
    let cross_ratio = i_prime / cfg.p_su;
    let mut rounds = 0;
    while rounds < max_rounds {
        rounds += 1;
        // Receivers first, so the leakage constraints below refer to the
        // receivers the candidate is evaluated with.
        let mut candidate = pairs.clone();
        update_receivers(&rms, &mut candidate)?;
        let mut round_defects = Vec::with_capacity(n);
        for k in 0..n {
            let rm = &rms[k];
            let mut constraints = vec![
                TraceConstraint::new(rm.b.clone(), pu_ratio),
                TraceConstraint::trace_bound(rm.nt(), 1.0),
            ];
            for j in (0..n).filter(|&j| j != k) {
                constraints.push(TraceConstraint::new(
                    leakage_matrix(&rms[j], &candidate[j].w2),
                    cross_ratio,
                ));
            }
            let objective = leakage_matrix(rm, &candidate[k].w2).scaled(cfg.p_su);
            let problem = SdpProblem::new(objective, constraints)?;
            let sol = solve(&problem)?;
            let extracted = extract_rank_one(&sol, &problem)?;
            round_defects.push(Some(extracted.defect));
            if extracted.status == ExtractionStatus::ZeroSolution {
                candidate[k].w1.fill(num_complex::Complex64::new(0.0, 0.0));
            } else {
                candidate[k].w1 = extracted.vector;
            }
        }
        let rate = case2_sum_rate(&rms, &candidate);
        let accept = match history.last() {
            None => true,
            Some(&last) => rate >= last + MIN_IMPROVEMENT,
        };
        if !accept {
            break;
        }
        history.push(rate);
        pairs = candidate;
        methods.iter_mut().for_each(|m| *m = DesignMethod::SdpFallback);
        defects = round_defects;
    }

    let sum_rate = case2_sum_rate(&rms, &pairs);
    let mut statuses = Vec::with_capacity(n);
    let reports = pairs
        .into_iter()
        .enumerate()
        .map(|(k, pair)| {
            let worst_case_sinr = robust_sinr(&rms[k], &pair);
            statuses.push(if worst_case_sinr < 1e-6 * initial_sinr[k] {
                Case2Status::Starved
            } else {
                Case2Status::Ok
            });
            DesignReport {
                robust_interference_bound: cfg.p_su * rms[k].b.quad_form(&pair.w1),
                worst_case_sinr,
                pair,
                method: methods[k],
                rank_defect: defects[k],
            }
        })
        .collect();
    Ok(Case2Outcome {
        reports,
        statuses,
        sum_rate_history: history,
        rounds,
        sum_rate,
    })
}
