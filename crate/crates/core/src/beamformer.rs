//! Robust single-user transmit/receive beamforming.
//!
//! For a fixed transmit vector `w1` the receive beamformer maximizing the
//! worst-case SINR is `w2 ∝ D⁻¹·H_s·w1`, and the resulting SINR is the
//! quadratic form `w1ᴴ·A·w1`. The transmit problem
//!
//! ```text
//! maximize w1ᴴ·A·w1   s.t.  P_su·w1ᴴ·B·w1 ≤ I,  ‖w1‖ ≤ 1
//! ```
//!
//! is solved in closed form by whitening with `B^{-1/2}` whenever the power
//! constraint is slack at that solution, and by the semidefinite relaxation
//! otherwise.

use crate::channel::{ChannelSet, RobustMatrices, SystemConfig};
use crate::error::{Error, Result};
use crate::hermitian::{
    hermitian_eig_max, hermitian_inv_sqrt, hermitian_solve, normalize_phase, CVector, EigenPair,
    HermitianMatrix,
};
use crate::sdp::{self, SdpProblem, TraceConstraint};

/// Slack allowed on `‖w1‖ ≤ 1` before the closed form is rejected.
pub const NORM_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerPair {
    /// Transmit vector, `‖w1‖ ≤ 1`.
    pub w1: CVector,
    /// Receive vector, unit norm.
    pub w2: CVector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesignMethod {
    ClosedForm,
    SdpFallback,
}

#[derive(Debug, Clone)]
pub struct DesignReport {
    pub pair: BeamformerPair,
    pub worst_case_sinr: f64,
    /// `P_su·w1ᴴ·B·w1`, an upper bound on the interference at the primary receiver.
    pub robust_interference_bound: f64,
    pub method: DesignMethod,
    /// `λ₂/λ₁` of the relaxed solution when the SDP path ran.
    pub rank_defect: Option<f64>,
}

/// Realized link quality for given true channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Performance {
    pub sinr: f64,
    /// `log₂(1 + sinr)` in bits per channel use.
    pub rate: f64,
    pub pu_interference: f64,
}

/// Worst-case-SINR-maximizing receiver for a fixed transmit vector.
pub fn receive_beamformer(rm: &RobustMatrices, w1: &CVector) -> Result<CVector> {
    if w1.len() != rm.nt() {
        return Err(Error::validation(format!(
            "w1 has length {}, expected {}",
            w1.len(),
            rm.nt()
        )));
    }
    if w1.norm() == 0.0 {
        return Err(Error::validation("receive beamformer needs a nonzero w1"));
    }
    let target = &rm.hs * w1;
    let mut w2 = hermitian_solve(&rm.d, &target)?;
    let norm = w2.norm();
    if norm == 0.0 {
        // H_s·w1 = 0: no signal reaches the receiver, any unit vector is optimal.
        return Ok(unit_vector(rm.nr()));
    }
    w2.unscale_mut(norm);
    normalize_phase(&mut w2);
    Ok(w2)
}

pub(crate) fn unit_vector(n: usize) -> CVector {
    let mut v = CVector::zeros(n);
    v[0] = num_complex::Complex64::new(1.0, 0.0);
    v
}

/// Worst-case SINR `P_su·|w2ᴴ·H_s·w1|² / (w2ᴴ·D·w2)` over the error ball.
pub fn robust_sinr(rm: &RobustMatrices, pair: &BeamformerPair) -> f64 {
    let denom = rm.d.quad_form(&pair.w2);
    if denom <= 0.0 {
        return 0.0;
    }
    let signal = pair.w2.dotc(&(&rm.hs * &pair.w1)).norm_sqr();
    rm.p_su * signal / denom
}

/// SINR, rate and primary-receiver interference on the true channels.
pub fn realized_performance(
    cs: &ChannelSet,
    pair: &BeamformerPair,
    cfg: &SystemConfig,
) -> Performance {
    let signal = cfg.p_su * pair.w2.dotc(&(&cs.hs * &pair.w1)).norm_sqr();
    let interference =
        cfg.p_pu * pair.w2.dotc(&cs.h_prime_true).norm_sqr() + cfg.noise_power * pair.w2.norm_squared();
    let sinr = if interference > 0.0 { signal / interference } else { 0.0 };
    Performance {
        sinr,
        rate: (1.0 + sinr).log2(),
        pu_interference: cfg.p_su * pair.w1.dotc(&cs.h_true).norm_sqr(),
    }
}

/// Whitened gain matrix `B^{-1/2}·A·B^{-1/2}` together with `B^{-1/2}`.
#[derive(Debug, Clone)]
pub struct WhitenedGain {
    pub inv_sqrt_b: HermitianMatrix,
    /// Largest eigenpair of the whitened matrix.
    pub top: EigenPair,
}

pub fn whitened_gain(rm: &RobustMatrices) -> Result<WhitenedGain> {
    let inv_sqrt_b = hermitian_inv_sqrt(&rm.b)?;
    let m = rm.a.congruence(inv_sqrt_b.as_matrix());
    let top = hermitian_eig_max(&m)?;
    Ok(WhitenedGain { inv_sqrt_b, top })
}

/// Transmit vector that meets the interference budget with equality,
/// ignoring the power constraint.
pub fn interference_limited_transmit(gain: &WhitenedGain, budget_ratio: f64) -> CVector {
    (gain.inv_sqrt_b.as_matrix() * &gain.top.vector).scale(budget_ratio.sqrt())
}

/// Robust transceiver design for the budget `cfg.i_limit`.
pub fn closed_form_transmit(rm: &RobustMatrices, cfg: &SystemConfig) -> Result<DesignReport> {
    cfg.validate()?;
    let budget_ratio = cfg.i_limit / cfg.p_su;
    let gain = whitened_gain(rm)?;
    let w1 = interference_limited_transmit(&gain, budget_ratio);
    if w1.norm() > 1.0 + NORM_SLACK {
        log::debug!(
            "closed form violates the power constraint (‖w1‖ = {:.6}); solving the relaxation",
            w1.norm()
        );
        return sdp_transmit(rm, cfg);
    }
    let w2 = if gain.top.value > 0.0 {
        receive_beamformer(rm, &w1)?
    } else {
        unit_vector(rm.nr())
    };
    Ok(DesignReport {
        robust_interference_bound: cfg.p_su * rm.b.quad_form(&w1),
        worst_case_sinr: (budget_ratio * gain.top.value).max(0.0),
        pair: BeamformerPair { w1, w2 },
        method: DesignMethod::ClosedForm,
        rank_defect: None,
    })
}

/// Relaxed single-user program: `max tr(A·W)` s.t. `tr(B·W) ≤ I/P_su`, `tr(W) ≤ 1`.
pub fn single_user_sdp(rm: &RobustMatrices, cfg: &SystemConfig) -> Result<SdpProblem> {
    SdpProblem::new(
        rm.a.clone(),
        vec![
            TraceConstraint::new(rm.b.clone(), cfg.i_limit / cfg.p_su),
            TraceConstraint::trace_bound(rm.nt(), 1.0),
        ],
    )
}

/// Transceiver design through the semidefinite relaxation; honours both constraints.
pub fn sdp_transmit(rm: &RobustMatrices, cfg: &SystemConfig) -> Result<DesignReport> {
    let problem = single_user_sdp(rm, cfg)?;
    let sol = sdp::solve(&problem)?;
    let extracted = sdp::extract_rank_one(&sol, &problem)?;
    let w1 = extracted.vector;
    let w2 = if w1.norm() > 0.0 {
        receive_beamformer(rm, &w1)?
    } else {
        unit_vector(rm.nr())
    };
    let pair = BeamformerPair { w1, w2 };
    Ok(DesignReport {
        worst_case_sinr: robust_sinr(rm, &pair),
        robust_interference_bound: cfg.p_su * rm.b.quad_form(&pair.w1),
        pair,
        method: DesignMethod::SdpFallback,
        rank_defect: Some(extracted.defect),
    })
}
