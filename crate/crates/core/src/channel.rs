//! Channel generation, norm-bounded uncertainty and the robust design matrices.
//!
//! The secondary link `H_s` is known exactly. The two cross links (secondary
//! transmitter to primary receiver `h`, primary transmitter to secondary
//! receiver `h′`) are only known up to a ball around their nominal values:
//! `‖h − h0‖ ≤ σ√e` and `‖h′ − h0′‖ ≤ σ′√e`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::hermitian::{hermitian_solve, CMatrix, CVector, HermitianMatrix};
use num_complex::Complex64;

/// Norm-bounded error parameters shared by both uncertain links.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintyModel {
    /// Error radius parameter; the balls have radius `σ√e` and `σ′√e`.
    pub e: f64,
    /// Error standard deviation on the secondary-to-primary link.
    pub sigma: f64,
    /// Error standard deviation on the primary-to-secondary link.
    pub sigma_prime: f64,
}

impl UncertaintyModel {
    pub fn new(e: f64, sigma: f64, sigma_prime: f64) -> Result<Self> {
        let u = UncertaintyModel {
            e,
            sigma,
            sigma_prime,
        };
        u.validate()?;
        Ok(u)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.e >= 0.0) || !self.e.is_finite() {
            return Err(Error::validation(format!(
                "error radius e must be finite and >= 0, got {}",
                self.e
            )));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::validation(format!("sigma must be > 0, got {}", self.sigma)));
        }
        if !(self.sigma_prime > 0.0 && self.sigma_prime.is_finite()) {
            return Err(Error::validation(format!(
                "sigma_prime must be > 0, got {}",
                self.sigma_prime
            )));
        }
        Ok(())
    }

    pub fn with_e(self, e: f64) -> Self {
        UncertaintyModel { e, ..self }
    }

    /// Radius of the ball around `h0`.
    pub fn tx_radius(&self) -> f64 {
        self.sigma * self.e.sqrt()
    }

    /// Radius of the ball around `h0′`.
    pub fn rx_radius(&self) -> f64 {
        self.sigma_prime * self.e.sqrt()
    }
}

/// Link and power parameters. All powers are linear.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    pub nt: usize,
    pub nr: usize,
    /// Secondary transmit symbol power.
    pub p_su: f64,
    /// Primary transmit symbol power.
    pub p_pu: f64,
    pub noise_power: f64,
    /// Maximum interference power tolerated at the primary receiver.
    pub i_limit: f64,
    /// Number of secondary receivers in multiuser designs.
    pub n_sec: usize,
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nt == 0 || self.nr == 0 {
            return Err(Error::validation(format!(
                "antenna counts must be >= 1, got nt={} nr={}",
                self.nt, self.nr
            )));
        }
        if self.n_sec == 0 {
            return Err(Error::validation("n_sec must be >= 1"));
        }
        for (name, value) in [
            ("p_su", self.p_su),
            ("p_pu", self.p_pu),
            ("noise_power", self.noise_power),
            ("i_limit", self.i_limit),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::validation(format!("{name} must be > 0, got {value}")));
            }
        }
        Ok(())
    }

    pub fn with_i_limit(self, i_limit: f64) -> Self {
        SystemConfig { i_limit, ..self }
    }
}

/// Nominal and true channels for one secondary link.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// Secondary transmitter to secondary receiver, `nr × nt`.
    pub hs: CMatrix,
    /// Nominal secondary transmitter to primary receiver, length `nt`.
    pub h0: CVector,
    /// Nominal primary transmitter to secondary receiver, length `nr`.
    pub h0_prime: CVector,
    pub h_true: CVector,
    pub h_prime_true: CVector,
    pub uncertainty: UncertaintyModel,
}

/// How error realizations are placed inside the uncertainty ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorSampling {
    /// Uniform over the closed ball.
    Ball,
    /// Uniform over the bounding sphere, where the worst-case bounds are tightest.
    Sphere,
}

impl ChannelSet {
    /// Replaces both true channels with fresh draws around the nominal ones.
    pub fn redraw_errors<R: Rng + ?Sized>(&mut self, rng: &mut R, sampling: ErrorSampling) {
        let u = self.uncertainty;
        self.h_true = perturb(&self.h0, u.tx_radius(), rng, sampling);
        self.h_prime_true = perturb(&self.h0_prime, u.rx_radius(), rng, sampling);
    }

    pub fn validate(&self) -> Result<()> {
        let (nr, nt) = self.hs.shape();
        if self.h0.len() != nt || self.h_true.len() != nt {
            return Err(Error::validation("h0/h_true length must equal nt"));
        }
        if self.h0_prime.len() != nr || self.h_prime_true.len() != nr {
            return Err(Error::validation("h0_prime/h_prime_true length must equal nr"));
        }
        self.uncertainty.validate()
    }
}

/// Deterministic generator for an independent stream derived from `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One circularly-symmetric `CN(0, 1)` sample.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn complex_gaussian_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVector {
    CVector::from_fn(n, |_, _| complex_gaussian(rng))
}

/// `rows × cols` matrix of i.i.d. `CN(0, 1)` entries, filled row by row.
pub fn complex_gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let entries: Vec<Complex64> = (0..rows * cols).map(|_| complex_gaussian(rng)).collect();
    CMatrix::from_row_slice(rows, cols, &entries)
}

/// Uniform point on the unit sphere of `ℂⁿ`.
pub fn sample_unit_sphere<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVector {
    loop {
        let g = complex_gaussian_vector(n, rng);
        let norm = g.norm();
        if norm > 1e-300 {
            return g.unscale(norm);
        }
    }
}

/// Uniform point in the closed unit ball of `ℂⁿ` (a `2n`-dimensional real ball).
pub fn sample_unit_ball<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVector {
    let dir = sample_unit_sphere(n, rng);
    let u: f64 = rng.random();
    dir.scale(u.powf(1.0 / (2.0 * n as f64)))
}

fn perturb<R: Rng + ?Sized>(
    nominal: &CVector,
    radius: f64,
    rng: &mut R,
    sampling: ErrorSampling,
) -> CVector {
    let delta = match sampling {
        ErrorSampling::Ball => sample_unit_ball(nominal.len(), rng),
        ErrorSampling::Sphere => sample_unit_sphere(nominal.len(), rng),
    };
    if radius == 0.0 {
        return nominal.clone();
    }
    nominal + delta.scale(radius)
}

/// Draws one single-user channel set from the generator.
pub fn draw_channels<R: Rng + ?Sized>(
    cfg: &SystemConfig,
    u: &UncertaintyModel,
    rng: &mut R,
) -> ChannelSet {
    let hs = complex_gaussian_matrix(cfg.nr, cfg.nt, rng);
    let h0 = complex_gaussian_vector(cfg.nt, rng);
    let h0_prime = complex_gaussian_vector(cfg.nr, rng);
    let h_true = perturb(&h0, u.tx_radius(), rng, ErrorSampling::Ball);
    let h_prime_true = perturb(&h0_prime, u.rx_radius(), rng, ErrorSampling::Ball);
    ChannelSet {
        hs,
        h0,
        h0_prime,
        h_true,
        h_prime_true,
        uncertainty: *u,
    }
}

/// Single-user channel realization, deterministic in `seed`.
pub fn sample_channels(cfg: &SystemConfig, u: &UncertaintyModel, seed: u64) -> Result<ChannelSet> {
    cfg.validate()?;
    u.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(draw_channels(cfg, u, &mut rng))
}

/// Draws `cfg.n_sec` secondary links served by one transmitter.
///
/// All users share the link to the primary receiver (`h0`, `h_true`); each
/// has its own `H_s` and primary-to-secondary channel.
pub fn draw_multiuser_channels<R: Rng + ?Sized>(
    cfg: &SystemConfig,
    u: &UncertaintyModel,
    rng: &mut R,
) -> Vec<ChannelSet> {
    let h0 = complex_gaussian_vector(cfg.nt, rng);
    let h_true = perturb(&h0, u.tx_radius(), rng, ErrorSampling::Ball);
    (0..cfg.n_sec)
        .map(|_| {
            let hs = complex_gaussian_matrix(cfg.nr, cfg.nt, rng);
            let h0_prime = complex_gaussian_vector(cfg.nr, rng);
            let h_prime_true = perturb(&h0_prime, u.rx_radius(), rng, ErrorSampling::Ball);
            ChannelSet {
                hs,
                h0: h0.clone(),
                h0_prime,
                h_true: h_true.clone(),
                h_prime_true,
                uncertainty: *u,
            }
        })
        .collect()
}

pub fn sample_multiuser_channels(
    cfg: &SystemConfig,
    u: &UncertaintyModel,
    seed: u64,
) -> Result<Vec<ChannelSet>> {
    cfg.validate()?;
    u.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(draw_multiuser_channels(cfg, u, &mut rng))
}

/// Redraws errors for users that share the primary-receiver link.
pub fn redraw_multiuser_errors<R: Rng + ?Sized>(
    users: &mut [ChannelSet],
    rng: &mut R,
    sampling: ErrorSampling,
) {
    let Some(first) = users.first() else {
        return;
    };
    let h_true = perturb(&first.h0, first.uncertainty.tx_radius(), rng, sampling);
    for user in users.iter_mut() {
        user.h_true = h_true.clone();
        user.h_prime_true = perturb(
            &user.h0_prime,
            user.uncertainty.rx_radius(),
            rng,
            sampling,
        );
    }
}

/// Worst-case inflation `2√e·σ·‖h0‖ + e·σ²` of `|wᴴh|²/‖w‖²` over the error ball.
pub fn worst_case_margin(h0_norm: f64, e: f64, sigma: f64) -> Result<f64> {
    if !(h0_norm >= 0.0 && e >= 0.0 && sigma >= 0.0) {
        return Err(Error::validation(format!(
            "margin arguments must be >= 0 (h0_norm={h0_norm}, e={e}, sigma={sigma})"
        )));
    }
    Ok(2.0 * e.sqrt() * sigma * h0_norm + e * sigma * sigma)
}

/// Default diagonal loading used when `e = 0` leaves `B` rank one.
pub fn default_regularization(h0: &CVector) -> f64 {
    1e-9 * h0.norm_squared()
}

/// Quadratic forms of the robust single-user problem.
#[derive(Debug, Clone)]
pub struct RobustMatrices {
    /// `P_su·H_sᴴ·D⁻¹·H_s`: worst-case SINR per unit transmit quadratic form.
    pub a: HermitianMatrix,
    /// `h0·h0ᴴ + μ·I`: worst-case interference quadratic form.
    pub b: HermitianMatrix,
    /// `P_pu·h0′·h0′ᴴ + (P_pu·μ′ + σ²_noise)·I`: worst-case interference-plus-noise at the receiver.
    pub d: HermitianMatrix,
    pub hs: CMatrix,
    pub p_su: f64,
    pub margin_tx: f64,
    pub margin_rx: f64,
    /// Diagonal loading added to `B` (zero unless `e = 0`).
    pub regularization: f64,
}

impl RobustMatrices {
    pub fn nt(&self) -> usize {
        self.b.dim()
    }

    pub fn nr(&self) -> usize {
        self.d.dim()
    }
}

/// Builds `A`, `B` and `D`.
///
/// When the transmit margin is zero `B` is singular; `regularization` must
/// then supply a positive diagonal loading.
pub fn build_robust_matrices(
    cs: &ChannelSet,
    cfg: &SystemConfig,
    regularization: Option<f64>,
) -> Result<RobustMatrices> {
    cfg.validate()?;
    cs.validate()?;
    let (nr, nt) = cs.hs.shape();
    if nr != cfg.nr || nt != cfg.nt {
        return Err(Error::validation(format!(
            "H_s is {nr}x{nt}, config expects {}x{}",
            cfg.nr, cfg.nt
        )));
    }
    let u = cs.uncertainty;
    let margin_tx = worst_case_margin(cs.h0.norm(), u.e, u.sigma)?;
    let margin_rx = worst_case_margin(cs.h0_prime.norm(), u.e, u.sigma_prime)?;

    let loading = if margin_tx > 0.0 {
        0.0
    } else {
        match regularization {
            Some(eps) if eps > 0.0 => eps,
            _ => {
                return Err(Error::domain(
                    "B = h0·h0ᴴ is singular without uncertainty; supply a positive regularization",
                ))
            }
        }
    };
    let b = HermitianMatrix::outer(&cs.h0).shifted(margin_tx + loading);
    let d = HermitianMatrix::outer(&cs.h0_prime)
        .scaled(cfg.p_pu)
        .shifted(cfg.p_pu * margin_rx + cfg.noise_power);

    let mut d_inv_hs = CMatrix::zeros(nr, nt);
    for j in 0..nt {
        let col: CVector = cs.hs.column(j).into_owned();
        d_inv_hs.set_column(j, &hermitian_solve(&d, &col)?);
    }
    let a = HermitianMatrix::hermitize((cs.hs.adjoint() * d_inv_hs).scale(cfg.p_su));

    Ok(RobustMatrices {
        a,
        b,
        d,
        hs: cs.hs.clone(),
        p_su: cfg.p_su,
        margin_tx,
        margin_rx,
        regularization: loading,
    })
}
