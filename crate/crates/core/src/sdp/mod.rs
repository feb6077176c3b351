//! Small dense complex semidefinite programs with trace constraints.
//!
//! Problems have the form
//!
//! ```text
//! maximize   tr(A·W)
//! subject to tr(Bᵢ·W) ≤ bᵢ,  i = 1..m
//!            W ⪰ 0
//! ```
//!
//! with dual
//!
//! ```text
//! minimize   Σ yᵢ·bᵢ
//! subject to S = Σ yᵢ·Bᵢ − A ⪰ 0,  y ≥ 0.
//! ```
//!
//! The solver follows the central path of the dual log-barrier
//! `t·bᵀy − log det S − Σ log yᵢ` with damped Newton steps in `y` (there are
//! only a handful of constraints, so each Newton system is `m × m`). On the
//! central path `W = S⁻¹/t` is strictly primal feasible and the duality gap is
//! exactly `(n + m)/t`.

mod case2;

pub use case2::{case2_sinrs, case2_sum_rate, solve_case2, Case2Outcome, Case2Status};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::hermitian::{hermitian_eig, CMatrix, CVector, Cholesky, HermitianMatrix};

/// A single `tr(B·W) ≤ bound` constraint.
#[derive(Debug, Clone)]
pub struct TraceConstraint {
    pub matrix: HermitianMatrix,
    pub bound: f64,
}

impl TraceConstraint {
    pub fn new(matrix: HermitianMatrix, bound: f64) -> Self {
        TraceConstraint { matrix, bound }
    }

    /// `tr(W) ≤ bound`.
    pub fn trace_bound(dim: usize, bound: f64) -> Self {
        TraceConstraint::new(HermitianMatrix::identity(dim), bound)
    }
}

#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub objective: HermitianMatrix,
    pub constraints: Vec<TraceConstraint>,
}

impl SdpProblem {
    pub fn new(objective: HermitianMatrix, constraints: Vec<TraceConstraint>) -> Result<Self> {
        let p = SdpProblem {
            objective,
            constraints,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    pub fn validate(&self) -> Result<()> {
        if self.constraints.is_empty() {
            return Err(Error::Unbounded("no constraints bound tr(W)".into()));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.matrix.dim() != self.dim() {
                return Err(Error::validation(format!(
                    "constraint {i} is {}x{}, objective is {}x{}",
                    c.matrix.dim(),
                    c.matrix.dim(),
                    self.dim(),
                    self.dim()
                )));
            }
            if !c.bound.is_finite() {
                return Err(Error::validation(format!("constraint {i} has non-finite bound")));
            }
            if c.bound <= 0.0 {
                return Err(Error::Infeasible(format!(
                    "constraint {i} has bound {} <= 0; only strictly positive bounds are supported",
                    c.bound
                )));
            }
        }
        Ok(())
    }

    /// Largest relative violation `max(tr(Bᵢ·W) − bᵢ, 0)`.
    pub fn max_violation(&self, w: &HermitianMatrix) -> f64 {
        self.constraints
            .iter()
            .map(|c| (c.matrix.trace_product(w) - c.bound).max(0.0))
            .fold(0.0, f64::max)
    }

    pub fn objective_at_vector(&self, w: &CVector) -> f64 {
        self.objective.quad_form(w)
    }

    pub fn is_feasible_vector(&self, w: &CVector, slack: f64) -> bool {
        self.constraints
            .iter()
            .all(|c| c.matrix.quad_form(w) <= c.bound + slack)
    }
}

#[derive(Debug, Clone)]
pub struct SolverSettings {
    /// Cap on the total number of Newton steps.
    pub max_iterations: usize,
    /// Newton decrement `λ²/2` below which a point counts as centered.
    pub newton_tol: f64,
    /// Factor applied to the barrier weight `1/t` after each centering.
    pub barrier_decrease: f64,
    /// Relative gap the solver aims for.
    pub target_relative_gap: f64,
    /// Gap `≤ required_gap·(1 + |objective|)` that must hold on return.
    pub required_gap: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            max_iterations: 500,
            newton_tol: 1e-10,
            barrier_decrease: 0.5,
            target_relative_gap: 1e-9,
            required_gap: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    /// Primal optimizer; strictly feasible and PSD.
    pub w: HermitianMatrix,
    pub objective_value: f64,
    /// Dual objective `bᵀy`.
    pub dual_value: f64,
    /// `dual_value − objective_value`.
    pub duality_gap: f64,
    /// Dual multipliers `y`, one per constraint.
    pub multipliers: Vec<f64>,
    /// Dual slack `S = Σ yᵢ·Bᵢ − A`.
    pub slack: HermitianMatrix,
    /// Newton steps taken.
    pub iterations: usize,
}

pub fn solve(p: &SdpProblem) -> Result<SdpSolution> {
    solve_with(p, &SolverSettings::default())
}

struct Scaled {
    a: HermitianMatrix,
    bs: Vec<HermitianMatrix>,
}

impl Scaled {
    fn slack(&self, y: &[f64]) -> HermitianMatrix {
        let mut s = self.a.scaled(-1.0);
        for (b, &yi) in self.bs.iter().zip(y) {
            s = s.add_scaled(b, yi);
        }
        s
    }

    /// Rescales `w` so the most binding constraint is met; with `tighten`
    /// the scale may also grow.
    fn fit_to_constraints(&self, w: HermitianMatrix, tighten: bool) -> HermitianMatrix {
        let worst = self
            .bs
            .iter()
            .map(|b| b.trace_product(&w))
            .fold(0.0, f64::max);
        if worst > 1.0 || (tighten && worst > 0.0) {
            w.scaled(1.0 / worst)
        } else {
            w
        }
    }

    /// Rebuilds `W` on the near-null space of `S`, where the central-path
    /// inverse is dominated by rounding in the smallest eigenvalues.
    fn purify(&self, s: &HermitianMatrix, t: f64) -> Result<Option<HermitianMatrix>> {
        let eig = hermitian_eig(s)?;
        let n = eig.values.len();
        let cutoff = t.sqrt().recip();
        let floor = f64::EPSILON * eig.max_value().abs().max(1.0);
        let near: Vec<usize> = (0..n).filter(|&k| eig.values[k] <= cutoff).collect();
        if near.is_empty() || near.len() == n {
            return Ok(None);
        }
        let mut w = CMatrix::zeros(n, n);
        for &k in &near {
            let v = eig.vectors.column(k);
            let weight = if near.len() == 1 {
                1.0
            } else {
                1.0 / (t * eig.values[k].max(floor))
            };
            w += v * v.adjoint() * num_complex::Complex64::new(weight, 0.0);
        }
        Ok(Some(self.fit_to_constraints(HermitianMatrix::new(w)?, true)))
    }

    fn in_domain(&self, y: &[f64]) -> bool {
        y.iter().all(|&v| v > 0.0) && Cholesky::factor(self.slack(y).as_matrix()).is_some()
    }
}

pub fn solve_with(p: &SdpProblem, settings: &SolverSettings) -> Result<SdpSolution> {
    p.validate()?;
    let n = p.dim();
    let m = p.constraints.len();

    let a_scale = p.objective.frobenius_norm();
    if a_scale == 0.0 {
        return Ok(SdpSolution {
            w: HermitianMatrix::zeros(n),
            objective_value: 0.0,
            dual_value: 0.0,
            duality_gap: 0.0,
            multipliers: vec![0.0; m],
            slack: HermitianMatrix::zeros(n),
            iterations: 0,
        });
    }

    // Normalize so that ‖A‖_F = 1 and every bound is 1.
    let scaled = Scaled {
        a: p.objective.scaled(1.0 / a_scale),
        bs: p
            .constraints
            .iter()
            .map(|c| c.matrix.scaled(1.0 / c.bound))
            .collect(),
    };

    let sum_b = scaled
        .bs
        .iter()
        .fold(HermitianMatrix::zeros(n), |acc, b| acc.add(b));
    let sum_eig = hermitian_eig(&sum_b)?;
    if !(sum_eig.min_value() > 1e-12 * sum_eig.max_value().abs()) {
        return Err(Error::Unbounded(format!(
            "constraint matrices do not bound every direction (min eigenvalue of their sum {:e})",
            sum_eig.min_value()
        )));
    }
    let a_max = hermitian_eig(&scaled.a)?.max_value().max(0.0);
    let start = (a_max + 1.0) / sum_eig.min_value();
    let mut y = vec![start; m];

    let barrier_params = (n + m) as f64;
    let mut t = barrier_params / y.iter().sum::<f64>();
    let mut iterations = 0usize;
    let mut stalled = false;

    loop {
        // Centering.
        loop {
            if iterations >= settings.max_iterations {
                break;
            }
            let s = scaled.slack(&y);
            let Some(chol) = Cholesky::factor(s.as_matrix()) else {
                stalled = true;
                break;
            };
            let s_inv = chol.inverse();
            let products: Vec<CMatrix> = scaled
                .bs
                .iter()
                .map(|b| s_inv.as_matrix() * b.as_matrix())
                .collect();
            let mut grad = DVector::<f64>::zeros(m);
            let mut hess = DMatrix::<f64>::zeros(m, m);
            for i in 0..m {
                grad[i] = t - products[i].trace().re - 1.0 / y[i];
                for j in 0..=i {
                    let h = trace_of_product(&products[i], &products[j]);
                    hess[(i, j)] = h;
                    hess[(j, i)] = h;
                }
                hess[(i, i)] += 1.0 / (y[i] * y[i]);
            }
            let Some(hchol) = hess.clone().cholesky() else {
                stalled = true;
                break;
            };
            let step = hchol.solve(&(-&grad));
            let decrement_sq = -grad.dot(&step);
            iterations += 1;
            if decrement_sq / 2.0 <= settings.newton_tol {
                break;
            }

            // Damped Newton step for a self-concordant barrier: full steps
            // inside the quadratic region, 1/(1 + λ) outside it.
            let decrement = decrement_sq.max(0.0).sqrt();
            let mut alpha = if decrement < 0.25 { 1.0 } else { 1.0 / (1.0 + decrement) };
            let mut accepted = false;
            let mut centered_at_floor = false;
            while alpha > 1e-14 {
                let trial: Vec<f64> = y.iter().zip(step.iter()).map(|(v, d)| v + alpha * d).collect();
                if scaled.in_domain(&trial) {
                    if trial == y {
                        // The step is below floating-point resolution.
                        centered_at_floor = true;
                    }
                    y = trial;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !accepted {
                stalled = true;
                break;
            }
            if centered_at_floor {
                break;
            }
        }

        let scaled_gap = barrier_params / t;
        let w_est = Cholesky::factor(scaled.slack(&y).as_matrix())
            .map(|c| c.inverse().scaled(1.0 / t));
        let primal_est = w_est
            .as_ref()
            .map(|w| scaled.a.trace_product(w).abs())
            .unwrap_or(0.0);
        if stalled
            || iterations >= settings.max_iterations
            || scaled_gap <= settings.target_relative_gap * primal_est.max(f64::MIN_POSITIVE)
        {
            break;
        }
        t /= settings.barrier_decrease;
    }

    let s = scaled.slack(&y);
    let chol = Cholesky::factor(s.as_matrix()).ok_or_else(|| Error::NotConverged {
        routine: "SDP barrier method",
        iterations,
        residual: f64::NAN,
    })?;
    let central = scaled.fit_to_constraints(chol.inverse().scaled(1.0 / t), false);
    let purified = scaled.purify(&s, t)?;
    let w = match purified {
        Some(pw) if scaled.a.trace_product(&pw) > scaled.a.trace_product(&central) => pw,
        _ => central,
    };

    let objective_value = p.objective.trace_product(&w);
    let multipliers: Vec<f64> = y
        .iter()
        .zip(&p.constraints)
        .map(|(yi, c)| yi * a_scale / c.bound)
        .collect();
    let dual_value = a_scale * y.iter().sum::<f64>();
    let duality_gap = dual_value - objective_value;
    if !(duality_gap <= settings.required_gap * (1.0 + objective_value.abs())) {
        return Err(Error::NotConverged {
            routine: "SDP barrier method",
            iterations,
            residual: duality_gap,
        });
    }
    Ok(SdpSolution {
        w,
        objective_value,
        dual_value,
        duality_gap,
        multipliers,
        slack: s.scaled(a_scale),
        iterations,
    })
}

/// `Re tr(X·Y)` for square complex matrices.
fn trace_of_product(x: &CMatrix, y: &CMatrix) -> f64 {
    let n = x.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for k in 0..n {
            acc += (x[(i, k)] * y[(k, i)]).re;
        }
    }
    acc
}

/// Whether [`extract_rank_one`] found a usable vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtractionStatus {
    Ok,
    /// `W` has no positive eigenvalue; the zero vector is returned.
    ZeroSolution,
}

#[derive(Debug, Clone)]
pub struct RankOneExtraction {
    pub vector: CVector,
    /// `λ₂(W)/λ₁(W)`; zero for an exactly rank-one `W`.
    pub defect: f64,
    /// Factor (≤ 1) applied to `√λ₁·v₁` to restore feasibility.
    pub rescale: f64,
    pub status: ExtractionStatus,
}

/// Principal rank-one component `√λ₁·v₁` of `W`, shrunk if needed so that
/// every constraint of `problem` holds.
pub fn extract_rank_one(sol: &SdpSolution, problem: &SdpProblem) -> Result<RankOneExtraction> {
    let eig = hermitian_eig(&sol.w)?;
    let n = eig.values.len();
    let l1 = eig.values[0];
    if !(l1 > 0.0) {
        log::warn!("rank-one extraction from a matrix with no positive eigenvalue");
        return Ok(RankOneExtraction {
            vector: CVector::zeros(n),
            defect: 0.0,
            rescale: 1.0,
            status: ExtractionStatus::ZeroSolution,
        });
    }
    let defect = if n > 1 { eig.values[1].max(0.0) / l1 } else { 0.0 };
    let mut vector = eig.pair(0).vector.scale(l1.sqrt());
    let mut rescale: f64 = 1.0;
    for c in &problem.constraints {
        let q = c.matrix.quad_form(&vector);
        if q > c.bound {
            rescale = rescale.min((c.bound / q).sqrt());
        }
    }
    if rescale < 1.0 {
        vector.scale_mut(rescale);
    }
    Ok(RankOneExtraction {
        vector,
        defect,
        rescale,
        status: ExtractionStatus::Ok,
    })
}
