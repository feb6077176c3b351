//! Dense complex Hermitian linear algebra.
//!
//! Every matrix in this crate is small (at most a few tens of rows), so the
//! routines here favour robustness and exact reproducibility over asymptotic
//! speed: eigen-decompositions use the cyclic complex Jacobi method and linear
//! solves use a Cholesky factorization.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Relative tolerance for the Hermitian symmetry check.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Off-diagonal Frobenius norm (relative to the matrix norm) that counts as converged.
pub const JACOBI_TOL: f64 = 1e-10;
/// Sweep cap for the cyclic Jacobi iteration.
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Negative eigenvalues above this (times `max(1, ‖M‖)`) are treated as rounding noise.
pub const PSD_CLAMP_TOL: f64 = 1e-10;
/// Minimum eigenvalue, relative to the spectral norm, for a matrix to count as invertible.
pub const CONDITIONING_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// A square complex matrix equal to its own conjugate transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    /// Validates `m` and stores its exact Hermitian part.
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::validation(format!(
                "Hermitian matrix must be square and non-empty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::validation("matrix has non-finite entries"));
        }
        let scale = max_abs(&m);
        let tol = SYMMETRY_TOL * scale;
        let n = m.nrows();
        for i in 0..n {
            if m[(i, i)].im.abs() > tol {
                return Err(Error::validation(format!(
                    "diagonal entry ({i},{i}) has imaginary part {:e}",
                    m[(i, i)].im
                )));
            }
            for j in (i + 1)..n {
                let skew = (m[(i, j)] - m[(j, i)].conj()).norm();
                if skew > tol {
                    return Err(Error::validation(format!(
                        "entries ({i},{j}) and ({j},{i}) are not conjugate (mismatch {skew:e})"
                    )));
                }
            }
        }
        Ok(Self::hermitize(m))
    }

    /// Projects a square matrix onto its Hermitian part `(M + Mᴴ)/2` without checks.
    ///
    /// Use for products that are Hermitian in exact arithmetic.
    pub fn hermitize(m: CMatrix) -> Self {
        assert!(m.is_square(), "hermitize requires a square matrix");
        let h = (&m + m.adjoint()).scale(0.5);
        HermitianMatrix(h)
    }

    pub fn identity(dim: usize) -> Self {
        HermitianMatrix(CMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        HermitianMatrix(CMatrix::zeros(dim, dim))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        HermitianMatrix(m)
    }

    /// The rank-one matrix `v·vᴴ`.
    pub fn outer(v: &CVector) -> Self {
        HermitianMatrix::hermitize(v * v.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_inner(self) -> CMatrix {
        self.0
    }

    /// `Re(vᴴ·M·v)`; the imaginary part vanishes for Hermitian `M`.
    pub fn quad_form(&self, v: &CVector) -> f64 {
        v.dotc(&(&self.0 * v)).re
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.0[(i, i)].re).sum()
    }

    /// `Re tr(self·other)` computed without forming the product.
    pub fn trace_product(&self, other: &HermitianMatrix) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch in trace_product");
        // tr(XY) = Σ_ij X_ij Y_ji = Σ_ij X_ij conj(Y_ij) for Hermitian Y.
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(x, y)| (x * y.conj()).re)
            .sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        HermitianMatrix(self.0.scale(factor))
    }

    /// `self + shift·I`.
    pub fn shifted(&self, shift: f64) -> Self {
        let mut m = self.0.clone();
        for i in 0..self.dim() {
            m[(i, i)] += Complex64::new(shift, 0.0);
        }
        HermitianMatrix(m)
    }

    pub fn add(&self, other: &HermitianMatrix) -> Self {
        HermitianMatrix(&self.0 + &other.0)
    }

    pub fn add_scaled(&self, other: &HermitianMatrix, factor: f64) -> Self {
        HermitianMatrix(&self.0 + other.0.scale(factor))
    }

    /// `Tᴴ·self·T` for an arbitrary (possibly rectangular) `T`.
    pub fn congruence(&self, t: &CMatrix) -> Self {
        HermitianMatrix::hermitize(t.adjoint() * &self.0 * t)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.0)
    }
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// An eigenvalue together with a unit-norm eigenvector.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: CVector,
}

/// Full spectral decomposition with eigenvalues sorted in descending order.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    /// Column `k` is the unit eigenvector for `values[k]`.
    pub vectors: CMatrix,
    pub sweeps: usize,
}

impl EigenDecomposition {
    pub fn pair(&self, k: usize) -> EigenPair {
        EigenPair {
            value: self.values[k],
            vector: self.vectors.column(k).into_owned(),
        }
    }

    pub fn max_value(&self) -> f64 {
        self.values[0]
    }

    pub fn min_value(&self) -> f64 {
        *self.values.last().expect("non-empty spectrum")
    }

    /// Rebuilds `V·diag(f(λ))·Vᴴ`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> HermitianMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (k, &value) in self.values.iter().enumerate() {
            let fk = f(value);
            for i in 0..n {
                scaled[(i, k)] *= fk;
            }
        }
        HermitianMatrix::hermitize(scaled * self.vectors.adjoint())
    }
}

/// Rotates `v` so that its first non-negligible entry is real and positive.
pub fn normalize_phase(v: &mut CVector) {
    let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return;
    }
    if let Some(lead) = v.iter().find(|z| z.norm() > 1e-12 * scale).copied() {
        let rot = lead.conj() / lead.norm();
        v.iter_mut().for_each(|z| *z *= rot);
    }
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Cyclic complex Jacobi eigen-decomposition.
///
/// Each rotation first removes the phase of `a_pq` with a diagonal unitary,
/// then applies the classical real Jacobi rotation to the now-real 2×2 block.
pub fn hermitian_eig(m: &HermitianMatrix) -> Result<EigenDecomposition> {
    let n = m.dim();
    let mut a = m.0.clone();
    let mut v = CMatrix::identity(n, n);
    let scale = m.frobenius_norm();

    let mut sweeps = 0;
    let mut off = off_diagonal_norm(&a);
    // Keep sweeping down to rounding level; JACOBI_TOL is the acceptance bar.
    while off > 4.0 * f64::EPSILON * scale && sweeps < JACOBI_MAX_SWEEPS {
        sweeps += 1;
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                if r <= f64::EPSILON * 1e-2 * (app.abs() + aqq.abs()) {
                    a[(p, q)] = ZERO;
                    a[(q, p)] = ZERO;
                    continue;
                }
                rotated = true;
                let phase_conj = apq.conj() / r;
                let theta = (aqq - app) / (2.0 * r);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // Unitary J acting on columns (p, q).
                let j_pp = Complex64::new(c, 0.0);
                let j_pq = Complex64::new(s, 0.0);
                let j_qp = phase_conj * (-s);
                let j_qq = phase_conj * c;

                for k in 0..n {
                    let xp = a[(k, p)];
                    let xq = a[(k, q)];
                    a[(k, p)] = xp * j_pp + xq * j_qp;
                    a[(k, q)] = xp * j_pq + xq * j_qq;
                    let vp = v[(k, p)];
                    let vq = v[(k, q)];
                    v[(k, p)] = vp * j_pp + vq * j_qp;
                    v[(k, q)] = vp * j_pq + vq * j_qq;
                }
                for k in 0..n {
                    let xp = a[(p, k)];
                    let xq = a[(q, k)];
                    a[(p, k)] = j_pp.conj() * xp + j_qp.conj() * xq;
                    a[(q, k)] = j_pq.conj() * xp + j_qq.conj() * xq;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = Complex64::new(app - t * r, 0.0);
                a[(q, q)] = Complex64::new(aqq + t * r, 0.0);
            }
        }
        off = off_diagonal_norm(&a);
        if !rotated {
            break;
        }
    }
    if off > JACOBI_TOL * scale {
        return Err(Error::NotConverged {
            routine: "Jacobi eigensolver",
            iterations: sweeps,
            residual: off,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort keeps index order among ties, so the identity yields e1 first.
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        let mut col: CVector = v.column(i).into_owned();
        let norm = col.norm();
        col.unscale_mut(norm);
        normalize_phase(&mut col);
        vectors.set_column(k, &col);
    }
    Ok(EigenDecomposition {
        values,
        vectors,
        sweeps,
    })
}

/// Algebraically largest eigenvalue and its (phase-normalized) unit eigenvector.
pub fn hermitian_eig_max(m: &HermitianMatrix) -> Result<EigenPair> {
    Ok(hermitian_eig(m)?.pair(0))
}

fn spectral_scale(eig: &EigenDecomposition) -> f64 {
    eig.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
}

/// Principal square root of a positive semidefinite matrix.
pub fn hermitian_sqrt(m: &HermitianMatrix) -> Result<HermitianMatrix> {
    let eig = hermitian_eig(m)?;
    let floor = -PSD_CLAMP_TOL * spectral_scale(&eig).max(1.0);
    if eig.min_value() < floor {
        return Err(Error::domain(format!(
            "square root of an indefinite matrix (minimum eigenvalue {:e})",
            eig.min_value()
        )));
    }
    Ok(eig.map_spectrum(|l| l.max(0.0).sqrt()))
}

/// Inverse principal square root `(M^{1/2})⁻¹` of a positive definite matrix.
pub fn hermitian_inv_sqrt(m: &HermitianMatrix) -> Result<HermitianMatrix> {
    let eig = hermitian_eig(m)?;
    check_definite(&eig)?;
    Ok(eig.map_spectrum(|l| 1.0 / l.sqrt()))
}

fn check_definite(eig: &EigenDecomposition) -> Result<()> {
    let norm = spectral_scale(eig);
    let min = eig.min_value();
    if !(min > CONDITIONING_TOL * norm) || norm == 0.0 {
        return Err(Error::Conditioning {
            min_eigenvalue: min,
            norm,
        });
    }
    Ok(())
}

/// Solves `M·x = rhs` for positive definite `M`.
pub fn hermitian_solve(m: &HermitianMatrix, rhs: &CVector) -> Result<CVector> {
    if rhs.len() != m.dim() {
        return Err(Error::validation(format!(
            "right-hand side has length {}, matrix is {}x{}",
            rhs.len(),
            m.dim(),
            m.dim()
        )));
    }
    check_definite(&hermitian_eig(m)?)?;
    let chol = Cholesky::factor(m.as_matrix()).ok_or_else(|| Error::Conditioning {
        min_eigenvalue: 0.0,
        norm: m.frobenius_norm(),
    })?;
    Ok(chol.solve_vec(rhs))
}

/// Lower-triangular Cholesky factor `L` with `M = L·Lᴴ`.
#[derive(Debug, Clone)]
pub(crate) struct Cholesky {
    l: CMatrix,
}

impl Cholesky {
    /// Returns `None` when a pivot is not strictly positive.
    pub(crate) fn factor(m: &CMatrix) -> Option<Self> {
        let n = m.nrows();
        let mut l = CMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = m[(j, j)].re;
            for k in 0..j {
                d -= l[(j, k)].norm_sqr();
            }
            if !(d > 0.0) {
                return None;
            }
            let ljj = d.sqrt();
            l[(j, j)] = Complex64::new(ljj, 0.0);
            for i in (j + 1)..n {
                let mut s = m[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = s / ljj;
            }
        }
        Some(Cholesky { l })
    }

    pub(crate) fn solve_vec(&self, rhs: &CVector) -> CVector {
        let n = self.l.nrows();
        let mut y = rhs.clone();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[(i, k)] * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= self.l[(k, i)].conj() * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
        y
    }

    pub(crate) fn inverse(&self) -> HermitianMatrix {
        let n = self.l.nrows();
        let mut inv = CMatrix::zeros(n, n);
        let mut e = CVector::zeros(n);
        for j in 0..n {
            e.fill(ZERO);
            e[j] = ONE;
            inv.set_column(j, &self.solve_vec(&e));
        }
        HermitianMatrix::hermitize(inv)
    }
}
