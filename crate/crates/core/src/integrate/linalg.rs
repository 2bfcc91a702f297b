//! Small dense matrix functions: square root and exponential.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const SQRT_TOL: f64 = 1e-13;
const SQRT_MAX_ITER: usize = 50;

/// Principal square root by Denman–Beavers iteration.
pub fn mat_sqrt(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::Dimension(format!(
            "{}x{} is not square",
            n,
            m.ncols()
        )));
    }
    let mut y = m.clone();
    let mut z = DMatrix::identity(n, n);
    let mut residual = f64::INFINITY;
    for _ in 0..SQRT_MAX_ITER {
        let (Some(y_inv), Some(z_inv)) = (y.clone().try_inverse(), z.clone().try_inverse()) else {
            break;
        };
        y = (&y + z_inv) * 0.5;
        z = (&z + y_inv) * 0.5;
        residual = (&y * &y - m).norm();
        if residual <= SQRT_TOL * m.norm().max(1.0) {
            return Ok(y);
        }
        if !residual.is_finite() {
            break;
        }
    }
    Err(Error::NoConvergence {
        method: "denman-beavers",
        iterations: SQRT_MAX_ITER,
        residual,
    })
}

/// `exp(M)` by scaling and squaring a truncated Taylor series.
pub fn mat_exp(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let norm = m.norm();
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = m / 2f64.powi(squarings);
    let mut sum = DMatrix::identity(n, n);
    let mut term = DMatrix::identity(n, n);
    for k in 1..=30 {
        term = &term * &scaled / k as f64;
        sum += &term;
        if term.norm() <= f64::EPSILON * sum.norm() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Workspace for `y ← exp(A) y` with `A = Σ Δ_i a_i`, reused across steps
/// so the hot loop does not allocate.
#[derive(Clone, Debug)]
pub struct ExpApply {
    a: DMatrix<f64>,
    term: DVector<f64>,
    next: DVector<f64>,
}

impl ExpApply {
    pub fn new(n: usize) -> Self {
        ExpApply {
            a: DMatrix::zeros(n, n),
            term: DVector::zeros(n),
            next: DVector::zeros(n),
        }
    }

    /// `y ← exp(Σ coeffs[i] mats[i]) y`, summing the series on the vector.
    pub fn apply(&mut self, mats: &[DMatrix<f64>], coeffs: &[f64], y: &mut DVector<f64>) {
        self.a.fill(0.0);
        for (m, &c) in mats.iter().zip(coeffs) {
            self.a.zip_apply(m, |x, v| *x += c * v);
        }
        let norm = self.a.norm();
        // Large arguments are split so each sub-series converges quickly.
        let pieces = if norm > 0.5 {
            (norm / 0.5).ceil() as usize
        } else {
            1
        };
        if pieces > 1 {
            self.a /= pieces as f64;
        }
        for _ in 0..pieces {
            self.term.copy_from(y);
            for k in 1..=40 {
                self.next.gemv(1.0 / k as f64, &self.a, &self.term, 0.0);
                std::mem::swap(&mut self.term, &mut self.next);
                *y += &self.term;
                if self.term.norm() <= f64::EPSILON * y.norm() {
                    break;
                }
            }
        }
    }
}
