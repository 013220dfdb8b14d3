//! Cyclic Jacobi eigendecomposition of 4x4 complex Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot element with a diagonal
//! unitary, then applies an ordinary real Givens rotation, so the combined
//! transform `U = D G` is unitary and zeroes `A[p][q]` exactly.

use num_complex::Complex64;

use crate::error::{Result, SalsaError};

pub const DIM: usize = 4;

/// Maximum number of full sweeps over the upper triangle.
pub const MAX_SWEEPS: usize = 50;

/// Convergence target: off-diagonal Frobenius norm relative to the trace.
pub const CONVERGENCE_TOL: f64 = 1e-12;

/// Relative tolerance for the Hermitian precondition.
pub const HERMITIAN_TOL: f64 = 1e-10;

pub type Matrix4 = [[Complex64; DIM]; DIM];

/// 4x4 spatial covariance matrix at one time-frequency bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialCovariance {
    pub matrix: Matrix4,
}

impl Default for SpatialCovariance {
    fn default() -> Self {
        Self {
            matrix: [[Complex64::default(); DIM]; DIM],
        }
    }
}

impl SpatialCovariance {
    pub fn identity() -> Self {
        let mut m = Self::default();
        for i in 0..DIM {
            m.matrix[i][i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// `v v^H`
    pub fn outer(v: &[Complex64; DIM]) -> Self {
        let mut m = Self::default();
        for i in 0..DIM {
            for j in 0..DIM {
                m.matrix[i][j] = v[i] * v[j].conj();
            }
        }
        m
    }

    pub fn trace(&self) -> f64 {
        (0..DIM).map(|i| self.matrix[i][i].re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix
            .iter()
            .flatten()
            .map(Complex64::norm_sqr)
            .sum::<f64>()
            .sqrt()
    }

    /// `||R - R^H||_F`
    pub fn hermitian_defect(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..DIM {
            for j in 0..DIM {
                acc += (self.matrix[i][j] - self.matrix[j][i].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn mul_vec(&self, v: &[Complex64; DIM]) -> [Complex64; DIM] {
        std::array::from_fn(|i| (0..DIM).map(|j| self.matrix[i][j] * v[j]).sum())
    }
}

/// Full eigendecomposition; `vectors[k]` belongs to `values[k]`, sorted descending.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermitianEigen {
    pub values: [f64; DIM],
    pub vectors: [[Complex64; DIM]; DIM],
}

impl HermitianEigen {
    /// `sum_k values[k] v_k v_k^H`
    pub fn reconstruct(&self) -> SpatialCovariance {
        let mut m = SpatialCovariance::default();
        for (value, v) in self.values.iter().zip(&self.vectors) {
            for i in 0..DIM {
                for j in 0..DIM {
                    m.matrix[i][j] += *value * v[i] * v[j].conj();
                }
            }
        }
        m
    }

    pub fn principal(&self) -> EigenPair {
        EigenPair {
            eigenvalues: self.values,
            principal_vector: self.vectors[0],
        }
    }
}

/// Sorted eigenvalues with the phase-fixed principal eigenvector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenPair {
    pub eigenvalues: [f64; DIM],
    pub principal_vector: [Complex64; DIM],
}

impl EigenPair {
    /// `||R v1 - lambda1 v1||`
    pub fn residual(&self, r: &SpatialCovariance) -> f64 {
        let rv = r.mul_vec(&self.principal_vector);
        rv.iter()
            .zip(&self.principal_vector)
            .map(|(a, b)| (a - b * self.eigenvalues[0]).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

fn off_diagonal_norm(a: &Matrix4) -> f64 {
    let mut acc = 0.0;
    for i in 0..DIM {
        for j in 0..DIM {
            if i != j {
                acc += a[i][j].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Rotate `v` so the reference component (index 0) is real and non-negative,
/// falling back to the largest component when the reference is ~0.
pub fn fix_phase(v: &mut [Complex64; DIM]) {
    let pivot = if v[0].norm() >= 1e-9 {
        0
    } else {
        (0..DIM)
            .max_by(|&a, &b| v[a].norm().total_cmp(&v[b].norm()))
            .unwrap_or(0)
    };
    let mag = v[pivot].norm();
    if mag == 0.0 {
        return;
    }
    let rot = v[pivot].conj() / mag;
    for x in v.iter_mut() {
        *x *= rot;
    }
    v[pivot] = Complex64::new(v[pivot].re.max(0.0), 0.0);
}

/// Eigendecomposition by cyclic Jacobi rotations.
///
/// Eigenvalues are sorted descending and every eigenvector is phase fixed.
pub fn eigen_decompose(r: &SpatialCovariance) -> Result<HermitianEigen> {
    let scale = r.frobenius_norm();
    if !scale.is_finite() {
        return Err(SalsaError::Numeric(
            "covariance contains non-finite values".into(),
        ));
    }
    if r.hermitian_defect() > HERMITIAN_TOL * scale {
        return Err(SalsaError::Numeric(format!(
            "matrix is not Hermitian (defect {:.3e}, norm {:.3e})",
            r.hermitian_defect(),
            scale
        )));
    }

    // Symmetrize so rounding in the input cannot leak into the rotations.
    let mut a = r.matrix;
    for i in 0..DIM {
        a[i][i] = Complex64::new(a[i][i].re, 0.0);
        for j in i + 1..DIM {
            let avg = (a[i][j] + a[j][i].conj()) * 0.5;
            a[i][j] = avg;
            a[j][i] = avg.conj();
        }
    }
    let mut v: Matrix4 = [[Complex64::default(); DIM]; DIM];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }

    // Trace of a PSD matrix equals its nuclear norm; use the Frobenius norm so
    // indefinite input still gets a meaningful scale.
    let tol = CONVERGENCE_TOL * r.trace().abs().max(scale);
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= tol {
            break;
        }
        for p in 0..DIM - 1 {
            for q in p + 1..DIM {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: [usize; DIM] = [0, 1, 2, 3];
    order.sort_by(|&i, &j| a[j][j].re.total_cmp(&a[i][i].re));
    let values = order.map(|k| a[k][k].re);
    let vectors = order.map(|k| {
        let mut col: [Complex64; DIM] = std::array::from_fn(|i| v[i][k]);
        fix_phase(&mut col);
        col
    });
    Ok(HermitianEigen { values, vectors })
}

/// Zero `a[p][q]` with one unitary rotation, accumulating it into `v`.
fn rotate(a: &mut Matrix4, v: &mut Matrix4, p: usize, q: usize) {
    let apq = a[p][q];
    let b = apq.norm();
    if b == 0.0 {
        return;
    }
    // D = diag(1, e^{-i phi}) on (p, q) makes the pivot real and positive.
    let phase = apq.conj() / b;
    let theta = 0.5 * (2.0 * b).atan2(a[q][q].re - a[p][p].re);
    let (s, c) = theta.sin_cos();

    // U = D G with G = [[c, s], [-s, c]]
    let u_pp = Complex64::new(c, 0.0);
    let u_pq = Complex64::new(s, 0.0);
    let u_qp = phase * -s;
    let u_qq = phase * c;

    // A <- A U
    for row in a.iter_mut() {
        let (x, y) = (row[p], row[q]);
        row[p] = x * u_pp + y * u_qp;
        row[q] = x * u_pq + y * u_qq;
    }
    // A <- U^H A
    for k in 0..DIM {
        let (x, y) = (a[p][k], a[q][k]);
        a[p][k] = u_pp.conj() * x + u_qp.conj() * y;
        a[q][k] = u_pq.conj() * x + u_qq.conj() * y;
    }
    a[p][q] = Complex64::default();
    a[q][p] = Complex64::default();
    a[p][p].im = 0.0;
    a[q][q].im = 0.0;

    for row in v.iter_mut() {
        let (x, y) = (row[p], row[q]);
        row[p] = x * u_pp + y * u_qp;
        row[q] = x * u_pq + y * u_qq;
    }
}

/// Sorted eigenvalues and phase-fixed principal eigenvector of `r`.
pub fn eigen_4x4_hermitian(r: &SpatialCovariance) -> Result<EigenPair> {
    eigen_decompose(r).map(|e| e.principal())
}
