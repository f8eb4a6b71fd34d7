//! Dense complex linear algebra helpers on top of `nalgebra`.
//!
//! Everything here works on small dense matrices; the intended scale is a
//! Hilbert space of dimension at most a few hundred.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> CMatrix {
    CMatrix::zeros(rows, cols)
}

/// `(m + m*) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Largest entrywise modulus of `m - m*`.
pub fn hermiticity_residual(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Eigen-decomposition of the Hermitian part of `m`, eigenvalues ascending.
///
/// Columns of the returned matrix are the matching orthonormal eigenvectors.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        vectors.set_column(new, &eig.eigenvectors.column(old));
    }
    (values, vectors)
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    eigh(m).0.first().copied().unwrap_or(0.0)
}

/// Spectral norm (largest singular value).
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .fold(0.0_f64, |acc, &s| acc.max(s))
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Real coordinates of Hermitian `n×n` matrices.
///
/// The basis is orthonormal for the real inner product `Re tr(A* B)`: the
/// diagonal units `E_kk`, then for each `k < l` the pair
/// `(E_kl + E_lk)/√2` and `i(E_kl − E_lk)/√2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HermitianBasis {
    n: usize,
}

impl HermitianBasis {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Real dimension `n²`.
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Writes the coordinates of `m` (assumed Hermitian) into `out`.
    pub fn write_coords(&self, m: &CMatrix, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.len());
        let s = std::f64::consts::SQRT_2;
        let mut idx = 0;
        for k in 0..self.n {
            out[idx] = m[(k, k)].re;
            idx += 1;
        }
        for k in 0..self.n {
            for l in (k + 1)..self.n {
                // average the two triangles so slightly non-Hermitian input is projected
                let z = (m[(k, l)] + m[(l, k)].conj()) * 0.5;
                out[idx] = s * z.re;
                out[idx + 1] = s * z.im;
                idx += 2;
            }
        }
    }

    pub fn coords(&self, m: &CMatrix) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.write_coords(m, &mut out);
        out
    }

    pub fn from_coords(&self, x: &[f64]) -> CMatrix {
        debug_assert_eq!(x.len(), self.len());
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut m = zeros(self.n, self.n);
        let mut idx = 0;
        for k in 0..self.n {
            m[(k, k)] = c64(x[idx], 0.0);
            idx += 1;
        }
        for k in 0..self.n {
            for l in (k + 1)..self.n {
                let z = c64(x[idx] * s, x[idx + 1] * s);
                m[(k, l)] = z;
                m[(l, k)] = z.conj();
                idx += 2;
            }
        }
        m
    }

    pub fn element(&self, j: usize) -> CMatrix {
        let mut x = vec![0.0; self.len()];
        x[j] = 1.0;
        self.from_coords(&x)
    }
}

/// Numerical nullspace of a real matrix.
#[derive(Debug, Clone)]
pub struct Nullspace {
    /// All `cols` singular values, descending. Columns beyond the row count
    /// contribute exact zeros.
    pub singular_values: Vec<f64>,
    pub sigma_max: f64,
    /// Values at or below this count as zero.
    pub threshold: f64,
    /// Orthonormal basis, ordered from the smallest singular value upward.
    pub basis: Vec<DVector<f64>>,
}

impl Nullspace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Smallest singular value above the threshold, if any.
    pub fn smallest_retained(&self) -> Option<f64> {
        self.singular_values
            .iter()
            .copied()
            .filter(|&s| s > self.threshold)
            .fold(None, |acc: Option<f64>, s| Some(acc.map_or(s, |a| a.min(s))))
    }
}

/// Nullspace via a full SVD; singular values `≤ rel_tol · σ_max` are zero.
///
/// Wide matrices are padded with zero rows so that `V` is complete.
pub fn nullspace(a: &DMatrix<f64>, rel_tol: f64) -> Result<Nullspace> {
    let cols = a.ncols();
    if cols == 0 {
        return Ok(Nullspace {
            singular_values: Vec::new(),
            sigma_max: 0.0,
            threshold: 0.0,
            basis: Vec::new(),
        });
    }
    let padded = if a.nrows() < cols {
        let mut p = DMatrix::<f64>::zeros(cols, cols);
        p.view_mut((0, 0), (a.nrows(), cols)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = SVD::try_new(padded, false, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::NumericalInconsistency("SVD failed to converge".into()))?;
    let v_t = svd
        .v_t
        .as_ref()
        .ok_or_else(|| Error::NumericalInconsistency("SVD returned no V".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));
    let singular_values: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let sigma_max = singular_values.first().copied().unwrap_or(0.0);
    let threshold = rel_tol * sigma_max;
    let basis = order
        .iter()
        .rev()
        .filter(|&&i| svd.singular_values[i] <= threshold)
        .map(|&i| v_t.row(i).transpose())
        .collect();
    Ok(Nullspace {
        singular_values,
        sigma_max,
        threshold,
        basis,
    })
}
