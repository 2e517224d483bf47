//! Dense complex matrix algebra for multi-qubit states and operators.
//!
//! Everything in the pipeline lives on matrices of side at most 16, so all
//! products, Kronecker products, partial traces and eigenvalue computations
//! are done directly in double precision with no sparse or approximate paths.

use num_complex::Complex64;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Hermiticity / normalization tolerance shared across the crate.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Slack allowed below zero for eigenvalues of positive semidefinite states.
pub const PSD_TOL: f64 = 1e-9;

/// Dense complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Outer product |v><v| of a state vector.
    pub fn projector_from_state(state: &[Complex64]) -> Self {
        let n = state.len();
        Self::from_fn(n, n, |i, j| state[i] * state[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Matrix product; the inner dimensions must agree.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                context: "matmul inner dimensions",
                left: self.cols,
                right: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Kronecker product; subsystem dimension lists concatenate.
    pub fn kron(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.data[i * self.cols + j];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square(), "trace of a non-square matrix");
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    /// tr(self * other) without forming the product.
    pub fn trace_product(&self, other: &Self) -> Complex64 {
        assert_eq!(self.cols, other.rows, "trace_product inner dimensions");
        assert_eq!(self.rows, other.cols, "trace_product outer dimensions");
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.rows {
            for j in 0..self.cols {
                acc += self[(i, j)] * other[(j, i)];
            }
        }
        acc
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (d, s) in out.data.iter_mut().zip(&other.data) {
            *d += s;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (d, s) in out.data.iter_mut().zip(&other.data) {
            *d -= s;
        }
        out
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for d in out.data.iter_mut() {
            *d *= factor;
        }
        out
    }

    pub fn scale_complex(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        for d in out.data.iter_mut() {
            *d *= factor;
        }
        out
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// max |A - A^dagger| over entries.
    pub fn hermiticity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Kronecker product as a free function.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}

/// A density operator together with its subsystem dimension list.
///
/// States are allowed to be sub-normalized: mid-pipeline branches carry the
/// outcome probability in their trace.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
    dims: Vec<usize>,
}

impl DensityMatrix {
    /// Wrap a matrix as a state, checking shape, finiteness, Hermiticity and
    /// the trace window [0, 1] (with roundoff slack on both sides).
    pub fn new(mat: ComplexMatrix, dims: Vec<usize>) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::DimensionMismatch {
                context: "density matrix must be square",
                left: mat.rows(),
                right: mat.cols(),
            });
        }
        let side: usize = dims.iter().product();
        if side != mat.rows() || dims.is_empty() {
            return Err(Error::DimensionMismatch {
                context: "subsystem dimensions product",
                left: side,
                right: mat.rows(),
            });
        }
        if !mat.is_finite() {
            return Err(Error::InvalidState("non-finite entries".into()));
        }
        let herm = mat.hermiticity_deviation();
        if herm > HERMITICITY_TOL {
            return Err(Error::NotHermitian { deviation: herm });
        }
        let tr = mat.trace();
        if tr.im.abs() > HERMITICITY_TOL {
            return Err(Error::InvalidState(format!(
                "trace has imaginary part {:.3e}",
                tr.im
            )));
        }
        if tr.re < -HERMITICITY_TOL || tr.re > 1.0 + 1e-9 {
            return Err(Error::InvalidState(format!(
                "trace {:.12} outside [0, 1]",
                tr.re
            )));
        }
        Ok(Self { mat, dims })
    }

    pub fn mat(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn side(&self) -> usize {
        self.mat.rows()
    }

    pub fn trace_real(&self) -> f64 {
        self.mat.trace().re
    }

    /// Reduced state over `keep` (subsystem indices, any order; kept
    /// subsystems stay in their original relative order).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        partial_trace(self, keep)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        min_eigenvalue(&self.mat)
    }

    pub fn is_psd(&self, tol: f64) -> Result<bool> {
        Ok(self.min_eigenvalue()? >= -tol)
    }
}

/// Partial trace over the complement of `keep`; the trace is preserved.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let dims = rho.dims();
    let n = dims.len();
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.is_empty() {
        return Err(Error::EmptySubsystemSelection);
    }
    if let Some(&bad) = kept.iter().find(|&&i| i >= n) {
        return Err(Error::SubsystemOutOfRange {
            index: bad,
            count: n,
        });
    }
    let traced: Vec<usize> = (0..n).filter(|i| !kept.contains(i)).collect();

    // Row-major strides of each subsystem inside the full index.
    let mut stride = vec![1usize; n];
    for i in (0..n.saturating_sub(1)).rev() {
        stride[i] = stride[i + 1] * dims[i + 1];
    }
    let offsets = |subs: &[usize]| -> Vec<usize> {
        let total: usize = subs.iter().map(|&s| dims[s]).product();
        let mut out = Vec::with_capacity(total.max(1));
        for mut idx in 0..total.max(1) {
            let mut off = 0usize;
            for &s in subs.iter().rev() {
                let d = dims[s];
                off += (idx % d) * stride[s];
                idx /= d;
            }
            out.push(off);
        }
        out
    };
    let keep_off = offsets(&kept);
    let tr_off = offsets(&traced);

    let dk = keep_off.len();
    let mut out = ComplexMatrix::zeros(dk, dk);
    for (r, &ro) in keep_off.iter().enumerate() {
        for (c, &co) in keep_off.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for &to in &tr_off {
                acc += rho.mat[(ro + to, co + to)];
            }
            out[(r, c)] = acc;
        }
    }
    let kept_dims: Vec<usize> = kept.iter().map(|&s| dims[s]).collect();
    DensityMatrix::new(out, kept_dims)
}

/// Eigenvalues (ascending) and eigenvectors (columns) of a Hermitian matrix,
/// by cyclic complex Jacobi rotations. Adequate and robust for sides <= 16.
pub fn hermitian_eigen(a: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            context: "eigendecomposition of non-square matrix",
            left: a.rows(),
            right: a.cols(),
        });
    }
    let dev = a.hermiticity_deviation();
    if dev > HERMITICITY_TOL {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let n = a.rows();
    // Work on the Hermitian part to kill roundoff asymmetry.
    let mut m = ComplexMatrix::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5);
    let mut v = ComplexMatrix::identity(n);

    let scale: f64 = m
        .data()
        .iter()
        .map(|c| c.norm_sqr())
        .sum::<f64>()
        .max(1e-300);
    for _sweep in 0..80 {
        let off: f64 = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].norm_sqr())
            .sum();
        if off <= scale * 1e-30 {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                jacobi_rotate(&mut m, &mut v, p, q);
            }
        }
    }

    let mut pairs: Vec<(f64, usize)> = (0..n).map(|i| (m[(i, i)].re, i)).collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let values: Vec<f64> = pairs.iter().map(|&(w, _)| w).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, pairs[j].1)]);
    Ok((values, vectors))
}

fn jacobi_rotate(m: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let n = m.rows();
    let apq = m[(p, q)];
    let b = apq.norm();
    let diag_scale = m[(p, p)].re.abs() + m[(q, q)].re.abs();
    if b <= (diag_scale + 1.0) * 1e-300 || b == 0.0 {
        return;
    }
    let phase = apq / b;
    let tau = (m[(q, q)].re - m[(p, p)].re) / (2.0 * b);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        1.0 / (tau - (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // A <- A J with J[p][p]=c, J[p][q]=s*phase, J[q][p]=-s*conj(phase), J[q][q]=c
    for k in 0..n {
        let akp = m[(k, p)];
        let akq = m[(k, q)];
        m[(k, p)] = akp * c - akq * s * phase.conj();
        m[(k, q)] = akp * s * phase + akq * c;
    }
    // A <- J^dagger A
    for k in 0..n {
        let apk = m[(p, k)];
        let aqk = m[(q, k)];
        m[(p, k)] = apk * c - aqk * s * phase;
        m[(q, k)] = apk * s * phase.conj() + aqk * c;
    }
    m[(p, q)] = Complex64::new(0.0, 0.0);
    m[(q, p)] = Complex64::new(0.0, 0.0);
    m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = Complex64::new(m[(q, q)].re, 0.0);
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * s * phase.conj();
        v[(k, q)] = vkp * s * phase + vkq * c;
    }
}

/// Smallest eigenvalue of the Hermitian part, accurate to well below 1e-9.
pub fn min_eigenvalue(a: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigen(a)?.0[0])
}
