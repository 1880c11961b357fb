//! Dense complex linear algebra kernel for small Hermitian problems.
//!
//! Everything in this crate lives in dimensions <= 2I+2 (at most 8 for the
//! spins treated here), so the kernel favours exactness and determinism over
//! asymptotic speed: matrix exponentials go through a full Hermitian
//! eigendecomposition (cyclic complex Jacobi), which keeps every propagator
//! unitary to machine precision by construction.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Square dense complex matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Zero matrix of the given dimension.
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    /// Identity matrix.
    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Build from a closure over (row, col).
    pub fn from_fn<F: FnMut(usize, usize) -> Complex64>(dim: usize, mut f: F) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.data[i * dim + j] = f(i, j);
            }
        }
        m
    }

    /// Diagonal matrix from complex entries.
    pub fn diagonal(entries: &[Complex64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m.data[i * m.dim + i] = e;
        }
        m
    }

    /// Diagonal matrix from real entries.
    pub fn diagonal_real(entries: &[f64]) -> Self {
        let complex: Vec<Complex64> = entries.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::diagonal(&complex)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.dim + j] = v;
    }

    /// Raw row-major entries.
    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    /// Matrix product self * other.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matrix product dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    /// Entrywise sum.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (o, &b) in out.data.iter_mut().zip(other.data.iter()) {
            *o += b;
        }
        out
    }

    /// Entrywise difference.
    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (o, &b) in out.data.iter_mut().zip(other.data.iter()) {
            *o -= b;
        }
        out
    }

    /// Scalar multiple.
    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        for o in out.data.iter_mut() {
            *o *= s;
        }
        out
    }

    /// Real scalar multiple.
    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        Self::from_fn(n, |i, j| self.data[j * n + i].conj())
    }

    /// Trace.
    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Frobenius norm.
    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.dim, v.len(), "matrix-vector dimension mismatch");
        let n = self.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..n {
                acc += self.data[i * n + j] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    /// Kronecker product self (x) other.
    pub fn kron(&self, other: &Self) -> Self {
        let (na, nb) = (self.dim, other.dim);
        let n = na * nb;
        let mut out = Self::zeros(n);
        for ia in 0..na {
            for ja in 0..na {
                let a = self.data[ia * na + ja];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for ib in 0..nb {
                    for jb in 0..nb {
                        out.data[(ia * nb + ib) * n + (ja * nb + jb)] =
                            a * other.data[ib * nb + jb];
                    }
                }
            }
        }
        out
    }

    /// Largest deviation from Hermiticity, max_{jk} |A_jk - conj(A_kj)|.
    pub fn hermiticity_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                let d = (self.data[i * n + j] - self.data[j * n + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Copy a square sub-block of the given size starting at (offset, offset).
    pub fn block(&self, offset: usize, size: usize) -> Self {
        assert!(offset + size <= self.dim);
        Self::from_fn(size, |i, j| self.at(offset + i, offset + j))
    }

    /// Overwrite a square sub-block starting at (offset, offset).
    pub fn set_block(&mut self, offset: usize, block: &Self) {
        assert!(offset + block.dim <= self.dim);
        for i in 0..block.dim {
            for j in 0..block.dim {
                self.set(offset + i, offset + j, block.at(i, j));
            }
        }
    }

    /// Multiply by a rectangular matrix on the right.
    pub fn mul_rect(&self, other: &ComplexRect) -> ComplexRect {
        assert_eq!(self.dim, other.rows, "rectangular product dimension mismatch");
        let mut out = ComplexRect::zeros(self.dim, other.cols);
        for i in 0..self.dim {
            for k in 0..self.dim {
                let a = self.data[i * self.dim + k];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.data[k * other.cols + j];
                }
            }
        }
        out
    }
}

/// Rectangular dense complex matrix, row-major; used for subspace embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexRect {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexRect {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1);
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j].conj();
            }
        }
        out
    }

    /// Product of two rectangular matrices.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "rectangular product dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.data[k * other.cols + j];
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        let mut out = self.clone();
        for (o, &b) in out.data.iter_mut().zip(other.data.iter()) {
            *o -= b;
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Reinterpret a square-shaped rectangle as a `ComplexMatrix`.
    pub fn into_square(self) -> ComplexMatrix {
        assert_eq!(self.rows, self.cols, "matrix is not square");
        ComplexMatrix {
            dim: self.rows,
            data: self.data,
        }
    }
}

/// Eigendecomposition of a Hermitian matrix: A = V diag(lambda) V^dagger.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    /// Real eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns.
    pub eigenvectors: ComplexMatrix,
}

/// Relative Hermiticity tolerance for eigensolver inputs.
const HERMITICITY_TOL: f64 = 1e-10;
/// Off-diagonal convergence threshold, relative to the Frobenius norm.
const JACOBI_THRESHOLD: f64 = 1e-13;
/// Sweep cap for the cyclic Jacobi iteration.
const JACOBI_MAX_SWEEPS: usize = 100;

fn offdiag_norm(a: &ComplexMatrix) -> f64 {
    let n = a.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a.at(i, j).norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// Deterministic for identical input; eigenvalues are returned ascending with
/// eigenvector columns permuted to match. Degenerate eigenvalues yield an
/// arbitrary orthonormal basis of the eigenspace, which is fine for every
/// consumer here (only V f(diag) V^dagger is ever formed).
pub fn hermitian_eig(a: &ComplexMatrix) -> Result<EigenDecomposition> {
    let n = a.dim();
    let scale = a.max_abs().max(1.0);
    let herm_res = a.hermiticity_residual();
    if herm_res > HERMITICITY_TOL * scale {
        return Err(Error::NotHermitian {
            residual: herm_res,
            tol: HERMITICITY_TOL * scale,
        });
    }

    // Work on an exactly Hermitian copy so rotation arithmetic cannot feed
    // asymmetry back into the iteration.
    let mut m = ComplexMatrix::from_fn(n, |i, j| {
        if i == j {
            Complex64::new(a.at(i, i).re, 0.0)
        } else {
            (a.at(i, j) + a.at(j, i).conj()) * 0.5
        }
    });
    let mut v = ComplexMatrix::identity(n);

    let fro = m.frobenius().max(f64::MIN_POSITIVE);
    let threshold = JACOBI_THRESHOLD * fro;

    let mut converged = offdiag_norm(&m) <= threshold;
    let mut sweeps = 0;
    while !converged {
        if sweeps >= JACOBI_MAX_SWEEPS {
            return Err(Error::EigenNoConvergence {
                sweeps,
                offdiag: offdiag_norm(&m),
            });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.at(p, q);
                let r = apq.norm();
                if r <= threshold / (n as f64) {
                    continue;
                }
                // Phase that makes the (p,q) entry real, then a real Jacobi
                // rotation that annihilates it.
                let phase = apq / r; // e^{i theta}
                let tau = (m.at(q, q).re - m.at(p, p).re) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // Column rotation G: col_p' = c col_p - s conj(phase) col_q,
                //                    col_q' = s col_p + c conj(phase) col_q.
                let gpp = Complex64::new(c, 0.0);
                let gpq = Complex64::new(s, 0.0);
                let gqp = -s * phase.conj();
                let gqq = c * phase.conj();

                // m <- G^dagger m G  (columns, then rows).
                for i in 0..n {
                    let mip = m.at(i, p);
                    let miq = m.at(i, q);
                    m.set(i, p, mip * gpp + miq * gqp);
                    m.set(i, q, mip * gpq + miq * gqq);
                }
                for j in 0..n {
                    let mpj = m.at(p, j);
                    let mqj = m.at(q, j);
                    m.set(p, j, gpp.conj() * mpj + gqp.conj() * mqj);
                    m.set(q, j, gpq.conj() * mpj + gqq.conj() * mqj);
                }
                // Clean the annihilated pair and enforce real diagonal.
                m.set(p, q, Complex64::new(0.0, 0.0));
                m.set(q, p, Complex64::new(0.0, 0.0));
                m.set(p, p, Complex64::new(m.at(p, p).re, 0.0));
                m.set(q, q, Complex64::new(m.at(q, q).re, 0.0));

                // v <- v G.
                for i in 0..n {
                    let vip = v.at(i, p);
                    let viq = v.at(i, q);
                    v.set(i, p, vip * gpp + viq * gqp);
                    v.set(i, q, vip * gpq + viq * gqq);
                }
            }
        }
        sweeps += 1;
        converged = offdiag_norm(&m) <= threshold;
    }

    // Sort ascending, permuting eigenvector columns along.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        m.at(i, i)
            .re
            .partial_cmp(&m.at(j, j).re)
            .expect("eigenvalues are finite")
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&i| m.at(i, i).re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, |i, j| v.at(i, order[j]));

    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Unitary exponential U = exp(-i H t) for Hermitian H, via eigendecomposition.
pub fn expm_unitary(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(h)?;
    Ok(apply_phase_function(&eig, t))
}

/// Rebuild exp(-i H t) from a precomputed eigendecomposition of H.
pub fn apply_phase_function(eig: &EigenDecomposition, t: f64) -> ComplexMatrix {
    let n = eig.eigenvectors.dim();
    let v = &eig.eigenvectors;
    let phases: Vec<Complex64> = eig
        .eigenvalues
        .iter()
        .map(|&l| Complex64::from_polar(1.0, -l * t))
        .collect();
    // V diag(phases) V^dagger without forming the diagonal matrix.
    let mut out = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                acc += v.at(i, k) * phases[k] * v.at(j, k).conj();
            }
            out.set(i, j, acc);
        }
    }
    out
}

/// Block-diagonal direct sum of square matrices, in caller order.
pub fn direct_sum(blocks: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    if blocks.is_empty() {
        return Err(Error::InvalidParameter(
            "direct_sum needs at least one block".into(),
        ));
    }
    let dim: usize = blocks.iter().map(|b| b.dim()).sum();
    let mut out = ComplexMatrix::zeros(dim);
    let mut offset = 0;
    for b in blocks {
        out.set_block(offset, b);
        offset += b.dim();
    }
    Ok(out)
}

/// Deviation from unitarity, max-norm of U^dagger U - 1.
pub fn unitarity_residual(u: &ComplexMatrix) -> f64 {
    let g = u.adjoint().mul(u);
    g.sub(&ComplexMatrix::identity(u.dim())).max_abs()
}

/// Nearest unitary to an almost-unitary matrix (polar factor), computed from
/// the Hermitian eigendecomposition of U^dagger U.
pub fn polar_unitary(u: &ComplexMatrix) -> Result<ComplexMatrix> {
    let g = u.adjoint().mul(u);
    let eig = hermitian_eig(&g)?;
    for &l in &eig.eigenvalues {
        if l <= 1e-14 {
            return Err(Error::Numerical(format!(
                "polar projection of a rank-deficient matrix (Gram eigenvalue {l:.3e})"
            )));
        }
    }
    let n = u.dim();
    let v = &eig.eigenvectors;
    // G^{-1/2} = V diag(lambda^{-1/2}) V^dagger.
    let mut ginvsqrt = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                acc += v.at(i, k) * v.at(j, k).conj() / eig.eigenvalues[k].sqrt();
            }
            ginvsqrt.set(i, j, acc);
        }
    }
    Ok(u.mul(&ginvsqrt))
}
