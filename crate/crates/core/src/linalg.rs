//! Dense complex matrices for the small (dimension ≤ 16) operators of the
//! scattering problem: Kronecker products, partial traces and a cyclic Jacobi
//! eigensolver for Hermitian matrices.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest dimension accepted by [`herm_eig`].
pub const MAX_DIM: usize = 16;

const HERMITIAN_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries, rejecting a wrong entry count
    /// and non-finite values.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("matrix entry".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(rows, cols, data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        m
    }

    /// Outer product |a⟩⟨b|.
    pub fn outer(a: &[Complex64], b: &[Complex64]) -> Self {
        let mut m = Self::zeros(a.len(), b.len());
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                m[(i, j)] = x * y.conj();
            }
        }
        m
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

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - self†`.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0_f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn hermitian_part(&self) -> Self {
        (self + &self.adjoint()).scale_re(0.5)
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// `self · x · self†`.
    pub fn conjugate(&self, x: &Self) -> Self {
        &(self * x) * &self.adjoint()
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Pauli matrices σ^x, σ^y, σ^z in the basis {|0⟩, |1⟩}, |0⟩ the +1 eigenvector of σ^z.
pub fn pauli() -> [CMatrix; 3] {
    let sx = CMatrix::from_vec(2, 2, vec![ZERO, ONE, ONE, ZERO]).unwrap();
    let sy = CMatrix::from_vec(2, 2, vec![ZERO, -I, I, ZERO]).unwrap();
    let sz = CMatrix::from_vec(2, 2, vec![ONE, ZERO, ZERO, -ONE]).unwrap();
    [sx, sy, sz]
}

/// Kronecker product, left factor major: `(a ⊗ b)[(i·rb + k, j·cb + l)] = a[i,j]·b[k,l]`.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(a.rows * b.rows, a.cols * b.cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let x = a[(i, j)];
            if x == ZERO {
                continue;
            }
            for k in 0..b.rows {
                for l in 0..b.cols {
                    out[(i * b.rows + k, j * b.cols + l)] = x * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Traces out every subsystem not listed in `keep`. `dims` lists subsystem
/// dimensions in tensor order; `keep` holds subsystem indices.
pub fn partial_trace(m: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    let total: usize = dims.iter().product();
    if !m.is_square() || dims.is_empty() || dims.contains(&0) || total != m.rows {
        return Err(Error::DimensionMismatch(format!(
            "subsystem dims {dims:?} for a {}x{} matrix",
            m.rows, m.cols
        )));
    }
    if let Some(&bad) = keep.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::DimensionMismatch(format!(
            "subsystem index {bad} out of range for {} subsystems",
            dims.len()
        )));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !kept.contains(i)).collect();

    let kept_dims: Vec<usize> = kept.iter().map(|&i| dims[i]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&i| dims[i]).collect();
    let out_dim: usize = kept_dims.iter().product();
    let env_dim: usize = traced_dims.iter().product();

    // Strides of each subsystem in the full index.
    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let compose = |sub: &[usize], which: &[usize], idx: usize| -> usize {
        let mut rest = idx;
        let mut full = 0;
        for (pos, &s) in which.iter().enumerate().rev() {
            let d = sub[pos];
            full += (rest % d) * strides[s];
            rest /= d;
        }
        full
    };

    let mut out = CMatrix::zeros(out_dim, out_dim);
    for e in 0..env_dim {
        let env_off = compose(&traced_dims, &traced, e);
        for r in 0..out_dim {
            let row = compose(&kept_dims, &kept, r) + env_off;
            for c in 0..out_dim {
                let col = compose(&kept_dims, &kept, c) + env_off;
                out[(r, c)] += m[(row, col)];
            }
        }
    }
    Ok(out)
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct EigDecomposition {
    /// Sorted in descending order.
    pub eigenvalues: Vec<f64>,
    /// Column `n` is the eigenvector of `eigenvalues[n]`.
    pub eigenvectors: CMatrix,
}

impl EigDecomposition {
    /// Rebuilds `V Λ V†`.
    pub fn reconstruct(&self) -> CMatrix {
        let lambda = CMatrix::diag(&self.eigenvalues);
        self.eigenvectors.conjugate(&lambda)
    }
}

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
///
/// The input is symmetrized after a Hermiticity check at 1e-12 (scaled by the
/// largest entry when that exceeds one).
pub fn herm_eig(m: &CMatrix) -> Result<EigDecomposition> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition of a {}x{} matrix",
            m.rows, m.cols
        )));
    }
    let n = m.rows;
    if n > MAX_DIM {
        return Err(Error::DimensionMismatch(format!(
            "dimension {n} exceeds {MAX_DIM}"
        )));
    }
    let scale = m.max_abs();
    let defect = m.hermiticity_defect();
    if defect > HERMITIAN_TOL * scale.max(1.0) {
        return Err(Error::NotHermitian(defect));
    }

    let mut a = m.hermitian_part();
    for i in 0..n {
        a[(i, i)] = Complex64::new(a[(i, i)].re, 0.0);
    }
    let mut v = CMatrix::identity(n);

    let off_norm = |a: &CMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += a[(i, j)].norm_sqr();
            }
        }
        s.sqrt()
    };
    let target = f64::EPSILON * a.frobenius_norm().max(f64::MIN_POSITIVE);

    let mut converged = n == 1;
    for _ in 0..MAX_SWEEPS {
        if off_norm(&a) <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= f64::MIN_POSITIVE {
                    continue;
                }
                let phase = apq / mag;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // J = diag-phase · real rotation, acting on columns p, q.
                let jpp = Complex64::new(c, 0.0);
                let jpq = Complex64::new(s, 0.0);
                let jqp = -phase.conj() * s;
                let jqq = phase.conj() * c;

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * jpp + akq * jqp;
                    a[(k, q)] = akp * jpq + akq * jqq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
                    a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * jpp + vkq * jqp;
                    v[(k, q)] = vkp * jpq + vkq * jqq;
                }
            }
        }
    }
    if !converged && off_norm(&a) > target * 1e3 {
        return Err(Error::NoConvergence(format!(
            "Jacobi eigensolver after {MAX_SWEEPS} sweeps"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut eigenvectors = CMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        for k in 0..n {
            eigenvectors[(k, col)] = v[(k, src)];
        }
    }
    Ok(EigDecomposition {
        eigenvalues,
        eigenvectors,
    })
}
