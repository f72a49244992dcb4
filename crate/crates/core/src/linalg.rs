//! Dense complex matrix kernel.
//!
//! Everything here works with double precision complex entries and the
//! normalized trace `τ(m) = tr(m) / dim`. The only spectral routine is the
//! Hermitian eigendecomposition; operator norms go through the Hermitian
//! square `m* m`.

use std::ops::{Add, Deref, Mul, Neg, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Default relative cutoff below which eigenvalues count as kernel.
pub const SUPPORT_EPS: f64 = 1e-10;

const EIGEN_MAX_ITER: usize = 10_000;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// `e^{2πi t}`.
#[inline]
pub fn phase(turns: f64) -> C64 {
    Complex::from_polar(1.0, std::f64::consts::TAU * turns)
}

/// Square complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix(DMatrix<C64>);

impl CMatrix {
    /// Wraps a nalgebra matrix, rejecting non-square input.
    pub fn new(inner: DMatrix<C64>) -> Result<Self> {
        if inner.nrows() != inner.ncols() {
            return Err(Error::DimensionMismatch {
                expected: inner.nrows(),
                found: inner.ncols(),
            });
        }
        Ok(CMatrix(inner))
    }

    pub fn zeros(dim: usize) -> Self {
        CMatrix(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        CMatrix(DMatrix::identity(dim, dim))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        CMatrix(DMatrix::from_fn(dim, dim, f))
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        CMatrix(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                diag[i]
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d: Vec<C64> = diag.iter().map(|&x| c64(x, 0.0)).collect();
        Self::from_diagonal(&d)
    }

    /// Row-major construction; every row must have `rows.len()` entries.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        Ok(Self::from_fn(n, |i, j| rows[i][j]))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: C64) {
        self.0[(i, j)] = value;
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.dim()).map(|i| self.0[(i, i)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        CMatrix(self.0.adjoint())
    }

    pub fn scale(&self, s: C64) -> Self {
        CMatrix(&self.0 * s)
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(c64(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// `(1/dim) Σ m_ii`.
    pub fn normalized_trace(&self) -> C64 {
        let d = self.dim();
        if d == 0 {
            return c64(0.0, 0.0);
        }
        self.trace() / d as f64
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.0[(i, j)] == c64(0.0, 0.0)))
    }

    /// Largest singular value.
    pub fn op_norm(&self) -> f64 {
        if self.dim() == 0 {
            return 0.0;
        }
        if self.is_diagonal() {
            return self.diagonal().iter().map(|z| z.norm()).fold(0.0, f64::max);
        }
        let gram = HermitianMatrix::symmetrized(&(&self.adjoint() * self));
        match gram.eigenvalues() {
            Ok(ev) => ev.into_iter().fold(0.0, f64::max).max(0.0).sqrt(),
            // Frobenius norm bounds the operator norm; only reached if the
            // eigensolver gives up.
            Err(_) => self.0.norm(),
        }
    }

    /// `sqrt(τ(m* m))`, the normalized Hilbert-Schmidt norm.
    pub fn hs_norm(&self) -> f64 {
        let d = self.dim();
        if d == 0 {
            return 0.0;
        }
        (self.0.norm_squared() / d as f64).sqrt()
    }

    /// Kronecker product; dimensions multiply.
    pub fn kron(&self, other: &CMatrix) -> CMatrix {
        CMatrix(self.0.kronecker(&other.0))
    }

    /// Block diagonal sum; dimensions add.
    pub fn direct_sum(&self, other: &CMatrix) -> CMatrix {
        let (a, b) = (self.dim(), other.dim());
        let mut out = DMatrix::zeros(a + b, a + b);
        out.view_mut((0, 0), (a, a)).copy_from(&self.0);
        out.view_mut((a, a), (b, b)).copy_from(&other.0);
        CMatrix(out)
    }

    /// `xy - yx`.
    pub fn commutator(&self, other: &CMatrix) -> CMatrix {
        &(self * other) - &(other * self)
    }

    pub fn pow(&self, exp: u32) -> CMatrix {
        let mut acc = CMatrix::identity(self.dim());
        let mut base = self.clone();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: self.dim(),
            });
        }
        Ok(())
    }

    /// `‖self - other‖_∞`.
    pub fn dist(&self, other: &CMatrix) -> f64 {
        (self - other).op_norm()
    }

    /// Largest entry modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl<'a> $tr<&'a CMatrix> for &'a CMatrix {
            type Output = CMatrix;
            fn $method(self, rhs: &'a CMatrix) -> CMatrix {
                CMatrix(&self.0 $op &rhs.0)
            }
        }
        impl $tr<CMatrix> for CMatrix {
            type Output = CMatrix;
            fn $method(self, rhs: CMatrix) -> CMatrix {
                CMatrix(self.0 $op rhs.0)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);

/// Index of the single nonzero in each row, if every row has at most one.
fn row_monomial(m: &DMatrix<C64>) -> Option<Vec<Option<usize>>> {
    let zero = C64::default();
    (0..m.nrows())
        .map(|i| {
            let mut hit = None;
            for j in 0..m.ncols() {
                if m[(i, j)] != zero {
                    if hit.is_some() {
                        return None;
                    }
                    hit = Some(j);
                }
            }
            Some(hit)
        })
        .collect()
}

/// Matrix product with a shortcut for permutation-like and diagonal factors,
/// which make up most products here.
fn product(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    if a.ncols() == b.nrows() && a.nrows() >= 8 {
        if let Some(rows) = row_monomial(a) {
            let mut out = DMatrix::zeros(a.nrows(), b.ncols());
            for (i, j) in rows.into_iter().enumerate() {
                if let Some(j) = j {
                    let c = a[(i, j)];
                    for k in 0..b.ncols() {
                        out[(i, k)] = c * b[(j, k)];
                    }
                }
            }
            return out;
        }
        if let Some(cols) = row_monomial(&b.transpose()) {
            let mut out = DMatrix::zeros(a.nrows(), b.ncols());
            for (k, j) in cols.into_iter().enumerate() {
                if let Some(j) = j {
                    let c = b[(j, k)];
                    for i in 0..a.nrows() {
                        out[(i, k)] = a[(i, j)] * c;
                    }
                }
            }
            return out;
        }
    }
    a * b
}

impl<'a> Mul<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &'a CMatrix) -> CMatrix {
        CMatrix(product(&self.0, &rhs.0))
    }
}

impl Mul<CMatrix> for CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: CMatrix) -> CMatrix {
        CMatrix(product(&self.0, &rhs.0))
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        CMatrix(-&self.0)
    }
}

/// Selfadjoint matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        let residual = m.dist(&m.adjoint());
        if residual > 1e-12 * (1.0 + m.op_norm()) {
            return Err(Error::InvalidMatrix {
                kind: "hermitian",
                residual,
            });
        }
        Ok(HermitianMatrix(m))
    }

    /// `(m + m*)/2`, Hermitian by construction.
    pub fn symmetrized(m: &CMatrix) -> Self {
        HermitianMatrix((m + &m.adjoint()).scale_re(0.5))
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    /// Eigenvalues (ascending) and the matching orthonormal eigenvectors as
    /// columns.
    pub fn eigh(&self) -> Result<(Vec<f64>, CMatrix)> {
        let dim = self.0.dim();
        if dim == 0 {
            return Ok((Vec::new(), CMatrix::zeros(0)));
        }
        let eig = SymmetricEigen::try_new(self.0 .0.clone(), 1e-15, EIGEN_MAX_ITER)
            .ok_or(Error::EigenFailure { dim })?;
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = CMatrix::from_fn(dim, |i, j| eig.eigenvectors[(i, order[j])]);
        Ok((values, vectors))
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.eigh().map(|(v, _)| v)
    }

    /// Spectral projections onto eigenvalues `> eps‖h‖`, `< -eps‖h‖` and the
    /// remaining near-kernel band.
    pub fn spectral_split(&self, eps: f64) -> Result<SpectralSplit> {
        let dim = self.0.dim();
        let (values, vectors) = self.eigh()?;
        let scale = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let cutoff = eps * scale;
        let project = |keep: &dyn Fn(f64) -> bool| {
            let mut p = DMatrix::<C64>::zeros(dim, dim);
            for (k, &lambda) in values.iter().enumerate() {
                if keep(lambda) {
                    let col = vectors.0.column(k);
                    p += col * col.adjoint();
                }
            }
            ProjectionMatrix(CMatrix(p))
        };
        Ok(SpectralSplit {
            positive: project(&|l| l > cutoff && scale > 0.0),
            negative: project(&|l| l < -cutoff && scale > 0.0),
            kernel: project(&|l| scale == 0.0 || l.abs() <= cutoff),
        })
    }
}

impl Deref for HermitianMatrix {
    type Target = CMatrix;
    fn deref(&self) -> &CMatrix {
        &self.0
    }
}

/// Positive, negative and kernel spectral projections of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct SpectralSplit {
    pub positive: ProjectionMatrix,
    pub negative: ProjectionMatrix,
    pub kernel: ProjectionMatrix,
}

/// Projection onto the span of eigenvectors with eigenvalue `> eps·‖h‖_∞`.
pub fn support_pos(h: &HermitianMatrix, eps: f64) -> Result<ProjectionMatrix> {
    check_eps(eps)?;
    Ok(h.spectral_split(eps)?.positive)
}

/// Projection onto the span of eigenvectors with eigenvalue `< -eps·‖h‖_∞`.
pub fn support_neg(h: &HermitianMatrix, eps: f64) -> Result<ProjectionMatrix> {
    check_eps(eps)?;
    Ok(h.spectral_split(eps)?.negative)
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps >= 0.0) {
        return Err(Error::Precondition(format!("eps must be >= 0, got {eps}")));
    }
    Ok(())
}

/// Selfadjoint idempotent.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionMatrix(CMatrix);

impl ProjectionMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        let idem = m.dist(&(&m * &m));
        let sa = m.dist(&m.adjoint());
        let residual = idem.max(sa);
        if residual > 1e-10 {
            return Err(Error::InvalidMatrix {
                kind: "a projection",
                residual,
            });
        }
        Ok(ProjectionMatrix(m))
    }

    pub fn zero(dim: usize) -> Self {
        ProjectionMatrix(CMatrix::zeros(dim))
    }

    pub fn identity(dim: usize) -> Self {
        ProjectionMatrix(CMatrix::identity(dim))
    }

    /// Diagonal 0/1 projection with ones at the given indices.
    pub fn diagonal_indicator(dim: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut d = vec![0.0; dim];
        for i in indices {
            d[i] = 1.0;
        }
        ProjectionMatrix(CMatrix::from_real_diagonal(&d))
    }

    /// Rank-one projection onto the line spanned by `v` (normalized here).
    pub fn rank_one(v: &[C64]) -> Result<Self> {
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::Precondition("zero vector".into()));
        }
        let u: Vec<C64> = v.iter().map(|z| z / norm).collect();
        Ok(ProjectionMatrix(CMatrix::from_fn(v.len(), |i, j| {
            u[i] * u[j].conj()
        })))
    }

    /// `1 - e`.
    pub fn complement(&self) -> Self {
        ProjectionMatrix(&CMatrix::identity(self.dim()) - &self.0)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    /// Normalized trace, which is real for a projection.
    pub fn tau(&self) -> f64 {
        self.0.normalized_trace().re
    }

    /// Orthonormal basis of the range, as columns of a `dim x rank` matrix.
    pub fn range_basis(&self) -> Result<DMatrix<C64>> {
        let (values, vectors) = HermitianMatrix::symmetrized(&self.0).eigh()?;
        let cols: Vec<usize> = (0..values.len()).filter(|&k| values[k] > 0.5).collect();
        let dim = self.dim();
        Ok(DMatrix::from_fn(dim, cols.len(), |i, j| {
            vectors.get(i, cols[j])
        }))
    }
}

impl Deref for ProjectionMatrix {
    type Target = CMatrix;
    fn deref(&self) -> &CMatrix {
        &self.0
    }
}

/// Unitary matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix(CMatrix);

impl UnitaryMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        let residual = (&m.adjoint() * &m).dist(&CMatrix::identity(m.dim()));
        if residual > 1e-10 {
            return Err(Error::InvalidMatrix {
                kind: "unitary",
                residual,
            });
        }
        Ok(UnitaryMatrix(m))
    }

    pub fn identity(dim: usize) -> Self {
        UnitaryMatrix(CMatrix::identity(dim))
    }

    /// Diagonal unitary with entries `e^{2πi t_k}`.
    pub fn diagonal_phases(turns: &[f64]) -> Self {
        let d: Vec<C64> = turns.iter().map(|&t| phase(t)).collect();
        UnitaryMatrix(CMatrix::from_diagonal(&d))
    }

    /// Diagonal unitary from unimodular entries.
    pub fn from_diagonal(diag: &[C64]) -> Result<Self> {
        Self::new(CMatrix::from_diagonal(diag))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        UnitaryMatrix(self.0.adjoint())
    }

    pub fn kron(&self, other: &UnitaryMatrix) -> Self {
        UnitaryMatrix(self.0.kron(&other.0))
    }

    pub fn direct_sum(&self, other: &UnitaryMatrix) -> Self {
        UnitaryMatrix(self.0.direct_sum(&other.0))
    }

    pub fn scale_phase(&self, z: C64) -> Self {
        UnitaryMatrix(self.0.scale(z))
    }

    /// Integer power, negative exponents through the adjoint.
    pub fn powi(&self, exp: i64) -> CMatrix {
        if exp >= 0 {
            self.0.pow(exp as u32)
        } else {
            self.0.adjoint().pow(exp.unsigned_abs() as u32)
        }
    }
}

impl Deref for UnitaryMatrix {
    type Target = CMatrix;
    fn deref(&self) -> &CMatrix {
        &self.0
    }
}
