//! Dense complex linear algebra for small Hilbert spaces.
//!
//! Vectors and operators are thin newtypes over `nalgebra` storage. Complex
//! numbers serialize as `[re, im]` pairs, vectors as arrays of pairs and
//! matrices as arrays of rows.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance;

type Pair = [f64; 2];

fn to_pair(z: Complex64) -> Pair {
    [z.re, z.im]
}

fn from_pair(p: Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

/// A finite-dimensional complex vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Pair>", into = "Vec<Pair>")]
pub struct ComplexVector(DVector<Complex64>);

impl ComplexVector {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Empty);
        }
        Ok(Self(DVector::from_vec(entries)))
    }

    pub fn from_real(entries: &[f64]) -> Result<Self> {
        Self::new(entries.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// The `index`-th canonical basis vector of `dim`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut v = DVector::zeros(dim);
        v[index] = Complex64::new(1.0, 0.0);
        Ok(Self(v))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[Complex64] {
        self.0.as_slice()
    }

    pub fn as_dvector(&self) -> &DVector<Complex64> {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// Deviation of `<psi,psi>` from one.
    pub fn unit_deviation(&self) -> f64 {
        (self.0.norm_squared() - 1.0).abs()
    }

    pub fn is_unit(&self) -> bool {
        self.unit_deviation() <= tolerance::UNIT_NORM
    }

    pub fn ensure_unit(&self) -> Result<()> {
        self.ensure_unit_within(tolerance::UNIT_NORM)
    }

    pub fn ensure_unit_within(&self, tol: f64) -> Result<()> {
        let deviation = self.unit_deviation();
        if deviation <= tol {
            Ok(())
        } else {
            Err(Error::NotUnit { deviation })
        }
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidArgument("cannot normalize a zero vector".into()));
        }
        Ok(Self(self.0.unscale(n)))
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self(&self.0 * factor)
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self(&self.0 * a + &other.0 * b))
    }

    /// Pads with zeros up to `dim`.
    pub fn embed(&self, dim: usize) -> Result<Self> {
        if dim < self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: dim });
        }
        let mut v = DVector::zeros(dim);
        v.rows_mut(0, self.dim()).copy_from(&self.0);
        Ok(Self(v))
    }
}

impl TryFrom<Vec<Pair>> for ComplexVector {
    type Error = Error;

    fn try_from(value: Vec<Pair>) -> Result<Self> {
        Self::new(value.into_iter().map(from_pair).collect())
    }
}

impl From<ComplexVector> for Vec<Pair> {
    fn from(v: ComplexVector) -> Self {
        v.0.iter().copied().map(to_pair).collect()
    }
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Sesquilinear inner product, conjugate-linear in `u`.
pub fn inner(u: &ComplexVector, v: &ComplexVector) -> Result<Complex64> {
    check_dims(u.dim(), v.dim())?;
    Ok(u.0.dotc(&v.0))
}

/// A self-adjoint operator on `C^dim`.
///
/// The stored matrix is exactly Hermitian: inputs within tolerance of
/// Hermitian symmetry are projected onto `(M + M^dagger) / 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<Pair>>", into = "Vec<Vec<Pair>>")]
pub struct HermitianOperator(DMatrix<Complex64>);

impl HermitianOperator {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        Self::with_tolerance(matrix, tolerance::HERMITIAN)
    }

    pub fn with_tolerance(matrix: DMatrix<Complex64>, tol: f64) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        if rows == 0 {
            return Err(Error::Empty);
        }
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        let scale = matrix.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let mut deviation = 0.0_f64;
        for i in 0..rows {
            for j in i..rows {
                deviation = deviation.max((matrix[(i, j)] - matrix[(j, i)].conj()).norm());
            }
        }
        if deviation > tol * scale || deviation.is_nan() {
            return Err(Error::NotHermitian { deviation });
        }
        let adjoint = matrix.adjoint();
        Ok(Self((matrix + adjoint).unscale(2.0)))
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        Self::from_rows_with_tolerance(rows, tolerance::HERMITIAN)
    }

    pub fn from_rows_with_tolerance(rows: Vec<Vec<Complex64>>, tol: f64) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::NotSquare { rows: n, cols: bad.len() });
        }
        Self::with_tolerance(DMatrix::from_fn(n, n, |i, j| rows[i][j]), tol)
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
                .collect(),
        )
    }

    pub fn diag(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty);
        }
        let d = DVector::from_iterator(values.len(), values.iter().map(|&x| Complex64::new(x, 0.0)));
        Ok(Self(DMatrix::from_diagonal(&d)))
    }

    pub fn identity(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Empty);
        }
        Ok(Self(DMatrix::identity(dim, dim)))
    }

    /// Rank-one projector `psi <psi, . >`.
    pub fn projector(psi: &ComplexVector) -> Self {
        Self(&psi.0 * psi.0.adjoint())
    }

    pub(crate) fn from_hermitian_unchecked(matrix: DMatrix<Complex64>) -> Self {
        Self(matrix)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn apply(&self, psi: &ComplexVector) -> Result<ComplexVector> {
        check_dims(self.dim(), psi.dim())?;
        Ok(ComplexVector(&self.0 * &psi.0))
    }

    pub fn square(&self) -> Self {
        let sq = &self.0 * &self.0;
        let adj = sq.adjoint();
        Self((sq + adj).unscale(2.0))
    }

    /// `scale * self + shift * identity`.
    pub fn scale_shift(&self, scale: f64, shift: f64) -> Self {
        let n = self.dim();
        Self(&self.0 * Complex64::new(scale, 0.0) + DMatrix::identity(n, n) * Complex64::new(shift, 0.0))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self(&self.0 + &other.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self(&self.0 - &other.0))
    }

    /// Block-diagonal embedding `self ⊕ 0` into `dim` dimensions.
    pub fn embed(&self, dim: usize) -> Result<Self> {
        if dim < self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: dim });
        }
        let mut m = DMatrix::zeros(dim, dim);
        m.view_mut((0, 0), (self.dim(), self.dim())).copy_from(&self.0);
        Ok(Self(m))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// Largest entrywise deviation from `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

impl TryFrom<Vec<Vec<Pair>>> for HermitianOperator {
    type Error = Error;

    fn try_from(rows: Vec<Vec<Pair>>) -> Result<Self> {
        Self::from_rows(rows.into_iter().map(|r| r.into_iter().map(from_pair).collect()).collect())
    }
}

impl From<HermitianOperator> for Vec<Vec<Pair>> {
    fn from(a: HermitianOperator) -> Self {
        a.0.row_iter().map(|r| r.iter().copied().map(to_pair).collect()).collect()
    }
}

/// `<psi, A psi>` as a real number.
pub fn expectation(a: &HermitianOperator, psi: &ComplexVector) -> Result<f64> {
    Ok(moments(a, psi)?.0)
}

/// Standard deviation of `A` in the pure state `psi`.
///
/// Computed as the norm of `A psi - <A> psi`, which avoids the cancellation
/// in `<A^2> - <A>^2`. The radicand is still formed and checked so that a
/// corrupted input is reported rather than silently clamped.
pub fn uncertainty(a: &HermitianOperator, psi: &ComplexVector) -> Result<f64> {
    Ok(moments(a, psi)?.1)
}

/// Mean and standard deviation of `A` in `psi`.
pub(crate) fn moments(a: &HermitianOperator, psi: &ComplexVector) -> Result<(f64, f64)> {
    check_dims(a.dim(), psi.dim())?;
    psi.ensure_unit()?;
    let a_psi = &a.0 * &psi.0;
    let value = psi.0.dotc(&a_psi);
    let scale = a_psi.norm().max(1.0);
    if value.im.abs() > tolerance::CONSTRUCTOR * scale {
        return Err(Error::InvariantViolation(format!(
            "expectation has imaginary part {:e}",
            value.im
        )));
    }
    let mean = value.re;
    let radicand = a_psi.norm_squared() - mean * mean;
    if radicand < -tolerance::RADICAND * scale * scale {
        return Err(Error::InvariantViolation(format!("negative variance radicand {radicand:e}")));
    }
    let deviation = a_psi - &psi.0 * Complex64::new(mean, 0.0);
    Ok((mean, deviation.norm()))
}

/// Spectral decomposition with merged eigenspaces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralDecomposition {
    /// Distinct eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    pub projectors: Vec<HermitianOperator>,
    pub multiplicities: Vec<usize>,
}

impl SpectralDecomposition {
    pub fn reconstruct(&self) -> HermitianOperator {
        let n = self.projectors[0].dim();
        let mut m = DMatrix::zeros(n, n);
        for (&lambda, p) in self.eigenvalues.iter().zip(&self.projectors) {
            m += &p.0 * Complex64::new(lambda, 0.0);
        }
        HermitianOperator(m)
    }

    /// Weight `<psi, P_k psi>` of each eigenspace.
    pub fn weights(&self, psi: &ComplexVector) -> Result<Vec<f64>> {
        self.projectors
            .iter()
            .map(|p| Ok(inner(psi, &p.apply(psi)?)?.re))
            .collect()
    }

    /// Index of the eigenvalue within `tol` of `value`, if any.
    pub fn find(&self, value: f64, tol: f64) -> Option<usize> {
        self.eigenvalues.iter().position(|&e| (e - value).abs() <= tol)
    }
}

pub fn eigendecompose(a: &HermitianOperator) -> SpectralDecomposition {
    eigendecompose_with(a, tolerance::EIGEN_MERGE)
}

/// Eigendecomposition merging eigenvalues within `merge_tol * ||A||_F`.
pub fn eigendecompose_with(a: &HermitianOperator, merge_tol: f64) -> SpectralDecomposition {
    let n = a.dim();
    let eig = SymmetricEigen::new(a.0.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

    let threshold = merge_tol * a.frobenius_norm();
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &idx in &order {
        match clusters.last_mut() {
            Some(cluster)
                if eig.eigenvalues[idx] - eig.eigenvalues[*cluster.last().unwrap()] <= threshold =>
            {
                cluster.push(idx)
            }
            _ => clusters.push(vec![idx]),
        }
    }

    let mut eigenvalues = Vec::with_capacity(clusters.len());
    let mut projectors = Vec::with_capacity(clusters.len());
    let mut multiplicities = Vec::with_capacity(clusters.len());
    for cluster in clusters {
        let mean = cluster.iter().map(|&i| eig.eigenvalues[i]).sum::<f64>() / cluster.len() as f64;
        let mut p = DMatrix::zeros(n, n);
        for &i in &cluster {
            let u = eig.eigenvectors.column(i);
            p += u * u.adjoint();
        }
        let adj = p.adjoint();
        eigenvalues.push(mean);
        projectors.push(HermitianOperator((p + adj).unscale(2.0)));
        multiplicities.push(cluster.len());
    }
    SpectralDecomposition { eigenvalues, projectors, multiplicities }
}

/// Angle `arccos |<v,w>|` between the rays of two unit vectors.
pub fn angle_between(v: &ComplexVector, w: &ComplexVector) -> Result<f64> {
    v.ensure_unit()?;
    w.ensure_unit()?;
    Ok(inner(v, w)?.norm().clamp(0.0, 1.0).acos())
}

/// Two unit vectors with real non-negative overlap `<v,w> = cos(theta)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatePair {
    v: ComplexVector,
    w: ComplexVector,
    theta: f64,
    orthogonal: bool,
}

impl StatePair {
    pub fn v(&self) -> &ComplexVector {
        &self.v
    }

    pub fn w(&self) -> &ComplexVector {
        &self.w
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn is_orthogonal(&self) -> bool {
        self.orthogonal
    }

    pub fn dim(&self) -> usize {
        self.v.dim()
    }

    /// `<v,w>` after phase alignment.
    pub fn overlap(&self) -> f64 {
        self.v.0.dotc(&self.w.0).re
    }

    /// `rho_1 = v <v, . >`.
    pub fn rho_v(&self) -> HermitianOperator {
        HermitianOperator::projector(&self.v)
    }

    /// `rho_2 = w <w, . >`.
    pub fn rho_w(&self) -> HermitianOperator {
        HermitianOperator::projector(&self.w)
    }

    /// Canonical real pair `v = e_0`, `w = cos(theta) e_0 + sin(theta) e_1` in `dim` dimensions.
    pub fn from_angle(theta: f64, dim: usize) -> Result<Self> {
        if !(theta > 0.0 && theta <= FRAC_PI_2) {
            return Err(Error::InvalidArgument(format!("theta = {theta} outside (0, pi/2]")));
        }
        if dim < 2 {
            return Err(Error::InvalidArgument("state pair needs dimension >= 2".into()));
        }
        let mut w = vec![0.0; dim];
        w[0] = theta.cos();
        w[1] = theta.sin();
        let mut v = vec![0.0; dim];
        v[0] = 1.0;
        make_state_pair(ComplexVector::from_real(&v)?, ComplexVector::from_real(&w)?)
    }

    pub fn embed(&self, dim: usize) -> Result<Self> {
        Ok(Self {
            v: self.v.embed(dim)?,
            w: self.w.embed(dim)?,
            theta: self.theta,
            orthogonal: self.orthogonal,
        })
    }
}

/// Builds a [`StatePair`], rotating the phase of `w` so that `<v,w>` is real and non-negative.
pub fn make_state_pair(v: ComplexVector, w: ComplexVector) -> Result<StatePair> {
    check_dims(v.dim(), w.dim())?;
    v.ensure_unit()?;
    w.ensure_unit()?;
    let overlap = inner(&v, &w)?;
    let modulus = overlap.norm();
    if modulus >= 1.0 - tolerance::CONSTRUCTOR {
        return Err(Error::ParallelStates);
    }
    if modulus <= tolerance::CONSTRUCTOR {
        return Ok(StatePair { v, w, theta: FRAC_PI_2, orthogonal: true });
    }
    let phase = overlap.conj() / modulus;
    let w = w.scaled(phase);
    let theta = modulus.min(1.0).acos();
    Ok(StatePair { v, w, theta, orthogonal: false })
}
