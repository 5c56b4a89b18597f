//! Dense complex linear algebra.
//!
//! All spectra and singular values come back in ascending order so that
//! "the n smallest" is always a prefix.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::linalg::SymmetricEigen;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::tolerance::Tolerances;
use crate::C64;

/// Dense complex matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix({}x{}) {:?}", self.rows(), self.cols(), self.0.as_slice())
    }
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting non-finite values.
    pub fn from_row_major(rows: usize, cols: usize, entries: &[C64]) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("matrix dimensions must be positive"));
        }
        if entries.len() != rows * cols {
            return Err(Error::invalid(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                entries.len()
            )));
        }
        let m = ComplexMatrix(DMatrix::from_row_slice(rows, cols, entries));
        m.ensure_finite()?;
        Ok(m)
    }

    /// Wraps an nalgebra matrix after checking finiteness.
    pub fn from_dmatrix(m: DMatrix<C64>) -> Result<Self> {
        let m = ComplexMatrix(m);
        m.ensure_finite()?;
        Ok(m)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix(DMatrix::zeros(rows, cols))
    }

    pub fn identity(dim: usize) -> Self {
        ComplexMatrix(DMatrix::identity(dim, dim))
    }

    /// Square diagonal matrix with real diagonal entries.
    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = DVector::from_iterator(diag.len(), diag.iter().map(|&x| C64::new(x, 0.0)));
        ComplexMatrix(DMatrix::from_diagonal(&d))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        ComplexMatrix(DMatrix::from_fn(rows, cols, f))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<C64> {
        self.0
    }

    /// Entries in row-major order.
    pub fn to_row_major(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    fn ensure_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::invalid("matrix contains non-finite entries"))
        }
    }

    pub fn adjoint(&self) -> Self {
        ComplexMatrix(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        ComplexMatrix(self.0.transpose())
    }

    pub fn conjugate(&self) -> Self {
        ComplexMatrix(self.0.map(|z| z.conj()))
    }

    pub fn scale(&self, factor: f64) -> Self {
        ComplexMatrix(self.0.map(|z| z * factor))
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest singular value. Works for any shape.
    pub fn spectral_norm(&self) -> f64 {
        match svd(self) {
            Ok(d) => d.singular_values.last().copied().unwrap_or(0.0),
            Err(_) => f64::NAN,
        }
    }

    /// Hermitian part `(m + m^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        ComplexMatrix((&self.0 + self.0.adjoint()) * C64::new(0.5, 0.0))
    }

    /// Operator norm of `m - m^dagger`. Non-square matrices report infinity.
    pub fn hermiticity_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let diff = ComplexMatrix(&self.0 - self.0.adjoint());
        let fro = diff.frobenius_norm();
        // Frobenius bounds the operator norm from above; only refine when it matters.
        if fro <= Tolerances::DEFAULT.hermitian {
            fro
        } else {
            diff.spectral_norm()
        }
    }

    /// Multiplies a column vector.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols(), "vector length must match column count");
        let x = DVector::from_column_slice(v);
        (&self.0 * x).iter().copied().collect()
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols(), rhs.rows(), "matrix product dimension mismatch");
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

/// Thin singular value decomposition `m = U diag(s) V^dagger` with `s` ascending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let s = ComplexMatrix::from_real_diagonal(&self.singular_values);
        &(&self.u * &s) * &self.v.adjoint()
    }
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianSpectrum {
    pub eigenvalues: Vec<f64>,
    /// Columns are the eigenvectors, in the order of `eigenvalues`.
    pub eigenvectors: ComplexMatrix,
}

impl HermitianSpectrum {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let e = ComplexMatrix::from_real_diagonal(&self.eigenvalues);
        &(&self.eigenvectors * &e) * &self.eigenvectors.adjoint()
    }
}

/// Permutation that sorts `values` ascending; ties keep their original order.
fn ascending_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    idx
}

fn select_columns(m: &DMatrix<C64>, order: &[usize]) -> DMatrix<C64> {
    DMatrix::from_fn(m.nrows(), order.len(), |i, j| m[(i, order[j])])
}

pub fn svd(m: &ComplexMatrix) -> Result<Svd> {
    if !m.is_finite() {
        return Err(Error::invalid("svd input contains non-finite entries"));
    }
    let (r, c) = (m.rows(), m.cols());
    let fm = faer::Mat::<faer::c64>::from_fn(r, c, |i, j| {
        let z = m.0[(i, j)];
        faer::c64::new(z.re, z.im)
    });
    let dec = fm.thin_svd().map_err(|e| Error::Numerical(format!("svd did not converge: {e:?}")))?;
    let k = r.min(c);
    let s: Vec<f64> = (0..k).map(|i| dec.S()[i].re).collect();
    let back = |x: &faer::c64| C64::new(x.re, x.im);
    let u = DMatrix::from_fn(r, k, |i, j| back(&dec.U()[(i, j)]));
    let v = DMatrix::from_fn(c, k, |i, j| back(&dec.V()[(i, j)]));
    let order = ascending_order(&s);
    Ok(Svd {
        u: ComplexMatrix(select_columns(&u, &order)),
        singular_values: order.iter().map(|&i| s[i].max(0.0)).collect(),
        v: ComplexMatrix(select_columns(&v, &order)),
    })
}

fn tolerance_scale(m: &ComplexMatrix) -> f64 {
    m.frobenius_norm().max(1.0)
}

fn ensure_hermitian(m: &ComplexMatrix, what: &str) -> Result<()> {
    if !m.is_square() {
        return Err(Error::invalid(format!(
            "{what}: expected a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if !m.is_finite() {
        return Err(Error::invalid(format!("{what}: non-finite entries")));
    }
    let residual = m.hermiticity_residual();
    if residual > Tolerances::DEFAULT.hermitian * tolerance_scale(m) {
        return Err(Error::invalid(format!(
            "{what}: matrix is not Hermitian (||m - m^dagger|| = {residual:e})"
        )));
    }
    Ok(())
}

/// Eigen-decomposition of a Hermitian matrix. The input is symmetrized
/// before solving.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<HermitianSpectrum> {
    ensure_hermitian(m, "hermitian_eig")?;
    let sym = m.hermitian_part();
    let dec = SymmetricEigen::try_new(sym.0, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("eigensolver did not converge".into()))?;
    let values: Vec<f64> = dec.eigenvalues.iter().copied().collect();
    let order = ascending_order(&values);
    Ok(HermitianSpectrum {
        eigenvalues: order.iter().map(|&i| values[i]).collect(),
        eigenvectors: ComplexMatrix(select_columns(&dec.eigenvectors, &order)),
    })
}

fn psd_spectrum(m: &ComplexMatrix, what: &str) -> Result<Vec<f64>> {
    let spec = hermitian_eig(m)?;
    let floor = -Tolerances::DEFAULT.psd * tolerance_scale(m);
    if let Some(&min) = spec.eigenvalues.first() {
        if min < floor {
            return Err(Error::invalid(format!(
                "{what}: matrix is not positive semidefinite (min eigenvalue {min:e})"
            )));
        }
    }
    Ok(spec.eigenvalues)
}

/// Sum of the `n` smallest eigenvalues of a PSD matrix.
pub fn chi_n(m: &ComplexMatrix, n: usize) -> Result<f64> {
    if n == 0 || n > m.rows() {
        return Err(Error::invalid(format!(
            "chi_n: n = {n} outside 1..={}",
            m.rows()
        )));
    }
    let eig = psd_spectrum(m, "chi_n")?;
    Ok(eig[..n].iter().sum())
}

/// All partial sums `chi_1, ..., chi_dim` from one eigen-decomposition.
pub fn chi_all(m: &ComplexMatrix) -> Result<Vec<f64>> {
    let eig = psd_spectrum(m, "chi_all")?;
    Ok(eig
        .iter()
        .scan(0.0, |acc, &x| {
            *acc += x;
            Some(*acc)
        })
        .collect())
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(a.0.kronecker(&b.0))
}

/// Which tensor factor a partial trace removes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

/// Traces out `side` from an operator on `H_A (x) H_B`, basis index `i * d_b + j`.
pub fn partial_trace(rho: &ComplexMatrix, dims: (usize, usize), side: Side) -> Result<ComplexMatrix> {
    let (da, db) = dims;
    let n = da * db;
    if da == 0 || db == 0 || rho.rows() != n || rho.cols() != n {
        return Err(Error::invalid(format!(
            "partial_trace: operator is {}x{}, dims ({da}, {db}) need {n}x{n}",
            rho.rows(),
            rho.cols()
        )));
    }
    ensure_hermitian(rho, "partial_trace")?;
    let r = &rho.0;
    let out = match side {
        Side::A => DMatrix::from_fn(db, db, |j, jp| (0..da).map(|i| r[(i * db + j, i * db + jp)]).sum()),
        Side::B => DMatrix::from_fn(da, da, |i, ip| (0..db).map(|j| r[(i * db + j, ip * db + j)]).sum()),
    };
    Ok(ComplexMatrix(out))
}

/// Largest eigenvalue of a PSD matrix, which for such matrices is the
/// operator norm.
pub fn operator_norm(m: &ComplexMatrix) -> Result<f64> {
    let eig = psd_spectrum(m, "operator_norm")?;
    Ok(eig.last().copied().unwrap_or(0.0).max(0.0))
}

/// Orthogonal projector onto the complement of the column space of `m`.
///
/// Singular values at or below `tol * s_max` are treated as zero.
pub fn complement_projector(m: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    let dim = m.rows();
    let dec = svd(m)?;
    let s_max = dec.singular_values.last().copied().unwrap_or(0.0);
    let threshold = tol * s_max;
    let mut projector = DMatrix::<C64>::identity(dim, dim);
    if s_max == 0.0 {
        return Ok(ComplexMatrix(projector));
    }
    for (k, &s) in dec.singular_values.iter().enumerate() {
        if s > threshold {
            let u = dec.u.0.column(k);
            projector -= u * u.adjoint();
        }
    }
    Ok(ComplexMatrix(projector).hermitian_part())
}

/// Number of singular values above `tol * s_max`.
pub fn numerical_rank(m: &ComplexMatrix, tol: f64) -> Result<usize> {
    let dec = svd(m)?;
    let s_max = dec.singular_values.last().copied().unwrap_or(0.0);
    if s_max == 0.0 {
        return Ok(0);
    }
    Ok(dec.singular_values.iter().filter(|&&s| s > tol * s_max).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{ginibre, seeded};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn random_psd(seed: u64, dim: usize) -> ComplexMatrix {
        let mut rng = seeded(seed);
        let g = ginibre(&mut rng, dim, dim);
        &g * &g.adjoint()
    }

    #[test]
    fn svd_identity_and_diagonal() {
        let s = svd(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!(s.singular_values.len(), 2);
        for x in &s.singular_values {
            assert!((x - 1.0).abs() < 1e-14);
        }
        let d = svd(&ComplexMatrix::from_real_diagonal(&[3.0, 0.0])).unwrap();
        assert!(d.singular_values[0].abs() < 1e-14);
        assert!((d.singular_values[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn svd_rejects_non_finite() {
        let m = ComplexMatrix(DMatrix::from_element(2, 2, C64::new(f64::NAN, 0.0)));
        assert!(matches!(svd(&m), Err(Error::InvalidInput(_))));
        assert!(ComplexMatrix::from_row_major(1, 1, &[C64::new(f64::INFINITY, 0.0)]).is_err());
    }

    #[test]
    fn svd_reconstructs_rectangular() {
        let mut rng = seeded(3);
        for (r, cdim) in [(3, 5), (5, 3), (4, 4), (1, 6)] {
            let m = ginibre(&mut rng, r, cdim);
            let d = svd(&m).unwrap();
            assert!(d.singular_values.windows(2).all(|w| w[0] <= w[1]));
            let err = (&d.reconstruct() - &m).spectral_norm();
            assert!(err < 1e-9, "reconstruction error {err}");
        }
    }

    #[test]
    fn eig_simple_cases() {
        let e = hermitian_eig(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!(e.eigenvalues.len(), 2);
        assert!(e.eigenvalues.iter().all(|x| (x - 1.0).abs() < 1e-14));
        let e = hermitian_eig(&ComplexMatrix::from_real_diagonal(&[0.8, 0.2])).unwrap();
        assert!((e.eigenvalues[0] - 0.2).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 0.8).abs() < 1e-14);
    }

    #[test]
    fn eig_trace_identity_on_random_hermitian() {
        let mut rng = seeded(11);
        let g = ginibre(&mut rng, 4, 4);
        let h = (&g + &g.adjoint()).scale(0.5);
        let e = hermitian_eig(&h).unwrap();
        let sum: f64 = e.eigenvalues.iter().sum();
        assert!((sum - h.trace().re).abs() < 1e-10);
    }

    #[test]
    fn eig_rejects_bad_shapes() {
        let rect = ComplexMatrix::zeros(2, 3);
        assert!(matches!(hermitian_eig(&rect), Err(Error::InvalidInput(_))));
        let skew = ComplexMatrix::from_row_major(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]).unwrap();
        assert!(matches!(hermitian_eig(&skew), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn chi_n_examples() {
        let half = ComplexMatrix::from_real_diagonal(&[0.5, 0.5]);
        assert!((chi_n(&half, 1).unwrap() - 0.5).abs() < 1e-15);
        let m = ComplexMatrix::from_real_diagonal(&[0.2, 0.8]);
        assert!((chi_n(&m, 2).unwrap() - 1.0).abs() < 1e-15);
        assert!(chi_n(&m, 0).is_err());
        assert!(chi_n(&m, 3).is_err());
        let neg = ComplexMatrix::from_real_diagonal(&[-0.1, 1.0]);
        assert!(chi_n(&neg, 1).is_err());
    }

    #[test]
    fn chi_n_nondecreasing_and_full_trace() {
        let m = random_psd(5, 5);
        let all = chi_all(&m).unwrap();
        assert!(all.windows(2).all(|w| w[0] <= w[1] + 1e-15));
        assert!((all[4] - m.trace().re).abs() < 1e-10);
        for n in 1..=5 {
            assert!((chi_n(&m, n).unwrap() - all[n - 1]).abs() < 1e-12);
        }
    }

    #[test]
    fn kron_examples() {
        let i4 = kron(&ComplexMatrix::identity(2), &ComplexMatrix::identity(2));
        assert_eq!(i4, ComplexMatrix::identity(4));
        let two = ComplexMatrix::from_real_diagonal(&[2.0]);
        assert_eq!(kron(&two, &ComplexMatrix::identity(2)), ComplexMatrix::identity(2).scale(2.0));
    }

    #[test]
    fn partial_trace_examples() {
        // Bell projector
        let amp = std::f64::consts::FRAC_1_SQRT_2;
        let v = [c(amp), c(0.0), c(0.0), c(amp)];
        let rho = ComplexMatrix::from_fn(4, 4, |i, j| v[i] * v[j].conj());
        let rb = partial_trace(&rho, (2, 2), Side::A).unwrap();
        assert!((&rb - &ComplexMatrix::identity(2).scale(0.5)).frobenius_norm() < 1e-15);

        // |0><0| (x) |1><1|
        let p0 = ComplexMatrix::from_real_diagonal(&[1.0, 0.0]);
        let p1 = ComplexMatrix::from_real_diagonal(&[0.0, 1.0]);
        let ra = partial_trace(&kron(&p0, &p1), (2, 2), Side::B).unwrap();
        assert_eq!(ra, p0);

        assert!(partial_trace(&rho, (2, 3), Side::A).is_err());
    }

    #[test]
    fn partial_trace_preserves_trace_on_asymmetric_dims() {
        let rho = random_psd(9, 6);
        for side in [Side::A, Side::B] {
            let r = partial_trace(&rho, (2, 3), side).unwrap();
            assert!((r.trace() - rho.trace()).norm() < 1e-12);
            assert!(chi_n(&r, 1).unwrap() >= -1e-12);
        }
        assert_eq!(partial_trace(&rho, (2, 3), Side::A).unwrap().rows(), 3);
        assert_eq!(partial_trace(&rho, (2, 3), Side::B).unwrap().rows(), 2);
    }

    #[test]
    fn operator_norm_examples() {
        assert!((operator_norm(&ComplexMatrix::identity(3).scale(4.0)).unwrap() - 4.0).abs() < 1e-14);
        assert!((operator_norm(&ComplexMatrix::from_real_diagonal(&[0.1, 0.9])).unwrap() - 0.9).abs() < 1e-15);
        assert!(operator_norm(&ComplexMatrix::from_real_diagonal(&[-1.0, 0.5])).is_err());
    }

    #[test]
    fn complement_projector_examples() {
        let p = complement_projector(&ComplexMatrix::zeros(3, 3), 1e-10).unwrap();
        assert_eq!(p, ComplexMatrix::identity(3));
        let p = complement_projector(&ComplexMatrix::identity(3), 1e-10).unwrap();
        assert!(p.frobenius_norm() < 1e-14);
    }

    #[test]
    fn complement_projector_rank_one() {
        let mut rng = seeded(21);
        let x = ginibre(&mut rng, 3, 1);
        let y = ginibre(&mut rng, 1, 3);
        let m = &x * &y;
        let p = complement_projector(&m, 1e-10).unwrap();
        assert!((&(&p * &p) - &p).spectral_norm() < 1e-10);
        assert!((&p * &m).spectral_norm() < 1e-10);
        assert!((p.trace().re - 2.0).abs() < 1e-10);
        assert_eq!(numerical_rank(&p, 1e-10).unwrap(), 2);
    }
}
