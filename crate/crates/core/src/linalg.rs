//! Dense complex matrices, self-adjoint eigendecomposition, operator norms,
//! and guarded spectral counting.
//!
//! Everything downstream (quantized operators, Wilson-Dirac matrices, grid
//! projections) is built on [`ComplexMatrix`]. Eigendecompositions are
//! delegated to `faer`; the contract kept here is the reconstruction residual
//! `max|H - V L V^*| <= 1e-9 * |H|` checked in the tests.

use faer::complex_native::c64;
use faer::{Mat, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative scale for the default spectral-count guard; see [`default_gap_tol`].
pub const GAP_TOL_SCALE: f64 = 1e-8;

/// Default spectral gap guard for an operator of the given norm.
///
/// Counting eigenvalues against a level is refused when any eigenvalue lies
/// within this distance of the level. Convergence-theorem gaps grow like k
/// (Wilson-Dirac) or stay O(1) (projections), far above round-off at this
/// scale.
pub fn default_gap_tol(norm: f64) -> f64 {
    GAP_TOL_SCALE * norm.max(1.0)
}

/// Dense complex matrix, row-major storage.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl std::fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ComplexMatrix({}x{})", self.rows, self.cols)
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m.entries[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Build from row-major entries, rejecting NaN/Inf.
    pub fn from_entries(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "expected {} entries for a {}x{} matrix, got {}",
                rows * cols,
                rows,
                cols,
                entries.len()
            )));
        }
        for (idx, z) in entries.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite {
                    row: idx / cols,
                    col: idx % cols,
                });
            }
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self { rows, cols, entries }
    }

    /// 2x2 helper used all over the tests.
    pub fn two_by_two(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Self {
            rows: 2,
            cols: 2,
            entries: vec![a, b, c, d],
        }
    }

    pub fn diagonal(values: &[Complex64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m.entries[i * values.len() + i] = *v;
        }
        m
    }

    pub fn real_diagonal(values: &[f64]) -> Self {
        Self::diagonal(
            &values
                .iter()
                .map(|v| Complex64::new(*v, 0.0))
                .collect::<Vec<_>>(),
        )
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

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.entries[i * self.cols + j] = v;
    }

    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, v: Complex64) {
        self.entries[i * self.cols + j] += v;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            entries,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            entries,
        })
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|a| a * s).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.entries[i * self.cols + l];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let row = &other.entries[l * other.cols..(l + 1) * other.cols];
                let dst = &mut out.entries[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.entries[j * self.rows + i] = self.entries[i * self.cols + j].conj();
            }
        }
        out
    }

    /// Kronecker product; index convention `(a*rows_b + b, ...)`.
    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = Self::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.entries[i * self.cols + j];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for p in 0..other.rows {
                    for q in 0..other.cols {
                        out.entries[(i * other.rows + p) * cols + (j * other.cols + q)] =
                            a * other.entries[p * other.cols + q];
                    }
                }
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        let mut t = Complex64::new(0.0, 0.0);
        for i in 0..self.rows.min(self.cols) {
            t += self.entries[i * self.cols + i];
        }
        t
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |A - A^*|` over entries; zero for exactly hermitian matrices.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut defect = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                let d = (self.entries[i * self.cols + j]
                    - self.entries[j * self.cols + i].conj())
                .norm();
                defect = defect.max(d);
            }
        }
        defect
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "shape mismatch: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    fn to_faer(&self) -> Mat<c64> {
        Mat::from_fn(self.rows, self.cols, |i, j| {
            let z = self.entries[i * self.cols + j];
            c64::new(z.re, z.im)
        })
    }
}

/// A square matrix guaranteed hermitian.
///
/// The constructor symmetrizes through `(A + A^*)/2` and records the
/// pre-symmetrization defect, so assembly round-off never aborts a run;
/// grossly non-hermitian input (defect above `1e-8 * max entry`) is rejected
/// as a bug.
#[derive(Clone, Debug)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
    hermiticity_defect: f64,
}

impl HermitianOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension(format!(
                "hermitian operator must be square, got {}x{}",
                matrix.rows, matrix.cols
            )));
        }
        if matrix.rows == 0 {
            return Err(Error::Dimension("empty matrix".into()));
        }
        let defect = matrix.hermiticity_defect();
        let tol = 1e-8 * matrix.max_abs().max(1.0);
        if defect > tol {
            return Err(Error::NotHermitian { defect, tol });
        }
        let sym = matrix
            .add(&matrix.adjoint())
            .expect("square matrix shapes agree")
            .scale(Complex64::new(0.5, 0.0));
        Ok(Self {
            matrix: sym,
            hermiticity_defect: defect,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.hermiticity_defect
    }
}

/// Eigenvalues in ascending order, optionally with the unitary of eigenvectors
/// (columns match the eigenvalue order).
#[derive(Clone, Debug)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: Option<ComplexMatrix>,
}

impl Spectrum {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> Option<&ComplexMatrix> {
        self.eigenvectors.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min_abs(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|l| l.abs())
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest eigenvalue magnitude.
    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|l| l.abs())
            .fold(0.0, f64::max)
    }

    /// Distance from the eigenvalues to `level`.
    pub fn gap_at(&self, level: f64) -> f64 {
        self.eigenvalues
            .iter()
            .map(|l| (l - level).abs())
            .fold(f64::INFINITY, f64::min)
    }

    /// Number of eigenvalues strictly above `level`, guarded by `gap_tol`.
    pub fn count_above(&self, level: f64, gap_tol: f64) -> Result<usize> {
        if gap_tol <= 0.0 {
            return Err(Error::InvalidArgument("gap_tol must be positive".into()));
        }
        for l in &self.eigenvalues {
            if (l - level).abs() < gap_tol {
                return Err(Error::AmbiguousCount {
                    eigenvalue: *l,
                    level,
                    gap_tol,
                });
            }
        }
        Ok(self.eigenvalues.iter().filter(|l| **l > level).count())
    }
}

fn validate_eigenvalues(dim: usize, eigenvalues: Vec<f64>) -> Result<Vec<f64>> {
    if eigenvalues.len() != dim || eigenvalues.iter().any(|l| !l.is_finite()) {
        return Err(Error::NonConvergence { dim });
    }
    Ok(eigenvalues)
}

/// Full eigendecomposition of a hermitian operator.
pub fn hermitian_eigen(h: &HermitianOperator) -> Result<Spectrum> {
    let dim = h.dim();
    let evd = h.matrix.to_faer().selfadjoint_eigendecomposition(Side::Lower);
    let s = evd.s();
    let diag = s.column_vector();
    let mut pairs: Vec<(f64, usize)> = (0..dim).map(|i| (diag[i].re, i)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let eigenvalues =
        validate_eigenvalues(dim, pairs.iter().map(|(l, _)| *l).collect::<Vec<_>>())?;
    let u = evd.u();
    let vectors = ComplexMatrix::from_fn(dim, dim, |i, j| {
        let z = u[(i, pairs[j].1)];
        Complex64::new(z.re, z.im)
    });
    Ok(Spectrum {
        eigenvalues,
        eigenvectors: Some(vectors),
    })
}

/// Eigenvalues only; cheaper than [`hermitian_eigen`] for large operators.
pub fn hermitian_eigenvalues(h: &HermitianOperator) -> Result<Spectrum> {
    let dim = h.dim();
    let mut eigenvalues = h.matrix.to_faer().selfadjoint_eigenvalues(Side::Lower);
    eigenvalues.sort_by(f64::total_cmp);
    Ok(Spectrum {
        eigenvalues: validate_eigenvalues(dim, eigenvalues)?,
        eigenvectors: None,
    })
}

/// Largest singular value.
pub fn operator_norm(a: &ComplexMatrix) -> f64 {
    if a.rows == 0 || a.cols == 0 {
        return 0.0;
    }
    let sv = a.to_faer().singular_values();
    sv.into_iter().fold(0.0, f64::max)
}

/// `rank E_{>level}` of a hermitian operator, guarded by `gap_tol`.
pub fn count_above(h: &HermitianOperator, level: f64, gap_tol: f64) -> Result<usize> {
    hermitian_eigenvalues(h)?.count_above(level, gap_tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eigen_diagonal() {
        let h = HermitianOperator::new(ComplexMatrix::real_diagonal(&[3.0, -1.0])).unwrap();
        let s = hermitian_eigen(&h).unwrap();
        assert_eq!(s.eigenvalues(), &[-1.0, 3.0]);
    }

    #[test]
    fn eigen_pauli_x() {
        let m = ComplexMatrix::two_by_two(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0));
        let s = hermitian_eigen(&HermitianOperator::new(m).unwrap()).unwrap();
        assert!((s.eigenvalues()[0] + 1.0).abs() < 1e-14);
        assert!((s.eigenvalues()[1] - 1.0).abs() < 1e-14);
    }

    /// Independent oracle: roots of the characteristic polynomial of a 2x2
    /// hermitian matrix via the quadratic formula.
    fn two_by_two_oracle(a: f64, b: Complex64, d: f64) -> (f64, f64) {
        let mean = 0.5 * (a + d);
        let disc = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        (mean - disc, mean + disc)
    }

    #[test]
    fn eigen_matches_quadratic_formula() {
        let cases = [
            (0.7, c(0.3, -0.4), -1.2),
            (2.0, c(-1.1, 0.9), 0.5),
            (-0.3, c(0.0, 2.0), -0.3),
        ];
        for (a, b, d) in cases {
            let m = ComplexMatrix::two_by_two(c(a, 0.0), b, b.conj(), c(d, 0.0));
            let s = hermitian_eigen(&HermitianOperator::new(m).unwrap()).unwrap();
            let (lo, hi) = two_by_two_oracle(a, b, d);
            assert!((s.eigenvalues()[0] - lo).abs() < 1e-12);
            assert!((s.eigenvalues()[1] - hi).abs() < 1e-12);
        }
    }

    fn random_hermitian(dim: usize, seed: u64) -> HermitianOperator {
        let mut state = seed;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut m = ComplexMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..=i {
                let v = if i == j {
                    c(next(), 0.0)
                } else {
                    c(next(), next())
                };
                m.set(i, j, v);
                m.set(j, i, v.conj());
            }
        }
        HermitianOperator::new(m).unwrap()
    }

    #[test]
    fn eigen_reconstruction_residual() {
        let h = random_hermitian(24, 7);
        let s = hermitian_eigen(&h).unwrap();
        let v = s.eigenvectors().unwrap();
        let lam = ComplexMatrix::real_diagonal(s.eigenvalues());
        let rec = v.matmul(&lam).unwrap().matmul(&v.adjoint()).unwrap();
        let diff = rec.sub(h.matrix()).unwrap().max_abs();
        assert!(diff <= 1e-9 * operator_norm(h.matrix()));
    }

    #[test]
    fn eigenvalue_sum_equals_trace() {
        let h = random_hermitian(16, 3);
        let s = hermitian_eigenvalues(&h).unwrap();
        let sum: f64 = s.eigenvalues().iter().sum();
        let tr = h.matrix().trace().re;
        assert!((sum - tr).abs() <= 1e-9 * tr.abs().max(1.0));
    }

    #[test]
    fn operator_norm_examples() {
        assert_eq!(operator_norm(&ComplexMatrix::zeros(3, 3)), 0.0);
        let d = ComplexMatrix::real_diagonal(&[2.0, -5.0]);
        assert!((operator_norm(&d) - 5.0).abs() < 1e-12);
        // nilpotent [[0,2],[0,0]] has singular values {2, 0}
        let nilp =
            ComplexMatrix::two_by_two(c(0.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        assert!((operator_norm(&nilp) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn operator_norm_submultiplicative() {
        for seed in 0..4u64 {
            let a = random_hermitian(8, seed).matrix().clone();
            let b = random_hermitian(8, seed + 100).matrix().clone();
            let ab = a.matmul(&b).unwrap();
            assert!(operator_norm(&ab) <= operator_norm(&a) * operator_norm(&b) + 1e-9);
        }
    }

    #[test]
    fn count_above_examples() {
        let h = HermitianOperator::new(ComplexMatrix::real_diagonal(&[1.0, -1.0])).unwrap();
        assert_eq!(count_above(&h, 0.0, 1e-8).unwrap(), 1);
        let h =
            HermitianOperator::new(ComplexMatrix::real_diagonal(&[0.5, 0.6, -2.0])).unwrap();
        assert_eq!(count_above(&h, 0.55, 1e-8).unwrap(), 1);
    }

    #[test]
    fn count_above_guard_trips() {
        let h = HermitianOperator::new(ComplexMatrix::real_diagonal(&[1.0, 1e-10])).unwrap();
        match count_above(&h, 0.0, 1e-8) {
            Err(Error::AmbiguousCount { .. }) => {}
            other => panic!("expected AmbiguousCount, got {other:?}"),
        }
    }

    #[test]
    fn count_partition_is_exact() {
        let h = random_hermitian(12, 11);
        let s = hermitian_eigenvalues(&h).unwrap();
        let level = 0.01;
        let above = s.count_above(level, 1e-12).unwrap();
        let below = s.eigenvalues().iter().filter(|l| **l <= level).count();
        assert_eq!(above + below, h.dim());
    }

    #[test]
    fn constructor_rejects_non_finite() {
        let bad = ComplexMatrix::from_entries(1, 1, vec![c(f64::NAN, 0.0)]);
        assert!(bad.is_err());
    }

    #[test]
    fn constructor_symmetrizes_and_records_defect() {
        let mut m = ComplexMatrix::identity(2);
        m.set(0, 1, c(1.0, 1e-12));
        m.set(1, 0, c(1.0, -1e-12 + 1e-13));
        let h = HermitianOperator::new(m).unwrap();
        assert!(h.hermiticity_defect() > 0.0);
        assert_eq!(h.matrix().hermiticity_defect(), 0.0);
    }
}
