//! Dense complex matrices, unitarity checks, and target-unitary generators.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Deref, Index, IndexMut};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Residual allowed on `U†U − I` when a unitary is constructed.
pub const UNITARY_TOL: f64 = 1e-10;

/// Residual allowed after composing unitaries.
pub const PRODUCT_TOL: f64 = 1e-9;

/// Dense row-major complex matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::validation(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::validation(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::validation(format!(
                "non-finite entry at ({}, {})",
                pos / cols,
                pos % cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from separate real and imaginary row lists.
    pub fn from_parts(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<Self> {
        if re.len() != im.len() {
            return Err(Error::validation("real and imaginary parts have different row counts"));
        }
        let rows = re.len();
        let cols = re.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows * cols);
        for (r, (re_row, im_row)) in re.iter().zip(im).enumerate() {
            if re_row.len() != cols || im_row.len() != cols {
                return Err(Error::validation(format!("row {r} has inconsistent length")));
            }
            data.extend(re_row.iter().zip(im_row).map(|(&a, &b)| Complex64::new(a, b)));
        }
        Self::new(rows, cols, data)
    }

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

    /// Panics if `f` produces a non-finite entry.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::new(rows, cols, data).expect("from_fn produced an invalid matrix")
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

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Real parts as a list of rows.
    pub fn re_rows(&self) -> Vec<Vec<f64>> {
        self.data
            .chunks(self.cols)
            .map(|r| r.iter().map(|z| z.re).collect())
            .collect()
    }

    /// Imaginary parts as a list of rows.
    pub fn im_rows(&self) -> Vec<Vec<f64>> {
        self.data
            .chunks(self.cols)
            .map(|r| r.iter().map(|z| z.im).collect())
            .collect()
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != other.rows {
            return Err(Error::validation(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// Largest entry magnitude.
    pub fn max_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max-norm of `self − other`; panics on shape mismatch.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Max-norm of `M†M − I`.
    pub fn unitarity_residual(&self) -> Result<f64> {
        if !self.is_square() {
            return Err(Error::validation(format!(
                "unitarity is undefined for a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let gram = self.dagger().matmul(self)?;
        Ok(gram.max_abs_diff(&Self::identity(self.rows)))
    }

    /// Multiplies every entry by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    /// Largest singular value (spectral norm).
    pub fn max_singular_value(&self) -> f64 {
        let m = nalgebra::DMatrix::from_row_slice(self.rows, self.cols, &self.data);
        m.singular_values().max()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for z in self.row(i) {
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// True iff `M` is square and `max|M†M − I| ≤ tol`.
pub fn is_unitary(m: &ComplexMatrix, tol: f64) -> Result<bool> {
    Ok(m.unitarity_residual()? <= tol)
}

pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.matmul(b)
}

/// Square matrix that passed a unitarity check on construction.
#[derive(Clone, PartialEq)]
pub struct UnitaryMatrix(ComplexMatrix);

impl UnitaryMatrix {
    /// Checks unitarity at [`UNITARY_TOL`].
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(m, UNITARY_TOL)
    }

    pub fn with_tolerance(m: ComplexMatrix, tol: f64) -> Result<Self> {
        let residual = m.unitarity_residual()?;
        if residual > tol {
            return Err(Error::validation(format!(
                "matrix is not unitary: max|M†M - I| = {residual:e} > {tol:e}"
            )));
        }
        Ok(Self(m))
    }

    /// Wraps a matrix whose unitarity follows from how it was built.
    pub(crate) fn new_unchecked(m: ComplexMatrix) -> Self {
        debug_assert!(m.is_square());
        Self(m)
    }

    pub fn identity(n: usize) -> Self {
        Self(ComplexMatrix::identity(n))
    }

    pub fn n(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_inner(self) -> ComplexMatrix {
        self.0
    }

    /// Product `self · other`, checked at [`PRODUCT_TOL`].
    pub fn compose(&self, other: &UnitaryMatrix) -> Result<UnitaryMatrix> {
        Self::with_tolerance(self.0.matmul(&other.0)?, PRODUCT_TOL)
    }

    pub fn dagger(&self) -> UnitaryMatrix {
        Self(self.0.dagger())
    }
}

impl Deref for UnitaryMatrix {
    type Target = ComplexMatrix;

    fn deref(&self) -> &ComplexMatrix {
        &self.0
    }
}

impl fmt::Debug for UnitaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Unitary{:?}", self.0)
    }
}

/// Discrete Fourier transform, entry `(j, k) = exp(2πi·jk/n)/√n`.
pub fn dft_matrix(n: usize) -> Result<UnitaryMatrix> {
    if n == 0 {
        return Err(Error::validation("DFT size must be at least 1"));
    }
    let scale = 1.0 / (n as f64).sqrt();
    let m = ComplexMatrix::from_fn(n, n, |j, k| {
        // Reduce jk mod n first so the angle stays small and accurate.
        let angle = 2.0 * PI * ((j * k) % n) as f64 / n as f64;
        Complex64::from_polar(scale, angle)
    });
    UnitaryMatrix::new(m)
}

/// Sylvester–Hadamard matrix scaled by `1/√n`.
pub fn hadamard_matrix(n: usize) -> Result<UnitaryMatrix> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::validation(format!(
            "Hadamard size must be a power of 2, got {n}"
        )));
    }
    let scale = 1.0 / (n as f64).sqrt();
    // H[j][k] = (−1)^{popcount(j & k)} in the Sylvester construction.
    let m = ComplexMatrix::from_fn(n, n, |j, k| {
        let sign = if (j & k).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        Complex64::new(sign * scale, 0.0)
    });
    UnitaryMatrix::new(m)
}

/// Haar-distributed unitary from QR of a complex Gaussian matrix.
///
/// Columns are orthonormalised by Gram–Schmidt with one re-orthogonalisation
/// sweep; that leaves the diagonal of R real and positive, which is the phase
/// fix that makes the distribution Haar.
pub fn haar_random_unitary(n: usize, seed: u64) -> Result<UnitaryMatrix> {
    if n == 0 {
        return Err(Error::validation("unitary size must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cols: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for i in 0..n {
        for col in cols.iter_mut() {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            col[i] = Complex64::new(re, im) / std::f64::consts::SQRT_2;
        }
    }

    for k in 0..n {
        for _ in 0..2 {
            for j in 0..k {
                let (done, rest) = cols.split_at_mut(k);
                let q = &done[j];
                let proj: Complex64 = q.iter().zip(rest[0].iter()).map(|(a, b)| a.conj() * b).sum();
                for (x, qv) in rest[0].iter_mut().zip(q) {
                    *x -= proj * qv;
                }
            }
        }
        let norm = cols[k].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(Error::numerical("degenerate Gaussian sample in Haar generation"));
        }
        for x in cols[k].iter_mut() {
            *x /= norm;
        }
    }

    let m = ComplexMatrix::from_fn(n, n, |i, j| cols[j][i]);
    UnitaryMatrix::new(m)
}
