//! Small dense complex linear algebra: column-major matrices, a safe wrapper
//! around the blocked `zgemm` kernel, LU solves and explicit inverses.

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Strided view description for [`gemm`]: element `(r, c)` lives at
/// `offset + r * row_stride + c * col_stride`.
#[derive(Debug, Clone, Copy)]
pub struct Layout {
    pub row_stride: isize,
    pub col_stride: isize,
}

impl Layout {
    pub const fn col_major(rows: usize) -> Self {
        Self {
            row_stride: 1,
            col_stride: rows as isize,
        }
    }

    pub const fn row_major(cols: usize) -> Self {
        Self {
            row_stride: cols as isize,
            col_stride: 1,
        }
    }

    fn max_offset(&self, rows: usize, cols: usize) -> isize {
        if rows == 0 || cols == 0 {
            return 0;
        }
        (rows as isize - 1) * self.row_stride + (cols as isize - 1) * self.col_stride
    }
}

/// `C = alpha * A * B + beta * C` with `A: m×k`, `B: k×n`, `C: m×n`.
///
/// Panics if a layout would index outside its slice.
#[allow(clippy::too_many_arguments)]
pub fn gemm(
    m: usize,
    k: usize,
    n: usize,
    alpha: Complex64,
    a: &[Complex64],
    la: Layout,
    b: &[Complex64],
    lb: Layout,
    beta: Complex64,
    c: &mut [Complex64],
    lc: Layout,
) {
    if m == 0 || n == 0 {
        return;
    }
    for (len, lay, rows, cols) in [
        (a.len(), la, m, k),
        (b.len(), lb, k, n),
        (c.len(), lc, m, n),
    ] {
        let strides_ok = lay.row_stride >= 0 && lay.col_stride >= 0;
        assert!(
            strides_ok && (lay.max_offset(rows, cols) as usize) < len.max(1),
            "gemm operand layout out of bounds"
        );
    }
    // Complex64 is #[repr(C)] { re, im }, identical to matrixmultiply's [f64; 2].
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            [alpha.re, alpha.im],
            a.as_ptr() as *const [f64; 2],
            la.row_stride,
            la.col_stride,
            b.as_ptr() as *const [f64; 2],
            lb.row_stride,
            lb.col_stride,
            [beta.re, beta.im],
            c.as_mut_ptr() as *mut [f64; 2],
            lc.row_stride,
            lc.col_stride,
        );
    }
}

/// Dense complex matrix, column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
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

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for c in 0..cols {
            for r in 0..rows {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_col_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidConfig(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn column(&self, c: usize) -> &[Complex64] {
        &self.data[c * self.rows..(c + 1) * self.rows]
    }

    pub fn column_mut(&mut self, c: usize) -> &mut [Complex64] {
        &mut self.data[c * self.rows..(c + 1) * self.rows]
    }

    pub fn layout(&self) -> Layout {
        Layout::col_major(self.rows)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = CMatrix::zeros(self.rows, other.cols);
        let lc = out.layout();
        gemm(
            self.rows,
            self.cols,
            other.cols,
            ONE,
            &self.data,
            self.layout(),
            &other.data,
            other.layout(),
            ZERO,
            &mut out.data,
            lc,
        );
        out
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, x.len(), "matvec shape mismatch");
        let mut y = vec![ZERO; self.rows];
        for (c, &xc) in x.iter().enumerate() {
            if xc == ZERO {
                continue;
            }
            for (yr, a) in y.iter_mut().zip(self.column(c)) {
                *yr += a * xc;
            }
        }
        y
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Induced 1-norm (maximum absolute column sum).
    pub fn norm_one(&self) -> f64 {
        (0..self.cols)
            .map(|c| self.column(c).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `max |self - other|` entrywise.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Explicit inverse by Gauss-Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Result<CMatrix> {
        if self.rows != self.cols {
            return Err(Error::InvalidConfig(
                "inverse of a non-square matrix".into(),
            ));
        }
        let n = self.rows;
        // Work row-major on an augmented copy [A | I].
        let w = 2 * n;
        let mut aug = vec![ZERO; n * w];
        for r in 0..n {
            for c in 0..n {
                aug[r * w + c] = self[(r, c)];
            }
            aug[r * w + n + r] = ONE;
        }
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        for col in 0..n {
            let (piv, best) = (col..n)
                .map(|r| (r, aug[r * w + col].norm()))
                .fold((col, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best <= 16.0 * n as f64 * f64::EPSILON * scale {
                return Err(Error::Singular(format!(
                    "zero pivot in column {col} of a {n}x{n} matrix"
                )));
            }
            if piv != col {
                for c in 0..w {
                    aug.swap(piv * w + c, col * w + c);
                }
            }
            let inv = ONE / aug[col * w + col];
            for c in 0..w {
                aug[col * w + c] *= inv;
            }
            let pivot_row: Vec<Complex64> = aug[col * w..(col + 1) * w].to_vec();
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = aug[r * w + col];
                if factor == ZERO {
                    continue;
                }
                let row = &mut aug[r * w..(r + 1) * w];
                for (x, p) in row.iter_mut().zip(&pivot_row) {
                    *x -= factor * p;
                }
            }
        }
        Ok(CMatrix::from_fn(n, n, |r, c| aug[r * w + n + c]))
    }

    /// LU factorization with partial pivoting.
    pub fn lu(&self) -> Result<Lu> {
        if self.rows != self.cols {
            return Err(Error::InvalidConfig("LU of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let (piv, best) = (k..n)
                .map(|r| (r, a[(r, k)].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best <= 16.0 * n as f64 * f64::EPSILON * scale {
                return Err(Error::Singular(format!("zero pivot at step {k}")));
            }
            if piv != k {
                perm.swap(piv, k);
                for c in 0..n {
                    let (x, y) = (a[(piv, c)], a[(k, c)]);
                    a[(piv, c)] = y;
                    a[(k, c)] = x;
                }
            }
            let inv = ONE / a[(k, k)];
            for r in k + 1..n {
                a[(r, k)] *= inv;
            }
            for c in k + 1..n {
                let akc = a[(k, c)];
                if akc == ZERO {
                    continue;
                }
                for r in k + 1..n {
                    let l = a[(r, k)];
                    a[(r, c)] -= l * akc;
                }
            }
        }
        Ok(Lu { factors: a, perm })
    }

    /// Solves `self * x = b` through a fresh LU factorization.
    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        Ok(self.lu()?.solve(b))
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r + c * self.rows]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r + c * self.rows]
    }
}

/// Packed `PA = LU` factors.
#[derive(Debug, Clone)]
pub struct Lu {
    factors: CMatrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.perm.len();
        assert_eq!(b.len(), n);
        let a = &self.factors;
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for k in 0..n {
            let xk = x[k];
            for r in k + 1..n {
                x[r] -= a[(r, k)] * xk;
            }
        }
        for k in (0..n).rev() {
            x[k] /= a[(k, k)];
            let xk = x[k];
            for r in 0..k {
                x[r] -= a[(r, k)] * xk;
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_matrix(n: usize) -> CMatrix {
        CMatrix::from_fn(n, n, |r, c| {
            let base = ((r * 7 + c * 13) % 11) as f64 / 11.0 - 0.5;
            let diag = if r == c { 4.0 } else { 0.0 };
            Complex64::new(base + diag, ((r + 2 * c) % 5) as f64 / 5.0)
        })
    }

    #[test]
    fn inverse_roundtrip() {
        let a = test_matrix(16);
        let inv = a.inverse().unwrap();
        let err = a.matmul(&inv).max_abs_diff(&CMatrix::identity(16));
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn lu_solves() {
        let a = test_matrix(9);
        let x: Vec<Complex64> = (0..9).map(|k| Complex64::new(k as f64, 1.0)).collect();
        let b = a.matvec(&x);
        let y = a.solve(&b).unwrap();
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).norm() < 1e-12);
        }
    }

    #[test]
    fn singular_detected() {
        let mut a = test_matrix(4);
        for r in 0..4 {
            a[(r, 3)] = a[(r, 0)] * 2.0;
        }
        assert!(a.inverse().is_err());
        assert!(a.lu().is_err());
    }

    #[test]
    fn gemm_matches_naive_with_strides() {
        let a = test_matrix(5);
        let b = test_matrix(5).transpose();
        let c = a.matmul(&b);
        for r in 0..5 {
            for col in 0..5 {
                let naive: Complex64 = (0..5).map(|k| a[(r, k)] * b[(k, col)]).sum();
                assert!((naive - c[(r, col)]).norm() < 1e-13);
            }
        }
        // same product with B read as the row-major transpose of itself
        let bt = b.transpose();
        let mut c2 = vec![ZERO; 25];
        gemm(
            5,
            5,
            5,
            ONE,
            a.as_slice(),
            a.layout(),
            bt.as_slice(),
            Layout::row_major(5),
            ZERO,
            &mut c2,
            Layout::col_major(5),
        );
        assert!(c2
            .iter()
            .zip(c.as_slice())
            .all(|(x, y)| (x - y).norm() < 1e-13));
    }
}
