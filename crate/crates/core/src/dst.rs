//! Orthonormal type-I discrete sine transform.
//!
//! `S[i][l] = sqrt(2h) sin(π h i l)` with `h = 1/(n+1)` and `i, l = 1..n`.
//! `S` is real, symmetric and orthogonal, so it is its own inverse; its
//! columns are the eigenvectors of the Dirichlet second-difference matrix.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::linalg::{gemm, Layout};
use crate::C64;

const ZERO: C64 = Complex64::new(0.0, 0.0);
const ONE: C64 = Complex64::new(1.0, 0.0);

/// How the transform is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DstKernel {
    /// FFT for sizes with small prime factors, dense product otherwise.
    #[default]
    Auto,
    /// Complex FFT of length `2(n+1)` with odd extension.
    Fft,
    /// Dense `n x n` product.
    Direct,
}

fn largest_prime_factor(mut m: usize) -> usize {
    let mut best = 1;
    let mut p = 2;
    while p * p <= m {
        while m % p == 0 {
            best = p;
            m /= p;
        }
        p += 1;
    }
    best.max(m)
}

/// Plan for transforms of length `n`.
#[derive(Clone)]
pub struct Dst1 {
    n: usize,
    use_fft: bool,
    fft: Option<Arc<dyn Fft<f64>>>,
    matrix: Vec<C64>,
    scale: f64,
}

impl std::fmt::Debug for Dst1 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dst1")
            .field("n", &self.n)
            .field("use_fft", &self.use_fft)
            .finish()
    }
}

/// Entry `(i, l)` (1-based) of the orthonormal sine matrix.
pub fn sine_entry(n: usize, i: usize, l: usize) -> f64 {
    let h = 1.0 / (n + 1) as f64;
    // reduce the argument exactly before calling sin
    let m = (i * l) % (2 * (n + 1));
    (2.0 * h).sqrt() * (std::f64::consts::PI * m as f64 * h).sin()
}

impl Dst1 {
    pub fn new(n: usize, kernel: DstKernel) -> Self {
        assert!(n >= 1);
        let use_fft = match kernel {
            DstKernel::Fft => true,
            DstKernel::Direct => false,
            DstKernel::Auto => n >= 32 && largest_prime_factor(n + 1) <= 64,
        };
        let fft = use_fft.then(|| FftPlanner::new().plan_fft_forward(2 * (n + 1)));
        let matrix = if use_fft {
            Vec::new()
        } else {
            let mut m = Vec::with_capacity(n * n);
            for c in 1..=n {
                for r in 1..=n {
                    m.push(Complex64::new(sine_entry(n, r, c), 0.0));
                }
            }
            m
        };
        let h = 1.0 / (n + 1) as f64;
        Self {
            n,
            use_fft,
            fft,
            matrix,
            scale: (2.0 * h).sqrt() * 0.5,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn uses_fft(&self) -> bool {
        self.use_fft
    }

    /// Transforms `count` vectors in place. Vector `v` occupies
    /// `data[v * vstride + k * estride]` for `k = 0..n`.
    pub fn apply_strided(&self, data: &mut [C64], count: usize, estride: usize, vstride: usize) {
        let n = self.n;
        if count == 0 {
            return;
        }
        if let Some(fft) = &self.fft {
            let m = 2 * (n + 1);
            let mut buf = vec![ZERO; m * count];
            for v in 0..count {
                let line = &mut buf[v * m..(v + 1) * m];
                for k in 0..n {
                    let x = data[v * vstride + k * estride];
                    line[k + 1] = x;
                    line[m - k - 1] = -x;
                }
            }
            fft.process(&mut buf);
            // DST_k = (i / 2) X_k, times the orthonormal scale
            let f = Complex64::new(0.0, self.scale);
            for v in 0..count {
                let line = &buf[v * m..(v + 1) * m];
                for k in 0..n {
                    data[v * vstride + k * estride] = line[k + 1] * f;
                }
            }
        } else if estride == 1 {
            // vectors are columns of an n x count matrix with column stride vstride
            let mut out = vec![ZERO; n * count];
            gemm(
                n,
                n,
                count,
                ONE,
                &self.matrix,
                Layout::col_major(n),
                data,
                Layout {
                    row_stride: 1,
                    col_stride: vstride as isize,
                },
                ZERO,
                &mut out,
                Layout::col_major(n),
            );
            for v in 0..count {
                data[v * vstride..v * vstride + n].copy_from_slice(&out[v * n..(v + 1) * n]);
            }
        } else {
            // vectors are rows: out (count x n) = data (count x n) * S (S symmetric)
            let mut out = vec![ZERO; n * count];
            gemm(
                count,
                n,
                n,
                ONE,
                data,
                Layout {
                    row_stride: vstride as isize,
                    col_stride: estride as isize,
                },
                &self.matrix,
                Layout::col_major(n),
                ZERO,
                &mut out,
                Layout::col_major(count),
            );
            for k in 0..n {
                for v in 0..count {
                    data[v * vstride + k * estride] = out[v + k * count];
                }
            }
        }
    }

    /// Transforms a single contiguous vector in place.
    pub fn apply(&self, x: &mut [C64]) {
        assert_eq!(x.len(), self.n);
        self.apply_strided(x, 1, 1, self.n);
    }

    /// Number of complex multiply-adds the dense kernel would spend on one vector.
    pub fn dense_cost(&self) -> usize {
        self.n * self.n
    }
}

/// 2D transform of an `nx x ny` slice (x fastest): `S_x X S_y`.
#[derive(Debug, Clone)]
pub struct Dst2 {
    pub x: Dst1,
    pub y: Dst1,
}

impl Dst2 {
    pub fn new(nx: usize, ny: usize, kernel: DstKernel) -> Self {
        Self {
            x: Dst1::new(nx, kernel),
            y: Dst1::new(ny, kernel),
        }
    }

    pub fn apply(&self, slice: &mut [C64]) {
        let (nx, ny) = (self.x.len(), self.y.len());
        assert_eq!(slice.len(), nx * ny);
        self.x.apply_strided(slice, ny, 1, nx);
        self.y.apply_strided(slice, nx, nx, 1);
    }
}
