use std::sync::Arc;

use num_complex::Complex64;

use crate::field::Field3;
use crate::grid::{Axis, Grid3};
use crate::C64;

/// Closed-form description of `k²(x, y, z)` and its derivatives.
pub trait MediumDerivatives: Send + Sync {
    /// `k²` at an arbitrary point (also used at ghost nodes).
    fn k_sq(&self, p: [f64; 3]) -> C64;
    /// `((k²)_x, (k²)_y, (k²)_z)`
    fn gradient(&self, p: [f64; 3]) -> [C64; 3];
    /// `∇²(k²)`
    fn laplacian(&self, p: [f64; 3]) -> C64;
}

/// Uniform medium `k² ≡ k0²`.
#[derive(Debug, Clone, Copy)]
pub struct ConstantMedium(pub C64);

impl MediumDerivatives for ConstantMedium {
    fn k_sq(&self, _p: [f64; 3]) -> C64 {
        self.0
    }

    fn gradient(&self, _p: [f64; 3]) -> [C64; 3] {
        [C64::default(); 3]
    }

    fn laplacian(&self, _p: [f64; 3]) -> C64 {
        C64::default()
    }
}

/// Wavenumber data: background `k0` and nodal samples of `k²`.
#[derive(Clone)]
pub struct Medium {
    k0: C64,
    k_sq: Field3,
    analytic: Option<Arc<dyn MediumDerivatives>>,
}

impl std::fmt::Debug for Medium {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Medium")
            .field("k0", &self.k0)
            .field("grid", self.k_sq.grid())
            .field("analytic", &self.analytic.is_some())
            .finish()
    }
}

impl Medium {
    /// Sampled medium; derivatives of `k²` come from finite differences.
    pub fn sampled(k0: C64, k_sq: Field3) -> Self {
        Self {
            k0,
            k_sq,
            analytic: None,
        }
    }

    /// Medium described analytically, sampled on `grid`.
    pub fn analytic(grid: &Grid3, k0: C64, model: Arc<dyn MediumDerivatives>) -> Self {
        let k_sq = Field3::from_fn(grid, |p| model.k_sq(p));
        Self {
            k0,
            k_sq,
            analytic: Some(model),
        }
    }

    /// `k² ≡ k0²` everywhere.
    pub fn constant(grid: &Grid3, k0: C64) -> Self {
        Self::analytic(grid, k0, Arc::new(ConstantMedium(k0 * k0)))
    }

    pub fn k0(&self) -> C64 {
        self.k0
    }

    pub fn k_sq(&self) -> &Field3 {
        &self.k_sq
    }

    pub fn grid(&self) -> &Grid3 {
        self.k_sq.grid()
    }

    pub fn model(&self) -> Option<&Arc<dyn MediumDerivatives>> {
        self.analytic.as_ref()
    }

    /// `k²` at an arbitrary point: the analytic model if present, otherwise
    /// the sample at the nearest node.
    pub fn k_sq_at(&self, p: [f64; 3]) -> C64 {
        if let Some(m) = &self.analytic {
            return m.k_sq(p);
        }
        let g = self.grid();
        let i = g.nearest(Axis::X, p[0]);
        let j = g.nearest(Axis::Y, p[1]);
        let l = g.nearest(Axis::Z, p[2]);
        self.k_sq[g.offset(i, j, l)]
    }

    /// Nodal `(k²)_ν` for each axis and `∇²(k²)`.
    pub fn derivative_fields(&self) -> ([Vec<C64>; 3], Vec<C64>) {
        let g = *self.grid();
        if let Some(m) = &self.analytic {
            let mut grad = [Vec::new(), Vec::new(), Vec::new()];
            let mut lap = Vec::with_capacity(g.len());
            for k in 0..g.len() {
                let (i, j, l) = g.unflatten(k);
                let p = g.point(i as isize, j as isize, l as isize);
                let d = m.gradient(p);
                for a in 0..3 {
                    grad[a].push(d[a]);
                }
                lap.push(m.laplacian(p));
            }
            return (grad, lap);
        }
        let data = self.k_sq.as_slice();
        let mut grad = [Vec::new(), Vec::new(), Vec::new()];
        let mut lap = vec![C64::default(); g.len()];
        for axis in Axis::ALL {
            let (d1, d2) = sample_derivatives(&g, data, axis);
            for (acc, v) in lap.iter_mut().zip(&d2) {
                *acc += v;
            }
            grad[axis.index()] = d1;
        }
        (grad, lap)
    }
}

/// Second-order first and second derivatives of nodal samples along `axis`,
/// one-sided at the ends of each line.
pub(crate) fn sample_derivatives(g: &Grid3, data: &[C64], axis: Axis) -> (Vec<C64>, Vec<C64>) {
    let n = g.n(axis);
    let h = g.h(axis);
    let stride = match axis {
        Axis::X => 1,
        Axis::Y => g.nx(),
        Axis::Z => g.slice_len(),
    };
    let mut d1 = vec![C64::default(); data.len()];
    let mut d2 = vec![C64::default(); data.len()];
    if n < 3 {
        // too short for a curvature estimate; slope only
        if n == 2 {
            for k in 0..data.len() {
                let idx = g.unflatten(k);
                let pos = [idx.0, idx.1, idx.2][axis.index()];
                let base = k - pos * stride;
                d1[k] = (data[base + stride] - data[base]) / h;
            }
        }
        return (d1, d2);
    }
    let h2 = h * h;
    for k in 0..data.len() {
        let idx = g.unflatten(k);
        let pos = [idx.0, idx.1, idx.2][axis.index()];
        let at = |m: usize| data[k - pos * stride + m * stride];
        let (a, b) = if pos == 0 {
            let second = if n >= 4 {
                (at(0) * 2.0 - at(1) * 5.0 + at(2) * 4.0 - at(3)) / h2
            } else {
                (at(0) - at(1) * 2.0 + at(2)) / h2
            };
            ((at(0) * -3.0 + at(1) * 4.0 - at(2)) / (2.0 * h), second)
        } else if pos == n - 1 {
            let m = n - 1;
            let second = if n >= 4 {
                (at(m) * 2.0 - at(m - 1) * 5.0 + at(m - 2) * 4.0 - at(m - 3)) / h2
            } else {
                (at(m) - at(m - 1) * 2.0 + at(m - 2)) / h2
            };
            (
                (at(m) * 3.0 - at(m - 1) * 4.0 + at(m - 2)) / (2.0 * h),
                second,
            )
        } else {
            (
                (at(pos + 1) - at(pos - 1)) / (2.0 * h),
                (at(pos + 1) - at(pos) * 2.0 + at(pos - 1)) / h2,
            )
        };
        d1[k] = a;
        d2[k] = b;
    }
    (d1, d2)
}

#[allow(dead_code)]
pub(crate) fn re(v: f64) -> C64 {
    Complex64::new(v, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Placement;

    struct Quadratic;

    impl MediumDerivatives for Quadratic {
        fn k_sq(&self, p: [f64; 3]) -> C64 {
            re(p[0] * p[0] + 2.0 * p[1] - p[2] * p[2] * 3.0)
        }
        fn gradient(&self, p: [f64; 3]) -> [C64; 3] {
            [re(2.0 * p[0]), re(2.0), re(-6.0 * p[2])]
        }
        fn laplacian(&self, _p: [f64; 3]) -> C64 {
            re(2.0 - 6.0)
        }
    }

    #[test]
    fn sampled_derivatives_exact_for_quadratics() {
        let g = Grid3::new([5, 4, 6], [(0.0, 1.0); 3], Placement::Collocated).unwrap();
        let exact = Medium::analytic(&g, re(1.0), Arc::new(Quadratic));
        let sampled = Medium::sampled(re(1.0), exact.k_sq().clone());
        let (ga, la) = exact.derivative_fields();
        let (gs, ls) = sampled.derivative_fields();
        for a in 0..3 {
            for (x, y) in ga[a].iter().zip(&gs[a]) {
                assert!((x - y).norm() < 1e-10);
            }
        }
        for (x, y) in la.iter().zip(&ls) {
            assert!((x - y).norm() < 1e-9);
        }
    }

    #[test]
    fn nearest_sample_lookup() {
        let g = Grid3::unit_cube(4, Placement::Staggered).unwrap();
        let k_sq = Field3::from_fn(&g, |p| re(p[2]));
        let m = Medium::sampled(re(2.0), k_sq);
        // ghost below the first z node falls back to the boundary sample
        assert_eq!(m.k_sq_at([0.5, 0.5, -0.125]), re(0.125));
    }
}
