//! The two standard test problems: a separable problem with a closed-form
//! solution and a ball-shaped inclusion in a uniform background.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::Field3;
use crate::grid::Grid3;
use crate::stencil::{Medium, MediumDerivatives, Source, SourceDerivatives};
use crate::C64;

const I: C64 = Complex64::new(0.0, 1.0);

/// `u = φ(x) φ(y) φ(z)` with `φ(t) = e^{ik(t−a)} + e^{−ik(t−b)} − 2` and
/// constant wavenumber `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticSeparable {
    pub k0_sq: f64,
    pub a: f64,
    pub b: f64,
}

impl Default for AnalyticSeparable {
    fn default() -> Self {
        Self {
            k0_sq: 439.2,
            a: 0.0,
            b: 1.0,
        }
    }
}

impl AnalyticSeparable {
    pub fn new(k0_sq: f64) -> Result<Self> {
        let p = Self {
            k0_sq,
            ..Self::default()
        };
        p.validate()?;
        Ok(p)
    }

    pub fn k0(&self) -> f64 {
        self.k0_sq.sqrt()
    }

    /// Checks the radiation condition of `φ` at both ends.
    pub fn validate(&self) -> Result<()> {
        if !(self.k0_sq > 0.0) || !self.k0_sq.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "k0^2 must be positive, got {}",
                self.k0_sq
            )));
        }
        let k = self.k0();
        let left = -self.phi(self.a, 1) - I * k * self.phi(self.a, 0);
        let right = self.phi(self.b, 1) - I * k * self.phi(self.b, 0);
        let tol = 1e-12 * (1.0 + k);
        if left.norm() > tol || right.norm() > tol {
            return Err(Error::InvalidConfig(format!(
                "φ violates the radiation condition: residuals {:.3e}, {:.3e}",
                left.norm(),
                right.norm()
            )));
        }
        Ok(())
    }

    /// `φ^{(n)}(t)`
    pub fn phi(&self, t: f64, n: u32) -> C64 {
        let k = self.k0();
        let e1 = (I * k * (t - self.a)).exp();
        let e2 = (-I * k * (t - self.b)).exp();
        if n == 0 {
            e1 + e2 - 2.0
        } else {
            (I * k).powu(n) * e1 + (-I * k).powu(n) * e2
        }
    }

    pub fn exact(&self, p: [f64; 3]) -> C64 {
        self.phi(p[0], 0) * self.phi(p[1], 0) * self.phi(p[2], 0)
    }

    /// Mixed partial derivative of `f = ∇²u + k² u` of orders `d`.
    pub fn source_derivative(&self, p: [f64; 3], d: [u32; 3]) -> C64 {
        let term = |o: [u32; 3]| {
            self.phi(p[0], o[0] + d[0]) * self.phi(p[1], o[1] + d[1]) * self.phi(p[2], o[2] + d[2])
        };
        term([2, 0, 0]) + term([0, 2, 0]) + term([0, 0, 2]) + term([0, 0, 0]) * self.k0_sq
    }
}

struct AnalyticSource(AnalyticSeparable);

impl SourceDerivatives for AnalyticSource {
    fn value(&self, p: [f64; 3]) -> C64 {
        self.0.source_derivative(p, [0, 0, 0])
    }

    fn gradient(&self, p: [f64; 3]) -> [C64; 3] {
        let s = &self.0;
        [
            s.source_derivative(p, [1, 0, 0]),
            s.source_derivative(p, [0, 1, 0]),
            s.source_derivative(p, [0, 0, 1]),
        ]
    }

    fn second(&self, p: [f64; 3]) -> [C64; 3] {
        let s = &self.0;
        [
            s.source_derivative(p, [2, 0, 0]),
            s.source_derivative(p, [0, 2, 0]),
            s.source_derivative(p, [0, 0, 2]),
        ]
    }

    fn fourth(&self, p: [f64; 3]) -> [C64; 3] {
        let s = &self.0;
        [
            s.source_derivative(p, [4, 0, 0]),
            s.source_derivative(p, [0, 4, 0]),
            s.source_derivative(p, [0, 0, 4]),
        ]
    }

    fn mixed_fourth(&self, p: [f64; 3]) -> [C64; 3] {
        let s = &self.0;
        [
            s.source_derivative(p, [2, 2, 0]),
            s.source_derivative(p, [2, 0, 2]),
            s.source_derivative(p, [0, 2, 2]),
        ]
    }
}

/// Exact solution, medium and source of the separable problem on `grid`.
pub fn analytic_fields(p: &AnalyticSeparable, grid: &Grid3) -> Result<(Field3, Medium, Source)> {
    p.validate()?;
    let u = Field3::from_fn(grid, |x| p.exact(x));
    let medium = Medium::constant(grid, Complex64::new(p.k0(), 0.0));
    let source = Source::analytic(grid, Arc::new(AnalyticSource(*p)));
    Ok((u, medium, source))
}

/// Ball of higher, absorbing `k²` in a uniform background, illuminated by
/// the plane wave `u₀ = e^{ik₀z}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalInclusion {
    pub center: [f64; 3],
    pub radius: f64,
    pub k_sq_inside: C64,
    pub k0_sq: f64,
}

impl Default for SphericalInclusion {
    fn default() -> Self {
        Self {
            center: [0.5, 0.5, 0.7],
            radius: 0.1,
            k_sq_inside: Complex64::new(1050.0, 2.26),
            k0_sq: 439.2,
        }
    }
}

impl SphericalInclusion {
    pub fn k0(&self) -> f64 {
        self.k0_sq.sqrt()
    }

    pub fn inside(&self, p: [f64; 3]) -> bool {
        let d2: f64 = p
            .iter()
            .zip(&self.center)
            .map(|(a, c)| (a - c) * (a - c))
            .sum();
        d2 <= self.radius * self.radius
    }

    pub fn k_sq(&self, p: [f64; 3]) -> C64 {
        if self.inside(p) {
            self.k_sq_inside
        } else {
            Complex64::new(self.k0_sq, 0.0)
        }
    }

    pub fn incident(&self, p: [f64; 3]) -> C64 {
        (I * self.k0() * p[2]).exp()
    }

    /// `f = −(k² − k₀²) u₀`
    pub fn source(&self, p: [f64; 3]) -> C64 {
        -(self.k_sq(p) - self.k0_sq) * self.incident(p)
    }
}

/// How derivatives of the discontinuous `k²` and `f` are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InclusionDerivatives {
    /// Derivatives of the smooth piece containing each node; the jump
    /// across the sphere is ignored.
    #[default]
    Piecewise,
    /// Finite differences of the nodal samples.
    Sampled,
}

impl MediumDerivatives for SphericalInclusion {
    fn k_sq(&self, p: [f64; 3]) -> C64 {
        SphericalInclusion::k_sq(self, p)
    }

    fn gradient(&self, _p: [f64; 3]) -> [C64; 3] {
        [C64::default(); 3]
    }

    fn laplacian(&self, _p: [f64; 3]) -> C64 {
        C64::default()
    }
}

impl SourceDerivatives for SphericalInclusion {
    fn value(&self, p: [f64; 3]) -> C64 {
        self.source(p)
    }

    // within each piece f = c e^{ik₀z}
    fn gradient(&self, p: [f64; 3]) -> [C64; 3] {
        let z = C64::default();
        [z, z, I * self.k0() * self.source(p)]
    }

    fn second(&self, p: [f64; 3]) -> [C64; 3] {
        let z = C64::default();
        [z, z, -self.k0_sq * self.source(p)]
    }

    fn fourth(&self, p: [f64; 3]) -> [C64; 3] {
        let z = C64::default();
        [z, z, self.k0_sq * self.k0_sq * self.source(p)]
    }

    fn mixed_fourth(&self, _p: [f64; 3]) -> [C64; 3] {
        [C64::default(); 3]
    }
}

/// Nodewise medium and source of the inclusion problem.
pub fn inclusion_fields(
    p: &SphericalInclusion,
    grid: &Grid3,
    derivs: InclusionDerivatives,
) -> Result<(Medium, Source)> {
    if !(p.radius > 0.0) || !(p.k0_sq > 0.0) {
        return Err(Error::InvalidConfig(
            "inclusion needs a positive radius and k0^2".into(),
        ));
    }
    let k0 = Complex64::new(p.k0(), 0.0);
    Ok(match derivs {
        InclusionDerivatives::Piecewise => (
            Medium::analytic(grid, k0, Arc::new(*p)),
            Source::analytic(grid, Arc::new(*p)),
        ),
        InclusionDerivatives::Sampled => {
            let k_sq = Field3::from_fn(grid, |x| SphericalInclusion::k_sq(p, x));
            let f = Field3::from_fn(grid, |x| p.source(x));
            (Medium::sampled(k0, k_sq), Source::sampled(f))
        }
    })
}

/// Number of grid nodes inside the inclusion.
pub fn inclusion_node_count(p: &SphericalInclusion, grid: &Grid3) -> usize {
    let [nx, ny, nz] = grid.dims();
    let mut count = 0;
    for l in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                if p.inside(grid.point(i as isize, j as isize, l as isize)) {
                    count += 1;
                }
            }
        }
    }
    count
}
