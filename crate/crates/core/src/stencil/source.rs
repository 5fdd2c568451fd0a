use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::Field3;
use crate::grid::{Axis, Grid3};
use crate::C64;

/// Closed-form derivatives of the right-hand side `f`.
pub trait SourceDerivatives: Send + Sync {
    fn value(&self, p: [f64; 3]) -> C64;
    /// `(f_x, f_y, f_z)`
    fn gradient(&self, p: [f64; 3]) -> [C64; 3];
    /// `(f_xx, f_yy, f_zz)`
    fn second(&self, p: [f64; 3]) -> [C64; 3];
    /// `(f_xxxx, f_yyyy, f_zzzz)`
    fn fourth(&self, p: [f64; 3]) -> [C64; 3];
    /// `(f_xxyy, f_xxzz, f_yyzz)`
    fn mixed_fourth(&self, p: [f64; 3]) -> [C64; 3];
}

/// Nodal derivative data of `f` needed by the modified right-hand sides.
#[derive(Debug, Clone)]
pub struct SourceDerivativeFields {
    pub gradient: [Vec<C64>; 3],
    pub second: [Vec<C64>; 3],
    pub fourth: [Vec<C64>; 3],
    pub mixed: [Vec<C64>; 3],
}

/// Right-hand side samples plus optional analytic derivatives.
#[derive(Clone)]
pub struct Source {
    f: Field3,
    analytic: Option<Arc<dyn SourceDerivatives>>,
    allow_fallback: bool,
}

impl std::fmt::Debug for Source {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Source")
            .field("grid", self.f.grid())
            .field("analytic", &self.analytic.is_some())
            .field("allow_fallback", &self.allow_fallback)
            .finish()
    }
}

impl Source {
    /// Samples only; derivatives come from finite differences.
    pub fn sampled(f: Field3) -> Self {
        Self {
            f,
            analytic: None,
            allow_fallback: true,
        }
    }

    pub fn analytic(grid: &Grid3, model: Arc<dyn SourceDerivatives>) -> Self {
        let f = Field3::from_fn(grid, |p| model.value(p));
        Self {
            f,
            analytic: Some(model),
            allow_fallback: true,
        }
    }

    /// Forbids the finite-difference fallback for missing derivatives.
    pub fn without_fallback(mut self) -> Self {
        self.allow_fallback = false;
        self
    }

    pub fn samples(&self) -> &Field3 {
        &self.f
    }

    pub fn grid(&self) -> &Grid3 {
        self.f.grid()
    }

    pub fn has_analytic(&self) -> bool {
        self.analytic.is_some()
    }

    /// Derivative data at the nodes, analytic when available.
    pub fn derivative_fields(&self) -> Result<SourceDerivativeFields> {
        let g = *self.f.grid();
        if let Some(m) = &self.analytic {
            let mut out = SourceDerivativeFields {
                gradient: Default::default(),
                second: Default::default(),
                fourth: Default::default(),
                mixed: Default::default(),
            };
            for k in 0..g.len() {
                let (i, j, l) = g.unflatten(k);
                let p = g.point(i as isize, j as isize, l as isize);
                let (a, b, c, d) = (m.gradient(p), m.second(p), m.fourth(p), m.mixed_fourth(p));
                for e in 0..3 {
                    out.gradient[e].push(a[e]);
                    out.second[e].push(b[e]);
                    out.fourth[e].push(c[e]);
                    out.mixed[e].push(d[e]);
                }
            }
            return Ok(out);
        }
        if !self.allow_fallback {
            return Err(Error::MissingDerivatives("f derivatives"));
        }
        Ok(fd_derivatives(&g, self.f.as_slice()))
    }
}

/// Extends a line by two extrapolated values on each side using the
/// polynomial through up to four end samples.
fn extend_line(vals: &[C64]) -> Vec<C64> {
    let n = vals.len();
    let mut ext = vec![C64::default(); n + 4];
    ext[2..n + 2].copy_from_slice(vals);
    let deg = n.saturating_sub(1).min(3);
    // binomial coefficients of (1 - E)^(deg+1), dropping the leading term
    let coef: &[f64] = match deg {
        0 => &[1.0],
        1 => &[2.0, -1.0],
        2 => &[3.0, -3.0, 1.0],
        _ => &[4.0, -6.0, 4.0, -1.0],
    };
    for step in 0..2 {
        // left: ext[1 - step] from ext[2 - step ..]
        let t = 1 - step;
        ext[t] = coef
            .iter()
            .enumerate()
            .map(|(m, c)| ext[t + 1 + m] * *c)
            .sum();
        let t = n + 2 + step;
        ext[t] = coef
            .iter()
            .enumerate()
            .map(|(m, c)| ext[t - 1 - m] * *c)
            .sum();
    }
    ext
}

/// Applies `op` to every line along `axis`; `op` receives the extended line
/// (two extra values per side) and writes `n` outputs.
fn map_lines(
    g: &Grid3,
    data: &[C64],
    axis: Axis,
    mut op: impl FnMut(&[C64], &mut [C64]),
) -> Vec<C64> {
    let [nx, ny, nz] = g.dims();
    let n = g.n(axis);
    let (stride, outer): (usize, Vec<usize>) = match axis {
        Axis::X => (1, (0..ny * nz).map(|q| q * nx).collect()),
        Axis::Y => (
            nx,
            (0..nz)
                .flat_map(|l| (0..nx).map(move |i| i + l * nx * ny))
                .collect(),
        ),
        Axis::Z => (nx * ny, (0..nx * ny).collect()),
    };
    let mut out = vec![C64::default(); data.len()];
    let mut line = vec![C64::default(); n];
    let mut res = vec![C64::default(); n];
    for base in outer {
        for (m, v) in line.iter_mut().enumerate() {
            *v = data[base + m * stride];
        }
        let ext = extend_line(&line);
        op(&ext, &mut res);
        for (m, v) in res.iter().enumerate() {
            out[base + m * stride] = *v;
        }
    }
    out
}

fn d1_line(h: f64) -> impl FnMut(&[C64], &mut [C64]) {
    move |e, out| {
        for (m, o) in out.iter_mut().enumerate() {
            let c = m + 2;
            *o = (e[c - 2] - e[c - 1] * 8.0 + e[c + 1] * 8.0 - e[c + 2]) / (12.0 * h);
        }
    }
}

fn d2_line(h: f64) -> impl FnMut(&[C64], &mut [C64]) {
    move |e, out| {
        for (m, o) in out.iter_mut().enumerate() {
            let c = m + 2;
            *o = (-e[c - 2] + e[c - 1] * 16.0 - e[c] * 30.0 + e[c + 1] * 16.0 - e[c + 2])
                / (12.0 * h * h);
        }
    }
}

fn d4_line(h: f64) -> impl FnMut(&[C64], &mut [C64]) {
    // one-sided second-order stencils for the two nodes next to each end
    const EDGE: [[f64; 6]; 2] = [
        [3.0, -14.0, 26.0, -24.0, 11.0, -2.0],
        [2.0, -9.0, 16.0, -14.0, 6.0, -1.0],
    ];
    let h4 = h * h * h * h;
    move |e, out| {
        let n = out.len();
        for (m, o) in out.iter_mut().enumerate() {
            let c = m + 2;
            *o = (e[c - 2] - e[c - 1] * 4.0 + e[c] * 6.0 - e[c + 1] * 4.0 + e[c + 2]) / h4;
        }
        if n < 6 {
            return;
        }
        let v = &e[2..n + 2];
        for (m, w) in EDGE.iter().enumerate() {
            out[m] = w.iter().enumerate().map(|(q, c)| v[q] * *c).sum::<C64>() / h4;
            out[n - 1 - m] = w
                .iter()
                .enumerate()
                .map(|(q, c)| v[n - 1 - q] * *c)
                .sum::<C64>()
                / h4;
        }
    }
}

/// Finite-difference derivative fields: fourth-order first and second
/// derivatives, second-order fourth and mixed derivatives.
pub fn fd_derivatives(g: &Grid3, data: &[C64]) -> SourceDerivativeFields {
    let h = g.spacing();
    let mut gradient: [Vec<C64>; 3] = Default::default();
    let mut second: [Vec<C64>; 3] = Default::default();
    let mut fourth: [Vec<C64>; 3] = Default::default();
    for axis in Axis::ALL {
        let a = axis.index();
        gradient[a] = map_lines(g, data, axis, d1_line(h[a]));
        second[a] = map_lines(g, data, axis, d2_line(h[a]));
        fourth[a] = map_lines(g, data, axis, d4_line(h[a]));
    }
    let mixed = [
        map_lines(g, &second[1], Axis::X, d2_line(h[0])),
        map_lines(g, &second[2], Axis::X, d2_line(h[0])),
        map_lines(g, &second[2], Axis::Y, d2_line(h[1])),
    ];
    SourceDerivativeFields {
        gradient,
        second,
        fourth,
        mixed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Placement;
    use num_complex::Complex64;

    #[test]
    fn extrapolation_exact_for_cubics() {
        let f = |x: f64| Complex64::new(x * x * x - 2.0 * x + 1.0, x);
        let vals: Vec<C64> = (0..6).map(|k| f(k as f64)).collect();
        let ext = extend_line(&vals);
        for (m, v) in ext.iter().enumerate() {
            let x = m as f64 - 2.0;
            assert!((v - f(x)).norm() < 1e-9, "{m}");
        }
    }

    #[test]
    fn fd_derivatives_of_smooth_field() {
        let g = Grid3::unit_cube(24, Placement::Staggered).unwrap();
        let u = |p: [f64; 3]| Complex64::new(0.0, 1.3 * p[0] + 0.7 * p[1] - 0.4 * p[2]).exp();
        let f = Field3::from_fn(&g, u);
        let d = fd_derivatives(&g, f.as_slice());
        let w = [1.3, 0.7, -0.4];
        let i = Complex64::new(0.0, 1.0);
        let mut err = [0.0f64; 4];
        for k in 0..g.len() {
            let v = f[k];
            for a in 0..3 {
                err[0] = err[0].max((d.gradient[a][k] - i * w[a] * v).norm());
                err[1] = err[1].max((d.second[a][k] + w[a] * w[a] * v).norm());
                err[2] = err[2].max((d.fourth[a][k] - w[a].powi(4) * v).norm());
            }
            err[3] = err[3].max((d.mixed[0][k] - w[0] * w[0] * w[1] * w[1] * v).norm());
        }
        assert!(err[0] < 1e-4 && err[1] < 1e-2, "{err:?}");
        assert!(err[2] < 5e-2 && err[3] < 1e-2, "{err:?}");
    }

    #[test]
    fn fallback_can_be_disabled() {
        let g = Grid3::unit_cube(4, Placement::Staggered).unwrap();
        let s = Source::sampled(Field3::zeros(&g)).without_fallback();
        assert!(matches!(
            s.derivative_fields(),
            Err(Error::MissingDerivatives(_))
        ));
    }
}
