use super::*;
use crate::grid::Axis;
use rand::{rngs::StdRng, RngExt, SeedableRng};

fn c(re: f64) -> C64 {
    Complex64::new(re, 0.0)
}

fn random_field(g: &Grid3, seed: u64) -> Field3 {
    let mut r = StdRng::seed_from_u64(seed);
    let data = (0..g.len())
        .map(|_| Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)))
        .collect();
    Field3::from_vec(g, data).unwrap()
}

fn wavy_medium(g: &Grid3) -> Medium {
    let k_sq = Field3::from_fn(g, |p| {
        Complex64::new(30.0 + 5.0 * (3.0 * p[0]).sin() * p[1], 0.4 * p[2])
    });
    Medium::sampled(c(5.0), k_sq)
}

#[test]
fn zero_maps_to_zero() {
    let g = Grid3::unit_cube(5, Placement::Staggered).unwrap();
    let m = wavy_medium(&g);
    let bc = BoundaryCoeffs::staggered(&g, m.k0());
    for order in [SchemeOrder::Second, SchemeOrder::Fourth, SchemeOrder::Sixth] {
        let out = apply_operator(order, &m, &bc, &Field3::zeros(&g)).unwrap();
        assert!(out.as_slice().iter().all(|z| *z == ZERO));
    }
}

#[test]
fn second_difference_of_parabola() {
    let g = Grid3::unit_cube(7, Placement::Collocated).unwrap();
    let m = Medium::constant(&g, ZERO);
    let bc = BoundaryCoeffs::collocated(&g, c(1.0));
    let u = Field3::from_fn(&g, |p| c(p[0] * p[0]));
    let au = apply_operator(SchemeOrder::Second, &m, &bc, &u).unwrap();
    let s = g.h(Axis::Z).powi(2);
    for l in 1..6 {
        for j in 1..6 {
            for i in 1..6 {
                let v = au[g.offset(i, j, l)];
                assert!((v - c(2.0 * s)).norm() < 1e-12, "{v}");
            }
        }
    }
}

#[test]
fn linearity() {
    let g = Grid3::new([4, 5, 6], [(0.0, 1.0); 3], Placement::Staggered).unwrap();
    let m = wavy_medium(&g);
    let bc = BoundaryCoeffs::staggered(&g, m.k0());
    let u = random_field(&g, 1);
    let v = random_field(&g, 2);
    let (a, b) = (Complex64::new(0.3, -1.2), Complex64::new(-2.0, 0.5));
    for order in [SchemeOrder::Second, SchemeOrder::Fourth] {
        let op = HelmholtzOperator::new(order, &m, bc).unwrap();
        let mut w = u.clone();
        w.scale(a);
        w.axpy(b, &v).unwrap();
        let lhs = op.apply_field(&w).unwrap();
        let mut rhs = op.apply_field(&u).unwrap();
        rhs.scale(a);
        rhs.axpy(b, &op.apply_field(&v).unwrap()).unwrap();
        let err = NormReport::between(lhs.as_slice(), rhs.as_slice()).linf_abs;
        assert!(err < 1e-12, "{err}");
    }
}

#[test]
fn sixth_requires_uniform_grid() {
    let g = Grid3::new([4, 4, 6], [(0.0, 1.0); 3], Placement::Staggered).unwrap();
    let m = Medium::constant(&g, c(2.0));
    let bc = BoundaryCoeffs::staggered(&g, c(2.0));
    assert!(matches!(
        HelmholtzOperator::new(SchemeOrder::Sixth, &m, bc),
        Err(Error::NonUniformGrid { .. })
    ));
    assert!(HelmholtzOperator::new(SchemeOrder::Fourth, &m, bc).is_ok());
}

#[test]
fn dense_matches_apply_on_unit_vectors() {
    let g = Grid3::unit_cube(4, Placement::Collocated).unwrap();
    let m = wavy_medium(&g);
    let bc = BoundaryCoeffs::collocated(&g, m.k0());
    for order in [SchemeOrder::Second, SchemeOrder::Fourth, SchemeOrder::Sixth] {
        let a = assemble_dense(order, &m, &bc).unwrap();
        let u = random_field(&g, 9);
        let au = apply_operator(order, &m, &bc, &u).unwrap();
        let du = a.matvec(u.as_slice());
        for (x, y) in au.as_slice().iter().zip(&du) {
            assert!((x - y).norm() < 1e-12);
        }
    }
}

#[test]
fn dirichlet_laplacian_is_symmetric_and_absorbing_is_not() {
    let g = Grid3::unit_cube(2, Placement::Collocated).unwrap();
    let m = Medium::constant(&g, ZERO);
    let a = assemble_dense(SchemeOrder::Second, &m, &BoundaryCoeffs::dirichlet()).unwrap();
    assert!(a.max_abs_diff(&a.transpose()) < 1e-14);

    let g = Grid3::unit_cube(4, Placement::Staggered).unwrap();
    let m = Medium::constant(&g, c(3.0));
    let a = assemble_dense(
        SchemeOrder::Second,
        &m,
        &BoundaryCoeffs::staggered(&g, c(3.0)),
    )
    .unwrap();
    let ah = CMatrix::from_fn(a.rows(), a.cols(), |r, cc| a[(cc, r)].conj());
    assert!(a.max_abs_diff(&ah) > 1e-3);
}

#[test]
fn size_guard() {
    let g = Grid3::unit_cube(17, Placement::Staggered).unwrap();
    let m = Medium::constant(&g, c(1.0));
    assert!(matches!(
        assemble_dense(SchemeOrder::Second, &m, &BoundaryCoeffs::dirichlet()),
        Err(Error::SizeGuard { .. })
    ));
}

#[test]
fn boundary_row_structure() {
    // 1D-constant field along x: boundary row is (γ − 2 + rest) u_1 + ζ u_2
    let g = Grid3::unit_cube(5, Placement::Collocated).unwrap();
    let gamma = Complex64::new(0.2, 0.7);
    let zeta = c(2.0);
    let bc = BoundaryCoeffs::custom([gamma; 3], [zeta; 3]);
    let m = Medium::constant(&g, ZERO);
    let u = Field3::from_fn(&g, |p| c(1.0 + p[0]));
    let au = apply_operator(SchemeOrder::Second, &m, &bc, &u).unwrap();
    let h = g.h(Axis::X);
    let s = h * h;
    // interior in y and z, so only the x closure acts
    let k = g.offset(0, 2, 2);
    let expect = ((gamma - 2.0) * u[k] + zeta * u[g.offset(1, 2, 2)]) / (h * h) * s;
    assert!((au[k] - expect).norm() < 1e-12);
}

#[test]
fn rhs_trivial_cases() {
    let g = Grid3::unit_cube(6, Placement::Staggered).unwrap();
    let m = Medium::constant(&g, ZERO);
    let zero = Source::sampled(Field3::zeros(&g));
    let one = Source::sampled(Field3::from_fn(&g, |_| c(1.0)));
    let s = g.h(Axis::Z).powi(2);
    for order in [SchemeOrder::Second, SchemeOrder::Fourth, SchemeOrder::Sixth] {
        let r = build_rhs(order, &m, &zero).unwrap();
        assert!(r.as_slice().iter().all(|z| *z == ZERO));
        let r = build_rhs(order, &m, &one).unwrap();
        assert!(r.as_slice().iter().all(|z| (z - c(s)).norm() < 1e-12));
    }
}

#[test]
fn symbol_matches_operator_on_sine_modes() {
    // Dirichlet ghosts, constant k: sine modes in x and y reduce the operator
    // to e Λ_z + b on each vertical line.
    let g = Grid3::unit_cube(6, Placement::Collocated).unwrap();
    let k0 = c(7.0);
    let m = Medium::constant(&g, k0);
    let bc = BoundaryCoeffs::dirichlet();
    let (a, b) = (2usize, 3usize);
    let n = 6;
    let hn = 1.0 / (n + 1) as f64;
    let mu = |i: usize| {
        let h = g.h(Axis::X);
        (2.0 * (std::f64::consts::PI * hn * i as f64).cos() - 2.0) / (h * h)
    };
    let zprof = |l: usize| c(((l * l) as f64).sin() + 0.3);
    let u = Field3::from_fn(&g, |_| ZERO);
    let mut u = u;
    for l in 0..n {
        for j in 0..n {
            for i in 0..n {
                let v = crate::dst::sine_entry(n, a, i + 1) * crate::dst::sine_entry(n, b, j + 1);
                u[g.offset(i, j, l)] = zprof(l) * v;
            }
        }
    }
    for order in [SchemeOrder::Second, SchemeOrder::Fourth, SchemeOrder::Sixth] {
        let au = apply_operator(order, &m, &bc, &u).unwrap();
        let (e, bb) = separable_symbol(order, g.spacing(), k0 * k0, mu(a), mu(b));
        for l in 0..n {
            let mut line = bb * zprof(l);
            if l > 0 {
                line += e * zprof(l - 1);
            }
            if l + 1 < n {
                line += e * zprof(l + 1);
            }
            let scale = crate::dst::sine_entry(n, a, 2) * crate::dst::sine_entry(n, b, 4);
            let got = au[g.offset(1, 3, l)];
            assert!(
                (got - line * scale).norm() < 1e-9 * (1.0 + got.norm()),
                "{order:?} {l}"
            );
        }
    }
}
