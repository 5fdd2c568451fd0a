use helmholtz_core::dst::{Dst1, DstKernel};
use helmholtz_core::stencil::{BoundaryCoeffs, HelmholtzOperator, Medium, SchemeOrder};
use helmholtz_core::tridiag::{solve_pivoted, LineBatch};
use helmholtz_core::{Complex64, Field3, Grid3, Placement};
use proptest::prelude::*;

type C = Complex64;

fn cvec(len: usize) -> impl Strategy<Value = Vec<C>> {
    prop::collection::vec(
        (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| C::new(a, b)),
        len,
    )
}

fn max_diff(a: &[C], b: &[C]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sine_transform_is_an_involution(n in 1usize..40, seed in cvec(40)) {
        for kernel in [DstKernel::Fft, DstKernel::Direct] {
            let t = Dst1::new(n, kernel);
            let x = seed[..n].to_vec();
            let mut y = x.clone();
            t.apply(&mut y);
            t.apply(&mut y);
            prop_assert!(max_diff(&x, &y) < 1e-12);
        }
    }

    #[test]
    fn fft_and_dense_sine_transforms_agree(n in 1usize..40, seed in cvec(40)) {
        let mut a = seed[..n].to_vec();
        let mut b = a.clone();
        Dst1::new(n, DstKernel::Fft).apply(&mut a);
        Dst1::new(n, DstKernel::Direct).apply(&mut b);
        prop_assert!(max_diff(&a, &b) < 1e-12);
    }

    #[test]
    fn pivoted_tridiagonal_solve(n in 2usize..30, d in cvec(30), o in cvec(60), b in cvec(30)) {
        let dl = &o[..n - 1];
        let du = &o[30..29 + n];
        // shift keeps the system away from exact singularity
        let d: Vec<C> = d[..n].iter().map(|v| v * 4.0 + 0.5).collect();
        let x = solve_pivoted(dl, &d, du, &b[..n]).unwrap();
        let mut ax = vec![C::default(); n];
        for i in 0..n {
            ax[i] = d[i] * x[i];
            if i > 0 { ax[i] += dl[i - 1] * x[i - 1]; }
            if i + 1 < n { ax[i] += du[i] * x[i + 1]; }
        }
        let scale = x.iter().map(|v| v.norm()).fold(1.0, f64::max);
        prop_assert!(max_diff(&ax, &b[..n]) < 1e-10 * scale);
    }

    #[test]
    fn line_batch_solve_inverts_apply(
        n in 3usize..12,
        gre in -1.0f64..1.0,
        gim in 0.1f64..1.0,
        two in any::<bool>(),
        shift in cvec(36),
        rhs in cvec(36),
    ) {
        let lines = 3;
        let zeta = C::new(if two { 2.0 } else { 1.0 }, 0.0);
        let b: Vec<C> = shift[..n * lines].iter().map(|v| v + C::new(-3.0, 0.2)).collect();
        let batch = LineBatch::new(n, 1, C::new(gre, gim), zeta, b, None).unwrap();
        let mut x = rhs[..n * lines].to_vec();
        batch.solve_in_place(&mut x).unwrap();
        let back = batch.apply(&x);
        prop_assert!(max_diff(&back, &rhs[..n * lines]) < 1e-9);
    }

    #[test]
    fn operators_are_linear(order in 0usize..3, a in cvec(1), u in cvec(216), v in cvec(216)) {
        let g = Grid3::unit_cube(6, Placement::Collocated).unwrap();
        let k0 = C::new(4.0, 0.0);
        let medium = Medium::constant(&g, k0);
        let order = [SchemeOrder::Second, SchemeOrder::Fourth, SchemeOrder::Sixth][order];
        let op = HelmholtzOperator::new(order, &medium, BoundaryCoeffs::for_grid(&g, k0)).unwrap();
        let fu = Field3::from_vec(&g, u).unwrap();
        let fv = Field3::from_vec(&g, v).unwrap();
        let mut w = fu.clone();
        w.axpy(a[0], &fv).unwrap();
        let lhs = op.apply_field(&w).unwrap();
        let mut rhs = op.apply_field(&fu).unwrap();
        rhs.axpy(a[0], &op.apply_field(&fv).unwrap()).unwrap();
        prop_assert!(max_diff(lhs.as_slice(), rhs.as_slice()) < 1e-12);
    }
}
