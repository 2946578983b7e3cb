use num_complex::Complex64;
use proptest::prelude::*;

use hypersym::evolve::growth_rate_fit;
use hypersym::geometry::{poisson_bracket, sigma_pairing};
use hypersym::linalg::{self, CMat};
use hypersym::localize::{characteristic_data, localize_with, rotate_kernel};
use hypersym::modela::build_system;
use hypersym::phase::{CotangentPoint, PhaseVector};
use hypersym::poly::Poly;
use hypersym::spectral::{block_identity_residuals, mode_operators, symmetrizer_assemble, Grid};
use hypersym::symbol::{det_dense, det_symbol, eval_symbol};

fn quad(c: &[f64]) -> Poly {
    // c0 + c1 z0 + c2 z1 z2 + c3 z0^2 in four variables
    let v = |k| Poly::var(4, k);
    let mut p = Poly::constant(4, Complex64::new(c[0], 0.0));
    p = &p + &v(0).scale(Complex64::new(c[1], 0.0));
    p = &p + &(&v(1) * &v(2)).scale(Complex64::new(c[2], 0.0));
    &p + &(&v(0) * &v(0)).scale(Complex64::new(c[3], 0.0))
}

fn vec4() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, 4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_evaluates_pointwise(a in vec4(), b in vec4(), z in vec4()) {
        let (p, q) = (quad(&a), quad(&b));
        let lhs = (&p * &q).eval_real(&z);
        let rhs = p.eval_real(&z) * q.eval_real(&z);
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + rhs.norm()));
    }

    #[test]
    fn sigma_is_antisymmetric(x in vec4(), y in vec4()) {
        let (x, y) = (PhaseVector::from_slice(1, &x).unwrap(), PhaseVector::from_slice(1, &y).unwrap());
        prop_assert!((sigma_pairing(&x, &y) + sigma_pairing(&y, &x)).abs() < 1e-12);
    }

    #[test]
    fn poisson_bracket_is_antisymmetric(a in vec4(), b in vec4(), z in vec4()) {
        let (f, g) = (quad(&a), quad(&b));
        let s = poisson_bracket(&f, &g, 1, &z) + poisson_bracket(&g, &f, 1, &z);
        prop_assert!(s.abs() < 1e-10);
    }

    #[test]
    fn symbolic_and_numeric_determinants_agree(z in prop::collection::vec(-2.0f64..2.0, 6), re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let sys = build_system(Complex64::new(re, im));
        let rho = CotangentPoint::from_coords(2, &z).unwrap();
        let l = eval_symbol(&sys, &rho).unwrap();
        let a = det_symbol(&sys, &rho).unwrap();
        let b = det_dense(&l);
        prop_assert!((a - b).norm() <= 1e-10 * (1.0 + l.norm().powi(3)));
    }

    #[test]
    fn localization_ignores_kernel_basis(t in -1.0f64..1.0, y in -1.0f64..1.0, eta in 0.2f64..3.0, seed in 0u64..1000) {
        let sys = build_system(Complex64::new(0.0, 2.0));
        let rho = CotangentPoint::new(t, vec![0.0, y], 0.0, vec![0.0, eta]).unwrap();
        let cd = characteristic_data(&sys, &rho).unwrap();
        let a = localize_with(&sys, cd.clone(), None).unwrap();
        let b = localize_with(&sys, rotate_kernel(&cd, seed), None).unwrap();
        prop_assert!(a.det_poly.poly().max_coeff_diff(b.det_poly.poly()) < 1e-10);
    }

    #[test]
    fn discrete_block_identities_hold(mu in -0.95f64..0.95, kappa in 0.5f64..20.0) {
        let disc = mode_operators(Complex64::new(0.0, mu), kappa, 33, Grid::Auto).unwrap();
        let dh = &disc.dh;
        prop_assert_eq!(dh.transpose(), -dh);
        let (r1, r2) = block_identity_residuals(&disc).unwrap();
        prop_assert!(r1 < 1e-12 && r2 < 1e-12);
        let s = symmetrizer_assemble(&disc, 1.0).unwrap();
        let lo = linalg::hermitian_eigenvalues(&s.s).unwrap()[0];
        prop_assert!(lo >= 1.0 * (1.0 - mu * mu).min(1.0) - 1e-9);
    }

    #[test]
    fn exponent_fit_is_exact_on_power_laws(p in 0.1f64..2.0, c in 0.1f64..10.0) {
        let k = [2.0, 11.0, 40.0, 300.0];
        let rates: Vec<f64> = k.iter().map(|k: &f64| c * k.powf(p)).collect();
        let fit = growth_rate_fit(&k, &rates).unwrap();
        prop_assert!((fit.exponent.unwrap() - p).abs() < 1e-12);
        prop_assert!((fit.prefactor.unwrap() / c - 1.0).abs() < 1e-10);
    }
}

#[test]
fn rotated_kernel_keeps_cokernel_pairing() {
    let sys = build_system(Complex64::new(0.0, 0.5));
    let rho = CotangentPoint::new(0.0, vec![0.0, 0.0], 0.0, vec![0.0, 1.0]).unwrap();
    let cd = rotate_kernel(&characteristic_data(&sys, &rho).unwrap(), 9);
    let id = &cd.cokernel * &cd.kernel;
    assert!((id - CMat::identity(3, 3)).norm() < 1e-12);
}
