use num_complex::Complex64;

use hypersym::evolve::{cfl_limit, evolve_energy, gaussian_initial, gronwall_check, integrate, ModeState};
use hypersym::linalg::{CVec, Csr};
use hypersym::spectral::{generator_eigenvalues, mode_operators, spectral_abscissa, Grid};

fn imu(mu: f64) -> Complex64 {
    Complex64::new(0.0, mu)
}

fn final_state(gen: &Csr, u0: &CVec, t: f64, dt: f64) -> CVec {
    let (st, _) = integrate(gen, ModeState::new(4.0, u0.clone()), t, Some(dt), |_| {}).unwrap();
    st.u
}

#[test]
fn rk4_converges_at_fourth_order() {
    let disc = mode_operators(imu(0.5), 4.0, 65, Grid::Auto).unwrap();
    let gen = Csr::from_dense(&disc.generator());
    let u0 = gaussian_initial(&disc);
    let dt = cfl_limit(&gen);
    let reference = final_state(&gen, &u0, 1.0, dt / 64.0);
    let e1 = (final_state(&gen, &u0, 1.0, dt / 2.0) - &reference).norm();
    let e2 = (final_state(&gen, &u0, 1.0, dt / 4.0) - &reference).norm();
    let order = (e1 / e2).log2();
    assert!(order >= 3.8, "observed order {order}");
}

#[test]
fn ill_posed_energy_fails_gronwall_for_large_kappa() {
    let disc = mode_operators(imu(2.0), 256.0, 65, Grid::Auto).unwrap();
    let rep = evolve_energy(&disc, 1.0, gaussian_initial(&disc), 1.0, None).unwrap();
    assert!(!gronwall_check(&rep, 2.0).passed);
}

#[test]
fn well_posed_norm_estimate_constant_is_moderate() {
    let disc = mode_operators(imu(0.5), 16.0, 65, Grid::Auto).unwrap();
    let rep = evolve_energy(&disc, 1.0, gaussian_initial(&disc), 1.0, None).unwrap();
    let c = rep.norm_estimate_constant();
    assert!(c > 0.0 && c <= 1.0, "{c}");
    assert!(rep.suu_growth_ratio() <= 1.0 + 1e-3);
}

#[test]
fn scaled_generator_spectrum_scales_with_sqrt_kappa() {
    let one = mode_operators(imu(2.0), 1.0, 33, Grid::Scaled(8.0)).unwrap();
    let nine = mode_operators(imu(2.0), 9.0, 33, Grid::Scaled(8.0)).unwrap();
    let mut a: Vec<Complex64> = generator_eigenvalues(&one).unwrap().iter().map(|z| z * 3.0).collect();
    let mut b = generator_eigenvalues(&nine).unwrap();
    let key = |z: &Complex64| (z.re * 1e6).round() as i64 * 1_000_000_000 + (z.im * 1e3).round() as i64;
    a.sort_by_key(key);
    b.sort_by_key(key);
    let worst = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    assert!(worst < 1e-8, "{worst}");
}

#[test]
fn abscissa_scaling_in_both_regimes() {
    for mu in [2.0, 0.5] {
        let base = spectral_abscissa(&mode_operators(imu(mu), 1.0, 65, Grid::Auto).unwrap())
            .unwrap()
            .re;
        for k in [4.0, 16.0, 64.0] {
            let a = spectral_abscissa(&mode_operators(imu(mu), k, 65, Grid::Auto).unwrap())
                .unwrap()
                .re;
            assert!(
                (a - k.sqrt() * base).abs() <= 0.01 * a.abs().max(1e-6),
                "mu {mu} kappa {k}: {a} vs {base}"
            );
        }
    }
}
