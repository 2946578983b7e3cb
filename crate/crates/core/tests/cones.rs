use hypersym::geometry::{classify_manifold, ConeOptions, Decision, ManifoldChart, ManifoldClass, PropagationCone};
use hypersym::phase::PhaseVector;
use hypersym::poly::{HomogeneousPolynomial, Poly};
use hypersym::Error;

// phase variables (t, x, tau, xi)
fn v(k: usize) -> Poly {
    Poly::var(4, k)
}

fn homogeneous(p: Poly) -> HomogeneousPolynomial {
    let names = ["dt", "dx", "dtau", "dxi"].map(String::from).to_vec();
    HomogeneousPolynomial::new(names, p, 1e-14).unwrap()
}

fn cone(p: &HomogeneousPolynomial, coords: &[usize]) -> hypersym::Result<PropagationCone> {
    let chart = ManifoldChart::coordinate(1, coords)?;
    PropagationCone::new(
        p,
        &PhaseVector::tau_direction(1),
        &chart,
        &[0.0; 4],
        ConeOptions::default(),
    )
}

#[test]
fn symplectic_chart_meets_cone_trivially() {
    // Sigma = {tau = t = 0}, p = dtau^2 - dt^2
    let p = homogeneous(&(&v(2) * &v(2)) - &(&v(0) * &v(0)));
    let chart = ManifoldChart::coordinate(1, &[2, 0]).unwrap();
    assert_eq!(classify_manifold(&chart, &[0.0; 4]).unwrap(), ManifoldClass::Symplectic);
    let rep = cone(&p, &[2, 0]).unwrap().inclusion_report();
    assert_eq!(rep.c_in_sigma_orth, Decision::Yes);
    assert_eq!(rep.c_meets_tangent, Decision::No);
    assert!(rep.tangent_witness.is_none());
}

#[test]
fn involutive_chart_contains_cone() {
    // Sigma = {tau = xi = 0}, p = dtau^2 - dxi^2
    let p = homogeneous(&(&v(2) * &v(2)) - &(&v(3) * &v(3)));
    let chart = ManifoldChart::coordinate(1, &[2, 3]).unwrap();
    assert_eq!(classify_manifold(&chart, &[0.0; 4]).unwrap(), ManifoldClass::Involutive);
    let rep = cone(&p, &[2, 3]).unwrap().inclusion_report();
    assert_eq!(rep.c_subset_tangent, Decision::Yes);
}

#[test]
fn polynomial_depending_on_tangent_directions_is_rejected() {
    // Sigma = {x = xi = 0} has dtau tangent, but p depends on dtau
    let p = homogeneous(&(&(&v(2) * &v(2)) - &(&v(3) * &v(3))) - &(&v(1) * &v(1)));
    assert!(matches!(cone(&p, &[1, 3]), Err(Error::Inconsistent(_))));
}
