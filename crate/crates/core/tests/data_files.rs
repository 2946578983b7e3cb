use std::collections::HashMap;
use std::path::PathBuf;

use num_complex::Complex64;

use hypersym::geometry::{classify_manifold, ManifoldChart, ManifoldClass};
use hypersym::localize::characteristic_data;
use hypersym::modela::build_system;
use hypersym::phase::CotangentPoint;
use hypersym::symbol::SystemSymbol;
use hypersym::Error;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn same_symbol(a: &SystemSymbol, b: &SystemSymbol) -> bool {
    let (pa, pb) = (a.symbol_poly(), b.symbol_poly());
    (0..3).all(|i| (0..3).all(|j| pa.entry(i, j).max_coeff_diff(pb.entry(i, j)) < 1e-14))
}

#[test]
fn bundled_model_matches_builder() {
    let sys = SystemSymbol::from_file(data("la.sys"), &HashMap::new()).unwrap();
    assert_eq!(sys.phase_names(), ["t", "x", "y", "tau", "xi", "eta"]);
    assert!(same_symbol(&sys, &build_system(Complex64::new(0.0, 2.0))));

    let mut over = HashMap::new();
    over.insert("a".to_string(), Complex64::new(1.0, 1.0));
    let sys = SystemSymbol::from_file(data("la.sys"), &over).unwrap();
    assert!(same_symbol(&sys, &build_system(Complex64::new(1.0, 1.0))));
}

#[test]
fn bundled_chart_is_neither() {
    let chart = ManifoldChart::from_file(data("la.chart")).unwrap();
    let class = classify_manifold(&chart, &[0.5, 0.0, 1.0, 0.0, 0.0, 2.0]).unwrap();
    assert_eq!(class, ManifoldClass::Neither);
    assert_eq!(class.to_string(), "neither involutive nor symplectic");
}

#[test]
fn jordan_system_violates_semisimplicity() {
    let sys = SystemSymbol::from_file(data("jordan.sys"), &HashMap::new()).unwrap();
    let rho = CotangentPoint::new(0.0, vec![0.0], 0.0, vec![1.0]).unwrap();
    assert!(matches!(
        characteristic_data(&sys, &rho),
        Err(Error::Semisimplicity { .. })
    ));
}

#[test]
fn missing_file_is_a_config_error() {
    let e = SystemSymbol::from_file(data("nope.sys"), &HashMap::new()).unwrap_err();
    assert!(matches!(e, Error::Config(_)));
}
