//! Characteristic points, localized systems, transversal strict
//! hyperbolicity, diagonalizability and symmetrizer probes, and vanishing
//! orders of cofactor terms.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::ManifoldChart;
#[cfg(test)]
use crate::linalg::ONE;
use crate::linalg::{self, CMat};
use crate::phase::{mom_index, CotangentPoint, PhaseVector};
use crate::poly::{adjugate, HomogeneousPolynomial, Poly, PolyMatrix};
use crate::symbol::{eigen_report, eigen_structure, eval_symbol, SystemSymbol, MAX_EXACT_DIM};
use crate::tolerances::{
    EIGEN_CLUSTER_REL, ORDER_FIT_RESIDUAL, ORDER_FLOOR, POLY_COEFF, RANK_REL, ROOT_GAP_REL, ROOT_IMAG_REL,
};

#[derive(Clone, Debug)]
pub struct CharacteristicData {
    pub rho: CotangentPoint,
    pub multiplicity: usize,
    /// Orthonormal basis of `ker L(rho)` (N x r).
    pub kernel: CMat,
    /// `r x N` map with `cokernel * L(rho) = 0` and `cokernel * kernel = I`.
    pub cokernel: CMat,
}

pub fn characteristic_data(sys: &SystemSymbol, rho: &CotangentPoint) -> Result<CharacteristicData> {
    let l = eval_symbol(sys, rho)?;
    let n = sys.dimension();
    let sv = linalg::singular_values(&l);
    let smax = sv.first().copied().unwrap_or(0.0);
    let r = sv.iter().filter(|&&s| s <= RANK_REL * smax).count();
    if r == 0 {
        return Err(Error::Domain(format!("{rho} is not characteristic")));
    }
    // tau must be an eigenvalue of A(t,x,xi) whose algebraic multiplicity
    // equals dim ker L(rho).
    let rep = eigen_structure(sys, rho.t, &rho.x, &rho.xi)?;
    let scale = sys.principal_matrix(rho.t, &rho.x, &rho.xi)?.norm().max(rho.tau.abs());
    let tol = (EIGEN_CLUSTER_REL * scale).max(1e-12 * scale);
    if let Some(k) = rep
        .eigenvalues
        .iter()
        .position(|&e| (e - rho.tau).abs() <= tol.max(f64::MIN_POSITIVE))
    {
        if rep.alg_mult[k] > r {
            return Err(Error::Semisimplicity {
                eigenvalue: rho.tau,
                alg: rep.alg_mult[k],
                geom: r,
            });
        }
    }
    let (kernel, left) = if r == n {
        (CMat::identity(n, n), CMat::identity(n, n))
    } else {
        (linalg::null_space(&l, RANK_REL), linalg::left_null_space(&l, RANK_REL))
    };
    let pairing = left.adjoint() * &kernel;
    if linalg::condition_number(&pairing) > 1e10 {
        return Err(Error::Semisimplicity {
            eigenvalue: rho.tau,
            alg: n - linalg::rank(&l, RANK_REL) + 1,
            geom: r,
        });
    }
    let inv = pairing
        .try_inverse()
        .ok_or_else(|| Error::Numerical("kernel/cokernel pairing not invertible".into()))?;
    let cokernel = inv * left.adjoint();
    Ok(CharacteristicData {
        rho: rho.clone(),
        multiplicity: r,
        kernel,
        cokernel,
    })
}

#[derive(Clone, Debug)]
pub struct LocalizedSystem {
    pub base: CharacteristicData,
    /// `M_k = cokernel (dL/drho_k)(rho) kernel`, one per phase coordinate.
    pub maps: Vec<CMat>,
    /// `det sum_k drho_k M_k`, homogeneous of degree r.
    pub det_poly: HomogeneousPolynomial,
}

impl LocalizedSystem {
    pub fn space_dim(&self) -> usize {
        self.base.rho.space_dim()
    }

    /// `L_rho(v) = sum_k v_k M_k`.
    pub fn apply(&self, v: &PhaseVector) -> CMat {
        let r = self.base.multiplicity;
        let mut m = CMat::zeros(r, r);
        for (mk, &vk) in self.maps.iter().zip(v.as_slice()) {
            m += mk * linalg::re(vk);
        }
        m
    }
}

/// Names of the phase increments, `d<name>`.
pub fn increment_names(sys: &SystemSymbol) -> Vec<String> {
    sys.phase_names().iter().map(|s| format!("d{s}")).collect()
}

pub fn localize(sys: &SystemSymbol, rho: &CotangentPoint, chart: Option<&ManifoldChart>) -> Result<LocalizedSystem> {
    let base = characteristic_data(sys, rho)?;
    localize_with(sys, base, chart)
}

/// Localization from given characteristic data (any kernel basis).
pub fn localize_with(
    sys: &SystemSymbol,
    base: CharacteristicData,
    chart: Option<&ManifoldChart>,
) -> Result<LocalizedSystem> {
    let z = base.rho.coords();
    if let Some(ch) = chart {
        let res = ch.residual(&z);
        if res > 1e-8 * (1.0 + z.iter().map(|v| v.abs()).fold(0.0, f64::max)) {
            return Err(Error::Domain(format!("base point is off the chart (residual {res:e})")));
        }
    }
    let nv = z.len();
    let sym = sys.symbol_poly();
    let maps: Vec<CMat> = (0..nv)
        .map(|k| {
            let mut orders = vec![0u32; nv];
            orders[k] = 1;
            let dl = sym.derivative_multi(&orders).eval_real(&z);
            &base.cokernel * dl * &base.kernel
        })
        .collect();
    let r = base.multiplicity;
    let rows: Vec<Vec<Poly>> = (0..r)
        .map(|i| {
            (0..r)
                .map(|j| {
                    let coeffs: Vec<Complex64> = maps.iter().map(|m| m[(i, j)]).collect();
                    Poly::linear(&coeffs)
                })
                .collect()
        })
        .collect();
    let det = PolyMatrix::from_rows(rows)?.determinant();
    let scale = det.max_abs_coeff().max(f64::MIN_POSITIVE);
    let det_poly =
        HomogeneousPolynomial::new(increment_names(sys), det.pruned(POLY_COEFF * scale), POLY_COEFF * scale)?;
    Ok(LocalizedSystem { base, maps, det_poly })
}

#[derive(Clone, Debug)]
pub struct TshReport {
    pub verdict: bool,
    /// Failing transverse direction, if any.
    pub witness: Option<PhaseVector>,
    pub samples: usize,
    /// Smallest relative root gap over all samples.
    pub min_gap: f64,
}

/// Roots of `s -> p(v + s theta)` when they are real and pairwise distinct.
pub fn distinct_real_roots(p: &Poly, v: &[f64], theta: &[f64]) -> Result<Option<Vec<f64>>> {
    let coeffs = p.restrict_to_line(v, theta);
    let roots = linalg::poly_roots(&coeffs)?;
    let scale = roots.iter().fold(1.0f64, |a, r| a.max(r.norm()));
    if roots.iter().any(|r| r.im.abs() > ROOT_IMAG_REL * scale) {
        return Ok(None);
    }
    let mut re: Vec<f64> = roots.iter().map(|r| r.re).collect();
    re.sort_by(f64::total_cmp);
    if re.windows(2).any(|w| w[1] - w[0] <= ROOT_GAP_REL * scale) {
        return Ok(None);
    }
    Ok(Some(re))
}

/// Samples transverse directions `v` (Euclidean complement of `T Sigma`) and
/// requires `s -> det_poly(v + s dtau)` to have `r` distinct real roots.
pub fn transversal_strict_hyperbolicity(
    lp: &LocalizedSystem,
    tangent_basis: &[PhaseVector],
    samples: usize,
    seed: u64,
) -> Result<TshReport> {
    let d = lp.space_dim();
    let n = 2 * d + 2;
    let p = lp.det_poly.poly();
    let r = lp.det_poly.degree() as usize;
    let scale = p.max_abs_coeff();
    for t in tangent_basis {
        let dp = p.directional_derivative(t.as_slice());
        if dp.max_abs_coeff() > 1e-8 * scale * t.norm() {
            return Err(Error::Inconsistent(format!(
                "det_poly varies along the tangent direction {t}"
            )));
        }
    }
    let theta = PhaseVector::tau_direction(d);
    if p.eval_real(theta.as_slice()).norm() <= 1e-12 * scale {
        return Err(Error::Domain(
            "det_poly vanishes at dtau: not hyperbolic in time".into(),
        ));
    }
    let tb = DMatrix::from_fn(n, tangent_basis.len(), |i, j| tangent_basis[j].as_slice()[i]);
    let comp = linalg::orthogonal_complement(&tb, RANK_REL);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_gap = f64::INFINITY;
    for _ in 0..samples {
        let c: Vec<f64> = (0..comp.ncols()).map(|_| StandardNormal.sample(&mut rng)).collect();
        let v = &comp * nalgebra::DVector::from_column_slice(&c);
        let v = PhaseVector::from_slice(d, (v.normalize()).as_slice())?;
        match distinct_real_roots(p, v.as_slice(), theta.as_slice())? {
            Some(roots) if roots.len() == r => {
                let sc = roots.iter().fold(1.0f64, |a, x| a.max(x.abs()));
                for w in roots.windows(2) {
                    min_gap = min_gap.min((w[1] - w[0]) / sc);
                }
            }
            _ => {
                return Ok(TshReport {
                    verdict: false,
                    witness: Some(v),
                    samples,
                    min_gap: 0.0,
                })
            }
        }
    }
    Ok(TshReport {
        verdict: true,
        witness: None,
        samples,
        min_gap,
    })
}

/// A query point `(t, x, xi)` for eigenstructure probes.
#[derive(Clone, Debug, PartialEq)]
pub struct SpacePoint {
    pub t: f64,
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct DiagonalizabilityReport {
    pub max_cond: f64,
    pub argmax: Option<usize>,
    /// Indices of points where the eigenvalues are not real and semi-simple.
    pub flagged: Vec<usize>,
}

/// At each point (with `xi` scaled to unit length) builds the matrix of
/// orthonormalized eigenspace bases and records its condition number.
pub fn uniform_diagonalizability_probe(sys: &SystemSymbol, points: &[SpacePoint]) -> Result<DiagonalizabilityReport> {
    let mut max_cond = 0.0f64;
    let mut argmax = None;
    let mut flagged = Vec::new();
    for (k, pt) in points.iter().enumerate() {
        let nxi = pt.xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        let xi: Vec<f64> = if nxi > 0.0 {
            pt.xi.iter().map(|v| v / nxi).collect()
        } else {
            pt.xi.clone()
        };
        let rep = eigen_structure(sys, pt.t, &pt.x, &xi)?;
        if !rep.semisimple {
            flagged.push(k);
            continue;
        }
        let n = sys.dimension();
        let mut v = CMat::zeros(n, n);
        let mut col = 0;
        for b in &rep.kernel_basis {
            for c in 0..b.ncols() {
                v.set_column(col, &b.column(c));
                col += 1;
            }
        }
        let cond = linalg::condition_number(&v);
        if cond > max_cond || argmax.is_none() {
            max_cond = cond;
            argmax = Some(k);
        }
    }
    Ok(DiagonalizabilityReport {
        max_cond,
        argmax,
        flagged,
    })
}

/// Spectral projectors `P_i = V_i (W_i^* V_i)^{-1} W_i^*` of a semi-simple matrix.
pub fn spectral_projectors(a: &CMat) -> Result<Vec<CMat>> {
    let rep = eigen_report(a)?;
    if !rep.semisimple {
        return Err(Error::Semisimplicity {
            eigenvalue: rep.eigenvalues.first().copied().unwrap_or(0.0),
            alg: rep.alg_mult.iter().copied().max().unwrap_or(0),
            geom: rep.geom_mult.iter().copied().min().unwrap_or(0),
        });
    }
    let n = a.nrows();
    let mut out = Vec::with_capacity(rep.eigenvalues.len());
    for (lambda, v) in rep.eigenvalues.iter().zip(&rep.kernel_basis) {
        let shifted = a - CMat::identity(n, n) * linalg::re(*lambda);
        let w = linalg::left_null_space(&shifted, RANK_REL);
        if w.ncols() != v.ncols() {
            return Err(Error::Numerical(
                "left and right eigenspaces differ in dimension".into(),
            ));
        }
        let inv = (w.adjoint() * v)
            .try_inverse()
            .ok_or_else(|| Error::Numerical("eigenspace pairing not invertible".into()))?;
        out.push(v * inv * w.adjoint());
    }
    Ok(out)
}

/// `S = sum_i P_i^* P_i`, which satisfies `S A = A^* S`.
pub fn canonical_symmetrizer(a: &CMat) -> Result<CMat> {
    let n = a.nrows();
    let mut s = CMat::zeros(n, n);
    for p in spectral_projectors(a)? {
        s += p.adjoint() * p;
    }
    Ok(s)
}

#[derive(Clone, Debug)]
pub struct SymmetrizerGap {
    pub gap: f64,
    pub limit1: CMat,
    pub limit2: CMat,
}

/// Extrapolated limits of the canonical symmetrizer along two paths
/// `eps -> (t, x, xi)` at `eps = 2^-k`, `k` in `levels`, and their distance
/// in the Frobenius norm.
pub fn symmetrizer_discontinuity_probe(
    sys: &SystemSymbol,
    path1: &dyn Fn(f64) -> SpacePoint,
    path2: &dyn Fn(f64) -> SpacePoint,
    levels: std::ops::RangeInclusive<i32>,
) -> Result<SymmetrizerGap> {
    let limit = |path: &dyn Fn(f64) -> SpacePoint| -> Result<CMat> {
        let mut seq = Vec::new();
        for k in levels.clone() {
            let pt = path(0.5f64.powi(k));
            let a = sys.principal_matrix(pt.t, &pt.x, &pt.xi)?;
            seq.push(canonical_symmetrizer(&a)?);
        }
        if seq.len() < 3 {
            return Err(Error::Config("need at least three path levels".into()));
        }
        let ext: Vec<CMat> = seq.windows(2).map(|w| &w[1] * linalg::re(2.0) - &w[0]).collect();
        let m = ext.len();
        let diff = (&ext[m - 1] - &ext[m - 2]).norm();
        let scale = ext[m - 1].norm().max(1.0);
        if diff > 1e-6 * scale {
            let history: Vec<String> = ext.iter().map(|e| format!("{:.6e}", e.norm())).collect();
            return Err(Error::Extrapolation(format!(
                "successive limits differ by {diff:e}; extrapolant norms {}",
                history.join(", ")
            )));
        }
        Ok(ext[m - 1].clone())
    };
    let limit1 = limit(path1)?;
    let limit2 = limit(path2)?;
    Ok(SymmetrizerGap {
        gap: (&limit1 - &limit2).norm(),
        limit1,
        limit2,
    })
}

/// Adjugate of `L(rho)`, so that `L M = det L I`.
pub fn cofactor_symbol(sys: &SystemSymbol, rho: &CotangentPoint) -> Result<CMat> {
    let n = sys.dimension();
    if n > MAX_EXACT_DIM {
        return Err(Error::Config(format!(
            "cofactor expansion limited to N <= {MAX_EXACT_DIM}"
        )));
    }
    let l = eval_symbol(sys, rho)?;
    let rows: Vec<Vec<Complex64>> = (0..n).map(|i| l.row(i).iter().copied().collect()).collect();
    let adj = adjugate(&rows);
    Ok(CMat::from_fn(n, n, |i, j| adj[i][j]))
}

/// Symbolic adjugate of the principal symbol in the phase variables.
pub fn cofactor_poly(sys: &SystemSymbol) -> Result<PolyMatrix> {
    if sys.dimension() > MAX_EXACT_DIM {
        return Err(Error::Config(format!(
            "cofactor expansion limited to N <= {MAX_EXACT_DIM}"
        )));
    }
    Ok(sys.symbol_poly().adjugate())
}

fn factorial_free_terms(sys: &SystemSymbol, m: &PolyMatrix, j: u32) -> PolyMatrix {
    // T_j = (-i)^j sum_{l + |alpha| = j} d_t^l d_x^alpha (L + B) d_tau^l d_xi^alpha M
    let d = sys.space_dim();
    let nv = 2 * d + 2;
    let full = sys.full_symbol_poly();
    let n = sys.dimension();
    let mut acc = PolyMatrix::zeros(n, nv);
    for alpha in multi_indices(d + 1, j) {
        let mut pos = vec![0u32; nv];
        let mut mom = vec![0u32; nv];
        for (k, &a) in alpha.iter().enumerate() {
            pos[k] = a;
            mom[mom_index(d, k)] = a;
        }
        let left = full.derivative_multi(&pos);
        if left.is_zero() {
            continue;
        }
        let right = m.derivative_multi(&mom);
        acc = acc.add(&left.mul(&right));
    }
    let phase = Complex64::new(0.0, -1.0).powu(j);
    acc.scale(phase)
}

fn multi_indices(len: usize, total: u32) -> Vec<Vec<u32>> {
    if len == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in multi_indices(len - 1, total - first) {
            let mut v = vec![first];
            v.append(&mut rest);
            out.push(v);
        }
    }
    out
}

/// Terms `P_{r-j}`, `j = 0, 1, 2`, of the composition `(L + B) M`: the sum
/// `sum_j T_j` split by homogeneity degree in the momenta.
pub fn composition_terms(sys: &SystemSymbol) -> Result<Vec<PolyMatrix>> {
    let m = cofactor_poly(sys)?;
    let d = sys.space_dim();
    let nv = 2 * d + 2;
    let r = sys.dimension() as u32;
    let total = (0..=2u32).fold(PolyMatrix::zeros(sys.dimension(), nv), |acc, j| {
        acc.add(&factorial_free_terms(sys, &m, j))
    });
    let mask: Vec<bool> = (0..nv).map(|k| k > d).collect();
    Ok((0..=2u32)
        .map(|j| total.map(|p| p.homogeneous_part(&mask, r.saturating_sub(j))))
        .collect())
}

#[derive(Clone, Debug)]
pub struct OrderFit {
    /// Rounded slope; `None` when the function vanishes along the ray.
    pub order: Option<u32>,
    pub slope: f64,
    pub residual: f64,
    pub reliable: bool,
    /// `(s, |f|)` pairs used in the fit.
    pub samples: Vec<(f64, f64)>,
}

/// Dyadic ladder `s = 2^-3 .. 2^-12`.
pub fn default_ladder() -> Vec<f64> {
    (3..=12).map(|k| 0.5f64.powi(k)).collect()
}

/// Least-squares slope of `log |f(rho + s v)|` against `log s`.
pub fn vanishing_order(
    f: &dyn Fn(&[f64]) -> f64,
    chart: Option<&ManifoldChart>,
    rho: &[f64],
    v: &[f64],
    ladder: &[f64],
) -> Result<OrderFit> {
    if rho.len() != v.len() {
        return Err(Error::Config("point and direction differ in dimension".into()));
    }
    if let Some(ch) = chart {
        if ch.residual(rho) > 1e-10 {
            return Err(Error::Domain("base point is not on the chart".into()));
        }
        let g = ch.gradient_matrix(rho);
        let dv = &g * nalgebra::DVector::from_column_slice(v);
        if dv.norm() <= 1e-10 * g.norm() * v.iter().map(|x| x * x).sum::<f64>().sqrt() {
            return Err(Error::Domain("direction is tangent to the chart".into()));
        }
    }
    let mut samples = Vec::new();
    for &s in ladder {
        let z: Vec<f64> = rho.iter().zip(v).map(|(a, b)| a + s * b).collect();
        let val = f(&z).abs();
        if val >= ORDER_FLOOR {
            samples.push((s, val));
        }
    }
    if samples.is_empty() {
        return Ok(OrderFit {
            order: None,
            slope: f64::INFINITY,
            residual: 0.0,
            reliable: true,
            samples,
        });
    }
    if samples.len() < 3 {
        return Ok(OrderFit {
            order: None,
            slope: f64::NAN,
            residual: f64::INFINITY,
            reliable: false,
            samples,
        });
    }
    let xs: Vec<f64> = samples.iter().map(|(s, _)| s.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|(_, f)| f.ln()).collect();
    let (slope, intercept) = least_squares(&xs, &ys);
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum::<f64>()
        / xs.len() as f64)
        .sqrt();
    let rounded = slope.round().max(0.0) as u32;
    Ok(OrderFit {
        order: Some(rounded),
        slope,
        residual,
        reliable: residual <= ORDER_FIT_RESIDUAL && (slope - slope.round()).abs() < 0.25,
        samples,
    })
}

pub(crate) fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Frobenius norm of a polynomial matrix at a point.
pub fn poly_matrix_norm(m: &PolyMatrix, z: &[f64]) -> f64 {
    m.eval_real(z).norm()
}

/// Orthonormal kernel basis rotated by a random unitary, for invariance checks.
pub fn rotate_kernel(data: &CharacteristicData, seed: u64) -> CharacteristicData {
    let r = data.multiplicity;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = CMat::from_fn(r, r, |_, _| {
        Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
    });
    let q = g.qr().q();
    let kernel = &data.kernel * &q;
    let cokernel = q.adjoint() * &data.cokernel;
    CharacteristicData {
        rho: data.rho.clone(),
        multiplicity: r,
        kernel,
        cokernel,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_check(data: &CharacteristicData) -> f64 {
        (&data.cokernel * &data.kernel - CMat::identity(data.multiplicity, data.multiplicity) * ONE).norm()
    }
    use crate::modela::build_system;

    fn rho(t: f64, x: f64, y: f64, tau: f64, xi: f64, eta: f64) -> CotangentPoint {
        CotangentPoint::new(t, vec![x, y], tau, vec![xi, eta]).unwrap()
    }

    #[test]
    fn characteristic_data_examples() {
        let sys = build_system(Complex64::new(0.0, 2.0));
        let cd = characteristic_data(&sys, &rho(0.1, 0.0, 0.2, 0.0, 0.0, 1.0)).unwrap();
        assert_eq!(cd.multiplicity, 3);
        assert_eq!(cd.kernel, CMat::identity(3, 3));

        let cd = characteristic_data(&sys, &rho(0.0, 0.0, 0.0, 1.0, 1.0, 0.0)).unwrap();
        assert_eq!(cd.multiplicity, 1);
        let k = cd.kernel.column(0);
        let phase = k[0] / k[0].norm();
        let s = 1.0 / 2f64.sqrt();
        assert!((k[0] / phase - linalg::re(s)).norm() < 1e-12);
        assert!((k[1] / phase - linalg::re(s)).norm() < 1e-12);
        assert!(k[2].norm() < 1e-12);
        assert!(identity_check(&cd) < 1e-12);

        let e = characteristic_data(&sys, &rho(0.0, 0.0, 0.0, 1.0, 0.0, 1.0)).unwrap_err();
        assert!(matches!(e, Error::Domain(_)));
    }

    #[test]
    fn jordan_point_is_a_semisimplicity_violation() {
        let m = CMat::from_row_slice(2, 2, &[linalg::ZERO, ONE, linalg::ZERO, linalg::ZERO]);
        let sys = SystemSymbol::new("jordan", vec![crate::symbol::constant_matrix(&m, 2)], None).unwrap();
        let e = characteristic_data(&sys, &CotangentPoint::new(0.0, vec![0.0], 0.0, vec![1.0]).unwrap()).unwrap_err();
        assert!(matches!(e, Error::Semisimplicity { alg: 2, geom: 1, .. }), "{e}");
    }

    #[test]
    fn la_localization_determinant() {
        let sys = build_system(Complex64::new(0.0, 2.0));
        let eta = 1.7;
        let lp = localize(&sys, &rho(0.3, 0.0, -1.0, 0.0, 0.0, eta), None).unwrap();
        let p = lp.det_poly.poly();
        assert_eq!(lp.det_poly.degree(), 3);
        let c = |e: [u32; 6]| p.coefficient(&e);
        assert!((c([0, 0, 0, 3, 0, 0]) - ONE).norm() < 1e-12);
        assert!((c([0, 0, 0, 1, 2, 0]) + ONE).norm() < 1e-12);
        assert!((c([0, 2, 0, 1, 0, 0]) + linalg::re(eta * eta)).norm() < 1e-12);
        assert_eq!(p.num_terms(), 3);
    }

    #[test]
    fn simple_point_localizes_to_degree_one() {
        // diag(1, -1) wave system: det = tau^2 - xi^2
        let m = CMat::from_row_slice(2, 2, &[ONE, linalg::ZERO, linalg::ZERO, -ONE]);
        let sys = SystemSymbol::new("wave", vec![crate::symbol::constant_matrix(&m, 2)], None).unwrap();
        let lp = localize(
            &sys,
            &CotangentPoint::new(0.0, vec![0.0], 1.0, vec![1.0]).unwrap(),
            None,
        )
        .unwrap();
        assert_eq!(lp.det_poly.degree(), 1);
        assert!(lp.det_poly.poly().coefficient(&[0, 0, 1, 0]).norm() > 0.5);
    }

    #[test]
    fn strict_hyperbolicity_examples() {
        let sys = build_system(Complex64::new(0.0, 0.5));
        let lp = localize(&sys, &rho(0.0, 0.0, 0.0, 0.0, 0.0, 1.0), None).unwrap();
        let tangent = [
            PhaseVector::unit(2, 0),
            PhaseVector::unit(2, 2),
            PhaseVector::unit(2, 5),
        ];
        let rep = transversal_strict_hyperbolicity(&lp, &tangent, 200, 7).unwrap();
        assert!(rep.verdict);

        // a tangent direction the polynomial depends on
        let bad = [PhaseVector::unit(2, 4)];
        assert!(matches!(
            transversal_strict_hyperbolicity(&lp, &bad, 10, 7),
            Err(Error::Inconsistent(_))
        ));
    }

    #[test]
    fn multi_indices_enumerate_compositions() {
        assert_eq!(multi_indices(3, 2).len(), 6);
        assert!(multi_indices(3, 2).iter().all(|a| a.iter().sum::<u32>() == 2));
    }

    #[test]
    fn cofactor_of_la() {
        let sys = build_system(Complex64::new(1.0, 1.0));
        let m = cofactor_poly(&sys).unwrap();
        let tau = Poly::var(6, 3);
        assert!(m.entry(0, 0).max_coeff_diff(&(&tau * &tau)) < 1e-14);
        let r = rho(0.1, 0.7, 0.0, 1.3, -0.4, 2.0);
        let l = eval_symbol(&sys, &r).unwrap();
        let adj = cofactor_symbol(&sys, &r).unwrap();
        let det = crate::symbol::det_symbol(&sys, &r).unwrap();
        assert!((l * adj - CMat::identity(3, 3) * det).norm() < 1e-12 * (1.0 + det.norm()));
    }

    #[test]
    fn order_fit_examples() {
        let z = [0.0, 0.0, 0.0, 0.0, 0.0, 1.0];
        let v = [0.0, 0.0, 0.0, 1.0, 0.0, 0.0];
        let f2 = |p: &[f64]| p[3] * p[3];
        let fit = vanishing_order(&f2, None, &z, &v, &default_ladder()).unwrap();
        assert_eq!(fit.order, Some(2));
        assert!(fit.residual < 1e-10);
        let one = |_: &[f64]| 1.0;
        assert_eq!(
            vanishing_order(&one, None, &z, &v, &default_ladder()).unwrap().order,
            Some(0)
        );
        let zero = |_: &[f64]| 0.0;
        assert_eq!(
            vanishing_order(&zero, None, &z, &v, &default_ladder()).unwrap().order,
            None
        );
    }
}
