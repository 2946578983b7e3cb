//! Symplectic geometry on the cotangent bundle: charts of characteristic
//! manifolds, Poisson brackets, hyperbolicity and propagation cones, and
//! Hamilton flows.
//!
//! Conventions: `sigma(X, Y) = sum_j (dxi_j(X) dx_j(Y) - dx_j(X) dxi_j(Y))`,
//! `H_f = (df/dxi, -df/dx)` so that `sigma(X, H_f) = df(X)`, and
//! `{f, g} = H_f g`. With these, `-H_t = +dtau`.
//!
//! Chart file format:
//!
//! ```text
//! space_dim = 2
//! names = t x y tau xi eta    # optional
//! phi = tau
//! phi = xi
//! phi = x
//! ```

use std::collections::HashMap;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{self, poly_roots};
use crate::phase::{default_names, mom_index, PhaseVector};
use crate::poly::{HomogeneousPolynomial, Poly};
use crate::text::{parse_expr, shift, Document};
use crate::tolerances::{BRACKET_REL, CONE_RAYS, RANK_REL, ROOT_GAP_REL, ROOT_IMAG_REL, SIGMA_SIGN_REL};

pub fn sigma_pairing(x: &PhaseVector, y: &PhaseVector) -> f64 {
    sigma_raw(x.space_dim(), x.as_slice(), y.as_slice())
}

fn sigma_raw(d: usize, x: &[f64], y: &[f64]) -> f64 {
    let mut s = 0.0;
    for j in 0..=d {
        let (p, m) = (j, mom_index(d, j));
        s += x[m] * y[p] - x[p] * y[m];
    }
    s
}

/// Matrix `Omega` with `sigma(X, Y) = X^T Omega Y`.
pub fn sigma_matrix(d: usize) -> DMatrix<f64> {
    let n = 2 * d + 2;
    let mut o = DMatrix::zeros(n, n);
    for j in 0..=d {
        o[(mom_index(d, j), j)] = 1.0;
        o[(j, mom_index(d, j))] = -1.0;
    }
    o
}

fn gradient(f: &Poly, z: &[f64]) -> Vec<f64> {
    (0..f.nvars()).map(|k| f.derivative(k).eval_real(z).re).collect()
}

/// `H_f(rho) = (df/dxi, -df/dx)` in the flat layout.
pub fn hamilton_vector(f: &Poly, d: usize, rho: &[f64]) -> Vec<f64> {
    hamilton_from_gradient(d, &gradient(f, rho))
}

fn hamilton_from_gradient(d: usize, g: &[f64]) -> Vec<f64> {
    let mut h = vec![0.0; 2 * d + 2];
    for j in 0..=d {
        h[j] = g[mom_index(d, j)];
        h[mom_index(d, j)] = -g[j];
    }
    h
}

pub fn poisson_bracket(f: &Poly, g: &Poly, d: usize, rho: &[f64]) -> f64 {
    let hf = hamilton_vector(f, d, rho);
    gradient(g, rho).iter().zip(&hf).map(|(a, b)| a * b).sum()
}

#[derive(Clone, Debug)]
pub struct ManifoldChart {
    d: usize,
    names: Vec<String>,
    phis: Vec<Poly>,
}

impl ManifoldChart {
    pub fn new(d: usize, phis: Vec<Poly>) -> Result<Self> {
        let (pos, mom) = default_names(d);
        Self::with_names(d, phis, pos.into_iter().chain(mom).collect())
    }

    pub fn with_names(d: usize, phis: Vec<Poly>, names: Vec<String>) -> Result<Self> {
        let n = 2 * d + 2;
        if phis.is_empty() {
            return Err(Error::Chart("a chart needs at least one defining function".into()));
        }
        if let Some(p) = phis.iter().find(|p| p.nvars() != n) {
            return Err(Error::Chart(format!(
                "defining function has {} variables, expected {n}",
                p.nvars()
            )));
        }
        if names.len() != n {
            return Err(Error::Chart(format!("expected {n} variable names")));
        }
        Ok(ManifoldChart { d, names, phis })
    }

    /// The chart `{z_k = 0 : k in coords}` of flat coordinate indices.
    pub fn coordinate(d: usize, coords: &[usize]) -> Result<Self> {
        let n = 2 * d + 2;
        Self::new(d, coords.iter().map(|&k| Poly::var(n, k)).collect())
    }

    pub fn parse(src: &str) -> Result<Self> {
        let doc = Document::parse(src)?;
        let d = doc
            .get(None, "space_dim")
            .ok_or_else(|| Error::parse(1, 1, "missing required key 'space_dim'"))?
            .parse_usize()?;
        if d == 0 {
            return Err(Error::parse(1, 1, "space_dim must be positive"));
        }
        let (pos, mom) = default_names(d);
        let mut names: Vec<String> = pos.into_iter().chain(mom).collect();
        if let Some(line) = doc.get(None, "names") {
            let (v, col) = line.value();
            let given: Vec<String> = v.split_whitespace().map(str::to_string).collect();
            if given.len() != 2 * d + 2 {
                return Err(line.err(col, format!("expected {} names", 2 * d + 2)));
            }
            names = given;
        }
        let consts = HashMap::<String, Complex64>::new();
        let mut phis = Vec::new();
        for (line, key, value) in doc.pairs(None) {
            if key == "phi" {
                let (_, col) = line.value();
                phis.push(parse_expr(value, &names, &consts).map_err(|e| shift(e, line.line, col))?);
            }
        }
        Self::with_names(d, phis, names)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let src =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&src)
    }

    pub fn space_dim(&self) -> usize {
        self.d
    }

    pub fn codim(&self) -> usize {
        self.phis.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn defining_functions(&self) -> &[Poly] {
        &self.phis
    }

    /// `max_i |phi_i(rho)|`.
    pub fn residual(&self, rho: &[f64]) -> f64 {
        self.phis.iter().map(|p| p.eval_real(rho).norm()).fold(0.0, f64::max)
    }

    /// Rows are the gradients of the defining functions.
    pub fn gradient_matrix(&self, rho: &[f64]) -> DMatrix<f64> {
        let n = 2 * self.d + 2;
        let mut g = DMatrix::zeros(self.phis.len(), n);
        for (i, p) in self.phis.iter().enumerate() {
            for (k, v) in gradient(p, rho).into_iter().enumerate() {
                g[(i, k)] = v;
            }
        }
        g
    }

    /// Replace `phi` by `R phi`.
    pub fn recombined(&self, r: &DMatrix<f64>) -> Result<Self> {
        if r.nrows() != self.codim() || r.ncols() != self.codim() {
            return Err(Error::Chart("recombination matrix has the wrong size".into()));
        }
        let n = 2 * self.d + 2;
        let phis = (0..self.codim())
            .map(|i| {
                let mut acc = Poly::zero(n);
                for j in 0..self.codim() {
                    acc = &acc + &self.phis[j].scale(linalg::re(r[(i, j)]));
                }
                acc
            })
            .collect();
        Self::with_names(self.d, phis, self.names.clone())
    }
}

#[derive(Clone, Debug)]
pub struct TangentSpaces {
    /// Orthonormal basis of `T_rho Sigma` (columns).
    pub tangent: DMatrix<f64>,
    /// Orthonormal basis of `(T_rho Sigma)^sigma`, the span of the Hamilton
    /// vectors of the defining functions (columns).
    pub sigma_orth: DMatrix<f64>,
}

impl TangentSpaces {
    pub fn tangent_vectors(&self, d: usize) -> Vec<PhaseVector> {
        columns(&self.tangent, d)
    }

    pub fn sigma_orth_vectors(&self, d: usize) -> Vec<PhaseVector> {
        columns(&self.sigma_orth, d)
    }
}

fn columns(m: &DMatrix<f64>, d: usize) -> Vec<PhaseVector> {
    m.column_iter()
        .map(|c| PhaseVector::from_slice(d, c.as_slice()).expect("matching dimension"))
        .collect()
}

pub fn tangent_space(chart: &ManifoldChart, rho: &[f64]) -> Result<TangentSpaces> {
    let d = chart.d;
    let g = chart.gradient_matrix(rho);
    let k = chart.codim();
    if linalg::rank(&g, RANK_REL) < k {
        return Err(Error::Chart(format!(
            "gradients of the {k} defining functions are linearly dependent"
        )));
    }
    let tangent = linalg::null_space(&g, RANK_REL);
    let mut ham = DMatrix::zeros(2 * d + 2, k);
    for i in 0..k {
        let h = hamilton_from_gradient(d, g.row(i).iter().copied().collect::<Vec<_>>().as_slice());
        for (r, v) in h.into_iter().enumerate() {
            ham[(r, i)] = v;
        }
    }
    let sigma_orth = linalg::orthonormalize(&ham, RANK_REL);
    Ok(TangentSpaces { tangent, sigma_orth })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ManifoldClass {
    Involutive,
    Symplectic,
    Neither,
}

impl std::fmt::Display for ManifoldClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ManifoldClass::Involutive => "involutive",
            ManifoldClass::Symplectic => "symplectic",
            ManifoldClass::Neither => "neither involutive nor symplectic",
        })
    }
}

pub fn classify_manifold(chart: &ManifoldChart, rho: &[f64]) -> Result<ManifoldClass> {
    let d = chart.d;
    let spaces = tangent_space(chart, rho)?;
    let g = chart.gradient_matrix(rho);
    let k = chart.codim();
    let mut involutive = true;
    for i in 0..k {
        for j in (i + 1)..k {
            let b = poisson_bracket(&chart.phis[i], &chart.phis[j], d, rho);
            let scale = g.row(i).norm() * g.row(j).norm();
            if b.abs() > BRACKET_REL * scale {
                involutive = false;
            }
        }
    }
    if involutive {
        return Ok(ManifoldClass::Involutive);
    }
    let t = &spaces.tangent;
    let gram = t.transpose() * sigma_matrix(d) * t;
    let m = gram.nrows();
    if m == 0 || linalg::rank(&gram, RANK_REL) == m {
        Ok(ManifoldClass::Symplectic)
    } else {
        Ok(ManifoldClass::Neither)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Membership {
    /// Inside the cone with margin.
    Interior,
    /// On the boundary within tolerance.
    Boundary,
    Outside,
    /// Sampling could not settle the sign.
    Indeterminate,
}

impl Membership {
    /// Member of the closed cone.
    pub fn in_closure(self) -> bool {
        matches!(self, Membership::Interior | Membership::Boundary)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    Yes,
    No,
    Indeterminate,
}

impl std::fmt::Display for Decision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Decision::Yes => "true",
            Decision::No => "false",
            Decision::Indeterminate => "indeterminate",
        })
    }
}

fn check_direction(p: &HomogeneousPolynomial, theta: &[f64]) -> Result<()> {
    let n = p.poly().nvars();
    if theta.len() != n {
        return Err(Error::Config(format!(
            "direction has {} components, polynomial has {n} variables",
            theta.len()
        )));
    }
    let ptheta = p.eval_real(theta).norm();
    let tn = theta.iter().map(|v| v * v).sum::<f64>().sqrt();
    if ptheta <= 1e-12 * p.poly().max_abs_coeff() * tn.powi(p.degree() as i32) {
        return Err(Error::Domain(
            "p(theta) = 0: polynomial is not hyperbolic in direction theta".into(),
        ));
    }
    Ok(())
}

/// Real parts of the roots of `s -> p(base + s dir)`; errors when a root is
/// not real, i.e. `p` is not hyperbolic with respect to `dir`.
fn real_roots_on_line(p: &Poly, base: &[f64], dir: &[f64]) -> Result<Vec<f64>> {
    let coeffs = p.restrict_to_line(base, dir);
    let roots = poly_roots(&coeffs)?;
    let scale = roots.iter().fold(1.0f64, |a, r| a.max(r.norm()));
    if let Some(r) = roots.iter().find(|r| r.im.abs() > ROOT_IMAG_REL.sqrt() * scale) {
        return Err(Error::Inconsistent(format!(
            "non-real root {r} on a line parallel to theta"
        )));
    }
    Ok(roots.iter().map(|r| r.re).collect())
}

/// `X in Gamma` iff every root of `s -> p(X + s theta)` is negative. A zero
/// root (within tolerance) gives `Boundary`, which is not a member of the
/// open cone.
pub fn hyperbolicity_cone_membership(
    p: &HomogeneousPolynomial,
    theta: &PhaseVector,
    x: &PhaseVector,
) -> Result<Membership> {
    check_direction(p, theta.as_slice())?;
    let roots = real_roots_on_line(p.poly(), x.as_slice(), theta.as_slice())?;
    let top = roots.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = ROOT_GAP_REL * x.norm().max(f64::MIN_POSITIVE) / theta.norm();
    Ok(if roots.is_empty() || top < -tol {
        Membership::Interior
    } else if top <= tol {
        Membership::Boundary
    } else {
        Membership::Outside
    })
}

#[derive(Clone, Debug)]
pub struct ConeOptions {
    pub rays: usize,
    pub seed: u64,
    /// Sign tolerance relative to `|X| |Y|`.
    pub tol: f64,
    /// Objective evaluations allowed per membership query.
    pub max_evals: usize,
}

impl Default for ConeOptions {
    fn default() -> Self {
        ConeOptions {
            rays: CONE_RAYS,
            seed: 0,
            tol: SIGMA_SIGN_REL,
            max_evals: 20_000,
        }
    }
}

/// The sigma-polar `C = {X : sigma(X, Y) <= 0 for all Y in Gamma}` of the
/// hyperbolicity cone of `p`, with the sampled data needed to query it.
#[derive(Clone, Debug)]
pub struct PropagationCone {
    d: usize,
    p: Poly,
    opts: ConeOptions,
    tangent: DMatrix<f64>,
    lineality: DMatrix<f64>,
    complement: DMatrix<f64>,
    theta_q: Vec<f64>,
    /// Sphere coordinates (in `complement`) of the sampled directions.
    samples: Vec<Vec<f64>>,
    /// Unit boundary rays of Gamma restricted to `complement`.
    rays: Vec<Vec<f64>>,
}

/// Directions `e` with `p(Y + s e) = p(Y)` for all `Y` (orthonormal columns).
pub fn lineality_space(p: &Poly) -> DMatrix<f64> {
    let n = p.nvars();
    let derivs: Vec<Poly> = (0..n).map(|k| p.derivative(k)).collect();
    let mut monos: Vec<Vec<u32>> = derivs.iter().flat_map(|q| q.terms().map(|(e, _)| e.clone())).collect();
    monos.sort();
    monos.dedup();
    if monos.is_empty() {
        return DMatrix::identity(n, n);
    }
    let mut m = DMatrix::zeros(2 * monos.len(), n);
    for (k, q) in derivs.iter().enumerate() {
        for (r, e) in monos.iter().enumerate() {
            let c = q.coefficient(e);
            m[(2 * r, k)] = c.re;
            m[(2 * r + 1, k)] = c.im;
        }
    }
    linalg::null_space(&m, RANK_REL)
}

fn sphere_samples(q: usize, m: usize, seed: u64) -> Vec<Vec<f64>> {
    match q {
        0 => Vec::new(),
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..m)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..m)
                .map(|k| {
                    let z = 1.0 - (2.0 * k as f64 + 1.0) / m as f64;
                    let r = (1.0 - z * z).sqrt();
                    let phi = golden * k as f64;
                    vec![r * phi.cos(), r * phi.sin(), z]
                })
                .collect()
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..m)
                .map(|_| {
                    let v: Vec<f64> = (0..q).map(|_| StandardNormal.sample(&mut rng)).collect();
                    normalize(v)
                })
                .collect()
        }
    }
}

fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    v
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn mat_vec(m: &DMatrix<f64>, c: &[f64]) -> Vec<f64> {
    (m * DVector::from_column_slice(c)).as_slice().to_vec()
}

/// Distance from `v` to the column span of the orthonormal basis `b`.
fn dist_to_span(b: &DMatrix<f64>, v: &[f64]) -> f64 {
    let vv = DVector::from_column_slice(v);
    if b.ncols() == 0 {
        return vv.norm();
    }
    (&vv - b * (b.transpose() * &vv)).norm()
}

impl PropagationCone {
    pub fn new(
        p: &HomogeneousPolynomial,
        theta: &PhaseVector,
        chart: &ManifoldChart,
        rho: &[f64],
        opts: ConeOptions,
    ) -> Result<Self> {
        let d = theta.space_dim();
        if chart.space_dim() != d {
            return Err(Error::Config("chart and direction live in different dimensions".into()));
        }
        check_direction(p, theta.as_slice())?;
        let tangent = tangent_space(chart, rho)?.tangent;
        let lineality = lineality_space(p.poly());
        for t in tangent.column_iter() {
            if dist_to_span(&lineality, t.as_slice()) > 1e-8 {
                return Err(Error::Inconsistent(
                    "the localized polynomial depends on a direction tangent to Sigma".into(),
                ));
            }
        }
        let complement = linalg::orthogonal_complement(&lineality, RANK_REL);
        let th = DVector::from_column_slice(theta.as_slice());
        let theta_q = (&complement * (complement.transpose() * th)).as_slice().to_vec();
        let samples = sphere_samples(complement.ncols(), opts.rays, opts.seed);
        let mut cone = PropagationCone {
            d,
            p: p.poly().clone(),
            opts,
            tangent,
            lineality,
            complement,
            theta_q,
            samples: Vec::new(),
            rays: Vec::new(),
        };
        let mut rays = Vec::with_capacity(samples.len());
        let mut kept = Vec::with_capacity(samples.len());
        for c in samples {
            if let Ok(y) = cone.boundary_point(&c) {
                rays.push(normalize(y));
                kept.push(c);
            }
        }
        cone.samples = kept;
        cone.rays = rays;
        Ok(cone)
    }

    pub fn space_dim(&self) -> usize {
        self.d
    }

    /// Directions along which Gamma is a full line.
    pub fn lineality(&self) -> &DMatrix<f64> {
        &self.lineality
    }

    pub fn tangent(&self) -> &DMatrix<f64> {
        &self.tangent
    }

    /// Sampled extreme rays of the transverse part of Gamma.
    pub fn generator_rays(&self) -> Vec<PhaseVector> {
        self.rays
            .iter()
            .map(|r| PhaseVector::from_slice(self.d, r).expect("dimension"))
            .collect()
    }

    /// The point `w + s theta` with `s` the largest root, which lies on the
    /// boundary of Gamma, or `w` itself when `w` is in the closed cone.
    fn boundary_point(&self, c: &[f64]) -> Result<Vec<f64>> {
        let w = mat_vec(&self.complement, c);
        let roots = real_roots_on_line(&self.p, &w, &self.theta_q)?;
        let top = roots.iter().copied().fold(0.0f64, f64::max);
        Ok(w.iter().zip(&self.theta_q).map(|(a, b)| a + top * b).collect())
    }

    fn objective(&self, x: &[f64], c: &[f64]) -> Option<f64> {
        let y = self.boundary_point(c).ok()?;
        let ny = norm(&y);
        (ny > 0.0).then(|| sigma_raw(self.d, x, &y) / ny)
    }

    /// Pattern search over the unit sphere of sample coordinates.
    fn refine(&self, x: &[f64], start: &[f64], budget: &mut usize) -> (f64, bool) {
        let q = start.len();
        let mut c = start.to_vec();
        let Some(mut best) = self.objective(x, &c) else {
            return (f64::NEG_INFINITY, false);
        };
        if q < 2 {
            return (best, true);
        }
        let mut step = 0.05;
        while step > 1e-10 {
            let mut improved = false;
            for i in 0..q {
                for sgn in [1.0, -1.0] {
                    if *budget == 0 {
                        return (best, false);
                    }
                    *budget -= 1;
                    let mut trial = c.clone();
                    trial[i] += sgn * step;
                    let trial = normalize(trial);
                    if let Some(v) = self.objective(x, &trial) {
                        if v > best {
                            best = v;
                            c = trial;
                            improved = true;
                        }
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        (best, true)
    }

    /// Largest normalized pairing `sigma(X, Y) / (|X| |Y|)` over the closure
    /// of Gamma, and whether the local search converged. Assumes `X`
    /// annihilates the lineality space.
    pub fn max_pairing(&self, x: &PhaseVector) -> (f64, bool) {
        let xs = x.as_slice();
        let nx = x.norm();
        let mut scored: Vec<(f64, usize)> = self
            .rays
            .iter()
            .enumerate()
            .map(|(k, y)| (sigma_raw(self.d, xs, y), k))
            .collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut best = f64::NEG_INFINITY;
        let tq = norm(&self.theta_q);
        if tq > 0.0 {
            best = sigma_raw(self.d, xs, &self.theta_q) / tq;
        }
        let mut converged = true;
        let mut budget = self.opts.max_evals;
        for &(_, k) in scored.iter().take(4) {
            let (v, ok) = self.refine(xs, &self.samples[k], &mut budget);
            converged &= ok;
            best = best.max(v);
        }
        (best / nx, converged)
    }

    pub fn membership(&self, x: &PhaseVector) -> Membership {
        self.membership_tol(x, self.opts.tol)
    }

    /// Stage one: `sigma(X, e) = 0` on the lineality space (exact linear
    /// algebra). Stage two: the sign of the largest pairing with Gamma.
    pub fn membership_tol(&self, x: &PhaseVector, tol: f64) -> Membership {
        let nx = x.norm();
        if nx == 0.0 {
            return Membership::Boundary;
        }
        for e in self.lineality.column_iter() {
            if sigma_raw(self.d, x.as_slice(), e.as_slice()).abs() > tol * nx {
                return Membership::Outside;
            }
        }
        let (m, converged) = self.max_pairing(x);
        if m > tol {
            Membership::Outside
        } else if m >= -tol {
            Membership::Boundary
        } else if converged {
            Membership::Interior
        } else {
            Membership::Indeterminate
        }
    }

    /// `{X : sigma(X, e) = 0 for e in the lineality space}` (orthonormal columns).
    fn lineality_polar(&self) -> DMatrix<f64> {
        let omega = sigma_matrix(self.d);
        let rows = (omega * &self.lineality).transpose();
        linalg::null_space(&rows, RANK_REL)
    }

    pub fn inclusion_report(&self) -> ConeInclusionReport {
        let d = self.d;
        let n = 2 * d + 2;
        let polar = self.lineality_polar();
        let in_tangent = |v: &[f64]| dist_to_span(&self.tangent, v) <= 1e-8 * norm(v).max(1.0);
        let is_member = |v: &[f64]| {
            self.membership(&PhaseVector::from_slice(d, v).expect("dimension"))
                .in_closure()
        };

        // Axis directions projected into a subspace, kept when they lie in it.
        let axis_candidates = |basis: &DMatrix<f64>| -> Vec<Vec<f64>> {
            let mut out = Vec::new();
            for k in 0..n {
                let mut e = vec![0.0; n];
                e[k] = 1.0;
                if dist_to_span(basis, &e) < 1e-10 {
                    out.push(e);
                }
            }
            out
        };
        let signed = |vs: &[Vec<f64>]| -> Vec<Vec<f64>> {
            vs.iter()
                .flat_map(|v| [v.clone(), v.iter().map(|x| -x).collect()])
                .collect()
        };
        let pairs = |vs: &[Vec<f64>]| -> Vec<Vec<f64>> {
            let mut out = Vec::new();
            for i in 0..vs.len() {
                for j in (i + 1)..vs.len() {
                    for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                        out.push(vs[i].iter().zip(&vs[j]).map(|(a, b)| si * a + sj * b).collect());
                    }
                }
            }
            out
        };
        let random = |basis: &DMatrix<f64>, count: usize| -> Vec<Vec<f64>> {
            let mut rng = ChaCha8Rng::seed_from_u64(self.opts.seed ^ 0x5eed);
            (0..count)
                .map(|_| {
                    let c: Vec<f64> = (0..basis.ncols()).map(|_| StandardNormal.sample(&mut rng)).collect();
                    mat_vec(basis, &c)
                })
                .collect()
        };

        // C meets T Sigma: search the subspace T Sigma intersected with the polar.
        let omega = sigma_matrix(d);
        let pair_rows = (omega * &self.lineality).transpose() * &self.tangent;
        let v_space = &self.tangent * linalg::null_space(&pair_rows, RANK_REL);
        let (c_meets_tangent, tangent_witness) = if v_space.ncols() == 0 {
            (Decision::No, None)
        } else {
            let mut cands = signed(&axis_candidates(&v_space));
            cands.extend(signed(&columns_vec(&v_space)));
            cands.extend(random(&v_space, 64));
            match cands.into_iter().find(|v| is_member(v)) {
                Some(w) => (Decision::Yes, Some(w)),
                None if v_space.ncols() == 1 => (Decision::No, None),
                None => (Decision::Indeterminate, None),
            }
        };

        // Members outside T Sigma.
        let polar_in_tangent = polar.column_iter().all(|c| in_tangent(c.as_slice()));
        let strict_witness = if polar_in_tangent {
            None
        } else {
            let axes = axis_candidates(&polar);
            let mut cands = signed(&axes);
            cands.extend(pairs(&axes));
            cands.extend(signed(&columns_vec(&polar)));
            cands.extend(random(&polar, 64));
            cands.into_iter().find(|v| !in_tangent(v) && is_member(v))
        };
        let c_subset_tangent = if polar_in_tangent {
            Decision::Yes
        } else if strict_witness.is_some() {
            Decision::No
        } else {
            Decision::Indeterminate
        };
        let strict = match (&strict_witness, c_subset_tangent) {
            (Some(_), _) => Decision::Yes,
            (None, Decision::Yes) => Decision::No,
            _ => Decision::Indeterminate,
        };
        let to_pv = |v: Vec<f64>| PhaseVector::from_slice(d, &v).expect("dimension");
        ConeInclusionReport {
            // Every member annihilates the lineality space, which contains
            // T Sigma (checked at construction).
            c_in_sigma_orth: Decision::Yes,
            c_meets_tangent,
            strict,
            c_subset_tangent,
            tangent_witness: tangent_witness.map(to_pv),
            strict_witness: strict_witness.map(to_pv),
        }
    }
}

fn columns_vec(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.column_iter().map(|c| c.as_slice().to_vec()).collect()
}

pub fn propagation_cone_membership(
    p: &HomogeneousPolynomial,
    theta: &PhaseVector,
    chart: &ManifoldChart,
    rho: &[f64],
    x: &PhaseVector,
) -> Result<Membership> {
    Ok(PropagationCone::new(p, theta, chart, rho, ConeOptions::default())?.membership(x))
}

#[derive(Clone, Debug)]
pub struct ConeInclusionReport {
    /// `C` inside `(T Sigma)^sigma`.
    pub c_in_sigma_orth: Decision,
    /// `C` meets `T Sigma` outside the origin.
    pub c_meets_tangent: Decision,
    /// `C ∩ T Sigma` is a proper subset of `C`.
    pub strict: Decision,
    /// `C` inside `T Sigma`.
    pub c_subset_tangent: Decision,
    pub tangent_witness: Option<PhaseVector>,
    pub strict_witness: Option<PhaseVector>,
}

pub fn cone_inclusion_report(
    p: &HomogeneousPolynomial,
    theta: &PhaseVector,
    chart: &ManifoldChart,
    rho: &[f64],
) -> Result<ConeInclusionReport> {
    Ok(PropagationCone::new(p, theta, chart, rho, ConeOptions::default())?.inclusion_report())
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub points: Vec<Vec<f64>>,
    pub h_values: Vec<f64>,
    /// The gradient of `h` became negligible (multiple characteristic).
    pub stopped_early: bool,
}

/// Gradient polynomials of a Hamiltonian, for repeated field evaluation.
#[derive(Clone, Debug)]
pub struct HamiltonField {
    d: usize,
    h: Poly,
    grad: Vec<Poly>,
}

impl HamiltonField {
    pub fn new(h: &Poly) -> Result<Self> {
        let n = h.nvars();
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::Config(format!("{n} is not a phase-space dimension")));
        }
        Ok(HamiltonField {
            d: n / 2 - 1,
            h: h.clone(),
            grad: (0..n).map(|k| h.derivative(k)).collect(),
        })
    }

    pub fn value(&self, z: &[f64]) -> f64 {
        self.h.eval_real(z).re
    }

    pub fn gradient(&self, z: &[f64]) -> Vec<f64> {
        self.grad.iter().map(|g| g.eval_real(z).re).collect()
    }

    pub fn field(&self, z: &[f64]) -> Vec<f64> {
        hamilton_from_gradient(self.d, &self.gradient(z))
    }
}

pub fn hamilton_field(h: &Poly, rho: &[f64]) -> Result<Vec<f64>> {
    Ok(HamiltonField::new(h)?.field(rho))
}

/// RK4 integration of `z' = H_h(z)`.
pub fn bicharacteristic_flow(h: &Poly, rho0: &[f64], dt: f64, steps: usize) -> Result<Trajectory> {
    let f = HamiltonField::new(h)?;
    if rho0.len() != h.nvars() {
        return Err(Error::Config("starting point has the wrong dimension".into()));
    }
    let g0 = norm(&f.gradient(rho0));
    if g0 == 0.0 {
        return Err(Error::Domain(
            "starting point is a multiple characteristic (grad h = 0)".into(),
        ));
    }
    if f.value(rho0).abs() > 1e-8 * g0 * norm(rho0).max(1.0) {
        return Err(Error::Domain("starting point is not characteristic (h != 0)".into()));
    }
    let mut z = rho0.to_vec();
    let mut points = vec![z.clone()];
    let mut h_values = vec![f.value(&z)];
    let mut stopped_early = false;
    let axpy = |z: &[f64], k: &[f64], s: f64| -> Vec<f64> { z.iter().zip(k).map(|(a, b)| a + s * b).collect() };
    for _ in 0..steps {
        if norm(&f.gradient(&z)) < 1e-12 * g0 {
            stopped_early = true;
            break;
        }
        let k1 = f.field(&z);
        let k2 = f.field(&axpy(&z, &k1, dt / 2.0));
        let k3 = f.field(&axpy(&z, &k2, dt / 2.0));
        let k4 = f.field(&axpy(&z, &k3, dt));
        for i in 0..z.len() {
            z[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::Integration {
                time: dt * points.len() as f64,
                reason: "non-finite state".into(),
            });
        }
        points.push(z.clone());
        h_values.push(f.value(&z));
    }
    Ok(Trajectory {
        points,
        h_values,
        stopped_early,
    })
}

#[derive(Clone, Debug)]
pub struct ScaledLimit {
    /// Unit Hamilton directions at each approach point.
    pub directions: Vec<Vec<f64>>,
    pub limit: PhaseVector,
    pub converged: bool,
    pub membership: Membership,
    /// Largest normalized pairing of the limit with Gamma.
    pub margin: f64,
}

/// Richardson extrapolation of the unit Hamilton directions `H_h(rho_j)/|H_h|`
/// along `rho_j = approach(eps_j)` with `eps_j = eps_0 2^-j`, followed by a
/// closed-cone membership test of the limit.
pub fn scaled_limit_in_cone(
    h: &Poly,
    cone: &PropagationCone,
    approach: &dyn Fn(f64) -> Vec<f64>,
    eps: &[f64],
    tol: f64,
) -> Result<ScaledLimit> {
    if eps.len() < 3 {
        return Err(Error::Config("need at least three approach levels".into()));
    }
    if eps.windows(2).any(|w| ((w[0] / w[1]) - 2.0).abs() > 1e-12) {
        return Err(Error::Config("approach levels must halve at each step".into()));
    }
    let f = HamiltonField::new(h)?;
    let directions: Vec<Vec<f64>> = eps.iter().map(|&e| normalize(f.field(&approach(e)))).collect();
    let (limit, converged) = richardson(&directions);
    let limit = PhaseVector::from_slice(cone.space_dim(), &normalize(limit))?;
    if !converged {
        return Ok(ScaledLimit {
            directions,
            limit,
            converged,
            membership: Membership::Indeterminate,
            margin: f64::NAN,
        });
    }
    let (margin, _) = cone.max_pairing(&limit);
    let membership = cone.membership_tol(&limit, tol);
    Ok(ScaledLimit {
        directions,
        limit,
        converged,
        membership,
        margin,
    })
}

/// Richardson table for sequences with an expansion in powers of `eps`,
/// halving `eps` each level. Returns the last diagonal entry and whether the
/// last two diagonal entries agree to `1e-8`.
pub fn richardson(seq: &[Vec<f64>]) -> (Vec<f64>, bool) {
    let m = seq.len();
    let mut table: Vec<Vec<Vec<f64>>> = vec![seq.to_vec()];
    for j in 1..m {
        let prev = &table[j - 1];
        let f = 2f64.powi(j as i32);
        let next: Vec<Vec<f64>> = (1..prev.len())
            .map(|k| {
                prev[k]
                    .iter()
                    .zip(&prev[k - 1])
                    .map(|(a, b)| (f * a - b) / (f - 1.0))
                    .collect()
            })
            .collect();
        table.push(next);
    }
    let diag: Vec<&Vec<f64>> = table.iter().map(|col| col.last().expect("nonempty")).collect();
    let last = diag[m - 1].clone();
    let prev = diag[m - 2];
    let diff = norm(&last.iter().zip(prev).map(|(a, b)| a - b).collect::<Vec<_>>());
    (last, diff < 1e-8)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn la_det_poly(eta: f64) -> HomogeneousPolynomial {
        // dtau (dtau^2 - dxi^2 - eta^2 dx^2) in (t, x, y, tau, xi, eta)
        let v = |k| Poly::var(6, k);
        let (tau, xi, x) = (v(3), v(4), v(1));
        let inner = &(&(&tau * &tau) - &(&xi * &xi)) - &(&x * &x).scale(linalg::re(eta * eta));
        let names = ["dt", "dx", "dy", "dtau", "dxi", "deta"].map(String::from).to_vec();
        HomogeneousPolynomial::new(names, &tau * &inner, 1e-14).unwrap()
    }

    fn la_chart() -> ManifoldChart {
        ManifoldChart::coordinate(2, &[3, 4, 1]).unwrap()
    }

    #[test]
    fn sigma_examples() {
        let tau = PhaseVector::unit(1, 2);
        let t = PhaseVector::unit(1, 0);
        assert_eq!(sigma_pairing(&tau, &t), 1.0);
        assert_eq!(sigma_pairing(&tau, &tau), 0.0);
        let x1 = PhaseVector::unit(2, 1);
        let xi2 = PhaseVector::unit(2, 5);
        assert_eq!(sigma_pairing(&x1, &xi2), 0.0);
    }

    #[test]
    fn theta_is_minus_hamilton_of_t() {
        let t = Poly::var(4, 0);
        let h = hamilton_vector(&t, 1, &[0.0; 4]);
        assert_eq!(h, vec![0.0, 0.0, -1.0, 0.0]);
    }

    #[test]
    fn tangent_space_of_la_sigma() {
        let sp = tangent_space(&la_chart(), &[0.3, 0.0, 0.1, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(sp.tangent.ncols(), 3);
        assert_eq!(sp.sigma_orth.ncols(), 3);
        for k in [0usize, 2, 5] {
            let mut e = vec![0.0; 6];
            e[k] = 1.0;
            assert!(dist_to_span(&sp.tangent, &e) < 1e-12);
        }
        for k in [0usize, 1, 4] {
            let mut e = vec![0.0; 6];
            e[k] = 1.0;
            assert!(dist_to_span(&sp.sigma_orth, &e) < 1e-12);
        }
    }

    #[test]
    fn degenerate_chart_is_rejected() {
        let tau = Poly::var(4, 2);
        let chart = ManifoldChart::new(1, vec![tau.clone(), tau.scale(linalg::re(2.0))]).unwrap();
        assert!(matches!(tangent_space(&chart, &[0.0; 4]), Err(Error::Chart(_))));
    }

    #[test]
    fn classification_examples() {
        let rho = [0.0, 0.0, 0.0, 0.0, 0.0, 1.0];
        assert_eq!(classify_manifold(&la_chart(), &rho).unwrap(), ManifoldClass::Neither);
        let inv = ManifoldChart::coordinate(2, &[3, 4]).unwrap();
        assert_eq!(classify_manifold(&inv, &rho).unwrap(), ManifoldClass::Involutive);
        let sym = ManifoldChart::coordinate(2, &[1, 4]).unwrap();
        assert_eq!(classify_manifold(&sym, &rho).unwrap(), ManifoldClass::Symplectic);
    }

    #[test]
    fn chart_file_parses() {
        let chart =
            ManifoldChart::parse("space_dim = 2\nnames = t x y tau xi eta\nphi = tau\nphi = xi\nphi = x\n").unwrap();
        assert_eq!(chart.codim(), 3);
        assert_eq!(
            classify_manifold(&chart, &[0.0, 0.0, 0.0, 0.0, 0.0, 1.0]).unwrap(),
            ManifoldClass::Neither
        );
        let e = ManifoldChart::parse("space_dim = 1\nphi = tau + w\n").unwrap_err();
        assert_eq!(e.to_string(), "2:13: unknown identifier 'w'");
    }

    #[test]
    fn hyperbolicity_cone_examples() {
        let p = la_det_poly(1.0);
        let theta = PhaseVector::tau_direction(2);
        let pv = |tau: f64, xi: f64, x: f64| PhaseVector::from_slice(2, &[0.0, x, 0.0, tau, xi, 0.0]).unwrap();
        assert_eq!(
            hyperbolicity_cone_membership(&p, &theta, &theta).unwrap(),
            Membership::Interior
        );
        assert_eq!(
            hyperbolicity_cone_membership(&p, &theta, &pv(2.0, 1.0, 1.0)).unwrap(),
            Membership::Interior
        );
        assert_eq!(
            hyperbolicity_cone_membership(&p, &theta, &pv(1.0, 2.0, 0.0)).unwrap(),
            Membership::Outside
        );
        assert_eq!(
            hyperbolicity_cone_membership(&p, &theta, &pv(1.0, 1.0, 0.0)).unwrap(),
            Membership::Boundary
        );
        let bad = PhaseVector::unit(2, 4);
        assert!(matches!(
            hyperbolicity_cone_membership(&p, &bad, &theta),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn propagation_cone_examples() {
        let p = la_det_poly(1.0);
        let theta = PhaseVector::tau_direction(2);
        let rho = [0.2, 0.0, -0.4, 0.0, 0.0, 1.0];
        let cone = PropagationCone::new(&p, &theta, &la_chart(), &rho, ConeOptions::default()).unwrap();
        let dt = PhaseVector::unit(2, 0);
        let dy = PhaseVector::unit(2, 2);
        let dtdx = PhaseVector::from_slice(2, &[1.0, 1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(cone.membership(&dt), Membership::Interior);
        assert_eq!(cone.membership(&dy), Membership::Outside);
        assert_eq!(cone.membership(&dtdx), Membership::Boundary);
    }

    #[test]
    fn inclusion_report_for_la() {
        let p = la_det_poly(1.0);
        let theta = PhaseVector::tau_direction(2);
        let rep = cone_inclusion_report(&p, &theta, &la_chart(), &[0.0, 0.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(rep.c_in_sigma_orth, Decision::Yes);
        assert_eq!(rep.c_meets_tangent, Decision::Yes);
        assert_eq!(rep.strict, Decision::Yes);
        assert_eq!(rep.c_subset_tangent, Decision::No);
        assert_eq!(rep.tangent_witness.unwrap().as_slice(), &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(rep.strict_witness.unwrap().as_slice(), &[1.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn wave_bicharacteristics_are_straight() {
        // h = tau^2 - xi^2 in (t, x, tau, xi)
        let v = |k| Poly::var(4, k);
        let h = &(&v(2) * &v(2)) - &(&v(3) * &v(3));
        let traj = bicharacteristic_flow(&h, &[0.0, 0.0, 1.0, 1.0], 1e-3, 10_000).unwrap();
        let last = traj.points.last().unwrap();
        // dt/ds = 2 tau, dx/ds = -2 xi: speed dx/dt = -1
        assert!((last[0] - 20.0).abs() < 1e-9);
        assert!((last[1] + 20.0).abs() < 1e-9);
        assert!(traj.h_values.iter().all(|v| v.abs() <= 1e-10));
    }

    #[test]
    fn richardson_recovers_linear_limit() {
        let seq: Vec<Vec<f64>> = (0..6)
            .map(|j| {
                let e = 0.5f64.powi(j);
                vec![1.0 + 3.0 * e - e * e, 2.0]
            })
            .collect();
        let (lim, ok) = richardson(&seq);
        assert!(ok);
        assert!((lim[0] - 1.0).abs() < 1e-12);
    }
}
