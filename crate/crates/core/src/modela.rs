//! The three-by-three model family
//! `L_a = d/dt + A d/dx + x B(a) d/dy` in two space dimensions, its
//! exponentially growing adjoint solutions and their residual checks.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{re, CMat, I, ONE, ZERO};
use crate::poly::{Poly, PolyMatrix};
use crate::symbol::{constant_matrix, SystemSymbol};

/// Threshold on `Im beta` separating growing from oscillating solutions.
pub const UNSTABLE_IM: f64 = 1e-9;

/// `A = [[0,1,0],[1,0,0],[0,0,0]]`.
pub fn a_matrix() -> CMat {
    CMat::from_row_slice(3, 3, &[ZERO, ONE, ZERO, ONE, ZERO, ZERO, ZERO, ZERO, ZERO])
}

/// `B(a) = [[0,a,1],[-a,0,0],[1+a^2,0,0]]`.
pub fn b_matrix(a: Complex64) -> CMat {
    CMat::from_row_slice(3, 3, &[ZERO, a, ONE, -a, ZERO, ZERO, ONE + a * a, ZERO, ZERO])
}

/// `L_a` as a system with `A_1 = A` and `A_2 = x B(a)`, variables
/// `(t, x, y; tau, xi, eta)`.
pub fn build_system(a: Complex64) -> SystemSymbol {
    let a1 = constant_matrix(&a_matrix(), 3);
    let x = Poly::var(3, 1);
    let a2 = constant_matrix(&b_matrix(a), 3).map(|p| p * &x);
    SystemSymbol::with_names(
        "L_a",
        vec![a1, a2],
        None::<PolyMatrix>,
        vec!["t".into(), "x".into(), "y".into()],
        vec!["tau".into(), "xi".into(), "eta".into()],
    )
    .expect("model dimensions are consistent")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// `a = i mu` with `|mu| < 1`.
    WellPosed,
    /// `i a` outside `[-1, 1]`.
    IllPosed,
    /// `a = +-i`.
    Borderline,
}

/// `mu` with `a = i mu`, when `a` is purely imaginary.
pub fn mu_of(a: Complex64) -> Option<f64> {
    if a.re.abs() <= 1e-12 * a.norm().max(1.0) {
        Some(a.im)
    } else {
        None
    }
}

pub fn regime(a: Complex64) -> Regime {
    match mu_of(a) {
        Some(mu) if mu.abs() < 1.0 => Regime::WellPosed,
        Some(mu) if mu.abs() == 1.0 => Regime::Borderline,
        _ => Regime::IllPosed,
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ModelParams {
    pub a: Complex64,
    pub eta: f64,
    pub sign: Sign,
}

impl ModelParams {
    pub fn mu(&self) -> Option<f64> {
        mu_of(self.a)
    }

    pub fn regime(&self) -> Regime {
        regime(self.a)
    }
}

#[derive(Clone, Debug)]
pub struct BetaRoots {
    /// Roots of `beta^2 + i conj(a) = 1` (Plus) and `beta^2 - i conj(a) = 1`
    /// (Minus), largest imaginary part first.
    pub roots: Vec<(Complex64, Sign)>,
    pub unstable: bool,
}

pub fn beta_roots(a: Complex64) -> BetaRoots {
    let iab = I * a.conj();
    let mut roots = Vec::with_capacity(4);
    for sign in [Sign::Plus, Sign::Minus] {
        let b2 = ONE - iab * sign.factor();
        let r = b2.sqrt();
        roots.push((r, sign));
        roots.push((-r, sign));
    }
    roots.sort_by(|x, y| y.0.im.total_cmp(&x.0.im));
    let unstable = roots[0].0.im > UNSTABLE_IM;
    BetaRoots { roots, unstable }
}

/// `W(t,x,y) = exp(i beta eta t +- i y eta^2 - eta^2 x^2 / 2) (W0 + eta x W1)`,
/// annihilated by the formal adjoint of `L_a`.
#[derive(Clone, Debug)]
pub struct ExactSolution {
    pub params: ModelParams,
    pub beta: Complex64,
    pub w0: [Complex64; 3],
    pub w1: [Complex64; 3],
}

impl ExactSolution {
    pub fn eval(&self, t: f64, x: f64, y: f64) -> [Complex64; 3] {
        let eta = self.params.eta;
        let phase =
            I * self.beta * eta * t + I * (self.params.sign.factor() * y * eta * eta) - re(eta * eta * x * x / 2.0);
        let e = phase.exp();
        let mut out = [ZERO; 3];
        for k in 0..3 {
            out[k] = e * (self.w0[k] + self.w1[k] * (eta * x));
        }
        out
    }

    /// Wavenumber of the `y` dependence, `+-eta^2`.
    pub fn y_wavenumber(&self) -> f64 {
        self.params.sign.factor() * self.params.eta * self.params.eta
    }
}

/// Builds `W^+-` from the root with the largest imaginary part on the branch
/// matching `params.sign`, or from `beta` when given.
pub fn exact_adjoint_solution(params: ModelParams, beta: Option<Complex64>) -> Result<ExactSolution> {
    let s = params.sign.factor();
    let iab = I * params.a.conj();
    let beta = match beta {
        Some(b) => b,
        None => beta_roots(params.a)
            .roots
            .into_iter()
            .find(|(_, sg)| *sg == params.sign)
            .map(|(b, _)| b)
            .expect("two roots per branch"),
    };
    if (beta * beta + iab * s - ONE).norm() > 1e-12 * (1.0 + iab.norm()) {
        return Err(Error::Domain(format!(
            "beta = {beta} does not solve the {} branch equation",
            if s > 0.0 { "+" } else { "-" }
        )));
    }
    if beta.norm() == 0.0 {
        return Err(Error::Domain("beta = 0 leaves W1 undefined".into()));
    }
    if !(params.eta > 0.0) {
        return Err(Error::Domain("eta must be positive".into()));
    }
    let w0 = [ONE, ZERO, ZERO];
    let w1 = [ZERO, -I * (ONE - iab * s) / beta, -re(s) / beta];
    Ok(ExactSolution { params, beta, w0, w1 })
}

#[derive(Clone, Debug)]
pub struct ResidualGrid {
    pub h: f64,
    pub x_halfwidth: f64,
    pub t_values: Vec<f64>,
}

impl ResidualGrid {
    /// Covers `|x| <= 8/eta * max(1, sqrt(eta))`, where the Gaussian factor
    /// is negligible at the edge.
    pub fn for_eta(eta: f64, h: f64) -> Self {
        ResidualGrid {
            h,
            x_halfwidth: 8.0 / eta * eta.sqrt().max(1.0),
            t_values: vec![0.0, 0.25, 0.5],
        }
    }
}

#[derive(Clone, Debug)]
pub struct ResidualReport {
    pub max_residual: f64,
    pub max_field: f64,
    pub points: usize,
    pub warning: Option<String>,
}

fn d4(f: &dyn Fn(f64) -> [Complex64; 3], z: f64, h: f64) -> [Complex64; 3] {
    let (p2, p1, m1, m2) = (f(z + 2.0 * h), f(z + h), f(z - h), f(z - 2.0 * h));
    let mut out = [ZERO; 3];
    for k in 0..3 {
        out[k] = (-p2[k] + p1[k] * 8.0 - m1[k] * 8.0 + m2[k]) / (12.0 * h);
    }
    out
}

/// `L*_a W = -W_t - A^* W_x - x B(a)^* W_y` for a field `W(t,x) e^{i k y}`,
/// with fourth-order central differences of step `h` in `t` and `x`.
pub fn apply_adjoint(
    a: Complex64,
    k: f64,
    field: &dyn Fn(f64, f64) -> [Complex64; 3],
    t: f64,
    x: f64,
    h: f64,
) -> [Complex64; 3] {
    let wt = d4(&|s| field(s, x), t, h);
    let wx = d4(&|s| field(t, s), x, h);
    let w = field(t, x);
    let astar = a_matrix().adjoint();
    let bstar = b_matrix(a).adjoint();
    let mut out = [ZERO; 3];
    for i in 0..3 {
        let mut acc = -wt[i];
        for j in 0..3 {
            acc -= astar[(i, j)] * wx[j];
            acc -= bstar[(i, j)] * w[j] * (I * k * x);
        }
        out[i] = acc;
    }
    out
}

/// Max-norm of the discrete adjoint applied to an arbitrary sampled field.
pub fn adjoint_residual_of(
    a: Complex64,
    k: f64,
    field: &dyn Fn(f64, f64) -> [Complex64; 3],
    grid: &ResidualGrid,
    eta: f64,
) -> ResidualReport {
    let h = grid.h;
    let m = (2.0 * grid.x_halfwidth / h).round() as usize;
    let mut max_residual = 0.0f64;
    let mut max_field = 0.0f64;
    let mut points = 0;
    for &t in &grid.t_values {
        for j in 0..=m {
            let x = -grid.x_halfwidth + j as f64 * h;
            let r = apply_adjoint(a, k, field, t, x, h);
            let w = field(t, x);
            max_residual = r.iter().fold(max_residual, |acc, z| acc.max(z.norm()));
            max_field = w.iter().fold(max_field, |acc, z| acc.max(z.norm()));
            points += 1;
        }
    }
    let warning = (eta * h > 0.5).then(|| format!("eta*h = {} exceeds 0.5; Gaussian under-resolved", eta * h));
    ResidualReport {
        max_residual,
        max_field,
        points,
        warning,
    }
}

pub fn adjoint_residual(sol: &ExactSolution, grid: &ResidualGrid) -> ResidualReport {
    let f = |t: f64, x: f64| sol.eval(t, x, 0.0);
    adjoint_residual_of(sol.params.a, sol.y_wavenumber(), &f, grid, sol.params.eta)
}

/// Observed orders `log2(r(h) / r(h/2))` for successive spacings.
pub fn observed_orders(residuals: &[f64], ratio: f64) -> Vec<f64> {
    residuals.windows(2).map(|w| (w[0] / w[1]).ln() / ratio.ln()).collect()
}

/// Samples `(t, x, y, W)` on a tensor grid.
pub fn sample_solution(sol: &ExactSolution, ts: &[f64], xs: &[f64], y: f64) -> Vec<(f64, f64, f64, [Complex64; 3])> {
    let mut out = Vec::with_capacity(ts.len() * xs.len());
    for &t in ts {
        for &x in xs {
            out.push((t, x, y, sol.eval(t, x, y)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn b_matrix_entries() {
        let b = b_matrix(ZERO);
        assert_eq!(
            b,
            CMat::from_row_slice(3, 3, &[ZERO, ZERO, ONE, ZERO, ZERO, ZERO, ONE, ZERO, ZERO])
        );
        let b = b_matrix(Complex64::new(0.0, 0.5));
        assert!((b[(2, 0)] - re(0.75)).norm() < 1e-15);
    }

    #[test]
    fn beta_roots_examples() {
        let r = beta_roots(Complex64::new(0.0, 2.0));
        assert!(r.unstable);
        assert!((r.roots[0].0 - I).norm() < 1e-14);
        assert_eq!(r.roots[0].1, Sign::Plus);

        let r = beta_roots(Complex64::new(0.0, 0.5));
        assert!(!r.unstable);
        let mut sq: Vec<f64> = r.roots.iter().map(|(b, _)| (b * b).re).collect();
        sq.sort_by(f64::total_cmp);
        assert!((sq[0] - 0.5).abs() < 1e-14 && (sq[3] - 1.5).abs() < 1e-14);

        let r = beta_roots(ZERO);
        assert!(!r.unstable);
        assert!(r.roots.iter().all(|(b, _)| (b.norm() - 1.0).abs() < 1e-15));
    }

    #[test]
    fn w1_regression_vector() {
        let p = ModelParams {
            a: Complex64::new(0.0, 2.0),
            eta: 4.0,
            sign: Sign::Plus,
        };
        let sol = exact_adjoint_solution(p, None).unwrap();
        assert!((sol.beta - I).norm() < 1e-14);
        assert!(sol.w1[0].norm() == 0.0);
        assert!((sol.w1[1] - ONE).norm() < 1e-14);
        assert!((sol.w1[2] - I).norm() < 1e-14);
    }

    #[test]
    fn wrong_branch_is_rejected() {
        let p = ModelParams {
            a: Complex64::new(0.0, 2.0),
            eta: 4.0,
            sign: Sign::Minus,
        };
        assert!(matches!(exact_adjoint_solution(p, Some(I)), Err(Error::Domain(_))));
    }

    #[test]
    fn x_zero_slice_is_plane_wave() {
        let p = ModelParams {
            a: Complex64::new(1.0, 1.0),
            eta: 2.0,
            sign: Sign::Minus,
        };
        let sol = exact_adjoint_solution(p, None).unwrap();
        let w = sol.eval(0.3, 0.0, 0.7);
        let e = (I * sol.beta * 2.0 * 0.3 - I * 0.7 * 4.0).exp();
        assert!((w[0] - e).norm() < 1e-14);
        assert!(w[1].norm() < 1e-15 && w[2].norm() < 1e-15);
    }

    #[test]
    fn spatial_generator_eigen_relation() {
        // -A^* W_x - x B^* W_y = i eta beta W for the exact solution.
        for sign in [Sign::Plus, Sign::Minus] {
            let p = ModelParams {
                a: Complex64::new(0.0, 2.0),
                eta: 4.0,
                sign,
            };
            let sol = exact_adjoint_solution(p, None).unwrap();
            let f = |t: f64, x: f64| sol.eval(t, x, 0.0);
            let h = 1.0 / 256.0;
            for &x in &[-0.3, 0.0, 0.2, 0.5] {
                let lw = apply_adjoint(p.a, sol.y_wavenumber(), &f, 0.0, x, h);
                let w = f(0.0, x);
                let wt = d4(&|s| f(s, x), 0.0, h);
                for k in 0..3 {
                    let gw = lw[k] + wt[k];
                    assert!((gw - I * sol.beta * 4.0 * w[k]).norm() < 1e-6, "{sign:?} x={x}");
                }
            }
        }
    }

    #[test]
    fn constant_field_is_a_negative_control() {
        let eta = 2.0;
        let f = |_t: f64, _x: f64| [ONE, ZERO, ZERO];
        let rep = adjoint_residual_of(ZERO, eta * eta, &f, &ResidualGrid::for_eta(eta, 1.0 / 32.0), eta);
        // |x B^* W0| eta^2 is largest at the edge of the window.
        let expect = eta * eta * ResidualGrid::for_eta(eta, 1.0 / 32.0).x_halfwidth;
        assert!((rep.max_residual - expect).abs() < 1e-9);
    }

    #[test]
    fn regimes() {
        assert_eq!(regime(Complex64::new(0.0, 0.5)), Regime::WellPosed);
        assert_eq!(regime(Complex64::new(0.0, 2.0)), Regime::IllPosed);
        assert_eq!(regime(Complex64::new(0.0, -1.0)), Regime::Borderline);
        assert_eq!(regime(Complex64::new(0.1, 0.0)), Regime::IllPosed);
    }
}
