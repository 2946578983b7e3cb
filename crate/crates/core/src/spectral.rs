//! Per-mode discretization of `L_a` after a Fourier transform in `y`.
//!
//! A mode `e^{i kappa y}` reduces the system to `U_t = M_kappa U` on an
//! x-grid, with `U = [u; v; w]` stored block by block. For `a = i mu` the
//! generator equals `-G_h` with
//! `G_h = [[0, -X*, -Y*], [X, 0, 0], [(1 - mu^2) Y, 0, 0]]`,
//! `X = D_h + mu kappa x` and `Y = i kappa x`.

use std::io::{self, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{self, mul_sparse_left as mul, CMat, CVec, ZERO};
use crate::modela::{a_matrix, b_matrix, mu_of};
use crate::tolerances::MAX_SCALED_SPACING;

/// Halfwidth of the truncated domain in oscillator units.
pub const DEFAULT_HALFWIDTH: f64 = 8.0;
pub const MIN_POINTS: usize = 16;
/// Largest generator handled by the dense eigensolver.
pub const MAX_DENSE: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Grid {
    /// Scaled for `kappa >= 1`, unscaled otherwise, halfwidth 8.
    Auto,
    /// Halfwidth in `x~ = sqrt(kappa) x`.
    Scaled(f64),
    /// Halfwidth in `x`.
    Unscaled(f64),
}

#[derive(Clone, Debug)]
pub struct ModeDiscretization {
    pub a: Complex64,
    /// `Im a`, used in the X block.
    pub mu: f64,
    pub kappa: f64,
    pub n: usize,
    /// Spacing in physical `x`.
    pub h: f64,
    pub scaled: bool,
    pub x: Vec<f64>,
    pub dh: DMatrix<f64>,
    pub xh: CMat,
    pub yh: CMat,
    pub ah: CMat,
    pub bh: CMat,
    pub ch: CMat,
    pub dmat: CMat,
}

/// Centered first difference with zero Dirichlet truncation.
pub fn difference_matrix(n: usize, h: f64) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(n, n);
    let c = 1.0 / (2.0 * h);
    for j in 0..n.saturating_sub(1) {
        d[(j, j + 1)] = c;
        d[(j + 1, j)] = -c;
    }
    d
}

pub fn mode_operators(a: Complex64, kappa: f64, n: usize, grid: Grid) -> Result<ModeDiscretization> {
    if !(kappa >= 0.0) || !kappa.is_finite() {
        return Err(Error::Domain(format!(
            "kappa must be finite and non-negative, got {kappa}"
        )));
    }
    if n < MIN_POINTS {
        return Err(Error::Config(format!(
            "need at least {MIN_POINTS} grid points, got {n}"
        )));
    }
    let (scaled, half) = match grid {
        Grid::Auto if kappa >= 1.0 => (true, DEFAULT_HALFWIDTH),
        Grid::Auto => (false, DEFAULT_HALFWIDTH),
        Grid::Scaled(l) => (true, l),
        Grid::Unscaled(l) => (false, l),
    };
    if scaled && kappa == 0.0 {
        return Err(Error::Domain("scaled grid needs kappa > 0".into()));
    }
    let physical_half = if scaled { half / kappa.sqrt() } else { half };
    let needed = DEFAULT_HALFWIDTH / kappa.max(1.0).sqrt();
    if physical_half < needed * (1.0 - 1e-12) {
        return Err(Error::Resolution(format!(
            "domain halfwidth {physical_half} does not cover the Gaussian width (need {needed})"
        )));
    }
    let h = 2.0 * physical_half / (n as f64 + 1.0);
    if h * kappa.sqrt() > MAX_SCALED_SPACING {
        return Err(Error::Resolution(format!(
            "h sqrt(kappa) = {:.4} exceeds {MAX_SCALED_SPACING}; increase n",
            h * kappa.sqrt()
        )));
    }
    let x: Vec<f64> = (0..n).map(|j| -physical_half + (j as f64 + 1.0) * h).collect();
    let mu = a.im;
    let dh = difference_matrix(n, h);
    let xdiag = CMat::from_diagonal(&CVec::from_iterator(n, x.iter().map(|&v| linalg::re(v))));
    let xh = linalg::to_complex(&dh) + &xdiag * linalg::re(mu * kappa);
    let yh = &xdiag * Complex64::new(0.0, kappa);
    let xs = xh.adjoint();
    let ys = yh.adjoint();
    let ah = mul(&xs, &xh) + mul(&ys, &yh) * linalg::re(1.0 - mu * mu);
    let bh = mul(&xh, &xs);
    let ch = mul(&yh, &ys);
    let dmat = mul(&xh, &ys);
    Ok(ModeDiscretization {
        a,
        mu,
        kappa,
        n,
        h,
        scaled,
        x,
        dh,
        xh,
        yh,
        ah,
        bh,
        ch,
        dmat,
    })
}

impl ModeDiscretization {
    /// `mu` when `a = i mu`; the X/Y block identities need it.
    pub fn real_mu(&self) -> Result<f64> {
        mu_of(self.a).ok_or_else(|| Error::Domain(format!("a = {} is not purely imaginary", self.a)))
    }

    /// Same operator on a finer grid (`2n + 1` points, nested nodes).
    pub fn refined(&self) -> Result<ModeDiscretization> {
        let half = -self.x[0] + self.h;
        let grid = if self.scaled {
            Grid::Scaled(half * self.kappa.sqrt())
        } else {
            Grid::Unscaled(half)
        };
        mode_operators(self.a, self.kappa, 2 * self.n + 1, grid)
    }

    /// `M_kappa = -(A (x) D_h + i kappa B(a) (x) diag(x))`.
    pub fn generator(&self) -> CMat {
        let n = self.n;
        let am = a_matrix();
        let bm = b_matrix(self.a);
        let mut m = CMat::zeros(3 * n, 3 * n);
        for bi in 0..3 {
            for bj in 0..3 {
                let ab = am[(bi, bj)];
                let bb = bm[(bi, bj)];
                for i in 0..n {
                    if bb != ZERO {
                        m[(bi * n + i, bj * n + i)] -= Complex64::new(0.0, self.kappa * self.x[i]) * bb;
                    }
                    if ab != ZERO {
                        for j in [i.wrapping_sub(1), i + 1] {
                            if j < n {
                                m[(bi * n + i, bj * n + j)] -= ab * self.dh[(i, j)];
                            }
                        }
                    }
                }
            }
        }
        m
    }

    /// `G_h` assembled from the X/Y blocks.
    pub fn g_matrix(&self) -> Result<CMat> {
        let mu = self.real_mu()?;
        let n = self.n;
        let mut g = CMat::zeros(3 * n, 3 * n);
        g.view_mut((0, n), (n, n)).copy_from(&-self.xh.adjoint());
        g.view_mut((0, 2 * n), (n, n)).copy_from(&-self.yh.adjoint());
        g.view_mut((n, 0), (n, n)).copy_from(&self.xh);
        g.view_mut((2 * n, 0), (n, n))
            .copy_from(&(&self.yh * linalg::re(1.0 - mu * mu)));
        Ok(g)
    }

    /// Grid `L^2` inner product weight.
    pub fn weight(&self) -> f64 {
        self.h
    }

    /// `exp(-kappa x^2 / 2)` sampled on the grid (flat profile for `kappa = 0`).
    pub fn gaussian(&self) -> CVec {
        let k = self.kappa.max(1.0);
        CVec::from_iterator(self.n, self.x.iter().map(|&x| linalg::re((-k * x * x / 2.0).exp())))
    }
}

/// Max-abs residuals of `B X + (1 - mu^2) D Y - X A` and
/// `D* X + (1 - mu^2) C Y - Y A`, relative to `max|X A|`, `max|Y A|`.
pub fn block_identity_residuals(disc: &ModeDiscretization) -> Result<(f64, f64)> {
    let mu = disc.real_mu()?;
    let w = linalg::re(1.0 - mu * mu);
    let xa = mul(&disc.xh, &disc.ah);
    let ya = mul(&disc.yh, &disc.ah);
    let r1 = mul(&disc.bh, &disc.xh) + mul(&disc.dmat, &disc.yh) * w - &xa;
    let r2 = mul(&disc.dmat.adjoint(), &disc.xh) + mul(&disc.ch, &disc.yh) * w - &ya;
    Ok((
        linalg::max_abs(&r1) / linalg::max_abs(&xa).max(f64::MIN_POSITIVE),
        linalg::max_abs(&r2) / linalg::max_abs(&ya).max(f64::MIN_POSITIVE),
    ))
}

#[derive(Clone, Copy, Debug)]
pub struct OscillatorCheck {
    pub lowest: f64,
    pub expected: f64,
    /// Relative error, or absolute error when `expected = 0`.
    pub error: f64,
}

pub fn oscillator_spectrum_check(disc: &ModeDiscretization) -> Result<OscillatorCheck> {
    let mu = disc.real_mu()?;
    if mu.abs() >= 1.0 {
        return Err(Error::Domain(format!("oscillator bound needs |mu| < 1, got {mu}")));
    }
    let lowest = linalg::hermitian_eigenvalues(&disc.ah)?[0];
    let expected = (1.0 - mu) * disc.kappa;
    let error = if expected == 0.0 {
        (lowest - expected).abs()
    } else {
        (lowest - expected).abs() / expected.abs()
    };
    Ok(OscillatorCheck {
        lowest,
        expected,
        error,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct CommutatorCheck {
    /// max of `kappa |u|^2 / (|D_h u|^2 + kappa^2 |x u|^2)`.
    pub max_ratio: f64,
    /// max of the same ratio with `|u|^2` replaced by `([D_h, x] u, u)`,
    /// which is bounded by one exactly.
    pub max_discrete_ratio: f64,
}

fn commutator_ratios(disc: &ModeDiscretization, u: &CVec) -> (f64, f64) {
    let n = disc.n;
    let du = linalg::to_complex(&disc.dh) * u;
    let xu = CVec::from_iterator(n, (0..n).map(|j| u[j] * disc.x[j]));
    let denom = du.norm_squared() + disc.kappa * disc.kappa * xu.norm_squared();
    // [D_h, x] u = (u_{j+1} + u_{j-1}) / 2
    let mut avg = ZERO;
    for j in 0..n {
        let mut s = ZERO;
        if j > 0 {
            s += u[j - 1];
        }
        if j + 1 < n {
            s += u[j + 1];
        }
        avg += u[j].conj() * s * 0.5;
    }
    (disc.kappa * u.norm_squared() / denom, disc.kappa * avg.re / denom)
}

pub fn commutator_inequality_check(disc: &ModeDiscretization, trials: usize, seed: u64) -> Result<CommutatorCheck> {
    if disc.kappa <= 0.0 {
        return Err(Error::Domain("commutator check needs kappa > 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = CommutatorCheck {
        max_ratio: 0.0,
        max_discrete_ratio: f64::NEG_INFINITY,
    };
    for _ in 0..trials {
        let u = random_cvec(&mut rng, disc.n);
        let (r, rd) = commutator_ratios(disc, &u);
        out.max_ratio = out.max_ratio.max(r);
        out.max_discrete_ratio = out.max_discrete_ratio.max(rd);
    }
    Ok(out)
}

/// Ratio for one given vector.
pub fn commutator_ratio(disc: &ModeDiscretization, u: &CVec) -> (f64, f64) {
    commutator_ratios(disc, u)
}

pub(crate) fn random_cvec(rng: &mut ChaCha8Rng, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| {
        Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
    })
}

#[derive(Clone, Debug)]
pub struct SymmetrizerMatrix {
    pub lambda: f64,
    pub s: CMat,
}

pub fn symmetrizer_assemble(disc: &ModeDiscretization, lambda: f64) -> Result<SymmetrizerMatrix> {
    if !(lambda > 0.0) {
        return Err(Error::Config(format!(
            "symmetrizer constant must be positive, got {lambda}"
        )));
    }
    let n = disc.n;
    let id = CMat::identity(n, n) * linalg::re(lambda);
    let mut s = CMat::zeros(3 * n, 3 * n);
    s.view_mut((0, 0), (n, n)).copy_from(&(&disc.ah + &id));
    s.view_mut((n, n), (n, n)).copy_from(&(&disc.bh + &id));
    s.view_mut((n, 2 * n), (n, n)).copy_from(&disc.dmat);
    s.view_mut((2 * n, n), (n, n)).copy_from(&disc.dmat.adjoint());
    s.view_mut((2 * n, 2 * n), (n, n)).copy_from(&(&disc.ch + &id));
    Ok(SymmetrizerMatrix { lambda, s })
}

impl SymmetrizerMatrix {
    pub fn form(&self, u: &CVec) -> f64 {
        u.dotc(&(&self.s * u)).re
    }

    pub fn hermiticity_defect(&self) -> f64 {
        linalg::max_abs(&(&self.s - self.s.adjoint()))
    }
}

fn split(u: &CVec, n: usize) -> (CVec, CVec, CVec) {
    (
        u.rows(0, n).into_owned(),
        u.rows(n, n).into_owned(),
        u.rows(2 * n, n).into_owned(),
    )
}

/// The two sides of `(S U, U) = |X u|^2 + (1 - mu^2)|Y u|^2 + |X* v - Y w|^2 + lambda |U|^2`.
pub fn expansion_terms(disc: &ModeDiscretization, sym: &SymmetrizerMatrix, u: &CVec) -> Result<(f64, f64)> {
    let mu = disc.real_mu()?;
    let (uu, vv, ww) = split(u, disc.n);
    let rhs = (&disc.xh * &uu).norm_squared()
        + (1.0 - mu * mu) * (&disc.yh * &uu).norm_squared()
        + (disc.xh.adjoint() * &vv - &disc.yh * &ww).norm_squared()
        + sym.lambda * u.norm_squared();
    Ok((sym.form(u), rhs))
}

/// `|X u|^2 + (1 - mu^2)|Y u|^2 + lambda |U|^2`, a lower bound for `(S U, U)`.
pub fn expansion_lower_bound(disc: &ModeDiscretization, sym: &SymmetrizerMatrix, u: &CVec) -> Result<f64> {
    let mu = disc.real_mu()?;
    let uu = u.rows(0, disc.n).into_owned();
    Ok((&disc.xh * &uu).norm_squared()
        + (1.0 - mu * mu) * (&disc.yh * &uu).norm_squared()
        + sym.lambda * u.norm_squared())
}

/// Factor relating the corner of `Re(S G_h)` to `-mu^2 lambda Y*`, fixed by
/// the block algebra: `Re(S G_h) = [[0, 0, c Y*], [0, 0, 0], [c Y, 0, 0]]`
/// with `c = -mu^2 lambda / 2`.
pub const CORNER_FACTOR: f64 = 0.5;

#[derive(Clone, Copy, Debug)]
pub struct ReSgCheck {
    /// Max-abs entry of the blocks that must vanish.
    pub offblock: f64,
    /// Fitted `c` in the corner `c Y*`.
    pub corner: f64,
    /// Max-abs of `H` minus its corner model.
    pub residual: f64,
    /// `max |H|`, for scale.
    pub scale: f64,
}

pub fn re_sg(disc: &ModeDiscretization, sym: &SymmetrizerMatrix) -> Result<CMat> {
    let sg = mul(&sym.s, &disc.g_matrix()?);
    Ok((&sg + sg.adjoint()) * linalg::re(0.5))
}

pub fn re_sg_identity_check(disc: &ModeDiscretization, sym: &SymmetrizerMatrix) -> Result<ReSgCheck> {
    let n = disc.n;
    let h = re_sg(disc, sym)?;
    let ys = disc.yh.adjoint();
    let corner13 = h.view((0, 2 * n), (n, n)).into_owned();
    // least-squares c in corner13 = c Y*
    let num: Complex64 = ys.iter().zip(corner13.iter()).map(|(y, c)| y.conj() * c).sum();
    let den: f64 = ys.iter().map(|y| y.norm_sqr()).sum();
    let corner = if den > 0.0 { (num / den).re } else { 0.0 };
    let mut model = CMat::zeros(3 * n, 3 * n);
    model
        .view_mut((0, 2 * n), (n, n))
        .copy_from(&(&ys * linalg::re(corner)));
    model
        .view_mut((2 * n, 0), (n, n))
        .copy_from(&(&disc.yh * linalg::re(corner)));
    let diff = &h - &model;
    let mut offblock = 0.0f64;
    for bi in 0..3 {
        for bj in 0..3 {
            if (bi, bj) == (0, 2) || (bi, bj) == (2, 0) {
                continue;
            }
            offblock = offblock.max(linalg::max_abs(&h.view((bi * n, bj * n), (n, n)).into_owned()));
        }
    }
    Ok(ReSgCheck {
        offblock,
        corner,
        residual: linalg::max_abs(&diff),
        scale: linalg::max_abs(&h),
    })
}

/// Largest `Re(S G_h U, U) / (S U, U)` over random `U`.
pub fn re_sg_ratio(disc: &ModeDiscretization, sym: &SymmetrizerMatrix, trials: usize, seed: u64) -> Result<f64> {
    let h = re_sg(disc, sym)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..trials {
        let u = random_cvec(&mut rng, 3 * disc.n);
        let num = u.dotc(&(&h * &u)).re;
        worst = worst.max(num.abs() / sym.form(&u));
    }
    Ok(worst)
}

/// Largest `lambda` for which `|Re(S G_h U, U)| <= (S U, U)` follows from
/// the corner structure.
pub fn lambda_bound(mu: f64) -> f64 {
    if mu == 0.0 {
        f64::INFINITY
    } else {
        4.0 * (1.0 - mu * mu) / mu.powi(4)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Abscissa {
    /// Max real part.
    pub re: f64,
    /// Imaginary part of the eigenvalue attaining it.
    pub im: f64,
}

/// Max real part of the spectrum of `M_kappa` by a dense eigensolve.
pub fn spectral_abscissa(disc: &ModeDiscretization) -> Result<Abscissa> {
    let dim = 3 * disc.n;
    if dim > MAX_DENSE {
        return Err(Error::Config(format!(
            "dense eigensolve limited to {MAX_DENSE} unknowns, got {dim}"
        )));
    }
    let eig = generator_eigenvalues(disc)?;
    eig.iter()
        .copied()
        .max_by(|a, b| a.re.total_cmp(&b.re).then(b.im.abs().total_cmp(&a.im.abs())))
        .map(|l| Abscissa { re: l.re, im: l.im })
        .ok_or_else(|| Error::Numerical("empty spectrum".into()))
}

/// Spectrum of `M_kappa`; for `a = i mu` it is computed from the real matrix
/// `T^-1 M T`, `T = diag(1, 1, i)`.
pub fn generator_eigenvalues(disc: &ModeDiscretization) -> Result<Vec<Complex64>> {
    let m = disc.generator();
    if disc.real_mu().is_ok() {
        let n = disc.n;
        let mut r = DMatrix::<f64>::zeros(3 * n, 3 * n);
        for i in 0..3 * n {
            for j in 0..3 * n {
                let mut v = m[(i, j)];
                if j >= 2 * n {
                    v *= linalg::I;
                }
                if i >= 2 * n {
                    v *= -linalg::I;
                }
                debug_assert!(v.im.abs() <= 1e-12 * (1.0 + v.re.abs()));
                r[(i, j)] = v.re;
            }
        }
        linalg::eigenvalues_dense_real(&r)
    } else {
        linalg::eigenvalues_dense(&m)
    }
}

/// `sqrt(max(0, -lambda_min(A_h)))`: for `a = i mu` the nonzero spectrum of
/// `M_kappa` is `+-sqrt(-spec A_h)` since `u'' = -A_h u`.
pub fn abscissa_from_ah(disc: &ModeDiscretization) -> Result<f64> {
    disc.real_mu()?;
    let lo = linalg::hermitian_eigenvalues(&disc.ah)?[0];
    Ok((-lo).max(0.0).sqrt())
}

#[derive(Clone, Copy, Debug)]
pub struct GuardedAbscissa {
    pub coarse: Abscissa,
    pub fine: Abscissa,
    /// `|fine - coarse| / max(|fine|, floor)`.
    pub moved: f64,
    pub accepted: bool,
}

/// Abscissa at `n` and `2n + 1`; accepted when the top real part moves by
/// less than 1% (or both are below `floor`).
pub fn guarded_abscissa(disc: &ModeDiscretization, floor: f64) -> Result<GuardedAbscissa> {
    let coarse = spectral_abscissa(disc)?;
    let fine_disc = disc.refined()?;
    let fine = if 3 * fine_disc.n <= MAX_DENSE {
        spectral_abscissa(&fine_disc)?
    } else {
        Abscissa {
            re: abscissa_from_ah(&fine_disc)?,
            im: 0.0,
        }
    };
    let both_small = coarse.re.abs() <= floor && fine.re.abs() <= floor;
    let moved = (fine.re - coarse.re).abs() / fine.re.abs().max(floor);
    Ok(GuardedAbscissa {
        coarse,
        fine,
        moved,
        accepted: both_small || moved < 0.01,
    })
}

/// Writes nonzero entries as `row col re im` lines.
pub fn write_triplets<W: Write>(m: &CMat, mut out: W) -> io::Result<()> {
    writeln!(out, "# {} {}", m.nrows(), m.ncols())?;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)];
            if v != ZERO {
                writeln!(out, "{i} {j} {:.17e} {:.17e}", v.re, v.im)?;
            }
        }
    }
    Ok(())
}
