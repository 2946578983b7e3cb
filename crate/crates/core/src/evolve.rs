//! Method-of-lines evolution of single y-modes, energy bookkeeping and
//! growth-rate measurement.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, CVec, Csr};
use crate::localize::least_squares;
use crate::spectral::{random_cvec, symmetrizer_assemble, ModeDiscretization};

/// `dt * |M|_inf` bound used for RK4 (the stability interval on the
/// imaginary axis is `2 sqrt 2`).
pub const RK4_CFL: f64 = 2.5;

#[derive(Clone, Debug)]
pub struct ModeState {
    pub kappa: f64,
    pub time: f64,
    /// `[u; v; w]` stored block by block.
    pub u: CVec,
}

impl ModeState {
    pub fn new(kappa: f64, u: CVec) -> Self {
        ModeState { kappa, time: 0.0, u }
    }
}

pub fn cfl_limit(generator: &Csr) -> f64 {
    let norm = generator.norm_inf();
    if norm == 0.0 {
        f64::INFINITY
    } else {
        RK4_CFL / norm
    }
}

fn apply(gen: &Csr, x: &CVec) -> CVec {
    let mut y = CVec::zeros(gen.nrows());
    gen.mul_into(x.as_slice(), y.as_mut_slice());
    y
}

pub fn step_rk4(generator: &Csr, state: &ModeState, dt: f64) -> Result<ModeState> {
    let u = &state.u;
    let k1 = apply(generator, u);
    let k2 = apply(generator, &(u + &k1 * linalg::re(dt / 2.0)));
    let k3 = apply(generator, &(u + &k2 * linalg::re(dt / 2.0)));
    let k4 = apply(generator, &(u + &k3 * linalg::re(dt)));
    let next = u + (k1 + (k2 + k3) * linalg::re(2.0) + k4) * linalg::re(dt / 6.0);
    if !next.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Integration {
            time: state.time,
            reason: "non-finite state".into(),
        });
    }
    Ok(ModeState {
        kappa: state.kappa,
        time: state.time + dt,
        u: next,
    })
}

/// Integrates to `t_end` with equal steps no larger than `dt` (default: the
/// CFL limit), calling `observe` on the initial and every later state.
pub fn integrate(
    generator: &Csr,
    initial: ModeState,
    t_end: f64,
    dt: Option<f64>,
    mut observe: impl FnMut(&ModeState),
) -> Result<(ModeState, f64)> {
    let limit = cfl_limit(generator);
    let dt = dt.unwrap_or(limit);
    if !(dt > 0.0) {
        return Err(Error::Config(format!("time step must be positive, got {dt}")));
    }
    if dt > limit * (1.0 + 1e-12) {
        return Err(Error::Config(format!(
            "time step {dt:e} exceeds the RK4 limit {limit:e}"
        )));
    }
    let steps = ((t_end - initial.time) / dt).ceil().max(0.0) as usize;
    let h = if steps == 0 {
        0.0
    } else {
        (t_end - initial.time) / steps as f64
    };
    let mut state = initial;
    observe(&state);
    for _ in 0..steps {
        state = step_rk4(generator, &state, h)?;
        observe(&state);
    }
    Ok((state, h))
}

/// Discretized Gaussian with the `W_0 + x W_1` shape of the exact solutions:
/// `u = g`, `v = sqrt(kappa) x g`, `w = i sqrt(kappa) x g`.
pub fn gaussian_initial(disc: &ModeDiscretization) -> CVec {
    let n = disc.n;
    let g = disc.gaussian();
    let s = disc.kappa.max(1.0).sqrt();
    let mut u = CVec::zeros(3 * n);
    for j in 0..n {
        let xg = g[j] * disc.x[j] * s;
        u[j] = g[j];
        u[n + j] = xg;
        u[2 * n + j] = xg * linalg::I;
    }
    u
}

pub fn random_initial(disc: &ModeDiscretization, seed: u64) -> CVec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_cvec(&mut rng, 3 * disc.n)
}

#[derive(Clone, Debug, Default)]
pub struct EnergyReport {
    pub times: Vec<f64>,
    pub norm2: Vec<f64>,
    /// `(S U, U)`.
    pub suu: Vec<f64>,
    /// `E = 1/2 (|u_t|^2 + (A_h u, u) + lambda^2 |U|^2)`.
    pub energy: Vec<f64>,
    /// `[[U]]_1^2 = |U|^2 + |D_h U|^2 + |Y_h U|^2`.
    pub seminorm1: Vec<f64>,
    pub dt: f64,
    pub order: u32,
    pub lambda: f64,
}

struct Forms {
    n: usize,
    h: f64,
    lambda: f64,
    s: Csr,
    ah: Csr,
    dh: Csr,
    yh: Csr,
}

impl Forms {
    fn new(disc: &ModeDiscretization, lambda: f64) -> Result<Self> {
        let sym = symmetrizer_assemble(disc, lambda)?;
        Ok(Forms {
            n: disc.n,
            h: disc.weight(),
            lambda,
            s: Csr::from_dense(&sym.s),
            ah: Csr::from_dense(&disc.ah),
            dh: Csr::from_dense(&linalg::to_complex(&disc.dh)),
            yh: Csr::from_dense(&disc.yh),
        })
    }

    fn record(&self, gen: &Csr, st: &ModeState, rep: &mut EnergyReport) {
        let n = self.n;
        let u = &st.u;
        let norm2 = u.norm_squared();
        let su = apply(&self.s, u);
        let ut = apply(gen, u).rows(0, n).into_owned();
        let u0 = u.rows(0, n).into_owned();
        let au = apply(&self.ah, &u0);
        let mut semi = norm2;
        for b in 0..3 {
            let blk = u.rows(b * n, n).into_owned();
            semi += apply(&self.dh, &blk).norm_squared() + apply(&self.yh, &blk).norm_squared();
        }
        rep.times.push(st.time);
        rep.norm2.push(self.h * norm2);
        rep.suu.push(self.h * u.dotc(&su).re);
        rep.energy
            .push(0.5 * self.h * (ut.norm_squared() + u0.dotc(&au).re + self.lambda * self.lambda * norm2));
        rep.seminorm1.push(self.h * semi);
    }
}

/// Homogeneous evolution `U' = M_kappa U` with all tracked forms.
pub fn evolve_energy(
    disc: &ModeDiscretization,
    lambda: f64,
    u0: CVec,
    t_end: f64,
    dt: Option<f64>,
) -> Result<EnergyReport> {
    let gen = Csr::from_dense(&disc.generator());
    let forms = Forms::new(disc, lambda)?;
    let mut rep = EnergyReport {
        order: 4,
        lambda,
        ..Default::default()
    };
    let (_, used) = integrate(&gen, ModeState::new(disc.kappa, u0), t_end, dt, |st| {
        forms.record(&gen, st, &mut rep)
    })?;
    rep.dt = used;
    Ok(rep)
}

impl EnergyReport {
    /// `max_t (S U, U)(t) / (e^{2t} (S U, U)(0))`.
    pub fn suu_growth_ratio(&self) -> f64 {
        let s0 = self.suu[0];
        self.times
            .iter()
            .zip(&self.suu)
            .map(|(t, s)| s / ((2.0 * t).exp() * s0))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest relative deviation of `(S U, U)` from its initial value.
    pub fn suu_drift(&self) -> f64 {
        let s0 = self.suu[0];
        self.suu.iter().map(|s| (s - s0).abs() / s0).fold(0.0, f64::max)
    }

    /// `max_t |U(t)| / (e^t [[U(0)]]_1)`.
    pub fn norm_estimate_constant(&self) -> f64 {
        let s0 = self.seminorm1[0].sqrt();
        self.times
            .iter()
            .zip(&self.norm2)
            .map(|(t, n2)| n2.sqrt() / (t.exp() * s0))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct GronwallCheck {
    /// `E(t) <= K (E(0) + (1 + t) int_0^t E)` at every sample.
    pub passed: bool,
    /// Worst `E(t) / (E(0) + (1 + t) int_0^t E)`.
    pub worst_ratio: f64,
    /// `max_t E(t) / E(0)`.
    pub c_t: f64,
    /// `E(t) <= K E(0) exp(K (1 + T) t)` at every sample.
    pub bound_passed: bool,
}

pub fn gronwall_check(report: &EnergyReport, k: f64) -> GronwallCheck {
    let e = &report.energy;
    let t = &report.times;
    if e.is_empty() || e.iter().any(|&v| !(v > 0.0)) {
        return GronwallCheck {
            passed: false,
            worst_ratio: f64::INFINITY,
            c_t: f64::INFINITY,
            bound_passed: false,
        };
    }
    let e0 = e[0];
    let t_end = *t.last().unwrap();
    let mut integral = 0.0;
    let mut worst = 0.0f64;
    let mut c_t = 1.0f64;
    let mut bound_passed = true;
    for i in 0..e.len() {
        if i > 0 {
            integral += 0.5 * (e[i] + e[i - 1]) * (t[i] - t[i - 1]);
        }
        worst = worst.max(e[i] / (e0 + (1.0 + t[i]) * integral));
        c_t = c_t.max(e[i] / e0);
        if e[i] > k * e0 * (k * (1.0 + t_end) * t[i]).exp() {
            bound_passed = false;
        }
    }
    GronwallCheck {
        passed: worst <= k,
        worst_ratio: worst,
        c_t,
        bound_passed,
    }
}

/// Least-squares slope of `log |U|` over samples with `t >= from * t_end`.
pub fn norm_growth_rate(times: &[f64], norm2: &[f64], from: f64) -> Result<f64> {
    let t_end = times.last().copied().unwrap_or(0.0);
    let (xs, ys): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(norm2)
        .filter(|(t, n)| **t >= from * t_end && **n > 0.0)
        .map(|(t, n)| (*t, 0.5 * n.ln()))
        .unzip();
    if xs.len() < 3 {
        return Err(Error::Config("too few samples for a growth-rate fit".into()));
    }
    Ok(least_squares(&xs, &ys).0)
}

/// Per-mode growth rate from a Gaussian-start evolution up to `t_end`,
/// fitted over the second half.
pub fn measure_growth_rate(disc: &ModeDiscretization, t_end: f64, dt: Option<f64>) -> Result<f64> {
    let gen = Csr::from_dense(&disc.generator());
    let mut times = Vec::new();
    let mut norm2 = Vec::new();
    integrate(
        &gen,
        ModeState::new(disc.kappa, gaussian_initial(disc)),
        t_end,
        dt,
        |st| {
            times.push(st.time);
            norm2.push(st.u.norm_squared());
        },
    )?;
    norm_growth_rate(&times, &norm2, 0.5)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GrowthVerdict {
    Growth,
    NoGrowth,
}

#[derive(Clone, Debug)]
pub struct GrowthFit {
    pub kappas: Vec<f64>,
    pub rates: Vec<f64>,
    pub verdict: GrowthVerdict,
    /// `rate ~ c kappa^p`.
    pub exponent: Option<f64>,
    pub prefactor: Option<f64>,
    /// Gevrey threshold `1 / p`.
    pub s_star: Option<f64>,
    /// RMS residual of the log-log fit.
    pub residual: Option<f64>,
    /// Some non-positive rates were left out of the fit.
    pub restricted: bool,
}

/// Rates at or below this count as no growth.
pub const NO_GROWTH: f64 = 1e-6;

pub fn growth_rate_fit(kappas: &[f64], rates: &[f64]) -> Result<GrowthFit> {
    if kappas.len() != rates.len() {
        return Err(Error::Config("kappa and rate lists differ in length".into()));
    }
    if kappas.len() < 3 {
        return Err(Error::Config("growth fit needs at least three kappa values".into()));
    }
    if kappas.iter().any(|&k| !(k > 0.0)) {
        return Err(Error::Config("growth fit needs positive kappa values".into()));
    }
    let lo = kappas.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = kappas.iter().copied().fold(0.0, f64::max);
    if hi < 10.0 * lo * (1.0 - 1e-12) {
        return Err(Error::Config("kappa values must span at least one decade".into()));
    }
    let mut fit = GrowthFit {
        kappas: kappas.to_vec(),
        rates: rates.to_vec(),
        verdict: GrowthVerdict::NoGrowth,
        exponent: None,
        prefactor: None,
        s_star: None,
        residual: None,
        restricted: false,
    };
    if rates.iter().all(|&r| r <= NO_GROWTH) {
        return Ok(fit);
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = kappas
        .iter()
        .zip(rates)
        .filter(|(_, r)| **r > NO_GROWTH)
        .map(|(k, r)| (k.ln(), r.ln()))
        .unzip();
    fit.verdict = GrowthVerdict::Growth;
    fit.restricted = xs.len() < kappas.len();
    if xs.len() < 2 {
        return Ok(fit);
    }
    let (p, logc) = least_squares(&xs, &ys);
    let res = (xs.iter().zip(&ys).map(|(x, y)| (y - p * x - logc).powi(2)).sum::<f64>() / xs.len() as f64).sqrt();
    fit.exponent = Some(p);
    fit.prefactor = Some(logc.exp());
    fit.s_star = if p > 0.0 { Some(1.0 / p) } else { None };
    fit.residual = Some(res);
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{mode_operators, Grid};
    use num_complex::Complex64;

    fn imu(mu: f64) -> Complex64 {
        Complex64::new(0.0, mu)
    }

    #[test]
    fn kappa_zero_conserves_norm() {
        let disc = mode_operators(imu(0.0), 0.0, 129, Grid::Auto).unwrap();
        let rep = evolve_energy(&disc, 1.0, gaussian_initial(&disc), 1.0, Some(disc.h / 4.0)).unwrap();
        let n0 = rep.norm2[0];
        let drift = rep.norm2.iter().map(|n| (n - n0).abs() / n0).fold(0.0, f64::max);
        assert!(drift < 1e-8, "{drift}");
    }

    #[test]
    fn mu_zero_suu_constant() {
        let disc = mode_operators(imu(0.0), 4.0, 129, Grid::Auto).unwrap();
        let rep = evolve_energy(&disc, 1.0, gaussian_initial(&disc), 1.0, Some(disc.h / 4.0)).unwrap();
        assert!(rep.suu_drift() < 1e-6, "{}", rep.suu_drift());
        assert!(gronwall_check(&rep, 2.0).passed);
    }

    #[test]
    fn rejects_unstable_step() {
        let disc = mode_operators(imu(0.5), 4.0, 65, Grid::Auto).unwrap();
        let gen = Csr::from_dense(&disc.generator());
        let dt = 2.0 * cfl_limit(&gen);
        assert!(integrate(
            &gen,
            ModeState::new(4.0, gaussian_initial(&disc)),
            1.0,
            Some(dt),
            |_| {}
        )
        .is_err());
    }

    #[test]
    fn ill_posed_norm_grows() {
        let disc = mode_operators(imu(2.0), 16.0, 65, Grid::Auto).unwrap();
        let rate = measure_growth_rate(&disc, 3.0, None).unwrap();
        assert!(rate > 3.5, "{rate}");
    }

    #[test]
    fn synthetic_fit() {
        let k = [1.0, 10.0, 100.0];
        let fit = growth_rate_fit(&k, &k).unwrap();
        assert!((fit.exponent.unwrap() - 1.0).abs() < 1e-12);
        let fit = growth_rate_fit(&k, &[0.0, 1e-9, 0.0]).unwrap();
        assert_eq!(fit.verdict, GrowthVerdict::NoGrowth);
        assert!(growth_rate_fit(&[1.0, 2.0, 3.0], &[1.0, 1.0, 1.0]).is_err());
        let fit = growth_rate_fit(&k, &[0.0, 2.0, 20.0]).unwrap();
        assert!(fit.restricted);
        assert!((fit.exponent.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gronwall_negative_energy_fails() {
        let rep = EnergyReport {
            times: vec![0.0, 1.0],
            energy: vec![1.0, -1.0],
            ..Default::default()
        };
        assert!(!gronwall_check(&rep, 2.0).passed);
    }
}
