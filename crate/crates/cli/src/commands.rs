use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error as ThisError;

use hypersym::evolve::{
    evolve_energy, gaussian_initial, gronwall_check, growth_rate_fit, measure_growth_rate, random_initial,
    GrowthVerdict,
};
use hypersym::geometry::{classify_manifold, tangent_space, ConeOptions, ManifoldChart, PropagationCone};
use hypersym::linalg::CMat;
use hypersym::localize::{
    characteristic_data, localize_with, transversal_strict_hyperbolicity, uniform_diagonalizability_probe, SpacePoint,
};
use hypersym::modela::{mu_of, regime};
use hypersym::phase::{CotangentPoint, PhaseVector};
use hypersym::spectral::{
    block_identity_residuals, commutator_inequality_check, guarded_abscissa, lambda_bound, mode_operators,
    oscillator_spectrum_check, re_sg_identity_check, re_sg_ratio, symmetrizer_assemble, Grid,
};
use hypersym::symbol::{det_symbol, eigen_structure, eval_symbol, SystemSymbol};
use hypersym::Error;

use crate::config::{Init, RunConfig};
use crate::report::{num, write_csv, Provenance, TextReport};

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("{}: {source}", file.display())]
    InFile { file: PathBuf, source: Error },
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("thread pool: {0}")]
    Pool(String),
}

impl CliError {
    fn core(&self) -> Option<&Error> {
        match self {
            CliError::InFile { source, .. } | CliError::Core(source) => Some(source),
            _ => None,
        }
    }

    /// 1 input or tooling failure, 2 violated mathematical assumption,
    /// 3 insufficient resolution.
    pub fn exit_code(&self) -> u8 {
        match self.core() {
            Some(Error::Semisimplicity { .. } | Error::Inconsistent(_) | Error::Domain(_)) => 2,
            Some(Error::Resolution(_)) => 3,
            _ => 1,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

pub struct Context {
    pub cfg: RunConfig,
    pub out: PathBuf,
    pub threads: usize,
    pub prov: Provenance,
}

pub struct Outcome {
    pub exit: u8,
    pub files: Vec<PathBuf>,
    pub summary: Vec<String>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_text(ctx: &Context, rep: &TextReport, name: &str) -> CliResult<PathBuf> {
    rep.write(&ctx.out, name, &ctx.prov)
        .map_err(io_err(&ctx.out.join(name)))
}

fn write_table(ctx: &Context, name: &str, headers: &[&str], rows: &[Vec<String>]) -> CliResult<PathBuf> {
    write_csv(&ctx.out, name, &ctx.prov, headers, rows).map_err(io_err(&ctx.out.join(name)))
}

fn load_system(cfg: &RunConfig) -> CliResult<SystemSymbol> {
    let path = cfg.require_system()?;
    SystemSymbol::from_file(path, &cfg.overrides).map_err(|source| CliError::InFile {
        file: path.to_path_buf(),
        source,
    })
}

fn load_chart(cfg: &RunConfig) -> CliResult<Option<ManifoldChart>> {
    cfg.chart
        .as_ref()
        .map(|p| {
            ManifoldChart::from_file(p).map_err(|source| CliError::InFile {
                file: p.clone(),
                source,
            })
        })
        .transpose()
}

/// `t = 0`, `x = 0`, `xi = e_d` and `tau` the eigenvalue of largest
/// multiplicity of the principal matrix there.
fn default_point(sys: &SystemSymbol) -> CliResult<CotangentPoint> {
    let d = sys.space_dim();
    let mut xi = vec![0.0; d];
    xi[d - 1] = 1.0;
    let rep = eigen_structure(sys, 0.0, &vec![0.0; d], &xi)?;
    let k = (0..rep.eigenvalues.len())
        .max_by(|&i, &j| rep.alg_mult[i].cmp(&rep.alg_mult[j]).then(j.cmp(&i)))
        .ok_or_else(|| Error::Numerical("empty spectrum".into()))?;
    Ok(CotangentPoint::new(0.0, vec![0.0; d], rep.eigenvalues[k], xi)?)
}

fn base_point(cfg: &RunConfig, sys: &SystemSymbol) -> CliResult<CotangentPoint> {
    match &cfg.point {
        Some(z) => Ok(CotangentPoint::from_coords(sys.space_dim(), z)?),
        None => default_point(sys),
    }
}

fn probe_points(rho: &CotangentPoint, count: usize, seed: u64) -> Vec<SpacePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let xi: Vec<f64> = rho.xi.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
            SpacePoint {
                t: rho.t + rng.random_range(-1.0..1.0),
                x: rho.x.iter().map(|x| x + rng.random_range(-1.0..1.0)).collect(),
                xi,
            }
        })
        .collect()
}

pub fn run_analyze(ctx: &Context) -> CliResult<Outcome> {
    let cfg = &ctx.cfg;
    let sys = load_system(cfg)?;
    let chart = load_chart(cfg)?;
    let rho = base_point(cfg, &sys)?;
    let z = rho.coords();
    let names = sys.phase_names();
    let mut rep = TextReport::default();
    let mut violations: Vec<String> = Vec::new();

    rep.section("system");
    rep.line("name", sys.name());
    rep.line("dimension", sys.dimension());
    rep.line("space_dim", sys.space_dim());
    rep.line("variables", names.join(" "));

    rep.section("point");
    rep.line("rho", &rho);
    let eig = eigen_structure(&sys, rho.t, &rho.x, &rho.xi)?;
    for (k, e) in eig.eigenvalues.iter().enumerate() {
        rep.line(
            &format!("eigenvalue {k}"),
            format!(
                "{} (algebraic {}, geometric {})",
                num(*e),
                eig.alg_mult[k],
                eig.geom_mult[k]
            ),
        );
    }
    if eig.hyperbolicity_violation {
        violations.push(format!(
            "non-real eigenvalue (max imaginary part {})",
            num(eig.max_imag)
        ));
    }
    let det = det_symbol(&sys, &rho)?;
    rep.line("det L(rho)", num(det.norm()));

    rep.section("characteristic");
    let localized = match characteristic_data(&sys, &rho) {
        Ok(cd) => {
            rep.line("multiplicity", cd.multiplicity);
            Some(localize_with(&sys, cd, chart.as_ref())?)
        }
        Err(Error::Semisimplicity { eigenvalue, alg, geom }) => {
            let msg = format!(
                "semisimplicity violation: eigenvalue {} has algebraic multiplicity {alg} and geometric multiplicity {geom}",
                num(eigenvalue)
            );
            rep.line("status", &msg);
            violations.push(msg);
            None
        }
        Err(e) => return Err(e.into()),
    };

    if let Some(lp) = &localized {
        rep.section("localization");
        rep.line("det_poly", &lp.det_poly);
        rep.line("degree", lp.det_poly.degree());
    }

    rep.section("hyperbolicity");
    match (&localized, &chart) {
        (Some(lp), Some(ch)) => {
            let tangent = tangent_space(ch, &z)?.tangent_vectors(sys.space_dim());
            match transversal_strict_hyperbolicity(lp, &tangent, cfg.tsh_samples, cfg.seed) {
                Ok(t) => {
                    rep.line("transversally strictly hyperbolic", t.verdict);
                    rep.line("samples", t.samples);
                    if t.verdict {
                        rep.line("min relative root gap", num(t.min_gap));
                    } else if let Some(w) = &t.witness {
                        rep.line("witness", w);
                        violations.push(format!("transversal strict hyperbolicity fails along {w}"));
                    }
                }
                Err(Error::Inconsistent(msg)) => {
                    rep.line("transversally strictly hyperbolic", "false");
                    rep.line("reason", &msg);
                    violations.push(msg);
                }
                Err(e) => return Err(e.into()),
            }
        }
        (None, _) => rep.line("transversally strictly hyperbolic", "not evaluated (no localization)"),
        (_, None) => rep.line("transversally strictly hyperbolic", "not evaluated (no chart)"),
    }

    rep.section("manifold");
    match &chart {
        Some(ch) => {
            rep.line("codimension", ch.codim());
            rep.line("classification", classify_manifold(ch, &z)?);
        }
        None => rep.line("classification", "not evaluated (no chart)"),
    }

    rep.section("diagonalizability");
    let pts = probe_points(&rho, cfg.probe_points, cfg.seed);
    let probe = uniform_diagonalizability_probe(&sys, &pts)?;
    rep.line("points", pts.len());
    if probe.flagged.len() < pts.len() {
        rep.line("max eigenbasis condition", num(probe.max_cond));
    }
    rep.line("flagged", probe.flagged.len());
    if !probe.flagged.is_empty() {
        violations.push(format!(
            "{} of {} probe points are not real semi-simple",
            probe.flagged.len(),
            pts.len()
        ));
    }

    rep.section("findings");
    rep.line("violations", violations.len());
    for v in &violations {
        rep.line("violation", v);
    }
    let file = write_text(ctx, &rep, "analyze.txt")?;
    let mut summary = vec![format!("violations: {}", violations.len())];
    summary.extend(violations.iter().cloned());
    Ok(Outcome {
        exit: if violations.is_empty() { 0 } else { 2 },
        files: vec![file],
        summary,
    })
}

pub fn run_cones(ctx: &Context) -> CliResult<Outcome> {
    let cfg = &ctx.cfg;
    let sys = load_system(cfg)?;
    let chart = load_chart(cfg)?.ok_or_else(|| Error::Config("cones needs a chart file".into()))?;
    let rho = base_point(cfg, &sys)?;
    let z = rho.coords();
    let d = sys.space_dim();
    let lp = localize_with(&sys, characteristic_data(&sys, &rho)?, Some(&chart))?;
    let opts = ConeOptions {
        seed: cfg.seed,
        ..ConeOptions::default()
    };
    let cone = PropagationCone::new(&lp.det_poly, &PhaseVector::tau_direction(d), &chart, &z, opts)?;
    let inc = cone.inclusion_report();
    let mut rep = TextReport::default();
    rep.section("cone");
    rep.line("rho", &rho);
    rep.line("det_poly", &lp.det_poly);
    rep.line("lineality dimension", cone.lineality().ncols());
    rep.line("sampled rays", cone.generator_rays().len());
    rep.section("inclusions");
    rep.line("C in (T Sigma)^sigma", inc.c_in_sigma_orth);
    rep.line("C meets T Sigma", inc.c_meets_tangent);
    rep.line("C cap T Sigma strictly inside C", inc.strict);
    rep.line("C in T Sigma", inc.c_subset_tangent);
    if let Some(w) = &inc.tangent_witness {
        rep.line("witness in C cap T Sigma", w);
    }
    if let Some(w) = &inc.strict_witness {
        rep.line("witness in C outside T Sigma", w);
    }
    if !cfg.queries.is_empty() {
        rep.section("queries");
        for q in &cfg.queries {
            let v = PhaseVector::from_slice(d, q)?;
            rep.line(&v.to_string(), format!("{:?}", cone.membership(&v)));
        }
    }
    let file = write_text(ctx, &rep, "cones.txt")?;
    Ok(Outcome {
        exit: 0,
        files: vec![file],
        summary: vec![
            format!("C in (T Sigma)^sigma: {}", inc.c_in_sigma_orth),
            format!("C meets T Sigma: {}", inc.c_meets_tangent),
            format!("strict: {}", inc.strict),
        ],
    })
}

fn in_pool<T: Send>(ctx: &Context, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(ctx.threads.max(1))
        .build()
        .map_err(|e| CliError::Pool(e.to_string()))?;
    Ok(pool.install(f))
}

fn kappas(cfg: &RunConfig) -> CliResult<Vec<f64>> {
    if cfg.model.kappas.is_empty() {
        return Err(Error::Config("[model] kappas is empty".into()).into());
    }
    Ok(cfg.model.kappas.clone())
}

pub fn run_simulate(ctx: &Context) -> CliResult<Outcome> {
    let cfg = &ctx.cfg;
    let a = cfg.model_a()?;
    let ks = kappas(cfg)?;
    let t_end = cfg.model.t_end.unwrap_or(1.0);
    let runs = in_pool(ctx, || {
        ks.par_iter()
            .enumerate()
            .map(|(i, &k)| {
                let disc = mode_operators(a, k, cfg.model.n, Grid::Auto)?;
                let u0 = match cfg.model.init {
                    Init::Gaussian => gaussian_initial(&disc),
                    Init::Random => random_initial(&disc, cfg.seed.wrapping_add(i as u64)),
                };
                evolve_energy(&disc, cfg.model.lambda, u0, t_end, cfg.model.dt)
            })
            .collect::<Vec<_>>()
    })?;
    let mut rows = Vec::new();
    let mut rep = TextReport::default();
    let mut summary = Vec::new();
    for (&k, run) in ks.iter().zip(runs) {
        let r = run?;
        for i in 0..r.len() {
            rows.push(vec![
                num(k),
                num(r.times[i]),
                num(r.norm2[i]),
                num(r.suu[i]),
                num(r.energy[i]),
                num(r.seminorm1[i]),
            ]);
        }
        let g = gronwall_check(&r, 2.0);
        rep.section(&format!("kappa {k}"));
        rep.line("a", a);
        rep.line("n", cfg.model.n);
        rep.line("dt", num(r.dt));
        rep.line("steps", r.len() - 1);
        rep.line("scheme order", r.order);
        rep.line("max (SU,U)(t) / (e^2t (SU,U)(0))", num(r.suu_growth_ratio()));
        rep.line("max |U(t)| / (e^t [[U(0)]]_1)", num(r.norm_estimate_constant()));
        rep.line("gronwall (K=2)", g.passed);
        rep.line("gronwall worst ratio", num(g.worst_ratio));
        rep.line("C(T) = max E(t)/E(0)", num(g.c_t));
        summary.push(format!("kappa {k}: gronwall {}, C(T) {:.4e}", g.passed, g.c_t));
    }
    let csv = write_table(
        ctx,
        "simulate.csv",
        &["kappa", "t", "norm2", "SUU", "E", "seminorm1"],
        &rows,
    )?;
    let txt = write_text(ctx, &rep, "simulate.txt")?;
    Ok(Outcome {
        exit: 0,
        files: vec![csv, txt],
        summary,
    })
}

struct GrowthRow {
    kappa: f64,
    re: f64,
    im: f64,
    rate: f64,
    moved: f64,
    accepted: bool,
}

pub fn run_growth(ctx: &Context) -> CliResult<Outcome> {
    let cfg = &ctx.cfg;
    let a = cfg.model_a()?;
    let ks = kappas(cfg)?;
    let n = cfg.model.n;
    let rows = in_pool(ctx, || {
        ks.par_iter()
            .map(|&k| -> hypersym::Result<GrowthRow> {
                let disc = mode_operators(a, k, n, Grid::Auto)?;
                let g = guarded_abscissa(&disc, 1e-6)?;
                let t_end = cfg.model.t_end.unwrap_or(12.0 / k.sqrt().max(1.0));
                let rate = measure_growth_rate(&disc, t_end, cfg.model.dt)?;
                Ok(GrowthRow {
                    kappa: k,
                    re: g.coarse.re,
                    im: g.coarse.im,
                    rate,
                    moved: g.moved,
                    accepted: g.accepted,
                })
            })
            .collect::<Vec<_>>()
    })?
    .into_iter()
    .collect::<hypersym::Result<Vec<_>>>()?;

    let fit = growth_rate_fit(&ks, &rows.iter().map(|r| r.re).collect::<Vec<_>>())?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                num(r.kappa),
                n.to_string(),
                num(r.re),
                num(r.im),
                num(r.rate),
                num(r.moved),
                r.accepted.to_string(),
            ]
        })
        .collect();
    let csv = write_table(
        ctx,
        "growth.csv",
        &[
            "kappa",
            "n",
            "re_lambda_max",
            "im_lambda_at_max",
            "norm_rate",
            "guard_shift",
            "guard_ok",
        ],
        &table,
    )?;
    let mut rep = TextReport::default();
    rep.section("growth");
    rep.line("a", a);
    rep.line("regime", format!("{:?}", regime(a)));
    rep.line(
        "kappas",
        ks.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(", "),
    );
    let mut summary = Vec::new();
    match fit.verdict {
        GrowthVerdict::NoGrowth => {
            rep.line("verdict", "no growth");
            summary.push("verdict: no growth".to_string());
        }
        GrowthVerdict::Growth => {
            rep.line("verdict", "growth");
            if let (Some(p), Some(c)) = (fit.exponent, fit.prefactor) {
                rep.line("p", format!("{p:.6}"));
                rep.line("c", format!("{c:.6}"));
                rep.line("s*", fit.s_star.map_or("undefined".to_string(), |s| format!("{s:.6}")));
                rep.line("residual", num(fit.residual.unwrap_or(f64::NAN)));
                summary.push(format!(
                    "p = {p:.4}, c = {c:.4}, s* = {}",
                    fit.s_star.map_or("undefined".to_string(), |s| format!("{s:.4}"))
                ));
            }
            if fit.restricted {
                rep.line("restricted", "non-positive rates left out of the fit");
            }
        }
    }
    let rejected: Vec<String> = rows
        .iter()
        .filter(|r| !r.accepted)
        .map(|r| r.kappa.to_string())
        .collect();
    if !rejected.is_empty() {
        rep.line("spurious-eigenvalue guard rejected kappa", rejected.join(", "));
        summary.push(format!("guard rejected kappa {}", rejected.join(", ")));
    }
    let txt = write_text(ctx, &rep, "growth.txt")?;
    Ok(Outcome {
        exit: if rejected.is_empty() { 0 } else { 3 },
        files: vec![csv, txt],
        summary,
    })
}

pub fn run_verify(ctx: &Context) -> CliResult<Outcome> {
    let cfg = &ctx.cfg;
    let mut checks: Vec<(String, bool, String)> = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    if cfg.system.is_some() {
        let sys = load_system(cfg)?;
        let nv = 2 * sys.space_dim() + 2;
        let det_poly = sys.symbol_poly().determinant();
        let mut worst = 0.0f64;
        for _ in 0..1000 {
            let v: Vec<f64> = (0..nv).map(|_| rng.random_range(-2.0..2.0)).collect();
            let rho = CotangentPoint::from_coords(sys.space_dim(), &v)?;
            let l: CMat = eval_symbol(&sys, &rho)?;
            let a = det_poly.eval_real(&v);
            let b = l.clone().lu().determinant();
            worst = worst.max((a - b).norm() / (1.0 + l.norm().powi(sys.dimension() as i32)));
        }
        checks.push((
            "symbolic determinant".into(),
            worst <= 1e-10,
            format!("max rel diff {}", num(worst)),
        ));
    }

    if let Some(a) = cfg.model.a {
        checks.push(("regime".into(), true, format!("{:?}", regime(a))));
        if let Some(mu) = mu_of(a) {
            model_checks(mu, cfg, &mut checks)?;
        }
    }

    let mut rep = TextReport::default();
    rep.section("verify");
    let mut failed = 0;
    let mut summary = Vec::new();
    for (name, ok, detail) in &checks {
        let tag = if *ok { "PASS" } else { "FAIL" };
        if !ok {
            failed += 1;
        }
        rep.line(&format!("{tag} {name}"), detail);
        summary.push(format!("{tag} {name}: {detail}"));
    }
    let file = write_text(ctx, &rep, "verify.txt")?;
    Ok(Outcome {
        exit: if failed == 0 { 0 } else { 2 },
        files: vec![file],
        summary,
    })
}

fn model_checks(mu: f64, cfg: &RunConfig, checks: &mut Vec<(String, bool, String)>) -> CliResult<()> {
    let a = Complex64::new(0.0, mu);
    let disc = mode_operators(a, 2.0, 65, Grid::Auto)?;
    let (r1, r2) = block_identity_residuals(&disc)?;
    checks.push((
        "block identities".into(),
        r1.max(r2) <= 1e-12,
        format!("residuals {} {}", num(r1), num(r2)),
    ));
    let lambda = cfg.model.lambda;
    let sym = symmetrizer_assemble(&disc, lambda)?;
    let rc = re_sg_identity_check(&disc, &sym)?;
    let mut detail = String::new();
    let _ = write!(detail, "residual {}, corner {:.6}", num(rc.residual), rc.corner);
    checks.push((
        "Re(S G) corner structure".into(),
        rc.residual <= 1e-12 && (rc.corner + 0.5 * mu * mu * lambda).abs() <= 1e-12,
        detail,
    ));
    if lambda <= lambda_bound(mu) {
        let ratio = re_sg_ratio(&disc, &sym, 100, cfg.seed)?;
        checks.push((
            "Re(S G U, U) <= (S U, U)".into(),
            ratio <= 1.0 + 1e-9,
            format!("max ratio {}", num(ratio)),
        ));
    }
    if mu.abs() < 1.0 {
        let osc = oscillator_spectrum_check(&mode_operators(a, 1.0, 257, Grid::Auto)?)?;
        checks.push((
            "oscillator lowest eigenvalue".into(),
            osc.error <= 1e-3,
            format!(
                "{} vs {} (rel err {})",
                num(osc.lowest),
                num(osc.expected),
                num(osc.error)
            ),
        ));
    }
    let comm = commutator_inequality_check(&mode_operators(a, 4.0, 129, Grid::Auto)?, 50, cfg.seed)?;
    checks.push((
        "commutator inequality".into(),
        comm.max_ratio <= 1.0 + 1e-6 && comm.max_discrete_ratio <= 1.0 + 1e-12,
        format!("max ratio {}", num(comm.max_ratio)),
    ));
    Ok(())
}
