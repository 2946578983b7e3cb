//! First-order system symbols `L(t,x,tau,xi) = tau I - sum_j xi_j A_j(t,x)`.
//!
//! System file format (see `text` for the lexical rules):
//!
//! ```text
//! name = wave
//! dimension = 2          # N
//! space_dim = 1          # d
//! positions = t x        # optional, default t x1 .. xd
//! momenta = tau xi       # optional, default tau xi1 .. xid
//! [params]
//! c = 2
//! [A1]                   # one section per A_j, N rows of N expressions
//! 0, c
//! c, 0
//! [B]                    # optional zero-order term
//! 0, 0
//! 0, 0
//! ```
//!
//! Matrix entries are polynomials in the position variables with complex
//! coefficients; parameters may be referenced by name.

use std::collections::HashMap;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::phase::{default_names, CotangentPoint};
use crate::poly::{determinant, Poly, PolyMatrix};
use crate::text::{parse_expr, shift, split_list, Document, LineKind};
use crate::tolerances::{EIGEN_CLUSTER_REL, IMAG_REL, RANK_REL};

/// Largest system size evaluated by cofactor expansion.
pub const MAX_EXACT_DIM: usize = 8;

#[derive(Clone, Debug)]
pub struct SystemSymbol {
    name: String,
    n: usize,
    d: usize,
    positions: Vec<String>,
    momenta: Vec<String>,
    coeffs: Vec<PolyMatrix>,
    zero_order: Option<PolyMatrix>,
    symbol: PolyMatrix,
}

impl SystemSymbol {
    /// `coeffs[j]` is `A_{j+1}` as a polynomial matrix in `(t, x_1..x_d)`.
    pub fn new(name: impl Into<String>, coeffs: Vec<PolyMatrix>, zero_order: Option<PolyMatrix>) -> Result<Self> {
        let d = coeffs.len();
        if d == 0 {
            return Err(Error::Config("a system needs at least one coefficient matrix".into()));
        }
        let (positions, momenta) = default_names(d);
        Self::with_names(name, coeffs, zero_order, positions, momenta)
    }

    pub fn with_names(
        name: impl Into<String>,
        coeffs: Vec<PolyMatrix>,
        zero_order: Option<PolyMatrix>,
        positions: Vec<String>,
        momenta: Vec<String>,
    ) -> Result<Self> {
        let d = coeffs.len();
        if d == 0 {
            return Err(Error::Config("a system needs at least one coefficient matrix".into()));
        }
        let n = coeffs[0].dim();
        if n == 0 {
            return Err(Error::Config("system dimension must be positive".into()));
        }
        if positions.len() != d + 1 || momenta.len() != d + 1 {
            return Err(Error::Config(format!("expected {} position and momentum names", d + 1)));
        }
        for (j, a) in coeffs.iter().chain(zero_order.iter()).enumerate() {
            if a.dim() != n {
                return Err(Error::Config(format!(
                    "coefficient {} is {}x{}, expected {n}x{n}",
                    j + 1,
                    a.dim(),
                    a.dim()
                )));
            }
            if a.nvars() != d + 1 {
                return Err(Error::Config(format!(
                    "coefficient {} must depend on {} position variables",
                    j + 1,
                    d + 1
                )));
            }
        }
        let symbol = build_symbol(n, d, &coeffs);
        Ok(SystemSymbol {
            name: name.into(),
            n,
            d,
            positions,
            momenta,
            coeffs,
            zero_order,
            symbol,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn space_dim(&self) -> usize {
        self.d
    }

    /// Names of all phase variables in flat order.
    pub fn phase_names(&self) -> Vec<String> {
        self.positions.iter().chain(&self.momenta).cloned().collect()
    }

    pub fn coefficients(&self) -> &[PolyMatrix] {
        &self.coeffs
    }

    pub fn zero_order(&self) -> Option<&PolyMatrix> {
        self.zero_order.as_ref()
    }

    /// The principal symbol as a polynomial matrix in the phase variables.
    pub fn symbol_poly(&self) -> &PolyMatrix {
        &self.symbol
    }

    /// Principal symbol plus the zero-order term, in the phase variables.
    pub fn full_symbol_poly(&self) -> PolyMatrix {
        match &self.zero_order {
            None => self.symbol.clone(),
            Some(b) => {
                let slots: Vec<usize> = (0..=self.d).collect();
                let nv = 2 * self.d + 2;
                self.symbol.add(&b.map(|p| p.embed(nv, &slots)))
            }
        }
    }

    /// `A_j(t, x)` for every `j`.
    pub fn coefficients_at(&self, t: f64, x: &[f64]) -> Result<Vec<CMat>> {
        if x.len() != self.d {
            return Err(Error::Config(format!(
                "point has {} space coordinates, system has {}",
                x.len(),
                self.d
            )));
        }
        let mut z = vec![t];
        z.extend_from_slice(x);
        let mats: Vec<CMat> = self.coeffs.iter().map(|a| a.eval_real(&z)).collect();
        if mats
            .iter()
            .any(|m| m.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()))
        {
            return Err(Error::Domain("coefficient not finite at query point".into()));
        }
        Ok(mats)
    }

    /// `A(t,x,xi) = sum_j xi_j A_j(t,x)`.
    pub fn principal_matrix(&self, t: f64, x: &[f64], xi: &[f64]) -> Result<CMat> {
        if xi.len() != self.d {
            return Err(Error::Config(format!(
                "covector has {} components, system has {}",
                xi.len(),
                self.d
            )));
        }
        let mats = self.coefficients_at(t, x)?;
        let mut a = CMat::zeros(self.n, self.n);
        for (m, &s) in mats.iter().zip(xi) {
            a += m * linalg::re(s);
        }
        Ok(a)
    }

    pub fn parse(src: &str, overrides: &HashMap<String, Complex64>) -> Result<Self> {
        let doc = Document::parse(src)?;
        let required = |key: &str| {
            doc.get(None, key)
                .ok_or_else(|| Error::parse(1, 1, format!("missing required key '{key}'")))
        };
        let name = doc
            .get(None, "name")
            .map(|l| l.value().0.to_string())
            .unwrap_or_else(|| "system".to_string());
        let n = required("dimension")?.parse_usize()?;
        let d = required("space_dim")?.parse_usize()?;
        if n == 0 || d == 0 {
            return Err(Error::parse(1, 1, "dimension and space_dim must be positive"));
        }
        let (mut positions, mut momenta) = default_names(d);
        for (key, target) in [("positions", &mut positions), ("momenta", &mut momenta)] {
            if let Some(line) = doc.get(None, key) {
                let (v, col) = line.value();
                let names: Vec<String> = v.split_whitespace().map(str::to_string).collect();
                if names.len() != d + 1 {
                    return Err(line.err(col, format!("expected {} names for '{key}'", d + 1)));
                }
                *target = names;
            }
        }

        let mut params: HashMap<String, Complex64> = HashMap::new();
        for (line, key, _) in doc.pairs(Some("params")) {
            let v = match overrides.get(key) {
                Some(v) => *v,
                None => line.parse_complex(&params)?,
            };
            params.insert(key.to_string(), v);
        }
        if let Some(k) = overrides.keys().find(|k| !params.contains_key(*k)) {
            return Err(Error::Config(format!("override for undeclared parameter '{k}'")));
        }

        let read_matrix = |section: &str| -> Result<Option<PolyMatrix>> {
            if !doc.sections().iter().any(|s| s == section) {
                return Ok(None);
            }
            let mut rows = Vec::new();
            for line in doc.raw_lines(section) {
                let LineKind::Raw { text, col } = &line.kind else {
                    unreachable!()
                };
                let items = split_list(text);
                if items.len() != n {
                    return Err(line.err(*col, format!("expected {n} entries in row, found {}", items.len())));
                }
                let mut row = Vec::with_capacity(n);
                for (item, c) in items {
                    let p = parse_expr(item, &positions, &params).map_err(|e| shift(e, line.line, col + c - 1))?;
                    row.push(p);
                }
                rows.push(row);
            }
            if rows.len() != n {
                return Err(Error::parse(
                    1,
                    1,
                    format!("section [{section}] has {} rows, expected {n}", rows.len()),
                ));
            }
            Ok(Some(PolyMatrix::from_rows(rows)?))
        };

        let mut coeffs = Vec::with_capacity(d);
        for j in 1..=d {
            let m =
                read_matrix(&format!("A{j}"))?.ok_or_else(|| Error::parse(1, 1, format!("missing section [A{j}]")))?;
            coeffs.push(m);
        }
        let zero_order = read_matrix("B")?;
        Self::with_names(name, coeffs, zero_order, positions, momenta)
    }

    pub fn from_file(path: impl AsRef<Path>, overrides: &HashMap<String, Complex64>) -> Result<Self> {
        let path = path.as_ref();
        let src =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&src, overrides)
    }
}

fn build_symbol(n: usize, d: usize, coeffs: &[PolyMatrix]) -> PolyMatrix {
    let nv = 2 * d + 2;
    let slots: Vec<usize> = (0..=d).collect();
    let tau = Poly::var(nv, d + 1);
    let mut rows = vec![vec![Poly::zero(nv); n]; n];
    for (i, row) in rows.iter_mut().enumerate() {
        row[i] = tau.clone();
    }
    for (j, a) in coeffs.iter().enumerate() {
        let xi = Poly::var(nv, d + 2 + j);
        for (i, row) in rows.iter_mut().enumerate() {
            for (k, entry) in row.iter_mut().enumerate() {
                let c = a.entry(i, k).embed(nv, &slots);
                if !c.is_zero() {
                    *entry = &*entry - &(&xi * &c);
                }
            }
        }
    }
    PolyMatrix::from_rows(rows).expect("square by construction")
}

/// `L(rho) = tau I - sum_j xi_j A_j(t,x)`.
pub fn eval_symbol(sys: &SystemSymbol, rho: &CotangentPoint) -> Result<CMat> {
    if rho.space_dim() != sys.space_dim() {
        return Err(Error::Config(format!(
            "point has {} space coordinates, system has {}",
            rho.space_dim(),
            sys.space_dim()
        )));
    }
    let a = sys.principal_matrix(rho.t, &rho.x, &rho.xi)?;
    Ok(CMat::identity(sys.n, sys.n) * linalg::re(rho.tau) - a)
}

/// Determinant of a dense complex matrix: cofactor expansion up to size 8,
/// LU with partial pivoting above.
pub fn det_dense(m: &CMat) -> Complex64 {
    if m.nrows() <= MAX_EXACT_DIM {
        let rows: Vec<Vec<Complex64>> = (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect();
        determinant(&rows)
    } else {
        m.clone().lu().determinant()
    }
}

pub fn det_symbol(sys: &SystemSymbol, rho: &CotangentPoint) -> Result<Complex64> {
    Ok(det_dense(&eval_symbol(sys, rho)?))
}

#[derive(Clone, Debug)]
pub struct EigenReport {
    /// Real parts of the distinct eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    pub alg_mult: Vec<usize>,
    pub geom_mult: Vec<usize>,
    pub semisimple: bool,
    /// Orthonormal eigenspace basis per eigenvalue (columns).
    pub kernel_basis: Vec<CMat>,
    /// Some eigenvalue has an imaginary part beyond tolerance.
    pub hyperbolicity_violation: bool,
    pub max_imag: f64,
}

/// Eigenstructure of a small square matrix with clustering and rank cuts
/// from `tolerances`.
pub fn eigen_report(a: &CMat) -> Result<EigenReport> {
    let n = a.nrows();
    let scale = a.norm();
    let values = linalg::eigenvalues_small(a)?;
    let tol = EIGEN_CLUSTER_REL * scale;
    let clusters = linalg::cluster(&values, tol);
    let mut eigenvalues = Vec::new();
    let mut alg_mult = Vec::new();
    let mut geom_mult = Vec::new();
    let mut kernel_basis = Vec::new();
    let mut max_imag = 0.0f64;
    for (lambda, members) in clusters {
        max_imag = max_imag.max(lambda.im.abs());
        let shifted = a - CMat::identity(n, n) * lambda;
        let mut ker = linalg::null_space(&shifted, RANK_REL);
        if ker.ncols() > members.len() {
            ker = ker.columns(0, members.len()).into_owned();
        }
        eigenvalues.push(lambda.re);
        alg_mult.push(members.len());
        geom_mult.push(ker.ncols());
        kernel_basis.push(ker);
    }
    let violation = max_imag > IMAG_REL * scale.max(f64::MIN_POSITIVE);
    let semisimple = !violation && alg_mult.iter().zip(&geom_mult).all(|(a, g)| a == g);
    Ok(EigenReport {
        eigenvalues,
        alg_mult,
        geom_mult,
        semisimple,
        kernel_basis,
        hyperbolicity_violation: violation,
        max_imag,
    })
}

/// Eigenstructure of `A(t,x,xi) = sum_j xi_j A_j(t,x)`.
pub fn eigen_structure(sys: &SystemSymbol, t: f64, x: &[f64], xi: &[f64]) -> Result<EigenReport> {
    eigen_report(&sys.principal_matrix(t, x, xi)?)
}

/// Polynomial matrix with constant entries.
pub fn constant_matrix(m: &DMatrix<Complex64>, nvars: usize) -> PolyMatrix {
    let rows = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| Poly::constant(nvars, m[(i, j)])).collect())
        .collect();
    PolyMatrix::from_rows(rows).expect("square input")
}
