//! Exact multivariate polynomials with complex coefficients.
//!
//! Terms are stored densely by multi-index in a `BTreeMap`, so iteration
//! order (and therefore every derived floating-point sum) is deterministic.
//! Determinants and adjugates of polynomial matrices are computed by Laplace
//! expansion with minor memoization, which keeps the arithmetic exact up to
//! coefficient rounding.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub type Exponents = Vec<u32>;

#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Exponents, Complex64>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Complex64) -> Self {
        let mut p = Poly::zero(nvars);
        if c != ZERO {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn one(nvars: usize) -> Self {
        Poly::constant(nvars, ONE)
    }

    /// The coordinate function `z_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable index {i} out of range for {nvars} variables");
        let mut e = vec![0; nvars];
        e[i] = 1;
        Poly::monomial(e, ONE)
    }

    pub fn monomial(exponents: Exponents, c: Complex64) -> Self {
        let nvars = exponents.len();
        let mut p = Poly::zero(nvars);
        if c != ZERO {
            p.terms.insert(exponents, c);
        }
        p
    }

    /// Linear form `sum_i coeffs[i] z_i`.
    pub fn linear(coeffs: &[Complex64]) -> Self {
        let n = coeffs.len();
        let mut p = Poly::zero(n);
        for (i, &c) in coeffs.iter().enumerate() {
            if c != ZERO {
                let mut e = vec![0; n];
                e[i] = 1;
                p.terms.insert(e, c);
            }
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &Complex64)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, exponents: &[u32]) -> Complex64 {
        self.terms.get(exponents).copied().unwrap_or(ZERO)
    }

    /// Maximum total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(|e| e.iter().sum::<u32>());
        match degs.next() {
            None => true,
            Some(d) => degs.all(|x| x == d),
        }
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn insert_add(&mut self, e: Exponents, c: Complex64) {
        // exact cancellation only; approximate cancellation is `prune`'s job
        match self.terms.entry(e) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == ZERO {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                if c != ZERO {
                    v.insert(c);
                }
            }
        }
    }

    /// Drop coefficients with modulus at or below `tol`.
    pub fn prune(&mut self, tol: f64) {
        self.terms.retain(|_, c| c.norm() > tol);
    }

    pub fn pruned(mut self, tol: f64) -> Self {
        self.prune(tol);
        self
    }

    pub fn scale(&self, c: Complex64) -> Self {
        if c == ZERO {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Poly::one(self.nvars);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        assert_eq!(z.len(), self.nvars, "evaluation point has wrong dimension");
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter()
                    .zip(z)
                    .fold(*c, |acc, (&k, zi)| if k == 0 { acc } else { acc * zi.powu(k) })
            })
            .sum()
    }

    pub fn eval_real(&self, z: &[f64]) -> Complex64 {
        assert_eq!(z.len(), self.nvars, "evaluation point has wrong dimension");
        self.terms
            .iter()
            .map(|(e, c)| {
                let m: f64 = e
                    .iter()
                    .zip(z)
                    .map(|(&k, zi)| if k == 0 { 1.0 } else { zi.powi(k as i32) })
                    .product();
                c * m
            })
            .sum()
    }

    pub fn derivative(&self, var: usize) -> Self {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            let k = e[var];
            if k == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[var] = k - 1;
            out.insert_add(e2, c * k as f64);
        }
        out
    }

    /// Mixed partial derivative `d^orders`.
    pub fn derivative_multi(&self, orders: &[u32]) -> Self {
        assert_eq!(orders.len(), self.nvars);
        let mut p = self.clone();
        for (v, &k) in orders.iter().enumerate() {
            for _ in 0..k {
                p = p.derivative(v);
            }
        }
        p
    }

    /// `sum_k dir_k d_k p`.
    pub fn directional_derivative(&self, dir: &[f64]) -> Self {
        assert_eq!(dir.len(), self.nvars);
        let mut out = Poly::zero(self.nvars);
        for (k, &dk) in dir.iter().enumerate() {
            if dk != 0.0 {
                out = &out + &self.derivative(k).scale(Complex64::new(dk, 0.0));
            }
        }
        out
    }

    /// Terms whose degree in the variables flagged by `mask` equals `degree`.
    pub fn homogeneous_part(&self, mask: &[bool], degree: u32) -> Self {
        assert_eq!(mask.len(), self.nvars);
        let terms = self
            .terms
            .iter()
            .filter(|(e, _)| e.iter().zip(mask).filter(|(_, &m)| m).map(|(&k, _)| k).sum::<u32>() == degree)
            .map(|(e, c)| (e.clone(), *c))
            .collect();
        Poly {
            nvars: self.nvars,
            terms,
        }
    }

    /// Coefficients (ascending powers of `s`) of `s -> p(base + s dir)`.
    pub fn restrict_to_line(&self, base: &[f64], dir: &[f64]) -> Vec<Complex64> {
        assert_eq!(base.len(), self.nvars);
        assert_eq!(dir.len(), self.nvars);
        let deg = self.degree().unwrap_or(0) as usize;
        let mut out = vec![ZERO; deg + 1];
        // powers of each affine factor (b_k + s d_k), cached per variable
        let mut cache: HashMap<(usize, u32), Vec<f64>> = HashMap::new();
        for (e, c) in &self.terms {
            let mut acc = vec![1.0];
            for (k, &ek) in e.iter().enumerate() {
                if ek == 0 {
                    continue;
                }
                let factor = cache
                    .entry((k, ek))
                    .or_insert_with(|| {
                        let lin = [base[k], dir[k]];
                        let mut f = vec![1.0];
                        for _ in 0..ek {
                            f = convolve(&f, &lin);
                        }
                        f
                    })
                    .clone();
                acc = convolve(&acc, &factor);
            }
            for (i, a) in acc.iter().enumerate() {
                out[i] += c * a;
            }
        }
        out
    }

    /// Re-express a polynomial in `self.nvars` variables inside a ring of
    /// `nvars` variables, variable `i` going to slot `slots[i]`.
    pub fn embed(&self, nvars: usize, slots: &[usize]) -> Self {
        assert_eq!(slots.len(), self.nvars);
        let mut out = Poly::zero(nvars);
        for (e, c) in &self.terms {
            let mut e2 = vec![0; nvars];
            for (i, &k) in e.iter().enumerate() {
                e2[slots[i]] += k;
            }
            out.insert_add(e2, *c);
        }
        out
    }

    /// Maximum coefficient distance to `other`.
    pub fn max_coeff_diff(&self, other: &Poly) -> f64 {
        (self - other).max_abs_coeff()
    }

    pub fn display_with<'a>(&'a self, names: &'a [String]) -> PolyDisplay<'a> {
        PolyDisplay { poly: self, names }
    }
}

fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

impl Add<&Poly> for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        assert_eq!(self.nvars, rhs.nvars, "adding polynomials over different rings");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.insert_add(e.clone(), *c);
        }
        out
    }
}

impl Sub<&Poly> for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        assert_eq!(self.nvars, rhs.nvars, "subtracting polynomials over different rings");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.insert_add(e.clone(), -*c);
        }
        out
    }
}

impl Mul<&Poly> for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        assert_eq!(self.nvars, rhs.nvars, "multiplying polynomials over different rings");
        let mut out = Poly::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let e: Exponents = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.insert_add(e, c1 * c2);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-ONE)
    }
}

pub struct PolyDisplay<'a> {
    poly: &'a Poly,
    names: &'a [String],
}

fn fmt_coeff(c: Complex64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else if c.re == 0.0 {
        format!("{}i", c.im)
    } else {
        format!("({}{:+}i)", c.re, c.im)
    }
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return write!(f, "0");
        }
        // highest degree first
        let mut terms: Vec<_> = self.poly.terms.iter().collect();
        terms.sort_by(|a, b| {
            let da: u32 = a.0.iter().sum();
            let db: u32 = b.0.iter().sum();
            db.cmp(&da).then_with(|| b.0.cmp(a.0))
        });
        for (idx, (e, c)) in terms.into_iter().enumerate() {
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| {
                    let name = self.names.get(i).cloned().unwrap_or_else(|| format!("z{i}"));
                    if k == 1 {
                        name
                    } else {
                        format!("{name}^{k}")
                    }
                })
                .collect();
            let (sign, mag) = if c.im == 0.0 && c.re < 0.0 {
                ("-", Complex64::new(-c.re, 0.0))
            } else {
                ("+", *c)
            };
            if idx == 0 {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let coeff = fmt_coeff(mag);
            if mono.is_empty() {
                write!(f, "{coeff}")?;
            } else if mag == ONE {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{coeff}*{}", mono.join("*"))?;
            }
        }
        Ok(())
    }
}

/// Homogeneous polynomial over named variables.
#[derive(Clone, Debug, PartialEq)]
pub struct HomogeneousPolynomial {
    variables: Vec<String>,
    degree: u32,
    poly: Poly,
}

impl HomogeneousPolynomial {
    /// Prunes coefficients below `tol` and checks homogeneity.
    pub fn new(variables: Vec<String>, poly: Poly, tol: f64) -> Result<Self> {
        if variables.len() != poly.nvars() {
            return Err(Error::Inconsistent(format!(
                "{} variable names for a polynomial in {} variables",
                variables.len(),
                poly.nvars()
            )));
        }
        let poly = poly.pruned(tol);
        if !poly.is_homogeneous() {
            return Err(Error::Inconsistent("polynomial is not homogeneous".to_string()));
        }
        let degree = poly.degree().unwrap_or(0);
        Ok(HomogeneousPolynomial {
            variables,
            degree,
            poly,
        })
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn coefficient(&self, exponents: &[u32]) -> Complex64 {
        self.poly.coefficient(exponents)
    }

    pub fn eval_real(&self, z: &[f64]) -> Complex64 {
        self.poly.eval_real(z)
    }
}

impl fmt::Display for HomogeneousPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.poly.display_with(&self.variables))
    }
}

/// Minimal commutative-ring interface for the generic determinant.
pub trait DetRing: Clone {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn ring_add(&self, other: &Self) -> Self;
    fn ring_sub(&self, other: &Self) -> Self;
    fn ring_mul(&self, other: &Self) -> Self;
}

impl DetRing for Complex64 {
    fn zero_like(&self) -> Self {
        ZERO
    }
    fn one_like(&self) -> Self {
        ONE
    }
    fn ring_add(&self, other: &Self) -> Self {
        self + other
    }
    fn ring_sub(&self, other: &Self) -> Self {
        self - other
    }
    fn ring_mul(&self, other: &Self) -> Self {
        self * other
    }
}

impl DetRing for Poly {
    fn zero_like(&self) -> Self {
        Poly::zero(self.nvars)
    }
    fn one_like(&self) -> Self {
        Poly::one(self.nvars)
    }
    fn ring_add(&self, other: &Self) -> Self {
        self + other
    }
    fn ring_sub(&self, other: &Self) -> Self {
        self - other
    }
    fn ring_mul(&self, other: &Self) -> Self {
        self * other
    }
}

/// Determinant of a square matrix (row-major nested vectors) by Laplace
/// expansion along rows, memoizing minors by their column set.
///
/// Cost is `O(n 2^n)` ring multiplications; intended for `n <= 8`.
pub fn determinant<R: DetRing>(m: &[Vec<R>]) -> R {
    let n = m.len();
    assert!(n > 0, "determinant of an empty matrix");
    assert!(n <= 16, "Laplace expansion limited to n <= 16");
    for row in m {
        assert_eq!(row.len(), n, "determinant of a non-square matrix");
    }
    let mut memo: HashMap<u32, R> = HashMap::new();
    let full: u32 = (1u32 << n) - 1;
    det_rec(m, 0, full, &mut memo)
}

fn det_rec<R: DetRing>(m: &[Vec<R>], row: usize, avail: u32, memo: &mut HashMap<u32, R>) -> R {
    if row == m.len() {
        return m[0][0].one_like();
    }
    if let Some(v) = memo.get(&avail) {
        return v.clone();
    }
    let mut acc = m[0][0].zero_like();
    let mut position = 0usize;
    for c in 0..m.len() {
        if avail & (1 << c) == 0 {
            continue;
        }
        let minor = det_rec(m, row + 1, avail & !(1 << c), memo);
        let term = m[row][c].ring_mul(&minor);
        acc = if position.is_multiple_of(2) {
            acc.ring_add(&term)
        } else {
            acc.ring_sub(&term)
        };
        position += 1;
    }
    memo.insert(avail, acc.clone());
    acc
}

/// Adjugate (transposed cofactor matrix): `m * adj(m) = det(m) I`.
pub fn adjugate<R: DetRing>(m: &[Vec<R>]) -> Vec<Vec<R>> {
    let n = m.len();
    if n == 1 {
        return vec![vec![m[0][0].one_like()]];
    }
    let mut adj = vec![vec![m[0][0].zero_like(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let minor: Vec<Vec<R>> = (0..n)
                .filter(|&r| r != i)
                .map(|r| (0..n).filter(|&c| c != j).map(|c| m[r][c].clone()).collect())
                .collect();
            let d = determinant(&minor);
            adj[j][i] = if (i + j).is_multiple_of(2) {
                d
            } else {
                d.zero_like().ring_sub(&d)
            };
        }
    }
    adj
}

/// Square matrix of polynomials over a common ring.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyMatrix {
    n: usize,
    nvars: usize,
    entries: Vec<Vec<Poly>>,
}

impl PolyMatrix {
    pub fn zeros(n: usize, nvars: usize) -> Self {
        PolyMatrix {
            n,
            nvars,
            entries: vec![vec![Poly::zero(nvars); n]; n],
        }
    }

    pub fn identity(n: usize, nvars: usize) -> Self {
        let mut m = PolyMatrix::zeros(n, nvars);
        for i in 0..n {
            m.entries[i][i] = Poly::one(nvars);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Poly>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Inconsistent("empty matrix".into()));
        }
        let nvars = rows[0][0].nvars();
        for r in &rows {
            if r.len() != n {
                return Err(Error::Inconsistent(format!(
                    "matrix row has {} entries, expected {n}",
                    r.len()
                )));
            }
            if r.iter().any(|p| p.nvars() != nvars) {
                return Err(Error::Inconsistent("mixed polynomial rings in matrix".into()));
            }
        }
        Ok(PolyMatrix {
            n,
            nvars,
            entries: rows,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn entry(&self, i: usize, j: usize) -> &Poly {
        &self.entries[i][j]
    }

    pub fn rows(&self) -> &[Vec<Poly>] {
        &self.entries
    }

    pub fn map(&self, f: impl Fn(&Poly) -> Poly) -> Self {
        PolyMatrix {
            n: self.n,
            nvars: self.nvars,
            entries: self.entries.iter().map(|r| r.iter().map(&f).collect()).collect(),
        }
    }

    pub fn add(&self, other: &PolyMatrix) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            for j in 0..self.n {
                out.entries[i][j] = &self.entries[i][j] + &other.entries[i][j];
            }
        }
        out
    }

    pub fn mul(&self, other: &PolyMatrix) -> Self {
        let mut out = PolyMatrix::zeros(self.n, self.nvars);
        for i in 0..self.n {
            for j in 0..self.n {
                let mut acc = Poly::zero(self.nvars);
                for k in 0..self.n {
                    if self.entries[i][k].is_zero() || other.entries[k][j].is_zero() {
                        continue;
                    }
                    acc = &acc + &(&self.entries[i][k] * &other.entries[k][j]);
                }
                out.entries[i][j] = acc;
            }
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|p| p.scale(c))
    }

    pub fn derivative_multi(&self, orders: &[u32]) -> Self {
        self.map(|p| p.derivative_multi(orders))
    }

    pub fn determinant(&self) -> Poly {
        determinant(&self.entries)
    }

    pub fn adjugate(&self) -> Self {
        PolyMatrix {
            n: self.n,
            nvars: self.nvars,
            entries: adjugate(&self.entries),
        }
    }

    pub fn eval_real(&self, z: &[f64]) -> nalgebra::DMatrix<Complex64> {
        nalgebra::DMatrix::from_fn(self.n, self.n, |i, j| self.entries[i][j].eval_real(z))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().flatten().all(Poly::is_zero)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn product_and_derivative() {
        // (x + y)^2 = x^2 + 2xy + y^2
        let x = Poly::var(2, 0);
        let y = Poly::var(2, 1);
        let s = &x + &y;
        let sq = s.pow(2);
        assert_eq!(sq.coefficient(&[1, 1]), c(2.0));
        assert_eq!(sq.derivative(0), (&x + &y).scale(c(2.0)));
        assert!(sq.is_homogeneous());
        assert_eq!(sq.degree(), Some(2));
    }

    #[test]
    fn cancellation_prunes_terms() {
        let x = Poly::var(1, 0);
        let d = &x - &x;
        assert!(d.is_zero());
    }

    #[test]
    fn line_restriction_matches_evaluation() {
        // p = t^2 x - 3 x^3
        let t = Poly::var(2, 0);
        let x = Poly::var(2, 1);
        let p = &(&t.pow(2) * &x) - &x.pow(3).scale(c(3.0));
        let base = [0.3, -1.2];
        let dir = [1.5, 0.25];
        let coeffs = p.restrict_to_line(&base, &dir);
        for s in [-2.0, 0.0, 0.7, 3.0] {
            let direct = p.eval_real(&[base[0] + s * dir[0], base[1] + s * dir[1]]);
            let via: Complex64 = coeffs.iter().enumerate().map(|(k, a)| a * s.powi(k as i32)).sum();
            assert!((direct - via).norm() < 1e-12);
        }
    }

    #[test]
    fn laplace_determinant_of_numeric_matrix() {
        let m = vec![
            vec![c(2.0), c(1.0), c(0.0)],
            vec![c(1.0), c(3.0), c(1.0)],
            vec![c(0.0), c(1.0), c(4.0)],
        ];
        // 2(12-1) - 1(4-0) = 18
        assert!((determinant(&m) - c(18.0)).norm() < 1e-14);
        let adj = adjugate(&m);
        for i in 0..3 {
            for j in 0..3 {
                let s: Complex64 = (0..3).map(|k| m[i][k] * adj[k][j]).sum();
                let expect = if i == j { c(18.0) } else { c(0.0) };
                assert!((s - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn symbolic_determinant_of_wave_symbol() {
        // det [[tau, -xi], [-xi, tau]] = tau^2 - xi^2
        let tau = Poly::var(2, 0);
        let xi = Poly::var(2, 1);
        let m = PolyMatrix::from_rows(vec![vec![tau.clone(), -&xi], vec![-&xi, tau.clone()]]).unwrap();
        let d = m.determinant();
        assert_eq!(d, &tau.pow(2) - &xi.pow(2));
    }

    #[test]
    fn homogeneous_part_by_mask() {
        // t*tau + tau^2 + 1 ; degree in tau
        let t = Poly::var(2, 0);
        let tau = Poly::var(2, 1);
        let p = &(&(&t * &tau) + &tau.pow(2)) + &Poly::one(2);
        let mask = [false, true];
        assert_eq!(p.homogeneous_part(&mask, 1), &t * &tau);
        assert_eq!(p.homogeneous_part(&mask, 0), Poly::one(2));
    }

    #[test]
    fn display_is_readable() {
        let names: Vec<String> = ["tau", "xi"].iter().map(|s| s.to_string()).collect();
        let tau = Poly::var(2, 0);
        let xi = Poly::var(2, 1);
        let p = &tau.pow(3) - &(&tau * &xi.pow(2));
        assert_eq!(p.display_with(&names).to_string(), "tau^3 - tau*xi^2");
    }

    #[test]
    fn non_homogeneous_rejected() {
        let x = Poly::var(1, 0);
        let p = &x + &Poly::one(1);
        assert!(HomogeneousPolynomial::new(vec!["x".into()], p, 0.0).is_err());
    }
}
