//! Dense linear-algebra helpers: SVD null spaces, clustering of eigenvalues,
//! polynomial roots, and a compressed sparse row matrix for time stepping.
//!
//! Small problems (symbols, localizations, companions) go through nalgebra;
//! the 3n x 3n mode generators go through faer.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn to_complex(m: &DMatrix<f64>) -> CMat {
    m.map(re)
}

/// Pad with zero rows so the thin SVD exposes every right singular vector.
fn padded<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> DMatrix<T> {
    if m.nrows() >= m.ncols() {
        m.clone()
    } else {
        let mut p = DMatrix::<T>::zeros(m.ncols(), m.ncols());
        p.view_mut((0, 0), (m.nrows(), m.ncols())).copy_from(m);
        p
    }
}

pub fn singular_values<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Numerical rank: singular values above `rel * sigma_max`.
pub fn rank<T: ComplexField<RealField = f64>>(m: &DMatrix<T>, rel: f64) -> usize {
    let s = singular_values(m);
    let Some(&smax) = s.first() else { return 0 };
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > rel * smax).count()
}

/// Orthonormal basis (as columns) of `{v : m v = 0}`.
pub fn null_space<T: ComplexField<RealField = f64>>(m: &DMatrix<T>, rel: f64) -> DMatrix<T> {
    let n = m.ncols();
    if m.nrows() == 0 {
        return DMatrix::identity(n, n);
    }
    let svd = padded(m).svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let smax = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
    let cut = rel * smax;
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] <= cut)
        .collect();
    let mut out = DMatrix::<T>::zeros(n, keep.len());
    for (c, &k) in keep.iter().enumerate() {
        for j in 0..n {
            out[(j, c)] = vt[(k, j)].clone().conjugate();
        }
    }
    out
}

/// Columns `w` with `w^* m = 0`.
pub fn left_null_space<T: ComplexField<RealField = f64>>(m: &DMatrix<T>, rel: f64) -> DMatrix<T> {
    null_space(&m.adjoint(), rel)
}

/// Orthonormal basis of the column span.
pub fn orthonormalize<T: ComplexField<RealField = f64>>(cols: &DMatrix<T>, rel: f64) -> DMatrix<T> {
    if cols.ncols() == 0 {
        return cols.clone();
    }
    let svd = cols.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let smax = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| smax > 0.0 && svd.singular_values[k] > rel * smax)
        .collect();
    DMatrix::from_fn(cols.nrows(), keep.len(), |i, c| u[(i, keep[c])].clone())
}

/// Orthonormal basis of the Euclidean orthogonal complement of the span.
pub fn orthogonal_complement<T: ComplexField<RealField = f64>>(cols: &DMatrix<T>, rel: f64) -> DMatrix<T> {
    if cols.ncols() == 0 {
        return DMatrix::identity(cols.nrows(), cols.nrows());
    }
    null_space(&cols.adjoint(), rel)
}

/// 2-norm condition number; infinite for singular input.
pub fn condition_number<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// Eigenvalues of a small complex matrix via the complex Schur form.
pub fn eigenvalues_small(m: &CMat) -> Result<Vec<Complex64>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let schur = nalgebra::Schur::try_new(m.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical("Schur iteration did not converge".into()))?;
    let ev = schur
        .eigenvalues()
        .ok_or_else(|| Error::Numerical("Schur form not triangular".into()))?;
    Ok(ev.iter().copied().collect())
}

/// Roots of `c[0] + c[1] s + ... + c[k] s^k`. Leading coefficients that are
/// negligible relative to the largest one are dropped first.
pub fn poly_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let scale = coeffs.iter().fold(0.0f64, |a, c| a.max(c.norm()));
    if scale == 0.0 {
        return Err(Error::Numerical("zero polynomial has no isolated roots".into()));
    }
    let mut deg = coeffs.len() - 1;
    while deg > 0 && coeffs[deg].norm() <= 1e-14 * scale {
        deg -= 1;
    }
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[deg];
    let mut comp = CMat::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = ONE;
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -coeffs[i] / lead;
    }
    eigenvalues_small(&comp)
}

/// Group values whose distance is at most `tol` (single linkage, after
/// sorting by real part). Returns (mean, members) per cluster.
pub fn cluster(values: &[Complex64], tol: f64) -> Vec<(Complex64, Vec<usize>)> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        values[a]
            .re
            .total_cmp(&values[b].re)
            .then(values[a].im.total_cmp(&values[b].im))
    });
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &k in &idx {
        let hit = groups
            .iter_mut()
            .find(|g| g.iter().any(|&j| (values[j] - values[k]).norm() <= tol));
        match hit {
            Some(g) => g.push(k),
            None => groups.push(vec![k]),
        }
    }
    groups
        .into_iter()
        .map(|g| {
            let mean = g.iter().map(|&k| values[k]).sum::<Complex64>() / g.len() as f64;
            (mean, g)
        })
        .collect()
}

pub fn to_faer(m: &CMat) -> faer::Mat<faer::c64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

pub fn to_faer_real(m: &DMatrix<f64>) -> faer::Mat<f64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Eigenvalues of a large dense complex matrix.
pub fn eigenvalues_dense(m: &CMat) -> Result<Vec<Complex64>> {
    to_faer(m)
        .eigenvalues()
        .map_err(|e| Error::Numerical(format!("eigensolver failed: {e:?}")))
}

pub fn eigenvalues_dense_real(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    to_faer_real(m)
        .eigenvalues()
        .map_err(|e| Error::Numerical(format!("eigensolver failed: {e:?}")))
}

/// Ascending eigenvalues of a Hermitian matrix (lower triangle is read).
pub fn hermitian_eigenvalues(m: &CMat) -> Result<Vec<f64>> {
    to_faer(m)
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigensolver failed: {e:?}")))
}

/// `a * b`, skipping zero entries of `a`; cheap when `a` is banded.
pub fn mul_sparse_left(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.ncols(), b.nrows());
    let mut out = CMat::zeros(a.nrows(), b.ncols());
    for k in 0..a.ncols() {
        for i in 0..a.nrows() {
            let v = a[(i, k)];
            if v == ZERO {
                continue;
            }
            for j in 0..b.ncols() {
                let bkj = b[(k, j)];
                if bkj != ZERO {
                    out[(i, j)] += v * bkj;
                }
            }
        }
    }
    out
}

/// Max-abs entry.
pub fn max_abs<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> f64 {
    m.iter().fold(0.0f64, |a, x| a.max(x.clone().modulus()))
}

/// Compressed sparse row matrix with complex entries.
#[derive(Clone, Debug)]
pub struct Csr {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<Complex64>,
}

impl Csr {
    pub fn from_dense(m: &CMat) -> Self {
        let mut row_ptr = Vec::with_capacity(m.nrows() + 1);
        let mut col_idx = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let v = m[(i, j)];
                if v != ZERO {
                    col_idx.push(j);
                    vals.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Csr {
            n_rows: m.nrows(),
            n_cols: m.ncols(),
            row_ptr,
            col_idx,
            vals,
        }
    }

    pub fn nrows(&self) -> usize {
        self.n_rows
    }

    pub fn ncols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn mul_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.n_cols);
        for i in 0..self.n_rows {
            let mut acc = ZERO;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.col_idx[k]];
            }
            y[i] = acc;
        }
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n_rows)
            .map(|i| {
                (self.row_ptr[i]..self.row_ptr[i + 1])
                    .map(|k| self.vals[k].norm())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_of_wide_matrix() {
        let m = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let ns = null_space(&m, 1e-10);
        assert_eq!(ns.ncols(), 2);
        assert!((&m * &ns).norm() < 1e-14);
        assert!((ns.transpose() * &ns - DMatrix::<f64>::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn null_space_of_zero_matrix_is_everything() {
        let ns = null_space(&CMat::zeros(3, 3), 1e-10);
        assert_eq!(ns.ncols(), 3);
    }

    #[test]
    fn roots_of_cubic() {
        // s (s - 1)(s + 2) = s^3 + s^2 - 2 s
        let r = poly_roots(&[ZERO, re(-2.0), ONE, ONE]).unwrap();
        let mut re_parts: Vec<f64> = r.iter().map(|z| z.re).collect();
        re_parts.sort_by(f64::total_cmp);
        for (got, want) in re_parts.iter().zip([-2.0, 0.0, 1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        // leading zero coefficient is dropped: 1 + s
        let r = poly_roots(&[ONE, ONE, ZERO]).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0] + ONE).norm() < 1e-14);
    }

    #[test]
    fn clustering_merges_nearby_values() {
        let v = [re(1.0), re(1.0 + 1e-12), re(-1.0)];
        let c = cluster(&v, 1e-9);
        assert_eq!(c.len(), 2);
        assert_eq!(c[1].1.len(), 2);
    }

    #[test]
    fn csr_matches_dense() {
        let m = CMat::from_fn(4, 4, |i, j| {
            if (i + j) % 3 == 0 {
                Complex64::new(i as f64, j as f64)
            } else {
                ZERO
            }
        });
        let x: Vec<Complex64> = (0..4).map(|k| Complex64::new(k as f64, 1.0)).collect();
        let sp = Csr::from_dense(&m);
        let mut y = vec![ZERO; 4];
        sp.mul_into(&x, &mut y);
        let dense = &m * CVec::from_column_slice(&x);
        for k in 0..4 {
            assert!((y[k] - dense[k]).norm() < 1e-14);
        }
    }

    #[test]
    fn dense_and_small_eigensolvers_agree() {
        let m = CMat::from_fn(5, 5, |i, j| {
            Complex64::new((i * 3 + j) as f64 % 7.0, (i as f64 - j as f64) * 0.1)
        });
        let mut a = eigenvalues_small(&m).unwrap();
        let mut b = eigenvalues_dense(&m).unwrap();
        let key = |z: &Complex64| (z.re * 1e6).round() as i64;
        a.sort_by_key(key);
        b.sort_by_key(key);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-9);
        }
    }
}
