//! Dense small-matrix arithmetic.
//!
//! Everything here works on [`Matrix`], a square row-major `f64` value type.
//! Determinants and inverses go through an LU factorization with partial
//! pivoting; the adjugate switches to explicit cofactors when the matrix is
//! not safely invertible, so it stays defined for singular inputs.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::LinalgError;

/// Pivot columns whose largest magnitude is below this are treated as zero,
/// and `det` returns an exact `0.0`.
pub const ZERO_PIVOT_THRESHOLD: f64 = 1e-300;

/// Default relative pivot threshold used by [`is_invertible`].
pub const DEFAULT_INVERTIBILITY_EPS: f64 = 1e-12;

/// Largest supported dimension.
pub const MAX_DIM: usize = 64;

/// Dense real `n x n` matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    elems: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major elements. Fails on `n == 0`, a wrong
    /// element count, or any non-finite element.
    pub fn from_row_major(n: usize, elems: Vec<f64>) -> Result<Self, LinalgError> {
        if n == 0 {
            return Err(LinalgError::EmptyMatrix);
        }
        if elems.len() != n * n {
            return Err(LinalgError::ElementCount {
                n,
                got: elems.len(),
            });
        }
        if let Some(idx) = elems.iter().position(|v| !v.is_finite()) {
            return Err(LinalgError::NonFinite {
                row: idx / n,
                col: idx % n,
            });
        }
        Ok(Self { n, elems })
    }

    /// Builds a matrix from a slice of rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, LinalgError> {
        let n = rows.len();
        let mut elems = Vec::with_capacity(n * n);
        for row in rows {
            let row = row.as_ref();
            if row.len() != n {
                return Err(LinalgError::ElementCount {
                    n,
                    got: row.len() * n,
                });
            }
            elems.extend_from_slice(row);
        }
        Self::from_row_major(n, elems)
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "matrix dimension must be at least 1");
        Self {
            n,
            elems: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self, LinalgError> {
        let n = diag.len();
        let mut elems = vec![0.0; n * n];
        for (i, d) in diag.iter().enumerate() {
            elems[i * n + i] = *d;
        }
        Self::from_row_major(n, elems)
    }

    /// Wraps elements without the finiteness check. Used for intermediate
    /// integrator states where overflow is detected separately.
    pub(crate) fn from_raw(n: usize, elems: Vec<f64>) -> Self {
        debug_assert_eq!(elems.len(), n * n);
        Self { n, elems }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.elems
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.elems
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.elems[i * self.n..(i + 1) * self.n]
    }

    pub fn transpose(&self) -> Matrix {
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    /// Max absolute element.
    pub fn max_norm(&self) -> f64 {
        self.elems.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.elems.iter().all(|v| v.is_finite())
    }

    /// Drops row `skip_row` and column `skip_col`. Requires `n >= 2`.
    pub fn minor(&self, skip_row: usize, skip_col: usize) -> Matrix {
        let n = self.n;
        debug_assert!(n >= 2);
        let mut elems = Vec::with_capacity((n - 1) * (n - 1));
        for i in (0..n).filter(|&i| i != skip_row) {
            for j in (0..n).filter(|&j| j != skip_col) {
                elems.push(self[(i, j)]);
            }
        }
        Matrix::from_raw(n - 1, elems)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.elems[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.elems[i * self.n + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[f64]> = (0..self.n).map(|i| self.row(i)).collect();
        f.debug_struct("Matrix")
            .field("n", &self.n)
            .field("rows", &rows)
            .finish()
    }
}

/// Which vectors `replaced_det_sum` swaps out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Rows,
    Columns,
}

fn check_dims(a: &Matrix, b: &Matrix) -> Result<(), LinalgError> {
    if a.n != b.n {
        return Err(LinalgError::DimensionMismatch {
            left: a.n,
            right: b.n,
        });
    }
    Ok(())
}

pub fn trace(m: &Matrix) -> f64 {
    let mut sum = 0.0;
    for i in 0..m.n {
        sum += m[(i, i)];
    }
    sum
}

pub fn mat_add(a: &Matrix, b: &Matrix) -> Result<Matrix, LinalgError> {
    check_dims(a, b)?;
    let elems = a.elems.iter().zip(&b.elems).map(|(x, y)| x + y).collect();
    Ok(Matrix::from_raw(a.n, elems))
}

pub fn mat_sub(a: &Matrix, b: &Matrix) -> Result<Matrix, LinalgError> {
    check_dims(a, b)?;
    let elems = a.elems.iter().zip(&b.elems).map(|(x, y)| x - y).collect();
    Ok(Matrix::from_raw(a.n, elems))
}

pub fn mat_scale(a: &Matrix, factor: f64) -> Matrix {
    Matrix::from_raw(a.n, a.elems.iter().map(|x| factor * x).collect())
}

/// Matrix product; each entry is summed over `k` in increasing order.
pub fn mat_mul(a: &Matrix, b: &Matrix) -> Result<Matrix, LinalgError> {
    check_dims(a, b)?;
    let n = a.n;
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += a.elems[i * n + k] * b.elems[k * n + j];
            }
            out[i * n + j] = acc;
        }
    }
    Ok(Matrix::from_raw(n, out))
}

/// `trace(a * b)` without forming the product.
pub fn trace_of_product(a: &Matrix, b: &Matrix) -> Result<f64, LinalgError> {
    check_dims(a, b)?;
    let n = a.n;
    let mut sum = 0.0;
    for i in 0..n {
        let mut acc = 0.0;
        for k in 0..n {
            acc += a.elems[i * n + k] * b.elems[k * n + i];
        }
        sum += acc;
    }
    Ok(sum)
}

/// In-place LU factorization with partial pivoting (`PA = LU`, unit lower
/// triangle stored below the diagonal).
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    swaps: usize,
    /// First column whose pivot candidates were all below
    /// [`ZERO_PIVOT_THRESHOLD`]; elimination stops there.
    zero_column: Option<usize>,
}

impl Lu {
    pub fn factor(m: &Matrix) -> Self {
        let n = m.n;
        let mut lu = m.elems.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;
        let mut zero_column = None;

        for k in 0..n {
            let mut p = k;
            let mut best = lu[k * n + k].abs();
            for i in (k + 1)..n {
                let v = lu[i * n + k].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best < ZERO_PIVOT_THRESHOLD {
                zero_column = Some(k);
                break;
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                swaps += 1;
            }
            let pivot = lu[k * n + k];
            for i in (k + 1)..n {
                let factor = lu[i * n + k] / pivot;
                lu[i * n + k] = factor;
                if factor != 0.0 {
                    for j in (k + 1)..n {
                        lu[i * n + j] -= factor * lu[k * n + j];
                    }
                }
            }
        }

        Self {
            n,
            lu,
            perm,
            swaps,
            zero_column,
        }
    }

    pub fn is_structurally_singular(&self) -> bool {
        self.zero_column.is_some()
    }

    /// Pivots `U[k][k]`. Only meaningful when no zero column was hit.
    pub fn pivots(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |k| self.lu[k * self.n + k])
    }

    pub fn det(&self) -> f64 {
        if self.zero_column.is_some() {
            return 0.0;
        }
        let mut d = if self.swaps.is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        for p in self.pivots() {
            d *= p;
        }
        d
    }

    /// Sign and natural log of `|det|`; `None` when singular.
    pub fn log_abs_det(&self) -> Option<(f64, f64)> {
        if self.zero_column.is_some() {
            return None;
        }
        let mut sign = if self.swaps.is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        let mut log = 0.0;
        for p in self.pivots() {
            if p < 0.0 {
                sign = -sign;
            }
            log += p.abs().ln();
        }
        Some((sign, log))
    }

    /// Solves `A x = b` in place. Requires a non-singular factorization.
    fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let dot: f64 = row.iter().zip(&y[..i]).map(|(l, v)| l * v).sum();
            y[i] -= dot;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n + i + 1..(i + 1) * n];
            let dot: f64 = row.iter().zip(&y[i + 1..]).map(|(u, v)| u * v).sum();
            y[i] = (y[i] - dot) / self.lu[i * n + i];
        }
        b.copy_from_slice(&y);
    }
}

/// Determinant by LU with partial pivoting. Singular inputs give exactly 0.
pub fn det(m: &Matrix) -> f64 {
    Lu::factor(m).det()
}

/// Sign and `ln|det|`, or `None` for a singular matrix.
pub fn log_abs_det(m: &Matrix) -> Option<(f64, f64)> {
    Lu::factor(m).log_abs_det()
}

/// [`is_invertible_with`] at [`DEFAULT_INVERTIBILITY_EPS`].
pub fn is_invertible(m: &Matrix) -> bool {
    is_invertible_with(m, DEFAULT_INVERTIBILITY_EPS)
}

/// True iff every LU pivot magnitude exceeds `eps * max(1, ||m||_max)`.
pub fn is_invertible_with(m: &Matrix, eps: f64) -> bool {
    lu_is_invertible(&Lu::factor(m), m, eps)
}

fn lu_is_invertible(lu: &Lu, m: &Matrix, eps: f64) -> bool {
    if lu.is_structurally_singular() {
        return false;
    }
    let threshold = eps * m.max_norm().max(1.0);
    lu.pivots().all(|p| p.abs() > threshold)
}

pub fn inverse(m: &Matrix) -> Result<Matrix, LinalgError> {
    inverse_with(m, DEFAULT_INVERTIBILITY_EPS)
}

pub fn inverse_with(m: &Matrix, eps: f64) -> Result<Matrix, LinalgError> {
    let lu = Lu::factor(m);
    if !lu_is_invertible(&lu, m, eps) {
        return Err(LinalgError::SingularMatrix);
    }
    Ok(inverse_from_lu(&lu))
}

fn inverse_from_lu(lu: &Lu) -> Matrix {
    let n = lu.n;
    let mut out = Matrix::zeros(n);
    let mut col = vec![0.0; n];
    for j in 0..n {
        col.iter_mut().for_each(|v| *v = 0.0);
        col[j] = 1.0;
        lu.solve_in_place(&mut col);
        for i in 0..n {
            out[(i, j)] = col[i];
        }
    }
    out
}

/// Adjugate (transposed cofactor matrix). Uses `det * inverse` when the
/// matrix passes [`is_invertible`], explicit cofactors otherwise.
pub fn adjugate(m: &Matrix) -> Matrix {
    let n = m.n;
    if n == 1 {
        return Matrix::identity(1);
    }
    let lu = Lu::factor(m);
    if lu_is_invertible(&lu, m, DEFAULT_INVERTIBILITY_EPS) {
        let d = lu.det();
        let mut inv = inverse_from_lu(&lu);
        inv.elems.iter_mut().for_each(|v| *v *= d);
        inv
    } else {
        cofactor_adjugate(m)
    }
}

/// Adjugate built entry by entry from signed `(n-1) x (n-1)` minors.
pub fn cofactor_adjugate(m: &Matrix) -> Matrix {
    let n = m.n;
    if n == 1 {
        return Matrix::identity(1);
    }
    let mut out = Matrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            // cofactor C_ij lands at (j, i)
            out[(j, i)] = sign * det(&m.minor(i, j));
        }
    }
    out
}

/// Sum over `j` of `det(x)` with its `j`-th row (or column) replaced by the
/// `j`-th row (or column) of `f`.
pub fn replaced_det_sum(x: &Matrix, f: &Matrix, axis: Axis) -> Result<f64, LinalgError> {
    check_dims(x, f)?;
    let n = x.n;
    let mut work = x.clone();
    let mut sum = 0.0;
    for j in 0..n {
        match axis {
            Axis::Rows => {
                for c in 0..n {
                    work[(j, c)] = f[(j, c)];
                }
                sum += det(&work);
                for c in 0..n {
                    work[(j, c)] = x[(j, c)];
                }
            }
            Axis::Columns => {
                for r in 0..n {
                    work[(r, j)] = f[(r, j)];
                }
                sum += det(&work);
                for r in 0..n {
                    work[(r, j)] = x[(r, j)];
                }
            }
        }
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    fn random(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
        let elems = (0..n * n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        Matrix::from_row_major(n, elems).unwrap()
    }

    // O(n!) Laplace expansion along the first row.
    fn det_laplace(a: &Matrix) -> f64 {
        let n = a.dim();
        if n == 1 {
            return a[(0, 0)];
        }
        (0..n)
            .map(|j| {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * a[(0, j)] * det_laplace(&a.minor(0, j))
            })
            .sum()
    }

    fn adj_laplace(a: &Matrix) -> Matrix {
        let n = a.dim();
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                out[(j, i)] = sign * det_laplace(&a.minor(i, j));
            }
        }
        out
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(matches!(
            Matrix::from_row_major(0, vec![]),
            Err(LinalgError::EmptyMatrix)
        ));
        assert!(matches!(
            Matrix::from_row_major(2, vec![1.0; 3]),
            Err(LinalgError::ElementCount { n: 2, got: 3 })
        ));
        assert!(matches!(
            Matrix::from_row_major(2, vec![1.0, f64::NAN, 0.0, 1.0]),
            Err(LinalgError::NonFinite { row: 0, col: 1 })
        ));
    }

    #[test]
    fn trace_examples() {
        assert_eq!(trace(&Matrix::identity(3)), 3.0);
        assert_eq!(trace(&m(&[&[1.0, 2.0], &[3.0, 4.0]])), 5.0);
        assert_eq!(trace(&Matrix::zeros(4)), 0.0);
    }

    #[test]
    fn det_examples() {
        for n in 1..=6 {
            assert_eq!(det(&Matrix::identity(n)), 1.0);
        }
        assert!((det(&m(&[&[1.0, 2.0], &[3.0, 4.0]])) + 2.0).abs() < 1e-15);
    }

    #[test]
    fn det_matches_laplace_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let a = random(&mut rng, 4);
            let expected = det_laplace(&a);
            let got = det(&a);
            assert!(
                (got - expected).abs() <= 1e-12 * expected.abs().max(1e-300) + 1e-15,
                "{got} vs {expected}"
            );
        }
    }

    #[test]
    fn det_duplicate_row_is_exact_zero() {
        let a = m(&[&[0.3, -0.7, 0.2], &[0.1, 0.5, 0.9], &[0.3, -0.7, 0.2]]);
        assert_eq!(det(&a), 0.0);
        let ones = Matrix::from_row_major(3, vec![1.0; 9]).unwrap();
        assert_eq!(det(&ones), 0.0);
    }

    #[test]
    fn det_sign_follows_permutation() {
        let p = m(&[&[0.0, 1.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0]]);
        assert_eq!(det(&p), -1.0);
        let (sign, log) = log_abs_det(&p).unwrap();
        assert_eq!(sign, -1.0);
        assert_eq!(log, 0.0);
        assert!(log_abs_det(&Matrix::zeros(2)).is_none());
    }

    #[test]
    fn invertibility_examples() {
        assert!(is_invertible(&Matrix::identity(4)));
        assert!(!is_invertible(&Matrix::zeros(3)));
        // second pivot is 1e-15 up to rounding
        let near = m(&[&[1.0, 1.0], &[1.0, 1.0 + 1e-15]]);
        let lu = Lu::factor(&near);
        let second = lu.pivots().nth(1).unwrap();
        assert!(second.abs() < 2e-15 && second.abs() > 0.0);
        assert!(!is_invertible(&near));
        assert!(is_invertible_with(&near, 1e-16));
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(inverse(&Matrix::identity(3)).unwrap(), Matrix::identity(3));
        let d = m(&[&[2.0, 0.0], &[0.0, 4.0]]);
        assert_eq!(inverse(&d).unwrap(), m(&[&[0.5, 0.0], &[0.0, 0.25]]));
        let ones = Matrix::from_row_major(3, vec![1.0; 9]).unwrap();
        assert!(matches!(inverse(&ones), Err(LinalgError::SingularMatrix)));
    }

    #[test]
    fn inverse_residual_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 1..=8 {
            for _ in 0..20 {
                let a = random(&mut rng, n);
                let Ok(inv) = inverse(&a) else { continue };
                let r = mat_sub(&mat_mul(&a, &inv).unwrap(), &Matrix::identity(n)).unwrap();
                let bound = 1e-10 * a.max_norm().powi(2).max(1.0);
                assert!(r.max_norm() <= bound, "n={n} residual {}", r.max_norm());
            }
        }
    }

    #[test]
    fn adjugate_examples() {
        for n in 1..=4 {
            assert_eq!(adjugate(&Matrix::identity(n)), Matrix::identity(n));
        }
        assert_eq!(adjugate(&m(&[&[7.5]])), Matrix::identity(1));
        let a = m(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let adj = adjugate(&a);
        let expected = m(&[&[4.0, -2.0], &[-3.0, 1.0]]);
        assert!(mat_sub(&adj, &expected).unwrap().max_norm() < 1e-14);
        assert_eq!(cofactor_adjugate(&a), expected);
        let ones = Matrix::from_row_major(3, vec![1.0; 9]).unwrap();
        assert_eq!(adjugate(&ones), Matrix::zeros(3));
    }

    #[test]
    fn adjugate_matches_cofactor_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let a = random(&mut rng, 3);
            let diff = mat_sub(&adjugate(&a), &adj_laplace(&a)).unwrap();
            assert!(diff.max_norm() <= 1e-11, "{}", diff.max_norm());
        }
    }

    #[test]
    fn adjugate_of_singular_rank_two() {
        // rank 2: adjugate is rank 1 and nonzero
        let a = m(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], &[7.0, 8.0, 9.0]]);
        let adj = adjugate(&a);
        let oracle = adj_laplace(&a);
        assert!(mat_sub(&adj, &oracle).unwrap().max_norm() < 1e-12);
        assert!(adj.max_norm() > 1.0);
        let prod = mat_mul(&a, &adj).unwrap();
        assert!(prod.max_norm() < 1e-12);
    }

    #[test]
    fn replaced_det_sum_examples() {
        let f = m(&[&[0.4, 1.0, -2.0], &[3.0, -0.5, 0.25], &[1.5, 2.0, 0.75]]);
        let s = replaced_det_sum(&Matrix::identity(3), &f, Axis::Rows).unwrap();
        assert!((s - trace(&f)).abs() < 1e-15);

        let x = m(&[&[0.2, -1.0, 0.5], &[0.9, 0.3, -0.4], &[0.1, 0.8, 0.6]]);
        for axis in [Axis::Rows, Axis::Columns] {
            let s = replaced_det_sum(&x, &x, axis).unwrap();
            assert!((s - 3.0 * det(&x)).abs() < 1e-14);
        }
    }

    #[test]
    fn replaced_det_sum_matches_cofactor_expansion() {
        // tr(X# F) = sum_ij C_ij F_ij with cofactors from the Laplace oracle
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let x = random(&mut rng, 4);
            let f = random(&mut rng, 4);
            let adj = adj_laplace(&x);
            let mut expected = 0.0;
            for i in 0..4 {
                for j in 0..4 {
                    expected += adj[(j, i)] * f[(i, j)];
                }
            }
            let scale = expected.abs().max(1.0);
            for axis in [Axis::Rows, Axis::Columns] {
                let s = replaced_det_sum(&x, &f, axis).unwrap();
                assert!((s - expected).abs() <= 1e-11 * scale);
            }
        }
    }

    #[test]
    fn arithmetic_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let a = random(&mut rng, 3);
        assert_eq!(mat_mul(&Matrix::identity(3), &a).unwrap(), a);
        assert_eq!(mat_scale(&a, 0.0), Matrix::zeros(3));
        for _ in 0..50 {
            let (a, b, c) = (
                random(&mut rng, 3),
                random(&mut rng, 3),
                random(&mut rng, 3),
            );
            let left = mat_mul(&mat_mul(&a, &b).unwrap(), &c).unwrap();
            let right = mat_mul(&a, &mat_mul(&b, &c).unwrap()).unwrap();
            assert!(mat_sub(&left, &right).unwrap().max_norm() <= 1e-13);
        }
        let t = mat_mul(&a, &random(&mut rng, 3)).unwrap();
        assert!(trace(&t).is_finite());
    }

    #[test]
    fn dimension_mismatch() {
        let a = Matrix::identity(2);
        let b = Matrix::identity(3);
        for r in [mat_add(&a, &b), mat_sub(&a, &b), mat_mul(&a, &b)] {
            assert!(matches!(
                r,
                Err(LinalgError::DimensionMismatch { left: 2, right: 3 })
            ));
        }
        assert!(replaced_det_sum(&a, &b, Axis::Rows).is_err());
        assert!(trace_of_product(&a, &b).is_err());
    }

    #[test]
    fn inputs_are_not_mutated() {
        let a = m(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let copy = a.clone();
        let _ = det(&a);
        let _ = adjugate(&a);
        let _ = inverse(&a);
        let _ = replaced_det_sum(&a, &copy, Axis::Columns);
        assert_eq!(a, copy);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn matrix(n: usize) -> impl Strategy<Value = Matrix> {
            prop::collection::vec(-1.0..=1.0f64, n * n)
                .prop_map(move |e| Matrix::from_row_major(n, e).unwrap())
        }

        fn pair() -> impl Strategy<Value = (Matrix, Matrix)> {
            (1usize..=6).prop_flat_map(|n| (matrix(n), matrix(n)))
        }

        proptest! {
            #[test]
            fn adjugate_identity((x, _) in pair()) {
                let n = x.dim();
                let d = det(&x);
                let adj = adjugate(&x);
                let target = mat_scale(&Matrix::identity(n), d);
                let bound = 1e-10 * x.max_norm().powi(n as i32).max(1.0);
                let left = mat_sub(&mat_mul(&x, &adj).unwrap(), &target).unwrap();
                let right = mat_sub(&mat_mul(&adj, &x).unwrap(), &target).unwrap();
                prop_assert!(left.max_norm() <= bound);
                prop_assert!(right.max_norm() <= bound);
            }

            #[test]
            fn replaced_sums_agree((x, f) in pair()) {
                let tr = trace_of_product(&adjugate(&x), &f).unwrap();
                let scale = tr.abs().max(1.0);
                let rows = replaced_det_sum(&x, &f, Axis::Rows).unwrap();
                let cols = replaced_det_sum(&x, &f, Axis::Columns).unwrap();
                prop_assert!((rows - cols).abs() <= 1e-11 * scale);
                prop_assert!((rows - tr).abs() <= 1e-11 * scale);
            }

            #[test]
            fn trace_is_cyclic((x, y) in pair()) {
                let xy = trace(&mat_mul(&x, &y).unwrap());
                let yx = trace(&mat_mul(&y, &x).unwrap());
                prop_assert!((xy - yx).abs() <= 1e-12 * xy.abs().max(1.0));
            }

            #[test]
            fn trace_is_linear((x, y) in pair(), l in -3.0..3.0f64, mu in -3.0..3.0f64) {
                let combo = mat_add(&mat_scale(&x, l), &mat_scale(&y, mu)).unwrap();
                let lhs = trace(&combo);
                let rhs = l * trace(&x) + mu * trace(&y);
                prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
            }

            #[test]
            fn duplicated_row_gives_zero(x in (2usize..=6).prop_flat_map(matrix), src in 0usize..6, dst in 0usize..6) {
                let n = x.dim();
                let (src, dst) = (src % n, dst % n);
                prop_assume!(src != dst);
                let mut y = x.clone();
                for c in 0..n {
                    y[(dst, c)] = x[(src, c)];
                }
                prop_assert_eq!(det(&y), 0.0);
            }
        }
    }
}
