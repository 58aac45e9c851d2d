//! Dense linear algebra for desk-scale systems (N ≤ ~13).
//!
//! Partial-pivoted LU with a 1-norm condition estimate, Householder QR for
//! orthonormal null-space bases, and one-sided Jacobi for singular values.
//! Everything is deterministic: no randomized pivoting, no threads.

use std::fmt;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self { rows: r, cols: c, data }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// y = self · x
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        let mut y = vec![0.0; self.rows];
        for i in 0..self.rows {
            let r = self.row(i);
            let mut s = 0.0;
            for j in 0..self.cols {
                s += r[j] * x[j];
            }
            y[i] = s;
        }
        y
    }

    /// y = selfᵀ · x
    pub fn tr_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows);
        let mut y = vec![0.0; self.cols];
        for i in 0..self.rows {
            let r = self.row(i);
            for j in 0..self.cols {
                y[j] += r[j] * x[i];
            }
        }
        y
    }

    pub fn mul_mat(&self, b: &Mat) -> Mat {
        assert_eq!(self.cols, b.rows);
        let mut c = Mat::zeros(self.rows, b.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..b.cols {
                    c[(i, j)] += a * b[(k, j)];
                }
            }
        }
        c
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, &v| m.max(v.abs()))
    }

    /// Maximum 1-norm over columns.
    pub fn norm_1(&self) -> f64 {
        let mut best = 0.0_f64;
        for j in 0..self.cols {
            let mut s = 0.0;
            for i in 0..self.rows {
                s += self[(i, j)].abs();
            }
            best = best.max(s);
        }
        best
    }

    /// Maximum row norm (∞-norm of the matrix).
    pub fn max_row_norm(&self) -> f64 {
        let mut best = 0.0_f64;
        for i in 0..self.rows {
            let s: f64 = self.row(i).iter().map(|v| v.abs()).sum();
            best = best.max(s);
        }
        best
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Display for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{:>13.6e}", self[(i, j)])?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

/// LU factorization failed: a pivot column was exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularMatrix;

impl fmt::Display for SingularMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "matrix is singular to working precision")
    }
}

impl std::error::Error for SingularMatrix {}

/// Partial-pivoted LU factorization of a square matrix.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: Mat,
    perm: Vec<usize>,
    sign: f64,
}

impl Lu {
    pub fn factor(a: &Mat) -> Result<Self, SingularMatrix> {
        assert_eq!(a.rows, a.cols, "LU needs a square matrix");
        let n = a.rows;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].abs();
            for i in k + 1..n {
                let v = lu[(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                return Err(SingularMatrix);
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let piv = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / piv;
                lu[(i, k)] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        lu[(i, j)] -= f * lu[(k, j)];
                    }
                }
            }
        }
        Ok(Self { lu, perm, sign })
    }

    pub fn det(&self) -> f64 {
        let n = self.lu.rows;
        let mut d = self.sign;
        for i in 0..n {
            d *= self.lu[(i, i)];
        }
        d
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.rows;
        assert_eq!(b.len(), n);
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        x
    }

    /// Solve A X = B column by column.
    pub fn solve_mat(&self, b: &Mat) -> Mat {
        let n = self.lu.rows;
        assert_eq!(b.rows, n);
        let mut x = Mat::zeros(n, b.cols);
        let mut col = vec![0.0; n];
        for j in 0..b.cols {
            for i in 0..n {
                col[i] = b[(i, j)];
            }
            let s = self.solve(&col);
            for i in 0..n {
                x[(i, j)] = s[i];
            }
        }
        x
    }

    /// Exact 1-norm condition number via the explicit inverse.
    /// Cheap at these sizes and perfectly deterministic.
    pub fn cond_1(&self, a: &Mat) -> f64 {
        let inv = self.solve_mat(&Mat::identity(a.rows));
        a.norm_1() * inv.norm_1()
    }
}

/// Determinant of a square matrix; 0.0 if exactly singular.
pub fn det(a: &Mat) -> f64 {
    match Lu::factor(a) {
        Ok(lu) => lu.det(),
        Err(_) => 0.0,
    }
}

/// Singular values of an arbitrary matrix, descending.
///
/// One-sided Jacobi applied to the rows of the wider orientation; quadratic
/// convergence and no dependence on iteration order at these sizes.
pub fn singular_values(a: &Mat) -> Vec<f64> {
    let work = if a.rows <= a.cols { a.clone() } else { a.transpose() };
    let m = work.rows;
    let mut rows: Vec<Vec<f64>> = (0..m).map(|i| work.row(i).to_vec()).collect();
    let n = work.cols;
    for _sweep in 0..60 {
        let mut off = 0.0_f64;
        for i in 0..m {
            for j in i + 1..m {
                let mut aii = 0.0;
                let mut ajj = 0.0;
                let mut aij = 0.0;
                for k in 0..n {
                    aii += rows[i][k] * rows[i][k];
                    ajj += rows[j][k] * rows[j][k];
                    aij += rows[i][k] * rows[j][k];
                }
                off = off.max(aij.abs());
                if aij.abs() <= 1e-30 + 1e-16 * (aii * ajj).sqrt() {
                    continue;
                }
                let tau = (ajj - aii) / (2.0 * aij);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..n {
                    let vi = rows[i][k];
                    let vj = rows[j][k];
                    rows[i][k] = c * vi - s * vj;
                    rows[j][k] = s * vi + c * vj;
                }
            }
        }
        if off < 1e-14 {
            break;
        }
    }
    let mut sv: Vec<f64> = rows
        .iter()
        .map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

/// Orthonormal basis of the null space of `a` (rows × cols, rows ≤ cols),
/// assuming `a` has full row rank. Householder QR of aᵀ; the trailing
/// columns of Q are orthogonal to every row of `a` to machine precision.
///
/// Each basis vector has unit norm and its first component of magnitude
/// above 1e-12 is made positive, so the output is deterministic.
pub fn null_space_full_rank(a: &Mat) -> Vec<Vec<f64>> {
    let n = a.cols;
    let m = a.rows;
    assert!(m <= n);
    // Householder QR of the n×m matrix aᵀ.
    let mut r = a.transpose();
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(m);
    for k in 0..m {
        let mut v = vec![0.0; n];
        let mut norm = 0.0;
        for i in k..n {
            v[i] = r[(i, k)];
            norm += v[i] * v[i];
        }
        norm = norm.sqrt();
        if norm == 0.0 {
            reflectors.push(vec![0.0; n]);
            continue;
        }
        let alpha = if v[k] >= 0.0 { -norm } else { norm };
        v[k] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 > 0.0 {
            for j in k..m {
                let mut dot = 0.0;
                for i in k..n {
                    dot += v[i] * r[(i, j)];
                }
                let f = 2.0 * dot / vnorm2;
                for i in k..n {
                    r[(i, j)] -= f * v[i];
                }
            }
        }
        reflectors.push(v);
    }
    // Q columns m..n, built by applying the reflectors to unit vectors.
    let mut basis = Vec::with_capacity(n - m);
    for j in m..n {
        let mut q = vec![0.0; n];
        q[j] = 1.0;
        for k in (0..m).rev() {
            let v = &reflectors[k];
            let vnorm2: f64 = v.iter().map(|x| x * x).sum();
            if vnorm2 == 0.0 {
                continue;
            }
            let mut dot = 0.0;
            for i in 0..n {
                dot += v[i] * q[i];
            }
            let f = 2.0 * dot / vnorm2;
            for i in 0..n {
                q[i] -= f * v[i];
            }
        }
        normalize_signed(&mut q);
        basis.push(q);
    }
    basis
}

/// Unit norm with the first non-negligible component positive.
pub fn normalize_signed(v: &mut [f64]) {
    let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    for x in v.iter() {
        if x.abs() > 1e-12 {
            if *x < 0.0 {
                for y in v.iter_mut() {
                    *y = -*y;
                }
            }
            break;
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    #[test]
    fn lu_solves_random_systems() {
        let mut rng = SplitMix64::new(42);
        for n in 1..=8 {
            let mut a = Mat::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    a[(i, j)] = rng.range(-2.0, 2.0);
                }
                a[(i, i)] += 3.0; // keep it comfortably nonsingular
            }
            let x_true: Vec<f64> = (0..n).map(|_| rng.range(-1.0, 1.0)).collect();
            let b = a.mul_vec(&x_true);
            let lu = Lu::factor(&a).unwrap();
            let x = lu.solve(&b);
            assert!(max_abs_diff(&x, &x_true) < 1e-11);
        }
    }

    #[test]
    fn determinant_of_known_matrix() {
        let a = Mat::from_rows(&[vec![2.0, 0.0, 0.0], vec![0.0, 3.0, 0.0], vec![1.0, 0.0, 4.0]]);
        assert!((det(&a) - 24.0).abs() < 1e-12);
        let sing = Mat::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert_eq!(det(&sing), 0.0);
    }

    #[test]
    fn singular_values_of_diag() {
        let a = Mat::from_rows(&[vec![3.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]);
        let sv = singular_values(&a);
        assert!((sv[0] - 3.0).abs() < 1e-12);
        assert!((sv[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn singular_values_match_gram_eigenvalues() {
        let mut rng = SplitMix64::new(9);
        let mut a = Mat::zeros(2, 4);
        for i in 0..2 {
            for j in 0..4 {
                a[(i, j)] = rng.range(-1.0, 1.0);
            }
        }
        let sv = singular_values(&a);
        // trace(A Aᵀ) = Σ σ²
        let mut tr = 0.0;
        for i in 0..2 {
            tr += dot(a.row(i), a.row(i));
        }
        let s2: f64 = sv.iter().map(|s| s * s).sum();
        assert!((tr - s2).abs() < 1e-12);
    }

    #[test]
    fn null_space_is_orthogonal_to_rows() {
        let mut rng = SplitMix64::new(3);
        for _ in 0..20 {
            let m = 1 + rng.below(3);
            let n = m + 1 + rng.below(4);
            let mut a = Mat::zeros(m, n);
            for i in 0..m {
                for j in 0..n {
                    a[(i, j)] = rng.range(-1.0, 1.0);
                }
            }
            if singular_values(&a)[m - 1] < 0.1 {
                continue;
            }
            let basis = null_space_full_rank(&a);
            assert_eq!(basis.len(), n - m);
            for v in &basis {
                let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                assert!((norm - 1.0).abs() < 1e-12);
                for i in 0..m {
                    assert!(dot(a.row(i), v).abs() < 1e-12);
                }
            }
            // pairwise orthogonality keeps the basis well conditioned
            for i in 0..basis.len() {
                for j in i + 1..basis.len() {
                    assert!(dot(&basis[i], &basis[j]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn condition_number_of_identity() {
        let a = Mat::identity(4);
        let lu = Lu::factor(&a).unwrap();
        assert!((lu.cond_1(&a) - 1.0).abs() < 1e-12);
    }
}
