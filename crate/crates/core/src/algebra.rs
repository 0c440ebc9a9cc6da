//! Small dense matrices and exact rational row reduction.
//!
//! Floating point types (`Mat4`, `MatRC`) carry patch evaluation and
//! tessellation. `RationalMat` is used wherever a rank or a nullspace has
//! to be certified rather than estimated.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Dense 4×4 real matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat4(pub [[f64; 4]; 4]);

impl Mat4 {
    pub const ZERO: Mat4 = Mat4([[0.0; 4]; 4]);

    pub fn identity() -> Self {
        let mut m = Self::ZERO;
        for i in 0..4 {
            m.0[i][i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: [[f64; 4]; 4]) -> Self {
        Mat4(rows)
    }

    pub fn row(&self, i: usize) -> [f64; 4] {
        self.0[i]
    }

    pub fn col(&self, j: usize) -> [f64; 4] {
        [self.0[0][j], self.0[1][j], self.0[2][j], self.0[3][j]]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::ZERO;
        for i in 0..4 {
            for j in 0..4 {
                t.0[j][i] = self.0[i][j];
            }
        }
        t
    }

    pub fn mul_vec(&self, v: [f64; 4]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..4).map(|k| self.0[i][k] * v[k]).sum();
        }
        out
    }

    /// Row vector times matrix: `vᵀ · self`.
    pub fn vec_mul(&self, v: [f64; 4]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (j, o) in out.iter_mut().enumerate() {
            *o = (0..4).map(|k| v[k] * self.0[k][j]).sum();
        }
        out
    }

    /// Gauss-Jordan inverse with partial pivoting. `None` when singular.
    pub fn inverse(&self) -> Option<Mat4> {
        let mut a = self.0;
        let mut inv = Mat4::identity().0;
        for col in 0..4 {
            let pivot = (col..4).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))?;
            if a[pivot][col].abs() < 1e-300 {
                return None;
            }
            a.swap(col, pivot);
            inv.swap(col, pivot);
            let p = a[col][col];
            for k in 0..4 {
                a[col][k] /= p;
                inv[col][k] /= p;
            }
            for r in 0..4 {
                if r != col {
                    let f = a[r][col];
                    if f != 0.0 {
                        for k in 0..4 {
                            a[r][k] -= f * a[col][k];
                            inv[r][k] -= f * inv[col][k];
                        }
                    }
                }
            }
        }
        Some(Mat4(inv))
    }

    pub fn max_abs_diff(&self, other: &Mat4) -> f64 {
        let mut m = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                m = m.max((self.0[i][j] - other.0[i][j]).abs());
            }
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }
}

impl Mul for Mat4 {
    type Output = Mat4;

    fn mul(self, rhs: Mat4) -> Mat4 {
        let mut out = Mat4::ZERO;
        for i in 0..4 {
            for j in 0..4 {
                out.0[i][j] = (0..4).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        out
    }
}

impl Index<(usize, usize)> for Mat4 {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for Mat4 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.0[i][j]
    }
}

/// Dense real matrix of arbitrary shape, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct MatRC {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl MatRC {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        MatRC {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite matrix entry {v}")));
        }
        Ok(MatRC { rows, cols, data })
    }

    pub fn from_mat4(m: &Mat4) -> Self {
        MatRC {
            rows: 4,
            cols: 4,
            data: m.0.iter().flatten().copied().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> MatRC {
        let mut t = MatRC::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// Keeps the listed columns, in the listed order.
    pub fn select_cols(&self, cols: &[usize]) -> MatRC {
        let mut out = MatRC::zeros(self.rows, cols.len());
        for i in 0..self.rows {
            for (k, &c) in cols.iter().enumerate() {
                out[(i, k)] = self[(i, c)];
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!(
                "{}x{} matrix times vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }
}

impl Index<(usize, usize)> for MatRC {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for MatRC {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Standard matrix product; fails when `a.cols != b.rows`.
pub fn mat_mul(a: &MatRC, b: &MatRC) -> Result<MatRC> {
    if a.cols != b.rows {
        return Err(Error::Dimension(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut out = MatRC::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        for k in 0..a.cols {
            let aik = a[(i, k)];
            if aik == 0.0 {
                continue;
            }
            for j in 0..b.cols {
                out[(i, j)] += aik * b[(k, j)];
            }
        }
    }
    Ok(out)
}

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact rational matrix. Entries are kept normalised by `BigRational`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMat {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RationalMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMat {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_i64_rows<R: AsRef<[i64]>>(rows: &[R]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.as_ref().len());
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.as_ref().len(), c, "ragged rows");
            for (j, &v) in row.as_ref().iter().enumerate() {
                m[(i, j)] = rat(v);
            }
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        RationalMat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> RationalMat {
        let mut t = RationalMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn select_cols(&self, cols: &[usize]) -> RationalMat {
        let mut out = RationalMat::zeros(self.rows, cols.len());
        for i in 0..self.rows {
            for (k, &c) in cols.iter().enumerate() {
                out[(i, k)] = self[(i, c)].clone();
            }
        }
        out
    }

    pub fn select_rows(&self, rows: &[usize]) -> RationalMat {
        RationalMat::from_rows(rows.iter().map(|&r| self.row(r).to_vec()).collect())
    }

    /// Appends `other` to the right of `self`.
    pub fn hstack(&self, other: &RationalMat) -> RationalMat {
        assert_eq!(self.rows, other.rows);
        RationalMat::from_rows(
            (0..self.rows)
                .map(|i| self.row(i).iter().chain(other.row(i)).cloned().collect())
                .collect(),
        )
    }

    pub fn neg(&self) -> RationalMat {
        RationalMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| -v).collect(),
        }
    }

    pub fn mul(&self, rhs: &RationalMat) -> Result<RationalMat> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = RationalMat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn to_f64(&self) -> MatRC {
        MatRC {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(rat_to_f64).collect(),
        }
    }

    /// Entries as `i64` when every entry is an integer that fits.
    pub fn to_i64(&self) -> Option<Vec<Vec<i64>>> {
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .map(|v| if v.is_integer() { v.to_integer().to_i64() } else { None })
                    .collect()
            })
            .collect()
    }

    /// Inverse of a square nonsingular matrix, `None` otherwise.
    pub fn inverse(&self) -> Option<RationalMat> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let reduced = rref_exact(&self.hstack(&RationalMat::identity(n)));
        if reduced.pivot_cols.len() < n || reduced.pivot_cols[n - 1] != n - 1 {
            return None;
        }
        Some(reduced.rref.select_cols(&(n..2 * n).collect::<Vec<_>>()))
    }

    /// Whether `v` lies in the row space of `self`.
    pub fn row_space_contains(&self, v: &[Rational]) -> bool {
        assert_eq!(v.len(), self.cols);
        let base = rref_exact(self).rank;
        let mut rows: Vec<Vec<Rational>> = (0..self.rows).map(|i| self.row(i).to_vec()).collect();
        rows.push(v.to_vec());
        rref_exact(&RationalMat::from_rows(rows)).rank == base
    }
}

impl Index<(usize, usize)> for RationalMat {
    type Output = Rational;

    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for RationalMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Display for RationalMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<String> = self.data.iter().map(|v| v.to_string()).collect();
        let width = cells.iter().map(String::len).max().unwrap_or(1);
        for i in 0..self.rows {
            let line: Vec<String> = cells[i * self.cols..(i + 1) * self.cols]
                .iter()
                .map(|c| format!("{c:>width$}"))
                .collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

/// Result of [`rref_exact`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rref {
    pub rref: RationalMat,
    pub rank: usize,
    pub pivot_cols: Vec<usize>,
}

impl Rref {
    /// Columns that carry no pivot, in increasing order.
    pub fn free_cols(&self) -> Vec<usize> {
        (0..self.rref.cols())
            .filter(|c| !self.pivot_cols.contains(c))
            .collect()
    }
}

/// Reduced row-echelon form over the rationals.
///
/// The pivot in each column is the first nonzero entry at or below the
/// current row, so pivot columns depend only on the matrix, never on
/// magnitudes.
pub fn rref_exact(m: &RationalMat) -> Rref {
    let mut a = m.clone();
    let (rows, cols) = (a.rows, a.cols);
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[(i, c)].is_zero()) else {
            continue;
        };
        if p != r {
            for j in 0..cols {
                a.data.swap(p * cols + j, r * cols + j);
            }
        }
        let inv = a[(r, c)].recip();
        for j in c..cols {
            let v = &a[(r, j)] * &inv;
            a[(r, j)] = v;
        }
        for i in 0..rows {
            if i == r || a[(i, c)].is_zero() {
                continue;
            }
            let f = a[(i, c)].clone();
            for j in c..cols {
                let delta = &f * &a[(r, j)];
                a[(i, j)] -= delta;
            }
        }
        pivot_cols.push(c);
        r += 1;
    }
    Rref {
        rref: a,
        rank: r,
        pivot_cols,
    }
}

/// Largest absolute entry, used for reporting.
pub fn max_abs_rational(v: &[Rational]) -> Rational {
    v.iter().map(|x| x.abs()).max().unwrap_or_else(Rational::zero)
}
