//! Degree conditions on the diagonal curves of a bicubic patch.
//!
//! Substituting `v = u` (or `v = 1 − u`) into a Bezier patch collapses it to
//! a univariate polynomial of degree ≤ 6 whose coefficients are anti-diagonal
//! sums of `R₁ = M_Bᵀ X M_B` (or `R₂ = M_Bᵀ X M_B T`). Requiring both
//! diagonals to be cubic zeroes the three leading coefficients of each, six
//! linear conditions on the 16 control values of rank 5.
//!
//! All maps here are derived from `M_B` and `T` in exact rational arithmetic
//! and then compared against the reference integer matrix in
//! [`REFERENCE_LAMBDA`].

mod bs;
mod hs;
mod joint;

use std::fmt;
use std::sync::OnceLock;

use num_traits::Zero;
use serde::Serialize;

use crate::algebra::{rat, ratio, rref_exact, Mat4, MatRC, Rational, RationalMat, Rref};
use crate::error::{Error, Result};
use crate::patches::{bezier_basis, reparam_t, ScalarGrid, CORNER_INDICES};

pub use bs::{bs_inner_identity, bs_project, bs_residuals, bs_solve, ConstraintReport, DiagonalResidual};
pub use hs::{
    hs_alpha_beta, hs_complete, hs_phi, hs_twists, hs_validate, hs_validate_grid, AlphaBeta, HsReport, Twists,
};
pub use joint::{project_shared_net, JointProjection, SharedNet};

/// Default relative compliance tolerance.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Relative threshold under which `φ` is treated as zero.
pub const PHI_DEGENERACY: f64 = 1e-12;

/// The six diagonal conditions as an integer matrix over the row-major
/// control values. Rows 0–2: `v = u`; rows 3–5: `v = 1 − u`.
pub const REFERENCE_LAMBDA: [[i64; 16]; 6] = [
    [1, -3, 3, -1, -3, 9, -9, 3, 3, -9, 9, -3, -1, 3, -3, 1],
    [-6, 15, -12, 3, 15, -36, 27, -6, -12, 27, -18, 3, 3, -6, 3, 0],
    [15, -30, 18, -3, -30, 54, -27, 3, 18, -27, 9, 0, -3, 3, 0, 0],
    [-1, 3, -3, 1, 3, -9, 9, -3, -3, 9, -9, 3, 1, -3, 3, -1],
    [3, -12, 15, -6, -6, 27, -36, 15, 3, -18, 27, -12, 0, 3, -6, 3],
    [-3, 18, -30, 15, 3, -27, 54, -30, 0, 9, -27, 18, 0, 0, 3, -3],
];

/// Positions of the 12 non-corner values in the row-major ordering:
/// `[x01, x02, x10, x11, x12, x13, x20, x21, x22, x23, x31, x32]`.
pub const NON_CORNER_INDICES: [usize; 12] = [1, 2, 4, 5, 6, 7, 8, 9, 10, 11, 13, 14];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum DiagonalKind {
    /// `v = u`
    Main,
    /// `v = 1 − u`
    Anti,
}

impl DiagonalKind {
    pub const ALL: [DiagonalKind; 2] = [DiagonalKind::Main, DiagonalKind::Anti];
}

/// Univariate polynomial, coefficients stored highest degree first.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "a polynomial needs at least one coefficient");
        Poly { coeffs }
    }

    pub fn nominal_degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `t^k`.
    pub fn coeff(&self, k: usize) -> f64 {
        let d = self.nominal_degree();
        if k > d {
            0.0
        } else {
            self.coeffs[d - k]
        }
    }

    /// Degree after dropping leading coefficients with
    /// `|c| ≤ tol · max(1, max|c|)`. The zero polynomial has degree 0.
    pub fn effective_degree(&self, tol: f64) -> usize {
        let scale = self.coeffs.iter().fold(1.0f64, |m, c| m.max(c.abs()));
        let d = self.nominal_degree();
        self.coeffs
            .iter()
            .position(|c| c.abs() > tol * scale)
            .map_or(0, |first| d - first)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, c| acc * t + c)
    }
}

/// `R₁ = M_Bᵀ X M_B` for the main diagonal, `R₂ = R₁ T` for the anti-diagonal.
pub fn diagonal_matrix(g: &ScalarGrid, d: DiagonalKind) -> Mat4 {
    let mb = bezier_basis();
    let r1 = mb.transpose() * g.as_mat4() * mb;
    match d {
        DiagonalKind::Main => r1,
        DiagonalKind::Anti => r1 * reparam_t(),
    }
}

/// Sums the anti-diagonals of a 4×4 matrix into 7 coefficients, highest first.
fn antidiagonal_sums(r: &Mat4) -> Vec<f64> {
    let mut a = vec![0.0; 7];
    for i in 0..4 {
        for j in 0..4 {
            a[i + j] += r[(i, j)];
        }
    }
    a
}

/// The degree-6 polynomial `x(t)` along the chosen diagonal.
pub fn collapse_diagonal(g: &ScalarGrid, d: DiagonalKind) -> Poly {
    Poly::new(antidiagonal_sums(&diagonal_matrix(g, d)))
}

fn mb_exact() -> RationalMat {
    RationalMat::from_i64_rows(&[[-1, 3, -3, 1], [3, -6, 3, 0], [-3, 3, 0, 0], [1, 0, 0, 0]])
}

fn t_exact() -> RationalMat {
    RationalMat::from_i64_rows(&[[-1, 3, -3, 1], [0, 1, -2, 1], [0, 0, -1, 1], [0, 0, 0, 1]])
}

/// Exact `R` for a 4×4 rational grid.
pub fn diagonal_matrix_exact(x: &RationalMat, d: DiagonalKind) -> Result<RationalMat> {
    let mb = mb_exact();
    let r1 = mb.transpose().mul(x)?.mul(&mb)?;
    match d {
        DiagonalKind::Main => Ok(r1),
        DiagonalKind::Anti => r1.mul(&t_exact()),
    }
}

/// Exact 16×16 map `ρ = Ω ξ` from row-major control values to row-major `R`.
///
/// Column `k` is `R` of the grid with a single 1 at row-major position `k`.
pub fn build_omega_exact(d: DiagonalKind) -> RationalMat {
    let mut omega = RationalMat::zeros(16, 16);
    for k in 0..16 {
        let mut x = RationalMat::zeros(4, 4);
        x[(k / 4, k % 4)] = rat(1);
        let r = diagonal_matrix_exact(&x, d).expect("4x4 products");
        for i in 0..4 {
            for j in 0..4 {
                omega[(4 * i + j, k)] = r[(i, j)].clone();
            }
        }
    }
    omega
}

pub fn build_omega(d: DiagonalKind) -> MatRC {
    build_omega_exact(d).to_f64()
}

/// Rows of `Ω` for `r₁₁`, `r₁₂ + r₂₁`, `r₁₃ + r₂₂ + r₃₁`.
fn leading_condition_rows(omega: &RationalMat) -> Vec<Vec<Rational>> {
    (0..3)
        .map(|s| {
            let mut row = vec![Rational::zero(); 16];
            for i in 0..=s {
                let j = s - i;
                for (k, v) in row.iter_mut().enumerate() {
                    *v += &omega[(4 * i + j, k)];
                }
            }
            row
        })
        .collect()
}

/// Which sign of `x₂₂` the inner-point identity carries, certified by
/// row-space membership against `Λ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InnerIdentity {
    /// `+1` for `x₁₁ − x₁₂ − x₂₁ + x₂₂`, `−1` for `x₁₁ − x₁₂ − x₂₁ − x₂₂`.
    pub x22_sign: i8,
    pub plus_in_row_space: bool,
    pub minus_in_row_space: bool,
}

impl InnerIdentity {
    /// Coefficients over the row-major values of
    /// `x₁₁ − x₁₂ − x₂₁ + s·x₂₂ − (x₀₀ − x₀₃ − x₃₀ + x₃₃)/9`.
    pub fn coefficients(x22_sign: i8) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); 16];
        v[5] = rat(1);
        v[6] = rat(-1);
        v[9] = rat(-1);
        v[10] = rat(x22_sign as i64);
        v[0] = ratio(-1, 9);
        v[3] = ratio(1, 9);
        v[12] = ratio(1, 9);
        v[15] = ratio(-1, 9);
        v
    }

    fn resolve(lambda: &RationalMat) -> Result<Self> {
        let plus = lambda.row_space_contains(&Self::coefficients(1));
        let minus = lambda.row_space_contains(&Self::coefficients(-1));
        let x22_sign = match (plus, minus) {
            (true, false) => 1,
            (false, true) => -1,
            _ => {
                return Err(Error::Internal(format!(
                    "inner-point identity is ambiguous (+x22: {plus}, -x22: {minus})"
                )))
            }
        };
        Ok(InnerIdentity {
            x22_sign,
            plus_in_row_space: plus,
            minus_in_row_space: minus,
        })
    }
}

impl fmt::Display for InnerIdentity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.x22_sign > 0 { '+' } else { '-' };
        write!(f, "x11 - x12 - x21 {s} x22 = 1/9 (x00 - x03 - x30 + x33)")
    }
}

/// The non-corner system `E ξ₂ + F ξ₁ = 0` obtained by row-reducing
/// `[Λ₂ | Λ₁]`, with `E` in reduced row-echelon form.
#[derive(Clone, Debug)]
pub struct ReducedSystem {
    /// 5×12, columns in [`NON_CORNER_INDICES`] order.
    pub e: RationalMat,
    /// 5×4, columns in [`CORNER_INDICES`] order.
    pub f: RationalMat,
    pub pivot_cols: Vec<usize>,
    pub free_cols: Vec<usize>,
    e_f64: MatRC,
    f_f64: MatRC,
    /// `Eᵀ (E Eᵀ)⁻¹`, 12×5.
    projector: MatRC,
}

/// `Λ` with its exact rank, echelon form and corner/non-corner split.
#[derive(Clone, Debug)]
pub struct ConstraintSystem {
    pub lambda: MatRC,
    pub lambda1: MatRC,
    pub lambda2: MatRC,
    pub lambda_exact: RationalMat,
    pub rank: usize,
    pub rref: RationalMat,
    pub pivot_cols: Vec<usize>,
    pub free_cols: Vec<usize>,
    pub inner_identity: InnerIdentity,
    pub reduced: ReducedSystem,
}

/// Entry-level difference between a derived and a reference matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EntryMismatch {
    pub row: usize,
    pub col: usize,
    pub derived: String,
    pub reference: i64,
}

impl ConstraintSystem {
    /// Shared instance, derived on first use.
    pub fn get() -> &'static ConstraintSystem {
        static SYSTEM: OnceLock<ConstraintSystem> = OnceLock::new();
        SYSTEM.get_or_init(|| build_lambda().expect("constraint system derivation"))
    }

    /// Entries where the derived `Λ` differs from [`REFERENCE_LAMBDA`].
    pub fn reference_mismatches(&self) -> Vec<EntryMismatch> {
        let mut out = Vec::new();
        for (i, row) in REFERENCE_LAMBDA.iter().enumerate() {
            for (j, &p) in row.iter().enumerate() {
                if self.lambda_exact[(i, j)] != rat(p) {
                    out.push(EntryMismatch {
                        row: i,
                        col: j,
                        derived: self.lambda_exact[(i, j)].to_string(),
                        reference: p,
                    });
                }
            }
        }
        out
    }

    pub fn nullspace_dim(&self) -> usize {
        16 - self.rank
    }
}

/// Derives `Λ` from `Ω₁`, `Ω₂`, certifies its rank and builds the reduced
/// non-corner system used by the solver and the projection.
pub fn build_lambda() -> Result<ConstraintSystem> {
    let mut rows = leading_condition_rows(&build_omega_exact(DiagonalKind::Main));
    rows.extend(leading_condition_rows(&build_omega_exact(DiagonalKind::Anti)));
    let lambda_exact = RationalMat::from_rows(rows);

    let reduced_full = rref_exact(&lambda_exact);
    if reduced_full.rank != 5 {
        return Err(Error::Internal(format!(
            "derived constraint matrix has rank {}, expected 5",
            reduced_full.rank
        )));
    }

    let lambda1 = lambda_exact.select_cols(&CORNER_INDICES);
    let lambda2 = lambda_exact.select_cols(&NON_CORNER_INDICES);
    let reduced = reduce_non_corner(&lambda2, &lambda1, reduced_full.rank)?;
    let inner_identity = InnerIdentity::resolve(&lambda_exact)?;
    let free_cols = reduced_full.free_cols();

    Ok(ConstraintSystem {
        lambda: lambda_exact.to_f64(),
        lambda1: lambda1.to_f64(),
        lambda2: lambda2.to_f64(),
        rank: reduced_full.rank,
        rref: reduced_full.rref,
        pivot_cols: reduced_full.pivot_cols,
        free_cols,
        inner_identity,
        reduced,
        lambda_exact,
    })
}

fn reduce_non_corner(lambda2: &RationalMat, lambda1: &RationalMat, rank: usize) -> Result<ReducedSystem> {
    let augmented = rref_exact(&lambda2.hstack(lambda1));
    let Rref {
        rref, pivot_cols, ..
    } = &augmented;
    // A pivot among the corner columns would make some corner choices infeasible.
    if augmented.rank != rank || pivot_cols.iter().any(|&c| c >= 12) {
        return Err(Error::Internal(format!(
            "non-corner block does not have full rank {rank}: pivots {pivot_cols:?}"
        )));
    }
    let rows: Vec<usize> = (0..rank).collect();
    let e = rref.select_rows(&rows).select_cols(&(0..12).collect::<Vec<_>>());
    let f = rref.select_rows(&rows).select_cols(&(12..16).collect::<Vec<_>>());
    let gram_inv = e
        .mul(&e.transpose())?
        .inverse()
        .ok_or_else(|| Error::Internal("E Eᵀ is singular".into()))?;
    let projector = e.transpose().mul(&gram_inv)?;
    let free_cols = (0..12).filter(|c| !pivot_cols.contains(c)).collect();
    Ok(ReducedSystem {
        e_f64: e.to_f64(),
        f_f64: f.to_f64(),
        projector: projector.to_f64(),
        pivot_cols: pivot_cols.clone(),
        free_cols,
        e,
        f,
    })
}
