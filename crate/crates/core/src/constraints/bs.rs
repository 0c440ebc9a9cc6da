use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use super::{collapse_diagonal, ConstraintSystem, DiagonalKind, NON_CORNER_INDICES};
use crate::algebra::{rat_to_f64, Rational};
use crate::patches::{ScalarGrid, CORNER_INDICES};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagonalResidual {
    pub kind: DiagonalKind,
    /// `[a₆, a₅, a₄]`
    pub leading: [f64; 3],
    /// `|aₖ| / scale`
    pub relative: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstraintReport {
    pub per_diagonal: [DiagonalResidual; 2],
    pub max_residual: f64,
    pub compliant: bool,
    pub tolerance_used: f64,
}

/// Leading diagonal coefficients of `g` relative to `max(1, max|gᵢⱼ|)`.
pub fn bs_residuals(g: &ScalarGrid, tol: f64) -> ConstraintReport {
    let scale = g.scale();
    let per_diagonal = DiagonalKind::ALL.map(|kind| {
        let poly = collapse_diagonal(g, kind);
        let leading = [poly.coeff(6), poly.coeff(5), poly.coeff(4)];
        DiagonalResidual {
            kind,
            leading,
            relative: leading.map(|a| a.abs() / scale),
        }
    });
    let max_residual = per_diagonal
        .iter()
        .flat_map(|d| d.relative)
        .fold(0.0f64, f64::max);
    ConstraintReport {
        per_diagonal,
        max_residual,
        compliant: max_residual <= tol,
        tolerance_used: tol,
    }
}

fn exact(v: f64) -> Rational {
    BigRational::from_float(v).expect("finite control value")
}

/// Grid with the given corners `[x00, x03, x30, x33]` whose non-corner
/// values solve the reduced system exactly.
///
/// `free` is assigned, in order, to the non-pivot columns of the reduced
/// non-corner system ([`super::ReducedSystem::free_cols`], indices into
/// [`NON_CORNER_INDICES`]); the pivot values follow by back-substitution in
/// rational arithmetic and are rounded once at the end.
pub fn bs_solve(corners: [f64; 4], free: [f64; 7]) -> ScalarGrid {
    let red = &ConstraintSystem::get().reduced;
    let corners_q: Vec<Rational> = corners.iter().map(|&v| exact(v)).collect();
    let mut xi2: Vec<Option<Rational>> = vec![None; 12];
    for (&col, &v) in red.free_cols.iter().zip(&free) {
        xi2[col] = Some(exact(v));
    }
    for (row, &pc) in red.pivot_cols.iter().enumerate() {
        let mut acc = Rational::zero();
        for (j, c) in corners_q.iter().enumerate() {
            acc -= &red.f[(row, j)] * c;
        }
        for &fc in &red.free_cols {
            let coeff = &red.e[(row, fc)];
            if !coeff.is_zero() {
                acc -= coeff * xi2[fc].as_ref().expect("free value assigned");
            }
        }
        xi2[pc] = Some(acc);
    }

    let mut out = [0.0; 16];
    for (k, &idx) in CORNER_INDICES.iter().enumerate() {
        out[idx] = corners[k];
    }
    for (k, &idx) in NON_CORNER_INDICES.iter().enumerate() {
        out[idx] = rat_to_f64(xi2[k].as_ref().expect("every column assigned"));
    }
    ScalarGrid::from_row_major(&out)
}

/// Nearest compliant grid in the least-squares sense over the 12 non-corner
/// values, corners held fixed.
///
/// With `E ξ₂ + F ξ₁ = 0` the reduced system (full row rank), the result is
/// `ξ₂ − Eᵀ(EEᵀ)⁻¹(E ξ₂ + F ξ₁)`. Corner values are copied, never recomputed.
pub fn bs_project(g: &ScalarGrid) -> ScalarGrid {
    let red = &ConstraintSystem::get().reduced;
    let v = g.to_row_major();
    let xi1: Vec<f64> = CORNER_INDICES.iter().map(|&i| v[i]).collect();
    let xi2: Vec<f64> = NON_CORNER_INDICES.iter().map(|&i| v[i]).collect();

    let e_xi2 = red.e_f64.mul_vec(&xi2).expect("5x12 times 12");
    let f_xi1 = red.f_f64.mul_vec(&xi1).expect("5x4 times 4");
    let residual: Vec<f64> = e_xi2.iter().zip(&f_xi1).map(|(a, b)| a + b).collect();
    let correction = red.projector.mul_vec(&residual).expect("12x5 times 5");

    let mut out = v;
    for (k, &idx) in NON_CORNER_INDICES.iter().enumerate() {
        out[idx] = xi2[k] - correction[k];
    }
    ScalarGrid::from_row_major(&out)
}

/// `(x₁₁ − x₁₂ − x₂₁ ± x₂₂) − (x₀₀ − x₀₃ − x₃₀ + x₃₃)/9`, with the sign of
/// `x₂₂` taken from the certified [`super::InnerIdentity`].
pub fn bs_inner_identity(g: &ScalarGrid) -> f64 {
    let sign = f64::from(ConstraintSystem::get().inner_identity.x22_sign);
    let x = |i, j| g.get(i, j);
    (x(1, 1) - x(1, 2) - x(2, 1) + sign * x(2, 2))
        - (x(0, 0) - x(0, 3) - x(3, 0) + x(3, 3)) / 9.0
}
