//! Conditions in Hermite form.
//!
//! Indices below follow the 1-based Hermite layout documented on
//! [`HermitePatch`]: `h(1..2, 1..2)` corners, `h(1..2, 3..4)` v-tangents,
//! `h(3..4, 1..2)` u-tangents, `h(3..4, 3..4)` twists.

use serde::Serialize;

use super::PHI_DEGENERACY;
use crate::patches::{HermitePatch, ScalarGrid};

fn h(g: &ScalarGrid, i: usize, j: usize) -> f64 {
    g.0[i - 1][j - 1]
}

/// `φ = h₁₁ − h₁₂ − h₂₁ + h₂₂`
pub fn hs_phi(g: &ScalarGrid) -> f64 {
    h(g, 1, 1) - h(g, 1, 2) - h(g, 2, 1) + h(g, 2, 2)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Twists {
    pub x33: f64,
    pub x34: f64,
    pub x43: f64,
    pub x44: f64,
}

impl Twists {
    /// Writes the twists into a Hermite grid.
    pub fn apply(&self, g: &mut ScalarGrid) {
        g.0[2][2] = self.x33;
        g.0[2][3] = self.x34;
        g.0[3][2] = self.x43;
        g.0[3][3] = self.x44;
    }
}

/// Twists parameterised by `α`, `β` and `φ`.
pub fn hs_twists(phi: f64, alpha: f64, beta: f64) -> Twists {
    Twists {
        x33: 2.0 * phi * (1.0 - alpha),
        x34: 2.0 * phi * (1.0 - beta),
        x43: 2.0 * phi * beta,
        x44: 2.0 * phi * alpha,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum AlphaBeta {
    Params { alpha: f64, beta: f64 },
    /// `|φ|` at or below the degeneracy threshold; twists are not determined.
    Degenerate { phi: f64 },
}

/// `a = h₁₄ − h₂₄ + h₄₁ − h₄₂`
fn tangent_a(g: &ScalarGrid) -> f64 {
    h(g, 1, 4) - h(g, 2, 4) + h(g, 4, 1) - h(g, 4, 2)
}

/// `b = h₁₃ − h₂₃ + h₄₁ − h₄₂`
fn tangent_b(g: &ScalarGrid) -> f64 {
    h(g, 1, 3) - h(g, 2, 3) + h(g, 4, 1) - h(g, 4, 2)
}

/// `c = h₃₁ − h₃₂ − h₄₁ + h₄₂`
fn tangent_c(g: &ScalarGrid) -> f64 {
    h(g, 3, 1) - h(g, 3, 2) - h(g, 4, 1) + h(g, 4, 2)
}

/// `α = −(a + φ)/2φ`, `β = −(b + φ)/2φ` from the boundary tangents.
pub fn hs_alpha_beta(g: &ScalarGrid) -> AlphaBeta {
    let phi = hs_phi(g);
    if phi.abs() <= PHI_DEGENERACY * g.scale() {
        return AlphaBeta::Degenerate { phi };
    }
    AlphaBeta::Params {
        alpha: -(tangent_a(g) + phi) / (2.0 * phi),
        beta: -(tangent_b(g) + phi) / (2.0 * phi),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HsReport {
    pub phi: f64,
    /// `[h₃₃ + h₄₄ − 2φ, h₃₄ + h₄₃ − 2φ]`
    pub twist_sum_residuals: [f64; 2],
    /// `h₃₁ − h₃₂ + h₄₁ − h₄₂ + h₁₄ − h₂₄ − h₂₃ + h₁₃ + 4φ`
    pub tangent_residual: f64,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub degenerate_phi: bool,
    /// `[b + h₄₃ + φ, a + h₄₄ + φ, c − h₄₃ − h₄₄ + 2φ]`: the twists agree with
    /// the `α`, `β` implied by the tangents.
    pub row_residuals: [f64; 3],
    /// Twist sums and tangent condition within `tol · scale`.
    pub compliant: bool,
    /// All five conditions within `tol · scale`; equivalent to both
    /// diagonals of the Bezier form being cubic.
    pub bs_equivalent: bool,
    pub tolerance_used: f64,
}

pub fn hs_validate_grid(g: &ScalarGrid, tol: f64) -> HsReport {
    let phi = hs_phi(g);
    let (a, b, c) = (tangent_a(g), tangent_b(g), tangent_c(g));
    let twist_sum_residuals = [
        h(g, 3, 3) + h(g, 4, 4) - 2.0 * phi,
        h(g, 3, 4) + h(g, 4, 3) - 2.0 * phi,
    ];
    let tangent_residual = h(g, 3, 1) - h(g, 3, 2) + h(g, 4, 1) - h(g, 4, 2) + h(g, 1, 4)
        - h(g, 2, 4)
        - h(g, 2, 3)
        + h(g, 1, 3)
        + 4.0 * phi;
    let row_residuals = [
        b + h(g, 4, 3) + phi,
        a + h(g, 4, 4) + phi,
        c - h(g, 4, 3) - h(g, 4, 4) + 2.0 * phi,
    ];
    let (alpha, beta, degenerate_phi) = match hs_alpha_beta(g) {
        AlphaBeta::Params { alpha, beta } => (Some(alpha), Some(beta), false),
        AlphaBeta::Degenerate { .. } => (None, None, true),
    };
    let limit = tol * g.scale();
    let within = |v: &f64| v.abs() <= limit;
    let compliant = twist_sum_residuals.iter().all(within) && within(&tangent_residual);
    HsReport {
        phi,
        twist_sum_residuals,
        tangent_residual,
        alpha,
        beta,
        degenerate_phi,
        row_residuals,
        compliant,
        bs_equivalent: compliant && row_residuals.iter().all(within),
        tolerance_used: tol,
    }
}

/// Completes `g` to an HS-compliant grid for the given `α`, `β`: corners and
/// all other entries are kept; `h₁₄`, `h₁₃` and `h₃₁` are adjusted so the
/// tangents reproduce `α`, `β` and satisfy the tangent condition, and the
/// twists are set by [`hs_twists`].
pub fn hs_complete(g: &ScalarGrid, alpha: f64, beta: f64) -> ScalarGrid {
    let mut g = *g;
    let phi = hs_phi(&g);
    // a + φ = −2αφ through h14, b + φ = −2βφ through h13.
    let rest_a = -h(&g, 2, 4) + h(&g, 4, 1) - h(&g, 4, 2);
    g.0[0][3] = -phi * (1.0 + 2.0 * alpha) - rest_a;
    let rest_b = -h(&g, 2, 3) + h(&g, 4, 1) - h(&g, 4, 2);
    g.0[0][2] = -phi * (1.0 + 2.0 * beta) - rest_b;
    // c = 2φ(α + β) − 2φ through h31.
    let rest_c = -h(&g, 3, 2) - h(&g, 4, 1) + h(&g, 4, 2);
    g.0[2][0] = 2.0 * phi * (alpha + beta) - 2.0 * phi - rest_c;
    hs_twists(phi, alpha, beta).apply(&mut g);
    g
}

/// One report per coordinate.
pub fn hs_validate(patch: &HermitePatch, tol: f64) -> [HsReport; 3] {
    patch.grids().map(|g| hs_validate_grid(g, tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{rat, RationalMat};
    use crate::constraints::{bs_residuals, ConstraintSystem};
    use crate::patches::hermite_grid_to_bezier;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn corners(c: [f64; 4]) -> ScalarGrid {
        let mut g = ScalarGrid::ZERO;
        g.0[0][0] = c[0];
        g.0[0][1] = c[1];
        g.0[1][0] = c[2];
        g.0[1][1] = c[3];
        g
    }

    #[test]
    fn phi_examples() {
        assert_eq!(hs_phi(&corners([1.0, 0.0, 0.0, 0.0])), 1.0);
        assert_eq!(hs_phi(&corners([1.0, 1.0, 1.0, 1.0])), 0.0);
        assert_eq!(hs_phi(&corners([1.0, 0.0, 0.0, 1.0])), 2.0);
    }

    #[test]
    fn twists_examples() {
        assert_eq!(
            hs_twists(1.0, 0.5, 0.5),
            Twists { x33: 1.0, x34: 1.0, x43: 1.0, x44: 1.0 }
        );
        let t = hs_twists(0.0, 0.3, -2.0);
        assert_eq!([t.x33, t.x34, t.x43, t.x44].map(f64::abs), [0.0; 4]);
        let t = hs_twists(1.0, 0.0, 1.0);
        assert_eq!((t.x33, t.x44, t.x43, t.x34), (2.0, 0.0, 2.0, 0.0));
    }

    #[test]
    fn alpha_beta_examples() {
        // φ = 1, a = b = −1.
        let mut g = corners([1.0, 0.0, 0.0, 0.0]);
        g.0[0][3] = -1.0; // h14 → a
        g.0[0][2] = -1.0; // h13 → b
        assert_eq!(hs_alpha_beta(&g), AlphaBeta::Params { alpha: 0.0, beta: 0.0 });
        assert!(matches!(
            hs_alpha_beta(&corners([1.0, 1.0, 1.0, 1.0])),
            AlphaBeta::Degenerate { .. }
        ));
    }

    fn constructed(rng: &mut StdRng, alpha: f64, beta: f64) -> ScalarGrid {
        hs_complete(&ScalarGrid::from_fn(|_, _| rng.gen_range(-10.0..10.0)), alpha, beta)
    }

    #[test]
    fn alpha_beta_roundtrip() {
        let mut rng = StdRng::seed_from_u64(61);
        for _ in 0..200 {
            let (alpha, beta) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let g = constructed(&mut rng, alpha, beta);
            match hs_alpha_beta(&g) {
                AlphaBeta::Params { alpha: a, beta: b } => {
                    assert!((a - alpha).abs() <= 1e-12 * g.scale(), "{a} vs {alpha}");
                    assert!((b - beta).abs() <= 1e-12 * g.scale());
                }
                AlphaBeta::Degenerate { .. } => panic!("random φ should not vanish"),
            }
            let rep = hs_validate_grid(&g, 1e-9);
            assert!(rep.compliant && rep.bs_equivalent, "{rep:?}");
        }
    }

    #[test]
    fn validate_examples() {
        let zero = hs_validate_grid(&ScalarGrid::ZERO, 1e-9);
        assert!(zero.compliant && zero.degenerate_phi);
        assert_eq!(zero.twist_sum_residuals, [0.0, 0.0]);
        assert_eq!(zero.tangent_residual, 0.0);

        let mut g = corners([1.0, 0.0, 0.0, 0.0]);
        Twists { x33: 1.0, x34: 1.0, x43: 1.0, x44: 1.0 }.apply(&mut g);
        g.0[2][0] = -4.0; // h31 makes the tangent sum −4 = −4φ
        let rep = hs_validate_grid(&g, 1e-9);
        assert!(rep.compliant, "{rep:?}");
        assert_eq!(rep.phi, 1.0);
        assert!(rep.alpha.is_some() && rep.beta.is_some());

        g.0[2][0] = 0.0;
        assert!(!hs_validate_grid(&g, 1e-9).compliant);
    }

    #[test]
    fn hs_conditions_span_the_bs_conditions() {
        // Each of the five Hermite conditions, pulled back to Bezier control
        // values through the Bezier→Hermite map, lies in the row space of Λ,
        // and together they have rank 5.
        let lambda = &ConstraintSystem::get().lambda_exact;
        let to_hermite = |k: usize| {
            let mut b = ScalarGrid::ZERO;
            b.0[k / 4][k % 4] = 1.0;
            crate::patches::bezier_grid_to_hermite(&b)
        };
        let conditions: Vec<Vec<i64>> = (0..5)
            .map(|c| {
                (0..16)
                    .map(|k| {
                        let rep = hs_validate_grid(&to_hermite(k), 1e-9);
                        let v = match c {
                            0 => rep.twist_sum_residuals[0],
                            1 => rep.twist_sum_residuals[1],
                            n => rep.row_residuals[n - 2],
                        };
                        assert_eq!(v, v.round());
                        v as i64
                    })
                    .collect()
            })
            .collect();
        for row in &conditions {
            let r: Vec<_> = row.iter().map(|&v| rat(v)).collect();
            assert!(lambda.row_space_contains(&r));
        }
        assert_eq!(crate::algebra::rref_exact(&RationalMat::from_i64_rows(&conditions)).rank, 5);
    }

    #[test]
    fn compliant_hermite_gives_compliant_bezier() {
        let mut rng = StdRng::seed_from_u64(67);
        for _ in 0..200 {
            let (alpha, beta) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let g = constructed(&mut rng, alpha, beta);
            assert!(bs_residuals(&hermite_grid_to_bezier(&g), 1e-9).compliant);
        }
    }
}
