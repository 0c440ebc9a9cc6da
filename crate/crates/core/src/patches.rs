//! Bicubic Bezier and Hermite patches.
//!
//! A coordinate of a Bezier patch is `x(u, v) = uᵀ M_Bᵀ X M_B v` with
//! monomial vectors `u = [u³, u², u, 1]` and `v = [v³, v², v, 1]`. The first
//! grid index runs with `u`, the second with `v`.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::algebra::Mat4;
use crate::error::{Error, Result};

/// Cubic Bezier basis matrix in monomial form.
pub fn bezier_basis() -> Mat4 {
    Mat4::from_rows([
        [-1.0, 3.0, -3.0, 1.0],
        [3.0, -6.0, 3.0, 0.0],
        [-3.0, 3.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
    ])
}

/// Maps the monomial vector of `u` to the monomial vector of `1 − u`.
pub fn reparam_t() -> Mat4 {
    Mat4::from_rows([
        [-1.0, 3.0, -3.0, 1.0],
        [0.0, 1.0, -2.0, 1.0],
        [0.0, 0.0, -1.0, 1.0],
        [0.0, 0.0, 0.0, 1.0],
    ])
}

/// `[t³, t², t, 1]`
pub fn monomials(t: f64) -> [f64; 4] {
    [t * t * t, t * t, t, 1.0]
}

/// Derivative of [`monomials`]: `[3t², 2t, 1, 0]`
pub fn monomials_deriv(t: f64) -> [f64; 4] {
    [3.0 * t * t, 2.0 * t, 1.0, 0.0]
}

/// How evaluation treats parameters outside `[0, 1]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Domain {
    #[default]
    Strict,
    Extrapolate,
}

impl Domain {
    fn check(self, name: &'static str, value: f64) -> Result<()> {
        if !value.is_finite() || (self == Domain::Strict && !(0.0..=1.0).contains(&value)) {
            return Err(Error::Domain { name, value });
        }
        Ok(())
    }
}

fn dot4(a: [f64; 4], b: [f64; 4]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

/// Cubic Bezier curve value `pᵀ M_B t` in strict domain mode.
pub fn eval_curve(p: [f64; 4], t: f64) -> Result<f64> {
    eval_curve_with(p, t, Domain::Strict)
}

pub fn eval_curve_with(p: [f64; 4], t: f64, domain: Domain) -> Result<f64> {
    domain.check("t", t)?;
    Ok(dot4(bezier_basis().vec_mul(p), monomials(t)))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ZERO: Point3 = Point3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    pub fn dot(self, o: Point3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Point3) -> Point3 {
        Point3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, o: Point3) -> f64 {
        (self - o).norm()
    }

    pub fn max_abs(self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl Add for Point3 {
    type Output = Point3;
    fn add(self, o: Point3) -> Point3 {
        Point3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Point3 {
    type Output = Point3;
    fn sub(self, o: Point3) -> Point3 {
        Point3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, s: f64) -> Point3 {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Point3 {
    type Output = Point3;
    fn neg(self) -> Point3 {
        Point3::new(-self.x, -self.y, -self.z)
    }
}

/// 4×4 control values of one coordinate, indexed `[i][j]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScalarGrid(pub [[f64; 4]; 4]);

/// Positions of the corner values in the row-major (ξ) ordering.
pub const CORNER_INDICES: [usize; 4] = [0, 3, 12, 15];

impl ScalarGrid {
    pub const ZERO: ScalarGrid = ScalarGrid([[0.0; 4]; 4]);

    pub fn constant(c: f64) -> Self {
        ScalarGrid([[c; 4]; 4])
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut g = Self::ZERO;
        for i in 0..4 {
            for j in 0..4 {
                g.0[i][j] = f(i, j);
            }
        }
        g
    }

    /// Bilinear blend of four corner values sampled at `(i/3, j/3)`.
    pub fn bilinear(c00: f64, c03: f64, c30: f64, c33: f64) -> Self {
        Self::from_fn(|i, j| {
            let (s, t) = (i as f64 / 3.0, j as f64 / 3.0);
            (1.0 - s) * (1.0 - t) * c00 + (1.0 - s) * t * c03 + s * (1.0 - t) * c30 + s * t * c33
        })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.0[i][j] = v;
    }

    /// Row-major values `[x00, x01, …, x33]`.
    pub fn to_row_major(&self) -> [f64; 16] {
        let mut out = [0.0; 16];
        for (k, v) in self.0.iter().flatten().enumerate() {
            out[k] = *v;
        }
        out
    }

    pub fn from_row_major(v: &[f64; 16]) -> Self {
        Self::from_fn(|i, j| v[4 * i + j])
    }

    /// `[x00, x03, x30, x33]`
    pub fn corners(&self) -> [f64; 4] {
        [self.0[0][0], self.0[0][3], self.0[3][0], self.0[3][3]]
    }

    pub fn as_mat4(&self) -> Mat4 {
        Mat4(self.0)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(|i, j| f(self.0[i][j]))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// `max(1, max |value|)`, the reference magnitude for relative tolerances.
    pub fn scale(&self) -> f64 {
        self.max_abs().max(1.0)
    }

    pub fn max_abs_diff(&self, other: &ScalarGrid) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Value of `uᵀ M_Bᵀ X M_B v` at monomial vectors `mu`, `mv`.
    pub fn eval_monomials(&self, mu: [f64; 4], mv: [f64; 4]) -> f64 {
        let mb = bezier_basis();
        let bu = mb.mul_vec(mu);
        let bv = mb.mul_vec(mv);
        dot4(bu, self.as_mat4().mul_vec(bv))
    }
}

/// Bicubic Bezier patch: one control grid per coordinate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BezierPatch {
    pub x: ScalarGrid,
    pub y: ScalarGrid,
    pub z: ScalarGrid,
}

/// Bicubic Hermite patch. Per coordinate, with the 1-based indices of the
/// literature mapped to `[i-1][j-1]`:
///
/// | | col 1 | col 2 | col 3 | col 4 |
/// |---|---|---|---|---|
/// | row 1 | P(0,0) | P(0,1) | Pv(0,0) | Pv(0,1) |
/// | row 2 | P(1,0) | P(1,1) | Pv(1,0) | Pv(1,1) |
/// | row 3 | Pu(0,0) | Pu(0,1) | Puv(0,0) | Puv(0,1) |
/// | row 4 | Pu(1,0) | Pu(1,1) | Puv(1,0) | Puv(1,1) |
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HermitePatch {
    pub x: ScalarGrid,
    pub y: ScalarGrid,
    pub z: ScalarGrid,
}

macro_rules! per_coordinate {
    ($t:ident) => {
        impl $t {
            pub fn new(x: ScalarGrid, y: ScalarGrid, z: ScalarGrid) -> Self {
                $t { x, y, z }
            }

            pub fn grids(&self) -> [&ScalarGrid; 3] {
                [&self.x, &self.y, &self.z]
            }

            pub fn grids_mut(&mut self) -> [&mut ScalarGrid; 3] {
                [&mut self.x, &mut self.y, &mut self.z]
            }

            pub fn map_grids(&self, f: impl Fn(&ScalarGrid) -> ScalarGrid) -> Self {
                $t::new(f(&self.x), f(&self.y), f(&self.z))
            }

            pub fn is_finite(&self) -> bool {
                self.grids().iter().all(|g| g.is_finite())
            }

            pub fn max_abs_diff(&self, other: &Self) -> f64 {
                self.x
                    .max_abs_diff(&other.x)
                    .max(self.y.max_abs_diff(&other.y))
                    .max(self.z.max_abs_diff(&other.z))
            }
        }
    };
}

per_coordinate!(BezierPatch);
per_coordinate!(HermitePatch);

impl BezierPatch {
    pub fn from_points(pts: [[Point3; 4]; 4]) -> Self {
        BezierPatch::new(
            ScalarGrid::from_fn(|i, j| pts[i][j].x),
            ScalarGrid::from_fn(|i, j| pts[i][j].y),
            ScalarGrid::from_fn(|i, j| pts[i][j].z),
        )
    }

    pub fn control_point(&self, i: usize, j: usize) -> Point3 {
        Point3::new(self.x.get(i, j), self.y.get(i, j), self.z.get(i, j))
    }

    pub fn control_points(&self) -> [[Point3; 4]; 4] {
        let mut out = [[Point3::ZERO; 4]; 4];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, p) in row.iter_mut().enumerate() {
                *p = self.control_point(i, j);
            }
        }
        out
    }

    /// Applies `f` to every control point.
    pub fn map_points(&self, f: impl Fn(Point3) -> Point3) -> Self {
        let mut pts = self.control_points();
        for p in pts.iter_mut().flatten() {
            *p = f(*p);
        }
        BezierPatch::from_points(pts)
    }

    pub fn scale(&self) -> f64 {
        self.x.scale().max(self.y.scale()).max(self.z.scale())
    }

    fn eval_monomials(&self, mu: [f64; 4], mv: [f64; 4]) -> Point3 {
        Point3::new(
            self.x.eval_monomials(mu, mv),
            self.y.eval_monomials(mu, mv),
            self.z.eval_monomials(mu, mv),
        )
    }

    /// Position and the two first partial derivatives at `(u, v)`.
    pub fn eval_with_partials(&self, u: f64, v: f64, domain: Domain) -> Result<(Point3, Point3, Point3)> {
        domain.check("u", u)?;
        domain.check("v", v)?;
        let (mu, mv) = (monomials(u), monomials(v));
        let (du, dv) = (monomials_deriv(u), monomials_deriv(v));
        Ok((
            self.eval_monomials(mu, mv),
            self.eval_monomials(du, mv),
            self.eval_monomials(mu, dv),
        ))
    }
}

/// Patch point at `(u, v)` in strict domain mode.
pub fn eval_patch(patch: &BezierPatch, u: f64, v: f64) -> Result<Point3> {
    eval_patch_with(patch, u, v, Domain::Strict)
}

pub fn eval_patch_with(patch: &BezierPatch, u: f64, v: f64, domain: Domain) -> Result<Point3> {
    domain.check("u", u)?;
    domain.check("v", v)?;
    Ok(patch.eval_monomials(monomials(u), monomials(v)))
}

/// Hermite → Bezier for one coordinate grid; the exact inverse of
/// [`bezier_grid_to_hermite`].
pub fn hermite_grid_to_bezier(h: &ScalarGrid) -> ScalarGrid {
    let h = |i: usize, j: usize| h.0[i - 1][j - 1];
    let third = 1.0 / 3.0;
    let ninth = 1.0 / 9.0;
    ScalarGrid([
        [
            h(1, 1),
            h(1, 1) + third * h(1, 3),
            h(1, 2) - third * h(1, 4),
            h(1, 2),
        ],
        [
            h(1, 1) + third * h(3, 1),
            h(1, 1) + third * (h(1, 3) + h(3, 1)) + ninth * h(3, 3),
            h(1, 2) + third * (h(3, 2) - h(1, 4)) - ninth * h(3, 4),
            h(1, 2) + third * h(3, 2),
        ],
        [
            h(2, 1) - third * h(4, 1),
            h(2, 1) + third * (h(2, 3) - h(4, 1)) - ninth * h(4, 3),
            h(2, 2) - third * (h(2, 4) + h(4, 2)) + ninth * h(4, 4),
            h(2, 2) - third * h(4, 2),
        ],
        [
            h(2, 1),
            h(2, 1) + third * h(2, 3),
            h(2, 2) - third * h(2, 4),
            h(2, 2),
        ],
    ])
}

/// Bezier → Hermite for one coordinate grid.
pub fn bezier_grid_to_hermite(b: &ScalarGrid) -> ScalarGrid {
    let x = |i: usize, j: usize| b.0[i][j];
    ScalarGrid([
        [
            x(0, 0),
            x(0, 3),
            3.0 * (x(0, 1) - x(0, 0)),
            3.0 * (x(0, 3) - x(0, 2)),
        ],
        [
            x(3, 0),
            x(3, 3),
            3.0 * (x(3, 1) - x(3, 0)),
            3.0 * (x(3, 3) - x(3, 2)),
        ],
        [
            3.0 * (x(1, 0) - x(0, 0)),
            3.0 * (x(1, 3) - x(0, 3)),
            9.0 * (x(0, 0) - x(0, 1) - x(1, 0) + x(1, 1)),
            9.0 * (x(0, 2) - x(0, 3) - x(1, 2) + x(1, 3)),
        ],
        [
            3.0 * (x(3, 0) - x(2, 0)),
            3.0 * (x(3, 3) - x(2, 3)),
            9.0 * (x(2, 0) - x(2, 1) - x(3, 0) + x(3, 1)),
            9.0 * (x(2, 2) - x(2, 3) - x(3, 2) + x(3, 3)),
        ],
    ])
}

pub fn hermite_to_bezier(h: &HermitePatch) -> BezierPatch {
    BezierPatch::new(
        hermite_grid_to_bezier(&h.x),
        hermite_grid_to_bezier(&h.y),
        hermite_grid_to_bezier(&h.z),
    )
}

pub fn bezier_to_hermite(b: &BezierPatch) -> HermitePatch {
    HermitePatch::new(
        bezier_grid_to_hermite(&b.x),
        bezier_grid_to_hermite(&b.y),
        bezier_grid_to_hermite(&b.z),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    /// de Casteljau evaluation, independent of the matrix form.
    fn de_casteljau(p: [f64; 4], t: f64) -> f64 {
        let mut q = p;
        for level in 1..4 {
            for k in 0..4 - level {
                q[k] = (1.0 - t) * q[k] + t * q[k + 1];
            }
        }
        q[0]
    }

    fn de_casteljau_patch(g: &ScalarGrid, u: f64, v: f64) -> f64 {
        let rows = [0, 1, 2, 3].map(|i| de_casteljau(g.0[i], v));
        de_casteljau(rows, u)
    }

    fn random_grid(rng: &mut StdRng) -> ScalarGrid {
        ScalarGrid::from_fn(|_, _| rng.gen_range(-10.0..10.0))
    }

    fn random_patch(rng: &mut StdRng) -> BezierPatch {
        BezierPatch::new(random_grid(rng), random_grid(rng), random_grid(rng))
    }

    #[test]
    fn basis_rows_and_column_sums() {
        let mb = bezier_basis();
        assert_eq!(mb.row(0), [-1.0, 3.0, -3.0, 1.0]);
        assert_eq!(mb.row(3), [1.0, 0.0, 0.0, 0.0]);
        let sums: Vec<f64> = (0..4).map(|j| mb.col(j).iter().sum()).collect();
        assert_eq!(sums, vec![0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn reparam_swaps_endpoints_and_is_involution() {
        let t = reparam_t();
        assert_eq!(t.mul_vec([1.0; 4]), [0.0, 0.0, 0.0, 1.0]);
        assert_eq!(t.mul_vec([0.0, 0.0, 0.0, 1.0]), [1.0; 4]);
        assert_eq!(t * t, Mat4::identity());
        for k in 0..=10 {
            let u = k as f64 / 10.0;
            let mapped = t.mul_vec(monomials(u));
            let want = monomials(1.0 - u);
            for i in 0..4 {
                assert!((mapped[i] - want[i]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn curve_endpoints_and_midpoint() {
        let p = [2.0, -1.0, 5.0, 7.0];
        assert_eq!(eval_curve(p, 0.0).unwrap(), 2.0);
        assert_eq!(eval_curve(p, 1.0).unwrap(), 7.0);
        assert!((eval_curve([0.0, 1.0, 1.0, 0.0], 0.5).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn curve_domain_is_strict_by_default() {
        assert!(matches!(
            eval_curve([0.0; 4], 1.5),
            Err(Error::Domain { name: "t", .. })
        ));
        assert!(eval_curve([0.0; 4], f64::NAN).is_err());
        let extrapolated = eval_curve_with([0.0, 1.0, 2.0, 3.0], 2.0, Domain::Extrapolate).unwrap();
        assert!((extrapolated - 6.0).abs() < 1e-12);
    }

    #[test]
    fn curve_matches_de_casteljau() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..200 {
            let p = [0; 4].map(|_| rng.gen_range(-10.0..10.0));
            let t: f64 = rng.gen_range(0.0..=1.0);
            assert!((eval_curve(p, t).unwrap() - de_casteljau(p, t)).abs() < 1e-12);
        }
    }

    #[test]
    fn patch_interpolates_corners() {
        let mut rng = StdRng::seed_from_u64(11);
        let patch = random_patch(&mut rng);
        for &(u, v, i, j) in &[(0.0, 0.0, 0, 0), (0.0, 1.0, 0, 3), (1.0, 0.0, 3, 0), (1.0, 1.0, 3, 3)] {
            let p = eval_patch(&patch, u, v).unwrap();
            assert!(p.distance(patch.control_point(i, j)) < 1e-12);
        }
    }

    #[test]
    fn constant_patch_is_constant() {
        let patch = BezierPatch::new(
            ScalarGrid::constant(2.5),
            ScalarGrid::constant(-1.0),
            ScalarGrid::constant(4.0),
        );
        for &(u, v) in &[(0.3, 0.7), (0.5, 0.5), (0.9, 0.1)] {
            let p = eval_patch(&patch, u, v).unwrap();
            assert!(p.distance(Point3::new(2.5, -1.0, 4.0)) < 1e-12);
        }
    }

    #[test]
    fn patch_matches_de_casteljau_and_boundary_curves() {
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..50 {
            let patch = random_patch(&mut rng);
            let (u, v) = (rng.gen_range(0.0..=1.0), rng.gen_range(0.0..=1.0));
            let p = eval_patch(&patch, u, v).unwrap();
            assert!((p.x - de_casteljau_patch(&patch.x, u, v)).abs() < 1e-11);
            assert!((p.z - de_casteljau_patch(&patch.z, u, v)).abs() < 1e-11);

            let g = &patch.y;
            let col0 = [g.get(0, 0), g.get(1, 0), g.get(2, 0), g.get(3, 0)];
            let col3 = [g.get(0, 3), g.get(1, 3), g.get(2, 3), g.get(3, 3)];
            assert!((eval_patch(&patch, u, 0.0).unwrap().y - eval_curve(col0, u).unwrap()).abs() < 1e-11);
            assert!((eval_patch(&patch, u, 1.0).unwrap().y - eval_curve(col3, u).unwrap()).abs() < 1e-11);
            assert!((eval_patch(&patch, 0.0, v).unwrap().y - eval_curve(g.0[0], v).unwrap()).abs() < 1e-11);
            assert!((eval_patch(&patch, 1.0, v).unwrap().y - eval_curve(g.0[3], v).unwrap()).abs() < 1e-11);
        }
    }

    #[test]
    fn patch_domain_errors() {
        let patch = BezierPatch::default();
        assert!(eval_patch(&patch, -0.1, 0.5).is_err());
        assert!(eval_patch(&patch, 0.5, 1.1).is_err());
        assert!(eval_patch_with(&patch, -0.1, 1.1, Domain::Extrapolate).is_ok());
    }

    #[test]
    fn affine_invariance() {
        let mut rng = StdRng::seed_from_u64(5);
        let a = [[0.3, -1.2, 0.5], [2.0, 0.1, -0.7], [0.0, 0.9, 1.4]];
        let shift = Point3::new(1.5, -2.0, 0.25);
        let apply = |p: Point3| {
            Point3::new(
                a[0][0] * p.x + a[0][1] * p.y + a[0][2] * p.z,
                a[1][0] * p.x + a[1][1] * p.y + a[1][2] * p.z,
                a[2][0] * p.x + a[2][1] * p.y + a[2][2] * p.z,
            ) + shift
        };
        for _ in 0..20 {
            let patch = random_patch(&mut rng);
            let mapped = patch.map_points(apply);
            let (u, v) = (rng.gen_range(0.0..=1.0), rng.gen_range(0.0..=1.0));
            let lhs = eval_patch(&mapped, u, v).unwrap();
            let rhs = apply(eval_patch(&patch, u, v).unwrap());
            assert!(lhs.distance(rhs) < 1e-12 * patch.scale().max(1.0) * 10.0);
        }
    }

    #[test]
    fn hermite_constant_surface() {
        let mut h = ScalarGrid::ZERO;
        h.0[0][0] = 1.0;
        h.0[0][1] = 1.0;
        h.0[1][0] = 1.0;
        h.0[1][1] = 1.0;
        assert_eq!(hermite_grid_to_bezier(&h), ScalarGrid::constant(1.0));
        assert_eq!(bezier_grid_to_hermite(&ScalarGrid::constant(1.0)), h);
    }

    #[test]
    fn hermite_single_entries() {
        let mut h = ScalarGrid::ZERO;
        h.0[0][2] = 3.0;
        assert!((hermite_grid_to_bezier(&h).get(0, 1) - 1.0).abs() < 1e-15);

        let mut b = ScalarGrid::ZERO;
        b.set(0, 1, 1.0);
        assert_eq!(bezier_grid_to_hermite(&b).0[0][2], 3.0);

        let mut b = ScalarGrid::ZERO;
        b.set(1, 1, 1.0);
        assert_eq!(bezier_grid_to_hermite(&b).0[2][2], 9.0);
    }

    #[test]
    fn hermite_entries_are_derivatives() {
        let mut rng = StdRng::seed_from_u64(9);
        let patch = random_patch(&mut rng);
        let h = bezier_to_hermite(&patch);
        let e = 1e-5;
        let f = |u: f64, v: f64| eval_patch_with(&patch, u, v, Domain::Extrapolate).unwrap().x;
        let du = |u: f64, v: f64| (f(u + e, v) - f(u - e, v)) / (2.0 * e);
        let dv = |u: f64, v: f64| (f(u, v + e) - f(u, v - e)) / (2.0 * e);
        let duv = |u: f64, v: f64| (du(u, v + e) - du(u, v - e)) / (2.0 * e);
        let hx = |i: usize, j: usize| h.x.0[i - 1][j - 1];
        assert!((hx(1, 3) - dv(0.0, 0.0)).abs() < 1e-6);
        assert!((hx(2, 4) - dv(1.0, 1.0)).abs() < 1e-6);
        assert!((hx(3, 2) - du(0.0, 1.0)).abs() < 1e-6);
        assert!((hx(4, 1) - du(1.0, 0.0)).abs() < 1e-6);
        assert!((hx(3, 3) - duv(0.0, 0.0)).abs() < 1e-4);
        assert!((hx(4, 4) - duv(1.0, 1.0)).abs() < 1e-4);
    }

    #[test]
    fn conversion_roundtrips() {
        let mut rng = StdRng::seed_from_u64(13);
        for _ in 0..100 {
            let h = HermitePatch::new(random_grid(&mut rng), random_grid(&mut rng), random_grid(&mut rng));
            assert!(bezier_to_hermite(&hermite_to_bezier(&h)).max_abs_diff(&h) <= 1e-12);
            let b = random_patch(&mut rng);
            assert!(hermite_to_bezier(&bezier_to_hermite(&b)).max_abs_diff(&b) <= 1e-12);
        }
    }
}
