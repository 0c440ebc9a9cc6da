//! Sampling, triangulation and shared-edge continuity measures.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::patches::{eval_patch, BezierPatch, Domain, Point3};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<Point3>,
    pub triangles: Vec<[u32; 3]>,
    /// Per-vertex unit normals, when requested.
    pub normals: Option<Vec<Point3>>,
}

impl TriangleMesh {
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty() && self.triangles.is_empty()
    }

    /// Checks index bounds, repeated indices and normal lengths.
    pub fn validate(&self) -> Result<()> {
        let n = self.vertices.len();
        for (k, t) in self.triangles.iter().enumerate() {
            if t.iter().any(|&i| i as usize >= n) {
                return Err(Error::InvalidArgument(format!("triangle {k} indexes past {n} vertices")));
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(Error::InvalidArgument(format!("triangle {k} repeats a vertex")));
            }
        }
        if let Some(normals) = &self.normals {
            if normals.len() != n {
                return Err(Error::InvalidArgument(format!(
                    "{} normals for {n} vertices",
                    normals.len()
                )));
            }
            if let Some(k) = normals.iter().position(|p| (p.norm() - 1.0).abs() > 1e-9) {
                return Err(Error::InvalidArgument(format!("normal {k} is not unit length")));
            }
        }
        Ok(())
    }

    /// Concatenates `other`, offsetting its indices. Normals survive only if
    /// both meshes carry them.
    pub fn append(&mut self, other: &TriangleMesh) {
        let offset = self.vertices.len() as u32;
        let had_vertices = !self.vertices.is_empty();
        self.normals = match (self.normals.take(), &other.normals) {
            (Some(mut a), Some(b)) => {
                a.extend_from_slice(b);
                Some(a)
            }
            (None, Some(b)) if !had_vertices => Some(b.clone()),
            _ => None,
        };
        self.vertices.extend_from_slice(&other.vertices);
        self.triangles
            .extend(other.triangles.iter().map(|t| t.map(|i| i + offset)));
    }

    pub fn area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|i| self.vertices[i as usize]);
                0.5 * (b - a).cross(c - a).norm()
            })
            .sum()
    }

    /// Number of triangles using each undirected edge.
    pub fn edge_counts(&self) -> HashMap<(u32, u32), usize> {
        let mut counts = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *counts.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        counts
    }
}

/// Which diagonal splits each quad cell of the parameter grid.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TessPattern {
    /// Every cell split along the `v = u` direction.
    #[default]
    MainDiag,
    /// Every cell split along the `v = 1 − u` direction.
    AntiDiag,
    /// Checkerboard of the two.
    Alternating,
    /// Direction alternates with the `u` row.
    ZigZag,
}

impl TessPattern {
    pub const ALL: [TessPattern; 4] = [
        TessPattern::MainDiag,
        TessPattern::AntiDiag,
        TessPattern::Alternating,
        TessPattern::ZigZag,
    ];

    fn splits_main(self, i: usize, j: usize) -> bool {
        match self {
            TessPattern::MainDiag => true,
            TessPattern::AntiDiag => false,
            TessPattern::Alternating => (i + j).is_multiple_of(2),
            TessPattern::ZigZag => i.is_multiple_of(2),
        }
    }
}

impl FromStr for TessPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "main" => Ok(TessPattern::MainDiag),
            "anti" => Ok(TessPattern::AntiDiag),
            "alt" => Ok(TessPattern::Alternating),
            "zigzag" => Ok(TessPattern::ZigZag),
            other => Err(Error::InvalidArgument(format!(
                "unknown pattern {other:?} (expected main, anti, alt or zigzag)"
            ))),
        }
    }
}

impl fmt::Display for TessPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TessPattern::MainDiag => "main",
            TessPattern::AntiDiag => "anti",
            TessPattern::Alternating => "alt",
            TessPattern::ZigZag => "zigzag",
        })
    }
}

fn check_density(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("sampling density n must be at least 1".into()));
    }
    Ok(())
}

/// Points at `(i/n, j/n)`, indexed `[i][j]` with `i` along `u`.
pub fn sample_grid(patch: &BezierPatch, n: usize) -> Result<Vec<Vec<Point3>>> {
    check_density(n)?;
    (0..=n)
        .map(|i| {
            (0..=n)
                .map(|j| eval_patch(patch, i as f64 / n as f64, j as f64 / n as f64))
                .collect()
        })
        .collect()
}

/// `(n+1)²` vertices, `2n²` triangles, counter-clockwise in the `(u, v)`
/// plane, i.e. facing `∂P/∂u × ∂P/∂v`.
pub fn tessellate(patch: &BezierPatch, n: usize, pattern: TessPattern) -> Result<TriangleMesh> {
    let grid = sample_grid(patch, n)?;
    let vertices: Vec<Point3> = grid.into_iter().flatten().collect();
    let id = |i: usize, j: usize| (i * (n + 1) + j) as u32;
    let mut triangles = Vec::with_capacity(2 * n * n);
    for i in 0..n {
        for j in 0..n {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if pattern.splits_main(i, j) {
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            } else {
                triangles.push([a, b, d]);
                triangles.push([b, c, d]);
            }
        }
    }
    Ok(TriangleMesh {
        vertices,
        triangles,
        normals: None,
    })
}

/// Like [`tessellate`], with per-vertex unit normals.
///
/// Where the surface normal is degenerate (collapsed edges, e.g. a cusp)
/// the normal is taken a short step towards the patch centre.
pub fn tessellate_with_normals(patch: &BezierPatch, n: usize, pattern: TessPattern) -> Result<TriangleMesh> {
    let mut mesh = tessellate(patch, n, pattern)?;
    let mut normals = Vec::with_capacity(mesh.vertices.len());
    for i in 0..=n {
        for j in 0..=n {
            let (u, v) = (i as f64 / n as f64, j as f64 / n as f64);
            normals.push(robust_normal(patch, u, v)?);
        }
    }
    mesh.normals = Some(normals);
    Ok(mesh)
}

fn robust_normal(patch: &BezierPatch, u: f64, v: f64) -> Result<Point3> {
    for step in [0.0, 1e-6, 1e-4, 1e-2] {
        let (uu, vv) = (u + step * (0.5 - u), v + step * (0.5 - v));
        if let SurfaceNormal::Unit(nrm) = surface_normal(patch, uu, vv)? {
            return Ok(nrm);
        }
    }
    Ok(Point3::new(0.0, 0.0, 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SurfaceNormal {
    Unit(Point3),
    /// The partial derivatives are (nearly) parallel or vanish.
    Degenerate,
}

impl SurfaceNormal {
    pub fn unit(self) -> Option<Point3> {
        match self {
            SurfaceNormal::Unit(p) => Some(p),
            SurfaceNormal::Degenerate => None,
        }
    }
}

/// Unit `∂P/∂u × ∂P/∂v`; degenerate when the cross product norm is at most
/// `1e−12 · scale`.
pub fn surface_normal(patch: &BezierPatch, u: f64, v: f64) -> Result<SurfaceNormal> {
    let (_, pu, pv) = patch.eval_with_partials(u, v, Domain::Strict)?;
    let c = pu.cross(pv);
    let len = c.norm();
    if len <= 1e-12 * patch.scale() {
        return Ok(SurfaceNormal::Degenerate);
    }
    Ok(SurfaceNormal::Unit(c * (1.0 / len)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeSide {
    /// `u = 0`, running along `v`.
    U0,
    /// `u = 1`, running along `v`.
    U1,
    /// `v = 0`, running along `u`.
    V0,
    /// `v = 1`, running along `u`.
    V1,
}

impl EdgeSide {
    pub const ALL: [EdgeSide; 4] = [EdgeSide::U0, EdgeSide::U1, EdgeSide::V0, EdgeSide::V1];

    /// Row-major control slots along the edge, in the direction of increasing parameter.
    pub fn control_slots(self) -> [usize; 4] {
        match self {
            EdgeSide::U0 => [0, 1, 2, 3],
            EdgeSide::U1 => [12, 13, 14, 15],
            EdgeSide::V0 => [0, 4, 8, 12],
            EdgeSide::V1 => [3, 7, 11, 15],
        }
    }
}

impl FromStr for EdgeSide {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "U0" => Ok(EdgeSide::U0),
            "U1" => Ok(EdgeSide::U1),
            "V0" => Ok(EdgeSide::V0),
            "V1" => Ok(EdgeSide::V1),
            other => Err(Error::InvalidArgument(format!("unknown edge {other:?}"))),
        }
    }
}

impl fmt::Display for EdgeSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// A patch edge with an explicit traversal direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EdgeId {
    pub side: EdgeSide,
    pub reversed: bool,
}

impl EdgeId {
    pub const fn new(side: EdgeSide, reversed: bool) -> Self {
        EdgeId { side, reversed }
    }

    pub const fn forward(side: EdgeSide) -> Self {
        EdgeId { side, reversed: false }
    }

    /// Domain point for edge parameter `t ∈ [0, 1]`.
    pub fn param(&self, t: f64) -> (f64, f64) {
        let s = if self.reversed { 1.0 - t } else { t };
        match self.side {
            EdgeSide::U0 => (0.0, s),
            EdgeSide::U1 => (1.0, s),
            EdgeSide::V0 => (s, 0.0),
            EdgeSide::V1 => (s, 1.0),
        }
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.side, if self.reversed { "(rev)" } else { "" })
    }
}

/// Two patch edges that are meant to coincide.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Adjacency {
    pub a: usize,
    pub edge_a: EdgeId,
    pub b: usize,
    pub edge_b: EdgeId,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContinuityReport {
    /// Largest point distance between matched samples.
    pub c0_max_gap: f64,
    /// Largest norm of the difference of the cross-boundary partials
    /// (`∂/∂u` on U edges, `∂/∂v` on V edges).
    pub c1_max_mismatch: f64,
    /// Largest angle between unit normals, radians in `[0, π]`.
    pub g1_max_angle: f64,
    pub samples: usize,
    /// Samples where either normal was degenerate; excluded from the angle.
    pub degenerate_normals: usize,
    pub c0_continuous: bool,
    pub c1_continuous: bool,
    pub g1_continuous: bool,
    pub tolerance_used: f64,
}

fn cross_partial(side: EdgeSide, pu: Point3, pv: Point3) -> Point3 {
    match side {
        EdgeSide::U0 | EdgeSide::U1 => pu,
        EdgeSide::V0 | EdgeSide::V1 => pv,
    }
}

/// Compares two edges at `n + 1` matched parameter values.
///
/// Positional and derivative measures are judged against `tol · scale` with
/// `scale` the larger patch scale; the normal angle against `tol` radians.
pub fn continuity_report(
    a: &BezierPatch,
    ea: EdgeId,
    b: &BezierPatch,
    eb: EdgeId,
    n: usize,
    tol: f64,
) -> Result<ContinuityReport> {
    if n < 2 {
        return Err(Error::InvalidArgument("continuity sampling needs n >= 2".into()));
    }
    let mut c0 = 0.0f64;
    let mut c1 = 0.0f64;
    let mut g1 = 0.0f64;
    let mut degenerate = 0;
    for k in 0..=n {
        let t = k as f64 / n as f64;
        let (ua, va) = ea.param(t);
        let (ub, vb) = eb.param(t);
        let (pa, pua, pva) = a.eval_with_partials(ua, va, Domain::Strict)?;
        let (pb, pub_, pvb) = b.eval_with_partials(ub, vb, Domain::Strict)?;
        c0 = c0.max(pa.distance(pb));
        c1 = c1.max((cross_partial(ea.side, pua, pva) - cross_partial(eb.side, pub_, pvb)).norm());
        match (surface_normal(a, ua, va)?, surface_normal(b, ub, vb)?) {
            (SurfaceNormal::Unit(na), SurfaceNormal::Unit(nb)) => {
                g1 = g1.max(na.cross(nb).norm().atan2(na.dot(nb)));
            }
            _ => degenerate += 1,
        }
    }
    let scale = a.scale().max(b.scale());
    Ok(ContinuityReport {
        c0_max_gap: c0,
        c1_max_mismatch: c1,
        g1_max_angle: g1,
        samples: n + 1,
        degenerate_normals: degenerate,
        c0_continuous: c0 <= tol * scale,
        c1_continuous: c1 <= tol * scale,
        g1_continuous: g1 <= tol,
        tolerance_used: tol,
    })
}

/// Edge-usage summary of a single-patch grid mesh of density `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridEdgeCheck {
    pub interior_edges: usize,
    pub boundary_edges: usize,
    /// Interior edges not used by exactly two triangles.
    pub bad_interior: usize,
    /// Boundary edges not used by exactly one triangle.
    pub bad_boundary: usize,
    /// Interior edges traversed twice in the same direction.
    pub inconsistent_winding: usize,
}

impl GridEdgeCheck {
    pub fn watertight(&self) -> bool {
        self.bad_interior == 0 && self.bad_boundary == 0 && self.inconsistent_winding == 0
    }
}

/// Checks a mesh produced by [`tessellate`] at density `n`.
pub fn check_grid_edges(mesh: &TriangleMesh, n: usize) -> GridEdgeCheck {
    let on_boundary = |a: u32, b: u32| {
        let (ia, ja) = (a as usize / (n + 1), a as usize % (n + 1));
        let (ib, jb) = (b as usize / (n + 1), b as usize % (n + 1));
        (ia == ib && (ia == 0 || ia == n)) || (ja == jb && (ja == 0 || ja == n))
    };
    let mut directed: HashMap<(u32, u32), usize> = HashMap::new();
    for t in &mesh.triangles {
        for k in 0..3 {
            *directed.entry((t[k], t[(k + 1) % 3])).or_insert(0) += 1;
        }
    }
    let mut check = GridEdgeCheck {
        interior_edges: 0,
        boundary_edges: 0,
        bad_interior: 0,
        bad_boundary: 0,
        inconsistent_winding: 0,
    };
    for (&(a, b), &count) in &mesh.edge_counts() {
        if on_boundary(a, b) {
            check.boundary_edges += 1;
            if count != 1 {
                check.bad_boundary += 1;
            }
        } else {
            check.interior_edges += 1;
            if count != 2 {
                check.bad_interior += 1;
            }
            let fwd = directed.get(&(a, b)).copied().unwrap_or(0);
            let back = directed.get(&(b, a)).copied().unwrap_or(0);
            if fwd != 1 || back != 1 {
                check.inconsistent_winding += 1;
            }
        }
    }
    check
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::{bs_solve, collapse_diagonal, DiagonalKind};
    use crate::patches::{Domain, ScalarGrid};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_grid(rng: &mut StdRng) -> ScalarGrid {
        ScalarGrid::from_fn(|_, _| rng.gen_range(-10.0..10.0))
    }

    fn random_patch(rng: &mut StdRng) -> BezierPatch {
        BezierPatch::new(random_grid(rng), random_grid(rng), random_grid(rng))
    }

    fn bilinear_patch(p00: Point3, p03: Point3, p30: Point3, p33: Point3) -> BezierPatch {
        BezierPatch::new(
            ScalarGrid::bilinear(p00.x, p03.x, p30.x, p33.x),
            ScalarGrid::bilinear(p00.y, p03.y, p30.y, p33.y),
            ScalarGrid::bilinear(p00.z, p03.z, p30.z, p33.z),
        )
    }

    fn planar_patch() -> BezierPatch {
        BezierPatch::new(
            ScalarGrid::from_fn(|i, _| i as f64 + 0.1 * (i * i) as f64),
            ScalarGrid::from_fn(|i, j| j as f64 * 1.5 + 0.2 * i as f64 - 0.05 * (j * j) as f64),
            ScalarGrid::ZERO,
        )
    }

    #[test]
    fn sample_grid_examples() {
        let mut rng = StdRng::seed_from_u64(81);
        let patch = random_patch(&mut rng);
        let g1 = sample_grid(&patch, 1).unwrap();
        assert_eq!(g1[0][0], patch.control_point(0, 0));
        assert_eq!(g1[0][1], patch.control_point(0, 3));
        assert_eq!(g1[1][0], patch.control_point(3, 0));
        assert_eq!(g1[1][1], patch.control_point(3, 3));

        let g2 = sample_grid(&patch, 2).unwrap();
        assert_eq!(g2[1][1], eval_patch(&patch, 0.5, 0.5).unwrap());

        let c = BezierPatch::new(ScalarGrid::constant(1.0), ScalarGrid::constant(2.0), ScalarGrid::constant(3.0));
        for p in sample_grid(&c, 5).unwrap().iter().flatten() {
            assert!(p.distance(Point3::new(1.0, 2.0, 3.0)) < 1e-12);
        }
        assert!(sample_grid(&patch, 0).is_err());
    }

    #[test]
    fn tessellate_counts() {
        let patch = planar_patch();
        let one = tessellate(&patch, 1, TessPattern::MainDiag).unwrap();
        assert_eq!((one.vertices.len(), one.triangles.len()), (4, 2));
        for pattern in TessPattern::ALL {
            let mesh = tessellate(&patch, 4, pattern).unwrap();
            assert_eq!((mesh.vertices.len(), mesh.triangles.len()), (25, 32));
            mesh.validate().unwrap();
            let check = check_grid_edges(&mesh, 4);
            assert!(check.watertight(), "{pattern:?}: {check:?}");
            assert_eq!(check.boundary_edges, 16);
        }
        assert!(tessellate(&patch, 0, TessPattern::ZigZag).is_err());
    }

    #[test]
    fn patterns_differ() {
        let patch = planar_patch();
        let meshes: Vec<_> = TessPattern::ALL
            .iter()
            .map(|&p| tessellate(&patch, 3, p).unwrap().triangles)
            .collect();
        for i in 0..4 {
            for j in i + 1..4 {
                assert_ne!(meshes[i], meshes[j]);
            }
        }
    }

    #[test]
    fn planar_area_is_pattern_independent() {
        let patch = planar_patch();
        let reference = tessellate(&patch, 6, TessPattern::MainDiag).unwrap().area();
        for pattern in TessPattern::ALL {
            let area = tessellate(&patch, 6, pattern).unwrap().area();
            assert!((area - reference).abs() <= 1e-10 * reference);
        }
    }

    #[test]
    fn winding_faces_the_normal() {
        let patch = planar_patch();
        let mesh = tessellate(&patch, 3, TessPattern::Alternating).unwrap();
        for t in &mesh.triangles {
            let [a, b, c] = t.map(|i| mesh.vertices[i as usize]);
            assert!((b - a).cross(c - a).z > 0.0);
        }
    }

    #[test]
    fn main_diagonal_vertices_lie_on_cubic() {
        let mut rng = StdRng::seed_from_u64(83);
        let mut grid = || bs_solve([0; 4].map(|_| rng.gen_range(-5.0..5.0)), [0; 7].map(|_| rng.gen_range(-5.0..5.0)));
        let patch = BezierPatch::new(grid(), grid(), grid());
        let n = 8;
        let mesh = tessellate(&patch, n, TessPattern::MainDiag).unwrap();
        let polys = patch.grids().map(|g| collapse_diagonal(g, DiagonalKind::Main));
        for p in &polys {
            assert!(p.effective_degree(1e-9) <= 3);
        }
        for i in 0..=n {
            let v = mesh.vertices[i * (n + 1) + i];
            let t = i as f64 / n as f64;
            let on_curve = Point3::new(polys[0].eval(t), polys[1].eval(t), polys[2].eval(t));
            assert!(v.distance(on_curve) <= 1e-10 * patch.scale());
        }
    }

    #[test]
    fn normal_examples() {
        let plane = BezierPatch::new(
            ScalarGrid::bilinear(0.0, 0.0, 1.0, 1.0),
            ScalarGrid::bilinear(0.0, 1.0, 0.0, 1.0),
            ScalarGrid::ZERO,
        );
        for &(u, v) in &[(0.0, 0.0), (0.3, 0.8), (1.0, 0.5)] {
            let nrm = surface_normal(&plane, u, v).unwrap().unit().unwrap();
            assert!((nrm.z.abs() - 1.0).abs() < 1e-12 && nrm.x.abs() < 1e-12);
        }
        // z = u·v over the unit square.
        let saddle = BezierPatch::new(
            ScalarGrid::bilinear(0.0, 0.0, 1.0, 1.0),
            ScalarGrid::bilinear(0.0, 1.0, 0.0, 1.0),
            ScalarGrid::bilinear(0.0, 0.0, 0.0, 1.0),
        );
        let n0 = surface_normal(&saddle, 0.0, 0.0).unwrap().unit().unwrap();
        assert!(n0.distance(Point3::new(0.0, 0.0, 1.0)) < 1e-12);
        let (u, v) = (0.4, 0.7);
        let n = surface_normal(&saddle, u, v).unwrap().unit().unwrap();
        let want = Point3::new(-v, -u, 1.0);
        assert!(n.distance(want * (1.0 / want.norm())) < 1e-12);
    }

    #[test]
    fn degenerate_normal_is_explicit() {
        let collapsed = BezierPatch::new(
            ScalarGrid::from_fn(|i, _| i as f64),
            ScalarGrid::ZERO,
            ScalarGrid::ZERO,
        );
        assert_eq!(surface_normal(&collapsed, 0.5, 0.5).unwrap(), SurfaceNormal::Degenerate);
        let mesh = tessellate_with_normals(&collapsed, 2, TessPattern::MainDiag).unwrap();
        mesh.validate().unwrap();
    }

    #[test]
    fn normals_match_finite_differences() {
        let mut rng = StdRng::seed_from_u64(89);
        let h = 1e-5;
        for _ in 0..100 {
            let patch = random_patch(&mut rng);
            let (u, v) = (rng.gen_range(h..1.0 - h), rng.gen_range(h..1.0 - h));
            let at = |u, v| crate::patches::eval_patch_with(&patch, u, v, Domain::Strict).unwrap();
            let pu = (at(u + h, v) - at(u - h, v)) * (0.5 / h);
            let pv = (at(u, v + h) - at(u, v - h)) * (0.5 / h);
            let c = pu.cross(pv);
            let fd = c * (1.0 / c.norm());
            let analytic = surface_normal(&patch, u, v).unwrap().unit().unwrap();
            assert!(analytic.distance(fd) <= 1e-6, "{analytic:?} vs {fd:?}");
        }
    }

    #[test]
    fn continuity_self_is_zero() {
        let mut rng = StdRng::seed_from_u64(97);
        let patch = random_patch(&mut rng);
        for side in EdgeSide::ALL {
            let e = EdgeId::forward(side);
            let rep = continuity_report(&patch, e, &patch, e, 8, 1e-9).unwrap();
            assert_eq!((rep.c0_max_gap, rep.c1_max_mismatch), (0.0, 0.0));
            assert!(rep.g1_max_angle <= 1e-7);
            assert_eq!(rep.samples, 9);
        }
        assert!(continuity_report(&patch, EdgeId::forward(EdgeSide::U0), &patch, EdgeId::forward(EdgeSide::U0), 1, 1e-9).is_err());
    }

    #[test]
    fn continuity_of_split_bilinear_surface() {
        let (p00, p03, p30, p33) = (
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(0.0, 2.0, 1.0),
            Point3::new(3.0, 0.0, -1.0),
            Point3::new(3.0, 2.5, 2.0),
        );
        let lerp = |a: Point3, b: Point3, s: f64| a + (b - a) * s;
        let (m0, m3) = (lerp(p00, p30, 0.5), lerp(p03, p33, 0.5));
        let left = bilinear_patch(p00, p03, m0, m3);
        let right = bilinear_patch(m0, m3, p30, p33);
        let rep = continuity_report(
            &left,
            EdgeId::forward(EdgeSide::U1),
            &right,
            EdgeId::forward(EdgeSide::U0),
            16,
            1e-9,
        )
        .unwrap();
        assert!(rep.c0_max_gap <= 1e-12, "{rep:?}");
        assert!(rep.g1_max_angle <= 1e-9, "{rep:?}");
        assert!(rep.c1_max_mismatch <= 1e-12);
        assert!(rep.c0_continuous && rep.g1_continuous);
    }

    #[test]
    fn reversed_orientation_matches_flipped_edge() {
        let mut rng = StdRng::seed_from_u64(101);
        let a = random_patch(&mut rng);
        // b's V0 edge is a's V1 edge traversed backwards.
        let mut b = random_patch(&mut rng);
        for i in 0..4 {
            for (gb, ga) in b.grids_mut().into_iter().zip(a.grids()) {
                gb.set(i, 0, ga.get(3 - i, 3));
            }
        }
        let fwd = continuity_report(&a, EdgeId::forward(EdgeSide::V1), &b, EdgeId::forward(EdgeSide::V0), 10, 1e-9).unwrap();
        let rev = continuity_report(&a, EdgeId::forward(EdgeSide::V1), &b, EdgeId::new(EdgeSide::V0, true), 10, 1e-9).unwrap();
        assert!(fwd.c0_max_gap > 1e-3);
        assert!(rev.c0_max_gap <= 1e-12);
    }

    #[test]
    fn random_patches_sharing_corners_have_gaps() {
        let mut rng = StdRng::seed_from_u64(103);
        let a = random_patch(&mut rng);
        let mut b = random_patch(&mut rng);
        for (gb, ga) in b.grids_mut().into_iter().zip(a.grids()) {
            gb.set(0, 0, ga.get(3, 0));
            gb.set(0, 3, ga.get(3, 3));
        }
        let rep = continuity_report(&a, EdgeId::forward(EdgeSide::U1), &b, EdgeId::forward(EdgeSide::U0), 8, 1e-9).unwrap();
        assert!(rep.c0_max_gap > 0.0);
        assert!(!rep.c0_continuous);
    }

    #[test]
    fn append_offsets_indices() {
        let patch = planar_patch();
        let mut a = tessellate(&patch, 1, TessPattern::MainDiag).unwrap();
        let b = tessellate(&patch, 1, TessPattern::AntiDiag).unwrap();
        a.append(&b);
        assert_eq!(a.vertices.len(), 8);
        assert_eq!(a.triangles[2], [4, 6, 5]);
        a.validate().unwrap();
    }
}
