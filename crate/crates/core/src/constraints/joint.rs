//! Projection of a set of patches that share control points.
//!
//! A per-patch projection may move edge control points (one of the five
//! conditions involves boundary values only), so neighbours projected
//! independently can drift apart. Here every distinct control point is a
//! single unknown shared by all patches that reference it. Points that are a
//! corner of any patch stay fixed; the minimum-norm correction satisfying all
//! patches' conditions is found per coordinate.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use super::ConstraintSystem;
use crate::error::{Error, Result};
use crate::patches::{BezierPatch, Point3, CORNER_INDICES};

/// Control points plus, per patch, the 16 row-major point indices.
#[derive(Clone, Debug, PartialEq)]
pub struct SharedNet {
    pub points: Vec<Point3>,
    pub patches: Vec<[usize; 16]>,
}

fn point_key(p: Point3) -> [u64; 3] {
    // +0.0 folds −0.0 onto 0.0.
    [(p.x + 0.0).to_bits(), (p.y + 0.0).to_bits(), (p.z + 0.0).to_bits()]
}

impl SharedNet {
    /// Identifies control points that are bit-identical in all three
    /// coordinates.
    pub fn from_patches(patches: &[BezierPatch]) -> Self {
        let mut points = Vec::new();
        let mut index: HashMap<[u64; 3], usize> = HashMap::new();
        let patches = patches
            .iter()
            .map(|patch| {
                let mut ids = [0usize; 16];
                for (k, id) in ids.iter_mut().enumerate() {
                    let p = patch.control_point(k / 4, k % 4);
                    *id = *index.entry(point_key(p)).or_insert_with(|| {
                        points.push(p);
                        points.len() - 1
                    });
                }
                ids
            })
            .collect();
        SharedNet { points, patches }
    }

    pub fn patch(&self, k: usize) -> BezierPatch {
        let ids = &self.patches[k];
        let mut pts = [[Point3::ZERO; 4]; 4];
        for (s, &id) in ids.iter().enumerate() {
            pts[s / 4][s % 4] = self.points[id];
        }
        BezierPatch::from_points(pts)
    }

    pub fn to_patches(&self) -> Vec<BezierPatch> {
        (0..self.patches.len()).map(|k| self.patch(k)).collect()
    }

    fn fixed_points(&self) -> Vec<bool> {
        let mut fixed = vec![false; self.points.len()];
        for ids in &self.patches {
            for &c in &CORNER_INDICES {
                fixed[ids[c]] = true;
            }
        }
        fixed
    }
}

#[derive(Clone, Debug)]
pub struct JointProjection {
    pub net: SharedNet,
    /// Largest control-point displacement per patch, Euclidean.
    pub patch_displacement: Vec<f64>,
    /// Largest absolute condition residual after projection, over all patches
    /// and coordinates.
    pub max_condition_residual: f64,
}

/// Minimum-norm correction of the free points so every patch satisfies `Λξ = 0`.
pub fn project_shared_net(net: &SharedNet) -> Result<JointProjection> {
    let lambda = &ConstraintSystem::get().lambda;
    let fixed = net.fixed_points();
    let mut column = vec![usize::MAX; net.points.len()];
    let mut n_free = 0;
    for (id, f) in fixed.iter().enumerate() {
        if !f {
            column[id] = n_free;
            n_free += 1;
        }
    }

    let mut out = net.clone();
    let n_rows = 6 * net.patches.len();
    if n_free > 0 && n_rows > 0 {
        let mut a = DMatrix::<f64>::zeros(n_rows, n_free);
        for (p, ids) in net.patches.iter().enumerate() {
            for r in 0..6 {
                for (slot, &id) in ids.iter().enumerate() {
                    if !fixed[id] {
                        a[(6 * p + r, column[id])] += lambda[(r, slot)];
                    }
                }
            }
        }
        let svd = a.clone().svd(true, true);
        let cutoff = 1e-10 * svd.singular_values.max().max(1.0);
        for coord in 0..3 {
            let values: Vec<f64> = net.points.iter().map(|p| p.to_array()[coord]).collect();
            let mut residual = DVector::<f64>::zeros(n_rows);
            for (p, ids) in net.patches.iter().enumerate() {
                for r in 0..6 {
                    residual[6 * p + r] = ids
                        .iter()
                        .enumerate()
                        .map(|(slot, &id)| lambda[(r, slot)] * values[id])
                        .sum();
                }
            }
            let delta = svd
                .solve(&(-residual), cutoff)
                .map_err(|e| Error::Internal(format!("joint projection solve: {e}")))?;
            for (id, p) in out.points.iter_mut().enumerate() {
                if !fixed[id] {
                    let v = values[id] + delta[column[id]];
                    match coord {
                        0 => p.x = v,
                        1 => p.y = v,
                        _ => p.z = v,
                    }
                }
            }
        }
    }

    let mut max_condition_residual = 0.0f64;
    let patch_displacement = net
        .patches
        .iter()
        .enumerate()
        .map(|(k, ids)| {
            let patch = out.patch(k);
            for g in patch.grids() {
                let v = g.to_row_major();
                for r in 0..6 {
                    let s: f64 = (0..16).map(|slot| lambda[(r, slot)] * v[slot]).sum();
                    max_condition_residual = max_condition_residual.max(s.abs());
                }
            }
            ids.iter()
                .map(|&id| net.points[id].distance(out.points[id]))
                .fold(0.0f64, f64::max)
        })
        .collect();

    Ok(JointProjection {
        net: out,
        patch_displacement,
        max_condition_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::{bs_project, bs_residuals};
    use crate::patches::ScalarGrid;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_patch(rng: &mut StdRng) -> BezierPatch {
        let mut g = || ScalarGrid::from_fn(|_, _| rng.gen_range(-10.0..10.0));
        BezierPatch::new(g(), g(), g())
    }

    #[test]
    fn single_patch_matches_bs_project() {
        let mut rng = StdRng::seed_from_u64(71);
        for _ in 0..20 {
            let patch = random_patch(&mut rng);
            let joint = project_shared_net(&SharedNet::from_patches(&[patch])).unwrap();
            let direct = patch.map_grids(bs_project);
            assert!(joint.net.patch(0).max_abs_diff(&direct) < 1e-10);
        }
    }

    #[test]
    fn shared_edge_stays_shared() {
        let mut rng = StdRng::seed_from_u64(73);
        let a = random_patch(&mut rng);
        let mut b = random_patch(&mut rng);
        // b's row 0 is a's row 3.
        for j in 0..4 {
            for (gb, ga) in b.grids_mut().into_iter().zip(a.grids()) {
                gb.set(0, j, ga.get(3, j));
            }
        }
        let net = SharedNet::from_patches(&[a, b]);
        assert_eq!(net.points.len(), 28);
        let joint = project_shared_net(&net).unwrap();
        let (pa, pb) = (joint.net.patch(0), joint.net.patch(1));
        for j in 0..4 {
            assert_eq!(pa.control_point(3, j), pb.control_point(0, j));
        }
        for p in [&pa, &pb] {
            for g in p.grids() {
                assert!(bs_residuals(g, 1e-9).compliant);
            }
        }
        assert_eq!(pa.x.corners(), a.x.corners());
        assert_eq!(pb.z.corners(), b.z.corners());
    }

    #[test]
    fn compliant_net_is_unchanged() {
        let patch = BezierPatch::new(
            ScalarGrid::bilinear(0.0, 1.0, 2.0, 3.0),
            ScalarGrid::bilinear(1.0, 0.0, 1.0, 0.0),
            ScalarGrid::bilinear(-1.0, 2.0, 0.5, 1.5),
        );
        let joint = project_shared_net(&SharedNet::from_patches(&[patch])).unwrap();
        assert!(joint.net.patch(0).max_abs_diff(&patch) <= 1e-12);
        assert!(joint.patch_displacement[0] <= 1e-12);
    }

    #[test]
    fn empty_net() {
        let joint = project_shared_net(&SharedNet::from_patches(&[])).unwrap();
        assert!(joint.net.patches.is_empty());
        assert_eq!(joint.max_condition_residual, 0.0);
    }
}
