use std::path::Path;

use proptest::prelude::*;
use smartpatch::io::{export_obj, load_newell, load_patchset, parse_newell, save_patchset, PatchSet};
use smartpatch::patches::{BezierPatch, ScalarGrid};
use smartpatch::tessellation::{continuity_report, tessellate, TessPattern};

fn teapot_text() -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/teapot.txt")).unwrap()
}

#[test]
fn teapot_ingests() {
    let model = parse_newell(&teapot_text()).unwrap();
    assert_eq!(model.patches.len(), 32);
    assert_eq!(model.vertices.len(), 290);
    let set = load_newell(&teapot_text()).unwrap();
    assert_eq!(set.patches.len(), 32);
    // Grid (i, j) is vertex 4i + j of the patch line.
    let p = &set.patches[5];
    let ids = model.patches[5];
    assert_eq!(p.control_point(2, 1), model.vertices[ids[9]]);
}

#[test]
fn teapot_canonical_adjacency_is_c0() {
    let set = load_newell(&teapot_text()).unwrap();
    assert_eq!(set.adjacency.len(), 52);
    let scale = set.patches.iter().map(BezierPatch::scale).fold(1.0, f64::max);
    for adj in &set.adjacency {
        let rep =
            continuity_report(&set.patches[adj.a], adj.edge_a, &set.patches[adj.b], adj.edge_b, 16, 1e-9).unwrap();
        assert!(rep.c0_max_gap <= 1e-9 * scale, "{adj:?}: {rep:?}");
    }
}

#[test]
fn teapot_json_roundtrip_is_stable() {
    let set = load_newell(&teapot_text()).unwrap();
    let text = save_patchset(&set);
    let back = load_patchset(&text).unwrap();
    assert_eq!(back, set);
    assert_eq!(save_patchset(&back), text);
}

#[test]
fn obj_is_deterministic() {
    let set = load_newell(&teapot_text()).unwrap();
    let mesh = tessellate(&set.patches[0], 5, TessPattern::Alternating).unwrap();
    let a = export_obj(&mesh);
    let b = export_obj(&tessellate(&set.patches[0], 5, TessPattern::Alternating).unwrap());
    assert_eq!(a, b);
    assert!(a.starts_with("v "));
    assert_eq!(a.lines().last().unwrap().split(' ').count(), 4);
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |v| v.is_finite()),
        -1e3..1e3f64,
        Just(-0.0),
    ]
}

fn grid() -> impl Strategy<Value = ScalarGrid> {
    prop::array::uniform4(prop::array::uniform4(finite())).prop_map(ScalarGrid)
}

proptest! {
    #[test]
    fn save_load_is_bit_exact(grids in prop::collection::vec((grid(), grid(), grid()), 0..4), name in "[a-z ]{0,12}") {
        let set = PatchSet::new(name, grids.into_iter().map(|(x, y, z)| BezierPatch::new(x, y, z)).collect());
        let text = save_patchset(&set);
        let back = load_patchset(&text).unwrap();
        prop_assert_eq!(back.patches.len(), set.patches.len());
        for (a, b) in set.patches.iter().zip(&back.patches) {
            for (ga, gb) in a.grids().into_iter().zip(b.grids()) {
                prop_assert_eq!(ga.to_row_major().map(f64::to_bits), gb.to_row_major().map(f64::to_bits));
            }
        }
        prop_assert_eq!(save_patchset(&back), text);
    }

    #[test]
    fn newell_rejects_out_of_range_indices(bad in 17usize..1000) {
        let mut text = String::from("1\n");
        let mut ids: Vec<String> = (1..=16).map(|i| i.to_string()).collect();
        ids[7] = bad.to_string();
        text.push_str(&ids.join(","));
        text.push_str("\n16\n");
        for k in 0..16 {
            text.push_str(&format!("{k},0,0\n"));
        }
        let err = load_newell(&text).unwrap_err().to_string();
        prop_assert!(err.contains("line 2"), "{}", err);
    }
}
