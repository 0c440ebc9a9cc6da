//! JSON patch sets, Newell-format ingestion and OBJ export.
//!
//! Patch JSON:
//!
//! ```json
//! { "name": "demo",
//!   "form": "bezier",
//!   "patches": [ { "x": [[0,0,0,0], ...], "y": [...], "z": [...] } ],
//!   "adjacency": [ { "a": 0, "edge_a": "U1", "reversed_a": false,
//!                    "b": 1, "edge_b": "U0", "reversed_b": false } ] }
//! ```
//!
//! `form` (`bezier` or `hermite`) and `adjacency` are optional. Grids are
//! indexed `[i][j]` with `i` along `u`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::patches::{hermite_to_bezier, BezierPatch, HermitePatch, Point3, ScalarGrid};
use crate::tessellation::{Adjacency, EdgeId, EdgeSide, TriangleMesh};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PatchForm {
    #[default]
    Bezier,
    Hermite,
}

impl FromStr for PatchForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bezier" => Ok(PatchForm::Bezier),
            "hermite" => Ok(PatchForm::Hermite),
            other => Err(Error::InvalidArgument(format!("unknown patch form {other:?}"))),
        }
    }
}

/// A validated set of Bezier patches with optional edge adjacency.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PatchSet {
    pub name: String,
    pub patches: Vec<BezierPatch>,
    pub adjacency: Vec<Adjacency>,
}

impl PatchSet {
    pub fn new(name: impl Into<String>, patches: Vec<BezierPatch>) -> Self {
        PatchSet {
            name: name.into(),
            patches,
            adjacency: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (k, p) in self.patches.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::schema(format!("patch {k}"), "non-finite control value"));
            }
        }
        validate_adjacency(&self.adjacency, self.patches.len())
    }
}

fn validate_adjacency(adjacency: &[Adjacency], n_patches: usize) -> Result<()> {
    for (k, adj) in adjacency.iter().enumerate() {
        let loc = || format!("adjacency {k}");
        if adj.a >= n_patches || adj.b >= n_patches {
            return Err(Error::schema(
                loc(),
                format!("patch index out of range ({} patches)", n_patches),
            ));
        }
        if adj.a == adj.b && adj.edge_a.side == adj.edge_b.side {
            return Err(Error::schema(loc(), "an edge cannot be adjacent to itself"));
        }
    }
    Ok(())
}

/// A parsed JSON document before any form conversion.
#[derive(Clone, Debug, PartialEq)]
pub struct PatchDocument {
    pub name: String,
    /// `None` when the document does not say.
    pub form: Option<PatchForm>,
    /// Coefficient grids `[x, y, z]` per patch, in the document's form.
    pub grids: Vec<[ScalarGrid; 3]>,
    pub adjacency: Vec<Adjacency>,
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

fn parse_grid(value: Option<&Value>, loc: &str, coord: &str) -> Result<ScalarGrid> {
    let value = value.ok_or_else(|| Error::schema(loc, format!("missing \"{coord}\" grid")))?;
    let bad_shape = || Error::schema(loc, format!("\"{coord}\" must be a 4x4 array of numbers"));
    let rows = value.as_array().ok_or_else(bad_shape)?;
    if rows.len() != 4 {
        return Err(Error::schema(loc, format!("\"{coord}\" has {} rows, expected 4", rows.len())));
    }
    let mut g = ScalarGrid::ZERO;
    for (i, row) in rows.iter().enumerate() {
        let row = row.as_array().ok_or_else(bad_shape)?;
        if row.len() != 4 {
            return Err(Error::schema(
                loc,
                format!("\"{coord}\" row {i} has {} values, expected 4", row.len()),
            ));
        }
        for (j, v) in row.iter().enumerate() {
            let v = v.as_f64().ok_or_else(bad_shape)?;
            if !v.is_finite() {
                return Err(Error::schema(loc, format!("\"{coord}\"[{i}][{j}] is not finite")));
            }
            g.set(i, j, v);
        }
    }
    Ok(g)
}

fn parse_edge(obj: &serde_json::Map<String, Value>, loc: &str, edge: &str, rev: &str) -> Result<EdgeId> {
    let side = obj
        .get(edge)
        .and_then(Value::as_str)
        .ok_or_else(|| Error::schema(loc, format!("missing string \"{edge}\"")))?;
    let side = EdgeSide::from_str(side).map_err(|_| {
        Error::schema(loc, format!("\"{edge}\" must be one of U0, U1, V0, V1"))
    })?;
    let reversed = match obj.get(rev) {
        None => false,
        Some(v) => v
            .as_bool()
            .ok_or_else(|| Error::schema(loc, format!("\"{rev}\" must be a boolean")))?,
    };
    Ok(EdgeId::new(side, reversed))
}

fn parse_index(obj: &serde_json::Map<String, Value>, loc: &str, key: &str) -> Result<usize> {
    obj.get(key)
        .and_then(Value::as_u64)
        .map(|v| v as usize)
        .ok_or_else(|| Error::schema(loc, format!("\"{key}\" must be a non-negative integer")))
}

/// Parses and validates a patch JSON document without converting forms.
pub fn load_document(text: &str) -> Result<PatchDocument> {
    let root: Value = serde_json::from_str(text).map_err(parse_error)?;
    let root = root
        .as_object()
        .ok_or_else(|| Error::schema("document", "top level must be an object"))?;
    let name = match root.get("name") {
        None => String::new(),
        Some(v) => v
            .as_str()
            .ok_or_else(|| Error::schema("document", "\"name\" must be a string"))?
            .to_owned(),
    };
    let form = match root.get("form") {
        None => None,
        Some(v) => Some(
            v.as_str()
                .and_then(|s| PatchForm::from_str(s).ok())
                .ok_or_else(|| Error::schema("document", "\"form\" must be \"bezier\" or \"hermite\""))?,
        ),
    };
    let patches = root
        .get("patches")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::schema("document", "missing \"patches\" array"))?;
    let grids = patches
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let loc = format!("patch {k}");
            let obj = p
                .as_object()
                .ok_or_else(|| Error::schema(&loc, "patch must be an object"))?;
            Ok([
                parse_grid(obj.get("x"), &loc, "x")?,
                parse_grid(obj.get("y"), &loc, "y")?,
                parse_grid(obj.get("z"), &loc, "z")?,
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    let adjacency = match root.get("adjacency") {
        None | Some(Value::Null) => Vec::new(),
        Some(v) => v
            .as_array()
            .ok_or_else(|| Error::schema("document", "\"adjacency\" must be an array"))?
            .iter()
            .enumerate()
            .map(|(k, a)| {
                let loc = format!("adjacency {k}");
                let obj = a
                    .as_object()
                    .ok_or_else(|| Error::schema(&loc, "record must be an object"))?;
                Ok(Adjacency {
                    a: parse_index(obj, &loc, "a")?,
                    edge_a: parse_edge(obj, &loc, "edge_a", "reversed_a")?,
                    b: parse_index(obj, &loc, "b")?,
                    edge_b: parse_edge(obj, &loc, "edge_b", "reversed_b")?,
                })
            })
            .collect::<Result<Vec<_>>>()?,
    };
    validate_adjacency(&adjacency, grids.len())?;
    Ok(PatchDocument {
        name,
        form,
        grids,
        adjacency,
    })
}

/// Loads a patch set; Hermite-form documents are converted to Bezier.
pub fn load_patchset(text: &str) -> Result<PatchSet> {
    let doc = load_document(text)?;
    let patches = doc
        .grids
        .into_iter()
        .map(|[x, y, z]| match doc.form.unwrap_or_default() {
            PatchForm::Bezier => BezierPatch::new(x, y, z),
            PatchForm::Hermite => hermite_to_bezier(&HermitePatch::new(x, y, z)),
        })
        .collect();
    Ok(PatchSet {
        name: doc.name,
        patches,
        adjacency: doc.adjacency,
    })
}

#[derive(Serialize)]
struct RawPatch<'a> {
    x: &'a ScalarGrid,
    y: &'a ScalarGrid,
    z: &'a ScalarGrid,
}

#[derive(Serialize)]
struct RawAdjacency {
    a: usize,
    edge_a: String,
    reversed_a: bool,
    b: usize,
    edge_b: String,
    reversed_b: bool,
}

#[derive(Serialize)]
struct RawDocument<'a> {
    name: &'a str,
    form: PatchForm,
    patches: Vec<RawPatch<'a>>,
    adjacency: Vec<RawAdjacency>,
}

fn save_grids(name: &str, form: PatchForm, grids: Vec<[&ScalarGrid; 3]>, adjacency: &[Adjacency]) -> String {
    let doc = RawDocument {
        name,
        form,
        patches: grids
            .into_iter()
            .map(|[x, y, z]| RawPatch { x, y, z })
            .collect(),
        adjacency: adjacency
            .iter()
            .map(|a| RawAdjacency {
                a: a.a,
                edge_a: a.edge_a.side.to_string(),
                reversed_a: a.edge_a.reversed,
                b: a.b,
                edge_b: a.edge_b.side.to_string(),
                reversed_b: a.edge_b.reversed,
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("patch documents always serialize");
    text.push('\n');
    text
}

/// Deterministic JSON with shortest round-trip number formatting.
pub fn save_patchset(set: &PatchSet) -> String {
    save_grids(
        &set.name,
        PatchForm::Bezier,
        set.patches.iter().map(|p| p.grids()).collect(),
        &set.adjacency,
    )
}

/// Same schema, tagged `"form": "hermite"`.
pub fn save_hermite_set(name: &str, patches: &[HermitePatch], adjacency: &[Adjacency]) -> String {
    save_grids(
        name,
        PatchForm::Hermite,
        patches.iter().map(|p| p.grids()).collect(),
        adjacency,
    )
}

/// Vertex table plus one-based-resolved (now zero-based) patch indices.
#[derive(Clone, Debug, PartialEq)]
pub struct NewellModel {
    pub vertices: Vec<Point3>,
    pub patches: Vec<[usize; 16]>,
}

impl NewellModel {
    pub fn to_patches(&self) -> Vec<BezierPatch> {
        self.patches
            .iter()
            .map(|ids| {
                let mut pts = [[Point3::ZERO; 4]; 4];
                for (k, &id) in ids.iter().enumerate() {
                    pts[k / 4][k % 4] = self.vertices[id];
                }
                BezierPatch::from_points(pts)
            })
            .collect()
    }
}

fn newell_fields(line: &str) -> impl Iterator<Item = &str> {
    line.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
}

/// Parses the Newell text format: a patch count, one line of 16 one-based
/// vertex indices per patch, a vertex count, one `x, y, z` line per vertex.
/// Blank lines are ignored; commas and whitespace both separate fields.
pub fn parse_newell(text: &str) -> Result<NewellModel> {
    // Line numbers are one-based and count blank lines.
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l))
        .collect();
    let mut pos = 0;
    let mut next = |what: &str| -> Result<(usize, &str)> {
        let item = lines.get(pos).copied().ok_or_else(|| {
            let last = lines.last().map_or(0, |(n, _)| *n);
            Error::newell(last + 1, format!("unexpected end of file, expected {what}"))
        })?;
        pos += 1;
        Ok(item)
    };

    let parse_count = |(no, line): (usize, &str), what: &str| -> Result<usize> {
        let fields: Vec<&str> = newell_fields(line).collect();
        match fields.as_slice() {
            [one] => one
                .parse::<usize>()
                .map_err(|_| Error::newell(no, format!("{what} count {one:?} is not a non-negative integer"))),
            _ => Err(Error::newell(no, format!("expected a single {what} count"))),
        }
    };

    let n_patches = parse_count(next("patch count")?, "patch")?;
    let mut raw_patches = Vec::with_capacity(n_patches);
    for k in 0..n_patches {
        let (no, line) = next(&format!("patch line {}", k + 1))?;
        let fields: Vec<&str> = newell_fields(line).collect();
        if fields.len() != 16 {
            return Err(Error::newell(no, format!("expected 16 vertex indices, found {}", fields.len())));
        }
        let mut ids = [0usize; 16];
        for (slot, f) in fields.iter().enumerate() {
            let v: usize = f
                .parse()
                .map_err(|_| Error::newell(no, format!("vertex index {f:?} is not a positive integer")))?;
            if v == 0 {
                return Err(Error::newell(no, "vertex index 0 (indices are one-based)"));
            }
            ids[slot] = v;
        }
        raw_patches.push((no, ids));
    }

    let n_vertices = parse_count(next("vertex count")?, "vertex")?;
    let mut vertices = Vec::with_capacity(n_vertices);
    for k in 0..n_vertices {
        let (no, line) = next(&format!("vertex line {}", k + 1))?;
        let fields: Vec<&str> = newell_fields(line).collect();
        if fields.len() != 3 {
            return Err(Error::newell(no, format!("expected 3 coordinates, found {}", fields.len())));
        }
        let mut c = [0.0; 3];
        for (d, f) in fields.iter().enumerate() {
            let v: f64 = f
                .parse()
                .map_err(|_| Error::newell(no, format!("coordinate {f:?} is not a number")))?;
            if !v.is_finite() {
                return Err(Error::newell(no, format!("coordinate {f:?} is not finite")));
            }
            c[d] = v;
        }
        vertices.push(Point3::new(c[0], c[1], c[2]));
    }
    if let Ok((no, _)) = next("end of file") {
        return Err(Error::newell(
            no,
            format!("unexpected content after {n_vertices} vertices (count mismatch?)"),
        ));
    }

    let patches = raw_patches
        .into_iter()
        .map(|(no, ids)| {
            let mut out = [0usize; 16];
            for (o, &id) in out.iter_mut().zip(&ids) {
                if id > n_vertices {
                    return Err(Error::newell(
                        no,
                        format!("vertex index {id} out of range (1..={n_vertices})"),
                    ));
                }
                *o = id - 1;
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NewellModel { vertices, patches })
}

/// [`parse_newell`] resolved to a patch set with canonical adjacency.
pub fn load_newell(text: &str) -> Result<PatchSet> {
    let model = parse_newell(text)?;
    let patches = model.to_patches();
    let adjacency = canonical_adjacency(&patches);
    Ok(PatchSet {
        name: "newell".into(),
        patches,
        adjacency,
    })
}

/// Guesses JSON (leading `{`) versus Newell text.
pub fn load_any(text: &str) -> Result<PatchSet> {
    if text.trim_start().starts_with('{') {
        load_patchset(text)
    } else {
        load_newell(text)
    }
}

fn point_key(p: Point3) -> [u64; 3] {
    [(p.x + 0.0).to_bits(), (p.y + 0.0).to_bits(), (p.z + 0.0).to_bits()]
}

/// Pairs of patch edges whose four control points coincide exactly, in the
/// same or opposite order. Collapsed edges (all four points equal) are skipped.
pub fn canonical_adjacency(patches: &[BezierPatch]) -> Vec<Adjacency> {
    let mut seen: HashMap<[[u64; 3]; 4], Vec<(usize, EdgeSide)>> = HashMap::new();
    let mut out = Vec::new();
    for (k, patch) in patches.iter().enumerate() {
        for side in EdgeSide::ALL {
            let key = side
                .control_slots()
                .map(|s| point_key(patch.control_point(s / 4, s % 4)));
            if key.iter().all(|p| *p == key[0]) {
                continue;
            }
            let mut rev = key;
            rev.reverse();
            for (matches, reversed) in [(seen.get(&key), false), (seen.get(&rev), true)] {
                for &(a, side_a) in matches.into_iter().flatten() {
                    if key == rev && reversed {
                        continue;
                    }
                    out.push(Adjacency {
                        a,
                        edge_a: EdgeId::forward(side_a),
                        b: k,
                        edge_b: EdgeId::new(side, reversed),
                    });
                }
            }
            seen.entry(key).or_default().push((k, side));
        }
    }
    out
}

/// ASCII OBJ with one-based indices; empty mesh gives an empty document.
pub fn export_obj(mesh: &TriangleMesh) -> String {
    let mut out = String::new();
    for v in &mesh.vertices {
        let _ = writeln!(out, "v {} {} {}", v.x, v.y, v.z);
    }
    if let Some(normals) = &mesh.normals {
        for n in normals {
            let _ = writeln!(out, "vn {} {} {}", n.x, n.y, n.z);
        }
    }
    let with_normals = mesh.normals.is_some();
    for t in &mesh.triangles {
        let [a, b, c] = t.map(|i| i + 1);
        if with_normals {
            let _ = writeln!(out, "f {a}//{a} {b}//{b} {c}//{c}");
        } else {
            let _ = writeln!(out, "f {a} {b} {c}");
        }
    }
    out
}
