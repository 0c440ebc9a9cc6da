//! The `smartpatch` command line.
//!
//! Exit codes: 0 success, 1 validation failure, 2 input error, 3 internal
//! assertion failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::Serialize;

use crate::constraints::{bs_project, bs_residuals, build_lambda, project_shared_net, SharedNet, DEFAULT_TOLERANCE};
use crate::error::{Error, Result};
use crate::io::{
    export_obj, load_any, load_document, save_hermite_set, save_patchset, PatchForm, PatchSet,
};
use crate::patches::{bezier_to_hermite, hermite_to_bezier, BezierPatch, HermitePatch, CORNER_INDICES};
use crate::tessellation::{
    check_grid_edges, continuity_report, tessellate, tessellate_with_normals, Adjacency, ContinuityReport,
    TessPattern, TriangleMesh,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Derive and certify the constraint matrix.
    Lambda,
    /// Check every patch against the diagonal-degree conditions.
    Validate,
    /// Project a patch set onto the constrained subspace.
    Repair,
    /// Convert between Bezier and Hermite coefficient form.
    Convert,
    /// Triangulate patches and write OBJ.
    Tessellate,
    /// Measure C0/C1/G1 continuity across adjacent edges.
    Continuity,
    /// Ingest, validate, repair, re-validate and tessellate a Newell teapot.
    Teapot,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Direction {
    /// Bezier to Hermite.
    B2h,
    /// Hermite to Bezier.
    H2b,
}

fn positive_f64(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err("must be a positive finite number".into())
    }
}

fn positive_usize(s: &str) -> std::result::Result<usize, String> {
    let v: usize = s.parse().map_err(|e| format!("{e}"))?;
    if v >= 1 {
        Ok(v)
    } else {
        Err("must be at least 1".into())
    }
}

fn pattern_arg(s: &str) -> std::result::Result<TessPattern, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Clone, Debug, Parser)]
#[command(name = "smartpatch", version, about = "Bicubic patches with cubic diagonals")]
pub struct CliConfig {
    #[arg(value_enum)]
    pub command: Command,
    /// Input patch JSON or Newell file.
    #[arg(long = "in", value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// Output file (or directory for per-patch OBJ and the teapot pipeline).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE, value_parser = positive_f64)]
    pub tol: f64,
    /// Samples per patch side.
    #[arg(long, default_value_t = 16, value_parser = positive_usize)]
    pub n: usize,
    /// main, anti, alt or zigzag.
    #[arg(long, default_value = "main", value_parser = pattern_arg)]
    pub pattern: TessPattern,
    #[arg(long, value_enum, default_value = "b2h")]
    pub direction: Direction,
    /// Convert there and back and report the error.
    #[arg(long)]
    pub roundtrip: bool,
    /// Emit the report as JSON.
    #[arg(long)]
    pub json: bool,
    /// Include vertex normals in OBJ output.
    #[arg(long)]
    pub normals: bool,
    /// Write one concatenated OBJ instead of one file per patch.
    #[arg(long)]
    pub merge: bool,
}

/// Captured result of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Failure {
    stage: Option<&'static str>,
    error: Error,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        Failure { stage: None, error }
    }
}

trait Stage<T> {
    fn stage(self, name: &'static str) -> std::result::Result<T, Failure>;
}

impl<T> Stage<T> for Result<T> {
    fn stage(self, name: &'static str) -> std::result::Result<T, Failure> {
        self.map_err(|error| Failure {
            stage: Some(name),
            error,
        })
    }
}

struct Report {
    code: i32,
    text: String,
    json: serde_json::Value,
}

impl Report {
    fn new(code: i32, text: String, body: &impl Serialize) -> Self {
        Report {
            code,
            text,
            json: serde_json::to_value(body).expect("reports always serialize"),
        }
    }
}

type CmdResult = std::result::Result<Report, Failure>;

pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::Internal(_) => EXIT_INTERNAL,
        _ => EXIT_INPUT,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match CliConfig::try_parse_from(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    run_config(&cfg)
}

pub fn run_config(cfg: &CliConfig) -> Outcome {
    let result = match cfg.command {
        Command::Lambda => cmd_lambda(),
        Command::Validate => cmd_validate(cfg),
        Command::Repair => cmd_repair(cfg),
        Command::Convert => cmd_convert(cfg),
        Command::Tessellate => cmd_tessellate(cfg),
        Command::Continuity => cmd_continuity(cfg),
        Command::Teapot => cmd_teapot(cfg),
    };
    match result {
        Ok(report) => {
            let mut stdout = if cfg.json {
                serde_json::to_string_pretty(&report.json).expect("reports always serialize")
            } else {
                report.text
            };
            if !stdout.is_empty() && !stdout.ends_with('\n') {
                stdout.push('\n');
            }
            Outcome {
                code: report.code,
                stdout,
                stderr: String::new(),
            }
        }
        Err(Failure { stage, error }) => {
            let stderr = match stage {
                Some(s) => format!("error in stage {s}: {error}\n"),
                None => format!("error: {error}\n"),
            };
            Outcome {
                code: exit_code(&error),
                stdout: String::new(),
                stderr,
            }
        }
    }
}

fn require<'a>(path: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    path.as_deref()
        .ok_or_else(|| Error::InvalidArgument(format!("{flag} is required for this command")))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, text).map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", path.display())))
}

fn read_patchset(cfg: &CliConfig) -> Result<PatchSet> {
    load_any(&read_text(require(&cfg.input, "--in")?)?)
}

#[derive(Serialize)]
struct IdentityReport {
    text: String,
    x22_sign: i8,
    plus_in_row_space: bool,
    minus_in_row_space: bool,
}

#[derive(Serialize)]
struct MismatchReport {
    row: usize,
    col: usize,
    derived: String,
    reference: i64,
}

#[derive(Serialize)]
struct LambdaReport {
    command: Command,
    lambda: Vec<Vec<String>>,
    rank: usize,
    pivot_cols: Vec<usize>,
    free_cols: Vec<usize>,
    matches_reference: bool,
    mismatches: Vec<MismatchReport>,
    inner_identity: IdentityReport,
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}

fn cmd_lambda() -> CmdResult {
    let sys = build_lambda()?;
    let lambda: Vec<Vec<String>> = (0..sys.lambda_exact.rows())
        .map(|i| (0..16).map(|j| sys.lambda_exact[(i, j)].to_string()).collect())
        .collect();
    let mismatches: Vec<MismatchReport> = sys
        .reference_mismatches()
        .into_iter()
        .map(|m| MismatchReport {
            row: m.row,
            col: m.col,
            derived: m.derived,
            reference: m.reference,
        })
        .collect();
    let ok = sys.rank == 5 && mismatches.is_empty();

    let mut text = String::from("Lambda (6 x 16, rows: main a6 a5 a4, anti a6 a5 a4):\n");
    for row in &lambda {
        let _ = writeln!(text, "{}", row.join(" "));
    }
    let _ = writeln!(text, "rank = {}", sys.rank);
    let _ = writeln!(text, "pivot columns: {}", join(&sys.pivot_cols));
    let _ = writeln!(text, "free columns: {}", join(&sys.free_cols));
    let _ = writeln!(text, "inner identity: {}", sys.inner_identity);
    let _ = writeln!(
        text,
        "  +x22 in row space: {}, -x22 in row space: {}",
        sys.inner_identity.plus_in_row_space, sys.inner_identity.minus_in_row_space
    );
    if mismatches.is_empty() {
        text.push_str("reference table: all 96 entries match\n");
    } else {
        let _ = writeln!(text, "reference table: {} mismatching entries", mismatches.len());
        for m in &mismatches {
            let _ = writeln!(text, "  [{}][{}] derived {} reference {}", m.row, m.col, m.derived, m.reference);
        }
    }

    let report = LambdaReport {
        command: Command::Lambda,
        lambda,
        rank: sys.rank,
        pivot_cols: sys.pivot_cols.clone(),
        free_cols: sys.free_cols.clone(),
        matches_reference: mismatches.is_empty(),
        mismatches,
        inner_identity: IdentityReport {
            text: sys.inner_identity.to_string(),
            x22_sign: sys.inner_identity.x22_sign,
            plus_in_row_space: sys.inner_identity.plus_in_row_space,
            minus_in_row_space: sys.inner_identity.minus_in_row_space,
        },
    };
    Ok(Report::new(if ok { EXIT_OK } else { EXIT_INTERNAL }, text, &report))
}

#[derive(Clone, Serialize)]
struct CoordResidual {
    /// Raw `[a₆, a₅, a₄]` of the main diagonal.
    main: [f64; 3],
    /// Raw `[a₆, a₅, a₄]` of the anti diagonal.
    anti: [f64; 3],
    /// Largest `|aₖ| / scale`.
    max_residual: f64,
    compliant: bool,
}

#[derive(Clone, Serialize)]
struct PatchValidation {
    index: usize,
    compliant: bool,
    max_residual: f64,
    x: CoordResidual,
    y: CoordResidual,
    z: CoordResidual,
}

#[derive(Clone, Serialize)]
struct ValidationSummary {
    patches: usize,
    compliant: usize,
    non_compliant: usize,
    max_residual: f64,
    tolerance: f64,
}

fn validate_patches(patches: &[BezierPatch], tol: f64) -> (Vec<PatchValidation>, ValidationSummary) {
    let per_patch: Vec<PatchValidation> = patches
        .iter()
        .enumerate()
        .map(|(index, p)| {
            let [x, y, z] = p.grids().map(|g| {
                let r = bs_residuals(g, tol);
                CoordResidual {
                    main: r.per_diagonal[0].leading,
                    anti: r.per_diagonal[1].leading,
                    max_residual: r.max_residual,
                    compliant: r.compliant,
                }
            });
            PatchValidation {
                index,
                compliant: x.compliant && y.compliant && z.compliant,
                max_residual: x.max_residual.max(y.max_residual).max(z.max_residual),
                x,
                y,
                z,
            }
        })
        .collect();
    let compliant = per_patch.iter().filter(|p| p.compliant).count();
    let summary = ValidationSummary {
        patches: per_patch.len(),
        compliant,
        non_compliant: per_patch.len() - compliant,
        max_residual: per_patch.iter().map(|p| p.max_residual).fold(0.0, f64::max),
        tolerance: tol,
    };
    (per_patch, summary)
}

#[derive(Serialize)]
struct ValidateReport {
    command: Command,
    patches: Vec<PatchValidation>,
    summary: ValidationSummary,
}

fn cmd_validate(cfg: &CliConfig) -> CmdResult {
    let set = read_patchset(cfg)?;
    let (patches, summary) = validate_patches(&set.patches, cfg.tol);
    let mut text = String::new();
    for p in &patches {
        let _ = writeln!(
            text,
            "patch {}: {} (max residual {:.3e}; x {:.3e}, y {:.3e}, z {:.3e})",
            p.index,
            if p.compliant { "compliant" } else { "NON-COMPLIANT" },
            p.max_residual,
            p.x.max_residual,
            p.y.max_residual,
            p.z.max_residual
        );
    }
    let _ = writeln!(
        text,
        "{} patches: {} compliant, {} non-compliant at tolerance {:e}",
        summary.patches, summary.compliant, summary.non_compliant, summary.tolerance
    );
    let code = if summary.non_compliant == 0 { EXIT_OK } else { EXIT_VALIDATION };
    Ok(Report::new(
        code,
        text,
        &ValidateReport {
            command: Command::Validate,
            patches,
            summary,
        },
    ))
}

#[derive(Clone, Serialize)]
struct SeamSummary {
    adjacencies: usize,
    c0_max_gap: f64,
    c1_max_mismatch: f64,
    g1_max_angle: f64,
}

fn seam_reports(patches: &[BezierPatch], adjacency: &[Adjacency], n: usize, tol: f64) -> Result<Vec<ContinuityReport>> {
    adjacency
        .iter()
        .map(|a| continuity_report(&patches[a.a], a.edge_a, &patches[a.b], a.edge_b, n.max(2), tol))
        .collect()
}

fn seam_summary(reports: &[ContinuityReport]) -> SeamSummary {
    SeamSummary {
        adjacencies: reports.len(),
        c0_max_gap: reports.iter().map(|r| r.c0_max_gap).fold(0.0, f64::max),
        c1_max_mismatch: reports.iter().map(|r| r.c1_max_mismatch).fold(0.0, f64::max),
        g1_max_angle: reports.iter().map(|r| r.g1_max_angle).fold(0.0, f64::max),
    }
}

#[derive(Clone, Serialize)]
struct RepairOutcome {
    /// Largest control-point displacement per patch.
    patch_displacement: Vec<f64>,
    max_displacement: f64,
    /// Largest corner control-point displacement; always exactly zero.
    corner_displacement: f64,
    before: ValidationSummary,
    after: ValidationSummary,
    seams_before: SeamSummary,
    seams_after: SeamSummary,
    /// Largest per-adjacency increase of the C0 gap.
    c0_max_increase: f64,
}

/// Joint projection over shared control points.
fn repair_set(set: &PatchSet, n: usize, tol: f64) -> Result<(PatchSet, RepairOutcome)> {
    let joint = project_shared_net(&SharedNet::from_patches(&set.patches))?;
    let patches = joint.net.to_patches();
    let corner_displacement = set
        .patches
        .iter()
        .zip(&patches)
        .flat_map(|(a, b)| {
            CORNER_INDICES.map(|s| a.control_point(s / 4, s % 4).distance(b.control_point(s / 4, s % 4)))
        })
        .fold(0.0, f64::max);
    let (_, before) = validate_patches(&set.patches, tol);
    let (_, after) = validate_patches(&patches, tol);
    let seams_before = seam_reports(&set.patches, &set.adjacency, n, tol)?;
    let seams_after = seam_reports(&patches, &set.adjacency, n, tol)?;
    let c0_max_increase = seams_before
        .iter()
        .zip(&seams_after)
        .map(|(b, a)| a.c0_max_gap - b.c0_max_gap)
        .fold(0.0, f64::max);
    let outcome = RepairOutcome {
        max_displacement: joint.patch_displacement.iter().copied().fold(0.0, f64::max),
        patch_displacement: joint.patch_displacement,
        corner_displacement,
        before,
        after,
        seams_before: seam_summary(&seams_before),
        seams_after: seam_summary(&seams_after),
        c0_max_increase,
    };
    let repaired = PatchSet {
        name: set.name.clone(),
        patches,
        adjacency: set.adjacency.clone(),
    };
    Ok((repaired, outcome))
}

fn repair_text(o: &RepairOutcome) -> String {
    let mut text = String::new();
    for (k, d) in o.patch_displacement.iter().enumerate() {
        let _ = writeln!(text, "patch {k}: max control-point displacement {d:.6e}");
    }
    let _ = writeln!(
        text,
        "residual before {:.3e} ({} non-compliant), after {:.3e} ({} non-compliant)",
        o.before.max_residual, o.before.non_compliant, o.after.max_residual, o.after.non_compliant
    );
    let _ = writeln!(text, "corner displacement {:e}", o.corner_displacement);
    let _ = writeln!(
        text,
        "shared edges: {}, C0 gap before {:.3e}, after {:.3e}, max increase {:.3e}",
        o.seams_before.adjacencies, o.seams_before.c0_max_gap, o.seams_after.c0_max_gap, o.c0_max_increase
    );
    text
}

#[derive(Serialize)]
struct RepairReport {
    command: Command,
    output: String,
    #[serde(flatten)]
    outcome: RepairOutcome,
}

fn cmd_repair(cfg: &CliConfig) -> CmdResult {
    let out = require(&cfg.out, "--out")?;
    let set = read_patchset(cfg)?;
    let (repaired, outcome) = repair_set(&set, cfg.n, cfg.tol)?;
    write_text(out, &save_patchset(&repaired))?;
    let code = if outcome.after.non_compliant == 0 { EXIT_OK } else { EXIT_VALIDATION };
    let mut text = repair_text(&outcome);
    let _ = writeln!(text, "wrote {}", out.display());
    Ok(Report::new(
        code,
        text,
        &RepairReport {
            command: Command::Repair,
            output: out.display().to_string(),
            outcome,
        },
    ))
}

#[derive(Serialize)]
struct ConvertReport {
    command: Command,
    direction: &'static str,
    patches: usize,
    output: Option<String>,
    /// Largest absolute error of converting there and back.
    roundtrip_max_error: Option<f64>,
    /// Same, relative to the largest coefficient magnitude (at least 1).
    roundtrip_relative_error: Option<f64>,
}

const ROUNDTRIP_TOLERANCE: f64 = 1e-12;

fn cmd_convert(cfg: &CliConfig) -> CmdResult {
    let path = require(&cfg.input, "--in")?;
    let text = read_text(path)?;
    let (name, form, grids, adjacency) = if text.trim_start().starts_with('{') {
        let doc = load_document(&text)?;
        (doc.name, doc.form, doc.grids, doc.adjacency)
    } else {
        let set = load_any(&text)?;
        let grids = set.patches.iter().map(|p| [p.x, p.y, p.z]).collect();
        (set.name, Some(PatchForm::Bezier), grids, set.adjacency)
    };
    let expected = match cfg.direction {
        Direction::B2h => PatchForm::Bezier,
        Direction::H2b => PatchForm::Hermite,
    };
    if form.is_some_and(|f| f != expected) {
        return Err(Error::InvalidArgument(format!(
            "input is tagged {:?} but --direction expects {:?}",
            form.unwrap_or_default(),
            expected
        ))
        .into());
    }

    let (document, roundtrip) = match cfg.direction {
        Direction::B2h => {
            let src: Vec<BezierPatch> = grids.into_iter().map(|[x, y, z]| BezierPatch::new(x, y, z)).collect();
            let dst: Vec<HermitePatch> = src.iter().map(bezier_to_hermite).collect();
            let rt = src
                .iter()
                .zip(&dst)
                .map(|(s, d)| (hermite_to_bezier(d).max_abs_diff(s), s.scale()))
                .collect::<Vec<_>>();
            (save_hermite_set(&name, &dst, &adjacency), rt)
        }
        Direction::H2b => {
            let src: Vec<HermitePatch> = grids.into_iter().map(|[x, y, z]| HermitePatch::new(x, y, z)).collect();
            let dst: Vec<BezierPatch> = src.iter().map(hermite_to_bezier).collect();
            let rt = src
                .iter()
                .zip(&dst)
                .map(|(s, d)| {
                    let scale = s.grids().iter().map(|g| g.scale()).fold(1.0, f64::max);
                    (bezier_to_hermite(d).max_abs_diff(s), scale)
                })
                .collect::<Vec<_>>();
            let set = PatchSet {
                name: name.clone(),
                patches: dst,
                adjacency: adjacency.clone(),
            };
            (save_patchset(&set), rt)
        }
    };

    let direction = match cfg.direction {
        Direction::B2h => "b2h",
        Direction::H2b => "h2b",
    };
    let mut report = ConvertReport {
        command: Command::Convert,
        direction,
        patches: roundtrip.len(),
        output: None,
        roundtrip_max_error: None,
        roundtrip_relative_error: None,
    };
    let mut code = EXIT_OK;
    let mut text = String::new();
    match &cfg.out {
        Some(out) => {
            write_text(out, &document)?;
            report.output = Some(out.display().to_string());
            let _ = writeln!(text, "converted {} patches ({direction}), wrote {}", report.patches, out.display());
        }
        None if !cfg.roundtrip && !cfg.json => text.push_str(&document),
        None => {}
    }
    if cfg.roundtrip {
        let abs = roundtrip.iter().map(|r| r.0).fold(0.0, f64::max);
        let rel = roundtrip.iter().map(|r| r.0 / r.1).fold(0.0, f64::max);
        report.roundtrip_max_error = Some(abs);
        report.roundtrip_relative_error = Some(rel);
        if rel > ROUNDTRIP_TOLERANCE {
            code = EXIT_VALIDATION;
        }
        let _ = writeln!(
            text,
            "roundtrip over {} patches: max error {abs:.3e} (relative {rel:.3e})",
            report.patches
        );
    }
    Ok(Report::new(code, text, &report))
}

fn mesh_for(patch: &BezierPatch, cfg: &CliConfig) -> Result<TriangleMesh> {
    if cfg.normals {
        tessellate_with_normals(patch, cfg.n, cfg.pattern)
    } else {
        tessellate(patch, cfg.n, cfg.pattern)
    }
}

#[derive(Clone, Serialize)]
struct TessellationSummary {
    n: usize,
    pattern: TessPattern,
    patches: usize,
    vertices: usize,
    triangles: usize,
    vertices_per_patch: usize,
    triangles_per_patch: usize,
    watertight: bool,
    files: Vec<String>,
}

fn tessellate_set(patches: &[BezierPatch], cfg: &CliConfig, out: &Path, merge: bool) -> Result<TessellationSummary> {
    let mut merged = TriangleMesh::default();
    let mut files = Vec::new();
    let mut watertight = true;
    let (mut vertices, mut triangles) = (0, 0);
    for (k, patch) in patches.iter().enumerate() {
        let mesh = mesh_for(patch, cfg)?;
        mesh.validate()?;
        watertight &= check_grid_edges(&mesh, cfg.n).watertight();
        vertices += mesh.vertices.len();
        triangles += mesh.triangles.len();
        if merge {
            merged.append(&mesh);
        } else {
            let path = out.join(format!("patch_{k:03}.obj"));
            write_text(&path, &export_obj(&mesh))?;
            files.push(path.display().to_string());
        }
    }
    if merge {
        write_text(out, &export_obj(&merged))?;
        files.push(out.display().to_string());
    }
    Ok(TessellationSummary {
        n: cfg.n,
        pattern: cfg.pattern,
        patches: patches.len(),
        vertices,
        triangles,
        vertices_per_patch: (cfg.n + 1) * (cfg.n + 1),
        triangles_per_patch: 2 * cfg.n * cfg.n,
        watertight,
        files,
    })
}

#[derive(Serialize)]
struct TessellateReport {
    command: Command,
    #[serde(flatten)]
    summary: TessellationSummary,
}

fn cmd_tessellate(cfg: &CliConfig) -> CmdResult {
    let out = require(&cfg.out, "--out")?;
    let set = read_patchset(cfg)?;
    let summary = tessellate_set(&set.patches, cfg, out, cfg.merge)?;
    let text = format!(
        "tessellated {} patches at n={} ({}): {} vertices, {} triangles, watertight: {}, {} file(s) written\n",
        summary.patches,
        summary.n,
        summary.pattern,
        summary.vertices,
        summary.triangles,
        summary.watertight,
        summary.files.len()
    );
    let code = if summary.watertight { EXIT_OK } else { EXIT_INTERNAL };
    Ok(Report::new(
        code,
        text,
        &TessellateReport {
            command: Command::Tessellate,
            summary,
        },
    ))
}

#[derive(Serialize)]
struct SeamEntry {
    a: usize,
    edge_a: String,
    b: usize,
    edge_b: String,
    #[serde(flatten)]
    report: ContinuityReport,
}

#[derive(Serialize)]
struct ContinuityCommandReport {
    command: Command,
    samples_per_edge: usize,
    adjacency: Vec<SeamEntry>,
    summary: SeamSummary,
    worst_c0: Option<usize>,
    worst_c1: Option<usize>,
    worst_g1: Option<usize>,
}

fn argmax(values: impl Iterator<Item = f64>) -> Option<usize> {
    values
        .enumerate()
        .fold(None, |best: Option<(usize, f64)>, (i, v)| match best {
            Some((_, b)) if b >= v => best,
            _ => Some((i, v)),
        })
        .map(|(i, _)| i)
}

fn cmd_continuity(cfg: &CliConfig) -> CmdResult {
    let set = read_patchset(cfg)?;
    if set.adjacency.is_empty() {
        return Err(Error::InvalidArgument("input has no adjacency records".into()).into());
    }
    if cfg.n < 2 {
        return Err(Error::InvalidArgument("continuity sampling needs --n >= 2".into()).into());
    }
    let reports = seam_reports(&set.patches, &set.adjacency, cfg.n, cfg.tol)?;
    let summary = seam_summary(&reports);
    let worst_c0 = argmax(reports.iter().map(|r| r.c0_max_gap));
    let worst_c1 = argmax(reports.iter().map(|r| r.c1_max_mismatch));
    let worst_g1 = argmax(reports.iter().map(|r| r.g1_max_angle));
    let entries: Vec<SeamEntry> = set
        .adjacency
        .iter()
        .zip(reports)
        .map(|(a, report)| SeamEntry {
            a: a.a,
            edge_a: a.edge_a.to_string(),
            b: a.b,
            edge_b: a.edge_b.to_string(),
            report,
        })
        .collect();

    let mut text = String::new();
    for (k, e) in entries.iter().enumerate() {
        let r = &e.report;
        let _ = writeln!(
            text,
            "{k}: patch {} {} ~ patch {} {}: C0 {:.3e}, C1 {:.3e}, G1 {:.3e} rad{}",
            e.a,
            e.edge_a,
            e.b,
            e.edge_b,
            r.c0_max_gap,
            r.c1_max_mismatch,
            r.g1_max_angle,
            if r.degenerate_normals > 0 {
                format!(" ({} degenerate normals skipped)", r.degenerate_normals)
            } else {
                String::new()
            }
        );
    }
    let worst = |w: Option<usize>| w.map_or("-".to_string(), |i| i.to_string());
    let _ = writeln!(
        text,
        "{} adjacencies: worst C0 {:.3e} (#{}), worst C1 {:.3e} (#{}), worst G1 {:.3e} rad (#{})",
        summary.adjacencies,
        summary.c0_max_gap,
        worst(worst_c0),
        summary.c1_max_mismatch,
        worst(worst_c1),
        summary.g1_max_angle,
        worst(worst_g1)
    );
    Ok(Report::new(
        EXIT_OK,
        text,
        &ContinuityCommandReport {
            command: Command::Continuity,
            samples_per_edge: cfg.n + 1,
            adjacency: entries,
            summary,
            worst_c0,
            worst_c1,
            worst_g1,
        },
    ))
}

#[derive(Serialize)]
struct TeapotReport {
    command: Command,
    input: String,
    patches: usize,
    #[serde(flatten)]
    repair: RepairOutcome,
    /// C0 gap left by projecting every patch on its own, for comparison.
    independent_projection_c0_max_gap: f64,
    tessellation: TessellationSummary,
    report_file: String,
    repaired_file: String,
}

fn cmd_teapot(cfg: &CliConfig) -> CmdResult {
    let input = require(&cfg.input, "--in").stage("ingest")?;
    let out = require(&cfg.out, "--out").stage("ingest")?;
    let set = read_text(input).and_then(|t| load_any(&t)).stage("ingest")?;

    let (repaired, repair) = repair_set(&set, cfg.n, cfg.tol).stage("repair")?;

    let independent: Vec<BezierPatch> = set.patches.iter().map(|p| p.map_grids(bs_project)).collect();
    let independent_gap = seam_summary(
        &seam_reports(&independent, &set.adjacency, cfg.n, cfg.tol).stage("validate")?,
    )
    .c0_max_gap;

    let repaired_path = out.join("teapot_repaired.json");
    write_text(&repaired_path, &save_patchset(&repaired)).stage("export")?;
    let tess = tessellate_set(&repaired.patches, cfg, &out.join("teapot.obj"), true).stage("tessellate")?;

    let report_path = out.join("report.json");
    let report = TeapotReport {
        command: Command::Teapot,
        input: input.display().to_string(),
        patches: set.patches.len(),
        repair,
        independent_projection_c0_max_gap: independent_gap,
        tessellation: tess,
        report_file: report_path.display().to_string(),
        repaired_file: repaired_path.display().to_string(),
    };
    let json = serde_json::to_string_pretty(&report).expect("reports always serialize") + "\n";
    write_text(&report_path, &json).stage("export")?;

    let r = &report.repair;
    let ok = r.after.non_compliant == 0 && r.corner_displacement == 0.0 && report.tessellation.watertight;
    let mut text = format!("ingested {} patches, {} shared edges\n", report.patches, r.seams_before.adjacencies);
    text.push_str(&repair_text(r));
    let _ = writeln!(
        text,
        "independent per-patch projection would leave C0 gaps up to {:.3e}",
        report.independent_projection_c0_max_gap
    );
    let _ = writeln!(
        text,
        "tessellated at n={} ({}): {} vertices, {} triangles, watertight: {}",
        report.tessellation.n,
        report.tessellation.pattern,
        report.tessellation.vertices,
        report.tessellation.triangles,
        report.tessellation.watertight
    );
    let _ = writeln!(text, "wrote {}, {} and {}", report.tessellation.files.join(", "), report.repaired_file, report.report_file);
    Ok(Report::new(if ok { EXIT_OK } else { EXIT_VALIDATION }, text, &report))
}
