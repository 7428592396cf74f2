//! The `dendrite` command line: render, analyze, compare, concat, bench and
//! fmt, as plain functions so they can be driven from tests.
//!
//! Exit codes (see [`CliError::exit_code`]):
//!
//! | code | meaning |
//! |-----:|---------|
//! | 0 | success |
//! | 1 | I/O error (missing input, unwritable output) |
//! | 2 | parse error in a program or CSV file |
//! | 3 | output format incompatible with the tree (dimension, style) |
//! | 4 | compile error: a program that parses but cannot be built |
//! | 5 | evaluation error (node cap, non-finite values, degenerate mesh) |
//! | 6 | analysis precondition failed (not a tree, topology mismatch) |
//! | 7 | benchmark refused (too small, or the backends disagree) |
//! | 8 | `fmt --check` found an unformatted file |
//! | 64 | command-line usage error |

// `!(x > 0.0)` is how non-finite input gets rejected along with the rest.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use dendrite::accessory::{concatenate_with, evaluate_accessories_with, perimeter_feedback, ConcatOptions, Perimeter};
use dendrite::csv_io::{read_coords_csv, read_points_csv};
use dendrite::dsl::{self, CompileError, CompileOptions, DEFAULT_GENERATIONS};
use dendrite::export::{drop_axes_basis, project, to_json, to_stl, to_svg, ExportError, RadiusSource, TubeParams};
use dendrite::tree::{
    bounding_radius, classify_self_similarity, compare_canopies, default_box_scales, estimate_box_dimension,
    evaluate_tree_with, evaluate_via_transform_stack_with, BranchPointSet, EvalOptions, EvaluatedTree, ForkSchedule,
    TreeError, DEFAULT_MAX_NODES, DEFAULT_TOLERANCE,
};
use dendrite::{AccessoryError, CurveError, DecoratedTree, DerivativeCoords, EnhancedTree, Pose, TreeSpec};
use serde::Serialize;
use thiserror::Error;

/// Environment variable overriding the node cap.
pub const MAX_NODES_ENV: &str = "DENDRITE_MAX_NODES";
/// Smallest tree, in integration steps, that `bench` will time.
pub const BENCH_MIN_SEGMENTS: usize = 1 << 14;
/// Largest per-coordinate node difference the backends may show.
pub const BENCH_AGREEMENT: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    /// Already-rendered diagnostics.
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Format(String),
    #[error("{0}")]
    Compile(String),
    #[error("{0}")]
    Eval(String),
    #[error("{0}")]
    Analysis(String),
    #[error("benchmark refused: {0}")]
    Bench(String),
    #[error("{0} is not formatted")]
    Unformatted(String),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Parse(_) => 2,
            CliError::Format(_) => 3,
            CliError::Compile(_) => 4,
            CliError::Eval(_) => 5,
            CliError::Analysis(_) => 6,
            CliError::Bench(_) => 7,
            CliError::Unformatted(_) => 8,
            CliError::Usage(_) => 64,
        }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    }
}

fn eval_error(e: impl std::fmt::Display) -> CliError {
    CliError::Eval(e.to_string())
}

fn tree_error(e: TreeError) -> CliError {
    match e {
        TreeError::TooManyNodes { .. } | TreeError::TooManySamples { .. } | TreeError::Curve(_) => eval_error(e),
        TreeError::DimensionMismatch { .. } | TreeError::UnsupportedDimension(_) => CliError::Format(e.to_string()),
        other => CliError::Analysis(other.to_string()),
    }
}

fn accessory_error(e: AccessoryError) -> CliError {
    match e {
        AccessoryError::Tree(t) => eval_error(t),
        AccessoryError::Eval { .. } => eval_error(e),
        AccessoryError::DimensionMismatch(..) => CliError::Format(e.to_string()),
        other => CliError::Compile(other.to_string()),
    }
}

fn export_error(e: ExportError) -> CliError {
    match e {
        ExportError::Dimension { .. } | ExportError::UnknownChannel(_) | ExportError::BadAttribute(_) => {
            CliError::Format(e.to_string())
        }
        ExportError::TooFewSegments(_) | ExportError::BadBasis(_) => CliError::Usage(e.to_string()),
        other => eval_error(other),
    }
}

/// Where a tree comes from and how to adjust its grid.
#[derive(Debug, Clone, PartialEq)]
pub struct InputConfig {
    /// A program (`.ftree`) or sampled coordinates (`.csv`).
    pub path: PathBuf,
    /// Tree to build from a program instead of its entry point.
    pub tree: Option<String>,
    /// Grid step override.
    pub delta_s: Option<f64>,
    /// Truncates the domain at this `s`.
    pub s_max: Option<f64>,
    pub generations: Option<usize>,
    pub max_nodes: usize,
}

impl InputConfig {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self {
            path: path.into(),
            tree: None,
            delta_s: None,
            s_max: None,
            generations: None,
            max_nodes: DEFAULT_MAX_NODES,
        }
    }

    fn eval_options(&self) -> EvalOptions {
        EvalOptions {
            max_nodes: self.max_nodes,
            ..EvalOptions::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Svg,
    Stl,
    Json,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s.to_ascii_lowercase().as_str() {
            "svg" => Ok(Self::Svg),
            "stl" => Ok(Self::Stl),
            "json" => Ok(Self::Json),
            other => Err(CliError::Usage(format!("unknown format `{other}` (svg, stl or json)"))),
        }
    }

    fn from_path(path: &Path) -> Option<Self> {
        Self::parse(path.extension()?.to_str()?).ok()
    }

    fn name(self) -> &'static str {
        match self {
            Self::Svg => "svg",
            Self::Stl => "stl",
            Self::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderConfig {
    /// `None` writes to standard output.
    pub output: Option<PathBuf>,
    /// Falls back to the output extension, then to svg/stl/json by dimension.
    pub format: Option<OutputFormat>,
    /// Extra channel-to-attribute bindings for SVG.
    pub styles: Vec<(String, String)>,
    pub tube_segments: usize,
    /// Constant tube radius; otherwise the `width` channel or `bound / 200`.
    pub radius: Option<f64>,
    /// Drop trailing axes so a higher-dimensional tree fits the format.
    pub project: bool,
    pub perimeter: Option<PathBuf>,
    pub gain: f64,
    pub falloff: f64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            output: None,
            format: None,
            styles: Vec::new(),
            tube_segments: 8,
            radius: None,
            project: false,
            perimeter: None,
            gain: 1.0,
            falloff: 0.1,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

fn diagnostics_text(diags: &[dsl::Diagnostic], path: &Path) -> String {
    diags
        .iter()
        .map(|d| d.render(&display(path)))
        .collect::<Vec<_>>()
        .join("\n")
}

fn compile_error(e: CompileError, src: &str, path: &Path) -> CliError {
    let text = match e.to_diagnostic(src) {
        Some(d) => d.render(&display(path)),
        None => format!("{}: {e}", display(path)),
    };
    match e {
        CompileError::Tree {
            source: TreeError::TooManyNodes { .. } | TreeError::TooManySamples { .. },
            ..
        } => CliError::Eval(text),
        CompileError::Eval { .. } => CliError::Eval(text),
        _ => CliError::Compile(text),
    }
}

fn is_csv(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Reads and builds the tree described by `cfg`.
pub fn load(cfg: &InputConfig) -> Result<EnhancedTree, CliError> {
    if let Some(ds) = cfg.delta_s {
        if !(ds > 0.0) || !ds.is_finite() {
            return Err(CliError::Usage(format!("--delta-s must be positive, got {ds}")));
        }
    }
    let mut tree = if is_csv(&cfg.path) {
        load_csv(cfg)?
    } else {
        load_program(cfg)?
    };
    if let Some(s_max) = cfg.s_max {
        tree.spec = truncate(&tree.spec, s_max)?;
    }
    if let Some(g) = cfg.generations {
        if g == 0 {
            return Err(CliError::Usage("--generations must be at least 1".into()));
        }
        if tree.spec.is_tree() {
            tree.spec = tree.spec.with_max_generations(g).map_err(tree_error)?;
        }
    }
    Ok(tree)
}

fn load_program(cfg: &InputConfig) -> Result<EnhancedTree, CliError> {
    let src = read(&cfg.path)?;
    let program = dsl::parse(&src).map_err(|d| CliError::Parse(diagnostics_text(&d.0, &cfg.path)))?;
    let opts = CompileOptions { delta_s: cfg.delta_s };
    let compiled = match &cfg.tree {
        Some(name) => dsl::compile_named(&program, name, &opts),
        None => dsl::compile_with(&program, &opts),
    };
    compiled.map_err(|e| compile_error(e, &src, &cfg.path))
}

fn load_csv(cfg: &InputConfig) -> Result<EnhancedTree, CliError> {
    let file = fs::File::open(&cfg.path).map_err(|e| CliError::io(&cfg.path, e))?;
    let parsed = read_coords_csv(file).map_err(|e| CliError::Parse(format!("{}: {e}", display(&cfg.path))))?;
    let coords = parsed.coords;
    let dim = coords.dim();
    let spec = match parsed.branch_points {
        Some(points) if !points.is_empty() => {
            let set = BranchPointSet::new(&points, coords.grid()).map_err(|e| CliError::Compile(e.to_string()))?;
            TreeSpec::new(coords, vec![set; dim - 1], ForkSchedule::binary(), DEFAULT_GENERATIONS)
                .map_err(|e| CliError::Compile(e.to_string()))?
        }
        _ => TreeSpec::path(coords),
    };
    let spec = match cfg.delta_s {
        Some(ds) => spec.resample(ds).map_err(tree_error)?,
        None => spec,
    };
    Ok(EnhancedTree::bare(spec, Pose::origin(dim)))
}

/// Drops every sample past `s_max` together with the branch points there.
fn truncate(spec: &TreeSpec, s_max: f64) -> Result<TreeSpec, CliError> {
    let grid = *spec.coords().grid();
    if !(s_max > grid.s_min()) || s_max > grid.s_max() + 1e-9 * grid.delta_s() {
        return Err(CliError::Usage(format!(
            "--s-max {s_max} must lie in ({}, {}]",
            grid.s_min(),
            grid.s_max()
        )));
    }
    let last = grid.nearest_index(s_max).unwrap_or(grid.last_index()).max(1);
    let sub = grid.slice(0, last);
    let coords = spec.coords();
    let dr = coords.radial_samples()[..=last].to_vec();
    let ang = coords
        .all_angular_samples()
        .iter()
        .map(|a| a[..=last].to_vec())
        .collect();
    let coords = DerivativeCoords::from_samples(sub, dr, ang).map_err(|e: CurveError| eval_error(e))?;
    if !spec.is_tree() {
        return Ok(TreeSpec::path(coords));
    }
    let sets = spec
        .branch_sets()
        .iter()
        .map(|b| {
            let kept: Vec<f64> = b.points().iter().copied().filter(|s| sub.contains(*s)).collect();
            BranchPointSet::new(&kept, &sub)
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(tree_error)?;
    TreeSpec::new(coords, sets, spec.forks().clone(), spec.max_generations()).map_err(tree_error)
}

/// Evaluates `tree` with its accessories.
pub fn decorate(tree: &EnhancedTree, max_nodes: usize) -> Result<DecoratedTree, CliError> {
    evaluate_accessories_with(
        tree,
        &BTreeMap::new(),
        &EvalOptions {
            max_nodes,
            ..EvalOptions::default()
        },
    )
    .map_err(accessory_error)
}

fn default_styles(decorated: &DecoratedTree) -> BTreeMap<String, String> {
    [
        ("width", "stroke-width"),
        ("opacity", "stroke-opacity"),
        ("color", "stroke"),
    ]
    .into_iter()
    .filter(|(ch, _)| decorated.channels.contains_key(*ch))
    .map(|(ch, attr)| (ch.to_string(), attr.to_string()))
    .collect()
}

fn fit_dimension(
    decorated: DecoratedTree,
    want: usize,
    allow: bool,
    format: OutputFormat,
) -> Result<DecoratedTree, CliError> {
    let got = decorated.tree.dim;
    check_dimension(format, want, got, allow)?;
    if got == want {
        return Ok(decorated);
    }
    let kept: Vec<usize> = (0..want).collect();
    let basis = drop_axes_basis(got, &kept);
    project(&decorated, want, &basis).map_err(export_error)
}

fn check_dimension(format: OutputFormat, want: usize, got: usize, allow_projection: bool) -> Result<(), CliError> {
    if got == want || (got > want && allow_projection) {
        return Ok(());
    }
    Err(CliError::Format(format!(
        "{} output needs a {want}D tree but the input is {got}D{}",
        format.name(),
        if got > want {
            "; pass --project to drop the extra axes"
        } else {
            ""
        }
    )))
}

/// Serializes an evaluated tree in `format`.
pub fn export(decorated: DecoratedTree, format: OutputFormat, cfg: &RenderConfig) -> Result<Vec<u8>, CliError> {
    match format {
        OutputFormat::Json => Ok(to_json(&decorated).into_bytes()),
        OutputFormat::Svg => {
            let decorated = fit_dimension(decorated, 2, cfg.project, format)?;
            let mut styles = default_styles(&decorated);
            for (ch, attr) in &cfg.styles {
                styles.insert(ch.clone(), attr.clone());
            }
            to_svg(&decorated, &styles)
                .map(String::into_bytes)
                .map_err(export_error)
        }
        OutputFormat::Stl => {
            let decorated = fit_dimension(decorated, 3, cfg.project, format)?;
            let bound = if decorated.bound.is_finite() {
                decorated.bound
            } else {
                1.0
            };
            let radius = match cfg.radius {
                Some(r) => RadiusSource::Constant(r),
                None if decorated.channels.contains_key("width") => RadiusSource::Channel("width".into()),
                None => RadiusSource::Constant(bound / 200.0),
            };
            let params = TubeParams {
                radial_segments: cfg.tube_segments,
                radius,
                cap_ends: true,
                tolerance: bound * 1e-4,
            };
            to_stl(&decorated, &params).map_err(export_error)
        }
    }
}

fn pick_format(cfg: &RenderConfig, dim: usize) -> OutputFormat {
    cfg.format
        .or_else(|| cfg.output.as_deref().and_then(OutputFormat::from_path))
        .unwrap_or(match dim {
            2 => OutputFormat::Svg,
            3 => OutputFormat::Stl,
            _ => OutputFormat::Json,
        })
}

fn with_perimeter(tree: EnhancedTree, cfg: &RenderConfig) -> Result<EnhancedTree, CliError> {
    let Some(path) = &cfg.perimeter else {
        return Ok(tree);
    };
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let points = read_points_csv(file).map_err(|e| CliError::Parse(format!("{}: {e}", display(path))))?;
    let perimeter = Perimeter::new(points).map_err(|e| CliError::Compile(format!("{}: {e}", display(path))))?;
    perimeter_feedback(&tree, perimeter, cfg.gain, cfg.falloff).map_err(accessory_error)
}

fn emit(bytes: &[u8], output: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    match output {
        Some(path) => fs::write(path, bytes).map_err(|e| CliError::io(path, e)),
        None => out.write_all(bytes).map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

fn render_tree(tree: EnhancedTree, max_nodes: usize, cfg: &RenderConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let tree = with_perimeter(tree, cfg)?;
    let format = pick_format(cfg, tree.dim());
    // fail on the format before paying for the evaluation
    match format {
        OutputFormat::Svg => check_dimension(format, 2, tree.dim(), cfg.project)?,
        OutputFormat::Stl => check_dimension(format, 3, tree.dim(), cfg.project)?,
        OutputFormat::Json => {}
    }
    let decorated = decorate(&tree, max_nodes)?;
    log::info!(
        "evaluated {} nodes, bound {:.6}",
        decorated.tree.nodes.len(),
        decorated.bound
    );
    let bytes = export(decorated, format, cfg)?;
    emit(&bytes, cfg.output.as_deref(), out)
}

/// Loads, evaluates and exports one tree.
pub fn cmd_render(input: &InputConfig, cfg: &RenderConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let tree = load(input)?;
    render_tree(tree, input.max_nodes, cfg, out)
}

/// Concatenates `second` after `first` and exports the result.
pub fn cmd_concat(
    first: &InputConfig,
    second: &InputConfig,
    allow_resample: bool,
    cfg: &RenderConfig,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let (a, b) = (load(first)?, load(second)?);
    let joined = concatenate_with(&a, &b, &ConcatOptions { allow_resample }).map_err(accessory_error)?;
    render_tree(joined, first.max_nodes, cfg, out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub classification: String,
    pub rho: Option<f64>,
    pub rho_condition_met: bool,
    pub phi_condition_met: bool,
    pub equidistant_met: bool,
    pub period: Option<usize>,
    /// `None` when the radius is not finite.
    pub bound: Option<f64>,
    pub bound_extrapolated: bool,
    pub nodes: Option<usize>,
    pub box_dimension: Option<f64>,
}

impl AnalysisReport {
    pub fn to_text(&self) -> String {
        let rho = self.rho.map_or("none".to_string(), |r| format!("{r:.4}"));
        let bound = self.bound.map_or("inf".to_string(), |b| format!("{b:.4}"));
        let yn = |b: bool| if b { "yes" } else { "no" };
        let mut text = format!(
            "{}, rho={rho}, bound={bound}\nconditions: rho={} phi={} equidistant={}\n",
            self.classification,
            yn(self.rho_condition_met),
            yn(self.phi_condition_met),
            yn(self.equidistant_met)
        );
        if let Some(d) = self.box_dimension {
            text.push_str(&format!("box_dimension={d:.4}\n"));
        }
        text
    }
}

/// Classification, scaling ratio and bound of a tree; with `box_dimension`
/// the tree is also evaluated and box-counted.
pub fn analyze(tree: &EnhancedTree, box_dimension: bool, max_nodes: usize) -> Result<AnalysisReport, CliError> {
    let spec = &tree.spec;
    if !spec.is_tree() {
        return Err(CliError::Analysis(TreeError::NotATree.to_string()));
    }
    let sim = classify_self_similarity(spec, DEFAULT_TOLERANCE).map_err(|e| CliError::Analysis(e.to_string()))?;
    let bound = bounding_radius(spec);
    let (nodes, dimension) = if box_dimension {
        let evaluated = evaluate_tree_with(
            spec,
            &tree.start,
            &EvalOptions {
                max_nodes,
                ..EvalOptions::default()
            },
        )
        .map_err(tree_error)?;
        let scales = default_box_scales(&evaluated, 8);
        let d = estimate_box_dimension(&evaluated, &scales).map_err(|e| CliError::Analysis(e.to_string()))?;
        (Some(evaluated.nodes.len()), Some(d))
    } else {
        (None, None)
    };
    Ok(AnalysisReport {
        classification: sim.classification.as_str().to_string(),
        rho: sim.rho,
        rho_condition_met: sim.rho_condition_met,
        phi_condition_met: sim.phi_condition_met,
        equidistant_met: sim.equidistant_met,
        period: sim.period,
        bound: bound.radius.is_finite().then_some(bound.radius),
        bound_extrapolated: bound.extrapolated,
        nodes,
        box_dimension: dimension,
    })
}

pub fn cmd_analyze(input: &InputConfig, json: bool, box_dimension: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let tree = load(input)?;
    let report = analyze(&tree, box_dimension, input.max_nodes)?;
    let text = if json {
        serde_json::to_string_pretty(&report).expect("report serializes") + "\n"
    } else {
        report.to_text()
    };
    emit(text.as_bytes(), None, out)
}

/// Compares the canopies of two planar trees over `generations`
/// generations (default: all the trees share).
pub fn cmd_compare(
    a: &InputConfig,
    b: &InputConfig,
    generations: Option<usize>,
    json: bool,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let eval = |cfg: &InputConfig| -> Result<EvaluatedTree, CliError> {
        let tree = load(cfg)?;
        if tree.dim() != 2 {
            return Err(CliError::Format(format!(
                "{}: canopy comparison needs planar trees, got {}D",
                display(&cfg.path),
                tree.dim()
            )));
        }
        evaluate_tree_with(&tree.spec, &tree.start, &cfg.eval_options()).map_err(tree_error)
    };
    let (ta, tb) = (eval(a)?, eval(b)?);
    let g = generations.unwrap_or_else(|| ta.max_generation().min(tb.max_generation()));
    let report = compare_canopies(&ta, &tb, g).map_err(|e| CliError::Analysis(e.to_string()))?;
    let text = if json {
        serde_json::to_string_pretty(&report).expect("report serializes") + "\n"
    } else {
        let mut t = format!("scale={:.6}\n", report.scale);
        let d1 = report.per_generation_distance.first().copied().unwrap_or(0.0);
        for (i, d) in report.per_generation_distance.iter().enumerate() {
            let rel = if d1 > 0.0 { format!("{:.4}", d / d1) } else { "-".into() };
            t.push_str(&format!(
                "generation {}: distance={d:.6e} offset={:.6e} relative={rel}\n",
                i + 1,
                report.per_generation_offset[i]
            ));
        }
        t.push_str(&format!(
            "fitted_rho={:.4}\n{}\n",
            report.fitted_rho,
            if report.converged { "converged" } else { "not converged" }
        ));
        t
    };
    emit(text.as_bytes(), None, out)
}

type Backend<'a> = &'a dyn Fn(&TreeSpec, &Pose, &EvalOptions) -> Result<EvaluatedTree, TreeError>;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub backend: &'static str,
    pub best: Duration,
    pub ns_per_segment: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub dim: usize,
    pub nodes: usize,
    pub segments: usize,
    pub max_deviation: f64,
    pub rows: [BenchRow; 2],
}

impl BenchReport {
    /// Transform-stack time over accumulation time.
    pub fn ratio(&self) -> f64 {
        self.rows[1].best.as_secs_f64() / self.rows[0].best.as_secs_f64().max(1e-12)
    }

    pub fn to_text(&self) -> String {
        let mut t = format!(
            "{}D tree, {} nodes, {} segments\nagreement: max deviation {:.3e} <= {BENCH_AGREEMENT:e} ok\n",
            self.dim, self.nodes, self.segments, self.max_deviation
        );
        t.push_str(&format!("{:<26}{:>12}{:>14}\n", "backend", "best ms", "ns/segment"));
        for r in &self.rows {
            t.push_str(&format!(
                "{:<26}{:>12.3}{:>14.2}\n",
                r.backend,
                r.best.as_secs_f64() * 1e3,
                r.ns_per_segment
            ));
        }
        t.push_str(&format!(
            "ratio (transform_stack / accumulation): {:.3}\n",
            self.ratio()
        ));
        t
    }
}

fn segments(tree: &EvaluatedTree) -> usize {
    tree.edges.iter().map(|e| e.polyline.len().saturating_sub(1)).sum()
}

/// Largest per-coordinate difference between corresponding nodes; infinite
/// when the node lists do not line up.
pub fn max_node_deviation(a: &EvaluatedTree, b: &EvaluatedTree) -> f64 {
    if a.nodes.len() != b.nodes.len() {
        return f64::INFINITY;
    }
    let mut worst = 0.0f64;
    for (x, y) in a.nodes.iter().zip(&b.nodes) {
        if x.id != y.id {
            return f64::INFINITY;
        }
        for (p, q) in x.position.iter().zip(&y.position) {
            let d = (p - q).abs();
            if !d.is_finite() {
                return f64::INFINITY;
            }
            worst = worst.max(d);
        }
    }
    worst
}

fn time(repeats: usize, f: &dyn Fn() -> Result<EvaluatedTree, TreeError>) -> Result<Duration, CliError> {
    let mut best = Duration::MAX;
    for _ in 0..repeats.max(1) {
        let t0 = Instant::now();
        let tree = f().map_err(tree_error)?;
        best = best.min(t0.elapsed());
        drop(tree);
    }
    Ok(best)
}

/// Times derivative accumulation against `oracle` (normally the transform
/// stack) on the same spec. Refuses before timing anything when the tree is
/// too small or the two disagree on any node by more than
/// [`BENCH_AGREEMENT`].
pub fn bench_backends(
    spec: &TreeSpec,
    start: &Pose,
    opts: &EvalOptions,
    repeats: usize,
    oracle: Backend<'_>,
) -> Result<BenchReport, CliError> {
    let dim = spec.dim();
    if !(2..=3).contains(&dim) {
        return Err(CliError::Bench(format!(
            "the transform stack handles 2D and 3D trees only, got {dim}D"
        )));
    }
    let fast = evaluate_tree_with(spec, start, opts).map_err(tree_error)?;
    let n = segments(&fast);
    if n < BENCH_MIN_SEGMENTS {
        return Err(CliError::Bench(format!(
            "{n} segments is below the minimum of {BENCH_MIN_SEGMENTS}; refine the grid or add generations"
        )));
    }
    let slow = oracle(spec, start, opts).map_err(tree_error)?;
    let dev = max_node_deviation(&fast, &slow);
    if !(dev <= BENCH_AGREEMENT) {
        return Err(CliError::Bench(format!(
            "backends disagree: max node deviation {dev:e} exceeds {BENCH_AGREEMENT:e}"
        )));
    }
    let t_fast = time(repeats, &|| evaluate_tree_with(spec, start, opts))?;
    let t_slow = time(repeats, &|| oracle(spec, start, opts))?;
    let row = |backend, best: Duration| BenchRow {
        backend,
        best,
        ns_per_segment: best.as_secs_f64() * 1e9 / n as f64,
    };
    Ok(BenchReport {
        dim,
        nodes: fast.nodes.len(),
        segments: n,
        max_deviation: dev,
        rows: [row("derivative_accumulation", t_fast), row("transform_stack", t_slow)],
    })
}

pub fn cmd_bench(input: &InputConfig, repeats: usize, out: &mut dyn Write) -> Result<(), CliError> {
    let tree = load(input)?;
    let report = bench_backends(
        &tree.spec,
        &tree.start,
        &input.eval_options(),
        repeats,
        &evaluate_via_transform_stack_with,
    )?;
    emit(report.to_text().as_bytes(), None, out)
}

/// Prints a program in canonical layout. With `check` nothing is printed;
/// an unformatted file is an error. With `write` the file is rewritten.
pub fn cmd_fmt(path: &Path, check: bool, write: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let src = read(path)?;
    let program = dsl::parse(&src).map_err(|d| CliError::Parse(diagnostics_text(&d.0, path)))?;
    let formatted = dsl::format(&program);
    if check {
        return if formatted == src {
            Ok(())
        } else {
            Err(CliError::Unformatted(display(path)))
        };
    }
    if write {
        if formatted != src {
            fs::write(path, &formatted).map_err(|e| CliError::io(path, e))?;
        }
        return Ok(());
    }
    emit(formatted.as_bytes(), None, out)
}

/// Node cap from the environment value, if any.
pub fn max_nodes_from_env(value: Option<&str>) -> Result<usize, CliError> {
    match value {
        None => Ok(DEFAULT_MAX_NODES),
        Some(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::Usage(format!(
                "{MAX_NODES_ENV} must be a positive integer, got `{v}`"
            ))),
        },
    }
}

/// `channel=attribute` style binding.
pub fn parse_style(s: &str) -> Result<(String, String), CliError> {
    match s.split_once('=') {
        Some((ch, attr)) if !ch.trim().is_empty() && !attr.trim().is_empty() => {
            Ok((ch.trim().to_string(), attr.trim().to_string()))
        }
        _ => Err(CliError::Usage(format!("style `{s}` must look like channel=attribute"))),
    }
}
