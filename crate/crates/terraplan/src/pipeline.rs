//! End-to-end pipeline commands shared by the CLI binary and the examples.
//!
//! Each `cmd_*` function is one pipeline stage working purely through
//! files: point cloud → map container → simplified map → traversability
//! field + graph → planned path. All parameters come from a [`RunConfig`],
//! which layers three sources in increasing precedence: built-in defaults,
//! an INI-style config file, and explicit command-line overrides.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::error::{Error, Result};
use crate::geom::Point3;
use crate::io::{load_json_document, load_point_cloud, write_point_cloud, CloudFormat};
use crate::planner::{plan, PlannedPath};
use crate::scenegen::{generate, SceneSpec};
use crate::simplify::{simplify_map, SimplifyParams};
use crate::skimap::{MLSkiMap, MapConfig};
use crate::traversability::{compute_field, field_color_cloud, TraversabilityConfig, VehicleModel};
use crate::wtg::{build_wtg, Wtg};

/// Every tunable of the pipeline in one place.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Voxel edge length in meters.
    pub cell_size: f64,
    /// Vertical gap that splits a column into separate levels.
    pub level_gap: f64,
    /// Multiplier applied to input coordinates (e.g. 0.001 for mm data).
    pub unit_scale: f64,
    /// Grid origin of newly built maps.
    pub origin: Point3,
    /// Curvature-retention curve `N = ⌊a·curv^b + c⌋`.
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Seed for the per-voxel decimation draws.
    pub seed: u64,
    /// Vehicle profile file; `None` uses the built-in compact platform.
    pub vehicle_profile: Option<PathBuf>,
    /// Surface-height connectivity threshold (also the level-matching
    /// window of the traversability analysis).
    pub c_max: f64,
    /// Distance-vs-traversability mixing weight.
    pub lambda: f64,
    /// Maximum endpoint snapping distance.
    pub snap_radius: f64,
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        RunConfig {
            cell_size: 0.1,
            level_gap: 0.5,
            unit_scale: 1.0,
            origin: Point3::ORIGIN,
            a: 900.0,
            b: 3.0,
            c: 1.0,
            seed: 0,
            vehicle_profile: None,
            c_max: 0.25,
            lambda: 0.5,
            snap_radius: 0.5,
        }
    }
}

/// Command-line values that override the config file when present.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub cell_size: Option<f64>,
    pub level_gap: Option<f64>,
    pub unit_scale: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub seed: Option<u64>,
    pub vehicle_profile: Option<PathBuf>,
    pub c_max: Option<f64>,
    pub lambda: Option<f64>,
    pub snap_radius: Option<f64>,
}

impl RunConfig {
    /// Parse an INI-style config file. Unknown sections or keys are errors
    /// so typos cannot silently fall back to defaults.
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = fs::read_to_string(path).map_err(|e| Error::malformed(path, e.to_string()))?;
        let mut config = RunConfig::default();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split(&['#', ';'][..]).next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fail = |msg: String| {
                Err(Error::InvalidConfig(format!(
                    "{}:{}: {msg}",
                    path.display(),
                    lineno + 1
                )))
            };
            if let Some(name) = line.strip_prefix('[') {
                let Some(name) = name.strip_suffix(']') else {
                    return fail("unterminated section header".into());
                };
                section = name.trim().to_string();
                if !["map", "simplify", "vehicle", "wtg", "planner"].contains(&section.as_str()) {
                    return fail(format!("unknown section [{section}]"));
                }
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return fail(format!("expected key = value, got `{line}`"));
            };
            let (key, value) = (key.trim(), value.trim());
            let number = || -> Result<f64> {
                value.parse::<f64>().map_err(|_| {
                    Error::InvalidConfig(format!(
                        "{}:{}: `{key}` wants a number, got `{value}`",
                        path.display(),
                        lineno + 1
                    ))
                })
            };
            match (section.as_str(), key) {
                ("map", "cell_size") => config.cell_size = number()?,
                ("map", "level_gap") => config.level_gap = number()?,
                ("map", "unit_scale") => config.unit_scale = number()?,
                ("map", "origin") => config.origin = parse_point(value)?,
                ("simplify", "a") => config.a = number()?,
                ("simplify", "b") => config.b = number()?,
                ("simplify", "c") => config.c = number()?,
                ("simplify", "seed") => {
                    config.seed = value.parse().map_err(|_| {
                        Error::InvalidConfig(format!(
                            "{}:{}: `seed` wants an unsigned integer, got `{value}`",
                            path.display(),
                            lineno + 1
                        ))
                    })?
                }
                ("vehicle", "profile") => config.vehicle_profile = Some(PathBuf::from(value)),
                ("wtg", "c_max") => config.c_max = number()?,
                ("planner", "lambda") => config.lambda = number()?,
                ("planner", "snap_radius") => config.snap_radius = number()?,
                _ => return fail(format!("unknown key `{key}` in section [{section}]")),
            }
        }
        Ok(config)
    }

    /// Load the config file if given, then apply CLI overrides on top.
    pub fn resolve(config_path: Option<&Path>, overrides: &Overrides) -> Result<RunConfig> {
        let mut config = match config_path {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        config.apply(overrides);
        Ok(config)
    }

    pub fn apply(&mut self, o: &Overrides) {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(v) = o.$field.clone() { self.$field = v; })*
            };
        }
        take!(
            cell_size,
            level_gap,
            unit_scale,
            a,
            b,
            c,
            seed,
            c_max,
            lambda,
            snap_radius
        );
        if let Some(p) = &o.vehicle_profile {
            self.vehicle_profile = Some(p.clone());
        }
    }

    fn map_config(&self) -> Result<MapConfig> {
        MapConfig::new(self.cell_size, self.level_gap)?.with_origin(self.origin)
    }

    fn simplify_params(&self) -> Result<SimplifyParams> {
        SimplifyParams::new(self.a, self.b, self.c, self.seed)
    }

    fn vehicle(&self) -> Result<VehicleModel> {
        match &self.vehicle_profile {
            Some(path) => VehicleModel::from_profile(path),
            None => Ok(VehicleModel::default()),
        }
    }
}

/// Parse an `x,y,z` coordinate triple.
pub fn parse_point(text: &str) -> Result<Point3> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let bad = || Error::InvalidConfig(format!("expected x,y,z — got `{text}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let mut xyz = [0.0_f64; 3];
    for (slot, part) in xyz.iter_mut().zip(&parts) {
        *slot = part.parse().map_err(|_| bad())?;
        if !slot.is_finite() {
            return Err(bad());
        }
    }
    Ok(Point3::from(xyz))
}

/// What `cmd_build` did, for reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct BuildReport {
    pub point_count: usize,
    pub column_count: usize,
    pub voxel_count: usize,
    pub level_count: usize,
    pub multi_level_columns: usize,
}

/// Load a cloud, index it into a map, and write the map container.
pub fn cmd_build(input: &Path, output: &Path, config: &RunConfig) -> Result<BuildReport> {
    let mut cloud = load_point_cloud(input, CloudFormat::Auto)?;
    if config.unit_scale != 1.0 {
        cloud = cloud.scaled(config.unit_scale)?;
    }
    let map = MLSkiMap::build(&cloud, config.map_config()?)?;
    map.save(output)?;
    Ok(build_report(&map))
}

fn build_report(map: &MLSkiMap) -> BuildReport {
    let mut level_count = 0;
    let mut multi_level_columns = 0;
    for (i, j) in map.iter_columns() {
        let levels = map.column_levels(i, j).len();
        level_count += levels;
        if levels > 1 {
            multi_level_columns += 1;
        }
    }
    BuildReport {
        point_count: map.point_count(),
        column_count: map.column_count(),
        voxel_count: map.voxel_count(),
        level_count,
        multi_level_columns,
    }
}

/// What `cmd_simplify` did.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplifyReport {
    pub points_before: usize,
    pub points_after: usize,
}

impl SimplifyReport {
    /// Fraction of points retained.
    pub fn retained_fraction(&self) -> f64 {
        if self.points_before == 0 {
            return 0.0;
        }
        self.points_after as f64 / self.points_before as f64
    }
}

/// Decimate a map container by per-voxel curvature and write the result.
pub fn cmd_simplify(input: &Path, output: &Path, config: &RunConfig) -> Result<SimplifyReport> {
    let map = MLSkiMap::load(input)?;
    let simplified = simplify_map(&map, &config.simplify_params()?);
    simplified.save(output)?;
    Ok(SimplifyReport {
        points_before: map.point_count(),
        points_after: simplified.point_count(),
    })
}

/// What `cmd_analyze` did.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeReport {
    pub cell_count: usize,
    pub finite_fraction: f64,
    pub node_count: usize,
    pub edge_count: usize,
    pub field_path: PathBuf,
    pub graph_json_path: PathBuf,
    pub graph_binary_path: PathBuf,
}

/// Run the vehicle-interaction analysis over a map and emit the field and
/// graph files: `BASE.field.json`, `BASE.wtg.json`, `BASE.wtg.bin`, plus
/// colored PLY renderings when `export_ply` is set.
pub fn cmd_analyze(
    input: &Path,
    output_base: &Path,
    config: &RunConfig,
    export_ply: bool,
) -> Result<AnalyzeReport> {
    let map = MLSkiMap::load(input)?;
    let vehicle = config.vehicle()?;
    let t_config = TraversabilityConfig::new(config.c_max)?;
    let field = compute_field(&map, &vehicle, &t_config);
    let graph = build_wtg(&map, &field, config.c_max)?;

    let field_path = with_suffix(output_base, "field.json");
    crate::io::write_json_document(&field.to_json_value(&map)?, &field_path)?;
    let graph_json_path = with_suffix(output_base, "wtg.json");
    graph.save_json(&graph_json_path)?;
    let graph_binary_path = with_suffix(output_base, "wtg.bin");
    graph.save_binary(&graph_binary_path)?;
    if export_ply {
        write_point_cloud(
            &field_color_cloud(&map, &field)?,
            &with_suffix(output_base, "field.ply"),
        )?;
        graph.save_edge_ply(&with_suffix(output_base, "wtg.ply"))?;
    }

    Ok(AnalyzeReport {
        cell_count: field.len(),
        finite_fraction: field.finite_fraction(),
        node_count: graph.len(),
        edge_count: graph.edge_count(),
        field_path,
        graph_json_path,
        graph_binary_path,
    })
}

/// What `cmd_plan` did.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanReport {
    pub path: PlannedPath,
    pub json_path: PathBuf,
    pub ply_path: PathBuf,
}

/// Plan between two points over a stored graph and emit `BASE.path.json`
/// and `BASE.path.ply`.
pub fn cmd_plan(
    graph_path: &Path,
    output_base: &Path,
    start: Point3,
    goal: Point3,
    config: &RunConfig,
) -> Result<PlanReport> {
    let graph = Wtg::load(graph_path)?;
    let path = plan(&graph, start, goal, config.lambda, config.snap_radius)?;
    let json_path = with_suffix(output_base, "path.json");
    path.save_json(&json_path)?;
    let ply_path = with_suffix(output_base, "path.ply");
    path.save_ply(&ply_path)?;
    Ok(PlanReport {
        path,
        json_path,
        ply_path,
    })
}

/// What `cmd_scenegen` did.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneReport {
    pub point_count: usize,
}

/// Generate a synthetic scene; write the cloud and, if requested, the
/// analytic truth document.
pub fn cmd_scenegen(spec: &SceneSpec, out: &Path, truth_out: Option<&Path>) -> Result<SceneReport> {
    let (cloud, truth) = generate(spec)?;
    write_point_cloud(&cloud, out)?;
    if let Some(path) = truth_out {
        truth.save_json(path)?;
    }
    Ok(SceneReport {
        point_count: cloud.len(),
    })
}

/// Convert any pipeline artifact into a PLY rendering for mesh viewers:
/// map containers become point clouds, graphs become colored edge sets,
/// path documents become red polylines, and field documents become clouds
/// colored by how blocked each cell is.
pub fn cmd_export(input: &Path, output: &Path) -> Result<()> {
    let bytes = fs::read(input).map_err(|e| Error::malformed(input, e.to_string()))?;
    if bytes.starts_with(b"MLSK") {
        let map = MLSkiMap::load(input)?;
        let points: Vec<Point3> = map.iter_voxels().flat_map(|v| v.points.to_vec()).collect();
        return write_point_cloud(&crate::io::PointCloud::new(points)?, output);
    }
    if bytes.starts_with(b"WTGB") {
        return Wtg::load_binary(input)?.save_edge_ply(output);
    }
    let value = load_json_document(input)?;
    if value.get("steps").is_some() && value.get("cost").is_some() {
        return path_from_json(&value, input)?.save_ply(output);
    }
    if value.get("nodes").is_some() && value.get("edges").is_some() {
        return Wtg::load_json(input)?.save_edge_ply(output);
    }
    if let Some(cells) = value.get("cells").and_then(Value::as_array) {
        return export_field_document(cells, input, output);
    }
    Err(Error::malformed(
        input,
        "not a map, graph, field, or path artifact",
    ))
}

/// Rebuild a planned path from its JSON document (positions and step data
/// only — enough for rendering).
fn path_from_json(value: &Value, path: &Path) -> Result<PlannedPath> {
    let bad = |what: &str| Error::malformed(path, format!("path document missing {what}"));
    let lambda = value
        .get("lambda")
        .and_then(Value::as_f64)
        .ok_or_else(|| bad("lambda"))?;
    let cost = value
        .get("cost")
        .and_then(Value::as_f64)
        .ok_or_else(|| bad("cost"))?;
    let nodes = value
        .get("nodes")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("nodes"))?
        .iter()
        .map(|n| {
            let id = n
                .get("id")
                .and_then(Value::as_array)
                .ok_or_else(|| bad("node id"))?;
            let pos = n
                .get("pos")
                .and_then(Value::as_array)
                .ok_or_else(|| bad("node pos"))?;
            if id.len() != 3 || pos.len() != 3 {
                return Err(bad("well-formed node"));
            }
            let int = |v: &Value| v.as_i64().ok_or_else(|| bad("integer id"));
            let num = |v: &Value| v.as_f64().ok_or_else(|| bad("numeric pos"));
            Ok(crate::wtg::WtgNode {
                id: (
                    int(&id[0])? as i32,
                    int(&id[1])? as i32,
                    int(&id[2])? as u16,
                ),
                pos: Point3::new(num(&pos[0])?, num(&pos[1])?, num(&pos[2])?),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let steps = value
        .get("steps")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("steps"))?
        .iter()
        .map(|s| {
            let dist = s
                .get("dist")
                .and_then(Value::as_f64)
                .ok_or_else(|| bad("step dist"))?;
            let trav = s
                .get("trav")
                .and_then(Value::as_f64)
                .ok_or_else(|| bad("step trav"))?;
            Ok(crate::planner::PathStep { dist, trav })
        })
        .collect::<Result<Vec<_>>>()?;
    if nodes.is_empty() || nodes.len() != steps.len() + 1 {
        return Err(bad("consistent node/step counts"));
    }
    Ok(PlannedPath {
        lambda,
        cost,
        nodes,
        steps,
    })
}

fn export_field_document(cells: &[Value], input: &Path, output: &Path) -> Result<()> {
    use crate::geom::lerp_color;
    const OPEN: [u8; 3] = [30, 200, 30];
    const BLOCKED: [u8; 3] = [0, 0, 0];
    let mut points = Vec::with_capacity(cells.len());
    let mut colors = Vec::with_capacity(cells.len());
    for cell in cells {
        let pos = cell
            .get("pos")
            .and_then(Value::as_array)
            .filter(|a| a.len() == 3)
            .ok_or_else(|| Error::malformed(input, "field cell missing pos"))?;
        let costs = cell
            .get("costs")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::malformed(input, "field cell missing costs"))?;
        let mut xyz = [0.0; 3];
        for (slot, v) in xyz.iter_mut().zip(pos) {
            *slot = v
                .as_f64()
                .ok_or_else(|| Error::malformed(input, "field cell pos not numeric"))?;
        }
        let blocked = costs.iter().filter(|c| c.is_null()).count();
        points.push(Point3::from(xyz));
        colors.push(lerp_color(
            OPEN,
            BLOCKED,
            blocked as f64 / costs.len().max(1) as f64,
        ));
    }
    write_point_cloud(&crate::io::PointCloud::with_colors(points, colors)?, output)
}

/// `base` with an extra dotted suffix: `runs/demo` → `runs/demo.field.json`.
fn with_suffix(base: &Path, suffix: &str) -> PathBuf {
    let mut name = base
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(".");
    name.push(suffix);
    base.with_file_name(name)
}
