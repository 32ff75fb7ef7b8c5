//! Vehicle-interaction traversability analysis.
//!
//! For every surface voxel and each of 8 discrete headings, a vehicle pose
//! is placed on the cell and judged by simulating its ground contact:
//!
//! 1. the four wheel disks are rasterized onto the grid and each covered
//!    cell contributes the points of the level surface nearest the pose's
//!    own surface height (a cell with no usable level ⇒ *occlusion*);
//! 2. all four 3-wheel support combinations are fitted with least-squares
//!    planes; the plane tilt against world-up is the tip-over proxy;
//! 3. points under the chassis rectangle that rise more than the ground
//!    clearance above a fitted plane ⇒ *collision*.
//!
//! A pose that is occluded, collides, over-tilts, or cannot support a plane
//! fit is *blocked*; otherwise its cost is the worst tangent of the four
//! case tilts. Blocked is a class, not a number — it never mixes with
//! arithmetic on finite costs.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use nalgebra::Vector3;
use rayon::prelude::*;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::geom::{lerp_color, Point3, Rgb};
use crate::io::{json_f64, json_object, json_point, PointCloud};
use crate::simplify::{eigen3_symmetric, voxel_covariance};
use crate::skimap::MLSkiMap;

/// One of the 8 discrete driving directions, 45° apart; index 0 points
/// along +x and indices increase counter-clockwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Heading(u8);

impl Heading {
    pub const COUNT: usize = 8;
    pub const ALL: [Heading; 8] = [
        Heading(0),
        Heading(1),
        Heading(2),
        Heading(3),
        Heading(4),
        Heading(5),
        Heading(6),
        Heading(7),
    ];

    pub fn from_index(index: usize) -> Option<Heading> {
        (index < Self::COUNT).then_some(Heading(index as u8))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// Yaw in radians.
    pub fn angle(self) -> f64 {
        self.0 as f64 * std::f64::consts::FRAC_PI_4
    }

    /// Offset `(di, dj)` of the neighbour column this heading drives into:
    /// `(round(cos φ), round(sin φ))`.
    pub fn step(self) -> (i32, i32) {
        match self.0 {
            0 => (1, 0),
            1 => (1, 1),
            2 => (0, 1),
            3 => (-1, 1),
            4 => (-1, 0),
            5 => (-1, -1),
            6 => (0, -1),
            7 => (1, -1),
            _ => unreachable!("heading index is always < 8"),
        }
    }

    /// The heading pointing from cell `(i, j)` toward neighbour cell
    /// `(i + di, j + dj)`, when the offset is one of the 8 king moves.
    pub fn from_step(di: i32, dj: i32) -> Option<Heading> {
        Heading::ALL.into_iter().find(|h| h.step() == (di, dj))
    }
}

/// Vehicle geometry: wheel centers sit at `(±W, ±L)` in the vehicle frame
/// (`W` = half track on x, `L` = half wheelbase on y), each wheel touching
/// the ground in a disk of radius `R`. `H` is the clearance between the
/// wheel contact plane and the chassis underside; `max_tilt` the static
/// tip-over bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleModel {
    half_track: f64,
    half_wheelbase: f64,
    wheel_radius: f64,
    ground_clearance: f64,
    max_tilt: f64,
}

impl Default for VehicleModel {
    /// A compact four-wheel platform: 0.47 m track, 0.35 m wheelbase,
    /// 0.12 m wheels, 0.09 m clearance, 35° tip-over limit.
    fn default() -> VehicleModel {
        VehicleModel::new(0.235, 0.175, 0.12, 0.09, 35.0_f64.to_radians())
            .expect("reference dimensions are valid")
    }
}

impl VehicleModel {
    pub fn new(
        half_track: f64,
        half_wheelbase: f64,
        wheel_radius: f64,
        ground_clearance: f64,
        max_tilt: f64,
    ) -> Result<VehicleModel> {
        for (name, v) in [
            ("half track W", half_track),
            ("half wheelbase L", half_wheelbase),
            ("wheel radius R", wheel_radius),
            ("ground clearance H", ground_clearance),
            ("max tilt", max_tilt),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "vehicle {name} must be positive and finite, got {v}"
                )));
            }
        }
        if max_tilt >= std::f64::consts::FRAC_PI_2 {
            return Err(Error::InvalidConfig(format!(
                "max tilt must be below 90°, got {} rad",
                max_tilt
            )));
        }
        Ok(VehicleModel {
            half_track,
            half_wheelbase,
            wheel_radius,
            ground_clearance,
            max_tilt,
        })
    }

    pub fn half_track(&self) -> f64 {
        self.half_track
    }

    pub fn half_wheelbase(&self) -> f64 {
        self.half_wheelbase
    }

    pub fn wheel_radius(&self) -> f64 {
        self.wheel_radius
    }

    pub fn ground_clearance(&self) -> f64 {
        self.ground_clearance
    }

    pub fn max_tilt(&self) -> f64 {
        self.max_tilt
    }

    /// Wheel center offsets in the vehicle frame, in A, B, C, D order.
    pub fn wheel_offsets(&self) -> [(f64, f64); 4] {
        let (w, l) = (self.half_track, self.half_wheelbase);
        [(-w, l), (-w, -l), (w, l), (w, -l)]
    }

    /// Farthest ground-plane reach of any footprint point from the pose
    /// center: wheel center distance plus the disk radius.
    pub fn footprint_reach(&self) -> f64 {
        self.half_track.hypot(self.half_wheelbase) + self.wheel_radius
    }

    /// Parse a key-value profile file with keys `W`, `L`, `R`, `H`,
    /// `max_tilt_deg` (one `key = value` per line, `#` comments).
    pub fn from_profile(path: &Path) -> Result<VehicleModel> {
        let text = fs::read_to_string(path).map_err(|e| Error::malformed(path, e.to_string()))?;
        let mut values: BTreeMap<&str, f64> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::malformed(path, format!("line {}: expected key = value", lineno + 1))
            })?;
            let number: f64 = value.trim().parse().map_err(|_| {
                Error::malformed(path, format!("line {}: bad number `{}`", lineno + 1, value))
            })?;
            values.insert(
                match key.trim() {
                    "W" => "W",
                    "L" => "L",
                    "R" => "R",
                    "H" => "H",
                    "max_tilt_deg" => "max_tilt_deg",
                    other => {
                        return Err(Error::malformed(
                            path,
                            format!("line {}: unknown key `{other}`", lineno + 1),
                        ));
                    }
                },
                number,
            );
        }
        let get = |key: &str| {
            values
                .get(key)
                .copied()
                .ok_or_else(|| Error::malformed(path, format!("missing key `{key}`")))
        };
        VehicleModel::new(
            get("W")?,
            get("L")?,
            get("R")?,
            get("H")?,
            get("max_tilt_deg")?.to_radians(),
        )
    }
}

/// Vehicle placement: frame origin over the map x-y plane plus a discrete
/// heading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose2D {
    pub tx: f64,
    pub ty: f64,
    pub heading: Heading,
}

/// Map a vehicle-frame point into the map frame: rotate by the pose heading
/// about z, then translate in x-y (z passes through).
pub fn vehicle_to_map(c: Point3, pose: &Pose2D) -> Point3 {
    let (sin, cos) = pose.heading.angle().sin_cos();
    Point3::new(
        cos * c.x - sin * c.y + pose.tx,
        sin * c.x + cos * c.y + pose.ty,
        c.z,
    )
}

/// Ground contact disk of one wheel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WheelDisk {
    pub cx: f64,
    pub cy: f64,
    pub radius: f64,
}

/// The four wheel ground disks of a posed vehicle, in A, B, C, D order.
pub fn wheel_footprints(pose: &Pose2D, vehicle: &VehicleModel) -> [WheelDisk; 4] {
    vehicle.wheel_offsets().map(|(x, y)| {
        let center = vehicle_to_map(Point3::new(x, y, 0.0), pose);
        WheelDisk {
            cx: center.x,
            cy: center.y,
            radius: vehicle.wheel_radius(),
        }
    })
}

/// Least-squares plane through a point set, described by its unit normal
/// (oriented upward) and centroid.
#[derive(Debug, Clone, Copy)]
pub struct PlaneFit {
    pub normal: Vector3<f64>,
    pub centroid: Point3,
    pub count: usize,
    /// Root-mean-square point distance from the plane.
    pub rms: f64,
}

/// Fit a plane by taking the minimal-eigenvalue direction of the point
/// covariance as the normal. Fails on fewer than 3 points or on sets with
/// no 2D spread (collinear/coincident).
pub fn fit_plane(points: &[Point3]) -> Result<PlaneFit> {
    if points.len() < 3 {
        return Err(Error::DegenerateFootprint {
            count: points.len(),
        });
    }
    let center = crate::simplify::centroid(points)?;
    let covariance = voxel_covariance(points, center)?;
    let eigen = eigen3_symmetric(&covariance)?;
    // Rank < 2: no unique plane. λ0 ≈ 0 means all points coincide; a tiny
    // λ1 relative to λ0 means they are collinear.
    if eigen.values[0] <= 0.0 || eigen.values[1] / eigen.values[0] <= 1e-9 {
        return Err(Error::DegenerateFootprint {
            count: points.len(),
        });
    }
    let mut normal = eigen.vectors[2];
    if normal.z < 0.0 {
        normal = -normal;
    }
    Ok(PlaneFit {
        normal,
        centroid: center,
        count: points.len(),
        rms: eigen.values[2].max(0.0).sqrt(),
    })
}

/// Angle between the fitted normal and world-up, in `[0, π/2]`.
pub fn tilt_angle(fit: &PlaneFit) -> f64 {
    fit.normal.z.clamp(-1.0, 1.0).acos()
}

/// True when any region point rises more than `clearance` above the fitted
/// wheel-contact plane.
pub fn chassis_collision(fit: &PlaneFit, region_points: &[Point3], clearance: f64) -> bool {
    region_points
        .iter()
        .any(|p| fit.normal.dot(&(*p - fit.centroid)) > clearance)
}

/// Pose evaluation outcome: a finite tilt-tangent cost, or blocked.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cost {
    Traversable(f64),
    Blocked,
}

impl Cost {
    pub fn is_blocked(self) -> bool {
        matches!(self, Cost::Blocked)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Cost::Traversable(v) => Some(v),
            Cost::Blocked => None,
        }
    }
}

/// Analysis parameters beyond the vehicle itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraversabilityConfig {
    /// Vertical window for matching footprint cells to a level: a cell's
    /// level is usable only if its surface height is within this distance
    /// of the pose's surface height. Conventionally set to the graph
    /// connectivity threshold — a level a wheel cannot reach by driving is
    /// a drop, and hanging a wheel over a drop is occlusion.
    pub level_window: f64,
}

impl TraversabilityConfig {
    pub fn new(level_window: f64) -> Result<TraversabilityConfig> {
        if !level_window.is_finite() || level_window <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "level window must be positive and finite, got {level_window}"
            )));
        }
        Ok(TraversabilityConfig { level_window })
    }
}

/// All cells whose center lies inside the disk, as `(i, j)` indices.
fn covered_cells(map: &MLSkiMap, disk: &WheelDisk) -> Vec<(i32, i32)> {
    let d = map.config().cell_size();
    let origin = map.config().origin();
    let lo_i = ((disk.cx - disk.radius - origin.x) / d).floor() as i32;
    let hi_i = ((disk.cx + disk.radius - origin.x) / d).floor() as i32;
    let lo_j = ((disk.cy - disk.radius - origin.y) / d).floor() as i32;
    let hi_j = ((disk.cy + disk.radius - origin.y) / d).floor() as i32;
    let mut cells = Vec::new();
    for i in lo_i..=hi_i {
        for j in lo_j..=hi_j {
            let (cx, cy) = map.config().column_center(i, j);
            if (cx - disk.cx).hypot(cy - disk.cy) <= disk.radius {
                cells.push((i, j));
            }
        }
    }
    cells
}

/// Surface (level index, surface-voxel center z, surface points) of the
/// level in column `(i, j)` whose surface height is nearest `reference_z`
/// within `window`. Ties prefer the lower level.
fn select_level(
    map: &MLSkiMap,
    i: i32,
    j: i32,
    reference_z: f64,
    window: f64,
) -> Option<(u16, f64, &[Point3])> {
    let column = map.column(i, j)?;
    let d = map.config().cell_size();
    let origin_z = map.config().origin().z;
    let mut best: Option<(u16, f64, &[Point3])> = None;
    for (l, band) in column.bands().iter().enumerate() {
        let (k, points) = band.surface();
        let z = origin_z + (k as f64 + 0.5) * d;
        let gap = (z - reference_z).abs();
        if gap <= window {
            match best {
                // Strict improvement required: equal gaps keep the lower level.
                Some((_, bz, _)) if (bz - reference_z).abs() <= gap => {}
                _ => best = Some((l as u16, z, points)),
            }
        }
    }
    best
}

/// Collect the support points under one wheel disk. For each covered cell
/// the level nearest `reference_z` (within `c_ref`) contributes its surface
/// voxel's points; `occluded` reports any covered cell with no usable level
/// — including cells with no points at all.
pub fn footprint_points(
    map: &MLSkiMap,
    disk: &WheelDisk,
    reference_z: f64,
    c_ref: f64,
) -> (Vec<Point3>, bool) {
    let mut points = Vec::new();
    let mut occluded = false;
    for (i, j) in covered_cells(map, disk) {
        match select_level(map, i, j, reference_z, c_ref) {
            Some((_, _, surface)) => points.extend_from_slice(surface),
            None => occluded = true,
        }
    }
    (points, occluded)
}

/// Surface points of cells whose center falls inside the chassis rectangle
/// (the wheel-center box, `|x| ≤ W ∧ |y| ≤ L` in the vehicle frame). Cells
/// without a usable level contribute nothing — no data is no evidence.
fn chassis_region_points(
    map: &MLSkiMap,
    pose: &Pose2D,
    vehicle: &VehicleModel,
    reference_z: f64,
    window: f64,
) -> Vec<Point3> {
    let d = map.config().cell_size();
    let origin = map.config().origin();
    let reach = vehicle.half_track().hypot(vehicle.half_wheelbase());
    let lo_i = ((pose.tx - reach - origin.x) / d).floor() as i32;
    let hi_i = ((pose.tx + reach - origin.x) / d).floor() as i32;
    let lo_j = ((pose.ty - reach - origin.y) / d).floor() as i32;
    let hi_j = ((pose.ty + reach - origin.y) / d).floor() as i32;
    let (sin, cos) = pose.heading.angle().sin_cos();
    let mut points = Vec::new();
    for i in lo_i..=hi_i {
        for j in lo_j..=hi_j {
            let (cx, cy) = map.config().column_center(i, j);
            let (dx, dy) = (cx - pose.tx, cy - pose.ty);
            // Inverse rotation into the vehicle frame.
            let x_v = cos * dx + sin * dy;
            let y_v = -sin * dx + cos * dy;
            if x_v.abs() <= vehicle.half_track() && y_v.abs() <= vehicle.half_wheelbase() {
                if let Some((_, _, surface)) = select_level(map, i, j, reference_z, window) {
                    points.extend_from_slice(surface);
                }
            }
        }
    }
    points
}

/// The four 3-wheel support combinations (ABC, ABD, ACD, BCD).
const WHEEL_CASES: [[usize; 3]; 4] = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];

/// Evaluate one pose on the surface voxel of `(i, j, level)`: blocked on
/// occlusion, over-tilt, chassis collision or a degenerate fit in *any* of
/// the four 3-wheel cases; otherwise the worst case's `tan(tilt)`.
pub fn pose_cost(
    map: &MLSkiMap,
    i: i32,
    j: i32,
    level: u16,
    heading: Heading,
    vehicle: &VehicleModel,
    config: &TraversabilityConfig,
) -> Cost {
    let Some(surface) = map.surface_voxel(i, j, level) else {
        return Cost::Blocked;
    };
    let reference_z = surface.center.z;
    let (tx, ty) = map.config().column_center(i, j);
    let pose = Pose2D { tx, ty, heading };

    let disks = wheel_footprints(&pose, vehicle);
    let mut wheel_points: [Vec<Point3>; 4] = Default::default();
    for (wheel, disk) in disks.iter().enumerate() {
        let (points, occluded) = footprint_points(map, disk, reference_z, config.level_window);
        if occluded || points.is_empty() {
            return Cost::Blocked;
        }
        wheel_points[wheel] = points;
    }

    let region = chassis_region_points(map, &pose, vehicle, reference_z, config.level_window);

    let mut worst: f64 = 0.0;
    for case in WHEEL_CASES {
        let mut support = Vec::with_capacity(case.iter().map(|&w| wheel_points[w].len()).sum());
        for &wheel in &case {
            support.extend_from_slice(&wheel_points[wheel]);
        }
        let Ok(fit) = fit_plane(&support) else {
            return Cost::Blocked;
        };
        let tilt = tilt_angle(&fit);
        if tilt > vehicle.max_tilt() {
            return Cost::Blocked;
        }
        if chassis_collision(&fit, &region, vehicle.ground_clearance()) {
            return Cost::Blocked;
        }
        worst = worst.max(tilt.tan());
    }
    Cost::Traversable(worst)
}

/// Directional cost vectors for every surface voxel of the map.
#[derive(Debug, Clone, PartialEq)]
pub struct TraversabilityField {
    cells: BTreeMap<(i32, i32, u16), [Cost; 8]>,
}

impl TraversabilityField {
    pub fn get(&self, i: i32, j: i32, level: u16) -> Option<&[Cost; 8]> {
        self.cells.get(&(i, j, level))
    }

    pub fn cost(&self, i: i32, j: i32, level: u16, heading: Heading) -> Option<Cost> {
        self.get(i, j, level).map(|costs| costs[heading.index()])
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((i32, i32, u16), &[Cost; 8])> {
        self.cells.iter().map(|(&key, costs)| (key, costs))
    }

    /// Share of (cell, heading) entries that are finite.
    pub fn finite_fraction(&self) -> f64 {
        if self.cells.is_empty() {
            return 0.0;
        }
        let finite: usize = self
            .cells
            .values()
            .map(|costs| costs.iter().filter(|c| !c.is_blocked()).count())
            .sum();
        finite as f64 / (self.cells.len() * Heading::COUNT) as f64
    }

    /// JSON rendering: one record per cell with its surface position and the
    /// 8 costs (blocked as `null`). Positions come from `map`, which must be
    /// the map this field was computed from.
    pub fn to_json_value(&self, map: &MLSkiMap) -> Result<Value> {
        let mut cells = Vec::with_capacity(self.cells.len());
        for (&(i, j, l), costs) in &self.cells {
            let surface =
                map.surface_voxel(i, j, l)
                    .ok_or(Error::FieldMismatch { i, j, level: l })?;
            let rendered: Result<Vec<Value>> = costs
                .iter()
                .map(|c| match c.finite() {
                    Some(v) => json_f64(v),
                    None => Ok(Value::Null),
                })
                .collect();
            cells.push(json_object(vec![
                (
                    "id",
                    Value::Array(vec![Value::from(i), Value::from(j), Value::from(l)]),
                ),
                ("pos", json_point(surface.center)?),
                ("costs", Value::Array(rendered?)),
            ]));
        }
        Ok(json_object(vec![("cells", Value::Array(cells))]))
    }
}

/// Evaluate all 8 headings of every surface voxel. Poses are independent,
/// so the sweep runs in parallel; the result is identical regardless of
/// schedule.
pub fn compute_field(
    map: &MLSkiMap,
    vehicle: &VehicleModel,
    config: &TraversabilityConfig,
) -> TraversabilityField {
    let keys: Vec<(i32, i32, u16)> = map
        .iter_surface_voxels()
        .map(|v| (v.key.i, v.key.j, v.key.l))
        .collect();
    let entries: Vec<((i32, i32, u16), [Cost; 8])> = keys
        .par_iter()
        .map(|&(i, j, l)| {
            let costs =
                Heading::ALL.map(|heading| pose_cost(map, i, j, l, heading, vehicle, config));
            ((i, j, l), costs)
        })
        .collect();
    TraversabilityField {
        cells: entries.into_iter().collect(),
    }
}

/// Color every surface voxel's points by how blocked the cell is: green for
/// all-headings-finite through black for fully blocked.
pub fn field_color_cloud(map: &MLSkiMap, field: &TraversabilityField) -> Result<PointCloud> {
    const OPEN: Rgb = [30, 200, 30];
    const BLOCKED: Rgb = [0, 0, 0];
    let mut points = Vec::new();
    let mut colors = Vec::new();
    for ((i, j, l), costs) in field.iter() {
        let surface = map
            .surface_voxel(i, j, l)
            .ok_or(Error::FieldMismatch { i, j, level: l })?;
        let blocked = costs.iter().filter(|c| c.is_blocked()).count();
        let color = lerp_color(OPEN, BLOCKED, blocked as f64 / Heading::COUNT as f64);
        for &p in surface.points {
            points.push(p);
            colors.push(color);
        }
    }
    PointCloud::with_colors(points, colors)
}
