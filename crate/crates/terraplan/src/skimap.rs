//! Sparse multi-level voxel map.
//!
//! Points are binned into cubic voxels of edge `cell_size`. Voxels sharing an
//! `(i, j)` ground-plane index form a *column*; within a column, runs of
//! occupied voxels are grouped into *levels* wherever the vertical gap
//! between consecutive occupied voxels stays at or below `level_gap`. A desk
//! over a floor therefore yields two levels in the same column — each with
//! its own *surface voxel*, the topmost voxel of the level — which is what
//! lets the rest of the pipeline reason about stacked drivable surfaces
//! instead of a single height field.
//!
//! Storage is a sorted index per layer (x → y → level → z), so point lookup,
//! column lookup and ordered iteration are all logarithmic or streaming.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde_json::Value;

use crate::bytes::{put_f64, put_i32, put_u32, put_u64, ByteReader};
use crate::error::{Error, Result};
use crate::geom::Point3;
use crate::io::{json_f64, json_object, json_point, PointCloud};

const MAGIC: &[u8; 4] = b"MLSK";
const VERSION: u32 = 1;
/// Levels are indexed by `u16`; a column may not split into more bands.
const MAX_LEVELS_PER_COLUMN: usize = u16::MAX as usize + 1;

/// Geometry of the voxel grid: cell edge length, the vertical gap above
/// which a column splits into separate levels, and the grid origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapConfig {
    cell_size: f64,
    level_gap: f64,
    origin: Point3,
}

impl MapConfig {
    pub fn new(cell_size: f64, level_gap: f64) -> Result<MapConfig> {
        if !cell_size.is_finite() || cell_size <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "cell size must be positive and finite, got {cell_size}"
            )));
        }
        if !level_gap.is_finite() || level_gap <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "level gap must be positive and finite, got {level_gap}"
            )));
        }
        Ok(MapConfig {
            cell_size,
            level_gap,
            origin: Point3::ORIGIN,
        })
    }

    pub fn with_origin(mut self, origin: Point3) -> Result<MapConfig> {
        if !origin.is_finite() {
            return Err(Error::NonFiniteValue);
        }
        self.origin = origin;
        Ok(self)
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn level_gap(&self) -> f64 {
        self.level_gap
    }

    pub fn origin(&self) -> Point3 {
        self.origin
    }

    /// Grid indices of the voxel containing `p` (floor semantics per axis).
    pub fn cell_index(&self, p: Point3) -> (i32, i32, i32) {
        let bin = |v: f64, o: f64| ((v - o) / self.cell_size).floor() as i32;
        (
            bin(p.x, self.origin.x),
            bin(p.y, self.origin.y),
            bin(p.z, self.origin.z),
        )
    }

    /// Center of voxel `(i, j, k)`.
    pub fn voxel_center(&self, i: i32, j: i32, k: i32) -> Point3 {
        Point3::new(
            self.origin.x + (i as f64 + 0.5) * self.cell_size,
            self.origin.y + (j as f64 + 0.5) * self.cell_size,
            self.origin.z + (k as f64 + 0.5) * self.cell_size,
        )
    }

    /// Ground-plane center of column `(i, j)`.
    pub fn column_center(&self, i: i32, j: i32) -> (f64, f64) {
        (
            self.origin.x + (i as f64 + 0.5) * self.cell_size,
            self.origin.y + (j as f64 + 0.5) * self.cell_size,
        )
    }
}

/// Address of one voxel: column `(i, j)`, level `l` within the column
/// (0 = lowest), vertical index `k` of the voxel itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VoxelKey {
    pub i: i32,
    pub j: i32,
    pub l: u16,
    pub k: i32,
}

/// Borrowed view of one voxel: its address, center and stored points.
#[derive(Debug, Clone, Copy)]
pub struct VoxelRef<'a> {
    pub key: VoxelKey,
    pub center: Point3,
    pub points: &'a [Point3],
}

/// Per-level digest returned by [`MLSkiMap::column_levels`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelSummary {
    pub level: u16,
    /// Lowest occupied voxel index of the level.
    pub min_k: i32,
    /// Highest occupied voxel index of the level; its voxel is the surface.
    pub max_k: i32,
    pub surface: VoxelKey,
}

/// One contiguous band of occupied voxels in a column, keyed by `k`.
#[derive(Debug, Clone, Default, PartialEq)]
pub(crate) struct LevelBand {
    voxels: BTreeMap<i32, Vec<Point3>>,
}

impl LevelBand {
    /// Topmost voxel of the band. Bands are non-empty by construction.
    pub(crate) fn surface(&self) -> (i32, &[Point3]) {
        let (k, points) = self
            .voxels
            .last_key_value()
            .expect("level bands are never empty");
        (*k, points)
    }

    fn min_k(&self) -> i32 {
        *self
            .voxels
            .first_key_value()
            .expect("level bands are never empty")
            .0
    }
}

/// All occupied voxels sharing one `(i, j)` index, grouped into levels
/// (ascending in `z`).
#[derive(Debug, Clone, Default, PartialEq)]
pub(crate) struct Column {
    bands: Vec<LevelBand>,
}

impl Column {
    fn from_voxels(mut voxels: BTreeMap<i32, Vec<Point3>>, config: &MapConfig) -> Result<Column> {
        let keys: Vec<i32> = voxels.keys().copied().collect();
        let groups = level_partition(&keys, config.cell_size, config.level_gap);
        if groups.len() > MAX_LEVELS_PER_COLUMN {
            return Err(Error::InvalidConfig(format!(
                "column splits into {} levels, more than the supported {MAX_LEVELS_PER_COLUMN}",
                groups.len()
            )));
        }
        let bands = groups
            .into_iter()
            .map(|group| {
                let mut band = BTreeMap::new();
                for k in group {
                    band.insert(k, voxels.remove(&k).expect("partition covers every key"));
                }
                LevelBand { voxels: band }
            })
            .collect();
        Ok(Column { bands })
    }

    fn insert(&mut self, k: i32, p: Point3, config: &MapConfig) -> Result<u16> {
        let mut voxels = BTreeMap::new();
        for band in std::mem::take(&mut self.bands) {
            voxels.extend(band.voxels);
        }
        voxels.entry(k).or_default().push(p);
        *self = Column::from_voxels(voxels, config)?;
        Ok(self.level_of(k).expect("inserted voxel is in some band"))
    }

    fn level_of(&self, k: i32) -> Option<u16> {
        self.bands
            .iter()
            .position(|b| b.voxels.contains_key(&k))
            .map(|l| l as u16)
    }

    pub(crate) fn bands(&self) -> &[LevelBand] {
        &self.bands
    }
}

/// Group sorted occupied voxel indices of one column into levels: a new
/// level starts wherever the step to the previous occupied voxel,
/// `Δk · cell_size`, exceeds `level_gap`.
pub fn level_partition(occupied: &[i32], cell_size: f64, level_gap: f64) -> Vec<Vec<i32>> {
    let mut groups: Vec<Vec<i32>> = Vec::new();
    for &k in occupied {
        match groups.last_mut() {
            Some(group) if (k - *group.last().unwrap()) as f64 * cell_size <= level_gap => {
                group.push(k);
            }
            _ => groups.push(vec![k]),
        }
    }
    groups
}

/// The multi-level voxel map. See the module docs for the data model.
#[derive(Debug, Clone, PartialEq)]
pub struct MLSkiMap {
    config: MapConfig,
    columns: BTreeMap<i32, BTreeMap<i32, Column>>,
    point_count: usize,
}

impl MLSkiMap {
    /// An empty map; fill it with [`MLSkiMap::insert_point`].
    pub fn new(config: MapConfig) -> MLSkiMap {
        MLSkiMap {
            config,
            columns: BTreeMap::new(),
            point_count: 0,
        }
    }

    /// Bin a whole cloud at once.
    pub fn build(cloud: &PointCloud, config: MapConfig) -> Result<MLSkiMap> {
        let mut raw: BTreeMap<(i32, i32), BTreeMap<i32, Vec<Point3>>> = BTreeMap::new();
        for &p in cloud.points() {
            let (i, j, k) = config.cell_index(p);
            raw.entry((i, j)).or_default().entry(k).or_default().push(p);
        }
        let mut columns: BTreeMap<i32, BTreeMap<i32, Column>> = BTreeMap::new();
        for ((i, j), voxels) in raw {
            columns
                .entry(i)
                .or_default()
                .insert(j, Column::from_voxels(voxels, &config)?);
        }
        Ok(MLSkiMap {
            config,
            columns,
            point_count: cloud.len(),
        })
    }

    /// Add a single point, re-partitioning its column's levels as needed.
    /// Returns the key of the voxel the point landed in (whose level index
    /// reflects the column *after* the update).
    pub fn insert_point(&mut self, p: Point3) -> Result<VoxelKey> {
        if !p.is_finite() {
            return Err(Error::NonFiniteValue);
        }
        let (i, j, k) = self.config.cell_index(p);
        let column = self.columns.entry(i).or_default().entry(j).or_default();
        let l = column.insert(k, p, &self.config)?;
        self.point_count += 1;
        Ok(VoxelKey { i, j, l, k })
    }

    pub fn config(&self) -> &MapConfig {
        &self.config
    }

    pub fn point_count(&self) -> usize {
        self.point_count
    }

    pub fn voxel_count(&self) -> usize {
        self.iter_voxels().count()
    }

    pub fn column_count(&self) -> usize {
        self.columns.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub(crate) fn column(&self, i: i32, j: i32) -> Option<&Column> {
        self.columns.get(&i)?.get(&j)
    }

    /// Look up one voxel by its full key. Returns `None` when the voxel is
    /// unoccupied or the level index does not match the column's partition.
    pub fn voxel(&self, key: VoxelKey) -> Option<VoxelRef<'_>> {
        let band = self.column(key.i, key.j)?.bands.get(key.l as usize)?;
        let points = band.voxels.get(&key.k)?;
        Some(VoxelRef {
            key,
            center: self.config.voxel_center(key.i, key.j, key.k),
            points,
        })
    }

    /// The surface (topmost) voxel of level `l` in column `(i, j)`.
    pub fn surface_voxel(&self, i: i32, j: i32, l: u16) -> Option<VoxelRef<'_>> {
        let band = self.column(i, j)?.bands.get(l as usize)?;
        let (k, points) = band.surface();
        Some(VoxelRef {
            key: VoxelKey { i, j, l, k },
            center: self.config.voxel_center(i, j, k),
            points,
        })
    }

    /// Summaries of every level in column `(i, j)`, ascending in `z`.
    /// Columns absent from the map yield an empty vector.
    pub fn column_levels(&self, i: i32, j: i32) -> Vec<LevelSummary> {
        let Some(column) = self.column(i, j) else {
            return Vec::new();
        };
        column
            .bands
            .iter()
            .enumerate()
            .map(|(l, band)| {
                let l = l as u16;
                let (max_k, _) = band.surface();
                LevelSummary {
                    level: l,
                    min_k: band.min_k(),
                    max_k,
                    surface: VoxelKey { i, j, l, k: max_k },
                }
            })
            .collect()
    }

    /// Occupied columns in sorted `(i, j)` order.
    pub fn iter_columns(&self) -> impl Iterator<Item = (i32, i32)> + '_ {
        self.columns
            .iter()
            .flat_map(|(&i, row)| row.keys().map(move |&j| (i, j)))
    }

    /// Every voxel in sorted `(i, j, l, k)` order.
    pub fn iter_voxels(&self) -> impl Iterator<Item = VoxelRef<'_>> {
        self.columns.iter().flat_map(move |(&i, row)| {
            row.iter().flat_map(move |(&j, column)| {
                column.bands.iter().enumerate().flat_map(move |(l, band)| {
                    band.voxels.iter().map(move |(&k, points)| VoxelRef {
                        key: VoxelKey {
                            i,
                            j,
                            l: l as u16,
                            k,
                        },
                        center: self.config.voxel_center(i, j, k),
                        points,
                    })
                })
            })
        })
    }

    /// Every surface voxel (one per level per column), sorted by `(i, j, l)`.
    pub fn iter_surface_voxels(&self) -> impl Iterator<Item = VoxelRef<'_>> {
        self.columns.iter().flat_map(move |(&i, row)| {
            row.iter().flat_map(move |(&j, column)| {
                column.bands.iter().enumerate().map(move |(l, band)| {
                    let (k, points) = band.surface();
                    VoxelRef {
                        key: VoxelKey {
                            i,
                            j,
                            l: l as u16,
                            k,
                        },
                        center: self.config.voxel_center(i, j, k),
                        points,
                    }
                })
            })
        })
    }

    /// Rebuild the map with the same voxel structure but transformed point
    /// lists. `f` must return a non-empty subset for every voxel (the
    /// simplification sweep always keeps at least one point).
    pub(crate) fn map_voxels<F>(&self, mut f: F) -> MLSkiMap
    where
        F: FnMut(VoxelRef<'_>) -> Vec<Point3>,
    {
        let mut point_count = 0;
        let columns = self
            .columns
            .iter()
            .map(|(&i, row)| {
                let row = row
                    .iter()
                    .map(|(&j, column)| {
                        let bands = column
                            .bands
                            .iter()
                            .enumerate()
                            .map(|(l, band)| {
                                let voxels = band
                                    .voxels
                                    .iter()
                                    .map(|(&k, points)| {
                                        let kept = f(VoxelRef {
                                            key: VoxelKey {
                                                i,
                                                j,
                                                l: l as u16,
                                                k,
                                            },
                                            center: self.config.voxel_center(i, j, k),
                                            points,
                                        });
                                        assert!(
                                            !kept.is_empty(),
                                            "voxel transform must keep at least one point"
                                        );
                                        point_count += kept.len();
                                        (k, kept)
                                    })
                                    .collect();
                                LevelBand { voxels }
                            })
                            .collect();
                        (j, Column { bands })
                    })
                    .collect();
                (i, row)
            })
            .collect();
        MLSkiMap {
            config: self.config,
            columns,
            point_count,
        }
    }

    // -----------------------------------------------------------------------
    // Serialization

    /// Write the map as a binary container (`MLSK` magic, version 1, all
    /// scalars little-endian).
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        put_u32(&mut out, VERSION);
        put_f64(&mut out, self.config.cell_size);
        put_f64(&mut out, self.config.level_gap);
        put_f64(&mut out, self.config.origin.x);
        put_f64(&mut out, self.config.origin.y);
        put_f64(&mut out, self.config.origin.z);
        put_u64(&mut out, self.column_count() as u64);
        for (&i, row) in &self.columns {
            for (&j, column) in row {
                put_i32(&mut out, i);
                put_i32(&mut out, j);
                put_u32(&mut out, column.bands.len() as u32);
                for band in &column.bands {
                    put_u32(&mut out, band.voxels.len() as u32);
                    for (&k, points) in &band.voxels {
                        put_i32(&mut out, k);
                        put_u32(&mut out, points.len() as u32);
                        for p in points {
                            put_f64(&mut out, p.x);
                            put_f64(&mut out, p.y);
                            put_f64(&mut out, p.z);
                        }
                    }
                }
            }
        }
        fs::write(path, out)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<MLSkiMap> {
        let bytes = fs::read(path).map_err(|e| Error::malformed(path, e.to_string()))?;
        let mut r = ByteReader::new(&bytes);
        let truncated = || Error::malformed(path, "truncated map container");
        if r.take(4).ok_or_else(truncated)? != MAGIC {
            return Err(Error::malformed(path, "not a map container (bad magic)"));
        }
        let version = r.u32().ok_or_else(truncated)?;
        if version != VERSION {
            return Err(Error::VersionMismatch {
                found: version,
                expected: VERSION,
            });
        }
        let cell_size = r.f64().ok_or_else(truncated)?;
        let level_gap = r.f64().ok_or_else(truncated)?;
        let ox = r.f64().ok_or_else(truncated)?;
        let oy = r.f64().ok_or_else(truncated)?;
        let oz = r.f64().ok_or_else(truncated)?;
        let config = MapConfig::new(cell_size, level_gap)?
            .with_origin(Point3::new(ox, oy, oz))
            .map_err(|_| Error::malformed(path, "non-finite origin"))?;

        let n_columns = r.u64().ok_or_else(truncated)?;
        let mut columns: BTreeMap<i32, BTreeMap<i32, Column>> = BTreeMap::new();
        let mut point_count = 0usize;
        for _ in 0..n_columns {
            let i = r.i32().ok_or_else(truncated)?;
            let j = r.i32().ok_or_else(truncated)?;
            let n_levels = r.u32().ok_or_else(truncated)?;
            // Levels are re-derived from the voxel data; the stored grouping
            // only shapes the byte layout.
            let mut voxels: BTreeMap<i32, Vec<Point3>> = BTreeMap::new();
            for _ in 0..n_levels {
                let n_voxels = r.u32().ok_or_else(truncated)?;
                for _ in 0..n_voxels {
                    let k = r.i32().ok_or_else(truncated)?;
                    let n_points = r.u32().ok_or_else(truncated)?;
                    if n_points == 0 {
                        return Err(Error::malformed(path, "voxel with zero points"));
                    }
                    let mut points = Vec::with_capacity(n_points as usize);
                    for _ in 0..n_points {
                        let x = r.f64().ok_or_else(truncated)?;
                        let y = r.f64().ok_or_else(truncated)?;
                        let z = r.f64().ok_or_else(truncated)?;
                        let p = Point3::new(x, y, z);
                        if !p.is_finite() {
                            return Err(Error::NonFiniteValue);
                        }
                        if config.cell_index(p) != (i, j, k) {
                            return Err(Error::malformed(path, "point stored outside its voxel"));
                        }
                        points.push(p);
                    }
                    point_count += points.len();
                    if voxels.insert(k, points).is_some() {
                        return Err(Error::malformed(path, "duplicate voxel in column"));
                    }
                }
            }
            let column = Column::from_voxels(voxels, &config)?;
            if columns.entry(i).or_default().insert(j, column).is_some() {
                return Err(Error::malformed(path, "duplicate column"));
            }
        }
        if !r.is_exhausted() {
            return Err(Error::malformed(path, "trailing bytes after map data"));
        }
        Ok(MLSkiMap {
            config,
            columns,
            point_count,
        })
    }

    /// Human-inspectable JSON rendering (columns → levels → voxels → points).
    pub fn to_json_value(&self) -> Result<Value> {
        let mut columns = Vec::new();
        for (&i, row) in &self.columns {
            for (&j, column) in row {
                let mut levels = Vec::new();
                for (l, band) in column.bands.iter().enumerate() {
                    let mut voxels = Vec::new();
                    for (&k, points) in &band.voxels {
                        let pts: Result<Vec<Value>> =
                            points.iter().map(|&p| json_point(p)).collect();
                        voxels.push(json_object(vec![
                            ("k", Value::from(k)),
                            ("points", Value::Array(pts?)),
                        ]));
                    }
                    levels.push(json_object(vec![
                        ("level", Value::from(l as u64)),
                        ("voxels", Value::Array(voxels)),
                    ]));
                }
                columns.push(json_object(vec![
                    ("i", Value::from(i)),
                    ("j", Value::from(j)),
                    ("levels", Value::Array(levels)),
                ]));
            }
        }
        Ok(json_object(vec![
            ("cell_size", json_f64(self.config.cell_size)?),
            ("level_gap", json_f64(self.config.level_gap)?),
            ("origin", json_point(self.config.origin)?),
            ("point_count", Value::from(self.point_count as u64)),
            ("columns", Value::Array(columns)),
        ]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(cell: f64, gap: f64) -> MapConfig {
        MapConfig::new(cell, gap).unwrap()
    }

    #[test]
    fn partition_splits_on_large_gaps_only() {
        // cell 0.1, gap threshold 0.5: steps of ≤5 cells stay merged in real
        // arithmetic; use 4 and 7 to stay clear of the float boundary.
        let groups = level_partition(&[0, 1, 2, 6, 13, 14], 0.1, 0.5);
        assert_eq!(groups, vec![vec![0, 1, 2, 6], vec![13, 14]]);
        assert_eq!(level_partition(&[], 0.1, 0.5), Vec::<Vec<i32>>::new());
        assert_eq!(level_partition(&[-3], 0.1, 0.5), vec![vec![-3]]);
    }

    #[test]
    fn cell_index_uses_floor_semantics() {
        let cfg = config(0.1, 0.5);
        assert_eq!(cfg.cell_index(Point3::new(0.05, 0.15, -0.05)), (0, 1, -1));
        assert_eq!(cfg.cell_index(Point3::new(-0.25, 0.0, 0.0)), (-3, 0, 0));
        let c = cfg.voxel_center(0, 1, -1);
        assert!((c.x - 0.05).abs() < 1e-12);
        assert!((c.y - 0.15).abs() < 1e-12);
        assert!((c.z + 0.05).abs() < 1e-12);
    }

    /// Two slabs in one column, 0.7 m apart: two levels with the correct
    /// surface voxels.
    #[test]
    fn desk_over_floor_splits_into_two_levels() {
        let cfg = config(0.1, 0.5);
        let points = vec![
            Point3::new(0.05, 0.05, 0.02), // floor voxel k=0
            Point3::new(0.05, 0.05, 0.08),
            Point3::new(0.05, 0.05, 0.72), // desk top voxel k=7
        ];
        let map = MLSkiMap::build(&PointCloud::new(points).unwrap(), cfg).unwrap();
        let levels = map.column_levels(0, 0);
        assert_eq!(levels.len(), 2);
        assert_eq!((levels[0].min_k, levels[0].max_k), (0, 0));
        assert_eq!((levels[1].min_k, levels[1].max_k), (7, 7));
        let surf = map.surface_voxel(0, 0, 0).unwrap();
        assert_eq!(
            surf.key,
            VoxelKey {
                i: 0,
                j: 0,
                l: 0,
                k: 0
            }
        );
        assert_eq!(surf.points.len(), 2);
        let top = map.surface_voxel(0, 0, 1).unwrap();
        assert_eq!(top.key.k, 7);
        assert!(map.surface_voxel(0, 0, 2).is_none());
        assert!(map.surface_voxel(1, 0, 0).is_none());
    }

    #[test]
    fn insert_point_bridges_two_levels_into_one() {
        let cfg = config(0.1, 0.6);
        let mut map = MLSkiMap::new(cfg);
        map.insert_point(Point3::new(0.05, 0.05, 0.05)).unwrap(); // k=0
        map.insert_point(Point3::new(0.05, 0.05, 1.05)).unwrap(); // k=10
        assert_eq!(map.column_levels(0, 0).len(), 2);
        // k=5 sits 0.5 m from both neighbours, within the 0.6 m gap: the
        // column collapses to a single level.
        let key = map.insert_point(Point3::new(0.05, 0.05, 0.55)).unwrap();
        assert_eq!(
            key,
            VoxelKey {
                i: 0,
                j: 0,
                l: 0,
                k: 5
            }
        );
        let levels = map.column_levels(0, 0);
        assert_eq!(levels.len(), 1);
        assert_eq!((levels[0].min_k, levels[0].max_k), (0, 10));
        assert_eq!(map.point_count(), 3);
    }

    #[test]
    fn voxel_lookup_respects_level_membership() {
        let cfg = config(0.1, 0.5);
        let points = vec![
            Point3::new(0.05, 0.05, 0.05), // level 0, k=0
            Point3::new(0.05, 0.05, 1.55), // level 1, k=15
        ];
        let map = MLSkiMap::build(&PointCloud::new(points).unwrap(), cfg).unwrap();
        assert!(map
            .voxel(VoxelKey {
                i: 0,
                j: 0,
                l: 0,
                k: 0
            })
            .is_some());
        assert!(map
            .voxel(VoxelKey {
                i: 0,
                j: 0,
                l: 1,
                k: 15
            })
            .is_some());
        // Right k, wrong level.
        assert!(map
            .voxel(VoxelKey {
                i: 0,
                j: 0,
                l: 0,
                k: 15
            })
            .is_none());
        assert!(map
            .voxel(VoxelKey {
                i: 0,
                j: 0,
                l: 1,
                k: 0
            })
            .is_none());
    }

    #[test]
    fn iteration_is_sorted_and_counts_match() {
        let cfg = config(0.25, 1.0);
        let mut points = Vec::new();
        for x in [-0.6, 0.1, 0.8] {
            for y in [-0.3, 0.4] {
                points.push(Point3::new(x, y, 0.1));
                points.push(Point3::new(x, y, 0.12));
            }
        }
        let map = MLSkiMap::build(&PointCloud::new(points).unwrap(), cfg).unwrap();
        assert_eq!(map.column_count(), 6);
        assert_eq!(map.voxel_count(), 6);
        assert_eq!(map.point_count(), 12);
        let keys: Vec<VoxelKey> = map.iter_voxels().map(|v| v.key).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert_eq!(map.iter_surface_voxels().count(), 6);
    }

    #[test]
    fn save_load_round_trip_preserves_structure_and_bytes() {
        let cfg = config(0.2, 0.5)
            .with_origin(Point3::new(-1.0, 0.5, -0.1))
            .unwrap();
        let points = vec![
            Point3::new(0.05, 0.61, 0.0),
            Point3::new(0.07, 0.63, 0.02),
            Point3::new(0.05, 0.61, 1.3),
            Point3::new(-0.9, 0.9, -0.05),
        ];
        let map = MLSkiMap::build(&PointCloud::new(points).unwrap(), cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path_a = dir.path().join("a.mlsk");
        let path_b = dir.path().join("b.mlsk");
        map.save(&path_a).unwrap();
        let loaded = MLSkiMap::load(&path_a).unwrap();
        assert_eq!(map, loaded);
        loaded.save(&path_b).unwrap();
        assert_eq!(fs::read(&path_a).unwrap(), fs::read(&path_b).unwrap());
    }

    #[test]
    fn load_rejects_bad_magic_version_and_truncation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("map.mlsk");
        let map = MLSkiMap::build(
            &PointCloud::new(vec![Point3::new(0.1, 0.1, 0.1)]).unwrap(),
            config(0.1, 0.5),
        )
        .unwrap();
        map.save(&path).unwrap();
        let good = fs::read(&path).unwrap();

        let mut bad_magic = good.clone();
        bad_magic[0] = b'X';
        fs::write(&path, &bad_magic).unwrap();
        assert!(matches!(
            MLSkiMap::load(&path),
            Err(Error::MalformedFile { .. })
        ));

        let mut bad_version = good.clone();
        bad_version[4] = 9;
        fs::write(&path, &bad_version).unwrap();
        assert!(matches!(
            MLSkiMap::load(&path),
            Err(Error::VersionMismatch {
                found: 9,
                expected: 1
            })
        ));

        fs::write(&path, &good[..good.len() - 5]).unwrap();
        assert!(matches!(
            MLSkiMap::load(&path),
            Err(Error::MalformedFile { .. })
        ));
    }

    #[test]
    fn level_count_per_column_is_capped() {
        // Every point two cells above the previous one: each its own level.
        let points: Vec<Point3> = (0..=MAX_LEVELS_PER_COLUMN as i32)
            .map(|k| Point3::new(0.5, 0.5, 2.0 * k as f64 + 0.5))
            .collect();
        let over = PointCloud::new(points.clone()).unwrap();
        let err = MLSkiMap::build(&over, config(1.0, 0.5)).unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));

        // Exactly at the cap builds; one more level via insert fails.
        let at_cap = PointCloud::new(points[..MAX_LEVELS_PER_COLUMN].to_vec()).unwrap();
        let mut map = MLSkiMap::build(&at_cap, config(1.0, 0.5)).unwrap();
        assert_eq!(map.column_levels(0, 0).len(), MAX_LEVELS_PER_COLUMN);
        let err = map
            .insert_point(Point3::new(
                0.5,
                0.5,
                2.0 * MAX_LEVELS_PER_COLUMN as f64 + 0.5,
            ))
            .unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
    }
}
