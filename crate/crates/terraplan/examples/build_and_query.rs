//! Build a multi-level voxel map from a hand-made cloud and query it.
//!
//! The cloud is a 3×3 m floor with a 1×1 m slab hovering 1.5 m above one
//! corner — the kind of geometry (overhangs, bridges, tunnels) that forces
//! a terrain map to keep several surfaces per column instead of a single
//! height value.
//!
//! Run with: `cargo run --example build_and_query`

use terraplan::geom::Point3;
use terraplan::io::PointCloud;
use terraplan::skimap::{MLSkiMap, MapConfig};

fn main() -> terraplan::Result<()> {
    // Sample the floor and the slab on a 5 cm grid, offset half a pitch so
    // no point sits exactly on a voxel boundary.
    let mut points = Vec::new();
    for xi in 0..60 {
        for yi in 0..60 {
            let (x, y) = (0.025 + xi as f64 * 0.05, 0.025 + yi as f64 * 0.05);
            points.push(Point3::new(x, y, 0.0));
            if x < 1.0 && y < 1.0 {
                points.push(Point3::new(x, y, 1.5));
            }
        }
    }
    let cloud = PointCloud::new(points)?;

    // 10 cm voxels; a vertical gap over 0.5 m splits a column into levels.
    // The origin sits half a cell below zero so the floor occupies the
    // center of its voxel instead of straddling a boundary.
    let config = MapConfig::new(0.1, 0.5)?.with_origin(Point3::new(0.0, 0.0, -0.05))?;
    let map = MLSkiMap::build(&cloud, config)?;

    println!(
        "indexed {} points into {} columns / {} voxels",
        map.point_count(),
        map.column_count(),
        map.voxel_count()
    );

    // A column under the slab carries two levels; one outside carries one.
    for (label, i, j) in [("under the slab", 2, 2), ("open floor", 20, 20)] {
        let levels = map.column_levels(i, j);
        println!("\ncolumn ({i}, {j}) — {label}: {} level(s)", levels.len());
        for summary in &levels {
            let surface = map
                .surface_voxel(i, j, summary.level)
                .expect("summary level exists");
            println!(
                "  level {}: k = {}..={}, surface voxel center z = {:.3}, {} surface points",
                summary.level,
                summary.min_k,
                summary.max_k,
                surface.center.z,
                surface.points.len()
            );
        }
    }

    // Point-to-cell lookup runs through the same config the map was built
    // with, so queries and storage can never disagree about indexing.
    let probe = Point3::new(0.51, 0.49, 1.5);
    let (i, j, k) = map.config().cell_index(probe);
    println!(
        "\nprobe {:?} falls in cell ({i}, {j}, {k}), center {:?}",
        (probe.x, probe.y, probe.z),
        {
            let c = map.config().voxel_center(i, j, k);
            (c.x, c.y, c.z)
        }
    );

    // Incremental insertion keeps the level structure consistent: adding a
    // mid-air point between floor and slab merges nothing until the gap
    // closes below the threshold.
    let mut grown = map;
    let key = grown.insert_point(Point3::new(0.15, 0.15, 0.8))?;
    println!(
        "inserted a mid-air point -> voxel (i {}, j {}, level {}, k {}); column now has {} levels",
        key.i,
        key.j,
        key.l,
        key.k,
        grown.column_levels(key.i, key.j).len()
    );
    Ok(())
}
