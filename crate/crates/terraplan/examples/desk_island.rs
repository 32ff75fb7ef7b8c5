//! Disconnected surfaces stay disconnected: a desk top is drivable terrain
//! by every local measure, yet no path leads onto it.
//!
//! The desk top is flat, wide enough for the platform, and its cells all
//! carry finite traversability — but every column at its rim drops 0.74 m
//! to the floor, far beyond the height budget, so the graph contains the
//! desk as an isolated island. Asking for a route from the floor onto the
//! desk must fail with "no path", not with a detour or a jump.
//!
//! Run with: `cargo run --example desk_island`

use terraplan::geom::Point3;
use terraplan::planner::plan;
use terraplan::scenegen::{generate, SceneKind, SceneSpec};
use terraplan::skimap::{MLSkiMap, MapConfig};
use terraplan::traversability::{compute_field, TraversabilityConfig, VehicleModel};
use terraplan::wtg::build_wtg;
use terraplan::Error;

fn main() -> terraplan::Result<()> {
    let spec = SceneSpec {
        density: 900.0,
        ..SceneSpec::new(SceneKind::DeskFloor, 14)
    };
    let (cloud, _) = generate(&spec)?;
    let config = MapConfig::new(0.1, 0.5)?.with_origin(Point3::new(0.0, 0.0, -0.05))?;
    let map = MLSkiMap::build(&cloud, config)?;
    let field = compute_field(
        &map,
        &VehicleModel::default(),
        &TraversabilityConfig::new(0.25)?,
    );
    let graph = build_wtg(&map, &field, 0.25)?;

    // The desk top itself is passable: its center cell has finite cost.
    let (i, j, _) = map.config().cell_index(Point3::new(3.0, 3.0, 0.0));
    let top_level = (map.column_levels(i, j).len() - 1) as u16;
    let center = field.get(i, j, top_level).expect("desk top analyzed");
    println!(
        "desk-top center cell ({i}, {j}, level {top_level}): {} of 8 headings passable",
        center.iter().filter(|c| !c.is_blocked()).count()
    );

    // Floor-to-floor works fine.
    let across = plan(&graph, [0.5, 0.5, 0.0], [5.5, 5.5, 0.0], 0.5, 0.5)?;
    println!(
        "floor -> floor around the desk: {} nodes, {:.2} m",
        across.nodes.len(),
        across.length()
    );

    // Floor-to-desk-top has no route: the island is unreachable.
    match plan(&graph, [0.5, 0.5, 0.0], [3.0, 3.0, 0.74], 0.5, 0.5) {
        Err(Error::NoPath) => println!("floor -> desk top: no path (island, as it must be)"),
        Ok(p) => println!(
            "floor -> desk top: unexpected path with {} nodes",
            p.nodes.len()
        ),
        Err(other) => return Err(other),
    }
    Ok(())
}
