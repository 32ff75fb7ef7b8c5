//! Multi-level planning: driving from the ground floor onto an upper slab
//! via the ramp that connects them.
//!
//! The scene is a parking-garage corner: ground at z = 0, a slab at
//! z = 1 overhanging part of it, and a straight ramp cutting through. The
//! columns under the slab hold two stacked surfaces, so a plain 2D
//! elevation map could not even represent this route — the graph has one
//! node per surface, and the planned path changes level along the way.
//!
//! Run with: `cargo run --example plan_garage`

use terraplan::geom::Point3;
use terraplan::planner::plan;
use terraplan::scenegen::{generate, SceneKind, SceneSpec};
use terraplan::skimap::{MLSkiMap, MapConfig};
use terraplan::traversability::{compute_field, TraversabilityConfig, VehicleModel};
use terraplan::wtg::build_wtg;

fn main() -> terraplan::Result<()> {
    let spec = SceneSpec::new(SceneKind::Garage, 6);
    let (cloud, _) = generate(&spec)?;
    let config = MapConfig::new(0.1, 0.5)?.with_origin(Point3::new(0.0, 0.0, -0.05))?;
    let map = MLSkiMap::build(&cloud, config)?;

    let stacked = map
        .iter_columns()
        .filter(|&(i, j)| map.column_levels(i, j).len() > 1)
        .count();
    println!(
        "{} of {} columns hold more than one surface (slab over ground)",
        stacked,
        map.column_count()
    );

    let vehicle = VehicleModel::default();
    let field = compute_field(&map, &vehicle, &TraversabilityConfig::new(0.25)?);
    let graph = build_wtg(&map, &field, 0.25)?;
    println!("graph: {} nodes, {} edges", graph.len(), graph.edge_count());

    // Ground floor -> on top of the slab that hangs over the ground.
    let path = plan(&graph, [0.5, 1.5, 0.0], [4.5, 0.5, 1.0], 0.5, 0.5)?;
    println!(
        "path: {} nodes, {:.2} m, cost {:.3}",
        path.nodes.len(),
        path.length(),
        path.cost
    );

    // Show the ascent: z along the path, and where the level index changes.
    let mut last_level = u16::MAX;
    for node in &path.nodes {
        if node.id.2 != last_level {
            println!(
                "  enters level {} at cell ({}, {}), z = {:.2}",
                node.id.2, node.id.0, node.id.1, node.pos.z
            );
            last_level = node.id.2;
        }
    }
    let zs: Vec<f64> = path.nodes.iter().map(|n| n.pos.z).collect();
    let climb: Vec<String> = zs
        .iter()
        .step_by(zs.len().div_ceil(12).max(1))
        .map(|z| format!("{z:.2}"))
        .collect();
    println!(
        "  height profile: [{}] -> {:.2}",
        climb.join(", "),
        zs.last().unwrap()
    );
    Ok(())
}
