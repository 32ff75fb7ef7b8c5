//! From field to graph: surface cells become nodes, and an edge connects
//! two neighboring cells only when the height difference is drivable and
//! the source cell is passable in that direction.
//!
//! A ledge between two plateaus makes the threshold visible: with the
//! height budget at or above the ledge the graph is one connected surface,
//! below it the plateaus fall into separate components and no path exists
//! between them.
//!
//! Run with: `cargo run --example weighted_graph`

use terraplan::geom::Point3;
use terraplan::planner::plan;
use terraplan::scenegen::{generate, SceneKind, SceneSpec};
use terraplan::skimap::{MLSkiMap, MapConfig};
use terraplan::traversability::{compute_field, TraversabilityConfig, VehicleModel};
use terraplan::wtg::build_wtg;
use terraplan::Error;

fn main() -> terraplan::Result<()> {
    // A 12.5 cm ledge, sampled without noise so the step height is exact.
    let spec = SceneSpec {
        kind: SceneKind::Step { height: 0.125 },
        density: 700.0,
        sigma: 0.0,
        seed: 2,
    };
    let (cloud, _) = generate(&spec)?;
    let config = MapConfig::new(0.1, 0.5)?.with_origin(Point3::new(0.0, 0.0, -0.05))?;
    let map = MLSkiMap::build(&cloud, config)?;
    let vehicle = VehicleModel::new(0.235, 0.175, 0.12, 0.2, 45_f64.to_radians())?;

    for c_max in [0.25, 0.10] {
        let field = compute_field(&map, &vehicle, &TraversabilityConfig::new(c_max)?);
        let graph = build_wtg(&map, &field, c_max)?;
        println!(
            "c_max = {c_max:.2}: {} nodes, {} directed edges",
            graph.len(),
            graph.edge_count()
        );

        // Sample edge weights leaving one mid-floor node.
        let node = graph.snap_to_node(Point3::new(1.0, 1.5, 0.0), 0.5)?;
        let edges = graph.edges_from(graph.node_index(node).expect("snapped node exists"));
        let weights: Vec<String> = edges.iter().map(|e| format!("{:.3}", e.weight)).collect();
        println!(
            "  node {node:?} has {} outgoing edges, weights [{}]",
            edges.len(),
            weights.join(", ")
        );

        // Can the vehicle get from the low plateau onto the high one?
        match plan(&graph, [0.6, 1.5, 0.0], [3.4, 1.5, 0.125], 0.5, 0.5) {
            Ok(path) => println!(
                "  low -> high plateau: path with {} nodes, {:.2} m\n",
                path.nodes.len(),
                path.length()
            ),
            Err(Error::NoPath) => {
                println!("  low -> high plateau: no path (ledge exceeds the height budget)\n")
            }
            Err(other) => return Err(other),
        }
    }
    Ok(())
}
