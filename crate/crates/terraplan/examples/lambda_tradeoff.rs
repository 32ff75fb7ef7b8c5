//! The λ knob: trading path length against terrain quality.
//!
//! Each step of a path costs its 3D length plus λ times the traversability
//! cost of leaving the cell in that direction. A ridge of low rocks lies
//! across the straight route, with a clear gap around its northern end:
//! small λ drives straight over the rocks, large λ pays the extra meters
//! to go around.
//!
//! Run with: `cargo run --example lambda_tradeoff`

use terraplan::geom::Point3;
use terraplan::planner::plan;
use terraplan::scenegen::{generate, RockSpec, SceneKind, SceneSpec};
use terraplan::skimap::{MLSkiMap, MapConfig};
use terraplan::traversability::{compute_field, TraversabilityConfig, VehicleModel};
use terraplan::wtg::build_wtg;

fn main() -> terraplan::Result<()> {
    // A ridge of gentle cones across x = 2.5, ending at y ≈ 3.4 so the top
    // of the floor stays clear.
    let rocks: Vec<RockSpec> = (0..6)
        .map(|n| RockSpec {
            cx: 2.55,
            cy: 0.25 + 0.6 * n as f64,
            radius: 0.4,
            height: 0.07,
        })
        .collect();
    let spec = SceneSpec {
        kind: SceneKind::Rocks { rocks },
        density: 1200.0,
        sigma: 0.001,
        seed: 27,
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

    let start = [0.7, 2.05, 0.0];
    let goal = [4.3, 2.05, 0.0];
    println!("route (0.7, 2.05) -> (4.3, 2.05); rock ridge across x = 2.5, gap above y = 3.4\n");
    println!(
        "{:>6}  {:>8}  {:>10}  {:>7}  route",
        "λ", "length", "trav total", "max y"
    );
    for lambda in [0.0, 0.5, 2.0, 8.0] {
        let path = plan(&graph, start, goal, lambda, 0.5)?;
        let max_y = path.nodes.iter().map(|n| n.pos.y).fold(f64::MIN, f64::max);
        let route = if max_y > 3.4 {
            "around the ridge"
        } else {
            "over the rocks"
        };
        println!(
            "{lambda:>6.1}  {:>7.2}m  {:>10.3}  {:>7.2}  {route}",
            path.length(),
            path.traversability_total(),
            max_y
        );
    }
    Ok(())
}
