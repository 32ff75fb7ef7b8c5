//! Planning across a bridge deck — and failing honestly when the deck is
//! missing.
//!
//! The scene is two banks separated by a 2 m wide, 3 m deep channel. With
//! the deck present, the deck columns carry two surfaces (channel bed and
//! deck) and the planner routes across the upper one. Without the deck the
//! only surfaces in the gap are 3 m down: no edge can span that drop, so
//! the search reports no path instead of inventing one.
//!
//! Run with: `cargo run --example plan_bridge`

use terraplan::geom::Point3;
use terraplan::planner::plan;
use terraplan::scenegen::{generate, SceneKind, SceneSpec};
use terraplan::skimap::{MLSkiMap, MapConfig};
use terraplan::traversability::{compute_field, TraversabilityConfig, VehicleModel};
use terraplan::wtg::{build_wtg, Wtg};
use terraplan::Error;

fn build_graph(has_deck: bool) -> terraplan::Result<Wtg> {
    let spec = SceneSpec::new(SceneKind::Bridge { has_deck }, 31);
    let (cloud, _) = generate(&spec)?;
    let config = MapConfig::new(0.1, 0.5)?.with_origin(Point3::new(0.0, 0.0, -0.05))?;
    let map = MLSkiMap::build(&cloud, config)?;
    let field = compute_field(
        &map,
        &VehicleModel::default(),
        &TraversabilityConfig::new(0.25)?,
    );
    build_wtg(&map, &field, 0.25)
}

fn main() -> terraplan::Result<()> {
    let start = [1.0, 2.1, 0.0];
    let goal = [7.0, 2.1, 0.0];

    let with_deck = build_graph(true)?;
    let path = plan(&with_deck, start, goal, 0.5, 0.5)?;
    println!(
        "with deck: {} nodes, {:.2} m, cost {:.3}",
        path.nodes.len(),
        path.length(),
        path.cost
    );
    // Every node over the channel interior sits at deck height on the upper
    // level of its column, never down on the bed.
    let over_channel: Vec<_> = path
        .nodes
        .iter()
        .filter(|n| n.pos.x > 3.2 && n.pos.x < 4.8)
        .collect();
    println!(
        "  {} nodes over the channel, all on level 1 at deck height: {}",
        over_channel.len(),
        over_channel.iter().all(|n| n.id.2 == 1 && n.pos.z > -0.1)
    );

    let without_deck = build_graph(false)?;
    match plan(&without_deck, start, goal, 0.5, 0.5) {
        Err(Error::NoPath) => println!("without deck: no path — the channel is impassable"),
        Ok(_) => println!("without deck: unexpected path (should not happen)"),
        Err(other) => return Err(other),
    }
    Ok(())
}
