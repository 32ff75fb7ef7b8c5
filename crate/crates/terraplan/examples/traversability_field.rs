//! Vehicle-interaction traversability on a ramp: the cost of a cell
//! depends on which way the vehicle faces.
//!
//! For every surface cell and each of eight headings, the analysis places
//! the four wheel disks on the map, fits contact planes to all four
//! three-wheel combinations, and scores the pose by the worst tilt —
//! blocked outright on occlusion (a wheel over missing ground), excessive
//! tilt, or chassis collision. On a 20° ramp the up/down headings read the
//! full grade while cross-slope headings read the same tilt from the side.
//!
//! Run with: `cargo run --example traversability_field`

use terraplan::geom::Point3;
use terraplan::scenegen::{generate, SceneKind, SceneSpec};
use terraplan::skimap::{MLSkiMap, MapConfig};
use terraplan::traversability::{compute_field, Heading, TraversabilityConfig, VehicleModel};

fn main() -> terraplan::Result<()> {
    let spec = SceneSpec::new(SceneKind::Ramp { angle_deg: 20.0 }, 4);
    let (cloud, _) = generate(&spec)?;
    let config = MapConfig::new(0.1, 0.5)?.with_origin(Point3::new(0.0, 0.0, -0.05))?;
    let map = MLSkiMap::build(&cloud, config)?;

    // Compact four-wheel platform, 35° tip-over limit.
    let vehicle = VehicleModel::default();
    // Cells whose surface is more than 0.35 m from the pose's own surface
    // height are unreachable by a wheel — treat them as missing ground.
    let analysis = TraversabilityConfig::new(0.35)?;
    let field = compute_field(&map, &vehicle, &analysis);

    println!(
        "field covers {} surface cells; {:.1}% have at least one passable heading",
        field.len(),
        100.0 * field.finite_fraction()
    );

    let show = |label: &str, x: f64, y: f64| {
        let (i, j, _) = map.config().cell_index(Point3::new(x, y, 0.0));
        let costs = field.get(i, j, 0).expect("cell analyzed");
        println!("\n{label} — cell ({i}, {j}):");
        for heading in Heading::ALL {
            let deg = heading.angle().to_degrees();
            match costs[heading.index()].finite() {
                Some(cost) => println!(
                    "  heading {deg:>5.1}°: cost {cost:.3} (≈ tilt {:>4.1}°)",
                    cost.atan().to_degrees()
                ),
                None => println!("  heading {deg:>5.1}°: blocked"),
            }
        }
    };

    // Flat approach: every heading is nearly free.
    show("flat approach (1.0, 1.5)", 1.0, 1.5);
    // Mid-incline: the wheels sit on the same 20° plane whichever way the
    // vehicle faces, so every heading reads cost ≈ tan(20°) = 0.364; what
    // changes per heading is which cells the wheels cover, and with them
    // occlusion and collision — visible at edges, not mid-slope.
    show("mid-incline (3.0, 1.5)", 3.0, 1.5);
    // Side edge of the ramp: this close to the boundary some wheel hangs
    // over missing ground in every orientation, so all headings block.
    show("ramp side edge (3.0, 0.1)", 3.0, 0.1);
    Ok(())
}
