//! Curvature-adaptive decimation: flat ground thins aggressively while
//! geometric detail survives.
//!
//! A rocky scene is indexed into a voxel map, each voxel's surface
//! variation (λ_min / Σλ of its point covariance) drives how many of its
//! points are kept via `⌊a·curv^b + c⌋`, and the per-region retention shows
//! the effect: flat voxels collapse to a single point, rock flanks keep
//! nearly everything.
//!
//! Run with: `cargo run --example simplify_curvature`

use terraplan::geom::Point3;
use terraplan::scenegen::{generate, RockSpec, SceneKind, SceneSpec};
use terraplan::simplify::{retention_count, simplify_map, voxel_curvature, SimplifyParams};
use terraplan::skimap::{MLSkiMap, MapConfig};

fn main() -> terraplan::Result<()> {
    // A steep cone: its apex and the crease where it meets the floor are
    // genuinely three-dimensional at voxel scale.
    let rock = RockSpec {
        cx: 2.55,
        cy: 2.55,
        radius: 0.25,
        height: 0.5,
    };
    let spec = SceneSpec {
        kind: SceneKind::Rocks { rocks: vec![rock] },
        density: 3000.0,
        sigma: 0.002,
        seed: 9,
    };
    let (cloud, _) = generate(&spec)?;
    let config = MapConfig::new(0.1, 0.5)?.with_origin(Point3::new(0.0, 0.0, -0.05))?;
    let map = MLSkiMap::build(&cloud, config)?;

    // The retention curve: a=900, b=3, c=1 keeps one point for perfectly
    // flat voxels and saturates quickly as curvature grows.
    let params = SimplifyParams::new(900.0, 3.0, 1.0, 42)?;
    println!("retention curve (25 points available):");
    for curv in [0.0, 0.02, 0.05, 0.1, 0.2, 1.0 / 3.0] {
        println!(
            "  curvature {curv:.3} -> keep {}",
            retention_count(curv, &params, 25)
        );
    }

    let slim = simplify_map(&map, &params);
    println!(
        "\nwhole map: {} -> {} points ({:.1}% kept)",
        map.point_count(),
        slim.point_count(),
        100.0 * slim.point_count() as f64 / map.point_count() as f64
    );

    // Curvature here is surface variation — deviation from the local plane.
    // A smooth cone flank is locally planar and thins like the floor; the
    // voxels that keep their points are the genuinely three-dimensional
    // ones: the apex and the crease where cone meets ground. Find the
    // sharpest voxel and compare it with open floor.
    let mut sharpest = None;
    for voxel in map.iter_voxels().filter(|v| v.points.len() >= 8) {
        let curv = voxel_curvature(voxel.points)?.curvature;
        if sharpest.as_ref().is_none_or(|&(best, _, _)| curv > best) {
            sharpest = Some((curv, voxel.key, voxel.points.len()));
        }
    }
    let (curv, key, had) = sharpest.expect("map has populated voxels");
    let kept = slim
        .iter_voxels()
        .find(|v| v.key == key)
        .map(|v| v.points.len())
        .expect("simplification preserves every voxel");
    println!("\nper-voxel effect:");
    {
        let (i, j, _) = map.config().cell_index(Point3::new(1.0, 1.0, 0.0));
        let voxel = map.surface_voxel(i, j, 0).expect("floor is occupied");
        let trimmed = slim.surface_voxel(i, j, 0).expect("structure kept");
        let flat_curv = voxel_curvature(voxel.points)?.curvature;
        println!(
            "  flat ground ({i:>2}, {j:>2}): curvature {flat_curv:.4}, {} -> {} points",
            voxel.points.len(),
            trimmed.points.len()
        );
    }
    println!(
        "  sharpest    ({:>2}, {:>2}): curvature {curv:.4}, {had} -> {kept} points (near the apex at ({}, {}))",
        key.i, key.j, rock.cx, rock.cy
    );

    // Structure is preserved exactly: same columns, levels and voxels.
    assert_eq!(map.column_count(), slim.column_count());
    assert_eq!(map.voxel_count(), slim.voxel_count());
    println!("\ncolumn/level/voxel structure is unchanged; only point lists shrink");
    Ok(())
}
