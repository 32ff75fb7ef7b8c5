//! The whole pipeline through files, exactly as the command-line tool runs
//! it: generate -> build -> simplify -> analyze -> plan -> export.
//!
//! Every stage reads its input from disk and writes its output to disk, so
//! the stages can run on different machines or be re-run individually. The
//! artifacts land in a scratch directory that is printed at the end — the
//! PLY files open in any mesh viewer.
//!
//! Run with: `cargo run --example full_pipeline`

use std::fs;

use terraplan::geom::Point3;
use terraplan::pipeline::{
    cmd_analyze, cmd_build, cmd_export, cmd_plan, cmd_scenegen, cmd_simplify, RunConfig,
};
use terraplan::scenegen::{SceneKind, SceneSpec};

fn main() -> terraplan::Result<()> {
    let dir = std::env::temp_dir().join("terraplan-full-pipeline");
    fs::create_dir_all(&dir)?;

    // One config drives every stage.
    let config = RunConfig {
        origin: Point3::new(0.0, 0.0, -0.05),
        c_max: 0.35,
        lambda: 1.0,
        ..RunConfig::default()
    };

    // 1. A synthetic 15° ramp with analytic ground truth.
    let scene = dir.join("scene.ply");
    let spec = SceneSpec::new(SceneKind::Ramp { angle_deg: 15.0 }, 77);
    let generated = cmd_scenegen(&spec, &scene, Some(&dir.join("truth.json")))?;
    println!("scenegen: {} points", generated.point_count);

    // 2. Index into the multi-level voxel map.
    let map = dir.join("scene.mlsk");
    let built = cmd_build(&scene, &map, &config)?;
    println!(
        "build:    {} columns, {} voxels, {} levels",
        built.column_count, built.voxel_count, built.level_count
    );

    // 3. Curvature-adaptive decimation.
    let slim = dir.join("scene.slim.mlsk");
    let simplified = cmd_simplify(&map, &slim, &config)?;
    println!(
        "simplify: {} -> {} points ({:.1}% kept)",
        simplified.points_before,
        simplified.points_after,
        100.0 * simplified.retained_fraction()
    );

    // 4. Traversability field + weighted graph (with PLY renderings).
    let base = dir.join("scene");
    let analyzed = cmd_analyze(&slim, &base, &config, true)?;
    println!(
        "analyze:  {} cells ({:.1}% passable), graph {} nodes / {} edges",
        analyzed.cell_count,
        100.0 * analyzed.finite_fraction,
        analyzed.node_count,
        analyzed.edge_count
    );

    // 5. Plan from the approach to the summit.
    let planned = cmd_plan(
        &analyzed.graph_binary_path,
        &base,
        Point3::new(0.8, 1.5, 0.0),
        Point3::new(4.8, 1.5, 0.73),
        &config,
    )?;
    println!(
        "plan:     {} nodes, {:.2} m, cost {:.3}",
        planned.path.nodes.len(),
        planned.path.length(),
        planned.path.cost
    );

    // 6. Re-render the stored map as a viewable cloud.
    cmd_export(&slim, &dir.join("scene.slim.ply"))?;

    println!("\nartifacts in {}:", dir.display());
    let mut names: Vec<String> = fs::read_dir(&dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    for name in names {
        println!("  {name}");
    }
    Ok(())
}
