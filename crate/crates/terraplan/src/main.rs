//! Command-line front end for the terrain mapping and planning pipeline.
//!
//! Thin wrapper over the `terraplan` library: each subcommand parses flags,
//! resolves the run configuration (defaults ← config file ← flags), calls
//! the matching `pipeline::cmd_*` function, and prints a one-line report.
//!
//! Exit codes: 0 success, 2 no traversable path, 3 bad input data,
//! 4 bad flags or configuration.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use terraplan::pipeline::{
    cmd_analyze, cmd_build, cmd_export, cmd_plan, cmd_scenegen, cmd_simplify, parse_point,
    Overrides, RunConfig,
};
use terraplan::scenegen::{random_rocks, SceneKind, SceneSpec};

#[derive(Parser)]
#[command(
    name = "terraplan",
    version,
    about = "Point clouds to multi-level terrain maps, traversability graphs, and planned paths"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Index a point cloud (PLY or XYZ) into a multi-level voxel map.
    Build {
        /// Input cloud file.
        #[arg(long)]
        input: PathBuf,
        /// Output map container.
        #[arg(long)]
        output: PathBuf,
        /// Config file with [map]/[simplify]/[vehicle]/[wtg]/[planner] sections.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Voxel edge length in meters.
        #[arg(long)]
        cell_size: Option<f64>,
        /// Vertical gap separating levels within a column.
        #[arg(long)]
        level_gap: Option<f64>,
        /// Multiplier applied to input coordinates.
        #[arg(long)]
        unit_scale: Option<f64>,
    },
    /// Decimate a map by per-voxel curvature, keeping detail where it matters.
    Simplify {
        /// Input map container.
        #[arg(long)]
        input: PathBuf,
        /// Output map container.
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Retention curve coefficient a in N = floor(a * curv^b + c).
        #[arg(long)]
        a: Option<f64>,
        /// Retention curve exponent b.
        #[arg(long)]
        b: Option<f64>,
        /// Retention curve floor c.
        #[arg(long)]
        c: Option<f64>,
        /// Seed for the per-voxel decimation draws.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compute per-cell vehicle traversability and build the weighted graph.
    Analyze {
        /// Input map container.
        #[arg(long)]
        input: PathBuf,
        /// Output base path; writes BASE.field.json, BASE.wtg.json, BASE.wtg.bin.
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Vehicle profile file (key = value: W, L, R, H, max_tilt_deg).
        #[arg(long)]
        vehicle: Option<PathBuf>,
        /// Surface-height connectivity threshold in meters.
        #[arg(long)]
        c_max: Option<f64>,
        /// Also write PLY renderings (BASE.field.ply, BASE.wtg.ply).
        #[arg(long)]
        export_ply: bool,
    },
    /// Search a stored graph for the best path between two points.
    Plan {
        /// Input graph file (JSON or binary).
        #[arg(long)]
        input: PathBuf,
        /// Output base path; writes BASE.path.json and BASE.path.ply.
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Start point as "x,y,z".
        #[arg(long)]
        start: String,
        /// Goal point as "x,y,z".
        #[arg(long)]
        goal: String,
        /// Weight trading path length against accumulated traversability cost.
        #[arg(long)]
        lambda: Option<f64>,
        /// Maximum distance to snap endpoints onto graph nodes.
        #[arg(long)]
        snap_radius: Option<f64>,
    },
    /// Generate a synthetic benchmark scene with analytic ground truth.
    Scenegen {
        /// Scene family to generate.
        kind: KindArg,
        /// Output cloud file.
        #[arg(long)]
        out: PathBuf,
        /// Optional ground-truth JSON describing the exact geometry.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Seed for sampling jitter and noise.
        #[arg(long)]
        seed: Option<u64>,
        /// Points per square meter on sampled surfaces.
        #[arg(long)]
        density: Option<f64>,
        /// Gaussian height noise in meters (clamped at three sigma).
        #[arg(long)]
        sigma: Option<f64>,
        /// Side length of the flat scene.
        #[arg(long)]
        size: Option<f64>,
        /// Incline angle in degrees for the ramp scene.
        #[arg(long)]
        angle: Option<f64>,
        /// Ledge height in meters for the step scene.
        #[arg(long)]
        height: Option<f64>,
        /// Radius of the missing disk in the hole scene.
        #[arg(long)]
        hole_radius: Option<f64>,
        /// Number of random cones in the rocks scene.
        #[arg(long)]
        rocks: Option<usize>,
        /// Leave the bridge scene without its deck (gap is impassable).
        #[arg(long)]
        no_deck: bool,
    },
    /// Convert any stored artifact (map, graph, field, path) to PLY.
    Export {
        /// Input artifact file.
        #[arg(long)]
        input: PathBuf,
        /// Output PLY file.
        #[arg(long)]
        output: PathBuf,
    },
}

/// Scene families understood by `scenegen`.
#[derive(Copy, Clone, ValueEnum)]
enum KindArg {
    /// Level ground.
    Flat,
    /// Approach, constant incline, summit plateau.
    Ramp,
    /// Two plateaus joined by a vertical ledge.
    Step,
    /// Floor with a desk standing on it (overhanging second level).
    DeskFloor,
    /// Level ground with a circular gap in the data.
    Hole,
    /// Level ground with conical obstacles.
    Rocks,
    /// Two banks over a deep channel, optionally joined by a deck.
    Bridge,
    /// Ground floor, ramp, and an upper slab reachable only via the ramp.
    Garage,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 4,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> terraplan::Result<()> {
    match command {
        Command::Build {
            input,
            output,
            config,
            cell_size,
            level_gap,
            unit_scale,
        } => {
            let overrides = Overrides {
                cell_size,
                level_gap,
                unit_scale,
                ..Overrides::default()
            };
            let config = RunConfig::resolve(config.as_deref(), &overrides)?;
            let report = cmd_build(&input, &output, &config)?;
            println!(
                "indexed {} points: {} columns, {} levels ({} multi-level), {} voxels -> {}",
                report.point_count,
                report.column_count,
                report.level_count,
                report.multi_level_columns,
                report.voxel_count,
                output.display()
            );
        }
        Command::Simplify {
            input,
            output,
            config,
            a,
            b,
            c,
            seed,
        } => {
            let overrides = Overrides {
                a,
                b,
                c,
                seed,
                ..Overrides::default()
            };
            let config = RunConfig::resolve(config.as_deref(), &overrides)?;
            let report = cmd_simplify(&input, &output, &config)?;
            println!(
                "kept {} of {} points ({:.1}%) -> {}",
                report.points_after,
                report.points_before,
                100.0 * report.retained_fraction(),
                output.display()
            );
        }
        Command::Analyze {
            input,
            output,
            config,
            vehicle,
            c_max,
            export_ply,
        } => {
            let overrides = Overrides {
                vehicle_profile: vehicle,
                c_max,
                ..Overrides::default()
            };
            let config = RunConfig::resolve(config.as_deref(), &overrides)?;
            let report = cmd_analyze(&input, &output, &config, export_ply)?;
            println!(
                "analyzed {} surface cells ({:.1}% with a passable heading); graph: {} nodes, {} edges -> {}, {}",
                report.cell_count,
                100.0 * report.finite_fraction,
                report.node_count,
                report.edge_count,
                report.graph_json_path.display(),
                report.graph_binary_path.display()
            );
        }
        Command::Plan {
            input,
            output,
            config,
            start,
            goal,
            lambda,
            snap_radius,
        } => {
            let overrides = Overrides {
                lambda,
                snap_radius,
                ..Overrides::default()
            };
            let config = RunConfig::resolve(config.as_deref(), &overrides)?;
            let start = parse_point(&start)?;
            let goal = parse_point(&goal)?;
            let report = cmd_plan(&input, &output, start, goal, &config)?;
            println!(
                "path found: {} nodes, cost {:.4} ({:.2} m, traversability total {:.4}) -> {}",
                report.path.nodes.len(),
                report.path.cost,
                report.path.length(),
                report.path.traversability_total(),
                report.json_path.display()
            );
        }
        Command::Scenegen {
            kind,
            out,
            truth,
            seed,
            density,
            sigma,
            size,
            angle,
            height,
            hole_radius,
            rocks,
            no_deck,
        } => {
            let seed = seed.unwrap_or(0);
            let kind = match kind {
                KindArg::Flat => {
                    let s = size.unwrap_or(4.0);
                    SceneKind::Flat { size: (s, s) }
                }
                KindArg::Ramp => SceneKind::Ramp {
                    angle_deg: angle.unwrap_or(20.0),
                },
                KindArg::Step => SceneKind::Step {
                    height: height.unwrap_or(0.25),
                },
                KindArg::DeskFloor => SceneKind::DeskFloor,
                KindArg::Hole => SceneKind::Hole {
                    radius: hole_radius.unwrap_or(0.12),
                },
                KindArg::Rocks => SceneKind::Rocks {
                    rocks: random_rocks(rocks.unwrap_or(5), seed),
                },
                KindArg::Bridge => SceneKind::Bridge { has_deck: !no_deck },
                KindArg::Garage => SceneKind::Garage,
            };
            let mut spec = SceneSpec::new(kind, seed);
            if let Some(d) = density {
                spec.density = d;
            }
            if let Some(s) = sigma {
                spec.sigma = s;
            }
            let report = cmd_scenegen(&spec, &out, truth.as_deref())?;
            match &truth {
                Some(t) => println!(
                    "generated {} points -> {} (truth: {})",
                    report.point_count,
                    out.display(),
                    t.display()
                ),
                None => {
                    println!(
                        "generated {} points -> {}",
                        report.point_count,
                        out.display()
                    )
                }
            }
        }
        Command::Export { input, output } => {
            cmd_export(&input, &output)?;
            println!("exported {} -> {}", input.display(), output.display());
        }
    }
    Ok(())
}
