//! Terrain mapping and path planning for ground vehicles on point clouds.
//!
//! The crate turns a raw 3D point cloud into a drivable route in five
//! stages, each usable on its own:
//!
//! - [`skimap`] — a sorted sparse voxel index over columns of the x-y grid,
//!   with each column split into vertically separated *levels* so bridges,
//!   overhangs and indoor floors stay distinct surfaces.
//! - [`simplify`] — per-voxel surface-curvature estimation and
//!   curvature-driven point decimation that keeps detail only where the
//!   geometry bends.
//! - [`traversability`] — vehicle-in-the-loop pose evaluation: wheel
//!   footprints, support-plane fits, tip-over margins and chassis clearance
//!   over every surface cell and driving direction.
//! - [`wtg`] — the weighted traversability graph connecting neighbouring
//!   surface cells whose heights a wheel can actually cross, with the pose
//!   costs as edge weights.
//! - [`planner`] — shortest-path search over that graph trading distance
//!   against terrain risk through a single mixing weight.
//!
//! Supporting modules: [`geom`] (points and colors), [`io`] (point-cloud
//! and JSON file formats), [`scenegen`] (synthetic test terrains with
//! analytic ground truth), [`pipeline`] (end-to-end commands used by the
//! CLI and the examples), and [`error`].
//!
//! ```no_run
//! use terraplan::io::load_point_cloud;
//! use terraplan::planner::plan;
//! use terraplan::skimap::{MLSkiMap, MapConfig};
//! use terraplan::traversability::{compute_field, TraversabilityConfig, VehicleModel};
//! use terraplan::wtg::build_wtg;
//!
//! # fn main() -> terraplan::Result<()> {
//! let cloud = load_point_cloud("scan.ply".as_ref(), Default::default())?;
//! let map = MLSkiMap::build(&cloud, MapConfig::new(0.1, 0.5)?)?;
//! let vehicle = VehicleModel::new(0.235, 0.175, 0.12, 0.09, 0.6)?;
//! let field = compute_field(&map, &vehicle, &TraversabilityConfig::new(0.25)?);
//! let graph = build_wtg(&map, &field, 0.25)?;
//! let route = plan(&graph, [0.0, 0.0, 0.0], [4.0, 2.0, 0.0], 0.5, 1.0)?;
//! println!("{} hops, cost {}", route.nodes.len() - 1, route.cost);
//! # Ok(())
//! # }
//! ```

pub mod bytes;
pub mod error;
pub mod geom;
pub mod io;
pub mod pipeline;
pub mod planner;
pub mod scenegen;
pub mod simplify;
pub mod skimap;
pub mod traversability;
pub mod wtg;

pub use error::{Error, Result};
