use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the mapping / analysis / planning pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A cloud, map, graph or path file could not be parsed.
    #[error("malformed file {path}: {reason}")]
    MalformedFile { path: PathBuf, reason: String },

    /// A point cloud with zero valid points was loaded or constructed.
    #[error("point cloud contains no points")]
    EmptyCloud,

    /// A NaN or infinite value reached a place that requires finite numbers.
    #[error("non-finite value where a finite number is required")]
    NonFiniteValue,

    /// Two parallel arrays (e.g. points and colors) differ in length.
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    /// An underlying read or write failed.
    #[error("i/o failure: {0}")]
    IoFailure(#[from] std::io::Error),

    /// A parameter or configuration file entry is out of range or unknown.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A binary container was written by an incompatible version.
    #[error("unsupported container version {found}, expected {expected}")]
    VersionMismatch { found: u32, expected: u32 },

    /// A matrix handed to the symmetric eigensolver is not symmetric.
    #[error("matrix is not symmetric within tolerance")]
    NotSymmetric,

    /// A per-voxel statistic was requested for a voxel without points.
    #[error("voxel holds no points")]
    EmptyVoxel,

    /// Plane fitting was attempted on a degenerate (collinear or near-empty)
    /// support set.
    #[error("degenerate support: cannot fit a plane through {count} usable points")]
    DegenerateFootprint { count: usize },

    /// A traversability field does not cover the surface voxels of the map it
    /// is being combined with.
    #[error("traversability field does not match map surface cell ({i}, {j}, level {level})")]
    FieldMismatch { i: i32, j: i32, level: u16 },

    /// No graph node lies within the snap radius of a query point.
    #[error("no graph node within {radius} m of ({x}, {y}, {z})")]
    NoNodeInRange { x: f64, y: f64, z: f64, radius: f64 },

    /// Start and goal are in the graph but no traversable route connects them.
    #[error("no traversable path between start and goal")]
    NoPath,

    /// A node id was referenced that the graph does not contain.
    #[error("unknown graph node ({i}, {j}, level {level})")]
    UnknownNode { i: i32, j: i32, level: u16 },

    /// A synthetic scene description is inconsistent (negative extent,
    /// overlapping requirements, unknown kind, ...).
    #[error("invalid scene spec: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Convenience constructor for parse failures carrying the offending path.
    pub fn malformed(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::MalformedFile {
            path: path.into(),
            reason: reason.into(),
        }
    }

    /// Process exit code for this error when surfaced by the command line
    /// tool: 2 for "no path", 3 for bad input data, 4 for bad configuration.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NoPath | Error::NoNodeInRange { .. } => 2,
            Error::MalformedFile { .. }
            | Error::EmptyCloud
            | Error::NonFiniteValue
            | Error::LengthMismatch { .. }
            | Error::IoFailure(_)
            | Error::VersionMismatch { .. }
            | Error::FieldMismatch { .. }
            | Error::UnknownNode { .. } => 3,
            Error::InvalidConfig(_) | Error::InvalidSpec(_) => 4,
            Error::NotSymmetric | Error::EmptyVoxel | Error::DegenerateFootprint { .. } => 3,
        }
    }
}
