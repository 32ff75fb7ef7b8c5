//! Curvature-adaptive point-cloud simplification.
//!
//! Each voxel's local shape is summarized by the eigenvalues of its point
//! covariance: the *surface variation* `λ_min / (λ0 + λ1 + λ2)` is ~0 on
//! flat patches and approaches 1/3 for isotropic scatter. Flat voxels keep a
//! single representative point while creased or cluttered voxels keep more,
//! following `N = ⌊a·curv^b + c⌋` clamped to `[1, available]`. Selection is
//! a seeded Fisher–Yates prefix per voxel, so the sweep is deterministic and
//! independent of iteration order.

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geom::{lerp_color, Point3, Rgb};
use crate::io::PointCloud;
use crate::skimap::{MLSkiMap, VoxelKey};

/// Tolerance used both to reject asymmetric matrices and to clamp
/// slightly-negative eigenvalues that are zero up to rounding.
const SYMMETRY_EPS: f64 = 1e-12;

/// Retention curve parameters (`N = ⌊a·curv^b + c⌋`) plus the sweep seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplifyParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub seed: u64,
}

impl SimplifyParams {
    pub fn new(a: f64, b: f64, c: f64, seed: u64) -> Result<SimplifyParams> {
        for (name, v) in [("a", a), ("b", b), ("c", c)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "simplify parameter {name} must be non-negative and finite, got {v}"
                )));
            }
        }
        Ok(SimplifyParams { a, b, c, seed })
    }
}

impl Default for SimplifyParams {
    /// The retention curve used throughout the examples: strongly biased
    /// toward one point per flat voxel.
    fn default() -> Self {
        SimplifyParams {
            a: 900.0,
            b: 3.0,
            c: 1.0,
            seed: 0,
        }
    }
}

/// Eigen-decomposition of a 3×3 symmetric matrix: `values` descending,
/// `vectors[i]` the unit eigenvector of `values[i]`.
#[derive(Debug, Clone, Copy)]
pub struct Eigen3 {
    pub values: [f64; 3],
    pub vectors: [Vector3<f64>; 3],
}

/// Per-voxel shape statistics produced by [`voxel_curvature`].
#[derive(Debug, Clone, Copy)]
pub struct CurvatureResult {
    pub centroid: Point3,
    pub covariance: Matrix3<f64>,
    pub eigen: Eigen3,
    /// Surface variation `λ_min / Σλ`, clamped to `[0, 1/3]`.
    pub curvature: f64,
}

/// Mean of a non-empty point set.
pub fn centroid(points: &[Point3]) -> Result<Point3> {
    if points.is_empty() {
        return Err(Error::EmptyVoxel);
    }
    let mut sum = Vector3::zeros();
    for p in points {
        sum += p.coords();
    }
    Ok(Point3::from_coords(sum / points.len() as f64))
}

/// Covariance of `points` about `reference`: `(1/n)·Σ (q−r)(q−r)ᵀ`.
pub fn voxel_covariance(points: &[Point3], reference: Point3) -> Result<Matrix3<f64>> {
    if points.is_empty() {
        return Err(Error::EmptyVoxel);
    }
    if !reference.is_finite() {
        return Err(Error::NonFiniteValue);
    }
    let mut acc = Matrix3::zeros();
    for p in points {
        let d = *p - reference;
        acc += d * d.transpose();
    }
    Ok(acc / points.len() as f64)
}

/// Eigen-decomposition of a symmetric 3×3 matrix, eigenvalues descending.
/// Values in `(-1e-12, 0)` are clamped to zero (covariances are positive
/// semidefinite up to rounding); genuinely negative eigenvalues of an
/// indefinite input are returned as-is.
pub fn eigen3_symmetric(m: &Matrix3<f64>) -> Result<Eigen3> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue);
    }
    for r in 0..3 {
        for c in (r + 1)..3 {
            if (m[(r, c)] - m[(c, r)]).abs() > SYMMETRY_EPS {
                return Err(Error::NotSymmetric);
            }
        }
    }
    let sym = (m + m.transpose()) * 0.5;
    let decomp = sym.symmetric_eigen();
    let mut pairs: Vec<(f64, Vector3<f64>)> = (0..3)
        .map(|idx| {
            let mut value = decomp.eigenvalues[idx];
            if value > -SYMMETRY_EPS && value < 0.0 {
                value = 0.0;
            }
            (value, decomp.eigenvectors.column(idx).into_owned())
        })
        .collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite eigenvalues"));
    Ok(Eigen3 {
        values: [pairs[0].0, pairs[1].0, pairs[2].0],
        vectors: [pairs[0].1, pairs[1].1, pairs[2].1],
    })
}

/// Covariance, eigen-structure and surface variation of one voxel's points,
/// taken about their centroid.
pub fn voxel_curvature(points: &[Point3]) -> Result<CurvatureResult> {
    let center = centroid(points)?;
    let covariance = voxel_covariance(points, center)?;
    let eigen = eigen3_symmetric(&covariance)?;
    let total: f64 = eigen.values.iter().sum();
    let curvature = if total > 0.0 {
        (eigen.values[2] / total).clamp(0.0, 1.0 / 3.0)
    } else {
        0.0
    };
    Ok(CurvatureResult {
        centroid: center,
        covariance,
        eigen,
        curvature,
    })
}

/// Number of points to keep for a voxel of the given curvature:
/// `⌊a·curv^b + c⌋` clamped to `[1, available]`.
pub fn retention_count(curvature: f64, params: &SimplifyParams, available: usize) -> usize {
    let raw = (params.a * curvature.powf(params.b) + params.c).floor();
    if raw >= available as f64 {
        available
    } else if raw >= 1.0 {
        // raw < available, so the cast is in range.
        (raw as usize).min(available)
    } else {
        available.min(1)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable per-voxel RNG seed: the sweep seed mixed with the voxel address,
/// so the selection in one voxel never depends on any other voxel.
fn voxel_seed(seed: u64, key: VoxelKey) -> u64 {
    let mut h = splitmix64(seed);
    for part in [
        key.i as i64 as u64,
        key.j as i64 as u64,
        key.l as u64,
        key.k as i64 as u64,
    ] {
        h = splitmix64(h ^ part);
    }
    h
}

/// Keep `n_keep` points chosen uniformly without replacement (Fisher–Yates
/// prefix), preserving the original relative order of the survivors.
fn select_points(points: &[Point3], n_keep: usize, rng: &mut ChaCha8Rng) -> Vec<Point3> {
    if n_keep >= points.len() {
        return points.to_vec();
    }
    let mut indices: Vec<usize> = (0..points.len()).collect();
    for slot in 0..n_keep {
        let pick = rng.random_range(slot..indices.len());
        indices.swap(slot, pick);
    }
    let mut chosen = indices[..n_keep].to_vec();
    chosen.sort_unstable();
    chosen.into_iter().map(|idx| points[idx]).collect()
}

/// Run the curvature-adaptive sweep over every voxel of `map`, producing a
/// thinned map with identical voxel/level structure.
pub fn simplify_map(map: &MLSkiMap, params: &SimplifyParams) -> MLSkiMap {
    map.map_voxels(|voxel| {
        let n = voxel.points.len();
        if n == 1 {
            return voxel.points.to_vec();
        }
        let curvature = voxel_curvature(voxel.points)
            .map(|r| r.curvature)
            .expect("map voxels are non-empty");
        let keep = retention_count(curvature, params, n);
        if keep >= n {
            return voxel.points.to_vec();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(voxel_seed(params.seed, voxel.key));
        select_points(voxel.points, keep, &mut rng)
    })
}

/// Render every point colored by its voxel's curvature (green = flat,
/// red = max variation) for visual inspection of the retention signal.
pub fn curvature_color_cloud(map: &MLSkiMap) -> Result<PointCloud> {
    const FLAT: Rgb = [40, 200, 40];
    const CURVED: Rgb = [220, 30, 30];
    let mut points = Vec::with_capacity(map.point_count());
    let mut colors = Vec::with_capacity(map.point_count());
    for voxel in map.iter_voxels() {
        let curvature = voxel_curvature(voxel.points)?.curvature;
        let color = lerp_color(FLAT, CURVED, curvature / (1.0 / 3.0));
        for &p in voxel.points {
            points.push(p);
            colors.push(color);
        }
    }
    PointCloud::with_colors(points, colors)
}
