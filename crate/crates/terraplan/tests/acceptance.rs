//! End-to-end acceptance checks for the mapping → analysis → planning stack.
//!
//! Every criterion is verified against something the implementation cannot
//! share: an independently coded numeric oracle, an analytically known
//! scene, or byte-level determinism. Each test prints one `PASS` line with
//! its measured margins (visible under `--nocapture`).

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use terraplan::geom::Point3;
use terraplan::io::PointCloud;
use terraplan::pipeline::{cmd_analyze, cmd_build, cmd_plan, cmd_scenegen, RunConfig};
use terraplan::planner::{astar, plan};
use terraplan::scenegen::{generate, RockSpec, SceneKind, SceneSpec, SceneTruth};
use terraplan::simplify::{simplify_map, voxel_curvature, SimplifyParams};
use terraplan::skimap::{MLSkiMap, MapConfig};
use terraplan::traversability::{
    compute_field, pose_cost, wheel_footprints, Heading, Pose2D, TraversabilityConfig, VehicleModel,
};
use terraplan::wtg::{build_wtg, NodeId, Wtg, WtgNode};
use terraplan::{Error, Result};

const CELL: f64 = 0.1;
const LEVEL_GAP: f64 = 0.5;

/// Build a map with the grid origin half a cell below z = 0 so flat ground
/// at z = 0 fills one voxel instead of flickering across a voxel boundary.
fn build_map(cloud: &PointCloud, cell: f64) -> Result<MLSkiMap> {
    let config =
        MapConfig::new(cell, LEVEL_GAP)?.with_origin(Point3::new(0.0, 0.0, -cell / 2.0))?;
    MLSkiMap::build(cloud, config)
}

fn reference_vehicle(max_tilt_deg: f64) -> VehicleModel {
    VehicleModel::new(0.235, 0.175, 0.12, 0.09, max_tilt_deg.to_radians())
        .expect("reference vehicle dimensions are valid")
}

fn median(mut counts: Vec<usize>) -> usize {
    assert!(!counts.is_empty());
    counts.sort_unstable();
    counts[counts.len() / 2]
}

// ---------------------------------------------------------------------------
// Criterion 1 — curvature and eigen decomposition against an independent
// characteristic-polynomial oracle.
// ---------------------------------------------------------------------------

/// Covariance of a point set computed from scratch (no shared code with the
/// library: plain arrays, same 1/n normalization).
fn brute_covariance(points: &[[f64; 3]]) -> [[f64; 3]; 3] {
    let n = points.len() as f64;
    let mut mean = [0.0_f64; 3];
    for p in points {
        for (m, v) in mean.iter_mut().zip(p) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    let mut cov = [[0.0_f64; 3]; 3];
    for p in points {
        let d = [p[0] - mean[0], p[1] - mean[1], p[2] - mean[2]];
        for (r, row) in cov.iter_mut().enumerate() {
            for (c, slot) in row.iter_mut().enumerate() {
                *slot += d[r] * d[c];
            }
        }
    }
    for row in &mut cov {
        for slot in row.iter_mut() {
            *slot /= n;
        }
    }
    cov
}

/// Eigenvalues of a symmetric positive-semidefinite 3×3 matrix in descending
/// order, as roots of the characteristic polynomial
/// `f(λ) = λ³ − tr·λ² + m2·λ − det`.
///
/// The extreme roots come from monotone Newton iterations — the largest down
/// from the trace (f is convex right of tr/3), the smallest up from zero
/// (f is concave left of tr/3) — so the near-zero eigenvalues of very flat
/// point sets stay accurate in relative terms, where the closed-form
/// trigonometric solution loses ~√ε absolute accuracy near repeated roots.
fn characteristic_roots(m: [[f64; 3]; 3]) -> [f64; 3] {
    let tr = m[0][0] + m[1][1] + m[2][2];
    let m2 = m[0][0] * m[1][1] - m[0][1] * m[0][1] + m[0][0] * m[2][2] - m[0][2] * m[0][2]
        + m[1][1] * m[2][2]
        - m[1][2] * m[1][2];
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[1][2])
        - m[0][1] * (m[0][1] * m[2][2] - m[1][2] * m[0][2])
        + m[0][2] * (m[0][1] * m[1][2] - m[1][1] * m[0][2]);
    let f = |x: f64| ((x - tr) * x + m2) * x - det;
    let df = |x: f64| (3.0 * x - 2.0 * tr) * x + m2;
    let newton = |start: f64| {
        let mut x = start;
        for _ in 0..200 {
            let slope = df(x);
            if slope == 0.0 {
                break;
            }
            let next = x - f(x) / slope;
            if next == x {
                break;
            }
            x = next;
        }
        x
    };
    let lo = newton(0.0);
    let hi = newton(tr);
    [hi, tr - hi - lo, lo]
}

#[test]
fn c01_curvature_matches_characteristic_polynomial_oracle() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC01);
    let mut worst_residual = 0.0_f64;
    let mut worst_delta = 0.0_f64;
    for round in 0..500 {
        // Random voxel contents with varied anisotropy: full 3D blobs plus
        // exactly planar and near-linear sets.
        let n = rng.random_range(4..=48);
        let mut scale = [0.0_f64; 3];
        for s in &mut scale {
            *s = 10.0_f64.powf(rng.random_range(-4.0..-1.3));
        }
        if round % 5 == 0 {
            scale[2] = 0.0; // exact plane
        }
        if round % 7 == 0 {
            scale[1] = 1e-6;
            scale[2] = 1e-7; // near-linear needle
        }
        let center: [f64; 3] = [
            rng.random_range(-5.0..5.0),
            rng.random_range(-5.0..5.0),
            rng.random_range(-5.0..5.0),
        ];
        let points: Vec<Point3> = (0..n)
            .map(|_| {
                Point3::new(
                    center[0] + rng.random_range(-1.0..1.0) * scale[0],
                    center[1] + rng.random_range(-1.0..1.0) * scale[1],
                    center[2] + rng.random_range(-1.0..1.0) * scale[2],
                )
            })
            .collect();

        let result = voxel_curvature(&points).expect("random voxel sets are analyzable");
        for axis in 0..3 {
            let lambda = result.eigen.values[axis];
            let v = result.eigen.vectors[axis];
            let residual = (result.covariance * v - v * lambda).amax();
            worst_residual = worst_residual.max(residual);
        }

        let raw: Vec<[f64; 3]> = points.iter().map(|p| [p.x, p.y, p.z]).collect();
        let roots = characteristic_roots(brute_covariance(&raw));
        let oracle = (roots[2] / (roots[0] + roots[1] + roots[2])).clamp(0.0, 1.0 / 3.0);
        worst_delta = worst_delta.max((result.curvature - oracle).abs());
    }
    assert!(
        worst_residual < 1e-9,
        "eigen residual ‖Cv − λv‖∞ = {worst_residual:.3e}, want < 1e-9"
    );
    assert!(
        worst_delta < 1e-9,
        "curvature delta vs oracle = {worst_delta:.3e}, want < 1e-9"
    );
    let elapsed = t0.elapsed();
    assert!(
        elapsed < Duration::from_secs(5),
        "500 voxels took {elapsed:?}, budget 5 s"
    );
    println!(
        "PASS c01 — 500 random voxels: eigen residual ≤ {worst_residual:.2e}, \
         curvature delta ≤ {worst_delta:.2e}, {elapsed:?}"
    );
}

// ---------------------------------------------------------------------------
// Criterion 2 — curvature-driven decimation on the desk scene.
// ---------------------------------------------------------------------------

#[test]
fn c02_desk_simplification_thins_flats_and_keeps_creases() -> Result<()> {
    let t0 = Instant::now();
    let (cloud, truth) = generate(&SceneSpec::new(SceneKind::DeskFloor, 7))?;
    assert!(
        cloud.len() >= 50_000,
        "desk scene has {} points, want ≥ 50k",
        cloud.len()
    );
    let map = build_map(&cloud, CELL)?;
    let slim = simplify_map(&map, &SimplifyParams::new(900.0, 3.0, 1.0, 0)?);
    let fraction = slim.point_count() as f64 / map.point_count() as f64;
    assert!(
        fraction < 0.20,
        "retained {:.1}% of points, want < 20%",
        fraction * 100.0
    );

    let SceneTruth::DeskFloor { desk, .. } = truth else {
        panic!("desk truth")
    };

    // Open floor, well away from the desk: near-planar voxels collapse hard.
    let mut flat = Vec::new();
    for i in 5..15 {
        for j in 5..15 {
            let voxel = slim.surface_voxel(i, j, 0).expect("open floor voxel");
            flat.push(voxel.points.len());
        }
    }
    let flat_median = median(flat);
    assert_eq!(flat_median, 1, "flat-floor median retention per voxel");

    // Columns on the desk rim blend the vertical skirt into the horizontal
    // top — a crease that curvature must preserve with more points.
    let (rim_i, j0, _) = map.config().cell_index(Point3::new(desk.x0, desk.y0, 0.0));
    let (_, j1, _) = map.config().cell_index(Point3::new(desk.x0, desk.y1, 0.0));
    let mut rim = Vec::new();
    for j in (j0 + 2)..=(j1 - 3) {
        let top = *slim.column_levels(rim_i, j).last().expect("rim column");
        let voxel = slim
            .surface_voxel(rim_i, j, top.level)
            .expect("rim crease voxel");
        rim.push(voxel.points.len());
    }
    let rim_median = median(rim);
    assert!(
        rim_median > flat_median,
        "crease voxels keep {rim_median} ≤ flat median {flat_median}"
    );
    let elapsed = t0.elapsed();
    assert!(
        elapsed < Duration::from_secs(10),
        "desk decimation took {elapsed:?}, budget 10 s"
    );
    println!(
        "PASS c02 — {} → {} points ({:.1}%), flat median {flat_median}/voxel, \
         crease median {rim_median}/voxel, {elapsed:?}",
        map.point_count(),
        slim.point_count(),
        fraction * 100.0
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// Criterion 3 — measured pose tilt against analytic incline grades.
// ---------------------------------------------------------------------------

#[test]
fn c03_ramp_tilt_within_one_degree_and_over_tilt_blocks() -> Result<()> {
    let window = TraversabilityConfig::new(0.35)?;
    let vehicle = reference_vehicle(35.0);
    let mut measured = Vec::new();
    for angle in [10.0, 20.0, 30.0] {
        let (cloud, truth) = generate(&SceneSpec::new(SceneKind::Ramp { angle_deg: angle }, 3))?;
        let map = build_map(&cloud, CELL)?;
        let SceneTruth::Ramp { incline, .. } = truth else {
            panic!("ramp truth")
        };
        let mid = Point3::new(
            (incline.x0 + incline.x1) / 2.0,
            (incline.y0 + incline.y1) / 2.0,
            0.0,
        );
        let (i, j, _) = map.config().cell_index(mid);
        for heading in Heading::ALL {
            let cost = pose_cost(&map, i, j, 0, heading, &vehicle, &window);
            let tangent = cost
                .finite()
                .unwrap_or_else(|| panic!("mid-incline pose blocked at {angle}°, {heading:?}"));
            let degrees = tangent.atan().to_degrees();
            assert!(
                (degrees - angle).abs() <= 1.0,
                "incline {angle}° {heading:?}: measured {degrees:.2}°, want ±1°"
            );
            if heading == Heading::ALL[0] {
                measured.push(degrees);
            }
        }
    }
    // A grade beyond the tip-over limit blocks the uphill heading.
    let (cloud, truth) = generate(&SceneSpec::new(SceneKind::Ramp { angle_deg: 40.0 }, 3))?;
    let map = build_map(&cloud, CELL)?;
    let SceneTruth::Ramp { incline, .. } = truth else {
        panic!("ramp truth")
    };
    let mid = Point3::new(
        (incline.x0 + incline.x1) / 2.0,
        (incline.y0 + incline.y1) / 2.0,
        0.0,
    );
    let (i, j, _) = map.config().cell_index(mid);
    let strict = reference_vehicle(30.0);
    let uphill = pose_cost(&map, i, j, 0, Heading::ALL[0], &strict, &window);
    assert!(
        uphill.is_blocked(),
        "40° incline must block a 30°-limit vehicle uphill"
    );
    println!(
        "PASS c03 — inclines 10/20/30° measured {:.2}/{:.2}/{:.2}°; \
         40° blocks at a 30° tilt limit",
        measured[0], measured[1], measured[2]
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// Criterion 4 — graph connectivity across a riser, including the exact
// boundary height.
// ---------------------------------------------------------------------------

#[test]
fn c04_step_edges_respect_height_bound_incl_exact_boundary() -> Result<()> {
    // Dyadic cell size and origin make the plateau surface heights exact,
    // so the boundary case compares equal floats, not nearly equal ones.
    let cell = 0.125;
    let c_max = 0.25;
    let vehicle = VehicleModel::new(0.235, 0.175, 0.12, 0.40, 70.0_f64.to_radians())?;
    let window = TraversabilityConfig::new(c_max)?;
    let mut counts = Vec::new();
    for (height, expect_edges) in [(0.5 * c_max, true), (c_max, true), (1.5 * c_max, false)] {
        let mut spec = SceneSpec::new(SceneKind::Step { height }, 11);
        spec.sigma = 0.0; // exact plateaus: the riser is exactly `height`
        let (cloud, truth) = generate(&spec)?;
        let map = build_map(&cloud, cell)?;
        let field = compute_field(&map, &vehicle, &window);
        let graph = build_wtg(&map, &field, c_max)?;
        let SceneTruth::Step { step_x, .. } = truth else {
            panic!("step truth")
        };
        assert!(
            graph.nodes().iter().any(|n| n.pos.x < step_x),
            "low plateau populated"
        );
        assert!(
            graph.nodes().iter().any(|n| n.pos.x > step_x),
            "high plateau populated"
        );
        let pos = |id: NodeId| {
            graph
                .node(graph.node_index(id).expect("endpoint exists"))
                .pos
        };
        let crossings = graph
            .iter_edges()
            .filter(|&(u, v, _)| (pos(u).x < step_x) != (pos(v).x < step_x))
            .count();
        if expect_edges {
            assert!(
                crossings > 0,
                "riser {height} m: no edges across at c_max {c_max}"
            );
        } else {
            assert_eq!(crossings, 0, "riser {height} m: unexpected edges across");
        }
        counts.push(crossings);
    }
    println!(
        "PASS c04 — riser crossings at 0.5/1.0/1.5 × c_max: {}/{}/{} edges",
        counts[0], counts[1], counts[2]
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// Criterion 5 — a wheel-sized hole blocks exactly the poses that hang a
// wheel over it.
// ---------------------------------------------------------------------------

#[test]
fn c05_wheel_over_hole_blocks_and_solid_floor_passes() -> Result<()> {
    let radius = 0.12; // hole sized to one wheel contact disk
    let (cloud, truth) = generate(&SceneSpec::new(SceneKind::Hole { radius }, 17))?;
    let map = build_map(&cloud, CELL)?;
    let SceneTruth::Hole { center, .. } = truth else {
        panic!("hole truth")
    };
    let (hole_i, hole_j, _) = map
        .config()
        .cell_index(Point3::new(center.0, center.1, 0.0));

    // The hole must empty exactly one cell of the 4 m × 4 m floor.
    let mut empty = Vec::new();
    for i in 0..40 {
        for j in 0..40 {
            if map.column_levels(i, j).is_empty() {
                empty.push((i, j));
            }
        }
    }
    assert_eq!(
        empty,
        vec![(hole_i, hole_j)],
        "exactly the hole cell is empty"
    );
    let (hole_x, hole_y) = map.config().column_center(hole_i, hole_j);

    let vehicle = reference_vehicle(35.0);
    let field = compute_field(&map, &vehicle, &TraversabilityConfig::new(0.25)?);
    let (mut over, mut solid) = (0_usize, 0_usize);
    for i in 5..=34 {
        for j in 5..=34 {
            if (i, j) == (hole_i, hole_j) {
                continue; // the empty column carries no poses at all
            }
            let (tx, ty) = map.config().column_center(i, j);
            for heading in Heading::ALL {
                let disks = wheel_footprints(&Pose2D { tx, ty, heading }, &vehicle);
                let cost = field.cost(i, j, 0, heading).expect("interior floor pose");
                let covers_hole = disks
                    .iter()
                    .any(|d| (hole_x - d.cx).hypot(hole_y - d.cy) <= d.radius);
                if covers_hole {
                    over += 1;
                    assert!(
                        cost.is_blocked(),
                        "wheel over the hole at ({i},{j}) {heading:?} must block"
                    );
                } else if disks
                    .iter()
                    .all(|d| (hole_x - d.cx).hypot(hole_y - d.cy) >= d.radius + radius + 0.03)
                {
                    solid += 1;
                    assert!(
                        !cost.is_blocked(),
                        "fully solid pose at ({i},{j}) {heading:?} must pass"
                    );
                }
            }
        }
    }
    assert!(
        over >= 32,
        "want a real population of wheel-over-hole poses, got {over}"
    );
    assert!(
        solid >= 4000,
        "want a real population of solid poses, got {solid}"
    );
    println!("PASS c05 — {over} wheel-over-hole poses all blocked; {solid} solid poses all pass");
    Ok(())
}

// ---------------------------------------------------------------------------
// Criterion 6 — chassis clearance decides whether a rock under the body
// blocks the pose, per heading.
// ---------------------------------------------------------------------------

#[test]
fn c06_chassis_clearance_decides_rock_poses() -> Result<()> {
    let vehicle = reference_vehicle(35.0); // 0.09 m clearance
    let window = TraversabilityConfig::new(0.15)?;
    for (apex, expect_blocked) in [(0.10, true), (0.08, false)] {
        // Rock narrower than the wheel ring: wheels always sit on clean
        // floor, so only the chassis test distinguishes the two heights.
        let rock = RockSpec {
            cx: 2.05,
            cy: 2.05,
            radius: 0.15,
            height: apex,
        };
        let spec = SceneSpec {
            kind: SceneKind::Rocks { rocks: vec![rock] },
            density: 800.0,
            sigma: 0.0,
            seed: 21,
        };
        let (cloud, _) = generate(&spec)?;
        let map = build_map(&cloud, CELL)?;
        let (ri, rj, _) = map.config().cell_index(Point3::new(rock.cx, rock.cy, 0.0));

        // Centered pose: the apex sits under the chassis for every heading.
        for heading in Heading::ALL {
            let cost = pose_cost(&map, ri, rj, 0, heading, &vehicle, &window);
            assert_eq!(
                cost.is_blocked(),
                expect_blocked,
                "apex {apex} m, centered pose, {heading:?}"
            );
        }

        // Pose offset 0.2 m from the rock: the rotated chassis rectangle
        // reaches the rock cell only for some headings.
        let (pi, pj) = (ri, rj + 2);
        let (tx, ty) = map.config().column_center(pi, pj);
        let (rx, ry) = map.config().column_center(ri, rj);
        let mut blocked_headings = 0;
        for heading in Heading::ALL {
            let (sin, cos) = heading.angle().sin_cos();
            let (dx, dy) = (rx - tx, ry - ty);
            let under_chassis = (cos * dx + sin * dy).abs() <= vehicle.half_track()
                && (-sin * dx + cos * dy).abs() <= vehicle.half_wheelbase();
            let cost = pose_cost(&map, pi, pj, 0, heading, &vehicle, &window);
            assert_eq!(
                cost.is_blocked(),
                expect_blocked && under_chassis,
                "apex {apex} m, offset pose, {heading:?} (chassis over rock: {under_chassis})"
            );
            blocked_headings += usize::from(cost.is_blocked());
        }
        if expect_blocked {
            assert_eq!(
                blocked_headings, 6,
                "offset pose blocks exactly the covering headings"
            );
        } else {
            assert_eq!(blocked_headings, 0);
        }
    }
    println!(
        "PASS c06 — apex 1 cm above clearance blocks (all centered headings, \
         6/8 offset headings); 1 cm below passes everywhere"
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// Criterion 7 — search optimality against an exhaustive relaxation oracle,
// plus the analytic diagonal on a flat grid.
// ---------------------------------------------------------------------------

/// Random two-level grid graph, ≤ 450 nodes, with random edge presence and
/// weights.
fn random_two_level_graph(rng: &mut ChaCha8Rng) -> Wtg {
    let side: i32 = rng.random_range(9..=15);
    let d = 0.1;
    let mut nodes = Vec::new();
    for i in 0..side {
        for j in 0..side {
            let base = rng.random_range(-0.05..0.05);
            nodes.push(WtgNode {
                id: (i, j, 0),
                pos: Point3::new(i as f64 * d, j as f64 * d, base),
            });
            if rng.random_bool(0.5) {
                nodes.push(WtgNode {
                    id: (i, j, 1),
                    pos: Point3::new(
                        i as f64 * d,
                        j as f64 * d,
                        base + rng.random_range(0.6..1.2),
                    ),
                });
            }
        }
    }
    let ids: Vec<NodeId> = nodes.iter().map(|n| n.id).collect();
    let exists: std::collections::BTreeSet<NodeId> = ids.iter().copied().collect();
    let mut edges = Vec::new();
    for &(i, j, l) in &ids {
        for di in -1..=1 {
            for dj in -1..=1 {
                if (di, dj) == (0, 0) {
                    continue;
                }
                for level in 0..=1_u16 {
                    let to = (i + di, j + dj, level);
                    if exists.contains(&to) && rng.random_bool(0.65) {
                        edges.push(((i, j, l), to, rng.random_range(0.0..2.0)));
                    }
                }
            }
        }
    }
    Wtg::from_parts(10.0, nodes, &edges).expect("random graph parts are valid")
}

/// Bellman-Ford-style relaxation to a fixpoint — exhaustive, no heuristic,
/// no priority order. Step costs fold exactly like the searcher's.
fn relaxation_oracle(graph: &Wtg, start: usize, goal: usize, lambda: f64) -> Option<f64> {
    let mut dist = vec![f64::INFINITY; graph.len()];
    dist[start] = 0.0;
    loop {
        let mut changed = false;
        for u in 0..graph.len() {
            if !dist[u].is_finite() {
                continue;
            }
            let from = graph.node(u).pos;
            for edge in graph.edges_from(u) {
                let candidate =
                    dist[u] + (from.distance(graph.node(edge.to).pos) + lambda * edge.weight);
                if candidate < dist[edge.to] {
                    dist[edge.to] = candidate;
                    changed = true;
                }
            }
        }
        if !changed {
            return dist[goal].is_finite().then_some(dist[goal]);
        }
    }
}

#[test]
fn c07_astar_matches_relaxation_oracle_and_flat_diagonal() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC07);
    let lambdas = [0.0, 0.3, 1.1, 2.7];
    let (mut reachable, mut unreachable) = (0, 0);
    for round in 0..50 {
        let graph = random_two_level_graph(&mut rng);
        assert!(graph.len() <= 450, "graph has {} nodes", graph.len());
        let lambda = lambdas[round % lambdas.len()];
        let start = graph.node(0).id;
        let goal = graph.node(graph.len() - 1).id;
        let s = graph.node_index(start).expect("start exists");
        let t = graph.node_index(goal).expect("goal exists");
        match (
            astar(&graph, start, goal, lambda),
            relaxation_oracle(&graph, s, t, lambda),
        ) {
            (Ok(path), Some(expected)) => {
                reachable += 1;
                assert_eq!(
                    path.cost, expected,
                    "round {round}: search cost diverged from the relaxation oracle"
                );
                let refolded = path
                    .steps
                    .iter()
                    .fold(0.0, |acc, step| acc + (step.dist + lambda * step.trav));
                assert_eq!(
                    refolded, path.cost,
                    "round {round}: reported steps refold to the cost"
                );
            }
            (Err(Error::NoPath), None) => unreachable += 1,
            (result, oracle) => {
                panic!("round {round}: reachability disagreement: {result:?} vs {oracle:?}")
            }
        }
    }
    assert!(
        reachable >= 30,
        "want mostly reachable rounds, got {reachable}/50"
    );

    // Flat, obstacle-free 5×5 grid: corner to corner is the pure diagonal.
    let d = 0.1;
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    for i in 0..5_i32 {
        for j in 0..5_i32 {
            nodes.push(WtgNode {
                id: (i, j, 0),
                pos: Point3::new(i as f64 * d, j as f64 * d, 0.0),
            });
            for di in -1..=1_i32 {
                for dj in -1..=1_i32 {
                    let (ni, nj) = (i + di, j + dj);
                    if (di, dj) != (0, 0) && (0..5).contains(&ni) && (0..5).contains(&nj) {
                        edges.push(((i, j, 0), (ni, nj, 0), 0.0));
                    }
                }
            }
        }
    }
    let flat = Wtg::from_parts(0.25, nodes, &edges).expect("flat grid");
    let path = astar(&flat, (0, 0, 0), (4, 4, 0), 0.0).expect("diagonal route");
    let expected = 4.0 * std::f64::consts::SQRT_2 * d;
    assert!(
        (path.cost - expected).abs() <= 1e-9,
        "diagonal cost {} vs analytic {expected}",
        path.cost
    );
    assert_eq!(path.nodes.len(), 5, "the diagonal visits 5 nodes");
    let elapsed = t0.elapsed();
    assert!(
        elapsed < Duration::from_secs(5),
        "planner checks took {elapsed:?}, budget 5 s"
    );
    println!(
        "PASS c07 — 50 random graphs exact vs oracle ({reachable} reachable, \
         {unreachable} unreachable, both agreed); flat diagonal = 4√2·d; {elapsed:?}"
    );
}

// ---------------------------------------------------------------------------
// Criterion 8 — route topology on the three layered scenes.
// ---------------------------------------------------------------------------

#[test]
fn c08_island_bridge_and_garage_route_topologies() -> Result<()> {
    let vehicle = reference_vehicle(35.0);
    let window = TraversabilityConfig::new(0.25)?;

    // (a) The desk is an island: internally drivable, but no route connects
    // it to the floor in either direction.
    let (cloud, truth) = generate(&SceneSpec::new(SceneKind::DeskFloor, 14))?;
    let map = build_map(&cloud, CELL)?;
    let field = compute_field(&map, &vehicle, &window);
    let graph = build_wtg(&map, &field, 0.25)?;
    let SceneTruth::DeskFloor {
        desk, desk_height, ..
    } = truth
    else {
        panic!("desk truth")
    };
    let top = graph.snap_to_node(
        Point3::new(
            (desk.x0 + desk.x1) / 2.0,
            (desk.y0 + desk.y1) / 2.0,
            desk_height,
        ),
        0.5,
    )?;
    assert_eq!(top.2, 1, "desk top snaps to the raised level");
    let floor = graph.snap_to_node(Point3::new(0.5, 0.5, 0.0), 0.5)?;
    assert_eq!(floor.2, 0, "open floor snaps to the ground level");
    let across = graph.snap_to_node(Point3::new(desk.x0 + 0.7, desk.y0 + 0.7, desk_height), 0.5)?;
    assert!(
        astar(&graph, top, across, 0.5).is_ok(),
        "desk top is drivable on its own"
    );
    assert!(
        matches!(astar(&graph, floor, top, 0.5), Err(Error::NoPath)),
        "floor → desk"
    );
    assert!(
        matches!(astar(&graph, top, floor, 0.5), Err(Error::NoPath)),
        "desk → floor"
    );

    // (b) Banks joined only by the deck: the crossing rides the deck; remove
    // the deck and no route exists.
    let start = Point3::new(1.0, 2.1, 0.0);
    let goal = Point3::new(7.0, 2.1, 0.0);
    let (cloud, truth) = generate(&SceneSpec::new(SceneKind::Bridge { has_deck: true }, 31))?;
    let map = build_map(&cloud, CELL)?;
    let field = compute_field(&map, &vehicle, &window);
    let graph = build_wtg(&map, &field, 0.25)?;
    let SceneTruth::Bridge {
        channel_x, deck, ..
    } = truth
    else {
        panic!("bridge truth")
    };
    let deck = deck.expect("deck present");
    let path = plan(&graph, start, goal, 0.5, 0.5)?;
    let channel_nodes: Vec<&WtgNode> = path
        .nodes
        .iter()
        .filter(|n| n.pos.x > channel_x.0 && n.pos.x < channel_x.1)
        .collect();
    assert!(channel_nodes.len() >= 10, "the crossing spans the channel");
    for node in &channel_nodes {
        assert!(
            deck.contains(node.pos.x, node.pos.y),
            "node {:?} leaves the deck",
            node.id
        );
        assert!(
            node.pos.z.abs() < 0.1,
            "deck rides at bank height, node {:?}",
            node.id
        );
        assert_eq!(node.id.2, 1, "deck is the level above the channel bed");
    }
    let (cloud, _) = generate(&SceneSpec::new(SceneKind::Bridge { has_deck: false }, 31))?;
    let map = build_map(&cloud, CELL)?;
    let field = compute_field(&map, &vehicle, &window);
    let bare = build_wtg(&map, &field, 0.25)?;
    assert!(
        matches!(plan(&bare, start, goal, 0.5, 0.5), Err(Error::NoPath)),
        "no deck, no crossing"
    );

    // (c) Two storeys: the route enters on the ground level, climbs only on
    // the interior ramp, never descends, and ends on the upper slab.
    let (cloud, truth) = generate(&SceneSpec::new(SceneKind::Garage, 6))?;
    let map = build_map(&cloud, CELL)?;
    let field = compute_field(&map, &vehicle, &window);
    let graph = build_wtg(&map, &field, 0.25)?;
    let SceneTruth::Garage { ramp, upper_z, .. } = truth else {
        panic!("garage truth")
    };
    let route = plan(
        &graph,
        Point3::new(0.5, 1.5, 0.0),
        Point3::new(4.5, 0.5, upper_z),
        0.5,
        0.5,
    )?;
    let first = route.nodes.first().expect("non-empty route");
    let last = route.nodes.last().expect("non-empty route");
    assert!(first.pos.z < 0.1, "route starts at ground height");
    assert_eq!(first.id.2, 0, "route starts on the entrance level");
    assert!(
        (last.pos.z - upper_z).abs() < 0.05,
        "route ends at slab height"
    );
    assert_eq!(last.id.2, 1, "goal column stacks ground below the slab");
    let mut high_water = f64::NEG_INFINITY;
    for node in &route.nodes {
        let z = node.pos.z;
        if z > 0.1 && z < upper_z - 0.1 {
            assert!(
                ramp.contains(node.pos.x, node.pos.y),
                "climbing node {:?} must be on the ramp",
                node.id
            );
        }
        assert!(
            z >= high_water - 0.05,
            "route descends: z {z} after {high_water}"
        );
        high_water = high_water.max(z);
    }
    let levels: Vec<u16> = route.nodes.iter().map(|n| n.id.2).collect();
    assert!(
        levels.windows(2).all(|w| w[0] <= w[1]),
        "level sequence ascends: {levels:?}"
    );
    println!(
        "PASS c08 — desk isolated both ways; bridge crossing rides the deck \
         ({} channel nodes) and vanishes without it; garage route climbs the \
         ramp to the upper storey ({} nodes)",
        channel_nodes.len(),
        route.nodes.len()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// Criterion 9 — the distance/terrain trade-off has a finite crossover.
// ---------------------------------------------------------------------------

#[test]
fn c09_lambda_crossover_between_risky_and_safe_routes() -> Result<()> {
    // Two-row corridor: the bottom row is rough (pose cost 0.9 in every
    // direction), the top row smooth. Direct route: 3 straight rough steps.
    // Detour: one diagonal out, along the top, one diagonal back.
    let d = 0.1;
    let rough = 0.9;
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    for i in 0..4_i32 {
        for j in 0..2_i32 {
            nodes.push(WtgNode {
                id: (i, j, 0),
                pos: Point3::new(0.05 + i as f64 * d, 0.05 + j as f64 * d, 0.0),
            });
            for di in -1..=1_i32 {
                for dj in -1..=1_i32 {
                    let (ni, nj) = (i + di, j + dj);
                    if (di, dj) != (0, 0) && (0..4).contains(&ni) && (0..2).contains(&nj) {
                        edges.push(((i, j, 0), (ni, nj, 0), if j == 0 { rough } else { 0.0 }));
                    }
                }
            }
        }
    }
    let graph = Wtg::from_parts(0.25, nodes, &edges)?;
    let (start, goal): (NodeId, NodeId) = ((0, 0, 0), (3, 0, 0));

    // Analytic costs: direct = 3d + λ·3·rough; detour = d(1 + 2√2) + λ·rough
    // (the detour still pays once for leaving the rough start cell).
    let direct_len = 3.0 * d;
    let detour_len = d * (1.0 + 2.0 * std::f64::consts::SQRT_2);
    let crossover = (detour_len - direct_len) / (3.0 * rough - rough);
    assert!(
        crossover.is_finite() && crossover > 0.0,
        "crossover λ = {crossover}"
    );

    let direct: Vec<NodeId> = vec![(0, 0, 0), (1, 0, 0), (2, 0, 0), (3, 0, 0)];
    let detour: Vec<NodeId> = vec![(0, 0, 0), (1, 1, 0), (2, 1, 0), (3, 0, 0)];
    for (lambda, expected) in [
        (0.0, &direct),
        (0.5 * crossover, &direct),
        (2.0 * crossover, &detour),
        (10.0, &detour),
    ] {
        let path = astar(&graph, start, goal, lambda)?;
        let ids: Vec<NodeId> = path.nodes.iter().map(|n| n.id).collect();
        assert_eq!(&ids, expected, "route at λ = {lambda}");
        let analytic = (direct_len + lambda * (3.0 * rough)).min(detour_len + lambda * rough);
        assert!(
            (path.cost - analytic).abs() < 1e-9,
            "cost at λ = {lambda}: {} vs analytic {analytic}",
            path.cost
        );
    }
    println!(
        "PASS c09 — risky route below λ* = {crossover:.4}, safe route above; \
         costs match the analytic route formulas"
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// Criterion 10 — the full file pipeline is byte-reproducible.
// ---------------------------------------------------------------------------

#[test]
fn c10_pipeline_reruns_are_byte_identical() -> Result<()> {
    let spec = SceneSpec::new(SceneKind::Bridge { has_deck: true }, 123);
    let config = RunConfig {
        origin: Point3::new(0.0, 0.0, -0.05),
        ..RunConfig::default()
    };
    let artifacts = [
        "scene.ply",
        "map.mlsk",
        "site.field.json",
        "site.wtg.json",
        "site.wtg.bin",
        "site.path.json",
    ];
    let run = |dir: &Path| -> Result<Vec<Vec<u8>>> {
        let scene = dir.join("scene.ply");
        cmd_scenegen(&spec, &scene, None)?;
        let map = dir.join("map.mlsk");
        cmd_build(&scene, &map, &config)?;
        let base = dir.join("site");
        cmd_analyze(&map, &base, &config, false)?;
        cmd_plan(
            &dir.join("site.wtg.bin"),
            &base,
            Point3::new(1.0, 2.1, 0.0),
            Point3::new(7.0, 2.1, 0.0),
            &config,
        )?;
        artifacts
            .iter()
            .map(|name| fs::read(dir.join(name)).map_err(Error::from))
            .collect()
    };
    let dir_a = tempfile::tempdir().expect("tempdir");
    let dir_b = tempfile::tempdir().expect("tempdir");
    let first = run(dir_a.path())?;
    let second = run(dir_b.path())?;
    for (name, (a, b)) in artifacts.iter().zip(first.iter().zip(second.iter())) {
        assert!(a == b, "{name} differs between identical pipeline runs");
    }
    println!(
        "PASS c10 — two full pipeline runs byte-identical across {} artifacts ({} bytes total)",
        artifacts.len(),
        first.iter().map(Vec::len).sum::<usize>()
    );
    Ok(())
}
