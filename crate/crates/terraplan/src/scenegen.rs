//! Deterministic synthetic terrain generator.
//!
//! Real outdoor scans aren't reproducible test inputs, so every fixture
//! scene here is generated from a seed: flat floor, inclined ramp, step,
//! desk on a floor, floor with a hole, rock field, bridge over a sunken
//! channel, and a two-storey garage with a connecting ramp. Each scene
//! comes with analytic ground truth (plane angles, polygons, heights) so
//! tests can check derived quantities against geometry instead of golden
//! files.
//!
//! Sampling is jittered-grid: one point per grid cell of area `1/density`,
//! uniformly placed inside its cell, plus Gaussian height noise clamped to
//! `±3σ` so the truth metadata stays a hard bound on point deviation.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::geom::Point3;
use crate::io::{json_f64, json_object, write_json_document, PointCloud};

/// Axis-aligned ground-plane rectangle `[x0, x1) × [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Rect {
        Rect { x0, x1, y0, y1 }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        (self.x0..self.x1).contains(&x) && (self.y0..self.y1).contains(&y)
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn depth(&self) -> f64 {
        self.y1 - self.y0
    }

    fn to_json(self) -> Value {
        json_object(vec![
            ("x0", Value::from(self.x0)),
            ("x1", Value::from(self.x1)),
            ("y0", Value::from(self.y0)),
            ("y1", Value::from(self.y1)),
        ])
    }
}

/// One conical rock: apex `height` above the floor at `(cx, cy)`, fading
/// to floor level at `radius`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RockSpec {
    pub cx: f64,
    pub cy: f64,
    pub radius: f64,
    pub height: f64,
}

impl RockSpec {
    fn height_at(&self, x: f64, y: f64) -> Option<f64> {
        let d = (x - self.cx).hypot(y - self.cy);
        (d < self.radius).then(|| self.height * (1.0 - d / self.radius))
    }
}

/// Which terrain to generate, with its feature dimensions.
#[derive(Debug, Clone, PartialEq)]
pub enum SceneKind {
    /// Level plane of the given x × y size.
    Flat { size: (f64, f64) },
    /// Approach floor, then an incline of the given grade, then a summit
    /// platform.
    Ramp { angle_deg: f64 },
    /// Low plateau meeting a high plateau at a vertical riser of the given
    /// height.
    Step { height: f64 },
    /// A 2 m × 2 m desk (top and perimeter skirt) standing on a 6 m × 6 m
    /// floor.
    DeskFloor,
    /// Floor with a circular hole of the given radius punched through it.
    Hole { radius: f64 },
    /// Floor strewn with conical rocks.
    Rocks { rocks: Vec<RockSpec> },
    /// Two banks separated by a sunken channel; a deck strip spans the
    /// channel unless `has_deck` is false.
    Bridge { has_deck: bool },
    /// Two storeys joined by a straight interior ramp; the upper slab
    /// overhangs part of the ground floor.
    Garage,
}

/// Full recipe for one scene; equal specs generate identical clouds.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub kind: SceneKind,
    /// Sampling density in points per square meter of surface.
    pub density: f64,
    /// Standard deviation of the height noise (clamped at ±3σ).
    pub sigma: f64,
    pub seed: u64,
}

impl SceneSpec {
    /// A spec with the scene's conventional density and 2 mm noise.
    pub fn new(kind: SceneKind, seed: u64) -> SceneSpec {
        let density = match kind {
            SceneKind::Flat { .. } => 100.0,
            SceneKind::Ramp { .. } => 800.0,
            SceneKind::Step { .. } => 400.0,
            SceneKind::DeskFloor => 2000.0,
            SceneKind::Hole { .. } => 800.0,
            SceneKind::Rocks { .. } => 800.0,
            SceneKind::Bridge { .. } => 400.0,
            SceneKind::Garage => 600.0,
        };
        SceneSpec {
            kind,
            density,
            sigma: 0.002,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if !self.density.is_finite() || self.density <= 0.0 {
            return bad(format!("density must be positive, got {}", self.density));
        }
        if !self.sigma.is_finite() || self.sigma < 0.0 {
            return bad(format!(
                "noise sigma must be non-negative, got {}",
                self.sigma
            ));
        }
        match &self.kind {
            SceneKind::Flat { size: (w, h) } => {
                if !(w.is_finite() && h.is_finite() && *w > 0.0 && *h > 0.0) {
                    return bad(format!("flat size must be positive, got {w} × {h}"));
                }
            }
            SceneKind::Ramp { angle_deg } => {
                if !angle_deg.is_finite() || *angle_deg <= 0.0 || *angle_deg >= 90.0 {
                    return bad(format!("ramp angle must be in (0°, 90°), got {angle_deg}"));
                }
            }
            SceneKind::Step { height } => {
                if !height.is_finite() || *height <= 0.0 {
                    return bad(format!("step height must be positive, got {height}"));
                }
            }
            SceneKind::Hole { radius } => {
                if !radius.is_finite() || *radius <= 0.0 || *radius > 1.0 {
                    return bad(format!("hole radius must be in (0, 1] m, got {radius}"));
                }
            }
            SceneKind::Rocks { rocks } => {
                if rocks.is_empty() {
                    return bad("rock field needs at least one rock".into());
                }
                for r in rocks {
                    let ok = [r.cx, r.cy, r.radius, r.height]
                        .iter()
                        .all(|v| v.is_finite())
                        && r.radius > 0.0
                        && r.height > 0.0;
                    if !ok {
                        return bad(format!("invalid rock {r:?}"));
                    }
                }
            }
            SceneKind::DeskFloor | SceneKind::Bridge { .. } | SceneKind::Garage => {}
        }
        Ok(())
    }
}

/// Analytic ground truth returned alongside each generated cloud.
#[derive(Debug, Clone, PartialEq)]
pub enum SceneTruth {
    Flat {
        floor: Rect,
    },
    Ramp {
        approach: Rect,
        /// Incline region; height above the approach floor is
        /// `(x − incline.x0) · tan(angle)`.
        incline: Rect,
        summit: Rect,
        angle_deg: f64,
        rise: f64,
    },
    Step {
        low: Rect,
        high: Rect,
        /// x of the riser line.
        step_x: f64,
        height: f64,
    },
    DeskFloor {
        floor: Rect,
        desk: Rect,
        desk_height: f64,
    },
    Hole {
        floor: Rect,
        center: (f64, f64),
        radius: f64,
    },
    Rocks {
        floor: Rect,
        rocks: Vec<RockSpec>,
    },
    Bridge {
        extent: Rect,
        /// x-range of the sunken channel.
        channel_x: (f64, f64),
        /// Channel bed height (negative: below the banks at z = 0).
        bed_z: f64,
        /// Deck strip spanning the channel at z = 0, if present.
        deck: Option<Rect>,
    },
    Garage {
        ground: Rect,
        /// Interior ramp strip; height above ground is
        /// `(x − ramp.x0) · slope`.
        ramp: Rect,
        slope: f64,
        /// Upper-storey slabs, all at `upper_z`.
        slabs: Vec<Rect>,
        upper_z: f64,
    },
}

impl SceneTruth {
    pub fn to_json_value(&self) -> Result<Value> {
        let v = match self {
            SceneTruth::Flat { floor } => json_object(vec![
                ("kind", Value::from("flat")),
                ("floor", floor.to_json()),
            ]),
            SceneTruth::Ramp {
                approach,
                incline,
                summit,
                angle_deg,
                rise,
            } => json_object(vec![
                ("kind", Value::from("ramp")),
                ("approach", approach.to_json()),
                ("incline", incline.to_json()),
                ("summit", summit.to_json()),
                ("angle_deg", json_f64(*angle_deg)?),
                ("rise", json_f64(*rise)?),
            ]),
            SceneTruth::Step {
                low,
                high,
                step_x,
                height,
            } => json_object(vec![
                ("kind", Value::from("step")),
                ("low", low.to_json()),
                ("high", high.to_json()),
                ("step_x", json_f64(*step_x)?),
                ("height", json_f64(*height)?),
            ]),
            SceneTruth::DeskFloor {
                floor,
                desk,
                desk_height,
            } => json_object(vec![
                ("kind", Value::from("desk_floor")),
                ("floor", floor.to_json()),
                ("desk", desk.to_json()),
                ("desk_height", json_f64(*desk_height)?),
            ]),
            SceneTruth::Hole {
                floor,
                center,
                radius,
            } => json_object(vec![
                ("kind", Value::from("hole")),
                ("floor", floor.to_json()),
                (
                    "center",
                    Value::Array(vec![json_f64(center.0)?, json_f64(center.1)?]),
                ),
                ("radius", json_f64(*radius)?),
            ]),
            SceneTruth::Rocks { floor, rocks } => {
                let rocks: Result<Vec<Value>> = rocks
                    .iter()
                    .map(|r| {
                        Ok(json_object(vec![
                            ("cx", json_f64(r.cx)?),
                            ("cy", json_f64(r.cy)?),
                            ("radius", json_f64(r.radius)?),
                            ("height", json_f64(r.height)?),
                        ]))
                    })
                    .collect();
                json_object(vec![
                    ("kind", Value::from("rocks")),
                    ("floor", floor.to_json()),
                    ("rocks", Value::Array(rocks?)),
                ])
            }
            SceneTruth::Bridge {
                extent,
                channel_x,
                bed_z,
                deck,
            } => json_object(vec![
                ("kind", Value::from("bridge")),
                ("extent", extent.to_json()),
                (
                    "channel_x",
                    Value::Array(vec![json_f64(channel_x.0)?, json_f64(channel_x.1)?]),
                ),
                ("bed_z", json_f64(*bed_z)?),
                ("deck", deck.map_or(Value::Null, Rect::to_json)),
            ]),
            SceneTruth::Garage {
                ground,
                ramp,
                slope,
                slabs,
                upper_z,
            } => json_object(vec![
                ("kind", Value::from("garage")),
                ("ground", ground.to_json()),
                ("ramp", ramp.to_json()),
                ("slope", json_f64(*slope)?),
                (
                    "slabs",
                    Value::Array(slabs.iter().map(|s| s.to_json()).collect()),
                ),
                ("upper_z", json_f64(*upper_z)?),
            ]),
        };
        Ok(v)
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        write_json_document(&self.to_json_value()?, path)
    }
}

/// Jittered-grid sampler: one point per cell of side `1/√density`, with
/// height noise clamped to ±3σ.
struct Sampler {
    rng: ChaCha8Rng,
    spacing: f64,
    noise: Option<Normal<f64>>,
    sigma: f64,
    points: Vec<Point3>,
}

impl Sampler {
    fn new(spec: &SceneSpec) -> Sampler {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(spec.seed),
            spacing: 1.0 / spec.density.sqrt(),
            noise: (spec.sigma > 0.0)
                .then(|| Normal::new(0.0, spec.sigma).expect("sigma validated")),
            sigma: spec.sigma,
            points: Vec::new(),
        }
    }

    fn jitter(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    fn height_noise(&mut self) -> f64 {
        match self.noise {
            Some(n) => n
                .sample(&mut self.rng)
                .clamp(-3.0 * self.sigma, 3.0 * self.sigma),
            None => 0.0,
        }
    }

    /// Sample a horizontal region; `height` returns the surface height at a
    /// ground position, or `None` for a gap (hole, carve-out).
    fn region(&mut self, rect: Rect, mut height: impl FnMut(f64, f64) -> Option<f64>) {
        let nx = (rect.width() / self.spacing).ceil() as usize;
        let ny = (rect.depth() / self.spacing).ceil() as usize;
        for gx in 0..nx {
            for gy in 0..ny {
                let x = rect.x0 + (gx as f64 + self.jitter()) * self.spacing;
                let y = rect.y0 + (gy as f64 + self.jitter()) * self.spacing;
                if x >= rect.x1 || y >= rect.y1 {
                    continue;
                }
                if let Some(z) = height(x, y) {
                    let z = z + self.height_noise();
                    self.points.push(Point3::new(x, y, z));
                }
            }
        }
    }

    /// Sample a vertical wall along x (`y` fixed), spanning `[z0, z1]`.
    /// Points jitter in x and z only, so height truth stays exact.
    fn wall_along_x(&mut self, x0: f64, x1: f64, y: f64, z0: f64, z1: f64) {
        let nx = ((x1 - x0) / self.spacing).ceil() as usize;
        let nz = ((z1 - z0) / self.spacing).ceil() as usize;
        for gx in 0..nx {
            for gz in 0..nz {
                let x = x0 + (gx as f64 + self.jitter()) * self.spacing;
                let z = z0 + (gz as f64 + self.jitter()) * self.spacing;
                if x < x1 && z < z1 {
                    self.points.push(Point3::new(x, y, z));
                }
            }
        }
    }

    /// Sample a vertical wall along y (`x` fixed).
    fn wall_along_y(&mut self, y0: f64, y1: f64, x: f64, z0: f64, z1: f64) {
        let ny = ((y1 - y0) / self.spacing).ceil() as usize;
        let nz = ((z1 - z0) / self.spacing).ceil() as usize;
        for gy in 0..ny {
            for gz in 0..nz {
                let y = y0 + (gy as f64 + self.jitter()) * self.spacing;
                let z = z0 + (gz as f64 + self.jitter()) * self.spacing;
                if y < y1 && z < z1 {
                    self.points.push(Point3::new(x, y, z));
                }
            }
        }
    }
}

/// Generate the scene: the sampled cloud plus its analytic truth.
pub fn generate(spec: &SceneSpec) -> Result<(PointCloud, SceneTruth)> {
    spec.validate()?;
    let mut s = Sampler::new(spec);
    let truth = match &spec.kind {
        SceneKind::Flat { size: (w, h) } => {
            let floor = Rect::new(0.0, *w, 0.0, *h);
            s.region(floor, |_, _| Some(0.0));
            SceneTruth::Flat { floor }
        }
        SceneKind::Ramp { angle_deg } => {
            let slope = angle_deg.to_radians().tan();
            // Shorter run for steep grades keeps the summit reachable.
            let run = if *angle_deg < 35.0 { 2.0 } else { 1.5 };
            let rise = run * slope;
            let approach = Rect::new(0.0, 2.0, 0.0, 3.0);
            let incline = Rect::new(2.0, 2.0 + run, 0.0, 3.0);
            let summit = Rect::new(2.0 + run, 3.5 + run, 0.0, 3.0);
            s.region(approach, |_, _| Some(0.0));
            s.region(incline, |x, _| Some((x - 2.0) * slope));
            s.region(summit, |_, _| Some(rise));
            SceneTruth::Ramp {
                approach,
                incline,
                summit,
                angle_deg: *angle_deg,
                rise,
            }
        }
        SceneKind::Step { height } => {
            let low = Rect::new(0.0, 2.0, 0.0, 3.0);
            let high = Rect::new(2.0, 4.0, 0.0, 3.0);
            s.region(low, |_, _| Some(0.0));
            s.region(high, |_, _| Some(*height));
            SceneTruth::Step {
                low,
                high,
                step_x: 2.0,
                height: *height,
            }
        }
        SceneKind::DeskFloor => {
            let floor = Rect::new(0.0, 6.0, 0.0, 6.0);
            let desk = Rect::new(2.0, 4.0, 2.0, 4.0);
            let desk_height = 0.74;
            s.region(floor, |_, _| Some(0.0));
            s.region(desk, |_, _| Some(desk_height));
            // Perimeter skirt closing the desk sides.
            s.wall_along_x(desk.x0, desk.x1, desk.y0, 0.0, desk_height);
            s.wall_along_x(desk.x0, desk.x1, desk.y1, 0.0, desk_height);
            s.wall_along_y(desk.y0, desk.y1, desk.x0, 0.0, desk_height);
            s.wall_along_y(desk.y0, desk.y1, desk.x1, 0.0, desk_height);
            SceneTruth::DeskFloor {
                floor,
                desk,
                desk_height,
            }
        }
        SceneKind::Hole { radius } => {
            let floor = Rect::new(0.0, 4.0, 0.0, 4.0);
            let center = (2.05, 2.05);
            let r = *radius;
            s.region(floor, |x, y| {
                ((x - center.0).hypot(y - center.1) > r).then_some(0.0)
            });
            SceneTruth::Hole {
                floor,
                center,
                radius: r,
            }
        }
        SceneKind::Rocks { rocks } => {
            let floor = Rect::new(0.0, 5.0, 0.0, 5.0);
            let rocks = rocks.clone();
            {
                let rocks = &rocks;
                s.region(floor, |x, y| {
                    let rock_z = rocks
                        .iter()
                        .filter_map(|r| r.height_at(x, y))
                        .fold(0.0_f64, f64::max);
                    Some(rock_z)
                });
            }
            // Exact apex of every rock, so peak height is present verbatim.
            for r in &rocks {
                s.points.push(Point3::new(r.cx, r.cy, r.height));
            }
            SceneTruth::Rocks { floor, rocks }
        }
        SceneKind::Bridge { has_deck } => {
            let extent = Rect::new(0.0, 8.0, 0.0, 4.0);
            let channel_x = (3.0, 5.0);
            let bed_z = -3.0;
            let deck = Rect::new(channel_x.0, channel_x.1, 1.525, 2.675);
            // Banks at z = 0 either side of the channel.
            s.region(Rect::new(0.0, channel_x.0, 0.0, 4.0), |_, _| Some(0.0));
            s.region(Rect::new(channel_x.1, 8.0, 0.0, 4.0), |_, _| Some(0.0));
            // Channel bed, spanning the full extent (also below the deck).
            s.region(Rect::new(channel_x.0, channel_x.1, 0.0, 4.0), |_, _| {
                Some(bed_z)
            });
            if *has_deck {
                s.region(deck, |_, _| Some(0.0));
            }
            SceneTruth::Bridge {
                extent,
                channel_x,
                bed_z,
                deck: has_deck.then_some(deck),
            }
        }
        SceneKind::Garage => {
            let ground = Rect::new(0.0, 5.0, 0.0, 3.0);
            let ramp = Rect::new(1.0, 5.0, 1.0, 2.0);
            let slope = 0.25;
            let upper_z = 1.0;
            let slabs = vec![
                Rect::new(3.0, 6.5, 0.0, 1.0),
                Rect::new(3.0, 6.5, 2.0, 3.0),
                Rect::new(5.0, 6.5, 1.0, 2.0),
            ];
            // Ground floor everywhere except where the ramp cuts through.
            s.region(ground, |x, y| (!ramp.contains(x, y)).then_some(0.0));
            s.region(ramp, |x, _| Some((x - ramp.x0) * slope));
            for slab in &slabs {
                s.region(*slab, |_, _| Some(upper_z));
            }
            SceneTruth::Garage {
                ground,
                ramp,
                slope,
                slabs,
                upper_z,
            }
        }
    };
    Ok((PointCloud::new(s.points)?, truth))
}

/// Generate a seeded random rock field specification for the rocks scene:
/// `count` rocks with radii 0.1–0.3 m and apex heights 0.05–0.3 m placed
/// inside the floor with a clear border.
pub fn random_rocks(count: usize, seed: u64) -> Vec<RockSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x52_4f_43_4b);
    (0..count)
        .map(|_| RockSpec {
            cx: rng.random_range(1.0..4.0),
            cy: rng.random_range(1.0..4.0),
            radius: rng.random_range(0.1..0.3),
            height: rng.random_range(0.05..0.3),
        })
        .collect()
}
