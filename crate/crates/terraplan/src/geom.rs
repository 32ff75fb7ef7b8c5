use std::ops::{Add, Sub};

use nalgebra::Vector3;

/// A point in the map frame. `x`/`y` span the ground plane, `z` points up.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    /// All three coordinates are finite (no NaN, no infinities).
    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn coords(self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn from_coords(v: Vector3<f64>) -> Self {
        Point3::new(v.x, v.y, v.z)
    }

    pub fn distance(self, other: Point3) -> f64 {
        (self - other).norm()
    }

    /// Distance in the ground plane, ignoring height.
    pub fn distance_xy(self, other: Point3) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn scale(self, s: f64) -> Point3 {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Sub for Point3 {
    type Output = Vector3<f64>;

    fn sub(self, rhs: Point3) -> Vector3<f64> {
        Vector3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Add<Vector3<f64>> for Point3 {
    type Output = Point3;

    fn add(self, rhs: Vector3<f64>) -> Point3 {
        Point3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl From<[f64; 3]> for Point3 {
    fn from(v: [f64; 3]) -> Self {
        Point3::new(v[0], v[1], v[2])
    }
}

impl From<Point3> for [f64; 3] {
    fn from(p: Point3) -> [f64; 3] {
        [p.x, p.y, p.z]
    }
}

/// 8-bit RGB color, used by the PLY debug exports.
pub type Rgb = [u8; 3];

/// Linear blend between two colors; `t` is clamped to `[0, 1]`.
pub fn lerp_color(from: Rgb, to: Rgb, t: f64) -> Rgb {
    let t = t.clamp(0.0, 1.0);
    let mix = |a: u8, b: u8| (a as f64 + (b as f64 - a as f64) * t).round() as u8;
    [
        mix(from[0], to[0]),
        mix(from[1], to[1]),
        mix(from[2], to[2]),
    ]
}
