//! Point-cloud file I/O and JSON document helpers.
//!
//! Clouds are read from ASCII PLY, binary little-endian PLY, or plain
//! whitespace-separated XYZ text (optionally with trailing `r g b` columns).
//! Clouds are written as ASCII PLY with `double` coordinates so that a
//! write/read round trip reproduces every coordinate bit-exactly, or as XYZ
//! text when the output path ends in `.xyz`.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::geom::{Point3, Rgb};

/// Input format selector for [`load_point_cloud`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CloudFormat {
    /// Sniff from the file content: a `ply` magic line selects PLY (ascii or
    /// binary per its header), anything else is parsed as XYZ text.
    #[default]
    Auto,
    PlyAscii,
    PlyBinaryLe,
    XyzText,
}

impl CloudFormat {
    /// Parse a user-facing format name (`auto`, `ply`, `ply-ascii`,
    /// `ply-binary`, `xyz`).
    pub fn parse(name: &str) -> Result<CloudFormat> {
        match name {
            "auto" => Ok(CloudFormat::Auto),
            "ply" | "ply-ascii" => Ok(CloudFormat::PlyAscii),
            "ply-binary" => Ok(CloudFormat::PlyBinaryLe),
            "xyz" => Ok(CloudFormat::XyzText),
            other => Err(Error::InvalidConfig(format!(
                "unknown cloud format `{other}`"
            ))),
        }
    }
}

/// An in-memory point cloud: a non-empty list of finite points, optionally
/// with one RGB color per point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Point3>,
    colors: Option<Vec<Rgb>>,
}

impl PointCloud {
    /// Build a cloud from raw points. Fails with [`Error::EmptyCloud`] when
    /// `points` is empty and [`Error::NonFiniteValue`] when any coordinate is
    /// NaN or infinite.
    pub fn new(points: Vec<Point3>) -> Result<PointCloud> {
        if points.is_empty() {
            return Err(Error::EmptyCloud);
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFiniteValue);
        }
        Ok(PointCloud {
            points,
            colors: None,
        })
    }

    /// Like [`PointCloud::new`] but attaching one color per point.
    pub fn with_colors(points: Vec<Point3>, colors: Vec<Rgb>) -> Result<PointCloud> {
        if points.len() != colors.len() {
            return Err(Error::LengthMismatch {
                expected: points.len(),
                actual: colors.len(),
            });
        }
        let mut cloud = PointCloud::new(points)?;
        cloud.colors = Some(colors);
        Ok(cloud)
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn colors(&self) -> Option<&[Rgb]> {
        self.colors.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Always false: the constructors reject empty clouds.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Multiply every coordinate by `scale` (unit conversion, e.g. mm → m).
    pub fn scaled(&self, scale: f64) -> Result<PointCloud> {
        if !scale.is_finite() || scale <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "unit scale must be positive, got {scale}"
            )));
        }
        let points = self.points.iter().map(|p| p.scale(scale)).collect();
        Ok(PointCloud {
            points,
            colors: self.colors.clone(),
        })
    }
}

/// Load a point cloud from `path` in the given (or sniffed) format.
pub fn load_point_cloud(path: &Path, format: CloudFormat) -> Result<PointCloud> {
    let bytes = fs::read(path).map_err(|e| Error::malformed(path, e.to_string()))?;
    let format = match format {
        CloudFormat::Auto => {
            if bytes.starts_with(b"ply\n") || bytes.starts_with(b"ply\r\n") {
                // parse_ply resolves ascii vs binary from the header itself
                CloudFormat::PlyAscii
            } else {
                CloudFormat::XyzText
            }
        }
        explicit => explicit,
    };
    match format {
        CloudFormat::PlyAscii | CloudFormat::PlyBinaryLe => parse_ply(&bytes, path),
        CloudFormat::XyzText => {
            let text = std::str::from_utf8(&bytes)
                .map_err(|_| Error::malformed(path, "xyz file is not valid UTF-8"))?;
            parse_xyz(text, path)
        }
        CloudFormat::Auto => unreachable!("auto resolved above"),
    }
}

/// Write a cloud to `path`. `.xyz` extensions produce plain text, everything
/// else an ASCII PLY with `double` coordinates (and `uchar` colors when the
/// cloud carries them).
pub fn write_point_cloud(cloud: &PointCloud, path: &Path) -> Result<()> {
    let is_xyz = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("xyz"));
    let mut out = Vec::with_capacity(cloud.len() * 24);
    if is_xyz {
        for (idx, p) in cloud.points().iter().enumerate() {
            match cloud.colors() {
                Some(colors) => {
                    let [r, g, b] = colors[idx];
                    writeln!(out, "{} {} {} {r} {g} {b}", p.x, p.y, p.z)?;
                }
                None => writeln!(out, "{} {} {}", p.x, p.y, p.z)?,
            }
        }
    } else {
        write_ply(&mut out, cloud)?;
    }
    fs::write(path, out)?;
    Ok(())
}

/// Write `cloud` as an ASCII PLY with the given per-point colors (replacing
/// any colors stored in the cloud itself).
pub fn write_colored_cloud(cloud: &PointCloud, colors: &[Rgb], path: &Path) -> Result<()> {
    let colored = PointCloud::with_colors(cloud.points().to_vec(), colors.to_vec())?;
    write_point_cloud(&colored, path)
}

fn write_ply(out: &mut Vec<u8>, cloud: &PointCloud) -> Result<()> {
    writeln!(out, "ply")?;
    writeln!(out, "format ascii 1.0")?;
    writeln!(out, "element vertex {}", cloud.len())?;
    writeln!(out, "property double x")?;
    writeln!(out, "property double y")?;
    writeln!(out, "property double z")?;
    if cloud.colors().is_some() {
        writeln!(out, "property uchar red")?;
        writeln!(out, "property uchar green")?;
        writeln!(out, "property uchar blue")?;
    }
    writeln!(out, "end_header")?;
    for (idx, p) in cloud.points().iter().enumerate() {
        match cloud.colors() {
            Some(colors) => {
                let [r, g, b] = colors[idx];
                writeln!(out, "{} {} {} {r} {g} {b}", p.x, p.y, p.z)?;
            }
            None => writeln!(out, "{} {} {}", p.x, p.y, p.z)?,
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// PLY parsing

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PlyScalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl PlyScalar {
    fn parse(token: &str) -> Option<PlyScalar> {
        Some(match token {
            "char" | "int8" => PlyScalar::I8,
            "uchar" | "uint8" => PlyScalar::U8,
            "short" | "int16" => PlyScalar::I16,
            "ushort" | "uint16" => PlyScalar::U16,
            "int" | "int32" => PlyScalar::I32,
            "uint" | "uint32" => PlyScalar::U32,
            "float" | "float32" => PlyScalar::F32,
            "double" | "float64" => PlyScalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            PlyScalar::I8 | PlyScalar::U8 => 1,
            PlyScalar::I16 | PlyScalar::U16 => 2,
            PlyScalar::I32 | PlyScalar::U32 | PlyScalar::F32 => 4,
            PlyScalar::F64 => 8,
        }
    }

    fn read_le(self, bytes: &[u8]) -> f64 {
        match self {
            PlyScalar::I8 => bytes[0] as i8 as f64,
            PlyScalar::U8 => bytes[0] as f64,
            PlyScalar::I16 => i16::from_le_bytes([bytes[0], bytes[1]]) as f64,
            PlyScalar::U16 => u16::from_le_bytes([bytes[0], bytes[1]]) as f64,
            PlyScalar::I32 => i32::from_le_bytes(bytes[..4].try_into().unwrap()) as f64,
            PlyScalar::U32 => u32::from_le_bytes(bytes[..4].try_into().unwrap()) as f64,
            PlyScalar::F32 => f32::from_le_bytes(bytes[..4].try_into().unwrap()) as f64,
            PlyScalar::F64 => f64::from_le_bytes(bytes[..8].try_into().unwrap()),
        }
    }

    fn parse_token(self, token: &str) -> Option<f64> {
        match self {
            PlyScalar::F32 | PlyScalar::F64 => token.parse::<f64>().ok(),
            _ => token.parse::<i64>().ok().map(|v| v as f64),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PlyEncoding {
    Ascii,
    BinaryLe,
}

struct PlyHeader {
    encoding: PlyEncoding,
    vertex_count: usize,
    /// Scalar properties of the vertex element, in declaration order.
    properties: Vec<(String, PlyScalar)>,
}

/// Split the raw file into (header text, body bytes) at `end_header`.
fn split_ply_header<'a>(bytes: &'a [u8], path: &Path) -> Result<(&'a str, &'a [u8])> {
    // The header is ASCII by definition; scan for the end_header line.
    const END: &[u8] = b"end_header";
    let mut offset = 0;
    while offset < bytes.len() {
        let rest = &bytes[offset..];
        let line_end = rest.iter().position(|&b| b == b'\n').map(|p| offset + p);
        let line = match line_end {
            Some(e) => &bytes[offset..e],
            None => rest,
        };
        let trimmed = if line.ends_with(b"\r") {
            &line[..line.len() - 1]
        } else {
            line
        };
        if trimmed == END {
            let body_start = line_end.map(|e| e + 1).unwrap_or(bytes.len());
            let header = std::str::from_utf8(&bytes[..offset])
                .map_err(|_| Error::malformed(path, "PLY header is not valid UTF-8"))?;
            return Ok((header, &bytes[body_start..]));
        }
        match line_end {
            Some(e) => offset = e + 1,
            None => break,
        }
    }
    Err(Error::malformed(path, "missing end_header"))
}

fn parse_ply_header(text: &str, path: &Path) -> Result<PlyHeader> {
    let mut lines = text.lines().map(|l| l.trim_end_matches('\r'));
    if lines.next().map(str::trim) != Some("ply") {
        return Err(Error::malformed(path, "missing ply magic line"));
    }
    let mut encoding = None;
    let mut vertex_count = None;
    let mut properties = Vec::new();
    // Set once a non-vertex element is declared; vertex properties may not
    // follow and a vertex element after it cannot be located in the body.
    let mut past_vertex = false;
    for line in lines {
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("comment") | Some("obj_info") | None => continue,
            Some("format") => {
                encoding = match tokens.next() {
                    Some("ascii") => Some(PlyEncoding::Ascii),
                    Some("binary_little_endian") => Some(PlyEncoding::BinaryLe),
                    Some("binary_big_endian") => {
                        return Err(Error::malformed(path, "big-endian PLY is not supported"));
                    }
                    other => {
                        let found = other.unwrap_or("<missing>");
                        return Err(Error::malformed(
                            path,
                            format!("unknown PLY format `{found}`"),
                        ));
                    }
                };
            }
            Some("element") => {
                let name = tokens.next().unwrap_or("");
                let count: usize = tokens
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| Error::malformed(path, "element line missing count"))?;
                if name == "vertex" {
                    if past_vertex {
                        return Err(Error::malformed(path, "vertex element must come first"));
                    }
                    if vertex_count.is_some() {
                        return Err(Error::malformed(path, "duplicate vertex element"));
                    }
                    vertex_count = Some(count);
                } else {
                    if vertex_count.is_none() {
                        return Err(Error::malformed(path, "vertex element must come first"));
                    }
                    past_vertex = true;
                }
            }
            Some("property") => {
                if vertex_count.is_none() || past_vertex {
                    // Property of a non-vertex element; irrelevant for us.
                    if vertex_count.is_none() {
                        return Err(Error::malformed(path, "property before any element"));
                    }
                    continue;
                }
                let ty_token = tokens
                    .next()
                    .ok_or_else(|| Error::malformed(path, "property line missing type"))?;
                if ty_token == "list" {
                    return Err(Error::malformed(path, "list property in vertex element"));
                }
                let ty = PlyScalar::parse(ty_token).ok_or_else(|| {
                    Error::malformed(path, format!("unknown property type `{ty_token}`"))
                })?;
                let name = tokens
                    .next()
                    .ok_or_else(|| Error::malformed(path, "property line missing name"))?;
                properties.push((name.to_string(), ty));
            }
            Some(other) => {
                return Err(Error::malformed(
                    path,
                    format!("unknown header keyword `{other}`"),
                ));
            }
        }
    }
    let encoding = encoding.ok_or_else(|| Error::malformed(path, "missing format line"))?;
    let vertex_count =
        vertex_count.ok_or_else(|| Error::malformed(path, "missing vertex element"))?;
    Ok(PlyHeader {
        encoding,
        vertex_count,
        properties,
    })
}

/// Positions of the coordinate and color properties in the vertex layout.
struct PlyLayout {
    xyz: [usize; 3],
    rgb: Option<[usize; 3]>,
}

fn resolve_layout(header: &PlyHeader, path: &Path) -> Result<PlyLayout> {
    let find = |name: &str| header.properties.iter().position(|(n, _)| n == name);
    let xyz = match (find("x"), find("y"), find("z")) {
        (Some(x), Some(y), Some(z)) => [x, y, z],
        _ => {
            return Err(Error::malformed(
                path,
                "vertex element lacks x/y/z properties",
            ))
        }
    };
    let rgb = match (find("red"), find("green"), find("blue")) {
        (Some(r), Some(g), Some(b)) => Some([r, g, b]),
        _ => None,
    };
    Ok(PlyLayout { xyz, rgb })
}

fn parse_ply(bytes: &[u8], path: &Path) -> Result<PointCloud> {
    let (header_text, body) = split_ply_header(bytes, path)?;
    let header = parse_ply_header(header_text, path)?;
    let layout = resolve_layout(&header, path)?;
    let mut points = Vec::with_capacity(header.vertex_count);
    let mut colors = layout.rgb.map(|_| Vec::with_capacity(header.vertex_count));

    match header.encoding {
        PlyEncoding::Ascii => {
            let text = std::str::from_utf8(body)
                .map_err(|_| Error::malformed(path, "ascii body is not valid UTF-8"))?;
            let mut rows = text.lines().filter(|l| !l.trim().is_empty());
            for row in 0..header.vertex_count {
                let line = rows
                    .next()
                    .ok_or_else(|| Error::malformed(path, format!("missing vertex row {row}")))?;
                let tokens: Vec<&str> = line.split_whitespace().collect();
                if tokens.len() < header.properties.len() {
                    return Err(Error::malformed(path, format!("short vertex row {row}")));
                }
                let mut values = vec![0.0_f64; header.properties.len()];
                for (slot, (token, (_, ty))) in
                    values.iter_mut().zip(tokens.iter().zip(&header.properties))
                {
                    *slot = ty.parse_token(token).ok_or_else(|| {
                        Error::malformed(path, format!("unparsable value `{token}` in row {row}"))
                    })?;
                }
                push_vertex(&values, &layout, &mut points, &mut colors)?;
            }
        }
        PlyEncoding::BinaryLe => {
            let stride: usize = header.properties.iter().map(|(_, ty)| ty.size()).sum();
            let needed = stride * header.vertex_count;
            if body.len() < needed {
                return Err(Error::malformed(
                    path,
                    format!(
                        "binary body truncated: need {needed} bytes, have {}",
                        body.len()
                    ),
                ));
            }
            let mut values = vec![0.0_f64; header.properties.len()];
            for row in 0..header.vertex_count {
                let mut cursor = row * stride;
                for (slot, (_, ty)) in values.iter_mut().zip(&header.properties) {
                    *slot = ty.read_le(&body[cursor..cursor + ty.size()]);
                    cursor += ty.size();
                }
                push_vertex(&values, &layout, &mut points, &mut colors)?;
            }
        }
    }

    match colors {
        Some(colors) => PointCloud::with_colors(points, colors),
        None => PointCloud::new(points),
    }
}

fn push_vertex(
    values: &[f64],
    layout: &PlyLayout,
    points: &mut Vec<Point3>,
    colors: &mut Option<Vec<Rgb>>,
) -> Result<()> {
    let p = Point3::new(
        values[layout.xyz[0]],
        values[layout.xyz[1]],
        values[layout.xyz[2]],
    );
    if !p.is_finite() {
        return Err(Error::NonFiniteValue);
    }
    points.push(p);
    if let (Some(store), Some(idx)) = (colors.as_mut(), layout.rgb) {
        let channel = |v: f64| v.clamp(0.0, 255.0).round() as u8;
        store.push([
            channel(values[idx[0]]),
            channel(values[idx[1]]),
            channel(values[idx[2]]),
        ]);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// XYZ text parsing

fn parse_xyz(text: &str, path: &Path) -> Result<PointCloud> {
    let mut points = Vec::new();
    let mut colors: Vec<Rgb> = Vec::new();
    let mut has_colors: Option<bool> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let with_color = match tokens.len() {
            3 => false,
            6 => true,
            n => {
                return Err(Error::malformed(
                    path,
                    format!("line {}: expected 3 or 6 columns, got {n}", lineno + 1),
                ));
            }
        };
        match has_colors {
            None => has_colors = Some(with_color),
            Some(expected) if expected != with_color => {
                return Err(Error::malformed(
                    path,
                    format!("line {}: inconsistent column count", lineno + 1),
                ));
            }
            Some(_) => {}
        }
        let coord = |t: &str| -> Result<f64> {
            t.parse::<f64>().map_err(|_| {
                Error::malformed(
                    path,
                    format!("line {}: unparsable number `{t}`", lineno + 1),
                )
            })
        };
        let p = Point3::new(coord(tokens[0])?, coord(tokens[1])?, coord(tokens[2])?);
        if !p.is_finite() {
            return Err(Error::NonFiniteValue);
        }
        points.push(p);
        if with_color {
            let channel = |t: &str| -> Result<u8> {
                t.parse::<u8>().map_err(|_| {
                    Error::malformed(path, format!("line {}: bad color value `{t}`", lineno + 1))
                })
            };
            colors.push([
                channel(tokens[3])?,
                channel(tokens[4])?,
                channel(tokens[5])?,
            ]);
        }
    }
    if has_colors == Some(true) {
        PointCloud::with_colors(points, colors)
    } else {
        PointCloud::new(points)
    }
}

// ---------------------------------------------------------------------------
// JSON helpers

/// Convert a float to a JSON number, rejecting NaN and infinities instead of
/// silently emitting `null` the way `serde_json::Value::from` does.
pub fn json_f64(x: f64) -> Result<Value> {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .ok_or(Error::NonFiniteValue)
}

/// `[x, y, z]` as a JSON array of checked floats.
pub fn json_point(p: Point3) -> Result<Value> {
    Ok(Value::Array(vec![
        json_f64(p.x)?,
        json_f64(p.y)?,
        json_f64(p.z)?,
    ]))
}

/// Assemble a JSON object from key/value pairs; keys serialize in
/// lexicographic order, which keeps documents byte-reproducible.
pub fn json_object(entries: Vec<(&str, Value)>) -> Value {
    let mut map = Map::new();
    for (key, value) in entries {
        map.insert(key.to_string(), value);
    }
    Value::Object(map)
}

/// Pretty-print `value` to `path` with a trailing newline. Object keys are
/// emitted in sorted order, so equal documents produce equal bytes.
pub fn write_json_document(value: &Value, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::malformed(path, format!("JSON serialization failed: {e}")))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn load_json_document(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).map_err(|e| Error::malformed(path, e.to_string()))?;
    serde_json::from_str(&text).map_err(|e| Error::malformed(path, format!("invalid JSON: {e}")))
}
