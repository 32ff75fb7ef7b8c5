//! Weighted traversability graph.
//!
//! Every surface voxel becomes a node. A node gets a directed edge into a
//! neighbouring column's level when two tests pass:
//!
//! - *connectivity*: the surface heights differ by at most `c_max` — a
//!   larger jump is a step no wheel can climb, regardless of how benign
//!   both surfaces are individually;
//! - *traversability*: the directional cost of the source cell toward that
//!   neighbour is finite (blocked headings simply produce no edge).
//!
//! Edge weights are the source cell's directional costs, so `u→v` and
//! `v→u` are evaluated independently and may disagree or exist one-way —
//! approaching a cliff edge differs from leaving it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde_json::Value;

use crate::bytes::{put_f64, put_u32, put_u64, ByteReader};
use crate::error::{Error, Result};
use crate::geom::{lerp_color, Point3, Rgb};
use crate::io::{json_f64, json_object, json_point, load_json_document, write_json_document};
use crate::skimap::MLSkiMap;
use crate::traversability::{Heading, TraversabilityField};

/// Node address: column indices and level within the column.
pub type NodeId = (i32, i32, u16);

const GRAPH_MAGIC: &[u8; 4] = b"WTGB";
const GRAPH_VERSION: u32 = 1;

/// Connectivity test between two surface heights: a wheel can cross iff
/// the difference does not exceed `c_max` (equality still connects).
pub fn connected(z_u: f64, z_v: f64, c_max: f64) -> bool {
    (z_u - z_v).abs() <= c_max
}

/// Graph node: a surface voxel and its center position (whose `z` is the
/// surface height used in connectivity tests).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WtgNode {
    pub id: NodeId,
    pub pos: Point3,
}

/// Outgoing edge: target node index and traversability weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WtgEdge {
    pub to: usize,
    pub weight: f64,
}

/// Immutable weighted traversability graph with per-node sorted adjacency.
#[derive(Debug, Clone, PartialEq)]
pub struct Wtg {
    c_max: f64,
    nodes: Vec<WtgNode>,
    index: BTreeMap<NodeId, usize>,
    adjacency: Vec<Vec<WtgEdge>>,
}

fn check_c_max(c_max: f64) -> Result<f64> {
    if !c_max.is_finite() || c_max <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "connectivity threshold c_max must be positive and finite, got {c_max}"
        )));
    }
    Ok(c_max)
}

impl Wtg {
    /// Assemble and validate a graph from explicit parts. Nodes are sorted
    /// by id; edges must reference existing ids, connect x-y neighbours
    /// (Chebyshev distance 1), respect the height bound, carry finite
    /// non-negative weights, and repeat no (from, to) pair.
    pub fn from_parts(
        c_max: f64,
        mut nodes: Vec<WtgNode>,
        edges: &[(NodeId, NodeId, f64)],
    ) -> Result<Wtg> {
        let c_max = check_c_max(c_max)?;
        nodes.sort_by_key(|n| n.id);
        let mut index = BTreeMap::new();
        for (n, node) in nodes.iter().enumerate() {
            if !node.pos.is_finite() {
                return Err(Error::NonFiniteValue);
            }
            if index.insert(node.id, n).is_some() {
                return Err(Error::InvalidConfig(format!(
                    "duplicate node id {:?}",
                    node.id
                )));
            }
        }
        let mut adjacency = vec![Vec::new(); nodes.len()];
        let mut seen = BTreeSet::new();
        for &(from, to, weight) in edges {
            let find = |id: NodeId| {
                index.get(&id).copied().ok_or_else(|| {
                    Error::InvalidConfig(format!("edge references missing node {id:?}"))
                })
            };
            let (u, v) = (find(from)?, find(to)?);
            let reach = (from.0 - to.0).abs().max((from.1 - to.1).abs());
            if reach != 1 {
                return Err(Error::InvalidConfig(format!(
                    "edge {from:?} → {to:?} joins columns at Chebyshev distance {reach}, want 1"
                )));
            }
            if !connected(nodes[u].pos.z, nodes[v].pos.z, c_max) {
                return Err(Error::InvalidConfig(format!(
                    "edge {from:?} → {to:?} crosses a height difference beyond c_max = {c_max}"
                )));
            }
            if !weight.is_finite() || weight < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "edge {from:?} → {to:?} has invalid weight {weight}"
                )));
            }
            if !seen.insert((u, v)) {
                return Err(Error::InvalidConfig(format!(
                    "duplicate edge {from:?} → {to:?}"
                )));
            }
            adjacency[u].push(WtgEdge { to: v, weight });
        }
        for list in &mut adjacency {
            list.sort_by_key(|e| e.to);
        }
        Ok(Wtg {
            c_max,
            nodes,
            index,
            adjacency,
        })
    }

    pub fn c_max(&self) -> f64 {
        self.c_max
    }

    pub fn nodes(&self) -> &[WtgNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum()
    }

    pub fn node_index(&self, id: NodeId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn node(&self, index: usize) -> &WtgNode {
        &self.nodes[index]
    }

    pub fn edges_from(&self, index: usize) -> &[WtgEdge] {
        &self.adjacency[index]
    }

    pub fn edge_weight(&self, from: NodeId, to: NodeId) -> Option<f64> {
        let (u, v) = (self.node_index(from)?, self.node_index(to)?);
        self.adjacency[u]
            .iter()
            .find(|e| e.to == v)
            .map(|e| e.weight)
    }

    /// The node nearest `p` in 3D within `radius`; distance ties keep the
    /// smallest id.
    pub fn snap_to_node(&self, p: Point3, radius: f64) -> Result<NodeId> {
        if !radius.is_finite() || radius <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "snap radius must be positive and finite, got {radius}"
            )));
        }
        let mut best: Option<(f64, NodeId)> = None;
        // Nodes are sorted by id, so a strict improvement rule keeps the
        // smallest id among equidistant nodes.
        for node in &self.nodes {
            let dist = node.pos.distance(p);
            if dist <= radius && best.is_none_or(|(d, _)| dist < d) {
                best = Some((dist, node.id));
            }
        }
        best.map(|(_, id)| id).ok_or(Error::NoNodeInRange {
            x: p.x,
            y: p.y,
            z: p.z,
            radius,
        })
    }

    /// Edges listed in global `(from, to)` order.
    pub fn iter_edges(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(move |(u, list)| {
                list.iter()
                    .map(move |e| (self.nodes[u].id, self.nodes[e.to].id, e.weight))
            })
    }

    pub fn to_json_value(&self) -> Result<Value> {
        let nodes: Result<Vec<Value>> = self
            .nodes
            .iter()
            .map(|n| {
                Ok(json_object(vec![
                    ("id", node_id_json(n.id)),
                    ("pos", json_point(n.pos)?),
                ]))
            })
            .collect();
        let edges: Result<Vec<Value>> = self
            .iter_edges()
            .map(|(from, to, w)| {
                Ok(json_object(vec![
                    ("from", node_id_json(from)),
                    ("to", node_id_json(to)),
                    ("w", json_f64(w)?),
                ]))
            })
            .collect();
        Ok(json_object(vec![
            (
                "config",
                json_object(vec![("c_max", json_f64(self.c_max)?)]),
            ),
            ("nodes", Value::Array(nodes?)),
            ("edges", Value::Array(edges?)),
        ]))
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        write_json_document(&self.to_json_value()?, path)
    }

    pub fn load_json(path: &Path) -> Result<Wtg> {
        let value = load_json_document(path)?;
        graph_from_json(&value).map_err(|e| match e {
            Error::MalformedFile { .. } => e,
            other => Error::malformed(path, other.to_string()),
        })
    }

    /// Compact binary form: magic, version, `c_max`, node table, then edges
    /// as node-index pairs.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(GRAPH_MAGIC);
        put_u32(&mut out, GRAPH_VERSION);
        put_f64(&mut out, self.c_max);
        put_u64(&mut out, self.nodes.len() as u64);
        for node in &self.nodes {
            crate::bytes::put_i32(&mut out, node.id.0);
            crate::bytes::put_i32(&mut out, node.id.1);
            put_u32(&mut out, node.id.2 as u32);
            put_f64(&mut out, node.pos.x);
            put_f64(&mut out, node.pos.y);
            put_f64(&mut out, node.pos.z);
        }
        put_u64(&mut out, self.edge_count() as u64);
        for (u, list) in self.adjacency.iter().enumerate() {
            for e in list {
                put_u64(&mut out, u as u64);
                put_u64(&mut out, e.to as u64);
                put_f64(&mut out, e.weight);
            }
        }
        out
    }

    pub fn save_binary(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load_binary(path: &Path) -> Result<Wtg> {
        let bytes = fs::read(path).map_err(|e| Error::malformed(path, e.to_string()))?;
        let truncated = || Error::malformed(path, "unexpected end of file");
        let mut r = ByteReader::new(&bytes);
        match r.take(4) {
            Some(m) if m == GRAPH_MAGIC => {}
            Some(_) => return Err(Error::malformed(path, "bad magic, not a graph file")),
            None => return Err(truncated()),
        }
        match r.u32() {
            Some(GRAPH_VERSION) => {}
            Some(found) => {
                return Err(Error::VersionMismatch {
                    found,
                    expected: GRAPH_VERSION,
                })
            }
            None => return Err(truncated()),
        }
        let c_max = r.f64().ok_or_else(truncated)?;
        let n_nodes = r.u64().ok_or_else(truncated)? as usize;
        let mut nodes = Vec::with_capacity(n_nodes);
        for _ in 0..n_nodes {
            let i = r.i32().ok_or_else(truncated)?;
            let j = r.i32().ok_or_else(truncated)?;
            let l = r.u32().ok_or_else(truncated)?;
            let l = u16::try_from(l)
                .map_err(|_| Error::malformed(path, format!("level index {l} out of range")))?;
            let x = r.f64().ok_or_else(truncated)?;
            let y = r.f64().ok_or_else(truncated)?;
            let z = r.f64().ok_or_else(truncated)?;
            nodes.push(WtgNode {
                id: (i, j, l),
                pos: Point3::new(x, y, z),
            });
        }
        let n_edges = r.u64().ok_or_else(truncated)? as usize;
        let mut edges = Vec::with_capacity(n_edges);
        for _ in 0..n_edges {
            let u = r.u64().ok_or_else(truncated)? as usize;
            let v = r.u64().ok_or_else(truncated)? as usize;
            let w = r.f64().ok_or_else(truncated)?;
            let id_of = |n: usize| {
                nodes.get(n).map(|node: &WtgNode| node.id).ok_or_else(|| {
                    Error::malformed(path, format!("edge node index {n} out of range"))
                })
            };
            edges.push((id_of(u)?, id_of(v)?, w));
        }
        if !r.is_exhausted() {
            return Err(Error::malformed(path, "trailing bytes after graph data"));
        }
        Wtg::from_parts(c_max, nodes, &edges).map_err(|e| Error::malformed(path, e.to_string()))
    }

    /// Load a graph from either serialization, telling them apart by the
    /// binary magic.
    pub fn load(path: &Path) -> Result<Wtg> {
        let mut head = [0_u8; 4];
        let sniff = fs::File::open(path)
            .and_then(|mut f| std::io::Read::read(&mut f, &mut head))
            .map_err(|e| Error::malformed(path, e.to_string()))?;
        if sniff == 4 && &head == GRAPH_MAGIC {
            Wtg::load_binary(path)
        } else {
            Wtg::load_json(path)
        }
    }

    /// Write the graph as an ASCII PLY line set for inspection in mesh
    /// viewers: one vertex per node, one colored segment per edge, weight
    /// rendered on a green (light load) to black (heavy) ramp.
    pub fn save_edge_ply(&self, path: &Path) -> Result<()> {
        const LIGHT: Rgb = [30, 200, 30];
        const HEAVY: Rgb = [0, 0, 0];
        let max_weight = self
            .adjacency
            .iter()
            .flatten()
            .map(|e| e.weight)
            .fold(0.0_f64, f64::max);
        let mut text = String::new();
        text.push_str("ply\nformat ascii 1.0\n");
        let _ = writeln!(text, "element vertex {}", self.nodes.len());
        text.push_str("property double x\nproperty double y\nproperty double z\n");
        let _ = writeln!(text, "element edge {}", self.edge_count());
        text.push_str(
            "property int vertex1\nproperty int vertex2\n\
             property uchar red\nproperty uchar green\nproperty uchar blue\n",
        );
        text.push_str("end_header\n");
        for node in &self.nodes {
            let _ = writeln!(text, "{} {} {}", node.pos.x, node.pos.y, node.pos.z);
        }
        for (u, list) in self.adjacency.iter().enumerate() {
            for e in list {
                let t = if max_weight > 0.0 {
                    e.weight / max_weight
                } else {
                    0.0
                };
                let [r, g, b] = lerp_color(LIGHT, HEAVY, t);
                let _ = writeln!(text, "{u} {} {r} {g} {b}", e.to);
            }
        }
        fs::write(path, text)?;
        Ok(())
    }
}

fn node_id_json(id: NodeId) -> Value {
    Value::Array(vec![
        Value::from(id.0),
        Value::from(id.1),
        Value::from(id.2),
    ])
}

fn node_id_from_json(value: &Value) -> Result<NodeId> {
    let bad = || Error::InvalidConfig(format!("bad node id {value}"));
    let parts = value.as_array().ok_or_else(bad)?;
    if parts.len() != 3 {
        return Err(bad());
    }
    let i = parts[0]
        .as_i64()
        .and_then(|v| i32::try_from(v).ok())
        .ok_or_else(bad)?;
    let j = parts[1]
        .as_i64()
        .and_then(|v| i32::try_from(v).ok())
        .ok_or_else(bad)?;
    let l = parts[2]
        .as_u64()
        .and_then(|v| u16::try_from(v).ok())
        .ok_or_else(bad)?;
    Ok((i, j, l))
}

fn point_from_json(value: &Value) -> Result<Point3> {
    let bad = || Error::InvalidConfig(format!("bad position {value}"));
    let parts = value.as_array().ok_or_else(bad)?;
    if parts.len() != 3 {
        return Err(bad());
    }
    let mut xyz = [0.0; 3];
    for (slot, part) in xyz.iter_mut().zip(parts) {
        *slot = part.as_f64().ok_or_else(bad)?;
    }
    Ok(Point3::from(xyz))
}

fn graph_from_json(value: &Value) -> Result<Wtg> {
    let missing = |what: &str| Error::InvalidConfig(format!("graph document missing {what}"));
    let c_max = value
        .pointer("/config/c_max")
        .and_then(Value::as_f64)
        .ok_or_else(|| missing("config.c_max"))?;
    let nodes = value
        .get("nodes")
        .and_then(Value::as_array)
        .ok_or_else(|| missing("nodes array"))?
        .iter()
        .map(|n| {
            Ok(WtgNode {
                id: node_id_from_json(n.get("id").ok_or_else(|| missing("node id"))?)?,
                pos: point_from_json(n.get("pos").ok_or_else(|| missing("node pos"))?)?,
            })
        })
        .collect::<Result<Vec<WtgNode>>>()?;
    let edges = value
        .get("edges")
        .and_then(Value::as_array)
        .ok_or_else(|| missing("edges array"))?
        .iter()
        .map(|e| {
            let from = node_id_from_json(e.get("from").ok_or_else(|| missing("edge from"))?)?;
            let to = node_id_from_json(e.get("to").ok_or_else(|| missing("edge to"))?)?;
            let w = e
                .get("w")
                .and_then(Value::as_f64)
                .ok_or_else(|| missing("edge weight"))?;
            Ok((from, to, w))
        })
        .collect::<Result<Vec<(NodeId, NodeId, f64)>>>()?;
    Wtg::from_parts(c_max, nodes, &edges)
}

/// Build the graph for a map and its traversability field: one node per
/// surface voxel; for each finite heading of a node, edges into every level
/// of the neighbouring column whose surface height is reachable.
pub fn build_wtg(map: &MLSkiMap, field: &TraversabilityField, c_max: f64) -> Result<Wtg> {
    use rayon::prelude::*;

    let c_max = check_c_max(c_max)?;
    let nodes: Vec<WtgNode> = map
        .iter_surface_voxels()
        .map(|v| WtgNode {
            id: (v.key.i, v.key.j, v.key.l),
            pos: v.center,
        })
        .collect();
    let index: BTreeMap<NodeId, usize> = nodes
        .iter()
        .enumerate()
        .map(|(n, node)| (node.id, n))
        .collect();
    for node in &nodes {
        let (i, j, l) = node.id;
        if field.get(i, j, l).is_none() {
            return Err(Error::FieldMismatch { i, j, level: l });
        }
    }
    if field.len() != nodes.len() {
        // The field covers every node yet has more entries: report one of
        // the extras.
        for ((i, j, l), _) in field.iter() {
            if !index.contains_key(&(i, j, l)) {
                return Err(Error::FieldMismatch { i, j, level: l });
            }
        }
    }

    let adjacency: Vec<Vec<WtgEdge>> = nodes
        .par_iter()
        .map(|u| {
            let (i, j, _) = u.id;
            let costs = field
                .get(u.id.0, u.id.1, u.id.2)
                .expect("field domain verified above");
            let mut out = Vec::new();
            for heading in Heading::ALL {
                let Some(weight) = costs[heading.index()].finite() else {
                    continue;
                };
                let (di, dj) = heading.step();
                for level in map.column_levels(i + di, j + dj) {
                    let v = index[&(i + di, j + dj, level.level)];
                    if connected(u.pos.z, nodes[v].pos.z, c_max) {
                        out.push(WtgEdge { to: v, weight });
                    }
                }
            }
            out.sort_by_key(|e| e.to);
            out
        })
        .collect();

    Ok(Wtg {
        c_max,
        nodes,
        index,
        adjacency,
    })
}
