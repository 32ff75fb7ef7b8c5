//! Shortest-path search over the weighted traversability graph.
//!
//! The step cost from `u` to a successor `v` is the 3D distance between
//! their surface centers plus `λ` times the directional traversability
//! weight of the edge, accumulated along the path. `λ` trades detour
//! length against terrain risk: `λ = 0` is pure shortest distance, large
//! `λ` hugs the flattest ground it can find.
//!
//! Search is A* with the 3D Euclidean heuristic. Every step costs at least
//! its distance component, and the Euclidean metric never overestimates
//! distance, so the heuristic is consistent and the first arrival at the
//! goal is optimal. Ties on `f` break toward the smallest node id, making
//! results deterministic.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::geom::Point3;
use crate::io::{json_f64, json_object, json_point, write_json_document};
use crate::wtg::{NodeId, Wtg, WtgNode};

/// 3D Euclidean distance between two nodes' surface centers.
pub fn heuristic(u: &WtgNode, goal: &WtgNode) -> f64 {
    u.pos.distance(goal.pos)
}

/// One hop of a planned path, split into its 3D travel distance and the
/// traversability weight of the edge taken.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathStep {
    pub dist: f64,
    pub trav: f64,
}

/// A route through the graph with its cost breakdown. `cost` equals the
/// left-to-right accumulation of `dist + λ·trav` over the steps.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannedPath {
    pub lambda: f64,
    pub cost: f64,
    pub nodes: Vec<WtgNode>,
    pub steps: Vec<PathStep>,
}

impl PlannedPath {
    pub fn start(&self) -> NodeId {
        self.nodes.first().expect("a path has at least one node").id
    }

    pub fn goal(&self) -> NodeId {
        self.nodes.last().expect("a path has at least one node").id
    }

    /// Total 3D distance travelled.
    pub fn length(&self) -> f64 {
        self.steps.iter().map(|s| s.dist).sum()
    }

    /// Total traversability weight accumulated (unscaled by λ).
    pub fn traversability_total(&self) -> f64 {
        self.steps.iter().map(|s| s.trav).sum()
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
        let steps: Result<Vec<Value>> = self
            .steps
            .iter()
            .map(|s| {
                Ok(json_object(vec![
                    ("dist", json_f64(s.dist)?),
                    ("trav", json_f64(s.trav)?),
                ]))
            })
            .collect();
        Ok(json_object(vec![
            ("start", node_id_json(self.start())),
            ("goal", node_id_json(self.goal())),
            ("lambda", json_f64(self.lambda)?),
            ("cost", json_f64(self.cost)?),
            ("nodes", Value::Array(nodes?)),
            ("steps", Value::Array(steps?)),
        ]))
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        write_json_document(&self.to_json_value()?, path)
    }

    /// Write the route as an ASCII PLY polyline, drawn in red.
    pub fn save_ply(&self, path: &Path) -> Result<()> {
        let mut text = String::new();
        text.push_str("ply\nformat ascii 1.0\n");
        let _ = writeln!(text, "element vertex {}", self.nodes.len());
        text.push_str("property double x\nproperty double y\nproperty double z\n");
        let _ = writeln!(text, "element edge {}", self.steps.len());
        text.push_str(
            "property int vertex1\nproperty int vertex2\n\
             property uchar red\nproperty uchar green\nproperty uchar blue\n",
        );
        text.push_str("end_header\n");
        for node in &self.nodes {
            let _ = writeln!(text, "{} {} {}", node.pos.x, node.pos.y, node.pos.z);
        }
        for n in 0..self.steps.len() {
            let _ = writeln!(text, "{n} {} 220 30 30", n + 1);
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

/// Heap entry ordered so the max-heap pops the smallest `f`, ties broken
/// toward the smallest node index (node indices follow id order).
struct QueueEntry {
    f: f64,
    g: f64,
    node: usize,
}

impl PartialEq for QueueEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for QueueEntry {}

impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .partial_cmp(&self.f)
            .expect("search costs are finite")
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn check_lambda(lambda: f64) -> Result<f64> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "lambda must be non-negative and finite, got {lambda}"
        )));
    }
    Ok(lambda)
}

/// A* between two graph nodes. Returns the minimal-cost path under
/// `Σ (step distance + λ · step weight)`, or `NoPath` when the goal is
/// unreachable. Unknown endpoints fail before any search.
pub fn astar(graph: &Wtg, start: NodeId, goal: NodeId, lambda: f64) -> Result<PlannedPath> {
    let lambda = check_lambda(lambda)?;
    let unknown = |(i, j, level): NodeId| Error::UnknownNode { i, j, level };
    let s = graph.node_index(start).ok_or_else(|| unknown(start))?;
    let t = graph.node_index(goal).ok_or_else(|| unknown(goal))?;
    let goal_node = *graph.node(t);

    let mut best_g = vec![f64::INFINITY; graph.len()];
    let mut parent = vec![usize::MAX; graph.len()];
    let mut open = BinaryHeap::new();
    best_g[s] = 0.0;
    open.push(QueueEntry {
        f: heuristic(graph.node(s), &goal_node),
        g: 0.0,
        node: s,
    });

    while let Some(QueueEntry { g, node, .. }) = open.pop() {
        if g > best_g[node] {
            continue; // superseded by a cheaper arrival
        }
        if node == t {
            return Ok(reconstruct(graph, &parent, s, t, g, lambda));
        }
        let from = graph.node(node).pos;
        for edge in graph.edges_from(node) {
            let to_node = graph.node(edge.to);
            let candidate = g + (from.distance(to_node.pos) + lambda * edge.weight);
            if candidate < best_g[edge.to] {
                best_g[edge.to] = candidate;
                parent[edge.to] = node;
                open.push(QueueEntry {
                    f: candidate + heuristic(to_node, &goal_node),
                    g: candidate,
                    node: edge.to,
                });
            }
        }
    }
    Err(Error::NoPath)
}

fn reconstruct(
    graph: &Wtg,
    parent: &[usize],
    s: usize,
    t: usize,
    cost: f64,
    lambda: f64,
) -> PlannedPath {
    let mut order = vec![t];
    while *order.last().expect("non-empty") != s {
        order.push(parent[*order.last().expect("non-empty")]);
    }
    order.reverse();
    let nodes: Vec<WtgNode> = order.iter().map(|&n| *graph.node(n)).collect();
    let steps = order
        .windows(2)
        .map(|pair| {
            let (u, v) = (pair[0], pair[1]);
            let trav = graph
                .edges_from(u)
                .iter()
                .find(|e| e.to == v)
                .expect("path follows existing edges")
                .weight;
            PathStep {
                dist: graph.node(u).pos.distance(graph.node(v).pos),
                trav,
            }
        })
        .collect();
    PlannedPath {
        lambda,
        cost,
        nodes,
        steps,
    }
}

/// Point-level planning: snap both endpoints to their nearest graph nodes
/// within `snap_radius`, then search.
pub fn plan(
    graph: &Wtg,
    start: impl Into<Point3>,
    goal: impl Into<Point3>,
    lambda: f64,
    snap_radius: f64,
) -> Result<PlannedPath> {
    let s = graph.snap_to_node(start.into(), snap_radius)?;
    let t = graph.snap_to_node(goal.into(), snap_radius)?;
    astar(graph, s, t, lambda)
}
