//! Track layout parsing: a railML-flavoured XML subset is turned into a
//! station graph. Physical components (points, signals, joints) are nodes;
//! portions of track segments between them are edges, each owned by one
//! track segment.

mod xml;

pub use xml::XmlError;

use crate::ids::{ComponentId, Direction};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LayoutError {
    #[error(transparent)]
    Xml(#[from] XmlError),
    #[error("schema error in <{element}> (line {line}): {reason}")]
    Schema { element: String, line: u32, reason: String },
    #[error("topology error: {0}")]
    Topology(String),
    #[error("unknown track {0}")]
    UnknownTrack(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeKind {
    Point,
    Signal,
    Joint,
    Boundary,
}

/// Which incident edge plays which role at a point. The toe faces the
/// diverging side; normal is the left leg, reverse the right.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointEdges {
    pub toe: String,
    pub normal: String,
    pub reverse: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
    pub direction: Option<Direction>,
    pub point_edges: Option<PointEdges>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub id: String,
    pub endpoints: (String, String),
    pub track: ComponentId,
}

impl Edge {
    pub fn other_end(&self, node: &str) -> Option<&str> {
        if self.endpoints.0 == node {
            Some(&self.endpoints.1)
        } else if self.endpoints.1 == node {
            Some(&self.endpoints.0)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StationGraph {
    pub name: String,
    pub nodes: BTreeMap<String, Node>,
    pub edges: BTreeMap<String, Edge>,
    pub tracks: BTreeSet<ComponentId>,
    pub entry_signals: BTreeSet<String>,
    /// Incident edge ids per node, sorted for deterministic iteration.
    pub adjacency: BTreeMap<String, Vec<String>>,
}

impl StationGraph {
    pub fn incident(&self, node: &str) -> &[String] {
        self.adjacency.get(node).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn track_of(&self, edge: &str) -> Option<&ComponentId> {
        self.edges.get(edge).map(|e| &e.track)
    }
}

/// All edges owned by a track, sorted by edge id.
pub fn edges_of_track(graph: &StationGraph, track: &ComponentId) -> Result<Vec<String>, LayoutError> {
    if !graph.tracks.contains(track) {
        return Err(LayoutError::UnknownTrack(track.name.clone()));
    }
    Ok(graph
        .edges
        .values()
        .filter(|e| &e.track == track)
        .map(|e| e.id.clone())
        .collect())
}

/// Parse a layout file, rejecting unknown elements.
pub fn parse_layout(src: &str) -> Result<StationGraph, LayoutError> {
    let (graph, warnings) = parse_layout_opts(src, false)?;
    debug_assert!(warnings.is_empty());
    Ok(graph)
}

/// Parse a layout file; with `lenient`, unknown elements become warnings
/// instead of schema errors.
pub fn parse_layout_opts(
    src: &str,
    lenient: bool,
) -> Result<(StationGraph, Vec<String>), LayoutError> {
    let root = xml::parse_document(src)?;
    if root.name != "station" {
        return Err(LayoutError::Schema {
            element: root.name.clone(),
            line: root.line,
            reason: "root element must be <station>".into(),
        });
    }
    let name = root.attr("name").unwrap_or("").to_string();

    let mut warnings = Vec::new();
    let mut tracks: BTreeSet<ComponentId> = BTreeSet::new();
    let mut edges: BTreeMap<String, Edge> = BTreeMap::new();
    let mut points: BTreeMap<String, PointEdges> = BTreeMap::new();
    let mut signals: BTreeMap<String, (String, Direction)> = BTreeMap::new();
    let mut joints: BTreeMap<String, String> = BTreeMap::new();
    let mut entries: BTreeSet<String> = BTreeSet::new();

    let need = |el: &xml::Element, attr: &str| -> Result<String, LayoutError> {
        el.attr(attr).map(str::to_string).ok_or_else(|| LayoutError::Schema {
            element: el.name.clone(),
            line: el.line,
            reason: format!("missing required attribute '{attr}'"),
        })
    };

    for el in &root.children {
        match el.name.as_str() {
            "track" => {
                let id = need(el, "id")?;
                if !tracks.insert(ComponentId::track(&id)) {
                    return Err(LayoutError::Schema {
                        element: el.name.clone(),
                        line: el.line,
                        reason: format!("duplicate track id {id}"),
                    });
                }
            }
            "edge" => {
                let id = need(el, "id")?;
                let from = need(el, "from")?;
                let to = need(el, "to")?;
                let track = need(el, "track")?;
                if from == to {
                    return Err(LayoutError::Topology(format!(
                        "edge {id} connects node {from} to itself"
                    )));
                }
                if edges
                    .insert(
                        id.clone(),
                        Edge { id: id.clone(), endpoints: (from, to), track: ComponentId::track(track) },
                    )
                    .is_some()
                {
                    return Err(LayoutError::Schema {
                        element: el.name.clone(),
                        line: el.line,
                        reason: format!("duplicate edge id {id}"),
                    });
                }
            }
            "point" => {
                let id = need(el, "id")?;
                let pe = PointEdges {
                    toe: need(el, "toe")?,
                    normal: need(el, "normal")?,
                    reverse: need(el, "reverse")?,
                };
                if points.insert(id.clone(), pe).is_some() {
                    return Err(LayoutError::Schema {
                        element: el.name.clone(),
                        line: el.line,
                        reason: format!("duplicate point id {id}"),
                    });
                }
            }
            "signal" => {
                let id = need(el, "id")?;
                let node = el.attr("node").unwrap_or(&id).to_string();
                let dir = match need(el, "dir")?.as_str() {
                    "up" => Direction::Up,
                    "down" => Direction::Down,
                    other => {
                        return Err(LayoutError::Schema {
                            element: el.name.clone(),
                            line: el.line,
                            reason: format!("dir must be 'up' or 'down', got '{other}'"),
                        })
                    }
                };
                if signals.insert(id.clone(), (node, dir)).is_some() {
                    return Err(LayoutError::Schema {
                        element: el.name.clone(),
                        line: el.line,
                        reason: format!("duplicate signal id {id}"),
                    });
                }
            }
            "joint" => {
                let id = need(el, "id")?;
                let node = el.attr("node").unwrap_or(&id).to_string();
                joints.insert(id, node);
            }
            "entry" => {
                entries.insert(need(el, "signal")?);
            }
            other => {
                if lenient {
                    warnings.push(format!("ignoring unknown element <{other}> at line {}", el.line));
                } else {
                    return Err(LayoutError::Schema {
                        element: other.to_string(),
                        line: el.line,
                        reason: "unknown element (use --lenient to ignore)".into(),
                    });
                }
            }
        }
    }

    // Edge track references must be declared.
    for e in edges.values() {
        if !tracks.contains(&e.track) {
            return Err(LayoutError::Schema {
                element: "edge".into(),
                line: 0,
                reason: format!("edge {} references undeclared track {}", e.id, e.track),
            });
        }
    }

    // Nodes are implied by edge endpoints; annotations assign kinds.
    let mut adjacency: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for e in edges.values() {
        adjacency.entry(e.endpoints.0.clone()).or_default().push(e.id.clone());
        adjacency.entry(e.endpoints.1.clone()).or_default().push(e.id.clone());
    }
    for v in adjacency.values_mut() {
        v.sort();
    }

    let mut nodes: BTreeMap<String, Node> = BTreeMap::new();
    for (node_id, incident) in &adjacency {
        let kind = if points.contains_key(node_id) {
            NodeKind::Point
        } else if signals.values().any(|(n, _)| n == node_id) {
            NodeKind::Signal
        } else if joints.values().any(|n| n == node_id) {
            NodeKind::Joint
        } else {
            NodeKind::Boundary
        };
        match kind {
            NodeKind::Point => {
                if incident.len() != 3 {
                    return Err(LayoutError::Topology(format!(
                        "point {node_id} has {} incident edges, expected 3",
                        incident.len()
                    )));
                }
                let pe = &points[node_id];
                let roles = [&pe.toe, &pe.normal, &pe.reverse];
                for role in roles {
                    if !edges.contains_key(role.as_str()) {
                        return Err(LayoutError::Topology(format!(
                            "point {node_id} references nonexistent edge {role}"
                        )));
                    }
                    if !incident.contains(role) {
                        return Err(LayoutError::Topology(format!(
                            "edge {role} named by point {node_id} is not incident to it"
                        )));
                    }
                }
                if pe.toe == pe.normal || pe.toe == pe.reverse || pe.normal == pe.reverse {
                    return Err(LayoutError::Topology(format!(
                        "point {node_id} must name three distinct edges (legs must diverge)"
                    )));
                }
            }
            NodeKind::Signal | NodeKind::Joint => {
                if incident.len() > 2 {
                    return Err(LayoutError::Topology(format!(
                        "{} {node_id} has {} incident edges, expected at most 2",
                        if kind == NodeKind::Signal { "signal" } else { "joint" },
                        incident.len()
                    )));
                }
            }
            NodeKind::Boundary => {
                if incident.len() != 1 {
                    return Err(LayoutError::Topology(format!(
                        "undeclared node {node_id} has {} incident edges; boundaries have exactly 1",
                        incident.len()
                    )));
                }
            }
        }
        let direction = signals
            .iter()
            .find(|(_, (n, _))| n == node_id)
            .map(|(_, (_, d))| *d);
        let point_edges = points.get(node_id).cloned();
        nodes.insert(
            node_id.clone(),
            Node { id: node_id.clone(), kind, direction, point_edges },
        );
    }

    // Annotated nodes must exist in the graph.
    for (id, pe) in &points {
        if !nodes.contains_key(id) {
            return Err(LayoutError::Topology(format!(
                "point {id} ({}, {}, {}) does not appear as an edge endpoint",
                pe.toe, pe.normal, pe.reverse
            )));
        }
    }
    for (id, (node, _)) in &signals {
        if !nodes.contains_key(node) {
            return Err(LayoutError::Topology(format!(
                "signal {id} placed on unknown node {node}"
            )));
        }
    }

    // Every track owns at least one edge.
    for t in &tracks {
        if !edges.values().any(|e| &e.track == t) {
            return Err(LayoutError::Topology(format!("track {t} owns no edge")));
        }
    }

    // Entry signals must be signal nodes.
    for s in &entries {
        match nodes.get(s) {
            Some(n) if n.kind == NodeKind::Signal => {}
            _ => {
                return Err(LayoutError::Topology(format!(
                    "entry signal {s} is not a signal node"
                )))
            }
        }
    }

    // Connectivity over the whole graph.
    if !nodes.is_empty() {
        let start = nodes.keys().next().unwrap().clone();
        let mut seen: BTreeSet<String> = BTreeSet::new();
        let mut queue = VecDeque::from([start]);
        while let Some(n) = queue.pop_front() {
            if !seen.insert(n.clone()) {
                continue;
            }
            for eid in adjacency.get(&n).into_iter().flatten() {
                let e = &edges[eid];
                let other = e.other_end(&n).unwrap().to_string();
                if !seen.contains(&other) {
                    queue.push_back(other);
                }
            }
        }
        if seen.len() != nodes.len() {
            return Err(LayoutError::Topology(format!(
                "graph is not connected ({} of {} nodes reachable)",
                seen.len(),
                nodes.len()
            )));
        }
    } else if !tracks.is_empty() {
        return Err(LayoutError::Topology("tracks declared but no edges".into()));
    }

    Ok((
        StationGraph { name, nodes, edges, tracks, entry_signals: entries, adjacency },
        warnings,
    ))
}
