//! Linking: application data plus track layout become one executable
//! interlocking model. Route paths are derived by walking the graph under
//! each route's commanded point positions, so inconsistencies between the
//! two inputs surface here as `NoPath` errors. Conflicts are route pairs
//! sharing at least one track segment.

use crate::appdata::{Act, ApplicationData, Test};
use crate::ids::{ComponentId, Direction, Kind, PointPos};
use crate::layout::{NodeKind, StationGraph};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinkError {
    #[error("route {0}: {1}")]
    NoPath(String, String),
    #[error("unknown route {0}")]
    UnknownRoute(String),
    #[error("route declaration error at line {0}: {1}")]
    Decl(u32, String),
    #[error("{0} {1} is not present in the track layout")]
    UnknownComponent(Kind, String),
}

/// Entry signal and exit boundary of a route, from the `.routes` file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RouteDecl {
    pub entry: String,
    pub exit: String,
}

/// Parse a route declaration file: one `R_X entry=SIG exit=NODE` per line,
/// `#` comments.
pub fn parse_route_decls(text: &str) -> Result<BTreeMap<String, RouteDecl>, LinkError> {
    let mut decls = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let lineno = lineno as u32 + 1;
        let mut parts = line.split_whitespace();
        let route = parts
            .next()
            .ok_or_else(|| LinkError::Decl(lineno, "missing route name".into()))?;
        if !route.starts_with("R_") {
            return Err(LinkError::Decl(lineno, format!("'{route}' is not a route name")));
        }
        let mut entry = None;
        let mut exit = None;
        for part in parts {
            match part.split_once('=') {
                Some(("entry", v)) => entry = Some(v.to_string()),
                Some(("exit", v)) => exit = Some(v.to_string()),
                _ => {
                    return Err(LinkError::Decl(
                        lineno,
                        format!("expected entry=... or exit=..., found '{part}'"),
                    ))
                }
            }
        }
        let decl = RouteDecl {
            entry: entry.ok_or_else(|| LinkError::Decl(lineno, "missing entry=".into()))?,
            exit: exit.ok_or_else(|| LinkError::Decl(lineno, "missing exit=".into()))?,
        };
        if decls.insert(route.to_string(), decl).is_some() {
            return Err(LinkError::Decl(lineno, format!("duplicate declaration for {route}")));
        }
    }
    Ok(decls)
}

/// Derived geometry of one route: the concrete edge path from its entry
/// signal to its exit, plus what its request rule commands and locks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RouteGeometry {
    pub route: ComponentId,
    pub entry_signal: String,
    pub path: Vec<String>,
    pub exit: String,
    pub required_points: BTreeMap<String, PointPos>,
    pub locked_subroutes: Vec<String>,
    pub locked_uirs: Vec<String>,
}

/// Interned component tables. Simulation state is stored as dense vectors
/// indexed by these ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ComponentIndex {
    pub routes: Vec<String>,
    pub points: Vec<String>,
    pub subs: Vec<String>,
    pub uirs: Vec<String>,
    pub tracks: Vec<String>,
    pub edges: Vec<String>,
    pub nodes: Vec<String>,
    route_by_name: BTreeMap<String, u16>,
    point_by_name: BTreeMap<String, u16>,
    sub_by_name: BTreeMap<String, u16>,
    uir_by_name: BTreeMap<String, u16>,
    track_by_name: BTreeMap<String, u16>,
    edge_by_name: BTreeMap<String, u16>,
    node_by_name: BTreeMap<String, u16>,
}

fn build_table(names: BTreeSet<String>) -> (Vec<String>, BTreeMap<String, u16>) {
    let list: Vec<String> = names.into_iter().collect();
    let map = list
        .iter()
        .enumerate()
        .map(|(i, n)| (n.clone(), i as u16))
        .collect();
    (list, map)
}

impl ComponentIndex {
    pub fn route(&self, name: &str) -> Option<u16> {
        self.route_by_name.get(name).copied()
    }
    pub fn point(&self, name: &str) -> Option<u16> {
        self.point_by_name.get(name).copied()
    }
    pub fn sub(&self, name: &str) -> Option<u16> {
        self.sub_by_name.get(name).copied()
    }
    pub fn uir(&self, name: &str) -> Option<u16> {
        self.uir_by_name.get(name).copied()
    }
    pub fn track(&self, name: &str) -> Option<u16> {
        self.track_by_name.get(name).copied()
    }
    pub fn edge(&self, name: &str) -> Option<u16> {
        self.edge_by_name.get(name).copied()
    }
    pub fn node(&self, name: &str) -> Option<u16> {
        self.node_by_name.get(name).copied()
    }
}

/// A condition compiled to component indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompiledCond {
    RouteIs(u16, bool),
    /// Point free for a position: its command rule holds or it already is
    /// in that position.
    PointFree(u16, PointPos),
    SubIs(u16, bool),
    UirIs(u16, bool),
    TrackClearIs(u16, bool),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompiledAction {
    SetRoute(u16),
    CommandPoint(u16, PointPos),
    LockSub(u16),
    LockUir(u16),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledRouteRule {
    pub route: u16,
    pub conditions: Vec<CompiledCond>,
    pub actions: Vec<CompiledAction>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReleaseTarget {
    Sub(u16),
    Uir(u16),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledRelease {
    pub target: ReleaseTarget,
    pub conditions: Vec<CompiledCond>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CompiledRules {
    /// Indexed by route id.
    pub route_rules: Vec<Option<CompiledRouteRule>>,
    /// Indexed by point id: conditions for [normal, reverse].
    pub point_rules: Vec<[Option<Vec<CompiledCond>>; 2]>,
    pub releases: Vec<CompiledRelease>,
}

/// Geometry compiled to indices, ready for the simulator's walker.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledGeometry {
    pub entry_signal: u16,
    pub exit_node: u16,
    /// Edges from the entry signal to the exit, in travel order.
    pub path: Vec<u16>,
    /// Distinct tracks along the path, in travel order.
    pub track_seq: Vec<u16>,
}

/// Point annotations resolved to indices, stored per node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PointAtNode {
    pub point: u16,
    pub toe: u16,
    pub normal: u16,
    pub reverse: u16,
}

impl PointAtNode {
    pub fn leg(&self, pos: PointPos) -> u16 {
        match pos {
            PointPos::Normal => self.normal,
            PointPos::Reverse => self.reverse,
        }
    }

    /// Which leg an edge is, if any.
    pub fn leg_of(&self, edge: u16) -> Option<PointPos> {
        if edge == self.normal {
            Some(PointPos::Normal)
        } else if edge == self.reverse {
            Some(PointPos::Reverse)
        } else {
            None
        }
    }
}

/// The executable model: parsed inputs, derived geometry and conflicts,
/// plus index-compiled forms of everything the simulator touches.
/// Immutable after linking and shareable across simulation workers.
#[derive(Debug, Clone)]
pub struct InterlockingModel {
    pub data: ApplicationData,
    pub graph: StationGraph,
    pub geometry: BTreeMap<String, RouteGeometry>,
    pub conflicts: BTreeSet<(String, String)>,

    pub index: ComponentIndex,
    pub rules: CompiledRules,
    /// Indexed by route id.
    pub geom: Vec<CompiledGeometry>,
    pub conflict_matrix: Vec<bool>,
    /// Entry-signal node ids, and the routes starting at each.
    pub entry_signals: Vec<u16>,
    pub routes_by_signal: Vec<Vec<u16>>,

    pub edge_track: Vec<u16>,
    pub edge_endpoints: Vec<(u16, u16)>,
    pub node_kind: Vec<NodeKind>,
    pub node_dir: Vec<Option<Direction>>,
    pub node_point: Vec<Option<PointAtNode>>,
    pub node_adj: Vec<Vec<u16>>,
}

impl InterlockingModel {
    pub fn n_routes(&self) -> usize {
        self.index.routes.len()
    }

    pub fn conflicting(&self, r1: u16, r2: u16) -> bool {
        self.conflict_matrix[r1 as usize * self.n_routes() + r2 as usize]
    }

    pub fn other_endpoint(&self, edge: u16, node: u16) -> u16 {
        let (a, b) = self.edge_endpoints[edge as usize];
        if a == node {
            b
        } else {
            a
        }
    }

    /// Position of a track in a route's travel order, if the route uses it.
    pub fn track_pos_on_route(&self, route: u16, track: u16) -> Option<usize> {
        self.geom[route as usize].track_seq.iter().position(|&t| t == track)
    }
}

/// The set of conflicting route pairs (symmetric, irreflexive, stored with
/// the lexicographically smaller name first).
pub fn route_conflicts(model: &InterlockingModel) -> &BTreeSet<(String, String)> {
    &model.conflicts
}

fn compile_condition(c: &crate::appdata::Condition, ix: &ComponentIndex) -> Result<CompiledCond, LinkError> {
    let missing = || LinkError::UnknownComponent(c.subject.kind, c.subject.name.clone());
    Ok(match c.test {
        Test::RouteUnset => CompiledCond::RouteIs(ix.route(&c.subject.name).ok_or_else(missing)?, false),
        Test::RouteSet => CompiledCond::RouteIs(ix.route(&c.subject.name).ok_or_else(missing)?, true),
        Test::PointFreeNormal => {
            CompiledCond::PointFree(ix.point(&c.subject.name).ok_or_else(missing)?, PointPos::Normal)
        }
        Test::PointFreeReverse => {
            CompiledCond::PointFree(ix.point(&c.subject.name).ok_or_else(missing)?, PointPos::Reverse)
        }
        Test::CompFree | Test::CompLocked => {
            let locked = c.test == Test::CompLocked;
            match c.subject.kind {
                Kind::Subroute => CompiledCond::SubIs(ix.sub(&c.subject.name).ok_or_else(missing)?, locked),
                Kind::Uir => CompiledCond::UirIs(ix.uir(&c.subject.name).ok_or_else(missing)?, locked),
                _ => return Err(missing()),
            }
        }
        Test::TrackClear => CompiledCond::TrackClearIs(ix.track(&c.subject.name).ok_or_else(missing)?, true),
        Test::TrackOccupied => {
            CompiledCond::TrackClearIs(ix.track(&c.subject.name).ok_or_else(missing)?, false)
        }
    })
}

/// Walk the graph from `signal` along `start_edge`, taking at each point
/// the continuation dictated by `positions`. Ends at a boundary.
fn walk_path(
    graph_model: &WalkTables,
    signal: u16,
    start_edge: u16,
    positions: &BTreeMap<u16, PointPos>,
) -> Option<(Vec<u16>, u16)> {
    let mut path = Vec::new();
    let mut from = signal;
    let mut edge = start_edge;
    loop {
        path.push(edge);
        if path.len() > graph_model.edge_endpoints.len() {
            return None; // cycle
        }
        let far = {
            let (a, b) = graph_model.edge_endpoints[edge as usize];
            if a == from {
                b
            } else {
                a
            }
        };
        match graph_model.node_kind[far as usize] {
            NodeKind::Boundary => return Some((path, far)),
            NodeKind::Point => {
                let p = graph_model.node_point[far as usize].as_ref()?;
                let pos = *positions.get(&p.point)?;
                let next = if edge == p.toe {
                    p.leg(pos)
                } else if p.leg_of(edge) == Some(pos) {
                    p.toe
                } else {
                    return None; // trailing against the commanded position
                };
                from = far;
                edge = next;
            }
            NodeKind::Signal | NodeKind::Joint => {
                let next = graph_model.node_adj[far as usize]
                    .iter()
                    .copied()
                    .find(|&e| e != edge)?;
                from = far;
                edge = next;
            }
        }
    }
}

struct WalkTables {
    edge_endpoints: Vec<(u16, u16)>,
    node_kind: Vec<NodeKind>,
    node_point: Vec<Option<PointAtNode>>,
    node_adj: Vec<Vec<u16>>,
}

/// Link application data, a station graph and route declarations into an
/// [`InterlockingModel`].
pub fn link(
    data: ApplicationData,
    graph: StationGraph,
    route_decls: &BTreeMap<String, RouteDecl>,
) -> Result<InterlockingModel, LinkError> {
    // Component tables: routes/subs/uirs come from the data, tracks from
    // the graph, points from both.
    let mut index = ComponentIndex::default();
    (index.routes, index.route_by_name) = build_table(
        data.route_requests.keys().cloned().collect::<BTreeSet<_>>(),
    );
    let mut point_names: BTreeSet<String> =
        data.components_of(Kind::Point).map(|c| c.name.clone()).collect();
    for n in graph.nodes.values() {
        if n.kind == NodeKind::Point {
            point_names.insert(n.id.clone());
        }
    }
    (index.points, index.point_by_name) = build_table(point_names);
    (index.subs, index.sub_by_name) =
        build_table(data.components_of(Kind::Subroute).map(|c| c.name.clone()).collect());
    (index.uirs, index.uir_by_name) =
        build_table(data.components_of(Kind::Uir).map(|c| c.name.clone()).collect());
    let mut track_names: BTreeSet<String> = graph.tracks.iter().map(|t| t.name.clone()).collect();
    for c in data.components_of(Kind::Track) {
        if !track_names.contains(&c.name) {
            return Err(LinkError::UnknownComponent(Kind::Track, c.name.clone()));
        }
    }
    track_names.extend(graph.tracks.iter().map(|t| t.name.clone()));
    (index.tracks, index.track_by_name) = build_table(track_names);
    (index.edges, index.edge_by_name) = build_table(graph.edges.keys().cloned().collect());
    (index.nodes, index.node_by_name) = build_table(graph.nodes.keys().cloned().collect());

    // Points referenced by the data must exist physically.
    for c in data.components_of(Kind::Point) {
        let known = graph.nodes.get(&c.name).is_some_and(|n| n.kind == NodeKind::Point);
        if !known {
            return Err(LinkError::UnknownComponent(Kind::Point, c.name.clone()));
        }
    }

    // Graph tables by index.
    let edge_track: Vec<u16> = index
        .edges
        .iter()
        .map(|e| index.track(&graph.edges[e].track.name).unwrap())
        .collect();
    let edge_endpoints: Vec<(u16, u16)> = index
        .edges
        .iter()
        .map(|e| {
            let ep = &graph.edges[e].endpoints;
            (index.node(&ep.0).unwrap(), index.node(&ep.1).unwrap())
        })
        .collect();
    let node_kind: Vec<NodeKind> = index.nodes.iter().map(|n| graph.nodes[n].kind).collect();
    let node_dir: Vec<Option<Direction>> =
        index.nodes.iter().map(|n| graph.nodes[n].direction).collect();
    let node_point: Vec<Option<PointAtNode>> = index
        .nodes
        .iter()
        .map(|n| {
            graph.nodes[n].point_edges.as_ref().map(|pe| PointAtNode {
                point: index.point(n).unwrap(),
                toe: index.edge(&pe.toe).unwrap(),
                normal: index.edge(&pe.normal).unwrap(),
                reverse: index.edge(&pe.reverse).unwrap(),
            })
        })
        .collect();
    let node_adj: Vec<Vec<u16>> = index
        .nodes
        .iter()
        .map(|n| graph.incident(n).iter().map(|e| index.edge(e).unwrap()).collect())
        .collect();

    // Compile the rules.
    let mut rules = CompiledRules {
        route_rules: vec![None; index.routes.len()],
        point_rules: vec![[None, None]; index.points.len()],
        releases: Vec::new(),
    };
    for rule in data.route_requests.values() {
        let route = index.route(&rule.route.name).unwrap();
        let conditions = rule
            .conditions
            .iter()
            .map(|c| compile_condition(c, &index))
            .collect::<Result<Vec<_>, _>>()?;
        let actions = rule
            .actions
            .iter()
            .map(|a| {
                let missing = || LinkError::UnknownComponent(a.subject.kind, a.subject.name.clone());
                Ok(match a.act {
                    Act::SetRoute => CompiledAction::SetRoute(index.route(&a.subject.name).ok_or_else(missing)?),
                    Act::CommandNormal => {
                        CompiledAction::CommandPoint(index.point(&a.subject.name).ok_or_else(missing)?, PointPos::Normal)
                    }
                    Act::CommandReverse => {
                        CompiledAction::CommandPoint(index.point(&a.subject.name).ok_or_else(missing)?, PointPos::Reverse)
                    }
                    Act::Lock => match a.subject.kind {
                        Kind::Subroute => CompiledAction::LockSub(index.sub(&a.subject.name).ok_or_else(missing)?),
                        Kind::Uir => CompiledAction::LockUir(index.uir(&a.subject.name).ok_or_else(missing)?),
                        _ => return Err(missing()),
                    },
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        rules.route_rules[route as usize] = Some(CompiledRouteRule { route, conditions, actions });
    }
    for rule in data.point_commands.values() {
        let point = index.point(&rule.point.name).unwrap();
        let conds = rule
            .conditions
            .iter()
            .map(|c| compile_condition(c, &index))
            .collect::<Result<Vec<_>, _>>()?;
        let slot = match rule.position {
            PointPos::Normal => 0,
            PointPos::Reverse => 1,
        };
        rules.point_rules[point as usize][slot] = Some(conds);
    }
    for rule in data.releases.values() {
        let target = match rule.target.kind {
            Kind::Subroute => ReleaseTarget::Sub(index.sub(&rule.target.name).unwrap()),
            Kind::Uir => ReleaseTarget::Uir(index.uir(&rule.target.name).unwrap()),
            _ => unreachable!("parser only accepts subroute/uir release targets"),
        };
        let conditions = rule
            .conditions
            .iter()
            .map(|c| compile_condition(c, &index))
            .collect::<Result<Vec<_>, _>>()?;
        rules.releases.push(CompiledRelease { target, conditions });
    }

    // Derive the geometry of every route.
    let walk_tables = WalkTables {
        edge_endpoints: edge_endpoints.clone(),
        node_kind: node_kind.clone(),
        node_point: node_point.clone(),
        node_adj: node_adj.clone(),
    };
    let mut geometry = BTreeMap::new();
    let mut geom: Vec<Option<CompiledGeometry>> = vec![None; index.routes.len()];
    for rule in data.route_requests.values() {
        let name = &rule.route.name;
        let decl = route_decls
            .get(name)
            .ok_or_else(|| LinkError::UnknownRoute(name.clone()))?;
        let entry = index
            .node(&decl.entry)
            .ok_or_else(|| LinkError::NoPath(name.clone(), format!("entry signal {} not in layout", decl.entry)))?;
        if node_kind[entry as usize] != NodeKind::Signal {
            return Err(LinkError::NoPath(name.clone(), format!("{} is not a signal", decl.entry)));
        }
        let exit = index
            .node(&decl.exit)
            .ok_or_else(|| LinkError::NoPath(name.clone(), format!("exit {} not in layout", decl.exit)))?;
        let positions: BTreeMap<u16, PointPos> = rule
            .commanded_points()
            .map(|(p, pos)| {
                index
                    .point(&p.name)
                    .map(|i| (i, pos))
                    .ok_or_else(|| LinkError::UnknownComponent(Kind::Point, p.name.clone()))
            })
            .collect::<Result<_, _>>()?;

        let mut found: Vec<(Vec<u16>, u16)> = Vec::new();
        for &cand in &node_adj[entry as usize] {
            if let Some((path, end)) = walk_path(&walk_tables, entry, cand, &positions) {
                if end == exit {
                    found.push((path, end));
                }
            }
        }
        let (path, _end) = match found.len() {
            0 => {
                return Err(LinkError::NoPath(
                    name.clone(),
                    format!(
                        "the commanded point positions do not connect {} to {}",
                        decl.entry, decl.exit
                    ),
                ))
            }
            1 => found.pop().unwrap(),
            _ => {
                return Err(LinkError::NoPath(
                    name.clone(),
                    format!("both sides of signal {} reach {}", decl.entry, decl.exit),
                ))
            }
        };

        let mut track_seq: Vec<u16> = Vec::new();
        for &e in &path {
            let t = edge_track[e as usize];
            if track_seq.last() != Some(&t) {
                track_seq.push(t);
            }
        }

        geometry.insert(
            name.clone(),
            RouteGeometry {
                route: rule.route.clone(),
                entry_signal: decl.entry.clone(),
                path: path.iter().map(|&e| index.edges[e as usize].clone()).collect(),
                exit: decl.exit.clone(),
                required_points: rule
                    .commanded_points()
                    .map(|(p, pos)| (p.name.clone(), pos))
                    .collect(),
                locked_subroutes: rule.locked_of_kind(Kind::Subroute).map(|c| c.name.clone()).collect(),
                locked_uirs: rule.locked_of_kind(Kind::Uir).map(|c| c.name.clone()).collect(),
            },
        );
        geom[index.route(name).unwrap() as usize] = Some(CompiledGeometry {
            entry_signal: entry,
            exit_node: exit,
            path,
            track_seq,
        });
    }
    let geom: Vec<CompiledGeometry> = geom.into_iter().map(Option::unwrap).collect();

    // Conflicts: route pairs sharing at least one track segment.
    let n = index.routes.len();
    let mut conflicts = BTreeSet::new();
    let mut conflict_matrix = vec![false; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let a: BTreeSet<u16> = geom[i].track_seq.iter().copied().collect();
            let shares = geom[j].track_seq.iter().any(|t| a.contains(t));
            if shares {
                conflicts.insert((index.routes[i].clone(), index.routes[j].clone()));
                conflict_matrix[i * n + j] = true;
                conflict_matrix[j * n + i] = true;
            }
        }
    }

    // Entry signals that actually start routes, and their routes.
    let mut by_signal: BTreeMap<u16, Vec<u16>> = BTreeMap::new();
    for (r, g) in geom.iter().enumerate() {
        by_signal.entry(g.entry_signal).or_default().push(r as u16);
    }
    let entry_signals: Vec<u16> = by_signal.keys().copied().collect();
    let routes_by_signal: Vec<Vec<u16>> = by_signal.values().cloned().collect();

    Ok(InterlockingModel {
        data,
        graph,
        geometry,
        conflicts,
        index,
        rules,
        geom,
        conflict_matrix,
        entry_signals,
        routes_by_signal,
        edge_track,
        edge_endpoints,
        node_kind,
        node_dir,
        node_point,
        node_adj,
    })
}
