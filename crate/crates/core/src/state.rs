//! Simulation state snapshots and their trace serialization.

use crate::ids::{Direction, PointPos};
use crate::model::InterlockingModel;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::sync::Arc;

/// The interlocking-visible part of the simulation state: one dense vector
/// per component family, indexed by the model's [`ComponentIndex`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentStates {
    pub points: Vec<PointPos>,
    /// true = set
    pub routes: Vec<bool>,
    /// true = locked
    pub subs: Vec<bool>,
    /// true = locked
    pub uirs: Vec<bool>,
    /// trains per track
    pub track_occ: Vec<u16>,
}

impl ComponentStates {
    /// Initial condition: points normal, routes unset, everything free,
    /// no occupancy.
    pub fn initial(model: &InterlockingModel) -> Self {
        ComponentStates {
            points: vec![PointPos::Normal; model.index.points.len()],
            routes: vec![false; model.index.routes.len()],
            subs: vec![false; model.index.subs.len()],
            uirs: vec![false; model.index.uirs.len()],
            track_occ: vec![0; model.index.tracks.len()],
        }
    }
}

/// What happened at one simulation step. Rendered into the trace's
/// `event` field on demand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TraceEvent {
    /// The initial state, before any event.
    Init,
    /// A train appeared outside the station at an entry signal (node id).
    Arrival { train: u32, signal: u16 },
    /// A route request was granted and its actions applied.
    Grant { route: u16, train: u32 },
    /// A route request failed its conditions; nothing changed.
    Reject { route: u16, train: u32 },
    /// A train advanced one edge.
    Move { train: u32, edge: u16 },
    /// A train ran onto a point set against it and halted.
    Derail { train: u32, node: u16 },
    /// A train reached its exit and left the station.
    Exit { train: u32 },
}

impl TraceEvent {
    pub fn render(&self, model: &InterlockingModel) -> String {
        let ix = &model.index;
        match self {
            TraceEvent::Init => "init".into(),
            TraceEvent::Arrival { train, signal } => {
                format!("arrival({train}@{})", ix.nodes[*signal as usize])
            }
            TraceEvent::Grant { route, train } => {
                format!("grant({},{train})", ix.routes[*route as usize])
            }
            TraceEvent::Reject { route, train } => {
                format!("reject({},{train})", ix.routes[*route as usize])
            }
            TraceEvent::Move { train, edge } => {
                format!("move({train},{})", ix.edges[*edge as usize])
            }
            TraceEvent::Derail { train, node } => {
                format!("derail({train}@{})", ix.nodes[*node as usize])
            }
            TraceEvent::Exit { train } => format!("exit({train})"),
        }
    }
}

/// Immutable per-event snapshot: the state tuple after the event, the count
/// of trains that have moved so far, and the event that produced it.
/// Consecutive records of a run share their state vectors while nothing
/// changes, so emitting one per event stays cheap.
#[derive(Debug, Clone)]
pub struct StateRecord {
    pub nb: u32,
    pub now: f64,
    pub event: TraceEvent,
    pub states: Arc<ComponentStates>,
    /// (train id, track, direction) for every train in the station, sorted
    /// by id. Trains still waiting outside at an entry signal are not in
    /// the station yet and do not appear.
    pub trains: Arc<Vec<(u32, u16, Direction)>>,
    /// Whether this record differs from its predecessor in any field a
    /// property can observe (nb or the state tuple).
    pub changed: bool,
}

impl PartialEq for StateRecord {
    fn eq(&self, other: &Self) -> bool {
        self.nb == other.nb
            && self.now == other.now
            && self.event == other.event
            && self.states == other.states
            && self.trains == other.trains
    }
}

impl StateRecord {
    /// One JSON line with fields exactly
    /// `{"event","nb","now","p","r","s","t","tr","u"}`, keys sorted, for
    /// byte-stable trace files.
    pub fn to_jsonl(&self, model: &InterlockingModel) -> String {
        let ix = &model.index;
        let mut out = String::with_capacity(256);
        out.push('{');
        write!(
            out,
            "\"event\":{},\"nb\":{},\"now\":{}",
            serde_json::to_string(&self.event.render(model)).unwrap(),
            self.nb,
            serde_json::Number::from_f64(self.now).unwrap()
        )
        .unwrap();
        out.push_str(",\"p\":{");
        for (i, name) in ix.points.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write!(out, "\"{name}\":\"{}\"", self.states.points[i].as_str()).unwrap();
        }
        out.push_str("},\"r\":{");
        for (i, name) in ix.routes.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let v = if self.states.routes[i] { "set" } else { "unset" };
            write!(out, "\"{name}\":\"{v}\"").unwrap();
        }
        out.push_str("},\"s\":{");
        for (i, name) in ix.subs.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let v = if self.states.subs[i] { "locked" } else { "free" };
            write!(out, "\"{name}\":\"{v}\"").unwrap();
        }
        out.push_str("},\"t\":{");
        for (i, name) in ix.tracks.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write!(out, "\"{name}\":{}", self.states.track_occ[i]).unwrap();
        }
        out.push_str("},\"tr\":{");
        let mut trains: Vec<(String, u16, Direction)> = self
            .trains
            .iter()
            .map(|(id, track, dir)| (id.to_string(), *track, *dir))
            .collect();
        trains.sort();
        for (i, (id, track, dir)) in trains.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write!(
                out,
                "\"{id}\":[\"{}\",\"{}\"]",
                ix.tracks[*track as usize],
                dir.as_str()
            )
            .unwrap();
        }
        out.push_str("},\"u\":{");
        for (i, name) in ix.uirs.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let v = if self.states.uirs[i] { "locked" } else { "free" };
            write!(out, "\"{name}\":\"{v}\"").unwrap();
        }
        out.push_str("}}");
        out
    }
}
