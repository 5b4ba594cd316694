//! Discrete-event simulation of randomized train traffic over an
//! interlocking model.
//!
//! Four things happen: trains arrive at entry signals, waiting trains
//! request routes, moving trains advance edge by edge following the
//! current point positions, and after every state-changing event the
//! interlocking releases whatever components have become releasable.
//! Event times are drawn from uniform spreads `(0, beta]` relative to the
//! previous occurrence, so every seed produces a different but fully
//! reproducible day of traffic.

mod rules;

pub use rules::{apply_releases, eval_condition};

use crate::ids::{Direction, PointPos};
use crate::layout::NodeKind;
use crate::model::InterlockingModel;
use crate::state::{ComponentStates, StateRecord, TraceEvent};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("event queue is empty")]
    QueueEmpty,
    #[error("unknown train {0}")]
    UnknownTrain(u32),
    #[error("unknown route {0}")]
    UnknownRoute(String),
    #[error("train {0} has no assigned route")]
    NoRouteAssigned(u32),
}

/// Spread parameters and bound for one simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Arrival spread: the next train arrives within this of the last.
    pub beta_a: f64,
    /// Request spread: a waiting train retries within this of its last try.
    pub beta_r: f64,
    /// Movement spread: a moving train advances within this of its last move.
    pub beta_m: f64,
    /// Bound of the temporal operators, counted in trains that have moved.
    pub bound_trains: u32,
    pub seed: u64,
    /// A run with this many consecutive events without any train movement
    /// is declared stalled (deadlocked data freezes `nb`, so the bound
    /// alone would never be reached).
    pub stall_events: u64,
    /// Hard ceiling on events per run.
    pub max_events: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            beta_a: 60.0,
            beta_r: 30.0,
            beta_m: 20.0,
            bound_trains: 1440,
            seed: 0,
            stall_events: 20_000,
            max_events: 50_000_000,
        }
    }
}

impl SimConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.beta_a > 0.0 && self.beta_r > 0.0 && self.beta_m > 0.0) {
            return Err("all beta spreads must be positive".into());
        }
        if self.bound_trains < 1 {
            return Err("bound must be at least 1 train".into());
        }
        Ok(())
    }
}

/// Where a train is: still outside the station at an entry signal, or on
/// an edge heading toward a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrainPos {
    WaitingAt(u16),
    OnEdge { edge: u16, heading: u16 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Train {
    pub id: u32,
    pub dir: Direction,
    pub pos: TrainPos,
    pub route: Option<u16>,
    pub moved: bool,
    pub derailed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    Arrival,
    Request(u32),
    Move(u32),
}

/// A scheduled event. Ties at equal timestamps break FIFO by sequence
/// number, which keeps traces reproducible.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct QueuedEvent {
    pub time: f64,
    pub seq: u64,
    pub kind: EventKind,
}

impl PartialEq for QueuedEvent {
    fn eq(&self, other: &Self) -> bool {
        self.time == other.time && self.seq == other.seq && self.kind == other.kind
    }
}
impl Eq for QueuedEvent {}

impl Ord for QueuedEvent {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap, we want earliest first.
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for QueuedEvent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Full simulation state: the interlocking state tuple, the trains, the
/// pending event queue and the generator.
#[derive(Debug, Clone)]
pub struct SimState {
    pub now: f64,
    pub nb: u32,
    pub states: ComponentStates,
    pub trains: BTreeMap<u32, Train>,
    queue: BinaryHeap<QueuedEvent>,
    next_train_id: u32,
    seq: u64,
    rng: ChaCha12Rng,
    pub events_processed: u64,
    pub events_since_move: u64,
    /// Shared snapshot of (states, in-station trains), refreshed only when
    /// an event changed them; successive no-change records reuse it.
    record_cache: Option<(Arc<ComponentStates>, Arc<Vec<(u32, u16, Direction)>>)>,
}

/// Outcome of one train movement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveOutcome {
    Moved,
    DerailedPosition,
    Exited,
}

/// A deep copy of a simulation state, without the generator. Restoring
/// with a fresh seed replays the copied state under new randomness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub now: f64,
    pub nb: u32,
    pub states: ComponentStates,
    pub trains: BTreeMap<u32, Train>,
    pub queue: Vec<QueuedEvent>,
    pub next_train_id: u32,
    pub seq: u64,
    pub events_processed: u64,
    pub events_since_move: u64,
}

impl SimState {
    fn delay(&mut self, beta: f64) -> f64 {
        // (0, beta]: a fresh event never lands exactly on `now`.
        beta * (1.0 - self.rng.random::<f64>())
    }

    fn schedule(&mut self, time: f64, kind: EventKind) {
        let seq = self.seq;
        self.seq += 1;
        self.queue.push(QueuedEvent { time, seq, kind });
    }

    pub fn pending_events(&self) -> usize {
        self.queue.len()
    }

    /// Trains currently in the station, as (id, track, direction), sorted.
    pub fn trains_in_station(&self, model: &InterlockingModel) -> Vec<(u32, u16, Direction)> {
        self.trains
            .values()
            .filter_map(|t| match t.pos {
                TrainPos::OnEdge { edge, .. } => {
                    Some((t.id, model.edge_track[edge as usize], t.dir))
                }
                TrainPos::WaitingAt(_) => None,
            })
            .collect()
    }

    fn record(&self, model: &InterlockingModel, event: TraceEvent, changed: bool) -> StateRecord {
        StateRecord {
            nb: self.nb,
            now: self.now,
            event,
            states: self.states.clone(),
            trains: self.trains_in_station(model),
            changed,
        }
    }

    /// In debug builds, check that track occupancy agrees with the train
    /// positions after every step.
    #[cfg(debug_assertions)]
    fn assert_occupancy(&self, model: &InterlockingModel) {
        let mut occ = vec![0u16; self.states.track_occ.len()];
        for t in self.trains.values() {
            if let TrainPos::OnEdge { edge, .. } = t.pos {
                occ[model.edge_track[edge as usize] as usize] += 1;
            }
        }
        debug_assert_eq!(occ, self.states.track_occ, "sigma_t inconsistent with sigma_tr");
    }
}

/// Build the initial state: points normal, routes unset, everything free,
/// no trains, one arrival scheduled within `(0, beta_a]`.
pub fn init_sim(model: &InterlockingModel, config: &SimConfig) -> SimState {
    let mut state = SimState {
        now: 0.0,
        nb: 0,
        states: ComponentStates::initial(model),
        trains: BTreeMap::new(),
        queue: BinaryHeap::new(),
        next_train_id: 0,
        seq: 0,
        rng: ChaCha12Rng::seed_from_u64(config.seed),
        events_processed: 0,
        events_since_move: 0,
    };
    let at = state.delay(config.beta_a);
    state.schedule(at, EventKind::Arrival);
    state
}

/// Evaluate a route request by name against the current state. When every
/// condition holds, all actions are applied atomically and the request is
/// granted; otherwise the state is left untouched.
pub fn evaluate_route_request(
    state: &mut SimState,
    model: &InterlockingModel,
    route: &str,
) -> Result<bool, SimError> {
    let r = model
        .index
        .route(route)
        .ok_or_else(|| SimError::UnknownRoute(route.to_string()))?;
    rules::try_route_request(&mut state.states, model, r)
        .ok_or_else(|| SimError::UnknownRoute(route.to_string()))
}

/// Pop and execute the earliest pending event, then run the release scan
/// to fixpoint. Returns the state record the event produced.
pub fn step(
    state: &mut SimState,
    model: &InterlockingModel,
    config: &SimConfig,
) -> Result<StateRecord, SimError> {
    let ev = state.queue.pop().ok_or(SimError::QueueEmpty)?;
    debug_assert!(ev.time >= state.now, "event times must be non-decreasing");
    state.now = ev.time;
    state.events_processed += 1;
    state.events_since_move += 1;

    let (label, changed) = match ev.kind {
        EventKind::Arrival => {
            let n = model.entry_signals.len();
            let pick = state.rng.random_range(0..n);
            let signal = model.entry_signals[pick];
            let dir = model.node_dir[signal as usize].unwrap_or(Direction::Up);
            let id = state.next_train_id;
            state.next_train_id += 1;
            state.trains.insert(
                id,
                Train {
                    id,
                    dir,
                    pos: TrainPos::WaitingAt(signal),
                    route: None,
                    moved: false,
                    derailed: false,
                },
            );
            let next_arrival = state.now + state.delay(config.beta_a);
            state.schedule(next_arrival, EventKind::Arrival);
            let first_request = state.now + state.delay(config.beta_r);
            state.schedule(first_request, EventKind::Request(id));
            (TraceEvent::Arrival { train: id, signal }, false)
        }
        EventKind::Request(id) => {
            let train = state.trains.get(&id).ok_or(SimError::UnknownTrain(id))?;
            debug_assert!(matches!(train.pos, TrainPos::WaitingAt(_)) && train.route.is_none());
            let signal = match train.pos {
                TrainPos::WaitingAt(s) => s,
                _ => return Err(SimError::UnknownTrain(id)),
            };
            // Pick uniformly among the routes starting at this signal.
            let slot = model
                .entry_signals
                .iter()
                .position(|&s| s == signal)
                .expect("waiting trains sit at entry signals");
            let candidates = &model.routes_by_signal[slot];
            let route = candidates[state.rng.random_range(0..candidates.len())];
            let granted = rules::try_route_request(&mut state.states, model, route)
                .expect("compiled routes have rules");
            if granted {
                state.trains.get_mut(&id).unwrap().route = Some(route);
                let first_move = state.now + state.delay(config.beta_m);
                state.schedule(first_move, EventKind::Move(id));
                (TraceEvent::Grant { route, train: id }, true)
            } else {
                let retry = state.now + state.delay(config.beta_r);
                state.schedule(retry, EventKind::Request(id));
                (TraceEvent::Reject { route, train: id }, false)
            }
        }
        EventKind::Move(id) => {
            let before_edge = match state.trains.get(&id) {
                Some(t) => t.pos,
                None => return Err(SimError::UnknownTrain(id)),
            };
            match move_train(state, model, id)? {
                MoveOutcome::Moved => {
                    let next = state.now + state.delay(config.beta_m);
                    state.schedule(next, EventKind::Move(id));
                    state.events_since_move = 0;
                    let edge = match state.trains[&id].pos {
                        TrainPos::OnEdge { edge, .. } => edge,
                        _ => unreachable!(),
                    };
                    (TraceEvent::Move { train: id, edge }, true)
                }
                MoveOutcome::DerailedPosition => {
                    // The train halts in place; no further movement events.
                    let node = match before_edge {
                        TrainPos::OnEdge { heading, .. } => heading,
                        _ => unreachable!("waiting trains cannot derail"),
                    };
                    (TraceEvent::Derail { train: id, node }, true)
                }
                MoveOutcome::Exited => {
                    state.events_since_move = 0;
                    (TraceEvent::Exit { train: id }, true)
                }
            }
        }
    };

    if changed {
        rules::apply_releases(&mut state.states, model);
    }
    #[cfg(debug_assertions)]
    state.assert_occupancy(model);
    Ok(state.record(model, label, changed))
}

/// Advance a train one edge along the direction given by the current point
/// positions (not the route's intended path; divergence is how data errors
/// show up). A waiting train's first movement takes it onto the first edge
/// past its entry signal and counts it into `nb`.
pub fn move_train(
    state: &mut SimState,
    model: &InterlockingModel,
    id: u32,
) -> Result<MoveOutcome, SimError> {
    let train = state.trains.get(&id).ok_or(SimError::UnknownTrain(id))?;
    let route = train.route.ok_or(SimError::NoRouteAssigned(id))?;
    if train.derailed {
        return Ok(MoveOutcome::DerailedPosition);
    }

    match train.pos {
        TrainPos::WaitingAt(signal) => {
            let start = model.geom[route as usize].path[0];
            let heading = model.other_endpoint(start, signal);
            let track = model.edge_track[start as usize];
            state.states.track_occ[track as usize] += 1;
            let train = state.trains.get_mut(&id).unwrap();
            train.pos = TrainPos::OnEdge { edge: start, heading };
            if !train.moved {
                train.moved = true;
                state.nb += 1;
            }
            Ok(MoveOutcome::Moved)
        }
        TrainPos::OnEdge { edge, heading } => {
            let far = heading;
            match model.node_kind[far as usize] {
                NodeKind::Boundary => {
                    // End of the line: the train leaves the station and its
                    // route is unset before the release scan runs.
                    let track = model.edge_track[edge as usize];
                    state.states.track_occ[track as usize] -= 1;
                    state.states.routes[route as usize] = false;
                    state.trains.remove(&id);
                    Ok(MoveOutcome::Exited)
                }
                NodeKind::Point => {
                    let p = model.node_point[far as usize].expect("point nodes carry edges");
                    let pos = state.states.points[p.point as usize];
                    let next = if edge == p.toe {
                        Some(p.leg(pos))
                    } else if p.leg_of(edge) == Some(pos) {
                        Some(p.toe)
                    } else {
                        None
                    };
                    match next {
                        Some(next) => {
                            advance(state, model, id, edge, next, far);
                            Ok(MoveOutcome::Moved)
                        }
                        None => {
                            state.trains.get_mut(&id).unwrap().derailed = true;
                            Ok(MoveOutcome::DerailedPosition)
                        }
                    }
                }
                NodeKind::Signal | NodeKind::Joint => {
                    let next = model.node_adj[far as usize]
                        .iter()
                        .copied()
                        .find(|&e| e != edge);
                    match next {
                        Some(next) => {
                            advance(state, model, id, edge, next, far);
                            Ok(MoveOutcome::Moved)
                        }
                        None => {
                            // Dead end that is not a boundary; leave the
                            // station as if it were one.
                            let track = model.edge_track[edge as usize];
                            state.states.track_occ[track as usize] -= 1;
                            state.states.routes[route as usize] = false;
                            state.trains.remove(&id);
                            Ok(MoveOutcome::Exited)
                        }
                    }
                }
            }
        }
    }
}

fn advance(state: &mut SimState, model: &InterlockingModel, id: u32, from: u16, to: u16, via: u16) {
    let old_track = model.edge_track[from as usize];
    let new_track = model.edge_track[to as usize];
    if old_track != new_track {
        state.states.track_occ[old_track as usize] -= 1;
        state.states.track_occ[new_track as usize] += 1;
    }
    let heading = model.other_endpoint(to, via);
    state.trains.get_mut(&id).unwrap().pos = TrainPos::OnEdge { edge: to, heading };
}

/// Deep-copy the state, excluding the generator.
pub fn snapshot(state: &SimState) -> Snapshot {
    let mut queue: Vec<QueuedEvent> = state.queue.iter().copied().collect();
    queue.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.seq.cmp(&b.seq)));
    Snapshot {
        now: state.now,
        nb: state.nb,
        states: state.states.clone(),
        trains: state.trains.clone(),
        queue,
        next_train_id: state.next_train_id,
        seq: state.seq,
        events_processed: state.events_processed,
        events_since_move: state.events_since_move,
    }
}

/// Rebuild a live state from a snapshot with a freshly seeded generator.
pub fn restore(snap: &Snapshot, seed: u64) -> SimState {
    SimState {
        now: snap.now,
        nb: snap.nb,
        states: snap.states.clone(),
        trains: snap.trains.clone(),
        queue: snap.queue.iter().copied().collect(),
        next_train_id: snap.next_train_id,
        seq: snap.seq,
        rng: ChaCha12Rng::seed_from_u64(seed),
        events_processed: snap.events_processed,
        events_since_move: snap.events_since_move,
    }
}
