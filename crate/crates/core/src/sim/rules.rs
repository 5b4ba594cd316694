//! Interlocking rule semantics: condition evaluation, route request
//! execution and the release fixpoint.

use crate::ids::PointPos;
use crate::model::{CompiledAction, CompiledCond, InterlockingModel, ReleaseTarget};
use crate::state::ComponentStates;

/// Point-free tests recurse into the point's command rule; data cannot
/// nest deeper than this in practice, so the cap only guards cycles.
const MAX_DEPTH: u32 = 8;

/// Evaluate one compiled condition against the state.
///
/// `cfn`/`cfr` hold when the point already is in the asked position or its
/// command rule's conditions for that position are all satisfied.
pub fn eval_condition(cond: &CompiledCond, states: &ComponentStates, model: &InterlockingModel) -> bool {
    eval_at(cond, states, model, 0)
}

fn eval_at(cond: &CompiledCond, states: &ComponentStates, model: &InterlockingModel, depth: u32) -> bool {
    if depth > MAX_DEPTH {
        return false;
    }
    match *cond {
        CompiledCond::RouteIs(r, set) => states.routes[r as usize] == set,
        CompiledCond::SubIs(s, locked) => states.subs[s as usize] == locked,
        CompiledCond::UirIs(u, locked) => states.uirs[u as usize] == locked,
        CompiledCond::TrackClearIs(t, clear) => (states.track_occ[t as usize] == 0) == clear,
        CompiledCond::PointFree(p, pos) => {
            if states.points[p as usize] == pos {
                return true;
            }
            let slot = match pos {
                PointPos::Normal => 0,
                PointPos::Reverse => 1,
            };
            match &model.rules.point_rules[p as usize][slot] {
                Some(conds) => conds.iter().all(|c| eval_at(c, states, model, depth + 1)),
                None => false,
            }
        }
    }
}

/// Evaluate a route's request rule. When every condition holds, apply all
/// actions atomically and return `Some(true)`; on any failing condition
/// leave the state untouched and return `Some(false)`. `None` when the
/// route has no rule.
pub fn try_route_request(
    states: &mut ComponentStates,
    model: &InterlockingModel,
    route: u16,
) -> Option<bool> {
    let rule = model.rules.route_rules[route as usize].as_ref()?;
    if !rule.conditions.iter().all(|c| eval_condition(c, states, model)) {
        return Some(false);
    }
    for action in &rule.actions {
        match *action {
            CompiledAction::SetRoute(r) => states.routes[r as usize] = true,
            CompiledAction::CommandPoint(p, pos) => states.points[p as usize] = pos,
            CompiledAction::LockSub(s) => states.subs[s as usize] = true,
            CompiledAction::LockUir(u) => states.uirs[u as usize] = true,
        }
    }
    Some(true)
}

/// Scan all release rules until nothing more can be released: a locked
/// target whose conditions all hold becomes free. Releases only ever flip
/// locked to free, so the fixpoint terminates and the scan is idempotent.
pub fn apply_releases(states: &mut ComponentStates, model: &InterlockingModel) -> bool {
    let mut any = false;
    loop {
        let mut changed = false;
        for release in &model.rules.releases {
            let locked = match release.target {
                ReleaseTarget::Sub(s) => states.subs[s as usize],
                ReleaseTarget::Uir(u) => states.uirs[u as usize],
            };
            if !locked {
                continue;
            }
            if release
                .conditions
                .iter()
                .all(|c| eval_condition(c, states, model))
            {
                match release.target {
                    ReleaseTarget::Sub(s) => states.subs[s as usize] = false,
                    ReleaseTarget::Uir(u) => states.uirs[u as usize] = false,
                }
                changed = true;
                any = true;
            }
        }
        if !changed {
            return any;
        }
    }
}
