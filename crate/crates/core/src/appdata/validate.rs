use super::ast::{Act, ApplicationData};
use crate::ids::{ComponentId, Kind, PointPos};
use crate::layout::{NodeKind, StationGraph};
use std::collections::BTreeSet;
use std::fmt;

/// A consistency finding between application data and a track layout.
/// Issues are data, not failures; an empty list means the pair is coherent.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Issue {
    /// A track or point named in the data does not exist in the graph.
    UnknownComponent(ComponentId),
    /// A route is referenced somewhere but has no `*Q_R` request rule.
    MissingRouteRequest(ComponentId),
    /// A point is commanded or tested but lacks a command rule for this
    /// position.
    MissingPointCommand(ComponentId, PointPos),
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Issue::UnknownComponent(c) => {
                write!(f, "{} {} is not present in the track layout", c.kind, c.name)
            }
            Issue::MissingRouteRequest(r) => {
                write!(f, "route {} has no request rule", r.name)
            }
            Issue::MissingPointCommand(p, pos) => {
                write!(f, "point {} has no command rule for the {pos} position", p.name)
            }
        }
    }
}

/// Cross-check parsed application data against a station graph.
pub fn validate_appdata(data: &ApplicationData, graph: &StationGraph) -> Vec<Issue> {
    let mut issues = BTreeSet::new();

    for comp in &data.components {
        match comp.kind {
            Kind::Track => {
                if !graph.tracks.contains(comp) {
                    issues.insert(Issue::UnknownComponent(comp.clone()));
                }
            }
            Kind::Point => {
                let known = graph
                    .nodes
                    .get(&comp.name)
                    .is_some_and(|n| n.kind == NodeKind::Point);
                if !known {
                    issues.insert(Issue::UnknownComponent(comp.clone()));
                }
            }
            // Routes, subroutes and zones are logical components that live
            // only in the application data.
            _ => {}
        }
    }

    for comp in data.components_of(Kind::Route) {
        if !data.route_requests.contains_key(&comp.name) {
            issues.insert(Issue::MissingRouteRequest(comp.clone()));
        }
    }

    // A point needs a command rule for each position it can be asked into.
    for rule in data.route_requests.values() {
        for action in &rule.actions {
            let pos = match action.act {
                Act::CommandNormal => PointPos::Normal,
                Act::CommandReverse => PointPos::Reverse,
                _ => continue,
            };
            if !data.point_commands.contains_key(&(action.subject.name.clone(), pos)) {
                issues.insert(Issue::MissingPointCommand(action.subject.clone(), pos));
            }
        }
    }

    issues.into_iter().collect()
}
