use crate::ids::{ComponentId, Kind, PointPos};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A condition tag attached to a component in a rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Test {
    /// `xs` — route is not set
    RouteUnset,
    /// `s` — route is set
    RouteSet,
    /// `cfn` — point free to be commanded normal (or already normal)
    PointFreeNormal,
    /// `cfr` — point free to be commanded reverse (or already reverse)
    PointFreeReverse,
    /// `f` — subroute or immobilisation zone is free
    CompFree,
    /// `l` — subroute or immobilisation zone is locked
    CompLocked,
    /// `c` — track is clear
    TrackClear,
    /// `o` — track is occupied
    TrackOccupied,
}

impl Test {
    pub fn tag(self) -> &'static str {
        match self {
            Test::RouteUnset => "xs",
            Test::RouteSet => "s",
            Test::PointFreeNormal => "cfn",
            Test::PointFreeReverse => "cfr",
            Test::CompFree => "f",
            Test::CompLocked => "l",
            Test::TrackClear => "c",
            Test::TrackOccupied => "o",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Test> {
        Some(match tag {
            "xs" => Test::RouteUnset,
            "s" => Test::RouteSet,
            "cfn" => Test::PointFreeNormal,
            "cfr" => Test::PointFreeReverse,
            "f" => Test::CompFree,
            "l" => Test::CompLocked,
            "c" => Test::TrackClear,
            "o" => Test::TrackOccupied,
            _ => return None,
        })
    }

    /// Which component kind the tag applies to.
    pub fn applies_to(self, kind: Kind) -> bool {
        match self {
            Test::RouteUnset | Test::RouteSet => kind == Kind::Route,
            Test::PointFreeNormal | Test::PointFreeReverse => kind == Kind::Point,
            Test::CompFree | Test::CompLocked => kind == Kind::Subroute || kind == Kind::Uir,
            Test::TrackClear | Test::TrackOccupied => kind == Kind::Track,
        }
    }
}

/// One `subject tag` pair on the condition side of a rule.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Condition {
    pub subject: ComponentId,
    pub test: Test,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.subject, self.test.tag())
    }
}

/// An action tag on the `then` side of a route request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Act {
    /// `s` — set the route
    SetRoute,
    /// `cn` — command the point to normal
    CommandNormal,
    /// `cr` — command the point to reverse
    CommandReverse,
    /// `l` — lock a subroute or immobilisation zone
    Lock,
}

impl Act {
    pub fn tag(self) -> &'static str {
        match self {
            Act::SetRoute => "s",
            Act::CommandNormal => "cn",
            Act::CommandReverse => "cr",
            Act::Lock => "l",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Act> {
        Some(match tag {
            "s" => Act::SetRoute,
            "cn" => Act::CommandNormal,
            "cr" => Act::CommandReverse,
            "l" => Act::Lock,
            _ => return None,
        })
    }

    pub fn applies_to(self, kind: Kind) -> bool {
        match self {
            Act::SetRoute => kind == Kind::Route,
            Act::CommandNormal | Act::CommandReverse => kind == Kind::Point,
            Act::Lock => kind == Kind::Subroute || kind == Kind::Uir,
        }
    }
}

/// One `subject act` pair on the action side of a route request.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Action {
    pub subject: ComponentId,
    pub act: Act,
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.subject, self.act.tag())
    }
}

/// A `*Q_R(...)` block: the conditions under which a route may be set and
/// the actions taken when the request is granted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RouteRequestRule {
    pub route: ComponentId,
    pub conditions: Vec<Condition>,
    pub actions: Vec<Action>,
}

impl RouteRequestRule {
    /// Points commanded by this rule, in action order.
    pub fn commanded_points(&self) -> impl Iterator<Item = (&ComponentId, PointPos)> {
        self.actions.iter().filter_map(|a| match a.act {
            Act::CommandNormal => Some((&a.subject, PointPos::Normal)),
            Act::CommandReverse => Some((&a.subject, PointPos::Reverse)),
            _ => None,
        })
    }

    pub fn locked_of_kind(&self, kind: Kind) -> impl Iterator<Item = &ComponentId> {
        self.actions
            .iter()
            .filter(move |a| a.act == Act::Lock && a.subject.kind == kind)
            .map(|a| &a.subject)
    }
}

/// A `*P_<id>N` / `*P_<id>R` rule: conditions for commanding a point into
/// one position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointCommandRule {
    pub point: ComponentId,
    pub position: PointPos,
    pub conditions: Vec<Condition>,
}

/// A release rule for a subroute (`X f if ...` line) or an immobilisation
/// zone (`*sub_free_<id>` block, desugared to a rule on `U_IR(<id>)`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReleaseRule {
    pub target: ComponentId,
    pub conditions: Vec<Condition>,
}

/// Parsed application data: every rule in the document plus the set of all
/// component names it mentions.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApplicationData {
    pub route_requests: BTreeMap<String, RouteRequestRule>,
    pub point_commands: BTreeMap<(String, PointPos), PointCommandRule>,
    pub releases: BTreeMap<String, ReleaseRule>,
    pub components: BTreeSet<ComponentId>,
}

impl ApplicationData {
    pub fn is_empty(&self) -> bool {
        self.route_requests.is_empty()
            && self.point_commands.is_empty()
            && self.releases.is_empty()
    }

    /// All components of one kind mentioned anywhere in the data.
    pub fn components_of(&self, kind: Kind) -> impl Iterator<Item = &ComponentId> {
        self.components.iter().filter(move |c| c.kind == kind)
    }

    /// Record every component referenced by a rule into `components`.
    pub(crate) fn note_components<'a>(&mut self, ids: impl IntoIterator<Item = &'a ComponentId>) {
        for id in ids {
            self.components.insert(id.clone());
        }
    }
}
