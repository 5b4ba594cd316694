//! Component identifiers and the naming convention shared by all input files.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Kind of an interlocking component, inferred from its name prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Kind {
    Route,
    Point,
    Subroute,
    Uir,
    Track,
    Signal,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Kind::Route => "route",
            Kind::Point => "point",
            Kind::Subroute => "subroute",
            Kind::Uir => "immobilisation zone",
            Kind::Track => "track",
            Kind::Signal => "signal",
        };
        f.write_str(s)
    }
}

/// A named component. Routes start `R_`, immobilisation zones `U_IR(`,
/// other `U_` names are subroutes, tracks `T_`, points `P_`; anything else
/// is a signal name (signals only occur in the layout and route files).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ComponentId {
    pub kind: Kind,
    pub name: String,
}

impl ComponentId {
    pub fn new(kind: Kind, name: impl Into<String>) -> Self {
        ComponentId { kind, name: name.into() }
    }

    /// Classify a name by the naming convention.
    pub fn infer(name: &str) -> ComponentId {
        let kind = if name.starts_with("R_") {
            Kind::Route
        } else if name.starts_with("U_IR(") {
            Kind::Uir
        } else if name.starts_with("U_") {
            Kind::Subroute
        } else if name.starts_with("T_") {
            Kind::Track
        } else if name.starts_with("P_") {
            Kind::Point
        } else {
            Kind::Signal
        };
        ComponentId::new(kind, name)
    }

    pub fn route(name: impl Into<String>) -> Self {
        ComponentId::new(Kind::Route, name)
    }
    pub fn point(name: impl Into<String>) -> Self {
        ComponentId::new(Kind::Point, name)
    }
    pub fn subroute(name: impl Into<String>) -> Self {
        ComponentId::new(Kind::Subroute, name)
    }
    pub fn uir(name: impl Into<String>) -> Self {
        ComponentId::new(Kind::Uir, name)
    }
    pub fn track(name: impl Into<String>) -> Self {
        ComponentId::new(Kind::Track, name)
    }
    pub fn signal(name: impl Into<String>) -> Self {
        ComponentId::new(Kind::Signal, name)
    }
}

impl fmt::Display for ComponentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Point blade position. Belgian convention: normal is the left leg,
/// reverse the right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PointPos {
    Normal,
    Reverse,
}

impl PointPos {
    pub fn opposite(self) -> PointPos {
        match self {
            PointPos::Normal => PointPos::Reverse,
            PointPos::Reverse => PointPos::Normal,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PointPos::Normal => "normal",
            PointPos::Reverse => "reverse",
        }
    }

    /// Left/right wording used by the property language.
    pub fn as_side(self) -> &'static str {
        match self {
            PointPos::Normal => "left",
            PointPos::Reverse => "right",
        }
    }
}

impl fmt::Display for PointPos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Travel direction of a train or facing direction of a signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Direction {
    Up,
    Down,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Up => "up",
            Direction::Down => "down",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_classify_by_prefix() {
        assert_eq!(ComponentId::infer("R_CGC_011").kind, Kind::Route);
        assert_eq!(ComponentId::infer("U_IR(09C)").kind, Kind::Uir);
        assert_eq!(ComponentId::infer("U_CGC_20C").kind, Kind::Subroute);
        assert_eq!(ComponentId::infer("T_10C").kind, Kind::Track);
        assert_eq!(ComponentId::infer("P_09C").kind, Kind::Point);
        assert_eq!(ComponentId::infer("CGC").kind, Kind::Signal);
    }
}
