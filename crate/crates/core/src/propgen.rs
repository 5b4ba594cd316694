//! Automatic generation of the property suite from a linked model: one
//! track-capacity formula per track, point-stability and point-alignment
//! formulas around every point, and liveness formulas for every route,
//! subroute and immobilisation zone.

use crate::bltl::{Cmp, Expr, Formula, Operand, StateTerm, Term, Value};
use crate::ids::PointPos;
use crate::model::InterlockingModel;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

/// Which family a property belongs to; reports group counts by this.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PropertyClass {
    /// At most one train per track segment.
    TrackCapacity,
    /// A point does not move under a train.
    PointStability,
    /// A train crossing a point sees it set, and staying, on the
    /// connecting position.
    PointAlignment,
    /// Every route can always eventually be set.
    RouteLiveness,
    /// Every subroute and zone can always eventually be released.
    ReleaseLiveness,
    /// Anything loaded from a file that fits no generated shape.
    Other,
}

impl PropertyClass {
    /// Classes are conventionally numbered 1-5 in reports; 0 is unknown.
    pub fn index(self) -> u8 {
        match self {
            PropertyClass::TrackCapacity => 1,
            PropertyClass::PointStability => 2,
            PropertyClass::PointAlignment => 3,
            PropertyClass::RouteLiveness => 4,
            PropertyClass::ReleaseLiveness => 5,
            PropertyClass::Other => 0,
        }
    }

    pub fn is_safety(self) -> bool {
        matches!(
            self,
            PropertyClass::TrackCapacity | PropertyClass::PointStability | PropertyClass::PointAlignment
        )
    }
}

impl fmt::Display for PropertyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PropertyClass::TrackCapacity => "track-capacity",
            PropertyClass::PointStability => "point-stability",
            PropertyClass::PointAlignment => "point-alignment",
            PropertyClass::RouteLiveness => "route-liveness",
            PropertyClass::ReleaseLiveness => "release-liveness",
            PropertyClass::Other => "other",
        };
        f.write_str(s)
    }
}

/// A generated or loaded property: a stable id, its class and the formula.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Property {
    pub id: String,
    pub class: PropertyClass,
    pub formula: Formula,
}

fn trains(track: &str) -> Term {
    Term { base: StateTerm::Trains(track.into()), next: false }
}

fn point(p: &str, next: bool) -> Term {
    Term { base: StateTerm::Point(p.into()), next }
}

fn atom(lhs: Term, cmp: Cmp, rhs: Operand) -> Expr {
    Expr::Atom { lhs, cmp, rhs }
}

fn and(parts: Vec<Expr>) -> Expr {
    parts
        .into_iter()
        .reduce(|a, b| Expr::And(Box::new(a), Box::new(b)))
        .expect("non-empty conjunction")
}

/// Tracks adjacent to a point: the tracks of its three incident edges.
fn point_tracks(model: &InterlockingModel, point_node: usize) -> Vec<u16> {
    let mut tracks = BTreeSet::new();
    for &e in &model.node_adj[point_node] {
        tracks.insert(model.edge_track[e as usize]);
    }
    tracks.into_iter().collect()
}

/// Safety suite: capacity per track, stability per adjacent (track, point)
/// pair, alignment per ordered track pair connected across a point.
pub fn gen_safety(model: &InterlockingModel, bound: u32) -> Vec<Property> {
    let ix = &model.index;
    let mut props = Vec::new();

    for track in &ix.tracks {
        props.push(Property {
            id: format!("capacity/{track}"),
            class: PropertyClass::TrackCapacity,
            formula: Formula::Globally {
                bound,
                body: atom(trains(track), Cmp::Le, Operand::Lit(Value::Int(1))),
            },
        });
    }

    for (node, pan) in model.node_point.iter().enumerate() {
        let Some(pan) = pan else { continue };
        let pname = &ix.points[pan.point as usize];
        for t in point_tracks(model, node) {
            let tname = &ix.tracks[t as usize];
            props.push(Property {
                id: format!("stability/{tname}/{pname}"),
                class: PropertyClass::PointStability,
                formula: Formula::Globally {
                    bound,
                    body: Expr::Implies(
                        Box::new(atom(trains(tname), Cmp::Eq, Operand::Lit(Value::Int(1)))),
                        Box::new(atom(
                            point(pname, false),
                            Cmp::Eq,
                            Operand::Term(point(pname, true)),
                        )),
                    ),
                },
            });
        }
    }

    for pan in model.node_point.iter().flatten() {
        let pname = &ix.points[pan.point as usize];
        let toe_track = model.edge_track[pan.toe as usize];
        for (leg, pos) in [(pan.normal, PointPos::Normal), (pan.reverse, PointPos::Reverse)] {
            let leg_track = model.edge_track[leg as usize];
            if leg_track == toe_track {
                continue;
            }
            for (a, b) in [(leg_track, toe_track), (toe_track, leg_track)] {
                let (a, b) = (&ix.tracks[a as usize], &ix.tracks[b as usize]);
                let lit = Operand::Lit(Value::Point(pos));
                props.push(Property {
                    id: format!("alignment/{a}>{b}/{pname}"),
                    class: PropertyClass::PointAlignment,
                    formula: Formula::Globally {
                        bound,
                        body: Expr::Implies(
                            Box::new(and(vec![
                                atom(trains(a), Cmp::Eq, Operand::Lit(Value::Int(1))),
                                atom(trains(b), Cmp::Eq, Operand::Lit(Value::Int(0))),
                                atom(
                                    Term { base: StateTerm::Trains(a.clone()), next: true },
                                    Cmp::Eq,
                                    Operand::Lit(Value::Int(0)),
                                ),
                                atom(
                                    Term { base: StateTerm::Trains(b.clone()), next: true },
                                    Cmp::Eq,
                                    Operand::Lit(Value::Int(1)),
                                ),
                            ])),
                            Box::new(and(vec![
                                atom(point(pname, false), Cmp::Eq, lit.clone()),
                                atom(point(pname, true), Cmp::Eq, lit),
                            ])),
                        ),
                    },
                });
            }
        }
    }

    props
}

/// Availability suite: every route eventually set again, every subroute
/// and zone eventually free again, within the window.
pub fn gen_availability(model: &InterlockingModel, bound: u32, window: u32) -> Vec<Property> {
    let ix = &model.index;
    let mut props = Vec::new();

    for route in &ix.routes {
        props.push(Property {
            id: format!("route-live/{route}"),
            class: PropertyClass::RouteLiveness,
            formula: Formula::GloballyFinally {
                bound,
                window,
                body: atom(
                    Term { base: StateTerm::Route(route.clone()), next: false },
                    Cmp::Eq,
                    Operand::Lit(Value::Route(true)),
                ),
            },
        });
    }
    for sub in &ix.subs {
        props.push(Property {
            id: format!("release-live/{sub}"),
            class: PropertyClass::ReleaseLiveness,
            formula: Formula::GloballyFinally {
                bound,
                window,
                body: atom(
                    Term { base: StateTerm::Sub(sub.clone()), next: false },
                    Cmp::Eq,
                    Operand::Lit(Value::Lock(false)),
                ),
            },
        });
    }
    for uir in &ix.uirs {
        props.push(Property {
            id: format!("release-live/{uir}"),
            class: PropertyClass::ReleaseLiveness,
            formula: Formula::GloballyFinally {
                bound,
                window,
                body: atom(
                    Term { base: StateTerm::Uir(uir.clone()), next: false },
                    Cmp::Eq,
                    Operand::Lit(Value::Lock(false)),
                ),
            },
        });
    }

    props
}

/// The full generated suite, safety first.
pub fn gen_all(model: &InterlockingModel, bound: u32, window: u32) -> Vec<Property> {
    let mut props = gen_safety(model, bound);
    props.extend(gen_availability(model, bound, window));
    props
}

/// Best-effort classification for formulas loaded from a file.
pub fn classify(formula: &Formula) -> PropertyClass {
    match formula {
        Formula::Globally { body, .. } => match body {
            Expr::Atom { lhs, .. } if matches!(lhs.base, StateTerm::Trains(_)) => {
                PropertyClass::TrackCapacity
            }
            Expr::Implies(ante, cons) => {
                let stability = matches!(
                    &**cons,
                    Expr::Atom { lhs, rhs: Operand::Term(rt), .. }
                        if matches!(lhs.base, StateTerm::Point(_)) && rt.next
                );
                if stability && matches!(&**ante, Expr::Atom { .. }) {
                    PropertyClass::PointStability
                } else if has_point_literal(cons) {
                    PropertyClass::PointAlignment
                } else {
                    PropertyClass::Other
                }
            }
            _ => PropertyClass::Other,
        },
        Formula::GloballyFinally { body, .. } => match body {
            Expr::Atom { lhs, .. } => match lhs.base {
                StateTerm::Route(_) => PropertyClass::RouteLiveness,
                StateTerm::Sub(_) | StateTerm::Uir(_) => PropertyClass::ReleaseLiveness,
                _ => PropertyClass::Other,
            },
            _ => PropertyClass::Other,
        },
    }
}

fn has_point_literal(e: &Expr) -> bool {
    match e {
        Expr::Atom { lhs, rhs, .. } => {
            matches!(lhs.base, StateTerm::Point(_)) && matches!(rhs, Operand::Lit(Value::Point(_)))
        }
        Expr::Not(x) => has_point_literal(x),
        Expr::And(a, b) | Expr::Or(a, b) | Expr::Implies(a, b) => {
            has_point_literal(a) || has_point_literal(b)
        }
    }
}

/// Render a property suite as a `.bltl` file: ids as comments, one formula
/// per line.
pub fn render_property_file(props: &[Property]) -> String {
    let mut out = String::new();
    for p in props {
        out.push_str(&format!("# {} [{}]\n{}\n", p.id, p.class, p.formula));
    }
    out
}
