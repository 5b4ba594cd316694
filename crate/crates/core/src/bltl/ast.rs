use crate::ids::PointPos;
use serde::{Deserialize, Serialize};
use std::fmt;

/// A state observation: the number of trains on a track, a point position,
/// a route's set state, or a subroute/zone lock state.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StateTerm {
    Trains(String),
    Point(String),
    Route(String),
    Sub(String),
    Uir(String),
}

impl StateTerm {
    pub fn keyword(&self) -> &'static str {
        match self {
            StateTerm::Trains(_) => "trains",
            StateTerm::Point(_) => "point",
            StateTerm::Route(_) => "route",
            StateTerm::Sub(_) => "sub",
            StateTerm::Uir(_) => "uir",
        }
    }

    pub fn name(&self) -> &str {
        match self {
            StateTerm::Trains(n)
            | StateTerm::Point(n)
            | StateTerm::Route(n)
            | StateTerm::Sub(n)
            | StateTerm::Uir(n) => n,
        }
    }
}

/// A term, optionally shifted one record forward with `next(...)`.
/// `next` nests at most once.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Term {
    pub base: StateTerm,
    pub next: bool,
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.next {
            write!(f, "next({}({}))", self.base.keyword(), self.base.name())
        } else {
            write!(f, "{}({})", self.base.keyword(), self.base.name())
        }
    }
}

/// A comparison value literal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Value {
    Int(i64),
    Point(PointPos),
    /// true = set
    Route(bool),
    /// true = locked
    Lock(bool),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Point(p) => f.write_str(p.as_side()),
            Value::Route(true) => f.write_str("set"),
            Value::Route(false) => f.write_str("unset"),
            Value::Lock(true) => f.write_str("locked"),
            Value::Lock(false) => f.write_str("free"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Cmp {
    Eq,
    Ne,
    Le,
    Lt,
    Ge,
    Gt,
}

impl Cmp {
    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Eq => "==",
            Cmp::Ne => "!=",
            Cmp::Le => "<=",
            Cmp::Lt => "<",
            Cmp::Ge => ">=",
            Cmp::Gt => ">",
        }
    }

    pub fn ordered(self) -> bool {
        !matches!(self, Cmp::Eq | Cmp::Ne)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Operand {
    Term(Term),
    Lit(Value),
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Term(t) => t.fmt(f),
            Operand::Lit(v) => v.fmt(f),
        }
    }
}

/// A boolean state predicate over one record (and, through `next`, its
/// successor).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Expr {
    Atom { lhs: Term, cmp: Cmp, rhs: Operand },
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Implies(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn has_next(&self) -> bool {
        match self {
            Expr::Atom { lhs, rhs, .. } => {
                lhs.next || matches!(rhs, Operand::Term(t) if t.next)
            }
            Expr::Not(e) => e.has_next(),
            Expr::And(a, b) | Expr::Or(a, b) | Expr::Implies(a, b) => {
                a.has_next() || b.has_next()
            }
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, parent: u8) -> fmt::Result {
        // Precedence: atoms 4, ! 3, && 2, || 1, => 0.
        let prec = match self {
            Expr::Atom { .. } => 4,
            Expr::Not(_) => 3,
            Expr::And(..) => 2,
            Expr::Or(..) => 1,
            Expr::Implies(..) => 0,
        };
        let needs_parens = prec < parent || matches!(self, Expr::Implies(..));
        if needs_parens {
            f.write_str("(")?;
        }
        match self {
            Expr::Atom { lhs, cmp, rhs } => write!(f, "{lhs} {} {rhs}", cmp.symbol())?,
            Expr::Not(e) => {
                f.write_str("!")?;
                e.fmt_prec(f, 3)?;
            }
            Expr::And(a, b) => {
                a.fmt_prec(f, 2)?;
                f.write_str(" && ")?;
                b.fmt_prec(f, 2)?;
            }
            Expr::Or(a, b) => {
                a.fmt_prec(f, 1)?;
                f.write_str(" || ")?;
                b.fmt_prec(f, 1)?;
            }
            Expr::Implies(a, b) => {
                a.fmt_prec(f, 1)?;
                f.write_str(" => ")?;
                b.fmt_prec(f, 0)?;
            }
        }
        if needs_parens {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

/// A bounded temporal formula. Bounds are counted in the `nb` unit: the
/// number of trains that have moved so far.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Formula {
    /// `G[n] expr` — expr holds at every record while nb <= n.
    Globally { bound: u32, body: Expr },
    /// `GF[n,k] expr` — from every record while nb <= n, some strictly
    /// later record satisfies expr before nb exceeds that record's nb + k.
    GloballyFinally { bound: u32, window: u32, body: Expr },
}

impl Formula {
    pub fn bound(&self) -> u32 {
        match self {
            Formula::Globally { bound, .. } | Formula::GloballyFinally { bound, .. } => *bound,
        }
    }

    pub fn body(&self) -> &Expr {
        match self {
            Formula::Globally { body, .. } | Formula::GloballyFinally { body, .. } => body,
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Globally { bound, body } => write!(f, "G[{bound}] {body}"),
            Formula::GloballyFinally { bound, window, body } => {
                write!(f, "GF[{bound},{window}] {body}")
            }
        }
    }
}
