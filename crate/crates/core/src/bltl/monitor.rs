//! Incremental three-valued evaluation of one formula over a record
//! stream. The verdict moves from pending to holds or violated exactly
//! once and never changes afterwards.

use super::ast::{Cmp, Expr, Formula, Operand, StateTerm, Term, Value};
use super::parse::BltlError;
use crate::ids::{Kind, PointPos};
use crate::model::ComponentIndex;
use crate::state::StateRecord;
use std::collections::VecDeque;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MonitorError {
    #[error("monitor already reached a final verdict")]
    Finished,
    #[error("unknown {0} {1}")]
    UnknownComponent(Kind, String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pending,
    Holds,
    Violated { at: usize },
}

impl Verdict {
    pub fn is_final(self) -> bool {
        !matches!(self, Verdict::Pending)
    }
}

/// An expression with component names resolved to state-vector indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CExpr {
    Atom { lhs: CTerm, cmp: Cmp, rhs: CRhs },
    Not(Box<CExpr>),
    And(Box<CExpr>, Box<CExpr>),
    Or(Box<CExpr>, Box<CExpr>),
    Implies(Box<CExpr>, Box<CExpr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CTerm {
    pub kind: CTermKind,
    pub idx: u16,
    pub next: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CTermKind {
    Trains,
    Point,
    Route,
    Sub,
    Uir,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CRhs {
    Term(CTerm),
    Lit(Value),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CompiledFormula {
    Globally { bound: u32, body: CExpr, has_next: bool },
    GloballyFinally { bound: u32, window: u32, body: CExpr },
}

fn compile_term(t: &Term, ix: &ComponentIndex) -> Result<CTerm, MonitorError> {
    let (kind, idx) = match &t.base {
        StateTerm::Trains(n) => (
            CTermKind::Trains,
            ix.track(n).ok_or_else(|| MonitorError::UnknownComponent(Kind::Track, n.clone()))?,
        ),
        StateTerm::Point(n) => (
            CTermKind::Point,
            ix.point(n).ok_or_else(|| MonitorError::UnknownComponent(Kind::Point, n.clone()))?,
        ),
        StateTerm::Route(n) => (
            CTermKind::Route,
            ix.route(n).ok_or_else(|| MonitorError::UnknownComponent(Kind::Route, n.clone()))?,
        ),
        StateTerm::Sub(n) => (
            CTermKind::Sub,
            ix.sub(n).ok_or_else(|| MonitorError::UnknownComponent(Kind::Subroute, n.clone()))?,
        ),
        StateTerm::Uir(n) => (
            CTermKind::Uir,
            ix.uir(n).ok_or_else(|| MonitorError::UnknownComponent(Kind::Uir, n.clone()))?,
        ),
    };
    Ok(CTerm { kind, idx, next: t.next })
}

fn compile_expr(e: &Expr, ix: &ComponentIndex) -> Result<CExpr, MonitorError> {
    Ok(match e {
        Expr::Atom { lhs, cmp, rhs } => CExpr::Atom {
            lhs: compile_term(lhs, ix)?,
            cmp: *cmp,
            rhs: match rhs {
                Operand::Term(t) => CRhs::Term(compile_term(t, ix)?),
                Operand::Lit(v) => CRhs::Lit(*v),
            },
        },
        Expr::Not(x) => CExpr::Not(Box::new(compile_expr(x, ix)?)),
        Expr::And(a, b) => CExpr::And(
            Box::new(compile_expr(a, ix)?),
            Box::new(compile_expr(b, ix)?),
        ),
        Expr::Or(a, b) => CExpr::Or(
            Box::new(compile_expr(a, ix)?),
            Box::new(compile_expr(b, ix)?),
        ),
        Expr::Implies(a, b) => CExpr::Implies(
            Box::new(compile_expr(a, ix)?),
            Box::new(compile_expr(b, ix)?),
        ),
    })
}

/// Resolve a formula's component names against a model's index.
pub fn compile_formula(f: &Formula, ix: &ComponentIndex) -> Result<CompiledFormula, MonitorError> {
    Ok(match f {
        Formula::Globally { bound, body } => CompiledFormula::Globally {
            bound: *bound,
            has_next: body.has_next(),
            body: compile_expr(body, ix)?,
        },
        Formula::GloballyFinally { bound, window, body } => CompiledFormula::GloballyFinally {
            bound: *bound,
            window: *window,
            body: compile_expr(body, ix)?,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TermValue {
    Int(i64),
    Point(PointPos),
    Flag(bool),
}

fn term_value(t: &CTerm, rec: &StateRecord) -> TermValue {
    let i = t.idx as usize;
    match t.kind {
        CTermKind::Trains => TermValue::Int(rec.states.track_occ[i] as i64),
        CTermKind::Point => TermValue::Point(rec.states.points[i]),
        CTermKind::Route => TermValue::Flag(rec.states.routes[i]),
        CTermKind::Sub => TermValue::Flag(rec.states.subs[i]),
        CTermKind::Uir => TermValue::Flag(rec.states.uirs[i]),
    }
}

fn lit_value(v: Value) -> TermValue {
    match v {
        Value::Int(n) => TermValue::Int(n),
        Value::Point(p) => TermValue::Point(p),
        Value::Route(set) => TermValue::Flag(set),
        Value::Lock(locked) => TermValue::Flag(locked),
    }
}

/// Evaluate an expression over a record and its successor. An atom that
/// needs the successor is vacuously true when none exists (the last record
/// of a trace has nothing to contradict it).
pub fn eval_expr(e: &CExpr, cur: &StateRecord, next: Option<&StateRecord>) -> bool {
    match e {
        CExpr::Atom { lhs, cmp, rhs } => {
            let pick = |t: &CTerm| -> Option<TermValue> {
                if t.next {
                    next.map(|r| term_value(t, r))
                } else {
                    Some(term_value(t, cur))
                }
            };
            let Some(l) = pick(lhs) else { return true };
            let r = match rhs {
                CRhs::Term(t) => match pick(t) {
                    Some(v) => v,
                    None => return true,
                },
                CRhs::Lit(v) => lit_value(*v),
            };
            match (l, r) {
                (TermValue::Int(a), TermValue::Int(b)) => match cmp {
                    Cmp::Eq => a == b,
                    Cmp::Ne => a != b,
                    Cmp::Le => a <= b,
                    Cmp::Lt => a < b,
                    Cmp::Ge => a >= b,
                    Cmp::Gt => a > b,
                },
                (a, b) => match cmp {
                    Cmp::Eq => a == b,
                    Cmp::Ne => a != b,
                    _ => unreachable!("parser rejects ordered comparisons on non-counts"),
                },
            }
        }
        CExpr::Not(x) => !eval_expr(x, cur, next),
        CExpr::And(a, b) => eval_expr(a, cur, next) && eval_expr(b, cur, next),
        CExpr::Or(a, b) => eval_expr(a, cur, next) || eval_expr(b, cur, next),
        CExpr::Implies(a, b) => !eval_expr(a, cur, next) || eval_expr(b, cur, next),
    }
}

/// Why a trace stopped, for resolving still-pending verdicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceEnd {
    /// The bound was crossed; monitors have already finalized themselves.
    BoundReached,
    /// The run was cut off without crossing the bound (deadlocked traffic).
    Stalled,
}

#[derive(Debug, Clone)]
enum MonitorState {
    Globally {
        /// Buffered previous record, for next-term lookahead.
        prev: Option<(StateRecord, usize)>,
        /// Cached value of body(x, x), valid while records repeat unchanged.
        self_val: Option<bool>,
    },
    GloballyFinally {
        /// Open obligations as (nb, record index), deduplicated by nb.
        open: VecDeque<(u32, usize)>,
        last_body: bool,
    },
}

/// Incremental monitor for one compiled formula.
#[derive(Debug, Clone)]
pub struct Monitor {
    pub formula: CompiledFormula,
    verdict: Verdict,
    count: usize,
    state: MonitorState,
}

impl Monitor {
    pub fn new(formula: CompiledFormula) -> Monitor {
        let state = match &formula {
            CompiledFormula::Globally { .. } => {
                MonitorState::Globally { prev: None, self_val: None }
            }
            CompiledFormula::GloballyFinally { .. } => MonitorState::GloballyFinally {
                open: VecDeque::new(),
                last_body: false,
            },
        };
        Monitor { formula, verdict: Verdict::Pending, count: 0, state }
    }

    pub fn verdict(&self) -> Verdict {
        self.verdict
    }

    /// Feed the next record. Returns the (possibly fresh) verdict.
    pub fn step(&mut self, rec: &StateRecord) -> Result<Verdict, MonitorError> {
        if self.verdict.is_final() {
            return Err(MonitorError::Finished);
        }
        let idx = self.count;
        self.count += 1;

        match (&self.formula, &mut self.state) {
            (
                CompiledFormula::Globally { bound, body, has_next },
                MonitorState::Globally { prev, self_val },
            ) => {
                if !*has_next {
                    if rec.nb > *bound {
                        self.verdict = Verdict::Holds;
                    } else if rec.changed || idx == 0 {
                        if !eval_expr(body, rec, None) {
                            self.verdict = Verdict::Violated { at: idx };
                        }
                    }
                    // Unchanged record: same atoms as the previous one,
                    // which already passed.
                } else {
                    if let Some((p, p_idx)) = prev.take() {
                        let ok = if !rec.changed {
                            // rec equals p in every observable field, so
                            // body(p, rec) = body(p, p); cache that value.
                            *self_val
                                .get_or_insert_with(|| eval_expr(body, &p, Some(&p)))
                        } else {
                            *self_val = None;
                            eval_expr(body, &p, Some(rec))
                        };
                        if !ok {
                            self.verdict = Verdict::Violated { at: p_idx };
                            return Ok(self.verdict);
                        }
                    }
                    if rec.nb > *bound {
                        self.verdict = Verdict::Holds;
                    } else {
                        *prev = Some((rec.clone(), idx));
                    }
                }
            }
            (
                CompiledFormula::GloballyFinally { bound, window, body },
                MonitorState::GloballyFinally { open, last_body },
            ) => {
                // Deadlines first: a satisfying record that arrives after
                // nb passed an obligation's deadline is too late.
                if let Some(&(m, _)) = open.front() {
                    if rec.nb > m.saturating_add(*window) {
                        self.verdict = Verdict::Violated { at: idx };
                        return Ok(self.verdict);
                    }
                }
                let sat = if rec.changed || idx == 0 {
                    eval_expr(body, rec, None)
                } else {
                    *last_body
                };
                *last_body = sat;
                if sat {
                    // Closes every obligation from strictly earlier records.
                    open.clear();
                }
                if rec.nb > *bound {
                    // Remaining obligations are inside their deadlines and
                    // the bound is done: discharge them.
                    self.verdict = Verdict::Holds;
                } else if open.back().map(|&(m, _)| m) != Some(rec.nb) {
                    open.push_back((rec.nb, idx));
                }
            }
        }
        Ok(self.verdict)
    }

    /// The trace ended without the monitor reaching a final verdict on its
    /// own. For formulas with next-terms the buffered last record still
    /// needs evaluating (its next-atoms are vacuously true). The verdict
    /// may remain pending when the bound was never crossed.
    pub fn finish(&mut self) -> Verdict {
        if self.verdict.is_final() {
            return self.verdict;
        }
        if let (
            CompiledFormula::Globally { has_next: true, body, bound },
            MonitorState::Globally { prev, .. },
        ) = (&self.formula, &mut self.state)
        {
            if let Some((p, p_idx)) = prev.take() {
                if p.nb <= *bound && !eval_expr(body, &p, None) {
                    self.verdict = Verdict::Violated { at: p_idx };
                }
            }
        }
        self.verdict
    }

    /// Map a still-pending verdict at the end of a truncated run to a
    /// final one. Safety (G) saw no violation in the covered prefix and
    /// counts as holding. An availability (GF) formula whose body was
    /// false when traffic froze can never close its open obligations, so
    /// it is violated; frozen in a satisfying state it holds.
    pub fn resolve_stalled(&self) -> Verdict {
        match self.verdict {
            v if v.is_final() => v,
            _ => match (&self.formula, &self.state) {
                (CompiledFormula::Globally { .. }, _) => Verdict::Holds,
                (
                    CompiledFormula::GloballyFinally { .. },
                    MonitorState::GloballyFinally { open, last_body },
                ) => {
                    if *last_body || open.is_empty() {
                        Verdict::Holds
                    } else {
                        Verdict::Violated { at: self.count.saturating_sub(1) }
                    }
                }
            },
        }
    }
}

/// Convenience: parse-and-compile errors share one type in callers.
#[derive(Debug, Error)]
pub enum PropertyError {
    #[error(transparent)]
    Parse(#[from] BltlError),
    #[error(transparent)]
    Compile(#[from] MonitorError),
}
