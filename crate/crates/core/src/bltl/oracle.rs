//! Reference semantics: direct evaluation of a formula over a whole
//! recorded trace, written from the quantifier definitions rather than
//! incrementally. The monitor must agree with this on every input.

use super::ast::Formula;
use super::monitor::{compile_formula, eval_expr, CompiledFormula, Verdict};
use crate::model::ComponentIndex;
use crate::state::StateRecord;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TraceError {
    #[error("trace ends before the bound with the verdict still pending")]
    TooShort,
    #[error(transparent)]
    Compile(#[from] super::monitor::MonitorError),
}

/// Evaluate a compiled formula over a complete trace.
pub fn evaluate_compiled(f: &CompiledFormula, trace: &[StateRecord]) -> Result<Verdict, TraceError> {
    match f {
        CompiledFormula::Globally { bound, body, .. } => {
            for (i, rec) in trace.iter().enumerate() {
                if rec.nb > *bound {
                    return Ok(Verdict::Holds);
                }
                if !eval_expr(body, rec, trace.get(i + 1)) {
                    return Ok(Verdict::Violated { at: i });
                }
            }
            Err(TraceError::TooShort)
        }
        CompiledFormula::GloballyFinally { bound, window, body } => {
            let sat: Vec<bool> = trace.iter().map(|r| eval_expr(body, r, None)).collect();
            // Evaluation stops at the first record past the bound.
            let end = trace
                .iter()
                .position(|r| r.nb > *bound)
                .map(|b| b + 1)
                .unwrap_or(trace.len());

            // Every record inside the bound opens an obligation: some
            // strictly later record must satisfy the body before nb
            // exceeds the opening nb plus the window.
            let mut first_violation: Option<usize> = None;
            for i in 0..end {
                if trace[i].nb > *bound {
                    break;
                }
                let deadline = trace[i].nb.saturating_add(*window);
                let crossing = (i + 1..trace.len()).find(|&j| trace[j].nb > deadline);
                let horizon = crossing.unwrap_or(trace.len());
                let closed = (i + 1..horizon).any(|j| sat[j]);
                if closed {
                    continue;
                }
                match crossing {
                    Some(k) if k < end => {
                        first_violation = Some(first_violation.map_or(k, |v| v.min(k)));
                    }
                    // Deadline never crossed inside the evaluated prefix:
                    // the obligation is discharged at the bound, or the
                    // trace is simply too short to decide it.
                    _ => {
                        if end == trace.len() {
                            return match first_violation {
                                Some(k) => Ok(Verdict::Violated { at: k }),
                                None => Err(TraceError::TooShort),
                            };
                        }
                    }
                }
            }
            match first_violation {
                Some(k) => Ok(Verdict::Violated { at: k }),
                None if end < trace.len() || trace.last().is_some_and(|r| r.nb > *bound) => {
                    Ok(Verdict::Holds)
                }
                None => Err(TraceError::TooShort),
            }
        }
    }
}

/// Evaluate a named formula over a trace, resolving components against the
/// given index.
pub fn evaluate_trace(
    formula: &Formula,
    index: &ComponentIndex,
    trace: &[StateRecord],
) -> Result<Verdict, TraceError> {
    let compiled = compile_formula(formula, index)?;
    evaluate_compiled(&compiled, trace)
}
