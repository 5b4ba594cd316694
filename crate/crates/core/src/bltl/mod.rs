//! Bounded LTL over simulation traces: formula AST, parser, incremental
//! three-valued monitor and a whole-trace reference evaluator.
//!
//! Bounds count in the `nb` unit (trains that have moved so far): a record
//! with `nb` equal to the bound is still inside it, and the first record
//! past the bound decides every pending monitor.

mod ast;
mod monitor;
mod oracle;
mod parse;

pub use ast::{Cmp, Expr, Formula, Operand, StateTerm, Term, Value};
pub use monitor::{
    compile_formula, eval_expr, CompiledFormula, Monitor, MonitorError, PropertyError, TraceEnd,
    Verdict,
};
pub use oracle::{evaluate_compiled, evaluate_trace, TraceError};
pub use parse::{parse_formula, parse_property_file, BltlError};
