//! SSI-dialect application data: the station-specific rules executed by the
//! interlocking. The dialect covers route request blocks, point command
//! rules, release lines and grouped `*sub_free_` release blocks.

mod ast;
mod parse;
mod print;
mod validate;

pub use ast::{
    Act, Action, ApplicationData, Condition, PointCommandRule, ReleaseRule, RouteRequestRule,
    Test,
};
pub use parse::{parse_appdata, AppDataError};
pub use print::pretty_print;
pub use validate::{validate_appdata, Issue};
