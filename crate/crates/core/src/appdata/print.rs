use super::ast::{ApplicationData, Test};
use crate::ids::{Kind, PointPos};
use std::fmt::Write;

/// Render application data back to the SSI dialect. Reparsing the output
/// yields a structurally equal AST.
pub fn pretty_print(data: &ApplicationData) -> String {
    let mut out = String::new();

    for rule in data.route_requests.values() {
        let inner = rule.route.name.strip_prefix("R_").unwrap_or(&rule.route.name);
        writeln!(out, "*Q_R({inner})").unwrap();
        let conds: Vec<String> = rule.conditions.iter().map(|c| c.to_string()).collect();
        writeln!(out, "    if   {}", conds.join(", ")).unwrap();
        let acts: Vec<String> = rule.actions.iter().map(|a| a.to_string()).collect();
        writeln!(out, "    then {}", acts.join(", ")).unwrap();
    }
    if !data.route_requests.is_empty() {
        out.push('\n');
    }

    for rule in data.point_commands.values() {
        let suffix = match rule.position {
            PointPos::Normal => "N",
            PointPos::Reverse => "R",
        };
        let conds: Vec<String> = rule.conditions.iter().map(|c| c.to_string()).collect();
        writeln!(out, "*{}{suffix} {}", rule.point.name, conds.join(", ")).unwrap();
    }
    if !data.point_commands.is_empty() {
        out.push('\n');
    }

    for rule in data.releases.values().filter(|r| r.target.kind == Kind::Subroute) {
        let conds: Vec<String> = rule.conditions.iter().map(|c| c.to_string()).collect();
        writeln!(out, "{} f if {}", rule.target.name, conds.join(", ")).unwrap();
    }

    for rule in data.releases.values().filter(|r| r.target.kind == Kind::Uir) {
        // A zone release whose conditions are all `subroute f` prints as the
        // *sub_free_ block it was written as; anything else (e.g. a mutant
        // with an injected condition) falls back to a plain release line.
        let all_sub_free = rule
            .conditions
            .iter()
            .all(|c| c.test == Test::CompFree && c.subject.kind == Kind::Subroute);
        let conds: Vec<String> = rule.conditions.iter().map(|c| c.to_string()).collect();
        let id = rule
            .target
            .name
            .strip_prefix("U_IR(")
            .and_then(|s| s.strip_suffix(')'));
        match (all_sub_free, id) {
            (true, Some(id)) => {
                writeln!(out, "*sub_free_{id} {}", conds.join(", ")).unwrap()
            }
            _ => writeln!(out, "{} f if {}", rule.target.name, conds.join(", ")).unwrap(),
        }
    }

    out
}
