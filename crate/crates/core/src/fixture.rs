//! The bundled fixture station, embedded so tests and examples can load it
//! without touching the filesystem.

/// Application data for the fixture junction.
pub const STATION_SSI: &str = include_str!("../fixtures/station.ssi");
/// Track layout for the fixture junction.
pub const STATION_XML: &str = include_str!("../fixtures/station.xml");
/// Route declarations (entry signal / exit boundary per route).
pub const STATION_ROUTES: &str = include_str!("../fixtures/station.routes");

use crate::model::{link, parse_route_decls, InterlockingModel};

/// Parse and link the bundled fixture.
pub fn fixture_model() -> InterlockingModel {
    let data = crate::appdata::parse_appdata(STATION_SSI).expect("fixture appdata parses");
    let graph = crate::layout::parse_layout(STATION_XML).expect("fixture layout parses");
    let decls = parse_route_decls(STATION_ROUTES).expect("fixture route declarations parse");
    link(data, graph, &decls).expect("fixture links")
}
