//! Simulation-based verification of railway interlocking application data.
//!
//! The crate parses SSI-dialect application data and a railML-flavoured
//! track layout, links them into an executable interlocking model, runs a
//! discrete-event simulation of randomized train traffic over it, monitors
//! bounded-LTL safety and availability properties on the resulting traces,
//! and estimates violation probabilities with Monte Carlo sampling and
//! fixed-level importance splitting.

pub mod appdata;
pub mod bltl;
pub mod fixture;
pub mod ids;
pub mod layout;
pub mod model;
pub mod mutate;
pub mod propgen;
pub mod sim;
pub mod smc;
pub mod state;

pub use ids::{ComponentId, Kind};
pub use model::InterlockingModel;
