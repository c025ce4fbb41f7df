//! Embedded example models: the confounder triangle, the twin-network
//! breakdown graph, the two adjustment examples, and the small
//! out-of-distribution surrogate. Each ships with its canonical intervention.

use crate::scm::{parse_model, ProbabilisticSCM};
use crate::world::Intervention;

/// Names of the embedded fixtures, in presentation order.
pub const FIXTURE_NAMES: [&str; 5] = ["fig1", "fig2", "fig3", "fig4", "fig5"];

/// Raw model-file text of an embedded fixture.
pub fn fixture_source(name: &str) -> Option<&'static str> {
    match name {
        "fig1" => Some(include_str!("fixtures/fig1.json")),
        "fig2" => Some(include_str!("fixtures/fig2.json")),
        "fig3" => Some(include_str!("fixtures/fig3.json")),
        "fig4" => Some(include_str!("fixtures/fig4.json")),
        "fig5" => Some(include_str!("fixtures/fig5.json")),
        _ => None,
    }
}

/// Parse an embedded fixture. Panics only if the embedded file is corrupt,
/// which the test suite rules out.
pub fn fixture(name: &str) -> Option<ProbabilisticSCM> {
    fixture_source(name).map(|src| parse_model(src).expect("embedded fixture is valid"))
}

/// The intervention each fixture's scenarios are stated against.
pub fn canonical_intervention(name: &str) -> Option<Intervention> {
    match name {
        "fig1" => Some(Intervention::new("X", "1")),
        "fig2" => Some(Intervention::new("A", "1")),
        "fig3" => Some(Intervention::new("X", "1")),
        "fig4" => Some(Intervention::new("X", "1")),
        "fig5" => Some(Intervention::new("X", "1")),
        _ => None,
    }
}
