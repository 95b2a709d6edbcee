//! Benchmark inputs shared by the criterion targets.

use numgame_core::fixtures;
use numgame_core::{EGcmGraph, Position};

pub fn fixture(name: &str) -> EGcmGraph {
    fixtures::builtin(name).unwrap_or_else(|| panic!("no fixture {name}"))
}

/// The all-ones position, strongly dominant on any graph.
pub fn ones(g: &EGcmGraph) -> Position {
    Position::ones(g.n())
}
