//! Bundled quotient-graph fixtures: the standard Cayley data of Z and F2,
//! the weighted {1,2,3} generating set of Z, the spur graph realizing
//! l(n) = |n| + 1/2, and the three-edge F2 graph whose conjugate powers
//! obstruct the zero-slack geodesic condition.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ggraph::QuotientGGraph;

pub const BUILTIN_GRAPHS: [&str; 5] =
    ["z_standard", "z_weighted_123", "z_spur", "f2_standard", "f2_three_edge"];

/// JSON text of a bundled graph, by name.
pub fn builtin_graph(name: &str) -> Option<&'static str> {
    match name {
        "z_standard" => Some(include_str!("../fixtures/z_standard.json")),
        "z_weighted_123" => Some(include_str!("../fixtures/z_weighted_123.json")),
        "z_spur" => Some(include_str!("../fixtures/z_spur.json")),
        "f2_standard" => Some(include_str!("../fixtures/f2_standard.json")),
        "f2_three_edge" => Some(include_str!("../fixtures/f2_three_edge.json")),
        _ => None,
    }
}

/// Loads a quotient graph from a builtin name or a filesystem path.
pub fn load_graph(name_or_path: &str) -> Result<Arc<QuotientGGraph>> {
    if let Some(text) = builtin_graph(name_or_path) {
        return QuotientGGraph::from_json(text);
    }
    let text = std::fs::read_to_string(name_or_path).map_err(|e| {
        Error::Usage(format!("cannot read graph {name_or_path:?} (not a builtin name): {e}"))
    })?;
    QuotientGGraph::from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_builtins_load() {
        for name in BUILTIN_GRAPHS {
            let g = load_graph(name).unwrap();
            assert!(!g.edges().is_empty(), "{name} should have edges");
        }
        assert!(builtin_graph("nope").is_none());
    }
}
