//! Shared helpers for the benchmarks.

use std::path::PathBuf;

use ethkb_core::pipeline::Bundle;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn bundle(name: &str) -> Bundle {
    Bundle::load(fixtures().join("bundles").join(name)).expect("fixture bundle loads")
}

pub fn kb_json(name: &str) -> String {
    std::fs::read_to_string(fixtures().join("kb").join(format!("{name}.json")))
        .expect("fixture tree readable")
}
