//! The two location-leak fixture graphs used as golden examples.
//!
//! Both graphs share the same shape: `getLatitude` and `getLongitude` both
//! flow into `writeBytes`. They differ only in context — the malicious one
//! leaks in `user-unaware` context, the benign one in `user-aware` context —
//! which is exactly the distinction WLK misses and CWLK captures.

use crate::graph::{LoadOptions, Prg};

/// Malicious variant: every node reachable only in `user-unaware` context.
pub const GEINIMI_JSON: &str = r#"{
  "nodes": [
    {"id": "n1", "label": "getLatitude", "contexts": ["user-unaware"]},
    {"id": "n2", "label": "getLongitude", "contexts": ["user-unaware"]},
    {"id": "n3", "label": "writeBytes", "contexts": ["user-unaware"]}
  ],
  "edges": [["n1", "n3"], ["n2", "n3"]],
  "class": "malicious"
}"#;

/// Benign variant: same structure, `user-aware` context throughout.
pub const YAHOO_WEATHER_JSON: &str = r#"{
  "nodes": [
    {"id": "n1", "label": "getLatitude", "contexts": ["user-aware"]},
    {"id": "n2", "label": "getLongitude", "contexts": ["user-aware"]},
    {"id": "n3", "label": "writeBytes", "contexts": ["user-aware"]}
  ],
  "edges": [["n1", "n3"], ["n2", "n3"]],
  "class": "benign"
}"#;

pub fn geinimi() -> Prg {
    Prg::load(GEINIMI_JSON.as_bytes(), &LoadOptions::default()).expect("geinimi fixture is valid")
}

pub fn yahoo_weather() -> Prg {
    Prg::load(YAHOO_WEATHER_JSON.as_bytes(), &LoadOptions::default())
        .expect("yahoo weather fixture is valid")
}
