//! Contextual Weisfeiler-Lehman graph kernels for program representation graphs.
//!
//! A program representation graph (PRG) is a directed graph whose nodes carry a
//! label (the security-sensitive operation they perform) and a non-empty set of
//! context strings (the conditions under which the node is reachable, e.g.
//! `user-aware` vs `user-unaware`). This crate implements:
//!
//! * the plain Weisfeiler-Lehman relabeling and kernel (WLK), which captures
//!   neighborhood structure only, and
//! * the contextual variant (CWLK), which prefixes every neighborhood label
//!   with the node's contexts so that structurally identical neighborhoods
//!   reached under different contexts become distinct features,
//!
//! together with explicit bag-of-features vectorization, corpus kernel
//! matrices, a primal linear SVM, a seeded synthetic corpus generator with
//! planted context-dependent motifs, and a small measurement harness.
//!
//! The worked example throughout the tests is a pair of three-node location
//! leak graphs ([`fixtures::geinimi`] and [`fixtures::yahoo_weather`]) that are
//! indistinguishable to WLK but fully separated by CWLK.

pub mod bench;
pub mod classifier;
pub mod fixtures;
pub mod graph;
pub mod kernel;
pub mod pipeline;
pub mod relabel;
pub mod synth;

pub use classifier::{EvalReport, Hyperparams, LinearModel};
pub use graph::{ClassTag, DatasetManifest, LoadOptions, Node, Prg};
pub use kernel::{FeatureVector, KernelMatrix, UnknownPolicy, Vocabulary};
pub use relabel::{LabelCode, LabelDictionary, Mode, RelabelSequence, Relabeler};
pub use synth::SynthConfig;

/// Version tag for the vocabulary/feature-index layout written into model
/// files; bump when the `(iteration, raw string) -> index` assignment rule
/// changes.
pub const VOCAB_FORMAT_VERSION: u32 = 1;
