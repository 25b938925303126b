//! Shared setup helpers for the criterion benchmarks.

use cwlk_core::synth::{generate_corpus, SynthConfig};
use cwlk_core::{ClassTag, Prg};

/// Desk-scale corpus used across benchmarks.
pub fn bench_corpus(n_per_class: u32, seed: u64) -> Vec<(Prg, ClassTag)> {
    let cfg = SynthConfig { n_per_class, seed, ..SynthConfig::default() };
    let (corpus, _) = generate_corpus(&cfg).expect("bench config is valid");
    corpus
}
