//! Feature vectorization and kernel computation.
//!
//! Both kernels are bags of labels: the height-`h` feature vector of a graph
//! counts, for every iteration `i <= h`, how many nodes carry each raw label
//! at `i` (WL labels in `wl` mode, contextual labels in `contextual` mode).
//! The kernel value of two graphs is the dot product of their vectors, so a
//! corpus kernel matrix is a Gram matrix and positive semi-definite by
//! construction. [`brute_force_kernel`] computes the same quantity by direct
//! pairwise raw-string comparison and serves as the independent oracle for
//! the vectorized path.

use std::collections::HashMap;
use std::io::Write;

use rayon::prelude::*;
use thiserror::Error;

use crate::graph::Prg;
use crate::relabel::{Mode, RelabelSequence, Relabeler};

#[derive(Debug, Error, PartialEq)]
pub enum KernelError {
    #[error("feature ({iteration}, {raw:?}) is absent from the frozen vocabulary")]
    UnknownFeature { iteration: usize, raw: String },
    #[error("feature vectors come from different vocabularies")]
    VocabularyMismatch,
    #[error("sequence {graph_id:?} carries no {mode} labels")]
    ModeUnavailable { graph_id: String, mode: Mode },
}

/// What to do when a graph produces a raw label the frozen vocabulary has
/// never seen (test-time graphs, typically).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnknownPolicy {
    /// Drop the feature. Unknown features cannot match anything anyway.
    #[default]
    Ignore,
    /// Fail with [`KernelError::UnknownFeature`].
    Strict,
}

/// Frozen bijection between `(iteration, raw label)` pairs and feature
/// indices `0..len`, snapshotted from a relabeler's dictionary after a corpus
/// pass. Indices follow first-encounter order.
#[derive(Debug)]
pub struct Vocabulary {
    kind: Mode,
    builder_uid: u64,
    levels: Vec<HashMap<String, u32>>,
    keys: Vec<(u32, String)>,
    hash: u64,
}

impl Vocabulary {
    /// Snapshots every `(iteration, raw)` pair interned so far for `kind`.
    pub fn from_relabeler(relabeler: &Relabeler, kind: Mode) -> Vocabulary {
        let dict = relabeler.dictionary(kind);
        let mut levels: Vec<HashMap<String, u32>> = Vec::new();
        let mut keys = Vec::with_capacity(dict.len());
        for (iteration, raw, code) in dict.iter() {
            if iteration >= levels.len() {
                levels.resize_with(iteration + 1, HashMap::new);
            }
            levels[iteration].insert(raw.to_owned(), code.index() as u32);
            keys.push((iteration as u32, raw.to_owned()));
        }
        let hash = hash_keys(kind, &keys);
        Vocabulary { kind, builder_uid: relabeler.uid(), levels, keys, hash }
    }

    pub fn kind(&self) -> Mode {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn index_of(&self, iteration: usize, raw: &str) -> Option<u32> {
        self.levels.get(iteration)?.get(raw).copied()
    }

    pub fn key(&self, index: u32) -> (usize, &str) {
        let (i, raw) = &self.keys[index as usize];
        (*i as usize, raw)
    }

    /// FNV-1a fingerprint of the full index assignment; equal vocabularies
    /// (same kind, same keys in the same order) share it.
    pub fn hash(&self) -> u64 {
        self.hash
    }

    pub fn hash_hex(&self) -> String {
        format!("{:016x}", self.hash)
    }
}

fn hash_keys(kind: Mode, keys: &[(u32, String)]) -> u64 {
    let mut h = Fnv64::new();
    h.update(&[crate::VOCAB_FORMAT_VERSION as u8, kind as u8]);
    for (i, raw) in keys {
        h.update(&i.to_le_bytes());
        h.update(raw.as_bytes());
        h.update(&[0xff]);
    }
    h.finish()
}

struct Fnv64(u64);

impl Fnv64 {
    fn new() -> Self {
        Fnv64(0xcbf2_9ce4_8422_2325)
    }

    fn update(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }

    fn finish(&self) -> u64 {
        self.0
    }
}

/// Sparse non-negative feature counts of one graph against a frozen
/// vocabulary. When every label is known, the counts sum to
/// `(h + 1) * node_count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureVector {
    pub graph_id: String,
    counts: Vec<(u32, u32)>,
    vocab_hash: u64,
}

impl FeatureVector {
    /// Assembles a vector from already-counted features. `counts` must be
    /// ascending by index with no zero counts.
    pub fn from_counts(
        graph_id: impl Into<String>,
        counts: Vec<(u32, u32)>,
        vocab_hash: u64,
    ) -> FeatureVector {
        debug_assert!(counts.windows(2).all(|w| w[0].0 < w[1].0), "indices must ascend");
        debug_assert!(counts.iter().all(|&(_, c)| c > 0), "counts must be positive");
        FeatureVector { graph_id: graph_id.into(), counts, vocab_hash }
    }

    /// `(feature index, count)` pairs, ascending by index, counts >= 1.
    pub fn counts(&self) -> &[(u32, u32)] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&(_, c)| u64::from(c)).sum()
    }

    pub fn nnz(&self) -> usize {
        self.counts.len()
    }

    pub fn vocab_hash(&self) -> u64 {
        self.vocab_hash
    }
}

/// Counts raw-label occurrences per iteration against `vocab`.
///
/// The sequence must have been produced by a relabeler sharing `relabeler`'s
/// dictionaries. Labels the vocabulary has never seen are handled per
/// `policy`.
pub fn featurize(
    seq: &RelabelSequence,
    relabeler: &Relabeler,
    vocab: &Vocabulary,
    policy: UnknownPolicy,
) -> Result<FeatureVector, KernelError> {
    let codes = seq.codes(vocab.kind()).ok_or_else(|| KernelError::ModeUnavailable {
        graph_id: seq.graph_id.clone(),
        mode: vocab.kind(),
    })?;
    let same_builder = relabeler.uid() == vocab.builder_uid;
    let dict = relabeler.dictionary(vocab.kind());
    let mut acc: HashMap<u32, u32> = HashMap::new();
    for level in codes {
        for &code in level {
            let index = if same_builder {
                // Codes and vocabulary indices coincide for the builder;
                // anything interned after the freeze falls off the end.
                let c = code.index() as u32;
                if (c as usize) < vocab.len() { Some(c) } else { None }
            } else {
                vocab.index_of(dict.iteration_of(code), dict.raw(code))
            };
            match (index, policy) {
                (Some(idx), _) => *acc.entry(idx).or_insert(0) += 1,
                (None, UnknownPolicy::Ignore) => {}
                (None, UnknownPolicy::Strict) => {
                    return Err(KernelError::UnknownFeature {
                        iteration: dict.iteration_of(code),
                        raw: dict.raw(code).to_owned(),
                    });
                }
            }
        }
    }
    let mut counts: Vec<(u32, u32)> = acc.into_iter().collect();
    counts.sort_unstable_by_key(|&(idx, _)| idx);
    Ok(FeatureVector { graph_id: seq.graph_id.clone(), counts, vocab_hash: vocab.hash() })
}

/// Sparse dot product of two feature vectors over the same vocabulary.
pub fn kernel_value(u: &FeatureVector, v: &FeatureVector) -> Result<u64, KernelError> {
    if u.vocab_hash != v.vocab_hash {
        return Err(KernelError::VocabularyMismatch);
    }
    let (mut i, mut j) = (0, 0);
    let mut sum = 0u64;
    while i < u.counts.len() && j < v.counts.len() {
        let (ui, uc) = u.counts[i];
        let (vj, vc) = v.counts[j];
        match ui.cmp(&vj) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                sum += u64::from(uc) * u64::from(vc);
                i += 1;
                j += 1;
            }
        }
    }
    Ok(sum)
}

/// Symmetric matrix of pairwise kernel values over a corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    ids: Vec<String>,
    values: Vec<f64>,
}

impl KernelMatrix {
    pub fn dim(&self) -> usize {
        self.ids.len()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ids.len() + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// CSV form: header row of graph ids, then one row of values per graph.
    pub fn write_csv(&self, mut sink: impl Write) -> std::io::Result<()> {
        writeln!(sink, "{}", self.ids.join(","))?;
        for row in self.values.chunks(self.ids.len()) {
            let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            writeln!(sink, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

/// Relabels a corpus through one shared relabeler, freezes the vocabulary,
/// and featurizes every graph against it.
pub fn featurize_corpus(
    corpus: &[Prg],
    ids: Option<&[String]>,
    h: usize,
    mode: Mode,
) -> (Relabeler, Vocabulary, Vec<FeatureVector>) {
    let mut relabeler = Relabeler::new();
    let seqs: Vec<RelabelSequence> = corpus
        .iter()
        .enumerate()
        .map(|(k, g)| {
            let id = ids.map_or_else(|| format!("g{k:04}"), |ids| ids[k].clone());
            match mode {
                Mode::Wl => relabeler.wl_relabel(g, &id, h),
                Mode::Contextual => relabeler.contextual_relabel(g, &id, h),
            }
        })
        .collect();
    let vocab = Vocabulary::from_relabeler(&relabeler, mode);
    let vectors: Vec<FeatureVector> = seqs
        .par_iter()
        .map(|seq| {
            featurize(seq, &relabeler, &vocab, UnknownPolicy::Strict)
                .expect("corpus vocabulary covers the corpus")
        })
        .collect();
    (relabeler, vocab, vectors)
}

/// Builds the vocabulary in one corpus pass and fills the Gram matrix of
/// pairwise kernel values.
pub fn kernel_matrix(corpus: &[Prg], ids: Option<&[String]>, h: usize, mode: Mode) -> KernelMatrix {
    let (_, _, vectors) = featurize_corpus(corpus, ids, h, mode);
    gram(&vectors)
}

/// Gram matrix of already-featurized vectors.
pub fn gram(vectors: &[FeatureVector]) -> KernelMatrix {
    let k = vectors.len();
    let values: Vec<f64> = (0..k)
        .into_par_iter()
        .flat_map_iter(|i| {
            let vectors = &vectors;
            (0..k).map(move |j| {
                kernel_value(&vectors[i], &vectors[j]).expect("single shared vocabulary") as f64
            })
        })
        .collect();
    let ids = vectors.iter().map(|v| v.graph_id.clone()).collect();
    KernelMatrix { ids, values }
}

/// Independent oracle: counts node pairs `(n, n')` with equal raw labels,
/// summed over iterations `0..=h`, by direct string comparison. Quadratic in
/// the node counts; intended for small graphs.
pub fn brute_force_kernel(g: &Prg, g2: &Prg, h: usize, mode: Mode) -> u64 {
    let mut relabeler = Relabeler::new();
    let (s1, s2) = match mode {
        Mode::Wl => (relabeler.wl_relabel(g, "a", h), relabeler.wl_relabel(g2, "b", h)),
        Mode::Contextual => {
            (relabeler.contextual_relabel(g, "a", h), relabeler.contextual_relabel(g2, "b", h))
        }
    };
    let raw = |seq: &RelabelSequence, i: usize, u: usize| -> &str {
        match mode {
            Mode::Wl => relabeler.raw(mode, seq.wl_code(i, u)),
            Mode::Contextual => relabeler.raw(mode, seq.contextual_code(i, u)),
        }
    };
    let mut pairs = 0u64;
    for i in 0..=h {
        for u in 0..g.node_count() {
            for v in 0..g2.node_count() {
                if raw(&s1, i, u) == raw(&s2, i, v) {
                    pairs += 1;
                }
            }
        }
    }
    pairs
}

/// Sparse text export: one `"graph_id idx:count idx:count ..."` line per
/// vector, indices ascending.
pub fn write_feature_vectors(
    vectors: &[FeatureVector],
    mut sink: impl Write,
) -> std::io::Result<()> {
    for v in vectors {
        write!(sink, "{}", v.graph_id)?;
        for &(idx, count) in v.counts() {
            write!(sink, " {idx}:{count}")?;
        }
        writeln!(sink)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::graph::Node;

    fn fixture_pair() -> Vec<Prg> {
        vec![fixtures::geinimi(), fixtures::yahoo_weather()]
    }

    #[test]
    fn geinimi_contextual_h1_has_six_singleton_features() {
        let corpus = vec![fixtures::geinimi()];
        let (_, _, vectors) = featurize_corpus(&corpus, None, 1, Mode::Contextual);
        let v = &vectors[0];
        assert_eq!(v.nnz(), 6);
        assert!(v.counts().iter().all(|&(_, c)| c == 1));
        assert_eq!(v.total(), 6); // (h + 1) * |N| = 2 * 3
    }

    #[test]
    fn duplicate_labels_accumulate() {
        let g = Prg::new(
            vec![Node::new("n1", "a", ["c"]), Node::new("n2", "a", ["c"])],
            vec![],
            None,
        )
        .unwrap();
        let (_, _, vectors) = featurize_corpus(&[g], None, 0, Mode::Contextual);
        assert_eq!(vectors[0].counts(), &[(0, 2)]);
    }

    #[test]
    fn unknown_features_ignored_or_rejected() {
        // Freeze a vocabulary over geinimi only, then featurize a graph whose
        // labels are all new.
        let mut relabeler = Relabeler::new();
        let gm = fixtures::geinimi();
        relabeler.contextual_relabel(&gm, "train", 1);
        let vocab = Vocabulary::from_relabeler(&relabeler, Mode::Contextual);

        let alien = Prg::new(vec![Node::new("x", "exec", ["boot"])], vec![], None).unwrap();
        let seq = relabeler.contextual_relabel(&alien, "alien", 1);
        let v = featurize(&seq, &relabeler, &vocab, UnknownPolicy::Ignore).unwrap();
        assert_eq!(v.nnz(), 0);
        assert_eq!(v.total(), 0);

        let err = featurize(&seq, &relabeler, &vocab, UnknownPolicy::Strict).unwrap_err();
        assert!(matches!(err, KernelError::UnknownFeature { iteration: 0, .. }));
    }

    #[test]
    fn featurize_through_a_foreign_relabeler_matches_builder_path() {
        let gm = fixtures::geinimi();

        let mut builder = Relabeler::new();
        let seq_b = builder.contextual_relabel(&gm, "g", 1);
        let vocab = Vocabulary::from_relabeler(&builder, Mode::Contextual);
        let via_builder = featurize(&seq_b, &builder, &vocab, UnknownPolicy::Strict).unwrap();

        let mut foreign = Relabeler::new();
        // Interleave another graph first so the foreign code assignment differs.
        foreign.contextual_relabel(&fixtures::yahoo_weather(), "other", 1);
        let seq_f = foreign.contextual_relabel(&gm, "g", 1);
        let via_foreign = featurize(&seq_f, &foreign, &vocab, UnknownPolicy::Strict).unwrap();

        assert_eq!(via_builder, via_foreign);
    }

    #[test]
    fn separation_kernel_values_match_worked_example() {
        let corpus = fixture_pair();
        let (_, _, v) = featurize_corpus(&corpus, None, 1, Mode::Contextual);
        assert_eq!(kernel_value(&v[0], &v[1]).unwrap(), 0);
        assert_eq!(kernel_value(&v[0], &v[0]).unwrap(), 6);

        let (_, _, w) = featurize_corpus(&corpus, None, 1, Mode::Wl);
        assert_eq!(kernel_value(&w[0], &w[1]).unwrap(), 6);
    }

    #[test]
    fn kernel_matrix_on_fixture_pair() {
        let corpus = fixture_pair();
        let m = kernel_matrix(&corpus, None, 1, Mode::Contextual);
        assert_eq!(m.dim(), 2);
        assert_eq!((m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1)), (6.0, 0.0, 0.0, 6.0));

        let m = kernel_matrix(&corpus, None, 1, Mode::Wl);
        assert_eq!((m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1)), (6.0, 6.0, 6.0, 6.0));
    }

    #[test]
    fn single_graph_matrix_is_sum_of_squared_counts() {
        let corpus = vec![fixtures::geinimi()];
        let (_, _, v) = featurize_corpus(&corpus, None, 2, Mode::Contextual);
        let expected: u64 = v[0].counts().iter().map(|&(_, c)| u64::from(c) * u64::from(c)).sum();
        let m = kernel_matrix(&corpus, None, 2, Mode::Contextual);
        assert_eq!(m.get(0, 0), expected as f64);
    }

    #[test]
    fn brute_force_agrees_on_fixtures_and_tiny_cases() {
        let gm = fixtures::geinimi();
        let gb = fixtures::yahoo_weather();
        assert_eq!(brute_force_kernel(&gm, &gb, 1, Mode::Contextual), 0);
        assert_eq!(brute_force_kernel(&gm, &gb, 1, Mode::Wl), 6);
        for h in 0..=3 {
            let m = kernel_matrix(&[gm.clone(), gb.clone()], None, h, Mode::Contextual);
            assert_eq!(brute_force_kernel(&gm, &gm, h, Mode::Contextual), m.get(0, 0) as u64);
        }

        let a = Prg::new(vec![Node::new("n", "a", ["c1"])], vec![], None).unwrap();
        let b = Prg::new(vec![Node::new("n", "a", ["c2"])], vec![], None).unwrap();
        assert_eq!(brute_force_kernel(&a, &b, 0, Mode::Wl), 1);
        assert_eq!(brute_force_kernel(&a, &b, 0, Mode::Contextual), 0);
    }

    #[test]
    fn vocabulary_mismatch_is_rejected() {
        let (_, _, u) = featurize_corpus(&[fixtures::geinimi()], None, 1, Mode::Contextual);
        let (_, _, v) = featurize_corpus(&[fixtures::geinimi()], None, 2, Mode::Contextual);
        assert_eq!(kernel_value(&u[0], &v[0]), Err(KernelError::VocabularyMismatch));
    }

    #[test]
    fn exports_have_documented_shapes() {
        let corpus = fixture_pair();
        let ids = vec!["geinimi".to_owned(), "yahoo".to_owned()];
        let m = kernel_matrix(&corpus, Some(&ids), 1, Mode::Wl);
        let mut csv = Vec::new();
        m.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(text, "geinimi,yahoo\n6,6\n6,6\n");

        let (_, _, v) = featurize_corpus(&corpus, Some(&ids), 0, Mode::Contextual);
        let mut out = Vec::new();
        write_feature_vectors(&v, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text, "geinimi 0:1 1:1 2:1\nyahoo 3:1 4:1 5:1\n");
    }
}
