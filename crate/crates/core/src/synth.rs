//! Seeded synthetic PRG corpora with planted context-dependent motifs.
//!
//! Each corpus is built from twin pairs: for pair `k`, the malicious and the
//! benign graph are generated from the same derived seed and the same draw
//! sequence, so they are identical — node ids, labels, edges, background
//! contexts, noise flips — except for the contexts of the planted motif
//! nodes (`user-unaware` in the malicious twin, `user-aware` in the benign
//! one). Label and structure distributions therefore match across classes
//! exactly, and only contexts separate them: a context-blind kernel sees two
//! indistinguishable classes, while the contextual kernel sees a planted
//! signal.
//!
//! The background is a seeded directed Erdős–Rényi-style graph: uniform
//! labels, uniform single contexts, `edge_factor * n` distinct edges. The
//! motif is injected by relabeling a seeded-random simple path, preferring
//! nodes without outgoing edges so the motif neighborhood stays clean, and
//! adding the chain edges that are missing.

use std::io;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{ClassTag, DatasetManifest, ManifestEntry, Node, Prg};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SynthError {
    #[error("invalid generator config: {0}")]
    Config(String),
    #[error("graph has {actual} node(s) but the motif needs {needed}")]
    GraphTooSmall { needed: usize, actual: usize },
}

/// Generator parameters. Defaults produce the desk-scale planted-context
/// corpus: 300 graphs per class of 50-150 nodes at edge factor 2.1, a
/// two-node location-leak motif, and 5% context noise on background nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_per_class: u32,
    /// Inclusive `[min, max]` node count range.
    pub node_count_range: [u32; 2],
    /// Edges per node; the generator targets `round(edge_factor * n)` edges.
    pub edge_factor: f64,
    pub label_alphabet: Vec<String>,
    /// `[benign motif context, malicious motif context, ...]`; background
    /// nodes draw uniformly from the whole list.
    pub context_alphabet: Vec<String>,
    /// Label path planted into every graph.
    pub motif: Vec<String>,
    /// Probability that a background node's context is re-drawn.
    pub noise_context_flip_prob: f64,
    /// Train fraction written into the emitted manifest.
    pub train_fraction: f64,
    pub name: String,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 42,
            n_per_class: 300,
            node_count_range: [50, 150],
            edge_factor: 2.1,
            label_alphabet: default_label_alphabet(),
            context_alphabet: vec!["user-aware".into(), "user-unaware".into()],
            motif: vec!["getLatitude".into(), "writeBytes".into()],
            noise_context_flip_prob: 0.05,
            train_fraction: 2.0 / 3.0,
            name: "planted-context".into(),
        }
    }
}

fn default_label_alphabet() -> Vec<String> {
    [
        "getLatitude",
        "getLongitude",
        "writeBytes",
        "getDeviceId",
        "getSubscriberId",
        "getSimSerialNumber",
        "getLine1Number",
        "sendTextMessage",
        "getInstalledPackages",
        "openConnection",
        "getOutputStream",
        "getInputStream",
        "exec",
        "loadLibrary",
        "getAccounts",
        "query",
        "insert",
        "getLastKnownLocation",
        "requestLocationUpdates",
        "getCellLocation",
        "getConnectionInfo",
        "getMacAddress",
        "read",
        "write",
        "createSocket",
        "connect",
        "sendBroadcast",
        "startService",
        "registerReceiver",
        "getRunningTasks",
    ]
    .into_iter()
    .map(String::from)
    .collect()
}

impl SynthConfig {
    /// Node counts matching the call-graph scale statistics (mean 1556,
    /// std 998) instead of the desk-scale defaults. Benchmarking only.
    pub fn paper_scale(mut self) -> Self {
        self.node_count_range = [558, 2554];
        self
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let err = |msg: String| Err(SynthError::Config(msg));
        if self.n_per_class == 0 {
            return err("n_per_class must be at least 1".into());
        }
        let [min, max] = self.node_count_range;
        if min > max {
            return err(format!("node_count_range [{min}, {max}] is reversed"));
        }
        if (min as usize) < self.motif.len() {
            return err(format!(
                "node_count_range minimum {min} is below the motif length {}",
                self.motif.len()
            ));
        }
        if !(self.edge_factor > 0.0) {
            return err(format!("edge_factor {} must be positive", self.edge_factor));
        }
        if self.label_alphabet.is_empty() {
            return err("label_alphabet is empty".into());
        }
        if self.context_alphabet.len() < 2 {
            return err("context_alphabet needs the benign and malicious motif contexts".into());
        }
        if self.motif.is_empty() {
            return err("motif is empty".into());
        }
        if !(0.0..=1.0).contains(&self.noise_context_flip_prob) {
            return err(format!(
                "noise_context_flip_prob {} is outside [0, 1]",
                self.noise_context_flip_prob
            ));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return err(format!("train_fraction {} is outside (0, 1)", self.train_fraction));
        }
        Ok(())
    }

    fn benign_context(&self) -> &str {
        &self.context_alphabet[0]
    }

    fn malicious_context(&self) -> &str {
        &self.context_alphabet[1]
    }
}

/// Generates `2 * n_per_class` graphs (malicious/benign twin pairs in index
/// order) plus the manifest describing them. Byte-identical output for equal
/// configs.
pub fn generate_corpus(
    cfg: &SynthConfig,
) -> Result<(Vec<(Prg, ClassTag)>, DatasetManifest), SynthError> {
    cfg.validate()?;
    let mut corpus = Vec::with_capacity(2 * cfg.n_per_class as usize);
    let mut entries = Vec::with_capacity(2 * cfg.n_per_class as usize);
    for k in 0..cfg.n_per_class as u64 {
        let pair_seed = cfg.seed ^ k;
        for (class, motif_ctx) in [
            (ClassTag::Malicious, cfg.malicious_context()),
            (ClassTag::Benign, cfg.benign_context()),
        ] {
            let g = build_one(cfg, pair_seed, motif_ctx, class)?;
            entries.push(ManifestEntry { path: format!("g{k:04}_{class}.json"), class });
            corpus.push((g, class));
        }
    }
    let manifest = DatasetManifest {
        name: cfg.name.clone(),
        entries,
        split_seed: cfg.seed,
        train_fraction: cfg.train_fraction,
    };
    Ok((corpus, manifest))
}

/// One twin. All randomness comes from `pair_seed`; the class only selects
/// the motif context string, never a different draw sequence.
fn build_one(
    cfg: &SynthConfig,
    pair_seed: u64,
    motif_ctx: &str,
    class: ClassTag,
) -> Result<Prg, SynthError> {
    let mut rng = ChaCha8Rng::seed_from_u64(pair_seed);
    let [min, max] = cfg.node_count_range;
    let n = rng.gen_range(min..=max) as usize;

    let mut nodes: Vec<Node> = (0..n)
        .map(|u| {
            let label = cfg.label_alphabet[rng.gen_range(0..cfg.label_alphabet.len())].clone();
            let ctx = cfg.context_alphabet[rng.gen_range(0..cfg.context_alphabet.len())].clone();
            Node::new(format!("n{u}"), label, [ctx])
        })
        .collect();

    let target = ((cfg.edge_factor * n as f64).round() as usize).min(n * n);
    let mut edge_set = std::collections::HashSet::with_capacity(target);
    let mut edges = Vec::with_capacity(target);
    let mut attempts = 0usize;
    while edges.len() < target && attempts < 20 * target + 100 {
        attempts += 1;
        let src = rng.gen_range(0..n) as u32;
        let dst = rng.gen_range(0..n) as u32;
        if edge_set.insert((src, dst)) {
            edges.push((src, dst));
        }
    }

    let motif_nodes = inject_motif_parts(&mut nodes, &mut edges, &cfg.motif, motif_ctx, &mut rng)?;

    let alphabet = &cfg.context_alphabet;
    if alphabet.len() > 1 {
        for (u, node) in nodes.iter_mut().enumerate() {
            if motif_nodes.contains(&(u as u32)) {
                continue;
            }
            if rng.gen_bool(cfg.noise_context_flip_prob) {
                let cur = alphabet.iter().position(|c| *c == node.contexts[0]).unwrap_or(0);
                let step = 1 + rng.gen_range(0..alphabet.len() - 1);
                node.contexts[0] = alphabet[(cur + step) % alphabet.len()].clone();
            }
        }
    }

    Prg::new(nodes, edges, Some(class)).map_err(|e| SynthError::Config(e.to_string()))
}

/// Relabels a seeded-random simple path to the motif labels, pins the given
/// context on each motif node, and adds whatever chain edges are missing.
/// Prefers nodes without outgoing edges so the tail of the motif stays a
/// sink; falls back to the lowest out-degree nodes.
pub fn inject_motif(g: &Prg, motif: &[String], context: &str, seed: u64) -> Result<Prg, SynthError> {
    let mut nodes = g.nodes().to_vec();
    let mut edges = g.edges().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    inject_motif_parts(&mut nodes, &mut edges, motif, context, &mut rng)?;
    Prg::new(nodes, edges, g.class_tag()).map_err(|e| SynthError::Config(e.to_string()))
}

fn inject_motif_parts(
    nodes: &mut [Node],
    edges: &mut Vec<(u32, u32)>,
    motif: &[String],
    context: &str,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<u32>, SynthError> {
    let n = nodes.len();
    if n < motif.len() {
        return Err(SynthError::GraphTooSmall { needed: motif.len(), actual: n });
    }

    let mut out_degree = vec![0usize; n];
    for &(src, _) in edges.iter() {
        out_degree[src as usize] += 1;
    }
    let mut pool: Vec<u32> = (0..n as u32).filter(|&u| out_degree[u as usize] == 0).collect();
    let path: Vec<u32> = if pool.len() >= motif.len() {
        pool.shuffle(rng);
        pool.truncate(motif.len());
        pool
    } else {
        let mut by_degree: Vec<u32> = (0..n as u32).collect();
        by_degree.sort_by_key(|&u| (out_degree[u as usize], u));
        by_degree.truncate(motif.len());
        by_degree.shuffle(rng);
        by_degree
    };

    for (label, &u) in motif.iter().zip(&path) {
        nodes[u as usize].label = label.clone();
        nodes[u as usize].contexts = vec![context.to_owned()];
    }
    for pair in path.windows(2) {
        if !edges.contains(&(pair[0], pair[1])) {
            edges.push((pair[0], pair[1]));
        }
    }
    Ok(path)
}

/// True when `g` contains a simple path whose labels spell `motif` in order
/// and, if `context` is given, whose nodes all carry exactly that context.
pub fn contains_motif_path(g: &Prg, motif: &[String], context: Option<&str>) -> bool {
    if motif.is_empty() {
        return true;
    }
    let matches = |u: u32, step: usize| {
        let node = &g.nodes()[u as usize];
        node.label == motif[step]
            && context.is_none_or(|c| node.contexts.len() == 1 && node.contexts[0] == c)
    };
    fn extend(
        g: &Prg,
        motif_len: usize,
        matches: &impl Fn(u32, usize) -> bool,
        path: &mut Vec<u32>,
        u: u32,
    ) -> bool {
        path.push(u);
        if path.len() == motif_len {
            return true;
        }
        for &next in g.out_neighbor_indices(u) {
            if !path.contains(&next) && matches(next, path.len()) {
                if extend(g, motif_len, matches, path, next) {
                    return true;
                }
            }
        }
        path.pop();
        false
    }
    (0..g.node_count() as u32).any(|u| {
        matches(u, 0) && extend(g, motif.len(), &matches, &mut Vec::new(), u)
    })
}

/// Writes every graph plus the manifest into `dir`; returns the manifest
/// path. File names come from the manifest entries.
pub fn write_corpus(
    dir: &Path,
    corpus: &[(Prg, ClassTag)],
    manifest: &DatasetManifest,
) -> io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    for ((g, _), entry) in corpus.iter().zip(&manifest.entries) {
        let file = std::fs::File::create(dir.join(&entry.path))?;
        g.save(io::BufWriter::new(file))?;
    }
    let manifest_path = dir.join("manifest.json");
    let file = std::fs::File::create(&manifest_path)?;
    manifest.save(io::BufWriter::new(file))?;
    Ok(manifest_path)
}

/// Deterministic single background graph (no motif); used by the scaling
/// benchmarks.
pub fn background_graph(seed: u64, node_count: usize, edge_factor: f64) -> Prg {
    let cfg = SynthConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes: Vec<Node> = (0..node_count)
        .map(|u| {
            let label = &cfg.label_alphabet[rng.gen_range(0..cfg.label_alphabet.len())];
            let ctx = &cfg.context_alphabet[rng.gen_range(0..cfg.context_alphabet.len())];
            Node::new(format!("n{u}"), label.clone(), [ctx.clone()])
        })
        .collect();
    let target = ((edge_factor * node_count as f64).round() as usize).min(node_count * node_count);
    let mut edge_set = std::collections::HashSet::with_capacity(target);
    let mut edges = Vec::with_capacity(target);
    let mut attempts = 0usize;
    while edges.len() < target && attempts < 20 * target + 100 {
        attempts += 1;
        let src = rng.gen_range(0..node_count) as u32;
        let dst = rng.gen_range(0..node_count) as u32;
        if edge_set.insert((src, dst)) {
            edges.push((src, dst));
        }
    }
    Prg::new(nodes, edges, None).expect("background graph is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{featurize_corpus, FeatureVector};
    use crate::relabel::Mode;

    fn small_cfg() -> SynthConfig {
        SynthConfig {
            n_per_class: 8,
            node_count_range: [20, 40],
            seed: 7,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn generation_is_byte_identical_across_runs() {
        let cfg = SynthConfig { n_per_class: 5, seed: 7, ..small_cfg() };
        let render = || {
            let (corpus, manifest) = generate_corpus(&cfg).unwrap();
            let mut text = String::new();
            for (g, _) in &corpus {
                text.push_str(&g.save_to_string());
            }
            let mut buf = Vec::new();
            manifest.save(&mut buf).unwrap();
            text.push_str(&String::from_utf8(buf).unwrap());
            text
        };
        assert_eq!(render(), render());
    }

    #[test]
    fn every_graph_contains_its_motif_with_the_class_context() {
        let cfg = small_cfg();
        let (corpus, _) = generate_corpus(&cfg).unwrap();
        assert_eq!(corpus.len(), 2 * cfg.n_per_class as usize);
        for (g, class) in &corpus {
            let ctx = match class {
                ClassTag::Malicious => "user-unaware",
                ClassTag::Benign => "user-aware",
            };
            assert!(
                contains_motif_path(g, &cfg.motif, Some(ctx)),
                "{class} graph lost its motif"
            );
        }
    }

    #[test]
    fn every_emitted_graph_is_valid() {
        let (corpus, _) = generate_corpus(&small_cfg()).unwrap();
        for (g, _) in &corpus {
            assert!(g.violations().is_empty());
        }
    }

    #[test]
    fn twins_are_identical_up_to_class_under_uniform_context() {
        let cfg = SynthConfig { noise_context_flip_prob: 0.0, ..small_cfg() };
        let (corpus, _) = generate_corpus(&cfg).unwrap();
        for pair in corpus.chunks(2) {
            let (mal, ben) = (&pair[0].0, &pair[1].0);
            let a = Prg::new(
                mal.with_uniform_context("c").nodes().to_vec(),
                mal.edges().to_vec(),
                None,
            )
            .unwrap();
            let b = Prg::new(
                ben.with_uniform_context("c").nodes().to_vec(),
                ben.edges().to_vec(),
                None,
            )
            .unwrap();
            assert_eq!(a.save_to_string(), b.save_to_string());
        }
    }

    #[test]
    fn motif_injection_examples() {
        let g = Prg::new(
            vec![
                Node::new("n0", "x", ["c"]),
                Node::new("n1", "y", ["c"]),
                Node::new("n2", "z", ["c"]),
            ],
            vec![],
            None,
        )
        .unwrap();
        let motif = vec!["a".to_owned(), "b".to_owned()];
        let injected = inject_motif(&g, &motif, "c", 3).unwrap();
        assert!(contains_motif_path(&injected, &motif, Some("c")));
        // Injecting again still leaves a motif in place.
        let twice = inject_motif(&injected, &motif, "c", 4).unwrap();
        assert!(contains_motif_path(&twice, &motif, Some("c")));

        let tiny = Prg::new(vec![Node::new("n0", "x", ["c"])], vec![], None).unwrap();
        assert_eq!(
            inject_motif(&tiny, &motif, "c", 3),
            Err(SynthError::GraphTooSmall { needed: 2, actual: 1 })
        );
    }

    #[test]
    fn config_validation_catches_bad_fields() {
        let mut cfg = small_cfg();
        cfg.node_count_range = [1, 40];
        assert!(matches!(generate_corpus(&cfg), Err(SynthError::Config(_))));
        let mut cfg = small_cfg();
        cfg.edge_factor = 0.0;
        assert!(matches!(cfg.validate(), Err(SynthError::Config(_))));
        let mut cfg = small_cfg();
        cfg.noise_context_flip_prob = 1.5;
        assert!(matches!(cfg.validate(), Err(SynthError::Config(_))));
    }

    /// Two-sample permutation test on class mean WL vectors: with zero noise
    /// the classes are WL-indistinguishable by construction, so the observed
    /// distance is zero and the p-value is 1.
    #[test]
    fn wl_feature_distributions_match_across_classes_without_noise() {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;

        let cfg = SynthConfig { noise_context_flip_prob: 0.0, ..small_cfg() };
        let (corpus, _) = generate_corpus(&cfg).unwrap();
        let graphs: Vec<Prg> = corpus.iter().map(|(g, _)| g.clone()).collect();
        let labels: Vec<ClassTag> = corpus.iter().map(|&(_, c)| c).collect();
        let (_, vocab, vectors) = featurize_corpus(&graphs, None, 1, Mode::Wl);

        let dense = |v: &FeatureVector| {
            let mut d = vec![0.0f64; vocab.len()];
            for &(idx, c) in v.counts() {
                d[idx as usize] = f64::from(c);
            }
            d
        };
        let stat = |assignment: &[ClassTag]| {
            let mut sums = [vec![0.0f64; vocab.len()], vec![0.0f64; vocab.len()]];
            let mut counts = [0usize; 2];
            for (v, &c) in vectors.iter().zip(assignment) {
                let side = if c == ClassTag::Malicious { 0 } else { 1 };
                counts[side] += 1;
                for (acc, x) in sums[side].iter_mut().zip(dense(v)) {
                    *acc += x;
                }
            }
            sums[0]
                .iter()
                .zip(&sums[1])
                .map(|(a, b)| {
                    let d = a / counts[0] as f64 - b / counts[1] as f64;
                    d * d
                })
                .sum::<f64>()
        };

        let observed = stat(&labels);
        assert_eq!(observed, 0.0, "twin pairs share WL features exactly");

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let mut permuted = labels.clone();
        let trials = 200;
        let mut at_least = 0usize;
        for _ in 0..trials {
            permuted.shuffle(&mut rng);
            if stat(&permuted) >= observed {
                at_least += 1;
            }
        }
        let p = at_least as f64 / trials as f64;
        assert!(p > 0.01, "permutation test p-value {p} too small");
    }

    #[test]
    fn background_graph_is_deterministic_and_sized() {
        let a = background_graph(3, 100, 2.1);
        let b = background_graph(3, 100, 2.1);
        assert_eq!(a, b);
        assert_eq!(a.node_count(), 100);
        assert_eq!(a.edge_count(), 210);
    }
}
