//! PRG data model, validation, and the on-disk graph/dataset formats.
//!
//! A [`Prg`] is a directed graph with per-node labels and non-empty context
//! sets. Graphs are immutable once built; every constructor either validates
//! or is explicitly marked unchecked. The JSON formats are:
//!
//! Graph file:
//! ```json
//! {
//!   "nodes": [{"id": "n1", "label": "getLatitude", "contexts": ["user-unaware"]}],
//!   "edges": [["n1", "n3"]],
//!   "class": "malicious"
//! }
//! ```
//!
//! Dataset manifest:
//! ```json
//! {"name": "corpus", "entries": [{"path": "g0.json", "class": "benign"}],
//!  "split_seed": 42, "train_fraction": 0.6}
//! ```
//!
//! Unknown top-level keys are rejected in both formats.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::relabel::RESERVED_TOKENS;

/// Class tag attached to a graph or manifest entry. A graph with no tag is
/// unlabeled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassTag {
    Malicious,
    Benign,
}

impl fmt::Display for ClassTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassTag::Malicious => write!(f, "malicious"),
            ClassTag::Benign => write!(f, "benign"),
        }
    }
}

/// One PRG node: identifier, operation label, and sorted context set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: String,
    pub label: String,
    pub contexts: Vec<String>,
}

impl Node {
    pub fn new(
        id: impl Into<String>,
        label: impl Into<String>,
        contexts: impl IntoIterator<Item = impl Into<String>>,
    ) -> Self {
        Node {
            id: id.into(),
            label: label.into(),
            contexts: contexts.into_iter().map(Into::into).collect(),
        }
    }
}

/// A validated program representation graph.
///
/// Node order is declaration order (file order when loaded). Edges are a set:
/// parallel edges are rejected, self-loops are allowed. Context sets are
/// stored sorted lexicographically so that downstream joins are deterministic.
#[derive(Debug, Clone)]
pub struct Prg {
    nodes: Vec<Node>,
    edges: Vec<(u32, u32)>,
    out: Vec<Vec<u32>>,
    class_tag: Option<ClassTag>,
    index: HashMap<String, u32>,
}

impl PartialEq for Prg {
    fn eq(&self, other: &Self) -> bool {
        // `out` and `index` are derived from nodes/edges.
        self.nodes == other.nodes && self.edges == other.edges && self.class_tag == other.class_tag
    }
}

/// A single invariant violation, with enough locus to point at the offender.
/// Violations are data, not errors: [`Prg::violations`] returns all of them in
/// a deterministic order (nodes in declaration order, then edges in file
/// order).
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    DuplicateNodeId { id: String },
    EmptyLabel { node: String },
    EmptyContextSet { node: String },
    DuplicateContext { node: String, context: String },
    ReservedToken { node: String, value: String, token: &'static str },
    DanglingEdge { index: usize, src: String, dst: String },
    DuplicateEdge { index: usize, src: String, dst: String },
    DuplicatePath { path: String },
    InvalidTrainFraction { value: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateNodeId { id } => write!(f, "duplicate node id {id:?}"),
            Violation::EmptyLabel { node } => write!(f, "node {node:?} has an empty label"),
            Violation::EmptyContextSet { node } => {
                write!(f, "node {node:?} has an empty context set")
            }
            Violation::DuplicateContext { node, context } => {
                write!(f, "node {node:?} repeats context {context:?}")
            }
            Violation::ReservedToken { node, value, token } => {
                write!(f, "node {node:?}: {value:?} contains reserved token {token:?}")
            }
            Violation::DanglingEdge { index, src, dst } => {
                write!(f, "edge #{index} ({src:?} -> {dst:?}) references an undeclared node")
            }
            Violation::DuplicateEdge { index, src, dst } => {
                write!(f, "edge #{index} ({src:?} -> {dst:?}) repeats an earlier edge")
            }
            Violation::DuplicatePath { path } => {
                write!(f, "manifest repeats path {path:?}")
            }
            Violation::InvalidTrainFraction { value } => {
                write!(f, "train_fraction {value} is outside (0, 1)")
            }
        }
    }
}

#[derive(Debug, Error)]
#[error("graph parse error: {0}")]
pub struct ParseError(String);

#[derive(Debug, Error)]
pub struct ValidationError {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "graph validation failed ({} violation(s)):", self.violations.len())?;
        for v in &self.violations {
            write!(f, "\n  {v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
#[error("unknown node {0:?}")]
pub struct UnknownNode(pub String);

/// Loader behavior knobs.
#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// When a node declares no contexts, inject the single sentinel context
    /// `"default"` instead of reporting `EmptyContextSet`.
    pub inject_default_context: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct NodeDoc {
    id: String,
    label: String,
    contexts: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDoc {
    nodes: Vec<NodeDoc>,
    edges: Vec<(String, String)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    class: Option<ClassTag>,
}

impl Prg {
    /// Parses and validates a graph-JSON byte stream. Node order equals file
    /// order; context sets are sorted.
    pub fn load(mut source: impl Read, opts: &LoadOptions) -> Result<Prg, LoadError> {
        let mut buf = Vec::new();
        source.read_to_end(&mut buf)?;
        let doc: GraphDoc =
            serde_json::from_slice(&buf).map_err(|e| ParseError(e.to_string()))?;
        Self::from_doc(doc, opts)
    }

    pub fn load_path(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<Prg, LoadError> {
        let file = std::fs::File::open(path.as_ref())?;
        Self::load(std::io::BufReader::new(file), opts)
    }

    fn from_doc(doc: GraphDoc, opts: &LoadOptions) -> Result<Prg, LoadError> {
        let mut nodes: Vec<Node> = doc
            .nodes
            .into_iter()
            .map(|n| Node { id: n.id, label: n.label, contexts: n.contexts })
            .collect();
        if opts.inject_default_context {
            for node in &mut nodes {
                if node.contexts.is_empty() {
                    node.contexts.push("default".to_owned());
                }
            }
        }

        let index: HashMap<String, u32> = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.clone(), i as u32))
            .collect();

        let mut violations = scan_nodes(&nodes);
        let mut edges = Vec::with_capacity(doc.edges.len());
        let mut seen = HashSet::new();
        for (i, (src, dst)) in doc.edges.iter().enumerate() {
            match (index.get(src), index.get(dst)) {
                (Some(&s), Some(&d)) => {
                    if seen.insert((s, d)) {
                        edges.push((s, d));
                    } else {
                        violations.push(Violation::DuplicateEdge {
                            index: i,
                            src: src.clone(),
                            dst: dst.clone(),
                        });
                    }
                }
                _ => violations.push(Violation::DanglingEdge {
                    index: i,
                    src: src.clone(),
                    dst: dst.clone(),
                }),
            }
        }
        if !violations.is_empty() {
            return Err(ValidationError { violations }.into());
        }
        for node in &mut nodes {
            node.contexts.sort();
        }
        Ok(Self::assemble(nodes, edges, doc.class, index))
    }

    /// Builds a graph from parts, validating all invariants. Edge endpoints
    /// are node indices. Context sets are sorted.
    pub fn new(
        mut nodes: Vec<Node>,
        edges: Vec<(u32, u32)>,
        class_tag: Option<ClassTag>,
    ) -> Result<Prg, ValidationError> {
        let mut violations = scan_nodes(&nodes);
        let n = nodes.len() as u32;
        let mut seen = HashSet::new();
        for (i, &(s, d)) in edges.iter().enumerate() {
            if s >= n || d >= n {
                violations.push(Violation::DanglingEdge {
                    index: i,
                    src: s.to_string(),
                    dst: d.to_string(),
                });
            } else if !seen.insert((s, d)) {
                violations.push(Violation::DuplicateEdge {
                    index: i,
                    src: nodes[s as usize].id.clone(),
                    dst: nodes[d as usize].id.clone(),
                });
            }
        }
        if !violations.is_empty() {
            return Err(ValidationError { violations });
        }
        for node in &mut nodes {
            node.contexts.sort();
        }
        let index = nodes
            .iter()
            .enumerate()
            .map(|(i, nd)| (nd.id.clone(), i as u32))
            .collect();
        Ok(Self::assemble(nodes, edges, class_tag, index))
    }

    /// Builds a graph without validating node-level invariants; out-of-range
    /// edges are dropped. Intended for constructing deliberately invalid
    /// graphs in tests of [`Prg::violations`].
    pub fn from_parts_unchecked(
        nodes: Vec<Node>,
        edges: Vec<(u32, u32)>,
        class_tag: Option<ClassTag>,
    ) -> Prg {
        let n = nodes.len() as u32;
        let edges: Vec<(u32, u32)> = edges.into_iter().filter(|&(s, d)| s < n && d < n).collect();
        let index = nodes
            .iter()
            .enumerate()
            .map(|(i, nd)| (nd.id.clone(), i as u32))
            .collect();
        Self::assemble(nodes, edges, class_tag, index)
    }

    fn assemble(
        nodes: Vec<Node>,
        edges: Vec<(u32, u32)>,
        class_tag: Option<ClassTag>,
        index: HashMap<String, u32>,
    ) -> Prg {
        let mut out = vec![Vec::new(); nodes.len()];
        for &(s, d) in &edges {
            out[s as usize].push(d);
        }
        for targets in &mut out {
            targets.sort_unstable();
        }
        Prg { nodes, edges, out, class_tag, index }
    }

    /// Every invariant violation representable on a built graph, in
    /// deterministic order. Empty for every graph produced by [`Prg::load`].
    pub fn violations(&self) -> Vec<Violation> {
        let mut v = scan_nodes(&self.nodes);
        let mut seen = HashSet::new();
        for (i, &(s, d)) in self.edges.iter().enumerate() {
            if !seen.insert((s, d)) {
                v.push(Violation::DuplicateEdge {
                    index: i,
                    src: self.nodes[s as usize].id.clone(),
                    dst: self.nodes[d as usize].id.clone(),
                });
            }
        }
        v
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn class_tag(&self) -> Option<ClassTag> {
        self.class_tag
    }

    pub fn node_index(&self, id: &str) -> Option<u32> {
        self.index.get(id).copied()
    }

    /// Successors of `u` (by node index), ordered by node declaration order.
    pub fn out_neighbor_indices(&self, u: u32) -> &[u32] {
        &self.out[u as usize]
    }

    /// Successors of the node named `id`, ordered by node declaration order.
    /// A self-loop yields the node itself.
    pub fn out_neighbors(&self, id: &str) -> Result<Vec<&str>, UnknownNode> {
        let u = self.node_index(id).ok_or_else(|| UnknownNode(id.to_owned()))?;
        Ok(self.out[u as usize]
            .iter()
            .map(|&d| self.nodes[d as usize].id.as_str())
            .collect())
    }

    /// Returns a copy with every context set replaced by the single context
    /// `ctx`. Used by the context-collapse checks.
    pub fn with_uniform_context(&self, ctx: &str) -> Prg {
        let nodes = self
            .nodes
            .iter()
            .map(|n| Node {
                id: n.id.clone(),
                label: n.label.clone(),
                contexts: vec![ctx.to_owned()],
            })
            .collect();
        Prg::new(nodes, self.edges.clone(), self.class_tag).expect("uniform context stays valid")
    }

    /// Serializes back to graph-JSON. `load(save(g))` reproduces `g`
    /// field-for-field.
    pub fn save(&self, mut sink: impl Write) -> std::io::Result<()> {
        let doc = GraphDoc {
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeDoc {
                    id: n.id.clone(),
                    label: n.label.clone(),
                    contexts: n.contexts.clone(),
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|&(s, d)| {
                    (self.nodes[s as usize].id.clone(), self.nodes[d as usize].id.clone())
                })
                .collect(),
            class: self.class_tag,
        };
        let text = serde_json::to_string_pretty(&doc).expect("graph serialization");
        sink.write_all(text.as_bytes())?;
        sink.write_all(b"\n")
    }

    pub fn save_to_string(&self) -> String {
        let mut buf = Vec::new();
        self.save(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("graph JSON is UTF-8")
    }
}

fn scan_nodes(nodes: &[Node]) -> Vec<Violation> {
    let mut violations = Vec::new();
    let mut ids = HashSet::new();
    for node in nodes {
        if !ids.insert(node.id.as_str()) {
            violations.push(Violation::DuplicateNodeId { id: node.id.clone() });
        }
        if node.label.is_empty() {
            violations.push(Violation::EmptyLabel { node: node.id.clone() });
        }
        for token in RESERVED_TOKENS {
            if node.label.contains(token) {
                violations.push(Violation::ReservedToken {
                    node: node.id.clone(),
                    value: node.label.clone(),
                    token,
                });
            }
        }
        if node.contexts.is_empty() {
            violations.push(Violation::EmptyContextSet { node: node.id.clone() });
        }
        let mut ctx_seen = HashSet::new();
        for ctx in &node.contexts {
            if !ctx_seen.insert(ctx.as_str()) {
                violations.push(Violation::DuplicateContext {
                    node: node.id.clone(),
                    context: ctx.clone(),
                });
            }
            for token in RESERVED_TOKENS {
                if ctx.contains(token) {
                    violations.push(Violation::ReservedToken {
                        node: node.id.clone(),
                        value: ctx.clone(),
                        token,
                    });
                }
            }
        }
    }
    violations
}

/// One manifest row: a graph file (relative to the manifest) and its class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub class: ClassTag,
}

/// Corpus description: graph files, class tags, and split parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub name: String,
    pub entries: Vec<ManifestEntry>,
    pub split_seed: u64,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
}

fn default_train_fraction() -> f64 {
    0.6
}

impl DatasetManifest {
    pub fn load(mut source: impl Read) -> Result<DatasetManifest, LoadError> {
        let mut buf = Vec::new();
        source.read_to_end(&mut buf)?;
        let manifest: DatasetManifest =
            serde_json::from_slice(&buf).map_err(|e| ParseError(e.to_string()))?;
        manifest.check()?;
        Ok(manifest)
    }

    pub fn load_path(path: impl AsRef<Path>) -> Result<DatasetManifest, LoadError> {
        let file = std::fs::File::open(path.as_ref())?;
        Self::load(std::io::BufReader::new(file))
    }

    fn check(&self) -> Result<(), ValidationError> {
        let mut violations = Vec::new();
        let mut paths = HashSet::new();
        for entry in &self.entries {
            if !paths.insert(entry.path.as_str()) {
                violations.push(Violation::DuplicatePath { path: entry.path.clone() });
            }
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            violations.push(Violation::InvalidTrainFraction { value: self.train_fraction });
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(ValidationError { violations })
        }
    }

    pub fn save(&self, mut sink: impl Write) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serialization");
        sink.write_all(text.as_bytes())?;
        sink.write_all(b"\n")
    }
}
