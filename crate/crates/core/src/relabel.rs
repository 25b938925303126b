//! WL and contextual relabeling.
//!
//! Plain WL relabeling augments each node label with the sorted multiset of
//! its out-neighbors' labels, once per iteration. Contextual relabeling adds
//! one step: at every iteration the node's contexts are prefixed onto its
//! neighborhood label, so the resulting feature records *where from* a
//! neighborhood is reachable, not just *what* it looks like. Neighbor
//! aggregation always reads the context-free labels; contexts never propagate
//! along edges.
//!
//! Raw label strings are canonical: a node's raw WL label at iteration `i` is
//! its raw label at `i-1`, followed by the raw labels of its out-neighbors
//! sorted lexicographically (byte order), all joined with [`SEP1`]. The raw
//! contextual label joins `context (+) wl-raw` blocks over the sorted context
//! set with [`JSEP`]. Canonical raws are independent of node declaration
//! order and of dictionary state, which is what makes them usable as feature
//! identities and as oracle values.
//!
//! Internally each distinct raw string per iteration is interned to a compact
//! code and per-node work is done on codes; the full strings are only
//! materialized once per distinct label class. This keeps one relabeling
//! iteration linear in the edge count instead of in the (much larger) total
//! expanded string length.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::graph::Prg;

static NEXT_RELABELER_UID: AtomicU64 = AtomicU64::new(1);

/// Separates the previous label from the neighbor block and neighbors from
/// each other inside a WL raw label.
pub const SEP1: &str = ",";
/// Separator between sorted neighbor labels (same as [`SEP1`]).
pub const SEP2: &str = ",";
/// Joins a context onto a neighborhood label.
pub const CSEP: &str = "(+)";
/// Joins the per-context blocks of one node's contextual label.
pub const JSEP: &str = "|";
/// Tokens that may not appear in node labels or contexts; rejecting them at
/// load keeps raw-string decomposition unambiguous.
pub const RESERVED_TOKENS: [&str; 3] = [SEP1, CSEP, JSEP];

/// Which label stream an operation works on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Context-free WL labels.
    Wl,
    /// Context-prefixed labels.
    Contextual,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Wl => write!(f, "wl"),
            Mode::Contextual => write!(f, "contextual"),
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "wl" => Ok(Mode::Wl),
            "contextual" => Ok(Mode::Contextual),
            other => Err(format!("unknown mode {other:?} (expected wl or contextual)")),
        }
    }
}

/// Compressed label: a compact stand-in for one `(iteration, raw string)`
/// pair. Codes are issued in first-encounter order and never reused, so codes
/// from different iterations are disjoint by construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabelCode(u32);

impl LabelCode {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Injective map from `(iteration, raw string)` to [`LabelCode`].
///
/// Equal `(i, raw)` pairs always map to the same code; distinct pairs always
/// map to distinct codes, including the same string at two different
/// iterations. The dictionary retains every raw string, so codes can be
/// expanded back at any time.
#[derive(Debug, Default)]
pub struct LabelDictionary {
    levels: Vec<HashMap<String, u32>>,
    entries: Vec<(u32, String)>,
}

impl LabelDictionary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the code for `(iteration, raw)`, issuing a fresh one on first
    /// encounter. Idempotent per pair.
    pub fn intern(&mut self, iteration: usize, raw: &str) -> LabelCode {
        if iteration >= self.levels.len() {
            self.levels.resize_with(iteration + 1, HashMap::new);
        }
        if let Some(&code) = self.levels[iteration].get(raw) {
            return LabelCode(code);
        }
        let code = self.entries.len() as u32;
        self.levels[iteration].insert(raw.to_owned(), code);
        self.entries.push((iteration as u32, raw.to_owned()));
        LabelCode(code)
    }

    pub fn lookup(&self, iteration: usize, raw: &str) -> Option<LabelCode> {
        self.levels.get(iteration)?.get(raw).map(|&c| LabelCode(c))
    }

    /// The raw string a code stands for.
    pub fn raw(&self, code: LabelCode) -> &str {
        &self.entries[code.index()].1
    }

    pub fn iteration_of(&self, code: LabelCode) -> usize {
        self.entries[code.index()].0 as usize
    }

    /// Total number of codes issued.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of distinct raw strings seen at `iteration`.
    pub fn count_at(&self, iteration: usize) -> usize {
        self.levels.get(iteration).map_or(0, HashMap::len)
    }

    /// All `(iteration, raw, code)` triples in code order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &str, LabelCode)> {
        self.entries
            .iter()
            .enumerate()
            .map(|(c, (i, raw))| (*i as usize, raw.as_str(), LabelCode(c as u32)))
    }
}

/// Per-iteration compressed labels for one graph: the context-free WL labels
/// and, when relabeled in contextual mode, the contextual labels. Raw strings
/// live in the [`Relabeler`]'s dictionaries.
#[derive(Debug, Clone)]
pub struct RelabelSequence {
    pub graph_id: String,
    height: usize,
    wl_codes: Vec<Vec<LabelCode>>,
    ctx_codes: Vec<Vec<LabelCode>>,
}

impl RelabelSequence {
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn node_count(&self) -> usize {
        self.wl_codes.first().map_or(0, Vec::len)
    }

    pub fn wl_code(&self, iteration: usize, node: usize) -> LabelCode {
        self.wl_codes[iteration][node]
    }

    pub fn contextual_code(&self, iteration: usize, node: usize) -> LabelCode {
        self.ctx_codes[iteration][node]
    }

    pub fn has_contextual(&self) -> bool {
        !self.ctx_codes.is_empty()
    }

    /// Per-iteration code vectors for the requested mode. `None` when the
    /// sequence was produced in plain WL mode and contextual codes are asked
    /// for.
    pub fn codes(&self, mode: Mode) -> Option<&[Vec<LabelCode>]> {
        match mode {
            Mode::Wl => Some(&self.wl_codes),
            Mode::Contextual if self.has_contextual() => Some(&self.ctx_codes),
            Mode::Contextual => None,
        }
    }
}

/// Runs WL and contextual relabeling against shared label dictionaries.
///
/// One relabeler per corpus: relabeling every graph through the same instance
/// gives corpus-wide consistent codes, which is what vocabulary building and
/// kernel computation need. The observable outputs (raw strings, code
/// equalities) are deterministic given the corpus and its processing order.
#[derive(Debug)]
pub struct Relabeler {
    uid: u64,
    wl: LabelDictionary,
    ctx: LabelDictionary,
    // (prev code, neighbor codes sorted by raw) -> code of the joined raw.
    wl_fast: HashMap<Vec<u32>, u32>,
    // (context set id, wl code) -> contextual code.
    sigma_fast: HashMap<(u32, u32), u32>,
    ctx_sets: HashMap<Vec<String>, u32>,
}

impl Default for Relabeler {
    fn default() -> Self {
        Self::new()
    }
}

impl Relabeler {
    pub fn new() -> Self {
        Relabeler {
            uid: NEXT_RELABELER_UID.fetch_add(1, Ordering::Relaxed),
            wl: LabelDictionary::new(),
            ctx: LabelDictionary::new(),
            wl_fast: HashMap::new(),
            sigma_fast: HashMap::new(),
            ctx_sets: HashMap::new(),
        }
    }

    /// Process-unique instance id; vocabularies remember who built them.
    pub fn uid(&self) -> u64 {
        self.uid
    }

    pub fn wl_dictionary(&self) -> &LabelDictionary {
        &self.wl
    }

    pub fn contextual_dictionary(&self) -> &LabelDictionary {
        &self.ctx
    }

    pub fn dictionary(&self, mode: Mode) -> &LabelDictionary {
        match mode {
            Mode::Wl => &self.wl,
            Mode::Contextual => &self.ctx,
        }
    }

    /// Context-free WL relabeling up to height `h`.
    pub fn wl_relabel(&mut self, g: &Prg, graph_id: &str, h: usize) -> RelabelSequence {
        self.run(g, graph_id, h, Mode::Wl)
    }

    /// Contextual relabeling up to height `h`. Also fills the WL labels,
    /// since they drive neighbor aggregation.
    pub fn contextual_relabel(&mut self, g: &Prg, graph_id: &str, h: usize) -> RelabelSequence {
        self.run(g, graph_id, h, Mode::Contextual)
    }

    fn run(&mut self, g: &Prg, graph_id: &str, h: usize, mode: Mode) -> RelabelSequence {
        let n = g.node_count();
        let contextual = mode == Mode::Contextual;

        let ctx_ids: Vec<u32> = if contextual {
            g.nodes().iter().map(|node| Self::ctx_set_id(&mut self.ctx_sets, &node.contexts)).collect()
        } else {
            Vec::new()
        };

        let mut wl_codes: Vec<Vec<LabelCode>> = Vec::with_capacity(h + 1);
        let mut ctx_codes: Vec<Vec<LabelCode>> = Vec::new();

        let base: Vec<LabelCode> =
            g.nodes().iter().map(|node| self.wl.intern(0, &node.label)).collect();
        if contextual {
            ctx_codes.push(self.sigma_pass(0, g, &ctx_ids, &base));
        }
        wl_codes.push(base);

        let mut scratch: Vec<u32> = Vec::new();
        for i in 1..=h {
            let mut next = Vec::with_capacity(n);
            for u in 0..n {
                let prev = wl_codes[i - 1][u];
                scratch.clear();
                scratch.push(prev.0);
                scratch.extend(
                    g.out_neighbor_indices(u as u32)
                        .iter()
                        .map(|&m| wl_codes[i - 1][m as usize].0),
                );
                let wl = &self.wl;
                scratch[1..]
                    .sort_by(|&a, &b| wl.raw(LabelCode(a)).cmp(wl.raw(LabelCode(b))));

                let code = if let Some(&c) = self.wl_fast.get(scratch.as_slice()) {
                    LabelCode(c)
                } else {
                    let mut raw = String::from(self.wl.raw(prev));
                    for &m in &scratch[1..] {
                        raw.push_str(SEP1);
                        raw.push_str(self.wl.raw(LabelCode(m)));
                    }
                    let code = self.wl.intern(i, &raw);
                    self.wl_fast.insert(scratch.clone(), code.0);
                    code
                };
                next.push(code);
            }
            if contextual {
                ctx_codes.push(self.sigma_pass(i, g, &ctx_ids, &next));
            }
            wl_codes.push(next);
        }

        RelabelSequence { graph_id: graph_id.to_owned(), height: h, wl_codes, ctx_codes }
    }

    fn sigma_pass(
        &mut self,
        iteration: usize,
        g: &Prg,
        ctx_ids: &[u32],
        wl_codes: &[LabelCode],
    ) -> Vec<LabelCode> {
        let mut out = Vec::with_capacity(wl_codes.len());
        for (u, &wl_code) in wl_codes.iter().enumerate() {
            let key = (ctx_ids[u], wl_code.0);
            let code = if let Some(&c) = self.sigma_fast.get(&key) {
                LabelCode(c)
            } else {
                let wl_raw = self.wl.raw(wl_code);
                let mut raw = String::new();
                for (k, ctx) in g.nodes()[u].contexts.iter().enumerate() {
                    if k > 0 {
                        raw.push_str(JSEP);
                    }
                    raw.push_str(ctx);
                    raw.push_str(CSEP);
                    raw.push_str(wl_raw);
                }
                let code = self.ctx.intern(iteration, &raw);
                self.sigma_fast.insert(key, code.0);
                code
            };
            out.push(code);
        }
        out
    }

    fn ctx_set_id(sets: &mut HashMap<Vec<String>, u32>, contexts: &[String]) -> u32 {
        if let Some(&id) = sets.get(contexts) {
            return id;
        }
        let id = sets.len() as u32;
        sets.insert(contexts.to_vec(), id);
        id
    }

    /// Raw WL label of `node` at `iteration`.
    pub fn wl_raw(&self, seq: &RelabelSequence, iteration: usize, node: usize) -> &str {
        self.wl.raw(seq.wl_code(iteration, node))
    }

    /// Raw contextual label of `node` at `iteration`.
    pub fn contextual_raw(&self, seq: &RelabelSequence, iteration: usize, node: usize) -> &str {
        self.ctx.raw(seq.contextual_code(iteration, node))
    }

    pub fn raw(&self, mode: Mode, code: LabelCode) -> &str {
        self.dictionary(mode).raw(code)
    }

    /// Writes the debug dump: one `"<iteration> <nodeId> <raw>"` line per
    /// (iteration, node), sorted by iteration then node id.
    pub fn write_dump(
        &self,
        seq: &RelabelSequence,
        g: &Prg,
        mode: Mode,
        mut sink: impl Write,
    ) -> std::io::Result<()> {
        for i in 0..=seq.height() {
            let mut lines: Vec<(&str, &str)> = (0..seq.node_count())
                .map(|u| {
                    let raw = match mode {
                        Mode::Wl => self.wl_raw(seq, i, u),
                        Mode::Contextual => self.contextual_raw(seq, i, u),
                    };
                    (g.nodes()[u].id.as_str(), raw)
                })
                .collect();
            lines.sort_by_key(|&(id, _)| id);
            for (id, raw) in lines {
                writeln!(sink, "{i} {id} {raw}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::graph::{Node, Prg};
    use std::collections::{HashMap, HashSet};

    fn graph(nodes: Vec<Node>, edges: Vec<(u32, u32)>) -> Prg {
        Prg::new(nodes, edges, None).unwrap()
    }

    #[test]
    fn geinimi_wl_raw_labels_match_worked_example() {
        let g = fixtures::geinimi();
        let mut r = Relabeler::new();
        let seq = r.wl_relabel(&g, "geinimi", 1);
        let lat = g.node_index("n1").unwrap() as usize;
        assert_eq!(r.wl_raw(&seq, 0, lat), "getLatitude");
        assert_eq!(r.wl_raw(&seq, 1, lat), "getLatitude,writeBytes");
    }

    #[test]
    fn geinimi_and_yahoo_contextual_raw_labels_match_worked_example() {
        let mut r = Relabeler::new();
        let gm = fixtures::geinimi();
        let gb = fixtures::yahoo_weather();
        let sm = r.contextual_relabel(&gm, "geinimi", 1);
        let sb = r.contextual_relabel(&gb, "yahoo", 1);
        assert_eq!(r.contextual_raw(&sm, 0, 0), "user-unaware(+)getLatitude");
        assert_eq!(r.contextual_raw(&sm, 1, 0), "user-unaware(+)getLatitude,writeBytes");
        assert_eq!(r.contextual_raw(&sb, 0, 0), "user-aware(+)getLatitude");
        assert_eq!(r.contextual_raw(&sb, 1, 0), "user-aware(+)getLatitude,writeBytes");
        // WL labels agree between the two fixtures at every node and height.
        for i in 0..=1 {
            for u in 0..3 {
                assert_eq!(r.wl_raw(&sm, i, u), r.wl_raw(&sb, i, u));
            }
        }
    }

    #[test]
    fn isolated_node_repeats_its_label_at_every_height() {
        let g = graph(vec![Node::new("n", "a", ["c"])], vec![]);
        let mut r = Relabeler::new();
        let seq = r.wl_relabel(&g, "iso", 2);
        assert_eq!(r.wl_raw(&seq, 1, 0), "a");
        assert_eq!(r.wl_raw(&seq, 2, 0), "a");
        // Same string, but distinct codes per iteration.
        assert_ne!(seq.wl_code(0, 0), seq.wl_code(1, 0));
        assert_ne!(seq.wl_code(1, 0), seq.wl_code(2, 0));
    }

    #[test]
    fn two_cycle_labels_hand_executed() {
        let g = graph(
            vec![Node::new("x", "a", ["c"]), Node::new("y", "b", ["c"])],
            vec![(0, 1), (1, 0)],
        );
        let mut r = Relabeler::new();
        let seq = r.wl_relabel(&g, "cycle", 1);
        assert_eq!(r.wl_raw(&seq, 1, 0), "a,b");
        assert_eq!(r.wl_raw(&seq, 1, 1), "b,a");
    }

    #[test]
    fn repeated_neighbor_labels_repeat_in_the_join() {
        let g = graph(
            vec![
                Node::new("p", "a", ["c"]),
                Node::new("q", "b", ["c"]),
                Node::new("r", "b", ["c"]),
            ],
            vec![(0, 1), (0, 2)],
        );
        let mut r = Relabeler::new();
        let seq = r.wl_relabel(&g, "multi", 1);
        assert_eq!(r.wl_raw(&seq, 1, 0), "a,b,b");
    }

    #[test]
    fn self_loop_feeds_own_label_back() {
        let g = graph(vec![Node::new("n", "a", ["c"])], vec![(0, 0)]);
        let mut r = Relabeler::new();
        let seq = r.wl_relabel(&g, "loop", 2);
        assert_eq!(r.wl_raw(&seq, 1, 0), "a,a");
        assert_eq!(r.wl_raw(&seq, 2, 0), "a,a,a,a");
    }

    #[test]
    fn multiple_contexts_join_in_sorted_order() {
        let g = graph(vec![Node::new("n", "a", ["c2", "c1"])], vec![]);
        let mut r = Relabeler::new();
        let seq = r.contextual_relabel(&g, "multi-ctx", 0);
        assert_eq!(r.contextual_raw(&seq, 0, 0), "c1(+)a|c2(+)a");
    }

    #[test]
    fn intern_is_idempotent_injective_and_iteration_disjoint() {
        let mut d = LabelDictionary::new();
        let a0 = d.intern(0, "a");
        assert_eq!(d.intern(0, "a"), a0);
        assert_ne!(d.intern(1, "a"), a0);
        assert_ne!(d.intern(0, "b"), a0);
        assert_eq!(d.raw(a0), "a");
        assert_eq!(d.iteration_of(a0), 0);
        assert_eq!(d.count_at(0), 2);
        assert_eq!(d.count_at(1), 1);
    }

    #[test]
    fn dictionary_triples_form_a_bijection() {
        let mut r = Relabeler::new();
        for (i, g) in [fixtures::geinimi(), fixtures::yahoo_weather()].iter().enumerate() {
            r.contextual_relabel(g, &format!("g{i}"), 2);
        }
        for dict in [r.wl_dictionary(), r.contextual_dictionary()] {
            let mut by_key = HashSet::new();
            let mut by_code = HashSet::new();
            for (i, raw, code) in dict.iter() {
                assert!(by_key.insert((i, raw.to_owned())), "duplicate key ({i}, {raw})");
                assert!(by_code.insert(code), "duplicate code {code:?}");
            }
            assert_eq!(by_key.len(), dict.len());
            assert_eq!(by_code.len(), dict.len());
        }
    }

    #[test]
    fn wl_labels_are_context_blind_and_contextual_labels_are_not() {
        let nodes = |ctx: &str| {
            vec![
                Node::new("n1", "a", [ctx]),
                Node::new("n2", "b", ["c"]),
                Node::new("n3", "c", ["c"]),
            ]
        };
        let edges = vec![(0, 1), (1, 2), (2, 0)];
        let g1 = graph(nodes("c"), edges.clone());
        let g2 = graph(nodes("other"), edges);
        let mut r = Relabeler::new();
        let s1 = r.contextual_relabel(&g1, "g1", 3);
        let s2 = r.contextual_relabel(&g2, "g2", 3);
        for i in 0..=3 {
            for u in 0..3 {
                assert_eq!(s1.wl_code(i, u), s2.wl_code(i, u), "wl differs at ({i}, {u})");
            }
            // Contexts differ at n1 only, so the contextual label differs
            // there at every height and nowhere else.
            assert_ne!(s1.contextual_code(i, 0), s2.contextual_code(i, 0));
            assert_eq!(s1.contextual_code(i, 1), s2.contextual_code(i, 1));
            assert_eq!(s1.contextual_code(i, 2), s2.contextual_code(i, 2));
        }
    }

    #[test]
    fn relabeling_is_deterministic_across_runs() {
        let collect = || {
            let mut r = Relabeler::new();
            let gm = fixtures::geinimi();
            let gb = fixtures::yahoo_weather();
            let sm = r.contextual_relabel(&gm, "m", 2);
            let sb = r.contextual_relabel(&gb, "b", 2);
            let mut rows = Vec::new();
            for (seq, g) in [(&sm, &gm), (&sb, &gb)] {
                for i in 0..=2 {
                    for u in 0..g.node_count() {
                        rows.push((
                            seq.graph_id.clone(),
                            i,
                            u,
                            seq.wl_code(i, u),
                            seq.contextual_code(i, u),
                            r.contextual_raw(seq, i, u).to_owned(),
                        ));
                    }
                }
            }
            rows
        };
        assert_eq!(collect(), collect());
    }

    #[test]
    fn raw_multisets_are_invariant_under_node_permutation() {
        // Same graph declared in two different node orders.
        let g1 = graph(
            vec![
                Node::new("n1", "a", ["c1"]),
                Node::new("n2", "b", ["c2"]),
                Node::new("n3", "a", ["c1"]),
            ],
            vec![(0, 1), (1, 2), (0, 2)],
        );
        let g2 = graph(
            vec![
                Node::new("n3", "a", ["c1"]),
                Node::new("n1", "a", ["c1"]),
                Node::new("n2", "b", ["c2"]),
            ],
            vec![(1, 2), (2, 0), (1, 0)],
        );
        let mut r = Relabeler::new();
        let s1 = r.contextual_relabel(&g1, "g1", 3);
        let s2 = r.contextual_relabel(&g2, "g2", 3);
        for i in 0..=3 {
            let mut m1: Vec<&str> = (0..3).map(|u| r.contextual_raw(&s1, i, u)).collect();
            let mut m2: Vec<&str> = (0..3).map(|u| r.contextual_raw(&s2, i, u)).collect();
            m1.sort();
            m2.sort();
            assert_eq!(m1, m2, "sigma multiset differs at height {i}");
        }
    }

    #[test]
    fn equal_context_and_wl_label_imply_equal_contextual_label() {
        let g = graph(
            vec![
                Node::new("n1", "a", ["c"]),
                Node::new("n2", "a", ["c"]),
                Node::new("n3", "b", ["c"]),
            ],
            vec![(0, 2), (1, 2)],
        );
        let mut r = Relabeler::new();
        let s = r.contextual_relabel(&g, "g", 2);
        let mut seen: HashMap<(u32, LabelCode), LabelCode> = HashMap::new();
        for i in 0..=2 {
            for u in 0..3 {
                let key = (i as u32, s.wl_code(i, u));
                let gamma = s.contextual_code(i, u);
                if let Some(&prev) = seen.get(&key) {
                    assert_eq!(prev, gamma);
                } else {
                    seen.insert(key, gamma);
                }
            }
        }
        // n1 and n2 share context and label, hence share every gamma.
        for i in 0..=2 {
            assert_eq!(s.contextual_code(i, 0), s.contextual_code(i, 1));
        }
    }

    #[test]
    fn dump_lines_are_sorted_and_complete() {
        let g = fixtures::geinimi();
        let mut r = Relabeler::new();
        let seq = r.contextual_relabel(&g, "geinimi", 1);
        let mut buf = Vec::new();
        r.write_dump(&seq, &g, Mode::Contextual, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 6);
        assert_eq!(lines[0], "0 n1 user-unaware(+)getLatitude");
        assert!(lines.contains(&"1 n1 user-unaware(+)getLatitude,writeBytes"));

        let mut buf0 = Vec::new();
        let seq0 = r.contextual_relabel(&g, "geinimi", 0);
        r.write_dump(&seq0, &g, Mode::Contextual, &mut buf0).unwrap();
        assert_eq!(String::from_utf8(buf0).unwrap().lines().count(), g.node_count());
    }
}
