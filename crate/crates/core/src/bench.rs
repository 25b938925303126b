//! Runtime scaling and vocabulary growth measurements.
//!
//! Relabeling one graph is expected to scale linearly in the edge count per
//! iteration, so doubling edges at fixed height or adding iterations at a
//! fixed graph should change runtime roughly proportionally. [`run_scaling`]
//! measures this on seeded synthetic graphs (monotonic clock, two warm-up
//! runs, median of five measured runs) and fits a log-log slope across edge
//! counts. [`feature_growth`] tracks vocabulary size per height for both
//! label modes.

use std::io::Write;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::graph::Prg;
use crate::kernel::Vocabulary;
use crate::relabel::{Mode, Relabeler};
use crate::synth;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BenchError {
    #[error("invalid bench request: {0}")]
    Config(String),
}

/// One measured configuration. Stages that a run does not exercise stay at
/// zero seconds.
#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub h: usize,
    pub mode: Mode,
    pub corpus_size: usize,
    pub mean_edges: f64,
    pub vocab_size: usize,
    pub relabel_secs: f64,
    pub featurize_secs: f64,
    pub matrix_secs: f64,
    pub train_secs: f64,
    pub test_secs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Least-squares slope of `ln(relabel seconds)` against `ln(edges)`
    /// across the measured points; absent for `h = 0` or fewer than two
    /// points.
    pub loglog_slope: Option<f64>,
}

impl BenchReport {
    pub fn write_csv(&self, mut sink: impl Write) -> std::io::Result<()> {
        writeln!(
            sink,
            "h,mode,corpus_size,mean_edges,vocab_size,relabel_secs,featurize_secs,matrix_secs,train_secs,test_secs"
        )?;
        for r in &self.rows {
            writeln!(
                sink,
                "{},{},{},{},{},{},{},{},{},{}",
                r.h,
                r.mode,
                r.corpus_size,
                r.mean_edges,
                r.vocab_size,
                r.relabel_secs,
                r.featurize_secs,
                r.matrix_secs,
                r.train_secs,
                r.test_secs
            )?;
        }
        match self.loglog_slope {
            Some(s) => writeln!(sink, "# loglog_slope={s}"),
            None => writeln!(sink, "# loglog_slope=na"),
        }
    }

    pub fn write_json(&self, mut sink: impl Write) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).expect("report serialization");
        sink.write_all(text.as_bytes())?;
        sink.write_all(b"\n")
    }

    /// Whitespace-separated `edges relabel_secs` pairs, one per row; plots
    /// directly with gnuplot.
    pub fn write_gnuplot(&self, mut sink: impl Write) -> std::io::Result<()> {
        writeln!(sink, "# edges relabel_secs")?;
        for r in &self.rows {
            writeln!(sink, "{} {}", r.mean_edges, r.relabel_secs)?;
        }
        Ok(())
    }
}

/// Median wall-clock seconds of a full contextual relabeling of `g` at
/// height `h`, over `runs` measured runs after `warmups` discarded ones. Each
/// run uses a fresh relabeler; the timed region is single-threaded.
pub fn median_relabel_seconds(g: &Prg, h: usize, warmups: usize, runs: usize) -> f64 {
    let one = || {
        let mut relabeler = Relabeler::new();
        std::hint::black_box(relabeler.contextual_relabel(g, "bench", h));
    };
    for _ in 0..warmups {
        one();
    }
    let mut times: Vec<f64> = (0..runs.max(1))
        .map(|_| {
            let start = Instant::now();
            one();
            start.elapsed().as_secs_f64()
        })
        .collect();
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    times[times.len() / 2]
}

/// Generates one seeded graph per edge count (nodes scaled at edge factor
/// 2.1) and times contextual relabeling at height `h` for each.
pub fn run_scaling(seeds: &[u64], edge_counts: &[u64], h: usize) -> Result<BenchReport, BenchError> {
    if seeds.is_empty() {
        return Err(BenchError::Config("need at least one seed".into()));
    }
    if edge_counts.is_empty() {
        return Err(BenchError::Config("need at least one edge count".into()));
    }
    if edge_counts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(BenchError::Config("edge counts must be strictly increasing".into()));
    }

    const EDGE_FACTOR: f64 = 2.1;
    let mut rows = Vec::with_capacity(edge_counts.len());
    let mut points = Vec::new();
    for (j, &edges) in edge_counts.iter().enumerate() {
        let seed = seeds[j % seeds.len()];
        let nodes = ((edges as f64 / EDGE_FACTOR).round() as usize).max(2);
        let g = synth::background_graph(seed, nodes, EDGE_FACTOR);
        let secs = median_relabel_seconds(&g, h, 2, 5);

        let mut relabeler = Relabeler::new();
        relabeler.contextual_relabel(&g, "bench", h);
        let vocab_size = Vocabulary::from_relabeler(&relabeler, Mode::Contextual).len();

        points.push((g.edge_count() as f64, secs));
        rows.push(BenchRow {
            h,
            mode: Mode::Contextual,
            corpus_size: 1,
            mean_edges: g.edge_count() as f64,
            vocab_size,
            relabel_secs: secs,
            featurize_secs: 0.0,
            matrix_secs: 0.0,
            train_secs: 0.0,
            test_secs: 0.0,
        });
    }

    let loglog_slope = if h == 0 || points.len() < 2 {
        None
    } else {
        Some(least_squares_slope(
            &points.iter().map(|&(e, _)| e.ln()).collect::<Vec<_>>(),
            &points.iter().map(|&(_, t)| t.ln()).collect::<Vec<_>>(),
        ))
    };
    Ok(BenchReport { rows, loglog_slope })
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

/// Cumulative vocabulary sizes per height for one corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeatureGrowthRow {
    pub h: usize,
    pub wl_vocab: usize,
    pub contextual_vocab: usize,
}

/// Relabels the corpus once up to `h_max` and reports how many distinct
/// `(iteration, raw)` features exist up to each height, for both modes. Both
/// columns are non-decreasing in `h`.
pub fn feature_growth(corpus: &[Prg], h_max: usize) -> Vec<FeatureGrowthRow> {
    let mut relabeler = Relabeler::new();
    for (k, g) in corpus.iter().enumerate() {
        relabeler.contextual_relabel(g, &format!("g{k:04}"), h_max);
    }
    let mut rows = Vec::with_capacity(h_max + 1);
    let (mut wl_total, mut ctx_total) = (0usize, 0usize);
    for h in 0..=h_max {
        wl_total += relabeler.wl_dictionary().count_at(h);
        ctx_total += relabeler.contextual_dictionary().count_at(h);
        rows.push(FeatureGrowthRow { h, wl_vocab: wl_total, contextual_vocab: ctx_total });
    }
    rows
}

pub fn write_growth_csv(rows: &[FeatureGrowthRow], mut sink: impl Write) -> std::io::Result<()> {
    writeln!(sink, "h,wl_vocab,contextual_vocab")?;
    for r in rows {
        writeln!(sink, "{},{},{}", r.h, r.wl_vocab, r.contextual_vocab)?;
    }
    Ok(())
}
