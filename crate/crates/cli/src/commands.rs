//! The six subcommands. Every argument is optional at the clap layer so a
//! `--config` file can supply it; [`crate::config`] merges the two sources
//! (flags win) and enforces per-command key allow-lists.

use std::path::{Path, PathBuf};

use clap::Args;

use hierflow::arrayio::{
    read_series, write_array3, write_mask_csv, write_matrix_csv, write_series,
};
use hierflow::graph::{Graph, GraphFormat};
use hierflow::hier::{build_mask_set, hier_score, MaskSource};
use hierflow::model::{forward, ForwardOptions};
use hierflow::synth::{random_community, synth_series};
use hierflow::tree::{
    exhaustive_min_2level, minimize, minimize_traced, structural_entropy, EncodingTree,
    MinimizeConfig, Operator,
};
use hierflow::weights::{load_bundle, seeded_weights, ModelConfig};
use hierflow::{Error, Result};

use crate::config::{require, FileConfig};

// ---------------------------------------------------------------------------
// Shared ingestion helpers.
// ---------------------------------------------------------------------------

fn parse_format(text: &str) -> Result<GraphFormat> {
    match text {
        "edge-list" => Ok(GraphFormat::EdgeList),
        "adjacency" => Ok(GraphFormat::AdjacencyMatrix),
        other => Err(Error::Precondition(format!(
            "graph format must be `edge-list` or `adjacency`, found {other:?}"
        ))),
    }
}

/// The graph-ingestion flags shared by most commands, resolved together.
struct GraphInput {
    path: PathBuf,
    format: GraphFormat,
    directed: bool,
}

impl GraphInput {
    fn resolve(
        cfg: &FileConfig,
        graph: Option<PathBuf>,
        format: Option<String>,
        directed: bool,
    ) -> Result<Self> {
        let path = require(cfg.resolve(graph, "graph")?, "graph")?;
        let format = parse_format(
            cfg.resolve(format, "graph-format")?
                .as_deref()
                .unwrap_or("edge-list"),
        )?;
        let directed = cfg.resolve_switch(directed, "directed")?;
        Ok(Self {
            path,
            format,
            directed,
        })
    }

    fn load(&self) -> Result<Graph> {
        Graph::load(&self.path, self.format, self.directed, None)
    }
}

fn load_tree(path: &Path, g: &Graph) -> Result<EncodingTree> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let tree = EncodingTree::from_json_str(&text)?;
    let report = tree.validate(g);
    if !report.ok() {
        return Err(Error::InvalidTree(format!(
            "tree at {} does not fit the graph: {report}",
            path.display()
        )));
    }
    Ok(tree)
}

// ---------------------------------------------------------------------------
// se — structural entropy of a graph under a tree.
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct SeArgs {
    /// Graph file (see --graph-format).
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Graph file layout: `edge-list` (src,dst,weight with header) or
    /// `adjacency` (dense matrix CSV).
    #[arg(long)]
    graph_format: Option<String>,
    /// Treat the graph file as directed (entropy symmetrizes internally).
    #[arg(long)]
    directed: bool,
    /// Encoding-tree JSON; the flat tree is assumed when absent.
    #[arg(long)]
    tree: Option<PathBuf>,
}

pub fn cmd_se(args: SeArgs, cfg: &FileConfig) -> Result<()> {
    cfg.restrict(&["graph", "graph-format", "directed", "tree"])?;
    let input = GraphInput::resolve(cfg, args.graph, args.graph_format, args.directed)?;
    let g = input.load()?;
    let tree = match cfg.resolve(args.tree, "tree")? {
        Some(path) => load_tree(&path, &g)?,
        None => EncodingTree::flat(&g),
    };
    let h = structural_entropy(&g, &tree)?;
    println!("{h:.9}");
    Ok(())
}

// ---------------------------------------------------------------------------
// optimize — greedy structural-entropy minimization.
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    /// Graph file (see --graph-format).
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Graph file layout: `edge-list` or `adjacency`.
    #[arg(long)]
    graph_format: Option<String>,
    /// Treat the graph file as directed.
    #[arg(long)]
    directed: bool,
    /// Where to write the optimized tree (JSON).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Cap on tree height (leaf depth in edges).
    #[arg(long)]
    max_height: Option<usize>,
    /// Optional CSV of the per-iteration entropy trace.
    #[arg(long)]
    trace: Option<PathBuf>,
}

fn operator_name(op: Operator) -> &'static str {
    match op {
        Operator::Combine => "combine",
        Operator::Merge => "merge",
    }
}

pub fn cmd_optimize(args: OptimizeArgs, cfg: &FileConfig) -> Result<()> {
    cfg.restrict(&["graph", "graph-format", "directed", "out", "max-height", "trace"])?;
    let input = GraphInput::resolve(cfg, args.graph, args.graph_format, args.directed)?;
    let out = require(cfg.resolve(args.out, "out")?, "out")?;
    let max_height = cfg.resolve(args.max_height, "max-height")?;
    let trace_path = cfg.resolve(args.trace, "trace")?;

    let g = input.load()?;
    let minimize_cfg = MinimizeConfig {
        max_height,
        ..MinimizeConfig::default()
    };
    let (tree, trace) = minimize_traced(&g, &minimize_cfg)?;
    std::fs::write(&out, tree.to_json_string()).map_err(|e| Error::io(&out, e))?;

    if let Some(path) = trace_path {
        let mut text = String::from("iteration,operator,a,b,entropy\n");
        for step in &trace {
            text.push_str(&format!(
                "{},{},{},{},{:.9}\n",
                step.iteration,
                operator_name(step.operator),
                step.a,
                step.b,
                step.entropy
            ));
        }
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    }

    let h = structural_entropy(&g, &tree)?;
    println!("final-entropy {h:.9}");
    Ok(())
}

// ---------------------------------------------------------------------------
// artifacts — masks, correlation scores, and the head manifest.
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct ArtifactsArgs {
    /// Graph file (see --graph-format).
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Graph file layout: `edge-list` or `adjacency`.
    #[arg(long)]
    graph_format: Option<String>,
    /// Treat the graph file as directed.
    #[arg(long)]
    directed: bool,
    /// Encoding-tree JSON for the graph.
    #[arg(long)]
    tree: Option<PathBuf>,
    /// Attention-head budget; must exceed the mask count.
    #[arg(long)]
    heads: Option<usize>,
    /// Output directory for mask_{i}.csv, scores.csv, and manifest.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn source_label(source: MaskSource) -> String {
    match source {
        MaskSource::TreeLevel(l) => format!("tree-level-{l}"),
        MaskSource::Adjacency => "adjacency".to_string(),
    }
}

pub fn cmd_artifacts(args: ArtifactsArgs, cfg: &FileConfig) -> Result<()> {
    cfg.restrict(&["graph", "graph-format", "directed", "tree", "heads", "out"])?;
    let input = GraphInput::resolve(cfg, args.graph, args.graph_format, args.directed)?;
    let tree_path = require(cfg.resolve(args.tree, "tree")?, "tree")?;
    let heads = require(cfg.resolve(args.heads, "heads")?, "heads")?;
    let out = require(cfg.resolve(args.out, "out")?, "out")?;

    let g = input.load()?;
    let tree = load_tree(&tree_path, &g)?;
    let set = build_mask_set(&tree, &g, heads)?;
    let scores = hier_score(&g, &tree)?;

    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    let mut mask_entries = Vec::new();
    for (idx, mask) in set.masks.iter().enumerate() {
        let file = format!("mask_{idx}.csv");
        write_mask_csv(&out.join(&file), &mask.allow)?;
        mask_entries.push(serde_json::json!({
            "file": file,
            "source": source_label(mask.source),
        }));
    }
    write_matrix_csv(&out.join("scores.csv"), &scores.s)?;

    let manifest = serde_json::json!({
        "heads": heads,
        "masks": mask_entries,
        "head_assignment": set.head_assignment,
    });
    let path = out.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// forward — run the model once and write the prediction container.
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct ForwardArgs {
    /// Model configuration JSON.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Graph file (see --graph-format).
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Graph file layout: `edge-list` or `adjacency`.
    #[arg(long)]
    graph_format: Option<String>,
    /// Treat the graph file as directed.
    #[arg(long)]
    directed: bool,
    /// Encoding-tree JSON for the graph.
    #[arg(long)]
    tree: Option<PathBuf>,
    /// Input series container (expects its .meta.json sidecar).
    #[arg(long)]
    series: Option<PathBuf>,
    /// Weight-bundle directory; seeded weights are derived from the model
    /// configuration when absent.
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Where to write the prediction container.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write attention_layer{l}_head{h}.csv next to the prediction.
    #[arg(long)]
    dump_attention: bool,
    /// Run sequentially with internal invariant checks enabled.
    #[arg(long = "assert")]
    assert_invariants: bool,
    /// Override the seed recorded in the model configuration.
    #[arg(long)]
    seed: Option<u64>,
}

pub fn cmd_forward(args: ForwardArgs, cfg: &FileConfig) -> Result<()> {
    cfg.restrict(&[
        "model",
        "graph",
        "graph-format",
        "directed",
        "tree",
        "series",
        "weights",
        "out",
        "dump-attention",
        "assert",
        "seed",
    ])?;
    let model_path = require(cfg.resolve(args.model, "model")?, "model")?;
    let input = GraphInput::resolve(cfg, args.graph, args.graph_format, args.directed)?;
    let tree_path = require(cfg.resolve(args.tree, "tree")?, "tree")?;
    let series_path = require(cfg.resolve(args.series, "series")?, "series")?;
    let weights_dir = cfg.resolve(args.weights, "weights")?;
    let out = require(cfg.resolve(args.out, "out")?, "out")?;
    let dump_attention = cfg.resolve_switch(args.dump_attention, "dump-attention")?;
    let assert_invariants = cfg.resolve_switch(args.assert_invariants, "assert")?;
    let seed = cfg.resolve(args.seed, "seed")?;

    let text = std::fs::read_to_string(&model_path).map_err(|e| Error::io(&model_path, e))?;
    let mut model: ModelConfig = serde_json::from_str(&text)
        .map_err(|e| Error::parse(&model_path, e.line(), e.to_string()))?;
    if let Some(seed) = seed {
        model.seed = seed;
    }

    let weights = match weights_dir {
        Some(dir) => {
            let bundle = load_bundle(&dir)?;
            if bundle.config != model {
                return Err(Error::Precondition(format!(
                    "weight bundle at {} was built for a different model configuration",
                    dir.display()
                )));
            }
            bundle
        }
        None => seeded_weights(&model)?,
    };

    let g = input.load()?;
    let tree = load_tree(&tree_path, &g)?;
    let series = read_series(&series_path)?;

    let opts = ForwardOptions {
        dump_attention,
        assert_invariants,
    };
    let result = forward(&weights, &series, &g, &tree, &opts)?;
    write_array3(&out, &result.prediction)?;

    if dump_attention {
        let dir = out.parent().filter(|p| !p.as_os_str().is_empty());
        let dir = dir.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
        for dump in &result.attention {
            let file = dir.join(format!(
                "attention_layer{}_head{}.csv",
                dump.layer, dump.head
            ));
            write_matrix_csv(&file, &dump.mean_weights)?;
        }
    }

    println!("hidden-length {}", result.hidden_len);
    Ok(())
}

// ---------------------------------------------------------------------------
// synth — deterministic community-graph and series fixtures.
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Fixture family; `random-community` is the only one.
    #[arg(long)]
    kind: Option<String>,
    /// Vertex count.
    #[arg(long)]
    nodes: Option<usize>,
    /// Community count (contiguous blocks).
    #[arg(long)]
    communities: Option<usize>,
    /// Within-community edge probability (default 0.8).
    #[arg(long)]
    p_in: Option<f64>,
    /// Cross-community edge probability (default 0.1).
    #[arg(long)]
    p_out: Option<f64>,
    /// Series length in steps (default 288: one day at 5-minute steps).
    #[arg(long)]
    t_len: Option<usize>,
    /// Channels per node (default 1).
    #[arg(long)]
    channels: Option<usize>,
    /// Gaussian noise level on the series (default 0.1).
    #[arg(long)]
    sigma: Option<f64>,
    /// Minutes between series steps (default 5).
    #[arg(long)]
    interval: Option<u32>,
    /// Unix timestamp of the first step (default 345600, a Monday 00:00).
    #[arg(long)]
    start: Option<i64>,
    /// Seed for both the graph and the series (default 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for graph.csv, series.hfa (+sidecar), manifest.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn cmd_synth(args: SynthArgs, cfg: &FileConfig) -> Result<()> {
    cfg.restrict(&[
        "kind",
        "nodes",
        "communities",
        "p-in",
        "p-out",
        "t-len",
        "channels",
        "sigma",
        "interval",
        "start",
        "seed",
        "out",
    ])?;
    let kind = cfg
        .resolve(args.kind, "kind")?
        .unwrap_or_else(|| "random-community".to_string());
    if kind != "random-community" {
        return Err(Error::Precondition(format!(
            "unknown fixture kind {kind:?}; only `random-community` exists"
        )));
    }
    let nodes = require(cfg.resolve(args.nodes, "nodes")?, "nodes")?;
    let communities = require(cfg.resolve(args.communities, "communities")?, "communities")?;
    let p_in = cfg.resolve(args.p_in, "p-in")?.unwrap_or(0.8);
    let p_out = cfg.resolve(args.p_out, "p-out")?.unwrap_or(0.1);
    let t_len = cfg.resolve(args.t_len, "t-len")?.unwrap_or(288);
    let channels = cfg.resolve(args.channels, "channels")?.unwrap_or(1);
    let sigma = cfg.resolve(args.sigma, "sigma")?.unwrap_or(0.1);
    let interval = cfg.resolve(args.interval, "interval")?.unwrap_or(5);
    let start = cfg.resolve(args.start, "start")?.unwrap_or(345_600);
    let seed = cfg.resolve(args.seed, "seed")?.unwrap_or(0);
    let out = require(cfg.resolve(args.out, "out")?, "out")?;

    let (g, assignment) = random_community(nodes, communities, p_in, p_out, seed)?;
    let series = synth_series(&assignment, t_len, channels, interval, start, seed, sigma)?;

    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    g.write_edge_list_csv(out.join("graph.csv"))?;
    write_series(&out.join("series.hfa"), &series)?;

    let manifest = serde_json::json!({
        "kind": kind,
        "nodes": nodes,
        "communities": communities,
        "p_in": p_in,
        "p_out": p_out,
        "t_len": t_len,
        "channels": channels,
        "sigma": sigma,
        "interval_minutes": interval,
        "start_timestamp": start,
        "seed": seed,
        "assignment": assignment,
    });
    let path = out.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// oracle — greedy vs exhaustive two-level optimum.
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Graph file (see --graph-format); at most ten vertices.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Graph file layout: `edge-list` or `adjacency`.
    #[arg(long)]
    graph_format: Option<String>,
    /// Treat the graph file as directed.
    #[arg(long)]
    directed: bool,
}

pub fn cmd_oracle(args: OracleArgs, cfg: &FileConfig) -> Result<()> {
    cfg.restrict(&["graph", "graph-format", "directed"])?;
    let input = GraphInput::resolve(cfg, args.graph, args.graph_format, args.directed)?;
    let g = input.load()?;
    let greedy = structural_entropy(&g, &minimize(&g, &MinimizeConfig::default())?)?;
    let oracle = structural_entropy(&g, &exhaustive_min_2level(&g)?)?;
    println!("greedy {greedy:.9}");
    println!("oracle {oracle:.9}");
    println!("match {}", (greedy - oracle).abs() <= 1e-9);
    Ok(())
}
