//! The five subcommands. Each one reads its inputs, drives the library, and
//! returns a [`RunRecord`] listing the files it wrote; `main` adds the wall
//! time and `run.json`.

use std::collections::HashMap;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde_json::{json, Value};

use regdec::distance::DistanceMatrix;
use regdec::generate::{planted_partition, preferential_attachment, sbm, PlantedParams, SbmParams};
use regdec::graph::{parse_edge_list, ComponentMode, Graph, NodeId};
use regdec::partition::{
    expand_partition, misclassification_rate, read_labels_csv, Labeling, PartialLabeling,
};
use regdec::rd::{classify, regular_decomposition, select_k, RdConfig};
use regdec::sample::{betweenness_references, read_node_list_csv, uniform_references};
use regdec::theory::{above_ks_threshold, cost_gap, solve_distances, spectral_quantities};

use crate::record::{csv_bytes, Outputs, RunRecord};
use crate::{DecomposeArgs, GenerateArgs, Model, SummarizeArgs, SweepArgs, TheoryArgs};

fn load_graph(path: &Path, directed: bool) -> Result<Graph> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let (graph, _) = parse_edge_list(BufReader::new(file), directed)?;
    Ok(graph)
}

fn read_csv_ids(path: &Path) -> Result<Vec<String>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(read_node_list_csv(BufReader::new(file))?)
}

fn read_truth_pairs(path: &Path) -> Result<Vec<(String, u32)>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(read_labels_csv(BufReader::new(file))?)
}

/// Maps external IDs to node indices, reporting the first few misses.
fn resolve_ids(graph: &Graph, ids: &[String], what: &str) -> Result<Vec<NodeId>> {
    let index = graph.id_index();
    let mut nodes = Vec::with_capacity(ids.len());
    let mut unknown = Vec::new();
    for id in ids {
        match index.get(id.as_str()) {
            Some(&u) => nodes.push(u),
            None => unknown.push(id.clone()),
        }
    }
    if !unknown.is_empty() {
        let shown = unknown.len().min(5);
        bail!("{} node IDs in {what} are missing from the graph: {}", unknown.len(), unknown[..shown].join(", "));
    }
    Ok(nodes)
}

fn require<T: Copy>(value: Option<T>, flag: &str, model: &str) -> Result<T> {
    value.with_context(|| format!("{flag} is required for model {model}"))
}

pub fn generate(args: &GenerateArgs) -> Result<RunRecord> {
    let seed = args.common.seed;
    let (graph, truth, parameters) = match args.model {
        Model::Planted => {
            let n = require(args.n, "--n", "planted")?;
            let a = require(args.a, "--a", "planted")?;
            let b = require(args.b, "--b", "planted")?;
            let (g, z) = planted_partition(&PlantedParams { n, a, b }, seed)?;
            (g, Some(z), json!({ "model": "planted", "n": n, "a": a, "b": b }))
        }
        Model::Sbm => {
            let k = args.sizes.len();
            if k == 0 {
                bail!("--sizes is required for model sbm");
            }
            if args.probs.len() != k * k {
                bail!("--probs must list {} row-major entries for {k} blocks, got {}", k * k, args.probs.len());
            }
            let params = SbmParams {
                block_sizes: args.sizes.clone(),
                link_probs: args.probs.chunks(k).map(|row| row.to_vec()).collect(),
            };
            let (g, z) = sbm(&params, seed)?;
            (g, Some(z), json!({ "model": "sbm", "sizes": args.sizes, "probs": args.probs }))
        }
        Model::Pa => {
            let n = require(args.n, "--n", "pa")?;
            let g = preferential_attachment(n, args.links, seed)?;
            (g, None, json!({ "model": "pa", "n": n, "links": args.links }))
        }
    };

    if graph.edge_count() == 0 {
        eprintln!("warning: generated graph has no edges");
    }

    let mut out = Outputs::create(&args.out)?;
    let mut buf = Vec::new();
    graph.write_edge_list(&mut buf)?;
    out.write("graph.edges", &buf)?;

    let mut metrics = serde_json::Map::new();
    metrics.insert("nodes".into(), json!(graph.node_count()));
    metrics.insert("edges".into(), json!(graph.edge_count()));
    if let Some(z) = &truth {
        let mut buf = Vec::new();
        z.write_csv(graph.original_ids(), &mut buf)?;
        out.write("labels.csv", &buf)?;
        metrics.insert("k".into(), json!(z.k()));
    }

    Ok(RunRecord {
        command: "generate",
        parameters,
        seed,
        wall_time_seconds: 0.0,
        outputs: out.into_names(),
        metrics: Value::Object(metrics),
    })
}

enum RefsSpec {
    All,
    Uniform(usize),
    Betweenness { pairs: usize, m: usize },
    File(PathBuf),
}

fn parse_refs_spec(spec: &str) -> Result<RefsSpec> {
    if spec == "all" {
        return Ok(RefsSpec::All);
    }
    if let Some(rest) = spec.strip_prefix("uniform:") {
        return Ok(RefsSpec::Uniform(rest.parse().context("reference count in --refs")?));
    }
    if let Some(rest) = spec.strip_prefix("betweenness:") {
        let (pairs, m) = rest
            .split_once(',')
            .context("--refs betweenness takes <pairs>,<m>")?;
        return Ok(RefsSpec::Betweenness {
            pairs: pairs.parse().context("pair count in --refs")?,
            m: m.parse().context("reference count in --refs")?,
        });
    }
    if let Some(rest) = spec.strip_prefix("file:") {
        return Ok(RefsSpec::File(rest.into()));
    }
    bail!("invalid --refs spec {spec:?}: expected all, uniform:<m>, betweenness:<pairs>,<m>, or file:<path>");
}

enum TargetsSpec {
    All,
    Sample(usize),
    File(PathBuf),
}

fn parse_targets_spec(spec: &str) -> Result<TargetsSpec> {
    if spec == "all" {
        return Ok(TargetsSpec::All);
    }
    if let Some(rest) = spec.strip_prefix("sample:") {
        return Ok(TargetsSpec::Sample(rest.parse().context("target count in --targets")?));
    }
    if let Some(rest) = spec.strip_prefix("file:") {
        return Ok(TargetsSpec::File(rest.into()));
    }
    bail!("invalid --targets spec {spec:?}: expected all, sample:<n>, or file:<path>");
}

fn build_refs(giant: &Graph, spec: &str, seed: u64) -> Result<(Vec<NodeId>, Value)> {
    let n = giant.node_count();
    match parse_refs_spec(spec)? {
        RefsSpec::All => {
            Ok(((0..n as NodeId).collect(), json!({ "strategy": "all", "size": n })))
        }
        RefsSpec::Uniform(m) => {
            let set = uniform_references(giant, m, seed)?;
            let prov = serde_json::from_str(&set.provenance_json())?;
            Ok((set.nodes, prov))
        }
        RefsSpec::Betweenness { pairs, m } => {
            let set = betweenness_references(giant, pairs, m, seed)?;
            let prov = serde_json::from_str(&set.provenance_json())?;
            Ok((set.nodes, prov))
        }
        RefsSpec::File(path) => {
            let ids = read_csv_ids(&path)?;
            if ids.is_empty() {
                bail!("reference list {} is empty", path.display());
            }
            let nodes = resolve_ids(giant, &ids, "the reference list (references must sit in the giant component)")?;
            let prov = json!({ "strategy": "file", "path": path.display().to_string(), "size": nodes.len() });
            Ok((nodes, prov))
        }
    }
}

fn build_targets(giant: &Graph, spec: &str, seed: u64) -> Result<Vec<NodeId>> {
    let n = giant.node_count();
    match parse_targets_spec(spec)? {
        TargetsSpec::All => Ok((0..n as NodeId).collect()),
        // offset the seed so the target draw is a different stream than the
        // reference draw
        TargetsSpec::Sample(t) => Ok(uniform_references(giant, t, seed.wrapping_add(1))?.nodes),
        TargetsSpec::File(path) => {
            let ids = read_csv_ids(&path)?;
            if ids.is_empty() {
                bail!("target list {} is empty", path.display());
            }
            resolve_ids(giant, &ids, "the target list (targets must sit in the giant component)")
        }
    }
}

fn score_against_truth(giant: &Graph, groups: &[Option<u32>], k: u32, path: &Path) -> Result<f64> {
    let pairs = read_truth_pairs(path)?;
    let map: HashMap<&str, u32> = pairs.iter().map(|(id, g)| (id.as_str(), *g)).collect();
    let mut truth_groups = Vec::with_capacity(groups.len());
    for u in 0..giant.node_count() {
        let id = giant.original_id(u as NodeId);
        let g = map
            .get(id)
            .with_context(|| format!("no ground-truth label for node {id} in {}", path.display()))?;
        truth_groups.push(*g);
    }
    let k_truth = truth_groups.iter().copied().max().unwrap_or(0) + 1;
    let truth = Labeling::new(truth_groups, k_truth)?;
    let predicted: Vec<u32> = groups.iter().map(|g| g.expect("component fully labeled")).collect();
    Ok(misclassification_rate(&Labeling::new(predicted, k)?, &truth)?)
}

pub fn decompose(args: &DecomposeArgs) -> Result<RunRecord> {
    let seed = args.common.seed;
    let graph = load_graph(&args.graph, args.directed)?;
    let mode = if args.directed { ComponentMode::Strong } else { ComponentMode::Weak };
    let (giant, old_of) = graph.giant_component(mode)?;
    let n = giant.node_count();
    let all_nodes: Vec<NodeId> = (0..n as NodeId).collect();

    let (ref_nodes, provenance) = build_refs(&giant, &args.refs, seed)?;
    let targets = build_targets(&giant, &args.targets, seed)?;

    // one BFS sweep serves both the fit and the later classification
    let d_full = DistanceMatrix::compute(&giant, &ref_nodes, &all_nodes)?;
    let fit_rows: Vec<Vec<u32>> = (0..ref_nodes.len())
        .map(|i| {
            let row = d_full.row(i);
            targets.iter().map(|&t| row[t as usize]).collect()
        })
        .collect();
    let d_fit = DistanceMatrix::from_rows(&fit_rows)?;

    let base = RdConfig {
        s_max: args.restarts,
        t_max: args.iters,
        epsilon_floor: args.epsilon_floor,
        ..RdConfig::new(1)
    };
    let (model, curve, non_monotone) = match (args.k, args.k_max) {
        (Some(k), None) => {
            let model = regular_decomposition(&d_fit, &RdConfig { k, ..base }, seed)?;
            let curve = vec![(k, model.cost)];
            (model, curve, None)
        }
        (None, Some(k_max)) => {
            let sel = select_k(&d_fit, k_max, &base, args.tau, seed)?;
            let curve: Vec<(u32, f64)> = (1..=k_max).zip(sel.curve.iter().copied()).collect();
            let idx = (sel.k_star - 1) as usize;
            let model = sel.models.into_iter().nth(idx).expect("selected model exists");
            (model, curve, Some(sel.non_monotone))
        }
        _ => unreachable!("exactly one of --k / --k-max is enforced at parse time"),
    };
    let k = model.labeling.k();
    let cfg_used = RdConfig { k, ..base };

    // targets keep their fitted labels; the rest of the component is
    // classified against the fitted means
    let mut giant_groups: Vec<Option<u32>> = vec![None; n];
    for (j, &t) in targets.iter().enumerate() {
        giant_groups[t as usize] = Some(model.labeling.group_of(j as NodeId));
    }
    for u in 0..n {
        if giant_groups[u].is_none() {
            giant_groups[u] = Some(classify(&d_full.column(u), &model.means)?);
        }
    }

    let misclassification = match &args.truth {
        Some(path) => Some(score_against_truth(&giant, &giant_groups, k, path)?),
        None => None,
    };

    // carry the component's labels back to the original node set, then
    // optionally let them spill onto unlabeled neighbors
    let mut full_groups: Vec<Option<u32>> = vec![None; graph.node_count()];
    for (new, &old) in old_of.iter().enumerate() {
        full_groups[old as usize] = giant_groups[new];
    }
    let mut labeled = PartialLabeling::new(full_groups, k)?;
    if args.expand {
        labeled = expand_partition(&graph, &labeled)?;
    }

    let mut out = Outputs::create(&args.out)?;
    out.write(
        "refs.csv",
        &csv_bytes(|w| {
            w.write_record(["node_id"])?;
            for &u in &ref_nodes {
                w.write_record([giant.original_id(u)])?;
            }
            Ok(())
        })?,
    )?;
    out.write_json("refs.json", &provenance)?;

    out.write(
        "labeling.csv",
        &csv_bytes(|w| {
            w.write_record(["node_id", "group"])?;
            for u in 0..graph.node_count() as NodeId {
                if let Some(g) = labeled.group_of(u) {
                    let g = g.to_string();
                    w.write_record([graph.original_id(u), g.as_str()])?;
                }
            }
            Ok(())
        })?,
    )?;

    let target_ids: Vec<String> =
        targets.iter().map(|&t| giant.original_id(t).to_string()).collect();
    out.write_json("model.json", &model.to_json(&target_ids, &cfg_used)?)?;

    out.write(
        "cost_curve.csv",
        &csv_bytes(|w| {
            w.write_record(["k", "cost"])?;
            for &(kk, cost) in &curve {
                w.write_record([kk.to_string(), cost.to_string()])?;
            }
            Ok(())
        })?,
    )?;

    let mut metrics = serde_json::Map::new();
    metrics.insert("k".into(), json!(k));
    metrics.insert("cost".into(), json!(model.cost));
    metrics.insert("graph_nodes".into(), json!(graph.node_count()));
    metrics.insert("graph_edges".into(), json!(graph.edge_count()));
    metrics.insert("giant_nodes".into(), json!(n));
    metrics.insert("labeled_nodes".into(), json!(labeled.labeled_count()));
    if let Some(err) = misclassification {
        metrics.insert("misclassification".into(), json!(err));
    }
    if let Some(nm) = non_monotone {
        metrics.insert("non_monotone".into(), json!(nm));
    }

    let parameters = json!({
        "graph": args.graph.display().to_string(),
        "directed": args.directed,
        "k": args.k,
        "k_max": args.k_max,
        "restarts": args.restarts,
        "iters": args.iters,
        "refs": args.refs,
        "targets": args.targets,
        "expand": args.expand,
        "tau": args.tau,
        "epsilon_floor": args.epsilon_floor,
        "truth": args.truth.as_ref().map(|p| p.display().to_string()),
    });

    Ok(RunRecord {
        command: "decompose",
        parameters,
        seed,
        wall_time_seconds: 0.0,
        outputs: out.into_names(),
        metrics: Value::Object(metrics),
    })
}

pub fn sweep_refs(args: &SweepArgs) -> Result<RunRecord> {
    if args.m_list.is_empty() || args.target_sizes.is_empty() || args.trials == 0 {
        bail!("--m-list, --target-sizes and --trials must all be nonempty");
    }
    let seed = args.common.seed;
    let graph = load_graph(&args.graph, args.directed)?;
    let mode = if args.directed { ComponentMode::Strong } else { ComponentMode::Weak };
    let (giant, _) = graph.giant_component(mode)?;
    let n = giant.node_count();

    let pairs = read_truth_pairs(&args.labels)?;
    let map: HashMap<&str, u32> = pairs.iter().map(|(id, g)| (id.as_str(), *g)).collect();
    let mut truth_all = Vec::with_capacity(n);
    for u in 0..n {
        let id = giant.original_id(u as NodeId);
        let g = map
            .get(id)
            .with_context(|| format!("no ground-truth label for node {id} in {}", args.labels.display()))?;
        truth_all.push(*g);
    }
    let k_truth = truth_all.iter().copied().max().unwrap_or(0) + 1;

    let cfg = RdConfig {
        s_max: args.restarts,
        t_max: args.iters,
        epsilon_floor: args.epsilon_floor,
        ..RdConfig::new(args.k)
    };

    let mut rows: Vec<(usize, usize, u64, f64)> = Vec::new();
    let mut run_index: u64 = 0;
    for &m in &args.m_list {
        for &n_targets in &args.target_sizes {
            for trial in 0..args.trials {
                // three disjoint streams per run: model restarts, the
                // reference draw, and the target draw
                let s = seed.wrapping_add(run_index.wrapping_mul(3));
                let refs = uniform_references(&giant, m, s.wrapping_add(1))?.nodes;
                let targets = uniform_references(&giant, n_targets, s.wrapping_add(2))?.nodes;
                let d = DistanceMatrix::compute(&giant, &refs, &targets)?;
                let model = regular_decomposition(&d, &cfg, s)?;
                let truth_groups: Vec<u32> =
                    targets.iter().map(|&t| truth_all[t as usize]).collect();
                let truth = Labeling::new(truth_groups, k_truth)?;
                let error = misclassification_rate(&model.labeling, &truth)?;
                rows.push((m, n_targets, trial, error));
                run_index += 1;
            }
        }
    }

    let mut out = Outputs::create(&args.out)?;
    out.write(
        "sweep.csv",
        &csv_bytes(|w| {
            w.write_record(["m", "n_targets", "trial", "error"])?;
            for &(m, n_targets, trial, error) in &rows {
                w.write_record([
                    m.to_string(),
                    n_targets.to_string(),
                    trial.to_string(),
                    error.to_string(),
                ])?;
            }
            Ok(())
        })?,
    )?;

    let mean_error = rows.iter().map(|r| r.3).sum::<f64>() / rows.len() as f64;
    Ok(RunRecord {
        command: "sweep-refs",
        parameters: json!({
            "graph": args.graph.display().to_string(),
            "directed": args.directed,
            "labels": args.labels.display().to_string(),
            "m_list": args.m_list,
            "target_sizes": args.target_sizes,
            "trials": args.trials,
            "k": args.k,
            "restarts": args.restarts,
            "iters": args.iters,
            "epsilon_floor": args.epsilon_floor,
        }),
        seed,
        wall_time_seconds: 0.0,
        outputs: out.into_names(),
        metrics: json!({ "runs": rows.len(), "mean_error": mean_error }),
    })
}

pub fn summarize(args: &SummarizeArgs) -> Result<RunRecord> {
    let graph = load_graph(&args.graph, args.directed)?;
    let pairs = read_truth_pairs(&args.labels)?;
    if pairs.is_empty() {
        bail!("labels file {} has no rows", args.labels.display());
    }

    let index = graph.id_index();
    let mut groups: Vec<Option<u32>> = vec![None; graph.node_count()];
    let mut unknown = Vec::new();
    for (id, g) in &pairs {
        match index.get(id.as_str()) {
            Some(&u) => groups[u as usize] = Some(*g),
            None => unknown.push(id.clone()),
        }
    }
    if !unknown.is_empty() {
        let shown = unknown.len().min(5);
        bail!("{} node IDs in the labels are missing from the graph: {}", unknown.len(), unknown[..shown].join(", "));
    }

    let k = (pairs.iter().map(|(_, g)| *g).max().unwrap() + 1) as usize;
    let mut sizes = vec![0u64; k];
    for g in groups.iter().flatten() {
        sizes[*g as usize] += 1;
    }

    // undirected edges are counted once at the (group_u, group_v) pair they
    // are stored under; opposite cells are folded together below
    let mut counts = vec![vec![0u64; k]; k];
    for u in 0..graph.node_count() as NodeId {
        let Some(gu) = groups[u as usize] else { continue };
        for &v in graph.neighbors(u) {
            let Some(gv) = groups[v as usize] else { continue };
            if args.directed || u < v {
                counts[gu as usize][gv as usize] += 1;
            }
        }
    }

    let mut density = vec![vec![0.0f64; k]; k];
    for r in 0..k {
        for s in 0..k {
            let (edges, possible) = if args.directed {
                let p = if r == s { sizes[r] * sizes[r].saturating_sub(1) } else { sizes[r] * sizes[s] };
                (counts[r][s], p)
            } else if r == s {
                (counts[r][r], sizes[r] * sizes[r].saturating_sub(1) / 2)
            } else {
                (counts[r][s] + counts[s][r], sizes[r] * sizes[s])
            };
            density[r][s] = if possible == 0 { 0.0 } else { edges as f64 / possible as f64 };
        }
    }
    let per_group_edges: Vec<u64> = (0..k).map(|r| counts[r][r]).collect();
    let labeled: u64 = sizes.iter().sum();

    let summary = json!({
        "group_sizes": sizes,
        "density": density,
        "per_group_edges": per_group_edges,
    });
    let mut out = Outputs::create(&args.out)?;
    out.write_json("block_summary.json", &summary)?;

    Ok(RunRecord {
        command: "summarize",
        parameters: json!({
            "graph": args.graph.display().to_string(),
            "directed": args.directed,
            "labels": args.labels.display().to_string(),
        }),
        seed: args.common.seed,
        wall_time_seconds: 0.0,
        outputs: out.into_names(),
        metrics: json!({ "k": k, "labeled_nodes": labeled, "graph_nodes": graph.node_count() }),
    })
}

pub fn theory(args: &TheoryArgs) -> Result<RunRecord> {
    let (a, b, n) = (args.a, args.b, args.n);
    if !(a > 0.0 && b >= 0.0) {
        bail!("need a > 0 and b >= 0, got a = {a}, b = {b}");
    }
    if n < 2 {
        bail!("need n >= 2, got {n}");
    }

    let (lambda1, lambda2) = ((a + b) / 2.0, (a - b) / 2.0);
    // the asymptotic forms only exist above lambda2 = 1; report what holds
    // and leave the rest null
    let q = spectral_quantities(a, b, n).ok();
    let numeric = solve_distances(a, b, n).ok();
    let gap = cost_gap(a, b, n).ok();

    let opt = |v: Option<f64>| v.map_or(Value::Null, Value::from);
    let result = json!({
        "a": a,
        "b": b,
        "n": n,
        "lambda1": lambda1,
        "lambda2": lambda2,
        "above_ks_threshold": above_ks_threshold(a, b),
        "ks_separation": (a - b) * (a - b),
        "ks_required": 2.0 * (a + b),
        "alpha": opt(q.map(|q| q.alpha)),
        "beta": opt(q.map(|q| q.beta)),
        "c": opt(q.map(|q| q.c)),
        "d": opt(q.map(|q| q.d)),
        "delta": opt(q.map(|q| q.delta)),
        "d1_numeric": opt(numeric.map(|(d1, _)| d1)),
        "d2_numeric": opt(numeric.map(|(_, d2)| d2)),
        "d1_asymptotic": opt(q.map(|q| q.d - q.delta)),
        "d2_asymptotic": opt(q.map(|q| q.d + q.delta)),
        "cost_gap": opt(gap),
    });

    let mut outputs = Vec::new();
    if let Some(dir) = &args.out {
        let mut out = Outputs::create(dir)?;
        out.write_json("theory.json", &result)?;
        outputs = out.into_names();
    }

    Ok(RunRecord {
        command: "theory",
        parameters: json!({ "a": a, "b": b, "n": n }),
        seed: args.common.seed,
        wall_time_seconds: 0.0,
        outputs,
        metrics: result,
    })
}
