//! Reference-node selection: uniform sampling and betweenness-biased
//! sampling along shortest paths.

use std::io::{BufRead, Write};

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{ComponentMode, Graph, NodeId, UNREACHABLE};
use crate::rng::{child_rng, StreamDomain};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Uniform,
    Betweenness,
}

/// A chosen set of reference nodes plus how it was produced.
#[derive(Debug, Clone)]
pub struct ReferenceSet {
    pub nodes: Vec<NodeId>,
    pub strategy: Strategy,
    pub seed: u64,
    /// Path-sampling pair count; only set for betweenness sampling.
    pub num_pairs: Option<usize>,
}

#[derive(Serialize)]
struct Provenance<'a> {
    strategy: &'a Strategy,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    num_pairs: Option<usize>,
    size: usize,
}

impl ReferenceSet {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// One-column CSV of external node IDs.
    pub fn write_csv<W: Write>(&self, graph: &Graph, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["node_id"])?;
        for &u in &self.nodes {
            w.write_record([graph.original_id(u)])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn provenance_json(&self) -> String {
        let p = Provenance {
            strategy: &self.strategy,
            seed: self.seed,
            num_pairs: self.num_pairs,
            size: self.nodes.len(),
        };
        serde_json::to_string_pretty(&p).expect("provenance serializes")
    }
}

/// Reads a one-column `node_id` CSV into external IDs in file order.
pub fn read_node_list_csv<R: BufRead>(reader: R) -> Result<Vec<String>> {
    let mut r = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for record in r.records() {
        let record = record?;
        match record.get(0) {
            Some(id) if record.len() == 1 => out.push(id.to_string()),
            _ => {
                return Err(Error::InvalidParameter(
                    "node list CSV must have exactly one column".into(),
                ))
            }
        }
    }
    Ok(out)
}

/// `m` distinct nodes, uniform without replacement (partial Fisher-Yates).
pub fn uniform_references(graph: &Graph, m: usize, seed: u64) -> Result<ReferenceSet> {
    let n = graph.node_count();
    if m == 0 {
        return Err(Error::InvalidParameter("reference count must be positive".into()));
    }
    if m > n {
        return Err(Error::SampleTooLarge { requested: m, available: n });
    }
    let mut rng = child_rng(seed, StreamDomain::Sampling, 0);
    let mut pool: Vec<NodeId> = (0..n as NodeId).collect();
    for i in 0..m {
        let j = rng.random_range(i..n);
        pool.swap(i, j);
    }
    pool.truncate(m);
    Ok(ReferenceSet { nodes: pool, strategy: Strategy::Uniform, seed, num_pairs: None })
}

/// One shortest path from `source` to `target`, endpoints included.
///
/// When several shortest paths exist, each step walks to the
/// smallest-index predecessor, so the result is unique and deterministic.
pub fn bfs_path(graph: &Graph, source: NodeId, target: NodeId) -> Option<Vec<NodeId>> {
    let dist = graph.sssp_distances(source);
    if dist[target as usize] == UNREACHABLE {
        return None;
    }
    let mut path = vec![target];
    let mut u = target;
    while u != source {
        let du = dist[u as usize];
        let prev = graph
            .in_neighbors(u)
            .iter()
            .copied()
            .find(|&v| dist[v as usize] + 1 == du)
            .expect("a reached node has a predecessor on some shortest path");
        path.push(prev);
        u = prev;
    }
    path.reverse();
    Some(path)
}

/// Counts how often each node appears on the per-pair shortest paths and
/// returns the top `m` as (node, count), ordered by count descending with
/// ties to the smaller index. Fewer than `m` touched nodes means all of
/// them are returned.
pub fn top_path_nodes(
    graph: &Graph,
    pairs: &[(NodeId, NodeId)],
    m: usize,
) -> Result<Vec<(NodeId, u64)>> {
    let paths: Vec<Vec<NodeId>> = pairs
        .par_iter()
        .map(|&(s, t)| {
            bfs_path(graph, s, t).ok_or(Error::UnreachablePair {
                reference: graph.original_id(s).to_string(),
                target: graph.original_id(t).to_string(),
            })
        })
        .collect::<Result<_>>()?;
    let mut counts = vec![0u64; graph.node_count()];
    for path in &paths {
        for &u in path {
            counts[u as usize] += 1;
        }
    }
    let mut touched: Vec<(NodeId, u64)> = counts
        .iter()
        .enumerate()
        .filter(|&(_, &c)| c > 0)
        .map(|(u, &c)| (u as NodeId, c))
        .collect();
    touched.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    touched.truncate(m);
    Ok(touched)
}

/// Betweenness-biased references: sample `num_pairs` random ordered pairs
/// of distinct nodes, trace one shortest path per pair, and keep the `m`
/// most frequently visited nodes.
pub fn betweenness_references(
    graph: &Graph,
    num_pairs: usize,
    m: usize,
    seed: u64,
) -> Result<ReferenceSet> {
    if num_pairs == 0 || m == 0 {
        return Err(Error::InvalidParameter("num_pairs and m must be positive".into()));
    }
    let n = graph.node_count();
    if n < 2 {
        return Err(Error::InvalidParameter("need at least two nodes to draw pairs".into()));
    }
    let mode = if graph.is_directed() { ComponentMode::Strong } else { ComponentMode::Weak };
    if !graph.is_connected(mode)? {
        return Err(Error::Disconnected);
    }
    let mut rng = child_rng(seed, StreamDomain::Sampling, 1);
    let mut pairs = Vec::with_capacity(num_pairs);
    while pairs.len() < num_pairs {
        let s = rng.random_range(0..n) as NodeId;
        let t = rng.random_range(0..n) as NodeId;
        if s != t {
            pairs.push((s, t));
        }
    }
    let nodes = top_path_nodes(graph, &pairs, m)?.into_iter().map(|(u, _)| u).collect();
    Ok(ReferenceSet { nodes, strategy: Strategy::Betweenness, seed, num_pairs: Some(num_pairs) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::preferential_attachment;

    fn path10() -> Graph {
        Graph::from_edges(10, (0..9).map(|i| (i, i + 1)), false)
    }

    #[test]
    fn uniform_full_sample_is_every_node() {
        let g = path10();
        let mut refs = uniform_references(&g, 10, 3).unwrap().nodes;
        refs.sort_unstable();
        assert_eq!(refs, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn uniform_rejects_bad_counts() {
        let g = path10();
        assert!(uniform_references(&g, 0, 3).is_err());
        assert!(matches!(
            uniform_references(&g, 11, 3),
            Err(Error::SampleTooLarge { requested: 11, available: 10 })
        ));
    }

    #[test]
    fn uniform_is_deterministic_and_distinct() {
        let g = path10();
        let a = uniform_references(&g, 4, 9).unwrap().nodes;
        let b = uniform_references(&g, 4, 9).unwrap().nodes;
        assert_eq!(a, b);
        let mut sorted = a.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 4);
    }

    #[test]
    fn uniform_single_draw_is_unbiased() {
        // frequency of each node over many seeds, chi-square against uniform
        let g = path10();
        let trials = 2000u64;
        let mut counts = [0f64; 10];
        for seed in 0..trials {
            let r = uniform_references(&g, 1, seed).unwrap();
            counts[r.nodes[0] as usize] += 1.0;
        }
        let expected = trials as f64 / 10.0;
        let stat: f64 = counts.iter().map(|c| (c - expected) * (c - expected) / expected).sum();
        // chi-square 0.999 quantile, 9 degrees of freedom
        assert!(stat < 27.877165, "chi-square statistic {stat} too large");
    }

    #[test]
    fn path_walks_to_smallest_predecessor() {
        // diamond 0-1-3, 0-2-3: both length-2 routes exist, 1 wins
        let g = Graph::from_edges(4, [(0, 1), (0, 2), (1, 3), (2, 3)], false);
        assert_eq!(bfs_path(&g, 0, 3).unwrap(), vec![0, 1, 3]);
        assert_eq!(bfs_path(&g, 3, 0).unwrap(), vec![3, 1, 0]);
        assert_eq!(bfs_path(&g, 0, 0).unwrap(), vec![0]);

        let split = Graph::from_edges(4, [(0, 1), (2, 3)], false);
        assert!(bfs_path(&split, 0, 3).is_none());
    }

    #[test]
    fn star_center_dominates_path_counts() {
        let star = Graph::from_edges(5, [(0, 1), (0, 2), (0, 3), (0, 4)], false);
        let top = top_path_nodes(&star, &[(1, 2), (3, 4), (2, 4)], 1).unwrap();
        assert_eq!(top, vec![(0, 3)]);
    }

    #[test]
    fn path_endpoints_count_and_ties_break_low() {
        // one end-to-end path touches all ten nodes exactly once
        let g = path10();
        let top = top_path_nodes(&g, &[(0, 9)], 3).unwrap();
        assert_eq!(top, vec![(0, 1), (1, 1), (2, 1)]);

        // asking for more nodes than were touched returns them all
        let top = top_path_nodes(&g, &[(0, 9)], 20).unwrap();
        assert_eq!(top.len(), 10);
    }

    #[test]
    fn betweenness_counts_are_non_increasing() {
        let g = preferential_attachment(300, 3, 4).unwrap();
        let pairs: Vec<(NodeId, NodeId)> = (0..50).map(|i| (i, (i + 137) % 300)).collect();
        let top = top_path_nodes(&g, &pairs, 30).unwrap();
        assert!(top.windows(2).all(|w| w[0].1 >= w[1].1));
    }

    #[test]
    fn betweenness_requires_connectivity() {
        let split = Graph::from_edges(4, [(0, 1), (2, 3)], false);
        assert!(matches!(betweenness_references(&split, 5, 2, 1), Err(Error::Disconnected)));

        // one-way arc: weakly connected but not strongly
        let arc = Graph::from_edges(2, [(0, 1)], true);
        assert!(matches!(betweenness_references(&arc, 5, 2, 1), Err(Error::Disconnected)));
    }

    #[test]
    fn betweenness_is_deterministic() {
        let g = preferential_attachment(500, 3, 11).unwrap();
        let a = betweenness_references(&g, 100, 30, 5).unwrap();
        let b = betweenness_references(&g, 100, 30, 5).unwrap();
        assert_eq!(a.nodes, b.nodes);
        assert_eq!(a.num_pairs, Some(100));
        assert_eq!(a.strategy, Strategy::Betweenness);
    }

    #[test]
    fn betweenness_favors_hubs_on_scale_free_graphs() {
        // selected nodes should have far higher degree than average
        let mut hits = 0u64;
        let seeds = 20u64;
        for seed in 0..seeds {
            let g = preferential_attachment(5000, 3, seed).unwrap();
            let (giant, _) = g.giant_component(ComponentMode::Weak).unwrap();
            let refs = betweenness_references(&giant, 100, 30, seed).unwrap();
            let mean_degree = 2.0 * giant.edge_count() as f64 / giant.node_count() as f64;
            let ref_mean: f64 = refs.nodes.iter().map(|&u| giant.degree(u) as f64).sum::<f64>()
                / refs.nodes.len() as f64;
            hits += (ref_mean >= 3.0 * mean_degree) as u64;
        }
        assert!(hits * 100 >= seeds * 95, "only {hits}/{seeds} seeds hub-biased");
    }

    #[test]
    fn reference_csv_and_provenance() {
        let g = path10();
        let refs = uniform_references(&g, 3, 1).unwrap();
        let mut buf = Vec::new();
        refs.write_csv(&g, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("node_id\n"));
        assert_eq!(text.lines().count(), 4);

        let back = read_node_list_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 3);

        let json = refs.provenance_json();
        assert!(json.contains("\"uniform\""));
        assert!(json.contains("\"size\": 3"));
    }
}
