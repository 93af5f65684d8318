//! Sparse graph representation, edge-list ingestion, connected components,
//! and BFS hop distances.

use std::collections::HashMap;
use std::collections::VecDeque;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Dense internal node index.
pub type NodeId = u32;

/// Distance sentinel for nodes a BFS never reached.
pub const UNREACHABLE: u32 = u32::MAX;

/// Connectivity mode for component extraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentMode {
    Weak,
    Strong,
}

/// An unweighted graph with dense internal indices `0..n`.
///
/// Adjacency lists are sorted and deduplicated; self-loops are never stored.
/// Each internal index keeps the external ID it was loaded with, so results
/// can be reported in the caller's vocabulary. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Graph {
    adj: Vec<Vec<NodeId>>,
    /// In-neighbors; only kept for directed graphs.
    radj: Option<Vec<Vec<NodeId>>>,
    directed: bool,
    original_ids: Vec<String>,
}

/// Line counts dropped while parsing an edge list.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseReport {
    pub comment_lines: usize,
    pub self_loops_dropped: usize,
    pub duplicate_edges_dropped: usize,
}

impl Graph {
    /// Builds a graph on `node_count` nodes from an edge iterator.
    ///
    /// Self-loops are dropped and parallel edges collapsed. External IDs
    /// default to the decimal internal index.
    pub fn from_edges(
        node_count: usize,
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
        directed: bool,
    ) -> Graph {
        let ids = (0..node_count).map(|i| i.to_string()).collect();
        Self::build(node_count, edges, directed, ids)
    }

    fn build(
        node_count: usize,
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
        directed: bool,
        original_ids: Vec<String>,
    ) -> Graph {
        let mut list: Vec<(NodeId, NodeId)> = edges
            .into_iter()
            .filter(|&(a, b)| a != b)
            .map(|(a, b)| {
                debug_assert!((a as usize) < node_count && (b as usize) < node_count);
                if directed || a < b { (a, b) } else { (b, a) }
            })
            .collect();
        list.sort_unstable();
        list.dedup();

        let mut adj = vec![Vec::new(); node_count];
        let mut radj = directed.then(|| vec![Vec::new(); node_count]);
        for &(a, b) in &list {
            adj[a as usize].push(b);
            if let Some(radj) = radj.as_mut() {
                radj[b as usize].push(a);
            } else {
                adj[b as usize].push(a);
            }
        }
        for l in &mut adj {
            l.sort_unstable();
        }
        if let Some(radj) = radj.as_mut() {
            for l in radj.iter_mut() {
                l.sort_unstable();
            }
        }
        Graph { adj, radj, directed, original_ids }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    /// Number of edges: unordered pairs for undirected graphs, arcs otherwise.
    pub fn edge_count(&self) -> usize {
        let total: usize = self.adj.iter().map(Vec::len).sum();
        if self.directed { total } else { total / 2 }
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// Out-neighbors of `u` (all neighbors for undirected graphs), ascending.
    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.adj[u as usize]
    }

    /// In-neighbors of `u`; same as [`neighbors`](Self::neighbors) when undirected.
    pub fn in_neighbors(&self, u: NodeId) -> &[NodeId] {
        match &self.radj {
            Some(radj) => &radj[u as usize],
            None => &self.adj[u as usize],
        }
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.adj[u as usize].len()
    }

    pub fn original_id(&self, u: NodeId) -> &str {
        &self.original_ids[u as usize]
    }

    pub fn original_ids(&self) -> &[String] {
        &self.original_ids
    }

    /// External ID -> internal index lookup table.
    pub fn id_index(&self) -> HashMap<&str, NodeId> {
        self.original_ids
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i as NodeId))
            .collect()
    }

    /// Hop distances from `source` to every node; [`UNREACHABLE`] where no
    /// path exists. Plain breadth-first search, `O(n + e)`.
    pub fn sssp_distances(&self, source: NodeId) -> Vec<u32> {
        assert!(
            (source as usize) < self.node_count(),
            "source {source} out of range for graph with {} nodes",
            self.node_count()
        );
        let mut dist = vec![UNREACHABLE; self.node_count()];
        dist[source as usize] = 0;
        let mut queue = VecDeque::new();
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize];
            for &v in self.neighbors(u) {
                if dist[v as usize] == UNREACHABLE {
                    dist[v as usize] = du + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Component label per node under `mode`. Labels are arbitrary dense ids.
    pub fn component_labels(&self, mode: ComponentMode) -> Result<Vec<u32>> {
        match mode {
            ComponentMode::Weak => Ok(self.weak_components()),
            ComponentMode::Strong => {
                if !self.directed {
                    return Err(Error::StrongModeOnUndirected);
                }
                Ok(self.strong_components())
            }
        }
    }

    fn weak_components(&self) -> Vec<u32> {
        let n = self.node_count();
        let mut labels = vec![u32::MAX; n];
        let mut queue = VecDeque::new();
        let mut next = 0u32;
        for start in 0..n {
            if labels[start] != u32::MAX {
                continue;
            }
            labels[start] = next;
            queue.push_back(start as NodeId);
            while let Some(u) = queue.pop_front() {
                let step = |v: NodeId, labels: &mut Vec<u32>, queue: &mut VecDeque<NodeId>| {
                    if labels[v as usize] == u32::MAX {
                        labels[v as usize] = next;
                        queue.push_back(v);
                    }
                };
                for &v in self.neighbors(u) {
                    step(v, &mut labels, &mut queue);
                }
                if self.directed {
                    for &v in self.in_neighbors(u) {
                        step(v, &mut labels, &mut queue);
                    }
                }
            }
            next += 1;
        }
        labels
    }

    /// Kosaraju with explicit stacks; recursion-free so deep graphs are fine.
    fn strong_components(&self) -> Vec<u32> {
        let n = self.node_count();
        let mut order = Vec::with_capacity(n);
        let mut seen = vec![false; n];
        let mut stack: Vec<(NodeId, usize)> = Vec::new();
        for start in 0..n as NodeId {
            if seen[start as usize] {
                continue;
            }
            seen[start as usize] = true;
            stack.push((start, 0));
            while let Some(&mut (u, ref mut i)) = stack.last_mut() {
                let next = self.adj[u as usize].get(*i).copied();
                *i += 1;
                match next {
                    Some(v) if !seen[v as usize] => {
                        seen[v as usize] = true;
                        stack.push((v, 0));
                    }
                    Some(_) => {}
                    None => {
                        order.push(u);
                        stack.pop();
                    }
                }
            }
        }

        let radj = self.radj.as_ref().expect("strong components need a directed graph");
        let mut labels = vec![u32::MAX; n];
        let mut next = 0u32;
        let mut queue = VecDeque::new();
        for &start in order.iter().rev() {
            if labels[start as usize] != u32::MAX {
                continue;
            }
            labels[start as usize] = next;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                for &v in &radj[u as usize] {
                    if labels[v as usize] == u32::MAX {
                        labels[v as usize] = next;
                        queue.push_back(v);
                    }
                }
            }
            next += 1;
        }
        labels
    }

    /// Largest connected component under `mode`.
    ///
    /// Ties go to the component containing the smallest internal index.
    /// Returns the induced subgraph plus the map new index -> old index.
    pub fn giant_component(&self, mode: ComponentMode) -> Result<(Graph, Vec<NodeId>)> {
        if self.node_count() == 0 {
            return Err(Error::EmptyGraph);
        }
        let labels = self.component_labels(mode)?;
        let count = labels.iter().copied().max().unwrap() as usize + 1;
        let mut sizes = vec![0usize; count];
        let mut min_index = vec![NodeId::MAX; count];
        for (u, &c) in labels.iter().enumerate() {
            sizes[c as usize] += 1;
            min_index[c as usize] = min_index[c as usize].min(u as NodeId);
        }
        let best = (0..count)
            .max_by(|&a, &b| sizes[a].cmp(&sizes[b]).then(min_index[b].cmp(&min_index[a])))
            .unwrap() as u32;
        let keep: Vec<NodeId> =
            (0..self.node_count() as NodeId).filter(|&u| labels[u as usize] == best).collect();
        Ok(self.induced(&keep))
    }

    /// Subgraph induced by `keep` (ascending old indices, assumed distinct).
    /// Returns the subgraph and the map new index -> old index.
    pub fn induced(&self, keep: &[NodeId]) -> (Graph, Vec<NodeId>) {
        debug_assert!(keep.windows(2).all(|w| w[0] < w[1]));
        let mut old_to_new = vec![u32::MAX; self.node_count()];
        for (new, &old) in keep.iter().enumerate() {
            old_to_new[old as usize] = new as u32;
        }
        let ids = keep.iter().map(|&old| self.original_ids[old as usize].clone()).collect();
        let mut edges = Vec::new();
        for &old in keep {
            let new_u = old_to_new[old as usize];
            for &v in &self.adj[old as usize] {
                if old_to_new[v as usize] != u32::MAX {
                    edges.push((new_u, old_to_new[v as usize]));
                }
            }
        }
        let g = Graph::build(keep.len(), edges, self.directed, ids);
        (g, keep.to_vec())
    }

    /// True when the whole graph is one component under `mode`.
    pub fn is_connected(&self, mode: ComponentMode) -> Result<bool> {
        if self.node_count() == 0 {
            return Ok(false);
        }
        let labels = self.component_labels(mode)?;
        Ok(labels.iter().all(|&c| c == 0))
    }

    /// Writes the graph in the same whitespace edge-list format
    /// [`parse_edge_list`] reads. Undirected edges are written once.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# nodes {} edges {}", self.node_count(), self.edge_count())?;
        for u in 0..self.node_count() as NodeId {
            for &v in self.neighbors(u) {
                if self.directed || u < v {
                    writeln!(out, "{}\t{}", self.original_ids[u as usize], self.original_ids[v as usize])?;
                }
            }
        }
        Ok(())
    }
}

/// Parses a whitespace edge list: `#`-prefixed lines are comments, every
/// other non-blank line must hold exactly two node ID tokens.
///
/// Internal indices follow first appearance; self-loops and duplicate edges
/// are dropped and counted in the report.
pub fn parse_edge_list<R: BufRead>(reader: R, directed: bool) -> Result<(Graph, ParseReport)> {
    let mut report = ParseReport::default();
    let mut index: HashMap<String, NodeId> = HashMap::new();
    let mut ids: Vec<String> = Vec::new();
    let mut edges: Vec<(NodeId, NodeId)> = Vec::new();

    let intern = |tok: &str, ids: &mut Vec<String>, index: &mut HashMap<String, NodeId>| {
        if let Some(&i) = index.get(tok) {
            i
        } else {
            let i = ids.len() as NodeId;
            ids.push(tok.to_string());
            index.insert(tok.to_string(), i);
            i
        }
    };

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            report.comment_lines += 1;
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let (a, b, rest) = (tokens.next(), tokens.next(), tokens.count());
        match (a, b, rest) {
            (Some(a), Some(b), 0) => {
                if a == b {
                    report.self_loops_dropped += 1;
                    // still a node of the graph
                    intern(a, &mut ids, &mut index);
                    continue;
                }
                let ia = intern(a, &mut ids, &mut index);
                let ib = intern(b, &mut ids, &mut index);
                edges.push((ia, ib));
            }
            _ => {
                return Err(Error::MalformedEdgeLine {
                    line: lineno + 1,
                    tokens: 2 - a.is_none() as usize - b.is_none() as usize + rest,
                });
            }
        }
    }

    let raw = edges.len();
    let g = Graph::build(ids.len(), edges, directed, ids);
    report.duplicate_edges_dropped = raw - g.edge_count();
    Ok((g, report))
}
