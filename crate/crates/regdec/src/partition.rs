//! Group assignments, agreement scoring, and neighbor expansion of partial
//! labelings.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

/// Assignment of every node `0..n` to one of `k` groups, numbered `0..k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labeling {
    groups: Vec<u32>,
    k: u32,
}

impl Labeling {
    pub fn new(groups: Vec<u32>, k: u32) -> Result<Labeling> {
        if k == 0 {
            return Err(Error::InvalidParameter("group count must be positive".into()));
        }
        if let Some(&g) = groups.iter().find(|&&g| g >= k) {
            return Err(Error::GroupOutOfRange { group: g, k });
        }
        Ok(Labeling { groups, k })
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn group_of(&self, u: NodeId) -> u32 {
        self.groups[u as usize]
    }

    pub fn groups(&self) -> &[u32] {
        &self.groups
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k as usize];
        for &g in &self.groups {
            sizes[g as usize] += 1;
        }
        sizes
    }

    /// Members of each group, ascending node index within each list.
    pub fn group_members(&self) -> Vec<Vec<NodeId>> {
        let mut members = vec![Vec::new(); self.k as usize];
        for (u, &g) in self.groups.iter().enumerate() {
            members[g as usize].push(u as NodeId);
        }
        members
    }

    /// Writes `node_id,group` rows, one per node, using the supplied
    /// external IDs.
    pub fn write_csv<W: Write>(&self, ids: &[String], out: W) -> Result<()> {
        if ids.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} ids for {} labeled nodes",
                ids.len(),
                self.len()
            )));
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["node_id", "group"])?;
        for (id, &g) in ids.iter().zip(&self.groups) {
            w.write_record([id.as_str(), &g.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Reads a `node_id,group` CSV into (external ID, group) pairs in file order.
pub fn read_labels_csv<R: BufRead>(reader: R) -> Result<Vec<(String, u32)>> {
    let mut r = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for record in r.deserialize() {
        let (id, group): (String, u32) = record?;
        out.push((id, group));
    }
    Ok(out)
}

/// Resolves (external ID, group) pairs against a graph's vocabulary into a
/// [`Labeling`] covering every node. IDs must cover the graph exactly.
pub fn labeling_from_pairs(graph: &Graph, pairs: &[(String, u32)]) -> Result<Labeling> {
    let index = graph.id_index();
    let mut groups = vec![u32::MAX; graph.node_count()];
    let mut unknown = Vec::new();
    for (id, g) in pairs {
        match index.get(id.as_str()) {
            Some(&u) => groups[u as usize] = *g,
            None => unknown.push(id.clone()),
        }
    }
    if !unknown.is_empty() {
        unknown.truncate(5);
        return Err(Error::UnknownNodeIds(unknown.join(", ")));
    }
    if groups.contains(&u32::MAX) {
        let missing = groups.iter().position(|&g| g == u32::MAX).unwrap();
        return Err(Error::DimensionMismatch(format!(
            "no label for node {}",
            graph.original_id(missing as NodeId)
        )));
    }
    let k = groups.iter().copied().max().unwrap_or(0) + 1;
    Labeling::new(groups, k)
}

/// Group assignment over a subset of a graph's nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialLabeling {
    groups: Vec<Option<u32>>,
    k: u32,
}

impl PartialLabeling {
    pub fn new(groups: Vec<Option<u32>>, k: u32) -> Result<PartialLabeling> {
        if k == 0 {
            return Err(Error::InvalidParameter("group count must be positive".into()));
        }
        if let Some(g) = groups.iter().flatten().find(|&&g| g >= k) {
            return Err(Error::GroupOutOfRange { group: *g, k });
        }
        Ok(PartialLabeling { groups, k })
    }

    /// A partial labeling over `n` nodes assigning only the listed pairs.
    pub fn from_pairs(n: usize, pairs: &[(NodeId, u32)], k: u32) -> Result<PartialLabeling> {
        let mut groups = vec![None; n];
        for &(u, g) in pairs {
            if u as usize >= n {
                return Err(Error::NodeOutOfRange(u, n));
            }
            groups[u as usize] = Some(g);
        }
        PartialLabeling::new(groups, k)
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn group_of(&self, u: NodeId) -> Option<u32> {
        self.groups[u as usize]
    }

    pub fn labeled_count(&self) -> usize {
        self.groups.iter().flatten().count()
    }

    /// Converts to a complete labeling; fails if any node is unlabeled.
    pub fn into_complete(self) -> Result<Labeling> {
        let groups: Option<Vec<u32>> = self.groups.into_iter().collect();
        match groups {
            Some(groups) => Labeling::new(groups, self.k),
            None => Err(Error::DimensionMismatch("labeling does not cover every node".into())),
        }
    }
}

/// One expansion sweep: every unlabeled node adjacent to labeled nodes takes
/// the majority group among its labeled neighbors, ties to the smallest
/// group index. Existing labels never change; nodes with no labeled
/// neighbor stay unlabeled. Directed edges count in both directions.
pub fn expand_partition(graph: &Graph, labeled: &PartialLabeling) -> Result<PartialLabeling> {
    if labeled.len() != graph.node_count() {
        return Err(Error::DimensionMismatch(format!(
            "labeling over {} nodes applied to graph with {}",
            labeled.len(),
            graph.node_count()
        )));
    }
    let k = labeled.k() as usize;
    let mut groups = labeled.groups.clone();
    let mut votes = vec![0u32; k];
    for u in 0..graph.node_count() as NodeId {
        if labeled.group_of(u).is_some() {
            continue;
        }
        votes.iter_mut().for_each(|v| *v = 0);
        let tally = |v: NodeId, votes: &mut [u32]| {
            if let Some(g) = labeled.group_of(v) {
                votes[g as usize] += 1;
            }
        };
        for &v in graph.neighbors(u) {
            tally(v, &mut votes);
        }
        if graph.is_directed() {
            for &v in graph.in_neighbors(u) {
                tally(v, &mut votes);
            }
        }
        let best = votes.iter().copied().max().unwrap_or(0);
        if best > 0 {
            let g = votes.iter().position(|&v| v == best).unwrap();
            groups[u as usize] = Some(g as u32);
        }
    }
    PartialLabeling::new(groups, labeled.k())
}

/// Fraction of nodes whose groups disagree, minimized over relabelings of
/// the predicted groups.
///
/// Small group counts are matched by trying every permutation; larger ones
/// by an exact assignment solved with dynamic programming over column
/// subsets, which finds the same optimum.
pub fn misclassification_rate(predicted: &Labeling, truth: &Labeling) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::DimensionMismatch(format!(
            "labelings over {} and {} nodes",
            predicted.len(),
            truth.len()
        )));
    }
    let n = predicted.len();
    if n == 0 {
        return Ok(0.0);
    }
    let k = predicted.k().max(truth.k()) as usize;
    let mut confusion = vec![vec![0u64; k]; k];
    for (&p, &t) in predicted.groups.iter().zip(&truth.groups) {
        confusion[p as usize][t as usize] += 1;
    }
    let agreement = if k <= 8 {
        best_agreement_permutations(&confusion)
    } else {
        best_agreement_subset_dp(&confusion)
    };
    Ok(1.0 - agreement as f64 / n as f64)
}

fn best_agreement_permutations(confusion: &[Vec<u64>]) -> u64 {
    fn go(confusion: &[Vec<u64>], row: usize, used: &mut [bool], acc: u64, best: &mut u64) {
        if row == confusion.len() {
            *best = (*best).max(acc);
            return;
        }
        for col in 0..confusion.len() {
            if !used[col] {
                used[col] = true;
                go(confusion, row + 1, used, acc + confusion[row][col], best);
                used[col] = false;
            }
        }
    }
    let mut best = 0;
    go(confusion, 0, &mut vec![false; confusion.len()], 0, &mut best);
    best
}

/// Maximum-weight bijection rows -> columns: dp over the set of used
/// columns, rows taken in order, so dp[mask] covers rows 0..popcount(mask).
fn best_agreement_subset_dp(confusion: &[Vec<u64>]) -> u64 {
    let k = confusion.len();
    let mut dp = vec![0u64; 1usize << k];
    for mask in 1usize..1 << k {
        let row = mask.count_ones() as usize - 1;
        let mut best = 0;
        for col in 0..k {
            if mask & (1 << col) != 0 {
                best = best.max(dp[mask ^ (1 << col)] + confusion[row][col]);
            }
        }
        dp[mask] = best;
    }
    dp[(1 << k) - 1]
}
