//! Synthetic random-graph generators with ground-truth labels.

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::partition::Labeling;
use crate::rng::{child_rng, root_rng, StreamDomain};
use rand::Rng;

/// Stochastic block model parameters: one size per block and a symmetric
/// matrix of link probabilities.
#[derive(Debug, Clone)]
pub struct SbmParams {
    pub block_sizes: Vec<usize>,
    pub link_probs: Vec<Vec<f64>>,
}

/// Two equal blocks with intra-block probability `a/n` and inter-block
/// probability `b/n`.
#[derive(Debug, Clone, Copy)]
pub struct PlantedParams {
    pub n: usize,
    pub a: f64,
    pub b: f64,
}

impl SbmParams {
    fn validate(&self) -> Result<()> {
        let k = self.block_sizes.len();
        if k == 0 {
            return Err(Error::InvalidParameter("at least one block is required".into()));
        }
        if self.block_sizes.iter().any(|&s| s == 0) {
            return Err(Error::InvalidParameter("block sizes must be positive".into()));
        }
        if self.link_probs.len() != k || self.link_probs.iter().any(|row| row.len() != k) {
            return Err(Error::InvalidParameter(format!(
                "link probability matrix must be {k}x{k} to match the block count"
            )));
        }
        for r in 0..k {
            for s in 0..k {
                let p = self.link_probs[r][s];
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidParameter(format!(
                        "link probability {p} at ({r},{s}) is outside [0, 1]"
                    )));
                }
                if self.link_probs[s][r] != p {
                    return Err(Error::InvalidParameter(
                        "link probability matrix must be symmetric".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

impl PlantedParams {
    fn validate(&self) -> Result<()> {
        if self.n < 2 || self.n % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "node count {} must be even and at least 2",
                self.n
            )));
        }
        let n = self.n as f64;
        for (name, v) in [("a", self.a), ("b", self.b)] {
            if !(v >= 0.0 && v <= n) {
                return Err(Error::InvalidParameter(format!(
                    "{name} = {v} must satisfy 0 <= {name}/n <= 1"
                )));
            }
        }
        Ok(())
    }
}

/// Samples a stochastic block model: every unordered node pair is linked
/// independently with its block-pair probability.
///
/// Each block pair draws from its own RNG stream, so the output depends only
/// on (params, seed). Pairs are flipped one by one; sparse shortcuts are not
/// worth it at the scales this crate targets.
pub fn sbm(params: &SbmParams, seed: u64) -> Result<(Graph, Labeling)> {
    params.validate()?;
    let k = params.block_sizes.len();
    let offsets: Vec<usize> = params
        .block_sizes
        .iter()
        .scan(0, |acc, &s| {
            let o = *acc;
            *acc += s;
            Some(o)
        })
        .collect();
    let n: usize = params.block_sizes.iter().sum();

    let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
    for r in 0..k {
        for s in r..k {
            let p = params.link_probs[r][s];
            let mut rng = child_rng(seed, StreamDomain::SbmBlockPair, (r * k + s) as u64);
            let (r0, r1) = (offsets[r], offsets[r] + params.block_sizes[r]);
            let (s0, s1) = (offsets[s], offsets[s] + params.block_sizes[s]);
            for i in r0..r1 {
                let j_start = if r == s { i + 1 } else { s0 };
                for j in j_start..s1 {
                    if rng.random_bool(p) {
                        edges.push((i as NodeId, j as NodeId));
                    }
                }
            }
        }
    }

    let groups: Vec<u32> = (0..k)
        .flat_map(|r| std::iter::repeat(r as u32).take(params.block_sizes[r]))
        .collect();
    let labeling = Labeling::new(groups, k as u32)?;
    Ok((Graph::from_edges(n, edges, false), labeling))
}

/// Samples the planted partition model: two equal blocks, intra-block link
/// probability `a/n`, inter-block probability `b/n`.
pub fn planted_partition(params: &PlantedParams, seed: u64) -> Result<(Graph, Labeling)> {
    params.validate()?;
    let n = params.n as f64;
    let half = params.n / 2;
    sbm(
        &SbmParams {
            block_sizes: vec![half, half],
            link_probs: vec![
                vec![params.a / n, params.b / n],
                vec![params.b / n, params.a / n],
            ],
        },
        seed,
    )
}

/// Grows a preferential attachment graph: a triangle, then each arriving
/// node links to `links_per_node` distinct existing nodes chosen with
/// probability proportional to current degree.
///
/// Degree-proportional choice draws a uniform entry of the edge-endpoint
/// multiset, rejecting until the targets are distinct.
pub fn preferential_attachment(n: usize, links_per_node: usize, seed: u64) -> Result<Graph> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "preferential attachment needs at least 3 nodes, got {n}"
        )));
    }
    if !(1..=3).contains(&links_per_node) {
        return Err(Error::InvalidParameter(format!(
            "links_per_node = {links_per_node} must be in 1..=3 so the triangle can seed the first arrival"
        )));
    }
    let mut rng = root_rng(seed);
    let mut edges: Vec<(NodeId, NodeId)> = vec![(0, 1), (0, 2), (1, 2)];
    // every edge contributes both endpoints, so a uniform draw from this
    // list is a degree-proportional draw over nodes
    let mut endpoints: Vec<NodeId> = vec![0, 1, 0, 2, 1, 2];
    let mut picked: Vec<NodeId> = Vec::with_capacity(links_per_node);
    for t in 3..n as NodeId {
        picked.clear();
        while picked.len() < links_per_node {
            let cand = endpoints[rng.random_range(0..endpoints.len())];
            if !picked.contains(&cand) {
                picked.push(cand);
            }
        }
        for &u in &picked {
            edges.push((u, t));
            endpoints.push(u);
            endpoints.push(t);
        }
    }
    Ok(Graph::from_edges(n, edges, false))
}
