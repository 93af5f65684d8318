//! Reference-to-target hop distance matrices.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId, UNREACHABLE};

/// Row-major matrix of hop distances from `m` reference nodes to `n` target
/// nodes, tracking the external IDs of both axes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    values: Vec<u32>,
    references: Vec<NodeId>,
    targets: Vec<NodeId>,
    reference_ids: Vec<String>,
    target_ids: Vec<String>,
}

impl DistanceMatrix {
    /// Runs one BFS per reference and gathers the distances to `targets`.
    ///
    /// Every target must be reachable from every reference; sampling from a
    /// single connected (or strongly connected) component guarantees that.
    pub fn compute(graph: &Graph, references: &[NodeId], targets: &[NodeId]) -> Result<DistanceMatrix> {
        for &u in references.iter().chain(targets) {
            if u as usize >= graph.node_count() {
                return Err(Error::NodeOutOfRange(u, graph.node_count()));
            }
        }
        let rows: Vec<Vec<u32>> = references
            .par_iter()
            .map(|&r| {
                let dist = graph.sssp_distances(r);
                targets.iter().map(|&t| dist[t as usize]).collect()
            })
            .collect();
        for (i, row) in rows.iter().enumerate() {
            if let Some(j) = row.iter().position(|&d| d == UNREACHABLE) {
                return Err(Error::UnreachablePair {
                    reference: graph.original_id(references[i]).to_string(),
                    target: graph.original_id(targets[j]).to_string(),
                });
            }
        }
        Ok(DistanceMatrix {
            values: rows.concat(),
            references: references.to_vec(),
            targets: targets.to_vec(),
            reference_ids: references.iter().map(|&u| graph.original_id(u).to_string()).collect(),
            target_ids: targets.iter().map(|&u| graph.original_id(u).to_string()).collect(),
        })
    }

    /// Builds a matrix from explicit rows, one per reference. Axis IDs are
    /// decimal row and column indices. Meant for synthetic inputs and tests.
    pub fn from_rows(rows: &[Vec<u32>]) -> Result<DistanceMatrix> {
        let m = rows.len();
        if m == 0 || rows[0].is_empty() {
            return Err(Error::DimensionMismatch("matrix must be non-empty".into()));
        }
        let n = rows[0].len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch("rows have unequal lengths".into()));
        }
        Ok(DistanceMatrix {
            values: rows.concat(),
            references: (0..m as NodeId).collect(),
            targets: (0..n as NodeId).collect(),
            reference_ids: (0..m).map(|i| i.to_string()).collect(),
            target_ids: (0..n).map(|j| j.to_string()).collect(),
        })
    }

    /// Number of references (rows).
    pub fn num_references(&self) -> usize {
        self.references.len()
    }

    /// Number of targets (columns).
    pub fn num_targets(&self) -> usize {
        self.targets.len()
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.values[i * self.num_targets() + j]
    }

    pub fn row(&self, i: usize) -> &[u32] {
        let n = self.num_targets();
        &self.values[i * n..(i + 1) * n]
    }

    /// Distance vector of target column `j`, one entry per reference.
    pub fn column(&self, j: usize) -> Vec<u32> {
        (0..self.num_references()).map(|i| self.get(i, j)).collect()
    }

    /// Internal node indices of the references, row order.
    pub fn references(&self) -> &[NodeId] {
        &self.references
    }

    /// Internal node indices of the targets, column order.
    pub fn targets(&self) -> &[NodeId] {
        &self.targets
    }

    pub fn reference_ids(&self) -> &[String] {
        &self.reference_ids
    }

    pub fn target_ids(&self) -> &[String] {
        &self.target_ids
    }

    /// Column indices of the targets that are themselves references, paired
    /// with the matching row index.
    pub fn reference_columns(&self) -> Vec<(usize, usize)> {
        self.targets
            .iter()
            .enumerate()
            .filter_map(|(j, t)| self.references.iter().position(|r| r == t).map(|i| (i, j)))
            .collect()
    }

    /// CSV layout: a header row of target IDs after a `reference` cell, then
    /// one row per reference holding its ID and the distances.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["reference".to_string()];
        header.extend(self.target_ids.iter().cloned());
        w.write_record(&header)?;
        for i in 0..self.num_references() {
            let mut record = vec![self.reference_ids[i].clone()];
            record.extend(self.row(i).iter().map(|d| d.to_string()));
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }
}
