//! Regular decomposition: fit a Poisson mean-distance model by multi-restart
//! local search, classify out-of-sample nodes, and choose the group count.
//!
//! The cost of assigning target `j` to group `v` is
//! `sum_i (means[i][v] - D[i][j] * ln means[i][v])`, the Poisson negative
//! log-likelihood with the constant `ln D!` term dropped. A local update
//! re-estimates group means from the current assignment, then moves every
//! node to its cheapest group. Every argmin tie breaks to the smallest
//! index, so results are a pure function of (input, seed).

use rayon::prelude::*;

use crate::distance::DistanceMatrix;
use crate::error::{Error, Result};
use crate::partition::Labeling;
use crate::rng::{child_rng, StreamDomain};
use crate::scalar::Real;
use rand::Rng;

/// Fitted mean hop counts, one row per reference, one column per group.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanMatrix<T> {
    values: Vec<T>,
    num_references: usize,
    k: usize,
}

impl<T: Real> MeanMatrix<T> {
    pub fn num_references(&self) -> usize {
        self.num_references
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize, v: usize) -> T {
        self.values[i * self.k + v]
    }

    /// Row-major values, `num_references x k`.
    pub fn values(&self) -> &[T] {
        &self.values
    }

    fn ln_values(&self) -> Vec<T> {
        self.values.iter().map(|&m| m.ln()).collect()
    }
}

/// Per-node, per-group assignment costs.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeCosts<T> {
    values: Vec<T>,
    n: usize,
    k: usize,
}

impl<T: Real> NodeCosts<T> {
    pub fn num_targets(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, j: usize, v: usize) -> T {
        self.values[j * self.k + v]
    }

    pub fn row(&self, j: usize) -> &[T] {
        &self.values[j * self.k..(j + 1) * self.k]
    }

    /// Cheapest group for node `j`, ties to the smallest index.
    pub fn argmin_row(&self, j: usize) -> u32 {
        argmin(self.row(j))
    }
}

/// Search parameters for [`regular_decomposition`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct RdConfig<T> {
    pub k: u32,
    /// Random restarts.
    pub s_max: u32,
    /// Local updates per restart.
    pub t_max: u32,
    /// Lower bound applied to fitted means so logs stay finite.
    pub epsilon_floor: T,
    /// Stop a restart once an update leaves the labeling unchanged.
    pub early_stop: bool,
}

impl<T: Real> RdConfig<T> {
    pub fn new(k: u32) -> RdConfig<T> {
        RdConfig {
            k,
            s_max: 100,
            t_max: 30,
            epsilon_floor: T::from_f64_lit(1e-6),
            early_stop: true,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.k < 1 || self.s_max < 1 || self.t_max < 1 {
            return Err(Error::InvalidParameter(
                "k, s_max and t_max must all be at least 1".into(),
            ));
        }
        if !(self.epsilon_floor > T::zero() && self.epsilon_floor < T::one()) {
            return Err(Error::InvalidParameter("epsilon_floor must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// A fitted decomposition: the winning labeling with its means and cost.
#[derive(Debug, Clone)]
pub struct RdModel<T> {
    pub labeling: Labeling,
    pub means: MeanMatrix<T>,
    pub cost: T,
    pub restarts_run: u32,
    /// Local updates executed by the winning restart.
    pub iterations_used: u32,
    pub seed: u64,
}

impl<T: Real + serde::Serialize> RdModel<T> {
    /// JSON view of the model: chosen k, cost, group sizes, per-target
    /// assignments under the supplied external IDs, the mean matrix as one
    /// row per reference, and the search configuration that produced it.
    pub fn to_json(&self, target_ids: &[String], config: &RdConfig<T>) -> Result<serde_json::Value> {
        if target_ids.len() != self.labeling.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} ids for {} targets",
                target_ids.len(),
                self.labeling.len()
            )));
        }
        let labeling: Vec<serde_json::Value> = target_ids
            .iter()
            .zip(self.labeling.groups())
            .map(|(id, &g)| serde_json::json!({ "node_id": id, "group": g }))
            .collect();
        let means: Vec<&[T]> = self.means.values().chunks(self.means.k()).collect();
        Ok(serde_json::json!({
            "k": self.labeling.k(),
            "cost": self.cost,
            "group_sizes": self.labeling.group_sizes(),
            "labeling": labeling,
            "means": means,
            "seed": self.seed,
            "config": config,
        }))
    }
}

/// Result of a model-order sweep.
#[derive(Debug, Clone)]
pub struct Selection<T> {
    pub k_star: u32,
    /// Fitted cost for k = 1..=k_max, index k-1.
    pub curve: Vec<T>,
    /// True when the curve rises somewhere (possible with finite restarts).
    pub non_monotone: bool,
    pub models: Vec<RdModel<T>>,
}

fn argmin<T: Real>(row: &[T]) -> u32 {
    let mut best = 0;
    for (v, &c) in row.iter().enumerate().skip(1) {
        if c < row[best] {
            best = v;
        }
    }
    best as u32
}

/// Group-conditional row means: `means[i][v]` is the average of `D[i][j]`
/// over targets `j` in group `v`, floored at `epsilon_floor`.
pub fn estimate_means<T: Real>(
    d: &DistanceMatrix,
    z: &Labeling,
    epsilon_floor: T,
) -> Result<MeanMatrix<T>> {
    check_targets(d, z)?;
    let (m, k) = (d.num_references(), z.k() as usize);
    let mut counts = vec![0u64; k];
    for &g in z.groups() {
        counts[g as usize] += 1;
    }
    if let Some(v) = counts.iter().position(|&c| c == 0) {
        return Err(Error::EmptyGroup(v as u32));
    }
    let mut sums = vec![0u64; m * k];
    for i in 0..m {
        let row = d.row(i);
        let sums = &mut sums[i * k..(i + 1) * k];
        for (j, &g) in z.groups().iter().enumerate() {
            sums[g as usize] += row[j] as u64;
        }
    }
    let values = sums
        .iter()
        .enumerate()
        .map(|(idx, &s)| {
            let mean = T::from_count(s) / T::from_count(counts[idx % k]);
            if mean > epsilon_floor { mean } else { epsilon_floor }
        })
        .collect();
    Ok(MeanMatrix { values, num_references: m, k })
}

/// Accumulates the k per-group costs of one target into `acc`.
///
/// Shared by [`node_costs`], [`total_cost`] and [`classify`] so all three
/// add terms in the same order and agree bit for bit.
fn accumulate_costs<T: Real>(
    means: &MeanMatrix<T>,
    ln_means: &[T],
    dist: impl Fn(usize) -> u32,
    acc: &mut [T],
) {
    acc.fill(T::zero());
    let k = means.k;
    for i in 0..means.num_references {
        let d = T::from_count(dist(i) as u64);
        let mu = &means.values[i * k..(i + 1) * k];
        let ln = &ln_means[i * k..(i + 1) * k];
        for v in 0..k {
            acc[v] += mu[v] - d * ln[v];
        }
    }
}

/// Poisson assignment costs for every (target, group) pair.
pub fn node_costs<T: Real>(d: &DistanceMatrix, means: &MeanMatrix<T>) -> Result<NodeCosts<T>> {
    if means.num_references != d.num_references() {
        return Err(Error::DimensionMismatch(format!(
            "means cover {} references, matrix has {}",
            means.num_references,
            d.num_references()
        )));
    }
    let (n, k) = (d.num_targets(), means.k);
    let ln_means = means.ln_values();
    let mut values = vec![T::zero(); n * k];
    // Process nodes in wide chunks, scanning each distance row once per
    // chunk so the matrix streams instead of being walked column by column.
    // Every (node, group) cell still accumulates its reference terms in
    // ascending order, matching accumulate_costs bit for bit.
    const CHUNK: usize = 2048;
    values
        .par_chunks_mut(CHUNK * k)
        .enumerate()
        .for_each(|(c, out)| {
            let j0 = c * CHUNK;
            let width = out.len() / k;
            for i in 0..means.num_references {
                let row = &d.row(i)[j0..j0 + width];
                let mu = &means.values[i * k..(i + 1) * k];
                let ln = &ln_means[i * k..(i + 1) * k];
                for (jj, &dist) in row.iter().enumerate() {
                    let dv = T::from_count(dist as u64);
                    let acc = &mut out[jj * k..(jj + 1) * k];
                    for v in 0..k {
                        acc[v] += mu[v] - dv * ln[v];
                    }
                }
            }
        });
    Ok(NodeCosts { values, n, k })
}

/// Total cost `L(Z)`: each node priced under its own group, with means
/// re-estimated from (D, Z).
pub fn total_cost<T: Real>(d: &DistanceMatrix, z: &Labeling, epsilon_floor: T) -> Result<T> {
    let means = estimate_means(d, z, epsilon_floor)?;
    let costs = node_costs(d, &means)?;
    let mut total = T::zero();
    for (j, &g) in z.groups().iter().enumerate() {
        total += costs.get(j, g as usize);
    }
    Ok(total)
}

/// One averaging + optimization step: re-estimate means from `z`, then send
/// every node to its cheapest group.
///
/// If that empties a group, groups are repaired in ascending index order:
/// each empty group receives the highest-cost node (under its new
/// assignment) among nodes not moved by repair whose group keeps at least
/// one member, ties to the smallest node index.
pub fn local_update<T: Real>(d: &DistanceMatrix, z: &Labeling, epsilon_floor: T) -> Result<Labeling> {
    let means = estimate_means(d, z, epsilon_floor)?;
    let costs = node_costs(d, &means)?;
    let k = z.k() as usize;
    let n = d.num_targets();
    let mut groups: Vec<u32> = (0..n).map(|j| costs.argmin_row(j)).collect();

    let mut sizes = vec![0usize; k];
    for &g in &groups {
        sizes[g as usize] += 1;
    }
    if sizes.contains(&0) {
        let mut moved = vec![false; n];
        for empty in 0..k {
            if sizes[empty] > 0 {
                continue;
            }
            let donor = (0..n)
                .filter(|&j| !moved[j] && sizes[groups[j] as usize] > 1)
                .max_by(|&a, &b| {
                    let ca = costs.get(a, groups[a] as usize);
                    let cb = costs.get(b, groups[b] as usize);
                    ca.partial_cmp(&cb).unwrap().then(b.cmp(&a))
                })
                .expect("n >= k leaves a donor group with two members");
            sizes[groups[donor] as usize] -= 1;
            groups[donor] = empty as u32;
            sizes[empty] = 1;
            moved[donor] = true;
        }
    }
    Labeling::new(groups, z.k())
}

/// Multi-restart search: `s_max` random initial labelings, each refined by
/// at most `t_max` local updates, keeping the cheapest result. Ties go to
/// the earliest restart. Deterministic for a given seed, whatever the
/// rayon pool looks like.
pub fn regular_decomposition<T: Real>(
    d: &DistanceMatrix,
    config: &RdConfig<T>,
    seed: u64,
) -> Result<RdModel<T>> {
    config.validate()?;
    let (n, k) = (d.num_targets(), config.k);
    if (n as u64) < k as u64 {
        return Err(Error::TooFewNodes { n, k });
    }

    let runs: Vec<(T, Labeling, u32)> = (0..config.s_max)
        .into_par_iter()
        .map(|s| {
            let mut rng = child_rng(seed, StreamDomain::Restart, s as u64);
            let mut z = random_labeling(n, k, &mut rng);
            let mut iterations = 0;
            for _ in 0..config.t_max {
                let next = local_update(d, &z, config.epsilon_floor)?;
                iterations += 1;
                let fixed_point = next == z;
                z = next;
                if config.early_stop && fixed_point {
                    break;
                }
            }
            let cost = total_cost(d, &z, config.epsilon_floor)?;
            Ok((cost, z, iterations))
        })
        .collect::<Result<_>>()?;

    let mut best = 0;
    for s in 1..runs.len() {
        if runs[s].0 < runs[best].0 {
            best = s;
        }
    }
    let (cost, labeling, iterations_used) = runs[best].clone();
    let means = estimate_means(d, &labeling, config.epsilon_floor)?;
    Ok(RdModel { labeling, means, cost, restarts_run: config.s_max, iterations_used, seed })
}

fn random_labeling(n: usize, k: u32, rng: &mut impl Rng) -> Labeling {
    loop {
        let groups: Vec<u32> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let mut seen = vec![false; k as usize];
        for &g in &groups {
            seen[g as usize] = true;
        }
        if seen.iter().all(|&s| s) {
            return Labeling::new(groups, k).expect("groups drawn below k");
        }
    }
}

/// Assigns a node to the cheapest group given its distances to the
/// references. Matches the in-sample assignment of [`local_update`] when
/// the means are held fixed.
pub fn classify<T: Real>(dist_to_refs: &[u32], means: &MeanMatrix<T>) -> Result<u32> {
    if dist_to_refs.len() != means.num_references {
        return Err(Error::DimensionMismatch(format!(
            "{} distances for {} references",
            dist_to_refs.len(),
            means.num_references
        )));
    }
    let ln_means = means.ln_values();
    let mut acc = vec![T::zero(); means.k];
    accumulate_costs(means, &ln_means, |i| dist_to_refs[i], &mut acc);
    Ok(argmin(&acc))
}

/// Fits every group count up to `k_max` and picks the knee of the cost
/// curve: the smallest k whose relative cost drop to k+1 falls below `tau`,
/// or `k_max` when the curve never flattens.
pub fn select_k<T: Real>(
    d: &DistanceMatrix,
    k_max: u32,
    base: &RdConfig<T>,
    tau: T,
    seed: u64,
) -> Result<Selection<T>> {
    if k_max < 1 {
        return Err(Error::InvalidParameter("k_max must be at least 1".into()));
    }
    if (d.num_targets() as u64) < k_max as u64 {
        return Err(Error::TooFewNodes { n: d.num_targets(), k: k_max });
    }
    if !(tau > T::zero()) {
        return Err(Error::InvalidParameter("tau must be positive".into()));
    }
    let models: Vec<RdModel<T>> = (1..=k_max)
        .map(|k| regular_decomposition(d, &RdConfig { k, ..*base }, seed))
        .collect::<Result<_>>()?;
    let curve: Vec<T> = models.iter().map(|m| m.cost).collect();
    let non_monotone = curve.windows(2).any(|w| w[1] > w[0]);

    let tiny = T::from_f64_lit(1e-12);
    let span = curve[0] - curve[k_max as usize - 1];
    let denom = if span > tiny { span } else { tiny };
    let mut k_star = k_max;
    for k in 1..k_max {
        let drop = curve[k as usize - 1] - curve[k as usize];
        if drop / denom < tau {
            k_star = k;
            break;
        }
    }
    Ok(Selection { k_star, curve, non_monotone, models })
}

fn check_targets(d: &DistanceMatrix, z: &Labeling) -> Result<()> {
    if z.len() != d.num_targets() {
        return Err(Error::DimensionMismatch(format!(
            "labeling covers {} nodes, matrix has {} targets",
            z.len(),
            d.num_targets()
        )));
    }
    Ok(())
}
