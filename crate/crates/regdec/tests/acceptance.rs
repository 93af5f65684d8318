//! End-to-end acceptance checks. Each test prints one `criterion N: pass/fail`
//! line with the measured numbers; run with `--nocapture` to see them all.
//!
//! The tests share a mutex so the timing-sensitive ones never compete for the
//! CPU with the heavy pipelines.

use std::sync::{Mutex, MutexGuard};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use regdec::distance::DistanceMatrix;
use regdec::generate::{planted_partition, PlantedParams};
use regdec::graph::{ComponentMode, Graph, NodeId};
use regdec::partition::misclassification_rate;
use regdec::rd::{
    estimate_means, local_update, node_costs, regular_decomposition, select_k, total_cost,
};
use regdec::sample::uniform_references;
use regdec::theory::{
    above_ks_threshold, cost_gap, neighborhood_growth, solve_distances, spectral_quantities,
};
use regdec::{Labeling, RdConfig64};

static SEQUENTIAL: Mutex<()> = Mutex::new(());

fn run_alone() -> MutexGuard<'static, ()> {
    SEQUENTIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn report(id: u32, name: &str, ok: bool, detail: &str) {
    println!("criterion {id} ({name}): {} - {detail}", if ok { "pass" } else { "fail" });
    assert!(ok, "criterion {id} ({name}) failed: {detail}");
}

fn planted_2000(seed: u64) -> (Graph, Labeling) {
    let params = PlantedParams { n: 2000, a: 20.0, b: 2.0 };
    planted_partition(&params, seed).unwrap()
}

fn planted_10k() -> (Graph, Labeling) {
    let params = PlantedParams { n: 10_000, a: 20.0, b: 2.0 };
    planted_partition(&params, 42).unwrap()
}

/// Ground truth restricted to a node subset, pairing each listed node with
/// its generator block.
fn truth_on(nodes: &[NodeId], map: &[NodeId], truth: &Labeling) -> Labeling {
    let groups = nodes.iter().map(|&u| truth.group_of(map[u as usize])).collect();
    Labeling::new(groups, truth.k()).unwrap()
}

/// Criterion-1 pipeline for one seed: full distance matrix on the giant
/// component, two-group fit, labeling serialized as CSV.
fn recovery_labeling_csv(graph_seed: u64, rd_seed: u64) -> (Vec<u8>, f64) {
    let (g, truth) = planted_2000(graph_seed);
    let (giant, map) = g.giant_component(ComponentMode::Weak).unwrap();
    let all: Vec<NodeId> = (0..giant.node_count() as NodeId).collect();
    let d = DistanceMatrix::compute(&giant, &all, &all).unwrap();
    let model = regular_decomposition(&d, &RdConfig64::new(2), rd_seed).unwrap();
    let error = misclassification_rate(&model.labeling, &truth_on(&all, &map, &truth)).unwrap();
    let mut csv = Vec::new();
    model.labeling.write_csv(giant.original_ids(), &mut csv).unwrap();
    (csv, error)
}

/// Criterion-2 pipeline: mean intra- and inter-block hop distance over all
/// ordered node pairs of the giant component, one BFS per source.
fn block_distance_means() -> (f64, f64) {
    let (g, truth) = planted_10k();
    let (giant, map) = g.giant_component(ComponentMode::Weak).unwrap();
    let ng = giant.node_count();
    let blocks: Vec<u8> = (0..ng).map(|j| truth.group_of(map[j]) as u8).collect();

    let (sums, counts) = (0..ng as NodeId)
        .into_par_iter()
        .map(|u| {
            let row = giant.sssp_distances(u);
            let bu = blocks[u as usize];
            let mut s = [0u64; 2];
            let mut c = [0u64; 2];
            for (j, &dist) in row.iter().enumerate() {
                if j == u as usize {
                    continue;
                }
                let side = (blocks[j] != bu) as usize;
                s[side] += dist as u64;
                c[side] += 1;
            }
            (s, c)
        })
        .reduce(
            || ([0u64; 2], [0u64; 2]),
            |a, b| {
                (
                    [a.0[0] + b.0[0], a.0[1] + b.0[1]],
                    [a.1[0] + b.1[0], a.1[1] + b.1[1]],
                )
            },
        );
    (
        sums[0] as f64 / counts[0] as f64,
        sums[1] as f64 / counts[1] as f64,
    )
}

/// One criterion-3 trial: sample references and targets from the 10k
/// instance, fit with m references, score against the generator blocks.
fn sweep_trial(
    giant: &Graph,
    map: &[NodeId],
    truth: &Labeling,
    m: usize,
    n_targets: usize,
    trial_seed: u64,
) -> (Vec<u8>, f64) {
    let refs = uniform_references(giant, m, trial_seed.wrapping_mul(7).wrapping_add(1)).unwrap();
    let targets =
        uniform_references(giant, n_targets, trial_seed.wrapping_mul(7).wrapping_add(3)).unwrap();
    let d = DistanceMatrix::compute(giant, &refs.nodes, &targets.nodes).unwrap();
    let model = regular_decomposition(&d, &RdConfig64::new(2), trial_seed).unwrap();
    let error =
        misclassification_rate(&model.labeling, &truth_on(&targets.nodes, map, truth)).unwrap();
    let ids: Vec<String> = targets
        .nodes
        .iter()
        .map(|&u| giant.original_id(u).to_string())
        .collect();
    let mut csv = Vec::new();
    model.labeling.write_csv(&ids, &mut csv).unwrap();
    (csv, error)
}

#[test]
fn c1_planted_partition_recovery() {
    let _lock = run_alone();
    let mut errors: Vec<f64> = (0..5u64)
        .map(|s| recovery_labeling_csv(1000 + s, s).1)
        .collect();
    errors.sort_by(f64::total_cmp);
    let median = errors[2];
    report(
        1,
        "planted partition recovery, full matrix",
        median <= 0.05,
        &format!(
            "median misclassification {:.2}% over 5 seeds (worst {:.2}%)",
            100.0 * median,
            100.0 * errors[4]
        ),
    );
}

#[test]
fn c2_intra_inter_distance_means() {
    let _lock = run_alone();
    // Known to fail: with a=20, b=2 the giant component grows by a factor
    // of lambda1 = 11 per hop, which puts the true means near 3.92 and 4.39
    // at n = 10^4. The 4.75/5.0 bands would require a growth factor near 7
    // (or n near 10^5). The bands are kept as stated rather than refit.
    let (intra, inter) = block_distance_means();
    let ok = (intra - 4.75).abs() <= 0.15 && (inter - 5.0).abs() <= 0.15;
    report(
        2,
        "intra/inter distance means",
        ok,
        &format!("intra {intra:.3} (want 4.75 +- 0.15), inter {inter:.3} (want 5.0 +- 0.15)"),
    );
}

#[test]
fn c3_reference_node_sweep() {
    let _lock = run_alone();
    let (g, truth) = planted_10k();
    let (giant, map) = g.giant_component(ComponentMode::Weak).unwrap();
    let target_sizes = [100usize, 175, 250, 325, 400];

    let mut errors_400 = Vec::new();
    let mut wins = 0;
    for (t, &n_targets) in target_sizes.iter().enumerate() {
        let trial_seed = 2000 + t as u64;
        let (_, e400) = sweep_trial(&giant, &map, &truth, 400, n_targets, trial_seed);
        let (_, e50) = sweep_trial(&giant, &map, &truth, 50, n_targets, trial_seed);
        if e400 < e50 {
            wins += 1;
        }
        errors_400.push(e400);
    }
    let mean = errors_400.iter().sum::<f64>() / errors_400.len() as f64;
    let ok = mean <= 0.03 && wins >= 4;
    report(
        3,
        "reference-node sweep",
        ok,
        &format!(
            "mean error at m=400: {:.2}% (want <= 3%); m=400 beat m=50 in {wins}/5 trials (want >= 4)",
            100.0 * mean
        ),
    );
}

#[test]
fn c4_oracle_equivalence() {
    let _lock = run_alone();

    // exhaustive minimum over every two-group labeling with both groups used
    fn exhaustive_min(d: &DistanceMatrix) -> f64 {
        let n = d.num_targets();
        let mut best = f64::INFINITY;
        for mask in 1u32..(1 << n) - 1 {
            let groups: Vec<u32> = (0..n).map(|j| (mask >> j) & 1).collect();
            let z = Labeling::new(groups, 2).unwrap();
            let cost: f64 = total_cost(d, &z, 1e-6).unwrap();
            if cost < best {
                best = cost;
            }
        }
        best
    }

    let mut hits = 0;
    for trial in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(9000 + trial);
        let m = rng.random_range(1..=3usize);
        let n = rng.random_range(4..=8usize);
        let rows: Vec<Vec<u32>> = (0..m)
            .map(|_| (0..n).map(|_| rng.random_range(1..=6)).collect())
            .collect();
        let d = DistanceMatrix::from_rows(&rows).unwrap();
        let model = regular_decomposition(&d, &RdConfig64::new(2), trial).unwrap();
        let best = exhaustive_min(&d);
        assert!(
            model.cost >= best - 1e-9,
            "search beat the exhaustive minimum: {} < {best}",
            model.cost
        );
        if model.cost - best <= 1e-9 * best.abs().max(1.0) {
            hits += 1;
        }
    }
    report(
        4,
        "oracle equivalence on small instances",
        hits >= 95,
        &format!("matched the exhaustive minimum in {hits}/100 trials (want >= 95)"),
    );
}

#[test]
fn c5_descent_property() {
    let _lock = run_alone();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut checked = 0;
    let mut worst_rise = f64::NEG_INFINITY;
    while checked < 1000 {
        let m = rng.random_range(1..=3usize);
        let n = rng.random_range(4..=12usize);
        let k = rng.random_range(1..=4u32).min(n as u32);
        let rows: Vec<Vec<u32>> = (0..m)
            .map(|_| (0..n).map(|_| rng.random_range(0..=9)).collect())
            .collect();
        let d = DistanceMatrix::from_rows(&rows).unwrap();
        let groups: Vec<u32> = loop {
            let candidate: Vec<u32> = (0..n).map(|_| rng.random_range(0..k)).collect();
            let mut seen = vec![false; k as usize];
            for &g in &candidate {
                seen[g as usize] = true;
            }
            if seen.iter().all(|&s| s) {
                break candidate;
            }
        };
        let z = Labeling::new(groups, k).unwrap();

        // only updates that leave every group nonempty carry the guarantee
        let means = estimate_means(&d, &z, 1e-6).unwrap();
        let costs = node_costs(&d, &means).unwrap();
        let mut seen = vec![false; k as usize];
        for j in 0..n {
            seen[costs.argmin_row(j) as usize] = true;
        }
        if !seen.iter().all(|&s| s) {
            continue;
        }

        let before: f64 = total_cost(&d, &z, 1e-6).unwrap();
        let next = local_update(&d, &z, 1e-6).unwrap();
        let after: f64 = total_cost(&d, &next, 1e-6).unwrap();
        worst_rise = worst_rise.max(after - before);
        checked += 1;
    }
    report(
        5,
        "descent property",
        worst_rise <= 1e-12,
        &format!("worst cost change over 1000 updates: {worst_rise:.3e} (want <= 1e-12)"),
    );
}

#[test]
fn c6_model_order_selection() {
    let _lock = run_alone();
    // Known to fail: on real distance matrices the cost keeps dropping past
    // k=2 by about 7% of the total span per extra group (extra groups soak
    // up genuine distance variance), so the 2% relative-drop rule runs to
    // k_max. The knee is visible in the curve (the 1->2 drop is 81% of the
    // span, 9x the next one) but tau = 0.02 does not detect it. Tau and the
    // rule are kept as stated rather than retuned.
    //
    // 25 restarts per group count keep the sweep affordable; the two-block
    // optimum here is found from nearly any start, and a 50-restart probe
    // produced the same curve shape.
    let base = RdConfig64 { s_max: 25, ..RdConfig64::new(2) };
    let mut hits = 0;
    let mut picks = Vec::new();
    for s in 0..5u64 {
        let (g, _) = planted_2000(1000 + s);
        let (giant, _) = g.giant_component(ComponentMode::Weak).unwrap();
        let all: Vec<NodeId> = (0..giant.node_count() as NodeId).collect();
        let d = DistanceMatrix::compute(&giant, &all, &all).unwrap();
        let sel = select_k(&d, 6, &base, 0.02, s).unwrap();
        picks.push(sel.k_star);
        if sel.k_star == 2 {
            hits += 1;
        }
    }
    report(
        6,
        "model-order selection",
        hits >= 4,
        &format!("k* = {picks:?} across 5 seeds; k* = 2 in {hits}/5 (want >= 4)"),
    );
}

#[test]
fn c7_theory_consistency() {
    let _lock = run_alone();

    // (a) the growth recursion against explicit 2x2 matrix powers
    for &(a, b) in &[(20.0f64, 2.0f64), (7.0, 3.0), (13.0, 5.0)] {
        let rows = [[a / 2.0, b / 2.0], [b / 2.0, a / 2.0]];
        let mut v = [1.0f64, 0.0];
        for t in 1..=20u32 {
            v = [
                rows[0][0] * v[0] + rows[0][1] * v[1],
                rows[1][0] * v[0] + rows[1][1] * v[1],
            ];
            let (n1, n2) = neighborhood_growth(a, b, t);
            assert!(
                (n1 - v[0]).abs() <= 1e-9 * v[0].abs()
                    && (n2 - v[1]).abs() <= 1e-9 * v[1].abs().max(1.0),
                "growth mismatch at a={a} b={b} t={t}"
            );
        }
    }

    // (b) solver residuals stay small relative to n
    for &n in &[1_000u64, 10_000, 100_000] {
        let (d1, d2) = solve_distances(20.0f64, 2.0, n).unwrap();
        let (l1, l2) = (11.0f64, 9.0f64);
        let r1 = l1.powf(d1 + 1.0) / (l1 - 1.0) + l2.powf(d1 + 1.0) / (l2 - 1.0) - 2.0 - n as f64;
        let r2 = l1.powf(d2 + 1.0) / (l1 - 1.0) - l2.powf(d2 + 1.0) / (l2 - 1.0) - 2.0 - n as f64;
        assert!(
            r1.abs() <= 1e-6 * n as f64 && r2.abs() <= 1e-6 * n as f64,
            "residuals {r1:.3e}, {r2:.3e} too large at n={n}"
        );
    }

    // (c) the asymptotic form closes in on the numeric solution as n grows
    let mut prev = (f64::INFINITY, f64::INFINITY);
    for &n in &[1_000u64, 10_000, 100_000, 1_000_000] {
        let (d1, d2) = solve_distances(20.0f64, 2.0, n).unwrap();
        let q = spectral_quantities(20.0f64, 2.0, n).unwrap();
        let dev = ((d1 - (q.d - q.delta)).abs(), (d2 - (q.d + q.delta)).abs());
        assert!(
            dev.0 < prev.0 && dev.1 < prev.1,
            "discrepancy did not shrink at n={n}: {dev:?} vs {prev:?}"
        );
        prev = dev;
    }

    // (d) detectability matches the spectral condition across a 20x20 grid
    let mut above = 0;
    let mut below = 0;
    for i in 0..20 {
        for j in 0..20 {
            let a = 4.0 + 0.8 * i as f64;
            let b = 0.3 * j as f64;
            let (l1, l2) = ((a + b) / 2.0, (a - b) / 2.0);
            if l2 <= 1.0 {
                continue;
            }
            let spectral = l2 * l2 > l1;
            assert_eq!(
                above_ks_threshold(a, b),
                spectral,
                "threshold disagreement at a={a} b={b}"
            );
            if spectral {
                above += 1;
            } else {
                below += 1;
            }
        }
    }
    assert!(above > 0 && below > 0, "grid never crossed the threshold");

    // the asymptotic cost gap stays positive and usable above threshold
    assert!(cost_gap(20.0f64, 2.0, 10_000).unwrap() > 0.0);

    report(
        7,
        "theory consistency",
        true,
        &format!("growth, residuals, asymptotics, and {above}+{below} grid points all agree"),
    );
}

#[test]
fn c8_determinism_across_thread_counts() {
    let _lock = run_alone();

    fn on_pool<T: Send>(threads: usize, job: impl FnOnce() -> T + Send) -> T {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(job)
    }

    let (csv_a, _) = on_pool(1, || recovery_labeling_csv(1000, 0));
    let (csv_b, _) = on_pool(4, || recovery_labeling_csv(1000, 0));
    let recovery_ok = csv_a == csv_b;

    let means_a = on_pool(1, block_distance_means);
    let means_b = on_pool(4, block_distance_means);
    let means_ok = means_a.0.to_bits() == means_b.0.to_bits()
        && means_a.1.to_bits() == means_b.1.to_bits();

    let (g, truth) = planted_10k();
    let (giant, map) = g.giant_component(ComponentMode::Weak).unwrap();
    let sweep_a = on_pool(1, || sweep_trial(&giant, &map, &truth, 400, 250, 2002).0);
    let sweep_b = on_pool(4, || sweep_trial(&giant, &map, &truth, 400, 250, 2002).0);
    let sweep_ok = sweep_a == sweep_b;

    report(
        8,
        "determinism across thread counts",
        recovery_ok && means_ok && sweep_ok,
        &format!(
            "1-thread vs 4-thread byte equality: recovery {recovery_ok}, distance means {means_ok}, sweep {sweep_ok}"
        ),
    );
}

#[test]
fn c9_local_update_scaling() {
    let _lock = run_alone();
    let mut rng = ChaCha8Rng::seed_from_u64(5150);
    let mut points = Vec::new();
    for &n in &[1_000usize, 10_000, 100_000] {
        let rows: Vec<Vec<u32>> = (0..30)
            .map(|_| (0..n).map(|_| rng.random_range(1..=10)).collect())
            .collect();
        let d = DistanceMatrix::from_rows(&rows).unwrap();
        let groups: Vec<u32> = (0..n).map(|j| (j % 10) as u32).collect();
        let z = Labeling::new(groups, 10).unwrap();

        local_update(&d, &z, 1e-6f64).unwrap();
        let reps = match n {
            1_000 => 15,
            10_000 => 7,
            _ => 3,
        };
        let mut best = f64::INFINITY;
        for _ in 0..reps {
            let t0 = Instant::now();
            local_update(&d, &z, 1e-6f64).unwrap();
            best = best.min(t0.elapsed().as_secs_f64());
        }
        points.push(((n as f64).ln(), best.ln()));
    }

    let xm = points.iter().map(|p| p.0).sum::<f64>() / points.len() as f64;
    let ym = points.iter().map(|p| p.1).sum::<f64>() / points.len() as f64;
    let slope = points.iter().map(|p| (p.0 - xm) * (p.1 - ym)).sum::<f64>()
        / points.iter().map(|p| (p.0 - xm) * (p.0 - xm)).sum::<f64>();
    report(
        9,
        "local update scaling",
        (0.9..=1.2).contains(&slope),
        &format!("fitted runtime exponent {slope:.3} over n = 1e3, 1e4, 1e5 (want within [0.9, 1.2])"),
    );
}
