//! Exact solver for the discrete transportation problem between two weighted
//! point clouds, by successive shortest augmenting paths with node potentials
//! (Dijkstra on the dense bipartite residual graph). Deterministic: ties are
//! broken by node index.

use crate::disk::Point;

/// Minimum total cost of shipping the integer supplies to the integer
/// demands with Euclidean distances as unit costs. Supplies and demands must
/// balance.
pub fn min_cost_transport(sources: &[(Point, u64)], targets: &[(Point, u64)]) -> f64 {
    let n = sources.len();
    let m = targets.len();
    assert!(n > 0 && m > 0);
    let supply_total: u64 = sources.iter().map(|s| s.1).sum();
    let demand_total: u64 = targets.iter().map(|t| t.1).sum();
    assert_eq!(supply_total, demand_total, "unbalanced transport problem");

    let cost: Vec<f64> = (0..n)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .map(|(i, j)| sources[i].0.dist(targets[j].0))
        .collect();
    let mut flow = vec![0u64; n * m];
    let mut supply: Vec<u64> = sources.iter().map(|s| s.1).collect();
    let mut demand: Vec<u64> = targets.iter().map(|t| t.1).collect();
    // Potentials for sources and targets keep reduced costs nonnegative.
    let mut pot_s = vec![0.0f64; n];
    let mut pot_t = vec![0.0f64; m];

    let mut remaining = supply_total;
    while remaining > 0 {
        // Multi-source Dijkstra over the residual graph: forward edges i->j
        // always present (unbounded), backward edges j->i present when
        // flow(i,j) > 0. Distances are in reduced costs.
        let mut dist_s = vec![f64::INFINITY; n];
        let mut dist_t = vec![f64::INFINITY; m];
        let mut prev_t = vec![usize::MAX; m]; // source feeding each target
        let mut prev_s = vec![usize::MAX; n]; // target feeding each source (back edge)
        let mut done_s = vec![false; n];
        let mut done_t = vec![false; m];
        for i in 0..n {
            if supply[i] > 0 {
                dist_s[i] = 0.0;
            }
        }
        loop {
            // Pick the unsettled node of smallest distance; sources win ties,
            // then lower index.
            let mut best = f64::INFINITY;
            let mut pick: Option<(bool, usize)> = None;
            for i in 0..n {
                if !done_s[i] && dist_s[i] < best {
                    best = dist_s[i];
                    pick = Some((true, i));
                }
            }
            for j in 0..m {
                if !done_t[j] && dist_t[j] < best {
                    best = dist_t[j];
                    pick = Some((false, j));
                }
            }
            let Some((is_source, idx)) = pick else { break };
            if is_source {
                done_s[idx] = true;
                let base = dist_s[idx];
                for j in 0..m {
                    if done_t[j] {
                        continue;
                    }
                    let rc = cost[idx * m + j] + pot_s[idx] - pot_t[j];
                    let cand = base + rc;
                    if cand < dist_t[j] {
                        dist_t[j] = cand;
                        prev_t[j] = idx;
                    }
                }
            } else {
                done_t[idx] = true;
                let base = dist_t[idx];
                for i in 0..n {
                    if done_s[i] || flow[i * m + idx] == 0 {
                        continue;
                    }
                    let rc = -cost[i * m + idx] - pot_s[i] + pot_t[idx];
                    let cand = base + rc;
                    if cand < dist_s[i] {
                        dist_s[i] = cand;
                        prev_s[i] = idx;
                    }
                }
            }
        }

        // Cheapest target with unmet demand.
        let mut sink = usize::MAX;
        let mut sink_dist = f64::INFINITY;
        for j in 0..m {
            if demand[j] > 0 && dist_t[j] < sink_dist {
                sink_dist = dist_t[j];
                sink = j;
            }
        }
        assert!(sink != usize::MAX, "disconnected transport problem");

        // Bottleneck along the alternating path back to a source.
        let mut bottleneck = demand[sink];
        {
            let mut j = sink;
            loop {
                let i = prev_t[j];
                if prev_s[i] == usize::MAX {
                    bottleneck = bottleneck.min(supply[i]);
                    break;
                }
                let back = prev_s[i];
                bottleneck = bottleneck.min(flow[i * m + back]);
                j = back;
            }
        }
        // Augment.
        {
            let mut j = sink;
            loop {
                let i = prev_t[j];
                flow[i * m + j] += bottleneck;
                if prev_s[i] == usize::MAX {
                    supply[i] -= bottleneck;
                    break;
                }
                let back = prev_s[i];
                flow[i * m + back] -= bottleneck;
                j = back;
            }
            demand[sink] -= bottleneck;
        }
        remaining -= bottleneck;

        // Potential update keeps reduced costs nonnegative next round.
        let max_settled = dist_t
            .iter()
            .chain(dist_s.iter())
            .filter(|d| d.is_finite())
            .fold(0.0f64, |a, &b| a.max(b));
        for i in 0..n {
            pot_s[i] += if dist_s[i].is_finite() { dist_s[i] } else { max_settled };
        }
        for j in 0..m {
            pot_t[j] += if dist_t[j].is_finite() { dist_t[j] } else { max_settled };
        }
    }

    let mut total = 0.0;
    for i in 0..n {
        for j in 0..m {
            if flow[i * m + j] > 0 {
                total += flow[i * m + j] as f64 * cost[i * m + j];
            }
        }
    }
    total
}
