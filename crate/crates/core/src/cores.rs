//! k-cores two ways: classical peeling on a realized multihypergraph, and the
//! cut-off line algorithm on a clone configuration with lazy edge revelation.
//!
//! Peeling is the per-instance ground truth. The cut-off line algorithm
//! reveals edges only when a vertex goes light (fewer than k unmatched
//! clones): each of its unmatched clones is matched with the d-1 unmatched
//! clones of greatest height, an exchangeable stand-in for matching uniformly
//! random clones under which the cut-off line (the greatest height still
//! unmatched) only ever moves down. Whatever survives is again a uniform
//! clone population below the line, so the survivors are grouped uniformly
//! into the core edges and both routes must land on the same core.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::collections::VecDeque;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypergraph::MultiHypergraph;
use crate::rng::{derive_stream, SeedSpec};
use crate::sampler::{group_ids_with_rng, CloneConfiguration};
use crate::stats::{ks_uniform, KsTest};

/// Outcome of a k-core computation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoreResult {
    /// Sorted surviving vertex set.
    pub core_vertices: Vec<usize>,
    /// Vertices removed, in order, paired with their removal step.
    pub removal_order: Vec<(usize, usize)>,
    /// Edges whose slots all lie inside the core.
    pub core_edges: Vec<Vec<usize>>,
}

impl CoreResult {
    pub fn core_size(&self) -> usize {
        self.core_vertices.len()
    }
}

/// Classical peeling: repeatedly delete a vertex of degree < k, where degree
/// counts slots among edges entirely inside the remaining vertex set.
///
/// The k-core is unique, so `order_seed`, which randomizes the choice among
/// currently-light vertices, may reshuffle `removal_order` but never the
/// core. k = 0 returns every vertex.
pub fn peel_kcore(h: &MultiHypergraph, k: usize, order_seed: SeedSpec) -> CoreResult {
    let n = h.vertex_count();
    let mut rng = derive_stream(order_seed);

    let mut degree = vec![0usize; n];
    let mut incidence: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (e, edge) in h.edges().enumerate() {
        let mut prev = usize::MAX;
        for &v in edge {
            degree[v] += 1;
            if v != prev {
                incidence[v].push(e);
                prev = v;
            }
        }
    }

    let mut edge_alive = vec![true; h.edge_count()];
    let mut removed = vec![false; n];
    let mut queued = vec![false; n];
    let mut light: Vec<usize> = Vec::new();
    for v in 0..n {
        if degree[v] < k {
            light.push(v);
            queued[v] = true;
        }
    }

    let mut removal_order = Vec::new();
    let mut step = 0usize;
    while !light.is_empty() {
        let pick = rng.random_range(0..light.len());
        let v = light.swap_remove(pick);
        removed[v] = true;
        removal_order.push((v, step));
        step += 1;
        for &e in &incidence[v] {
            if !edge_alive[e] {
                continue;
            }
            edge_alive[e] = false;
            for &u in h.edge(e) {
                degree[u] -= 1;
                if !removed[u] && !queued[u] && degree[u] < k {
                    light.push(u);
                    queued[u] = true;
                }
            }
        }
    }

    let core_vertices: Vec<usize> = (0..n).filter(|&v| !removed[v]).collect();
    let core_edges: Vec<Vec<usize>> = h
        .edges()
        .enumerate()
        .filter(|&(e, _)| edge_alive[e])
        .map(|(_, edge)| edge.to_vec())
        .collect();
    CoreResult {
        core_vertices,
        removal_order,
        core_edges,
    }
}

/// Trace of one cut-off line run.
#[derive(Debug, Clone, Serialize)]
pub struct CutoffTrace {
    /// Line position after each revealed edge; non-increasing.
    pub theta_steps: Vec<f64>,
    /// Revealed edges as clone-id d-sets, in revelation order.
    pub revealed_edges: Vec<Vec<usize>>,
    /// Final line position: greatest unmatched height at termination, λ when
    /// nothing was revealed, 0 when no clone survived.
    pub final_theta: f64,
    /// Clone ids unmatched when the line stopped.
    pub survivor_clones: Vec<usize>,
    /// Clones never placed in an edge: degenerate-endgame clones plus the
    /// survivor-grouping leftover.
    pub discarded_clones: Vec<usize>,
}

#[derive(Clone, Copy, PartialEq)]
struct HeapEntry {
    height: f64,
    clone: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Heights are validated finite; ties (measure-zero) break by clone id
        // so runs are reproducible.
        self.height
            .total_cmp(&other.height)
            .then_with(|| self.clone.cmp(&other.clone))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Grabs the greatest-height unmatched clone, dropping stale heap entries.
fn pop_highest(heap: &mut BinaryHeap<HeapEntry>, matched: &[bool]) -> Option<HeapEntry> {
    while let Some(entry) = heap.pop() {
        if !matched[entry.clone] {
            return Some(entry);
        }
    }
    None
}

fn peek_highest(heap: &mut BinaryHeap<HeapEntry>, matched: &[bool]) -> Option<f64> {
    while let Some(entry) = heap.peek() {
        if matched[entry.clone] {
            heap.pop();
        } else {
            return Some(entry.height);
        }
    }
    None
}

/// Runs the cut-off line algorithm on a clone configuration with heights.
///
/// Returns the core, the line trace, and the revealed multihypergraph
/// (revealed edges plus the uniformly grouped survivor edges, mapped through
/// the owner map). `seed` drives only the survivor grouping; the line phase
/// is deterministic given the configuration, processing doomed vertices FIFO
/// and each vertex's clones in increasing id order.
///
/// The grouping discards `survivors mod d` leftover clones, which at finite
/// size can drop a surviving vertex below k realized incidences; the light-
/// vertex loop therefore continues on the realized core edges until every
/// core vertex holds k of them, keeping the result equal to the peeling core
/// of the returned hypergraph on every instance.
pub fn cutoff_line_kcore(
    config: &CloneConfiguration,
    k: usize,
    seed: SeedSpec,
) -> Result<(CoreResult, CutoffTrace, MultiHypergraph)> {
    let heights = config
        .heights
        .as_ref()
        .ok_or_else(|| Error::invalid("cut-off line algorithm needs clone heights"))?;
    if k == 0 {
        return Err(Error::invalid("cut-off line algorithm needs k >= 1"));
    }
    let n = config.n;
    let d = config.d;
    let total = config.clone_count();

    let mut matched = vec![false; total];
    let mut unmatched_count: Vec<usize> = config.counts();
    let ranges = config.clone_ranges();

    let mut heap: BinaryHeap<HeapEntry> = (0..total)
        .map(|c| HeapEntry {
            height: heights[c],
            clone: c,
        })
        .collect();
    let mut pool_size = total;

    let mut doomed = vec![false; n];
    let mut removed = vec![false; n];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for v in 0..n {
        if unmatched_count[v] < k {
            doomed[v] = true;
            queue.push_back(v);
        }
    }

    let mut theta_steps: Vec<f64> = Vec::new();
    let mut revealed_edges: Vec<Vec<usize>> = Vec::new();
    let mut discarded_clones: Vec<usize> = Vec::new();
    let mut removal_order: Vec<(usize, usize)> = Vec::new();
    let mut step = 0usize;

    while let Some(v) = queue.pop_front() {
        for c in ranges[v].clone() {
            if matched[c] {
                continue;
            }
            if pool_size < d {
                // Degenerate endgame: the edge cannot be completed. Leave the
                // remainder unmatched; it becomes recorded debris below.
                break;
            }
            matched[c] = true;
            pool_size -= 1;
            unmatched_count[v] -= 1;
            let mut edge = vec![c];
            for _ in 0..d - 1 {
                let top = pop_highest(&mut heap, &matched).expect("pool_size said clones remain");
                matched[top.clone] = true;
                pool_size -= 1;
                let owner = config.clone_owner[top.clone];
                unmatched_count[owner] -= 1;
                if !doomed[owner] && unmatched_count[owner] < k {
                    doomed[owner] = true;
                    queue.push_back(owner);
                }
                edge.push(top.clone);
            }
            edge.sort_unstable();
            revealed_edges.push(edge);
            theta_steps.push(peek_highest(&mut heap, &matched).unwrap_or(0.0));
        }
        removed[v] = true;
        removal_order.push((v, step));
        step += 1;
    }

    let survivor_clones: Vec<usize> = (0..total).filter(|&c| !matched[c]).collect();
    let final_theta = match theta_steps.last() {
        Some(&t) => t,
        None => config.lambda,
    };

    // Anything still unmatched on a doomed vertex is endgame debris.
    for &c in &survivor_clones {
        if removed[config.clone_owner[c]] {
            discarded_clones.push(c);
        }
    }
    let live_survivors: Vec<usize> = survivor_clones
        .iter()
        .copied()
        .filter(|&c| !removed[config.clone_owner[c]])
        .collect();

    // Group the surviving clones uniformly below the line into core edges.
    let mut rng = derive_stream(seed);
    let grouping = group_ids_with_rng(live_survivors, d, &mut rng);
    discarded_clones.extend(grouping.discarded.iter().copied());
    discarded_clones.sort_unstable();

    // Leftover discards can leave a vertex with fewer than k realized
    // incidences; finish the cascade on the realized core edges.
    let core_edge_ids: Vec<Vec<usize>> = grouping.edges;
    let mut realized_degree = vec![0usize; n];
    let mut edge_alive = vec![true; core_edge_ids.len()];
    let mut incidence: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (e, edge) in core_edge_ids.iter().enumerate() {
        let mut prev = usize::MAX;
        for &c in edge {
            let owner = config.clone_owner[c];
            realized_degree[owner] += 1;
            if owner != prev {
                incidence[owner].push(e);
                prev = owner;
            }
        }
    }
    let mut queued: Vec<bool> = (0..n)
        .map(|v| !removed[v] && realized_degree[v] < k)
        .collect();
    let mut cascade: VecDeque<usize> = (0..n).filter(|&v| queued[v]).collect();
    while let Some(v) = cascade.pop_front() {
        removed[v] = true;
        removal_order.push((v, step));
        step += 1;
        for &e in &incidence[v] {
            if !edge_alive[e] {
                continue;
            }
            edge_alive[e] = false;
            for &c in &core_edge_ids[e] {
                let owner = config.clone_owner[c];
                realized_degree[owner] -= 1;
                if !removed[owner] && !queued[owner] && realized_degree[owner] < k {
                    queued[owner] = true;
                    cascade.push_back(owner);
                }
            }
        }
    }
    // Core edges killed by the cascade still belong to the revealed graph.
    let mut dead_edges = Vec::new();
    let mut live_edges = Vec::new();
    for (e, edge) in core_edge_ids.into_iter().enumerate() {
        if edge_alive[e] {
            live_edges.push(edge);
        } else {
            dead_edges.push(edge);
        }
    }

    let core_vertices: Vec<usize> = (0..n).filter(|&v| !removed[v]).collect();
    let to_vertices = |edge: &Vec<usize>| -> Vec<usize> {
        let mut e: Vec<usize> = edge.iter().map(|&c| config.clone_owner[c]).collect();
        e.sort_unstable();
        e
    };
    let core_edges: Vec<Vec<usize>> = live_edges.iter().map(to_vertices).collect();
    let all_edges: Vec<Vec<usize>> = revealed_edges
        .iter()
        .chain(dead_edges.iter())
        .chain(live_edges.iter())
        .map(to_vertices)
        .collect();
    let hypergraph = MultiHypergraph::new(n, d, all_edges)?;

    let trace = CutoffTrace {
        theta_steps,
        revealed_edges,
        final_theta,
        survivor_clones,
        discarded_clones,
    };
    let core = CoreResult {
        core_vertices,
        removal_order,
        core_edges,
    };
    Ok((core, trace, hypergraph))
}

/// Per-instance coupling report: the cut-off route against the peeling
/// oracle, plus the structural line invariants.
#[derive(Debug, Clone, Serialize)]
pub struct CouplingReport {
    pub core_match: bool,
    pub theta_monotone: bool,
    pub heights_below_theta: bool,
    pub failures: Vec<String>,
}

impl CouplingReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks, on one instance: (a) the cut-off core equals the peeling core of
/// the revealed multihypergraph, (b) the line trajectory is non-increasing,
/// (c) every survivor height sits at or below the final line position.
pub fn verify_coupling(
    config: &CloneConfiguration,
    k: usize,
    seed: SeedSpec,
) -> Result<CouplingReport> {
    let (core, trace, revealed) = cutoff_line_kcore(config, k, seed)?;
    let heights = config.heights.as_ref().expect("checked by cutoff");
    let mut failures = Vec::new();

    let oracle = peel_kcore(&revealed, k, seed.with_stream(seed.stream_index ^ 0x9E37));
    let core_match = oracle.core_vertices == core.core_vertices;
    if !core_match {
        failures.push(format!(
            "core mismatch: cutoff {} vertices, peel {} vertices",
            core.core_vertices.len(),
            oracle.core_vertices.len()
        ));
    }

    let mut prev = config.lambda;
    let mut theta_monotone = true;
    for (i, &t) in trace.theta_steps.iter().enumerate() {
        if t > prev {
            theta_monotone = false;
            failures.push(format!("theta rose from {prev} to {t} at step {i}"));
            break;
        }
        prev = t;
    }
    if !(0.0..=config.lambda).contains(&trace.final_theta) {
        theta_monotone = false;
        failures.push(format!(
            "final theta {} outside [0, lambda]",
            trace.final_theta
        ));
    }

    let heights_below_theta = trace
        .survivor_clones
        .iter()
        .all(|&c| heights[c] <= trace.final_theta);
    if !heights_below_theta {
        failures.push("survivor height above final theta".to_string());
    }

    Ok(CouplingReport {
        core_match,
        theta_monotone,
        heights_below_theta,
        failures,
    })
}

/// Pools survivor heights across `trials` fresh configurations at fixed
/// parameters, normalizes each by its trial's final line position, and tests
/// uniformity on [0, 1] with a one-sample KS test.
///
/// The single clone defining each trial's line position (its height equals
/// `final_theta` exactly) is excluded: it is the line, not a sample under it.
/// The remaining normalized heights are exactly i.i.d. uniform when the
/// survivors form a fresh clone population below the line.
pub fn survivor_height_uniformity(
    n: usize,
    d: usize,
    lambda: f64,
    k: usize,
    trials: usize,
    seed: SeedSpec,
) -> Result<KsTest> {
    let mut pooled = Vec::new();
    for t in 0..trials {
        let spec = SeedSpec::new(seed.master_seed, seed.stream_index.wrapping_add(t as u64));
        let config = CloneConfiguration::sample_with_heights(n, d, lambda, spec)?;
        let heights = config.heights.as_ref().expect("sampled with heights");
        let (_, trace, _) =
            cutoff_line_kcore(&config, k, spec.with_stream(spec.stream_index ^ 0x51))?;
        if trace.final_theta <= 0.0 {
            continue;
        }
        let mut line_clone_skipped = false;
        for &c in &trace.survivor_clones {
            let h = heights[c];
            if !line_clone_skipped && h == trace.final_theta {
                line_clone_skipped = true;
                continue;
            }
            pooled.push(h / trace.final_theta);
        }
    }
    if pooled.is_empty() {
        return Err(Error::invalid(
            "no survivor clones pooled; parameters too subcritical",
        ));
    }
    Ok(ks_uniform(&pooled))
}
