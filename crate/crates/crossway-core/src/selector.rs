//! Priority graph construction and round subset extraction.
//!
//! After the velocity program commits pairwise orderings, each conflict pair
//! carries a directed edge from the prioritized vehicle to the yielding one.
//! Vehicles already at the velocity cap are "free": their commitment does
//! not depend on anyone ahead of them, unless the graph says otherwise. The
//! extraction drops the subtrees hanging under free vehicles whose
//! prioritized partners are outside their own reach, and resolves shared
//! subtrees between independent free vehicles, so the surviving set can be
//! committed this round and replanned vehicles keep a consistent ordering.
//!
//! The surviving set is never empty: nodes of a source strongly connected
//! component are unreachable from any excluding vehicle, so they always
//! keep their flag.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::milp::PriorityMatrix;

/// A velocity within this distance of the cap classifies a vehicle as free.
pub const FREE_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct PriorityGraph {
    pub n: usize,
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
    free: Vec<bool>,
}

impl PriorityGraph {
    /// Vehicles that must wait on `i`.
    pub fn successors(&self, i: usize) -> &[usize] {
        &self.succ[i]
    }

    /// Vehicles `i` must wait on.
    pub fn predecessors(&self, i: usize) -> &[usize] {
        &self.pred[i]
    }

    pub fn is_free(&self, i: usize) -> bool {
        self.free[i]
    }
}

/// Builds the graph from optimized velocities and the signed priority
/// matrix: an edge runs from the vehicle that clears each conflict first to
/// the one that waits.
pub fn build_graph(v: &[f64], s: &PriorityMatrix, v_max: f64) -> PriorityGraph {
    let n = v.len();
    debug_assert_eq!(s.n, n);
    let mut succ = vec![Vec::new(); n];
    let mut pred = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if i != j && s.get(i, j) == 1 {
                succ[i].push(j);
                pred[j].push(i);
            }
        }
    }
    let free = v.iter().map(|&vi| (vi - v_max).abs() <= FREE_TOL).collect();
    PriorityGraph { n, succ, pred, free }
}

/// Nodes reachable from `i` along priority edges, including `i` itself.
pub fn spanning_tree(g: &PriorityGraph, i: usize) -> BTreeSet<usize> {
    let mut seen = BTreeSet::new();
    let mut stack = vec![i];
    while let Some(u) = stack.pop() {
        if seen.insert(u) {
            for &w in g.successors(u) {
                if !seen.contains(&w) {
                    stack.push(w);
                }
            }
        }
    }
    seen
}

/// Per-vehicle commitment flags for one round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlagVector(pub Vec<bool>);

impl FlagVector {
    pub fn ones(&self) -> usize {
        self.0.iter().filter(|&&f| f).count()
    }

    pub fn is_set(&self, i: usize) -> bool {
        self.0[i]
    }
}

/// Two-pass subset extraction over a snapshot of the graph.
///
/// Pass 1: a free vehicle with a prioritized partner outside its own
/// reachable set cannot be committed yet; its whole reachable set is
/// dropped. Pass 2: two non-adjacent free vehicles with no prioritized
/// partners that share reachable vehicles would race for them; the shared
/// part and everything under it is dropped. Both passes read the original
/// graph, not intermediate flags.
pub fn extract_subset(v: &[f64], s: &PriorityMatrix, v_max: f64) -> FlagVector {
    let g = build_graph(v, s, v_max);
    let n = g.n;
    let st: Vec<BTreeSet<usize>> = (0..n).map(|i| spanning_tree(&g, i)).collect();
    let mut flags = vec![true; n];
    for i in 0..n {
        if g.is_free(i) && !g.predecessors(i).is_empty() {
            let all_inside = g.predecessors(i).iter().all(|p| st[i].contains(p));
            if !all_inside {
                for &m in &st[i] {
                    flags[m] = false;
                }
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let both_free_roots = g.is_free(i)
                && g.is_free(j)
                && g.predecessors(i).is_empty()
                && g.predecessors(j).is_empty();
            if !both_free_roots || s.get(i, j) != 0 {
                continue;
            }
            let shared: Vec<usize> = st[i].intersection(&st[j]).copied().collect();
            if shared.is_empty() {
                continue;
            }
            let mut drop = BTreeSet::new();
            for &m in &shared {
                drop.extend(st[m].iter().copied());
            }
            for &m in &drop {
                flags[m] = false;
            }
        }
    }
    FlagVector(flags)
}
