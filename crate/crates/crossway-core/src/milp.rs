//! Target-velocity optimization.
//!
//! Every conflict pair (i, j) must satisfy one of two orderings: i exits the
//! conflict zone before j enters, or the reverse. At constant target
//! velocities the orderings are bilinear in arrival times but linear in
//! velocities, giving one disjunctive big-M row pair per conflict with a
//! binary selector. The program maximizes the velocity sum over box bounds.
//!
//! `solve` runs best-bound branch and bound over the bounded-variable
//! simplex; `oracle_solve` enumerates every binary assignment and solves the
//! fixed-ordering subproblem by monotone ratio propagation, which is an
//! independent route to the same optimum and is used to validate `solve`.
//!
//! Ties between equal-objective assignments are broken toward the
//! lexicographically smallest binary vector in both solvers.

pub mod simplex;

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;

use simplex::{solve_lp, LpStatus};

/// A binary within this distance of an integer counts as integral.
pub const INTEGRALITY_TOL: f64 = 1e-6;
/// Objectives within this distance are tied.
pub const TIE_EPS: f64 = 1e-9;
/// Hard cap on conflicts the enumeration oracle accepts.
pub const ORACLE_MAX_CONFLICTS: usize = 20;

/// One conflict between vehicles `i` and `j`. `l_i` and `l_j` are distances
/// from each vehicle to the conflict point along its own path; `l_enter` and
/// `l_safe` bound the occupied window around the point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConflictTerm {
    pub i: usize,
    pub j: usize,
    pub l_i: f64,
    pub l_j: f64,
    pub l_enter: f64,
    pub l_safe: f64,
}

/// Assembled program. Decision vector is `n` velocities then `p` binaries.
/// Rows `2k` and `2k+1` encode the disjunction of pair `k`:
///
/// ```text
/// (l_enter - l_j) v_i + (l_safe + l_i) v_j + M1 b_k <= M1
/// (l_safe + l_j) v_i + (l_enter - l_i) v_j - M2 b_k <= 0
/// ```
///
/// so `b_k = 1` activates the first row (vehicle i clears before j enters)
/// and `b_k = 0` the second (j clears first). Each M is the row's maximum
/// over the velocity box plus one, which keeps the deactivated row slack at
/// every box point.
#[derive(Clone, Debug)]
pub struct MilpProblem {
    pub n: usize,
    pub p: usize,
    /// Dense `2p x (n + p)`, row-major.
    pub a: Vec<f64>,
    pub rhs: Vec<f64>,
    /// Per-row big-M constant.
    pub big_m: Vec<f64>,
    pub v_min: f64,
    pub v_max: f64,
    /// Conflict data for pair `k`; its binary lives in column `n + k`.
    pub pairs: Vec<ConflictTerm>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MilpStatus {
    Optimal,
    Infeasible,
}

#[derive(Clone, Debug)]
pub struct MilpSolution {
    pub velocities: Vec<f64>,
    pub binaries: Vec<u8>,
    pub objective: f64,
    pub status: MilpStatus,
}

impl MilpSolution {
    fn infeasible() -> Self {
        MilpSolution {
            velocities: Vec::new(),
            binaries: Vec::new(),
            objective: f64::NEG_INFINITY,
            status: MilpStatus::Infeasible,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MilpError {
    /// Velocity bounds must satisfy `0 < v_min <= v_max`, both finite.
    BadBounds,
    BadConflict { index: usize, reason: &'static str },
    TooManyConflicts { p: usize, max: usize },
}

impl core::fmt::Display for MilpError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            MilpError::BadBounds => write!(f, "velocity bounds must satisfy 0 < v_min <= v_max"),
            MilpError::BadConflict { index, reason } => {
                write!(f, "conflict term {}: {}", index, reason)
            }
            MilpError::TooManyConflicts { p, max } => {
                write!(f, "{} conflicts exceed the enumeration limit of {}", p, max)
            }
        }
    }
}

fn box_max(coeff: f64, v_min: f64, v_max: f64) -> f64 {
    if coeff > 0.0 {
        coeff * v_max
    } else {
        coeff * v_min
    }
}

/// Builds the program. Conflicts with an infinite distance carry the
/// "no vehicle" sentinel and are dropped. A vehicle already inside a
/// conflict entry window cannot be scheduled and is rejected.
pub fn assemble(
    n: usize,
    terms: &[ConflictTerm],
    v_min: f64,
    v_max: f64,
) -> Result<MilpProblem, MilpError> {
    if !(v_min > 0.0) || !(v_max >= v_min) || !v_max.is_finite() {
        return Err(MilpError::BadBounds);
    }
    let mut pairs = Vec::new();
    for (index, t) in terms.iter().enumerate() {
        if t.i >= n || t.j >= n {
            return Err(MilpError::BadConflict { index, reason: "vehicle index out of range" });
        }
        if t.i == t.j {
            return Err(MilpError::BadConflict { index, reason: "a vehicle cannot conflict with itself" });
        }
        if t.l_i.is_nan() || t.l_j.is_nan() || !t.l_enter.is_finite() || !t.l_safe.is_finite() {
            return Err(MilpError::BadConflict { index, reason: "distances must not be NaN" });
        }
        if t.l_enter < 0.0 || t.l_safe < 0.0 {
            return Err(MilpError::BadConflict { index, reason: "window widths must be nonnegative" });
        }
        if t.l_i.is_infinite() || t.l_j.is_infinite() {
            continue;
        }
        if t.l_i <= t.l_enter || t.l_j <= t.l_enter {
            return Err(MilpError::BadConflict {
                index,
                reason: "vehicle is already inside the conflict entry window",
            });
        }
        pairs.push(*t);
    }
    let p = pairs.len();
    let cols = n + p;
    let mut a = vec![0.0; 2 * p * cols];
    let mut rhs = vec![0.0; 2 * p];
    let mut big_m = vec![0.0; 2 * p];
    for (k, t) in pairs.iter().enumerate() {
        let c_i1 = t.l_enter - t.l_j;
        let c_j1 = t.l_safe + t.l_i;
        let m1 = (box_max(c_i1, v_min, v_max) + box_max(c_j1, v_min, v_max)).max(0.0) + 1.0;
        let r1 = 2 * k;
        a[r1 * cols + t.i] = c_i1;
        a[r1 * cols + t.j] = c_j1;
        a[r1 * cols + n + k] = m1;
        rhs[r1] = m1;
        big_m[r1] = m1;

        let c_i2 = t.l_safe + t.l_j;
        let c_j2 = t.l_enter - t.l_i;
        let m2 = (box_max(c_i2, v_min, v_max) + box_max(c_j2, v_min, v_max)).max(0.0) + 1.0;
        let r2 = 2 * k + 1;
        a[r2 * cols + t.i] = c_i2;
        a[r2 * cols + t.j] = c_j2;
        a[r2 * cols + n + k] = -m2;
        rhs[r2] = 0.0;
        big_m[r2] = m2;
    }
    Ok(MilpProblem { n, p, a, rhs, big_m, v_min, v_max, pairs })
}

struct HeapNode {
    bound: f64,
    id: u64,
    /// Per-binary: -1 free, otherwise the fixed value.
    fixed: Vec<i8>,
}

impl PartialEq for HeapNode {
    fn eq(&self, other: &Self) -> bool {
        self.bound.to_bits() == other.bound.to_bits() && self.id == other.id
    }
}
impl Eq for HeapNode {}
impl PartialOrd for HeapNode {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapNode {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        // Max-heap: larger bound first, then earlier creation.
        self.bound.total_cmp(&other.bound).then_with(|| other.id.cmp(&self.id))
    }
}

enum NodeLp {
    Infeasible,
    Evaluated { bound: f64, x: Vec<f64> },
}

fn rows_of(problem: &MilpProblem) -> Vec<Vec<f64>> {
    let cols = problem.n + problem.p;
    (0..2 * problem.p).map(|r| problem.a[r * cols..(r + 1) * cols].to_vec()).collect()
}

fn node_lp(problem: &MilpProblem, rows: &[Vec<f64>], fixed: &[i8]) -> NodeLp {
    let cols = problem.n + problem.p;
    let mut lower = vec![problem.v_min; cols];
    let mut upper = vec![problem.v_max; cols];
    let mut objective = vec![0.0; cols];
    for v in 0..problem.n {
        objective[v] = 1.0;
    }
    for k in 0..problem.p {
        let (lo, up) = match fixed[k] {
            -1 => (0.0, 1.0),
            v => (v as f64, v as f64),
        };
        lower[problem.n + k] = lo;
        upper[problem.n + k] = up;
    }
    match solve_lp(rows, &problem.rhs, &lower, &upper, &objective) {
        Ok(LpStatus::Optimal { x, objective }) => NodeLp::Evaluated { bound: objective, x },
        Ok(LpStatus::Infeasible) => NodeLp::Infeasible,
        Err(_) => {
            debug_assert!(false, "LP kernel failed on a boxed problem");
            NodeLp::Infeasible
        }
    }
}

type Incumbent = (f64, Vec<u8>, Vec<f64>);

fn lex_floor(fixed: &[i8]) -> Vec<u8> {
    fixed.iter().map(|&f| if f == 1 { 1 } else { 0 }).collect()
}

/// A subtree is worth exploring if it can strictly beat the incumbent, or
/// tie it with a lexicographically smaller binary vector. The smallest
/// vector the subtree can contain sets every free binary to zero.
fn explorable(bound: f64, fixed: &[i8], incumbent: &Option<Incumbent>) -> bool {
    match incumbent {
        None => true,
        Some((inc_obj, inc_bin, _)) => {
            if bound < inc_obj - TIE_EPS {
                false
            } else if bound > inc_obj + TIE_EPS {
                true
            } else {
                lex_floor(fixed) < *inc_bin
            }
        }
    }
}

fn consider(incumbent: &mut Option<Incumbent>, obj: f64, bin: Vec<u8>, velocities: Vec<f64>) {
    let replace = match incumbent {
        None => true,
        Some((inc_obj, inc_bin, _)) => {
            obj > *inc_obj + TIE_EPS || (obj >= *inc_obj - TIE_EPS && bin < *inc_bin)
        }
    };
    if replace {
        *incumbent = Some((obj, bin, velocities));
    }
}

/// Branch and bound: best-bound node selection, branching on the
/// lowest-index fractional binary, children explored zero-side first.
pub fn solve(problem: &MilpProblem) -> MilpSolution {
    let rows = rows_of(problem);
    let mut incumbent: Option<Incumbent> = None;
    let mut heap = BinaryHeap::new();
    let mut next_id = 0u64;
    heap.push(HeapNode { bound: f64::INFINITY, id: 0, fixed: vec![-1; problem.p] });
    next_id += 1;
    while let Some(node) = heap.pop() {
        if !explorable(node.bound, &node.fixed, &incumbent) {
            continue;
        }
        let (bound, x) = match node_lp(problem, &rows, &node.fixed) {
            NodeLp::Infeasible => continue,
            NodeLp::Evaluated { bound, x } => (bound.min(node.bound), x),
        };
        if !explorable(bound, &node.fixed, &incumbent) {
            continue;
        }
        let free: Vec<usize> = (0..problem.p).filter(|&k| node.fixed[k] == -1).collect();
        if free.is_empty() {
            let bin: Vec<u8> = node.fixed.iter().map(|&f| f as u8).collect();
            consider(&mut incumbent, bound, bin, x[..problem.n].to_vec());
            continue;
        }
        let integral = free
            .iter()
            .all(|&k| (x[problem.n + k] - libm::round(x[problem.n + k])).abs() <= INTEGRALITY_TOL);
        if integral {
            // The relaxation optimum already sits at integer binaries; pin
            // them exactly to clear any big-M slack the tolerance admitted.
            let snapped: Vec<i8> = (0..problem.p)
                .map(|k| {
                    if node.fixed[k] == -1 {
                        libm::round(x[problem.n + k]) as i8
                    } else {
                        node.fixed[k]
                    }
                })
                .collect();
            if let NodeLp::Evaluated { bound: exact, x: xs } = node_lp(problem, &rows, &snapped) {
                let bin: Vec<u8> = snapped.iter().map(|&f| f as u8).collect();
                consider(&mut incumbent, exact.min(bound), bin, xs[..problem.n].to_vec());
            }
            if !explorable(bound, &node.fixed, &incumbent) {
                continue;
            }
        }
        let branch_var = free
            .iter()
            .copied()
            .find(|&k| (x[problem.n + k] - libm::round(x[problem.n + k])).abs() > INTEGRALITY_TOL)
            .unwrap_or(free[0]);
        for val in [0i8, 1i8] {
            let mut child = node.fixed.clone();
            child[branch_var] = val;
            if explorable(bound, &child, &incumbent) {
                heap.push(HeapNode { bound, id: next_id, fixed: child });
                next_id += 1;
            }
        }
    }
    match incumbent {
        None => MilpSolution::infeasible(),
        Some((_, binaries, velocities)) => {
            let objective = velocities.iter().sum();
            MilpSolution { velocities, binaries, objective, status: MilpStatus::Optimal }
        }
    }
}

/// Exhaustive reference solver. For each of the `2^p` orderings the active
/// rows say one velocity is at most a fixed positive ratio of another, so
/// the componentwise maximum is the fixpoint of propagating multiplier caps
/// down from the upper bound. The feasible set is a join-semilattice, so
/// that maximum is the unique optimum of the velocity sum. Assignments are
/// scanned in lexicographic order and replaced only on strict improvement,
/// which leaves the lexicographically smallest tied assignment in place.
pub fn oracle_solve(problem: &MilpProblem) -> Result<MilpSolution, MilpError> {
    if problem.p > ORACLE_MAX_CONFLICTS {
        return Err(MilpError::TooManyConflicts { p: problem.p, max: ORACLE_MAX_CONFLICTS });
    }
    let n = problem.n;
    let p = problem.p;
    // Edge (u -> w, r): active ordering demands v_w <= r * v_u.
    let edges: Vec<((usize, usize, f64), (usize, usize, f64))> = problem
        .pairs
        .iter()
        .map(|t| {
            let when_one = (t.i, t.j, (t.l_j - t.l_enter) / (t.l_safe + t.l_i));
            let when_zero = (t.j, t.i, (t.l_i - t.l_enter) / (t.l_safe + t.l_j));
            (when_one, when_zero)
        })
        .collect();
    let floor = problem.v_min / problem.v_max;
    let mut best: Option<(f64, Vec<u8>, Vec<f64>)> = None;
    for g in 0..(1u64 << p) {
        let bits: Vec<u8> = (0..p).map(|k| ((g >> (p - 1 - k)) & 1) as u8).collect();
        let mut m = vec![1.0f64; n];
        let mut feasible = true;
        let mut sweeps = 0;
        loop {
            sweeps += 1;
            let mut changed = false;
            for (k, bit) in bits.iter().enumerate() {
                let (u, w, r) = if *bit == 1 { edges[k].0 } else { edges[k].1 };
                let cand = r * m[u];
                if cand < m[w] - 1e-15 {
                    m[w] = cand;
                    changed = true;
                }
            }
            if m.iter().any(|&v| v < floor - 1e-9) {
                feasible = false;
                break;
            }
            if !changed || sweeps >= 1000 {
                break;
            }
        }
        if !feasible {
            continue;
        }
        let velocities: Vec<f64> = m.iter().map(|&v| v * problem.v_max).collect();
        if velocities.iter().any(|&v| v < problem.v_min - 1e-9) {
            continue;
        }
        let objective: f64 = velocities.iter().sum();
        let better = match &best {
            None => true,
            Some((b, _, _)) => objective > b + TIE_EPS,
        };
        if better {
            best = Some((objective, bits, velocities));
        }
    }
    Ok(match best {
        None => MilpSolution::infeasible(),
        Some((objective, binaries, velocities)) => {
            MilpSolution { velocities, binaries, objective, status: MilpStatus::Optimal }
        }
    })
}

/// Signed pairwise priority: `+1` at `(i, j)` means vehicle i clears the
/// shared conflict before vehicle j arrives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PriorityMatrix {
    pub n: usize,
    s: Vec<i8>,
}

impl PriorityMatrix {
    pub fn zero(n: usize) -> Self {
        PriorityMatrix { n, s: vec![0; n * n] }
    }

    pub fn get(&self, i: usize, j: usize) -> i8 {
        self.s[i * self.n + j]
    }

    /// Builds a matrix directly from ordered pairs; each `(i, j)` marks
    /// vehicle i as clearing the shared conflict before vehicle j.
    pub fn from_pairs(n: usize, first: &[(usize, usize)]) -> Self {
        let mut s = PriorityMatrix::zero(n);
        for &(i, j) in first {
            debug_assert!(i < n && j < n && i != j);
            s.set(i, j, 1);
            s.set(j, i, -1);
        }
        s
    }

    fn set(&mut self, i: usize, j: usize, v: i8) {
        self.s[i * self.n + j] = v;
    }
}

/// Reads the committed orderings out of a solved program: `b_k = 1` put
/// pair k's first vehicle ahead, `b_k = 0` the second.
pub fn priority_matrix(solution: &MilpSolution, problem: &MilpProblem) -> PriorityMatrix {
    let mut s = PriorityMatrix::zero(problem.n);
    if solution.status != MilpStatus::Optimal {
        return s;
    }
    for (k, t) in problem.pairs.iter().enumerate() {
        if solution.binaries[k] == 1 {
            s.set(t.i, t.j, 1);
            s.set(t.j, t.i, -1);
        } else {
            s.set(t.j, t.i, 1);
            s.set(t.i, t.j, -1);
        }
    }
    s
}
