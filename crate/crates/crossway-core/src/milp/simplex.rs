//! Dense bounded-variable primal simplex, two phases, Bland's rule.
//!
//! Solves `max c.x` subject to `A x <= rhs` and `lower <= x <= upper`.
//! All structural variables must have finite bounds, which rules out an
//! unbounded phase 2; slack variables are unbounded above. Bland's rule
//! keeps pivoting cycle-free, and the problems here are small enough that
//! the dense recompute-per-iteration layout is simpler than maintaining
//! incremental values.

use alloc::vec;
use alloc::vec::Vec;

/// Row feasibility tolerance.
pub const FEAS_TOL: f64 = 1e-7;
const COST_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const RATIO_TIE: f64 = 1e-12;
const MAX_ITERS: usize = 50_000;

#[derive(Clone, Debug, PartialEq)]
pub enum LpStatus {
    Optimal { x: Vec<f64>, objective: f64 },
    Infeasible,
}

/// Defensive failures: neither is reachable for well-formed boxed problems.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpFailure {
    Unbounded,
    IterationLimit,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum VarState {
    Basic,
    AtLower,
    AtUpper,
}

struct Tableau<'a> {
    m: usize,
    n: usize,
    rows: &'a [Vec<f64>],
    rhs: &'a [f64],
    /// Bounds over structural, slack and artificial variables.
    lo: Vec<f64>,
    up: Vec<f64>,
    /// Row index each artificial belongs to.
    art_rows: Vec<usize>,
    basis: Vec<usize>,
    state: Vec<VarState>,
    binv: Vec<f64>,
}

impl<'a> Tableau<'a> {
    fn total_vars(&self) -> usize {
        self.n + self.m + self.art_rows.len()
    }

    fn col(&self, row: usize, var: usize) -> f64 {
        if var < self.n {
            self.rows[row][var]
        } else if var < self.n + self.m {
            if var - self.n == row {
                1.0
            } else {
                0.0
            }
        } else if self.art_rows[var - self.n - self.m] == row {
            -1.0
        } else {
            0.0
        }
    }

    /// Current values of every variable.
    fn values(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.total_vars()];
        for j in 0..self.total_vars() {
            x[j] = match self.state[j] {
                VarState::Basic => 0.0,
                VarState::AtLower => self.lo[j],
                VarState::AtUpper => self.up[j],
            };
        }
        let mut resid = vec![0.0; self.m];
        for i in 0..self.m {
            let mut r = self.rhs[i];
            for j in 0..self.total_vars() {
                if self.state[j] != VarState::Basic && x[j] != 0.0 {
                    r -= self.col(i, j) * x[j];
                }
            }
            resid[i] = r;
        }
        for i in 0..self.m {
            let mut v = 0.0;
            for k in 0..self.m {
                v += self.binv[i * self.m + k] * resid[k];
            }
            x[self.basis[i]] = v;
        }
        x
    }

    /// Runs simplex iterations for the objective `c` (length total_vars).
    fn iterate(&mut self, c: &[f64], iters: &mut usize) -> Result<(), LpFailure> {
        loop {
            *iters += 1;
            if *iters > MAX_ITERS {
                return Err(LpFailure::IterationLimit);
            }
            let x = self.values();
            // Duals y = c_B B^-1.
            let mut y = vec![0.0; self.m];
            for j in 0..self.m {
                let mut v = 0.0;
                for k in 0..self.m {
                    v += c[self.basis[k]] * self.binv[k * self.m + j];
                }
                y[j] = v;
            }
            // Entering variable: Bland, smallest eligible index.
            let mut entering = None;
            for j in 0..self.total_vars() {
                if self.state[j] == VarState::Basic || self.up[j] - self.lo[j] <= 0.0 {
                    continue;
                }
                let mut d = c[j];
                for i in 0..self.m {
                    let a = self.col(i, j);
                    if a != 0.0 {
                        d -= y[i] * a;
                    }
                }
                let eligible = match self.state[j] {
                    VarState::AtLower => d > COST_TOL,
                    VarState::AtUpper => d < -COST_TOL,
                    VarState::Basic => false,
                };
                if eligible {
                    entering = Some(j);
                    break;
                }
            }
            let e = match entering {
                Some(e) => e,
                None => return Ok(()),
            };
            let dir = if self.state[e] == VarState::AtLower { 1.0 } else { -1.0 };
            let mut w = vec![0.0; self.m];
            for i in 0..self.m {
                let mut v = 0.0;
                for k in 0..self.m {
                    v += self.binv[i * self.m + k] * self.col(k, e);
                }
                w[i] = v;
            }
            // Ratio test against basic bounds, ties broken by smallest
            // leaving variable index.
            let span = self.up[e] - self.lo[e];
            let mut t_best = span;
            let mut leaving: Option<(usize, usize)> = None;
            for i in 0..self.m {
                let rate = -dir * w[i];
                let b = self.basis[i];
                let lim = if rate > PIVOT_TOL {
                    (self.up[b] - x[b]) / rate
                } else if rate < -PIVOT_TOL {
                    (x[b] - self.lo[b]) / -rate
                } else {
                    continue;
                };
                let lim = lim.max(0.0);
                let replace = match leaving {
                    _ if lim < t_best - RATIO_TIE => true,
                    Some((_, lv)) if lim < t_best + RATIO_TIE && b < lv => true,
                    None if lim < t_best + RATIO_TIE && lim <= span => true,
                    _ => false,
                };
                if replace {
                    t_best = t_best.min(lim);
                    leaving = Some((i, b));
                }
            }
            if t_best.is_infinite() {
                return Err(LpFailure::Unbounded);
            }
            match leaving {
                None => {
                    // The entering variable runs to its opposite bound.
                    self.state[e] = if dir > 0.0 { VarState::AtUpper } else { VarState::AtLower };
                }
                Some((r, b)) => {
                    let rate = -dir * w[r];
                    self.state[b] = if rate > 0.0 { VarState::AtUpper } else { VarState::AtLower };
                    self.basis[r] = e;
                    self.state[e] = VarState::Basic;
                    let piv = w[r];
                    for k in 0..self.m {
                        self.binv[r * self.m + k] /= piv;
                    }
                    for i in 0..self.m {
                        if i == r {
                            continue;
                        }
                        let f = w[i];
                        if f != 0.0 {
                            for k in 0..self.m {
                                self.binv[i * self.m + k] -= f * self.binv[r * self.m + k];
                            }
                        }
                    }
                }
            }
        }
    }
}

/// Solves `max objective.x` with `rows.x <= rhs`, `lower <= x <= upper`.
pub fn solve_lp(
    rows: &[Vec<f64>],
    rhs: &[f64],
    lower: &[f64],
    upper: &[f64],
    objective: &[f64],
) -> Result<LpStatus, LpFailure> {
    let m = rows.len();
    let n = lower.len();
    // Start with every structural variable at its lower bound.
    let mut resid = vec![0.0; m];
    for i in 0..m {
        let mut r = rhs[i];
        for j in 0..n {
            r -= rows[i][j] * lower[j];
        }
        resid[i] = r;
    }
    let art_rows: Vec<usize> = (0..m).filter(|&i| resid[i] < 0.0).collect();
    let n_art = art_rows.len();
    let mut lo = Vec::with_capacity(n + m + n_art);
    let mut up = Vec::with_capacity(n + m + n_art);
    lo.extend_from_slice(lower);
    up.extend_from_slice(upper);
    for _ in 0..m {
        lo.push(0.0);
        up.push(f64::INFINITY);
    }
    for _ in 0..n_art {
        lo.push(0.0);
        up.push(f64::INFINITY);
    }
    let mut basis = vec![0; m];
    let mut state = vec![VarState::AtLower; n + m + n_art];
    let mut binv = vec![0.0; m * m];
    let mut art_of_row = vec![usize::MAX; m];
    for (k, &r) in art_rows.iter().enumerate() {
        art_of_row[r] = n + m + k;
    }
    for i in 0..m {
        if art_of_row[i] != usize::MAX {
            basis[i] = art_of_row[i];
            // Basis column is -e_i, so the inverse carries -1 there.
            binv[i * m + i] = -1.0;
        } else {
            basis[i] = n + i;
            binv[i * m + i] = 1.0;
        }
        state[basis[i]] = VarState::Basic;
    }
    let mut tab = Tableau { m, n, rows, rhs, lo, up, art_rows, basis, state, binv };
    let mut iters = 0;
    if n_art > 0 {
        let mut phase1 = vec![0.0; tab.total_vars()];
        for k in 0..n_art {
            phase1[n + m + k] = -1.0;
        }
        tab.iterate(&phase1, &mut iters)?;
        let x = tab.values();
        let infeasibility: f64 = (0..n_art).map(|k| x[n + m + k]).sum();
        if infeasibility > FEAS_TOL {
            return Ok(LpStatus::Infeasible);
        }
        // Pin artificials to zero for phase 2.
        for k in 0..n_art {
            tab.up[n + m + k] = 0.0;
        }
    }
    let mut phase2 = vec![0.0; tab.total_vars()];
    phase2[..n].copy_from_slice(objective);
    tab.iterate(&phase2, &mut iters)?;
    let x = tab.values();
    let obj: f64 = (0..n).map(|j| objective[j] * x[j]).sum();
    Ok(LpStatus::Optimal { x: x[..n].to_vec(), objective: obj })
}
