//! On-disk formats: trajectory CSV, run metrics JSON, and the two
//! plain-text formats for standalone optimizer and selection instances.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crossway_core::milp::{ConflictTerm, MilpSolution, MilpStatus};
use crossway_core::selector::FlagVector;
use serde::{Deserialize, Serialize};

use crate::sim::SimResult;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error("{path}:{line}: {msg}")]
    Syntax { path: String, line: usize, msg: String },
    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

fn syntax(path: &Path, line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Syntax { path: path.display().to_string(), line, msg: msg.into() }
}

// ---------------------------------------------------------------- trajectory

pub fn trajectory_csv(result: &SimResult) -> String {
    let mut out = String::from("t,vehicle_id,movement,arc_position,speed,x,y\n");
    for r in &result.rows {
        let _ = writeln!(
            out,
            "{:.3},{},{},{:.4},{:.4},{:.4},{:.4}",
            r.t, r.vehicle, result.movement_names[r.movement], r.arc, r.speed, r.x, r.y
        );
    }
    out
}

// ------------------------------------------------------------------- metrics

#[derive(Debug, Serialize, Deserialize)]
pub struct Metrics {
    pub makespan: f64,
    pub subset_sizes: Vec<usize>,
    pub solve_times_ms: Vec<f64>,
    pub rescale_counts: Vec<usize>,
    pub infeasible_rounds: usize,
    pub violations: Vec<ViolationOut>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ViolationOut {
    pub t: f64,
    pub vehicle_a: usize,
    pub vehicle_b: usize,
    pub movement_a: String,
    pub movement_b: String,
}

fn round3(x: f64) -> f64 {
    (x * 1e3).round() / 1e3
}

pub fn metrics_from(result: &SimResult) -> Metrics {
    Metrics {
        makespan: round3(result.makespan),
        subset_sizes: result.subset_sizes(),
        solve_times_ms: result.solve_times_ms().iter().map(|&x| round3(x)).collect(),
        rescale_counts: result.rescale_counts(),
        infeasible_rounds: result.infeasible_rounds,
        violations: result
            .violations
            .iter()
            .map(|v| ViolationOut {
                t: round3(v.t),
                vehicle_a: v.vehicle_a,
                vehicle_b: v.vehicle_b,
                movement_a: v.movement_a.clone(),
                movement_b: v.movement_b.clone(),
            })
            .collect(),
    }
}

pub fn metrics_json(result: &SimResult) -> Result<String, FormatError> {
    let mut s = serde_json::to_string_pretty(&metrics_from(result))?;
    s.push('\n');
    Ok(s)
}

// ----------------------------------------------------------- solver instance

/// A standalone optimizer instance:
///
/// ```text
/// n 2
/// bounds 5 20
/// conflict 0 1 100 60 5 8
/// ```
///
/// `conflict i j l_i l_j l_enter l_safe`; `inf` for a distance marks an
/// absent vehicle and drops the pair.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverInstance {
    pub n: usize,
    pub v_min: f64,
    pub v_max: f64,
    pub terms: Vec<ConflictTerm>,
}

fn parse_f64(path: &Path, line: usize, tok: &str) -> Result<f64, FormatError> {
    match tok {
        "inf" | "+inf" => Ok(f64::INFINITY),
        _ => tok
            .parse()
            .map_err(|_| syntax(path, line, format!("bad number `{tok}`"))),
    }
}

pub fn read_solver_instance(path: &Path) -> Result<SolverInstance, FormatError> {
    let text = fs::read_to_string(path)
        .map_err(|e| FormatError::Read { path: path.display().to_string(), source: e })?;
    let mut n: Option<usize> = None;
    let mut bounds: Option<(f64, f64)> = None;
    let mut terms = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let tok: Vec<&str> = body.split_whitespace().collect();
        match tok[0] {
            "n" => {
                if tok.len() != 2 {
                    return Err(syntax(path, line, "expected `n <count>`"));
                }
                n = Some(
                    tok[1]
                        .parse()
                        .map_err(|_| syntax(path, line, format!("bad count `{}`", tok[1])))?,
                );
            }
            "bounds" => {
                if tok.len() != 3 {
                    return Err(syntax(path, line, "expected `bounds <v_min> <v_max>`"));
                }
                bounds = Some((parse_f64(path, line, tok[1])?, parse_f64(path, line, tok[2])?));
            }
            "conflict" => {
                if tok.len() != 7 {
                    return Err(syntax(
                        path,
                        line,
                        "expected `conflict <i> <j> <l_i> <l_j> <l_enter> <l_safe>`",
                    ));
                }
                let i: usize = tok[1]
                    .parse()
                    .map_err(|_| syntax(path, line, format!("bad index `{}`", tok[1])))?;
                let j: usize = tok[2]
                    .parse()
                    .map_err(|_| syntax(path, line, format!("bad index `{}`", tok[2])))?;
                terms.push(ConflictTerm {
                    i,
                    j,
                    l_i: parse_f64(path, line, tok[3])?,
                    l_j: parse_f64(path, line, tok[4])?,
                    l_enter: parse_f64(path, line, tok[5])?,
                    l_safe: parse_f64(path, line, tok[6])?,
                });
            }
            other => return Err(syntax(path, line, format!("unknown directive `{other}`"))),
        }
    }
    let n = n.ok_or_else(|| syntax(path, 0, "missing `n` line"))?;
    let (v_min, v_max) = bounds.ok_or_else(|| syntax(path, 0, "missing `bounds` line"))?;
    Ok(SolverInstance { n, v_min, v_max, terms })
}

pub fn write_solution(solution: &MilpSolution, solve_time_ms: f64) -> String {
    let mut out = String::new();
    match solution.status {
        MilpStatus::Optimal => {
            out.push_str("status optimal\n");
            let _ = writeln!(out, "objective {:.6}", solution.objective);
            for (i, v) in solution.velocities.iter().enumerate() {
                let _ = writeln!(out, "velocity {i} {v:.6}");
            }
            if !solution.binaries.is_empty() {
                out.push_str("binaries");
                for b in &solution.binaries {
                    let _ = write!(out, " {b}");
                }
                out.push('\n');
            }
        }
        MilpStatus::Infeasible => out.push_str("status infeasible\n"),
    }
    let _ = writeln!(out, "solve_time_ms {solve_time_ms:.3}");
    out
}

// -------------------------------------------------------- selection instance

/// A standalone selection instance:
///
/// ```text
/// n 3
/// v_max 20
/// v 20 14 20
/// priority 0 1
/// ```
///
/// `priority i j` records that vehicle `i` crosses before vehicle `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct SelectInstance {
    pub v: Vec<f64>,
    pub v_max: f64,
    pub order: Vec<(usize, usize)>,
}

pub fn read_select_instance(path: &Path) -> Result<SelectInstance, FormatError> {
    let text = fs::read_to_string(path)
        .map_err(|e| FormatError::Read { path: path.display().to_string(), source: e })?;
    let mut n: Option<usize> = None;
    let mut v_max: Option<f64> = None;
    let mut v: Option<Vec<f64>> = None;
    let mut order = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let tok: Vec<&str> = body.split_whitespace().collect();
        match tok[0] {
            "n" => {
                if tok.len() != 2 {
                    return Err(syntax(path, line, "expected `n <count>`"));
                }
                n = Some(
                    tok[1]
                        .parse()
                        .map_err(|_| syntax(path, line, format!("bad count `{}`", tok[1])))?,
                );
            }
            "v_max" => {
                if tok.len() != 2 {
                    return Err(syntax(path, line, "expected `v_max <speed>`"));
                }
                v_max = Some(parse_f64(path, line, tok[1])?);
            }
            "v" => {
                let mut vals = Vec::new();
                for t in &tok[1..] {
                    vals.push(parse_f64(path, line, t)?);
                }
                v = Some(vals);
            }
            "priority" => {
                if tok.len() != 3 {
                    return Err(syntax(path, line, "expected `priority <first> <second>`"));
                }
                let i: usize = tok[1]
                    .parse()
                    .map_err(|_| syntax(path, line, format!("bad index `{}`", tok[1])))?;
                let j: usize = tok[2]
                    .parse()
                    .map_err(|_| syntax(path, line, format!("bad index `{}`", tok[2])))?;
                order.push((i, j));
            }
            other => return Err(syntax(path, line, format!("unknown directive `{other}`"))),
        }
    }
    let n = n.ok_or_else(|| syntax(path, 0, "missing `n` line"))?;
    let v_max = v_max.ok_or_else(|| syntax(path, 0, "missing `v_max` line"))?;
    let v = v.ok_or_else(|| syntax(path, 0, "missing `v` line"))?;
    if v.len() != n {
        return Err(syntax(path, 0, format!("`v` lists {} speeds, expected {n}", v.len())));
    }
    for &(i, j) in &order {
        if i >= n || j >= n || i == j {
            return Err(syntax(path, 0, format!("bad priority pair {i} {j}")));
        }
    }
    Ok(SelectInstance { v, v_max, order })
}

/// Flags plus the priority graph in DOT form, kept vehicles doubled.
pub fn write_selection(inst: &SelectInstance, flags: &FlagVector) -> String {
    let n = inst.v.len();
    let mut out = String::from("flags");
    for i in 0..n {
        let _ = write!(out, " {}", u8::from(flags.is_set(i)));
    }
    out.push('\n');
    out.push_str("digraph priority {\n");
    for i in 0..n {
        let _ = writeln!(
            out,
            "  {i} [label=\"{i}: v={:.2}\"{}];",
            inst.v[i],
            if flags.is_set(i) { ", peripheries=2" } else { "" }
        );
    }
    for &(i, j) in &inst.order {
        let _ = writeln!(out, "  {i} -> {j};");
    }
    out.push_str("}\n");
    out
}

// -------------------------------------------------------------------- report

pub fn read_metrics(path: &Path) -> Result<Metrics, FormatError> {
    let text = fs::read_to_string(path)
        .map_err(|e| FormatError::Read { path: path.display().to_string(), source: e })?;
    Ok(serde_json::from_str(&text)?)
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

pub fn summarize(metrics: &Metrics) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "makespan            {:.3} s", metrics.makespan);
    let _ = writeln!(out, "rounds              {}", metrics.subset_sizes.len());
    let _ = writeln!(out, "infeasible rounds   {}", metrics.infeasible_rounds);
    let mut times = metrics.solve_times_ms.clone();
    times.sort_by(f64::total_cmp);
    let mean = if times.is_empty() { 0.0 } else { times.iter().sum::<f64>() / times.len() as f64 };
    let _ = writeln!(out, "solve time mean     {:.3} ms", mean);
    let _ = writeln!(out, "solve time p95      {:.3} ms", percentile(&times, 0.95));
    let total_rescales: usize = metrics.rescale_counts.iter().sum();
    let _ = writeln!(out, "plan rescales       {total_rescales}");
    if !metrics.subset_sizes.is_empty() {
        let max = metrics.subset_sizes.iter().copied().max().unwrap_or(0);
        out.push_str("subset sizes       ");
        for size in 1..=max {
            let count = metrics.subset_sizes.iter().filter(|&&s| s == size).count();
            if count > 0 {
                let _ = write!(out, " {size}x{count}");
            }
        }
        out.push('\n');
    }
    let _ = writeln!(out, "violations          {}", metrics.violations.len());
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<(), FormatError> {
    fs::write(path, text)
        .map_err(|e| FormatError::Write { path: path.display().to_string(), source: e })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn solver_instance_roundtrip() {
        let f = tmp("# pairwise case\nn 2\nbounds 5 20\nconflict 0 1 100 60 5 8\n");
        let inst = read_solver_instance(f.path()).unwrap();
        assert_eq!(inst.n, 2);
        assert_eq!(inst.v_min, 5.0);
        assert_eq!(inst.v_max, 20.0);
        assert_eq!(
            inst.terms,
            vec![ConflictTerm { i: 0, j: 1, l_i: 100.0, l_j: 60.0, l_enter: 5.0, l_safe: 8.0 }]
        );
    }

    #[test]
    fn solver_instance_accepts_inf_sentinel() {
        let f = tmp("n 2\nbounds 5 20\nconflict 0 1 inf 60 5 8\n");
        let inst = read_solver_instance(f.path()).unwrap();
        assert!(inst.terms[0].l_i.is_infinite());
    }

    #[test]
    fn solver_instance_errors_carry_line_numbers() {
        let f = tmp("n 2\nbounds 5\n");
        let err = read_solver_instance(f.path()).unwrap_err();
        assert!(err.to_string().contains(":2:"), "{err}");
    }

    #[test]
    fn solution_text_matches_shape() {
        let sol = MilpSolution {
            velocities: vec![20.0, 20.0],
            binaries: vec![0],
            objective: 40.0,
            status: MilpStatus::Optimal,
        };
        let text = write_solution(&sol, 1.2345);
        assert_eq!(
            text,
            "status optimal\nobjective 40.000000\nvelocity 0 20.000000\nvelocity 1 20.000000\nbinaries 0\nsolve_time_ms 1.234\n"
        );
    }

    #[test]
    fn infeasible_solution_has_status_and_time_only() {
        let sol = MilpSolution {
            velocities: Vec::new(),
            binaries: Vec::new(),
            objective: f64::NEG_INFINITY,
            status: MilpStatus::Infeasible,
        };
        let text = write_solution(&sol, 0.5);
        assert_eq!(text, "status infeasible\nsolve_time_ms 0.500\n");
    }

    #[test]
    fn select_instance_parses() {
        let f = tmp("n 3\nv_max 20\nv 20 14 20\npriority 0 1\npriority 2 1\n");
        let inst = read_select_instance(f.path()).unwrap();
        assert_eq!(inst.v, vec![20.0, 14.0, 20.0]);
        assert_eq!(inst.order, vec![(0, 1), (2, 1)]);
    }

    #[test]
    fn select_instance_rejects_length_mismatch() {
        let f = tmp("n 3\nv_max 20\nv 20 14\n");
        assert!(read_select_instance(f.path()).is_err());
    }

    #[test]
    fn metrics_json_is_stable() {
        let result = SimResult {
            rows: Vec::new(),
            rounds: Vec::new(),
            infeasible_rounds: 0,
            makespan: 31.23456,
            violations: Vec::new(),
            movement_names: Vec::new(),
        };
        let text = metrics_json(&result).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed["makespan"], 31.235);
        assert_eq!(parsed["infeasible_rounds"], 0);
    }

    #[test]
    fn report_summarizes_metrics() {
        let m = Metrics {
            makespan: 31.2,
            subset_sizes: vec![3, 1, 4, 3],
            solve_times_ms: vec![1.0, 2.0, 3.0, 4.0],
            rescale_counts: vec![0, 0, 1, 0],
            infeasible_rounds: 1,
            violations: Vec::new(),
        };
        let text = summarize(&m);
        assert!(text.contains("makespan            31.200 s"), "{text}");
        assert!(text.contains("rounds              4"), "{text}");
        assert!(text.contains("3x2"), "{text}");
        assert!(text.contains("violations          0"), "{text}");
    }
}
