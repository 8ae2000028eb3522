//! Velocity profile construction for a committed subset.
//!
//! Every committed vehicle gets a ramp (trapezoid or dip) that ends at its
//! target speed and loses exactly `tau * v_opt` meters relative to an
//! undelayed constant-speed run. After the ramp the vehicle moves as if it
//! had driven at `v_opt` the whole time but started `tau` seconds late, so
//! pairwise orderings fixed by the optimizer carry over to the road
//! unchanged and conflict entry and exit times reduce to closed forms.
//!
//! `plan` additionally checks the handover against earlier rounds, point by
//! point: a member may enter a shared conflict point only after the
//! crossing lane's previous occupant has exited that same point, and after
//! its own lane's previous occupant has done so too. If not, the common
//! delay is scaled up by `k_rescale` (which stretches all ramps together
//! and keeps the proportionality intact) until the check passes or a cap
//! is hit.

use alloc::vec;
use alloc::vec::Vec;

use core::fmt;

/// Longest allowed trapezoid ramp, seconds. Members whose gentle ramp would
/// run longer than this get a dip profile instead, keeping ramp distance
/// bounded so conflict crossings stay in the constant-speed tail where the
/// closed-form times are exact.
pub const MAX_RAMP_SECS: f64 = 8.0;

/// Slowest flat-bottom dip speed, m/s. Kept above zero so a dip never
/// parks a moving vehicle on the approach.
const DIP_FLOOR: f64 = 1.0;

const TINY: f64 = 1e-12;
/// Slack for the ramp-versus-first-crossing feasibility check, seconds.
const CROSSING_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfileSegment {
    pub duration: f64,
    pub start_speed: f64,
    pub accel: f64,
}

impl ProfileSegment {
    pub fn end_speed(&self) -> f64 {
        self.start_speed + self.accel * self.duration
    }

    pub fn distance(&self) -> f64 {
        self.start_speed * self.duration + 0.5 * self.accel * self.duration * self.duration
    }
}

/// Piecewise-constant-acceleration speed plan. Speed is continuous across
/// segments; beyond the last segment the vehicle holds `terminal_speed`.
#[derive(Clone, Debug, PartialEq)]
pub struct VelocityProfile {
    pub start_time: f64,
    pub segments: Vec<ProfileSegment>,
    pub terminal_speed: f64,
}

impl VelocityProfile {
    pub fn initial_speed(&self) -> f64 {
        match self.segments.first() {
            Some(s) => s.start_speed,
            None => self.terminal_speed,
        }
    }

    /// Total ramp duration, seconds.
    pub fn ramp_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// Distance covered while ramping, meters.
    pub fn ramp_distance(&self) -> f64 {
        self.segments.iter().map(|s| s.distance()).sum()
    }

    /// Distance traveled since `start_time` and current speed at absolute
    /// time `t`. `None` if `t` precedes the profile.
    pub fn eval(&self, t: f64) -> Option<(f64, f64)> {
        if t < self.start_time {
            return None;
        }
        let mut rel = t - self.start_time;
        let mut dist = 0.0;
        for seg in &self.segments {
            if rel <= seg.duration {
                let d = seg.start_speed * rel + 0.5 * seg.accel * rel * rel;
                return Some((dist + d, seg.start_speed + seg.accel * rel));
            }
            dist += seg.distance();
            rel -= seg.duration;
        }
        Some((dist + self.terminal_speed * rel, self.terminal_speed))
    }

    /// Time offset from `start_time` at which cumulative distance reaches
    /// `target`, or infinity if the profile never covers it.
    pub fn time_to_distance(&self, target: f64) -> f64 {
        if target <= 0.0 {
            return 0.0;
        }
        let mut remaining = target;
        let mut elapsed = 0.0;
        for seg in &self.segments {
            let d = seg.distance();
            if remaining <= d + TINY {
                return elapsed + solve_segment_time(seg, remaining);
            }
            remaining -= d;
            elapsed += seg.duration;
        }
        if self.terminal_speed > 0.0 {
            elapsed + remaining / self.terminal_speed
        } else {
            f64::INFINITY
        }
    }
}

/// First time within the segment at which cumulative distance hits `d`.
/// Caller guarantees the segment covers `d`.
fn solve_segment_time(seg: &ProfileSegment, d: f64) -> f64 {
    if seg.accel.abs() < TINY {
        if seg.start_speed > TINY {
            return (d / seg.start_speed).min(seg.duration);
        }
        return seg.duration;
    }
    let disc = seg.start_speed * seg.start_speed + 2.0 * seg.accel * d;
    let root = libm::sqrt(disc.max(0.0));
    let t = (root - seg.start_speed) / seg.accel;
    t.clamp(0.0, seg.duration)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlannerParams {
    pub a_max: f64,
    pub k_rescale: f64,
    pub max_rescales: usize,
}

impl Default for PlannerParams {
    fn default() -> Self {
        PlannerParams {
            a_max: 2.5,
            k_rescale: 1.2,
            max_rescales: 20,
        }
    }
}

/// One conflict point ahead of a member, described from the member's
/// current position.
#[derive(Clone, Copy, Debug)]
pub struct ConflictAhead {
    /// Lane index of the movement crossing here.
    pub other_lane: usize,
    /// Distance from the member's current position to the point, meters.
    pub distance: f64,
    /// Occupancy starts this far before the point.
    pub l_enter: f64,
    /// Occupancy ends this far past the point.
    pub l_safe: f64,
}

#[derive(Clone, Debug)]
pub struct MemberPlanInput {
    /// Lane index into the transfer log.
    pub lane: usize,
    pub v0: f64,
    pub v_opt: f64,
    pub conflicts: Vec<ConflictAhead>,
}

/// Per-conflict-point handover ledger carried across rounds. Slot `(m, o)`
/// is the latest recorded exit time of lane `m` at the point it shares
/// with lane `o`, negative infinity before any crossing. One slot per
/// ordered lane pair suffices because two movements meet at most once.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferLog {
    n: usize,
    exit: Vec<f64>,
}

impl TransferLog {
    pub fn new(n_lanes: usize) -> Self {
        TransferLog {
            n: n_lanes,
            exit: vec![f64::NEG_INFINITY; n_lanes * n_lanes],
        }
    }

    pub fn n_lanes(&self) -> usize {
        self.n
    }

    /// Latest exit of `lane` at the point shared with `other`.
    pub fn exit_at(&self, lane: usize, other: usize) -> f64 {
        self.exit[lane * self.n + other]
    }

    /// Records an exit of `lane` at the point shared with `other`, keeping
    /// the later of the stored and offered times.
    pub fn record(&mut self, lane: usize, other: usize, t: f64) {
        let slot = &mut self.exit[lane * self.n + other];
        if t > *slot {
            *slot = t;
        }
    }

    /// Latest exit of `lane` over all its points.
    pub fn lane_clearance(&self, lane: usize) -> f64 {
        self.exit[lane * self.n..(lane + 1) * self.n]
            .iter()
            .fold(f64::NEG_INFINITY, |a, &b| a.max(b))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlanningResult {
    /// One profile per member, in input order.
    pub profiles: Vec<VelocityProfile>,
    /// Ramp durations per member, seconds.
    pub t_acc: Vec<f64>,
    /// Common delay applied to every member, seconds.
    pub virtual_delay: f64,
    /// Per lane: earliest conflict entry of the new occupant, or infinity
    /// for lanes without one.
    pub t_arrive: Vec<f64>,
    /// Per lane: latest conflict exit on record after this round; lanes
    /// outside the subset keep their previous clearance.
    pub t_leave: Vec<f64>,
    pub rescales: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlanError {
    /// A member's ramp cannot realize the required distance deficit.
    Unsynchronizable { member: usize },
    /// Delay rescaling hit the cap with the handover check still failing.
    TransferUnsatisfiable { rescales: usize },
    /// The handover check fails but no member has a ramp to stretch.
    ZeroDelayViolation,
    /// A member would still be ramping at its first conflict point, so the
    /// closed-form crossing times would not hold.
    ShortApproach { member: usize },
    BadInput(&'static str),
}

impl fmt::Display for PlanError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlanError::Unsynchronizable { member } => {
                write!(f, "member {member}: no ramp realizes the required deficit")
            }
            PlanError::TransferUnsatisfiable { rescales } => {
                write!(f, "handover check still failing after {rescales} delay rescales")
            }
            PlanError::ZeroDelayViolation => {
                write!(f, "handover check fails with zero delay and nothing to stretch")
            }
            PlanError::ShortApproach { member } => {
                write!(f, "member {member} reaches its first conflict point mid-ramp")
            }
            PlanError::BadInput(msg) => write!(f, "bad planner input: {msg}"),
        }
    }
}

/// Per-member delay needed so an `a_max` trapezoid from `v0` to `v_opt`
/// loses exactly `tau * v_opt` meters.
fn delay_requirement(v_opt: f64, v0: f64, a_max: f64) -> f64 {
    if v_opt > v0 {
        let gap = v_opt - v0;
        gap * gap / (2.0 * a_max * v_opt)
    } else {
        0.0
    }
}

/// Ramp durations and the common delay for a subset. The member with the
/// largest delay requirement ramps at full `a_max` and pins `tau`; everyone
/// else gets a gentler ramp sized to the same relative loss.
pub fn sync_accel_times(
    v_opt: &[f64],
    v0: &[f64],
    a_max: f64,
) -> Result<(Vec<f64>, f64), PlanError> {
    if v_opt.len() != v0.len() {
        return Err(PlanError::BadInput("speed vectors differ in length"));
    }
    if !(a_max > 0.0) {
        return Err(PlanError::BadInput("a_max must be positive"));
    }
    for (m, (&v, &u)) in v_opt.iter().zip(v0).enumerate() {
        if !(v > 0.0) || !(u >= 0.0) || !v.is_finite() || !u.is_finite() {
            return Err(PlanError::Unsynchronizable { member: m });
        }
    }
    let tau = v_opt
        .iter()
        .zip(v0)
        .map(|(&v, &u)| delay_requirement(v, u, a_max))
        .fold(0.0, f64::max);
    let mut t_acc = Vec::with_capacity(v_opt.len());
    for (m, (&v, &u)) in v_opt.iter().zip(v0).enumerate() {
        let profile = build_profile(u, v, tau, a_max, 0.0)
            .map_err(|_| PlanError::Unsynchronizable { member: m })?;
        t_acc.push(profile.ramp_duration());
    }
    Ok((t_acc, tau))
}

/// Builds one member's ramp for a given common delay. The ramp ends at
/// `v_opt` having lost exactly `tau * v_opt` meters against an undelayed
/// constant-speed run.
pub fn build_profile(
    v0: f64,
    v_opt: f64,
    tau: f64,
    a_max: f64,
    start_time: f64,
) -> Result<VelocityProfile, PlanError> {
    if !(v_opt > 0.0) || !(v0 >= 0.0) || !(a_max > 0.0) || !(tau >= 0.0) {
        return Err(PlanError::BadInput("speeds, delay and a_max must be nonnegative"));
    }
    let deficit = tau * v_opt;
    let mut segments = Vec::new();
    if v_opt > v0 + TINY {
        if deficit <= TINY {
            // an accelerating member always implies tau > 0
            return Err(PlanError::Unsynchronizable { member: usize::MAX });
        }
        let t_trap = 2.0 * deficit / (v_opt - v0);
        if t_trap <= MAX_RAMP_SECS + TINY {
            let accel = (v_opt - v0) / t_trap;
            if accel > a_max * (1.0 + 1e-9) {
                return Err(PlanError::Unsynchronizable { member: usize::MAX });
            }
            segments.push(ProfileSegment {
                duration: t_trap,
                start_speed: v0,
                accel,
            });
        } else {
            dip_segments(v0, v_opt, deficit, a_max, &mut segments)?;
        }
    } else if v0 > v_opt + TINY || deficit > TINY {
        dip_segments(v0, v_opt, deficit, a_max, &mut segments)?;
    }
    Ok(VelocityProfile {
        start_time,
        segments,
        terminal_speed: v_opt,
    })
}

/// Dip ramp: brake at `a_max`, optionally hold a flat bottom, accelerate at
/// `a_max` up to `v_opt`. Depth is solved so the distance deficit equals
/// `deficit`. Works for v0 above, at, or below v_opt; the last case covers
/// members whose trapezoid would exceed the ramp cap.
fn dip_segments(
    v0: f64,
    v_opt: f64,
    deficit: f64,
    a_max: f64,
    segments: &mut Vec<ProfileSegment>,
) -> Result<(), PlanError> {
    let w = v0 - v_opt;
    // (2 * depth^2 - w^2) / (2 * a_max) equals the deficit for any depth,
    // so solving for depth needs only deficit >= 0
    let depth_sq = a_max * deficit + 0.5 * w * w;
    if depth_sq < 0.5 * w * w - 1e-9 {
        return Err(PlanError::Unsynchronizable { member: usize::MAX });
    }
    let depth = libm::sqrt(depth_sq.max(0.0));
    let mut floor = DIP_FLOOR.min(0.5 * v_opt);
    if w < 0.0 {
        floor = floor.min(v0);
    }
    let max_depth = v_opt - floor;
    if depth <= max_depth + TINY {
        let v_bot = (v_opt - depth).max(0.0);
        push_nonzero(segments, (v0 - v_bot) / a_max, v0, -a_max);
        push_nonzero(segments, depth / a_max, v_bot, a_max);
    } else {
        let u = max_depth;
        let v_bot = floor;
        let base = (2.0 * u * u - w * w) / (2.0 * a_max);
        let hold = (deficit - base) / u;
        if hold < -1e-9 {
            return Err(PlanError::Unsynchronizable { member: usize::MAX });
        }
        push_nonzero(segments, (v0 - v_bot) / a_max, v0, -a_max);
        push_nonzero(segments, hold.max(0.0), v_bot, 0.0);
        push_nonzero(segments, u / a_max, v_bot, a_max);
    }
    Ok(())
}

fn push_nonzero(segments: &mut Vec<ProfileSegment>, duration: f64, start_speed: f64, accel: f64) {
    if duration > TINY {
        segments.push(ProfileSegment {
            duration,
            start_speed,
            accel,
        });
    }
}

/// Closed-form conflict entry time for a synchronized member.
pub fn conflict_entry_time(t_clock: f64, tau: f64, v_opt: f64, distance: f64, l_enter: f64) -> f64 {
    t_clock + (distance - l_enter) / v_opt + tau
}

/// Closed-form conflict exit time for a synchronized member.
pub fn conflict_exit_time(t_clock: f64, tau: f64, v_opt: f64, distance: f64, l_safe: f64) -> f64 {
    t_clock + (distance + l_safe) / v_opt + tau
}

/// Plans profiles for a committed subset and verifies the handover against
/// earlier rounds point by point: a member must enter each shared conflict
/// point strictly after the crossing lane's previous occupant exited that
/// point, and strictly after its own lane's previous occupant did, so
/// successive vehicles of one movement cross the junction in order.
/// Failing that, the common delay is multiplied by `k_rescale` and the
/// profiles rebuilt. On success the members' exits are recorded in `log`;
/// a failed call leaves it untouched.
pub fn plan(
    members: &[MemberPlanInput],
    log: &mut TransferLog,
    t_clock: f64,
    params: &PlannerParams,
) -> Result<PlanningResult, PlanError> {
    if !(params.a_max > 0.0) || !(params.k_rescale > 1.0) || params.max_rescales == 0 {
        return Err(PlanError::BadInput("invalid planner parameters"));
    }
    let n_lanes = log.n_lanes();
    let mut seen = vec![false; n_lanes];
    for m in members {
        if m.lane >= n_lanes {
            return Err(PlanError::BadInput("member lane out of range"));
        }
        if seen[m.lane] {
            return Err(PlanError::BadInput("two members share a lane"));
        }
        seen[m.lane] = true;
        for c in &m.conflicts {
            if c.other_lane >= n_lanes {
                return Err(PlanError::BadInput("conflict lane out of range"));
            }
            if !(c.distance > c.l_enter) {
                return Err(PlanError::BadInput("conflict point already entered"));
            }
        }
    }
    let v_opt: Vec<f64> = members.iter().map(|m| m.v_opt).collect();
    let v0: Vec<f64> = members.iter().map(|m| m.v0).collect();
    let (_, mut tau) = sync_accel_times(&v_opt, &v0, params.a_max)?;

    let mut rescales = 0usize;
    loop {
        let mut profiles = Vec::with_capacity(members.len());
        for (idx, m) in members.iter().enumerate() {
            let p = build_profile(m.v0, m.v_opt, tau, params.a_max, t_clock).map_err(|e| {
                match e {
                    PlanError::Unsynchronizable { .. } => {
                        PlanError::Unsynchronizable { member: idx }
                    }
                    other => other,
                }
            })?;
            profiles.push(p);
        }
        // every first crossing must land in the constant-speed tail,
        // otherwise the closed-form times below would overshoot reality
        for (idx, (m, p)) in members.iter().zip(&profiles).enumerate() {
            let first = m
                .conflicts
                .iter()
                .map(|c| c.distance - c.l_enter)
                .fold(f64::INFINITY, f64::min);
            if first.is_finite() {
                let crossing = p.time_to_distance(first);
                if crossing + CROSSING_SLACK < p.ramp_duration() {
                    return Err(PlanError::ShortApproach { member: idx });
                }
            }
        }
        let violated = members.iter().any(|m| {
            m.conflicts.iter().any(|c| {
                let entry = conflict_entry_time(t_clock, tau, m.v_opt, c.distance, c.l_enter);
                entry <= log.exit_at(m.lane, c.other_lane)
                    || entry <= log.exit_at(c.other_lane, m.lane)
            })
        });
        if !violated {
            let mut t_arrive = vec![f64::INFINITY; n_lanes];
            for m in members {
                for c in &m.conflicts {
                    let exit = conflict_exit_time(t_clock, tau, m.v_opt, c.distance, c.l_safe);
                    log.record(m.lane, c.other_lane, exit);
                }
                t_arrive[m.lane] = m
                    .conflicts
                    .iter()
                    .map(|c| conflict_entry_time(t_clock, tau, m.v_opt, c.distance, c.l_enter))
                    .fold(f64::INFINITY, f64::min);
            }
            let t_leave = (0..n_lanes).map(|l| log.lane_clearance(l)).collect();
            let t_acc = profiles.iter().map(|p| p.ramp_duration()).collect();
            return Ok(PlanningResult {
                profiles,
                t_acc,
                virtual_delay: tau,
                t_arrive,
                t_leave,
                rescales,
            });
        }
        if tau <= 0.0 {
            return Err(PlanError::ZeroDelayViolation);
        }
        if rescales >= params.max_rescales {
            return Err(PlanError::TransferUnsatisfiable { rescales });
        }
        tau *= params.k_rescale;
        rescales += 1;
    }
}
