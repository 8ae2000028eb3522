//! Intersection geometry: movement paths built from line and arc segments,
//! and the pairwise conflict relation between coordinated movements.
//!
//! The default model is a four-leg intersection with two approach lanes per
//! leg under right-hand traffic. Through movements run on the outer lane,
//! left turns start on the inner lane and follow a quarter-circle arc whose
//! radius is tied to the lane width so the arc meets the intersection box
//! edge tangentially. Right turns exist in the schema but are flagged as
//! uncoordinated and never enter the conflict matrix.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{atan2, cos, sin, sqrt};

/// Tolerance for segment parameter inclusion, in meters.
const EPS_LEN: f64 = 1e-9;
/// Two crossings closer than this along both paths are the same point.
const DEDUPE_LEN: f64 = 1e-6;

#[derive(Clone, Copy, PartialEq, Debug)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        sqrt(dx * dx + dy * dy)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Leg {
    North,
    East,
    South,
    West,
}

/// One centerline segment. Arc sweep is signed, positive counterclockwise,
/// and `start_angle` is measured from the arc center.
#[derive(Clone, Debug)]
pub enum PathElement {
    Line { start: Point, end: Point },
    Arc { center: Point, radius: f64, start_angle: f64, sweep: f64 },
}

impl PathElement {
    pub fn length(&self) -> f64 {
        match self {
            PathElement::Line { start, end } => start.dist(end),
            PathElement::Arc { radius, sweep, .. } => radius * fabs(*sweep),
        }
    }

    /// Point at local arc length `s` from the element start. `s` is clamped
    /// to the element.
    pub fn point_at(&self, s: f64) -> Point {
        match self {
            PathElement::Line { start, end } => {
                let len = self.length();
                let t = if len > 0.0 { (s / len).clamp(0.0, 1.0) } else { 0.0 };
                Point::new(start.x + t * (end.x - start.x), start.y + t * (end.y - start.y))
            }
            PathElement::Arc { center, radius, start_angle, sweep } => {
                let len = self.length();
                let t = if len > 0.0 { (s / len).clamp(0.0, 1.0) } else { 0.0 };
                let ang = start_angle + sweep * t;
                Point::new(center.x + radius * cos(ang), center.y + radius * sin(ang))
            }
        }
    }

    /// Closest approach to `p`: returns (distance, local arc length).
    fn closest_to(&self, p: &Point) -> (f64, f64) {
        match self {
            PathElement::Line { start, end } => {
                let len = self.length();
                if len <= 0.0 {
                    return (start.dist(p), 0.0);
                }
                let dx = (end.x - start.x) / len;
                let dy = (end.y - start.y) / len;
                let s = ((p.x - start.x) * dx + (p.y - start.y) * dy).clamp(0.0, len);
                (self.point_at(s).dist(p), s)
            }
            PathElement::Arc { center, radius, start_angle, sweep } => {
                let phi = atan2(p.y - center.y, p.x - center.x);
                let mut best = (self.point_at(0.0).dist(p), 0.0);
                let end_s = self.length();
                let end_d = self.point_at(end_s).dist(p);
                if end_d < best.0 {
                    best = (end_d, end_s);
                }
                if let Some(s) = arc_param(*start_angle, *sweep, *radius, phi) {
                    let d = self.point_at(s).dist(p);
                    if d < best.0 {
                        best = (d, s);
                    }
                }
                best
            }
        }
    }
}

fn fabs(x: f64) -> f64 {
    if x < 0.0 {
        -x
    } else {
        x
    }
}

fn wrap_2pi(a: f64) -> f64 {
    let mut r = a % (2.0 * PI);
    if r < 0.0 {
        r += 2.0 * PI;
    }
    r
}

/// If the angle `phi` lies on the arc, returns the local arc length, else None.
fn arc_param(start_angle: f64, sweep: f64, radius: f64, phi: f64) -> Option<f64> {
    let eps_ang = EPS_LEN / radius.max(1e-6);
    if sweep >= 0.0 {
        let d = wrap_2pi(phi - start_angle);
        if d <= sweep + eps_ang {
            Some((d.min(sweep)) * radius)
        } else {
            None
        }
    } else {
        let d = wrap_2pi(start_angle - phi);
        if d <= -sweep + eps_ang {
            Some((d.min(-sweep)) * radius)
        } else {
            None
        }
    }
}

/// A lane-level movement through the intersection.
#[derive(Clone, Debug)]
pub struct MovementPath {
    pub id: String,
    pub origin: Leg,
    pub dest: Leg,
    pub elements: Vec<PathElement>,
    /// Right turns are false: they run free and never join the conflict matrix.
    pub coordinated: bool,
    pub total_length: f64,
    /// Arc length of the closest approach to the intersection center.
    pub center_s: f64,
}

impl MovementPath {
    pub fn new(id: String, origin: Leg, dest: Leg, elements: Vec<PathElement>, coordinated: bool) -> Self {
        let total_length = elements.iter().map(|e| e.length()).sum();
        let origin_pt = Point::new(0.0, 0.0);
        let mut best = (f64::INFINITY, 0.0);
        let mut offset = 0.0;
        for e in &elements {
            let (d, s) = e.closest_to(&origin_pt);
            if d < best.0 {
                best = (d, offset + s);
            }
            offset += e.length();
        }
        MovementPath { id, origin, dest, elements, coordinated, total_length, center_s: best.1 }
    }

    /// Point at arc length `s` from the spawn point, clamped to the path.
    pub fn point_at(&self, s: f64) -> Point {
        let mut rem = s.max(0.0);
        for (k, e) in self.elements.iter().enumerate() {
            let len = e.length();
            if rem <= len || k == self.elements.len() - 1 {
                return e.point_at(rem);
            }
            rem -= len;
        }
        Point::new(0.0, 0.0)
    }
}

/// A crossing between two coordinated movements. `s_i` and `s_j` are arc
/// positions of the crossing measured from each movement's spawn point.
#[derive(Clone, Debug)]
pub struct ConflictPoint {
    pub i: usize,
    pub j: usize,
    pub location: Point,
    pub s_i: f64,
    pub s_j: f64,
}

impl ConflictPoint {
    /// Arc position of the crossing on movement `m`, which must be a party.
    pub fn s_on(&self, m: usize) -> Option<f64> {
        if m == self.i {
            Some(self.s_i)
        } else if m == self.j {
            Some(self.s_j)
        } else {
            None
        }
    }

    pub fn other(&self, m: usize) -> Option<usize> {
        if m == self.i {
            Some(self.j)
        } else if m == self.j {
            Some(self.i)
        } else {
            None
        }
    }
}

/// Longitudinal frame of one vehicle relative to one conflict point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConflictFrame {
    /// Distance from the vehicle nose reference to the conflict point.
    pub l_prime: f64,
    /// The vehicle occupies the conflict once within `l_enter` before it.
    pub l_enter: f64,
    /// The vehicle frees the conflict once `l_safe` past it.
    pub l_safe: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum GeometryError {
    UnknownMovement(String),
    DuplicateMovement(String),
    /// Two coordinated paths share a stretch of centerline.
    OverlappingPaths(usize, usize),
    /// Two coordinated paths cross more than once.
    MultipleCrossings(usize, usize),
    /// The vehicle is already past the conflict point.
    Downstream { movement: usize, conflict: usize },
    /// The movement is not a party to the conflict point.
    NotInConflict { movement: usize, conflict: usize },
    InvalidConfig(&'static str),
}

impl core::fmt::Display for GeometryError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            GeometryError::UnknownMovement(id) => write!(f, "unknown movement id {:?}", id),
            GeometryError::DuplicateMovement(id) => write!(f, "movement id {:?} listed twice", id),
            GeometryError::OverlappingPaths(i, j) => {
                write!(f, "movements {} and {} overlap along a stretch of centerline", i, j)
            }
            GeometryError::MultipleCrossings(i, j) => {
                write!(f, "movements {} and {} cross more than once", i, j)
            }
            GeometryError::Downstream { movement, conflict } => {
                write!(f, "vehicle on movement {} is past conflict point {}", movement, conflict)
            }
            GeometryError::NotInConflict { movement, conflict } => {
                write!(f, "movement {} is not a party to conflict point {}", movement, conflict)
            }
            GeometryError::InvalidConfig(msg) => write!(f, "invalid geometry config: {}", msg),
        }
    }
}

/// Geometry parameters. `movements` lists movement ids to build; an empty
/// list means the eight coordinated movements. Lane offsets, the box size
/// and turn radii all derive from `lane_width` through the tangency
/// construction, so one knob scales the whole junction.
#[derive(Clone, Debug)]
pub struct GeometryConfig {
    pub lane_width: f64,
    /// Spawn point to intersection center, along the approach lane.
    pub approach_length: f64,
    pub exit_length: f64,
    pub enter_margin: f64,
    pub safe_margin: f64,
    pub movements: Vec<String>,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig {
            lane_width: 3.5,
            approach_length: 200.0,
            exit_length: 50.0,
            enter_margin: 0.0,
            safe_margin: 1.0,
            movements: Vec::new(),
        }
    }
}

/// The eight coordinated movements, in the canonical lane order used by
/// scenarios and the conflict matrix.
pub const COORDINATED_MOVEMENTS: [&str; 8] = ["ES", "EW", "NE", "NS", "WN", "WE", "SW", "SN"];

#[derive(Clone, Debug)]
pub struct IntersectionModel {
    pub movements: Vec<MovementPath>,
    pub conflicts: Vec<ConflictPoint>,
    conflict_matrix: Vec<bool>,
    pub half_width: f64,
    pub enter_margin: f64,
    pub safe_margin: f64,
}

impl IntersectionModel {
    pub fn n(&self) -> usize {
        self.movements.len()
    }

    pub fn conflicting(&self, i: usize, j: usize) -> bool {
        self.conflict_matrix[i * self.n() + j]
    }

    pub fn movement_index(&self, id: &str) -> Option<usize> {
        self.movements.iter().position(|m| m.id == id)
    }

    /// Indices into `conflicts` involving movement `m`, in increasing `s`.
    pub fn conflicts_of(&self, m: usize) -> Vec<usize> {
        let mut ix: Vec<usize> =
            (0..self.conflicts.len()).filter(|&k| self.conflicts[k].s_on(m).is_some()).collect();
        ix.sort_by(|&a, &b| {
            let sa = self.conflicts[a].s_on(m).unwrap();
            let sb = self.conflicts[b].s_on(m).unwrap();
            sa.partial_cmp(&sb).unwrap()
        });
        ix
    }

    /// Frame of a vehicle at `distance_to_center` (measured along its path,
    /// positive upstream of the closest approach to the center) relative to
    /// conflict point `conflict`.
    pub fn conflict_frame(
        &self,
        distance_to_center: f64,
        movement: usize,
        conflict: usize,
        vehicle_length: f64,
    ) -> Result<ConflictFrame, GeometryError> {
        let cp = &self.conflicts[conflict];
        let s_cp = cp.s_on(movement).ok_or(GeometryError::NotInConflict { movement, conflict })?;
        let arc_pos = self.movements[movement].center_s - distance_to_center;
        let l_prime = s_cp - arc_pos;
        if l_prime < 0.0 {
            return Err(GeometryError::Downstream { movement, conflict });
        }
        Ok(ConflictFrame {
            l_prime,
            l_enter: self.half_width + 0.5 * vehicle_length + self.enter_margin,
            l_safe: self.half_width + 0.5 * vehicle_length + self.safe_margin,
        })
    }
}

struct MovementSpec {
    origin: Leg,
    kind: Kind,
}

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Through,
    Left,
    Right,
}

fn movement_spec(id: &str) -> Option<MovementSpec> {
    let (origin, kind) = match id {
        "EW" => (Leg::East, Kind::Through),
        "ES" => (Leg::East, Kind::Left),
        "EN" => (Leg::East, Kind::Right),
        "WE" => (Leg::West, Kind::Through),
        "WN" => (Leg::West, Kind::Left),
        "WS" => (Leg::West, Kind::Right),
        "NS" => (Leg::North, Kind::Through),
        "NE" => (Leg::North, Kind::Left),
        "NW" => (Leg::North, Kind::Right),
        "SN" => (Leg::South, Kind::Through),
        "SW" => (Leg::South, Kind::Left),
        "SE" => (Leg::South, Kind::Right),
        _ => return None,
    };
    Some(MovementSpec { origin, kind })
}

fn leg_rotation(origin: Leg) -> f64 {
    match origin {
        Leg::East => 0.0,
        Leg::North => 0.5 * PI,
        Leg::West => PI,
        Leg::South => 1.5 * PI,
    }
}

fn dest_leg(origin: Leg, kind: Kind) -> Leg {
    let order = [Leg::East, Leg::North, Leg::West, Leg::South];
    let i = order.iter().position(|&l| l == origin).unwrap();
    // In the canonical from-East frame a through exits West, a left exits
    // South and a right exits North; rotation preserves the offsets.
    let shift = match kind {
        Kind::Through => 2,
        Kind::Left => 3,
        Kind::Right => 1,
    };
    order[(i + shift) % 4]
}

fn rotate(p: Point, theta: f64) -> Point {
    let (s, c) = (sin(theta), cos(theta));
    Point::new(c * p.x - s * p.y, s * p.x + c * p.y)
}

fn rotate_element(e: PathElement, theta: f64) -> PathElement {
    match e {
        PathElement::Line { start, end } => {
            PathElement::Line { start: rotate(start, theta), end: rotate(end, theta) }
        }
        PathElement::Arc { center, radius, start_angle, sweep } => PathElement::Arc {
            center: rotate(center, theta),
            radius,
            start_angle: start_angle + theta,
            sweep,
        },
    }
}

/// Elements in the canonical frame: approach from the East, heading -x.
fn canonical_elements(kind: Kind, cfg: &GeometryConfig) -> Vec<PathElement> {
    let w = cfg.lane_width;
    let hw = 0.5 * w;
    let b = 2.0 * w;
    let inner = 0.5 * w;
    let outer = 1.5 * w;
    let a = cfg.approach_length;
    let e = cfg.exit_length;
    let mut v = Vec::new();
    match kind {
        Kind::Through => {
            v.push(PathElement::Line {
                start: Point::new(a, outer),
                end: Point::new(-(b + e), outer),
            });
        }
        Kind::Left => {
            let r = 2.5 * w;
            v.push(PathElement::Line { start: Point::new(a, inner), end: Point::new(b, inner) });
            v.push(PathElement::Arc {
                center: Point::new(b, inner - r),
                radius: r,
                start_angle: 0.5 * PI,
                sweep: 0.5 * PI,
            });
            v.push(PathElement::Line {
                start: Point::new(-hw, -b),
                end: Point::new(-hw, -(b + e)),
            });
        }
        Kind::Right => {
            let r = 0.5 * w;
            v.push(PathElement::Line { start: Point::new(a, outer), end: Point::new(b, outer) });
            v.push(PathElement::Arc {
                center: Point::new(b, outer + r),
                radius: r,
                start_angle: 1.5 * PI,
                sweep: -0.5 * PI,
            });
            v.push(PathElement::Line { start: Point::new(outer, b), end: Point::new(outer, b + e) });
        }
    }
    v
}

/// Builds the model for `config`, computing every pairwise conflict point
/// between coordinated movements analytically.
pub fn build_intersection(config: &GeometryConfig) -> Result<IntersectionModel, GeometryError> {
    if !(config.lane_width > 0.0) {
        return Err(GeometryError::InvalidConfig("lane_width must be positive"));
    }
    if !(config.approach_length > 2.0 * config.lane_width) {
        return Err(GeometryError::InvalidConfig(
            "approach_length must exceed the intersection half-width",
        ));
    }
    if !(config.exit_length > 0.0) {
        return Err(GeometryError::InvalidConfig("exit_length must be positive"));
    }
    if config.enter_margin < 0.0 || config.safe_margin < 0.0 {
        return Err(GeometryError::InvalidConfig("margins must be nonnegative"));
    }
    let ids: Vec<String> = if config.movements.is_empty() {
        COORDINATED_MOVEMENTS.iter().map(|s| String::from(*s)).collect()
    } else {
        config.movements.clone()
    };
    let mut movements = Vec::with_capacity(ids.len());
    for id in &ids {
        if movements.iter().any(|m: &MovementPath| &m.id == id) {
            return Err(GeometryError::DuplicateMovement(id.clone()));
        }
        let spec = movement_spec(id).ok_or_else(|| GeometryError::UnknownMovement(id.clone()))?;
        let theta = leg_rotation(spec.origin);
        let elements: Vec<PathElement> =
            canonical_elements(spec.kind, config).into_iter().map(|e| rotate_element(e, theta)).collect();
        movements.push(MovementPath::new(
            id.clone(),
            spec.origin,
            dest_leg(spec.origin, spec.kind),
            elements,
            spec.kind != Kind::Right,
        ));
    }
    let (conflicts, conflict_matrix) = compute_conflicts(&movements)?;
    Ok(IntersectionModel {
        movements,
        conflicts,
        conflict_matrix,
        half_width: 0.5 * config.lane_width,
        enter_margin: config.enter_margin,
        safe_margin: config.safe_margin,
    })
}

/// All crossings between coordinated path pairs. Rejects pairs that overlap
/// along a stretch or cross more than once; the downstream pipeline assumes
/// one conflict point per pair.
pub fn compute_conflicts(
    movements: &[MovementPath],
) -> Result<(Vec<ConflictPoint>, Vec<bool>), GeometryError> {
    let n = movements.len();
    let mut conflicts = Vec::new();
    let mut matrix = alloc::vec![false; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            if !movements[i].coordinated || !movements[j].coordinated {
                continue;
            }
            let crossings = path_crossings(&movements[i], &movements[j])
                .map_err(|_| GeometryError::OverlappingPaths(i, j))?;
            match crossings.len() {
                0 => {}
                1 => {
                    let (s_i, s_j, location) = crossings[0];
                    matrix[i * n + j] = true;
                    matrix[j * n + i] = true;
                    conflicts.push(ConflictPoint { i, j, location, s_i, s_j });
                }
                _ => return Err(GeometryError::MultipleCrossings(i, j)),
            }
        }
    }
    Ok((conflicts, matrix))
}

struct Overlap;

/// Crossings of two paths as (s_a, s_b, point), deduplicated.
fn path_crossings(a: &MovementPath, b: &MovementPath) -> Result<Vec<(f64, f64, Point)>, Overlap> {
    let mut out: Vec<(f64, f64, Point)> = Vec::new();
    let mut off_a = 0.0;
    for ea in &a.elements {
        let mut off_b = 0.0;
        for eb in &b.elements {
            for (sa, sb, p) in element_crossings(ea, eb)? {
                let ga = off_a + sa;
                let gb = off_b + sb;
                if !out.iter().any(|(x, y, _)| fabs(x - ga) < DEDUPE_LEN && fabs(y - gb) < DEDUPE_LEN)
                {
                    out.push((ga, gb, p));
                }
            }
            off_b += eb.length();
        }
        off_a += ea.length();
    }
    Ok(out)
}

fn element_crossings(a: &PathElement, b: &PathElement) -> Result<Vec<(f64, f64, Point)>, Overlap> {
    match (a, b) {
        (PathElement::Line { .. }, PathElement::Line { .. }) => line_line(a, b),
        (PathElement::Line { .. }, PathElement::Arc { .. }) => line_arc(a, b, false),
        (PathElement::Arc { .. }, PathElement::Line { .. }) => line_arc(b, a, true),
        (PathElement::Arc { .. }, PathElement::Arc { .. }) => arc_arc(a, b),
    }
}

fn line_line(a: &PathElement, b: &PathElement) -> Result<Vec<(f64, f64, Point)>, Overlap> {
    let (p1, p2) = match a {
        PathElement::Line { start, end } => (*start, *end),
        _ => unreachable!(),
    };
    let (q1, q2) = match b {
        PathElement::Line { start, end } => (*start, *end),
        _ => unreachable!(),
    };
    let la = p1.dist(&p2);
    let lb = q1.dist(&q2);
    if la <= 0.0 || lb <= 0.0 {
        return Ok(Vec::new());
    }
    let da = Point::new((p2.x - p1.x) / la, (p2.y - p1.y) / la);
    let db = Point::new((q2.x - q1.x) / lb, (q2.y - q1.y) / lb);
    let denom = da.x * db.y - da.y * db.x;
    let w = Point::new(q1.x - p1.x, q1.y - p1.y);
    if fabs(denom) < 1e-12 {
        // Parallel. Collinear with interval overlap is a shared stretch.
        let offline = w.x * da.y - w.y * da.x;
        if fabs(offline) < 1e-9 {
            let t1 = w.x * da.x + w.y * da.y;
            let t2 = (q2.x - p1.x) * da.x + (q2.y - p1.y) * da.y;
            let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
            if hi.min(la) - lo.max(0.0) > DEDUPE_LEN {
                return Err(Overlap);
            }
        }
        return Ok(Vec::new());
    }
    let t = (w.x * db.y - w.y * db.x) / denom;
    let u = (w.x * da.y - w.y * da.x) / denom;
    if t >= -EPS_LEN && t <= la + EPS_LEN && u >= -EPS_LEN && u <= lb + EPS_LEN {
        let p = Point::new(p1.x + t * da.x, p1.y + t * da.y);
        return Ok(alloc::vec![(t.clamp(0.0, la), u.clamp(0.0, lb), p)]);
    }
    Ok(Vec::new())
}

/// `swap` flips the output order when the caller passed (arc, line).
fn line_arc(
    line: &PathElement,
    arc: &PathElement,
    swap: bool,
) -> Result<Vec<(f64, f64, Point)>, Overlap> {
    let (p1, p2) = match line {
        PathElement::Line { start, end } => (*start, *end),
        _ => unreachable!(),
    };
    let (c, r, a0, sw) = match arc {
        PathElement::Arc { center, radius, start_angle, sweep } => {
            (*center, *radius, *start_angle, *sweep)
        }
        _ => unreachable!(),
    };
    let len = p1.dist(&p2);
    if len <= 0.0 {
        return Ok(Vec::new());
    }
    let d = Point::new((p2.x - p1.x) / len, (p2.y - p1.y) / len);
    let f = Point::new(p1.x - c.x, p1.y - c.y);
    // |f + t d|^2 = r^2 with unit d.
    let bq = f.x * d.x + f.y * d.y;
    let cq = f.x * f.x + f.y * f.y - r * r;
    let disc = bq * bq - cq;
    if disc < 0.0 {
        return Ok(Vec::new());
    }
    let root = sqrt(disc);
    let mut out = Vec::new();
    for t in [-bq - root, -bq + root] {
        if t < -EPS_LEN || t > len + EPS_LEN {
            continue;
        }
        let p = Point::new(p1.x + t * d.x, p1.y + t * d.y);
        let phi = atan2(p.y - c.y, p.x - c.x);
        if let Some(s_arc) = arc_param(a0, sw, r, phi) {
            let tl = t.clamp(0.0, len);
            let entry = if swap { (s_arc, tl, p) } else { (tl, s_arc, p) };
            if !out
                .iter()
                .any(|(x, y, _): &(f64, f64, Point)| fabs(x - entry.0) < DEDUPE_LEN && fabs(y - entry.1) < DEDUPE_LEN)
            {
                out.push(entry);
            }
        }
    }
    Ok(out)
}

fn arc_arc(a: &PathElement, b: &PathElement) -> Result<Vec<(f64, f64, Point)>, Overlap> {
    let (c1, r1, a1, s1) = match a {
        PathElement::Arc { center, radius, start_angle, sweep } => {
            (*center, *radius, *start_angle, *sweep)
        }
        _ => unreachable!(),
    };
    let (c2, r2, a2, s2) = match b {
        PathElement::Arc { center, radius, start_angle, sweep } => {
            (*center, *radius, *start_angle, *sweep)
        }
        _ => unreachable!(),
    };
    let d = c1.dist(&c2);
    if d < 1e-9 && fabs(r1 - r2) < 1e-9 {
        // Same circle: overlapping angular ranges share a stretch.
        let steps = 32;
        for k in 0..=steps {
            let s = a.length() * (k as f64) / (steps as f64);
            let p = a.point_at(s);
            let phi = atan2(p.y - c2.y, p.x - c2.x);
            if arc_param(a2, s2, r2, phi).is_some() {
                return Err(Overlap);
            }
        }
        return Ok(Vec::new());
    }
    if d > r1 + r2 + 1e-9 || d < fabs(r1 - r2) - 1e-9 {
        return Ok(Vec::new());
    }
    let ax = (d * d + r1 * r1 - r2 * r2) / (2.0 * d);
    let h2 = r1 * r1 - ax * ax;
    let h = sqrt(h2.max(0.0));
    let ux = (c2.x - c1.x) / d;
    let uy = (c2.y - c1.y) / d;
    let base = Point::new(c1.x + ax * ux, c1.y + ax * uy);
    let mut out: Vec<(f64, f64, Point)> = Vec::new();
    for sign in [1.0, -1.0] {
        let p = Point::new(base.x - sign * h * uy, base.y + sign * h * ux);
        let phi1 = atan2(p.y - c1.y, p.x - c1.x);
        let phi2 = atan2(p.y - c2.y, p.x - c2.x);
        if let (Some(sa), Some(sb)) = (arc_param(a1, s1, r1, phi1), arc_param(a2, s2, r2, phi2)) {
            if !out.iter().any(|(x, y, _)| fabs(x - sa) < DEDUPE_LEN && fabs(y - sb) < DEDUPE_LEN) {
                out.push((sa, sb, p));
            }
        }
    }
    Ok(out)
}
