//! Scenario schema, loading, validation and parameter overrides.

use std::fs;
use std::path::Path;

use crossway_core::geometry::{build_intersection, GeometryConfig, COORDINATED_MOVEMENTS};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometrySettings {
    pub lane_width: f64,
    pub approach_length: f64,
    pub exit_length: f64,
    pub enter_margin: f64,
    pub safe_margin: f64,
    pub movements: Vec<String>,
}

impl Default for GeometrySettings {
    fn default() -> Self {
        GeometrySettings {
            lane_width: 3.5,
            approach_length: 200.0,
            exit_length: 50.0,
            enter_margin: 0.0,
            safe_margin: 1.0,
            movements: COORDINATED_MOVEMENTS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Departure {
    pub movement: String,
    pub depart: f64,
    /// Initial speed; `v0_default` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v0: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scenario {
    pub geometry: GeometrySettings,
    pub departures: Vec<Departure>,
    pub v0_default: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub a_max: f64,
    pub k_rescale: f64,
    pub max_rescales: usize,
    pub dt: f64,
    pub vehicle_length: f64,
    pub vehicle_width: f64,
    /// Recorded for provenance; the run itself draws no random numbers.
    pub seed: u64,
    /// Vehicles farther than this from the junction center are not
    /// offered for coordination.
    pub coordination_zone: f64,
    /// Uncoordinated vehicles stop this far before their first conflict
    /// entry threshold, leaving room for a full ramp when committed later.
    pub hold_margin: f64,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            geometry: GeometrySettings::default(),
            departures: Vec::new(),
            v0_default: 15.0,
            v_min: 5.0,
            v_max: 20.0,
            a_max: 2.5,
            k_rescale: 1.2,
            max_rescales: 20,
            dt: 0.1,
            vehicle_length: 4.5,
            vehicle_width: 1.8,
            seed: 0,
            coordination_zone: 250.0,
            hold_margin: 90.0,
        }
    }
}

impl Scenario {
    pub fn geometry_config(&self) -> GeometryConfig {
        GeometryConfig {
            lane_width: self.geometry.lane_width,
            approach_length: self.geometry.approach_length,
            exit_length: self.geometry.exit_length,
            enter_margin: self.geometry.enter_margin,
            safe_margin: self.geometry.safe_margin,
            movements: self.geometry.movements.clone(),
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |msg: String| Err(ScenarioError::Invalid(msg));
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.v_min > 0.0) || !(self.v_max >= self.v_min) {
            return bad(format!(
                "need 0 < v_min <= v_max, got v_min={} v_max={}",
                self.v_min, self.v_max
            ));
        }
        if !(self.a_max > 0.0) {
            return bad(format!("a_max must be positive, got {}", self.a_max));
        }
        if !(self.k_rescale > 1.0) {
            return bad(format!("k_rescale must exceed 1, got {}", self.k_rescale));
        }
        if self.max_rescales == 0 {
            return bad("max_rescales must be at least 1".into());
        }
        if !(self.vehicle_length > 0.0) {
            return bad(format!("vehicle_length must be positive, got {}", self.vehicle_length));
        }
        if !(self.vehicle_width > 0.0) {
            return bad(format!("vehicle_width must be positive, got {}", self.vehicle_width));
        }
        if !(self.coordination_zone > 0.0) {
            return bad(format!("coordination_zone must be positive, got {}", self.coordination_zone));
        }
        if !(self.hold_margin >= 0.0) {
            return bad(format!("hold_margin must be nonnegative, got {}", self.hold_margin));
        }
        let g = &self.geometry;
        if !(g.lane_width > 0.0) || !(g.approach_length > 0.0) || !(g.exit_length >= 0.0) {
            return bad("geometry lengths must be positive".into());
        }
        if !(g.enter_margin >= 0.0) || !(g.safe_margin >= 0.0) {
            return bad("geometry margins must be nonnegative".into());
        }
        if !(self.v0_default >= 0.0) || self.v0_default > self.v_max {
            return bad(format!(
                "v0_default must lie in [0, v_max], got {}",
                self.v0_default
            ));
        }
        build_intersection(&self.geometry_config())
            .map_err(|e| ScenarioError::Invalid(format!("geometry: {e}")))?;
        let mut last_per_movement: Vec<(String, f64)> = Vec::new();
        for (k, d) in self.departures.iter().enumerate() {
            if !g.movements.iter().any(|m| *m == d.movement) {
                return bad(format!(
                    "departure {k}: movement {:?} not in geometry.movements",
                    d.movement
                ));
            }
            if !(d.depart >= 0.0) || !d.depart.is_finite() {
                return bad(format!("departure {k}: depart must be nonnegative"));
            }
            if let Some(v0) = d.v0 {
                if !(v0 >= 0.0) || v0 > self.v_max {
                    return bad(format!("departure {k}: v0 must lie in [0, v_max]"));
                }
            }
            match last_per_movement.iter_mut().find(|(m, _)| *m == d.movement) {
                Some((_, prev)) => {
                    if d.depart <= *prev {
                        return bad(format!(
                            "departure {k}: depart times on {} must be strictly increasing",
                            d.movement
                        ));
                    }
                    *prev = d.depart;
                }
                None => last_per_movement.push((d.movement.clone(), d.depart)),
            }
        }
        Ok(())
    }

    /// Applies one `key=value` override. Keys name scalar scenario or
    /// geometry fields; anything else is rejected.
    pub fn apply_override(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num(value: &str) -> Result<f64, String> {
            value
                .parse::<f64>()
                .map_err(|_| format!("not a number: {value:?}"))
        }
        match key {
            "v0_default" => self.v0_default = num(value)?,
            "v_min" => self.v_min = num(value)?,
            "v_max" => self.v_max = num(value)?,
            "a_max" => self.a_max = num(value)?,
            "k_rescale" => self.k_rescale = num(value)?,
            "max_rescales" => {
                self.max_rescales = value
                    .parse()
                    .map_err(|_| format!("not a count: {value:?}"))?
            }
            "dt" => self.dt = num(value)?,
            "vehicle_length" => self.vehicle_length = num(value)?,
            "vehicle_width" => self.vehicle_width = num(value)?,
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| format!("not an integer: {value:?}"))?
            }
            "coordination_zone" => self.coordination_zone = num(value)?,
            "hold_margin" => self.hold_margin = num(value)?,
            "lane_width" => self.geometry.lane_width = num(value)?,
            "approach_length" => self.geometry.approach_length = num(value)?,
            "exit_length" => self.geometry.exit_length = num(value)?,
            "enter_margin" => self.geometry.enter_margin = num(value)?,
            "safe_margin" => self.geometry.safe_margin = num(value)?,
            _ => return Err(format!("unknown override key {key:?}")),
        }
        Ok(())
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let scenario: Scenario = serde_json::from_str(&text)?;
    scenario.validate()?;
    Ok(scenario)
}
