//! Scenario configuration: TOML files and the built-in presets.
//!
//! ```toml
//! name = "A"
//! m_pedestrians = 100
//! n_vehicles = 50
//! k_basestations = 3
//! # everything below is optional; the values shown are the defaults
//! r_cell = 200.0            # meters, pedestrian and vehicle hops
//! r_area = 500.0            # meters, base-station to cloud hop
//! snr_ped = 20.0            # linear received SNR per hop
//! snr_veh = 20.0
//! snr_bs = 20.0
//! alpha = 4.0               # path-loss exponent, > 2
//! lambda = 1.0              # fading rate
//! interference_mode = "paper-literal"   # or "shared-desired-distance"
//! digits = 8                # inversion accuracy target
//! theta_grid = [0.01, 0.1, 1.0]         # linear thresholds, strictly increasing
//!
//! [delay_ped]               # decimal SI: 1 KB = 1e3 B, 1 GB = 1e9 B
//! payload_bytes = 5e3
//! rate_bytes_per_s = 2e9
//! [delay_veh]
//! payload_bytes = 5e3
//! rate_bytes_per_s = 4e9
//! [delay_bs]
//! payload_bytes = 1e4
//! rate_bytes_per_s = 8e9
//! ```
//!
//! Unknown keys are rejected. The default grid is 20 log-spaced thresholds
//! in `[0.01, 100]`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::delay::{table_one, DelayParams};
use crate::geometry::DiskRegion;
use crate::linkmodel::{InterferenceMode, LinkTier};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        reason: reason.into(),
    }
}

pub const DEFAULT_R_CELL: f64 = 200.0;
pub const DEFAULT_R_AREA: f64 = 500.0;
pub const DEFAULT_SNR: f64 = 20.0;
pub const DEFAULT_ALPHA: f64 = 4.0;
pub const DEFAULT_LAMBDA: f64 = 1.0;
pub const DEFAULT_DIGITS: u32 = 8;
pub const DEFAULT_THETA_MIN: f64 = 0.01;
pub const DEFAULT_THETA_MAX: f64 = 100.0;
pub const DEFAULT_THETA_POINTS: usize = 20;

fn default_r_cell() -> f64 {
    DEFAULT_R_CELL
}
fn default_r_area() -> f64 {
    DEFAULT_R_AREA
}
fn default_snr() -> f64 {
    DEFAULT_SNR
}
fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}
fn default_lambda() -> f64 {
    DEFAULT_LAMBDA
}
fn default_digits() -> u32 {
    DEFAULT_DIGITS
}
fn default_delay_ped() -> DelayParams {
    table_one::PEDESTRIAN
}
fn default_delay_veh() -> DelayParams {
    table_one::VEHICLE
}
fn default_delay_bs() -> DelayParams {
    table_one::BASE_STATION
}
fn default_theta_grid() -> Vec<f64> {
    log_grid(DEFAULT_THETA_MIN, DEFAULT_THETA_MAX, DEFAULT_THETA_POINTS)
}

/// `points` log-spaced values from `min` to `max` inclusive.
pub fn log_grid(min: f64, max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![min],
        _ => {
            let (a, b) = (min.log10(), max.log10());
            let step = (b - a) / (points - 1) as f64;
            (0..points)
                .map(|i| {
                    if i == points - 1 {
                        max
                    } else {
                        10f64.powf(a + step * i as f64)
                    }
                })
                .collect()
        }
    }
}

/// Linear threshold from decibels.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub m_pedestrians: u32,
    pub n_vehicles: u32,
    pub k_basestations: u32,
    #[serde(default = "default_r_cell")]
    pub r_cell: f64,
    #[serde(default = "default_r_area")]
    pub r_area: f64,
    #[serde(default = "default_snr")]
    pub snr_ped: f64,
    #[serde(default = "default_snr")]
    pub snr_veh: f64,
    #[serde(default = "default_snr")]
    pub snr_bs: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_delay_ped")]
    pub delay_ped: DelayParams,
    #[serde(default = "default_delay_veh")]
    pub delay_veh: DelayParams,
    #[serde(default = "default_delay_bs")]
    pub delay_bs: DelayParams,
    #[serde(default)]
    pub interference_mode: InterferenceMode,
    #[serde(default = "default_digits")]
    pub digits: u32,
    #[serde(default = "default_theta_grid")]
    pub theta_grid: Vec<f64>,
}

/// The three hop models of a scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainTiers {
    pub pedestrian: LinkTier,
    pub vehicle: LinkTier,
    pub backhaul: LinkTier,
}

impl ChainTiers {
    pub fn as_array(&self) -> [LinkTier; 3] {
        [self.pedestrian, self.vehicle, self.backhaul]
    }
}

impl ScenarioConfig {
    /// Built-in scenario with the given node counts and default physics.
    pub fn with_counts(name: &str, m: u32, n: u32, k: u32) -> Self {
        Self {
            name: name.to_string(),
            m_pedestrians: m,
            n_vehicles: n,
            k_basestations: k,
            r_cell: DEFAULT_R_CELL,
            r_area: DEFAULT_R_AREA,
            snr_ped: DEFAULT_SNR,
            snr_veh: DEFAULT_SNR,
            snr_bs: DEFAULT_SNR,
            alpha: DEFAULT_ALPHA,
            lambda: DEFAULT_LAMBDA,
            delay_ped: table_one::PEDESTRIAN,
            delay_veh: table_one::VEHICLE,
            delay_bs: table_one::BASE_STATION,
            interference_mode: InterferenceMode::PaperLiteral,
            digits: DEFAULT_DIGITS,
            theta_grid: default_theta_grid(),
        }
    }

    /// Presets `A`, `B` and `C`.
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "A" => Some(Self::with_counts("A", 100, 50, 3)),
            "B" => Some(Self::with_counts("B", 300, 100, 5)),
            "C" => Some(Self::with_counts("C", 500, 150, 7)),
            _ => None,
        }
    }

    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: origin.to_string(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.name.is_empty() {
            return Err(invalid("name", "must not be empty"));
        }
        for (field, v) in [
            ("m_pedestrians", self.m_pedestrians),
            ("n_vehicles", self.n_vehicles),
            ("k_basestations", self.k_basestations),
        ] {
            if v == 0 {
                return Err(invalid(field, "must be at least 1"));
            }
        }
        for (field, v) in [
            ("r_cell", self.r_cell),
            ("r_area", self.r_area),
            ("snr_ped", self.snr_ped),
            ("snr_veh", self.snr_veh),
            ("snr_bs", self.snr_bs),
            ("lambda", self.lambda),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(field, format!("must be positive, got {v}")));
            }
        }
        if self.r_cell > self.r_area {
            return Err(invalid(
                "r_cell",
                format!("{} exceeds r_area = {}", self.r_cell, self.r_area),
            ));
        }
        if !(self.alpha.is_finite() && self.alpha > 2.0) {
            return Err(invalid(
                "alpha",
                format!("must exceed 2, got {}", self.alpha),
            ));
        }
        if self.digits == 0 || self.digits > crate::inversion::MAX_DIGITS {
            return Err(invalid(
                "digits",
                format!(
                    "must be in 1..={}, got {}",
                    crate::inversion::MAX_DIGITS,
                    self.digits
                ),
            ));
        }
        for (field, d) in [
            ("delay_ped", &self.delay_ped),
            ("delay_veh", &self.delay_veh),
            ("delay_bs", &self.delay_bs),
        ] {
            d.validate().map_err(|e| invalid(field, e.to_string()))?;
        }
        validate_grid(&self.theta_grid)
    }

    pub fn tiers(&self) -> Result<ChainTiers, ConfigError> {
        let cell = DiskRegion::new(self.r_cell).map_err(|e| invalid("r_cell", e.to_string()))?;
        let area = DiskRegion::new(self.r_area).map_err(|e| invalid("r_area", e.to_string()))?;
        let tier = |field, region, nodes, snr| {
            LinkTier::new(
                region,
                nodes,
                snr,
                self.lambda,
                self.alpha,
                self.interference_mode,
            )
            .map_err(|e| invalid(field, e.to_string()))
        };
        Ok(ChainTiers {
            pedestrian: tier("m_pedestrians", cell, self.m_pedestrians, self.snr_ped)?,
            vehicle: tier("n_vehicles", cell, self.n_vehicles, self.snr_veh)?,
            backhaul: tier("k_basestations", area, self.k_basestations, self.snr_bs)?,
        })
    }
}

pub fn validate_grid(grid: &[f64]) -> Result<(), ConfigError> {
    if let Some(t) = grid.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
        return Err(invalid(
            "theta_grid",
            format!("thresholds must be positive, got {t}"),
        ));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("theta_grid", "must be strictly increasing"));
    }
    Ok(())
}

/// Resolves `spec` as a preset name or a path to a TOML file.
pub fn load_config(spec: &str) -> Result<ScenarioConfig, ConfigError> {
    if let Some(cfg) = ScenarioConfig::preset(spec) {
        return Ok(cfg);
    }
    load_config_file(Path::new(spec))
}

pub fn load_config_file(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: shown.clone(),
        source,
    })?;
    ScenarioConfig::from_toml_str(&text, &shown)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "name = \"x\"\nm_pedestrians = 10\nn_vehicles = 5\nk_basestations = 2\n";

    #[test]
    fn presets_match_scenarios() {
        let a = load_config("A").unwrap();
        assert_eq!(
            (a.m_pedestrians, a.n_vehicles, a.k_basestations),
            (100, 50, 3)
        );
        let b = load_config("B").unwrap();
        assert_eq!(
            (b.m_pedestrians, b.n_vehicles, b.k_basestations),
            (300, 100, 5)
        );
        let c = load_config("C").unwrap();
        assert_eq!(
            (c.m_pedestrians, c.n_vehicles, c.k_basestations),
            (500, 150, 7)
        );
        for p in [a, b, c] {
            p.validate().unwrap();
            assert_eq!(p.r_cell, 200.0);
            assert_eq!(p.r_area, 500.0);
        }
    }

    #[test]
    fn defaults_fill_missing_keys() {
        let cfg = ScenarioConfig::from_toml_str(MINIMAL, "inline").unwrap();
        assert_eq!(cfg.alpha, 4.0);
        assert_eq!(cfg.lambda, 1.0);
        assert_eq!(cfg.digits, 8);
        assert_eq!(cfg.interference_mode, InterferenceMode::PaperLiteral);
        assert_eq!(cfg.theta_grid.len(), 20);
        assert_eq!(cfg.theta_grid[0], 0.01);
        assert_eq!(cfg.theta_grid[19], 100.0);
        assert_eq!(cfg.delay_bs, table_one::BASE_STATION);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{MINIMAL}colour = \"red\"\n");
        let err = ScenarioConfig::from_toml_str(&text, "inline").unwrap_err();
        assert!(err.to_string().contains("colour"), "{err}");
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = format!("{MINIMAL}alpha = = 3\n");
        let err = ScenarioConfig::from_toml_str(&text, "cfg.toml").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 5"), "{msg}");
    }

    #[test]
    fn validation_names_the_field() {
        let cases = [
            ("alpha = 2.0\n", "alpha"),
            ("r_cell = 600.0\n", "r_cell"),
            ("digits = 0\n", "digits"),
            ("theta_grid = [1.0, 0.5]\n", "theta_grid"),
            ("snr_bs = -1.0\n", "snr_bs"),
            (
                "[delay_veh]\npayload_bytes = 0.0\nrate_bytes_per_s = 1.0\n",
                "delay_veh",
            ),
        ];
        for (extra, field) in cases {
            let text = format!("{MINIMAL}{extra}");
            match ScenarioConfig::from_toml_str(&text, "inline") {
                Err(ConfigError::Invalid { field: f, .. }) => assert_eq!(f, field),
                other => panic!("{extra}: {other:?}"),
            }
        }
        let text = MINIMAL.replace("m_pedestrians = 10", "m_pedestrians = 0");
        assert!(matches!(
            ScenarioConfig::from_toml_str(&text, "inline"),
            Err(ConfigError::Invalid {
                field: "m_pedestrians",
                ..
            })
        ));
    }

    #[test]
    fn mode_and_delay_tables_parse() {
        let text = format!(
            "{MINIMAL}interference_mode = \"shared\"\n[delay_ped]\npayload_bytes = 1e3\nrate_bytes_per_s = 1e9\n"
        );
        let cfg = ScenarioConfig::from_toml_str(&text, "inline").unwrap();
        assert_eq!(
            cfg.interference_mode,
            InterferenceMode::SharedDesiredDistance
        );
        assert_eq!(cfg.delay_ped.payload_bytes, 1e3);
    }

    #[test]
    fn grids() {
        assert!(log_grid(1.0, 10.0, 0).is_empty());
        assert_eq!(log_grid(2.0, 10.0, 1), vec![2.0]);
        let g = log_grid(0.01, 100.0, 5);
        assert_eq!(g.len(), 5);
        assert!((g[2] - 1.0).abs() < 1e-12);
        assert!((db_to_linear(10.0) - 10.0).abs() < 1e-12);
        assert!((db_to_linear(-20.0) - 0.01).abs() < 1e-15);
    }

    #[test]
    fn tiers_follow_regions() {
        let t = load_config("A").unwrap().tiers().unwrap();
        assert_eq!(t.pedestrian.region.radius(), 200.0);
        assert_eq!(t.vehicle.total_nodes, 50);
        assert_eq!(t.backhaul.region.radius(), 500.0);
        assert_eq!(t.backhaul.interferers(), 2);
    }
}
