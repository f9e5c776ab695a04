//! Run configuration in user units (degrees, km/h, metres).
//!
//! [`RunConfig::vehicle_params`] is the single place where user units become
//! radians and metres per second.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::vehicle::VehicleParams;

/// Pipeline settings. No randomness is involved anywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub wheelbase_m: f64,
    pub delta_max_deg: f64,
    pub ddelta_max_deg_s: f64,
    pub v_ref_kmh: f64,
    pub ds_m: f64,
    pub operating_width_m: f64,
    /// Dubins radius; `None` means the minimum turning radius.
    pub r_dubins_m: Option<f64>,
    pub theta_edge_deg: f64,
    pub raster_cell_m: f64,
    pub corner_cut_iterations: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            wheelbase_m: 3.0,
            delta_max_deg: 31.0,
            ddelta_max_deg_s: 15.0,
            v_ref_kmh: 5.0,
            ds_m: 1.0,
            operating_width_m: 20.0,
            r_dubins_m: None,
            theta_edge_deg: 20.0,
            raster_cell_m: 0.1,
            corner_cut_iterations: 2,
        }
    }
}

/// Keys accepted by [`RunConfig::set`], in file order.
pub const CONFIG_KEYS: [&str; 10] = [
    "wheelbase_m",
    "delta_max_deg",
    "ddelta_max_deg_s",
    "v_ref_kmh",
    "ds_m",
    "operating_width_m",
    "r_dubins_m",
    "theta_edge_deg",
    "raster_cell_m",
    "corner_cut_iterations",
];

fn number(key: &str, value: &str) -> Result<f64> {
    value
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Input(format!("{key}: not a number: {value:?}")))
}

impl RunConfig {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "wheelbase_m" => self.wheelbase_m = number(key, value)?,
            "delta_max_deg" => self.delta_max_deg = number(key, value)?,
            "ddelta_max_deg_s" => self.ddelta_max_deg_s = number(key, value)?,
            "v_ref_kmh" => self.v_ref_kmh = number(key, value)?,
            "ds_m" => self.ds_m = number(key, value)?,
            "operating_width_m" => self.operating_width_m = number(key, value)?,
            "r_dubins_m" => {
                self.r_dubins_m = match value.trim() {
                    "" | "auto" => None,
                    v => Some(number(key, v)?),
                }
            }
            "theta_edge_deg" => self.theta_edge_deg = number(key, value)?,
            "raster_cell_m" => self.raster_cell_m = number(key, value)?,
            "corner_cut_iterations" => {
                self.corner_cut_iterations = value
                    .trim()
                    .parse()
                    .map_err(|_| Error::Input(format!("{key}: not a count: {value:?}")))?
            }
            _ => return Err(Error::Input(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines over the current values. Blank lines and
    /// `#` comments are ignored.
    pub fn apply_str(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Input(format!("config line {}: expected key = value", i + 1)))?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::default();
        cfg.apply_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("wheelbase_m", self.wheelbase_m),
            ("delta_max_deg", self.delta_max_deg),
            ("ddelta_max_deg_s", self.ddelta_max_deg_s),
            ("v_ref_kmh", self.v_ref_kmh),
            ("ds_m", self.ds_m),
            ("operating_width_m", self.operating_width_m),
            ("theta_edge_deg", self.theta_edge_deg),
            ("raster_cell_m", self.raster_cell_m),
        ];
        for (k, v) in positive.into_iter().chain(self.r_dubins_m.map(|r| ("r_dubins_m", r))) {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Input(format!("{k} must be positive, got {v}")));
            }
        }
        if self.delta_max_deg >= 90.0 {
            return Err(Error::Input("delta_max_deg must be below 90".into()));
        }
        Ok(())
    }

    /// Vehicle limits in radians and metres per second.
    pub fn vehicle_params(&self) -> Result<VehicleParams> {
        self.validate()?;
        VehicleParams::symmetric(
            self.wheelbase_m,
            self.delta_max_deg.to_radians(),
            self.ddelta_max_deg_s.to_radians(),
            self.v_ref_kmh / 3.6,
        )
    }

    /// Dubins radius in metres.
    pub fn r_dubins(&self) -> f64 {
        self.r_dubins_m
            .unwrap_or_else(|| self.wheelbase_m / self.delta_max_deg.to_radians().tan())
    }

    /// Edge threshold per vertex at spacing `ds_m`, in radians.
    pub fn turn_threshold(&self) -> f64 {
        self.theta_edge_deg.to_radians() * self.ds_m
    }

    /// The configuration in the form read by [`RunConfig::apply_str`].
    pub fn to_kv_string(&self) -> String {
        let mut out = String::new();
        for key in CONFIG_KEYS {
            let value = match key {
                "wheelbase_m" => self.wheelbase_m.to_string(),
                "delta_max_deg" => self.delta_max_deg.to_string(),
                "ddelta_max_deg_s" => self.ddelta_max_deg_s.to_string(),
                "v_ref_kmh" => self.v_ref_kmh.to_string(),
                "ds_m" => self.ds_m.to_string(),
                "operating_width_m" => self.operating_width_m.to_string(),
                "r_dubins_m" => self.r_dubins_m.map_or_else(|| "auto".into(), |r| r.to_string()),
                "theta_edge_deg" => self.theta_edge_deg.to_string(),
                "raster_cell_m" => self.raster_cell_m.to_string(),
                _ => self.corner_cut_iterations.to_string(),
            };
            let _ = writeln!(out, "{key} = {value}");
        }
        out
    }
}
