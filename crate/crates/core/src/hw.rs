//! Device description and physical constants.
//!
//! All lengths are micrometres and all durations microseconds, except the
//! per-cycle initialization latency which is kept in milliseconds. Config
//! files may use other units; they are normalized when loaded.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Environment variable that may point at a default hardware config file.
pub const HW_ENV_VAR: &str = "MULTIQ_HW";

#[derive(Debug, Error)]
pub enum HwError {
    #[error("cannot read hardware config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("hardware config line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid hardware field `{field}`: {reason}")]
    Validation { field: &'static str, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardwareConfig {
    pub width_um: f64,
    pub height_um: f64,
    pub storage_rows: usize,
    pub storage_spacing_um: f64,
    pub entanglement_site_spacing_um: f64,
    pub pair_gap_um: f64,
    pub blockade_radius_um: f64,
    pub zone_separation_um: f64,
    pub n_aods: usize,
    pub fidelity_1q: f64,
    pub fidelity_2q: f64,
    pub fidelity_transfer: f64,
    pub t2_us: f64,
    pub t_transfer_us: f64,
    pub t_1q_us: f64,
    pub t_2q_us: f64,
    pub move_speed_um_per_us: f64,
    pub move_accel_um_per_us2: f64,
    pub t_init_ms: f64,
    pub aod_min_separation_um: f64,
}

impl Default for HardwareConfig {
    fn default() -> Self {
        default_hardware()
    }
}

/// The reference device: 210 x 155 um, two storage rows and an
/// 82 ms initialization cycle.
pub fn default_hardware() -> HardwareConfig {
    HardwareConfig {
        width_um: 210.0,
        height_um: 155.0,
        storage_rows: 2,
        storage_spacing_um: 3.0,
        entanglement_site_spacing_um: 10.0,
        pair_gap_um: 2.0,
        blockade_radius_um: 3.0,
        zone_separation_um: 20.0,
        n_aods: 1,
        fidelity_1q: 0.9991,
        fidelity_2q: 0.995,
        fidelity_transfer: 0.999,
        t2_us: 1.5e6,
        t_transfer_us: 17.0,
        t_1q_us: 52.0,
        t_2q_us: 0.36,
        move_speed_um_per_us: 0.55,
        // 2750 m/s^2 = 2750e6 um / 1e12 us^2
        move_accel_um_per_us2: 2.75e-3,
        t_init_ms: 82.0,
        aod_min_separation_um: 2.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dim {
    Length,
    Time,
    TimeMs,
    Speed,
    Accel,
    Probability,
    Count,
}

struct FieldSpec {
    name: &'static str,
    dim: Dim,
}

const FIELDS: &[FieldSpec] = &[
    FieldSpec { name: "width_um", dim: Dim::Length },
    FieldSpec { name: "height_um", dim: Dim::Length },
    FieldSpec { name: "storage_rows", dim: Dim::Count },
    FieldSpec { name: "storage_spacing_um", dim: Dim::Length },
    FieldSpec { name: "entanglement_site_spacing_um", dim: Dim::Length },
    FieldSpec { name: "pair_gap_um", dim: Dim::Length },
    FieldSpec { name: "blockade_radius_um", dim: Dim::Length },
    FieldSpec { name: "zone_separation_um", dim: Dim::Length },
    FieldSpec { name: "n_aods", dim: Dim::Count },
    FieldSpec { name: "fidelity_1q", dim: Dim::Probability },
    FieldSpec { name: "fidelity_2q", dim: Dim::Probability },
    FieldSpec { name: "fidelity_transfer", dim: Dim::Probability },
    FieldSpec { name: "t2_us", dim: Dim::Time },
    FieldSpec { name: "t_transfer_us", dim: Dim::Time },
    FieldSpec { name: "t_1q_us", dim: Dim::Time },
    FieldSpec { name: "t_2q_us", dim: Dim::Time },
    FieldSpec { name: "move_speed_um_per_us", dim: Dim::Speed },
    FieldSpec { name: "move_accel_um_per_us2", dim: Dim::Accel },
    FieldSpec { name: "t_init_ms", dim: Dim::TimeMs },
    FieldSpec { name: "aod_min_separation_um", dim: Dim::Length },
];

/// Scale factor from `unit` into the canonical unit of `dim`, or `None` when
/// the unit does not belong to that dimension.
fn unit_factor(dim: Dim, unit: &str) -> Option<f64> {
    match (dim, unit) {
        (Dim::Length, "um") => Some(1.0),
        (Dim::Length, "nm") => Some(1e-3),
        (Dim::Length, "mm") => Some(1e3),
        (Dim::Time, "us") => Some(1.0),
        (Dim::Time, "ns") => Some(1e-3),
        (Dim::Time, "ms") => Some(1e3),
        (Dim::Time, "s") => Some(1e6),
        (Dim::TimeMs, "ms") => Some(1.0),
        (Dim::TimeMs, "us") => Some(1e-3),
        (Dim::TimeMs, "s") => Some(1e3),
        (Dim::Speed, "um/us") => Some(1.0),
        (Dim::Speed, "m/s") => Some(1.0),
        (Dim::Accel, "um/us^2") => Some(1.0),
        (Dim::Accel, "m/s^2") => Some(1e-6),
        _ => None,
    }
}

fn canonical_unit(dim: Dim) -> Option<&'static str> {
    match dim {
        Dim::Length => Some("um"),
        Dim::Time => Some("us"),
        Dim::TimeMs => Some("ms"),
        Dim::Speed => Some("um/us"),
        Dim::Accel => Some("um/us^2"),
        Dim::Probability | Dim::Count => None,
    }
}

impl HardwareConfig {
    fn set(&mut self, name: &str, value: f64) {
        match name {
            "width_um" => self.width_um = value,
            "height_um" => self.height_um = value,
            "storage_rows" => self.storage_rows = value as usize,
            "storage_spacing_um" => self.storage_spacing_um = value,
            "entanglement_site_spacing_um" => self.entanglement_site_spacing_um = value,
            "pair_gap_um" => self.pair_gap_um = value,
            "blockade_radius_um" => self.blockade_radius_um = value,
            "zone_separation_um" => self.zone_separation_um = value,
            "n_aods" => self.n_aods = value as usize,
            "fidelity_1q" => self.fidelity_1q = value,
            "fidelity_2q" => self.fidelity_2q = value,
            "fidelity_transfer" => self.fidelity_transfer = value,
            "t2_us" => self.t2_us = value,
            "t_transfer_us" => self.t_transfer_us = value,
            "t_1q_us" => self.t_1q_us = value,
            "t_2q_us" => self.t_2q_us = value,
            "move_speed_um_per_us" => self.move_speed_um_per_us = value,
            "move_accel_um_per_us2" => self.move_accel_um_per_us2 = value,
            "t_init_ms" => self.t_init_ms = value,
            "aod_min_separation_um" => self.aod_min_separation_um = value,
            _ => unreachable!("unknown field {name}"),
        }
    }

    fn get(&self, name: &str) -> f64 {
        match name {
            "width_um" => self.width_um,
            "height_um" => self.height_um,
            "storage_rows" => self.storage_rows as f64,
            "storage_spacing_um" => self.storage_spacing_um,
            "entanglement_site_spacing_um" => self.entanglement_site_spacing_um,
            "pair_gap_um" => self.pair_gap_um,
            "blockade_radius_um" => self.blockade_radius_um,
            "zone_separation_um" => self.zone_separation_um,
            "n_aods" => self.n_aods as f64,
            "fidelity_1q" => self.fidelity_1q,
            "fidelity_2q" => self.fidelity_2q,
            "fidelity_transfer" => self.fidelity_transfer,
            "t2_us" => self.t2_us,
            "t_transfer_us" => self.t_transfer_us,
            "t_1q_us" => self.t_1q_us,
            "t_2q_us" => self.t_2q_us,
            "move_speed_um_per_us" => self.move_speed_um_per_us,
            "move_accel_um_per_us2" => self.move_accel_um_per_us2,
            "t_init_ms" => self.t_init_ms,
            "aod_min_separation_um" => self.aod_min_separation_um,
            _ => unreachable!("unknown field {name}"),
        }
    }

    /// Checks every type invariant, naming the first offending field.
    pub fn validate(&self) -> Result<(), HwError> {
        let bad = |field: &'static str, reason: String| Err(HwError::Validation { field, reason });
        for spec in FIELDS {
            let v = self.get(spec.name);
            if !v.is_finite() {
                return bad(spec.name, format!("{v} is not finite"));
            }
            match spec.dim {
                Dim::Probability if !(v > 0.0 && v <= 1.0) => {
                    return bad(spec.name, format!("{v} is outside (0, 1]"));
                }
                Dim::Count | Dim::Probability => {}
                _ if v <= 0.0 => return bad(spec.name, format!("{v} must be positive")),
                _ => {}
            }
        }
        if !(1..=2).contains(&self.storage_rows) {
            return bad("storage_rows", format!("{} is not 1 or 2", self.storage_rows));
        }
        if self.n_aods == 0 {
            return bad("n_aods", "at least one AOD is required".into());
        }
        if self.pair_gap_um >= self.blockade_radius_um {
            return bad(
                "pair_gap_um",
                format!("{} must be below the blockade radius {}", self.pair_gap_um, self.blockade_radius_um),
            );
        }
        if self.entanglement_site_spacing_um <= self.blockade_radius_um {
            return bad(
                "entanglement_site_spacing_um",
                format!(
                    "{} must exceed the blockade radius {}",
                    self.entanglement_site_spacing_um, self.blockade_radius_um
                ),
            );
        }
        Ok(())
    }

    /// Height of the entanglement zone: the pair plus a 1 um margin each side.
    pub fn entanglement_zone_height(&self) -> f64 {
        self.pair_gap_um + 2.0
    }

    /// y coordinate at which CZ partners park inside the entanglement zone.
    pub fn entanglement_row_y(&self) -> f64 {
        self.entanglement_zone_height() / 2.0
    }

    pub fn storage_zone_y(&self) -> f64 {
        self.entanglement_zone_height() + self.zone_separation_um
    }

    pub fn storage_zone_height(&self) -> f64 {
        (self.storage_rows as f64 - 1.0) * self.storage_spacing_um + 2.0
    }

    /// y coordinate of storage row `row` (0-based).
    pub fn storage_row_y(&self, row: usize) -> f64 {
        self.storage_zone_y() + 1.0 + row as f64 * self.storage_spacing_um
    }

    /// Whether a point lies inside the entanglement band shared by all tiles.
    pub fn in_entanglement_zone(&self, y: f64) -> bool {
        y >= -1e-6 && y <= self.entanglement_zone_height() + 1e-6
    }

    pub fn t_init_us(&self) -> f64 {
        self.t_init_ms * 1e3
    }

    /// Canonical `key = value unit` text; `parse_hardware(emit())` is exact.
    pub fn emit(&self) -> String {
        let mut out = String::new();
        for spec in FIELDS {
            let v = self.get(spec.name);
            match canonical_unit(spec.dim) {
                Some(unit) => writeln!(out, "{} = {} {}", spec.name, v, unit).unwrap(),
                None => writeln!(out, "{} = {}", spec.name, v).unwrap(),
            }
        }
        out
    }
}

/// Parses flat `key = value [unit]` text. Missing keys keep their defaults.
pub fn parse_hardware(text: &str) -> Result<HardwareConfig, HwError> {
    let mut cfg = default_hardware();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let perr = |message: String| HwError::Parse { line: line_no, message };
        let (key, rest) = line.split_once('=').ok_or_else(|| perr(format!("expected `key = value`, got `{line}`")))?;
        let key = key.trim();
        let spec = FIELDS.iter().find(|f| f.name == key).ok_or_else(|| perr(format!("unknown key `{key}`")))?;
        let mut parts = rest.split_whitespace();
        let num = parts.next().ok_or_else(|| perr(format!("missing value for `{key}`")))?;
        let unit = parts.next();
        if let Some(extra) = parts.next() {
            return Err(perr(format!("unexpected trailing `{extra}`")));
        }
        let value: f64 = num.parse().map_err(|_| perr(format!("`{num}` is not a number")))?;
        let factor = match (unit, spec.dim) {
            (None, _) => 1.0,
            (Some(u), Dim::Probability | Dim::Count) => {
                return Err(perr(format!("`{key}` takes no unit, got `{u}`")));
            }
            (Some(u), dim) => unit_factor(dim, u).ok_or_else(|| perr(format!("unit `{u}` does not fit `{key}`")))?,
        };
        if spec.dim == Dim::Count && value.fract() != 0.0 {
            return Err(perr(format!("`{key}` must be an integer")));
        }
        cfg.set(spec.name, value * factor);
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_hardware(path: impl AsRef<Path>) -> Result<HardwareConfig, HwError> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|source| HwError::Io { path: path.display().to_string(), source })?;
    parse_hardware(&text)
}

/// Explicit path first, then `MULTIQ_HW`, then the built-in device.
pub fn resolve_hardware(path: Option<&Path>) -> Result<HardwareConfig, HwError> {
    if let Some(p) = path {
        return load_hardware(p);
    }
    match std::env::var_os(HW_ENV_VAR) {
        Some(p) if !p.is_empty() => load_hardware(Path::new(&p)),
        _ => Ok(default_hardware()),
    }
}
