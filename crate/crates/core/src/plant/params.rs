//! Vehicle, driveline, and battery constants.
//!
//! The published constants are the fuel heat value (43.5 kJ/g), battery
//! open-circuit voltage (350 V), internal resistance (0.15 Ω), and capacity
//! (54.3 Ah). Everything else (mass, drag, ratios, torque limits, SoC window)
//! is an implementer-chosen default, documented in the README parameter
//! ledger and fully configurable through the parameter file.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;

/// Ratio used to translate a traction shortfall at the wheel into engine-shaft
/// gearbox torque. The driveline geometry does not pin this down; both
/// readings are supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GearboxShortfallPath {
    /// Wheel shortfall divided by the MG1/engine path ratio `i_1`. This closes
    /// the parallel-mode torque balance exactly: wheel torque =
    /// i_1·(T_eng − T_mot1) + i_2·T_mot2.
    #[default]
    Mg1Ratio,
    /// Shortfall expressed at the MG2 shaft (wheel shortfall / i_2) taken
    /// directly as engine-shaft torque.
    Mg2ShaftDirect,
}

/// All plant constants. Field names carry their units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantParameters {
    pub mass_kg: f64,
    pub gravity_m_per_s2: f64,
    pub rolling_coeff: f64,
    pub air_density_kg_per_m3: f64,
    pub frontal_area_m2: f64,
    pub drag_coeff: f64,
    pub wheel_radius_m: f64,
    /// Transmission ratio between the engine/MG1 shaft and the wheels (i_1).
    pub gear_ratio_mg1: f64,
    /// Final ratio between the MG2 shaft and the wheels (i_2).
    pub final_ratio_mg2: f64,
    pub t_mot1_max_nm: f64,
    pub t_mot2_max_nm: f64,
    pub t_eng_max_nm: f64,
    pub fuel_heat_value_kj_per_g: f64,
    pub batt_ocv_v: f64,
    pub batt_resistance_ohm: f64,
    pub batt_capacity_ah: f64,
    pub soc_min: f64,
    pub soc_max: f64,
    pub dt_s: f64,
    /// Mechanical regeneration power cap; friction brakes absorb the rest.
    pub batt_charge_power_max_w: f64,
    #[serde(default)]
    pub shortfall_path: GearboxShortfallPath,
}

impl Default for PlantParameters {
    fn default() -> Self {
        Self {
            mass_kg: 1800.0,
            gravity_m_per_s2: 9.81,
            rolling_coeff: 0.012,
            air_density_kg_per_m3: 1.205,
            frontal_area_m2: 2.3,
            drag_coeff: 0.30,
            wheel_radius_m: 0.32,
            gear_ratio_mg1: 3.0,
            final_ratio_mg2: 8.0,
            t_mot1_max_nm: 120.0,
            t_mot2_max_nm: 280.0,
            t_eng_max_nm: 155.0,
            fuel_heat_value_kj_per_g: 43.5,
            batt_ocv_v: 350.0,
            batt_resistance_ohm: 0.15,
            batt_capacity_ah: 54.3,
            soc_min: 0.10,
            soc_max: 0.90,
            dt_s: 1.0,
            batt_charge_power_max_w: 60_000.0,
            shortfall_path: GearboxShortfallPath::Mg1Ratio,
        }
    }
}

#[derive(Debug)]
pub enum ParamError {
    NonPositive { field: &'static str, value: f64 },
    SocBounds { soc_min: f64, soc_max: f64 },
    Io(std::io::Error),
    Parse(String),
}

impl fmt::Display for ParamError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamError::NonPositive { field, value } => {
                write!(f, "parameter `{field}` must be strictly positive, got {value}")
            }
            ParamError::SocBounds { soc_min, soc_max } => {
                write!(f, "SoC bounds must satisfy 0 <= soc_min < soc_max <= 1, got [{soc_min}, {soc_max}]")
            }
            ParamError::Io(e) => write!(f, "parameter file: {e}"),
            ParamError::Parse(e) => write!(f, "parameter file: {e}"),
        }
    }
}

impl std::error::Error for ParamError {}

impl PlantParameters {
    pub fn validate(&self) -> Result<(), ParamError> {
        let positives: [(&'static str, f64); 16] = [
            ("mass_kg", self.mass_kg),
            ("gravity_m_per_s2", self.gravity_m_per_s2),
            ("rolling_coeff", self.rolling_coeff),
            ("air_density_kg_per_m3", self.air_density_kg_per_m3),
            ("frontal_area_m2", self.frontal_area_m2),
            ("drag_coeff", self.drag_coeff),
            ("wheel_radius_m", self.wheel_radius_m),
            ("gear_ratio_mg1", self.gear_ratio_mg1),
            ("final_ratio_mg2", self.final_ratio_mg2),
            ("t_mot1_max_nm", self.t_mot1_max_nm),
            ("t_mot2_max_nm", self.t_mot2_max_nm),
            ("t_eng_max_nm", self.t_eng_max_nm),
            ("fuel_heat_value_kj_per_g", self.fuel_heat_value_kj_per_g),
            ("batt_ocv_v", self.batt_ocv_v),
            ("batt_resistance_ohm", self.batt_resistance_ohm),
            ("batt_capacity_ah", self.batt_capacity_ah),
        ];
        for (field, value) in positives {
            if !(value > 0.0) || !value.is_finite() {
                return Err(ParamError::NonPositive { field, value });
            }
        }
        if !(self.dt_s > 0.0) {
            return Err(ParamError::NonPositive { field: "dt_s", value: self.dt_s });
        }
        if !(self.batt_charge_power_max_w > 0.0) {
            return Err(ParamError::NonPositive {
                field: "batt_charge_power_max_w",
                value: self.batt_charge_power_max_w,
            });
        }
        if !(0.0 <= self.soc_min && self.soc_min < self.soc_max && self.soc_max <= 1.0) {
            return Err(ParamError::SocBounds { soc_min: self.soc_min, soc_max: self.soc_max });
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ParamError> {
        let text = std::fs::read_to_string(path).map_err(ParamError::Io)?;
        let params: PlantParameters =
            toml::from_str(&text).map_err(|e| ParamError::Parse(e.to_string()))?;
        params.validate()?;
        Ok(params)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("plant parameters serialize")
    }
}
