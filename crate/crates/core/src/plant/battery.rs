//! Equivalent-circuit battery: constant OCV `U` in series with resistance `R`.
//!
//! Terminal power P = U·I − R·I² inverts to
//! I = (U − √(U² − 4·R·P)) / (2R); discharge is positive current and positive
//! power, charging is negative. SoC integrates the current over the nominal
//! capacity with a first-order fixed step.

use super::params::PlantParameters;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryStep {
    pub current_a: f64,
    pub soc_next: f64,
    pub loss_w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BatteryError {
    /// Requested discharge power above the circuit maximum U²/(4R).
    PowerInfeasible { p_batt_w: f64, p_max_w: f64 },
    /// The SoC update left the configured window. Carries the computed step
    /// so callers can account the final tick before terminating.
    SocOutOfBounds { step: BatteryStep },
}

impl fmt::Display for BatteryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BatteryError::PowerInfeasible { p_batt_w, p_max_w } => {
                write!(f, "battery power {p_batt_w} W exceeds circuit maximum {p_max_w} W")
            }
            BatteryError::SocOutOfBounds { step } => {
                write!(f, "SoC update {} left the configured window", step.soc_next)
            }
        }
    }
}

impl std::error::Error for BatteryError {}

/// Maximum deliverable terminal power for the configured circuit.
pub fn max_discharge_power_w(params: &PlantParameters) -> f64 {
    params.batt_ocv_v * params.batt_ocv_v / (4.0 * params.batt_resistance_ohm)
}

/// One battery tick: current from the closed form, SoC integration, I²R loss.
pub fn battery_step(
    p_batt_w: f64,
    soc: f64,
    params: &PlantParameters,
) -> Result<BatteryStep, BatteryError> {
    let u = params.batt_ocv_v;
    let r = params.batt_resistance_ohm;
    let disc = u * u - 4.0 * r * p_batt_w;
    if disc < 0.0 {
        return Err(BatteryError::PowerInfeasible {
            p_batt_w,
            p_max_w: max_discharge_power_w(params),
        });
    }
    let current_a = (u - disc.sqrt()) / (2.0 * r);
    let soc_next = soc - current_a * params.dt_s / (params.batt_capacity_ah * 3600.0);
    let loss_w = r * current_a * current_a;
    let step = BatteryStep { current_a, soc_next, loss_w };
    if soc_next < params.soc_min || soc_next > params.soc_max {
        return Err(BatteryError::SocOutOfBounds { step });
    }
    Ok(step)
}
