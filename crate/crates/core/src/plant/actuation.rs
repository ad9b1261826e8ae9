//! Action-to-actuator mapping and series/parallel mode arbitration.
//!
//! The controller commands the MG1 generator load fraction `u_mot1 ∈ [0,1]`
//! and the MG2 torque fraction `u_mot2 ∈ [−1,1]`. MG2 serves traction up to
//! its commanded capability; any remaining wheel torque demand is covered by
//! the engine through the gearbox (`t_gb`), which engages the clutch and
//! switches the driveline to parallel mode. Engine torque is the generator
//! load plus the gearbox torque, expressed as the derived command `u_eng`.

use super::params::{GearboxShortfallPath, PlantParameters};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DriveMode {
    /// Clutch open: MG2 alone drives the wheels, the engine only spins MG1.
    Series,
    /// Clutch closed: engine torque reaches the wheels alongside MG2.
    Parallel,
}

impl DriveMode {
    pub fn as_str(self) -> &'static str {
        match self {
            DriveMode::Series => "series",
            DriveMode::Parallel => "parallel",
        }
    }
}

/// Saturation and clamping events; silent but reported.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SaturationFlags {
    /// A commanded action component was outside its range and was clamped.
    pub action_clamped: bool,
    /// The derived engine command exceeded 1 and was clamped (traction
    /// shortfall partially unmet).
    pub u_eng_clamped: bool,
    /// Regeneration was limited by MG2 torque or the charge-power cap.
    pub regen_limited: bool,
    /// Engine operating point clamped to the map envelope.
    pub engine_point_clamped: bool,
}

impl SaturationFlags {
    pub fn any(&self) -> bool {
        self.action_clamped || self.u_eng_clamped || self.regen_limited || self.engine_point_clamped
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActuatorCommand {
    pub u_mot1: f64,
    pub u_mot2: f64,
    /// Derived engine command (u_mot1·T_mot1max + t_gb) / T_eng_max, clamped.
    pub u_eng: f64,
    /// Engine-shaft torque devoted to traction shortfall, Nm (>= 0).
    pub t_gb_nm: f64,
    /// Effective MG2 shaft torque, Nm (negative while regenerating).
    pub t_mot2_nm: f64,
    /// MG1 generator load torque on the engine shaft, Nm.
    pub t_mot1_nm: f64,
    /// Engine torque after the u_eng clamp, Nm.
    pub t_eng_nm: f64,
    /// Friction brake torque absorbed at the wheels, Nm (>= 0).
    pub brake_nm: f64,
    pub mode: DriveMode,
    pub saturation: SaturationFlags,
}

/// Splits the torque demand between MG2, the engine path, and the brakes.
///
/// At standstill no traction torque is routed (the brakes hold the vehicle);
/// negative demand goes to MG2 regeneration up to its torque and charge-power
/// limits with friction brakes absorbing the remainder.
pub fn resolve_actuation(
    u_mot1: f64,
    u_mot2: f64,
    t_dem_nm: f64,
    v_mps: f64,
    params: &PlantParameters,
) -> ActuatorCommand {
    let mut flags = SaturationFlags::default();
    let u1 = u_mot1.clamp(0.0, 1.0);
    let u2 = u_mot2.clamp(-1.0, 1.0);
    if u1 != u_mot1 || u2 != u_mot2 {
        flags.action_clamped = true;
    }

    let i1 = params.gear_ratio_mg1;
    let i2 = params.final_ratio_mg2;
    let t2_max = params.t_mot2_max_nm;

    let (t_mot2, t_gb, brake, mode) = if v_mps <= 0.0 {
        (0.0, 0.0, 0.0, DriveMode::Series)
    } else if t_dem_nm >= 0.0 {
        let commanded = u2 * t2_max;
        let wheel_shortfall = t_dem_nm - i2 * commanded;
        if wheel_shortfall > 0.0 {
            let t_gb = match params.shortfall_path {
                GearboxShortfallPath::Mg1Ratio => wheel_shortfall / i1,
                GearboxShortfallPath::Mg2ShaftDirect => wheel_shortfall / i2,
            };
            (commanded, t_gb, 0.0, DriveMode::Parallel)
        } else {
            // MG2 meets the demand; it is held to the demand torque so the
            // prescribed velocity trace is followed exactly.
            (t_dem_nm / i2, 0.0, 0.0, DriveMode::Series)
        }
    } else {
        let mut t_regen = (t_dem_nm / i2).max(-t2_max);
        if t_regen > t_dem_nm / i2 {
            flags.regen_limited = true;
        }
        // cap regeneration mechanical power at the charge limit
        let omega_mot2 = v_mps / params.wheel_radius_m * i2;
        let mech_w = t_regen * omega_mot2; // negative
        if -mech_w > params.batt_charge_power_max_w {
            t_regen = -params.batt_charge_power_max_w / omega_mot2;
            flags.regen_limited = true;
        }
        let brake = (t_dem_nm - i2 * t_regen).abs();
        (t_regen, 0.0, brake, DriveMode::Series)
    };

    let t_mot1 = u1 * params.t_mot1_max_nm;
    let u_eng_raw = (t_mot1 + t_gb) / params.t_eng_max_nm;
    let u_eng = u_eng_raw.clamp(0.0, 1.0);
    if u_eng != u_eng_raw {
        flags.u_eng_clamped = true;
    }
    let t_eng = u_eng * params.t_eng_max_nm;

    ActuatorCommand {
        u_mot1: u1,
        u_mot2: u2,
        u_eng,
        t_gb_nm: t_gb,
        t_mot2_nm: t_mot2,
        t_mot1_nm: t_mot1,
        t_eng_nm: t_eng,
        brake_nm: brake,
        mode,
        saturation: flags,
    }
}
