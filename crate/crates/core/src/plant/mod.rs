//! Multi-mode hybrid powertrain plant.
//!
//! Longitudinal-dynamics demand, series/parallel energy flow, component maps,
//! equivalent-circuit battery, and loss accounting, advanced with an explicit
//! first-order step at a fixed sample time (1 s by default).

mod actuation;
mod battery;
mod map;
mod params;
pub mod synth;

pub use actuation::{resolve_actuation, ActuatorCommand, DriveMode, SaturationFlags};
pub use battery::{battery_step, max_discharge_power_w, BatteryError, BatteryStep};
pub use map::{EfficiencyMap, MapError};
pub use params::{GearboxShortfallPath, ParamError, PlantParameters};

use std::fmt;

/// rad/s per rpm. The familiar "9550" engineering constant (kW from rpm·Nm)
/// is the rounded reciprocal of this factor divided by 1000; the exact value
/// is used so energy identities close to machine precision.
pub const RAD_PER_S_PER_RPM: f64 = std::f64::consts::PI / 30.0;

/// rpm per rad/s.
pub const RPM_PER_RAD_S: f64 = 30.0 / std::f64::consts::PI;

/// Mechanical shaft power in W from speed in rpm and torque in Nm.
pub fn mech_power_w(speed_rpm: f64, torque_nm: f64) -> f64 {
    speed_rpm * RAD_PER_S_PER_RPM * torque_nm
}

/// Longitudinal demand at one sample: rolling resistance + aerodynamic drag +
/// inertia (road slope fixed at zero).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Demand {
    pub force_n: f64,
    pub power_w: f64,
    pub torque_nm: f64,
}

pub fn compute_demand(v_mps: f64, a_mps2: f64, params: &PlantParameters) -> Demand {
    let force_n = params.mass_kg * params.gravity_m_per_s2 * params.rolling_coeff
        + 0.5 * params.air_density_kg_per_m3 * params.frontal_area_m2 * params.drag_coeff * v_mps * v_mps
        + params.mass_kg * a_mps2;
    Demand { force_n, power_w: force_n * v_mps, torque_nm: force_n * params.wheel_radius_m }
}

/// Engine/MG1 speed source while the clutch is open.
#[derive(Debug, Clone, PartialEq)]
pub enum EngineSpeedSchedule {
    /// Constant generator-set speed.
    Fixed(f64),
    /// Fuel-optimal speed per commanded torque, precomputed from the fuel map.
    BsfcOptimal { torque_grid: Vec<f64>, speeds_rpm: Vec<f64>, idle_rpm: f64 },
}

impl EngineSpeedSchedule {
    /// Builds the fuel-optimal schedule: for each torque node the grid speed
    /// minimizing fuel per unit mechanical energy; idle speed at zero torque.
    pub fn bsfc_optimal(engine_map: &EfficiencyMap) -> Self {
        let idle_rpm = engine_map.speed_range().0;
        let mut torque_grid = Vec::new();
        let mut speeds_rpm = Vec::new();
        for &t in engine_map.torque_grid() {
            if t <= 0.0 {
                continue;
            }
            let mut best = (idle_rpm, f64::INFINITY);
            for &n in engine_map.speed_grid() {
                let mech_kw = mech_power_w(n, t) / 1000.0;
                if mech_kw <= 0.0 {
                    continue;
                }
                let specific = engine_map.lookup(n, t) / mech_kw;
                if specific < best.1 {
                    best = (n, specific);
                }
            }
            torque_grid.push(t);
            speeds_rpm.push(best.0);
        }
        EngineSpeedSchedule::BsfcOptimal { torque_grid, speeds_rpm, idle_rpm }
    }

    pub fn speed_for_torque(&self, torque_nm: f64) -> f64 {
        match self {
            EngineSpeedSchedule::Fixed(rpm) => *rpm,
            EngineSpeedSchedule::BsfcOptimal { torque_grid, speeds_rpm, idle_rpm } => {
                if torque_nm <= 0.0 || torque_grid.is_empty() {
                    return *idle_rpm;
                }
                if torque_nm <= torque_grid[0] {
                    // blend from idle up to the first optimal point
                    let f = torque_nm / torque_grid[0];
                    return idle_rpm + (speeds_rpm[0] - idle_rpm) * f;
                }
                let last = torque_grid.len() - 1;
                if torque_nm >= torque_grid[last] {
                    return speeds_rpm[last];
                }
                let i = torque_grid.iter().position(|&t| t > torque_nm).unwrap() - 1;
                let f = (torque_nm - torque_grid[i]) / (torque_grid[i + 1] - torque_grid[i]);
                speeds_rpm[i] + (speeds_rpm[i + 1] - speeds_rpm[i]) * f
            }
        }
    }
}

/// Component speeds, torques, powers, and accumulators after a plant tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowertrainState {
    pub soc: f64,
    pub fuel_used_g: f64,
    pub mode: DriveMode,
    pub n_eng_rpm: f64,
    pub n_mot1_rpm: f64,
    pub n_mot2_rpm: f64,
    pub t_eng_nm: f64,
    pub t_mot1_nm: f64,
    pub t_mot2_nm: f64,
    /// Battery terminal power, W (discharge positive).
    pub p_batt_w: f64,
    /// MG1 electrical output (generated), W.
    pub p_mot1_w: f64,
    /// MG2 electrical input, W (negative while regenerating).
    pub p_mot2_w: f64,
    pub p_loss_w: f64,
    pub loss_eng_w: f64,
    pub loss_batt_w: f64,
    pub i_batt_a: f64,
    pub fuel_rate_g_per_s: f64,
    pub saturation: SaturationFlags,
}

#[derive(Debug)]
pub enum PlantError {
    Map(MapError),
    Param(ParamError),
    /// A motor map value outside (0, 1].
    BadEfficiency { map: &'static str, value: f64 },
    /// A fuel-rate map value below zero.
    NegativeFuelRate { value: f64 },
}

impl fmt::Display for PlantError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlantError::Map(e) => write!(f, "{e}"),
            PlantError::Param(e) => write!(f, "{e}"),
            PlantError::BadEfficiency { map, value } => {
                write!(f, "{map} map efficiency {value} outside (0, 1]")
            }
            PlantError::NegativeFuelRate { value } => write!(f, "fuel rate {value} below zero"),
        }
    }
}

impl std::error::Error for PlantError {}

impl From<MapError> for PlantError {
    fn from(e: MapError) -> Self {
        PlantError::Map(e)
    }
}

impl From<ParamError> for PlantError {
    fn from(e: ParamError) -> Self {
        PlantError::Param(e)
    }
}

/// Errors from one plant tick.
#[derive(Debug)]
pub enum StepError {
    /// Battery discharge power above the circuit maximum.
    PowerInfeasible { p_batt_w: f64, p_max_w: f64 },
    /// SoC left the configured window; carries the fully accounted state so
    /// the caller can close out the episode.
    SocOutOfBounds { state: Box<PowertrainState> },
}

impl fmt::Display for StepError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepError::PowerInfeasible { p_batt_w, p_max_w } => {
                write!(f, "battery power {p_batt_w} W exceeds circuit maximum {p_max_w} W")
            }
            StepError::SocOutOfBounds { state } => {
                write!(f, "SoC {} left the configured window", state.soc)
            }
        }
    }
}

impl std::error::Error for StepError {}

/// Parameters, maps, and the series-mode speed schedule, bundled.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantModel {
    pub params: PlantParameters,
    pub engine_map: EfficiencyMap,
    pub mg1_map: EfficiencyMap,
    pub mg2_map: EfficiencyMap,
    pub schedule: EngineSpeedSchedule,
}

impl PlantModel {
    pub fn new(
        params: PlantParameters,
        engine_map: EfficiencyMap,
        mg1_map: EfficiencyMap,
        mg2_map: EfficiencyMap,
        schedule: EngineSpeedSchedule,
    ) -> Result<Self, PlantError> {
        params.validate()?;
        for ti in 0..engine_map.torque_grid().len() {
            for si in 0..engine_map.speed_grid().len() {
                let v = engine_map.value_at(ti, si);
                if v < 0.0 {
                    return Err(PlantError::NegativeFuelRate { value: v });
                }
            }
        }
        for (name, m) in [("MG1", &mg1_map), ("MG2", &mg2_map)] {
            for ti in 0..m.torque_grid().len() {
                for si in 0..m.speed_grid().len() {
                    let v = m.value_at(ti, si);
                    if !(v > 0.0 && v <= 1.0) {
                        return Err(PlantError::BadEfficiency { map: name, value: v });
                    }
                }
            }
        }
        Ok(Self { params, engine_map, mg1_map, mg2_map, schedule })
    }

    /// Plant with the synthetic default maps and the fuel-optimal schedule.
    pub fn with_default_maps(params: PlantParameters) -> Result<Self, PlantError> {
        let engine_map = synth::default_engine_map(params.fuel_heat_value_kj_per_g);
        let schedule = EngineSpeedSchedule::bsfc_optimal(&engine_map);
        Self::new(params, engine_map, synth::default_mg1_map(), synth::default_mg2_map(), schedule)
    }

    pub fn initial_state(&self, soc: f64) -> PowertrainState {
        PowertrainState {
            soc,
            fuel_used_g: 0.0,
            mode: DriveMode::Series,
            n_eng_rpm: 0.0,
            n_mot1_rpm: 0.0,
            n_mot2_rpm: 0.0,
            t_eng_nm: 0.0,
            t_mot1_nm: 0.0,
            t_mot2_nm: 0.0,
            p_batt_w: 0.0,
            p_mot1_w: 0.0,
            p_mot2_w: 0.0,
            p_loss_w: 0.0,
            loss_eng_w: 0.0,
            loss_batt_w: 0.0,
            i_batt_a: 0.0,
            fuel_rate_g_per_s: 0.0,
            saturation: SaturationFlags::default(),
        }
    }

    /// Advances the energy flow by one sample: component speeds from the
    /// driveline, motor electrical powers through their maps (motoring
    /// divides by efficiency, generating multiplies), fuel rate from the
    /// engine map, battery update from the power balance, and loss
    /// bookkeeping (engine loss = fuel power − mechanical power,
    /// battery loss = R·I²).
    pub fn step(
        &self,
        state: &PowertrainState,
        cmd: &ActuatorCommand,
        v_mps: f64,
    ) -> Result<PowertrainState, StepError> {
        let p = &self.params;
        let mut flags = cmd.saturation;

        let omega_wheel = v_mps / p.wheel_radius_m;
        let n_mot2 = omega_wheel * p.final_ratio_mg2 * RPM_PER_RAD_S;
        let n_eng = match cmd.mode {
            DriveMode::Parallel => {
                let raw = omega_wheel * p.gear_ratio_mg1 * RPM_PER_RAD_S;
                let (lo, hi) = self.engine_map.speed_range();
                let clamped = raw.clamp(lo, hi);
                if clamped != raw {
                    flags.engine_point_clamped = true;
                }
                clamped
            }
            DriveMode::Series => self.schedule.speed_for_torque(cmd.t_eng_nm),
        };
        let n_mot1 = n_eng;
        if self.engine_map.out_of_envelope(n_eng, cmd.t_eng_nm) {
            flags.engine_point_clamped = true;
        }

        let mech_eng_w = mech_power_w(n_eng, cmd.t_eng_nm);
        let mech_mot1_w = mech_power_w(n_mot1, cmd.t_mot1_nm);
        let p_mot1_w = mech_mot1_w * self.mg1_map.lookup(n_mot1, cmd.t_mot1_nm);
        let mech_mot2_w = mech_power_w(n_mot2, cmd.t_mot2_nm);
        let eta2 = self.mg2_map.lookup(n_mot2, cmd.t_mot2_nm);
        let p_mot2_w =
            if cmd.t_mot2_nm > 0.0 { mech_mot2_w / eta2 } else { mech_mot2_w * eta2 };
        let p_batt_w = p_mot2_w - p_mot1_w;

        let (batt, soc_violation) = match battery_step(p_batt_w, state.soc, p) {
            Ok(s) => (s, false),
            Err(BatteryError::SocOutOfBounds { step }) => (step, true),
            Err(BatteryError::PowerInfeasible { p_batt_w, p_max_w }) => {
                return Err(StepError::PowerInfeasible { p_batt_w, p_max_w })
            }
        };

        let fuel_rate = self.engine_map.lookup(n_eng, cmd.t_eng_nm);
        let loss_eng_w = fuel_rate * p.fuel_heat_value_kj_per_g * 1000.0 - mech_eng_w;
        let next = PowertrainState {
            soc: batt.soc_next,
            fuel_used_g: state.fuel_used_g + fuel_rate * p.dt_s,
            mode: cmd.mode,
            n_eng_rpm: n_eng,
            n_mot1_rpm: n_mot1,
            n_mot2_rpm: n_mot2,
            t_eng_nm: cmd.t_eng_nm,
            t_mot1_nm: cmd.t_mot1_nm,
            t_mot2_nm: cmd.t_mot2_nm,
            p_batt_w,
            p_mot1_w,
            p_mot2_w,
            p_loss_w: loss_eng_w + batt.loss_w,
            loss_eng_w,
            loss_batt_w: batt.loss_w,
            i_batt_a: batt.current_a,
            fuel_rate_g_per_s: fuel_rate,
            saturation: flags,
        };
        if soc_violation {
            Err(StepError::SocOutOfBounds { state: Box::new(next) })
        } else {
            Ok(next)
        }
    }
}
