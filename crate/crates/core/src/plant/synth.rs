//! Synthetic component maps.
//!
//! Real engine/motor maps for this vehicle class are proprietary; these
//! physically plausible stand-ins keep the plant fully reproducible. The
//! engine map follows a Willans-line model (fuel power = mechanical power /
//! indicated efficiency + speed-dependent friction) shaped to a best-
//! efficiency island of roughly 36-37% near mid speed and high torque, with a
//! nonzero idle burn at zero torque. Motor maps peak at 0.95 and fall off
//! quadratically in speed and torque, floored at 0.80.

use super::map::EfficiencyMap;
use super::mech_power_w;

pub const ENGINE_IDLE_RPM: f64 = 800.0;

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Willans-line fuel rate in g/s at an engine operating point.
fn engine_fuel_rate(n_rpm: f64, t_nm: f64, h_f_kj_per_g: f64) -> f64 {
    let dn = (n_rpm - 2600.0) / 2400.0;
    let dt = (t_nm - 115.0) / 125.0;
    let indicated_eff = 0.40 * (1.0 - 0.20 * dn * dn) * (1.0 - 0.10 * dt * dt);
    let friction_kw = 2.0 + 1.2 * (n_rpm / 1000.0).powf(1.5);
    let mech_kw = mech_power_w(n_rpm, t_nm) / 1000.0;
    (mech_kw / indicated_eff + friction_kw) / h_f_kj_per_g
}

pub fn default_engine_map(h_f_kj_per_g: f64) -> EfficiencyMap {
    let speeds = grid(ENGINE_IDLE_RPM, 5000.0, 15);
    let torques = grid(0.0, 155.0, 11);
    let values = torques
        .iter()
        .map(|&t| speeds.iter().map(|&n| engine_fuel_rate(n, t, h_f_kj_per_g)).collect())
        .collect();
    EfficiencyMap::new(speeds, torques, values).expect("synthetic engine map is well formed")
}

fn motor_eff(n_rpm: f64, t_nm: f64, n0: f64, n_scale: f64, t0: f64, t_scale: f64) -> f64 {
    let dn = (n_rpm - n0) / n_scale;
    let dt = (t_nm.abs() - t0) / t_scale;
    (0.95 - 0.10 * dn * dn - 0.08 * dt * dt).clamp(0.80, 0.95)
}

/// MG1 (engine-coupled generator): torque grid covers generating load only.
pub fn default_mg1_map() -> EfficiencyMap {
    let speeds = grid(0.0, 6000.0, 13);
    let torques = grid(0.0, 120.0, 9);
    let values = torques
        .iter()
        .map(|&t| speeds.iter().map(|&n| motor_eff(n, t, 2500.0, 3000.0, 65.0, 80.0)).collect())
        .collect();
    EfficiencyMap::new(speeds, torques, values).expect("synthetic MG1 map is well formed")
}

/// MG2 (traction motor): symmetric torque grid, negative side is regeneration.
pub fn default_mg2_map() -> EfficiencyMap {
    let speeds = grid(0.0, 10_000.0, 11);
    let torques = grid(-280.0, 280.0, 15);
    let values = torques
        .iter()
        .map(|&t| speeds.iter().map(|&n| motor_eff(n, t, 4000.0, 5000.0, 140.0, 180.0)).collect())
        .collect();
    EfficiencyMap::new(speeds, torques, values).expect("synthetic MG2 map is well formed")
}
