//! Comparison metrics: SoC sustaining error, fuel saving rate, and the
//! fuel-economy unit conversion.

use std::fmt;

/// Gasoline density used for the L/100 km conversion; configurable.
pub const DEFAULT_FUEL_DENSITY_G_PER_L: f64 = 745.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricError {
    ZeroInitialSoc,
    ZeroBaseline,
}

impl fmt::Display for MetricError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricError::ZeroInitialSoc => write!(f, "initial SoC must be positive"),
            MetricError::ZeroBaseline => write!(f, "baseline fuel must be positive"),
        }
    }
}

impl std::error::Error for MetricError {}

/// SoC sustaining error: |end − initial| / initial × 100%.
pub fn soc_error_pct(soc_initial: f64, soc_end: f64) -> Result<f64, MetricError> {
    if !(soc_initial > 0.0) {
        return Err(MetricError::ZeroInitialSoc);
    }
    Ok((soc_end - soc_initial).abs() / soc_initial * 100.0)
}

/// Signed fuel saving of `candidate` against `baseline`:
/// (baseline − candidate) / baseline × 100%. Negative means the candidate
/// used more fuel than the baseline.
pub fn fuel_saving_pct(baseline_fuel: f64, candidate_fuel: f64) -> Result<f64, MetricError> {
    if !(baseline_fuel > 0.0) {
        return Err(MetricError::ZeroBaseline);
    }
    Ok((baseline_fuel - candidate_fuel) / baseline_fuel * 100.0)
}

/// Fuel economy in L/100 km from grams burned, meters driven, and fuel
/// density. `None` when no distance was covered.
pub fn fuel_economy_l_per_100km(
    fuel_g: f64,
    distance_m: f64,
    density_g_per_l: f64,
) -> Option<f64> {
    if distance_m <= 0.0 {
        return None;
    }
    let liters = fuel_g / density_g_per_l;
    let km = distance_m / 1000.0;
    Some(liters / km * 100.0)
}
