//! Episodic decision process over the plant and a drive cycle.
//!
//! Each 1 s tick maps an action (MG1 load fraction, MG2 torque fraction) to
//! demand → actuation → energy flow → battery, and returns the raw cost
//! signals (losses, SoC, fuel rate). Rewards are built downstream so the
//! same environment serves single-agent, multi-agent, and baseline
//! controllers. Episodes end when the cycle runs out or the SoC leaves its
//! window (configurable to clamp-and-continue instead).

use crate::cycles::DriveCycle;
use crate::metrics;
use crate::plant::{
    compute_demand, resolve_actuation, DriveMode, PlantModel, PowertrainState, SaturationFlags,
    StepError,
};
use std::fmt;

/// State vector of both learning systems: torque demand and SoC, in that
/// order. Networks consume normalized copies (demand scaled by a configured
/// maximum, SoC unchanged).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub t_dem_nm: f64,
    pub soc: f64,
}

/// Everything a non-learning controller may look at when choosing an action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlInput {
    pub t_dem_nm: f64,
    pub soc: f64,
    pub v_mps: f64,
    pub a_mps2: f64,
}

/// Raw cost signals from one tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub observation: Observation,
    pub p_loss_w: f64,
    pub loss_eng_w: f64,
    pub loss_batt_w: f64,
    pub soc: f64,
    pub fuel_rate_g_per_s: f64,
    pub p_batt_w: f64,
    pub mode: DriveMode,
    pub saturation: SaturationFlags,
    /// SoC left its window on this tick.
    pub soc_violation: bool,
    /// Battery discharge power exceeded the circuit maximum on this tick.
    pub power_infeasible: bool,
    pub done: bool,
}

/// End-of-episode aggregates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeMetrics {
    /// `None` for degenerate zero-distance episodes.
    pub fuel_l_per_100km: Option<f64>,
    pub fuel_used_g: f64,
    pub soc_initial: f64,
    pub soc_end: f64,
    pub distance_m: f64,
    pub cumulative_loss_j: f64,
    pub steps: usize,
    pub terminated_early: bool,
}

#[derive(Debug)]
pub enum EnvError {
    InvalidInitialSoc { soc: f64, soc_min: f64, soc_max: f64 },
    SteppedAfterDone,
    EpisodeNotFinished,
}

impl fmt::Display for EnvError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnvError::InvalidInitialSoc { soc, soc_min, soc_max } => {
                write!(f, "initial SoC {soc} outside ({soc_min}, {soc_max})")
            }
            EnvError::SteppedAfterDone => write!(f, "step() called on a finished episode"),
            EnvError::EpisodeNotFinished => write!(f, "finalize() called before the episode ended"),
        }
    }
}

impl std::error::Error for EnvError {}

/// What to do when the SoC window is violated mid-episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SocBoundPolicy {
    /// End the episode at the first violation (default).
    Terminate,
    /// Clamp SoC to the violated bound and keep going, flagging the tick.
    ClampAndContinue,
}

#[derive(Debug, Clone)]
pub struct EnvConfig {
    pub soc_bound_policy: SocBoundPolicy,
    /// Fuel density for the L/100 km conversion.
    pub fuel_density_g_per_l: f64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            soc_bound_policy: SocBoundPolicy::Terminate,
            fuel_density_g_per_l: metrics::DEFAULT_FUEL_DENSITY_G_PER_L,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EmsEnv {
    plant: PlantModel,
    config: EnvConfig,
    cycle: DriveCycle,
    cursor: usize,
    state: PowertrainState,
    soc_initial: f64,
    distance_m: f64,
    cumulative_loss_j: f64,
    steps: usize,
    done: bool,
    terminated_early: bool,
    seed: u64,
}

impl EmsEnv {
    /// A fresh environment positioned at t = 0 of the given cycle.
    pub fn new(
        plant: PlantModel,
        config: EnvConfig,
        cycle: DriveCycle,
        soc_initial: f64,
        seed: u64,
    ) -> Result<Self, EnvError> {
        let p = &plant.params;
        if !(soc_initial > p.soc_min && soc_initial < p.soc_max) {
            return Err(EnvError::InvalidInitialSoc {
                soc: soc_initial,
                soc_min: p.soc_min,
                soc_max: p.soc_max,
            });
        }
        let state = plant.initial_state(soc_initial);
        Ok(Self {
            plant,
            config,
            cycle,
            cursor: 0,
            state,
            soc_initial,
            distance_m: 0.0,
            cumulative_loss_j: 0.0,
            steps: 0,
            done: false,
            terminated_early: false,
            seed,
        })
    }

    /// Rewinds onto a (possibly different) cycle with a fresh plant state.
    pub fn reset(
        &mut self,
        cycle: DriveCycle,
        soc_initial: f64,
        seed: u64,
    ) -> Result<Observation, EnvError> {
        let p = &self.plant.params;
        if !(soc_initial > p.soc_min && soc_initial < p.soc_max) {
            return Err(EnvError::InvalidInitialSoc {
                soc: soc_initial,
                soc_min: p.soc_min,
                soc_max: p.soc_max,
            });
        }
        self.cycle = cycle;
        self.cursor = 0;
        self.state = self.plant.initial_state(soc_initial);
        self.soc_initial = soc_initial;
        self.distance_m = 0.0;
        self.cumulative_loss_j = 0.0;
        self.steps = 0;
        self.done = false;
        self.terminated_early = false;
        self.seed = seed;
        Ok(self.observation())
    }

    pub fn plant(&self) -> &PlantModel {
        &self.plant
    }

    pub fn cycle(&self) -> &DriveCycle {
        &self.cycle
    }

    pub fn time_s(&self) -> usize {
        self.cursor
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn soc(&self) -> f64 {
        self.state.soc
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn observation(&self) -> Observation {
        let v = self.cycle.velocity(self.cursor);
        let a = self.cycle.accel(self.cursor);
        let demand = compute_demand(v, a, &self.plant.params);
        Observation { t_dem_nm: demand.torque_nm, soc: self.state.soc }
    }

    pub fn control_input(&self) -> ControlInput {
        let obs = self.observation();
        ControlInput {
            t_dem_nm: obs.t_dem_nm,
            soc: obs.soc,
            v_mps: self.cycle.velocity(self.cursor),
            a_mps2: self.cycle.accel(self.cursor),
        }
    }

    /// Advances one 1 s tick with the commanded `(u_mot1, u_mot2)`.
    /// Out-of-range components are clamped and flagged.
    pub fn step(&mut self, action: [f64; 2]) -> Result<StepOutcome, EnvError> {
        if self.done {
            return Err(EnvError::SteppedAfterDone);
        }
        let p = self.plant.params.clone();
        let v = self.cycle.velocity(self.cursor);
        let a = self.cycle.accel(self.cursor);
        let demand = compute_demand(v, a, &p);
        let cmd = resolve_actuation(action[0], action[1], demand.torque_nm, v, &p);

        match self.plant.step(&self.state, &cmd, v) {
            Ok(next) => {
                self.advance(next, v);
                let cycle_done = self.cursor >= self.cycle.len() - 1;
                self.done = cycle_done;
                Ok(self.outcome(false, false))
            }
            Err(StepError::SocOutOfBounds { state }) => {
                let mut next = *state;
                match self.config.soc_bound_policy {
                    SocBoundPolicy::Terminate => {
                        self.advance(next, v);
                        self.done = true;
                        self.terminated_early = true;
                        Ok(self.outcome(true, false))
                    }
                    SocBoundPolicy::ClampAndContinue => {
                        next.soc = next.soc.clamp(p.soc_min, p.soc_max);
                        self.advance(next, v);
                        let cycle_done = self.cursor >= self.cycle.len() - 1;
                        self.done = cycle_done;
                        Ok(self.outcome(true, false))
                    }
                }
            }
            Err(StepError::PowerInfeasible { .. }) => {
                // the tick is aborted: no fuel, no motion, no SoC change
                self.done = true;
                self.terminated_early = true;
                Ok(self.outcome(false, true))
            }
        }
    }

    fn advance(&mut self, next: PowertrainState, v: f64) {
        let dt = self.plant.params.dt_s;
        self.cumulative_loss_j += next.p_loss_w * dt;
        self.distance_m += v * dt;
        self.state = next;
        self.cursor += 1;
        self.steps += 1;
    }

    fn outcome(&self, soc_violation: bool, power_infeasible: bool) -> StepOutcome {
        let observation = if self.cursor < self.cycle.len() {
            self.observation()
        } else {
            Observation { t_dem_nm: 0.0, soc: self.state.soc }
        };
        StepOutcome {
            observation,
            p_loss_w: self.state.p_loss_w,
            loss_eng_w: self.state.loss_eng_w,
            loss_batt_w: self.state.loss_batt_w,
            soc: self.state.soc,
            fuel_rate_g_per_s: self.state.fuel_rate_g_per_s,
            p_batt_w: self.state.p_batt_w,
            mode: self.state.mode,
            saturation: self.state.saturation,
            soc_violation,
            power_infeasible,
            done: self.done,
        }
    }

    /// End-of-episode aggregates; errors before the episode has ended.
    pub fn finalize(&self) -> Result<EpisodeMetrics, EnvError> {
        if !self.done {
            return Err(EnvError::EpisodeNotFinished);
        }
        Ok(EpisodeMetrics {
            fuel_l_per_100km: metrics::fuel_economy_l_per_100km(
                self.state.fuel_used_g,
                self.distance_m,
                self.config.fuel_density_g_per_l,
            ),
            fuel_used_g: self.state.fuel_used_g,
            soc_initial: self.soc_initial,
            soc_end: self.state.soc,
            distance_m: self.distance_m,
            cumulative_loss_j: self.cumulative_loss_j,
            steps: self.steps,
            terminated_early: self.terminated_early,
        })
    }
}
