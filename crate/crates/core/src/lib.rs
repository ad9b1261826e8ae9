//! Software-in-the-loop platform for a multi-mode plug-in hybrid powertrain.
//!
//! The crate simulates the longitudinal energy flow of a series/parallel
//! plug-in hybrid (engine, generator MG1, traction motor MG2, battery) at
//! 1 Hz and trains energy-management controllers against it:
//!
//! - a two-agent deep deterministic policy gradient system whose agents are
//!   coupled through a relevance-ratio joint reward ("hand-shaking"),
//! - a single-agent DDPG baseline,
//! - rule-based, ECMS, and dynamic-programming reference controllers.
//!
//! Modules follow the data flow: [`plant`] (vehicle physics) → [`cycles`]
//! (velocity traces) → [`env`] (episodic decision process) → [`nn`]/[`ddpg`]
//! (learning machinery) → [`coordinator`] (reward schemes and training loops)
//! → [`baselines`]/[`sensitivity`]/[`harness`] (evaluation and reporting).

pub mod baselines;
pub mod config;
pub mod coordinator;
pub mod cycles;
pub mod ddpg;
pub mod env;
pub mod harness;
pub mod metrics;
pub mod nn;
pub mod plant;
pub mod report;
pub mod rng;
pub mod sensitivity;
