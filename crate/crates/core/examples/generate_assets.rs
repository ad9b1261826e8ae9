//! Regenerates the committed asset files (default parameters, synthetic
//! maps, stand-in cycles, example config) from the in-code defaults.
//!
//!     cargo run -p ems-core --example generate_assets -- <repo-root>
//!
//! A unit test guards against drift between these files and the code.

use ems_core::cycles::synth as cycle_synth;
use ems_core::plant::{synth, PlantParameters};
use std::path::PathBuf;

fn main() {
    let root = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
    let assets = root.join("assets");

    let params = PlantParameters::default();
    write(&assets.join("params/default_plant.toml"), &params.to_toml());

    write(
        &assets.join("maps/engine_fuel.map"),
        &header("engine fuel rate map, g/s over (rpm, Nm)")
            .clone()
            .add(&synth::default_engine_map(params.fuel_heat_value_kj_per_g).to_text()),
    );
    write(
        &assets.join("maps/mg1_eff.map"),
        &header("MG1 efficiency map over (rpm, Nm)").add(&synth::default_mg1_map().to_text()),
    );
    write(
        &assets.join("maps/mg2_eff.map"),
        &header("MG2 efficiency map over (rpm, Nm)").add(&synth::default_mg2_map().to_text()),
    );

    for cycle in cycle_synth::standard_cycles() {
        write(&assets.join(format!("cycles/{}.cycle", cycle.name)), &cycle.to_text());
    }

    write(&assets.join("configs/desk_compare.toml"), EXAMPLE_CONFIG);
    println!("assets written under {}", assets.display());
}

fn write(path: &std::path::Path, contents: &str) {
    std::fs::create_dir_all(path.parent().unwrap()).unwrap();
    std::fs::write(path, contents).unwrap();
    println!("wrote {}", path.display());
}

fn header(title: &str) -> String {
    format!("# {title}\n")
}

trait Add {
    fn add(self, s: &str) -> String;
}

impl Add for String {
    fn add(mut self, s: &str) -> String {
        self.push_str(s);
        self
    }
}

const EXAMPLE_CONFIG: &str = r#"# Desk-scale comparison: rule-based vs single-agent vs multi-agent
# on the composite learning cycle.

[plant]
params = "../params/default_plant.toml"
engine_map = "../maps/engine_fuel.map"
mg1_map = "../maps/mg1_eff.map"
mg2_map = "../maps/mg2_eff.map"

[plant.series_speed_schedule]
kind = "bsfc_optimal"

[cycles]
files = [
    "../cycles/artemis-rural.cycle",
    "../cycles/rts95.cycle",
    "../cycles/udds.cycle",
    "../cycles/wltp.cycle",
]
phase1 = { file_index = 0, start = 6, end = 76 }
phase2 = { file_index = 1, start = 32, end = 97 }
phase3 = { file_index = 2, start = 116, end = 180 }
phase4 = { file_index = 3, start = 160, end = 235 }
bridge_s = 3

[experiment]
controllers = ["rule_based", "single_agent", "multi_agent"]
episodes = 100
seeds = [1, 2, 3]
initial_soc = [0.25, 0.28, 0.30]
train_initial_soc = 0.28
relevance_ratio = 0.2
out_dir = "runs/desk_compare"
eval_cycles = ["learning"]
saving_baseline = "rule_based"

[agent]
hidden_width = 32
batch_size = 64
actor_lr = 1e-4
critic_lr = 1e-3
warmup_steps = 1000

[reward]
power_weight = 1.0
soc_weight_active = 2.0
bound_penalty = 50.0

[env]
soc_bound_policy = "terminate"
fuel_density_g_per_l = 745.0
"#;
