//! Committed asset files must match the in-code defaults they were
//! generated from (see examples/generate_assets.rs).

use ems_core::cycles::{synth as cycle_synth, DriveCycle};
use ems_core::plant::{synth, EfficiencyMap, PlantParameters};
use std::path::PathBuf;

fn assets() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../assets")
}

#[test]
fn default_plant_params_match_committed_file() {
    let file = PlantParameters::load(&assets().join("params/default_plant.toml")).unwrap();
    assert_eq!(file, PlantParameters::default());
}

#[test]
fn synthetic_maps_match_committed_files() {
    let params = PlantParameters::default();
    let cases = [
        ("maps/engine_fuel.map", synth::default_engine_map(params.fuel_heat_value_kj_per_g)),
        ("maps/mg1_eff.map", synth::default_mg1_map()),
        ("maps/mg2_eff.map", synth::default_mg2_map()),
    ];
    for (path, expected) in cases {
        let loaded = EfficiencyMap::load(&assets().join(path)).unwrap();
        assert_eq!(loaded, expected, "{path} drifted from the generator");
    }
}

#[test]
fn stand_in_cycles_match_committed_files() {
    for cycle in cycle_synth::standard_cycles() {
        let path = assets().join(format!("cycles/{}.cycle", cycle.name));
        let loaded = DriveCycle::load(&path).unwrap();
        assert_eq!(loaded.samples_mps, cycle.samples_mps, "{} drifted", cycle.name);
    }
}

#[test]
fn example_config_loads_and_validates() {
    let path = assets().join("configs/desk_compare.toml");
    let exp = ems_core::config::load_experiment(&path).unwrap();
    assert_eq!(exp.phase_cycles.len(), 4);
    assert_eq!(exp.config.experiment.initial_soc, vec![0.25, 0.28, 0.30]);
    let phases = exp.phases();
    assert_eq!(phases[0].end - phases[0].start, 70);
    exp.env_config().unwrap();
}
