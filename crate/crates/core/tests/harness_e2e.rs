//! End-to-end pipeline checks over a tiny configuration: train → artifacts,
//! determinism of outputs, eval-from-checkpoint, and schema golden lines.

use ems_core::config::{load_from_parts, ExperimentConfig};
use ems_core::harness::{regenerate_sweep_report, run_experiment, RunMode};
use ems_core::report::{sweep_report_text, COMPARISON_HEADER};
use std::path::{Path, PathBuf};

fn assets() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../assets")
}

/// A micro config: tiny networks, few episodes, one seed.
fn micro_config(out: &Path, seeds: &[u64]) -> (ExperimentConfig, String) {
    let text = format!(
        r#"
[plant]
params = "params/default_plant.toml"
engine_map = "maps/engine_fuel.map"
mg1_map = "maps/mg1_eff.map"
mg2_map = "maps/mg2_eff.map"

[cycles]
files = [
    "cycles/artemis-rural.cycle",
    "cycles/rts95.cycle",
    "cycles/udds.cycle",
    "cycles/wltp.cycle",
]
phase1 = {{ file_index = 0, start = 6, end = 36 }}
phase2 = {{ file_index = 1, start = 32, end = 62 }}
phase3 = {{ file_index = 2, start = 116, end = 146 }}
phase4 = {{ file_index = 3, start = 160, end = 190 }}
bridge_s = 3

[experiment]
controllers = ["rule_based", "multi_agent"]
episodes = 3
seeds = [{seeds}]
initial_soc = [0.28]
train_initial_soc = 0.28
relevance_ratio = 0.2
out_dir = "{out}"
eval_cycles = ["learning"]

[agent]
hidden_width = 8
batch_size = 8
warmup_steps = 40
buffer_capacity = 4000
"#,
        seeds = seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(", "),
        out = out.display()
    );
    (toml::from_str(&text).unwrap(), text)
}

#[test]
fn train_run_produces_all_artifacts_and_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");

    let run = |out: &Path| {
        let (config, text) = micro_config(out, &[11]);
        let exp = load_from_parts(config, text, &assets()).unwrap();
        run_experiment(&exp, &RunMode::Train, "train").unwrap()
    };
    let a = run(&out_a);
    let _ = run(&out_b);

    assert!(!a.rows.is_empty());
    let read = |dir: &Path, name: &str| std::fs::read(dir.join(name)).unwrap();
    for name in [
        "comparison.tsv",
        "learning_curve_multi-agent_seed11.tsv",
        "trace_rule-based_learning_soc0.28.tsv",
        "trace_multi-agent_learning_soc0.28.tsv",
        "manifest.json",
        "multi-agent_seed11_agent0.ckpt",
        "multi-agent_seed11_agent1.ckpt",
    ] {
        let one = read(&out_a, name);
        assert!(!one.is_empty(), "{name} empty");
        // byte-identical across reruns apart from the differing out_dir in
        // the hashed config text
        if name != "manifest.json" {
            assert_eq!(one, read(&out_b, name), "{name} differs between identical runs");
        }
    }
    let table = String::from_utf8(read(&out_a, "comparison.tsv")).unwrap();
    assert!(table.starts_with(COMPARISON_HEADER));
    // learned method rows carry a saving column against the rule-based row
    assert!(a.rows.iter().any(|r| r.method == "multi-agent" && r.saving_pct.is_some()));
}

#[test]
fn eval_from_checkpoints_matches_the_training_evaluation() {
    let tmp = tempfile::tempdir().unwrap();
    let out_train = tmp.path().join("train");
    let (config, text) = micro_config(&out_train, &[5]);
    let exp = load_from_parts(config, text, &assets()).unwrap();
    let trained = run_experiment(&exp, &RunMode::Train, "train").unwrap();

    let out_eval = tmp.path().join("eval");
    let (config2, text2) = micro_config(&out_eval, &[5]);
    let exp2 = load_from_parts(config2, text2, &assets()).unwrap();
    let evaluated = run_experiment(
        &exp2,
        &RunMode::Eval { checkpoint_dir: out_train.clone() },
        "eval",
    )
    .unwrap();

    // no training happened: no learning curve or checkpoint files written
    assert!(!out_eval.join("learning_curve_multi-agent_seed5.tsv").exists());
    assert!(!out_eval.join("multi-agent_seed5_agent0.ckpt").exists());
    // the evaluation rows match the training run's evaluation exactly
    let t: Vec<_> = trained.rows.iter().filter(|r| r.method == "multi-agent").collect();
    let e: Vec<_> = evaluated.rows.iter().filter(|r| r.method == "multi-agent").collect();
    assert_eq!(t.len(), e.len());
    for (x, y) in t.iter().zip(&e) {
        assert_eq!(x.end_soc, y.end_soc);
        assert_eq!(x.fuel_l_per_100km, y.fuel_l_per_100km);
    }
}

#[test]
fn baseline_mode_skips_learning_controllers() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("base");
    let (config, text) = micro_config(&out, &[1]);
    let exp = load_from_parts(config, text, &assets()).unwrap();
    let artifacts = run_experiment(&exp, &RunMode::Baseline, "baseline").unwrap();
    assert!(artifacts.rows.iter().all(|r| r.method == "rule-based"));
    assert!(!out.join("multi-agent_seed1_agent0.ckpt").exists());
}

#[test]
fn sweep_report_regenerates_bit_identically_from_logs() {
    use ems_core::sensitivity::{
        run_sweep, GroupSetting, SweepDimension, SweepGroup, SweepSetup,
    };
    let tmp = tempfile::tempdir().unwrap();
    let (config, text) = micro_config(&tmp.path().join("s"), &[3]);
    let exp = load_from_parts(config, text, &assets()).unwrap();
    let phases = exp.phases();
    let mut train_config =
        ems_core::harness::train_config_for(&exp, ems_core::coordinator::ControlMode::Multi);
    train_config.episodes = 2;
    let setup = SweepSetup {
        plant: &exp.plant,
        phases: &phases,
        env_config: exp.env_config().unwrap(),
        train_config,
        agent_config: exp.config.agent.clone(),
        seeds: vec![3],
        convergence_window: 2,
    };
    let groups = vec![
        SweepGroup { label: "g1".into(), setting: GroupSetting::CriticDepth { layers: 2 } },
        SweepGroup { label: "g2".into(), setting: GroupSetting::CriticDepth { layers: 3 } },
    ];
    let report = run_sweep(SweepDimension::CriticDepth, &groups, &setup);
    let rendered = sweep_report_text(&report);
    let json = serde_json::to_string(&report).unwrap();
    let regenerated = regenerate_sweep_report(&json).unwrap();
    assert_eq!(rendered, regenerated);
}

#[test]
fn one_group_sweep_has_no_sensitivity() {
    use ems_core::sensitivity::{
        run_sweep, GroupSetting, SweepDimension, SweepGroup, SweepSetup,
    };
    let tmp = tempfile::tempdir().unwrap();
    let (config, text) = micro_config(&tmp.path().join("s"), &[3]);
    let exp = load_from_parts(config, text, &assets()).unwrap();
    let phases = exp.phases();
    let mut train_config =
        ems_core::harness::train_config_for(&exp, ems_core::coordinator::ControlMode::Multi);
    train_config.episodes = 2;
    let setup = SweepSetup {
        plant: &exp.plant,
        phases: &phases,
        env_config: exp.env_config().unwrap(),
        train_config: train_config.clone(),
        agent_config: exp.config.agent.clone(),
        seeds: vec![3],
        convergence_window: 2,
    };
    let one = vec![SweepGroup {
        label: "only".into(),
        setting: GroupSetting::CriticDepth { layers: 3 },
    }];
    let report = run_sweep(SweepDimension::CriticDepth, &one, &setup);
    for s in &report.indicators {
        assert!(s.sensitivity_pct.is_none());
    }

    // two groups with identical settings: the projected vectors coincide and
    // the sensitivity guard reports identical settings
    let twins = vec![
        SweepGroup { label: "a".into(), setting: GroupSetting::CriticDepth { layers: 3 } },
        SweepGroup { label: "b".into(), setting: GroupSetting::CriticDepth { layers: 3 } },
    ];
    let report = run_sweep(SweepDimension::CriticDepth, &twins, &setup);
    for s in &report.indicators {
        assert!(s.sensitivity_pct.is_none());
        if s.best.is_some() {
            assert_eq!(s.note.as_deref(), Some("best and worst settings identical"));
        }
    }
}
