//! Desk-scale calibration harness for the learning-trend experiment:
//! trains multi-agent (two relevance ratios) and single-agent systems over
//! several seeds, evaluates against the rule-based thermostat, and prints
//! the trend/ordering diagnostics.
//!
//!     cargo run --release -p ems-core --example calibrate -- \
//!         [power_weight] [episodes] [width] [n_seeds] [sigma] [penalty] [rule_low]

use ems_core::baselines::{RuleBasedConfig, RuleBasedController};
use ems_core::coordinator::{
    evaluate, make_agents, train, ControlMode, GreedyPolicy, HandshakeConfig, LearningHistory,
    TrainConfig,
};
use ems_core::cycles::{compose_learning_cycle, synth};
use ems_core::ddpg::{AgentConfig, OuConfig};
use ems_core::env::EnvConfig;
use ems_core::plant::{PlantModel, PlantParameters};
use std::time::Instant;

fn arg(n: usize, default: f64) -> f64 {
    std::env::args().nth(n).and_then(|s| s.parse().ok()).unwrap_or(default)
}

fn main() {
    let power_weight = arg(1, 0.01);
    let episodes = arg(2, 100.0) as u32;
    let width = arg(3, 32.0) as usize;
    let n_seeds = arg(4, 3.0) as usize;
    let sigma = arg(5, 0.1);
    let penalty = arg(6, 50.0);
    let rule_low = arg(7, 0.27);
    let anneal = arg(8, 0.0) as u32;
    let ou_decay = arg(9, 0.2);
    let only_multi02 = arg(10, 0.0) > 0.0;

    let plant = PlantModel::with_default_maps(PlantParameters::default()).unwrap();
    let cycles = synth::standard_cycles();
    let phases = synth::default_phases(&cycles);
    let env_config = EnvConfig::default();
    let eval_cycle = compose_learning_cycle(&phases, [0, 1, 2, 3], 3);
    println!(
        "pw={power_weight} episodes={episodes} width={width} seeds={n_seeds} sigma={sigma} penalty={penalty} rule_low={rule_low} anneal={anneal}"
    );
    println!("eval cycle: {} s, {:.0} m", eval_cycle.duration_s(), eval_cycle.distance_m());

    let agent_config = AgentConfig {
        hidden_width: width,
        ou: OuConfig { decay: ou_decay, sigma, dt: 1.0 },
        noise_anneal_episodes: if anneal > 0 { Some(anneal) } else { None },
        ..AgentConfig::default()
    };
    let base = TrainConfig {
        episodes,
        power_weight,
        bound_penalty: penalty,
        ..TrainConfig::default()
    };
    let seeds: Vec<u64> = (1..=n_seeds as u64).collect();

    // rule-based reference
    let mut rule = RuleBasedController::new(RuleBasedConfig {
        soc_low: rule_low,
        soc_high: 0.31,
        ..RuleBasedConfig::default()
    });
    let (rm, _) = evaluate(&plant, &env_config, eval_cycle.clone(), 0.28, &mut rule).unwrap();
    println!(
        "rule-based: end_soc={:.4} err={:.2}% fuel={:.3}",
        rm.soc_end,
        (rm.soc_end - 0.28).abs() / 0.28 * 100.0,
        rm.fuel_l_per_100km.unwrap_or(f64::NAN)
    );

    let trend = |h: &LearningHistory, agent: usize| -> (f64, f64) {
        let n = h.episodes.len();
        (h.mean_reward(agent, 0..10.min(n)), h.mean_reward(agent, n.saturating_sub(10)..n))
    };
    let reward_std_last = |h: &LearningHistory, frac: f64| -> f64 {
        let n = h.episodes.len();
        let from = ((1.0 - frac) * n as f64) as usize;
        let vals: Vec<f64> = h.episodes[from..]
            .iter()
            .map(|e| e.rewards.iter().sum::<f64>() / e.rewards.len() as f64)
            .collect();
        let m = vals.iter().sum::<f64>() / vals.len() as f64;
        (vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / vals.len() as f64).sqrt()
    };

    let mut summaries: Vec<(String, f64, f64, f64)> = Vec::new(); // label, err, fuel, std

    let groups: Vec<(&str, ControlMode, f64)> = if only_multi02 {
        vec![("multi@0.2", ControlMode::Multi, 0.2)]
    } else {
        vec![
            ("multi@0.2", ControlMode::Multi, 0.2),
            ("multi@0.6", ControlMode::Multi, 0.6),
            ("single", ControlMode::Single, 0.2),
        ]
    };
    for (label, mode, rrel) in groups {
        let mut errs = Vec::new();
        let mut fuels = Vec::new();
        let mut stds = Vec::new();
        for &seed in &seeds {
            let config = TrainConfig {
                mode,
                handshake: HandshakeConfig { relevance_ratio: rrel },
                ..base.clone()
            };
            let mut agents = make_agents(mode, &agent_config, seed).unwrap();
            let t0 = Instant::now();
            let history =
                train(&plant, &phases, &env_config, &config, &mut agents, seed).unwrap();
            let wall = t0.elapsed().as_secs_f64();

            let mut policy = GreedyPolicy::from_agents(&agents, &config);
            let (m, _) =
                evaluate(&plant, &env_config, eval_cycle.clone(), 0.28, &mut policy).unwrap();
            let err = (m.soc_end - 0.28).abs() / 0.28 * 100.0;
            let fuel = m.fuel_l_per_100km.unwrap_or(f64::NAN);
            errs.push(err);
            fuels.push(fuel);
            stds.push(reward_std_last(&history, 0.6));

            let early_terms =
                history.episodes.iter().filter(|e| e.terminated_early).count();
            print!("{label} seed{seed}: {wall:.0}s err={err:.2}% fuel={fuel:.3} endsoc={:.4} early={early_terms}", m.soc_end);
            for a in 0..mode.agent_count() {
                let (first, last) = trend(&history, a);
                print!(" | a{a}: {first:.1} -> {last:.1} ({})", if last > first { "UP" } else { "down" });
            }
            println!(" | std60={:.3}", stds.last().unwrap());
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        println!(
            ">> {label}: mean_err={:.2}% mean_fuel={:.3} mean_std={:.3}\n",
            mean(&errs),
            mean(&fuels),
            mean(&stds)
        );
        summaries.push((label.to_string(), mean(&errs), mean(&fuels), mean(&stds)));
    }

    let rule_fuel = rm.fuel_l_per_100km.unwrap();
    if summaries.len() < 3 {
        return;
    }
    let multi = &summaries[0];
    let multi6 = &summaries[1];
    let single = &summaries[2];
    println!("== criteria ==");
    println!("7b multi err < 5%: {:.2}% -> {}", multi.1, multi.1 < 5.0);
    println!(
        "7c ordering multi({:.3}) <= single({:.3}) <= rule({:.3}): {} {}",
        multi.2,
        single.2,
        rule_fuel,
        multi.2 <= single.2,
        single.2 <= rule_fuel
    );
    println!(
        "8 std(multi@0.2)={:.3} < std(multi@0.6)={:.3}: {}",
        multi.3,
        multi6.3,
        multi.3 < multi6.3
    );
}
