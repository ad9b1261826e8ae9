//! Plot-ready tabular text outputs: comparison tables, learning curves,
//! episode traces, sweep reports, and the run manifest.
//!
//! Column orders and headers are versioned (golden-file tested); all writers
//! are pure functions of their inputs so repeated runs with the same seed
//! produce byte-identical files.

use crate::coordinator::{LearningHistory, TraceRow};
use crate::sensitivity::SweepReport;
use serde::Serialize;

pub const COMPARISON_HEADER: &str =
    "cycle\tinitial_soc\tmethod\tend_soc\tsoc_error_pct\tfuel_l_per_100km\tsaving_pct";
pub const LEARNING_CURVE_HEADER_MULTI: &str =
    "episode\treward_agent_1\treward_agent_2\tend_soc\tfuel_l_per_100km";
pub const LEARNING_CURVE_HEADER_SINGLE: &str =
    "episode\treward_agent_1\tend_soc\tfuel_l_per_100km";
pub const TRACE_HEADER: &str =
    "time_s\tv_mps\tt_dem_nm\tmode\tsoc\tfuel_rate_g_per_s\tloss_eng_w\tloss_batt_w";

/// One row of the method-comparison table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub cycle: String,
    pub initial_soc: f64,
    pub method: String,
    pub end_soc: f64,
    pub soc_error_pct: f64,
    pub fuel_l_per_100km: Option<f64>,
    pub saving_pct: Option<f64>,
}

fn opt(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.6}"),
        None => "undefined".to_string(),
    }
}

pub fn comparison_table(rows: &[ComparisonRow]) -> String {
    let mut out = String::from(COMPARISON_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{}\t{:.6}\t{}\t{:.6}\t{:.6}\t{}\t{}\n",
            r.cycle,
            r.initial_soc,
            r.method,
            r.end_soc,
            r.soc_error_pct,
            opt(r.fuel_l_per_100km),
            opt(r.saving_pct),
        ));
    }
    out
}

pub fn learning_curve_table(history: &LearningHistory) -> String {
    let agents = history.agent_count();
    let mut out = String::from(if agents >= 2 {
        LEARNING_CURVE_HEADER_MULTI
    } else {
        LEARNING_CURVE_HEADER_SINGLE
    });
    out.push('\n');
    for e in &history.episodes {
        let mut cols = vec![format!("{}", e.episode)];
        for r in &e.rewards {
            cols.push(format!("{r:.6}"));
        }
        cols.push(format!("{:.6}", e.end_soc));
        cols.push(opt(e.fuel_l_per_100km));
        out.push_str(&cols.join("\t"));
        out.push('\n');
    }
    out
}

pub fn trace_table(rows: &[TraceRow]) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{}\t{:.4}\t{:.4}\t{}\t{:.6}\t{:.6}\t{:.3}\t{:.3}\n",
            r.time_s,
            r.v_mps,
            r.t_dem_nm,
            r.mode.as_str(),
            r.soc,
            r.fuel_rate_g_per_s,
            r.loss_eng_w,
            r.loss_batt_w,
        ));
    }
    out
}

/// Sweep report rendered as aligned text with best/worst and sensitivity
/// rows per indicator.
pub fn sweep_report_text(report: &SweepReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("sweep dimension: {}\n", report.dimension));
    out.push_str("group\tsettings\tct_s\tce\tfe_l_per_100km\tstatus\n");
    for r in &report.rows {
        let settings = r
            .setting_vector
            .iter()
            .map(|v| format!("{v:.4}"))
            .collect::<Vec<_>>()
            .join(",");
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            r.label,
            settings,
            opt(r.computation_time_s),
            opt(r.convergence_episodes),
            opt(r.fuel_economy_l_per_100km),
            r.failure.as_deref().unwrap_or("ok"),
        ));
    }
    out.push('\n');
    out.push_str("indicator\tbest\tbest_value\tworst\tworst_value\tsensitivity_pct\n");
    for s in &report.indicators {
        let (bl, bv) = s
            .best
            .as_ref()
            .map(|(l, v)| (l.clone(), format!("{v:.4}")))
            .unwrap_or(("-".into(), "-".into()));
        let (wl, wv) = s
            .worst
            .as_ref()
            .map(|(l, v)| (l.clone(), format!("{v:.4}")))
            .unwrap_or(("-".into(), "-".into()));
        let ls = match (s.sensitivity_pct, &s.note) {
            (Some(v), _) => format!("{v:.4}"),
            (None, Some(n)) => n.clone(),
            (None, None) => "-".into(),
        };
        out.push_str(&format!("{}\t{}\t{}\t{}\t{}\t{}\n", s.indicator, bl, bv, wl, wv, ls));
    }
    out
}

/// Run provenance: root seeds, config digest, and code version. No
/// timestamps, so repeated runs stay byte-identical.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    pub seeds: Vec<u64>,
    pub config_sha256: String,
    pub version: String,
}

impl Manifest {
    pub fn new(command: &str, seeds: &[u64], config_text: &str) -> Self {
        Self {
            command: command.to_string(),
            seeds: seeds.to_vec(),
            config_sha256: sha256_hex(config_text.as_bytes()),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
