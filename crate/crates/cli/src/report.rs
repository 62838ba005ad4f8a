//! Run summaries and the human-readable result table.

use netism::experiment::RichnessReport;
use netism::model::TopologyKind;
use netism::sim::{ClfDecayReport, GasReport, IssMcReport, SlidingReport};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub collect_s: f64,
    pub synthesize_s: f64,
    pub solve_per_subsystem_s: f64,
    pub ism_s: f64,
    pub compose_s: f64,
    pub simulate_s: f64,
    pub verify_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdicts {
    pub feasible: bool,
    pub gas: bool,
    pub sliding: Option<bool>,
    pub decay: Option<bool>,
    pub mc: bool,
}

impl Verdicts {
    pub fn all_passed(&self) -> bool {
        self.feasible
            && self.gas
            && self.sliding.unwrap_or(true)
            && self.decay.unwrap_or(true)
            && self.mc
    }
}

/// Machine-readable run summary, persisted as `summary.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Summary {
    pub run_id: String,
    pub topology: TopologyKind,
    pub n_subsystems: usize,
    pub samples: usize,
    pub attempts: usize,
    pub kappa_local: f64,
    pub mu_local: f64,
    pub network_kappa: Option<f64>,
    pub alpha1: f64,
    pub alpha2: f64,
    pub max_xi: f64,
    /// Representative subsystem per subsystem.
    pub classes: Vec<usize>,
    pub richness: Vec<RichnessReport>,
    pub gas: Option<GasReport>,
    pub sliding: Option<SlidingReport>,
    pub decay: Option<ClfDecayReport>,
    pub mc: Vec<IssMcReport>,
    pub verdicts: Verdicts,
    pub aborted: Option<String>,
    pub timings: Timings,
}

fn topology_name(kind: TopologyKind) -> &'static str {
    match kind {
        TopologyKind::FullyConnected => "fully connected",
        TopologyKind::Ring => "ring",
        TopologyKind::BinaryTree => "binary tree",
        TopologyKind::Star => "star",
        TopologyKind::Line => "line",
        TopologyKind::Custom => "custom",
    }
}

fn yes_no(v: Option<bool>) -> &'static str {
    match v {
        Some(true) => "pass",
        Some(false) => "FAIL",
        None => "-",
    }
}

/// One row per run, mirroring the benchmark table: topology, size, sample
/// budget, per-subsystem solve time, then the composed constants and
/// verdicts.
pub fn render_table(rows: &[Summary]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<16} {:>6} {:>4} {:>12} {:>10} {:>8} {:>9} {:>9} {:>5} {:>7} {:>6} {:>4}\n",
        "topology", "N", "T", "RT/sub (s)", "kappa", "alpha1", "alpha2", "feasible", "GAS",
        "sliding", "decay", "MC"
    ));
    for s in rows {
        out.push_str(&format!(
            "{:<16} {:>6} {:>4} {:>12.4} {:>10} {:>8.4} {:>9.4} {:>9} {:>5} {:>7} {:>6} {:>4}\n",
            topology_name(s.topology),
            s.n_subsystems,
            s.samples,
            s.timings.solve_per_subsystem_s,
            s.network_kappa
                .map(|k| format!("{k:.4}"))
                .unwrap_or_else(|| "-".into()),
            s.alpha1,
            s.alpha2,
            if s.verdicts.feasible { "yes" } else { "NO" },
            yes_no(Some(s.verdicts.gas)),
            yes_no(s.verdicts.sliding),
            yes_no(s.verdicts.decay),
            yes_no(Some(s.verdicts.mc)),
        ));
    }
    out
}
