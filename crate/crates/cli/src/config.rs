//! The pipeline configuration file: one JSON document with a section per
//! stage. Unknown fields are rejected everywhere.

use netism::artifact::NetworkSpec;
use netism::error::{Error, Result};
use netism::experiment::ExperimentConfig;
use netism::ism::Regularization;
use netism::model::TopologyKind;
use netism::sim::{GasCheck, SimConfig};
use netism::synthesis::SynthesisOptions;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub network: NetworkSpec,
    #[serde(default)]
    pub experiment: ExperimentConfig,
    #[serde(default)]
    pub synthesis: SynthesisSection,
    #[serde(default)]
    pub ism: IsmSection,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default)]
    pub verify: VerifySection,
}

impl PipelineConfig {
    /// Benchmark configuration over a built-in topology: the desk-scale
    /// closed-loop study with perturbation and both controller components.
    pub fn benchmark(topology: TopologyKind, n_subsystems: usize) -> Self {
        let synthesis = SynthesisSection {
            options: SynthesisOptions {
                kappa: 1.0,
                mu: 1.0,
                ..SynthesisOptions::default()
            },
            ..SynthesisSection::default()
        };
        PipelineConfig {
            network: NetworkSpec::benchmark(topology, n_subsystems),
            experiment: ExperimentConfig::default(),
            synthesis,
            ism: IsmSection::default(),
            sim: SimConfig::default(),
            verify: VerifySection::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.experiment.validate()?;
        self.synthesis.options.validate()?;
        if self.ism.margin <= 0.0 {
            return Err(Error::Config("ism.margin must be positive".into()));
        }
        if self.ism.boundary_layer <= 0.0 {
            return Err(Error::Config("ism.boundary_layer must be positive".into()));
        }
        // step no coarser than a tenth of the sampling interval
        if self.sim.step > self.experiment.sampling_interval / 10.0 {
            return Err(Error::Config(format!(
                "sim.step {:.3e} exceeds a tenth of the sampling interval {:.3e}",
                self.sim.step, self.experiment.sampling_interval
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct SynthesisSection {
    #[serde(flatten)]
    pub options: SynthesisOptions,
    /// Decay-rate grid walked by the composition retry loop; the base value
    /// is always tried first.
    pub kappa_grid: Vec<f64>,
    /// Weight grid walked together with the decay grid.
    pub mu_grid: Vec<f64>,
    /// All-pairs gain matrix instead of the topology-aware one.
    pub strict_dense: bool,
}

impl SynthesisSection {
    /// Grid points in trial order: the configured pair first, then the
    /// cartesian grid.
    pub fn grid(&self) -> Vec<(f64, f64)> {
        let base = (self.options.kappa, self.options.mu);
        let kappas = if self.kappa_grid.is_empty() {
            vec![self.options.kappa]
        } else {
            self.kappa_grid.clone()
        };
        let mus = if self.mu_grid.is_empty() {
            vec![self.options.mu]
        } else {
            self.mu_grid.clone()
        };
        let mut points = vec![base];
        for &k in &kappas {
            for &m in &mus {
                if !points
                    .iter()
                    .any(|&(pk, pm)| (pk - k).abs() < 1e-15 && (pm - m).abs() < 1e-15)
                {
                    points.push((k, m));
                }
            }
        }
        points
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum IsmMode {
    #[default]
    BoundaryLayer,
    IdealSign,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IsmSection {
    /// Sliding-output override rows; the transpose of the input-matrix
    /// estimate when absent.
    pub c_override: Option<Vec<Vec<f64>>>,
    /// Strict margin above the gain bound.
    pub margin: f64,
    /// Boundary-layer width.
    pub boundary_layer: f64,
    pub mode: IsmMode,
}

impl Default for IsmSection {
    fn default() -> Self {
        IsmSection {
            c_override: None,
            margin: 0.1,
            boundary_layer: 1e-3,
            mode: IsmMode::BoundaryLayer,
        }
    }
}

impl IsmSection {
    pub fn regularization(&self) -> Regularization {
        match self.mode {
            IsmMode::BoundaryLayer => Regularization::BoundaryLayer {
                epsilon: self.boundary_layer,
            },
            IsmMode::IdealSign => Regularization::IdealSign,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    pub gas: GasCheck,
    /// Sliding band; derived from the boundary layer and gain when absent.
    pub sliding_band: Option<f64>,
    /// Monte-Carlo budget of the certificate re-check.
    pub mc_samples: usize,
    pub mc_radius: f64,
    /// Slack of the per-step network decay check.
    pub clf_slack: f64,
    /// Required fraction of steps satisfying the decay inequality.
    pub min_decay_fraction: f64,
    /// Run a nominal feedback-only companion simulation for the decay check.
    pub check_nominal_decay: bool,
}

impl Default for VerifySection {
    fn default() -> Self {
        VerifySection {
            gas: GasCheck::default(),
            sliding_band: None,
            mc_samples: 10_000,
            mc_radius: 10.0,
            clf_slack: 1e-6,
            min_decay_fraction: 0.999,
            check_nominal_decay: true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn benchmark_config_round_trips() {
        let cfg = PipelineConfig::benchmark(TopologyKind::Ring, 10);
        cfg.validate().unwrap();
        let json = serde_json::to_string_pretty(&cfg).unwrap();
        let back: PipelineConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn unknown_fields_are_rejected_per_section() {
        let cfg = PipelineConfig::benchmark(TopologyKind::Ring, 4);
        let mut value = serde_json::to_value(&cfg).unwrap();
        value["sim"]["typo"] = serde_json::json!(true);
        assert!(serde_json::from_value::<PipelineConfig>(value).is_err());
    }

    #[test]
    fn grid_starts_from_the_configured_pair() {
        let mut section = SynthesisSection::default();
        section.options.kappa = 2.0;
        section.options.mu = 1.0;
        section.kappa_grid = vec![2.0, 1.0, 0.5];
        section.mu_grid = vec![1.0, 0.5];
        let grid = section.grid();
        assert_eq!(grid[0], (2.0, 1.0));
        assert_eq!(grid.len(), 6);
    }

    #[test]
    fn overly_coarse_sim_step_is_rejected() {
        let mut cfg = PipelineConfig::benchmark(TopologyKind::Ring, 4);
        cfg.sim.step = cfg.experiment.sampling_interval; // way beyond tau/10
        assert!(cfg.validate().is_err());
    }
}
