//! Data collection from the nominal network and the data-based quantities
//! derived from it.
//!
//! Two runs of the whole nominal network are recorded per subsystem, both
//! from the same initial state: one with a seeded piecewise-constant
//! excitation at the target subsystem (all other inputs zero) and one with
//! every input zero. The sampled blocks feed the closed-loop data-based
//! representation and the input-matrix estimate.

use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::exec::mix_seed;
use crate::integrate::{self, Scheme};
use crate::linalg::{self, RANK_CUTOFF};
use crate::model::NetworkModel;
use nalgebra::{DMatrix, DVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// How the derivative block is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeMode {
    /// Evaluate the true right-hand side at each sample (noise-free data).
    #[default]
    ExactOracle,
    /// Forward differences of the sampled states.
    ForwardDifference,
}

/// Configuration for one collection experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Number of samples per run.
    pub samples: usize,
    /// Sampling interval in seconds.
    pub sampling_interval: f64,
    /// Amplitude bound of the piecewise-constant excitation.
    pub excitation_amplitude: f64,
    /// Initial states are drawn uniformly from `[-x0_radius, x0_radius]`
    /// per coordinate.
    pub x0_radius: f64,
    pub derivative_mode: DerivativeMode,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            samples: 10,
            sampling_interval: 0.1,
            excitation_amplitude: 1.0,
            x0_radius: 0.5,
            derivative_mode: DerivativeMode::ExactOracle,
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::Config("samples must be positive".into()));
        }
        if self.sampling_interval <= 0.0 {
            return Err(Error::Config("sampling_interval must be positive".into()));
        }
        Ok(())
    }
}

/// Sampled data blocks for one subsystem: the excited run and the zero-input
/// run, both from the same initial state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataMatrices {
    pub dict: Dictionary,
    /// Excitation inputs, `m x T`.
    pub input: DMatrix<f64>,
    /// Sampled states, `n x T`.
    pub states: DMatrix<f64>,
    /// Sampled internal inputs (neighbor states), `psi x T`.
    pub internal: DMatrix<f64>,
    /// Sampled state derivatives, `n x T`.
    pub derivs: DMatrix<f64>,
    /// Dictionary images of the sampled states, `z x T`.
    pub delta: DMatrix<f64>,
    /// Zero-input-run counterparts.
    pub states_bar: DMatrix<f64>,
    pub internal_bar: DMatrix<f64>,
    pub derivs_bar: DMatrix<f64>,
    pub delta_bar: DMatrix<f64>,
    /// Shared initial state of the subsystem.
    pub x0: DVector<f64>,
}

impl DataMatrices {
    pub fn samples(&self) -> usize {
        self.states.ncols()
    }

    /// `S+ - D W`, the drift data with the coupling influence removed.
    pub fn drift(&self, d: &DMatrix<f64>) -> DMatrix<f64> {
        if d.ncols() == 0 {
            self.derivs.clone()
        } else {
            &self.derivs - d * &self.internal
        }
    }

    /// Zero-input counterpart of [`Self::drift`].
    pub fn drift_bar(&self, d: &DMatrix<f64>) -> DMatrix<f64> {
        if d.ncols() == 0 {
            self.derivs_bar.clone()
        } else {
            &self.derivs_bar - d * &self.internal_bar
        }
    }
}

const OVERFLOW_NORM: f64 = 1e12;

/// Sampled blocks of one run: states, internal inputs, derivatives, and
/// dictionary images at the grid points.
struct RunRecord {
    states: DMatrix<f64>,
    internal: DMatrix<f64>,
    derivs: DMatrix<f64>,
    delta: DMatrix<f64>,
}

/// Integrate the nominal network over the sampling grid, recording samples
/// for subsystem `target`. `excitation` holds one input column per sample;
/// zero columns mean an unforced run.
fn run_nominal(
    network: &NetworkModel,
    target: usize,
    x0: &[DVector<f64>],
    excitation: &DMatrix<f64>,
    cfg: &ExperimentConfig,
) -> Result<RunRecord> {
    let n_sub = network.len();
    let samples = cfg.samples;
    let tau = cfg.sampling_interval;
    let substeps = 10usize;
    let h = tau / substeps as f64;

    let sub = network.subsystem(target);
    let n = sub.state_dim();
    let psi = network.psi(target);
    let z = sub.dict_len();

    let mut states = DMatrix::zeros(n, samples);
    let mut internal = DMatrix::zeros(psi, samples);
    let mut derivs = DMatrix::zeros(n, samples);
    let mut delta = DMatrix::zeros(z, samples);

    let mut current: Vec<DVector<f64>> = x0.to_vec();
    let mut extra_state: Option<DVector<f64>> = None;

    for k in 0..=samples {
        let t_k = k as f64 * tau;
        let norm: f64 = current.iter().map(|x| x.norm_squared()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm > OVERFLOW_NORM {
            return Err(Error::Divergence { time: t_k, norm });
        }
        if k == samples {
            extra_state = Some(current[target].clone());
            break;
        }

        let u_k = excitation.column(k).into_owned();
        let w_k = network.internal_input(target, &current);
        states.set_column(k, &current[target]);
        internal.set_column(k, &w_k);
        delta.set_column(k, &sub.dictionary().eval(&current[target])?);
        if cfg.derivative_mode == DerivativeMode::ExactOracle {
            let dx = network.subsystem_rhs(target, &current[target], &u_k, &w_k, t_k, false)?;
            derivs.set_column(k, &dx);
        }

        // advance one sampling interval with the inputs frozen on the grid
        let rhs = |_t: f64, x: &Vec<DVector<f64>>| -> Vec<DVector<f64>> {
            (0..n_sub)
                .map(|i| {
                    let u = if i == target {
                        u_k.clone()
                    } else {
                        DVector::zeros(network.subsystem(i).input_dim())
                    };
                    let z = network
                        .subsystem(i)
                        .dictionary()
                        .eval(&x[i])
                        .unwrap_or_else(|_| DVector::from_element(
                            network.subsystem(i).dict_len(),
                            f64::NAN,
                        ));
                    network.subsystem(i).true_a() * z
                        + network.subsystem(i).true_b() * u
                        + network.coupling_sum(i, x)
                })
                .collect()
        };
        let mut t = t_k;
        for _ in 0..substeps {
            current = integrate::step(Scheme::Rk4, &rhs, t, &current, h);
            t += h;
        }
    }

    if cfg.derivative_mode == DerivativeMode::ForwardDifference {
        let extra = extra_state.expect("final state recorded");
        for k in 0..samples {
            let next = if k + 1 < samples {
                states.column(k + 1).into_owned()
            } else {
                extra.clone()
            };
            derivs.set_column(k, &((next - states.column(k)) / tau));
        }
    }

    Ok(RunRecord {
        states,
        internal,
        derivs,
        delta,
    })
}

/// Collect the two input-state trajectories for subsystem `i` from the
/// nominal network. Deterministic in `(network, i, cfg)`.
pub fn collect_trajectories(
    network: &NetworkModel,
    i: usize,
    cfg: &ExperimentConfig,
) -> Result<DataMatrices> {
    cfg.validate()?;
    let sub = network.subsystem(i);
    let z = sub.dict_len();
    if cfg.samples <= z {
        return Err(Error::Richness(format!(
            "need more than z = {z} samples for full row rank, got {}",
            cfg.samples
        )));
    }

    let mut x0_rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.seed, (i as u64) << 1));
    let x0: Vec<DVector<f64>> = (0..network.len())
        .map(|j| {
            let nj = network.subsystem(j).state_dim();
            DVector::from_fn(nj, |_, _| x0_rng.random_range(-cfg.x0_radius..=cfg.x0_radius))
        })
        .collect();

    let mut exc_rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.seed, ((i as u64) << 1) | 1));
    let m = sub.input_dim();
    let excitation = DMatrix::from_fn(m, cfg.samples, |_, _| {
        exc_rng.random_range(-cfg.excitation_amplitude..=cfg.excitation_amplitude)
    });
    let zero_input = DMatrix::zeros(m, cfg.samples);

    let excited = run_nominal(network, i, &x0, &excitation, cfg)?;
    let unforced = run_nominal(network, i, &x0, &zero_input, cfg)?;

    Ok(DataMatrices {
        dict: sub.dictionary().clone(),
        input: excitation,
        states: excited.states,
        internal: excited.internal,
        derivs: excited.derivs,
        delta: excited.delta,
        states_bar: unforced.states,
        internal_bar: unforced.internal,
        derivs_bar: unforced.derivs,
        delta_bar: unforced.delta,
        x0: x0[i].clone(),
    })
}

/// Forward-difference derivative estimates: column `k` is
/// `(x(k+1) - x(k)) / tau`, one column fewer than the input.
pub fn forward_differences(states: &DMatrix<f64>, tau: f64) -> DMatrix<f64> {
    let cols = states.ncols() - 1;
    DMatrix::from_fn(states.nrows(), cols, |r, k| {
        (states[(r, k + 1)] - states[(r, k)]) / tau
    })
}

/// Derivative block for subsystem `i` from sampled states: forward
/// differences need one extra state column; the exact mode evaluates the
/// true right-hand side at each sample and therefore needs oracle access
/// through the network.
pub fn estimate_derivatives(
    network: &NetworkModel,
    i: usize,
    states: &DMatrix<f64>,
    inputs: &DMatrix<f64>,
    internal: &DMatrix<f64>,
    tau: f64,
    mode: DerivativeMode,
) -> Result<DMatrix<f64>> {
    let samples = inputs.ncols();
    match mode {
        DerivativeMode::ForwardDifference => {
            if states.ncols() != samples + 1 {
                return Err(Error::Dimension {
                    context: "derivative estimation",
                    expected: format!("{} state columns (samples + 1)", samples + 1),
                    got: format!("{}", states.ncols()),
                });
            }
            Ok(forward_differences(states, tau))
        }
        DerivativeMode::ExactOracle => {
            if states.ncols() < samples {
                return Err(Error::Dimension {
                    context: "derivative estimation",
                    expected: format!("at least {samples} state columns"),
                    got: format!("{}", states.ncols()),
                });
            }
            let n = network.subsystem(i).state_dim();
            let mut derivs = DMatrix::zeros(n, samples);
            for k in 0..samples {
                let dx = network.subsystem_rhs(
                    i,
                    &states.column(k).into_owned(),
                    &inputs.column(k).into_owned(),
                    &internal.column(k).into_owned(),
                    k as f64 * tau,
                    false,
                )?;
                derivs.set_column(k, &dx);
            }
            Ok(derivs)
        }
    }
}

/// Row-rank report for the two dictionary blocks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RichnessReport {
    pub rows: usize,
    pub samples: usize,
    pub rank_delta: usize,
    pub rank_delta_bar: usize,
    pub delta_full_rank: bool,
    pub delta_bar_full_rank: bool,
}

impl RichnessReport {
    pub fn ok(&self) -> bool {
        self.delta_full_rank && self.delta_bar_full_rank
    }

    pub fn retry_hint(&self) -> Option<String> {
        (!self.ok()).then(|| {
            format!(
                "dictionary blocks are rank deficient (rank {} and {} of {}); \
                 collect different trajectories, e.g. a new seed or a longer horizon",
                self.rank_delta, self.rank_delta_bar, self.rows
            )
        })
    }
}

/// Numerical row ranks of the dictionary blocks at the standard cutoff.
pub fn check_richness(d: &DataMatrices) -> RichnessReport {
    let rows = d.delta.nrows();
    let rank_delta = linalg::numerical_rank(&d.delta, RANK_CUTOFF);
    let rank_delta_bar = linalg::numerical_rank(&d.delta_bar, RANK_CUTOFF);
    RichnessReport {
        rows,
        samples: d.samples(),
        rank_delta,
        rank_delta_bar,
        delta_full_rank: rank_delta == rows,
        delta_bar_full_rank: rank_delta_bar == rows,
    }
}

/// Minimum-norm solution of `delta_bar * Q = delta`.
pub fn solve_q(delta: &DMatrix<f64>, delta_bar: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let rank = linalg::numerical_rank(delta_bar, RANK_CUTOFF);
    if rank < delta_bar.nrows() {
        return Err(Error::Richness(format!(
            "zero-input dictionary block is rank deficient ({rank} of {})",
            delta_bar.nrows()
        )));
    }
    let q = linalg::pinv(delta_bar, RANK_CUTOFF) * delta;
    let residual = linalg::spectral_norm(&(delta_bar * &q - delta));
    let bound = 1e-8 * (1.0 + linalg::spectral_norm(delta));
    if residual > bound {
        return Err(Error::Richness(format!(
            "consistency residual {residual:.3e} exceeds {bound:.3e} when factoring the excited \
             dictionary block through the zero-input one"
        )));
    }
    Ok(q)
}

/// Data-based estimate of the input matrix:
/// `(S+ - (S+_bar - D W_bar) Q - D W) I^+`.
pub fn estimate_b(d: &DataMatrices, q: &DMatrix<f64>, coupling: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let m = d.input.nrows();
    if linalg::numerical_rank(&d.input, RANK_CUTOFF) < m {
        return Err(Error::Richness(
            "input block is rank deficient; use a richer excitation".into(),
        ));
    }
    let residue = d.drift(coupling) - d.drift_bar(coupling) * q;
    Ok(residue * linalg::pinv(&d.input, RANK_CUTOFF))
}

/// Evaluator of the closed-loop data-based drift `x -> (S+ - D W) G Z(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedLoopRep {
    dict: Dictionary,
    /// `(S+ - D W) G`, `n x z`.
    matrix: DMatrix<f64>,
}

impl ClosedLoopRep {
    pub fn eval(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(&self.matrix * self.dict.eval(x)?)
    }

    /// The `n x z` representation matrix.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dictionary(&self) -> &Dictionary {
        &self.dict
    }

    pub fn from_matrix(dict: Dictionary, matrix: DMatrix<f64>) -> Self {
        ClosedLoopRep { dict, matrix }
    }
}

/// Build the closed-loop representation for a right inverse `G` of the
/// dictionary block (`Delta G = I_z`).
pub fn closed_loop_rep(
    d: &DataMatrices,
    coupling: &DMatrix<f64>,
    g: &DMatrix<f64>,
) -> Result<ClosedLoopRep> {
    let z = d.delta.nrows();
    let residual = linalg::max_abs(&(&d.delta * g - DMatrix::identity(z, z)));
    if residual > 1e-8 {
        return Err(Error::Validation(format!(
            "G is not a right inverse of the dictionary block: residual {residual:.3e} > 1e-8"
        )));
    }
    Ok(ClosedLoopRep {
        dict: d.dict.clone(),
        matrix: d.drift(coupling) * g,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        assemble_network, benchmark_network, benchmark_subsystem, PerturbationSpec, Topology,
        TopologyKind,
    };
    use nalgebra::dvector;

    fn desk_network() -> NetworkModel {
        benchmark_network(TopologyKind::Ring, 3, None, PerturbationSpec::None, 0.0).unwrap()
    }

    #[test]
    fn ten_samples_give_ten_columns() {
        let net = desk_network();
        // the benchmark sample budget: ten samples at a hundredth of a second
        let cfg = ExperimentConfig {
            sampling_interval: 0.01,
            ..ExperimentConfig::default()
        };
        let d = collect_trajectories(&net, 0, &cfg).unwrap();
        assert_eq!(d.input.ncols(), 10);
        assert_eq!(d.states.ncols(), 10);
        assert_eq!(d.internal.ncols(), 10);
        assert_eq!(d.derivs.ncols(), 10);
        assert_eq!(d.delta.ncols(), 10);
        assert_eq!(d.delta.nrows(), 9);
        assert_eq!(d.internal.nrows(), 4);
        // both runs share the initial state
        assert_eq!(d.states.column(0), d.states_bar.column(0));
        assert_eq!(d.x0, d.states.column(0).into_owned());
    }

    #[test]
    fn replaying_a_seed_is_bit_identical() {
        let net = desk_network();
        let cfg = ExperimentConfig {
            seed: 42,
            ..ExperimentConfig::default()
        };
        let a = collect_trajectories(&net, 1, &cfg).unwrap();
        let b = collect_trajectories(&net, 1, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_state_zero_excitation_rests_at_equilibrium() {
        // needs a dictionary with Z(0) = 0: drop the cosine entry
        let dict = Dictionary::parse_terms(&["x1", "x2", "x1^2", "x1*x2", "ln(1+x2^2)"]).unwrap();
        let a = DMatrix::from_row_slice(
            2,
            5,
            &[1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0],
        );
        let b = DMatrix::from_column_slice(2, 1, &[0.0, 1.0]);
        let sub = crate::model::SubsystemModel::new(a, b, dict, PerturbationSpec::None, 0.0)
            .unwrap();
        let dims = vec![2, 2];
        let topo = crate::model::build_topology(TopologyKind::Line, 2, &dims, None).unwrap();
        let net = assemble_network(vec![sub.clone(), sub], topo).unwrap();
        let cfg = ExperimentConfig {
            samples: 6,
            x0_radius: 0.0,
            excitation_amplitude: 0.0,
            ..ExperimentConfig::default()
        };
        let d = collect_trajectories(&net, 0, &cfg).unwrap();
        assert!(d.states_bar.iter().all(|&v| v == 0.0));
        assert!(d.derivs_bar.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn forward_difference_is_exact_on_affine_signals() {
        let tau = 0.01;
        let states = DMatrix::from_fn(1, 6, |_, k| k as f64 * tau);
        let derivs = forward_differences(&states, tau);
        assert_eq!(derivs.ncols(), 5);
        for v in derivs.iter() {
            assert!((v - 1.0).abs() < 1e-12);
        }
        let constant = DMatrix::from_element(2, 6, 3.25);
        assert!(forward_differences(&constant, tau).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn estimate_derivatives_modes_agree_with_collection() {
        let net = desk_network();
        let cfg = ExperimentConfig {
            seed: 21,
            ..ExperimentConfig::default()
        };
        let d = collect_trajectories(&net, 0, &cfg).unwrap();
        let exact = estimate_derivatives(
            &net,
            0,
            &d.states,
            &d.input,
            &d.internal,
            cfg.sampling_interval,
            DerivativeMode::ExactOracle,
        )
        .unwrap();
        assert_eq!(exact, d.derivs);
        // forward differences demand the extra state column
        assert!(estimate_derivatives(
            &net,
            0,
            &d.states,
            &d.input,
            &d.internal,
            cfg.sampling_interval,
            DerivativeMode::ForwardDifference,
        )
        .is_err());
    }

    #[test]
    fn forward_difference_error_scales_linearly_with_tau() {
        let net = desk_network();
        let mut errs = Vec::new();
        for tau in [1e-2, 1e-3, 1e-4] {
            let exact_cfg = ExperimentConfig {
                sampling_interval: tau,
                seed: 5,
                ..ExperimentConfig::default()
            };
            let fd_cfg = ExperimentConfig {
                derivative_mode: DerivativeMode::ForwardDifference,
                ..exact_cfg.clone()
            };
            let de = collect_trajectories(&net, 0, &exact_cfg).unwrap();
            let df = collect_trajectories(&net, 0, &fd_cfg).unwrap();
            errs.push(linalg::max_abs(&(&de.derivs - &df.derivs)));
        }
        // each tenfold tau reduction shrinks the error by roughly tenfold
        assert!(errs[0] / errs[1] > 3.0, "errs = {errs:?}");
        assert!(errs[1] / errs[2] > 3.0, "errs = {errs:?}");
        // measured constant in error <= C * tau
        let c = errs[0] / 1e-2;
        assert!(c.is_finite() && c > 0.0);
    }

    #[test]
    fn richness_passes_generically_and_fails_short_runs() {
        let net = desk_network();
        let cfg = ExperimentConfig {
            seed: 3,
            ..ExperimentConfig::default()
        };
        let d = collect_trajectories(&net, 0, &cfg).unwrap();
        let report = check_richness(&d);
        assert!(report.ok(), "report = {report:?}");

        // too few samples is rejected up front
        let short = ExperimentConfig {
            samples: 5,
            ..cfg.clone()
        };
        assert!(collect_trajectories(&net, 0, &short).is_err());

        // duplicated columns are rank deficient and flagged
        let mut dup = d.clone();
        let col0 = dup.delta.column(0).into_owned();
        for k in 0..dup.delta.ncols() {
            dup.delta.set_column(k, &col0);
        }
        let report = check_richness(&dup);
        assert!(!report.delta_full_rank);
        assert!(report.retry_hint().is_some());
    }

    #[test]
    fn solve_q_consistency_and_constructed_case() {
        let net = desk_network();
        let cfg = ExperimentConfig {
            seed: 11,
            ..ExperimentConfig::default()
        };
        let d = collect_trajectories(&net, 2, &cfg).unwrap();

        // consistent case: factoring a block through itself
        let q = solve_q(&d.delta_bar, &d.delta_bar).unwrap();
        let projector = linalg::pinv(&d.delta_bar, RANK_CUTOFF) * &d.delta_bar;
        assert!(linalg::max_abs(&(&q - &projector)) < 1e-10);

        // constructed right factor
        let t = d.samples();
        let r = DMatrix::from_fn(t, t, |i, j| ((i * 7 + j * 3) % 5) as f64 / 5.0 - 0.4);
        let target = &d.delta_bar * &r;
        let q = solve_q(&target, &d.delta_bar).unwrap();
        let residual = linalg::spectral_norm(&(&d.delta_bar * q - &target));
        assert!(residual < 1e-8 * (1.0 + linalg::spectral_norm(&target)));

        // rank-deficient left factor
        let deficient = DMatrix::<f64>::zeros(9, t);
        assert!(solve_q(&d.delta, &deficient).is_err());
    }

    #[test]
    fn estimate_b_recovers_the_oracle() {
        let net = desk_network();
        let cfg = ExperimentConfig {
            seed: 9,
            ..ExperimentConfig::default()
        };
        let d = collect_trajectories(&net, 0, &cfg).unwrap();
        let coupling = net.coupling_matrix(0);
        let q = solve_q(&d.delta, &d.delta_bar).unwrap();
        let b_hat = estimate_b(&d, &q, &coupling).unwrap();
        let err = linalg::max_abs(&(&b_hat - net.subsystem(0).true_b()));
        assert!(err < 1e-6, "err = {err:.3e}");
    }

    #[test]
    fn estimate_b_reduces_without_coupling() {
        // isolated subsystem: psi = 0
        let sub = benchmark_subsystem(PerturbationSpec::None, 0.0);
        let topo = Topology::custom(2, vec![]).unwrap();
        let net = assemble_network(vec![sub.clone(), sub], topo).unwrap();
        let cfg = ExperimentConfig {
            seed: 13,
            ..ExperimentConfig::default()
        };
        let d = collect_trajectories(&net, 0, &cfg).unwrap();
        let coupling = net.coupling_matrix(0);
        let q = solve_q(&d.delta, &d.delta_bar).unwrap();
        let full = estimate_b(&d, &q, &coupling).unwrap();
        let reduced = (&d.derivs - &d.derivs_bar * &q) * linalg::pinv(&d.input, RANK_CUTOFF);
        assert!(linalg::max_abs(&(&full - &reduced)) < 1e-12);
    }

    #[test]
    fn closed_loop_rep_matches_the_oracle() {
        let net = desk_network();
        let cfg = ExperimentConfig {
            seed: 17,
            ..ExperimentConfig::default()
        };
        let d = collect_trajectories(&net, 1, &cfg).unwrap();
        let coupling = net.coupling_matrix(1);
        // any right inverse of the dictionary block works
        let g = linalg::pinv(&d.delta, RANK_CUTOFF);
        let rep = closed_loop_rep(&d, &coupling, &g).unwrap();
        let k = &d.input * &g; // induced feedback gain
        let sub = net.subsystem(1);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..100 {
            let x = dvector![
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0)
            ];
            let z = sub.dictionary().eval(&x).unwrap();
            let oracle = sub.true_a() * &z + sub.true_b() * (&k * &z);
            let data = rep.eval(&x).unwrap();
            let bound = 1e-8 * (1.0 + z.norm());
            assert!((oracle - data).norm() < bound);
        }
    }

    #[test]
    fn closed_loop_rep_rejects_non_inverses() {
        let net = desk_network();
        let d = collect_trajectories(&net, 0, &ExperimentConfig::default()).unwrap();
        let coupling = net.coupling_matrix(0);
        let g = DMatrix::zeros(d.samples(), 9);
        assert!(closed_loop_rep(&d, &coupling, &g).is_err());
    }

    #[test]
    fn rep_vanishes_at_origin_for_vanishing_dictionaries() {
        let dict = Dictionary::parse_terms(&["x1", "x2", "x1*x2"]).unwrap();
        let a = DMatrix::from_row_slice(2, 3, &[0.0, 1.0, 0.0, -1.0, -1.0, 1.0]);
        let b = DMatrix::from_column_slice(2, 1, &[0.0, 1.0]);
        let sub = crate::model::SubsystemModel::new(a, b, dict, PerturbationSpec::None, 0.0)
            .unwrap();
        let topo = Topology::custom(2, vec![]).unwrap();
        let net = assemble_network(vec![sub.clone(), sub], topo).unwrap();
        let cfg = ExperimentConfig {
            samples: 5,
            seed: 23,
            ..ExperimentConfig::default()
        };
        let d = collect_trajectories(&net, 0, &cfg).unwrap();
        let coupling = net.coupling_matrix(0);
        let g = linalg::pinv(&d.delta, RANK_CUTOFF);
        let rep = closed_loop_rep(&d, &coupling, &g).unwrap();
        let at_zero = rep.eval(&dvector![0.0, 0.0]).unwrap();
        assert!(at_zero.norm() < 1e-12);
    }
}

