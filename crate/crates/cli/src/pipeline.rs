//! Staged pipeline execution with artifact persistence.

use crate::config::PipelineConfig;
use crate::report::{Summary, Timings, Verdicts};
use nalgebra::DMatrix;
use netism::artifact::{
    self, certificate_path, CertificateArtifact, CompositionArtifact, Provenance,
};
use netism::composition::{self, CertificateGains};
use netism::error::{Error, Result};
use netism::exec::{self, Parallelism};
use netism::experiment::{
    check_richness, collect_trajectories, estimate_b, solve_q, DataMatrices, RichnessReport,
};
use netism::ism::{IsmController, IsmDesign};
use netism::model::NetworkModel;
use netism::sim::{
    monte_carlo_iss, simulate, verify_clf_decay, verify_gas, verify_sliding, ClfDecayReport,
    ControlLaw, ControllerMode, GasReport, IssMcReport, SlidingReport, TrajectoryLog,
};
use netism::synthesis::synthesize_iss;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, Clone)]
pub struct PipelineOptions {
    pub out_dir: PathBuf,
    /// Overrides every stage seed when set.
    pub seed: Option<u64>,
    /// Composition retry budget: fresh trajectories with longer horizons.
    pub retries: usize,
    /// Share one collection and one solve across identical subsystems.
    pub reuse: bool,
    pub parallelism: Parallelism,
    /// Cap the subsystem count and horizon at desk scale.
    pub desk_scale: bool,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            out_dir: PathBuf::from("netism-out"),
            seed: None,
            retries: 2,
            reuse: true,
            parallelism: Parallelism::auto(),
            desk_scale: false,
        }
    }
}

/// Mapping of subsystems onto solver classes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Classes {
    /// Representative subsystem per subsystem.
    pub representative: Vec<usize>,
    /// Distinct representatives in ascending order.
    pub reps: Vec<usize>,
}

impl Classes {
    pub fn rep_index(&self, rep: usize) -> usize {
        self.reps.iter().position(|&r| r == rep).expect("known rep")
    }
}

/// Group identical subsystems: same dictionary, oracle matrices,
/// perturbation, bound, and multiset of incoming coupling blocks.
pub fn subsystem_classes(net: &NetworkModel, reuse: bool) -> Classes {
    let n = net.len();
    if !reuse {
        return Classes {
            representative: (0..n).collect(),
            reps: (0..n).collect(),
        };
    }
    let signature = |i: usize| -> String {
        let sub = net.subsystem(i);
        let mut bytes: Vec<u8> = Vec::new();
        for t in sub.dictionary().terms() {
            bytes.extend_from_slice(t.to_string().as_bytes());
            bytes.push(b';');
        }
        for &v in sub.true_a().iter().chain(sub.true_b().iter()) {
            bytes.extend_from_slice(&v.to_bits().to_le_bytes());
        }
        bytes.extend_from_slice(
            serde_json::to_string(sub.perturbation())
                .unwrap_or_default()
                .as_bytes(),
        );
        bytes.extend_from_slice(&sub.gamma_sup().to_bits().to_le_bytes());
        let mut edge_blobs: Vec<Vec<u8>> = net
            .in_edge_indices(i)
            .iter()
            .map(|&k| {
                net.topology().edges[k]
                    .weight
                    .iter()
                    .flat_map(|v| v.to_bits().to_le_bytes())
                    .collect()
            })
            .collect();
        edge_blobs.sort();
        for blob in edge_blobs {
            bytes.extend_from_slice(&blob);
            bytes.push(b'|');
        }
        artifact::fnv64(&bytes)
    };
    let mut first_of: std::collections::BTreeMap<String, usize> = Default::default();
    let mut representative = Vec::with_capacity(n);
    for i in 0..n {
        let sig = signature(i);
        let rep = *first_of.entry(sig).or_insert(i);
        representative.push(rep);
    }
    let mut reps: Vec<usize> = first_of.values().copied().collect();
    reps.sort_unstable();
    Classes {
        representative,
        reps,
    }
}

fn data_dir(out: &Path) -> PathBuf {
    out.join("data")
}

fn certs_dir(out: &Path) -> PathBuf {
    out.join("certs")
}

fn logs_dir(out: &Path) -> PathBuf {
    out.join("logs")
}

pub fn config_path(out: &Path) -> PathBuf {
    out.join("config.json")
}

pub fn classes_path(out: &Path) -> PathBuf {
    out.join("classes.json")
}

pub fn compose_path(out: &Path) -> PathBuf {
    out.join("compose.json")
}

pub fn summary_path(out: &Path) -> PathBuf {
    out.join("summary.json")
}

/// Collected artifacts of one attempt.
pub struct CollectOutput {
    pub net: NetworkModel,
    pub classes: Classes,
    pub data: Vec<DataMatrices>,
    pub richness: Vec<RichnessReport>,
    pub files: Vec<(PathBuf, PathBuf)>,
}

/// Collect the two trajectories for every representative subsystem and dump
/// them; fails when any dictionary block is rank deficient.
pub fn stage_collect(
    cfg: &PipelineConfig,
    opts: &PipelineOptions,
    attempt: usize,
) -> Result<CollectOutput> {
    let net = cfg.network.build()?;
    if !net.is_empty() && !net.subsystem(0).dictionary().vanishes_at_origin() {
        eprintln!(
            "warning: dictionary does not vanish at the origin; the origin is an \
             equilibrium only after the feedback cancels the offending terms"
        );
    }
    let classes = subsystem_classes(&net, opts.reuse);
    let mut exp = cfg.experiment.clone();
    if let Some(seed) = opts.seed {
        exp.seed = seed;
    }
    // retry path: fresh seed, half again as many samples per attempt
    if attempt > 0 {
        exp.seed = exp.seed.wrapping_add(attempt as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let grow = 1.5f64.powi(attempt as i32);
        exp.samples = ((exp.samples as f64) * grow).ceil() as usize;
    }

    let results = exec::map_indexed(opts.parallelism, classes.reps.len(), |c| {
        collect_trajectories(&net, classes.reps[c], &exp)
    });
    let mut data = Vec::with_capacity(results.len());
    for r in results {
        data.push(r?);
    }

    let richness: Vec<RichnessReport> = data.iter().map(check_richness).collect();
    if let Some(report) = richness.iter().find(|r| !r.ok()) {
        return Err(Error::Richness(report.retry_hint().unwrap_or_default()));
    }

    let dir = data_dir(&opts.out_dir);
    let mut files = Vec::new();
    for (c, d) in data.iter().enumerate() {
        files.push(artifact::write_trajectory_pair(
            &dir,
            classes.reps[c],
            d,
            exp.sampling_interval,
        )?);
    }
    let mut stored = cfg.clone();
    stored.experiment = exp;
    artifact::write_json(&config_path(&opts.out_dir), &stored)?;
    artifact::write_json(&classes_path(&opts.out_dir), &classes)?;
    Ok(CollectOutput {
        net,
        classes,
        data,
        richness,
        files,
    })
}

/// Synthesize one validated certificate per class at the given decay
/// rate/weight pair and persist the artifacts.
pub fn stage_synthesize(
    cfg: &PipelineConfig,
    opts: &PipelineOptions,
    collect: &CollectOutput,
    kappa: f64,
    mu: f64,
) -> Result<Vec<CertificateArtifact>> {
    let mut synth_opt = cfg.synthesis.options.clone();
    synth_opt.kappa = kappa;
    synth_opt.mu = mu;

    let results = exec::map_indexed(opts.parallelism, collect.classes.reps.len(), |c| {
        let rep = collect.classes.reps[c];
        let coupling = collect.net.coupling_matrix(rep);
        synthesize_iss(&collect.data[c], &coupling, &synth_opt).map(|cert| (rep, cert))
    });

    let mut artifacts = Vec::with_capacity(results.len());
    for (c, r) in results.into_iter().enumerate() {
        let (rep, certificate) = r?;
        let mut provenance = Provenance::default();
        provenance.record(&opts.out_dir, &collect.files[c].0)?;
        provenance.record(&opts.out_dir, &collect.files[c].1)?;
        let art = CertificateArtifact {
            subsystem: rep,
            certificate,
            options: synth_opt.clone(),
            ism: None,
            provenance,
        };
        artifact::write_json(&certificate_path(&certs_dir(&opts.out_dir), rep), &art)?;
        artifacts.push(art);
    }
    Ok(artifacts)
}

/// Design the sliding-mode component per class and append it to the
/// certificate artifacts.
pub fn stage_ism(
    cfg: &PipelineConfig,
    opts: &PipelineOptions,
    collect: &CollectOutput,
    certs: &mut [CertificateArtifact],
) -> Result<()> {
    let c_override: Option<DMatrix<f64>> = cfg.ism.c_override.as_ref().map(|rows| {
        DMatrix::from_fn(rows.len(), rows.first().map_or(0, |r| r.len()), |r, c| {
            rows[r][c]
        })
    });
    for (c, art) in certs.iter_mut().enumerate() {
        let rep = art.subsystem;
        let d = &collect.data[c];
        let coupling = collect.net.coupling_matrix(rep);
        let q = solve_q(&d.delta, &d.delta_bar)?;
        let b_hat = estimate_b(d, &q, &coupling)?;
        let controller = IsmController::design(
            &b_hat,
            c_override.as_ref(),
            collect.net.subsystem(rep).gamma_sup(),
            cfg.ism.margin,
            cfg.ism.regularization(),
        )?;
        art.ism = Some(IsmDesign { controller, b_hat });
        artifact::write_json(&certificate_path(&certs_dir(&opts.out_dir), rep), art)?;
    }
    Ok(())
}

/// Compose the per-subsystem gains over the topology and persist the
/// report; infeasibility is reported in the artifact, not as an error.
pub fn stage_compose(
    cfg: &PipelineConfig,
    opts: &PipelineOptions,
    collect: &CollectOutput,
    certs: &[CertificateArtifact],
) -> Result<CompositionArtifact> {
    let gains: Vec<CertificateGains> = (0..collect.net.len())
        .map(|i| {
            let class = collect.classes.rep_index(collect.classes.representative[i]);
            let mut g = CertificateGains::from(&certs[class].certificate);
            // rho is a per-subsystem quantity: recompute it from this
            // subsystem's own coupling row
            let coupling = collect.net.coupling_matrix(i);
            let norm = netism::linalg::spectral_norm(&coupling);
            g.rho = norm * norm / certs[class].certificate.mu;
            g
        })
        .collect();
    let network = composition::compose(&gains, collect.net.topology(), cfg.synthesis.strict_dense)?;
    let mut provenance = Provenance::default();
    for rep in &collect.classes.reps {
        provenance.record(&opts.out_dir, &certificate_path(&certs_dir(&opts.out_dir), *rep))?;
    }
    // the stored configuration pins the topology the gains were composed over
    provenance.record(&opts.out_dir, &config_path(&opts.out_dir))?;
    let art = CompositionArtifact {
        network,
        provenance,
    };
    artifact::write_json(&compose_path(&opts.out_dir), &art)?;
    artifact::write_xi_table(&opts.out_dir.join("xi.csv"), &art.network.xi)?;
    Ok(art)
}

/// Build the per-subsystem control bundles from class artifacts.
pub fn control_laws(
    net: &NetworkModel,
    classes: &Classes,
    certs: &[CertificateArtifact],
) -> Result<(Vec<ControlLaw>, Vec<IsmController>)> {
    let mut laws = Vec::with_capacity(net.len());
    let mut isms = Vec::with_capacity(net.len());
    for i in 0..net.len() {
        let class = classes.rep_index(classes.representative[i]);
        let art = &certs[class];
        laws.push(ControlLaw::from_certificate(
            &art.certificate,
            net.subsystem(i).dictionary().clone(),
        ));
        if let Some(design) = &art.ism {
            isms.push(design.controller.clone());
        }
    }
    if isms.len() != net.len() && !isms.is_empty() {
        return Err(Error::Config(
            "some certificates lack a sliding-mode design".into(),
        ));
    }
    Ok((laws, isms))
}

pub struct SimulateOutput {
    pub log: TrajectoryLog,
    pub nominal_log: Option<TrajectoryLog>,
}

/// Run the configured closed-loop simulation (plus the nominal companion
/// for the decay check) and dump the log files.
pub fn stage_simulate(
    cfg: &PipelineConfig,
    opts: &PipelineOptions,
    collect: &CollectOutput,
    certs: &[CertificateArtifact],
) -> Result<SimulateOutput> {
    let (laws, isms) = control_laws(&collect.net, &collect.classes, certs)?;
    let mut sim_cfg = cfg.sim.clone();
    sim_cfg.parallelism = opts.parallelism;
    if let Some(seed) = opts.seed {
        sim_cfg.seed = seed;
    }
    if opts.desk_scale {
        sim_cfg.horizon = sim_cfg.horizon.min(10.0);
    }
    let ism_arg = if sim_cfg.controllers == ControllerMode::IssPlusIsm {
        Some(&isms[..])
    } else {
        None
    };
    let law_arg = if sim_cfg.controllers == ControllerMode::None {
        None
    } else {
        Some(&laws[..])
    };
    let log = simulate(&collect.net, law_arg, ism_arg, &sim_cfg)?;

    let dir = logs_dir(&opts.out_dir);
    artifact::write_series(&dir.join("norm_x.csv"), &log, &log.norm_x)?;
    artifact::write_series(&dir.join("clf.csv"), &log, &log.clf)?;
    let stride = (log.hist_steps.len() / 2000).max(1);
    artifact::write_trajectory_csv(&dir.join("trajectory.csv"), &log, stride)?;
    if sim_cfg.controllers == ControllerMode::IssPlusIsm {
        artifact::write_sigma_series(&dir.join("sigma.csv"), &log, stride)?;
        let sigma_max: Vec<(f64, f64)> = (0..log.hist_steps.len())
            .map(|j| {
                let v = log
                    .sigma
                    .iter()
                    .map(|s| s.column(j).amax())
                    .fold(0.0f64, f64::max);
                (log.time(log.hist_steps[j]), v)
            })
            .collect();
        artifact::write_pairs(&dir.join("sigma_max.csv"), &sigma_max)?;
    }

    let nominal_log = if cfg.verify.check_nominal_decay {
        let mut nom = sim_cfg.clone();
        nom.perturbation = false;
        nom.controllers = ControllerMode::IssOnly;
        let nlog = simulate(&collect.net, Some(&laws), None, &nom)?;
        let ndir = opts.out_dir.join("logs_nominal");
        artifact::write_series(&ndir.join("norm_x.csv"), &nlog, &nlog.norm_x)?;
        artifact::write_series(&ndir.join("clf.csv"), &nlog, &nlog.clf)?;
        Some(nlog)
    } else {
        None
    };
    Ok(SimulateOutput { log, nominal_log })
}

pub struct VerifyOutput {
    pub gas: GasReport,
    pub sliding: Option<SlidingReport>,
    pub decay: Option<ClfDecayReport>,
    pub mc: Vec<IssMcReport>,
    pub verdicts: Verdicts,
}

/// Run the verification suites over the simulation output and the
/// certificates.
pub fn stage_verify(
    cfg: &PipelineConfig,
    opts: &PipelineOptions,
    collect: &CollectOutput,
    certs: &[CertificateArtifact],
    compose: &CompositionArtifact,
    sim: &SimulateOutput,
) -> Result<VerifyOutput> {
    // provenance chain: certificates against data files, composition
    // against certificates and the stored configuration
    for art in certs {
        art.provenance.verify(&opts.out_dir)?;
    }
    compose.provenance.verify(&opts.out_dir)?;

    let gas = verify_gas(&sim.log, &cfg.verify.gas);

    let sliding = if cfg.sim.controllers == ControllerMode::IssPlusIsm {
        let band = cfg.verify.sliding_band.unwrap_or_else(|| {
            certs
                .iter()
                .filter_map(|a| a.ism.as_ref())
                .map(|d| d.controller.sliding_band(cfg.sim.step))
                .fold(0.0f64, f64::max)
        });
        Some(verify_sliding(&sim.log, band))
    } else {
        None
    };

    let decay = match (&sim.nominal_log, compose.network.kappa) {
        (Some(nlog), Some(kappa)) => Some(verify_clf_decay(nlog, kappa, cfg.verify.clf_slack)),
        _ => None,
    };

    let mc: Vec<IssMcReport> = collect
        .classes
        .reps
        .iter()
        .enumerate()
        .map(|(c, &rep)| {
            let cert = &certs[c].certificate;
            let rep_eval = cert.closed_loop_rep(collect.net.subsystem(rep).dictionary().clone());
            let coupling = collect.net.coupling_matrix(rep);
            monte_carlo_iss(
                cert,
                &rep_eval,
                &coupling,
                cfg.verify.mc_samples,
                cfg.verify.mc_radius,
                cfg.experiment.seed ^ 0x5eed,
            )
        })
        .collect();

    let verdicts = Verdicts {
        feasible: compose.network.feasible,
        gas: gas.passed,
        sliding: sliding.as_ref().map(|s| s.passed),
        decay: decay
            .as_ref()
            .map(|d| d.fraction >= cfg.verify.min_decay_fraction),
        mc: mc.iter().all(|r| r.violations == 0),
    };
    Ok(VerifyOutput {
        gas,
        sliding,
        decay,
        mc,
        verdicts,
    })
}

/// Assemble the run summary from stage outputs.
#[allow(clippy::too_many_arguments)]
pub fn build_summary(
    cfg: &PipelineConfig,
    opts: &PipelineOptions,
    run_id: String,
    attempts: usize,
    collect: &CollectOutput,
    certs: &[CertificateArtifact],
    compose: &CompositionArtifact,
    sim: &SimulateOutput,
    verify: &VerifyOutput,
    timings: Timings,
) -> Summary {
    let (kappa_local, mu_local) = certs
        .first()
        .map(|a| (a.options.kappa, a.options.mu))
        .unwrap_or((cfg.synthesis.options.kappa, cfg.synthesis.options.mu));
    Summary {
        run_id,
        topology: cfg.network.topology,
        n_subsystems: cfg.network.n_subsystems,
        samples: artifact::read_json::<PipelineConfig>(&config_path(&opts.out_dir))
            .map(|c| c.experiment.samples)
            .unwrap_or(cfg.experiment.samples),
        attempts,
        kappa_local,
        mu_local,
        network_kappa: compose.network.kappa,
        alpha1: compose.network.alpha1,
        alpha2: compose.network.alpha2,
        max_xi: compose.network.max_xi(),
        classes: collect.classes.representative.clone(),
        richness: collect.richness.clone(),
        gas: Some(verify.gas.clone()),
        sliding: verify.sliding.clone(),
        decay: verify.decay.clone(),
        mc: verify.mc.clone(),
        verdicts: verify.verdicts.clone(),
        aborted: sim.log.aborted.clone(),
        timings,
    }
}

/// Completed pipeline state.
#[derive(Debug)]
pub struct PipelineRun {
    pub run_id: String,
    pub out_dir: PathBuf,
    pub summary: Summary,
}

/// Execute every stage with the composition retry loop: fresh data (new
/// seed, longer horizon) and the decay-rate/weight grid until the
/// small-gain condition holds or the budget runs out.
pub fn run_pipeline(cfg: &PipelineConfig, opts: &PipelineOptions) -> Result<PipelineRun> {
    let mut cfg = cfg.clone();
    if opts.desk_scale {
        cfg.network.n_subsystems = cfg.network.n_subsystems.min(16);
        cfg.sim.horizon = cfg.sim.horizon.min(10.0);
    }
    cfg.validate()?;
    let run_id = artifact::fnv64(
        format!(
            "{}|{:?}",
            serde_json::to_string(&cfg).unwrap_or_default(),
            opts.seed
        )
        .as_bytes(),
    );

    let grid = cfg.synthesis.grid();
    let mut timings = Timings::default();
    let mut attempts = 0usize;
    let mut chosen: Option<(CollectOutput, Vec<CertificateArtifact>, CompositionArtifact)> = None;
    let mut last_err: Option<Error> = None;

    'outer: for attempt in 0..=opts.retries {
        attempts = attempt + 1;
        let t0 = Instant::now();
        let collect = match stage_collect(&cfg, opts, attempt) {
            Ok(c) => c,
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        timings.collect_s += t0.elapsed().as_secs_f64();

        for &(kappa, mu) in &grid {
            let t1 = Instant::now();
            let mut certs = match stage_synthesize(&cfg, opts, &collect, kappa, mu) {
                Ok(c) => c,
                Err(e) => {
                    last_err = Some(e);
                    continue;
                }
            };
            timings.synthesize_s += t1.elapsed().as_secs_f64();

            let t2 = Instant::now();
            stage_ism(&cfg, opts, &collect, &mut certs)?;
            timings.ism_s += t2.elapsed().as_secs_f64();

            let t3 = Instant::now();
            let compose = stage_compose(&cfg, opts, &collect, &certs)?;
            timings.compose_s += t3.elapsed().as_secs_f64();

            if compose.network.feasible {
                chosen = Some((collect, certs, compose));
                break 'outer;
            }
            last_err = Some(Error::CompositionInfeasible {
                max_xi: compose.network.max_xi(),
            });
        }
    }

    let (collect, certs, compose) = match chosen {
        Some(v) => v,
        None => {
            return Err(last_err.unwrap_or(Error::Config(
                "pipeline failed without a recorded cause".into(),
            )))
        }
    };
    timings.solve_per_subsystem_s =
        timings.synthesize_s / collect.classes.representative.len() as f64;

    let t4 = Instant::now();
    let sim = stage_simulate(&cfg, opts, &collect, &certs)?;
    timings.simulate_s = t4.elapsed().as_secs_f64();

    let t5 = Instant::now();
    let verify = stage_verify(&cfg, opts, &collect, &certs, &compose, &sim)?;
    timings.verify_s = t5.elapsed().as_secs_f64();

    let summary = build_summary(
        &cfg, opts, run_id.clone(), attempts, &collect, &certs, &compose, &sim, &verify, timings,
    );
    artifact::write_json(&summary_path(&opts.out_dir), &summary)?;
    Ok(PipelineRun {
        run_id,
        out_dir: opts.out_dir.clone(),
        summary,
    })
}

/// Reload stage outputs for the standalone subcommands.
pub struct LoadedState {
    pub cfg: PipelineConfig,
    pub collect: CollectOutput,
    pub certs: Vec<CertificateArtifact>,
}

pub fn load_state(out_dir: &Path, parallelism: Parallelism, with_certs: bool) -> Result<LoadedState> {
    let cfg: PipelineConfig = artifact::read_json(&config_path(out_dir))?;
    let net = cfg.network.build()?;
    let classes: Classes = artifact::read_json(&classes_path(out_dir))?;
    let dict = cfg.network.dictionary()?;
    let dir = data_dir(out_dir);
    let mut data = Vec::new();
    let mut files = Vec::new();
    for &rep in &classes.reps {
        let excited = dir.join(format!("subsys_{rep:04}_excited.csv"));
        let zero = dir.join(format!("subsys_{rep:04}_zero.csv"));
        data.push(artifact::read_trajectory_pair(&excited, &zero, &dict)?);
        files.push((excited, zero));
    }
    let richness = data.iter().map(check_richness).collect();
    let certs = if with_certs {
        classes
            .reps
            .iter()
            .map(|&rep| artifact::read_json(&certificate_path(&certs_dir(out_dir), rep)))
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    let _ = parallelism;
    Ok(LoadedState {
        cfg,
        collect: CollectOutput {
            net,
            classes,
            data,
            richness,
            files,
        },
        certs,
    })
}

pub fn load_compose(out_dir: &Path) -> Result<CompositionArtifact> {
    artifact::read_json(&compose_path(out_dir))
}
