use clap::{ArgAction, Args, Parser, Subcommand};
use netism::exec::Parallelism;
use netism::model::TopologyKind;
use netism_cli::pipeline::{
    self, load_compose, load_state, run_pipeline, stage_collect, stage_compose, stage_ism,
    stage_simulate, stage_synthesize, stage_verify, PipelineOptions,
};
use netism_cli::report::render_table;
use netism_cli::{exit_code_for, PipelineConfig};
use std::path::PathBuf;
use std::process::ExitCode;

/// Data-driven synthesis of network controllers: collect two trajectories
/// per subsystem, solve the local semidefinite programs, design the sliding
/// components, check the small-gain condition, and verify the closed loop.
#[derive(Parser)]
#[command(name = "netism", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Pipeline configuration file (JSON). A built-in benchmark
    /// configuration is used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Artifact directory.
    #[arg(long, env = "NETISM_OUT_DIR", default_value = "netism-out")]
    out_dir: PathBuf,
    /// Override every stage seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Topology of the built-in benchmark configuration
    /// (fully_connected | ring | binary_tree | star | line).
    #[arg(long)]
    topology: Option<String>,
    /// Subsystem count of the built-in benchmark configuration.
    #[arg(long)]
    n: Option<usize>,
    /// Composition retry budget (fresh trajectories per retry).
    #[arg(long, default_value_t = 2)]
    retries: usize,
    /// Parallelize per-subsystem stages.
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    parallel: bool,
    /// Cap the subsystem count and horizon at desk scale.
    #[arg(long)]
    desk_scale: bool,
    /// Solve every subsystem separately even when identical.
    #[arg(long)]
    no_reuse: bool,
}

impl Common {
    fn config(&self) -> Result<PipelineConfig, netism::Error> {
        if let Some(path) = &self.config {
            let cfg: PipelineConfig = netism::artifact::read_json(path)?;
            cfg.validate()?;
            return Ok(cfg);
        }
        let kind = match self.topology.as_deref() {
            None => TopologyKind::Ring,
            Some(name) => serde_json::from_value(serde_json::json!(name)).map_err(|_| {
                netism::Error::Config(format!("unknown topology `{name}`"))
            })?,
        };
        Ok(PipelineConfig::benchmark(kind, self.n.unwrap_or(10)))
    }

    fn options(&self) -> PipelineOptions {
        PipelineOptions {
            out_dir: self.out_dir.clone(),
            seed: self.seed,
            retries: self.retries,
            reuse: !self.no_reuse,
            parallelism: if self.parallel {
                Parallelism::auto()
            } else {
                Parallelism::Sequential
            },
            desk_scale: self.desk_scale,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Collect the two input-state trajectories per subsystem class.
    Collect(Common),
    /// Solve the local semidefinite programs on collected data.
    Synthesize(Common),
    /// Design the integral sliding-mode components.
    Ism(Common),
    /// Check the small-gain condition and compose the network certificate.
    Compose(Common),
    /// Simulate the closed loop and dump the trajectory logs.
    Simulate(Common),
    /// Re-check provenance, certificates, and closed-loop verdicts.
    Verify(Common),
    /// Run every stage in order with the composition retry loop.
    Run(Common),
    /// Render the result table from a completed run.
    Report(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err) as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<u8, netism::Error> {
    match cli.command {
        Command::Collect(common) => {
            let cfg = common.config()?;
            let opts = common.options();
            let out = stage_collect(&cfg, &opts, 0)?;
            for (c, report) in out.richness.iter().enumerate() {
                println!(
                    "class {c} (subsystem {}): rank {}/{} excited, {}/{} zero-input",
                    out.classes.reps[c],
                    report.rank_delta,
                    report.rows,
                    report.rank_delta_bar,
                    report.rows
                );
            }
            println!(
                "collected {} classes for {} subsystems into {}",
                out.classes.reps.len(),
                out.classes.representative.len(),
                opts.out_dir.display()
            );
            Ok(0)
        }
        Command::Synthesize(common) => {
            let opts = common.options();
            let state = load_state(&opts.out_dir, opts.parallelism, false)?;
            let kappa = state.cfg.synthesis.options.kappa;
            let mu = state.cfg.synthesis.options.mu;
            let certs = stage_synthesize(&state.cfg, &opts, &state.collect, kappa, mu)?;
            for art in &certs {
                println!(
                    "subsystem {}: alpha1 = {:.4}, alpha2 = {:.4}, rho = {:.4e}",
                    art.subsystem,
                    art.certificate.alpha1,
                    art.certificate.alpha2,
                    art.certificate.rho
                );
            }
            Ok(0)
        }
        Command::Ism(common) => {
            let opts = common.options();
            let state = load_state(&opts.out_dir, opts.parallelism, true)?;
            let mut certs = state.certs;
            stage_ism(&state.cfg, &opts, &state.collect, &mut certs)?;
            for art in &certs {
                let d = art.ism.as_ref().expect("designed");
                println!(
                    "subsystem {}: theta = {:.4}, lambda(CB) in [{:.4e}, {:.4e}]",
                    art.subsystem, d.controller.theta, d.controller.cb_lambda_min,
                    d.controller.cb_lambda_max
                );
            }
            Ok(0)
        }
        Command::Compose(common) => {
            let opts = common.options();
            let state = load_state(&opts.out_dir, opts.parallelism, true)?;
            let compose = stage_compose(&state.cfg, &opts, &state.collect, &state.certs)?;
            println!(
                "max column sum = {:.6e}, feasible = {}",
                compose.network.max_xi(),
                compose.network.feasible
            );
            match compose.network.kappa {
                Some(kappa) => {
                    println!(
                        "network kappa = {kappa:.6}, alpha1 = {:.4}, alpha2 = {:.4}",
                        compose.network.alpha1, compose.network.alpha2
                    );
                    Ok(0)
                }
                None => Err(netism::Error::CompositionInfeasible {
                    max_xi: compose.network.max_xi(),
                }),
            }
        }
        Command::Simulate(common) => {
            let opts = common.options();
            let state = load_state(&opts.out_dir, opts.parallelism, true)?;
            let sim = stage_simulate(&state.cfg, &opts, &state.collect, &state.certs)?;
            match &sim.log.aborted {
                Some(diag) => {
                    println!("simulation aborted: {diag}");
                    Err(netism::Error::Divergence {
                        time: sim.log.final_time(),
                        norm: *sim.log.norm_x.last().unwrap_or(&f64::NAN),
                    })
                }
                None => {
                    println!(
                        "simulated {} steps; |x(0)| = {:.4e}, |x(T)| = {:.4e}",
                        sim.log.len - 1,
                        sim.log.norm_x.first().unwrap(),
                        sim.log.norm_x.last().unwrap()
                    );
                    Ok(0)
                }
            }
        }
        Command::Verify(common) => {
            let opts = common.options();
            let state = load_state(&opts.out_dir, opts.parallelism, true)?;
            let compose = load_compose(&opts.out_dir)?;
            // deterministic replay reproduces the logged run exactly
            let sim = stage_simulate(&state.cfg, &opts, &state.collect, &state.certs)?;
            let verify = stage_verify(&state.cfg, &opts, &state.collect, &state.certs, &compose, &sim)?;
            println!("gas: {}", verify.gas.passed);
            if let Some(s) = &verify.sliding {
                println!("sliding: {} (max |sigma| = {:.4e})", s.passed, s.max_abs_sigma);
            }
            if let Some(d) = &verify.decay {
                println!("decay: fraction {:.6}", d.fraction);
            }
            println!(
                "mc violations: {}",
                verify.mc.iter().map(|m| m.violations).sum::<usize>()
            );
            let run_id = netism::artifact::fnv64(
                serde_json::to_string(&state.cfg).unwrap_or_default().as_bytes(),
            );
            let summary = pipeline::build_summary(
                &state.cfg,
                &opts,
                run_id,
                1,
                &state.collect,
                &state.certs,
                &compose,
                &sim,
                &verify,
                Default::default(),
            );
            netism::artifact::write_json(&pipeline::summary_path(&opts.out_dir), &summary)?;
            if verify.verdicts.all_passed() {
                Ok(0)
            } else {
                Ok(3)
            }
        }
        Command::Run(common) => {
            let cfg = common.config()?;
            let opts = common.options();
            let run = run_pipeline(&cfg, &opts)?;
            let table = render_table(std::slice::from_ref(&run.summary));
            print!("{table}");
            netism::artifact::write_string(&opts.out_dir.join("report.txt"), &table)?;
            if run.summary.verdicts.all_passed() {
                Ok(0)
            } else {
                Ok(3)
            }
        }
        Command::Report(common) => {
            let opts = common.options();
            let summary: netism_cli::Summary =
                netism::artifact::read_json(&pipeline::summary_path(&opts.out_dir))?;
            let table = render_table(std::slice::from_ref(&summary));
            print!("{table}");
            netism::artifact::write_string(&opts.out_dir.join("report.txt"), &table)?;
            Ok(0)
        }
    }
}
