//! End-to-end checks of the staged pipeline and the binary.

use netism::artifact;
use netism::model::TopologyKind;
use netism_cli::pipeline::{run_pipeline, PipelineOptions};
use netism_cli::PipelineConfig;
use std::path::{Path, PathBuf};
use std::process::Command;

fn tmpdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("netism_cli_{name}_{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn quick_config(n: usize) -> PipelineConfig {
    let mut cfg = PipelineConfig::benchmark(TopologyKind::Ring, n);
    cfg.sim.horizon = 1.0;
    cfg.sim.x0 = netism::sim::X0Spec::Box(1.0);
    cfg.verify.gas.deadline = 1.0;
    cfg.verify.gas.shrink_factor = 0.9;
    cfg.verify.gas.residual_band = 0.9;
    cfg.verify.mc_samples = 500;
    cfg
}

fn opts(dir: &Path) -> PipelineOptions {
    PipelineOptions {
        out_dir: dir.to_path_buf(),
        seed: Some(11),
        ..PipelineOptions::default()
    }
}

#[test]
fn same_seed_reruns_produce_identical_artifacts() {
    let cfg = quick_config(3);
    let d1 = tmpdir("det_a");
    let d2 = tmpdir("det_b");
    run_pipeline(&cfg, &opts(&d1)).unwrap();
    run_pipeline(&cfg, &opts(&d2)).unwrap();
    for rel in [
        "data/subsys_0000_excited.csv",
        "data/subsys_0000_zero.csv",
        "certs/subsys_0000_certificate.json",
        "compose.json",
        "xi.csv",
        "logs/norm_x.csv",
        "logs/clf.csv",
        "logs/sigma_max.csv",
    ] {
        let a = artifact::hash_file(&d1.join(rel)).unwrap();
        let b = artifact::hash_file(&d2.join(rel)).unwrap();
        assert_eq!(a, b, "artifact {rel} differs between identical runs");
    }
    let _ = std::fs::remove_dir_all(&d1);
    let _ = std::fs::remove_dir_all(&d2);
}

#[test]
fn homogeneous_ring_collapses_to_one_class() {
    let cfg = quick_config(5);
    let dir = tmpdir("classes");
    let run = run_pipeline(&cfg, &opts(&dir)).unwrap();
    assert!(run.summary.classes.iter().all(|&r| r == 0));
    // certificates directory holds exactly the representative's artifact
    let certs: Vec<_> = std::fs::read_dir(dir.join("certs")).unwrap().collect();
    assert_eq!(certs.len(), 1);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn no_reuse_solves_every_subsystem() {
    let cfg = quick_config(3);
    let dir = tmpdir("noreuse");
    let mut o = opts(&dir);
    o.reuse = false;
    run_pipeline(&cfg, &o).unwrap();
    let certs: Vec<_> = std::fs::read_dir(dir.join("certs")).unwrap().collect();
    assert_eq!(certs.len(), 3);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn every_builtin_topology_passes_the_pipeline() {
    for (kind, n) in [
        (TopologyKind::FullyConnected, 5),
        (TopologyKind::Ring, 5),
        (TopologyKind::BinaryTree, 7),
        (TopologyKind::Star, 5),
        (TopologyKind::Line, 5),
    ] {
        let mut cfg = PipelineConfig::benchmark(kind, n);
        cfg.sim.horizon = 2.0;
        cfg.sim.x0 = netism::sim::X0Spec::Box(1.0);
        cfg.verify.gas.deadline = 2.0;
        cfg.verify.gas.shrink_factor = 0.3;
        cfg.verify.gas.residual_band = 0.05;
        cfg.verify.mc_samples = 500;
        let dir = tmpdir(&format!("topo_{kind:?}"));
        let run = run_pipeline(&cfg, &opts(&dir)).unwrap();
        assert!(
            run.summary.verdicts.all_passed(),
            "{kind:?}: {:?}",
            run.summary.verdicts
        );
        // star, line, and the tree have an uncoupled head node whose
        // in-edge signature differs: two solver classes
        let classes: std::collections::BTreeSet<usize> =
            run.summary.classes.iter().copied().collect();
        match kind {
            TopologyKind::Star | TopologyKind::Line | TopologyKind::BinaryTree => {
                assert_eq!(classes.len(), 2)
            }
            _ => assert_eq!(classes.len(), 1),
        }
        let _ = std::fs::remove_dir_all(&dir);
    }
}

#[test]
fn overconstrained_decay_rate_reports_the_lmi_family() {
    let mut cfg = quick_config(3);
    cfg.synthesis.options.kappa = 1e6;
    let dir = tmpdir("infeasible");
    let mut o = opts(&dir);
    o.retries = 0;
    let err = run_pipeline(&cfg, &o).unwrap_err();
    match &err {
        netism::Error::Infeasible { constraint, .. } => {
            assert_eq!(*constraint, netism::ConstraintFamily::DecayLmi);
        }
        other => panic!("expected a decay-LMI infeasibility, got {other}"),
    }
    assert_eq!(netism_cli::exit_code_for(&err), 2);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn grid_search_recovers_from_an_infeasible_base_point() {
    let mut cfg = quick_config(3);
    cfg.synthesis.options.kappa = 1e6; // infeasible base
    cfg.synthesis.kappa_grid = vec![1e6, 1.0];
    cfg.synthesis.mu_grid = vec![1.0];
    let dir = tmpdir("grid");
    let run = run_pipeline(&cfg, &opts(&dir)).unwrap();
    assert_eq!(run.summary.kappa_local, 1.0);
    assert!(run.summary.verdicts.feasible);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn binary_runs_the_pipeline_and_the_report() {
    let dir = tmpdir("binary");
    let cfg = quick_config(3);
    let cfg_path = dir.join("config.json");
    artifact::write_json(&cfg_path, &cfg).unwrap();
    let exe = env!("CARGO_BIN_EXE_netism");
    let out_dir = dir.join("out");
    let status = Command::new(exe)
        .args([
            "run",
            "--config",
            cfg_path.to_str().unwrap(),
            "--out-dir",
            out_dir.to_str().unwrap(),
            "--seed",
            "11",
        ])
        .status()
        .unwrap();
    assert!(status.success(), "run exited with {status:?}");
    assert!(out_dir.join("summary.json").exists());
    assert!(out_dir.join("report.txt").exists());

    let output = Command::new(exe)
        .args(["report", "--out-dir", out_dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = String::from_utf8_lossy(&output.stdout);
    assert!(text.contains("ring"), "table: {text}");

    // stage subcommands operate on the persisted state
    let status = Command::new(exe)
        .args(["compose", "--out-dir", out_dir.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn binary_rejects_bad_configs_with_usage_exit_code() {
    let dir = tmpdir("badcfg");
    let cfg_path = dir.join("config.json");
    std::fs::write(&cfg_path, "{\"network\": {\"surprise\": 1}}").unwrap();
    let exe = env!("CARGO_BIN_EXE_netism");
    let status = Command::new(exe)
        .args(["run", "--config", cfg_path.to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn simulate_divergence_maps_to_verification_exit_code() {
    // open-loop unstable network: force controllers off via the config
    let mut cfg = quick_config(2);
    cfg.sim.controllers = netism::sim::ControllerMode::None;
    cfg.sim.perturbation = false;
    cfg.sim.enforce_step_bound = false;
    cfg.sim.horizon = 8.0;
    cfg.sim.x0 = netism::sim::X0Spec::Box(50.0);
    cfg.verify.check_nominal_decay = false;
    let dir = tmpdir("diverge");
    let run = run_pipeline(&cfg, &opts(&dir));
    // the run either aborts inside simulate (divergence) or completes with
    // failing verdicts; both are acceptable non-passing outcomes
    match run {
        Ok(r) => assert!(!r.summary.verdicts.all_passed()),
        Err(e) => assert_eq!(netism_cli::exit_code_for(&e), 3),
    }
    let _ = std::fs::remove_dir_all(&dir);
}
