//! File artifacts: the network description schema, trajectory dumps,
//! certificate and composition files, and log outputs.
//!
//! Every artifact carries the hash of the inputs it was derived from so a
//! later stage can refuse mismatched provenance. Hashes are 64-bit FNV-1a
//! over file bytes: an integrity check, not a security boundary. Delimited
//! files print floats with seventeen significant digits, which round-trips
//! `f64` exactly; JSON floats round-trip by construction.

use crate::dictionary::{Dictionary, Term};
use crate::error::{Error, Result};
use crate::experiment::DataMatrices;
use crate::ism::IsmDesign;
use crate::model::{
    assemble_network, build_topology, Edge, NetworkModel, PerturbationSpec, SubsystemModel,
    Topology, TopologyKind,
};
use crate::sim::TrajectoryLog;
use crate::synthesis::{IssCertificate, SynthesisOptions};
use nalgebra::DMatrix;
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

/// FNV-1a over raw bytes, as a fixed-width hex string.
pub fn fnv64(bytes: &[u8]) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}

/// Hash a file's contents.
pub fn hash_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    Ok(fnv64(&bytes))
}

/// Seventeen-significant-digit decimal form; parses back bit-exactly.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_float(s: &str, path: &Path) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Parse {
        path: path.display().to_string(),
        detail: format!("bad float `{s}`"),
    })
}

pub fn write_string(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.display().to_string(),
            source: e,
        })?;
    }
    fs::write(path, contents).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

pub fn read_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let body = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Config(format!("serialization failed: {e}")))?;
    write_string(path, &body)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let body = read_string(path)?;
    serde_json::from_str(&body).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        detail: e.to_string(),
    })
}

/// Explicit coupling block for custom topologies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomEdge {
    pub from: usize,
    pub to: usize,
    pub rows: Vec<Vec<f64>>,
}

/// Canonical network description: a homogeneous network of oracle
/// subsystems over one of the built-in interconnection patterns (or an
/// explicit edge list). Unknown fields are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub topology: TopologyKind,
    pub n_subsystems: usize,
    /// Scalar weight of the anti-diagonal coupling blocks; per-kind default
    /// when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling_weight: Option<f64>,
    /// Explicit edges, required for the custom kind.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub custom_edges: Vec<CustomEdge>,
    /// Dictionary grammar terms, linear head first.
    pub dictionary: Vec<String>,
    /// True system matrix rows (oracle; hidden from synthesis).
    pub true_a: Vec<Vec<f64>>,
    /// True input matrix rows.
    pub true_b: Vec<Vec<f64>>,
    pub perturbation: PerturbationSpec,
    pub gamma_sup: f64,
}

impl NetworkSpec {
    /// The benchmark two-state subsystem over a built-in topology.
    pub fn benchmark(topology: TopologyKind, n_subsystems: usize) -> Self {
        NetworkSpec {
            topology,
            n_subsystems,
            coupling_weight: None,
            custom_edges: Vec::new(),
            dictionary: crate::dictionary::benchmark_dictionary()
                .terms()
                .iter()
                .map(|t| t.to_string())
                .collect(),
            true_a: vec![
                vec![1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
                vec![0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0],
            ],
            true_b: vec![vec![0.0], vec![1.0]],
            perturbation: crate::model::benchmark_perturbation(),
            gamma_sup: 20.0,
        }
    }

    pub fn dictionary(&self) -> Result<Dictionary> {
        let terms = self
            .dictionary
            .iter()
            .map(|s| Term::parse(s))
            .collect::<Result<Vec<_>>>()?;
        Dictionary::from_terms(terms)
    }

    fn matrix_from_rows(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
        if rows.is_empty() {
            return Err(Error::Config(format!("{what} must not be empty")));
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Config(format!("{what} rows have unequal lengths")));
        }
        Ok(DMatrix::from_fn(rows.len(), cols, |r, c| rows[r][c]))
    }

    /// Build the oracle network model.
    pub fn build(&self) -> Result<NetworkModel> {
        let dict = self.dictionary()?;
        let a = Self::matrix_from_rows(&self.true_a, "true_a")?;
        let b = Self::matrix_from_rows(&self.true_b, "true_b")?;
        let subsystem =
            SubsystemModel::new(a, b, dict, self.perturbation.clone(), self.gamma_sup)?;
        let subsystems: Vec<SubsystemModel> =
            (0..self.n_subsystems).map(|_| subsystem.clone()).collect();
        let dims: Vec<usize> = subsystems.iter().map(|s| s.state_dim()).collect();
        let topology = match self.topology {
            TopologyKind::Custom => {
                let edges = self
                    .custom_edges
                    .iter()
                    .map(|e| {
                        Ok(Edge::new(
                            e.from,
                            e.to,
                            Self::matrix_from_rows(&e.rows, "custom edge")?,
                        ))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Topology::custom(self.n_subsystems, edges)?
            }
            kind => build_topology(kind, self.n_subsystems, &dims, self.coupling_weight)?,
        };
        assemble_network(subsystems, topology)
    }
}

fn csv_header(n: usize, m: usize, psi: usize) -> String {
    let mut cols = vec!["t".to_string()];
    cols.extend((1..=n).map(|i| format!("x{i}")));
    cols.extend((1..=m).map(|i| format!("u{i}")));
    cols.extend((1..=psi).map(|i| format!("w{i}")));
    cols.extend((1..=n).map(|i| format!("xd{i}")));
    cols.join(",")
}

fn write_run_csv(
    path: &Path,
    tau: f64,
    states: &DMatrix<f64>,
    input: &DMatrix<f64>,
    internal: &DMatrix<f64>,
    derivs: &DMatrix<f64>,
) -> Result<()> {
    let (n, samples) = (states.nrows(), states.ncols());
    let (m, psi) = (input.nrows(), internal.nrows());
    let mut out = String::new();
    out.push_str(&csv_header(n, m, psi));
    out.push('\n');
    for k in 0..samples {
        let mut row: Vec<String> = vec![format_float(k as f64 * tau)];
        row.extend(states.column(k).iter().map(|&v| format_float(v)));
        row.extend(input.column(k).iter().map(|&v| format_float(v)));
        row.extend(internal.column(k).iter().map(|&v| format_float(v)));
        row.extend(derivs.column(k).iter().map(|&v| format_float(v)));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    write_string(path, &out)
}

/// Write the two per-subsystem run dumps; returns `(excited, zero)` paths.
pub fn write_trajectory_pair(
    dir: &Path,
    subsystem: usize,
    d: &DataMatrices,
    tau: f64,
) -> Result<(PathBuf, PathBuf)> {
    let excited = dir.join(format!("subsys_{subsystem:04}_excited.csv"));
    let zero = dir.join(format!("subsys_{subsystem:04}_zero.csv"));
    write_run_csv(&excited, tau, &d.states, &d.input, &d.internal, &d.derivs)?;
    let zero_input = DMatrix::zeros(d.input.nrows(), d.input.ncols());
    write_run_csv(
        &zero,
        tau,
        &d.states_bar,
        &zero_input,
        &d.internal_bar,
        &d.derivs_bar,
    )?;
    Ok((excited, zero))
}

struct RunColumns {
    states: DMatrix<f64>,
    input: DMatrix<f64>,
    internal: DMatrix<f64>,
    derivs: DMatrix<f64>,
}

fn read_run_csv(path: &Path, n: usize, m: usize) -> Result<RunColumns> {
    let body = read_string(path)?;
    let mut lines = body.lines();
    let header = lines.next().ok_or_else(|| Error::Parse {
        path: path.display().to_string(),
        detail: "empty file".into(),
    })?;
    let names: Vec<&str> = header.split(',').collect();
    let expected_min = 1 + 2 * n + m;
    if names.len() < expected_min {
        return Err(Error::Parse {
            path: path.display().to_string(),
            detail: format!("expected at least {expected_min} columns"),
        });
    }
    let psi = names.len() - 1 - 2 * n - m;
    let rows: Vec<Vec<f64>> = lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split(',')
                .map(|tok| parse_float(tok, path))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let samples = rows.len();
    let col = |base: usize, width: usize| -> DMatrix<f64> {
        DMatrix::from_fn(width, samples, |r, k| rows[k][base + r])
    };
    Ok(RunColumns {
        states: col(1, n),
        input: col(1 + n, m),
        internal: col(1 + n + m, psi),
        derivs: col(1 + n + m + psi, n),
    })
}

/// Rebuild the data blocks from the two run dumps. The dictionary block is
/// recomputed from the states; both runs must share the initial state.
pub fn read_trajectory_pair(
    excited: &Path,
    zero: &Path,
    dict: &Dictionary,
) -> Result<DataMatrices> {
    let n = dict.state_dim();
    // the input width is inferred from the excited header later; the
    // benchmark subsystems are single-input but heterogeneous widths parse too
    let body = read_string(excited)?;
    let header = body.lines().next().unwrap_or_default();
    let m = header.split(',').filter(|c| c.starts_with('u')).count();
    let e = read_run_csv(excited, n, m)?;
    let z = read_run_csv(zero, n, m)?;
    if e.states.column(0) != z.states.column(0) {
        return Err(Error::Validation(
            "the two runs do not share an initial state".into(),
        ));
    }
    if z.input.iter().any(|&v| v != 0.0) {
        return Err(Error::Validation(
            "the zero-input run has nonzero input columns".into(),
        ));
    }
    let eval_delta = |states: &DMatrix<f64>| -> Result<DMatrix<f64>> {
        let mut delta = DMatrix::zeros(dict.len(), states.ncols());
        for k in 0..states.ncols() {
            delta.set_column(k, &dict.eval(&states.column(k).into_owned())?);
        }
        Ok(delta)
    };
    let delta = eval_delta(&e.states)?;
    let delta_bar = eval_delta(&z.states)?;
    let x0 = e.states.column(0).into_owned();
    Ok(DataMatrices {
        dict: dict.clone(),
        input: e.input,
        states: e.states,
        internal: e.internal,
        derivs: e.derivs,
        delta,
        states_bar: z.states,
        internal_bar: z.internal,
        derivs_bar: z.derivs,
        delta_bar,
        x0,
    })
}

/// Input hashes plus the options a stage ran with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Provenance {
    /// Artifact path (file name) to FNV-1a hash of its bytes.
    pub inputs: BTreeMap<String, String>,
}

impl Provenance {
    /// Record `path` keyed by its location relative to `base`.
    pub fn record(&mut self, base: &Path, path: &Path) -> Result<()> {
        let name = path
            .strip_prefix(base)
            .map(|p| p.to_string_lossy().into_owned())
            .unwrap_or_else(|_| path.display().to_string());
        self.inputs.insert(name, hash_file(path)?);
        Ok(())
    }

    /// Recompute hashes of the recorded inputs found under `base` and fail
    /// on any mismatch.
    pub fn verify(&self, base: &Path) -> Result<()> {
        for (name, recorded) in &self.inputs {
            let path = base.join(name);
            let recomputed = hash_file(&path)?;
            if &recomputed != recorded {
                return Err(Error::Provenance {
                    artifact: name.clone(),
                    recorded: recorded.clone(),
                    recomputed,
                });
            }
        }
        Ok(())
    }
}

/// Per-subsystem certificate artifact; the ISM design is appended by the
/// sliding-mode stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateArtifact {
    pub subsystem: usize,
    pub certificate: IssCertificate,
    pub options: SynthesisOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ism: Option<IsmDesign>,
    pub provenance: Provenance,
}

/// Composition report artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionArtifact {
    pub network: crate::composition::NetworkCertificate,
    pub provenance: Provenance,
}

/// Delimiter-separated table of the column sums.
pub fn write_xi_table(path: &Path, xi: &[f64]) -> Result<()> {
    let mut out = String::from("subsystem,xi\n");
    for (j, v) in xi.iter().enumerate() {
        out.push_str(&format!("{j},{}\n", format_float(*v)));
    }
    write_string(path, &out)
}

/// Two-column series `t,value` over per-step values.
pub fn write_series(path: &Path, log: &TrajectoryLog, values: &[f64]) -> Result<()> {
    let mut out = String::from("t,value\n");
    for (k, v) in values.iter().enumerate() {
        out.push_str(&format!("{},{}\n", format_float(log.time(k)), format_float(*v)));
    }
    write_string(path, &out)
}

/// Two-column series of explicit `(t, value)` pairs.
pub fn write_pairs(path: &Path, rows: &[(f64, f64)]) -> Result<()> {
    let mut out = String::from("t,value\n");
    for (t, v) in rows {
        out.push_str(&format!("{},{}\n", format_float(*t), format_float(*v)));
    }
    write_string(path, &out)
}

/// Sliding-variable components, one column per subsystem component, over
/// every `stride`-th stored history column.
pub fn write_sigma_series(path: &Path, log: &TrajectoryLog, stride: usize) -> Result<()> {
    let stride = stride.max(1);
    let mut header = vec!["t".to_string()];
    for (i, sig) in log.sigma.iter().enumerate() {
        for c in 0..sig.nrows() {
            header.push(format!("sigma{}_{}", i + 1, c + 1));
        }
    }
    let mut out = header.join(",");
    out.push('\n');
    let mut j = 0;
    while j < log.hist_steps.len() {
        let mut row = vec![format_float(log.time(log.hist_steps[j]))];
        for sig in &log.sigma {
            for c in 0..sig.nrows() {
                row.push(format_float(sig[(c, j)]));
            }
        }
        out.push_str(&row.join(","));
        out.push('\n');
        j += stride;
    }
    write_string(path, &out)
}

/// Full trajectory table `(t, per-subsystem states)` over every
/// `stride`-th stored history column.
pub fn write_trajectory_csv(path: &Path, log: &TrajectoryLog, stride: usize) -> Result<()> {
    let stride = stride.max(1);
    let mut header = vec!["t".to_string()];
    for (i, st) in log.states.iter().enumerate() {
        for c in 0..st.nrows() {
            header.push(format!("x{}_{}", i + 1, c + 1));
        }
    }
    let mut out = header.join(",");
    out.push('\n');
    let mut j = 0;
    while j < log.hist_steps.len() {
        let mut row = vec![format_float(log.time(log.hist_steps[j]))];
        for st in &log.states {
            for c in 0..st.nrows() {
                row.push(format_float(st[(c, j)]));
            }
        }
        out.push_str(&row.join(","));
        out.push('\n');
        j += stride;
    }
    write_string(path, &out)
}

/// Lossless round trip helper used by readers of the dump format.
pub fn parse_series_file(path: &Path) -> Result<Vec<(f64, Vec<f64>)>> {
    let body = read_string(path)?;
    let mut rows = Vec::new();
    for line in body.lines().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let mut it = line.split(',');
        let t = parse_float(it.next().unwrap_or_default(), path)?;
        let rest = it
            .map(|tok| parse_float(tok, path))
            .collect::<Result<Vec<f64>>>()?;
        rows.push((t, rest));
    }
    Ok(rows)
}

pub fn certificate_path(dir: &Path, subsystem: usize) -> PathBuf {
    dir.join(format!("subsys_{subsystem:04}_certificate.json"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{collect_trajectories, ExperimentConfig};
    use crate::model::TopologyKind;

    fn tmpdir(name: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("netism_artifact_{name}_{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn network_spec_round_trips_and_rejects_unknown_fields() {
        let spec = NetworkSpec::benchmark(TopologyKind::Ring, 4);
        let json = serde_json::to_string_pretty(&spec).unwrap();
        let back: NetworkSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(spec, back);
        let net = back.build().unwrap();
        assert_eq!(net.len(), 4);
        assert_eq!(net.subsystem(0).dict_len(), 9);

        let mut bad: serde_json::Value = serde_json::from_str(&json).unwrap();
        bad["surprise"] = serde_json::json!(1);
        let err = serde_json::from_value::<NetworkSpec>(bad);
        assert!(err.is_err());
    }

    #[test]
    fn trajectory_pair_round_trips_bit_exactly() {
        let dir = tmpdir("pair");
        let net = NetworkSpec::benchmark(TopologyKind::Ring, 3).build().unwrap();
        let cfg = ExperimentConfig {
            seed: 3,
            ..ExperimentConfig::default()
        };
        let d = collect_trajectories(&net, 1, &cfg).unwrap();
        let (excited, zero) =
            write_trajectory_pair(&dir, 1, &d, cfg.sampling_interval).unwrap();
        let back = read_trajectory_pair(&excited, &zero, &d.dict).unwrap();
        assert_eq!(d, back);
        let _ = fs::remove_dir_all(&dir);
    }

    #[test]
    fn float_formatting_round_trips() {
        for v in [
            0.0,
            -1.5,
            1.0 / 3.0,
            f64::MIN_POSITIVE,
            982374.2342348,
            -2.2250738585072014e-308,
            5e-324,
        ] {
            let s = format_float(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(v.to_bits(), back.to_bits(), "value {v}");
        }
    }

    #[test]
    fn provenance_detects_tampering() {
        let dir = tmpdir("prov");
        let file = dir.join("input.csv");
        write_string(&file, "t,x\n0,1\n").unwrap();
        let mut prov = Provenance::default();
        prov.record(&dir, &file).unwrap();
        prov.verify(&dir).unwrap();
        write_string(&file, "t,x\n0,2\n").unwrap();
        let err = prov.verify(&dir).unwrap_err();
        assert!(matches!(err, Error::Provenance { .. }));
        let _ = fs::remove_dir_all(&dir);
    }

    #[test]
    fn xi_table_and_series_files_parse_back() {
        let dir = tmpdir("series");
        let path = dir.join("xi.csv");
        write_xi_table(&path, &[-1.0, -0.5, 1.0 / 3.0 - 1.0]).unwrap();
        let body = read_string(&path).unwrap();
        assert!(body.starts_with("subsystem,xi\n"));
        let third: f64 = body.lines().nth(3).unwrap().split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(third.to_bits(), (1.0f64 / 3.0 - 1.0).to_bits());
        let _ = fs::remove_dir_all(&dir);
    }
}
