//! Ground-truth models: subsystem dynamics, perturbation generators,
//! interconnection topologies, and network assembly.
//!
//! A subsystem evolves as `x' = A Z(x) + B u + D w (+ B gamma(x,t))` where
//! `Z` is its dictionary, `w` is the concatenation of all other subsystems'
//! states, and `D` carries the coupling weights. The true `(A, B)` pair is an
//! oracle: the synthesis path never reads it, only the simulator and test
//! oracles do. Coupling weights live on topology edges; the wide per-subsystem
//! `D` matrix is materialized on demand in ascending neighbor order.

use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// External matched-perturbation generator. Must be a pure function of
/// `(x, t)`; the generated vector is clipped to the declared bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PerturbationSpec {
    None,
    /// `amplitude * sin(frequency * t)` on every input channel.
    Sinusoid { amplitude: f64, frequency: f64 },
}

impl PerturbationSpec {
    pub fn is_none(&self) -> bool {
        matches!(self, PerturbationSpec::None)
    }

    /// Shortest period of the generator, if oscillatory.
    pub fn period(&self) -> Option<f64> {
        match self {
            PerturbationSpec::None => None,
            PerturbationSpec::Sinusoid { frequency, .. } => {
                (*frequency != 0.0).then(|| std::f64::consts::TAU / frequency.abs())
            }
        }
    }
}

/// One subsystem with a hidden ground-truth parameterization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsystemModel {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    dictionary: Dictionary,
    perturbation: PerturbationSpec,
    gamma_sup: f64,
}

impl SubsystemModel {
    pub fn new(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        dictionary: Dictionary,
        perturbation: PerturbationSpec,
        gamma_sup: f64,
    ) -> Result<Self> {
        if a.ncols() != dictionary.len() {
            return Err(Error::Dimension {
                context: "subsystem model",
                expected: format!("A with {} columns (dictionary length)", dictionary.len()),
                got: format!("{} columns", a.ncols()),
            });
        }
        if a.nrows() != dictionary.state_dim() {
            return Err(Error::Dimension {
                context: "subsystem model",
                expected: format!("A with {} rows (state dimension)", dictionary.state_dim()),
                got: format!("{} rows", a.nrows()),
            });
        }
        if b.nrows() != a.nrows() {
            return Err(Error::Dimension {
                context: "subsystem model",
                expected: format!("B with {} rows", a.nrows()),
                got: format!("{} rows", b.nrows()),
            });
        }
        if gamma_sup < 0.0 {
            return Err(Error::Config("gamma_sup must be nonnegative".into()));
        }
        Ok(SubsystemModel {
            a,
            b,
            dictionary,
            perturbation,
            gamma_sup,
        })
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }

    pub fn dict_len(&self) -> usize {
        self.dictionary.len()
    }

    pub fn dictionary(&self) -> &Dictionary {
        &self.dictionary
    }

    pub fn perturbation(&self) -> &PerturbationSpec {
        &self.perturbation
    }

    pub fn gamma_sup(&self) -> f64 {
        self.gamma_sup
    }

    /// Oracle access to the true system matrix. Synthesis never calls this.
    pub fn true_a(&self) -> &DMatrix<f64> {
        &self.a
    }

    /// Oracle access to the true input matrix.
    pub fn true_b(&self) -> &DMatrix<f64> {
        &self.b
    }

    /// Perturbation signal on the input channels, clipped to `gamma_sup`.
    pub fn gamma(&self, _x: &DVector<f64>, t: f64) -> DVector<f64> {
        let m = self.input_dim();
        let mut g = match &self.perturbation {
            PerturbationSpec::None => DVector::zeros(m),
            PerturbationSpec::Sinusoid {
                amplitude,
                frequency,
            } => DVector::from_element(m, amplitude * (frequency * t).sin()),
        };
        let norm = g.norm();
        if norm > self.gamma_sup && norm > 0.0 {
            g *= self.gamma_sup / norm;
        }
        g
    }

    /// Right-hand side `A Z(x) + B u + D w (+ B gamma(x,t) when perturbed)`.
    ///
    /// `d` must be the materialized coupling matrix whose width matches `w`;
    /// pass an `n x 0` matrix and an empty `w` for an isolated subsystem.
    pub fn rhs(
        &self,
        d: &DMatrix<f64>,
        x: &DVector<f64>,
        u: &DVector<f64>,
        w: &DVector<f64>,
        t: f64,
        perturbed: bool,
    ) -> Result<DVector<f64>> {
        if u.len() != self.input_dim() {
            return Err(Error::Dimension {
                context: "subsystem rhs",
                expected: format!("input of length {}", self.input_dim()),
                got: format!("length {}", u.len()),
            });
        }
        if d.nrows() != self.state_dim() || d.ncols() != w.len() {
            return Err(Error::Dimension {
                context: "subsystem rhs",
                expected: format!("D of size {} x {}", self.state_dim(), w.len()),
                got: format!("{} x {}", d.nrows(), d.ncols()),
            });
        }
        let z = self.dictionary.eval(x)?;
        let mut dx = &self.a * z + &self.b * u;
        if !w.is_empty() {
            dx += d * w;
        }
        if perturbed {
            dx += &self.b * self.gamma(x, t);
        }
        Ok(dx)
    }
}

/// Interconnection pattern kinds reproduced from the case studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyKind {
    FullyConnected,
    Ring,
    BinaryTree,
    Star,
    Line,
    Custom,
}

/// Directed influence `from -> to` with its coupling block (`n_to x n_from`).
/// Dense patterns share one block allocation across all edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub weight: Arc<DMatrix<f64>>,
}

impl Edge {
    pub fn new(from: usize, to: usize, weight: DMatrix<f64>) -> Self {
        Edge {
            from,
            to,
            weight: Arc::new(weight),
        }
    }
}

/// Directed influence structure over `n_subsystems` nodes. Self-edges are
/// never stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub kind: TopologyKind,
    pub n_subsystems: usize,
    pub edges: Vec<Edge>,
}

/// Default scalar coupling weight for a built-in kind.
pub fn default_weight(kind: TopologyKind) -> f64 {
    match kind {
        TopologyKind::FullyConnected => 5e-4,
        _ => 1e-2,
    }
}

/// Anti-diagonal coupling block of size `rows x cols` scaled by `weight`.
pub fn anti_diagonal_block(rows: usize, cols: usize, weight: f64) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows, cols);
    for r in 0..rows {
        let c = cols as isize - 1 - r as isize;
        if c >= 0 {
            m[(r, c as usize)] = weight;
        }
    }
    m
}

/// Build one of the case-study interconnection patterns over subsystems with
/// the given state dimensions. `weight` defaults per kind when `None`.
pub fn build_topology(
    kind: TopologyKind,
    n_subsystems: usize,
    state_dims: &[usize],
    weight: Option<f64>,
) -> Result<Topology> {
    if n_subsystems < 2 {
        return Err(Error::Config(format!(
            "topology needs at least 2 subsystems, got {n_subsystems}"
        )));
    }
    if state_dims.len() != n_subsystems {
        return Err(Error::Config(format!(
            "state_dims has {} entries for {} subsystems",
            state_dims.len(),
            n_subsystems
        )));
    }
    let w = weight.unwrap_or_else(|| default_weight(kind));
    // one shared template per block shape
    let mut templates: std::collections::BTreeMap<(usize, usize), Arc<DMatrix<f64>>> =
        Default::default();
    let mut block = |to: usize, from: usize| -> Arc<DMatrix<f64>> {
        let key = (state_dims[to], state_dims[from]);
        templates
            .entry(key)
            .or_insert_with(|| Arc::new(anti_diagonal_block(key.0, key.1, w)))
            .clone()
    };
    let mut edges = Vec::with_capacity(match kind {
        TopologyKind::FullyConnected => n_subsystems * (n_subsystems - 1),
        _ => n_subsystems,
    });
    match kind {
        TopologyKind::FullyConnected => {
            for to in 0..n_subsystems {
                for from in 0..n_subsystems {
                    if from != to {
                        edges.push(Edge {
                            from,
                            to,
                            weight: block(to, from),
                        });
                    }
                }
            }
        }
        TopologyKind::Ring => {
            // each node influenced by its predecessor; the first by the last
            for to in 0..n_subsystems {
                let from = (to + n_subsystems - 1) % n_subsystems;
                edges.push(Edge {
                    from,
                    to,
                    weight: block(to, from),
                });
            }
        }
        TopologyKind::BinaryTree => {
            // complete tree on 2^l - 1 nodes, parent -> child influences
            if !(n_subsystems + 1).is_power_of_two() {
                return Err(Error::Config(format!(
                    "binary tree needs 2^l - 1 subsystems, got {n_subsystems}"
                )));
            }
            // nodes are 1-based in the usual heap layout: child i has parent i/2
            for child in 2..=n_subsystems {
                let parent = child / 2;
                edges.push(Edge {
                    from: parent - 1,
                    to: child - 1,
                    weight: block(child - 1, parent - 1),
                });
            }
        }
        TopologyKind::Star => {
            // hub (node 0) influences every leaf; hub itself is uncoupled
            for to in 1..n_subsystems {
                edges.push(Edge {
                    from: 0,
                    to,
                    weight: block(to, 0),
                });
            }
        }
        TopologyKind::Line => {
            for to in 1..n_subsystems {
                edges.push(Edge {
                    from: to - 1,
                    to,
                    weight: block(to, to - 1),
                });
            }
        }
        TopologyKind::Custom => {
            return Err(Error::Config(
                "custom topologies are built from an explicit edge list".into(),
            ))
        }
    }
    Ok(Topology {
        kind,
        n_subsystems,
        edges,
    })
}

impl Topology {
    /// Build a custom topology from explicit edges.
    pub fn custom(n_subsystems: usize, edges: Vec<Edge>) -> Result<Self> {
        let t = Topology {
            kind: TopologyKind::Custom,
            n_subsystems,
            edges,
        };
        t.check_no_self_edges()?;
        Ok(t)
    }

    fn check_no_self_edges(&self) -> Result<()> {
        for e in &self.edges {
            if e.from == e.to {
                return Err(Error::Config(format!(
                    "self-edge on subsystem {} is not allowed",
                    e.to
                )));
            }
        }
        Ok(())
    }

    /// Indices of edges pointing into subsystem `i`, ascending by source.
    pub fn in_edges(&self, i: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.edges.len())
            .filter(|&k| self.edges[k].to == i)
            .collect();
        idx.sort_by_key(|&k| self.edges[k].from);
        idx
    }

    /// Indices of edges leaving subsystem `j`.
    pub fn out_edges(&self, j: usize) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&k| self.edges[k].from == j)
            .collect()
    }
}

/// An interconnected network: subsystems plus a topology, with cached
/// in-edge lists for fast coupling sums.
#[derive(Debug, Clone)]
pub struct NetworkModel {
    subsystems: Vec<SubsystemModel>,
    topology: Topology,
    in_edges: Vec<Vec<usize>>,
}

/// Validate dimensions and wire subsystems into a network.
pub fn assemble_network(
    subsystems: Vec<SubsystemModel>,
    topology: Topology,
) -> Result<NetworkModel> {
    if subsystems.len() != topology.n_subsystems {
        return Err(Error::Dimension {
            context: "network assembly",
            expected: format!("{} subsystems", topology.n_subsystems),
            got: format!("{}", subsystems.len()),
        });
    }
    topology.check_no_self_edges()?;
    for e in &topology.edges {
        if e.from >= subsystems.len() || e.to >= subsystems.len() {
            return Err(Error::Config(format!(
                "edge {} -> {} references a missing subsystem",
                e.from, e.to
            )));
        }
        let (ni, nj) = (subsystems[e.to].state_dim(), subsystems[e.from].state_dim());
        if e.weight.nrows() != ni || e.weight.ncols() != nj {
            return Err(Error::Dimension {
                context: "network assembly",
                expected: format!("coupling block {} x {} on edge {} -> {}", ni, nj, e.from, e.to),
                got: format!("{} x {}", e.weight.nrows(), e.weight.ncols()),
            });
        }
    }
    // group in-edges in one pass; per-node lists sorted by source
    let mut in_edges: Vec<Vec<usize>> = vec![Vec::new(); subsystems.len()];
    for (k, e) in topology.edges.iter().enumerate() {
        in_edges[e.to].push(k);
    }
    for list in in_edges.iter_mut() {
        list.sort_by_key(|&k| topology.edges[k].from);
    }
    Ok(NetworkModel {
        subsystems,
        topology,
        in_edges,
    })
}

impl NetworkModel {
    pub fn len(&self) -> usize {
        self.subsystems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsystems.is_empty()
    }

    pub fn subsystem(&self, i: usize) -> &SubsystemModel {
        &self.subsystems[i]
    }

    pub fn subsystems(&self) -> &[SubsystemModel] {
        &self.subsystems
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn total_state_dim(&self) -> usize {
        self.subsystems.iter().map(|s| s.state_dim()).sum()
    }

    /// Internal-input width of subsystem `i`: sum of all other state dims.
    pub fn psi(&self, i: usize) -> usize {
        self.total_state_dim() - self.subsystems[i].state_dim()
    }

    /// The stored coupling block for `from -> to`, if that edge exists.
    pub fn stored_coupling(&self, to: usize, from: usize) -> Option<&DMatrix<f64>> {
        self.in_edges[to]
            .iter()
            .map(|&k| &self.topology.edges[k])
            .find(|e| e.from == from)
            .map(|e| e.weight.as_ref())
    }

    /// Materialize the wide coupling matrix of subsystem `i`: blocks for all
    /// `j != i` in ascending order, zero where no edge is stored.
    pub fn coupling_matrix(&self, i: usize) -> DMatrix<f64> {
        let ni = self.subsystems[i].state_dim();
        let mut d = DMatrix::zeros(ni, self.psi(i));
        let mut col = 0;
        for j in 0..self.len() {
            if j == i {
                continue;
            }
            let nj = self.subsystems[j].state_dim();
            if let Some(block) = self.stored_coupling(i, j) {
                d.view_mut((0, col), (ni, nj)).copy_from(block);
            }
            col += nj;
        }
        d
    }

    /// Concatenate neighbor states into the internal input of subsystem `i`
    /// (ascending index, skipping `i`).
    pub fn internal_input(&self, i: usize, states: &[DVector<f64>]) -> DVector<f64> {
        let mut w = DVector::zeros(self.psi(i));
        let mut row = 0;
        for (j, xj) in states.iter().enumerate() {
            if j == i {
                continue;
            }
            w.rows_mut(row, xj.len()).copy_from(xj);
            row += xj.len();
        }
        w
    }

    /// Indices into `topology().edges` of the edges into subsystem `i`,
    /// ascending by source.
    pub fn in_edge_indices(&self, i: usize) -> &[usize] {
        &self.in_edges[i]
    }

    /// Sparse coupling sum into subsystem `i`: sum of `D_ij x_j` over stored
    /// edges. Equals `coupling_matrix(i) * internal_input(i, states)`.
    pub fn coupling_sum(&self, i: usize, states: &[DVector<f64>]) -> DVector<f64> {
        let mut acc = DVector::zeros(self.subsystems[i].state_dim());
        for &k in &self.in_edges[i] {
            let e = &self.topology.edges[k];
            acc += e.weight.as_ref() * &states[e.from];
        }
        acc
    }

    /// Right-hand side of subsystem `i` inside the network.
    pub fn subsystem_rhs(
        &self,
        i: usize,
        x: &DVector<f64>,
        u: &DVector<f64>,
        w: &DVector<f64>,
        t: f64,
        perturbed: bool,
    ) -> Result<DVector<f64>> {
        let d = self.coupling_matrix(i);
        self.subsystems[i].rhs(&d, x, u, w, t, perturbed)
    }

    /// Padded off-diagonal block of the assembled system matrix:
    /// `[D_ij 0]` with trailing zeros over the source's nonlinear tail.
    pub fn padded_block(&self, to: usize, from: usize) -> DMatrix<f64> {
        let ni = self.subsystems[to].state_dim();
        let zj = self.subsystems[from].dict_len();
        let mut b = DMatrix::zeros(ni, zj);
        if let Some(d) = self.stored_coupling(to, from) {
            b.view_mut((0, 0), (ni, d.ncols())).copy_from(d);
        }
        b
    }

    /// Dense assembled system matrix with diagonal dictionary blocks and
    /// padded coupling blocks. Intended for desk-scale networks; the memory
    /// cost is `(sum n_i) * (sum z_i)`.
    pub fn assembled_matrix(&self) -> DMatrix<f64> {
        let n: usize = self.total_state_dim();
        let z: usize = self.subsystems.iter().map(|s| s.dict_len()).sum();
        let mut big = DMatrix::zeros(n, z);
        let mut row = 0;
        for i in 0..self.len() {
            let ni = self.subsystems[i].state_dim();
            let mut col = 0;
            for j in 0..self.len() {
                let zj = self.subsystems[j].dict_len();
                if i == j {
                    big.view_mut((row, col), (ni, zj))
                        .copy_from(self.subsystems[i].true_a());
                } else if self.stored_coupling(i, j).is_some() {
                    big.view_mut((row, col), (ni, zj))
                        .copy_from(&self.padded_block(i, j));
                }
                col += zj;
            }
            row += ni;
        }
        big
    }
}

/// The two-state benchmark subsystem used in the case studies, written in the
/// nine-term benchmark dictionary:
/// `x1' = x1 + x2 (+ coupling)`,
/// `x2' = x1^2 + x1*x2 + cos(x1*x2) + ln(1+x2^2) + u (+ coupling + gamma)`.
pub fn benchmark_subsystem(perturbation: PerturbationSpec, gamma_sup: f64) -> SubsystemModel {
    let dict = crate::dictionary::benchmark_dictionary();
    let a = DMatrix::from_row_slice(
        2,
        9,
        &[
            1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0,
        ],
    );
    let b = DMatrix::from_column_slice(2, 1, &[0.0, 1.0]);
    SubsystemModel::new(a, b, dict, perturbation, gamma_sup).expect("benchmark subsystem")
}

/// Benchmark perturbation `20 sin(100 t)`.
pub fn benchmark_perturbation() -> PerturbationSpec {
    PerturbationSpec::Sinusoid {
        amplitude: 20.0,
        frequency: 100.0,
    }
}

/// Homogeneous benchmark network over one of the built-in topologies.
pub fn benchmark_network(
    kind: TopologyKind,
    n_subsystems: usize,
    weight: Option<f64>,
    perturbation: PerturbationSpec,
    gamma_sup: f64,
) -> Result<NetworkModel> {
    let subsystems: Vec<SubsystemModel> = (0..n_subsystems)
        .map(|_| benchmark_subsystem(perturbation.clone(), gamma_sup))
        .collect();
    let dims: Vec<usize> = subsystems.iter().map(|s| s.state_dim()).collect();
    let topology = build_topology(kind, n_subsystems, &dims, weight)?;
    assemble_network(subsystems, topology)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    fn edge_set(t: &Topology) -> Vec<(usize, usize)> {
        let mut v: Vec<(usize, usize)> = t.edges.iter().map(|e| (e.from, e.to)).collect();
        v.sort();
        v
    }

    #[test]
    fn ring_four_edges() {
        let t = build_topology(TopologyKind::Ring, 4, &[2, 2, 2, 2], None).unwrap();
        assert_eq!(edge_set(&t), vec![(0, 1), (1, 2), (2, 3), (3, 0)]);
    }

    #[test]
    fn binary_tree_seven_parent_child_edges() {
        let t = build_topology(TopologyKind::BinaryTree, 7, &[2; 7], None).unwrap();
        assert_eq!(
            edge_set(&t),
            vec![(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (2, 6)]
        );
        assert!(build_topology(TopologyKind::BinaryTree, 6, &[2; 6], None).is_err());
    }

    #[test]
    fn star_five_hub_uncoupled() {
        let t = build_topology(TopologyKind::Star, 5, &[2; 5], None).unwrap();
        assert_eq!(edge_set(&t), vec![(0, 1), (0, 2), (0, 3), (0, 4)]);
        assert!(t.in_edges(0).is_empty());
    }

    #[test]
    fn line_chain() {
        let t = build_topology(TopologyKind::Line, 3, &[2; 3], None).unwrap();
        assert_eq!(edge_set(&t), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn fully_connected_weight_default() {
        let t = build_topology(TopologyKind::FullyConnected, 3, &[2; 3], None).unwrap();
        assert_eq!(t.edges.len(), 6);
        for e in &t.edges {
            assert_eq!(
                *e.weight,
                DMatrix::from_row_slice(2, 2, &[0.0, 5e-4, 5e-4, 0.0])
            );
        }
    }

    #[test]
    fn rhs_at_origin_sees_the_cosine_offset() {
        let s = benchmark_subsystem(benchmark_perturbation(), 20.0);
        let d = DMatrix::zeros(2, 0);
        let dx = s
            .rhs(&d, &dvector![0.0, 0.0], &dvector![0.0], &dvector![], 0.0, false)
            .unwrap();
        assert_eq!(dx, dvector![0.0, 1.0]);
        // gamma(0) = 20 sin(0) = 0, so the perturbed value matches
        let dxp = s
            .rhs(&d, &dvector![0.0, 0.0], &dvector![0.0], &dvector![], 0.0, true)
            .unwrap();
        assert_eq!(dxp, dx);
    }

    #[test]
    fn nonlinear_cancelling_input_leaves_linear_dynamics() {
        let s = benchmark_subsystem(PerturbationSpec::None, 0.0);
        let d = DMatrix::zeros(2, 0);
        let x = dvector![0.7, -1.3];
        let z = s.dictionary().eval(&x).unwrap();
        // u = -(row 2 of A restricted to the tail) . M(x)
        let tail = z.rows(2, 7);
        let a_tail = s.true_a().view((1, 2), (1, 7)).into_owned();
        let u = dvector![-(a_tail * tail)[0]];
        let dx = s.rhs(&d, &x, &u, &dvector![], 0.0, false).unwrap();
        assert!((dx[0] - (x[0] + x[1])).abs() < 1e-14);
        assert!(dx[1].abs() < 1e-12);
    }

    #[test]
    fn gamma_is_clipped_to_bound() {
        let s = benchmark_subsystem(
            PerturbationSpec::Sinusoid {
                amplitude: 50.0,
                frequency: 1.0,
            },
            20.0,
        );
        let g = s.gamma(&dvector![0.0, 0.0], std::f64::consts::FRAC_PI_2);
        assert!((g.norm() - 20.0).abs() < 1e-12);
    }

    #[test]
    fn two_subsystem_line_block_layout() {
        let net = benchmark_network(TopologyKind::Line, 2, None, PerturbationSpec::None, 0.0)
            .unwrap();
        let big = net.assembled_matrix();
        assert_eq!(big.nrows(), 4);
        assert_eq!(big.ncols(), 18);
        // top-right block is zero (no edge 1 -> 0)
        assert!(big.view((0, 9), (2, 9)).iter().all(|&v| v == 0.0));
        // diagonal blocks are the true A
        assert_eq!(
            big.view((0, 0), (2, 9)).into_owned(),
            *net.subsystem(0).true_a()
        );
        // bottom-left block is [D 0] with anti-diagonal D
        let pad = big.view((2, 0), (2, 9)).into_owned();
        assert_eq!(pad.view((0, 0), (2, 2)).into_owned(), anti_diagonal_block(2, 2, 1e-2));
        assert!(pad.view((0, 2), (2, 7)).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn uncoupled_topology_is_block_diagonal() {
        let subsystems = vec![
            benchmark_subsystem(PerturbationSpec::None, 0.0),
            benchmark_subsystem(PerturbationSpec::None, 0.0),
        ];
        let topo = Topology::custom(2, vec![]).unwrap();
        let net = assemble_network(subsystems, topo).unwrap();
        let big = net.assembled_matrix();
        assert!(big.view((0, 9), (2, 9)).iter().all(|&v| v == 0.0));
        assert!(big.view((2, 0), (2, 9)).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn ring_three_off_diagonal_block_norms() {
        let net = benchmark_network(TopologyKind::Ring, 3, None, PerturbationSpec::None, 0.0)
            .unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i == j {
                    continue;
                }
                let blk = net.padded_block(i, j);
                let expected = if net.stored_coupling(i, j).is_some() {
                    1e-2
                } else {
                    0.0
                };
                assert!((crate::linalg::spectral_norm(&blk) - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn padded_block_strips_back_to_stored_coupling() {
        let net = benchmark_network(TopologyKind::Ring, 4, Some(0.03), PerturbationSpec::None, 0.0)
            .unwrap();
        for e in &net.topology().edges {
            let padded = net.padded_block(e.to, e.from);
            assert_eq!(padded.ncols(), 9);
            let stripped = padded.view((0, 0), (2, 2)).into_owned();
            assert_eq!(&stripped, net.stored_coupling(e.to, e.from).unwrap());
            assert!(padded.view((0, 2), (2, 7)).iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn coupling_matrix_matches_sparse_sum() {
        let net = benchmark_network(TopologyKind::Star, 4, None, PerturbationSpec::None, 0.0)
            .unwrap();
        let states: Vec<DVector<f64>> = (0..4)
            .map(|i| dvector![i as f64 + 0.5, -(i as f64)])
            .collect();
        for i in 0..4 {
            let dense = net.coupling_matrix(i) * net.internal_input(i, &states);
            let sparse = net.coupling_sum(i, &states);
            assert!((dense - sparse).norm() < 1e-14);
        }
    }

    #[test]
    fn dangling_edge_is_rejected() {
        let subsystems = vec![
            benchmark_subsystem(PerturbationSpec::None, 0.0),
            benchmark_subsystem(PerturbationSpec::None, 0.0),
        ];
        let topo = Topology {
            kind: TopologyKind::Custom,
            n_subsystems: 2,
            edges: vec![Edge::new(5, 0, DMatrix::zeros(2, 2))],
        };
        assert!(assemble_network(subsystems, topo).is_err());
    }
}
