//! Small-gain composition of local certificates into a network certificate.
//!
//! With `H = diag(kappa_1..kappa_N)` and the gain matrix
//! `rho_hat[i][j] = rho_i / alpha1_j`, the network condition is column-wise
//! negativity of `1' (-H + rho_hat)`: every column sum `Xi_j` must be
//! strictly negative. The sum of the local quadratic functions is then a
//! network control Lyapunov function with decay `kappa = -max_j Xi_j`.
//!
//! By default the gain matrix is topology aware: entries exist only on
//! stored influence edges, because absent edges feed identically zero
//! internal inputs and contribute nothing to the dissipation budget. The
//! `strict_dense` flag instead populates every off-diagonal pair, which is
//! the literal all-pairs definition and is needlessly conservative on
//! sparse graphs.

use crate::error::{Error, Result};
use crate::model::Topology;
use crate::synthesis::IssCertificate;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// The scalar gains of one local certificate that enter the composition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertificateGains {
    pub kappa: f64,
    pub rho: f64,
    pub alpha1: f64,
    pub alpha2: f64,
}

impl From<&IssCertificate> for CertificateGains {
    fn from(c: &IssCertificate) -> Self {
        CertificateGains {
            kappa: c.kappa,
            rho: c.rho,
            alpha1: c.alpha1,
            alpha2: c.alpha2,
        }
    }
}

/// Sparse gain matrix `rho_hat`; entries are `(row i, col j, rho_i / alpha1_j)`
/// with zero diagonal by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoHat {
    pub n: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl RhoHat {
    /// Dense materialization, for desk-scale inspection and tests.
    pub fn dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for &(i, j, v) in &self.entries {
            m[(i, j)] = v;
        }
        m
    }
}

/// Build `(H, rho_hat, Xi)` from per-subsystem gains. `Xi[j]` accumulates
/// `-kappa_j` plus the stored column entries of `rho_hat`.
pub fn smallgain_matrix(
    gains: &[CertificateGains],
    topology: &Topology,
    strict_dense: bool,
) -> Result<(DVector<f64>, RhoHat, Vec<f64>)> {
    let n = topology.n_subsystems;
    if gains.len() != n {
        return Err(Error::Dimension {
            context: "small-gain composition",
            expected: format!("{n} certificates"),
            got: format!("{}", gains.len()),
        });
    }
    for (j, g) in gains.iter().enumerate() {
        if g.alpha1 <= 0.0 || g.kappa <= 0.0 {
            return Err(Error::Config(format!(
                "certificate {j} has non-positive kappa or alpha1"
            )));
        }
    }
    let h = DVector::from_fn(n, |i, _| gains[i].kappa);
    let mut entries = Vec::new();
    if strict_dense {
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    entries.push((i, j, gains[i].rho / gains[j].alpha1));
                }
            }
        }
    } else {
        for e in &topology.edges {
            // influence j -> i contributes rho_i / alpha1_j to column j
            let (i, j) = (e.to, e.from);
            entries.push((i, j, gains[i].rho / gains[j].alpha1));
        }
    }
    let mut xi: Vec<f64> = (0..n).map(|j| -gains[j].kappa).collect();
    for &(_, j, v) in &entries {
        xi[j] += v;
    }
    Ok((h, RhoHat { n, entries }, xi))
}

/// Strictness tolerance of the feasibility verdict.
pub const XI_STRICTNESS: f64 = 1e-12;

/// Column-negativity verdict and the induced network decay rate.
pub fn check_smallgain(xi: &[f64]) -> (bool, Option<f64>) {
    let max_xi = xi.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    if max_xi < -XI_STRICTNESS {
        (true, Some(-max_xi))
    } else {
        (false, None)
    }
}

/// Composed network-level certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkCertificate {
    pub gains: Vec<CertificateGains>,
    pub rho_hat: RhoHat,
    pub xi: Vec<f64>,
    pub feasible: bool,
    /// Network decay rate `-max_j Xi_j` when feasible.
    pub kappa: Option<f64>,
    /// `min_i alpha1_i`.
    pub alpha1: f64,
    /// `max_i alpha2_i`.
    pub alpha2: f64,
    pub strict_dense: bool,
}

impl NetworkCertificate {
    /// Diagonal of `H`.
    pub fn h_diagonal(&self) -> DVector<f64> {
        DVector::from_fn(self.gains.len(), |i, _| self.gains[i].kappa)
    }

    pub fn max_xi(&self) -> f64 {
        self.xi.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
    }

    /// Error carrying the retry hint when the composition failed.
    pub fn require_feasible(&self) -> Result<f64> {
        self.kappa
            .ok_or(Error::CompositionInfeasible { max_xi: self.max_xi() })
    }
}

/// Compose per-subsystem gains over a topology.
pub fn compose(
    gains: &[CertificateGains],
    topology: &Topology,
    strict_dense: bool,
) -> Result<NetworkCertificate> {
    let (_h, rho_hat, xi) = smallgain_matrix(gains, topology, strict_dense)?;
    let (feasible, kappa) = check_smallgain(&xi);
    let alpha1 = gains.iter().map(|g| g.alpha1).fold(f64::INFINITY, f64::min);
    let alpha2 = gains
        .iter()
        .map(|g| g.alpha2)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(NetworkCertificate {
        gains: gains.to_vec(),
        rho_hat,
        xi,
        feasible,
        kappa,
        alpha1,
        alpha2,
        strict_dense,
    })
}

/// Evaluator of the network control Lyapunov function
/// `V(x) = sum_i x_i' P_i x_i`.
#[derive(Debug, Clone)]
pub struct NetworkClf {
    ps: Vec<DMatrix<f64>>,
    pub kappa: f64,
    pub alpha1: f64,
    pub alpha2: f64,
}

impl NetworkClf {
    pub fn value(&self, xs: &[DVector<f64>]) -> f64 {
        xs.iter()
            .zip(&self.ps)
            .map(|(x, p)| (x.transpose() * p * x)[(0, 0)])
            .sum()
    }

    /// Gradient blocks `2 P_i x_i`.
    pub fn gradient(&self, xs: &[DVector<f64>]) -> Vec<DVector<f64>> {
        xs.iter().zip(&self.ps).map(|(x, p)| 2.0 * (p * x)).collect()
    }
}

/// Build the network CLF from the local certificates; fails when the
/// composition is infeasible.
pub fn network_clf(
    certs: &[IssCertificate],
    network_cert: &NetworkCertificate,
) -> Result<NetworkClf> {
    let kappa = network_cert.require_feasible()?;
    if certs.len() != network_cert.gains.len() {
        return Err(Error::Dimension {
            context: "network CLF",
            expected: format!("{} certificates", network_cert.gains.len()),
            got: format!("{}", certs.len()),
        });
    }
    Ok(NetworkClf {
        ps: certs.iter().map(|c| c.p.clone()).collect(),
        kappa,
        alpha1: network_cert.alpha1,
        alpha2: network_cert.alpha2,
    })
}
