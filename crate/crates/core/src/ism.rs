//! Integral sliding-mode components built from data.
//!
//! The sliding output is `sigma0(x) = C x` with `C` designed against the
//! data-based input-matrix estimate; the integral sliding variable
//! `sigma = sigma0(x) + zeta(t)` starts at zero exactly because `zeta` is
//! initialized to `-sigma0(x(t0))` and then follows the data-based
//! closed-loop drift. The discontinuous unit-vector law with gain above the
//! perturbation-domination bound keeps `sigma` on the manifold, so matched
//! perturbations are rejected from the initial instant.

use crate::error::{Error, Result};
use crate::experiment::ClosedLoopRep;
use crate::linalg;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Handling of the discontinuity in fixed-step integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum Regularization {
    /// True sign law; selection 0 at `sigma = 0`. Step-size sensitive.
    IdealSign,
    /// Saturated unit vector inside `|sigma| <= epsilon`.
    BoundaryLayer { epsilon: f64 },
}

impl Default for Regularization {
    fn default() -> Self {
        Regularization::BoundaryLayer { epsilon: 1e-3 }
    }
}

/// Positivity tolerance on the symmetric part of `C * B_hat`.
const CB_TOL: f64 = 1e-10;

/// Sliding-output matrix: defaults to `B_hat'`, which makes `C B_hat` the
/// Gram matrix of the input directions. An override is accepted when the
/// symmetric part of `C B_hat` is positive definite.
pub fn design_c(b_hat: &DMatrix<f64>, user: Option<&DMatrix<f64>>) -> Result<DMatrix<f64>> {
    if linalg::max_abs(b_hat) == 0.0 {
        return Err(Error::Config(
            "input-matrix estimate is zero; cannot design a sliding output".into(),
        ));
    }
    let c = match user {
        Some(c) => c.clone(),
        None => b_hat.transpose(),
    };
    if c.nrows() != b_hat.ncols() || c.ncols() != b_hat.nrows() {
        return Err(Error::Dimension {
            context: "sliding-output design",
            expected: format!("C of size {} x {}", b_hat.ncols(), b_hat.nrows()),
            got: format!("{} x {}", c.nrows(), c.ncols()),
        });
    }
    let lambda_min = linalg::lambda_min_sym(&(&c * b_hat));
    if lambda_min <= CB_TOL {
        return Err(Error::SlidingOutput { lambda_min });
    }
    Ok(c)
}

/// Discontinuous-gain bound: `gamma_sup * lambda_max(C B_hat) /
/// lambda_min(C B_hat)` over the symmetric part, plus a strict margin.
pub fn design_theta(
    c: &DMatrix<f64>,
    b_hat: &DMatrix<f64>,
    gamma_sup: f64,
    margin: f64,
) -> Result<f64> {
    if margin <= 0.0 {
        return Err(Error::Config("theta margin must be positive".into()));
    }
    let eigs = linalg::symmetric_eigenvalues(&(c * b_hat));
    let (lo, hi) = (eigs[0], eigs[eigs.len() - 1]);
    if lo <= CB_TOL {
        return Err(Error::SlidingOutput { lambda_min: lo });
    }
    Ok(gamma_sup * (hi / lo) + margin)
}

/// Per-subsystem ISM controller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsmController {
    /// Sliding-output matrix, `m x n`.
    pub c: DMatrix<f64>,
    /// Discontinuous gain.
    pub theta: f64,
    /// `C * B_hat` and the extreme eigenvalues of its symmetric part.
    pub cb: DMatrix<f64>,
    pub cb_lambda_min: f64,
    pub cb_lambda_max: f64,
    pub gamma_sup: f64,
    pub regularization: Regularization,
}

impl IsmController {
    /// Design from the input-matrix estimate; `user_c` overrides the default
    /// sliding output, `margin` is added above the gain bound.
    pub fn design(
        b_hat: &DMatrix<f64>,
        user_c: Option<&DMatrix<f64>>,
        gamma_sup: f64,
        margin: f64,
        regularization: Regularization,
    ) -> Result<Self> {
        let c = design_c(b_hat, user_c)?;
        let theta = design_theta(&c, b_hat, gamma_sup, margin)?;
        let cb = &c * b_hat;
        let eigs = linalg::symmetric_eigenvalues(&cb);
        Ok(IsmController {
            cb_lambda_min: eigs[0],
            cb_lambda_max: eigs[eigs.len() - 1],
            c,
            theta,
            cb,
            gamma_sup,
            regularization,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.c.nrows()
    }

    /// Sliding variable `sigma = C x + zeta`.
    pub fn sigma(&self, x: &DVector<f64>, zeta: &DVector<f64>) -> DVector<f64> {
        &self.c * x + zeta
    }

    /// Initial transient value `zeta(t0) = -C x(t0)`, which pins
    /// `sigma(t0) = 0` exactly.
    pub fn initial_zeta(&self, x0: &DVector<f64>) -> DVector<f64> {
        -(&self.c * x0)
    }

    /// Worst-case sliding band for this controller under a given
    /// integration step.
    pub fn sliding_band(&self, step: f64) -> f64 {
        match self.regularization {
            Regularization::BoundaryLayer { epsilon } => {
                epsilon * (1.0 + self.gamma_sup / self.theta)
            }
            Regularization::IdealSign => 10.0 * step * self.theta,
        }
    }
}

/// Discontinuous control `-theta * sigma / |sigma|`, with the configured
/// regularization. Returns zero at `sigma = 0` (a valid selection of the
/// differential inclusion).
pub fn ism_control(ctrl: &IsmController, sigma: &DVector<f64>) -> DVector<f64> {
    let norm = sigma.norm();
    match ctrl.regularization {
        Regularization::IdealSign => {
            if norm == 0.0 {
                DVector::zeros(sigma.len())
            } else {
                sigma * (-ctrl.theta / norm)
            }
        }
        Regularization::BoundaryLayer { epsilon } => sigma * (-ctrl.theta / norm.max(epsilon)),
    }
}

/// Transient dynamics `zeta' = -C (rep(x) + D w)`: the data-based closed-loop
/// drift plus the coupling influence, projected through the sliding output.
pub fn transient_rhs(
    c: &DMatrix<f64>,
    rep: &ClosedLoopRep,
    x: &DVector<f64>,
    coupling: &DMatrix<f64>,
    w: &DVector<f64>,
) -> Result<DVector<f64>> {
    let mut drift = rep.eval(x)?;
    if !w.is_empty() {
        drift += coupling * w;
    }
    Ok(-(c * drift))
}

/// Persisted ISM design, appended to a subsystem's certificate artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsmDesign {
    pub controller: IsmController,
    pub b_hat: DMatrix<f64>,
}
