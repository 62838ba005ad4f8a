//! Thin conic-program layer over the interior-point solver.
//!
//! Problems are assembled as `min q'x  s.t.  A x + s = b, s in K` with zero
//! cones for equalities and scaled-triangle PSD cones for matrix
//! inequalities. Solver status is never trusted on its own; callers re-check
//! residuals on the returned point.

use crate::error::{Error, Result};
use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};
use nalgebra::DMatrix;

/// Incrementally built conic program.
pub(crate) struct ConicProblem {
    nvar: usize,
    objective: Vec<f64>,
    triplets: Vec<(usize, usize, f64)>,
    rhs: Vec<f64>,
    cones: Vec<SupportedConeT<f64>>,
}

/// Iterator over the scaled upper-triangle slots of an `n x n` symmetric
/// matrix in column-major order: yields `(row, col, scale)` where `scale`
/// is `sqrt(2)` off the diagonal and `1` on it.
pub(crate) fn svec_slots(n: usize) -> impl Iterator<Item = (usize, usize, f64)> {
    (0..n).flat_map(move |c| {
        (0..=c).map(move |r| {
            let scale = if r == c { 1.0 } else { std::f64::consts::SQRT_2 };
            (r, c, scale)
        })
    })
}

pub(crate) fn triangle_len(n: usize) -> usize {
    n * (n + 1) / 2
}

impl ConicProblem {
    pub fn new(nvar: usize) -> Self {
        ConicProblem {
            nvar,
            objective: vec![0.0; nvar],
            triplets: Vec::new(),
            rhs: Vec::new(),
            cones: Vec::new(),
        }
    }

    pub fn set_objective(&mut self, var: usize, coeff: f64) {
        self.objective[var] = coeff;
    }

    /// Append equality rows `sum coeff * x = b` as one zero cone.
    /// `rows` yields per-row `(coefficients, rhs)`.
    pub fn add_equalities(&mut self, rows: Vec<(Vec<(usize, f64)>, f64)>) {
        let count = rows.len();
        for (coeffs, b) in rows {
            let r = self.rhs.len();
            for (var, val) in coeffs {
                if val != 0.0 {
                    self.triplets.push((r, var, val));
                }
            }
            self.rhs.push(b);
        }
        self.cones.push(SupportedConeT::ZeroConeT(count));
    }

    /// Append the PSD constraint `constant - sum x_v * coeff_v >= 0` over
    /// symmetric `n x n` matrices. `coeff` maps a variable index to its
    /// symmetric coefficient matrix.
    pub fn add_psd_block(
        &mut self,
        n: usize,
        constant: &DMatrix<f64>,
        coeff: &[(usize, DMatrix<f64>)],
    ) {
        let base = self.rhs.len();
        for (slot, (r, c, scale)) in svec_slots(n).enumerate() {
            self.rhs.push(constant[(r, c)] * scale);
            for (var, m) in coeff {
                let v = m[(r, c)] * scale;
                if v != 0.0 {
                    self.triplets.push((base + slot, *var, v));
                }
            }
        }
        self.cones.push(SupportedConeT::PSDTriangleConeT(n));
    }

    /// Solve and return the primal point. Infeasibility and numerical
    /// failures surface as errors; the caller attaches constraint-family
    /// context.
    pub fn solve(self, tol_feas: f64, tol_gap: f64, max_iter: u32) -> Result<SolveOutcome> {
        let m = self.rhs.len();
        let (is, js, vs): (Vec<usize>, Vec<usize>, Vec<f64>) = {
            let mut is = Vec::with_capacity(self.triplets.len());
            let mut js = Vec::with_capacity(self.triplets.len());
            let mut vs = Vec::with_capacity(self.triplets.len());
            for (r, c, v) in &self.triplets {
                is.push(*r);
                js.push(*c);
                vs.push(*v);
            }
            (is, js, vs)
        };
        let a = CscMatrix::new_from_triplets(m, self.nvar, is, js, vs);
        let p = CscMatrix::new_from_triplets(self.nvar, self.nvar, vec![], vec![], vec![]);
        let settings = DefaultSettingsBuilder::default()
            .verbose(false)
            .max_iter(max_iter)
            .tol_feas(tol_feas)
            .tol_gap_abs(tol_gap)
            .tol_gap_rel(tol_gap)
            .build()
            .map_err(|e| Error::Solver(format!("bad solver settings: {e}")))?;
        let mut solver =
            DefaultSolver::new(&p, &self.objective, &a, &self.rhs, &self.cones, settings)
                .map_err(|e| Error::Solver(format!("problem setup failed: {e}")))?;
        solver.solve();
        let status = solver.solution.status;
        match status {
            SolverStatus::Solved | SolverStatus::AlmostSolved => Ok(SolveOutcome {
                x: solver.solution.x.clone(),
                reduced_accuracy: status == SolverStatus::AlmostSolved,
            }),
            SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
                Err(Error::Solver("primal infeasible".into()))
            }
            SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => {
                Err(Error::Solver("dual infeasible (objective unbounded)".into()))
            }
            other => Err(Error::Solver(format!("solver terminated with {other:?}"))),
        }
    }
}

#[derive(Debug)]
pub(crate) struct SolveOutcome {
    pub x: Vec<f64>,
    #[allow(dead_code)]
    pub reduced_accuracy: bool,
}

/// Whether a solver error is an infeasibility report (as opposed to a
/// numerical failure).
pub(crate) fn is_infeasibility(err: &Error) -> bool {
    matches!(err, Error::Solver(msg) if msg.contains("infeasible"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;

    /// min t  s.t.  t*I - M >= 0  for fixed symmetric M: t* = lambda_max(M).
    #[test]
    fn minimizes_lambda_max_of_fixed_matrix() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let mut prob = ConicProblem::new(1);
        prob.set_objective(0, 1.0);
        // constant - t*(-I) >= 0  <=>  t I - M >= 0
        let neg_m = -m.clone();
        prob.add_psd_block(2, &neg_m, &[(0, -DMatrix::identity(2, 2))]);
        let out = prob.solve(1e-10, 1e-10, 100).unwrap();
        let expected = linalg::lambda_max_sym(&m);
        assert!((out.x[0] - expected).abs() < 1e-7, "t = {}", out.x[0]);
    }

    /// Equality plus PSD: find x with x[0] = 4 and diag(x) - I >= 0.
    #[test]
    fn equalities_and_psd_interact() {
        let mut prob = ConicProblem::new(2);
        prob.set_objective(1, 1.0);
        prob.add_equalities(vec![(vec![(0, 1.0)], 4.0)]);
        let constant = -DMatrix::identity(2, 2);
        let mut c0 = DMatrix::zeros(2, 2);
        c0[(0, 0)] = -1.0;
        let mut c1 = DMatrix::zeros(2, 2);
        c1[(1, 1)] = -1.0;
        prob.add_psd_block(2, &constant, &[(0, c0), (1, c1)]);
        let out = prob.solve(1e-10, 1e-10, 100).unwrap();
        assert!((out.x[0] - 4.0).abs() < 1e-8);
        assert!(out.x[1] >= 1.0 - 1e-8);
        assert!(out.x[1] <= 1.0 + 1e-6);
    }

    /// Off-diagonal coupling exercises the sqrt(2) triangle scaling.
    #[test]
    fn off_diagonal_scaling_round_trips() {
        // feasibility: [[1, x],[x, 1]] >= 0 and x = 0.6 exactly
        let mut prob = ConicProblem::new(1);
        prob.add_equalities(vec![(vec![(0, 1.0)], 0.6)]);
        let constant = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let coeff = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 0.0]);
        prob.add_psd_block(2, &constant, &[(0, coeff)]);
        let out = prob.solve(1e-10, 1e-10, 100).unwrap();
        assert!((out.x[0] - 0.6).abs() < 1e-9);

        // infeasible variant: x pinned beyond the PSD range
        let mut prob = ConicProblem::new(1);
        prob.add_equalities(vec![(vec![(0, 1.0)], 1.4)]);
        let constant = DMatrix::identity(2, 2);
        let coeff = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 0.0]);
        prob.add_psd_block(2, &constant, &[(0, coeff)]);
        let err = prob.solve(1e-10, 1e-10, 100).unwrap_err();
        assert!(is_infeasibility(&err), "err = {err}");
    }
}
