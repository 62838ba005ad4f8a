//! Data-dependent semidefinite synthesis of local ISS Lyapunov functions and
//! state-feedback gains.
//!
//! Given the sampled blocks of one subsystem, the feasibility program finds
//! `(G2, Y, Phi)` such that, writing `F = S+ - D W` for the coupling-stripped
//! drift data and `Delta` for the dictionary block:
//!
//! * `F G2 = 0` — the closed loop annihilates the nonlinear channel;
//! * `Delta G2 = [0; I]` — `G2` right-inverts the nonlinear rows;
//! * `Delta Y = [Phi; 0]` — `Y` carries the Lyapunov variable;
//! * `Y' F' + F Y + mu I + kappa Phi <= 0` — the decay LMI;
//! * `Phi >= eps I`.
//!
//! The quadratic function `V(x) = x' P x` with `P = Phi^{-1}` is then an ISS
//! Lyapunov function with decay `kappa`, gain `rho = ||D||^2 / mu`, and the
//! feedback gain is `K = I_data [Y P  G2]`. `G2` only enters the two
//! decoupled equalities, so it is solved exactly by a minimum-norm least
//! squares step and the conic solver handles `(Y, Phi)`; all residuals are
//! re-checked independently of solver status, and a certificate is only
//! returned after it passes validation.

use crate::error::{ConstraintFamily, Error, Result};
use crate::experiment::{ClosedLoopRep, DataMatrices};
use crate::linalg::{self, RANK_CUTOFF};
use crate::sdp::{self, ConicProblem};
use crate::sim::{monte_carlo_iss, IssMcReport};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Feasibility objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    FeasibilityOnly,
    /// Minimize `t` subject to `Phi <= t I`, i.e. maximize the lower Rayleigh
    /// constant `alpha1 = 1 / lambda_max(Phi)`. This directly loosens the
    /// small-gain condition downstream.
    #[default]
    MinConditionNumber,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthesisOptions {
    /// Decay rate of the local Lyapunov function (> 0).
    pub kappa: f64,
    /// Young's-inequality weight (> 0); the internal-input gain is
    /// `||D||^2 / mu`.
    pub mu: f64,
    /// Positive-definiteness floor for `Phi`.
    pub epsilon_pd: f64,
    /// Extra margin subtracted on the decay LMI so the returned point
    /// satisfies it strictly after solver rounding.
    pub lmi_margin: f64,
    pub objective: Objective,
    /// Conditioning cap on `Phi` under the conditioning objective; relaxed
    /// tenfold at a time when the capped problem is infeasible.
    pub conditioning_budget: f64,
    pub tol_feas: f64,
    pub tol_gap: f64,
    pub max_iter: u32,
    /// Monte-Carlo budget of the fail-closed validation run.
    pub validation_samples: usize,
    pub validation_radius: f64,
    pub validation_seed: u64,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        SynthesisOptions {
            kappa: 1.0,
            mu: 1.0,
            epsilon_pd: 1e-6,
            lmi_margin: 1e-7,
            objective: Objective::MinConditionNumber,
            conditioning_budget: 200.0,
            tol_feas: 1e-11,
            tol_gap: 1e-10,
            max_iter: 200,
            validation_samples: 1000,
            validation_radius: 10.0,
            validation_seed: 0,
        }
    }
}

impl SynthesisOptions {
    pub fn validate(&self) -> Result<()> {
        if self.kappa <= 0.0 || self.mu <= 0.0 || self.epsilon_pd <= 0.0 {
            return Err(Error::Config(
                "kappa, mu and epsilon_pd must all be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Certificate that `V(x) = x' P x` is a local ISS Lyapunov function with
/// feedback `u = K Z(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IssCertificate {
    /// Lyapunov matrix `P = Phi^{-1}`, symmetric positive definite.
    pub p: DMatrix<f64>,
    pub phi: DMatrix<f64>,
    pub y: DMatrix<f64>,
    pub g2: DMatrix<f64>,
    /// Feedback gain over the dictionary, `m x z`.
    pub k: DMatrix<f64>,
    /// Closed-loop drift representation `(S+ - D W)[Y P  G2]`, `n x z`.
    pub rep: DMatrix<f64>,
    /// Rayleigh bounds of `P`.
    pub alpha1: f64,
    pub alpha2: f64,
    /// Internal-input gain `||D||^2 / mu`.
    pub rho: f64,
    pub kappa: f64,
    pub mu: f64,
}

impl IssCertificate {
    pub fn state_dim(&self) -> usize {
        self.p.nrows()
    }

    /// Lyapunov value `x' P x`.
    pub fn lyapunov(&self, x: &DVector<f64>) -> f64 {
        (x.transpose() * &self.p * x)[(0, 0)]
    }

    /// Closed-loop representation evaluator over the given dictionary.
    pub fn closed_loop_rep(&self, dict: crate::dictionary::Dictionary) -> ClosedLoopRep {
        ClosedLoopRep::from_matrix(dict, self.rep.clone())
    }
}

/// Rayleigh bounds and internal-input gain of a certificate:
/// `(lambda_min(P), lambda_max(P), ||D||^2 / mu)`.
pub fn iss_bounds(p: &DMatrix<f64>, coupling: &DMatrix<f64>, mu: f64) -> Result<(f64, f64, f64)> {
    if mu <= 0.0 {
        return Err(Error::Config("mu must be positive".into()));
    }
    let eigs = linalg::symmetric_eigenvalues(p);
    let alpha1 = eigs[0];
    let alpha2 = eigs[eigs.len() - 1];
    if alpha1 <= 0.0 {
        return Err(Error::Validation(format!(
            "Lyapunov matrix is not positive definite (lambda_min = {alpha1:.3e})"
        )));
    }
    let norm = linalg::spectral_norm(coupling);
    Ok((alpha1, alpha2, norm * norm / mu))
}

/// Solve the two decoupled equalities for `G2`, attributing any
/// inconsistency to the right constraint family.
fn solve_g2(drift: &DMatrix<f64>, delta: &DMatrix<f64>, tol: f64) -> Result<DMatrix<f64>> {
    let n = drift.nrows();
    let z = delta.nrows();
    let t = delta.ncols();
    let tail = z - n;
    if tail == 0 {
        return Ok(DMatrix::zeros(t, 0));
    }
    let mut tail_target = DMatrix::zeros(z, tail);
    for i in 0..tail {
        tail_target[(n + i, i)] = 1.0;
    }

    let mut stack = DMatrix::zeros(n + z, t);
    stack.view_mut((0, 0), (n, t)).copy_from(drift);
    stack.view_mut((n, 0), (z, t)).copy_from(delta);
    let mut rhs = DMatrix::zeros(n + z, tail);
    rhs.view_mut((n, 0), (z, tail)).copy_from(&tail_target);

    let g2 = linalg::lstsq(&stack, &rhs, RANK_CUTOFF);
    let residual = linalg::max_abs(&(&stack * &g2 - &rhs));
    if residual > tol {
        // attribute: is the dictionary equality alone solvable?
        let g2_dict = linalg::lstsq(delta, &tail_target, RANK_CUTOFF);
        let dict_residual = linalg::max_abs(&(delta * &g2_dict - &tail_target));
        if dict_residual > tol {
            return Err(Error::Infeasible {
                constraint: ConstraintFamily::DictionaryInverse,
                detail: format!(
                    "dictionary block has no right inverse on the nonlinear rows \
                     (residual {dict_residual:.3e}); data are not rich enough"
                ),
            });
        }
        return Err(Error::Infeasible {
            constraint: ConstraintFamily::NonlinearCancellation,
            detail: format!(
                "no G2 annihilates the drift data while right-inverting the nonlinear rows \
                 (residual {residual:.3e}); the dictionary tail is likely not matched to the \
                 input channel"
            ),
        });
    }
    Ok(g2)
}

/// Synthesize a validated ISS certificate from one subsystem's data.
pub fn synthesize_iss(
    d: &DataMatrices,
    coupling: &DMatrix<f64>,
    opt: &SynthesisOptions,
) -> Result<IssCertificate> {
    opt.validate()?;
    let n = d.states.nrows();
    let z = d.delta.nrows();
    let t = d.samples();
    let drift = d.drift(coupling);

    let g2 = solve_g2(&drift, &d.delta, 1e-8)?;

    // conic variables: Y (T x n, column-major), upper triangle of Phi, and
    // one auxiliary eigenvalue bound in the objective stages
    let ny = t * n;
    let ntri = sdp::triangle_len(n);
    let y_idx = |k: usize, c: usize| c * t + k;
    let tri_idx = |r: usize, c: usize| {
        debug_assert!(r <= c);
        ny + c * (c + 1) / 2 + r
    };
    let aux_idx = ny + ntri;

    let sym_basis = |p: usize, q: usize| {
        let mut m = DMatrix::zeros(n, n);
        m[(p, q)] = 1.0;
        m[(q, p)] = 1.0;
        m
    };

    // one solver stage over the shared constraint set
    enum Stage {
        Feasibility,
        /// minimize lambda_max(Phi) subject to cond(Phi) <= gamma:
        /// min t s.t. Phi <= t I and Phi >= (t / gamma) I
        MinLambdaMaxCond(f64),
    }

    let solve_stage = |stage: &Stage| -> Result<sdp::SolveOutcome> {
        let with_aux = !matches!(stage, Stage::Feasibility);
        let mut prob = ConicProblem::new(ny + ntri + usize::from(with_aux));

        // Delta Y = [Phi; 0]
        let mut eq_rows = Vec::with_capacity(z * n);
        for c in 0..n {
            for r in 0..z {
                let mut coeffs: Vec<(usize, f64)> =
                    (0..t).map(|k| (y_idx(k, c), d.delta[(r, k)])).collect();
                if r < n {
                    let (a, b) = (r.min(c), r.max(c));
                    coeffs.push((tri_idx(a, b), -1.0));
                }
                eq_rows.push((coeffs, 0.0));
            }
        }
        prob.add_equalities(eq_rows);

        // decay LMI: -(mu + margin) I - (F Y + (F Y)') - kappa Phi >= 0
        let constant = DMatrix::identity(n, n) * -(opt.mu + opt.lmi_margin);
        let mut coeff: Vec<(usize, DMatrix<f64>)> = Vec::new();
        for c in 0..n {
            for k in 0..t {
                let mut e = DMatrix::zeros(n, n);
                for a in 0..n {
                    e[(a, c)] += drift[(a, k)];
                    e[(c, a)] += drift[(a, k)];
                }
                coeff.push((y_idx(k, c), e));
            }
        }
        for q in 0..n {
            for p in 0..=q {
                coeff.push((tri_idx(p, q), sym_basis(p, q) * opt.kappa));
            }
        }
        prob.add_psd_block(n, &constant, &coeff);

        // Phi >= eps I
        let constant = DMatrix::identity(n, n) * -opt.epsilon_pd;
        let mut coeff = Vec::new();
        for q in 0..n {
            for p in 0..=q {
                coeff.push((tri_idx(p, q), -sym_basis(p, q)));
            }
        }
        prob.add_psd_block(n, &constant, &coeff);

        let phi_coeffs = |sign: f64| -> Vec<(usize, DMatrix<f64>)> {
            let mut v = Vec::with_capacity(ntri);
            for q in 0..n {
                for p in 0..=q {
                    v.push((tri_idx(p, q), sym_basis(p, q) * sign));
                }
            }
            v
        };

        match stage {
            Stage::Feasibility => {}
            Stage::MinLambdaMaxCond(gamma) => {
                // t I - Phi >= 0, min t
                let mut coeff = phi_coeffs(1.0);
                coeff.push((aux_idx, -DMatrix::identity(n, n)));
                prob.add_psd_block(n, &DMatrix::zeros(n, n), &coeff);
                // Phi - (t / gamma) I >= 0
                let mut coeff = phi_coeffs(-1.0);
                coeff.push((aux_idx, DMatrix::identity(n, n) / *gamma));
                prob.add_psd_block(n, &DMatrix::zeros(n, n), &coeff);
                prob.set_objective(aux_idx, 1.0);
            }
        }
        prob.solve(opt.tol_feas, opt.tol_gap, opt.max_iter)
    };

    let infeasible_diag = |e: Error| {
        if sdp::is_infeasibility(&e) {
            Error::Infeasible {
                constraint: ConstraintFamily::DecayLmi,
                detail: format!(
                    "no (Y, Phi) satisfies the decay LMI at kappa = {}, mu = {}; \
                     try smaller values or richer data",
                    opt.kappa, opt.mu
                ),
            }
        } else {
            e
        }
    };

    let outcome = match opt.objective {
        Objective::FeasibilityOnly => solve_stage(&Stage::Feasibility).map_err(infeasible_diag)?,
        Objective::MinConditionNumber => {
            // relax the conditioning budget tenfold at a time before falling
            // back to plain feasibility
            let mut found = None;
            let mut gamma = opt.conditioning_budget.max(1.0);
            for _ in 0..4 {
                if let Ok(out) = solve_stage(&Stage::MinLambdaMaxCond(gamma)) {
                    found = Some(out);
                    break;
                }
                gamma *= 10.0;
            }
            match found {
                Some(out) => out,
                None => solve_stage(&Stage::Feasibility).map_err(infeasible_diag)?,
            }
        }
    };

    let y = DMatrix::from_fn(t, n, |k, c| outcome.x[y_idx(k, c)]);
    let phi = DMatrix::from_fn(n, n, |r, c| outcome.x[tri_idx(r.min(c), r.max(c))]);

    let p = linalg::spd_inverse(&phi).ok_or_else(|| {
        Error::Validation("solver returned a Phi that is not positive definite".into())
    })?;
    let (alpha1, alpha2, rho) = iss_bounds(&p, coupling, opt.mu)?;

    // G = [Y P  G2], gain K = I_data G, representation (S+ - D W) G
    let g1 = &y * &p;
    let mut g = DMatrix::zeros(t, z);
    g.view_mut((0, 0), (t, n)).copy_from(&g1);
    g.view_mut((0, n), (t, z - n)).copy_from(&g2);
    let k = &d.input * &g;
    let rep = &drift * &g;

    let cert = IssCertificate {
        p,
        phi,
        y,
        g2,
        k,
        rep,
        alpha1,
        alpha2,
        rho,
        kappa: opt.kappa,
        mu: opt.mu,
    };

    // fail closed: only validated certificates leave this function
    let report = validate_certificate(
        &cert,
        d,
        coupling,
        opt.validation_samples,
        opt.validation_radius,
        opt.validation_seed,
    );
    if !report.passed() {
        return Err(Error::Validation(format!(
            "synthesized certificate failed validation: {report:?}"
        )));
    }
    Ok(cert)
}

/// Independent validation of a certificate against the data it came from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    /// Max-abs residual of the nonlinear-channel cancellation equality.
    pub residual_cancellation: f64,
    /// Max-abs residual of the dictionary right-inverse equality.
    pub residual_dictionary: f64,
    /// Max-abs residual of the Lyapunov-data equality.
    pub residual_lyapunov: f64,
    /// Largest eigenvalue of `Y' F' + F Y + mu I + kappa Phi`.
    pub lmi_lambda_max: f64,
    /// Smallest eigenvalue of `P`.
    pub p_lambda_min: f64,
    pub mc: IssMcReport,
    pub equality_tol: f64,
    pub lmi_tol: f64,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.residual_cancellation <= self.equality_tol
            && self.residual_dictionary <= self.equality_tol
            && self.residual_lyapunov <= self.equality_tol
            && self.lmi_lambda_max <= self.lmi_tol
            && self.p_lambda_min > 0.0
            && self.mc.violations == 0
    }
}

/// Re-check equality residuals, the decay LMI, and the ISS inequality on
/// random samples. Pure function of its arguments.
pub fn validate_certificate(
    cert: &IssCertificate,
    d: &DataMatrices,
    coupling: &DMatrix<f64>,
    mc_samples: usize,
    mc_radius: f64,
    mc_seed: u64,
) -> ValidationReport {
    let n = cert.state_dim();
    let z = d.delta.nrows();
    let drift = d.drift(coupling);

    let residual_cancellation = linalg::max_abs(&(&drift * &cert.g2));
    let mut tail_target = DMatrix::zeros(z, z - n);
    for i in 0..z - n {
        tail_target[(n + i, i)] = 1.0;
    }
    let residual_dictionary = linalg::max_abs(&(&d.delta * &cert.g2 - tail_target));
    let mut lyap_target = DMatrix::zeros(z, n);
    lyap_target.view_mut((0, 0), (n, n)).copy_from(&cert.phi);
    let residual_lyapunov = linalg::max_abs(&(&d.delta * &cert.y - lyap_target));

    let lmi = cert.y.transpose() * drift.transpose()
        + &drift * &cert.y
        + DMatrix::identity(n, n) * cert.mu
        + &cert.phi * cert.kappa;
    let lmi_lambda_max = linalg::lambda_max_sym(&lmi);
    let p_lambda_min = linalg::symmetric_eigenvalues(&cert.p)[0];

    let rep = cert.closed_loop_rep(d.dict.clone());
    let mc = monte_carlo_iss(cert, &rep, coupling, mc_samples, mc_radius, mc_seed);

    ValidationReport {
        residual_cancellation,
        residual_dictionary,
        residual_lyapunov,
        lmi_lambda_max,
        p_lambda_min,
        mc,
        equality_tol: 1e-6,
        lmi_tol: 1e-8,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::Dictionary;
    use crate::experiment::{collect_trajectories, ExperimentConfig};
    use crate::model::{benchmark_network, PerturbationSpec, SubsystemModel, TopologyKind};

    fn ring_data() -> (DataMatrices, DMatrix<f64>) {
        let net =
            benchmark_network(TopologyKind::Ring, 3, None, PerturbationSpec::None, 0.0).unwrap();
        let cfg = ExperimentConfig {
            seed: 7,
            ..ExperimentConfig::default()
        };
        let d = collect_trajectories(&net, 0, &cfg).unwrap();
        let coupling = net.coupling_matrix(0);
        (d, coupling)
    }

    #[test]
    fn benchmark_subsystem_synthesis_is_feasible_and_validated() {
        let (d, coupling) = ring_data();
        let opt = SynthesisOptions {
            kappa: 2.0,
            mu: 1.0,
            ..SynthesisOptions::default()
        };
        let cert = synthesize_iss(&d, &coupling, &opt).unwrap();
        let report = validate_certificate(&cert, &d, &coupling, 2000, 10.0, 1);
        assert!(report.passed(), "{report:?}");
        // rho = ||D||^2 / mu with the ring coupling of weight 1e-2
        assert!((cert.rho - 1e-4).abs() < 1e-12);
        assert!(cert.alpha1 > 0.0 && cert.alpha2 >= cert.alpha1);
        // stored gain equals the defining product exactly
        let mut g = DMatrix::zeros(d.samples(), 9);
        g.view_mut((0, 0), (d.samples(), 2))
            .copy_from(&(&cert.y * &cert.p));
        g.view_mut((0, 2), (d.samples(), 7)).copy_from(&cert.g2);
        assert_eq!(cert.k, &d.input * g);
    }

    #[test]
    fn nonlinear_tail_of_the_gain_cancels_the_true_dynamics() {
        // with B = [0; 1] the tail of K is forced to the negated tail of A
        let (d, coupling) = ring_data();
        let opt = SynthesisOptions {
            kappa: 2.0,
            mu: 1.0,
            ..SynthesisOptions::default()
        };
        let cert = synthesize_iss(&d, &coupling, &opt).unwrap();
        let expected_tail = [-1.0, -1.0, 0.0, 0.0, -1.0, 0.0, -1.0];
        for (i, &e) in expected_tail.iter().enumerate() {
            assert!(
                (cert.k[(0, 2 + i)] - e).abs() < 1e-6,
                "tail {i}: {} vs {e}",
                cert.k[(0, 2 + i)]
            );
        }
    }

    #[test]
    fn scalar_linear_system_hand_data() {
        // x' = -x + u with three hand-written samples and exact derivatives
        let dict = Dictionary::parse_terms(&["x1"]).unwrap();
        let states = DMatrix::from_row_slice(1, 3, &[1.0, 2.0, -1.0]);
        let input = DMatrix::from_row_slice(1, 3, &[0.5, -1.0, 2.0]);
        let derivs = &states * -1.0 + &input;
        let states_bar = DMatrix::from_row_slice(1, 3, &[1.0, 0.5, 0.25]);
        let derivs_bar = &states_bar * -1.0;
        let d = DataMatrices {
            dict,
            input,
            states: states.clone(),
            internal: DMatrix::zeros(0, 3),
            derivs,
            delta: states.clone(),
            states_bar: states_bar.clone(),
            internal_bar: DMatrix::zeros(0, 3),
            derivs_bar,
            delta_bar: states_bar,
            x0: nalgebra::dvector![1.0],
        };
        let coupling = DMatrix::zeros(1, 0);
        let opt = SynthesisOptions {
            kappa: 1.0,
            mu: 0.5,
            validation_samples: 500,
            ..SynthesisOptions::default()
        };
        let cert = synthesize_iss(&d, &coupling, &opt).unwrap();
        assert_eq!(cert.g2.ncols(), 0);
        assert_eq!(cert.rho, 0.0);
        assert!(cert.phi[(0, 0)] > 0.0);
    }

    #[test]
    fn unmatched_nonlinearity_names_the_cancellation_family() {
        // plant with x1^2 entering the first state equation, outside span(B)
        let dict = crate::dictionary::benchmark_dictionary();
        let a = DMatrix::from_row_slice(
            2,
            9,
            &[
                1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, //
                0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0,
            ],
        );
        let b = DMatrix::from_column_slice(2, 1, &[0.0, 1.0]);
        let sub = SubsystemModel::new(a, b, dict, PerturbationSpec::None, 0.0).unwrap();
        let topo = crate::model::Topology::custom(2, vec![]).unwrap();
        let net = crate::model::assemble_network(vec![sub.clone(), sub], topo).unwrap();
        let d = collect_trajectories(&net, 0, &ExperimentConfig::default()).unwrap();
        let coupling = net.coupling_matrix(0);
        let err = synthesize_iss(&d, &coupling, &SynthesisOptions::default()).unwrap_err();
        match err {
            Error::Infeasible { constraint, .. } => {
                assert_eq!(constraint, ConstraintFamily::NonlinearCancellation)
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn equality_feasibility_is_kappa_independent() {
        let (d, coupling) = ring_data();
        let mut statuses = Vec::new();
        for kappa in [1.0, 3.0] {
            let opt = SynthesisOptions {
                kappa,
                mu: 1.0,
                validation_samples: 200,
                ..SynthesisOptions::default()
            };
            let cert = synthesize_iss(&d, &coupling, &opt).unwrap();
            let report = validate_certificate(&cert, &d, &coupling, 0, 10.0, 0);
            statuses.push((
                report.residual_cancellation <= 1e-6,
                report.residual_dictionary <= 1e-6,
                report.residual_lyapunov <= 1e-6,
            ));
        }
        assert_eq!(statuses[0], statuses[1]);
    }

    #[test]
    fn corrupted_lyapunov_matrix_fails_validation() {
        let (d, coupling) = ring_data();
        let opt = SynthesisOptions {
            kappa: 2.0,
            mu: 1.0,
            ..SynthesisOptions::default()
        };
        let mut cert = synthesize_iss(&d, &coupling, &opt).unwrap();
        cert.p[(0, 1)] = -cert.p[(0, 1)];
        cert.p[(1, 0)] = -cert.p[(1, 0)];
        let report = validate_certificate(&cert, &d, &coupling, 2000, 10.0, 3);
        assert!(!report.passed());
    }

    #[test]
    fn linear_closed_loop_satisfies_the_classical_inequality() {
        // purely linear plant, identity B, no coupling: cross-check the
        // certificate against (A+BK)'P + P(A+BK) + kappa P + mu P P <= 0
        let dict = Dictionary::parse_terms(&["x1", "x2"]).unwrap();
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, -1.0]);
        let b = DMatrix::identity(2, 2);
        let t = 6;
        let states = DMatrix::from_fn(2, t, |r, k| ((r * 3 + k * 5) % 7) as f64 / 3.0 - 1.0);
        let input = DMatrix::from_fn(2, t, |r, k| ((r * 5 + k * 2) % 5) as f64 / 2.0 - 1.0);
        let derivs = &a * &states + &b * &input;
        let states_bar = DMatrix::from_fn(2, t, |r, k| {
            if k == 0 {
                states[(r, 0)] // shared initial condition
            } else {
                ((r * 2 + k * 3) % 6) as f64 / 3.0 - 0.8
            }
        });
        let derivs_bar = &a * &states_bar;
        let d = DataMatrices {
            dict,
            input,
            states: states.clone(),
            internal: DMatrix::zeros(0, t),
            derivs,
            delta: states.clone(),
            states_bar: states_bar.clone(),
            internal_bar: DMatrix::zeros(0, t),
            derivs_bar,
            delta_bar: states_bar,
            x0: states.column(0).into_owned(),
        };
        let coupling = DMatrix::zeros(2, 0);
        let opt = SynthesisOptions {
            kappa: 0.8,
            mu: 0.4,
            validation_samples: 500,
            ..SynthesisOptions::default()
        };
        let cert = synthesize_iss(&d, &coupling, &opt).unwrap();
        let k_lin = cert.k.columns(0, 2).into_owned();
        let acl = &a + &b * k_lin;
        let classical = acl.transpose() * &cert.p
            + &cert.p * acl
            + &cert.p * opt.kappa
            + &cert.p * &cert.p * opt.mu;
        assert!(
            linalg::lambda_max_sym(&classical) <= 1e-6,
            "lambda_max = {:.3e}",
            linalg::lambda_max_sym(&classical)
        );
    }
}
