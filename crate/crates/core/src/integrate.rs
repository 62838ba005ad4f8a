//! Fixed-step explicit integrators over per-subsystem state blocks.
//!
//! Both data collection and closed-loop simulation step the same way: the
//! state is a list of per-subsystem vectors and the right-hand side maps the
//! whole list at a stage time. Stage evaluations see a consistent snapshot of
//! every subsystem, so internal inputs always equal neighbor states at the
//! evaluation instant.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    Rk4,
    Euler,
}

type State = Vec<DVector<f64>>;

fn axpy(y: &State, alpha: f64, x: &State) -> State {
    y.iter()
        .zip(x.iter())
        .map(|(yi, xi)| yi + xi * alpha)
        .collect()
}

/// One explicit step of `x' = f(t, x)`.
pub fn step<F>(scheme: Scheme, f: &F, t: f64, x: &State, h: f64) -> State
where
    F: Fn(f64, &State) -> State,
{
    match scheme {
        Scheme::Euler => {
            let k1 = f(t, x);
            axpy(x, h, &k1)
        }
        Scheme::Rk4 => {
            let k1 = f(t, x);
            let k2 = f(t + 0.5 * h, &axpy(x, 0.5 * h, &k1));
            let k3 = f(t + 0.5 * h, &axpy(x, 0.5 * h, &k2));
            let k4 = f(t + h, &axpy(x, h, &k3));
            let mut out = x.clone();
            for i in 0..out.len() {
                out[i] += (&k1[i] + &k2[i] * 2.0 + &k3[i] * 2.0 + &k4[i]) * (h / 6.0);
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn rk4_is_fourth_order_on_exponential_decay() {
        let f = |_t: f64, x: &State| vec![-&x[0]];
        let run = |h: f64| {
            let mut x = vec![dvector![1.0]];
            let steps = (1.0 / h).round() as usize;
            let mut t = 0.0;
            for _ in 0..steps {
                x = step(Scheme::Rk4, &f, t, &x, h);
                t += h;
            }
            (x[0][0] - (-1.0f64).exp()).abs()
        };
        let e1 = run(0.1);
        let e2 = run(0.05);
        // fourth order: halving h shrinks the error by ~16
        assert!(e1 / e2 > 12.0, "e1={e1:.3e} e2={e2:.3e}");
    }

    #[test]
    fn euler_step_matches_hand_value() {
        let f = |_t: f64, x: &State| vec![dvector![2.0 * x[0][0]]];
        let x = vec![dvector![3.0]];
        let out = step(Scheme::Euler, &f, 0.0, &x, 0.5);
        assert_eq!(out[0][0], 6.0);
    }
}
