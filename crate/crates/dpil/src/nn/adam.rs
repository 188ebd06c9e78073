//! Adam optimizer with the standard bias-corrected update.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::mlp::{Gradients, Mlp};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdamState {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub step_count: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl AdamState {
    /// Defaults: beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8.
    pub fn new(learning_rate: f64, n_params: usize) -> Result<Self> {
        if learning_rate <= 0.0 || !learning_rate.is_finite() {
            return Err(Error::rejected(format!(
                "learning_rate must be positive, got {learning_rate}"
            )));
        }
        Ok(AdamState {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step_count: 0,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
        })
    }

    /// One Adam update in place. Errors on shape mismatch and leaves the
    /// parameters untouched if any updated value would be non-finite.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if grads.len() != params.len() {
            return Err(Error::dim("gradients", params.len(), grads.len()));
        }
        if params.len() != self.m.len() {
            return Err(Error::dim("optimizer moments", self.m.len(), params.len()));
        }
        self.step_count += 1;
        let t = self.step_count as f64;
        let bc1 = 1.0 - self.beta1.powf(t);
        let bc2 = 1.0 - self.beta2.powf(t);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            let next = params[i] - self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
            if !next.is_finite() {
                return Err(Error::Numerical(format!(
                    "non-finite parameter after Adam step {t} at index {i}"
                )));
            }
            params[i] = next;
        }
        Ok(())
    }
}

/// Convenience: one Adam step on a whole network's flat parameter vector.
pub fn adam_step_mlp(net: &mut Mlp, opt: &mut AdamState, grads: &Gradients) -> Result<()> {
    let mut params = net.params_flat();
    opt.step(&mut params, &grads.0)?;
    net.set_params_flat(&params)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradients_leave_parameters_unchanged() {
        let mut opt = AdamState::new(0.1, 3).unwrap();
        let mut params = vec![1.0, -2.0, 0.5];
        opt.step(&mut params, &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(params, vec![1.0, -2.0, 0.5]);
        assert_eq!(opt.step_count, 1);
    }

    #[test]
    fn first_step_magnitude_is_learning_rate() {
        // With g = 1 at t = 1 the bias-corrected update is lr / (1 + eps).
        let mut opt = AdamState::new(0.1, 1).unwrap();
        let mut params = vec![2.0];
        opt.step(&mut params, &[1.0]).unwrap();
        let delta = 2.0 - params[0];
        assert!((delta - 0.1).abs() < 1e-6, "delta = {delta}");
        assert!(delta > 0.0);
    }

    #[test]
    fn moment_decay_shrinks_later_steps() {
        // After one unit-gradient step, zero-gradient steps keep moving the
        // parameter (momentum) but each move is strictly smaller.
        let mut opt = AdamState::new(0.1, 1).unwrap();
        let mut params = vec![0.0];
        opt.step(&mut params, &[1.0]).unwrap();
        let p1 = params[0];
        opt.step(&mut params, &[0.0]).unwrap();
        let p2 = params[0];
        opt.step(&mut params, &[0.0]).unwrap();
        let p3 = params[0];
        let move2 = (p2 - p1).abs();
        let move3 = (p3 - p2).abs();
        assert!(move2 > move3, "moves {move2} {move3}");
        assert!(move2 < 0.1);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let mut opt = AdamState::new(0.1, 2).unwrap();
        let mut params = vec![0.0, 0.0];
        assert!(opt.step(&mut params, &[1.0]).is_err());
        let mut wrong = vec![0.0; 3];
        assert!(opt.step(&mut wrong, &[1.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn parameters_stay_finite_or_error() {
        let mut opt = AdamState::new(0.1, 1).unwrap();
        let mut params = vec![f64::MAX];
        // A huge gradient cannot push a finite parameter to infinity through
        // Adam's normalized update, so this succeeds and stays finite.
        opt.step(&mut params, &[1e300]).unwrap();
        assert!(params[0].is_finite());
    }
}
