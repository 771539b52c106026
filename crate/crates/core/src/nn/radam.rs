//! Rectified Adam: Adam whose adaptive step is scaled by a variance
//! rectification term, falling back to bias-corrected momentum SGD while the
//! second-moment estimate is still unreliable.

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for RadamConfig {
    fn default() -> Self {
        RadamConfig {
            lr: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

impl RadamConfig {
    /// Maximum length of the approximated simple moving average.
    pub fn rho_inf(&self) -> f64 {
        2.0 / (1.0 - self.beta2) - 1.0
    }

    /// Length of the approximated SMA at step `t >= 1`.
    pub fn rho(&self, t: u64) -> f64 {
        let b2t = self.beta2.powf(t as f64);
        self.rho_inf() - 2.0 * t as f64 * b2t / (1.0 - b2t)
    }

    /// Variance rectification term, or `None` while `rho(t) <= 4`.
    pub fn rectification(&self, t: u64) -> Option<f64> {
        let rho = self.rho(t);
        if rho > 4.0 {
            let inf = self.rho_inf();
            Some(((rho - 4.0) * (rho - 2.0) * inf / ((inf - 4.0) * (inf - 2.0) * rho)).sqrt())
        } else {
            None
        }
    }
}

#[derive(Debug, Clone)]
pub struct Radam<S> {
    cfg: RadamConfig,
    t: u64,
    m: Vec<S>,
    v: Vec<S>,
}

impl<S: Scalar> Radam<S> {
    pub fn new(num_params: usize, cfg: RadamConfig) -> Self {
        Radam {
            cfg,
            t: 0,
            m: vec![S::zero(); num_params],
            v: vec![S::zero(); num_params],
        }
    }

    pub fn config(&self) -> &RadamConfig {
        &self.cfg
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    pub fn first_moment(&self) -> &[S] {
        &self.m
    }

    pub fn second_moment(&self) -> &[S] {
        &self.v
    }

    pub fn step(&mut self, params: &mut [S], grads: &[S]) {
        assert_eq!(params.len(), self.m.len(), "parameter count changed");
        assert_eq!(grads.len(), self.m.len(), "gradient shape");
        self.t += 1;
        let c = &self.cfg;
        let (b1, b2) = (S::lit(c.beta1), S::lit(c.beta2));
        let (one_b1, one_b2) = (S::lit(1.0 - c.beta1), S::lit(1.0 - c.beta2));
        let bias1 = 1.0 - c.beta1.powf(self.t as f64);
        let bias2 = 1.0 - c.beta2.powf(self.t as f64);
        let eps = S::lit(c.eps);

        match c.rectification(self.t) {
            Some(r) => {
                let step = S::lit(c.lr * r / bias1);
                let inv_bias2 = S::lit(1.0 / bias2);
                for (((p, &g), m), v) in params
                    .iter_mut()
                    .zip(grads)
                    .zip(&mut self.m)
                    .zip(&mut self.v)
                {
                    *m = b1 * *m + one_b1 * g;
                    *v = b2 * *v + one_b2 * g * g;
                    *p -= step * *m / ((*v * inv_bias2).sqrt() + eps);
                }
            }
            None => {
                let step = S::lit(c.lr / bias1);
                for (((p, &g), m), v) in params
                    .iter_mut()
                    .zip(grads)
                    .zip(&mut self.m)
                    .zip(&mut self.v)
                {
                    *m = b1 * *m + one_b1 * g;
                    *v = b2 * *v + one_b2 * g * g;
                    *p -= step * *m;
                }
            }
        }
    }
}
