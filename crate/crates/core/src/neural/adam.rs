//! Adam with a step-decayed learning rate.

use alloc::vec;
use alloc::vec::Vec;

use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Multiplier applied at each third of training.
    pub decay: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            decay: 0.33,
        }
    }
}

impl AdamConfig {
    /// Learning rate for 0-based `step` of `total`: the base rate times
    /// `decay^⌊3·step/total⌋`, so it drops twice over a run.
    pub fn learning_rate_at(&self, step: u64, total: u64) -> f64 {
        let thirds = if total == 0 { 0 } else { (3 * step / total).min(2) };
        self.learning_rate * libm::pow(self.decay, thirds as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Applied,
    /// A gradient entry was NaN or infinite; parameters were left untouched.
    SkippedNonFinite,
}

/// First/second moments per parameter group plus the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState<T> {
    pub config: AdamConfig,
    pub step: u64,
    pub first_moment: Vec<Vec<T>>,
    pub second_moment: Vec<Vec<T>>,
}

impl<T: Real> OptimizerState<T> {
    pub fn new(config: AdamConfig) -> Self {
        OptimizerState {
            config,
            step: 0,
            first_moment: Vec::new(),
            second_moment: Vec::new(),
        }
    }

    /// Groups whose length changed since the last step (a re-allocated
    /// parameter array) restart from zero moments.
    fn conform(&mut self, params: &[&mut [T]]) {
        self.first_moment.resize_with(params.len(), Vec::new);
        self.second_moment.resize_with(params.len(), Vec::new);
        for (i, p) in params.iter().enumerate() {
            if self.first_moment[i].len() != p.len() {
                self.first_moment[i] = vec![T::zero(); p.len()];
                self.second_moment[i] = vec![T::zero(); p.len()];
            }
        }
    }

    /// One bias-corrected Adam update with learning rate `lr`. The counter
    /// advances even when the step is skipped.
    pub fn step(&mut self, params: &mut [&mut [T]], grads: &[&[T]], lr: f64) -> StepOutcome {
        assert_eq!(params.len(), grads.len(), "gradient groups do not match parameters");
        self.step += 1;
        if !grads.iter().all(|g| g.iter().all(|x| x.is_finite())) {
            log::warn!("non-finite gradient at optimizer step {}; update skipped", self.step);
            return StepOutcome::SkippedNonFinite;
        }
        self.conform(params);
        let c = self.config;
        let t = self.step as f64;
        let bc1 = 1.0 - libm::pow(c.beta1, t);
        let bc2 = 1.0 - libm::pow(c.beta2, t);
        let step_size = T::from_f64(lr / bc1);
        let inv_bc2_sqrt = T::from_f64(1.0 / libm::sqrt(bc2));
        let (b1, b2) = (T::from_f64(c.beta1), T::from_f64(c.beta2));
        let (ob1, ob2) = (T::one() - b1, T::one() - b2);
        let eps = T::from_f64(c.epsilon);
        for (gi, p) in params.iter_mut().enumerate() {
            let g = grads[gi];
            assert_eq!(g.len(), p.len(), "gradient group {gi} has the wrong length");
            let m = &mut self.first_moment[gi];
            let v = &mut self.second_moment[gi];
            for i in 0..p.len() {
                m[i] = b1 * m[i] + ob1 * g[i];
                v[i] = b2 * v[i] + ob2 * g[i] * g[i];
                p[i] -= step_size * m[i] / ((v[i]).sqrt() * inv_bc2_sqrt + eps);
            }
        }
        StepOutcome::Applied
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Gradients;

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut opt = OptimizerState::<f64>::new(AdamConfig::default());
        let mut p = vec![1.0, -2.0];
        let g = Gradients {
            groups: vec![vec![0.37, -5.0]],
        };
        opt.step(&mut [p.as_mut_slice()], &g.slices(), 1e-3);
        assert!((p[0] - (1.0 - 1e-3)).abs() < 1e-8);
        assert!((p[1] - (-2.0 + 1e-3)).abs() < 1e-8);
        assert_eq!(opt.step, 1);
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut opt = OptimizerState::<f64>::new(AdamConfig::default());
        let mut p = vec![0.5; 3];
        let g = Gradients { groups: vec![vec![0.0; 3]] };
        for _ in 0..3 {
            opt.step(&mut [p.as_mut_slice()], &g.slices(), 1e-3);
        }
        assert_eq!(p, vec![0.5; 3]);
    }

    #[test]
    fn non_finite_gradient_is_skipped_but_counted() {
        let mut opt = OptimizerState::<f32>::new(AdamConfig::default());
        let mut p = vec![0.5f32; 2];
        let g = Gradients {
            groups: vec![vec![f32::NAN, 1.0]],
        };
        assert_eq!(opt.step(&mut [p.as_mut_slice()], &g.slices(), 1e-3), StepOutcome::SkippedNonFinite);
        assert_eq!(p, vec![0.5; 2]);
        assert_eq!(opt.step, 1);
    }

    #[test]
    fn resized_group_restarts_moments() {
        let mut opt = OptimizerState::<f64>::new(AdamConfig::default());
        let mut p = vec![0.0; 2];
        opt.step(&mut [p.as_mut_slice()], &Gradients { groups: vec![vec![1.0; 2]] }.slices(), 1e-3);
        let mut q = vec![0.0; 5];
        opt.step(&mut [q.as_mut_slice()], &Gradients { groups: vec![vec![1.0; 5]] }.slices(), 1e-3);
        assert_eq!(opt.first_moment[0].len(), 5);
    }

    #[test]
    fn learning_rate_decays_per_third() {
        let c = AdamConfig::default();
        let total = 3000;
        assert_eq!(c.learning_rate_at(0, total), 1e-3);
        assert!((c.learning_rate_at(1000, total) - 1e-3 * 0.33).abs() < 1e-15);
        assert!((c.learning_rate_at(total * 2 / 3 + 1, total) - 1e-3 * 0.33 * 0.33).abs() < 1e-15);
        assert!((c.learning_rate_at(total - 1, total) - 1e-3 * 0.33 * 0.33).abs() < 1e-15);
    }
}
