use super::{Gradient, ModelError, ModelState};

/// SGD with heavy-ball momentum and L2 weight decay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.002,
            momentum: 0.9,
            weight_decay: 0.005,
            batch_size: 16,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: String| Err(ModelError::InvalidOptimizer(m));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad(format!("momentum must be in [0, 1), got {}", self.momentum));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return bad(format!("weight_decay must be non-negative, got {}", self.weight_decay));
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1".into());
        }
        Ok(())
    }
}

/// `v <- momentum v + grad + weight_decay param; param <- param - lr v`.
pub fn sgd_step(mut model: ModelState, grad: &Gradient, config: &OptimizerConfig) -> Result<ModelState, ModelError> {
    if grad.weights.len() != model.weights.len() || grad.bias.len() != model.bias.len() {
        return Err(ModelError::ShapeMismatch);
    }
    if !grad.is_finite() {
        return Err(ModelError::NonFiniteGradient);
    }
    let update = |params: &mut [f64], vel: &mut [f64], g: &[f64]| {
        for ((p, v), g) in params.iter_mut().zip(vel.iter_mut()).zip(g) {
            *v = config.momentum * *v + g + config.weight_decay * *p;
            *p -= config.learning_rate * *v;
        }
    };
    update(&mut model.weights, &mut model.weight_velocity, &grad.weights);
    update(&mut model.bias, &mut model.bias_velocity, &grad.bias);
    Ok(model)
}
