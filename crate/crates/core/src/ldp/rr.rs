use super::{LdpError, Result};
use rand::Rng;

/// Label randomized response over `num_classes` classes with budget `eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RrParams {
    eps: f64,
    num_classes: usize,
}

impl RrParams {
    pub fn new(eps: f64, num_classes: usize) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(LdpError::InvalidParams(format!("label eps = {eps} must be positive")));
        }
        if num_classes < 2 {
            return Err(LdpError::InvalidParams(format!("randomized response needs >= 2 classes, got {num_classes}")));
        }
        Ok(Self { eps, num_classes })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// `e^eps / (e^eps + C - 1)`
    pub fn keep_probability(&self) -> f64 {
        let c = self.num_classes as f64;
        // 1 / (1 + (C-1) e^{-eps}) stays finite for huge eps
        1.0 / (1.0 + (c - 1.0) * (-self.eps).exp())
    }

    /// Probability of reporting one particular wrong class.
    pub fn flip_probability_per_class(&self) -> f64 {
        let c = self.num_classes as f64;
        1.0 / (self.eps.exp() + c - 1.0)
    }
}

/// Keeps `label` with [`RrParams::keep_probability`], otherwise reports a
/// uniformly chosen different class.
pub fn randomized_response<R: Rng + ?Sized>(label: usize, params: &RrParams, rng: &mut R) -> Result<usize> {
    let c = params.num_classes;
    if label >= c {
        return Err(LdpError::LabelOutOfRange { label, num_classes: c });
    }
    if rng.gen::<f64>() < params.keep_probability() {
        return Ok(label);
    }
    let other = rng.gen_range(0..c - 1);
    Ok(if other >= label { other + 1 } else { other })
}
