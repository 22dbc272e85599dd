use super::model::{Model, ModelConfig};
use super::Result;
use crate::graph::Dataset;
use crate::rng;

const STEP: f64 = 1e-5;
const WEIGHT_DECAY: f64 = 5e-4;

/// Largest relative error between analytic gradients and central finite
/// differences over every parameter of a freshly initialized model.
///
/// The loss is the training loss on the dataset's own features and labels
/// over its train mask, with weight decay and without dropout. Relative error
/// is `|a - n| / max(|a|, |n|, 1e-8)`.
pub fn grad_check(model_config: &ModelConfig, dataset: &Dataset, seed: u64) -> Result<f64> {
    let mut r = rng::stream(seed, "gradcheck/init", &[]);
    let model = Model::init(model_config, dataset.feature_dim(), dataset.num_classes(), &mut r)?;
    max_relative_error(&model, dataset)
}

pub(crate) fn max_relative_error(model: &Model, dataset: &Dataset) -> Result<f64> {
    let graph = dataset.graph();
    let x = dataset.features();
    let y = dataset.labels();
    let mask = &dataset.masks().train;
    let (_, grads) = model.loss_and_gradients(graph, x, y, mask, WEIGHT_DECAY)?;
    let analytic: Vec<f64> = grads.iter().flat_map(|l| l.weight.as_slice().iter().chain(&l.bias).copied()).collect();

    let mut probe = model.clone();
    let mut worst: f64 = 0.0;
    let mut index = 0;
    let slots: Vec<usize> = probe.parameters_mut().map(|s| s.len()).collect();
    for (slot, len) in slots.into_iter().enumerate() {
        for i in 0..len {
            let original = nth_slice(&mut probe, slot)[i];
            nth_slice(&mut probe, slot)[i] = original + STEP;
            let (up, _) = probe.loss_and_gradients(graph, x, y, mask, WEIGHT_DECAY)?;
            nth_slice(&mut probe, slot)[i] = original - STEP;
            let (down, _) = probe.loss_and_gradients(graph, x, y, mask, WEIGHT_DECAY)?;
            nth_slice(&mut probe, slot)[i] = original;
            let numeric = (up - down) / (2.0 * STEP);
            let a = analytic[index];
            let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
            worst = worst.max(err);
            index += 1;
        }
    }
    Ok(worst)
}

fn nth_slice(model: &mut Model, slot: usize) -> &mut [f64] {
    model.parameters_mut().nth(slot).expect("slot in range")
}
