use super::metrics::{cosine_similarity, mean_feature_difference};
use super::{AttackError, Result};
use crate::graph::Graph;
use crate::ldp::{EncodedVector, RectifiedVector};
use crate::matrix::DenseMatrix;

/// Per-target predictions and their agreement with the true rows.
#[derive(Debug, Clone, PartialEq)]
pub struct InferenceResult {
    pub targets: Vec<usize>,
    /// One row per target, in target order.
    pub predicted_features: DenseMatrix,
    pub cosine: Vec<f64>,
    /// Targets whose cosine was undefined (zero-norm vector) and reported as 0.
    pub degenerate: Vec<bool>,
    pub mean_fd: Vec<f64>,
}

impl InferenceResult {
    pub fn mean_cosine(&self) -> f64 {
        mean(&self.cosine)
    }

    pub fn mean_abs_cosine(&self) -> f64 {
        self.cosine.iter().map(|c| c.abs()).sum::<f64>() / self.cosine.len().max(1) as f64
    }

    pub fn mean_feature_difference(&self) -> f64 {
        mean(&self.mean_fd)
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len().max(1) as f64
}

fn infer_with<F>(
    num_responses: usize,
    row: F,
    graph: &Graph,
    targets: &[usize],
    true_features: &DenseMatrix,
) -> Result<InferenceResult>
where
    F: Fn(usize) -> Vec<f64>,
{
    let d = true_features.cols();
    let mut predicted = DenseMatrix::zeros(0, d);
    let (mut cosine, mut degenerate, mut mean_fd) = (Vec::new(), Vec::new(), Vec::new());
    for &t in targets {
        if t >= graph.num_nodes() || t >= true_features.rows() {
            return Err(AttackError::MissingResponse(t));
        }
        let hood: Vec<usize> = std::iter::once(t).chain(graph.neighbors(t).iter().copied()).collect();
        let mut sum = vec![0.0; d];
        for &u in &hood {
            if u >= num_responses {
                return Err(AttackError::MissingResponse(u));
            }
            let r = row(u);
            if r.len() != d {
                return Err(AttackError::LengthMismatch(r.len(), d));
            }
            sum.iter_mut().zip(&r).for_each(|(s, v)| *s += v);
        }
        let prediction: Vec<f64> = sum.into_iter().map(|s| s / hood.len() as f64).collect();
        let truth = true_features.row(t);
        let c = cosine_similarity(&prediction, truth)?;
        cosine.push(c.value);
        degenerate.push(c.degenerate);
        mean_fd.push(mean_feature_difference(&prediction, truth)?);
        predicted.push_row(&prediction);
    }
    Ok(InferenceResult { targets: targets.to_vec(), predicted_features: predicted, cosine, degenerate, mean_fd })
}

/// Predicts each target's features as the mean of the rectified responses of
/// the target and its neighbors. `rectified[v]` is node `v`'s response.
pub fn infer_features_mean(
    rectified: &[RectifiedVector],
    graph: &Graph,
    targets: &[usize],
    true_features: &DenseMatrix,
) -> Result<InferenceResult> {
    infer_with(rectified.len(), |u| rectified[u].entries().to_vec(), graph, targets, true_features)
}

/// Ablation: the same mean over raw encoded responses, skipping the rectifier.
pub fn infer_features_mean_encoded(
    encoded: &[EncodedVector],
    graph: &Graph,
    targets: &[usize],
    true_features: &DenseMatrix,
) -> Result<InferenceResult> {
    infer_with(
        encoded.len(),
        |u| encoded[u].entries().iter().map(|&e| f64::from(e)).collect(),
        graph,
        targets,
        true_features,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ldp::{multibit_encode, multibit_rectify, MbmParams};
    use crate::rng;

    #[test]
    fn exact_isolated_response() {
        let truth = DenseMatrix::from_vec(1, 3, vec![0.2, 0.0, 0.7]);
        let r = vec![RectifiedVector::from_vec(vec![0.2, 0.0, 0.7])];
        let out = infer_features_mean(&r, &Graph::empty(1), &[0], &truth).unwrap();
        assert!((out.cosine[0] - 1.0).abs() < 1e-12);
        assert_eq!(out.mean_fd[0], 0.0);
    }

    #[test]
    fn averages_the_closed_neighborhood() {
        let g = Graph::path(3);
        let r: Vec<RectifiedVector> = [[0.0, 3.0], [3.0, 0.0], [6.0, 3.0]].iter().map(|v| RectifiedVector::from_vec(v.to_vec())).collect();
        let truth = DenseMatrix::from_vec(3, 2, vec![0.0; 6]);
        let out = infer_features_mean(&r, &g, &[1, 0], &truth).unwrap();
        assert_eq!(out.predicted_features.row(0), &[3.0, 2.0]);
        assert_eq!(out.predicted_features.row(1), &[1.5, 1.5]);
        assert!(out.degenerate.iter().all(|&d| d));
    }

    #[test]
    fn missing_responses() {
        let truth = DenseMatrix::zeros(3, 1);
        let r = vec![RectifiedVector::from_vec(vec![0.0]); 2];
        assert!(matches!(infer_features_mean(&r, &Graph::path(3), &[1], &truth), Err(AttackError::MissingResponse(2))));
    }

    #[test]
    fn permutation_equivariant_in_targets() {
        let g = Graph::cycle(5);
        let r: Vec<RectifiedVector> = (0..5).map(|i| RectifiedVector::from_vec(vec![i as f64, 1.0])).collect();
        let truth = DenseMatrix::from_vec(5, 2, (0..10).map(|i| (i % 3) as f64).collect());
        let a = infer_features_mean(&r, &g, &[0, 3, 4], &truth).unwrap();
        let b = infer_features_mean(&r, &g, &[4, 0, 3], &truth).unwrap();
        assert_eq!(a.cosine[0], b.cosine[1]);
        assert_eq!(a.mean_fd[2], b.mean_fd[0]);
        assert_eq!(a.predicted_features.row(1), b.predicted_features.row(2));
    }

    #[test]
    fn large_identical_neighborhood_converges() {
        // target 0 sees 2000 responses of the same row
        let n = 2001;
        let d = 4;
        let row = [0.2, 0.5, 0.9, 0.0];
        let params = MbmParams::new(40.0, 0.0, 1.0, d, d).unwrap();
        let r: Vec<RectifiedVector> = (0..n)
            .map(|v| {
                let enc = multibit_encode(&row, &params, &mut rng::stream(3, "t", &[v as u64])).unwrap();
                multibit_rectify(&enc, &params).unwrap()
            })
            .collect();
        let truth = DenseMatrix::from_rows(&vec![row; n], d);
        let out = infer_features_mean(&r, &Graph::star(n - 1), &[0], &truth).unwrap();
        // per-entry std ≤ 0.5 for m = d and large eps, so |error| ≲ 5·0.5/√n
        assert!(out.mean_fd[0] < 5.0 * 0.5 / (n as f64).sqrt(), "{}", out.mean_fd[0]);
        let raw: Vec<EncodedVector> =
            (0..n).map(|v| multibit_encode(&row, &params, &mut rng::stream(3, "t", &[v as u64])).unwrap()).collect();
        let ablation = infer_features_mean_encoded(&raw, &Graph::star(n - 1), &[0], &truth).unwrap();
        assert!(ablation.mean_fd[0] > out.mean_fd[0]);
    }
}
