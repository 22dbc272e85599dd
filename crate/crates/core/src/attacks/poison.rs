use super::{AttackError, Result};
use crate::ldp::{EncodedVector, MbmParams};
use crate::matrix::DenseMatrix;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// `p = (alpha − beta) / (e^{eps/m} − 1)`, the shift that drives the encoder's
/// `+1` probability for an original `alpha` to exactly zero.
pub fn compute_poison(params: &MbmParams) -> f64 {
    (params.alpha() - params.beta()) / (params.exp_eps_m() - 1.0)
}

/// Targets and the poison computed for a given mechanism.
#[derive(Debug, Clone, PartialEq)]
pub struct PoisonConfig {
    pub targets: Vec<usize>,
    pub params: MbmParams,
    pub p: f64,
}

impl PoisonConfig {
    pub fn new(targets: Vec<usize>, params: MbmParams) -> Self {
        let p = compute_poison(&params);
        Self { targets, params, p }
    }
}

/// Adds `p` to every entry of the target rows.
pub fn apply_poison(features: &DenseMatrix, targets: &[usize], p: f64) -> DenseMatrix {
    let mut out = features.clone();
    for &t in targets {
        out.row_mut(t).iter_mut().for_each(|v| *v += p);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueDomain {
    /// Features take only the values `alpha` and `beta`.
    Binary,
    General,
}

/// What the server concludes about one original feature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Verdict {
    /// The original value is known exactly.
    Exact(f64),
    /// The original value is known not to be `alpha`.
    ExcludedAlpha,
    NoInformation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoisonInferenceResult {
    /// Merged verdict per target and dimension over all of the target's responses.
    pub verdicts: BTreeMap<usize, Vec<Verdict>>,
    /// Number of `+1` entries observed on targets; each is one inference.
    pub num_inferences: usize,
    pub num_correct: usize,
    /// `num_correct / num_inferences`, `None` when nothing was inferred.
    pub success_rate: Option<f64>,
}

impl PoisonInferenceResult {
    pub fn exact_verdicts(&self) -> usize {
        self.verdicts.values().flatten().filter(|v| matches!(v, Verdict::Exact(_))).count()
    }
}

/// Reads original values off the `+1` entries of poisoned targets' responses.
///
/// `responses` holds `(node, encoded)` pairs and may contain several responses
/// per node; entries for non-targets are ignored. A `+1` means the original
/// value was not `alpha`: in the binary domain it was `beta`. Success is
/// measured against `true_features`.
pub fn poison_inference(
    responses: &[(usize, EncodedVector)],
    targets: &[usize],
    params: &MbmParams,
    domain: ValueDomain,
    true_features: &DenseMatrix,
) -> Result<PoisonInferenceResult> {
    let d = params.d();
    if true_features.cols() != d {
        return Err(AttackError::LengthMismatch(true_features.cols(), d));
    }
    let mut verdicts: BTreeMap<usize, Vec<Verdict>> = BTreeMap::new();
    for &t in targets {
        if t >= true_features.rows() {
            return Err(AttackError::MissingResponse(t));
        }
        verdicts.insert(t, vec![Verdict::NoInformation; d]);
    }
    let (mut num_inferences, mut num_correct) = (0, 0);
    for (node, enc) in responses {
        let Some(row) = verdicts.get_mut(node) else { continue };
        if enc.len() != d {
            return Err(AttackError::LengthMismatch(enc.len(), d));
        }
        let truth = true_features.row(*node);
        for (i, &e) in enc.entries().iter().enumerate() {
            if e != 1 {
                continue;
            }
            let (verdict, correct) = match domain {
                ValueDomain::Binary => (Verdict::Exact(params.beta()), truth[i] == params.beta()),
                ValueDomain::General => (Verdict::ExcludedAlpha, truth[i] != params.alpha()),
            };
            row[i] = verdict;
            num_inferences += 1;
            num_correct += usize::from(correct);
        }
    }
    let success_rate = (num_inferences > 0).then(|| num_correct as f64 / num_inferences as f64);
    Ok(PoisonInferenceResult { verdicts, num_inferences, num_correct, success_rate })
}
