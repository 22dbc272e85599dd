use super::{AttackError, Result};

/// Cosine similarity; `degenerate` marks a zero-norm input, reported as 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cosine {
    pub value: f64,
    pub degenerate: bool,
}

pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<Cosine> {
    if a.len() != b.len() {
        return Err(AttackError::LengthMismatch(a.len(), b.len()));
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Ok(Cosine { value: 0.0, degenerate: true });
    }
    Ok(Cosine { value: (dot / (na * nb)).clamp(-1.0, 1.0), degenerate: false })
}

/// Mean absolute difference `Σ|a_i − b_i| / len`; 0 for empty vectors.
pub fn mean_feature_difference(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(AttackError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64)
}
