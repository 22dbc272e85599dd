//! Output-probability ratio audits for the multi-bit encoder.
//!
//! For one dimension the encoder emits `+1` with probability `(m/d)·π(x_i)`,
//! `-1` with `(m/d)·(1-π(x_i))` and `0` otherwise, where `π` is the clamped
//! [`bernoulli_param`]. ε-LDP per dimension means every such ratio between two
//! inputs stays below `e^{eps/m}`.

use super::mbm::{bernoulli_param, MbmParams, MultiBitEncoder};
use super::{LdpError, Result};
use rand::Rng;

/// Minimum number of Monte-Carlo trials accepted by [`empirical_ldp_ratio`].
pub const MIN_AUDIT_TRIALS: usize = 10_000;

const WILSON_Z: f64 = 1.959_963_984_540_054;

/// Exact `(Pr[+1], Pr[0], Pr[-1])` for one dimension with feature value `x_i`.
pub fn output_probabilities(x_i: f64, params: &MbmParams) -> (f64, f64, f64) {
    let q = params.m() as f64 / params.d() as f64;
    let pi = bernoulli_param(x_i, params).clamp(0.0, 1.0);
    (q * pi, 1.0 - q, q * (1.0 - pi))
}

fn ratio(num: f64, den: f64) -> f64 {
    match (num == 0.0, den == 0.0) {
        (true, true) => 1.0,
        (false, true) => f64::INFINITY,
        _ => num / den,
    }
}

/// Per dimension, the largest ratio `Pr[out | x1] / Pr[out | x2]` in either
/// direction over `out ∈ {-1, +1}`. Returns `+inf` where one input makes an
/// output impossible and the other does not.
pub fn analytic_max_ratio(x1: &[f64], x2: &[f64], params: &MbmParams) -> Result<Vec<f64>> {
    check_len(x1, params)?;
    check_len(x2, params)?;
    Ok(x1
        .iter()
        .zip(x2)
        .map(|(&a, &b)| {
            let (pa, _, ma) = output_probabilities(a, params);
            let (pb, _, mb) = output_probabilities(b, params);
            [ratio(pa, pb), ratio(pb, pa), ratio(ma, mb), ratio(mb, ma)].into_iter().fold(0.0, f64::max)
        })
        .collect())
}

fn check_len(x: &[f64], params: &MbmParams) -> Result<()> {
    if x.len() != params.d() {
        return Err(LdpError::DimensionMismatch { expected: params.d(), actual: x.len() });
    }
    Ok(())
}

/// A binomial proportion with its 95% Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProportionEstimate {
    pub count: usize,
    pub trials: usize,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
}

impl ProportionEstimate {
    pub fn wilson(count: usize, trials: usize) -> Self {
        let n = trials as f64;
        let p = count as f64 / n;
        let z2 = WILSON_Z * WILSON_Z;
        let denom = 1.0 + z2 / n;
        let center = (p + z2 / (2.0 * n)) / denom;
        let half = WILSON_Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        let lower = if count == 0 { 0.0 } else { (center - half).max(0.0) };
        let upper = if count == trials { 1.0 } else { (center + half).min(1.0) };
        Self { count, trials, estimate: p, lower, upper }
    }
}

/// Estimated `Pr[out | x1] / Pr[out | x2]` for one output symbol.
///
/// `ratio` is `+inf` when the `x2` count is zero but the `x1` count is not;
/// that is the signature of a poisoned input. Both counts zero gives `1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioEstimate {
    pub ratio: f64,
    pub lower: f64,
    pub upper: f64,
    pub numerator: ProportionEstimate,
    pub denominator: ProportionEstimate,
}

impl RatioEstimate {
    fn from_counts(num: usize, den: usize, trials: usize) -> Self {
        let numerator = ProportionEstimate::wilson(num, trials);
        let denominator = ProportionEstimate::wilson(den, trials);
        Self {
            ratio: ratio(numerator.estimate, denominator.estimate),
            lower: ratio(numerator.lower, denominator.upper),
            upper: ratio(numerator.upper, denominator.lower),
            numerator,
            denominator,
        }
    }

    pub fn is_infinite(&self) -> bool {
        self.ratio == f64::INFINITY
    }

    /// True when exactly one side never produced the output, so the ratio is
    /// unbounded in one direction or the other.
    pub fn is_unbounded(&self) -> bool {
        (self.numerator.count == 0) != (self.denominator.count == 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionRatio {
    pub plus: RatioEstimate,
    pub minus: RatioEstimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioAudit {
    pub trials: usize,
    pub dimensions: Vec<DimensionRatio>,
    /// `e^{eps/m}`, the per-dimension bound.
    pub bound: f64,
}

impl RatioAudit {
    /// Dimensions where some output was seen for one input and never for the
    /// other, in either direction.
    pub fn infinite_dimensions(&self) -> Vec<usize> {
        self.dimensions
            .iter()
            .enumerate()
            .filter(|(_, r)| r.plus.is_unbounded() || r.minus.is_unbounded())
            .map(|(i, _)| i)
            .collect()
    }
}

/// Encodes `x1` and `x2` `trials` times each and estimates, per dimension, the
/// ratios of `+1` and `-1` frequencies.
pub fn empirical_ldp_ratio<R: Rng + ?Sized>(
    x1: &[f64],
    x2: &[f64],
    params: &MbmParams,
    trials: usize,
    rng: &mut R,
) -> Result<RatioAudit> {
    check_len(x1, params)?;
    check_len(x2, params)?;
    if trials < MIN_AUDIT_TRIALS {
        return Err(LdpError::TooFewTrials { trials, min: MIN_AUDIT_TRIALS });
    }
    let d = params.d();
    let encoder = MultiBitEncoder::new(*params);
    // [plus1, minus1, plus2, minus2] per dimension
    let mut counts = vec![[0usize; 4]; d];
    for _ in 0..trials {
        for (x, offset) in [(x1, 0), (x2, 2)] {
            let enc = encoder.encode(x, rng)?;
            for (c, &e) in counts.iter_mut().zip(enc.entries()) {
                match e {
                    1 => c[offset] += 1,
                    -1 => c[offset + 1] += 1,
                    _ => {}
                }
            }
        }
    }
    let dimensions = counts
        .into_iter()
        .map(|[p1, m1, p2, m2]| DimensionRatio {
            plus: RatioEstimate::from_counts(p1, p2, trials),
            minus: RatioEstimate::from_counts(m1, m2, trials),
        })
        .collect();
    Ok(RatioAudit { trials, dimensions, bound: params.exp_eps_m() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn extreme_inputs_hit_the_bound() {
        let p = MbmParams::new(2.0, 0.0, 1.0, 4, 2).unwrap();
        let r = analytic_max_ratio(&[1.0; 4], &[0.0; 4], &p).unwrap();
        for v in r {
            assert!((v - p.exp_eps_m()).abs() < 1e-12 * p.exp_eps_m());
        }
    }

    #[test]
    fn empirical_ratio_matches_bound() {
        let p = MbmParams::new(2.0, 0.0, 1.0, 2, 2).unwrap();
        let mut r = rng::stream(17, "audit", &[]);
        let audit = empirical_ldp_ratio(&[1.0, 1.0], &[0.0, 0.0], &p, 20_000, &mut r).unwrap();
        for dim in &audit.dimensions {
            assert!(dim.plus.lower <= p.exp_eps_m() && p.exp_eps_m() <= dim.plus.upper, "{dim:?}");
            assert!((dim.plus.ratio / p.exp_eps_m() - 1.0).abs() < 0.1);
        }
        assert!(audit.infinite_dimensions().is_empty());
    }

    #[test]
    fn identical_inputs_give_unit_ratio() {
        let p = MbmParams::new(1.0, 0.0, 1.0, 3, 1).unwrap();
        let mut r = rng::stream(5, "audit", &[]);
        let audit = empirical_ldp_ratio(&[0.2, 0.5, 0.9], &[0.2, 0.5, 0.9], &p, 30_000, &mut r).unwrap();
        for dim in &audit.dimensions {
            assert!((dim.plus.ratio - 1.0).abs() < 0.1 && (dim.minus.ratio - 1.0).abs() < 0.1, "{dim:?}");
        }
    }

    #[test]
    fn poisoned_input_gives_infinite_sentinel() {
        let p = MbmParams::new(1.0, 0.0, 1.0, 2, 1).unwrap();
        let poison = -1.0 / (p.exp_eps_m() - 1.0);
        let clean = [1.0 + poison, 0.0 + poison];
        let poisoned_alpha = [1.0 + poison, 1.0 + poison];
        let mut r = rng::stream(6, "audit", &[]);
        // x1 has original β in dim 1, x2 has original α there
        let audit = empirical_ldp_ratio(&poisoned_alpha, &clean, &p, 10_000, &mut r).unwrap();
        assert_eq!(audit.infinite_dimensions(), vec![1]);
        assert_eq!(audit.dimensions[1].plus.denominator.count, 0);
        assert!(audit.dimensions[1].plus.is_infinite());
        let reversed = empirical_ldp_ratio(&clean, &poisoned_alpha, &p, 10_000, &mut r).unwrap();
        assert_eq!(reversed.infinite_dimensions(), vec![1]);
        assert_eq!(reversed.dimensions[1].plus.ratio, 0.0);
        let exact = analytic_max_ratio(&poisoned_alpha, &clean, &p).unwrap();
        assert_eq!(exact[1], f64::INFINITY);
        assert!(exact[0].is_finite());
    }

    #[test]
    fn too_few_trials() {
        let p = MbmParams::new(1.0, 0.0, 1.0, 1, 1).unwrap();
        let mut r = rng::stream(0, "audit", &[]);
        assert!(matches!(empirical_ldp_ratio(&[0.0], &[1.0], &p, 10, &mut r), Err(LdpError::TooFewTrials { .. })));
    }

    #[test]
    fn wilson_interval_contains_estimate() {
        let w = ProportionEstimate::wilson(30, 100);
        assert!(w.lower < 0.3 && 0.3 < w.upper);
        let zero = ProportionEstimate::wilson(0, 100);
        assert_eq!(zero.lower, 0.0);
        assert!(zero.upper > 0.0);
    }
}
