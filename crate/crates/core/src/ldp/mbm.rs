use super::{LdpError, Result};
use rand::seq::index;
use rand::Rng;
use std::sync::atomic::{AtomicU64, Ordering};

/// Parameters of the multi-bit mechanism.
///
/// `eps` is the per-row feature budget, `[alpha, beta]` the agreed feature
/// domain, `d` the row length and `m` the number of dimensions each client
/// reports. `e^{eps/m}` is computed once here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MbmParams {
    eps: f64,
    alpha: f64,
    beta: f64,
    d: usize,
    m: usize,
    exp_eps_m: f64,
    // 1/(e^{eps/m}+1) and (e^{eps/m}-1)/(e^{eps/m}+1), finite even when e^{eps/m} overflows
    low: f64,
    spread: f64,
}

impl MbmParams {
    pub fn new(eps: f64, alpha: f64, beta: f64, d: usize, m: usize) -> Result<Self> {
        if !(eps > 0.0) || eps.is_nan() {
            return Err(LdpError::InvalidParams(format!("eps = {eps} must be positive")));
        }
        if !(alpha < beta) || !alpha.is_finite() || !beta.is_finite() {
            return Err(LdpError::InvalidParams(format!("alpha = {alpha} must be below beta = {beta}")));
        }
        if m == 0 || m > d {
            return Err(LdpError::InvalidParams(format!("m = {m} must lie in [1, d = {d}]")));
        }
        let t = eps / m as f64;
        let exp_eps_m = t.exp();
        let spread = (t / 2.0).tanh();
        if !(spread > 0.0) {
            return Err(LdpError::InvalidParams(format!("eps / m = {t} is too small to separate outputs")));
        }
        Ok(Self { eps, alpha, beta, d, m, exp_eps_m, low: 1.0 / (exp_eps_m + 1.0), spread })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `e^{eps/m}`
    pub fn exp_eps_m(&self) -> f64 {
        self.exp_eps_m
    }

    /// Scale of the rectifier: `(d/m) · (beta-alpha)/2 · (e^{eps/m}+1)/(e^{eps/m}-1)`.
    pub fn rectifier_scale(&self) -> f64 {
        (self.d as f64 / self.m as f64) * ((self.beta - self.alpha) / 2.0) / self.spread
    }

    /// Domain midpoint `(alpha + beta) / 2`.
    pub fn midpoint(&self) -> f64 {
        (self.alpha + self.beta) / 2.0
    }

    /// The three values a rectified entry can take, for encoded `-1`, `0`, `+1`.
    pub fn rectifier_levels(&self) -> [f64; 3] {
        let s = self.rectifier_scale();
        let mid = self.midpoint();
        [mid - s, mid, mid + s]
    }
}

/// Raw success probability of the Bernoulli draw for one sampled dimension.
///
/// No range check on `x_i`: values outside `[alpha, beta]` give parameters
/// outside `[0, 1]`, which the encoder clamps at the draw.
pub fn bernoulli_param(x_i: f64, params: &MbmParams) -> f64 {
    params.low + ((x_i - params.alpha) / (params.beta - params.alpha)) * params.spread
}

/// Client output of the multi-bit encoder: entries in `{-1, 0, +1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EncodedVector(Vec<i8>);

impl EncodedVector {
    pub fn new(entries: Vec<i8>) -> Result<Self> {
        if let Some(&bad) = entries.iter().find(|e| !(-1..=1).contains(*e)) {
            return Err(LdpError::InvalidEncoding(bad));
        }
        Ok(Self(entries))
    }

    pub fn entries(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn nonzero_count(&self) -> usize {
        self.0.iter().filter(|&&e| e != 0).count()
    }
}

/// Server-side unbiased estimate of a feature row.
#[derive(Debug, Clone, PartialEq)]
pub struct RectifiedVector(Vec<f64>);

impl RectifiedVector {
    pub fn from_vec(entries: Vec<f64>) -> Self {
        Self(entries)
    }

    pub fn entries(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Multi-bit encoder that counts draws whose raw Bernoulli parameter fell
/// outside `[0, 1]`.
///
/// Shared by reference across threads; the counter is the only mutable state.
#[derive(Debug)]
pub struct MultiBitEncoder {
    params: MbmParams,
    out_of_range: AtomicU64,
}

impl MultiBitEncoder {
    pub fn new(params: MbmParams) -> Self {
        Self { params, out_of_range: AtomicU64::new(0) }
    }

    pub fn params(&self) -> &MbmParams {
        &self.params
    }

    /// Number of sampled dimensions so far whose raw parameter needed clamping.
    pub fn out_of_range_count(&self) -> u64 {
        self.out_of_range.load(Ordering::Relaxed)
    }

    pub fn encode<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R) -> Result<EncodedVector> {
        let d = self.params.d;
        if x.len() != d {
            return Err(LdpError::DimensionMismatch { expected: d, actual: x.len() });
        }
        let mut out = vec![0i8; d];
        for i in index::sample(rng, d, self.params.m) {
            let raw = bernoulli_param(x[i], &self.params);
            if !(0.0..=1.0).contains(&raw) {
                self.out_of_range.fetch_add(1, Ordering::Relaxed);
            }
            let p = raw.clamp(0.0, 1.0);
            // gen::<f64>() is in [0, 1): p = 0 never fires, p = 1 always does
            out[i] = if rng.gen::<f64>() < p { 1 } else { -1 };
        }
        Ok(EncodedVector(out))
    }
}

/// One-shot encoding without the out-of-range counter.
pub fn multibit_encode<R: Rng + ?Sized>(x: &[f64], params: &MbmParams, rng: &mut R) -> Result<EncodedVector> {
    MultiBitEncoder::new(*params).encode(x, rng)
}

/// `entry_i = scale · enc_i + (alpha + beta)/2`, with `scale` from
/// [`MbmParams::rectifier_scale`]. Each entry is unbiased for `x_i`.
pub fn multibit_rectify(enc: &EncodedVector, params: &MbmParams) -> Result<RectifiedVector> {
    if enc.len() != params.d {
        return Err(LdpError::DimensionMismatch { expected: params.d, actual: enc.len() });
    }
    let scale = params.rectifier_scale();
    let mid = params.midpoint();
    Ok(RectifiedVector(enc.0.iter().map(|&e| scale * f64::from(e) + mid).collect()))
}
