/// A feature outside the agreed domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainViolation {
    pub index: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DomainReport {
    Ok,
    Violation(Vec<DomainViolation>),
}

impl DomainReport {
    pub fn is_ok(&self) -> bool {
        matches!(self, DomainReport::Ok)
    }
}

/// Checks every entry against the closed interval `[alpha, beta]`.
///
/// A poisoned row whose original entry was `alpha` lands below the domain and
/// is reported here before it reaches the encoder. NaN counts as a violation.
pub fn validate_feature_domain(x: &[f64], alpha: f64, beta: f64) -> DomainReport {
    let violations: Vec<DomainViolation> = x
        .iter()
        .enumerate()
        .filter(|(_, v)| !(alpha..=beta).contains(*v))
        .map(|(index, &value)| DomainViolation { index, value })
        .collect();
    if violations.is_empty() {
        DomainReport::Ok
    } else {
        DomainReport::Violation(violations)
    }
}
