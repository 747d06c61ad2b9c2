use super::FeatureError;

/// Prior bot prevalence assumed by the external scorer.
pub const DEFAULT_BASE_PRIOR: f64 = 0.15;

/// Rescales a CAP score from the scorer's assumed prior to the actual
/// prevalence of bots in the domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapAdjustment {
    pub base_prior: f64,
    pub domain_prior: f64,
}

impl CapAdjustment {
    pub fn new(base_prior: f64, domain_prior: f64) -> Result<Self, FeatureError> {
        if !(base_prior > 0.0 && base_prior.is_finite()) {
            return Err(FeatureError::InvalidPrior(base_prior));
        }
        if !(domain_prior > 0.0 && domain_prior <= 1.0) {
            return Err(FeatureError::InvalidPrior(domain_prior));
        }
        Ok(CapAdjustment {
            base_prior,
            domain_prior,
        })
    }

    pub fn for_domain(domain_prior: f64) -> Result<Self, FeatureError> {
        Self::new(DEFAULT_BASE_PRIOR, domain_prior)
    }

    pub fn factor(&self) -> f64 {
        self.domain_prior / self.base_prior
    }
}

/// `min(1, raw_cap * domain_prior / base_prior)`.
pub fn cap_star(raw_cap: f64, adj: &CapAdjustment) -> Result<f64, FeatureError> {
    if !(0.0..=1.0).contains(&raw_cap) {
        return Err(FeatureError::InvalidCap(raw_cap));
    }
    if adj.domain_prior == adj.base_prior {
        return Ok(raw_cap);
    }
    Ok((raw_cap * adj.factor()).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let id = CapAdjustment::for_domain(0.15).unwrap();
        assert_eq!(cap_star(0.5, &id).unwrap(), 0.5);
        let half = CapAdjustment::for_domain(0.075).unwrap();
        assert_eq!(cap_star(0.6, &half).unwrap(), 0.3);
        let double = CapAdjustment::for_domain(0.30).unwrap();
        assert_eq!(cap_star(0.9, &double).unwrap(), 1.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let adj = CapAdjustment::for_domain(0.2).unwrap();
        assert!(matches!(cap_star(1.2, &adj), Err(FeatureError::InvalidCap(_))));
        assert!(cap_star(f64::NAN, &adj).is_err());
        assert!(CapAdjustment::new(0.0, 0.2).is_err());
        assert!(CapAdjustment::new(0.15, 0.0).is_err());
    }
}
