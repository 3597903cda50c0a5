use serde::{Deserialize, Serialize};

use super::EssReport;
use crate::error::{Error, Result};

/// The kernel-MMD precision rule at tolerance `ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecisionReport {
    pub epsilon: f64,
    /// `σ̂² / n`
    pub risk: f64,
    pub pass_risk: bool,
    /// `γ̂_0 / ε²`
    pub required_ess: f64,
    pub pass_ess: bool,
}

/// Evaluates `σ̂²/n <= ε²` and the equivalent `ESS >= γ̂_0/ε²`.
pub fn precision_check(report: &EssReport, epsilon: f64) -> Result<PrecisionReport> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidInput(format!("epsilon = {epsilon} must be positive")));
    }
    let ess = match report.ess {
        Some(e) if report.is_ok() => e,
        _ => return Err(Error::InvalidInput("precision rule needs a report with status ok".into())),
    };
    let eps2 = epsilon * epsilon;
    let risk = report.sigma2 / report.n as f64;
    let required_ess = report.gamma0 / eps2;
    let pass_risk = risk <= eps2;
    let mut pass_ess = ess >= required_ess;
    if pass_ess != pass_risk {
        // The two forms are one inequality; they can only disagree within
        // rounding of the boundary.
        assert!(((risk - eps2) / eps2).abs() <= 1e-12, "precision rules disagree away from the boundary");
        pass_ess = pass_risk;
    }
    Ok(PrecisionReport { epsilon, risk, pass_risk, required_ess, pass_ess })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::EssStatus;
    use proptest::prelude::*;

    fn report(n: usize, gamma0: f64, sigma2: f64) -> EssReport {
        EssReport {
            n,
            gamma0,
            sigma2,
            ess: Some(n as f64 * gamma0 / sigma2),
            tau: Some(sigma2 / gamma0),
            bandwidth: 1,
            window: "bartlett".into(),
            status: EssStatus::Ok,
        }
    }

    #[test]
    fn examples() {
        let r = report(1000, 2.0, 10.0);
        let p = precision_check(&r, 0.2).unwrap();
        assert!((p.risk - 0.01).abs() < 1e-15);
        assert!(p.pass_risk && p.pass_ess);
        let p = precision_check(&r, 0.05).unwrap();
        assert!(!p.pass_risk && !p.pass_ess);
        assert!((p.required_ess - 800.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_inputs() {
        let r = report(1000, 2.0, 10.0);
        assert!(precision_check(&r, 0.0).is_err());
        assert!(precision_check(&r, -1.0).is_err());
        let mut u = r.clone();
        u.status = EssStatus::UnstableSigma;
        u.ess = None;
        assert!(precision_check(&u, 0.1).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn both_rules_agree(gamma0 in 1e-3f64..10.0, sigma2 in 1e-3f64..100.0, n in 4usize..100_000, eps in 1e-3f64..1.0) {
            let p = precision_check(&report(n, gamma0, sigma2), eps).unwrap();
            prop_assert_eq!(p.pass_risk, p.pass_ess);
        }
    }
}
