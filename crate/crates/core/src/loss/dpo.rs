use serde::{Deserialize, Serialize};

use super::LossError;

/// Log-probabilities of the preferred and rejected samples under the policy
/// and the frozen reference, plus the inverse temperature `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpoInputs {
    pub logp_policy_win: f64,
    pub logp_ref_win: f64,
    pub logp_policy_lose: f64,
    pub logp_ref_lose: f64,
    pub beta: f64,
}

impl DpoInputs {
    /// Difference of the winner's and loser's policy/reference log-ratios.
    pub fn margin(&self) -> f64 {
        (self.logp_policy_win - self.logp_ref_win) - (self.logp_policy_lose - self.logp_ref_lose)
    }
}

/// `ln(1 + e^x)` without overflow for large `|x|`.
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// `-ln sigmoid(beta * margin)`, evaluated as `softplus(-beta * margin)`.
pub fn dpo_loss_from_margin(beta: f64, margin: f64) -> Result<f64, LossError> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(LossError::InvalidBeta(beta));
    }
    if !margin.is_finite() {
        return Err(LossError::NonFinite("log-probabilities"));
    }
    Ok(softplus(-beta * margin))
}

pub fn dpo_loss(inputs: &DpoInputs) -> Result<f64, LossError> {
    let margin = inputs.margin();
    if !margin.is_finite() {
        return Err(LossError::NonFinite("log-probabilities"));
    }
    dpo_loss_from_margin(inputs.beta, margin)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn inputs(beta: f64, margin: f64) -> DpoInputs {
        DpoInputs {
            logp_policy_win: margin,
            logp_ref_win: 0.0,
            logp_policy_lose: 0.0,
            logp_ref_lose: 0.0,
            beta,
        }
    }

    #[test]
    fn worked_examples() {
        assert!((dpo_loss(&inputs(1.0, 0.0)).unwrap() - std::f64::consts::LN_2).abs() < 1e-12);
        assert!((dpo_loss(&inputs(0.5, 2.0)).unwrap() - 0.313_261_687_518_222_8).abs() < 1e-12);
        assert!(dpo_loss(&inputs(1.0, 50.0)).unwrap() < 1e-20);
    }

    #[test]
    fn margin_uses_all_four_terms() {
        let x = DpoInputs { logp_policy_win: -1.0, logp_ref_win: -3.0, logp_policy_lose: -2.0, logp_ref_lose: -2.5, beta: 1.0 };
        assert!((x.margin() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn large_negative_margin_does_not_overflow() {
        let loss = dpo_loss(&inputs(1.0, -1000.0)).unwrap();
        assert!((loss - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn invalid_beta() {
        assert_eq!(dpo_loss(&inputs(0.0, 1.0)), Err(LossError::InvalidBeta(0.0)));
        assert!(dpo_loss(&inputs(f64::NAN, 1.0)).is_err());
    }

    proptest! {
        #[test]
        fn decreasing_in_margin(beta in 0.01f64..10.0, a in -20.0f64..20.0, gap in 1e-3f64..5.0) {
            prop_assert!(dpo_loss_from_margin(beta, a + gap).unwrap() < dpo_loss_from_margin(beta, a).unwrap());
        }

        #[test]
        fn beta_monotonicity(beta in 0.01f64..5.0, scale in 1.01f64..3.0, m in 0.01f64..10.0) {
            let b2 = beta * scale;
            prop_assert!(dpo_loss_from_margin(b2, m).unwrap() < dpo_loss_from_margin(beta, m).unwrap());
            prop_assert!(dpo_loss_from_margin(b2, -m).unwrap() > dpo_loss_from_margin(beta, -m).unwrap());
        }

        #[test]
        fn symmetric_sum_bound(beta in 0.01f64..5.0, m in -10.0f64..10.0) {
            let sum = dpo_loss_from_margin(beta, m).unwrap() + dpo_loss_from_margin(beta, -m).unwrap();
            prop_assert!(sum >= 2.0 * std::f64::consts::LN_2 - 1e-15);
            if m.abs() > 1e-3 {
                prop_assert!(sum > 2.0 * std::f64::consts::LN_2);
            }
        }
    }
}
