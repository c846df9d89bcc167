use serde::{Deserialize, Serialize};

use super::{LossError, NoiseSchedule, Tensor};

fn check_time(t: f64) -> Result<(), LossError> {
    if !(0.0..=1.0).contains(&t) {
        return Err(LossError::TimeOutOfRange(t));
    }
    Ok(())
}

/// `alpha(t) * x0 + sigma(t) * eps`, elementwise.
pub fn noised_state(x0: &Tensor, eps: &Tensor, t: f64, schedule: &impl NoiseSchedule) -> Result<Tensor, LossError> {
    check_time(t)?;
    let (a, s) = (schedule.alpha(t), schedule.sigma(t));
    x0.zip_with(eps, |x, e| a * x + s * e)
}

/// Time derivative of the noising path, `alpha'(t) * x0 + sigma'(t) * eps`.
///
/// Under the linear schedule this is `eps - x0` for every `t`.
pub fn target_velocity(x0: &Tensor, eps: &Tensor, t: f64, schedule: &impl NoiseSchedule) -> Result<Tensor, LossError> {
    check_time(t)?;
    let (da, ds) = schedule.derivatives(t).ok_or(LossError::MissingDerivatives)?;
    x0.zip_with(eps, |x, e| da * x + ds * e)
}

fn mean(values: impl Iterator<Item = f64>, n: usize) -> Result<f64, LossError> {
    if n == 0 {
        return Err(LossError::Empty);
    }
    Ok(values.sum::<f64>() / n as f64)
}

/// Mean squared residual between predicted and target velocity.
pub fn flow_loss(v_pred: &Tensor, target: &Tensor) -> Result<f64, LossError> {
    v_pred.check_same_shape(target)?;
    mean(
        v_pred.data().iter().zip(target.data()).map(|(p, t)| (p - t) * (p - t)),
        v_pred.len(),
    )
}

/// How the per-pixel weight map enters the regression loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightingMode {
    /// `mean(((v - target) * w)^2)`: the residual is scaled before squaring,
    /// so squared error is effectively weighted by `w^2`.
    #[default]
    Literal,
    /// `mean(w * (v - target)^2)`.
    SquaredErrorWeight,
}

/// Region-weighted flow loss; `weight` broadcasts against the residual from
/// the right (an `[H, W]` map weights every channel of a `[C, H, W]` residual).
pub fn weighted_flow_loss(
    v_pred: &Tensor,
    target: &Tensor,
    weight: &Tensor,
    mode: WeightingMode,
) -> Result<f64, LossError> {
    v_pred.check_same_shape(target)?;
    if let Some((index, &value)) = weight.data().iter().enumerate().find(|(_, w)| **w < 0.0) {
        return Err(LossError::NegativeWeight { index, value });
    }
    if !weight.is_finite() {
        return Err(LossError::NonFinite("weight map"));
    }
    let indices = weight.broadcast_indices(v_pred.shape())?;
    let w = weight.data();
    let terms = v_pred
        .data()
        .iter()
        .zip(target.data())
        .zip(&indices)
        .map(|((p, t), &k)| {
            let r = p - t;
            match mode {
                WeightingMode::Literal => (r * w[k]) * (r * w[k]),
                WeightingMode::SquaredErrorWeight => w[k] * r * r,
            }
        });
    mean(terms, v_pred.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::{CustomSchedule, Schedule};
    use proptest::prelude::*;

    fn v(data: &[f64]) -> Tensor {
        Tensor::vector(data.to_vec())
    }

    #[test]
    fn noised_state_endpoints_and_midpoint() {
        let x0 = v(&[1.0, -2.0, 3.5]);
        let eps = v(&[0.5, 0.25, -1.0]);
        assert_eq!(noised_state(&x0, &eps, 0.0, &Schedule::Linear).unwrap(), x0);
        assert_eq!(noised_state(&x0, &eps, 1.0, &Schedule::Linear).unwrap(), eps);
        let xt = noised_state(&Tensor::scalar(4.0), &Tensor::scalar(0.0), 0.25, &Schedule::Linear).unwrap();
        assert_eq!(xt.data(), &[3.0]);
    }

    #[test]
    fn noised_state_errors() {
        assert!(matches!(
            noised_state(&v(&[1.0]), &v(&[1.0, 2.0]), 0.5, &Schedule::Linear),
            Err(LossError::ShapeMismatch { .. })
        ));
        assert_eq!(
            noised_state(&v(&[1.0]), &v(&[1.0]), 1.5, &Schedule::Linear),
            Err(LossError::TimeOutOfRange(1.5))
        );
    }

    #[test]
    fn linear_velocity_is_eps_minus_x0() {
        for t in [0.0, 0.3, 1.0] {
            let vel = target_velocity(&Tensor::scalar(1.0), &Tensor::scalar(3.0), t, &Schedule::Linear).unwrap();
            assert_eq!(vel.data(), &[2.0]);
        }
        let same = v(&[0.7, -0.2]);
        let vel = target_velocity(&same, &same, 0.4, &Schedule::Linear).unwrap();
        assert_eq!(vel.data(), &[0.0, 0.0]);
    }

    #[test]
    fn velocity_needs_derivatives() {
        let schedule = CustomSchedule::new(|t| 1.0 - t * t, |t| t * t);
        assert_eq!(
            target_velocity(&v(&[1.0]), &v(&[1.0]), 0.5, &schedule),
            Err(LossError::MissingDerivatives)
        );
        let schedule = schedule.with_derivatives(|t| -2.0 * t, |t| 2.0 * t);
        let vel = target_velocity(&v(&[1.0]), &v(&[3.0]), 0.5, &schedule).unwrap();
        assert_eq!(vel.data(), &[2.0]);
    }

    #[test]
    fn flow_loss_examples() {
        let t = v(&[0.1, 0.2]);
        assert_eq!(flow_loss(&t, &t).unwrap(), 0.0);
        assert_eq!(flow_loss(&Tensor::scalar(3.0), &Tensor::scalar(1.0)).unwrap(), 4.0);
        let pred = v(&[1.0, -1.0, 2.0, 0.0]);
        assert_eq!(flow_loss(&pred, &v(&[0.0; 4])).unwrap(), 1.5);
        assert!(flow_loss(&v(&[]), &v(&[])).is_err());
    }

    #[test]
    fn weighted_loss_examples() {
        let pred = Tensor::filled(vec![2, 2], 1.0);
        let target = Tensor::filled(vec![2, 2], 0.0);
        let w = Tensor::new(vec![2, 2], vec![1.0, 0.6, 0.2, 1.0]).unwrap();
        let literal = weighted_flow_loss(&pred, &target, &w, WeightingMode::Literal).unwrap();
        let squared = weighted_flow_loss(&pred, &target, &w, WeightingMode::SquaredErrorWeight).unwrap();
        assert!((literal - 0.6).abs() < 1e-12);
        assert!((squared - 0.7).abs() < 1e-12);
    }

    #[test]
    fn weighted_loss_rejects_negative_weights() {
        let pred = v(&[1.0, 2.0]);
        let w = v(&[1.0, -0.5]);
        assert_eq!(
            weighted_flow_loss(&pred, &pred, &w, WeightingMode::Literal),
            Err(LossError::NegativeWeight { index: 1, value: -0.5 })
        );
    }

    #[test]
    fn channel_broadcast() {
        // [C=2, H=1, W=2] residual, [H, W] weights
        let pred = Tensor::new(vec![2, 1, 2], vec![1.0, 1.0, 2.0, 2.0]).unwrap();
        let target = Tensor::filled(vec![2, 1, 2], 0.0);
        let w = Tensor::new(vec![1, 2], vec![1.0, 0.5]).unwrap();
        let loss = weighted_flow_loss(&pred, &target, &w, WeightingMode::SquaredErrorWeight).unwrap();
        assert!((loss - (1.0 + 0.5 + 4.0 + 2.0) / 4.0).abs() < 1e-12);
    }

    fn tensor_pair(max: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (1..max).prop_flat_map(|n| {
            (
                proptest::collection::vec(-10.0f64..10.0, n),
                proptest::collection::vec(-10.0f64..10.0, n),
            )
        })
    }

    proptest! {
        #[test]
        fn linear_path_is_affine((x0, eps) in tensor_pair(32), t in 0.0f64..=1.0) {
            let xt = noised_state(&v(&x0), &v(&eps), t, &Schedule::Linear).unwrap();
            for ((x, e), got) in x0.iter().zip(&eps).zip(xt.data()) {
                prop_assert!((got - ((1.0 - t) * x + t * e)).abs() < 1e-12);
            }
        }

        #[test]
        fn unit_weight_matches_plain_loss((p, q) in tensor_pair(32)) {
            let (p, q) = (v(&p), v(&q));
            let ones = Tensor::filled(vec![p.len()], 1.0);
            let plain = flow_loss(&p, &q).unwrap();
            for mode in [WeightingMode::Literal, WeightingMode::SquaredErrorWeight] {
                prop_assert!((weighted_flow_loss(&p, &q, &ones, mode).unwrap() - plain).abs() < 1e-12);
            }
        }

        #[test]
        fn literal_equals_squared_weight_of_squares(
            (p, w) in tensor_pair(32),
        ) {
            let p = v(&p);
            let zero = Tensor::filled(vec![p.len()], 0.0);
            let w = v(&w).map(f64::abs);
            let literal = weighted_flow_loss(&p, &zero, &w, WeightingMode::Literal).unwrap();
            let squared = weighted_flow_loss(&p, &zero, &w.map(|x| x * x), WeightingMode::SquaredErrorWeight).unwrap();
            prop_assert!((literal - squared).abs() < 1e-9);
        }
    }
}
