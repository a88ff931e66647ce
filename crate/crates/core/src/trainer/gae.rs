//! Generalized advantage estimation.

use alloc::format;
use alloc::vec::Vec;

use crate::error::CoreError;

/// Exponentially weighted temporal-difference advantages.
///
/// `values` carries one bootstrap entry beyond the rewards; `dones` cuts both
/// the bootstrap and the advantage recursion at episode boundaries. Returns
/// `(advantages, returns)` with `returns = advantages + values[..T]`.
pub fn gae(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    gamma: f64,
    lambda: f64,
) -> Result<(Vec<f64>, Vec<f64>), CoreError> {
    let t_len = rewards.len();
    if values.len() != t_len + 1 {
        return Err(CoreError::ShapeMismatch(format!(
            "{} values for {t_len} rewards (need one bootstrap entry)",
            values.len()
        )));
    }
    if dones.len() != t_len {
        return Err(CoreError::ShapeMismatch(format!(
            "{} done flags for {t_len} rewards",
            dones.len()
        )));
    }
    for (name, v) in [("gamma", gamma), ("lambda", lambda)] {
        if !(v > 0.0 && v <= 1.0) {
            return Err(CoreError::InvalidArgument(format!(
                "{name} must be in (0, 1], got {v}"
            )));
        }
    }
    let mut advantages = alloc::vec![0.0; t_len];
    let mut carry = 0.0;
    for t in (0..t_len).rev() {
        let mask = if dones[t] { 0.0 } else { 1.0 };
        let delta = rewards[t] + gamma * values[t + 1] * mask - values[t];
        carry = delta + gamma * lambda * mask * carry;
        advantages[t] = carry;
    }
    let returns = advantages
        .iter()
        .zip(values)
        .map(|(a, v)| a + v)
        .collect();
    Ok((advantages, returns))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeros_in_zeros_out() {
        let (a, r) = gae(&[0.0; 5], &[0.0; 6], &[false; 5], 0.99, 0.95).unwrap();
        assert!(a.iter().all(|&x| x == 0.0));
        assert!(r.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn hand_recursion_lambda_one() {
        // gamma 0.9, lambda 1, r = [1,1,1], v = 0: A_0 = 1 + 0.9 + 0.81
        let (a, _) = gae(&[1.0, 1.0, 1.0], &[0.0; 4], &[false; 3], 0.9, 1.0).unwrap();
        assert!((a[0] - 2.71).abs() < 1e-12);
        assert!((a[1] - 1.9).abs() < 1e-12);
        assert!((a[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn done_cuts_propagation() {
        let (a, _) = gae(&[1.0, 5.0], &[0.0; 3], &[true, false], 0.9, 1.0).unwrap();
        // the first step sees only its own reward
        assert!((a[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shape_errors() {
        assert!(gae(&[1.0], &[0.0], &[false], 0.9, 1.0).is_err());
        assert!(gae(&[1.0], &[0.0, 0.0], &[], 0.9, 1.0).is_err());
        assert!(gae(&[1.0], &[0.0, 0.0], &[false], 0.0, 1.0).is_err());
    }
}
