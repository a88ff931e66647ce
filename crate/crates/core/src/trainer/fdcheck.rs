//! Central-difference verification of analytic gradients.

use alloc::format;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::policy::PolicyParams;

/// Largest network the checker will sweep coordinate by coordinate.
pub const MAX_CHECK_PARAMS: usize = 1000;

/// Compare an analytic gradient against central differences of its loss.
///
/// `loss_and_grad` must return the scalar loss and its full gradient for any
/// parameter vector. Returns the maximum relative error
/// `|g - g_fd| / max(1e-8, |g| + |g_fd|)` over all coordinates.
pub fn finite_diff_check<F>(
    params: &PolicyParams,
    loss_and_grad: F,
    epsilon: f64,
) -> Result<f64, CoreError>
where
    F: Fn(&PolicyParams) -> Result<(f64, Vec<f64>), CoreError>,
{
    if params.num_params() > MAX_CHECK_PARAMS {
        return Err(CoreError::InvalidArgument(format!(
            "finite differences over {} parameters would be unreasonable (max {MAX_CHECK_PARAMS})",
            params.num_params()
        )));
    }
    if !(epsilon > 0.0) {
        return Err(CoreError::InvalidArgument(format!(
            "epsilon must be > 0, got {epsilon}"
        )));
    }
    let (_, analytic) = loss_and_grad(params)?;
    if analytic.len() != params.num_params() {
        return Err(CoreError::ShapeMismatch(format!(
            "gradient length {} vs {} parameters",
            analytic.len(),
            params.num_params()
        )));
    }
    let mut max_err: f64 = 0.0;
    for i in 0..params.num_params() {
        let mut plus = params.clone();
        plus.data_mut()[i] += epsilon;
        let mut minus = params.clone();
        minus.data_mut()[i] -= epsilon;
        let fd = (loss_and_grad(&plus)?.0 - loss_and_grad(&minus)?.0) / (2.0 * epsilon);
        let err = (analytic[i] - fd).abs() / (analytic[i].abs() + fd.abs()).max(1e-8);
        max_err = max_err.max(err);
    }
    Ok(max_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::ArchDesc;
    use crate::rng::rng_from_seed;
    use alloc::vec;

    #[test]
    fn linear_value_head_quadratic_loss_is_exact() {
        // loss = value^2 over a linear net: gradient is exactly linear in
        // the parameters, so central differences are exact to rounding
        let desc = ArchDesc {
            obs_dim: 3,
            act_dim: 1,
            hidden: vec![],
            recurrent: false,
            rec_hidden: 0,
            layout_hash: 0,
        };
        let params = PolicyParams::init(desc, &mut rng_from_seed(2)).unwrap();
        let obs = [0.3, -0.4, 0.9];
        let err = finite_diff_check(
            &params,
            |p| {
                let out = p.forward(&obs, &[])?;
                let mut grads = vec![0.0; p.num_params()];
                p.backward(&out.cache, &[0.0], 2.0 * out.value, &[], &mut grads);
                Ok((out.value * out.value, grads))
            },
            1e-5,
        )
        .unwrap();
        assert!(err <= 1e-6, "relative error {err}");
    }

    #[test]
    fn two_layer_tanh_net() {
        let desc = ArchDesc {
            obs_dim: 3,
            act_dim: 2,
            hidden: vec![4, 4],
            recurrent: false,
            rec_hidden: 0,
            layout_hash: 0,
        };
        let params = PolicyParams::init(desc, &mut rng_from_seed(3)).unwrap();
        let obs = [0.5, -0.2, 0.1];
        let err = finite_diff_check(
            &params,
            |p| {
                let out = p.forward(&obs, &[])?;
                let loss = out.mean.iter().map(|m| m * m).sum::<f64>() + 0.7 * out.value;
                let d_mean: Vec<f64> = out.mean.iter().map(|m| 2.0 * m).collect();
                let mut grads = vec![0.0; p.num_params()];
                p.backward(&out.cache, &d_mean, 0.7, &[], &mut grads);
                Ok((loss, grads))
            },
            1e-5,
        )
        .unwrap();
        assert!(err <= 1e-4, "relative error {err}");
    }

    #[test]
    fn zero_loss_zero_error() {
        let desc = ArchDesc {
            obs_dim: 2,
            act_dim: 1,
            hidden: vec![2],
            recurrent: false,
            rec_hidden: 0,
            layout_hash: 0,
        };
        let params = PolicyParams::init(desc, &mut rng_from_seed(4)).unwrap();
        let err = finite_diff_check(
            &params,
            |p| Ok((0.0, vec![0.0; p.num_params()])),
            1e-5,
        )
        .unwrap();
        assert_eq!(err, 0.0);
    }

    #[test]
    fn oversized_network_is_rejected() {
        let desc = ArchDesc {
            obs_dim: 64,
            act_dim: 8,
            hidden: vec![64, 64],
            recurrent: false,
            rec_hidden: 0,
            layout_hash: 0,
        };
        let params = PolicyParams::zeros(desc).unwrap();
        assert!(finite_diff_check(&params, |p| Ok((0.0, vec![0.0; p.num_params()])), 1e-5)
            .is_err());
    }
}
