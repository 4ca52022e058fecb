//! Closed-form 1D oracle: on the symmetric instance the entropic map is
//! `tanh(2x/ε)`, so pairings reduce to explicit scalar integrals.

use crate::error::{Error, Result};
use crate::quadrature;

/// `∫₀¹ xᵅ (tanh(2x/ε) − 1) dx` by adaptive quadrature; independent oracle
/// for `pair_difference` on the symmetric 1D instance.
pub fn oracle_tanh(eps: f64, alpha: f64) -> Result<f64> {
    if !(eps > 0.0) || !(alpha > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "oracle needs positive eps and alpha, got eps={eps} alpha={alpha}"
        )));
    }
    // target relative error 1e-10 of the expected eps^(1+alpha) scale
    let abs_tol = (1e-10 * eps.powf(1.0 + alpha)).max(1e-16);
    quadrature::adaptive_interval(
        &|x: f64| x.powf(alpha) * ((2.0 * x / eps).tanh() - 1.0),
        0.0,
        1.0,
        abs_tol,
        48,
    )
}

/// Limit constant `∫₀^∞ uᵅ (tanh 2u − 1) du`, truncated at u = 30 where the
/// integrand is below 1e-50.
pub fn tail_integral(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tail integral needs positive alpha, got {alpha}"
        )));
    }
    quadrature::adaptive_interval(
        &|u: f64| u.powf(alpha) * ((2.0 * u).tanh() - 1.0),
        0.0,
        30.0,
        1e-14,
        48,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_one_limit_is_minus_pi_sq_over_96() {
        let got = tail_integral(1.0).unwrap();
        let want = -std::f64::consts::PI.powi(2) / 96.0;
        assert!((got - want).abs() < 1e-10, "got {got} want {want}");
    }

    #[test]
    fn scaled_oracle_converges_to_the_tail_integral() {
        // the truncation error of the rescaled integral is O(e^(-2/eps)), so
        // already at eps = 0.1 the limit is reached to quadrature precision
        for alpha in [0.5, 1.0] {
            let limit = tail_integral(alpha).unwrap();
            for eps in [1e-1, 1e-2, 1e-3] {
                let scaled = oracle_tanh(eps, alpha).unwrap() / eps.powf(1.0 + alpha);
                let rel = ((scaled - limit) / limit).abs();
                assert!(rel < 1e-8, "alpha={alpha} eps={eps} rel={rel}");
            }
        }
    }

    #[test]
    fn oracle_is_negative_and_small() {
        let v = oracle_tanh(0.01, 1.0).unwrap();
        assert!(v < 0.0 && v.abs() < 1e-4);
    }
}
