//! Closed-form evaluation of the named constants of the stable-process
//! spectral theory: the kernel normalization A_{d,γ}, the heat-kernel
//! supremum M_{d,α}, the Poisson and Green constants, the ground-state
//! Harnack constant, and the convex-domain gap constant.

use crate::error::{Error, Result};
use crate::quad;
use crate::special::{gamma, ln_gamma};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// First Dirichlet eigenvalue of the Laplacian on the unit disk, as the
/// rounded literal used by the eigenvalue bound. The full-precision value is
/// j_{0,1}² = 5.783185962946785, the squared first zero of J0; the rounded
/// figure is kept deliberately.
pub const MU1_UNIT_DISK: f64 = 5.784;

/// Stability index α ∈ (0,2) plus ambient dimension.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaParams {
    pub alpha: f64,
    pub d: u32,
}

impl AlphaParams {
    pub fn new(alpha: f64, d: u32) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0,2), got {alpha}"
            )));
        }
        if d == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        Ok(Self { alpha, d })
    }

    /// Planar parameters (d = 2), the setting of all domain work.
    pub fn planar(alpha: f64) -> Result<Self> {
        Self::new(alpha, 2)
    }
}

/// A_{d,γ} = Γ((d−γ)/2) / (2^γ π^(d/2) |Γ(γ/2)|).
pub fn stable_constant_a(d: u32, gamma_exp: f64) -> Result<f64> {
    if gamma_exp == 0.0 {
        return Err(Error::InvalidParameter(
            "stable_constant_a undefined at gamma = 0".into(),
        ));
    }
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be >= 1".into()));
    }
    let num_arg = (d as f64 - gamma_exp) / 2.0;
    if num_arg <= 0.0 && (num_arg - num_arg.round()).abs() < 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "Γ({num_arg}) pole in the numerator of A_{{d,γ}}"
        )));
    }
    let num = gamma(num_arg);
    let denom_gamma = gamma(gamma_exp / 2.0).abs();
    Ok(num / (2f64.powf(gamma_exp) * PI.powf(d as f64 / 2.0) * denom_gamma))
}

/// The jump-kernel constant A_{2,−α} of the planar α-stable process.
pub fn jump_constant(alpha: f64) -> Result<f64> {
    let p = AlphaParams::planar(alpha)?;
    stable_constant_a(p.d, -p.alpha)
}

/// 2 A_{2,−α}^{-1} in its factored form α^{-2} 2^(3−α) π Γ^{-1}(α/2) Γ(1−α/2);
/// an independent route used to cross-check `stable_constant_a`.
pub fn two_over_jump_constant_alt(alpha: f64) -> Result<f64> {
    AlphaParams::planar(alpha)?;
    Ok(alpha.powi(-2) * 2f64.powf(3.0 - alpha) * PI * gamma(1.0 - alpha / 2.0)
        / gamma(alpha / 2.0))
}

/// M_{d,α} = (2π)^{-d} ∫ exp(−|x|^α) dx for d ∈ {1,2}, by adaptive
/// quadrature of the radial profile.
pub fn m_const(d: u32, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::InvalidParameter(format!(
            "m_const needs alpha in (0,2], got {alpha}"
        )));
    }
    // substitute u = r^α: the radial integral becomes Γ-like and smooth
    let (val, _err) = match d {
        1 => {
            // (1/π) ∫_0^∞ e^{-r^α} dr = (1/(π α)) ∫ u^{1/α - 1} e^{-u} du
            let p = 1.0 / alpha;
            let f = move |u: f64| u.powf(p - 1.0) * (-u).exp();
            let (v, e) = quad::adaptive(f, 1e-280, 120.0, 1e-12, 1e-16)?;
            (v / (PI * alpha), e)
        }
        2 => {
            // (1/(2π)) ∫_0^∞ r e^{-r^α} dr = (1/(2π α)) ∫ u^{2/α - 1} e^{-u} du
            let p = 2.0 / alpha;
            let f = move |u: f64| u.powf(p - 1.0) * (-u).exp();
            let (v, e) = quad::adaptive(f, 1e-280, 160.0, 1e-12, 1e-16)?;
            (v / (2.0 * PI * alpha), e)
        }
        _ => {
            return Err(Error::InvalidParameter(
                "m_const implemented for d in {1, 2}".into(),
            ))
        }
    };
    Ok(val)
}

/// Closed form M_{2,α} = Γ(2/α) / (2 π α), the d = 2 specialization.
pub fn m_const_closed_form_d2(alpha: f64) -> f64 {
    gamma(2.0 / alpha) / (2.0 * PI * alpha)
}

/// Poisson-kernel constant C_α^d = Γ(d/2) π^(−d/2−1) sin(πα/2).
pub fn poisson_const(d: u32, alpha: f64) -> Result<f64> {
    if d == 0 || !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::InvalidParameter(format!(
            "poisson_const needs d >= 1 and alpha in (0,2), got d={d}, alpha={alpha}"
        )));
    }
    Ok(gamma(d as f64 / 2.0) * PI.powf(-(d as f64) / 2.0 - 1.0) * (PI * alpha / 2.0).sin())
}

/// Green-function constant R_{d,α} = Γ(d/2) / (2^α π^(d/2) Γ(α/2)²).
pub fn green_const(d: u32, alpha: f64) -> Result<f64> {
    if d == 0 || !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::InvalidParameter(format!(
            "green_const needs d >= 1 and alpha in (0,2), got d={d}, alpha={alpha}"
        )));
    }
    let lg = ln_gamma(alpha / 2.0);
    Ok(gamma(d as f64 / 2.0) * (-(alpha * 2f64.ln()) - (d as f64 / 2.0) * PI.ln() - 2.0 * lg).exp())
}

/// The bracket 4 + 12 Γ(2/α) / (α (2−α) (1 − 2^{-α})^(2/α)) shared by the
/// ground-state Harnack constant and the convex gap constant.
fn harnack_bracket(alpha: f64) -> f64 {
    4.0 + 12.0 * gamma(2.0 / alpha) / (alpha * (2.0 - alpha) * (1.0 - 2f64.powf(-alpha)).powf(2.0 / alpha))
}

/// Harnack constant for the squared ground state on interior balls:
/// c_H = 3^(4−α) 2^(2α) (4 + 12 Γ(2/α)/(α(2−α)(1−2^{-α})^(2/α)))².
/// Independent of the ball-radius fraction b ∈ (0, 1/2].
pub fn harnack_c_h(alpha: f64) -> Result<f64> {
    AlphaParams::planar(alpha)?;
    let br = harnack_bracket(alpha);
    Ok(3f64.powf(4.0 - alpha) * 2f64.powf(2.0 * alpha) * br * br)
}

/// Convex-domain gap constant
/// C(α) = 10^{-9} 3^(α−4) 2^(−2α−1) (4 + 12Γ(2/α)/(α(2−α)(1−2^{-α})^(2/α)))^{-2}.
/// Satisfies C(α) · 2 c_H(α) = 10^{-9} identically.
pub fn convex_gap_constant(alpha: f64) -> Result<f64> {
    AlphaParams::planar(alpha)?;
    let br = harnack_bracket(alpha);
    Ok(1e-9 * 3f64.powf(alpha - 4.0) * 2f64.powf(-2.0 * alpha - 1.0) / (br * br))
}

/// Upper bound for the first eigenvalue of the unit disk: (μ₁(B₁))^(α/2)
/// with μ₁(B₁) ≃ 5.784.
pub fn ball_eigenvalue_bound(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::InvalidParameter(format!(
            "ball_eigenvalue_bound needs alpha in (0,2], got {alpha}"
        )));
    }
    Ok(MU1_UNIT_DISK.powf(alpha / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn stable_constant_known_values() {
        // (d=1, γ=−1) → 1/π and (d=2, γ=−1) → 1/(2π)
        assert_relative_eq!(stable_constant_a(1, -1.0).unwrap(), 1.0 / PI, max_relative = 1e-13);
        assert_relative_eq!(
            stable_constant_a(2, -1.0).unwrap(),
            1.0 / (2.0 * PI),
            max_relative = 1e-13
        );
        // cross-check 2 / A_{2,−1} = 4π
        assert_relative_eq!(
            2.0 / stable_constant_a(2, -1.0).unwrap(),
            4.0 * PI,
            max_relative = 1e-13
        );
    }

    #[test]
    fn stable_constant_rejects_bad_inputs() {
        assert!(stable_constant_a(2, 0.0).is_err());
        assert!(stable_constant_a(2, 2.0).is_err()); // (d−γ)/2 = 0 pole
        assert!(stable_constant_a(2, 4.0).is_err()); // (d−γ)/2 = −1 pole
    }

    #[test]
    fn jump_constant_matches_factored_form_on_grid() {
        // A agrees with the factored 2A^{-1} form for α = 0.1, 0.2, …, 1.9
        for i in 1..20 {
            let alpha = 0.1 * i as f64;
            let a = jump_constant(alpha).unwrap();
            let alt = two_over_jump_constant_alt(alpha).unwrap();
            assert_relative_eq!(2.0 / a, alt, max_relative = 1e-12);
        }
    }

    #[test]
    fn m_const_examples() {
        assert_relative_eq!(m_const(2, 1.0).unwrap(), 1.0 / (2.0 * PI), max_relative = 1e-11);
        assert_relative_eq!(m_const(2, 2.0).unwrap(), 1.0 / (4.0 * PI), max_relative = 1e-11);
        // quadrature against the Γ(2/α) closed form
        for &alpha in &[0.4, 0.7, 1.0, 1.3, 1.9] {
            assert_relative_eq!(
                m_const(2, alpha).unwrap(),
                m_const_closed_form_d2(alpha),
                max_relative = 1e-10
            );
        }
        // d = 1 sanity: α = 1 gives (1/π) Γ(1) = 1/π... area ∫e^{-x}dx = 1 each side
        assert_relative_eq!(m_const(1, 1.0).unwrap(), 1.0 / PI, max_relative = 1e-11);
    }

    #[test]
    fn poisson_const_examples() {
        assert_relative_eq!(poisson_const(2, 1.0).unwrap(), 1.0 / (PI * PI), max_relative = 1e-13);
        assert_relative_eq!(poisson_const(1, 1.0).unwrap(), 1.0 / PI, max_relative = 1e-13);
        // α → 2 vanishes like sin(πα/2)
        assert!(poisson_const(2, 1.999_999).unwrap() < 1e-6);
    }

    #[test]
    fn green_const_examples() {
        assert_relative_eq!(
            green_const(2, 1.0).unwrap(),
            1.0 / (2.0 * PI * PI),
            max_relative = 1e-13
        );
        assert_relative_eq!(
            green_const(2, 1.999_999_9).unwrap(),
            1.0 / (4.0 * PI),
            max_relative = 1e-5
        );
        for i in 1..20 {
            assert!(green_const(2, 0.1 * i as f64).unwrap() > 0.0);
        }
    }

    #[test]
    fn harnack_constant_at_cauchy_index() {
        // α = 1: 108 · (4 + 48)² = 292032
        assert_relative_eq!(harnack_c_h(1.0).unwrap(), 292_032.0, max_relative = 1e-13);
        for i in 1..20 {
            assert!(harnack_c_h(0.1 * i as f64).unwrap() > 0.0);
        }
        // two-path arithmetic cross-check at α = 0.5:
        // c_H = 3^3.5 · 2 · (4 + 12 Γ(4)/(0.5·1.5·(1−2^{-1/2})^4))²
        let g4 = 6.0;
        let base = 1.0 - 2f64.powf(-0.5);
        let bracket = 4.0 + 12.0 * g4 / (0.5 * 1.5 * base.powi(4));
        let by_hand = 3f64.powf(3.5) * 2.0 * bracket * bracket;
        assert_relative_eq!(harnack_c_h(0.5).unwrap(), by_hand, max_relative = 1e-12);
    }

    #[test]
    fn convex_constant_identity_and_value() {
        // C(1) = 10^{-9} / (27 · 8 · 2704)
        assert_relative_eq!(
            convex_gap_constant(1.0).unwrap(),
            1e-9 / (27.0 * 8.0 * 2704.0),
            max_relative = 1e-13
        );
        for i in 1..20 {
            let alpha = 0.1 * i as f64;
            let c = convex_gap_constant(alpha).unwrap();
            assert!(c > 0.0 && c < 1e-9);
            // C(α) · 2 c_H(α) = 10^{-9}
            assert_relative_eq!(c * 2.0 * harnack_c_h(alpha).unwrap(), 1e-9, max_relative = 1e-12);
        }
    }

    #[test]
    fn ball_bound_examples() {
        assert_relative_eq!(ball_eigenvalue_bound(2.0).unwrap(), 5.784, max_relative = 1e-15);
        assert_relative_eq!(ball_eigenvalue_bound(1.0).unwrap(), 5.784f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(ball_eigenvalue_bound(1e-9).unwrap(), 1.0, max_relative = 1e-8);
    }
}
