//! Every explicit spectral-gap bound, exactly as printed (including the
//! deliberately loose 10⁶ / 10⁻⁹ factors), and the verification harness that
//! compares them against Richardson-extrapolated computed gaps.

use crate::constants::{convex_gap_constant, jump_constant, two_over_jump_constant_alt};
use crate::error::{Error, Result};
use crate::geometry::{Domain, Profile};
use crate::operator::assemble;
use crate::solver::{eigenpairs_with, EigenOptions};
use serde::Serialize;

fn check_rect(a: f64, b: f64, alpha: f64) -> Result<f64> {
    if !(a >= b && b > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "rectangle bounds need a >= b > 0, got ({a}, {b})"
        )));
    }
    jump_constant(alpha)
}

/// Upper bound on λ₂ − λ₁ for the rectangle (−a,a)×(−b,b):
/// (A/2) · 10⁶ · {2b/((1−α) a^(1+α)) | 2 log(1+a/b) b/a² | (1/(2−α) + 1/(α−1)) b^(2−α)/a²}
/// by the α < 1, α = 1, α > 1 cases.
pub fn rectangle_upper(a: f64, b: f64, alpha: f64) -> Result<f64> {
    let jump = check_rect(a, b, alpha)?;
    let case = if alpha == 1.0 {
        2.0 * (1.0 + a / b).ln() * b / (a * a)
    } else if alpha < 1.0 {
        2.0 / (1.0 - alpha) * b / a.powf(1.0 + alpha)
    } else {
        (1.0 / (2.0 - alpha) + 1.0 / (alpha - 1.0)) * b.powf(2.0 - alpha) / (a * a)
    };
    Ok(jump / 2.0 * 1e6 * case)
}

/// Lower bound on λ₂ − λ₁ for the rectangle, the three printed cases.
pub fn rectangle_lower(a: f64, b: f64, alpha: f64) -> Result<f64> {
    let jump = check_rect(a, b, alpha)?;
    let case = if alpha == 1.0 {
        1e-9 * (1.0 + a / b).ln() * b / (a * a)
    } else if alpha < 1.0 {
        b / (36.0 * 2f64.powf(1.0 + 2.0 * alpha) * a.powf(1.0 + alpha))
    } else {
        b.powf(2.0 - alpha) / (33.0 * 13f64.powf(1.0 + alpha / 2.0) * 1e4 * a * a)
    };
    Ok(jump / 2.0 * case)
}

/// All-α lower bound for rectangles: (A/2) b / (36 · 2^α (a+b)^(1+α)).
pub fn universal_lower(a: f64, b: f64, alpha: f64) -> Result<f64> {
    let jump = check_rect(a, b, alpha)?;
    Ok(jump / 2.0 * b / (36.0 * 2f64.powf(alpha) * (a + b).powf(1.0 + alpha)))
}

/// Same bound through the factored form of 2 A^{-1}; an independent
/// arithmetic route used to cross-check `universal_lower` to 1e-12.
pub fn universal_lower_alt(a: f64, b: f64, alpha: f64) -> Result<f64> {
    check_rect(a, b, alpha)?;
    let two_over_a = two_over_jump_constant_alt(alpha)?;
    Ok(b / (36.0 * 2f64.powf(alpha) * (a + b).powf(1.0 + alpha)) / two_over_a)
}

/// The printed round-number specializations of the universal bound at
/// α = 1/2, 1, 3/2. They are weakenings (rounded down), so each is dominated
/// by `universal_lower` at the same α.
pub fn printed_specialization(a: f64, b: f64, alpha: f64) -> Option<f64> {
    if alpha == 0.5 {
        Some(8.0 * b / (1e4 * (a + b).powf(1.5)))
    } else if alpha == 1.0 {
        Some(b / (1e3 * (a + b) * (a + b)))
    } else if alpha == 1.5 {
        Some(8.0 * b / (1e4 * (a + b).powf(2.5)))
    } else {
        None
    }
}

/// Convex double-symmetric lower bound: (A/2) C(α) b^(2−α)/a² with the
/// explicit constant C(α).
pub fn convex_symmetric_lower(a: f64, b: f64, alpha: f64) -> Result<f64> {
    let jump = check_rect(a, b, alpha)?;
    let c = convex_gap_constant(alpha)?;
    Ok(jump / 2.0 * c * b.powf(2.0 - alpha) / (a * a))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lower,
    Upper,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundEntry {
    pub name: String,
    pub value: f64,
    pub side: Side,
    pub satisfied: bool,
    /// positive margin means the bound holds with room to spare
    pub margin: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GapReport {
    pub domain: Domain,
    pub alpha: f64,
    pub h_coarse: f64,
    pub h_fine: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub gap_coarse: f64,
    pub gap_fine: f64,
    pub gap_extrapolated: f64,
    /// 3 × the coarse/fine gap difference
    pub error_budget: f64,
    pub bounds: Vec<BoundEntry>,
    pub all_satisfied: bool,
}

/// Gap at two refinements with Richardson extrapolation at the consistency
/// order 2 − α. Returns (coarse, fine, extrapolated, budget, λ₁_fine, λ₂_fine).
pub fn extrapolated_gap(
    domain: &Domain,
    alpha: f64,
    h_coarse: f64,
    opts: &EigenOptions,
) -> Result<(f64, f64, f64, f64, f64, f64)> {
    let coarse = {
        let form = assemble(domain, alpha, h_coarse)?;
        eigenpairs_with(&form, 3, opts)?
    };
    let fine = {
        let form = assemble(domain, alpha, h_coarse / 2.0)?;
        eigenpairs_with(&form, 3, opts)?
    };
    let g1 = coarse.gap();
    let g2 = fine.gap();
    let p = 2.0 - alpha;
    let extr = g2 + (g2 - g1) / (2f64.powf(p) - 1.0);
    let budget = 3.0 * (g2 - g1).abs();
    Ok((g1, g2, extr, budget, fine.eigenvalues[0], fine.eigenvalues[1]))
}

/// The bounds applicable to a domain: all rectangle bounds for rectangles
/// (which are also convex and double-symmetric), the convex bound otherwise.
pub fn applicable_bounds(domain: &Domain, alpha: f64) -> Result<Vec<(String, Side, f64)>> {
    let (a, b) = (domain.a, domain.b);
    let mut out = Vec::new();
    if matches!(domain.profile, Profile::Rectangle) {
        out.push(("rectangle_upper".into(), Side::Upper, rectangle_upper(a, b, alpha)?));
        out.push(("rectangle_lower".into(), Side::Lower, rectangle_lower(a, b, alpha)?));
        out.push(("universal_lower".into(), Side::Lower, universal_lower(a, b, alpha)?));
        if let Some(v) = printed_specialization(a, b, alpha) {
            out.push(("printed_specialization".into(), Side::Lower, v));
        }
    }
    out.push((
        "convex_symmetric_lower".into(),
        Side::Lower,
        convex_symmetric_lower(a, b, alpha)?,
    ));
    Ok(out)
}

/// Compute the gap at two refinements and check every applicable printed
/// bound against the extrapolated value within the error budget.
pub fn verify_bounds(domain: &Domain, alpha: f64, h_coarse: f64) -> Result<GapReport> {
    let opts = EigenOptions::default();
    let (g1, g2, extr, budget, l1, l2) = extrapolated_gap(domain, alpha, h_coarse, &opts)?;
    let mut bounds = Vec::new();
    let mut all = true;
    for (name, side, value) in applicable_bounds(domain, alpha)? {
        let margin = match side {
            Side::Lower => extr - value,
            Side::Upper => value - extr,
        };
        let satisfied = margin >= -budget;
        all &= satisfied;
        bounds.push(BoundEntry { name, value, side, satisfied, margin });
    }
    Ok(GapReport {
        domain: domain.clone(),
        alpha,
        h_coarse,
        h_fine: h_coarse / 2.0,
        lambda1: l1,
        lambda2: l2,
        gap_coarse: g1,
        gap_fine: g2,
        gap_extrapolated: extr,
        error_budget: budget,
        bounds,
        all_satisfied: all,
    })
}
