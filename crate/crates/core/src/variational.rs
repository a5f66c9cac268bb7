//! The ground-state-weighted Dirichlet form and the variational
//! characterization of the spectral gap.
//!
//! The conditioned form is defined through the assembled jump weights,
//! E_φ(f) = ½ Σ_{i≠j} w_ij φ₁(i) φ₁(j) (f_i − f_j)², which makes the
//! discrete gap identity exact: E_φ(φ₂/φ₁) = λ₂ − λ₁ up to round-off, and
//! E_φ(f) ≥ λ₂ − λ₁ for every admissible f (unit φ₁²-norm, φ₁²-mean zero).

use crate::error::{Error, Result};
use crate::operator::DiscreteForm;
use crate::solver::Spectrum;
use rand::{Rng, SeedableRng};
use serde::Serialize;

/// ½ Σ_{i≠j} w_ij φ₁(i) φ₁(j) (f_i − f_j)², evaluated through two lattice
/// convolutions as Σ_i f_i² φ₁(i) (Wφ₁)_i − Σ_i f_i φ₁(i) (W(fφ₁))_i.
pub fn conditioned_form(form: &DiscreteForm, spectrum: &Spectrum, f: &[f64]) -> f64 {
    let n = form.n();
    assert_eq!(f.len(), n);
    let phi1 = spectrum.ground_state();
    let w_phi = form.weighted_sum(phi1);
    let g: Vec<f64> = f.iter().zip(phi1).map(|(a, b)| a * b).collect();
    let w_g = form.weighted_sum(&g);
    let mut total = 0.0;
    for i in 0..n {
        total += f[i] * f[i] * phi1[i] * w_phi[i] - g[i] * w_g[i];
    }
    total
}

/// φ₁²-weighted mean of f (the centering constant of the admissible class).
pub fn weighted_mean(form: &DiscreteForm, spectrum: &Spectrum, f: &[f64]) -> f64 {
    let phi1 = spectrum.ground_state();
    let m = form.mass();
    let num: f64 = f.iter().zip(phi1).map(|(a, b)| a * b * b).sum::<f64>() * m;
    let den: f64 = phi1.iter().map(|b| b * b).sum::<f64>() * m;
    num / den
}

/// Center and φ₁²-normalize a raw vector into the admissible class
/// (∫ f φ₁² = 0, ∫ f² φ₁² = 1).
pub fn make_admissible(form: &DiscreteForm, spectrum: &Spectrum, raw: &[f64]) -> Result<Vec<f64>> {
    let phi1 = spectrum.ground_state();
    let m = form.mass();
    let c = weighted_mean(form, spectrum, raw);
    let mut f: Vec<f64> = raw.iter().map(|v| v - c).collect();
    let s: f64 = f.iter().zip(phi1).map(|(a, b)| a * a * b * b).sum::<f64>() * m;
    if s <= 0.0 {
        return Err(Error::InvalidParameter(
            "trial function is φ₁²-a.e. constant, cannot normalize".into(),
        ));
    }
    let s = s.sqrt();
    f.iter_mut().for_each(|v| *v /= s);
    Ok(f)
}

/// Rayleigh quotient of the conditioned form over a raw trial function:
/// center against φ₁², then E_φ(f) / ∫ f² φ₁². Always ≥ λ₂ − λ₁.
pub fn trial_upper_bound(form: &DiscreteForm, spectrum: &Spectrum, raw: &[f64]) -> Result<f64> {
    let f = make_admissible(form, spectrum, raw)?;
    Ok(conditioned_form(form, spectrum, &f))
}

#[derive(Clone, Debug, Serialize)]
pub struct VariationalReport {
    pub gap: f64,
    /// E_φ(φ₂/φ₁), which should equal the gap to round-off.
    pub minimizer_value: f64,
    pub minimizer_rel_residual: f64,
    pub trials: usize,
    /// min over trials of E_φ(f) − gap (must not be below −1e-10).
    pub worst_trial_excess: f64,
    pub lower_bound_violations: usize,
}

/// Check the variational identity: the minimizer φ₂/φ₁ attains the gap and
/// random admissible trials never fall below it.
pub fn verify_variational(
    form: &DiscreteForm,
    spectrum: &Spectrum,
    trials: usize,
    seed: u64,
) -> Result<VariationalReport> {
    let n = form.n();
    let phi1 = spectrum.ground_state();
    let phi2 = spectrum.vector(1);
    let gap = spectrum.gap();
    let ratio: Vec<f64> = phi2.iter().zip(phi1).map(|(a, b)| a / b).collect();
    let minimizer_value = conditioned_form(form, spectrum, &ratio);
    let minimizer_rel_residual = (minimizer_value - gap).abs() / gap;

    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    let mut violations = 0usize;
    for _ in 0..trials {
        let raw: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let f = make_admissible(form, spectrum, &raw)?;
        let value = conditioned_form(form, spectrum, &f);
        let excess = value - gap;
        worst = worst.min(excess);
        if excess < -1e-10 {
            violations += 1;
        }
    }
    Ok(VariationalReport {
        gap,
        minimizer_value,
        minimizer_rel_residual,
        trials,
        worst_trial_excess: worst,
        lower_bound_violations: violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Domain;
    use crate::operator::assemble;
    use crate::solver::eigenpairs;
    use approx::assert_relative_eq;

    #[test]
    fn constant_trial_gives_zero() {
        let domain = Domain::rectangle(1.0, 1.0).unwrap();
        let form = assemble(&domain, 1.0, 0.25).unwrap();
        let spec = eigenpairs(&form, 2).unwrap();
        let f = vec![3.7; form.n()];
        let v = conditioned_form(&form, &spec, &f);
        assert!(v.abs() < 1e-10, "constant should be in the kernel, got {v:e}");
    }

    #[test]
    fn minimizer_attains_gap_exactly() {
        for (domain, alpha) in [
            (Domain::rectangle(2.0, 1.0).unwrap(), 1.5),
            (Domain::rectangle(1.0, 1.0).unwrap(), 0.5),
            (Domain::ellipse(2.0, 1.0).unwrap(), 1.0),
        ] {
            let form = assemble(&domain, alpha, 0.125).unwrap();
            let spec = eigenpairs(&form, 3).unwrap();
            let ratio: Vec<f64> = spec
                .vector(1)
                .iter()
                .zip(spec.ground_state())
                .map(|(a, b)| a / b)
                .collect();
            let v = conditioned_form(&form, &spec, &ratio);
            assert_relative_eq!(v, spec.gap(), max_relative = 1e-10);
        }
    }

    #[test]
    fn ground_state_transform_consistency() {
        // E_φ(f) = ⟨−L(fφ₁), fφ₁⟩_mass − λ₁ ⟨fφ₁, fφ₁⟩_mass
        use rand::{Rng, SeedableRng};
        let domain = Domain::rectangle(2.0, 1.0).unwrap();
        let form = assemble(&domain, 1.2, 0.125).unwrap();
        let spec = eigenpairs(&form, 2).unwrap();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(5);
        for _ in 0..5 {
            let f: Vec<f64> = (0..form.n()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let g: Vec<f64> = f.iter().zip(spec.ground_state()).map(|(a, b)| a * b).collect();
            let lg = form.apply_neg_generator(&g);
            let rhs = form.mass_dot(&lg, &g) - spec.lambda1() * form.mass_dot(&g, &g);
            let lhs = conditioned_form(&form, &spec, &f);
            assert_relative_eq!(lhs, rhs, max_relative = 1e-11, epsilon = 1e-13);
        }
    }

    #[test]
    fn random_trials_never_beat_the_gap() {
        let domain = Domain::rectangle(2.0, 1.0).unwrap();
        let form = assemble(&domain, 1.5, 0.125).unwrap();
        let spec = eigenpairs(&form, 3).unwrap();
        let report = verify_variational(&form, &spec, 100, 42).unwrap();
        assert_eq!(report.lower_bound_violations, 0);
        assert!(report.minimizer_rel_residual < 1e-10);
        assert!(report.worst_trial_excess >= -1e-10);
    }

    #[test]
    fn coordinate_trials_on_elongated_rectangle() {
        // f = x₁ gives a much smaller quotient than f = x₂ when a ≫ b
        let domain = Domain::rectangle(4.0, 1.0).unwrap();
        let form = assemble(&domain, 1.0, 0.25).unwrap();
        let spec = eigenpairs(&form, 3).unwrap();
        let fx: Vec<f64> = form.grid.centers.iter().map(|c| c[0]).collect();
        let fy: Vec<f64> = form.grid.centers.iter().map(|c| c[1]).collect();
        let rx = trial_upper_bound(&form, &spec, &fx).unwrap();
        let ry = trial_upper_bound(&form, &spec, &fy).unwrap();
        assert!(rx >= spec.gap() - 1e-12);
        assert!(ry > rx, "x2 trial {ry} should exceed x1 trial {rx}");
        // x₁ is odd and close in shape to φ₂/φ₁, so it should be decent
        assert!(rx < 3.0 * spec.gap());
    }

    #[test]
    fn bilinear_additivity_expansion() {
        // E_φ(f+g) = E_φ(f) + E_φ(g) + 2 B(f,g) with the polarization form
        let domain = Domain::rectangle(1.0, 1.0).unwrap();
        let form = assemble(&domain, 0.8, 0.25).unwrap();
        let spec = eigenpairs(&form, 2).unwrap();
        let n = form.n();
        let f: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let g: Vec<f64> = (0..n).map(|i| (i as f64 * 0.11).cos()).collect();
        let fg: Vec<f64> = f.iter().zip(&g).map(|(a, b)| a + b).collect();
        let e_f = conditioned_form(&form, &spec, &f);
        let e_g = conditioned_form(&form, &spec, &g);
        let e_fg = conditioned_form(&form, &spec, &fg);
        let cross = 0.5 * (e_fg - e_f - e_g);
        // polarization must recover the symmetric cross term
        let f_minus_g: Vec<f64> = f.iter().zip(&g).map(|(a, b)| a - b).collect();
        let e_fmg = conditioned_form(&form, &spec, &f_minus_g);
        assert_relative_eq!(e_f + e_g - 2.0 * cross, e_fmg, max_relative = 1e-10);
    }
}
