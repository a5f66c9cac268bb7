//! Closed-form probabilistic kernels of the planar α-stable process: free
//! transition density, Poisson kernel of a ball, Green function of the unit
//! ball, expected exit times, and quadrature of exit-position probabilities.

use crate::constants::{jump_constant, m_const_closed_form_d2, poisson_const, green_const};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::quad;
use crate::special::{bessel_j0, ln_gamma};
use std::f64::consts::PI;

/// Ball B(center, radius) in the plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BallSpec {
    pub center: Point,
    pub radius: f64,
}

impl BallSpec {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidParameter(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Self { center, radius })
    }

    pub fn unit() -> Self {
        Self { center: [0.0, 0.0], radius: 1.0 }
    }
}

fn dist(x: Point, y: Point) -> f64 {
    ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt()
}

/// One term of the large-argument expansion of the unit-time radial density:
/// p₁(r) = Σ_{k≥1} m_k exp(ln_env_k) r^(−2−αk), where ln_env is the envelope
/// (log of the term magnitude without the sin factor) and m_k the signed sin
/// modulation (−1)^(k+1) sin(παk/2).
fn tail_term(alpha: f64, k: u32) -> (f64, f64) {
    let kf = k as f64;
    let s = (PI * alpha * kf / 2.0).sin();
    let modulation = if k % 2 == 1 { s } else { -s };
    let ln_env = alpha * kf * 2f64.ln() + 2.0 * ln_gamma(1.0 + alpha * kf / 2.0)
        - ln_gamma(kf + 1.0)
        - 2.0 * PI.ln();
    (modulation, ln_env)
}

/// Attempt the tail series at radius r; None when it cannot reach `tol`.
///
/// Truncation is controlled by the term envelope (the term magnitude with the
/// sin factor stripped): the sin modulation produces deceptive near-zero
/// terms whenever αk/2 sits near an integer, so |T_k| alone is not a valid
/// remainder bound.
fn unit_density_series(alpha: f64, r: f64, tol: f64) -> Option<(f64, f64)> {
    let ln_r = r.ln();
    let mut sum = 0.0;
    let mut best_env = f64::INFINITY;
    let mut best_sum = 0.0;
    let mut prev_env = f64::INFINITY;
    for k in 1..=120u32 {
        let kf = k as f64;
        let (modulation, ln_env_base) = tail_term(alpha, k);
        let ln_env = ln_env_base - (2.0 + alpha * kf) * ln_r;
        if ln_env > 600.0 {
            break;
        }
        let env = ln_env.exp();
        if env > prev_env {
            // asymptotic regime: stop at the envelope minimum reached so far
            break;
        }
        sum += modulation * env;
        if env < best_env {
            best_env = env;
            best_sum = sum;
        }
        prev_env = env;
        if k >= 3 && env <= tol * sum.abs().max(1e-300) {
            return Some((sum, env));
        }
    }
    let scale = best_sum.abs().max(1e-300);
    if best_env <= 1e-11 * scale {
        Some((best_sum, best_env))
    } else {
        None
    }
}

/// Unit-time density p₁ at radius r, for α ∈ (0,2), by the tail expansion
/// where it converges and otherwise by oscillatory Hankel quadrature
/// (1/2π) ∫ e^(−s^α) s J₀(s r) ds on half-period panels with order-doubling
/// error control (target 1e-8 absolute).
pub fn unit_time_density(alpha: f64, r: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::InvalidParameter(format!("unit_time_density needs alpha in (0,2), got {alpha}")));
    }
    if r == 0.0 {
        return Ok(m_const_closed_form_d2(alpha));
    }
    if let Some((v, _err)) = unit_density_series(alpha, r, 1e-14) {
        return Ok(v);
    }
    let (v, _err) = unit_density_quadrature(alpha, r)?;
    Ok(v)
}

/// Hankel quadrature of the unit-time density on the union of dyadic
/// envelope panels and half-period oscillation panels.
fn unit_density_quadrature(alpha: f64, r: f64) -> Result<(f64, f64)> {
    let s_max = (40.0f64).powf(1.0 / alpha);
    let n_osc = (s_max * r / PI).ceil() as usize;
    if n_osc > 400_000 {
        return Err(Error::QuadratureNonconvergence { achieved: f64::INFINITY, target: 1e-8 });
    }
    let f = |s: f64| (-s.powf(alpha)).exp() * s * bessel_j0(s * r);
    let mut breaks = vec![0.0, s_max];
    // dyadic refinement toward 0 resolves the e^{-s^α} s envelope and the
    // fractional branch point of s^α at the origin
    let mut s = s_max;
    for _ in 0..40 {
        s *= 0.5;
        if s < 1e-8 * s_max {
            break;
        }
        breaks.push(s);
    }
    // half-period panels track the J0 oscillation
    let mut j = 1usize;
    loop {
        let b = (j as f64 - 0.25) * PI / r;
        if b >= s_max || !b.is_finite() {
            break;
        }
        breaks.push(b);
        j += 1;
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let mut total = 0.0;
    let mut err = 0.0;
    for w in breaks.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let c = quad::gauss(f, w[0], w[1], 8);
        let fine = quad::gauss(f, w[0], w[1], 16);
        total += fine;
        err += (c - fine).abs();
    }
    // tail beyond s_max is bounded by the envelope e^{-s^α} s
    err += (-s_max.powf(alpha)).exp() * s_max * s_max;
    if err > 1e-8 {
        return Err(Error::QuadratureNonconvergence { achieved: err, target: 1e-8 });
    }
    Ok((total / (2.0 * PI), err))
}

/// Free transition density p_t(x) of the planar process, i.e. the density of
/// X_t at displacement x. α = 2 is admitted here only, as the Gaussian
/// reference p(t,x) = (4πt)^{-1} e^(−|x|²/4t); for α < 2 the scaling law
/// p_t(x) = t^(−2/α) p₁(t^(−1/α) x) reduces to the unit-time density.
pub fn free_density(alpha: f64, t: f64, x: Point) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("time must be positive, got {t}")));
    }
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::InvalidParameter(format!("free_density needs alpha in (0,2], got {alpha}")));
    }
    let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
    if alpha == 2.0 {
        return Ok((4.0 * PI * t).recip() * (-r * r / (4.0 * t)).exp());
    }
    let scale = t.powf(-1.0 / alpha);
    Ok(t.powf(-2.0 / alpha) * unit_time_density(alpha, scale * r)?)
}

/// p(t, x, y) / t; approaches A_{2,−α} |x−y|^(−2−α) as t → 0⁺.
pub fn small_time_ratio(alpha: f64, t: f64, x: Point, y: Point) -> Result<f64> {
    if x == y {
        return Err(Error::SingularInput("small_time_ratio needs x != y".into()));
    }
    Ok(free_density(alpha, t, [x[0] - y[0], x[1] - y[1]])? / t)
}

/// Total mass ∫_{|x|>r0} p₁(x) dx of the unit-time density outside radius r0,
/// summed term by term from the tail expansion. Requires r0 in the series
/// regime (it is for r0 ≳ a few, any α ∈ (0,2)).
pub fn unit_density_tail_mass(alpha: f64, r0: f64) -> Result<f64> {
    let mut sum = 0.0;
    let mut prev_env = f64::INFINITY;
    for k in 1..=120u32 {
        let kf = k as f64;
        let (modulation, ln_env_base) = tail_term(alpha, k);
        let env = (ln_env_base - alpha * kf * r0.ln()).exp() * 2.0 * PI / (alpha * kf);
        if env > prev_env {
            if env > 1e-10 {
                return Err(Error::QuadratureNonconvergence { achieved: env, target: 1e-10 });
            }
            break;
        }
        sum += modulation * env;
        prev_env = env;
        if env < 1e-15 * sum.abs().max(1e-300) {
            break;
        }
    }
    Ok(sum)
}

/// Poisson kernel of the ball: density at y (strictly outside) of the exit
/// position started from z (strictly inside).
pub fn poisson_kernel(ball: BallSpec, alpha: f64, z: Point, y: Point) -> Result<f64> {
    let c = poisson_const(2, alpha)?;
    let r = ball.radius;
    let dz = dist(z, ball.center);
    let dy = dist(y, ball.center);
    if dz >= r {
        return Err(Error::InvalidParameter(format!("z must lie inside the ball (|z−c| = {dz}, r = {r})")));
    }
    if dy <= r {
        return Err(Error::InvalidParameter(format!("y must lie strictly outside the ball (|y−c| = {dy}, r = {r})")));
    }
    let num = (r * r - dz * dz).powf(alpha / 2.0);
    let den = (dy * dy - r * r).powf(alpha / 2.0) * dist(y, z).powi(2);
    Ok(c * num / den)
}

/// Green function of the unit ball for d = 2 > α:
/// G(z,y) = R_{2,α} |z−y|^(α−2) ∫_0^w s^(α/2−1) (s+1)^{-1} ds,
/// w = (1−|z|²)(1−|y|²)/|z−y|².
pub fn green_unit_ball(alpha: f64, z: Point, y: Point) -> Result<f64> {
    let rc = green_const(2, alpha)?;
    let nz = (z[0] * z[0] + z[1] * z[1]).sqrt();
    let ny = (y[0] * y[0] + y[1] * y[1]).sqrt();
    if nz >= 1.0 || ny >= 1.0 {
        return Err(Error::InvalidParameter("green_unit_ball needs z, y in the open unit ball".into()));
    }
    if z == y {
        return Err(Error::SingularInput("green_unit_ball diverges at z = y".into()));
    }
    let d = dist(z, y);
    let w = (1.0 - nz * nz) * (1.0 - ny * ny) / (d * d);
    // substitute u = s^(α/2): ∫ = (2/α) ∫_0^{w^(α/2)} du / (1 + u^(2/α))
    let upper = w.powf(alpha / 2.0);
    let p = 2.0 / alpha;
    let (inner, _e) = quad::adaptive(|u: f64| 1.0 / (1.0 + u.powf(p)), 0.0, upper, 1e-12, 1e-15)?;
    Ok(rc * d.powf(alpha - 2.0) * p * inner)
}

/// Expected exit time of the ball started at y:
/// E^y τ = C_α² A_{2,−α}^{-1} (r² − |y−c|²)^(α/2); zero on the boundary.
pub fn expected_exit_time(alpha: f64, ball: BallSpec, y: Point) -> Result<f64> {
    let dy = dist(y, ball.center);
    if dy > ball.radius {
        return Err(Error::InvalidParameter(format!(
            "start must lie in the closed ball (|y−c| = {dy}, r = {})",
            ball.radius
        )));
    }
    let c = poisson_const(2, alpha)?;
    let a = jump_constant(alpha)?;
    Ok(c / a * (ball.radius * ball.radius - dy * dy).powf(alpha / 2.0))
}

/// Probability that the exit position from B(0, r), started at z (relative
/// to the center), lands in the polar bin ρ ∈ (rho_lo, rho_hi) × ψ ∈ (psi_lo,
/// psi_hi); `rho_hi = None` means the unbounded shell. Computed by quadrature
/// of the Poisson kernel with the edge singularity removed by substitution.
pub fn exit_bin_probability(
    alpha: f64,
    r: f64,
    z: Point,
    rho: (f64, Option<f64>),
    psi: (f64, f64),
) -> Result<f64> {
    let c = poisson_const(2, alpha)?;
    let zn = (z[0] * z[0] + z[1] * z[1]).sqrt();
    if zn >= r {
        return Err(Error::InvalidParameter("start must be inside the ball".into()));
    }
    let (rho_lo, rho_hi) = rho;
    if rho_lo < r {
        return Err(Error::InvalidParameter("bin must lie outside the ball".into()));
    }
    let pref = c * (r * r - zn * zn).powf(alpha / 2.0);
    let psi_z = z[1].atan2(z[0]);
    // |y − z|² along the ray at angle ψ, radius ρ
    let dist2 = move |rho_v: f64, psi_v: f64| {
        rho_v * rho_v + zn * zn - 2.0 * rho_v * zn * (psi_v - psi_z).cos()
    };

    // split the radial range into a finite part and an unbounded tail
    let rho_split = match rho_hi {
        Some(hi) => hi,
        None => rho_lo.max(2.0 * r).max(2.0 * zn),
    };

    let exp_v = (2.0 - alpha) / 2.0;
    let v_of = |rho_v: f64| (rho_v * rho_v - r * r).powf(exp_v);
    let rho_of_v = |v: f64| (r * r + v.powf(1.0 / exp_v)).sqrt();

    let angular = |ang_f: &mut dyn FnMut(f64) -> f64| -> f64 {
        let mut s = 0.0;
        let panels = 8;
        for i in 0..panels {
            let lo = psi.0 + (psi.1 - psi.0) * i as f64 / panels as f64;
            let hi = psi.0 + (psi.1 - psi.0) * (i + 1) as f64 / panels as f64;
            s += quad::gauss(&mut *ang_f, lo, hi, 16);
        }
        s
    };

    // finite radial part via the v-substitution (regular at ρ = r)
    let mut finite_part = 0.0;
    if rho_split > rho_lo {
        let v1 = v_of(rho_lo);
        let v2 = v_of(rho_split);
        let mut f = |psi_v: f64| {
            let breaks = quad::two_sided_geometric(v1, v2, (v2 - v1) * 1e-4, (v2 - v1) * 0.05);
            quad::gauss_panels(
                |v: f64| {
                    let rv = rho_of_v(v);
                    1.0 / dist2(rv, psi_v)
                },
                &breaks,
                16,
            ) / (2.0 - alpha)
        };
        finite_part = angular(&mut f);
    }

    // unbounded tail via w = 1/ρ: ∫ w^(α−1) (1−r²w²)^(−α/2) / (1 − 2 z w cosΔ + z²w²) dw
    let mut tail_part = 0.0;
    if rho_hi.is_none() {
        let w_hi = 1.0 / rho_split;
        let mut f = |psi_v: f64| {
            let cos_d = (psi_v - psi_z).cos();
            let g = |w: f64| {
                (1.0 - r * r * w * w).powf(-alpha / 2.0)
                    / (1.0 - 2.0 * zn * w * cos_d + zn * zn * w * w)
            };
            let w0 = w_hi * 2f64.powi(-45);
            let breaks = quad::two_sided_geometric(w0, w_hi, w0, 0.1 * w_hi);
            let mut s = g(0.0) * w0.powf(alpha) / alpha; // stub below the first panel
            s += quad::gauss_panels(|w: f64| w.powf(alpha - 1.0) * g(w), &breaks, 16);
            s
        };
        tail_part = angular(&mut f);
    }

    Ok(pref * (finite_part + tail_part))
}
