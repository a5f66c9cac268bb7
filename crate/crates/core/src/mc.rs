//! Monte Carlo path sampler for the planar isotropic α-stable process: an
//! independent stochastic oracle for exit times and exit-position laws.
//!
//! Increments come from Brownian subordination: a one-sided (α/2)-stable
//! subordinator step S (Chambers–Mallows–Stuck) scaled by dt^(2/α), then a
//! centered Gaussian pair with covariance 2S·I, which has characteristic
//! function exactly e^(−dt |ξ|^α). The √2 calibration is validated by the
//! empirical-characteristic-function gate rather than assumed.

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::kernels::BallSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PathConfig {
    pub alpha: f64,
    /// time step of the discretized path
    pub dt: f64,
    /// per-path step cap; exceeding it is a configuration error
    pub max_steps: usize,
    pub seed: u64,
    /// worker count; results are bit-reproducible for a fixed (seed, workers)
    pub workers: usize,
}

impl PathConfig {
    pub fn new(alpha: f64, dt: f64, seed: u64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::InvalidParameter(format!("alpha must be in (0,2), got {alpha}")));
        }
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        Ok(Self { alpha, dt, max_steps: 100_000_000, seed, workers: 2 })
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }
}

/// One-sided β-stable variable with Laplace transform e^(−λ^β), β ∈ (0,1).
fn positive_stable(beta: f64, rng: &mut ChaCha12Rng) -> f64 {
    let clamp = |u: f64| u.clamp(1e-12, 1.0 - 1e-12);
    let u = clamp(rng.random::<f64>()) * PI;
    let w = -(clamp(rng.random::<f64>())).ln();
    let s1 = (beta * u).sin() / u.sin().powf(1.0 / beta);
    let s2 = (((1.0 - beta) * u).sin() / w).powf((1.0 - beta) / beta);
    s1 * s2
}

/// One increment of the isotropic α-stable path over time dt.
pub fn sample_increment(alpha: f64, dt: f64, rng: &mut ChaCha12Rng) -> Point {
    let s = positive_stable(alpha / 2.0, rng) * dt.powf(2.0 / alpha);
    let sigma = (2.0 * s).sqrt();
    let g1: f64 = StandardNormal.sample(rng);
    let g2: f64 = StandardNormal.sample(rng);
    [sigma * g1, sigma * g2]
}

/// Deterministic parallel map-reduce over paths: worker w handles a fixed
/// path range with its own counter-based stream, partials are combined in
/// worker order.
fn run_workers<T, F>(n: usize, config: &PathConfig, body: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &mut ChaCha12Rng) -> Result<T> + Sync,
{
    let workers = config.workers.max(1);
    let per = n.div_ceil(workers);
    let chunks: Vec<(usize, usize)> = (0..workers)
        .map(|w| (w, per.min(n.saturating_sub(w * per))))
        .filter(|&(_, c)| c > 0)
        .collect();
    chunks
        .par_iter()
        .map(|&(w, count)| {
            let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
            rng.set_stream(w as u64 + 1);
            body(count, &mut rng)
        })
        .collect()
}

/// Exit samples of a ball: time (in steps × dt) and position at the first
/// sampling time outside.
#[derive(Clone, Debug, Serialize)]
pub struct ExitStats {
    pub samples: usize,
    pub mean_exit_time: f64,
    /// sample standard deviation / √n
    pub stderr: f64,
    /// flattened histogram, shell-major: counts[shell * sectors + sector];
    /// empty when no binning was requested. Counts sum to `samples`.
    pub counts: Vec<u64>,
    pub sectors: usize,
    /// inner radii of the shells; the last shell is unbounded
    pub shell_radii: Vec<f64>,
}

struct Partial {
    sum_t: f64,
    sum_t2: f64,
    counts: Vec<u64>,
}

fn simulate_exits(
    ball: BallSpec,
    start: Point,
    n: usize,
    config: &PathConfig,
    sectors: usize,
    shell_radii: &[f64],
) -> Result<ExitStats> {
    let r2 = ball.radius * ball.radius;
    let bins = if sectors > 0 { sectors * shell_radii.len() } else { 0 };
    let partials = run_workers(n, config, |count, rng| {
        let mut p = Partial { sum_t: 0.0, sum_t2: 0.0, counts: vec![0u64; bins] };
        for _ in 0..count {
            let mut x = [start[0] - ball.center[0], start[1] - ball.center[1]];
            let mut steps = 0usize;
            while x[0] * x[0] + x[1] * x[1] < r2 {
                let dz = sample_increment(config.alpha, config.dt, rng);
                x[0] += dz[0];
                x[1] += dz[1];
                steps += 1;
                if steps > config.max_steps {
                    return Err(Error::StepCapExceeded { cap: config.max_steps });
                }
            }
            let t = steps as f64 * config.dt;
            p.sum_t += t;
            p.sum_t2 += t * t;
            if bins > 0 {
                let rho = (x[0] * x[0] + x[1] * x[1]).sqrt();
                let mut psi = x[1].atan2(x[0]);
                if psi < 0.0 {
                    psi += 2.0 * PI;
                }
                let sector = ((psi / (2.0 * PI) * sectors as f64) as usize).min(sectors - 1);
                let shell = match shell_radii.iter().rposition(|&lo| rho >= lo) {
                    Some(s) => s,
                    None => 0,
                };
                p.counts[shell * sectors + sector] += 1;
            }
        }
        Ok(p)
    })?;
    let mut sum_t = 0.0;
    let mut sum_t2 = 0.0;
    let mut counts = vec![0u64; bins];
    for p in partials {
        sum_t += p.sum_t;
        sum_t2 += p.sum_t2;
        for (c, pc) in counts.iter_mut().zip(&p.counts) {
            *c += pc;
        }
    }
    let nf = n as f64;
    let mean = sum_t / nf;
    let var = (sum_t2 / nf - mean * mean).max(0.0);
    Ok(ExitStats {
        samples: n,
        mean_exit_time: mean,
        stderr: (var / nf).sqrt(),
        counts,
        sectors,
        shell_radii: shell_radii.to_vec(),
    })
}

/// Mean exit time of the ball from `start`, recorded at the first discrete
/// time outside. Detection bias is positive and O(dt).
pub fn exit_time_mc(ball: BallSpec, start: Point, n: usize, config: &PathConfig) -> Result<ExitStats> {
    simulate_exits(ball, start, n, config, 0, &[])
}

/// Exit times at dt and dt/4 with linear bias extrapolation.
pub fn exit_time_extrapolated(
    ball: BallSpec,
    start: Point,
    n: usize,
    config: &PathConfig,
) -> Result<(f64, f64, ExitStats, ExitStats)> {
    let coarse = exit_time_mc(ball, start, n, config)?;
    let mut fine_cfg = *config;
    fine_cfg.dt = config.dt / 4.0;
    fine_cfg.seed = config.seed.wrapping_add(0x9e3779b9);
    let fine = exit_time_mc(ball, start, n, &fine_cfg)?;
    let tau = (4.0 * fine.mean_exit_time - coarse.mean_exit_time) / 3.0;
    let stderr = ((16.0 * fine.stderr * fine.stderr + coarse.stderr * coarse.stderr) / 9.0).sqrt();
    Ok((tau, stderr, coarse, fine))
}

/// Exit-position histogram over sectors × shells around the ball center.
pub fn exit_position_mc(
    ball: BallSpec,
    start: Point,
    n: usize,
    sectors: usize,
    shell_radii: &[f64],
    config: &PathConfig,
) -> Result<ExitStats> {
    if sectors == 0 || shell_radii.is_empty() || shell_radii[0] < ball.radius {
        return Err(Error::InvalidParameter(
            "need at least one sector and shells starting at the ball radius".into(),
        ));
    }
    simulate_exits(ball, start, n, config, sectors, shell_radii)
}

/// Probability that the exit lands in the annular sector ρ ∈ (r, 2r),
/// ψ ∈ (3π/4, 5π/4), started at the ball center. Returns (estimate, stderr).
pub fn sector_exit_probability(
    ball: BallSpec,
    alpha: f64,
    n: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let config = PathConfig::new(alpha, 1e-3 * ball.radius.powf(alpha), seed)?;
    let r = ball.radius;
    let counts = run_workers(n, &config, |count, rng| {
        let mut hits = 0u64;
        let r2 = r * r;
        for _ in 0..count {
            let mut x = [0.0f64, 0.0];
            let mut steps = 0usize;
            while x[0] * x[0] + x[1] * x[1] < r2 {
                let dz = sample_increment(config.alpha, config.dt, rng);
                x[0] += dz[0];
                x[1] += dz[1];
                steps += 1;
                if steps > config.max_steps {
                    return Err(Error::StepCapExceeded { cap: config.max_steps });
                }
            }
            let rho2 = x[0] * x[0] + x[1] * x[1];
            let mut psi = x[1].atan2(x[0]);
            if psi < 0.0 {
                psi += 2.0 * PI;
            }
            if rho2 < 4.0 * r2 && (0.75 * PI..1.25 * PI).contains(&psi) {
                hits += 1;
            }
        }
        Ok(hits)
    })?;
    let hits: u64 = counts.iter().sum();
    let p = hits as f64 / n as f64;
    Ok((p, (p * (1.0 - p) / n as f64).sqrt()))
}

/// Empirical characteristic function Re E e^(i ξ·Z) of one increment;
/// the calibration gate compares it against e^(−dt |ξ|^α).
pub fn empirical_cf(xi: Point, n: usize, config: &PathConfig) -> Result<(f64, f64)> {
    let partials = run_workers(n, config, |count, rng| {
        let mut s = 0.0;
        let mut s2 = 0.0;
        for _ in 0..count {
            let z = sample_increment(config.alpha, config.dt, rng);
            let c = (xi[0] * z[0] + xi[1] * z[1]).cos();
            s += c;
            s2 += c * c;
        }
        Ok((s, s2))
    })?;
    let (s, s2) = partials.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let nf = n as f64;
    let mean = s / nf;
    let var = (s2 / nf - mean * mean).max(0.0);
    Ok((mean, (var / nf).sqrt()))
}

/// The exact characteristic function e^(−dt |ξ|^α) the sampler must match.
pub fn exact_cf(alpha: f64, dt: f64, xi: Point) -> f64 {
    (-dt * (xi[0] * xi[0] + xi[1] * xi[1]).sqrt().powf(alpha)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ecf_matches_exact_cf() {
        // calibration gate at ξ = (1,0), dt = 1
        let config = PathConfig::new(1.0, 1.0, 99).unwrap();
        let (ecf, se) = empirical_cf([1.0, 0.0], 200_000, &config).unwrap();
        let exact = exact_cf(1.0, 1.0, [1.0, 0.0]);
        assert!(
            (ecf - exact).abs() < 3.0 * se,
            "ecf {ecf} vs {exact} (se {se})"
        );
        for &alpha in &[0.6, 1.5] {
            let config = PathConfig::new(alpha, 0.7, 7).unwrap();
            let (ecf, se) = empirical_cf([0.8, -0.6], 200_000, &config).unwrap();
            let exact = exact_cf(alpha, 0.7, [0.8, -0.6]);
            assert!(
                (ecf - exact).abs() < 4.0 * se,
                "alpha {alpha}: ecf {ecf} vs {exact} (se {se})"
            );
        }
    }

    #[test]
    fn increments_are_isotropic() {
        // truncated component second moments agree (the raw variance is infinite)
        let config = PathConfig::new(1.3, 1.0, 5).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let (mut sx, mut sy, mut sx2, mut sy2) = (0.0, 0.0, 0.0, 0.0);
        let n = 200_000;
        for _ in 0..n {
            let z = sample_increment(config.alpha, config.dt, &mut rng);
            if z[0] * z[0] + z[1] * z[1] < 25.0 {
                sx += z[0];
                sy += z[1];
                sx2 += z[0] * z[0];
                sy2 += z[1] * z[1];
            }
        }
        let nf = n as f64;
        // means near zero, truncated second moments close
        assert!((sx / nf).abs() < 0.02 && (sy / nf).abs() < 0.02);
        let rel = (sx2 - sy2).abs() / sx2;
        assert!(rel < 0.03, "anisotropy {rel}");
    }

    #[test]
    fn cauchy_density_at_origin_kernel_estimate() {
        // α = 1, dt = 1: density at 0 is 1/(2π)
        let config = PathConfig::new(1.0, 1.0, 31).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        let rho = 0.15;
        let n = 400_000;
        let mut hits = 0usize;
        for _ in 0..n {
            let z = sample_increment(config.alpha, config.dt, &mut rng);
            if z[0] * z[0] + z[1] * z[1] < rho * rho {
                hits += 1;
            }
        }
        let density = hits as f64 / n as f64 / (PI * rho * rho);
        let exact = 1.0 / (2.0 * PI);
        assert!(
            (density - exact).abs() / exact < 0.05,
            "kernel estimate {density} vs {exact}"
        );
    }

    #[test]
    fn determinism_same_seed_same_workers() {
        let ball = BallSpec::unit();
        let config = PathConfig::new(1.2, 0.01, 404).unwrap().with_workers(2);
        let a = exit_time_mc(ball, [0.0, 0.0], 2_000, &config).unwrap();
        let b = exit_time_mc(ball, [0.0, 0.0], 2_000, &config).unwrap();
        assert_eq!(a.mean_exit_time.to_bits(), b.mean_exit_time.to_bits());
        assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
    }

    #[test]
    fn exit_time_smoke_against_closed_form() {
        // coarse-n sanity: the full-accuracy comparison lives in acceptance
        let ball = BallSpec::unit();
        let config = PathConfig::new(1.0, 2e-3, 11).unwrap();
        let (tau, se, _, _) = exit_time_extrapolated(ball, [0.0, 0.0], 30_000, &config).unwrap();
        let exact = 2.0 / PI;
        assert!(
            (tau - exact).abs() < 0.05 * exact + 4.0 * se,
            "tau {tau} vs {exact} (se {se})"
        );
        // boundary start exits in about one step
        let stats = exit_time_mc(ball, [1.0, 0.0], 1_000, &config).unwrap();
        assert!(stats.mean_exit_time <= 2.1 * config.dt);
    }

    #[test]
    fn exit_time_scales_with_radius() {
        // E τ at radius 2 is 2^α times the radius-1 value (matched start ratio)
        let alpha = 1.3;
        let n = 20_000;
        let c1 = PathConfig::new(alpha, 2e-3, 88).unwrap();
        let s1 = exit_time_mc(BallSpec::unit(), [0.25, 0.0], n, &c1).unwrap();
        let big = BallSpec::new([0.0, 0.0], 2.0).unwrap();
        let c2 = PathConfig::new(alpha, 2e-3 * 2f64.powf(alpha), 88).unwrap();
        let s2 = exit_time_mc(big, [0.5, 0.0], n, &c2).unwrap();
        let want = 2f64.powf(alpha) * s1.mean_exit_time;
        let tol = 0.04 * want + 3.0 * (s2.stderr + 2f64.powf(alpha) * s1.stderr);
        assert!(
            (s2.mean_exit_time - want).abs() < tol,
            "{} vs {want} (tol {tol})",
            s2.mean_exit_time
        );
    }

    #[test]
    fn exit_position_counts_sum_and_center_symmetry() {
        let ball = BallSpec::unit();
        let config = PathConfig::new(1.0, 2e-3, 17).unwrap();
        let n = 40_000;
        let stats =
            exit_position_mc(ball, [0.0, 0.0], n, 4, &[1.0, 1.5, 2.0, 4.0], &config).unwrap();
        assert_eq!(stats.counts.iter().sum::<u64>() as usize, n);
        // from the center every sector is equally likely
        for shell in 0..4 {
            let row = &stats.counts[shell * 4..(shell + 1) * 4];
            let total: u64 = row.iter().sum();
            if total > 2000 {
                for &c in row {
                    let p = c as f64 / total as f64;
                    assert!((p - 0.25).abs() < 0.03, "sector probability {p}");
                }
            }
        }
        // far shells hold less mass than the first
        let first: u64 = stats.counts[0..4].iter().sum();
        let last: u64 = stats.counts[12..16].iter().sum();
        assert!(first > last);
    }

    #[test]
    fn step_cap_trips() {
        let ball = BallSpec::unit();
        let mut config = PathConfig::new(1.0, 1e-6, 3).unwrap();
        config.max_steps = 10;
        assert!(matches!(
            exit_time_mc(ball, [0.0, 0.0], 50, &config),
            Err(Error::StepCapExceeded { .. })
        ));
    }
}
