//! One-dimensional quadrature: Gauss–Legendre rules with cached nodes, an
//! adaptive driver, and panel helpers used by the singular-kernel integrals.

use crate::error::{Error, Result};
use std::collections::HashMap;
use std::sync::{LazyLock, Mutex};

/// Gauss–Legendre nodes/weights on [-1, 1], computed once per order by
/// Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            // Legendre P_n(x) and derivative by recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / pp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n == 1 {
        nodes[0] = 0.0;
        weights[0] = 2.0;
    }
    (nodes, weights)
}

static RULE_CACHE: LazyLock<Mutex<HashMap<usize, &'static (Vec<f64>, Vec<f64>)>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

/// Cached rule; leaks one allocation per distinct order, which stays tiny.
pub fn rule(n: usize) -> &'static (Vec<f64>, Vec<f64>) {
    let mut cache = RULE_CACHE.lock().unwrap();
    cache
        .entry(n)
        .or_insert_with(|| Box::leak(Box::new(gauss_legendre(n))))
}

/// Fixed-order Gauss–Legendre on [a, b].
pub fn gauss<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, order: usize) -> f64 {
    let (nodes, weights) = rule(order);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut sum = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        sum += w * f(mid + half * x);
    }
    sum * half
}

/// Fixed-order Gauss over an explicit list of panel breakpoints.
pub fn gauss_panels<F: FnMut(f64) -> f64>(mut f: F, breaks: &[f64], order: usize) -> f64 {
    let mut sum = 0.0;
    for w in breaks.windows(2) {
        sum += gauss(&mut f, w[0], w[1], order);
    }
    sum
}

/// Adaptive Gauss quadrature with error control via order doubling
/// (G16 against G32 per panel). Returns (value, error estimate).
pub fn adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<(f64, f64)> {
    const MAX_PANELS: usize = 4000;
    let coarse = gauss(&mut f, a, b, 16);
    let fine = gauss(&mut f, a, b, 32);
    let mut stack = vec![(a, b, coarse, fine, (coarse - fine).abs())];
    let mut done: Vec<(f64, f64)> = Vec::new();
    let mut rough_total: f64 = fine.abs().max(abs_tol);
    let mut panels = 0usize;
    while let Some((lo, hi, _c, fv, err)) = stack.pop() {
        let span_frac = (hi - lo) / (b - a);
        let tol_here = (rel_tol * rough_total + abs_tol) * span_frac.max(1e-6);
        if err <= tol_here || (hi - lo) < 1e-14 * (b - a).abs() {
            done.push((fv, err));
            continue;
        }
        panels += 1;
        if panels > MAX_PANELS {
            let achieved: f64 =
                done.iter().map(|(_, e)| e).sum::<f64>() + stack.iter().map(|s| s.4).sum::<f64>();
            return Err(Error::QuadratureNonconvergence {
                achieved,
                target: rel_tol * rough_total + abs_tol,
            });
        }
        let mid = 0.5 * (lo + hi);
        for (l, r) in [(lo, mid), (mid, hi)] {
            let c = gauss(&mut f, l, r, 16);
            let fvn = gauss(&mut f, l, r, 32);
            stack.push((l, r, c, fvn, (c - fvn).abs()));
        }
        rough_total = rough_total
            .max(done.iter().map(|(v, _)| v.abs()).sum::<f64>() + stack.iter().map(|s| s.3.abs()).sum::<f64>());
    }
    let value: f64 = done.iter().map(|(v, _)| v).sum();
    let err: f64 = done.iter().map(|(_, e)| e).sum();
    Ok((value, err))
}

/// Breakpoints for panels whose widths double moving inward from both ends
/// of [lo, hi]. `w_lo`/`w_hi` set the first panel width at each end; they are
/// clamped to keep the panel count bounded.
pub fn two_sided_geometric(lo: f64, hi: f64, w_lo: f64, w_hi: f64) -> Vec<f64> {
    let span = hi - lo;
    debug_assert!(span > 0.0);
    let floor = span * 2f64.powi(-45);
    let w_lo = w_lo.max(floor).min(0.5 * span);
    let w_hi = w_hi.max(floor).min(0.5 * span);
    let mut left = vec![lo];
    let mut w = w_lo;
    let mut x = lo;
    while x + w < lo + 0.5 * span {
        x += w;
        left.push(x);
        w *= 2.0;
    }
    let mut right = vec![hi];
    let mut w = w_hi;
    let mut x = hi;
    while x - w > lo + 0.5 * span {
        x -= w;
        right.push(x);
        w *= 2.0;
    }
    right.reverse();
    left.extend(right);
    left
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_nodes_integrate_polynomials_exactly() {
        // order n integrates degree 2n-1 exactly
        let v = gauss(|x| x.powi(7) + 3.0 * x * x, -1.0, 2.0, 4);
        let exact = (2f64.powi(8) - 1.0) / 8.0 + (2f64.powi(3) + 1.0);
        assert_relative_eq!(v, exact, max_relative = 1e-14);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let (v, e) = adaptive(|x: f64| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-12, 1e-14).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!(e < 1e-8 * v);
        assert_relative_eq!(v, exact, max_relative = 1e-11);
    }

    #[test]
    fn adaptive_endpoint_singularity() {
        // ∫_0^1 x^(-1/2) dx = 2
        let (v, _) = adaptive(|x: f64| x.sqrt().recip(), 1e-300, 1.0, 1e-10, 1e-12).unwrap();
        assert_relative_eq!(v, 2.0, max_relative = 1e-7);
    }

    #[test]
    fn geometric_panels_cover_interval() {
        let p = two_sided_geometric(0.0, 10.0, 1e-3, 0.1);
        assert_eq!(p[0], 0.0);
        assert_eq!(*p.last().unwrap(), 10.0);
        assert!(p.windows(2).all(|w| w[1] > w[0]));
        assert!(p.len() < 50);
    }
}
