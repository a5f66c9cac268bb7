//! Assembly of the discrete Dirichlet form of the killed planar α-stable
//! process on a cell grid.
//!
//! Pair weights are translation invariant on the square lattice, so the whole
//! jump structure is one table over integer offsets: near offsets (center
//! distance ≤ 3h) by tensor Gauss quadrature of the cell-pair integral, far
//! offsets by the midpoint value h⁴ |c_i − c_j|^(−2−α). Killing rates come
//! from the polar form of the complement integral: for convex domains a ray
//! from an interior point crosses the boundary once, hence
//! ∫_{D^c} |x−y|^(−2−α) dy = (1/α) ∫ ρ_x(θ)^(−α) dθ with ρ_x the exact
//! ray-to-boundary distance.

use crate::constants::jump_constant;
use crate::error::{Error, Result};
use crate::geometry::{CellGrid, Domain, Point, Profile};
use crate::quad;
use num_complex::Complex;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

/// Offsets with center distance ≤ 3h get the quadrature treatment.
const NEAR_RADIUS_SQ: i64 = 9;
/// Gauss order per axis for near-field cell-pair integrals.
const NEAR_ORDER: usize = 4;

/// Dimensionless cell-pair interaction between unit squares at integer
/// offset (di, dj): ∫∫ |(di + u − u', dj + v − v')|^(−2−α) du du' dv dv',
/// by tensor Gauss of the given order per axis. For touching cells (offset
/// norm ≤ √2) the underlying integral diverges for α ≥ 1; the fixed-order
/// Gauss value is then the scheme's regularized weight by definition.
pub fn near_pair_integral(di: i64, dj: i64, alpha: f64, order: usize) -> f64 {
    let (nodes, weights) = quad::rule(order);
    // map to [0,1]
    let xs: Vec<f64> = nodes.iter().map(|t| 0.5 * (t + 1.0)).collect();
    let ws: Vec<f64> = weights.iter().map(|w| 0.5 * w).collect();
    let p = -(2.0 + alpha) / 2.0;
    let mut total = 0.0;
    for (u1, w1) in xs.iter().zip(&ws) {
        for (v1, q1) in xs.iter().zip(&ws) {
            let dx = di as f64 + u1 - v1;
            for (u2, w2) in xs.iter().zip(&ws) {
                for (v2, q2) in xs.iter().zip(&ws) {
                    let dy = dj as f64 + u2 - v2;
                    total += w1 * q1 * w2 * q2 * (dx * dx + dy * dy).powf(p);
                }
            }
        }
    }
    total
}

/// Exact distance from an interior point to the boundary along direction ω.
pub fn ray_exit_distance(domain: &Domain, x: Point, omega: Point) -> f64 {
    let (a, b) = (domain.a, domain.b);
    let (px, py) = (x[0], x[1]);
    let (wx, wy) = (omega[0], omega[1]);
    let axis_hit = |lo: f64, hi: f64, p: f64, w: f64| -> f64 {
        if w > 0.0 {
            (hi - p) / w
        } else if w < 0.0 {
            (lo - p) / w
        } else {
            f64::INFINITY
        }
    };
    match &domain.profile {
        Profile::Rectangle => {
            let tx = axis_hit(-a, a, px, wx);
            let ty = axis_hit(-b, b, py, wy);
            tx.min(ty)
        }
        Profile::Ellipse => {
            let qa = wx * wx / (a * a) + wy * wy / (b * b);
            let qb = 2.0 * (px * wx / (a * a) + py * wy / (b * b));
            let qc = px * px / (a * a) + py * py / (b * b) - 1.0;
            (-qb + (qb * qb - 4.0 * qa * qc).sqrt()) / (2.0 * qa)
        }
        Profile::Diamond => {
            let mut t = f64::INFINITY;
            for sx in [-1.0, 1.0] {
                for sy in [-1.0, 1.0] {
                    let den = sx * wx / a + sy * wy / b;
                    if den > 0.0 {
                        let num = 1.0 - sx * px / a - sy * py / b;
                        t = t.min(num / den);
                    }
                }
            }
            t
        }
        Profile::Stadium => {
            let flat = a - b;
            let mut best = f64::INFINITY;
            // straight segments y = ±b over |x| ≤ flat
            for sy in [-1.0, 1.0] {
                if wy * sy > 0.0 {
                    let t = (sy * b - py) / wy;
                    if t > 0.0 && (px + t * wx).abs() <= flat {
                        best = best.min(t);
                    }
                }
            }
            // cap arcs around (±flat, 0)
            for cx in [-flat, flat] {
                let rx = px - cx;
                let qb = 2.0 * (rx * wx + py * wy);
                let qc = rx * rx + py * py - b * b;
                let disc = qb * qb - 4.0 * qc;
                if disc >= 0.0 {
                    let t = (-qb + disc.sqrt()) / 2.0;
                    if t > 0.0 {
                        let ex = px + t * wx;
                        if (cx > 0.0 && ex >= flat) || (cx < 0.0 && ex <= -flat) {
                            best = best.min(t);
                        }
                    }
                }
            }
            best
        }
        Profile::Table { points } => {
            let mut best = f64::INFINITY;
            let mut hit_segment = |q1: Point, q2: Point| {
                let ex = q2[0] - q1[0];
                let ey = q2[1] - q1[1];
                let den = wx * ey - wy * ex;
                if den.abs() < 1e-300 {
                    return;
                }
                let dx = q1[0] - px;
                let dy = q1[1] - py;
                let t = (dx * ey - dy * ex) / den;
                let s = (wx * dy - wy * dx) / -den;
                if t > 0.0 && (-1e-12..=1.0 + 1e-12).contains(&s) {
                    best = best.min(t);
                }
            };
            for w in points.windows(2) {
                for sx in [-1.0, 1.0] {
                    for sy in [-1.0, 1.0] {
                        hit_segment([sx * w[0].0, sy * w[0].1], [sx * w[1].0, sy * w[1].1]);
                    }
                }
            }
            // closing walls at |x1| = a when the profile ends above zero
            let r_end = points.last().unwrap().1;
            if r_end > 0.0 {
                for sx in [-1.0, 1.0] {
                    hit_segment([sx * a, -r_end], [sx * a, r_end]);
                }
            }
            best
        }
    }
}

/// Directions from x to the profile's corner points, used as angular
/// quadrature breakpoints.
fn corner_angles(domain: &Domain, x: Point) -> Vec<f64> {
    let mut feats: Vec<Point> = Vec::new();
    let (a, b) = (domain.a, domain.b);
    match &domain.profile {
        Profile::Rectangle => {
            for sx in [-1.0, 1.0] {
                for sy in [-1.0, 1.0] {
                    feats.push([sx * a, sy * b]);
                }
            }
        }
        Profile::Diamond => {
            feats.extend_from_slice(&[[a, 0.0], [-a, 0.0], [0.0, b], [0.0, -b]]);
        }
        Profile::Stadium => {
            let flat = a - b;
            for sx in [-1.0, 1.0] {
                for sy in [-1.0, 1.0] {
                    feats.push([sx * flat, sy * b]);
                }
            }
        }
        Profile::Table { points } => {
            for p in points {
                for sx in [-1.0, 1.0] {
                    for sy in [-1.0, 1.0] {
                        feats.push([sx * p.0, sy * p.1]);
                    }
                }
            }
        }
        Profile::Ellipse => {}
    }
    let mut angles: Vec<f64> = feats
        .iter()
        .map(|f| (f[1] - x[1]).atan2(f[0] - x[0]))
        .map(|t| if t < 0.0 { t + 2.0 * PI } else { t })
        .collect();
    angles.push(0.0);
    angles.push(2.0 * PI);
    angles.sort_by(f64::total_cmp);
    angles.dedup_by(|p, q| (*p - *q).abs() < 1e-13);
    angles
}

/// Killing rate of the discrete form at an interior point:
/// A_{2,−α} ∫_{D^c} |x − y|^(−2−α) dy = (A/α) ∫ ρ_x(θ)^(−α) dθ.
pub fn killing_rate(x: Point, domain: &Domain, alpha: f64) -> Result<f64> {
    let a_const = jump_constant(alpha)?;
    if !domain.contains(x) {
        return Err(Error::InvalidParameter(format!(
            "killing_rate needs an interior point, got ({}, {})",
            x[0], x[1]
        )));
    }
    let diam = domain.diameter();
    // divergence guard against on-boundary evaluation
    for k in 0..64 {
        let th = 2.0 * PI * k as f64 / 64.0;
        if ray_exit_distance(domain, x, [th.cos(), th.sin()]) < 1e-12 * diam {
            return Err(Error::InvalidParameter(
                "killing_rate: point is numerically on the boundary".into(),
            ));
        }
    }
    let angles = corner_angles(domain, x);
    let mut total = 0.0;
    for w in angles.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let (v, _e) = quad::adaptive(
            |th: f64| ray_exit_distance(domain, x, [th.cos(), th.sin()]).powf(-alpha),
            w[0],
            w[1],
            1e-12,
            0.0,
        )?;
        total += v;
    }
    Ok(a_const * total / alpha)
}

/// Masked lattice convolution with a per-offset kernel table, via 2-D FFT.
struct LatticeConv {
    fx: usize,
    fy: usize,
    kernel_hat: Vec<Complex<f64>>,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl LatticeConv {
    /// `table[ady * nx + adx]` holds the kernel value at |offset| = (adx, ady).
    fn new(nx: usize, ny: usize, table: &[f64]) -> Self {
        let fx = (2 * nx).next_power_of_two();
        let fy = (2 * ny).next_power_of_two();
        let mut planner = FftPlanner::new();
        let row_fwd = planner.plan_fft_forward(fx);
        let row_inv = planner.plan_fft_inverse(fx);
        let col_fwd = planner.plan_fft_forward(fy);
        let col_inv = planner.plan_fft_inverse(fy);
        let mut kernel = vec![Complex::new(0.0, 0.0); fx * fy];
        for dy in -(ny as i64 - 1)..=(ny as i64 - 1) {
            let gy = dy.rem_euclid(fy as i64) as usize;
            for dx in -(nx as i64 - 1)..=(nx as i64 - 1) {
                let gx = dx.rem_euclid(fx as i64) as usize;
                kernel[gy * fx + gx] = Complex::new(
                    table[dy.unsigned_abs() as usize * nx + dx.unsigned_abs() as usize],
                    0.0,
                );
            }
        }
        let mut conv =
            Self { fx, fy, kernel_hat: Vec::new(), row_fwd, row_inv, col_fwd, col_inv };
        conv.fft2(&mut kernel, true);
        conv.kernel_hat = kernel;
        conv
    }

    fn fft2(&self, buf: &mut [Complex<f64>], forward: bool) {
        let (fx, fy) = (self.fx, self.fy);
        let row = if forward { &self.row_fwd } else { &self.row_inv };
        let col = if forward { &self.col_fwd } else { &self.col_inv };
        for r in buf.chunks_exact_mut(fx) {
            row.process(r);
        }
        let mut t = vec![Complex::new(0.0, 0.0); fx * fy];
        for y in 0..fy {
            for x in 0..fx {
                t[x * fy + y] = buf[y * fx + x];
            }
        }
        for c in t.chunks_exact_mut(fy) {
            col.process(c);
        }
        for y in 0..fy {
            for x in 0..fx {
                buf[y * fx + x] = t[x * fy + y];
            }
        }
    }

    /// out[i] = Σ_j table(c_i − c_j) f[j] over grid cells.
    fn apply(&self, grid_pos: &[(usize, usize)], f: &[f64]) -> Vec<f64> {
        let mut buf = vec![Complex::new(0.0, 0.0); self.fx * self.fy];
        for (k, &(gx, gy)) in grid_pos.iter().enumerate() {
            buf[gy * self.fx + gx] = Complex::new(f[k], 0.0);
        }
        self.fft2(&mut buf, true);
        for (v, k) in buf.iter_mut().zip(&self.kernel_hat) {
            *v *= k;
        }
        self.fft2(&mut buf, false);
        let norm = 1.0 / (self.fx * self.fy) as f64;
        grid_pos
            .iter()
            .map(|&(gx, gy)| buf[gy * self.fx + gx].re * norm)
            .collect()
    }
}

/// The assembled discrete Dirichlet form: symmetric jump weights over cell
/// pairs plus per-cell killing rates. The quadratic form is
/// E_h(f,f) = ½ Σ_{i≠j} w_ij (f_i − f_j)² + Σ_i κ_i f_i² h².
pub struct DiscreteForm {
    pub grid: Arc<CellGrid>,
    pub alpha: f64,
    /// A_{2,−α}, cached.
    pub jump_const: f64,
    /// κ_i: killing rate at cell centers.
    pub kappa: Vec<f64>,
    /// Σ_j w_ij per cell.
    row_sums: Vec<f64>,
    /// weight by absolute offset: table[ady * nx + adx].
    table: Vec<f64>,
    nx: usize,
    grid_pos: Vec<(usize, usize)>,
    conv: LatticeConv,
}

impl DiscreteForm {
    pub fn n(&self) -> usize {
        self.grid.len()
    }

    pub fn h(&self) -> f64 {
        self.grid.h
    }

    /// Cell mass m = h².
    pub fn mass(&self) -> f64 {
        self.grid.mass()
    }

    /// Jump weight between distinct cells (0 on the diagonal).
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        let (ix, iy) = self.grid.cells[i];
        let (jx, jy) = self.grid.cells[j];
        let adx = (jx - ix).unsigned_abs() as usize;
        let ady = (jy - iy).unsigned_abs() as usize;
        self.table[ady * self.nx + adx]
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.row_sums[i]
    }

    /// Σ_j w_ij f_j for all i (FFT-accelerated masked convolution).
    pub fn weighted_sum(&self, f: &[f64]) -> Vec<f64> {
        self.conv.apply(&self.grid_pos, f)
    }

    /// (−L f)_i = (Σ_j w_ij (f_i − f_j) + κ_i m f_i) / m; the eigenproblem
    /// −Lφ = λφ in the mass inner product Σ f_i g_i m then satisfies
    /// E_h(φ,φ) = λ Σ φ_i² m.
    pub fn apply_neg_generator(&self, f: &[f64]) -> Vec<f64> {
        let m = self.mass();
        let wf = self.weighted_sum(f);
        (0..self.n())
            .map(|i| (self.row_sums[i] * f[i] - wf[i] + self.kappa[i] * m * f[i]) / m)
            .collect()
    }

    /// E_h(f, f).
    pub fn energy(&self, f: &[f64]) -> f64 {
        let m = self.mass();
        let wf = self.weighted_sum(f);
        let mut e = 0.0;
        for i in 0..self.n() {
            e += f[i] * f[i] * self.row_sums[i] - f[i] * wf[i] + self.kappa[i] * f[i] * f[i] * m;
        }
        e
    }

    /// Dense row-major matrix of −L (for the direct eigensolver and solves).
    pub fn dense_neg_generator(&self) -> Vec<f64> {
        let n = self.n();
        let m = self.mass();
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            let (ix, iy) = self.grid.cells[i];
            for j in 0..n {
                if i == j {
                    a[i * n + i] = (self.row_sums[i] + self.kappa[i] * m) / m;
                } else {
                    let (jx, jy) = self.grid.cells[j];
                    let adx = (jx - ix).unsigned_abs() as usize;
                    let ady = (jy - iy).unsigned_abs() as usize;
                    a[i * n + j] = -self.table[ady * self.nx + adx] / m;
                }
            }
        }
        a
    }

    /// Mass-weighted inner product Σ f_i g_i h².
    pub fn mass_dot(&self, f: &[f64], g: &[f64]) -> f64 {
        f.iter().zip(g).map(|(a, b)| a * b).sum::<f64>() * self.mass()
    }
}

/// Assemble the discrete form on `domain` with cell size h; requires
/// h ≤ inradius/4 and α ∈ (0,2).
pub fn assemble(domain: &Domain, alpha: f64, h: f64) -> Result<DiscreteForm> {
    assemble_impl(domain, alpha, h, None)
}

/// Like `assemble`, but reuse killing rates computed earlier for exactly the
/// same (domain, α, h); used by the on-disk form cache.
pub fn assemble_with_kappa(
    domain: &Domain,
    alpha: f64,
    h: f64,
    kappa: Vec<f64>,
) -> Result<DiscreteForm> {
    assemble_impl(domain, alpha, h, Some(kappa))
}

fn assemble_impl(
    domain: &Domain,
    alpha: f64,
    h: f64,
    kappa_in: Option<Vec<f64>>,
) -> Result<DiscreteForm> {
    let jump = jump_constant(alpha)?;
    let limit = domain.inradius() / 4.0;
    if h > limit {
        return Err(Error::MeshTooCoarse { h, limit });
    }
    let grid = Arc::new(domain.mesh(h)?);
    let n = grid.len();

    // bounding box of occupied lattice sites
    let ix_min = grid.cells.iter().map(|c| c.0).min().unwrap();
    let ix_max = grid.cells.iter().map(|c| c.0).max().unwrap();
    let iy_min = grid.cells.iter().map(|c| c.1).min().unwrap();
    let iy_max = grid.cells.iter().map(|c| c.1).max().unwrap();
    let nx = (ix_max - ix_min + 1) as usize;
    let ny = (iy_max - iy_min + 1) as usize;

    // weight table over absolute offsets: w = A h^(2−α) q̂(offset)
    let scale = jump * h.powf(2.0 - alpha);
    let mut table = vec![0.0; nx * ny];
    for ady in 0..ny {
        for adx in 0..nx {
            if adx == 0 && ady == 0 {
                continue;
            }
            let d2 = (adx * adx + ady * ady) as i64;
            let qhat = if d2 <= NEAR_RADIUS_SQ {
                near_pair_integral(adx as i64, ady as i64, alpha, NEAR_ORDER)
            } else {
                (d2 as f64).powf(-(2.0 + alpha) / 2.0)
            };
            table[ady * nx + adx] = scale * qhat;
        }
    }

    let grid_pos: Vec<(usize, usize)> = grid
        .cells
        .iter()
        .map(|&(ix, iy)| ((ix - ix_min) as usize, (iy - iy_min) as usize))
        .collect();
    let conv = LatticeConv::new(nx, ny, &table);
    let row_sums = conv.apply(&grid_pos, &vec![1.0; n]);

    // killing rates: computed on the closed positive quadrant, mirrored to
    // the rest so the field is symmetric by construction
    let kappa = match kappa_in {
        Some(k) => {
            if k.len() != n || k.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(Error::InvalidParameter(
                    "cached killing rates do not match this grid".into(),
                ));
            }
            k
        }
        None => {
            let mut kappa = vec![f64::NAN; n];
            let quadrant: Vec<usize> = (0..n)
                .filter(|&k| grid.cells[k].0 >= 0 && grid.cells[k].1 >= 0)
                .collect();
            let computed: Result<Vec<(usize, f64)>> = quadrant
                .par_iter()
                .map(|&k| killing_rate(grid.centers[k], domain, alpha).map(|v| (k, v)))
                .collect();
            for (k, v) in computed? {
                kappa[k] = v;
            }
            for k in 0..n {
                if grid.cells[k].0 < 0 && grid.cells[k].1 >= 0 {
                    kappa[k] = kappa[grid.reflect_x(k)];
                }
            }
            for k in 0..n {
                if grid.cells[k].1 < 0 {
                    kappa[k] = kappa[grid.reflect_y(k)];
                }
            }
            debug_assert!(kappa.iter().all(|v| v.is_finite() && *v > 0.0));
            kappa
        }
    };

    Ok(DiscreteForm { grid, alpha, jump_const: jump, kappa, row_sums, table, nx, grid_pos, conv })
}
