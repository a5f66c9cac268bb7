//! Eigenpairs of the discrete generator, heat kernels, Green matrices, and
//! the intrinsic-ultracontractivity ratio.
//!
//! Dense symmetric eigendecomposition up to `dense_limit` cells; above that a
//! Lanczos iteration with full reorthogonalization on the FFT-accelerated
//! operator. Degenerate eigenvalue clusters are rotated to the
//! symmetry-adapted basis (definite parity under both axis reflections).

use crate::error::{Error, Result};
use crate::geometry::CellGrid;
use crate::lapack;
use crate::operator::DiscreteForm;
use rand::{Rng, SeedableRng};
use std::sync::Arc;

#[derive(Clone, Copy, Debug)]
pub struct EigenOptions {
    /// Use the dense eigensolver up to this many cells, Lanczos beyond.
    pub dense_limit: usize,
    /// Acceptable relative residual ‖−Lφ − λφ‖ / ‖φ‖.
    pub residual_tol: f64,
    /// Eigenvalues within this relative distance form a degenerate cluster.
    pub cluster_rel_tol: f64,
    /// Hard cap on the Lanczos subspace dimension.
    pub max_subspace: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { dense_limit: 3000, residual_tol: 1e-10, cluster_rel_tol: 1e-10, max_subspace: 1600 }
    }
}

/// Mass-orthonormal eigenpairs of −L, ascending.
pub struct Spectrum {
    pub grid: Arc<CellGrid>,
    pub eigenvalues: Vec<f64>,
    /// k × n row-major; row m is the m-th eigenvector, Σ_i v[i]² h² = 1.
    vectors: Vec<f64>,
}

impl Spectrum {
    pub fn k(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn n(&self) -> usize {
        self.grid.len()
    }

    pub fn vector(&self, m: usize) -> &[f64] {
        let n = self.n();
        &self.vectors[m * n..(m + 1) * n]
    }

    /// Ground state (strictly positive).
    pub fn ground_state(&self) -> &[f64] {
        self.vector(0)
    }

    /// Spectral gap λ₂ − λ₁.
    pub fn gap(&self) -> f64 {
        self.eigenvalues[1] - self.eigenvalues[0]
    }

    pub fn lambda1(&self) -> f64 {
        self.eigenvalues[0]
    }
}

fn reflect_vec(grid: &CellGrid, v: &[f64], sx: bool, sy: bool) -> Vec<f64> {
    (0..v.len())
        .map(|i| {
            let mut j = i;
            if sx {
                j = grid.reflect_x(j);
            }
            if sy {
                j = grid.reflect_y(j);
            }
            v[j]
        })
        .collect()
}

/// Rotate each degenerate cluster into vectors of definite parity under the
/// two axis reflections. The span (and hence every eigenvalue) is unchanged.
fn symmetry_adapt_clusters(grid: &CellGrid, lambdas: &[f64], vecs: &mut [f64], opts: &EigenOptions) {
    let n = grid.len();
    let target_norm = 1.0 / grid.h; // keeps rows mass-normalized
    let k = lambdas.len();
    let mut start = 0;
    while start < k {
        let mut end = start + 1;
        while end < k
            && lambdas[end] - lambdas[end - 1]
                <= opts.cluster_rel_tol * (1.0 + lambdas[end].abs())
        {
            end += 1;
        }
        let size = end - start;
        if size > 1 {
            let cluster: Vec<Vec<f64>> =
                (start..end).map(|m| vecs[m * n..(m + 1) * n].to_vec()).collect();
            let mut adapted: Vec<Vec<f64>> = Vec::new();
            for (px, py) in [(1.0, 1.0), (-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)] {
                for v in &cluster {
                    let rx = reflect_vec(grid, v, true, false);
                    let ry = reflect_vec(grid, v, false, true);
                    let rxy = reflect_vec(grid, v, true, true);
                    let mut p: Vec<f64> = (0..n)
                        .map(|i| 0.25 * (v[i] + px * rx[i] + py * ry[i] + px * py * rxy[i]))
                        .collect();
                    // entries of `adapted` are unit vectors at this point
                    for a in &adapted {
                        let c: f64 = p.iter().zip(a).map(|(x, y)| x * y).sum::<f64>();
                        for (pi, ai) in p.iter_mut().zip(a) {
                            *pi -= c * ai;
                        }
                    }
                    let norm = p.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if norm > 1e-4 * target_norm {
                        for pi in p.iter_mut() {
                            *pi /= norm;
                        }
                        adapted.push(p);
                        if adapted.len() == size {
                            break;
                        }
                    }
                }
                if adapted.len() == size {
                    break;
                }
            }
            if adapted.len() == size {
                for (m, mut v) in adapted.into_iter().enumerate() {
                    v.iter_mut().for_each(|x| *x *= target_norm);
                    vecs[(start + m) * n..(start + m + 1) * n].copy_from_slice(&v);
                }
            }
        }
        start = end;
    }
}

fn lanczos_smallest(form: &DiscreteForm, k: usize, opts: &EigenOptions) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = form.n();
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(0x5eed);
    let mut v0: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let nrm = v0.iter().map(|x| x * x).sum::<f64>().sqrt();
    v0.iter_mut().for_each(|x| *x /= nrm);

    let mut basis: Vec<Vec<f64>> = vec![v0];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut m_target = (4 * k + 40).min(opts.max_subspace).min(n);
    let mut exhausted = false;

    loop {
        while basis.len() <= m_target {
            let j = alphas.len();
            let vj = basis[j].clone();
            let mut w = form.apply_neg_generator(&vj);
            let aj: f64 = w.iter().zip(&vj).map(|(x, y)| x * y).sum();
            alphas.push(aj);
            for (wi, vi) in w.iter_mut().zip(&vj) {
                *wi -= aj * vi;
            }
            if j > 0 {
                let b = betas[j - 1];
                for (wi, vi) in w.iter_mut().zip(&basis[j - 1]) {
                    *wi -= b * vi;
                }
            }
            // full reorthogonalization, twice
            for _ in 0..2 {
                for vset in &basis {
                    let c: f64 = w.iter().zip(vset).map(|(x, y)| x * y).sum();
                    for (wi, vi) in w.iter_mut().zip(vset) {
                        *wi -= c * vi;
                    }
                }
            }
            let b = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if b < 1e-12 {
                // Krylov space exhausted; work with what we have
                exhausted = true;
                break;
            }
            betas.push(b);
            w.iter_mut().for_each(|x| *x /= b);
            basis.push(w);
        }
        let m = alphas.len();
        // dense eig of the tridiagonal projection
        let mut t = vec![0.0; m * m];
        for i in 0..m {
            t[i * m + i] = alphas[i];
            if i + 1 < m {
                t[i * m + i + 1] = betas[i];
                t[(i + 1) * m + i] = betas[i];
            }
        }
        let theta = lapack::eigh_inplace(&mut t, m)?;
        // residual estimates for the k smallest Ritz pairs
        let beta_last = if m < basis.len() { betas.get(m - 1).copied().unwrap_or(0.0) } else { 0.0 };
        let kk = k.min(m);
        let mut ok = true;
        for ritz in 0..kk {
            let s_last = t[ritz * m + m - 1];
            if (beta_last * s_last).abs() > 0.1 * opts.residual_tol * (1.0 + theta[ritz].abs()) {
                ok = false;
                break;
            }
        }
        if ok || exhausted || m >= opts.max_subspace.min(n) {
            // assemble Ritz vectors y_r = Σ_j s_j v_j
            let mut lam = Vec::with_capacity(kk);
            let mut vecs = vec![0.0; kk * n];
            for ritz in 0..kk {
                for j in 0..m {
                    let s = t[ritz * m + j];
                    let row = &basis[j];
                    let out = &mut vecs[ritz * n..(ritz + 1) * n];
                    for (o, vi) in out.iter_mut().zip(row) {
                        *o += s * vi;
                    }
                }
                lam.push(theta[ritz]);
            }
            if !ok {
                // final explicit residual check decides below
            }
            return Ok((lam, vecs));
        }
        m_target = ((m * 3) / 2 + 10).min(opts.max_subspace).min(n);
    }
}

/// k smallest eigenpairs of −L with the default options.
pub fn eigenpairs(form: &DiscreteForm, k: usize) -> Result<Spectrum> {
    eigenpairs_with(form, k, &EigenOptions::default())
}

pub fn eigenpairs_with(form: &DiscreteForm, k: usize, opts: &EigenOptions) -> Result<Spectrum> {
    let n = form.n();
    if k < 2 || k > n {
        return Err(Error::InvalidParameter(format!(
            "eigenpairs needs 2 <= k <= {n}, got {k}"
        )));
    }
    let grid = form.grid.clone();
    let h = grid.h;

    let (mut lambdas, mut vecs) = if n <= opts.dense_limit {
        let mut a = form.dense_neg_generator();
        let w = lapack::eigh_inplace(&mut a, n)?;
        a.truncate(k * n);
        (w[..k].to_vec(), a)
    } else {
        lanczos_smallest(form, k, opts)?
    };

    // mass normalization: Σ v² h² = 1
    for m in 0..lambdas.len() {
        let row = &mut vecs[m * n..(m + 1) * n];
        let nrm = row.iter().map(|x| x * x).sum::<f64>().sqrt() * h;
        row.iter_mut().for_each(|x| *x /= nrm);
    }

    symmetry_adapt_clusters(&grid, &lambdas, &mut vecs, opts);

    // sign conventions: ground state has a positive maximum entry; excited
    // states are positive at the cell nearest (x_max/2, 0)
    {
        let row = &mut vecs[0..n];
        let (mut best, mut best_abs) = (0usize, 0.0f64);
        for (i, &v) in row.iter().enumerate() {
            if v.abs() > best_abs {
                best_abs = v.abs();
                best = i;
            }
        }
        if row[best] < 0.0 {
            row.iter_mut().for_each(|x| *x = -*x);
        }
        let min_entry = row.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_entry <= 0.0 {
            return Err(Error::PositivityViolation { min_entry });
        }
    }
    let x_max = grid.centers.iter().map(|c| c[0]).fold(0.0, f64::max);
    let anchor = grid.nearest_cell([x_max / 2.0, 0.0]);
    for m in 1..lambdas.len() {
        let row = &mut vecs[m * n..(m + 1) * n];
        let mut s = row[anchor];
        if s == 0.0 {
            s = row.iter().cloned().fold(0.0, |acc: f64, v| if v.abs() > acc.abs() { v } else { acc });
        }
        if s < 0.0 {
            row.iter_mut().for_each(|x| *x = -*x);
        }
    }

    // explicit residual verification in the mass norm
    let mut worst = 0.0f64;
    for m in 0..lambdas.len() {
        let row = &vecs[m * n..(m + 1) * n];
        let lv = form.apply_neg_generator(row);
        let mut r2 = 0.0;
        for i in 0..n {
            let d = lv[i] - lambdas[m] * row[i];
            r2 += d * d;
        }
        let rel = (r2.sqrt() * h) / (1.0 + lambdas[m].abs());
        worst = worst.max(rel);
    }
    if worst > opts.residual_tol {
        return Err(Error::SolverNonconvergence { residual: worst });
    }
    // Rayleigh-polish the eigenvalues (quadratically accurate in the
    // eigenvector error, which matters on the Lanczos path)
    for m in 0..lambdas.len() {
        let row = &vecs[m * n..(m + 1) * n];
        let lv = form.apply_neg_generator(row);
        lambdas[m] = form.mass_dot(&lv, row) / form.mass_dot(row, row);
    }
    for m in 1..lambdas.len() {
        if lambdas[m] < lambdas[m - 1] - 1e-12 * (1.0 + lambdas[m].abs()) {
            return Err(Error::SolverNonconvergence { residual: lambdas[m - 1] - lambdas[m] });
        }
    }
    // the ground eigenvalue of the killed generator is simple
    if lambdas.len() > 1 && lambdas[1] - lambdas[0] <= 0.0 {
        return Err(Error::SolverNonconvergence { residual: lambdas[0] - lambdas[1] });
    }

    Ok(Spectrum { grid, eigenvalues: lambdas, vectors: vecs })
}

/// Discrete heat kernel matrix p(t)_ij = Σ_m e^(−λ_m t) φ_m[i] φ_m[j].
/// Requires the truncated tail to be negligible:
/// e^(−(λ_k − λ₁)t) < 1e-12.
pub fn heat_kernel(spectrum: &Spectrum, t: f64) -> Result<Vec<f64>> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("heat_kernel needs t > 0, got {t}")));
    }
    let k = spectrum.k();
    let n = spectrum.n();
    // with k = n the expansion is complete and nothing is truncated
    if k < n {
        let tail = (-(spectrum.eigenvalues[k - 1] - spectrum.eigenvalues[0]) * t).exp();
        if tail >= 1e-12 {
            return Err(Error::TruncationInsufficient { tail });
        }
    }
    let mut scaled = spectrum.vectors.clone();
    for m in 0..k {
        let w = (-spectrum.eigenvalues[m] * t).exp();
        scaled[m * n..(m + 1) * n].iter_mut().for_each(|x| *x *= w);
    }
    Ok(lapack::matmul_tn(&spectrum.vectors, &scaled, n, k, n))
}

/// sup over cell pairs of |e^(λ₁ t) p(t,x,y) / (φ₁(x) φ₁(y)) − 1|; defined
/// for t ≥ 1, the range of the two-sided decay bounds.
pub fn iu_ratio(spectrum: &Spectrum, t: f64) -> Result<f64> {
    if t < 1.0 {
        return Err(Error::InvalidParameter(format!("iu_ratio is asserted for t >= 1, got {t}")));
    }
    let p = heat_kernel(spectrum, t)?;
    let n = spectrum.n();
    let phi1 = spectrum.ground_state();
    let el1t = (spectrum.eigenvalues[0] * t).exp();
    let mut sup = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let v = (el1t * p[i * n + j] / (phi1[i] * phi1[j]) - 1.0).abs();
            sup = sup.max(v);
        }
    }
    Ok(sup)
}

/// Dense Green matrix: G = (−L)^{-1} / h², the discrete analog of
/// ∫ p_D(t,x,y) dt, so that G_ij ≈ G_D(c_i, c_j).
pub fn green_matrix(form: &DiscreteForm) -> Result<Vec<f64>> {
    let n = form.n();
    let m = form.mass();
    let mut a = form.dense_neg_generator();
    let mut b = vec![0.0; n * n];
    for i in 0..n {
        b[i * n + i] = 1.0 / m;
    }
    lapack::spd_solve_inplace(&mut a, &mut b, n, n)?;
    Ok(b)
}

/// One column of the Green matrix by preconditioned conjugate gradients,
/// usable when the dense solve is out of reach.
pub fn green_column(form: &DiscreteForm, j: usize) -> Result<Vec<f64>> {
    let n = form.n();
    let m = form.mass();
    let mut rhs = vec![0.0; n];
    rhs[j] = 1.0 / m;
    // Jacobi preconditioner from the generator diagonal
    let diag: Vec<f64> = (0..n)
        .map(|i| (form.row_sum(i) + form.kappa[i] * m) / m)
        .collect();
    let mut x = vec![0.0; n];
    let mut r = rhs.clone();
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(ri, di)| ri / di).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let rhs_norm = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
    for _ in 0..50_000 {
        let ap = form.apply_neg_generator(&p);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rn <= 1e-12 * rhs_norm {
            return Ok(x);
        }
        z = r.iter().zip(&diag).map(|(ri, di)| ri / di).collect();
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    Err(Error::SolverNonconvergence { residual: rn / rhs_norm })
}
