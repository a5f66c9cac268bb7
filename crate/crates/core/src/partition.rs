//! Standalone checkers for the two discrete partition inequalities used in
//! the rectangle lower bounds: the unimodal-weight chain inequality and the
//! block decomposition of the double-difference integral.

use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

/// Positive weights μ₁…μ_L that increase up to a mode and decrease after.
#[derive(Clone, Debug)]
pub struct UnimodalWeights {
    weights: Vec<f64>,
    mode: usize,
}

impl UnimodalWeights {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidParameter("weights must be nonempty".into()));
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::InvalidParameter("weights must be strictly positive".into()));
        }
        let mode = weights
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        for k in 1..=mode {
            if weights[k] < weights[k - 1] {
                return Err(Error::InvalidParameter(format!(
                    "weights not unimodal: decrease before the mode at {k}"
                )));
            }
        }
        for k in mode + 1..weights.len() {
            if weights[k] > weights[k - 1] {
                return Err(Error::InvalidParameter(format!(
                    "weights not unimodal: increase after the mode at {k}"
                )));
            }
        }
        Ok(Self { weights, mode })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mode(&self) -> usize {
        self.mode
    }
}

/// Both sides of Σ μ_k f_k² ≤ L² Σ (μ_k ∧ μ_{k+1}) (f_k − f_{k+1})².
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ChainCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// The chain inequality for centered f (Σ f_k μ_k = 0 required of the
/// caller, tolerance 1e-12 relative).
pub fn check_partition0(mu: &UnimodalWeights, f: &[f64]) -> Result<ChainCheck> {
    let l = mu.len();
    if l < 2 {
        return Err(Error::InvalidParameter("the chain inequality needs L >= 2".into()));
    }
    if f.len() != l {
        return Err(Error::InvalidParameter("f and weights must have equal length".into()));
    }
    let w = mu.weights();
    let dot: f64 = f.iter().zip(w).map(|(a, b)| a * b).sum();
    // natural scale: |Σfμ| ≤ sqrt(Σ μ f²) sqrt(Σ μ)
    let scale = (f.iter().zip(w).map(|(a, b)| a * a * b).sum::<f64>()
        * w.iter().sum::<f64>())
    .sqrt()
    .max(1e-300);
    if dot.abs() > 1e-12 * scale {
        return Err(Error::InvalidParameter(format!(
            "f must be centered against the weights: Σ fμ = {dot:e}"
        )));
    }
    let lhs: f64 = f.iter().zip(w).map(|(a, b)| a * a * b).sum();
    let l2 = (l * l) as f64;
    let rhs: f64 = (0..l - 1)
        .map(|k| w[k].min(w[k + 1]) * (f[k] - f[k + 1]).powi(2))
        .sum::<f64>()
        * l2;
    Ok(ChainCheck { lhs, rhs, holds: lhs <= rhs * (1.0 + 1e-12) + 1e-300 })
}

/// Center f against the weights: subtract Σfμ / Σμ.
pub fn center_against(mu: &UnimodalWeights, f: &[f64]) -> Vec<f64> {
    let w = mu.weights();
    let total: f64 = w.iter().sum();
    let c: f64 = f.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / total;
    let mut out: Vec<f64> = f.iter().map(|v| v - c).collect();
    // one refinement pass removes the round-off left by the cancellation
    let c2: f64 = out.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / total;
    out.iter_mut().for_each(|v| *v -= c2);
    out
}

/// Finite measure space split into consecutive blocks of point masses.
#[derive(Clone, Debug)]
pub struct PartitionedSpace {
    /// blocks[k] lists the point masses of block k.
    pub blocks: Vec<Vec<f64>>,
}

impl PartitionedSpace {
    pub fn new(blocks: Vec<Vec<f64>>) -> Result<Self> {
        if blocks.is_empty() || blocks.iter().any(|b| b.is_empty()) {
            return Err(Error::InvalidParameter("blocks must be nonempty".into()));
        }
        if blocks.iter().flatten().any(|&m| !(m > 0.0)) {
            return Err(Error::InvalidParameter("point masses must be positive".into()));
        }
        let s = Self { blocks };
        UnimodalWeights::new(s.block_masses())?;
        Ok(s)
    }

    pub fn block_masses(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.iter().sum()).collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.block_masses().iter().sum()
    }
}

/// The three quantities of the block decomposition:
/// (1/μ(D)) ∬_{D×D} ≤ 2 Σ_k (1/μ_k) ∬_{D_k×D_k} + 4L² Σ_k (1/(μ_k ∨ μ_{k+1})) ∬_{D_k×D_{k+1}}.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BlockCheck {
    pub lhs: f64,
    pub rhs_within: f64,
    pub rhs_adjacent: f64,
    pub holds: bool,
}

/// Evaluate the decomposition for per-point values f (same shape as blocks).
pub fn check_partition(space: &PartitionedSpace, f: &[Vec<f64>]) -> Result<BlockCheck> {
    let l = space.blocks.len();
    if f.len() != l || f.iter().zip(&space.blocks).any(|(fv, bv)| fv.len() != bv.len()) {
        return Err(Error::InvalidParameter("values must match the block shape".into()));
    }
    let masses = space.block_masses();
    let mu_d = space.total_mass();

    // ∬ over ordered pairs of (f(x)−f(y))² dμ dμ in O(points) via moments
    let pair_integral = |idx: &[(usize, usize)]| -> (f64, f64, f64) {
        // returns (mass, first moment, second moment)
        let mut m0 = 0.0;
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        for &(k, i) in idx {
            let w = space.blocks[k][i];
            let v = f[k][i];
            m0 += w;
            m1 += w * v;
            m2 += w * v * v;
        }
        (m0, m1, m2)
    };
    // ∬ (f(x)−f(y))² a(dx) b(dy) = m2_a m0_b + m0_a m2_b − 2 m1_a m1_b;
    // mathematically ≥ 0, clamped against cancellation, with the raw
    // magnitude reported for the round-off floor
    let cross = |a: (f64, f64, f64), b: (f64, f64, f64)| -> (f64, f64) {
        let mag = a.2 * b.0 + a.0 * b.2 + 2.0 * (a.1 * b.1).abs();
        ((a.2 * b.0 + a.0 * b.2 - 2.0 * a.1 * b.1).max(0.0), mag)
    };

    let all: Vec<(usize, usize)> = (0..l)
        .flat_map(|k| (0..space.blocks[k].len()).map(move |i| (k, i)))
        .collect();
    let tot = pair_integral(&all);
    let (lhs, lhs_mag) = cross(tot, tot);
    let lhs = lhs / mu_d;

    let block_moments: Vec<(f64, f64, f64)> = (0..l)
        .map(|k| {
            let idx: Vec<(usize, usize)> = (0..space.blocks[k].len()).map(|i| (k, i)).collect();
            pair_integral(&idx)
        })
        .collect();
    let rhs_within: f64 = (0..l)
        .map(|k| cross(block_moments[k], block_moments[k]).0 / masses[k])
        .sum::<f64>()
        * 2.0;
    let l2 = (l * l) as f64;
    let rhs_adjacent: f64 = (0..l.saturating_sub(1))
        .map(|k| cross(block_moments[k], block_moments[k + 1]).0 / masses[k].max(masses[k + 1]))
        .sum::<f64>()
        * 4.0
        * l2;
    let rhs = rhs_within + rhs_adjacent;
    let floor = 1e-13 * lhs_mag / mu_d;
    Ok(BlockCheck { lhs, rhs_within, rhs_adjacent, holds: lhs <= rhs * (1.0 + 1e-12) + floor })
}

/// Unimodal weights with the mode drawn uniformly and log-uniform magnitudes
/// in [1e-3, 1e3], covering extreme mass ratios.
pub fn random_unimodal(rng: &mut ChaCha12Rng, len: usize) -> UnimodalWeights {
    let mut vals: Vec<f64> = (0..len).map(|_| 10f64.powf(rng.random_range(-3.0..3.0))).collect();
    vals.sort_by(f64::total_cmp);
    let mode = rng.random_range(0..len);
    let mut left: Vec<f64> = Vec::with_capacity(mode + 1);
    let mut right: Vec<f64> = Vec::with_capacity(len - mode);
    let peak = vals.pop().unwrap();
    // alternate the remaining values between the two slopes, largest first
    let mut to_left = true;
    while let Some(v) = vals.pop() {
        if (to_left && left.len() < mode) || right.len() >= len - mode - 1 {
            left.push(v);
        } else {
            right.push(v);
        }
        to_left = !to_left;
    }
    left.reverse();
    let mut weights = left;
    weights.push(peak);
    weights.extend(right);
    UnimodalWeights::new(weights).expect("construction is unimodal")
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub instances: usize,
    pub violations: usize,
    /// max over instances of lhs/rhs (must stay ≤ 1)
    pub worst_ratio: f64,
    pub worst_case: String,
}

/// Randomized suite for the chain inequality.
pub fn run_chain_suite(instances: usize, seed: u64) -> SuiteReport {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut violations = 0;
    let mut worst_ratio: f64 = 0.0;
    let mut worst_case = String::new();
    for i in 0..instances {
        let l = rng.random_range(2..=64);
        let mu = random_unimodal(&mut rng, l);
        let raw: Vec<f64> = (0..l).map(|_| rng.random_range(-1.0..1.0)).collect();
        let f = center_against(&mu, &raw);
        let check = check_partition0(&mu, &f).expect("centered by construction");
        if !check.holds {
            violations += 1;
        }
        let ratio = if check.rhs > 0.0 { check.lhs / check.rhs } else { 0.0 };
        if ratio > worst_ratio {
            worst_ratio = ratio;
            worst_case = format!("instance {i}: L={l}, lhs={:e}, rhs={:e}", check.lhs, check.rhs);
        }
    }
    SuiteReport { instances, violations, worst_ratio, worst_case }
}

/// Randomized suite for the block decomposition.
pub fn run_block_suite(instances: usize, seed: u64) -> SuiteReport {
    let mut rng = ChaCha12Rng::seed_from_u64(seed.wrapping_add(1));
    let mut violations = 0;
    let mut worst_ratio: f64 = 0.0;
    let mut worst_case = String::new();
    for i in 0..instances {
        let l = rng.random_range(1..=8);
        let mu = random_unimodal(&mut rng, l);
        let blocks: Vec<Vec<f64>> = mu
            .weights()
            .iter()
            .map(|&mass| {
                let pts = rng.random_range(1..=20);
                let mut raw: Vec<f64> = (0..pts).map(|_| rng.random_range(0.05..1.0)).collect();
                let s: f64 = raw.iter().sum();
                raw.iter_mut().for_each(|v| *v *= mass / s);
                raw
            })
            .collect();
        let space = PartitionedSpace::new(blocks).expect("unimodal by construction");
        let f: Vec<Vec<f64>> = space
            .blocks
            .iter()
            .map(|b| (0..b.len()).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let check = check_partition(&space, &f).expect("shapes match");
        if !check.holds {
            violations += 1;
        }
        let rhs = check.rhs_within + check.rhs_adjacent;
        let ratio = if rhs > 0.0 { check.lhs / rhs } else { 0.0 };
        if ratio > worst_ratio {
            worst_ratio = ratio;
            worst_case = format!("instance {i}: L={l}, lhs={:e}, rhs={rhs:e}", check.lhs);
        }
    }
    SuiteReport { instances, violations, worst_ratio, worst_case }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn chain_hand_example() {
        // L=2, μ=(1,1), f=(1,−1): lhs=2, rhs=4·1·4=16
        let mu = UnimodalWeights::new(vec![1.0, 1.0]).unwrap();
        let c = check_partition0(&mu, &[1.0, -1.0]).unwrap();
        assert_relative_eq!(c.lhs, 2.0);
        assert_relative_eq!(c.rhs, 16.0);
        assert!(c.holds);
        // f ≡ 0 is 0 ≤ 0
        let c0 = check_partition0(&mu, &[0.0, 0.0]).unwrap();
        assert_eq!(c0.lhs, 0.0);
        assert!(c0.holds);
    }

    #[test]
    fn chain_rejects_uncentered_and_bad_weights() {
        let mu = UnimodalWeights::new(vec![1.0, 2.0, 1.0]).unwrap();
        assert!(check_partition0(&mu, &[1.0, 1.0, 1.0]).is_err());
        assert!(UnimodalWeights::new(vec![1.0, 0.5, 1.0]).is_err());
        assert!(UnimodalWeights::new(vec![1.0, -1.0]).is_err());
    }

    #[test]
    fn centering_examples() {
        let mu = UnimodalWeights::new(vec![1.0, 1.0]).unwrap();
        let f = center_against(&mu, &[1.0, 0.0]);
        assert_relative_eq!(f[0], 0.5);
        assert_relative_eq!(f[1], -0.5);
        // idempotent and difference-preserving
        let f2 = center_against(&mu, &f);
        assert_relative_eq!(f[0], f2[0]);
        assert_relative_eq!(f[0] - f[1], 1.0);
    }

    #[test]
    fn block_single_block_case() {
        // L = 1: lhs = (1/μ(D)) ∬ ≤ 2 (1/μ₁) ∬, a factor-2 slack
        let space = PartitionedSpace::new(vec![vec![0.5, 0.25, 0.25]]).unwrap();
        let f = vec![vec![1.0, -1.0, 0.5]];
        let c = check_partition(&space, &f).unwrap();
        assert_relative_eq!(c.rhs_within, 2.0 * c.lhs, max_relative = 1e-12);
        assert_eq!(c.rhs_adjacent, 0.0);
        assert!(c.holds);
    }

    #[test]
    fn block_two_constant_blocks() {
        // constant f per block: lhs = 2 μ₁μ₂ Δ² / μ(D), adjacent term
        // = 16 μ₁μ₂ Δ² / (μ₁∨μ₂)
        let space = PartitionedSpace::new(vec![vec![0.4, 0.6], vec![0.3]]).unwrap();
        let f = vec![vec![2.0, 2.0], vec![-1.0]];
        let c = check_partition(&space, &f).unwrap();
        let (m1, m2) = (1.0, 0.3);
        let d2 = 9.0;
        assert_relative_eq!(c.lhs, 2.0 * m1 * m2 * d2 / (m1 + m2), max_relative = 1e-12);
        assert_relative_eq!(c.rhs_within, 0.0);
        assert_relative_eq!(c.rhs_adjacent, 16.0 * m1 * m2 * d2 / m1, max_relative = 1e-12);
        assert!(c.holds);
    }

    #[test]
    fn random_suites_have_no_violations() {
        let chain = run_chain_suite(2000, 7);
        assert_eq!(chain.violations, 0, "worst: {}", chain.worst_case);
        assert!(chain.worst_ratio <= 1.0);
        let block = run_block_suite(2000, 7);
        assert_eq!(block.violations, 0, "worst: {}", block.worst_case);
        assert!(block.worst_ratio <= 1.0);
    }

    #[test]
    fn suites_are_deterministic() {
        let a = run_chain_suite(500, 3);
        let b = run_chain_suite(500, 3);
        assert_eq!(a.worst_ratio, b.worst_ratio);
        assert_eq!(a.worst_case, b.worst_case);
    }

    proptest! {
        #[test]
        fn chain_inequality_proptest(
            raw in proptest::collection::vec(-100f64..100.0, 2..32),
            logs in proptest::collection::vec(-3f64..3.0, 2..32),
            mode_frac in 0f64..1.0,
        ) {
            let l = raw.len().min(logs.len());
            let mut vals: Vec<f64> = logs[..l].iter().map(|e| 10f64.powf(*e)).collect();
            vals.sort_by(f64::total_cmp);
            let mode = ((l - 1) as f64 * mode_frac) as usize;
            // place the sorted values along a tent shape peaked at the mode
            let mut w = vec![0.0; l];
            let mut order: Vec<usize> = (0..=mode).collect();
            let mut right: Vec<usize> = (mode + 1..l).rev().collect();
            order.append(&mut right);
            for (rank, &pos) in order.iter().enumerate() {
                w[pos] = vals[rank];
            }
            if let Ok(mu) = UnimodalWeights::new(w) {
                let f = center_against(&mu, &raw[..l]);
                let c = check_partition0(&mu, &f).unwrap();
                prop_assert!(c.holds, "lhs={} rhs={}", c.lhs, c.rhs);
            }
        }
    }
}
