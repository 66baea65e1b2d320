//! Richardson zero-noise extrapolation: tilted Chebyshev node placement,
//! Lagrange weights at x = 0, variance-optimal shot allocation, mitigated
//! estimates, and the hyperparameter objective.

use crate::error::{Error, Result};
use crate::response::{sample_response, ResponseFn};
use crate::source::ResponseSource;
use rand::Rng;

/// Tilted Chebyshev noise multipliers
/// x_j = 1 + [sin²(jπ/(2(m+1))) / sin²(π/(2(m+1)))]·(x₁−1), j = 0..m.
///
/// The node formula is indexed by the extrapolation order m (m+1 nodes);
/// j = 0 gives the base level 1 and j = 1 gives x₁ exactly.
pub fn tilted_chebyshev_nodes(order: usize, x1: f64) -> Vec<f64> {
    assert!(order >= 1 && x1 > 1.0);
    let denom = (std::f64::consts::PI / (2.0 * (order as f64 + 1.0))).sin().powi(2);
    (0..=order)
        .map(|j| {
            let num = (j as f64 * std::f64::consts::PI / (2.0 * (order as f64 + 1.0)))
                .sin()
                .powi(2);
            1.0 + num / denom * (x1 - 1.0)
        })
        .collect()
}

/// Lagrange basis polynomial coefficients at x = 0:
/// γ_j = Π_{l≠j} (0 − x_l)/(x_j − x_l).
pub fn lagrange_weights_at_zero(nodes: &[f64]) -> Result<Vec<f64>> {
    for (i, &a) in nodes.iter().enumerate() {
        for &b in nodes.iter().skip(i + 1) {
            if (a - b).abs() < 1e-12 {
                return Err(Error::DuplicateNodes { a, b });
            }
        }
    }
    Ok(nodes
        .iter()
        .enumerate()
        .map(|(j, &xj)| {
            nodes
                .iter()
                .enumerate()
                .filter(|&(l, _)| l != j)
                .map(|(_, &xl)| -xl / (xj - xl))
                .product()
        })
        .collect())
}

/// Extrapolation order m, node multipliers, Lagrange weights, and the
/// sampling overhead Λ = Σ|γ_j|.
#[derive(Debug, Clone)]
pub struct ZneConfig {
    order: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    overhead: f64,
}

impl ZneConfig {
    pub fn tilted_chebyshev(order: usize, x1: f64) -> Result<Self> {
        Self::from_nodes(tilted_chebyshev_nodes(order, x1))
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        let weights = lagrange_weights_at_zero(&nodes)?;
        let overhead = weights.iter().map(|w| w.abs()).sum();
        Ok(Self {
            order: nodes.len() - 1,
            nodes,
            weights,
            overhead,
        })
    }

    /// The hyperparameter setting used throughout: x₁ = 1.75, m = 4.
    pub fn recommended() -> Self {
        Self::tilted_chebyshev(4, 1.75).expect("valid default")
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn overhead(&self) -> f64 {
        self.overhead
    }

    pub fn max_weight_abs(&self) -> f64 {
        self.weights.iter().fold(0.0, |acc, w| acc.max(w.abs()))
    }
}

impl Default for ZneConfig {
    fn default() -> Self {
        Self::recommended()
    }
}

/// Integer shot counts per noise node, Σ N_j = N with every N_j ≥ 1.
#[derive(Debug, Clone)]
pub struct ShotAllocation {
    per_node: Vec<u64>,
    total: u64,
}

impl ShotAllocation {
    pub fn per_node(&self) -> &[u64] {
        &self.per_node
    }

    pub fn total(&self) -> u64 {
        self.total
    }
}

/// Round the variance-optimal real allocation N_j = N·|γ_j|/Λ to integers
/// by largest remainder, then enforce the one-shot floor per node.
pub fn allocate_shots(total: u64, weights: &[f64]) -> Result<ShotAllocation> {
    let count = weights.len();
    if total < count as u64 {
        return Err(Error::BudgetTooSmall {
            given: total,
            need: count as u64,
        });
    }
    let overhead: f64 = weights.iter().map(|w| w.abs()).sum();
    let targets: Vec<f64> = weights
        .iter()
        .map(|w| total as f64 * w.abs() / overhead)
        .collect();
    let mut shots: Vec<u64> = targets.iter().map(|t| t.floor() as u64).collect();
    let assigned: u64 = shots.iter().sum();
    let mut order: Vec<usize> = (0..count).collect();
    order.sort_by(|&a, &b| {
        let fa = targets[a] - targets[a].floor();
        let fb = targets[b] - targets[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    for &idx in order.iter().take((total - assigned) as usize) {
        shots[idx] += 1;
    }
    // one-shot floor, funded by the most loaded node
    for j in 0..count {
        while shots[j] == 0 {
            let donor = (0..count).max_by_key(|&k| shots[k]).unwrap();
            shots[donor] -= 1;
            shots[j] += 1;
        }
    }
    Ok(ShotAllocation {
        per_node: shots,
        total,
    })
}

/// Zero-noise estimate Σ_j γ_j · R̄_{λ_j}. Not clamped to [−1, 1]; clamping
/// is deferred to inversion so the extrapolation itself stays unbiased.
pub fn mitigated_estimate(node_estimates: &[f64], weights: &[f64]) -> Result<f64> {
    if node_estimates.len() != weights.len() {
        return Err(Error::ArityMismatch {
            expected: weights.len(),
            got: node_estimates.len(),
        });
    }
    Ok(node_estimates
        .iter()
        .zip(weights)
        .map(|(r, w)| r * w)
        .sum())
}

/// Exact node responses R_{x_j·λ}(θ) of a boostable source.
pub fn exact_node_values(source: &ResponseSource, theta: f64, config: &ZneConfig) -> Result<Vec<f64>> {
    config
        .nodes()
        .iter()
        .map(|&x| Ok(source.boosted(x)?.eval(theta)))
        .collect()
}

/// Exact (infinite-shot) mitigated response R_M(θ) = Σ_j γ_j R_{λ_j}(θ).
pub fn exact_mitigated_response(
    source: &ResponseSource,
    theta: f64,
    config: &ZneConfig,
) -> Result<f64> {
    mitigated_estimate(&exact_node_values(source, theta, config)?, config.weights())
}

/// One shot-budgeted ZNE measurement: allocate N across the nodes, sample
/// each boosted response, and extrapolate to zero noise.
pub fn zne_measure<G: Rng + ?Sized>(
    source: &ResponseSource,
    theta: f64,
    total_shots: u64,
    config: &ZneConfig,
    rng: &mut G,
) -> Result<f64> {
    let allocation = allocate_shots(total_shots, config.weights())?;
    let mut estimates = Vec::with_capacity(config.nodes().len());
    for (&x, &shots) in config.nodes().iter().zip(allocation.per_node()) {
        let r_true = source.boosted(x)?.eval(theta);
        estimates.push(sample_response(r_true, shots, rng)?.value);
    }
    mitigated_estimate(&estimates, config.weights())
}

/// Predicted estimator variance Σ_j γ_j²·Δ²R_{λ_j}/N_j for a given
/// allocation and per-node response variances.
pub fn predicted_mitigated_variance(
    weights: &[f64],
    allocation: &ShotAllocation,
    node_variances: &[f64],
) -> f64 {
    weights
        .iter()
        .zip(allocation.per_node())
        .zip(node_variances)
        .map(|((w, &n), v)| w * w * v / n as f64)
        .sum()
}

/// Monte Carlo estimate of the mean integrated squared error
/// E[∫₀^{2π} |R(θ) − R̄_M(θ, N)|² dθ] against the noiseless fringe
/// cos(nθ), with the integral taken by the trapezoid rule on a uniform
/// periodic grid.
pub fn hyperparameter_objective<G: Rng + ?Sized>(
    source: &ResponseSource,
    config: &ZneConfig,
    total_shots: u64,
    trials: usize,
    grid_size: usize,
    rng: &mut G,
) -> Result<f64> {
    assert!(trials >= 1 && grid_size >= 2);
    let n = source.degree() as f64;
    let width = 2.0 * std::f64::consts::PI / grid_size as f64;
    let mut acc = 0.0;
    for _ in 0..trials {
        let mut integral = 0.0;
        for i in 0..grid_size {
            let theta = width * i as f64;
            let mitigated = zne_measure(source, theta, total_shots, config, rng)?;
            let ideal = (n * theta).cos();
            integral += (ideal - mitigated).powi(2) * width;
        }
        acc += integral;
    }
    Ok(acc / trials as f64)
}
