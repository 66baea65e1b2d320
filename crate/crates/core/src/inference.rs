//! Response-function learning: trigonometric interpolation from 2n+1
//! uniformly spaced phase observations, plus the error bounds and shot
//! requirements that govern the inference protocols.

use crate::error::{Error, Result};
use crate::response::{sample_response, TrigPolynomial};
use crate::source::ResponseSource;
use crate::zne::{zne_measure, ZneConfig};
use rand::Rng;
use std::f64::consts::PI;

/// The 2n+1 inference node phases θ_k = 2πk/(2n+1), k = 0..2n.
pub fn inference_nodes(n: usize) -> Vec<f64> {
    let count = 2 * n + 1;
    (0..count).map(|k| 2.0 * PI * k as f64 / count as f64).collect()
}

/// log factor used by every inference bound: max(ln n, 1). The floor keeps
/// the bounds meaningful at n ≤ 2, where ln n degenerates.
pub fn logfactor(n: usize) -> f64 {
    (n as f64).ln().max(1.0)
}

/// Observations at the uniform inference nodes.
#[derive(Debug, Clone)]
pub struct InferenceDataset {
    nodes: Vec<f64>,
    values: Vec<f64>,
    shots_per_node: Vec<u64>,
}

impl InferenceDataset {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>, shots_per_node: Vec<u64>) -> Result<Self> {
        let count = nodes.len();
        if values.len() != count || shots_per_node.len() != count || count.is_multiple_of(2) || count < 3 {
            return Err(Error::BadNodeCount {
                expected: nodes.len(),
                got: values.len(),
            });
        }
        let spacing = 2.0 * PI / count as f64;
        for pair in nodes.windows(2) {
            if ((pair[1] - pair[0]) - spacing).abs() > 1e-12 {
                return Err(Error::BadNodeCount {
                    expected: count,
                    got: count,
                });
            }
        }
        Ok(Self {
            nodes,
            values,
            shots_per_node,
        })
    }

    pub fn degree(&self) -> usize {
        (self.nodes.len() - 1) / 2
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn shots_per_node(&self) -> &[u64] {
        &self.shots_per_node
    }

    pub fn total_shots(&self) -> u64 {
        self.shots_per_node.iter().sum()
    }
}

/// Gaussian elimination with partial pivoting on a dense system; the
/// largest design matrix at desk scale is 41×41, so clarity wins over
/// anything fancier.
#[allow(clippy::needless_range_loop)]
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let dim = b.len();
    for col in 0..dim {
        let pivot_row = (col..dim)
            .max_by(|&r, &s| a[r][col].abs().partial_cmp(&a[s][col].abs()).unwrap())
            .unwrap();
        if a[pivot_row][col].abs() < 1e-12 {
            return Err(Error::SingularSystem);
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in col + 1..dim {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..dim {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; dim];
    for row in (0..dim).rev() {
        let mut acc = b[row];
        for k in row + 1..dim {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Ok(x)
}

/// Solve the (2n+1)×(2n+1) trigonometric design system for the unique
/// degree-n interpolant through the dataset.
pub fn fit_trig_polynomial(dataset: &InferenceDataset) -> Result<TrigPolynomial> {
    let n = dataset.degree();
    let dim = 2 * n + 1;
    let mut matrix = Vec::with_capacity(dim);
    for &theta in dataset.nodes() {
        let mut row = Vec::with_capacity(dim);
        row.push(1.0);
        for s in 1..=n {
            row.push((s as f64 * theta).cos());
            row.push((s as f64 * theta).sin());
        }
        matrix.push(row);
    }
    let solution = solve_dense(matrix, dataset.values().to_vec())?;
    let constant = solution[0];
    let mut cos_coeffs = vec![0.0; n];
    let mut sin_coeffs = vec![0.0; n];
    for s in 1..=n {
        cos_coeffs[s - 1] = solution[2 * s - 1];
        sin_coeffs[s - 1] = solution[2 * s];
    }
    Ok(TrigPolynomial::new(cos_coeffs, sin_coeffs, constant))
}

/// Equal per-node split of the inference budget, remainder to the
/// lowest-index nodes.
pub fn split_node_budget(total: u64, node_count: usize) -> Vec<u64> {
    let base = total / node_count as u64;
    let remainder = (total % node_count as u64) as usize;
    (0..node_count)
        .map(|k| base + (k < remainder) as u64)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Plain,
    Mitigated,
}

/// A learned response function R̃ with its inference budget.
#[derive(Debug, Clone)]
pub struct InferredResponse {
    pub poly: TrigPolynomial,
    pub provenance: Provenance,
    pub inference_budget: u64,
}

/// Learn the response of `source` from shot-limited observations at the
/// 2n+1 uniform nodes. With `mitigated` set, each node observation is a
/// ZNE measurement and the fit approximates R_M rather than R_λ.
pub fn infer_response<G: Rng + ?Sized>(
    source: &ResponseSource,
    n: usize,
    inference_budget: u64,
    rng: &mut G,
    mitigated: Option<&ZneConfig>,
) -> Result<InferredResponse> {
    use crate::response::ResponseFn;
    let nodes = inference_nodes(n);
    let need = match mitigated {
        Some(config) => nodes.len() as u64 * (config.order() as u64 + 1),
        None => nodes.len() as u64,
    };
    if inference_budget < need {
        return Err(Error::BudgetTooSmall {
            given: inference_budget,
            need,
        });
    }
    let budgets = split_node_budget(inference_budget, nodes.len());
    let mut values = Vec::with_capacity(nodes.len());
    for (&theta, &shots) in nodes.iter().zip(&budgets) {
        let observed = match mitigated {
            Some(config) => zne_measure(source, theta, shots, config, rng)?,
            None => sample_response(source.eval(theta), shots, rng)?.value,
        };
        values.push(observed);
    }
    let dataset = InferenceDataset::new(nodes, values, budgets)?;
    Ok(InferredResponse {
        poly: fit_trig_polynomial(&dataset)?,
        provenance: if mitigated.is_some() {
            Provenance::Mitigated
        } else {
            Provenance::Plain
        },
        inference_budget,
    })
}

/// Worst-case inference error 5·ε·logfactor(n) given a max node sampling
/// error ε.
pub fn inference_error_bound(epsilon: f64, n: usize) -> f64 {
    5.0 * epsilon * logfactor(n)
}

/// Shots per node guaranteeing inference error ≤ δ with failure
/// probability a: ⌈50·log²(n)·ln((4n+2)/a)/δ²⌉.
pub fn shots_per_node_plain(n: usize, delta: f64, a: f64) -> u64 {
    assert!(delta > 0.0 && a > 0.0 && a < 1.0);
    let lf = logfactor(n);
    (50.0 * lf * lf * ((4.0 * n as f64 + 2.0) / a).ln() / (delta * delta)).ceil() as u64
}

/// Covering-argument Hoeffding bound for a single parameter (d = 1):
/// N_k ≥ (4(d+2)/ε²)·ln(2⁸·L_λ²·D²/(β·ε²)).
pub fn shots_per_node_hoeffding_general(
    epsilon: f64,
    beta: f64,
    lipschitz: f64,
    diameter: f64,
) -> u64 {
    assert!(epsilon > 0.0 && beta > 0.0 && lipschitz > 0.0 && diameter > 0.0);
    let d = 1.0;
    let log_arg = 256.0 * lipschitz * lipschitz * diameter * diameter / (beta * epsilon * epsilon);
    (4.0 * (d + 2.0) / (epsilon * epsilon) * log_arg.ln()).ceil() as u64
}

/// Mitigated-inference shot requirement in terms of the max mitigated
/// sampling error χ: 2Λ³·Δ²R·ln((4n+2)/α)/(χ²·max_j|γ_j|).
pub fn shots_per_node_mitigated_chi(
    n: usize,
    chi: f64,
    alpha: f64,
    overhead: f64,
    max_weight: f64,
    response_variance_bound: f64,
) -> u64 {
    assert!(chi > 0.0 && alpha > 0.0 && alpha < 1.0);
    let log_term = ((4.0 * n as f64 + 2.0) / alpha).ln();
    (2.0 * overhead.powi(3) * response_variance_bound * log_term / (chi * chi * max_weight)).ceil()
        as u64
}

/// Mitigated-inference shot requirement in terms of the inference error δ:
/// 50Λ³·Δ²R·log²(n)·ln((4n+2)/α)/(max_j|γ_j|·δ²).
pub fn shots_per_node_mitigated_delta(
    n: usize,
    delta: f64,
    alpha: f64,
    overhead: f64,
    max_weight: f64,
    response_variance_bound: f64,
) -> u64 {
    assert!(delta > 0.0 && alpha > 0.0 && alpha < 1.0);
    let lf = logfactor(n);
    let log_term = ((4.0 * n as f64 + 2.0) / alpha).ln();
    (50.0 * overhead.powi(3) * response_variance_bound * lf * lf * log_term
        / (max_weight * delta * delta))
        .ceil() as u64
}
