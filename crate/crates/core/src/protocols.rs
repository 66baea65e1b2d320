//! The six phase-estimation protocols, the classical-prior/bias model,
//! single-trial execution, and Monte Carlo CMSE/BMSE estimation.
//!
//! Each trial measures the true system at the target phase, builds the
//! protocol's inversion function (exact, noiseless, or freshly inferred),
//! and inverts on the monotone branch around the prior mean. Trials draw
//! from counter-derived RNG streams, so results are identical for any
//! worker count or execution order.

use crate::error::{Error, Result};
use crate::inference::infer_response;
use crate::noise::NoiseSpec;
use crate::response::{
    find_branch, invert_on_branch, sample_response, InvertibleBranch, ResponseFn, TrigPolynomial,
};
use crate::seeding::child_rng;
use crate::source::ResponseSource;
use crate::zne::{zne_measure, ZneConfig};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

/// Classical-prior parameters defining the Θ* distribution
/// N(α_prior·T + θ_bias + ε_B, 1/(Nn)).
#[derive(Debug, Clone, Copy)]
pub struct PhasePrior {
    /// Prior field estimate (field units), assumed to saturate the SQL.
    pub alpha_prior: f64,
    /// Interaction time T.
    pub interaction_time: f64,
    /// Deliberately imprinted bias phase.
    pub theta_bias: f64,
    /// Bias-application resolution in bits; ε_B = 2π/2^B.
    pub bits: u32,
}

impl PhasePrior {
    pub fn new(alpha_prior: f64, interaction_time: f64, bits: u32) -> Self {
        Self {
            alpha_prior,
            interaction_time,
            theta_bias: 0.0,
            bits,
        }
    }

    pub fn with_bias(mut self, theta_bias: f64) -> Self {
        self.theta_bias = theta_bias;
        self
    }

    /// Rounding offset ε_B = 2π·2^{−B}.
    pub fn epsilon_b(&self) -> f64 {
        2.0 * std::f64::consts::PI / (1u64 << self.bits) as f64
    }

    /// Mean of the Θ* distribution, α_prior·T + θ_bias + ε_B.
    pub fn mean(&self) -> f64 {
        self.alpha_prior * self.interaction_time + self.theta_bias + self.epsilon_b()
    }
}

/// Draw a target phase from the prior: the variance 1/(Nn) models an
/// optimal N-shot classical initialization at the SQL.
pub fn sample_target_phase<G: Rng + ?Sized>(
    prior: &PhasePrior,
    n: usize,
    total_shots: u64,
    rng: &mut G,
) -> f64 {
    assert!(n >= 1 && total_shots >= 1);
    let sigma = 1.0 / ((total_shots as f64 * n as f64).sqrt());
    Normal::new(prior.mean(), sigma).unwrap().sample(rng)
}

/// Pick θ_bias so the prior-mean target phase lands on the point of
/// maximum response gradient, quantized to the ε_B grid.
///
/// The argmax of |∂R| is located by a grid scan at 1024·n points per
/// period followed by golden-section refinement to 1e-10 radians.
pub fn choose_bias<R: ResponseFn + ?Sized>(source: &R, prior: &PhasePrior) -> f64 {
    let steps = 1024 * source.degree().max(1);
    let width = 2.0 * std::f64::consts::PI / steps as f64;
    let mut best_idx = 0;
    let mut best = -1.0;
    for i in 0..steps {
        let slope = source.derivative(width * i as f64).abs();
        if slope > best {
            best = slope;
            best_idx = i;
        }
    }
    let lo = width * (best_idx as f64 - 1.0);
    let hi = width * (best_idx as f64 + 1.0);
    let theta_opt = golden_section_max(|t| source.derivative(t).abs(), lo, hi, 1e-10);
    let unbiased_mean = prior.alpha_prior * prior.interaction_time + prior.epsilon_b();
    let eps = prior.epsilon_b();
    ((theta_opt - unbiased_mean) / eps).round() * eps
}

fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = 0.5 * (5.0f64.sqrt() - 1.0);
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > tol {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProtocolKind {
    /// Invert the exactly known noisy response R_λ.
    NoiseAware,
    /// Invert the noiseless response R despite the noise.
    Naive,
    /// ZNE-mitigated measurement inverted through the noiseless response.
    Zne,
    /// Invert a freshly inferred R̃_λ; budget split N = N_I + N_E.
    Inference,
    /// Inference as an offline step: N_E = N, N_I = C_pre·n·N.
    PrecharacterizedInference,
    /// Mitigated inference R̃_M inverted on a mitigated measurement.
    ZneInference,
}

impl ProtocolKind {
    pub fn label(&self) -> &'static str {
        match self {
            ProtocolKind::NoiseAware => "noise-aware",
            ProtocolKind::Naive => "naive",
            ProtocolKind::Zne => "zne",
            ProtocolKind::Inference => "inference",
            ProtocolKind::PrecharacterizedInference => "precharacterized-inference",
            ProtocolKind::ZneInference => "zne-inference",
        }
    }

    pub fn uses_zne(&self) -> bool {
        matches!(self, ProtocolKind::Zne | ProtocolKind::ZneInference)
    }

    pub fn uses_inference(&self) -> bool {
        matches!(
            self,
            ProtocolKind::Inference
                | ProtocolKind::PrecharacterizedInference
                | ProtocolKind::ZneInference
        )
    }
}

#[derive(Debug, Clone)]
pub struct ProtocolSpec {
    pub kind: ProtocolKind,
    /// Total shot budget N for one estimation run.
    pub total_shots: u64,
    /// Fraction of N spent on inference for the split kinds.
    pub inference_fraction: f64,
    /// Pre-characterization overhead C_pre (N_I = C_pre·n·N).
    pub c_pre: f64,
    pub zne: ZneConfig,
    /// Reuse one inference realization across all trials instead of
    /// re-sampling it per trial.
    pub freeze_inference: bool,
}

impl ProtocolSpec {
    pub fn new(kind: ProtocolKind, total_shots: u64) -> Self {
        Self {
            kind,
            total_shots,
            inference_fraction: 0.5,
            c_pre: 1.0,
            zne: ZneConfig::recommended(),
            freeze_inference: false,
        }
    }

    pub fn with_zne(mut self, zne: ZneConfig) -> Self {
        self.zne = zne;
        self
    }

    pub fn with_inference_fraction(mut self, fraction: f64) -> Self {
        assert!(fraction > 0.0 && fraction < 1.0);
        self.inference_fraction = fraction;
        self
    }

    pub fn with_c_pre(mut self, c_pre: f64) -> Self {
        assert!(c_pre > 0.0);
        self.c_pre = c_pre;
        self
    }

    pub fn with_frozen_inference(mut self, freeze: bool) -> Self {
        self.freeze_inference = freeze;
        self
    }

    /// (N_I, N_E) for this protocol on an n-qubit system.
    pub fn budgets(&self, n: usize) -> (u64, u64) {
        match self.kind {
            ProtocolKind::Inference | ProtocolKind::ZneInference => {
                let n_i = (self.total_shots as f64 * self.inference_fraction).round() as u64;
                (n_i, self.total_shots - n_i)
            }
            ProtocolKind::PrecharacterizedInference => {
                let n_i = (self.c_pre * n as f64 * self.total_shots as f64).round() as u64;
                (n_i, self.total_shots)
            }
            _ => (0, self.total_shots),
        }
    }
}

/// The sensor under test: system size plus its noise model.
#[derive(Debug, Clone)]
pub struct SensingSystem {
    pub n: usize,
    pub noise: NoiseSpec,
}

impl SensingSystem {
    pub fn new(n: usize, noise: NoiseSpec) -> Self {
        Self { n, noise }
    }

    /// Exact response oracle for the true noisy system.
    pub fn truth_source(&self) -> Result<ResponseSource> {
        ResponseSource::from_noise(self.n, self.noise.clone())
    }

    /// The noiseless fringe cos(nθ) that naive and ZNE protocols invert.
    pub fn noiseless_source(&self) -> Result<ResponseSource> {
        ResponseSource::analytic(self.n, self.noise.to_noiseless())
    }

    /// The response the protocol's bias-selection step would use: the
    /// noiseless fringe for the naive and plain-ZNE protocols, the exact
    /// noisy response otherwise.
    pub fn bias_source(&self, kind: ProtocolKind) -> Result<ResponseSource> {
        match kind {
            ProtocolKind::Naive | ProtocolKind::Zne => self.noiseless_source(),
            _ => self.truth_source(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TrialResult {
    pub theta_star: f64,
    pub theta_hat: f64,
    pub squared_error: f64,
    pub alpha_hat: f64,
}

/// Field estimate recovered from a phase estimate by undoing the bias and
/// rounding offset: α̂ = (θ̂ − θ_bias − ε_B)/T.
pub fn estimate_alpha(theta_hat: f64, prior: &PhasePrior) -> f64 {
    (theta_hat - prior.theta_bias - prior.epsilon_b()) / prior.interaction_time
}

#[derive(Debug, Clone)]
enum Inversion {
    Source(ResponseSource),
    Poly(TrigPolynomial),
}

impl Inversion {
    fn response(&self) -> &dyn ResponseFn {
        match self {
            Inversion::Source(s) => s,
            Inversion::Poly(p) => p,
        }
    }
}

/// Per-experiment state shared across trials: the truth oracle and, for
/// the fixed-inversion kinds (or frozen inference), the prebuilt inversion
/// function and branch.
pub struct ProtocolRunner {
    spec: ProtocolSpec,
    prior: PhasePrior,
    n: usize,
    truth: ResponseSource,
    inference_budget: u64,
    estimation_budget: u64,
    fixed: Option<(Inversion, InvertibleBranch)>,
}

impl ProtocolRunner {
    /// Build a runner; `master_seed` feeds the frozen-inference stream when
    /// that option is set.
    pub fn new(
        spec: ProtocolSpec,
        system: &SensingSystem,
        prior: PhasePrior,
        master_seed: u64,
    ) -> Result<Self> {
        let truth = system.truth_source()?;
        let (inference_budget, estimation_budget) = spec.budgets(system.n);
        if estimation_budget < 1 {
            return Err(Error::BudgetTooSmall {
                given: estimation_budget,
                need: 1,
            });
        }
        let fixed = match spec.kind {
            ProtocolKind::NoiseAware => {
                let inv = Inversion::Source(truth.clone());
                let branch = find_branch(inv.response(), prior.mean())?;
                Some((inv, branch))
            }
            ProtocolKind::Naive | ProtocolKind::Zne => {
                let inv = Inversion::Source(system.noiseless_source()?);
                let branch = find_branch(inv.response(), prior.mean())?;
                Some((inv, branch))
            }
            _ if spec.freeze_inference => {
                // reserved stream index, disjoint from trial indices
                let mut rng = child_rng(master_seed, u64::MAX);
                let mitigated = matches!(spec.kind, ProtocolKind::ZneInference);
                let inferred = infer_response(
                    &truth,
                    system.n,
                    inference_budget,
                    &mut rng,
                    mitigated.then_some(&spec.zne),
                )?;
                let branch = find_branch(&inferred.poly, prior.mean())?;
                Some((Inversion::Poly(inferred.poly), branch))
            }
            _ => None,
        };
        Ok(Self {
            spec,
            prior,
            n: system.n,
            truth,
            inference_budget,
            estimation_budget,
            fixed,
        })
    }

    pub fn spec(&self) -> &ProtocolSpec {
        &self.spec
    }

    pub fn run_trial<G: Rng + ?Sized>(&self, theta_star: f64, rng: &mut G) -> Result<TrialResult> {
        // inference happens physically before estimation, so it draws first
        let fresh = match (&self.fixed, self.spec.kind.uses_inference()) {
            (None, true) => {
                let mitigated = matches!(self.spec.kind, ProtocolKind::ZneInference);
                let inferred = infer_response(
                    &self.truth,
                    self.n,
                    self.inference_budget,
                    rng,
                    mitigated.then_some(&self.spec.zne),
                )?;
                let branch = find_branch(&inferred.poly, self.prior.mean())?;
                Some((Inversion::Poly(inferred.poly), branch))
            }
            _ => None,
        };
        let (inversion, branch) = match (&self.fixed, &fresh) {
            (Some(pair), _) => (&pair.0, &pair.1),
            (None, Some(pair)) => (&pair.0, &pair.1),
            (None, None) => unreachable!("non-inference kinds always have a fixed inversion"),
        };

        let measured = if self.spec.kind.uses_zne() {
            zne_measure(
                &self.truth,
                theta_star,
                self.estimation_budget,
                &self.spec.zne,
                rng,
            )?
        } else {
            sample_response(self.truth.eval(theta_star), self.estimation_budget, rng)?.value
        };

        let theta_hat = invert_on_branch(inversion.response(), branch, measured);
        Ok(TrialResult {
            theta_star,
            theta_hat,
            squared_error: (theta_hat - theta_star) * (theta_hat - theta_star),
            alpha_hat: estimate_alpha(theta_hat, &self.prior),
        })
    }
}

/// One protocol execution at a freshly sampled target phase.
pub fn run_trial<G: Rng + ?Sized>(
    spec: &ProtocolSpec,
    system: &SensingSystem,
    prior: &PhasePrior,
    theta_star: f64,
    rng: &mut G,
) -> Result<TrialResult> {
    ProtocolRunner::new(spec.clone(), system, *prior, 0)?.run_trial(theta_star, rng)
}

/// Conditional bias²/variance split at a fixed target phase.
#[derive(Debug, Clone, Copy)]
pub struct ConditionalDecomposition {
    pub bias_sq: f64,
    pub variance: f64,
    /// Identically bias² + variance.
    pub cmse: f64,
}

/// Monte Carlo error summary over trials.
#[derive(Debug, Clone, Copy)]
pub struct ErrorSummary {
    pub bmse: f64,
    pub std_error: f64,
    pub trials: u64,
    pub conditional: Option<ConditionalDecomposition>,
}

fn neumaier_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut compensation = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            compensation += (sum - t) + v;
        } else {
            compensation += (v - t) + sum;
        }
        sum = t;
    }
    sum + compensation
}

fn run_trials(
    spec: &ProtocolSpec,
    system: &SensingSystem,
    prior: &PhasePrior,
    trials: u64,
    master_seed: u64,
    fixed_theta: Option<f64>,
) -> Result<Vec<TrialResult>> {
    let runner = ProtocolRunner::new(spec.clone(), system, *prior, master_seed)?;
    let total_shots = spec.total_shots;
    let n = system.n;
    (0..trials)
        .into_par_iter()
        .map(|index| {
            let mut rng = child_rng(master_seed, index);
            let theta_star = match fixed_theta {
                Some(theta) => theta,
                None => sample_target_phase(prior, n, total_shots, &mut rng),
            };
            runner.run_trial(theta_star, &mut rng)
        })
        .collect()
}

/// Estimate the BMSE of a protocol by Monte Carlo over the Θ* prior and
/// all shot-noise realizations. Identical (seed, config) inputs give
/// bit-identical output regardless of the rayon thread count.
pub fn monte_carlo_bmse(
    spec: &ProtocolSpec,
    system: &SensingSystem,
    prior: &PhasePrior,
    trials: u64,
    master_seed: u64,
) -> Result<ErrorSummary> {
    assert!(trials >= 1);
    let results = run_trials(spec, system, prior, trials, master_seed, None)?;
    let mean = neumaier_sum(results.iter().map(|r| r.squared_error)) / trials as f64;
    let spread = neumaier_sum(results.iter().map(|r| (r.squared_error - mean).powi(2)));
    let std_error = if trials > 1 {
        (spread / ((trials - 1) as f64 * trials as f64)).sqrt()
    } else {
        f64::INFINITY
    };
    Ok(ErrorSummary {
        bmse: mean,
        std_error,
        trials,
        conditional: None,
    })
}

/// BMSE of the field estimate α̂: squared phase errors scale by 1/T².
pub fn alpha_summary(summary: &ErrorSummary, prior: &PhasePrior) -> ErrorSummary {
    let t2 = prior.interaction_time * prior.interaction_time;
    ErrorSummary {
        bmse: summary.bmse / t2,
        std_error: summary.std_error / t2,
        trials: summary.trials,
        conditional: summary.conditional,
    }
}

/// CMSE at a fixed θ*, split into sample bias² and sample variance.
/// The returned CMSE is identically their sum.
pub fn conditional_decomposition(
    spec: &ProtocolSpec,
    system: &SensingSystem,
    prior: &PhasePrior,
    theta_star: f64,
    trials: u64,
    master_seed: u64,
) -> Result<ErrorSummary> {
    assert!(trials >= 2);
    let results = run_trials(spec, system, prior, trials, master_seed, Some(theta_star))?;
    let mean_hat = neumaier_sum(results.iter().map(|r| r.theta_hat)) / trials as f64;
    let bias = mean_hat - theta_star;
    let variance =
        neumaier_sum(results.iter().map(|r| (r.theta_hat - mean_hat).powi(2))) / trials as f64;
    let decomposition = ConditionalDecomposition {
        bias_sq: bias * bias,
        variance,
        cmse: bias * bias + variance,
    };
    let mean_sq = neumaier_sum(results.iter().map(|r| r.squared_error)) / trials as f64;
    let spread = neumaier_sum(results.iter().map(|r| (r.squared_error - mean_sq).powi(2)));
    Ok(ErrorSummary {
        bmse: decomposition.cmse,
        std_error: (spread / ((trials - 1) as f64 * trials as f64)).sqrt(),
        trials,
        conditional: Some(decomposition),
    })
}
