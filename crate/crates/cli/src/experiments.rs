//! Experiment drivers: each config kind maps to one CSV (plus a run
//! manifest). CSV bodies are byte-identical for identical (config, seed)
//! regardless of thread count; anything time-dependent lives only in the
//! manifest.

use crate::config::{ExperimentConfig, ExperimentKind};
use rayon::prelude::*;
use sensebench_core::bounds::{
    bound_inference, bound_naive, bound_noise_aware, bound_zne, bound_zne_inference, hl, sql,
    BoundInputs,
};
use sensebench_core::inference::infer_response;
use sensebench_core::protocols::{
    alpha_summary, choose_bias, conditional_decomposition, monte_carlo_bmse, ErrorSummary,
};
use sensebench_core::response::ResponseFn;
use sensebench_core::seeding::{child_rng, derive_master};
use sensebench_core::zne::{
    exact_mitigated_response, hyperparameter_objective, zne_measure, ZneConfig,
};
use sensebench_core::{
    NoiseSpec, PhasePrior, ProtocolKind, ProtocolSpec, ResponseSource, SensingSystem,
};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub enum RunError {
    Config(String),
    Runtime(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(msg) => write!(f, "config error: {msg}"),
            RunError::Runtime(msg) => write!(f, "runtime error: {msg}"),
        }
    }
}

impl std::error::Error for RunError {}

fn config_err(msg: impl Into<String>) -> RunError {
    RunError::Config(msg.into())
}

fn runtime_err(err: impl std::fmt::Display) -> RunError {
    RunError::Runtime(err.to_string())
}

pub struct RunArtifacts {
    pub csv: PathBuf,
    pub manifest: PathBuf,
}

/// Render a float with the shortest round-trip representation; stable
/// across runs and platforms using IEEE 754 doubles.
fn num(v: f64) -> String {
    format!("{v}")
}

struct Table {
    header: &'static str,
    rows: Vec<String>,
}

impl Table {
    fn new(header: &'static str) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    fn body(&self) -> String {
        let mut out = String::with_capacity(self.rows.len() * 64 + 128);
        out.push_str(self.header);
        out.push('\n');
        for row in &self.rows {
            out.push_str(row);
            out.push('\n');
        }
        out
    }
}

/// Run one configured experiment, writing `<stem>.csv` and
/// `<stem>.manifest.txt` into `out_dir`. `config_dir` anchors relative
/// paths inside the config (e.g. noise-model files).
pub fn run_experiment(
    config: &ExperimentConfig,
    config_text: &str,
    stem: &str,
    config_dir: &Path,
    out_dir: &Path,
) -> Result<RunArtifacts, RunError> {
    config.validate(config_dir).map_err(config_err)?;
    let table = match config.kind {
        ExperimentKind::ResponseScan => response_scan(config, config_dir)?,
        ExperimentKind::ZneDemo => zne_demo(config, config_dir)?,
        ExperimentKind::ZneTune => zne_tune(config, config_dir)?,
        ExperimentKind::InferenceDemo => inference_demo(config, config_dir)?,
        ExperimentKind::CompareProtocols => compare_protocols(config, config_dir)?,
        ExperimentKind::BoundsScan => bounds_scan(config, config_dir)?,
        ExperimentKind::PrecharacterizationSweep => precharacterization_sweep(config, config_dir)?,
        ExperimentKind::InterrogationSweep => interrogation_sweep(config, config_dir)?,
    };

    std::fs::create_dir_all(out_dir).map_err(runtime_err)?;
    let csv_path = out_dir.join(format!("{stem}.csv"));
    std::fs::write(&csv_path, table.body()).map_err(runtime_err)?;

    let manifest_path = out_dir.join(format!("{stem}.manifest.txt"));
    std::fs::write(&manifest_path, manifest(config, config_text, stem)).map_err(runtime_err)?;
    Ok(RunArtifacts {
        csv: csv_path,
        manifest: manifest_path,
    })
}

fn manifest(config: &ExperimentConfig, config_text: &str, stem: &str) -> String {
    let unix_seconds = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut out = String::new();
    writeln!(out, "version = \"sensebench {}\"", env!("CARGO_PKG_VERSION")).unwrap();
    writeln!(out, "experiment = \"{}\"", config.kind.label()).unwrap();
    writeln!(out, "config-file = \"{stem}\"").unwrap();
    writeln!(out, "seed = {}", config.seed).unwrap();
    writeln!(out, "trials = {}", config.trials).unwrap();
    writeln!(out, "threads = {}", rayon::current_num_threads()).unwrap();
    writeln!(out, "generated-unix-seconds = {unix_seconds}").unwrap();
    writeln!(out, "\n# --- config echo ---").unwrap();
    out.push_str(config_text);
    out
}

fn zne_section(config: &ExperimentConfig) -> Result<ZneConfig, RunError> {
    ZneConfig::tilted_chebyshev(config.zne.order, config.zne.x1).map_err(runtime_err)
}

fn protocol_spec(
    config: &ExperimentConfig,
    kind: ProtocolKind,
    shots: u64,
) -> Result<ProtocolSpec, RunError> {
    let mut spec = ProtocolSpec::new(kind, shots).with_zne(zne_section(config)?);
    if let Some(fraction) = config.budget.inference_fraction {
        spec = spec.with_inference_fraction(fraction);
    }
    if let Some(c_pre) = config.budget.c_pre {
        spec = spec.with_c_pre(c_pre);
    }
    Ok(spec)
}

/// Prior with the bias phase either taken from the config or centered on
/// the max-gradient point of the protocol's bias-selection response.
fn build_prior(
    config: &ExperimentConfig,
    system: &SensingSystem,
    kind: ProtocolKind,
    t: f64,
) -> Result<PhasePrior, RunError> {
    let prior = PhasePrior::new(config.prior.alpha_prior, t, config.prior.bits);
    let bias = match config.prior.theta_bias {
        Some(bias) => bias,
        None => {
            let source = system.bias_source(kind).map_err(runtime_err)?;
            choose_bias(&source, &prior)
        }
    };
    Ok(prior.with_bias(bias))
}

fn theta_grid(points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| 2.0 * std::f64::consts::PI * i as f64 / points as f64)
        .collect()
}

fn response_scan(config: &ExperimentConfig, config_dir: &Path) -> Result<Table, RunError> {
    let n = config.system.n.ok_or_else(|| config_err("response-scan needs system.n"))?;
    let noise = config
        .base_noise(config_dir)
        .map_err(config_err)?
        .scaled(config.system.noise.lambda_scale);
    let source = ResponseSource::from_noise(n, noise).map_err(runtime_err)?;
    let noiseless = ResponseSource::analytic(n, NoiseSpec::noiseless()).map_err(runtime_err)?;
    let boosts = config.scan.boosts.clone().unwrap_or_else(|| vec![1.0]);

    let mut table = Table::new("theta,source,response,seed");
    for theta in theta_grid(config.scan.theta_points) {
        table.rows.push(format!(
            "{},noiseless,{},{}",
            num(theta),
            num(noiseless.eval(theta)),
            config.seed
        ));
        for &boost in &boosts {
            let boosted = source.boosted(boost).map_err(runtime_err)?;
            table.rows.push(format!(
                "{},noisy-x{},{},{}",
                num(theta),
                num(boost),
                num(boosted.eval(theta)),
                config.seed
            ));
        }
    }
    Ok(table)
}

fn zne_demo(config: &ExperimentConfig, config_dir: &Path) -> Result<Table, RunError> {
    let n = config.system.n.ok_or_else(|| config_err("zne-demo needs system.n"))?;
    let noise = config
        .base_noise(config_dir)
        .map_err(config_err)?
        .scaled(config.system.noise.lambda_scale);
    let source = ResponseSource::from_noise(n, noise).map_err(runtime_err)?;
    let noiseless = ResponseSource::analytic(n, NoiseSpec::noiseless()).map_err(runtime_err)?;
    let zne = zne_section(config)?;
    let shots = config.shots_for(n).map_err(config_err)?;
    let reps = config.trials;
    let grid = theta_grid(config.scan.theta_points);

    let rows: Result<Vec<String>, RunError> = grid
        .par_iter()
        .enumerate()
        .map(|(index, &theta)| {
            let mut rng = child_rng(config.seed, index as u64);
            let mut draws = Vec::with_capacity(reps as usize);
            for _ in 0..reps {
                draws.push(
                    zne_measure(&source, theta, shots, &zne, &mut rng).map_err(runtime_err)?,
                );
            }
            let mean = draws.iter().sum::<f64>() / reps as f64;
            let var =
                draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (reps - 1).max(1) as f64;
            let exact = exact_mitigated_response(&source, theta, &zne).map_err(runtime_err)?;
            Ok(format!(
                "{},{},{},{},{},{},{},{},{}",
                num(theta),
                num(noiseless.eval(theta)),
                num(source.eval(theta)),
                num(exact),
                num(mean),
                num((var / reps as f64).sqrt()),
                shots,
                reps,
                config.seed
            ))
        })
        .collect();
    let mut table = Table::new(
        "theta,r_ideal,r_noisy,r_mitigated_exact,r_mitigated_mean,r_mitigated_stderr,shots,trials,seed",
    );
    table.rows = rows?;
    Ok(table)
}

fn zne_tune(config: &ExperimentConfig, config_dir: &Path) -> Result<Table, RunError> {
    let n = config.system.n.ok_or_else(|| config_err("zne-tune needs system.n"))?;
    let noise = config
        .base_noise(config_dir)
        .map_err(config_err)?
        .scaled(config.system.noise.lambda_scale);
    let source = ResponseSource::from_noise(n, noise).map_err(runtime_err)?;
    let shots = config.shots_for(n).map_err(config_err)?;
    let orders = config
        .zne
        .order_range
        .clone()
        .unwrap_or_else(|| vec![config.zne.order]);
    let x1s = config
        .zne
        .x1_range
        .clone()
        .unwrap_or_else(|| vec![config.zne.x1]);
    let combos: Vec<(usize, f64)> = orders
        .iter()
        .flat_map(|&m| x1s.iter().map(move |&x1| (m, x1)))
        .collect();

    let rows: Result<Vec<String>, RunError> = combos
        .par_iter()
        .enumerate()
        .map(|(index, &(order, x1))| {
            let zne = ZneConfig::tilted_chebyshev(order, x1).map_err(runtime_err)?;
            let mut rng = child_rng(config.seed, index as u64);
            let objective = hyperparameter_objective(
                &source,
                &zne,
                shots,
                config.scan.realizations,
                config.scan.theta_points,
                &mut rng,
            )
            .map_err(runtime_err)?;
            Ok(format!(
                "{},{},{},{},{},{},{}",
                order,
                num(x1),
                num(zne.overhead()),
                num(objective),
                shots,
                config.scan.realizations,
                config.seed
            ))
        })
        .collect();
    let mut table = Table::new("order,x1,overhead,objective,shots,trials,seed");
    table.rows = rows?;
    Ok(table)
}

fn inference_demo(config: &ExperimentConfig, config_dir: &Path) -> Result<Table, RunError> {
    let n = config.system.n.ok_or_else(|| config_err("inference-demo needs system.n"))?;
    let noise = config
        .base_noise(config_dir)
        .map_err(config_err)?
        .scaled(config.system.noise.lambda_scale);
    let source = ResponseSource::from_noise(n, noise).map_err(runtime_err)?;
    let inference_budget = config.shots_for(n).map_err(config_err)?;
    let realizations = config.scan.realizations;
    let grid = theta_grid(config.scan.theta_points);

    let curves: Result<Vec<Vec<f64>>, RunError> = (0..realizations)
        .into_par_iter()
        .map(|index| {
            let mut rng = child_rng(config.seed, index as u64);
            let inferred = infer_response(&source, n, inference_budget, &mut rng, None)
                .map_err(runtime_err)?;
            Ok(grid.iter().map(|&t| inferred.poly.eval(t)).collect())
        })
        .collect();
    let curves = curves?;

    let mut table =
        Table::new("theta,r_noisy,r_inferred_mean,r_inferred_stderr,n_i,realizations,seed");
    for (i, &theta) in grid.iter().enumerate() {
        let values: Vec<f64> = curves.iter().map(|c| c[i]).collect();
        let mean = values.iter().sum::<f64>() / realizations as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
            / (realizations - 1).max(1) as f64;
        table.rows.push(format!(
            "{},{},{},{},{},{},{}",
            num(theta),
            num(source.eval(theta)),
            num(mean),
            num((var / realizations as f64).sqrt()),
            inference_budget,
            realizations,
            config.seed
        ));
    }
    Ok(table)
}

const COMPARE_DEFAULT: [ProtocolKind; 4] = [
    ProtocolKind::NoiseAware,
    ProtocolKind::Zne,
    ProtocolKind::Inference,
    ProtocolKind::PrecharacterizedInference,
];

fn compare_protocols(config: &ExperimentConfig, config_dir: &Path) -> Result<Table, RunError> {
    let base_noise = config.base_noise(config_dir).map_err(config_err)?;
    let kinds = config.protocol_kinds(&COMPARE_DEFAULT).map_err(config_err)?;

    // sweep over n, over the shot budget, or over the base-noise scale
    let mut points: Vec<(usize, u64, f64)> = Vec::new();
    if let Some(ns) = &config.system.n_range {
        for &n in ns {
            points.push((n, config.shots_for(n).map_err(config_err)?, 1.0));
        }
    } else {
        let n = config.system.n.ok_or_else(|| config_err("system needs n"))?;
        if let Some(budgets) = &config.budget.n_shots_range {
            for &shots in budgets {
                points.push((n, shots, 1.0));
            }
        } else if let Some(scales) = &config.system.noise.lambda_scale_range {
            let shots = config.shots_for(n).map_err(config_err)?;
            for &scale in scales {
                points.push((n, shots, scale));
            }
        } else {
            points.push((n, config.shots_for(n).map_err(config_err)?, 1.0));
        }
    }

    let jobs: Vec<(usize, (usize, u64, f64), ProtocolKind)> = points
        .iter()
        .flat_map(|&point| kinds.iter().map(move |&kind| (point, kind)))
        .enumerate()
        .map(|(index, (point, kind))| (index, point, kind))
        .collect();

    let rows: Result<Vec<String>, RunError> = jobs
        .par_iter()
        .map(|&(index, (n, shots, scale), kind)| {
            let scale = scale * config.system.noise.lambda_scale;
            let system = SensingSystem::new(n, base_noise.scaled(scale));
            let prior = build_prior(config, &system, kind, config.prior.t)?;
            let spec = protocol_spec(config, kind, shots)?;
            let master = derive_master(config.seed, index as u64);
            let summary: ErrorSummary = match config.scan.conditional_offset {
                Some(offset) => conditional_decomposition(
                    &spec,
                    &system,
                    &prior,
                    prior.mean() + offset,
                    config.trials,
                    master,
                )
                .map_err(runtime_err)?,
                None => monte_carlo_bmse(&spec, &system, &prior, config.trials, master)
                    .map_err(runtime_err)?,
            };
            let (bias_sq, variance) = summary
                .conditional
                .map(|c| (num(c.bias_sq), num(c.variance)))
                .unwrap_or_default();
            Ok(format!(
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                n,
                shots,
                num(scale),
                kind.label(),
                num(summary.bmse),
                num(summary.std_error),
                bias_sq,
                variance,
                num(sql(n, shots)),
                num(hl(n, shots)),
                config.trials,
                config.seed
            ))
        })
        .collect();
    let mut table = Table::new(
        "n,shots,lambda_scale,protocol,bmse,bmse_stderr,bias_sq,variance,sql,hl,trials,seed",
    );
    table.rows = rows?;
    Ok(table)
}

fn bounds_scan(config: &ExperimentConfig, _config_dir: &Path) -> Result<Table, RunError> {
    let ns: Vec<usize> = config
        .system
        .n_range
        .clone()
        .unwrap_or_else(|| (2..=30).collect());
    let zne = zne_section(config)?;
    let c_pre = config.budget.c_pre.unwrap_or(100.0);
    let mut table = Table::new("n,shots,lambda,protocol,bound,sql,hl");
    for n in ns {
        let lambda = match (config.system.noise.lambda_per_n, config.system.noise.lambda) {
            (Some(per_n), _) => per_n * n as f64,
            (None, Some(fixed)) => fixed,
            (None, None) => return Err(config_err("bounds-scan needs lambda or lambda-per-n")),
        };
        let shots = config.shots_for(n).map_err(config_err)?;
        let mut inputs = BoundInputs::new(n, shots, lambda)
            .with_zne(zne.clone())
            .with_c_pre(c_pre);
        if let Some(fraction) = config.budget.inference_fraction {
            inputs = inputs.with_inference_fraction(fraction);
        }
        let bounds: [(&str, f64); 6] = [
            ("noise-aware", bound_noise_aware(&inputs).map_err(runtime_err)?),
            ("naive", bound_naive(&inputs).map_err(runtime_err)?),
            ("zne", bound_zne(&inputs).map_err(runtime_err)?),
            (
                "inference",
                bound_inference(&inputs, false).map_err(runtime_err)?,
            ),
            (
                "precharacterized-inference",
                bound_inference(&inputs, true).map_err(runtime_err)?,
            ),
            (
                "zne-inference",
                bound_zne_inference(&inputs).map_err(runtime_err)?,
            ),
        ];
        for (label, value) in bounds {
            table.rows.push(format!(
                "{},{},{},{},{},{},{}",
                n,
                shots,
                num(lambda),
                label,
                num(value),
                num(sql(n, shots)),
                num(hl(n, shots))
            ));
        }
    }
    Ok(table)
}

fn precharacterization_sweep(
    config: &ExperimentConfig,
    config_dir: &Path,
) -> Result<Table, RunError> {
    let n = config
        .system
        .n
        .ok_or_else(|| config_err("precharacterization-sweep needs system.n"))?;
    let base_noise = config.base_noise(config_dir).map_err(config_err)?;
    let noise = base_noise.scaled(config.system.noise.lambda_scale);
    let estimation_budgets: Vec<u64> = match &config.budget.n_shots_range {
        Some(range) => range.clone(),
        None => vec![config.shots_for(n).map_err(config_err)?],
    };
    let inference_budgets = config
        .budget
        .n_i_range
        .clone()
        .ok_or_else(|| config_err("precharacterization-sweep needs budget.n-i-range"))?;

    struct Job {
        index: usize,
        shots: u64,
        n_i: Option<u64>,
        kind: ProtocolKind,
    }
    let mut jobs = Vec::new();
    for &shots in &estimation_budgets {
        for kind in [ProtocolKind::NoiseAware, ProtocolKind::Zne] {
            jobs.push(Job {
                index: jobs.len(),
                shots,
                n_i: None,
                kind,
            });
        }
        for &n_i in &inference_budgets {
            jobs.push(Job {
                index: jobs.len(),
                shots,
                n_i: Some(n_i),
                kind: ProtocolKind::PrecharacterizedInference,
            });
        }
    }

    let system = SensingSystem::new(n, noise);
    let rows: Result<Vec<String>, RunError> = jobs
        .par_iter()
        .map(|job| {
            let prior = build_prior(config, &system, job.kind, config.prior.t)?;
            let mut spec = protocol_spec(config, job.kind, job.shots)?;
            if let Some(n_i) = job.n_i {
                // express the requested inference budget through C_pre
                spec = spec.with_c_pre(n_i as f64 / (n as f64 * job.shots as f64));
            }
            let master = derive_master(config.seed, job.index as u64);
            let summary = monte_carlo_bmse(&spec, &system, &prior, config.trials, master)
                .map_err(runtime_err)?;
            Ok(format!(
                "{},{},{},{},{},{},{},{},{},{}",
                n,
                job.shots,
                job.n_i.map(|v| v.to_string()).unwrap_or_default(),
                job.kind.label(),
                num(summary.bmse),
                num(summary.std_error),
                num(sql(n, job.shots)),
                num(hl(n, job.shots)),
                config.trials,
                config.seed
            ))
        })
        .collect();
    let mut table =
        Table::new("n,shots,n_i,protocol,bmse,bmse_stderr,sql,hl,trials,seed");
    table.rows = rows?;
    Ok(table)
}

fn interrogation_sweep(config: &ExperimentConfig, config_dir: &Path) -> Result<Table, RunError> {
    let n = config
        .system
        .n
        .ok_or_else(|| config_err("interrogation-sweep needs system.n"))?;
    let interrogation = config
        .system
        .noise
        .interrogation
        .as_ref()
        .ok_or_else(|| config_err("interrogation-sweep needs [system.noise.interrogation]"))?;
    let times = interrogation
        .t_range
        .clone()
        .ok_or_else(|| config_err("interrogation-sweep needs t-range"))?;
    let kinds = config
        .protocol_kinds(&[ProtocolKind::NoiseAware])
        .map_err(config_err)?;
    let shots = config.shots_for(n).map_err(config_err)?;
    let base_noise = config.base_noise(config_dir).map_err(config_err)?;

    let jobs: Vec<(usize, f64, ProtocolKind)> = times
        .iter()
        .flat_map(|&t| kinds.iter().map(move |&kind| (t, kind)))
        .enumerate()
        .map(|(index, (t, kind))| (index, t, kind))
        .collect();

    let rows: Result<Vec<String>, RunError> = jobs
        .par_iter()
        .map(|&(index, t, kind)| {
            let noise = base_noise
                .scaled(config.system.noise.lambda_scale)
                .with_interrogation(interrogation.k_lambda, t);
            let system = SensingSystem::new(n, noise);
            let prior = build_prior(config, &system, kind, t)?;
            let spec = protocol_spec(config, kind, shots)?;
            let master = derive_master(config.seed, index as u64);
            let summary = monte_carlo_bmse(&spec, &system, &prior, config.trials, master)
                .map_err(runtime_err)?;
            let alpha = alpha_summary(&summary, &prior);
            Ok(format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                n,
                shots,
                num(interrogation.k_lambda),
                num(t),
                kind.label(),
                num(summary.bmse),
                num(summary.std_error),
                num(alpha.bmse),
                num(alpha.std_error),
                num(sql(n, shots)),
                num(hl(n, shots)),
                config.trials,
                config.seed
            ))
        })
        .collect();
    let mut table = Table::new(
        "n,shots,k_lambda,t,protocol,bmse,bmse_stderr,bmse_alpha,bmse_alpha_stderr,sql,hl,trials,seed",
    );
    table.rows = rows?;
    Ok(table)
}
