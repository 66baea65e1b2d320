//! Noise models for the GHZ magnetometry task: global depolarizing,
//! per-CNOT local depolarizing, sparse Pauli-Lindblad channels, and
//! interrogation-stage depolarizing noise.

pub mod density;
pub mod lindblad;
pub mod pauli;

pub use density::{build_ghz_channel, simulate_response, DensityMatrix, MAX_DENSE_QUBITS};
pub use lindblad::{LindbladSpec, PauliChannel, SiteRates};
pub use pauli::{symplectic_product, Pauli2};

use crate::error::{Error, Result};
use std::sync::Arc;

/// Noise afflicting probe-state preparation.
#[derive(Debug, Clone)]
pub enum PrepNoise {
    /// One global depolarizing event of fault rate λ (probability 1−e^{−λ}).
    GlobalDepol { lambda: f64 },
    /// Two-qubit depolarizing of probability p after every CNOT.
    LocalDepol { p: f64 },
    /// Site-dependent sparse Pauli-Lindblad channels after every CNOT.
    PauliLindblad(Arc<LindbladSpec>),
}

/// Depolarizing noise during the parameter-encoding stage, acting on each
/// qubit with probability 1−e^{−k_λ·T} for interaction time T.
#[derive(Debug, Clone, Copy)]
pub struct Interrogation {
    pub k_lambda: f64,
    pub t: f64,
}

#[derive(Debug, Clone)]
pub struct NoiseSpec {
    pub prep: PrepNoise,
    pub interrogation: Option<Interrogation>,
}

impl NoiseSpec {
    pub fn noiseless() -> Self {
        Self::global_depol(0.0)
    }

    pub fn global_depol(lambda: f64) -> Self {
        Self {
            prep: PrepNoise::GlobalDepol { lambda },
            interrogation: None,
        }
    }

    pub fn local_depol(p: f64) -> Self {
        Self {
            prep: PrepNoise::LocalDepol { p },
            interrogation: None,
        }
    }

    pub fn pauli_lindblad(spec: LindbladSpec) -> Self {
        Self {
            prep: PrepNoise::PauliLindblad(Arc::new(spec)),
            interrogation: None,
        }
    }

    pub fn with_interrogation(mut self, k_lambda: f64, t: f64) -> Self {
        self.interrogation = Some(Interrogation { k_lambda, t });
        self
    }

    /// Strip all noise, keeping only the system shape. The noiseless
    /// response cos(nθ) is what the naive and ZNE protocols invert.
    pub fn to_noiseless(&self) -> Self {
        Self::noiseless()
    }

    /// Scale the preparation fault rate by `factor` (rates compose, so the
    /// local depolarizing probability maps through 1−(1−p)^f). The
    /// interrogation part is left untouched.
    pub fn scaled(&self, factor: f64) -> Self {
        assert!(factor >= 0.0);
        let prep = match &self.prep {
            PrepNoise::GlobalDepol { lambda } => PrepNoise::GlobalDepol {
                lambda: lambda * factor,
            },
            PrepNoise::LocalDepol { p } => PrepNoise::LocalDepol {
                p: 1.0 - (1.0 - p).powf(factor),
            },
            PrepNoise::PauliLindblad(spec) => {
                let mut scaled = (**spec).clone();
                scaled.base_lambda *= factor;
                PrepNoise::PauliLindblad(Arc::new(scaled))
            }
        };
        Self {
            prep,
            interrogation: self.interrogation,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.prep {
            PrepNoise::GlobalDepol { lambda } => {
                if *lambda < 0.0 {
                    return Err(Error::InvalidRate {
                        label: "lambda".into(),
                        rate: *lambda,
                    });
                }
            }
            PrepNoise::LocalDepol { p } => {
                if !(0.0..1.0).contains(p) {
                    return Err(Error::InvalidProbability(*p));
                }
            }
            PrepNoise::PauliLindblad(spec) => {
                if spec.base_lambda < 0.0 {
                    return Err(Error::InvalidRate {
                        label: "base_lambda".into(),
                        rate: spec.base_lambda,
                    });
                }
            }
        }
        if let Some(interrogation) = &self.interrogation {
            if interrogation.k_lambda < 0.0 {
                return Err(Error::InvalidRate {
                    label: "k_lambda".into(),
                    rate: interrogation.k_lambda,
                });
            }
            if interrogation.t <= 0.0 {
                return Err(Error::InvalidRate {
                    label: "T".into(),
                    rate: interrogation.t,
                });
            }
        }
        Ok(())
    }

    /// Fringe contrast lost to interrogation noise, (1−p_d)^n = e^{−x·k_λ·T·n}.
    fn interrogation_contrast(&self, n: usize, boost: f64) -> f64 {
        match &self.interrogation {
            Some(i) => (-boost * i.k_lambda * i.t * n as f64).exp(),
            None => 1.0,
        }
    }
}

/// Closed-form noisy response at boost x.
///
/// Global depolarizing: e^{−xλ}·cos(nθ). Local depolarizing:
/// (1−p_x)^{n−1}·cos(nθ) with p_x = 1−(1−p)^x. Pauli-Lindblad noise has no
/// closed form and must go through `simulate_response`.
pub fn analytic_response(noise: &NoiseSpec, n: usize, theta: f64, boost: f64) -> Result<f64> {
    Ok(analytic_amplitude(noise, n, boost)? * (n as f64 * theta).cos())
}

/// Fringe amplitude of the closed-form response (the factor multiplying
/// cos(nθ)), including any interrogation contrast loss.
pub fn analytic_amplitude(noise: &NoiseSpec, n: usize, boost: f64) -> Result<f64> {
    noise.validate()?;
    let prep = match &noise.prep {
        PrepNoise::GlobalDepol { lambda } => (-boost * lambda).exp(),
        PrepNoise::LocalDepol { p } => (1.0 - p).powf(boost).powi(n as i32 - 1),
        PrepNoise::PauliLindblad(_) => return Err(Error::UnsupportedVariant),
    };
    Ok(prep * noise.interrogation_contrast(n, boost))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn analytic_global_depol() {
        let noiseless = NoiseSpec::noiseless();
        for theta in [0.0, 0.3, 1.1] {
            assert_abs_diff_eq!(
                analytic_response(&noiseless, 5, theta, 1.0).unwrap(),
                (5.0 * theta).cos(),
                epsilon = 1e-15
            );
        }
        let noisy = NoiseSpec::global_depol(0.1);
        assert_abs_diff_eq!(
            analytic_response(&noisy, 5, 0.2, 2.0).unwrap(),
            (-0.2f64).exp() * 1.0f64.cos(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn analytic_local_depol_fig6_parameters() {
        let noise = NoiseSpec::local_depol(9e-3);
        let r = analytic_response(&noise, 9, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(r, 0.991f64.powi(8), epsilon = 1e-12);
        assert!((r - 0.9304).abs() < 5e-4);
    }

    #[test]
    fn pauli_lindblad_has_no_closed_form() {
        let spec = LindbladSpec::new(1.0);
        let noise = NoiseSpec::pauli_lindblad(spec);
        assert!(matches!(
            analytic_response(&noise, 3, 0.1, 1.0),
            Err(Error::UnsupportedVariant)
        ));
    }

    #[test]
    fn node_variances_stay_close_at_small_noise() {
        // boosted-node response variances differ from the base level by at
        // most 4λ(x−1) for x ≤ 3 when λ is small
        let lambda = 0.01;
        let n = 5;
        let noise = NoiseSpec::global_depol(lambda);
        for k in 0..64 {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / 64.0;
            let base = analytic_response(&noise, n, theta, 1.0).unwrap();
            let base_var = 1.0 - base * base;
            for step in 0..=20 {
                let x = 1.0 + 2.0 * step as f64 / 20.0;
                let boosted = analytic_response(&noise, n, theta, x).unwrap();
                let boosted_var = 1.0 - boosted * boosted;
                assert!(
                    (boosted_var - base_var).abs() <= 4.0 * lambda * (x - 1.0) + 1e-12,
                    "x = {x}, theta = {theta}"
                );
            }
        }
    }

    #[test]
    fn scaling_multiplies_fault_rates() {
        let scaled = NoiseSpec::global_depol(0.1).scaled(5.0);
        match scaled.prep {
            PrepNoise::GlobalDepol { lambda } => assert_abs_diff_eq!(lambda, 0.5, epsilon = 1e-15),
            _ => unreachable!(),
        }
        let scaled = NoiseSpec::local_depol(0.01).scaled(3.0);
        match scaled.prep {
            PrepNoise::LocalDepol { p } => {
                assert_abs_diff_eq!(p, 1.0 - 0.99f64.powi(3), epsilon = 1e-15)
            }
            _ => unreachable!(),
        }
        // scaling matches boosting for the response
        let base = NoiseSpec::local_depol(0.01);
        let a = analytic_response(&base.scaled(2.5), 4, 0.3, 1.0).unwrap();
        let b = analytic_response(&base, 4, 0.3, 2.5).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-14);
    }

    #[test]
    fn validation_rejects_bad_parameters() {
        assert!(NoiseSpec::global_depol(-0.1).validate().is_err());
        assert!(NoiseSpec::local_depol(1.0).validate().is_err());
        assert!(NoiseSpec::noiseless()
            .with_interrogation(0.1, 0.0)
            .validate()
            .is_err());
        assert!(NoiseSpec::noiseless()
            .with_interrogation(-0.1, 1.0)
            .validate()
            .is_err());
    }
}
