//! A unified oracle for exact responses R_λ(θ) at a boostable noise level.
//!
//! Analytic variants evaluate closed forms; the simulated variant runs the
//! density-matrix backend once per boost level and stores the (exactly
//! interpolated) degree-n trigonometric polynomial, since the GHZ response
//! is one by construction. All variants are cheap to clone and safe to
//! share across worker threads.

use crate::error::{Error, Result};
use crate::noise::{analytic_response, NoiseSpec, PrepNoise};
use crate::response::{ResponseFn, TrigPolynomial};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceKind {
    AnalyticGlobalDepol,
    AnalyticLocalDepol,
    Simulated,
    TrigPolynomial,
}

#[derive(Debug, Clone)]
enum Inner {
    Analytic {
        n: usize,
        noise: NoiseSpec,
    },
    Simulated {
        n: usize,
        noise: NoiseSpec,
        /// boost bits -> exact response polynomial at that boost
        cache: Arc<Mutex<HashMap<u64, Arc<TrigPolynomial>>>>,
    },
    Trig(Arc<TrigPolynomial>),
}

#[derive(Debug, Clone)]
pub struct ResponseSource {
    inner: Inner,
    boost: f64,
}

impl ResponseSource {
    /// Closed-form source for the depolarizing noise variants.
    pub fn analytic(n: usize, noise: NoiseSpec) -> Result<Self> {
        noise.validate()?;
        if matches!(noise.prep, PrepNoise::PauliLindblad(_)) {
            return Err(Error::UnsupportedVariant);
        }
        if n == 0 {
            return Err(Error::SystemTooSmall(n));
        }
        Ok(Self {
            inner: Inner::Analytic { n, noise },
            boost: 1.0,
        })
    }

    /// Density-matrix-backed source (any noise variant, n ≤ 12).
    pub fn simulated(n: usize, noise: NoiseSpec) -> Result<Self> {
        noise.validate()?;
        if n == 0 {
            return Err(Error::SystemTooSmall(n));
        }
        if n > crate::noise::MAX_DENSE_QUBITS {
            return Err(Error::SystemTooLarge(n));
        }
        Ok(Self {
            inner: Inner::Simulated {
                n,
                noise,
                cache: Arc::new(Mutex::new(HashMap::new())),
            },
            boost: 1.0,
        })
    }

    /// Analytic where a closed form exists, otherwise density-matrix backed.
    pub fn from_noise(n: usize, noise: NoiseSpec) -> Result<Self> {
        match noise.prep {
            PrepNoise::PauliLindblad(_) => Self::simulated(n, noise),
            _ => Self::analytic(n, noise),
        }
    }

    pub fn from_trig(poly: TrigPolynomial) -> Self {
        Self {
            inner: Inner::Trig(Arc::new(poly)),
            boost: 1.0,
        }
    }

    pub fn kind(&self) -> SourceKind {
        match &self.inner {
            Inner::Analytic { noise, .. } => match noise.prep {
                PrepNoise::GlobalDepol { .. } => SourceKind::AnalyticGlobalDepol,
                _ => SourceKind::AnalyticLocalDepol,
            },
            Inner::Simulated { .. } => SourceKind::Simulated,
            Inner::Trig(_) => SourceKind::TrigPolynomial,
        }
    }

    pub fn boost(&self) -> f64 {
        self.boost
    }

    pub fn qubits(&self) -> usize {
        match &self.inner {
            Inner::Analytic { n, .. } | Inner::Simulated { n, .. } => *n,
            Inner::Trig(poly) => poly.degree(),
        }
    }

    /// The same source with its fault rate multiplied by a further factor
    /// `x ≥ 1`. Trig-polynomial sources have no noise dial and are returned
    /// unchanged only for x = 1.
    pub fn boosted(&self, x: f64) -> Result<Self> {
        if x < 1.0 {
            return Err(Error::InvalidRate {
                label: "boost".into(),
                rate: x,
            });
        }
        if matches!(self.inner, Inner::Trig(_)) && x != 1.0 {
            return Err(Error::UnsupportedVariant);
        }
        let mut out = self.clone();
        out.boost = self.boost * x;
        Ok(out)
    }

    /// Exact degree-n trigonometric polynomial equal to this response.
    pub fn exact_trig(&self) -> Arc<TrigPolynomial> {
        match &self.inner {
            Inner::Trig(poly) => poly.clone(),
            Inner::Analytic { n, noise } => {
                let amp = crate::noise::analytic_amplitude(noise, *n, self.boost)
                    .expect("analytic variants always have an amplitude");
                Arc::new(TrigPolynomial::cosine(*n, amp))
            }
            Inner::Simulated { n, noise, cache } => {
                let key = self.boost.to_bits();
                if let Some(poly) = cache.lock().unwrap().get(&key) {
                    return poly.clone();
                }
                let poly = Arc::new(interpolate_simulated(*n, noise, self.boost));
                cache.lock().unwrap().insert(key, poly.clone());
                poly
            }
        }
    }
}

/// The GHZ parity response is a degree-n trigonometric polynomial, so
/// exact evaluation at the 2n+1 uniform nodes pins it down completely.
fn interpolate_simulated(n: usize, noise: &NoiseSpec, boost: f64) -> TrigPolynomial {
    let count = 2 * n + 1;
    let mut rho = crate::noise::build_ghz_channel(n, noise, boost)
        .expect("validated at construction");
    let prepared = rho.clone();
    let mut values = Vec::with_capacity(count);
    for k in 0..count {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
        rho.clone_from(&prepared);
        crate::noise::density::apply_phase_and_interrogation(&mut rho, noise, theta, boost);
        values.push(rho.parity_expectation());
    }
    TrigPolynomial::from_uniform_samples(n, &values).expect("node count matches")
}

impl ResponseFn for ResponseSource {
    fn eval(&self, theta: f64) -> f64 {
        match &self.inner {
            Inner::Analytic { n, noise } => analytic_response(noise, *n, theta, self.boost)
                .expect("analytic variants always evaluate"),
            Inner::Simulated { .. } => self.exact_trig().eval(theta),
            Inner::Trig(poly) => poly.eval(theta),
        }
    }

    fn derivative(&self, theta: f64) -> f64 {
        match &self.inner {
            Inner::Analytic { n, noise } => {
                let amp = crate::noise::analytic_amplitude(noise, *n, self.boost)
                    .expect("analytic variants always have an amplitude");
                -amp * *n as f64 * (*n as f64 * theta).sin()
            }
            Inner::Simulated { .. } => self.exact_trig().derivative(theta),
            Inner::Trig(poly) => poly.derivative(theta),
        }
    }

    fn degree(&self) -> usize {
        self.qubits()
    }
}
