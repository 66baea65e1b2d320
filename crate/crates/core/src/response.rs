//! Response functions: trigonometric-polynomial representation, monotone
//! branches, inversion, and finite-shot sampling of a ±1-valued observable.

use crate::error::{Error, Result};
use rand::Rng;
use rand_distr::{Binomial, Distribution};

/// Bisection tolerance (radians) for branch endpoints and inversion.
pub const BISECTION_TOL: f64 = 1e-12;

/// Derivative magnitude below which a point counts as stationary.
pub const STATIONARY_TOL: f64 = 1e-9;

/// Anything with a phase response and its derivative.
///
/// Implementations must be 2π-periodic and bounded by 1 in magnitude.
pub trait ResponseFn {
    fn eval(&self, theta: f64) -> f64;
    fn derivative(&self, theta: f64) -> f64;
    /// Degree hint used to size stationary-point scans (2·degree extrema per period).
    fn degree(&self) -> usize;
}

/// Degree-n trigonometric polynomial
/// `c + Σ_s a_s cos(sθ) + b_s sin(sθ)`, s = 1..n.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPolynomial {
    degree: usize,
    cos_coeffs: Vec<f64>,
    sin_coeffs: Vec<f64>,
    constant: f64,
}

impl TrigPolynomial {
    pub fn new(cos_coeffs: Vec<f64>, sin_coeffs: Vec<f64>, constant: f64) -> Self {
        assert_eq!(cos_coeffs.len(), sin_coeffs.len());
        assert!(!cos_coeffs.is_empty(), "degree must be at least 1");
        Self {
            degree: cos_coeffs.len(),
            cos_coeffs,
            sin_coeffs,
            constant,
        }
    }

    /// `amp · cos(nθ)`, the GHZ parity fringe shape.
    pub fn cosine(n: usize, amp: f64) -> Self {
        let mut a = vec![0.0; n];
        a[n - 1] = amp;
        Self::new(a, vec![0.0; n], 0.0)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn cos_coeff(&self, s: usize) -> f64 {
        self.cos_coeffs[s - 1]
    }

    pub fn sin_coeff(&self, s: usize) -> f64 {
        self.sin_coeffs[s - 1]
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    /// Evaluate via the angle-addition recurrence (one sincos per call).
    pub fn eval(&self, theta: f64) -> f64 {
        let (sin1, cos1) = theta.sin_cos();
        let mut cs = cos1;
        let mut sn = sin1;
        let mut acc = self.constant;
        for s in 0..self.degree {
            acc += self.cos_coeffs[s] * cs + self.sin_coeffs[s] * sn;
            let next_cs = cs * cos1 - sn * sin1;
            sn = sn * cos1 + cs * sin1;
            cs = next_cs;
        }
        acc
    }

    /// `Σ_s s·(−a_s sin(sθ) + b_s cos(sθ))`.
    pub fn derivative(&self, theta: f64) -> f64 {
        let (sin1, cos1) = theta.sin_cos();
        let mut cs = cos1;
        let mut sn = sin1;
        let mut acc = 0.0;
        for s in 0..self.degree {
            let order = (s + 1) as f64;
            acc += order * (-self.cos_coeffs[s] * sn + self.sin_coeffs[s] * cs);
            let next_cs = cs * cos1 - sn * sin1;
            sn = sn * cos1 + cs * sin1;
            cs = next_cs;
        }
        acc
    }

    /// Exact interpolation through samples at the 2n+1 uniform nodes
    /// θ_k = 2πk/(2n+1), via the discrete orthogonality of the node grid.
    pub fn from_uniform_samples(n: usize, values: &[f64]) -> Result<Self> {
        let count = 2 * n + 1;
        if values.len() != count {
            return Err(Error::BadNodeCount {
                expected: count,
                got: values.len(),
            });
        }
        let constant = values.iter().sum::<f64>() / count as f64;
        let mut cos_coeffs = vec![0.0; n];
        let mut sin_coeffs = vec![0.0; n];
        for s in 1..=n {
            let mut ac = 0.0;
            let mut bs = 0.0;
            for (k, &y) in values.iter().enumerate() {
                let phase = 2.0 * std::f64::consts::PI * (s * k) as f64 / count as f64;
                ac += y * phase.cos();
                bs += y * phase.sin();
            }
            cos_coeffs[s - 1] = 2.0 * ac / count as f64;
            sin_coeffs[s - 1] = 2.0 * bs / count as f64;
        }
        Ok(Self::new(cos_coeffs, sin_coeffs, constant))
    }
}

impl ResponseFn for TrigPolynomial {
    fn eval(&self, theta: f64) -> f64 {
        TrigPolynomial::eval(self, theta)
    }

    fn derivative(&self, theta: f64) -> f64 {
        TrigPolynomial::derivative(self, theta)
    }

    fn degree(&self) -> usize {
        self.degree
    }
}

/// A maximal interval on which the response is strictly monotone, bounded
/// by two adjacent stationary points.
#[derive(Debug, Clone, Copy)]
pub struct InvertibleBranch {
    pub theta_min: f64,
    pub theta_max: f64,
    /// +1 if the response increases over the branch, −1 if it decreases.
    pub direction: i8,
    /// Response range [y_lo, y_hi] attained on the branch.
    pub y_lo: f64,
    pub y_hi: f64,
}

impl InvertibleBranch {
    pub fn contains(&self, theta: f64) -> bool {
        theta >= self.theta_min && theta <= self.theta_max
    }

    pub fn width(&self) -> f64 {
        self.theta_max - self.theta_min
    }
}

/// Locate the maximal monotone branch of `response` around `theta_center`.
///
/// The derivative is scanned outward at 1024·degree points per period until
/// its sign flips; each bracketing step is then refined by bisection on the
/// derivative to 1e-12 radians.
pub fn find_branch<R: ResponseFn + ?Sized>(
    response: &R,
    theta_center: f64,
) -> Result<InvertibleBranch> {
    let d_center = response.derivative(theta_center);
    if d_center.abs() < STATIONARY_TOL {
        return Err(Error::StationaryAtCenter {
            theta: theta_center,
        });
    }
    let steps_per_period = 1024 * response.degree().max(1);
    let step = 2.0 * std::f64::consts::PI / steps_per_period as f64;
    let sign = d_center.signum();

    let scan = |dir: f64| -> Result<f64> {
        let mut prev = theta_center;
        for k in 1..=steps_per_period {
            let theta = theta_center + dir * k as f64 * step;
            let d = response.derivative(theta);
            if d == 0.0 || d.signum() != sign {
                let (lo, hi) = if dir > 0.0 { (prev, theta) } else { (theta, prev) };
                return Ok(bisect_derivative_root(response, lo, hi, sign, dir));
            }
            prev = theta;
        }
        Err(Error::BranchScanFailed {
            theta: theta_center,
        })
    };

    let theta_max = scan(1.0)?;
    let theta_min = scan(-1.0)?;
    let (y_a, y_b) = (response.eval(theta_min), response.eval(theta_max));
    let direction = if sign > 0.0 { 1 } else { -1 };
    Ok(InvertibleBranch {
        theta_min,
        theta_max,
        direction,
        y_lo: y_a.min(y_b),
        y_hi: y_a.max(y_b),
    })
}

/// Bisection for the stationary point inside [lo, hi]; `sign` is the
/// derivative sign on the interior side of the bracket.
fn bisect_derivative_root<R: ResponseFn + ?Sized>(
    response: &R,
    mut lo: f64,
    mut hi: f64,
    sign: f64,
    dir: f64,
) -> f64 {
    // Interior endpoint carries `sign`; moving toward the other endpoint
    // crosses the stationary point.
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        let d = response.derivative(mid);
        let mid_matches_interior = d != 0.0 && d.signum() == sign;
        // dir > 0: interior is the `lo` side; dir < 0: interior is `hi`.
        if (dir > 0.0) == mid_matches_interior {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Invert `response` on a monotone branch by bisection.
///
/// `y` is first clamped into the branch's attained range, which makes the
/// inversion total under shot noise that overshoots the fringe extremum.
pub fn invert_on_branch<R: ResponseFn + ?Sized>(
    response: &R,
    branch: &InvertibleBranch,
    y: f64,
) -> f64 {
    let target = y.clamp(branch.y_lo, branch.y_hi);
    let increasing = branch.direction > 0;
    let mut lo = branch.theta_min;
    let mut hi = branch.theta_max;
    // ~60 halvings take the bracket to f64 resolution from any 2π-wide start.
    for _ in 0..64 {
        if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let v = response.eval(mid);
        if (v < target) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Variance `1 − R²` of a single-shot ±1 outcome with mean `R`.
pub fn response_variance(r: f64) -> Result<f64> {
    if r.abs() > 1.0 + 1e-12 {
        return Err(Error::ResponseOutOfRange(r));
    }
    Ok((1.0 - r * r).max(0.0))
}

/// An N-shot empirical mean of a ±1-valued observable.
#[derive(Debug, Clone, Copy)]
pub struct ShotEstimate {
    /// Empirical mean in [−1, 1], quantized to the 2/N grid.
    pub value: f64,
    pub shots: u64,
}

/// Draw an N-shot estimate of a response with true mean `r_true`:
/// k ~ Binomial(N, (1+R)/2) ones out of N, giving R̄ = 2k/N − 1.
pub fn sample_response<G: Rng + ?Sized>(
    r_true: f64,
    shots: u64,
    rng: &mut G,
) -> Result<ShotEstimate> {
    if r_true.abs() > 1.0 + 1e-12 {
        return Err(Error::ResponseOutOfRange(r_true));
    }
    if shots == 0 {
        return Err(Error::BudgetTooSmall { given: 0, need: 1 });
    }
    let p = (0.5 * (1.0 + r_true)).clamp(0.0, 1.0);
    let ones = Binomial::new(shots, p).expect("valid binomial").sample(rng);
    Ok(ShotEstimate {
        value: 2.0 * ones as f64 / shots as f64 - 1.0,
        shots,
    })
}
