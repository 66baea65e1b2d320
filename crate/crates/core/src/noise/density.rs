//! Dense density-matrix simulation of noisy GHZ preparation, phase
//! encoding, interrogation noise, and the parity measurement.
//!
//! Qubit q maps to bit q of the basis index (qubit 0 is the least
//! significant bit). The dense backend is capped at 12 qubits; larger
//! systems must use the closed-form responses.

use super::lindblad::PauliChannel;
use super::pauli::Pauli2;
use super::{NoiseSpec, PrepNoise};
use crate::error::{Error, Result};
use num_complex::Complex64;

pub const MAX_DENSE_QUBITS: usize = 12;

#[derive(Debug, Clone)]
pub struct DensityMatrix {
    n: usize,
    dim: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    /// |0…0⟩⟨0…0| on n qubits.
    pub fn zero_state(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::SystemTooSmall(n));
        }
        if n > MAX_DENSE_QUBITS {
            return Err(Error::SystemTooLarge(n));
        }
        let dim = 1 << n;
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        data[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n, dim, data })
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    fn entry_mut(&mut self, row: usize, col: usize) -> &mut Complex64 {
        &mut self.data[row * self.dim + col]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.entry(i, i)).sum()
    }

    /// Max deviation from Hermiticity, |ρ_{ij} − ρ_{ji}^*|.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                let d = (self.entry(i, j) - self.entry(j, i).conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Hadamard on qubit `q`.
    pub fn apply_hadamard(&mut self, q: usize) {
        let mask = 1usize << q;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // rows, then columns
        for i in 0..self.dim {
            if i & mask != 0 {
                continue;
            }
            for j in 0..self.dim {
                let lo = self.entry(i, j);
                let hi = self.entry(i | mask, j);
                *self.entry_mut(i, j) = s * (lo + hi);
                *self.entry_mut(i | mask, j) = s * (lo - hi);
            }
        }
        for j in 0..self.dim {
            if j & mask != 0 {
                continue;
            }
            for i in 0..self.dim {
                let lo = self.entry(i, j);
                let hi = self.entry(i, j | mask);
                *self.entry_mut(i, j) = s * (lo + hi);
                *self.entry_mut(i, j | mask) = s * (lo - hi);
            }
        }
    }

    /// CNOT with the given control and target qubits.
    pub fn apply_cnot(&mut self, control: usize, target: usize) {
        assert_ne!(control, target);
        let cmask = 1usize << control;
        let tmask = 1usize << target;
        for i in 0..self.dim {
            if i & cmask != 0 && i & tmask == 0 {
                for j in 0..self.dim {
                    self.data.swap(i * self.dim + j, (i | tmask) * self.dim + j);
                }
            }
        }
        for j in 0..self.dim {
            if j & cmask != 0 && j & tmask == 0 {
                for i in 0..self.dim {
                    self.data.swap(i * self.dim + j, i * self.dim + (j | tmask));
                }
            }
        }
    }

    /// Probability-weighted two-qubit Pauli conjugations
    /// ρ → Σ_b c_b P_b ρ P_b† acting on qubits (qa, qb).
    pub fn apply_pauli_channel(&mut self, channel: &PauliChannel, qa: usize, qb: usize) {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim * self.dim];
        for pauli in Pauli2::all() {
            let weight = channel.prob(pauli);
            if weight < 1e-15 {
                continue;
            }
            let (flip_a, factor_a) = factor_action(pauli.first_factor(), qa);
            let (flip_b, factor_b) = factor_action(pauli.second_factor(), qb);
            let flip = flip_a | flip_b;
            for i in 0..self.dim {
                let si = i ^ flip;
                let phase_i = factor_a(si) * factor_b(si);
                for j in 0..self.dim {
                    let sj = j ^ flip;
                    let phase = phase_i * (factor_a(sj) * factor_b(sj)).conj();
                    out[i * self.dim + j] += weight * phase * self.data[si * self.dim + sj];
                }
            }
        }
        self.data = out;
    }

    /// Global depolarizing with fault probability p: ρ → (1−p)ρ + p·I/2ⁿ.
    pub fn apply_global_depolarizing(&mut self, p: f64) {
        let keep = 1.0 - p;
        for v in self.data.iter_mut() {
            *v *= keep;
        }
        let fill = p / self.dim as f64;
        for i in 0..self.dim {
            *self.entry_mut(i, i) += fill;
        }
    }

    /// Single-qubit depolarizing on qubit `q` with fault probability p,
    /// applied as the Pauli mixture (1−3p/4)ρ + (p/4)(XρX + YρY + ZρZ).
    pub fn apply_single_qubit_depolarizing(&mut self, q: usize, p: f64) {
        let mask = 1usize << q;
        let keep = 1.0 - 0.5 * p;
        let mix = 0.5 * p;
        // X and Y terms together map (i,j) -> (i^m, j^m) with combined weight
        // (p/4)(1 + (−1)^{b_i + b_j}); Z contributes (p/4)(−1)^{b_i+b_j} and
        // identity 1−3p/4, which combine to the `keep`/`mix` form below.
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim * self.dim];
        for i in 0..self.dim {
            for j in 0..self.dim {
                let same_parity = ((i ^ j) & mask) == 0;
                let idx = i * self.dim + j;
                if same_parity {
                    out[idx] = keep * self.data[idx] + mix * self.data[(i ^ mask) * self.dim + (j ^ mask)];
                } else {
                    out[idx] = (1.0 - p) * self.data[idx];
                }
            }
        }
        self.data = out;
    }

    /// Conjugation by (e^{−iθZ/2})^{⊗n}: ρ_{ab} picks up e^{iθ(pop(a)−pop(b))}.
    pub fn apply_phase_encoding(&mut self, theta: f64) {
        for i in 0..self.dim {
            let pi = (i as u64).count_ones() as i32;
            for j in 0..self.dim {
                let pj = (j as u64).count_ones() as i32;
                let delta = (pi - pj) as f64;
                if delta != 0.0 {
                    let phase = Complex64::from_polar(1.0, theta * delta);
                    self.data[i * self.dim + j] *= phase;
                }
            }
        }
    }

    /// Tr[ρ X^{⊗n}] = Σ_b ρ_{b, b̄} with b̄ the bitwise complement.
    pub fn parity_expectation(&self) -> f64 {
        let full = self.dim - 1;
        (0..self.dim).map(|b| self.entry(b, b ^ full).re).sum()
    }

    /// Overlap ⟨ψ|ρ|ψ⟩ with the n-qubit GHZ state.
    pub fn ghz_fidelity(&self) -> f64 {
        let full = self.dim - 1;
        0.5 * (self.entry(0, 0) + self.entry(0, full) + self.entry(full, 0) + self.entry(full, full)).re
    }
}

/// Action of a single-qubit Pauli factor placed at qubit `q`:
/// the index flip mask plus the phase applied to a source basis index.
fn factor_action(factor: u8, q: usize) -> (usize, impl Fn(usize) -> Complex64 + Copy) {
    let mask = 1usize << q;
    let flip = match factor {
        1 | 2 => mask,
        _ => 0,
    };
    let phase = move |state: usize| -> Complex64 {
        let bit = (state & mask != 0) as i32;
        match factor {
            2 => Complex64::new(0.0, if bit == 0 { 1.0 } else { -1.0 }),
            3 => Complex64::new(if bit == 0 { 1.0 } else { -1.0 }, 0.0),
            _ => Complex64::new(1.0, 0.0),
        }
    };
    (flip, phase)
}

/// CNOT ladder order for an n-qubit GHZ chain: Hadamard site ⌊(n−1)/2⌋,
/// then targets alternating right-then-left. Returns (control, target) pairs.
pub fn ghz_ladder(n: usize) -> Vec<(usize, usize)> {
    let center = (n - 1) / 2;
    let mut pairs = Vec::with_capacity(n - 1);
    let (mut right, mut left) = (center, center);
    while pairs.len() < n - 1 {
        if right + 1 < n {
            pairs.push((right, right + 1));
            right += 1;
        }
        if left > 0 && pairs.len() < n - 1 {
            pairs.push((left, left - 1));
            left -= 1;
        }
    }
    pairs
}

/// Prepare the noisy GHZ probe state: Hadamard at the chain center, CNOTs
/// outward in ladder order, each followed by its site's noise channel at
/// the boosted rate. Boosting multiplies fault *rates*, so the local
/// depolarizing probability p maps to 1−(1−p)^x.
pub fn build_ghz_channel(n: usize, noise: &NoiseSpec, boost: f64) -> Result<DensityMatrix> {
    noise.validate()?;
    let mut rho = DensityMatrix::zero_state(n)?;
    rho.apply_hadamard((n - 1) / 2);
    for (control, target) in ghz_ladder(n) {
        rho.apply_cnot(control, target);
        let site = control.min(target);
        match &noise.prep {
            PrepNoise::GlobalDepol { .. } => {}
            PrepNoise::LocalDepol { p } => {
                let boosted = 1.0 - (1.0 - p).powf(boost);
                let channel = PauliChannel::two_qubit_depolarizing(site, boosted)?;
                rho.apply_pauli_channel(&channel, control, target);
            }
            PrepNoise::PauliLindblad(spec) => {
                let channel = spec.pauli_channel(site, boost)?;
                rho.apply_pauli_channel(&channel, control, target);
            }
        }
    }
    if let PrepNoise::GlobalDepol { lambda } = noise.prep {
        rho.apply_global_depolarizing(1.0 - (-boost * lambda).exp());
    }
    Ok(rho)
}

/// Full response R_λ(θ) = Tr[D_λ ∘ S_θ ∘ E_λ(ρ_in) · X^{⊗n}] by direct
/// density-matrix evolution at noise boost `x`.
pub fn simulate_response(n: usize, noise: &NoiseSpec, theta: f64, boost: f64) -> Result<f64> {
    let mut rho = build_ghz_channel(n, noise, boost)?;
    apply_phase_and_interrogation(&mut rho, noise, theta, boost);
    Ok(rho.parity_expectation())
}

pub(crate) fn apply_phase_and_interrogation(
    rho: &mut DensityMatrix,
    noise: &NoiseSpec,
    theta: f64,
    boost: f64,
) {
    rho.apply_phase_encoding(theta);
    if let Some(interrogation) = &noise.interrogation {
        let p = 1.0 - (-boost * interrogation.k_lambda * interrogation.t).exp();
        if p > 0.0 {
            for q in 0..rho.qubits() {
                rho.apply_single_qubit_depolarizing(q, p);
            }
        }
    }
}
