//! Counter-based RNG stream derivation.
//!
//! Monte Carlo trials must produce identical results for any parallel
//! schedule, so each trial draws from its own stream derived from
//! (master seed, trial index) rather than from a shared sequential RNG.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 step; a full-period mixer with good avalanche behaviour.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a 32-byte ChaCha seed from a master seed and a stream index.
pub fn child_seed(master: u64, index: u64) -> [u8; 32] {
    let mut state = master ^ index.wrapping_mul(0xA076_1D64_78BD_642F);
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    seed
}

/// RNG for stream `index` of the experiment identified by `master`.
pub fn child_rng(master: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(child_seed(master, index))
}

/// A sub-experiment master seed, for fanning one configured seed out to
/// independent sweep rows.
pub fn derive_master(master: u64, index: u64) -> u64 {
    let mut state = master ^ index.wrapping_mul(0xD6E8_FEB8_6659_FD93);
    splitmix64(&mut state)
}
