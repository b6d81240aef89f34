//! Hashing yields.
//!
//! Closed forms for the multiparty hashing protocol and for bipartite hashing
//! of a Bell-diagonal state, plus a finite-size simulation of the multiparty
//! protocol in [`sim`].

pub mod sim;
pub mod transcript;

use crate::ensemble::{self, bit_marginals, SingleDistribution, WernerParams};
use crate::error::{Error, Result};

pub use sim::{simulate_hashing, FailureReason, HashingOutcome, HashingParams, HashingRun};

/// `H₂(x) = −x log₂ x − (1−x) log₂(1−x)`, with `H₂(0) = H₂(1) = 0`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("binary entropy of {x}")));
    }
    Ok(h2(x))
}

pub(crate) fn h2(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
}

/// Yield of hashing the amplitude strings in parallel and then the phase
/// string: `1 − max_j H(b_j) − H(b_0)`, with per-bit entropies.
pub fn multiparty_hashing_yield(single: &SingleDistribution) -> f64 {
    let m = bit_marginals(single);
    let amp = m.amp_one.iter().map(|&p| h2(p)).fold(0.0, f64::max);
    1.0 - amp - h2(m.phase_one)
}

/// Multiparty hashing yield on a Werner state, where every bit string has
/// flip probability `(1−f)·2^{N−1}/(2^N − 1)`.
pub fn werner_hashing_yield(n_parties: usize, fidelity: f64) -> Result<f64> {
    let w = WernerParams::from_fidelity(n_parties, fidelity)?;
    let half = 2f64.powi(n_parties as i32 - 1);
    let q = (1.0 - w.fidelity) * half / (2.0 * half - 1.0);
    Ok(1.0 - 2.0 * h2(q))
}

/// Large-`N` limit of [`werner_hashing_yield`].
pub fn werner_hashing_yield_limit(fidelity: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&fidelity) {
        return Err(Error::Domain(format!("fidelity {fidelity} outside [0, 1]")));
    }
    Ok(1.0 - 2.0 * h2((1.0 - fidelity) / 2.0))
}

/// Bipartite hashing of a Bell-diagonal state, `1 − H(ρ)`.
pub fn two_party_hashing_yield(single: &SingleDistribution) -> Result<f64> {
    if single.n_parties() != 2 {
        return Err(Error::Dimension(format!(
            "two-party hashing on a {}-party state",
            single.n_parties()
        )));
    }
    Ok(1.0 - ensemble::entropy_unchecked(single.probs()))
}
