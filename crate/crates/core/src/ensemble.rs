//! Exact probability bookkeeping over blocks of cat labels.
//!
//! Distributions are dense vectors indexed by encoded labels. A block of
//! `n` states is indexed by concatenating the label codes, first state in the
//! most significant position.

use crate::catlabel::CatLabel;
use crate::error::{Error, Result};

/// Maximum number of entries of a dense block distribution.
pub const ENSEMBLE_CAP: usize = 1 << 24;

const NORM_TOL: f64 = 1e-12;
const INPUT_NORM_TOL: f64 = 1e-9;

/// Cat-diagonal distribution of a single `N`-party state.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleDistribution {
    n_parties: usize,
    probs: Vec<f64>,
}

impl SingleDistribution {
    pub fn new(n_parties: usize, probs: Vec<f64>) -> Result<Self> {
        CatLabel::zero(n_parties)?;
        if n_parties > 16 {
            return Err(Error::Capacity {
                what: "single-state labels",
                requested: 1 << n_parties,
                limit: 1 << 16,
            });
        }
        if probs.len() != 1 << n_parties {
            return Err(Error::Dimension(format!(
                "{} probabilities for {} parties",
                probs.len(),
                n_parties
            )));
        }
        if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Domain(format!("probability {p} outside [0, 1]")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::Domain(format!("probabilities sum to {total}")));
        }
        Ok(Self { n_parties, probs })
    }

    pub fn n_parties(&self) -> usize {
        self.n_parties
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, label: CatLabel) -> f64 {
        self.probs[label.encode()]
    }

    /// Overlap with |Φ+⟩.
    pub fn fidelity(&self) -> f64 {
        self.probs[0]
    }

    /// Renormalizes a non-negative weight vector.
    pub(crate) fn from_weights(n_parties: usize, mut w: Vec<f64>) -> Result<Self> {
        let total: f64 = w.iter().sum();
        if total <= 0.0 {
            return Err(Error::Domain("zero total weight".into()));
        }
        w.iter_mut().for_each(|p| *p /= total);
        Ok(Self {
            n_parties,
            probs: w,
        })
    }
}

/// Joint distribution over a block of `n_states` labels.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalEnsemble {
    n_parties: usize,
    n_states: usize,
    probs: Vec<f64>,
}

impl DiagonalEnsemble {
    pub fn n_parties(&self) -> usize {
        self.n_parties
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Block index of a tuple of labels.
    pub fn index_of(&self, labels: &[CatLabel]) -> Result<usize> {
        if labels.len() != self.n_states {
            return Err(Error::Dimension(format!(
                "{} labels for a block of {}",
                labels.len(),
                self.n_states
            )));
        }
        Ok(labels
            .iter()
            .fold(0, |acc, l| (acc << self.n_parties) | l.encode()))
    }

    pub fn labels_at(&self, index: usize) -> Vec<CatLabel> {
        let mask = (1 << self.n_parties) - 1;
        (0..self.n_states)
            .map(|k| {
                let shift = self.n_parties * (self.n_states - 1 - k);
                CatLabel::decode(self.n_parties, (index >> shift) & mask).expect("masked code")
            })
            .collect()
    }

    pub fn entropy(&self) -> f64 {
        entropy_unchecked(&self.probs)
    }

    /// Distribution of state `k` alone.
    pub fn marginal(&self, k: usize) -> Result<SingleDistribution> {
        if k >= self.n_states {
            return Err(Error::Invalid(format!(
                "state {k} of a block of {}",
                self.n_states
            )));
        }
        let mask = (1 << self.n_parties) - 1;
        let shift = self.n_parties * (self.n_states - 1 - k);
        let mut w = vec![0.0; 1 << self.n_parties];
        for (i, &p) in self.probs.iter().enumerate() {
            w[(i >> shift) & mask] += p;
        }
        SingleDistribution::from_weights(self.n_parties, w)
    }

    /// Converts a one-state block back to a single distribution.
    pub fn into_single(self) -> Result<SingleDistribution> {
        if self.n_states != 1 {
            return Err(Error::Dimension(format!(
                "block of {} states is not a single state",
                self.n_states
            )));
        }
        SingleDistribution::from_weights(self.n_parties, self.probs)
    }
}

fn block_len(n_parties: usize, n_states: usize) -> Result<usize> {
    let bits = n_parties * n_states;
    if bits > ENSEMBLE_CAP.trailing_zeros() as usize {
        return Err(Error::Capacity {
            what: "ensemble entries",
            requested: if bits < 64 { 1u64 << bits } else { u64::MAX },
            limit: ENSEMBLE_CAP as u64,
        });
    }
    Ok(1 << bits)
}

/// Relation between fidelity and the pure-state weight of a generalized
/// Werner state, `F = α + (1 − α)/2^N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WernerParams {
    pub n_parties: usize,
    pub fidelity: f64,
    pub alpha: f64,
}

impl WernerParams {
    pub fn from_fidelity(n_parties: usize, fidelity: f64) -> Result<Self> {
        CatLabel::zero(n_parties)?;
        let d = (1u64 << n_parties) as f64;
        let floor = 1.0 / d;
        // grid arithmetic can land a hair outside the closed interval
        let eps = 1e-12;
        if !(fidelity >= floor - eps && fidelity <= 1.0 + eps) {
            return Err(Error::Domain(format!(
                "fidelity {fidelity} outside [{floor}, 1] for {n_parties} parties"
            )));
        }
        let fidelity = fidelity.clamp(floor, 1.0);
        let alpha = ((fidelity - floor) / (1.0 - floor)).clamp(0.0, 1.0);
        Ok(Self {
            n_parties,
            fidelity,
            alpha,
        })
    }

    pub fn from_alpha(n_parties: usize, alpha: f64) -> Result<Self> {
        CatLabel::zero(n_parties)?;
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::Domain(format!("alpha {alpha} outside [0, 1]")));
        }
        let d = (1u64 << n_parties) as f64;
        Ok(Self {
            n_parties,
            fidelity: alpha + (1.0 - alpha) / d,
            alpha,
        })
    }
}

/// Werner state: fidelity `f` on |Φ+⟩, the rest spread evenly over the other
/// `2^N − 1` cat states.
pub fn werner_single(n_parties: usize, fidelity: f64) -> Result<SingleDistribution> {
    let w = WernerParams::from_fidelity(n_parties, fidelity)?;
    if n_parties > 16 {
        return Err(Error::Capacity {
            what: "single-state labels",
            requested: 1 << n_parties,
            limit: 1 << 16,
        });
    }
    let d = 1usize << n_parties;
    let rest = (1.0 - w.fidelity) / (d - 1) as f64;
    let mut probs = vec![rest; d];
    probs[0] = w.fidelity;
    Ok(SingleDistribution { n_parties, probs })
}

/// Product distribution of `n_states` independent copies.
pub fn iid_block(single: &SingleDistribution, n_states: usize) -> Result<DiagonalEnsemble> {
    if n_states == 0 {
        return Err(Error::Invalid("block of zero states".into()));
    }
    block_len(single.n_parties, n_states)?;
    let mut probs = vec![1.0];
    for _ in 0..n_states {
        probs = probs
            .iter()
            .flat_map(|&a| single.probs.iter().map(move |&b| a * b))
            .collect();
    }
    Ok(DiagonalEnsemble {
        n_parties: single.n_parties,
        n_states,
        probs,
    })
}

/// Entropy in bits, `0·log 0 = 0`. Rejects vectors that do not sum to 1.
pub fn shannon_entropy(probs: &[f64]) -> Result<f64> {
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > INPUT_NORM_TOL {
        return Err(Error::Domain(format!(
            "entropy of a vector summing to {total}"
        )));
    }
    Ok(entropy_unchecked(probs))
}

pub(crate) fn entropy_unchecked(probs: &[f64]) -> f64 {
    -probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.log2())
        .sum::<f64>()
}

/// Outcome of one block-size-`m` step.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockStep {
    pub p_pass: f64,
    /// Distribution of the `m − 1` sources given that the block passed;
    /// `None` when nothing passes.
    pub passed: Option<DiagonalEnsemble>,
}

/// The block-size-`m` protocol step.
///
/// States `1..m−1` are XORed into state `m` (the target), whose amplitude
/// bits are then measured; the block passes when they are all zero. Each
/// source keeps its amplitudes and picks up the target's phase. The target's
/// phase is randomized by the measurement and summed out.
pub fn block_step(single: &SingleDistribution, m: usize) -> Result<BlockStep> {
    if m < 2 {
        return Err(Error::Invalid(format!("block size {m} below 2")));
    }
    let n = single.n_parties;
    block_len(n, m)?;
    let passed_len = block_len(n, m - 1)?;
    let labels = CatLabel::all(n)?;
    let mut acc = vec![0.0; passed_len];

    for target in &labels {
        let pt = single.prob(*target);
        if pt == 0.0 {
            continue;
        }
        let walk = SourceWalk {
            n_parties: n,
            labels: &labels,
            single,
            target_phase_code: (target.phase() as usize) << (n - 1),
            target_amps: target.amp_bits(),
        };
        walk.visit(m - 1, 0, 0, pt, &mut acc);
    }

    let p_pass: f64 = acc.iter().sum();
    if p_pass <= 0.0 {
        return Ok(BlockStep {
            p_pass: 0.0,
            passed: None,
        });
    }
    acc.iter_mut().for_each(|p| *p /= p_pass);
    let drift = (acc.iter().sum::<f64>() - 1.0).abs();
    debug_assert!(drift < 1e-9, "normalization drift {drift}");
    Ok(BlockStep {
        p_pass,
        passed: Some(DiagonalEnsemble {
            n_parties: n,
            n_states: m - 1,
            probs: acc,
        }),
    })
}

struct SourceWalk<'a> {
    n_parties: usize,
    labels: &'a [CatLabel],
    single: &'a SingleDistribution,
    target_phase_code: usize,
    target_amps: u32,
}

impl SourceWalk<'_> {
    fn visit(&self, remaining: usize, index: usize, amps: u32, weight: f64, acc: &mut [f64]) {
        if remaining == 0 {
            // target amplitudes after all XORs are zero iff they match the
            // accumulated source amplitudes
            if amps == self.target_amps {
                acc[index] += weight;
            }
            return;
        }
        for l in self.labels {
            let p = self.single.prob(*l);
            if p == 0.0 {
                continue;
            }
            let code = l.encode() ^ self.target_phase_code;
            self.visit(
                remaining - 1,
                (index << self.n_parties) | code,
                amps ^ l.amp_bits(),
                weight * p,
                acc,
            );
        }
    }
}

/// Yield per input state of one block step followed by hashing of the passed
/// sources: `p_pass · (m−1)/m · (1 − H(passed)/(m−1))`. Not clamped.
pub fn block_yield(single: &SingleDistribution, m: usize) -> Result<f64> {
    let step = block_step(single, m)?;
    let Some(passed) = step.passed else {
        return Ok(0.0);
    };
    let k = (m - 1) as f64;
    Ok(step.p_pass * (k / m as f64) * (1.0 - passed.entropy() / k))
}

/// Probability that a state's phase bit is 1, and that each amplitude bit is 1.
#[derive(Debug, Clone, PartialEq)]
pub struct BitMarginals {
    pub phase_one: f64,
    pub amp_one: Vec<f64>,
}

pub fn bit_marginals(single: &SingleDistribution) -> BitMarginals {
    let n = single.n_parties;
    let mut phase_one = 0.0;
    let mut amp_one = vec![0.0; n - 1];
    for (code, &p) in single.probs.iter().enumerate() {
        let l = CatLabel::decode(n, code).expect("code in range");
        if l.phase() {
            phase_one += p;
        }
        for (j, a) in amp_one.iter_mut().enumerate() {
            if l.amplitude(j) {
                *a += p;
            }
        }
    }
    BitMarginals { phase_one, amp_one }
}
