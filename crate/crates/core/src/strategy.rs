//! Composite purification strategies and curve-level analysis.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::catlabel::CatLabel;
use crate::ensemble::{block_step, block_yield, werner_single, SingleDistribution};
use crate::error::{Error, Result};
use crate::hashing::{two_party_hashing_yield, werner_hashing_yield};

pub const DEFAULT_MAX_ROUNDS: usize = 20;
/// Largest number of points a yield curve may have.
pub const GRID_CAP: usize = 1_000_000;
pub const BLOCK_SIZES: std::ops::RangeInclusive<usize> = 2..=8;

/// How the passed pair is prepared before each recurrence round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RecurrenceVariant {
    /// Track the exact Bell-diagonal distribution and apply the bilateral
    /// rotation `(p, i) → (p, i ⊕ p)` before each round.
    #[default]
    Rotation,
    /// Replace the distribution by the Werner state of equal fidelity.
    WernerTwirl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodSpec {
    RecurrenceHashing {
        max_rounds: usize,
        variant: RecurrenceVariant,
    },
    BlockThenHashing {
        m: usize,
    },
    MultipartyHashing,
    TwoPartyHashing,
}

impl MethodSpec {
    pub fn rec_hash() -> Self {
        MethodSpec::RecurrenceHashing {
            max_rounds: DEFAULT_MAX_ROUNDS,
            variant: RecurrenceVariant::default(),
        }
    }

    pub fn block(m: usize) -> Result<Self> {
        if !BLOCK_SIZES.contains(&m) {
            return Err(Error::Invalid(format!("block size {m} outside 2..=8")));
        }
        Ok(MethodSpec::BlockThenHashing { m })
    }

    /// Overrides the recurrence settings; other methods are returned as is.
    pub fn with_recurrence(self, max_rounds: usize, variant: RecurrenceVariant) -> Self {
        match self {
            MethodSpec::RecurrenceHashing { .. } => MethodSpec::RecurrenceHashing {
                max_rounds,
                variant,
            },
            other => other,
        }
    }

    /// Whether the method is defined for `n_parties` parties.
    pub fn supports(&self, n_parties: usize) -> bool {
        match self {
            MethodSpec::MultipartyHashing => n_parties >= 2,
            _ => n_parties == 2,
        }
    }

    /// Unclamped yield per input Werner state.
    pub fn raw_yield(&self, n_parties: usize, fidelity: f64) -> Result<f64> {
        if !self.supports(n_parties) {
            return Err(Error::Dimension(format!(
                "{self} is defined for two parties only"
            )));
        }
        match *self {
            MethodSpec::RecurrenceHashing {
                max_rounds,
                variant,
            } => Ok(recurrence_then_hashing_raw(fidelity, max_rounds, variant)?.0),
            MethodSpec::BlockThenHashing { m } => block_yield(&werner_single(2, fidelity)?, m),
            MethodSpec::MultipartyHashing => werner_hashing_yield(n_parties, fidelity),
            MethodSpec::TwoPartyHashing => two_party_hashing_yield(&werner_single(2, fidelity)?),
        }
    }
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MethodSpec::RecurrenceHashing { .. } => f.write_str("rec-hash"),
            MethodSpec::BlockThenHashing { m } => write!(f, "block{m}"),
            MethodSpec::MultipartyHashing => f.write_str("mp-hash"),
            MethodSpec::TwoPartyHashing => f.write_str("2p-hash"),
        }
    }
}

impl FromStr for MethodSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "rec-hash" => Ok(MethodSpec::rec_hash()),
            "mp-hash" => Ok(MethodSpec::MultipartyHashing),
            "2p-hash" => Ok(MethodSpec::TwoPartyHashing),
            other => match other.strip_prefix("block").map(str::parse::<usize>) {
                Some(Ok(m)) => MethodSpec::block(m),
                _ => Err(Error::Invalid(format!(
                    "unknown method {other:?} (expected rec-hash, block<m>, mp-hash or 2p-hash)"
                ))),
            },
        }
    }
}

fn rotate(single: &SingleDistribution) -> Result<SingleDistribution> {
    let n = single.n_parties();
    let mut w = vec![0.0; single.probs().len()];
    for (code, &p) in single.probs().iter().enumerate() {
        let l = CatLabel::decode(n, code)?;
        let bits = if l.phase() {
            !l.amp_bits()
        } else {
            l.amp_bits()
        };
        let mask = (1u32 << (n - 1)) - 1;
        w[l.with_amp_bits(bits & mask).encode()] += p;
    }
    SingleDistribution::from_weights(n, w)
}

/// One recurrence round on a pair: returns the pass probability and the
/// distribution of the kept pair.
fn recurrence_round(
    dist: &SingleDistribution,
    variant: RecurrenceVariant,
) -> Result<Option<(f64, SingleDistribution)>> {
    let input = match variant {
        RecurrenceVariant::Rotation => rotate(dist)?,
        RecurrenceVariant::WernerTwirl => werner_single(2, dist.fidelity())?,
    };
    let step = block_step(&input, 2)?;
    match step.passed {
        Some(p) => Ok(Some((step.p_pass, p.into_single()?))),
        None => Ok(None),
    }
}

/// Best yield over `r ∈ 0..=max_rounds` recurrence rounds followed by
/// bipartite hashing, without the zero floor, and the round count that
/// achieves it.
pub fn recurrence_then_hashing_raw(
    fidelity: f64,
    max_rounds: usize,
    variant: RecurrenceVariant,
) -> Result<(f64, usize)> {
    let mut dist = werner_single(2, fidelity)?;
    let mut best = (two_party_hashing_yield(&dist)?, 0);
    let mut factor = 1.0;
    for r in 1..=max_rounds {
        let Some((p_pass, next)) = recurrence_round(&dist, variant)? else {
            break;
        };
        factor *= p_pass / 2.0;
        dist = next;
        let y = factor * two_party_hashing_yield(&dist)?;
        if y > best.0 {
            best = (y, r);
        }
    }
    Ok(best)
}

/// Recurrence continued by hashing on a two-party Werner state. The yield is
/// floored at zero, and `rounds` is 0 when no positive yield exists.
pub fn recurrence_then_hashing(
    fidelity: f64,
    max_rounds: usize,
    variant: RecurrenceVariant,
) -> Result<(f64, usize)> {
    let (y, r) = recurrence_then_hashing_raw(fidelity, max_rounds, variant)?;
    if y <= 0.0 {
        Ok((0.0, 0))
    } else {
        Ok((y, r))
    }
}

/// One block step of size `m` on a two-party Werner state, then hashing;
/// clamped at zero.
pub fn block_then_hashing(fidelity: f64, m: usize) -> Result<f64> {
    MethodSpec::block(m)?;
    Ok(block_yield(&werner_single(2, fidelity)?, m)?.max(0.0))
}

/// Method with the largest raw yield; earlier methods win ties.
pub fn best_method(
    n_parties: usize,
    fidelity: f64,
    methods: &[MethodSpec],
) -> Result<(MethodSpec, f64)> {
    let mut best: Option<(MethodSpec, f64)> = None;
    for &m in methods {
        let y = m.raw_yield(n_parties, fidelity)?;
        if best.is_none_or(|(_, b)| y > b) {
            best = Some((m, y));
        }
    }
    best.ok_or_else(|| Error::Invalid("empty method list".into()))
}

/// Uniform grid `f_min + k·step` up to `f_max`, both ends included when the
/// range is a whole number of steps.
pub fn fidelity_grid(f_min: f64, f_max: f64, step: f64) -> Result<Vec<f64>> {
    if !step.is_finite() || step <= 0.0 {
        return Err(Error::Invalid(format!("grid step {step} must be positive")));
    }
    if f_min.is_nan() || f_max.is_nan() || f_min > f_max {
        return Err(Error::Invalid(format!(
            "grid start {f_min} above end {f_max}"
        )));
    }
    let span = ((f_max - f_min) / step + 1e-9).floor();
    if span + 1.0 > GRID_CAP as f64 {
        return Err(Error::Capacity {
            what: "yield-curve grid points",
            requested: (span + 1.0).min(u64::MAX as f64) as u64,
            limit: GRID_CAP as u64,
        });
    }
    Ok((0..=span as usize)
        .map(|k| (f_min + k as f64 * step).min(f_max))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct YieldCurve {
    pub n_parties: usize,
    pub grid: Vec<f64>,
    pub methods: Vec<MethodSpec>,
    /// `raw[k][j]` is the yield of method `k` at grid point `j`.
    pub raw: Vec<Vec<f64>>,
    pub clamped: Vec<Vec<f64>>,
}

/// Evaluates every method on the grid. Points are computed in parallel and
/// stored in grid order.
pub fn yield_curve(
    n_parties: usize,
    f_min: f64,
    f_max: f64,
    step: f64,
    methods: &[MethodSpec],
) -> Result<YieldCurve> {
    if methods.is_empty() {
        return Err(Error::Invalid("empty method list".into()));
    }
    if let Some(m) = methods.iter().find(|m| !m.supports(n_parties)) {
        return Err(Error::Dimension(format!(
            "{m} is not defined for {n_parties} parties"
        )));
    }
    let grid = fidelity_grid(f_min, f_max, step)?;
    let rows: Vec<Vec<f64>> = grid
        .par_iter()
        .map(|&f| methods.iter().map(|m| m.raw_yield(n_parties, f)).collect())
        .collect::<Result<_>>()?;
    let raw: Vec<Vec<f64>> = (0..methods.len())
        .map(|k| rows.iter().map(|r| r[k]).collect())
        .collect();
    let clamped = raw
        .iter()
        .map(|v| v.iter().map(|y| y.max(0.0)).collect())
        .collect();
    Ok(YieldCurve {
        n_parties,
        grid,
        methods: methods.to_vec(),
        raw,
        clamped,
    })
}

/// Grid spacing of the sweep in [`find_knee`].
pub const KNEE_SWEEP_STEP: f64 = 1e-3;
pub const KNEE_TOL: f64 = 1e-4;

/// Fidelity above which recurrence is never used: the sweep over
/// `[0.5, 1]` finds the last point that still uses a recurrence round, and
/// bisection narrows the switch to within [`KNEE_TOL`]. `None` when no point
/// uses recurrence.
pub fn find_knee(max_rounds: usize, variant: RecurrenceVariant) -> Result<Option<f64>> {
    let grid = fidelity_grid(0.5, 1.0, KNEE_SWEEP_STEP)?;
    let rounds: Vec<usize> = grid
        .par_iter()
        .map(|&f| recurrence_then_hashing(f, max_rounds, variant).map(|r| r.1))
        .collect::<Result<_>>()?;
    let Some(last) = rounds.iter().rposition(|&r| r > 0) else {
        return Ok(None);
    };
    if last + 1 == grid.len() {
        return Ok(None);
    }
    let (mut lo, mut hi) = (grid[last], grid[last + 1]);
    while hi - lo > KNEE_TOL / 2.0 {
        let mid = 0.5 * (lo + hi);
        if recurrence_then_hashing(mid, max_rounds, variant)?.1 > 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(hi))
}
