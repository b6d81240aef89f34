//! Finite-size simulation of multiparty hashing.
//!
//! A block of `m` states is drawn from the single-state distribution. Phase A
//! runs random-subset MXOR rounds whose targets have their amplitudes
//! measured; the amplitude strings are then decoded jointly. Phase B runs
//! the mirrored rounds for the phase string, conditioning the phase prior of
//! each state on its decoded amplitudes. Both decoders are exact maximum
//! posterior searches over the solution coset of the recorded parities.
//!
//! Every label update is tracked as a linear map over the hidden labels, so a
//! transcript can be replayed and checked without the random source.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::h2;
use crate::catlabel::{mxor, CatLabel};
use crate::ensemble::{bit_marginals, SingleDistribution};
use crate::error::{Error, Result};
use crate::gf2::{map_search, BitRow, SearchFailure, SearchResult};

/// Largest `m·(N−1)` the decoder accepts.
pub const SOLVER_CAP: usize = 1 << 14;
/// Largest `m·2^{N−1}` prior table the amplitude decoder builds.
pub const PRIOR_TABLE_CAP: usize = 1 << 24;
/// Default branch-and-bound node budget per decode.
pub const DEFAULT_SEARCH_NODES: u64 = 1 << 24;

/// Default number of extra rounds in each phase: `⌈2·log₂ m⌉`.
pub fn default_safety_bits(m: usize) -> usize {
    if m < 2 {
        return 0;
    }
    (2.0 * (m as f64).log2()).ceil() as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashingParams {
    pub n_parties: usize,
    pub block_size: usize,
    pub safety_bits: usize,
    pub search_nodes: u64,
}

impl HashingParams {
    pub fn new(n_parties: usize, block_size: usize) -> Self {
        Self {
            n_parties,
            block_size,
            safety_bits: default_safety_bits(block_size),
            search_nodes: DEFAULT_SEARCH_NODES,
        }
    }

    pub fn with_safety_bits(mut self, safety_bits: usize) -> Self {
        self.safety_bits = safety_bits;
        self
    }

    pub fn with_search_nodes(mut self, nodes: u64) -> Self {
        self.search_nodes = nodes;
        self
    }

    fn validate(&self, single: &SingleDistribution) -> Result<()> {
        if single.n_parties() != self.n_parties {
            return Err(Error::Dimension(format!(
                "{}-party distribution for a {}-party run",
                single.n_parties(),
                self.n_parties
            )));
        }
        if self.block_size == 0 {
            return Err(Error::Invalid("block size 0".into()));
        }
        let unknowns = self.block_size.saturating_mul(self.n_parties - 1);
        if unknowns > SOLVER_CAP {
            return Err(Error::Capacity {
                what: "hashing decoder unknowns",
                requested: unknowns as u64,
                limit: SOLVER_CAP as u64,
            });
        }
        let table = self.block_size.saturating_mul(1 << (self.n_parties - 1));
        if table > PRIOR_TABLE_CAP {
            return Err(Error::Capacity {
                what: "amplitude prior table",
                requested: table as u64,
                limit: PRIOR_TABLE_CAP as u64,
            });
        }
        Ok(())
    }
}

/// Round counts `(k_A, k_B)` for a block of `m` states.
pub fn round_counts(single: &SingleDistribution, m: usize, safety_bits: usize) -> (usize, usize) {
    let marg = bit_marginals(single);
    let h_amp = marg.amp_one.iter().map(|&p| h2(p)).fold(0.0, f64::max);
    let h_ph = h2(marg.phase_one);
    let count = |h: f64| (m as f64 * h - 1e-9).ceil().max(0.0) as usize + safety_bits;
    (count(h_amp), count(h_ph))
}

/// One amplitude round: every source in `subset` is MXORed into `target`,
/// whose amplitude bits are then measured.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmpRound {
    pub subset: BitRow,
    pub target: usize,
    pub outcome: u32,
}

/// One phase round: `measured` is MXORed into every other member of
/// `subset` (whose amplitudes pick up its amplitudes), then its phase is
/// measured.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseRound {
    pub subset: BitRow,
    pub measured: usize,
    pub outcome: bool,
}

/// Everything needed to replay a simulation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashingRun {
    pub n_parties: usize,
    pub seed: u64,
    pub safety_bits: usize,
    pub hidden: Vec<CatLabel>,
    pub amp_rounds: Vec<AmpRound>,
    pub phase_rounds: Vec<PhaseRound>,
}

impl HashingRun {
    pub fn block_size(&self) -> usize {
        self.hidden.len()
    }

    /// Measured states in measurement order.
    pub fn consumed(&self) -> Vec<usize> {
        self.amp_rounds
            .iter()
            .map(|r| r.target)
            .chain(self.phase_rounds.iter().map(|r| r.measured))
            .collect()
    }

    pub fn survivors(&self) -> Vec<usize> {
        let mut live = vec![true; self.block_size()];
        self.consumed().into_iter().for_each(|i| live[i] = false);
        (0..live.len()).filter(|&i| live[i]).collect()
    }

    /// Replays every round against the hidden labels and checks each
    /// recorded outcome both against the evolved labels and against the
    /// tracked linear maps.
    pub fn replay(&self) -> Result<Tracker> {
        let mut t = Tracker::new(&self.hidden)?;
        for (k, r) in self.amp_rounds.iter().enumerate() {
            let got = t.amp_round(&r.subset, r.target)?;
            if got != r.outcome {
                return Err(Error::Internal(format!(
                    "amplitude round {k} outcome mismatch"
                )));
            }
        }
        for (k, r) in self.phase_rounds.iter().enumerate() {
            let got = t.phase_round(&r.subset, r.measured)?;
            if got != r.outcome {
                return Err(Error::Internal(format!("phase round {k} outcome mismatch")));
            }
        }
        Ok(t)
    }
}

/// Evolving labels plus their linear dependence on the hidden labels.
#[derive(Debug, Clone)]
pub struct Tracker {
    hidden_amps: Vec<u32>,
    hidden_phases: Vec<u32>,
    current: Vec<CatLabel>,
    live: Vec<bool>,
    /// `lamp[s]·x` is the current amplitude string of state `s`.
    pub lamp: Vec<BitRow>,
    /// `lph[s]·z` is the current phase of state `s`.
    pub lph: Vec<BitRow>,
}

impl Tracker {
    pub fn new(hidden: &[CatLabel]) -> Result<Self> {
        let m = hidden.len();
        if m == 0 {
            return Err(Error::Invalid("empty block".into()));
        }
        let n = hidden[0].n_parties();
        if hidden.iter().any(|l| l.n_parties() != n) {
            return Err(Error::Dimension("mixed party counts in block".into()));
        }
        Ok(Self {
            hidden_amps: hidden.iter().map(|l| l.amp_bits()).collect(),
            hidden_phases: hidden.iter().map(|l| l.phase() as u32).collect(),
            current: hidden.to_vec(),
            live: vec![true; m],
            lamp: (0..m).map(|i| BitRow::unit(m, i)).collect(),
            lph: (0..m).map(|i| BitRow::unit(m, i)).collect(),
        })
    }

    pub fn current(&self) -> &[CatLabel] {
        &self.current
    }

    pub fn is_live(&self, i: usize) -> bool {
        self.live[i]
    }

    pub fn live(&self) -> Vec<usize> {
        (0..self.live.len()).filter(|&i| self.live[i]).collect()
    }

    fn check_subset(&self, subset: &BitRow, special: usize) -> Result<()> {
        if subset.len() != self.live.len() {
            return Err(Error::Dimension(
                "subset width differs from block size".into(),
            ));
        }
        if !subset.get(special) || subset.count_ones() < 2 {
            return Err(Error::Invalid(
                "subset must hold the special state and one other".into(),
            ));
        }
        if subset.ones().any(|i| !self.live[i]) {
            return Err(Error::Invalid("subset contains a consumed state".into()));
        }
        Ok(())
    }

    /// Applies an amplitude round and returns the measured amplitude bits.
    pub fn amp_round(&mut self, subset: &BitRow, target: usize) -> Result<u32> {
        self.check_subset(subset, target)?;
        for s in subset.ones().filter(|&s| s != target) {
            let (src, tgt) = mxor(self.current[s], self.current[target])?;
            self.current[s] = src;
            self.current[target] = tgt;
            let row = self.lamp[s].clone();
            self.lamp[target].xor_assign(&row);
            let row = self.lph[target].clone();
            self.lph[s].xor_assign(&row);
        }
        self.live[target] = false;
        let bits = self.current[target].amp_bits();
        if bits != self.lamp[target].parity_of(&self.hidden_amps)
            || bits != subset.parity_of(&self.hidden_amps)
        {
            return Err(Error::Internal(
                "amplitude parity disagrees with tracked map".into(),
            ));
        }
        Ok(bits)
    }

    /// Applies a phase round and returns the measured phase bit.
    pub fn phase_round(&mut self, subset: &BitRow, measured: usize) -> Result<bool> {
        self.check_subset(subset, measured)?;
        let before = subset
            .ones()
            .fold(0, |acc, s| acc ^ self.lph[s].parity_of(&self.hidden_phases));
        for s in subset.ones().filter(|&s| s != measured) {
            let (src, tgt) = mxor(self.current[measured], self.current[s])?;
            self.current[measured] = src;
            self.current[s] = tgt;
            let row = self.lph[s].clone();
            self.lph[measured].xor_assign(&row);
            let row = self.lamp[measured].clone();
            self.lamp[s].xor_assign(&row);
        }
        self.live[measured] = false;
        let bit = self.current[measured].phase();
        if bit as u32 != before || bit as u32 != self.lph[measured].parity_of(&self.hidden_phases) {
            return Err(Error::Internal(
                "phase parity disagrees with tracked map".into(),
            ));
        }
        Ok(bit)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FailureReason {
    /// Several assignments share the maximum posterior.
    Ambiguous,
    /// The decoded labels of some survivor differ from the truth.
    Mismatch,
    /// The decoder's node budget ran out.
    SearchLimit,
    /// Fewer than two live states remained for a round.
    Exhausted,
}

impl FailureReason {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureReason::Ambiguous => "ambiguous",
            FailureReason::Mismatch => "mismatch",
            FailureReason::SearchLimit => "search-limit",
            FailureReason::Exhausted => "exhausted",
        }
    }
}

impl std::fmt::Display for FailureReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Result of one decoder call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decode<T> {
    Unique(T),
    Ambiguous,
    SearchLimit,
}

#[derive(Debug, Clone)]
pub struct HashingOutcome {
    pub success: bool,
    pub failure: Option<FailureReason>,
    /// Survivors per input state on success, zero otherwise.
    pub empirical_yield: f64,
    pub survivors: usize,
    pub run: HashingRun,
}

impl HashingOutcome {
    pub fn rounds_a(&self) -> usize {
        self.run.amp_rounds.len()
    }

    pub fn rounds_b(&self) -> usize {
        self.run.phase_rounds.len()
    }

    pub fn consumed(&self) -> usize {
        self.rounds_a() + self.rounds_b()
    }
}

/// `joint[phase][amp_bits]`.
fn joint_prior(single: &SingleDistribution) -> [Vec<f64>; 2] {
    let n = single.n_parties();
    let mut joint = [vec![0.0; 1 << (n - 1)], vec![0.0; 1 << (n - 1)]];
    for (code, &w) in single.probs().iter().enumerate() {
        let l = CatLabel::decode(n, code).expect("code in range");
        joint[l.phase() as usize][l.amp_bits() as usize] += w;
    }
    joint
}

fn neg_ln(p: f64) -> f64 {
    if p > 0.0 {
        -p.ln()
    } else {
        f64::INFINITY
    }
}

fn from_search(
    r: std::result::Result<SearchResult, SearchFailure>,
) -> Result<Decode<SearchResult>> {
    match r {
        Ok(s) => Ok(Decode::Unique(s)),
        Err(SearchFailure::Budget) => Ok(Decode::SearchLimit),
        Err(SearchFailure::Infeasible) => Err(Error::Internal(
            "recorded parities admit no possible assignment".into(),
        )),
        Err(SearchFailure::Inconsistent) => {
            Err(Error::Internal("recorded parities are inconsistent".into()))
        }
    }
}

/// Maximum-posterior amplitude strings given the Phase A parities.
///
/// Any tie at the optimum is reported as ambiguous.
pub fn decode_amplitudes(
    run: &HashingRun,
    single: &SingleDistribution,
    node_budget: u64,
) -> Result<Decode<Vec<u32>>> {
    let m = run.block_size();
    let rows: Vec<BitRow> = run.amp_rounds.iter().map(|r| r.subset.clone()).collect();
    let rhs: Vec<u32> = run.amp_rounds.iter().map(|r| r.outcome).collect();
    let [j0, j1] = joint_prior(single);
    let costs: Vec<f64> = j0.iter().zip(&j1).map(|(a, b)| neg_ln(a + b)).collect();
    let costs = vec![costs; m];
    Ok(
        match from_search(map_search(m, &rows, &rhs, &costs, node_budget))? {
            Decode::Unique(s) if s.ties.is_empty() => Decode::Unique(s.best),
            Decode::Unique(_) => Decode::Ambiguous,
            Decode::Ambiguous => Decode::Ambiguous,
            Decode::SearchLimit => Decode::SearchLimit,
        },
    )
}

/// Maximum-posterior original phases given the Phase B parities, with each
/// state's phase prior conditioned on its decoded amplitude string.
///
/// `phase_rows[k]` is the tracked map of the state measured in round `k`.
/// Ties count as ambiguous only when they disagree on a survivor's phase.
pub fn decode_phases(
    run: &HashingRun,
    single: &SingleDistribution,
    amps: &[u32],
    phase_rows: &[BitRow],
    survivor_rows: &[BitRow],
    node_budget: u64,
) -> Result<Decode<Vec<bool>>> {
    let m = run.block_size();
    let joint = joint_prior(single);
    let prior = |i: usize, b: usize| {
        let a = amps[i] as usize;
        let pa = joint[0][a] + joint[1][a];
        if pa > 0.0 {
            joint[b][a] / pa
        } else {
            0.5
        }
    };

    // only columns that appear in a measured or surviving map matter
    let mut relevant = BitRow::zeros(m);
    phase_rows
        .iter()
        .chain(survivor_rows)
        .for_each(|r| relevant.or_assign(r));
    let cols: Vec<usize> = relevant.ones().collect();
    let mut local = vec![usize::MAX; m];
    cols.iter().enumerate().for_each(|(k, &c)| local[c] = k);
    let compress = |r: &BitRow| BitRow::from_indices(cols.len(), r.ones().map(|c| local[c]));

    let rows: Vec<BitRow> = phase_rows.iter().map(compress).collect();
    let rhs: Vec<u32> = run.phase_rounds.iter().map(|r| r.outcome as u32).collect();
    let costs: Vec<Vec<f64>> = cols
        .iter()
        .map(|&c| vec![neg_ln(prior(c, 0)), neg_ln(prior(c, 1))])
        .collect();
    let s = match from_search(map_search(cols.len(), &rows, &rhs, &costs, node_budget))? {
        Decode::Unique(s) => s,
        Decode::Ambiguous => return Ok(Decode::Ambiguous),
        Decode::SearchLimit => return Ok(Decode::SearchLimit),
    };
    let surv: Vec<BitRow> = survivor_rows.iter().map(compress).collect();
    let key = |v: &[u32]| surv.iter().map(|r| r.parity_of(v)).collect::<Vec<_>>();
    if s.ties_truncated || s.ties.iter().any(|t| key(t) != key(&s.best)) {
        return Ok(Decode::Ambiguous);
    }
    let mut z: Vec<bool> = (0..m).map(|i| prior(i, 1) > prior(i, 0)).collect();
    cols.iter().zip(&s.best).for_each(|(&c, &v)| z[c] = v == 1);
    Ok(Decode::Unique(z))
}

fn sample_subset(rng: &mut ChaCha8Rng, live: &[usize], m: usize) -> Option<BitRow> {
    if live.len() < 2 {
        return None;
    }
    loop {
        let chosen: Vec<usize> = live.iter().copied().filter(|_| rng.gen::<bool>()).collect();
        if chosen.len() >= 2 {
            return Some(BitRow::from_indices(m, chosen));
        }
    }
}

/// Runs one hashing simulation.
pub fn simulate_hashing(
    params: &HashingParams,
    single: &SingleDistribution,
    seed: u64,
) -> Result<HashingOutcome> {
    params.validate(single)?;
    let m = params.block_size;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick = WeightedIndex::new(single.probs())
        .map_err(|e| Error::Invalid(format!("single-state distribution: {e}")))?;
    let hidden = (0..m)
        .map(|_| CatLabel::decode(params.n_parties, pick.sample(&mut rng)))
        .collect::<Result<Vec<_>>>()?;

    let mut run = HashingRun {
        n_parties: params.n_parties,
        seed,
        safety_bits: params.safety_bits,
        hidden,
        amp_rounds: Vec::new(),
        phase_rounds: Vec::new(),
    };
    let mut tracker = Tracker::new(&run.hidden)?;
    let (k_a, k_b) = round_counts(single, m, params.safety_bits);

    let fail = |run: HashingRun, reason| {
        Ok(HashingOutcome {
            success: false,
            failure: Some(reason),
            empirical_yield: 0.0,
            survivors: 0,
            run,
        })
    };

    // a lone state can only be certified when no parities are needed
    if m == 1 {
        if k_a > 0 || k_b > 0 {
            return fail(run, FailureReason::Ambiguous);
        }
        return Ok(HashingOutcome {
            success: true,
            failure: None,
            empirical_yield: 1.0,
            survivors: 1,
            run,
        });
    }

    for _ in 0..k_a {
        let Some(subset) = sample_subset(&mut rng, &tracker.live(), m) else {
            return fail(run, FailureReason::Exhausted);
        };
        let target = subset.first_one().expect("non-empty subset");
        let outcome = tracker.amp_round(&subset, target)?;
        run.amp_rounds.push(AmpRound {
            subset,
            target,
            outcome,
        });
    }
    let amps = match decode_amplitudes(&run, single, params.search_nodes)? {
        Decode::Unique(a) => a,
        Decode::Ambiguous => return fail(run, FailureReason::Ambiguous),
        Decode::SearchLimit => return fail(run, FailureReason::SearchLimit),
    };

    for _ in 0..k_b {
        let Some(subset) = sample_subset(&mut rng, &tracker.live(), m) else {
            return fail(run, FailureReason::Exhausted);
        };
        let measured = subset.first_one().expect("non-empty subset");
        let outcome = tracker.phase_round(&subset, measured)?;
        run.phase_rounds.push(PhaseRound {
            subset,
            measured,
            outcome,
        });
    }
    let survivors = tracker.live();
    let phase_rows: Vec<BitRow> = run
        .phase_rounds
        .iter()
        .map(|r| tracker.lph[r.measured].clone())
        .collect();
    let survivor_rows: Vec<BitRow> = survivors.iter().map(|&s| tracker.lph[s].clone()).collect();
    let phases = match decode_phases(
        &run,
        single,
        &amps,
        &phase_rows,
        &survivor_rows,
        params.search_nodes,
    )? {
        Decode::Unique(z) => z,
        Decode::Ambiguous => return fail(run, FailureReason::Ambiguous),
        Decode::SearchLimit => return fail(run, FailureReason::SearchLimit),
    };
    let z: Vec<u32> = phases.iter().map(|&b| b as u32).collect();

    let correct = survivors.iter().zip(&survivor_rows).all(|(&s, ph_row)| {
        let truth = tracker.current()[s];
        tracker.lamp[s].parity_of(&amps) == truth.amp_bits()
            && (ph_row.parity_of(&z) == 1) == truth.phase()
    });
    if !correct {
        return fail(run, FailureReason::Mismatch);
    }
    Ok(HashingOutcome {
        success: true,
        failure: None,
        empirical_yield: survivors.len() as f64 / m as f64,
        survivors: survivors.len(),
        run,
    })
}

/// Runs `trials` simulations with seeds `base_seed + k`, in order.
pub fn run_trials(
    params: &HashingParams,
    single: &SingleDistribution,
    base_seed: u64,
    trials: usize,
) -> Result<Vec<HashingOutcome>> {
    (0..trials as u64)
        .into_par_iter()
        .map(|k| simulate_hashing(params, single, base_seed.wrapping_add(k)))
        .collect()
}
