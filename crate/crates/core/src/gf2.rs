//! Linear algebra over GF(2) and exact maximum-posterior search over the
//! solution set of a parity system.
//!
//! Unknowns are "symbols": each column of the system carries a small vector of
//! bits (one per plane), and every row constrains all planes with the same
//! coefficients. This is what a shared random hash over several bit strings
//! looks like.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitRow {
    len: usize,
    words: Vec<u64>,
}

impl BitRow {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut row = Self::zeros(len);
        for i in indices {
            row.set(i, true);
        }
        row
    }

    pub fn unit(len: usize, i: usize) -> Self {
        Self::from_indices(len, [i])
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} of {}", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, v: bool) {
        assert!(i < self.len, "bit {i} of {}", self.len);
        let m = 1u64 << (i % 64);
        if v {
            self.words[i / 64] |= m;
        } else {
            self.words[i / 64] &= !m;
        }
    }

    pub fn xor_assign(&mut self, other: &BitRow) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn or_assign(&mut self, other: &BitRow) {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter_mut()
            .zip(&other.words)
            .for_each(|(a, b)| *a |= b);
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(k, w)| k * 64 + w.trailing_zeros() as usize)
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(k * 64 + t)
            })
        })
    }

    /// XOR of `values[i]` over the set bits.
    pub fn parity_of(&self, values: &[u32]) -> u32 {
        self.ones().fold(0, |acc, i| acc ^ values[i])
    }

    /// Lowercase hex, least significant nibble (bits 0..4) last.
    pub fn to_hex(&self) -> String {
        let nibbles = self.len.div_ceil(4).max(1);
        (0..nibbles)
            .rev()
            .map(|n| {
                let v = (self.words[n * 4 / 64] >> ((n * 4) % 64)) & 0xf;
                char::from_digit(v as u32, 16).expect("nibble")
            })
            .collect()
    }

    pub fn from_hex(len: usize, hex: &str) -> Result<Self> {
        let mut row = Self::zeros(len);
        for (n, c) in hex.chars().rev().enumerate() {
            let v = c
                .to_digit(16)
                .ok_or_else(|| Error::Invalid(format!("bad hex digit {c:?}")))?;
            for b in 0..4 {
                if (v >> b) & 1 == 1 {
                    let i = n * 4 + b;
                    if i >= len {
                        return Err(Error::Invalid(format!("hex mask wider than {len} bits")));
                    }
                    row.set(i, true);
                }
            }
        }
        Ok(row)
    }
}

impl fmt::Debug for BitRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitRow[{}]({})", self.len, self.to_hex())
    }
}

/// Reduced row echelon form of `rows · x = rhs`, where each `rhs` entry packs
/// one bit per plane.
#[derive(Debug, Clone)]
pub struct Rref {
    n_cols: usize,
    rows: Vec<BitRow>,
    rhs: Vec<u32>,
    pivots: Vec<usize>,
}

impl Rref {
    /// Row-reduces the system. Fails if it is inconsistent.
    pub fn new(n_cols: usize, rows: &[BitRow], rhs: &[u32]) -> Result<Self> {
        if rows.len() != rhs.len() {
            return Err(Error::Dimension(format!(
                "{} rows with {} right-hand sides",
                rows.len(),
                rhs.len()
            )));
        }
        let mut rs: Vec<BitRow> = Vec::with_capacity(rows.len());
        let mut bs: Vec<u32> = Vec::with_capacity(rows.len());
        let mut pivots: Vec<usize> = Vec::new();
        for (row, &b) in rows.iter().zip(rhs) {
            if row.len() != n_cols {
                return Err(Error::Dimension(format!(
                    "row of width {} in a {n_cols}-column system",
                    row.len()
                )));
            }
            let mut r = row.clone();
            let mut b = b;
            for (k, &p) in pivots.iter().enumerate() {
                if r.get(p) {
                    r.xor_assign(&rs[k]);
                    b ^= bs[k];
                }
            }
            match r.first_one() {
                None if b != 0 => {
                    return Err(Error::Invalid("inconsistent parity system".into()));
                }
                None => {}
                Some(p) => {
                    for k in 0..rs.len() {
                        if rs[k].get(p) {
                            rs[k].xor_assign(&r);
                            bs[k] ^= b;
                        }
                    }
                    rs.push(r);
                    bs.push(b);
                    pivots.push(p);
                }
            }
        }
        Ok(Self {
            n_cols,
            rows: rs,
            rhs: bs,
            pivots,
        })
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn free_columns(&self) -> Vec<usize> {
        let mut is_pivot = vec![false; self.n_cols];
        self.pivots.iter().for_each(|&p| is_pivot[p] = true);
        (0..self.n_cols).filter(|&c| !is_pivot[c]).collect()
    }

    /// Completes a solution from values of the free columns (other entries of
    /// `values` are overwritten).
    pub fn complete(&self, values: &mut [u32]) {
        for ((row, &b), &p) in self.rows.iter().zip(&self.rhs).zip(&self.pivots) {
            let v = row
                .ones()
                .filter(|&c| c != p)
                .fold(b, |acc, c| acc ^ values[c]);
            values[p] = v;
        }
    }
}

/// Why a maximum-posterior search gave no unique answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchFailure {
    /// The node budget ran out before optimality was proven.
    Budget,
    /// No assignment has non-zero prior probability.
    Infeasible,
    /// The parity system has no solution at all.
    Inconsistent,
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub best: Vec<u32>,
    /// Negative log posterior (up to a constant), in nats.
    pub cost: f64,
    /// Other assignments whose cost is within the tie tolerance of `best`.
    pub ties: Vec<Vec<u32>>,
    /// Set when more ties existed than were kept.
    pub ties_truncated: bool,
    pub nodes: u64,
}

/// Costs within this many nats of the optimum count as ties.
pub const TIE_TOL: f64 = 1e-9;
const MAX_TIES: usize = 64;
const MAX_INFO_SETS: usize = 6;

/// Column-order Gaussian elimination; pivots are the earliest independent
/// columns. Returns `None` when the system is inconsistent.
fn eliminate(
    n_cols: usize,
    mut rows: Vec<BitRow>,
    mut rhs: Vec<u32>,
) -> Option<(Vec<BitRow>, Vec<u32>, Vec<usize>)> {
    let mut pivots = Vec::new();
    for col in 0..n_cols {
        let rank = pivots.len();
        if rank == rows.len() {
            break;
        }
        let Some(i) = (rank..rows.len()).find(|&i| rows[i].get(col)) else {
            continue;
        };
        rows.swap(i, rank);
        rhs.swap(i, rank);
        for j in 0..rows.len() {
            if j != rank && rows[j].get(col) {
                let (a, b) = if j < rank {
                    let (lo, hi) = rows.split_at_mut(rank);
                    (&mut lo[j], &hi[0])
                } else {
                    let (lo, hi) = rows.split_at_mut(j);
                    (&mut hi[0], &lo[rank])
                };
                a.xor_assign(b);
                rhs[j] ^= rhs[rank];
            }
        }
        pivots.push(col);
    }
    let rank = pivots.len();
    if rhs[rank..].iter().any(|&b| b != 0) {
        return None;
    }
    rows.truncate(rank);
    rhs.truncate(rank);
    Some((rows, rhs, pivots))
}

/// One choice of pivot columns. Free columns determine the pivots.
struct InfoSet {
    free: Vec<usize>,
    pivots: Vec<usize>,
    /// Pivot values with every free column at its cheapest value.
    base_pivot_values: Vec<u32>,
    /// Rows whose pivot depends on each free column.
    col_rows: Vec<Vec<usize>>,
}

impl InfoSet {
    fn build(
        n_cols: usize,
        rows: &[BitRow],
        rhs: &[u32],
        order: &[usize],
        base: &[u32],
    ) -> Option<Self> {
        let mut pos = vec![0; n_cols];
        order.iter().enumerate().for_each(|(k, &c)| pos[c] = k);
        let permuted: Vec<BitRow> = rows
            .iter()
            .map(|r| BitRow::from_indices(n_cols, r.ones().map(|c| pos[c])))
            .collect();
        let (red, red_rhs, piv) = eliminate(n_cols, permuted, rhs.to_vec())?;
        let mut is_pivot = vec![false; n_cols];
        piv.iter().for_each(|&p| is_pivot[p] = true);
        let free_pos: Vec<usize> = (0..n_cols).filter(|&k| !is_pivot[k]).collect();
        let mut slot = vec![usize::MAX; n_cols];
        free_pos.iter().enumerate().for_each(|(i, &k)| slot[k] = i);
        let mut col_rows = vec![Vec::new(); free_pos.len()];
        let mut base_pivot_values = red_rhs;
        for (r, row) in red.iter().enumerate() {
            for k in row.ones().filter(|&k| k != piv[r]) {
                col_rows[slot[k]].push(r);
                base_pivot_values[r] ^= base[order[k]];
            }
        }
        Some(Self {
            free: free_pos.iter().map(|&k| order[k]).collect(),
            pivots: piv.iter().map(|&k| order[k]).collect(),
            base_pivot_values,
            col_rows,
        })
    }
}

/// Exact search for the assignment that minimizes `Σ_c cost[c][x_c]` over
/// all solutions of `rows · x = rhs`, where each `rhs` entry packs one bit
/// per plane and `costs[c]` lists the cost of each symbol value of column `c`
/// (`f64::INFINITY` for impossible values).
///
/// Costs are measured as excess over each column's cheapest value. Several
/// information sets are chosen, disjoint where the rank allows. For a
/// threshold `T`, every free-part pattern of excess at most `T` is
/// enumerated on each set, and its pivots are filled in. A solution not yet
/// seen has excess above `T` on every set, so its total excess exceeds
/// `g·T/μ`, where `g` counts the sets and `μ` is the largest number of sets
/// sharing one column. The threshold rises until that bound clears the best
/// excess found by more than the tie tolerance.
pub fn map_search(
    n_cols: usize,
    rows: &[BitRow],
    rhs: &[u32],
    costs: &[Vec<f64>],
    node_budget: u64,
) -> Result<SearchResult, SearchFailure> {
    assert_eq!(costs.len(), n_cols, "one cost vector per column");
    assert_eq!(rows.len(), rhs.len(), "one right-hand side per row");

    let mut base = vec![0u32; n_cols];
    let mut floor = 0.0;
    let mut excess: Vec<Vec<f64>> = Vec::with_capacity(n_cols);
    for (c, cs) in costs.iter().enumerate() {
        let (v, &min) = cs
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .ok_or(SearchFailure::Infeasible)?;
        if !min.is_finite() {
            return Err(SearchFailure::Infeasible);
        }
        base[c] = v as u32;
        floor += min;
        excess.push(cs.iter().map(|&x| x - min).collect());
    }
    // smallest excess of any alternative value; zero marks an erasure
    let gap: Vec<f64> = (0..n_cols)
        .map(|c| {
            (0..excess[c].len())
                .filter(|&v| v as u32 != base[c])
                .map(|v| excess[c][v])
                .fold(f64::INFINITY, f64::min)
        })
        .collect();

    let sets =
        choose_info_sets(n_cols, rows, rhs, &base, &gap).ok_or(SearchFailure::Inconsistent)?;
    let mut cover = vec![0usize; n_cols];
    sets.iter()
        .flat_map(|s| &s.free)
        .for_each(|&c| cover[c] += 1);
    let mu = cover.iter().copied().max().unwrap_or(0).max(1);
    let ratio = sets.len() as f64 / mu as f64;

    let mut st = Enum {
        excess: &excess,
        base: &base,
        x: base.clone(),
        best: None,
        best_excess: f64::INFINITY,
        ties: Vec::new(),
        ties_truncated: false,
        nodes: 0,
        budget: node_budget,
        out_of_budget: false,
        next_t: f64::INFINITY,
        threshold: 0.0,
    };
    loop {
        st.next_t = f64::INFINITY;
        let mut exhaustive = false;
        for set in &sets {
            let before = st.next_t;
            st.next_t = f64::INFINITY;
            st.run(set);
            if st.out_of_budget {
                return Err(SearchFailure::Budget);
            }
            exhaustive |= st.next_t.is_infinite();
            st.next_t = st.next_t.min(before);
        }
        if exhaustive || st.best_excess + TIE_TOL <= ratio * st.threshold {
            break;
        }
        st.threshold = st.next_t;
    }
    match st.best {
        Some(best) => Ok(SearchResult {
            best,
            cost: floor + st.best_excess,
            ties: st.ties.into_iter().map(|(_, v)| v).collect(),
            ties_truncated: st.ties_truncated,
            nodes: st.nodes,
        }),
        None => Err(SearchFailure::Infeasible),
    }
}

/// Picks the prefix of greedily built information sets with the best
/// `g/μ` ratio. Erasure columns and columns already free in earlier sets
/// are preferred as pivots, then the least reliable columns.
fn choose_info_sets(
    n_cols: usize,
    rows: &[BitRow],
    rhs: &[u32],
    base: &[u32],
    gap: &[f64],
) -> Option<Vec<InfoSet>> {
    let mut sets: Vec<InfoSet> = Vec::new();
    let mut cover = vec![0usize; n_cols];
    let mut best_len = 1;
    let mut best_ratio = 0.0;
    for _ in 0..MAX_INFO_SETS {
        let mut order: Vec<usize> = (0..n_cols).collect();
        order.sort_by(|&a, &b| {
            let erasure = |c: usize| gap[c] <= TIE_TOL;
            erasure(b)
                .cmp(&erasure(a))
                .then(cover[b].cmp(&cover[a]))
                .then(gap[a].total_cmp(&gap[b]))
                .then(a.cmp(&b))
        });
        let set = InfoSet::build(n_cols, rows, rhs, &order, base)?;
        if sets.iter().any(|s| s.free == set.free) {
            break;
        }
        set.free.iter().for_each(|&c| cover[c] += 1);
        sets.push(set);
        let mu = cover.iter().copied().max().unwrap_or(0).max(1);
        let ratio = sets.len() as f64 / mu as f64;
        if ratio > best_ratio + 1e-12 {
            best_ratio = ratio;
            best_len = sets.len();
        }
        if sets[0].pivots.is_empty() {
            break;
        }
    }
    sets.truncate(best_len);
    Some(sets)
}

struct Enum<'a> {
    excess: &'a [Vec<f64>],
    base: &'a [u32],
    x: Vec<u32>,
    best: Option<Vec<u32>>,
    best_excess: f64,
    ties: Vec<(f64, Vec<u32>)>,
    ties_truncated: bool,
    nodes: u64,
    budget: u64,
    out_of_budget: bool,
    /// Smallest free-part excess skipped at the current threshold.
    next_t: f64,
    threshold: f64,
}

impl Enum<'_> {
    fn run(&mut self, set: &InfoSet) {
        // alternatives per free column, cheapest first
        let alts: Vec<Vec<(u32, f64)>> = set
            .free
            .iter()
            .map(|&c| {
                let mut a: Vec<(u32, f64)> = (0..self.excess[c].len() as u32)
                    .filter(|&v| v != self.base[c] && self.excess[c][v as usize].is_finite())
                    .map(|v| (v, self.excess[c][v as usize]))
                    .collect();
                a.sort_by(|p, q| p.1.total_cmp(&q.1));
                a
            })
            .collect();
        let mut pv = set.base_pivot_values.clone();
        let mut pivot_excess: f64 = set
            .pivots
            .iter()
            .zip(&pv)
            .map(|(&p, &v)| self.excess[p][v as usize])
            .sum();
        self.x.copy_from_slice(self.base);
        self.dfs(set, &alts, 0, 0.0, &mut pv, &mut pivot_excess);
    }

    fn dfs(
        &mut self,
        set: &InfoSet,
        alts: &[Vec<(u32, f64)>],
        start: usize,
        acc: f64,
        pv: &mut [u32],
        pex: &mut f64,
    ) {
        self.nodes += 1;
        if self.nodes > self.budget {
            self.out_of_budget = true;
            return;
        }
        let total = acc + *pex;
        if total <= self.best_excess + TIE_TOL {
            for (&p, &v) in set.pivots.iter().zip(pv.iter()) {
                self.x[p] = v;
            }
            self.offer(total);
        }
        for k in start..set.free.len() {
            let c = set.free[k];
            for &(v, e) in &alts[k] {
                let next = acc + e;
                if next > self.threshold + TIE_TOL {
                    self.next_t = self.next_t.min(next);
                    break;
                }
                let delta = v ^ self.base[c];
                self.flip(set, k, delta, pv, pex);
                self.x[c] = v;
                self.dfs(set, alts, k + 1, next, pv, pex);
                self.x[c] = self.base[c];
                self.flip(set, k, delta, pv, pex);
                if self.out_of_budget {
                    return;
                }
            }
        }
    }

    fn flip(&self, set: &InfoSet, k: usize, delta: u32, pv: &mut [u32], pex: &mut f64) {
        for &r in &set.col_rows[k] {
            let p = set.pivots[r];
            *pex -= self.excess[p][pv[r] as usize];
            pv[r] ^= delta;
            *pex += self.excess[p][pv[r] as usize];
        }
    }

    fn offer(&mut self, total: f64) {
        if !total.is_finite() {
            return;
        }
        if self.best.as_deref() == Some(&self.x[..]) || self.ties.iter().any(|(_, t)| *t == self.x)
        {
            return;
        }
        if total < self.best_excess - TIE_TOL {
            if let Some(old) = self.best.take() {
                self.ties.push((self.best_excess, old));
            }
            self.ties.retain(|(c, _)| *c <= total + TIE_TOL);
            self.best = Some(self.x.clone());
            self.best_excess = total;
        } else if self.best.is_none() {
            self.best = Some(self.x.clone());
            self.best_excess = total;
        } else if self.ties.len() < MAX_TIES {
            self.ties.push((total, self.x.clone()));
        } else {
            self.ties_truncated = true;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bitrow_basics() {
        let mut r = BitRow::from_indices(130, [0, 64, 129]);
        assert_eq!(r.count_ones(), 3);
        assert_eq!(r.ones().collect::<Vec<_>>(), vec![0, 64, 129]);
        r.xor_assign(&BitRow::unit(130, 64));
        assert_eq!(r.ones().collect::<Vec<_>>(), vec![0, 129]);
        assert_eq!(r.first_one(), Some(0));
        assert!(BitRow::zeros(5).is_zero());
    }

    #[test]
    fn hex_round_trip() {
        let r = BitRow::from_indices(10, [0, 3, 9]);
        assert_eq!(r.to_hex(), "209");
        assert_eq!(BitRow::from_hex(10, "209").unwrap(), r);
        assert!(BitRow::from_hex(10, "g").is_err());
        assert!(BitRow::from_hex(3, "f").is_err());
    }

    #[test]
    fn rref_solves_full_rank() {
        // x0^x1 = 1, x1 = 1, x1^x2 = 0  → x = (0,1,1)
        let rows = vec![
            BitRow::from_indices(3, [0, 1]),
            BitRow::from_indices(3, [1]),
            BitRow::from_indices(3, [1, 2]),
        ];
        let sys = Rref::new(3, &rows, &[1, 1, 0]).unwrap();
        assert_eq!(sys.rank(), 3);
        let mut v = vec![0; 3];
        sys.complete(&mut v);
        assert_eq!(v, vec![0, 1, 1]);
    }

    #[test]
    fn rref_detects_inconsistency() {
        let rows = vec![
            BitRow::from_indices(2, [0, 1]),
            BitRow::from_indices(2, [0, 1]),
        ];
        assert!(Rref::new(2, &rows, &[1, 0]).is_err());
        let sys = Rref::new(2, &rows, &[1, 1]).unwrap();
        assert_eq!(sys.rank(), 1);
        assert_eq!(sys.free_columns(), vec![1]);
    }

    #[test]
    fn search_prefers_low_weight() {
        // one parity over 4 bits equal to 1; each bit costs 1 if set
        let rows = vec![BitRow::from_indices(4, 0..4)];
        let costs = vec![
            vec![0.0, 1.0],
            vec![0.0, 1.0],
            vec![0.0, 1.5],
            vec![0.0, 1.2],
        ];
        let r = map_search(4, &rows, &[1], &costs, 1000).unwrap();
        assert_eq!(r.best.iter().filter(|&&v| v == 1).count(), 1);
        // bits 0 and 1 tie
        assert_eq!(r.ties.len(), 1);
        assert!((r.cost - 1.0).abs() < 1e-12);
    }

    #[test]
    fn search_failures() {
        let rows = vec![BitRow::from_indices(30, 0..30)];
        let costs = vec![vec![0.0, 1.0]; 30];
        assert_eq!(
            map_search(30, &rows, &[1], &costs, 10).unwrap_err(),
            SearchFailure::Budget
        );
        let twice = vec![rows[0].clone(), rows[0].clone()];
        assert_eq!(
            map_search(30, &twice, &[1, 0], &costs, 1000).unwrap_err(),
            SearchFailure::Inconsistent
        );
        let forced = vec![vec![0.0, f64::INFINITY]; 30];
        assert_eq!(
            map_search(30, &rows, &[1], &forced, 1000).unwrap_err(),
            SearchFailure::Infeasible
        );
    }

    #[test]
    fn search_without_rows_takes_cheapest_values() {
        let costs = vec![vec![2.0, 1.0, 3.0, 0.5], vec![0.0, 4.0, 4.0, 4.0]];
        let r = map_search(2, &[], &[], &costs, 1000).unwrap();
        assert_eq!(r.best, vec![3, 0]);
        assert!(r.ties.is_empty());
    }

    fn brute_force(
        n: usize,
        rows: &[BitRow],
        rhs: &[u32],
        costs: &[Vec<f64>],
        q: u32,
    ) -> (f64, Vec<Vec<u32>>) {
        let mut best = f64::INFINITY;
        let mut arg: Vec<(f64, Vec<u32>)> = Vec::new();
        let total = (q as usize).pow(n as u32);
        for code in 0..total {
            let x: Vec<u32> = (0..n)
                .map(|c| ((code / (q as usize).pow(c as u32)) % q as usize) as u32)
                .collect();
            if rows.iter().zip(rhs).any(|(r, &b)| r.parity_of(&x) != b) {
                continue;
            }
            let cost: f64 = x
                .iter()
                .enumerate()
                .map(|(c, &v)| costs[c][v as usize])
                .sum();
            if cost.is_finite() {
                best = best.min(cost);
                arg.push((cost, x));
            }
        }
        let opt = arg
            .into_iter()
            .filter(|(c, _)| *c <= best + TIE_TOL)
            .map(|(_, x)| x)
            .collect();
        (best, opt)
    }

    #[test]
    fn search_matches_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for trial in 0..300 {
            let n = rng.gen_range(1..=9);
            let q: u32 = if trial % 2 == 0 { 2 } else { 4 };
            let n_rows = rng.gen_range(0..=n + 1);
            let truth: Vec<u32> = (0..n).map(|_| rng.gen_range(0..q)).collect();
            let rows: Vec<BitRow> = (0..n_rows)
                .map(|_| BitRow::from_indices(n, (0..n).filter(|_| rng.gen::<bool>())))
                .collect();
            let rhs: Vec<u32> = rows.iter().map(|r| r.parity_of(&truth)).collect();
            // integer-valued costs make exact ties common
            let costs: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..q).map(|_| rng.gen_range(0..4) as f64).collect())
                .collect();
            let (best, opt) = brute_force(n, &rows, &rhs, &costs, q);
            let r = map_search(n, &rows, &rhs, &costs, 1 << 20).unwrap();
            assert!((r.cost - best).abs() < 1e-9, "trial {trial}");
            let mut found: Vec<Vec<u32>> = r.ties.clone();
            found.push(r.best.clone());
            found.sort();
            let mut want = opt;
            want.sort();
            if !r.ties_truncated {
                assert_eq!(found, want, "trial {trial}");
            }
        }
    }
}
