//! Dense state-vector oracle for the label algebra.
//!
//! Cat states are built explicitly, stabilizers are applied as operators, and
//! the multilateral XOR is applied as a permutation of basis amplitudes. This
//! is only meant for a handful of qubits; everything here is brute force.
//!
//! Qubit ordering: qubit 0 is the most significant bit of a basis index. A
//! block of cat states is laid out register by register, and within a
//! register qubit `k` belongs to party `k + 1`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::catlabel::{self, CatLabel};
use crate::error::{Error, Result};

/// Largest total qubit count the oracle will allocate.
pub const QUBIT_LIMIT: usize = 12;

/// Tolerance for state comparisons.
pub const STATE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_qubits(n_qubits)?;
        if amplitudes.len() != 1 << n_qubits {
            return Err(Error::Dimension(format!(
                "{} amplitudes for {} qubits",
                amplitudes.len(),
                n_qubits
            )));
        }
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        *amps
            .get_mut(index)
            .ok_or_else(|| Error::Invalid(format!("basis index {index}")))? =
            Complex64::new(1.0, 0.0);
        Ok(Self {
            n_qubits,
            amplitudes: amps,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() < STATE_TOL
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::Dimension(format!(
                "inner product of {}- and {}-qubit states",
                self.n_qubits, other.n_qubits
            )));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Equality up to a global phase: `| |⟨u|v⟩| - 1 | < tol`.
    pub fn same_ray(&self, other: &StateVector, tol: f64) -> Result<bool> {
        Ok((self.inner(other)?.norm() - 1.0).abs() < tol)
    }

    /// `self ⊗ other`, with `self` occupying the leading qubits.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let n = self.n_qubits + other.n_qubits;
        check_qubits(n)?;
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| a * b))
            .collect();
        Ok(StateVector {
            n_qubits: n,
            amplitudes,
        })
    }

    fn bit(&self, index: usize, qubit: usize) -> bool {
        (index >> (self.n_qubits - 1 - qubit)) & 1 == 1
    }

    fn mask(&self, qubit: usize) -> usize {
        1 << (self.n_qubits - 1 - qubit)
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if n > QUBIT_LIMIT {
        return Err(Error::Capacity {
            what: "oracle qubits",
            requested: n as u64,
            limit: QUBIT_LIMIT as u64,
        });
    }
    if n == 0 {
        return Err(Error::Invalid("zero-qubit state".into()));
    }
    Ok(())
}

/// `(|0 i_1..⟩ + (-1)^p |1 ī_1..⟩)/√2` on `N` qubits.
pub fn build_cat_state(label: CatLabel) -> Result<StateVector> {
    let n = label.n_parties();
    check_qubits(n)?;
    let mut low = 0usize;
    for j in 0..n - 1 {
        if label.amplitude(j) {
            // party j+2 is qubit j+1
            low |= 1 << (n - 2 - j);
        }
    }
    let high = ((1usize << n) - 1) ^ low;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
    amps[low] = Complex64::new(s, 0.0);
    amps[high] = Complex64::new(if label.phase() { -s } else { s }, 0.0);
    StateVector::new(n, amps)
}

/// Tensor product of cat states, one register per label.
pub fn build_block(labels: &[CatLabel]) -> Result<StateVector> {
    let (first, rest) = labels
        .split_first()
        .ok_or_else(|| Error::Invalid("empty block".into()))?;
    let n = first.n_parties();
    check_qubits(n * labels.len())?;
    rest.iter().try_fold(build_cat_state(*first)?, |acc, l| {
        if l.n_parties() != n {
            return Err(Error::Dimension("mixed party counts in block".into()));
        }
        acc.tensor(&build_cat_state(*l)?)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> DMatrix<Complex64> {
        let (o, l) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        match self {
            Pauli::I => DMatrix::from_row_slice(2, 2, &[l, o, o, l]),
            Pauli::X => DMatrix::from_row_slice(2, 2, &[o, l, l, o]),
            Pauli::Z => DMatrix::from_row_slice(2, 2, &[l, o, o, -l]),
        }
    }

    fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Z => 'Z',
        }
    }
}

/// A signed tensor product of single-qubit Paulis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    pub negative: bool,
    pub ops: Vec<Pauli>,
}

impl PauliString {
    pub fn new(negative: bool, ops: Vec<Pauli>) -> Self {
        Self { negative, ops }
    }

    pub fn n_qubits(&self) -> usize {
        self.ops.len()
    }

    pub fn sign(&self) -> f64 {
        if self.negative {
            -1.0
        } else {
            1.0
        }
    }

    /// Applies the operator to a state of the same width.
    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if self.ops.len() != state.n_qubits() {
            return Err(Error::Dimension(format!(
                "{}-qubit Pauli string on {}-qubit state",
                self.ops.len(),
                state.n_qubits()
            )));
        }
        let flip = self
            .ops
            .iter()
            .enumerate()
            .filter(|(_, &p)| p == Pauli::X)
            .fold(0usize, |m, (q, _)| m | state.mask(q));
        let zq: Vec<usize> = self
            .ops
            .iter()
            .enumerate()
            .filter(|(_, &p)| p == Pauli::Z)
            .map(|(q, _)| q)
            .collect();
        let mut out = vec![Complex64::new(0.0, 0.0); state.amplitudes.len()];
        for (idx, &a) in state.amplitudes.iter().enumerate() {
            // Z acts before X in this convention; they are on distinct qubits
            // so the order does not matter.
            let odd = zq.iter().filter(|&&q| state.bit(idx, q)).count() % 2 == 1;
            let s = if odd != self.negative { -1.0 } else { 1.0 };
            out[idx ^ flip] = a * s;
        }
        StateVector::new(state.n_qubits(), out)
    }

    pub fn matrix(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::from_element(1, 1, Complex64::new(self.sign(), 0.0));
        for p in &self.ops {
            m = m.kronecker(&p.matrix());
        }
        m
    }
}

impl std::fmt::Display for PauliString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", if self.negative { '-' } else { '+' })?;
        self.ops
            .iter()
            .try_for_each(|p| write!(f, "{}", p.symbol()))
    }
}

/// `(-1)^p S_0` followed by `(-1)^{i_j} S_j` for `j = 1..N-1`.
pub fn stabilizer_generators(label: CatLabel) -> Vec<PauliString> {
    let n = label.n_parties();
    let mut gens = Vec::with_capacity(n);
    gens.push(PauliString::new(label.phase(), vec![Pauli::X; n]));
    for j in 0..n - 1 {
        let mut ops = vec![Pauli::I; n];
        ops[0] = Pauli::Z;
        ops[j + 1] = Pauli::Z;
        gens.push(PauliString::new(label.amplitude(j), ops));
    }
    gens
}

/// Layout of a block of cat-state registers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockLayout {
    pub n_parties: usize,
    pub n_registers: usize,
}

impl BlockLayout {
    pub fn n_qubits(&self) -> usize {
        self.n_parties * self.n_registers
    }

    pub fn qubit(&self, register: usize, party: usize) -> usize {
        register * self.n_parties + party
    }
}

/// Every party applies CNOT from its qubit in `source_slot` to its qubit in
/// `target_slot`.
pub fn multilateral_cnot(
    state: &StateVector,
    layout: BlockLayout,
    source_slot: usize,
    target_slot: usize,
) -> Result<StateVector> {
    if layout.n_qubits() != state.n_qubits() {
        return Err(Error::Dimension(format!(
            "layout has {} qubits, state has {}",
            layout.n_qubits(),
            state.n_qubits()
        )));
    }
    if source_slot >= layout.n_registers || target_slot >= layout.n_registers {
        return Err(Error::Invalid(format!(
            "slot {} or {} out of range for {} registers",
            source_slot, target_slot, layout.n_registers
        )));
    }
    if source_slot == target_slot {
        return Err(Error::Invalid(format!(
            "source and target slot are both {source_slot}"
        )));
    }
    let pairs: Vec<(usize, usize)> = (0..layout.n_parties)
        .map(|k| {
            (
                state.mask(layout.qubit(source_slot, k)),
                state.mask(layout.qubit(target_slot, k)),
            )
        })
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); state.amplitudes.len()];
    for (idx, &a) in state.amplitudes.iter().enumerate() {
        let mut j = idx;
        for &(c, t) in &pairs {
            if idx & c != 0 {
                j ^= t;
            }
        }
        out[j] = a;
    }
    StateVector::new(state.n_qubits(), out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairCheck {
    pub source: CatLabel,
    pub target: CatLabel,
    pub predicted: (CatLabel, CatLabel),
    /// `|⟨predicted|actual⟩|`.
    pub overlap: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MxorReport {
    pub n_parties: usize,
    pub pairs: Vec<PairCheck>,
}

impl MxorReport {
    pub fn passed(&self) -> usize {
        self.pairs.iter().filter(|p| p.pass).count()
    }

    pub fn failed(&self) -> usize {
        self.pairs.len() - self.passed()
    }

    pub fn all_pass(&self) -> bool {
        self.failed() == 0
    }
}

pub type MxorRule = fn(CatLabel, CatLabel) -> Result<(CatLabel, CatLabel)>;

/// Checks the classical MXOR rule against the unitary for every ordered pair
/// of `N`-party labels.
pub fn verify_mxor(n_parties: usize) -> Result<MxorReport> {
    verify_mxor_with(n_parties, catlabel::mxor)
}

/// Same as [`verify_mxor`] with a caller-supplied rule (used to check that a
/// wrong rule is detected).
pub fn verify_mxor_with(n_parties: usize, rule: MxorRule) -> Result<MxorReport> {
    check_qubits(2 * n_parties)?;
    let labels = CatLabel::all(n_parties)?;
    let layout = BlockLayout {
        n_parties,
        n_registers: 2,
    };
    let pairs: Vec<(CatLabel, CatLabel)> = labels
        .iter()
        .flat_map(|&a| labels.iter().map(move |&b| (a, b)))
        .collect();
    let pairs = pairs
        .into_par_iter()
        .map(|(a, b)| {
            let input = build_block(&[a, b])?;
            let actual = multilateral_cnot(&input, layout, 0, 1)?;
            let predicted = rule(a, b)?;
            let expected = build_block(&[predicted.0, predicted.1])?;
            let overlap = expected.inner(&actual)?.norm();
            Ok(PairCheck {
                source: a,
                target: b,
                predicted,
                overlap,
                pass: (overlap - 1.0).abs() < STATE_TOL,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MxorReport { n_parties, pairs })
}

fn cnot_matrix() -> DMatrix<Complex64> {
    let mut u = DMatrix::zeros(4, 4);
    for (r, c) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
        u[(r, c)] = Complex64::new(1.0, 0.0);
    }
    u
}

/// Largest entry of `|U (a⊗b) U† - (c⊗d)|` with `U` the CNOT whose control is
/// the first factor.
pub fn conjugation_deviation(input: (Pauli, Pauli), output: (Pauli, Pauli)) -> f64 {
    let u = cnot_matrix();
    let lhs = &u * input.0.matrix().kronecker(&input.1.matrix()) * u.adjoint();
    let rhs = output.0.matrix().kronecker(&output.1.matrix());
    (lhs - rhs).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConjugationCheck {
    pub input: (Pauli, Pauli),
    pub output: (Pauli, Pauli),
    pub deviation: f64,
    pub pass: bool,
}

impl ConjugationCheck {
    pub fn describe(&self) -> String {
        format!(
            "{}⊗{} -> {}⊗{}",
            self.input.0.symbol(),
            self.input.1.symbol(),
            self.output.0.symbol(),
            self.output.1.symbol()
        )
    }
}

/// Tolerance for the exact matrix identities.
pub const MATRIX_TOL: f64 = 1e-12;

/// The four XOR conjugation rules for stabilizer generators.
pub fn verify_conjugation_rules() -> Vec<ConjugationCheck> {
    use Pauli::*;
    [
        ((X, I), (X, X)),
        ((I, X), (I, X)),
        ((Z, I), (Z, I)),
        ((I, Z), (Z, Z)),
    ]
    .into_iter()
    .map(|(input, output)| {
        let deviation = conjugation_deviation(input, output);
        ConjugationCheck {
            input,
            output,
            deviation,
            pass: deviation < MATRIX_TOL,
        }
    })
    .collect()
}

/// Sign `λ` such that `S|ψ⟩ = λ|ψ⟩` within `tol`, if `ψ` is an eigenvector.
pub fn eigenvalue_sign(op: &PauliString, state: &StateVector, tol: f64) -> Result<Option<f64>> {
    let image = op.apply(state)?;
    for lambda in [1.0, -1.0] {
        let dev = image
            .amplitudes
            .iter()
            .zip(&state.amplitudes)
            .map(|(a, b)| (a - b * lambda).norm())
            .fold(0.0, f64::max);
        if dev < tol {
            return Ok(Some(lambda));
        }
    }
    Ok(None)
}
