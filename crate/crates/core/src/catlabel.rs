//! Classical labels of cat-basis states.
//!
//! The *N*-party cat basis state with phase bit `p` and amplitude bits
//! `i_1 .. i_{N-1}` is
//!
//! ```text
//! (|0 i_1 .. i_{N-1}⟩ + (-1)^p |1 ī_1 .. ī_{N-1}⟩) / √2
//! ```
//!
//! `p` is the eigenvalue sign of `X⊗X⊗..⊗X`; `i_j` is the eigenvalue sign of the
//! `Z` pair on party 1 and party `j+1`. Labels are plain values: measuring one
//! of them destroys the complementary bits physically, but it is up to the
//! caller not to reuse a measured label.

use std::fmt;

use crate::error::{Error, Result};

/// Largest party count a label can carry (amplitudes are packed into a `u32`).
pub const MAX_PARTIES: usize = 32;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct CatLabel {
    n_parties: u8,
    phase: bool,
    /// Bit `j` (LSB = 0) holds amplitude bit `i_{j+1}`.
    amps: u32,
}

impl CatLabel {
    pub fn new(n_parties: usize, phase: bool, amplitudes: &[bool]) -> Result<Self> {
        check_parties(n_parties)?;
        if amplitudes.len() != n_parties - 1 {
            return Err(Error::Dimension(format!(
                "{} amplitude bits for {} parties (expected {})",
                amplitudes.len(),
                n_parties,
                n_parties - 1
            )));
        }
        let amps = amplitudes
            .iter()
            .enumerate()
            .fold(0u32, |acc, (j, &b)| acc | ((b as u32) << j));
        Ok(Self {
            n_parties: n_parties as u8,
            phase,
            amps,
        })
    }

    /// The target state |Φ+⟩: all bits zero.
    pub fn zero(n_parties: usize) -> Result<Self> {
        check_parties(n_parties)?;
        Ok(Self {
            n_parties: n_parties as u8,
            phase: false,
            amps: 0,
        })
    }

    /// Builds a label from the phase bit and packed amplitude bits
    /// (bit `j` = `i_{j+1}`).
    pub fn from_parts(n_parties: usize, phase: bool, amp_bits: u32) -> Result<Self> {
        check_parties(n_parties)?;
        if n_parties < 33 && (amp_bits as u64) >> (n_parties - 1) != 0 {
            return Err(Error::Dimension(format!(
                "amplitude word {amp_bits:#x} has bits beyond {} parties",
                n_parties
            )));
        }
        Ok(Self {
            n_parties: n_parties as u8,
            phase,
            amps: amp_bits,
        })
    }

    pub fn n_parties(&self) -> usize {
        self.n_parties as usize
    }

    pub fn phase(&self) -> bool {
        self.phase
    }

    /// Packed amplitude bits, bit `j` = `i_{j+1}`.
    pub fn amp_bits(&self) -> u32 {
        self.amps
    }

    /// Amplitude bit `i_{j+1}` for `j` in `0..N-1`.
    pub fn amplitude(&self, j: usize) -> bool {
        (self.amps >> j) & 1 == 1
    }

    pub fn amplitudes(&self) -> Vec<bool> {
        (0..self.n_parties() - 1)
            .map(|j| self.amplitude(j))
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        !self.phase && self.amps == 0
    }

    /// Integer code in `[0, 2^N)`: phase is the most significant bit, then
    /// `i_1 .. i_{N-1}` in order, so the zero label encodes to 0.
    pub fn encode(&self) -> usize {
        let n = self.n_parties();
        let mut code = (self.phase as usize) << (n - 1);
        for j in 0..n - 1 {
            code |= (self.amplitude(j) as usize) << (n - 2 - j);
        }
        code
    }

    pub fn decode(n_parties: usize, code: usize) -> Result<Self> {
        check_parties(n_parties)?;
        if n_parties < usize::BITS as usize && code >> n_parties != 0 {
            return Err(Error::Domain(format!(
                "code {code} out of range for {n_parties} parties"
            )));
        }
        let phase = (code >> (n_parties - 1)) & 1 == 1;
        let mut amps = 0u32;
        for j in 0..n_parties - 1 {
            if (code >> (n_parties - 2 - j)) & 1 == 1 {
                amps |= 1 << j;
            }
        }
        Ok(Self {
            n_parties: n_parties as u8,
            phase,
            amps,
        })
    }

    /// All `2^N` labels in code order.
    pub fn all(n_parties: usize) -> Result<Vec<Self>> {
        check_parties(n_parties)?;
        if n_parties > 20 {
            return Err(Error::Capacity {
                what: "label enumeration",
                requested: 1u64 << n_parties,
                limit: 1 << 20,
            });
        }
        (0..1usize << n_parties)
            .map(|c| Self::decode(n_parties, c))
            .collect()
    }

    pub fn with_phase(self, phase: bool) -> Self {
        Self { phase, ..self }
    }

    pub fn with_amp_bits(self, amps: u32) -> Self {
        Self { amps, ..self }
    }
}

impl fmt::Debug for CatLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CatLabel({self})")
    }
}

impl fmt::Display for CatLabel {
    /// `p;i_1..i_{N-1}`, e.g. `1;01`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{};", self.phase as u8)?;
        for j in 0..self.n_parties() - 1 {
            write!(f, "{}", self.amplitude(j) as u8)?;
        }
        Ok(())
    }
}

fn check_parties(n: usize) -> Result<()> {
    if !(2..=MAX_PARTIES).contains(&n) {
        return Err(Error::Domain(format!(
            "party count {n} outside 2..={MAX_PARTIES}"
        )));
    }
    Ok(())
}

/// Multilateral XOR of two cat states, every party applying CNOT from its
/// share of `source` to its share of `target`.
///
/// The phase of the target is XORed into the source; the amplitudes of the
/// source are XORed into the target.
pub fn mxor(source: CatLabel, target: CatLabel) -> Result<(CatLabel, CatLabel)> {
    if source.n_parties != target.n_parties {
        return Err(Error::Dimension(format!(
            "mxor between {}-party and {}-party labels",
            source.n_parties, target.n_parties
        )));
    }
    Ok((
        source.with_phase(source.phase ^ target.phase),
        target.with_amp_bits(source.amps ^ target.amps),
    ))
}

/// Local `Z`-basis measurement by every party; reveals all amplitude bits.
pub fn measure_amplitudes(label: CatLabel) -> Vec<bool> {
    label.amplitudes()
}

/// Local `X`-basis measurement by every party; reveals the phase bit.
pub fn measure_phase(label: CatLabel) -> bool {
    label.phase
}

/// Pauli corrections that map a known cat state to |Φ+⟩.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalCorrection {
    /// Apply `Z` on party 1.
    pub phase_flip_party1: bool,
    /// Entry `j` set: apply `X` on party `j + 2`.
    pub bit_flips: Vec<bool>,
}

impl LocalCorrection {
    /// Applying `Z` on party 1 flips `p`; `X` on party `j+1` flips `i_j`.
    pub fn apply(&self, label: CatLabel) -> Result<CatLabel> {
        if self.bit_flips.len() + 1 != label.n_parties() {
            return Err(Error::Dimension(format!(
                "correction for {} parties applied to {}-party label",
                self.bit_flips.len() + 1,
                label.n_parties()
            )));
        }
        let flips = self
            .bit_flips
            .iter()
            .enumerate()
            .fold(0u32, |acc, (j, &b)| acc | ((b as u32) << j));
        Ok(label
            .with_phase(label.phase ^ self.phase_flip_party1)
            .with_amp_bits(label.amps ^ flips))
    }

    pub fn is_identity(&self) -> bool {
        !self.phase_flip_party1 && self.bit_flips.iter().all(|&b| !b)
    }
}

pub fn correction_for(label: CatLabel) -> LocalCorrection {
    LocalCorrection {
        phase_flip_party1: label.phase,
        bit_flips: label.amplitudes(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lab(p: u8, amps: &[u8]) -> CatLabel {
        let a: Vec<bool> = amps.iter().map(|&b| b == 1).collect();
        CatLabel::new(amps.len() + 1, p == 1, &a).unwrap()
    }

    #[test]
    fn mxor_three_party_substitution() {
        let (s, t) = mxor(lab(1, &[0, 1]), lab(1, &[1, 1])).unwrap();
        assert_eq!(s, lab(0, &[0, 1]));
        assert_eq!(t, lab(1, &[1, 0]));
    }

    #[test]
    fn mxor_fixes_zero_pair() {
        let z = lab(0, &[0]);
        assert_eq!(mxor(z, z).unwrap(), (z, z));
    }

    #[test]
    fn mxor_rejects_mixed_arity() {
        let err = mxor(lab(0, &[0]), lab(0, &[0, 0])).unwrap_err();
        assert!(matches!(err, Error::Dimension(_)));
    }

    #[test]
    fn measurements_project() {
        assert_eq!(measure_amplitudes(lab(0, &[0, 0])), vec![false, false]);
        assert_eq!(measure_amplitudes(lab(1, &[1, 0])), vec![true, false]);
        assert_eq!(measure_amplitudes(lab(1, &[1, 1])), vec![true, true]);
        assert!(!measure_phase(lab(0, &[1, 1])));
        assert!(measure_phase(lab(1, &[0, 0])));
        assert!(measure_phase(lab(1, &[1, 0])));
    }

    #[test]
    fn corrections() {
        assert!(correction_for(lab(0, &[0, 0])).is_identity());
        let c = correction_for(lab(1, &[0, 1]));
        assert!(c.phase_flip_party1);
        assert_eq!(c.bit_flips, vec![false, true]);
    }

    #[test]
    fn encoding_puts_phase_first() {
        assert_eq!(lab(1, &[0, 0]).encode(), 4);
        assert_eq!(lab(0, &[1, 0]).encode(), 2);
        assert_eq!(lab(0, &[0, 1]).encode(), 1);
        assert_eq!(CatLabel::zero(5).unwrap().encode(), 0);
    }

    #[test]
    fn bad_constructions() {
        assert!(CatLabel::new(1, false, &[]).is_err());
        assert!(CatLabel::new(3, false, &[true]).is_err());
        assert!(CatLabel::decode(2, 4).is_err());
        assert!(CatLabel::from_parts(3, false, 0b100).is_err());
    }

    #[test]
    fn round_trip_and_correction_exhaustive() {
        for n in 2..=8 {
            for label in CatLabel::all(n).unwrap() {
                assert_eq!(CatLabel::decode(n, label.encode()).unwrap(), label);
                let fixed = correction_for(label).apply(label).unwrap();
                assert!(fixed.is_zero(), "{label} -> {fixed}");
            }
        }
    }

    fn label_strategy() -> impl Strategy<Value = (CatLabel, CatLabel)> {
        (2usize..=8).prop_flat_map(|n| {
            let code = 0usize..(1 << n);
            (code.clone(), code).prop_map(move |(a, b)| {
                (
                    CatLabel::decode(n, a).unwrap(),
                    CatLabel::decode(n, b).unwrap(),
                )
            })
        })
    }

    proptest! {
        #[test]
        fn mxor_is_an_involution((a, b) in label_strategy()) {
            let (a1, b1) = mxor(a, b).unwrap();
            prop_assert_eq!(mxor(a1, b1).unwrap(), (a, b));
        }

        #[test]
        fn mxor_leaves_source_amps_and_target_phase((a, b) in label_strategy()) {
            let (a1, b1) = mxor(a, b).unwrap();
            prop_assert_eq!(a1.amp_bits(), a.amp_bits());
            prop_assert_eq!(b1.phase(), b.phase());
        }
    }
}
