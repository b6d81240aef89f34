//! Line-oriented text form of a [`HashingRun`].
//!
//! ```text
//! catpurify-transcript 1
//! run <n_parties> <m> <seed> <safety_bits>
//! hidden <index> <label>        one per state, label as "p;i1i2.."
//! A <round> <target> <subset-hex> <amplitude bits i1i2..>
//! B <round> <measured> <subset-hex> <phase bit>
//! ```
//!
//! Subset masks are hex with state 0 in the least significant bit. In a `B`
//! round every other subset member is an MXOR target of the measured state,
//! so its amplitudes pick up the measured state's amplitudes.

use std::fmt::Write as _;

use super::sim::{AmpRound, HashingRun, PhaseRound};
use crate::catlabel::CatLabel;
use crate::error::{Error, Result};
use crate::gf2::BitRow;

const MAGIC: &str = "catpurify-transcript 1";

fn amp_string(n_parties: usize, bits: u32) -> String {
    (0..n_parties - 1)
        .map(|j| if (bits >> j) & 1 == 1 { '1' } else { '0' })
        .collect()
}

fn parse_amp_string(n_parties: usize, s: &str) -> Result<u32> {
    if s.len() != n_parties - 1 {
        return Err(Error::Invalid(format!(
            "amplitude string {s:?} has wrong length"
        )));
    }
    s.chars().enumerate().try_fold(0u32, |acc, (j, c)| match c {
        '0' => Ok(acc),
        '1' => Ok(acc | 1 << j),
        _ => Err(Error::Invalid(format!("bad amplitude bit {c:?}"))),
    })
}

fn parse_label(n_parties: usize, s: &str) -> Result<CatLabel> {
    let (p, amps) = s
        .split_once(';')
        .ok_or_else(|| Error::Invalid(format!("label {s:?} lacks ';'")))?;
    let phase = match p {
        "0" => false,
        "1" => true,
        _ => return Err(Error::Invalid(format!("bad phase bit {p:?}"))),
    };
    CatLabel::from_parts(n_parties, phase, parse_amp_string(n_parties, amps)?)
}

impl HashingRun {
    pub fn to_text(&self) -> String {
        let n = self.n_parties;
        let mut out = String::new();
        writeln!(out, "{MAGIC}").unwrap();
        writeln!(
            out,
            "run {n} {} {} {}",
            self.block_size(),
            self.seed,
            self.safety_bits
        )
        .unwrap();
        for (i, l) in self.hidden.iter().enumerate() {
            writeln!(out, "hidden {i} {}", l).unwrap();
        }
        for (k, r) in self.amp_rounds.iter().enumerate() {
            writeln!(
                out,
                "A {k} {} {} {}",
                r.target,
                r.subset.to_hex(),
                amp_string(n, r.outcome)
            )
            .unwrap();
        }
        for (k, r) in self.phase_rounds.iter().enumerate() {
            writeln!(
                out,
                "B {k} {} {} {}",
                r.measured,
                r.subset.to_hex(),
                r.outcome as u8
            )
            .unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |line: usize, what: &str| {
            Error::Invalid(format!("transcript line {}: {what}", line + 1))
        };
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, l)) if l.trim() == MAGIC => {}
            _ => return Err(Error::Invalid("missing transcript header".into())),
        }
        let (ln, head) = lines
            .next()
            .ok_or_else(|| Error::Invalid("missing run line".into()))?;
        let f: Vec<&str> = head.split_whitespace().collect();
        if f.len() != 5 || f[0] != "run" {
            return Err(bad(ln, "expected 'run <N> <m> <seed> <safety>'"));
        }
        let num = |s: &str| s.parse::<u64>().map_err(|_| bad(ln, "bad number"));
        let n = num(f[1])? as usize;
        let m = num(f[2])? as usize;
        let mut run = HashingRun {
            n_parties: n,
            seed: num(f[3])?,
            safety_bits: num(f[4])? as usize,
            hidden: Vec::with_capacity(m),
            amp_rounds: Vec::new(),
            phase_rounds: Vec::new(),
        };
        CatLabel::zero(n)?;

        for (ln, line) in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            let idx = |s: &str| {
                s.parse::<usize>()
                    .ok()
                    .filter(|&v| v < m)
                    .ok_or_else(|| bad(ln, "index out of range"))
            };
            match f.as_slice() {
                ["hidden", i, label] => {
                    if idx(i)? != run.hidden.len() {
                        return Err(bad(ln, "hidden labels out of order"));
                    }
                    run.hidden.push(parse_label(n, label)?);
                }
                ["A", k, t, mask, bits] => {
                    if k.parse::<usize>().ok() != Some(run.amp_rounds.len())
                        || !run.phase_rounds.is_empty()
                    {
                        return Err(bad(ln, "amplitude round out of order"));
                    }
                    run.amp_rounds.push(AmpRound {
                        subset: BitRow::from_hex(m, mask)?,
                        target: idx(t)?,
                        outcome: parse_amp_string(n, bits)?,
                    });
                }
                ["B", k, t, mask, bit] => {
                    if k.parse::<usize>().ok() != Some(run.phase_rounds.len()) {
                        return Err(bad(ln, "phase round out of order"));
                    }
                    let outcome = match *bit {
                        "0" => false,
                        "1" => true,
                        _ => return Err(bad(ln, "bad phase bit")),
                    };
                    run.phase_rounds.push(PhaseRound {
                        subset: BitRow::from_hex(m, mask)?,
                        measured: idx(t)?,
                        outcome,
                    });
                }
                _ => return Err(bad(ln, "unrecognized record")),
            }
        }
        if run.hidden.len() != m {
            return Err(Error::Invalid(format!(
                "{} hidden labels for m = {m}",
                run.hidden.len()
            )));
        }
        Ok(run)
    }
}

#[cfg(test)]
mod tests {
    use crate::ensemble::werner_single;
    use crate::hashing::sim::{simulate_hashing, HashingParams};
    use crate::hashing::HashingRun;

    #[test]
    fn round_trip() {
        let s = werner_single(3, 0.9).unwrap();
        let o = simulate_hashing(&HashingParams::new(3, 70), &s, 5).unwrap();
        let text = o.run.to_text();
        let back = HashingRun::from_text(&text).unwrap();
        assert_eq!(back, o.run);
        back.replay().unwrap();
    }

    #[test]
    fn rejects_garbage() {
        assert!(HashingRun::from_text("").is_err());
        assert!(
            HashingRun::from_text("catpurify-transcript 1\nrun 2 1 0 0\nhidden 0 2;0\n").is_err()
        );
        assert!(
            HashingRun::from_text("catpurify-transcript 1\nrun 2 1 0 0\nhidden 0 1;1\n").is_ok()
        );
    }
}
