//! Purification of cat-basis-diagonal mixed states.
//!
//! A mixed state diagonal in the *N*-party cat basis behaves like an unknown
//! member of that basis. Each basis state is named by a classical label: one
//! phase bit and *N*−1 amplitude bits. Local gates and measurements act on
//! these labels by simple bit rules, so purification protocols can be analysed
//! with exact classical probability bookkeeping.
//!
//! The crate is layered bottom-up:
//!
//! * [`catlabel`]: the label algebra (multilateral XOR, measurements, local
//!   corrections).
//! * [`oracle`]: a dense state-vector check of that algebra on small systems.
//! * [`ensemble`]: exact distributions over blocks of labels, the block-size-*m*
//!   protocol step and its yield.
//! * [`hashing`]: closed-form hashing yields and a finite-size Monte Carlo
//!   simulation of multiparty hashing with GF(2) decoding.
//! * [`strategy`]: composite protocols, yield curves and figure-level analysis.

pub mod catlabel;
pub mod ensemble;
mod error;
pub mod gf2;
pub mod hashing;
pub mod oracle;
pub mod strategy;

pub use catlabel::{CatLabel, LocalCorrection};
pub use ensemble::{DiagonalEnsemble, SingleDistribution, WernerParams};
pub use error::{Error, Result};
