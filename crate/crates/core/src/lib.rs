//! Software model of a side-channel-hardened secp256k1 scalar-multiplication
//! datapath.
//!
//! The crate is organised the way the modeled hardware is:
//!
//! * [`fp256`] — GF(p) arithmetic, including a bit-serial multiplier and an
//!   add/sub/shift binary extended-gcd inverter that mirror the modular ALU.
//! * [`curve`] — projective points and the branch-free complete addition
//!   formula used for both point addition and doubling.
//! * [`ladder`] — the hardened Montgomery ladder with a temporary register
//!   bank, plus the classic leaky ladder it is contrasted against.
//! * [`datapath`] — a cycle-level simulator of the register file, the two
//!   parallel point-addition units, and the inversion unit; produces
//!   operation traces and latency/throughput reports.
//! * [`sca`] — trace-shape uniformity checks, baseline contrast, and a
//!   fixed-vs-random Welch t-test over simple power models.
//!
//! `std` is not required; everything works on `core + alloc`.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

mod error;

pub mod curve;
pub mod datapath;
pub mod fp256;
pub mod ladder;
pub mod sca;

pub use curve::{AffinePoint, ProjectivePoint, PublicKeyEncoding};
pub use datapath::{CycleConfig, CycleReport, OperationTrace, RegisterSlot, TraceEvent};
pub use error::{Error, Result};
pub use fp256::{FieldElement, MaluOpcode, MaluRecorder};
pub use ladder::Scalar256;
pub use sca::{LeakageModel, PowerTrace, TTestConfig, TTestOutcome};
