//! Scalar multiplication ladders.
//!
//! [`scalar_mul_hardened`] is the datapath's algorithm: a Montgomery-style
//! ladder over registers `R0`, `R1` and a temporary bank `Rt`. Every
//! iteration performs the same unordered set of three point operations —
//! one addition `R0 + R1` and the two doublings `2*R0`, `2*R1` — and only
//! the *routing* of results into banks depends on the key bit:
//!
//! ```text
//! k_i = 1:  R0 <- R0 + R1    R1 <- 2*R1    Rt <- 2*R0
//! k_i = 0:  R1 <- R0 + R1    R0 <- 2*R0    Rt <- 2*R1
//! ```
//!
//! All three results are committed in parallel from the pre-iteration
//! values, so the operation schedule seen from outside is independent of
//! the scalar. The discarded double lands in `Rt`, which is never read.
//!
//! [`scalar_mul_baseline`] is the classic two-register ladder kept for
//! contrast experiments: it performs an equivalent addition but only the
//! one doubling selected by the key bit, so its register access pattern
//! leaks the scalar at the trace level.
//!
//! Scalars are raw 256-bit integers; they are deliberately *not* reduced
//! modulo the group order, matching hardware that processes whatever bit
//! string it is given. The ladder runs on the top `t` bits down from the
//! most significant set bit.

use alloc::string::String;
use core::fmt;

use rand_core::RngCore;

use crate::curve::{
    encode_pubkey, point_add_complete, point_double, ProjectivePoint, PublicKeyEncoding,
};
use crate::error::{Error, Result};

/// A nonzero 256-bit scalar (little-endian limbs, not reduced mod the group
/// order).
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct Scalar256 {
    limbs: [u64; 4],
}

impl Scalar256 {
    /// Builds a scalar from little-endian limbs; zero is rejected because
    /// the ladder has no encoding for an empty bit string.
    pub fn from_limbs(limbs: [u64; 4]) -> Result<Self> {
        if limbs == [0, 0, 0, 0] {
            return Err(Error::InvalidInput("scalar must be nonzero"));
        }
        Ok(Scalar256 { limbs })
    }

    pub fn from_u64(v: u64) -> Result<Self> {
        Self::from_limbs([v, 0, 0, 0])
    }

    pub fn from_be_bytes(bytes: &[u8; 32]) -> Result<Self> {
        let mut limbs = [0u64; 4];
        for (i, chunk) in bytes.chunks_exact(8).enumerate() {
            limbs[3 - i] = u64::from_be_bytes(chunk.try_into().unwrap());
        }
        Self::from_limbs(limbs)
    }

    /// Parses exactly 64 hex digits (leading zeros allowed; any nonzero
    /// 256-bit value is accepted, including values above the group order).
    pub fn from_hex(s: &str) -> Result<Self> {
        if s.len() != 64 {
            return Err(Error::MalformedHex("expected exactly 64 hex digits"));
        }
        let mut bytes = [0u8; 32];
        hex::decode_to_slice(s, &mut bytes)
            .map_err(|_| Error::MalformedHex("expected exactly 64 hex digits"))?;
        Self::from_be_bytes(&bytes)
    }

    pub fn to_be_bytes(&self) -> [u8; 32] {
        let mut out = [0u8; 32];
        for i in 0..4 {
            out[8 * i..8 * i + 8].copy_from_slice(&self.limbs[3 - i].to_be_bytes());
        }
        out
    }

    /// 64 lowercase hex digits.
    pub fn to_hex(&self) -> String {
        hex::encode(self.to_be_bytes())
    }

    /// A full-width random scalar: 256 random bits with bit 255 forced, so
    /// every draw has the same bit length (and thus ladder length).
    pub fn random_full_width<R: RngCore>(rng: &mut R) -> Self {
        let mut bytes = [0u8; 32];
        rng.fill_bytes(&mut bytes);
        bytes[0] |= 0x80;
        Self::from_be_bytes(&bytes).expect("msb is set")
    }

    /// Bit `i` (little-endian indexing; `i < 256`).
    pub fn bit(&self, i: usize) -> bool {
        (self.limbs[i / 64] >> (i % 64)) & 1 == 1
    }

    /// `t`, the index of the highest set bit plus one (1..=256).
    pub fn bit_len(&self) -> usize {
        for i in (0..4).rev() {
            if self.limbs[i] != 0 {
                return 64 * i + 64 - self.limbs[i].leading_zeros() as usize;
            }
        }
        0
    }
}

impl fmt::Debug for Scalar256 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scalar256({})", self.to_hex())
    }
}

/// The three register banks of the hardened ladder.
#[derive(Clone, Copy, Debug)]
pub struct LadderState {
    pub r0: ProjectivePoint,
    pub r1: ProjectivePoint,
    pub rt: ProjectivePoint,
}

impl LadderState {
    /// Ladder entry state: `R0 = P`, `R1 = 2P`; `Rt` starts as the identity
    /// and is overwritten by every iteration.
    pub fn init(p: &ProjectivePoint) -> Self {
        LadderState { r0: *p, r1: point_double(p), rt: ProjectivePoint::IDENTITY }
    }
}

/// The three results every hardened iteration computes, all derived from
/// the pre-iteration register values.
pub(crate) struct IterationValues {
    pub add: ProjectivePoint,
    pub dbl_r0: ProjectivePoint,
    pub dbl_r1: ProjectivePoint,
}

pub(crate) fn hardened_iteration_values(st: &LadderState) -> IterationValues {
    IterationValues {
        add: point_add_complete(&st.r0, &st.r1),
        dbl_r0: point_double(&st.r0),
        dbl_r1: point_double(&st.r1),
    }
}

/// Routes the iteration results into the banks according to the key bit.
/// This is the only key-dependent part of the hardened ladder.
pub(crate) fn hardened_commit(st: &mut LadderState, bit: bool, v: IterationValues) {
    if bit {
        st.r0 = v.add;
        st.r1 = v.dbl_r1;
        st.rt = v.dbl_r0;
    } else {
        st.r1 = v.add;
        st.r0 = v.dbl_r0;
        st.rt = v.dbl_r1;
    }
}

fn validate_base_point(p: &ProjectivePoint) -> Result<()> {
    if !p.is_on_curve() {
        return Err(Error::InvalidInput("base point is not on the curve"));
    }
    if p.is_identity() {
        return Err(Error::InvalidInput("base point must not be the identity"));
    }
    Ok(())
}

/// In debug builds, checks the ladder invariant `R1 - R0 = P` after an
/// iteration, using the complete adder and cross-multiplied comparison.
fn debug_check_invariant(r0: &ProjectivePoint, r1: &ProjectivePoint, p: &ProjectivePoint) {
    if cfg!(debug_assertions) {
        let diff = point_add_complete(r1, &r0.negate());
        debug_assert!(diff.affine_eq(p), "ladder invariant R1 - R0 = P violated");
    }
}

/// `k * P` on the hardened three-bank ladder; returns the projective result
/// from `R0`.
///
/// Runs `t - 1` iterations for a scalar of bit length `t`. Any nonzero
/// scalar is accepted as-is (no reduction). The base point must be a valid
/// non-identity curve point.
pub fn scalar_mul_hardened(k: &Scalar256, p: &ProjectivePoint) -> Result<ProjectivePoint> {
    validate_base_point(p)?;
    let mut st = LadderState::init(p);
    let t = k.bit_len();
    for i in (0..t - 1).rev() {
        let values = hardened_iteration_values(&st);
        hardened_commit(&mut st, k.bit(i), values);
        debug_check_invariant(&st.r0, &st.r1, p);
    }
    Ok(st.r0)
}

/// `k * P` on the classic two-register ladder (the unprotected reference
/// design): the addition always runs, but only the doubling selected by the
/// key bit, whose source and destination registers therefore leak `k`.
pub fn scalar_mul_baseline(k: &Scalar256, p: &ProjectivePoint) -> Result<ProjectivePoint> {
    validate_base_point(p)?;
    let mut q0 = *p;
    let mut q1 = point_double(p);
    let t = k.bit_len();
    for i in (0..t - 1).rev() {
        let sum = point_add_complete(&q0, &q1);
        if k.bit(i) {
            q0 = sum;
            q1 = point_double(&q1);
        } else {
            q1 = sum;
            q0 = point_double(&q0);
        }
        debug_check_invariant(&q0, &q1, p);
    }
    Ok(q0)
}

/// Derives the uncompressed public key `k * G`.
///
/// Fails with [`Error::DegenerateKey`] when the multiple is the point at
/// infinity (i.e. `k` is a multiple of the group order), which has no
/// uncompressed encoding.
pub fn derive_pubkey(k: &Scalar256) -> Result<PublicKeyEncoding> {
    let q = scalar_mul_hardened(k, &ProjectivePoint::generator())?;
    let affine = q.to_affine();
    if affine.infinity {
        return Err(Error::DegenerateKey);
    }
    encode_pubkey(&affine)
}
