//! Arithmetic in GF(p) for the secp256k1 prime `p = 2^256 - 2^32 - 977`.
//!
//! Two execution paths coexist on purpose:
//!
//! * [`FieldElement`] methods and operators use fast 64x64 limb arithmetic
//!   with a fold-based reduction exploiting `2^256 = 2^32 + 977 (mod p)`.
//!   These compute values for the ladder and the simulator.
//! * The `*_mod` module functions model the modular ALU of the datapath: a
//!   bit-serial shift-and-add multiplier that always runs exactly 256
//!   iterations, and a binary extended-gcd inverter built from additions,
//!   subtractions, and shifts only. Traced variants report every operation
//!   (and every multiplier iteration) through a [`MaluRecorder`].
//!
//! The two paths are required to agree everywhere; the test suite checks
//! them against each other and against an independent big-integer
//! implementation.
//!
//! Elements are held as four 64-bit little-endian limbs and are always
//! canonical (fully reduced). This code aims for an input-independent
//! *modeled* operation sequence, not for constant time on the host CPU.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// The field prime `p = 2^256 - 2^32 - 977`, little-endian limbs.
pub(crate) const P: [u64; 4] = [
    0xFFFF_FFFE_FFFF_FC2F,
    0xFFFF_FFFF_FFFF_FFFF,
    0xFFFF_FFFF_FFFF_FFFF,
    0xFFFF_FFFF_FFFF_FFFF,
];

/// `2^256 mod p = 2^32 + 977`, the folding constant for fast reduction.
const FOLD: u64 = 0x1_0000_03D1;

/// An element of GF(p), always stored fully reduced.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct FieldElement([u64; 4]);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement([0, 0, 0, 0]);
    pub const ONE: FieldElement = FieldElement([1, 0, 0, 0]);

    /// Const constructor for in-crate curve constants; the caller asserts
    /// canonicality.
    pub(crate) const fn from_limbs_unchecked(limbs: [u64; 4]) -> Self {
        FieldElement(limbs)
    }

    /// Builds an element from little-endian limbs, rejecting values >= p.
    pub fn from_limbs(limbs: [u64; 4]) -> Result<Self> {
        if geq(&limbs, &P) {
            return Err(Error::InvalidInput("value is not a canonical residue"));
        }
        Ok(FieldElement(limbs))
    }

    /// Little-endian limb view.
    pub fn to_limbs(self) -> [u64; 4] {
        self.0
    }

    pub fn from_u64(v: u64) -> Self {
        FieldElement([v, 0, 0, 0])
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0, 0, 0, 0]
    }

    /// Parses exactly 64 hex digits (big-endian, no prefix) into a canonical
    /// residue. Values >= p are rejected.
    pub fn from_hex(s: &str) -> Result<Self> {
        if s.len() != 64 {
            return Err(Error::MalformedHex("expected exactly 64 hex digits"));
        }
        let mut bytes = [0u8; 32];
        hex::decode_to_slice(s, &mut bytes)
            .map_err(|_| Error::MalformedHex("expected exactly 64 hex digits"))?;
        Self::from_be_bytes(&bytes)
    }

    /// Formats as exactly 64 lowercase hex digits, big-endian.
    pub fn to_hex(&self) -> String {
        hex::encode(self.to_be_bytes())
    }

    /// Parses a 32-byte big-endian encoding, rejecting values >= p.
    pub fn from_be_bytes(bytes: &[u8; 32]) -> Result<Self> {
        let mut limbs = [0u64; 4];
        for (i, chunk) in bytes.chunks_exact(8).enumerate() {
            limbs[3 - i] = u64::from_be_bytes(chunk.try_into().unwrap());
        }
        Self::from_limbs(limbs)
    }

    pub fn to_be_bytes(&self) -> [u8; 32] {
        let mut out = [0u8; 32];
        for i in 0..4 {
            out[8 * i..8 * i + 8].copy_from_slice(&self.0[3 - i].to_be_bytes());
        }
        out
    }

    /// Number of set bits; the data-value leakage model weighs writes by it.
    pub fn hamming_weight(&self) -> u32 {
        self.0.iter().map(|l| l.count_ones()).sum()
    }

    /// `(self + rhs) mod p`, selecting the reduced candidate by mask.
    #[inline]
    pub fn add(&self, rhs: &FieldElement) -> FieldElement {
        let (sum, carry) = add_raw(&self.0, &rhs.0);
        let (diff, borrow) = sub_raw(&sum, &P);
        // Reduce when the raw sum overflowed 2^256 or is already >= p.
        let take_diff = (carry | (1 - borrow)) & 1;
        FieldElement(select(take_diff, &diff, &sum))
    }

    /// `(self - rhs) mod p`, adding p back under a borrow mask.
    #[inline]
    pub fn sub(&self, rhs: &FieldElement) -> FieldElement {
        let (diff, borrow) = sub_raw(&self.0, &rhs.0);
        let (wrapped, _) = add_raw(&diff, &P);
        FieldElement(select(borrow, &wrapped, &diff))
    }

    /// `(self * rhs) mod p` via schoolbook limb multiplication and two
    /// folding passes of the 2^256 = 2^32 + 977 identity.
    #[inline]
    pub fn mul(&self, rhs: &FieldElement) -> FieldElement {
        let mut wide = [0u64; 8];
        for i in 0..4 {
            let mut carry = 0u128;
            for j in 0..4 {
                let t = wide[i + j] as u128 + self.0[i] as u128 * rhs.0[j] as u128 + carry;
                wide[i + j] = t as u64;
                carry = t >> 64;
            }
            wide[i + 4] = carry as u64;
        }
        reduce_wide(wide)
    }

    #[inline]
    pub fn square(&self) -> FieldElement {
        self.mul(self)
    }

    /// `2 * self mod p`.
    #[inline]
    pub fn double(&self) -> FieldElement {
        self.add(self)
    }

    /// `-self mod p` (zero maps to zero).
    pub fn negate(&self) -> FieldElement {
        FieldElement::ZERO.sub(self)
    }

    /// `self^-1 mod p` via the binary extended gcd; fails on zero.
    pub fn invert(&self) -> Result<FieldElement> {
        inv_mod(self)
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldElement({})", self.to_hex())
    }
}

macro_rules! impl_binop {
    ($trait:ident, $method:ident, $inner:ident) => {
        impl $trait for FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: FieldElement) -> FieldElement {
                FieldElement::$inner(&self, &rhs)
            }
        }
        impl<'a> $trait<&'a FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: &'a FieldElement) -> FieldElement {
                FieldElement::$inner(&self, rhs)
            }
        }
        impl<'a, 'b> $trait<&'b FieldElement> for &'a FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: &'b FieldElement) -> FieldElement {
                FieldElement::$inner(self, rhs)
            }
        }
    };
}

impl_binop!(Add, add, add);
impl_binop!(Sub, sub, sub);
impl_binop!(Mul, mul, mul);

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        self.negate()
    }
}

// --- raw limb helpers ---------------------------------------------------

#[inline]
fn add_raw(a: &[u64; 4], b: &[u64; 4]) -> ([u64; 4], u64) {
    let mut out = [0u64; 4];
    let mut carry = 0u128;
    for i in 0..4 {
        let t = a[i] as u128 + b[i] as u128 + carry;
        out[i] = t as u64;
        carry = t >> 64;
    }
    (out, carry as u64)
}

#[inline]
fn sub_raw(a: &[u64; 4], b: &[u64; 4]) -> ([u64; 4], u64) {
    let mut out = [0u64; 4];
    let mut borrow = 0u64;
    for i in 0..4 {
        let t = (a[i] as u128).wrapping_sub(b[i] as u128 + borrow as u128);
        out[i] = t as u64;
        borrow = ((t >> 64) as u64) & 1;
    }
    (out, borrow)
}

/// `a >= b` on raw 256-bit values.
#[inline]
fn geq(a: &[u64; 4], b: &[u64; 4]) -> bool {
    sub_raw(a, b).1 == 0
}

/// Limb-wise select: `flag = 1` picks `a`, `flag = 0` picks `b`.
#[inline]
fn select(flag: u64, a: &[u64; 4], b: &[u64; 4]) -> [u64; 4] {
    debug_assert!(flag <= 1);
    let mask = flag.wrapping_neg();
    [
        (a[0] & mask) | (b[0] & !mask),
        (a[1] & mask) | (b[1] & !mask),
        (a[2] & mask) | (b[2] & !mask),
        (a[3] & mask) | (b[3] & !mask),
    ]
}

/// Reduces an 8-limb product modulo p.
///
/// Folds the high half twice through `2^256 = FOLD (mod p)`; after the
/// second fold the value is below `2^256 + 2^67`, so at most one wrap of the
/// fold constant and one conditional subtraction of p remain.
fn reduce_wide(w: [u64; 8]) -> FieldElement {
    // t = lo + hi * FOLD, five limbs (t4 < 2^34).
    let mut t = [0u64; 5];
    let mut carry = 0u128;
    for i in 0..4 {
        let v = w[i] as u128 + w[i + 4] as u128 * FOLD as u128 + carry;
        t[i] = v as u64;
        carry = v >> 64;
    }
    t[4] = carry as u64;

    // u = t[0..4] + t4 * FOLD, at most one bit of overflow.
    let mut u = [t[0], t[1], t[2], t[3]];
    let mut carry = t[4] as u128 * FOLD as u128;
    for limb in u.iter_mut() {
        let v = *limb as u128 + (carry & 0xFFFF_FFFF_FFFF_FFFF);
        *limb = v as u64;
        carry = (carry >> 64) + (v >> 64);
    }

    if carry != 0 {
        // Wrap 2^256 once more; this cannot carry again because the value
        // left after discarding the top bit is tiny.
        let (wrapped, c) = add_raw(&u, &[FOLD, 0, 0, 0]);
        debug_assert_eq!(c, 0);
        u = wrapped;
    }

    let (diff, borrow) = sub_raw(&u, &P);
    FieldElement(select(1 - borrow, &diff, &u))
}

/// `2a mod p` via a left shift and one conditional subtraction.
#[inline]
fn double_mod_raw(a: &[u64; 4]) -> [u64; 4] {
    let carry = a[3] >> 63;
    let shifted = [a[0] << 1, (a[1] << 1) | (a[0] >> 63), (a[2] << 1) | (a[1] >> 63), (a[3] << 1) | (a[2] >> 63)];
    let (diff, borrow) = sub_raw(&shifted, &P);
    select((carry | (1 - borrow)) & 1, &diff, &shifted)
}

// --- modeled ALU operations ----------------------------------------------

/// Operation codes understood by the modular ALU model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MaluOpcode {
    Add,
    Sub,
    Mul,
    Inv,
    Shift,
    Load,
}

impl MaluOpcode {
    pub fn name(self) -> &'static str {
        match self {
            MaluOpcode::Add => "ADD",
            MaluOpcode::Sub => "SUB",
            MaluOpcode::Mul => "MUL",
            MaluOpcode::Inv => "INV",
            MaluOpcode::Shift => "SHIFT",
            MaluOpcode::Load => "LOAD",
        }
    }
}

impl fmt::Display for MaluOpcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Observer for the modeled ALU: one `record` per operation, plus one
/// `record_step` per internal iteration of multi-cycle operations (the 256
/// shift-and-add slots of a multiplication, the loop steps of the inverter).
pub trait MaluRecorder {
    fn record(&mut self, op: MaluOpcode);
    fn record_step(&mut self, _op: MaluOpcode) {}
}

/// Discards everything.
pub struct NullRecorder;

impl MaluRecorder for NullRecorder {
    fn record(&mut self, _op: MaluOpcode) {}
}

/// Collects the opcode sequence and counts iteration steps.
#[derive(Default)]
pub struct CountingRecorder {
    pub ops: Vec<MaluOpcode>,
    pub steps: usize,
}

impl MaluRecorder for CountingRecorder {
    fn record(&mut self, op: MaluOpcode) {
        self.ops.push(op);
    }
    fn record_step(&mut self, _op: MaluOpcode) {
        self.steps += 1;
    }
}

/// `(a + b) mod p` as executed by the ALU.
pub fn add_mod(a: &FieldElement, b: &FieldElement) -> FieldElement {
    a.add(b)
}

/// `(a - b) mod p` as executed by the ALU.
pub fn sub_mod(a: &FieldElement, b: &FieldElement) -> FieldElement {
    a.sub(b)
}

/// `(a * b) mod p` through the bit-serial shift-and-add multiplier.
///
/// Scans the 256 bits of `b` from the most significant end. Every iteration
/// doubles the accumulator and adds `a` masked by the current key bit; both
/// candidates are computed and the result is picked by mask, so the modeled
/// operation pattern does not depend on the operands. The loop always runs
/// exactly 256 iterations.
pub fn mul_mod(a: &FieldElement, b: &FieldElement) -> FieldElement {
    mul_mod_traced(&mut NullRecorder, a, b)
}

/// [`mul_mod`] with tracing: one `Mul` record plus 256 `Shift` steps.
pub fn mul_mod_traced<R: MaluRecorder>(
    rec: &mut R,
    a: &FieldElement,
    b: &FieldElement,
) -> FieldElement {
    rec.record(MaluOpcode::Mul);
    let mut acc = [0u64; 4];
    for i in (0..256).rev() {
        acc = double_mod_raw(&acc);
        let bit = (b.0[i / 64] >> (i % 64)) & 1;
        let (sum, carry) = add_raw(&acc, &a.0);
        let (reduced, borrow) = sub_raw(&sum, &P);
        let with_a = select((carry | (1 - borrow)) & 1, &reduced, &sum);
        acc = select(bit, &with_a, &acc);
        rec.record_step(MaluOpcode::Shift);
    }
    FieldElement(acc)
}

/// `add_mod` with tracing (a single `Add` record).
pub fn add_mod_traced<R: MaluRecorder>(
    rec: &mut R,
    a: &FieldElement,
    b: &FieldElement,
) -> FieldElement {
    rec.record(MaluOpcode::Add);
    a.add(b)
}

/// `sub_mod` with tracing (a single `Sub` record).
pub fn sub_mod_traced<R: MaluRecorder>(
    rec: &mut R,
    a: &FieldElement,
    b: &FieldElement,
) -> FieldElement {
    rec.record(MaluOpcode::Sub);
    a.sub(b)
}

/// Working registers of the binary extended-gcd inverter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BiaVar {
    /// Shrinking copy of the operand.
    U,
    /// Shrinking copy of the modulus.
    V,
    /// Bezout accumulator paired with `U`.
    X1,
    /// Bezout accumulator paired with `V`.
    X2,
}

/// One loop step of the inverter, as reported to step sinks.
///
/// `Shift` steps halve `U` or `V` (adjusting the paired accumulator);
/// `Sub` steps subtract the smaller working value from the larger.
/// `hamming_weight` covers the values written by the step, for power models.
#[derive(Clone, Copy, Debug)]
pub struct BiaStep {
    pub op: MaluOpcode,
    pub target: BiaVar,
    pub hamming_weight: u32,
}

/// `z^-1 mod p` via the classical four-branch binary extended gcd.
///
/// Uses only additions, subtractions, and right shifts, mirroring the
/// add/sub/shift inverter of the datapath. Unlike the multiplier, its step
/// count depends on the operand value; callers that care (the simulator,
/// the leakage analysis) treat the inversion phase separately.
pub fn inv_mod(z: &FieldElement) -> Result<FieldElement> {
    inv_mod_steps(z, |_| {})
}

/// [`inv_mod`] reporting every loop step to `sink`.
pub fn inv_mod_steps(z: &FieldElement, mut sink: impl FnMut(BiaStep)) -> Result<FieldElement> {
    if z.is_zero() {
        return Err(Error::NonInvertible);
    }
    let one = [1u64, 0, 0, 0];
    let mut u = z.0;
    let mut v = P;
    let mut x1 = FieldElement::ONE;
    let mut x2 = FieldElement::ZERO;

    while u != one && v != one {
        while u[0] & 1 == 0 {
            u = shr1(&u, 0);
            x1 = half_mod(&x1);
            sink(BiaStep {
                op: MaluOpcode::Shift,
                target: BiaVar::U,
                hamming_weight: weight(&u) + x1.hamming_weight(),
            });
        }
        while v[0] & 1 == 0 {
            v = shr1(&v, 0);
            x2 = half_mod(&x2);
            sink(BiaStep {
                op: MaluOpcode::Shift,
                target: BiaVar::V,
                hamming_weight: weight(&v) + x2.hamming_weight(),
            });
        }
        if geq(&u, &v) {
            u = sub_raw(&u, &v).0;
            x1 = x1.sub(&x2);
            sink(BiaStep {
                op: MaluOpcode::Sub,
                target: BiaVar::U,
                hamming_weight: weight(&u) + x1.hamming_weight(),
            });
        } else {
            v = sub_raw(&v, &u).0;
            x2 = x2.sub(&x1);
            sink(BiaStep {
                op: MaluOpcode::Sub,
                target: BiaVar::V,
                hamming_weight: weight(&v) + x2.hamming_weight(),
            });
        }
    }
    Ok(if u == one { x1 } else { x2 })
}

/// `inv_mod` with tracing: one `Inv` record plus one step per gcd loop step.
pub fn inv_mod_traced<R: MaluRecorder>(rec: &mut R, z: &FieldElement) -> Result<FieldElement> {
    rec.record(MaluOpcode::Inv);
    // The closure cannot borrow `rec` twice, so funnel steps through it once.
    inv_mod_steps(z, |step| rec.record_step(step.op))
}

fn weight(limbs: &[u64; 4]) -> u32 {
    limbs.iter().map(|l| l.count_ones()).sum()
}

/// Right shift by one with an explicit carry-in at bit 256.
#[inline]
fn shr1(a: &[u64; 4], carry_in: u64) -> [u64; 4] {
    [
        (a[0] >> 1) | (a[1] << 63),
        (a[1] >> 1) | (a[2] << 63),
        (a[2] >> 1) | (a[3] << 63),
        (a[3] >> 1) | (carry_in << 63),
    ]
}

/// `x / 2 mod p`: shift directly when even, else shift `x + p` (257 bits).
fn half_mod(x: &FieldElement) -> FieldElement {
    if x.0[0] & 1 == 0 {
        FieldElement(shr1(&x.0, 0))
    } else {
        let (sum, carry) = add_raw(&x.0, &P);
        FieldElement(shr1(&sum, carry))
    }
}

// --- straight-line executors ----------------------------------------------

/// Field-operation provider for straight-line formula code: the curve layer
/// writes its formulas once against this and runs them either fast or fully
/// modeled.
pub(crate) trait FieldExecutor {
    fn add(&mut self, a: &FieldElement, b: &FieldElement) -> FieldElement;
    fn sub(&mut self, a: &FieldElement, b: &FieldElement) -> FieldElement;
    fn mul(&mut self, a: &FieldElement, b: &FieldElement) -> FieldElement;
}

/// Plain limb arithmetic, no observation.
pub(crate) struct FastExecutor;

impl FieldExecutor for FastExecutor {
    #[inline]
    fn add(&mut self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        a.add(b)
    }
    #[inline]
    fn sub(&mut self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        a.sub(b)
    }
    #[inline]
    fn mul(&mut self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        a.mul(b)
    }
}

/// Full ALU model: records opcodes and runs multiplications bit-serially.
pub(crate) struct MaluExecutor<'r, R: MaluRecorder>(pub &'r mut R);

impl<R: MaluRecorder> FieldExecutor for MaluExecutor<'_, R> {
    fn add(&mut self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        add_mod_traced(self.0, a, b)
    }
    fn sub(&mut self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        sub_mod_traced(self.0, a, b)
    }
    fn mul(&mut self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        mul_mod_traced(self.0, a, b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;

    fn fe(hex: &str) -> FieldElement {
        FieldElement::from_hex(hex).unwrap()
    }

    fn p_minus(k: u64) -> FieldElement {
        FieldElement::ZERO.sub(&FieldElement::from_u64(k))
    }

    #[test]
    fn additive_identities() {
        let x = fe("00000000000000000000000000000000000000000000000000000000deadbeef");
        assert_eq!(FieldElement::ZERO.add(&x), x);
        assert_eq!(p_minus(1).add(&FieldElement::ONE), FieldElement::ZERO);
        // (p-1) + (p-1) = p - 2
        assert_eq!(p_minus(1).add(&p_minus(1)), p_minus(2));
    }

    #[test]
    fn subtraction_wraps() {
        let x = fe("00000000000000000000000000000000000000000000000000000000cafef00d");
        assert_eq!(x.sub(&x), FieldElement::ZERO);
        assert_eq!(FieldElement::ZERO.sub(&FieldElement::ONE), p_minus(1));
        let five = FieldElement::from_u64(5);
        let nine = FieldElement::from_u64(9);
        assert_eq!(five.sub(&nine), p_minus(4));
        assert_eq!(
            p_minus(4).to_hex(),
            "fffffffffffffffffffffffffffffffffffffffffffffffffffffffefffffc2b"
        );
    }

    #[test]
    fn multiplicative_identities() {
        let x = fe("123456789abcdef0fedcba9876543210deadbeefcafef00d0102030405060708");
        assert_eq!(FieldElement::ONE.mul(&x), x);
        assert_eq!(mul_mod(&FieldElement::ONE, &x), x);
        // 2 * (p+1)/2 = 1
        let half = fe("7fffffffffffffffffffffffffffffffffffffffffffffffffffffff7ffffe18");
        assert_eq!(half.double(), FieldElement::ONE);
        assert_eq!(FieldElement::from_u64(2).mul(&half), FieldElement::ONE);
    }

    #[test]
    fn fast_and_serial_multipliers_agree() {
        // A few structured extremes plus a pseudorandom walk.
        let p_1 = p_minus(1);
        let cases = [
            (FieldElement::ZERO, FieldElement::ZERO),
            (p_1, p_1),
            (p_1, FieldElement::from_u64(2)),
            (fe("8000000000000000000000000000000000000000000000000000000000000000"), p_1),
        ];
        for (a, b) in cases {
            assert_eq!(a.mul(&b), mul_mod(&a, &b));
        }
        let mut x = FieldElement::from_u64(3);
        let mut y = p_minus(7);
        for _ in 0..200 {
            assert_eq!(x.mul(&y), mul_mod(&x, &y));
            let next = x.mul(&y).add(&FieldElement::ONE);
            x = y;
            y = next;
        }
    }

    #[test]
    fn multiplier_runs_exactly_256_iterations() {
        for (a, b) in [
            (FieldElement::ZERO, FieldElement::ZERO),
            (FieldElement::ONE, FieldElement::ONE),
            (p_minus(1), p_minus(2)),
            (FieldElement::from_u64(0xffff_ffff), p_minus(977)),
        ] {
            let mut rec = CountingRecorder::default();
            let _ = mul_mod_traced(&mut rec, &a, &b);
            assert_eq!(rec.ops, [MaluOpcode::Mul]);
            assert_eq!(rec.steps, 256);
        }
    }

    #[test]
    fn inverse_basics() {
        assert_eq!(inv_mod(&FieldElement::ONE).unwrap(), FieldElement::ONE);
        assert_eq!(inv_mod(&FieldElement::ZERO), Err(Error::NonInvertible));
        // inv(2) = (p+1)/2
        let half = fe("7fffffffffffffffffffffffffffffffffffffffffffffffffffffff7ffffe18");
        assert_eq!(inv_mod(&FieldElement::from_u64(2)).unwrap(), half);
        // inv(p-1) = p-1 since (p-1)^2 = 1
        assert_eq!(inv_mod(&p_minus(1)).unwrap(), p_minus(1));
    }

    #[test]
    fn inverse_roundtrip_walk() {
        let mut x = FieldElement::from_u64(0x1234_5678_9abc_def1);
        for i in 0..250 {
            let inv = x.invert().unwrap();
            assert_eq!(x.mul(&inv), FieldElement::ONE, "iteration {i}");
            x = x.mul(&x).add(&FieldElement::from_u64(i + 1));
        }
    }

    #[test]
    fn inverter_reports_steps() {
        let mut shifts = 0usize;
        let mut subs = 0usize;
        let z = fe("00000000000000000000000000000000000000000000000000000000000000aa");
        let _ = inv_mod_steps(&z, |step| match step.op {
            MaluOpcode::Shift => shifts += 1,
            MaluOpcode::Sub => subs += 1,
            other => panic!("unexpected step {other}"),
        })
        .unwrap();
        assert!(shifts > 0 && subs > 0);

        let mut rec = CountingRecorder::default();
        let _ = inv_mod_traced(&mut rec, &z).unwrap();
        assert_eq!(rec.ops, [MaluOpcode::Inv]);
        assert_eq!(rec.steps, shifts + subs);
    }

    #[test]
    fn hex_io_is_strict() {
        let x = fe("0000000000000000000000000000000000000000000000000000000000000001");
        assert_eq!(x, FieldElement::ONE);
        assert_eq!(
            FieldElement::ONE.to_hex(),
            "0000000000000000000000000000000000000000000000000000000000000001"
        );
        assert!(FieldElement::from_hex("00").is_err());
        assert!(FieldElement::from_hex(&"0".repeat(63)).is_err());
        assert!(FieldElement::from_hex(&"0".repeat(65)).is_err());
        assert!(FieldElement::from_hex(&format!("{}zz", "0".repeat(62))).is_err());
        // p itself is not a canonical residue.
        assert!(FieldElement::from_hex(
            "fffffffffffffffffffffffffffffffffffffffffffffffffffffffefffffc2f"
        )
        .is_err());
        // p - 1 is.
        assert_eq!(
            FieldElement::from_hex(
                "fffffffffffffffffffffffffffffffffffffffffffffffffffffffefffffc2e"
            )
            .unwrap(),
            p_minus(1)
        );
    }

    #[test]
    fn executors_agree_and_record() {
        let a = fe("00000000000000000000000000000000000000000000000000000000000000ff");
        let b = p_minus(3);
        let mut rec = CountingRecorder::default();
        let mut traced = MaluExecutor(&mut rec);
        let fast = FastExecutor.mul(&a, &b);
        assert_eq!(traced.mul(&a, &b), fast);
        assert_eq!(traced.add(&a, &b), FastExecutor.add(&a, &b));
        assert_eq!(traced.sub(&a, &b), FastExecutor.sub(&a, &b));
        assert_eq!(rec.ops, [MaluOpcode::Mul, MaluOpcode::Add, MaluOpcode::Sub]);
        assert_eq!(rec.steps, 256);
    }
}
