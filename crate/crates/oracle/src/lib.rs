//! Reference arithmetic for cross-checking the main library.
//!
//! Everything here is deliberately implemented on a different code path from
//! `k1sim-core`: big integers via `num-bigint`, inversion via the euclidean
//! extended gcd, and point arithmetic in affine coordinates using the
//! textbook chord-and-tangent slope formulas with explicit case analysis.
//! None of the production limb arithmetic, the complete-addition formula, or
//! the ladder is reused, so agreement between the two sides is meaningful.
//!
//! This crate is test support only; it trades speed and side-channel
//! behaviour for obviousness.

use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

fn prime_ref() -> &'static BigUint {
    static PRIME: OnceLock<BigUint> = OnceLock::new();
    PRIME.get_or_init(|| {
        let one = BigUint::one();
        (&one << 256u32) - (&one << 32u32) - BigUint::from(977u32)
    })
}

/// secp256k1 field prime `p = 2^256 - 2^32 - 977`.
pub fn prime() -> BigUint {
    prime_ref().clone()
}

/// secp256k1 group order `n` (used only to probe order-related edge cases).
pub fn group_order() -> BigUint {
    BigUint::parse_bytes(
        b"FFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEBAAEDCE6AF48A03BBFD25E8CD0364141",
        16,
    )
    .unwrap()
}

/// Affine generator coordinates.
pub fn generator() -> Point {
    Point {
        x: BigUint::parse_bytes(
            b"79BE667EF9DCBBAC55A06295CE870B07029BFCDB2DCE28D959F2815B16F81798",
            16,
        )
        .unwrap(),
        y: BigUint::parse_bytes(
            b"483ADA7726A3C4655DA4FBFC0E1108A8FD17B448A68554199C47D08FFB10D4B8",
            16,
        )
        .unwrap(),
        infinity: false,
    }
}

/// Converts a 32-byte big-endian coordinate into a big integer.
pub fn from_be_bytes(bytes: &[u8; 32]) -> BigUint {
    BigUint::from_bytes_be(bytes)
}

/// Converts a field residue back to fixed-width big-endian bytes.
///
/// Panics if the value does not fit in 32 bytes; the oracle only ever
/// produces reduced residues, so that would be an internal error.
pub fn to_be_bytes(value: &BigUint) -> [u8; 32] {
    let raw = value.to_bytes_be();
    assert!(raw.len() <= 32, "oracle value exceeds 256 bits");
    let mut out = [0u8; 32];
    out[32 - raw.len()..].copy_from_slice(&raw);
    out
}

/// `(a + b) mod p`.
pub fn field_add(a: &BigUint, b: &BigUint) -> BigUint {
    (a + b) % prime_ref()
}

/// `(a - b) mod p`.
pub fn field_sub(a: &BigUint, b: &BigUint) -> BigUint {
    let p = prime_ref();
    ((a % p) + p - (b % p)) % p
}

/// `(a * b) mod p`.
pub fn field_mul(a: &BigUint, b: &BigUint) -> BigUint {
    (a * b) % prime_ref()
}

/// `a^-1 mod p` via the euclidean extended gcd, or `None` for `a = 0`.
pub fn field_inv(a: &BigUint) -> Option<BigUint> {
    let p = prime_ref();
    let a = a % p;
    if a.is_zero() {
        return None;
    }
    let ext = BigInt::from(a).extended_gcd(&BigInt::from(p.clone()));
    assert!(ext.gcd.is_one(), "p is prime, gcd must be 1");
    let p = BigInt::from(p.clone());
    let mut x = ext.x % &p;
    if x.is_negative() {
        x += &p;
    }
    Some(x.to_biguint().unwrap())
}

/// An affine secp256k1 point; `infinity` marks the group identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Point {
    pub x: BigUint,
    pub y: BigUint,
    pub infinity: bool,
}

impl Point {
    pub fn identity() -> Self {
        Point { x: BigUint::zero(), y: BigUint::zero(), infinity: true }
    }

    pub fn new(x: BigUint, y: BigUint) -> Self {
        Point { x, y, infinity: false }
    }

    /// True iff the point satisfies `y^2 = x^3 + 7` (or is the identity).
    pub fn is_on_curve(&self) -> bool {
        if self.infinity {
            return true;
        }
        let p = prime_ref();
        let lhs = (&self.y * &self.y) % p;
        let rhs = ((&self.x * &self.x * &self.x) + BigUint::from(7u32)) % p;
        lhs == rhs
    }

    pub fn negate(&self) -> Self {
        if self.infinity || self.y.is_zero() {
            self.clone()
        } else {
            Point { x: self.x.clone(), y: prime_ref() - &self.y, infinity: false }
        }
    }
}

/// Textbook affine addition with full case analysis.
///
/// Cases: identity operands, `P + (-P)`, doubling (tangent slope
/// `(3x^2) / (2y)`), and the generic chord slope `(y2 - y1) / (x2 - x1)`.
pub fn point_add(a: &Point, b: &Point) -> Point {
    if a.infinity {
        return b.clone();
    }
    if b.infinity {
        return a.clone();
    }
    if a.x == b.x {
        if field_add(&a.y, &b.y).is_zero() {
            // Vertical chord: P + (-P) = identity. Also covers doubling a
            // point with y = 0, which does not exist on this curve but is
            // handled for robustness.
            return Point::identity();
        }
        return point_double(a);
    }
    let lambda = field_mul(
        &field_sub(&b.y, &a.y),
        &field_inv(&field_sub(&b.x, &a.x)).expect("x1 != x2"),
    );
    chord_result(a, b, &lambda)
}

/// Textbook affine doubling via the tangent slope.
pub fn point_double(a: &Point) -> Point {
    if a.infinity || a.y.is_zero() {
        return Point::identity();
    }
    let three_x2 = field_mul(&BigUint::from(3u32), &field_mul(&a.x, &a.x));
    let lambda = field_mul(
        &three_x2,
        &field_inv(&field_add(&a.y, &a.y)).expect("y != 0"),
    );
    chord_result(a, a, &lambda)
}

fn chord_result(a: &Point, b: &Point, lambda: &BigUint) -> Point {
    let x3 = field_sub(&field_sub(&field_mul(lambda, lambda), &a.x), &b.x);
    let y3 = field_sub(&field_mul(lambda, &field_sub(&a.x, &x3)), &a.y);
    Point { x: x3, y: y3, infinity: false }
}

/// Plain MSB-first double-and-add scalar multiplication.
///
/// Branches on every key bit; that is fine here because this routine only
/// supplies expected values for tests.
pub fn scalar_mul(k: &BigUint, p: &Point) -> Point {
    let mut acc = Point::identity();
    for i in (0..k.bits()).rev() {
        acc = point_double(&acc);
        if k.bit(i) {
            acc = point_add(&acc, p);
        }
    }
    acc
}
