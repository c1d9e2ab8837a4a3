//! secp256k1 point arithmetic built on a single complete addition formula.
//!
//! Points are held in homogeneous projective coordinates `(X : Y : Z)` for
//! the curve `y^2 = x^3 + 7`; the identity is `(0 : 1 : 0)`. Addition uses
//! the complete formula for short Weierstrass curves with `a = 0`, evaluated
//! as a fixed 33-step straight line of modular operations with no
//! data-dependent branching. The same circuit doubles a point by feeding it
//! both operands, which is exactly how the modeled hardware reuses its
//! point-addition units.

use alloc::string::String;
use core::fmt;
use core::ops::Add;

use crate::error::{Error, Result};
use crate::fp256::{
    FastExecutor, FieldElement, FieldExecutor, MaluExecutor, MaluOpcode, MaluRecorder,
};

/// `b = 7`, the curve constant.
pub const B: FieldElement = FieldElement::from_limbs_unchecked([7, 0, 0, 0]);

/// `3b = 21`, precomputed for the addition formula.
pub const B3: FieldElement = FieldElement::from_limbs_unchecked([21, 0, 0, 0]);

const GENERATOR_X: FieldElement = FieldElement::from_limbs_unchecked([
    0x59F2_815B_16F8_1798,
    0x029B_FCDB_2DCE_28D9,
    0x55A0_6295_CE87_0B07,
    0x79BE_667E_F9DC_BBAC,
]);

const GENERATOR_Y: FieldElement = FieldElement::from_limbs_unchecked([
    0x9C47_D08F_FB10_D4B8,
    0xFD17_B448_A685_5419,
    0x5DA4_FBFC_0E11_08A8,
    0x483A_DA77_26A3_C465,
]);

/// A point in homogeneous projective coordinates.
///
/// Representations are not unique: `(cX : cY : cZ)` is the same group
/// element for any `c != 0`. Compare with [`ProjectivePoint::affine_eq`],
/// never field-wise, which is why this type does not implement `PartialEq`.
#[derive(Clone, Copy, Debug)]
pub struct ProjectivePoint {
    pub x: FieldElement,
    pub y: FieldElement,
    pub z: FieldElement,
}

/// An affine point or the marked point at infinity (coordinates zeroed).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AffinePoint {
    pub x: FieldElement,
    pub y: FieldElement,
    pub infinity: bool,
}

impl ProjectivePoint {
    /// The group identity `(0 : 1 : 0)`.
    pub const IDENTITY: ProjectivePoint = ProjectivePoint {
        x: FieldElement::ZERO,
        y: FieldElement::ONE,
        z: FieldElement::ZERO,
    };

    /// The standard base point `G`.
    pub fn generator() -> ProjectivePoint {
        ProjectivePoint { x: GENERATOR_X, y: GENERATOR_Y, z: FieldElement::ONE }
    }

    pub fn is_identity(&self) -> bool {
        self.z.is_zero()
    }

    /// `(X : -Y : Z)`.
    pub fn negate(&self) -> ProjectivePoint {
        ProjectivePoint { x: self.x, y: self.y.negate(), z: self.z }
    }

    /// Equality of the represented group elements, via cross-multiplication;
    /// any point with `Z = 0` is the identity class.
    pub fn affine_eq(&self, other: &ProjectivePoint) -> bool {
        match (self.is_identity(), other.is_identity()) {
            (true, true) => true,
            (true, false) | (false, true) => false,
            (false, false) => {
                self.x.mul(&other.z) == other.x.mul(&self.z)
                    && self.y.mul(&other.z) == other.y.mul(&self.z)
            }
        }
    }

    /// True iff the coordinates satisfy `Y^2 Z = X^3 + 7 Z^3` and are not
    /// the invalid all-degenerate case `Y = Z = 0`.
    pub fn is_on_curve(&self) -> bool {
        if self.y.is_zero() && self.z.is_zero() {
            return false;
        }
        let lhs = self.y.square().mul(&self.z);
        let z3 = self.z.square().mul(&self.z);
        let rhs = self.x.square().mul(&self.x).add(&B.mul(&z3));
        lhs == rhs
    }

    /// Normalises to affine coordinates; `Z = 0` becomes the marked
    /// infinity encoding.
    pub fn to_affine(&self) -> AffinePoint {
        if self.is_identity() {
            return AffinePoint::IDENTITY;
        }
        let zinv = self.z.invert().expect("z != 0");
        AffinePoint {
            x: self.x.mul(&zinv),
            y: self.y.mul(&zinv),
            infinity: false,
        }
    }
}

impl AffinePoint {
    /// The affine encoding of the identity: flagged, coordinates zeroed.
    pub const IDENTITY: AffinePoint = AffinePoint {
        x: FieldElement::ZERO,
        y: FieldElement::ZERO,
        infinity: true,
    };

    pub fn generator() -> AffinePoint {
        AffinePoint { x: GENERATOR_X, y: GENERATOR_Y, infinity: false }
    }

    pub fn new(x: FieldElement, y: FieldElement) -> AffinePoint {
        AffinePoint { x, y, infinity: false }
    }

    pub fn to_projective(&self) -> ProjectivePoint {
        if self.infinity {
            ProjectivePoint::IDENTITY
        } else {
            ProjectivePoint { x: self.x, y: self.y, z: FieldElement::ONE }
        }
    }

    pub fn is_on_curve(&self) -> bool {
        self.infinity || self.y.square() == self.x.square().mul(&self.x).add(&B)
    }

    pub fn negate(&self) -> AffinePoint {
        if self.infinity {
            *self
        } else {
            AffinePoint { x: self.x, y: self.y.negate(), infinity: false }
        }
    }
}

/// Complete point addition: valid for every input pair, including identity
/// operands, doubling (`P = Q`), and inverse pairs (`P = -Q`, which yields
/// `Z = 0`).
pub fn point_add_complete(p: &ProjectivePoint, q: &ProjectivePoint) -> ProjectivePoint {
    add_complete_generic(&mut FastExecutor, p, q)
}

/// [`point_add_complete`] executed on the ALU model, reporting each of the
/// 33 operations (and the multiplier iterations) to `rec`.
pub fn point_add_complete_traced<R: MaluRecorder>(
    rec: &mut R,
    p: &ProjectivePoint,
    q: &ProjectivePoint,
) -> ProjectivePoint {
    add_complete_generic(&mut MaluExecutor(rec), p, q)
}

/// Point doubling through the very same addition circuit: `2P = P + P`,
/// bit-identical to [`point_add_complete`] with equal operands.
pub fn point_double(p: &ProjectivePoint) -> ProjectivePoint {
    point_add_complete(p, p)
}

/// [`point_double`] on the ALU model.
pub fn point_double_traced<R: MaluRecorder>(
    rec: &mut R,
    p: &ProjectivePoint,
) -> ProjectivePoint {
    point_add_complete_traced(rec, p, p)
}

impl Add for ProjectivePoint {
    type Output = ProjectivePoint;
    fn add(self, rhs: ProjectivePoint) -> ProjectivePoint {
        point_add_complete(&self, &rhs)
    }
}

impl Add<&ProjectivePoint> for &ProjectivePoint {
    type Output = ProjectivePoint;
    fn add(self, rhs: &ProjectivePoint) -> ProjectivePoint {
        point_add_complete(self, rhs)
    }
}

/// The complete addition formula for `y^2 = x^3 + b` with `b3 = 3b`,
/// written as a fixed straight line over a field executor.
fn add_complete_generic<E: FieldExecutor>(
    e: &mut E,
    p: &ProjectivePoint,
    q: &ProjectivePoint,
) -> ProjectivePoint {
    let t0 = e.mul(&p.x, &q.x); // 1
    let t1 = e.mul(&p.y, &q.y); // 2
    let t2 = e.mul(&p.z, &q.z); // 3
    let t3 = e.add(&p.x, &p.y); // 4
    let t4 = e.add(&q.x, &q.y); // 5
    let t3 = e.mul(&t3, &t4); // 6
    let t4 = e.add(&t0, &t1); // 7
    let t3 = e.sub(&t3, &t4); // 8
    let t4 = e.add(&p.y, &p.z); // 9
    let x3 = e.add(&q.y, &q.z); // 10
    let t4 = e.mul(&t4, &x3); // 11
    let x3 = e.add(&t1, &t2); // 12
    let t4 = e.sub(&t4, &x3); // 13
    let x3 = e.add(&p.x, &p.z); // 14
    let y3 = e.add(&q.x, &q.z); // 15
    let x3 = e.mul(&x3, &y3); // 16
    let y3 = e.add(&t0, &t2); // 17
    let y3 = e.sub(&x3, &y3); // 18
    let x3 = e.add(&t0, &t0); // 19
    let t0 = e.add(&x3, &t0); // 20
    let t2 = e.mul(&B3, &t2); // 21
    let z3 = e.add(&t1, &t2); // 22
    let t1 = e.sub(&t1, &t2); // 23
    let y3 = e.mul(&B3, &y3); // 24
    let x3 = e.mul(&t4, &y3); // 25
    let t2 = e.mul(&t3, &t1); // 26
    let x3 = e.sub(&t2, &x3); // 27
    let y3 = e.mul(&y3, &t0); // 28
    let t1 = e.mul(&t1, &z3); // 29
    let y3 = e.add(&t1, &y3); // 30
    let t0 = e.mul(&t0, &t3); // 31
    let z3 = e.mul(&z3, &t4); // 32
    let z3 = e.add(&z3, &t0); // 33
    ProjectivePoint { x: x3, y: y3, z: z3 }
}

/// Static description of one step of the addition circuit: the opcode and
/// which coordinates of the two input points it reads (temporaries are
/// internal to the unit and not listed). Bit 0 = X, bit 1 = Y, bit 2 = Z.
#[derive(Clone, Copy, Debug)]
pub struct EcpaStep {
    pub op: MaluOpcode,
    pub reads_p: u8,
    pub reads_q: u8,
}

/// The 33 steps of the complete adder, in execution order. The simulator
/// derives its per-unit event stream and cycle costs from this table; a
/// test pins it against the opcode sequence actually recorded by
/// [`point_add_complete_traced`].
pub const ECPA_STEPS: [EcpaStep; 33] = {
    use MaluOpcode::{Add, Mul, Sub};
    const fn s(op: MaluOpcode, reads_p: u8, reads_q: u8) -> EcpaStep {
        EcpaStep { op, reads_p, reads_q }
    }
    [
        s(Mul, 0b001, 0b001), // 1: X1*X2
        s(Mul, 0b010, 0b010), // 2: Y1*Y2
        s(Mul, 0b100, 0b100), // 3: Z1*Z2
        s(Add, 0b011, 0b000), // 4: X1+Y1
        s(Add, 0b000, 0b011), // 5: X2+Y2
        s(Mul, 0b000, 0b000), // 6
        s(Add, 0b000, 0b000), // 7
        s(Sub, 0b000, 0b000), // 8
        s(Add, 0b110, 0b000), // 9: Y1+Z1
        s(Add, 0b000, 0b110), // 10: Y2+Z2
        s(Mul, 0b000, 0b000), // 11
        s(Add, 0b000, 0b000), // 12
        s(Sub, 0b000, 0b000), // 13
        s(Add, 0b101, 0b000), // 14: X1+Z1
        s(Add, 0b000, 0b101), // 15: X2+Z2
        s(Mul, 0b000, 0b000), // 16
        s(Add, 0b000, 0b000), // 17
        s(Sub, 0b000, 0b000), // 18
        s(Add, 0b000, 0b000), // 19
        s(Add, 0b000, 0b000), // 20
        s(Mul, 0b000, 0b000), // 21: b3*t2
        s(Add, 0b000, 0b000), // 22
        s(Sub, 0b000, 0b000), // 23
        s(Mul, 0b000, 0b000), // 24: b3*y3
        s(Mul, 0b000, 0b000), // 25
        s(Mul, 0b000, 0b000), // 26
        s(Sub, 0b000, 0b000), // 27
        s(Mul, 0b000, 0b000), // 28
        s(Mul, 0b000, 0b000), // 29
        s(Add, 0b000, 0b000), // 30
        s(Mul, 0b000, 0b000), // 31
        s(Mul, 0b000, 0b000), // 32
        s(Add, 0b000, 0b000), // 33
    ]
};

/// Operation census of the adder (multiplications, additions, subtractions).
pub const fn ecpa_op_counts() -> (u64, u64, u64) {
    let mut muls = 0;
    let mut adds = 0;
    let mut subs = 0;
    let mut i = 0;
    while i < ECPA_STEPS.len() {
        match ECPA_STEPS[i].op {
            MaluOpcode::Mul => muls += 1,
            MaluOpcode::Add => adds += 1,
            MaluOpcode::Sub => subs += 1,
            _ => {}
        }
        i += 1;
    }
    (muls, adds, subs)
}

// --- uncompressed SEC1 encoding -------------------------------------------

/// A 65-byte uncompressed public key: `0x04 || X || Y`, both big-endian.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct PublicKeyEncoding([u8; 65]);

impl PublicKeyEncoding {
    pub fn as_bytes(&self) -> &[u8; 65] {
        &self.0
    }

    /// 130 lowercase hex digits, `04`-prefixed.
    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl fmt::Display for PublicKeyEncoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl fmt::Debug for PublicKeyEncoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PublicKeyEncoding({})", self.to_hex())
    }
}

/// Encodes an affine point as `0x04 || X || Y`; the identity has no
/// uncompressed encoding.
pub fn encode_pubkey(point: &AffinePoint) -> Result<PublicKeyEncoding> {
    if point.infinity {
        return Err(Error::NotEncodable);
    }
    let mut out = [0u8; 65];
    out[0] = 0x04;
    out[1..33].copy_from_slice(&point.x.to_be_bytes());
    out[33..65].copy_from_slice(&point.y.to_be_bytes());
    Ok(PublicKeyEncoding(out))
}

/// Decodes and fully validates a 65-byte uncompressed public key: prefix,
/// canonical coordinates, and curve membership.
pub fn decode_pubkey(bytes: &[u8]) -> Result<AffinePoint> {
    let bytes: &[u8; 65] = bytes
        .try_into()
        .map_err(|_| Error::MalformedKey("expected 65 bytes"))?;
    if bytes[0] != 0x04 {
        return Err(Error::MalformedKey("expected uncompressed prefix 0x04"));
    }
    let x = FieldElement::from_be_bytes(bytes[1..33].try_into().unwrap())
        .map_err(|_| Error::MalformedKey("x is not a canonical field element"))?;
    let y = FieldElement::from_be_bytes(bytes[33..65].try_into().unwrap())
        .map_err(|_| Error::MalformedKey("y is not a canonical field element"))?;
    let point = AffinePoint::new(x, y);
    if !point.is_on_curve() {
        return Err(Error::MalformedKey("point is not on the curve"));
    }
    Ok(point)
}

/// Parses a 130-hex-digit `04`-prefixed key string.
pub fn decode_pubkey_hex(s: &str) -> Result<AffinePoint> {
    if s.len() != 130 {
        return Err(Error::MalformedKey("expected 130 hex digits"));
    }
    let mut bytes = [0u8; 65];
    hex::decode_to_slice(s, &mut bytes)
        .map_err(|_| Error::MalformedKey("invalid hex"))?;
    decode_pubkey(&bytes)
}
