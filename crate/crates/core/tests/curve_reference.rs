//! The complete-addition formula against the textbook affine reference.
//!
//! The reference uses chord/tangent slope formulas with explicit case
//! analysis — a completely different derivation — so agreement over random
//! points and over the completeness corner cases is strong evidence that
//! the straight-line formula is right.

use k1sim_core::curve::{self, AffinePoint, ProjectivePoint};
use k1sim_core::FieldElement;
use num_bigint::BigUint;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn to_oracle(p: &ProjectivePoint) -> k1sim_oracle::Point {
    let a = p.to_affine();
    if a.infinity {
        k1sim_oracle::Point::identity()
    } else {
        k1sim_oracle::Point::new(
            k1sim_oracle::from_be_bytes(&a.x.to_be_bytes()),
            k1sim_oracle::from_be_bytes(&a.y.to_be_bytes()),
        )
    }
}

fn from_oracle(p: &k1sim_oracle::Point) -> ProjectivePoint {
    if p.infinity {
        return ProjectivePoint::IDENTITY;
    }
    AffinePoint::new(
        FieldElement::from_be_bytes(&k1sim_oracle::to_be_bytes(&p.x)).unwrap(),
        FieldElement::from_be_bytes(&k1sim_oracle::to_be_bytes(&p.y)).unwrap(),
    )
    .to_projective()
}

/// A random curve point obtained as a random small-ish multiple of G via
/// the reference scalar multiplication (never via the code under test).
fn random_point(rng: &mut StdRng) -> k1sim_oracle::Point {
    let mut bytes = [0u8; 32];
    rng.fill(&mut bytes);
    let k = BigUint::from_bytes_be(&bytes);
    k1sim_oracle::scalar_mul(&k, &k1sim_oracle::generator())
}

/// Multiplies a projective representation by a random nonzero factor, so
/// the formula also sees non-normalised inputs.
fn rescale(p: &ProjectivePoint, rng: &mut StdRng) -> ProjectivePoint {
    let c = FieldElement::from_u64(rng.gen_range(1..u64::MAX));
    ProjectivePoint { x: p.x.mul(&c), y: p.y.mul(&c), z: p.z.mul(&c) }
}

#[test]
fn random_additions_match_reference() {
    let mut rng = StdRng::seed_from_u64(0xADD_02AC1E);
    for i in 0..300 {
        let pa = random_point(&mut rng);
        let pb = random_point(&mut rng);
        let a = rescale(&from_oracle(&pa), &mut rng);
        let b = rescale(&from_oracle(&pb), &mut rng);

        let got = curve::point_add_complete(&a, &b);
        assert!(got.is_on_curve(), "sum off-curve at {i}");
        let expected = k1sim_oracle::point_add(&pa, &pb);
        assert_eq!(to_oracle(&got), expected, "add mismatch at {i}");

        let doubled = curve::point_double(&a);
        assert_eq!(
            to_oracle(&doubled),
            k1sim_oracle::point_double(&pa),
            "double mismatch at {i}"
        );
    }
}

#[test]
fn completeness_corner_cases_match_reference() {
    let mut rng = StdRng::seed_from_u64(0xC0121E85);
    let g = ProjectivePoint::generator();
    for _ in 0..50 {
        let p_ref = random_point(&mut rng);
        let p = rescale(&from_oracle(&p_ref), &mut rng);

        // P + identity, identity + P.
        assert!(curve::point_add_complete(&p, &ProjectivePoint::IDENTITY).affine_eq(&p));
        assert!(curve::point_add_complete(&ProjectivePoint::IDENTITY, &p).affine_eq(&p));

        // P + P must equal the tangent-rule double.
        let sum = curve::point_add_complete(&p, &rescale(&p, &mut rng));
        assert_eq!(to_oracle(&sum), k1sim_oracle::point_double(&p_ref));

        // P + (-P) must land exactly on Z = 0.
        let cancel = curve::point_add_complete(&p, &rescale(&p.negate(), &mut rng));
        assert!(cancel.z.is_zero());

        // P + (P + G) exercises unequal-x addition near-degeneracies.
        let shifted = curve::point_add_complete(&p, &g);
        let got = curve::point_add_complete(&p, &shifted);
        let expected =
            k1sim_oracle::point_add(&p_ref, &k1sim_oracle::point_add(&p_ref, &k1sim_oracle::generator()));
        assert_eq!(to_oracle(&got), expected);
    }
}

#[test]
fn generator_matches_reference_constants() {
    let g = AffinePoint::generator();
    let oracle_g = k1sim_oracle::generator();
    assert_eq!(k1sim_oracle::from_be_bytes(&g.x.to_be_bytes()), oracle_g.x);
    assert_eq!(k1sim_oracle::from_be_bytes(&g.y.to_be_bytes()), oracle_g.y);
}
