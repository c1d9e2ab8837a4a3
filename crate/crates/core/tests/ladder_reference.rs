//! Both ladders against the reference double-and-add implementation, across
//! scalar sizes from one bit up to full width, plus group-order edge cases.

use k1sim_core::curve::ProjectivePoint;
use k1sim_core::ladder::{self, Scalar256};
use k1sim_core::Error;
use num_bigint::BigUint;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn oracle_mul(k: &Scalar256, p: &k1sim_oracle::Point) -> k1sim_oracle::Point {
    k1sim_oracle::scalar_mul(&BigUint::from_bytes_be(&k.to_be_bytes()), p)
}

fn assert_matches_oracle(q: &ProjectivePoint, expected: &k1sim_oracle::Point, ctx: &str) {
    let affine = q.to_affine();
    if expected.infinity {
        assert!(affine.infinity, "{ctx}: expected infinity");
        return;
    }
    assert!(!affine.infinity, "{ctx}: unexpected infinity");
    assert_eq!(
        k1sim_oracle::from_be_bytes(&affine.x.to_be_bytes()),
        expected.x,
        "{ctx}: x"
    );
    assert_eq!(
        k1sim_oracle::from_be_bytes(&affine.y.to_be_bytes()),
        expected.y,
        "{ctx}: y"
    );
}

#[test]
fn random_scalars_match_reference_and_each_other() {
    let mut rng = StdRng::seed_from_u64(0x1ADD_E201);
    let g = ProjectivePoint::generator();
    let oracle_g = k1sim_oracle::generator();
    for i in 0..120 {
        // Mix of bit lengths: full-width, short, and in-between.
        let k = match i % 4 {
            0 => Scalar256::random_full_width(&mut rng),
            1 => Scalar256::from_u64(rng.gen_range(1..=u64::MAX)).unwrap(),
            2 => {
                let mut limbs = [rng.gen(), rng.gen(), 0, 0];
                limbs[1] |= 1 << 63;
                Scalar256::from_limbs(limbs).unwrap()
            }
            _ => {
                let mut limbs: [u64; 4] = rng.gen();
                limbs[3] |= 1; // avoid the (astronomically unlikely) zero
                Scalar256::from_limbs(limbs).unwrap()
            }
        };
        let hardened = ladder::scalar_mul_hardened(&k, &g).unwrap();
        let baseline = ladder::scalar_mul_baseline(&k, &g).unwrap();
        assert!(hardened.affine_eq(&baseline), "ladders disagree at {i}");
        assert_matches_oracle(&hardened, &oracle_mul(&k, &oracle_g), &format!("case {i}"));
    }
}

#[test]
fn every_small_scalar_up_to_64() {
    let g = ProjectivePoint::generator();
    let oracle_g = k1sim_oracle::generator();
    for v in 1u64..=64 {
        let k = Scalar256::from_u64(v).unwrap();
        let hardened = ladder::scalar_mul_hardened(&k, &g).unwrap();
        let baseline = ladder::scalar_mul_baseline(&k, &g).unwrap();
        assert!(hardened.affine_eq(&baseline), "k = {v}");
        assert_matches_oracle(&hardened, &oracle_mul(&k, &oracle_g), &format!("k = {v}"));
    }
}

#[test]
fn non_generator_base_points() {
    let mut rng = StdRng::seed_from_u64(0xBA5E);
    let oracle_g = k1sim_oracle::generator();
    for i in 0..20 {
        // Pick a random base point via the oracle, then multiply it.
        let base_scalar = Scalar256::random_full_width(&mut rng);
        let base_oracle = oracle_mul(&base_scalar, &oracle_g);
        let base = k1sim_core::AffinePoint::new(
            k1sim_core::FieldElement::from_be_bytes(&k1sim_oracle::to_be_bytes(&base_oracle.x))
                .unwrap(),
            k1sim_core::FieldElement::from_be_bytes(&k1sim_oracle::to_be_bytes(&base_oracle.y))
                .unwrap(),
        )
        .to_projective();

        let k = Scalar256::from_u64(rng.gen_range(2..=u64::MAX)).unwrap();
        let hardened = ladder::scalar_mul_hardened(&k, &base).unwrap();
        assert_matches_oracle(&hardened, &oracle_mul(&k, &base_oracle), &format!("base {i}"));
    }
}

#[test]
fn group_order_edge_cases() {
    let g = ProjectivePoint::generator();
    let n_bytes = k1sim_oracle::to_be_bytes(&k1sim_oracle::group_order());
    let n = Scalar256::from_be_bytes(&n_bytes).unwrap();

    // n * G is the point at infinity: the projective result must have z = 0
    // and key derivation must refuse it.
    let at_infinity = ladder::scalar_mul_hardened(&n, &g).unwrap();
    assert!(at_infinity.is_identity());
    assert_eq!(ladder::derive_pubkey(&n).err(), Some(Error::DegenerateKey));

    // (n - 1) * G = -G.
    let n_minus_1 =
        Scalar256::from_be_bytes(&k1sim_oracle::to_be_bytes(&(k1sim_oracle::group_order() - 1u32)))
            .unwrap();
    let got = ladder::scalar_mul_hardened(&n_minus_1, &g).unwrap();
    assert!(got.affine_eq(&g.negate()));

    // (n + 1) * G = G: the scalar is taken verbatim, not reduced.
    let n_plus_1 =
        Scalar256::from_be_bytes(&k1sim_oracle::to_be_bytes(&(k1sim_oracle::group_order() + 1u32)))
            .unwrap();
    let got = ladder::scalar_mul_hardened(&n_plus_1, &g).unwrap();
    assert!(got.affine_eq(&g));
    assert_eq!(
        ladder::derive_pubkey(&n_plus_1).unwrap().to_hex(),
        ladder::derive_pubkey(&Scalar256::from_u64(1).unwrap()).unwrap().to_hex()
    );
}

#[test]
fn derive_matches_reference_encoding() {
    let mut rng = StdRng::seed_from_u64(0xDE21_7E);
    let oracle_g = k1sim_oracle::generator();
    for _ in 0..10 {
        let k = Scalar256::random_full_width(&mut rng);
        let pk = ladder::derive_pubkey(&k).unwrap();
        let expected = oracle_mul(&k, &oracle_g);
        let mut expected_bytes = [0u8; 65];
        expected_bytes[0] = 0x04;
        expected_bytes[1..33].copy_from_slice(&k1sim_oracle::to_be_bytes(&expected.x));
        expected_bytes[33..65].copy_from_slice(&k1sim_oracle::to_be_bytes(&expected.y));
        assert_eq!(pk.as_bytes(), &expected_bytes);
    }
}
