//! Library half of the `k1sim` binary: command logic that does not depend
//! on argument parsing, output formatting, and the self-check suite.
//!
//! Everything here returns data or `Result<_, String>`; the binary maps
//! `Err` strings to diagnostics on stderr with exit code 2 (usage error)
//! and property failures to exit code 1.

use std::fs;
use std::path::Path;

use k1sim_core::curve::encode_pubkey;
use k1sim_core::datapath::{report, CycleConfig};
use k1sim_core::ladder::{scalar_mul_baseline, scalar_mul_hardened};
use k1sim_core::{ProjectivePoint, Scalar256};

/// Generator coordinates in the uncompressed public-key wire format, as
/// published for secp256k1.
pub const GENERATOR_PUBKEY_HEX: &str = "0479BE667EF9DCBBAC55A06295CE870B07029BFCDB2DCE28D959F2815B16F81798483ADA7726A3C4655DA4FBFC0E1108A8FD17B448A68554199C47D08FFB10D4B8";

/// `2G` in the same format (standard vector).
pub const DOUBLE_GENERATOR_PUBKEY_HEX: &str = "04C6047F9441ED7D6D3045406E95C07CD85C778E4B8CEF3CA7ABAC09B95C709EE51AE168FEA63DC339A3C58419466CEAEEF7F632653266D0E1236431A950CFE52A";

/// Formats to three significant figures with plain (locale-independent)
/// notation: `1894.932 -> "1890"`, `33.773 -> "33.8"`, `7.5797 -> "7.58"`.
pub fn format_sig3(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exponent = x.abs().log10().floor() as i32;
    if exponent >= 2 {
        let scale = 10f64.powi(exponent - 2);
        format!("{}", (x / scale).round() * scale)
    } else {
        format!("{:.*}", (2 - exponent) as usize, x)
    }
}

/// Rounds a positive value to two significant figures (table precision).
pub fn round_2sf(x: f64) -> f64 {
    if x <= 0.0 || !x.is_finite() {
        return x;
    }
    let scale = 10f64.powi(x.log10().floor() as i32 - 1);
    (x / scale).round() * scale
}

/// Parses the 64-hex-digit scalar wire format.
pub fn parse_scalar(hex: &str) -> Result<Scalar256, String> {
    Scalar256::from_hex(hex).map_err(|e| format!("invalid --scalar: {e}"))
}

/// Loads a cycle configuration file, or the default when no path is given.
pub fn load_cycle_config(path: Option<&Path>) -> Result<CycleConfig, String> {
    match path {
        None => Ok(CycleConfig::default()),
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
            CycleConfig::from_key_values(&text)
                .map_err(|e| format!("invalid config {}: {e}", path.display()))
        }
    }
}

/// Uppercase hex, matching the usual presentation of curve constants.
pub fn to_hex_upper(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02X}")).collect()
}

pub fn to_hex_lower(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// One self-check outcome.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn pass(name: &'static str) -> Check {
        Check { name, passed: true, detail: String::new() }
    }

    fn verdict(name: &'static str, passed: bool, detail: String) -> Check {
        Check { name, passed, detail: if passed { String::new() } else { detail } }
    }
}

/// The built-in self-check suite: latency/throughput arithmetic at the two
/// reference clock frequencies, the generator and double-generator key
/// vectors, and cross-checks between the two ladder implementations.
pub fn run_selftest() -> Vec<Check> {
    run_selftest_with_generator(&ProjectivePoint::generator())
}

/// Same suite against an injected base point. The binary always passes the
/// true generator; tests inject a corrupted one to prove the suite can
/// fail.
pub fn run_selftest_with_generator(base: &ProjectivePoint) -> Vec<Check> {
    let mut checks = Vec::new();

    match report(1_895_000, 250.0e6) {
        Ok(r) => {
            let latency_ms = r.latency_seconds * 1e3;
            checks.push(Check::verdict(
                "table_latency_250mhz",
                (latency_ms - 7.58).abs() < 0.005,
                format!("latency {latency_ms} ms, expected 7.58"),
            ));
            let kbps = round_2sf(r.throughput_bits_per_second / 1e3);
            checks.push(Check::verdict(
                "table_throughput_250mhz",
                kbps == 34.0,
                format!("throughput {kbps} kbps, expected 34"),
            ));
        }
        Err(e) => checks.push(Check::verdict("table_latency_250mhz", false, format!("{e}"))),
    }

    match report(1_895_000, 90.0e6) {
        Ok(r) => {
            let latency_ms = round_2sf(r.latency_seconds * 1e3);
            checks.push(Check::verdict(
                "table_latency_90mhz",
                latency_ms == 21.0,
                format!("latency {latency_ms} ms, expected 21"),
            ));
            let kbps = round_2sf(r.throughput_bits_per_second / 1e3);
            checks.push(Check::verdict(
                "table_throughput_90mhz",
                kbps == 12.0,
                format!("throughput {kbps} kbps, expected 12"),
            ));
        }
        Err(e) => checks.push(Check::verdict("table_latency_90mhz", false, format!("{e}"))),
    }

    let vector = |name: &'static str, k: u64, expected: &str| -> Check {
        let scalar = Scalar256::from_u64(k).expect("nonzero");
        let result = scalar_mul_hardened(&scalar, base)
            .map(|q| q.to_affine())
            .and_then(|q| encode_pubkey(&q));
        match result {
            Ok(encoding) => {
                let got = to_hex_upper(encoding.as_bytes());
                Check::verdict(name, got == expected, format!("got {got}"))
            }
            Err(e) => Check::verdict(name, false, format!("{e}")),
        }
    };
    checks.push(vector("generator_vector", 1, GENERATOR_PUBKEY_HEX));
    checks.push(vector("double_generator_vector", 2, DOUBLE_GENERATOR_PUBKEY_HEX));

    let k = Scalar256::from_limbs([
        0x0123_4567_89ab_cdef,
        0xfedc_ba98_7654_3210,
        0x0f1e_2d3c_4b5a_6978,
        0x8001_0203_0405_0607,
    ])
    .expect("nonzero");
    match (scalar_mul_hardened(&k, base), scalar_mul_baseline(&k, base)) {
        (Ok(h), Ok(b)) => checks.push(Check::verdict(
            "ladders_agree",
            h.affine_eq(&b),
            "hardened and baseline ladders disagree".into(),
        )),
        (h, b) => checks.push(Check::verdict(
            "ladders_agree",
            false,
            format!("hardened: {:?}, baseline: {:?}", h.err(), b.err()),
        )),
    }

    match scalar_mul_hardened(&Scalar256::from_u64(5).expect("nonzero"), base) {
        Ok(q) => {
            let check = encode_pubkey(&q.to_affine())
                .and_then(|enc| {
                    k1sim_core::curve::decode_pubkey(enc.as_bytes()).map(|p| (enc, p))
                })
                .map(|(enc, decoded)| {
                    encode_pubkey(&decoded).map_or(false, |again| {
                        again.as_bytes() == enc.as_bytes()
                    })
                });
            match check {
                Ok(ok) => checks.push(Check::verdict(
                    "encode_decode_roundtrip",
                    ok,
                    "re-encoded key differs".into(),
                )),
                Err(e) => {
                    checks.push(Check::verdict("encode_decode_roundtrip", false, format!("{e}")))
                }
            }
        }
        Err(e) => checks.push(Check::verdict("encode_decode_roundtrip", false, format!("{e}"))),
    }

    if checks.iter().all(|c| c.passed) {
        checks.push(Check::pass("all"));
    } else {
        checks.push(Check::verdict("all", false, "at least one check failed".into()));
    }
    checks
}
