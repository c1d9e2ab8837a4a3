//! Side-channel analysis of simulated operation traces.
//!
//! Three analyses, in increasing order of statistical machinery:
//!
//! 1. **Shape uniformity** ([`check_shape_uniformity`]): do the ladder
//!    phases of many traces present the *same* observable schedule (unit,
//!    opcode, write-enable pattern), regardless of the scalar?
//! 2. **Baseline contrast** ([`contrast_iteration_shapes`]): where exactly
//!    do two traces diverge, iteration by iteration? On the leaky baseline
//!    the divergent iterations are precisely the positions where the two
//!    scalars' bits differ.
//! 3. **Fixed-vs-random Welch t-test** ([`welch_ttest`]): simulate many
//!    runs with a fixed scalar and many with random scalars, extract a
//!    simple power value per register write, add Gaussian measurement
//!    noise, and compare the two groups point by point. Any point with
//!    `|t|` above the conventional ±4.5 leakage-assessment threshold flags
//!    a distinguisher.
//!
//! Power samples are taken at *write-bearing* ladder-phase events only
//! (register loads and commits): writes dominate the modeled consumption,
//! and restricting to them keeps every trace of a given scalar width
//! aligned sample-for-sample. Two models are available: the
//! *operation-slot* channel encodes which unit/opcode/bank combination is
//! active (this is what the hardened datapath is supposed to flatten), and
//! the *data-value* channel is the Hamming weight of the written data
//! (deliberately not flattened — the design randomises schedule, not data).

use alloc::vec::Vec;

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

use crate::datapath::{
    simulate, trace_shape, CycleConfig, DatapathKind, OperationTrace, SimulationOutput,
    TraceEvent, Unit,
};
use crate::error::{Error, Result};
use crate::ladder::Scalar256;
use crate::ProjectivePoint;

/// The conventional pass/fail threshold for leakage-assessment t-tests.
pub const T_TEST_THRESHOLD: f64 = 4.5;

/// What a power sample measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LeakageModel {
    /// Which unit, opcode, and write-bank pattern is active. The hardened
    /// schedule must make this channel carry no scalar information.
    OperationSlot,
    /// Hamming weight of the written data. Carries the (blinded-in-hardware,
    /// unblinded here) intermediate values; reported for context, not gated.
    DataValue,
}

impl LeakageModel {
    pub fn name(self) -> &'static str {
        match self {
            LeakageModel::OperationSlot => "operation-slot",
            LeakageModel::DataValue => "data-value",
        }
    }
}

/// One simulated power trace: a sample per write-bearing ladder event.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerTrace {
    pub samples: Vec<f64>,
}

/// Distinct slots map to values at least eight units apart — several noise
/// standard deviations at the default sigma, as operation-level consumption
/// differences dwarf measurement noise on an unprotected implementation.
fn slot_signature(event: &TraceEvent) -> f64 {
    let unit = match event.unit {
        Unit::EcpaA => 0u32,
        Unit::EcpaB => 1,
        Unit::Bia => 2,
        Unit::Ctrl => 3,
    };
    let opcode = event.opcode as u32;
    (unit * 512 + opcode * 64 + event.writes.bank_mask() as u32 * 8) as f64
}

/// Projects the ladder phase of a trace onto noise-free power samples.
pub fn extract_power(trace: &OperationTrace, model: LeakageModel) -> PowerTrace {
    let samples = trace
        .ladder_events()
        .iter()
        .filter(|e| !e.writes.is_empty())
        .map(|e| match model {
            LeakageModel::OperationSlot => slot_signature(e),
            LeakageModel::DataValue => e.data_hw as f64,
        })
        .collect();
    PowerTrace { samples }
}

impl PowerTrace {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Adds i.i.d. Gaussian measurement noise with standard deviation
    /// `sigma` to every sample.
    pub fn add_noise<R: RngCore>(&mut self, sigma: f64, rng: &mut R) {
        if sigma == 0.0 {
            return;
        }
        for s in &mut self.samples {
            *s += sigma * standard_normal(rng);
        }
    }
}

/// One standard-normal draw via the Box-Muller transform.
fn standard_normal<R: RngCore>(rng: &mut R) -> f64 {
    // Map u64 draws to (0, 1]: the +1 keeps the logarithm finite.
    let u1 = ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
    let u2 = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * core::f64::consts::PI * u2)
}

// --- shape uniformity ---------------------------------------------------------

/// Result of comparing the ladder-phase shapes of a set of traces.
#[derive(Clone, Debug)]
pub struct UniformityReport {
    pub traces: usize,
    /// All ladder phases present the identical observable schedule.
    pub uniform: bool,
    /// Shape digest of the first trace (the common digest when uniform).
    pub digest: [u8; 32],
    /// First disagreeing trace and the event index where it diverges.
    pub first_mismatch: Option<(usize, usize)>,
}

/// Checks that every trace's ladder phase has the same shape. Traces of
/// different scalar bit lengths are not comparable and are rejected.
pub fn check_shape_uniformity(traces: &[OperationTrace]) -> Result<UniformityReport> {
    let first = traces
        .first()
        .ok_or(Error::InvalidInput("need at least one trace"))?;
    if traces.iter().any(|t| t.bit_length() != first.bit_length()) {
        return Err(Error::IncomparableTraces(
            "traces have different scalar bit lengths",
        ));
    }
    let reference = trace_shape(first.ladder_events());
    let mut first_mismatch = None;
    for (i, trace) in traces.iter().enumerate().skip(1) {
        let shape = trace_shape(trace.ladder_events());
        if let Some(event) = reference.first_divergence(&shape) {
            first_mismatch = Some((i, event));
            break;
        }
    }
    Ok(UniformityReport {
        traces: traces.len(),
        uniform: first_mismatch.is_none(),
        digest: reference.digest(),
        first_mismatch,
    })
}

// --- baseline contrast ---------------------------------------------------------

/// Per-iteration shape comparison of two traces.
#[derive(Clone, Debug)]
pub struct ContrastReport {
    pub iterations: usize,
    /// Scalar bit indices whose iterations have differing shapes, highest
    /// first (iteration `j` of a `t`-bit ladder processes bit `t - 2 - j`).
    pub divergent_bits: Vec<usize>,
}

impl ContrastReport {
    pub fn is_uniform(&self) -> bool {
        self.divergent_bits.is_empty()
    }
}

/// Compares two traces iteration by iteration and reports which scalar bit
/// positions produced observably different schedules.
pub fn contrast_iteration_shapes(
    a: &OperationTrace,
    b: &OperationTrace,
) -> Result<ContrastReport> {
    if a.bit_length() != b.bit_length() {
        return Err(Error::IncomparableTraces(
            "traces have different scalar bit lengths",
        ));
    }
    debug_assert_eq!(a.iterations(), b.iterations());
    let t = a.bit_length();
    let mut divergent_bits = Vec::new();
    for (j, (&(sa, ea), &(sb, eb))) in
        a.iteration_spans().iter().zip(b.iteration_spans()).enumerate()
    {
        let shape_a = trace_shape(&a.events()[sa..ea]);
        let shape_b = trace_shape(&b.events()[sb..eb]);
        if shape_a != shape_b {
            divergent_bits.push(t - 2 - j);
        }
    }
    Ok(ContrastReport { iterations: a.iterations(), divergent_bits })
}

// --- Welch t-test ----------------------------------------------------------------

/// Per-sample Welch t-statistics between two groups of aligned traces.
///
/// A sample point where both groups have zero variance contributes `t = 0`:
/// with equal constant values there is no evidence either way, and the
/// statistic is defined to reflect that rather than divide by zero.
pub fn welch_t_statistics(group_a: &[PowerTrace], group_b: &[PowerTrace]) -> Result<Vec<f64>> {
    if group_a.len() < 2 || group_b.len() < 2 {
        return Err(Error::InvalidInput("each group needs at least two traces"));
    }
    let samples = group_a[0].len();
    if group_a
        .iter()
        .chain(group_b)
        .any(|trace| trace.len() != samples)
    {
        return Err(Error::IncomparableTraces(
            "traces have different sample counts",
        ));
    }

    let stats = |group: &[PowerTrace], i: usize| -> (f64, f64) {
        let n = group.len() as f64;
        let mean = group.iter().map(|t| t.samples[i]).sum::<f64>() / n;
        let var = group
            .iter()
            .map(|t| {
                let d = t.samples[i] - mean;
                d * d
            })
            .sum::<f64>()
            / (n - 1.0);
        (mean, var / n)
    };

    Ok((0..samples)
        .map(|i| {
            let (mean_a, sem2_a) = stats(group_a, i);
            let (mean_b, sem2_b) = stats(group_b, i);
            let denom = libm::sqrt(sem2_a + sem2_b);
            if denom == 0.0 {
                0.0
            } else {
                (mean_a - mean_b) / denom
            }
        })
        .collect())
}

/// Parameters of a fixed-vs-random t-test campaign.
#[derive(Clone, Copy, Debug)]
pub struct TTestConfig {
    /// Traces per group (fixed and random), at least 2.
    pub trials: usize,
    /// Standard deviation of the added Gaussian measurement noise.
    pub noise_sigma: f64,
    /// Seed of the campaign; a campaign is fully determined by its seed.
    pub seed: u64,
}

impl TTestConfig {
    fn validate(&self) -> Result<()> {
        if self.trials < 2 {
            return Err(Error::InvalidConfig("need at least two trials per group"));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::InvalidConfig("noise sigma must be non-negative"));
        }
        Ok(())
    }
}

/// Outcome of one t-test campaign on one leakage channel.
#[derive(Clone, Copy, Debug)]
pub struct TTestOutcome {
    pub model: LeakageModel,
    pub trials: usize,
    pub samples: usize,
    pub max_abs_t: f64,
    /// Sample points with `|t|` above [`T_TEST_THRESHOLD`].
    pub exceeding: usize,
    /// No sample point crossed the threshold.
    pub pass: bool,
}

/// Runs a fixed-vs-random Welch t-test campaign against the generator.
///
/// The campaign draws one fixed full-width scalar and `trials` random
/// full-width scalars from a ChaCha stream seeded by `config.seed`,
/// simulates each on the selected datapath, extracts power samples under
/// `model`, adds Gaussian noise, and evaluates the per-sample t-statistics.
/// Full-width scalars keep every trace the same length, so no realignment
/// is needed. The fixed-group simulation is performed once and re-noised
/// per trial (the datapath is deterministic, so repeated simulation would
/// produce the identical raw trace).
pub fn welch_ttest(
    kind: DatapathKind,
    model: LeakageModel,
    cycle_config: &CycleConfig,
    config: &TTestConfig,
) -> Result<TTestOutcome> {
    config.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let base = ProjectivePoint::generator();
    // Frequency only scales the report, not the trace; any valid value do.
    let frequency_hz = 250.0e6;

    let simulate_scalar = |k: &Scalar256| -> Result<SimulationOutput> {
        simulate(k, &base, cycle_config, frequency_hz, kind)
    };

    let fixed_scalar = Scalar256::random_full_width(&mut rng);
    let fixed_raw = extract_power(&simulate_scalar(&fixed_scalar)?.trace, model);

    let mut fixed_group = Vec::with_capacity(config.trials);
    let mut random_group = Vec::with_capacity(config.trials);
    for _ in 0..config.trials {
        let mut fixed = fixed_raw.clone();
        fixed.add_noise(config.noise_sigma, &mut rng);
        fixed_group.push(fixed);

        let scalar = Scalar256::random_full_width(&mut rng);
        let mut random = extract_power(&simulate_scalar(&scalar)?.trace, model);
        random.add_noise(config.noise_sigma, &mut rng);
        random_group.push(random);
    }

    let t_statistics = welch_t_statistics(&fixed_group, &random_group)?;
    let max_abs_t = t_statistics.iter().fold(0.0f64, |m, t| m.max(libm::fabs(*t)));
    let exceeding = t_statistics
        .iter()
        .filter(|t| libm::fabs(**t) > T_TEST_THRESHOLD)
        .count();
    Ok(TTestOutcome {
        model,
        trials: config.trials,
        samples: t_statistics.len(),
        max_abs_t,
        exceeding,
        pass: exceeding == 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datapath::{
        simulate_scalar_mul, simulate_scalar_mul_baseline, DEFAULT_CYCLE_CONFIG,
    };
    use alloc::vec;

    const F250: f64 = 250.0e6;

    fn g() -> ProjectivePoint {
        ProjectivePoint::generator()
    }

    fn hardened_trace(k: &Scalar256) -> OperationTrace {
        simulate_scalar_mul(k, &g(), &DEFAULT_CYCLE_CONFIG, F250)
            .unwrap()
            .trace
    }

    fn baseline_trace(k: &Scalar256) -> OperationTrace {
        simulate_scalar_mul_baseline(k, &g(), &DEFAULT_CYCLE_CONFIG, F250)
            .unwrap()
            .trace
    }

    fn scalar(v: u64) -> Scalar256 {
        Scalar256::from_u64(v).unwrap()
    }

    #[test]
    fn hardened_shapes_are_uniform() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let traces: Vec<_> = (0..5)
            .map(|_| hardened_trace(&Scalar256::random_full_width(&mut rng)))
            .collect();
        let report = check_shape_uniformity(&traces).unwrap();
        assert!(report.uniform);
        assert!(report.first_mismatch.is_none());
        assert_eq!(report.traces, 5);
    }

    #[test]
    fn baseline_shapes_are_not_uniform() {
        let traces = vec![baseline_trace(&scalar(0b1010)), baseline_trace(&scalar(0b1100))];
        let report = check_shape_uniformity(&traces).unwrap();
        assert!(!report.uniform);
        let (trace_index, _) = report.first_mismatch.unwrap();
        assert_eq!(trace_index, 1);
    }

    #[test]
    fn uniformity_rejects_unusable_inputs() {
        assert!(matches!(
            check_shape_uniformity(&[]),
            Err(Error::InvalidInput(_))
        ));
        let traces = vec![hardened_trace(&scalar(0b111)), hardened_trace(&scalar(0b11))];
        assert!(matches!(
            check_shape_uniformity(&traces),
            Err(Error::IncomparableTraces(_))
        ));
    }

    #[test]
    fn contrast_localises_differing_bits() {
        // 0b11010 and 0b10011 agree at bit 4 (the implicit top), differ at
        // bits 3, 0, and agree at 2, 1. Iterations cover bits 3..=0.
        let ka = scalar(0b11010);
        let kb = scalar(0b10011);
        let report =
            contrast_iteration_shapes(&baseline_trace(&ka), &baseline_trace(&kb)).unwrap();
        assert_eq!(report.iterations, 4);
        assert_eq!(report.divergent_bits, vec![3, 0]);
        assert!(!report.is_uniform());
    }

    #[test]
    fn contrast_is_silent_on_hardened_traces() {
        let report = contrast_iteration_shapes(
            &hardened_trace(&scalar(0b11010)),
            &hardened_trace(&scalar(0b10011)),
        )
        .unwrap();
        assert!(report.is_uniform());
        assert_eq!(report.iterations, 4);
    }

    #[test]
    fn contrast_rejects_mixed_widths() {
        assert!(matches!(
            contrast_iteration_shapes(&baseline_trace(&scalar(0b10)), &baseline_trace(&scalar(0b100))),
            Err(Error::IncomparableTraces(_))
        ));
    }

    #[test]
    fn power_extraction_counts_write_events() {
        let k = scalar(0b1011);
        let trace = hardened_trace(&k);
        let power = extract_power(&trace, LeakageModel::OperationSlot);
        // Two setup loads plus one commit per iteration.
        assert_eq!(power.len(), 2 + trace.iterations());
        // The slot channel of a hardened trace is identical across scalars
        // of the same width.
        let other = extract_power(&hardened_trace(&scalar(0b1111)), LeakageModel::OperationSlot);
        assert_eq!(power.samples, other.samples);
    }

    #[test]
    fn standard_normal_moments() {
        let mut rng = ChaCha12Rng::seed_from_u64(99);
        let n = 20_000;
        let draws: Vec<f64> = (0..n).map(|_| standard_normal(&mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 0.05, "mean {mean}");
        assert!((var - 1.0).abs() < 0.05, "variance {var}");
    }

    #[test]
    fn t_statistics_on_handcrafted_groups() {
        let trace = |values: &[f64]| PowerTrace { samples: values.to_vec() };
        // Sample 0: clearly different means; sample 1: identical constants.
        let group_a = vec![
            trace(&[10.0, 5.0]),
            trace(&[10.2, 5.0]),
            trace(&[9.8, 5.0]),
            trace(&[10.0, 5.0]),
        ];
        let group_b = vec![
            trace(&[0.0, 5.0]),
            trace(&[0.2, 5.0]),
            trace(&[-0.2, 5.0]),
            trace(&[0.0, 5.0]),
        ];
        let t = welch_t_statistics(&group_a, &group_b).unwrap();
        assert!(t[0] > T_TEST_THRESHOLD, "t[0] = {}", t[0]);
        assert_eq!(t[1], 0.0, "equal constants carry no evidence");

        // Direction: swapping groups negates the statistic.
        let t_rev = welch_t_statistics(&group_b, &group_a).unwrap();
        assert_eq!(t[0], -t_rev[0]);
    }

    #[test]
    fn t_statistics_reject_bad_groups() {
        let trace = |values: &[f64]| PowerTrace { samples: values.to_vec() };
        let a = vec![trace(&[1.0]), trace(&[2.0])];
        assert!(matches!(
            welch_t_statistics(&a, &[trace(&[1.0])]),
            Err(Error::InvalidInput(_))
        ));
        let b = vec![trace(&[1.0, 2.0]), trace(&[2.0, 3.0])];
        assert!(matches!(
            welch_t_statistics(&a, &b),
            Err(Error::IncomparableTraces(_))
        ));
    }

    #[test]
    fn ttest_config_validation() {
        let bad_trials = TTestConfig { trials: 1, noise_sigma: 1.0, seed: 0 };
        assert!(welch_ttest(
            DatapathKind::Hardened,
            LeakageModel::OperationSlot,
            &DEFAULT_CYCLE_CONFIG,
            &bad_trials
        )
        .is_err());
        let bad_sigma = TTestConfig { trials: 10, noise_sigma: -1.0, seed: 0 };
        assert!(welch_ttest(
            DatapathKind::Hardened,
            LeakageModel::OperationSlot,
            &DEFAULT_CYCLE_CONFIG,
            &bad_sigma
        )
        .is_err());
    }

    #[test]
    fn ttest_separates_hardened_from_baseline() {
        let config = TTestConfig { trials: 40, noise_sigma: 1.0, seed: 7 };
        let hardened = welch_ttest(
            DatapathKind::Hardened,
            LeakageModel::OperationSlot,
            &DEFAULT_CYCLE_CONFIG,
            &config,
        )
        .unwrap();
        assert!(hardened.pass, "hardened max |t| = {}", hardened.max_abs_t);

        let baseline = welch_ttest(
            DatapathKind::Baseline,
            LeakageModel::OperationSlot,
            &DEFAULT_CYCLE_CONFIG,
            &config,
        )
        .unwrap();
        assert!(!baseline.pass, "baseline max |t| = {}", baseline.max_abs_t);
        // Every iteration's commit routing depends on its key bit, so the
        // threshold is crossed at hundreds of sample points, not one.
        assert!(baseline.exceeding > 100, "exceeding = {}", baseline.exceeding);
        assert_eq!(hardened.exceeding, 0);
    }

    #[test]
    fn ttest_is_deterministic() {
        let config = TTestConfig { trials: 20, noise_sigma: 1.0, seed: 42 };
        let a = welch_ttest(
            DatapathKind::Hardened,
            LeakageModel::DataValue,
            &DEFAULT_CYCLE_CONFIG,
            &config,
        )
        .unwrap();
        let b = welch_ttest(
            DatapathKind::Hardened,
            LeakageModel::DataValue,
            &DEFAULT_CYCLE_CONFIG,
            &config,
        )
        .unwrap();
        assert_eq!(a.max_abs_t.to_bits(), b.max_abs_t.to_bits());
        assert_eq!(a.exceeding, b.exceeding);
    }
}
