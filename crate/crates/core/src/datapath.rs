//! Cycle-level simulator of the scalar-multiplication datapath.
//!
//! The modeled architecture has a 3x3 register file (banks `R0`, `R1`, `Rt`
//! holding projective X/Y/Z coordinates), two point-addition units running
//! in parallel, a bit-serial inversion unit that reuses the register file,
//! and a controller that commits results.
//!
//! Per ladder iteration, unit `ECPA_A` computes `R0 + R1` while unit
//! `ECPA_B` computes `2*R0` followed by `2*R1` — always both, always in
//! that order. When both units are done, the controller commits all nine
//! coordinates in a single parallel register load; the key bit only selects
//! the *routing* of results into banks through write-back multiplexers,
//! which is invisible at the granularity of this trace. An iteration
//! therefore costs
//!
//! ```text
//! max(T_ECPA, 2 * T_ECPA) + overhead = 2 * T_ECPA + overhead
//! T_ECPA = 14 * cycles_mul + 14 * cycles_add + 5 * cycles_sub
//! ```
//!
//! After the ladder, the inversion unit turns `R0` affine: it loads
//! `R0.Z`, runs the binary extended gcd in registers borrowed from `R1`,
//! `Rt`, and a scratch slot, then two final multiplications place the
//! affine coordinates in `Rt`. Its step count depends on the value of `Z`,
//! so the inversion phase — unlike the ladder phase — has a data-dependent
//! duration; analyses that require alignment work on the ladder phase.
//!
//! Every simulation yields the numerical result, an [`OperationTrace`] of
//! timestamped events, and a [`CycleReport`] with latency and throughput at
//! a given clock frequency.

use alloc::vec::Vec;
use core::fmt;

use sha2::{Digest, Sha256};

use crate::curve::{AffinePoint, ProjectivePoint, ECPA_STEPS};
use crate::error::{Error, Result};
use crate::fp256::{self, BiaVar, FieldElement, MaluOpcode};
use crate::ladder::{hardened_commit, hardened_iteration_values, LadderState, Scalar256};

// --- register file addressing ---------------------------------------------

/// Register banks of the datapath.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Bank {
    R0,
    R1,
    Rt,
    /// Scratch slot used by the inversion unit for its selected output.
    BiaScratch,
}

impl Bank {
    pub const ALL: [Bank; 4] = [Bank::R0, Bank::R1, Bank::Rt, Bank::BiaScratch];

    pub fn name(self) -> &'static str {
        match self {
            Bank::R0 => "R0",
            Bank::R1 => "R1",
            Bank::Rt => "Rt",
            Bank::BiaScratch => "BIA_SCRATCH",
        }
    }

    fn index(self) -> u8 {
        match self {
            Bank::R0 => 0,
            Bank::R1 => 1,
            Bank::Rt => 2,
            Bank::BiaScratch => 3,
        }
    }
}

/// Coordinate lanes within a bank.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Lane {
    X,
    Y,
    Z,
}

impl Lane {
    pub const ALL: [Lane; 3] = [Lane::X, Lane::Y, Lane::Z];

    pub fn name(self) -> &'static str {
        match self {
            Lane::X => "X",
            Lane::Y => "Y",
            Lane::Z => "Z",
        }
    }

    fn index(self) -> u8 {
        match self {
            Lane::X => 0,
            Lane::Y => 1,
            Lane::Z => 2,
        }
    }
}

/// One addressable register: a bank/lane pair such as `R0.X`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RegisterSlot {
    pub bank: Bank,
    pub lane: Lane,
}

impl RegisterSlot {
    pub const fn new(bank: Bank, lane: Lane) -> Self {
        RegisterSlot { bank, lane }
    }

    fn bit(self) -> u16 {
        1 << (self.bank.index() * 3 + self.lane.index())
    }
}

impl fmt::Display for RegisterSlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.bank.name(), self.lane.name())
    }
}

/// A compact set of register slots (twelve possible slots, one bit each).
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct SlotSet(u16);

impl SlotSet {
    pub const EMPTY: SlotSet = SlotSet(0);

    pub fn insert(&mut self, slot: RegisterSlot) {
        self.0 |= slot.bit();
    }

    pub fn with(mut self, slot: RegisterSlot) -> Self {
        self.insert(slot);
        self
    }

    /// All three lanes of a bank.
    pub fn whole_bank(bank: Bank) -> Self {
        let mut set = SlotSet::EMPTY;
        for lane in Lane::ALL {
            set.insert(RegisterSlot::new(bank, lane));
        }
        set
    }

    /// The lanes of `bank` selected by a 3-bit mask (bit 0 = X, 1 = Y,
    /// 2 = Z).
    pub fn bank_lanes(bank: Bank, mask: u8) -> Self {
        let mut set = SlotSet::EMPTY;
        for lane in Lane::ALL {
            if mask & (1 << lane.index()) != 0 {
                set.insert(RegisterSlot::new(bank, lane));
            }
        }
        set
    }

    pub fn contains(&self, slot: RegisterSlot) -> bool {
        self.0 & slot.bit() != 0
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: SlotSet) -> SlotSet {
        SlotSet(self.0 | other.0)
    }

    pub fn intersects(&self, other: SlotSet) -> bool {
        self.0 & other.0 != 0
    }

    /// 4-bit mask of banks with at least one written lane, in `Bank::ALL`
    /// order.
    pub fn bank_mask(&self) -> u8 {
        let mut mask = 0u8;
        for bank in Bank::ALL {
            if self.0 & (0b111 << (bank.index() * 3)) != 0 {
                mask |= 1 << bank.index();
            }
        }
        mask
    }

    pub fn iter(&self) -> impl Iterator<Item = RegisterSlot> + '_ {
        let bits = self.0;
        (0u8..12).filter_map(move |i| {
            if bits & (1 << i) != 0 {
                Some(RegisterSlot::new(Bank::ALL[(i / 3) as usize], Lane::ALL[(i % 3) as usize]))
            } else {
                None
            }
        })
    }
}

impl fmt::Display for SlotSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("-");
        }
        let mut first = true;
        for slot in self.iter() {
            if !first {
                f.write_str(",")?;
            }
            write!(f, "{slot}")?;
            first = false;
        }
        Ok(())
    }
}

impl fmt::Debug for SlotSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SlotSet({self})")
    }
}

/// Execution units appearing in traces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Unit {
    EcpaA,
    EcpaB,
    Bia,
    Ctrl,
}

impl Unit {
    pub fn name(self) -> &'static str {
        match self {
            Unit::EcpaA => "ECPA_A",
            Unit::EcpaB => "ECPA_B",
            Unit::Bia => "BIA",
            Unit::Ctrl => "CTRL",
        }
    }

    fn index(self) -> u8 {
        match self {
            Unit::EcpaA => 0,
            Unit::EcpaB => 1,
            Unit::Bia => 2,
            Unit::Ctrl => 3,
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One architectural event: an operation completing on a unit at a cycle,
/// with the register slots it read and the slots it committed.
///
/// `data_hw` is the Hamming weight of the data written by the event (zero
/// when nothing is written); the power models in the analysis layer consume
/// it. Compute events inside the point-addition units keep intermediate
/// values in unit-internal pipeline registers, so only loads and commits
/// write architectural slots.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TraceEvent {
    pub cycle: u64,
    pub unit: Unit,
    pub opcode: MaluOpcode,
    pub reads: SlotSet,
    pub writes: SlotSet,
    pub data_hw: u32,
}

impl fmt::Display for TraceEvent {
    /// The line-oriented export format: `cycle unit opcode reads->writes`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} {}->{}",
            self.cycle, self.unit, self.opcode, self.reads, self.writes
        )
    }
}

// --- cycle configuration and report ----------------------------------------

/// Per-operation cycle costs of the modeled units.
///
/// The default configuration is calibrated so a full-width (256-bit) scalar
/// multiplication totals approximately 1,895,000 cycles: the multiplier
/// takes one cycle per shift-and-add iteration, additions, subtractions and
/// inverter steps are two-cycle (compute + latch), and the fitted
/// controller overhead absorbs commit, multiplexing, and FSM sequencing.
/// See [`fit_control_overhead`] for the fitting procedure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CycleConfig {
    pub cycles_add: u64,
    pub cycles_sub: u64,
    pub cycles_mul: u64,
    pub cycles_bia_step: u64,
    pub cycles_control_overhead_per_iteration: u64,
}

impl Default for CycleConfig {
    fn default() -> Self {
        DEFAULT_CYCLE_CONFIG
    }
}

/// The calibrated default (see [`CycleConfig`] docs).
pub const DEFAULT_CYCLE_CONFIG: CycleConfig = CycleConfig {
    cycles_add: 2,
    cycles_sub: 2,
    cycles_mul: 256,
    cycles_bia_step: 2,
    cycles_control_overhead_per_iteration: 166,
};

/// Expected inverter loop steps for a uniformly random field element
/// (empirical mean, used only for calibration).
pub const EXPECTED_BIA_STEPS: u64 = 538;

impl CycleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.cycles_add == 0
            || self.cycles_sub == 0
            || self.cycles_mul == 0
            || self.cycles_bia_step == 0
            || self.cycles_control_overhead_per_iteration == 0
        {
            return Err(Error::InvalidConfig("all cycle costs must be positive"));
        }
        if self.cycles_mul < 256 {
            return Err(Error::InvalidConfig(
                "cycles_mul must be at least 256 (one cycle per multiplier iteration)",
            ));
        }
        Ok(())
    }

    /// Cycles for one pass of the point-addition unit: the 33-operation
    /// complete adder.
    pub fn ecpa_cycles(&self) -> u64 {
        let (muls, adds, subs) = crate::curve::ecpa_op_counts();
        muls * self.cycles_mul + adds * self.cycles_add + subs * self.cycles_sub
    }

    /// Cycles for one hardened ladder iteration: unit B serialises its two
    /// doublings, so it dominates.
    pub fn hardened_iteration_cycles(&self) -> u64 {
        2 * self.ecpa_cycles() + self.cycles_control_overhead_per_iteration
    }

    /// Parses `key = value` lines (`#` comments and blank lines allowed);
    /// missing keys keep their default values, unknown or repeated keys are
    /// rejected.
    pub fn from_key_values(text: &str) -> Result<CycleConfig> {
        let mut cfg = DEFAULT_CYCLE_CONFIG;
        let mut seen = [false; 5];
        for raw_line in text.lines() {
            let line = match raw_line.split_once('#') {
                Some((before, _)) => before.trim(),
                None => raw_line.trim(),
            };
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or(Error::InvalidConfig("expected key = value"))?;
            let value: u64 = value
                .trim()
                .parse()
                .map_err(|_| Error::InvalidConfig("cycle costs must be unsigned integers"))?;
            let slot = match key.trim() {
                "cycles_add" => {
                    cfg.cycles_add = value;
                    0
                }
                "cycles_sub" => {
                    cfg.cycles_sub = value;
                    1
                }
                "cycles_mul" => {
                    cfg.cycles_mul = value;
                    2
                }
                "cycles_bia_step" => {
                    cfg.cycles_bia_step = value;
                    3
                }
                "cycles_control_overhead_per_iteration" => {
                    cfg.cycles_control_overhead_per_iteration = value;
                    4
                }
                _ => return Err(Error::InvalidConfig("unknown configuration key")),
            };
            if seen[slot] {
                return Err(Error::InvalidConfig("configuration key repeated"));
            }
            seen[slot] = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Latency and throughput of a run at a given clock frequency.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CycleReport {
    pub total_cycles: u64,
    pub frequency_hz: f64,
    pub latency_seconds: f64,
    pub throughput_bits_per_second: f64,
}

/// Derives latency and throughput: `latency = cycles / f` and
/// `throughput = (f / cycles) * 256` bits per second (one 256-bit scalar
/// multiplication per `cycles`).
pub fn report(total_cycles: u64, frequency_hz: f64) -> Result<CycleReport> {
    if total_cycles == 0 {
        return Err(Error::InvalidConfig("total cycle count must be positive"));
    }
    if !(frequency_hz.is_finite() && frequency_hz > 0.0) {
        return Err(Error::InvalidConfig("frequency must be positive"));
    }
    let cycles = total_cycles as f64;
    Ok(CycleReport {
        total_cycles,
        frequency_hz,
        latency_seconds: cycles / frequency_hz,
        throughput_bits_per_second: frequency_hz / cycles * 256.0,
    })
}

/// Fits the controller overhead for a target full-width total, given the
/// other costs: scans multiplier costs from the 256-cycle floor upwards,
/// solves the iteration equation for the overhead, and keeps the closest
/// fit. `expected_bia_steps` stands in for the data-dependent inversion
/// length ([`EXPECTED_BIA_STEPS`] for random scalars).
pub fn fit_control_overhead(
    target_total: u64,
    cycles_add: u64,
    cycles_sub: u64,
    cycles_bia_step: u64,
    expected_bia_steps: u64,
) -> CycleConfig {
    let mut best: Option<(u64, CycleConfig)> = None;
    for cycles_mul in 256..=320 {
        let cfg = CycleConfig {
            cycles_add,
            cycles_sub,
            cycles_mul,
            cycles_bia_step,
            cycles_control_overhead_per_iteration: 1,
        };
        let ecpa = cfg.ecpa_cycles();
        // total(c) = (c + ecpa) + 255 * (2*ecpa + c) + bia + 2*mul
        let fixed = ecpa + 510 * ecpa + (3 + expected_bia_steps) * cycles_bia_step + 2 * cycles_mul;
        if fixed >= target_total {
            continue;
        }
        let overhead = ((target_total - fixed) + 128) / 256; // round to nearest
        if overhead == 0 {
            continue;
        }
        let cfg = CycleConfig { cycles_control_overhead_per_iteration: overhead, ..cfg };
        let total = fixed + 256 * overhead;
        let delta = total.abs_diff(target_total);
        if best.map_or(true, |(best_delta, _)| delta < best_delta) {
            best = Some((delta, cfg));
        }
    }
    best.expect("target is reachable").1
}

// --- operation traces -------------------------------------------------------

/// The timestamped event stream of one simulated scalar multiplication,
/// partitioned into the ladder phase (setup plus iterations), the inversion
/// phase, and the affine conversion.
#[derive(Clone, Debug)]
pub struct OperationTrace {
    events: Vec<TraceEvent>,
    bit_length: usize,
    ladder_end: usize,
    inversion_end: usize,
    iteration_spans: Vec<(usize, usize)>,
    ladder_cycles: u64,
    inversion_cycles: u64,
    conversion_cycles: u64,
}

impl OperationTrace {
    pub fn events(&self) -> &[TraceEvent] {
        &self.events
    }

    /// Scalar bit length `t`; the ladder ran `t - 1` iterations.
    pub fn bit_length(&self) -> usize {
        self.bit_length
    }

    pub fn iterations(&self) -> usize {
        self.iteration_spans.len()
    }

    /// Event-index ranges `[start, end)` of each ladder iteration.
    pub fn iteration_spans(&self) -> &[(usize, usize)] {
        &self.iteration_spans
    }

    /// Setup and ladder iterations: the key-dependent-routing part whose
    /// observable schedule must not depend on the key.
    pub fn ladder_events(&self) -> &[TraceEvent] {
        &self.events[..self.ladder_end]
    }

    pub fn inversion_events(&self) -> &[TraceEvent] {
        &self.events[self.ladder_end..self.inversion_end]
    }

    pub fn conversion_events(&self) -> &[TraceEvent] {
        &self.events[self.inversion_end..]
    }

    pub fn ladder_cycles(&self) -> u64 {
        self.ladder_cycles
    }

    /// Data-dependent by design: the inverter's step count varies with the
    /// value being inverted.
    pub fn inversion_cycles(&self) -> u64 {
        self.inversion_cycles
    }

    pub fn conversion_cycles(&self) -> u64 {
        self.conversion_cycles
    }

    pub fn total_cycles(&self) -> u64 {
        self.ladder_cycles + self.inversion_cycles + self.conversion_cycles
    }
}

/// The observable shape of a trace: for every event, its unit, opcode, and
/// the write-enable pattern over the ladder banks `{R0, R1, Rt}` — no
/// cycles, no data, no mux routing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceShape {
    atoms: Vec<(Unit, MaluOpcode, u8)>,
}

impl TraceShape {
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Index of the first event where the shapes differ (or the length of
    /// the shorter shape when one is a prefix of the other).
    pub fn first_divergence(&self, other: &TraceShape) -> Option<usize> {
        if self == other {
            return None;
        }
        let common = self.atoms.len().min(other.atoms.len());
        for i in 0..common {
            if self.atoms[i] != other.atoms[i] {
                return Some(i);
            }
        }
        Some(common)
    }

    /// A compact 32-byte digest for shape comparison and export.
    pub fn digest(&self) -> [u8; 32] {
        let mut hasher = Sha256::new();
        for (unit, opcode, banks) in &self.atoms {
            hasher.update([unit.index(), opcode_index(*opcode), *banks]);
        }
        hasher.finalize().into()
    }
}

fn opcode_index(op: MaluOpcode) -> u8 {
    match op {
        MaluOpcode::Add => 0,
        MaluOpcode::Sub => 1,
        MaluOpcode::Mul => 2,
        MaluOpcode::Inv => 3,
        MaluOpcode::Shift => 4,
        MaluOpcode::Load => 5,
    }
}

/// Projects a sequence of events onto its shape. The empty trace yields the
/// empty shape (whose digest is the hash of zero atoms).
pub fn trace_shape(events: &[TraceEvent]) -> TraceShape {
    TraceShape {
        atoms: events
            .iter()
            .map(|e| (e.unit, e.opcode, e.writes.bank_mask() & 0b111))
            .collect(),
    }
}

// --- the simulator -----------------------------------------------------------

/// Which ladder algorithm a simulation models.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DatapathKind {
    /// Three banks, both doublings every iteration, single parallel commit.
    Hardened,
    /// Two banks, one key-selected doubling, per-result commits.
    Baseline,
}

/// Everything a simulation produces.
#[derive(Clone, Debug)]
pub struct SimulationOutput {
    pub result: AffinePoint,
    pub trace: OperationTrace,
    pub report: CycleReport,
}

/// Simulates `k * P` on the hardened datapath, producing the affine result,
/// the operation trace, and the cycle report at `frequency_hz`.
pub fn simulate_scalar_mul(
    k: &Scalar256,
    p: &ProjectivePoint,
    config: &CycleConfig,
    frequency_hz: f64,
) -> Result<SimulationOutput> {
    simulate(k, p, config, frequency_hz, DatapathKind::Hardened)
}

/// Simulates `k * P` on the baseline two-register datapath (for contrast
/// experiments).
pub fn simulate_scalar_mul_baseline(
    k: &Scalar256,
    p: &ProjectivePoint,
    config: &CycleConfig,
    frequency_hz: f64,
) -> Result<SimulationOutput> {
    simulate(k, p, config, frequency_hz, DatapathKind::Baseline)
}

/// Simulates on either datapath.
pub fn simulate(
    k: &Scalar256,
    p: &ProjectivePoint,
    config: &CycleConfig,
    frequency_hz: f64,
    kind: DatapathKind,
) -> Result<SimulationOutput> {
    config.validate()?;
    if !p.is_on_curve() {
        return Err(Error::InvalidInput("base point is not on the curve"));
    }
    if p.is_identity() {
        return Err(Error::InvalidInput("base point must not be the identity"));
    }

    let mut sim = Simulator::new(config, kind);
    let result_point = sim.run_ladder(k, p);
    let ladder_end = sim.events.len();
    let ladder_cycles = sim.clock;

    let result = sim.run_inversion_and_conversion(&result_point, ladder_end);
    let report = report(sim.clock, frequency_hz)?;

    Ok(SimulationOutput {
        result,
        trace: OperationTrace {
            events: sim.events,
            bit_length: k.bit_len(),
            ladder_end,
            inversion_end: sim.inversion_end,
            iteration_spans: sim.iteration_spans,
            ladder_cycles,
            inversion_cycles: sim.inversion_cycles,
            conversion_cycles: sim.clock - ladder_cycles - sim.inversion_cycles,
        },
        report,
    })
}

fn point_weight(p: &ProjectivePoint) -> u32 {
    p.x.hamming_weight() + p.y.hamming_weight() + p.z.hamming_weight()
}

/// Event stream under construction, plus phase bookkeeping.
struct Simulator<'c> {
    cfg: &'c CycleConfig,
    kind: DatapathKind,
    events: Vec<TraceEvent>,
    clock: u64,
    iteration_spans: Vec<(usize, usize)>,
    inversion_end: usize,
    inversion_cycles: u64,
    /// Per-iteration compute events with cycle offsets, prebuilt once.
    hardened_template: Vec<TraceEvent>,
    baseline_templates: [Vec<TraceEvent>; 2],
}

impl<'c> Simulator<'c> {
    fn new(cfg: &'c CycleConfig, kind: DatapathKind) -> Self {
        let (hardened_template, baseline_templates) = match kind {
            DatapathKind::Hardened => (build_hardened_template(cfg), [Vec::new(), Vec::new()]),
            DatapathKind::Baseline => (
                Vec::new(),
                [build_baseline_template(cfg, false), build_baseline_template(cfg, true)],
            ),
        };
        Simulator {
            cfg,
            kind,
            events: Vec::new(),
            clock: 0,
            iteration_spans: Vec::new(),
            inversion_end: 0,
            inversion_cycles: 0,
            hardened_template,
            baseline_templates,
        }
    }

    fn push(&mut self, event: TraceEvent) {
        debug_assert!(self.events.last().map_or(true, |prev| prev.cycle <= event.cycle));
        self.events.push(event);
    }

    /// Setup plus all ladder iterations; returns the projective result.
    fn run_ladder(&mut self, k: &Scalar256, p: &ProjectivePoint) -> ProjectivePoint {
        let cfg = self.cfg;
        let overhead = cfg.cycles_control_overhead_per_iteration;
        let ecpa = cfg.ecpa_cycles();

        // Setup: load P into R0, double it on unit B, commit 2P into R1.
        self.clock += overhead;
        self.push(TraceEvent {
            cycle: self.clock,
            unit: Unit::Ctrl,
            opcode: MaluOpcode::Load,
            reads: SlotSet::EMPTY,
            writes: SlotSet::whole_bank(Bank::R0),
            data_hw: point_weight(p),
        });
        let mut state = LadderState::init(p);
        self.emit_ecpa_pass(Unit::EcpaB, Bank::R0, Bank::R0, self.clock);
        self.clock += ecpa;
        self.push(TraceEvent {
            cycle: self.clock,
            unit: Unit::Ctrl,
            opcode: MaluOpcode::Load,
            reads: SlotSet::EMPTY,
            writes: SlotSet::whole_bank(Bank::R1),
            data_hw: point_weight(&state.r1),
        });

        let t = k.bit_len();
        for i in (0..t - 1).rev() {
            let start_index = self.events.len();
            let bit = k.bit(i);
            match self.kind {
                DatapathKind::Hardened => self.hardened_iteration(&mut state, bit),
                DatapathKind::Baseline => self.baseline_iteration(&mut state, bit),
            }
            self.iteration_spans.push((start_index, self.events.len()));
        }

        match self.kind {
            DatapathKind::Hardened => state.r0,
            // The baseline keeps its accumulator in R0 as well.
            DatapathKind::Baseline => state.r0,
        }
    }

    fn hardened_iteration(&mut self, state: &mut LadderState, bit: bool) {
        let start = self.clock;
        for ev in &self.hardened_template {
            self.events.push(TraceEvent { cycle: start + ev.cycle, ..*ev });
        }
        let values = hardened_iteration_values(state);
        hardened_commit(state, bit, values);
        self.clock = start + 2 * self.cfg.ecpa_cycles() + self.cfg.cycles_control_overhead_per_iteration;
        self.push(TraceEvent {
            cycle: self.clock,
            unit: Unit::Ctrl,
            opcode: MaluOpcode::Load,
            reads: SlotSet::EMPTY,
            writes: SlotSet::whole_bank(Bank::R0)
                .union(SlotSet::whole_bank(Bank::R1))
                .union(SlotSet::whole_bank(Bank::Rt)),
            data_hw: point_weight(&state.r0) + point_weight(&state.r1) + point_weight(&state.rt),
        });
    }

    fn baseline_iteration(&mut self, state: &mut LadderState, bit: bool) {
        let start = self.clock;
        for ev in &self.baseline_templates[bit as usize] {
            self.events.push(TraceEvent { cycle: start + ev.cycle, ..*ev });
        }
        // Classic ladder semantics on (Q0, Q1) = (R0, R1).
        let sum = crate::curve::point_add_complete(&state.r0, &state.r1);
        self.clock = start + self.cfg.ecpa_cycles() + self.cfg.cycles_control_overhead_per_iteration;
        let (sum_bank, dbl_bank, dbl_value) = if bit {
            let d = crate::curve::point_double(&state.r1);
            state.r0 = sum;
            state.r1 = d;
            (Bank::R0, Bank::R1, d)
        } else {
            let d = crate::curve::point_double(&state.r0);
            state.r1 = sum;
            state.r0 = d;
            (Bank::R1, Bank::R0, d)
        };
        self.push(TraceEvent {
            cycle: self.clock,
            unit: Unit::Ctrl,
            opcode: MaluOpcode::Load,
            reads: SlotSet::EMPTY,
            writes: SlotSet::whole_bank(sum_bank),
            data_hw: point_weight(&sum),
        });
        self.push(TraceEvent {
            cycle: self.clock,
            unit: Unit::Ctrl,
            opcode: MaluOpcode::Load,
            reads: SlotSet::EMPTY,
            writes: SlotSet::whole_bank(dbl_bank),
            data_hw: point_weight(&dbl_value),
        });
    }

    /// One full pass of a point-addition unit reading operands from
    /// `bank_p` and `bank_q`, emitted as completion-timestamped events.
    fn emit_ecpa_pass(&mut self, unit: Unit, bank_p: Bank, bank_q: Bank, start: u64) {
        let mut cycle = start;
        for step in ECPA_STEPS {
            cycle += self.op_cost(step.op);
            self.push(TraceEvent {
                cycle,
                unit,
                opcode: step.op,
                reads: SlotSet::bank_lanes(bank_p, step.reads_p)
                    .union(SlotSet::bank_lanes(bank_q, step.reads_q)),
                writes: SlotSet::EMPTY,
                data_hw: 0,
            });
        }
    }

    fn op_cost(&self, op: MaluOpcode) -> u64 {
        match op {
            MaluOpcode::Add => self.cfg.cycles_add,
            MaluOpcode::Sub => self.cfg.cycles_sub,
            MaluOpcode::Mul => self.cfg.cycles_mul,
            MaluOpcode::Inv | MaluOpcode::Shift | MaluOpcode::Load => self.cfg.cycles_bia_step,
        }
    }

    /// Inversion of `R0.Z` on the BIA unit, then the two conversion
    /// multiplications into `Rt`; returns the affine result.
    fn run_inversion_and_conversion(
        &mut self,
        point: &ProjectivePoint,
        ladder_end: usize,
    ) -> AffinePoint {
        let cfg = self.cfg;
        let inversion_start = self.clock;

        if point.is_identity() {
            // Nothing to invert: the result is the point at infinity and the
            // inversion and conversion phases are empty.
            self.inversion_end = ladder_end;
            self.inversion_cycles = 0;
            return AffinePoint::IDENTITY;
        }

        // u <- Z (from the ladder result bank).
        self.clock += cfg.cycles_bia_step;
        self.push(TraceEvent {
            cycle: self.clock,
            unit: Unit::Bia,
            opcode: MaluOpcode::Load,
            reads: SlotSet::EMPTY.with(RegisterSlot::new(Bank::R0, Lane::Z)),
            writes: SlotSet::EMPTY.with(RegisterSlot::new(Bank::R1, Lane::Z)),
            data_hw: point.z.hamming_weight(),
        });
        // x1 <- 1, x2 <- 0, v <- p.
        self.clock += cfg.cycles_bia_step;
        self.push(TraceEvent {
            cycle: self.clock,
            unit: Unit::Bia,
            opcode: MaluOpcode::Load,
            reads: SlotSet::EMPTY,
            writes: SlotSet::EMPTY
                .with(RegisterSlot::new(Bank::R1, Lane::X))
                .with(RegisterSlot::new(Bank::R1, Lane::Y))
                .with(RegisterSlot::new(Bank::Rt, Lane::Z)),
            data_hw: 1 + FieldElement::ZERO.sub(&FieldElement::ONE).hamming_weight() + 1,
        });

        let mut clock = self.clock;
        let step_cost = cfg.cycles_bia_step;
        let events = &mut self.events;
        let zinv = fp256::inv_mod_steps(&point.z, |step| {
            clock += step_cost;
            let (main, aux) = match step.target {
                BiaVar::U | BiaVar::X1 => (
                    RegisterSlot::new(Bank::R1, Lane::Z),
                    RegisterSlot::new(Bank::R1, Lane::X),
                ),
                BiaVar::V | BiaVar::X2 => (
                    RegisterSlot::new(Bank::Rt, Lane::Z),
                    RegisterSlot::new(Bank::R1, Lane::Y),
                ),
            };
            let reads = match step.op {
                // A subtraction reads all four working registers.
                MaluOpcode::Sub => SlotSet::EMPTY
                    .with(RegisterSlot::new(Bank::R1, Lane::Z))
                    .with(RegisterSlot::new(Bank::Rt, Lane::Z))
                    .with(RegisterSlot::new(Bank::R1, Lane::X))
                    .with(RegisterSlot::new(Bank::R1, Lane::Y)),
                // A halving reads and rewrites its own pair.
                _ => SlotSet::EMPTY.with(main).with(aux),
            };
            events.push(TraceEvent {
                cycle: clock,
                unit: Unit::Bia,
                opcode: step.op,
                reads,
                writes: SlotSet::EMPTY.with(main).with(aux),
                data_hw: step.hamming_weight,
            });
        })
        .expect("z != 0");
        self.clock = clock;

        // Select the Bezout accumulator holding the inverse into the scratch
        // output register (the selector muxes both accumulators).
        self.clock += cfg.cycles_bia_step;
        self.push(TraceEvent {
            cycle: self.clock,
            unit: Unit::Bia,
            opcode: MaluOpcode::Load,
            reads: SlotSet::EMPTY
                .with(RegisterSlot::new(Bank::R1, Lane::X))
                .with(RegisterSlot::new(Bank::R1, Lane::Y)),
            writes: SlotSet::EMPTY.with(RegisterSlot::new(Bank::BiaScratch, Lane::X)),
            data_hw: zinv.hamming_weight(),
        });
        self.inversion_end = self.events.len();
        self.inversion_cycles = self.clock - inversion_start;

        // Affine conversion: x = X * z^-1 and y = Y * z^-1, stored in Rt.
        let x = point.x.mul(&zinv);
        let y = point.y.mul(&zinv);
        for (source_lane, dest_lane, value) in [(Lane::X, Lane::X, x), (Lane::Y, Lane::Y, y)] {
            self.clock += cfg.cycles_mul;
            self.push(TraceEvent {
                cycle: self.clock,
                unit: Unit::Bia,
                opcode: MaluOpcode::Mul,
                reads: SlotSet::EMPTY
                    .with(RegisterSlot::new(Bank::BiaScratch, Lane::X))
                    .with(RegisterSlot::new(Bank::R0, source_lane)),
                writes: SlotSet::EMPTY.with(RegisterSlot::new(Bank::Rt, dest_lane)),
                data_hw: value.hamming_weight(),
            });
        }

        AffinePoint::new(x, y)
    }
}

/// Compute events of one hardened iteration (cycle field = offset from the
/// iteration start): unit A adds `R0 + R1` while unit B doubles `R0` then
/// `R1`; the two streams are merged by completion time. The commit event is
/// appended at simulation time because it carries data.
fn build_hardened_template(cfg: &CycleConfig) -> Vec<TraceEvent> {
    let mut a = Vec::with_capacity(33);
    let mut b = Vec::with_capacity(66);
    emit_template_pass(cfg, &mut a, Unit::EcpaA, Bank::R0, Bank::R1, 0);
    emit_template_pass(cfg, &mut b, Unit::EcpaB, Bank::R0, Bank::R0, 0);
    let offset = cfg.ecpa_cycles();
    emit_template_pass(cfg, &mut b, Unit::EcpaB, Bank::R1, Bank::R1, offset);
    merge_by_cycle(a, b)
}

/// Compute events of one baseline iteration: unit A adds, unit B doubles
/// only the bank selected by the key bit.
fn build_baseline_template(cfg: &CycleConfig, bit: bool) -> Vec<TraceEvent> {
    let mut a = Vec::with_capacity(33);
    let mut b = Vec::with_capacity(33);
    emit_template_pass(cfg, &mut a, Unit::EcpaA, Bank::R0, Bank::R1, 0);
    let dbl_bank = if bit { Bank::R1 } else { Bank::R0 };
    emit_template_pass(cfg, &mut b, Unit::EcpaB, dbl_bank, dbl_bank, 0);
    merge_by_cycle(a, b)
}

fn emit_template_pass(
    cfg: &CycleConfig,
    out: &mut Vec<TraceEvent>,
    unit: Unit,
    bank_p: Bank,
    bank_q: Bank,
    start: u64,
) {
    let mut cycle = start;
    for step in ECPA_STEPS {
        cycle += match step.op {
            MaluOpcode::Add => cfg.cycles_add,
            MaluOpcode::Sub => cfg.cycles_sub,
            MaluOpcode::Mul => cfg.cycles_mul,
            _ => unreachable!("the adder uses only ADD/SUB/MUL"),
        };
        out.push(TraceEvent {
            cycle,
            unit,
            opcode: step.op,
            reads: SlotSet::bank_lanes(bank_p, step.reads_p)
                .union(SlotSet::bank_lanes(bank_q, step.reads_q)),
            writes: SlotSet::EMPTY,
            data_hw: 0,
        });
    }
}

/// Stable two-stream merge by cycle (ties keep unit A first).
fn merge_by_cycle(a: Vec<TraceEvent>, b: Vec<TraceEvent>) -> Vec<TraceEvent> {
    let mut merged = Vec::with_capacity(a.len() + b.len());
    let (mut ia, mut ib) = (0, 0);
    while ia < a.len() && ib < b.len() {
        if a[ia].cycle <= b[ib].cycle {
            merged.push(a[ia]);
            ia += 1;
        } else {
            merged.push(b[ib]);
            ib += 1;
        }
    }
    merged.extend_from_slice(&a[ia..]);
    merged.extend_from_slice(&b[ib..]);
    merged
}
