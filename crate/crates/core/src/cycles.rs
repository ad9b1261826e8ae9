//! Drive cycles: 1 Hz velocity traces and the randomized four-phase
//! learning cycle.
//!
//! Trace file format: one velocity per line, `#` comments, optional
//! `# units: kmh|mps` header (km/h inputs are converted on load).
//!
//! The learning cycle concatenates four phase segments — drawn from the
//! low-speed, maximum-acceleration, medium-speed, and high-speed regions of
//! four standard cycles — in a seed-determined random order, bridging the
//! junctions with short linear velocity ramps.

use crate::rng;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;

pub const DEFAULT_ACCEL_LIMIT_MPS2: f64 = 5.0;
pub const DEFAULT_BRIDGE_S: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleSource {
    ArtemisRural,
    Rts95,
    Udds,
    Wltp,
    Composite,
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriveCycle {
    pub name: String,
    /// Velocity in m/s at 1 s spacing.
    pub samples_mps: Vec<f64>,
    pub source: CycleSource,
}

#[derive(Debug)]
pub enum CycleError {
    Parse { line: usize, message: String },
    NonPositiveDuration,
    VelocityOutOfRange { index: usize, value: f64 },
    ExcessiveAcceleration { index: usize, accel: f64, limit: f64 },
    BadPhase { reason: String },
    Io(std::io::Error),
}

impl fmt::Display for CycleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CycleError::Parse { line, message } => write!(f, "trace line {line}: {message}"),
            CycleError::NonPositiveDuration => write!(f, "trace needs at least two samples"),
            CycleError::VelocityOutOfRange { index, value } => {
                write!(f, "negative velocity {value} at sample {index}")
            }
            CycleError::ExcessiveAcceleration { index, accel, limit } => {
                write!(f, "|acceleration| {accel} at sample {index} exceeds sanity limit {limit}")
            }
            CycleError::BadPhase { reason } => write!(f, "bad phase window: {reason}"),
            CycleError::Io(e) => write!(f, "trace file: {e}"),
        }
    }
}

impl std::error::Error for CycleError {}

impl DriveCycle {
    /// Validates and wraps a velocity series. `accel_limit` of `None` skips
    /// the acceleration sanity check (used for composites whose segments were
    /// already validated).
    pub fn new(
        name: impl Into<String>,
        samples_mps: Vec<f64>,
        source: CycleSource,
        accel_limit: Option<f64>,
    ) -> Result<Self, CycleError> {
        if samples_mps.len() < 2 {
            return Err(CycleError::NonPositiveDuration);
        }
        for (i, &v) in samples_mps.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(CycleError::VelocityOutOfRange { index: i, value: v });
            }
        }
        if let Some(limit) = accel_limit {
            for i in 0..samples_mps.len() - 1 {
                let a = samples_mps[i + 1] - samples_mps[i];
                if a.abs() > limit {
                    return Err(CycleError::ExcessiveAcceleration { index: i, accel: a, limit });
                }
            }
        }
        Ok(Self { name: name.into(), samples_mps, source })
    }

    pub fn len(&self) -> usize {
        self.samples_mps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples_mps.is_empty()
    }

    /// Duration in seconds at 1 Hz sampling.
    pub fn duration_s(&self) -> usize {
        self.samples_mps.len()
    }

    pub fn velocity(&self, i: usize) -> f64 {
        self.samples_mps[i]
    }

    /// Forward-difference acceleration; zero at the final sample.
    pub fn accel(&self, i: usize) -> f64 {
        if i + 1 < self.samples_mps.len() {
            self.samples_mps[i + 1] - self.samples_mps[i]
        } else {
            0.0
        }
    }

    pub fn max_velocity(&self) -> f64 {
        self.samples_mps.iter().cloned().fold(0.0, f64::max)
    }

    /// Distance covered by forward-Euler integration over the steps.
    pub fn distance_m(&self) -> f64 {
        self.samples_mps[..self.samples_mps.len() - 1].iter().sum()
    }

    pub fn parse(text: &str, name: impl Into<String>) -> Result<Self, CycleError> {
        let mut kmh = false;
        let mut samples = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let trimmed = raw.trim();
            if let Some(comment) = trimmed.strip_prefix('#') {
                let c = comment.trim().to_ascii_lowercase();
                if let Some(units) = c.strip_prefix("units:") {
                    match units.trim() {
                        "kmh" => kmh = true,
                        "mps" => kmh = false,
                        other => {
                            return Err(CycleError::Parse {
                                line: lineno + 1,
                                message: format!("unknown units `{other}` (expected kmh|mps)"),
                            })
                        }
                    }
                }
                continue;
            }
            if trimmed.is_empty() {
                continue;
            }
            let v: f64 = trimmed.parse().map_err(|e: std::num::ParseFloatError| {
                CycleError::Parse { line: lineno + 1, message: e.to_string() }
            })?;
            samples.push(if kmh { v / 3.6 } else { v });
        }
        Self::new(name, samples, CycleSource::Custom, Some(DEFAULT_ACCEL_LIMIT_MPS2))
    }

    pub fn load(path: &Path) -> Result<Self, CycleError> {
        let text = std::fs::read_to_string(path).map_err(CycleError::Io)?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "cycle".to_string());
        Self::parse(&text, name)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# units: mps\n");
        for v in &self.samples_mps {
            out.push_str(&format!("{v}\n"));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhaseLabel {
    Phase1,
    Phase2,
    Phase3,
    Phase4,
}

/// A half-open sample window `[start, end)` of a source cycle.
#[derive(Debug, Clone, Copy)]
pub struct PhaseSpec<'a> {
    pub source: &'a DriveCycle,
    pub start: usize,
    pub end: usize,
    pub label: PhaseLabel,
}

impl<'a> PhaseSpec<'a> {
    pub fn new(
        source: &'a DriveCycle,
        start: usize,
        end: usize,
        label: PhaseLabel,
    ) -> Result<Self, CycleError> {
        if start >= end || end > source.len() {
            return Err(CycleError::BadPhase {
                reason: format!(
                    "window {start}..{end} invalid for cycle of {} samples",
                    source.len()
                ),
            });
        }
        Ok(Self { source, start, end, label })
    }

    pub fn samples(&self) -> &'a [f64] {
        &self.source.samples_mps[self.start..self.end]
    }
}

/// Concatenates the four phases in a seed-determined random order (uniform
/// over the 24 orderings), inserting `bridge_s` linearly interpolated samples
/// at each junction. `bridge_s = 0` gives exact concatenation.
pub fn build_learning_cycle(
    phases: &[PhaseSpec<'_>; 4],
    seed: u64,
    bridge_s: usize,
) -> DriveCycle {
    let mut generator = rng::stream(seed, "cycle-shuffle");
    let order = random_permutation(&mut generator);
    compose(phases, order, bridge_s)
}

/// The composite for an explicit phase order (used for deterministic
/// evaluation cycles).
pub fn compose_learning_cycle(
    phases: &[PhaseSpec<'_>; 4],
    order: [usize; 4],
    bridge_s: usize,
) -> DriveCycle {
    compose(phases, order, bridge_s)
}

fn random_permutation(generator: &mut impl Rng) -> [usize; 4] {
    let mut order = [0usize, 1, 2, 3];
    // Fisher-Yates
    for i in (1..4).rev() {
        let j = generator.gen_range(0..=i);
        order.swap(i, j);
    }
    order
}

fn compose(phases: &[PhaseSpec<'_>; 4], order: [usize; 4], bridge_s: usize) -> DriveCycle {
    let mut samples: Vec<f64> = Vec::new();
    for (k, &idx) in order.iter().enumerate() {
        let seg = phases[idx].samples();
        if k > 0 && bridge_s > 0 {
            let prev = *samples.last().expect("previous segment non-empty");
            let next = seg[0];
            for b in 1..=bridge_s {
                let f = b as f64 / (bridge_s + 1) as f64;
                samples.push((prev + (next - prev) * f).max(0.0));
            }
        }
        samples.extend_from_slice(seg);
    }
    DriveCycle::new("learning-cycle", samples, CycleSource::Composite, None)
        .expect("composite of validated phases is valid")
}

pub mod synth {
    //! Deterministic desk-scale stand-ins for the four standard cycles.
    //!
    //! The real traces are not redistributed here; these keep each cycle's
    //! qualitative character (speed envelope and acceleration style) at a few
    //! hundred seconds so experiments stay desk-sized. Generated from fixed
    //! segment tables — no randomness.

    use super::{CycleSource, DriveCycle, PhaseLabel, PhaseSpec};

    /// (target velocity m/s, ramp seconds, hold seconds)
    type Segment = (f64, usize, usize);

    fn build(name: &str, source: CycleSource, segments: &[Segment]) -> DriveCycle {
        let mut samples = vec![0.0f64];
        let mut v = 0.0;
        for &(target, ramp_s, hold_s) in segments {
            for k in 1..=ramp_s {
                samples.push(v + (target - v) * k as f64 / ramp_s as f64);
            }
            v = target;
            // gentle ripple while holding, so held sections are not flat lines
            for k in 0..hold_s {
                let ripple = if v > 1.0 { 0.6 * (k as f64 * 0.45).sin() } else { 0.0 };
                samples.push((v + ripple).max(0.0));
            }
        }
        samples.push((v - 2.0).max(0.0));
        DriveCycle::new(name, samples, source, Some(super::DEFAULT_ACCEL_LIMIT_MPS2))
            .expect("synthetic cycle within limits")
    }

    /// Rural driving: low-speed village cluster, then flowing 14-23 m/s.
    pub fn artemis_rural() -> DriveCycle {
        build(
            "artemis-rural",
            CycleSource::ArtemisRural,
            &[
                (0.0, 1, 6),
                (7.5, 10, 38),
                (5.0, 6, 14),
                (8.5, 8, 30),
                (0.0, 8, 6),
                (14.0, 12, 48),
                (19.0, 10, 55),
                (23.0, 10, 70),
                (12.0, 14, 25),
                (0.0, 14, 6),
            ],
        )
    }

    /// Aggressive stop-and-go with the strongest accelerations.
    pub fn rts95() -> DriveCycle {
        build(
            "rts95",
            CycleSource::Rts95,
            &[
                (0.0, 1, 4),
                (12.0, 5, 18),
                (2.0, 5, 4),
                (21.0, 7, 26),
                (25.0, 4, 34),
                (6.0, 8, 10),
                (24.0, 8, 26),
                (10.0, 7, 8),
                (0.0, 6, 4),
            ],
        )
    }

    /// Urban driving: repeated medium-speed runs with stops.
    pub fn udds() -> DriveCycle {
        build(
            "udds",
            CycleSource::Udds,
            &[
                (0.0, 1, 8),
                (9.0, 8, 32),
                (0.0, 7, 10),
                (13.0, 9, 42),
                (6.5, 7, 16),
                (15.5, 9, 55),
                (0.0, 11, 12),
                (11.0, 8, 35),
                (0.0, 8, 8),
            ],
        )
    }

    /// Worldwide harmonized profile: staged climb to a high-speed section.
    pub fn wltp() -> DriveCycle {
        build(
            "wltp",
            CycleSource::Wltp,
            &[
                (0.0, 1, 8),
                (8.0, 8, 26),
                (14.0, 8, 34),
                (20.0, 10, 48),
                (27.0, 12, 60),
                (33.0, 12, 70),
                (36.0, 8, 30),
                (15.0, 18, 16),
                (0.0, 14, 6),
            ],
        )
    }

    /// Documented default phase windows (sample indices, half-open) chosen by
    /// inspecting each stand-in's speed envelope: Phase 1 the low-speed
    /// cluster of the rural cycle, Phase 2 the hardest acceleration run of
    /// the aggressive cycle, Phase 3 the medium-speed urban run, Phase 4 the
    /// high-speed section.
    pub const PHASE1_WINDOW: (usize, usize) = (6, 76);
    pub const PHASE2_WINDOW: (usize, usize) = (32, 97);
    pub const PHASE3_WINDOW: (usize, usize) = (116, 180);
    pub const PHASE4_WINDOW: (usize, usize) = (160, 235);

    /// The four standard stand-ins in phase order.
    pub fn standard_cycles() -> [DriveCycle; 4] {
        [artemis_rural(), rts95(), udds(), wltp()]
    }

    /// Default phase specs over the given cycles (typically
    /// [`standard_cycles`] outputs, in that order).
    pub fn default_phases(cycles: &[DriveCycle; 4]) -> [PhaseSpec<'_>; 4] {
        [
            PhaseSpec::new(&cycles[0], PHASE1_WINDOW.0, PHASE1_WINDOW.1, PhaseLabel::Phase1)
                .expect("phase 1 window"),
            PhaseSpec::new(&cycles[1], PHASE2_WINDOW.0, PHASE2_WINDOW.1, PhaseLabel::Phase2)
                .expect("phase 2 window"),
            PhaseSpec::new(&cycles[2], PHASE3_WINDOW.0, PHASE3_WINDOW.1, PhaseLabel::Phase3)
                .expect("phase 3 window"),
            PhaseSpec::new(&cycles[3], PHASE4_WINDOW.0, PHASE4_WINDOW.1, PhaseLabel::Phase4)
                .expect("phase 4 window"),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_two_sample_trace() {
        let c = DriveCycle::parse("0\n0\n", "t").unwrap();
        assert_eq!(c.duration_s(), 2);
        assert_eq!(c.samples_mps, vec![0.0, 0.0]);
    }

    #[test]
    fn kmh_header_converts_to_mps() {
        let c = DriveCycle::parse("# units: kmh\n36\n36\n", "t").unwrap();
        assert!((c.samples_mps[0] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn negative_velocity_is_rejected() {
        let err = DriveCycle::parse("0\n-1\n", "t").unwrap_err();
        assert!(matches!(err, CycleError::VelocityOutOfRange { index: 1, .. }));
    }

    #[test]
    fn single_sample_is_rejected() {
        assert!(matches!(DriveCycle::parse("3\n", "t"), Err(CycleError::NonPositiveDuration)));
    }

    #[test]
    fn excessive_acceleration_is_rejected() {
        let err = DriveCycle::parse("0\n8\n", "t").unwrap_err();
        assert!(matches!(err, CycleError::ExcessiveAcceleration { .. }));
    }

    #[test]
    fn parse_round_trip_is_exact() {
        let c = synth::udds();
        let again = DriveCycle::parse(&c.to_text(), c.name.clone()).unwrap();
        assert_eq!(again.samples_mps, c.samples_mps);
    }

    #[test]
    fn identity_order_reproduces_segments_exactly() {
        let cycles = synth::standard_cycles();
        let phases = synth::default_phases(&cycles);
        let c = compose_learning_cycle(&phases, [0, 1, 2, 3], 0);
        let expected: Vec<f64> = phases.iter().flat_map(|p| p.samples().iter().copied()).collect();
        assert_eq!(c.samples_mps, expected);
    }

    #[test]
    fn length_is_sum_of_phases_plus_bridges() {
        let cycles = synth::standard_cycles();
        let phases = synth::default_phases(&cycles);
        let total: usize = phases.iter().map(|p| p.end - p.start).sum();
        for seed in [0u64, 7, 123] {
            let c = build_learning_cycle(&phases, seed, 3);
            assert_eq!(c.len(), total + 3 * 3);
        }
        let c0 = build_learning_cycle(&phases, 5, 0);
        assert_eq!(c0.len(), total);
    }

    #[test]
    fn same_seed_same_cycle() {
        let cycles = synth::standard_cycles();
        let phases = synth::default_phases(&cycles);
        let a = build_learning_cycle(&phases, 99, 3);
        let b = build_learning_cycle(&phases, 99, 3);
        assert_eq!(a, b);
    }

    #[test]
    fn some_seed_yields_identity_permutation() {
        let cycles = synth::standard_cycles();
        let phases = synth::default_phases(&cycles);
        let identity = compose_learning_cycle(&phases, [0, 1, 2, 3], 3);
        let found = (0..200u64).any(|seed| build_learning_cycle(&phases, seed, 3) == identity);
        assert!(found, "no seed in 0..200 mapped to the identity permutation");
    }

    #[test]
    fn permutations_are_uniform_chi_square() {
        // 10^4 draws over the 24 orderings; chi-square with 23 degrees of
        // freedom, threshold at the 99.9th percentile (49.73)
        use rand::Rng;
        let draws = 10_000usize;
        let mut counts = std::collections::HashMap::new();
        for seed in 0..draws as u64 {
            let mut generator = crate::rng::stream(seed, "cycle-shuffle");
            let mut order = [0usize, 1, 2, 3];
            for i in (1..4).rev() {
                let j = generator.gen_range(0..=i);
                order.swap(i, j);
            }
            *counts.entry(order).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 24);
        let expected = draws as f64 / 24.0;
        let chi2: f64 = counts.values().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        assert!(chi2 < 49.73, "chi-square statistic {chi2} too large");
    }

    #[test]
    fn bridges_interpolate_junctions() {
        let a = DriveCycle::new("a", vec![0.0, 4.0, 4.0], CycleSource::Custom, None).unwrap();
        let b = DriveCycle::new("b", vec![12.0, 12.0], CycleSource::Custom, None).unwrap();
        let phases = [
            PhaseSpec::new(&a, 0, 3, PhaseLabel::Phase1).unwrap(),
            PhaseSpec::new(&b, 0, 2, PhaseLabel::Phase2).unwrap(),
            PhaseSpec::new(&a, 0, 2, PhaseLabel::Phase3).unwrap(),
            PhaseSpec::new(&b, 0, 2, PhaseLabel::Phase4).unwrap(),
        ];
        let c = compose_learning_cycle(&phases, [0, 1, 2, 3], 3);
        // junction a(4.0) -> b(12.0) bridged by 6, 8, 10
        assert_eq!(&c.samples_mps[3..6], &[6.0, 8.0, 10.0]);
    }

    #[test]
    fn synthetic_cycles_have_expected_envelopes() {
        let rural = synth::artemis_rural();
        let aggressive = synth::rts95();
        let urban = synth::udds();
        let highway = synth::wltp();
        assert!(rural.max_velocity() > 20.0 && rural.max_velocity() < 26.0);
        assert!(highway.max_velocity() > 34.0);
        assert!(urban.max_velocity() < 18.0);
        let max_accel =
            |c: &DriveCycle| (0..c.len() - 1).map(|i| c.accel(i)).fold(f64::MIN, f64::max);
        assert!(max_accel(&aggressive) >= max_accel(&urban));
        assert!(max_accel(&aggressive) >= max_accel(&rural));
    }

    #[test]
    fn default_composite_duration_is_desk_scale() {
        let cycles = synth::standard_cycles();
        let phases = synth::default_phases(&cycles);
        let c = build_learning_cycle(&phases, 0, super::DEFAULT_BRIDGE_S);
        assert!(
            c.duration_s() >= 200 && c.duration_s() <= 400,
            "composite duration {}",
            c.duration_s()
        );
    }
}
