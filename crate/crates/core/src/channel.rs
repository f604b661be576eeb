//! Binary symmetric channel, SNR/RBER mapping and the FER harness.

use std::io::Write;
use std::time::{Duration, Instant};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use rayon::prelude::*;
use thiserror::Error;

use crate::codec::{BwpCode, DecodeOptions};
use crate::layout::LayoutParams;

/// Frames decoded per parallel batch. Fixed so results do not depend on the
/// thread count.
const BATCH: usize = 64;

/// Smallest FER a plan may target without an explicit override.
pub const FER_FLOOR: f64 = 1e-5;

pub const CSV_HEADER: [&str; 14] = [
    "label",
    "K",
    "R",
    "b",
    "f",
    "decoder",
    "rber",
    "snr_db",
    "frames",
    "failures",
    "fer",
    "mean_iters",
    "miscorrections",
    "seed",
];

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("raw bit error rate {0} outside [0, 0.5]")]
    BadRber(f64),
    #[error("plan resolves FER down to {0:e}, below the {FER_FLOOR:e} floor; raise the override to run it")]
    BelowFloor(f64),
    #[error("plan has no grid points")]
    EmptyGrid,
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Flips every bit independently with probability `rber`, walking geometric gaps.
pub fn bsc_corrupt<R: Rng + ?Sized>(bits: &mut [u8], rber: f64, rng: &mut R) -> usize {
    assert!((0.0..=0.5).contains(&rber), "rber {rber} outside [0, 0.5]");
    if rber == 0.0 {
        return 0;
    }
    let gap = Geometric::new(rber).expect("probability in (0, 0.5]");
    let mut flips = 0;
    let mut at = gap.sample(rng);
    while (at as usize) < bits.len() {
        bits[at as usize] ^= 1;
        flips += 1;
        at = at.saturating_add(1).saturating_add(gap.sample(rng));
    }
    flips
}

/// Gaussian tail probability Q(x).
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Hard-decision BPSK over AWGN: Q(√(rate · 10^{snr/10})).
pub fn snr_to_rber(snr_db: f64, code_rate: f64) -> f64 {
    assert!(code_rate > 0.0 && code_rate <= 1.0);
    q_function((code_rate * 10f64.powf(snr_db / 10.0)).sqrt())
}

/// Inverse of [`snr_to_rber`] by bisection; `None` for rber ≥ 0.5 or ≤ 0.
pub fn rber_to_snr(rber: f64, code_rate: f64) -> Option<f64> {
    if !(rber > 0.0 && rber < 0.5) {
        return None;
    }
    let (mut lo, mut hi) = (-60.0f64, 60.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if snr_to_rber(mid, code_rate) > rber {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub rber: f64,
    pub snr_db: Option<f64>,
}

impl SweepPoint {
    pub fn from_rber(rber: f64) -> Self {
        Self { rber, snr_db: None }
    }

    pub fn from_snr(snr_db: f64, code_rate: f64) -> Self {
        Self {
            rber: snr_to_rber(snr_db, code_rate),
            snr_db: Some(snr_db),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub label: String,
    pub params: LayoutParams,
    pub options: DecodeOptions,
    pub points: Vec<SweepPoint>,
    pub target_failures: u64,
    pub frame_cap: u64,
    pub seed: u64,
    /// Allow plans resolving FER below [`FER_FLOOR`].
    pub allow_deep: bool,
}

impl SweepPlan {
    pub fn validate(&self) -> Result<(), ChannelError> {
        if self.points.is_empty() {
            return Err(ChannelError::EmptyGrid);
        }
        if let Some(p) = self.points.iter().find(|p| !(0.0..=0.5).contains(&p.rber)) {
            return Err(ChannelError::BadRber(p.rber));
        }
        let resolution = self.target_failures as f64 / self.frame_cap.max(1) as f64;
        if resolution < FER_FLOOR && !self.allow_deep {
            return Err(ChannelError::BelowFloor(resolution));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FerRecord {
    pub label: String,
    pub params: LayoutParams,
    pub decoder: String,
    pub rber: f64,
    pub snr_db: Option<f64>,
    pub frames: u64,
    pub failures: u64,
    pub fer: f64,
    pub mean_iters: f64,
    pub miscorrections: u64,
    pub seed: u64,
    /// Not written to CSV.
    pub wall_time: Duration,
}

impl FerRecord {
    fn csv_row(&self) -> [String; 14] {
        [
            self.label.clone(),
            self.params.message_bits.to_string(),
            self.params.parity_bits.to_string(),
            self.params.block_bits.to_string(),
            self.params.rs_parity.to_string(),
            self.decoder.clone(),
            self.rber.to_string(),
            self.snr_db.map(|s| s.to_string()).unwrap_or_default(),
            self.frames.to_string(),
            self.failures.to_string(),
            self.fer.to_string(),
            self.mean_iters.to_string(),
            self.miscorrections.to_string(),
            self.seed.to_string(),
        ]
    }
}

/// Streams records as CSV, header first.
pub struct CsvSink<W: Write> {
    writer: csv::Writer<W>,
}

impl<W: Write> CsvSink<W> {
    pub fn new(out: W) -> Result<Self, ChannelError> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(CSV_HEADER)?;
        writer.flush()?;
        Ok(Self { writer })
    }

    pub fn write(&mut self, record: &FerRecord) -> Result<(), ChannelError> {
        self.writer.write_record(record.csv_row())?;
        self.writer.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> Result<W, ChannelError> {
        self.writer.into_inner().map_err(|e| ChannelError::Io(e.into_error()))
    }
}

/// Generator for one frame: a fixed stream per grid point and a disjoint
/// counter window per frame.
pub fn frame_rng(seed: u64, point: usize, frame: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(point as u64);
    rng.set_word_pos((frame as u128) << 36);
    rng
}

pub fn random_bits<R: RngCore + ?Sized>(rng: &mut R, n: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(n + 63);
    while out.len() < n {
        let word = rng.next_u64();
        out.extend((0..64).map(|i| (word >> i & 1) as u8));
    }
    out.truncate(n);
    out
}

#[derive(Debug, Clone, Copy, Default)]
struct FrameResult {
    failed: bool,
    miscorrected: bool,
    iterations: usize,
}

fn simulate_frame(code: &BwpCode, options: &DecodeOptions, rber: f64, mut rng: ChaCha8Rng) -> FrameResult {
    let message = random_bits(&mut rng, code.message_len());
    let mut frame = code.encode(&message).expect("message length fixed by code");
    bsc_corrupt(&mut frame, rber, &mut rng);
    let out = code.decode(&frame, options).expect("frame length fixed by code");
    let wrong = out.message != message;
    FrameResult {
        failed: !out.is_success() || wrong,
        miscorrected: out.is_success() && wrong,
        iterations: out.stats.iterations,
    }
}

/// One grid point: frames until the failure target or the frame cap.
pub fn run_point(code: &BwpCode, plan: &SweepPlan, index: usize) -> FerRecord {
    let start = Instant::now();
    let point = plan.points[index];
    let (mut frames, mut failures, mut miscorrections, mut iterations) = (0u64, 0u64, 0u64, 0u64);
    'outer: while frames < plan.frame_cap && failures < plan.target_failures {
        let batch = BATCH.min((plan.frame_cap - frames) as usize) as u64;
        let results: Vec<FrameResult> = (frames..frames + batch)
            .into_par_iter()
            .map(|f| simulate_frame(code, &plan.options, point.rber, frame_rng(plan.seed, index, f)))
            .collect();
        for r in results {
            frames += 1;
            failures += r.failed as u64;
            miscorrections += r.miscorrected as u64;
            iterations += r.iterations as u64;
            if failures >= plan.target_failures {
                break 'outer;
            }
        }
    }
    FerRecord {
        label: plan.label.clone(),
        params: plan.params.clone(),
        decoder: plan.options.decoder.to_string(),
        rber: point.rber,
        snr_db: point.snr_db,
        frames,
        failures,
        fer: if frames == 0 { 0.0 } else { failures as f64 / frames as f64 },
        mean_iters: if frames == 0 { 0.0 } else { iterations as f64 / frames as f64 },
        miscorrections,
        seed: plan.seed,
        wall_time: start.elapsed(),
    }
}

/// Runs every grid point in order, handing each record to `sink` as soon as
/// it completes.
pub fn run_fer(
    code: &BwpCode,
    plan: &SweepPlan,
    mut sink: impl FnMut(&FerRecord) -> Result<(), ChannelError>,
) -> Result<Vec<FerRecord>, ChannelError> {
    plan.validate()?;
    let mut out = Vec::with_capacity(plan.points.len());
    for index in 0..plan.points.len() {
        let record = run_point(code, plan, index);
        sink(&record)?;
        out.push(record);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::DecoderKind;
    use crate::layout::plan_layout;

    #[test]
    fn q_function_values() {
        assert!((q_function(1.0) - 0.158_655_253_931_457).abs() < 1e-9);
        assert_eq!(q_function(0.0), 0.5);
        assert!(snr_to_rber(80.0, 0.9) < 1e-300);
        assert_eq!(snr_to_rber(f64::NEG_INFINITY, 0.9), 0.5);
    }

    #[test]
    fn snr_inverse() {
        for snr in [2.0, 5.0, 8.5] {
            let rber = snr_to_rber(snr, 0.9);
            assert!((rber_to_snr(rber, 0.9).unwrap() - snr).abs() < 1e-9);
        }
        assert_eq!(rber_to_snr(0.5, 0.9), None);
    }

    #[test]
    fn bsc_identity_and_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut bits = vec![0u8; 5000];
        assert_eq!(bsc_corrupt(&mut bits, 0.0, &mut rng), 0);
        assert!(bits.iter().all(|&b| b == 0));

        let (n, p, frames) = (5000usize, 0.01, 1000);
        let total: usize = (0..frames)
            .map(|_| {
                let mut bits = vec![0u8; n];
                let flips = bsc_corrupt(&mut bits, p, &mut rng);
                assert_eq!(flips, bits.iter().filter(|&&b| b == 1).count());
                flips
            })
            .sum();
        let mean = n as f64 * p * frames as f64;
        let sigma = (mean * (1.0 - p)).sqrt();
        assert!((total as f64 - mean).abs() < 4.0 * sigma, "{total} vs {mean}");
    }

    fn tiny_plan(rber: f64) -> SweepPlan {
        SweepPlan {
            label: "tiny".into(),
            params: LayoutParams::new(400, 160, 8, 1),
            options: DecodeOptions::with_decoder(DecoderKind::Plus1),
            points: vec![SweepPoint::from_rber(rber)],
            target_failures: 10,
            frame_cap: 100,
            seed: 7,
            allow_deep: false,
        }
    }

    #[test]
    fn clean_channel_never_fails() {
        let plan = tiny_plan(0.0);
        let code = BwpCode::new(plan_layout(&plan.params).unwrap()).unwrap();
        let rec = run_point(&code, &plan, 0);
        assert_eq!((rec.frames, rec.failures, rec.fer), (100, 0, 0.0));
    }

    #[test]
    fn saturated_channel_always_fails() {
        let plan = tiny_plan(0.2);
        let code = BwpCode::new(plan_layout(&plan.params).unwrap()).unwrap();
        let rec = run_point(&code, &plan, 0);
        assert_eq!((rec.frames, rec.failures), (10, 10));
    }

    #[test]
    fn floor_refusal() {
        let mut plan = tiny_plan(0.01);
        plan.frame_cap = 10_000_000;
        assert!(matches!(plan.validate(), Err(ChannelError::BelowFloor(_))));
        plan.allow_deep = true;
        assert!(plan.validate().is_ok());
    }
}
