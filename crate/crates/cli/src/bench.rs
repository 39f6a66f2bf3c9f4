//! Single-threaded wall-clock latency benchmark for the two streams.
//!
//! Windows and physics parameters are resolved before any clock starts, so
//! the numbers cover pure computation: no IO, no parsing, no allocation of
//! inputs. Energy is out of scope for this tool; it measures time only.

use std::hint::black_box;
use std::time::Instant;

use dualstream_core::autoencoder::AutoencoderModel;
use dualstream_core::fusion::{health_pipeline, Calibration, FusionConfig};
use dualstream_core::physics::{physics_vector, PhysicsParams};
use dualstream_core::telemetry::Window;

use crate::CliError;

/// Below this the mean/std pair is too noisy to compare runs.
pub const MIN_BENCH_ITERATIONS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatencyStat {
    pub mean_us: f64,
    pub std_us: f64,
    /// Batch-means standard error of the mean. Consecutive timing samples
    /// share scheduler and frequency state, so the iid formula std/sqrt(n)
    /// understates how much the mean moves between runs; the spread of
    /// batch averages over consecutive samples gives an honest error bar.
    pub std_err_us: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchReport {
    pub iterations: usize,
    pub warmup: usize,
    pub stream_a: LatencyStat,
    pub stream_b: LatencyStat,
    pub fused: LatencyStat,
}

impl BenchReport {
    pub fn stream_b_over_a_percent(&self) -> f64 {
        100.0 * self.stream_b.mean_us / self.stream_a.mean_us
    }
}

/// Batches of consecutive samples behind the standard-error estimate.
const SE_BATCHES: usize = 16;

fn stat(samples_us: &[f64]) -> LatencyStat {
    let n = samples_us.len() as f64;
    let mean = samples_us.iter().sum::<f64>() / n;
    let var = samples_us.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / n;
    LatencyStat { mean_us: mean, std_us: var.sqrt(), std_err_us: batch_means_se(samples_us) }
}

fn batch_means_se(samples_us: &[f64]) -> f64 {
    if samples_us.len() < 2 {
        return 0.0;
    }
    let b = SE_BATCHES.min(samples_us.len());
    let len = samples_us.len() / b;
    let means: Vec<f64> = (0..b)
        .map(|j| samples_us[j * len..(j + 1) * len].iter().sum::<f64>() / len as f64)
        .collect();
    let grand = means.iter().sum::<f64>() / b as f64;
    let var = means.iter().map(|m| (m - grand) * (m - grand)).sum::<f64>() / (b - 1) as f64;
    (var / b as f64).sqrt()
}

fn time_component(
    iterations: usize,
    warmup: usize,
    n_inputs: usize,
    mut f: impl FnMut(usize),
) -> LatencyStat {
    for i in 0..warmup {
        f(i % n_inputs);
    }
    let mut samples = Vec::with_capacity(iterations);
    for i in 0..iterations {
        let idx = i % n_inputs;
        let start = Instant::now();
        f(idx);
        samples.push(start.elapsed().as_nanos() as f64 / 1e3);
    }
    stat(&samples)
}

/// Time stream A (autoencoder score), stream B (physics proxies), and the
/// full fused pipeline per window, each over `iterations` timed passes.
pub fn run(
    windows: &[Window],
    model: &AutoencoderModel,
    params: &[PhysicsParams],
    cal: &Calibration,
    fusion: &FusionConfig,
    iterations: usize,
    warmup: usize,
) -> Result<BenchReport, CliError> {
    if iterations < MIN_BENCH_ITERATIONS {
        return Err(CliError::Usage(format!(
            "bench needs at least {} iterations, got {}",
            MIN_BENCH_ITERATIONS, iterations
        )));
    }
    if windows.is_empty() {
        return Err(CliError::Other("bench needs at least one window".into()));
    }
    assert_eq!(windows.len(), params.len());

    let n = windows.len();
    let stream_a = time_component(iterations, warmup, n, |i| {
        black_box(model.score(black_box(&windows[i])));
    });
    let stream_b = time_component(iterations, warmup, n, |i| {
        black_box(physics_vector(black_box(&windows[i]), &params[i]));
    });
    let fused = time_component(iterations, warmup, n, |i| {
        black_box(health_pipeline(black_box(&windows[i]), model, &params[i], cal, fusion));
    });

    Ok(BenchReport { iterations, warmup, stream_a, stream_b, fused })
}

/// Render the report as comment-headed CSV.
pub fn format_report(r: &BenchReport) -> String {
    let mut out = String::new();
    out.push_str("# wall-clock latency only; energy is not measured by this tool\n");
    out.push_str("# single-threaded; windows preloaded, so IO and parsing are excluded\n");
    out.push_str(&format!("# iterations={} warmup={}\n", r.iterations, r.warmup));
    out.push_str("component,mean_us,std_us,std_err_us\n");
    for (name, s) in [
        ("stream_a", r.stream_a),
        ("stream_b", r.stream_b),
        ("fused", r.fused),
    ] {
        out.push_str(&format!(
            "{},{:.4},{:.4},{:.4}\n",
            name, s.mean_us, s.std_us, s.std_err_us
        ));
    }
    out.push_str(&format!(
        "stream_b_over_a_percent,{:.4}\n",
        r.stream_b_over_a_percent()
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stat_matches_hand_numbers() {
        let s = stat(&[1.0, 2.0, 3.0, 4.0]);
        assert!((s.mean_us - 2.5).abs() < 1e-12);
        assert!((s.std_us - (1.25f64).sqrt()).abs() < 1e-12);
        // four samples -> four singleton batches; se = sqrt((5/3)/4)
        assert!((s.std_err_us - (5.0f64 / 12.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn batch_se_zero_when_batches_identical() {
        let samples: Vec<f64> = (0..32).map(|i| if i % 2 == 0 { 1.0 } else { 3.0 }).collect();
        let s = stat(&samples);
        assert!((s.mean_us - 2.0).abs() < 1e-12);
        assert!((s.std_us - 1.0).abs() < 1e-12);
        assert_eq!(s.std_err_us, 0.0, "every 2-sample batch averages to the same 2.0");
    }

    #[test]
    fn batch_se_sees_level_shift_iid_formula_misses() {
        let samples: Vec<f64> =
            (0..32).map(|i| if i < 16 { 1.0 } else { 2.0 }).collect();
        let s = stat(&samples);
        assert!((s.std_err_us - (1.0f64 / 60.0).sqrt()).abs() < 1e-12);
        let iid_se = s.std_us / 32f64.sqrt();
        assert!(s.std_err_us > iid_se, "correlated drift must widen the error bar");
    }

    #[test]
    fn iteration_floor_enforced() {
        let err = run(
            &[],
            &dummy_model(),
            &[],
            &dualstream_core::fusion::Calibration::from_scales(
                [dualstream_core::fusion::ChannelScale { min: 0.0, max: 1.0, degenerate: false }; 5],
            ),
            &FusionConfig::default(),
            10,
            0,
        )
        .unwrap_err();
        assert_eq!(err.exit_code(), crate::exit_code::USAGE);
    }

    fn dummy_model() -> AutoencoderModel {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        AutoencoderModel::init(dualstream_core::autoencoder::Topology::desk(), &mut rng)
    }
}
