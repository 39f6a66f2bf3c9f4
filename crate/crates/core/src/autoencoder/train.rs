//! Training: Adam with global-norm gradient clipping over mini-batches of
//! normalized windows, mean-squared reconstruction loss.

use super::{batch_gradient, AutoencoderModel, Normalization};
use crate::telemetry::{Label, Window};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::fmt::Write as _;
// backs float math in pure no_std builds; shadowed once std is linked
#[allow(unused_imports)]
use num_traits::Float;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub clip_norm: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> TrainConfig {
        TrainConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            epochs: 30,
            batch_size: 32,
            clip_norm: 1.0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn is_valid(&self) -> bool {
        self.learning_rate > 0.0
            && (0.0..1.0).contains(&self.beta1)
            && self.beta1 > 0.0
            && (0.0..1.0).contains(&self.beta2)
            && self.beta2 > 0.0
            && self.epsilon > 0.0
            && self.epochs >= 1
            && self.batch_size >= 1
            && self.clip_norm > 0.0
    }
}

/// The training corpus must be non-empty and Normal-labeled throughout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CorpusError {
    Empty,
    NonNormal { mission_id: String, window_idx: usize },
}

impl fmt::Display for CorpusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorpusError::Empty => f.write_str("training corpus is empty"),
            CorpusError::NonNormal { mission_id, window_idx } => write!(
                f,
                "window {} of mission {} is not Normal-labeled; train only on normal driving",
                window_idx, mission_id
            ),
        }
    }
}

/// One row of the loss curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLoss {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

/// CSV with header `epoch,train_loss,val_loss`.
pub fn loss_curve_to_csv(curve: &[EpochLoss]) -> String {
    let mut out = String::from("epoch,train_loss,val_loss\n");
    for row in curve {
        let _ = writeln!(out, "{},{},{}", row.epoch, row.train_loss, row.val_loss);
    }
    out
}

/// Scale `grads` so its global L2 norm does not exceed `max_norm`.
pub fn clip_global_norm(grads: &mut [f64], max_norm: f64) -> f64 {
    let norm = grads.iter().map(|g| g * g).sum::<f64>().sqrt();
    if norm > max_norm {
        let s = max_norm / norm;
        for g in grads.iter_mut() {
            *g *= s;
        }
    }
    norm
}

/// Elementwise Adam with bias correction.
pub struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    step: u64,
}

impl Adam {
    pub fn new(dim: usize) -> Adam {
        Adam { m: vec![0.0; dim], v: vec![0.0; dim], step: 0 }
    }

    pub fn update(&mut self, params: &mut [f64], grads: &[f64], cfg: &TrainConfig) {
        assert_eq!(params.len(), grads.len());
        assert_eq!(params.len(), self.m.len());
        self.step += 1;
        let bc1 = 1.0 - cfg.beta1.powi(self.step as i32);
        let bc2 = 1.0 - cfg.beta2.powi(self.step as i32);
        for j in 0..params.len() {
            self.m[j] = cfg.beta1 * self.m[j] + (1.0 - cfg.beta1) * grads[j];
            self.v[j] = cfg.beta2 * self.v[j] + (1.0 - cfg.beta2) * grads[j] * grads[j];
            let m_hat = self.m[j] / bc1;
            let v_hat = self.v[j] / bc2;
            params[j] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
        }
    }
}

/// Per-channel mean and std over every sample of the given windows; a
/// constant channel gets std 1.0 so it passes through centered.
pub fn normalization_stats(windows: &[Window]) -> Normalization {
    let dim = super::INPUT_CHANNELS;
    let mut mean = vec![0.0; dim];
    let mut count = 0.0;
    for w in windows {
        for s in w.samples() {
            let raw = [s.a_x, s.a_y, s.a_z, s.v];
            for k in 0..dim {
                mean[k] += raw[k];
            }
            count += 1.0;
        }
    }
    for m in mean.iter_mut() {
        *m /= count;
    }
    let mut var = vec![0.0; dim];
    for w in windows {
        for s in w.samples() {
            let raw = [s.a_x, s.a_y, s.a_z, s.v];
            for k in 0..dim {
                let d = raw[k] - mean[k];
                var[k] += d * d;
            }
        }
    }
    let std = var
        .iter()
        .map(|v| {
            let s = (v / count).sqrt();
            if s > 1e-12 {
                s
            } else {
                1.0
            }
        })
        .collect();
    Normalization { mean, std }
}

fn check_corpus(windows: &[Window]) -> Result<(), CorpusError> {
    for w in windows {
        if w.label != Some(Label::Normal) {
            return Err(CorpusError::NonNormal {
                mission_id: w.mission_id.clone(),
                window_idx: w.index,
            });
        }
    }
    Ok(())
}

fn mean_loss(model: &AutoencoderModel, features: &[Vec<Vec<f64>>]) -> f64 {
    let mut acc = 0.0;
    for xs in features {
        let recon = model.forward(xs).expect("features built from model stats");
        let rms = super::reconstruction_error(xs, &recon).expect("same shape");
        acc += rms * rms;
    }
    acc / features.len() as f64
}

/// Train on Normal-labeled windows. Normalization statistics are computed
/// from the training set only and frozen into the returned model. Fully
/// deterministic for a given config seed.
pub fn train(
    mut model: AutoencoderModel,
    train_windows: &[Window],
    val_windows: &[Window],
    config: &TrainConfig,
) -> Result<(AutoencoderModel, Vec<EpochLoss>), CorpusError> {
    assert!(config.is_valid(), "invalid training configuration");
    if train_windows.is_empty() {
        return Err(CorpusError::Empty);
    }
    check_corpus(train_windows)?;
    check_corpus(val_windows)?;

    model.norm = normalization_stats(train_windows);
    let train_feats: Vec<Vec<Vec<f64>>> =
        train_windows.iter().map(|w| model.normalized_features(w)).collect();
    let val_feats: Vec<Vec<Vec<f64>>> =
        val_windows.iter().map(|w| model.normalized_features(w)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut adam = Adam::new(model.param_count());
    let mut order: Vec<usize> = (0..train_feats.len()).collect();
    let mut curve = Vec::with_capacity(config.epochs);

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<&[Vec<f64>]> =
                chunk.iter().map(|&i| train_feats[i].as_slice()).collect();
            let (loss, grads) = batch_gradient(&model, &batch);
            epoch_loss += loss * chunk.len() as f64;
            let mut flat_g = grads.flatten();
            clip_global_norm(&mut flat_g, config.clip_norm);
            let mut flat_p = model.flatten();
            adam.update(&mut flat_p, &flat_g, config);
            model.unflatten(&flat_p);
        }
        let train_loss = epoch_loss / train_feats.len() as f64;
        let val_loss = if val_feats.is_empty() {
            train_loss
        } else {
            mean_loss(&model, &val_feats)
        };
        curve.push(EpochLoss { epoch, train_loss, val_loss });
    }
    Ok((model, curve))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autoencoder::Topology;
    use crate::telemetry::{Sample, DT, WINDOW_LEN};
    use approx::assert_relative_eq;

    fn labeled_window(
        id: &str,
        idx: usize,
        label: Option<Label>,
        f: impl Fn(usize) -> (f64, f64, f64, f64),
    ) -> Window {
        let samples: Vec<Sample> = (0..WINDOW_LEN)
            .map(|i| {
                let (a_x, a_y, a_z, v) = f(i);
                Sample { t: i as f64 * DT, a_x, a_y, a_z, v, theta: Some(0.0) }
            })
            .collect();
        Window::new(String::from(id), idx, 10000.0, label, samples).unwrap()
    }

    fn sine_corpus(n: usize) -> Vec<Window> {
        (0..n)
            .map(|k| {
                let phase = k as f64 * 0.7;
                labeled_window("train", k, Some(Label::Normal), move |i| {
                    let t = i as f64 * DT;
                    (
                        0.3 * (2.0 * t + phase).sin(),
                        0.2 * (3.0 * t + phase).cos(),
                        9.8 + 0.5 * (4.0 * t + phase).sin(),
                        15.0 + (t + phase).sin(),
                    )
                })
            })
            .collect()
    }

    #[test]
    fn adam_first_step_matches_hand_computation() {
        let cfg = TrainConfig::default();
        let mut adam = Adam::new(1);
        let mut theta = [0.0];
        adam.update(&mut theta, &[1.0], &cfg);
        // m_hat = 1, v_hat = 1 -> step is -lr / (1 + eps)
        assert_relative_eq!(theta[0], -1e-3 / (1.0 + 1e-8), epsilon = 1e-15);
        assert!((theta[0] - (-9.99999e-4)).abs() < 1e-8);
    }

    #[test]
    fn adam_zero_gradient_leaves_params_fixed() {
        let cfg = TrainConfig::default();
        let mut adam = Adam::new(2);
        let mut theta = [0.7, -0.3];
        adam.update(&mut theta, &[0.0, 0.0], &cfg);
        assert_eq!(theta, [0.7, -0.3]);
    }

    #[test]
    fn clipping_scales_to_unit_norm() {
        // norm 10 vector: (6, 8)
        let mut g = [6.0, 8.0];
        let norm = clip_global_norm(&mut g, 1.0);
        assert_relative_eq!(norm, 10.0, epsilon = 1e-12);
        assert_relative_eq!(g[0], 0.6, epsilon = 1e-12);
        assert_relative_eq!(g[1], 0.8, epsilon = 1e-12);

        let mut small = [0.3, 0.4];
        clip_global_norm(&mut small, 1.0);
        assert_eq!(small, [0.3, 0.4]);
    }

    #[test]
    fn empty_and_mislabeled_corpora_are_rejected() {
        let model = AutoencoderModel::init(
            Topology { input_dim: 4, encoder_hidden: alloc::vec![3] },
            &mut ChaCha8Rng::seed_from_u64(0),
        );
        let cfg = TrainConfig { epochs: 1, ..TrainConfig::default() };
        assert_eq!(
            train(model.clone(), &[], &[], &cfg).unwrap_err(),
            CorpusError::Empty
        );
        let bad = labeled_window("m7", 3, Some(Label::Pothole), |_| (0.0, 0.0, 9.8, 10.0));
        let good = labeled_window("m1", 0, Some(Label::Normal), |_| (0.0, 0.0, 9.8, 10.0));
        assert_eq!(
            train(model.clone(), &[good.clone(), bad], &[], &cfg).unwrap_err(),
            CorpusError::NonNormal { mission_id: String::from("m7"), window_idx: 3 }
        );
        let unlabeled = labeled_window("m2", 1, None, |_| (0.0, 0.0, 9.8, 10.0));
        assert!(train(model, &[good, unlabeled], &[], &cfg).is_err());
    }

    #[test]
    fn normalization_uses_train_set_and_floors_constant_channels() {
        let w = labeled_window("m", 0, Some(Label::Normal), |i| {
            (if i % 2 == 0 { -1.0 } else { 1.0 }, 0.0, 9.8, 12.0)
        });
        let stats = normalization_stats(&[w]);
        assert_relative_eq!(stats.mean[0], 0.0, epsilon = 1e-12);
        assert_relative_eq!(stats.std[0], 1.0, epsilon = 1e-12);
        // constant channels: centered, std floored to 1
        assert_relative_eq!(stats.mean[2], 9.8, epsilon = 1e-12);
        assert_eq!(stats.std[2], 1.0);
        assert_eq!(stats.std[3], 1.0);
    }

    #[test]
    fn sine_smoke_run_learns_and_emits_curve() {
        let corpus = sine_corpus(30);
        let (train_set, val_set) = corpus.split_at(24);
        let topo = Topology { input_dim: 4, encoder_hidden: alloc::vec![6, 3] };
        let model = AutoencoderModel::init(topo, &mut ChaCha8Rng::seed_from_u64(3));
        let cfg = TrainConfig {
            epochs: 150,
            batch_size: 4,
            learning_rate: 3e-3,
            seed: 5,
            ..TrainConfig::default()
        };
        let (trained, curve) = train(model, train_set, val_set, &cfg).unwrap();
        assert_eq!(curve.len(), 150);
        let first = &curve[0];
        let last = curve.last().unwrap();
        assert!(
            last.train_loss < 0.2 * first.train_loss,
            "train loss {} -> {}",
            first.train_loss,
            last.train_loss
        );
        assert!(last.val_loss <= first.val_loss);
        let csv = loss_curve_to_csv(&curve);
        assert!(csv.starts_with("epoch,train_loss,val_loss\n1,"));
        assert_eq!(csv.lines().count(), 151);
        // stats came from the train half only
        assert!(trained.norm.std.iter().all(|&s| s > 0.0));
    }

    #[test]
    fn training_is_seed_deterministic() {
        let corpus = sine_corpus(12);
        let topo = Topology { input_dim: 4, encoder_hidden: alloc::vec![4] };
        let cfg = TrainConfig { epochs: 3, batch_size: 4, seed: 9, ..TrainConfig::default() };
        let run = || {
            let model = AutoencoderModel::init(topo.clone(), &mut ChaCha8Rng::seed_from_u64(2));
            let (m, curve) = train(model, &corpus, &[], &cfg).unwrap();
            (m.flatten(), curve)
        };
        let (a, curve_a) = run();
        let (b, curve_b) = run();
        assert_eq!(a, b);
        assert_eq!(curve_a, curve_b);
    }
}
