//! Reconstruction-based anomaly scoring (stream A).
//!
//! A sequence autoencoder over the four input channels (a_x, a_y, a_z, v):
//! stacked LSTM encoder, final hidden state repeated once per timestep as
//! the decoder input (repeat vector), mirrored LSTM decoder, and a per-step
//! linear projection back to the input channels. The anomaly score `a_ml`
//! is the RMS reconstruction error in normalized units. Training is plain
//! backpropagation through time with Adam; no external ML dependencies.

mod cell;
mod codec;
mod train;

pub use cell::{LayerCache, LstmLayerParams, ShapeError};
pub use codec::{decode_model, encode_model, ModelCodecError, MODEL_FORMAT_VERSION, MODEL_MAGIC};
pub use train::{
    clip_global_norm, loss_curve_to_csv, normalization_stats, train, Adam, CorpusError,
    EpochLoss, TrainConfig,
};

use crate::telemetry::Window;
use alloc::vec;
use alloc::vec::Vec;
// backs float math in pure no_std builds; shadowed once std is linked
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

/// Number of input channels fed to the model: a_x, a_y, a_z, v.
pub const INPUT_CHANNELS: usize = 4;
/// Encoder widths matching the reference architecture.
pub const PAPER_ENCODER: [usize; 3] = [128, 64, 32];
/// Desk-scale widths for fast local runs.
pub const DESK_ENCODER: [usize; 3] = [32, 16, 8];

/// Encoder shape; the decoder is always its exact reverse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    pub input_dim: usize,
    pub encoder_hidden: Vec<usize>,
}

impl Topology {
    pub fn desk() -> Topology {
        Topology { input_dim: INPUT_CHANNELS, encoder_hidden: DESK_ENCODER.to_vec() }
    }

    pub fn paper() -> Topology {
        Topology { input_dim: INPUT_CHANNELS, encoder_hidden: PAPER_ENCODER.to_vec() }
    }

    pub fn is_valid(&self) -> bool {
        self.input_dim >= 1
            && !self.encoder_hidden.is_empty()
            && self.encoder_hidden.iter().all(|&w| w >= 1)
    }

    pub fn decoder_hidden(&self) -> Vec<usize> {
        self.encoder_hidden.iter().rev().copied().collect()
    }

    pub fn latent_dim(&self) -> usize {
        *self.encoder_hidden.last().expect("validated non-empty")
    }

    /// Closed-form total parameter count for the full stack.
    pub fn param_count(&self) -> usize {
        let per_layer = |input: usize, hidden: usize| 4 * (hidden * input + hidden * hidden + hidden);
        let mut total = 0;
        let mut width = self.input_dim;
        for &h in &self.encoder_hidden {
            total += per_layer(width, h);
            width = h;
        }
        let mut width = self.latent_dim();
        for &h in self.decoder_hidden().iter() {
            total += per_layer(width, h);
            width = h;
        }
        total + self.input_dim * width + self.input_dim
    }
}

/// Per-channel z-score statistics frozen from the training set.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalization {
    pub mean: Vec<f64>,
    /// Always > 0 (floored when a channel is constant).
    pub std: Vec<f64>,
}

impl Normalization {
    pub fn identity(dim: usize) -> Normalization {
        Normalization { mean: vec![0.0; dim], std: vec![1.0; dim] }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AutoencoderModel {
    pub topology: Topology,
    pub norm: Normalization,
    pub encoder: Vec<LstmLayerParams>,
    pub decoder: Vec<LstmLayerParams>,
    /// input_dim x last decoder width
    pub proj_w: Vec<f64>,
    pub proj_b: Vec<f64>,
}

impl AutoencoderModel {
    /// Random initialization: every matrix uniform in +-1/sqrt(fan_in),
    /// biases zero except the forget gate at +1.0.
    pub fn init(topology: Topology, rng: &mut impl Rng) -> AutoencoderModel {
        assert!(topology.is_valid(), "topology dims must all be >= 1");
        let init_layer = |input: usize, hidden: usize, rng: &mut dyn rand::RngCore| {
            let mut layer = LstmLayerParams::zeros(input, hidden);
            let wb = 1.0 / (input as f64).sqrt();
            let ub = 1.0 / (hidden as f64).sqrt();
            for w in [&mut layer.w_i, &mut layer.w_f, &mut layer.w_g, &mut layer.w_o] {
                for v in w.iter_mut() {
                    *v = rng.gen_range(-wb..=wb);
                }
            }
            for u in [&mut layer.u_i, &mut layer.u_f, &mut layer.u_g, &mut layer.u_o] {
                for v in u.iter_mut() {
                    *v = rng.gen_range(-ub..=ub);
                }
            }
            for v in layer.b_f.iter_mut() {
                *v = 1.0;
            }
            layer
        };
        let mut encoder = Vec::new();
        let mut width = topology.input_dim;
        for &h in &topology.encoder_hidden {
            encoder.push(init_layer(width, h, rng));
            width = h;
        }
        let mut decoder = Vec::new();
        let mut width = topology.latent_dim();
        for &h in topology.decoder_hidden().iter() {
            decoder.push(init_layer(width, h, rng));
            width = h;
        }
        let pb = 1.0 / (width as f64).sqrt();
        let proj_w = (0..topology.input_dim * width).map(|_| rng.gen_range(-pb..=pb)).collect();
        let proj_b = vec![0.0; topology.input_dim];
        AutoencoderModel {
            norm: Normalization::identity(topology.input_dim),
            topology,
            encoder,
            decoder,
            proj_w,
            proj_b,
        }
    }

    pub fn param_count(&self) -> usize {
        self.encoder
            .iter()
            .chain(self.decoder.iter())
            .map(LstmLayerParams::param_count)
            .sum::<usize>()
            + self.proj_w.len()
            + self.proj_b.len()
    }

    /// Visit every parameter vector in canonical order (encoder layers,
    /// decoder layers, projection weights, projection bias).
    pub fn for_each_param(&self, mut f: impl FnMut(&[f64])) {
        for layer in self.encoder.iter().chain(self.decoder.iter()) {
            for field in layer.fields() {
                f(field);
            }
        }
        f(&self.proj_w);
        f(&self.proj_b);
    }

    pub fn for_each_param_mut(&mut self, mut f: impl FnMut(&mut [f64])) {
        for layer in self.encoder.iter_mut().chain(self.decoder.iter_mut()) {
            for field in layer.fields_mut() {
                f(field);
            }
        }
        f(&mut self.proj_w);
        f(&mut self.proj_b);
    }

    /// All parameters as one flat vector, canonical order.
    pub fn flatten(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.param_count());
        self.for_each_param(|p| flat.extend_from_slice(p));
        flat
    }

    pub fn unflatten(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.param_count());
        let mut at = 0;
        self.for_each_param_mut(|p| {
            p.copy_from_slice(&flat[at..at + p.len()]);
            at += p.len();
        });
    }

    /// Extract and z-score the model's input channels from a window.
    pub fn normalized_features(&self, window: &Window) -> Vec<Vec<f64>> {
        window
            .samples()
            .iter()
            .map(|s| {
                let raw = [s.a_x, s.a_y, s.a_z, s.v];
                raw.iter()
                    .enumerate()
                    .map(|(k, &v)| (v - self.norm.mean[k]) / self.norm.std[k])
                    .collect()
            })
            .collect()
    }

    /// Encode, repeat the latent, decode, project. Input rows must already
    /// be normalized and `input_dim` wide; output has the same shape.
    pub fn forward(&self, features: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, ShapeError> {
        let (recon, _) = self.forward_cached(features)?;
        Ok(recon)
    }

    pub(crate) fn forward_cached(
        &self,
        features: &[Vec<f64>],
    ) -> Result<(Vec<Vec<f64>>, ForwardCache), ShapeError> {
        if features.is_empty() {
            return Err(ShapeError { expected: 1, got: 0 });
        }
        for row in features {
            if row.len() != self.topology.input_dim {
                return Err(ShapeError { expected: self.topology.input_dim, got: row.len() });
            }
        }
        let t_len = features.len();
        let mut cache = ForwardCache {
            enc_inputs: Vec::with_capacity(self.encoder.len()),
            enc_caches: Vec::with_capacity(self.encoder.len()),
            dec_inputs: Vec::with_capacity(self.decoder.len()),
            dec_caches: Vec::with_capacity(self.decoder.len()),
        };
        let mut seq = features.to_vec();
        for layer in &self.encoder {
            let (hs, layer_cache) = layer.forward_cached(&seq);
            cache.enc_inputs.push(seq);
            cache.enc_caches.push(layer_cache);
            seq = hs;
        }
        let latent = seq.last().expect("non-empty sequence").clone();
        let mut seq: Vec<Vec<f64>> = (0..t_len).map(|_| latent.clone()).collect();
        for layer in &self.decoder {
            let (hs, layer_cache) = layer.forward_cached(&seq);
            cache.dec_inputs.push(seq);
            cache.dec_caches.push(layer_cache);
            seq = hs;
        }
        let recon = seq
            .iter()
            .map(|h| {
                let mut y = self.proj_b.clone();
                cell::addmv(&mut y, &self.proj_w, h);
                y
            })
            .collect();
        cache.dec_inputs.push(seq);
        Ok((recon, cache))
    }

    /// Normalize, reconstruct, and return the RMS error for one window.
    pub fn score(&self, window: &Window) -> f64 {
        let features = self.normalized_features(window);
        let recon = self.forward(&features).expect("features match model input_dim");
        reconstruction_error(&features, &recon).expect("shapes match by construction")
    }
}

/// Per-layer activations kept between forward and backward.
pub(crate) struct ForwardCache {
    enc_inputs: Vec<Vec<Vec<f64>>>,
    enc_caches: Vec<LayerCache>,
    dec_inputs: Vec<Vec<Vec<f64>>>,
    dec_caches: Vec<LayerCache>,
}

/// RMS over all timesteps and channels of the difference.
pub fn reconstruction_error(input: &[Vec<f64>], recon: &[Vec<f64>]) -> Result<f64, ShapeError> {
    if input.len() != recon.len() {
        return Err(ShapeError { expected: input.len(), got: recon.len() });
    }
    let mut acc = 0.0;
    let mut count = 0usize;
    for (a, b) in input.iter().zip(recon) {
        if a.len() != b.len() {
            return Err(ShapeError { expected: a.len(), got: b.len() });
        }
        for (x, y) in a.iter().zip(b) {
            let d = x - y;
            acc += d * d;
        }
        count += a.len();
    }
    Ok((acc / count as f64).sqrt())
}

/// Gradients with the same layout as the model parameters.
pub struct ModelGrads {
    pub encoder: Vec<LstmLayerParams>,
    pub decoder: Vec<LstmLayerParams>,
    pub proj_w: Vec<f64>,
    pub proj_b: Vec<f64>,
}

impl ModelGrads {
    pub fn zeros_like(model: &AutoencoderModel) -> ModelGrads {
        ModelGrads {
            encoder: model
                .encoder
                .iter()
                .map(|l| LstmLayerParams::zeros(l.input_dim, l.hidden))
                .collect(),
            decoder: model
                .decoder
                .iter()
                .map(|l| LstmLayerParams::zeros(l.input_dim, l.hidden))
                .collect(),
            proj_w: vec![0.0; model.proj_w.len()],
            proj_b: vec![0.0; model.proj_b.len()],
        }
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut flat = Vec::new();
        for layer in self.encoder.iter().chain(self.decoder.iter()) {
            for field in layer.fields() {
                flat.extend_from_slice(field);
            }
        }
        flat.extend_from_slice(&self.proj_w);
        flat.extend_from_slice(&self.proj_b);
        flat
    }

    fn scale(&mut self, s: f64) {
        for layer in self.encoder.iter_mut().chain(self.decoder.iter_mut()) {
            for field in layer.fields_mut() {
                for v in field.iter_mut() {
                    *v *= s;
                }
            }
        }
        for v in self.proj_w.iter_mut().chain(self.proj_b.iter_mut()) {
            *v *= s;
        }
    }
}

/// Mean-squared reconstruction loss and its full parameter gradient for one
/// window of normalized features.
pub fn backward(model: &AutoencoderModel, features: &[Vec<f64>]) -> (f64, ModelGrads) {
    let (recon, cache) = model.forward_cached(features).expect("caller validated shapes");
    let t_len = features.len();
    let dim = model.topology.input_dim;
    let denom = (t_len * dim) as f64;

    let mut loss = 0.0;
    let mut dys: Vec<Vec<f64>> = Vec::with_capacity(t_len);
    for t in 0..t_len {
        let mut dy = vec![0.0; dim];
        for k in 0..dim {
            let d = recon[t][k] - features[t][k];
            loss += d * d;
            dy[k] = 2.0 * d / denom;
        }
        dys.push(dy);
    }
    loss /= denom;

    let mut grads = ModelGrads::zeros_like(model);

    // projection: y_t = P h_t + b
    let dec_out = cache.dec_inputs.last().expect("pushed in forward");
    let last_width = dec_out[0].len();
    let mut dhs: Vec<Vec<f64>> = vec![vec![0.0; last_width]; t_len];
    for t in 0..t_len {
        for k in 0..dim {
            let dyk = dys[t][k];
            grads.proj_b[k] += dyk;
            let row = &mut grads.proj_w[k * last_width..(k + 1) * last_width];
            let prow = &model.proj_w[k * last_width..(k + 1) * last_width];
            for j in 0..last_width {
                row[j] += dyk * dec_out[t][j];
                dhs[t][j] += dyk * prow[j];
            }
        }
    }

    // decoder stack, deepest first
    for li in (0..model.decoder.len()).rev() {
        let layer = &model.decoder[li];
        let dxs = layer.backward(
            &cache.dec_inputs[li],
            &cache.dec_caches[li],
            &dhs,
            &mut grads.decoder[li],
        );
        dhs = dxs;
    }

    // the decoder consumed the latent at every step; fold those gradients
    // into the encoder's final hidden state at the last timestep only
    let latent_dim = model.topology.latent_dim();
    let mut dz = vec![0.0; latent_dim];
    for step in &dhs {
        for j in 0..latent_dim {
            dz[j] += step[j];
        }
    }
    let mut dhs: Vec<Vec<f64>> = vec![vec![0.0; latent_dim]; t_len];
    dhs[t_len - 1] = dz;

    for li in (0..model.encoder.len()).rev() {
        let layer = &model.encoder[li];
        let dxs = layer.backward(
            &cache.enc_inputs[li],
            &cache.enc_caches[li],
            &dhs,
            &mut grads.encoder[li],
        );
        dhs = dxs;
    }

    (loss, grads)
}

/// Mean loss and mean gradient over a batch of feature windows.
pub fn batch_gradient(model: &AutoencoderModel, batch: &[&[Vec<f64>]]) -> (f64, ModelGrads) {
    assert!(!batch.is_empty());
    let mut total = ModelGrads::zeros_like(model);
    let mut loss = 0.0;
    for features in batch {
        let (l, g) = backward(model, features);
        loss += l;
        accumulate(&mut total, &g);
    }
    let inv = 1.0 / batch.len() as f64;
    total.scale(inv);
    (loss * inv, total)
}

fn accumulate(into: &mut ModelGrads, from: &ModelGrads) {
    let a = into
        .encoder
        .iter_mut()
        .chain(into.decoder.iter_mut());
    let b = from.encoder.iter().chain(from.decoder.iter());
    for (la, lb) in a.zip(b) {
        for (fa, fb) in la.fields_mut().into_iter().zip(lb.fields()) {
            for (x, y) in fa.iter_mut().zip(fb) {
                *x += y;
            }
        }
    }
    for (x, y) in into.proj_w.iter_mut().zip(&from.proj_w) {
        *x += y;
    }
    for (x, y) in into.proj_b.iter_mut().zip(&from.proj_b) {
        *x += y;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::telemetry::{Sample, Window, DT, WINDOW_LEN};
    use alloc::string::ToString;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_features(rng: &mut ChaCha8Rng, t: usize, dim: usize) -> Vec<Vec<f64>> {
        (0..t).map(|_| (0..dim).map(|_| rng.gen_range(-1.5..1.5)).collect()).collect()
    }

    fn tiny_model(seed: u64) -> AutoencoderModel {
        let topo = Topology { input_dim: 2, encoder_hidden: alloc::vec![3] };
        AutoencoderModel::init(topo, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    #[test]
    fn paper_topology_parameter_count() {
        assert_eq!(Topology::paper().param_count(), 262404);
    }

    #[test]
    fn init_matches_closed_form_count_and_forget_bias() {
        let model =
            AutoencoderModel::init(Topology::desk(), &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(model.flatten().len(), Topology::desk().param_count());
        assert_eq!(model.param_count(), Topology::desk().param_count());
        for layer in model.encoder.iter().chain(model.decoder.iter()) {
            for &b in &layer.b_f {
                assert_eq!(b, 1.0);
            }
            let wb = 1.0 / (layer.input_dim as f64).sqrt();
            for &w in &layer.w_i {
                assert!(w.abs() <= wb);
            }
        }
    }

    #[test]
    fn forward_shape_and_determinism() {
        let model = tiny_model(2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let xs = random_features(&mut rng, WINDOW_LEN, 2);
        let a = model.forward(&xs).unwrap();
        let b = model.forward(&xs).unwrap();
        assert_eq!(a.len(), WINDOW_LEN);
        assert_eq!(a[0].len(), 2);
        assert_eq!(a, b);
    }

    #[test]
    fn forward_rejects_bad_width() {
        let model = tiny_model(2);
        let xs = alloc::vec![alloc::vec![0.0; 5]; 4];
        assert!(model.forward(&xs).is_err());
    }

    #[test]
    fn rms_error_examples_and_oracle() {
        let a = alloc::vec![alloc::vec![1.0, 2.0], alloc::vec![3.0, 4.0]];
        assert_eq!(reconstruction_error(&a, &a).unwrap(), 0.0);
        let b: Vec<Vec<f64>> =
            a.iter().map(|r| r.iter().map(|v| v + 2.0).collect()).collect();
        assert_relative_eq!(reconstruction_error(&a, &b).unwrap(), 2.0, epsilon = 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = random_features(&mut rng, 7, 3);
        let y = random_features(&mut rng, 7, 3);
        let mut acc = 0.0;
        let mut n = 0.0;
        for t in 0..7 {
            for k in 0..3 {
                let d = x[t][k] - y[t][k];
                acc += d * d;
                n += 1.0;
            }
        }
        assert_relative_eq!(
            reconstruction_error(&x, &y).unwrap(),
            (acc / n).sqrt(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn gradients_match_finite_differences_on_tiny_model() {
        let model = tiny_model(7);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for trial in 0..2 {
            let xs = random_features(&mut rng, 5, 2);
            let (_, grads) = backward(&model, &xs);
            let analytic = grads.flatten();
            let theta = model.flatten();
            let mut worst = 0.0f64;
            for p in 0..theta.len() {
                let h = 1e-5;
                let mut probe = model.clone();
                let mut plus = theta.clone();
                plus[p] += h;
                probe.unflatten(&plus);
                let (lp, _) = backward(&probe, &xs);
                let mut minus = theta.clone();
                minus[p] -= h;
                probe.unflatten(&minus);
                let (lm, _) = backward(&probe, &xs);
                let fd = (lp - lm) / (2.0 * h);
                let denom = analytic[p].abs().max(fd.abs()).max(1e-6);
                worst = worst.max((analytic[p] - fd).abs() / denom);
            }
            assert!(worst < 1e-4, "trial {}: max relative gradient error {}", trial, worst);
        }
    }

    #[test]
    fn zero_loss_input_is_a_stationary_point() {
        // all-zero parameters reproduce an all-zero input exactly
        let topo = Topology { input_dim: 2, encoder_hidden: alloc::vec![3] };
        let mut model = AutoencoderModel::init(topo, &mut ChaCha8Rng::seed_from_u64(1));
        let zeros = model.flatten().iter().map(|_| 0.0).collect::<Vec<f64>>();
        model.unflatten(&zeros);
        let xs = alloc::vec![alloc::vec![0.0, 0.0]; 6];
        let (loss, grads) = backward(&model, &xs);
        assert_eq!(loss, 0.0);
        let norm: f64 = grads.flatten().iter().map(|g| g * g).sum::<f64>().sqrt();
        assert!(norm < 1e-8);
    }

    #[test]
    fn duplicated_batch_equals_single_gradient() {
        let model = tiny_model(9);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let xs = random_features(&mut rng, 6, 2);
        let (l1, g1) = batch_gradient(&model, &[&xs]);
        let (l2, g2) = batch_gradient(&model, &[&xs, &xs]);
        assert_relative_eq!(l1, l2, epsilon = 1e-15);
        for (a, b) in g1.flatten().iter().zip(g2.flatten()) {
            assert_relative_eq!(*a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn score_is_deterministic_and_order_sensitive() {
        let model = AutoencoderModel::init(
            Topology { input_dim: INPUT_CHANNELS, encoder_hidden: alloc::vec![5] },
            &mut ChaCha8Rng::seed_from_u64(11),
        );
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let samples: Vec<Sample> = (0..WINDOW_LEN)
            .map(|i| Sample {
                t: i as f64 * DT,
                a_x: rng.gen_range(-1.0..1.0),
                a_y: rng.gen_range(-1.0..1.0),
                a_z: 9.8 + rng.gen_range(-1.0..1.0),
                v: rng.gen_range(5.0..20.0),
                theta: None,
            })
            .collect();
        let w = Window::new("m".to_string(), 0, 10000.0, None, samples.clone()).unwrap();
        assert_eq!(model.score(&w), model.score(&w));
        assert!(model.score(&w) >= 0.0);

        let mut shuffled = samples;
        shuffled.swap(0, 20);
        shuffled.swap(5, 25);
        for (i, s) in shuffled.iter_mut().enumerate() {
            s.t = i as f64 * DT;
        }
        let w2 = Window::new("m".to_string(), 0, 10000.0, None, shuffled).unwrap();
        assert!((model.score(&w) - model.score(&w2)).abs() > 1e-12);
    }

    #[test]
    fn flatten_unflatten_roundtrip() {
        let mut model = tiny_model(13);
        let flat = model.flatten();
        let mut copy = tiny_model(14);
        copy.unflatten(&flat);
        assert_eq!(copy.flatten(), flat);
        model.unflatten(&flat);
        assert_eq!(model.flatten(), flat);
    }
}
