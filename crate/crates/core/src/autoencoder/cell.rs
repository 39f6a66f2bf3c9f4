//! LSTM cell: parameterization, stepwise forward, and backpropagation
//! through time for one layer.
//!
//! Standard cell with sigmoid input/forget/output gates and tanh candidate:
//! `c' = f*c + i*g`, `h' = o * tanh(c')`. Matrices are row-major, one row
//! per hidden unit.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
// backs float math in pure no_std builds; shadowed once std is linked
#[allow(unused_imports)]
use num_traits::Float;

/// Per-gate weights for one layer. Gate order everywhere (iteration,
/// serialization, gradient layout) is i, f, g, o.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmLayerParams {
    pub input_dim: usize,
    pub hidden: usize,
    /// hidden x input_dim
    pub w_i: Vec<f64>,
    pub w_f: Vec<f64>,
    pub w_g: Vec<f64>,
    pub w_o: Vec<f64>,
    /// hidden x hidden
    pub u_i: Vec<f64>,
    pub u_f: Vec<f64>,
    pub u_g: Vec<f64>,
    pub u_o: Vec<f64>,
    /// hidden
    pub b_i: Vec<f64>,
    pub b_f: Vec<f64>,
    pub b_g: Vec<f64>,
    pub b_o: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShapeError {
    pub expected: usize,
    pub got: usize,
}

impl fmt::Display for ShapeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "dimension mismatch: expected {}, got {}", self.expected, self.got)
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// out += M v
pub(crate) fn addmv(out: &mut [f64], m: &[f64], v: &[f64]) {
    let cols = v.len();
    for (r, o) in out.iter_mut().enumerate() {
        let row = &m[r * cols..(r + 1) * cols];
        let mut acc = 0.0;
        for c in 0..cols {
            acc += row[c] * v[c];
        }
        *o += acc;
    }
}

/// acc += a (outer) b, where acc is len(a) x len(b)
fn add_outer(acc: &mut [f64], a: &[f64], b: &[f64]) {
    let cols = b.len();
    for (r, &av) in a.iter().enumerate() {
        let row = &mut acc[r * cols..(r + 1) * cols];
        for c in 0..cols {
            row[c] += av * b[c];
        }
    }
}

/// out += M^T a, where M is len(a) x len(out)
fn add_tmv(out: &mut [f64], m: &[f64], a: &[f64]) {
    let cols = out.len();
    for (r, &av) in a.iter().enumerate() {
        let row = &m[r * cols..(r + 1) * cols];
        for c in 0..cols {
            out[c] += av * row[c];
        }
    }
}

impl LstmLayerParams {
    pub fn zeros(input_dim: usize, hidden: usize) -> LstmLayerParams {
        LstmLayerParams {
            input_dim,
            hidden,
            w_i: vec![0.0; hidden * input_dim],
            w_f: vec![0.0; hidden * input_dim],
            w_g: vec![0.0; hidden * input_dim],
            w_o: vec![0.0; hidden * input_dim],
            u_i: vec![0.0; hidden * hidden],
            u_f: vec![0.0; hidden * hidden],
            u_g: vec![0.0; hidden * hidden],
            u_o: vec![0.0; hidden * hidden],
            b_i: vec![0.0; hidden],
            b_f: vec![0.0; hidden],
            b_g: vec![0.0; hidden],
            b_o: vec![0.0; hidden],
        }
    }

    /// Parameter vectors in canonical order: W_i..W_o, U_i..U_o, b_i..b_o.
    pub fn fields(&self) -> [&Vec<f64>; 12] {
        [
            &self.w_i, &self.w_f, &self.w_g, &self.w_o,
            &self.u_i, &self.u_f, &self.u_g, &self.u_o,
            &self.b_i, &self.b_f, &self.b_g, &self.b_o,
        ]
    }

    pub fn fields_mut(&mut self) -> [&mut Vec<f64>; 12] {
        [
            &mut self.w_i, &mut self.w_f, &mut self.w_g, &mut self.w_o,
            &mut self.u_i, &mut self.u_f, &mut self.u_g, &mut self.u_o,
            &mut self.b_i, &mut self.b_f, &mut self.b_g, &mut self.b_o,
        ]
    }

    pub fn param_count(&self) -> usize {
        4 * (self.hidden * self.input_dim + self.hidden * self.hidden + self.hidden)
    }

    fn preactivations(&self, x: &[f64], h: &[f64]) -> [Vec<f64>; 4] {
        let mut a_i = self.b_i.clone();
        let mut a_f = self.b_f.clone();
        let mut a_g = self.b_g.clone();
        let mut a_o = self.b_o.clone();
        addmv(&mut a_i, &self.w_i, x);
        addmv(&mut a_f, &self.w_f, x);
        addmv(&mut a_g, &self.w_g, x);
        addmv(&mut a_o, &self.w_o, x);
        addmv(&mut a_i, &self.u_i, h);
        addmv(&mut a_f, &self.u_f, h);
        addmv(&mut a_g, &self.u_g, h);
        addmv(&mut a_o, &self.u_o, h);
        [a_i, a_f, a_g, a_o]
    }

    /// One cell step. `h` and `c` are updated in place to `h'`, `c'`.
    pub fn step(&self, x: &[f64], h: &mut [f64], c: &mut [f64]) -> Result<(), ShapeError> {
        if x.len() != self.input_dim {
            return Err(ShapeError { expected: self.input_dim, got: x.len() });
        }
        if h.len() != self.hidden || c.len() != self.hidden {
            return Err(ShapeError { expected: self.hidden, got: h.len() });
        }
        let [a_i, a_f, a_g, a_o] = self.preactivations(x, h);
        for j in 0..self.hidden {
            let i = sigmoid(a_i[j]);
            let f = sigmoid(a_f[j]);
            let g = a_g[j].tanh();
            let o = sigmoid(a_o[j]);
            c[j] = f * c[j] + i * g;
            h[j] = o * c[j].tanh();
        }
        Ok(())
    }

    /// Run the layer over a sequence from zero state, caching everything the
    /// backward pass needs. Returns the per-step hidden states.
    pub fn forward_cached(&self, xs: &[Vec<f64>]) -> (Vec<Vec<f64>>, LayerCache) {
        let t_len = xs.len();
        let mut cache = LayerCache {
            gates: Vec::with_capacity(t_len),
            cs: Vec::with_capacity(t_len),
            hs: Vec::with_capacity(t_len),
        };
        let mut h = vec![0.0; self.hidden];
        let mut c = vec![0.0; self.hidden];
        for x in xs {
            debug_assert_eq!(x.len(), self.input_dim);
            let [a_i, a_f, a_g, a_o] = self.preactivations(x, &h);
            let mut step_gates = GateValues {
                i: vec![0.0; self.hidden],
                f: vec![0.0; self.hidden],
                g: vec![0.0; self.hidden],
                o: vec![0.0; self.hidden],
            };
            for j in 0..self.hidden {
                step_gates.i[j] = sigmoid(a_i[j]);
                step_gates.f[j] = sigmoid(a_f[j]);
                step_gates.g[j] = a_g[j].tanh();
                step_gates.o[j] = sigmoid(a_o[j]);
                c[j] = step_gates.f[j] * c[j] + step_gates.i[j] * step_gates.g[j];
                h[j] = step_gates.o[j] * c[j].tanh();
            }
            cache.gates.push(step_gates);
            cache.cs.push(c.clone());
            cache.hs.push(h.clone());
        }
        let hs = cache.hs.clone();
        (hs, cache)
    }

    /// Backpropagate through time.
    ///
    /// `xs` are the forward inputs, `dhs` the per-step loss gradients on the
    /// hidden outputs. Accumulates parameter gradients into `grads` and
    /// returns the per-step gradients on the inputs.
    pub fn backward(
        &self,
        xs: &[Vec<f64>],
        cache: &LayerCache,
        dhs: &[Vec<f64>],
        grads: &mut LstmLayerParams,
    ) -> Vec<Vec<f64>> {
        let t_len = xs.len();
        let mut dxs = vec![vec![0.0; self.input_dim]; t_len];
        let mut dh_next = vec![0.0; self.hidden];
        let mut dc_next = vec![0.0; self.hidden];
        let zeros = vec![0.0; self.hidden];
        for t in (0..t_len).rev() {
            let g = &cache.gates[t];
            let c_t = &cache.cs[t];
            let c_prev = if t == 0 { &zeros } else { &cache.cs[t - 1] };
            let h_prev = if t == 0 { &zeros } else { &cache.hs[t - 1] };
            let mut da_i = vec![0.0; self.hidden];
            let mut da_f = vec![0.0; self.hidden];
            let mut da_g = vec![0.0; self.hidden];
            let mut da_o = vec![0.0; self.hidden];
            for j in 0..self.hidden {
                let dh = dhs[t][j] + dh_next[j];
                let tc = c_t[j].tanh();
                let dc = dh * g.o[j] * (1.0 - tc * tc) + dc_next[j];
                let d_o = dh * tc;
                da_o[j] = d_o * g.o[j] * (1.0 - g.o[j]);
                da_i[j] = dc * g.g[j] * g.i[j] * (1.0 - g.i[j]);
                da_f[j] = dc * c_prev[j] * g.f[j] * (1.0 - g.f[j]);
                da_g[j] = dc * g.i[j] * (1.0 - g.g[j] * g.g[j]);
                dc_next[j] = dc * g.f[j];
            }
            add_outer(&mut grads.w_i, &da_i, &xs[t]);
            add_outer(&mut grads.w_f, &da_f, &xs[t]);
            add_outer(&mut grads.w_g, &da_g, &xs[t]);
            add_outer(&mut grads.w_o, &da_o, &xs[t]);
            add_outer(&mut grads.u_i, &da_i, h_prev);
            add_outer(&mut grads.u_f, &da_f, h_prev);
            add_outer(&mut grads.u_g, &da_g, h_prev);
            add_outer(&mut grads.u_o, &da_o, h_prev);
            for j in 0..self.hidden {
                grads.b_i[j] += da_i[j];
                grads.b_f[j] += da_f[j];
                grads.b_g[j] += da_g[j];
                grads.b_o[j] += da_o[j];
            }
            add_tmv(&mut dxs[t], &self.w_i, &da_i);
            add_tmv(&mut dxs[t], &self.w_f, &da_f);
            add_tmv(&mut dxs[t], &self.w_g, &da_g);
            add_tmv(&mut dxs[t], &self.w_o, &da_o);
            for v in dh_next.iter_mut() {
                *v = 0.0;
            }
            add_tmv(&mut dh_next, &self.u_i, &da_i);
            add_tmv(&mut dh_next, &self.u_f, &da_f);
            add_tmv(&mut dh_next, &self.u_g, &da_g);
            add_tmv(&mut dh_next, &self.u_o, &da_o);
        }
        dxs
    }
}

/// Post-activation gate values for one step.
#[derive(Debug, Clone)]
pub struct GateValues {
    pub i: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub o: Vec<f64>,
}

/// Everything the backward pass needs from one layer's forward run.
#[derive(Debug, Clone)]
pub struct LayerCache {
    pub gates: Vec<GateValues>,
    pub cs: Vec<Vec<f64>>,
    pub hs: Vec<Vec<f64>>,
}
