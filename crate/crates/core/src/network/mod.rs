//! Deep bidirectional LSTM with a softmax output layer.
//!
//! Each hidden layer runs a forward-time and a backward-time LSTM (with
//! peephole connections) over its input sequence; their per-frame outputs
//! are concatenated and passed through a tanh feedforward before the next
//! layer. The final concatenation maps linearly to K+1 classes, softmaxed
//! per frame. Everything is plain f64 scalar code: training happens at
//! desk scale, and exactness (gradient checks, bit-reproducibility)
//! matters more than throughput here.

mod model_io;
mod train;

pub use model_io::{load_model, save_model};
pub use train::{sgd_step, train, EpochStats, Sample};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::features::{FeatureSequence, OutputLattice};

/// Optimizer and initialization settings.
///
/// `bias_input`, `bias_forget`, and `bias_output` seed the gate biases;
/// the cell-candidate bias starts at zero. Defaults follow the reference
/// training recipe (fixed learning rate 1e-4, momentum 0.9, weights
/// uniform in [-0.1, 0.1], gate biases 1.0 / -1.0 / 2.0).
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    /// Non-bias weights initialize uniformly in [-init_range, init_range].
    pub init_range: f64,
    pub bias_input: f64,
    pub bias_forget: f64,
    pub bias_output: f64,
    pub max_epochs: usize,
    /// Epochs without validation improvement before stopping; 0 trains
    /// exactly one epoch.
    pub patience: usize,
    pub rng_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-4,
            momentum: 0.9,
            init_range: 0.1,
            bias_input: 1.0,
            bias_forget: -1.0,
            bias_output: 2.0,
            max_epochs: 100,
            patience: 5,
            rng_seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::param("train.learning_rate", "must be > 0"));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::param("train.momentum", "must be in [0, 1)"));
        }
        if !(self.init_range > 0.0) {
            return Err(Error::param("train.init_range", "must be > 0"));
        }
        if self.max_epochs < 1 {
            return Err(Error::param("train.max_epochs", "must be >= 1"));
        }
        Ok(())
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Mat {
    rows: usize,
    cols: usize,
    a: Vec<f64>,
}

impl Mat {
    fn zeros(rows: usize, cols: usize) -> Mat {
        Mat { rows, cols, a: vec![0.0; rows * cols] }
    }

    /// out += A x
    fn addmv(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for r in 0..self.rows {
            let row = &self.a[r * self.cols..(r + 1) * self.cols];
            let mut acc = 0.0;
            for (w, v) in row.iter().zip(x) {
                acc += w * v;
            }
            out[r] += acc;
        }
    }

    /// out += A^T x
    fn addmv_t(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        for r in 0..self.rows {
            let row = &self.a[r * self.cols..(r + 1) * self.cols];
            let xv = x[r];
            for (o, w) in out.iter_mut().zip(row) {
                *o += w * xv;
            }
        }
    }

    /// A += u v^T
    fn add_outer(&mut self, u: &[f64], v: &[f64]) {
        debug_assert_eq!(u.len(), self.rows);
        debug_assert_eq!(v.len(), self.cols);
        for r in 0..self.rows {
            let row = &mut self.a[r * self.cols..(r + 1) * self.cols];
            let uv = u[r];
            for (w, x) in row.iter_mut().zip(v) {
                *w += uv * x;
            }
        }
    }
}

/// Gate index order everywhere: input, forget, cell candidate, output.
const GATES: usize = 4;
const GATE_I: usize = 0;
const GATE_F: usize = 1;
const GATE_G: usize = 2;
const GATE_O: usize = 3;
/// Peephole order: input, forget, output (the cell candidate has none).
const PEEPS: usize = 3;

/// One scan direction of one LSTM layer.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct LstmDir {
    w_x: [Mat; GATES],
    w_h: [Mat; GATES],
    bias: [Vec<f64>; GATES],
    peep: [Vec<f64>; PEEPS],
}

impl LstmDir {
    fn zeros(input: usize, hidden: usize) -> LstmDir {
        LstmDir {
            w_x: std::array::from_fn(|_| Mat::zeros(hidden, input)),
            w_h: std::array::from_fn(|_| Mat::zeros(hidden, hidden)),
            bias: std::array::from_fn(|_| vec![0.0; hidden]),
            peep: std::array::from_fn(|_| vec![0.0; hidden]),
        }
    }

    fn hidden(&self) -> usize {
        self.w_x[0].rows
    }
}

/// Both directions of one LSTM layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmLayerParams {
    pub(crate) input_size: usize,
    pub(crate) hidden: usize,
    pub(crate) fwd: LstmDir,
    pub(crate) bwd: LstmDir,
}

/// Interlayer tanh feedforward.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Feedforward {
    w: Mat,
    b: Vec<f64>,
}

/// The full network. `classes` = K+1 output units (labels plus blank).
#[derive(Debug, Clone, PartialEq)]
pub struct DeepBlstm {
    input_size: usize,
    classes: usize,
    layers: Vec<LstmLayerParams>,
    ff: Vec<Feedforward>,
    w_out: Mat,
    b_out: Vec<f64>,
    /// Bumped on every parameter mutation; forward caches record it so a
    /// stale cache cannot silently feed backward.
    version: u64,
}

/// Gradients, shaped exactly like the parameters they differentiate.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub(crate) net: DeepBlstm,
}

impl Gradients {
    pub fn flatten(&self) -> Vec<f64> {
        self.net.flatten()
    }
}

/// Build a network with `hidden` LSTM layer sizes over `input_size`-dim
/// frames and K label classes. Non-bias weights draw uniformly from
/// [-init_range, init_range] in a fixed traversal order, so a seed fully
/// determines the parameters. Interlayer feedforward widths default to
/// the next layer's size.
pub fn init_network(
    input_size: usize,
    hidden: &[usize],
    k: usize,
    cfg: &TrainConfig,
) -> Result<DeepBlstm> {
    cfg.validate()?;
    if input_size < 1 {
        return Err(Error::param("network.input_size", "must be >= 1"));
    }
    if k < 1 {
        return Err(Error::param("network.classes", "need at least one label class"));
    }
    if hidden.is_empty() {
        return Err(Error::param("network.hidden", "need at least one layer"));
    }
    if hidden.iter().any(|&h| h == 0) {
        return Err(Error::param("network.hidden", "zero-sized layer"));
    }
    let mut net = DeepBlstm::zeros(input_size, hidden, k);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let r = cfg.init_range;
    let gate_bias = [cfg.bias_input, cfg.bias_forget, 0.0, cfg.bias_output];
    for layer in &mut net.layers {
        for dir in [&mut layer.fwd, &mut layer.bwd] {
            for g in 0..GATES {
                fill_uniform(&mut dir.w_x[g].a, &mut rng, r);
                fill_uniform(&mut dir.w_h[g].a, &mut rng, r);
                dir.bias[g].fill(gate_bias[g]);
            }
            for p in 0..PEEPS {
                fill_uniform(&mut dir.peep[p], &mut rng, r);
            }
        }
    }
    for ff in &mut net.ff {
        fill_uniform(&mut ff.w.a, &mut rng, r);
    }
    fill_uniform(&mut net.w_out.a, &mut rng, r);
    Ok(net)
}

fn fill_uniform(dst: &mut [f64], rng: &mut ChaCha8Rng, r: f64) {
    for v in dst {
        *v = rng.gen_range(-r..=r);
    }
}

/// Everything forward computed, kept for backpropagation.
#[derive(Debug)]
pub struct ForwardCache {
    version: u64,
    t_len: usize,
    /// Per layer: T frames of that layer's input.
    layer_inputs: Vec<Vec<Vec<f64>>>,
    /// Per layer, per direction (fwd, bwd), indexed by absolute time t.
    dirs: Vec<[DirCache; 2]>,
    /// Per layer: T frames of [h_fwd ; h_bwd].
    combined: Vec<Vec<Vec<f64>>>,
    /// Per interlayer boundary: T frames of tanh output.
    ff_out: Vec<Vec<Vec<f64>>>,
    /// Softmax probabilities, T x classes.
    y: Vec<Vec<f64>>,
}

#[derive(Debug)]
struct DirCache {
    i: Vec<Vec<f64>>,
    f: Vec<Vec<f64>>,
    g: Vec<Vec<f64>>,
    o: Vec<Vec<f64>>,
    c: Vec<Vec<f64>>,
    h: Vec<Vec<f64>>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Smallest probability an output row may carry; keeps saturated softmax
/// rows inside the open interval the lattice requires.
const SOFTMAX_FLOOR: f64 = 1e-12;

impl DeepBlstm {
    fn zeros(input_size: usize, hidden: &[usize], k: usize) -> DeepBlstm {
        let mut layers = Vec::with_capacity(hidden.len());
        let mut in_size = input_size;
        for (n, &h) in hidden.iter().enumerate() {
            layers.push(LstmLayerParams {
                input_size: in_size,
                hidden: h,
                fwd: LstmDir::zeros(in_size, h),
                bwd: LstmDir::zeros(in_size, h),
            });
            if n + 1 < hidden.len() {
                in_size = hidden[n + 1];
            }
        }
        let ff = (0..hidden.len().saturating_sub(1))
            .map(|n| Feedforward {
                w: Mat::zeros(hidden[n + 1], 2 * hidden[n]),
                b: vec![0.0; hidden[n + 1]],
            })
            .collect();
        let last_h = *hidden.last().unwrap();
        DeepBlstm {
            input_size,
            classes: k + 1,
            layers,
            ff,
            w_out: Mat::zeros(k + 1, 2 * last_h),
            b_out: vec![0.0; k + 1],
            version: 0,
        }
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    /// Output units: K labels + blank.
    pub fn classes(&self) -> usize {
        self.classes
    }

    /// Label count K (excludes blank).
    pub fn labels(&self) -> usize {
        self.classes - 1
    }

    pub fn hidden_sizes(&self) -> Vec<usize> {
        self.layers.iter().map(|l| l.hidden).collect()
    }

    /// Total scalar parameters, biases included.
    pub fn count_weights(&self) -> usize {
        let mut n = 0;
        for l in &self.layers {
            for dir in [&l.fwd, &l.bwd] {
                for g in 0..GATES {
                    n += dir.w_x[g].a.len() + dir.w_h[g].a.len() + dir.bias[g].len();
                }
                for p in 0..PEEPS {
                    n += dir.peep[p].len();
                }
            }
        }
        for ff in &self.ff {
            n += ff.w.a.len() + ff.b.len();
        }
        n + self.w_out.a.len() + self.b_out.len()
    }

    /// Canonical parameter order: layers ascending, forward then backward
    /// direction, gates input/forget/cell/output each as (input weights,
    /// recurrent weights, bias), then peepholes input/forget/output; then
    /// feedforwards ascending as (weights, bias); then output weights and
    /// bias. Model files, gradients, and the optimizer all share it.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.count_weights());
        self.visit(|chunk| out.extend_from_slice(chunk));
        out
    }

    pub fn set_from_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.count_weights() {
            return Err(Error::param("network.parameters", "flat length mismatch"));
        }
        let mut pos = 0;
        self.visit_mut(|chunk| {
            chunk.copy_from_slice(&flat[pos..pos + chunk.len()]);
            pos += chunk.len();
        });
        self.version += 1;
        Ok(())
    }

    fn visit(&self, mut f: impl FnMut(&[f64])) {
        for l in &self.layers {
            for dir in [&l.fwd, &l.bwd] {
                for g in 0..GATES {
                    f(&dir.w_x[g].a);
                    f(&dir.w_h[g].a);
                    f(&dir.bias[g]);
                }
                for p in 0..PEEPS {
                    f(&dir.peep[p]);
                }
            }
        }
        for ff in &self.ff {
            f(&ff.w.a);
            f(&ff.b);
        }
        f(&self.w_out.a);
        f(&self.b_out);
    }

    fn visit_mut(&mut self, mut f: impl FnMut(&mut [f64])) {
        for l in &mut self.layers {
            for dir in [&mut l.fwd, &mut l.bwd] {
                for g in 0..GATES {
                    f(&mut dir.w_x[g].a);
                    f(&mut dir.w_h[g].a);
                    f(&mut dir.bias[g]);
                }
                for p in 0..PEEPS {
                    f(&mut dir.peep[p]);
                }
            }
        }
        for ff in &mut self.ff {
            f(&mut ff.w.a);
            f(&mut ff.b);
        }
        f(&mut self.w_out.a);
        f(&mut self.b_out);
    }

    /// Gradient container with this network's shapes, all zeros.
    pub fn zero_gradients(&self) -> Gradients {
        let mut net = DeepBlstm::zeros(
            self.input_size,
            &self.hidden_sizes(),
            self.classes - 1,
        );
        net.version = 0;
        Gradients { net }
    }

    /// Run the network over a feature sequence. Returns per-frame class
    /// probabilities and the activation cache backward needs.
    pub fn forward(&self, x: &FeatureSequence) -> Result<(OutputLattice, ForwardCache)> {
        if x.dim() != self.input_size {
            return Err(Error::FrameLengthMismatch { got: x.dim(), expected: self.input_size });
        }
        let t_len = x.len();
        let mut cache = ForwardCache {
            version: self.version,
            t_len,
            layer_inputs: Vec::with_capacity(self.layers.len()),
            dirs: Vec::with_capacity(self.layers.len()),
            combined: Vec::with_capacity(self.layers.len()),
            ff_out: Vec::with_capacity(self.ff.len()),
            y: Vec::new(),
        };
        let mut input: Vec<Vec<f64>> = x.frames().to_vec();
        for (n, layer) in self.layers.iter().enumerate() {
            let fwd = run_direction(&layer.fwd, &input, true);
            let bwd = run_direction(&layer.bwd, &input, false);
            let h = layer.hidden;
            let combined: Vec<Vec<f64>> = (0..t_len)
                .map(|t| {
                    let mut v = Vec::with_capacity(2 * h);
                    v.extend_from_slice(&fwd.h[t]);
                    v.extend_from_slice(&bwd.h[t]);
                    v
                })
                .collect();
            cache.layer_inputs.push(std::mem::take(&mut input));
            cache.dirs.push([fwd, bwd]);
            if n + 1 < self.layers.len() {
                let ff = &self.ff[n];
                let next: Vec<Vec<f64>> = combined
                    .iter()
                    .map(|c| {
                        let mut z = ff.b.clone();
                        ff.w.addmv(c, &mut z);
                        for v in &mut z {
                            *v = v.tanh();
                        }
                        z
                    })
                    .collect();
                cache.ff_out.push(next.clone());
                input = next;
            }
            cache.combined.push(combined);
        }
        let last_combined = cache.combined.last().unwrap();
        let mut y = Vec::with_capacity(t_len);
        for c in last_combined {
            let mut logits = self.b_out.clone();
            self.w_out.addmv(c, &mut logits);
            let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut row: Vec<f64> = logits.iter().map(|&v| (v - m).exp()).collect();
            let sum: f64 = row.iter().sum();
            for v in &mut row {
                *v /= sum;
            }
            // A confident net can drive exp past the f64 underflow limit,
            // where the losing classes round to 0.0 and the winner to 1.0.
            // The lattice contract keeps every entry inside (0, 1), so the
            // row is floored and renormalized; the shift is O(1e-12) and
            // affects nothing at working precision.
            if row.iter().any(|&v| v < SOFTMAX_FLOOR) {
                for v in &mut row {
                    *v = v.max(SOFTMAX_FLOOR);
                }
                let sum: f64 = row.iter().sum();
                for v in &mut row {
                    *v /= sum;
                }
            }
            y.push(row);
        }
        cache.y = y.clone();
        let lattice = OutputLattice::new(y)?;
        Ok((lattice, cache))
    }

    /// Exact gradients of a scalar loss given its gradient w.r.t. the
    /// pre-softmax logits (one row per frame).
    pub fn backward(&self, cache: &ForwardCache, dlogits: &[Vec<f64>]) -> Result<Gradients> {
        if cache.version != self.version {
            return Err(Error::StaleCache);
        }
        let t_len = cache.t_len;
        if dlogits.len() != t_len || dlogits.iter().any(|r| r.len() != self.classes) {
            return Err(Error::param("network.dlogits", "shape mismatch with cache"));
        }
        let mut grads = self.zero_gradients();
        let gn = &mut grads.net;

        // Output layer.
        let last_combined = &cache.combined[self.layers.len() - 1];
        let last_h = self.layers.last().unwrap().hidden;
        let mut dcombined: Vec<Vec<f64>> = vec![vec![0.0; 2 * last_h]; t_len];
        for t in 0..t_len {
            gn.w_out.add_outer(&dlogits[t], &last_combined[t]);
            for (b, d) in gn.b_out.iter_mut().zip(&dlogits[t]) {
                *b += d;
            }
            self.w_out.addmv_t(&dlogits[t], &mut dcombined[t]);
        }

        for n in (0..self.layers.len()).rev() {
            let layer = &self.layers[n];
            let input = &cache.layer_inputs[n];
            let h = layer.hidden;
            let mut dinput: Vec<Vec<f64>> = vec![vec![0.0; layer.input_size]; t_len];
            for (d, dir_cache) in [(0usize, &cache.dirs[n][0]), (1, &cache.dirs[n][1])] {
                let params = if d == 0 { &layer.fwd } else { &layer.bwd };
                let gdir = if d == 0 { &mut gn.layers[n].fwd } else { &mut gn.layers[n].bwd };
                let dh_out: Vec<&[f64]> =
                    dcombined.iter().map(|v| &v[d * h..(d + 1) * h]).collect();
                backward_direction(
                    params,
                    gdir,
                    input,
                    dir_cache,
                    &dh_out,
                    d == 0,
                    &mut dinput,
                );
            }
            if n > 0 {
                // Through the boundary feedforward into the lower layer.
                let ff = &self.ff[n - 1];
                let gff = &mut gn.ff[n - 1];
                let below = &cache.combined[n - 1];
                let z = &cache.ff_out[n - 1];
                let mut next_dcombined: Vec<Vec<f64>> =
                    vec![vec![0.0; 2 * self.layers[n - 1].hidden]; t_len];
                for t in 0..t_len {
                    let dpre: Vec<f64> = dinput[t]
                        .iter()
                        .zip(&z[t])
                        .map(|(&dz, &zv)| dz * (1.0 - zv * zv))
                        .collect();
                    gff.w.add_outer(&dpre, &below[t]);
                    for (b, v) in gff.b.iter_mut().zip(&dpre) {
                        *b += v;
                    }
                    ff.w.addmv_t(&dpre, &mut next_dcombined[t]);
                }
                dcombined = next_dcombined;
            }
        }
        Ok(grads)
    }
}

/// Scan one direction over the input sequence. Caches are indexed by
/// absolute time regardless of scan direction.
fn run_direction(dir: &LstmDir, input: &[Vec<f64>], forward_time: bool) -> DirCache {
    let t_len = input.len();
    let h = dir.hidden();
    let mut cache = DirCache {
        i: vec![Vec::new(); t_len],
        f: vec![Vec::new(); t_len],
        g: vec![Vec::new(); t_len],
        o: vec![Vec::new(); t_len],
        c: vec![Vec::new(); t_len],
        h: vec![Vec::new(); t_len],
    };
    let zero = vec![0.0; h];
    let order: Vec<usize> = if forward_time {
        (0..t_len).collect()
    } else {
        (0..t_len).rev().collect()
    };
    let mut h_prev = zero.clone();
    let mut c_prev = zero;
    for &t in &order {
        let u = &input[t];
        let mut pre: [Vec<f64>; GATES] =
            std::array::from_fn(|g| dir.bias[g].clone());
        for g in 0..GATES {
            dir.w_x[g].addmv(u, &mut pre[g]);
            dir.w_h[g].addmv(&h_prev, &mut pre[g]);
        }
        for j in 0..h {
            pre[GATE_I][j] += dir.peep[0][j] * c_prev[j];
            pre[GATE_F][j] += dir.peep[1][j] * c_prev[j];
        }
        let gi: Vec<f64> = pre[GATE_I].iter().map(|&v| sigmoid(v)).collect();
        let gf: Vec<f64> = pre[GATE_F].iter().map(|&v| sigmoid(v)).collect();
        let gg: Vec<f64> = pre[GATE_G].iter().map(|&v| v.tanh()).collect();
        let c: Vec<f64> = (0..h).map(|j| gf[j] * c_prev[j] + gi[j] * gg[j]).collect();
        let go: Vec<f64> = (0..h)
            .map(|j| sigmoid(pre[GATE_O][j] + dir.peep[2][j] * c[j]))
            .collect();
        let hv: Vec<f64> = (0..h).map(|j| go[j] * c[j].tanh()).collect();
        h_prev = hv.clone();
        c_prev = c.clone();
        cache.i[t] = gi;
        cache.f[t] = gf;
        cache.g[t] = gg;
        cache.o[t] = go;
        cache.c[t] = c;
        cache.h[t] = hv;
    }
    cache
}

/// BPTT for one direction. `dh_out[t]` is the loss gradient arriving at
/// this direction's hidden output for frame t; `dinput[t]` accumulates the
/// gradient w.r.t. the layer input.
#[allow(clippy::too_many_arguments)]
fn backward_direction(
    dir: &LstmDir,
    gdir: &mut LstmDir,
    input: &[Vec<f64>],
    cache: &DirCache,
    dh_out: &[&[f64]],
    forward_time: bool,
    dinput: &mut [Vec<f64>],
) {
    let t_len = input.len();
    let h = dir.hidden();
    let zero = vec![0.0; h];
    // Scan order of this direction; BPTT walks it reversed.
    let order: Vec<usize> = if forward_time {
        (0..t_len).collect()
    } else {
        (0..t_len).rev().collect()
    };
    let mut dh_rec = vec![0.0; h];
    let mut dc_carry = vec![0.0; h];
    for pos in (0..t_len).rev() {
        let t = order[pos];
        let prev_t = if pos > 0 { Some(order[pos - 1]) } else { None };
        let c_prev = prev_t.map_or(&zero, |p| &cache.c[p]);
        let h_prev = prev_t.map_or(&zero, |p| &cache.h[p]);
        let (gi, gf, gg, go, c) =
            (&cache.i[t], &cache.f[t], &cache.g[t], &cache.o[t], &cache.c[t]);

        let mut da: [Vec<f64>; GATES] = std::array::from_fn(|_| vec![0.0; h]);
        let mut dc = dc_carry;
        for j in 0..h {
            let dh = dh_out[t][j] + dh_rec[j];
            let tc = c[j].tanh();
            let dao = dh * tc * go[j] * (1.0 - go[j]);
            da[GATE_O][j] = dao;
            dc[j] += dh * go[j] * (1.0 - tc * tc) + dir.peep[2][j] * dao;
            da[GATE_I][j] = dc[j] * gg[j] * gi[j] * (1.0 - gi[j]);
            da[GATE_F][j] = dc[j] * c_prev[j] * gf[j] * (1.0 - gf[j]);
            da[GATE_G][j] = dc[j] * gi[j] * (1.0 - gg[j] * gg[j]);
        }

        for g in 0..GATES {
            gdir.w_x[g].add_outer(&da[g], &input[t]);
            gdir.w_h[g].add_outer(&da[g], h_prev);
            for (b, v) in gdir.bias[g].iter_mut().zip(&da[g]) {
                *b += v;
            }
            dir.w_x[g].addmv_t(&da[g], &mut dinput[t]);
        }
        for j in 0..h {
            gdir.peep[0][j] += da[GATE_I][j] * c_prev[j];
            gdir.peep[1][j] += da[GATE_F][j] * c_prev[j];
            gdir.peep[2][j] += da[GATE_O][j] * c[j];
        }

        // Carries toward the scan predecessor.
        dh_rec = vec![0.0; h];
        for g in 0..GATES {
            dir.w_h[g].addmv_t(&da[g], &mut dh_rec);
        }
        dc_carry = (0..h)
            .map(|j| {
                dc[j] * gf[j] + dir.peep[0][j] * da[GATE_I][j] + dir.peep[1][j] * da[GATE_F][j]
            })
            .collect();
    }
}
