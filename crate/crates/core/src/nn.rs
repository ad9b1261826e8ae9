//! Minimal dense-network machinery: forward pass, exact backpropagation,
//! adaptive-moment optimizer, and target-network soft updates.
//!
//! Hidden layers are rectified-linear; the output layer is tanh for actors
//! and linear for critics. Gradients are computed analytically and are
//! validated against central finite differences in the test suite, so no
//! autodiff dependency is involved.

use rand::Rng;
use std::fmt;
use std::io::{Read, Write};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputActivation {
    Linear,
    Tanh,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseNetwork {
    sizes: Vec<usize>,
    /// weights[l] is row-major `sizes[l+1] x sizes[l]`.
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
    output_activation: OutputActivation,
}

/// Per-parameter gradient (or moment) storage shaped like a network.
#[derive(Debug, Clone, PartialEq)]
pub struct Grads {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

#[derive(Debug)]
pub enum NnError {
    ShapeMismatch { expected: usize, got: usize },
    NonFiniteLoss { detail: String },
    Checkpoint(String),
    Io(std::io::Error),
}

impl fmt::Display for NnError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NnError::ShapeMismatch { expected, got } => {
                write!(f, "shape mismatch: expected {expected}, got {got}")
            }
            NnError::NonFiniteLoss { detail } => write!(f, "non-finite loss: {detail}"),
            NnError::Checkpoint(m) => write!(f, "checkpoint: {m}"),
            NnError::Io(e) => write!(f, "checkpoint io: {e}"),
        }
    }
}

impl std::error::Error for NnError {}

/// Cached activations from a forward pass, consumed by [`DenseNetwork::backward`].
pub struct ForwardTrace {
    /// activations[0] is the input; activations[L] the output.
    pub activations: Vec<Vec<f64>>,
}

impl DenseNetwork {
    /// Fan-in scaled uniform initialization for all layers except the last,
    /// which starts near zero (uniform in ±3e-3).
    pub fn new(
        sizes: &[usize],
        output_activation: OutputActivation,
        rng: &mut impl Rng,
    ) -> Self {
        assert!(sizes.len() >= 2, "network needs at least input and output sizes");
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for l in 0..sizes.len() - 1 {
            let (fan_in, fan_out) = (sizes[l], sizes[l + 1]);
            let bound = if l == sizes.len() - 2 { 3e-3 } else { 1.0 / (fan_in as f64).sqrt() };
            weights.push((0..fan_in * fan_out).map(|_| rng.gen_range(-bound..=bound)).collect());
            biases.push((0..fan_out).map(|_| rng.gen_range(-bound..=bound)).collect());
        }
        Self { sizes: sizes.to_vec(), weights, biases, output_activation }
    }

    /// All-zero parameters (used in tests and as a checkpoint shell).
    pub fn zeros(sizes: &[usize], output_activation: OutputActivation) -> Self {
        let weights =
            (0..sizes.len() - 1).map(|l| vec![0.0; sizes[l] * sizes[l + 1]]).collect();
        let biases = (0..sizes.len() - 1).map(|l| vec![0.0; sizes[l + 1]]).collect();
        Self { sizes: sizes.to_vec(), weights, biases, output_activation }
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_len(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_len(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn output_activation(&self) -> OutputActivation {
        self.output_activation
    }

    pub fn parameter_count(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>()
            + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[Vec<f64>] {
        &self.biases
    }

    /// Mutable view of one layer's weight matrix (row-major), for probing
    /// parameters in tests and tools.
    pub fn weights_mut(&mut self, layer: usize) -> &mut [f64] {
        &mut self.weights[layer]
    }

    pub fn biases_mut(&mut self, layer: usize) -> &mut [f64] {
        &mut self.biases[layer]
    }

    pub fn set_weight(&mut self, layer: usize, row: usize, col: usize, value: f64) {
        let cols = self.sizes[layer];
        self.weights[layer][row * cols + col] = value;
    }

    pub fn set_bias(&mut self, layer: usize, row: usize, value: f64) {
        self.biases[layer][row] = value;
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>, NnError> {
        if input.len() != self.input_len() {
            return Err(NnError::ShapeMismatch { expected: self.input_len(), got: input.len() });
        }
        let mut a = input.to_vec();
        for l in 0..self.weights.len() {
            a = self.layer_forward(l, &a, l == self.weights.len() - 1);
        }
        Ok(a)
    }

    /// Forward pass that keeps every layer activation for backpropagation.
    pub fn forward_trace(&self, input: &[f64]) -> Result<ForwardTrace, NnError> {
        if input.len() != self.input_len() {
            return Err(NnError::ShapeMismatch { expected: self.input_len(), got: input.len() });
        }
        let mut activations = Vec::with_capacity(self.weights.len() + 1);
        activations.push(input.to_vec());
        for l in 0..self.weights.len() {
            let next =
                self.layer_forward(l, activations.last().unwrap(), l == self.weights.len() - 1);
            activations.push(next);
        }
        Ok(ForwardTrace { activations })
    }

    fn layer_forward(&self, l: usize, input: &[f64], is_output: bool) -> Vec<f64> {
        let (rows, cols) = (self.sizes[l + 1], self.sizes[l]);
        let w = &self.weights[l];
        let mut out = self.biases[l].clone();
        for r in 0..rows {
            let row = &w[r * cols..(r + 1) * cols];
            let mut acc = 0.0;
            for (wi, xi) in row.iter().zip(input) {
                acc += wi * xi;
            }
            out[r] += acc;
        }
        if is_output {
            if self.output_activation == OutputActivation::Tanh {
                for x in &mut out {
                    *x = x.tanh();
                }
            }
        } else {
            for x in &mut out {
                *x = x.max(0.0);
            }
        }
        out
    }

    /// Backpropagates `dloss_dout` (gradient of the loss w.r.t. the network
    /// output) through the trace, accumulating parameter gradients into
    /// `grads` and returning the gradient w.r.t. the input.
    pub fn backward(&self, trace: &ForwardTrace, dloss_dout: &[f64], grads: &mut Grads) -> Vec<f64> {
        let layers = self.weights.len();
        // delta at the output layer
        let out = &trace.activations[layers];
        let mut delta: Vec<f64> = match self.output_activation {
            OutputActivation::Linear => dloss_dout.to_vec(),
            OutputActivation::Tanh => {
                dloss_dout.iter().zip(out).map(|(g, a)| g * (1.0 - a * a)).collect()
            }
        };
        for l in (0..layers).rev() {
            let (rows, cols) = (self.sizes[l + 1], self.sizes[l]);
            let input = &trace.activations[l];
            for r in 0..rows {
                let d = delta[r];
                grads.biases[l][r] += d;
                let grow = &mut grads.weights[l][r * cols..(r + 1) * cols];
                for (g, xi) in grow.iter_mut().zip(input) {
                    *g += d * xi;
                }
            }
            // gradient w.r.t. this layer's input
            let w = &self.weights[l];
            let mut prev = vec![0.0; cols];
            for r in 0..rows {
                let d = delta[r];
                let row = &w[r * cols..(r + 1) * cols];
                for (p, wi) in prev.iter_mut().zip(row) {
                    *p += d * wi;
                }
            }
            if l > 0 {
                // chain through the hidden ReLU of layer l-1's output
                for (p, a) in prev.iter_mut().zip(&trace.activations[l]) {
                    if *a <= 0.0 {
                        *p = 0.0;
                    }
                }
            }
            delta = prev;
        }
        delta
    }

    /// θ_target ← τ·θ_online + (1 − τ)·θ_target, element-wise.
    pub fn soft_update_from(&mut self, online: &DenseNetwork, tau: f64) -> Result<(), NnError> {
        if self.sizes != online.sizes {
            return Err(NnError::ShapeMismatch {
                expected: online.parameter_count(),
                got: self.parameter_count(),
            });
        }
        for (tw, ow) in self.weights.iter_mut().zip(&online.weights) {
            for (t, o) in tw.iter_mut().zip(ow) {
                *t = tau * o + (1.0 - tau) * *t;
            }
        }
        for (tb, ob) in self.biases.iter_mut().zip(&online.biases) {
            for (t, o) in tb.iter_mut().zip(ob) {
                *t = tau * o + (1.0 - tau) * *t;
            }
        }
        Ok(())
    }

    /// Largest absolute parameter difference between two same-shaped networks.
    pub fn max_param_distance(&self, other: &DenseNetwork) -> f64 {
        let mut d = 0.0f64;
        for (a, b) in self.weights.iter().zip(&other.weights) {
            for (x, y) in a.iter().zip(b) {
                d = d.max((x - y).abs());
            }
        }
        for (a, b) in self.biases.iter().zip(&other.biases) {
            for (x, y) in a.iter().zip(b) {
                d = d.max((x - y).abs());
            }
        }
        d
    }

    /// Sum of squared weight entries (biases excluded), the L2 term.
    pub fn weight_squared_norm(&self) -> f64 {
        self.weights.iter().flat_map(|w| w.iter()).map(|w| w * w).sum()
    }

    // --- checkpoint format -------------------------------------------------
    // magic "EMSNET1\0", u32 layer-size count, u32 sizes, u8 activation tag,
    // weights then biases layer by layer as little-endian f64 bits.

    const MAGIC: &'static [u8; 8] = b"EMSNET1\0";

    pub fn write_to(&self, w: &mut impl Write) -> Result<(), NnError> {
        w.write_all(Self::MAGIC).map_err(NnError::Io)?;
        w.write_all(&(self.sizes.len() as u32).to_le_bytes()).map_err(NnError::Io)?;
        for s in &self.sizes {
            w.write_all(&(*s as u32).to_le_bytes()).map_err(NnError::Io)?;
        }
        let tag: u8 = match self.output_activation {
            OutputActivation::Linear => 0,
            OutputActivation::Tanh => 1,
        };
        w.write_all(&[tag]).map_err(NnError::Io)?;
        for layer in self.weights.iter().chain(self.biases.iter()) {
            for v in layer {
                w.write_all(&v.to_bits().to_le_bytes()).map_err(NnError::Io)?;
            }
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self, NnError> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(NnError::Io)?;
        if &magic != Self::MAGIC {
            return Err(NnError::Checkpoint("bad magic".into()));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4).map_err(NnError::Io)?;
        let n = u32::from_le_bytes(b4) as usize;
        if !(2..=64).contains(&n) {
            return Err(NnError::Checkpoint(format!("implausible layer count {n}")));
        }
        let mut sizes = Vec::with_capacity(n);
        for _ in 0..n {
            r.read_exact(&mut b4).map_err(NnError::Io)?;
            sizes.push(u32::from_le_bytes(b4) as usize);
        }
        if sizes.iter().any(|&s| s == 0 || s > 1 << 20) {
            return Err(NnError::Checkpoint("implausible layer size".into()));
        }
        let mut tag = [0u8; 1];
        r.read_exact(&mut tag).map_err(NnError::Io)?;
        let output_activation = match tag[0] {
            0 => OutputActivation::Linear,
            1 => OutputActivation::Tanh,
            t => return Err(NnError::Checkpoint(format!("unknown activation tag {t}"))),
        };
        let mut net = Self::zeros(&sizes, output_activation);
        let mut b8 = [0u8; 8];
        for layer in net.weights.iter_mut().chain(net.biases.iter_mut()) {
            for v in layer.iter_mut() {
                r.read_exact(&mut b8).map_err(NnError::Io)?;
                *v = f64::from_bits(u64::from_le_bytes(b8));
            }
        }
        Ok(net)
    }
}

impl Grads {
    pub fn zeros_like(net: &DenseNetwork) -> Self {
        Self {
            weights: net.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: net.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    fn scale(&mut self, s: f64) {
        for w in &mut self.weights {
            for x in w {
                *x *= s;
            }
        }
        for b in &mut self.biases {
            for x in b {
                *x *= s;
            }
        }
    }

    fn is_finite(&self) -> bool {
        self.weights.iter().chain(self.biases.iter()).all(|v| v.iter().all(|x| x.is_finite()))
    }
}

/// Batch losses whose gradients the trainer needs.
pub enum LossSpec<'a> {
    /// Mean squared error of the (scalar-output) network against targets,
    /// plus `l2`·Σw² over the network's weight matrices.
    CriticTd { inputs: &'a [Vec<f64>], targets: &'a [f64], l2: f64 },
    /// −mean critic(state, actor(state)) plus `l2`·Σw² over the *actor*
    /// weights; gradients are taken w.r.t. the actor parameters with the
    /// critic held fixed.
    ActorObjective { critic: &'a DenseNetwork, states: &'a [Vec<f64>], l2: f64 },
}

/// The scalar loss a [`LossSpec`] describes, used for diagnostics and as the
/// quantity the finite-difference oracle differentiates.
pub fn evaluate_loss(net: &DenseNetwork, spec: &LossSpec<'_>) -> Result<f64, NnError> {
    match spec {
        LossSpec::CriticTd { inputs, targets, l2 } => {
            let n = inputs.len();
            if n == 0 || n != targets.len() {
                return Err(NnError::ShapeMismatch { expected: n, got: targets.len() });
            }
            let mut acc = 0.0;
            for (x, y) in inputs.iter().zip(*targets) {
                let q = net.forward(x)?[0];
                acc += (q - y) * (q - y);
            }
            Ok(acc / n as f64 + l2 * net.weight_squared_norm())
        }
        LossSpec::ActorObjective { critic, states, l2 } => {
            let n = states.len();
            if n == 0 {
                return Err(NnError::ShapeMismatch { expected: 1, got: 0 });
            }
            let mut acc = 0.0;
            for s in *states {
                let a = net.forward(s)?;
                let mut joint = s.clone();
                joint.extend_from_slice(&a);
                acc += critic.forward(&joint)?[0];
            }
            Ok(-acc / n as f64 + l2 * net.weight_squared_norm())
        }
    }
}

/// Exact gradients of the mean loss over the batch. Returns the gradients and
/// the loss value.
pub fn gradients(net: &DenseNetwork, spec: &LossSpec<'_>) -> Result<(Grads, f64), NnError> {
    let mut grads = Grads::zeros_like(net);
    let loss = match spec {
        LossSpec::CriticTd { inputs, targets, l2 } => {
            let n = inputs.len();
            if n == 0 || n != targets.len() {
                return Err(NnError::ShapeMismatch { expected: n, got: targets.len() });
            }
            let mut acc = 0.0;
            for (x, y) in inputs.iter().zip(*targets) {
                let trace = net.forward_trace(x)?;
                let q = trace.activations.last().unwrap()[0];
                acc += (q - y) * (q - y);
                net.backward(&trace, &[2.0 * (q - y)], &mut grads);
            }
            grads.scale(1.0 / n as f64);
            add_l2(&mut grads, net, *l2);
            acc / n as f64 + l2 * net.weight_squared_norm()
        }
        LossSpec::ActorObjective { critic, states, l2 } => {
            let n = states.len();
            if n == 0 {
                return Err(NnError::ShapeMismatch { expected: 1, got: 0 });
            }
            let state_dim = net.input_len();
            let mut acc = 0.0;
            let mut critic_scratch = Grads::zeros_like(critic);
            for s in *states {
                let actor_trace = net.forward_trace(s)?;
                let action = actor_trace.activations.last().unwrap().clone();
                let mut joint = s.clone();
                joint.extend_from_slice(&action);
                let critic_trace = critic.forward_trace(&joint)?;
                let q = critic_trace.activations.last().unwrap()[0];
                acc += q;
                // d(-Q)/d(critic input), action slice only
                let djoint = critic.backward(&critic_trace, &[-1.0], &mut critic_scratch);
                net.backward(&actor_trace, &djoint[state_dim..], &mut grads);
            }
            grads.scale(1.0 / n as f64);
            add_l2(&mut grads, net, *l2);
            -acc / n as f64 + l2 * net.weight_squared_norm()
        }
    };
    if !loss.is_finite() || !grads.is_finite() {
        return Err(NnError::NonFiniteLoss { detail: format!("loss = {loss}") });
    }
    Ok((grads, loss))
}

fn add_l2(grads: &mut Grads, net: &DenseNetwork, l2: f64) {
    if l2 == 0.0 {
        return;
    }
    for (g, w) in grads.weights.iter_mut().zip(&net.weights) {
        for (gi, wi) in g.iter_mut().zip(w) {
            *gi += 2.0 * l2 * wi;
        }
    }
}

/// Adaptive-moment optimizer state (first/second moments, step count,
/// learning rate, and an optional weight-decay coefficient applied within the
/// gradient).
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub step: u64,
    m: Grads,
    v: Grads,
}

impl AdamState {
    pub fn new(learning_rate: f64, weight_decay: f64, net: &DenseNetwork) -> Self {
        Self {
            learning_rate,
            weight_decay,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step: 0,
            m: Grads::zeros_like(net),
            v: Grads::zeros_like(net),
        }
    }

    pub fn moments(&self) -> (&Grads, &Grads) {
        (&self.m, &self.v)
    }

    pub fn moments_mut(&mut self) -> (&mut Grads, &mut Grads) {
        (&mut self.m, &mut self.v)
    }
}

/// One bias-corrected adaptive-moment update. Weight decay, when configured,
/// is added to the weight gradients (not the bias gradients) before the
/// moment updates.
pub fn apply_update(net: &mut DenseNetwork, opt: &mut AdamState, grads: &Grads) {
    opt.step += 1;
    let t = opt.step as i32;
    let bc1 = 1.0 - opt.beta1.powi(t);
    let bc2 = 1.0 - opt.beta2.powi(t);
    let (lr, b1, b2, eps, decay) =
        (opt.learning_rate, opt.beta1, opt.beta2, opt.epsilon, opt.weight_decay);
    for l in 0..net.weights.len() {
        for i in 0..net.weights[l].len() {
            let g = grads.weights[l][i] + decay * net.weights[l][i];
            let m = &mut opt.m.weights[l][i];
            let v = &mut opt.v.weights[l][i];
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            let mh = *m / bc1;
            let vh = *v / bc2;
            net.weights[l][i] -= lr * mh / (vh.sqrt() + eps);
        }
    }
    for l in 0..net.biases.len() {
        for i in 0..net.biases[l].len() {
            let g = grads.biases[l][i];
            let m = &mut opt.m.biases[l][i];
            let v = &mut opt.v.biases[l][i];
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            let mh = *m / bc1;
            let vh = *v / bc2;
            net.biases[l][i] -= lr * mh / (vh.sqrt() + eps);
        }
    }
}
