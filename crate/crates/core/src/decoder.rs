//! Feed-forward decoder from a probability vector to `(sin, cos)` of the
//! phase estimate.
//!
//! Hidden layers are affine + activation; the output layer is affine only, so
//! the pair `(s, c)` can point anywhere on the circle whatever the
//! activation's range.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Softsign,
    Tanh,
    Arctan,
    Sigmoid,
    Elu,
    SoftsignShift,
    /// Identity map. Not part of the ablation set; handy for checking
    /// backprop against plain matrix calculus.
    Linear,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Odd,
    Asymmetric,
}

impl Activation {
    /// The six nonlinearities compared in the activation ablation.
    pub const ABLATION: [Activation; 6] = [
        Activation::Softsign,
        Activation::Tanh,
        Activation::Arctan,
        Activation::Sigmoid,
        Activation::Elu,
        Activation::SoftsignShift,
    ];

    pub fn parity(self) -> Parity {
        match self {
            Activation::Softsign | Activation::Tanh | Activation::Arctan | Activation::Linear => Parity::Odd,
            Activation::Sigmoid | Activation::Elu | Activation::SoftsignShift => Parity::Asymmetric,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Softsign => "softsign",
            Activation::Tanh => "tanh",
            Activation::Arctan => "arctan",
            Activation::Sigmoid => "sigmoid",
            Activation::Elu => "elu",
            Activation::SoftsignShift => "softsign_shift",
            Activation::Linear => "linear",
        }
    }

    #[inline]
    pub fn apply<T: Real>(self, x: T) -> T {
        match self {
            Activation::Softsign => x / (T::one() + x.abs()),
            Activation::SoftsignShift => x / (T::one() + x.abs()) + T::one(),
            Activation::Tanh => x.tanh(),
            Activation::Arctan => x.atan(),
            Activation::Sigmoid => T::one() / (T::one() + (-x).exp()),
            Activation::Elu => {
                if x > T::zero() {
                    x
                } else {
                    x.exp_m1()
                }
            }
            Activation::Linear => x,
        }
    }

    /// Derivative at pre-activation `x`, given `y = apply(x)`.
    #[inline]
    pub fn derivative<T: Real>(self, x: T, y: T) -> T {
        match self {
            Activation::Softsign | Activation::SoftsignShift => {
                let d = T::one() + x.abs();
                T::one() / (d * d)
            }
            Activation::Tanh => T::one() - y * y,
            Activation::Arctan => T::one() / (T::one() + x * x),
            Activation::Sigmoid => y * (T::one() - y),
            Activation::Elu => {
                if x > T::zero() {
                    T::one()
                } else {
                    y + T::one()
                }
            }
            Activation::Linear => T::one(),
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace(['-', ' '], "_");
        [Activation::Linear].into_iter().chain(Activation::ABLATION).find(|a| a.name() == norm).ok_or_else(|| {
            Error::InvalidLayout(format!("unknown activation `{s}`"))
        })
    }
}

/// `atan2(s, c)` folded into `[-pi, pi)`; `(0, 0)` maps to 0.
pub fn phase_estimate<T: Real>(s: T, c: T) -> T {
    if s == T::zero() && c == T::zero() {
        return T::zero();
    }
    let phi = s.atan2(c);
    if phi >= T::PI() {
        -T::PI()
    } else {
        phi
    }
}

/// Weights and biases of the decoder, stored contiguously.
///
/// Layer `l` maps `layer_sizes[l]` inputs to `layer_sizes[l+1]` outputs and
/// owns a row-major `out x in` weight block followed by `out` biases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Decoder<T> {
    layer_sizes: Vec<usize>,
    activation: Activation,
    params: Vec<T>,
}

/// Cached activations of one forward pass.
#[derive(Clone, Debug)]
pub struct ForwardPass<T> {
    /// `post[0]` is the input; `post[l+1]` the output of layer `l`
    /// (activated for hidden layers, raw for the output layer).
    post: Vec<Vec<T>>,
    pre: Vec<Vec<T>>,
}

impl<T: Real> ForwardPass<T> {
    pub fn output(&self) -> (T, T) {
        let out = self.post.last().expect("at least one layer");
        (out[0], out[1])
    }

    /// Penultimate-layer (last hidden) activations.
    pub fn latent(&self) -> &[T] {
        &self.post[self.post.len() - 2]
    }

    pub fn phase(&self) -> T {
        let (s, c) = self.output();
        phase_estimate(s, c)
    }
}

impl<T: Real> Decoder<T> {
    /// All-zero parameters.
    pub fn zeros(layer_sizes: Vec<usize>, activation: Activation) -> Result<Self> {
        if layer_sizes.len() < 3 {
            return Err(Error::InvalidLayout("need input, at least one hidden layer, and output".into()));
        }
        if *layer_sizes.last().expect("nonempty") != 2 {
            return Err(Error::InvalidLayout("output width must be 2".into()));
        }
        if layer_sizes.contains(&0) {
            return Err(Error::InvalidLayout("zero-width layer".into()));
        }
        let n = layer_sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
        Ok(Self { layer_sizes, activation, params: vec![T::zero(); n] })
    }

    /// Glorot-uniform weights, zero biases.
    pub fn glorot<R: Rng + ?Sized>(layer_sizes: Vec<usize>, activation: Activation, rng: &mut R) -> Result<Self> {
        let mut d = Self::zeros(layer_sizes, activation)?;
        let mut offset = 0;
        for l in 0..d.n_layers() {
            let (fan_in, fan_out) = (d.layer_sizes[l], d.layer_sizes[l + 1]);
            let r = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for w in &mut d.params[offset..offset + fan_in * fan_out] {
                *w = T::lit(rng.random_range(-r..=r));
            }
            offset += fan_in * fan_out + fan_out;
        }
        Ok(d)
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn input_width(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn latent_width(&self) -> usize {
        self.layer_sizes[self.layer_sizes.len() - 2]
    }

    pub fn n_layers(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [T] {
        &mut self.params
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    /// Weight block and bias vector of layer `l`.
    pub fn layer(&self, l: usize) -> (&[T], &[T]) {
        let off = self.offset(l);
        let (i, o) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
        (&self.params[off..off + i * o], &self.params[off + i * o..off + i * o + o])
    }

    pub fn layer_mut(&mut self, l: usize) -> (&mut [T], &mut [T]) {
        let off = self.offset(l);
        let (i, o) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
        let (w, rest) = self.params[off..off + i * o + o].split_at_mut(i * o);
        (w, rest)
    }

    fn offset(&self, l: usize) -> usize {
        self.layer_sizes[..l + 1].windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    pub fn forward(&self, input: &[T]) -> Result<ForwardPass<T>> {
        if input.len() != self.input_width() {
            return Err(Error::DimensionMismatch { expected: self.input_width(), actual: input.len() });
        }
        let n_layers = self.n_layers();
        let mut post = Vec::with_capacity(n_layers + 1);
        let mut pre = Vec::with_capacity(n_layers);
        post.push(input.to_vec());
        let mut off = 0;
        for l in 0..n_layers {
            let (n_in, n_out) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
            let w = &self.params[off..off + n_in * n_out];
            let b = &self.params[off + n_in * n_out..off + n_in * n_out + n_out];
            off += n_in * n_out + n_out;
            let x = &post[l];
            let z: Vec<T> = w
                .chunks_exact(n_in)
                .zip(b)
                .map(|(row, &bias)| row.iter().zip(x).fold(bias, |acc, (&wi, &xi)| acc + wi * xi))
                .collect();
            let a = if l + 1 < n_layers { z.iter().map(|&v| self.activation.apply(v)).collect() } else { z.clone() };
            pre.push(z);
            post.push(a);
        }
        Ok(ForwardPass { post, pre })
    }

    /// Reverse pass for upstream gradient `(d/ds, d/dc)`.
    ///
    /// Adds parameter gradients into `grad_params` (same layout as
    /// [`params`](Self::params)) and returns the gradient on the input.
    pub fn backward_into(&self, pass: &ForwardPass<T>, upstream: (T, T), grad_params: &mut [T]) -> Vec<T> {
        assert_eq!(grad_params.len(), self.params.len());
        let n_layers = self.n_layers();
        let mut delta = vec![upstream.0, upstream.1];
        let mut off_end = self.params.len();
        for l in (0..n_layers).rev() {
            let (n_in, n_out) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
            let off = off_end - (n_in * n_out + n_out);
            off_end = off;
            if l + 1 < n_layers {
                for ((d, &z), &a) in delta.iter_mut().zip(&pass.pre[l]).zip(&pass.post[l + 1]) {
                    *d *= self.activation.derivative(z, a);
                }
            }
            let x = &pass.post[l];
            let (gw, gb) = grad_params[off..off + n_in * n_out + n_out].split_at_mut(n_in * n_out);
            for ((grow, gbias), &d) in gw.chunks_exact_mut(n_in).zip(gb.iter_mut()).zip(&delta) {
                *gbias += d;
                for (g, &xi) in grow.iter_mut().zip(x) {
                    *g += d * xi;
                }
            }
            let w = &self.params[off..off + n_in * n_out];
            let mut next = vec![T::zero(); n_in];
            for (row, &d) in w.chunks_exact(n_in).zip(&delta) {
                for (nx, &wi) in next.iter_mut().zip(row) {
                    *nx += wi * d;
                }
            }
            delta = next;
        }
        delta
    }

    /// Convenience wrapper returning fresh `(grad_params, grad_input)`.
    pub fn backward(&self, pass: &ForwardPass<T>, upstream: (T, T)) -> (Vec<T>, Vec<T>) {
        let mut g = vec![T::zero(); self.params.len()];
        let gi = self.backward_into(pass, upstream, &mut g);
        (g, gi)
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }
}
