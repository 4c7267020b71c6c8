//! Fully connected logistic multilayer perceptron with per-node thresholds.
//!
//! Every hidden and output node owns an exclusive bias unit whose activation
//! is fixed at 1. The network keeps two activation snapshots: the result of
//! the latest forward pass (`current`) and the one before it (`previous`).
//! Learning rules operate on an explicit snapshot so that a weight update can
//! target state `t` after the network has already looked at state `t+1`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const DEFAULT_THRESHOLD: f64 = 0.5;
pub const DEFAULT_INIT_HALF_WIDTH: f64 = 2.0;

/// Logistic squashing function.
#[inline]
pub fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// A node is mature once its activation leaves the (0.1, 0.9) band.
#[inline]
pub fn is_mature(activation: f64) -> bool {
    !(0.1..=0.9).contains(&activation)
}

/// Elementwise strict threshold test: `a_u > θ_u`.
pub fn thresholded_fire(activations: &[f64], thresholds: &[f64]) -> Result<Vec<bool>> {
    if activations.len() != thresholds.len() {
        return Err(Error::shape(
            "thresholded_fire thresholds",
            activations.len(),
            thresholds.len(),
        ));
    }
    Ok(activations
        .iter()
        .zip(thresholds)
        .map(|(a, theta)| a > theta)
        .collect())
}

/// Dense row-major matrix. Row `u` holds the incoming weights of postsynaptic node `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::shape("matrix data", rows * cols, data.len()));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.cols + col] = value;
    }

    #[inline]
    pub fn add(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.cols + col] += value;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn row_mut(&mut self, row: usize) -> &mut [f64] {
        &mut self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Column `col`, i.e. the outgoing weights of presynaptic node `col`.
    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }
}

/// Activations of every layer (input layer included) for one presentation.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationSnapshot {
    /// Forward-pass counter of the owning network when this snapshot was taken.
    pub step: u64,
    /// `layers[0]` is the input pattern that produced the rest.
    pub layers: Vec<Vec<f64>>,
}

impl ActivationSnapshot {
    pub fn zeros(layer_sizes: &[usize]) -> Self {
        ActivationSnapshot {
            step: 0,
            layers: layer_sizes.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    pub fn input(&self) -> &[f64] {
        &self.layers[0]
    }

    pub fn output(&self) -> &[f64] {
        self.layers.last().expect("snapshot has at least two layers")
    }

    pub(crate) fn check_shape(&self, layer_sizes: &[usize]) -> Result<()> {
        if self.layers.len() != layer_sizes.len() {
            return Err(Error::shape(
                "snapshot layer count",
                layer_sizes.len(),
                self.layers.len(),
            ));
        }
        for (l, (acts, &n)) in self.layers.iter().zip(layer_sizes).enumerate() {
            if acts.len() != n {
                return Err(Error::shape(format!("snapshot layer {l}"), n, acts.len()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    layer_sizes: Vec<usize>,
    /// `weights[l]` connects layer `l` to layer `l + 1`.
    weights: Vec<Matrix>,
    /// `biases[l]` holds the bias weights of the nodes in layer `l + 1`.
    biases: Vec<Vec<f64>>,
    /// One threshold per node, input layer included.
    thresholds: Vec<Vec<f64>>,
    previous: ActivationSnapshot,
    current: ActivationSnapshot,
    steps: u64,
}

fn validate_sizes(layer_sizes: &[usize]) -> Result<()> {
    if layer_sizes.len() < 2 {
        return Err(Error::Config(format!(
            "a network needs at least 2 layers, got {}",
            layer_sizes.len()
        )));
    }
    if let Some(l) = layer_sizes.iter().position(|&n| n == 0) {
        return Err(Error::Config(format!("layer {l} has zero nodes")));
    }
    Ok(())
}

/// Build a network with weights and biases drawn i.i.d. from
/// `U[-init_half_width, +init_half_width]` using a generator seeded by `seed`.
pub fn init_network(layer_sizes: &[usize], init_half_width: f64, seed: u64) -> Result<Network> {
    validate_sizes(layer_sizes)?;
    if !(init_half_width.is_finite() && init_half_width > 0.0) {
        return Err(Error::Config(format!(
            "init half-width must be positive, got {init_half_width}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights = Vec::with_capacity(layer_sizes.len() - 1);
    let mut biases = Vec::with_capacity(layer_sizes.len() - 1);
    for pair in layer_sizes.windows(2) {
        let (fan_in, fan_out) = (pair[0], pair[1]);
        let data = (0..fan_in * fan_out)
            .map(|_| rng.gen_range(-init_half_width..=init_half_width))
            .collect();
        weights.push(Matrix::from_vec(fan_out, fan_in, data)?);
        biases.push(
            (0..fan_out)
                .map(|_| rng.gen_range(-init_half_width..=init_half_width))
                .collect(),
        );
    }
    Network::from_parts(layer_sizes.to_vec(), weights, biases, None)
}

impl Network {
    /// Assemble a network from explicit parameters. Thresholds default to 0.5.
    pub fn from_parts(
        layer_sizes: Vec<usize>,
        weights: Vec<Matrix>,
        biases: Vec<Vec<f64>>,
        thresholds: Option<Vec<Vec<f64>>>,
    ) -> Result<Network> {
        validate_sizes(&layer_sizes)?;
        let transitions = layer_sizes.len() - 1;
        if weights.len() != transitions {
            return Err(Error::shape("weight matrix count", transitions, weights.len()));
        }
        if biases.len() != transitions {
            return Err(Error::shape("bias vector count", transitions, biases.len()));
        }
        for l in 0..transitions {
            let (fan_in, fan_out) = (layer_sizes[l], layer_sizes[l + 1]);
            let w = &weights[l];
            if w.rows() != fan_out || w.cols() != fan_in {
                return Err(Error::shape(
                    format!("weights into layer {}", l + 1),
                    fan_in * fan_out,
                    w.rows() * w.cols(),
                ));
            }
            if biases[l].len() != fan_out {
                return Err(Error::shape(
                    format!("biases of layer {}", l + 1),
                    fan_out,
                    biases[l].len(),
                ));
            }
        }
        let thresholds = match thresholds {
            Some(t) => {
                if t.len() != layer_sizes.len() {
                    return Err(Error::shape("threshold layer count", layer_sizes.len(), t.len()));
                }
                for (l, (row, &n)) in t.iter().zip(&layer_sizes).enumerate() {
                    if row.len() != n {
                        return Err(Error::shape(format!("thresholds of layer {l}"), n, row.len()));
                    }
                }
                t
            }
            None => layer_sizes
                .iter()
                .map(|&n| vec![DEFAULT_THRESHOLD; n])
                .collect(),
        };
        Ok(Network {
            previous: ActivationSnapshot::zeros(&layer_sizes),
            current: ActivationSnapshot::zeros(&layer_sizes),
            layer_sizes,
            weights,
            biases,
            thresholds,
            steps: 0,
        })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn input_size(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_size(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn layer_count(&self) -> usize {
        self.layer_sizes.len()
    }

    pub fn weights(&self) -> &[Matrix] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [Matrix] {
        &mut self.weights
    }

    pub fn biases(&self) -> &[Vec<f64>] {
        &self.biases
    }

    pub fn biases_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.biases
    }

    pub fn thresholds(&self) -> &[Vec<f64>] {
        &self.thresholds
    }

    pub fn thresholds_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.thresholds
    }

    pub fn output_thresholds(&self) -> &[f64] {
        self.thresholds.last().unwrap()
    }

    /// Activations stored by the forward pass before the latest one (state `t`).
    pub fn previous(&self) -> &ActivationSnapshot {
        &self.previous
    }

    /// Activations from the latest forward pass (state `t+1`).
    pub fn current(&self) -> &ActivationSnapshot {
        &self.current
    }

    /// Number of forward passes performed through [`Network::forward`].
    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Total number of trainable parameters (connections plus bias weights).
    pub fn parameter_count(&self) -> usize {
        self.connection_count() + self.bias_count()
    }

    pub fn connection_count(&self) -> usize {
        self.layer_sizes.windows(2).map(|p| p[0] * p[1]).sum()
    }

    pub fn bias_count(&self) -> usize {
        self.layer_sizes[1..].iter().sum()
    }

    /// Forward pass without touching the stored snapshots.
    pub fn evaluate(&self, input: &[f64]) -> Result<Vec<Vec<f64>>> {
        if input.len() != self.input_size() {
            return Err(Error::shape("input pattern", self.input_size(), input.len()));
        }
        let mut layers = Vec::with_capacity(self.layer_sizes.len());
        layers.push(input.to_vec());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            let below = layers.last().unwrap();
            let next = (0..w.rows())
                .map(|u| {
                    let net: f64 = w.row(u).iter().zip(below).map(|(wi, ai)| wi * ai).sum();
                    logistic(net + b[u])
                })
                .collect();
            layers.push(next);
        }
        Ok(layers)
    }

    /// Output-layer activations for `input`, without touching stored snapshots.
    pub fn evaluate_output(&self, input: &[f64]) -> Result<Vec<f64>> {
        let mut layers = self.evaluate(input)?;
        Ok(layers.pop().unwrap())
    }

    /// Propagate `input` and rotate the snapshots: the old current snapshot
    /// becomes `previous`, the new activations become `current`.
    pub fn forward(&mut self, input: &[f64]) -> Result<&ActivationSnapshot> {
        let layers = self.evaluate(input)?;
        self.steps += 1;
        let fresh = ActivationSnapshot {
            step: self.steps,
            layers,
        };
        self.previous = std::mem::replace(&mut self.current, fresh);
        Ok(&self.current)
    }

    /// Thresholded firing of the output layer in the current snapshot.
    pub fn output_firing(&self) -> Vec<bool> {
        self.current
            .output()
            .iter()
            .zip(self.output_thresholds())
            .map(|(a, t)| a > t)
            .collect()
    }

    /// Reset both snapshots to zero activations.
    pub fn clear_snapshots(&mut self) {
        self.previous = ActivationSnapshot::zeros(&self.layer_sizes);
        self.current = ActivationSnapshot::zeros(&self.layer_sizes);
    }

    /// True when weights, biases, thresholds and layout are bit-identical.
    pub fn same_parameters(&self, other: &Network) -> bool {
        self.layer_sizes == other.layer_sizes
            && self
                .weights
                .iter()
                .zip(&other.weights)
                .all(|(a, b)| bits_equal(a.as_slice(), b.as_slice()))
            && self
                .biases
                .iter()
                .zip(&other.biases)
                .all(|(a, b)| bits_equal(a, b))
            && self
                .thresholds
                .iter()
                .zip(&other.thresholds)
                .all(|(a, b)| bits_equal(a, b))
    }
}

fn bits_equal(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}
