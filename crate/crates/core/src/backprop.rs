//! Online (per-presentation) backpropagation on the squared output error.

use crate::error::{Error, Result};
use crate::metrics::TrialMetrics;
use crate::network::{ActivationSnapshot, Matrix, Network};
use crate::params::LearningParams;
use crate::reward::DesiredPattern;

/// `(d - a) a (1 - a)`.
#[inline]
pub fn output_delta(desired: f64, actual: f64) -> f64 {
    (desired - actual) * actual * (1.0 - actual)
}

/// `a_h (1 - a_h) Σ_u delta_u weight_uh`.
pub fn hidden_delta(a_h: f64, downstream_deltas: &[f64], outgoing_weights: &[f64]) -> Result<f64> {
    if downstream_deltas.len() != outgoing_weights.len() {
        return Err(Error::shape(
            "hidden_delta outgoing weights",
            downstream_deltas.len(),
            outgoing_weights.len(),
        ));
    }
    let sum: f64 = downstream_deltas
        .iter()
        .zip(outgoing_weights)
        .map(|(d, w)| d * w)
        .sum();
    Ok(a_h * (1.0 - a_h) * sum)
}

/// Delta values for every non-input layer; `layers[0]` belongs to network layer 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSignal {
    pub layers: Vec<Vec<f64>>,
}

/// Changes added to each weight matrix and bias vector by one update.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightChanges {
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
}

impl WeightChanges {
    pub fn zeros_like(net: &Network) -> Self {
        WeightChanges {
            weights: net
                .weights()
                .iter()
                .map(|w| Matrix::zeros(w.rows(), w.cols()))
                .collect(),
            biases: net.biases().iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.weights
            .iter()
            .flat_map(|w| w.as_slice())
            .chain(self.biases.iter().flatten())
            .all(|&x| x == 0.0)
    }

    pub(crate) fn apply(&self, net: &mut Network) {
        for (w, dw) in net.weights_mut().iter_mut().zip(&self.weights) {
            for (x, dx) in w.as_mut_slice().iter_mut().zip(dw.as_slice()) {
                *x += dx;
            }
        }
        for (b, db) in net.biases_mut().iter_mut().zip(&self.biases) {
            for (x, dx) in b.iter_mut().zip(db) {
                *x += dx;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AppliedUpdate {
    pub deltas: ErrorSignal,
    pub changes: WeightChanges,
}

/// Backpropagate `desired` against the activations stored in `snapshot` and
/// apply the resulting changes to `net` in place.
///
/// All deltas are computed from the pre-update weights before anything is applied.
pub fn backprop_update(
    net: &mut Network,
    snapshot: &ActivationSnapshot,
    desired: &DesiredPattern,
    params: &LearningParams,
) -> Result<AppliedUpdate> {
    snapshot.check_shape(net.layer_sizes())?;
    if desired.len() != net.output_size() {
        return Err(Error::shape("desired pattern", net.output_size(), desired.len()));
    }
    let layers = &snapshot.layers;
    let top = net.layer_count() - 1;

    let mut deltas: Vec<Vec<f64>> = vec![Vec::new(); top];
    deltas[top - 1] = layers[top]
        .iter()
        .zip(desired.as_slice())
        .map(|(&a, &d)| output_delta(d, a))
        .collect();
    for l in (1..top).rev() {
        let above = &net.weights()[l];
        let downstream = &deltas[l];
        let current: Vec<f64> = layers[l]
            .iter()
            .enumerate()
            .map(|(h, &a_h)| {
                let sum: f64 = (0..above.rows()).map(|u| downstream[u] * above.get(u, h)).sum();
                a_h * (1.0 - a_h) * sum
            })
            .collect();
        deltas[l - 1] = current;
    }

    let mut changes = WeightChanges::zeros_like(net);
    for l in 0..top {
        let below = &layers[l];
        let delta = &deltas[l];
        let dw = &mut changes.weights[l];
        for (u, &d_u) in delta.iter().enumerate() {
            let step = params.lrate * d_u;
            for (h, &a_h) in below.iter().enumerate() {
                dw.set(u, h, step * a_h);
            }
            changes.biases[l][u] = step;
        }
    }
    changes.apply(net);
    Ok(AppliedUpdate {
        deltas: ErrorSignal { layers: deltas },
        changes,
    })
}

/// One labeled example: input pattern and desired output activations.
pub type LabeledPattern = (Vec<f64>, Vec<f64>);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupervisedStop {
    pub max_presentations: u64,
}

/// True when every pattern's thresholded output matches its thresholded
/// desired value and every output activation is mature.
pub fn dataset_converged(
    net: &Network,
    dataset: &[LabeledPattern],
    params: &LearningParams,
) -> Result<bool> {
    let thresholds = net.output_thresholds();
    for (input, desired) in dataset {
        let out = net.evaluate_output(input)?;
        for ((a, d), t) in out.iter().zip(desired).zip(thresholds) {
            if (a > t) != (d > t) || !params.is_mature(*a) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Cycle through `dataset` in order with one forward pass and one update per
/// presentation until [`dataset_converged`] holds or the cap is reached.
pub fn train_supervised(
    net: &mut Network,
    dataset: &[LabeledPattern],
    params: &LearningParams,
    stop: SupervisedStop,
) -> Result<TrialMetrics> {
    if dataset.is_empty() {
        return Err(Error::Config("supervised dataset is empty".into()));
    }
    for (i, (input, desired)) in dataset.iter().enumerate() {
        if input.len() != net.input_size() {
            return Err(Error::shape(format!("dataset input {i}"), net.input_size(), input.len()));
        }
        if desired.len() != net.output_size() {
            return Err(Error::shape(
                format!("dataset target {i}"),
                net.output_size(),
                desired.len(),
            ));
        }
    }
    let mut metrics = TrialMetrics::default();
    let mut presentations = 0u64;
    if dataset_converged(net, dataset, params)? {
        metrics.presentations_to_convergence = Some(0);
    }
    while metrics.presentations_to_convergence.is_none() && presentations < stop.max_presentations {
        let (input, desired) = &dataset[(presentations % dataset.len() as u64) as usize];
        let snapshot = net.forward(input)?.clone();
        presentations += 1;
        backprop_update(net, &snapshot, &DesiredPattern(desired.clone()), params)?;
        if dataset_converged(net, dataset, params)? {
            metrics.presentations_to_convergence = Some(presentations);
        }
    }
    metrics.presentations = presentations;
    metrics.converged = metrics.presentations_to_convergence.is_some();
    Ok(metrics)
}
