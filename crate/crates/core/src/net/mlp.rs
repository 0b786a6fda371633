//! A small dense network with manual forward and backward passes: tanh
//! hidden layers, a linear output, and inverted dropout on the hidden
//! activations.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Hidden layer width and count of the ranking network.
pub const HIDDEN_WIDTH: usize = 8;
pub const HIDDEN_DEPTH: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub(crate) in_dim: usize,
    pub(crate) out_dim: usize,
    /// Row-major: `weights[o * in_dim + i]`.
    pub(crate) weights: Vec<f64>,
    pub(crate) bias: Vec<f64>,
}

impl DenseLayer {
    #[cfg(test)]
    fn zeros(in_dim: usize, out_dim: usize) -> Self {
        DenseLayer {
            in_dim,
            out_dim,
            weights: vec![0.0; in_dim * out_dim],
            bias: vec![0.0; out_dim],
        }
    }

    /// Uniform Xavier/Glorot bounds, the standard choice for tanh layers.
    fn xavier(in_dim: usize, out_dim: usize, rng: &mut ChaCha8Rng) -> Self {
        let limit = (6.0 / (in_dim + out_dim) as f64).sqrt();
        let weights = (0..in_dim * out_dim)
            .map(|_| rng.random_range(-limit..limit))
            .collect();
        DenseLayer {
            in_dim,
            out_dim,
            weights,
            bias: vec![0.0; out_dim],
        }
    }

    fn apply(&self, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for o in 0..self.out_dim {
            let row = &self.weights[o * self.in_dim..(o + 1) * self.in_dim];
            let mut acc = self.bias[o];
            for (&w, &x) in row.iter().zip(input) {
                acc += w * x;
            }
            out.push(acc);
        }
    }
}

/// Gradient buffers mirroring the network shape.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub(crate) weights: Vec<Vec<f64>>,
    pub(crate) bias: Vec<Vec<f64>>,
}

impl Gradients {
    fn zeros_like(mlp: &Mlp) -> Self {
        Gradients {
            weights: mlp.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            bias: mlp.layers.iter().map(|l| vec![0.0; l.bias.len()]).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.weights
            .iter()
            .chain(&self.bias)
            .flat_map(|v| v.iter())
            .fold(0.0f64, |m, &g| m.max(g.abs()))
    }
}

/// Per-example dropout masks, one vector per hidden layer. Entries are 0 or
/// the inverted-dropout scale 1/(1-p), so evaluation needs no rescaling.
pub type DropoutMasks = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub(crate) layers: Vec<DenseLayer>,
}

impl Mlp {
    /// The standard ranking architecture: input -> 8 -> 8 -> 8 -> 1.
    pub fn init(input_dim: usize, seed: u64) -> Result<Self> {
        if input_dim == 0 {
            return Err(Error::InvalidArgument("input dimension must be >= 1".into()));
        }
        let mut dims = vec![input_dim];
        dims.extend([HIDDEN_WIDTH; HIDDEN_DEPTH]);
        dims.push(1);
        Ok(Self::init_with_dims(&dims, seed))
    }

    /// Arbitrary layer sizes; the last entry is the linear output width.
    pub(crate) fn init_with_dims(dims: &[usize], seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = dims
            .windows(2)
            .map(|d| DenseLayer::xavier(d[0], d[1], &mut rng))
            .collect();
        Mlp { layers }
    }

    #[cfg(test)]
    pub(crate) fn zeros_with_dims(dims: &[usize]) -> Self {
        let layers = dims.windows(2).map(|d| DenseLayer::zeros(d[0], d[1])).collect();
        Mlp { layers }
    }

    pub fn input_dim(&self) -> usize {
        self.layers.first().map(|l| l.in_dim).unwrap_or(0)
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    pub fn hidden_dims(&self) -> Vec<usize> {
        self.layers[..self.layers.len().saturating_sub(1)]
            .iter()
            .map(|l| l.out_dim)
            .collect()
    }

    /// Draw one set of inverted-dropout masks for the hidden layers.
    pub fn sample_masks(&self, rate: f64, rng: &mut ChaCha8Rng) -> DropoutMasks {
        let scale = 1.0 / (1.0 - rate);
        self.layers[..self.layers.len() - 1]
            .iter()
            .map(|l| {
                (0..l.out_dim)
                    .map(|_| {
                        if rate > 0.0 && rng.random::<f64>() < rate {
                            0.0
                        } else if rate > 0.0 {
                            scale
                        } else {
                            1.0
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// Forward pass. `masks` carries the per-hidden-layer dropout factors
    /// for train mode; `None` is the deterministic evaluation mode.
    pub fn forward(&self, input: &[f64], masks: Option<&DropoutMasks>) -> Result<f64> {
        Ok(self.forward_cached(input, masks)?.output)
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        if input.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                actual: input.len(),
            });
        }
        Ok(())
    }

    fn forward_cached(&self, input: &[f64], masks: Option<&DropoutMasks>) -> Result<ForwardCache> {
        self.check_input(input)?;
        let hidden_count = self.layers.len() - 1;
        let mut tanh_acts = Vec::with_capacity(hidden_count);
        let mut acts = Vec::with_capacity(hidden_count);
        let mut current = input.to_vec();
        let mut buf = Vec::new();
        for (l, layer) in self.layers[..hidden_count].iter().enumerate() {
            layer.apply(&current, &mut buf);
            let tanh: Vec<f64> = buf.iter().map(|z| z.tanh()).collect();
            let dropped: Vec<f64> = match masks {
                Some(m) => tanh.iter().zip(&m[l]).map(|(t, f)| t * f).collect(),
                None => tanh.clone(),
            };
            tanh_acts.push(tanh);
            current = dropped.clone();
            acts.push(dropped);
        }
        let out_layer = self.layers.last().expect("network has layers");
        out_layer.apply(&current, &mut buf);
        debug_assert_eq!(buf.len(), 1);
        Ok(ForwardCache {
            output: buf[0],
            tanh_acts,
            acts,
        })
    }

    /// Mean squared error of a batch in evaluation mode.
    pub fn loss(&self, batch: &[(Vec<f64>, f64)], masks: Option<&[DropoutMasks]>) -> Result<f64> {
        if batch.is_empty() {
            return Err(Error::EmptyInput("loss needs a non-empty batch"));
        }
        let mut total = 0.0;
        for (i, (x, y)) in batch.iter().enumerate() {
            let pred = self.forward(x, masks.map(|m| &m[i]))?;
            total += (y - pred) * (y - pred);
        }
        Ok(total / batch.len() as f64)
    }

    /// MSE loss and its gradient with respect to every weight and bias,
    /// accumulated over the batch via backpropagation.
    pub fn loss_and_grad(
        &self,
        batch: &[(Vec<f64>, f64)],
        masks: Option<&[DropoutMasks]>,
    ) -> Result<(f64, Gradients)> {
        if batch.is_empty() {
            return Err(Error::EmptyInput("loss needs a non-empty batch"));
        }
        let m = batch.len() as f64;
        let mut grads = Gradients::zeros_like(self);
        let mut total = 0.0;
        let hidden_count = self.layers.len() - 1;

        for (i, (x, y)) in batch.iter().enumerate() {
            let example_masks = masks.map(|mm| &mm[i]);
            let cache = self.forward_cached(x, example_masks)?;
            let err = cache.output - y;
            total += err * err;

            // d(L)/d(output) for L = (1/m) sum (y - yhat)^2
            let mut upstream = vec![2.0 * err / m];
            for l in (0..self.layers.len()).rev() {
                let layer = &self.layers[l];
                let input: &[f64] = if l == 0 { x } else { &cache.acts[l - 1] };
                let delta: Vec<f64> = if l == hidden_count {
                    upstream.clone()
                } else {
                    // Through dropout, then tanh.
                    let tanh = &cache.tanh_acts[l];
                    upstream
                        .iter()
                        .enumerate()
                        .map(|(j, &u)| {
                            let through_dropout = match example_masks {
                                Some(mm) => u * mm[l][j],
                                None => u,
                            };
                            through_dropout * (1.0 - tanh[j] * tanh[j])
                        })
                        .collect()
                };
                let gw = &mut grads.weights[l];
                for (o, &d) in delta.iter().enumerate() {
                    grads.bias[l][o] += d;
                    let row = &mut gw[o * layer.in_dim..(o + 1) * layer.in_dim];
                    for (g, &inp) in row.iter_mut().zip(input) {
                        *g += d * inp;
                    }
                }
                if l > 0 {
                    let mut down = vec![0.0; layer.in_dim];
                    for (o, &d) in delta.iter().enumerate() {
                        let row = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
                        for (dl, &w) in down.iter_mut().zip(row) {
                            *dl += d * w;
                        }
                    }
                    upstream = down;
                }
            }
        }
        Ok((total / m, grads))
    }
}

struct ForwardCache {
    output: f64,
    /// Post-tanh activations per hidden layer (before dropout).
    tanh_acts: Vec<Vec<f64>>,
    /// Post-dropout activations per hidden layer (inputs to the next layer).
    acts: Vec<Vec<f64>>,
}

/// Central finite differences over every parameter, compared against the
/// backprop gradients; returns the maximum relative error. The denominator
/// is floored so that near-zero gradients compare absolutely.
pub fn finite_difference_max_error(
    mlp: &Mlp,
    batch: &[(Vec<f64>, f64)],
    masks: Option<&[DropoutMasks]>,
    h: f64,
) -> Result<f64> {
    let (_, analytic) = mlp.loss_and_grad(batch, masks)?;
    let mut max_err = 0.0f64;
    let mut probe = mlp.clone();
    for l in 0..mlp.layers.len() {
        for idx in 0..mlp.layers[l].weights.len() + mlp.layers[l].bias.len() {
            let (is_bias, j) = if idx < mlp.layers[l].weights.len() {
                (false, idx)
            } else {
                (true, idx - mlp.layers[l].weights.len())
            };
            let slot = |m: &mut Mlp, v: f64| {
                if is_bias {
                    m.layers[l].bias[j] = v;
                } else {
                    m.layers[l].weights[j] = v;
                }
            };
            let original = if is_bias {
                mlp.layers[l].bias[j]
            } else {
                mlp.layers[l].weights[j]
            };
            slot(&mut probe, original + h);
            let up = probe.loss(batch, masks)?;
            slot(&mut probe, original - h);
            let down = probe.loss(batch, masks)?;
            slot(&mut probe, original);
            let numeric = (up - down) / (2.0 * h);
            let reference = if is_bias {
                analytic.bias[l][j]
            } else {
                analytic.weights[l][j]
            };
            let denom = (numeric.abs() + reference.abs()).max(1e-4);
            max_err = max_err.max((numeric - reference).abs() / denom);
        }
    }
    Ok(max_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn init_is_reproducible_and_seed_sensitive() {
        let a = Mlp::init(5, 7).unwrap();
        let b = Mlp::init(5, 7).unwrap();
        let c = Mlp::init(5, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(Mlp::init(0, 7).is_err());
    }

    #[test]
    fn architecture_shape() {
        let m = Mlp::init(12, 1).unwrap();
        assert_eq!(m.hidden_dims(), vec![8, 8, 8]);
        assert_eq!(m.layers.last().unwrap().out_dim, 1);
        assert_eq!(m.input_dim(), 12);
    }

    #[test]
    fn zero_network_outputs_zero() {
        let m = Mlp::zeros_with_dims(&[4, 8, 8, 8, 1]);
        assert_eq!(m.forward(&[1.0, -2.0, 3.0, 0.5], None).unwrap(), 0.0);
    }

    #[test]
    fn output_bias_passes_through_zero_weights() {
        let mut m = Mlp::zeros_with_dims(&[3, 8, 8, 8, 1]);
        m.layers.last_mut().unwrap().bias[0] = 2.5;
        assert_eq!(m.forward(&[0.3, 0.1, -0.7], None).unwrap(), 2.5);
    }

    #[test]
    fn forward_matches_independent_matrix_oracle() {
        // A second implementation of the same formula with plain index
        // loops, kept local to the test.
        fn oracle(m: &Mlp, x: &[f64]) -> f64 {
            let mut a: Vec<f64> = x.to_vec();
            for (l, layer) in m.layers.iter().enumerate() {
                let mut z = vec![0.0; layer.out_dim];
                for o in 0..layer.out_dim {
                    z[o] = layer.bias[o];
                    for i in 0..layer.in_dim {
                        z[o] += layer.weights[o * layer.in_dim + i] * a[i];
                    }
                }
                if l + 1 < m.layers.len() {
                    for v in z.iter_mut() {
                        *v = v.tanh();
                    }
                }
                a = z;
            }
            a[0]
        }
        let m = Mlp::init(6, 99).unwrap();
        let x = [0.3, -1.2, 0.8, 0.0, 2.0, -0.5];
        assert_abs_diff_eq!(
            m.forward(&x, None).unwrap(),
            oracle(&m, &x),
            epsilon = 1e-10
        );
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let m = Mlp::init(4, 1).unwrap();
        assert!(matches!(
            m.forward(&[1.0, 2.0], None),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn perfect_predictions_mean_zero_loss_and_gradient() {
        let mut m = Mlp::zeros_with_dims(&[2, 8, 8, 8, 1]);
        m.layers.last_mut().unwrap().bias[0] = 1.5;
        let batch = vec![(vec![0.1, 0.2], 1.5), (vec![-0.3, 0.4], 1.5)];
        let (loss, grads) = m.loss_and_grad(&batch, None).unwrap();
        assert_eq!(loss, 0.0);
        assert_eq!(grads.max_abs(), 0.0);
    }

    #[test]
    fn single_linear_layer_has_closed_form_gradient() {
        // One linear output layer, no hidden layers: yhat = w.x + b, so
        // dL/dw = 2 (yhat - y) x and dL/db = 2 (yhat - y).
        let mut m = Mlp::zeros_with_dims(&[3, 1]);
        m.layers[0].weights.copy_from_slice(&[0.5, -1.0, 2.0]);
        m.layers[0].bias[0] = 0.25;
        let x = vec![1.0, 2.0, -0.5];
        let y = 3.0;
        let yhat = 0.5 * 1.0 - 1.0 * 2.0 + 2.0 * (-0.5) + 0.25;
        let (loss, grads) = m.loss_and_grad(&[(x.clone(), y)], None).unwrap();
        assert_abs_diff_eq!(loss, (y - yhat) * (y - yhat), epsilon = 1e-12);
        for i in 0..3 {
            assert_abs_diff_eq!(
                grads.weights[0][i],
                2.0 * (yhat - y) * x[i],
                epsilon = 1e-12
            );
        }
        assert_abs_diff_eq!(grads.bias[0][0], 2.0 * (yhat - y), epsilon = 1e-12);
    }

    #[test]
    fn backprop_matches_finite_differences() {
        let m = Mlp::init(5, 1234).unwrap();
        let batch = vec![
            (vec![0.5, -0.2, 1.0, 0.0, -1.5], 0.7),
            (vec![-0.4, 0.9, 0.1, 0.3, 0.8], -1.2),
        ];
        let err = finite_difference_max_error(&m, &batch, None, 1e-5).unwrap();
        assert!(err < 1e-4, "max relative error {err}");
    }

    #[test]
    fn backprop_matches_finite_differences_through_dropout() {
        use rand::SeedableRng;
        let m = Mlp::init(4, 55).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let batch = vec![
            (vec![0.5, -0.2, 1.0, 0.4], 0.7),
            (vec![0.1, 0.3, -0.9, 1.2], -0.3),
        ];
        let masks: Vec<DropoutMasks> = batch
            .iter()
            .map(|_| m.sample_masks(0.2, &mut rng))
            .collect();
        // At least one unit must actually be dropped for this to exercise
        // the dropout path.
        assert!(masks.iter().flatten().flatten().any(|&f| f == 0.0));
        let err = finite_difference_max_error(&m, &batch, Some(&masks), 1e-5).unwrap();
        assert!(err < 1e-4, "max relative error {err}");
    }

    #[test]
    fn dropout_zero_matches_eval_mode() {
        use rand::SeedableRng;
        let m = Mlp::init(3, 77).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let masks = m.sample_masks(0.0, &mut rng);
        let x = [0.2, -0.4, 0.9];
        assert_eq!(
            m.forward(&x, Some(&masks)).unwrap(),
            m.forward(&x, None).unwrap()
        );
    }

    #[test]
    fn loss_is_batch_permutation_invariant() {
        let m = Mlp::init(2, 3).unwrap();
        let batch1 = vec![
            (vec![0.1, 0.9], 1.0),
            (vec![-0.5, 0.2], 0.0),
            (vec![0.7, 0.7], -1.0),
        ];
        let mut batch2 = batch1.clone();
        batch2.reverse();
        assert_abs_diff_eq!(
            m.loss(&batch1, None).unwrap(),
            m.loss(&batch2, None).unwrap(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn eval_forward_is_pure() {
        let m = Mlp::init(3, 21).unwrap();
        let x = [0.1, 0.2, 0.3];
        assert_eq!(m.forward(&x, None).unwrap(), m.forward(&x, None).unwrap());
    }
}
