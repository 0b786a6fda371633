//! Adam optimizer over the network parameters.

use super::mlp::{Gradients, Mlp};

pub(crate) struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    t: u64,
    m_w: Vec<Vec<f64>>,
    v_w: Vec<Vec<f64>>,
    m_b: Vec<Vec<f64>>,
    v_b: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(mlp: &Mlp, lr: f64) -> Self {
        let shape_w: Vec<Vec<f64>> = mlp.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect();
        let shape_b: Vec<Vec<f64>> = mlp.layers.iter().map(|l| vec![0.0; l.bias.len()]).collect();
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m_w: shape_w.clone(),
            v_w: shape_w,
            m_b: shape_b.clone(),
            v_b: shape_b,
        }
    }

    pub fn step(&mut self, mlp: &mut Mlp, grads: &Gradients) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for (l, layer) in mlp.layers.iter_mut().enumerate() {
            update(
                &mut layer.weights,
                &grads.weights[l],
                &mut self.m_w[l],
                &mut self.v_w[l],
                self.lr,
                self.beta1,
                self.beta2,
                self.eps,
                bc1,
                bc2,
            );
            update(
                &mut layer.bias,
                &grads.bias[l],
                &mut self.m_b[l],
                &mut self.v_b[l],
                self.lr,
                self.beta1,
                self.beta2,
                self.eps,
                bc1,
                bc2,
            );
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn update(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    bc1: f64,
    bc2: f64,
) {
    for i in 0..params.len() {
        let g = grads[i];
        m[i] = beta1 * m[i] + (1.0 - beta1) * g;
        v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + eps);
    }
}
