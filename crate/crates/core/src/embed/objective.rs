//! Binary-logistic loss for one skip-gram example with negative sampling.
//!
//! For an input (center) vector `u`, the positive output vector `p` and
//! negative output vectors `n_k`:
//!
//! ```text
//! L = -log σ(u·p) - Σ_k log σ(-u·n_k)
//! ∂L/∂u   = (σ(u·p) - 1) p + Σ_k σ(u·n_k) n_k
//! ∂L/∂p   = (σ(u·p) - 1) u
//! ∂L/∂n_k = σ(u·n_k) u
//! ```

use super::dot;

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `-log σ(x)`, stable for large |x|.
pub fn neg_log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

pub fn example_loss(input: &[f64], positive: &[f64], negatives: &[&[f64]]) -> f64 {
    neg_log_sigmoid(dot(input, positive))
        + negatives
            .iter()
            .map(|n| neg_log_sigmoid(-dot(input, n)))
            .sum::<f64>()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExampleGradient {
    pub input: Vec<f64>,
    pub positive: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

pub fn example_gradient(input: &[f64], positive: &[f64], negatives: &[&[f64]]) -> ExampleGradient {
    let mut grad_input = vec![0.0; input.len()];
    let g_pos = sigmoid(dot(input, positive)) - 1.0;
    for (gi, &p) in grad_input.iter_mut().zip(positive) {
        *gi += g_pos * p;
    }
    let positive_grad = input.iter().map(|&u| g_pos * u).collect();
    let mut negative_grads = Vec::with_capacity(negatives.len());
    for n in negatives {
        let g = sigmoid(dot(input, n));
        for (gi, &x) in grad_input.iter_mut().zip(n.iter()) {
            *gi += g * x;
        }
        negative_grads.push(input.iter().map(|&u| g * u).collect());
    }
    ExampleGradient {
        input: grad_input,
        positive: positive_grad,
        negatives: negative_grads,
    }
}
