use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Classifier architecture. Parameters live in one flat vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ModelSpec {
    LinearSoftmax,
    /// One hidden ReLU layer.
    Mlp { hidden: usize },
}

/// A model spec bound to input and output sizes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Model {
    spec: ModelSpec,
    dim: usize,
    classes: usize,
}

impl Model {
    pub fn new(spec: ModelSpec, dim: usize, classes: usize) -> Result<Self> {
        if dim == 0 || classes < 2 {
            return Err(Error::invalid("model needs dim >= 1 and at least 2 classes"));
        }
        if let ModelSpec::Mlp { hidden: 0 } = spec {
            return Err(Error::invalid("hidden layer width must be positive"));
        }
        Ok(Self { spec, dim, classes })
    }

    pub fn num_params(&self) -> usize {
        let (d, k) = (self.dim, self.classes);
        match self.spec {
            ModelSpec::LinearSoftmax => k * d + k,
            ModelSpec::Mlp { hidden: h } => h * d + h + k * h + k,
        }
    }

    /// Starting point: zeros for the linear model, scaled normal weights
    /// (from `normal_draws`) for the hidden layer of the MLP.
    pub fn init(&self, mut normal_draws: impl FnMut() -> f64) -> Vec<f64> {
        let mut theta = vec![0.0; self.num_params()];
        if let ModelSpec::Mlp { hidden: h } = self.spec {
            let s1 = (2.0 / self.dim as f64).sqrt();
            let s2 = (1.0 / h as f64).sqrt();
            let w1 = h * self.dim;
            for v in &mut theta[..w1] {
                *v = s1 * normal_draws();
            }
            let w2 = w1 + h;
            for v in &mut theta[w2..w2 + self.classes * h] {
                *v = s2 * normal_draws();
            }
        }
        theta
    }

    fn logits(&self, theta: &[f64], x: &[f64], hidden_out: &mut Vec<f64>) -> Vec<f64> {
        let (d, k) = (self.dim, self.classes);
        match self.spec {
            ModelSpec::LinearSoftmax => affine(&theta[..k * d], &theta[k * d..], x),
            ModelSpec::Mlp { hidden: h } => {
                let (w1, rest) = theta.split_at(h * d);
                let (b1, rest) = rest.split_at(h);
                let (w2, b2) = rest.split_at(k * h);
                *hidden_out = affine(w1, b1, x).into_iter().map(|v| v.max(0.0)).collect();
                affine(w2, b2, hidden_out)
            }
        }
    }

    pub fn predict(&self, theta: &[f64], x: &[f64]) -> usize {
        let z = self.logits(theta, x, &mut Vec::new());
        argmax(&z)
    }

    /// Cross-entropy loss of one example; adds its gradient into `grad`.
    pub fn loss_and_grad(&self, theta: &[f64], x: &[f64], y: usize, grad: &mut [f64]) -> f64 {
        let (d, k) = (self.dim, self.classes);
        let mut hidden = Vec::new();
        let z = self.logits(theta, x, &mut hidden);
        let (probs, loss) = softmax_xent(&z, y);
        // dL/dz = p - onehot(y)
        let mut dz = probs;
        dz[y] -= 1.0;
        match self.spec {
            ModelSpec::LinearSoftmax => {
                let (gw, gb) = grad.split_at_mut(k * d);
                outer_add(gw, &dz, x);
                add(gb, &dz);
            }
            ModelSpec::Mlp { hidden: h } => {
                let w2 = &theta[h * d + h..h * d + h + k * h];
                let (gw1, rest) = grad.split_at_mut(h * d);
                let (gb1, rest) = rest.split_at_mut(h);
                let (gw2, gb2) = rest.split_at_mut(k * h);
                outer_add(gw2, &dz, &hidden);
                add(gb2, &dz);
                let mut dh = vec![0.0; h];
                for c in 0..k {
                    for j in 0..h {
                        dh[j] += w2[c * h + j] * dz[c];
                    }
                }
                for j in 0..h {
                    if hidden[j] <= 0.0 {
                        dh[j] = 0.0;
                    }
                }
                outer_add(gw1, &dh, x);
                add(gb1, &dh);
            }
        }
        loss
    }

    /// Mean loss and mean gradient over a batch of rows.
    pub fn batch_loss_and_grad<'a>(&self, theta: &[f64], rows: impl Iterator<Item = (&'a [f64], usize)>) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; self.num_params()];
        let mut loss = 0.0;
        let mut count = 0usize;
        for (x, y) in rows {
            loss += self.loss_and_grad(theta, x, y, &mut grad);
            count += 1;
        }
        if count > 0 {
            let inv = 1.0 / count as f64;
            grad.iter_mut().for_each(|g| *g *= inv);
            loss *= inv;
        }
        (loss, grad)
    }

    pub fn loss(&self, theta: &[f64], x: &[f64], y: usize) -> f64 {
        let z = self.logits(theta, x, &mut Vec::new());
        softmax_xent(&z, y).1
    }
}

fn affine(w: &[f64], b: &[f64], x: &[f64]) -> Vec<f64> {
    let d = x.len();
    b.iter()
        .enumerate()
        .map(|(r, &bias)| bias + w[r * d..(r + 1) * d].iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
        .collect()
}

fn outer_add(g: &mut [f64], u: &[f64], v: &[f64]) {
    let d = v.len();
    for (r, &ur) in u.iter().enumerate() {
        if ur == 0.0 {
            continue;
        }
        for (gi, &vi) in g[r * d..(r + 1) * d].iter_mut().zip(v) {
            *gi += ur * vi;
        }
    }
}

fn add(g: &mut [f64], u: &[f64]) {
    for (a, b) in g.iter_mut().zip(u) {
        *a += b;
    }
}

fn softmax_xent(z: &[f64], y: usize) -> (Vec<f64>, f64) {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    let loss = s.ln() - (z[y] - m);
    (e.into_iter().map(|v| v / s).collect(), loss)
}

fn argmax(z: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in z.iter().enumerate() {
        if *v > z[best] {
            best = i;
        }
    }
    best
}

/// Relative error `||g - fd||_inf / max(||g||_inf, ||fd||_inf)` between the
/// analytic gradient and central finite differences.
pub fn gradient_check(model: &Model, theta: &[f64], x: &[f64], y: usize, step: f64) -> f64 {
    let mut grad = vec![0.0; model.num_params()];
    model.loss_and_grad(theta, x, y, &mut grad);
    let (mut diff, mut scale) = (0.0_f64, 0.0_f64);
    let mut t = theta.to_vec();
    for i in 0..theta.len() {
        t[i] = theta[i] + step;
        let up = model.loss(&t, x, y);
        t[i] = theta[i] - step;
        let down = model.loss(&t, x, y);
        t[i] = theta[i];
        let fd = (up - down) / (2.0 * step);
        diff = diff.max((grad[i] - fd).abs());
        scale = scale.max(grad[i].abs()).max(fd.abs());
    }
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}
