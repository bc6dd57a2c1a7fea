//! Layer implementations. Batches are row-major `(batch, features)`;
//! 1D-convolutional layers view each row as `(channels, length)`.
//!
//! Every layer offers a caching training path (`forward` + `backward`) and a
//! pure inference path (`infer`) that never mutates state, so Eval-mode
//! inference is safe to share across threads.

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::{CoreError, Result, Scalar};

/// Serializable layer description (shapes and hyperparameters, no weights).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerSpec {
    Dense {
        in_dim: usize,
        out_dim: usize,
    },
    BatchNorm1d {
        features: usize,
        eps: f64,
        momentum: f64,
    },
    LeakyRelu {
        slope: f64,
    },
    Sigmoid,
    Conv1d {
        in_ch: usize,
        out_ch: usize,
        len: usize,
        kernel: usize,
        stride: usize,
        pad_l: usize,
        pad_r: usize,
    },
    TransposedConv1d {
        in_ch: usize,
        out_ch: usize,
        len: usize,
        kernel: usize,
        stride: usize,
        pad_l: usize,
        pad_r: usize,
    },
    MaxPool1d {
        ch: usize,
        len: usize,
        kernel: usize,
    },
}

/// One layer with its parameters, gradients and caches.
#[derive(Debug, Clone)]
pub enum Layer<S: Scalar> {
    Dense(Dense<S>),
    BatchNorm1d(BatchNorm1d<S>),
    LeakyRelu(LeakyRelu<S>),
    Sigmoid(Sigmoid<S>),
    Conv1d(Conv1d<S>),
    TransposedConv1d(TransposedConv1d<S>),
    MaxPool1d(MaxPool1d<S>),
}

impl<S: Scalar> Layer<S> {
    pub fn from_spec(spec: &LayerSpec) -> Self {
        match *spec {
            LayerSpec::Dense { in_dim, out_dim } => Layer::Dense(Dense::new(in_dim, out_dim)),
            LayerSpec::BatchNorm1d {
                features,
                eps,
                momentum,
            } => Layer::BatchNorm1d(BatchNorm1d::with_opts(features, eps, momentum)),
            LayerSpec::LeakyRelu { slope } => Layer::LeakyRelu(LeakyRelu::new(slope)),
            LayerSpec::Sigmoid => Layer::Sigmoid(Sigmoid::new()),
            LayerSpec::Conv1d {
                in_ch,
                out_ch,
                len,
                kernel,
                stride,
                pad_l,
                pad_r,
            } => Layer::Conv1d(Conv1d::new(in_ch, out_ch, len, kernel, stride, pad_l, pad_r)),
            LayerSpec::TransposedConv1d {
                in_ch,
                out_ch,
                len,
                kernel,
                stride,
                pad_l,
                pad_r,
            } => Layer::TransposedConv1d(TransposedConv1d::new(
                in_ch, out_ch, len, kernel, stride, pad_l, pad_r,
            )),
            LayerSpec::MaxPool1d { ch, len, kernel } => {
                Layer::MaxPool1d(MaxPool1d::new(ch, len, kernel))
            }
        }
    }

    pub fn spec(&self) -> LayerSpec {
        match self {
            Layer::Dense(l) => LayerSpec::Dense {
                in_dim: l.in_dim,
                out_dim: l.out_dim,
            },
            Layer::BatchNorm1d(l) => LayerSpec::BatchNorm1d {
                features: l.features,
                eps: l.eps,
                momentum: l.momentum,
            },
            Layer::LeakyRelu(l) => LayerSpec::LeakyRelu { slope: l.slope },
            Layer::Sigmoid(_) => LayerSpec::Sigmoid,
            Layer::Conv1d(l) => LayerSpec::Conv1d {
                in_ch: l.in_ch,
                out_ch: l.out_ch,
                len: l.len,
                kernel: l.kernel,
                stride: l.stride,
                pad_l: l.pad_l,
                pad_r: l.pad_r,
            },
            Layer::TransposedConv1d(l) => LayerSpec::TransposedConv1d {
                in_ch: l.in_ch,
                out_ch: l.out_ch,
                len: l.len,
                kernel: l.kernel,
                stride: l.stride,
                pad_l: l.pad_l,
                pad_r: l.pad_r,
            },
            Layer::MaxPool1d(l) => LayerSpec::MaxPool1d {
                ch: l.ch,
                len: l.len,
                kernel: l.kernel,
            },
        }
    }

    /// Declared input width, if the layer is shape-fixed.
    pub fn in_dim(&self) -> Option<usize> {
        match self {
            Layer::Dense(l) => Some(l.in_dim),
            Layer::BatchNorm1d(l) => Some(l.features),
            Layer::Conv1d(l) => Some(l.in_ch * l.len),
            Layer::TransposedConv1d(l) => Some(l.in_ch * l.len),
            Layer::MaxPool1d(l) => Some(l.ch * l.len),
            Layer::LeakyRelu(_) | Layer::Sigmoid(_) => None,
        }
    }

    /// Output width for a given input width.
    pub fn out_dim(&self, in_dim: usize) -> usize {
        match self {
            Layer::Dense(l) => l.out_dim,
            Layer::Conv1d(l) => l.out_ch * l.out_len(),
            Layer::TransposedConv1d(l) => l.out_ch * l.out_len(),
            Layer::MaxPool1d(l) => l.ch * (l.len / l.kernel),
            Layer::BatchNorm1d(_) | Layer::LeakyRelu(_) | Layer::Sigmoid(_) => in_dim,
        }
    }

    pub fn forward(&mut self, x: &Array2<S>) -> Array2<S> {
        match self {
            Layer::Dense(l) => l.forward(x),
            Layer::BatchNorm1d(l) => l.forward(x),
            Layer::LeakyRelu(l) => l.forward(x),
            Layer::Sigmoid(l) => l.forward(x),
            Layer::Conv1d(l) => l.forward(x),
            Layer::TransposedConv1d(l) => l.forward(x),
            Layer::MaxPool1d(l) => l.forward(x),
        }
    }

    pub fn infer(&self, x: &Array2<S>) -> Array2<S> {
        match self {
            Layer::Dense(l) => l.eval(x),
            Layer::BatchNorm1d(l) => l.eval(x),
            Layer::LeakyRelu(l) => l.eval(x),
            Layer::Sigmoid(l) => l.eval(x),
            Layer::Conv1d(l) => l.eval(x),
            Layer::TransposedConv1d(l) => l.eval(x),
            Layer::MaxPool1d(l) => l.eval(x),
        }
    }

    pub fn backward(&mut self, g: &Array2<S>) -> Result<Array2<S>> {
        match self {
            Layer::Dense(l) => l.backward(g),
            Layer::BatchNorm1d(l) => l.backward(g),
            Layer::LeakyRelu(l) => l.backward(g),
            Layer::Sigmoid(l) => l.backward(g),
            Layer::Conv1d(l) => l.backward(g),
            Layer::TransposedConv1d(l) => l.backward(g),
            Layer::MaxPool1d(l) => l.backward(g),
        }
    }

    /// Trainable (parameter, gradient) pairs as flat slices.
    pub fn params_mut(&mut self) -> Vec<(&mut [S], &mut [S])> {
        match self {
            Layer::Dense(l) => vec![
                (
                    l.w.as_slice_mut().expect("standard layout"),
                    l.gw.as_slice_mut().expect("standard layout"),
                ),
                (
                    l.b.as_slice_mut().expect("standard layout"),
                    l.gb.as_slice_mut().expect("standard layout"),
                ),
            ],
            Layer::BatchNorm1d(l) => vec![
                (
                    l.gamma.as_slice_mut().expect("standard layout"),
                    l.g_gamma.as_slice_mut().expect("standard layout"),
                ),
                (
                    l.beta.as_slice_mut().expect("standard layout"),
                    l.g_beta.as_slice_mut().expect("standard layout"),
                ),
            ],
            Layer::Conv1d(l) => vec![
                (
                    l.w.as_slice_mut().expect("standard layout"),
                    l.gw.as_slice_mut().expect("standard layout"),
                ),
                (
                    l.b.as_slice_mut().expect("standard layout"),
                    l.gb.as_slice_mut().expect("standard layout"),
                ),
            ],
            Layer::TransposedConv1d(l) => vec![
                (
                    l.w.as_slice_mut().expect("standard layout"),
                    l.gw.as_slice_mut().expect("standard layout"),
                ),
                (
                    l.b.as_slice_mut().expect("standard layout"),
                    l.gb.as_slice_mut().expect("standard layout"),
                ),
            ],
            Layer::LeakyRelu(_) | Layer::Sigmoid(_) | Layer::MaxPool1d(_) => Vec::new(),
        }
    }

    /// Tensors persisted in model files: trainable parameters plus
    /// batch-norm running statistics, in a fixed order.
    pub fn persisted_tensors(&self) -> Vec<&[S]> {
        match self {
            Layer::Dense(l) => vec![
                l.w.as_slice().expect("standard layout"),
                l.b.as_slice().expect("standard layout"),
            ],
            Layer::BatchNorm1d(l) => vec![
                l.gamma.as_slice().expect("standard layout"),
                l.beta.as_slice().expect("standard layout"),
                l.running_mean.as_slice().expect("standard layout"),
                l.running_var.as_slice().expect("standard layout"),
            ],
            Layer::Conv1d(l) => vec![
                l.w.as_slice().expect("standard layout"),
                l.b.as_slice().expect("standard layout"),
            ],
            Layer::TransposedConv1d(l) => vec![
                l.w.as_slice().expect("standard layout"),
                l.b.as_slice().expect("standard layout"),
            ],
            Layer::LeakyRelu(_) | Layer::Sigmoid(_) | Layer::MaxPool1d(_) => Vec::new(),
        }
    }

    pub fn persisted_tensors_mut(&mut self) -> Vec<&mut [S]> {
        match self {
            Layer::Dense(l) => vec![
                l.w.as_slice_mut().expect("standard layout"),
                l.b.as_slice_mut().expect("standard layout"),
            ],
            Layer::BatchNorm1d(l) => vec![
                l.gamma.as_slice_mut().expect("standard layout"),
                l.beta.as_slice_mut().expect("standard layout"),
                l.running_mean.as_slice_mut().expect("standard layout"),
                l.running_var.as_slice_mut().expect("standard layout"),
            ],
            Layer::Conv1d(l) => vec![
                l.w.as_slice_mut().expect("standard layout"),
                l.b.as_slice_mut().expect("standard layout"),
            ],
            Layer::TransposedConv1d(l) => vec![
                l.w.as_slice_mut().expect("standard layout"),
                l.b.as_slice_mut().expect("standard layout"),
            ],
            Layer::LeakyRelu(_) | Layer::Sigmoid(_) | Layer::MaxPool1d(_) => Vec::new(),
        }
    }

    /// Kaiming-normal weight init for weighted layers (fan-in scaling).
    pub fn init_weights<R: rand::Rng>(&mut self, rng: &mut R) {
        match self {
            Layer::Dense(l) => {
                let std = (2.0 / l.in_dim as f64).sqrt();
                fill_normal(&mut l.w, rng, std);
                l.b.fill(S::zero());
            }
            Layer::Conv1d(l) => {
                let std = (2.0 / (l.in_ch * l.kernel) as f64).sqrt();
                fill_normal(&mut l.w, rng, std);
                l.b.fill(S::zero());
            }
            Layer::TransposedConv1d(l) => {
                let std = (2.0 / (l.in_ch * l.kernel) as f64).sqrt();
                fill_normal(&mut l.w, rng, std);
                l.b.fill(S::zero());
            }
            Layer::BatchNorm1d(l) => {
                l.gamma.fill(S::one());
                l.beta.fill(S::zero());
                l.running_mean.fill(S::zero());
                l.running_var.fill(S::one());
            }
            Layer::LeakyRelu(_) | Layer::Sigmoid(_) | Layer::MaxPool1d(_) => {}
        }
    }
}

fn fill_normal<S: Scalar, R: rand::Rng>(arr: &mut Array2<S>, rng: &mut R, std: f64) {
    use rand_distr::{Distribution, Normal};
    let normal = Normal::new(0.0f64, std).expect("std > 0");
    for v in arr.iter_mut() {
        *v = S::of(normal.sample(rng));
    }
}

fn not_forwarded(layer: &str) -> CoreError {
    CoreError::MissingPrerequisite(format!("{layer}: backward called before forward"))
}

/// Fully connected affine layer. Weights are `(in_dim, out_dim)`.
#[derive(Debug, Clone)]
pub struct Dense<S: Scalar> {
    pub in_dim: usize,
    pub out_dim: usize,
    pub w: Array2<S>,
    pub b: Array1<S>,
    pub gw: Array2<S>,
    pub gb: Array1<S>,
    cache_x: Option<Array2<S>>,
}

impl<S: Scalar> Dense<S> {
    pub fn new(in_dim: usize, out_dim: usize) -> Self {
        Dense {
            in_dim,
            out_dim,
            w: Array2::zeros((in_dim, out_dim)),
            b: Array1::zeros(out_dim),
            gw: Array2::zeros((in_dim, out_dim)),
            gb: Array1::zeros(out_dim),
            cache_x: None,
        }
    }

    fn eval(&self, x: &Array2<S>) -> Array2<S> {
        x.dot(&self.w) + &self.b
    }

    fn forward(&mut self, x: &Array2<S>) -> Array2<S> {
        self.cache_x = Some(x.clone());
        self.eval(x)
    }

    fn backward(&mut self, g: &Array2<S>) -> Result<Array2<S>> {
        let x = self.cache_x.as_ref().ok_or_else(|| not_forwarded("Dense"))?;
        self.gw = x.t().dot(g);
        self.gb = g.sum_axis(Axis(0));
        Ok(g.dot(&self.w.t()))
    }
}

/// Per-feature batch normalization with affine parameters and running
/// statistics (biased variance for normalization, unbiased for the running
/// estimate).
#[derive(Debug, Clone)]
pub struct BatchNorm1d<S: Scalar> {
    pub features: usize,
    pub eps: f64,
    pub momentum: f64,
    pub gamma: Array2<S>,
    pub beta: Array2<S>,
    pub running_mean: Array2<S>,
    pub running_var: Array2<S>,
    pub g_gamma: Array2<S>,
    pub g_beta: Array2<S>,
    cache: Option<BnCache<S>>,
}

#[derive(Debug, Clone)]
struct BnCache<S: Scalar> {
    x_hat: Array2<S>,
    inv_std: Array1<S>,
}

pub const BATCHNORM_EPS: f64 = 1e-5;
pub const BATCHNORM_MOMENTUM: f64 = 0.1;

impl<S: Scalar> BatchNorm1d<S> {
    pub fn new(features: usize) -> Self {
        Self::with_opts(features, BATCHNORM_EPS, BATCHNORM_MOMENTUM)
    }

    pub fn with_opts(features: usize, eps: f64, momentum: f64) -> Self {
        BatchNorm1d {
            features,
            eps,
            momentum,
            gamma: Array2::ones((1, features)),
            beta: Array2::zeros((1, features)),
            running_mean: Array2::zeros((1, features)),
            running_var: Array2::ones((1, features)),
            g_gamma: Array2::zeros((1, features)),
            g_beta: Array2::zeros((1, features)),
            cache: None,
        }
    }

    fn eval(&self, x: &Array2<S>) -> Array2<S> {
        let eps = S::of(self.eps);
        let mut y = x.clone();
        for mut row in y.rows_mut() {
            for j in 0..self.features {
                let inv = (self.running_var[(0, j)] + eps).sqrt().recip();
                row[j] = (row[j] - self.running_mean[(0, j)]) * inv * self.gamma[(0, j)]
                    + self.beta[(0, j)];
            }
        }
        y
    }

    fn forward(&mut self, x: &Array2<S>) -> Array2<S> {
        let n = x.nrows();
        let nf = S::of(n as f64);
        let eps = S::of(self.eps);
        let mom = S::of(self.momentum);
        let one = S::one();
        let mean = x.mean_axis(Axis(0)).expect("non-empty batch");
        let mut var = Array1::<S>::zeros(self.features);
        for row in x.rows() {
            for j in 0..self.features {
                let d = row[j] - mean[j];
                var[j] += d * d;
            }
        }
        var.mapv_inplace(|v| v / nf);
        // Running stats use the unbiased variance, matching the reference
        // convention; normalization itself uses the biased one.
        let unbias = if n > 1 {
            S::of(n as f64 / (n as f64 - 1.0))
        } else {
            one
        };
        for j in 0..self.features {
            self.running_mean[(0, j)] = (one - mom) * self.running_mean[(0, j)] + mom * mean[j];
            self.running_var[(0, j)] =
                (one - mom) * self.running_var[(0, j)] + mom * var[j] * unbias;
        }
        let inv_std = var.mapv(|v| (v + eps).sqrt().recip());
        let mut x_hat = x.clone();
        for mut row in x_hat.rows_mut() {
            for j in 0..self.features {
                row[j] = (row[j] - mean[j]) * inv_std[j];
            }
        }
        let mut y = x_hat.clone();
        for mut row in y.rows_mut() {
            for j in 0..self.features {
                row[j] = row[j] * self.gamma[(0, j)] + self.beta[(0, j)];
            }
        }
        self.cache = Some(BnCache { x_hat, inv_std });
        y
    }

    fn backward(&mut self, g: &Array2<S>) -> Result<Array2<S>> {
        let cache = self.cache.as_ref().ok_or_else(|| not_forwarded("BatchNorm1d"))?;
        let n = g.nrows();
        let nf = S::of(n as f64);
        let x_hat = &cache.x_hat;
        for j in 0..self.features {
            let mut sg = S::zero();
            let mut sgx = S::zero();
            for i in 0..n {
                sg += g[(i, j)];
                sgx += g[(i, j)] * x_hat[(i, j)];
            }
            self.g_gamma[(0, j)] = sgx;
            self.g_beta[(0, j)] = sg;
        }
        let mut gx = Array2::<S>::zeros(g.raw_dim());
        for j in 0..self.features {
            let sg = self.g_beta[(0, j)];
            let sgx = self.g_gamma[(0, j)];
            let scale = self.gamma[(0, j)] * cache.inv_std[j] / nf;
            for i in 0..n {
                gx[(i, j)] = scale * (nf * g[(i, j)] - sg - x_hat[(i, j)] * sgx);
            }
        }
        Ok(gx)
    }
}

#[derive(Debug, Clone)]
pub struct LeakyRelu<S: Scalar> {
    pub slope: f64,
    cache_x: Option<Array2<S>>,
}

pub const LEAKY_RELU_SLOPE: f64 = 0.01;

impl<S: Scalar> LeakyRelu<S> {
    pub fn new(slope: f64) -> Self {
        LeakyRelu {
            slope,
            cache_x: None,
        }
    }

    fn eval(&self, x: &Array2<S>) -> Array2<S> {
        let a = S::of(self.slope);
        x.mapv(|v| if v > S::zero() { v } else { a * v })
    }

    fn forward(&mut self, x: &Array2<S>) -> Array2<S> {
        self.cache_x = Some(x.clone());
        self.eval(x)
    }

    fn backward(&mut self, g: &Array2<S>) -> Result<Array2<S>> {
        let x = self
            .cache_x
            .as_ref()
            .ok_or_else(|| not_forwarded("LeakyRelu"))?;
        let a = S::of(self.slope);
        let mut gx = g.clone();
        for (gv, &xv) in gx.iter_mut().zip(x.iter()) {
            if xv <= S::zero() {
                *gv = *gv * a;
            }
        }
        Ok(gx)
    }
}

#[derive(Debug, Clone)]
pub struct Sigmoid<S: Scalar> {
    cache_y: Option<Array2<S>>,
}

impl<S: Scalar> Sigmoid<S> {
    pub fn new() -> Self {
        Sigmoid { cache_y: None }
    }

    fn eval(&self, x: &Array2<S>) -> Array2<S> {
        x.mapv(|v| S::one() / (S::one() + (-v).exp()))
    }

    fn forward(&mut self, x: &Array2<S>) -> Array2<S> {
        let y = self.eval(x);
        self.cache_y = Some(y.clone());
        y
    }

    fn backward(&mut self, g: &Array2<S>) -> Result<Array2<S>> {
        let y = self
            .cache_y
            .as_ref()
            .ok_or_else(|| not_forwarded("Sigmoid"))?;
        let one = S::one();
        let mut gx = g.clone();
        for (gv, &yv) in gx.iter_mut().zip(y.iter()) {
            *gv = *gv * yv * (one - yv);
        }
        Ok(gx)
    }
}

impl<S: Scalar> Default for Sigmoid<S> {
    fn default() -> Self {
        Self::new()
    }
}

/// 1D convolution over `(channels, length)` rows via im2col + matmul.
/// Weights are `(out_ch, in_ch * kernel)`.
#[derive(Debug, Clone)]
pub struct Conv1d<S: Scalar> {
    pub in_ch: usize,
    pub out_ch: usize,
    pub len: usize,
    pub kernel: usize,
    pub stride: usize,
    pub pad_l: usize,
    pub pad_r: usize,
    pub w: Array2<S>,
    pub b: Array1<S>,
    pub gw: Array2<S>,
    pub gb: Array1<S>,
    cache_cols: Option<Vec<Array2<S>>>,
}

pub const CONV_KERNEL: usize = 4;

impl<S: Scalar> Conv1d<S> {
    pub fn new(
        in_ch: usize,
        out_ch: usize,
        len: usize,
        kernel: usize,
        stride: usize,
        pad_l: usize,
        pad_r: usize,
    ) -> Self {
        assert!(stride >= 1 && kernel >= 1 && len >= 1);
        assert!(
            len + pad_l + pad_r >= kernel,
            "padded input shorter than kernel"
        );
        Conv1d {
            in_ch,
            out_ch,
            len,
            kernel,
            stride,
            pad_l,
            pad_r,
            w: Array2::zeros((out_ch, in_ch * kernel)),
            b: Array1::zeros(out_ch),
            gw: Array2::zeros((out_ch, in_ch * kernel)),
            gb: Array1::zeros(out_ch),
            cache_cols: None,
        }
    }

    pub fn out_len(&self) -> usize {
        (self.len + self.pad_l + self.pad_r - self.kernel) / self.stride + 1
    }

    /// col[(ic * k + j, t)] = x[ic, t * stride + j - pad_l] (zero outside).
    fn im2col(&self, row: &[S]) -> Array2<S> {
        let lo = self.out_len();
        let mut col = Array2::<S>::zeros((self.in_ch * self.kernel, lo));
        for ic in 0..self.in_ch {
            let x = &row[ic * self.len..(ic + 1) * self.len];
            for j in 0..self.kernel {
                for t in 0..lo {
                    let u = (t * self.stride + j) as isize - self.pad_l as isize;
                    if u >= 0 && (u as usize) < self.len {
                        col[(ic * self.kernel + j, t)] = x[u as usize];
                    }
                }
            }
        }
        col
    }

    fn apply(&self, x: &Array2<S>, cols_out: Option<&mut Vec<Array2<S>>>) -> Array2<S> {
        let lo = self.out_len();
        let batch = x.nrows();
        let mut y = Array2::<S>::zeros((batch, self.out_ch * lo));
        let mut cols = cols_out;
        for (bi, row) in x.rows().into_iter().enumerate() {
            let row = row.as_slice().expect("standard layout");
            let col = self.im2col(row);
            let out = self.w.dot(&col);
            let yrow = y.row_mut(bi).into_slice().expect("standard layout");
            for oc in 0..self.out_ch {
                for t in 0..lo {
                    yrow[oc * lo + t] = out[(oc, t)] + self.b[oc];
                }
            }
            if let Some(cs) = cols.as_deref_mut() {
                cs.push(col);
            }
        }
        y
    }

    fn eval(&self, x: &Array2<S>) -> Array2<S> {
        self.apply(x, None)
    }

    fn forward(&mut self, x: &Array2<S>) -> Array2<S> {
        let mut cols = Vec::with_capacity(x.nrows());
        let y = self.apply(x, Some(&mut cols));
        self.cache_cols = Some(cols);
        y
    }

    fn backward(&mut self, g: &Array2<S>) -> Result<Array2<S>> {
        let cols = self
            .cache_cols
            .as_ref()
            .ok_or_else(|| not_forwarded("Conv1d"))?;
        let lo = self.out_len();
        let batch = g.nrows();
        self.gw.fill(S::zero());
        self.gb.fill(S::zero());
        let mut gx = Array2::<S>::zeros((batch, self.in_ch * self.len));
        for bi in 0..batch {
            let grow = g.row(bi);
            let grow = grow.as_slice().expect("standard layout");
            let gy =
                ndarray::ArrayView2::from_shape((self.out_ch, lo), grow).expect("shape checked");
            self.gw = &self.gw + &gy.dot(&cols[bi].t());
            for oc in 0..self.out_ch {
                for t in 0..lo {
                    self.gb[oc] += gy[(oc, t)];
                }
            }
            // dcol = W^T gy, scattered back to input positions.
            let dcol = self.w.t().dot(&gy);
            let gxrow = gx.row_mut(bi).into_slice().expect("standard layout");
            for ic in 0..self.in_ch {
                for j in 0..self.kernel {
                    for t in 0..lo {
                        let u = (t * self.stride + j) as isize - self.pad_l as isize;
                        if u >= 0 && (u as usize) < self.len {
                            gxrow[ic * self.len + u as usize] +=
                                dcol[(ic * self.kernel + j, t)];
                        }
                    }
                }
            }
        }
        Ok(gx)
    }
}

/// Transposed 1D convolution (the exact adjoint of [`Conv1d`] with the same
/// kernel tensor). Weights are `(in_ch, out_ch * kernel)`, so a `Conv1d`
/// weight matrix reinterpreted with swapped channel roles drives the adjoint
/// map directly.
#[derive(Debug, Clone)]
pub struct TransposedConv1d<S: Scalar> {
    pub in_ch: usize,
    pub out_ch: usize,
    pub len: usize,
    pub kernel: usize,
    pub stride: usize,
    pub pad_l: usize,
    pub pad_r: usize,
    pub w: Array2<S>,
    pub b: Array1<S>,
    pub gw: Array2<S>,
    pub gb: Array1<S>,
    cache_x: Option<Array2<S>>,
}

impl<S: Scalar> TransposedConv1d<S> {
    pub fn new(
        in_ch: usize,
        out_ch: usize,
        len: usize,
        kernel: usize,
        stride: usize,
        pad_l: usize,
        pad_r: usize,
    ) -> Self {
        assert!(stride >= 1 && kernel >= 1 && len >= 1);
        let full = (len - 1) * stride + kernel;
        assert!(full > pad_l + pad_r, "padding consumes the whole output");
        TransposedConv1d {
            in_ch,
            out_ch,
            len,
            kernel,
            stride,
            pad_l,
            pad_r,
            w: Array2::zeros((in_ch, out_ch * kernel)),
            b: Array1::zeros(out_ch),
            gw: Array2::zeros((in_ch, out_ch * kernel)),
            gb: Array1::zeros(out_ch),
            cache_x: None,
        }
    }

    pub fn out_len(&self) -> usize {
        (self.len - 1) * self.stride + self.kernel - self.pad_l - self.pad_r
    }

    fn eval(&self, x: &Array2<S>) -> Array2<S> {
        let lo = self.out_len();
        let batch = x.nrows();
        let mut y = Array2::<S>::zeros((batch, self.out_ch * lo));
        for (bi, row) in x.rows().into_iter().enumerate() {
            let row = row.as_slice().expect("standard layout");
            let xv = ndarray::ArrayView2::from_shape((self.in_ch, self.len), row)
                .expect("shape checked");
            // cols[(oc * k + j, t)] accumulates all kernel taps, then gets
            // scattered to output position t * stride + j - pad_l.
            let cols = self.w.t().dot(&xv);
            let yrow = y.row_mut(bi).into_slice().expect("standard layout");
            for oc in 0..self.out_ch {
                for t in 0..lo {
                    yrow[oc * lo + t] = self.b[oc];
                }
                for j in 0..self.kernel {
                    for t in 0..self.len {
                        let u = (t * self.stride + j) as isize - self.pad_l as isize;
                        if u >= 0 && (u as usize) < lo {
                            yrow[oc * lo + u as usize] += cols[(oc * self.kernel + j, t)];
                        }
                    }
                }
            }
        }
        y
    }

    fn forward(&mut self, x: &Array2<S>) -> Array2<S> {
        self.cache_x = Some(x.clone());
        self.eval(x)
    }

    fn backward(&mut self, g: &Array2<S>) -> Result<Array2<S>> {
        let x = self
            .cache_x
            .as_ref()
            .ok_or_else(|| not_forwarded("TransposedConv1d"))?;
        let lo = self.out_len();
        let batch = g.nrows();
        self.gw.fill(S::zero());
        self.gb.fill(S::zero());
        let mut gx = Array2::<S>::zeros((batch, self.in_ch * self.len));
        for bi in 0..batch {
            let grow = g.row(bi);
            let grow = grow.as_slice().expect("standard layout");
            let gy =
                ndarray::ArrayView2::from_shape((self.out_ch, lo), grow).expect("shape checked");
            // Gather gy back into column space: the exact transpose of the
            // forward scatter.
            let mut gcols = Array2::<S>::zeros((self.out_ch * self.kernel, self.len));
            for oc in 0..self.out_ch {
                for j in 0..self.kernel {
                    for t in 0..self.len {
                        let u = (t * self.stride + j) as isize - self.pad_l as isize;
                        if u >= 0 && (u as usize) < lo {
                            gcols[(oc * self.kernel + j, t)] = gy[(oc, u as usize)];
                        }
                    }
                }
                for u in 0..lo {
                    self.gb[oc] += gy[(oc, u)];
                }
            }
            let xrow = x.row(bi);
            let xrow = xrow.as_slice().expect("standard layout");
            let xv = ndarray::ArrayView2::from_shape((self.in_ch, self.len), xrow)
                .expect("shape checked");
            self.gw = &self.gw + &xv.dot(&gcols.t());
            let gxrow = gx.row_mut(bi).into_slice().expect("standard layout");
            let gin = self.w.dot(&gcols);
            for ic in 0..self.in_ch {
                for t in 0..self.len {
                    gxrow[ic * self.len + t] = gin[(ic, t)];
                }
            }
        }
        Ok(gx)
    }
}

/// Non-overlapping 1D max pooling per channel.
#[derive(Debug, Clone)]
pub struct MaxPool1d<S: Scalar> {
    pub ch: usize,
    pub len: usize,
    pub kernel: usize,
    cache_arg: Option<Vec<usize>>,
    _marker: std::marker::PhantomData<S>,
}

pub const MAXPOOL_KERNEL: usize = 2;

impl<S: Scalar> MaxPool1d<S> {
    pub fn new(ch: usize, len: usize, kernel: usize) -> Self {
        assert!(kernel >= 1);
        assert!(
            len % kernel == 0,
            "pooling requires the length to divide evenly"
        );
        MaxPool1d {
            ch,
            len,
            kernel,
            cache_arg: None,
            _marker: std::marker::PhantomData,
        }
    }

    fn out_len(&self) -> usize {
        self.len / self.kernel
    }

    fn apply(&self, x: &Array2<S>, args: Option<&mut Vec<usize>>) -> Array2<S> {
        let lo = self.out_len();
        let batch = x.nrows();
        let mut y = Array2::<S>::zeros((batch, self.ch * lo));
        let mut args = args;
        for (bi, row) in x.rows().into_iter().enumerate() {
            let row = row.as_slice().expect("standard layout");
            let yrow = y.row_mut(bi).into_slice().expect("standard layout");
            for c in 0..self.ch {
                for t in 0..lo {
                    let base = c * self.len + t * self.kernel;
                    let mut best = base;
                    for j in 1..self.kernel {
                        if row[base + j] > row[best] {
                            best = base + j;
                        }
                    }
                    yrow[c * lo + t] = row[best];
                    if let Some(a) = args.as_deref_mut() {
                        a.push(best);
                    }
                }
            }
        }
        y
    }

    fn eval(&self, x: &Array2<S>) -> Array2<S> {
        self.apply(x, None)
    }

    fn forward(&mut self, x: &Array2<S>) -> Array2<S> {
        let mut args = Vec::with_capacity(x.nrows() * self.ch * self.out_len());
        let y = self.apply(x, Some(&mut args));
        self.cache_arg = Some(args);
        y
    }

    fn backward(&mut self, g: &Array2<S>) -> Result<Array2<S>> {
        let args = self
            .cache_arg
            .as_ref()
            .ok_or_else(|| not_forwarded("MaxPool1d"))?;
        let lo = self.out_len();
        let batch = g.nrows();
        let mut gx = Array2::<S>::zeros((batch, self.ch * self.len));
        let per_row = self.ch * lo;
        for bi in 0..batch {
            let grow = g.row(bi);
            let grow = grow.as_slice().expect("standard layout");
            let gxrow = gx.row_mut(bi).into_slice().expect("standard layout");
            for p in 0..per_row {
                gxrow[args[bi * per_row + p]] += grow[p];
            }
        }
        Ok(gx)
    }
}
