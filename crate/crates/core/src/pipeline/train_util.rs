//! Standard architectures used across the pipeline: Dense/BatchNorm/
//! LeakyRelu stacks with a Sigmoid head for classifiers, a linear head for
//! the regressor, and the convolutional autoencoder for the denoiser.

use crate::nn::{LayerSpec, Model, BATCHNORM_EPS, BATCHNORM_MOMENTUM, LEAKY_RELU_SLOPE};
use crate::{CoreError, Result};

fn dense_block(specs: &mut Vec<LayerSpec>, in_dim: usize, out_dim: usize) {
    specs.push(LayerSpec::Dense { in_dim, out_dim });
    specs.push(LayerSpec::BatchNorm1d {
        features: out_dim,
        eps: BATCHNORM_EPS,
        momentum: BATCHNORM_MOMENTUM,
    });
    specs.push(LayerSpec::LeakyRelu {
        slope: LEAKY_RELU_SLOPE,
    });
}

/// K-way classifier: hidden Dense+BatchNorm+LeakyRelu blocks, then a Dense
/// layer into per-class Sigmoid scores.
pub fn dense_classifier(in_dim: usize, hidden: &[usize], classes: usize) -> Result<Model<f32>> {
    if classes == 0 || in_dim == 0 {
        return Err(CoreError::Config("classifier dims must be positive".into()));
    }
    let mut specs = Vec::new();
    let mut dim = in_dim;
    for &h in hidden {
        dense_block(&mut specs, dim, h);
        dim = h;
    }
    specs.push(LayerSpec::Dense {
        in_dim: dim,
        out_dim: classes,
    });
    specs.push(LayerSpec::Sigmoid);
    Model::from_specs(in_dim, &specs)
}

/// Two-output regression head (linear outputs over normalized targets).
pub fn dense_regressor(in_dim: usize, hidden: &[usize]) -> Result<Model<f32>> {
    if in_dim == 0 {
        return Err(CoreError::Config("regressor input dim must be positive".into()));
    }
    let mut specs = Vec::new();
    let mut dim = in_dim;
    for &h in hidden {
        dense_block(&mut specs, dim, h);
        dim = h;
    }
    specs.push(LayerSpec::Dense {
        in_dim: dim,
        out_dim: 2,
    });
    Model::from_specs(in_dim, &specs)
}

/// Convolutional autoencoder over 1D windows: per encoder stage a
/// same-length convolution (kernel 4, pads 1/2), LeakyRelu and a 2x max
/// pool; the decoder mirrors with stride-2 transposed convolutions (kernel
/// 4, pads 1/1) and ends in a Sigmoid.
pub fn conv_denoiser(window: usize, channels: &[usize]) -> Result<Model<f32>> {
    if channels.is_empty() {
        return Err(CoreError::Config("denoiser needs at least one stage".into()));
    }
    let div = 1usize << channels.len();
    if window == 0 || window % div != 0 {
        return Err(CoreError::Config(format!(
            "denoiser window {window} must be a positive multiple of {div}"
        )));
    }
    let mut specs = Vec::new();
    let mut len = window;
    let mut prev_ch = 1usize;
    for &c in channels {
        specs.push(LayerSpec::Conv1d {
            in_ch: prev_ch,
            out_ch: c,
            len,
            kernel: 4,
            stride: 1,
            pad_l: 1,
            pad_r: 2,
        });
        specs.push(LayerSpec::LeakyRelu {
            slope: LEAKY_RELU_SLOPE,
        });
        specs.push(LayerSpec::MaxPool1d {
            ch: c,
            len,
            kernel: 2,
        });
        len /= 2;
        prev_ch = c;
    }
    for i in (0..channels.len()).rev() {
        let out_ch = if i == 0 { 1 } else { channels[i - 1] };
        specs.push(LayerSpec::TransposedConv1d {
            in_ch: channels[i],
            out_ch,
            len,
            kernel: 4,
            stride: 2,
            pad_l: 1,
            pad_r: 1,
        });
        len *= 2;
        if i > 0 {
            specs.push(LayerSpec::LeakyRelu {
                slope: LEAKY_RELU_SLOPE,
            });
        }
    }
    specs.push(LayerSpec::Sigmoid);
    Model::from_specs(window, &specs)
}
