//! Self-contained feed-forward / 1D-convolutional network engine: layers,
//! losses, a bounded adaptive-moment optimizer, a deterministic training
//! loop, finite-difference gradient checking and model persistence.

mod gradcheck;
mod io;
mod layer;
mod loss;
mod model;
mod opt;
mod train;

pub use gradcheck::{check_gradients, GradCheckReport, GRADCHECK_STEP, GRADCHECK_TOL};
pub use io::{load_model, load_model_for, save_model, ReuseKey, MODEL_MAGIC, MODEL_VERSION};
pub use layer::{
    BatchNorm1d, Conv1d, Dense, Layer, LayerSpec, LeakyRelu, MaxPool1d, Sigmoid,
    TransposedConv1d, BATCHNORM_EPS, BATCHNORM_MOMENTUM, CONV_KERNEL, LEAKY_RELU_SLOPE,
    MAXPOOL_KERNEL,
};
pub use loss::{loss_value_grad, Loss, BCE_EPS};
pub use model::Model;
pub use opt::{AdaBound, AdaBoundConfig};
pub use train::{
    train, EpochStats, TrainConfig, TrainReport, DEFAULT_LR_DECAY, DEFAULT_LR_INITIAL,
    LR_DECAY_RANGE,
};
