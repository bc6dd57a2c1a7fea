//! Layer stack with shape validation, a training path and a pure inference
//! path.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::nn::layer::{Layer, LayerSpec};
use crate::{CoreError, Result, Scalar};

#[derive(Debug, Clone)]
pub struct Model<S: Scalar> {
    pub layers: Vec<Layer<S>>,
    in_dim: usize,
    out_dim: usize,
}

impl<S: Scalar> Model<S> {
    /// Build from specs, validating the shape chain; `in_dim` anchors
    /// shape-agnostic prefixes (activations before the first sized layer).
    pub fn from_specs(in_dim: usize, specs: &[LayerSpec]) -> Result<Self> {
        let layers: Vec<Layer<S>> = specs.iter().map(Layer::from_spec).collect();
        let mut dim = in_dim;
        for (i, layer) in layers.iter().enumerate() {
            if let Some(expected) = layer.in_dim() {
                if expected != dim {
                    return Err(CoreError::Shape {
                        layer: i,
                        expected: expected.to_string(),
                        got: dim.to_string(),
                    });
                }
            }
            dim = layer.out_dim(dim);
        }
        Ok(Model {
            layers,
            in_dim,
            out_dim: dim,
        })
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn specs(&self) -> Vec<LayerSpec> {
        self.layers.iter().map(|l| l.spec()).collect()
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.persisted_tensors().iter().map(|t| t.len()).sum::<usize>())
            .sum()
    }

    /// Deterministic Kaiming initialization of every weighted layer.
    pub fn init(&mut self, seed: u64) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        for layer in &mut self.layers {
            layer.init_weights(&mut rng);
        }
    }

    fn check_input(&self, x: &Array2<S>) -> Result<()> {
        if x.ncols() != self.in_dim {
            return Err(CoreError::Shape {
                layer: 0,
                expected: self.in_dim.to_string(),
                got: x.ncols().to_string(),
            });
        }
        Ok(())
    }

    /// Training-mode forward: caches activations, updates batch-norm
    /// running statistics.
    pub fn forward(&mut self, x: &Array2<S>) -> Result<Array2<S>> {
        self.check_input(x)?;
        let mut cur = x.clone();
        for layer in &mut self.layers {
            cur = layer.forward(&cur);
        }
        Ok(cur)
    }

    /// Eval-mode forward: pure, uses running statistics, thread-safe.
    pub fn infer(&self, x: &Array2<S>) -> Result<Array2<S>> {
        self.check_input(x)?;
        let mut cur = x.clone();
        for layer in &self.layers {
            cur = layer.infer(&cur);
        }
        Ok(cur)
    }

    /// Backpropagate the loss gradient; fills every layer's parameter
    /// gradients and returns the input gradient.
    pub fn backward(&mut self, grad_out: &Array2<S>) -> Result<Array2<S>> {
        let mut g = grad_out.clone();
        for layer in self.layers.iter_mut().rev() {
            g = layer.backward(&g)?;
        }
        Ok(g)
    }

    /// All (parameter, gradient) slices in a stable order.
    pub fn params_mut(&mut self) -> Vec<(&mut [S], &mut [S])> {
        self.layers.iter_mut().flat_map(|l| l.params_mut()).collect()
    }

    /// Snapshot of every persisted tensor (parameters + running stats).
    pub fn snapshot(&self) -> Vec<Vec<S>> {
        self.layers
            .iter()
            .flat_map(|l| l.persisted_tensors().into_iter().map(|t| t.to_vec()))
            .collect()
    }

    pub fn restore(&mut self, snapshot: &[Vec<S>]) {
        let mut it = snapshot.iter();
        for layer in &mut self.layers {
            for tensor in layer.persisted_tensors_mut() {
                let saved = it.next().expect("snapshot matches architecture");
                tensor.copy_from_slice(saved);
            }
        }
        assert!(it.next().is_none(), "snapshot matches architecture");
    }

    pub fn all_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.persisted_tensors().iter().all(|t| t.iter().all(|v| v.is_finite())))
    }
}
