//! Dense f64 layers with hand-written backward passes.

pub mod activation;
pub mod conv;
pub mod dense;
pub mod embedding;
pub mod gradcheck;
pub mod loss;
pub mod optim;
pub mod pool;
pub mod tensor;

pub use activation::{relu_backward, relu_forward};
pub use conv::{conv1d_backward, conv1d_forward, ConvGrads};
pub use dense::{dense_backward, dense_forward, DenseGrads};
pub use embedding::{embedding_backward, embedding_forward, SparseRows, PAD_ROW};
pub use gradcheck::{grad_check, relative_error, Differentiable, FnFragment, GradCheckOptions, GradCheckReport};
pub use loss::{softmax, softmax_cross_entropy, LossOutput};
pub use optim::{adam_update, available_optimizers, create_optimizer, Adam, Optimizer, OptimizerConfig, Param, SgdMomentum};
pub use pool::{maxpool1d_backward, maxpool1d_forward, PoolOutput};
pub use tensor::Tensor;

#[derive(Debug, thiserror::Error)]
pub enum NnError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("index {index} out of range (bound {bound})")]
    Index { index: usize, bound: usize },
    #[error("unknown optimizer `{0}`")]
    UnknownOptimizer(String),
}
