use super::tensor::Tensor;
use super::NnError;

#[derive(Debug, Clone, PartialEq)]
pub struct PoolOutput {
    pub out: Tensor,
    /// Flat input index chosen for each output element.
    pub argmax: Vec<usize>,
}

/// Non-overlapping 1-D max pooling over axis 1 of `[B, T, F]`
/// (stride = pool size); trailing frames that do not fill a window are dropped.
pub fn maxpool1d_forward(x: &Tensor, pool: usize) -> Result<PoolOutput, NnError> {
    let (batch, steps, feats) = x.dims3("maxpool input")?;
    if pool == 0 || steps < pool {
        return Err(NnError::Shape(format!("maxpool: sequence length {steps} shorter than pool {pool}")));
    }
    let out_steps = steps / pool;
    let mut out = Tensor::zeros(&[batch, out_steps, feats]);
    let mut argmax = vec![0usize; batch * out_steps * feats];
    let xd = x.data();
    let od = out.data_mut();
    for b in 0..batch {
        for o in 0..out_steps {
            for f in 0..feats {
                let mut best = (b * steps + o * pool) * feats + f;
                for p in 1..pool {
                    let idx = (b * steps + o * pool + p) * feats + f;
                    // Strict comparison keeps the earliest maximum.
                    if xd[idx] > xd[best] {
                        best = idx;
                    }
                }
                let oi = (b * out_steps + o) * feats + f;
                od[oi] = xd[best];
                argmax[oi] = best;
            }
        }
    }
    Ok(PoolOutput { out, argmax })
}

/// Routes each output gradient to the input position that won its window.
pub fn maxpool1d_backward(input_shape: &[usize], argmax: &[usize], grad_out: &Tensor) -> Tensor {
    let mut dx = Tensor::zeros(input_shape);
    let dxd = dx.data_mut();
    for (&i, g) in argmax.iter().zip(grad_out.data()) {
        dxd[i] += g;
    }
    dx
}
