use super::tensor::Tensor;

pub fn relu_forward(x: &Tensor) -> Tensor {
    let mut y = x.clone();
    y.data_mut().iter_mut().for_each(|v| *v = v.max(0.0));
    y
}

/// Gradient through ReLU given the pre-activation; the subgradient at 0 is 0.
pub fn relu_backward(pre: &Tensor, grad_out: &Tensor) -> Tensor {
    let mut dx = grad_out.clone();
    for (d, x) in dx.data_mut().iter_mut().zip(pre.data()) {
        if *x <= 0.0 {
            *d = 0.0;
        }
    }
    dx
}
