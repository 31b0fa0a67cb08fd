use super::tensor::{axpy, dot, Tensor};
use super::NnError;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseGrads {
    pub dx: Tensor,
    pub dw: Tensor,
    pub db: Tensor,
}

/// `y = x W + b` for `x: [B, I]`, `W: [I, O]`, `b: [O]`.
pub fn dense_forward(x: &Tensor, w: &Tensor, b: &Tensor) -> Result<Tensor, NnError> {
    let (batch, inputs) = x.dims2("dense input")?;
    let (w_in, outputs) = w.dims2("dense weight")?;
    let b_out = b.dims1("dense bias")?;
    if w_in != inputs {
        return Err(NnError::Shape(format!("dense: input axis 1 is {inputs}, weight axis 0 is {w_in}")));
    }
    if b_out != outputs {
        return Err(NnError::Shape(format!("dense: weight axis 1 is {outputs}, bias axis 0 is {b_out}")));
    }
    let mut y = Tensor::zeros(&[batch, outputs]);
    let (xd, wd) = (x.data(), w.data());
    for (row, yrow) in y.data_mut().chunks_exact_mut(outputs).enumerate() {
        for i in 0..inputs {
            let xv = xd[row * inputs + i];
            if xv != 0.0 {
                axpy(xv, &wd[i * outputs..(i + 1) * outputs], yrow);
            }
        }
        for (v, bias) in yrow.iter_mut().zip(b.data()) {
            *v += bias;
        }
    }
    Ok(y)
}

/// Exact gradients of the dense layer given `dL/dy`.
pub fn dense_backward(x: &Tensor, w: &Tensor, grad_out: &Tensor) -> Result<DenseGrads, NnError> {
    let (batch, inputs) = x.dims2("dense input")?;
    let (_, outputs) = w.dims2("dense weight")?;
    if grad_out.shape() != [batch, outputs] {
        return Err(NnError::Shape(format!(
            "dense backward: grad shape {:?}, expected [{batch}, {outputs}]",
            grad_out.shape()
        )));
    }
    let mut dx = Tensor::zeros(&[batch, inputs]);
    let mut dw = Tensor::zeros(&[inputs, outputs]);
    let mut db = Tensor::zeros(&[outputs]);
    let (xd, wd, gd) = (x.data(), w.data(), grad_out.data());
    for row in 0..batch {
        let g = &gd[row * outputs..(row + 1) * outputs];
        for (d, gv) in db.data_mut().iter_mut().zip(g) {
            *d += gv;
        }
        let dxrow = &mut dx.data_mut()[row * inputs..(row + 1) * inputs];
        for i in 0..inputs {
            dxrow[i] = dot(&wd[i * outputs..(i + 1) * outputs], g);
        }
        let dwd = dw.data_mut();
        for i in 0..inputs {
            let xv = xd[row * inputs + i];
            if xv != 0.0 {
                axpy(xv, g, &mut dwd[i * outputs..(i + 1) * outputs]);
            }
        }
    }
    Ok(DenseGrads { dx, dw, db })
}
