use super::tensor::{axpy, Tensor};
use super::NnError;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvGrads {
    pub dx: Tensor,
    pub dk: Tensor,
    pub db: Tensor,
}

fn check(x: &Tensor, k: &Tensor) -> Result<(usize, usize, usize, usize, usize), NnError> {
    let (batch, steps, cin) = x.dims3("conv1d input")?;
    let (width, k_cin, filters) = k.dims3("conv1d kernel")?;
    if k_cin != cin {
        return Err(NnError::Shape(format!("conv1d: input channels {cin}, kernel channels {k_cin}")));
    }
    if width == 0 || steps < width {
        return Err(NnError::Shape(format!("conv1d: sequence length {steps} shorter than kernel width {width}")));
    }
    Ok((batch, steps, cin, width, filters))
}

/// Valid, stride-1 cross-correlation:
/// `out[b,t,f] = (Σ_w Σ_c x[b,t+w,c]·K[w,c,f]) + bias[f]`, summed in (w, c) order.
pub fn conv1d_forward(x: &Tensor, k: &Tensor, bias: &Tensor) -> Result<Tensor, NnError> {
    let (batch, steps, cin, width, filters) = check(x, k)?;
    if bias.dims1("conv1d bias")? != filters {
        return Err(NnError::Shape(format!("conv1d: {filters} filters, bias has {}", bias.len())));
    }
    let out_steps = steps - width + 1;
    let mut out = Tensor::zeros(&[batch, out_steps, filters]);
    let (xd, kd, bd) = (x.data(), k.data(), bias.data());
    for (bt, acc) in out.data_mut().chunks_exact_mut(filters).enumerate() {
        let (b, t) = (bt / out_steps, bt % out_steps);
        // The window x[b, t..t+width, :] is contiguous and lines up with K flattened over (w, c).
        let window = &xd[(b * steps + t) * cin..(b * steps + t + width) * cin];
        for (wc, &xv) in window.iter().enumerate() {
            if xv != 0.0 {
                axpy(xv, &kd[wc * filters..(wc + 1) * filters], acc);
            }
        }
        for (v, bv) in acc.iter_mut().zip(bd) {
            *v += bv;
        }
    }
    Ok(out)
}

pub fn conv1d_backward(x: &Tensor, k: &Tensor, grad_out: &Tensor) -> Result<ConvGrads, NnError> {
    let (batch, steps, cin, width, filters) = check(x, k)?;
    let out_steps = steps - width + 1;
    if grad_out.shape() != [batch, out_steps, filters] {
        return Err(NnError::Shape(format!(
            "conv1d backward: grad shape {:?}, expected [{batch}, {out_steps}, {filters}]",
            grad_out.shape()
        )));
    }
    // K transposed to [w, f, c] so the input gradient is an axpy over channels.
    let kd = k.data();
    let mut kt = vec![0.0; kd.len()];
    for w in 0..width {
        for c in 0..cin {
            for f in 0..filters {
                kt[(w * filters + f) * cin + c] = kd[(w * cin + c) * filters + f];
            }
        }
    }
    let mut dx = Tensor::zeros(&[batch, steps, cin]);
    let mut dk = Tensor::zeros(&[width, cin, filters]);
    let mut db = Tensor::zeros(&[filters]);
    let (xd, gd) = (x.data(), grad_out.data());
    for b in 0..batch {
        for t in 0..out_steps {
            let g = &gd[(b * out_steps + t) * filters..(b * out_steps + t + 1) * filters];
            for (d, gv) in db.data_mut().iter_mut().zip(g) {
                *d += gv;
            }
            let base = (b * steps + t) * cin;
            let window = &xd[base..base + width * cin];
            let dkd = dk.data_mut();
            for (wc, &xv) in window.iter().enumerate() {
                if xv != 0.0 {
                    axpy(xv, g, &mut dkd[wc * filters..(wc + 1) * filters]);
                }
            }
            let dxw = &mut dx.data_mut()[base..base + width * cin];
            for w in 0..width {
                let dxrow = &mut dxw[w * cin..(w + 1) * cin];
                for (f, &gv) in g.iter().enumerate() {
                    if gv != 0.0 {
                        axpy(gv, &kt[(w * filters + f) * cin..(w * filters + f + 1) * cin], dxrow);
                    }
                }
            }
        }
    }
    Ok(ConvGrads { dx, dk, db })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn difference_kernel() {
        let x = Tensor::from_vec(&[1, 5, 1], vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let k = Tensor::from_vec(&[3, 1, 1], vec![1.0, 0.0, -1.0]).unwrap();
        let b = Tensor::zeros(&[1]);
        assert_eq!(conv1d_forward(&x, &k, &b).unwrap().data(), &[-2.0, -2.0, -2.0]);
    }

    #[test]
    fn delta_kernel_is_identity() {
        let x = Tensor::from_vec(&[1, 4, 1], vec![3.0, -1.0, 0.5, 2.0]).unwrap();
        let k = Tensor::from_vec(&[1, 1, 1], vec![1.0]).unwrap();
        let y = conv1d_forward(&x, &k, &Tensor::zeros(&[1])).unwrap();
        assert_eq!(y.data(), x.data());
    }

    #[test]
    fn too_short_sequence_is_an_error() {
        let x = Tensor::zeros(&[1, 2, 1]);
        let k = Tensor::zeros(&[3, 1, 1]);
        assert!(conv1d_forward(&x, &k, &Tensor::zeros(&[1])).is_err());
    }
}
