use crate::error::{Error, Result};
use crate::ops::conv::window_output_len;
use crate::tensor::Tensor;

/// Result of a max-pooling pass: pooled values plus, for every output cell,
/// the flat input index that supplied its maximum.
#[derive(Debug, Clone)]
pub struct Pooled {
    pub output: Tensor,
    pub argmax: Vec<usize>,
}

/// Max pooling over `k×k` windows of an NCHW tensor, no padding.
///
/// Ties resolve to the first maximum in row-major window order.
pub fn maxpool2d(input: &Tensor, k: usize, stride: usize) -> Result<Pooled> {
    let &[batch, ch, h, w] = input.shape() else {
        return Err(Error::shape(
            "maxpool2d",
            format!("input must be NCHW, got {:?}", input.shape()),
        ));
    };
    if k == 0 || stride == 0 {
        return Err(Error::InvalidArgument(
            "maxpool2d window and stride must be positive".into(),
        ));
    }
    let out_h = window_output_len(h, k, stride, 0)
        .ok_or_else(|| Error::shape("maxpool2d", format!("window {k} larger than height {h}")))?;
    let out_w = window_output_len(w, k, stride, 0)
        .ok_or_else(|| Error::shape("maxpool2d", format!("window {k} larger than width {w}")))?;

    let x = input.data();
    let mut out = Vec::with_capacity(batch * ch * out_h * out_w);
    let mut argmax = Vec::with_capacity(out.capacity());
    for plane in 0..batch * ch {
        let base = plane * h * w;
        for oy in 0..out_h {
            for ox in 0..out_w {
                let mut best = base + oy * stride * w + ox * stride;
                for ky in 0..k {
                    let row = base + (oy * stride + ky) * w + ox * stride;
                    for idx in row..row + k {
                        if x[idx] > x[best] {
                            best = idx;
                        }
                    }
                }
                out.push(x[best]);
                argmax.push(best);
            }
        }
    }
    Ok(Pooled {
        output: Tensor::new(&[batch, ch, out_h, out_w], out)?,
        argmax,
    })
}

/// Routes each upstream gradient to the input position recorded in `argmax`.
pub fn maxpool2d_backward(input_shape: &[usize], argmax: &[usize], grad_out: &Tensor) -> Result<Tensor> {
    if argmax.len() != grad_out.len() {
        return Err(Error::shape(
            "maxpool2d_backward",
            format!("{} argmax entries for {} gradients", argmax.len(), grad_out.len()),
        ));
    }
    let mut grad = Tensor::zeros(input_shape);
    let len = grad.len();
    let g = grad.data_mut();
    for (&idx, &dy) in argmax.iter().zip(grad_out.data()) {
        if idx >= len {
            return Err(Error::shape(
                "maxpool2d_backward",
                format!("argmax index {idx} outside input of {len}"),
            ));
        }
        g[idx] += dy;
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn picks_window_maximum() {
        let x = Tensor::new(&[1, 1, 2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let p = maxpool2d(&x, 2, 2).unwrap();
        assert_eq!(p.output.data(), &[4.0]);
        let g = maxpool2d_backward(x.shape(), &p.argmax, &Tensor::full(&[1, 1, 1, 1], 7.0)).unwrap();
        assert_eq!(g.data(), &[0.0, 0.0, 0.0, 7.0]);
    }

    #[test]
    fn constant_input_stays_constant_and_ties_go_first() {
        let x = Tensor::full(&[1, 2, 4, 4], 0.5);
        let p = maxpool2d(&x, 2, 2).unwrap();
        assert!(p.output.data().iter().all(|&v| v == 0.5));
        assert_eq!(p.argmax[0], 0);
        assert_eq!(p.argmax[1], 2);
        assert_eq!(p.argmax[4], 16);
    }

    #[test]
    fn window_larger_than_input_fails() {
        let x = Tensor::zeros(&[1, 1, 3, 3]);
        assert!(maxpool2d(&x, 4, 1).is_err());
    }

    #[test]
    fn odd_extent_drops_trailing_row() {
        let x = Tensor::from_fn(&[1, 1, 5, 5], |i| i as f64);
        let p = maxpool2d(&x, 2, 2).unwrap();
        assert_eq!(p.output.shape(), &[1, 1, 2, 2]);
        assert_eq!(p.output.data(), &[6.0, 8.0, 16.0, 18.0]);
    }
}
