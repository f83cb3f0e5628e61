use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Source coordinate and interpolation weight for each output index
/// (align-corners: first and last samples map onto each other).
fn taps(input: usize, output: usize) -> Vec<(usize, usize, f64)> {
    (0..output)
        .map(|i| {
            let src = if output == 1 {
                0.0
            } else {
                (i * (input - 1)) as f64 / (output - 1) as f64
            };
            let lo = (src.floor() as usize).min(input - 1);
            let hi = (lo + 1).min(input - 1);
            (lo, hi, src - lo as f64)
        })
        .collect()
}

fn dims(image: &Tensor, out_h: usize, out_w: usize) -> Result<(usize, usize, usize)> {
    let &[c, h, w] = image.shape() else {
        return Err(Error::shape(
            "resize_bilinear",
            format!("image must be (c, h, w), got {:?}", image.shape()),
        ));
    };
    if out_h == 0 || out_w == 0 {
        return Err(Error::InvalidArgument("resize target must be at least 1×1".into()));
    }
    Ok((c, h, w))
}

/// Bilinear resize of a `(c, h, w)` image with the align-corners convention.
pub fn resize_bilinear(image: &Tensor, out_h: usize, out_w: usize) -> Result<Tensor> {
    let (c, h, w) = dims(image, out_h, out_w)?;
    let ty = taps(h, out_h);
    let tx = taps(w, out_w);
    let x = image.data();
    let mut out = Vec::with_capacity(c * out_h * out_w);
    for ch in 0..c {
        let plane = &x[ch * h * w..(ch + 1) * h * w];
        for &(y0, y1, fy) in &ty {
            for &(x0, x1, fx) in &tx {
                let top = plane[y0 * w + x0] + fx * (plane[y0 * w + x1] - plane[y0 * w + x0]);
                let bottom = plane[y1 * w + x0] + fx * (plane[y1 * w + x1] - plane[y1 * w + x0]);
                out.push(top + fy * (bottom - top));
            }
        }
    }
    Tensor::new(&[c, out_h, out_w], out)
}

/// Adjoint of [`resize_bilinear`]: spreads output gradients back onto the
/// four source pixels of each tap.
pub fn resize_bilinear_backward(input_shape: &[usize], grad_out: &Tensor) -> Result<Tensor> {
    let &[c, h, w] = input_shape else {
        return Err(Error::shape(
            "resize_bilinear_backward",
            format!("input shape must be (c, h, w), got {input_shape:?}"),
        ));
    };
    let &[gc, out_h, out_w] = grad_out.shape() else {
        return Err(Error::shape(
            "resize_bilinear_backward",
            format!("gradient must be (c, h, w), got {:?}", grad_out.shape()),
        ));
    };
    if gc != c {
        return Err(Error::shape("resize_bilinear_backward", "channel count differs"));
    }
    let ty = taps(h, out_h);
    let tx = taps(w, out_w);
    let mut grad = Tensor::zeros(input_shape);
    let g = grad.data_mut();
    let mut upstream = grad_out.data().iter();
    for ch in 0..c {
        let base = ch * h * w;
        for &(y0, y1, fy) in &ty {
            for &(x0, x1, fx) in &tx {
                let d = *upstream.next().expect("gradient length checked by shape");
                g[base + y0 * w + x0] += d * (1.0 - fy) * (1.0 - fx);
                g[base + y0 * w + x1] += d * (1.0 - fy) * fx;
                g[base + y1 * w + x0] += d * fy * (1.0 - fx);
                g[base + y1 * w + x1] += d * fy * fx;
            }
        }
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_size_is_identity() {
        let img = Tensor::from_fn(&[2, 5, 7], |i| (i as f64 * 0.37).sin());
        assert_eq!(resize_bilinear(&img, 5, 7).unwrap(), img);
    }

    #[test]
    fn constant_stays_constant() {
        let img = Tensor::full(&[1, 4, 4], 0.1);
        let out = resize_bilinear(&img, 9, 3).unwrap();
        assert!(out.data().iter().all(|&v| v == 0.1));
    }

    #[test]
    fn upsample_two_by_two() {
        let img = Tensor::new(&[1, 2, 2], vec![0.0, 2.0, 2.0, 4.0]).unwrap();
        let out = resize_bilinear(&img, 3, 3).unwrap();
        assert_eq!(out.data(), &[0.0, 1.0, 2.0, 1.0, 2.0, 3.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn zero_target_rejected() {
        assert!(resize_bilinear(&Tensor::zeros(&[1, 2, 2]), 0, 2).is_err());
    }
}
