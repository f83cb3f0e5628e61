use crate::error::{Error, Result};
use crate::ops::gemm::{gemm, Layout};
use crate::tensor::Tensor;

/// Weights and geometry of a 2-D convolution.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvParams {
    /// `(out_ch, in_ch, kh, kw)`.
    pub weight: Tensor,
    /// `(out_ch)`.
    pub bias: Tensor,
    pub stride: usize,
    pub padding: usize,
}

/// Gradients of a convolution with respect to each of its arguments.
#[derive(Debug, Clone)]
pub struct ConvGrads {
    pub input: Tensor,
    pub weight: Tensor,
    pub bias: Tensor,
}

#[derive(Debug, Clone, Copy)]
struct Geometry {
    batch: usize,
    in_ch: usize,
    height: usize,
    width: usize,
    out_ch: usize,
    kh: usize,
    kw: usize,
    stride: usize,
    pad: usize,
    out_h: usize,
    out_w: usize,
}

impl Geometry {
    fn patch_len(&self) -> usize {
        self.in_ch * self.kh * self.kw
    }

    fn positions(&self) -> usize {
        self.out_h * self.out_w
    }
}

/// Output extent of a sliding window, or `None` if the window does not fit.
pub fn window_output_len(input: usize, kernel: usize, stride: usize, pad: usize) -> Option<usize> {
    let padded = pad.checked_mul(2)?.checked_add(input)?;
    if stride == 0 || kernel == 0 || kernel > padded {
        return None;
    }
    Some((padded - kernel) / stride + 1)
}

fn geometry(input: &Tensor, params: &ConvParams) -> Result<Geometry> {
    let &[batch, in_ch, height, width] = input.shape() else {
        return Err(Error::shape(
            "conv2d",
            format!("input must be NCHW, got {:?}", input.shape()),
        ));
    };
    let &[out_ch, w_in, kh, kw] = params.weight.shape() else {
        return Err(Error::shape(
            "conv2d",
            format!("weight must be (out, in, kh, kw), got {:?}", params.weight.shape()),
        ));
    };
    if w_in != in_ch {
        return Err(Error::shape(
            "conv2d",
            format!("in_channels: input has {in_ch}, weight expects {w_in}"),
        ));
    }
    if params.bias.shape() != [out_ch] {
        return Err(Error::shape(
            "conv2d",
            format!("bias: expected [{out_ch}], got {:?}", params.bias.shape()),
        ));
    }
    if params.stride == 0 {
        return Err(Error::InvalidArgument("conv2d stride must be positive".into()));
    }
    let out_h = window_output_len(height, kh, params.stride, params.padding).ok_or_else(|| {
        Error::shape(
            "conv2d",
            format!("height: kernel {kh} exceeds padded input {}", height + 2 * params.padding),
        )
    })?;
    let out_w = window_output_len(width, kw, params.stride, params.padding).ok_or_else(|| {
        Error::shape(
            "conv2d",
            format!("width: kernel {kw} exceeds padded input {}", width + 2 * params.padding),
        )
    })?;
    Ok(Geometry {
        batch,
        in_ch,
        height,
        width,
        out_ch,
        kh,
        kw,
        stride: params.stride,
        pad: params.padding,
        out_h,
        out_w,
    })
}

/// Unfold one image `(c, h, w)` into a `(c·kh·kw) × (out_h·out_w)` matrix.
fn im2col(g: &Geometry, image: &[f64], col: &mut [f64]) {
    let positions = g.positions();
    for c in 0..g.in_ch {
        let plane = &image[c * g.height * g.width..(c + 1) * g.height * g.width];
        for ki in 0..g.kh {
            for kj in 0..g.kw {
                let row = (c * g.kh + ki) * g.kw + kj;
                let dst = &mut col[row * positions..(row + 1) * positions];
                for oy in 0..g.out_h {
                    let y = (oy * g.stride + ki) as isize - g.pad as isize;
                    let out_row = &mut dst[oy * g.out_w..(oy + 1) * g.out_w];
                    if y < 0 || y >= g.height as isize {
                        out_row.fill(0.0);
                        continue;
                    }
                    let src = &plane[y as usize * g.width..(y as usize + 1) * g.width];
                    for (ox, v) in out_row.iter_mut().enumerate() {
                        let x = (ox * g.stride + kj) as isize - g.pad as isize;
                        *v = if x < 0 || x >= g.width as isize {
                            0.0
                        } else {
                            src[x as usize]
                        };
                    }
                }
            }
        }
    }
}

/// Inverse of [`im2col`]: scatter-add patch columns back into an image.
fn col2im(g: &Geometry, col: &[f64], image: &mut [f64]) {
    let positions = g.positions();
    for c in 0..g.in_ch {
        let plane = &mut image[c * g.height * g.width..(c + 1) * g.height * g.width];
        for ki in 0..g.kh {
            for kj in 0..g.kw {
                let row = (c * g.kh + ki) * g.kw + kj;
                let src = &col[row * positions..(row + 1) * positions];
                for oy in 0..g.out_h {
                    let y = (oy * g.stride + ki) as isize - g.pad as isize;
                    if y < 0 || y >= g.height as isize {
                        continue;
                    }
                    let dst = &mut plane[y as usize * g.width..(y as usize + 1) * g.width];
                    for ox in 0..g.out_w {
                        let x = (ox * g.stride + kj) as isize - g.pad as isize;
                        if x >= 0 && x < g.width as isize {
                            dst[x as usize] += src[oy * g.out_w + ox];
                        }
                    }
                }
            }
        }
    }
}

/// 2-D cross-correlation with zero padding and per-channel bias.
///
/// Input is `(n, in_ch, h, w)`, output `(n, out_ch, out_h, out_w)`. Each image
/// is computed independently, so results do not depend on batch composition.
pub fn conv2d(input: &Tensor, params: &ConvParams) -> Result<Tensor> {
    let g = geometry(input, params)?;
    let (patch, positions) = (g.patch_len(), g.positions());
    let in_len = g.in_ch * g.height * g.width;
    let out_len = g.out_ch * positions;
    let mut out = vec![0.0; g.batch * out_len];
    let mut col = vec![0.0; patch * positions];
    let w = params.weight.data();
    let bias = params.bias.data();
    for n in 0..g.batch {
        im2col(&g, &input.data()[n * in_len..(n + 1) * in_len], &mut col);
        let dst = &mut out[n * out_len..(n + 1) * out_len];
        for (o, row) in dst.chunks_exact_mut(positions).enumerate() {
            row.fill(bias[o]);
        }
        gemm(
            g.out_ch,
            patch,
            positions,
            w,
            Layout::row_major(patch),
            &col,
            Layout::row_major(positions),
            1.0,
            dst,
        );
    }
    Tensor::new(&[g.batch, g.out_ch, g.out_h, g.out_w], out)
}

/// Gradient counterpart of [`conv2d`] given the upstream gradient of its output.
pub fn conv2d_backward(input: &Tensor, params: &ConvParams, grad_out: &Tensor) -> Result<ConvGrads> {
    let g = geometry(input, params)?;
    let expected = [g.batch, g.out_ch, g.out_h, g.out_w];
    if grad_out.shape() != expected {
        return Err(Error::shape(
            "conv2d_backward",
            format!("grad_out: expected {expected:?}, got {:?}", grad_out.shape()),
        ));
    }
    let (patch, positions) = (g.patch_len(), g.positions());
    let in_len = g.in_ch * g.height * g.width;
    let out_len = g.out_ch * positions;
    let w = params.weight.data();

    let mut d_input = vec![0.0; input.len()];
    let mut d_weight = vec![0.0; params.weight.len()];
    let mut d_bias = vec![0.0; g.out_ch];
    let mut col = vec![0.0; patch * positions];
    let mut d_col = vec![0.0; patch * positions];

    for n in 0..g.batch {
        let dy = &grad_out.data()[n * out_len..(n + 1) * out_len];
        im2col(&g, &input.data()[n * in_len..(n + 1) * in_len], &mut col);
        // dW += dY · colᵀ
        gemm(
            g.out_ch,
            positions,
            patch,
            dy,
            Layout::row_major(positions),
            &col,
            Layout::transposed(positions),
            1.0,
            &mut d_weight,
        );
        for (o, row) in dy.chunks_exact(positions).enumerate() {
            d_bias[o] += row.iter().sum::<f64>();
        }
        // dcol = Wᵀ · dY
        gemm(
            patch,
            g.out_ch,
            positions,
            w,
            Layout::transposed(patch),
            dy,
            Layout::row_major(positions),
            0.0,
            &mut d_col,
        );
        col2im(&g, &d_col, &mut d_input[n * in_len..(n + 1) * in_len]);
    }

    Ok(ConvGrads {
        input: Tensor::new(input.shape(), d_input)?,
        weight: Tensor::new(params.weight.shape(), d_weight)?,
        bias: Tensor::new(&[g.out_ch], d_bias)?,
    })
}
