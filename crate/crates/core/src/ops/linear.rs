use crate::error::{Error, Result};
use crate::tensor::Tensor;

#[derive(Debug, Clone)]
pub struct LinearGrads {
    pub input: Tensor,
    pub weight: Tensor,
    pub bias: Tensor,
}

fn dims(input: &Tensor, weight: &Tensor, bias: &Tensor) -> Result<(usize, usize, usize)> {
    let &[batch, fan_in] = input.shape() else {
        return Err(Error::shape(
            "linear",
            format!("input must be (batch, in), got {:?}", input.shape()),
        ));
    };
    let &[fan_out, w_in] = weight.shape() else {
        return Err(Error::shape(
            "linear",
            format!("weight must be (out, in), got {:?}", weight.shape()),
        ));
    };
    if w_in != fan_in {
        return Err(Error::shape(
            "linear",
            format!("in_features: input has {fan_in}, weight expects {w_in}"),
        ));
    }
    if bias.shape() != [fan_out] {
        return Err(Error::shape(
            "linear",
            format!("bias: expected [{fan_out}], got {:?}", bias.shape()),
        ));
    }
    Ok((batch, fan_in, fan_out))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `y = x·Wᵀ + b`, row by row.
pub fn linear(input: &Tensor, weight: &Tensor, bias: &Tensor) -> Result<Tensor> {
    let (batch, fan_in, fan_out) = dims(input, weight, bias)?;
    let w = weight.data();
    let mut out = Vec::with_capacity(batch * fan_out);
    for x in input.data().chunks_exact(fan_in) {
        for (o, b) in bias.data().iter().enumerate() {
            out.push(b + dot(x, &w[o * fan_in..(o + 1) * fan_in]));
        }
    }
    Tensor::new(&[batch, fan_out], out)
}

pub fn linear_backward(
    input: &Tensor,
    weight: &Tensor,
    bias: &Tensor,
    grad_out: &Tensor,
) -> Result<LinearGrads> {
    let (batch, fan_in, fan_out) = dims(input, weight, bias)?;
    if grad_out.shape() != [batch, fan_out] {
        return Err(Error::shape(
            "linear_backward",
            format!("grad_out: expected [{batch}, {fan_out}], got {:?}", grad_out.shape()),
        ));
    }
    let w = weight.data();
    let mut d_input = vec![0.0; batch * fan_in];
    let mut d_weight = vec![0.0; fan_out * fan_in];
    let mut d_bias = vec![0.0; fan_out];
    for ((x, dy), dx) in input
        .data()
        .chunks_exact(fan_in)
        .zip(grad_out.data().chunks_exact(fan_out))
        .zip(d_input.chunks_exact_mut(fan_in))
    {
        for (o, &g) in dy.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            d_bias[o] += g;
            let w_row = &w[o * fan_in..(o + 1) * fan_in];
            let dw_row = &mut d_weight[o * fan_in..(o + 1) * fan_in];
            for i in 0..fan_in {
                dx[i] += g * w_row[i];
                dw_row[i] += g * x[i];
            }
        }
    }
    Ok(LinearGrads {
        input: Tensor::new(&[batch, fan_in], d_input)?,
        weight: Tensor::new(&[fan_out, fan_in], d_weight)?,
        bias: Tensor::new(&[fan_out], d_bias)?,
    })
}
