//! Independent reference implementations shared by the test targets.
#![allow(dead_code)]

use teegrade::Tensor;

/// Cross-correlation by direct nested loops over a zero-padded input.
pub fn naive_conv(input: &Tensor, weight: &Tensor, bias: &[f64], stride: usize, pad: usize) -> Tensor {
    let [n, c, h, w] = input.shape().try_into().unwrap();
    let [o, _, kh, kw] = weight.shape().try_into().unwrap();
    let oh = (h + 2 * pad - kh) / stride + 1;
    let ow = (w + 2 * pad - kw) / stride + 1;
    let x = |b: usize, ch: usize, i: isize, j: isize| -> f64 {
        if i < 0 || j < 0 || i >= h as isize || j >= w as isize {
            0.0
        } else {
            input.data()[((b * c + ch) * h + i as usize) * w + j as usize]
        }
    };
    let mut out = vec![0.0; n * o * oh * ow];
    for b in 0..n {
        for oc in 0..o {
            for i in 0..oh {
                for j in 0..ow {
                    let mut acc = bias[oc];
                    for ch in 0..c {
                        for u in 0..kh {
                            for v in 0..kw {
                                let wv = weight.data()[((oc * c + ch) * kh + u) * kw + v];
                                let xi = (i * stride + u) as isize - pad as isize;
                                let xj = (j * stride + v) as isize - pad as isize;
                                acc += wv * x(b, ch, xi, xj);
                            }
                        }
                    }
                    out[((b * o + oc) * oh + i) * ow + j] = acc;
                }
            }
        }
    }
    Tensor::new(&[n, o, oh, ow], out).unwrap()
}

/// Window maxima and the flat input index of the first maximum per window.
pub fn naive_pool(input: &Tensor, k: usize, stride: usize) -> (Tensor, Vec<usize>) {
    let [n, c, h, w] = input.shape().try_into().unwrap();
    let oh = (h - k) / stride + 1;
    let ow = (w - k) / stride + 1;
    let mut out = Vec::new();
    let mut arg = Vec::new();
    for plane in 0..n * c {
        for i in 0..oh {
            for j in 0..ow {
                let mut best = (f64::NEG_INFINITY, 0);
                for u in 0..k {
                    for v in 0..k {
                        let idx = plane * h * w + (i * stride + u) * w + j * stride + v;
                        if input.data()[idx] > best.0 {
                            best = (input.data()[idx], idx);
                        }
                    }
                }
                out.push(best.0);
                arg.push(best.1);
            }
        }
    }
    (Tensor::new(&[n, c, oh, ow], out).unwrap(), arg)
}

/// Shrout-Fleiss ICC(2,1) and ICC(2,k) from total, row and column sums of
/// squares, with the residual taken as the remainder.
pub fn anova_icc(rows: &[Vec<f64>]) -> (f64, f64) {
    let n = rows.len() as f64;
    let k = rows[0].len() as f64;
    let all: Vec<f64> = rows.iter().flatten().copied().collect();
    let grand = all.iter().sum::<f64>() / all.len() as f64;
    let sst: f64 = all.iter().map(|v| (v - grand).powi(2)).sum();
    let ssr: f64 = rows.iter().map(|r| k * (r.iter().sum::<f64>() / k - grand).powi(2)).sum();
    let ssc: f64 = (0..rows[0].len())
        .map(|j| n * (rows.iter().map(|r| r[j]).sum::<f64>() / n - grand).powi(2))
        .sum();
    let sse = sst - ssr - ssc;
    let msr = ssr / (n - 1.0);
    let msc = ssc / (k - 1.0);
    let mse = sse / ((n - 1.0) * (k - 1.0));
    (
        (msr - mse) / (msr + (k - 1.0) * mse + k * (msc - mse) / n),
        (msr - mse) / (msr + (msc - mse) / n),
    )
}

/// Interval alpha straight from the definition: mean within-unit pairwise
/// squared difference over the mean squared difference of all value pairs.
pub fn definitional_alpha(rows: &[Vec<f64>]) -> f64 {
    let all: Vec<f64> = rows.iter().flatten().copied().collect();
    let n = all.len() as f64;
    let mut observed = 0.0;
    for r in rows {
        let m = r.len() as f64;
        for (i, a) in r.iter().enumerate() {
            for (j, b) in r.iter().enumerate() {
                if i != j {
                    observed += (a - b).powi(2) / (m - 1.0);
                }
            }
        }
    }
    let mut expected = 0.0;
    for (i, a) in all.iter().enumerate() {
        for (j, b) in all.iter().enumerate() {
            if i != j {
                expected += (a - b).powi(2);
            }
        }
    }
    1.0 - (observed / n) / (expected / (n * (n - 1.0)))
}

/// Sample Pearson coefficient from the textbook sums formula.
pub fn sums_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let syy: f64 = y.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}
