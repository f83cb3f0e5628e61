use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sample Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::shape("pearson", format!("lengths {} and {}", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::InvalidArgument("pearson needs at least 2 pairs".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Undefined("pearson: zero variance"));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Subjects in rows, raters in columns, no missing entries.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingsMatrix {
    subjects: usize,
    raters: usize,
    values: Vec<f64>,
}

impl RatingsMatrix {
    pub fn new(subjects: usize, raters: usize, values: Vec<f64>) -> Result<Self> {
        if subjects < 2 || raters < 2 {
            return Err(Error::InvalidArgument(format!(
                "ratings need at least 2 subjects and 2 raters, got {subjects}x{raters}"
            )));
        }
        if values.len() != subjects * raters {
            return Err(Error::shape(
                "ratings",
                format!("{} values for {subjects}x{raters}", values.len()),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("ratings must be finite".into()));
        }
        let first = &values[..raters];
        if values.chunks(raters).all(|row| row == first) {
            return Err(Error::Undefined("ratings: all subjects rated identically"));
        }
        Ok(Self { subjects, raters, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != k) {
            return Err(Error::shape("ratings", "ragged rows"));
        }
        Self::new(rows.len(), k, rows.concat())
    }

    pub fn subjects(&self) -> usize {
        self.subjects
    }

    pub fn raters(&self) -> usize {
        self.raters
    }

    pub fn get(&self, subject: usize, rater: usize) -> f64 {
        self.values[subject * self.raters + rater]
    }

    pub fn row(&self, subject: usize) -> &[f64] {
        &self.values[subject * self.raters..(subject + 1) * self.raters]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.subjects, self.raters, self.values.iter().map(|&v| f(v)).collect())
    }
}

/// Two-way ANOVA mean squares and the derived ICC estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Icc {
    pub msr: f64,
    pub msc: f64,
    pub mse: f64,
    /// ICC(2,1): agreement of a single rater.
    pub single: f64,
    /// ICC(2,k): agreement of the mean of k raters.
    pub average: f64,
}

/// Mean taken relative to the first value, so that identical values give
/// exactly that value back.
fn offset_mean(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let mut it = values.clone();
    let Some(first) = it.next() else { return 0.0 };
    let n = values.clone().count() as f64;
    first + values.map(|v| v - first).sum::<f64>() / n
}

/// Two-way random-effects intraclass correlation.
pub fn icc(m: &RatingsMatrix) -> Result<Icc> {
    let (n, k) = (m.subjects, m.raters);
    let (nf, kf) = (n as f64, k as f64);
    let row_means: Vec<f64> = (0..n).map(|i| offset_mean(m.row(i).iter().copied())).collect();
    let col_means: Vec<f64> = (0..k)
        .map(|j| offset_mean((0..n).map(|i| m.get(i, j))))
        .collect();
    // With a balanced design the grand mean is the mean of the column means.
    let grand = offset_mean(col_means.iter().copied());
    let ssr = kf * row_means.iter().map(|r| (r - grand) * (r - grand)).sum::<f64>();
    let ssc = nf * col_means.iter().map(|c| (c - grand) * (c - grand)).sum::<f64>();
    let mut sse = 0.0;
    for (i, rm) in row_means.iter().enumerate() {
        for (j, cm) in col_means.iter().enumerate() {
            let e = m.get(i, j) - rm - cm + grand;
            sse += e * e;
        }
    }
    let msr = ssr / (nf - 1.0);
    let msc = ssc / (kf - 1.0);
    let mse = sse / ((nf - 1.0) * (kf - 1.0));
    if msr == 0.0 {
        return Err(Error::Undefined("icc: zero between-subject variance"));
    }
    let single_den = msr + (kf - 1.0) * mse + kf * (msc - mse) / nf;
    let average_den = msr + (msc - mse) / nf;
    if single_den == 0.0 || average_den == 0.0 {
        return Err(Error::Undefined("icc: zero denominator"));
    }
    Ok(Icc {
        msr,
        msc,
        mse,
        single: (msr - mse) / single_den,
        average: (msr - mse) / average_den,
    })
}

/// Krippendorff's alpha with the interval metric, via the coincidence matrix.
pub fn krippendorff_alpha(m: &RatingsMatrix) -> Result<f64> {
    let mut distinct = m.values.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let v = distinct.len();
    let index = |x: f64| distinct.binary_search_by(|d| d.total_cmp(&x)).unwrap();

    let mut coincidence = vec![0.0; v * v];
    let weight = 1.0 / (m.raters as f64 - 1.0);
    for s in 0..m.subjects {
        let row = m.row(s);
        for (a, &x) in row.iter().enumerate() {
            for (b, &y) in row.iter().enumerate() {
                if a != b {
                    coincidence[index(x) * v + index(y)] += weight;
                }
            }
        }
    }
    let marginals: Vec<f64> = coincidence.chunks(v).map(|r| r.iter().sum()).collect();
    let total: f64 = marginals.iter().sum();

    let delta = |c: usize, d: usize| (distinct[c] - distinct[d]).powi(2);
    let (mut observed, mut expected) = (0.0, 0.0);
    for c in 0..v {
        for d in 0..v {
            if c != d {
                observed += coincidence[c * v + d] * delta(c, d);
                expected += marginals[c] * marginals[d] * delta(c, d);
            }
        }
    }
    let observed = observed / total;
    let expected = expected / (total * (total - 1.0));
    if expected == 0.0 {
        return Err(Error::Undefined("krippendorff_alpha: zero expected disagreement"));
    }
    Ok(1.0 - observed / expected)
}
