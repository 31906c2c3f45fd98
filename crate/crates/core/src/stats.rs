//! Small least-squares and correlation helpers shared by the fitting code.

use serde::Serialize;

/// Ordinary least-squares line `y = slope * x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination; 1 for a perfect (or degenerate flat) fit.
    pub r_squared: f64,
    pub n: usize,
}

/// Running sums for a least-squares line, usable without storing samples.
/// Samples are shifted by the first `x` seen to keep the sums well conditioned.
#[derive(Debug, Clone, Default)]
pub struct LineAccumulator {
    x0: Option<f64>,
    n: usize,
    sx: f64,
    sy: f64,
    sxx: f64,
    sxy: f64,
    syy: f64,
}

impl LineAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, x: f64, y: f64) {
        let x0 = *self.x0.get_or_insert(x);
        let x = x - x0;
        self.n += 1;
        self.sx += x;
        self.sy += y;
        self.sxx += x * x;
        self.sxy += x * y;
        self.syy += y * y;
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `None` with fewer than two distinct abscissae.
    pub fn fit(&self) -> Option<LineFit> {
        if self.n < 2 {
            return None;
        }
        let n = self.n as f64;
        let cxx = self.sxx - self.sx * self.sx / n;
        let cxy = self.sxy - self.sx * self.sy / n;
        let cyy = self.syy - self.sy * self.sy / n;
        if cxx <= 0.0 {
            return None;
        }
        let slope = cxy / cxx;
        let intercept_shifted = (self.sy - slope * self.sx) / n;
        let x0 = self.x0.unwrap_or(0.0);
        let r_squared = if cyy <= 0.0 {
            1.0
        } else {
            (cxy * cxy / (cxx * cyy)).clamp(0.0, 1.0)
        };
        Some(LineFit {
            slope,
            intercept: intercept_shifted - slope * x0,
            r_squared,
            n: self.n,
        })
    }
}

pub fn line_fit(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    assert_eq!(xs.len(), ys.len());
    let mut acc = LineAccumulator::new();
    for (&x, &y) in xs.iter().zip(ys) {
        acc.push(x, y);
    }
    acc.fit()
}

/// Pearson correlation coefficient; `None` if either series is constant.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Population mean and standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.max(0.0).sqrt())
}
