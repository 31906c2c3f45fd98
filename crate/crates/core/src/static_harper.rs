//! The undriven Aubry-André chain
//! `(H b)_l = -J_x/2 (b_{l+1} + b_{l-1}) - J_y cos(2 pi alpha l + phi) b_l`
//! on `l = 0 .. L-1` with open ends.

use std::f64::consts::TAU;

use faer::{Mat, Side};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::params::gcd;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AAHamiltonian {
    pub j_x: f64,
    pub j_y: f64,
    pub alpha: f64,
    pub phase: f64,
    /// On-site energies `-J_y cos(2 pi alpha l + phi)`.
    pub diagonal: Vec<f64>,
    /// Hopping `-J_x/2` between neighbours; length `L - 1`.
    pub off_diagonal: Vec<f64>,
}

impl AAHamiltonian {
    pub fn len(&self) -> usize {
        self.diagonal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diagonal.is_empty()
    }

    pub fn dense(&self) -> Mat<f64> {
        let n = self.len();
        Mat::from_fn(n, n, |i, j| {
            if i == j {
                self.diagonal[i]
            } else if i.abs_diff(j) == 1 {
                self.off_diagonal[i.min(j)]
            } else {
                0.0
            }
        })
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diagonal[i] * v[i];
                if i > 0 {
                    s += self.off_diagonal[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    s += self.off_diagonal[i] * v[i + 1];
                }
                s
            })
            .collect()
    }
}

pub fn build_aa(len: usize, j_x: f64, j_y: f64, alpha: f64, phase: f64) -> Result<AAHamiltonian> {
    if len < 2 {
        return Err(invalid("L", format!("must be >= 2, got {len}")));
    }
    Ok(AAHamiltonian {
        j_x,
        j_y,
        alpha,
        phase,
        diagonal: (0..len)
            .map(|l| -j_y * (TAU * alpha * l as f64 + phase).cos())
            .collect(),
        off_diagonal: vec![-0.5 * j_x; len - 1],
    })
}

/// All eigenvalues, ascending.
pub fn spectrum(h: &AAHamiltonian) -> Result<Vec<f64>> {
    let mut e = h
        .dense()
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    e.sort_by(f64::total_cmp);
    Ok(e)
}

/// Eigenvalues (ascending) with unit eigenvectors as columns.
pub fn eigenstates(h: &AAHamiltonian) -> Result<(Vec<f64>, Mat<f64>)> {
    let evd = h
        .dense()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let values = evd.S().column_vector().iter().copied().collect();
    Ok((values, evd.U().to_owned()))
}

/// One rational flux `p / q` of the butterfly.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ButterflySlice {
    pub p: u64,
    pub q: u64,
    /// Union of the spectra over the phase grid, ascending.
    pub energies: Vec<f64>,
}

/// Spectra for every reduced fraction `p/q` in `[0, 1)` with `q <= q_max`,
/// each the union over `phases`.
pub fn butterfly(q_max: u64, j: f64, len: usize, phases: &[f64]) -> Result<Vec<ButterflySlice>> {
    if q_max == 0 || q_max > 50 {
        return Err(invalid("q_max", format!("must lie in 1..=50, got {q_max}")));
    }
    if phases.is_empty() {
        return Err(invalid("phases", "need at least one phase"));
    }
    let mut fractions = Vec::new();
    for q in 1..=q_max {
        for p in 0..q {
            if gcd(p, q) == 1 {
                fractions.push((p, q));
            }
        }
    }
    fractions.sort_by(|a, b| (a.0 * b.1).cmp(&(b.0 * a.1)));
    fractions
        .par_iter()
        .map(|&(p, q)| {
            let alpha = p as f64 / q as f64;
            let mut energies = Vec::with_capacity(len * phases.len());
            for &phi in phases {
                energies.extend(spectrum(&build_aa(len, j, j, alpha, phi)?)?);
            }
            energies.sort_by(f64::total_cmp);
            Ok(ButterflySlice { p, q, energies })
        })
        .collect()
}

/// Outcome of the size-scaling test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Localization {
    Localized,
    Extended,
    Inconclusive,
}

impl Localization {
    pub fn as_str(&self) -> &'static str {
        match self {
            Localization::Localized => "localized",
            Localization::Extended => "extended",
            Localization::Inconclusive => "inconclusive",
        }
    }
}

/// Localized when every size step grows the mean participation ratio by
/// less than this factor.
pub const LOCALIZED_GROWTH: f64 = 1.1;
/// Extended when every size step grows it by at least this factor.
pub const EXTENDED_GROWTH: f64 = 1.4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub j_x: f64,
    pub j_y: f64,
    pub alpha: f64,
    pub sizes: Vec<usize>,
    pub mean_p: Vec<f64>,
    /// `mean_p[k + 1] / mean_p[k]`.
    pub growth: Vec<f64>,
    pub class: Localization,
}

/// Mean participation ratio of all eigenvectors for each size, classified by
/// how it grows with the size.
pub fn localization_diagnostic(
    j_x: f64,
    j_y: f64,
    alpha: f64,
    phase: f64,
    sizes: &[usize],
) -> Result<ScalingReport> {
    if sizes.len() < 2 || sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("sizes", "need at least two increasing sizes"));
    }
    let mean_p: Vec<f64> = sizes
        .par_iter()
        .map(|&n| {
            let (_, vecs) = eigenstates(&build_aa(n, j_x, j_y, alpha, phase)?)?;
            let total: f64 = (0..n)
                .map(|k| 1.0 / vecs.col(k).iter().map(|x| x.powi(4)).sum::<f64>())
                .sum();
            Ok(total / n as f64)
        })
        .collect::<Result<_>>()?;
    let growth: Vec<f64> = mean_p.windows(2).map(|w| w[1] / w[0]).collect();
    let class = if growth.iter().all(|&g| g < LOCALIZED_GROWTH) {
        Localization::Localized
    } else if growth.iter().all(|&g| g >= EXTENDED_GROWTH) {
        Localization::Extended
    } else {
        Localization::Inconclusive
    };
    Ok(ScalingReport {
        j_x,
        j_y,
        alpha,
        sizes: sizes.to_vec(),
        mean_p,
        growth,
        class,
    })
}

/// Inverse golden mean `(sqrt(5) - 1) / 2`.
pub fn inverse_golden_mean() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

/// Fibonacci numbers `>= min`, `count` of them.
pub fn fibonacci_sizes(min: usize, count: usize) -> Vec<usize> {
    let (mut a, mut b) = (1usize, 2usize);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        if a >= min {
            out.push(a);
        }
        (a, b) = (b, a + b);
    }
    out
}
