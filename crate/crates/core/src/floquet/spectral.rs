use std::f64::consts::PI;

use faer::{c64, Mat};

use super::FloquetOperator;
use crate::error::{invalid, Error, Result};

/// Eigenpairs with `||U v - e^{i theta} v||` at or above this are flagged.
pub const RESIDUAL_LIMIT: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct FloquetEigenSet {
    /// Quasienergy phases in `(-pi, pi]`, ascending.
    pub eigenphases: Vec<f64>,
    /// Unit-norm eigenvectors as columns, in the order of `eigenphases`.
    pub eigenvectors: Mat<c64>,
    pub residuals: Vec<f64>,
    /// Largest `| |lambda| - 1 |` over the raw eigenvalues.
    pub modulus_defect: f64,
    /// Indices of pairs whose residual is not below [`RESIDUAL_LIMIT`].
    pub flagged: Vec<usize>,
}

impl FloquetEigenSet {
    pub fn len(&self) -> usize {
        self.eigenphases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenphases.is_empty()
    }

    pub fn vector(&self, k: usize) -> Vec<c64> {
        self.eigenvectors.col(k).iter().copied().collect()
    }
}

/// Full dense eigendecomposition.
pub fn eigendecompose(u: &FloquetOperator) -> Result<FloquetEigenSet> {
    let n = u.len();
    let evd = u
        .matrix
        .eigen()
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let values: Vec<c64> = evd.S().column_vector().iter().copied().collect();
    let vectors = evd.U();

    let mut order: Vec<(f64, usize)> = values
        .iter()
        .enumerate()
        .map(|(k, z)| {
            let mut theta = z.im.atan2(z.re);
            if theta <= -PI {
                theta += 2.0 * PI;
            }
            (theta, k)
        })
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut eigenvectors = Mat::<c64>::zeros(n, n);
    for (dst, &(_, src)) in order.iter().enumerate() {
        let col = vectors.col(src);
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for i in 0..n {
            eigenvectors[(i, dst)] = col[i] / norm;
        }
    }
    let eigenphases: Vec<f64> = order.iter().map(|&(t, _)| t).collect();

    let image = &u.matrix * &eigenvectors;
    let residuals: Vec<f64> = eigenphases
        .iter()
        .enumerate()
        .map(|(k, &theta)| {
            let lam = c64::from_polar(1.0, theta);
            (0..n)
                .map(|i| (image[(i, k)] - lam * eigenvectors[(i, k)]).norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    let modulus_defect = values
        .iter()
        .map(|z| (z.norm() - 1.0).abs())
        .fold(0.0, f64::max);
    let flagged = residuals
        .iter()
        .enumerate()
        .filter(|(_, r)| **r >= RESIDUAL_LIMIT)
        .map(|(k, _)| k)
        .collect();
    Ok(FloquetEigenSet {
        eigenphases,
        eigenvectors,
        residuals,
        modulus_defect,
        flagged,
    })
}

/// `1 / sum |v_l|^4` of a unit vector.
pub fn participation_ratio(v: &[c64]) -> Result<f64> {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(invalid(
            "vector",
            format!("participation ratio needs a unit vector, norm^2 = {norm}"),
        ));
    }
    Ok(1.0 / v.iter().map(|z| z.norm_sqr().powi(2)).sum::<f64>())
}

/// Density-weighted mean slot index.
pub fn density_centroid<'a>(v: impl IntoIterator<Item = &'a c64>) -> f64 {
    let (mut m0, mut m1) = (0.0, 0.0);
    for (i, z) in v.into_iter().enumerate() {
        let w = z.norm_sqr();
        m0 += w;
        m1 += w * i as f64;
    }
    m1 / m0
}
