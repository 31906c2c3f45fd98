use std::f64::consts::TAU;

use faer::{c64, Mat};
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::params::DerivedParams;
use crate::stepping::step_plan;

/// Production unitarity tolerance.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Amplitudes below this modulus are dropped from a column's active range.
const NEGLIGIBLE: f64 = 1e-17;

#[derive(Debug, Clone)]
pub struct FloquetOperator {
    /// `matrix[(i, j)]`: amplitude on site `l_i` after one period, starting
    /// from site `l_j`, with `l_k = k - L/2`.
    pub matrix: Mat<c64>,
    pub period: f64,
    /// Absent for operators read back from disk.
    pub params: Option<DerivedParams>,
    /// RK4 steps per period used for the build.
    pub steps: usize,
    pub defect: f64,
}

impl FloquetOperator {
    pub fn len(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.nrows() == 0
    }

    /// Lattice index of row/column `k`.
    #[inline]
    pub fn site(&self, k: usize) -> i64 {
        k as i64 - (self.len() / 2) as i64
    }

    /// `U v`.
    pub fn apply(&self, v: &[c64]) -> Vec<c64> {
        let n = self.len();
        assert_eq!(v.len(), n);
        let mut out = vec![c64::new(0.0, 0.0); n];
        for (j, &vj) in v.iter().enumerate() {
            if vj == c64::new(0.0, 0.0) {
                continue;
            }
            let col = self.matrix.col(j);
            for (i, o) in out.iter_mut().enumerate() {
                *o += col[i] * vj;
            }
        }
        out
    }
}

/// `max |U^dagger U - I|`.
pub fn unitarity_defect(u: &Mat<c64>) -> f64 {
    let g = u.adjoint() * u;
    let mut worst = 0.0f64;
    for j in 0..g.ncols() {
        for i in 0..g.nrows() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - c64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Steps per period so that the RK4 phase error over one period stays well
/// inside `tol`; `||H|| <= J_x + J_y` in the tilt-free frame.
fn steps_for(d: &DerivedParams, tol: f64) -> usize {
    let rate = (d.params.j_x + d.params.j_y).max(1e-3);
    let h = (12.0 * tol / (d.period * rate.powi(5))).powf(0.25);
    let (n, _) = step_plan(d.period, h.min(d.period / 200.0));
    n
}

/// Builds the one-period operator on `len` sites centred on `l = 0`.
/// The step count is chosen from `tol`; if the unitarity defect is not below
/// `tol` the build is retried once with half the step.
pub fn build_floquet(d: &DerivedParams, len: usize, tol: f64) -> Result<FloquetOperator> {
    if len < 64 {
        return Err(invalid("L", format!("must be >= 64, got {len}")));
    }
    if !len.is_multiple_of(2) {
        return Err(invalid("L", format!("must be even, got {len}")));
    }
    if !(tol > 0.0) {
        return Err(invalid("tol", format!("must be > 0, got {tol}")));
    }
    let steps = steps_for(d, tol);
    let first = build_with_steps(d, len, steps);
    let defect = unitarity_defect(&first);
    if defect < tol {
        return Ok(FloquetOperator {
            matrix: first,
            period: d.period,
            params: Some(*d),
            steps,
            defect,
        });
    }
    let steps = 2 * steps;
    let retry = build_with_steps(d, len, steps);
    let defect = unitarity_defect(&retry);
    if defect < tol {
        Ok(FloquetOperator {
            matrix: retry,
            period: d.period,
            params: Some(*d),
            steps,
            defect,
        })
    } else {
        Err(Error::Unitarity { defect, tol })
    }
}

/// Builds with an explicit number of RK4 steps per period.
pub(crate) fn build_with_steps(d: &DerivedParams, len: usize, steps: usize) -> Mat<c64> {
    let half = (len / 2) as i64;
    let columns: Vec<(usize, Vec<c64>)> = (0..len)
        .into_par_iter()
        .map(|j| propagate_column(d, len, j, steps))
        .collect();
    let beta_phase = |i: usize| {
        let l = i as i64 - half;
        // exp(-i w_x l T_y); reduce 2 pi beta l mod 2 pi first
        let turns = (d.omega_x() * d.period / TAU) * l as f64;
        c64::from_polar(1.0, -TAU * turns.rem_euclid(1.0))
    };
    let tilt: Vec<c64> = (0..len).map(beta_phase).collect();
    let mut u = Mat::<c64>::zeros(len, len);
    for (j, (lo, col)) in columns.into_iter().enumerate() {
        for (k, a) in col.into_iter().enumerate() {
            let i = lo + k;
            u[(i, j)] = tilt[i] * a;
        }
    }
    u
}

/// Integrates the tilt-free equation from the unit vector on slot `j`,
/// returning the first slot of the active range and the amplitudes on it.
fn propagate_column(d: &DerivedParams, len: usize, j: usize, steps: usize) -> (usize, Vec<c64>) {
    let half = (len / 2) as i64;
    let h = d.period / steps as f64;
    let half_jx = 0.5 * d.params.j_x;
    let (j_y, wx, wy) = (d.params.j_y, d.omega_x(), d.omega_y());
    let phase_step = TAU * d.params.alpha;

    // The range [lo, hi) only ever widens by the stencil reach of one step.
    let mut lo = j;
    let mut hi = j + 1;
    let mut y = vec![c64::new(1.0, 0.0)];
    let mut site_cos = Vec::new();
    let mut site_sin = Vec::new();
    let mut k = Vec::new();
    let mut probe = Vec::new();
    let mut acc = Vec::new();
    let mut diag = Vec::new();

    for s in 0..steps {
        let t = s as f64 * h;
        // widen by the RK4 reach (4 sites) within the walls
        let new_lo = lo.saturating_sub(4);
        let new_hi = (hi + 4).min(len);
        if new_lo != lo || new_hi != hi {
            let mut widened = vec![c64::new(0.0, 0.0); new_hi - new_lo];
            widened[lo - new_lo..lo - new_lo + y.len()].copy_from_slice(&y);
            y = widened;
            lo = new_lo;
            hi = new_hi;
        }
        let n = y.len();
        if site_cos.len() != n {
            (site_cos, site_sin) = (lo..hi)
                .map(|i| {
                    let a = phase_step * (i as i64 - half) as f64;
                    (a.cos(), a.sin())
                })
                .unzip();
            k = vec![c64::new(0.0, 0.0); n];
            probe = vec![c64::new(0.0, 0.0); n];
            acc = vec![c64::new(0.0, 0.0); n];
            diag = vec![0.0; n];
        }

        let stage = |tau: f64, input: &[c64], out: &mut [c64], diag: &mut [f64]| {
            let (sy, cy) = (wy * tau).sin_cos();
            for ((dg, &c), &sn) in diag.iter_mut().zip(&site_cos).zip(&site_sin) {
                *dg = -j_y * (c * cy - sn * sy);
            }
            // hopping: -J_x/2 (e^{-i w_x t} a_{l+1} + e^{i w_x t} a_{l-1})
            let fwd = c64::from_polar(half_jx, -wx * tau);
            let bwd = fwd.conj();
            let m = input.len();
            for i in 0..m {
                let mut hy = input[i] * diag[i];
                if i + 1 < m {
                    hy -= fwd * input[i + 1];
                }
                if i > 0 {
                    hy -= bwd * input[i - 1];
                }
                out[i] = c64::new(hy.im, -hy.re);
            }
        };

        stage(t, &y, &mut k, &mut diag);
        for i in 0..n {
            acc[i] = y[i] + (h / 6.0) * k[i];
            probe[i] = y[i] + (0.5 * h) * k[i];
        }
        stage(t + 0.5 * h, &probe, &mut k, &mut diag);
        for i in 0..n {
            acc[i] += (h / 3.0) * k[i];
            probe[i] = y[i] + (0.5 * h) * k[i];
        }
        stage(t + 0.5 * h, &probe, &mut k, &mut diag);
        for i in 0..n {
            acc[i] += (h / 3.0) * k[i];
            probe[i] = y[i] + h * k[i];
        }
        stage(t + h, &probe, &mut k, &mut diag);
        for i in 0..n {
            y[i] = acc[i] + (h / 6.0) * k[i];
        }

        // trim negligible tails so the range tracks the physical spread
        let first = y.iter().position(|a| a.norm() >= NEGLIGIBLE).unwrap_or(0);
        let last = y.iter().rposition(|a| a.norm() >= NEGLIGIBLE).unwrap_or(0) + 1;
        if first > 0 || last < y.len() {
            y = y[first..last.max(first + 1)].to_vec();
            lo += first;
            hi = lo + y.len();
            site_cos.clear();
        }
    }
    (lo, y)
}

/// Zeroes entries further than `bandwidth` from the diagonal and reports the
/// largest discarded modulus.
pub fn band_truncate(u: &FloquetOperator, bandwidth: usize) -> (Mat<c64>, f64) {
    let n = u.len();
    let mut out = u.matrix.clone();
    let mut err = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            if i.abs_diff(j) > bandwidth {
                err = err.max(out[(i, j)].norm());
                out[(i, j)] = c64::new(0.0, 0.0);
            }
        }
    }
    (out, err)
}
