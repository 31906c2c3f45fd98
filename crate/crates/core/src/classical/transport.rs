use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{Integrator, PhasePoint, Trajectory};
use crate::error::{invalid, Result};
use crate::params::DerivedParams;
use crate::stats::{line_fit, mean_std, LineAccumulator};

/// Relative fit residual above which a spreading fit is not called ballistic.
pub const BALLISTIC_RESIDUAL_LIMIT: f64 = 0.1;

/// Slope of a least-squares line through `x(t)` over the second half of a
/// plane trajectory.
pub fn mean_velocity(traj: &Trajectory) -> Result<f64> {
    if traj.wrapped {
        return Err(invalid(
            "trajectory",
            "mean velocity needs plane coordinates, got a torus trajectory",
        ));
    }
    let (Some(&t0), Some(&t1)) = (traj.times.first(), traj.times.last()) else {
        return Err(invalid("trajectory", "empty"));
    };
    let mid = 0.5 * (t0 + t1);
    let mut acc = LineAccumulator::new();
    for (&t, q) in traj.times.iter().zip(&traj.points) {
        if t >= mid {
            acc.push(t, q.x);
        }
    }
    acc.fit()
        .map(|f| f.slope)
        .ok_or_else(|| invalid("trajectory", "too few samples in the second half"))
}

/// Mean velocity measured on the fly over `[0, t_end]` without storing
/// the orbit. Same estimator as [`mean_velocity`].
pub fn streamed_velocity(start: PhasePoint, t_end: f64, dt: f64, d: &DerivedParams) -> Result<f64> {
    let mid = 0.5 * t_end;
    let mut acc = LineAccumulator::new();
    if mid <= 0.0 {
        acc.push(0.0, start.x);
    }
    Integrator::new(d).advance_with(start, 0.0, t_end, dt, |t, q| {
        if t >= mid {
            acc.push(t, q.x);
        }
    })?;
    acc.fit()
        .map(|f| f.slope)
        .ok_or_else(|| invalid("t_end", "too short to fit a velocity"))
}

/// Measured drift in units of `J_1(J'_y / w_y)`, the Bessel factor that
/// governs transport at `w_x = w_y`.
pub fn bessel_drift_ratio(v: f64, d: &DerivedParams) -> f64 {
    v / libm::j1(d.jp_y / d.omega_y())
}

/// A set of initial conditions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ensemble {
    pub members: Vec<PhasePoint>,
    /// Seed used to draw the members, if they were drawn.
    pub seed: Option<u64>,
}

impl Ensemble {
    pub fn from_points(members: Vec<PhasePoint>) -> Self {
        Self {
            members,
            seed: None,
        }
    }

    /// `n` points uniform over the elementary cell `[-pi, pi)^2`, drawn from a
    /// ChaCha8 stream so the draw is identical on every platform.
    pub fn uniform_cell(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let members = (0..n)
            .map(|_| {
                let x = -PI + TAU * rng.random::<f64>();
                let p = -PI + TAU * rng.random::<f64>();
                PhasePoint::new(x, p)
            })
            .collect();
        Self {
            members,
            seed: Some(seed),
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Spread `sigma(t)` of the unwrapped positions at each time of `t_grid`
/// (sorted, non-negative). Members are integrated in parallel; the result is
/// independent of the worker count.
pub fn ensemble_dispersion(
    e: &Ensemble,
    t_grid: &[f64],
    d: &DerivedParams,
    dt: f64,
) -> Result<Vec<(f64, f64)>> {
    if e.is_empty() {
        return Err(invalid("ensemble", "no members"));
    }
    if !(dt > 0.0) {
        return Err(invalid("dt", format!("must be > 0, got {dt}")));
    }
    if t_grid.iter().any(|t| !(*t >= 0.0)) || t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("t_grid", "times must be non-negative and sorted"));
    }
    let positions: Vec<Vec<f64>> = e
        .members
        .par_iter()
        .map(|&start| {
            let integ = Integrator::new(d);
            let mut xs = Vec::with_capacity(t_grid.len());
            let (mut t, mut q) = (0.0, start);
            for &target in t_grid {
                q = integ.advance(q, t, target, dt)?;
                t = target;
                xs.push(q.x);
            }
            Ok(xs)
        })
        .collect::<Result<_>>()?;

    let mut column = vec![0.0; positions.len()];
    Ok(t_grid
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            for (slot, xs) in column.iter_mut().zip(&positions) {
                *slot = xs[k];
            }
            (t, mean_std(&column).1)
        })
        .collect())
}

/// Linear fit `sigma = A t + b` over the final half of a dispersion series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpreadingFit {
    /// Ballistic rate `A`.
    pub a: f64,
    pub intercept: f64,
    pub window: (f64, f64),
    /// RMS deviation from the line over the window, relative to the mean sigma.
    pub residual: f64,
    pub ballistic: bool,
}

pub fn spreading_rate(series: &[(f64, f64)]) -> Result<SpreadingFit> {
    let (Some(first), Some(last)) = (series.first(), series.last()) else {
        return Err(invalid("sigma_series", "empty"));
    };
    let mid = 0.5 * (first.0 + last.0);
    let (ts, ss): (Vec<f64>, Vec<f64>) = series.iter().filter(|(t, _)| *t >= mid).copied().unzip();
    let fit = line_fit(&ts, &ss)
        .ok_or_else(|| invalid("sigma_series", "fewer than two samples in the final half"))?;
    let mean = ss.iter().sum::<f64>() / ss.len() as f64;
    let sq = ts
        .iter()
        .zip(&ss)
        .map(|(t, s)| (s - fit.slope * t - fit.intercept).powi(2))
        .sum::<f64>()
        / ss.len() as f64;
    let residual = if mean > 0.0 { sq.sqrt() / mean } else { 0.0 };
    Ok(SpreadingFit {
        a: fit.slope,
        intercept: fit.intercept,
        window: (ts[0], *ts.last().unwrap()),
        residual,
        ballistic: residual <= BALLISTIC_RESIDUAL_LIMIT,
    })
}

/// Number of distinct cells of a `bins x bins` grid over the torus hit by
/// the points. A closed curve saturates this count as the orbit gets longer;
/// a scattered orbit keeps filling new cells.
pub fn torus_occupancy(points: &[PhasePoint], bins: usize) -> usize {
    let mut seen = vec![false; bins * bins];
    let cell = |a: f64| (((a + PI) / TAU * bins as f64) as usize).min(bins - 1);
    for q in points {
        let w = q.wrapped();
        seen[cell(w.x) * bins + cell(w.p)] = true;
    }
    seen.iter().filter(|&&b| b).count()
}
