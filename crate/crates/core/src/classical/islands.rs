use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::Serialize;

use super::transport::streamed_velocity;
use super::PhasePoint;
use crate::error::{invalid, Result};
use crate::params::DerivedParams;

/// A cell is transporting when its mean velocity is within this fraction of
/// `-omega_y`.
pub const TRANSPORT_BAND: f64 = 0.1;

/// Transporting/non-transporting labels over the elementary cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IslandScan {
    pub grid_nx: usize,
    pub grid_np: usize,
    /// Row-major in `x`: `labels[i * grid_np + j]` is the cell centred at
    /// `(x_i, p_j)`.
    pub labels: Vec<bool>,
    pub velocities: Vec<f64>,
    /// Transporting fraction of the cell.
    pub s: f64,
    pub t_measure: f64,
}

impl IslandScan {
    pub fn cell_center(&self, i: usize, j: usize) -> PhasePoint {
        cell_center(i, j, self.grid_nx, self.grid_np)
    }
}

fn cell_center(i: usize, j: usize, nx: usize, np: usize) -> PhasePoint {
    PhasePoint::new(
        -PI + (i as f64 + 0.5) * TAU / nx as f64,
        -PI + (j as f64 + 0.5) * TAU / np as f64,
    )
}

/// Relative size of the transporting islands, measured by classifying the
/// centre of every grid cell with its long-time mean velocity.
pub fn island_scan(
    d: &DerivedParams,
    grid_nx: usize,
    grid_np: usize,
    t_measure: f64,
) -> Result<IslandScan> {
    island_scan_with_step(d, grid_nx, grid_np, t_measure, d.period / 200.0)
}

pub fn island_scan_with_step(
    d: &DerivedParams,
    grid_nx: usize,
    grid_np: usize,
    t_measure: f64,
    dt: f64,
) -> Result<IslandScan> {
    if grid_nx == 0 || grid_np == 0 {
        return Err(invalid("grid", "resolution must be positive"));
    }
    if t_measure < 200.0 * d.period * (1.0 - 1e-12) {
        return Err(invalid(
            "t_measure",
            format!(
                "must cover at least 200 drive periods ({}), got {t_measure}",
                200.0 * d.period
            ),
        ));
    }
    if !(dt > 0.0 && dt <= d.period / 50.0 * (1.0 + 1e-12)) {
        return Err(invalid("dt", format!("must lie in (0, T_y/50], got {dt}")));
    }
    let wy = d.omega_y();
    let velocities: Vec<f64> = (0..grid_nx * grid_np)
        .into_par_iter()
        .map(|k| {
            let start = cell_center(k / grid_np, k % grid_np, grid_nx, grid_np);
            streamed_velocity(start, t_measure, dt, d)
        })
        .collect::<Result<_>>()?;
    let labels: Vec<bool> = velocities
        .iter()
        .map(|v| (v + wy).abs() < TRANSPORT_BAND * wy)
        .collect();
    let s = labels.iter().filter(|&&b| b).count() as f64 / labels.len() as f64;
    Ok(IslandScan {
        grid_nx,
        grid_np,
        labels,
        velocities,
        s,
        t_measure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{derive_params, golden_beta, ModelParams};

    fn drive(omega: f64) -> DerivedParams {
        derive_params(&ModelParams::from_drive(1.0, 1.0, 0.1545, omega, golden_beta()).unwrap())
            .unwrap()
    }

    #[test]
    fn fraction_bounds_and_center_label() {
        let d = drive(0.3);
        let scan = island_scan(&d, 12, 12, 200.0 * d.period).unwrap();
        assert!((0.0..=1.0).contains(&scan.s));
        assert!(scan.s > 0.0);
        // the cell next to the elliptic point at the origin is transporting
        assert!(scan.labels[6 * 12 + 6] || scan.labels[5 * 12 + 5]);
        let count = scan.labels.iter().filter(|&&b| b).count();
        assert_eq!(scan.s, count as f64 / 144.0);
    }

    #[test]
    fn islands_vanish_at_high_frequency() {
        let d = drive(3.0);
        let scan = island_scan(&d, 8, 8, 200.0 * d.period).unwrap();
        assert_eq!(scan.s, 0.0);
    }

    #[test]
    fn short_horizon_rejected() {
        let d = drive(0.3);
        assert!(island_scan(&d, 4, 4, 10.0 * d.period).is_err());
    }
}
