//! Classical driven Harper dynamics.
//!
//! The Hamiltonian `H = -J'_x cos(p - w_x t) - J'_y cos(x + w_y t)` splits into a
//! momentum-only and a position-only part, which makes a symplectic splitting
//! scheme exact on each sub-flow. In the co-moving frame
//! `p' = p - w_x t`, `x' = x + w_y t` the system is autonomous and
//! `H' = -J'_x cos p' - J'_y cos x' + w_x x' + w_y p'` is conserved.

mod integrator;
mod islands;
mod transport;

pub use integrator::{integrate, stroboscopic_map, Integrator};
pub use islands::{island_scan, island_scan_with_step, IslandScan, TRANSPORT_BAND};
pub use transport::{
    bessel_drift_ratio, ensemble_dispersion, mean_velocity, spreading_rate, streamed_velocity,
    torus_occupancy, Ensemble, SpreadingFit, BALLISTIC_RESIDUAL_LIMIT,
};

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::params::DerivedParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhasePoint {
    pub x: f64,
    pub p: f64,
}

impl PhasePoint {
    pub const fn new(x: f64, p: f64) -> Self {
        Self { x, p }
    }

    /// Both coordinates reduced into `[-pi, pi)`.
    pub fn wrapped(self) -> Self {
        Self {
            x: wrap_angle(self.x),
            p: wrap_angle(self.p),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.p.is_finite()
    }
}

/// Reduces an angle into `[-pi, pi)`.
#[inline]
pub fn wrap_angle(a: f64) -> f64 {
    let r = (a + PI).rem_euclid(TAU) - PI;
    // rem_euclid can round up to exactly TAU
    if r >= PI {
        r - TAU
    } else {
        r
    }
}

/// Sampled orbit. `wrapped` marks torus coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<PhasePoint>,
    pub wrapped: bool,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, PhasePoint)> {
        Some((*self.times.last()?, *self.points.last()?))
    }
}

/// Hamilton's equations: `(dx/dt, dp/dt)`.
#[inline]
pub fn eom_rhs(pt: PhasePoint, t: f64, d: &DerivedParams) -> (f64, f64) {
    (
        d.jp_x * (pt.p - d.omega_x() * t).sin(),
        -d.jp_y * (pt.x + d.omega_y() * t).sin(),
    )
}

/// The time-dependent Hamiltonian itself.
#[inline]
pub fn hamiltonian(pt: PhasePoint, t: f64, d: &DerivedParams) -> f64 {
    -d.jp_x * (pt.p - d.omega_x() * t).cos() - d.jp_y * (pt.x + d.omega_y() * t).cos()
}

/// Co-moving frame energy; constant along exact orbits. Needs plane
/// (unwrapped) coordinates.
#[inline]
pub fn conserved_quantity(pt: PhasePoint, t: f64, d: &DerivedParams) -> f64 {
    let pp = pt.p - d.omega_x() * t;
    let xp = pt.x + d.omega_y() * t;
    -d.jp_x * pp.cos() - d.jp_y * xp.cos() + d.omega_x() * xp + d.omega_y() * pp
}

/// Centre of the transporting island around `(0, 0)` at `t = 0`, where the
/// co-moving force vanishes: `J'_y sin x = -w_x`, `J'_x sin p = -w_y`. `None`
/// when the drive is too fast for the island to exist.
pub fn elliptic_point(d: &DerivedParams) -> Option<PhasePoint> {
    let (sx, sp) = (-d.omega_x() / d.jp_y, -d.omega_y() / d.jp_x);
    if sx.abs() >= 1.0 || sp.abs() >= 1.0 || !sx.is_finite() || !sp.is_finite() {
        return None;
    }
    Some(PhasePoint::new(sx.asin(), sp.asin()))
}
