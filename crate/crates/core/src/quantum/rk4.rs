use std::f64::consts::TAU;

use num_complex::Complex64;

use super::{check_dt, run, EvolutionRecord, Gauge, PropagationOptions, Scheme, WaveFunction};
use crate::error::Result;
use crate::params::DerivedParams;

/// Classical RK4 on the tilted equation
/// `i db_l/dt = -J_x/2 (b_{l+1} + b_{l-1}) - J_y cos(2 pi alpha l + w_y t) b_l + w_x l b_l`
/// with hard walls at the window ends.
///
/// Related to [`super::propagate_eq2`] by `b_l -> b_l exp(i w_x l t)`; site
/// densities coincide.
pub fn propagate_eq8(
    psi: WaveFunction,
    t_end: f64,
    dt: f64,
    d: &DerivedParams,
    opts: &PropagationOptions,
) -> Result<(WaveFunction, EvolutionRecord)> {
    check_dt(dt, d)?;
    let mut scheme = TiltedRk4::new(d);
    run(psi, t_end, dt, opts, &mut scheme, Gauge::Tilted)
}

/// Bound on `h |lambda|` kept below the RK4 limit `2 sqrt 2` on the
/// imaginary axis.
const RK4_STABLE: f64 = 2.5;

pub(crate) struct TiltedRk4 {
    half_jx: f64,
    j_y: f64,
    alpha: f64,
    omega_x: f64,
    omega_y: f64,
    site_cos: Vec<f64>,
    site_sin: Vec<f64>,
    tilt: Vec<f64>,
    diag: Vec<f64>,
    k: Vec<Complex64>,
    probe: Vec<Complex64>,
    acc: Vec<Complex64>,
}

impl TiltedRk4 {
    pub(crate) fn new(d: &DerivedParams) -> Self {
        Self {
            half_jx: 0.5 * d.params.j_x,
            j_y: d.params.j_y,
            alpha: d.params.alpha,
            omega_x: d.omega_x(),
            omega_y: d.omega_y(),
            site_cos: Vec::new(),
            site_sin: Vec::new(),
            tilt: Vec::new(),
            diag: Vec::new(),
            k: Vec::new(),
            probe: Vec::new(),
            acc: Vec::new(),
        }
    }

    fn set_time(&mut self, t: f64) {
        let (sn, cs) = (self.omega_y * t).sin_cos();
        let jy = self.j_y;
        for (((dg, &c), &s), &w) in self
            .diag
            .iter_mut()
            .zip(&self.site_cos)
            .zip(&self.site_sin)
            .zip(&self.tilt)
        {
            *dg = w - jy * (c * cs - s * sn);
        }
    }

    /// `out = -i H y` with the diagonal currently loaded.
    #[inline]
    fn apply(half_jx: f64, diag: &[f64], y: &[Complex64], out: &mut [Complex64]) {
        let n = y.len();
        let zero = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let left = if j > 0 { y[j - 1] } else { zero };
            let right = if j + 1 < n { y[j + 1] } else { zero };
            let hy = diag[j] * y[j] - half_jx * (left + right);
            out[j] = Complex64::new(hy.im, -hy.re);
        }
    }
}

impl Scheme for TiltedRk4 {
    fn prepare(&mut self, psi: &WaveFunction) {
        let n = psi.len();
        (self.site_cos, self.site_sin) = psi
            .sites()
            .map(|l| {
                let a = TAU * self.alpha * l as f64;
                (a.cos(), a.sin())
            })
            .unzip();
        self.tilt = psi.sites().map(|l| self.omega_x * l as f64).collect();
        self.diag = vec![0.0; n];
        let zero = Complex64::new(0.0, 0.0);
        self.k = vec![zero; n];
        self.probe = vec![zero; n];
        self.acc = vec![zero; n];
    }

    fn max_step(&self) -> f64 {
        let tilt = self.tilt.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        RK4_STABLE / (2.0 * self.half_jx.abs() + self.j_y.abs() + tilt)
    }

    fn step(&mut self, y: &mut [Complex64], t: f64, h: f64) {
        let hj = self.half_jx;
        // k1
        self.set_time(t);
        Self::apply(hj, &self.diag, y, &mut self.k);
        for j in 0..y.len() {
            self.acc[j] = y[j] + (h / 6.0) * self.k[j];
            self.probe[j] = y[j] + (0.5 * h) * self.k[j];
        }
        // k2
        self.set_time(t + 0.5 * h);
        Self::apply(hj, &self.diag, &self.probe, &mut self.k);
        for j in 0..y.len() {
            self.acc[j] += (h / 3.0) * self.k[j];
            self.probe[j] = y[j] + (0.5 * h) * self.k[j];
        }
        // k3, same time
        Self::apply(hj, &self.diag, &self.probe, &mut self.k);
        for j in 0..y.len() {
            self.acc[j] += (h / 3.0) * self.k[j];
            self.probe[j] = y[j] + h * self.k[j];
        }
        // k4
        self.set_time(t + h);
        Self::apply(hj, &self.diag, &self.probe, &mut self.k);
        for j in 0..y.len() {
            y[j] = self.acc[j] + (h / 6.0) * self.k[j];
        }
    }
}
