use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{check_dt, run, EvolutionRecord, Gauge, PropagationOptions, Scheme, WaveFunction};
use crate::error::Result;
use crate::params::DerivedParams;

/// Strang split-operator propagation of
/// `i db_l/dt = -J_x/2 (e^{-i w_x t} b_{l+1} + e^{i w_x t} b_{l-1}) - J_y cos(2 pi alpha l + w_y t) b_l`.
///
/// The hopping is diagonal in quasi-momentum with symbol `-J_x cos(k - w_x t)`
/// (periodic window); the potential is diagonal on sites. Half potential
/// step, full hopping step, half potential step, each with its explicit time
/// dependence frozen at the sub-step midpoint. A negative span runs backwards.
pub fn propagate_eq2(
    psi: WaveFunction,
    t_end: f64,
    dt: f64,
    d: &DerivedParams,
    opts: &PropagationOptions,
) -> Result<(WaveFunction, EvolutionRecord)> {
    check_dt(dt, d)?;
    let mut scheme = SplitOperator::new(d);
    run(psi, t_end, dt, opts, &mut scheme, Gauge::DrivenHopping)
}

struct SplitOperator {
    j_x: f64,
    j_y: f64,
    alpha: f64,
    omega_x: f64,
    omega_y: f64,
    forward: Option<Arc<dyn Fft<f64>>>,
    inverse: Option<Arc<dyn Fft<f64>>>,
    scratch: Vec<Complex64>,
    site_cos: Vec<f64>,
    site_sin: Vec<f64>,
    k_cos: Vec<f64>,
    k_sin: Vec<f64>,
}

impl SplitOperator {
    fn new(d: &DerivedParams) -> Self {
        Self {
            j_x: d.params.j_x,
            j_y: d.params.j_y,
            alpha: d.params.alpha,
            omega_x: d.omega_x(),
            omega_y: d.omega_y(),
            forward: None,
            inverse: None,
            scratch: Vec::new(),
            site_cos: Vec::new(),
            site_sin: Vec::new(),
            k_cos: Vec::new(),
            k_sin: Vec::new(),
        }
    }

    #[inline]
    fn potential(&self, amps: &mut [Complex64], tau: f64, s: f64) {
        if self.j_y == 0.0 {
            return;
        }
        let (sn, cs) = (self.omega_y * tau).sin_cos();
        let g = s * self.j_y;
        for ((b, &c), &sa) in amps.iter_mut().zip(&self.site_cos).zip(&self.site_sin) {
            let (im, re) = (g * (c * cs - sa * sn)).sin_cos();
            *b *= Complex64::new(re, im);
        }
    }
}

impl Scheme for SplitOperator {
    fn prepare(&mut self, psi: &WaveFunction) {
        let n = psi.len();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        self.scratch = vec![Complex64::new(0.0, 0.0); scratch_len];
        self.forward = Some(forward);
        self.inverse = Some(inverse);
        (self.site_cos, self.site_sin) = psi
            .sites()
            .map(|l| {
                let a = TAU * self.alpha * l as f64;
                (a.cos(), a.sin())
            })
            .unzip();
        (self.k_cos, self.k_sin) = (0..n)
            .map(|m| {
                let k = TAU * m as f64 / n as f64;
                (k.cos(), k.sin())
            })
            .unzip();
    }

    fn step(&mut self, amps: &mut [Complex64], t: f64, h: f64) {
        self.potential(amps, t + 0.25 * h, 0.5 * h);
        if self.j_x != 0.0 {
            let n = amps.len();
            let (fwd, inv) = (self.forward.clone().unwrap(), self.inverse.clone().unwrap());
            fwd.process_with_scratch(amps, &mut self.scratch);
            let (sn, cs) = (self.omega_x * (t + 0.5 * h)).sin_cos();
            let g = h * self.j_x;
            let norm = 1.0 / n as f64;
            for ((c, &kc), &ks) in amps.iter_mut().zip(&self.k_cos).zip(&self.k_sin) {
                // cos(k - w_x tau)
                let (im, re) = (g * (kc * cs + ks * sn)).sin_cos();
                *c *= Complex64::new(re * norm, im * norm);
            }
            inv.process_with_scratch(amps, &mut self.scratch);
        }
        self.potential(amps, t + 0.75 * h, 0.5 * h);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{derive_params, golden_beta, ModelParams};
    use crate::quantum::{dispersion, initial_packet};

    /// `J_n(z) = (1/pi) int_0^pi cos(n tau - z sin tau) d tau`, trapezoidal
    /// rule on the periodic integrand (spectrally accurate).
    fn bessel_j(n: i64, z: f64) -> f64 {
        let m = 400;
        let h = std::f64::consts::PI / m as f64;
        let f = |tau: f64| (n as f64 * tau - z * tau.sin()).cos();
        let mut s = 0.5 * (f(0.0) + f(std::f64::consts::PI));
        for k in 1..m {
            s += f(k as f64 * h);
        }
        s * h / std::f64::consts::PI
    }

    fn free(jx: f64) -> DerivedParams {
        derive_params(&ModelParams::new(jx, 0.0, 0.2, 0.0, 0.5).unwrap()).unwrap()
    }

    fn quiet(d: &DerivedParams) -> PropagationOptions {
        PropagationOptions {
            snapshot_stride: 0,
            ..PropagationOptions::per_period(d)
        }
    }

    #[test]
    fn bessel_oracle_sanity() {
        // J_0(2.404825557695773) = 0, J_1(1) = 0.44005058574493355
        assert!(bessel_j(0, 2.404_825_557_695_773).abs() < 1e-14);
        assert!((bessel_j(1, 1.0) - 0.440_050_585_744_933_55).abs() < 1e-14);
        assert!((bessel_j(-3, 2.0) + bessel_j(3, 2.0)).abs() < 1e-14);
    }

    #[test]
    fn free_chain_matches_bessel() {
        let d = free(1.0);
        let (psi, _) = propagate_eq2(
            WaveFunction::delta(0, 256),
            20.0,
            d.period / 200.0,
            &d,
            &quiet(&d),
        )
        .unwrap();
        for l in -60..=60 {
            let expect = bessel_j(l, 20.0).powi(2);
            assert!(
                (psi.amplitude(l).norm_sqr() - expect).abs() < 1e-8,
                "l = {l}"
            );
        }
    }

    #[test]
    fn diagonal_evolution_keeps_moduli() {
        let d = derive_params(&ModelParams::new(0.0, 1.0, 0.1545, 0.13, 0.43).unwrap()).unwrap();
        let psi = initial_packet(&d, 0.0, 0.4, 64).unwrap();
        let (out, _) = propagate_eq2(
            psi.clone(),
            7.0 * d.period,
            d.period / 200.0,
            &d,
            &quiet(&d),
        )
        .unwrap();
        for (a, b) in psi.amplitudes.iter().zip(&out.amplitudes) {
            assert!((a.norm() - b.norm()).abs() < 1e-13);
        }
    }

    #[test]
    fn norm_is_conserved_and_run_reverses() {
        let d =
            derive_params(&ModelParams::from_drive(1.0, 1.0, 0.1545, 0.45, golden_beta()).unwrap())
                .unwrap();
        let psi = initial_packet(&d, 0.0, 0.0, 512).unwrap();
        let opts = PropagationOptions {
            grow: false,
            ..quiet(&d)
        };
        let dt = d.period / 200.0;
        let (fwd, rec) = propagate_eq2(psi.clone(), 20.0 * d.period, dt, &d, &opts).unwrap();
        assert!(rec.norm_defect < 1e-10, "{}", rec.norm_defect);
        assert!(dispersion(&fwd) > 2.0);
        let (back, _) = propagate_eq2(fwd, 0.0, dt, &d, &opts).unwrap();
        let err = psi
            .amplitudes
            .iter()
            .zip(&back.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn small_window_aborts() {
        let d = free(1.0);
        let opts = PropagationOptions {
            grow: false,
            ..quiet(&d)
        };
        let res = propagate_eq2(
            WaveFunction::delta(0, 32),
            40.0,
            d.period / 200.0,
            &d,
            &opts,
        );
        assert!(matches!(res, Err(crate::Error::EdgeMass { .. })));
    }

    #[test]
    fn window_grows_on_demand() {
        let d = free(1.0);
        let (psi, rec) = propagate_eq2(
            WaveFunction::delta(0, 32),
            40.0,
            d.period / 200.0,
            &d,
            &quiet(&d),
        )
        .unwrap();
        assert!(psi.len() >= 128);
        assert!(rec.max_edge_mass < 1e-10);
        assert!((bessel_j(30, 40.0).powi(2) - psi.amplitude(30).norm_sqr()).abs() < 1e-8);
    }

    #[test]
    fn step_limit() {
        let d = free(1.0);
        assert!(propagate_eq2(
            WaveFunction::delta(0, 32),
            1.0,
            d.period / 100.0,
            &d,
            &quiet(&d)
        )
        .is_err());
    }
}
