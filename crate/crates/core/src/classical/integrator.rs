use super::{wrap_angle, PhasePoint, Trajectory};
use crate::error::{invalid, Error, Result};
use crate::params::DerivedParams;
use crate::stepping::step_plan;

/// Second-order Strang splitting of the co-moving Hamiltonian
/// `-J'_x cos p' + w_y p'` plus `-J'_y cos x' + w_x x'`, written back in lab
/// coordinates: half kick in `p`, full drift in `x`, half kick in `p`.
#[derive(Debug, Clone, Copy)]
pub struct Integrator<'a> {
    d: &'a DerivedParams,
}

impl<'a> Integrator<'a> {
    pub fn new(d: &'a DerivedParams) -> Self {
        Self { d }
    }

    /// One step from `t` to `t + dt`. A negative `dt` exactly inverts the
    /// forward step taken from `t + dt`.
    #[inline]
    pub fn step(&self, pt: PhasePoint, t: f64, dt: f64) -> PhasePoint {
        let d = self.d;
        let (wx, wy) = (d.omega_x(), d.omega_y());
        let half = 0.5 * dt;
        let mut p = pt.p - half * d.jp_y * (pt.x + wy * t).sin();
        let x = pt.x + dt * d.jp_x * (p - wx * (t + half)).sin();
        p -= half * d.jp_y * (x + wy * (t + dt)).sin();
        PhasePoint { x, p }
    }

    /// Advances from `t0` to `t1` with steps no longer than `dt`, calling
    /// `visit(t, pt)` after every step.
    pub fn advance_with(
        &self,
        mut pt: PhasePoint,
        t0: f64,
        t1: f64,
        dt: f64,
        mut visit: impl FnMut(f64, PhasePoint),
    ) -> Result<PhasePoint> {
        let d = self.d;
        let (wx, wy) = (d.omega_x(), d.omega_y());
        let (n, h) = step_plan(t1 - t0, dt);
        let half = 0.5 * h;
        // the closing half kick of one step is the opening one of the next
        let mut kick = d.jp_y * (pt.x + wy * t0).sin();
        for k in 0..n {
            let t = t0 + k as f64 * h;
            let t_next = t0 + (k + 1) as f64 * h;
            let p = pt.p - half * kick;
            let x = pt.x + h * d.jp_x * (p - wx * (t + half)).sin();
            kick = d.jp_y * (x + wy * t_next).sin();
            pt = PhasePoint {
                x,
                p: p - half * kick,
            };
            visit(t_next, pt);
        }
        if !pt.is_finite() {
            return Err(Error::NonFinite {
                t: t1,
                detail: format!("classical state {pt:?}"),
            });
        }
        Ok(pt)
    }

    pub fn advance(&self, pt: PhasePoint, t0: f64, t1: f64, dt: f64) -> Result<PhasePoint> {
        self.advance_with(pt, t0, t1, dt, |_, _| {})
    }
}

fn check_step(dt: f64, d: &DerivedParams) -> Result<()> {
    if !(dt > 0.0) {
        return Err(invalid("dt", format!("must be > 0, got {dt}")));
    }
    if dt > d.period / 50.0 * (1.0 + 1e-12) {
        return Err(invalid(
            "dt",
            format!(
                "must resolve the drive (<= T_y/50 = {}), got {dt}",
                d.period / 50.0
            ),
        ));
    }
    Ok(())
}

/// Integrates on the plane, recording every step.
pub fn integrate(pt: PhasePoint, t_end: f64, dt: f64, d: &DerivedParams) -> Result<Trajectory> {
    check_step(dt, d)?;
    if !(t_end >= 0.0) {
        return Err(invalid("t_end", format!("must be >= 0, got {t_end}")));
    }
    let (n, _) = step_plan(t_end, dt);
    let mut times = Vec::with_capacity(n + 1);
    let mut points = Vec::with_capacity(n + 1);
    times.push(0.0);
    points.push(pt);
    Integrator::new(d).advance_with(pt, 0.0, t_end, dt, |t, q| {
        times.push(t);
        points.push(q);
    })?;
    Ok(Trajectory {
        times,
        points,
        wrapped: false,
    })
}

/// Samples the flow once per drive period, reduced onto the torus.
/// Each period is covered by a whole number of steps.
pub fn stroboscopic_map(
    pt: PhasePoint,
    n_periods: usize,
    d: &DerivedParams,
    dt: f64,
) -> Result<Trajectory> {
    check_step(dt, d)?;
    let integ = Integrator::new(d);
    let (_, h) = step_plan(d.period, dt);
    let mut times = Vec::with_capacity(n_periods + 1);
    let mut points = Vec::with_capacity(n_periods + 1);
    let mut cur = pt;
    times.push(0.0);
    points.push(pt.wrapped());
    for k in 0..n_periods {
        let t0 = k as f64 * d.period;
        cur = integ.advance(cur, t0, t0 + d.period, h)?;
        // keep the plane coordinates small; all forces are 2 pi periodic
        cur = PhasePoint::new(wrap_angle(cur.x), wrap_angle(cur.p));
        if !cur.is_finite() {
            return Err(Error::NonFinite {
                t: t0 + d.period,
                detail: format!("stroboscopic state {cur:?}"),
            });
        }
        times.push((k + 1) as f64 * d.period);
        points.push(cur);
    }
    Ok(Trajectory {
        times,
        points,
        wrapped: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::conserved_quantity;
    use crate::params::{derive_params, golden_beta, ModelParams};
    use proptest::prelude::*;

    fn map_drive(beta: f64) -> DerivedParams {
        derive_params(&ModelParams::from_drive(1.0, 1.0, 0.1545, 0.3, beta).unwrap()).unwrap()
    }

    #[test]
    fn decoupled_drift_is_exact() {
        let d = derive_params(&ModelParams::new(1.0, 0.0, 0.2, 0.0, 0.5).unwrap()).unwrap();
        let start = PhasePoint::new(0.4, 1.1);
        let dt = d.period / 200.0;
        let traj = integrate(start, 30.0 * d.period, dt, &d).unwrap();
        for (t, q) in traj.times.iter().zip(&traj.points) {
            assert_eq!(q.p, start.p);
            let expect = start.x + d.jp_x * start.p.sin() * t;
            assert!((q.x - expect).abs() < 1e-10 * (1.0 + expect.abs()));
        }
    }

    #[test]
    fn step_validation() {
        let d = map_drive(1.0 / 3.0);
        assert!(integrate(PhasePoint::new(0.0, 0.0), 1.0, 0.0, &d).is_err());
        assert!(integrate(PhasePoint::new(0.0, 0.0), 1.0, d.period / 10.0, &d).is_err());
        assert!(integrate(PhasePoint::new(0.0, 0.0), -1.0, d.period / 100.0, &d).is_err());
    }

    #[test]
    fn stroboscopic_zero_periods() {
        let d = map_drive(1.0 / 3.0);
        let start = PhasePoint::new(1.0, -2.0);
        let tr = stroboscopic_map(start, 0, &d, d.period / 200.0).unwrap();
        assert_eq!(tr.points, vec![start]);
        assert!(tr.wrapped);
    }

    #[test]
    fn island_orbit_stays_in_island() {
        // the island is fixed in the co-moving frame x' = x + w_y t, p' = p - w_x t
        for beta in [1.0 / 3.0, golden_beta()] {
            let d = map_drive(beta);
            let tr =
                stroboscopic_map(PhasePoint::new(0.0, 0.0), 1000, &d, d.period / 200.0).unwrap();
            for (t, q) in tr.times.iter().zip(&tr.points) {
                let c = PhasePoint::new(q.x + d.omega_y() * t, q.p - d.omega_x() * t).wrapped();
                assert!(c.x.abs() < 1.2 && c.p.abs() < 1.2, "left island: {c:?}");
            }
        }
    }

    #[test]
    fn one_period_map_is_area_preserving() {
        let d = map_drive(golden_beta());
        let integ = Integrator::new(&d);
        let dt = d.period / 200.0;
        let h = 1e-6;
        let map = |q: PhasePoint| integ.advance(q, 0.0, d.period, dt).unwrap();
        for &(x, p) in &[(0.3, 0.2), (-2.0, 1.7), (2.5, -3.0), (0.9, 2.2)] {
            let fxp = map(PhasePoint::new(x + h, p));
            let fxm = map(PhasePoint::new(x - h, p));
            let fpp = map(PhasePoint::new(x, p + h));
            let fpm = map(PhasePoint::new(x, p - h));
            let j11 = (fxp.x - fxm.x) / (2.0 * h);
            let j21 = (fxp.p - fxm.p) / (2.0 * h);
            let j12 = (fpp.x - fpm.x) / (2.0 * h);
            let j22 = (fpp.p - fpm.p) / (2.0 * h);
            let det = j11 * j22 - j12 * j21;
            assert!((det - 1.0).abs() < 1e-6, "det = {det}");
        }
    }

    #[test]
    fn torus_consistency() {
        let d = map_drive(golden_beta());
        let integ = Integrator::new(&d);
        let dt = d.period / 200.0;
        let mut plane = PhasePoint::new(0.7, -2.9);
        let mut torus = plane;
        for k in 0..50 {
            let t0 = k as f64 * d.period;
            plane = integ.advance(plane, t0, t0 + d.period, dt).unwrap();
            torus = integ
                .advance(torus, t0, t0 + d.period, dt)
                .unwrap()
                .wrapped();
        }
        let w = plane.wrapped();
        assert!((w.x - torus.x).abs() < 1e-9 && (w.p - torus.p).abs() < 1e-9);
    }

    #[test]
    fn conservation_error_is_second_order() {
        let d = map_drive(1.0 / 3.0);
        let start = PhasePoint::new(1.3, -0.4);
        let drift = |dt: f64| {
            let integ = Integrator::new(&d);
            let e0 = conserved_quantity(start, 0.0, &d);
            let mut worst = 0.0f64;
            integ
                .advance_with(start, 0.0, 50.0 * d.period, dt, |t, q| {
                    worst = worst.max((conserved_quantity(q, t, &d) - e0).abs());
                })
                .unwrap();
            worst
        };
        let coarse = drift(d.period / 100.0);
        let fine = drift(d.period / 200.0);
        let ratio = coarse / fine;
        assert!((3.2..4.8).contains(&ratio), "ratio {ratio}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn forward_then_backward_is_identity(x in -10.0f64..10.0, p in -10.0f64..10.0,
                                              t in 0.0f64..100.0) {
            let d = map_drive(golden_beta());
            let integ = Integrator::new(&d);
            let dt = d.period / 200.0;
            let q = PhasePoint::new(x, p);
            let back = integ.step(integ.step(q, t, dt), t + dt, -dt);
            prop_assert!((back.x - x).abs() < 1e-10 && (back.p - p).abs() < 1e-10);
        }
    }
}
