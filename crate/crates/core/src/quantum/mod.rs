//! Wave-packet dynamics of the driven chain.
//!
//! Two propagators are kept side by side. [`propagate_eq2`] integrates the
//! drive-phased hopping form with a split-operator scheme on a periodic
//! window; [`propagate_eq8`] integrates the gauge-equivalent tilted form
//! `i db_l/dt = -J_x/2 (b_{l+1} + b_{l-1}) - J_y cos(2 pi alpha l + w_y t) b_l + w_x l b_l`
//! with classical RK4 between hard walls. Densities of the two agree.

mod rk4;
mod split;

pub use rk4::propagate_eq8;
pub use split::propagate_eq2;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::params::DerivedParams;

/// Amplitudes `b_l` for `l = offset .. offset + len`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    pub amplitudes: Vec<Complex64>,
    pub offset: i64,
    pub time: f64,
}

impl WaveFunction {
    /// Single occupied site `l0` in a window of `len` sites centred on it.
    pub fn delta(l0: i64, len: usize) -> Self {
        let offset = l0 - (len / 2) as i64;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); len];
        amplitudes[(l0 - offset) as usize] = Complex64::new(1.0, 0.0);
        Self {
            amplitudes,
            offset,
            time: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Lattice index of slot `j`.
    #[inline]
    pub fn site(&self, j: usize) -> i64 {
        self.offset + j as i64
    }

    pub fn sites(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.len()).map(|j| self.site(j))
    }

    pub fn amplitude(&self, l: i64) -> Complex64 {
        let j = l - self.offset;
        if j < 0 || j >= self.len() as i64 {
            Complex64::new(0.0, 0.0)
        } else {
            self.amplitudes[j as usize]
        }
    }

    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|b| b.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|b| b.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            self.amplitudes.iter_mut().for_each(|b| *b /= n);
        }
    }

    /// `|b_first|^2 + |b_last|^2`.
    pub fn edge_mass(&self) -> f64 {
        match (self.amplitudes.first(), self.amplitudes.last()) {
            (Some(a), Some(b)) if self.len() > 1 => a.norm_sqr() + b.norm_sqr(),
            (Some(a), _) => a.norm_sqr(),
            _ => 0.0,
        }
    }

    /// Probability carried by the outer `width` slots on each side.
    pub(crate) fn rim_mass(&self, width: usize) -> f64 {
        let n = self.len();
        let w = width.min(n / 2);
        self.amplitudes[..w]
            .iter()
            .chain(&self.amplitudes[n - w..])
            .map(|b| b.norm_sqr())
            .sum()
    }

    /// Doubles the window, keeping the occupied part centred.
    pub(crate) fn grow(&mut self) {
        let n = self.len();
        let pad = n / 2;
        let zero = Complex64::new(0.0, 0.0);
        let mut amps = Vec::with_capacity(2 * n);
        amps.resize(pad, zero);
        amps.extend_from_slice(&self.amplitudes);
        amps.resize(2 * n, zero);
        self.amplitudes = amps;
        self.offset -= pad as i64;
    }
}

/// Width `sigma` of the site distribution, using absolute indices.
pub fn dispersion(psi: &WaveFunction) -> f64 {
    let mass = psi.norm_sqr();
    if mass == 0.0 {
        return 0.0;
    }
    let mean = psi
        .amplitudes
        .iter()
        .enumerate()
        .map(|(j, b)| j as f64 * b.norm_sqr())
        .sum::<f64>()
        / mass;
    let var = psi
        .amplitudes
        .iter()
        .enumerate()
        .map(|(j, b)| (j as f64 - mean).powi(2) * b.norm_sqr())
        .sum::<f64>()
        / mass;
    var.max(0.0).sqrt()
}

/// Minimal-uncertainty packet at classical phase-space point
/// `(center_x, center_p)`, with position `x = 2 pi alpha l`. The site width is
/// `sqrt(1 / (2 hbar_eff))`, i.e. `sqrt(hbar_eff / 2)` in `x`.
pub fn initial_packet(
    d: &DerivedParams,
    center_x: f64,
    center_p: f64,
    len: usize,
) -> Result<WaveFunction> {
    if len < 2 || !len.is_multiple_of(2) {
        return Err(invalid(
            "L",
            format!("window must be even and >= 2, got {len}"),
        ));
    }
    let width = (0.5 / d.hbar_eff).sqrt();
    if width > len as f64 / 8.0 {
        return Err(invalid(
            "L",
            format!("packet width {width:.3} sites exceeds L/8 for L = {len}"),
        ));
    }
    let lc = center_x / d.hbar_eff;
    let offset = lc.round() as i64 - (len / 2) as i64;
    let amplitudes = (0..len)
        .map(|j| {
            let l = (offset + j as i64) as f64;
            let u = (l - lc) / width;
            Complex64::from_polar((-0.25 * u * u).exp(), center_p * l)
        })
        .collect();
    let mut psi = WaveFunction {
        amplitudes,
        offset,
        time: 0.0,
    };
    psi.normalize();
    Ok(psi)
}

/// Which equation of motion produced a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Gauge {
    /// Phased hopping, split-operator on a periodic window.
    DrivenHopping,
    /// Static tilt, RK4 with hard walls.
    Tilted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub time: f64,
    pub offset: i64,
    pub density: Vec<f64>,
}

impl Snapshot {
    pub fn density_at(&self, l: i64) -> f64 {
        let j = l - self.offset;
        if j < 0 || j >= self.density.len() as i64 {
            0.0
        } else {
            self.density[j as usize]
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolutionRecord {
    pub times: Vec<f64>,
    pub sigma: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    pub gauge: Gauge,
    /// Largest `|1 - norm|` seen at a sample.
    pub norm_defect: f64,
    /// Largest edge mass seen at a sample.
    pub max_edge_mass: f64,
    /// Window length at the end of the run.
    pub final_len: usize,
}

/// Knobs shared by both propagators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PropagationOptions {
    /// Time between sigma samples.
    pub sample_every: f64,
    /// Keep a density snapshot every this many samples; 0 disables.
    pub snapshot_stride: usize,
    /// Double the window when the outer eighth carries more than
    /// `grow_threshold` probability.
    pub grow: bool,
    pub grow_threshold: f64,
    /// Abort when the edge mass exceeds this.
    pub edge_limit: f64,
    /// Never grow beyond this many sites.
    pub max_len: usize,
}

impl PropagationOptions {
    /// One sample per drive period, a snapshot every fifth.
    pub fn per_period(d: &DerivedParams) -> Self {
        Self {
            sample_every: d.period,
            snapshot_stride: 5,
            grow: true,
            grow_threshold: 1e-12,
            edge_limit: 1e-8,
            max_len: 1 << 20,
        }
    }
}

/// Plateau estimate of a dispersion history.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SaturationEstimate {
    /// Mean sigma over the final 20% of the run.
    pub sigma_max: f64,
    /// First time sigma reaches 95% of `sigma_max`.
    pub t_sat: f64,
    /// `sigma(T) / sigma(T/2)`.
    pub growth_ratio: f64,
    pub saturated: bool,
}

/// Plateau fraction of the run used for `sigma_max`.
pub const PLATEAU_FRACTION: f64 = 0.2;
/// Saturated iff `sigma(T) / sigma(T/2)` is below this.
pub const SATURATION_RATIO: f64 = 1.2;

pub fn saturation(record: &EvolutionRecord) -> Result<SaturationEstimate> {
    saturation_of(&record.times, &record.sigma)
}

pub fn saturation_of(times: &[f64], sigma: &[f64]) -> Result<SaturationEstimate> {
    if times.len() != sigma.len() || times.len() < 3 {
        return Err(invalid("record", "need at least three matching samples"));
    }
    let (t0, t1) = (times[0], *times.last().unwrap());
    let cut = t0 + (1.0 - PLATEAU_FRACTION) * (t1 - t0);
    let tail: Vec<f64> = times
        .iter()
        .zip(sigma)
        .filter(|(t, _)| **t >= cut)
        .map(|(_, s)| *s)
        .collect();
    let sigma_max = tail.iter().sum::<f64>() / tail.len() as f64;
    let half = 0.5 * (t0 + t1);
    let s_half = interpolate(times, sigma, half);
    let growth_ratio = sigma.last().unwrap() / s_half;
    let t_sat = times
        .iter()
        .zip(sigma)
        .find(|(_, s)| **s >= 0.95 * sigma_max)
        .map(|(t, _)| *t)
        .unwrap_or(t1);
    Ok(SaturationEstimate {
        sigma_max,
        t_sat,
        growth_ratio,
        saturated: growth_ratio < SATURATION_RATIO,
    })
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let k = xs.partition_point(|&v| v < x);
    if k == 0 {
        return ys[0];
    }
    if k >= xs.len() {
        return *ys.last().unwrap();
    }
    let (x0, x1) = (xs[k - 1], xs[k]);
    let w = if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.0 };
    ys[k - 1] * (1.0 - w) + ys[k] * w
}

/// Sample schedule shared by the propagators: `(time, steps, step length)`
/// for each interval between successive samples.
pub(crate) fn schedule(t_start: f64, t_end: f64, every: f64, dt: f64) -> Vec<(f64, usize, f64)> {
    use crate::stepping::step_plan as plan;
    let span = t_end - t_start;
    if span == 0.0 {
        return Vec::new();
    }
    let dir = span.signum();
    let n_full = ((span.abs() / every) * (1.0 + 1e-12)).floor() as usize;
    let mut out = Vec::with_capacity(n_full + 1);
    let mut t = t_start;
    for k in 1..=n_full {
        let next = t_start + dir * every * k as f64;
        let (n, h) = plan(next - t, dt);
        out.push((next, n, h));
        t = next;
    }
    if (t_end - t).abs() > 1e-9 * every {
        let (n, h) = plan(t_end - t, dt);
        out.push((t_end, n, h));
    }
    out
}

pub(crate) fn check_dt(dt: f64, d: &DerivedParams) -> Result<()> {
    if !(dt > 0.0) {
        return Err(invalid("dt", format!("must be > 0, got {dt}")));
    }
    if dt > d.period / 200.0 * (1.0 + 1e-12) {
        return Err(invalid(
            "dt",
            format!("must be <= T_y/200 = {}, got {dt}", d.period / 200.0),
        ));
    }
    Ok(())
}

/// Shared sampling/growth/edge bookkeeping around a scheme.
pub(crate) fn run(
    mut psi: WaveFunction,
    t_end: f64,
    dt: f64,
    opts: &PropagationOptions,
    scheme: &mut impl Scheme,
    gauge: Gauge,
) -> Result<(WaveFunction, EvolutionRecord)> {
    if !(opts.sample_every > 0.0) {
        return Err(invalid("sample_every", "must be > 0"));
    }
    if !t_end.is_finite() {
        return Err(invalid("t_end", "must be finite"));
    }
    let mut record = EvolutionRecord {
        times: vec![psi.time],
        sigma: vec![dispersion(&psi)],
        snapshots: Vec::new(),
        gauge,
        norm_defect: (1.0 - psi.norm_sqr()).abs(),
        max_edge_mass: psi.edge_mass(),
        final_len: psi.len(),
    };
    if opts.snapshot_stride > 0 {
        record.snapshots.push(Snapshot {
            time: psi.time,
            offset: psi.offset,
            density: psi.density(),
        });
    }
    scheme.prepare(&psi);
    let plan = schedule(psi.time, t_end, opts.sample_every, dt);
    for (k, (t_next, n, h)) in plan.into_iter().enumerate() {
        check_stable(scheme, h.abs(), psi.len())?;
        let t0 = psi.time;
        for s in 0..n {
            while opts.grow
                && psi.len() < opts.max_len
                && psi.rim_mass(psi.len() / 8) > opts.grow_threshold
            {
                psi.grow();
                scheme.prepare(&psi);
                check_stable(scheme, h.abs(), psi.len())?;
            }
            scheme.step(&mut psi.amplitudes, t0 + s as f64 * h, h);
        }
        psi.time = t_next;

        let edge = psi.edge_mass();
        if !edge.is_finite() {
            return Err(crate::Error::NonFinite {
                t: t_next,
                detail: "wave function".into(),
            });
        }
        if edge > opts.edge_limit {
            return Err(crate::Error::EdgeMass {
                mass: edge,
                limit: opts.edge_limit,
                t: t_next,
            });
        }
        record.max_edge_mass = record.max_edge_mass.max(edge);
        record.norm_defect = record.norm_defect.max((1.0 - psi.norm_sqr()).abs());
        record.times.push(t_next);
        record.sigma.push(dispersion(&psi));
        if opts.snapshot_stride > 0 && (k + 1) % opts.snapshot_stride == 0 {
            record.snapshots.push(Snapshot {
                time: t_next,
                offset: psi.offset,
                density: psi.density(),
            });
        }
    }
    record.final_len = psi.len();
    Ok((psi, record))
}

/// One propagation scheme: precomputes per-window tables, then steps the
/// amplitude vector of that window in place.
pub(crate) trait Scheme {
    fn prepare(&mut self, psi: &WaveFunction);
    fn step(&mut self, amps: &mut [Complex64], t: f64, h: f64);
    /// Largest stable step for the prepared window.
    fn max_step(&self) -> f64 {
        f64::INFINITY
    }
}

fn check_stable(scheme: &impl Scheme, h: f64, len: usize) -> Result<()> {
    let limit = scheme.max_step();
    if h > limit {
        return Err(invalid(
            "dt",
            format!("step {h:e} exceeds the stability limit {limit:e} of a {len}-site window; use more steps per period"),
        ));
    }
    Ok(())
}
