use driven_harper::classical::{
    bessel_drift_ratio, elliptic_point, ensemble_dispersion, island_scan_with_step, spreading_rate,
    streamed_velocity, stroboscopic_map, torus_occupancy, Ensemble, PhasePoint,
};
use driven_harper::{derive_params, DerivedParams};
use serde_json::{json, Value as Json};

use super::{Ctx, Produced};
use crate::config::{Config, Template};
use crate::error::{CliError, Result};
use crate::output::{Artifact, Cell, Csv};

pub fn map(ctx: &Ctx) -> Result<Produced> {
    let cfg = ctx.cfg;
    let (params, _) = cfg.model()?;
    let d = derive_params(&params)?;
    let periods = cfg.count("periods", 1000, 0)?;
    let steps = cfg.count("steps_per_period", 200, 50)?;
    let n_orbits = cfg.usize_or("n_orbits", 0)?;
    let x0 = cfg.f64_opt("x0")?;
    let p0 = cfg.f64_opt("p0")?;
    cfg.reject_unknown()?;
    let starts = orbit_starts(&d, n_orbits, x0, p0, ctx.seed);
    let dt = d.period / steps as f64;
    ctx.note(format!(
        "stroboscopic map: {} orbits x {periods} periods",
        starts.len()
    ));
    let (csv, results) = map_table(&d, &starts, periods, dt)?;
    Ok(Produced {
        artifacts: vec![Artifact::csv("classical_map.csv", &csv, results)],
        derived: json!(d),
        dt: json!(dt),
        seed: (n_orbits > 0).then_some(ctx.seed),
    })
}

/// The island centre (or an explicit start) followed by `n_random` uniform
/// starts on the elementary cell.
pub fn orbit_starts(
    d: &DerivedParams,
    n_random: usize,
    x0: Option<f64>,
    p0: Option<f64>,
    seed: u64,
) -> Vec<PhasePoint> {
    let first = match (x0, p0) {
        (None, None) => elliptic_point(d).unwrap_or(PhasePoint::new(0.0, 0.0)),
        (x, p) => PhasePoint::new(x.unwrap_or(0.0), p.unwrap_or(0.0)),
    };
    let mut starts = vec![first];
    if n_random > 0 {
        starts.extend(Ensemble::uniform_cell(n_random, seed).members);
    }
    starts
}

pub fn map_table(
    d: &DerivedParams,
    starts: &[PhasePoint],
    periods: usize,
    dt: f64,
) -> Result<(Csv, Json)> {
    use rayon::prelude::*;
    let trajs: Vec<_> = starts
        .par_iter()
        .map(|&s| stroboscopic_map(s, periods, d, dt))
        .collect::<Result<_, _>>()?;
    let t_end = periods as f64 * d.period;
    let velocities: Vec<Option<f64>> = starts
        .par_iter()
        .map(|&s| {
            (periods > 0)
                .then(|| streamed_velocity(s, t_end, dt, d))
                .transpose()
        })
        .collect::<Result<_, _>>()?;
    let equal_split = (d.omega_x() - d.omega_y()).abs() <= 1e-12 * d.omega_y();
    let mut csv = Csv::new(&["orbit", "t", "x_mod", "p_mod"]);
    let mut orbits = Vec::new();
    for (k, tr) in trajs.iter().enumerate() {
        for (t, q) in tr.times.iter().zip(&tr.points) {
            csv.row(&[Cell::U(k as u64), Cell::F(*t), Cell::F(q.x), Cell::F(q.p)]);
        }
        let (coarse, fine) = (
            torus_occupancy(&tr.points, 32),
            torus_occupancy(&tr.points, 64),
        );
        orbits.push(json!({
            "orbit": k,
            "start": starts[k],
            "occupied_bins_32": coarse,
            "occupied_bins_64": fine,
            "box_count_ratio": fine as f64 / coarse.max(1) as f64,
            "mean_velocity": velocities[k],
            "velocity_over_j1": velocities[k].filter(|_| equal_split).map(|v| bessel_drift_ratio(v, d)),
        }));
    }
    Ok((csv, json!({ "orbits": orbits })))
}

#[derive(Debug, Clone, Copy)]
pub struct SpreadSettings {
    pub ensemble: usize,
    pub periods: f64,
    pub samples: usize,
    pub steps_per_period: usize,
    pub island_grid: usize,
    pub island_periods: f64,
}

impl SpreadSettings {
    pub fn from_config(cfg: &Config, island_grid: usize) -> Result<Self> {
        let s = Self {
            ensemble: cfg.count("ensemble", 1000, 2)?,
            periods: cfg.positive("periods", 1000.0)?,
            samples: cfg.count("samples", 200, 4)?,
            steps_per_period: cfg.count("steps_per_period", 200, 50)?,
            island_grid: cfg.usize_or("island_grid", island_grid)?,
            island_periods: cfg.positive("island_periods", 200.0)?,
        };
        if s.island_grid > 0 && s.island_periods < 200.0 {
            return Err(CliError::config("island_periods", "must be >= 200"));
        }
        Ok(s)
    }

    pub fn to_json(&self) -> Json {
        json!({
            "ensemble": self.ensemble,
            "periods": self.periods,
            "samples": self.samples,
            "steps_per_period": self.steps_per_period,
            "island_grid": self.island_grid,
            "island_periods": self.island_periods,
        })
    }
}

pub struct SpreadPoint {
    pub omega: f64,
    pub series: Vec<(f64, f64)>,
    pub a: f64,
    pub residual: f64,
    pub ballistic: bool,
    pub s: Option<f64>,
}

pub fn spread_point(d: &DerivedParams, s: &SpreadSettings, seed: u64) -> Result<SpreadPoint> {
    let e = Ensemble::uniform_cell(s.ensemble, seed);
    let t_end = s.periods * d.period;
    let grid: Vec<f64> = (0..=s.samples)
        .map(|k| t_end * k as f64 / s.samples as f64)
        .collect();
    let dt = d.period / s.steps_per_period as f64;
    let series = ensemble_dispersion(&e, &grid, d, dt)?;
    let fit = spreading_rate(&series)?;
    let isl = if s.island_grid > 0 {
        let scan = island_scan_with_step(
            d,
            s.island_grid,
            s.island_grid,
            s.island_periods * d.period,
            dt,
        )?;
        Some(scan.s)
    } else {
        None
    };
    Ok(SpreadPoint {
        omega: d.omega,
        series,
        a: fit.a,
        residual: fit.residual,
        ballistic: fit.ballistic,
        s: isl,
    })
}

/// Ensemble spreading for each drive frequency: a dispersion table and a
/// summary table. The same seed is used at every frequency.
pub fn spread_tables(
    ctx: &Ctx,
    template: &Template,
    omegas: &[f64],
    s: &SpreadSettings,
) -> Result<(Csv, Csv, Vec<DerivedParams>)> {
    let ds: Vec<DerivedParams> = omegas
        .iter()
        .map(|&w| Ok(derive_params(&template.at(w, template.alpha, "omegas")?)?))
        .collect::<Result<_>>()?;
    let mut disp = Csv::new(&["omega", "t", "sigma"]);
    let mut summary = Csv::new(&["omega", "A", "S", "residual", "ballistic"]);
    for d in &ds {
        ctx.note(format!("ensemble spreading at omega = {}", d.omega));
        let pt = spread_point(d, s, ctx.seed)?;
        for &(t, sig) in &pt.series {
            disp.row(&[Cell::F(pt.omega), Cell::F(t), Cell::F(sig)]);
        }
        summary.row(&[
            Cell::F(pt.omega),
            Cell::F(pt.a),
            Cell::F(pt.s.unwrap_or(f64::NAN)),
            Cell::F(pt.residual),
            Cell::B(pt.ballistic),
        ]);
    }
    Ok((disp, summary, ds))
}

pub fn omegas(cfg: &Config) -> Result<Vec<f64>> {
    let single = cfg.f64_opt("omega")?;
    let list = cfg.f64_list_opt("omegas")?;
    match (single, list) {
        (Some(_), Some(_)) => Err(CliError::config("omegas", "give omega or omegas, not both")),
        (Some(w), None) => Ok(vec![w]),
        (None, Some(l)) => Ok(l),
        (None, None) => Err(CliError::config(
            "omega",
            "required key is missing (or give omegas)",
        )),
    }
}

pub fn spread(ctx: &Ctx) -> Result<Produced> {
    let cfg = ctx.cfg;
    let template = cfg.template()?;
    let omegas = omegas(cfg)?;
    let s = SpreadSettings::from_config(cfg, 0)?;
    cfg.reject_unknown()?;
    let (disp, summary, ds) = spread_tables(ctx, &template, &omegas, &s)?;
    let dts: Vec<f64> = ds
        .iter()
        .map(|d| d.period / s.steps_per_period as f64)
        .collect();
    let settings = json!({ "spreading": s.to_json(), "fit_window": "final half" });
    Ok(Produced {
        artifacts: vec![
            Artifact::csv("dispersion.csv", &disp, settings.clone()),
            Artifact::csv("spread_summary.csv", &summary, settings),
        ],
        derived: json!(ds),
        dt: json!(dts),
        seed: Some(ctx.seed),
    })
}

pub fn islands(ctx: &Ctx) -> Result<Produced> {
    let cfg = ctx.cfg;
    let (params, _) = cfg.model()?;
    let d = derive_params(&params)?;
    let nx = cfg.count("grid_nx", 64, 1)?;
    let np = cfg.count("grid_np", 64, 1)?;
    let periods = cfg.positive("periods", 200.0)?;
    if periods < 200.0 {
        return Err(CliError::config("periods", "must be >= 200"));
    }
    let steps = cfg.count("steps_per_period", 200, 50)?;
    cfg.reject_unknown()?;
    let dt = d.period / steps as f64;
    ctx.note(format!("island scan on a {nx} x {np} grid"));
    let scan = island_scan_with_step(&d, nx, np, periods * d.period, dt)?;
    let mut csv = Csv::new(&["x", "p", "label", "velocity"]);
    for i in 0..nx {
        for j in 0..np {
            let c = scan.cell_center(i, j);
            let k = i * np + j;
            csv.row(&[
                Cell::F(c.x),
                Cell::F(c.p),
                Cell::U(scan.labels[k] as u64),
                Cell::F(scan.velocities[k]),
            ]);
        }
    }
    let results = json!({
        "S": scan.s,
        "t_measure": scan.t_measure,
        "label": "1 = transporting (|v + omega_y| < 0.1 omega_y)",
    });
    Ok(Produced {
        artifacts: vec![Artifact::csv("island_scan.csv", &csv, results)],
        derived: json!(d),
        dt: json!(dt),
        seed: None,
    })
}
