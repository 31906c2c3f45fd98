use driven_harper::classical::elliptic_point;
use driven_harper::quantum::{
    initial_packet, propagate_eq2, propagate_eq8, saturation, EvolutionRecord, PropagationOptions,
    PLATEAU_FRACTION, SATURATION_RATIO,
};
use driven_harper::{derive_params, DerivedParams};
use serde_json::{json, Value as Json};

use super::{Ctx, Produced};
use crate::config::Config;
use crate::error::{CliError, Result};
use crate::output::{Artifact, Cell, Csv};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form {
    /// Driven hopping, split-operator.
    Eq2,
    /// Static tilt, Runge-Kutta.
    Eq8,
}

impl Form {
    /// The tilt grows with the window, so the RK4 form needs far finer steps.
    fn default_steps(self) -> usize {
        match self {
            Form::Eq2 => 200,
            Form::Eq8 => 6400,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EvolveSettings {
    pub periods: f64,
    pub steps_per_period: usize,
    pub form: Form,
    pub window: usize,
    pub packet: Option<(f64, f64)>,
    pub snapshot_stride: usize,
    pub density_floor: f64,
}

impl EvolveSettings {
    pub fn from_config(cfg: &Config, default_periods: f64, default_floor: f64) -> Result<Self> {
        let form = match cfg.str_or("form", "eq2")?.as_str() {
            "eq2" => Form::Eq2,
            "eq8" => Form::Eq8,
            other => {
                return Err(CliError::config(
                    "form",
                    format!("expected eq2 or eq8, got {other}"),
                ))
            }
        };
        let window = cfg.count("window", 256, 16)?;
        if window % 2 != 0 {
            return Err(CliError::config("window", "must be even"));
        }
        let packet = match (cfg.f64_opt("packet_x")?, cfg.f64_opt("packet_p")?) {
            (None, None) => None,
            (x, p) => Some((x.unwrap_or(0.0), p.unwrap_or(0.0))),
        };
        let density_floor = cfg.f64_or("density_floor", default_floor)?;
        if density_floor < 0.0 {
            return Err(CliError::config("density_floor", "must be >= 0"));
        }
        Ok(Self {
            periods: cfg.positive("periods", default_periods)?,
            steps_per_period: cfg.count("steps_per_period", form.default_steps(), 200)?,
            form,
            window,
            packet,
            snapshot_stride: cfg.usize_or("snapshot_stride", 5)?,
            density_floor,
        })
    }
}

pub struct Evolution {
    pub record: EvolutionRecord,
    pub centre: (f64, f64),
    pub dt: f64,
}

pub fn evolve(d: &DerivedParams, s: &EvolveSettings) -> Result<Evolution> {
    let centre = s
        .packet
        .unwrap_or_else(|| elliptic_point(d).map(|e| (e.x, e.p)).unwrap_or((0.0, 0.0)));
    let psi = initial_packet(d, centre.0, centre.1, s.window)?;
    let opts = PropagationOptions {
        snapshot_stride: s.snapshot_stride,
        ..PropagationOptions::per_period(d)
    };
    let dt = d.period / s.steps_per_period as f64;
    let t_end = s.periods * d.period;
    let (_, record) = match s.form {
        Form::Eq2 => propagate_eq2(psi, t_end, dt, d, &opts)?,
        Form::Eq8 => propagate_eq8(psi, t_end, dt, d, &opts)?,
    };
    Ok(Evolution { record, centre, dt })
}

/// Dispersion and density tables of one evolution.
pub fn tables(ev: &Evolution, s: &EvolveSettings) -> Result<(Csv, Csv, Json)> {
    let r = &ev.record;
    let mut disp = Csv::new(&["t", "sigma"]);
    for (t, sig) in r.times.iter().zip(&r.sigma) {
        disp.row(&[Cell::F(*t), Cell::F(*sig)]);
    }
    let mut dens = Csv::new(&["t", "l", "density"]);
    for snap in &r.snapshots {
        for (j, rho) in snap.density.iter().enumerate() {
            if *rho >= s.density_floor {
                dens.row(&[
                    Cell::F(snap.time),
                    Cell::I(snap.offset + j as i64),
                    Cell::F(*rho),
                ]);
            }
        }
    }
    let sat = if r.times.len() >= 4 {
        Some(saturation(r)?)
    } else {
        None
    };
    let results = json!({
        "form": match s.form { Form::Eq2 => "eq2", Form::Eq8 => "eq8" },
        "packet_centre": [ev.centre.0, ev.centre.1],
        "saturation": sat,
        "saturation_rule": {
            "plateau_fraction": PLATEAU_FRACTION,
            "ratio_limit": SATURATION_RATIO,
        },
        "norm_defect": r.norm_defect,
        "max_edge_mass": r.max_edge_mass,
        "final_window": r.final_len,
        "density_floor": s.density_floor,
    });
    Ok((disp, dens, results))
}

pub fn run(ctx: &Ctx) -> Result<Produced> {
    let cfg = ctx.cfg;
    let (params, _) = cfg.model()?;
    let d = derive_params(&params)?;
    let s = EvolveSettings::from_config(cfg, 100.0, 0.0)?;
    cfg.reject_unknown()?;
    ctx.note(format!("propagating {} periods", s.periods));
    let ev = evolve(&d, &s)?;
    let (disp, dens, results) = tables(&ev, &s)?;
    Ok(Produced {
        artifacts: vec![
            Artifact::csv("dispersion.csv", &disp, results.clone()),
            Artifact::csv("density.csv", &dens, results),
        ],
        derived: json!(d),
        dt: json!(ev.dt),
        seed: None,
    })
}
