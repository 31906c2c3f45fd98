//! Canned parameter sets for the four figures. Size knobs (ensemble, periods,
//! grids, L, ...) may still be overridden through the config.

use driven_harper::{derive_params, golden_beta, BetaClass};
use serde_json::{json, Value as Json};

use super::classical::{map_table, orbit_starts, spread_tables, SpreadSettings};
use super::floquet::{eigenstate_dump, scan_settings, scan_tables};
use super::quantum::{evolve, tables, EvolveSettings};
use super::{linspace, logspace, Ctx, Produced};
use crate::config::Template;
use crate::error::{CliError, Result};
use crate::output::Artifact;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Figure {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
}

const ALPHA: f64 = 0.1545;

fn betas() -> [(&'static str, BetaClass); 2] {
    [
        ("rational", BetaClass::rational(1, 3).expect("1/3")),
        ("irrational", BetaClass::golden()),
    ]
}

fn template(beta: BetaClass) -> Template {
    Template {
        j_x: 1.0,
        j_y: 1.0,
        alpha: ALPHA,
        beta,
    }
}

pub fn run(ctx: &Ctx, fig: Figure) -> Result<Produced> {
    match fig {
        Figure::Fig1 => fig1(ctx),
        Figure::Fig2 => fig2(ctx),
        Figure::Fig3 => fig3(ctx),
        Figure::Fig4 => fig4(ctx),
    }
}

fn fig1(ctx: &Ctx) -> Result<Produced> {
    let cfg = ctx.cfg;
    let omega = cfg.positive("omega", 0.3)?;
    let periods = cfg.count("periods", 1000, 0)?;
    let steps = cfg.count("steps_per_period", 200, 50)?;
    let n_orbits = cfg.usize_or("n_orbits", 30)?;
    cfg.reject_unknown()?;
    let mut artifacts = Vec::new();
    let mut derived = Vec::new();
    let mut dts = Vec::new();
    for (name, beta) in betas() {
        let d = derive_params(&template(beta).at(omega, ALPHA, "omega")?)?;
        let dt = d.period / steps as f64;
        ctx.note(format!("fig1 {name}: {} orbits", n_orbits + 1));
        let starts = orbit_starts(&d, n_orbits, None, None, ctx.seed);
        let (csv, results) = map_table(&d, &starts, periods, dt)?;
        artifacts.push(Artifact::csv(format!("fig1_{name}.csv"), &csv, results));
        derived.push(d);
        dts.push(dt);
    }
    Ok(Produced {
        artifacts,
        derived: json!(derived),
        dt: json!(dts),
        seed: Some(ctx.seed),
    })
}

fn fig2(ctx: &Ctx) -> Result<Produced> {
    let cfg = ctx.cfg;
    let omegas = cfg.f64_list_or("omegas", &logspace(0.1, 10.0, 13))?;
    let s = SpreadSettings::from_config(cfg, 32)?;
    cfg.reject_unknown()?;
    let mut artifacts = Vec::new();
    let mut derived = Vec::new();
    let settings = json!({ "spreading": s.to_json(), "fit_window": "final half" });
    for (name, beta) in betas() {
        let local = SpreadSettings {
            island_grid: if beta.is_rational() { 0 } else { s.island_grid },
            ..s
        };
        let (disp, summary, ds) = spread_tables(ctx, &template(beta), &omegas, &local)?;
        artifacts.push(Artifact::csv(
            format!("fig2_{name}.csv"),
            &summary,
            settings.clone(),
        ));
        artifacts.push(Artifact::csv(
            format!("fig2_{name}_dispersion.csv"),
            &disp,
            settings.clone(),
        ));
        derived.extend(ds);
    }
    Ok(Produced {
        artifacts,
        derived: json!(derived),
        dt: json!(format!("T_y / {}", s.steps_per_period)),
        seed: Some(ctx.seed),
    })
}

fn fig3(ctx: &Ctx) -> Result<Produced> {
    let cfg = ctx.cfg;
    let omega = cfg.positive("omega", 0.45)?;
    let s = EvolveSettings::from_config(cfg, 500.0, 1e-10)?;
    cfg.reject_unknown()?;
    let mut artifacts = Vec::new();
    let mut derived = Vec::new();
    let mut dts = Vec::new();
    for (name, beta) in betas() {
        let d = derive_params(&template(beta).at(omega, ALPHA, "omega")?)?;
        ctx.note(format!("fig3 {name}: {} periods", s.periods));
        let ev = evolve(&d, &s)?;
        let (disp, dens, results) = tables(&ev, &s)?;
        artifacts.push(Artifact::csv(
            format!("fig3_{name}_dispersion.csv"),
            &disp,
            results.clone(),
        ));
        artifacts.push(Artifact::csv(
            format!("fig3_{name}_density.csv"),
            &dens,
            results,
        ));
        derived.push(d);
        dts.push(ev.dt);
    }
    Ok(Produced {
        artifacts,
        derived: json!(derived),
        dt: json!(dts),
        seed: None,
    })
}

fn fig4(ctx: &Ctx) -> Result<Produced> {
    let cfg = ctx.cfg;
    let omegas = cfg.f64_list_or("omegas", &linspace(0.9, 0.4, 11))?;
    let s = scan_settings(cfg)?;
    let dump_omega = cfg.f64_or("dump_omega", 0.4)?;
    let rank = cfg.usize_or("dump_rank", 0)?;
    cfg.reject_unknown()?;
    let t = template(BetaClass::irrational(golden_beta()).expect("golden"));
    let derived: Vec<_> = omegas
        .iter()
        .map(|&w| derive_params(&t.at(w, ALPHA, "omegas")?).map_err(CliError::from))
        .collect::<Result<_>>()?;
    let dump = t.at(dump_omega, ALPHA, "dump_omega")?;
    ctx.note(format!(
        "fig4: {} frequencies at L = {}",
        omegas.len(),
        s.len
    ));
    let scan = driven_harper::floquet::localization_scan(
        &omegas,
        driven_harper::floquet::ScanTemplate {
            j_x: 1.0,
            j_y: 1.0,
            alpha: ALPHA,
            omega: f64::NAN,
            beta: golden_beta(),
        },
        &s,
    )?;
    let (csv, fit) = scan_tables(&scan, "omega", "fig4_scan");
    let (state, res) = eigenstate_dump(&dump, &s, rank)?;
    Ok(Produced {
        artifacts: vec![csv, fit, Artifact::csv("fig4_eigenstate.csv", &state, res)],
        derived: json!(derived),
        dt: Json::Null,
        seed: None,
    })
}
