use std::f64::consts::TAU;

use driven_harper::static_harper::{
    butterfly, fibonacci_sizes, inverse_golden_mean, localization_diagnostic,
};
use serde_json::{json, Value as Json};

use super::{Ctx, Produced};
use crate::config::Config;
use crate::error::{CliError, Result};
use crate::output::{Artifact, Cell, Csv};

pub fn butterfly_table(cfg: &Config) -> Result<(Csv, Json)> {
    let q_max = cfg.count("q_max", 30, 1)?;
    if q_max > 50 {
        return Err(CliError::config("q_max", "must be <= 50"));
    }
    let len = cfg.count("L", 120, 2)?;
    let n_phases = cfg.count("n_phases", 4, 1)?;
    let j = cfg.positive("j", 1.0)?;
    let phases: Vec<f64> = (0..n_phases)
        .map(|k| TAU * k as f64 / n_phases as f64)
        .collect();
    let slices = butterfly(q_max as u64, j, len, &phases)?;
    let mut csv = Csv::new(&["alpha_num", "alpha_den", "energy"]);
    for s in &slices {
        for e in &s.energies {
            csv.row(&[Cell::U(s.p), Cell::U(s.q), Cell::F(*e)]);
        }
    }
    Ok((csv, json!({ "phases": phases, "fractions": slices.len() })))
}

pub fn run_butterfly(ctx: &Ctx) -> Result<Produced> {
    let (csv, results) = butterfly_table(ctx.cfg)?;
    ctx.cfg.reject_unknown()?;
    Ok(Produced {
        artifacts: vec![Artifact::csv("butterfly.csv", &csv, results)],
        derived: Json::Null,
        dt: Json::Null,
        seed: None,
    })
}

pub fn transition(ctx: &Ctx) -> Result<Produced> {
    let cfg = ctx.cfg;
    let j_x = cfg.positive("j_x", 1.0)?;
    let ratios = cfg.f64_list_or("ratios", &[0.5, 1.0, 2.0])?;
    let sizes = cfg.usize_list_or("sizes", &fibonacci_sizes(200, 3))?;
    let alpha = cfg.f64_or("alpha", inverse_golden_mean())?;
    let phase = cfg.f64_or("phase", 0.0)?;
    cfg.reject_unknown()?;
    if sizes.len() < 2 || sizes.windows(2).any(|w| w[1] <= w[0]) || sizes[0] < 2 {
        return Err(CliError::config(
            "sizes",
            "need at least two increasing sizes >= 2",
        ));
    }
    if ratios.iter().any(|r| *r < 0.0) {
        return Err(CliError::config("ratios", "must be >= 0"));
    }
    let mut csv = Csv::new(&["L", "jy_over_jx", "mean_P", "classification"]);
    let mut reports = Vec::new();
    for &r in &ratios {
        ctx.note(format!("Aubry-Andre scaling at J_y/J_x = {r}"));
        let rep = localization_diagnostic(j_x, r * j_x, alpha, phase, &sizes)?;
        for (l, p) in rep.sizes.iter().zip(&rep.mean_p) {
            csv.row(&[
                Cell::U(*l as u64),
                Cell::F(r),
                Cell::F(*p),
                Cell::S(rep.class.as_str()),
            ]);
        }
        reports.push(json!({ "jy_over_jx": r, "growth": rep.growth, "class": rep.class }));
    }
    Ok(Produced {
        artifacts: vec![Artifact::csv(
            "aa_transition.csv",
            &csv,
            json!({ "alpha": alpha, "phase": phase, "reports": reports }),
        )],
        derived: Json::Null,
        dt: Json::Null,
        seed: None,
    })
}
