use driven_harper::floquet::{
    alpha_scan, build_floquet, eigendecompose, localization_scan, select_centered, write_operator,
    LocalizationScan, ScanSettings, ScanTemplate, DEFAULT_TOL,
};
use driven_harper::{derive_params, ModelParams};
use serde_json::{json, Value as Json};

use super::{Ctx, Produced};
use crate::config::{Config, Template};
use crate::error::{CliError, Result};
use crate::output::{Artifact, Cell, Csv};

fn tol(cfg: &Config) -> Result<f64> {
    let t = cfg.positive("tol", DEFAULT_TOL)?;
    if t >= 1e-2 {
        return Err(CliError::config("tol", "must be < 1e-2"));
    }
    Ok(t)
}

fn len(cfg: &Config, default: usize) -> Result<usize> {
    let l = cfg.count("L", default, 64)?;
    if l % 2 != 0 {
        return Err(CliError::config("L", "must be even"));
    }
    Ok(l)
}

pub fn build(ctx: &Ctx) -> Result<Produced> {
    let cfg = ctx.cfg;
    let (params, _) = cfg.model()?;
    let d = derive_params(&params)?;
    let l = len(cfg, 256)?;
    let tol = tol(cfg)?;
    cfg.reject_unknown()?;
    ctx.note(format!("building the {l} x {l} one-period operator"));
    let u = build_floquet(&d, l, tol)?;
    let mut bytes = Vec::with_capacity(32 + 16 * l * l);
    write_operator(&u, &mut bytes)?;
    let results = json!({
        "format": "little-endian; 32-byte header (magic DHFQ, u32 version, u64 L, f64 T_y, 8 zero bytes) then row-major (re, im) f64 pairs",
        "L": l,
        "site_of_index": "l = k - L/2",
        "unitarity_defect": u.defect,
        "rk4_steps": u.steps,
        "tol": tol,
    });
    Ok(Produced {
        artifacts: vec![Artifact::binary("floquet.bin", bytes, results)],
        derived: json!(d),
        dt: json!(u.period / u.steps as f64),
        seed: None,
    })
}

pub fn scan_settings(cfg: &Config) -> Result<ScanSettings> {
    let base = ScanSettings::default();
    let l = len(cfg, base.len)?;
    let n_states = cfg.count("n_states", base.n_states, 1)?;
    if n_states > l {
        return Err(CliError::config("n_states", format!("must be <= L = {l}")));
    }
    let grid = cfg.usize_or("island_grid", base.island_grid.unwrap_or(0))?;
    let island_periods = cfg.positive("island_periods", base.island_periods)?;
    if grid > 0 && island_periods < 200.0 {
        return Err(CliError::config("island_periods", "must be >= 200"));
    }
    Ok(ScanSettings {
        len: l,
        n_states,
        tol: tol(cfg)?,
        island_grid: (grid > 0).then_some(grid),
        island_periods,
        island_steps_per_period: cfg.count(
            "island_steps_per_period",
            base.island_steps_per_period,
            50,
        )?,
        edge_warning: base.edge_warning,
    })
}

/// The scan table plus its fit summary document.
pub fn scan_tables(scan: &LocalizationScan, control: &str, stem: &str) -> (Artifact, Artifact) {
    let mut csv = Csv::new(&[control, "mean_P", "S", "n_states"]);
    for p in &scan.points {
        csv.row(&[
            Cell::F(p.control),
            Cell::F(p.mean_p),
            Cell::F(p.s.unwrap_or(f64::NAN)),
            Cell::U(p.n_states as u64),
        ]);
    }
    let points: Vec<Json> = scan
        .points
        .iter()
        .map(|p| {
            json!({
                "control": p.control,
                "max_edge_mass": p.max_edge_mass,
                "unitarity_defect": p.unitarity_defect,
                "flagged_pairs": p.flagged_pairs,
            })
        })
        .collect();
    let summary = json!({
        "kind": scan.kind,
        "template": scan.template,
        "settings": scan.settings,
        "selection": scan.selection,
        "fit_of_ln_mean_P_against": scan.fit_abscissa,
        "fit": scan.fit,
        "C": scan.fit.map(|f| f.slope),
        "warnings": scan.warnings,
    });
    let fit_doc = json!({
        "schema_version": crate::output::SCHEMA_VERSION,
        "summary": summary,
    });
    (
        Artifact::csv(
            format!("{stem}.csv"),
            &csv,
            json!({ "summary": summary, "points": points }),
        ),
        Artifact::json(format!("{stem}_fit.json"), &fit_doc),
    )
}

/// One selected eigenvector at the given parameters: `l, re, im, density`.
pub fn eigenstate_dump(params: &ModelParams, s: &ScanSettings, rank: usize) -> Result<(Csv, Json)> {
    let d = derive_params(params)?;
    let u = build_floquet(&d, s.len, s.tol)?;
    let eig = eigendecompose(&u)?;
    let chosen = select_centered(&eig, s.n_states);
    let k = *chosen.get(rank).ok_or_else(|| {
        CliError::config(
            "dump_rank",
            format!("must be < n_states = {}", chosen.len()),
        )
    })?;
    let v = eig.vector(k);
    let mut csv = Csv::new(&["l", "re", "im", "density"]);
    for (j, z) in v.iter().enumerate() {
        csv.row(&[
            Cell::I(u.site(j)),
            Cell::F(z.re),
            Cell::F(z.im),
            Cell::F(z.norm_sqr()),
        ]);
    }
    let p = driven_harper::floquet::participation_ratio(&v)?;
    Ok((
        csv,
        json!({
            "omega": d.omega,
            "alpha": d.params.alpha,
            "eigenphase": eig.eigenphases[k],
            "participation_ratio": p,
            "rank_from_centre": rank,
        }),
    ))
}

fn scan_template(t: &Template, omega: f64) -> ScanTemplate {
    ScanTemplate {
        j_x: t.j_x,
        j_y: t.j_y,
        alpha: t.alpha,
        omega,
        beta: t.beta.value(),
    }
}

pub fn omega_scan(ctx: &Ctx) -> Result<Produced> {
    let cfg = ctx.cfg;
    let t = cfg.template()?;
    let omegas = cfg
        .f64_list_opt("omegas")?
        .ok_or_else(|| CliError::config("omegas", "required key is missing"))?;
    let s = scan_settings(cfg)?;
    let dump = cfg.f64_opt("dump_omega")?;
    let rank = cfg.usize_or("dump_rank", 0)?;
    cfg.reject_unknown()?;
    for &w in &omegas {
        t.at(w, t.alpha, "omegas")?;
    }
    let dump_params = dump.map(|w| t.at(w, t.alpha, "dump_omega")).transpose()?;
    ctx.note(format!(
        "Floquet scan over {} frequencies at L = {}",
        omegas.len(),
        s.len
    ));
    let scan = localization_scan(&omegas, scan_template(&t, f64::NAN), &s)?;
    let (csv, fit) = scan_tables(&scan, "omega", "floquet_scan");
    let mut artifacts = vec![csv, fit];
    if let Some(p) = dump_params {
        let (csv, res) = eigenstate_dump(&p, &s, rank)?;
        artifacts.push(Artifact::csv("eigenstate.csv", &csv, res));
    }
    let derived: Vec<_> = omegas
        .iter()
        .map(|&w| derive_params(&t.at(w, t.alpha, "omegas")?).map_err(CliError::from))
        .collect::<Result<_>>()?;
    Ok(Produced {
        artifacts,
        derived: json!(derived),
        dt: Json::Null,
        seed: None,
    })
}

pub fn flux_scan(ctx: &Ctx) -> Result<Produced> {
    let cfg = ctx.cfg;
    let beta = cfg.beta()?;
    let t = Template {
        j_x: cfg.f64_or("j_x", 1.0)?,
        j_y: cfg.f64_or("j_y", 1.0)?,
        alpha: f64::NAN,
        beta,
    };
    let omega = cfg.f64_req("omega")?;
    let alphas = cfg
        .f64_list_opt("alphas")?
        .ok_or_else(|| CliError::config("alphas", "required key is missing"))?;
    let s = scan_settings(cfg)?;
    cfg.reject_unknown()?;
    let derived: Vec<_> = alphas
        .iter()
        .map(|&a| derive_params(&t.at(omega, a, "omega")?).map_err(CliError::from))
        .collect::<Result<_>>()?;
    ctx.note(format!(
        "Floquet scan over {} flux values at L = {}",
        alphas.len(),
        s.len
    ));
    let scan = alpha_scan(&alphas, scan_template(&t, omega), &s)?;
    let (csv, fit) = scan_tables(&scan, "alpha", "alpha_scan");
    Ok(Produced {
        artifacts: vec![csv, fit],
        derived: json!(derived),
        dt: Json::Null,
        seed: None,
    })
}
