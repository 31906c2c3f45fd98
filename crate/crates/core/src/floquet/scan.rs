use rayon::prelude::*;
use serde::Serialize;

use super::{
    build_floquet, density_centroid, eigendecompose, participation_ratio, FloquetEigenSet,
};
use crate::classical::island_scan_with_step;
use crate::error::{invalid, Result};
use crate::params::{derive_params, ModelParams};
use crate::stats::{line_fit, LineFit};

/// Which knob a scan varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ControlKind {
    Omega,
    Alpha,
}

/// Fixed model knobs of a scan; the scanned one is overridden per point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanTemplate {
    pub j_x: f64,
    pub j_y: f64,
    pub alpha: f64,
    pub omega: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanSettings {
    pub len: usize,
    pub n_states: usize,
    pub tol: f64,
    /// Grid resolution (per axis) of the classical island scan; `None` skips it.
    pub island_grid: Option<usize>,
    pub island_periods: f64,
    pub island_steps_per_period: usize,
    /// Selected states with more edge mass than this raise a warning.
    pub edge_warning: f64,
}

impl Default for ScanSettings {
    fn default() -> Self {
        Self {
            len: 1024,
            n_states: 300,
            tol: super::DEFAULT_TOL,
            island_grid: Some(32),
            island_periods: 200.0,
            island_steps_per_period: 200,
            edge_warning: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanPoint {
    pub control: f64,
    pub omega: f64,
    pub alpha: f64,
    pub mean_p: f64,
    /// Transporting-island fraction, when measured.
    pub s: Option<f64>,
    pub n_states: usize,
    /// Largest `|v_first|^2 + |v_last|^2` over the averaged states.
    pub max_edge_mass: f64,
    pub unitarity_defect: f64,
    pub flagged_pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalizationScan {
    pub kind: ControlKind,
    pub template: ScanTemplate,
    pub settings: ScanSettings,
    pub points: Vec<ScanPoint>,
    /// Averaging rule for the eigenstates.
    pub selection: &'static str,
    /// Fit of `ln(mean P)` against `fit_abscissa`.
    pub fit: Option<LineFit>,
    pub fit_abscissa: &'static str,
    pub warnings: Vec<String>,
}

impl LocalizationScan {
    pub fn control(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.control).collect()
    }

    pub fn mean_p(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.mean_p).collect()
    }
}

/// Indices of the `n` eigenvectors whose density centroid is closest to the
/// middle of the lattice.
pub fn select_centered(eig: &FloquetEigenSet, n: usize) -> Vec<usize> {
    let len = eig.eigenvectors.nrows();
    let center = 0.5 * (len as f64 - 1.0);
    let mut keyed: Vec<(f64, usize)> = (0..eig.len())
        .map(|k| {
            let c = density_centroid(eig.eigenvectors.col(k).iter());
            ((c - center).abs(), k)
        })
        .collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    keyed.into_iter().take(n).map(|(_, k)| k).collect()
}

const SELECTION: &str = "n_states eigenvectors with density centroid nearest the lattice centre";

fn scan_point(params: &ModelParams, control: f64, settings: &ScanSettings) -> Result<ScanPoint> {
    let d = derive_params(params)?;
    let u = build_floquet(&d, settings.len, settings.tol)?;
    let eig = eigendecompose(&u)?;
    let chosen = select_centered(&eig, settings.n_states);
    let mut total = 0.0;
    let mut max_edge_mass = 0.0f64;
    for &k in &chosen {
        let v = eig.vector(k);
        total += participation_ratio(&v)?;
        let edge = v[0].norm_sqr() + v[v.len() - 1].norm_sqr();
        max_edge_mass = max_edge_mass.max(edge);
    }
    let s = match settings.island_grid {
        Some(grid) => Some(
            island_scan_with_step(
                &d,
                grid,
                grid,
                settings.island_periods * d.period,
                d.period / settings.island_steps_per_period as f64,
            )?
            .s,
        ),
        None => None,
    };
    Ok(ScanPoint {
        control,
        omega: d.omega,
        alpha: d.params.alpha,
        mean_p: total / chosen.len() as f64,
        s,
        n_states: chosen.len(),
        max_edge_mass,
        unitarity_defect: u.defect,
        flagged_pairs: eig.flagged.len(),
    })
}

fn check(settings: &ScanSettings, controls: &[f64]) -> Result<()> {
    if controls.is_empty() {
        return Err(invalid("grid", "no scan points"));
    }
    if settings.n_states == 0 || settings.n_states > settings.len {
        return Err(invalid(
            "n_states",
            format!(
                "must lie in 1..={}, got {}",
                settings.len, settings.n_states
            ),
        ));
    }
    Ok(())
}

fn warnings_for(points: &[ScanPoint], settings: &ScanSettings) -> Vec<String> {
    let mut out = Vec::new();
    for p in points {
        if p.max_edge_mass > settings.edge_warning {
            out.push(format!(
                "control {}: selected states carry edge mass {:e} > {:e}; L = {} is too small",
                p.control, p.max_edge_mass, settings.edge_warning, settings.len
            ));
        }
        if p.flagged_pairs > 0 {
            out.push(format!(
                "control {}: {} eigenpairs with residual >= {:e}",
                p.control,
                p.flagged_pairs,
                super::RESIDUAL_LIMIT
            ));
        }
    }
    out
}

fn log_fit(xs: &[f64], points: &[ScanPoint]) -> Option<LineFit> {
    let ys: Vec<f64> = points.iter().map(|p| p.mean_p.ln()).collect();
    line_fit(xs, &ys)
}

/// Mean participation ratio of the centred Floquet eigenstates against the
/// total drive frequency. Fits `ln P` against `S(omega) / alpha` when the
/// island fraction is measured.
pub fn localization_scan(
    omegas: &[f64],
    template: ScanTemplate,
    settings: &ScanSettings,
) -> Result<LocalizationScan> {
    check(settings, omegas)?;
    let points: Vec<ScanPoint> = omegas
        .par_iter()
        .map(|&omega| {
            let p = ModelParams::from_drive(
                template.j_x,
                template.j_y,
                template.alpha,
                omega,
                template.beta,
            )?;
            scan_point(&p, omega, settings)
        })
        .collect::<Result<_>>()?;
    let fit = if points.iter().all(|p| p.s.is_some()) {
        let xs: Vec<f64> = points.iter().map(|p| p.s.unwrap() / p.alpha).collect();
        log_fit(&xs, &points)
    } else {
        None
    };
    Ok(LocalizationScan {
        kind: ControlKind::Omega,
        template,
        settings: *settings,
        warnings: warnings_for(&points, settings),
        points,
        selection: SELECTION,
        fit,
        fit_abscissa: "S/alpha",
    })
}

/// Same as [`localization_scan`] with the Peierls phase as control at fixed
/// drive; fits `ln P` against `1 / alpha`.
pub fn alpha_scan(
    alphas: &[f64],
    template: ScanTemplate,
    settings: &ScanSettings,
) -> Result<LocalizationScan> {
    check(settings, alphas)?;
    let points: Vec<ScanPoint> = alphas
        .par_iter()
        .map(|&alpha| {
            let p = ModelParams::from_drive(
                template.j_x,
                template.j_y,
                alpha,
                template.omega,
                template.beta,
            )?;
            scan_point(&p, alpha, settings)
        })
        .collect::<Result<_>>()?;
    let xs: Vec<f64> = points.iter().map(|p| 1.0 / p.alpha).collect();
    let fit = log_fit(&xs, &points);
    Ok(LocalizationScan {
        kind: ControlKind::Alpha,
        template,
        settings: *settings,
        warnings: warnings_for(&points, settings),
        points,
        selection: SELECTION,
        fit,
        fit_abscissa: "1/alpha",
    })
}
