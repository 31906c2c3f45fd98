//! End-to-end acceptance checks. Every test prints one line of the form
//! `criterion N: PASS|FAIL <measurements>` and fails when the check fails.
//!
//! Run with `cargo test -p driven-harper-cli --test acceptance -- --nocapture`.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use driven_harper::classical::{
    conserved_quantity, elliptic_point, ensemble_dispersion, island_scan, spreading_rate, Ensemble,
    Integrator, PhasePoint,
};
use driven_harper::floquet::{
    build_floquet, localization_scan, unitarity_defect, ScanSettings, ScanTemplate, DEFAULT_TOL,
};
use driven_harper::quantum::{
    initial_packet, propagate_eq2, propagate_eq8, saturation, EvolutionRecord, PropagationOptions,
    WaveFunction,
};
use driven_harper::static_harper::{
    fibonacci_sizes, inverse_golden_mean, localization_diagnostic, Localization,
};
use driven_harper::stats::{line_fit, pearson};
use driven_harper::{derive_params, golden_beta, DerivedParams, ModelParams};
use num_complex::Complex64;

const ALPHA: f64 = 0.1545;

fn report(n: u32, pass: bool, started: Instant, detail: String) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!(
        "criterion {n}: {verdict} {detail} [{:.1}s]",
        started.elapsed().as_secs_f64()
    );
    assert!(pass, "criterion {n} failed: {detail}");
}

fn drive(j_x: f64, j_y: f64, alpha: f64, omega: f64, beta: f64) -> DerivedParams {
    derive_params(&ModelParams::from_drive(j_x, j_y, alpha, omega, beta).unwrap()).unwrap()
}

/// `Omega = 2 pi alpha sqrt(J_x J_y)` at `J_x = J_y = 1`.
fn big_omega() -> f64 {
    std::f64::consts::TAU * ALPHA
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| (lo.ln() + (hi.ln() - lo.ln()) * k as f64 / (n - 1) as f64).exp())
        .collect()
}

fn sample_grid(t_end: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| t_end * k as f64 / n as f64).collect()
}

fn relative_drift(d: &DerivedParams, start: PhasePoint, periods: usize, dt: f64) -> f64 {
    let e0 = conserved_quantity(start, 0.0, d);
    let mut worst = 0.0f64;
    Integrator::new(d)
        .advance_with(start, 0.0, periods as f64 * d.period, dt, |t, q| {
            worst = worst.max((conserved_quantity(q, t, d) - e0).abs() / e0.abs());
        })
        .unwrap();
    worst
}

#[test]
fn c01_classical_invariant() {
    let started = Instant::now();
    let starts = [
        PhasePoint::new(0.0, 0.0),
        PhasePoint::new(2.0, 1.0),
        PhasePoint::new(-1.0, 2.5),
    ];
    let mut worst: f64 = 0.0;
    let mut ratios = Vec::new();
    for beta in [1.0 / 3.0, golden_beta()] {
        let d = drive(1.0, 1.0, ALPHA, 0.3, beta);
        for &q in &starts {
            let coarse = relative_drift(&d, q, 1000, d.period / 200.0);
            let fine = relative_drift(&d, q, 1000, d.period / 400.0);
            worst = worst.max(coarse);
            ratios.push(coarse / fine);
        }
    }
    let quadratic = ratios.iter().all(|r| (3.5..=4.5).contains(r));
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    report(
        1,
        worst < 1e-8 && quadratic,
        started,
        format!("max relative drift {worst:.3e} (limit 1e-8), drift(dt)/drift(dt/2) in [{lo:.3}, {hi:.3}] (want 4)"),
    );
}

#[test]
fn c02_ballistic_rate_at_beta_zero() {
    let started = Instant::now();
    let d = drive(1.0, 1.0, ALPHA, 10.0 * big_omega(), 0.0);
    let series = ensemble_dispersion(
        &Ensemble::uniform_cell(10_000, 1),
        &sample_grid(650.0, 100),
        &d,
        d.period / 200.0,
    )
    .unwrap();
    let fit = spreading_rate(&series).unwrap();
    let expect = d.jp_x / 2f64.sqrt();
    let rel = (fit.a - expect).abs() / expect;
    report(
        2,
        rel < 0.05,
        started,
        format!(
            "A = {:.5}, J'_x/sqrt2 = {expect:.5}, relative error {rel:.4}",
            fit.a
        ),
    );
}

#[test]
fn c03_resonant_rate_exponent() {
    let started = Instant::now();
    let ens = Ensemble::uniform_cell(500, 1);
    let grid = sample_grid(15_000.0, 100);
    let (mut lw, mut la) = (Vec::new(), Vec::new());
    for w in log_grid(3.0 * big_omega(), 10.0 * big_omega(), 6) {
        let d = drive(1.0, 1.0, ALPHA, w, 1.0 / 3.0);
        let fit = spreading_rate(&ensemble_dispersion(&ens, &grid, &d, d.period / 200.0).unwrap())
            .unwrap();
        lw.push(w.ln());
        la.push(fit.a.ln());
    }
    let fit = line_fit(&lw, &la).unwrap();
    report(
        3,
        (fit.slope + 3.0).abs() <= 0.5,
        started,
        format!(
            "slope {:.3} (want -3 +- 0.5), r2 {:.4}",
            fit.slope, fit.r_squared
        ),
    );
}

#[test]
fn c04_rate_tracks_island_fraction() {
    let started = Instant::now();
    let beta = golden_beta();
    let ens = Ensemble::uniform_cell(1000, 1);
    let grid = sample_grid(25_000.0, 100);
    let (mut rates, mut ws) = (Vec::new(), Vec::new());
    let mut rows = Vec::new();
    for k in 3..=9 {
        let w = 0.1 * k as f64 * big_omega();
        let d = drive(1.0, 1.0, ALPHA, w, beta);
        let a = spreading_rate(&ensemble_dispersion(&ens, &grid, &d, d.period / 200.0).unwrap())
            .unwrap()
            .a;
        let s = island_scan(&d, 64, 64, 200.0 * d.period).unwrap().s;
        rates.push(a);
        ws.push(w * s);
        rows.push(format!("{w:.3}:{a:.3e}/{s:.3}"));
    }
    let r = pearson(&rates, &ws).unwrap();
    report(
        4,
        r > 0.95,
        started,
        format!(
            "corr(A, omega S) = {r:.4} (want > 0.95) over omega:A/S {}",
            rows.join(" ")
        ),
    );
}

/// `|J_l(z)|^2` oracle from libm.
fn bessel_density(l: i64, z: f64) -> f64 {
    libm::jn(l as i32, z).powi(2)
}

#[test]
fn c05_free_chain_bessel() {
    let started = Instant::now();
    let j_x = 1.0;
    let d = derive_params(&ModelParams::new(j_x, 0.0, ALPHA, 0.0, 0.5).unwrap()).unwrap();
    let opts = PropagationOptions {
        sample_every: 1.0,
        snapshot_stride: 1,
        ..PropagationOptions::per_period(&d)
    };
    let dt = d.period / 4000.0;
    let t_end = 20.0 / j_x;
    let mut worst = 0.0f64;
    for rec in [
        propagate_eq2(WaveFunction::delta(0, 128), t_end, dt, &d, &opts)
            .unwrap()
            .1,
        propagate_eq8(WaveFunction::delta(0, 128), t_end, dt, &d, &opts)
            .unwrap()
            .1,
    ] {
        for snap in &rec.snapshots {
            for l in -100..=100 {
                worst = worst.max((snap.density_at(l) - bessel_density(l, j_x * snap.time)).abs());
            }
        }
    }
    report(
        5,
        worst < 1e-8,
        started,
        format!(
            "max |density - J_l(J_x t)^2| = {worst:.3e} over t <= 20/J_x, both forms (limit 1e-8)"
        ),
    );
}

fn density_gap(a: &EvolutionRecord, b: &EvolutionRecord) -> f64 {
    assert_eq!(a.snapshots.len(), b.snapshots.len());
    let mut worst = 0.0f64;
    for (sa, sb) in a.snapshots.iter().zip(&b.snapshots) {
        assert!((sa.time - sb.time).abs() < 1e-9 * sa.time.max(1.0));
        let lo = sa.offset.min(sb.offset);
        let hi = (sa.offset + sa.density.len() as i64).max(sb.offset + sb.density.len() as i64);
        for l in lo..hi {
            worst = worst.max((sa.density_at(l) - sb.density_at(l)).abs());
        }
    }
    worst
}

fn slow_drive(beta: f64) -> DerivedParams {
    drive(1.0, 1.0, ALPHA, 0.45, beta)
}

fn island_packet(d: &DerivedParams) -> WaveFunction {
    let c = elliptic_point(d).unwrap();
    initial_packet(d, c.x, c.p, 256).unwrap()
}

#[test]
fn c06_gauge_equivalence() {
    let started = Instant::now();
    let d = slow_drive(golden_beta());
    let opts = PropagationOptions {
        snapshot_stride: 1,
        ..PropagationOptions::per_period(&d)
    };
    let t_end = 100.0 * d.period;
    let (_, split) =
        propagate_eq2(island_packet(&d), t_end, d.period / 12_800.0, &d, &opts).unwrap();
    let (_, rk) = propagate_eq8(island_packet(&d), t_end, d.period / 51_200.0, &d, &opts).unwrap();
    let gap = density_gap(&split, &rk);
    report(
        6,
        gap < 1e-6,
        started,
        format!(
            "max density gap {gap:.3e} over {} snapshots (limit 1e-6)",
            split.snapshots.len()
        ),
    );
}

#[test]
fn c07_saturation_dichotomy() {
    let started = Instant::now();
    let mut ratios = Vec::new();
    let mut flags = Vec::new();
    for beta in [golden_beta(), 1.0 / 3.0] {
        let d = slow_drive(beta);
        let opts = PropagationOptions {
            snapshot_stride: 0,
            ..PropagationOptions::per_period(&d)
        };
        let (_, rec) = propagate_eq2(
            island_packet(&d),
            2000.0 * d.period,
            d.period / 200.0,
            &d,
            &opts,
        )
        .unwrap();
        let sat = saturation(&rec).unwrap();
        ratios.push(sat.growth_ratio);
        flags.push(sat.saturated);
    }
    let irrational_ok = flags[0] && ratios[0] < 1.2;
    let rational_ok = (ratios[1] - 2.0).abs() <= 0.4;
    report(
        7,
        irrational_ok && rational_ok,
        started,
        format!(
            "irrational sigma(T)/sigma(T/2) = {:.4} saturated={} (want < 1.2); rational {:.4} (want 2 +- 0.4)",
            ratios[0], flags[0], ratios[1]
        ),
    );
}

#[test]
fn c08_floquet_exactness() {
    let started = Instant::now();
    let beta = golden_beta();
    let diag = build_floquet(&drive(0.0, 1.0, ALPHA, 0.6, beta), 256, DEFAULT_TOL).unwrap();
    let other = build_floquet(&drive(0.0, 1.0, 0.31, 0.6, beta), 256, DEFAULT_TOL).unwrap();
    let (mut phase_err, mut alpha_err) = (0.0f64, 0.0f64);
    for j in 0..diag.len() {
        for i in 0..diag.len() {
            let expect = if i == j {
                Complex64::from_polar(1.0, -std::f64::consts::TAU * beta * diag.site(i) as f64)
            } else {
                Complex64::new(0.0, 0.0)
            };
            phase_err = phase_err.max((diag.matrix[(i, j)] - expect).norm());
            alpha_err = alpha_err.max((diag.matrix[(i, j)] - other.matrix[(i, j)]).norm());
        }
    }
    let generic = build_floquet(&slow_drive(beta), 256, DEFAULT_TOL).unwrap();
    let defect = unitarity_defect(&generic.matrix);
    report(
        8,
        phase_err < 1e-10 && alpha_err < 1e-10 && defect < 1e-8,
        started,
        format!("diagonal phase error {phase_err:.3e}, alpha dependence {alpha_err:.3e}, unitarity defect {defect:.3e}"),
    );
}

#[test]
fn c09_floquet_localization_trend() {
    let started = Instant::now();
    let omegas: Vec<f64> = (0..11).map(|k| 0.9 - 0.05 * k as f64).collect();
    let template = ScanTemplate {
        j_x: 1.0,
        j_y: 1.0,
        alpha: ALPHA,
        omega: f64::NAN,
        beta: golden_beta(),
    };
    let scan = localization_scan(&omegas, template, &ScanSettings::default()).unwrap();
    let p = scan.mean_p();
    let increasing = p.windows(2).all(|w| w[1] > w[0]);
    let gain = p.last().unwrap() / p[0];
    let fit = scan.fit.expect("island fractions measured");
    report(
        9,
        increasing && gain >= 3.0 && fit.r_squared > 0.9,
        started,
        format!(
            "mean P {:?}, increasing={increasing}, gain {gain:.3} (want >= 3), ln P vs S/alpha r2 {:.4} (want > 0.9), C = {:.4}",
            p.iter().map(|v| (v * 10.0).round() / 10.0).collect::<Vec<_>>(),
            fit.r_squared,
            fit.slope
        ),
    );
}

#[test]
fn c10_aubry_andre_baseline() {
    let started = Instant::now();
    let sizes = fibonacci_sizes(200, 3);
    assert_eq!(sizes, [233, 377, 610]);
    let alpha = inverse_golden_mean();
    let loc = localization_diagnostic(1.0, 2.0, alpha, 0.0, &sizes).unwrap();
    let ext = localization_diagnostic(1.0, 0.5, alpha, 0.0, &sizes).unwrap();
    report(
        10,
        loc.class == Localization::Localized
            && loc.growth.iter().all(|&g| g < 1.1)
            && ext.class == Localization::Extended
            && ext.growth.iter().all(|&g| g >= 1.4),
        started,
        format!(
            "J_y = 2 J_x: P growth per size step {:.4?} {}; J_y = J_x/2: {:.4?} {}",
            loc.growth,
            loc.class.as_str(),
            ext.growth,
            ext.class.as_str()
        ),
    );
}

fn repro(dir: &Path, figure: &str, threads: usize, sets: &[&str]) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_dharper"));
    cmd.args([
        "--quiet",
        "--seed",
        "7",
        "--threads",
        &threads.to_string(),
        "--out",
    ])
    .arg(dir)
    .args(["repro", figure]);
    for s in sets {
        cmd.args(["--set", s]);
    }
    let status = cmd.status().unwrap();
    assert!(
        status.success(),
        "repro {figure} --threads {threads}: {status}"
    );
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}

#[test]
fn c11_thread_count_independence() {
    let started = Instant::now();
    let cases: [(&str, &[&str]); 4] = [
        ("fig1", &["periods=200", "n_orbits=8"]),
        (
            "fig2",
            &[
                "omegas=[0.5, 2.0]",
                "ensemble=64",
                "periods=60",
                "samples=30",
                "island_grid=8",
            ],
        ),
        ("fig3", &["periods=20"]),
        (
            "fig4",
            &["omegas=[0.8, 0.5]", "L=128", "n_states=30", "island_grid=8"],
        ),
    ];
    let mut mismatched = Vec::new();
    let mut compared = 0;
    for (figure, sets) in cases {
        let one = tempfile::tempdir().unwrap();
        let many = tempfile::tempdir().unwrap();
        repro(one.path(), figure, 1, sets);
        repro(many.path(), figure, 4, sets);
        let (a, b) = (csv_files(one.path()), csv_files(many.path()));
        assert!(!a.is_empty());
        compared += a.len();
        if a != b {
            mismatched.push(figure);
        }
    }
    report(
        11,
        mismatched.is_empty(),
        started,
        format!("{compared} CSVs compared between --threads 1 and 4, mismatches in {mismatched:?}"),
    );
}
