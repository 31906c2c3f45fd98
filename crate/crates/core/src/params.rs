//! Model parameters and the quantities derived from them.
//!
//! Everything is kept in dimensionless lattice units: hoppings and Bloch
//! frequencies share one energy scale, positions are lattice indices (quantum)
//! or radians (classical).

use std::f64::consts::TAU;

use serde::Serialize;

use crate::error::{invalid, Result};

/// Physical knobs of the driven chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    pub j_x: f64,
    pub j_y: f64,
    /// Peierls phase, stored reduced into (0, 1).
    pub alpha: f64,
    pub omega_x: f64,
    pub omega_y: f64,
}

impl ModelParams {
    /// Validates the knobs. `alpha` is reduced mod 1 and must not land on 0.
    pub fn new(j_x: f64, j_y: f64, alpha: f64, omega_x: f64, omega_y: f64) -> Result<Self> {
        for (name, v) in [
            ("j_x", j_x),
            ("j_y", j_y),
            ("alpha", alpha),
            ("omega_x", omega_x),
            ("omega_y", omega_y),
        ] {
            if !v.is_finite() {
                return Err(invalid(name, format!("must be finite, got {v}")));
            }
        }
        if j_x < 0.0 {
            return Err(invalid("j_x", format!("must be >= 0, got {j_x}")));
        }
        if j_y < 0.0 {
            return Err(invalid("j_y", format!("must be >= 0, got {j_y}")));
        }
        if omega_x < 0.0 {
            return Err(invalid("omega_x", format!("must be >= 0, got {omega_x}")));
        }
        if omega_y <= 0.0 {
            return Err(invalid(
                "omega_y",
                format!("must be > 0 (it sets the drive period), got {omega_y}"),
            ));
        }
        let alpha = alpha.rem_euclid(1.0);
        if alpha == 0.0 {
            return Err(invalid("alpha", "must not be an integer"));
        }
        Ok(Self {
            j_x,
            j_y,
            alpha,
            omega_x,
            omega_y,
        })
    }

    /// Builds the parameter set from a total drive frequency and a ratio
    /// `beta = omega_x / omega_y`.
    pub fn from_drive(j_x: f64, j_y: f64, alpha: f64, omega: f64, beta: f64) -> Result<Self> {
        let (omega_x, omega_y) = frequency_split(omega, beta)?;
        Self::new(j_x, j_y, alpha, omega_x, omega_y)
    }

    /// Same parameters with the hopping along the chain replaced.
    pub fn with_j_x(self, j_x: f64) -> Result<Self> {
        Self::new(j_x, self.j_y, self.alpha, self.omega_x, self.omega_y)
    }

    pub fn with_alpha(self, alpha: f64) -> Result<Self> {
        Self::new(self.j_x, self.j_y, alpha, self.omega_x, self.omega_y)
    }
}

/// All symbols derived from [`ModelParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedParams {
    pub params: ModelParams,
    /// omega_x / omega_y.
    pub beta: f64,
    /// Geometric sum of the two Bloch frequencies.
    pub omega: f64,
    /// Characteristic frequency of the undriven classical system.
    pub big_omega: f64,
    /// Scaled hopping 2 pi alpha J_x.
    pub jp_x: f64,
    /// Scaled hopping 2 pi alpha J_y.
    pub jp_y: f64,
    /// Drive period 2 pi / omega_y.
    pub period: f64,
    /// Effective Planck constant 2 pi alpha.
    pub hbar_eff: f64,
}

impl DerivedParams {
    #[inline]
    pub fn omega_x(&self) -> f64 {
        self.params.omega_x
    }

    #[inline]
    pub fn omega_y(&self) -> f64 {
        self.params.omega_y
    }
}

pub fn derive_params(p: &ModelParams) -> Result<DerivedParams> {
    if !(p.omega_y > 0.0) {
        return Err(invalid(
            "omega_y",
            "must be > 0 (no drive period otherwise)",
        ));
    }
    let hbar_eff = TAU * p.alpha;
    let jp_x = hbar_eff * p.j_x;
    let jp_y = hbar_eff * p.j_y;
    Ok(DerivedParams {
        params: *p,
        beta: p.omega_x / p.omega_y,
        omega: p.omega_x.hypot(p.omega_y),
        big_omega: hbar_eff * (p.j_x * p.j_y).sqrt(),
        jp_x,
        jp_y,
        period: TAU / p.omega_y,
        hbar_eff,
    })
}

/// Inverts the `(omega, beta)` parametrisation into the two Bloch frequencies.
pub fn frequency_split(omega: f64, beta: f64) -> Result<(f64, f64)> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(invalid("omega", format!("must be > 0, got {omega}")));
    }
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(invalid("beta", format!("must be >= 0, got {beta}")));
    }
    let omega_y = omega / (1.0 + beta * beta).sqrt();
    Ok((beta * omega_y, omega_y))
}

/// The incommensurate frequency ratio (sqrt(5) - 1) / 4 used throughout.
pub fn golden_beta() -> f64 {
    (5f64.sqrt() - 1.0) / 4.0
}

/// Whether a frequency ratio is commensurate. Rational ratios are declared
/// from their numerator and denominator, never recovered from a float.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BetaClass {
    Rational { r: u64, q: u64 },
    Irrational { value: f64 },
}

impl BetaClass {
    /// `r / q` reduced to lowest terms.
    pub fn rational(r: u64, q: u64) -> Result<Self> {
        if q == 0 {
            return Err(invalid("beta_q", "denominator must be positive"));
        }
        let g = gcd(r, q);
        Ok(BetaClass::Rational { r: r / g, q: q / g })
    }

    pub fn irrational(value: f64) -> Result<Self> {
        if !(value >= 0.0) || !value.is_finite() {
            return Err(invalid("beta", format!("must be >= 0, got {value}")));
        }
        Ok(BetaClass::Irrational { value })
    }

    pub fn golden() -> Self {
        BetaClass::Irrational {
            value: golden_beta(),
        }
    }

    pub fn value(&self) -> f64 {
        match *self {
            BetaClass::Rational { r, q } => r as f64 / q as f64,
            BetaClass::Irrational { value } => value,
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, BetaClass::Rational { .. })
    }

    /// Predicted high-frequency spreading exponent `r + q - 1`, rational only.
    pub fn resonance_order(&self) -> Option<u64> {
        match *self {
            BetaClass::Rational { r, q } => Some(r + q - 1),
            BetaClass::Irrational { .. } => None,
        }
    }
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}
