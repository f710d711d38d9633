//! Standard quantum limits for detecting a uniform force or momentum
//! diffusion with a test mass prepared and measured in position.
//!
//! The formulas come from the heuristic argument: a prepared width
//! `σ_x^prep` disperses by `ħT/(2mσ_x^prep)`, the two add in quadrature, and
//! a signal is visible only if it displaces or smears the final position by
//! more than the optimal `σ_x^meas = √(ħT/m)`. Values are reported exactly
//! with ratio diagnostics; no detectable/undetectable verdict is made here.

use num_complex::Complex64;

use crate::error::{ensure_nonnegative, ensure_positive, Error, Result};

/// Physical scenario for a single run of the experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    pub mass: f64,
    pub duration: f64,
    pub hbar: f64,
    pub separation: Option<f64>,
    pub force: f64,
    pub diffusion: f64,
}

impl ExperimentConfig {
    pub fn new(mass: f64, duration: f64, hbar: f64) -> Result<Self> {
        Self { mass, duration, hbar, separation: None, force: 0.0, diffusion: 0.0 }.validated()
    }

    /// `m = T = ħ = 1`.
    pub fn natural() -> Self {
        Self { mass: 1.0, duration: 1.0, hbar: 1.0, separation: None, force: 0.0, diffusion: 0.0 }
    }

    pub fn with_separation(mut self, separation: f64) -> Result<Self> {
        self.separation = Some(separation);
        self.validated()
    }

    pub fn with_force(mut self, force: f64) -> Result<Self> {
        self.force = force;
        self.validated()
    }

    pub fn with_diffusion(mut self, diffusion: f64) -> Result<Self> {
        self.diffusion = diffusion;
        self.validated()
    }

    pub fn validated(self) -> Result<Self> {
        ensure_positive("m", self.mass)?;
        ensure_positive("T", self.duration)?;
        ensure_positive("hbar", self.hbar)?;
        if let Some(l) = self.separation {
            ensure_positive("L", l)?;
        }
        if !self.force.is_finite() {
            return Err(Error::InvalidParameter { name: "F", reason: "must be finite".into() });
        }
        ensure_nonnegative("D", self.diffusion)?;
        Ok(self)
    }

    pub fn require_separation(&self) -> Result<f64> {
        self.separation.ok_or(Error::InvalidParameter { name: "L", reason: "separation is required".into() })
    }
}

/// `F_SQL = 2√(ħm/T³)`.
pub fn force_sql(mass: f64, duration: f64, hbar: f64) -> Result<f64> {
    positive3(mass, duration, hbar)?;
    Ok(2.0 * (hbar * mass / duration.powi(3)).sqrt())
}

/// `D_SQL = 9ħm/(8T²)`.
pub fn diffusion_sql(mass: f64, duration: f64, hbar: f64) -> Result<f64> {
    positive3(mass, duration, hbar)?;
    Ok(9.0 * hbar * mass / (8.0 * duration * duration))
}

/// `D_min = ħ²/(T L²)`, the weakest diffusion that decoheres a
/// superposition of extent `L` within `T`.
pub fn d_min(duration: f64, separation: f64, hbar: f64) -> Result<f64> {
    ensure_positive("T", duration)?;
    ensure_positive("L", separation)?;
    ensure_positive("hbar", hbar)?;
    Ok(hbar * hbar / (duration * separation * separation))
}

fn positive3(mass: f64, duration: f64, hbar: f64) -> Result<()> {
    ensure_positive("m", mass)?;
    ensure_positive("T", duration)?;
    ensure_positive("hbar", hbar)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalWidths {
    pub sigma_x_prep: f64,
    pub sigma_p_prep: f64,
    pub sigma_x_disp: f64,
    pub sigma_x_meas: f64,
}

/// Final position spread `√(σ² + (ħT/2mσ)²)` for a prepared width `σ`.
pub fn measured_width(sigma_x_prep: f64, mass: f64, duration: f64, hbar: f64) -> f64 {
    let disp = hbar * duration / (2.0 * mass * sigma_x_prep);
    sigma_x_prep.hypot(disp)
}

pub fn optimal_widths(mass: f64, duration: f64, hbar: f64) -> Result<OptimalWidths> {
    positive3(mass, duration, hbar)?;
    let sigma_x_prep = (hbar * duration / (2.0 * mass)).sqrt();
    Ok(OptimalWidths {
        sigma_x_prep,
        sigma_p_prep: hbar / (2.0 * sigma_x_prep),
        sigma_x_disp: hbar * duration / (2.0 * mass * sigma_x_prep),
        sigma_x_meas: (hbar * duration / mass).sqrt(),
    })
}

/// `(σ_p^diff, σ_x^diff) = (√(2DT), √(8DT³)/(3m))`.
pub fn diffusion_spreads(diffusion: f64, duration: f64, mass: f64) -> Result<(f64, f64)> {
    ensure_nonnegative("D", diffusion)?;
    ensure_nonnegative("T", duration)?;
    ensure_positive("m", mass)?;
    Ok(((2.0 * diffusion * duration).sqrt(), (8.0 * diffusion * duration.powi(3)).sqrt() / (3.0 * mass)))
}

/// `γ = exp(-D L² T/ħ² + i F L T/ħ)`.
pub fn gamma_of(config: &ExperimentConfig) -> Result<Complex64> {
    let l = config.require_separation()?;
    let s = config.diffusion * l * l * config.duration / (config.hbar * config.hbar);
    let theta = config.force * l * config.duration / config.hbar;
    Ok(Complex64::from_polar((-s).exp(), theta))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HbarScaling {
    pub scaled: ExperimentConfig,
    pub gamma_before: Complex64,
    pub gamma_after: Complex64,
}

/// The classical limit `ħ → κħ` holding `L`, `T`, `m`, `F/ħ` and `D/ħ²`
/// fixed. The decoherence factor is unchanged while `F/F_SQL ∝ √κ`.
pub fn hbar_scaling(config: &ExperimentConfig, kappa: f64) -> Result<HbarScaling> {
    ensure_positive("kappa", kappa)?;
    let config = config.validated()?;
    let scaled = ExperimentConfig {
        hbar: kappa * config.hbar,
        force: kappa * config.force,
        diffusion: kappa * kappa * config.diffusion,
        ..config
    }
    .validated()?;
    Ok(HbarScaling { scaled, gamma_before: gamma_of(&config)?, gamma_after: gamma_of(&scaled)? })
}

/// `F/F_SQL`, `D/D_SQL` and (when `L` is set) `D/D_min`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqlRatios {
    pub force: f64,
    pub diffusion: f64,
    pub diffusion_min: Option<f64>,
}

pub fn sql_ratios(config: &ExperimentConfig) -> Result<SqlRatios> {
    let c = config.validated()?;
    let diffusion_min = match c.separation {
        Some(l) => Some(c.diffusion / d_min(c.duration, l, c.hbar)?),
        None => None,
    };
    Ok(SqlRatios {
        force: c.force / force_sql(c.mass, c.duration, c.hbar)?,
        diffusion: c.diffusion / diffusion_sql(c.mass, c.duration, c.hbar)?,
        diffusion_min,
    })
}
