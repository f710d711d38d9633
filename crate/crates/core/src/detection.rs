//! Hypothesis testing between diffusion or force scenarios.
//!
//! Two decision statistics are supported: a single final position
//! measurement (the classical strategy whose optimum defines the SQL) and
//! the `±` outcome of an interferometer that recombines the two branches of
//! a cat state. Either way the figure of merit is the Chernoff exponent
//! `C`, so that `n` independent trials err with probability `~e^{-nC}`.

use std::fmt::Write as _;

use nalgebra::Matrix2;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gaussian::{propagate_cat_full, propagate_gaussian_full, CatState, GaussianState, WignerFunction};
use crate::grid::fmt_f64;
use crate::sql::{gamma_of, optimal_widths, ExperimentConfig};

/// Points used to sample final position distributions.
pub const POSITION_SAMPLES: usize = 512;
/// Largest |r| in the preparation search.
pub const R_MAX: f64 = 0.999;
/// Resolution of the preparation search in `ln σ_x` and in `r`.
pub const SEARCH_POINTS: usize = 41;
/// Half-width of the `ln(σ_x/σ_opt)` range of the search.
pub const LOG_SIGMA_SPAN: f64 = 2.0;
/// Tolerance of the bracketing search over the Chernoff parameter.
pub const ALPHA_TOLERANCE: f64 = 1e-8;

pub type Density2 = Matrix2<Complex64>;

/// `γ = e^{-s + iθ}` multiplying the `|1⟩⟨2|` coherence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoherenceFactor {
    gamma: Complex64,
}

impl DecoherenceFactor {
    pub fn new(gamma: Complex64) -> Result<Self> {
        if !(gamma.norm() <= 1.0 + 1e-12) {
            return Err(Error::InvalidParameter { name: "gamma", reason: format!("|gamma| = {} exceeds 1", gamma.norm()) });
        }
        Ok(Self { gamma })
    }

    pub fn gamma(&self) -> Complex64 {
        self.gamma
    }

    /// `s = -ln|γ|`.
    pub fn s(&self) -> f64 {
        (-self.gamma.norm().ln()).max(0.0)
    }

    /// `θ = arg γ`.
    pub fn theta(&self) -> f64 {
        self.gamma.arg()
    }
}

/// The only completely positive map on a two-branch subspace that leaves
/// each branch undisturbed: diagonal kept, coherences scaled by `γ`, `γ*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelChannel {
    pub gamma: DecoherenceFactor,
}

pub fn apply_channel(channel: &TwoLevelChannel, rho: &Density2) -> Result<Density2> {
    check_density(rho)?;
    let g = channel.gamma.gamma;
    let mut out = *rho;
    out[(0, 1)] = g * rho[(0, 1)];
    out[(1, 0)] = g.conj() * rho[(1, 0)];
    Ok(out)
}

fn check_density(rho: &Density2) -> Result<()> {
    const TOL: f64 = 1e-12;
    if rho.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::NotDensityMatrix("non-finite entry".into()));
    }
    if (rho[(0, 1)] - rho[(1, 0)].conj()).norm() > TOL || rho[(0, 0)].im.abs() > TOL || rho[(1, 1)].im.abs() > TOL {
        return Err(Error::NotDensityMatrix("not Hermitian".into()));
    }
    let (a, d) = (rho[(0, 0)].re, rho[(1, 1)].re);
    if (a + d - 1.0).abs() > TOL {
        return Err(Error::NotDensityMatrix(format!("trace {} differs from 1", a + d)));
    }
    if a < -TOL || d < -TOL || a * d - rho[(0, 1)].norm_sqr() < -TOL {
        return Err(Error::NotDensityMatrix("not positive semidefinite".into()));
    }
    Ok(())
}

/// `γ = exp(-D L² T/ħ² + i F L T/ħ)`.
pub fn decoherence_factor_from_config(config: &ExperimentConfig) -> Result<DecoherenceFactor> {
    DecoherenceFactor::new(gamma_of(&config.validated()?)?)
}

/// `(P₊, P₋) = ((1 + Re γ)/2, (1 - Re γ)/2)`.
pub fn interferometer_probabilities(gamma: &DecoherenceFactor) -> (f64, f64) {
    let minus = 0.5 * (1.0 - gamma.gamma.re);
    (1.0 - minus, minus)
}

/// Densities sampled on a uniform support; each sample carries weight
/// `spacing`. Discrete distributions use spacing 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledDistribution {
    support: Vec<f64>,
    density: Vec<f64>,
    spacing: f64,
}

impl SampledDistribution {
    /// Accepts densities normalized to within `1e-6` (values above `-1e-9`
    /// are clipped to zero) and rescales them to unit mass exactly.
    pub fn new(support: Vec<f64>, density: Vec<f64>, spacing: f64) -> Result<Self> {
        let d = Self::clipped(support, density, spacing)?;
        let mass = d.raw_mass();
        if (mass - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidParameter { name: "density", reason: format!("mass {mass} is not 1 within 1e-6") });
        }
        Ok(d.rescaled(mass))
    }

    /// Like [`new`](Self::new) but rescales any positive mass.
    pub fn normalized(support: Vec<f64>, density: Vec<f64>, spacing: f64) -> Result<Self> {
        let d = Self::clipped(support, density, spacing)?;
        let mass = d.raw_mass();
        if !(mass > 0.0) {
            return Err(Error::InvalidParameter { name: "density", reason: "zero total mass".into() });
        }
        Ok(d.rescaled(mass))
    }

    pub fn from_marginal(m: &crate::grid::Marginal) -> Result<Self> {
        Self::normalized(m.coords.clone(), m.density.clone(), m.spacing)
    }

    /// Two-outcome distribution `(P₊, P₋)`.
    pub fn outcomes(p_plus: f64, p_minus: f64) -> Result<Self> {
        Self::new(vec![1.0, -1.0], vec![p_plus, p_minus], 1.0)
    }

    fn clipped(support: Vec<f64>, density: Vec<f64>, spacing: f64) -> Result<Self> {
        if support.len() != density.len() || support.is_empty() {
            return Err(Error::InvalidParameter { name: "density", reason: "support and density lengths differ".into() });
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidParameter { name: "spacing", reason: "must be positive".into() });
        }
        if let Some(v) = density.iter().find(|v| !v.is_finite() || **v < -1e-9) {
            return Err(Error::InvalidParameter { name: "density", reason: format!("invalid value {v}") });
        }
        let density = density.into_iter().map(|v| v.max(0.0)).collect();
        Ok(Self { support, density, spacing })
    }

    fn raw_mass(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.spacing
    }

    fn rescaled(mut self, mass: f64) -> Self {
        self.density.iter_mut().for_each(|v| *v /= mass);
        self
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    fn same_support(&self, other: &Self) -> bool {
        let scale = self.support.iter().fold(self.spacing, |m, v| m.max(v.abs()));
        self.support.len() == other.support.len()
            && (self.spacing - other.spacing).abs() <= 1e-12 * self.spacing
            && self.support.iter().zip(&other.support).all(|(a, b)| (a - b).abs() <= 1e-12 * scale)
    }
}

/// `C(P, Q) = -ln min_{α∈[0,1]} Σ P^α Q^{1-α} Δ`.
///
/// Only samples where both densities are positive contribute, which is the
/// continuous extension of the sum to the endpoints. Disjoint supports give
/// `+∞`.
pub fn chernoff_exponent(p: &SampledDistribution, q: &SampledDistribution) -> Result<f64> {
    if !p.same_support(q) {
        return Err(Error::SupportMismatch);
    }
    if p.density == q.density {
        return Ok(0.0);
    }
    let pairs: Vec<(f64, f64)> = p
        .density
        .iter()
        .zip(&q.density)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pairs.is_empty() {
        return Ok(f64::INFINITY);
    }
    let spacing = p.spacing;
    let f = |alpha: f64| pairs.iter().map(|(lp, lq)| (alpha * lp + (1.0 - alpha) * lq).exp()).sum::<f64>() * spacing;
    let (_, interior) = golden_min(&f, 0.0, 1.0, ALPHA_TOLERANCE);
    let best = interior.min(f(0.0)).min(f(1.0));
    Ok((-best.ln()).max(0.0))
}

/// Golden-section minimization of a convex function on `[a, b]`.
fn golden_min(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd { (c, fc) } else { (d, fd) }
}

/// How the experimenter decides between the hypotheses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    /// One position measurement at time `T`.
    FinalPosition,
    /// The `±` port of an interferometer recombining the two branches.
    Interferometer,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Preparation {
    Gaussian(GaussianState),
    Cat(CatState),
}

/// Force and diffusion of the alternative hypothesis; the null hypothesis
/// takes them from the [`ExperimentConfig`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alternative {
    pub force: f64,
    pub diffusion: f64,
}

impl Alternative {
    pub fn diffusion(diffusion: f64) -> Self {
        Self { force: 0.0, diffusion }
    }

    pub fn force(force: f64) -> Self {
        Self { force, diffusion: 0.0 }
    }

    fn apply(&self, config: &ExperimentConfig) -> Result<ExperimentConfig> {
        ExperimentConfig { force: self.force, diffusion: self.diffusion, ..*config }.validated()
    }
}

/// Chernoff exponent with the natural statistic for the preparation: final
/// position for a Gaussian, the interferometer outcome for a cat.
pub fn detection_error_exponent(prep: &Preparation, config: &ExperimentConfig, alt: &Alternative) -> Result<f64> {
    let decision = match prep {
        Preparation::Gaussian(_) => Decision::FinalPosition,
        Preparation::Cat(_) => Decision::Interferometer,
    };
    detection_error_exponent_with(prep, config, alt, decision)
}

pub fn detection_error_exponent_with(
    prep: &Preparation,
    config: &ExperimentConfig,
    alt: &Alternative,
    decision: Decision,
) -> Result<f64> {
    let null = config.validated()?;
    let other = alt.apply(&null)?;
    let (p, q) = match decision {
        Decision::FinalPosition => final_position_distributions(prep, &null, &other)?,
        Decision::Interferometer => {
            let cat = match prep {
                Preparation::Cat(cat) => cat,
                Preparation::Gaussian(_) => {
                    return Err(Error::InvalidParameter { name: "prep", reason: "interferometer decision needs a cat state".into() })
                }
            };
            let l = cat.separation();
            let outcome = |c: &ExperimentConfig| -> Result<SampledDistribution> {
                let g = decoherence_factor_from_config(&ExperimentConfig { separation: Some(l), ..*c })?;
                let (plus, minus) = interferometer_probabilities(&g);
                SampledDistribution::outcomes(plus, minus)
            };
            (outcome(&null)?, outcome(&other)?)
        }
    };
    chernoff_exponent(&p, &q)
}

/// Final position densities under both hypotheses on a shared grid.
pub fn final_position_distributions(
    prep: &Preparation,
    null: &ExperimentConfig,
    other: &ExperimentConfig,
) -> Result<(SampledDistribution, SampledDistribution)> {
    let (m, t) = (null.mass, null.duration);
    match prep {
        Preparation::Gaussian(g) => {
            let a = propagate_gaussian_full(g, null.force, null.diffusion, m, t)?;
            let b = propagate_gaussian_full(g, other.force, other.diffusion, m, t)?;
            let lo = (a.mean().x - 10.0 * a.var_x().sqrt()).min(b.mean().x - 10.0 * b.var_x().sqrt());
            let hi = (a.mean().x + 10.0 * a.var_x().sqrt()).max(b.mean().x + 10.0 * b.var_x().sqrt());
            let density = |s: &GaussianState, x: f64| {
                let v = s.var_x();
                (-(x - s.mean().x).powi(2) / (2.0 * v)).exp() / (2.0 * std::f64::consts::PI * v).sqrt()
            };
            sample_pair(lo, hi, |x| density(&a, x), |x| density(&b, x))
        }
        Preparation::Cat(cat) => {
            let a = propagate_cat_full(cat, null.force, null.diffusion, m, t)?;
            let b = propagate_cat_full(cat, other.force, other.diffusion, m, t)?;
            let w = a.support(10.0).union(&b.support(10.0));
            let marginal = |terms: &crate::gaussian::MixedTerms, x: f64| terms.terms().iter().map(|t| t.position_marginal(x).re).sum::<f64>();
            sample_pair(w.xmin, w.xmax, |x| marginal(&a.wigner, x), |x| marginal(&b.wigner, x))
        }
    }
}

fn sample_pair(
    lo: f64,
    hi: f64,
    pa: impl Fn(f64) -> f64,
    pb: impl Fn(f64) -> f64,
) -> Result<(SampledDistribution, SampledDistribution)> {
    let n = POSITION_SAMPLES;
    let dx = (hi - lo) / n as f64;
    let xs: Vec<f64> = (0..n).map(|i| lo + (i as f64 + 0.5) * dx).collect();
    let a = SampledDistribution::normalized(xs.clone(), xs.iter().map(|&x| pa(x)).collect(), dx)?;
    let b = SampledDistribution::normalized(xs.clone(), xs.iter().map(|&x| pb(x)).collect(), dx)?;
    Ok((a, b))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub sigma_x: f64,
    pub r: f64,
    pub exponent: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreparationSearch {
    pub best: GaussianState,
    pub best_point: SurfacePoint,
    /// Row-major: `sigma_x` outer, `r` inner, both ascending.
    pub surface: Vec<SurfacePoint>,
    pub sigma_grid: Vec<f64>,
    pub r_grid: Vec<f64>,
}

impl PreparationSearch {
    /// `sigma_x,r,exponent` CSV.
    pub fn surface_csv(&self) -> String {
        let mut out = String::from("sigma_x,r,exponent\n");
        for s in &self.surface {
            let _ = writeln!(out, "{},{},{}", fmt_f64(s.sigma_x), fmt_f64(s.r), fmt_f64(s.exponent));
        }
        out
    }

    /// Index of the argmax along the correlation axis.
    pub fn best_r_index(&self) -> usize {
        self.r_grid.iter().position(|r| *r == self.best_point.r).expect("best r is on the grid")
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| if k + 1 == n { b } else { a + (b - a) * k as f64 / (n - 1) as f64 }).collect()
}

/// Grid search over Heisenberg-saturating Gaussian preparations centred at
/// the origin, parameterized by `σ_x` and the correlation `r`.
///
/// `σ_x = σ_opt e^u` with `u ∈ [-2, 2]` and `σ_opt = √(ħT/2m)`; `r ∈ [0, r_max]`
/// or `[-r_max, r_max]` when contractive states are allowed. Ties keep the
/// smallest `σ_x`, then the smallest `r`.
pub fn optimize_gaussian_preparation(config: &ExperimentConfig, alt: &Alternative, allow_contractive: bool) -> Result<PreparationSearch> {
    let config = config.validated()?;
    let sigma_opt = optimal_widths(config.mass, config.duration, config.hbar)?.sigma_x_prep;
    let sigma_grid: Vec<f64> = linspace(-LOG_SIGMA_SPAN, LOG_SIGMA_SPAN, SEARCH_POINTS).into_iter().map(|u| sigma_opt * u.exp()).collect();
    let r_grid = if allow_contractive { linspace(-R_MAX, R_MAX, SEARCH_POINTS) } else { linspace(0.0, R_MAX, SEARCH_POINTS) };
    let cells: Vec<(f64, f64)> = sigma_grid.iter().flat_map(|&s| r_grid.iter().map(move |&r| (s, r))).collect();
    let surface: Vec<SurfacePoint> = cells
        .par_iter()
        .map(|&(sigma_x, r)| {
            let g = GaussianState::correlated(0.0, 0.0, sigma_x, r, config.hbar)?;
            let exponent = detection_error_exponent(&Preparation::Gaussian(g), &config, alt)?;
            Ok(SurfacePoint { sigma_x, r, exponent })
        })
        .collect::<Result<_>>()?;
    let best_point = surface.iter().fold(surface[0], |best, s| if s.exponent > best.exponent { *s } else { best });
    let best = GaussianState::correlated(0.0, 0.0, best_point.sigma_x, best_point.r, config.hbar)?;
    Ok(PreparationSearch { best, best_point, surface, sigma_grid, r_grid })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn factor(g: Complex64) -> TwoLevelChannel {
        TwoLevelChannel { gamma: DecoherenceFactor::new(g).unwrap() }
    }

    #[test]
    fn channel_examples() {
        let rho = Density2::new(c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0));
        assert_eq!(apply_channel(&factor(c(1.0, 0.0)), &rho).unwrap(), rho);
        let half = apply_channel(&factor(c(0.5, 0.0)), &rho).unwrap();
        assert_eq!(half[(0, 1)], c(0.25, 0.0));
        let mixed = apply_channel(&factor(c(0.0, 0.0)), &rho).unwrap();
        assert_eq!(mixed, Density2::new(c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)));
    }

    #[test]
    fn channel_rejects_non_density_input() {
        let bad_trace = Density2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0));
        assert!(apply_channel(&factor(c(1.0, 0.0)), &bad_trace).is_err());
        let not_psd = Density2::new(c(0.5, 0.0), c(0.9, 0.0), c(0.9, 0.0), c(0.5, 0.0));
        assert!(apply_channel(&factor(c(1.0, 0.0)), &not_psd).is_err());
        let not_herm = Density2::new(c(0.5, 0.0), c(0.1, 0.1), c(0.1, 0.1), c(0.5, 0.0));
        assert!(apply_channel(&factor(c(1.0, 0.0)), &not_herm).is_err());
        assert!(DecoherenceFactor::new(c(1.1, 0.0)).is_err());
    }

    #[test]
    fn gamma_from_config_examples() {
        let base = ExperimentConfig::natural().with_separation(1.0).unwrap();
        assert_eq!(decoherence_factor_from_config(&base).unwrap().gamma(), c(1.0, 0.0));
        let f = decoherence_factor_from_config(&base.with_force(PI).unwrap()).unwrap();
        assert!((f.gamma() - c(-1.0, 0.0)).norm() < 1e-15);
        assert!((f.theta().abs() - PI).abs() < 1e-15);
        let d = decoherence_factor_from_config(&base.with_diffusion(1.0).unwrap()).unwrap();
        assert!((d.gamma().re - (-1.0f64).exp()).abs() < 1e-16);
        assert!((d.s() - 1.0).abs() < 1e-15);
        assert!(decoherence_factor_from_config(&ExperimentConfig::natural()).is_err());
    }

    #[test]
    fn interferometer_examples() {
        let p = |g: Complex64| interferometer_probabilities(&DecoherenceFactor::new(g).unwrap());
        assert_eq!(p(c(1.0, 0.0)), (1.0, 0.0));
        assert_eq!(p(c(0.0, 0.0)), (0.5, 0.5));
        let (_, minus) = p(Complex64::from_polar(1.0, PI / 2.0));
        assert!((minus - 0.5).abs() < 1e-15);
    }

    fn gaussian_samples(mean: f64, var: f64, lo: f64, hi: f64, n: usize) -> SampledDistribution {
        let dx = (hi - lo) / n as f64;
        let xs: Vec<f64> = (0..n).map(|i| lo + (i as f64 + 0.5) * dx).collect();
        let d = xs.iter().map(|x| (-(x - mean).powi(2) / (2.0 * var)).exp() / (2.0 * PI * var).sqrt()).collect();
        SampledDistribution::new(xs, d, dx).unwrap()
    }

    #[test]
    fn chernoff_examples() {
        let p = gaussian_samples(0.0, 1.0, -12.0, 13.0, 2000);
        let q = gaussian_samples(1.0, 1.0, -12.0, 13.0, 2000);
        assert_eq!(chernoff_exponent(&p, &p).unwrap(), 0.0);
        assert!((chernoff_exponent(&p, &q).unwrap() - 0.125).abs() < 1e-9);
        let far = SampledDistribution::new(vec![0.0, 1.0], vec![1.0, 0.0], 1.0).unwrap();
        let other = SampledDistribution::new(vec![0.0, 1.0], vec![0.0, 1.0], 1.0).unwrap();
        assert_eq!(chernoff_exponent(&far, &other).unwrap(), f64::INFINITY);
        let shifted = SampledDistribution::new(vec![0.5, 1.5], vec![0.0, 1.0], 1.0).unwrap();
        assert_eq!(chernoff_exponent(&far, &shifted), Err(Error::SupportMismatch));
    }

    #[test]
    fn chernoff_with_certain_outcome() {
        // P = (1, 0) against (q, 1-q) gives -ln q
        let q = 0.7;
        let a = SampledDistribution::outcomes(1.0, 0.0).unwrap();
        let b = SampledDistribution::outcomes(q, 1.0 - q).unwrap();
        assert!((chernoff_exponent(&a, &b).unwrap() + q.ln()).abs() < 1e-12);
    }

    #[test]
    fn sampled_distribution_validation() {
        assert!(SampledDistribution::new(vec![0.0, 1.0], vec![0.5, 0.6], 1.0).is_err());
        assert!(SampledDistribution::new(vec![0.0, 1.0], vec![1.1, -0.1], 1.0).is_err());
        assert!(SampledDistribution::new(vec![0.0], vec![1.0, 0.0], 1.0).is_err());
        let d = SampledDistribution::new(vec![0.0, 1.0], vec![1.0 + 5e-7, -1e-10], 1.0).unwrap();
        assert_eq!(d.density(), &[1.0, 0.0]);
    }

    #[test]
    fn identical_hypotheses_have_zero_exponent() {
        let config = ExperimentConfig::natural().with_diffusion(0.2).unwrap();
        let g = GaussianState::minimum_uncertainty(0.0, 0.0, 0.7, 1.0).unwrap();
        let e = detection_error_exponent(&Preparation::Gaussian(g), &config, &Alternative::diffusion(0.2)).unwrap();
        assert_eq!(e, 0.0);
    }
}
