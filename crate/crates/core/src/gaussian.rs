//! Gaussian wavepackets, two-branch cat states and their exact evolution
//! under free flight, a uniform force and momentum diffusion.
//!
//! The Wigner function of every state handled here is a finite sum of
//! terms `Re[Z exp(-½ (α-m)ᵀ S⁻¹ (α-m))]` with a complex weight `Z`, a
//! complex centre `m` and a real covariance `S` (see [`GaussianTerm`]).
//! Free flight shears each term, a uniform force translates it and momentum
//! diffusion convolves it with the Gaussian kernel of [`PropagatorKernel`],
//! so all three act in closed form.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{ensure_finite, ensure_nonnegative, ensure_positive, Error, Result};
use crate::grid::Window;
use crate::phase::{shear, symmetrize, Mat2, Vec2};

/// Largest branch overlap for which two packets count as orthogonal.
pub const MAX_BRANCH_OVERLAP: f64 = 1e-6;

/// Relative slack on the uncertainty bound and on branch purity.
const HEISENBERG_SLACK: f64 = 1e-9;

/// Anything with a real Wigner function that can be rasterized.
pub trait WignerFunction {
    fn wigner(&self, x: f64, p: f64) -> f64;

    /// Window covering `nsigma` standard deviations of every component.
    fn support(&self, nsigma: f64) -> Window;
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    mean: Vec2,
    cov: Mat2,
    hbar: f64,
}

impl GaussianState {
    pub fn new(mean: Vec2, cov: Mat2, hbar: f64) -> Result<Self> {
        ensure_positive("hbar", hbar)?;
        ensure_finite("x0", mean.x)?;
        ensure_finite("p0", mean.y)?;
        let cov = symmetrize(&cov)?;
        if cov[(0, 0)] <= 0.0 || cov[(1, 1)] <= 0.0 {
            return Err(Error::InvalidParameter { name: "cov", reason: "variances must be positive".into() });
        }
        let det = cov.determinant();
        let bound = 0.25 * hbar * hbar;
        if det < bound * (1.0 - HEISENBERG_SLACK) {
            return Err(Error::Heisenberg { det, bound });
        }
        Ok(Self { mean, cov, hbar })
    }

    /// Uncorrelated minimum-uncertainty packet with position width `sigma_x`.
    pub fn minimum_uncertainty(x0: f64, p0: f64, sigma_x: f64, hbar: f64) -> Result<Self> {
        Self::correlated(x0, p0, sigma_x, 0.0, hbar)
    }

    /// Pure packet with position width `sigma_x` and position-momentum
    /// correlation coefficient `r ∈ (-1, 1)`; `r < 0` is contractive.
    pub fn correlated(x0: f64, p0: f64, sigma_x: f64, r: f64, hbar: f64) -> Result<Self> {
        ensure_positive("sigma_x", sigma_x)?;
        ensure_positive("hbar", hbar)?;
        if !(r.abs() < 1.0) {
            return Err(Error::InvalidParameter { name: "r", reason: format!("|r| must be below 1, got {r}") });
        }
        let sigma_p = hbar / (2.0 * sigma_x * (1.0 - r * r).sqrt());
        let cxp = r * sigma_x * sigma_p;
        Self::new(Vec2::new(x0, p0), Mat2::new(sigma_x * sigma_x, cxp, cxp, sigma_p * sigma_p), hbar)
    }

    pub fn mean(&self) -> Vec2 {
        self.mean
    }

    pub fn cov(&self) -> &Mat2 {
        &self.cov
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn var_x(&self) -> f64 {
        self.cov[(0, 0)]
    }

    pub fn var_p(&self) -> f64 {
        self.cov[(1, 1)]
    }

    pub fn cov_xp(&self) -> f64 {
        self.cov[(0, 1)]
    }

    pub fn is_pure(&self) -> bool {
        let bound = 0.25 * self.hbar * self.hbar;
        self.cov.determinant() <= bound * (1.0 + HEISENBERG_SLACK)
    }

    pub fn is_contractive(&self) -> bool {
        self.cov_xp() < 0.0
    }

    fn term(&self) -> GaussianTerm {
        GaussianTerm::real(self.mean, self.cov)
    }
}

impl WignerFunction for GaussianState {
    fn wigner(&self, x: f64, p: f64) -> f64 {
        self.term().value(x, p)
    }

    fn support(&self, nsigma: f64) -> Window {
        self.term().support(nsigma)
    }
}

/// One term `Z exp(-½ (α-m)ᵀ S⁻¹ (α-m))` of a Wigner function. `S` is real
/// and positive definite; `Z` and `m` may be complex, which encodes
/// interference fringes. Only the real part of the value is physical.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianTerm {
    ln_weight: Complex64,
    center: [Complex64; 2],
    cov: Mat2,
    inv: Mat2,
}

impl GaussianTerm {
    fn new(ln_weight: Complex64, center: [Complex64; 2], cov: Mat2) -> Self {
        let inv = cov.try_inverse().expect("term covariance is positive definite");
        Self { ln_weight, center, cov, inv }
    }

    /// Normalized real Gaussian density.
    fn real(mean: Vec2, cov: Mat2) -> Self {
        let ln_w = -(2.0 * PI * cov.determinant().sqrt()).ln();
        Self::new(Complex64::new(ln_w, 0.0), [mean.x.into(), mean.y.into()], cov)
    }

    fn exponent(&self, x: f64, p: f64) -> Complex64 {
        let dx = x - self.center[0];
        let dp = p - self.center[1];
        self.ln_weight - 0.5 * (dx * dx * self.inv[(0, 0)] + 2.0 * dx * dp * self.inv[(0, 1)] + dp * dp * self.inv[(1, 1)])
    }

    pub fn complex_value(&self, x: f64, p: f64) -> Complex64 {
        self.exponent(x, p).exp()
    }

    pub fn value(&self, x: f64, p: f64) -> f64 {
        self.complex_value(x, p).re
    }

    /// `∬ Z exp(...) dx dp`, obtained by shifting the contour to the real
    /// centre.
    pub fn integral(&self) -> Complex64 {
        self.ln_weight.exp() * (2.0 * PI * self.cov.determinant().sqrt())
    }

    /// `∫ Z exp(...) dp` at position `x`.
    pub fn position_marginal(&self, x: f64) -> Complex64 {
        let sxx = self.cov[(0, 0)];
        let dx = x - self.center[0];
        let scale = (2.0 * PI * self.cov.determinant() / sxx).sqrt();
        (self.ln_weight - 0.5 * dx * dx / sxx).exp() * scale
    }

    pub fn cov(&self) -> &Mat2 {
        &self.cov
    }

    /// Real part of the centre: where the envelope peaks.
    pub fn envelope_center(&self) -> Vec2 {
        Vec2::new(self.center[0].re, self.center[1].re)
    }

    /// Phase-space wavevector of the fringes, `Im(m)ᵀ S⁻¹`.
    pub fn wavevector(&self) -> Vec2 {
        let im = Vec2::new(self.center[0].im, self.center[1].im);
        self.inv * im
    }

    fn support(&self, nsigma: f64) -> Window {
        let c = self.envelope_center();
        let sx = nsigma * self.cov[(0, 0)].sqrt();
        let sp = nsigma * self.cov[(1, 1)].sqrt();
        Window { xmin: c.x - sx, xmax: c.x + sx, pmin: c.y - sp, pmax: c.y + sp }
    }

    fn scaled(mut self, factor: Complex64) -> Self {
        self.ln_weight += factor.ln();
        self
    }

    /// Free flight `W(α) -> W(R₋ₜ α)`.
    fn sheared(&self, t: f64, m: f64) -> Self {
        let r = shear(t, m);
        let tau = t / m;
        let center = [self.center[0] + self.center[1] * tau, self.center[1]];
        Self::new(self.ln_weight, center, r * self.cov * r.transpose())
    }

    fn translated(&self, d: Vec2) -> Self {
        Self::new(self.ln_weight, [self.center[0] + d.x, self.center[1] + d.y], self.cov)
    }

    /// Convolution with the normalized Gaussian of covariance `c`.
    fn smoothed(&self, c: &Mat2) -> Self {
        let cov = self.cov + c;
        let ratio = self.cov.determinant() / cov.determinant();
        Self::new(self.ln_weight + 0.5 * ratio.ln(), self.center, cov)
    }

    fn evolved(&self, kernel: &PropagatorKernel, force: f64) -> Self {
        let t = kernel.duration;
        let m = kernel.mass;
        self.sheared(t, m).translated(force_shift(force, m, t)).smoothed(&kernel.cov)
    }
}

fn force_shift(force: f64, m: f64, t: f64) -> Vec2 {
    Vec2::new(force * t * t / (2.0 * m), force * t)
}

/// Smoothing kernel `g_t` of the exact solution
/// `W_t(α) = (g_t ⋆ W_0)(R₋ₜ α)` of `∂W = [-(p/m)∂ₓ + D∂ₚ²] W`.
///
/// The covariance is `C_t = 2Dt [[t²/3m², t/2m], [t/2m, 1]]`, fixed by the
/// moment equations `d Var p/dt = 2D`, `d Cov/dt = Var p/m`,
/// `d Var x/dt = 2 Cov/m`.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorKernel {
    cov: Mat2,
    duration: f64,
    mass: f64,
}

impl PropagatorKernel {
    pub fn cov(&self) -> &Mat2 {
        &self.cov
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Forward shear `R_t`.
    pub fn shear(&self) -> Mat2 {
        shear(self.duration, self.mass)
    }

    /// `R₋ₜ(x, p) = (x - p t/m, p)`.
    pub fn reverse_flow(&self, x: f64, p: f64) -> (f64, f64) {
        (x - p * self.duration / self.mass, p)
    }
}

pub fn propagator_kernel(diffusion: f64, mass: f64, t: f64) -> Result<PropagatorKernel> {
    ensure_nonnegative("D", diffusion)?;
    ensure_positive("m", mass)?;
    ensure_nonnegative("t", t)?;
    let scale = 2.0 * diffusion * t;
    let cov = Mat2::new(t * t / (3.0 * mass * mass), t / (2.0 * mass), t / (2.0 * mass), 1.0) * scale;
    Ok(PropagatorKernel { cov, duration: t, mass })
}

/// Evolution under `p²/2m - F x` with momentum diffusion `D` for time `t`.
pub fn propagate_gaussian_full(state: &GaussianState, force: f64, diffusion: f64, mass: f64, t: f64) -> Result<GaussianState> {
    ensure_finite("F", force)?;
    let kernel = propagator_kernel(diffusion, mass, t)?;
    let r = kernel.shear();
    let mean = r * state.mean + force_shift(force, mass, t);
    let cov = r * state.cov * r.transpose() + kernel.cov;
    Ok(GaussianState { mean, cov: symmetrize(&cov)?, hbar: state.hbar })
}

pub fn propagate_gaussian(state: &GaussianState, diffusion: f64, mass: f64, t: f64) -> Result<GaussianState> {
    propagate_gaussian_full(state, 0.0, diffusion, mass, t)
}

pub fn propagate_gaussian_with_force(state: &GaussianState, force: f64, mass: f64, t: f64) -> Result<GaussianState> {
    propagate_gaussian_full(state, force, 0.0, mass, t)
}

/// Normalized superposition `(|g₁⟩ + c |g₂⟩)/√N` of two pure Gaussian
/// packets with equal covariance.
///
/// Branch `j` has wavefunction `∝ exp(-a (x-xⱼ)² + i pⱼ (x-xⱼ)/ħ)` with
/// `a = 1/(4 Var x) - i Cov/(2ħ Var x)`; the relative amplitude `c` refers
/// to that phase convention.
#[derive(Debug, Clone, PartialEq)]
pub struct CatState {
    packet1: GaussianState,
    packet2: GaussianState,
    amp2: Complex64,
    norm: f64,
    overlap: Complex64,
    terms: [GaussianTerm; 3],
}

impl CatState {
    pub fn new(packet1: GaussianState, packet2: GaussianState, amp2: Complex64) -> Result<Self> {
        if packet1.hbar != packet2.hbar {
            return Err(Error::BranchMismatch { what: "hbar" });
        }
        if (packet1.cov - packet2.cov).amax() > 1e-12 * packet1.cov.amax() {
            return Err(Error::BranchMismatch { what: "covariance" });
        }
        if !packet1.is_pure() {
            return Err(Error::InvalidParameter { name: "packet1", reason: "cat branches must be pure".into() });
        }
        if !(amp2.norm() > 0.0) || !amp2.norm().is_finite() {
            return Err(Error::InvalidParameter { name: "amp2", reason: "must be non-zero and finite".into() });
        }
        let cross = branch_cross_term(&packet1, &packet2);
        // ∬ W[|1⟩⟨2|] = ⟨2|1⟩
        let overlap = cross.integral().conj();
        if overlap.norm() >= MAX_BRANCH_OVERLAP {
            return Err(Error::BranchOverlap { overlap: overlap.norm() });
        }
        let norm = 1.0 + amp2.norm_sqr() + 2.0 * (amp2 * overlap).re;
        let inv_norm = Complex64::new(1.0 / norm, 0.0);
        let terms = [
            packet1.term().scaled(inv_norm),
            packet2.term().scaled(inv_norm * amp2.norm_sqr()),
            cross.scaled(2.0 * amp2.conj() * inv_norm),
        ];
        Ok(Self { packet1, packet2, amp2, norm, overlap, terms })
    }

    /// Equal-weight superposition of two uncorrelated minimum-uncertainty
    /// packets at `x = ±L/2`, both at rest; branch 1 sits at `+L/2`.
    pub fn symmetric(sigma_x: f64, separation: f64, hbar: f64) -> Result<Self> {
        ensure_positive("L", separation)?;
        let g1 = GaussianState::minimum_uncertainty(0.5 * separation, 0.0, sigma_x, hbar)?;
        let g2 = GaussianState::minimum_uncertainty(-0.5 * separation, 0.0, sigma_x, hbar)?;
        Self::new(g1, g2, Complex64::new(1.0, 0.0))
    }

    pub fn packet1(&self) -> &GaussianState {
        &self.packet1
    }

    pub fn packet2(&self) -> &GaussianState {
        &self.packet2
    }

    pub fn amp2(&self) -> Complex64 {
        self.amp2
    }

    /// `⟨g₁|c g₂⟩`-free normalization `‖|g₁⟩ + c|g₂⟩‖²`.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// `⟨g₁|g₂⟩`.
    pub fn overlap(&self) -> Complex64 {
        self.overlap.conj()
    }

    /// `L = |x₁ - x₂|`.
    pub fn separation(&self) -> f64 {
        (self.packet1.mean.x - self.packet2.mean.x).abs()
    }

    pub fn hbar(&self) -> f64 {
        self.packet1.hbar
    }

    /// `[W₁₁, |c|² W₂₂, 2 c̄ W₁₂] / N`; the Wigner function is the sum of
    /// their real parts.
    pub fn terms(&self) -> &[GaussianTerm; 3] {
        &self.terms
    }

    /// Incoherent mixture with the same branch weights.
    pub fn mixture(&self) -> MixedTerms {
        let w = 1.0 + self.amp2.norm_sqr();
        let t1 = self.packet1.term().scaled(Complex64::new(1.0 / w, 0.0));
        let t2 = self.packet2.term().scaled(Complex64::new(self.amp2.norm_sqr() / w, 0.0));
        MixedTerms { terms: vec![t1, t2] }
    }
}

impl WignerFunction for CatState {
    fn wigner(&self, x: f64, p: f64) -> f64 {
        cat_wigner_value(self, x, p)
    }

    fn support(&self, nsigma: f64) -> Window {
        union_support(&self.terms, nsigma)
    }
}

/// Wigner function of a cat state at `(x, p)`.
pub fn cat_wigner_value(cat: &CatState, x: f64, p: f64) -> f64 {
    cat.terms.iter().map(|t| t.value(x, p)).sum()
}

/// An arbitrary finite sum of Gaussian terms.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedTerms {
    terms: Vec<GaussianTerm>,
}

impl MixedTerms {
    pub fn terms(&self) -> &[GaussianTerm] {
        &self.terms
    }

    pub fn evolve(&self, force: f64, diffusion: f64, mass: f64, t: f64) -> Result<Self> {
        let kernel = propagator_kernel(diffusion, mass, t)?;
        Ok(Self { terms: self.terms.iter().map(|term| term.evolved(&kernel, force)).collect() })
    }
}

impl WignerFunction for MixedTerms {
    fn wigner(&self, x: f64, p: f64) -> f64 {
        self.terms.iter().map(|t| t.value(x, p)).sum()
    }

    fn support(&self, nsigma: f64) -> Window {
        union_support(&self.terms, nsigma)
    }
}

fn union_support(terms: &[GaussianTerm], nsigma: f64) -> Window {
    terms
        .iter()
        .map(|t| t.support(nsigma))
        .reduce(|a, b| a.union(&b))
        .expect("at least one term")
}

/// Wigner function of the operator `|ψ_j⟩⟨ψ_k|` for two pure packets with
/// equal covariance, from the Gaussian integral
/// `(1/2πħ) ∫ dy e^{-ipy/ħ} ψ_j(x+y/2) ψ_k*(x-y/2)`.
fn branch_cross_term(j: &GaussianState, k: &GaussianState) -> GaussianTerm {
    let hbar = j.hbar;
    let var_x = j.cov[(0, 0)];
    let a = Complex64::new(1.0 / (4.0 * var_x), -j.cov[(0, 1)] / (2.0 * hbar * var_x));
    let ac = a.conj();
    let i = Complex64::i();
    let (xj, pj) = (j.mean.x, j.mean.y);
    let (xk, pk) = (k.mean.x, k.mean.y);
    // quadratic coefficient of y in the exponent is -big_a y²
    let big_a = 0.5 * a.re;
    let n_sq = (2.0 * a.re / PI).sqrt();
    let ln_pref = (n_sq / (2.0 * PI * hbar) * (PI / big_a).sqrt()).ln();

    let mid = Vec2::new(0.5 * (xj + xk), 0.5 * (pj + pk));
    let (u1, u2) = (mid.x - xj, mid.x - xk);
    let b = -a * u1 + ac * u2 + i * (pj + pk) / (2.0 * hbar) - i * mid.y / hbar;
    let kk = -a * u1 * u1 - ac * u2 * u2 + i * (pj * u1 - pk * u2) / hbar;
    let e = kk + b * b / (4.0 * big_a);
    let db = [ac - a, -i / hbar];
    let dk = [-2.0 * a * u1 - 2.0 * ac * u2 + i * (pj - pk) / hbar, Complex64::new(0.0, 0.0)];
    let g = [dk[0] + b / (2.0 * big_a) * db[0], dk[1] + b / (2.0 * big_a) * db[1]];

    let s = &j.cov;
    let sg = [s[(0, 0)] * g[0] + s[(0, 1)] * g[1], s[(1, 0)] * g[0] + s[(1, 1)] * g[1]];
    let center = [mid.x + sg[0], mid.y + sg[1]];
    let ln_weight = ln_pref + e + 0.5 * (g[0] * sg[0] + g[1] * sg[1]);
    GaussianTerm::new(ln_weight, center, *s)
}

/// A cat state after propagation: the two (generally mixed) branches, the
/// decoherence factor multiplying the `|1⟩⟨2|` coherence, and the full
/// evolved Wigner function.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolvedCat {
    pub branch1: GaussianState,
    pub branch2: GaussianState,
    pub gamma: Complex64,
    pub wigner: MixedTerms,
}

impl WignerFunction for EvolvedCat {
    fn wigner(&self, x: f64, p: f64) -> f64 {
        self.wigner.wigner(x, p)
    }

    fn support(&self, nsigma: f64) -> Window {
        self.wigner.support(nsigma)
    }
}

pub fn propagate_cat(cat: &CatState, diffusion: f64, mass: f64, t: f64) -> Result<EvolvedCat> {
    propagate_cat_full(cat, 0.0, diffusion, mass, t)
}

/// Propagates both branches and the interference term under a uniform
/// force and momentum diffusion.
///
/// `γ = exp(-½ kᵀ C_t k) · exp(i F (x₁-x₂) t/ħ)` where `k = (0, -(x₁-x₂)/ħ)`
/// is the fringe wavevector, so `|γ| = exp(-D L² t/ħ²)`. Branches with
/// unequal momenta are rejected because their separation is not static.
pub fn propagate_cat_full(cat: &CatState, force: f64, diffusion: f64, mass: f64, t: f64) -> Result<EvolvedCat> {
    if cat.packet1.mean.y != cat.packet2.mean.y {
        return Err(Error::BranchMismatch { what: "momentum" });
    }
    ensure_finite("F", force)?;
    let kernel = propagator_kernel(diffusion, mass, t)?;
    let branch1 = propagate_gaussian_full(&cat.packet1, force, diffusion, mass, t)?;
    let branch2 = propagate_gaussian_full(&cat.packet2, force, diffusion, mass, t)?;

    let hbar = cat.hbar();
    let dx = cat.packet1.mean.x - cat.packet2.mean.x;
    // R_t^{-T} leaves (0, k_p) unchanged
    let k = Vec2::new(0.0, -dx / hbar);
    let s = 0.5 * (k.transpose() * kernel.cov * k)[(0, 0)];
    let theta = force * dx * t / hbar;
    let gamma = Complex64::from_polar((-s).exp(), theta);

    let wigner = MixedTerms { terms: cat.terms.iter().map(|term| term.evolved(&kernel, force)).collect() };
    Ok(EvolvedCat { branch1, branch2, gamma, wigner })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecoherenceTime {
    After(f64),
    Never,
}

/// `τ_D = ħ²/(D L²)`.
pub fn decoherence_time(diffusion: f64, separation: f64, hbar: f64) -> Result<DecoherenceTime> {
    ensure_nonnegative("D", diffusion)?;
    ensure_positive("L", separation)?;
    ensure_positive("hbar", hbar)?;
    if diffusion == 0.0 {
        return Ok(DecoherenceTime::Never);
    }
    Ok(DecoherenceTime::After(hbar * hbar / (diffusion * separation * separation)))
}

/// `exp[-D t (x - x')²/ħ²]`.
pub fn off_diagonal_decay(x: f64, x_prime: f64, diffusion: f64, t: f64, hbar: f64) -> Result<f64> {
    ensure_nonnegative("D", diffusion)?;
    ensure_nonnegative("t", t)?;
    ensure_positive("hbar", hbar)?;
    let d = x - x_prime;
    Ok((-diffusion * t * d * d / (hbar * hbar)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn kernel_examples() {
        let k0 = propagator_kernel(0.0, 1.0, 3.0).unwrap();
        assert_eq!(*k0.cov(), Mat2::zeros());
        let k = propagator_kernel(1.0, 1.0, 1.0).unwrap();
        assert!((k.cov()[(0, 0)] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(k.cov()[(0, 1)], 1.0);
        assert_eq!(k.cov()[(1, 1)], 2.0);
        assert_eq!(k.reverse_flow(1.0, 2.0), (-1.0, 2.0));
        assert!(propagator_kernel(-1.0, 1.0, 1.0).is_err());
        assert!(propagator_kernel(1.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn dispersion_adds_in_quadrature() {
        let (hbar, m, t, sigma) = (1.0, 2.0, 3.0, 0.4);
        let g = GaussianState::minimum_uncertainty(0.0, 0.0, sigma, hbar).unwrap();
        let out = propagate_gaussian(&g, 0.0, m, t).unwrap();
        let disp = hbar * t / (2.0 * m * sigma);
        assert!(close(out.var_x(), sigma * sigma + disp * disp, 1e-14));
        assert!(out.is_pure());
    }

    #[test]
    fn diffusion_grows_momentum_variance() {
        let g = GaussianState::minimum_uncertainty(0.3, -1.0, 0.7, 1.0).unwrap();
        let out = propagate_gaussian(&g, 0.25, 1.0, 2.0).unwrap();
        assert!(close(out.var_p() - g.var_p(), 2.0 * 0.25 * 2.0, 1e-14));
        assert_eq!(propagate_gaussian(&g, 0.25, 1.0, 0.0).unwrap(), g);
    }

    #[test]
    fn force_translates() {
        let g = GaussianState::minimum_uncertainty(0.0, 0.0, 1.0, 1.0).unwrap();
        let out = propagate_gaussian_with_force(&g, 2.0, 1.0, 1.0).unwrap();
        assert_eq!(out.mean(), Vec2::new(1.0, 2.0));
        let free = propagate_gaussian(&g, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(out.cov(), free.cov());
        assert_eq!(propagate_gaussian_with_force(&g, 0.0, 1.0, 1.0).unwrap(), free);
        // F_SQL with hbar = m = T = 1 displaces by exactly sigma_meas = 1
        let f_sql = crate::sql::force_sql(1.0, 1.0, 1.0).unwrap();
        let sql = propagate_gaussian_with_force(&g, f_sql, 1.0, 1.0).unwrap();
        assert!((sql.mean().x - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gaussian_wigner_is_normalized_density() {
        let g = GaussianState::correlated(0.5, -0.2, 0.8, 0.3, 1.0).unwrap();
        let peak = g.wigner(0.5, -0.2);
        assert!(close(peak, 1.0 / (2.0 * PI * g.cov().determinant().sqrt()), 1e-14));
        assert!(g.wigner(0.6, 0.0) < peak);
    }

    #[test]
    fn uncertainty_violation_is_rejected() {
        let cov = Mat2::new(0.1, 0.0, 0.0, 0.1);
        assert!(matches!(GaussianState::new(Vec2::zeros(), cov, 1.0), Err(Error::Heisenberg { .. })));
        assert!(GaussianState::correlated(0.0, 0.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn cross_term_matches_direct_integral_on_diagonal() {
        // W[|j⟩⟨j|] built through the cross-term path is the plain Gaussian
        let g = GaussianState::correlated(0.4, 1.1, 0.6, -0.4, 0.7).unwrap();
        let t = branch_cross_term(&g, &g);
        for &(x, p) in &[(0.4, 1.1), (0.0, 0.0), (1.0, 2.0), (-0.3, 1.5)] {
            let direct = g.wigner(x, p);
            let via = t.complex_value(x, p);
            assert!(close(via.re, direct, 1e-12), "{x} {p}: {via} vs {direct}");
            assert!(via.im.abs() < 1e-12 * direct.abs().max(1e-300));
        }
    }

    #[test]
    fn cross_term_fringes_have_wavenumber_l_over_hbar() {
        let hbar = 0.5;
        let cat = CatState::symmetric(1.0, 12.0, hbar).unwrap();
        let k = cat.terms()[2].wavevector();
        assert!(k.x.abs() < 1e-12);
        assert!(close(k.y.abs(), 12.0 / hbar, 1e-12));
        assert!(close(cat.terms()[2].envelope_center().x, 0.0, 1e-12) || cat.terms()[2].envelope_center().x.abs() < 1e-12);
    }

    #[test]
    fn cat_far_field_vanishes() {
        let cat = CatState::symmetric(1.0, 12.0, 1.0).unwrap();
        assert!(cat.wigner(30.0, 0.0).abs() < 1e-12);
        assert!(cat.wigner(0.0, 8.0).abs() < 1e-12);
        // the fringe peak at the midpoint equals the sum of branch peaks
        let peak = cat.wigner(0.0, 0.0);
        assert!(close(peak, 2.0 / (2.0 * PI * 0.5) / cat.norm(), 1e-7));
    }

    #[test]
    fn overlapping_branches_are_rejected() {
        assert!(matches!(CatState::symmetric(1.0, 2.0, 1.0), Err(Error::BranchOverlap { .. })));
    }

    #[test]
    fn cat_gamma_examples() {
        let cat = CatState::symmetric(1.0, 1.0 * 12.0, 1.0).unwrap();
        let free = propagate_cat(&cat, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(free.gamma, Complex64::new(1.0, 0.0));
        let cat1 = CatState::symmetric(0.05, 1.0, 1.0).unwrap();
        let e = propagate_cat(&cat1, 1.0, 1.0, 1.0).unwrap();
        assert!(close(e.gamma.norm(), (-1.0f64).exp(), 1e-14));
        assert!(close(e.gamma.norm(), off_diagonal_decay(0.5, -0.5, 1.0, 1.0, 1.0).unwrap(), 1e-14));
    }

    #[test]
    fn unequal_branch_momenta_rejected_for_gamma() {
        let g1 = GaussianState::minimum_uncertainty(6.0, 0.5, 1.0, 1.0).unwrap();
        let g2 = GaussianState::minimum_uncertainty(-6.0, 0.0, 1.0, 1.0).unwrap();
        let cat = CatState::new(g1, g2, Complex64::new(1.0, 0.0)).unwrap();
        assert!(matches!(propagate_cat(&cat, 0.1, 1.0, 1.0), Err(Error::BranchMismatch { what: "momentum" })));
    }

    #[test]
    fn decoherence_time_examples() {
        assert_eq!(decoherence_time(1.0, 1.0, 1.0).unwrap(), DecoherenceTime::After(1.0));
        assert_eq!(decoherence_time(1.0, 2.0, 1.0).unwrap(), DecoherenceTime::After(0.25));
        match decoherence_time(1e-6, 1e3, 1.0).unwrap() {
            DecoherenceTime::After(t) => assert!(close(t, 1.0, 1e-12)),
            DecoherenceTime::Never => panic!(),
        }
        assert_eq!(decoherence_time(0.0, 1.0, 1.0).unwrap(), DecoherenceTime::Never);
    }

    #[test]
    fn off_diagonal_decay_examples() {
        assert_eq!(off_diagonal_decay(0.3, 0.3, 5.0, 2.0, 1.0).unwrap(), 1.0);
        assert!(close(off_diagonal_decay(1.0, 0.0, 1.0, 1.0, 1.0).unwrap(), (-1.0f64).exp(), 1e-15));
    }
}
