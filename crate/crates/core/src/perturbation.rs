//! Entanglement between a probe and its environment appears only at second
//! order in a weak coupling.
//!
//! For `H = H_P + H_E + εH_I` on a finite bipartite space, peeling off the
//! local evolutions leaves `U′_t = e^{iH_P t} e^{iH_E t} e^{-iHt}
//! = e^{-iεH̃_I t} + O(ε²)`. A product initial state therefore stays a
//! product state to first order, and the probe's purity deficit scales as
//! `ε²`. Everything here uses dense matrices and is meant for small systems.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expm::expm;
use crate::grid::fmt_f64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// Seed of the default test system.
pub const DEFAULT_SEED: u64 = 42;
/// Coupling strengths of the default sweep.
pub const DEFAULT_EPS: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];
/// Largest total dimension accepted for dense exponentials.
pub const MAX_DIMENSION: usize = 256;

const HERMITIAN_TOL: f64 = 1e-12;

fn i() -> Complex64 {
    Complex64::i()
}

fn real(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

fn check_hermitian(name: &'static str, h: &CMat) -> Result<()> {
    if !h.is_square() {
        return Err(Error::Dimension(format!("{name} is {}x{}, not square", h.nrows(), h.ncols())));
    }
    let scale = h.iter().fold(1.0f64, |m, z| m.max(z.norm()));
    let asym = (h - h.adjoint()).iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if asym > HERMITIAN_TOL * scale {
        return Err(Error::InvalidParameter { name, reason: format!("not Hermitian (deviation {asym:e})") });
    }
    Ok(())
}

fn normalized(name: &'static str, v: &CVec) -> Result<CVec> {
    let n = v.norm();
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::InvalidParameter { name, reason: "state vector must be nonzero".into() });
    }
    Ok(v / real(n))
}

/// Probe ⊗ environment with local Hamiltonians, a coupling and a product
/// initial state `|N₀⟩ ⊗ |E₀⟩`. Index `a·d_E + e` labels `|a⟩ ⊗ |e⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteSystem {
    hp: CMat,
    he: CMat,
    hi: CMat,
    n0: CVec,
    e0: CVec,
}

impl BipartiteSystem {
    pub fn new(hp: CMat, he: CMat, hi: CMat, n0: CVec, e0: CVec) -> Result<Self> {
        check_hermitian("H_P", &hp)?;
        check_hermitian("H_E", &he)?;
        check_hermitian("H_I", &hi)?;
        let (dp, de) = (hp.nrows(), he.nrows());
        if dp == 0 || de == 0 {
            return Err(Error::Dimension("empty subsystem".into()));
        }
        if dp * de > MAX_DIMENSION {
            return Err(Error::Dimension(format!("total dimension {} exceeds {MAX_DIMENSION}", dp * de)));
        }
        if hi.nrows() != dp * de {
            return Err(Error::Dimension(format!("H_I is {0}x{0}, expected {1}x{1}", hi.nrows(), dp * de)));
        }
        if n0.len() != dp || e0.len() != de {
            return Err(Error::Dimension("initial state dimensions do not match the Hamiltonians".into()));
        }
        Ok(Self { n0: normalized("N0", &n0)?, e0: normalized("E0", &e0)?, hp, he, hi })
    }

    /// Gaussian-random Hermitian Hamiltonians and random initial factors,
    /// reproducible from `seed`.
    pub fn random(dp: usize, de: usize, seed: u64) -> Result<Self> {
        guard(dp, de)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let hp = random_hermitian(dp, &mut rng);
        let he = random_hermitian(de, &mut rng);
        let hi = random_hermitian(dp * de, &mut rng);
        let n0 = random_vector(dp, &mut rng);
        let e0 = random_vector(de, &mut rng);
        Self::new(hp, he, hi, n0, e0)
    }

    /// `H_I = A ⊗ H_E` with `|E₀⟩` an eigenvector of `H_E`: the environment
    /// never leaves `|E₀⟩`, so no entanglement forms at any order.
    pub fn commuting(dp: usize, de: usize, seed: u64) -> Result<Self> {
        guard(dp, de)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let hp = random_hermitian(dp, &mut rng);
        let he = random_hermitian(de, &mut rng);
        let a = random_hermitian(dp, &mut rng);
        let n0 = random_vector(dp, &mut rng);
        let eig = he.clone().symmetric_eigen();
        let e0 = eig.eigenvectors.column(0).into_owned();
        Self::new(hp, he.clone(), a.kronecker(&he), n0, e0)
    }

    pub fn probe_dim(&self) -> usize {
        self.hp.nrows()
    }

    pub fn env_dim(&self) -> usize {
        self.he.nrows()
    }

    pub fn hp(&self) -> &CMat {
        &self.hp
    }

    pub fn he(&self) -> &CMat {
        &self.he
    }

    pub fn hi(&self) -> &CMat {
        &self.hi
    }

    pub fn n0(&self) -> &CVec {
        &self.n0
    }

    pub fn e0(&self) -> &CVec {
        &self.e0
    }

    pub fn psi0(&self) -> CVec {
        self.n0.kronecker(&self.e0)
    }

    /// `H_P ⊗ I + I ⊗ H_E`.
    pub fn local_hamiltonian(&self) -> CMat {
        let (dp, de) = (self.probe_dim(), self.env_dim());
        self.hp.kronecker(&CMat::identity(de, de)) + CMat::identity(dp, dp).kronecker(&self.he)
    }

    pub fn hamiltonian(&self, eps: f64) -> CMat {
        self.local_hamiltonian() + &self.hi * real(eps)
    }
}

fn guard(dp: usize, de: usize) -> Result<()> {
    if dp == 0 || de == 0 || dp.saturating_mul(de) > MAX_DIMENSION {
        return Err(Error::Dimension(format!("dimensions {dp}x{de} outside 1..={MAX_DIMENSION} total")));
    }
    Ok(())
}

fn gaussian_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

pub fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| gaussian_complex(rng));
    (&g + g.adjoint()) * real(0.5)
}

fn random_vector(n: usize, rng: &mut ChaCha8Rng) -> CVec {
    let v = CVec::from_fn(n, |_, _| gaussian_complex(rng));
    let norm = v.norm();
    v / real(norm)
}

/// `[C₂, C₃]` in `e^{A+B} = e^A e^B e^{C₂} e^{C₃} ⋯`:
/// `C₂ = -½[A,B]`, `C₃ = ⅓[B,[A,B]] + ⅙[A,[A,B]]`.
pub fn zassenhaus_terms(a: &CMat, b: &CMat) -> Result<[CMat; 2]> {
    if !a.is_square() || a.shape() != b.shape() {
        return Err(Error::Dimension(format!("zassenhaus needs equal square matrices, got {:?} and {:?}", a.shape(), b.shape())));
    }
    let ab = commutator(a, b);
    let c2 = &ab * real(-0.5);
    let c3 = commutator(b, &ab) * real(1.0 / 3.0) + commutator(a, &ab) * real(1.0 / 6.0);
    Ok([c2, c3])
}

/// Frobenius norm of `e^{h(A+B)} - e^{hA} e^{hB} e^{C₂(hA,hB)} e^{C₃(hA,hB)}`.
pub fn zassenhaus_residual(a: &CMat, b: &CMat, h: f64) -> Result<f64> {
    let (ha, hb) = (a * real(h), b * real(h));
    let [c2, c3] = zassenhaus_terms(&ha, &hb)?;
    let exact = expm(&(&ha + &hb))?;
    let approx = expm(&ha)? * expm(&hb)? * expm(&c2)? * expm(&c3)?;
    Ok((exact - approx).norm())
}

fn unitary(h: &CMat, t: f64) -> Result<CMat> {
    expm(&(h * (-i() * t)))
}

/// `U_t = e^{-iHt}`.
pub fn full_evolution(sys: &BipartiteSystem, eps: f64, t: f64) -> Result<CMat> {
    unitary(&sys.hamiltonian(eps), t)
}

/// `U′_t = e^{iH_P t} e^{iH_E t} e^{-iHt}`.
pub fn peeled_evolution(sys: &BipartiteSystem, eps: f64, t: f64) -> Result<CMat> {
    Ok(unitary(&sys.local_hamiltonian(), -t)? * full_evolution(sys, eps, t)?)
}

/// `H̃_I = (1/t) ∫₀ᵗ e^{iH₀s} H_I e^{-iH₀s} ds`, the generator of `U′_t` at
/// first order in `ε`.
///
/// The integral is the upper-right block of
/// `exp(t [[-iH₀, H_I], [0, -iH₀]])` multiplied on the left by `e^{iH₀t}`.
pub fn effective_interaction(sys: &BipartiteSystem, t: f64) -> Result<CMat> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter { name: "t", reason: "must be positive".into() });
    }
    let h0 = sys.local_hamiltonian();
    let n = h0.nrows();
    let gen = &h0 * (-i());
    let mut block = CMat::zeros(2 * n, 2 * n);
    block.view_mut((0, 0), (n, n)).copy_from(&gen);
    block.view_mut((n, n), (n, n)).copy_from(&gen);
    block.view_mut((0, n), (n, n)).copy_from(sys.hi());
    let e = expm(&(block * real(t)))?;
    let integral = e.view((0, n), (n, n)).into_owned();
    Ok(unitary(&h0, -t)? * integral / real(t))
}

/// `⟨E₀| H̃_I |E₀⟩` as a probe operator.
pub fn effective_probe_hamiltonian(sys: &BipartiteSystem, t: f64) -> Result<CMat> {
    let h = effective_interaction(sys, t)?;
    Ok(environment_expectation(&h, sys.e0(), sys.probe_dim()))
}

fn environment_expectation(h: &CMat, e0: &CVec, dp: usize) -> CMat {
    let de = e0.len();
    CMat::from_fn(dp, dp, |a, b| {
        let mut acc = Complex64::new(0.0, 0.0);
        for e in 0..de {
            for f in 0..de {
                acc += e0[e].conj() * h[(a * de + e, b * de + f)] * e0[f];
            }
        }
        acc
    })
}

fn amplitude_matrix(psi: &CVec, dp: usize, de: usize) -> CMat {
    CMat::from_fn(dp, de, |a, e| psi[a * de + e])
}

/// Reduced probe state `Tr_E |ψ⟩⟨ψ|`.
pub fn probe_reduced(psi: &CVec, dp: usize, de: usize) -> CMat {
    let m = amplitude_matrix(psi, dp, de);
    &m * m.adjoint()
}

/// Reduced environment state `Tr_P |ψ⟩⟨ψ|`.
pub fn environment_reduced(psi: &CVec, dp: usize, de: usize) -> CMat {
    let m = amplitude_matrix(psi, dp, de);
    (m.adjoint() * &m).transpose()
}

/// `1 - Tr ρ²`.
pub fn deficit_of(rho: &CMat) -> f64 {
    1.0 - rho.iter().map(|z| z.norm_sqr()).sum::<f64>()
}

/// Probe state `Tr_E[U_t |ψ₀⟩⟨ψ₀| U_t†]`.
pub fn probe_state(sys: &BipartiteSystem, eps: f64, t: f64) -> Result<CMat> {
    let psi = full_evolution(sys, eps, t)? * sys.psi0();
    Ok(probe_reduced(&psi, sys.probe_dim(), sys.env_dim()))
}

/// Probe state in the frame that removes the local evolution.
pub fn peeled_probe_state(sys: &BipartiteSystem, eps: f64, t: f64) -> Result<CMat> {
    let psi = peeled_evolution(sys, eps, t)? * sys.psi0();
    Ok(probe_reduced(&psi, sys.probe_dim(), sys.env_dim()))
}

/// `1 - Tr ρ_P(t)²` after full evolution from `|ψ₀⟩`.
pub fn purity_deficit(sys: &BipartiteSystem, eps: f64, t: f64) -> Result<f64> {
    Ok(deficit_of(&probe_state(sys, eps, t)?))
}

/// `|Ñ_t⟩ ∝ (I - iεt⟨E₀|H̃_I|E₀⟩)|N₀⟩`, normalized, in the peeled frame.
pub fn first_order_state(sys: &BipartiteSystem, eps: f64, t: f64) -> Result<CVec> {
    if eps == 0.0 {
        return Ok(sys.n0().clone());
    }
    let h = effective_probe_hamiltonian(sys, t)?;
    let dp = sys.probe_dim();
    let op = CMat::identity(dp, dp) - h * (i() * (eps * t));
    normalized("N_t", &(op * sys.n0()))
}

/// `1 - ⟨Ñ_t|ρ′_P(t)|Ñ_t⟩` against the exact peeled-frame probe state.
pub fn first_order_infidelity(sys: &BipartiteSystem, eps: f64, t: f64) -> Result<f64> {
    let n = first_order_state(sys, eps, t)?;
    let rho = peeled_probe_state(sys, eps, t)?;
    Ok(1.0 - (n.adjoint() * rho * &n)[(0, 0)].re)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 || points.iter().any(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return None;
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|(x, _)| x.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|(_, y)| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(sxy / sxx)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeficitSweep {
    /// `(ε, deficit)` in the order requested.
    pub points: Vec<(f64, f64)>,
    /// `None` when some deficit is not positive (no entanglement formed).
    pub slope: Option<f64>,
}

impl DeficitSweep {
    /// `eps,deficit` CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("eps,deficit\n");
        for (e, d) in &self.points {
            let _ = writeln!(out, "{},{}", fmt_f64(*e), fmt_f64(*d));
        }
        out
    }
}

pub fn deficit_sweep(sys: &BipartiteSystem, eps: &[f64], t: f64) -> Result<DeficitSweep> {
    if eps.len() < 3 {
        return Err(Error::InvalidParameter { name: "eps", reason: format!("need at least 3 values for a slope fit, got {}", eps.len()) });
    }
    if let Some(e) = eps.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidParameter { name: "eps", reason: format!("values must be positive, got {e}") });
    }
    let points = eps
        .par_iter()
        .map(|&e| purity_deficit(sys, e, t).map(|d| (e, d)))
        .collect::<Result<Vec<_>>>()?;
    let slope = log_log_slope(&points);
    Ok(DeficitSweep { points, slope })
}
