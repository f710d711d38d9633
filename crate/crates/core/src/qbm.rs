//! General ideal quantum Brownian motion generated by a quadratic
//! Hamiltonian and Lindblad operators linear in `x̂` and `p̂`.
//!
//! With `Ĥ = H_ab α̂^a α̂^b / 2` and `L̂⁽ⁱ⁾ = L⁽ⁱ⁾_a α̂^a` the dissipative part
//! is captured by the real symmetric diffusion form
//! `D_ab = Re Σᵢ (L⁽ⁱ⁾_a)* L⁽ⁱ⁾_b` and the friction scalar
//! `λ = Im Σᵢ (L⁽ⁱ⁾_x)* L⁽ⁱ⁾_p`. Complete positivity requires `D_ab ⪰ 0` and
//! `det D ≥ λ²`.

use std::fmt;

use num_complex::Complex64;

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::phase::{sym_eigen, symmetrize, Mat2, LEVI_CIVITA};

/// Slack on the boundary `det D = λ²`.
const DET_SLACK: f64 = 1e-12;
/// Eigenvalues above `-EIG_SLACK * max|D|` count as non-negative.
const EIG_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct LindbladSpec {
    hmat: Mat2,
    lvecs: Vec<[Complex64; 2]>,
    hbar: f64,
}

impl LindbladSpec {
    pub fn new(hmat: Mat2, lvecs: Vec<[Complex64; 2]>, hbar: f64) -> Result<Self> {
        ensure_positive("hbar", hbar)?;
        let hmat = symmetrize(&hmat)?;
        for l in &lvecs {
            for c in l {
                ensure_finite("lvecs", c.re)?;
                ensure_finite("lvecs", c.im)?;
            }
        }
        Ok(Self { hmat, lvecs, hbar })
    }

    pub fn hmat(&self) -> &Mat2 {
        &self.hmat
    }

    pub fn lvecs(&self) -> &[[Complex64; 2]] {
        &self.lvecs
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }
}

/// Diffusion form, friction and Hamiltonian of an ideal QBM generator.
#[derive(Debug, Clone, PartialEq)]
pub struct QbmParams {
    dmat: Mat2,
    lambda: f64,
    hmat: Mat2,
    hbar: f64,
}

impl QbmParams {
    pub fn new(dmat: Mat2, lambda: f64, hmat: Mat2, hbar: f64) -> Result<Self> {
        ensure_positive("hbar", hbar)?;
        ensure_finite("lambda", lambda)?;
        let dmat = symmetrize(&dmat)?;
        let hmat = symmetrize(&hmat)?;
        if let Err(v) = validate_qbm(&dmat, lambda) {
            return Err(Error::InvalidParameter { name: "dmat", reason: v.to_string() });
        }
        Ok(Self { dmat, lambda, hmat, hbar })
    }

    /// Pure momentum diffusion `∂ρ = -i/ħ[p̂²/2m, ρ] - D/ħ²[x̂,[x̂,ρ]]`.
    pub fn momentum_diffusion(diffusion: f64, mass: f64, hbar: f64) -> Result<Self> {
        ensure_positive("m", mass)?;
        crate::error::ensure_nonnegative("D", diffusion)?;
        let hmat = Mat2::new(0.0, 0.0, 0.0, 1.0 / mass);
        let dmat = Mat2::new(2.0 * diffusion / (hbar * hbar), 0.0, 0.0, 0.0);
        Self::new(dmat, 0.0, hmat, hbar)
    }

    pub fn dmat(&self) -> &Mat2 {
        &self.dmat
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn hmat(&self) -> &Mat2 {
        &self.hmat
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// `F_ab = H_ab + ε_ab λ`.
    pub fn fmat(&self) -> Mat2 {
        // lowered symbol: eps_xp = -1, eps_px = +1
        self.hmat - LEVI_CIVITA * self.lambda
    }

    /// `D^{ab} = ε^{ac} ε^{bd} D_cd`.
    pub fn dmat_raised(&self) -> Mat2 {
        LEVI_CIVITA * self.dmat * LEVI_CIVITA.transpose()
    }

    /// Diffusion matrix of the Wigner-function Fokker-Planck equation,
    /// `∂W = ... + ½ ħ² D^{ab} ∂_a ∂_b W`.
    pub fn wigner_diffusion(&self) -> Mat2 {
        self.dmat_raised() * (self.hbar * self.hbar)
    }
}

/// Which complete-positivity condition failed.
#[derive(Debug, Clone, PartialEq)]
pub enum QbmViolation {
    NegativeEigenvalue { eigenvalue: f64 },
    Determinant { det: f64, lambda_sq: f64 },
    NonFinite,
}

impl fmt::Display for QbmViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NegativeEigenvalue { eigenvalue } => {
                write!(f, "diffusion matrix has negative eigenvalue {eigenvalue}")
            }
            Self::Determinant { det, lambda_sq } => {
                write!(f, "det D = {det} is below lambda^2 = {lambda_sq}")
            }
            Self::NonFinite => write!(f, "non-finite entry"),
        }
    }
}

/// Checks `D ⪰ 0` and `det D ≥ λ²` (with `1e-12·max(1, λ²)` slack on the
/// determinant).
pub fn validate_qbm(dmat: &Mat2, lambda: f64) -> std::result::Result<(), QbmViolation> {
    if dmat.iter().any(|v| !v.is_finite()) || !lambda.is_finite() {
        return Err(QbmViolation::NonFinite);
    }
    let (_, _, d2) = sym_eigen(dmat);
    if d2 < -EIG_SLACK * dmat.amax() {
        return Err(QbmViolation::NegativeEigenvalue { eigenvalue: d2 });
    }
    let det = dmat.determinant();
    let lambda_sq = lambda * lambda;
    if det < lambda_sq - DET_SLACK * lambda_sq.max(1.0) {
        return Err(QbmViolation::Determinant { det, lambda_sq });
    }
    Ok(())
}

/// Builds `(D_ab, λ)` from the Lindblad vectors.
pub fn qbm_from_lindblad(spec: &LindbladSpec) -> QbmParams {
    let mut dmat = Mat2::zeros();
    let mut lambda = 0.0;
    for l in &spec.lvecs {
        for a in 0..2 {
            for b in 0..2 {
                dmat[(a, b)] += (l[a].conj() * l[b]).re;
            }
        }
        lambda += (l[0].conj() * l[1]).im;
    }
    // Cauchy-Schwarz makes (dmat, lambda) valid, so bypass re-validation
    // which could only trip on rounding at the boundary.
    QbmParams { dmat, lambda, hmat: spec.hmat, hbar: spec.hbar }
}

/// Phase-space rotation diagonalizing `D^{ab}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionAxes {
    pub theta: f64,
    pub d1: f64,
    pub d2: f64,
}

/// `R(θ) D^{ab} R(θ)ᵀ = diag(d1, d2)` with `d1 ≥ d2` and `θ ∈ (-π/2, π/2]`.
pub fn diagonalize_diffusion(params: &QbmParams) -> DiffusionAxes {
    let (theta, d1, d2) = sym_eigen(&params.dmat_raised());
    DiffusionAxes { theta, d1, d2: d2.max(0.0).min(d1) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::rotation;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn free(m: f64) -> Mat2 {
        Mat2::new(0.0, 0.0, 0.0, 1.0 / m)
    }

    #[test]
    fn momentum_diffusion_from_single_position_operator() {
        let d = 1.0;
        let spec = LindbladSpec::new(free(1.0), vec![[c((2.0f64 * d).sqrt(), 0.0), c(0.0, 0.0)]], 1.0).unwrap();
        let q = qbm_from_lindblad(&spec);
        assert!((q.dmat()[(0, 0)] - 2.0).abs() < 1e-15);
        assert_eq!(q.dmat()[(1, 1)], 0.0);
        assert_eq!(q.lambda(), 0.0);
        assert!((q.dmat_raised()[(1, 1)] - 2.0 * d).abs() < 1e-15);
        assert_eq!(q.dmat_raised()[(0, 0)], 0.0);
        let direct = QbmParams::momentum_diffusion(d, 1.0, 1.0).unwrap();
        assert!((q.dmat() - direct.dmat()).amax() < 1e-15);
        assert_eq!(q.hmat(), direct.hmat());
    }

    #[test]
    fn no_lindblad_operators_is_hamiltonian() {
        let spec = LindbladSpec::new(free(2.0), vec![], 1.0).unwrap();
        let q = qbm_from_lindblad(&spec);
        assert_eq!(*q.dmat(), Mat2::zeros());
        assert_eq!(q.lambda(), 0.0);
        assert_eq!(q.fmat(), free(2.0));
    }

    #[test]
    fn boundary_lindblad_vector() {
        let spec = LindbladSpec::new(Mat2::zeros(), vec![[c(1.0, 0.0), c(0.0, 1.0)]], 1.0).unwrap();
        let q = qbm_from_lindblad(&spec);
        assert_eq!(*q.dmat(), Mat2::identity());
        assert_eq!(q.lambda(), 1.0);
        assert_eq!(q.dmat().determinant(), 1.0);
        assert!(validate_qbm(q.dmat(), q.lambda()).is_ok());
        // F_xp = H_xp + eps_xp λ = -λ, F_px = +λ
        assert_eq!(q.fmat(), Mat2::new(0.0, -1.0, 1.0, 0.0));
    }

    #[test]
    fn validation_reports_failed_condition() {
        assert!(matches!(
            validate_qbm(&Mat2::new(0.5, 0.0, 0.0, 0.5), 1.0),
            Err(QbmViolation::Determinant { .. })
        ));
        assert!(validate_qbm(&Mat2::new(2.0, 0.0, 0.0, 0.0), 0.0).is_ok());
        match validate_qbm(&Mat2::new(1.0, 2.0, 2.0, 1.0), 0.0) {
            Err(QbmViolation::NegativeEigenvalue { eigenvalue }) => assert!((eigenvalue + 1.0).abs() < 1e-14),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(validate_qbm(&Mat2::new(f64::NAN, 0.0, 0.0, 1.0), 0.0), Err(QbmViolation::NonFinite));
    }

    #[test]
    fn constructor_symmetrizes_noise_and_rejects_asymmetry() {
        let noisy = Mat2::new(1.0, 0.5, 0.5 + 1e-15, 1.0);
        let q = QbmParams::new(noisy, 0.0, Mat2::zeros(), 1.0).unwrap();
        assert_eq!(q.dmat()[(0, 1)], q.dmat()[(1, 0)]);
        let bad = Mat2::new(1.0, 0.5, 0.4, 1.0);
        assert!(matches!(QbmParams::new(bad, 0.0, Mat2::zeros(), 1.0), Err(Error::NotSymmetric { .. })));
        assert!(LindbladSpec::new(Mat2::zeros(), vec![], 0.0).is_err());
    }

    fn params_with_raised(raised: Mat2) -> QbmParams {
        // lower the indices: D_ab = εᵀ D^{ab} ε
        let lowered = LEVI_CIVITA.transpose() * raised * LEVI_CIVITA;
        QbmParams::new(lowered, 0.0, Mat2::zeros(), 1.0).unwrap()
    }

    #[test]
    fn diagonalization_examples() {
        let a = diagonalize_diffusion(&params_with_raised(Mat2::new(2.0, 0.0, 0.0, 0.0)));
        assert_eq!((a.theta, a.d1, a.d2), (0.0, 2.0, 0.0));

        let b = diagonalize_diffusion(&params_with_raised(Mat2::new(1.0, 1.0, 1.0, 1.0)));
        assert!((b.theta - FRAC_PI_4).abs() < 1e-15);
        assert!((b.d1 - 2.0).abs() < 1e-15 && b.d2.abs() < 1e-15);

        let c = diagonalize_diffusion(&params_with_raised(Mat2::new(0.0, 0.0, 0.0, 2.0)));
        assert!((c.theta - FRAC_PI_2).abs() < 1e-15);
        assert_eq!((c.d1, c.d2), (2.0, 0.0));

        let tie = diagonalize_diffusion(&params_with_raised(Mat2::identity()));
        assert_eq!(tie.theta, 0.0);
    }

    #[test]
    fn diagonalization_reassembles() {
        let raised = Mat2::new(3.0, -0.7, -0.7, 0.4);
        let p = params_with_raised(raised);
        let axes = diagonalize_diffusion(&p);
        let r = rotation(axes.theta);
        let back = r.transpose() * Mat2::new(axes.d1, 0.0, 0.0, axes.d2) * r;
        assert!((back - p.dmat_raised()).amax() <= 1e-12 * raised.amax());
    }
}
